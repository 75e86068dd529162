//! Flat `key = value` run configuration (`.cco`).
//!
//! ```text
//! # comment
//! k_term = 250
//! domain.kind = "disk2d"
//! domain.radius = 1.0
//! root = [0.0, -1.0]
//! ```
//!
//! Values are numbers, double-quoted strings (`\"` and `\\` escapes), `true` /
//! `false`, or bracketed number lists. Numbers are SI units. Unknown keys,
//! duplicate keys and type mismatches are errors naming the key.
//!
//! | key | type | default |
//! |---|---|---|
//! | `k_term` | integer | required |
//! | `q_perf`, `p_perf`, `p_term`, `mu`, `gamma`, `eta`, `tol` | number | physiology defaults |
//! | `n_con`, `max_iter`, `seed` | integer | 20, 100, 0 |
//! | `clearance_margin`, `relax_factor` | number | 0.01, 0.9 |
//! | `discard_cap`, `relax_every` | integer | 1000, 10 |
//! | `domain.kind` | `"disk2d"`, `"sphere3d"`, `"box"`, `"mask"` | required |
//! | `domain.center` | list | origin |
//! | `domain.radius` | number | required for disk/sphere |
//! | `domain.min`, `domain.max` | list | required for box |
//! | `domain.mask_meta` | string | required for mask |
//! | `domain.mask` | string (`.mask` raw or `.pgm`) | required for mask |
//! | `root` | list | bottom-center of the domain box |
//! | `seed_tree`, `log`, `out.tree`, `out.svg` | string | unset |
//! | `threads` | integer | 1 |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::domain::PerfusionDomain;
use crate::error::{CcoError, Result};
use crate::geometry::Point;
use crate::io::mask::load_mask;
use crate::tree::CcoParams;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Number(f64),
    Str(String),
    Bool(bool),
    List(Vec<f64>),
}

impl Value {
    fn type_name(&self) -> &'static str {
        match self {
            Value::Number(_) => "number",
            Value::Str(_) => "string",
            Value::Bool(_) => "boolean",
            Value::List(_) => "list",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DomainSpec {
    Disk { center: Point, radius: f64 },
    Sphere { center: Point, radius: f64 },
    Box { min: Point, max: Point },
    Mask { meta: PathBuf, data: PathBuf },
}

impl DomainSpec {
    pub fn load(&self) -> Result<PerfusionDomain> {
        match self {
            DomainSpec::Disk { center, radius } => PerfusionDomain::disk(*center, *radius),
            DomainSpec::Sphere { center, radius } => PerfusionDomain::sphere(*center, *radius),
            DomainSpec::Box { min, max } => PerfusionDomain::cuboid(*min, *max),
            DomainSpec::Mask { meta, data } => Ok(PerfusionDomain::mask(load_mask(meta, data)?)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub params: CcoParams,
    pub domain: DomainSpec,
    pub root: Option<Point>,
    pub seed_tree: Option<PathBuf>,
    pub log: Option<PathBuf>,
    pub out_tree: Option<PathBuf>,
    pub out_svg: Option<PathBuf>,
    pub threads: usize,
}

const KNOWN_KEYS: &[&str] = &[
    "k_term",
    "q_perf",
    "p_perf",
    "p_term",
    "mu",
    "gamma",
    "n_con",
    "eta",
    "seed",
    "tol",
    "max_iter",
    "clearance_margin",
    "discard_cap",
    "relax_factor",
    "relax_every",
    "threads",
    "domain.kind",
    "domain.center",
    "domain.radius",
    "domain.min",
    "domain.max",
    "domain.mask_meta",
    "domain.mask",
    "root",
    "seed_tree",
    "log",
    "out.tree",
    "out.svg",
];

/// Raw entries keyed by name, with the line each came from (0 for overrides).
#[derive(Clone, Debug, Default)]
pub struct ConfigEntries {
    entries: BTreeMap<String, (usize, Value)>,
}

impl ConfigEntries {
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = ConfigEntries::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = strip_comment(raw).trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = parse_assignment(content, line)?;
            if out.entries.contains_key(&key) {
                return Err(config_err(line, &key, "duplicate key"));
            }
            out.entries.insert(key, (line, value));
        }
        Ok(out)
    }

    /// Applies a `key=value` override, replacing any file value.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = parse_assignment(assignment.trim(), 0)?;
        self.entries.insert(key, (0, value));
        Ok(())
    }

    /// Validates the entries into a [`RunConfig`]. Relative paths resolve against `base`.
    pub fn build(&self, base: &Path) -> Result<RunConfig> {
        for (key, (line, _)) in &self.entries {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(config_err(*line, key, "unknown key"));
            }
        }
        let mut p = CcoParams {
            k_term: self.integer("k_term")?.ok_or_else(|| config_err(0, "k_term", "missing required key"))?,
            ..CcoParams::default()
        };
        macro_rules! number {
            ($($field:ident),*) => {$(
                if let Some(v) = self.number(stringify!($field))? { p.$field = v; }
            )*};
        }
        macro_rules! integer {
            ($($field:ident),*) => {$(
                if let Some(v) = self.integer(stringify!($field))? { p.$field = v; }
            )*};
        }
        number!(q_perf, p_perf, p_term, mu, gamma, eta, tol, clearance_margin, relax_factor);
        integer!(n_con, max_iter, discard_cap, relax_every);
        if let Some(seed) = self.integer("seed")? {
            p.seed = seed as u64;
        }
        let threads = self.integer("threads")?.unwrap_or(1).max(1);

        let domain = self.domain(base)?;
        p.dim = match &domain {
            DomainSpec::Disk { .. } => 2,
            DomainSpec::Sphere { .. } => 3,
            DomainSpec::Box { min, .. } => min.dim(),
            DomainSpec::Mask { meta, .. } => crate::io::mask::read_meta(meta)?.dim,
        };
        if let Err(CcoError::Param { key, message }) = p.validate() {
            return Err(self.err(&key, &message));
        }
        let root = match self.list("root")? {
            Some(c) => {
                let pt = Point::from_slice(&c).map_err(|e| self.err("root", &e.to_string()))?;
                if pt.dim() != p.dim {
                    return Err(self.err("root", &format!("expected {} coordinates", p.dim)));
                }
                Some(pt)
            }
            None => None,
        };
        let seed_tree = self.path("seed_tree", base, true)?;
        Ok(RunConfig {
            params: p,
            domain,
            root,
            seed_tree,
            log: self.path("log", base, false)?,
            out_tree: self.path("out.tree", base, false)?,
            out_svg: self.path("out.svg", base, false)?,
            threads,
        })
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map(|(l, _)| *l).unwrap_or(0)
    }

    fn err(&self, key: &str, message: &str) -> CcoError {
        config_err(self.line_of(key), key, message)
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(key).map(|(_, v)| v)
    }

    fn mismatch(&self, key: &str, expected: &str) -> CcoError {
        let found = self.get(key).map(Value::type_name).unwrap_or("nothing");
        self.err(key, &format!("expected {expected}, found {found}"))
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Number(x)) => Ok(Some(*x)),
            Some(_) => Err(self.mismatch(key, "a number")),
        }
    }

    fn integer(&self, key: &str) -> Result<Option<usize>> {
        match self.number(key)? {
            None => Ok(None),
            Some(x) if x >= 0.0 && x.fract() == 0.0 && x <= usize::MAX as f64 => Ok(Some(x as usize)),
            Some(_) => Err(self.mismatch(key, "a non-negative integer")),
        }
    }

    fn string(&self, key: &str) -> Result<Option<&str>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Str(s)) => Ok(Some(s)),
            Some(_) => Err(self.mismatch(key, "a string")),
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::List(v)) => Ok(Some(v.clone())),
            Some(_) => Err(self.mismatch(key, "a list")),
        }
    }

    fn path(&self, key: &str, base: &Path, must_exist: bool) -> Result<Option<PathBuf>> {
        let Some(s) = self.string(key)? else {
            return Ok(None);
        };
        let path = base.join(s);
        if must_exist && !path.is_file() {
            return Err(self.err(key, &format!("file {} does not exist", path.display())));
        }
        Ok(Some(path))
    }

    fn point(&self, key: &str) -> Result<Option<Point>> {
        match self.list(key)? {
            Some(c) => Point::from_slice(&c).map(Some).map_err(|e| self.err(key, &e.to_string())),
            None => Ok(None),
        }
    }

    fn domain(&self, base: &Path) -> Result<DomainSpec> {
        let kind = self
            .string("domain.kind")?
            .ok_or_else(|| config_err(0, "domain.kind", "missing required key"))?;
        let radius = || {
            self.number("domain.radius")?
                .ok_or_else(|| self.err("domain.radius", "missing required key"))
        };
        let center = |dim: usize| -> Result<Point> {
            match self.point("domain.center")? {
                Some(c) if c.dim() == dim => Ok(c),
                Some(_) => Err(self.err("domain.center", &format!("expected {dim} coordinates"))),
                None => Ok(Point::zero(dim)),
            }
        };
        let spec = match kind {
            "disk2d" => DomainSpec::Disk {
                center: center(2)?,
                radius: radius()?,
            },
            "sphere3d" => DomainSpec::Sphere {
                center: center(3)?,
                radius: radius()?,
            },
            "box" => {
                let min = self.point("domain.min")?.ok_or_else(|| self.err("domain.min", "missing required key"))?;
                let max = self.point("domain.max")?.ok_or_else(|| self.err("domain.max", "missing required key"))?;
                if min.dim() != max.dim() {
                    return Err(self.err("domain.max", "dimension differs from domain.min"));
                }
                DomainSpec::Box { min, max }
            }
            "mask" => {
                let meta = self
                    .path("domain.mask_meta", base, true)?
                    .ok_or_else(|| self.err("domain.mask_meta", "missing required key"))?;
                let data = self
                    .path("domain.mask", base, true)?
                    .ok_or_else(|| self.err("domain.mask", "missing required key"))?;
                DomainSpec::Mask { meta, data }
            }
            other => {
                return Err(self.err("domain.kind", &format!("unknown domain kind `{other}`")));
            }
        };
        // analytic shapes are validated here so errors name the key
        match &spec {
            DomainSpec::Disk { radius, .. } | DomainSpec::Sphere { radius, .. } if !(*radius > 0.0) => {
                Err(self.err("domain.radius", "must be > 0"))
            }
            DomainSpec::Box { min, max } if min.coords().iter().zip(max.coords()).any(|(a, b)| !(b > a)) => {
                Err(self.err("domain.max", "must exceed domain.min on every axis"))
            }
            _ => Ok(spec),
        }
    }
}

fn config_err(line: usize, key: &str, message: &str) -> CcoError {
    CcoError::Config {
        line,
        key: key.to_string(),
        message: message.to_string(),
    }
}

fn strip_comment(line: &str) -> &str {
    let mut in_str = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        match c {
            _ if escaped => escaped = false,
            '\\' if in_str => escaped = true,
            '"' => in_str = !in_str,
            '#' if !in_str => return &line[..i],
            _ => {}
        }
    }
    line
}

fn parse_assignment(content: &str, line: usize) -> Result<(String, Value)> {
    let Some((key, value)) = content.split_once('=') else {
        return Err(config_err(line, content, "expected `key = value`"));
    };
    let key = key.trim();
    let valid_key = !key.is_empty()
        && key.chars().next().is_some_and(|c| c.is_ascii_lowercase() || c == '_')
        && key.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '.');
    if !valid_key {
        return Err(config_err(line, key, "invalid key"));
    }
    let value = parse_value(value.trim()).map_err(|m| config_err(line, key, &m))?;
    Ok((key.to_string(), value))
}

fn parse_number(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let v: f64 = s.replace('_', "").parse().map_err(|_| format!("cannot parse `{s}` as a number"))?;
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

fn parse_value(s: &str) -> std::result::Result<Value, String> {
    if s.is_empty() {
        return Err("missing value".into());
    }
    if let Some(rest) = s.strip_prefix('"') {
        let mut out = String::new();
        let mut chars = rest.chars();
        loop {
            match chars.next() {
                None => return Err("unterminated string".into()),
                Some('"') => break,
                Some('\\') => match chars.next() {
                    Some(c @ ('"' | '\\')) => out.push(c),
                    _ => return Err("invalid escape in string".into()),
                },
                Some(c) => out.push(c),
            }
        }
        if !chars.as_str().trim().is_empty() {
            return Err("trailing characters after string".into());
        }
        return Ok(Value::Str(out));
    }
    if let Some(inner) = s.strip_prefix('[') {
        let inner = inner.strip_suffix(']').ok_or("unterminated list")?;
        if inner.trim().is_empty() {
            return Ok(Value::List(Vec::new()));
        }
        return inner.split(',').map(parse_number).collect::<std::result::Result<Vec<_>, _>>().map(Value::List);
    }
    match s {
        "true" => Ok(Value::Bool(true)),
        "false" => Ok(Value::Bool(false)),
        _ => parse_number(s).map(Value::Number),
    }
}

/// Parses and validates a configuration; relative paths resolve against the working directory.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    ConfigEntries::parse(text)?.build(Path::new("."))
}

/// Reads a config file, applies `key=value` overrides, then validates.
/// Relative paths resolve against the config file's directory.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CcoError::io(path, e))?;
    let mut entries = ConfigEntries::parse(&text)?;
    for o in overrides {
        entries.set(o)?;
    }
    let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    entries.build(base)
}
