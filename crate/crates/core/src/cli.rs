//! Command-line frontend: `generate`, `validate` and `stats`.
//!
//! Exit codes are a stable contract:
//!
//! | code | meaning |
//! |---|---|
//! | 0 | success |
//! | 1 | input or configuration error (including malformed tree files) |
//! | 2 | growth stalled; the partial tree is written with a `.partial.csv` suffix |
//! | 3 | validation failure |
//! | 4 | I/O error |

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::error::CcoError;
use crate::growth::{grow_with, GrowOptions};
use crate::io::config::load_config;
use crate::io::tree_file::{parse_records, read_tree, write_tree, TreeFileRecord};
use crate::io::{export_svg, write_log};
use crate::tree::TreeReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    InputError = 1,
    GrowthStalled = 2,
    ValidationFailed = 3,
    IoError = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn of(err: &CcoError) -> Self {
        match err {
            CcoError::Io { .. } => ExitStatus::IoError,
            CcoError::GrowthStalled { .. } => ExitStatus::GrowthStalled,
            _ => ExitStatus::InputError,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "cco", version, about = "Synthetic vascular trees by constrained constructive optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Grow a tree from a configuration file.
    Generate {
        #[arg(long)]
        config: PathBuf,
        /// `KEY=VALUE` override applied before validation; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Also write an SVG rendering (2D only) to `out.svg` or next to the tree.
        #[arg(long)]
        svg: bool,
        /// Write the per-step evaluation log here.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Worker threads for candidate evaluation; does not change the output.
        #[arg(long)]
        threads: Option<usize>,
        /// Tree CSV path (overrides `out.tree`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a saved tree against a configuration's physiology and domain.
    Validate {
        tree: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Print summary statistics of a saved tree.
    Stats { tree: PathBuf },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    ExitStatus::Success
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    ExitStatus::InputError
                }
            };
        }
    };
    let result = match cli.command {
        Command::Generate {
            config,
            overrides,
            svg,
            log,
            threads,
            out: out_path,
        } => cmd_generate(&config, &overrides, svg, log, threads, out_path, out),
        Command::Validate { tree, config, overrides } => cmd_validate(&tree, &config, &overrides, out),
        Command::Stats { tree } => cmd_stats(&tree, out),
    };
    match result {
        Ok(status) => status,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            ExitStatus::of(&e)
        }
    }
}

fn partial_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.partial.csv"))
}

pub fn cmd_generate(
    config_path: &Path,
    overrides: &[String],
    svg: bool,
    log: Option<PathBuf>,
    threads: Option<usize>,
    out_path: Option<PathBuf>,
    out: &mut dyn Write,
) -> Result<ExitStatus, CcoError> {
    let cfg = load_config(config_path, overrides)?;
    let tree_path = out_path
        .or(cfg.out_tree.clone())
        .ok_or_else(|| CcoError::Config {
            line: 0,
            key: "out.tree".into(),
            message: "no output path (set out.tree or pass --out)".into(),
        })?;
    let svg_path = match (&cfg.out_svg, svg) {
        (Some(p), _) => Some(p.clone()),
        (None, true) => Some(tree_path.with_extension("svg")),
        (None, false) => None,
    };
    let log_path = log.or(cfg.log.clone());
    let domain = cfg.domain.load()?;
    let seed = match &cfg.seed_tree {
        Some(p) => Some(read_tree(p, &cfg.params)?),
        None => None,
    };
    let options = GrowOptions {
        threads: threads.unwrap_or(cfg.threads).max(1),
        root: cfg.root,
    };
    let mut records = Vec::new();
    let started = Instant::now();
    let grown = grow_with(
        &cfg.params,
        &domain,
        seed,
        &options,
        log_path.is_some().then_some(&mut records),
    );
    let elapsed = started.elapsed().as_secs_f64();
    if let Some(p) = &log_path {
        write_log(&records, p)?;
    }
    let tree = match grown {
        Ok(t) => t,
        Err(CcoError::GrowthStalled {
            discarded,
            terminals,
            partial,
        }) => {
            let p = partial_path(&tree_path);
            write_tree(&partial, &p)?;
            return Err(CcoError::GrowthStalled {
                discarded,
                terminals,
                partial,
            });
        }
        Err(e) => return Err(e),
    };
    write_tree(&tree, &tree_path)?;
    if let Some(p) = &svg_path {
        if tree.dim() == 2 {
            export_svg(&tree, &domain, p)?;
        }
    }
    let _ = writeln!(
        out,
        "terminals={} segments={} volume={:.9e} wall_time={:.3}s",
        tree.terminal_count(),
        tree.segment_count(),
        tree.volume()?,
        elapsed
    );
    Ok(ExitStatus::Success)
}

pub fn format_report(r: &TreeReport) -> String {
    format!(
        "terminal_count: {}\nsegment_count: {}\ntotal_volume: {:.9e}\nmax_murray_residual: {:.3e}\nmax_terminal_pressure_error: {:.3e}\nmin_clearance_margin: {:.6e}\nall_inside_domain: {}\nmax_depth: {}\n",
        r.terminal_count,
        r.segment_count,
        r.total_volume,
        r.max_murray_residual,
        r.max_terminal_pressure_error,
        r.min_clearance_margin,
        r.all_inside_domain,
        r.max_depth
    )
}

pub fn cmd_validate(
    tree_path: &Path,
    config_path: &Path,
    overrides: &[String],
    out: &mut dyn Write,
) -> Result<ExitStatus, CcoError> {
    let cfg = load_config(config_path, overrides)?;
    let domain = cfg.domain.load()?;
    let tree = read_tree(tree_path, &cfg.params)?;
    let report = tree.validate(&domain)?;
    let _ = write!(out, "{}", format_report(&report));
    let passed = report.passes();
    let _ = writeln!(out, "status: {}", if passed { "pass" } else { "fail" });
    Ok(if passed {
        ExitStatus::Success
    } else {
        ExitStatus::ValidationFailed
    })
}

/// Statistics computed from the stored rows alone (no physiology needed).
#[derive(Clone, Debug, PartialEq)]
pub struct TreeStats {
    pub terminal_count: usize,
    pub segment_count: usize,
    pub total_volume: f64,
    pub radius_min: f64,
    pub radius_max: f64,
    pub max_depth: usize,
    /// Mean angle between each child's direction and its parent's, degrees.
    pub mean_bifurcation_angle: Option<f64>,
}

pub fn tree_stats(records: &[TreeFileRecord]) -> TreeStats {
    let dir = |r: &TreeFileRecord| [r.distal[0] - r.proximal[0], r.distal[1] - r.proximal[1], r.distal[2] - r.proximal[2]];
    let len = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let mut depth = vec![0usize; records.len()];
    let mut has_child = vec![false; records.len()];
    let mut angles = Vec::new();
    let mut volume = 0.0;
    for r in records {
        volume += std::f64::consts::PI * len(dir(r)) * r.radius * r.radius;
        depth[r.id] = match r.parent {
            Some(p) => {
                has_child[p] = true;
                let (a, b) = (dir(&records[p]), dir(r));
                let cos = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]) / (len(a) * len(b));
                angles.push(cos.clamp(-1.0, 1.0).acos().to_degrees());
                depth[p] + 1
            }
            None => 1,
        };
    }
    TreeStats {
        terminal_count: has_child.iter().filter(|c| !**c).count(),
        segment_count: records.len(),
        total_volume: volume,
        radius_min: records.iter().map(|r| r.radius).fold(f64::INFINITY, f64::min),
        radius_max: records.iter().map(|r| r.radius).fold(0.0, f64::max),
        max_depth: depth.iter().copied().max().unwrap_or(0),
        mean_bifurcation_angle: (!angles.is_empty()).then(|| angles.iter().sum::<f64>() / angles.len() as f64),
    }
}

pub fn format_stats(s: &TreeStats) -> String {
    let angle = match s.mean_bifurcation_angle {
        Some(a) => format!("{a:.6}"),
        None => "n/a".into(),
    };
    format!(
        "terminals: {}\nsegments: {}\ntotal_volume: {:.9e}\nradius_min: {:.9e}\nradius_max: {:.9e}\nmax_depth: {}\nmean_bifurcation_angle_deg: {angle}\n",
        s.terminal_count, s.segment_count, s.total_volume, s.radius_min, s.radius_max, s.max_depth
    )
}

pub fn cmd_stats(tree_path: &Path, out: &mut dyn Write) -> Result<ExitStatus, CcoError> {
    let text = std::fs::read_to_string(tree_path).map_err(|e| CcoError::io(tree_path, e))?;
    let records = parse_records(&text)?;
    let _ = write!(out, "{}", format_stats(&tree_stats(&records)));
    Ok(ExitStatus::Success)
}
