//! Tree CSV serialization.
//!
//! Header `id,parent,px,py,pz,dx,dy,dz,radius,flow,beta`, one row per segment.
//! Ids are renumbered in preorder so every parent precedes its children; the
//! root row has parent `-1`. Reals use `{:.16e}` (17 significant digits, exact
//! round trip). `pz`/`dz` are 0 for 2D trees.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{CcoError, Result, TreeFileFault};
use crate::geometry::Point;
use crate::tree::{CcoParams, SegmentId, SegmentRecord, VesselTree};

pub const TREE_HEADER: &str = "id,parent,px,py,pz,dx,dy,dz,radius,flow,beta";

/// Relative tolerance for stored beta/flow/radius against recomputed values.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-9;

/// One parsed row.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeFileRecord {
    pub id: usize,
    pub parent: Option<usize>,
    pub proximal: [f64; 3],
    pub distal: [f64; 3],
    pub radius: f64,
    pub flow: f64,
    pub beta: f64,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serializes a tree with realized radii.
pub fn format_tree(tree: &VesselTree) -> Result<String> {
    let order = tree.preorder();
    let mut new_id = vec![0usize; tree.segment_count()];
    for (i, id) in order.iter().enumerate() {
        new_id[id.index()] = i;
    }
    let mut out = String::with_capacity(order.len() * 220);
    out.push_str(TREE_HEADER);
    out.push('\n');
    for (i, &id) in order.iter().enumerate() {
        let s = tree.segment(id);
        let radius = s
            .radius
            .ok_or_else(|| CcoError::Usage("write_tree needs realized radii".into()))?;
        let parent = match s.parent {
            Some(p) => new_id[p.index()].to_string(),
            None => "-1".to_string(),
        };
        let p = s.proximal.xyz();
        let d = s.distal.xyz();
        let _ = writeln!(
            out,
            "{i},{parent},{},{},{},{},{},{},{},{},{}",
            num(p[0]),
            num(p[1]),
            num(p[2]),
            num(d[0]),
            num(d[1]),
            num(d[2]),
            num(radius),
            num(tree.flow(id)),
            num(s.beta)
        );
    }
    Ok(out)
}

pub fn write_tree(tree: &VesselTree, path: &Path) -> Result<()> {
    let text = format_tree(tree)?;
    std::fs::write(path, text).map_err(|e| CcoError::io(path, e))
}

fn fault(line: usize, fault: TreeFileFault, message: impl Into<String>) -> CcoError {
    CcoError::TreeFormat {
        line,
        fault,
        message: message.into(),
    }
}

/// Parses rows and checks the file-level invariants (dense ids, one root,
/// parents before children, strict binary arity). Does not look at physics.
pub fn parse_records(text: &str) -> Result<Vec<TreeFileRecord>> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    let mut lines = body.split('\n');
    match lines.next() {
        Some(h) if h == TREE_HEADER => {}
        _ => return Err(fault(1, TreeFileFault::Malformed, format!("expected header `{TREE_HEADER}`"))),
    }
    let mut records: Vec<TreeFileRecord> = Vec::new();
    let mut root_line = None;
    for (i, line) in lines.enumerate() {
        let ln = i + 2;
        if line.is_empty() {
            return Err(fault(ln, TreeFileFault::Malformed, "empty row"));
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(fault(ln, TreeFileFault::Malformed, format!("expected 11 fields, found {}", fields.len())));
        }
        let id: usize = fields[0]
            .parse()
            .map_err(|_| fault(ln, TreeFileFault::Malformed, format!("bad id `{}`", fields[0])))?;
        if id != records.len() {
            return Err(fault(ln, TreeFileFault::Malformed, format!("id {id} out of order, expected {}", records.len())));
        }
        let parent = match fields[1] {
            "-1" => {
                if let Some(first) = root_line {
                    return Err(fault(ln, TreeFileFault::MultipleRoots, format!("second root (first on line {first})")));
                }
                root_line = Some(ln);
                None
            }
            s => {
                let p: usize = s
                    .parse()
                    .map_err(|_| fault(ln, TreeFileFault::Malformed, format!("bad parent `{s}`")))?;
                if p >= id {
                    return Err(fault(ln, TreeFileFault::DanglingParent, format!("parent {p} does not precede segment {id}")));
                }
                Some(p)
            }
        };
        let mut reals = [0.0f64; 9];
        for (k, f) in fields[2..].iter().enumerate() {
            let v: f64 = f
                .parse()
                .map_err(|_| fault(ln, TreeFileFault::Malformed, format!("bad number `{f}`")))?;
            if !v.is_finite() {
                return Err(fault(ln, TreeFileFault::Malformed, format!("non-finite value `{f}`")));
            }
            reals[k] = v;
        }
        let rec = TreeFileRecord {
            id,
            parent,
            proximal: [reals[0], reals[1], reals[2]],
            distal: [reals[3], reals[4], reals[5]],
            radius: reals[6],
            flow: reals[7],
            beta: reals[8],
        };
        if !(rec.radius > 0.0 && rec.flow > 0.0 && rec.beta > 0.0) {
            return Err(fault(ln, TreeFileFault::Malformed, "radius, flow and beta must be positive"));
        }
        records.push(rec);
    }
    if records.is_empty() || root_line.is_none() {
        return Err(fault(1, TreeFileFault::MissingRoot, "no row with parent -1"));
    }
    if records[0].parent.is_some() {
        return Err(fault(2, TreeFileFault::MissingRoot, "first row must be the root"));
    }
    let mut child_count = vec![0usize; records.len()];
    for r in &records {
        if let Some(p) = r.parent {
            child_count[p] += 1;
        }
    }
    if let Some(i) = child_count.iter().position(|&c| c != 0 && c != 2) {
        return Err(fault(i + 2, TreeFileFault::Arity, format!("segment {i} has {} children", child_count[i])));
    }
    Ok(records)
}

fn rel_err(stored: f64, expected: f64) -> f64 {
    (stored - expected).abs() / expected.abs()
}

/// Rebuilds a tree from CSV text. `n_leaves` and `r_star` are recomputed from
/// geometry under `params`; stored beta, flow share and radius ratios must
/// agree within [`CONSISTENCY_TOLERANCE`]. Radii are realized from `params`.
pub fn parse_tree(text: &str, params: &CcoParams) -> Result<VesselTree> {
    let records = parse_records(text)?;
    let dim = params.dim;
    let point = |c: &[f64; 3], ln: usize| -> Result<Point> {
        if dim == 2 && c[2] != 0.0 {
            return Err(fault(ln, TreeFileFault::Malformed, "2D tree with nonzero z"));
        }
        Point::from_slice(&c[..dim]).map_err(|e| fault(ln, TreeFileFault::Malformed, e.to_string()))
    };
    let mut children: Vec<Vec<SegmentId>> = vec![Vec::new(); records.len()];
    for r in &records {
        if let Some(p) = r.parent {
            children[p].push(SegmentId(r.id));
        }
    }
    let mut segs = Vec::with_capacity(records.len());
    for r in &records {
        let ln = r.id + 2;
        let proximal = point(&r.proximal, ln)?;
        let distal = point(&r.distal, ln)?;
        if let Some(p) = r.parent {
            if records[p].distal != r.proximal {
                return Err(fault(ln, TreeFileFault::Mismatch, format!("segment {} does not start at the distal end of {p}", r.id)));
            }
        }
        segs.push(SegmentRecord {
            proximal,
            distal,
            parent: r.parent.map(SegmentId),
            children: match children[r.id].as_slice() {
                [a, b] => Some([*a, *b]),
                _ => None,
            },
            beta: 1.0,
            n_leaves: 1,
            r_star: 0.0,
            radius: None,
        });
    }
    let mut tree = VesselTree::from_records(params.clone(), segs, 0.0).map_err(|e| match e {
        CcoError::Usage(m) => fault(1, TreeFileFault::Malformed, m),
        other => other,
    })?;

    let total = tree.terminal_count() as f64;
    let root_flow = records[0].flow;
    for r in &records {
        let ln = r.id + 2;
        let s = tree.segment(SegmentId(r.id));
        let beta_err = rel_err(r.beta, s.beta);
        if beta_err > CONSISTENCY_TOLERANCE {
            return Err(fault(ln, TreeFileFault::Mismatch, format!("beta {} differs from recomputed {} (rel {beta_err:e})", r.beta, s.beta)));
        }
        let share = root_flow * (s.n_leaves as f64 / total);
        let flow_err = rel_err(r.flow, share);
        if flow_err > CONSISTENCY_TOLERANCE {
            return Err(fault(ln, TreeFileFault::Mismatch, format!("flow {} differs from recomputed {share} (rel {flow_err:e})", r.flow)));
        }
        if let Some(p) = r.parent {
            let ratio = r.radius / records[p].radius;
            let ratio_err = rel_err(ratio, s.beta);
            if ratio_err > CONSISTENCY_TOLERANCE {
                return Err(fault(ln, TreeFileFault::Mismatch, format!("radius ratio {ratio} differs from beta {} (rel {ratio_err:e})", s.beta)));
            }
        }
    }
    tree.realize_radii();
    Ok(tree)
}

pub fn read_tree(path: &Path, params: &CcoParams) -> Result<VesselTree> {
    let text = std::fs::read_to_string(path).map_err(|e| CcoError::io(path, e))?;
    parse_tree(&text, params)
}

/// Dimension of a tree file: 3 if any z coordinate is nonzero, else 2.
pub fn infer_dim(records: &[TreeFileRecord]) -> usize {
    if records.iter().any(|r| r.proximal[2] != 0.0 || r.distal[2] != 0.0) {
        3
    } else {
        2
    }
}
