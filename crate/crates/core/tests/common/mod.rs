#![allow(dead_code)]

use std::f64::consts::PI;

use cco_core::{CcoParams, Point, SegmentId, VesselTree};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random strictly binary tree with `terminals` leaves, built by splitting
/// random segments at random interior points and attaching random terminals.
pub fn random_tree(rng: &mut ChaCha8Rng, terminals: usize, dim: usize, gamma: f64) -> VesselTree {
    let params = CcoParams {
        k_term: terminals,
        gamma,
        dim,
        ..CcoParams::default()
    };
    let pt = |rng: &mut ChaCha8Rng| {
        let c: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Point::from_slice(&c).unwrap()
    };
    let root = pt(rng);
    let mut first = pt(rng);
    while first.distance(&root) < 0.2 {
        first = pt(rng);
    }
    let mut tree = VesselTree::new(params, root, first, 1e-6).unwrap();
    while tree.terminal_count() < terminals {
        let target = SegmentId(rng.gen_range(0..tree.segment_count()));
        let s = tree.segment(target).clone();
        let t = rng.gen_range(0.2..0.8);
        let bif = s.proximal + (s.distal - s.proximal) * t;
        let leaf = pt(rng);
        if leaf.distance(&bif) < 0.05 {
            continue;
        }
        tree.split_segment(target, bif, leaf).unwrap();
        tree.update_hydrodynamics(target);
    }
    tree.realize_radii();
    tree
}

/// Dense Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Result of solving the tree as a resistor network with the inlet held at
/// `p_perf` and every terminal held at `p_term`.
pub struct NetworkSolution {
    /// Flow entering the root segment.
    pub inflow: f64,
    /// Flow leaving each terminal segment, keyed by segment id.
    pub terminal_flows: Vec<(SegmentId, f64)>,
    /// Pressure at the distal node of every segment.
    pub distal_pressure: Vec<f64>,
}

/// Kirchhoff solve using only geometry and realized radii.
pub fn network_solve(tree: &VesselTree) -> NetworkSolution {
    let p = tree.params();
    let n = tree.segment_count();
    let conductance: Vec<f64> = tree
        .ids()
        .map(|id| {
            let s = tree.segment(id);
            let r = s.radius.unwrap();
            PI * r.powi(4) / (8.0 * p.mu * s.length())
        })
        .collect();
    // unknowns: distal pressure of every internal segment
    let internal: Vec<SegmentId> = tree.ids().filter(|&id| !tree.segment(id).is_leaf()).collect();
    let mut slot = vec![usize::MAX; n];
    for (k, id) in internal.iter().enumerate() {
        slot[id.0] = k;
    }
    let m = internal.len();
    let mut a = vec![vec![0.0; m]; m];
    let mut b = vec![0.0; m];
    // node pressure of the proximal end of `id`: a known value or an unknown
    let proximal = |id: SegmentId| -> Result<usize, f64> {
        match tree.segment(id).parent {
            Some(par) => Ok(slot[par.0]),
            None => Err(p.p_perf),
        }
    };
    for (k, &id) in internal.iter().enumerate() {
        // flow in through `id`, out through both children
        let g = conductance[id.0];
        a[k][k] += g;
        match proximal(id) {
            Ok(j) => a[k][j] -= g,
            Err(v) => b[k] += g * v,
        }
        for c in tree.segment(id).children.unwrap() {
            let gc = conductance[c.0];
            a[k][k] += gc;
            if tree.segment(c).is_leaf() {
                b[k] += gc * p.p_term;
            } else {
                a[k][slot[c.0]] -= gc;
            }
        }
    }
    let x = solve_dense(a, b);
    let mut distal_pressure = vec![p.p_term; n];
    for (k, id) in internal.iter().enumerate() {
        distal_pressure[id.0] = x[k];
    }
    let prox_p = |id: SegmentId| match tree.segment(id).parent {
        Some(par) => distal_pressure[par.0],
        None => p.p_perf,
    };
    let root = tree.root();
    let inflow = conductance[root.0] * (prox_p(root) - distal_pressure[root.0]);
    let terminal_flows = tree
        .ids()
        .filter(|&id| tree.segment(id).is_leaf())
        .map(|id| (id, conductance[id.0] * (prox_p(id) - p.p_term)))
        .collect();
    NetworkSolution {
        inflow,
        terminal_flows,
        distal_pressure,
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
