//! The constructive growth loop: sample a terminal, try the nearest segments
//! as connection sites, and commit the connection with the smallest total
//! tree volume that satisfies the geometric constraints.

mod index;

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use index::{nearest_linear, SpatialIndex};

use crate::domain::PerfusionDomain;
use crate::error::{CcoError, Result};
use crate::geometry::{Point, SegmentGeometry};
use crate::kamiya::{optimal_bifurcation, BifurcationSolution, LocalBifurcationProblem, SolverSettings};
use crate::tree::{CcoParams, SegmentId, VesselTree};

/// Domain samples used to project a root position that lies outside the domain.
pub const ROOT_PROJECTION_SAMPLES: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Infeasibility {
    OutsideDomain,
    IntersectsTree,
    DegenerateGeometry,
    SolverFailed,
}

impl Infeasibility {
    pub fn as_str(self) -> &'static str {
        match self {
            Infeasibility::OutsideDomain => "outside-domain",
            Infeasibility::IntersectsTree => "intersects-tree",
            Infeasibility::DegenerateGeometry => "degenerate-geometry",
            Infeasibility::SolverFailed => "solver-failed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Infeasibility::OutsideDomain,
            Infeasibility::IntersectsTree,
            Infeasibility::DegenerateGeometry,
            Infeasibility::SolverFailed,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
    }
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CandidateEvaluation {
    pub target_segment: SegmentId,
    pub outcome: std::result::Result<FeasibleConnection, Infeasibility>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibleConnection {
    pub solution: BifurcationSolution,
    /// Full-tree volume after the hypothetical commit, m^3.
    pub total_cost: f64,
}

impl CandidateEvaluation {
    pub fn total_cost(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|c| c.total_cost)
    }

    pub fn is_feasible(&self) -> bool {
        self.outcome.is_ok()
    }
}

/// One line of the evaluation log.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationRecord {
    /// Terminal count the tree reaches if this step commits.
    pub step: usize,
    /// Index of the candidate point within the step.
    pub attempt: usize,
    pub target: SegmentId,
    pub reason: Option<Infeasibility>,
    pub cost: Option<f64>,
    pub committed: bool,
}

/// Existing segment as seen by [`check_constraints`].
#[derive(Clone, Copy, Debug)]
pub struct ExistingSegment {
    pub geometry: SegmentGeometry,
    /// Whether it shares a node with each proposed segment (such pairs are exempt from clearance).
    pub adjacent: [bool; 3],
}

/// `eta * (domain_measure / n_terminals)^(1/dim)`.
pub fn distance_threshold(domain_measure: f64, n_terminals_current: usize, eta: f64, dim: usize) -> f64 {
    eta * (domain_measure / n_terminals_current as f64).powf(1.0 / dim as f64)
}

/// Draws one domain point and accepts it iff its distance to the nearest
/// segment axis is at least `d_thresh`.
pub fn sample_candidate(
    domain: &PerfusionDomain,
    index: &SpatialIndex,
    d_thresh: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Point>> {
    let p = domain.sample_point(rng)?;
    let nearest = index.nearest_distance(&p).unwrap_or(f64::INFINITY);
    Ok((nearest >= d_thresh).then_some(p))
}

/// The `min(n_con, segment_count)` segments closest to `p`, ascending by distance then id.
pub fn nearest_segments(index: &SpatialIndex, p: &Point, n_con: usize) -> Vec<SegmentId> {
    index.nearest(p, n_con).into_iter().map(|(id, _)| id).collect()
}

/// Geometric feasibility of up to three proposed segments, checked in order:
/// (a) each lies in the domain; (b) clearance `>= (1 + margin)(r_a + r_b)` to every
/// non-adjacent existing segment; (c) each length is at least `max(min_length, 2 r)`.
pub fn check_constraints(
    domain: &PerfusionDomain,
    proposed: &[SegmentGeometry],
    existing: &[ExistingSegment],
    margin: f64,
    min_length: f64,
) -> std::result::Result<(), Infeasibility> {
    let step = domain.default_step();
    if !proposed.iter().all(|s| domain.segment_inside(s, step)) {
        return Err(Infeasibility::OutsideDomain);
    }
    for (i, prop) in proposed.iter().enumerate() {
        let rp = prop.radius.unwrap_or(0.0);
        for other in existing {
            if other.adjacent.get(i).copied().unwrap_or(false) {
                continue;
            }
            let need = (1.0 + margin) * (rp + other.geometry.radius.unwrap_or(0.0));
            if prop.distance_to_segment(&other.geometry) <= need {
                return Err(Infeasibility::IntersectsTree);
            }
        }
    }
    for prop in proposed {
        let r = prop.radius.unwrap_or(0.0);
        if prop.length() < min_length.max(2.0 * r) {
            return Err(Infeasibility::DegenerateGeometry);
        }
    }
    Ok(())
}

/// Local problem for connecting `candidate` onto `target`.
///
/// The rest of the tree is frozen under the post-insertion terminal flow
/// `q' = q_perf / (N + 1)`: `f1 = n_leaves(target) q'`, `f2 = q'`, `p2 = p_term`,
/// `p0` is the current pressure at the target's proximal node, and
/// `p1 = p_term + f1 R_down` where `R_down` is the resistance downstream of the
/// target's distal node. `r_star` is radius-free, so the downstream part of it,
/// `r_star(target) - k l(target)`, is converted to a resistance by dividing by
/// the target's current realized radius to the fourth power (zero for a leaf).
pub fn local_problem(tree: &VesselTree, target: SegmentId, candidate: Point) -> Result<LocalBifurcationProblem> {
    let params = tree.params();
    let seg = tree.segment(target);
    let q_next = params.q_perf / (tree.terminal_count() + 1) as f64;
    let f1 = seg.n_leaves as f64 * q_next;
    let r = tree
        .radius(target)
        .ok_or_else(|| CcoError::Usage("radii are not realized".into()))?;
    let downstream = if seg.is_leaf() {
        0.0
    } else {
        ((seg.r_star - params.poiseuille_factor() * seg.length()) / r.powi(4)).max(0.0)
    };
    Ok(LocalBifurcationProblem {
        x0: seg.proximal,
        x1: seg.distal,
        x2: candidate,
        f1,
        f2: q_next,
        p0: tree.proximal_pressure(target)?,
        p1: params.p_term + f1 * downstream,
        p2: params.p_term,
        mu: params.mu,
        gamma: params.gamma,
        min_length: tree.min_length(),
    })
}

/// Committed tree that connecting `candidate` to `target` at `x_b` would produce, radii realized.
fn hypothetical_commit(tree: &VesselTree, target: SegmentId, x_b: Point, candidate: Point) -> Result<(VesselTree, SegmentId, SegmentId)> {
    let mut scratch = tree.clone();
    let (bif, leaf) = scratch.split_segment(target, x_b, candidate)?;
    scratch.update_hydrodynamics(target);
    scratch.realize_radii();
    Ok((scratch, bif, leaf))
}

/// Evaluates one connection site for `candidate`. Infeasibility is reported, never thrown.
pub fn evaluate_connection(
    tree: &VesselTree,
    domain: &PerfusionDomain,
    index: &SpatialIndex,
    target: SegmentId,
    candidate: Point,
) -> CandidateEvaluation {
    let infeasible = |reason| CandidateEvaluation {
        target_segment: target,
        outcome: Err(reason),
    };
    let params = tree.params();
    let Ok(problem) = local_problem(tree, target, candidate) else {
        return infeasible(Infeasibility::SolverFailed);
    };
    if problem.check().is_err() {
        return infeasible(Infeasibility::DegenerateGeometry);
    }
    let settings = SolverSettings {
        tol: params.tol,
        max_iter: params.max_iter,
    };
    let solution = match optimal_bifurcation(&problem, &settings) {
        Ok(s) => s,
        Err(CcoError::DegenerateSolution) => return infeasible(Infeasibility::DegenerateGeometry),
        Err(_) => return infeasible(Infeasibility::SolverFailed),
    };
    let Ok((scratch, bif, leaf)) = hypothetical_commit(tree, target, solution.x_b, candidate) else {
        return infeasible(Infeasibility::DegenerateGeometry);
    };
    let proposed = [
        scratch.segment(target).geometry(),
        scratch.segment(bif).geometry(),
        scratch.segment(leaf).geometry(),
    ];
    let existing = nearby_existing(&scratch, index, target, bif, &proposed);
    if let Err(reason) = check_constraints(domain, &proposed, &existing, params.clearance_margin, tree.min_length()) {
        return infeasible(reason);
    }
    match scratch.volume() {
        Ok(total_cost) => CandidateEvaluation {
            target_segment: target,
            outcome: Ok(FeasibleConnection { solution, total_cost }),
        },
        Err(_) => infeasible(Infeasibility::SolverFailed),
    }
}

/// Existing segments of the post-commit tree that can come within clearance range of a proposal.
fn nearby_existing(
    scratch: &VesselTree,
    index: &SpatialIndex,
    target: SegmentId,
    bif: SegmentId,
    proposed: &[SegmentGeometry; 3],
) -> Vec<ExistingSegment> {
    let r_max = scratch.radius(scratch.root()).unwrap_or(0.0);
    let reach = proposed
        .iter()
        .map(|p| p.radius.unwrap_or(0.0))
        .fold(0.0, f64::max)
        + r_max;
    let reach = 2.0 * reach + scratch.min_length();
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in proposed {
        let (a, b) = p.bounds();
        for ax in 0..3 {
            lo[ax] = lo[ax].min(a[ax] - reach);
            hi[ax] = hi[ax].max(b[ax] + reach);
        }
    }
    let parent = scratch.segment(target).parent;
    let sibling = scratch.sibling(target);
    index
        .query_box(lo, hi)
        .into_iter()
        .filter(|&id| id != target)
        .map(|id| {
            let s = scratch.segment(id);
            ExistingSegment {
                geometry: s.geometry(),
                adjacent: [
                    Some(id) == parent || Some(id) == sibling,
                    s.parent == Some(bif),
                    false,
                ],
            }
        })
        .collect()
}

/// Growth options that do not affect the result.
#[derive(Clone, Debug)]
pub struct GrowOptions {
    /// Worker threads for candidate evaluation; output is identical for every value.
    pub threads: usize,
    /// Desired root position, projected into the domain when outside.
    pub root: Option<Point>,
}

impl Default for GrowOptions {
    fn default() -> Self {
        GrowOptions { threads: 1, root: None }
    }
}

/// Grows a tree to `params.k_term` terminals.
pub fn grow(params: &CcoParams, domain: &PerfusionDomain, seed_tree: Option<VesselTree>) -> Result<VesselTree> {
    grow_with(params, domain, seed_tree, &GrowOptions::default(), None)
}

/// [`grow`] with options and an optional evaluation log.
pub fn grow_with(
    params: &CcoParams,
    domain: &PerfusionDomain,
    seed_tree: Option<VesselTree>,
    options: &GrowOptions,
    mut log: Option<&mut Vec<EvaluationRecord>>,
) -> Result<VesselTree> {
    params.validate()?;
    if params.dim != domain.dim() {
        return Err(CcoError::param("dim", format!("{}D parameters for a {}D domain", params.dim, domain.dim())));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.threads.max(1))
        .build()
        .map_err(|e| CcoError::Usage(format!("thread pool: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let measure = domain.measure();
    let min_length = domain.min_segment_length();

    let mut tree = match seed_tree {
        Some(seed) => prepare_seed(seed, params, domain)?,
        None => {
            let root = project_root(domain, options.root, &mut rng)?;
            let first = first_terminal(domain, params, root, &mut rng)?;
            let mut t = VesselTree::new(params.clone(), root, first, min_length)?;
            t.realize_radii();
            t
        }
    };
    let (lo, hi) = domain.bounding_box();
    let mut index = SpatialIndex::for_tree(&tree, &lo, &hi, 2 * params.k_term);

    while tree.terminal_count() < params.k_term {
        let step = tree.terminal_count() + 1;
        let mut d_thresh = distance_threshold(measure, tree.terminal_count(), params.eta, params.dim);
        let mut rejections = 0usize;
        let mut discarded = 0usize;
        let mut attempt = 0usize;
        loop {
            let Some(candidate) = sample_candidate(domain, &index, d_thresh, &mut rng)? else {
                rejections += 1;
                if rejections.is_multiple_of(params.relax_every) {
                    d_thresh *= params.relax_factor;
                }
                continue;
            };
            rejections = 0;
            let targets = nearest_segments(&index, &candidate, params.n_con);
            let evaluations: Vec<CandidateEvaluation> = pool.install(|| {
                targets
                    .par_iter()
                    .map(|&t| evaluate_connection(&tree, domain, &index, t, candidate))
                    .collect()
            });
            let best = evaluations
                .iter()
                .filter_map(|e| e.total_cost().map(|c| (c, e.target_segment, e)))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .map(|(_, _, e)| e.clone());
            if let Some(log) = log.as_deref_mut() {
                for e in &evaluations {
                    log.push(EvaluationRecord {
                        step,
                        attempt,
                        target: e.target_segment,
                        reason: e.outcome.as_ref().err().copied(),
                        cost: e.total_cost(),
                        committed: best.as_ref().is_some_and(|b| b.target_segment == e.target_segment),
                    });
                }
            }
            attempt += 1;
            match best {
                Some(eval) => {
                    let target = eval.target_segment;
                    let x_b = eval.outcome.as_ref().expect("feasible").solution.x_b;
                    let (bif, leaf) = tree.split_segment(target, x_b, candidate)?;
                    tree.update_hydrodynamics(target);
                    tree.realize_radii();
                    for id in [target, bif, leaf] {
                        let s = tree.segment(id);
                        index.insert(id, s.proximal, s.distal);
                    }
                    break;
                }
                None => {
                    discarded += 1;
                    if discarded >= params.discard_cap {
                        return Err(CcoError::GrowthStalled {
                            discarded,
                            terminals: tree.terminal_count(),
                            partial: Box::new(tree),
                        });
                    }
                }
            }
        }
    }
    tree.realize_radii();
    Ok(tree)
}

fn prepare_seed(mut seed: VesselTree, params: &CcoParams, domain: &PerfusionDomain) -> Result<VesselTree> {
    if seed.dim() != domain.dim() {
        return Err(CcoError::InvalidSeed(format!("{}D seed tree for a {}D domain", seed.dim(), domain.dim())));
    }
    seed.set_params(params.clone())?;
    seed.set_min_length(domain.min_segment_length());
    seed.realize_radii();
    let report = seed.validate(domain)?;
    if !report.passes() {
        return Err(CcoError::InvalidSeed(format!("seed tree does not validate: {report:?}")));
    }
    Ok(seed)
}

/// Desired root if it lies in the domain, otherwise the closest of
/// [`ROOT_PROJECTION_SAMPLES`] domain samples (first wins on ties).
/// Without a desired root the bottom-center of the bounding box is used.
pub fn project_root(domain: &PerfusionDomain, desired: Option<Point>, rng: &mut ChaCha8Rng) -> Result<Point> {
    let desired = match desired {
        Some(p) => p,
        None => default_root(domain),
    };
    if desired.dim() != domain.dim() {
        return Err(CcoError::param("root", format!("expected {} coordinates", domain.dim())));
    }
    if domain.contains(&desired)? {
        return Ok(desired);
    }
    let mut best = domain.sample_point(rng)?;
    let mut best_d = best.distance(&desired);
    for _ in 1..ROOT_PROJECTION_SAMPLES {
        let p = domain.sample_point(rng)?;
        let d = p.distance(&desired);
        if d < best_d {
            best = p;
            best_d = d;
        }
    }
    Ok(best)
}

/// Bottom-center of the bounding box: center on every axis except the minimum on y.
pub fn default_root(domain: &PerfusionDomain) -> Point {
    let (lo, hi) = domain.bounding_box();
    let mut c = ((lo + hi) * 0.5).xyz();
    c[1] = lo.xyz()[1];
    Point::from_slice(&c[..domain.dim()]).expect("finite bounding box")
}

/// First terminal: a sample at least `d_thresh(1)` from the root (relaxed on
/// rejection) whose connection to the root stays inside the domain.
fn first_terminal(domain: &PerfusionDomain, params: &CcoParams, root: Point, rng: &mut ChaCha8Rng) -> Result<Point> {
    let mut d_thresh = distance_threshold(domain.measure(), 1, params.eta, params.dim);
    let step = domain.default_step();
    let min_length = domain.min_segment_length();
    let mut rejections = 0usize;
    for _ in 0..params.discard_cap * params.relax_every * 100 {
        let p = domain.sample_point(rng)?;
        let d = p.distance(&root);
        if d >= d_thresh && d >= min_length && domain.segment_inside(&SegmentGeometry::new(root, p), step) {
            return Ok(p);
        }
        rejections += 1;
        if rejections.is_multiple_of(params.relax_every) {
            d_thresh *= params.relax_factor;
        }
    }
    Err(CcoError::DegenerateGeometry(format!(
        "no admissible first terminal after {rejections} samples"
    )))
}
