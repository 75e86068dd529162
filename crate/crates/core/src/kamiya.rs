//! Local bifurcation problem: where to place a new branching point and how
//! thick the three resulting segments are.
//!
//! With the branching point `x_b` fixed, the unknowns `(r0, r1, r2, p_b)` satisfy
//!
//! ```text
//! p0 - p_b = k f0 l0 / r0^4
//! p_b - p1 = k f1 l1 / r1^4
//! p_b - p2 = k f2 l2 / r2^4
//! r0^gamma = r1^gamma + r2^gamma
//! ```
//!
//! with `k = 8 mu / pi` and `f0 = f1 + f2`. Eliminating the radii leaves the
//! scalar residual `g(p_b) = r0^gamma - r1^gamma - r2^gamma`, strictly increasing
//! on `(max(p1, p2), p0)` and going from `-inf` to `+inf`, so bisection always
//! brackets its unique root.
//!
//! The branching point itself minimizes the local volume
//! `pi (l0 r0^2 + l1 r1^2 + l2 r2^2)` over `x_b`.

use std::f64::consts::PI;

use crate::error::{CcoError, Result};
use crate::geometry::Point;

/// Grid resolution of the fallback search used when the fixed point does not converge.
pub const FALLBACK_RESOLUTION: usize = 21;
/// Refinement levels of the fallback search.
pub const FALLBACK_LEVELS: usize = 3;

const MAX_BISECTION_STEPS: usize = 200;

/// Largest multiple of a fixed-point step tried when extrapolating along it.
const MAX_OVERRELAXATION: f64 = 16.0;

#[derive(Clone, Debug, PartialEq)]
pub struct LocalBifurcationProblem {
    /// Proximal end of the parent segment.
    pub x0: Point,
    /// Distal point of the existing branch.
    pub x1: Point,
    /// New terminal.
    pub x2: Point,
    pub f1: f64,
    pub f2: f64,
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub mu: f64,
    pub gamma: f64,
    /// Branching points closer than this to an endpoint are degenerate.
    pub min_length: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol: 1e-6,
            max_iter: 100,
        }
    }
}

/// Radii and branching pressure for a fixed branching point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalRadii {
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    pub p_b: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BifurcationSolution {
    pub x_b: Point,
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    pub p_b: f64,
    /// Local volume, m^3.
    pub cost: f64,
    /// True when the fixed point converged, false when the grid fallback produced the answer.
    pub converged: bool,
    pub iterations: usize,
}

impl LocalBifurcationProblem {
    pub fn f0(&self) -> f64 {
        self.f1 + self.f2
    }

    pub fn poiseuille_factor(&self) -> f64 {
        8.0 * self.mu / PI
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(CcoError::Usage(format!("invalid bifurcation problem: {m}")));
        if !(self.f1 > 0.0 && self.f2 > 0.0) {
            return bad("flows must be positive");
        }
        if !(self.p0 > self.p1.max(self.p2)) {
            return bad("p0 must exceed both outlet pressures");
        }
        if !(self.mu > 0.0 && self.gamma >= 1.0) {
            return bad("mu must be positive and gamma >= 1");
        }
        let d = self.x0.dim();
        if self.x1.dim() != d || self.x2.dim() != d {
            return bad("points differ in dimension");
        }
        if self.x0 == self.x1 || self.x0 == self.x2 || self.x1 == self.x2 {
            return bad("endpoints must be pairwise distinct");
        }
        Ok(())
    }

    fn endpoints(&self) -> [Point; 3] {
        [self.x0, self.x1, self.x2]
    }

    fn lengths(&self, x_b: &Point) -> [f64; 3] {
        [x_b.distance(&self.x0), x_b.distance(&self.x1), x_b.distance(&self.x2)]
    }

    fn too_close(&self, x_b: &Point) -> bool {
        self.lengths(x_b).iter().any(|&l| !(l >= self.min_length) || l == 0.0)
    }

    /// Flow-weighted centroid `(f0 x0 + f1 x1 + f2 x2) / (2 f0)`.
    pub fn flow_centroid(&self) -> Point {
        let f0 = self.f0();
        (self.x0 * f0 + self.x1 * self.f1 + self.x2 * self.f2) * (1.0 / (2.0 * f0))
    }
}

struct Residual {
    a: [f64; 3],
    p: [f64; 3],
    e: f64,
}

impl Residual {
    fn new(prob: &LocalBifurcationProblem, lengths: [f64; 3]) -> Self {
        let k = prob.poiseuille_factor();
        Residual {
            a: [k * prob.f0() * lengths[0], k * prob.f1 * lengths[1], k * prob.f2 * lengths[2]],
            p: [prob.p0, prob.p1, prob.p2],
            e: prob.gamma / 4.0,
        }
    }

    /// `(r0^gamma, r1^gamma, r2^gamma)` at branching pressure `pb`.
    fn powers(&self, pb: f64) -> [f64; 3] {
        [
            (self.a[0] / (self.p[0] - pb)).powf(self.e),
            (self.a[1] / (pb - self.p[1])).powf(self.e),
            (self.a[2] / (pb - self.p[2])).powf(self.e),
        ]
    }

    fn g(&self, pb: f64) -> f64 {
        let [r0, r1, r2] = self.powers(pb);
        r0 - r1 - r2
    }
}

/// Unique root `p_b` of the local residual and the radii it implies.
///
/// Bisection runs until the bracket is narrower than `tol` relative to the
/// initial bracket and `|g(p_b)| / r0^gamma <= tol`.
pub fn solve_radii(prob: &LocalBifurcationProblem, x_b: &Point, tol: f64) -> Result<LocalRadii> {
    let lengths = prob.lengths(x_b);
    if lengths.iter().any(|&l| !(l > 0.0)) {
        return Err(CcoError::Usage("branching point coincides with an endpoint".into()));
    }
    let res = Residual::new(prob, lengths);
    let (lo0, hi0) = (prob.p1.max(prob.p2), prob.p0);
    if !(res.g(lo0) < 0.0 && res.g(hi0) > 0.0) {
        return Err(CcoError::Bracket {
            lo: res.g(lo0),
            hi: res.g(hi0),
        });
    }
    let width0 = hi0 - lo0;
    let (mut lo, mut hi) = (lo0, hi0);
    let mut pb = 0.5 * (lo + hi);
    for _ in 0..MAX_BISECTION_STEPS {
        pb = 0.5 * (lo + hi);
        let [r0, r1, r2] = res.powers(pb);
        let g = r0 - r1 - r2;
        if g > 0.0 {
            hi = pb;
        } else {
            lo = pb;
        }
        if (hi - lo) <= tol * width0 && g.abs() <= tol * r0 {
            break;
        }
        if pb <= lo0 || pb >= hi0 || lo >= hi {
            break;
        }
    }
    let k = prob.poiseuille_factor();
    let r0 = (k * prob.f0() * lengths[0] / (prob.p0 - pb)).powf(0.25);
    let r1 = (k * prob.f1 * lengths[1] / (pb - prob.p1)).powf(0.25);
    let r2 = (k * prob.f2 * lengths[2] / (pb - prob.p2)).powf(0.25);
    debug_assert!(
        (r0.powf(prob.gamma) - r1.powf(prob.gamma) - r2.powf(prob.gamma)).abs()
            <= 10.0 * tol * r0.powf(prob.gamma),
        "bisection residual above 10 tol"
    );
    Ok(LocalRadii { r0, r1, r2, p_b: pb })
}

/// Local volume `pi (l0 r0^2 + l1 r1^2 + l2 r2^2)` with lengths measured from `sol.x_b`.
pub fn local_cost(sol: &BifurcationSolution, prob: &LocalBifurcationProblem) -> f64 {
    cost_at(prob, &sol.x_b, &LocalRadii {
        r0: sol.r0,
        r1: sol.r1,
        r2: sol.r2,
        p_b: sol.p_b,
    })
}

fn cost_at(prob: &LocalBifurcationProblem, x_b: &Point, r: &LocalRadii) -> f64 {
    let [l0, l1, l2] = prob.lengths(x_b);
    PI * (l0 * r.r0 * r.r0 + l1 * r.r1 * r.r1 + l2 * r.r2 * r.r2)
}

fn solution(prob: &LocalBifurcationProblem, x_b: Point, r: LocalRadii, converged: bool, iterations: usize) -> BifurcationSolution {
    BifurcationSolution {
        x_b,
        r0: r.r0,
        r1: r.r1,
        r2: r.r2,
        p_b: r.p_b,
        cost: cost_at(prob, &x_b, &r),
        converged,
        iterations,
    }
}

/// Next iterate of the stationarity fixed point, `None` if the weights degenerate.
///
/// At a stationary point of the reduced volume `J(x_b)`,
/// `sum_i w_i (x_b - x_i) / l_i = 0` with
/// `w_i = 1.5 r_i^2 - lambda s_i (gamma/4) r_i^gamma / l_i`, `s = (+1, -1, -1)`,
/// where `lambda = (dJ/dp_b) / (dg/dp_b)` carries the dependence of the radii
/// on the branching pressure. Solving for `x_b` gives a weighted barycenter.
fn stationary_step(prob: &LocalBifurcationProblem, x_b: &Point, r: &LocalRadii) -> Option<Point> {
    let l = prob.lengths(x_b);
    let radii = [r.r0, r.r1, r.r2];
    let dp = [prob.p0 - r.p_b, r.p_b - prob.p1, r.p_b - prob.p2];
    let sign = [1.0, -1.0, -1.0];
    let e = prob.gamma / 4.0;
    let rg: [f64; 3] = std::array::from_fn(|i| radii[i].powf(prob.gamma));
    let dj_dp = 0.5 * (l[0] * radii[0] * radii[0] / dp[0]
        - l[1] * radii[1] * radii[1] / dp[1]
        - l[2] * radii[2] * radii[2] / dp[2]);
    let dg_dp = e * (rg[0] / dp[0] + rg[1] / dp[1] + rg[2] / dp[2]);
    let lambda = dj_dp / dg_dp;
    let mut num = Point::zero(x_b.dim());
    let mut den = 0.0;
    for (i, x) in prob.endpoints().iter().enumerate() {
        let w = 1.5 * radii[i] * radii[i] - lambda * sign[i] * e * rg[i] / l[i];
        let c = w / l[i];
        num = num + *x * c;
        den += c;
    }
    let next = num * (1.0 / den);
    (den > 0.0 && next.is_finite()).then_some(next)
}

/// Volume-optimal branching point by fixed-point iteration from the flow-weighted
/// centroid, keeping the best point seen. Falls back to a refined grid search
/// in the plane of the endpoints when the iteration does not converge within `max_iter`.
pub fn optimal_bifurcation(prob: &LocalBifurcationProblem, settings: &SolverSettings) -> Result<BifurcationSolution> {
    prob.check()?;
    let evaluate = |x: Point, iterations: usize| -> Result<(BifurcationSolution, LocalRadii)> {
        if prob.too_close(&x) {
            return Err(CcoError::DegenerateSolution);
        }
        let r = solve_radii(prob, &x, settings.tol)?;
        Ok((solution(prob, x, r, true, iterations), r))
    };
    let (mut current, mut radii) = evaluate(prob.flow_centroid(), 0)?;
    let mut best = Some(current);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < settings.max_iter {
        let x = current.x_b;
        let Some(next) = stationary_step(prob, &x, &radii) else {
            break;
        };
        iterations += 1;
        let step = next - x;
        let scale = prob.lengths(&x).into_iter().fold(0.0, f64::max);
        if step.norm() < settings.tol * scale {
            converged = true;
            break;
        }
        let (mut sol, mut r) = evaluate(next, iterations)?;
        // over-relax along the step while the cost keeps falling
        let mut factor = 2.0;
        while sol.cost < current.cost && factor <= MAX_OVERRELAXATION {
            let Ok((s2, r2)) = evaluate(x + step * factor, iterations) else {
                break;
            };
            if s2.cost >= sol.cost {
                break;
            }
            (sol, r) = (s2, r2);
            factor *= 2.0;
        }
        current = sol;
        radii = r;
        if best.is_none_or(|b| current.cost < b.cost) {
            best = Some(current);
        }
    }
    let mut best = best.ok_or(CcoError::DegenerateSolution)?;
    if converged {
        best.iterations = iterations;
        return Ok(best);
    }
    let grid = plane_search(prob, FALLBACK_RESOLUTION, FALLBACK_LEVELS, settings.tol)?;
    let mut out = if grid.cost < best.cost { grid } else { best };
    out.converged = false;
    out.iterations = iterations;
    Ok(out)
}

/// Exhaustive grid search over the bounding box of the three endpoints.
///
/// `refinement_levels` grids are evaluated in total; after each one the window
/// shrinks by 4x around the incumbent. Points within `min_length` of an
/// endpoint are skipped. Axes with zero extent get a single grid coordinate.
pub fn brute_force_bifurcation(
    prob: &LocalBifurcationProblem,
    grid_resolution: usize,
    refinement_levels: usize,
    tol: f64,
) -> Result<BifurcationSolution> {
    prob.check()?;
    let dim = prob.x0.dim();
    let axes: Vec<Point> = (0..dim)
        .map(|a| {
            let mut c = [0.0; 3];
            c[a] = 1.0;
            Point::from_slice(&c[..dim]).expect("unit axis")
        })
        .collect();
    grid_search(prob, &Point::zero(dim), &axes, grid_resolution, refinement_levels, tol)
}

/// Grid search restricted to the plane through the three endpoints.
///
/// Reflection through that plane maps the problem onto itself, so a unique
/// optimum lies in it; in 2D this is the same as [`brute_force_bifurcation`].
fn plane_search(prob: &LocalBifurcationProblem, resolution: usize, levels: usize, tol: f64) -> Result<BifurcationSolution> {
    if prob.x0.dim() == 2 {
        return brute_force_bifurcation(prob, resolution, levels, tol);
    }
    let e1 = prob.x1 - prob.x0;
    let u = e1 * (1.0 / e1.norm());
    let e2 = prob.x2 - prob.x0;
    let w = e2 - u * e2.dot(&u);
    let mut axes = vec![u];
    // collinear endpoints: the line is the symmetry set
    if w.norm() > 1e-12 * e2.norm() {
        axes.push(w * (1.0 / w.norm()));
    }
    grid_search(prob, &prob.x0, &axes, resolution, levels, tol)
}

/// Grid over `origin + sum_a t_a axes[a]`, the window being the bounding box
/// of the endpoints in those coordinates.
fn grid_search(
    prob: &LocalBifurcationProblem,
    origin: &Point,
    axes: &[Point],
    grid_resolution: usize,
    refinement_levels: usize,
    tol: f64,
) -> Result<BifurcationSolution> {
    if grid_resolution < 3 {
        return Err(CcoError::Usage("grid resolution must be at least 3".into()));
    }
    let m = axes.len();
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in prob.endpoints() {
        let rel = p - *origin;
        for a in 0..m {
            let t = rel.dot(&axes[a]);
            lo[a] = lo[a].min(t);
            hi[a] = hi[a].max(t);
        }
    }
    let mut center: [f64; 3] = std::array::from_fn(|a| if a < m { 0.5 * (lo[a] + hi[a]) } else { 0.0 });
    let mut half: [f64; 3] = std::array::from_fn(|a| if a < m { 0.5 * (hi[a] - lo[a]) } else { 0.0 });
    let to_point = |t: &[f64; 3]| {
        let mut x = *origin;
        for a in 0..m {
            x = x + axes[a] * t[a];
        }
        x
    };
    let mut best: Option<(BifurcationSolution, [f64; 3])> = None;
    let n = grid_resolution;
    for _ in 0..refinement_levels.max(1) {
        let counts: [usize; 3] = std::array::from_fn(|a| if a < m && half[a] > 0.0 { n } else { 1 });
        for k in 0..counts[2] {
            for j in 0..counts[1] {
                for i in 0..counts[0] {
                    let idx = [i, j, k];
                    let t: [f64; 3] = std::array::from_fn(|a| {
                        if counts[a] == 1 {
                            center[a]
                        } else {
                            center[a] - half[a] + 2.0 * half[a] * idx[a] as f64 / (n - 1) as f64
                        }
                    });
                    let x = to_point(&t);
                    if prob.too_close(&x) {
                        continue;
                    }
                    let Ok(r) = solve_radii(prob, &x, tol) else {
                        continue;
                    };
                    let sol = solution(prob, x, r, false, 0);
                    if best.as_ref().is_none_or(|(b, _)| sol.cost < b.cost) {
                        best = Some((sol, t));
                    }
                }
            }
        }
        let Some((_, t)) = best else { break };
        center = t;
        for h in half.iter_mut() {
            *h /= 4.0;
        }
    }
    best.map(|(b, _)| b).ok_or(CcoError::DegenerateSolution)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `k = 8 mu / pi = 1`.
    const UNIT_MU: f64 = PI / 8.0;

    fn symmetric_anchor() -> LocalBifurcationProblem {
        LocalBifurcationProblem {
            x0: Point::new2(0.0, 0.0),
            x1: Point::new2(1.0, 1.0),
            x2: Point::new2(1.0, -1.0),
            f1: 1.0,
            f2: 1.0,
            p0: 3.0,
            p1: 0.0,
            p2: 0.0,
            mu: UNIT_MU,
            gamma: 3.0,
            min_length: 1e-6,
        }
    }

    /// Brute-force bisection on the anchor's scalar equation written directly
    /// in terms of unit lengths: `(2/(3-p))^(3/4) = 2 (1/p)^(3/4)`.
    fn anchor_oracle_root() -> f64 {
        let g = |p: f64| (2.0 / (3.0 - p)).powf(0.75) - 2.0 * (1.0 / p).powf(0.75);
        let (mut lo, mut hi) = (1e-12, 3.0 - 1e-12);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if g(m) > 0.0 {
                hi = m
            } else {
                lo = m
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn anchor_root() {
        let prob = symmetric_anchor();
        // a branching point at unit distance from all three endpoints
        let x_b = Point::new2(1.0, 0.0);
        let r = solve_radii(&prob, &x_b, 1e-10).unwrap();
        let oracle = anchor_oracle_root();
        assert!((oracle - 1.6725).abs() < 1e-3);
        assert!((r.p_b - oracle).abs() < 1e-8, "{} vs {oracle}", r.p_b);
        assert!((r.r1 - 0.8794).abs() < 1e-4);
        assert!((r.r0 - 1.1078).abs() < 1e-4);
        assert!((r.r0 / r.r1 - 2f64.powf(1.0 / 3.0)).abs() < 1e-9);
        assert_eq!(r.r1, r.r2);
    }

    #[test]
    fn symmetric_radii() {
        let prob = symmetric_anchor();
        for gamma in [1.0, 2.0, 2.7, 3.0] {
            let prob = LocalBifurcationProblem { gamma, ..prob.clone() };
            let r = solve_radii(&prob, &Point::new2(0.4, 0.0), 1e-9).unwrap();
            assert_eq!(r.r1, r.r2);
            assert!((r.r0 / r.r1 - 2f64.powf(1.0 / gamma)).abs() < 1e-7);
        }
    }

    #[test]
    fn residual_limits_bracket() {
        let prob = symmetric_anchor();
        let res = Residual::new(&prob, [1.0, 1.0, 1.0]);
        assert_eq!(res.g(0.0), f64::NEG_INFINITY);
        assert_eq!(res.g(3.0), f64::INFINITY);
        assert!(res.g(1e-9) < 0.0 && res.g(3.0 - 1e-9) > 0.0);
    }

    #[test]
    fn corrupted_problem_is_rejected() {
        let mut prob = symmetric_anchor();
        prob.p0 = -1.0;
        assert!(optimal_bifurcation(&prob, &SolverSettings::default()).is_err());
        let mut prob = symmetric_anchor();
        prob.f2 = 0.0;
        assert!(prob.check().is_err());
    }

    #[test]
    fn local_cost_cases() {
        let prob = symmetric_anchor();
        let sol = BifurcationSolution {
            x_b: Point::new2(1.0, 0.0),
            r0: 1.0,
            r1: 1.0,
            r2: 1.0,
            p_b: 1.0,
            cost: 0.0,
            converged: true,
            iterations: 0,
        };
        assert!((local_cost(&sol, &prob) - 3.0 * PI).abs() < 1e-12);
        let scaled = BifurcationSolution { r0: 2.0, r1: 2.0, r2: 2.0, ..sol };
        assert!((local_cost(&scaled, &prob) - 12.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn mirror_symmetric_problem_stays_on_axis() {
        let prob = LocalBifurcationProblem {
            x0: Point::new2(0.0, 0.0),
            x1: Point::new2(2.0, 0.7),
            x2: Point::new2(2.0, -0.7),
            f1: 1e-7,
            f2: 1e-7,
            p0: 10_000.0,
            p1: 8_000.0,
            p2: 8_000.0,
            mu: 3.6e-3,
            gamma: 3.0,
            min_length: 1e-6,
        };
        let sol = optimal_bifurcation(&prob, &SolverSettings::default()).unwrap();
        assert!(sol.converged);
        assert!(sol.x_b.coords()[1].abs() < 1e-6, "{:?}", sol.x_b);
        assert!(sol.x_b.coords()[0] > 0.0 && sol.x_b.coords()[0] < 2.0);
    }

    #[test]
    fn collinear_problem_stays_on_line() {
        let prob = LocalBifurcationProblem {
            x0: Point::new2(0.0, 0.0),
            x1: Point::new2(1.0, 1.0),
            x2: Point::new2(2.0, 2.0),
            f1: 1.0,
            f2: 1e-3,
            p0: 3.0,
            p1: 1.0,
            p2: 0.5,
            mu: UNIT_MU,
            gamma: 3.0,
            min_length: 1e-9,
        };
        let sol = match optimal_bifurcation(&prob, &SolverSettings::default()) {
            Ok(sol) => sol,
            Err(CcoError::DegenerateSolution) => return,
            Err(e) => panic!("{e}"),
        };
        let c = sol.x_b.coords();
        assert!((c[0] - c[1]).abs() < 1e-6);
    }

    #[test]
    fn coarse_grid_never_beats_fixed_point() {
        let prob = LocalBifurcationProblem {
            x0: Point::new2(0.0, 0.0),
            x1: Point::new2(1.0, 0.5),
            x2: Point::new2(1.0, -0.5),
            ..symmetric_anchor()
        };
        let opt = optimal_bifurcation(&prob, &SolverSettings::default()).unwrap();
        let coarse = brute_force_bifurcation(&prob, 3, 1, 1e-6).unwrap();
        assert!(coarse.cost >= opt.cost * (1.0 - 1e-9));
        let mut last = f64::INFINITY;
        for levels in 1..6 {
            let c = brute_force_bifurcation(&prob, 5, levels, 1e-6).unwrap().cost;
            assert!(c <= last);
            last = c;
        }
    }

    #[test]
    fn grid_argmin_near_symmetry_axis() {
        let prob = LocalBifurcationProblem {
            x0: Point::new2(0.0, 0.0),
            x1: Point::new2(1.0, 0.5),
            x2: Point::new2(1.0, -0.5),
            ..symmetric_anchor()
        };
        let sol = brute_force_bifurcation(&prob, 41, 1, 1e-8).unwrap();
        let cell = 1.0 / 40.0;
        assert!(sol.x_b.coords()[1].abs() <= cell, "{:?}", sol.x_b);
    }

    #[test]
    fn never_worse_than_centroid() {
        let prob = LocalBifurcationProblem {
            x0: Point::new2(0.0, 0.0),
            x1: Point::new2(1.0, 0.9),
            x2: Point::new2(0.3, -0.5),
            f1: 0.8,
            f2: 0.3,
            p0: 2.5,
            p1: 0.4,
            p2: 0.1,
            mu: UNIT_MU,
            gamma: 3.0,
            min_length: 1e-6,
        };
        let start = prob.flow_centroid();
        let r = solve_radii(&prob, &start, 1e-6).unwrap();
        let c0 = cost_at(&prob, &start, &r);
        let sol = optimal_bifurcation(&prob, &SolverSettings::default()).unwrap();
        assert!(sol.cost <= c0);
    }
}
