//! Arena-indexed binary vessel tree with its hydrodynamic bookkeeping.
//!
//! Radii are stored as cascading ratios (`beta`) plus a radius-free reduced
//! resistance per subtree (`r_star`). Flows are never stored: a segment carries
//! `n_leaves * q_term` with `q_term = q_perf / terminal_count`, which keeps flow
//! conservation exact in integer arithmetic. Absolute radii are obtained by
//! [`VesselTree::realize_radii`].
//!
//! Conventions, with `k = 8 mu / pi`:
//!
//! * segment resistance `R = k * l / r^4`;
//! * `r_star(leaf) = k * l`, `r_star(node) = k * l + 1 / (beta_l^4 / r_star(l) + beta_r^4 / r_star(r))`;
//! * sibling ratio `r_l / r_r = ((q_l * r_star(l)) / (q_r * r_star(r)))^(1/4)`;
//! * Murray closure `r_p^gamma = r_l^gamma + r_r^gamma`.

use std::f64::consts::PI;

use crate::domain::PerfusionDomain;
use crate::error::{CcoError, Result};
use crate::geometry::{Point, SegmentGeometry};

/// Relative Murray residual accepted by [`TreeReport::passes`].
pub const MURRAY_TOLERANCE: f64 = 1e-6;
/// Relative terminal-pressure error accepted by [`TreeReport::passes`].
pub const PRESSURE_TOLERANCE: f64 = 1e-6;

/// Physiological and algorithmic parameters of a growth run.
#[derive(Clone, Debug, PartialEq)]
pub struct CcoParams {
    /// Target terminal count.
    pub k_term: usize,
    /// Total perfusion flow, m^3/s.
    pub q_perf: f64,
    /// Root inlet pressure, Pa.
    pub p_perf: f64,
    /// Terminal outlet pressure, Pa.
    pub p_term: f64,
    /// Dynamic viscosity, Pa*s.
    pub mu: f64,
    /// Murray bifurcation exponent.
    pub gamma: f64,
    /// Nearest segments tried per candidate terminal.
    pub n_con: usize,
    /// Scale of the terminal distance threshold.
    pub eta: f64,
    pub seed: u64,
    /// Relative tolerance of the bifurcation solver.
    pub tol: f64,
    /// Iteration cap of the bifurcation fixed point.
    pub max_iter: usize,
    pub dim: usize,
    /// Relative clearance required between non-adjacent vessels.
    pub clearance_margin: f64,
    /// Consecutive discarded candidates before growth is declared stalled.
    pub discard_cap: usize,
    /// Distance-threshold relaxation factor.
    pub relax_factor: f64,
    /// Consecutive rejections between two relaxations.
    pub relax_every: usize,
}

impl Default for CcoParams {
    fn default() -> Self {
        CcoParams {
            k_term: 1,
            q_perf: 8.33e-6,
            p_perf: 13_332.0,
            p_term: 8_000.0,
            mu: 3.6e-3,
            gamma: 3.0,
            n_con: 20,
            eta: 1.0,
            seed: 0,
            tol: 1e-6,
            max_iter: 100,
            dim: 2,
            clearance_margin: 0.01,
            discard_cap: 1_000,
            relax_factor: 0.9,
            relax_every: 10,
        }
    }
}

impl CcoParams {
    /// Checks every parameter invariant; the error names the offending key.
    pub fn validate(&self) -> Result<()> {
        let fail = |key: &str, msg: &str| Err(CcoError::param(key, msg));
        if self.k_term < 1 {
            return fail("k_term", "must be >= 1");
        }
        if !(self.q_perf > 0.0 && self.q_perf.is_finite()) {
            return fail("q_perf", "must be > 0");
        }
        if !self.p_term.is_finite() {
            return fail("p_term", "must be finite");
        }
        if !(self.p_perf > self.p_term && self.p_perf.is_finite()) {
            return fail("p_perf", "must be greater than p_term");
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return fail("mu", "must be > 0");
        }
        if !(self.gamma >= 1.0 && self.gamma.is_finite()) {
            return fail("gamma", "must be >= 1");
        }
        if self.n_con < 1 {
            return fail("n_con", "must be >= 1");
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return fail("eta", "must be > 0");
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return fail("tol", "must be in (0, 1)");
        }
        if self.max_iter < 1 {
            return fail("max_iter", "must be >= 1");
        }
        if self.dim != 2 && self.dim != 3 {
            return fail("dim", "must be 2 or 3");
        }
        if !(self.clearance_margin >= 0.0 && self.clearance_margin.is_finite()) {
            return fail("clearance_margin", "must be >= 0");
        }
        if self.discard_cap < 1 {
            return fail("discard_cap", "must be >= 1");
        }
        if !(self.relax_factor > 0.0 && self.relax_factor < 1.0) {
            return fail("relax_factor", "must be in (0, 1)");
        }
        if self.relax_every < 1 {
            return fail("relax_every", "must be >= 1");
        }
        Ok(())
    }

    /// `8 mu / pi`, the Poiseuille factor.
    pub fn poiseuille_factor(&self) -> f64 {
        8.0 * self.mu / PI
    }

    pub fn pressure_drop(&self) -> f64 {
        self.p_perf - self.p_term
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SegmentId(pub usize);

impl SegmentId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegmentRecord {
    pub proximal: Point,
    pub distal: Point,
    pub parent: Option<SegmentId>,
    pub children: Option<[SegmentId; 2]>,
    /// `radius / parent radius`, 1 at the root.
    pub beta: f64,
    pub n_leaves: usize,
    /// Reduced resistance of the subtree rooted here.
    pub r_star: f64,
    pub radius: Option<f64>,
}

impl SegmentRecord {
    pub fn length(&self) -> f64 {
        self.proximal.distance(&self.distal)
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    pub fn geometry(&self) -> SegmentGeometry {
        SegmentGeometry {
            proximal: self.proximal,
            distal: self.distal,
            radius: self.radius,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VesselTree {
    segments: Vec<SegmentRecord>,
    root: SegmentId,
    params: CcoParams,
    min_length: f64,
}

/// Validation and statistics summary of a tree with realized radii.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeReport {
    pub terminal_count: usize,
    pub segment_count: usize,
    pub total_volume: f64,
    pub max_murray_residual: f64,
    pub max_terminal_pressure_error: f64,
    /// `+inf` when the tree has no non-adjacent segment pair.
    pub min_clearance_margin: f64,
    pub all_inside_domain: bool,
    pub max_depth: usize,
}

impl TreeReport {
    pub fn passes(&self) -> bool {
        self.max_murray_residual <= MURRAY_TOLERANCE
            && self.max_terminal_pressure_error <= PRESSURE_TOLERANCE
            && self.min_clearance_margin >= 0.0
            && self.all_inside_domain
    }
}

impl VesselTree {
    /// Single-segment tree from `root_pos` to `first_terminal`.
    pub fn new(params: CcoParams, root_pos: Point, first_terminal: Point, min_length: f64) -> Result<Self> {
        params.validate()?;
        if root_pos.dim() != params.dim || first_terminal.dim() != params.dim {
            return Err(CcoError::Usage(format!(
                "tree points must be {}D",
                params.dim
            )));
        }
        let len = root_pos.distance(&first_terminal);
        if !(len >= min_length) || len == 0.0 {
            return Err(CcoError::DegenerateGeometry(format!(
                "root segment length {len:e} below {min_length:e}"
            )));
        }
        let k = params.poiseuille_factor();
        Ok(VesselTree {
            segments: vec![SegmentRecord {
                proximal: root_pos,
                distal: first_terminal,
                parent: None,
                children: None,
                beta: 1.0,
                n_leaves: 1,
                r_star: k * len,
                radius: None,
            }],
            root: SegmentId(0),
            params,
            min_length,
        })
    }

    /// Builds a tree from raw records; structure is checked and hydrodynamics recomputed.
    pub fn from_records(
        params: CcoParams,
        mut segments: Vec<SegmentRecord>,
        min_length: f64,
    ) -> Result<Self> {
        params.validate()?;
        let roots: Vec<usize> = (0..segments.len())
            .filter(|&i| segments[i].parent.is_none())
            .collect();
        if roots.len() != 1 {
            return Err(CcoError::Usage(format!("tree needs exactly one root, found {}", roots.len())));
        }
        for s in &mut segments {
            s.radius = None;
        }
        let mut tree = VesselTree {
            segments,
            root: SegmentId(roots[0]),
            params,
            min_length,
        };
        tree.check_structure()?;
        tree.recompute_all();
        Ok(tree)
    }

    pub fn params(&self) -> &CcoParams {
        &self.params
    }

    /// Replaces the physiology; hydrodynamic ratios are unaffected but radii are cleared.
    pub fn set_params(&mut self, params: CcoParams) -> Result<()> {
        params.validate()?;
        if params.dim != self.params.dim {
            return Err(CcoError::Usage("cannot change tree dimension".into()));
        }
        let refresh = params.mu != self.params.mu || params.gamma != self.params.gamma;
        self.params = params;
        if refresh {
            self.recompute_all();
        }
        for s in &mut self.segments {
            s.radius = None;
        }
        Ok(())
    }

    pub fn min_length(&self) -> f64 {
        self.min_length
    }

    /// Sets the length floor applied to segments created from now on.
    pub fn set_min_length(&mut self, min_length: f64) {
        self.min_length = min_length;
    }

    pub fn root(&self) -> SegmentId {
        self.root
    }

    pub fn segment(&self, id: SegmentId) -> &SegmentRecord {
        &self.segments[id.0]
    }

    pub fn segments(&self) -> &[SegmentRecord] {
        &self.segments
    }

    pub fn ids(&self) -> impl Iterator<Item = SegmentId> {
        (0..self.segments.len()).map(SegmentId)
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    pub fn terminal_count(&self) -> usize {
        self.segments[self.root.0].n_leaves
    }

    pub fn dim(&self) -> usize {
        self.params.dim
    }

    pub fn q_term(&self) -> f64 {
        self.params.q_perf / self.terminal_count() as f64
    }

    /// Flow through `id`, `q_perf * n_leaves / terminal_count` (exactly `q_perf` at the root).
    pub fn flow(&self, id: SegmentId) -> f64 {
        self.params.q_perf * (self.segment(id).n_leaves as f64 / self.terminal_count() as f64)
    }

    /// Sibling of `id`, if it has a parent.
    pub fn sibling(&self, id: SegmentId) -> Option<SegmentId> {
        let parent = self.segment(id).parent?;
        let [a, b] = self.segment(parent).children.expect("parent has children");
        Some(if a == id { b } else { a })
    }

    /// Whether the two segments share a node (parent/child or siblings).
    pub fn adjacent(&self, a: SegmentId, b: SegmentId) -> bool {
        let sa = self.segment(a);
        let sb = self.segment(b);
        a == b || sa.parent == Some(b) || sb.parent == Some(a) || (sa.parent.is_some() && sa.parent == sb.parent)
    }

    /// Structural invariants: strict binary, parent/child links agree, leaf
    /// counts add up, every segment is reachable from the root and long enough.
    pub fn check_structure(&self) -> Result<()> {
        let n = self.segments.len();
        let bad = |msg: String| Err(CcoError::Usage(msg));
        if self.segment(self.root).parent.is_some() {
            return bad("root has a parent".into());
        }
        let mut seen = vec![false; n];
        let mut stack = vec![self.root];
        let mut leaves = 0;
        while let Some(id) = stack.pop() {
            if seen[id.0] {
                return bad(format!("segment {} reached twice", id.0));
            }
            seen[id.0] = true;
            let s = self.segment(id);
            if s.proximal.dim() != self.params.dim || s.distal.dim() != self.params.dim {
                return bad(format!("segment {} has wrong dimension", id.0));
            }
            if !(s.length() >= self.min_length) || s.length() == 0.0 {
                return bad(format!("segment {} shorter than {:e}", id.0, self.min_length));
            }
            match s.children {
                None => leaves += 1,
                Some([a, b]) => {
                    if a == b || a.0 >= n || b.0 >= n {
                        return bad(format!("segment {} has invalid children", id.0));
                    }
                    for c in [a, b] {
                        let child = self.segment(c);
                        if child.parent != Some(id) {
                            return bad(format!("segment {} does not point back to {}", c.0, id.0));
                        }
                        if child.proximal != s.distal {
                            return bad(format!("segment {} is not attached to {}", c.0, id.0));
                        }
                        stack.push(c);
                    }
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return bad(format!("segment {i} is unreachable from the root"));
        }
        if n != 2 * leaves - 1 {
            return bad(format!("{n} segments for {leaves} terminals"));
        }
        Ok(())
    }

    /// Replaces `seg` by `proximal -> bif_pos`, with children
    /// `bif_pos -> old distal` (inheriting the old subtree) and `bif_pos -> new_terminal`.
    ///
    /// The two new records get consistent local values; ancestors must be
    /// refreshed with [`Self::update_hydrodynamics`] starting at `seg`.
    pub fn split_segment(
        &mut self,
        seg: SegmentId,
        bif_pos: Point,
        new_terminal: Point,
    ) -> Result<(SegmentId, SegmentId)> {
        if seg.0 >= self.segments.len() {
            return Err(CcoError::Usage(format!("no segment {}", seg.0)));
        }
        let dim = self.params.dim;
        if bif_pos.dim() != dim || new_terminal.dim() != dim || !bif_pos.is_finite() || !new_terminal.is_finite() {
            return Err(CcoError::Usage("split points have the wrong dimension".into()));
        }
        let old = self.segments[seg.0].clone();
        for (name, a, b) in [
            ("parent", old.proximal, bif_pos),
            ("continuation", bif_pos, old.distal),
            ("new terminal", bif_pos, new_terminal),
        ] {
            let len = a.distance(&b);
            if !(len >= self.min_length) || len == 0.0 {
                return Err(CcoError::DegenerateGeometry(format!(
                    "{name} segment length {len:e} below {:e}",
                    self.min_length
                )));
            }
        }
        let bif = SegmentId(self.segments.len());
        let leaf = SegmentId(self.segments.len() + 1);
        self.segments.push(SegmentRecord {
            proximal: bif_pos,
            distal: old.distal,
            parent: Some(seg),
            children: old.children,
            beta: 1.0,
            n_leaves: old.n_leaves,
            r_star: old.r_star,
            radius: None,
        });
        self.segments.push(SegmentRecord {
            proximal: bif_pos,
            distal: new_terminal,
            parent: Some(seg),
            children: None,
            beta: 1.0,
            n_leaves: 1,
            r_star: 0.0,
            radius: None,
        });
        if let Some(children) = old.children {
            for c in children {
                self.segments[c.0].parent = Some(bif);
            }
        }
        let s = &mut self.segments[seg.0];
        s.distal = bif_pos;
        s.children = Some([bif, leaf]);
        self.recompute_node(bif);
        self.recompute_node(leaf);
        for s in &mut self.segments {
            s.radius = None;
        }
        Ok((bif, leaf))
    }

    /// Recomputes `n_leaves`, `r_star` and the children's betas of one node from its children.
    fn recompute_node(&mut self, id: SegmentId) {
        let k = self.params.poiseuille_factor();
        let gamma = self.params.gamma;
        let len = self.segments[id.0].length();
        match self.segments[id.0].children {
            None => {
                let s = &mut self.segments[id.0];
                s.n_leaves = 1;
                s.r_star = k * len;
            }
            Some([a, b]) => {
                let (na, ra) = (self.segments[a.0].n_leaves, self.segments[a.0].r_star);
                let (nb, rb) = (self.segments[b.0].n_leaves, self.segments[b.0].r_star);
                let (beta_a, beta_b) = murray_betas(na as f64 * ra, nb as f64 * rb, gamma);
                self.segments[a.0].beta = beta_a;
                self.segments[b.0].beta = beta_b;
                let s = &mut self.segments[id.0];
                s.n_leaves = na + nb;
                s.r_star = k * len + 1.0 / (beta_a.powi(4) / ra + beta_b.powi(4) / rb);
            }
        }
    }

    /// Refreshes leaf counts, betas and reduced resistances from `from` up to the root.
    pub fn update_hydrodynamics(&mut self, from: SegmentId) {
        let mut cur = Some(from);
        while let Some(id) = cur {
            self.recompute_node(id);
            cur = self.segments[id.0].parent;
        }
        self.segments[self.root.0].beta = 1.0;
        for s in &mut self.segments {
            s.radius = None;
        }
    }

    /// Full bottom-up recomputation of every node.
    pub fn recompute_all(&mut self) {
        for id in self.postorder() {
            self.recompute_node(id);
        }
        self.segments[self.root.0].beta = 1.0;
    }

    /// Children before parents.
    pub fn postorder(&self) -> Vec<SegmentId> {
        let mut out = self.preorder();
        out.reverse();
        out
    }

    /// Parents before children; the first child's subtree precedes the second's.
    pub fn preorder(&self) -> Vec<SegmentId> {
        let mut out = Vec::with_capacity(self.segments.len());
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            out.push(id);
            if let Some([a, b]) = self.segments[id.0].children {
                stack.push(b);
                stack.push(a);
            }
        }
        out
    }

    /// Sets every radius from the root radius `(r_star * q_perf / dp)^(1/4)` down the beta cascade.
    pub fn realize_radii(&mut self) {
        let root = self.root;
        let r_root = (self.segments[root.0].r_star * self.params.q_perf / self.params.pressure_drop()).powf(0.25);
        self.segments[root.0].radius = Some(r_root);
        for id in self.preorder() {
            if let Some([a, b]) = self.segments[id.0].children {
                let r = self.segments[id.0].radius.expect("parent realized first");
                for c in [a, b] {
                    let beta = self.segments[c.0].beta;
                    self.segments[c.0].radius = Some(beta * r);
                }
            }
        }
    }

    fn radius_of(&self, id: SegmentId) -> Result<f64> {
        self.segments[id.0]
            .radius
            .ok_or_else(|| CcoError::Usage("radii are not realized".into()))
    }

    pub fn radius(&self, id: SegmentId) -> Option<f64> {
        self.segments[id.0].radius
    }

    /// Intravascular volume `pi * sum(l * r^2)`.
    pub fn volume(&self) -> Result<f64> {
        let mut sum = 0.0;
        for id in self.ids() {
            let r = self.radius_of(id)?;
            sum += self.segment(id).length() * r * r;
        }
        Ok(PI * sum)
    }

    /// Pressure drop `k * q * l / r^4` along one segment.
    pub fn segment_pressure_drop(&self, id: SegmentId) -> Result<f64> {
        let r = self.radius_of(id)?;
        let q = self.segment(id).n_leaves as f64 * self.q_term();
        Ok(self.params.poiseuille_factor() * q * self.segment(id).length() / r.powi(4))
    }

    /// Pressure at the distal end of `id`.
    pub fn node_pressure(&self, id: SegmentId) -> Result<f64> {
        let mut drop = 0.0;
        let mut cur = Some(id);
        while let Some(s) = cur {
            drop += self.segment_pressure_drop(s)?;
            cur = self.segment(s).parent;
        }
        Ok(self.params.p_perf - drop)
    }

    /// Pressure at the proximal end of `id`.
    pub fn proximal_pressure(&self, id: SegmentId) -> Result<f64> {
        match self.segment(id).parent {
            Some(p) => self.node_pressure(p),
            None => Ok(self.params.p_perf),
        }
    }

    /// Number of segments on the longest root-to-leaf path.
    pub fn max_depth(&self) -> usize {
        let mut depth = vec![0usize; self.segments.len()];
        let mut best = 0;
        for id in self.preorder() {
            let d = match self.segment(id).parent {
                Some(p) => depth[p.0] + 1,
                None => 1,
            };
            depth[id.0] = d;
            best = best.max(d);
        }
        best
    }

    /// Computes the full [`TreeReport`]; radii must be realized.
    pub fn validate(&self, domain: &PerfusionDomain) -> Result<TreeReport> {
        for id in self.ids() {
            self.radius_of(id)?;
        }
        let gamma = self.params.gamma;
        let mut murray: f64 = 0.0;
        let mut pressure: f64 = 0.0;
        for id in self.ids() {
            let s = self.segment(id);
            match s.children {
                Some([a, b]) => {
                    let rp = self.radius_of(id)?.powf(gamma);
                    let ra = self.radius_of(a)?.powf(gamma);
                    let rb = self.radius_of(b)?.powf(gamma);
                    murray = murray.max((rp - ra - rb).abs() / rp);
                }
                None => {
                    let p = self.node_pressure(id)?;
                    pressure = pressure.max((p - self.params.p_term).abs() / self.params.p_term.abs().max(f64::MIN_POSITIVE));
                }
            }
        }
        let step = domain.default_step();
        let all_inside = self
            .segments
            .iter()
            .all(|s| domain.segment_inside(&s.geometry(), step));
        Ok(TreeReport {
            terminal_count: self.terminal_count(),
            segment_count: self.segment_count(),
            total_volume: self.volume()?,
            max_murray_residual: murray,
            max_terminal_pressure_error: pressure,
            min_clearance_margin: self.min_clearance_margin()?,
            all_inside_domain: all_inside,
            max_depth: self.max_depth(),
        })
    }

    /// `min (d - r_a - r_b) / (r_a + r_b)` over non-adjacent pairs, `+inf` if there are none.
    pub fn min_clearance_margin(&self) -> Result<f64> {
        let n = self.segments.len();
        let mut radii = Vec::with_capacity(n);
        let mut boxes = Vec::with_capacity(n);
        for id in self.ids() {
            radii.push(self.radius_of(id)?);
            boxes.push(self.segment(id).geometry().bounds());
        }
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (SegmentId(i), SegmentId(j));
                if self.adjacent(a, b) {
                    continue;
                }
                let sum = radii[i] + radii[j];
                let lower = box_distance(&boxes[i], &boxes[j]);
                if (lower - sum) / sum >= best {
                    continue;
                }
                let d = self.segment(a).geometry().distance_to_segment(&self.segment(b).geometry());
                best = best.min((d - sum) / sum);
            }
        }
        Ok(best)
    }
}

/// Children betas for sibling resistance-flow products `qr_a`, `qr_b` under Murray closure.
pub fn murray_betas(qr_a: f64, qr_b: f64, gamma: f64) -> (f64, f64) {
    let ratio = (qr_a / qr_b).powf(0.25);
    let beta_a = (1.0 + ratio.powf(-gamma)).powf(-1.0 / gamma);
    let beta_b = (1.0 + ratio.powf(gamma)).powf(-1.0 / gamma);
    (beta_a, beta_b)
}

pub(crate) fn box_distance(a: &([f64; 3], [f64; 3]), b: &([f64; 3], [f64; 3])) -> f64 {
    let mut sq = 0.0;
    for ax in 0..3 {
        let gap = (b.0[ax] - a.1[ax]).max(a.0[ax] - b.1[ax]).max(0.0);
        sq += gap * gap;
    }
    sq.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_k_params() -> CcoParams {
        CcoParams {
            k_term: 4,
            mu: PI / 8.0,
            ..CcoParams::default()
        }
    }

    fn fork() -> VesselTree {
        let mut t = VesselTree::new(unit_k_params(), Point::new2(0.0, 0.0), Point::new2(0.0, 2.0), 1e-6).unwrap();
        t.split_segment(t.root(), Point::new2(0.0, 1.0), Point::new2(1.0, 2.0)).unwrap();
        t.update_hydrodynamics(t.root());
        t.realize_radii();
        t
    }

    #[test]
    fn leaf_reduced_resistance() {
        let t = VesselTree::new(unit_k_params(), Point::new2(0.0, 0.0), Point::new2(1.0, 0.0), 1e-6).unwrap();
        assert!((t.segment(t.root()).r_star - 1.0).abs() < 1e-15);
        let err = VesselTree::new(unit_k_params(), Point::new2(0.0, 0.0), Point::new2(1e-7, 0.0), 1e-6);
        assert!(matches!(err, Err(CcoError::DegenerateGeometry(_))));
    }

    #[test]
    fn symmetric_children_share_beta() {
        let mut t = VesselTree::new(unit_k_params(), Point::new2(0.0, 0.0), Point::new2(1.0, 1.0), 1e-6).unwrap();
        let (bif, leaf) = t.split_segment(t.root(), Point::new2(0.0, 1.0), Point::new2(-1.0, 1.0)).unwrap();
        t.update_hydrodynamics(t.root());
        let (a, b) = (t.segment(bif).beta, t.segment(leaf).beta);
        assert!((a - b).abs() < 1e-15);
        assert!((a - 2f64.powf(-1.0 / 3.0)).abs() < 1e-15);
        // r_star(root) = l0 + 1 / (2 beta^4 / l) with l0 = l = 1
        let expected = 1.0 + 1.0 / (2.0 * a.powi(4));
        assert!((t.segment(t.root()).r_star - expected).abs() < 1e-14);
    }

    #[test]
    fn splitting_leaf_and_internal_keeps_binary_structure() {
        let mut t = fork();
        // the (0,1) -> (1,2) leaf
        let leaf = SegmentId(2);
        let s = t.segment(leaf).clone();
        assert!(s.is_leaf());
        t.split_segment(leaf, (s.proximal + s.distal) * 0.5, Point::new2(2.0, 1.0)).unwrap();
        t.update_hydrodynamics(leaf);
        t.check_structure().unwrap();
        let root = t.root();
        t.split_segment(root, Point::new2(0.0, 0.5), Point::new2(-1.0, 0.0)).unwrap();
        t.update_hydrodynamics(root);
        t.check_structure().unwrap();
        assert_eq!(t.terminal_count(), 4);
        assert_eq!(t.segment_count(), 7);
        t.realize_radii();
        let report = t.validate(&PerfusionDomain::disk(Point::new2(0.0, 0.0), 10.0).unwrap()).unwrap();
        assert!(report.passes(), "{report:?}");
    }

    #[test]
    fn split_rejects_short_segments() {
        let mut t = fork();
        let before = t.clone();
        let root = t.root();
        let err = t.split_segment(root, Point::new2(0.0, 1e-8), Point::new2(1.0, 0.0));
        assert!(matches!(err, Err(CcoError::DegenerateGeometry(_))));
        assert_eq!(t, before);
    }

    #[test]
    fn volume_matches_hand_sum() {
        let t = fork();
        let mut expected = 0.0;
        for s in t.segments() {
            expected += PI * s.length() * s.radius.unwrap().powi(2);
        }
        assert!((t.volume().unwrap() - expected).abs() <= 1e-15 * expected);
        let mut bare = t.clone();
        bare.update_hydrodynamics(bare.root());
        assert!(matches!(bare.volume(), Err(CcoError::Usage(_))));
    }

    #[test]
    fn terminal_pressures_and_flows() {
        let t = fork();
        for id in t.ids().filter(|&id| t.segment(id).is_leaf()) {
            let p = t.node_pressure(id).unwrap();
            assert!((p - t.params().p_term).abs() <= 1e-9 * t.params().p_term);
            assert_eq!(t.flow(id), t.params().q_perf / 2.0);
        }
        assert_eq!(t.flow(t.root()), t.params().q_perf);
    }

    #[test]
    fn flow_rescale_scales_radii_by_fourth_root() {
        let t = fork();
        let mut scaled = t.clone();
        let mut p = t.params().clone();
        p.q_perf *= 16.0;
        scaled.set_params(p).unwrap();
        scaled.realize_radii();
        for (a, b) in t.segments().iter().zip(scaled.segments()) {
            let ratio = b.radius.unwrap() / a.radius.unwrap();
            assert!((ratio - 2.0).abs() <= 2e-12, "{ratio}");
            assert_eq!(a.beta, b.beta);
            assert_eq!(a.proximal, b.proximal);
        }
    }

    #[test]
    fn corrupted_beta_is_flagged() {
        let mut t = fork();
        let domain = PerfusionDomain::disk(Point::new2(0.0, 0.0), 10.0).unwrap();
        assert!(t.validate(&domain).unwrap().max_murray_residual <= MURRAY_TOLERANCE);
        let [a, _] = t.segment(t.root()).children.unwrap();
        t.segments[a.0].beta *= 1.01;
        t.realize_radii();
        let report = t.validate(&domain).unwrap();
        assert!(report.max_murray_residual > MURRAY_TOLERANCE);
        assert!(!report.passes());
    }

    #[test]
    fn incremental_update_matches_full_recompute() {
        let mut t = fork();
        let terminals = [(1.0, 0.5), (-1.0, 0.7), (0.9, 2.5)];
        for (i, &(tx, ty)) in terminals.iter().enumerate() {
            let target = SegmentId(i % t.segment_count());
            let s = t.segment(target).clone();
            let bif = s.proximal + (s.distal - s.proximal) * 0.5;
            t.split_segment(target, bif, Point::new2(tx, ty)).unwrap();
            t.update_hydrodynamics(target);
            let mut full = t.clone();
            full.recompute_all();
            for (a, b) in t.segments().iter().zip(full.segments()) {
                assert!((a.beta - b.beta).abs() <= 1e-12 * b.beta);
                assert!((a.r_star - b.r_star).abs() <= 1e-12 * b.r_star);
                assert_eq!(a.n_leaves, b.n_leaves);
            }
        }
    }

    #[test]
    fn params_validation_names_key() {
        let bad = CcoParams {
            gamma: 0.5,
            ..CcoParams::default()
        };
        assert!(matches!(bad.validate(), Err(CcoError::Param { key, .. }) if key == "gamma"));
        let bad = CcoParams {
            p_perf: 100.0,
            ..CcoParams::default()
        };
        assert!(matches!(bad.validate(), Err(CcoError::Param { key, .. }) if key == "p_perf"));
    }
}
