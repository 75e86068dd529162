//! Uniform-grid spatial index over segment axes.
//!
//! Each segment is registered in every cell whose center lies within half a
//! cell diagonal of its axis, which is a superset of the cells the axis
//! crosses. Nearest queries scan rings of cells outward and stop once the k-th
//! best distance is strictly below the distance to any unscanned cell, so the
//! result equals a linear scan, ties included.

use crate::geometry::{point_segment_distance, Point, SegmentGeometry};
use crate::tree::{SegmentId, VesselTree};

const MAX_CELLS_PER_AXIS: usize = 256;

#[derive(Clone, Debug)]
pub struct SpatialIndex {
    dim: usize,
    lo: [f64; 3],
    cell: [f64; 3],
    counts: [usize; 3],
    cells: Vec<Vec<SegmentId>>,
    registered: Vec<Vec<u32>>,
    geometry: Vec<Option<(Point, Point)>>,
}

impl SpatialIndex {
    /// Empty index covering `[lo, hi]` sized for about `expected_segments` entries.
    pub fn new(lo: &Point, hi: &Point, expected_segments: usize) -> Self {
        let dim = lo.dim();
        let (lo, hi) = (lo.xyz(), hi.xyz());
        let extent: Vec<f64> = (0..dim).map(|a| (hi[a] - lo[a]).max(f64::MIN_POSITIVE)).collect();
        let volume: f64 = extent.iter().product();
        let side = (volume / expected_segments.max(1) as f64).powf(1.0 / dim as f64);
        let mut counts = [1usize; 3];
        let mut cell = [1.0f64; 3];
        for a in 0..dim {
            counts[a] = ((extent[a] / side).ceil() as usize).clamp(1, MAX_CELLS_PER_AXIS);
            cell[a] = extent[a] / counts[a] as f64;
        }
        SpatialIndex {
            dim,
            lo,
            cell,
            counts,
            cells: vec![Vec::new(); counts[0] * counts[1] * counts[2]],
            registered: Vec::new(),
            geometry: Vec::new(),
        }
    }

    /// Index over all segments of `tree`, bounded by `[lo, hi]`.
    pub fn for_tree(tree: &VesselTree, lo: &Point, hi: &Point, expected_segments: usize) -> Self {
        let mut index = SpatialIndex::new(lo, hi, expected_segments.max(tree.segment_count()));
        for id in tree.ids() {
            let s = tree.segment(id);
            index.insert(id, s.proximal, s.distal);
        }
        index
    }

    pub fn len(&self) -> usize {
        self.geometry.iter().filter(|g| g.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn cell_coord(&self, x: f64, a: usize) -> usize {
        let f = ((x - self.lo[a]) / self.cell[a]).floor();
        if f <= 0.0 {
            0
        } else {
            (f as usize).min(self.counts[a] - 1)
        }
    }

    fn flat(&self, c: [usize; 3]) -> usize {
        c[0] + self.counts[0] * (c[1] + self.counts[1] * c[2])
    }

    fn cell_center(&self, c: [usize; 3]) -> Point {
        let xyz: [f64; 3] = std::array::from_fn(|a| self.lo[a] + (c[a] as f64 + 0.5) * self.cell[a]);
        Point::from_slice(&xyz[..self.dim]).expect("finite cell center")
    }

    pub fn insert(&mut self, id: SegmentId, proximal: Point, distal: Point) {
        if self.geometry.len() <= id.0 {
            self.geometry.resize(id.0 + 1, None);
            self.registered.resize(id.0 + 1, Vec::new());
        }
        self.remove(id);
        let (bmin, bmax) = SegmentGeometry::new(proximal, distal).bounds();
        let mut from = [0usize; 3];
        let mut to = [0usize; 3];
        for a in 0..self.dim {
            from[a] = self.cell_coord(bmin[a], a);
            to[a] = self.cell_coord(bmax[a], a);
        }
        let half_diag = (0..self.dim).map(|a| self.cell[a] * self.cell[a]).sum::<f64>().sqrt() * 0.5;
        let mut cells = Vec::new();
        for k in from[2]..=to[2] {
            for j in from[1]..=to[1] {
                for i in from[0]..=to[0] {
                    let c = [i, j, k];
                    if point_segment_distance(&self.cell_center(c), &proximal, &distal) <= half_diag * (1.0 + 1e-9) {
                        let f = self.flat(c);
                        self.cells[f].push(id);
                        cells.push(f as u32);
                    }
                }
            }
        }
        self.registered[id.0] = cells;
        self.geometry[id.0] = Some((proximal, distal));
    }

    pub fn remove(&mut self, id: SegmentId) {
        if id.0 >= self.geometry.len() {
            return;
        }
        for f in std::mem::take(&mut self.registered[id.0]) {
            self.cells[f as usize].retain(|&s| s != id);
        }
        self.geometry[id.0] = None;
    }

    fn distance(&self, id: SegmentId, p: &Point) -> f64 {
        let (a, b) = self.geometry[id.0].expect("registered segment");
        point_segment_distance(p, &a, &b)
    }

    /// The `k` segments closest to `p`, ascending by `(distance, id)`.
    pub fn nearest(&self, p: &Point, k: usize) -> Vec<(SegmentId, f64)> {
        let total = self.len();
        let k = k.min(total);
        if k == 0 {
            return Vec::new();
        }
        let xyz = p.xyz();
        let center: [usize; 3] = std::array::from_fn(|a| if a < self.dim { self.cell_coord(xyz[a], a) } else { 0 });
        let max_ring = (0..self.dim).map(|a| self.counts[a]).max().unwrap_or(1);
        let mut seen = vec![false; self.geometry.len()];
        let mut found: Vec<(SegmentId, f64)> = Vec::new();
        for ring in 0..=max_ring {
            self.visit_ring(center, ring, |id| {
                if !seen[id.0] {
                    seen[id.0] = true;
                    found.push((id, self.distance(id, p)));
                }
            });
            if found.len() >= k {
                sort_hits(&mut found);
                let kth = found[k - 1].1;
                if kth < self.unscanned_bound(&xyz, center, ring) {
                    break;
                }
            }
        }
        sort_hits(&mut found);
        found.truncate(k);
        found
    }

    /// Distance from `p` to the closest segment, `None` for an empty index.
    pub fn nearest_distance(&self, p: &Point) -> Option<f64> {
        self.nearest(p, 1).first().map(|&(_, d)| d)
    }

    /// Segments registered in any cell overlapping the box `[lo, hi]`, ascending by id.
    pub fn query_box(&self, lo: [f64; 3], hi: [f64; 3]) -> Vec<SegmentId> {
        let mut from = [0usize; 3];
        let mut to = [0usize; 3];
        for a in 0..self.dim {
            from[a] = self.cell_coord(lo[a], a);
            to[a] = self.cell_coord(hi[a], a);
        }
        let mut seen = vec![false; self.geometry.len()];
        let mut out = Vec::new();
        for k in from[2]..=to[2] {
            for j in from[1]..=to[1] {
                for i in from[0]..=to[0] {
                    for &id in &self.cells[self.flat([i, j, k])] {
                        if !seen[id.0] {
                            seen[id.0] = true;
                            out.push(id);
                        }
                    }
                }
            }
        }
        out.sort();
        out
    }

    fn visit_ring(&self, center: [usize; 3], ring: usize, mut f: impl FnMut(SegmentId)) {
        let r = ring as isize;
        let mut range = [(0isize, 0isize); 3];
        for (a, slot) in range.iter_mut().enumerate() {
            if a < self.dim {
                let c = center[a] as isize;
                *slot = ((c - r).max(0), (c + r).min(self.counts[a] as isize - 1));
            }
        }
        for k in range[2].0..=range[2].1 {
            for j in range[1].0..=range[1].1 {
                for i in range[0].0..=range[0].1 {
                    let c = [i, j, k];
                    let on_shell = (0..self.dim).any(|a| (c[a] - center[a] as isize).abs() == r);
                    if !on_shell {
                        continue;
                    }
                    let flat = self.flat([i as usize, j as usize, k as usize]);
                    for &id in &self.cells[flat] {
                        f(id);
                    }
                }
            }
        }
    }

    /// Lower bound on the distance from `p` to any cell outside the scanned block.
    fn unscanned_bound(&self, p: &[f64; 3], center: [usize; 3], ring: usize) -> f64 {
        let mut bound = f64::INFINITY;
        for a in 0..self.dim {
            let c = center[a] as isize;
            let r = ring as isize;
            if c - r > 0 {
                let edge = self.lo[a] + (c - r) as f64 * self.cell[a];
                bound = bound.min(p[a] - edge);
            }
            if c + r < self.counts[a] as isize - 1 {
                let edge = self.lo[a] + (c + r + 1) as f64 * self.cell[a];
                bound = bound.min(edge - p[a]);
            }
        }
        bound
    }
}

fn sort_hits(hits: &mut [(SegmentId, f64)]) {
    hits.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
}

/// Reference linear scan with the same ordering as [`SpatialIndex::nearest`].
pub fn nearest_linear(tree: &VesselTree, p: &Point, k: usize) -> Vec<(SegmentId, f64)> {
    let mut hits: Vec<(SegmentId, f64)> = tree
        .ids()
        .map(|id| {
            let s = tree.segment(id);
            (id, point_segment_distance(p, &s.proximal, &s.distal))
        })
        .collect();
    sort_hits(&mut hits);
    hits.truncate(k);
    hits
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_segments(n: usize, dim: usize, seed: u64) -> Vec<(Point, Point)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pt = |rng: &mut ChaCha8Rng| {
            let c: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
            Point::from_slice(&c).unwrap()
        };
        (0..n)
            .map(|_| {
                let a = pt(&mut rng);
                let d = pt(&mut rng) - a;
                (a, a + d * 0.1)
            })
            .collect()
    }

    fn linear(segs: &[(Point, Point)], p: &Point, k: usize) -> Vec<(SegmentId, f64)> {
        let mut hits: Vec<_> = segs
            .iter()
            .enumerate()
            .map(|(i, (a, b))| (SegmentId(i), point_segment_distance(p, a, b)))
            .collect();
        sort_hits(&mut hits);
        hits.truncate(k);
        hits
    }

    #[test]
    fn matches_linear_scan() {
        for dim in [2, 3] {
            let segs = random_segments(300, dim, dim as u64);
            let (lo, hi) = (Point::zero(dim), Point::from_slice(&vec![1.0; dim]).unwrap());
            let mut index = SpatialIndex::new(&lo, &hi, segs.len());
            for (i, (a, b)) in segs.iter().enumerate() {
                index.insert(SegmentId(i), *a, *b);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            for q in 0..300 {
                // some queries fall outside the indexed box
                let c: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() * 1.4 - 0.2).collect();
                let p = Point::from_slice(&c).unwrap();
                let k = 1 + q % 25;
                assert_eq!(index.nearest(&p, k), linear(&segs, &p, k));
            }
        }
    }

    #[test]
    fn exact_ties_break_by_id() {
        let (lo, hi) = (Point::new2(0.0, 0.0), Point::new2(1.0, 1.0));
        let mut index = SpatialIndex::new(&lo, &hi, 16);
        // four segments at exactly 0.25 from the center
        let c = Point::new2(0.5, 0.5);
        let segs = [
            (Point::new2(0.75, 0.4), Point::new2(0.75, 0.6)),
            (Point::new2(0.25, 0.4), Point::new2(0.25, 0.6)),
            (Point::new2(0.4, 0.75), Point::new2(0.6, 0.75)),
            (Point::new2(0.4, 0.25), Point::new2(0.6, 0.25)),
        ];
        for (i, (a, b)) in segs.iter().enumerate().rev() {
            index.insert(SegmentId(i), *a, *b);
        }
        let ids: Vec<usize> = index.nearest(&c, 3).iter().map(|h| h.0 .0).collect();
        assert_eq!(ids, vec![0, 1, 2]);
    }

    #[test]
    fn update_and_remove() {
        let (lo, hi) = (Point::new2(0.0, 0.0), Point::new2(1.0, 1.0));
        let mut index = SpatialIndex::new(&lo, &hi, 4);
        index.insert(SegmentId(0), Point::new2(0.0, 0.0), Point::new2(1.0, 1.0));
        index.insert(SegmentId(1), Point::new2(0.9, 0.1), Point::new2(0.95, 0.1));
        let p = Point::new2(0.5, 0.5);
        assert_eq!(index.nearest(&p, 1)[0].0, SegmentId(0));
        index.insert(SegmentId(0), Point::new2(0.0, 0.0), Point::new2(0.1, 0.0));
        assert_eq!(index.nearest(&p, 1)[0].0, SegmentId(1));
        index.remove(SegmentId(1));
        assert_eq!(index.len(), 1);
        assert_eq!(index.nearest(&p, 5).len(), 1);
    }
}
