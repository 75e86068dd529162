//! Perfusion domains: the region of space where vessels may exist.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{CcoError, Result};
use crate::geometry::{Point, SegmentGeometry};

/// Consecutive rejection-sampling misses tolerated by [`PerfusionDomain::sample_point`].
pub const MAX_SAMPLING_MISSES: usize = 10_000;

/// Occupancy grid with half-open voxel cells `[origin + i*spacing, origin + (i+1)*spacing)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VoxelMask {
    dim: usize,
    /// `[nx, ny, nz]`, `nz == 1` in 2D.
    shape: [usize; 3],
    spacing: [f64; 3],
    origin: [f64; 3],
    bits: Vec<u64>,
    set_count: usize,
}

impl VoxelMask {
    /// `occupancy` is indexed x fastest, then y, then z.
    pub fn new(
        dim: usize,
        shape: &[usize],
        spacing: &[f64],
        origin: &[f64],
        occupancy: &[bool],
    ) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(CcoError::InvalidDomain(format!("mask dimension must be 2 or 3, got {dim}")));
        }
        if shape.len() != dim || spacing.len() != dim || origin.len() != dim {
            return Err(CcoError::InvalidDomain(format!(
                "mask shape/spacing/origin must each have {dim} components"
            )));
        }
        if shape.contains(&0) {
            return Err(CcoError::InvalidDomain("mask shape has a zero extent".into()));
        }
        if spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(CcoError::InvalidDomain(format!(
                "voxel spacing must be positive, got {spacing:?}"
            )));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(CcoError::InvalidDomain("mask origin must be finite".into()));
        }
        let mut sh = [1usize; 3];
        let mut sp = [1.0f64; 3];
        let mut or = [0.0f64; 3];
        sh[..dim].copy_from_slice(shape);
        sp[..dim].copy_from_slice(spacing);
        or[..dim].copy_from_slice(origin);
        let total = sh[0] * sh[1] * sh[2];
        if occupancy.len() != total {
            return Err(CcoError::InvalidDomain(format!(
                "mask has {} voxels but shape implies {total}",
                occupancy.len()
            )));
        }
        let mut bits = vec![0u64; total.div_ceil(64)];
        let mut set_count = 0;
        for (i, &v) in occupancy.iter().enumerate() {
            if v {
                bits[i / 64] |= 1 << (i % 64);
                set_count += 1;
            }
        }
        if set_count == 0 {
            return Err(CcoError::InvalidDomain("mask has no voxel set".into()));
        }
        Ok(VoxelMask {
            dim,
            shape: sh,
            spacing: sp,
            origin: or,
            bits,
            set_count,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape[..self.dim]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.dim]
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.dim]
    }

    pub fn set_count(&self) -> usize {
        self.set_count
    }

    pub fn is_set(&self, i: usize, j: usize, k: usize) -> bool {
        if i >= self.shape[0] || j >= self.shape[1] || k >= self.shape[2] {
            return false;
        }
        let idx = i + self.shape[0] * (j + self.shape[1] * k);
        self.bits[idx / 64] >> (idx % 64) & 1 == 1
    }

    fn voxel_of(&self, p: &Point) -> Option<[usize; 3]> {
        let xyz = p.xyz();
        let mut idx = [0usize; 3];
        for a in 0..self.dim {
            let f = ((xyz[a] - self.origin[a]) / self.spacing[a]).floor();
            if f < 0.0 || f >= self.shape[a] as f64 {
                return None;
            }
            idx[a] = f as usize;
        }
        Some(idx)
    }

    fn voxel_measure(&self) -> f64 {
        self.spacing[..self.dim].iter().product()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DomainKind {
    Disk { center: Point, radius: f64 },
    Sphere { center: Point, radius: f64 },
    /// Closed axis-aligned box, 2D or 3D.
    Box { min: Point, max: Point },
    Mask(VoxelMask),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerfusionDomain {
    kind: DomainKind,
    dim: usize,
}

impl PerfusionDomain {
    pub fn disk(center: Point, radius: f64) -> Result<Self> {
        if center.dim() != 2 {
            return Err(CcoError::InvalidDomain("disk center must be 2D".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(CcoError::InvalidDomain(format!("disk radius must be positive, got {radius}")));
        }
        Ok(PerfusionDomain {
            kind: DomainKind::Disk { center, radius },
            dim: 2,
        })
    }

    pub fn sphere(center: Point, radius: f64) -> Result<Self> {
        if center.dim() != 3 {
            return Err(CcoError::InvalidDomain("sphere center must be 3D".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(CcoError::InvalidDomain(format!("sphere radius must be positive, got {radius}")));
        }
        Ok(PerfusionDomain {
            kind: DomainKind::Sphere { center, radius },
            dim: 3,
        })
    }

    pub fn cuboid(min: Point, max: Point) -> Result<Self> {
        if min.dim() != max.dim() {
            return Err(CcoError::InvalidDomain("box corners differ in dimension".into()));
        }
        if min.coords().iter().zip(max.coords()).any(|(a, b)| !(b > a)) {
            return Err(CcoError::InvalidDomain(format!("box is empty: {min:?} .. {max:?}")));
        }
        Ok(PerfusionDomain {
            dim: min.dim(),
            kind: DomainKind::Box { min, max },
        })
    }

    pub fn mask(mask: VoxelMask) -> Self {
        PerfusionDomain {
            dim: mask.dim,
            kind: DomainKind::Mask(mask),
        }
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check_dim(&self, p: &Point) -> Result<()> {
        if p.dim() != self.dim {
            return Err(CcoError::Usage(format!(
                "{}D point {:?} queried against a {}D domain",
                p.dim(),
                p,
                self.dim
            )));
        }
        Ok(())
    }

    pub fn contains(&self, p: &Point) -> Result<bool> {
        self.check_dim(p)?;
        Ok(self.contains_unchecked(p))
    }

    pub(crate) fn contains_unchecked(&self, p: &Point) -> bool {
        match &self.kind {
            DomainKind::Disk { center, radius } | DomainKind::Sphere { center, radius } => {
                (*p - *center).norm_sq() <= radius * radius
            }
            DomainKind::Box { min, max } => {
                let (p, lo, hi) = (p.xyz(), min.xyz(), max.xyz());
                (0..self.dim).all(|a| p[a] >= lo[a] && p[a] <= hi[a])
            }
            DomainKind::Mask(m) => match m.voxel_of(p) {
                Some([i, j, k]) => m.is_set(i, j, k),
                None => false,
            },
        }
    }

    /// Area (2D) or volume (3D).
    pub fn measure(&self) -> f64 {
        match &self.kind {
            DomainKind::Disk { radius, .. } => PI * radius * radius,
            DomainKind::Sphere { radius, .. } => 4.0 / 3.0 * PI * radius.powi(3),
            DomainKind::Box { min, max } => {
                (*max - *min).coords().iter().product()
            }
            DomainKind::Mask(m) => m.set_count as f64 * m.voxel_measure(),
        }
    }

    /// `measure^(1/dim)`.
    pub fn characteristic_length(&self) -> f64 {
        self.measure().powf(1.0 / self.dim as f64)
    }

    /// Minimum segment length accepted anywhere in a tree grown in this domain.
    pub fn min_segment_length(&self) -> f64 {
        1e-4 * self.characteristic_length()
    }

    /// Sampling step used by [`Self::segment_inside`] when none is given:
    /// half the smallest voxel spacing for masks, characteristic length / 64 otherwise.
    pub fn default_step(&self) -> f64 {
        match &self.kind {
            DomainKind::Mask(m) => 0.5 * m.spacing().iter().cloned().fold(f64::INFINITY, f64::min),
            _ => self.characteristic_length() / 64.0,
        }
    }

    /// Sampling bounding box `(lo, hi)`: exact for analytic kinds, the grid extent for masks.
    pub fn bounding_box(&self) -> (Point, Point) {
        match &self.kind {
            DomainKind::Disk { center, radius } => {
                let r = Point::new2(*radius, *radius);
                (*center - r, *center + r)
            }
            DomainKind::Sphere { center, radius } => {
                let r = Point::new3(*radius, *radius, *radius);
                (*center - r, *center + r)
            }
            DomainKind::Box { min, max } => (*min, *max),
            DomainKind::Mask(m) => {
                let mut lo = [0.0; 3];
                let mut hi = [0.0; 3];
                for a in 0..m.dim {
                    lo[a] = m.origin[a];
                    hi[a] = m.origin[a] + m.shape[a] as f64 * m.spacing[a];
                }
                let lo = Point::from_slice(&lo[..m.dim]).expect("finite mask extent");
                let hi = Point::from_slice(&hi[..m.dim]).expect("finite mask extent");
                (lo, hi)
            }
        }
    }

    /// Uniform rejection sample from the domain.
    ///
    /// Each attempt draws exactly `dim` uniforms in `[0, 1)` (x, then y, then z)
    /// from `rng` and maps them onto the bounding box.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Point> {
        let (lo, hi) = self.bounding_box();
        let extent = hi - lo;
        for _ in 0..MAX_SAMPLING_MISSES {
            let mut c = [0.0; 3];
            for (a, slot) in c.iter_mut().enumerate().take(self.dim) {
                let u: f64 = rng.gen();
                *slot = lo.xyz()[a] + u * extent.xyz()[a];
            }
            let p = Point::from_slice(&c[..self.dim]).expect("finite sample");
            if self.contains_unchecked(&p) {
                return Ok(p);
            }
        }
        Err(CcoError::DegenerateDomain {
            misses: MAX_SAMPLING_MISSES,
        })
    }

    /// True iff every point at arc-length increments of `step` along the
    /// segment, plus its distal endpoint, lies in the domain.
    pub fn segment_inside(&self, seg: &SegmentGeometry, step: f64) -> bool {
        assert!(step > 0.0, "segment_inside step must be positive");
        if seg.proximal.dim() != self.dim || seg.distal.dim() != self.dim {
            return false;
        }
        let len = seg.length();
        let dir = seg.distal - seg.proximal;
        let mut s = 0.0;
        let mut i = 0u64;
        while s < len {
            let p = seg.proximal + dir * (s / len);
            if !self.contains_unchecked(&p) {
                return false;
            }
            i += 1;
            s = i as f64 * step;
        }
        self.contains_unchecked(&seg.distal)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_disk() -> PerfusionDomain {
        PerfusionDomain::disk(Point::new2(0.0, 0.0), 1.0).unwrap()
    }

    /// C-shaped 2D mask on the unit square (20x20 voxels of 0.05): left, bottom
    /// and top bars 0.2 thick, open on the right, empty core.
    pub(crate) fn c_mask() -> PerfusionDomain {
        let n = 20;
        let mut occ = vec![false; n * n];
        for j in 0..n {
            for i in 0..n {
                let in_frame = i < 4 || j < 4 || j >= n - 4;
                occ[i + n * j] = in_frame;
            }
        }
        PerfusionDomain::mask(VoxelMask::new(2, &[n, n], &[0.05, 0.05], &[0.0, 0.0], &occ).unwrap())
    }

    #[test]
    fn disk_contains() {
        let d = unit_disk();
        assert!(d.contains(&Point::new2(0.0, 0.0)).unwrap());
        assert!(!d.contains(&Point::new2(2.0, 0.0)).unwrap());
        assert!(matches!(d.contains(&Point::new3(0.0, 0.0, 0.0)), Err(CcoError::Usage(_))));
    }

    #[test]
    fn single_voxel_mask() {
        let m = VoxelMask::new(3, &[1, 1, 1], &[0.1, 0.1, 0.1], &[0.0, 0.0, 0.0], &[true]).unwrap();
        let d = PerfusionDomain::mask(m);
        assert!(d.contains(&Point::new3(0.05, 0.05, 0.05)).unwrap());
        // half-open cells: the upper face is outside
        assert!(!d.contains(&Point::new3(0.1, 0.05, 0.05)).unwrap());
        assert!(d.contains(&Point::new3(0.0, 0.0, 0.0)).unwrap());
        assert!(!d.contains(&Point::new3(-1e-12, 0.05, 0.05)).unwrap());
    }

    #[test]
    fn measures() {
        assert!((unit_disk().measure() - PI).abs() < 1e-15);
        let s = PerfusionDomain::sphere(Point::new3(0.0, 0.0, 0.0), 1.0).unwrap();
        assert!((s.measure() - 4.0 * PI / 3.0).abs() < 1e-15);
        let mut occ = vec![false; 1000];
        for v in occ.iter_mut().step_by(10) {
            *v = true;
        }
        let m = VoxelMask::new(3, &[10, 10, 10], &[0.1, 0.1, 0.1], &[0.0; 3], &occ).unwrap();
        assert_eq!(m.set_count(), 100);
        let d = PerfusionDomain::mask(m);
        assert!((d.measure() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn rejects_empty_and_bad_masks() {
        assert!(VoxelMask::new(2, &[2, 2], &[0.1, 0.1], &[0.0, 0.0], &[false; 4]).is_err());
        assert!(VoxelMask::new(2, &[2, 2], &[0.0, 0.1], &[0.0, 0.0], &[true; 4]).is_err());
        assert!(VoxelMask::new(2, &[2, 2], &[0.1, 0.1], &[0.0, 0.0], &[true; 3]).is_err());
        assert!(PerfusionDomain::disk(Point::new2(0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn sampling_is_inside_and_deterministic() {
        let d = unit_disk();
        let d2 = d.clone();
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let p = d.sample_point(&mut a).unwrap();
            assert!(p.norm() <= 1.0);
            assert_eq!(p, d2.sample_point(&mut b).unwrap());
        }
    }

    #[test]
    fn disk_sample_mean_is_centered() {
        let d = unit_disk();
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let n = 10_000;
        let mut sum = Point::new2(0.0, 0.0);
        for _ in 0..n {
            sum = sum + d.sample_point(&mut rng).unwrap();
        }
        let mean = sum * (1.0 / n as f64);
        // standard error per axis is 0.5/sqrt(n) = 0.005
        assert!(mean.coords()[0].abs() < 0.05 && mean.coords()[1].abs() < 0.05, "{mean:?}");
    }

    #[test]
    fn degenerate_domain_reports_misses() {
        // one tiny voxel in a huge grid: acceptance rate 1e-6
        let n = 1000;
        let mut occ = vec![false; n * n];
        occ[0] = true;
        let d = PerfusionDomain::mask(VoxelMask::new(2, &[n, n], &[1.0, 1.0], &[0.0, 0.0], &occ).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(matches!(d.sample_point(&mut rng), Err(CcoError::DegenerateDomain { .. })));
    }

    #[test]
    fn chords() {
        let d = unit_disk();
        let inside = SegmentGeometry::new(Point::new2(-0.5, 0.0), Point::new2(0.5, 0.0));
        assert!(d.segment_inside(&inside, 0.1));
        let out = SegmentGeometry::new(Point::new2(0.0, 0.0), Point::new2(2.0, 0.0));
        assert!(!d.segment_inside(&out, 0.1));
    }

    #[test]
    fn segment_across_c_void_is_outside() {
        let d = c_mask();
        let a = Point::new2(0.5, 0.1);
        let b = Point::new2(0.5, 0.9);
        assert!(d.contains(&a).unwrap() && d.contains(&b).unwrap());
        // the midpoint falls in the unset core of the C
        let mid = Point::new2(0.5, 0.5);
        assert!(!d.contains(&mid).unwrap());
        assert!(!d.segment_inside(&SegmentGeometry::new(a, b), d.default_step()));
        // a path along the back of the C stays inside
        let c = Point::new2(0.1, 0.1);
        let e = Point::new2(0.1, 0.9);
        assert!(d.segment_inside(&SegmentGeometry::new(c, e), d.default_step()));
    }

    #[test]
    fn samples_are_self_consistent() {
        let d = c_mask();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..1000 {
            let p = d.sample_point(&mut rng).unwrap();
            assert!(d.contains(&p).unwrap());
            assert_eq!(d.contains(&p).unwrap(), d.contains(&p).unwrap());
            assert!(d.segment_inside(&SegmentGeometry::new(p, p), d.default_step()));
        }
    }
}
