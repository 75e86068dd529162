//! 2D SVG rendering.
//!
//! One `<line>` per segment with `stroke-width` = 2 r. The y axis is flipped
//! (SVG y = -world y) so the picture has the usual orientation. The domain is
//! drawn as a circle or rectangle outline; masks are drawn as a background
//! raster, one `<rect>` per horizontal run of set voxels. The viewBox is the
//! domain bounding box padded by 5% of its extent on each side.

use std::fmt::Write as _;
use std::path::Path;

use crate::domain::{DomainKind, PerfusionDomain};
use crate::error::{CcoError, Result};
use crate::tree::VesselTree;

const PAD_FRACTION: f64 = 0.05;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn format_svg(tree: &VesselTree, domain: &PerfusionDomain) -> Result<String> {
    if tree.dim() != 2 || domain.dim() != 2 {
        return Err(CcoError::Usage("SVG export needs a 2D tree and domain".into()));
    }
    let (lo, hi) = domain.bounding_box();
    let (lo, hi) = (lo.xyz(), hi.xyz());
    let (w, h) = (hi[0] - lo[0], hi[1] - lo[1]);
    let (pad_x, pad_y) = (w * PAD_FRACTION, h * PAD_FRACTION);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">"#,
        num(lo[0] - pad_x),
        num(-hi[1] - pad_y),
        num(w + 2.0 * pad_x),
        num(h + 2.0 * pad_y)
    );
    let outline = num(w.max(h) * 2e-3);
    match domain.kind() {
        DomainKind::Disk { center, radius } => {
            let c = center.xyz();
            let _ = writeln!(
                out,
                r#"<circle cx="{}" cy="{}" r="{}" fill="none" stroke="black" stroke-width="{outline}"/>"#,
                num(c[0]),
                num(-c[1]),
                num(*radius)
            );
        }
        DomainKind::Box { min, max } => {
            let (a, b) = (min.xyz(), max.xyz());
            let _ = writeln!(
                out,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black" stroke-width="{outline}"/>"#,
                num(a[0]),
                num(-b[1]),
                num(b[0] - a[0]),
                num(b[1] - a[1])
            );
        }
        DomainKind::Mask(mask) => {
            let (sh, sp, or) = (mask.shape(), mask.spacing(), mask.origin());
            out.push_str("<g fill=\"#dddddd\" stroke=\"none\">\n");
            for j in 0..sh[1] {
                let mut i = 0;
                while i < sh[0] {
                    if !mask.is_set(i, j, 0) {
                        i += 1;
                        continue;
                    }
                    let start = i;
                    while i < sh[0] && mask.is_set(i, j, 0) {
                        i += 1;
                    }
                    let _ = writeln!(
                        out,
                        r#"<rect x="{}" y="{}" width="{}" height="{}"/>"#,
                        num(or[0] + start as f64 * sp[0]),
                        num(-(or[1] + (j + 1) as f64 * sp[1])),
                        num((i - start) as f64 * sp[0]),
                        num(sp[1])
                    );
                }
            }
            out.push_str("</g>\n");
        }
        DomainKind::Sphere { .. } => unreachable!("sphere domains are 3D"),
    }
    out.push_str("<g stroke=\"#b01010\" stroke-linecap=\"round\">\n");
    for id in tree.preorder() {
        let s = tree.segment(id);
        let r = s
            .radius
            .ok_or_else(|| CcoError::Usage("SVG export needs realized radii".into()))?;
        let (p, d) = (s.proximal.xyz(), s.distal.xyz());
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke-width="{}"/>"#,
            num(p[0]),
            num(-p[1]),
            num(d[0]),
            num(-d[1]),
            num(2.0 * r)
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

pub fn export_svg(tree: &VesselTree, domain: &PerfusionDomain, path: &Path) -> Result<()> {
    let text = format_svg(tree, domain)?;
    std::fs::write(path, text).map_err(|e| CcoError::io(path, e))
}
