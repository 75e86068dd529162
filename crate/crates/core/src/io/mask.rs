//! Voxel mask ingestion.
//!
//! A mask is a `.maskmeta` JSON header plus an occupancy file:
//!
//! ```json
//! {"dim": 2, "nx": 20, "ny": 20, "nz": 1, "spacing": [0.05, 0.05], "origin": [0.0, 0.0]}
//! ```
//!
//! The occupancy file is either raw bytes (`nx*ny*nz`, x fastest, then y, then z;
//! 0 = outside, nonzero = inside) or, for 2D, a binary PGM (`P5`) whose row `j`
//! is voxel row `y = j`. Spacing and origin always come from the header.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::VoxelMask;
use crate::error::{CcoError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskMeta {
    pub dim: usize,
    pub nx: usize,
    pub ny: usize,
    #[serde(default = "one")]
    pub nz: usize,
    pub spacing: Vec<f64>,
    pub origin: Vec<f64>,
}

fn one() -> usize {
    1
}

impl MaskMeta {
    pub fn shape(&self) -> Vec<usize> {
        [self.nx, self.ny, self.nz][..self.dim.min(3)].to_vec()
    }

    fn voxel_count(&self) -> usize {
        self.nx * self.ny * self.nz
    }
}

pub fn read_meta(path: &Path) -> Result<MaskMeta> {
    let text = std::fs::read_to_string(path).map_err(|e| CcoError::io(path, e))?;
    let meta: MaskMeta = serde_json::from_str(&text)
        .map_err(|e| CcoError::InvalidDomain(format!("{}: {e}", path.display())))?;
    if meta.dim != 2 && meta.dim != 3 {
        return Err(CcoError::InvalidDomain(format!("{}: dim must be 2 or 3", path.display())));
    }
    if meta.dim == 2 && meta.nz != 1 {
        return Err(CcoError::InvalidDomain(format!("{}: 2D mask needs nz = 1", path.display())));
    }
    Ok(meta)
}

/// Decodes a binary PGM (`P5`, maxval < 256) into `(width, height, pixels)`.
pub fn decode_pgm(bytes: &[u8]) -> Result<(usize, usize, &[u8])> {
    let bad = |m: &str| CcoError::InvalidDomain(format!("PGM: {m}"));
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        // skip whitespace and comments
        while pos < bytes.len() {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else if bytes[pos].is_ascii_whitespace() {
                pos += 1;
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("non-ASCII header"))?);
    }
    if fields[0] != "P5" {
        return Err(bad("only binary P5 files are supported"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad header number"));
    let (w, h, maxval) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
    if maxval == 0 || maxval > 255 {
        return Err(bad("maxval must be in 1..=255"));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let data = bytes.get(pos..pos + w * h).ok_or_else(|| bad("raster shorter than width*height"))?;
    Ok((w, h, data))
}

/// Loads a mask from its header and occupancy file (`.pgm` by extension, raw otherwise).
pub fn load_mask(meta_path: &Path, data_path: &Path) -> Result<VoxelMask> {
    let meta = read_meta(meta_path)?;
    let bytes = std::fs::read(data_path).map_err(|e| CcoError::io(data_path, e))?;
    let is_pgm = data_path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    let voxels: &[u8] = if is_pgm {
        if meta.dim != 2 {
            return Err(CcoError::InvalidDomain("PGM masks are 2D only".into()));
        }
        let (w, h, data) = decode_pgm(&bytes)?;
        if (w, h) != (meta.nx, meta.ny) {
            return Err(CcoError::InvalidDomain(format!(
                "PGM is {w}x{h} but header says {}x{}",
                meta.nx, meta.ny
            )));
        }
        data
    } else {
        if bytes.len() != meta.voxel_count() {
            return Err(CcoError::InvalidDomain(format!(
                "{}: {} bytes, expected {}",
                data_path.display(),
                bytes.len(),
                meta.voxel_count()
            )));
        }
        &bytes
    };
    let occupancy: Vec<bool> = voxels.iter().map(|&b| b != 0).collect();
    VoxelMask::new(meta.dim, &meta.shape(), &meta.spacing, &meta.origin, &occupancy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_and_pgm_agree() {
        let dir = tempfile::tempdir().unwrap();
        let meta = dir.path().join("m.maskmeta");
        std::fs::write(&meta, r#"{"dim": 2, "nx": 3, "ny": 2, "spacing": [0.5, 0.5], "origin": [-1, 0]}"#).unwrap();
        let raster = [0u8, 1, 0, 255, 0, 0];
        let raw = dir.path().join("m.mask");
        std::fs::write(&raw, raster).unwrap();
        let pgm = dir.path().join("m.pgm");
        let mut bytes = b"P5\n# test\n3 2\n255\n".to_vec();
        bytes.extend_from_slice(&raster);
        std::fs::write(&pgm, bytes).unwrap();

        let a = load_mask(&meta, &raw).unwrap();
        let b = load_mask(&meta, &pgm).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.set_count(), 2);
        assert!(a.is_set(1, 0, 0));
        assert!(a.is_set(0, 1, 0));
        assert!(!a.is_set(0, 0, 0));
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let meta = dir.path().join("m.maskmeta");
        std::fs::write(&meta, r#"{"dim": 3, "nx": 2, "ny": 2, "nz": 2, "spacing": [1, 1, 1], "origin": [0, 0, 0]}"#).unwrap();
        let raw = dir.path().join("m.mask");
        std::fs::write(&raw, [1u8; 7]).unwrap();
        assert!(matches!(load_mask(&meta, &raw), Err(CcoError::InvalidDomain(_))));
    }
}
