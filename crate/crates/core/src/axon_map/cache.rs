//! `AXMP` binary cache for axon maps.
//!
//! Little-endian layout:
//!
//! ```text
//! "AXMP"            4 bytes
//! version           u32 (= 1)
//! key               u64  first 8 bytes of SHA-256(params ‖ window ‖ dims)
//! params            u32 n_bundles, f64 × 7 (r0, r_max, dr, tau, disc x, disc y, µm/deg)
//! bundle count      u32
//!   per bundle      u32 vertex count, then (f32 x, f32 y, f32 arc) per vertex
//! window            f64 × 4 (x_min, x_max, y_min, y_max)
//! dims              u32 rows, u32 cols
//! somas             rows·cols × (u32 bundle, u32 vertex)
//! ```

use std::path::Path;

use sha2::{Digest, Sha256};

use super::{AxonBundle, AxonMap, SomaRef, TrajectoryParams};
use crate::error::{CacheError, Error, Result};
use crate::geometry::{RetinalPoint, RetinalRect, VisualFieldPoint};
use crate::scalar::Scalar;

pub const AXMP_MAGIC: &[u8; 4] = b"AXMP";
pub const AXMP_VERSION: u32 = 1;

fn params_block(p: &TrajectoryParams) -> Vec<u8> {
    let mut out = Vec::with_capacity(60);
    out.extend_from_slice(&(p.n_bundles as u32).to_le_bytes());
    for v in [
        p.r0_deg,
        p.r_max_deg,
        p.dr_deg,
        p.tau_deg,
        p.optic_disc.x_deg,
        p.optic_disc.y_deg,
        p.um_per_deg,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn window_block(w: &RetinalRect<f64>) -> Vec<u8> {
    [w.x_min, w.x_max, w.y_min, w.y_max]
        .iter()
        .flat_map(|v| v.to_le_bytes())
        .collect()
}

fn dims_block(dims: (usize, usize)) -> [u8; 8] {
    let mut out = [0u8; 8];
    out[..4].copy_from_slice(&(dims.0 as u32).to_le_bytes());
    out[4..].copy_from_slice(&(dims.1 as u32).to_le_bytes());
    out
}

/// Content key of an axon map's inputs: trajectory parameters, render window
/// and render dimensions.
pub fn cache_key(params: &TrajectoryParams, window: &RetinalRect<f64>, dims: (usize, usize)) -> u64 {
    let mut h = Sha256::new();
    h.update(params_block(params));
    h.update(window_block(window));
    h.update(dims_block(dims));
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

fn encode<T: Scalar>(map: &AxonMap<T>) -> Vec<u8> {
    let window = map.render_window().to_f64();
    let mut out = Vec::new();
    out.extend_from_slice(AXMP_MAGIC);
    out.extend_from_slice(&AXMP_VERSION.to_le_bytes());
    out.extend_from_slice(&map.key().to_le_bytes());
    out.extend_from_slice(&params_block(map.params()));
    out.extend_from_slice(&(map.bundles().len() as u32).to_le_bytes());
    for b in map.bundles() {
        out.extend_from_slice(&(b.len() as u32).to_le_bytes());
        for (v, a) in b.vertices.iter().zip(&b.arc_um) {
            for x in [v.x_um, v.y_um, *a] {
                out.extend_from_slice(&(x.as_f64() as f32).to_le_bytes());
            }
        }
    }
    out.extend_from_slice(&window_block(&window));
    out.extend_from_slice(&dims_block(map.render_dims()));
    for s in map.soma_of_pixel() {
        out.extend_from_slice(&s.bundle.to_le_bytes());
        out.extend_from_slice(&s.vertex.to_le_bytes());
    }
    out
}

pub fn save_axon_map<T: Scalar>(map: &AxonMap<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode(map)).map_err(|e| Error::io(path, e))
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], CacheError> {
        if self.buf.len() - self.pos < n {
            return Err(CacheError::Corrupt(format!("truncated while reading {what}")));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32, CacheError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64, CacheError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f32(&mut self, what: &str) -> Result<f32, CacheError> {
        Ok(f32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64, CacheError> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

fn decode<T: Scalar>(buf: &[u8]) -> Result<AxonMap<T>, CacheError> {
    let mut r = Reader { buf, pos: 0 };
    if buf.len() < 4 || &buf[..4] != AXMP_MAGIC {
        return Err(CacheError::NotAnAxonMap);
    }
    r.pos = 4;
    let version = r.u32("version")?;
    if version != AXMP_VERSION {
        return Err(CacheError::UnsupportedVersion(version));
    }
    let stored = r.u64("key")?;
    let params = TrajectoryParams {
        n_bundles: r.u32("params")? as usize,
        r0_deg: r.f64("params")?,
        r_max_deg: r.f64("params")?,
        dr_deg: r.f64("params")?,
        tau_deg: r.f64("params")?,
        optic_disc: VisualFieldPoint::new(r.f64("params")?, r.f64("params")?),
        um_per_deg: r.f64("params")?,
    };
    let n_bundles = r.u32("bundle count")? as usize;
    // Each bundle needs at least 4 + 2·12 bytes; reject absurd counts before allocating.
    if n_bundles > buf.len() / 28 {
        return Err(CacheError::Corrupt(format!(
            "bundle count {n_bundles} exceeds file size"
        )));
    }
    let mut bundles = Vec::with_capacity(n_bundles);
    for b in 0..n_bundles {
        let n = r.u32("vertex count")? as usize;
        if n < 2 {
            return Err(CacheError::Corrupt(format!("bundle {b} has {n} vertices")));
        }
        let raw = r.take(n.saturating_mul(12), "bundle vertices")?;
        let mut sub = Reader { buf: raw, pos: 0 };
        let mut vertices = Vec::with_capacity(n);
        let mut arc_um = Vec::with_capacity(n);
        for _ in 0..n {
            let x = sub.f32("vertex")?;
            let y = sub.f32("vertex")?;
            let a = sub.f32("vertex")?;
            vertices.push(RetinalPoint::new(T::lit(x as f64), T::lit(y as f64)));
            arc_um.push(T::lit(a as f64));
        }
        let monotone = arc_um[0] == T::zero() && arc_um.windows(2).all(|w| w[1] > w[0]);
        if !monotone {
            return Err(CacheError::Corrupt(format!(
                "bundle {b} arc length is not strictly increasing"
            )));
        }
        bundles.push(AxonBundle { vertices, arc_um });
    }
    let window = RetinalRect {
        x_min: r.f64("window")?,
        x_max: r.f64("window")?,
        y_min: r.f64("window")?,
        y_max: r.f64("window")?,
    };
    let dims = (r.u32("dims")? as usize, r.u32("dims")? as usize);
    let n_pix = dims.0.saturating_mul(dims.1);
    let raw = r.take(n_pix.saturating_mul(8), "soma table")?;
    let somas: Vec<SomaRef> = raw
        .chunks_exact(8)
        .map(|c| SomaRef {
            bundle: u32::from_le_bytes(c[..4].try_into().unwrap()),
            vertex: u32::from_le_bytes(c[4..].try_into().unwrap()),
        })
        .collect();
    if r.pos != buf.len() {
        return Err(CacheError::Corrupt(format!("{} trailing bytes", buf.len() - r.pos)));
    }
    let computed = cache_key(&params, &window, dims);
    if computed != stored {
        return Err(CacheError::HashMismatch { stored, computed });
    }
    AxonMap::from_parts(params, bundles, RetinalRect::from_f64(&window), dims, somas)
        .map_err(|e| CacheError::Corrupt(e.to_string()))
}

pub fn load_axon_map<T: Scalar>(path: impl AsRef<Path>) -> Result<AxonMap<T>> {
    let path = path.as_ref();
    let buf = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&buf).map_err(|source| Error::Cache {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a cache and checks that it was built for `expected_key`
/// (see [`cache_key`]); a different key is reported as a stale cache.
pub fn load_axon_map_for<T: Scalar>(path: impl AsRef<Path>, expected_key: u64) -> Result<AxonMap<T>> {
    let path = path.as_ref();
    let map = load_axon_map(path)?;
    if map.key() != expected_key {
        return Err(Error::Cache {
            path: path.to_path_buf(),
            source: CacheError::Stale {
                expected: expected_key,
                found: map.key(),
            },
        });
    }
    Ok(map)
}
