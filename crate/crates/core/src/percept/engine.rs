//! Pruned axon-map percept engine.
//!
//! For a pixel whose soma is vertex `i` of bundle `b`:
//!
//! ```text
//! I(p) = max_{j ≤ i} axonal(arc[i] − arc[j]) · Σ_e amp_e · radial(‖pos_e − v_j‖)
//! ```
//!
//! The electrode sum at a vertex does not depend on the pixel, so the model
//! precomputes, once per (grid, map, decay) triple:
//! - per electrode, the vertices within `prune_sigma·ρ` and their radial weights;
//! - per distinct soma, the disc-ward walk of relevant vertices with their
//!   axonal weights, cut where `axonal · n_electrodes < AXONAL_CUTOFF`.
//!
//! Evaluating a stimulus is then a sparse scatter followed by a max over each
//! walk, with a further early exit at `axonal · Σ amp < AXONAL_CUTOFF · max amp`,
//! which is unchanged when the stimulus is scaled.

use rayon::prelude::*;

use super::frame::{DecayParams, PerceptFrame};
use super::kernel::{DecayKernel, Gaussian};
use crate::axon_map::{AxonMap, SomaRef};
use crate::error::{Error, Result};
use crate::implant::{ElectrodeGrid, Stimulus};
use crate::raster::Raster;
use crate::scalar::Scalar;

/// Default electrode-vertex pruning radius, in units of ρ.
pub const DEFAULT_PRUNE_SIGMA: f64 = 6.0;

/// Axonal terms below this (times the amplitude bound) are dropped.
pub const AXONAL_CUTOFF: f64 = 1e-7;

/// Precomputed percept operator for one implant, axon map and decay setting.
#[derive(Clone, Debug)]
pub struct AxonPerceptModel<'m, T, K = Gaussian> {
    map: &'m AxonMap<T>,
    kernel: K,
    n_electrodes: usize,
    n_local: usize,
    tap_start: Vec<usize>,
    taps: Vec<(u32, T)>,
    walk_start: Vec<usize>,
    walks: Vec<(u32, T)>,
    pixel_slot: Vec<u32>,
}

impl<'m, T: Scalar> AxonPerceptModel<'m, T, Gaussian> {
    pub fn new(grid: &ElectrodeGrid<T>, map: &'m AxonMap<T>, decay: DecayParams<T>, prune_sigma: T) -> Result<Self> {
        Self::with_kernel(Gaussian, grid, map, decay, prune_sigma)
    }
}

impl<'m, T: Scalar, K: DecayKernel<T>> AxonPerceptModel<'m, T, K> {
    pub fn with_kernel(
        kernel: K,
        grid: &ElectrodeGrid<T>,
        map: &'m AxonMap<T>,
        decay: DecayParams<T>,
        prune_sigma: T,
    ) -> Result<Self> {
        decay.validate()?;
        if !(prune_sigma > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "prune_sigma must be positive, got {prune_sigma}"
            )));
        }
        let bundles = map.bundles();
        let mut offsets = Vec::with_capacity(bundles.len() + 1);
        offsets.push(0usize);
        for b in bundles {
            offsets.push(offsets.last().unwrap() + b.len());
        }
        let n_global = *offsets.last().unwrap();
        let reach = prune_sigma * decay.rho_um;
        let reach_sq = reach * reach;

        // Radial weights for every electrode-vertex pair within reach.
        let per_bundle: Vec<Vec<(u32, u32, T)>> = bundles
            .par_iter()
            .map(|b| {
                let mut out = Vec::new();
                for (v, p) in b.vertices.iter().enumerate() {
                    for e in grid.candidates_near(*p, reach) {
                        let d2 = p.dist_sq(&grid.positions()[e]);
                        if d2 <= reach_sq {
                            out.push((v as u32, e as u32, kernel.radial(d2, decay.rho_um)));
                        }
                    }
                }
                out
            })
            .collect();

        // Relevant vertices get dense local ids in global (bundle, vertex) order.
        let mut local_of = vec![u32::MAX; n_global];
        let mut n_local = 0u32;
        let mut per_electrode: Vec<Vec<(u32, T)>> = vec![Vec::new(); grid.len()];
        for (bi, list) in per_bundle.into_iter().enumerate() {
            for (v, e, w) in list {
                let slot = &mut local_of[offsets[bi] + v as usize];
                if *slot == u32::MAX {
                    *slot = n_local;
                    n_local += 1;
                }
                per_electrode[e as usize].push((*slot, w));
            }
        }
        let mut tap_start = Vec::with_capacity(grid.len() + 1);
        let mut taps = Vec::new();
        tap_start.push(0);
        for list in per_electrode {
            taps.extend(list);
            tap_start.push(taps.len());
        }

        // Distinct somas, in (bundle, vertex) order.
        let mut somas: Vec<SomaRef> = map.soma_of_pixel().to_vec();
        somas.sort_unstable();
        somas.dedup();
        let pixel_slot = map
            .soma_of_pixel()
            .iter()
            .map(|s| somas.binary_search(s).unwrap() as u32)
            .collect();

        let bound = T::from_usize_lossy(grid.len().max(1));
        let cutoff = T::lit(AXONAL_CUTOFF);
        let walk_lists: Vec<Vec<(u32, T)>> = somas
            .par_iter()
            .map(|s| {
                let b = &bundles[s.bundle as usize];
                let base = offsets[s.bundle as usize];
                let arc_i = b.arc_um[s.vertex as usize];
                let mut out = Vec::new();
                for j in (0..=s.vertex as usize).rev() {
                    let a = kernel.axonal(arc_i - b.arc_um[j], decay.lambda_um);
                    if a * bound < cutoff {
                        break;
                    }
                    let local = local_of[base + j];
                    if local != u32::MAX {
                        out.push((local, a));
                    }
                }
                out
            })
            .collect();
        let mut walk_start = Vec::with_capacity(walk_lists.len() + 1);
        let mut walks = Vec::new();
        walk_start.push(0);
        for w in walk_lists {
            walks.extend(w);
            walk_start.push(walks.len());
        }

        Ok(Self {
            map,
            kernel,
            n_electrodes: grid.len(),
            n_local: n_local as usize,
            tap_start,
            taps,
            walk_start,
            walks,
            pixel_slot,
        })
    }

    pub fn kernel(&self) -> &K {
        &self.kernel
    }

    /// Number of vertices within reach of at least one electrode.
    pub fn relevant_vertices(&self) -> usize {
        self.n_local
    }

    pub fn evaluate(&self, stim: &Stimulus<T>) -> Result<PerceptFrame<T>> {
        if stim.len() != self.n_electrodes {
            return Err(Error::DimensionMismatch(format!(
                "stimulus has {} amplitudes, model expects {}",
                stim.len(),
                self.n_electrodes
            )));
        }
        let (rows, cols) = self.map.render_dims();
        let window = *self.map.render_window();
        let total = stim.total();
        if total == T::zero() {
            return PerceptFrame::new(Raster::zeros(rows, cols), window);
        }

        let mut field = vec![T::zero(); self.n_local];
        for (e, &amp) in stim.amplitudes().iter().enumerate() {
            if amp == T::zero() {
                continue;
            }
            for &(v, w) in &self.taps[self.tap_start[e]..self.tap_start[e + 1]] {
                field[v as usize] = field[v as usize] + amp * w;
            }
        }

        let peak_amp = stim.amplitudes().iter().fold(T::zero(), |m, &a| m.max(a));
        let cutoff = T::lit(AXONAL_CUTOFF) * peak_amp;
        let slot_values: Vec<T> = (0..self.walk_start.len() - 1)
            .into_par_iter()
            .with_min_len(256)
            .map(|s| {
                let mut best = T::zero();
                // Walk weights are nonincreasing, so the first small one ends it.
                for &(v, a) in &self.walks[self.walk_start[s]..self.walk_start[s + 1]] {
                    if a * total < cutoff {
                        break;
                    }
                    let val = a * field[v as usize];
                    if val > best {
                        best = val;
                    }
                }
                best
            })
            .collect();

        let data = self.pixel_slot.iter().map(|&s| slot_values[s as usize]).collect();
        PerceptFrame::new(Raster::new(rows, cols, data)?, window)
    }
}

/// One-shot convenience over [`AxonPerceptModel`]; build the model once when
/// evaluating many stimuli on the same implant.
pub fn compute_percept_axon<T: Scalar>(
    stim: &Stimulus<T>,
    grid: &ElectrodeGrid<T>,
    map: &AxonMap<T>,
    decay: DecayParams<T>,
    prune_sigma: T,
) -> Result<PerceptFrame<T>> {
    stim.check_grid(grid)?;
    AxonPerceptModel::new(grid, map, decay, prune_sigma)?.evaluate(stim)
}
