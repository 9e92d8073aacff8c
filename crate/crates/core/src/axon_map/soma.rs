//! Nearest-vertex soma assignment.
//!
//! The soma of a render pixel is the bundle vertex closest to the pixel
//! center. Ties go to the lower bundle id, then the lower vertex index.
//! [`assign_soma`] is the exhaustive definition; [`VertexIndex`] answers the
//! same query through a uniform spatial hash.

use serde::{Deserialize, Serialize};

use super::trajectory::AxonBundle;
use crate::error::{Error, Result};
use crate::geometry::RetinalPoint;
use crate::scalar::Scalar;

/// A `(bundle, vertex)` reference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SomaRef {
    pub bundle: u32,
    pub vertex: u32,
}

impl SomaRef {
    pub fn new(bundle: usize, vertex: usize) -> Self {
        Self {
            bundle: bundle as u32,
            vertex: vertex as u32,
        }
    }
}

/// Exhaustive nearest-vertex search.
pub fn assign_soma<T: Scalar>(p: RetinalPoint<T>, bundles: &[AxonBundle<T>]) -> Result<SomaRef> {
    let mut best: Option<(T, SomaRef)> = None;
    for (b, bundle) in bundles.iter().enumerate() {
        for (v, q) in bundle.vertices.iter().enumerate() {
            let d = p.dist_sq(q);
            // Strict `<` keeps the first (lowest-id) vertex among ties.
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, SomaRef::new(b, v)));
            }
        }
    }
    best.map(|(_, s)| s)
        .ok_or_else(|| Error::InvalidParameter("soma assignment needs at least one bundle vertex".into()))
}

/// Uniform grid over all bundle vertices.
#[derive(Clone, Debug)]
pub struct VertexIndex<T> {
    points: Vec<RetinalPoint<T>>,
    ids: Vec<SomaRef>,
    origin: RetinalPoint<T>,
    cell: T,
    nx: usize,
    ny: usize,
    /// CSR layout: vertices of cell `k` are `order[starts[k]..starts[k+1]]`,
    /// ascending in `(bundle, vertex)`.
    starts: Vec<usize>,
    order: Vec<u32>,
}

impl<T: Scalar> VertexIndex<T> {
    pub fn new(bundles: &[AxonBundle<T>], cell_um: T) -> Result<Self> {
        if !(cell_um > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "cell size must be positive, got {cell_um}"
            )));
        }
        let mut points = Vec::new();
        let mut ids = Vec::new();
        for (b, bundle) in bundles.iter().enumerate() {
            for (v, q) in bundle.vertices.iter().enumerate() {
                points.push(*q);
                ids.push(SomaRef::new(b, v));
            }
        }
        if points.is_empty() {
            return Err(Error::InvalidParameter(
                "soma assignment needs at least one bundle vertex".into(),
            ));
        }
        let (mut lo, mut hi) = (points[0], points[0]);
        for q in &points {
            lo.x_um = lo.x_um.min(q.x_um);
            lo.y_um = lo.y_um.min(q.y_um);
            hi.x_um = hi.x_um.max(q.x_um);
            hi.y_um = hi.y_um.max(q.y_um);
        }
        let nx = ((hi.x_um - lo.x_um) / cell_um).floor().to_usize().unwrap_or(0) + 1;
        let ny = ((hi.y_um - lo.y_um) / cell_um).floor().to_usize().unwrap_or(0) + 1;
        let mut index = Self {
            points,
            ids,
            origin: lo,
            cell: cell_um,
            nx,
            ny,
            starts: Vec::new(),
            order: Vec::new(),
        };
        let cells: Vec<usize> = index
            .points
            .iter()
            .map(|q| {
                let (cx, cy) = index.cell_of(*q);
                cy as usize * nx + cx as usize
            })
            .collect();
        let mut counts = vec![0usize; nx * ny + 1];
        for &c in &cells {
            counts[c + 1] += 1;
        }
        for k in 1..counts.len() {
            counts[k] += counts[k - 1];
        }
        let mut fill = counts.clone();
        let mut order = vec![0u32; cells.len()];
        // Points are visited in (bundle, vertex) order, so each cell's slice
        // stays sorted by id.
        for (i, &c) in cells.iter().enumerate() {
            order[fill[c]] = i as u32;
            fill[c] += 1;
        }
        index.starts = counts;
        index.order = order;
        Ok(index)
    }

    /// Cell coordinates, unclamped (queries may lie outside the grid).
    fn cell_of(&self, p: RetinalPoint<T>) -> (i64, i64) {
        let to_i = |f: T| {
            f.to_i64()
                .unwrap_or(if f > T::zero() { i64::MAX / 4 } else { i64::MIN / 4 })
        };
        (
            to_i(((p.x_um - self.origin.x_um) / self.cell).floor()),
            to_i(((p.y_um - self.origin.y_um) / self.cell).floor()),
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same result as [`assign_soma`] over the indexed bundles.
    pub fn nearest(&self, p: RetinalPoint<T>) -> SomaRef {
        let (cx, cy) = self.cell_of(p);
        let (nx, ny) = (self.nx as i64, self.ny as i64);
        let max_ring = [cx, nx - 1 - cx, cy, ny - 1 - cy]
            .iter()
            .map(|d| d.abs())
            .max()
            .unwrap();
        // Slack for rounding in the cell computation.
        let shrink = T::one() - T::lit(1e-6);
        let mut best: Option<(T, u32)> = None;
        let mut ring = 0i64;
        loop {
            for y in (cy - ring).max(0)..=(cy + ring).min(ny - 1) {
                if y == cy - ring || y == cy + ring {
                    for x in (cx - ring).max(0)..=(cx + ring).min(nx - 1) {
                        self.scan_cell((y * nx + x) as usize, p, &mut best);
                    }
                } else {
                    for x in [cx - ring, cx + ring] {
                        if (0..nx).contains(&x) {
                            self.scan_cell((y * nx + x) as usize, p, &mut best);
                        }
                    }
                }
            }
            // Every unvisited vertex lies at least `ring · cell` away.
            if let Some((bd, _)) = best {
                let reach = T::from_usize_lossy(ring as usize) * self.cell;
                if bd < reach * reach * shrink {
                    break;
                }
            }
            if ring >= max_ring {
                break;
            }
            ring += 1;
        }
        // A non-empty index always yields a hit once every cell is scanned.
        self.ids[best.unwrap().1 as usize]
    }

    fn scan_cell(&self, cell: usize, p: RetinalPoint<T>, best: &mut Option<(T, u32)>) {
        for &i in &self.order[self.starts[cell]..self.starts[cell + 1]] {
            let d = p.dist_sq(&self.points[i as usize]);
            let better = match *best {
                None => true,
                Some((bd, bi)) => d < bd || (d == bd && i < bi),
            };
            if better {
                *best = Some((d, i));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_xoshiro::SplitMix64;

    fn bundle(points: &[(f64, f64)]) -> AxonBundle<f64> {
        AxonBundle {
            vertices: points.iter().map(|&(x, y)| RetinalPoint::new(x, y)).collect(),
            arc_um: (0..points.len()).map(|i| i as f64).collect(),
        }
    }

    fn random_bundles(rng: &mut SplitMix64, n: usize) -> Vec<AxonBundle<f64>> {
        (0..n)
            .map(|_| {
                let len = rng.random_range(1..30);
                let mut x = rng.random_range(-3000.0..3000.0);
                let mut y = rng.random_range(-3000.0..3000.0);
                let pts: Vec<(f64, f64)> = (0..len)
                    .map(|_| {
                        x += rng.random_range(-150.0..150.0);
                        y += rng.random_range(-150.0..150.0);
                        (x, y)
                    })
                    .collect();
                bundle(&pts)
            })
            .collect()
    }

    #[test]
    fn exact_hit() {
        let bundles: Vec<_> = (0..5)
            .map(|b| {
                bundle(
                    &(0..10)
                        .map(|v| (v as f64 * 100.0, b as f64 * 1000.0))
                        .collect::<Vec<_>>(),
                )
            })
            .collect();
        let p = bundles[3].vertices[7];
        assert_eq!(assign_soma(p, &bundles).unwrap(), SomaRef::new(3, 7));
        let idx = VertexIndex::new(&bundles, 140.0).unwrap();
        assert_eq!(idx.nearest(p), SomaRef::new(3, 7));
    }

    #[test]
    fn tie_prefers_lower_bundle_then_vertex() {
        let mut bundles: Vec<_> = (0..5)
            .map(|b| bundle(&[(b as f64 * 1e5, 9e5), (b as f64 * 1e5, 9.5e5)]))
            .collect();
        bundles[1] = bundle(&[(0.0, 9e5), (1e5, 9e5), (5e4, 9e5), (1e5, 1e5), (5e4, 9e5), (-10.0, 0.0)]);
        bundles[4] = bundle(&[(2e5, 2e5), (3e5, 2e5), (10.0, 0.0)]);
        let p = RetinalPoint::new(0.0, 0.0);
        assert_eq!(assign_soma(p, &bundles).unwrap(), SomaRef::new(1, 5));
        let idx = VertexIndex::new(&bundles, 140.0).unwrap();
        assert_eq!(idx.nearest(p), SomaRef::new(1, 5));

        // Duplicate vertex inside one bundle: lower vertex index wins.
        let q = RetinalPoint::new(5e4, 9e5);
        assert_eq!(assign_soma(q, &bundles).unwrap(), SomaRef::new(1, 2));
        assert_eq!(idx.nearest(q), SomaRef::new(1, 2));
    }

    #[test]
    fn empty_is_an_error() {
        assert!(assign_soma::<f64>(RetinalPoint::new(0.0, 0.0), &[]).is_err());
        assert!(VertexIndex::<f64>::new(&[], 140.0).is_err());
    }

    #[test]
    fn accelerated_matches_exhaustive_on_random_points() {
        let mut rng = SplitMix64::seed_from_u64(7);
        for trial in 0..20 {
            let bundles = random_bundles(&mut rng, 1 + trial * 2);
            let cell = rng.random_range(30.0..400.0);
            let idx = VertexIndex::new(&bundles, cell).unwrap();
            for _ in 0..200 {
                // Includes queries far outside the vertex bounding box.
                let p = RetinalPoint::new(rng.random_range(-6000.0..6000.0), rng.random_range(-6000.0..6000.0));
                assert_eq!(idx.nearest(p), assign_soma(p, &bundles).unwrap());
            }
        }
    }

    #[test]
    fn integer_lattice_ties_match() {
        // Many exact ties: vertices on a coarse integer lattice, queries on half points.
        let bundles: Vec<_> = (0..6)
            .map(|b| bundle(&(0..8).map(|v| ((v * 100) as f64, (b * 100) as f64)).collect::<Vec<_>>()))
            .collect();
        let idx = VertexIndex::new(&bundles, 100.0).unwrap();
        for i in -4..20 {
            for j in -4..16 {
                let p = RetinalPoint::new(i as f64 * 50.0, j as f64 * 50.0);
                assert_eq!(idx.nearest(p), assign_soma(p, &bundles).unwrap(), "{p:?}");
            }
        }
    }
}
