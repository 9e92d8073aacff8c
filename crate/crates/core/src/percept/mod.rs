//! Percept prediction: the axon-map engine, its reference oracle, the
//! radial-only scoreboard model and rendering.

mod engine;
mod frame;
mod kernel;
mod reference;
mod render;

pub use engine::{compute_percept_axon, AxonPerceptModel, AXONAL_CUTOFF, DEFAULT_PRUNE_SIGMA};
pub use frame::{DecayParams, PerceptFrame};
pub use kernel::{DecayKernel, Exponential, Gaussian};
pub use reference::{
    compute_percept_reference, compute_percept_reference_with, compute_percept_scoreboard, scoreboard_at,
};
pub use render::{quantize_unit, raster_to_gray, render_percept, Normalization};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axon_map::{build_axon_map, AxonBundle, AxonMap, SomaRef, TrajectoryParams};
    use crate::geometry::{RetinalPoint, RetinalRect};
    use crate::implant::{build_grid, ElectrodeGrid, Stimulus};
    use rand::{Rng, SeedableRng};
    use rand_xoshiro::SplitMix64;

    struct Setup {
        grid: ElectrodeGrid<f64>,
        map: AxonMap<f64>,
        decay: DecayParams<f64>,
    }

    fn random_setup(rng: &mut SplitMix64) -> Setup {
        let decay = if rng.random_bool(0.5) {
            DecayParams::preset_a()
        } else {
            DecayParams::preset_b()
        };
        let side = rng.random_range(1..=3);
        let grid = build_grid(
            side,
            rng.random_range(1..=3),
            rng.random_range(200.0..600.0),
            RetinalPoint::new(rng.random_range(-1500.0..1500.0), rng.random_range(-1500.0..1500.0)),
        )
        .unwrap();
        let params = TrajectoryParams {
            n_bundles: rng.random_range(4..=50),
            ..Default::default()
        };
        let window = grid.window(3.0 * decay.rho_um).unwrap();
        let dims = (rng.random_range(1..=32), rng.random_range(1..=32));
        let map = build_axon_map(window, dims, &params).unwrap();
        Setup { grid, map, decay }
    }

    fn random_stim(rng: &mut SplitMix64, n: usize) -> Stimulus<f64> {
        Stimulus::new((0..n).map(|_| rng.random_range(0.0..=1.0)).collect()).unwrap()
    }

    fn max_abs_diff(a: &PerceptFrame<f64>, b: &PerceptFrame<f64>) -> f64 {
        a.intensities()
            .data()
            .iter()
            .zip(b.intensities().data())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn zero_stimulus_zero_percept() {
        let mut rng = SplitMix64::seed_from_u64(1);
        let s = random_setup(&mut rng);
        let stim = Stimulus::zeros(s.grid.len());
        let fast = compute_percept_axon(&stim, &s.grid, &s.map, s.decay, 6.0).unwrap();
        let slow = compute_percept_reference(&stim, &s.grid, &s.map, s.decay).unwrap();
        for f in [fast, slow] {
            assert_eq!(f.raw_max(), 0.0);
            assert!(f.intensities().data().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn pruned_matches_reference() {
        let mut rng = SplitMix64::seed_from_u64(2);
        for _ in 0..40 {
            let s = random_setup(&mut rng);
            let stim = random_stim(&mut rng, s.grid.len());
            let fast = compute_percept_axon(&stim, &s.grid, &s.map, s.decay, 6.0).unwrap();
            let slow = compute_percept_reference(&stim, &s.grid, &s.map, s.decay).unwrap();
            assert!(max_abs_diff(&fast, &slow) <= 1e-4);
        }
    }

    #[test]
    fn exponential_kernel_oracle() {
        let mut rng = SplitMix64::seed_from_u64(3);
        for _ in 0..10 {
            let s = random_setup(&mut rng);
            let stim = random_stim(&mut rng, s.grid.len());
            // exp(−d/ρ) needs a wider prune radius for the same tail bound.
            let model = AxonPerceptModel::with_kernel(Exponential, &s.grid, &s.map, s.decay, 25.0).unwrap();
            let fast = model.evaluate(&stim).unwrap();
            let slow = compute_percept_reference_with(&Exponential, &stim, &s.grid, &s.map, s.decay).unwrap();
            assert!(max_abs_diff(&fast, &slow) <= 1e-4);
        }
    }

    #[test]
    fn tiny_lambda_is_soma_snapped_scoreboard() {
        let mut rng = SplitMix64::seed_from_u64(4);
        for _ in 0..10 {
            let s = random_setup(&mut rng);
            let stim = random_stim(&mut rng, s.grid.len());
            let decay = DecayParams::new(s.decay.rho_um, 1e-3).unwrap();
            let f = compute_percept_axon(&stim, &s.grid, &s.map, decay, 6.0).unwrap();
            for (v, soma) in f.intensities().data().iter().zip(s.map.soma_of_pixel()) {
                let pos = s.map.bundles()[soma.bundle as usize].vertices[soma.vertex as usize];
                let sb = scoreboard_at(&stim, &s.grid, pos, s.decay.rho_um);
                assert!((v - sb).abs() <= 1e-6, "{v} vs {sb}");
            }
        }
    }

    #[test]
    fn reference_single_vertex_identity() {
        let grid = build_grid(1, 1, 400.0, RetinalPoint::new(100.0, 200.0)).unwrap();
        let bundle = AxonBundle {
            vertices: vec![RetinalPoint::new(100.0, 200.0), RetinalPoint::new(5000.0, 5000.0)],
            arc_um: vec![0.0, 6800.0],
        };
        let window = RetinalRect::centered(RetinalPoint::new(100.0, 200.0), 10.0, 10.0).unwrap();
        let map = AxonMap::from_parts(
            TrajectoryParams::default(),
            vec![bundle],
            window,
            (1, 1),
            vec![SomaRef::new(0, 0)],
        )
        .unwrap();
        let stim = Stimulus::new(vec![0.8]).unwrap();
        let f = compute_percept_reference(&stim, &grid, &map, DecayParams::preset_a()).unwrap();
        assert_eq!(f.intensities().data(), &[0.8]);
        let g = compute_percept_axon(&stim, &grid, &map, DecayParams::preset_a(), 6.0).unwrap();
        assert_eq!(g.intensities().data(), &[0.8]);
    }

    #[test]
    fn reference_halving() {
        let mut rng = SplitMix64::seed_from_u64(5);
        let s = random_setup(&mut rng);
        let stim = random_stim(&mut rng, s.grid.len());
        let half = Stimulus::new(stim.amplitudes().iter().map(|a| a * 0.5).collect()).unwrap();
        let a = compute_percept_reference(&stim, &s.grid, &s.map, s.decay).unwrap();
        let b = compute_percept_reference(&half, &s.grid, &s.map, s.decay).unwrap();
        for (x, y) in a.intensities().data().iter().zip(b.intensities().data()) {
            assert_eq!(x * 0.5, *y);
        }
    }

    #[test]
    fn scoreboard_analytics() {
        let grid = build_grid(1, 2, 500.0, RetinalPoint::new(0.0, 0.0)).unwrap();
        let rho = 150.0;
        let single = Stimulus::new(vec![0.7, 0.0]).unwrap();
        let e = grid.positions()[0];
        assert_eq!(scoreboard_at(&single, &grid, e, rho), 0.7);
        let r = rho * (2.0 * 2f64.ln()).sqrt();
        let p = RetinalPoint::new(e.x_um + r * 0.6, e.y_um + r * 0.8);
        assert!((scoreboard_at(&single, &grid, p, rho) - 0.35).abs() <= 1e-9);

        let other = Stimulus::new(vec![0.0, 0.4]).unwrap();
        let both = Stimulus::new(vec![0.7, 0.4]).unwrap();
        let w = RetinalRect::new(-1000.0, 1000.0, -600.0, 600.0).unwrap();
        let fa = compute_percept_scoreboard(&single, &grid, w, (9, 11), rho).unwrap();
        let fb = compute_percept_scoreboard(&other, &grid, w, (9, 11), rho).unwrap();
        let fab = compute_percept_scoreboard(&both, &grid, w, (9, 11), rho).unwrap();
        for ((a, b), ab) in fa
            .intensities()
            .data()
            .iter()
            .zip(fb.intensities().data())
            .zip(fab.intensities().data())
        {
            assert!((a + b - ab).abs() <= 1e-15);
        }
        assert!(compute_percept_scoreboard(&single, &grid, w, (9, 11), 0.0).is_err());
    }

    #[test]
    fn dimension_and_param_errors() {
        let mut rng = SplitMix64::seed_from_u64(6);
        let s = random_setup(&mut rng);
        let wrong = Stimulus::zeros(s.grid.len() + 1);
        assert!(compute_percept_axon(&wrong, &s.grid, &s.map, s.decay, 6.0).is_err());
        assert!(compute_percept_reference(&wrong, &s.grid, &s.map, s.decay).is_err());
        let ok = Stimulus::zeros(s.grid.len());
        let bad = DecayParams {
            rho_um: -1.0,
            lambda_um: 10.0,
        };
        assert!(compute_percept_axon(&ok, &s.grid, &s.map, bad, 6.0).is_err());
        assert!(compute_percept_axon(&ok, &s.grid, &s.map, s.decay, 0.0).is_err());
    }

    #[test]
    fn f32_engine_tracks_f64() {
        let grid64 = build_grid(3, 3, 400.0, RetinalPoint::new(0.0, 0.0)).unwrap();
        let grid32 = build_grid(3, 3, 400.0f32, RetinalPoint::new(0.0, 0.0)).unwrap();
        let params = TrajectoryParams {
            n_bundles: 40,
            ..Default::default()
        };
        let m64 = build_axon_map(grid64.window(450.0).unwrap(), (16, 16), &params).unwrap();
        let m32 = build_axon_map(grid32.window(450.0).unwrap(), (16, 16), &params).unwrap();
        let amps = [0.1, 0.9, 0.3, 0.0, 1.0, 0.5, 0.2, 0.7, 0.4];
        let s64 = Stimulus::new(amps.to_vec()).unwrap();
        let s32 = Stimulus::new(amps.iter().map(|&a| a as f32).collect()).unwrap();
        let f64_ = compute_percept_axon(&s64, &grid64, &m64, DecayParams::preset_a(), 6.0).unwrap();
        let f32_ = compute_percept_axon(&s32, &grid32, &m32, DecayParams::preset_a(), 6.0).unwrap();
        for (a, b) in f64_.intensities().data().iter().zip(f32_.intensities().data()) {
            assert!((a - *b as f64).abs() < 1e-3, "{a} vs {b}");
        }
    }
}
