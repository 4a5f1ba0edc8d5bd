use proptest::prelude::*;

use hfns_core::fields::{random_solenoidal, single_mode};
use hfns_core::model::{nonlinear_term, simulate, Dealias, Forcing, ModelError, SimParams, DIVERGENCE_TOL};
use hfns_core::spectral::{apply_horizontal_filter, norms, Grid, SpectralError};

fn params(alpha: f64, nu: f64) -> SimParams {
    SimParams {
        nu,
        alpha,
        period_scale: 1.0,
        n: 8,
        dt: 5e-3,
        dealias: Dealias::TwoThirds,
        final_time: 0.5,
        sample_dt: 2.5e-2,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn cancellation_with_filtered_state(seed in any::<u64>(), alpha in 0.0..1.5f64) {
        let p = params(alpha, 0.1);
        let w = random_solenoidal(p.grid(), seed, -1.0, 3.0).unwrap();
        let nl = nonlinear_term(&w, &p);
        let aw = apply_horizontal_filter(&w, alpha).unwrap();
        let scale = norms(&nl, 0.0).l2 * norms(&aw, 0.0).l2;
        prop_assert!(nl.inner(&aw).unwrap().abs() <= 1e-11 * scale);
    }

    #[test]
    fn unforced_runs_dissipate_and_stay_solenoidal(seed in any::<u64>(), alpha in 0.0..1.0f64) {
        let p = params(alpha, 0.2);
        let g = p.grid();
        let w0 = random_solenoidal(g, seed, -2.0, 3.0).unwrap();
        let w0 = w0.scaled(1.0 / norms(&w0, 0.0).l2);
        let traj = simulate(&w0, &Forcing::zero(g), &p).unwrap();
        let vh: Vec<f64> = traj.norms().map(|n| n.vh_sq).collect();
        for pair in vh.windows(2) {
            prop_assert!(pair[1] <= pair[0] * (1.0 + 1e-12));
        }
        for w in traj.states().unwrap() {
            prop_assert!(w.relative_divergence() <= DIVERGENCE_TOL);
            prop_assert!(w.check_reality().is_ok());
        }
        prop_assert!(traj.norm_cache_consistent());
    }

    #[test]
    fn forced_runs_are_bitwise_reproducible(seed in any::<u64>()) {
        let p = params(0.2, 0.1);
        let g = p.grid();
        let f = Forcing::new(single_mode(g, [1, 2, 0], 0.7, [2.0, -1.0, 0.0]).unwrap()).unwrap();
        let w0 = random_solenoidal(g, seed, -1.0, 3.0).unwrap();
        let a = simulate(&w0, &f, &p).unwrap();
        let b = simulate(&w0, &f, &p).unwrap();
        prop_assert_eq!(a.states(), b.states());
    }
}

#[test]
fn single_mode_decays_exactly() {
    let p = params(0.3, 0.25);
    let g = p.grid();
    let w0 = single_mode(g, [0, 1, 2], 1.0, [1.0, 0.0, 0.0]).unwrap();
    let traj = simulate(&w0, &Forcing::zero(g), &p).unwrap();
    let k2 = 5.0;
    for j in 0..traj.len() {
        let t = traj.time(j);
        let expect = w0.scaled((-p.nu * k2 * t).exp());
        assert!(traj.state(j).unwrap().relative_difference(&expect) < 1e-13);
    }
}

#[test]
fn forcing_on_the_vertical_column_is_rejected() {
    let g = Grid::new(8, 1.0).unwrap();
    let f = single_mode(g, [0, 0, 1], 1.0, [0.0, 1.0, 0.0]).unwrap();
    assert!(matches!(
        Forcing::new(f),
        Err(ModelError::Spectral(SpectralError::HorizontalMeanObstruction { k: [0, 0, _] }))
    ));
}
