use proptest::prelude::*;

use hfns_core::fields::random_solenoidal;
use hfns_core::io::{load_snapshot, load_trajectory_file, parse_config, store_snapshot, IoError, Snapshot, TrajectoryWriter};
use hfns_core::spectral::Grid;

fn snapshot(n: usize, scale: f64, seed: u64, alpha: f64, nu: f64, time: f64) -> Snapshot {
    let g = Grid::new(n, scale).unwrap();
    Snapshot {
        field: random_solenoidal(g, seed, -1.0, n as f64).unwrap(),
        alpha,
        nu,
        time,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn snapshots_round_trip_bitwise(
        n in prop_oneof![Just(4usize), Just(6), Just(8)],
        scale in 0.25..4.0f64,
        seed in any::<u64>(),
        alpha in 0.0..2.0f64,
        nu in 1e-3..1.0f64,
        time in 0.0..100.0f64,
    ) {
        let s = snapshot(n, scale, seed, alpha, nu, time);
        let mut bytes = Vec::new();
        s.write_to(&mut bytes).unwrap();
        let back = Snapshot::read_from(bytes.as_slice()).unwrap().unwrap();
        prop_assert_eq!(back.field.coeffs(), s.field.coeffs());
        prop_assert_eq!(back.field.grid(), s.field.grid());
        prop_assert_eq!(back.alpha.to_bits(), alpha.to_bits());
        prop_assert_eq!(back.nu.to_bits(), nu.to_bits());
        prop_assert_eq!(back.time.to_bits(), time.to_bits());
    }

    #[test]
    fn truncated_snapshots_are_rejected(cut in 1usize..200) {
        let s = snapshot(4, 1.0, 1, 0.1, 0.1, 0.0);
        let mut bytes = Vec::new();
        s.write_to(&mut bytes).unwrap();
        let cut = cut.min(bytes.len() - 1);
        bytes.truncate(bytes.len() - cut);
        prop_assert!(matches!(Snapshot::read_from(bytes.as_slice()), Err(IoError::ShortRead)));
    }

    #[test]
    fn parsed_configs_have_valid_parameters(
        n in 2usize..20,
        nu in -1.0..1.0f64,
        dt_exp in -4i32..0,
        ratio in 0usize..4,
        steps in 0usize..5,
    ) {
        let dt = 10f64.powi(dt_exp);
        let text = format!(
            "[sim]\nn = {n}\nnu = {nu}\ndt = {dt}\nsample_dt = {}\nT = {}\n",
            dt * ratio as f64,
            dt * (ratio * steps) as f64
        );
        if let Ok(cfg) = parse_config(&text) {
            prop_assert!(cfg.sim.validate().is_ok());
        }
    }
}

#[test]
fn trajectory_files_hold_snapshots_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.hfns");
    let mut w = TrajectoryWriter::create(&path).unwrap();
    let snaps: Vec<Snapshot> = (0..5).map(|j| snapshot(6, 1.0, j, 0.2, 0.1, j as f64 * 0.5)).collect();
    for s in &snaps {
        w.append(s).unwrap();
    }
    w.finish().unwrap();
    let back = load_trajectory_file(&path).unwrap();
    assert_eq!(back, snaps);

    let single = dir.path().join("one.hfns");
    store_snapshot(&snaps[2], &single).unwrap();
    assert_eq!(load_snapshot(&single).unwrap(), snaps[2]);
    assert!(matches!(load_snapshot(&path), Err(IoError::DimensionMismatch(_))));
}
