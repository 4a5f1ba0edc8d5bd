use hfns_web::{diverging_rgba, energy_envelope, filter_response, filtered_plane, Flow};

#[test]
fn flow_advances_and_renders() {
    let mut flow = Flow::new(8, 0.05, 0.1, 0.5, 0.01).unwrap();
    let e0 = flow.energy();
    flow.advance(10).unwrap();
    assert!((flow.time() - 0.1).abs() < 1e-12);
    assert!(flow.energy().is_finite() && flow.energy() != e0);
    let rgba = diverging_rgba(&flow.vorticity_plane());
    assert_eq!(rgba.len(), 4 * 8 * 8);
    assert!(rgba.chunks(4).all(|p| p[3] == 255));
}

#[test]
fn taylor_green_vorticity_plane() {
    // ω₃ = 2 sin x₁ sin x₂ at t = 0.
    let flow = Flow::new(8, 0.05, 0.1, 0.0, 0.01).unwrap();
    let w = flow.vorticity_plane();
    let h = std::f64::consts::TAU / 8.0;
    for i in 0..8 {
        for j in 0..8 {
            let expect = 2.0 * (i as f64 * h).sin() * (j as f64 * h).sin();
            assert!((w[i * 8 + j] - expect).abs() < 1e-12);
        }
    }
}

#[test]
fn energy_stays_under_envelope() {
    let rows = energy_envelope(8, 0.1, 0.1, 0.5, 2.0).unwrap();
    assert_eq!(rows.len(), 41);
    for [_, e, env, k1] in rows {
        assert!(e <= env * (1.0 + 1e-8));
        assert!(env <= k1 * (1.0 + 1e-12));
    }
}

#[test]
fn filter_smooths() {
    let rough = filtered_plane(16, 0.0, 3).unwrap();
    let smooth = filtered_plane(16, 1.0, 3).unwrap();
    let var = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    assert!(var(&smooth) < var(&rough));
    assert_eq!(filter_response(0.5, 2), vec![1.0, 0.8, 0.5]);
}

#[test]
fn colormap_is_symmetric() {
    let px = diverging_rgba(&[-1.0, 0.0, 1.0]);
    assert_eq!(&px[0..4], &[0, 0, 255, 255]);
    assert_eq!(&px[4..8], &[255, 255, 255, 255]);
    assert_eq!(&px[8..12], &[255, 0, 0, 255]);
    assert_eq!(diverging_rgba(&[0.0]), vec![255, 255, 255, 255]);
}
