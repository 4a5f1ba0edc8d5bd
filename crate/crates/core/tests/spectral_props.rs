use proptest::prelude::*;

use hfns_core::fields::random_solenoidal;
use hfns_core::spectral::{
    apply_horizontal_filter, apply_horizontal_filter_inverse, leray_project, norms, Grid, SpectralScalarField,
    SpectralVectorField,
};

fn grid() -> Grid {
    Grid::new(8, 1.3).unwrap()
}

/// Real field that is generally not divergence free.
fn rough(g: Grid, seed: u64) -> SpectralVectorField {
    let n = g.point_count();
    let wave = |a: f64| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let x = i as f64 + seed as f64 * 0.37;
                (a * x).sin() + 0.5 * (1.7 * a * x + 0.3).cos()
            })
            .collect()
    };
    let (u, v, w) = (wave(0.013), wave(0.041), wave(0.0029));
    SpectralVectorField::from_physical(g, [&u, &v, &w])
}

fn alpha() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(0.1), Just(1.0), 0.0..2.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn filter_round_trip(seed in any::<u64>(), a in alpha()) {
        let u = rough(grid(), seed);
        let back = apply_horizontal_filter_inverse(&apply_horizontal_filter(&u, a).unwrap(), a).unwrap();
        prop_assert!(u.relative_difference(&back) <= 1e-13);
        if a == 0.0 {
            prop_assert_eq!(apply_horizontal_filter(&u, a).unwrap(), u);
        }
    }

    #[test]
    fn filter_commutes_with_projection_and_derivatives(seed in any::<u64>(), a in alpha(), d in 0usize..3) {
        let u = rough(grid(), seed);
        let pf = leray_project(&apply_horizontal_filter_inverse(&u, a).unwrap());
        let fp = apply_horizontal_filter_inverse(&leray_project(&u), a).unwrap();
        prop_assert!(pf.relative_difference(&fp) <= 1e-13);

        let deriv = |v: &SpectralVectorField| v.map_modes(|m, c| {
            let k = m.wavevector[d];
            c.map(|z| z * num_complex::Complex64::new(0.0, k))
        });
        let df = deriv(&apply_horizontal_filter_inverse(&u, a).unwrap());
        let fd = apply_horizontal_filter_inverse(&deriv(&u), a).unwrap();
        prop_assert!(df.relative_difference(&fd) <= 1e-13);
    }

    #[test]
    fn leray_properties(s1 in any::<u64>(), s2 in any::<u64>()) {
        let g = grid();
        let (u, v) = (rough(g, s1), rough(g, s2));
        let pu = leray_project(&u);
        prop_assert!(leray_project(&pu).relative_difference(&pu) <= 1e-14);
        prop_assert!(pu.relative_divergence() <= 1e-13);

        let lhs = pu.inner(&v).unwrap();
        let rhs = u.inner(&leray_project(&v)).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (norms(&u, 0.0).l2 * norms(&v, 0.0).l2));

        let phi = SpectralScalarField::from_physical(g, &u.to_physical()[0]);
        let grad = phi.gradient();
        prop_assert!(norms(&leray_project(&grad), 0.0).l2 <= 1e-13 * norms(&grad, 0.0).l2);

        let w = random_solenoidal(g, s1, -1.0, 3.0).unwrap();
        prop_assert!(leray_project(&w).relative_difference(&w) <= 1e-14);
    }

    #[test]
    fn parseval_matches_quadrature(seed in any::<u64>()) {
        let g = grid();
        let u = rough(g, seed);
        let phys = u.to_physical();
        let cell = g.volume() / g.point_count() as f64;
        let quad: f64 = phys.iter().flat_map(|c| c.iter()).map(|x| x * x).sum::<f64>() * cell;
        let l2sq = norms(&u, 0.0).l2.powi(2);
        prop_assert!((quad - l2sq).abs() <= 1e-10 * l2sq);
    }

    #[test]
    fn norm_family_relations(seed in any::<u64>(), a in alpha()) {
        let g = grid();
        let u = rough(g, seed);
        let r = norms(&u, a);
        prop_assert!(r.grad * r.grad >= g.lambda1() * r.l2 * r.l2 * (1.0 - 1e-14));
        prop_assert!(r.grad_h <= r.grad * (1.0 + 1e-14));
        let kmax = g.modes().map(|m| m.k_sq()).fold(0.0, f64::max).sqrt();
        prop_assert!(r.grad_h_grad <= kmax * r.grad * (1.0 + 1e-14));
        let vh = r.l2 * r.l2 + a * a * r.grad_h * r.grad_h;
        prop_assert!((r.vh_sq - vh).abs() <= 1e-13 * vh);
    }

    #[test]
    fn physical_fields_are_conjugate_symmetric(seed in any::<u64>()) {
        let u = rough(grid(), seed);
        prop_assert!(u.check_reality().is_ok());
        prop_assert!(leray_project(&u).check_reality().is_ok());
    }
}

/// Physical-space integral of one sampled mode, against the closed form.
#[test]
fn single_cosine_energy() {
    let g = Grid::new(16, 0.5).unwrap();
    let n = g.n();
    let mut v = vec![0.0; g.point_count()];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let [x, y, _] = g.collocation_point([i, j, l]);
                v[(i * n + j) * n + l] = (3.0 * x / 0.5 + y / 0.5).cos();
            }
        }
    }
    let zero = vec![0.0; v.len()];
    let u = SpectralVectorField::from_physical(g, [&v, &zero, &zero]);
    let expect = 0.5 * g.volume();
    assert!((norms(&u, 0.0).l2.powi(2) - expect).abs() < 1e-12 * expect);
    let r = norms(&u, 0.3);
    assert!((r.grad_h.powi(2) - 40.0 * expect).abs() < 1e-11 * expect);
}
