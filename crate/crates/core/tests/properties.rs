use num_complex::Complex64;
use ppt_core::extremal::{extremal_lower, ExtremalOptions};
use ppt_core::fekete::{fekete_points, DeltaEstimate, FeketeOptions};
use ppt_core::functionals::{j_q_estimate, rate_function, SearchOptions, WeightFamily};
use ppt_core::sampler::brute_force_log_z;
use ppt_core::{ConvexBody, GridMeasure, WeightedMesh};
use proptest::prelude::*;

fn body_strategy() -> impl Strategy<Value = ConvexBody> {
    prop_oneof![
        (1usize..=3).prop_map(ConvexBody::simplex),
        (1usize..=3).prop_map(ConvexBody::unit_cube),
        // random lattice polygons containing the origin
        proptest::collection::vec((0u8..4, 0u8..4), 2..5).prop_filter_map("degenerate polygon", |vs| {
            let mut v: Vec<Vec<f64>> = vec![vec![0.0, 0.0]];
            v.extend(vs.into_iter().map(|(a, b)| vec![a as f64, b as f64]));
            ConvexBody::new(2, v).ok().filter(|b| b.volume().map_or(false, |x| x > 0.0))
        }),
    ]
}

fn min_sigma(body: &ConvexBody) -> f64 {
    body.vertices()
        .iter()
        .map(|v| v.iter().sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

fn interval_mesh(xs: &[f64], q: &[f64]) -> WeightedMesh {
    let mut xs = xs.to_vec();
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    let m = xs.len();
    WeightedMesh::new(
        1,
        xs.into_iter().map(|x| vec![x]).collect(),
        q[..m].to_vec(),
        vec![1.0 / m as f64; m],
        "prop",
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn h_p_is_the_support_function_of_log_moduli(
        body in body_strategy(),
        zs in proptest::collection::vec((0.05f64..5.0, 0.0f64..std::f64::consts::TAU), 3),
    ) {
        let d = body.dim();
        let z: Vec<Complex64> = zs[..d].iter().map(|&(r, t)| Complex64::from_polar(r, t)).collect();
        let logs: Vec<f64> = zs[..d].iter().map(|&(r, _)| r.ln()).collect();
        let h = body.h_p(&z).unwrap();
        prop_assert!((h - body.support_value(&logs)).abs() < 1e-12 * (1.0 + h.abs()));
    }

    #[test]
    fn h_p_homogeneity_bounds(
        body in body_strategy(),
        rs in proptest::collection::vec(0.1f64..5.0, 3),
        lambda in 1.01f64..20.0,
    ) {
        let d = body.dim();
        let z: Vec<Complex64> = rs[..d].iter().map(|&r| Complex64::new(r, 0.0)).collect();
        let lz: Vec<Complex64> = z.iter().map(|c| c * lambda).collect();
        let diff = body.h_p(&lz).unwrap() - body.h_p(&z).unwrap();
        let l = lambda.ln();
        prop_assert!(diff >= min_sigma(&body) * l - 1e-12);
        prop_assert!(diff <= body.r_sigma() * l + 1e-12);
    }

    #[test]
    fn lattice_counts_are_monotone_and_f_n_is_exact(body in body_strategy(), n in 1u32..6) {
        let a = body.lattice_points(n).unwrap();
        let b = body.lattice_points(n + 1).unwrap();
        prop_assert!(a.d_n <= b.d_n && a.l_n <= b.l_n);
        let k = body.constants(n.max(2)).unwrap();
        let d = body.dim() as u128;
        for t in &k.f_n_sequence {
            // l_n = f_n · (n d / (d + 1)) · d_n with f_n = num/den
            prop_assert_eq!(
                t.l_n as u128 * (d + 1) * t.f_n_den as u128,
                t.f_n_num as u128 * t.n as u128 * d * t.d_n as u128
            );
        }
    }

    #[test]
    fn partition_root_is_below_delta(
        xs in proptest::collection::vec(-2.0f64..2.0, 6),
        q in proptest::collection::vec(-0.5f64..1.0, 6),
        n in 1u32..=2,
    ) {
        let mesh = interval_mesh(&xs, &q);
        let basis = ConvexBody::simplex(1).lattice_points(n).unwrap();
        prop_assume!(mesh.len() > basis.d_n);
        let log_z = brute_force_log_z(&mesh, &basis, 1_000_000).unwrap();
        let e = DeltaEstimate::from_fekete(fekete_points(&mesh, &basis, &FeketeOptions::default()).unwrap());
        let root = log_z / (2.0 * basis.l_n as f64);
        prop_assert!(root.exp() <= e.delta_hat + 1e-9, "Z^(1/2l) = {} > {}", root.exp(), e.delta_hat);
    }

    #[test]
    fn weight_translation_of_delta(c in -1.0f64..1.0, n in 1u32..12) {
        let mesh = WeightedMesh::chebyshev_interval(-1.0, 1.0, 61).unwrap().with_weight(|x| 0.3 * x[0]).unwrap();
        let shifted = mesh.with_q(mesh.q().iter().map(|q| q + c).collect()).unwrap();
        let basis = ConvexBody::simplex(1).lattice_points(n).unwrap();
        let a = DeltaEstimate::from_fekete(fekete_points(&mesh, &basis, &FeketeOptions::default()).unwrap());
        let b = DeltaEstimate::from_fekete(fekete_points(&shifted, &basis, &FeketeOptions::default()).unwrap());
        let ratio = n as f64 * basis.d_n as f64 / basis.l_n as f64;
        prop_assert!((b.log_delta() - (a.log_delta() - c * ratio)).abs() < 1e-10);
    }

    #[test]
    fn extremal_bound_is_admissible_on_the_mesh(
        w in proptest::collection::vec(-1.0f64..1.0, 3),
        n in 2u32..9,
    ) {
        let mesh = WeightedMesh::chebyshev_interval(-1.0, 1.0, 41)
            .unwrap()
            .with_weight(|x| w[0] * x[0] + w[1] * x[0] * x[0] + w[2].abs() * x[0].powi(4))
            .unwrap();
        let basis = ConvexBody::simplex(1).lattice_points(n).unwrap();
        let set = fekete_points(&mesh, &basis, &FeketeOptions::default()).unwrap();
        for (x, q) in mesh.points().iter().zip(mesh.q()).step_by(3) {
            let u = extremal_lower(x, &set.config, &mesh, &ExtremalOptions::default()).unwrap();
            prop_assert!(u.value <= q + 1e-9, "u_n({}) = {} > Q = {}", x[0], u.value, q);
            prop_assert!(u.lagrange_value <= u.value);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn rate_lower_bound_is_nonnegative_and_j_identities_hold(
        masses in proptest::collection::vec(0.0f64..1.0, 21),
        w in -0.5f64..0.5,
    ) {
        prop_assume!(masses.iter().sum::<f64>() > 0.1);
        let mesh = WeightedMesh::chebyshev_interval(-1.0, 1.0, 21)
            .unwrap()
            .with_weight(|x| w * x[0] + 0.25 * x[0] * x[0])
            .unwrap();
        let body = ConvexBody::simplex(1);
        let consts = body.constants(10).unwrap();
        let basis = body.lattice_points(4).unwrap();
        let mu = GridMeasure::from_mesh_masses(&mesh, &masses).unwrap().normalized(consts.gamma_d);
        let family = WeightFamily::parse("q,cheb:2,box:2", &mesh).unwrap();
        let opts = SearchOptions { sweeps: 2, ..SearchOptions::default() };

        let r = rate_function(&mu, &mesh, &basis, &family, &consts, &opts).unwrap();
        prop_assert!(r.i_lower.value >= 0.0);
        prop_assert!(r.log_jq.value <= r.log_delta_q.value + 1e-9);

        let (jq, inf) = j_q_estimate(&mu, &mesh, &basis, &family, &consts, &opts).unwrap();
        let iq = mu.integrate_mesh_values(&mesh, mesh.q()).unwrap();
        prop_assert!((inf.value - jq.value - consts.b_d * iq).abs() < 1e-10);
    }
}

#[test]
fn simplex_normalization() {
    for d in 1..=3 {
        let sigma = ConvexBody::simplex(d);
        assert!((sigma.gamma_d().unwrap() - 1.0).abs() < 1e-12);
        let k = sigma.constants(6).unwrap();
        assert!(k.f_n_sequence.iter().all(|t| t.f_n_num == t.f_n_den));
    }
}
