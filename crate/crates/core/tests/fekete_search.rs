//! Exchange search against exhaustive enumeration, and invariants of the
//! search that are checked by a full scan.

use ppt_core::fekete::{fekete_points, FeketeOptions};
use ppt_core::{log_abs_wvdm, ConvexBody, MonomialBasis, WeightedMesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Maximum of `log|VDM^Q|` over all `d_n`-subsets of the mesh.
fn exhaustive_max(mesh: &WeightedMesh, basis: &MonomialBasis) -> f64 {
    let m = mesh.len();
    let k = basis.d_n;
    let mut idx: Vec<usize> = (0..k).collect();
    let mut best = f64::NEG_INFINITY;
    loop {
        let pts: Vec<Vec<f64>> = idx.iter().map(|&i| mesh.point(i).to_vec()).collect();
        let q: Vec<f64> = idx.iter().map(|&i| mesh.q()[i]).collect();
        best = best.max(log_abs_wvdm(basis, &pts, &q, basis.n).unwrap());
        // next combination in lexicographic order
        let Some(pos) = (0..k).rev().find(|&i| idx[i] < m - k + i) else {
            return best;
        };
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn random_interval_mesh(rng: &mut ChaCha8Rng, m: usize) -> WeightedMesh {
    let mut xs: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
    xs.sort_by(f64::total_cmp);
    WeightedMesh::from_points(1, xs.into_iter().map(|x| vec![x]).collect(), "random").unwrap()
}

fn random_plane_mesh(rng: &mut ChaCha8Rng, m: usize) -> WeightedMesh {
    let pts = (0..m)
        .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
        .collect();
    WeightedMesh::from_points(2, pts, "random2").unwrap()
}

fn exchange_only() -> FeketeOptions {
    FeketeOptions {
        exhaustive_limit: 0,
        ..FeketeOptions::default()
    }
}

fn assert_attains(mesh: &WeightedMesh, basis: &MonomialBasis, opts: &FeketeOptions) {
    let exact = exhaustive_max(mesh, basis);
    let found = fekete_points(mesh, basis, opts).unwrap();
    assert!(
        (found.log_wvdm() - exact).abs() <= 1e-9 * (1.0 + exact.abs()),
        "{}: n={} search {} vs exhaustive {}",
        mesh.label(),
        basis.n,
        found.log_wvdm(),
        exact
    );
}

#[test]
fn attains_exhaustive_maximum_on_chebyshev_mesh() {
    let mesh = WeightedMesh::chebyshev_interval(-1.0, 1.0, 12).unwrap();
    let sigma = ConvexBody::simplex(1);
    for n in 1..=4 {
        assert_attains(&mesh, &sigma.lattice_points(n).unwrap(), &FeketeOptions::default());
        // the exchange alone already reaches it here
        assert_attains(&mesh, &sigma.lattice_points(n).unwrap(), &exchange_only());
    }
}

#[test]
fn attains_exhaustive_maximum_with_weights() {
    let sigma = ConvexBody::simplex(1);
    let base = WeightedMesh::uniform_interval(-1.0, 1.0, 12).unwrap();
    for w in [|x: &[f64]| x[0] * x[0], |x: &[f64]| 0.7 * x[0], |x: &[f64]| (x[0] + 1.0).abs().sqrt()] {
        let mesh = base.with_weight(w).unwrap();
        for n in 1..=4 {
            assert_attains(&mesh, &sigma.lattice_points(n).unwrap(), &exchange_only());
        }
    }
}

#[test]
fn attains_exhaustive_maximum_on_random_meshes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sigma1 = ConvexBody::simplex(1);
    for _ in 0..10 {
        let mesh = random_interval_mesh(&mut rng, 12);
        for n in 1..=4 {
            assert_attains(&mesh, &sigma1.lattice_points(n).unwrap(), &FeketeOptions::default());
        }
    }
    let sigma2 = ConvexBody::simplex(2);
    let square = ConvexBody::unit_cube(2);
    for _ in 0..10 {
        let mesh = random_plane_mesh(&mut rng, 12);
        assert_attains(&mesh, &sigma2.lattice_points(1).unwrap(), &FeketeOptions::default());
        assert_attains(&mesh, &square.lattice_points(1).unwrap(), &FeketeOptions::default());
    }
}

#[test]
fn no_single_swap_improves_the_result() {
    let mesh = WeightedMesh::chebyshev_interval(-1.0, 1.0, 61)
        .unwrap()
        .with_weight(|x| 0.5 * x[0] * x[0])
        .unwrap();
    let basis = ConvexBody::simplex(1).lattice_points(8).unwrap();
    let set = fekete_points(&mesh, &basis, &FeketeOptions::default()).unwrap();
    assert!(set.converged);
    let base = set.log_wvdm();
    let idx = set.indices().to_vec();
    for j in 0..idx.len() {
        for k in (0..mesh.len()).filter(|k| !idx.contains(k)) {
            let mut trial = idx.clone();
            trial[j] = k;
            let pts: Vec<Vec<f64>> = trial.iter().map(|&i| mesh.point(i).to_vec()).collect();
            let q: Vec<f64> = trial.iter().map(|&i| mesh.q()[i]).collect();
            let v = log_abs_wvdm(&basis, &pts, &q, basis.n).unwrap();
            assert!(v <= base + 1e-9 * (1.0 + base.abs()), "swap {j}->{k} gives {v} > {base}");
        }
    }
}

#[test]
fn nonnegative_weight_lowers_delta() {
    let plain = WeightedMesh::chebyshev_interval(-1.0, 1.0, 81).unwrap();
    let heavy = plain.with_weight(|x| (x[0] - 0.2).powi(2)).unwrap();
    let sigma = ConvexBody::simplex(1);
    for n in [2, 5, 9] {
        let basis = sigma.lattice_points(n).unwrap();
        let a = fekete_points(&plain, &basis, &FeketeOptions::default()).unwrap();
        let b = fekete_points(&heavy, &basis, &FeketeOptions::default()).unwrap();
        assert!(b.log_wvdm() <= a.log_wvdm() + 1e-12);
    }
}

#[test]
fn scaling_the_mesh_scales_delta() {
    let sigma = ConvexBody::simplex(1);
    let mesh = WeightedMesh::chebyshev_interval(-1.0, 1.0, 41).unwrap();
    for r in [0.3, 2.5] {
        let scaled = WeightedMesh::chebyshev_interval(-r, r, 41).unwrap();
        for n in [3, 7] {
            let basis = sigma.lattice_points(n).unwrap();
            let a = fekete_points(&mesh, &basis, &FeketeOptions::default()).unwrap();
            let b = fekete_points(&scaled, &basis, &FeketeOptions::default()).unwrap();
            let expected = a.log_wvdm() + basis.l_n as f64 * f64::ln(r);
            assert!((b.log_wvdm() - expected).abs() < 1e-9, "r={r} n={n}");
        }
    }
}

#[test]
fn repeated_search_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mesh = random_plane_mesh(&mut rng, 50);
    let basis = ConvexBody::simplex(2).lattice_points(3).unwrap();
    let a = fekete_points(&mesh, &basis, &FeketeOptions::default()).unwrap();
    let b = fekete_points(&mesh, &basis, &FeketeOptions::default()).unwrap();
    assert_eq!(a, b);
}
