use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use marx_core::analysis::select_regular;
use marx_core::circuit::{build_a0, simulate};
use marx_core::numkernel::eig;
use marx_core::polysys::{system_f, DesignSpec};
use marx_core::solver::{enumerate, EnumerateOptions};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn spectrum_survives_diagonal_similarity(
        entries in proptest::collection::vec(-5.0f64..5.0, 36),
        scale in proptest::collection::vec(0.2f64..5.0, 6),
    ) {
        let a = DMatrix::from_fn(6, 6, |i, j| entries[6 * i.min(j) + i.max(j)]);
        let d = DMatrix::from_diagonal(&DVector::from_vec(scale.clone()));
        let dinv = DMatrix::from_diagonal(&DVector::from_iterator(6, scale.iter().map(|s| 1.0 / s)));
        let plain = eig(&a).unwrap().sorted_real();
        let similar = eig(&(&d * &a * &dinv)).unwrap().sorted_real();
        for (x, y) in plain.iter().zip(&similar) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn any_positive_design_conserves_energy(f in proptest::collection::vec(0.5f64..20.0, 1..6)) {
        let spec = DesignSpec::standard(f.len()).unwrap();
        let trace = simulate(&build_a0(&spec, &f).unwrap(), 1.0, 40).unwrap();
        prop_assert!(trace.energy_drift() <= 1e-9);
    }
}

#[test]
fn enumeration_is_deterministic_and_order_free() {
    let opts = EnumerateOptions::default();
    let a = enumerate(&DesignSpec::standard(4).unwrap(), &opts).unwrap();
    let b = enumerate(&DesignSpec::standard(4).unwrap(), &opts).unwrap();
    assert_eq!(a.solutions, b.solutions);

    let shuffled = DesignSpec::new(vec![6, 2, 8, 4], 1.0, 1.0).unwrap();
    let c = enumerate(&shuffled, &EnumerateOptions { seed: 11, ..opts }).unwrap();
    assert_eq!(a.solutions.len(), c.solutions.len());
    for (x, y) in a.solutions.iter().zip(&c.solutions) {
        for (p, q) in x.scaled.iter().zip(&y.scaled) {
            assert!((p - q).abs() < 1e-9);
        }
    }
}

#[test]
fn k_roots_solve_the_f_system() {
    for n in 2..=5 {
        let spec = DesignSpec::standard(n).unwrap();
        let fsys = system_f(&spec).unwrap();
        for sol in enumerate(&spec, &EnumerateOptions::default()).unwrap().solutions {
            let r = fsys.evaluate_f64(&sol.f).unwrap();
            for (i, v) in r.iter().enumerate() {
                // p_i is a sum of products of i entries of f, so scale by |f|^i
                let scale = sol.f.iter().cloned().fold(1.0, f64::max).powi(i as i32 + 1);
                assert!(v.abs() <= 1e-9 * scale, "n={n} p{} = {v}", i + 1);
            }
        }
    }
}

#[test]
fn regular_design_is_best_conditioned() {
    for n in 2..=6 {
        let set = enumerate(&DesignSpec::standard(n).unwrap(), &EnumerateOptions::default()).unwrap();
        let best = set.solutions.iter().map(|s| s.condition).fold(f64::INFINITY, f64::min);
        let regular = select_regular(&set).unwrap();
        assert_eq!(regular.len(), 1);
        assert!((regular[0].condition - best).abs() < 1e-12, "n={n}");
    }
}
