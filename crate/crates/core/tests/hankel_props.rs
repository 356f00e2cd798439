use nalgebra::DMatrix;
use nehari::grid::sup_with_refinement;
use nehari::hankel::{hankel_norm, series_from_basis};
use nehari::{Complex64, Grid64, Hankel64, PowerIteration, Series64};
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn symbol() -> impl Strategy<Value = Series64> {
    (-8i64..=2, prop::collection::vec(coeff(), 1..12)).prop_map(|(lo, c)| Series64::new(lo, c))
}

fn supported(lo: i64, hi: i64) -> impl Strategy<Value = Series64> {
    prop::collection::vec(coeff(), (hi - lo + 1) as usize).prop_map(move |c| Series64::new(lo, c))
}

/// Singular value oracle from a dense SVD.
fn svd_norm(h: &Hankel64) -> f64 {
    let n = h.order();
    let m = DMatrix::from_fn(n, n, |i, j| h.entry(i, j));
    m.singular_values().max()
}

proptest! {
    #[test]
    fn entries_match_composed_operators(g in symbol()) {
        let n = 10;
        let h = Hankel64::build(&g, n).unwrap();
        for k in 0..n {
            // Column k is P_H2(g R e_k) with e_k = z^-k.
            let ek = Series64::monomial(-(k as i64), Complex64::new(1.0, 0.0));
            let col = g.multiply(&ek.reverse()).project_h2();
            for m in 0..n {
                prop_assert_eq!(h.entry(m, k), col.coeff(-(m as i64)));
            }
        }
    }

    #[test]
    fn anticausal_perturbation_is_invisible(g in symbol(), f in supported(1, 6)) {
        let a = Hankel64::build(&g, 16).unwrap();
        let b = Hankel64::build(&(&g + &f), 16).unwrap();
        prop_assert_eq!(a.entries(), b.entries());
    }

    #[test]
    fn bilinear_identity(g in symbol(), f1 in supported(-7, 0), f2 in supported(-7, 0)) {
        let h = Hankel64::build(&g, 8).unwrap();
        let lhs = h.apply_series(&f1).inner_product(&f2);
        let size = 128;
        let f1m = Grid64::from_series(&f1, size).unwrap().mirrored();
        let gg = Grid64::from_series(&g, size).unwrap();
        let f2g = Grid64::from_series(&f2, size).unwrap().conj();
        let rhs = (&(&f1m * &gg) * &f2g).mean();
        prop_assert!((lhs - rhs).norm() <= 1e-8);
    }

    #[test]
    fn norm_is_monotone_and_bounded(g in symbol()) {
        let power = PowerIteration::default();
        let mut last = 0.0;
        for n in [2, 4, 8, 16] {
            let s = hankel_norm(&g, n, &power).unwrap().sigma;
            prop_assert!(s >= last - 1e-10 * s.max(1.0));
            last = s;
        }
        let (sup, delta) = sup_with_refinement(&g, 256).unwrap();
        prop_assert!(last <= sup + delta + 1e-10);
    }

    #[test]
    fn power_iteration_matches_svd(g in symbol()) {
        let h = Hankel64::build(&g, 12).unwrap();
        let s = nehari::hankel::matrix_norm(&h, &PowerIteration::default()).unwrap().sigma;
        let oracle = svd_norm(&h);
        prop_assert!((s - oracle).abs() <= 1e-9 * oracle.max(1.0));
    }

    #[test]
    fn basis_round_trip(f in supported(-7, 0)) {
        let v = nehari::hankel::basis_from_series(&f, 8);
        prop_assert_eq!(series_from_basis(&v), f);
    }
}

#[test]
fn hilbert_sections_increase_below_pi() {
    let power = PowerIteration::default();
    let mut last = 0.0;
    for n in [4usize, 16, 64, 256, 1024] {
        let g = Series64::from_pairs(
            (0..n as i64).map(|k| (-k, Complex64::new(1.0 / (k as f64 + 1.0), 0.0))),
        );
        let est = hankel_norm(&g, n, &power).unwrap();
        assert!(est.converged);
        if n <= 64 {
            let oracle = svd_norm(&Hankel64::build(&g, n).unwrap());
            assert!((est.sigma - oracle).abs() < 1e-9, "N={n}");
        }
        assert!(
            est.sigma > last && est.sigma < std::f64::consts::PI,
            "N={n}"
        );
        last = est.sigma;
    }
}

#[test]
fn golden_ratio_matches_closed_form() {
    // [[1,1],[1,0]] has eigenvalues (1 +- sqrt 5)/2.
    let g = Series64::from_real(-1, &[1.0, 1.0]);
    let s = hankel_norm(&g, 32, &PowerIteration::default())
        .unwrap()
        .sigma;
    assert!((s - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
}
