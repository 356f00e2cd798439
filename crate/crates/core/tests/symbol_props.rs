use nehari::symbol::{
    parse_sym, random_rational, rational_to_laurent, rational_to_laurent_tol, render_sym,
    SymbolBody,
};
use nehari::{Complex64, Grid64, SymbolSpec, C};
use proptest::prelude::*;

fn text_line() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9_.-]{1,6}( [a-zA-Z0-9_.:-]{1,6}){0,3}"
}

fn value() -> impl Strategy<Value = f64> {
    prop_oneof![
        -10.0..10.0f64,
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        Just(0.0),
        Just(-0.0),
    ]
}

fn laurent_body() -> impl Strategy<Value = SymbolBody<f64>> {
    prop::collection::btree_map(-50i64..50, (value(), value()), 0..8).prop_flat_map(|m| {
        let pairs: Vec<(i64, Complex64)> =
            m.into_iter().map(|(n, (a, b))| (n, C::new(a, b))).collect();
        Just(pairs.clone())
            .prop_shuffle()
            .prop_map(SymbolBody::Laurent)
    })
}

fn rational_body() -> impl Strategy<Value = SymbolBody<f64>> {
    (
        prop::collection::vec((value(), value()), 1..5),
        (0.0..0.9f64, 0.0..6.2f64),
    )
        .prop_map(|(num, (r, t))| SymbolBody::Rational {
            num: num.into_iter().map(|(a, b)| C::new(a, b)).collect(),
            den: vec![C::new(1.0, 0.0), -Complex64::from_polar(r, t)],
        })
}

fn spec() -> impl Strategy<Value = SymbolSpec<f64>> {
    (
        prop::option::of(text_line()),
        prop::collection::vec(text_line(), 0..3),
        prop_oneof![laurent_body(), rational_body()],
    )
        .prop_map(|(name, comments, body)| SymbolSpec {
            name,
            comments,
            body,
        })
}

proptest! {
    #[test]
    fn render_then_parse_is_identity(s in spec()) {
        let text = render_sym(&s);
        let back: SymbolSpec<f64> = parse_sym(&text).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn single_precision_round_trip(a in any::<f32>().prop_filter("finite", |x| x.is_finite()), b in -1.0f32..1.0) {
        let s = SymbolSpec {
            name: None,
            comments: vec![],
            body: SymbolBody::Laurent(vec![(3, C::new(a, b))]),
        };
        let back: SymbolSpec<f32> = parse_sym(&render_sym(&s)).unwrap();
        prop_assert_eq!(back, s);
    }
}

fn eval_poly(p: &[Complex64], v: Complex64) -> Complex64 {
    p.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * v + c)
}

#[test]
fn truncation_error_within_bound() {
    for seed in 0..10 {
        let (num, den) = random_rational::<f64>(seed, 2, 3, 0.9);
        for n_tail in [5usize, 20, 60] {
            let (g, bound) = rational_to_laurent(&num, &den, n_tail).unwrap();
            let size = 1024;
            let direct = Grid64::from_fn(size, |w: f64| {
                let v = Complex64::from_polar(1.0, -w);
                eval_poly(&num, v) / eval_poly(&den, v)
            })
            .unwrap();
            let err = direct.sup_distance(&Grid64::from_series(&g, size).unwrap());
            assert!(
                err <= bound * (1.0 + 1e-9) + 1e-13,
                "seed {seed} N {n_tail}: {err} > {bound}"
            );
        }
    }
}

#[test]
fn tolerance_driven_truncation() {
    for seed in 20..25 {
        let (num, den) = random_rational::<f64>(seed, 1, 2, 0.95);
        let (_, bound) = rational_to_laurent_tol(&num, &den, 1e-9).unwrap();
        assert!(bound < 1e-9);
    }
}
