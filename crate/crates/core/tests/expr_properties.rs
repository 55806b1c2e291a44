use helmholtz_core::expr::{parse, Expr, Point, Var, ZeroTester, ZeroVerdict, Q};
use proptest::prelude::*;

const N: usize = 2;

fn var() -> impl Strategy<Value = Var> {
    prop_oneof![
        Just(Var::T),
        (1..=N).prop_map(Var::X),
        (1..=N).prop_map(Var::Y),
    ]
}

fn small_q() -> impl Strategy<Value = Q> {
    (-6i64..=6, 1i64..=4).prop_map(|(a, b)| Q::new(a, b))
}

fn polynomial() -> impl Strategy<Value = Expr> {
    let monomial = (small_q(), prop::collection::vec((var(), 1i64..=3), 0..3)).prop_map(|(c, fs)| {
        let mut items = vec![Expr::num(c)];
        items.extend(fs.into_iter().map(|(v, k)| Expr::var(v).powi(k)));
        Expr::mul_all(items)
    });
    prop::collection::vec(monomial, 1..5).prop_map(Expr::add_all)
}

/// Elementary expressions built from polynomials, products, quotients by
/// positive denominators and the transcendental functions.
fn elementary() -> impl Strategy<Value = Expr> {
    let leaf = polynomial();
    leaf.prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            inner.clone().prop_map(|a| Expr::sin(&a)),
            inner.clone().prop_map(|a| Expr::cos(&a)),
            inner.clone().prop_map(|a| Expr::exp(&(a.scale(&Q::new(1, 4))))),
            inner.clone().prop_map(|a| (a.powi(2) + Expr::one()).recip()),
            inner.clone().prop_map(|a| (a.powi(2) + Expr::one()).sqrt()),
            inner.clone().prop_map(|a| Expr::ln(&(a.powi(2) + Expr::int(2)))),
            (inner, 2i64..=3).prop_map(|(a, k)| a.powi(k)),
        ]
    })
}

fn point() -> impl Strategy<Value = Point> {
    (-1.5f64..1.5, prop::collection::vec(-1.5f64..1.5, N), prop::collection::vec(-1.5f64..1.5, N))
        .prop_map(|(t, x, y)| Point::new(t, x, y))
}

fn shifted(p: &Point, v: Var, h: f64) -> Point {
    let mut q = p.clone();
    match v {
        Var::T => q.t += h,
        Var::X(i) => q.x[i - 1] += h,
        Var::Y(i) => q.y[i - 1] += h,
    }
    q
}

fn central_difference(e: &Expr, p: &Point, v: Var) -> f64 {
    let h = 1e-5;
    let f = |s: f64| e.eval(&shifted(p, v, s)).unwrap();
    (8.0 * (f(h) - f(-h)) - (f(2.0 * h) - f(-2.0 * h))) / (12.0 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivative_matches_finite_differences(e in polynomial(), v in var(), pts in prop::collection::vec(point(), 20)) {
        let d = e.diff(v);
        for p in &pts {
            let exact = d.eval(p).unwrap();
            let approx = central_difference(&e, p, v);
            prop_assert!((exact - approx).abs() <= 1e-6 * (1.0 + exact.abs()), "{e} d/d{v} at {p}: {exact} vs {approx}");
        }
    }

    #[test]
    fn elementary_derivative_matches_finite_differences(e in elementary(), v in var(), p in point()) {
        let d = e.diff(v);
        if let (Ok(exact), Ok(_)) = (d.eval(&p), e.eval(&p)) {
            let approx = central_difference(&e, &p, v);
            let scale = 1.0 + exact.abs() + e.eval(&p).unwrap().abs();
            prop_assert!((exact - approx).abs() <= 1e-5 * scale, "{e} d/d{v} at {p}: {exact} vs {approx}");
        }
    }

    #[test]
    fn simplify_is_a_projection(e in elementary()) {
        let s = e.simplify();
        prop_assert_eq!(s.simplify(), s.clone());
        prop_assert_eq!(s, e);
    }

    #[test]
    fn print_then_parse_round_trips(e in elementary()) {
        let text = e.to_string();
        let back = parse(&text, N).unwrap();
        prop_assert_eq!(&back, &e, "printed as {}", text);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn canonical_value_is_preserved(a in elementary(), b in elementary(), p in point()) {
        // Canonicalization of a product and a sum must not change the value.
        if let (Ok(x), Ok(y)) = (a.eval(&p), b.eval(&p)) {
            let prod = (&a * &b).eval(&p).unwrap();
            let sum = (&a + &b).eval(&p).unwrap();
            prop_assert!((prod - x * y).abs() <= 1e-9 * (1.0 + (x * y).abs()));
            prop_assert!((sum - (x + y)).abs() <= 1e-9 * (1.0 + x.abs() + y.abs()));
        }
    }

    #[test]
    fn zero_test_is_sound(e in elementary(), seed in any::<u64>()) {
        let tester = ZeroTester::with_defaults(N, seed);
        if let Ok(v) = tester.is_zero(&e) {
            if v == ZeroVerdict::ProvenZero {
                for p in tester.points().iter().take(8) {
                    if let Ok(x) = e.eval(p) {
                        prop_assert!(x == 0.0);
                    }
                }
            }
            if let ZeroVerdict::NonZero { witness, value } = v {
                prop_assert!(!e.is_zero());
                prop_assert_eq!(e.eval(&witness).unwrap(), value);
            }
        }
    }

    #[test]
    fn difference_with_itself_is_proven_zero(e in elementary()) {
        prop_assert!((&e - &e).is_zero());
    }
}
