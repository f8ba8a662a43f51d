use proptest::prelude::*;
use special_generic::construct::{build_basic, build_generalized, TChoice, VerticalSpec};
use special_generic::polynomial::{product_of, MultiPoly, UniPoly};
use special_generic::region::PointClass;
use special_generic::shapes;

fn poly_strategy(nvars: usize) -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec(
        (prop::collection::vec(0u32..4, nvars), -4.0f64..4.0),
        0..6,
    )
    .prop_map(move |terms| MultiPoly::from_terms(nvars, terms).unwrap())
}

fn point_strategy(nvars: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5f64..1.5, nvars)
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + scale)
}

fn magnitude(p: &MultiPoly, q: &MultiPoly) -> f64 {
    let m = |p: &MultiPoly| p.terms().iter().map(|t| t.coeff.abs()).sum::<f64>();
    (1.0 + m(p)) * (1.0 + m(q)) * 100.0
}

proptest! {
    #[test]
    fn product_evaluates_pointwise(p in poly_strategy(2), q in poly_strategy(2), x in point_strategy(2)) {
        let pq = p.try_mul(&q).unwrap();
        let lhs = pq.eval(&x).unwrap();
        let rhs = p.eval(&x).unwrap() * q.eval(&x).unwrap();
        prop_assert!(close(lhs, rhs, magnitude(&p, &q)), "{lhs} vs {rhs}");
        let via = product_of(&[p.clone(), q.clone()]).unwrap().eval(&x).unwrap();
        prop_assert!(close(via, rhs, magnitude(&p, &q)));
    }

    #[test]
    fn leibniz_rule(p in poly_strategy(3), q in poly_strategy(3), var in 0usize..3, x in point_strategy(3)) {
        let d = |f: &MultiPoly| f.partial_derivative(var).unwrap();
        let lhs = d(&p.try_mul(&q).unwrap());
        let rhs = d(&p).try_mul(&q).unwrap().try_add(&p.try_mul(&d(&q)).unwrap()).unwrap();
        let (a, b) = (lhs.eval(&x).unwrap(), rhs.eval(&x).unwrap());
        prop_assert!(close(a, b, 10.0 * magnitude(&p, &q)), "{a} vs {b}");
    }

    #[test]
    fn text_round_trip_is_exact(p in poly_strategy(3)) {
        let back = MultiPoly::from_text(&p.to_text(), Some(3)).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn json_round_trip_is_exact(p in poly_strategy(3)) {
        let text = serde_json::to_string(&p).unwrap();
        let back: MultiPoly = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn interior_is_stable_under_smaller_tol(x in point_strategy(2), big in 1e-6f64..0.5, frac in 0.0f64..1.0) {
        let r = shapes::annulus();
        let small = big * frac;
        if let Ok(PointClass::Interior) = r.classify_point(&x, big) {
            prop_assert_eq!(r.classify_point(&x, small).unwrap(), PointClass::Interior);
        }
    }

    #[test]
    fn univariate_derivative_matches_difference(coeffs in prop::collection::vec(-3.0f64..3.0, 1..6), t in -2.0f64..2.0) {
        let p = UniPoly::new(coeffs);
        let h = 1e-5;
        let fd = (p.eval(t + h) - p.eval(t - h)) / (2.0 * h);
        prop_assert!((p.derivative().eval(t) - fd).abs() < 1e-5);
    }
}

#[test]
fn constructions_are_even_in_y() {
    for r in [shapes::disk(), shapes::annulus(), shapes::two_holed_disk()] {
        for k in 1..=3 {
            assert!(build_basic(&r, k).unwrap().is_y_symmetric());
        }
    }
    let fvert = MultiPoly::from_terms(2, [(vec![2, 0], 2.0), (vec![0, 4], 1.0)]).unwrap();
    let spec = VerticalSpec::new(UniPoly::identity(), fvert, 1.0, TChoice::Auto).unwrap();
    let h = build_generalized(&shapes::disk(), &spec).unwrap();
    assert!(h.is_y_symmetric());
    let p = h.poly();
    for x in [[0.3, -0.2, 0.4, 0.1], [-0.5, 0.1, -0.7, 0.9]] {
        let flipped = [x[0], x[1], -x[2], -x[3]];
        assert_eq!(p.eval(&x).unwrap(), p.eval(&flipped).unwrap());
    }
}
