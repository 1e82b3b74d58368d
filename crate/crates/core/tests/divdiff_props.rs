use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use ribbon_core::divdiff::{
    divdiff_oracle_distinct, divdiff_spline_integral, divided_difference_with, gn_identity_check,
    hp_oracle, DivDiffEngine,
};
use ribbon_core::real::rel_gap;
use ribbon_core::spectra::{SmoothFamily, Spectrum};
use ribbon_core::Dd;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Textbook recursion on distinct points, independent of the Newton table.
fn recursive_dd<F: Fn(&BigRational) -> BigRational + Copy>(f: F, x: &[BigRational]) -> BigRational {
    if x.len() == 1 {
        return f(&x[0]);
    }
    let n = x.len();
    (recursive_dd(f, &x[1..]) - recursive_dd(f, &x[..n - 1])) / (x[n - 1].clone() - x[0].clone())
}

/// `-p x^(-p-1)` exactly.
fn inv_power_deriv(p: u32) -> impl Fn(&BigRational) -> BigRational + Copy {
    move |x: &BigRational| {
        let mut r = <BigRational as One>::one();
        for _ in 0..=p {
            r /= x.clone();
        }
        -(r * q(p as i64, 1))
    }
}

fn distinct_rationals(raw: Vec<(i64, i64)>) -> Vec<BigRational> {
    let mut out: Vec<BigRational> = Vec::new();
    for (a, b) in raw {
        let x = q(if a == 0 { 1 } else { a }, b);
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

fn spread_points(raw: &[f64]) -> Vec<Dd> {
    // points on both sides of zero, pairwise gaps of at least 1e-3
    let mut xs: Vec<f64> = Vec::new();
    for &r in raw {
        if xs.iter().all(|y| (y - r).abs() >= 1e-3) {
            xs.push(r);
        }
    }
    xs.into_iter().map(Dd::from_f64).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exact_table_matches_recursion_and_hp(
        p in prop::sample::select(vec![2u32, 4, 6]),
        raw in prop::collection::vec((-30i64..30, 1i64..9), 1..7),
    ) {
        let pts = distinct_rationals(raw);
        let engine = DivDiffEngine::<BigRational>::new(
            SmoothFamily::InversePower { p },
            Spectrum::power(1.0),
        );
        let table = engine.divided_difference(&pts).unwrap();
        prop_assert_eq!(&table, &recursive_dd(inv_power_deriv(p), &pts));
        let weighted = engine.weighted_divdiff(&pts).unwrap();
        prop_assert_eq!(weighted, hp_oracle(p, &pts).unwrap() * q(p as i64, 1));
    }

    #[test]
    fn exact_confluent_points_match_hp(
        p in prop::sample::select(vec![2u32, 4, 6]),
        base in prop::collection::vec((1i64..12, 1i64..5), 1..4),
        reps in prop::collection::vec(1usize..3, 3),
    ) {
        let mut pts = Vec::new();
        for (i, x) in distinct_rationals(base).into_iter().enumerate() {
            for _ in 0..reps[i % reps.len()] {
                pts.push(x.clone());
            }
        }
        let engine = DivDiffEngine::<BigRational>::new(
            SmoothFamily::InversePower { p },
            Spectrum::power(1.0),
        );
        prop_assert_eq!(
            engine.weighted_divdiff(&pts).unwrap(),
            hp_oracle(p, &pts).unwrap() * q(p as i64, 1)
        );
    }

    #[test]
    fn symmetric_under_permutation(
        raw in prop::collection::vec(-20.0f64..20.0, 2..7),
        rot in 0usize..6,
    ) {
        let f = SmoothFamily::RegularizedPower { p: 2.0 };
        let pts = spread_points(&raw);
        let mut perm = pts.clone();
        perm.reverse();
        let k = rot % perm.len();
        perm.rotate_left(k);
        let a = divided_difference_with(&f, &pts, 1e-12).unwrap();
        let b = divided_difference_with(&f, &perm, 1e-12).unwrap();
        prop_assert!(rel_gap(&a, &b) <= 1e-20 || (a - b).abs().to_f64() <= 1e-28);
    }

    #[test]
    fn table_matches_lagrange_and_spline_oracles(
        raw in prop::collection::vec(-6.0f64..6.0, 1..6),
    ) {
        let engine = DivDiffEngine::<Dd>::new(
            SmoothFamily::RegularizedPower { p: 2.0 },
            Spectrum::power(1.0),
        );
        let pts = spread_points(&raw);
        let t = engine.divided_difference(&pts).unwrap();
        let o = divdiff_oracle_distinct(&engine, &pts).unwrap();
        let s = divdiff_spline_integral(&engine, &pts, 12).unwrap();
        let scale = t.abs().to_f64().max(1e-12);
        prop_assert!((t - o).abs().to_f64() / scale <= 1e-9, "{} {}", t, o);
        prop_assert!((t - s).abs().to_f64() / scale <= 1e-9, "{} {}", t, s);
    }

    #[test]
    fn nearly_confluent_points_approach_the_derivative(x in 0.3f64..5.0, m in 1usize..5) {
        let f = SmoothFamily::RegularizedPower { p: 2.0 };
        let xd = Dd::from_f64(x);
        let spread: Vec<Dd> = (0..=m).map(|i| xd + Dd::from_f64(i as f64 * 1e-5)).collect();
        let merged = vec![xd; m + 1];
        let a = divided_difference_with(&f, &spread, 0.0).unwrap();
        let b = divided_difference_with(&f, &merged, 1e-12).unwrap();
        let mut fact = 1.0;
        for i in 1..=m {
            fact *= i as f64;
        }
        let d = f.eval_derivative(m + 1, &xd).unwrap() / Dd::from_f64(fact);
        prop_assert!(rel_gap(&b, &d) <= 1e-12 || (b - d).abs().to_f64() < 1e-25);
        // moving the nodes by 1e-5 moves the value by O(1e-5)
        prop_assert!((a - b).abs().to_f64() <= 1e-3 * (1.0 + b.abs().to_f64()));
    }

    #[test]
    fn derivatives_match_finite_differences(x in 0.2f64..6.0, k in 0usize..5, p in 1.0f64..5.0) {
        let f = SmoothFamily::RegularizedPower { p };
        let h = 1e-6;
        let xd = Dd::from_f64(x);
        let hd = Dd::from_f64(h);
        let plus = f.eval_derivative(k, &(xd + hd)).unwrap();
        let minus = f.eval_derivative(k, &(xd - hd)).unwrap();
        let fd = ((plus - minus) / (hd + hd)).to_f64();
        let exact = f.eval_derivative(k + 1, &xd).unwrap().to_f64();
        prop_assert!((fd - exact).abs() <= 1e-8 * (1.0 + exact.abs()), "{} {}", fd, exact);
    }

    #[test]
    fn regularized_power_is_even(x in -30.0f64..30.0, k in 0usize..8) {
        let f = SmoothFamily::RegularizedPower { p: 2.0 };
        let a = f.eval_derivative(k, &x).unwrap();
        let b = f.eval_derivative(k, &-x).unwrap();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((a - sign * b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn shift_is_exact(k in 1u32..5000, d in prop::sample::select(vec![1.0f64, 2.0, 3.0]), eps in -3.0f64..3.0) {
        let s = Spectrum::power(d);
        let a: Dd = s.eigenvalue_in(k).unwrap();
        let b: Dd = s.clone().shifted(eps).eigenvalue_in(k).unwrap();
        prop_assert_eq!(b, a + Dd::from_f64(eps));
    }

    #[test]
    fn reciprocal_identity(raw in prop::collection::vec(1.0f64..40.0, 1..6)) {
        let engine = DivDiffEngine::<Dd>::new(
            SmoothFamily::InversePower { p: 2 },
            Spectrum::power(1.0),
        );
        let pts = spread_points(&raw);
        let (_, _, gap) = gn_identity_check(&engine, &pts).unwrap();
        prop_assert!(gap <= 1e-20);
    }
}

#[test]
fn memo_is_shared_across_orderings() {
    let engine = DivDiffEngine::<f64>::new(SmoothFamily::InversePower { p: 2 }, Spectrum::power(1.0));
    let a = engine.dd_at_indices(&[3, 1, 2]).unwrap();
    let b = engine.dd_at_indices(&[2, 3, 1]).unwrap();
    assert_eq!(a, b);
    assert_eq!(engine.memo_stats(), (1, 1));
    assert_eq!(engine.memo_len(), 1);
}

#[test]
fn zero_point_is_rejected_exactly() {
    assert!(hp_oracle(2, &[<BigRational as Zero>::zero()]).is_err());
}
