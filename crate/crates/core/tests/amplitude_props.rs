use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ribbon_core::amplitude::{
    evaluate, evaluate_restricted, evaluate_weighted, sum_split_check, AmplitudeError,
    AmplitudeRequest, Summation,
};
use ribbon_core::divdiff::DivDiffEngine;
use ribbon_core::random::{random_graph, RandomGraphParams};
use ribbon_core::real::rel_gap;
use ribbon_core::ribbon::{analyze, build_graph, RibbonGraph};
use ribbon_core::spectra::{SmoothFamily, Spectrum};
use ribbon_core::Dd;

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn graph_from_seed(seed: u64) -> RibbonGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_graph(
        &mut rng,
        RandomGraphParams {
            max_vertices: 3,
            max_extra_edges: 2,
            max_legs: 3,
        },
    )
}

/// `f'[x_1..x_n]` for `f = x^-2` from the closed form
/// `(-1)^n * 2 * h_2(1/x) / prod x`, valid for repeated points too.
fn dd_inv_sq(x: &[BigRational]) -> BigRational {
    let mut h1 = q(0);
    let mut h2 = q(0);
    let mut prod = q(1);
    for y in x {
        let r = q(1) / y.clone();
        h2 += r.clone() * (h1.clone() + r.clone());
        h1 += r;
        prod *= y.clone();
    }
    let v = q(2) * h2 / prod;
    if x.len() % 2 == 1 {
        -v
    } else {
        v
    }
}

#[test]
fn tadpole_against_hand_sum() {
    // legs a (1) and d (2), self-loop b-c; the vertex reads [i2, i1, k, i1]
    let g = build_graph("t", &[vec![0, 1, 2, 3]], &[(1, 2)], &[(1, 0), (2, 3)]).unwrap();
    let (faces, ia, _) = analyze(&g).unwrap();
    let engine = DivDiffEngine::<BigRational>::new(
        SmoothFamily::InversePower { p: 2 },
        Spectrum::power(1.0),
    );
    let (i1, i2) = (3i64, 5i64);
    let n = 9u32;
    let req = AmplitudeRequest::new(&g, &faces, &ia, vec![i1 as u32, i2 as u32], n);
    let got = evaluate(&engine, &req).unwrap().value;
    let mut want = q(0);
    for k in 1..=n as i64 {
        let vertex = dd_inv_sq(&[q(i2), q(i1), q(k), q(i1)]);
        let edge = dd_inv_sq(&[q(i1), q(k)]);
        want += vertex / edge;
    }
    assert_eq!(got, want);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn weighted_form_agrees(seed in any::<u64>(), ext_seed in 1u32..6) {
        let g = graph_from_seed(seed);
        let (faces, ia, _) = analyze(&g).unwrap();
        if faces.running_indices().len() > 3 {
            return Ok(());
        }
        let engine = DivDiffEngine::<Dd>::new(
            SmoothFamily::InversePower { p: 2 },
            Spectrum::power(1.0),
        );
        let ext: Vec<u32> = (0..g.num_legs() as u32).map(|k| 1 + (ext_seed + 2 * k) % 7).collect();
        let req = AmplitudeRequest::new(&g, &faces, &ia, ext, 5);
        let a = evaluate(&engine, &req).unwrap().value;
        let b = evaluate_weighted(&engine, &req).unwrap().value;
        prop_assert!(rel_gap(&a, &b) <= 1e-9, "{} {}", a, b);
    }

    #[test]
    fn parallel_sum_is_bit_identical(seed in any::<u64>()) {
        let g = graph_from_seed(seed);
        let (faces, ia, _) = analyze(&g).unwrap();
        if faces.running_indices().len() > 3 {
            return Ok(());
        }
        let engine = DivDiffEngine::<f64>::new(
            SmoothFamily::RegularizedPower { p: 2.0 },
            Spectrum::power(2.0),
        );
        let req = AmplitudeRequest::new(&g, &faces, &ia, vec![2; g.num_legs()], 12);
        let seq = evaluate(&engine, &req).unwrap().value;
        let par = evaluate(&engine, &req.clone().with_summation(Summation::Parallel)).unwrap().value;
        prop_assert_eq!(seq.to_bits(), par.to_bits());
        prop_assert_eq!(seq.to_bits(), evaluate(&engine, &req).unwrap().value.to_bits());
    }

    #[test]
    fn translation_of_function_and_spectrum_cancels(seed in any::<u64>(), eps in prop::sample::select(vec![0.3, -1.7])) {
        let g = graph_from_seed(seed);
        let (faces, ia, _) = analyze(&g).unwrap();
        if faces.running_indices().len() > 3 {
            return Ok(());
        }
        let f = SmoothFamily::RegularizedPower { p: 2.0 };
        let plain = DivDiffEngine::<Dd>::new(f.clone(), Spectrum::power(1.0));
        let moved = DivDiffEngine::<Dd>::new(f.shifted(eps), Spectrum::power(1.0).shifted(eps));
        let req = AmplitudeRequest::new(&g, &faces, &ia, vec![2; g.num_legs()], 6);
        let a = evaluate(&plain, &req).unwrap().value;
        let b = evaluate(&moved, &req).unwrap().value;
        prop_assert!(rel_gap(&a, &b) <= 1e-9, "{} {}", a, b);
    }

    #[test]
    fn sum_splits_over_small_indices(seed in any::<u64>()) {
        let g = graph_from_seed(seed);
        let (faces, ia, _) = analyze(&g).unwrap();
        if faces.running_indices().len() > 2 {
            return Ok(());
        }
        let engine = DivDiffEngine::<Dd>::new(
            SmoothFamily::RegularizedPower { p: 2.0 },
            Spectrum::power(1.0),
        );
        let req = AmplitudeRequest::new(&g, &faces, &ia, vec![2; g.num_legs()], 7);
        let s = sum_split_check(&engine, &req, 3).unwrap();
        prop_assert!(s.gap <= 1e-10, "gap {}", s.gap);
    }
}

#[test]
fn restricted_range_and_errors() {
    let g = build_graph("t", &[vec![0, 1, 2, 3]], &[(1, 2)], &[(1, 0), (2, 3)]).unwrap();
    let (faces, ia, _) = analyze(&g).unwrap();
    let engine = DivDiffEngine::<f64>::new(SmoothFamily::InversePower { p: 2 }, Spectrum::power(1.0));
    let req = AmplitudeRequest::new(&g, &faces, &ia, vec![2, 2], 10);
    let full = evaluate(&engine, &req).unwrap();
    let tail = evaluate_restricted(&engine, &req, 4).unwrap();
    assert_eq!(full.term_count, 10);
    assert_eq!(tail.term_count, 7);
    assert!(matches!(
        evaluate_restricted(&engine, &req, 11),
        Err(AmplitudeError::BadRange { .. })
    ));
    let short = AmplitudeRequest::new(&g, &faces, &ia, vec![2], 10);
    assert!(matches!(
        evaluate(&engine, &short),
        Err(AmplitudeError::ExternalCountMismatch { .. })
    ));
}
