use proptest::prelude::*;
use ribbon_core::amplitude::AmplitudeRequest;
use ribbon_core::divdiff::DivDiffEngine;
use ribbon_core::ribbon::{analyze, build_graph};
use ribbon_core::scaling::{
    coarse_power_sum_exponent, fit_slope, sweep, verify, ScalingError, VerdictMode,
};
use ribbon_core::spectra::{SmoothFamily, Spectrum};
use ribbon_core::Dd;

proptest! {
    #[test]
    fn pure_power_laws_are_recovered(a in 0.1f64..100.0, s in -3.0f64..6.0) {
        let pts: Vec<(f64, f64)> = (4..10).map(|k| {
            let n = 2f64.powi(k);
            (n, a * n.powf(s))
        }).collect();
        let f = fit_slope(&pts, None).unwrap();
        prop_assert!((f.global_slope - s).abs() < 1e-10);
        prop_assert!((f.extrapolated_slope - s).abs() < 1e-10);
        prop_assert_eq!(f.local_slopes.len(), pts.len() - 1);
    }

    #[test]
    fn extrapolation_stays_within_last_three(c in -20.0f64..20.0) {
        let pts: Vec<(f64, f64)> = (4..10).map(|k| {
            let n = 2f64.powi(k);
            (n, n * n * (1.0 + c / n).abs().max(1e-3))
        }).collect();
        let f = fit_slope(&pts, None).unwrap();
        let last = &f.local_slopes[f.local_slopes.len() - 3..];
        let lo = last.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = last.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(f.extrapolated_slope >= lo && f.extrapolated_slope <= hi);
    }
}

#[test]
fn window_and_closed_form_local_slopes() {
    let pts: Vec<(f64, f64)> = (8..=13)
        .map(|k| {
            let n = 2f64.powi(k);
            (n, n * n * (1.0 + 10.0 / n))
        })
        .collect();
    let f = fit_slope(&pts, Some(4)).unwrap();
    assert_eq!(f.window, 4);
    assert_eq!(f.local_slopes.len(), 3);
    // ln(A(2n)/A(n)) / ln 2 = 2 + log2((2n + 10) / (2n + 20))
    for (i, s) in f.local_slopes.iter().enumerate() {
        let n = pts[pts.len() - 4 + i].0;
        let want = 2.0 + ((2.0 * n + 10.0) / (2.0 * n + 20.0)).log2();
        assert!((s - want).abs() < 1e-12);
    }
    assert!((f.extrapolated_slope - 2.0).abs() < 0.02);
}

#[test]
fn shortcut_predictor_overshoots_when_sums_converge() {
    // two faces carrying powers 2p and -p, p/d > 1
    for (p, d) in [(2.0, 1.0), (3.0, 1.0), (4.0, 2.5)] {
        let coarse = coarse_power_sum_exponent(&[2.0 * p, -p], d);
        assert_eq!(coarse, 1.0 + 2.0 * p / d);
        assert!(coarse > 2.0 + p / d);
    }
}

fn tadpole() -> ribbon_core::ribbon::RibbonGraph {
    build_graph("t", &[vec![0, 1, 2, 3]], &[(1, 2)], &[(1, 0), (2, 3)]).unwrap()
}

#[test]
fn graph_without_running_faces_is_constant() {
    // a single vertex with two legs
    let g = build_graph("line", &[vec![0, 1]], &[], &[(1, 0), (2, 1)]).unwrap();
    let (faces, ia, _) = analyze(&g).unwrap();
    let engine = DivDiffEngine::<Dd>::new(SmoothFamily::RegularizedPower { p: 2.0 }, Spectrum::power(1.0));
    let req = AmplitudeRequest::new(&g, &faces, &ia, vec![2, 3], 1);
    let s = sweep(&engine, &req, &[4, 8, 16], 1000).unwrap();
    let v: Vec<f64> = s.points.iter().map(|p| p.value).collect();
    assert!(v.iter().all(|x| *x == v[0]));
    assert_eq!(fit_slope(&s.pairs(), None).unwrap().global_slope, 0.0);
}

#[test]
fn sweep_guards() {
    let g = tadpole();
    let (faces, ia, _) = analyze(&g).unwrap();
    let engine = DivDiffEngine::<f64>::new(SmoothFamily::RegularizedPower { p: 2.0 }, Spectrum::power(1.0));
    let req = AmplitudeRequest::new(&g, &faces, &ia, vec![2, 2], 1);
    assert_eq!(
        sweep(&engine, &req, &[8, 4], 100).unwrap_err(),
        ScalingError::NotIncreasing
    );
    assert!(matches!(
        sweep(&engine, &req, &[8, 200], 100),
        Err(ScalingError::BudgetExceeded { n: 200, .. })
    ));
}

#[test]
fn tadpole_verdicts() {
    let g = tadpole();
    let (faces, ia, _) = analyze(&g).unwrap();
    let ns = [256, 512, 1024, 2048, 4096, 8192];
    let engine = DivDiffEngine::<Dd>::new(SmoothFamily::RegularizedPower { p: 2.0 }, Spectrum::power(1.0));
    let req = AmplitudeRequest::new(&g, &faces, &ia, vec![2, 2], 1);
    let v = verify(&engine, &req, &ns, 0.15, &[]).unwrap();
    assert!(v.pass, "slope {}", v.slope);
    assert_eq!(v.mode, VerdictMode::TwoSided);
    assert!(v.sign_constant);

    // zero mode on the leg whose face sits next to the loop
    let sing = DivDiffEngine::<Dd>::new(
        SmoothFamily::RegularizedPower { p: 2.0 },
        Spectrum::power(2.0).with_singular_mode(0.0),
    );
    let prop = build_graph("p", &[vec![0, 1, 2, 3]], &[(1, 2)], &[(1, 3), (2, 0)]).unwrap();
    let (pf, pia, _) = analyze(&prop).unwrap();
    let req = AmplitudeRequest::new(&prop, &pf, &pia, vec![2, 0], 1);
    let v = verify(&sing, &req, &ns, 0.25, &[2]).unwrap();
    assert_eq!(v.mode, VerdictMode::UpperBound);
    assert_eq!(v.predicted, 2.5);
    assert!(v.pass && (v.slope - 2.5).abs() < 0.25, "slope {}", v.slope);
}
