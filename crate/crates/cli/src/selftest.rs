//! Identity checks run by `ribbonpc selftest` on the embedded corpus.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ribbon_core::amplitude::{evaluate, evaluate_weighted, sum_split_check, AmplitudeRequest};
use ribbon_core::divdiff::{divided_difference_with, hp_oracle, DivDiffEngine};
use ribbon_core::powercount::{gamma_injection, verify_gamma};
use ribbon_core::real::rel_gap;
use ribbon_core::ribbon::{analyze, RibbonGraph};
use ribbon_core::spectra::{SmoothFamily, Spectrum};
use ribbon_core::{Dd, Real};
use serde::Serialize;
use serde_json::json;

use crate::corpus::CORPUS;
use crate::dsl::parse_graph_dsl;
use crate::{Report, SCHEMA_VERSION};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub cases: usize,
    pub detail: String,
}

fn check(name: &str, cases: usize, failures: Vec<String>) -> Check {
    Check {
        name: name.to_string(),
        pass: failures.is_empty(),
        cases,
        detail: failures.into_iter().take(5).collect::<Vec<_>>().join("; "),
    }
}

fn corpus_graphs() -> Result<Vec<RibbonGraph>, String> {
    CORPUS
        .iter()
        .map(|(name, text)| parse_graph_dsl(text).map_err(|e| format!("{name}: {e}")))
        .collect()
}

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn hp_check() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut fails = Vec::new();
    let mut cases = 0;
    for p in [2u32, 4, 6] {
        let engine = DivDiffEngine::<BigRational>::new(
            SmoothFamily::InversePower { p },
            Spectrum::power(1.0),
        );
        for _ in 0..20 {
            let n = rng.gen_range(1..=6);
            let pts: Vec<BigRational> = (0..n)
                .map(|_| {
                    let mut a = rng.gen_range(-20i64..=20);
                    if a == 0 {
                        a = 1;
                    }
                    rational(a, rng.gen_range(1..=7))
                })
                .collect();
            cases += 1;
            // x^-p has f' = -p x^(-p-1), so the weighted form is p * h_p
            let lhs = engine.weighted_divdiff(&pts);
            let rhs = hp_oracle(p, &pts).map(|h| h * rational(p as i64, 1));
            match (lhs, rhs) {
                (Ok(a), Ok(b)) if a == b => {}
                (a, b) => fails.push(format!("p={p} points={pts:?}: {a:?} vs {b:?}")),
            }
        }
    }
    check("hp_oracle", cases, fails)
}

fn confluent_check() -> Check {
    let f = SmoothFamily::RegularizedPower { p: 2.0 };
    let mut fails = Vec::new();
    let mut cases = 0;
    for x in [0.5, 1.7, -3.2, 11.0] {
        let x = Dd::from_f64(x);
        let mut fact = Dd::ONE;
        for m in 0..=5usize {
            if m > 0 {
                fact = fact * Dd::from_f64(m as f64);
            }
            cases += 1;
            let pts = vec![x; m + 1];
            let lhs = divided_difference_with(&f, &pts, Dd::merge_eta());
            let rhs = f.eval_derivative(m + 1, &x).map(|v| v / fact);
            match (lhs, rhs) {
                (Ok(a), Ok(b)) if rel_gap(&a, &b) <= 1e-12 => {}
                (a, b) => fails.push(format!("x={x} m={m}: {a:?} vs {b:?}")),
            }
        }
    }
    check("confluent", cases, fails)
}

fn corpus_checks(graphs: &[RibbonGraph]) -> Vec<Check> {
    let engine = DivDiffEngine::<Dd>::new(
        SmoothFamily::RegularizedPower { p: 2.0 },
        Spectrum::power(1.0),
    );
    let (mut prof_fail, mut weight_fail, mut split_fail, mut gamma_fail) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let (mut split_cases, mut gamma_cases) = (0, 0);
    for g in graphs {
        let (faces, ia, prof) = match analyze(g) {
            Ok(x) => x,
            Err(e) => {
                prof_fail.push(format!("{}: {e}", g.name));
                continue;
            }
        };
        if prof.f != prof.b + prof.u || prof.e_fi < prof.v_fi || prof.l + prof.v != 1 + prof.e {
            prof_fail.push(format!("{}: inconsistent profile", g.name));
        }

        let ext = vec![1; g.num_legs()];
        let req = AmplitudeRequest::new(g, &faces, &ia, ext, 6);
        match (evaluate(&engine, &req), evaluate_weighted(&engine, &req)) {
            (Ok(a), Ok(b)) if rel_gap(&a.value, &b.value) <= 1e-9 => {}
            (a, b) => weight_fail.push(format!(
                "{}: {:?} vs {:?}",
                g.name,
                a.map(|r| r.value),
                b.map(|r| r.value)
            )),
        }

        if prof.u <= 2 {
            split_cases += 1;
            let mut r = req.clone();
            r.cutoff = 8;
            match sum_split_check(&engine, &r, 3) {
                Ok(s) if s.gap <= 1e-10 => {}
                Ok(s) => split_fail.push(format!("{}: gap {:e}", g.name, s.gap)),
                Err(e) => split_fail.push(format!("{}: {e}", g.name)),
            }
        }

        let running = faces.running_indices();
        let mut orders = vec![running.clone()];
        orders.push(running.iter().rev().copied().collect());
        if running.len() > 2 {
            let mut o = running.clone();
            o.rotate_left(1);
            orders.push(o);
        }
        for order in orders {
            gamma_cases += 1;
            match gamma_injection(g, &faces, &order) {
                Ok(map) => {
                    let v = verify_gamma(g, &faces, &order, &map);
                    if !v.is_empty() {
                        gamma_fail.push(format!("{} {order:?}: {}", g.name, v.join(", ")));
                    }
                }
                Err(e) => gamma_fail.push(format!("{} {order:?}: {e}", g.name)),
            }
        }
    }
    vec![
        check("profile", graphs.len(), prof_fail),
        check("weighted_form", graphs.len(), weight_fail),
        check("sum_splitting", split_cases, split_fail),
        check("gamma_injection", gamma_cases, gamma_fail),
    ]
}

pub fn selftest_checks() -> Vec<Check> {
    let mut checks = vec![hp_check(), confluent_check()];
    match corpus_graphs() {
        Ok(graphs) => {
            checks.push(check("corpus_parse", graphs.len(), Vec::new()));
            checks.extend(corpus_checks(&graphs));
        }
        Err(e) => checks.push(check("corpus_parse", CORPUS.len(), vec![e])),
    }
    checks
}

pub fn run_selftest() -> Report {
    let checks = selftest_checks();
    let failed = checks.iter().filter(|c| !c.pass).count();
    Report {
        exit_code: if failed == 0 { 0 } else { 1 },
        json: json!({
            "schema": SCHEMA_VERSION,
            "command": "selftest",
            "passed": checks.len() - failed,
            "failed": failed,
            "checks": checks,
        }),
        csv: None,
    }
}
