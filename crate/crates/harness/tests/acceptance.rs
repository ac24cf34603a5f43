//! Acceptance suite: one PASS/FAIL line per criterion at full Monte Carlo
//! budgets. Set `RKA_SEED` to rerun with a different master seed.

use rka_harness::checks::{self, CheckOutcome, HybridParams, Table3Params};

fn main() {
    let seed = std::env::var("RKA_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    println!("acceptance suite, seed {seed}");
    let runs: Vec<(f64, Box<dyn Fn() -> CheckOutcome>)> = vec![
        (
            10.0,
            Box::new(move || checks::state_identity(seed, 100, 200)),
        ),
        (10.0, Box::new(move || checks::oracle_convergence(seed, 20))),
        (
            f64::INFINITY,
            Box::new(move || checks::zf_identity(seed, 100)),
        ),
        (
            f64::INFINITY,
            Box::new(move || checks::kappa_equivalence(seed, 100)),
        ),
        (
            f64::INFINITY,
            Box::new(move || checks::corollary_bound(seed, 200, 5, 200)),
        ),
        (
            1.0,
            Box::new(move || checks::complexity_exactness(seed, 50)),
        ),
        (f64::INFINITY, Box::new(checks::snr_anchors)),
        (
            900.0,
            Box::new(move || checks::table3(&Table3Params::full(seed))),
        ),
        (
            f64::INFINITY,
            Box::new(move || checks::hybrid_superiority(&HybridParams::full(seed))),
        ),
        (
            f64::INFINITY,
            Box::new(move || checks::estimator_ordering(seed, 3, 200)),
        ),
        (
            f64::INFINITY,
            Box::new(move || checks::fig1_ordering(seed, 50, 20)),
        ),
    ];
    let mut failed = 0;
    for (budget, run) in runs {
        let mut outcome = run();
        if outcome.seconds > budget {
            outcome.pass = false;
            outcome
                .detail
                .push_str(&format!("; runtime over the {budget} s budget"));
        }
        if !outcome.pass {
            failed += 1;
        }
        println!("{}", outcome.line());
    }
    println!("{} criteria, {failed} failed", 11);
    if failed > 0 {
        std::process::exit(1);
    }
}
