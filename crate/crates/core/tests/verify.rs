use hecke_core::hecke::HeckeContext;
use hecke_core::verify::*;

#[test]
fn all_suites_pass() {
    for q in [3, 4, 5, 7, 8] {
        let ctx = HeckeContext::new(q).unwrap();
        for suite in Suite::ALL {
            let n = match suite {
                Suite::Histogram => 400_000,
                Suite::BczOracle => 100,
                _ => 500,
            };
            let r = run_suite(&ctx, suite, n, 1).unwrap();
            assert!(r.passed, "q={q} {suite}: {r:#?}");
            assert!(r.checks.iter().all(|c| c.samples > 0));
        }
    }
}

#[test]
fn reports_are_deterministic() {
    let ctx = HeckeContext::new(5).unwrap();
    for suite in [Suite::Jacobian, Suite::Markov, Suite::Transfer] {
        let a = format!("{:?}", run_suite(&ctx, suite, 300, 7).unwrap());
        let b = format!("{:?}", run_suite(&ctx, suite, 300, 7).unwrap());
        assert_eq!(a, b);
    }
}

#[test]
fn suite_names_round_trip() {
    for suite in Suite::ALL {
        assert_eq!(suite.name().parse::<Suite>().unwrap(), suite);
    }
    assert!("nope".parse::<Suite>().is_err());
    let ctx = HeckeContext::new(3).unwrap();
    assert!(run_suite(&ctx, Suite::Transfer, 0, 0).is_err());
}

#[test]
fn jacobian_skips_deep_cusp_only() {
    let ctx = HeckeContext::new(5).unwrap();
    let r = run_suite(&ctx, Suite::Jacobian, 1000, 0).unwrap();
    for c in &r.checks[..3] {
        assert_eq!(c.skipped, 0, "{}", c.name);
    }
    assert!(r.checks[3].samples > 800);
}
