//! Acceptance criteria 1–10. Criteria run one after another in a single test
//! so their timings are not distorted by other tests; each prints one line.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;

use hecke_core::algebra::{parse_rational, FieldElement, Scalar, Vec2};
use hecke_core::bcz::{bcz_map, TrianglePoint};
use hecke_core::cfrac::cf_itinerary;
use hecke_core::hecke::{identity_suite, HeckeContext};
use hecke_core::intervalmaps::*;
use hecke_core::sampling::{dyadic_unit, sample_rng, triangle_point};
use hecke_core::suspension::{branch_of, h_index, slab_partition_check};
use hecke_core::verify::{run_suite, Suite, HISTOGRAM_BINS, HISTOGRAM_MIN_EXPECTED};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn ctx(q: u32) -> HeckeContext {
    HeckeContext::new(q).unwrap()
}

fn exact(ctx: &HeckeContext, s: &str) -> FieldElement {
    FieldElement::from_rational(ctx.field(), parse_rational(s).unwrap())
}

fn identities() -> Outcome {
    let failed: Vec<String> = (3..=12)
        .flat_map(|q| identity_suite(&ctx(q)).into_iter().filter(|c| !c.passed).map(move |c| format!("q={q} {}", c.name)))
        .collect();
    outcome(failed.is_empty(), if failed.is_empty() { "6 families, q = 3..12".into() } else { failed.join("; ") })
}

fn bcz_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut passed = true;
    for q in 3..=6 {
        let r = run_suite(&ctx(q), Suite::BczOracle, 1000, 0).unwrap();
        passed &= r.passed;
        worst = r.checks.iter().map(|c| c.max_residual).fold(worst, f64::max);
    }
    outcome(passed, format!("1000 points, q = 3..6, max residual {worst:.1e} (tol 1e-9)"))
}

fn classical_q3() -> Outcome {
    let c = ctx(3);
    let mismatches = (0..10_000u64)
        .filter(|&k| {
            let p = triangle_point(&c, &mut sample_rng(3, k));
            let classical = TrianglePoint::new(p.b, -p.a + ((1.0 + p.a) / p.b).floor() * p.b);
            bcz_map(&c, p).unwrap() != classical
        })
        .count();
    outcome(mismatches == 0, format!("10^4 points, {mismatches} mismatches"))
}

fn farey_invariance() -> Outcome {
    let mut worst = 0.0f64;
    for q in 3..=8 {
        let xs: Vec<f64> = (0..100u64).map(|k| 1.0 - sample_rng(4, k).gen::<f64>()).collect();
        worst = worst.max(farey_transfer_check(&ctx(q), &xs).unwrap());
    }
    let c = ctx(3);
    let x = exact(&c, "3/5");
    let mut terms = transfer_terms(&c, &x).unwrap();
    terms.sort_by(|a, b| a.cmp_tol(b, 0.0));
    let instance = terms == vec![exact(&c, "5/3"), exact(&c, "5/2")]
        && terms[0].clone() + terms[1].clone() == exact(&c, "25/6")
        && farey_density(&x) == exact(&c, "25/6");
    outcome(
        worst < 1e-10 && instance,
        format!("100 points, q = 3..8, max relative residual {worst:.1e}; q=3 x=3/5: 5/3 + 5/2 = 25/6 exact: {instance}"),
    )
}

fn natural_extension() -> Outcome {
    let mut notes = Vec::new();
    let mut passed = true;
    for q in [3u32, 5, 7] {
        let r = run_suite(&ctx(q), Suite::Markov, 10_000 * (q as usize - 1), 5).unwrap();
        passed &= r.passed;
        if !r.passed {
            notes.push(format!("markov q={q} failed"));
        }
    }
    let mut worst_j = 0.0f64;
    for q in 3..=8 {
        let r = run_suite(&ctx(q), Suite::Jacobian, 1000, 6).unwrap();
        passed &= r.passed;
        worst_j = r.checks.iter().map(|c| c.max_residual).fold(worst_j, f64::max);
    }
    let c = ctx(3);
    let cases = [("3/10", "0", "3/7", "0"), ("3/10", "1", "3/7", "49/100"), ("3/4", "0", "2/3", "3/2")];
    let mut worst_w = 0.0f64;
    let mut exact_ok = true;
    for (a, s, a2, s2) in cases {
        let (x, y) = farey_ext_step(&c, &exact(&c, a), &exact(&c, s)).unwrap();
        exact_ok &= x == exact(&c, a2) && y == exact(&c, s2);
        let (xf, yf) = farey_ext_step(&c, &exact(&c, a).to_f64(), &exact(&c, s).to_f64()).unwrap();
        worst_w = worst_w.max((xf - exact(&c, a2).to_f64()).abs()).max((yf - exact(&c, s2).to_f64()).abs());
    }
    passed &= exact_ok && worst_w < 1e-12;
    notes.push(format!(
        "Markov 10^4 per (q,i), q = 3,5,7; max |J-1| {worst_j:.1e}; worked values exact: {exact_ok}, float error {worst_w:.1e}"
    ));
    outcome(passed, notes.join("; "))
}

fn slabs() -> Outcome {
    let mut detail = Vec::new();
    let mut passed = true;
    for q in [3, 5, 7] {
        let r = slab_partition_check(&ctx(q), 10_000, 7);
        passed &= r.passed;
        detail.push(format!("q={q}: uncovered {} multiple {}", r.uncovered, r.multiply_covered));
    }
    outcome(passed, detail.join(", "))
}

fn gauss_map() -> Outcome {
    let c = ctx(3);
    let g = |a: &str| gauss(&c, &exact(&c, a)).unwrap();
    let values = g("3/10") == (exact(&c, "3/4"), 2) && g("4/5") == (exact(&c, "1/2"), 3);
    let m3 = gauss_mass(&c);
    let mut passed = values && (m3 - 2.0 * 2f64.ln()).abs() < 1e-8;
    let mut detail = format!("q=3 exact values: {values}, mass error {:.1e}", (m3 - 2.0 * 2f64.ln()).abs());
    for q in 4..=6 {
        let c = ctx(q);
        let (m, fine) = (gauss_mass_with(&c, 8), gauss_mass_with(&c, 16));
        let ok = m.is_finite() && (m - fine).abs() < 1e-8;
        passed &= ok;
        detail += &format!("; q={q} mass {m:.10} (refinement change {:.1e})", (m - fine).abs());
    }
    outcome(passed, detail)
}

fn histogram() -> Outcome {
    let mut passed = true;
    let mut detail = Vec::new();
    for (q, a0) in [(3, 1.0 / 2f64.sqrt()), (5, std::f64::consts::PI / 6.0)] {
        let c = ctx(q);
        let hist = birkhoff_histogram(&c, MapKind::Gauss, a0, 1_000_000, HISTOGRAM_BINS).unwrap();
        let d = histogram_distance(&c, &hist, HISTOGRAM_MIN_EXPECTED);
        let ok = !hist.truncated && d < 0.05;
        passed &= ok;
        detail.push(format!("q={q}: sup {d:.4}"));
    }
    outcome(passed, format!("10^6 iterates, {HISTOGRAM_BINS} bins; {}", detail.join(", ")))
}

fn coding() -> Outcome {
    let mut mismatches = 0;
    for q in 3..=8 {
        let c = ctx(q);
        for k in 0..1000u64 {
            let a = dyadic_unit(&c, &mut sample_rng(9, k));
            let code = geodesic_code(&c, &a, &a.zero_like(), 50).unwrap();
            let it = cf_itinerary(&c, &Vec2::new(a.clone(), a.one_like() - a.clone()), 50).unwrap();
            let symbols = if code.terminated { &code.symbols[..code.symbols.len() - 1] } else { &code.symbols[..] };
            let agree = symbols == it.steps.as_slice() && code.terminated == it.terminated;
            mismatches += usize::from(!agree);
        }
    }
    outcome(mismatches == 0, format!("1000 exact points x 50 symbols, q = 3..8, {mismatches} mismatches"))
}

fn orbit_figure() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g5.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_hecke"))
        .args(["orbit", "--kind", "gauss-ext", "--q", "5", "--steps", "100000", "--seed", "0", "--out"])
        .arg(&path)
        .status()
        .unwrap();
    if !status.success() {
        return outcome(false, format!("hecke exited with {status}"));
    }
    let c = ctx(5);
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(&path).unwrap();
    let mut cells = [[0usize; 4]; 4];
    let (mut points, mut outside, mut inconsistent) = (0, 0, 0);
    for row in reader.records() {
        let row = row.unwrap();
        let (a, s): (f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
        let branch: usize = row[3].parse().unwrap();
        points += 1;
        if !in_gauss_domain(&c, &a, &s) {
            outside += 1;
            continue;
        }
        let (v, h) = (branch_of(&c, &a).unwrap(), h_index(&c, &a, &s).unwrap());
        cells[v][h] += 1;
        inconsistent += usize::from(h != 3 - branch);
    }
    // 𝖱^5 leaves out 𝖧_0 ∩ 𝖵_3 and 𝖧_3 ∩ 𝖵_0; every other cell is visited.
    let forbidden = cells[3][0] + cells[0][3];
    let empty_allowed =
        (0..4).flat_map(|v| (0..4).map(move |h| (v, h))).filter(|&(v, h)| (v, h) != (3, 0) && (v, h) != (0, 3) && cells[v][h] == 0).count();
    outcome(
        points == 100_000 && outside == 0 && forbidden == 0 && empty_allowed == 0 && inconsistent == 0,
        format!(
            "{points} points, {outside} outside R^5, {forbidden} in excluded cells, {empty_allowed} empty allowed cells, {inconsistent} with H index != q-2-branch"
        ),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("exact identity suite", identities, Duration::from_secs(5)),
        ("BCZ oracle equivalence", bcz_oracle, Duration::from_secs(120)),
        ("q=3 classical BCZ form", classical_q3, Duration::from_secs(1)),
        ("Farey invariance", farey_invariance, Duration::from_secs(1)),
        ("natural-extension checks", natural_extension, Duration::from_secs(60)),
        ("slab tiling", slabs, Duration::from_secs(30)),
        ("Gauss map", gauss_map, Duration::from_secs(10)),
        ("empirical density", histogram, Duration::from_secs(60)),
        ("coding equality", coding, Duration::from_secs(30)),
        ("orbit-figure reproduction", orbit_figure, Duration::from_secs(60)),
    ];
    let mut failed = Vec::new();
    for (n, (name, run, limit)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        let elapsed = t.elapsed();
        let ok = o.passed && elapsed < *limit;
        println!(
            "criterion {:>2} {} {name}: {} [{:.2} s, limit {} s]",
            n + 1,
            if ok { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
        if !ok {
            failed.push(n + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
