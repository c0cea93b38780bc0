//! Sampled verification harnesses. Every suite draws sample `k` from
//! `sample_rng(seed, k)`, evaluates samples in parallel and assembles the
//! report in sample order, so reports depend only on `(q, samples, seed)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bcz::{bcz_map, roof, FirstReturnOracle};
use crate::hecke::HeckeContext;
use crate::intervalmaps::{
    birkhoff_histogram, farey_ext_step, farey_transfer_check, gauss_ext_step, histogram_distance, MapKind,
};
use crate::sampling::{sample_rng, triangle_point};
use crate::suspension::{
    branch_boundary, branch_of, h_index, in_section, roof_component, side_map_s_to_h, side_map_v_to_s,
    slab_partition_check,
};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    BczOracle,
    Markov,
    Jacobian,
    Transfer,
    Histogram,
    Slabs,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::BczOracle, Suite::Markov, Suite::Jacobian, Suite::Transfer, Suite::Histogram, Suite::Slabs];

    pub fn name(self) -> &'static str {
        match self {
            Suite::BczOracle => "bcz-oracle",
            Suite::Markov => "markov",
            Suite::Jacobian => "jacobian",
            Suite::Transfer => "transfer",
            Suite::Histogram => "histogram",
            Suite::Slabs => "slabs",
        }
    }

    /// Residual tolerance of the suite's main check.
    pub fn tolerance(self) -> f64 {
        match self {
            Suite::BczOracle => 1e-9,
            Suite::Markov => 1e-9,
            Suite::Jacobian => 1e-6,
            Suite::Transfer => 1e-10,
            Suite::Histogram => 0.05,
            Suite::Slabs => 0.0,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| format!("unknown suite {s}"))
    }
}

/// One measured quantity of a suite.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    /// Samples that were evaluated.
    pub samples: usize,
    /// Samples skipped because the finite-difference stencil or the
    /// acceleration count left the admissible range.
    pub skipped: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    /// Samples whose residual exceeded the tolerance or that raised an error.
    pub violations: usize,
    pub passed: bool,
}

impl Check {
    fn from_residuals(name: &str, tolerance: f64, residuals: &[Option<f64>]) -> Check {
        let evaluated: Vec<f64> = residuals.iter().flatten().copied().collect();
        let max_residual = evaluated.iter().copied().fold(0.0, f64::max);
        let violations = evaluated.iter().filter(|r| !(**r <= tolerance)).count();
        Check {
            name: name.into(),
            samples: evaluated.len(),
            skipped: residuals.len() - evaluated.len(),
            max_residual,
            tolerance,
            violations,
            passed: violations == 0 && !evaluated.is_empty(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub q: u32,
    pub samples: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Runs `suite` with `samples` samples (iterates for `histogram`).
pub fn run_suite(ctx: &HeckeContext, suite: Suite, samples: usize, seed: u64) -> Result<SuiteReport> {
    if samples == 0 {
        return Err(Error::Domain { value: 0.0, domain: "samples >= 1" });
    }
    let checks = match suite {
        Suite::BczOracle => bcz_oracle(ctx, samples, seed),
        Suite::Markov => markov(ctx, samples, seed),
        Suite::Jacobian => jacobian_suite(ctx, samples, seed),
        Suite::Transfer => transfer(ctx, samples, seed)?,
        Suite::Histogram => histogram(ctx, samples, seed)?,
        Suite::Slabs => slabs(ctx, samples, seed),
    };
    let passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport { suite, q: ctx.q(), samples, seed, checks, passed })
}

fn per_sample<T: Send>(samples: usize, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    (0..samples as u64).into_par_iter().map(f).collect()
}

fn bcz_oracle(ctx: &HeckeContext, samples: usize, seed: u64) -> Vec<Check> {
    let oracle = FirstReturnOracle::new(ctx, 24.0, 6);
    let res: Vec<(Option<f64>, Option<f64>)> = per_sample(samples, |k| {
        let p = triangle_point(ctx, &mut sample_rng(seed, k));
        let (Ok(r), Ok(t), Ok(next)) = (oracle.first_return(p), roof(ctx, p), bcz_map(ctx, p)) else {
            return (Some(f64::INFINITY), Some(f64::INFINITY));
        };
        let map = (r.next.a - next.a).abs().max((r.next.b - next.b).abs());
        (Some((r.time - t).abs() / t.max(1.0)), Some(map))
    });
    let (roofs, maps): (Vec<_>, Vec<_>) = res.into_iter().unzip();
    let tol = Suite::BczOracle.tolerance();
    vec![Check::from_residuals("roof", tol, &roofs), Check::from_residuals("bcz-map", tol, &maps)]
}

/// A point of `𝖵_i`: `a` uniform in `I_i` away from its ends by `margin`
/// (relative), `s` uniform in `[0, 1/(a(1−a)))` likewise.
fn strip_point(ctx: &HeckeContext, i: usize, rng: &mut impl Rng, margin: f64) -> (f64, f64) {
    let (lo, hi): (f64, f64) = (branch_boundary(ctx, i + 1), branch_boundary(ctx, i));
    let a = lo + (hi - lo) * rng.gen_range(margin..1.0 - margin);
    let s = rng.gen_range(margin..1.0 - margin) / (a * (1.0 - a));
    (a, s)
}

/// Distance of `s` outside `𝖧_j` at abscissa `a`, relative to the strip height.
fn outside_h(ctx: &HeckeContext, j: usize, a: f64, s: f64) -> f64 {
    let b = 1.0 - a;
    let lo = if j == 0 { 0.0 } else { roof_component(ctx, j, &a, &b).unwrap_or(f64::NAN) };
    let hi = roof_component(ctx, j + 1, &a, &b).unwrap_or(f64::NAN);
    (lo - s).max(s - hi).max(0.0) / (hi - lo)
}

fn markov(ctx: &HeckeContext, samples: usize, seed: u64) -> Vec<Check> {
    let q = ctx.q() as usize;
    let res: Vec<(Option<f64>, Option<f64>)> = per_sample(samples, |k| {
        let i = k as usize % (q - 1);
        let (a, s) = strip_point(ctx, i, &mut sample_rng(seed, k), 0.0);
        let Ok((a2, s2)) = farey_ext_step(ctx, &a, &s) else {
            return (Some(f64::INFINITY), Some(f64::INFINITY));
        };
        let target = q - 2 - i;
        let index = if h_index(ctx, &a2, &s2).ok() == Some(target) { 0.0 } else { 1.0 };
        (Some(outside_h(ctx, target, a2, s2)), Some(index))
    });
    let (dist, index): (Vec<_>, Vec<_>) = res.into_iter().unzip();
    vec![
        Check::from_residuals("image-in-opposite-strip", Suite::Markov.tolerance(), &dist),
        Check::from_residuals("strip-index", 0.0, &index),
    ]
}

/// Central-difference Jacobian determinant of `f` at `(a, s)` with steps
/// `ha`, `hs`, or `None` if `f` is undefined somewhere on the stencil.
pub fn fd_jacobian(f: impl Fn(f64, f64) -> Option<(f64, f64)>, a: f64, s: f64, ha: f64, hs: f64) -> Option<f64> {
    let (ap, am) = (f(a + ha, s)?, f(a - ha, s)?);
    let (sp, sm) = (f(a, s + hs)?, f(a, s - hs)?);
    let da = ((ap.0 - am.0) / (2.0 * ha), (ap.1 - am.1) / (2.0 * ha));
    let ds = ((sp.0 - sm.0) / (2.0 * hs), (sp.1 - sm.1) / (2.0 * hs));
    Some(da.0 * ds.1 - da.1 * ds.0)
}

/// Largest acceleration count for which the Gauss extension's Jacobian is
/// checked by finite differences.
const GAUSS_FD_MAX_STEPS: usize = 8;

fn jacobian_suite(ctx: &HeckeContext, samples: usize, seed: u64) -> Vec<Check> {
    let q = ctx.q() as usize;
    let res: Vec<[Option<f64>; 4]> = per_sample(samples, |k| {
        let mut rng = sample_rng(seed, k);
        let i = k as usize % (q - 1);
        let (a, s) = strip_point(ctx, i, &mut rng, 1e-3);
        let dev = |j: Option<f64>| j.map(|j| (j - 1.0).abs());

        let v_to_s = dev(fd_jacobian(|x, y| side_map_v_to_s(ctx, i, &x, &y).ok(), a, s, 1e-6, 1e-6));
        let s_to_h = side_map_v_to_s(ctx, i, &a, &s).ok().and_then(|(alpha, sigma)| {
            dev(fd_jacobian(|x, y| side_map_s_to_h(ctx, i, &x, &y).ok(), alpha, sigma, 1e-6, 1e-6))
        });
        // The s step scales with s so rounding in s' stays below the tolerance.
        let (ha, hs) = (1e-5 * a.min(1.0 - a), 1e-5 * (1.0 + s));
        let same_branch = |x: f64| branch_of(ctx, &x).ok() == Some(i);
        let farey = dev(fd_jacobian(
            |x, y| same_branch(x).then(|| farey_ext_step(ctx, &x, &y).ok()).flatten(),
            a,
            s,
            ha,
            hs,
        ));
        let gauss = match gauss_ext_step(ctx, &a, &s) {
            Ok((_, _, n)) if n <= GAUSS_FD_MAX_STEPS => dev(fd_jacobian(
                |x, y| {
                    let (x2, y2, m) = gauss_ext_step(ctx, &x, &y).ok()?;
                    (m == n && same_branch(x) && in_section(ctx, &x, &y)).then_some((x2, y2))
                },
                a,
                s,
                ha,
                hs,
            )),
            _ => None,
        };
        [v_to_s, s_to_h, farey, gauss]
    });
    let tol = Suite::Jacobian.tolerance();
    let column = |c: usize| res.iter().map(|r| r[c]).collect::<Vec<_>>();
    vec![
        Check::from_residuals("side-map-v-to-s", tol, &column(0)),
        Check::from_residuals("side-map-s-to-h", tol, &column(1)),
        Check::from_residuals("farey-extension", tol, &column(2)),
        Check::from_residuals("gauss-extension", tol, &column(3)),
    ]
}

fn transfer(ctx: &HeckeContext, samples: usize, seed: u64) -> Result<Vec<Check>> {
    let xs: Vec<f64> = per_sample(samples, |k| sample_rng(seed, k).gen_range(1e-9..1.0));
    let res = xs
        .par_iter()
        .map(|x| farey_transfer_check(ctx, std::slice::from_ref(x)).map(Some))
        .collect::<Result<Vec<_>>>()?;
    Ok(vec![Check::from_residuals("farey-density-fixed", Suite::Transfer.tolerance(), &res)])
}

/// Bins of the Birkhoff histogram.
pub const HISTOGRAM_BINS: usize = 64;
/// Bins with fewer expected hits than this are left out of the sup norm.
pub const HISTOGRAM_MIN_EXPECTED: f64 = 100.0;

fn histogram(ctx: &HeckeContext, samples: usize, seed: u64) -> Result<Vec<Check>> {
    let a0: f64 = sample_rng(seed, 0).gen_range(0.0..1.0);
    let hist = birkhoff_histogram(ctx, MapKind::Gauss, 1.0 - a0, samples, HISTOGRAM_BINS)?;
    let d = histogram_distance(ctx, &hist, HISTOGRAM_MIN_EXPECTED);
    let mut check = Check::from_residuals("gauss-density-sup", Suite::Histogram.tolerance(), &[Some(d)]);
    if hist.truncated {
        check.violations += 1;
        check.passed = false;
    }
    Ok(vec![check])
}

fn slabs(ctx: &HeckeContext, samples: usize, seed: u64) -> Vec<Check> {
    let r = slab_partition_check(ctx, samples, seed);
    let single = |name: &str, residual: f64, passed: bool| Check {
        name: name.into(),
        samples: r.samples,
        skipped: 0,
        max_residual: residual,
        tolerance: 0.0,
        violations: usize::from(!passed),
        passed,
    };
    let mut out = vec![
        Check {
            name: "multiplicity-one".into(),
            samples: r.samples,
            skipped: 0,
            max_residual: (r.uncovered + r.multiply_covered) as f64,
            tolerance: 0.0,
            violations: r.uncovered + r.multiply_covered,
            passed: r.uncovered + r.multiply_covered == 0,
        },
        single("roof-gap", r.max_gap_residual, r.max_gap_residual == 0.0 && r.min_gap > 0.0),
    ];
    out.extend(r.vertex_checks.iter().map(|c| single(c.name, if c.passed { 0.0 } else { 1.0 }, c.passed)));
    out
}
