//! The G_q-Farey triangle `𝒯^q`, its partition into `𝒯_i^q`, the roof
//! function and the G_q-BCZ map, with a first-return oracle that works from
//! an enumeration of `Λ_q`.

use std::sync::OnceLock;

use serde::Serialize;

use crate::algebra::{dot, Vec2};
use crate::error::{Error, Result};
use crate::hecke::{enumerate_lambda_q_checked, HeckeContext};

/// A point `(a, b)` of the plane, meant to lie in `𝒯^q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrianglePoint {
    pub a: f64,
    pub b: f64,
}

impl TrianglePoint {
    pub fn new(a: f64, b: f64) -> Self {
        TrianglePoint { a, b }
    }

    fn vec(&self) -> Vec2<f64> {
        Vec2::new(self.a, self.b)
    }
}

/// The strip `S_τ = {0 < x ≤ τ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Strip {
    pub tau: f64,
}

impl Strip {
    pub fn new(tau: f64) -> Result<Self> {
        if tau > 0.0 {
            Ok(Strip { tau })
        } else {
            Err(Error::Domain { value: tau, domain: "strip width tau > 0" })
        }
    }

    pub fn contains(&self, x: f64, eps: f64) -> bool {
        x > eps && x <= self.tau + eps
    }
}

/// `0 < a ≤ 1` and `1 − λ a < b ≤ 1`, with ε slack on each side.
pub fn in_triangle(ctx: &HeckeContext, p: TrianglePoint) -> bool {
    let eps = ctx.eps;
    p.a > 0.0 && p.a <= 1.0 + eps && p.b <= 1.0 + eps && p.b > 1.0 - ctx.lambda() * p.a - eps
}

fn check(ctx: &HeckeContext, p: TrianglePoint) -> Result<()> {
    if in_triangle(ctx, p) {
        Ok(())
    } else {
        Err(Error::OutsideTriangle(p.a, p.b))
    }
}

/// `(a, b) · w_i` for `i = 0..=q`.
fn pairings(ctx: &HeckeContext, p: TrianglePoint) -> Vec<f64> {
    let data = ctx.float();
    (0..=ctx.q() as usize).map(|i| dot(&p.vec(), data.w(i))).collect()
}

fn index_from(ctx: &HeckeContext, p: TrianglePoint, d: &[f64]) -> Result<usize> {
    let q = ctx.q() as usize;
    (2..q)
        .find(|&i| d[i] <= 1.0 + ctx.eps)
        .ok_or_else(|| Error::Consistency(format!("no partition index for ({}, {})", p.a, p.b)))
}

/// The unique `i ∈ {2, …, q−1}` with `(a, b)·w_{i−1} > 1 ≥ (a, b)·w_i`.
pub fn partition_index(ctx: &HeckeContext, p: TrianglePoint) -> Result<usize> {
    check(ctx, p)?;
    index_from(ctx, p, &pairings(ctx, p))
}

/// Return time `R_q(a, b) = y_i / (a · (a, b)·w_i)`.
pub fn roof(ctx: &HeckeContext, p: TrianglePoint) -> Result<f64> {
    check(ctx, p)?;
    let d = pairings(ctx, p);
    let i = index_from(ctx, p, &d)?;
    Ok(ctx.float().w(i).y / (p.a * d[i]))
}

/// The G_q-BCZ map.
///
/// When float rounding puts the floor one short, the image lands on the
/// excluded edge `b = 1 − λ a`; that case is moved to `b = 1`.
pub fn bcz_map(ctx: &HeckeContext, p: TrianglePoint) -> Result<TrianglePoint> {
    check(ctx, p)?;
    let lambda = ctx.lambda();
    let d = pairings(ctx, p);
    let i = index_from(ctx, p, &d)?;
    let (di, dn) = (d[i], d[i + 1]);
    let k = ((1.0 - dn) / (lambda * di)).floor();
    let mut image = TrianglePoint::new(di, dn + k * lambda * di);
    if image.b <= 1.0 - lambda * image.a + ctx.eps {
        image.b = dn + (k + 1.0) * lambda * di;
    }
    if !in_triangle(ctx, image) {
        return Err(Error::Consistency(format!(
            "BCZ image ({}, {}) of ({}, {}) left the triangle",
            image.a, image.b, p.a, p.b
        )));
    }
    Ok(image)
}

/// Iterate [`bcz_map`] `n` times, returning the orbit with the starting point.
pub fn bcz_orbit(ctx: &HeckeContext, p: TrianglePoint, n: usize) -> Result<Vec<TrianglePoint>> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(p);
    let mut cur = p;
    for _ in 0..n {
        cur = bcz_map(ctx, cur)?;
        out.push(cur);
    }
    Ok(out)
}

/// A finite piece of `Λ_q` in float coordinates.
#[derive(Clone, Debug)]
pub struct LatticeSample {
    pub points: Vec<Vec2<f64>>,
    pub norm_bound: f64,
    pub word_bound: usize,
    /// Whether every point with sup norm `≤ norm_bound` is present.
    pub complete: bool,
}

impl LatticeSample {
    pub fn enumerate(ctx: &HeckeContext, norm_bound: f64, word_bound: usize) -> Self {
        let (points, complete) = enumerate_lambda_q_checked::<f64>(ctx, norm_bound, word_bound);
        LatticeSample { points, norm_bound, word_bound, complete }
    }
}

/// Everything the oracle finds at the first return.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FirstReturn {
    pub time: f64,
    pub next: TrianglePoint,
    /// The lattice vector that becomes horizontal.
    pub vector: Vec2<f64>,
    /// The lattice vector whose image at return time is `(b', 1/a')`.
    pub partner: Vec2<f64>,
}

/// The default sup-norm bound `4 · max(1, 1/a)`.
pub fn default_norm_bound(p: TrianglePoint) -> f64 {
    4.0 * (1.0f64).max(1.0 / p.a)
}

/// Word-length cap for an enumeration up to `norm_bound`. The search region
/// already bounds the exploration; translation chains inside it have length
/// up to a few times the region's width.
pub fn default_word_bound(norm_bound: f64) -> usize {
    (16.0 * norm_bound) as usize + 64
}

/// Brute-force first return of `h_s g_{a,b} Λ_q` to a horizontal vector in
/// `S_1`, computed on a fresh enumeration.
pub fn first_return_oracle(
    ctx: &HeckeContext,
    p: TrianglePoint,
    norm_bound: f64,
    word_bound: usize,
) -> Result<(f64, TrianglePoint)> {
    let sample = LatticeSample::enumerate(ctx, norm_bound, word_bound);
    let r = first_return_in(ctx, &sample, p)?;
    Ok((r.time, r.next))
}

/// First return computed on a precomputed [`LatticeSample`].
///
/// Among `g_{a,b} u = (X, Y)` with `0 < X ≤ 1` and `Y > 0` the least slope
/// `Y/X` is the return time `R`. At time `R` the lattice is
/// `g_{a',b'} Λ_q` with `a' = X`; `b'` is the first coordinate of the unique
/// vector at height `1/a'` in the window `(1 − λ a', 1]`. Every lattice
/// vector that could matter is checked to lie within the sample, so a
/// returned answer is never a truncation artifact.
pub fn first_return_in(
    ctx: &HeckeContext,
    sample: &LatticeSample,
    p: TrianglePoint,
) -> Result<FirstReturn> {
    check(ctx, p)?;
    if !sample.complete {
        return Err(Error::IncreaseBounds("word bound"));
    }
    let (a, b) = (p.a, p.b);
    let lambda = ctx.lambda();
    let tol = 1e-9;
    let image = |u: &Vec2<f64>| (a * u.x + b * u.y, u.y / a);

    let mut best: Option<(f64, Vec2<f64>, f64)> = None;
    for u in &sample.points {
        let (x, y) = image(u);
        if x <= tol || x > 1.0 + tol || y <= tol {
            continue;
        }
        let slope = y / x;
        if best.as_ref().map_or(true, |(s, _, _)| slope < *s) {
            best = Some((slope, u.clone(), x));
        }
    }
    let (time, vector, a_next) = best.ok_or(Error::IncreaseBounds("no vector in the strip"))?;
    let needed = (a * time).max(1.0 / a + b.abs() * time);
    if needed > sample.norm_bound {
        return Err(Error::IncreaseBounds("norm bound for the return vector"));
    }

    let height = 1.0 / a_next;
    let lo = 1.0 - lambda * a_next;
    let mut partner: Option<(f64, Vec2<f64>)> = None;
    for u in &sample.points {
        let (x, y) = image(u);
        let y_ret = y - time * x;
        if (y_ret - height).abs() > tol * height.max(1.0) || x <= lo + tol || x > 1.0 + tol {
            continue;
        }
        if partner.as_ref().map_or(true, |(bx, _)| x > *bx) {
            partner = Some((x, u.clone()));
        }
    }
    let needed = (a * (height + time)).max(((1.0 + lambda) + b.abs() * (height + time)) / a);
    let Some((b_next, partner)) = partner else {
        return Err(if needed > sample.norm_bound {
            Error::IncreaseBounds("norm bound for the partner vector")
        } else {
            Error::Consistency(format!("no partner vector for ({a}, {b})"))
        });
    };
    Ok(FirstReturn { time, next: TrianglePoint::new(a_next, b_next), vector, partner })
}

/// First-return oracle over a ladder of enumerations with sup-norm bounds
/// `base · 2^k`, `k < levels`, each built on first use and shared between
/// threads.
pub struct FirstReturnOracle<'a> {
    ctx: &'a HeckeContext,
    base: f64,
    levels: Vec<OnceLock<LatticeSample>>,
}

impl<'a> FirstReturnOracle<'a> {
    pub fn new(ctx: &'a HeckeContext, base: f64, levels: usize) -> Self {
        FirstReturnOracle {
            ctx,
            base,
            levels: (0..levels).map(|_| OnceLock::new()).collect(),
        }
    }

    fn level(&self, k: usize) -> &LatticeSample {
        self.levels[k].get_or_init(|| {
            let norm = self.base * f64::powi(2.0, k as i32);
            LatticeSample::enumerate(self.ctx, norm, default_word_bound(norm))
        })
    }

    /// The certified first return of `p`, using the smallest sufficient level.
    pub fn first_return(&self, p: TrianglePoint) -> Result<FirstReturn> {
        let mut last = Error::IncreaseBounds("no enumeration levels");
        for k in 0..self.levels.len() {
            match first_return_in(self.ctx, self.level(k), p) {
                Err(e @ Error::IncreaseBounds(_)) => last = e,
                other => return other,
            }
        }
        Err(last)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp(a: f64, b: f64) -> TrianglePoint {
        TrianglePoint::new(a, b)
    }

    #[test]
    fn partition_examples() {
        let c3 = HeckeContext::new(3).unwrap();
        let c5 = HeckeContext::new(5).unwrap();
        assert_eq!(partition_index(&c3, tp(0.5, 0.8)).unwrap(), 2);
        assert_eq!(partition_index(&c5, tp(1.0, 1.0)).unwrap(), 4);
        assert_eq!(partition_index(&c5, tp(1.0, -0.5)).unwrap(), 2);
        assert!(matches!(partition_index(&c3, tp(0.5, 0.2)), Err(Error::OutsideTriangle(..))));
        assert!(matches!(partition_index(&c3, tp(0.0, 1.0)), Err(Error::OutsideTriangle(..))));
    }

    #[test]
    fn roof_examples() {
        let c3 = HeckeContext::new(3).unwrap();
        let c5 = HeckeContext::new(5).unwrap();
        assert!((roof(&c3, tp(1.0, 1.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!((roof(&c5, tp(1.0, 1.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!((roof(&c5, tp(1.0, -0.5)).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bcz_examples() {
        let c3 = HeckeContext::new(3).unwrap();
        let c5 = HeckeContext::new(5).unwrap();
        assert_eq!(bcz_map(&c3, tp(1.0, 1.0)).unwrap(), tp(1.0, 1.0));
        assert_eq!(bcz_map(&c3, tp(1.0, 0.5)).unwrap(), tp(0.5, 1.0));
        let img = bcz_map(&c5, tp(1.0, 1.0)).unwrap();
        assert!((img.a - 1.0).abs() < 1e-12);
        assert!((img.b - (c5.lambda() - 1.0)).abs() < 1e-12);
        assert!((img.b - 0.618034).abs() < 1e-6);
    }

    #[test]
    fn oracle_examples() {
        let c3 = HeckeContext::new(3).unwrap();
        let c5 = HeckeContext::new(5).unwrap();
        let (r, next) = first_return_oracle(&c3, tp(1.0, 1.0), 8.0, 40).unwrap();
        assert!((r - 1.0).abs() < 1e-9 && (next.a - 1.0).abs() < 1e-9 && (next.b - 1.0).abs() < 1e-9);
        let (r, next) = first_return_oracle(&c5, tp(1.0, 1.0), 8.0, 60).unwrap();
        assert!((r - 1.0).abs() < 1e-9);
        assert!((next.a - 1.0).abs() < 1e-9 && (next.b - (c5.lambda() - 1.0)).abs() < 1e-9);
        let (r, next) = first_return_oracle(&c3, tp(1.0, 0.5), 8.0, 40).unwrap();
        assert!((r - 2.0).abs() < 1e-9);
        assert!((next.a - 0.5).abs() < 1e-9 && (next.b - 1.0).abs() < 1e-9);
    }

    #[test]
    fn oracle_reports_insufficient_bounds() {
        let c3 = HeckeContext::new(3).unwrap();
        let r = first_return_oracle(&c3, tp(0.05, 0.99), 2.0, 30);
        assert!(matches!(r, Err(Error::IncreaseBounds(_))), "{r:?}");
        let r = first_return_oracle(&c3, tp(1.0, 1.0), 8.0, 2);
        assert!(matches!(r, Err(Error::IncreaseBounds(_))), "{r:?}");
    }
}
