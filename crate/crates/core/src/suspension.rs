//! The suspension `S𝒫^q` over the Stern–Brocot polygon: the map Φ from
//! dot-product-one pairs to `SL(2, R)`, the polygon itself, its slab tiling,
//! the section `𝖲` with its strips `𝖵_i`, `𝖧_i`, and the side maps
//! `𝖵_i → 𝖲_i → 𝖧_{q−2−i}`.

use std::cmp::Ordering;

use serde::Serialize;

use crate::algebra::{dot, wedge, Mat2, Scalar, Vec2};
use crate::error::{Error, Result};
use crate::hecke::{HeckeContext, HeckeScalar, IdentityCheck};

/// Slack on `u · v = 1` for float pairs.
pub const PAIR_EPS: f64 = 1e-9;

/// A pair `(u, v)` of first-quadrant vectors with `u · v = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairedPoint {
    pub u: Vec2<f64>,
    pub v: Vec2<f64>,
}

impl PairedPoint {
    pub fn new(u: Vec2<f64>, v: Vec2<f64>) -> Result<Self> {
        let d = dot(&u, &v);
        if (d - 1.0).abs() > PAIR_EPS {
            return Err(Error::NotPaired(d));
        }
        Ok(PairedPoint { u, v })
    }

    pub fn pairing(&self) -> f64 {
        dot(&self.u, &self.v)
    }
}

/// `Φ((a, b), (c, d)) = [[a, b], [−d, c]]`.
pub fn phi(pair: &PairedPoint) -> Result<Mat2<f64>> {
    let d = pair.pairing();
    if (d - 1.0).abs() > PAIR_EPS {
        return Err(Error::NotPaired(d));
    }
    Ok(Mat2::new(pair.u.x, pair.u.y, -pair.v.y, pair.v.x))
}

/// Coordinates `((a, b), s)` of `h_s g_{a,b}`, with `s ∈ [0, 1/(ab))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SuspensionCoord {
    pub a: f64,
    pub b: f64,
    pub s: f64,
}

impl SuspensionCoord {
    pub fn new(a: f64, b: f64, s: f64) -> Result<Self> {
        if !(a > 0.0 && b >= 0.0) {
            return Err(Error::Domain { value: a, domain: "(a, b) in the first quadrant" });
        }
        if !(s >= 0.0 && s * a * b < 1.0) {
            return Err(Error::Domain { value: s, domain: "s in [0, 1/(ab))" });
        }
        Ok(SuspensionCoord { a, b, s })
    }
}

/// `v = (1 − abs)(1/a, 0) + abs(0, 1/b) = ((1 − abs)/a, as)`.
pub fn coord_to_pair(c: &SuspensionCoord) -> PairedPoint {
    let abs = c.a * c.b * c.s;
    PairedPoint { u: Vec2::new(c.a, c.b), v: Vec2::new((1.0 - abs) / c.a, c.a * c.s) }
}

/// `g_t Φ(u, v) = Φ(e^t u, e^{−t} v)`.
pub fn geodesic_act(t: f64, pair: &PairedPoint) -> PairedPoint {
    PairedPoint { u: pair.u.scale(&t.exp()), v: pair.v.scale(&(-t).exp()) }
}

/// Membership in `𝒫^q`: the convex hull of `w_0, …, w_{q−1}` without the
/// closed segment `[w_0, w_{q−1}]`.
pub fn polygon_contains<T: HeckeScalar>(ctx: &HeckeContext, p: &Vec2<T>) -> bool {
    let data = ctx.data::<T>();
    let q = ctx.q() as usize;
    let tol = ctx.eps * (1.0 + p.to_f64().norm());
    for i in 0..q - 1 {
        let edge = data.w(i + 1).clone() - data.w(i).clone();
        if wedge(&edge, &(p.clone() - data.w(i).clone())).sign_tol(tol) == Ordering::Less {
            return false;
        }
    }
    let closing = data.w(0).clone() - data.w(q - 1).clone();
    wedge(&closing, &(p.clone() - data.w(q - 1).clone())).sign_tol(tol) == Ordering::Greater
}

/// `R_{q,i}(a, b) = y_i / (a · (a, b)·w_i)`; `R_{q,0} = 0`.
pub fn roof_component<T: HeckeScalar>(ctx: &HeckeContext, i: usize, a: &T, b: &T) -> Result<T> {
    let w = ctx.data::<T>().w(i);
    let d = a.clone() * w.x.clone() + b.clone() * w.y.clone();
    let den = a.clone() * d;
    if den.sign_tol(0.0) != Ordering::Greater {
        return Err(Error::DivisionByZero);
    }
    Ok(w.y.clone() / den)
}

/// Right endpoint `x_i / (x_i + y_i)` of the branch interval `I_i`.
pub fn branch_boundary<T: HeckeScalar>(ctx: &HeckeContext, i: usize) -> T {
    ctx.data::<T>().boundary(i).clone()
}

fn sign_vs_boundary<T: HeckeScalar>(ctx: &HeckeContext, a: &T, i: usize) -> Ordering {
    ctx.data::<T>().boundary(i).cmp_tol(a, ctx.eps)
}

pub(crate) fn check_unit<T: HeckeScalar>(ctx: &HeckeContext, a: &T) -> Result<()> {
    if a.sign_tol(0.0) != Ordering::Greater || a.cmp_tol(&a.one_like(), ctx.eps) == Ordering::Greater {
        return Err(Error::Domain { value: a.to_f64(), domain: "a in (0, 1]" });
    }
    Ok(())
}

/// The branch `i` with `a ∈ I_i = (b_{i+1}, b_i]`, intervals closed from the
/// right. This is also the index of the strip `𝖵_i` containing `(a, s)`.
pub fn branch_of<T: HeckeScalar>(ctx: &HeckeContext, a: &T) -> Result<usize> {
    check_unit(ctx, a)?;
    let q = ctx.q() as usize;
    // b_i decreases in i: find the largest i with a <= b_i.
    let (mut lo, mut hi) = (0, q - 2);
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if sign_vs_boundary(ctx, a, mid) != Ordering::Less {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo)
}

pub(crate) fn is_one<T: HeckeScalar>(ctx: &HeckeContext, a: &T) -> bool {
    a.cmp_tol(&a.one_like(), ctx.eps) == Ordering::Equal
}

/// Membership in `𝖲`: `0 < a < 1, 0 ≤ s < 1/(a(1−a))`, or `a = 1, 0 ≤ s < λ`.
pub fn in_section<T: HeckeScalar>(ctx: &HeckeContext, a: &T, s: &T) -> bool {
    if check_unit(ctx, a).is_err() || s.sign_tol(ctx.eps) == Ordering::Less {
        return false;
    }
    let one = a.one_like();
    let tol = ctx.eps * (1.0 + s.abs_f64());
    if is_one(ctx, a) {
        (s.clone() - ctx.data::<T>().lambda.clone()).sign_tol(tol) == Ordering::Less
    } else {
        (s.clone() * a.clone() * (one.clone() - a.clone()) - one).sign_tol(tol) == Ordering::Less
    }
}

/// Index `i` of the horizontal strip `𝖧_i ∋ (a, s)`, i.e. the number of
/// `j ∈ {1, …, q−2}` with `s ≥ R_{q,j}(a, 1−a)`.
pub fn h_index<T: HeckeScalar>(ctx: &HeckeContext, a: &T, s: &T) -> Result<usize> {
    if !in_section(ctx, a, s) {
        return Err(Error::OutsideSection(a.to_f64(), s.to_f64()));
    }
    let data = ctx.data::<T>();
    let b = a.one_like() - a.clone();
    let tol = ctx.eps * (1.0 + s.abs_f64());
    let q = ctx.q() as usize;
    Ok((1..=q - 2)
        .filter(|&j| {
            let w = data.w(j);
            let d = a.clone() * w.x.clone() + b.clone() * w.y.clone();
            (s.clone() * a.clone() * d - w.y.clone()).sign_tol(tol) != Ordering::Less
        })
        .count())
}

/// `ρ_i(a) = (x_{i+1} − y_i) a + (x_i − x_{i+1})`, so the geodesic time from
/// `(a, 1 − a)` to the side `[w_i, w_{i+1}]` is `−log ρ_i(a)`. `a` must lie
/// in the closure of `I_i`.
pub fn rho<T: HeckeScalar>(ctx: &HeckeContext, i: usize, a: &T) -> Result<T> {
    let q = ctx.q() as usize;
    if i > q - 2 {
        return Err(Error::IndexOutOfRange { index: i, q: ctx.q() });
    }
    check_unit(ctx, a)?;
    if sign_vs_boundary(ctx, a, i) == Ordering::Less
        || sign_vs_boundary(ctx, a, i + 1) == Ordering::Greater
    {
        return Err(Error::BranchMismatch { branch: i, a: a.to_f64() });
    }
    Ok(rho_unchecked(ctx, i, a))
}

pub(crate) fn rho_unchecked<T: HeckeScalar>(ctx: &HeckeContext, i: usize, a: &T) -> T {
    let data = ctx.data::<T>();
    let (wi, wn) = (data.w(i), data.w(i + 1));
    (wn.x.clone() - wi.y.clone()) * a.clone() + (wi.x.clone() - wn.x.clone())
}

/// Membership in the chart `𝖲_i`: `α ∈ (0, 1)` for `i = 0` and `(0, 1]`
/// otherwise, `σ ∈ [0, 1/(XY))` with `(X, Y) = α w_i + (1 − α) w_{i+1}`.
pub fn in_side_chart<T: HeckeScalar>(ctx: &HeckeContext, i: usize, alpha: &T, sigma: &T) -> bool {
    if i > ctx.q() as usize - 2 {
        return false;
    }
    let one = alpha.one_like();
    let upper = (alpha.clone() - one.clone()).sign_tol(ctx.eps);
    let alpha_ok = alpha.sign_tol(0.0) == Ordering::Greater
        && if i == 0 { upper == Ordering::Less } else { upper != Ordering::Greater };
    if !alpha_ok || sigma.sign_tol(ctx.eps) == Ordering::Less {
        return false;
    }
    let p = chart_point(ctx, i, alpha);
    let tol = ctx.eps * (1.0 + sigma.abs_f64());
    (sigma.clone() * p.x * p.y - one).sign_tol(tol) == Ordering::Less
}

/// `α w_i + (1 − α) w_{i+1}`.
pub fn chart_point<T: HeckeScalar>(ctx: &HeckeContext, i: usize, alpha: &T) -> Vec2<T> {
    let data = ctx.data::<T>();
    let beta = alpha.one_like() - alpha.clone();
    data.w(i).scale(alpha) + data.w(i + 1).scale(&beta)
}

/// The hit map `𝖵_i → 𝖲_i`: `σ = s ρ²` and `α` solving
/// `α w_i + (1 − α) w_{i+1} = (a, 1 − a)/ρ`, read off the `x` coordinate
/// unless `x_i = x_{i+1}`, in which case the `y` coordinate is used.
pub fn side_map_v_to_s<T: HeckeScalar>(ctx: &HeckeContext, i: usize, a: &T, s: &T) -> Result<(T, T)> {
    if !in_section(ctx, a, s) {
        return Err(Error::OutsideSection(a.to_f64(), s.to_f64()));
    }
    let branch = branch_of(ctx, a)?;
    if branch != i {
        return Err(Error::BranchMismatch { branch: i, a: a.to_f64() });
    }
    Ok(v_to_s_unchecked(ctx, i, a, s))
}

pub(crate) fn v_to_s_unchecked<T: HeckeScalar>(ctx: &HeckeContext, i: usize, a: &T, s: &T) -> (T, T) {
    let data = ctx.data::<T>();
    let (wi, wn) = (data.w(i), data.w(i + 1));
    let r = rho_unchecked(ctx, i, a);
    let sigma = s.clone() * r.clone() * r.clone();
    let exact = ctx.exact();
    let alpha = if exact.w(i).x == exact.w(i + 1).x {
        ((a.one_like() - a.clone()) / r - wn.y.clone()) / (wi.y.clone() - wn.y.clone())
    } else {
        (a.clone() / r - wn.x.clone()) / (wi.x.clone() - wn.x.clone())
    };
    (alpha, sigma)
}

/// The gluing map `𝖲_i → 𝖧_{q−2−i}`: `a = α` and
/// `s = σ + x_{i+1} / (α (α x_i + (1 − α) x_{i+1}))`.
pub fn side_map_s_to_h<T: HeckeScalar>(
    ctx: &HeckeContext,
    i: usize,
    alpha: &T,
    sigma: &T,
) -> Result<(T, T)> {
    if !in_side_chart(ctx, i, alpha, sigma) {
        return Err(Error::Domain { value: alpha.to_f64(), domain: "side chart S_i" });
    }
    Ok(s_to_h_unchecked(ctx, i, alpha, sigma))
}

pub(crate) fn s_to_h_unchecked<T: HeckeScalar>(ctx: &HeckeContext, i: usize, alpha: &T, sigma: &T) -> (T, T) {
    let data = ctx.data::<T>();
    let x = chart_point(ctx, i, alpha).x;
    let shift = data.w(i + 1).x.clone() / (alpha.clone() * x);
    (alpha.clone(), sigma.clone() + shift)
}

/// Outcome of the sampled slab-tiling check and the exact vertex identities.
#[derive(Clone, Debug, Serialize)]
pub struct SlabReport {
    pub q: u32,
    pub samples: usize,
    pub uncovered: usize,
    pub multiply_covered: usize,
    /// Number of samples landing in each piece: the corner triangle first,
    /// then the images of slab bases `1, …, q−1`.
    pub piece_counts: Vec<usize>,
    /// Largest `|R_{q,i} − R_{q,i−1} − 1/(d_i d_{i−1})|` over covered samples.
    pub max_gap_residual: f64,
    /// Smallest return-time gap seen.
    pub min_gap: f64,
    pub vertex_checks: Vec<IdentityCheck>,
    pub passed: bool,
}

/// The corner triangle `a ≤ 1, b ≤ 1, a + b > 1`.
fn in_corner<T: HeckeScalar>(p: &Vec2<T>) -> bool {
    let one = p.x.one_like();
    (p.x.clone() - one.clone()).sign_tol(0.0) != Ordering::Greater
        && (p.y.clone() - one.clone()).sign_tol(0.0) != Ordering::Greater
        && (p.x.clone() + p.y.clone() - one).sign_tol(0.0) == Ordering::Greater
}

/// Base of `slab_i`: `0 < a ≤ 1, 1 − λa < b ≤ 1 − a`, and for `i ≥ 2` also
/// `(a, b)·w_{i−1} > 1`.
fn in_slab_base<T: HeckeScalar>(ctx: &HeckeContext, i: usize, p: &Vec2<T>) -> bool {
    let data = ctx.data::<T>();
    let one = p.x.one_like();
    let (a, b) = (&p.x, &p.y);
    let inside = a.sign_tol(0.0) == Ordering::Greater
        && (a.clone() - one.clone()).sign_tol(0.0) != Ordering::Greater
        && (b.clone() - one.clone() + data.lambda.clone() * a.clone()).sign_tol(0.0) == Ordering::Greater
        && (a.clone() + b.clone() - one.clone()).sign_tol(0.0) != Ordering::Greater;
    inside && (i < 2 || (dot(p, data.w(i - 1)) - one).sign_tol(0.0) == Ordering::Greater)
}

/// The pieces of the tiling of `𝒫^q` containing `p`: `(0, p)` for the
/// corner triangle and `(i, preimage)` for the image of slab base `i` under
/// `(M_{i−1})^T`.
pub fn slab_cover<T: HeckeScalar>(ctx: &HeckeContext, p: &Vec2<T>) -> Vec<(usize, Vec2<T>)> {
    let data = ctx.data::<T>();
    let mut out = Vec::new();
    if in_corner(p) {
        out.push((0, p.clone()));
    }
    for i in 1..ctx.q() as usize {
        let pre = data.m_inv(i - 1).transpose().apply(p);
        if in_slab_base(ctx, i, &pre) {
            out.push((i, pre));
        }
    }
    out
}

fn vertex_identities(ctx: &HeckeContext) -> Vec<IdentityCheck> {
    let data = ctx.exact();
    let q = ctx.q() as usize;
    let one = data.lambda.one_like();
    let zero = data.lambda.zero_like();
    let lambda = data.lambda.clone();
    let a_vertex = |i: usize| {
        let w = data.w(i - 1);
        Vec2::new(one.clone(), (one.clone() - w.x.clone()) / w.y.clone())
    };
    let b_vertex = |i: usize| {
        if i == 2 {
            return Vec2::new(zero.clone(), one.clone());
        }
        let w = data.w(i - 1);
        let den = lambda.clone() * w.y.clone() - w.x.clone();
        Vec2::new((w.y.clone() - one.clone()) / den.clone(), (lambda.clone() - w.x.clone()) / den)
    };
    let mt = |i: usize| data.m(i).transpose();
    let mut checks = Vec::new();
    let mut push = |name: &'static str, ok: bool, detail: String| {
        checks.push(IdentityCheck { name, passed: ok, detail });
    };

    let base1 = [
        (Vec2::new(one.clone(), one.clone() - lambda.clone()), Vec2::new(one.clone(), one.clone())),
        (Vec2::new(one.clone(), zero.clone()), data.w(q - 2).clone()),
        (Vec2::new(zero.clone(), one.clone()), data.w(q - 1).clone()),
    ];
    let ok = base1.iter().all(|(v, img)| mt(0).apply(v) == *img);
    push("slab 1 vertices", ok, "(M_0)^T maps (1,1-λ), (1,0), (0,1) to (1,1), w_{q-2}, w_{q-1}".into());

    let mut ok = true;
    for i in 2..q {
        let img = mt(i - 1).apply(&a_vertex(i));
        let w = data.w(i - 1);
        ok &= img == Vec2::new(one.clone(), (data.w(i).y.clone() - one.clone()) / w.y.clone());
        ok &= mt(i - 1).apply(&Vec2::new(one.clone(), zero.clone())) == *data.w(q - 1 - i);
        ok &= mt(i - 1).apply(&Vec2::new(zero.clone(), one.clone())) == *data.w(q - i);
    }
    push("A_i images", ok, "(M_{i-1})^T A_i = (1, (y_i - 1)/y_{i-1}); (1,0), (0,1) go to w_{q-1-i}, w_{q-i}".into());

    let mut ok = true;
    for i in 3..q {
        let img = mt(i - 1).apply(&b_vertex(i));
        let expected = Vec2::new(one.clone(), (data.w(i - 1).y.clone() - one.clone()) / data.w(i - 2).y.clone());
        ok &= img == expected && img == mt(i - 2).apply(&a_vertex(i - 1));
    }
    push("B_i images", ok, "(M_{i-1})^T B_i = (M_{i-2})^T A_{i-1} on a = 1, for i >= 3".into());

    let img = mt(q - 2).apply(&a_vertex(q - 1));
    push(
        "last A vertex",
        img == Vec2::new(one.clone(), zero.clone()) && img == *data.w(0),
        format!("(M_{{q-2}})^T A_{{q-1}} = {img:?}, expected (1, 0) = w_0"),
    );
    let img = mt(1).apply(&b_vertex(2));
    push(
        "first B vertex",
        img == *data.w(q - 2) && img == Vec2::new(one.clone(), lambda.clone()),
        format!("(M_1)^T B_2 = {img:?}, expected (1, λ) = w_{{q-2}}"),
    );
    checks
}

/// Exact sampled check that the corner triangle and the images of the slab
/// bases under `(M_{i−1})^T` tile `𝒫^q` with multiplicity one, that
/// `R_{q,i} − R_{q,i−1} = 1/(d_i d_{i−1}) > 0` on each base, and that the
/// vertex identities of the tiling hold exactly. Samples are dyadic points
/// of `𝒫^q` handled in exact arithmetic.
pub fn slab_partition_check(ctx: &HeckeContext, samples: usize, seed: u64) -> SlabReport {
    use rayon::prelude::*;

    let data = ctx.exact();
    let q = ctx.q() as usize;
    let bound = data.ws().iter().map(|w| w.x.to_f64().max(w.y.to_f64())).fold(1.0, f64::max).ceil() as i64;
    let per_sample: Vec<(Vec<usize>, f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = crate::sampling::sample_rng(seed, k as u64);
            let p = loop {
                let p = Vec2::new(
                    crate::sampling::dyadic(ctx, &mut rng, 0, bound),
                    crate::sampling::dyadic(ctx, &mut rng, 0, bound),
                );
                if polygon_contains(ctx, &p) {
                    break p;
                }
            };
            let cover = slab_cover(ctx, &p);
            let (mut residual, mut min_gap) = (0.0f64, f64::INFINITY);
            for (i, pre) in &cover {
                if *i == 0 {
                    continue;
                }
                let (a, b) = (&pre.x, &pre.y);
                let gap = roof_component(ctx, *i, a, b).unwrap() - roof_component(ctx, *i - 1, a, b).unwrap();
                let expected = if *i == 1 {
                    (a.clone() * dot(pre, data.w(1))).inverse().unwrap()
                } else {
                    (dot(pre, data.w(*i)) * dot(pre, data.w(*i - 1))).inverse().unwrap()
                };
                residual = residual.max((gap.clone() - expected).to_f64().abs());
                min_gap = min_gap.min(gap.to_f64());
            }
            (cover.iter().map(|(i, _)| *i).collect(), residual, min_gap)
        })
        .collect();

    let mut piece_counts = vec![0; q];
    let (mut uncovered, mut multiply_covered) = (0, 0);
    let (mut max_gap_residual, mut min_gap) = (0.0f64, f64::INFINITY);
    for (pieces, residual, gap) in &per_sample {
        match pieces.len() {
            0 => uncovered += 1,
            1 => piece_counts[pieces[0]] += 1,
            _ => multiply_covered += 1,
        }
        max_gap_residual = max_gap_residual.max(*residual);
        min_gap = min_gap.min(*gap);
    }
    let vertex_checks = vertex_identities(ctx);
    let passed = uncovered == 0
        && multiply_covered == 0
        && max_gap_residual == 0.0
        && min_gap > 0.0
        && vertex_checks.iter().all(|c| c.passed);
    SlabReport {
        q: ctx.q(),
        samples,
        uncovered,
        multiply_covered,
        piece_counts,
        max_gap_residual,
        min_gap,
        vertex_checks,
        passed,
    }
}
