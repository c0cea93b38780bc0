//! The symmetric G_q-Farey map `𝓕_q` on `(0, 1]` and its natural extension
//! `𝓕̃_q` on the section `𝖲`, the accelerated G_q-Gauss map `𝓖_q` with its
//! extension `𝓖̃_q` on `𝖱^q`, their invariant densities, and the numerical
//! checks built on them.
//!
//! Branch intervals `I_i = (b_{i+1}, b_i]` with `b_i = x_i / (x_i + y_i)` are
//! closed from the right throughout.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hecke::{HeckeContext, HeckeScalar};
use crate::suspension::{
    branch_boundary, branch_of, check_unit, h_index, in_section, is_one, rho_unchecked,
    s_to_h_unchecked, v_to_s_unchecked,
};

/// Default cap on the number of `𝓕_q` steps one `𝓖_q` step may take.
pub const MAX_ACCELERATION: usize = 1 << 26;

/// `𝓕_q` restricted to `I_i`, evaluated at any `a` where the denominator
/// `ρ_i(a)` is nonzero.
pub fn farey_branch<T: HeckeScalar>(ctx: &HeckeContext, i: usize, a: &T) -> T {
    let wn = ctx.data::<T>().w(i + 1);
    let num = (wn.x.clone() + wn.y.clone()) * a.clone() - wn.x.clone();
    num / rho_unchecked(ctx, i, a)
}

/// `𝓕_q(a) = ((x_{i+1} + y_{i+1}) a − x_{i+1}) / ρ_i(a)` for `a ∈ I_i`.
pub fn farey<T: HeckeScalar>(ctx: &HeckeContext, a: &T) -> Result<T> {
    let i = branch_of(ctx, a)?;
    Ok(farey_branch(ctx, i, a))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FareyDerivative {
    pub value: f64,
    pub branch: usize,
    /// `a` lies within `eps` of an end of its branch interval; `value` is the
    /// one-sided limit from inside the branch.
    pub at_endpoint: bool,
}

/// `𝓕_q'(a) = 1 / ρ_i(a)²`.
pub fn farey_derivative(ctx: &HeckeContext, a: f64) -> Result<FareyDerivative> {
    let i = branch_of(ctx, &a)?;
    let r = rho_unchecked(ctx, i, &a);
    let near = |j: usize| (a - branch_boundary::<f64>(ctx, j)).abs() <= ctx.eps;
    Ok(FareyDerivative { value: 1.0 / (r * r), branch: i, at_endpoint: near(i) || near(i + 1) })
}

/// The preimage of `x ∈ (0, 1]` under the branch of `𝓕_q` over `I_i`.
pub fn inverse_branch<T: HeckeScalar>(ctx: &HeckeContext, i: usize, x: &T) -> Result<T> {
    if i > ctx.q() as usize - 2 {
        return Err(Error::IndexOutOfRange { index: i, q: ctx.q() });
    }
    check_unit(ctx, x)?;
    let data = ctx.data::<T>();
    let (wi, wn) = (data.w(i), data.w(i + 1));
    let num = wn.x.clone() + x.clone() * (wi.x.clone() - wn.x.clone());
    let den = wn.x.clone() + wn.y.clone() - x.clone() * (wn.x.clone() - wi.y.clone());
    Ok(num / den)
}

/// The `𝓕_q`-invariant density `1 / (a (1 − a))`.
pub fn farey_density<T: HeckeScalar>(a: &T) -> T {
    a.one_like() / (a.clone() * (a.one_like() - a.clone()))
}

/// The terms `ρ(a_i) / 𝓕_q'(a_i)` of the transfer operator applied to
/// `ρ = farey_density` at `x`, one per branch.
pub fn transfer_terms<T: HeckeScalar>(ctx: &HeckeContext, x: &T) -> Result<Vec<T>> {
    (0..=ctx.q() as usize - 2)
        .map(|i| {
            let a = inverse_branch(ctx, i, x)?;
            let r = rho_unchecked(ctx, i, &a);
            Ok(farey_density(&a) * r.clone() * r)
        })
        .collect()
}

/// Largest relative residual `|Σ_i ρ(a_i)/𝓕_q'(a_i) − ρ(x)| / ρ(x)` over
/// `xs ⊂ (0, 1)`. The density blows up at both ends, so the absolute
/// residual only measures float rounding there.
pub fn farey_transfer_check(ctx: &HeckeContext, xs: &[f64]) -> Result<f64> {
    xs.iter().try_fold(0.0f64, |worst, x| {
        let sum: f64 = transfer_terms(ctx, x)?.iter().sum();
        let rho = farey_density(x);
        Ok(worst.max((sum - rho).abs() / rho))
    })
}

/// The same residual for the constant density, which `𝓕_q` does not
/// preserve.
pub fn lebesgue_transfer_residual(ctx: &HeckeContext, xs: &[f64]) -> Result<f64> {
    xs.iter().try_fold(0.0f64, |worst, &x| {
        let mut sum = 0.0;
        for i in 0..=ctx.q() as usize - 2 {
            let r = rho_unchecked(ctx, i, &inverse_branch(ctx, i, &x)?);
            sum += r * r;
        }
        Ok(worst.max((sum - 1.0).abs()))
    })
}

/// One step of the natural extension `𝓕̃_q : 𝖲 → 𝖲`, sending
/// `𝖵_i → 𝖧_{q−2−i}` via the side chart `𝖲_i`.
///
/// `a = 1` is the indifferent fixed point: the geodesic from `(1, 0)` meets
/// the side `[w_0, w_1]` at time zero and the glued point leaves `𝖲`, so it
/// is reported as [`Error::IndifferentFixedPoint`].
pub fn farey_ext_step<T: HeckeScalar>(ctx: &HeckeContext, a: &T, s: &T) -> Result<(T, T)> {
    if !in_section(ctx, a, s) {
        return Err(Error::OutsideSection(a.to_f64(), s.to_f64()));
    }
    if is_one(ctx, a) {
        return Err(Error::IndifferentFixedPoint);
    }
    let i = branch_of(ctx, a)?;
    let (alpha, sigma) = v_to_s_unchecked(ctx, i, a, s);
    Ok(s_to_h_unchecked(ctx, i, &alpha, &sigma))
}

fn accelerated(ctx: &HeckeContext, i: usize) -> bool {
    i == 0 || i == ctx.q() as usize - 2
}

/// `𝓖_q(a)` and the number of `𝓕_q` steps it took, with the default cap.
pub fn gauss<T: HeckeScalar>(ctx: &HeckeContext, a: &T) -> Result<(T, usize)> {
    gauss_with_limit(ctx, a, MAX_ACCELERATION)
}

/// `𝓖_q(a) = 𝓕_q^n(a)` where `n = 1` on the middle branches and
/// `n = min{n : 𝓕_q^n(a) ∉ I_i}` on `I_0` and `I_{q−2}`.
pub fn gauss_with_limit<T: HeckeScalar>(ctx: &HeckeContext, a: &T, limit: usize) -> Result<(T, usize)> {
    check_unit(ctx, a)?;
    if is_one(ctx, a) {
        return Err(Error::IndifferentFixedPoint);
    }
    let i = branch_of(ctx, a)?;
    let mut x = farey_branch(ctx, i, a);
    if !accelerated(ctx, i) {
        return Ok((x, 1));
    }
    let mut n = 1;
    while branch_of(ctx, &x)? == i {
        if is_one(ctx, &x) {
            return Err(Error::IndifferentFixedPoint);
        }
        if n >= limit {
            return Err(Error::AccelerationLimit(limit));
        }
        x = farey_branch(ctx, i, &x);
        n += 1;
    }
    Ok((x, n))
}

/// The acceleration cell `I_{i,n} = {a : n_i(a) = n}` for `i ∈ {0, q−2}`,
/// `n ≥ 1`, as `(left, right]`.
pub fn acceleration_cell<T: HeckeScalar>(ctx: &HeckeContext, i: usize, n: usize) -> Result<(T, T)> {
    let q = ctx.q() as usize;
    if !accelerated(ctx, i) || n == 0 {
        return Err(Error::IndexOutOfRange { index: i, q: ctx.q() });
    }
    let pull = |mut x: T, k: usize| -> Result<T> {
        for _ in 0..k {
            x = inverse_branch(ctx, i, &x)?;
        }
        Ok(x)
    };
    if i == q - 2 {
        let c: T = branch_boundary(ctx, q - 2);
        Ok((pull(c.clone(), n)?, pull(c, n - 1)?))
    } else {
        let c: T = branch_boundary(ctx, 1);
        Ok((pull(c.clone(), n - 1)?, pull(c, n)?))
    }
}

/// Membership in `𝖱^q = 𝖲 ∖ ((𝖧_0 ∩ 𝖵_{q−2}) ∪ (𝖧_{q−2} ∩ 𝖵_0))`.
pub fn in_gauss_domain<T: HeckeScalar>(ctx: &HeckeContext, a: &T, s: &T) -> bool {
    let q = ctx.q() as usize;
    let (Ok(v), Ok(h)) = (branch_of(ctx, a), h_index(ctx, a, s)) else {
        return false;
    };
    !((h == 0 && v == q - 2) || (h == q - 2 && v == 0))
}

/// One step of `𝓖̃_q` and the number of `𝓕̃_q` steps it took.
///
/// The formula `𝓕̃_q^{n(a)}` makes sense on all of `𝖲` and is accepted
/// there; points of `𝖲 ∖ 𝖱^q` are sent into `𝖱^q`.
pub fn gauss_ext_step<T: HeckeScalar>(ctx: &HeckeContext, a: &T, s: &T) -> Result<(T, T, usize)> {
    if !in_section(ctx, a, s) {
        return Err(Error::OutsideSection(a.to_f64(), s.to_f64()));
    }
    let i = branch_of(ctx, a)?;
    let (mut x, mut y) = farey_ext_step(ctx, a, s)?;
    let mut n = 1;
    if accelerated(ctx, i) {
        while branch_of(ctx, &x)? == i {
            if n >= MAX_ACCELERATION {
                return Err(Error::AccelerationLimit(MAX_ACCELERATION));
            }
            (x, y) = farey_ext_step(ctx, &x, &y)?;
            n += 1;
        }
    }
    Ok((x, y, n))
}

/// The `𝓖_q`-invariant density: `λ / (a (a + λ(1 − a)))` on `I_0`,
/// `λ / ((1 − a)((1 − a) + λ a))` on `I_{q−2}`, `1 / (a (1 − a))` between.
pub fn gauss_density(ctx: &HeckeContext, a: f64) -> Result<f64> {
    let i = branch_of(ctx, &a)?;
    let l = ctx.lambda();
    Ok(if i == 0 {
        l / (a * (a + l * (1.0 - a)))
    } else if i == ctx.q() as usize - 2 {
        l / ((1.0 - a) * ((1.0 - a) + l * a))
    } else {
        farey_density(&a)
    })
}

const QUAD_DEGREE: usize = 20;

fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let rule = GaussLegendre::new(NonZeroUsize::new(QUAD_DEGREE).expect("nonzero"));
    let h = (hi - lo) / panels as f64;
    (0..panels).map(|k| rule.integrate(lo + k as f64 * h, lo + (k + 1) as f64 * h, &f)).sum()
}

/// The formula of [`gauss_density`] on the piece of `(0, 1]` with branch
/// class `piece` (0 for `I_0`, 2 for `I_{q−2}`, 1 for the middle), so that
/// quadrature panels never straddle a piece boundary.
fn density_piece(l: f64, piece: u8) -> impl Fn(f64) -> f64 {
    move |a| match piece {
        0 => l / (a * (a + l * (1.0 - a))),
        2 => l / ((1.0 - a) * ((1.0 - a) + l * a)),
        _ => 1.0 / (a * (1.0 - a)),
    }
}

fn piece_bounds(ctx: &HeckeContext) -> [(f64, f64, u8); 3] {
    let l = ctx.lambda();
    let (lo, hi) = (1.0 / (l + 1.0), l / (l + 1.0));
    [(0.0, lo, 2), (lo, hi, 1), (hi, 1.0, 0)]
}

/// `∫_lo^hi gauss_density` by composite Gauss–Legendre with `panels` panels
/// per smooth piece.
pub fn gauss_integral(ctx: &HeckeContext, lo: f64, hi: f64, panels: usize) -> f64 {
    let l = ctx.lambda();
    piece_bounds(ctx)
        .into_iter()
        .map(|(a, b, piece)| {
            let (a, b) = (a.max(lo), b.min(hi));
            if b > a {
                integrate(density_piece(l, piece), a, b, panels)
            } else {
                0.0
            }
        })
        .sum()
}

/// Total mass of the `𝓖_q`-invariant measure, with `panels` panels per piece.
pub fn gauss_mass_with(ctx: &HeckeContext, panels: usize) -> f64 {
    gauss_integral(ctx, 0.0, 1.0, panels)
}

/// Total mass of the `𝓖_q`-invariant measure.
pub fn gauss_mass(ctx: &HeckeContext) -> f64 {
    gauss_mass_with(ctx, 8)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Farey,
    Gauss,
}

/// Visit counts of an orbit of `𝓕_q` or `𝓖_q` over equal bins of `(0, 1]`.
#[derive(Clone, Debug, Serialize)]
pub struct Histogram {
    pub kind: MapKind,
    pub counts: Vec<u64>,
    /// Number of iterates binned.
    pub iterations: usize,
    /// The orbit stopped early at the fixed point `a = 1` or on the
    /// acceleration cap.
    pub truncated: bool,
}

impl Histogram {
    pub fn bin_width(&self) -> f64 {
        1.0 / self.counts.len() as f64
    }

    /// Empirical density on each bin, normalized to total mass one.
    pub fn densities(&self) -> Vec<f64> {
        let scale = 1.0 / (self.iterations as f64 * self.bin_width());
        self.counts.iter().map(|&c| c as f64 * scale).collect()
    }
}

/// Bin the iterates `a_1, …, a_n` of `a_0` under `𝓕_q` or `𝓖_q`.
pub fn birkhoff_histogram(
    ctx: &HeckeContext,
    kind: MapKind,
    a0: f64,
    n_iter: usize,
    n_bins: usize,
) -> Result<Histogram> {
    check_unit(ctx, &a0)?;
    if n_bins == 0 {
        return Err(Error::Domain { value: 0.0, domain: "n_bins >= 1" });
    }
    let mut counts = vec![0u64; n_bins];
    let mut a = a0;
    let mut done = 0;
    let mut truncated = false;
    while done < n_iter {
        let next = match kind {
            MapKind::Farey if is_one(ctx, &a) => Err(Error::IndifferentFixedPoint),
            MapKind::Farey => farey(ctx, &a),
            MapKind::Gauss => gauss(ctx, &a).map(|(x, _)| x),
        };
        match next {
            Ok(x) => a = x,
            Err(Error::IndifferentFixedPoint | Error::AccelerationLimit(_)) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        }
        let k = ((a * n_bins as f64) as usize).min(n_bins - 1);
        counts[k] += 1;
        done += 1;
    }
    Ok(Histogram { kind, counts, iterations: done, truncated })
}

/// Sup-norm distance between the empirical density of a `𝓖_q` histogram
/// and the normalized `gauss_density`, both averaged over each bin, taken
/// over bins expecting at least `min_expected` visits.
pub fn histogram_distance(ctx: &HeckeContext, hist: &Histogram, min_expected: f64) -> f64 {
    let mass = gauss_mass(ctx);
    let w = hist.bin_width();
    hist.densities()
        .iter()
        .enumerate()
        .filter_map(|(k, &emp)| {
            let p = gauss_integral(ctx, k as f64 * w, (k + 1) as f64 * w, 2) / mass;
            (p * hist.iterations as f64 >= min_expected).then(|| (emp - p / w).abs())
        })
        .fold(0.0, f64::max)
}

/// Branch symbols of an orbit of `𝓕̃_q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Code {
    pub symbols: Vec<usize>,
    /// The orbit reached `a = 1`. Its symbol `0` is the last one emitted.
    pub terminated: bool,
}

/// The first `n` branch indices `i` with `𝓕̃_q^k(a, s) ∈ 𝖵_i`.
pub fn geodesic_code<T: HeckeScalar>(ctx: &HeckeContext, a: &T, s: &T, n: usize) -> Result<Code> {
    if !in_section(ctx, a, s) {
        return Err(Error::OutsideSection(a.to_f64(), s.to_f64()));
    }
    // The strip 𝖵_i depends on a alone and the extension acts on a by 𝓕_q,
    // so the s coordinate never has to be carried along. For exact scalars
    // a = p / r with r > 0, and each branch acts linearly on (p, r).
    if !T::EXACT {
        let mut a = a.clone();
        let mut symbols = Vec::with_capacity(n);
        while symbols.len() < n {
            let i = branch_of(ctx, &a)?;
            symbols.push(i);
            if is_one(ctx, &a) {
                return Ok(Code { symbols, terminated: true });
            }
            a = farey_branch(ctx, i, &a);
        }
        return Ok(Code { symbols, terminated: false });
    }
    let data = ctx.data::<T>();
    let (mut p, mut r) = (a.clone(), a.one_like());
    let mut symbols = Vec::with_capacity(n);
    while symbols.len() < n {
        let i = projective_branch(ctx, &p, &r)?;
        symbols.push(i);
        if p == r {
            return Ok(Code { symbols, terminated: true });
        }
        let (w, wn) = (data.w(i), data.w(i + 1));
        let p2 = (wn.x.clone() + wn.y.clone()) * p.clone() - wn.x.clone() * r.clone();
        r = (wn.x.clone() - w.y.clone()) * p + (w.x.clone() - wn.x.clone()) * r;
        p = p2;
    }
    Ok(Code { symbols, terminated: false })
}

/// Branch of `p / r` for `r > 0`, decided in floating point when the error
/// bounds allow it.
fn projective_branch<T: HeckeScalar>(ctx: &HeckeContext, p: &T, r: &T) -> Result<usize> {
    let ((pv, pe), (rv, re)) = (p.approx(), r.approx());
    let a = pv / rv;
    let err = (pe + a.abs() * re) / (rv.abs() - re) * (1.0 + 1e-9) + 4.0 * f64::EPSILON;
    if rv > re && err.is_finite() && a - err > 0.0 && a + err < 1.0 {
        let b = |i| *ctx.data::<f64>().boundary(i);
        let i = (0..ctx.q() as usize - 1).rev().find(|&i| a <= b(i)).unwrap_or(0);
        if (a - b(i)).abs() > err && (a - b(i + 1)).abs() > err {
            return Ok(i);
        }
    }
    branch_of(ctx, &(p.clone() / r.clone()))
}

/// Whether `a` lies in the branch interval `I_i`.
pub fn in_branch<T: HeckeScalar>(ctx: &HeckeContext, i: usize, a: &T) -> bool {
    branch_of(ctx, a).is_ok_and(|b| b == i)
}
