//! Group data for the Hecke triangle group `G_q`: generators, the vectors
//! `w_i = U_q^i (1, 0)^T`, the matrices `M_i = U_q^i T_q`, sector
//! classification and enumeration of the orbit `Λ_q = G_q (1, 0)^T`.

use std::cmp::Ordering;
use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use crate::algebra::{wedge, FieldElement, HeckeField, Mat2, Scalar, Vec2};
use crate::error::{Error, Result};

/// Default tolerance for boundary membership tests in float mode.
pub const DEFAULT_EPS: f64 = 1e-12;

/// Generators and derived vectors of `G_q` over one scalar type.
#[derive(Clone, Debug)]
pub struct GroupData<T> {
    pub lambda: T,
    /// `w_0, …, w_q`; the last entry `w_q = (-1, 0)` is kept for the BCZ map.
    w: Vec<Vec2<T>>,
    /// `M_0, …, M_{q-2}`.
    m: Vec<Mat2<T>>,
    /// `M_i^{-1}`.
    m_inv: Vec<Mat2<T>>,
    pub s: Mat2<T>,
    pub t: Mat2<T>,
    pub u: Mat2<T>,
    /// `b_i = x_i / (x_i + y_i)` for `i = 0, …, q−1`.
    boundaries: Vec<T>,
}

impl<T: Scalar> GroupData<T> {
    fn with_q(lambda: T, q: usize) -> Self {
        let (zero, one) = (lambda.zero_like(), lambda.one_like());
        let s = Mat2::new(zero.clone(), -one.clone(), one.clone(), zero.clone());
        let t = Mat2::new(one.clone(), lambda.clone(), zero.clone(), one.clone());
        let u = t.clone() * s.clone();
        let mut w = vec![Vec2::new(one, zero)];
        for _ in 0..q {
            let next = u.apply(w.last().expect("nonempty"));
            w.push(next);
        }
        let m: Vec<_> = (0..q - 1).map(|i| Mat2::from_columns(&w[i], &w[i + 1])).collect();
        let m_inv = m.iter().map(Mat2::inverse_unimodular).collect();
        let boundaries = w[..q].iter().map(|v| v.x.clone() / (v.x.clone() + v.y.clone())).collect();
        GroupData { lambda, w, m, m_inv, s, t, u, boundaries }
    }

    fn to_f64(&self) -> GroupData<f64> {
        GroupData {
            lambda: self.lambda.to_f64(),
            w: self.w.iter().map(Vec2::to_f64).collect(),
            m: self.m.iter().map(Mat2::to_f64).collect(),
            m_inv: self.m_inv.iter().map(Mat2::to_f64).collect(),
            s: self.s.to_f64(),
            t: self.t.to_f64(),
            u: self.u.to_f64(),
            boundaries: self.boundaries.iter().map(Scalar::to_f64).collect(),
        }
    }

    /// `w_i` for `0 <= i <= q`.
    pub fn w(&self, i: usize) -> &Vec2<T> {
        &self.w[i]
    }

    /// `b_i = x_i / (x_i + y_i)`, `0 <= i <= q−1`.
    pub fn boundary(&self, i: usize) -> &T {
        &self.boundaries[i]
    }

    /// The `q` vectors `w_0, …, w_{q-1}`.
    pub fn ws(&self) -> &[Vec2<T>] {
        &self.w[..self.w.len() - 1]
    }

    pub fn m(&self, i: usize) -> &Mat2<T> {
        &self.m[i]
    }

    pub fn m_inv(&self, i: usize) -> &Mat2<T> {
        &self.m_inv[i]
    }

    pub fn ms(&self) -> &[Mat2<T>] {
        &self.m
    }

    /// The quadratic form `x² - λxy + y²`.
    pub fn quadratic_form(&self, v: &Vec2<T>) -> T {
        v.x.clone() * v.x.clone() - self.lambda.clone() * v.x.clone() * v.y.clone()
            + v.y.clone() * v.y.clone()
    }
}

/// Immutable per-q context holding exact and float copies of the group data.
#[derive(Clone, Debug)]
pub struct HeckeContext {
    q: u32,
    field: Arc<HeckeField>,
    exact: GroupData<FieldElement>,
    float: GroupData<f64>,
    /// Tolerance for float boundary tests.
    pub eps: f64,
}

impl HeckeContext {
    pub fn new(q: u32) -> Result<Self> {
        let field = HeckeField::new(q)?;
        let exact = GroupData::with_q(FieldElement::lambda(&field), q as usize);
        let float = exact.to_f64();
        Ok(HeckeContext { q, field, exact, float, eps: DEFAULT_EPS })
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Number of sectors / branches, `q - 1`.
    pub fn n_sectors(&self) -> usize {
        self.q as usize - 1
    }

    pub fn field(&self) -> &Arc<HeckeField> {
        &self.field
    }

    pub fn exact(&self) -> &GroupData<FieldElement> {
        &self.exact
    }

    pub fn float(&self) -> &GroupData<f64> {
        &self.float
    }

    pub fn lambda(&self) -> f64 {
        self.float.lambda
    }

    /// Group data in the scalar type `T`.
    pub fn data<T: HeckeScalar>(&self) -> &GroupData<T> {
        T::data(self)
    }

    /// Lift a float constant into `T` (exact elements take the rational
    /// value of the float).
    pub fn constant<T: HeckeScalar>(&self, x: f64) -> T {
        self.data::<T>().lambda.from_f64_like(x)
    }
}

/// Scalars for which a [`HeckeContext`] carries group data.
pub trait HeckeScalar: Scalar {
    fn data(ctx: &HeckeContext) -> &GroupData<Self>;
}

impl HeckeScalar for f64 {
    fn data(ctx: &HeckeContext) -> &GroupData<f64> {
        &ctx.float
    }
}

impl HeckeScalar for FieldElement {
    fn data(ctx: &HeckeContext) -> &GroupData<FieldElement> {
        &ctx.exact
    }
}

/// Index `i` of the sector `Σ_i = (0, ∞) w_i + [0, ∞) w_{i+1}` containing `u`.
///
/// `u = α w_i + β w_{i+1}` with `α = u ∧ w_{i+1}` and `β = w_i ∧ u`, so
/// `u ∈ Σ_i` iff `α > 0` and `β >= 0`. In float mode both wedges are compared
/// against `ctx.eps · |u|`.
pub fn sector_of<T: HeckeScalar>(ctx: &HeckeContext, u: &Vec2<T>) -> Result<usize> {
    let uf = u.to_f64();
    let scale = uf.norm();
    let fail = |reason| Err(Error::Classification { x: uf.x, y: uf.y, reason });
    if scale == 0.0 && (!T::EXACT || (u.x.sign_tol(0.0).is_eq() && u.y.sign_tol(0.0).is_eq())) {
        return fail("zero vector");
    }
    let tol = ctx.eps * scale;
    if u.x.sign_tol(tol) != Ordering::Greater {
        if u.x.sign_tol(tol) == Ordering::Equal && u.y.sign_tol(tol) == Ordering::Greater {
            return fail("parallel to (0, 1)");
        }
        return fail("outside the first quadrant");
    }
    if u.y.sign_tol(tol) == Ordering::Less {
        return fail("outside the first quadrant");
    }
    let data = ctx.data::<T>();
    let (x, y) = (u.x.approx(), u.y.approx());
    // Sign of u ∧ w, decided in floats when the error bound allows it.
    let wedge_sign = |w: usize, flip: bool| {
        let wf = ctx.float.w(w);
        let value = x.0 * wf.y - y.0 * wf.x;
        let err = x.1 * wf.y.abs() + y.1 * wf.x.abs() + 1e-14 * (x.0 * wf.y).abs().max((y.0 * wf.x).abs());
        let s = if T::EXACT && value.abs() > err {
            value.partial_cmp(&0.0).expect("finite")
        } else {
            wedge(u, data.w(w)).sign_tol(tol)
        };
        if flip {
            s.reverse()
        } else {
            s
        }
    };
    for i in 0..ctx.n_sectors() {
        if wedge_sign(i + 1, false) == Ordering::Greater && wedge_sign(i, true) != Ordering::Less {
            return Ok(i);
        }
    }
    fail("no sector matched")
}

/// Points of `Λ_q` with sup norm at most `norm_bound`, found by breadth-first
/// search over `S^{±1}, T_q^{±1}` acting on `(1, 0)`, with words of length at
/// most `word_bound`.
///
/// The search explores vectors up to an L1 norm of `2 · max_j |w_j|_1` times
/// the target bound: every point is reached through the continued fraction
/// path, whose intermediate vectors stay within that factor. Too small a
/// `word_bound` yields an incomplete set; this is not an error.
pub fn enumerate_lambda_q<T: HeckeScalar>(
    ctx: &HeckeContext,
    norm_bound: f64,
    word_bound: usize,
) -> Vec<Vec2<T>> {
    enumerate_lambda_q_checked(ctx, norm_bound, word_bound).0
}

/// [`enumerate_lambda_q`] plus a completeness flag: `false` when some vector
/// inside the search region lies beyond `word_bound`.
pub fn enumerate_lambda_q_checked<T: HeckeScalar>(
    ctx: &HeckeContext,
    norm_bound: f64,
    word_bound: usize,
) -> (Vec<Vec2<T>>, bool) {
    let data = ctx.data::<T>();
    let w1 = ctx
        .float
        .ws()
        .iter()
        .map(|w| w.x.abs() + w.y.abs())
        .fold(1.0f64, f64::max);
    let explore = 2.0 * norm_bound * w1 + 1.0;
    let t_inv = data.t.inverse_unimodular();
    let s_inv = data.s.inverse_unimodular();
    let gens = [&data.s, &s_inv, &data.t, &t_inv];

    let start = data.w(0).clone();
    let mut seen = HashSet::new();
    seen.insert(start.key());
    let mut queue = VecDeque::from([(start.clone(), 0usize)]);
    let mut out = Vec::new();
    let mut complete = true;
    while let Some((v, depth)) = queue.pop_front() {
        if v.sup_norm() <= norm_bound * (1.0 + 1e-12) {
            out.push(v.clone());
        }
        for g in gens {
            let next = g.apply(&v);
            let nf = next.to_f64();
            if nf.x.abs() + nf.y.abs() > explore {
                continue;
            }
            if depth == word_bound {
                complete &= seen.contains(&next.key());
                continue;
            }
            if seen.insert(next.key()) {
                queue.push_back((next, depth + 1));
            }
        }
    }
    (out, complete)
}

/// Result of one identity family in the exact suite.
#[derive(Clone, Debug, serde::Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// The exact identity suite: ellipse, unimodularity, transpose symmetry,
/// `U_q^q = -I`, column structure of `M_i`, and determinants.
pub fn identity_suite(ctx: &HeckeContext) -> Vec<IdentityCheck> {
    let d = ctx.exact();
    let q = ctx.q as usize;
    let one = FieldElement::one(ctx.field());
    let mut out = Vec::new();
    let mut push = |name, failures: Vec<String>| {
        out.push(IdentityCheck {
            name,
            passed: failures.is_empty(),
            detail: if failures.is_empty() { "ok".into() } else { failures.join("; ") },
        })
    };

    let mut f = Vec::new();
    for (i, w) in d.ws().iter().enumerate() {
        if d.quadratic_form(w) != one {
            f.push(format!("Q(w_{i}) != 1"));
        }
    }
    push("ellipse Q_q(w_i) = 1", f);

    let mut f = Vec::new();
    for i in 0..q - 1 {
        if wedge(d.w(i), d.w(i + 1)) != one {
            f.push(format!("w_{i} ∧ w_{} != 1", i + 1));
        }
    }
    if wedge(d.w(0), d.w(q - 1)) != one {
        f.push(format!("w_0 ∧ w_{} != 1", q - 1));
    }
    push("unimodularity w_i ∧ w_{i+1} = 1, w_0 ∧ w_{q-1} = 1", f);

    let mut f = Vec::new();
    for i in 0..q - 1 {
        if d.m(i).transpose() != *d.m(q - 2 - i) {
            f.push(format!("M_{i}^T != M_{}", q - 2 - i));
        }
    }
    push("transpose symmetry M_i^T = M_{q-2-i}", f);

    let mut f = Vec::new();
    if d.u.pow(q as u32) != -Mat2::identity_like(&one) {
        f.push("U^q != -I".into());
    }
    push("U_q^q = -I", f);

    let mut f = Vec::new();
    for i in 0..q - 1 {
        let mi = d.u.pow(i as u32) * d.t.clone();
        if mi != *d.m(i) || mi.col0() != *d.w(i) || mi.col1() != *d.w(i + 1) {
            f.push(format!("M_{i} != U^{i} T = [w_{i} w_{}]", i + 1));
        }
    }
    for (i, w) in d.ws().iter().enumerate() {
        if d.u.pow(i as u32).apply(d.w(0)) != *w {
            f.push(format!("w_{i} != U^{i} (1,0)"));
        }
    }
    push("M_i = U_q^i T_q = [w_i w_{i+1}]", f);

    let mut f = Vec::new();
    for (name, m) in [("S", &d.s), ("T", &d.t), ("U", &d.u)] {
        if m.det() != one {
            f.push(format!("det {name} != 1"));
        }
    }
    for (i, m) in d.ms().iter().enumerate() {
        if m.det() != one {
            f.push(format!("det M_{i} != 1"));
        }
    }
    push("determinant 1", f);
    out
}
