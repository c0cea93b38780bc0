//! Exact arithmetic in the real cyclotomic field Q(λ_q), λ_q = 2cos(π/q).

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use super::poly::{self, RatPoly};
use crate::error::{Error, Result};

/// Minimal polynomial of `2cos(π/q)` over Q, monic, integer coefficients,
/// lowest degree first.
///
/// Built by folding the cyclotomic polynomial `Φ_{2q}` through `x ↦ x + 1/x`.
pub fn minimal_poly(q: u32) -> Result<Vec<BigInt>> {
    if q < 3 {
        return Err(Error::InvalidQ(q));
    }
    let phi = poly::cyclotomic(2 * q as u64);
    let d = (phi.len() - 1) / 2;
    // x^{-d} Φ(x) = c_d + Σ_k c_{d+k} (x^k + x^{-k}) and x^k + x^{-k} = D_k(x + 1/x)
    // with D_0 = 2, D_1 = t, D_{k+1} = t D_k - D_{k-1}.
    let mut d_prev: Vec<BigInt> = vec![BigInt::from(2)];
    let mut d_cur: Vec<BigInt> = vec![BigInt::zero(), BigInt::one()];
    let mut out = vec![BigInt::zero(); d + 1];
    out[0] += &phi[d];
    for k in 1..=d {
        let c = &phi[d + k];
        for (j, dj) in d_cur.iter().enumerate() {
            out[j] += c * dj;
        }
        let mut next = vec![BigInt::zero(); d_cur.len() + 1];
        for (j, dj) in d_cur.iter().enumerate() {
            next[j + 1] += dj;
        }
        for (j, dj) in d_prev.iter().enumerate() {
            next[j] -= dj;
        }
        d_prev = std::mem::replace(&mut d_cur, next);
    }
    Ok(out)
}

/// Float value of λ_q.
pub fn lambda_f64(q: u32) -> f64 {
    2.0 * (std::f64::consts::PI / q as f64).cos()
}

/// The field Q(λ_q) as a Q-vector space with power basis `1, λ, …, λ^{d-1}`.
#[derive(Debug)]
pub struct HeckeField {
    q: u32,
    minpoly: RatPoly,
    // The same polynomial with integer coefficients; it is monic, so
    // reduction modulo it stays in Z[λ].
    mint: Vec<BigInt>,
    lambda: f64,
    // Dyadic isolating intervals (m_lo / 2^bits, m_hi / 2^bits) for λ of
    // shrinking width, used when the float embedding cannot decide a sign.
    ladder: Vec<(BigInt, BigInt, u64)>,
}

impl HeckeField {
    pub fn new(q: u32) -> Result<Arc<Self>> {
        let mint = minimal_poly(q)?;
        let minpoly: RatPoly = mint.iter().cloned().map(BigRational::from_integer).collect();
        let lambda = lambda_f64(q);
        let ladder = if mint.len() == 2 { Vec::new() } else { refine_root(&mint, lambda) };
        Ok(Arc::new(HeckeField { q, minpoly, mint, lambda, ladder }))
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn degree(&self) -> usize {
        self.mint.len() - 1
    }

    pub fn lambda_f64(&self) -> f64 {
        self.lambda
    }

    pub fn minpoly(&self) -> &RatPoly {
        &self.minpoly
    }

    /// Reduce an integer polynomial in λ to degree below `d`.
    fn reduce(&self, mut p: Vec<BigInt>) -> Vec<BigInt> {
        let d = self.degree();
        for k in (d..p.len()).rev() {
            let c = std::mem::take(&mut p[k]);
            if c.is_zero() {
                continue;
            }
            for (j, mj) in self.mint[..d].iter().enumerate() {
                p[k - d + j] -= &c * mj;
            }
        }
        p.resize(d, BigInt::zero());
        p
    }

    /// Sign of `Σ c_k λ^k`.
    fn sign_of(&self, c: &[BigInt]) -> Ordering {
        if c.iter().all(Zero::is_zero) {
            return Ordering::Equal;
        }
        if self.degree() == 1 {
            // λ = 1
            return c[0].sign().cmp(&Sign::NoSign);
        }
        let shift = c.iter().map(|x| x.bits()).max().unwrap_or(0).saturating_sub(900);
        let (mut value, mut bound, mut p) = (0.0, 0.0, 1.0);
        for ck in c {
            let cf = (ck >> shift).to_f64().unwrap_or(f64::NAN);
            value += cf * p;
            bound += cf.abs() * p;
            p *= self.lambda;
        }
        if value.is_finite() && value.abs() > 1e-10 * bound {
            return value.partial_cmp(&0.0).expect("finite");
        }
        for (lo, hi, bits) in &self.ladder {
            if let Some(s) = dyadic_interval_sign(c, lo, hi, *bits) {
                return s;
            }
        }
        // A nonzero element has a nonzero value at λ, so refining further
        // terminates.
        let (mut lo, mut hi, mut bits) = self.ladder.last().cloned().expect("nonempty ladder");
        let s_lo = dyadic_sign(&self.mint, &lo, bits);
        loop {
            lo <<= bits;
            hi <<= bits;
            bits *= 2;
            bisect(&self.mint, &mut lo, &mut hi, bits, s_lo);
            if let Some(s) = dyadic_interval_sign(c, &lo, &hi, bits) {
                return s;
            }
        }
    }
}

/// Sign of `Σ c_k (m / 2^bits)^k`, computed as that of `Σ c_k m^k 2^{bits(n − k)}`.
fn dyadic_sign(c: &[BigInt], m: &BigInt, bits: u64) -> Ordering {
    let n = c.len() - 1;
    let mut acc = BigInt::zero();
    let mut mk = BigInt::one();
    for (k, ck) in c.iter().enumerate() {
        acc += (ck * &mk) << (bits * (n - k) as u64);
        mk *= m;
    }
    acc.sign().cmp(&Sign::NoSign)
}

/// Sign of `Σ c_k x^k` for all `x ∈ [lo, hi] / 2^bits` with `lo > 0`, if it
/// is constant there.
fn dyadic_interval_sign(c: &[BigInt], lo: &BigInt, hi: &BigInt, bits: u64) -> Option<Ordering> {
    let n = c.len() - 1;
    let (mut low, mut high) = (BigInt::zero(), BigInt::zero());
    let (mut plo, mut phi) = (BigInt::one(), BigInt::one());
    for (k, ck) in c.iter().enumerate() {
        let scale = bits * (n - k) as u64;
        let (tlo, thi) = ((ck * &plo) << scale, (ck * &phi) << scale);
        if ck.is_positive() {
            low += tlo;
            high += thi;
        } else {
            low += thi;
            high += tlo;
        }
        plo *= lo;
        phi *= hi;
    }
    if low.is_positive() {
        Some(Ordering::Greater)
    } else if high.is_negative() {
        Some(Ordering::Less)
    } else {
        None
    }
}

fn bisect(p: &[BigInt], lo: &mut BigInt, hi: &mut BigInt, bits: u64, s_lo: Ordering) {
    while &*hi - &*lo > BigInt::one() {
        let mid: BigInt = (&*lo + &*hi) >> 1u32;
        if dyadic_sign(p, &mid, bits) == s_lo {
            *lo = mid;
        } else {
            *hi = mid;
        }
    }
}

const LADDER_BITS: [u64; 7] = [64, 128, 256, 512, 1024, 2048, 4096];

/// One Newton step for `p` from `x / 2^bits`: `F / G` with `F = p(x/2^bits) 2^{bits n}`
/// and `G = p'(x/2^bits) 2^{bits (n−1)}` is the correction in units of `2^-bits`.
fn newton(p: &[BigInt], x: &BigInt, bits: u64) -> BigInt {
    let n = p.len() - 1;
    let (mut f, mut g) = (BigInt::zero(), BigInt::zero());
    let mut xk = BigInt::one();
    for (k, ck) in p.iter().enumerate() {
        let scale = bits * (n - k) as u64;
        if k < n {
            g += (&p[k + 1] * BigInt::from(k + 1) * &xk) << (scale - bits);
        }
        f += (ck * &xk) << scale;
        xk *= x;
    }
    x - f / g
}

/// Isolating intervals `(m, m + 1) / 2^P` around the root near `approx` for
/// each `P` in [`LADDER_BITS`]. `p` is irreducible of degree at least two, so
/// it never vanishes at a dyadic point. Each level starts from a Newton step
/// off the previous one and falls back to bisection if that misses.
fn refine_root(p: &[BigInt], approx: f64) -> Vec<(BigInt, BigInt, u64)> {
    let mut width = 1e-12;
    let bits = LADDER_BITS[0];
    let scale = (bits as f64).exp2();
    let (mut lo, mut hi) = loop {
        let lo = BigInt::from_f64(((approx - width) * scale).floor()).expect("finite");
        let hi = BigInt::from_f64(((approx + width) * scale).ceil()).expect("finite");
        if dyadic_sign(p, &lo, bits) != dyadic_sign(p, &hi, bits) {
            break (lo, hi);
        }
        width *= 16.0;
    };
    let s_lo = dyadic_sign(p, &lo, bits);
    bisect(p, &mut lo, &mut hi, bits, s_lo);
    let mut ladder = vec![(lo.clone(), hi.clone(), bits)];
    for pair in LADDER_BITS.windows(2) {
        let (from, to) = (pair[0], pair[1]);
        let x = newton(p, &(&lo << (to - from)), to);
        let two = BigInt::from(2);
        let (nlo, nhi) = (&x - &two, &x + &two);
        if dyadic_sign(p, &nlo, to) == s_lo && dyadic_sign(p, &nhi, to) != s_lo {
            (lo, hi) = (nlo, nhi);
        } else {
            lo <<= to - from;
            hi <<= to - from;
        }
        bisect(p, &mut lo, &mut hi, to, s_lo);
        ladder.push((lo.clone(), hi.clone(), to));
    }
    ladder
}

/// An element `(n_0 + n_1 λ + … + n_{d-1} λ^{d-1}) / den` of Q(λ_q), kept
/// with `den > 0` and no common factor of `den` and all `n_k`.
#[derive(Clone)]
pub struct FieldElement {
    field: Arc<HeckeField>,
    num: Vec<BigInt>,
    den: BigInt,
}

impl FieldElement {
    fn from_parts(field: &Arc<HeckeField>, num: Vec<BigInt>, den: BigInt) -> Self {
        let mut num = field.reduce(num);
        let mut den = den;
        if den.is_negative() {
            den = -den;
            num.iter_mut().for_each(|x| *x = -std::mem::take(x));
        }
        if num.iter().all(Zero::is_zero) {
            den = BigInt::one();
        } else {
            let twos = num
                .iter()
                .filter_map(|x| x.trailing_zeros())
                .chain(den.trailing_zeros())
                .min()
                .unwrap_or(0);
            if twos > 0 {
                num.iter_mut().for_each(|x| *x >>= twos);
                den >>= twos;
            }
        }
        FieldElement { field: Arc::clone(field), num, den }.normalized()
    }

    fn normalized(mut self) -> Self {
        let mut g = self.den.clone();
        for x in &self.num {
            if g.is_one() {
                return self;
            }
            g = g.gcd(x);
        }
        if !g.is_one() {
            self.num.iter_mut().for_each(|x| *x /= &g);
            self.den /= &g;
        }
        self
    }

    pub fn from_coeffs(field: &Arc<HeckeField>, coeffs: Vec<BigRational>) -> Self {
        let den = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let num = coeffs.iter().map(|c| c.numer() * (&den / c.denom())).collect();
        Self::from_parts(field, num, den)
    }

    pub fn from_integer(field: &Arc<HeckeField>, n: i64) -> Self {
        Self::from_parts(field, vec![BigInt::from(n)], BigInt::one())
    }

    pub fn from_rational(field: &Arc<HeckeField>, r: BigRational) -> Self {
        Self::from_coeffs(field, vec![r])
    }

    pub fn zero(field: &Arc<HeckeField>) -> Self {
        Self::from_integer(field, 0)
    }

    pub fn one(field: &Arc<HeckeField>) -> Self {
        Self::from_integer(field, 1)
    }

    /// The generator λ_q.
    pub fn lambda(field: &Arc<HeckeField>) -> Self {
        Self::from_parts(field, vec![BigInt::zero(), BigInt::one()], BigInt::one())
    }

    pub fn field(&self) -> &Arc<HeckeField> {
        &self.field
    }

    /// Rational coordinates in the power basis.
    pub fn coeffs(&self) -> Vec<BigRational> {
        self.num.iter().map(|n| BigRational::new(n.clone(), self.den.clone())).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(Zero::is_zero)
    }

    /// Float embedding via λ_q = 2cos(π/q).
    pub fn to_f64(&self) -> f64 {
        self.approx().0
    }

    /// A float approximation and a bound on its absolute error.
    pub fn approx(&self) -> (f64, f64) {
        let lam = self.field.lambda;
        let sn = self.num.iter().map(|x| x.bits()).max().unwrap_or(0).saturating_sub(1000);
        let sd = self.den.bits().saturating_sub(1000);
        let (v, b) = self.num.iter().rev().fold((0.0, 0.0), |(v, b), c| {
            let c = (c >> sn).to_f64().unwrap_or(f64::NAN);
            (v * lam + c, b * lam + c.abs())
        });
        let scale = 2f64.powi(sn as i32 - sd as i32) / (&self.den >> sd).to_f64().unwrap_or(f64::NAN);
        (v * scale, 1e-12 * b * scale.abs())
    }

    /// Exact sign of the real number this element represents.
    pub fn signum(&self) -> Ordering {
        self.field.sign_of(&self.num)
    }

    /// Solves `n · y = 1` in Z[λ] ⊗ Q by fraction-free elimination on the
    /// matrix of multiplication by `n`.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let d = self.field.degree();
        // Column j is n λ^j; rows carry the augmented right-hand side e_0.
        let mut cols = vec![self.num.clone()];
        for j in 1..d {
            let mut next = vec![BigInt::zero()];
            next.extend(cols[j - 1].iter().cloned());
            cols.push(self.field.reduce(next));
        }
        let mut m: Vec<Vec<BigInt>> = (0..d)
            .map(|r| {
                let mut row: Vec<BigInt> = cols.iter().map(|c| c[r].clone()).collect();
                row.push(if r == 0 { BigInt::one() } else { BigInt::zero() });
                row
            })
            .collect();
        let mut prev = BigInt::one();
        for k in 0..d {
            let p = (k..d).find(|&r| !m[r][k].is_zero()).ok_or(Error::DivisionByZero)?;
            m.swap(k, p);
            for i in k + 1..d {
                for j in k + 1..=d {
                    let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                    m[i][j] = v;
                }
                m[i][k] = BigInt::zero();
            }
            prev = m[k][k].clone();
        }
        // Cramer: y_i = x_i / det with x_i integral.
        let det = m[d - 1][d - 1].clone();
        let mut x = vec![BigInt::zero(); d];
        for i in (0..d).rev() {
            let mut acc = &m[i][d] * &det;
            for j in i + 1..d {
                acc -= &m[i][j] * &x[j];
            }
            x[i] = acc / &m[i][i];
        }
        let num = x.into_iter().map(|xi| xi * &self.den).collect();
        Ok(Self::from_parts(&self.field, num, det))
    }

    fn check_field(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.field, &other.field) || self.field.q == other.field.q,
            "mixing elements of Q(λ_{}) and Q(λ_{})",
            self.field.q,
            other.field.q
        );
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.field.q == other.field.q && self.den == other.den && self.num == other.num
    }
}

impl Eq for FieldElement {}

impl Hash for FieldElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.field.q.hash(state);
        self.num.hash(state);
        self.den.hash(state);
    }
}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some((self.clone() - other.clone()).signum())
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} (≈{})", self.to_f64())
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})λ")?,
                _ => write!(f, "({c})λ^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn add_sub(a: FieldElement, b: FieldElement, negate: bool) -> FieldElement {
    a.check_field(&b);
    let sign = |x: BigInt| if negate { -x } else { x };
    if a.den == b.den {
        let num = a.num.into_iter().zip(b.num).map(|(x, y)| x + sign(y)).collect();
        return FieldElement::from_parts(&a.field, num, a.den);
    }
    let g = a.den.gcd(&b.den);
    let (la, lb) = (&b.den / &g, &a.den / &g);
    let num = a.num.into_iter().zip(b.num).map(|(x, y)| x * &la + sign(y * &lb)).collect();
    FieldElement::from_parts(&a.field, num, a.den * la)
}

impl Add for FieldElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        add_sub(self, rhs, false)
    }
}

impl Sub for FieldElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        add_sub(self, rhs, true)
    }
}

impl Neg for FieldElement {
    type Output = Self;
    fn neg(mut self) -> Self {
        self.num.iter_mut().for_each(|x| *x = -std::mem::take(x));
        self
    }
}

impl Mul for FieldElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.check_field(&rhs);
        let mut prod = vec![BigInt::zero(); self.num.len() + rhs.num.len() - 1];
        for (i, x) in self.num.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in rhs.num.iter().enumerate() {
                prod[i + j] += x * y;
            }
        }
        FieldElement::from_parts(&self.field, prod, self.den * rhs.den)
    }
}

impl Div for FieldElement {
    type Output = Self;
    /// Panics on division by zero; use [`FieldElement::inverse`] to handle it.
    fn div(self, rhs: Self) -> Self {
        let inv = rhs.inverse().expect("division by zero in Q(λ)");
        self * inv
    }
}

/// Ring operations shared by the exact and the floating-point instantiations.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    /// Key used to deduplicate points of discrete orbits.
    type Key: Hash + Eq + Clone + fmt::Debug + Send;

    const EXACT: bool;

    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    /// A rational constant in the same ring as `self`.
    fn from_f64_like(&self, x: f64) -> Self;
    fn to_f64(&self) -> f64;
    /// Sign of `self`; in float mode, values with `|x| <= tol` count as zero.
    /// Exact elements ignore `tol`.
    fn sign_tol(&self, tol: f64) -> Ordering;
    fn key(&self) -> Self::Key;

    /// A float value with a bound on its absolute error; an infinite bound
    /// means the value carries no guarantee.
    fn approx(&self) -> (f64, f64) {
        (self.to_f64(), f64::INFINITY)
    }

    /// Sign of `self − other`, with the same tolerance rule as `sign_tol`.
    fn cmp_tol(&self, other: &Self, tol: f64) -> Ordering {
        (self.clone() - other.clone()).sign_tol(tol)
    }

    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }
}

impl Scalar for f64 {
    type Key = i64;
    const EXACT: bool = false;

    fn zero_like(&self) -> Self {
        0.0
    }
    fn one_like(&self) -> Self {
        1.0
    }
    fn from_f64_like(&self, x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sign_tol(&self, tol: f64) -> Ordering {
        if self.abs() <= tol {
            Ordering::Equal
        } else if *self > 0.0 {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
    fn key(&self) -> i64 {
        (self * 1e9).round() as i64
    }
}

impl Scalar for FieldElement {
    type Key = FieldElement;
    const EXACT: bool = true;

    fn zero_like(&self) -> Self {
        FieldElement::zero(&self.field)
    }
    fn one_like(&self) -> Self {
        FieldElement::one(&self.field)
    }
    fn from_f64_like(&self, x: f64) -> Self {
        FieldElement::from_rational(&self.field, BigRational::from_f64(x).expect("finite constant"))
    }
    fn to_f64(&self) -> f64 {
        FieldElement::to_f64(self)
    }
    fn sign_tol(&self, _tol: f64) -> Ordering {
        self.signum()
    }
    fn approx(&self) -> (f64, f64) {
        FieldElement::approx(self)
    }
    fn cmp_tol(&self, other: &Self, _tol: f64) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        let ((x, ex), (y, ey)) = (self.approx(), other.approx());
        if (x - y).abs() > ex + ey {
            return x.partial_cmp(&y).expect("finite");
        }
        (self.clone() - other.clone()).signum()
    }
    fn key(&self) -> FieldElement {
        self.clone()
    }
}
