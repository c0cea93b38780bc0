//! Dense univariate polynomials, coefficients stored lowest degree first.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Integer polynomial `c[0] + c[1] x + ...`.
pub type IntPoly = Vec<BigInt>;
/// Rational polynomial `c[0] + c[1] x + ...`.
pub type RatPoly = Vec<BigRational>;

fn trim<T: Zero>(p: &mut Vec<T>) {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

pub fn int_mul(a: &IntPoly, b: &IntPoly) -> IntPoly {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

/// Exact division of integer polynomials where `b` is monic and divides `a`.
pub fn int_div_exact(a: &IntPoly, b: &IntPoly) -> IntPoly {
    let db = b.len() - 1;
    debug_assert!(b[db].is_one());
    let mut rem = a.clone();
    let mut quot = vec![BigInt::zero(); a.len().saturating_sub(db).max(1)];
    for k in (0..=(a.len() - 1 - db)).rev() {
        let c = rem[k + db].clone();
        if c.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            rem[k + j] -= &c * bj;
        }
        quot[k] = c;
    }
    debug_assert!(rem.iter().all(Zero::is_zero), "inexact cyclotomic division");
    trim(&mut quot);
    quot
}

/// The cyclotomic polynomial `Φ_n`, via `x^n - 1 = ∏_{d | n} Φ_d`.
pub fn cyclotomic(n: u64) -> IntPoly {
    let mut num: IntPoly = vec![BigInt::zero(); n as usize + 1];
    num[0] = -BigInt::one();
    num[n as usize] = BigInt::one();
    for d in 1..n {
        if n % d == 0 {
            num = int_div_exact(&num, &cyclotomic(d));
        }
    }
    num
}

/// Euler's totient.
pub fn totient(n: u64) -> u64 {
    (1..=n).filter(|k| k.gcd(&n) == 1).count() as u64
}

pub fn rat_mul(a: &RatPoly, b: &RatPoly) -> RatPoly {
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

/// Quotient and remainder of `a` by nonzero `b`.
pub fn rat_divrem(a: &RatPoly, b: &RatPoly) -> Result<(RatPoly, RatPoly)> {
    let mut b = b.clone();
    trim(&mut b);
    let db = b.len() - 1;
    let lead = b[db].clone();
    if lead.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let mut rem = a.clone();
    trim(&mut rem);
    if rem.len() <= db {
        return Ok((vec![BigRational::zero()], rem));
    }
    let mut quot = vec![BigRational::zero(); rem.len() - db];
    for k in (0..quot.len()).rev() {
        let c = &rem[k + db] / &lead;
        if c.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            rem[k + j] -= &c * bj;
        }
        quot[k] = c;
    }
    rem.truncate(db.max(1));
    trim(&mut rem);
    trim(&mut quot);
    Ok((quot, rem))
}

fn rat_sub(a: &RatPoly, b: &RatPoly) -> RatPoly {
    let n = a.len().max(b.len());
    let mut out: RatPoly = (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(BigRational::zero);
            let y = b.get(i).cloned().unwrap_or_else(BigRational::zero);
            x - y
        })
        .collect();
    trim(&mut out);
    out
}

fn is_zero_poly(p: &RatPoly) -> bool {
    p.iter().all(Zero::is_zero)
}

/// Inverse of `a` modulo the irreducible `m`, by the extended Euclidean algorithm.
pub fn rat_inverse_mod(a: &RatPoly, m: &RatPoly) -> Result<RatPoly> {
    if is_zero_poly(a) {
        return Err(Error::DivisionByZero);
    }
    let (mut r0, mut r1) = (m.clone(), a.clone());
    trim(&mut r0);
    trim(&mut r1);
    let (mut t0, mut t1): (RatPoly, RatPoly) = (vec![BigRational::zero()], vec![BigRational::one()]);
    while !is_zero_poly(&r1) {
        let (quot, rem) = rat_divrem(&r0, &r1)?;
        let t2 = rat_sub(&t0, &rat_mul(&quot, &t1));
        r0 = std::mem::replace(&mut r1, rem);
        t0 = std::mem::replace(&mut t1, t2);
    }
    // r0 is a nonzero constant when m is irreducible.
    if r0.len() != 1 || r0[0].is_zero() {
        return Err(Error::DivisionByZero);
    }
    let c = r0[0].clone();
    let (_, inv) = rat_divrem(&t0.iter().map(|t| t / &c).collect(), m)?;
    Ok(inv)
}

/// Sign of `Σ c_k x^k` on `x ∈ [lo, hi]` with `lo > 0`, or `None` if the
/// interval image straddles zero.
pub fn interval_sign(c: &RatPoly, lo: &BigRational, hi: &BigRational) -> Option<std::cmp::Ordering> {
    let mut low = BigRational::zero();
    let mut high = BigRational::zero();
    let mut plo = BigRational::one();
    let mut phi = BigRational::one();
    for ck in c {
        if ck.is_positive() {
            low += ck * &plo;
            high += ck * &phi;
        } else {
            low += ck * &phi;
            high += ck * &plo;
        }
        plo *= lo;
        phi *= hi;
    }
    if low.is_positive() {
        Some(std::cmp::Ordering::Greater)
    } else if high.is_negative() {
        Some(std::cmp::Ordering::Less)
    } else {
        None
    }
}

pub fn rat_eval(c: &RatPoly, x: &BigRational) -> BigRational {
    c.iter().rev().fold(BigRational::zero(), |acc, ck| acc * x + ck)
}

/// Parses `p/q`, an integer, or a decimal with optional exponent
/// (`-0.25`, `3e-2`) as an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let (n, d): (BigInt, BigInt) = (n.trim().parse().ok()?, d.trim().parse().ok()?);
        return (!d.is_zero()).then(|| BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() || !(int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())) {
        return None;
    }
    let digits: BigInt = format!("0{int}{frac}").parse().ok()?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> IntPoly {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn small_cyclotomics() {
        assert_eq!(cyclotomic(1), ints(&[-1, 1]));
        assert_eq!(cyclotomic(2), ints(&[1, 1]));
        assert_eq!(cyclotomic(6), ints(&[1, -1, 1]));
        assert_eq!(cyclotomic(8), ints(&[1, 0, 0, 0, 1]));
        assert_eq!(cyclotomic(10), ints(&[1, -1, 1, -1, 1]));
        assert_eq!(cyclotomic(12), ints(&[1, 0, -1, 0, 1]));
    }

    #[test]
    fn cyclotomic_degree_is_totient() {
        for n in 1..60u64 {
            assert_eq!(cyclotomic(n).len() as u64 - 1, totient(n), "n = {n}");
        }
    }

    #[test]
    fn inverse_mod_x2_minus_x_minus_1() {
        let r = |n: i64| BigRational::from_integer(n.into());
        let m = vec![r(-1), r(-1), r(1)];
        // x * (x - 1) = x^2 - x = 1 mod m
        let inv = rat_inverse_mod(&vec![r(0), r(1)], &m).unwrap();
        assert_eq!(inv, vec![r(-1), r(1)]);
    }

    #[test]
    fn parses_rationals() {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(parse_rational("0.3"), Some(r(3, 10)));
        assert_eq!(parse_rational("-3/7"), Some(r(-3, 7)));
        assert_eq!(parse_rational("2"), Some(r(2, 1)));
        assert_eq!(parse_rational("1.5e-2"), Some(r(3, 200)));
        assert_eq!(parse_rational(".5"), Some(r(1, 2)));
        assert_eq!(parse_rational("1e3"), Some(r(1000, 1)));
        for bad in ["", "x", "1/0", "1.2.3", "-", "1e", "nan"] {
            assert_eq!(parse_rational(bad), None, "{bad}");
        }
    }
}
