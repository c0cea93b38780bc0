//! The λ_q-continued fraction algorithm on the first quadrant: replace `u`
//! in sector `Σ_i` by `M_i^{-1} u` until the vector lands on the ray `y = 0`.

use std::cmp::Ordering;

use serde::Serialize;

use crate::algebra::Vec2;
use crate::error::{Error, Result};
use crate::hecke::{sector_of, HeckeContext, HeckeScalar};

/// Relative direction uncertainty at which a float itinerary is abandoned.
pub const PRECISION_LIMIT: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CfStep<T> {
    pub input: Vec2<T>,
    pub sector: usize,
    pub output: Vec2<T>,
}

/// How an itinerary ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CfOutcome {
    /// Landed on the ray `y = 0`.
    Terminated,
    /// Ran out of steps.
    MaxSteps,
    /// Float mode only: the direction of the iterate is no longer determined
    /// by the input to better than [`PRECISION_LIMIT`].
    PrecisionExhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Itinerary {
    pub steps: Vec<usize>,
    pub terminated: bool,
    pub outcome: CfOutcome,
}

fn is_terminal<T: HeckeScalar>(u: &Vec2<T>, tol: f64) -> bool {
    u.y.sign_tol(tol) == Ordering::Equal && u.x.sign_tol(tol) == Ordering::Greater
}

fn clamp<T: HeckeScalar>(v: T, tol: f64) -> T {
    if !T::EXACT && v.sign_tol(tol) == Ordering::Equal && v.to_f64() < 0.0 {
        v.zero_like()
    } else {
        v
    }
}

/// One application of the algorithm. Vectors on the ray `y = 0` are fixed
/// points and are rejected with [`Error::FixedPoint`].
pub fn cf_step<T: HeckeScalar>(ctx: &HeckeContext, u: &Vec2<T>) -> Result<CfStep<T>> {
    let tol = ctx.eps * u.to_f64().norm();
    if is_terminal(u, tol) {
        return Err(Error::FixedPoint);
    }
    let sector = sector_of(ctx, u)?;
    let raw = ctx.data::<T>().m_inv(sector).apply(u);
    let output = Vec2::new(clamp(raw.x, tol), clamp(raw.y, tol));
    Ok(CfStep { input: u.clone(), sector, output })
}

/// Iterate [`cf_step`] until `u` lands on `y = 0` or `max_steps` is reached.
///
/// In float mode the iterate `u_n = P_n u_0` with `P_n ∈ SL(2, R)` shrinks
/// while input errors grow with `‖P_n‖ ≈ |u_0| / |u_n|`, so the relative
/// error of the direction is about `n · ε_mach · (|u_0| / |u_n|)²`. Landing is
/// accepted when `y` is below that bound; once the bound passes
/// [`PRECISION_LIMIT`] the float orbit says nothing about the true one and
/// the run stops with [`CfOutcome::PrecisionExhausted`]. Exact inputs never
/// hit that case.
pub fn cf_itinerary<T: HeckeScalar>(
    ctx: &HeckeContext,
    u: &Vec2<T>,
    max_steps: usize,
) -> Result<Itinerary> {
    let n0 = u.to_f64().norm();
    let mut cur = u.clone();
    let mut steps = Vec::new();
    loop {
        let n = cur.to_f64().norm();
        let uncertainty = if T::EXACT {
            0.0
        } else {
            (steps.len() as f64 + 2.0) * 4.0 * f64::EPSILON * (n0 / n).powi(2)
        };
        let tol = (ctx.eps + 8.0 * uncertainty) * n;
        if is_terminal(&cur, tol) {
            return Ok(Itinerary { steps, terminated: true, outcome: CfOutcome::Terminated });
        }
        if uncertainty > PRECISION_LIMIT {
            return Ok(Itinerary {
                steps,
                terminated: false,
                outcome: CfOutcome::PrecisionExhausted,
            });
        }
        if steps.len() >= max_steps {
            return Ok(Itinerary { steps, terminated: false, outcome: CfOutcome::MaxSteps });
        }
        let step = cf_step(ctx, &cur)?;
        steps.push(step.sector);
        cur = step.output;
    }
}
