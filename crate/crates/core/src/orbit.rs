//! Orbit records for data export. Record `k` (from 1) holds the state after
//! step `k` together with the index of the piece the step was taken on and,
//! for the BCZ map, the return time of that step.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::algebra::Vec2;
use crate::bcz::{bcz_map, partition_index, roof, TrianglePoint};
use crate::cfrac::{cf_itinerary, cf_step, CfOutcome};
use crate::hecke::{HeckeContext, HeckeScalar};
use crate::intervalmaps::{farey_ext_step, gauss, gauss_ext_step};
use crate::sampling::triangle_point;
use crate::suspension::{branch_of, in_section};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitKind {
    Cf,
    Bcz,
    Farey,
    Gauss,
    FareyExt,
    GaussExt,
}

impl OrbitKind {
    pub const ALL: [OrbitKind; 6] =
        [OrbitKind::Cf, OrbitKind::Bcz, OrbitKind::Farey, OrbitKind::Gauss, OrbitKind::FareyExt, OrbitKind::GaussExt];

    pub fn name(self) -> &'static str {
        match self {
            OrbitKind::Cf => "cf",
            OrbitKind::Bcz => "bcz",
            OrbitKind::Farey => "farey",
            OrbitKind::Gauss => "gauss",
            OrbitKind::FareyExt => "farey-ext",
            OrbitKind::GaussExt => "gauss-ext",
        }
    }

    /// Column names of the records, in output order.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            OrbitKind::Cf => &["step", "x", "y", "sector"],
            OrbitKind::Bcz => &["step", "a", "b", "index", "roof"],
            OrbitKind::Farey | OrbitKind::Gauss => &["step", "a", "branch"],
            OrbitKind::FareyExt | OrbitKind::GaussExt => &["step", "a", "s", "branch"],
        }
    }

    /// Number of coordinates in a start point.
    pub fn dimension(self) -> usize {
        match self {
            OrbitKind::Farey | OrbitKind::Gauss => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for OrbitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OrbitKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        OrbitKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| format!("unknown orbit kind {s}"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub step: usize,
    pub coords: Vec<f64>,
    pub index: usize,
    /// Return time of the step (BCZ only).
    pub roof: Option<f64>,
}

impl Record {
    /// Field values in the order of [`OrbitKind::columns`].
    pub fn values(&self) -> Vec<String> {
        let mut out = vec![self.step.to_string()];
        out.extend(self.coords.iter().map(f64::to_string));
        out.push(self.index.to_string());
        out.extend(self.roof.map(|r| r.to_string()));
        out
    }
}

/// Why an orbit stopped before the requested number of steps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Terminal {
    /// Number of records emitted before stopping.
    pub step: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Orbit {
    pub kind: OrbitKind,
    pub records: Vec<Record>,
    pub terminal: Option<Terminal>,
}

fn terminal(step: usize, reason: impl Into<String>) -> Option<Terminal> {
    Some(Terminal { step, reason: reason.into() })
}

/// A random start for `kind`: a uniform direction in the first quadrant for
/// `cf`, a uniform point of `𝒯^q` for `bcz`, `a` uniform in `(0, 1)`, and for
/// the extensions a uniform point of `𝖲` with `a ∈ (0.001, 1)`.
pub fn random_start(ctx: &HeckeContext, kind: OrbitKind, rng: &mut impl Rng) -> Vec<f64> {
    match kind {
        OrbitKind::Cf => {
            let t = rng.gen_range(0.0..std::f64::consts::FRAC_PI_2);
            vec![t.cos(), t.sin()]
        }
        OrbitKind::Bcz => {
            let p = triangle_point(ctx, rng);
            vec![p.a, p.b]
        }
        OrbitKind::Farey | OrbitKind::Gauss => vec![1.0 - rng.gen::<f64>()],
        OrbitKind::FareyExt | OrbitKind::GaussExt => loop {
            let a: f64 = rng.gen_range(1e-3..1.0);
            let s = rng.gen::<f64>() / (a * (1.0 - a));
            if in_section(ctx, &a, &s) {
                break vec![a, s];
            }
        },
    }
}

/// Checks that `start` is an admissible initial state for `kind`.
pub fn check_start<T: HeckeScalar>(ctx: &HeckeContext, kind: OrbitKind, start: &[T]) -> Result<()> {
    if start.len() != kind.dimension() {
        return Err(Error::Domain { value: start.len() as f64, domain: "number of start coordinates" });
    }
    match kind {
        OrbitKind::Cf => {
            let u = Vec2::new(start[0].clone(), start[1].clone());
            let ok = u.x.sign_tol(ctx.eps) != std::cmp::Ordering::Less
                && u.y.sign_tol(ctx.eps) != std::cmp::Ordering::Less
                && !(u.x.sign_tol(ctx.eps).is_eq() && u.y.sign_tol(ctx.eps).is_eq());
            if !ok {
                return Err(Error::Domain { value: u.x.to_f64(), domain: "nonzero vector in the first quadrant" });
            }
        }
        OrbitKind::Bcz => {
            partition_index(ctx, TrianglePoint::new(start[0].to_f64(), start[1].to_f64()))?;
        }
        OrbitKind::Farey | OrbitKind::Gauss => {
            branch_of(ctx, &start[0])?;
        }
        OrbitKind::FareyExt | OrbitKind::GaussExt => {
            if !in_section(ctx, &start[0], &start[1]) {
                return Err(Error::OutsideSection(start[0].to_f64(), start[1].to_f64()));
            }
        }
    }
    Ok(())
}

/// Up to `steps` records of the orbit of `start`. Orbits that reach a state
/// where the map is undefined (the ray `y = 0` for `cf`, the indifferent
/// fixed point `a = 1` for the Gauss map and the extensions) stop early with
/// a [`Terminal`] marker.
pub fn orbit<T: HeckeScalar>(ctx: &HeckeContext, kind: OrbitKind, start: &[T], steps: usize) -> Result<Orbit> {
    check_start(ctx, kind, start)?;
    let mut records = Vec::with_capacity(steps.min(1 << 20));
    let f64s = |v: &[&T]| v.iter().map(|x| x.to_f64()).collect::<Vec<_>>();
    let stop = |records: &Vec<Record>, e: Error| match e {
        Error::IndifferentFixedPoint | Error::AccelerationLimit(_) => Ok(terminal(records.len(), e.to_string())),
        e => Err(e),
    };
    let term = match kind {
        OrbitKind::Cf => {
            let u = Vec2::new(start[0].clone(), start[1].clone());
            let it = cf_itinerary(ctx, &u, steps)?;
            let mut cur = u;
            for (k, _) in it.steps.iter().enumerate() {
                let step = cf_step(ctx, &cur)?;
                records.push(Record {
                    step: k + 1,
                    coords: f64s(&[&step.output.x, &step.output.y]),
                    index: step.sector,
                    roof: None,
                });
                cur = step.output;
            }
            match it.outcome {
                CfOutcome::Terminated => terminal(records.len(), "landed on the ray y = 0"),
                CfOutcome::PrecisionExhausted => terminal(records.len(), "float precision exhausted"),
                CfOutcome::MaxSteps => None,
            }
        }
        OrbitKind::Bcz => {
            let mut p = TrianglePoint::new(start[0].to_f64(), start[1].to_f64());
            for k in 1..=steps {
                let (index, r, next) = (partition_index(ctx, p)?, roof(ctx, p)?, bcz_map(ctx, p)?);
                records.push(Record { step: k, coords: vec![next.a, next.b], index, roof: Some(r) });
                p = next;
            }
            None
        }
        OrbitKind::Farey => {
            let mut a = start[0].clone();
            for k in 1..=steps {
                let i = branch_of(ctx, &a)?;
                a = crate::intervalmaps::farey_branch(ctx, i, &a);
                records.push(Record { step: k, coords: f64s(&[&a]), index: i, roof: None });
            }
            None
        }
        OrbitKind::Gauss => {
            let mut a = start[0].clone();
            let mut t = None;
            for k in 1..=steps {
                let i = branch_of(ctx, &a)?;
                match gauss(ctx, &a) {
                    Ok((next, _)) => a = next,
                    Err(e) => {
                        t = stop(&records, e)?;
                        break;
                    }
                }
                records.push(Record { step: k, coords: f64s(&[&a]), index: i, roof: None });
            }
            t
        }
        OrbitKind::FareyExt | OrbitKind::GaussExt => {
            let (mut a, mut s) = (start[0].clone(), start[1].clone());
            let mut t = None;
            for k in 1..=steps {
                let i = branch_of(ctx, &a)?;
                let next = if kind == OrbitKind::FareyExt {
                    farey_ext_step(ctx, &a, &s)
                } else {
                    gauss_ext_step(ctx, &a, &s).map(|(a, s, _)| (a, s))
                };
                match next {
                    Ok((a2, s2)) => (a, s) = (a2, s2),
                    Err(e) => {
                        t = stop(&records, e)?;
                        break;
                    }
                }
                records.push(Record { step: k, coords: f64s(&[&a, &s]), index: i, roof: None });
            }
            t
        }
    };
    Ok(Orbit { kind, records, terminal: term })
}
