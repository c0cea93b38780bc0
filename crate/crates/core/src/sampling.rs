//! Reproducible random sampling: one ChaCha8 stream per sample index, so
//! results do not depend on how samples are spread across threads.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::FieldElement;
use crate::bcz::TrianglePoint;
use crate::hecke::HeckeContext;

/// Denominator exponent of [`dyadic`] samples.
pub const DYADIC_BITS: u32 = 32;

/// The generator for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform point of the Farey triangle `𝒯^q`, by rejection from its
/// bounding box.
pub fn triangle_point(ctx: &HeckeContext, rng: &mut impl Rng) -> TrianglePoint {
    let lambda = ctx.lambda();
    loop {
        let a = 1.0 - rng.gen::<f64>();
        let b = 1.0 - lambda * rng.gen::<f64>();
        if b > 1.0 - lambda * a {
            return TrianglePoint::new(a, b);
        }
    }
}

/// A uniform dyadic rational `k / 2^32` in `[lo, hi)`, as an exact field
/// element. `lo` and `hi` must be integers.
pub fn dyadic(ctx: &HeckeContext, rng: &mut impl Rng, lo: i64, hi: i64) -> FieldElement {
    let den = 1i64 << DYADIC_BITS;
    let k = rng.gen_range(lo * den..hi * den);
    FieldElement::from_rational(ctx.field(), BigRational::new(BigInt::from(k), BigInt::from(den)))
}

/// A uniform dyadic rational in `(0, 1)`.
pub fn dyadic_unit(ctx: &HeckeContext, rng: &mut impl Rng) -> FieldElement {
    let den = 1i64 << DYADIC_BITS;
    let k = rng.gen_range(1..den);
    FieldElement::from_rational(ctx.field(), BigRational::new(BigInt::from(k), BigInt::from(den)))
}
