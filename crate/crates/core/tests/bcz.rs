use hecke_core::algebra::dot;
use hecke_core::bcz::*;
use hecke_core::hecke::HeckeContext;
use hecke_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sample_triangle(ctx: &HeckeContext, rng: &mut ChaCha8Rng) -> TrianglePoint {
    let lambda = ctx.lambda();
    loop {
        let a = 1.0 - rng.gen::<f64>();
        let b = 1.0 - lambda * rng.gen::<f64>();
        if b > 1.0 - lambda * a {
            return TrianglePoint::new(a, b);
        }
    }
}

#[test]
fn partition_is_total_and_disjoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for q in 3..=8 {
        let ctx = HeckeContext::new(q).unwrap();
        let w = ctx.float();
        for _ in 0..100_000 {
            let p = sample_triangle(&ctx, &mut rng);
            let v = hecke_core::algebra::Vec2::new(p.a, p.b);
            let members: Vec<usize> = (2..q as usize)
                .filter(|&i| dot(&v, w.w(i - 1)) > 1.0 && dot(&v, w.w(i)) <= 1.0)
                .collect();
            assert_eq!(members.len(), 1, "q={q} p={p:?}");
            assert_eq!(partition_index(&ctx, p).unwrap(), members[0]);
        }
    }
}

#[test]
fn q3_matches_classical_bcz_map() {
    let ctx = HeckeContext::new(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10_000 {
        let p = sample_triangle(&ctx, &mut rng);
        let classical = TrianglePoint::new(p.b, -p.a + ((1.0 + p.a) / p.b).floor() * p.b);
        assert_eq!(bcz_map(&ctx, p).unwrap(), classical);
    }
}

#[test]
fn roof_and_map_agree_with_first_return_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for q in 3..=6 {
        let ctx = HeckeContext::new(q).unwrap();
        let oracle = FirstReturnOracle::new(&ctx, 24.0, 6);
        for _ in 0..200 {
            let p = sample_triangle(&ctx, &mut rng);
            let r = oracle.first_return(p).unwrap_or_else(|e| panic!("q={q} {p:?}: {e}"));
            let roof = roof(&ctx, p).unwrap();
            let next = bcz_map(&ctx, p).unwrap();
            assert!((r.time - roof).abs() <= 1e-9 * roof.max(1.0), "q={q} {p:?}");
            assert!((r.next.a - next.a).abs() <= 1e-9 && (r.next.b - next.b).abs() <= 1e-9, "q={q} {p:?}");
        }
    }
}

#[test]
fn return_vector_is_w_i() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for q in 3..=7 {
        let ctx = HeckeContext::new(q).unwrap();
        let oracle = FirstReturnOracle::new(&ctx, 24.0, 6);
        for _ in 0..200 {
            let p = sample_triangle(&ctx, &mut rng);
            let i = partition_index(&ctx, p).unwrap();
            let r = oracle.first_return(p).unwrap_or_else(|e| panic!("q={q} {p:?}: {e}"));
            let w = ctx.float().w(i);
            assert!((r.vector.x - w.x).abs() < 1e-9 && (r.vector.y - w.y).abs() < 1e-9, "q={q} {p:?}");
        }
    }
}

#[test]
fn orbits_stay_in_triangle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for q in 3..=10 {
        let ctx = HeckeContext::new(q).unwrap();
        let p = sample_triangle(&ctx, &mut rng);
        for x in bcz_orbit(&ctx, p, 5_000).unwrap() {
            assert!(in_triangle(&ctx, x));
        }
    }
}

#[test]
fn domain_errors() {
    let ctx = HeckeContext::new(4).unwrap();
    for p in [TrianglePoint::new(1.2, 0.5), TrianglePoint::new(0.5, 1.5), TrianglePoint::new(-0.1, 1.0)] {
        assert!(matches!(roof(&ctx, p), Err(Error::OutsideTriangle(..))));
        assert!(matches!(bcz_map(&ctx, p), Err(Error::OutsideTriangle(..))));
    }
    assert!(Strip::new(0.0).is_err());
    assert!(Strip::new(1.0).unwrap().contains(1.0, 0.0));
}
