use hecke_core::algebra::{FieldElement, Scalar};
use hecke_core::cfrac::cf_itinerary;
use hecke_core::hecke::HeckeContext;
use hecke_core::intervalmaps::*;
use hecke_core::sampling::{dyadic_unit, sample_rng};
use hecke_core::suspension::{branch_boundary, branch_of, h_index, in_section, roof_component};
use hecke_core::Error;
use num_rational::BigRational;
use rand::Rng;
use rayon::prelude::*;

fn boundaries(ctx: &HeckeContext) -> Vec<f64> {
    (0..ctx.q() as usize).map(|i| branch_boundary::<f64>(ctx, i)).collect()
}

/// A point of `I_i` at distance at least `margin` (relative) from its ends.
fn point_in_branch(ctx: &HeckeContext, i: usize, rng: &mut impl Rng, margin: f64) -> f64 {
    let b = boundaries(ctx);
    let (lo, hi) = (b[i + 1], b[i]);
    lo + (hi - lo) * rng.gen_range(margin..1.0 - margin)
}

fn section_point(ctx: &HeckeContext, rng: &mut impl Rng) -> (f64, f64) {
    loop {
        let a: f64 = rng.gen_range(1e-3..1.0);
        let s = rng.gen::<f64>() / (a * (1.0 - a));
        if in_section(ctx, &a, &s) {
            return (a, s);
        }
    }
}

#[test]
fn full_branch_property() {
    let mut rng = sample_rng(1, 0);
    for q in 3..=8 {
        let ctx = HeckeContext::new(q).unwrap();
        for i in 0..=q as usize - 2 {
            let mut xs: Vec<f64> = (0..200).map(|_| 1.0 - rng.gen::<f64>()).collect();
            xs.sort_by(f64::total_cmp);
            let pre: Vec<f64> = xs.iter().map(|x| inverse_branch(&ctx, i, x).unwrap()).collect();
            for (x, a) in xs.iter().zip(&pre) {
                assert_eq!(branch_of(&ctx, a).unwrap(), i, "q={q} i={i} x={x}");
                assert!((farey(&ctx, a).unwrap() - x).abs() < 1e-12);
            }
            assert!(pre.windows(2).all(|w| w[0] <= w[1]));
            let a = point_in_branch(&ctx, i, &mut rng, 1e-6);
            let back = inverse_branch(&ctx, i, &farey(&ctx, &a).unwrap()).unwrap();
            assert!((back - a).abs() < 1e-12);
        }
    }
}

#[test]
fn farey_density_is_invariant() {
    let mut rng = sample_rng(2, 0);
    for q in 3..=8 {
        let ctx = HeckeContext::new(q).unwrap();
        let xs: Vec<f64> = (0..100).map(|_| rng.gen_range(1e-9..1.0)).collect();
        assert!(farey_transfer_check(&ctx, &xs).unwrap() < 1e-10, "q={q}");
        assert!(lebesgue_transfer_residual(&ctx, &xs).unwrap() > 1e-3, "q={q}");
    }
}

#[test]
fn derivative_matches_finite_differences() {
    let mut rng = sample_rng(3, 0);
    for q in 3..=8 {
        let ctx = HeckeContext::new(q).unwrap();
        for i in 0..=q as usize - 2 {
            for _ in 0..100 {
                let a = point_in_branch(&ctx, i, &mut rng, 1e-3);
                let d = farey_derivative(&ctx, a).unwrap();
                let h = 1e-6 * (boundaries(&ctx)[i] - boundaries(&ctx)[i + 1]);
                let fd = (farey(&ctx, &(a + h)).unwrap() - farey(&ctx, &(a - h)).unwrap()) / (2.0 * h);
                assert!((fd - d.value).abs() < 1e-6 * d.value, "q={q} a={a}");
                assert!(!d.at_endpoint && d.branch == i);
                if (1e-2..=1.0 - 1e-2).contains(&a) {
                    assert!(d.value > 1.0 + 1e-6, "q={q} a={a}: {}", d.value);
                } else {
                    assert!(d.value >= 1.0);
                }
            }
        }
        let near0 = farey_derivative(&ctx, 1e-9).unwrap().value;
        let near1 = farey_derivative(&ctx, 1.0 - 1e-9).unwrap().value;
        assert!((near0 - 1.0).abs() < 1e-6 && (near1 - 1.0).abs() < 1e-6);
    }
}

#[test]
fn markov_condition_and_surjectivity() {
    for q in [3u32, 5, 7] {
        let ctx = HeckeContext::new(q).unwrap();
        let qq = q as usize;
        for i in 0..=qq - 2 {
            let target = qq - 2 - i;
            let (mut low, mut high) = (false, false);
            for k in 0..10_000u64 {
                let mut rng = sample_rng(4, k);
                let a = point_in_branch(&ctx, i, &mut rng, 0.0);
                if a >= 1.0 {
                    continue;
                }
                let s = rng.gen::<f64>() / (a * (1.0 - a));
                let (a2, s2) = farey_ext_step(&ctx, &a, &s).unwrap();
                assert!((a2 - farey(&ctx, &a).unwrap()).abs() < 1e-12);
                assert_eq!(h_index(&ctx, &a2, &s2).unwrap(), target, "q={q} i={i} ({a}, {s})");
                let b2 = 1.0 - a2;
                let lo = if target == 0 { 0.0 } else { roof_component(&ctx, target, &a2, &b2).unwrap() };
                let hi = roof_component(&ctx, target + 1, &a2, &b2).unwrap();
                let t = (s2 - lo) / (hi - lo);
                low |= t < 0.05;
                high |= t > 0.95;
            }
            assert!(low && high, "q={q} i={i}: strip not swept");
        }
    }
}

#[test]
fn worked_extension_values() {
    let ctx = HeckeContext::new(3).unwrap();
    let cases = [((0.3, 0.0), (3.0 / 7.0, 0.0)), ((0.3, 1.0), (3.0 / 7.0, 0.49)), ((0.75, 0.0), (2.0 / 3.0, 1.5))];
    for ((a, s), (a2, s2)) in cases {
        let (x, y) = farey_ext_step(&ctx, &a, &s).unwrap();
        assert!((x - a2).abs() < 1e-12 && (y - s2).abs() < 1e-12, "({a}, {s})");
    }
}

fn jacobian(f: impl Fn(f64, f64) -> Option<(f64, f64)>, a: f64, s: f64, h: f64) -> Option<f64> {
    let (ap, am) = (f(a + h, s)?, f(a - h, s)?);
    let (sp, sm) = (f(a, s + h)?, f(a, s - h)?);
    let da = ((ap.0 - am.0) / (2.0 * h), (ap.1 - am.1) / (2.0 * h));
    let ds = ((sp.0 - sm.0) / (2.0 * h), (sp.1 - sm.1) / (2.0 * h));
    Some(da.0 * ds.1 - da.1 * ds.0)
}

#[test]
fn extensions_preserve_area() {
    for q in 3..=8 {
        let ctx = HeckeContext::new(q).unwrap();
        let mut checked = 0;
        for k in 0..400u64 {
            let mut rng = sample_rng(5, k);
            let (a, s) = section_point(&ctx, &mut rng);
            let i = branch_of(&ctx, &a).unwrap();
            let farey_ext = |x: f64, y: f64| {
                (branch_of(&ctx, &x).ok()? == i).then(|| farey_ext_step(&ctx, &x, &y).ok()).flatten()
            };
            let h = 1e-5 * a.min(1.0 - a);
            if let Some(j) = jacobian(farey_ext, a, s, h) {
                assert!((j - 1.0).abs() < 1e-6, "F q={q} ({a}, {s}): {j}");
                checked += 1;
            }
            let n = match gauss_ext_step(&ctx, &a, &s) {
                Ok((_, _, n)) if n <= 8 => n,
                _ => continue,
            };
            let gauss_ext = |x: f64, y: f64| {
                let (x2, y2, m) = gauss_ext_step(&ctx, &x, &y).ok()?;
                (m == n && branch_of(&ctx, &x).ok()? == i).then_some((x2, y2))
            };
            if let Some(j) = jacobian(gauss_ext, a, s, h) {
                assert!((j - 1.0).abs() < 1e-5, "G q={q} ({a}, {s}) n={n}: {j}");
            }
        }
        assert!(checked > 300, "q={q}");
    }
}

#[test]
fn gauss_extension_stays_in_domain() {
    let ctx = HeckeContext::new(5).unwrap();
    for k in 0..10_000u64 {
        let mut rng = sample_rng(6, k);
        let (a, s) = loop {
            let (a, s) = section_point(&ctx, &mut rng);
            if in_gauss_domain(&ctx, &a, &s) {
                break (a, s);
            }
        };
        let (a2, s2, n) = gauss_ext_step(&ctx, &a, &s).unwrap();
        assert!(in_gauss_domain(&ctx, &a2, &s2), "({a}, {s}) -> ({a2}, {s2})");
        let (g, m) = gauss(&ctx, &a).unwrap();
        assert_eq!(n, m);
        assert!((g - a2).abs() < 1e-9 * n as f64, "({a}, {s}): {g} vs {a2}");
    }
}

#[test]
fn acceleration_cells_q3() {
    let ctx = HeckeContext::new(3).unwrap();
    let mut rng = sample_rng(7, 0);
    for _ in 0..2_000 {
        let a: f64 = rng.gen_range(1e-4..=0.5);
        let (_, n) = gauss(&ctx, &a).unwrap();
        let closed = (1..).find(|&n| a / (1.0 - n as f64 * a) > 0.5 || 1.0 - n as f64 * a <= 0.0).unwrap();
        assert_eq!(n, closed, "a={a}");
    }
    let rat = |n: i64, d: i64| FieldElement::from_rational(ctx.field(), BigRational::new(n.into(), d.into()));
    let mut right = rat(1, 2);
    for n in 1..=40 {
        let (lo, hi) = acceleration_cell::<FieldElement>(&ctx, 1, n).unwrap();
        assert_eq!(hi, right);
        // I_{1,n} = (1/(n+2), 1/(n+1)] for the branch a/(1 − a).
        assert_eq!((lo.clone(), hi), (rat(1, n as i64 + 2), rat(1, n as i64 + 1)));
        right = lo;
    }
}

#[test]
fn acceleration_cells_match_iteration() {
    let mut rng = sample_rng(8, 0);
    for q in 3..=7 {
        let ctx = HeckeContext::new(q).unwrap();
        for i in [0, q as usize - 2] {
            for n in 1..=30 {
                let (lo, hi) = acceleration_cell::<f64>(&ctx, i, n).unwrap();
                assert!(lo < hi);
                let a = lo + (hi - lo) * rng.gen_range(1e-6..1.0 - 1e-6);
                assert_eq!(gauss(&ctx, &a).unwrap().1, n, "q={q} i={i} a={a}");
            }
        }
    }
}

#[test]
fn gauss_mass_values() {
    for q in 3..=8 {
        let ctx = HeckeContext::new(q).unwrap();
        let m = gauss_mass(&ctx);
        assert!((m - 2.0 * (2.0 * ctx.lambda()).ln()).abs() < 1e-10, "q={q}: {m}");
        assert!((m - gauss_mass_with(&ctx, 16)).abs() < 1e-8);
        let l = ctx.lambda();
        let left = gauss_integral(&ctx, 0.0, 1.0 / (l + 1.0), 8);
        let right = gauss_integral(&ctx, l / (l + 1.0), 1.0, 8);
        assert!((left - right).abs() < 1e-12 && (left - 2f64.ln()).abs() < 1e-12);
    }
    let ctx = HeckeContext::new(3).unwrap();
    assert!((gauss_mass(&ctx) - 2.0 * 2f64.ln()).abs() < 1e-8);
}

#[test]
fn gauss_histogram_matches_density() {
    for (q, a0) in [(3, 1.0 / 2f64.sqrt()), (5, std::f64::consts::PI / 6.0)] {
        let ctx = HeckeContext::new(q).unwrap();
        let hist = birkhoff_histogram(&ctx, MapKind::Gauss, a0, 1_000_000, 64).unwrap();
        assert!(!hist.truncated);
        let d = histogram_distance(&ctx, &hist, 100.0);
        assert!(d < 0.05, "q={q}: {d}");
    }
}

#[test]
fn farey_histogram_piles_up_at_endpoints() {
    let ctx = HeckeContext::new(3).unwrap();
    let hist = birkhoff_histogram(&ctx, MapKind::Farey, 1.0 / 2f64.sqrt(), 200_000, 64).unwrap();
    let ends = (hist.counts[0] + hist.counts[63]) as f64 / hist.iterations as f64;
    assert!(ends > 0.25, "{ends}");
    assert_eq!(birkhoff_histogram(&ctx, MapKind::Gauss, 1.0, 10, 8).unwrap().truncated, true);
}

#[test]
fn coding_matches_continued_fraction() {
    for q in 3..=8 {
        let ctx = HeckeContext::new(q).unwrap();
        (0..100u64).into_par_iter().for_each(|k| {
            let mut rng = sample_rng(9, k);
            let a = dyadic_unit(&ctx, &mut rng);
            let s = a.zero_like();
            let code = geodesic_code(&ctx, &a, &s, 50).unwrap();
            let u = hecke_core::algebra::Vec2::new(a.clone(), a.one_like() - a.clone());
            let it = cf_itinerary(&ctx, &u, 50).unwrap();
            if code.terminated {
                assert!(it.terminated);
                assert_eq!(code.symbols[..code.symbols.len() - 1], it.steps[..]);
                assert_eq!(code.symbols.last(), Some(&0));
            } else {
                assert_eq!(code.symbols, it.steps, "q={q} a={a:?}");
            }
            assert!(code.symbols.iter().all(|&i| i <= q as usize - 2));
        });
    }
}

#[test]
fn code_follows_extension_strips() {
    let ctx = HeckeContext::new(5).unwrap();
    for k in 0..20u64 {
        let mut rng = sample_rng(10, k);
        let a = dyadic_unit(&ctx, &mut rng);
        let s = a.from_f64_like(rng.gen::<f64>() / 2.0);
        let code = geodesic_code(&ctx, &a, &s, 12).unwrap();
        let (mut x, mut y) = (a, s);
        for &sym in &code.symbols {
            assert_eq!(branch_of(&ctx, &x).unwrap(), sym);
            if code.terminated && x == x.one_like() {
                break;
            }
            (x, y) = farey_ext_step(&ctx, &x, &y).unwrap();
        }
    }
}

#[test]
fn code_examples() {
    let ctx = HeckeContext::new(3).unwrap();
    let code = geodesic_code(&ctx, &0.3, &0.2, 3).unwrap();
    let it = cf_itinerary(&ctx, &hecke_core::algebra::Vec2::new(0.3, 0.7), 3).unwrap();
    assert_eq!(code.symbols[0], 1);
    assert_eq!(code.symbols, it.steps);
    assert_eq!(geodesic_code(&ctx, &0.75, &0.0, 1).unwrap().symbols, vec![0]);
    assert!(matches!(geodesic_code(&ctx, &0.5, &10.0, 1), Err(Error::OutsideSection(..))));
}
