mod common;

use blochlat::lattice::Shape;
use blochlat::norms::{
    self, c_constant, decay_bound_from_fibers, stokes_shift_value, NormWeight, SamplingPlan, WeightedNorm,
};
use blochlat::periodization::{default_nodes, fiber_hat, periodize, ZKernel};
use blochlat::random;
use blochlat::LatticeSpec;
use common::*;
use proptest::prelude::*;

/// sup over rows and columns of vol_f Σ |a(u,u')| e^{m|u−u'|}, over a large window.
fn norm_oracle(a: &ZKernel, m: f64) -> f64 {
    let spec = a.spec();
    let r = a.radius() as i64;
    let blk = block(spec);
    let win = Shape::new(vec![(2 * r + 1) as usize; spec.axes()]);
    let mut best = 0.0f64;
    for u in blk.iter() {
        let (mut row, mut col) = (0.0, 0.0);
        for w in win.iter() {
            let d: Vec<i64> = w.iter().map(|x| x - r).collect();
            let v: Vec<i64> = u.iter().zip(&d).map(|(p, q)| p + q).collect();
            let e = (m * spec.fine_length(&d)).exp();
            row += a.get(&u, &v).norm() * e;
            col += a.get(&v, &u).norm() * e;
        }
        best = best.max(row).max(col);
    }
    best * spec.vol_f()
}

#[test]
fn c_constant_matches_brute_force() {
    for spec in [LatticeSpec::reference(), LatticeSpec::new(0.5, 0.8, 1, 1, 4, 4, 2).unwrap()] {
        for gap in [0.75, 2.0] {
            let c = c_constant(gap, &spec).unwrap();
            let eps = (0..spec.axes()).map(|a| spec.spacing(a)).fold(f64::INFINITY, f64::min);
            let n = (45.0 / (gap * eps)).ceil() as i64;
            let shape = Shape::new(vec![(2 * n + 1) as usize; spec.axes()]);
            if shape.len() > 2_000_000 {
                assert!(gap < 1.0, "oracle skipped for gap {gap}");
                continue;
            }
            let direct: f64 = shape
                .iter()
                .map(|w| {
                    let d: Vec<i64> = w.iter().map(|x| x - n).collect();
                    (-gap * spec.fine_length(&d)).exp()
                })
                .sum::<f64>()
                * spec.vol_f();
            assert!((c.value - direct).abs() <= 1e-12 * direct, "{} vs {}", c.value, direct);
            assert!(c.tail_bound <= 1e-15 * c.value);
        }
    }
}

#[test]
fn c_constant_one_dimensional_closed_form() {
    let spec = LatticeSpec::new(1.0, 1.0, 1, 1, 3, 1, 0).unwrap();
    let gap = 0.3;
    let c = c_constant(gap, &spec).unwrap();
    let closed = (1.0 + (-gap).exp()) / (1.0 - (-gap).exp());
    assert!((c.value - closed).abs() < 1e-13 * closed);
}

#[test]
fn shift_kernel_norm_is_exponential() {
    let spec = LatticeSpec::new(0.5, 0.25, 3, 3, 9, 9, 1).unwrap();
    let d = [2i64, -1];
    let a = ZKernel::shift(spec.clone(), &d);
    for m in [0.0, 0.5, 1.3] {
        let want = (m * spec.fine_length(&d)).exp();
        assert!((a.weighted_norm(m) - want).abs() < 1e-13 * want);
    }
}

#[test]
fn stokes_shift_recovers_weighted_kernel() {
    let spec = LatticeSpec::reference();
    let mut rng = random::seeded(21);
    let a = ZKernel::random(spec.clone(), 2, &mut rng);
    let nodes = default_nodes(&spec, 2, 5);
    for (b, d, v) in a.entries().step_by(7) {
        let u2: Vec<i64> = b.iter().zip(&d).map(|(x, y)| x + y).collect();
        for mp in [0.25, 0.5, 1.0] {
            let got = stokes_shift_value(&a, &b, &u2, mp, &nodes);
            let want = v * (mp * spec.fine_length(&d)).exp();
            assert!((got - want).norm() <= 1e-10 * want.norm().max(1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn weighted_norm_matches_oracle(seed in 0u64..1000, s in 0usize..4, m in 0.0f64..2.0) {
        let spec = specs()[s].clone();
        let mut rng = random::seeded(seed);
        let a = ZKernel::random(spec, 2, &mut rng);
        let want = norm_oracle(&a, m);
        prop_assert!((a.weighted_norm(m) - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn weighted_norm_is_submultiplicative(seed in 0u64..1000, m in 0.0f64..1.5) {
        let spec = LatticeSpec::reference();
        let mut rng = random::seeded(seed);
        let a = ZKernel::random(spec.clone(), 1, &mut rng);
        let b = ZKernel::random(spec, 2, &mut rng);
        let ab = blochlat::periodization::compose_z(&a, &b).unwrap();
        prop_assert!(ab.weighted_norm(m) <= a.weighted_norm(m) * b.weighted_norm(m) * (1.0 + 1e-12));
    }

    #[test]
    fn periodization_does_not_increase_norm(seed in 0u64..1000, m in 0.0f64..1.5) {
        let spec = LatticeSpec::reference();
        let mut rng = random::seeded(seed);
        let a = ZKernel::random(spec, 2, &mut rng);
        let p = periodize(&a).unwrap();
        prop_assert!(p.weighted_norm(m) <= a.weighted_norm(m) * (1.0 + 1e-12));
    }

    #[test]
    fn fiber_entries_bounded_in_strip(seed in 0u64..1000, re in -3.0f64..3.0, t in 0.0f64..1.0, angle in 0.0f64..6.3) {
        let spec = LatticeSpec::reference();
        let mut rng = random::seeded(seed);
        let a = ZKernel::random(spec, 2, &mut rng);
        let k = [cx(re, t * angle.cos()), cx(-re, t * angle.sin())];
        let f = fiber_hat(&a, &k).into_entries();
        prop_assert!(max_entry(&f) <= a.weighted_norm(1.0) * (1.0 + 1e-12));
    }

    #[test]
    fn decay_chain_holds(seed in 0u64..200) {
        let spec = LatticeSpec::reference();
        let mut rng = random::seeded(seed);
        let a = ZKernel::random(spec.clone(), 2, &mut rng);
        let w = NormWeight::new(1.0, 0.5, 0.25).unwrap();
        let plan = SamplingPlan::for_spread(&spec, 2, 2, seed);
        let rep = decay_bound_from_fibers(&a, w, &plan).unwrap();
        prop_assert!(rep.pass);
        prop_assert!(rep.decay <= rep.sum_bound * (1.0 + 1e-10));
        let chain = rep.chain.unwrap();
        prop_assert!(chain.pass);
        prop_assert!((chain.kernel_norm - a.weighted_norm(0.25)).abs() <= 1e-12 * chain.kernel_norm);
    }
}

#[test]
fn strip_samples_stay_inside_ball() {
    let spec = LatticeSpec::new(0.5, 0.25, 3, 3, 9, 9, 2).unwrap();
    let mut rng = random::seeded(4);
    for k in norms::sample_strip(&spec, 0.7, 200, &mut rng) {
        let im: f64 = k.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
        assert!(im < 0.7);
        for (a, z) in k.iter().enumerate() {
            assert!(z.re >= 0.0 && z.re < spec.dual_coarse_period(a));
        }
    }
}
