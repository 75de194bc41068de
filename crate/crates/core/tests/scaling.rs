mod common;

use blochlat::lattice::LatticeKind;
use blochlat::norms::WeightedNorm;
use blochlat::periodization::{compose_z, fiber_hat, fiber_hat_cf, fiber_hat_fc, ZField, ZKernel, ZKernelCF, ZKernelFC};
use blochlat::random;
use blochlat::scaling::{conjugate_apply, push_forward, scale_kernel, scaled_fiber, scaled_norm_check, scaled_spec, ScaleFactors};
use blochlat::LatticeSpec;
use common::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn sigma() -> ScaleFactors {
    ScaleFactors::new(4.0, 2.0).unwrap()
}

#[test]
fn scaled_fiber_at_twenty_points() {
    let spec = LatticeSpec::reference();
    let s = sigma();
    let scaled = scaled_spec(&spec, &s).unwrap();
    let mut rng = random::seeded(17);
    let a = ZKernel::random(spec.clone(), 2, &mut rng);
    let a_s = scale_kernel(&a, &s).unwrap();
    let blk = block(&spec);
    for t in 0..20 {
        let k: Vec<Complex64> = (0..2)
            .map(|ax| cx(random::uniform(&mut rng) * scaled.dual_coarse_period(ax), random::uniform(&mut rng)))
            .collect();
        let i = t % blk.len();
        let j = (5 * t + 3) % blk.len();
        let (m, m2) = (blk.unravel(i), blk.unravel(j));
        // Scaled dual-block momenta, including a representative shifted by a full period.
        let ell = scaled.dual_block_momentum(&m);
        let mut ell2 = scaled.dual_block_momentum(&m2);
        ell2[0] += 2.0 * std::f64::consts::PI / scaled.spacing(0);
        let got = scaled_fiber(&a, &s, &k, &ell, &ell2).unwrap();
        let want = fiber_hat(&a_s, &k).into_entries()[(i, j)];
        // Direct oracle on the original kernel at k/σ.
        let k_orig: Vec<Complex64> = k.iter().enumerate().map(|(ax, z)| z / s.sigma(ax)).collect();
        let direct = fiber_oracle(&a, &k_orig, &representatives(&spec, &[0, 0]))[(i, j)];
        assert!((got - want).norm() <= 1e-12 * want.norm().max(1.0), "t = {t}");
        assert!((direct - want).norm() <= 1e-12 * want.norm().max(1.0), "t = {t}");
    }
}

#[test]
fn scaled_kernel_has_scaled_volume_factor() {
    // Entries scale by σ_Tσ_X^d so that vol_f·a is unchanged.
    let spec = LatticeSpec::reference();
    let s = sigma();
    let mut rng = random::seeded(2);
    let a = ZKernel::random(spec, 1, &mut rng);
    let a_s = scale_kernel(&a, &s).unwrap();
    for (x, y) in a.entries().zip(a_s.entries()) {
        let lhs = y.2 * a_s.spec().vol_f();
        let rhs = x.2 * a.spec().vol_f();
        assert!((lhs - rhs).norm() <= 1e-14 * rhs.norm().max(1e-300));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn conjugation_and_covariance(seed in 0u64..1000, st in 0.5f64..5.0, sx in 0.5f64..5.0) {
        let spec = LatticeSpec::new(0.5, 0.25, 3, 3, 9, 9, 1).unwrap();
        let s = ScaleFactors::new(st, sx).unwrap();
        let scaled = scaled_spec(&spec, &s).unwrap();
        let mut rng = random::seeded(seed);
        let a = ZKernel::random(spec.clone(), 1, &mut rng);
        let b = ZKernel::random(spec.clone(), 2, &mut rng);
        let a_s = scale_kernel(&a, &s).unwrap();
        let alpha = ZField::random(scaled.clone(), LatticeKind::Fine, 2, &mut rng);
        let x = conjugate_apply(&a, &s, &alpha).unwrap();
        let y = a_s.apply(&alpha);
        let scale = y.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
        prop_assert!(x.max_abs_diff(&y) <= 1e-12 * scale);

        let lhs = scale_kernel(&compose_z(&a, &b).unwrap(), &s).unwrap();
        let rhs = compose_z(&a_s, &scale_kernel(&b, &s).unwrap()).unwrap();
        for (p, q) in lhs.entries().zip(rhs.entries()) {
            prop_assert!((p.2 - q.2).norm() <= 1e-12 * rhs.max_abs());
        }

        let beta = ZField::random(scaled, LatticeKind::Fine, 2, &mut rng);
        let lhs = push_forward(&alpha, &spec).inner(&push_forward(&beta, &spec));
        let rhs = alpha.inner(&beta) * s.jacobian(1);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
    }

    #[test]
    fn double_scaling_composes(seed in 0u64..1000, a1 in 0.5f64..4.0, a2 in 0.5f64..4.0, b1 in 0.5f64..4.0, b2 in 0.5f64..4.0) {
        let spec = LatticeSpec::reference();
        let (s, t) = (ScaleFactors::new(a1, a2).unwrap(), ScaleFactors::new(b1, b2).unwrap());
        let mut rng = random::seeded(seed);
        let a = ZKernel::random(spec, 2, &mut rng);
        let twice = scale_kernel(&scale_kernel(&a, &s).unwrap(), &t).unwrap();
        let once = scale_kernel(&a, &s.then(&t)).unwrap();
        for (p, q) in twice.entries().zip(once.entries()) {
            prop_assert!((p.2 - q.2).norm() <= 1e-12 * once.max_abs());
        }
        for ax in 0..2 {
            prop_assert!((twice.spec().spacing(ax) - once.spec().spacing(ax)).abs() <= 1e-15 * once.spec().spacing(ax));
        }
    }

    #[test]
    fn norm_inequality_at_threshold(seed in 0u64..1000, st in 0.3f64..6.0, sx in 0.3f64..6.0, ms in 0.1f64..2.0) {
        let spec = LatticeSpec::reference();
        let s = ScaleFactors::new(st, sx).unwrap();
        let mut rng = random::seeded(seed);
        let a = ZKernel::random(spec.clone(), 2, &mut rng);
        prop_assert!(scaled_norm_check(&a, &s, ms).unwrap().pass);
        let b = ZKernelFC::random(spec.clone(), 1, &mut rng);
        prop_assert!(scaled_norm_check(&b, &s, ms).unwrap().pass);
        let c = ZKernelCF::random(spec, 1, &mut rng);
        prop_assert!(scaled_norm_check(&c, &s, ms).unwrap().pass);
        // Below the threshold the inequality can fail, but never for a = identity.
        let id = ZKernel::identity(LatticeSpec::reference());
        let scaled = scale_kernel(&id, &s).unwrap();
        prop_assert!((scaled.weighted_norm(ms) - id.weighted_norm(0.0)).abs() < 1e-12);
    }

    #[test]
    fn mixed_fibers_scale_covariantly(seed in 0u64..1000, re in -1.0f64..1.0, im in -1.0f64..1.0) {
        let spec = LatticeSpec::reference();
        let s = sigma();
        let mut rng = random::seeded(seed);
        let b = ZKernelFC::random(spec.clone(), 1, &mut rng);
        let c = ZKernelCF::random(spec.clone(), 1, &mut rng);
        let k = [cx(re, im), cx(-0.5 * re, 0.3 * im)];
        let ko: Vec<Complex64> = k.iter().enumerate().map(|(ax, z)| z / s.sigma(ax)).collect();
        let want = fiber_hat_fc(&b, &ko);
        prop_assert!(vec_diff(&fiber_hat_fc(&scale_kernel(&b, &s).unwrap(), &k), &want) <= 1e-12 * vec_max(&want));
        let want = fiber_hat_cf(&c, &ko);
        prop_assert!(vec_diff(&fiber_hat_cf(&scale_kernel(&c, &s).unwrap(), &k), &want) <= 1e-12 * vec_max(&want));
    }
}
