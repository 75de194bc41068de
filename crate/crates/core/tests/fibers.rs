mod common;

use blochlat::lattice::Shape;
use blochlat::periodization::{
    compose_z, fiber_hat, fiber_hat_cf, fiber_hat_fc, fiber_residual, inverse_fiber_with_grid, minimal_exact_nodes,
    periodize, probe_momenta, ZKernel, ZKernelCF, ZKernelFC,
};
use blochlat::random;
use blochlat::{CMatrix, LatticeSpec};
use common::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn momentum(spec: &LatticeSpec, re: &[f64], im: &[f64]) -> Vec<Complex64> {
    (0..spec.axes())
        .map(|a| cx(re[a] * spec.dual_coarse_period(a), im[a]))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fiber_matches_definition(seed in 0u64..1000, s in 0usize..4, re in prop::array::uniform2(-1.0f64..1.0), im in prop::array::uniform2(-1.5f64..1.5)) {
        let spec = specs()[s].clone();
        let mut rng = random::seeded(seed);
        let a = ZKernel::random(spec.clone(), 2, &mut rng);
        let k = momentum(&spec, &re, &im);
        let want = fiber_oracle(&a, &k, &representatives(&spec, &vec![0; spec.axes()]));
        let got = fiber_hat(&a, &k).into_entries();
        prop_assert!(max_diff(&got, &want) <= 1e-12 * max_entry(&want));
    }

    #[test]
    fn fiber_independent_of_block_representatives(seed in 0u64..1000, shift in prop::array::uniform2(-3i64..4), im in prop::array::uniform2(-1.0f64..1.0)) {
        let spec = specs()[1].clone();
        let mut rng = random::seeded(seed);
        let a = ZKernel::random(spec.clone(), 2, &mut rng);
        let k = momentum(&spec, &[0.3, -0.2], &im);
        let base = fiber_oracle(&a, &k, &representatives(&spec, &[0, 0]));
        let moved = fiber_oracle(&a, &k, &representatives(&spec, &shift));
        prop_assert!(max_diff(&base, &moved) <= 1e-12 * max_entry(&base));
    }

    #[test]
    fn quasi_periodicity_shifts_block_indices(seed in 0u64..1000, axis in 0usize..2, im in prop::array::uniform2(-1.0f64..1.0)) {
        let spec = specs()[0].clone();
        let mut rng = random::seeded(seed);
        let a = ZKernel::random(spec.clone(), 2, &mut rng);
        let k = momentum(&spec, &[0.1, 0.4], &im);
        let mut kp = k.clone();
        kp[axis] += spec.dual_coarse_period(axis);
        let f = fiber_hat(&a, &k).into_entries();
        let g = fiber_hat(&a, &kp).into_entries();
        let blk = block(&spec);
        let mut dev = 0.0f64;
        for (i, m) in blk.iter().enumerate() {
            for (j, m2) in blk.iter().enumerate() {
                let mut mi = m.clone();
                let mut mj = m2.clone();
                mi[axis] += 1;
                mj[axis] += 1;
                dev = dev.max((g[(i, j)] - f[(blk.ravel(&mi), blk.ravel(&mj))]).norm());
            }
        }
        prop_assert!(dev <= 1e-12 * max_entry(&f));
    }

    #[test]
    fn fibers_multiply_off_the_real_axis(seed in 0u64..1000, re in prop::array::uniform2(-1.0f64..1.0), im in prop::array::uniform2(-2.0f64..2.0)) {
        let spec = specs()[0].clone();
        let mut rng = random::seeded(seed);
        let a = ZKernel::random(spec.clone(), 1, &mut rng);
        let b = ZKernel::random(spec.clone(), 2, &mut rng);
        let k = momentum(&spec, &re, &im);
        let ab = compose_z(&a, &b).unwrap();
        let want = fiber_hat(&a, &k).into_entries() * fiber_hat(&b, &k).into_entries();
        prop_assert!(max_diff(fiber_hat(&ab, &k).entries(), &want) <= 1e-12 * max_entry(&want));
    }

    #[test]
    fn transpose_fiber_reflects_momenta(seed in 0u64..1000, re in prop::array::uniform2(-1.0f64..1.0), im in prop::array::uniform2(-1.0f64..1.0)) {
        let spec = specs()[1].clone();
        let mut rng = random::seeded(seed);
        let a = ZKernel::random(spec.clone(), 2, &mut rng);
        let k = momentum(&spec, &re, &im);
        let neg: Vec<Complex64> = k.iter().map(|z| -z).collect();
        let f = fiber_hat(&a, &neg).into_entries();
        let g = fiber_hat(&a.transpose(), &k).into_entries();
        let blk = block(&spec);
        let flip = |i: usize| {
            let m: Vec<i64> = blk.unravel(i).iter().map(|x| -x).collect();
            blk.ravel(&m)
        };
        let want = CMatrix::from_fn(blk.len(), blk.len(), |i, j| f[(flip(j), flip(i))]);
        prop_assert!(max_diff(&g, &want) <= 1e-12 * max_entry(&want));
    }

    #[test]
    fn mixed_fibers_match_definition(seed in 0u64..1000, s in 0usize..4, re in prop::array::uniform2(-1.0f64..1.0), im in prop::array::uniform2(-1.0f64..1.0)) {
        let spec = specs()[s].clone();
        let mut rng = random::seeded(seed);
        let b = ZKernelFC::random(spec.clone(), 1, &mut rng);
        let c = ZKernelCF::random(spec.clone(), 1, &mut rng);
        let k = momentum(&spec, &re, &im);
        let want = fc_oracle(&b, &k);
        prop_assert!(vec_diff(&fiber_hat_fc(&b, &k), &want) <= 1e-12 * vec_max(&want));
        let want = cf_oracle(&c, &k);
        prop_assert!(vec_diff(&fiber_hat_cf(&c, &k), &want) <= 1e-12 * vec_max(&want));
    }
}

#[test]
fn periodized_mixed_kernels_act_blockwise() {
    // Dense oracle: the periodized FC kernel sums b over coarse periods.
    let spec = LatticeSpec::reference();
    let fam = blochlat::LatticeFamily::new(spec.clone()).unwrap();
    let mut rng = random::seeded(3);
    let b = ZKernelFC::random(spec.clone(), 1, &mut rng);
    let per = b.periodize().unwrap();
    let fine = Shape::new(spec.extents());
    let coarse = fam.shape(blochlat::LatticeKind::Coarse).clone();
    for (i, u) in fine.iter().enumerate() {
        for (j, x) in coarse.iter().enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for w in Shape::new(vec![5; 2]).iter() {
                let y: Vec<i64> = x.iter().zip(&w).enumerate().map(|(a, (p, q))| p + (q - 2) * coarse.extents()[a] as i64).collect();
                s += b.get(&u, &y);
            }
            assert!((per.entries()[(i, j)] - s).norm() < 1e-14);
        }
    }
}

#[test]
fn periodization_is_multiplicative_on_torus() {
    let spec = LatticeSpec::reference();
    let mut rng = random::seeded(8);
    let a = ZKernel::random(spec.clone(), 2, &mut rng);
    let b = ZKernel::random(spec.clone(), 2, &mut rng);
    let lhs = periodize(&compose_z(&a, &b).unwrap()).unwrap();
    let rhs = periodize(&a).unwrap().compose(&periodize(&b).unwrap()).unwrap();
    assert!(max_diff(lhs.entries(), rhs.entries()) <= 1e-12 * max_entry(rhs.entries()));
}

#[test]
fn aliasing_detected_without_blocks() {
    // L = 1: the block is a single point and the exact grid has 2R+1 nodes.
    let spec = LatticeSpec::new(1.0, 1.0, 1, 1, 7, 7, 1).unwrap();
    let mut rng = random::seeded(5);
    let a = ZKernel::random(spec.clone(), 2, &mut rng);
    let exact = minimal_exact_nodes(&spec, 2);
    assert_eq!(exact, vec![5, 5]);
    let probes = probe_momenta(&spec);
    let good = inverse_fiber_with_grid(&a, 2, &exact).unwrap();
    assert!(fiber_residual(&a, &good, &probes) < 1e-12);
    let bad = inverse_fiber_with_grid(&a, 2, &[4, 4]).unwrap();
    assert!(fiber_residual(&a, &bad, &probes) > 1e-6);
}

#[test]
fn undersampling_one_axis_suffices_to_alias() {
    let spec = LatticeSpec::reference();
    let mut rng = random::seeded(6);
    let a = ZKernel::random(spec.clone(), 2, &mut rng);
    let exact = minimal_exact_nodes(&spec, 2);
    let probes = probe_momenta(&spec);
    for axis in 0..2 {
        let mut under = exact.clone();
        under[axis] -= 1;
        let bad = inverse_fiber_with_grid(&a, 2, &under).unwrap();
        assert!(fiber_residual(&a, &bad, &probes) > 1e-6, "axis {axis}");
    }
}
