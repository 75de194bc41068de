mod common;

use blochlat::averaging::{q_star_q_kernel, Profile};
use blochlat::error::Error;
use blochlat::norms::{NormWeight, SamplingPlan};
use blochlat::opfunc::{
    default_contour, function_norm_bound, function_of_operator, Contour, FnAnalytic, NamedFunction,
};
use blochlat::periodization::{periodize, ZKernel};
use blochlat::random;
use blochlat::verify::{tight_circle, trapezoid_errors};
use blochlat::{CMatrix, LatticeSpec};
use common::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn dense(a: &ZKernel) -> CMatrix {
    periodize(a).unwrap().operator_matrix()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn square_and_polynomial_match_matrix_algebra(seed in 0u64..1000) {
        let spec = LatticeSpec::reference();
        let mut rng = random::seeded(seed);
        let a = ZKernel::random(spec, 1, &mut rng);
        let m = dense(&a);
        let contour = default_contour(&a).unwrap();
        let sq = function_of_operator(&a, &NamedFunction::Square, &contour).unwrap();
        let want = &m * &m;
        prop_assert!(max_diff(&sq.kernel.operator_matrix(), &want) <= 1e-8 * max_entry(&want));
        let coeffs = vec![cx(2.0, 0.0), cx(0.0, -1.0), cx(0.5, 0.0)];
        let poly = function_of_operator(&a, &NamedFunction::Polynomial(coeffs.clone()), &contour).unwrap();
        let id = CMatrix::identity(m.nrows(), m.ncols());
        let want = &id * coeffs[0] + &m * coeffs[1] + &m * &m * coeffs[2];
        prop_assert!(max_diff(&poly.kernel.operator_matrix(), &want) <= 1e-8 * max_entry(&want));
    }

    #[test]
    fn exponential_matches_matrix_exponential(seed in 0u64..1000) {
        let spec = LatticeSpec::reference();
        let mut rng = random::seeded(seed);
        let a0 = ZKernel::random(spec.clone(), 1, &mut rng);
        // Keep the spectrum small so e^z stays well conditioned on the contour.
        let a = ZKernel::from_fn(spec, 1, |b, d| {
            let u2: Vec<i64> = b.iter().zip(d).map(|(x, y)| x + y).collect();
            a0.get(b, &u2) * 0.05
        });
        let contour = default_contour(&a).unwrap();
        let f = function_of_operator(&a, &FnAnalytic(|z: Complex64| z.exp()), &contour).unwrap();
        let want = dense(&a).exp();
        prop_assert!(max_diff(&f.kernel.operator_matrix(), &want) <= 1e-9 * max_entry(&want));
    }
}

#[test]
fn polyline_and_circle_agree() {
    let spec = LatticeSpec::reference();
    let mut rng = random::seeded(9);
    let a = ZKernel::random(spec, 1, &mut rng);
    let circle = default_contour(&a).unwrap();
    let (c, r) = match circle {
        Contour::Circle { center, radius } => (center, radius),
        _ => unreachable!(),
    };
    let square = Contour::polyline(vec![c + cx(r, -r), c + cx(r, r), c + cx(-r, r), c + cx(-r, -r)]).unwrap();
    let x = function_of_operator(&a, &NamedFunction::Square, &circle).unwrap();
    let y = function_of_operator(&a, &NamedFunction::Square, &square).unwrap();
    assert!(max_diff(x.kernel.entries(), y.kernel.entries()) <= 1e-8 * max_entry(x.kernel.entries()));
}

#[test]
fn contour_through_spectrum_rejected() {
    let spec = LatticeSpec::reference();
    let q = Profile::naive(spec).unwrap();
    let a = q_star_q_kernel(&q);
    // The spectrum is {0, 1}; this circle passes through 1.
    let contour = Contour::circle(cx(0.5, 0.0), 0.5).unwrap();
    let err = function_of_operator(&a, &NamedFunction::Identity, &contour).unwrap_err();
    assert!(matches!(err, Error::ContourClearance { .. }), "{err:?}");
}

#[test]
fn contour_missing_spectrum_rejected() {
    let spec = LatticeSpec::reference();
    let q = Profile::naive(spec).unwrap();
    let a = q_star_q_kernel(&q);
    let contour = Contour::circle(cx(1.0, 0.0), 0.3).unwrap();
    let err = function_of_operator(&a, &NamedFunction::Identity, &contour).unwrap_err();
    assert!(matches!(err, Error::SpectrumNotEnclosed { .. }), "{err:?}");
}

#[test]
fn enclosed_singularity_rejected() {
    let spec = LatticeSpec::reference();
    let q = Profile::naive(spec).unwrap();
    let a = q_star_q_kernel(&q);
    let contour = Contour::circle(cx(0.5, 0.0), 0.8).unwrap();
    assert!(function_of_operator(&a, &NamedFunction::Inverse, &contour).is_err());
}

#[test]
fn bound_grows_as_contour_approaches_spectrum() {
    let spec = LatticeSpec::reference();
    let q = Profile::naive(spec.clone()).unwrap();
    let a = q_star_q_kernel(&q);
    let w = NormWeight::new(1.0, 0.5, 0.25).unwrap();
    let plan = SamplingPlan::for_spread(&spec, 2, 2, 0);
    let mut prev = 0.0;
    for r in [0.6, 0.55, 0.51] {
        let contour = Contour::circle(cx(0.5, 0.0), r).unwrap();
        let rep = function_norm_bound(&a, &NamedFunction::Identity, &contour, w, &plan).unwrap();
        assert!(rep.pass, "radius {r}");
        assert!(rep.direct_norm <= rep.bound_sum && rep.bound_sum <= rep.bound_max * (1.0 + 1e-12));
        assert!(rep.bound_sum > prev, "radius {r}: {} after {prev}", rep.bound_sum);
        prev = rep.bound_sum;
    }
}

#[test]
fn trapezoid_converges_geometrically() {
    let spec = LatticeSpec::reference();
    let mut rng = random::seeded(13);
    let a = ZKernel::random(spec, 1, &mut rng);
    let contour = tight_circle(&a).unwrap();
    let errors = trapezoid_errors(&a, &NamedFunction::ExpTaylor(12), &contour, 6).unwrap();
    let mut counted = 0;
    for pair in errors.windows(2) {
        if pair[0] >= 1e-11 {
            assert!(pair[1].max(1e-12) / pair[0] <= 0.1, "{errors:?}");
            counted += 1;
        }
    }
    assert!(counted >= 2, "{errors:?}");
    assert!(*errors.last().unwrap() < 1e-12);
}
