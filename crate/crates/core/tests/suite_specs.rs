use blochlat::verify::{run_suite, SuiteConfig};
use blochlat::LatticeSpec;

fn small() -> SuiteConfig {
    SuiteConfig {
        seed: 11,
        kernels: 2,
        fields: 2,
        strip_samples: 16,
        fiber_points: 4,
        ..SuiteConfig::default()
    }
}

fn assert_suite(spec: LatticeSpec) {
    let checks = run_suite(&spec, &small()).unwrap();
    let failed: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
    assert!(failed.is_empty(), "{spec:?}: {failed:#?}");
}

#[test]
fn anisotropic_spacings() {
    assert_suite(LatticeSpec::new(0.5, 0.25, 3, 3, 9, 9, 1).unwrap());
}

#[test]
fn unequal_periods() {
    assert_suite(LatticeSpec::new(1.0, 0.7, 3, 1, 9, 7, 1).unwrap());
}

#[test]
fn even_period() {
    assert_suite(LatticeSpec::new(1.0, 1.0, 2, 3, 8, 9, 1).unwrap());
}

#[test]
fn time_only() {
    assert_suite(LatticeSpec::new(0.8, 1.0, 3, 1, 15, 1, 0).unwrap());
}

#[test]
fn two_space_dimensions() {
    assert_suite(LatticeSpec::new(1.0, 1.0, 1, 3, 3, 6, 2).unwrap());
}
