//! The identity and bound checks run by the `verify` task.
//!
//! Every [`Check`] compares two numbers with the convention `lhs ≤ rhs`: a
//! measured deviation against its tolerance, a quantity against its upper
//! bound, or (for detectors that must fire) a threshold against the measured
//! residual. Deviations are absolute; tolerances are scaled by the largest
//! entry of the reference side.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::averaging::{self, u_l, Profile};
use crate::error::Result;
use crate::fourier;
use crate::lattice::{cis_frac, FieldVector, LatticeFamily, LatticeKind, LatticeSpec, Shape, Window};
use crate::norms::{self, NormWeight, SamplingPlan};
use crate::opfunc::{self, AnalyticFunction, Contour, NamedFunction};
use crate::periodic_op::{max_abs, max_abs_diff, CMatrix, PeriodicKernel};
use crate::periodization::{
    compose_z, default_nodes, fiber_hat, fiber_hat_cf, fiber_hat_fc, fiber_residual, inverse_fiber_with_grid,
    minimal_exact_nodes, periodize, probe_momenta, quasi_periodicity_defect, ZField, ZKernel, ZKernelCF,
    ZKernelFC,
};
use crate::random::{self, KernelRng};
use crate::scaling::{self, ScaleFactors};

/// Relative tolerance of exact algebraic identities.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;
/// Relative tolerance of the volume identities and of zero patterns.
pub const VOLUME_TOLERANCE: f64 = 1e-14;
pub const PATTERN_TOLERANCE: f64 = 1e-14;
/// Absolute tolerance of the u_L spot values.
pub const SPOT_TOLERANCE: f64 = 1e-15;
/// A deliberately undersampled inverse must miss by more than this.
pub const ALIASING_THRESHOLD: f64 = 1e-6;
pub const STOKES_TOLERANCE: f64 = 1e-10;
pub const LINEAR_FUNCTION_TOLERANCE: f64 = 1e-10;
pub const FUNCTION_TOLERANCE: f64 = 1e-8;
/// Largest admissible error ratio per node doubling of the trapezoid rule.
pub const DOUBLING_RATIO: f64 = 0.1;
pub const QUADRATURE_FLOOR: f64 = 1e-12;
/// Slack on inequalities between independently computed norms.
pub const BOUND_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub anchor: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    pub witness: Option<String>,
}

impl Check {
    pub fn le(name: impl Into<String>, anchor: &'static str, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.into(),
            anchor,
            lhs,
            rhs,
            pass: lhs <= rhs,
            witness: None,
        }
    }

    pub fn with_witness(mut self, witness: impl Into<String>) -> Self {
        self.witness = Some(witness.into());
        self
    }
}

/// Sample sizes and the seed of one suite run.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Random kernels per identity.
    pub kernels: usize,
    /// Random fields per kernel.
    pub fields: usize,
    /// Complex momenta per kernel for the fiber sup bound.
    pub strip_samples: usize,
    /// Random momenta for pointwise fiber identities.
    pub fiber_points: usize,
    pub weight: NormWeight,
    pub scale: ScaleFactors,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            kernels: 10,
            fields: 5,
            strip_samples: 100,
            fiber_points: 20,
            weight: NormWeight {
                m: 1.0,
                m_prime: 0.5,
                m_dblprime: 0.25,
            },
            scale: ScaleFactors::new(4.0, 2.0).expect("positive factors"),
        }
    }
}

/// Groups of checks that can be run on their own.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Section {
    Volumes,
    PeriodicOperators,
    Periodization,
    InverseFiber,
    Asymmetric,
    Averaging,
    Norms,
    Functions,
    Scaling,
}

impl Section {
    pub const ALL: [Section; 9] = [
        Section::Volumes,
        Section::PeriodicOperators,
        Section::Periodization,
        Section::InverseFiber,
        Section::Asymmetric,
        Section::Averaging,
        Section::Norms,
        Section::Functions,
        Section::Scaling,
    ];
}

pub fn run_section(spec: &LatticeSpec, cfg: &SuiteConfig, section: Section) -> Result<Vec<Check>> {
    let family = LatticeFamily::new(spec.clone())?;
    match section {
        Section::Volumes => Ok(volume_checks(&family)),
        Section::PeriodicOperators => periodic_operator_checks(&family, cfg),
        Section::Periodization => periodization_checks(&family, cfg),
        Section::InverseFiber => inverse_fiber_checks(&family, cfg),
        Section::Asymmetric => asymmetric_checks(&family, cfg),
        Section::Averaging => averaging_checks(&family, cfg),
        Section::Norms => norm_checks(&family, cfg),
        Section::Functions => function_checks(&family, cfg),
        Section::Scaling => scaling_checks(&family, cfg),
    }
}

/// Runs every check on `spec`.
pub fn run_suite(spec: &LatticeSpec, cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for section in Section::ALL {
        out.extend(run_section(spec, cfg, section)?);
    }
    Ok(out)
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}

/// Keeps the (lhs, rhs) pair with the largest lhs/rhs ratio over repeated trials.
struct Worst {
    lhs: f64,
    rhs: f64,
    ratio: f64,
    witness: Option<String>,
}

impl Worst {
    fn new() -> Self {
        Self {
            lhs: 0.0,
            rhs: 0.0,
            ratio: f64::NEG_INFINITY,
            witness: None,
        }
    }

    fn push(&mut self, lhs: f64, rhs: f64, witness: impl FnOnce() -> String) {
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs > 0.0 || lhs.is_nan() {
            f64::INFINITY
        } else {
            0.0
        };
        let ratio = if ratio.is_nan() { f64::INFINITY } else { ratio };
        if ratio > self.ratio {
            self.lhs = lhs;
            self.rhs = rhs;
            self.ratio = ratio;
            self.witness = Some(witness());
        }
    }

    /// Deviation of `got` from `want` against `tol` times the largest entry of `want`.
    fn matrices(&mut self, got: &CMatrix, want: &CMatrix, tol: f64, witness: impl FnOnce() -> String) {
        self.push(max_abs_diff(got, want), tol * max_abs(want).max(f64::MIN_POSITIVE), witness);
    }

    fn vectors(&mut self, got: &[Complex64], want: &[Complex64], tol: f64, witness: impl FnOnce() -> String) {
        let dev = got.iter().zip(want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let scale = want.iter().map(|z| z.norm()).fold(0.0, f64::max);
        self.push(dev, tol * scale.max(f64::MIN_POSITIVE), witness);
    }

    fn finish(self, name: &str, anchor: &'static str) -> Check {
        let mut c = Check::le(name, anchor, self.lhs, self.rhs);
        if self.ratio == f64::INFINITY {
            c.pass = false;
        }
        c.witness = self.witness;
        c
    }
}

fn section_rng(cfg: &SuiteConfig, section: u64) -> KernelRng {
    random::seeded(cfg.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(section))
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn real_k(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| c(x)).collect()
}

/// Uniform real part over the dual coarse torus, imaginary part in [−im, im).
fn random_momentum(spec: &LatticeSpec, im: f64, rng: &mut KernelRng) -> Vec<Complex64> {
    (0..spec.axes())
        .map(|a| {
            let re = 0.5 * (random::uniform(rng) + 1.0) * spec.dual_coarse_period(a);
            Complex64::new(re, im * random::uniform(rng))
        })
        .collect()
}

fn random_field(family: &LatticeFamily, kind: LatticeKind, rng: &mut KernelRng) -> FieldVector {
    let n = family.shape(kind).len();
    FieldVector::new(family, kind, random::complex_vec(rng, n)).expect("length matches lattice")
}

fn fmt_k(k: &[Complex64]) -> String {
    let parts: Vec<String> = k.iter().map(|z| format!("{:.6}{:+.6}i", z.re, z.im)).collect();
    format!("[{}]", parts.join(", "))
}

/// Largest support radius whose window fits the fine torus.
fn fine_radius_limit(spec: &LatticeSpec) -> usize {
    (0..spec.axes()).map(|a| (spec.extent(a) - 1) / 2).min().unwrap_or(0)
}

/// Largest coarse radius whose window fits the coarse torus.
fn coarse_radius_limit(spec: &LatticeSpec) -> usize {
    (0..spec.axes())
        .map(|a| (spec.extent(a) / spec.period(a) - 1) / 2)
        .min()
        .unwrap_or(0)
}

/// e^{i p·u} for p = j·2π/(ε𝓛) and u = n·ε, exactly on the torus.
fn torus_phase(spec: &LatticeSpec, j: &[i64], n: &[i64]) -> Complex64 {
    j.iter()
        .zip(n)
        .enumerate()
        .map(|(a, (&ji, &ni))| {
            let e = spec.extent(a) as i64;
            cis_frac(ji.rem_euclid(e) * ni.rem_euclid(e), e as usize)
        })
        .product()
}

fn volume_checks(family: &LatticeFamily) -> Vec<Check> {
    let two_pi = (2.0 * PI).powi(family.axes() as i32);
    let fine = 1.0 / family.n_fine as f64;
    let coarse = 1.0 / family.n_coarse as f64;
    vec![
        Check::le(
            "fine_volume_identity",
            "eqnBOvolhvol",
            (family.vol_f * family.hvol_f / two_pi - fine).abs(),
            VOLUME_TOLERANCE * fine,
        ),
        Check::le(
            "coarse_volume_identity",
            "eqnBOvolhvol",
            (family.vol_c * family.hvol_c / two_pi - coarse).abs(),
            VOLUME_TOLERANCE * coarse,
        ),
        Check::le(
            "coarse_volume_from_fine_dual_cell",
            "eqnBOvolhvol",
            (family.vol_c * family.hvol_f / two_pi - coarse).abs(),
            VOLUME_TOLERANCE * coarse,
        ),
    ]
}

fn periodic_operator_checks(family: &LatticeFamily, cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let spec = family.spec().clone();
    let mut rng = section_rng(cfg, 1);
    let fine = family.shape(LatticeKind::Fine).clone();
    let dual_block = family.shape(LatticeKind::DualBlock).clone();
    let coarse_extents: Vec<i64> = family
        .shape(LatticeKind::DualCoarse)
        .extents()
        .iter()
        .map(|&e| e as i64)
        .collect();
    let sites: Vec<Vec<i64>> = fine.iter().collect();
    let n = sites.len();
    let reps = family.canonical_k_reps();
    let two_pi = (2.0 * PI).powi(family.axes() as i32);
    let pref_f = family.hvol_f / two_pi;
    let pref_c = family.hvol_c / two_pi;
    let shifts: Vec<Vec<i64>> = dual_block.iter().map(|m| family.dual_block_to_fine(&m)).collect();

    // F[u, p] = e^{ip·u} over the whole dual fine torus.
    let f_full = CMatrix::from_fn(n, n, |i, j| torus_phase(&spec, &sites[j], &sites[i]));
    // E[u, m] = e^{i(k+ℓ_m)·u} for a point k of the universal cover.
    let block_waves = |k: &[i64]| -> CMatrix {
        CMatrix::from_fn(n, shifts.len(), |i, m| {
            let p: Vec<i64> = k.iter().zip(&shifts[m]).map(|(a, b)| a + b).collect();
            torus_phase(&spec, &p, &sites[i])
        })
    };
    let ell_waves = block_waves(&vec![0; spec.axes()]);

    let mut w_a = Worst::new();
    let mut w_b = Worst::new();
    let mut w_c = Worst::new();
    let mut w_d = Worst::new();
    let mut w_e = Worst::new();
    let mut w_f = Worst::new();
    let mut w_periodic = Worst::new();

    for t in 0..cfg.kernels {
        let a = PeriodicKernel::random(family.clone(), &mut rng);
        let mm = a.momentum_matrix();

        let rec_a = (&f_full * mm.entries() * f_full.adjoint()) * c(pref_f);
        w_a.matrices(&rec_a, a.entries(), IDENTITY_TOLERANCE, || format!("kernel {t}"));

        // Arbitrary representatives: shift each canonical class by a random
        // multiple of the dual coarse period.
        let mut rec_b = CMatrix::zeros(n, n);
        for k0 in &reps {
            let k: Vec<i64> = k0
                .iter()
                .zip(&coarse_extents)
                .map(|(x, e)| x + e * (rng.clone_index(5) as i64 - 2))
                .collect();
            let e = block_waves(&k);
            rec_b += &e * mm.fiber(&k).entries() * e.adjoint();
        }
        rec_b *= c(pref_c);
        w_b.matrices(&rec_b, a.entries(), IDENTITY_TOLERANCE, || format!("kernel {t}"));

        for s in 0..cfg.fields {
            let phi = random_field(family, LatticeKind::Fine, &mut rng);
            let lhs = fourier::transform(family, &a.apply(&phi)?)?;
            let rhs = mm.apply(&fourier::transform(family, &phi)?)?;
            w_c.vectors(rhs.values(), lhs.values(), IDENTITY_TOLERANCE, || format!("kernel {t}, field {s}"));
        }

        let mut rec_d = CMatrix::zeros(n, n);
        for k in &reps {
            let ak = a.twisted_kernel(k);
            let ph: Vec<Complex64> = sites.iter().map(|u| torus_phase(&spec, k, u)).collect();
            for i in 0..n {
                for j in 0..n {
                    rec_d[(i, j)] += ph[i] * ak[(i, j)] * ph[j].conj();
                }
            }
            // A_k is coarse periodic in both arguments.
            for axis in 0..spec.axes() {
                let mut dev = 0.0f64;
                for (i, u) in sites.iter().enumerate() {
                    let mut v = u.clone();
                    v[axis] += spec.period(axis) as i64;
                    let iv = fine.ravel(&v);
                    for j in 0..n {
                        dev = dev.max((ak[(iv, j)] - ak[(i, j)]).norm());
                        dev = dev.max((ak[(j, iv)] - ak[(j, i)]).norm());
                    }
                }
                w_periodic.push(dev, IDENTITY_TOLERANCE * max_abs(&ak), || {
                    format!("kernel {t}, k index {k:?}, axis {axis}")
                });
            }
            let rec_e = &ell_waves * mm.fiber(k).entries() * ell_waves.adjoint();
            w_e.matrices(&rec_e, &ak, IDENTITY_TOLERANCE, || format!("kernel {t}, k index {k:?}"));
        }
        rec_d *= c(pref_c);
        w_d.matrices(&rec_d, a.entries(), IDENTITY_TOLERANCE, || format!("kernel {t}"));

        let mt = a.transpose().momentum_matrix();
        let dual_fine = family.shape(LatticeKind::DualFine);
        for k in &reps {
            let ft = mt.fiber(k);
            let want = CMatrix::from_fn(shifts.len(), shifts.len(), |i, j| {
                let p: Vec<i64> = k.iter().zip(&shifts[j]).map(|(x, y)| -x - y).collect();
                let p2: Vec<i64> = k.iter().zip(&shifts[i]).map(|(x, y)| -x - y).collect();
                mm.entries()[(dual_fine.ravel(&p), dual_fine.ravel(&p2))]
            });
            w_f.matrices(ft.entries(), &want, IDENTITY_TOLERANCE, || format!("kernel {t}, k index {k:?}"));
        }
    }

    Ok(vec![
        w_a.finish("position_from_momentum_matrix", "lemBOkervar.a"),
        w_b.finish("position_from_fibers_shifted_representatives", "lemBOkervar.b"),
        w_c.finish("momentum_space_action", "lemBOkervar.c"),
        w_periodic.finish("twisted_kernel_coarse_periodic", "lemBOkervar.d"),
        w_d.finish("position_from_twisted_kernels", "lemBOkervar.d"),
        w_e.finish("twisted_kernel_from_fiber", "lemBOkervar.e"),
        w_f.finish("transpose_fiber_relation", "lemBOkervar.f"),
    ])
}

/// Index helper so the suite draws small integers from the same stream.
trait ClonedIndex {
    fn clone_index(&mut self, n: usize) -> usize;
}

impl ClonedIndex for KernelRng {
    fn clone_index(&mut self, n: usize) -> usize {
        let u = 0.5 * (random::uniform(self) + 1.0);
        ((u * n as f64) as usize).min(n - 1)
    }
}

fn periodization_checks(family: &LatticeFamily, cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let spec = family.spec().clone();
    let mut rng = section_rng(cfg, 2);
    let limit = fine_radius_limit(&spec);
    let r_half = (limit / 2).min(1);
    let r = limit.min(2);
    let nb = spec.block_size();

    let mut w_comp = Worst::new();
    let mut w_mult_real = Worst::new();
    let mut w_mult_complex = Worst::new();
    let mut w_identity = Worst::new();
    let mut w_offdiag = Worst::new();
    let mut w_diag = Worst::new();
    let mut w_discrete = Worst::new();
    let mut w_twisted = Worst::new();
    let mut w_quasi = Worst::new();

    let id = ZKernel::identity(spec.clone());
    for t in 0..cfg.kernels {
        let a = ZKernel::random(spec.clone(), r_half, &mut rng);
        let b = ZKernel::random(spec.clone(), r_half, &mut rng);
        let ab = compose_z(&a, &b)?;
        let lhs = periodize(&ab)?;
        let rhs = periodize(&a)?.compose(&periodize(&b)?)?;
        w_comp.matrices(lhs.entries(), rhs.entries(), IDENTITY_TOLERANCE, || format!("pair {t}"));

        for (im, w) in [(0.0, &mut w_mult_real), (1.0, &mut w_mult_complex)] {
            for _ in 0..cfg.fiber_points.div_ceil(cfg.kernels.max(1)) {
                let k = random_momentum(&spec, im, &mut rng);
                let got = fiber_hat(&ab, &k).into_entries();
                let want = fiber_hat(&a, &k).into_entries() * fiber_hat(&b, &k).into_entries();
                w.matrices(&got, &want, IDENTITY_TOLERANCE, || format!("pair {t}, k = {}", fmt_k(&k)));
            }
        }

        let k = random_momentum(&spec, 1.0, &mut rng);
        w_identity.matrices(
            fiber_hat(&id, &k).entries(),
            &CMatrix::identity(nb, nb),
            IDENTITY_TOLERANCE,
            || format!("k = {}", fmt_k(&k)),
        );

        // Translation invariant a(u,u') = α(u − u').
        let window = Window::new(r, spec.axes());
        let alpha = random::complex_vec(&mut rng, window.len());
        let ti = ZKernel::translation_invariant(spec.clone(), r, |d| alpha[window.index(d).expect("in window")]);
        for im in [0.0, 1.0] {
            let k = random_momentum(&spec, im, &mut rng);
            let f = fiber_hat(&ti, &k).into_entries();
            let scale = max_abs(&f).max(1.0);
            let mut off = 0.0f64;
            for i in 0..nb {
                for j in 0..nb {
                    if i != j {
                        off = off.max(f[(i, j)].norm());
                    }
                }
            }
            w_offdiag.push(off, PATTERN_TOLERANCE * scale, || format!("kernel {t}, k = {}", fmt_k(&k)));
            let block = Shape::new(spec.periods());
            let diag: Vec<Complex64> = (0..nb).map(|i| f[(i, i)]).collect();
            let want: Vec<Complex64> = block
                .iter()
                .map(|m| {
                    let l = spec.dual_block_momentum(&m);
                    let p: Vec<Complex64> = k.iter().zip(&l).map(|(x, y)| x + y).collect();
                    window
                        .iter()
                        .enumerate()
                        .map(|(j, d)| {
                            let x = spec.fine_position(&d);
                            let arg: Complex64 = p.iter().zip(&x).map(|(pi, xi)| pi * xi).sum();
                            alpha[j] * (-Complex64::i() * arg).exp()
                        })
                        .sum::<Complex64>()
                        * spec.vol_f()
                })
                .collect();
            w_diag.vectors(&diag, &want, IDENTITY_TOLERANCE, || format!("kernel {t}, k = {}", fmt_k(&k)));
        }

        // Discrete k: the fiber of a equals the torus fiber of its periodization.
        let big = ZKernel::random(spec.clone(), r, &mut rng);
        let per = periodize(&big)?;
        let mm = per.momentum_matrix();
        let fine = family.shape(LatticeKind::Fine).clone();
        for kj in family.canonical_k_reps() {
            let k = real_k(&spec.discrete_momentum(&kj));
            w_discrete.matrices(
                fiber_hat(&big, &k).entries(),
                mm.fiber(&kj).entries(),
                IDENTITY_TOLERANCE,
                || format!("kernel {t}, k index {kj:?}"),
            );
            let twisted = per.twisted_kernel(&kj);
            let direct = CMatrix::from_fn(fine.len(), fine.len(), |i, j| {
                let u = fine.unravel(i);
                let u2 = fine.unravel(j);
                let mut s = Complex64::new(0.0, 0.0);
                for d in big.window().iter() {
                    let hits = d.iter().zip(u.iter().zip(&u2)).enumerate().all(|(a, (&di, (&x, &y)))| {
                        (x + di - y).rem_euclid(spec.period(a) as i64) == 0
                    });
                    if hits {
                        let v: Vec<i64> = u.iter().zip(&d).map(|(x, y)| x + y).collect();
                        let arg: Complex64 =
                            k.iter().zip(spec.fine_position(&d)).map(|(ki, xi)| ki * xi).sum();
                        s += big.get(&u, &v) * (Complex64::i() * arg).exp();
                    }
                }
                s * spec.vol_c()
            });
            w_twisted.matrices(&twisted, &direct, IDENTITY_TOLERANCE, || format!("kernel {t}, k index {kj:?}"));
        }

        let mut probes = probe_momenta(&spec);
        probes.push(random_momentum(&spec, 1.0, &mut rng));
        for k in &probes {
            let scale = max_abs(&fiber_hat(&big, k).into_entries()).max(f64::MIN_POSITIVE);
            for axis in 0..spec.axes() {
                let mut m = vec![0i64; spec.axes()];
                m[axis] = 1;
                let defect = quasi_periodicity_defect(&big, k, &m);
                w_quasi.push(defect, IDENTITY_TOLERANCE * scale, || {
                    format!("kernel {t}, k = {}, axis {axis}", fmt_k(k))
                });
            }
        }
    }

    Ok(vec![
        w_comp.finish("periodization_of_composition", "remBOperiodization.c"),
        w_identity.finish("identity_fiber", "lemBOperiodalg.a"),
        w_mult_real.finish("fiber_multiplicativity_real_k", "lemBOperiodalg.b"),
        w_mult_complex.finish("fiber_multiplicativity_complex_k", "lemBOperiodalg.b"),
        w_offdiag.finish("translation_invariant_offdiagonal_zero", "lemBOifkervar.b"),
        w_diag.finish("translation_invariant_diagonal", "lemBOifkervar.b"),
        w_discrete.finish("discrete_k_fiber_consistency", "lemBOifkervar.c"),
        w_twisted.finish("discrete_k_twisted_kernel", "lemBOifkervar.c"),
        w_quasi.finish("quasi_periodicity", "remBOatwisted"),
    ])
}

fn inverse_fiber_checks(family: &LatticeFamily, cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let spec = family.spec().clone();
    let mut rng = section_rng(cfg, 3);
    let r = fine_radius_limit(&spec).min(2);
    let nodes = default_nodes(&spec, r, 5);
    let minimal = minimal_exact_nodes(&spec, r);
    let probes = probe_momenta(&spec);

    let mut w_round = Worst::new();
    let mut w_minimal = Worst::new();
    let mut w_unique = Worst::new();
    let mut w_alias = Worst::new();
    let can_undersample = minimal.iter().all(|&g| g > 1);
    for t in 0..cfg.kernels {
        let a = ZKernel::random(spec.clone(), r, &mut rng);
        let scale = a.max_abs();
        let back = inverse_fiber_with_grid(&a, r, &nodes)?;
        let dev = a
            .entries()
            .zip(back.entries())
            .map(|(x, y)| (x.2 - y.2).norm())
            .fold(0.0, f64::max);
        w_round.push(dev, IDENTITY_TOLERANCE * scale, || format!("kernel {t}, nodes {nodes:?}"));

        let exact = inverse_fiber_with_grid(&a, r, &minimal)?;
        let dev = a
            .entries()
            .zip(exact.entries())
            .map(|(x, y)| (x.2 - y.2).norm())
            .fold(0.0, f64::max);
        w_minimal.push(dev, IDENTITY_TOLERANCE * scale, || format!("kernel {t}, nodes {minimal:?}"));

        let fscale = probes
            .iter()
            .map(|k| max_abs(&fiber_hat(&a, k).into_entries()))
            .fold(0.0, f64::max);
        w_unique.push(fiber_residual(&a, &back, &probes), IDENTITY_TOLERANCE * fscale, || {
            format!("kernel {t}")
        });

        if can_undersample {
            let under: Vec<usize> = minimal.iter().map(|g| g - 1).collect();
            let wrong = inverse_fiber_with_grid(&a, r, &under)?;
            let residual = fiber_residual(&a, &wrong, &probes);
            // Smallest residual is the binding case; store it as (threshold, residual).
            w_alias.push(ALIASING_THRESHOLD, residual, || format!("kernel {t}, nodes {under:?}"));
        }
    }
    let mut out = vec![
        w_round.finish("inverse_fiber_round_trip", "lemBOifkervar.a"),
        w_minimal.finish("inverse_fiber_minimal_grid", "lemBOifkervar.a"),
        w_unique.finish("fiber_of_recovered_kernel", "lemBOuniqueness"),
    ];
    if can_undersample {
        out.push(w_alias.finish("undersampled_grid_detected", "lemBOifkervar.a"));
    }
    Ok(out)
}

fn asymmetric_checks(family: &LatticeFamily, cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let spec = family.spec().clone();
    let mut rng = section_rng(cfg, 4);
    let rc = coarse_radius_limit(&spec).min(1);
    let dual_fine = family.shape(LatticeKind::DualFine).clone();
    let dual_coarse = family.shape(LatticeKind::DualCoarse).clone();
    let block = family.shape(LatticeKind::DualBlock).clone();
    let shifts: Vec<Vec<i64>> = block.iter().map(|m| family.dual_block_to_fine(&m)).collect();

    let mut w_fc = Worst::new();
    let mut w_cf = Worst::new();
    let mut w_tr = Worst::new();
    for t in 0..cfg.kernels {
        let b = ZKernelFC::random(spec.clone(), rc, &mut rng);
        let cker = ZKernelCF::random(spec.clone(), rc, &mut rng);
        let bp = b.periodize()?;
        let cp = cker.periodize()?;
        for s in 0..cfg.fields {
            let psi = random_field(family, LatticeKind::Coarse, &mut rng);
            let psi_hat = fourier::transform(family, &psi)?;
            let lhs = fourier::transform(family, &bp.apply(&psi)?)?;
            let phi = random_field(family, LatticeKind::Fine, &mut rng);
            let phi_hat = fourier::transform(family, &phi)?;
            let lhs_c = fourier::transform(family, &cp.apply(&phi)?)?;
            let mut got = Vec::new();
            let mut want = Vec::new();
            let mut got_c = Vec::new();
            let mut want_c = Vec::new();
            for kj in family.canonical_k_reps() {
                let k = real_k(&spec.discrete_momentum(&kj));
                let bh = fiber_hat_fc(&b, &k);
                let ch = fiber_hat_cf(&cker, &k);
                let ki = dual_coarse.ravel(&kj);
                let mut sum = Complex64::new(0.0, 0.0);
                for (m, sh) in shifts.iter().enumerate() {
                    let p: Vec<i64> = kj.iter().zip(sh).map(|(x, y)| x + y).collect();
                    let pi = dual_fine.ravel(&p);
                    got.push(bh[m] * psi_hat.values()[ki]);
                    want.push(lhs.values()[pi]);
                    sum += ch[m] * phi_hat.values()[pi];
                }
                got_c.push(sum);
                want_c.push(lhs_c.values()[ki]);
            }
            w_fc.vectors(&got, &want, IDENTITY_TOLERANCE, || format!("kernel {t}, field {s}"));
            w_cf.vectors(&got_c, &want_c, IDENTITY_TOLERANCE, || format!("kernel {t}, field {s}"));
        }

        let bt = b.transpose();
        let blk = Shape::new(spec.periods());
        for im in [0.0, 1.0] {
            let k = random_momentum(&spec, im, &mut rng);
            let neg: Vec<Complex64> = k.iter().map(|z| -z).collect();
            let got = fiber_hat_cf(&bt, &k);
            let base = fiber_hat_fc(&b, &neg);
            let want: Vec<Complex64> = blk
                .iter()
                .map(|m| {
                    let nm: Vec<i64> = m.iter().map(|x| -x).collect();
                    base[blk.ravel(&nm)]
                })
                .collect();
            w_tr.vectors(&got, &want, IDENTITY_TOLERANCE, || format!("kernel {t}, k = {}", fmt_k(&k)));
        }
    }
    Ok(vec![
        w_fc.finish("coarse_to_fine_action", "eqnPOftaction"),
        w_cf.finish("fine_to_coarse_action", "eqnPOftaction"),
        w_tr.finish("transpose_of_coarse_to_fine", "eqnPOtranspose"),
    ])
}

fn averaging_checks(family: &LatticeFamily, cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let spec = family.spec().clone();
    let mut rng = section_rng(cfg, 5);
    let mut out = Vec::new();

    let l_values: Vec<usize> = (0..spec.axes()).map(|a| spec.period(a)).collect();
    let mut w_zero = Worst::new();
    for &l in &l_values {
        w_zero.push((u_l(l, c(0.0)) - c(1.0)).norm(), SPOT_TOLERANCE, || format!("L = {l}"));
    }
    out.push(w_zero.finish("u_l_at_zero", "exBOnaiveCont"));
    out.push(Check::le(
        "u_3_at_pi",
        "exBOnaiveCont",
        (u_l(3, c(PI)) - c(-1.0 / 3.0)).norm(),
        SPOT_TOLERANCE,
    ));

    let naive = Profile::naive(spec.clone()).ok();
    let mut profiles: Vec<(String, Profile)> = Vec::new();
    if let Some(q) = &naive {
        profiles.push(("naive".into(), q.clone()));
    }
    let rq = spec.periods().into_iter().min().unwrap_or(1).saturating_sub(1) / 2;
    if let Ok(q) = Profile::random(spec.clone(), rq.max(1).min(fine_radius_limit(&spec) / 2), &mut rng) {
        profiles.push(("random".into(), q));
    }

    if let Some(q) = &naive {
        let qq = averaging::q_q_star(q)?;
        let mut w = Worst::new();
        for s in 0..cfg.kernels {
            let psi = random_field(family, LatticeKind::Coarse, &mut rng);
            let got = qq.apply(&psi)?;
            w.vectors(got.values(), psi.values(), IDENTITY_TOLERANCE, || format!("field {s}"));
        }
        out.push(w.finish("naive_qqstar_identity", "exBOnaive"));

        let mut w = Worst::new();
        for s in 0..cfg.fiber_points {
            let p: Vec<f64> = (0..spec.axes())
                .map(|a| 2.0 * PI / spec.spacing(a) * random::uniform(&mut rng))
                .collect();
            let direct = q.q_hat(&real_k(&p));
            let closed: f64 = p
                .iter()
                .enumerate()
                .map(|(a, &pa)| averaging::u_l_real(spec.period(a), spec.spacing(a) * pa))
                .product();
            // |q̂| ≤ q̂(0) = 1, so the tolerance is taken relative to 1.
            w.push((direct - closed).norm(), IDENTITY_TOLERANCE, || format!("sample {s}, p = {p:?}"));
        }
        out.push(w.finish("naive_profile_transform", "exBOnaiveCont"));

        if let Ok(q2) = Profile::smooth(spec.clone(), 2) {
            let mut dev = 0.0f64;
            let mut scale = 0.0f64;
            let conv_window = Window::new(q2.radius() + 1, spec.axes());
            for u in conv_window.iter() {
                let mut s = 0.0;
                for (v, qv) in q.support() {
                    let d: Vec<i64> = u.iter().zip(&v).map(|(x, y)| x - y).collect();
                    s += qv * q.get(&d);
                }
                s *= spec.vol_f();
                dev = dev.max((s - q2.get(&u)).abs());
                scale = scale.max(s.abs());
            }
            out.push(Check::le(
                "smooth_exponent_2_is_self_convolution",
                "remBOlessnaive",
                dev,
                IDENTITY_TOLERANCE * scale,
            ));
        }
    }

    for exponent in [2u32, 4] {
        let Ok(qs) = Profile::smooth(spec.clone(), exponent) else {
            continue;
        };
        let mut w = Worst::new();
        for s in 0..cfg.fiber_points {
            let p: Vec<f64> = (0..spec.axes())
                .map(|a| 2.0 * PI / spec.spacing(a) * random::uniform(&mut rng))
                .collect();
            let direct = qs.q_hat(&real_k(&p));
            let closed: f64 = p
                .iter()
                .enumerate()
                .map(|(a, &pa)| averaging::u_l_real(spec.period(a), spec.spacing(a) * pa).powi(exponent as i32))
                .product();
            // |q̂| ≤ q̂(0) = 1, so the tolerance is taken relative to 1.
            w.push((direct - closed).norm(), IDENTITY_TOLERANCE, || format!("sample {s}, p = {p:?}"));
        }
        out.push(w.finish(&format!("smooth_profile_transform_exponent_{exponent}"), "remBOlessnaive"));
    }

    let mut w_q = Worst::new();
    let mut w_qs = Worst::new();
    let mut w_qq = Worst::new();
    let mut w_fiber = Worst::new();
    let mut w_fiber_c = Worst::new();
    for (label, q) in &profiles {
        let qq = averaging::q_q_star(q)?;
        for s in 0..cfg.fields {
            let phi = random_field(family, LatticeKind::Fine, &mut rng);
            let lhs = fourier::transform(family, &averaging::apply_q(q, &phi)?)?;
            let rhs = averaging::apply_q_momentum(q, &fourier::transform(family, &phi)?)?;
            w_q.vectors(rhs.values(), lhs.values(), IDENTITY_TOLERANCE, || format!("{label} profile, field {s}"));

            let psi = random_field(family, LatticeKind::Coarse, &mut rng);
            let psi_hat = fourier::transform(family, &psi)?;
            let lhs = fourier::transform(family, &averaging::apply_q_star(q, &psi)?)?;
            let rhs = averaging::apply_q_star_momentum(q, &psi_hat)?;
            w_qs.vectors(rhs.values(), lhs.values(), IDENTITY_TOLERANCE, || format!("{label} profile, field {s}"));

            let lhs = fourier::transform(family, &qq.apply(&psi)?)?;
            let rhs = averaging::q_q_star_momentum(q, &psi_hat)?;
            w_qq.vectors(rhs.values(), lhs.values(), IDENTITY_TOLERANCE, || format!("{label} profile, field {s}"));
        }

        let mm = averaging::q_star_q(q)?.momentum_matrix();
        for kj in family.canonical_k_reps() {
            let k = real_k(&spec.discrete_momentum(&kj));
            let rank_one = averaging::q_star_q_fiber(q, &k);
            w_fiber.matrices(rank_one.entries(), mm.fiber(&kj).entries(), IDENTITY_TOLERANCE, || {
                format!("{label} profile, k index {kj:?}")
            });
        }
        let z = averaging::q_star_q_kernel(q);
        for _ in 0..cfg.fiber_points {
            let k = random_momentum(&spec, 1.0, &mut rng);
            let rank_one = averaging::q_star_q_fiber(q, &k);
            w_fiber_c.matrices(rank_one.entries(), fiber_hat(&z, &k).entries(), IDENTITY_TOLERANCE, || {
                format!("{label} profile, k = {}", fmt_k(&k))
            });
        }
    }
    if !profiles.is_empty() {
        out.push(w_q.finish("averaging_in_momentum_space", "lemBOfourier.a"));
        out.push(w_qs.finish("adjoint_averaging_in_momentum_space", "lemBOfourier.a"));
        out.push(w_qq.finish("qqstar_in_momentum_space", "lemBOfourier.a"));
        out.push(w_fiber.finish("qstarq_rank_one_fiber_discrete_k", "lemBOfourier.b"));
        out.push(w_fiber_c.finish("qstarq_rank_one_fiber_complex_k", "lemBOfourier.b"));
    }
    Ok(out)
}

fn norm_checks(family: &LatticeFamily, cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let spec = family.spec().clone();
    let mut rng = section_rng(cfg, 6);
    let w = cfg.weight;
    let r = fine_radius_limit(&spec).min(2);
    let rc = coarse_radius_limit(&spec).min(1);
    let plan = SamplingPlan::for_spread(&spec, r.max(1), 4, cfg.seed);
    let nodes = default_nodes(&spec, r, 5);

    let mut w_sup = Worst::new();
    let mut w_decay = Worst::new();
    let mut w_sum_max = Worst::new();
    let mut w_periodized = Worst::new();
    let mut w_kernel = Worst::new();
    let mut w_chain = Worst::new();
    let mut w_stokes = Worst::new();
    let mut w_fc = Worst::new();
    let mut w_cf = Worst::new();
    let slack = 1.0 + BOUND_SLACK;
    for t in 0..cfg.kernels {
        let a = ZKernel::random(spec.clone(), r, &mut rng);
        let ks = norms::sample_strip(&spec, w.m, cfg.strip_samples, &mut rng);
        let sup = norms::fiber_sup_bound_check(&a, w.m, &ks);
        w_sup.push(sup.max_entry, sup.norm * slack, || {
            format!("kernel {t}, k = {}, entry ({}, {})", fmt_k(&sup.witness.k), sup.witness.row, sup.witness.col)
        });

        let rep = norms::decay_bound_from_fibers(&a, w, &plan)?;
        let (wb, wd) = rep.decay_witness.clone();
        w_decay.push(rep.decay, rep.sum_bound * slack, || format!("kernel {t}, u = {wb:?}, u' - u = {wd:?}"));
        w_sum_max.push(rep.sum_bound, rep.max_bound * slack, || format!("kernel {t}"));
        if let Some(chain) = &rep.chain {
            if let Some(p) = chain.periodized_norm {
                w_periodized.push(p, chain.kernel_norm * slack, || format!("kernel {t}"));
            }
            w_kernel.push(chain.kernel_norm, chain.sum_bound * slack, || {
                format!("kernel {t}, C = {:e}", chain.c.value)
            });
            w_chain.push(chain.sum_bound, chain.max_bound * slack, || format!("kernel {t}"));
        }

        // Stokes shift on every block row and stored displacement.
        let mut dev = 0.0f64;
        let mut scale = 0.0f64;
        let mut worst_pair = String::new();
        for (b, d, v) in a.entries() {
            let u2: Vec<i64> = b.iter().zip(&d).map(|(x, y)| x + y).collect();
            let want = v * (w.m_prime * spec.fine_length(&d)).exp();
            let got = norms::stokes_shift_value(&a, &b, &u2, w.m_prime, &nodes);
            let e = (got - want).norm();
            if e > dev {
                dev = e;
                worst_pair = format!("kernel {t}, u = {b:?}, u' = {u2:?}");
            }
            scale = scale.max(want.norm());
        }
        w_stokes.push(dev, STOKES_TOLERANCE * scale, || worst_pair);

        let b = ZKernelFC::random(spec.clone(), rc, &mut rng);
        let rb = norms::decay_bound_fc(&b, w.m_prime, &plan);
        w_fc.push(rb.decay, rb.sum_bound * slack, || format!("kernel {t}"));
        w_fc.push(rb.sum_bound, rb.max_bound * slack, || format!("kernel {t}, sum vs max"));
        let cker = ZKernelCF::random(spec.clone(), rc, &mut rng);
        let rcf = norms::decay_bound_cf(&cker, w.m_prime, &plan);
        w_cf.push(rcf.decay, rcf.sum_bound * slack, || format!("kernel {t}"));
        w_cf.push(rcf.sum_bound, rcf.max_bound * slack, || format!("kernel {t}, sum vs max"));
    }
    Ok(vec![
        w_sup.finish("fiber_entries_bounded_by_norm", "lemBOlonelinfty.a"),
        w_decay.finish("kernel_decay_le_fiber_sum", "lemBOlonelinfty.b"),
        w_sum_max.finish("fiber_sum_le_fiber_max", "lemBOlonelinfty.b"),
        w_periodized.finish("periodized_norm_le_kernel_norm", "lemBOlonelinfty.b"),
        w_kernel.finish("kernel_norm_le_c_fiber_sum", "lemBOlonelinfty.b"),
        w_chain.finish("c_fiber_sum_le_c_fiber_max", "lemBOlonelinfty.b"),
        w_stokes.finish("stokes_shift_consistency", "lemBOlonelinfty.b"),
        w_fc.finish("coarse_to_fine_decay", "lemBOlonelinfty.c"),
        w_cf.finish("fine_to_coarse_decay", "lemBOlonelinfty.c"),
    ])
}

/// a + λ·(1/vol_f)δ.
fn shifted(a: &ZKernel, lambda: f64) -> ZKernel {
    let spec = a.spec().clone();
    let v = lambda / spec.vol_f();
    ZKernel::from_fn(spec, a.radius(), |b, d| {
        let u2: Vec<i64> = b.iter().zip(d).map(|(x, y)| x + y).collect();
        let extra = if d.iter().all(|&x| x == 0) { v } else { 0.0 };
        a.get(b, &u2) + extra
    })
}

/// 1 + z/2 − z²/4 + z³/8.
fn cubic() -> NamedFunction {
    NamedFunction::Polynomial(vec![c(1.0), c(0.5), c(-0.25), c(0.125)])
}

fn function_checks(family: &LatticeFamily, cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let spec = family.spec().clone();
    let mut rng = section_rng(cfg, 7);
    let r = fine_radius_limit(&spec).min(1);
    let plan = SamplingPlan::for_spread(&spec, r.max(1), 2, cfg.seed);
    let a = ZKernel::random(spec.clone(), r, &mut rng);
    let contour = opfunc::default_contour(&a)?;
    let periodized = periodize(&a)?;

    let mut out = Vec::new();
    let id = opfunc::function_of_operator(&a, &NamedFunction::Identity, &contour)?;
    out.push(Check::le(
        "identity_function_reproduces_operator",
        "eqnBOfofA",
        max_abs_diff(id.kernel.entries(), periodized.entries()),
        LINEAR_FUNCTION_TOLERANCE * max_abs(periodized.entries()),
    ));
    for (name, f) in [
        ("square_matches_dense", NamedFunction::Square),
        ("polynomial_matches_dense", cubic()),
    ] {
        let got = opfunc::function_of_operator(&a, &f, &contour)?;
        let want = opfunc::function_dense(&periodized, &f)?;
        out.push(
            Check::le(
                name,
                "eqnBOfofA",
                max_abs_diff(got.kernel.entries(), want.entries()),
                FUNCTION_TOLERANCE * max_abs(want.entries()),
            )
            .with_witness(format!("{} contour nodes", got.nodes)),
        );
    }

    // Move the spectrum away from 0 so that 1/z is analytic inside the contour.
    let (center, radius) = match contour {
        Contour::Circle { center, radius } => (center, radius),
        Contour::Polyline { .. } => unreachable!("default contour is a circle"),
    };
    let lambda = 2.0 * radius + center.norm() + 1.0;
    let a_inv = shifted(&a, lambda);
    let contour_inv = Contour::circle(center + lambda, radius)?;
    let per_inv = periodize(&a_inv)?;
    let inv = opfunc::function_of_operator(&a_inv, &NamedFunction::Inverse, &contour_inv)?;
    let product = per_inv.compose(&inv.kernel)?;
    let ident = PeriodicKernel::identity(family.clone());
    out.push(Check::le(
        "inverse_function_inverts_operator",
        "eqnBOfofA",
        max_abs_diff(product.entries(), ident.entries()),
        FUNCTION_TOLERANCE * max_abs(ident.entries()),
    ));

    let mut w_bound = Worst::new();
    let mut w_sum_max = Worst::new();
    let cases: Vec<(&str, &ZKernel, NamedFunction, &Contour)> = vec![
        ("identity", &a, NamedFunction::Identity, &contour),
        ("square", &a, NamedFunction::Square, &contour),
        ("cubic", &a, cubic(), &contour),
        ("inverse", &a_inv, NamedFunction::Inverse, &contour_inv),
    ];
    for (name, k, f, cont) in cases {
        let rep = opfunc::function_norm_bound(k, &f, cont, cfg.weight, &plan)?;
        w_bound.push(rep.direct_norm, rep.bound_sum, || {
            format!(
                "f = {name}, slack {:.3e}, zeta = {}, k = {}",
                rep.bound_sum - rep.direct_norm,
                rep.witness_zeta,
                fmt_k(&rep.witness_k)
            )
        });
        w_sum_max.push(rep.bound_sum, rep.bound_max * (1.0 + BOUND_SLACK), || format!("f = {name}"));
    }
    out.push(w_bound.finish("function_norm_le_contour_bound", "lemBOfnbnd"));
    out.push(w_sum_max.finish("contour_sum_bound_le_max_bound", "lemBOfnbnd"));

    out.push(trapezoid_check(&a)?);
    Ok(out)
}

/// Error of the fixed-level trapezoid rule against the dense value of f on
/// the k = 0 fiber, for successive node doublings.
pub fn trapezoid_errors(a: &ZKernel, f: &NamedFunction, contour: &Contour, levels: u32) -> Result<Vec<f64>> {
    let k = vec![c(0.0); a.spec().axes()];
    let fiber = fiber_hat(a, &k);
    let want = f.apply_dense(fiber.entries())?;
    let scale = max_abs(&want).max(1.0);
    let mut errors = Vec::with_capacity(levels as usize + 1);
    for level in 0..=levels {
        let mut acc = CMatrix::zeros(want.nrows(), want.ncols());
        for (z, wgt) in contour.quadrature(level) {
            let r = opfunc::resolvent_fiber(&fiber, z)?;
            acc += r.entries() * (f.eval(z) * wgt);
        }
        acc /= Complex64::new(0.0, 2.0 * PI);
        errors.push(max_abs_diff(&acc, &want) / scale);
    }
    Ok(errors)
}

/// Circle around the k = 0 fiber spectrum whose radius is 1.25 times its spread,
/// so that convergence is slow enough to be observed above roundoff.
pub fn tight_circle(a: &ZKernel) -> Result<Contour> {
    let k = vec![c(0.0); a.spec().axes()];
    let ev = opfunc::eigenvalues(fiber_hat(a, &k).entries());
    let center = ev.iter().sum::<Complex64>() / ev.len() as f64;
    let spread = ev.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
    Contour::circle(center, 1.25 * spread.max(1e-3))
}

fn trapezoid_check(a: &ZKernel) -> Result<Check> {
    let contour = tight_circle(a)?;
    let errors = trapezoid_errors(a, &NamedFunction::ExpTaylor(12), &contour, 6)?;
    let mut w = Worst::new();
    for (level, pair) in errors.windows(2).enumerate() {
        if pair[0] >= QUADRATURE_FLOOR / DOUBLING_RATIO {
            let ratio = pair[1].max(QUADRATURE_FLOOR) / pair[0];
            w.push(ratio, DOUBLING_RATIO, || {
                format!("levels {level}->{}, errors {:e} -> {:e}", level + 1, pair[0], pair[1])
            });
        }
    }
    if w.ratio == f64::NEG_INFINITY {
        return Ok(Check::le("trapezoid_doubling_ratio", "eqnBOfofA", 0.0, DOUBLING_RATIO)
            .with_witness(format!("level 0 error {:e} already at the floor", errors[0])));
    }
    Ok(w.finish("trapezoid_doubling_ratio", "eqnBOfofA"))
}

fn scaling_checks(family: &LatticeFamily, cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let spec = family.spec().clone();
    let mut rng = section_rng(cfg, 8);
    let s = cfg.scale;
    let scaled = scaling::scaled_spec(&spec, &s)?;
    let r = fine_radius_limit(&spec).min(2);
    let rc = coarse_radius_limit(&spec).min(1);
    let block = Shape::new(spec.periods());
    let jac = s.jacobian(spec.dim());

    let mut w_conj = Worst::new();
    let mut w_inner = Worst::new();
    let mut w_cov = Worst::new();
    let mut w_double = Worst::new();
    let mut w_fiber = Worst::new();
    let mut w_norm = Worst::new();
    let mut w_crs_conj = Worst::new();
    let mut w_crs_fiber = Worst::new();
    let mut w_crs_norm = Worst::new();
    let slack = 1.0 + BOUND_SLACK;
    for t in 0..cfg.kernels {
        let a = ZKernel::random(spec.clone(), r, &mut rng);
        let a_s = scaling::scale_kernel(&a, &s)?;
        for f in 0..cfg.fields {
            let alpha = ZField::random(scaled.clone(), LatticeKind::Fine, 2, &mut rng);
            let via_conj = scaling::conjugate_apply(&a, &s, &alpha)?;
            let via_kernel = a_s.apply(&alpha);
            let scale = via_kernel.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
            w_conj.push(via_conj.max_abs_diff(&via_kernel), IDENTITY_TOLERANCE * scale, || {
                format!("kernel {t}, field {f}")
            });

            let beta = ZField::random(scaled.clone(), LatticeKind::Fine, 2, &mut rng);
            let lhs = scaling::push_forward(&alpha, &spec).inner(&scaling::push_forward(&beta, &spec));
            let rhs = alpha.inner(&beta) * jac;
            w_inner.push((lhs - rhs).norm(), IDENTITY_TOLERANCE * rhs.norm(), || format!("kernel {t}, field {f}"));
        }

        let b = ZKernel::random(spec.clone(), r / 2, &mut rng);
        let lhs = scaling::scale_kernel(&compose_z(&a, &b)?, &s)?;
        let rhs = compose_z(&a_s, &scaling::scale_kernel(&b, &s)?)?;
        let dev = lhs.entries().zip(rhs.entries()).map(|(x, y)| (x.2 - y.2).norm()).fold(0.0, f64::max);
        w_cov.push(dev, IDENTITY_TOLERANCE * rhs.max_abs(), || format!("kernel {t}"));

        let s2 = ScaleFactors::new(1.5, 3.0)?;
        let twice = scaling::scale_kernel(&a_s, &s2)?;
        let once = scaling::scale_kernel(&a, &s.then(&s2))?;
        let dev = twice.entries().zip(once.entries()).map(|(x, y)| (x.2 - y.2).norm()).fold(0.0, f64::max);
        let spec_dev = (0..spec.axes())
            .map(|ax| (twice.spec().spacing(ax) - once.spec().spacing(ax)).abs() / once.spec().spacing(ax))
            .fold(0.0, f64::max);
        w_double.push(dev.max(spec_dev), IDENTITY_TOLERANCE * once.max_abs().max(1.0), || format!("kernel {t}"));

        for _ in 0..cfg.fiber_points.div_ceil(cfg.kernels.max(1)) {
            let k = random_momentum(&scaled, 1.0, &mut rng);
            let m: Vec<i64> = block.unravel(rng.clone_index(block.len()));
            let m2: Vec<i64> = block.unravel(rng.clone_index(block.len()));
            let ell = scaled.dual_block_momentum(&m);
            let ell2 = scaled.dual_block_momentum(&m2);
            let got = scaling::scaled_fiber(&a, &s, &k, &ell, &ell2)?;
            let fs = fiber_hat(&a_s, &k).into_entries();
            let want = fs[(block.ravel(&m), block.ravel(&m2))];
            w_fiber.push((got - want).norm(), IDENTITY_TOLERANCE * max_abs(&fs), || {
                format!("kernel {t}, k = {}, l = {m:?}, l' = {m2:?}", fmt_k(&k))
            });
        }

        let rep = scaling::scaled_norm_check(&a, &s, 1.0)?;
        w_norm.push(rep.scaled_norm, rep.norm * slack, || format!("kernel {t}, m = {}", rep.m));

        // Mixed kernels.
        let bfc = ZKernelFC::random(spec.clone(), rc, &mut rng);
        let ccf = bfc.transpose();
        let ccf = if t % 2 == 0 { ccf } else { ZKernelCF::random(spec.clone(), rc, &mut rng) };
        let bfc_s = scaling::scale_kernel(&bfc, &s)?;
        let ccf_s = scaling::scale_kernel(&ccf, &s)?;
        let psi = ZField::random(scaled.clone(), LatticeKind::Coarse, 1, &mut rng);
        let via_conj = bfc.apply(&scaling::push_forward(&psi, &spec)).relabel(scaled.clone());
        let via_kernel = bfc_s.apply(&psi);
        let scale = via_kernel.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
        w_crs_conj.push(via_conj.max_abs_diff(&via_kernel), IDENTITY_TOLERANCE * scale, || format!("kernel {t}, coarse to fine"));
        let phi = ZField::random(scaled.clone(), LatticeKind::Fine, 2, &mut rng);
        let via_conj = ccf.apply(&scaling::push_forward(&phi, &spec)).relabel(scaled.clone());
        let via_kernel = ccf_s.apply(&phi);
        let scale = via_kernel.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
        w_crs_conj.push(via_conj.max_abs_diff(&via_kernel), IDENTITY_TOLERANCE * scale, || format!("kernel {t}, fine to coarse"));

        let k = random_momentum(&scaled, 1.0, &mut rng);
        let k_orig: Vec<Complex64> = k.iter().enumerate().map(|(ax, z)| z / s.sigma(ax)).collect();
        w_crs_fiber.vectors(&fiber_hat_fc(&bfc_s, &k), &fiber_hat_fc(&bfc, &k_orig), IDENTITY_TOLERANCE, || {
            format!("kernel {t}, coarse to fine, k = {}", fmt_k(&k))
        });
        w_crs_fiber.vectors(&fiber_hat_cf(&ccf_s, &k), &fiber_hat_cf(&ccf, &k_orig), IDENTITY_TOLERANCE, || {
            format!("kernel {t}, fine to coarse, k = {}", fmt_k(&k))
        });

        let rb = scaling::scaled_norm_check(&bfc, &s, 1.0)?;
        w_crs_norm.push(rb.scaled_norm, rb.norm * slack, || format!("kernel {t}, coarse to fine"));
        let rcn = scaling::scaled_norm_check(&ccf, &s, 1.0)?;
        w_crs_norm.push(rcn.scaled_norm, rcn.norm * slack, || format!("kernel {t}, fine to coarse"));
    }

    // Shift along the binding axis: both norms are e^{m|δ|}, so they agree.
    let binding = if s.sigma_t() <= s.sigma_x() || spec.dim() == 0 { 0 } else { 1 };
    let mut shift = vec![0i64; spec.axes()];
    shift[binding] = 1;
    let delta = ZKernel::shift(spec.clone(), &shift);
    let rep = scaling::scaled_norm_check(&delta, &s, 1.0)?;
    let shift_check = Check::le(
        "shift_kernel_norm_equality",
        "lemPoPscaling.c",
        (rep.scaled_norm - rep.norm).abs(),
        IDENTITY_TOLERANCE * rep.norm,
    )
    .with_witness(format!("shift {shift:?}, m = {}", rep.m));

    Ok(vec![
        w_conj.finish("conjugated_kernel_action", "lemPoPscaling.a"),
        w_inner.finish("inner_product_scaling", "lemPoPscaling.a"),
        w_cov.finish("composition_covariance", "lemPoPscaling.a"),
        w_double.finish("double_scaling_composes", "lemPoPscaling.a"),
        w_fiber.finish("scaled_fiber_identity", "lemPoPscaling.b"),
        w_norm.finish("scaled_norm_inequality", "lemPoPscaling.c"),
        shift_check,
        w_crs_conj.finish("mixed_conjugated_kernel_action", "lemPoPscalingCrs"),
        w_crs_fiber.finish("mixed_scaled_fiber_identity", "lemPoPscalingCrs"),
        w_crs_norm.finish("mixed_scaled_norm_inequality", "lemPoPscalingCrs"),
    ])
}
