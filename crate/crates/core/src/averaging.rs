//! Block-spin averaging (Qφ)(x) = vol_f Σ_u q(x−u)φ(u) from fine to coarse
//! fields, its adjoint, and the composites QQ* and Q*Q.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{self, SpectrumVector};
use crate::lattice::{FieldVector, LatticeFamily, LatticeKind, LatticeSpec, Shape, Window};
use crate::periodic_op::{BlochFiber, CMatrix, PeriodicKernel};
use crate::periodization::{plane_wave, ZKernel, ZKernelCF, ZKernelFC};
use crate::random::{self, KernelRng};

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// u_L(ω) = (1/L) Σ_{k=−(L−1)/2}^{(L−1)/2} e^{−iωk}. For even L the summation
/// index runs over half-integers.
pub fn u_l(l: usize, omega: Complex64) -> Complex64 {
    assert!(l > 0, "u_L needs L > 0");
    let half = omega * 0.5;
    if omega.im == 0.0 && half.re.sin().abs() > 1e-3 {
        let w = omega.re;
        return Complex64::new((l as f64 * w / 2.0).sin() / (l as f64 * (w / 2.0).sin()), 0.0);
    }
    let c = (l as f64 - 1.0) / 2.0;
    let s: Complex64 = (0..l)
        .map(|j| (-Complex64::i() * omega * (j as f64 - c)).exp())
        .sum();
    s / l as f64
}

/// Real-argument convenience for [`u_l`].
pub fn u_l_real(l: usize, omega: f64) -> f64 {
    u_l(l, Complex64::new(omega, 0.0)).re
}

/// The averaging weight q on Z_fin, stored on a window around the origin.
#[derive(Clone, Debug)]
pub struct Profile {
    spec: LatticeSpec,
    exponent: Option<u32>,
    window: Window,
    values: Vec<f64>,
}

/// Integer weights of the 1D rectangle (exponent 1) or of the
/// (exponent/2)-fold convolution power of the tent rectangle∗rectangle.
fn axis_counts(l: usize, exponent: u32) -> Vec<f64> {
    if exponent == 1 {
        return vec![1.0; l];
    }
    let tent: Vec<f64> = (0..2 * l - 1)
        .map(|i| (l as f64) - (i as f64 - (l as f64 - 1.0)).abs())
        .collect();
    let mut acc = vec![1.0];
    for _ in 0..exponent / 2 {
        let mut next = vec![0.0; acc.len() + tent.len() - 1];
        for (i, a) in acc.iter().enumerate() {
            for (j, t) in tent.iter().enumerate() {
                next[i + j] += a * t;
            }
        }
        acc = next;
    }
    acc
}

impl Profile {
    /// q = (1/vol_c)·χ of the rectangle |n_a| ≤ (L_a−1)/2 around the origin.
    pub fn naive(spec: LatticeSpec) -> Result<Self> {
        for axis in 0..spec.axes() {
            if spec.period(axis).is_multiple_of(2) {
                return Err(Error::EvenPeriod {
                    axis,
                    value: spec.period(axis),
                });
            }
        }
        Self::separable(spec, 1)
    }

    /// The profile whose transform is Π_a u_{L_a}(ε_a p_a)^exponent, built on
    /// Z_fin by exact convolution.
    pub fn smooth(spec: LatticeSpec, exponent: u32) -> Result<Self> {
        if exponent == 0 || !exponent.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "smoothing exponent must be even and positive, got {exponent}"
            )));
        }
        Self::separable(spec, exponent)
    }

    fn separable(spec: LatticeSpec, exponent: u32) -> Result<Self> {
        let axes = spec.axes();
        let counts: Vec<Vec<f64>> = (0..axes).map(|a| axis_counts(spec.period(a), exponent)).collect();
        let halves: Vec<i64> = counts.iter().map(|c| (c.len() as i64 - 1) / 2).collect();
        let scales: Vec<f64> = (0..axes)
            .map(|a| spec.spacing(a) * (spec.period(a) as f64).powi(exponent as i32))
            .collect();
        let radius = halves.iter().copied().max().unwrap_or(0) as usize;
        let window = Window::new(radius, axes);
        let values = window
            .iter()
            .map(|d| {
                let mut v = 1.0;
                for a in 0..axes {
                    if d[a].abs() > halves[a] {
                        return 0.0;
                    }
                    v *= counts[a][(d[a] + halves[a]) as usize] / scales[a];
                }
                v
            })
            .collect();
        let profile = Self {
            spec,
            exponent: Some(exponent),
            window,
            values,
        };
        profile.check_support()?;
        Ok(profile)
    }

    /// A general real profile given on [−radius, radius]^axes.
    pub fn from_values(spec: LatticeSpec, radius: usize, values: Vec<f64>) -> Result<Self> {
        let window = Window::new(radius, spec.axes());
        if values.len() != window.len() {
            return Err(Error::DimensionMismatch {
                expected: window.len(),
                found: values.len(),
            });
        }
        let profile = Self {
            spec,
            exponent: None,
            window,
            values,
        };
        profile.check_support()?;
        Ok(profile)
    }

    pub fn random(spec: LatticeSpec, radius: usize, rng: &mut KernelRng) -> Result<Self> {
        let n = Window::new(radius, spec.axes()).len();
        let values = (0..n).map(|_| random::uniform(rng)).collect();
        Self::from_values(spec, radius, values)
    }

    fn check_support(&self) -> Result<()> {
        for (d, &v) in self.window.iter().zip(&self.values) {
            if v == 0.0 {
                continue;
            }
            for (axis, &x) in d.iter().enumerate() {
                let extent = self.spec.extent(axis);
                if 2 * x.unsigned_abs() as usize >= extent {
                    return Err(Error::SupportExceedsWindow {
                        axis,
                        radius: x.unsigned_abs() as usize,
                        extent,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    /// 1 for the rectangle, the smoothing exponent otherwise, `None` for a
    /// general profile.
    pub fn exponent(&self) -> Option<u32> {
        self.exponent
    }

    pub fn radius(&self) -> usize {
        self.window.radius()
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// q at a fine-lattice displacement on Z_fin.
    pub fn get(&self, d: &[i64]) -> f64 {
        self.window.index(d).map_or(0.0, |j| self.values[j])
    }

    /// Nonzero (displacement, value) pairs.
    pub fn support(&self) -> impl Iterator<Item = (Vec<i64>, f64)> + '_ {
        self.window
            .iter()
            .zip(&self.values)
            .filter(|(_, &v)| v != 0.0)
            .map(|(d, &v)| (d, v))
    }

    /// q̂(p) = vol_f Σ_u q(u) e^{−ip·u}, for real or complex p.
    pub fn q_hat(&self, p: &[Complex64]) -> Complex64 {
        let neg: Vec<Complex64> = p.iter().map(|x| -x).collect();
        let s: Complex64 = self
            .support()
            .map(|(d, v)| plane_wave(&neg, &self.spec.fine_position(&d)) * v)
            .sum();
        s * self.spec.vol_f()
    }

    /// Analytic continuation of conj(q̂(p)) off the real axis,
    /// vol_f Σ_u q(u) e^{ip·u}.
    pub fn q_hat_bar(&self, p: &[Complex64]) -> Complex64 {
        let s: Complex64 = self
            .support()
            .map(|(d, v)| plane_wave(p, &self.spec.fine_position(&d)) * v)
            .sum();
        s * self.spec.vol_f()
    }

    /// Π_a u_{L_a}(ε_a p_a)^exponent, defined for the rectangle and its
    /// smoothings.
    pub fn q_hat_closed(&self, p: &[f64]) -> Option<f64> {
        let e = self.exponent? as i32;
        Some(
            p.iter()
                .enumerate()
                .map(|(a, &pa)| u_l_real(self.spec.period(a), self.spec.spacing(a) * pa).powi(e))
                .product(),
        )
    }

    /// Closest coarse point ξ(u), as a coarse index on Z_crs.
    pub fn xi(&self, u: &[i64]) -> Result<Vec<i64>> {
        (0..self.spec.axes())
            .map(|a| {
                let l = self.spec.period(a) as i64;
                if l % 2 == 0 {
                    return Err(Error::EvenPeriod {
                        axis: a,
                        value: l as usize,
                    });
                }
                Ok((u[a] + (l - 1) / 2).div_euclid(l))
            })
            .collect()
    }
}

fn family_of(profile: &Profile) -> Result<LatticeFamily> {
    LatticeFamily::new(profile.spec.clone())
}

fn coarse_in_fine(spec: &LatticeSpec, x: &[i64]) -> Vec<i64> {
    x.iter()
        .enumerate()
        .map(|(a, &c)| c * spec.period(a) as i64)
        .collect()
}

fn expect_kind(field: &FieldVector, kind: LatticeKind) -> Result<()> {
    if field.kind() != kind {
        return Err(Error::LatticeMismatch {
            expected: kind,
            found: field.kind(),
        });
    }
    Ok(())
}

fn expect_spectrum(field: &SpectrumVector, kind: LatticeKind) -> Result<()> {
    if field.kind() != kind {
        return Err(Error::LatticeMismatch {
            expected: kind,
            found: field.kind(),
        });
    }
    Ok(())
}

/// (Qφ)(x) = vol_f Σ_u q(x−u)φ(u).
pub fn apply_q(profile: &Profile, phi: &FieldVector) -> Result<FieldVector> {
    expect_kind(phi, LatticeKind::Fine)?;
    let fam = family_of(profile)?;
    let fine = fam.shape(LatticeKind::Fine);
    let coarse = fam.shape(LatticeKind::Coarse);
    let support: Vec<_> = profile.support().collect();
    let values = coarse
        .iter()
        .map(|x| {
            let xf = coarse_in_fine(&profile.spec, &x);
            support
                .iter()
                .map(|(d, v)| {
                    let u: Vec<i64> = xf.iter().zip(d).map(|(p, q)| p - q).collect();
                    phi.values()[fine.ravel(&u)] * *v
                })
                .sum::<Complex64>()
                * fam.vol_f
        })
        .collect();
    FieldVector::new(&fam, LatticeKind::Coarse, values)
}

/// (Q*ψ)(u) = vol_c Σ_x ψ(x)q(x−u).
pub fn apply_q_star(profile: &Profile, psi: &FieldVector) -> Result<FieldVector> {
    expect_kind(psi, LatticeKind::Coarse)?;
    let fam = family_of(profile)?;
    let fine = fam.shape(LatticeKind::Fine);
    let coarse = fam.shape(LatticeKind::Coarse);
    let mut out = vec![zero(); fine.len()];
    for (i, x) in coarse.iter().enumerate() {
        let xf = coarse_in_fine(&profile.spec, &x);
        for (d, v) in profile.support() {
            let u: Vec<i64> = xf.iter().zip(&d).map(|(p, q)| p - q).collect();
            out[fine.ravel(&u)] += psi.values()[i] * v * fam.vol_c;
        }
    }
    FieldVector::new(&fam, LatticeKind::Fine, out)
}

/// A kernel K(x,x') on the coarse torus acting by vol_c Σ_{x'} K(x,x')ψ(x').
#[derive(Clone, Debug)]
pub struct CoarseKernel {
    family: LatticeFamily,
    entries: CMatrix,
}

impl CoarseKernel {
    pub fn family(&self) -> &LatticeFamily {
        &self.family
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// vol_c·K, the matrix of the operator in the site basis.
    pub fn operator_matrix(&self) -> CMatrix {
        &self.entries * Complex64::new(self.family.vol_c, 0.0)
    }

    pub fn apply(&self, psi: &FieldVector) -> Result<FieldVector> {
        expect_kind(psi, LatticeKind::Coarse)?;
        let v = nalgebra::DVector::from_column_slice(psi.values());
        let out = self.operator_matrix() * v;
        FieldVector::new(&self.family, LatticeKind::Coarse, out.iter().copied().collect())
    }
}

/// Kernel of QQ*: K(x,x') = vol_f Σ_u q(x−u)q(x'−u).
pub fn q_q_star(profile: &Profile) -> Result<CoarseKernel> {
    let fam = family_of(profile)?;
    let coarse = fam.shape(LatticeKind::Coarse).clone();
    let spec = &profile.spec;
    let support: Vec<_> = profile.support().collect();
    let mut entries = CMatrix::zeros(coarse.len(), coarse.len());
    for (i, x) in coarse.iter().enumerate() {
        let xf = coarse_in_fine(spec, &x);
        for (d, v) in &support {
            let u: Vec<i64> = xf.iter().zip(d).map(|(p, q)| p - q).collect();
            for (d2, v2) in &support {
                let y: Vec<i64> = u.iter().zip(d2).map(|(p, q)| p + q).collect();
                let on_coarse = y
                    .iter()
                    .enumerate()
                    .all(|(a, &c)| c.rem_euclid(spec.period(a) as i64) == 0);
                if !on_coarse {
                    continue;
                }
                let x2: Vec<i64> = y
                    .iter()
                    .enumerate()
                    .map(|(a, &c)| c.div_euclid(spec.period(a) as i64))
                    .collect();
                entries[(i, coarse.ravel(&x2))] += Complex64::new(fam.vol_f * v * v2, 0.0);
            }
        }
    }
    Ok(CoarseKernel {
        family: fam,
        entries,
    })
}

/// Kernel of Q*Q: A(u,u') = vol_c Σ_x q(x−u)q(x−u').
pub fn q_star_q(profile: &Profile) -> Result<PeriodicKernel> {
    let fam = family_of(profile)?;
    let fine = fam.shape(LatticeKind::Fine).clone();
    let coarse = fam.shape(LatticeKind::Coarse).clone();
    let support: Vec<_> = profile.support().collect();
    let mut entries = CMatrix::zeros(fine.len(), fine.len());
    for x in coarse.iter() {
        let xf = coarse_in_fine(&profile.spec, &x);
        for (d, v) in &support {
            let u: Vec<i64> = xf.iter().zip(d).map(|(p, q)| p - q).collect();
            let i = fine.ravel(&u);
            for (d2, v2) in &support {
                let u2: Vec<i64> = xf.iter().zip(d2).map(|(p, q)| p - q).collect();
                entries[(i, fine.ravel(&u2))] += Complex64::new(fam.vol_c * v * v2, 0.0);
            }
        }
    }
    PeriodicKernel::new(fam, entries)
}

/// q̂ on the finite dual fine lattice, in canonical order.
pub fn q_hat_discrete(profile: &Profile) -> Result<SpectrumVector> {
    let fam = family_of(profile)?;
    let fine = fam.shape(LatticeKind::Fine);
    let mut values = vec![zero(); fine.len()];
    for (d, v) in profile.support() {
        values[fine.ravel(&d)] += v;
    }
    let field = FieldVector::new(&fam, LatticeKind::Fine, values)?;
    fourier::transform(&fam, &field)
}

/// (Qφ)^(k) = Σ_{π̂(p)=k} q̂(p)φ̂(p).
pub fn apply_q_momentum(profile: &Profile, phi_hat: &SpectrumVector) -> Result<SpectrumVector> {
    expect_spectrum(phi_hat, LatticeKind::DualFine)?;
    let fam = family_of(profile)?;
    let qh = q_hat_discrete(profile)?;
    let fine = fam.shape(LatticeKind::DualFine);
    let coarse = fam.shape(LatticeKind::DualCoarse);
    let mut out = vec![zero(); coarse.len()];
    for (i, p) in fine.iter().enumerate() {
        out[coarse.ravel(&p)] += qh.values()[i] * phi_hat.values()[i];
    }
    SpectrumVector::new(&fam, LatticeKind::DualCoarse, out)
}

/// (Q*ψ)^(p) = conj(q̂(p)) ψ̂(π̂(p)).
pub fn apply_q_star_momentum(profile: &Profile, psi_hat: &SpectrumVector) -> Result<SpectrumVector> {
    expect_spectrum(psi_hat, LatticeKind::DualCoarse)?;
    let fam = family_of(profile)?;
    let qh = q_hat_discrete(profile)?;
    let fine = fam.shape(LatticeKind::DualFine);
    let coarse = fam.shape(LatticeKind::DualCoarse);
    let out = fine
        .iter()
        .enumerate()
        .map(|(i, p)| qh.values()[i].conj() * psi_hat.values()[coarse.ravel(&p)])
        .collect();
    SpectrumVector::new(&fam, LatticeKind::DualFine, out)
}

/// Σ_{π̂(p)=k} |q̂(p)|², indexed by the dual coarse lattice.
pub fn qq_star_symbol(profile: &Profile) -> Result<Vec<f64>> {
    let fam = family_of(profile)?;
    let qh = q_hat_discrete(profile)?;
    let fine = fam.shape(LatticeKind::DualFine);
    let coarse = fam.shape(LatticeKind::DualCoarse);
    let mut out = vec![0.0; coarse.len()];
    for (i, p) in fine.iter().enumerate() {
        out[coarse.ravel(&p)] += qh.values()[i].norm_sqr();
    }
    Ok(out)
}

/// (QQ*ψ)^(k) = (Σ_{π̂(p)=k} |q̂(p)|²) ψ̂(k).
pub fn q_q_star_momentum(profile: &Profile, psi_hat: &SpectrumVector) -> Result<SpectrumVector> {
    expect_spectrum(psi_hat, LatticeKind::DualCoarse)?;
    let fam = family_of(profile)?;
    let sym = qq_star_symbol(profile)?;
    let out = psi_hat.values().iter().zip(&sym).map(|(v, s)| v * s).collect();
    SpectrumVector::new(&fam, LatticeKind::DualCoarse, out)
}

/// (Q*Qφ)^(p) = conj(q̂(p)) Σ_{π̂(p')=π̂(p)} q̂(p')φ̂(p').
pub fn q_star_q_momentum(profile: &Profile, phi_hat: &SpectrumVector) -> Result<SpectrumVector> {
    let q_phi = apply_q_momentum(profile, phi_hat)?;
    apply_q_star_momentum(profile, &q_phi)
}

/// Fiber of Q*Q at real or complex k: â_k(ℓ,ℓ') = conj(q̂(k+ℓ)) q̂(k+ℓ'),
/// with the conjugate continued analytically off the real axis.
pub fn q_star_q_fiber(profile: &Profile, k: &[Complex64]) -> BlochFiber {
    let spec = &profile.spec;
    let block = Shape::new(spec.periods());
    let shifted: Vec<Vec<Complex64>> = block
        .iter()
        .map(|m| {
            let l = spec.dual_block_momentum(&m);
            k.iter().zip(&l).map(|(a, b)| a + b).collect()
        })
        .collect();
    let left: Vec<Complex64> = shifted.iter().map(|p| profile.q_hat_bar(p)).collect();
    let right: Vec<Complex64> = shifted.iter().map(|p| profile.q_hat(p)).collect();
    let n = block.len();
    BlochFiber::new(k.to_vec(), CMatrix::from_fn(n, n, |i, j| left[i] * right[j]))
}

/// Coarse radius of the window holding every x with q(x−u) ≠ 0, u in the block.
fn profile_coarse_radius(profile: &Profile) -> usize {
    (0..profile.spec.axes())
        .map(|a| {
            let l = profile.spec.period(a);
            profile.radius().div_ceil(l)
        })
        .max()
        .unwrap_or(0)
}

/// Q on the infinite lattices: c(x,u) = q(x−u).
pub fn q_kernel(profile: &Profile) -> ZKernelCF {
    let spec = profile.spec.clone();
    ZKernelCF::from_fn(spec.clone(), profile_coarse_radius(profile), |b, c| {
        let x = coarse_in_fine(&spec, c);
        let d: Vec<i64> = x.iter().zip(b).map(|(p, q)| p - q).collect();
        Complex64::new(profile.get(&d), 0.0)
    })
}

/// Q* on the infinite lattices: b(u,x) = q(x−u).
pub fn q_star_kernel(profile: &Profile) -> ZKernelFC {
    q_kernel(profile).transpose()
}

/// Q*Q on the infinite lattice: a(u,u') = vol_c Σ_{x∈Z_crs} q(x−u)q(x−u').
pub fn q_star_q_kernel(profile: &Profile) -> ZKernel {
    let spec = profile.spec.clone();
    let rc = profile_coarse_radius(profile) as i64;
    let coarse_window = Window::new(rc as usize, spec.axes());
    let vol_c = spec.vol_c();
    ZKernel::from_fn(spec.clone(), 2 * profile.radius(), |b, d| {
        let mut s = 0.0;
        for c in coarse_window.iter() {
            let x = coarse_in_fine(&spec, &c);
            let d1: Vec<i64> = x.iter().zip(b).map(|(p, q)| p - q).collect();
            let q1 = profile.get(&d1);
            if q1 == 0.0 {
                continue;
            }
            let d2: Vec<i64> = d1.iter().zip(d).map(|(p, q)| p - q).collect();
            s += q1 * profile.get(&d2);
        }
        Complex64::new(vol_c * s, 0.0)
    })
}

/// Largest value of Σ_ℓ |q̂(k+ℓ)|² over the discrete dual coarse torus; bounds
/// the spectrum of Q*Q.
pub fn q_star_q_spectral_bound(profile: &Profile) -> Result<f64> {
    Ok(qq_star_symbol(profile)?.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::periodic_op::max_abs_diff;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn u_l_values() {
        assert!((u_l(5, c(0.0)) - 1.0).norm() < 1e-15);
        assert!((u_l(3, c(PI)) + 1.0 / 3.0).norm() < 1e-15);
        assert!((u_l(3, c(2.0 * PI)) - 1.0).norm() < 1e-12);
        let z = Complex64::new(0.7, -0.4);
        let direct: Complex64 = (-2..=2).map(|k| (-Complex64::i() * z * k as f64).exp()).sum::<Complex64>() / 5.0;
        assert!((u_l(5, z) - direct).norm() < 1e-14);
    }

    #[test]
    fn naive_profile_on_three_by_three() {
        let p = Profile::naive(LatticeSpec::reference()).unwrap();
        for d in Window::new(2, 2).iter() {
            let want = if d.iter().all(|x| x.abs() <= 1) { 1.0 / 9.0 } else { 0.0 };
            assert_eq!(p.get(&d), want);
        }
        assert!((p.q_hat(&[c(0.0), c(0.0)]) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn even_period_rejected_for_rectangle() {
        let spec = LatticeSpec::new(1.0, 1.0, 2, 3, 8, 9, 1).unwrap();
        assert!(matches!(Profile::naive(spec.clone()), Err(Error::EvenPeriod { axis: 0, value: 2 })));
        assert!(Profile::smooth(spec, 2).is_ok());
    }

    #[test]
    fn tent_is_self_convolution() {
        let spec = LatticeSpec::reference();
        let naive = Profile::naive(spec.clone()).unwrap();
        let tent = Profile::smooth(spec.clone(), 2).unwrap();
        for d in Window::new(3, 2).iter() {
            let conv: f64 = Window::new(1, 2)
                .iter()
                .map(|e| {
                    let r: Vec<i64> = d.iter().zip(&e).map(|(x, y)| x - y).collect();
                    naive.get(&e) * naive.get(&r)
                })
                .sum::<f64>()
                * spec.vol_f();
            assert!((tent.get(&d) - conv).abs() < 1e-15);
        }
    }

    #[test]
    fn oversized_smoothing_rejected() {
        assert!(matches!(
            Profile::smooth(LatticeSpec::reference(), 6),
            Err(Error::SupportExceedsWindow { .. })
        ));
    }

    #[test]
    fn naive_qq_star_is_identity() {
        let p = Profile::naive(LatticeSpec::reference()).unwrap();
        let k = q_q_star(&p).unwrap();
        let n = k.entries().nrows();
        assert!(max_abs_diff(&k.operator_matrix(), &CMatrix::identity(n, n)) < 1e-14);
    }

    #[test]
    fn xi_picks_block_center() {
        let p = Profile::naive(LatticeSpec::reference()).unwrap();
        assert_eq!(p.xi(&[1, -1]).unwrap(), vec![0, 0]);
        assert_eq!(p.xi(&[2, 4]).unwrap(), vec![1, 1]);
        assert_eq!(p.xi(&[-2, 5]).unwrap(), vec![-1, 2]);
    }

    #[test]
    fn fiber_at_zero_momentum() {
        let p = Profile::naive(LatticeSpec::reference()).unwrap();
        let f = q_star_q_fiber(&p, &[c(0.0), c(0.0)]);
        assert!((f.entries()[(0, 0)] - 1.0).norm() < 1e-14);
    }
}
