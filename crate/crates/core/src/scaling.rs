//! The dilation 𝕃(τ, x) = (σ_T τ, σ_X x) from the lattices with spacings ε/σ
//! onto the original ones, and the induced conjugation of kernels.
//!
//! 𝕃 maps the scaled site with integer index n to the original site with the
//! same index, so fields and kernel tables keep their integer data and only
//! the lattice and a prefactor change.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, Shape};
use crate::norms::WeightedNorm;
use crate::periodization::{fiber_hat, ZField, ZKernel, ZKernelCF, ZKernelFC};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaleFactors {
    sigma_t: f64,
    sigma_x: f64,
}

impl ScaleFactors {
    pub fn new(sigma_t: f64, sigma_x: f64) -> Result<Self> {
        for (name, v) in [("sigma_t", sigma_t), ("sigma_x", sigma_x)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Self { sigma_t, sigma_x })
    }

    pub fn identity() -> Self {
        Self {
            sigma_t: 1.0,
            sigma_x: 1.0,
        }
    }

    pub fn sigma_t(&self) -> f64 {
        self.sigma_t
    }

    pub fn sigma_x(&self) -> f64 {
        self.sigma_x
    }

    pub fn sigma(&self, axis: usize) -> f64 {
        if axis == 0 {
            self.sigma_t
        } else {
            self.sigma_x
        }
    }

    /// σ_T σ_X^d.
    pub fn jacobian(&self, dim: usize) -> f64 {
        self.sigma_t * self.sigma_x.powi(dim as i32)
    }

    /// Scaling by `self` followed by `other`.
    pub fn then(&self, other: &ScaleFactors) -> ScaleFactors {
        ScaleFactors {
            sigma_t: self.sigma_t * other.sigma_t,
            sigma_x: self.sigma_x * other.sigma_x,
        }
    }

    /// Smallest m for which ‖a^(s)‖_{m_s} ≤ ‖a‖_m is guaranteed; σ_X only
    /// enters when there are space axes.
    pub fn threshold(&self, m_s: f64, dim: usize) -> f64 {
        let inv = if dim == 0 {
            1.0 / self.sigma_t
        } else {
            (1.0 / self.sigma_t).max(1.0 / self.sigma_x)
        };
        inv * m_s
    }
}

/// The lattice with spacings ε_T/σ_T and ε_X/σ_X and the same integers.
pub fn scaled_spec(spec: &LatticeSpec, s: &ScaleFactors) -> Result<LatticeSpec> {
    spec.with_spacings(spec.eps_t() / s.sigma_t, spec.eps_x() / s.sigma_x)
}

/// Kernels that can be conjugated by 𝕃_*.
pub trait Scalable: Sized {
    fn spec(&self) -> &LatticeSpec;
    fn rescale(&self, spec: LatticeSpec, factor: f64) -> Self;
}

impl Scalable for ZKernel {
    fn spec(&self) -> &LatticeSpec {
        ZKernel::spec(self)
    }
    fn rescale(&self, spec: LatticeSpec, factor: f64) -> Self {
        self.rescaled(spec, factor)
    }
}

impl Scalable for ZKernelFC {
    fn spec(&self) -> &LatticeSpec {
        ZKernelFC::spec(self)
    }
    fn rescale(&self, spec: LatticeSpec, factor: f64) -> Self {
        self.rescaled(spec, factor)
    }
}

impl Scalable for ZKernelCF {
    fn spec(&self) -> &LatticeSpec {
        ZKernelCF::spec(self)
    }
    fn rescale(&self, spec: LatticeSpec, factor: f64) -> Self {
        self.rescaled(spec, factor)
    }
}

/// Kernel of 𝕃_*^{−1} a 𝕃_*: a^(s)(v,v') = σ_Tσ_X^d a(𝕃v, 𝕃v').
pub fn scale_kernel<K: Scalable>(a: &K, s: &ScaleFactors) -> Result<K> {
    let spec = scaled_spec(a.spec(), s)?;
    let j = s.jacobian(spec.dim());
    Ok(a.rescale(spec, j))
}

/// 𝕃_* α, with (𝕃_*α)(𝕃v) = α(v); `original` is the unscaled lattice.
pub fn push_forward(alpha: &ZField, original: &LatticeSpec) -> ZField {
    alpha.relabel(original.clone())
}

/// 𝕃_*^{−1} β onto the lattice `scaled`.
pub fn pull_back(beta: &ZField, scaled: &LatticeSpec) -> ZField {
    beta.relabel(scaled.clone())
}

/// (𝕃_*^{−1} a 𝕃_* α) evaluated by conjugation, for α on the scaled lattice.
pub fn conjugate_apply(a: &ZKernel, s: &ScaleFactors, alpha: &ZField) -> Result<ZField> {
    let scaled = scaled_spec(a.spec(), s)?;
    Ok(pull_back(&a.apply(&push_forward(alpha, a.spec())), &scaled))
}

/// Index of a momentum on 2πσ/(εL)·ℤ, reduced into the dual block.
fn scaled_block_index(spec: &LatticeSpec, s: &ScaleFactors, ell: &[f64]) -> Result<Vec<i64>> {
    if ell.len() != spec.axes() {
        return Err(Error::DimensionMismatch {
            expected: spec.axes(),
            found: ell.len(),
        });
    }
    ell.iter()
        .enumerate()
        .map(|(axis, &v)| {
            let step = s.sigma(axis) * spec.dual_coarse_period(axis);
            let x = v / step;
            let r = x.round();
            if (x - r).abs() > 1e-9 * x.abs().max(1.0) {
                return Err(Error::OffLattice { axis, value: v });
            }
            Ok((r as i64).rem_euclid(spec.period(axis) as i64))
        })
        .collect()
}

/// â_{𝕃^{−1}k}(𝕃^{−1}ℓ, 𝕃^{−1}ℓ'), the fiber of a^(s) at k computed from `a`.
/// `ell` and `ell_prime` are physical momenta on the scaled dual block.
pub fn scaled_fiber(a: &ZKernel, s: &ScaleFactors, k: &[Complex64], ell: &[f64], ell_prime: &[f64]) -> Result<Complex64> {
    let spec = a.spec();
    let m = scaled_block_index(spec, s, ell)?;
    let m2 = scaled_block_index(spec, s, ell_prime)?;
    let k_orig: Vec<Complex64> = k.iter().enumerate().map(|(axis, v)| v / s.sigma(axis)).collect();
    let block = Shape::new(spec.periods());
    let f = fiber_hat(a, &k_orig);
    Ok(f.entries()[(block.ravel(&m), block.ravel(&m2))])
}

/// ‖a^(s)‖_{m_s} against ‖a‖_m at the threshold m = max(1/σ_T, 1/σ_X)·m_s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledNormReport {
    pub m_s: f64,
    pub m: f64,
    pub scaled_norm: f64,
    pub norm: f64,
    pub pass: bool,
}

pub fn scaled_norm_check<K: Scalable + WeightedNorm>(a: &K, s: &ScaleFactors, m_s: f64) -> Result<ScaledNormReport> {
    let scaled = scale_kernel(a, s)?;
    let m = s.threshold(m_s, a.spec().dim());
    let scaled_norm = scaled.weighted_norm(m_s);
    let norm = a.weighted_norm(m);
    Ok(ScaledNormReport {
        m_s,
        m,
        scaled_norm,
        norm,
        pass: scaled_norm <= norm * (1.0 + 1e-12),
    })
}
