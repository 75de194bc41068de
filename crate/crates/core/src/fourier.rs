//! Forward and inverse Fourier transforms on the fine, coarse and block
//! lattices.
//!
//! Forward: φ̂(p) = vol·Σ_u φ(u) e^{−ip·u}. Inverse: φ(u) = ĥvol/(2π)^{1+d}·Σ_p φ̂(p) e^{ip·u}.
//! Dual points use the same canonical row-major order as direct points.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{cis_frac, FieldVector, LatticeFamily, LatticeKind};

/// Complex values indexed by a dual lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumVector {
    kind: LatticeKind,
    values: Vec<Complex64>,
}

impl SpectrumVector {
    pub fn new(family: &LatticeFamily, kind: LatticeKind, values: Vec<Complex64>) -> Result<Self> {
        if !kind.is_dual() {
            return Err(Error::LatticeMismatch {
                expected: kind.dual(),
                found: kind,
            });
        }
        let n = family.shape(kind).len();
        if values.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: values.len(),
            });
        }
        Ok(Self { kind, values })
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub(crate) fn from_parts(kind: LatticeKind, values: Vec<Complex64>) -> Self {
        Self { kind, values }
    }
}

/// Unnormalised multidimensional DFT, Σ_n x(n) exp(sign·2πi Σ_a j_a n_a / E_a),
/// applied one axis at a time.
pub fn dft(data: &[Complex64], extents: &[usize], sign: i64) -> Vec<Complex64> {
    let len: usize = extents.iter().product();
    assert_eq!(data.len(), len, "dft input length does not match extents");
    let mut cur = data.to_vec();
    let mut next = vec![Complex64::new(0.0, 0.0); len];
    let mut stride = len;
    for &e in extents {
        stride /= e;
        if e == 1 {
            continue;
        }
        let twiddle: Vec<Complex64> = (0..e as i64).map(|r| cis_frac(sign * r, e)).collect();
        let outer = len / (e * stride);
        for o in 0..outer {
            for s in 0..stride {
                let base = o * e * stride + s;
                for j in 0..e {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for n in 0..e {
                        acc += cur[base + n * stride] * twiddle[(j * n) % e];
                    }
                    next[base + j * stride] = acc;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

/// Forward transform of a field on the fine, coarse or block lattice.
pub fn transform(family: &LatticeFamily, field: &FieldVector) -> Result<SpectrumVector> {
    let kind = field.kind();
    if kind.is_dual() {
        return Err(Error::LatticeMismatch {
            expected: kind.dual(),
            found: kind,
        });
    }
    let vol = family.cell_volume(kind);
    let mut values = dft(field.values(), family.shape(kind).extents(), -1);
    values.iter_mut().for_each(|v| *v *= vol);
    Ok(SpectrumVector::from_parts(kind.dual(), values))
}

/// Inverse transform, with the ĥvol/(2π)^{1+d} prefactor of the dual lattice.
pub fn inverse_transform(family: &LatticeFamily, spectrum: &SpectrumVector) -> Result<FieldVector> {
    let kind = spectrum.kind();
    if !kind.is_dual() {
        return Err(Error::LatticeMismatch {
            expected: kind.dual(),
            found: kind,
        });
    }
    let pref = family.cell_volume(kind) / (2.0 * PI).powi(family.axes() as i32);
    let mut values = dft(spectrum.values(), family.shape(kind).extents(), 1);
    values.iter_mut().for_each(|v| *v *= pref);
    Ok(FieldVector::from_parts(kind.dual(), values))
}

/// Bilinear pairing vol·Σ_u φ₁(u)φ₂(u) on a direct lattice.
pub fn pairing(family: &LatticeFamily, a: &FieldVector, b: &FieldVector) -> Result<Complex64> {
    if a.kind() != b.kind() {
        return Err(Error::LatticeMismatch {
            expected: a.kind(),
            found: b.kind(),
        });
    }
    let s: Complex64 = a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum();
    Ok(s * family.cell_volume(a.kind()))
}

/// The same pairing evaluated in momentum space,
/// ĥvol/(2π)^{1+d}·Σ_p φ̂₁(−p)φ̂₂(p).
pub fn pairing_momentum(
    family: &LatticeFamily,
    a: &SpectrumVector,
    b: &SpectrumVector,
) -> Result<Complex64> {
    if a.kind() != b.kind() {
        return Err(Error::LatticeMismatch {
            expected: a.kind(),
            found: b.kind(),
        });
    }
    let shape = family.shape(a.kind());
    let mut s = Complex64::new(0.0, 0.0);
    for (i, p) in shape.iter().enumerate() {
        let neg: Vec<i64> = p.iter().map(|x| -x).collect();
        s += a.values()[shape.ravel(&neg)] * b.values()[i];
    }
    Ok(s * family.cell_volume(a.kind()) / (2.0 * PI).powi(family.axes() as i32))
}
