//! Operators on the fine torus that commute with coarse-lattice translations.
//!
//! A [`PeriodicKernel`] acts by (Aφ)(u) = vol_f Σ_{u'} A(u,u') φ(u'). Its
//! momentum matrix Â(p,p') = vol_f/|X_fin| Σ e^{−ip·u} A(u,u') e^{ip'·u'} is
//! block diagonal along the classes of the dual coarse torus, and the blocks
//! are the Bloch fibers Â(k+ℓ, k+ℓ') indexed by the dual block.

use std::collections::HashSet;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::{dft, SpectrumVector};
use crate::lattice::{FieldVector, LatticeFamily, LatticeKind};
use crate::random::{self, KernelRng};

pub type CMatrix = DMatrix<Complex64>;

/// Relative tolerance for accepting a dense kernel as periodic.
pub const PERIODICITY_TOLERANCE: f64 = 1e-10;

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Applies a DFT with `row_sign` along the row index and `col_sign` along the
/// column index, both indices laid out on the torus with `extents`.
pub(crate) fn transform_matrix(
    m: &CMatrix,
    extents: &[usize],
    row_sign: i64,
    col_sign: i64,
) -> CMatrix {
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, m.ncols());
    for j in 0..m.ncols() {
        let col: Vec<Complex64> = m.column(j).iter().copied().collect();
        let t = dft(&col, extents, row_sign);
        for (i, v) in t.into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    for i in 0..n {
        let row: Vec<Complex64> = out.row(i).iter().copied().collect();
        let t = dft(&row, extents, col_sign);
        for (j, v) in t.into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    out
}

/// Kernel of a coarse-periodic operator on the fine torus.
#[derive(Clone, Debug)]
pub struct PeriodicKernel {
    family: LatticeFamily,
    entries: CMatrix,
}

impl PeriodicKernel {
    /// Accepts `entries` when every coarse translate deviates by at most
    /// 1e-10·max|A|.
    pub fn new(family: LatticeFamily, entries: CMatrix) -> Result<Self> {
        let n = family.n_fine;
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: entries.nrows().max(entries.ncols()),
            });
        }
        let deviation = periodicity_defect(&family, &entries);
        let tolerance = PERIODICITY_TOLERANCE * max_abs(&entries);
        if deviation > tolerance {
            return Err(Error::NotPeriodic {
                deviation,
                tolerance,
            });
        }
        Ok(Self { family, entries })
    }

    pub(crate) fn from_parts(family: LatticeFamily, entries: CMatrix) -> Self {
        Self { family, entries }
    }

    pub fn from_fn(
        family: LatticeFamily,
        mut f: impl FnMut(&[i64], &[i64]) -> Complex64,
    ) -> Result<Self> {
        let shape = family.shape(LatticeKind::Fine).clone();
        let n = shape.len();
        let mut entries = CMatrix::zeros(n, n);
        for (i, u) in shape.iter().enumerate() {
            for (j, v) in shape.iter().enumerate() {
                entries[(i, j)] = f(&u, &v);
            }
        }
        Self::new(family, entries)
    }

    /// (1/vol_f) δ_{u,u'}.
    pub fn identity(family: LatticeFamily) -> Self {
        let n = family.n_fine;
        let entries = CMatrix::identity(n, n) * Complex64::new(1.0 / family.vol_f, 0.0);
        Self { family, entries }
    }

    /// Kernel of φ ↦ φ(· − x) for the coarse site with index `coarse_shift`.
    pub fn coarse_translation(family: LatticeFamily, coarse_shift: &[i64]) -> Result<Self> {
        if coarse_shift.len() != family.axes() {
            return Err(Error::DimensionMismatch {
                expected: family.axes(),
                found: coarse_shift.len(),
            });
        }
        let spec = family.spec().clone();
        let shift: Vec<i64> = coarse_shift
            .iter()
            .enumerate()
            .map(|(a, &c)| c * spec.period(a) as i64)
            .collect();
        let shape = family.shape(LatticeKind::Fine).clone();
        let val = 1.0 / family.vol_f;
        let n = shape.len();
        let mut entries = CMatrix::zeros(n, n);
        for (i, u) in shape.iter().enumerate() {
            let src: Vec<i64> = u.iter().zip(&shift).map(|(a, b)| a - b).collect();
            entries[(i, shape.ravel(&src))] = Complex64::new(val, 0.0);
        }
        Ok(Self { family, entries })
    }

    /// A(u,u') = α(u − u') with α given on the fine torus.
    pub fn translation_invariant(
        family: LatticeFamily,
        alpha: impl Fn(&[i64]) -> Complex64,
    ) -> Self {
        let shape = family.shape(LatticeKind::Fine).clone();
        let n = shape.len();
        let mut entries = CMatrix::zeros(n, n);
        for (i, u) in shape.iter().enumerate() {
            for (j, v) in shape.iter().enumerate() {
                let d: Vec<i64> = u.iter().zip(&v).map(|(a, b)| a - b).collect();
                entries[(i, j)] = alpha(&shape.reduce(&d));
            }
        }
        Self { family, entries }
    }

    /// Random periodic kernel: one independent row per block representative,
    /// copied to its coarse translates.
    pub fn random(family: LatticeFamily, rng: &mut KernelRng) -> Self {
        let spec = family.spec().clone();
        let shape = family.shape(LatticeKind::Fine).clone();
        let block = family.shape(LatticeKind::Block).clone();
        let n = shape.len();
        let rows: Vec<Vec<Complex64>> = (0..block.len())
            .map(|_| random::complex_vec(rng, n))
            .collect();
        let mut entries = CMatrix::zeros(n, n);
        for (i, u) in shape.iter().enumerate() {
            let b: Vec<i64> = u
                .iter()
                .enumerate()
                .map(|(a, &c)| c % spec.period(a) as i64)
                .collect();
            let row = &rows[block.ravel(&b)];
            let shift: Vec<i64> = u.iter().zip(&b).map(|(x, y)| x - y).collect();
            for (j, v) in shape.iter().enumerate() {
                let rel: Vec<i64> = v.iter().zip(&shift).map(|(x, y)| x - y).collect();
                entries[(i, j)] = row[shape.ravel(&rel)];
            }
        }
        Self { family, entries }
    }

    pub fn family(&self) -> &LatticeFamily {
        &self.family
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn get(&self, u: &[i64], u2: &[i64]) -> Complex64 {
        let shape = self.family.shape(LatticeKind::Fine);
        self.entries[(shape.ravel(u), shape.ravel(u2))]
    }

    /// Matrix of the operator in the position basis, vol_f·A.
    pub fn operator_matrix(&self) -> CMatrix {
        &self.entries * Complex64::new(self.family.vol_f, 0.0)
    }

    pub fn apply(&self, phi: &FieldVector) -> Result<FieldVector> {
        if phi.kind() != LatticeKind::Fine {
            return Err(Error::LatticeMismatch {
                expected: LatticeKind::Fine,
                found: phi.kind(),
            });
        }
        let v = nalgebra::DVector::from_column_slice(phi.values());
        let out = &self.entries * v * Complex64::new(self.family.vol_f, 0.0);
        Ok(FieldVector::from_parts(
            LatticeKind::Fine,
            out.iter().copied().collect(),
        ))
    }

    /// Kernel of the operator product self·other.
    pub fn compose(&self, other: &PeriodicKernel) -> Result<PeriodicKernel> {
        if self.family != other.family {
            return Err(Error::InvalidArgument(
                "kernels live on different lattices".into(),
            ));
        }
        let entries = (&self.entries * &other.entries) * Complex64::new(self.family.vol_f, 0.0);
        Ok(Self::from_parts(self.family.clone(), entries))
    }

    /// A*(u,u') = A(u',u).
    pub fn transpose(&self) -> PeriodicKernel {
        Self::from_parts(self.family.clone(), self.entries.transpose())
    }

    pub fn momentum_matrix(&self) -> MomentumMatrix {
        let extents = self.family.shape(LatticeKind::Fine).extents().to_vec();
        let pref = self.family.vol_f / self.family.n_fine as f64;
        let entries = transform_matrix(&self.entries, &extents, -1, 1) * Complex64::new(pref, 0.0);
        MomentumMatrix {
            family: self.family.clone(),
            entries,
        }
    }

    /// Fibers Â(k+ℓ, k+ℓ') at the given representatives of the dual coarse
    /// torus (in units of 2π/(ε𝓛)).
    pub fn bloch_fibers(&self, reps: &[Vec<i64>]) -> Result<Vec<BlochFiber>> {
        check_unique_classes(&self.family, reps.iter().map(|r| r.as_slice()))?;
        let mm = self.momentum_matrix();
        Ok(reps.iter().map(|k| mm.fiber(k)).collect())
    }

    /// The twisted kernel A_k(u,u') = vol_c Σ_{u'' ≡ u' mod X_crs}
    /// e^{−ik·u} A(u,u'') e^{ik·u''} on the whole fine torus.
    pub fn twisted_kernel(&self, k_index: &[i64]) -> CMatrix {
        let fam = &self.family;
        let spec = fam.spec();
        let shape = fam.shape(LatticeKind::Fine);
        let coarse = fam.shape(LatticeKind::Coarse);
        let n = shape.len();
        let phase = |u: &[i64]| -> Complex64 {
            u.iter()
                .zip(k_index)
                .enumerate()
                .map(|(a, (&x, &j))| {
                    let e = spec.extent(a);
                    crate::lattice::cis_frac((x * j).rem_euclid(e as i64), e)
                })
                .product()
        };
        let sites: Vec<Vec<i64>> = shape.iter().collect();
        let phases: Vec<Complex64> = sites.iter().map(|u| phase(u)).collect();
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            for (j, v) in sites.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in coarse.iter() {
                    let w: Vec<i64> = v
                        .iter()
                        .zip(&c)
                        .enumerate()
                        .map(|(a, (&x, &ci))| x + ci * spec.period(a) as i64)
                        .collect();
                    let jj = shape.ravel(&w);
                    acc += self.entries[(i, jj)] * phases[jj];
                }
                out[(i, j)] = acc * phases[i].conj() * fam.vol_c;
            }
        }
        out
    }
}

/// Largest |A(u+x,u'+x) − A(u,u')| over the unit coarse translations.
pub fn periodicity_defect(family: &LatticeFamily, entries: &CMatrix) -> f64 {
    let spec = family.spec();
    let shape = family.shape(LatticeKind::Fine);
    let sites: Vec<Vec<i64>> = shape.iter().collect();
    let mut worst = 0.0f64;
    for axis in 0..spec.axes() {
        let l = spec.period(axis) as i64;
        let shifted: Vec<usize> = sites
            .iter()
            .map(|u| {
                let mut v = u.clone();
                v[axis] += l;
                shape.ravel(&v)
            })
            .collect();
        for i in 0..sites.len() {
            for j in 0..sites.len() {
                let d = (entries[(shifted[i], shifted[j])] - entries[(i, j)]).norm();
                worst = worst.max(d);
            }
        }
    }
    worst
}

fn check_unique_classes<'a>(
    family: &LatticeFamily,
    reps: impl Iterator<Item = &'a [i64]>,
) -> Result<HashSet<Vec<i64>>> {
    let coarse = family.shape(LatticeKind::DualCoarse);
    let mut seen = HashSet::new();
    for k in reps {
        if k.len() != family.axes() {
            return Err(Error::DimensionMismatch {
                expected: family.axes(),
                found: k.len(),
            });
        }
        let class = coarse.reduce(k);
        if !seen.insert(class.clone()) {
            return Err(Error::DuplicateClass { class });
        }
    }
    Ok(seen)
}

/// Â(p,p') over the dual fine torus.
#[derive(Clone, Debug)]
pub struct MomentumMatrix {
    family: LatticeFamily,
    entries: CMatrix,
}

impl MomentumMatrix {
    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn family(&self) -> &LatticeFamily {
        &self.family
    }

    /// (Aφ)^(p) = Σ_{p'} Â(p,p') φ̂(p').
    pub fn apply(&self, phi_hat: &SpectrumVector) -> Result<SpectrumVector> {
        if phi_hat.kind() != LatticeKind::DualFine {
            return Err(Error::LatticeMismatch {
                expected: LatticeKind::DualFine,
                found: phi_hat.kind(),
            });
        }
        let v = nalgebra::DVector::from_column_slice(phi_hat.values());
        let out = &self.entries * v;
        Ok(SpectrumVector::from_parts(
            LatticeKind::DualFine,
            out.iter().copied().collect(),
        ))
    }

    /// Largest |Â(p,p')| over pairs in different dual coarse classes.
    pub fn off_block_max(&self) -> f64 {
        let fine = self.family.shape(LatticeKind::DualFine);
        let coarse = self.family.shape(LatticeKind::DualCoarse);
        let class: Vec<usize> = fine.iter().map(|p| coarse.ravel(&p)).collect();
        let mut worst = 0.0f64;
        for i in 0..class.len() {
            for j in 0..class.len() {
                if class[i] != class[j] {
                    worst = worst.max(self.entries[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// A(u,u') = ĥvol_f/(2π)^{1+d} Σ_{p,p'} e^{ip·u} Â(p,p') e^{−ip'·u'}.
    pub fn kernel(&self) -> PeriodicKernel {
        let fam = &self.family;
        let extents = fam.shape(LatticeKind::Fine).extents().to_vec();
        let pref = fam.hvol_f / (2.0 * PI).powi(fam.axes() as i32);
        let entries = transform_matrix(&self.entries, &extents, 1, -1) * Complex64::new(pref, 0.0);
        PeriodicKernel::from_parts(fam.clone(), entries)
    }

    /// Fiber at the universal-cover point `k_index` (units of 2π/(ε𝓛)).
    pub fn fiber(&self, k_index: &[i64]) -> BlochFiber {
        let fam = &self.family;
        let fine = fam.shape(LatticeKind::DualFine);
        let block = fam.shape(LatticeKind::DualBlock);
        let idx: Vec<usize> = block
            .iter()
            .map(|m| {
                let shift = fam.dual_block_to_fine(&m);
                let p: Vec<i64> = k_index.iter().zip(&shift).map(|(a, b)| a + b).collect();
                fine.ravel(&p)
            })
            .collect();
        let nb = idx.len();
        let entries = CMatrix::from_fn(nb, nb, |i, j| self.entries[(idx[i], idx[j])]);
        BlochFiber::discrete(fam, k_index.to_vec(), entries)
    }
}

/// The |B̂|×|B̂| matrix of a periodic operator at crystal momentum k, indexed
/// by the dual block in canonical order.
#[derive(Clone, Debug)]
pub struct BlochFiber {
    k: Vec<Complex64>,
    k_index: Option<Vec<i64>>,
    entries: CMatrix,
}

impl BlochFiber {
    /// Fiber at an arbitrary (possibly complex) physical momentum.
    pub fn new(k: Vec<Complex64>, entries: CMatrix) -> Self {
        Self {
            k,
            k_index: None,
            entries,
        }
    }

    /// Fiber at a point of the universal cover of the finite dual coarse torus.
    pub fn discrete(family: &LatticeFamily, k_index: Vec<i64>, entries: CMatrix) -> Self {
        let k = family
            .spec()
            .discrete_momentum(&k_index)
            .into_iter()
            .map(|x| Complex64::new(x, 0.0))
            .collect();
        Self {
            k,
            k_index: Some(k_index),
            entries,
        }
    }

    pub fn k(&self) -> &[Complex64] {
        &self.k
    }

    pub fn k_index(&self) -> Option<&[i64]> {
        self.k_index.as_deref()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn with_entries(&self, entries: CMatrix) -> Self {
        Self {
            k: self.k.clone(),
            k_index: self.k_index.clone(),
            entries,
        }
    }
}

/// Inverse of [`PeriodicKernel::bloch_fibers`]: needs exactly one discrete
/// fiber per dual coarse class, with any choice of representatives.
pub fn reconstruct(family: &LatticeFamily, fibers: &[BlochFiber]) -> Result<PeriodicKernel> {
    let mut reps = Vec::with_capacity(fibers.len());
    for f in fibers {
        match f.k_index() {
            Some(k) => reps.push(k),
            None => {
                return Err(Error::InvalidArgument(
                    "reconstruction needs fibers on the discrete dual torus".into(),
                ))
            }
        }
        if f.entries.nrows() != family.n_block || f.entries.ncols() != family.n_block {
            return Err(Error::DimensionMismatch {
                expected: family.n_block,
                found: f.entries.nrows(),
            });
        }
    }
    let seen = check_unique_classes(family, reps.iter().copied())?;
    if let Some(missing) = family
        .shape(LatticeKind::DualCoarse)
        .iter()
        .find(|c| !seen.contains(c))
    {
        return Err(Error::MissingClass { class: missing });
    }

    let fine = family.shape(LatticeKind::DualFine);
    let block = family.shape(LatticeKind::DualBlock);
    let n = family.n_fine;
    let shifts: Vec<Vec<i64>> = block.iter().map(|m| family.dual_block_to_fine(&m)).collect();
    let placed: Vec<(Vec<usize>, &CMatrix)> = fibers
        .par_iter()
        .map(|f| {
            let k = f.k_index().unwrap();
            let idx = shifts
                .iter()
                .map(|s| {
                    let p: Vec<i64> = k.iter().zip(s).map(|(a, b)| a + b).collect();
                    fine.ravel(&p)
                })
                .collect();
            (idx, &f.entries)
        })
        .collect();
    let mut hat = CMatrix::zeros(n, n);
    for (idx, m) in placed {
        for (i, &pi) in idx.iter().enumerate() {
            for (j, &pj) in idx.iter().enumerate() {
                hat[(pi, pj)] = m[(i, j)];
            }
        }
    }
    let mm = MomentumMatrix {
        family: family.clone(),
        entries: hat,
    };
    Ok(mm.kernel())
}

/// Same as [`PeriodicKernel::transpose`]; kept as a free function to mirror
/// [`reconstruct`].
pub fn transpose_op(a: &PeriodicKernel) -> PeriodicKernel {
    a.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_family, LatticeSpec};

    fn fam() -> LatticeFamily {
        build_family(LatticeSpec::reference()).unwrap()
    }

    #[test]
    fn identity_kernel_has_identity_fibers() {
        let f = fam();
        let id = PeriodicKernel::identity(f.clone());
        let mm = id.momentum_matrix();
        assert!(max_abs_diff(mm.entries(), &CMatrix::identity(81, 81)) < 1e-13);
        let fibers = id.bloch_fibers(&f.canonical_k_reps()).unwrap();
        for fb in &fibers {
            assert!(max_abs_diff(fb.entries(), &CMatrix::identity(9, 9)) < 1e-13);
        }
        let back = reconstruct(&f, &fibers).unwrap();
        assert!(max_abs_diff(back.entries(), id.entries()) < 1e-13);
    }

    #[test]
    fn non_periodic_kernel_rejected() {
        let f = fam();
        let mut m = CMatrix::identity(81, 81);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            PeriodicKernel::new(f, m),
            Err(Error::NotPeriodic { .. })
        ));
    }

    #[test]
    fn coarse_translation_shifts_delta() {
        let f = fam();
        let t = PeriodicKernel::coarse_translation(f.clone(), &[1, 0]).unwrap();
        assert!(PeriodicKernel::new(f.clone(), t.entries().clone()).is_ok());
        let delta = FieldVector::from_fn(&f, LatticeKind::Fine, |u| {
            if u == [1, 2] {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let out = t.apply(&delta).unwrap();
        let shape = f.shape(LatticeKind::Fine);
        for (i, u) in shape.iter().enumerate() {
            let want = if u == [4, 2] { 1.0 } else { 0.0 };
            assert_eq!(out.values()[i], Complex64::new(want, 0.0));
        }
    }

    #[test]
    fn duplicate_and_missing_classes() {
        let f = fam();
        let a = PeriodicKernel::identity(f.clone());
        let dup = vec![vec![0, 0], vec![3, 0]];
        assert!(matches!(
            a.bloch_fibers(&dup),
            Err(Error::DuplicateClass { .. })
        ));
        let mut fibers = a.bloch_fibers(&f.canonical_k_reps()).unwrap();
        fibers.pop();
        assert!(matches!(
            reconstruct(&f, &fibers),
            Err(Error::MissingClass { .. })
        ));
    }

    #[test]
    fn transpose_is_an_involution() {
        let f = fam();
        let mut rng = random::seeded(3);
        let a = PeriodicKernel::random(f, &mut rng);
        assert_eq!(a.transpose().transpose().entries(), a.entries());
        let sym = PeriodicKernel::new(a.family().clone(), a.entries() + a.entries().transpose()).unwrap();
        assert_eq!(transpose_op(&sym).entries(), sym.entries());
    }
}
