//! Kernels on the infinite fine lattice that are invariant under coarse
//! translations, their periodization onto the finite torus, and their fiber
//! transforms over the continuous dual torus of the coarse lattice.
//!
//! Kernels are stored as one row per block representative `b`, each row a
//! dense window of displacements. A value at an arbitrary pair of sites is
//! recovered from `a(b + Lc, u') = a(b, u' − Lc)`, so coarse invariance holds
//! by construction.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{cis_frac, FieldVector, LatticeFamily, LatticeKind, LatticeSpec, Shape, Window};
use crate::periodic_op::{BlochFiber, CMatrix, PeriodicKernel};
use crate::random::{self, KernelRng};

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// exp(i k·x) for complex momentum `k` and physical position `x`.
pub(crate) fn plane_wave(k: &[Complex64], x: &[f64]) -> Complex64 {
    let arg: Complex64 = k.iter().zip(x).map(|(ki, xi)| ki * xi).sum();
    (Complex64::i() * arg).exp()
}

/// Splits a fine index into block representative and coarse index.
fn split(spec: &LatticeSpec, u: &[i64]) -> (Vec<i64>, Vec<i64>) {
    let mut b = Vec::with_capacity(u.len());
    let mut c = Vec::with_capacity(u.len());
    for (a, &x) in u.iter().enumerate() {
        let l = spec.period(a) as i64;
        b.push(x.rem_euclid(l));
        c.push(x.div_euclid(l));
    }
    (b, c)
}

fn coarse_to_fine(spec: &LatticeSpec, c: &[i64]) -> Vec<i64> {
    c.iter()
        .enumerate()
        .map(|(a, &x)| x * spec.period(a) as i64)
        .collect()
}

/// Table of exp(2πi m·n/L) indexed by [dual block m][block residue of n].
fn block_phases(spec: &LatticeSpec) -> (Shape, Vec<Vec<Complex64>>) {
    let block = Shape::new(spec.periods());
    let table = block
        .iter()
        .map(|m| {
            block
                .iter()
                .map(|n| {
                    m.iter()
                        .zip(&n)
                        .enumerate()
                        .map(|(a, (&mi, &ni))| cis_frac(mi * ni, spec.period(a)))
                        .product()
                })
                .collect()
        })
        .collect();
    (block, table)
}

fn check_axes(spec: &LatticeSpec, k: &[Complex64]) {
    assert_eq!(
        k.len(),
        spec.axes(),
        "momentum has {} components, lattice has {} axes",
        k.len(),
        spec.axes()
    );
}

/// Fine → fine kernel a(u,u') on the infinite lattice with finite support.
#[derive(Clone, Debug)]
pub struct ZKernel {
    spec: LatticeSpec,
    window: Window,
    block: Shape,
    prefactor: f64,
    rows: Arc<Vec<Complex64>>,
}

impl ZKernel {
    /// `f(b, δ)` gives a(b, b + δ) for block representatives `b` and
    /// displacements `δ` in [−radius, radius]^axes.
    pub fn from_fn(
        spec: LatticeSpec,
        radius: usize,
        mut f: impl FnMut(&[i64], &[i64]) -> Complex64,
    ) -> Self {
        let window = Window::new(radius, spec.axes());
        let block = Shape::new(spec.periods());
        let mut rows = Vec::with_capacity(block.len() * window.len());
        for b in block.iter() {
            for d in window.iter() {
                rows.push(f(&b, &d));
            }
        }
        Self {
            spec,
            window,
            block,
            prefactor: 1.0,
            rows: Arc::new(rows),
        }
    }

    /// (1/vol_f) δ_{u,u'}.
    pub fn identity(spec: LatticeSpec) -> Self {
        let v = 1.0 / spec.vol_f();
        Self::from_fn(spec, 0, |_, _| Complex64::new(v, 0.0))
    }

    /// (1/vol_f) δ_{u', u+shift}.
    pub fn shift(spec: LatticeSpec, shift: &[i64]) -> Self {
        assert_eq!(shift.len(), spec.axes());
        let radius = shift.iter().map(|s| s.unsigned_abs() as usize).max().unwrap_or(0);
        let v = 1.0 / spec.vol_f();
        let s = shift.to_vec();
        Self::from_fn(spec, radius, move |_, d| {
            if d == s.as_slice() {
                Complex64::new(v, 0.0)
            } else {
                zero()
            }
        })
    }

    /// a(u,u') = α(u − u') for α supported in the window.
    pub fn translation_invariant(
        spec: LatticeSpec,
        radius: usize,
        alpha: impl Fn(&[i64]) -> Complex64,
    ) -> Self {
        Self::from_fn(spec, radius, |_, d| {
            let neg: Vec<i64> = d.iter().map(|x| -x).collect();
            alpha(&neg)
        })
    }

    /// Every window entry of every row drawn independently.
    pub fn random(spec: LatticeSpec, radius: usize, rng: &mut KernelRng) -> Self {
        Self::from_fn(spec, radius, |_, _| random::complex(rng))
    }

    /// Truncates a kernel given on the whole lattice to `radius`, reporting
    /// the largest row mass vol_f Σ |a| found in the shell radius < |δ|_∞ ≤ outer_radius.
    pub fn truncated(
        spec: LatticeSpec,
        radius: usize,
        outer_radius: usize,
        f: impl Fn(&[i64], &[i64]) -> Complex64,
    ) -> (Self, f64) {
        let outer = Window::new(outer_radius.max(radius), spec.axes());
        let inner = Window::new(radius, spec.axes());
        let block = Shape::new(spec.periods());
        let vol_f = spec.vol_f();
        let tail = block
            .iter()
            .map(|b| {
                outer
                    .iter()
                    .filter(|d| !inner.contains(d))
                    .map(|d| f(&b, &d).norm())
                    .sum::<f64>()
                    * vol_f
            })
            .fold(0.0, f64::max);
        (Self::from_fn(spec, radius, f), tail)
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn radius(&self) -> usize {
        self.window.radius()
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn block(&self) -> &Shape {
        &self.block
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    /// a(b, b+δ) by flat block and window indices.
    pub fn value(&self, block_index: usize, offset_index: usize) -> Complex64 {
        self.rows[block_index * self.window.len() + offset_index] * self.prefactor
    }

    /// a(u, u') for arbitrary fine sites.
    pub fn get(&self, u: &[i64], u2: &[i64]) -> Complex64 {
        let (b, _) = split(&self.spec, u);
        let d: Vec<i64> = u2.iter().zip(u).map(|(x, y)| x - y).collect();
        match self.window.index(&d) {
            Some(j) => self.value(self.block.ravel(&b), j),
            None => zero(),
        }
    }

    /// (b, δ, a(b, b+δ)) over the stored window.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<i64>, Vec<i64>, Complex64)> + '_ {
        self.block.iter().enumerate().flat_map(move |(bi, b)| {
            self.window
                .iter()
                .enumerate()
                .map(move |(j, d)| (b.clone(), d, self.value(bi, j)))
        })
    }

    /// Displacements carrying a nonzero value in some row.
    pub fn support_offsets(&self) -> Vec<Vec<i64>> {
        (0..self.window.len())
            .filter(|&j| (0..self.block.len()).any(|bi| self.value(bi, j) != zero()))
            .map(|j| self.window.offset(j))
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.rows.iter().map(|z| z.norm()).fold(0.0, f64::max) * self.prefactor.abs()
    }

    /// Same integer table on another lattice with an extra prefactor; the
    /// entry storage is shared.
    pub(crate) fn rescaled(&self, spec: LatticeSpec, factor: f64) -> Self {
        Self {
            spec,
            window: self.window.clone(),
            block: self.block.clone(),
            prefactor: self.prefactor * factor,
            rows: Arc::clone(&self.rows),
        }
    }

    /// a*(u,u') = a(u',u).
    pub fn transpose(&self) -> Self {
        let spec = self.spec.clone();
        Self::from_fn(spec, self.radius(), |b, d| {
            let u2: Vec<i64> = b.iter().zip(d).map(|(x, y)| x + y).collect();
            self.get(&u2, b)
        })
    }

    /// Action on a finitely supported field over the infinite lattice.
    pub fn apply(&self, field: &ZField) -> ZField {
        let mut out = ZField::new(self.spec.clone(), LatticeKind::Fine);
        let vol_f = self.spec.vol_f();
        for (u2, v) in field.iter() {
            for d in self.window.iter() {
                let u: Vec<i64> = u2.iter().zip(&d).map(|(x, y)| x - y).collect();
                let a = self.get(&u, u2);
                if a != zero() {
                    out.add(u, a * v * vol_f);
                }
            }
        }
        out
    }
}

/// Finitely supported field on Z_fin or Z_crs.
#[derive(Clone, Debug)]
pub struct ZField {
    spec: LatticeSpec,
    kind: LatticeKind,
    values: std::collections::BTreeMap<Vec<i64>, Complex64>,
}

impl ZField {
    pub fn new(spec: LatticeSpec, kind: LatticeKind) -> Self {
        Self {
            spec,
            kind,
            values: Default::default(),
        }
    }

    pub fn random(spec: LatticeSpec, kind: LatticeKind, radius: usize, rng: &mut KernelRng) -> Self {
        let w = Window::new(radius, spec.axes());
        let mut f = Self::new(spec, kind);
        for d in w.iter() {
            let v = random::complex(rng);
            f.values.insert(d, v);
        }
        f
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn get(&self, site: &[i64]) -> Complex64 {
        self.values.get(site).copied().unwrap_or_else(zero)
    }

    pub fn set(&mut self, site: Vec<i64>, v: Complex64) {
        self.values.insert(site, v);
    }

    pub fn add(&mut self, site: Vec<i64>, v: Complex64) {
        *self.values.entry(site).or_insert_with(zero) += v;
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<i64>, Complex64)> {
        self.values.iter().map(|(k, v)| (k, *v))
    }

    /// Same integer values re-tagged onto another lattice.
    pub fn relabel(&self, spec: LatticeSpec) -> Self {
        Self {
            spec,
            kind: self.kind,
            values: self.values.clone(),
        }
    }

    fn cell_volume(&self) -> f64 {
        match self.kind {
            LatticeKind::Coarse => self.spec.vol_c(),
            _ => self.spec.vol_f(),
        }
    }

    /// Bilinear pairing vol·Σ α(u)β(u).
    pub fn pairing(&self, other: &ZField) -> Complex64 {
        self.values
            .iter()
            .map(|(k, v)| v * other.get(k))
            .sum::<Complex64>()
            * self.cell_volume()
    }

    /// Inner product vol·Σ conj(α(u))β(u).
    pub fn inner(&self, other: &ZField) -> Complex64 {
        self.values
            .iter()
            .map(|(k, v)| v.conj() * other.get(k))
            .sum::<Complex64>()
            * self.cell_volume()
    }

    pub fn max_abs_diff(&self, other: &ZField) -> f64 {
        let mut keys: std::collections::BTreeSet<&Vec<i64>> = self.values.keys().collect();
        keys.extend(other.values.keys());
        keys.into_iter()
            .map(|k| (self.get(k) - other.get(k)).norm())
            .fold(0.0, f64::max)
    }
}

fn check_window_fits(family: &LatticeFamily, radius: usize, coarse: bool) -> Result<()> {
    let spec = family.spec();
    for axis in 0..spec.axes() {
        let extent = if coarse {
            spec.extent(axis) / spec.period(axis)
        } else {
            spec.extent(axis)
        };
        if 2 * radius + 1 > extent {
            return Err(Error::SupportExceedsWindow {
                axis,
                radius,
                extent,
            });
        }
    }
    Ok(())
}

/// A([u],[u']) = Σ_z a(u, u'+z) over the torus periods. Requires the support
/// window to fit inside the torus on every axis.
pub fn periodize(a: &ZKernel) -> Result<PeriodicKernel> {
    let family = LatticeFamily::new(a.spec.clone())?;
    check_window_fits(&family, a.radius(), false)?;
    let shape = family.shape(LatticeKind::Fine).clone();
    let n = shape.len();
    let mut entries = CMatrix::zeros(n, n);
    for (i, u) in shape.iter().enumerate() {
        let (b, _) = split(&a.spec, &u);
        let bi = a.block.ravel(&b);
        for (j, d) in a.window.iter().enumerate() {
            let v = a.value(bi, j);
            if v == zero() {
                continue;
            }
            let u2: Vec<i64> = u.iter().zip(&d).map(|(x, y)| x + y).collect();
            entries[(i, shape.ravel(&u2))] += v;
        }
    }
    PeriodicKernel::new(family, entries)
}

/// c(u,u') = vol_f Σ_{u''} a(u,u'') b(u'',u').
pub fn compose_z(a: &ZKernel, b: &ZKernel) -> Result<ZKernel> {
    if a.spec != b.spec {
        return Err(Error::InvalidArgument(
            "kernels live on different lattices".into(),
        ));
    }
    let spec = a.spec.clone();
    let window = Window::new(a.radius() + b.radius(), spec.axes());
    let block = a.block.clone();
    let vol_f = spec.vol_f();
    let mut rows = vec![zero(); block.len() * window.len()];
    for (bi, b0) in block.iter().enumerate() {
        for (j1, d1) in a.window.iter().enumerate() {
            let av = a.value(bi, j1);
            if av == zero() {
                continue;
            }
            let mid: Vec<i64> = b0.iter().zip(&d1).map(|(x, y)| x + y).collect();
            let (mb, _) = split(&spec, &mid);
            let mbi = b.block.ravel(&mb);
            for (j2, d2) in b.window.iter().enumerate() {
                let bv = b.value(mbi, j2);
                if bv == zero() {
                    continue;
                }
                let d: Vec<i64> = d1.iter().zip(&d2).map(|(x, y)| x + y).collect();
                let j = window.index(&d).expect("sum of windows fits");
                rows[bi * window.len() + j] += av * bv * vol_f;
            }
        }
    }
    Ok(ZKernel {
        spec,
        window,
        block,
        prefactor: 1.0,
        rows: Arc::new(rows),
    })
}

/// â_k(ℓ,ℓ') = vol_f/|B| Σ_{[u]∈B, u'} e^{−iℓ·u} a(u,u') e^{iℓ'·u'} e^{−ik·(u−u')}
/// at a real or complex momentum `k`.
pub fn fiber_hat(a: &ZKernel, k: &[Complex64]) -> BlochFiber {
    BlochFiber::new(k.to_vec(), fiber_matrix(a, k))
}

fn fiber_matrix(a: &ZKernel, k: &[Complex64]) -> CMatrix {
    let spec = &a.spec;
    check_axes(spec, k);
    let (block, phases) = block_phases(spec);
    let nb = block.len();
    let waves: Vec<Complex64> = a
        .window
        .iter()
        .map(|d| plane_wave(k, &spec.fine_position(&d)))
        .collect();
    let mut out = CMatrix::zeros(nb, nb);
    let mut v = vec![zero(); nb];
    for (bi, b) in block.iter().enumerate() {
        v.iter_mut().for_each(|x| *x = zero());
        for (j, d) in a.window.iter().enumerate() {
            let val = a.value(bi, j);
            if val == zero() {
                continue;
            }
            let t = val * waves[j];
            let u2: Vec<i64> = b.iter().zip(&d).map(|(x, y)| x + y).collect();
            let r = block.ravel(&u2);
            for (m2, vm) in v.iter_mut().enumerate() {
                *vm += t * phases[m2][r];
            }
        }
        for m in 0..nb {
            let ph = phases[m][bi].conj();
            for m2 in 0..nb {
                out[(m, m2)] += ph * v[m2];
            }
        }
    }
    out * Complex64::new(spec.vol_f() / nb as f64, 0.0)
}

/// A family k ↦ â_k of |B̂|×|B̂| matrices over the dual coarse torus.
pub trait FiberFunction: Sync {
    fn spec(&self) -> &LatticeSpec;
    fn fiber(&self, k: &[Complex64]) -> CMatrix;
}

impl FiberFunction for ZKernel {
    fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    fn fiber(&self, k: &[Complex64]) -> CMatrix {
        fiber_matrix(self, k)
    }
}

/// Fiber function given by a closure.
pub struct FnFiber<F> {
    spec: LatticeSpec,
    f: F,
}

impl<F> FnFiber<F>
where
    F: Fn(&[Complex64]) -> CMatrix + Sync,
{
    pub fn new(spec: LatticeSpec, f: F) -> Self {
        Self { spec, f }
    }
}

impl<F> FiberFunction for FnFiber<F>
where
    F: Fn(&[Complex64]) -> CMatrix + Sync,
{
    fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    fn fiber(&self, k: &[Complex64]) -> CMatrix {
        (self.f)(k)
    }
}

/// max |f_{k+p}(ℓ,ℓ') − f_k(ℓ+p, ℓ'+p)| for the dual block shift `m_shift`.
pub fn quasi_periodicity_defect<F: FiberFunction + ?Sized>(
    f: &F,
    k: &[Complex64],
    m_shift: &[i64],
) -> f64 {
    let spec = f.spec();
    let block = Shape::new(spec.periods());
    let p = spec.dual_block_momentum(m_shift);
    let kp: Vec<Complex64> = k.iter().zip(&p).map(|(a, b)| a + b).collect();
    let lhs = f.fiber(&kp);
    let rhs = f.fiber(k);
    let idx: Vec<usize> = block
        .iter()
        .map(|m| {
            let s: Vec<i64> = m.iter().zip(m_shift).map(|(a, b)| a + b).collect();
            block.ravel(&s)
        })
        .collect();
    let mut worst = 0.0f64;
    for i in 0..idx.len() {
        for j in 0..idx.len() {
            worst = worst.max((lhs[(i, j)] - rhs[(idx[i], idx[j])]).norm());
        }
    }
    worst
}

/// Relative tolerance of the quasi-periodicity probe in [`inverse_fiber`].
pub const QUASI_PERIODICITY_TOLERANCE: f64 = 1e-10;

/// Fixed probe momenta, away from grid points and symmetric lines.
pub fn probe_momenta(spec: &LatticeSpec) -> Vec<Vec<Complex64>> {
    const FRACTIONS: [f64; 3] = [0.137, 0.618, 0.871];
    FRACTIONS
        .iter()
        .enumerate()
        .map(|(i, &f0)| {
            (0..spec.axes())
                .map(|a| {
                    let frac = (f0 + 0.311 * a as f64 + 0.07 * i as f64).fract();
                    Complex64::new(frac * spec.dual_coarse_period(a), 0.0)
                })
                .collect()
        })
        .collect()
}

fn check_quasi_periodic<F: FiberFunction + ?Sized>(f: &F) -> Result<()> {
    let spec = f.spec().clone();
    for k in probe_momenta(&spec) {
        let scale = crate::periodic_op::max_abs(&f.fiber(&k)).max(1.0);
        for axis in 0..spec.axes() {
            let mut m = vec![0i64; spec.axes()];
            m[axis] = 1;
            let defect = quasi_periodicity_defect(f, &k, &m);
            if defect > QUASI_PERIODICITY_TOLERANCE * scale {
                return Err(Error::QuasiPeriodicity { defect, k });
            }
        }
    }
    Ok(())
}

/// Smallest grid per axis on which the uniform rule recovers a kernel of the
/// given support radius without aliasing: the integrand is a trigonometric
/// polynomial in k whose frequencies are coarse displacements, and two
/// in-window displacements differ by at most 2R fine steps.
pub fn minimal_exact_nodes(spec: &LatticeSpec, radius: usize) -> Vec<usize> {
    (0..spec.axes())
        .map(|a| 2 * radius / spec.period(a) + 1)
        .collect()
}

/// Default grid: 2R+1 nodes per axis, or `min_nodes` if larger.
pub fn default_nodes(spec: &LatticeSpec, radius: usize, min_nodes: usize) -> Vec<usize> {
    vec![(2 * radius + 1).max(min_nodes); spec.axes()]
}

/// Recovers a kernel of support radius `radius` from its fiber function by
/// the uniform rule on the default grid.
pub fn inverse_fiber<F: FiberFunction + ?Sized>(f: &F, radius: usize) -> Result<ZKernel> {
    let nodes = default_nodes(f.spec(), radius, 1);
    inverse_fiber_with_grid(f, radius, &nodes)
}

/// a(u,u') = Σ_{ℓ,ℓ'} ∫ e^{iℓ·u} f_k(ℓ,ℓ') e^{−iℓ'·u'} e^{ik·(u−u')} dk/(2π)^{1+d},
/// with the torus integral replaced by a uniform tensor grid of `nodes`.
pub fn inverse_fiber_with_grid<F: FiberFunction + ?Sized>(
    f: &F,
    radius: usize,
    nodes: &[usize],
) -> Result<ZKernel> {
    let spec = f.spec().clone();
    if nodes.len() != spec.axes() || nodes.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "need one positive node count per axis, got {nodes:?}"
        )));
    }
    check_quasi_periodic(f)?;
    let (block, phases) = block_phases(&spec);
    let nb = block.len();
    let window = Window::new(radius, spec.axes());
    let grid = Shape::new(nodes.to_vec());
    let offsets: Vec<Vec<i64>> = window.iter().collect();
    let positions: Vec<Vec<f64>> = offsets.iter().map(|d| spec.fine_position(d)).collect();
    let targets: Vec<Vec<usize>> = block
        .iter()
        .map(|b| {
            offsets
                .iter()
                .map(|d| {
                    let u2: Vec<i64> = b.iter().zip(d).map(|(x, y)| x + y).collect();
                    block.ravel(&u2)
                })
                .collect()
        })
        .collect();

    let contributions: Vec<Vec<Complex64>> = (0..grid.len())
        .into_par_iter()
        .map(|gi| {
            let j = grid.unravel(gi);
            let k: Vec<Complex64> = j
                .iter()
                .enumerate()
                .map(|(a, &ja)| {
                    Complex64::new(ja as f64 * spec.dual_coarse_period(a) / nodes[a] as f64, 0.0)
                })
                .collect();
            let fk = f.fiber(&k);
            let waves: Vec<Complex64> = positions.iter().map(|x| plane_wave(&k, x).conj()).collect();
            let mut out = vec![zero(); nb * window.len()];
            for bi in 0..nb {
                // g(m') = Σ_m e^{iℓ_m·b} f(m,m'); h(r) = Σ_{m'} g(m') e^{−iℓ_{m'}·r}
                let g: Vec<Complex64> = (0..nb)
                    .map(|m2| (0..nb).map(|m| phases[m][bi] * fk[(m, m2)]).sum())
                    .collect();
                let h: Vec<Complex64> = (0..nb)
                    .map(|r| (0..nb).map(|m2| g[m2] * phases[m2][r].conj()).sum())
                    .collect();
                for (j, &r) in targets[bi].iter().enumerate() {
                    out[bi * window.len() + j] = h[r] * waves[j];
                }
            }
            out
        })
        .collect();

    let weight = 1.0 / (spec.vol_c() * grid.len() as f64);
    let mut rows = vec![zero(); nb * window.len()];
    for c in &contributions {
        for (r, v) in rows.iter_mut().zip(c) {
            *r += v;
        }
    }
    rows.iter_mut().for_each(|r| *r *= weight);
    Ok(ZKernel {
        spec,
        window,
        block,
        prefactor: 1.0,
        rows: Arc::new(rows),
    })
}

/// max over probe momenta of |fiber_hat(a, k) − f(k)|.
pub fn fiber_residual<F: FiberFunction + ?Sized>(f: &F, a: &ZKernel, probes: &[Vec<Complex64>]) -> f64 {
    probes
        .iter()
        .map(|k| crate::periodic_op::max_abs_diff(&fiber_matrix(a, k), &f.fiber(k)))
        .fold(0.0, f64::max)
}

/// Coarse → fine kernel b(u, x), x on Z_crs.
#[derive(Clone, Debug)]
pub struct ZKernelFC {
    spec: LatticeSpec,
    window: Window,
    block: Shape,
    prefactor: f64,
    rows: Arc<Vec<Complex64>>,
}

/// Fine → coarse kernel c(x, u), x on Z_crs.
#[derive(Clone, Debug)]
pub struct ZKernelCF {
    spec: LatticeSpec,
    window: Window,
    block: Shape,
    prefactor: f64,
    rows: Arc<Vec<Complex64>>,
}

macro_rules! mixed_kernel_common {
    ($t:ident) => {
        impl $t {
            /// `f(b, c)` gives the value between the fine block representative
            /// `b` and the coarse site with index `c`, for `c` in
            /// [−coarse_radius, coarse_radius]^axes.
            pub fn from_fn(
                spec: LatticeSpec,
                coarse_radius: usize,
                mut f: impl FnMut(&[i64], &[i64]) -> Complex64,
            ) -> Self {
                let window = Window::new(coarse_radius, spec.axes());
                let block = Shape::new(spec.periods());
                let mut rows = Vec::with_capacity(block.len() * window.len());
                for b in block.iter() {
                    for c in window.iter() {
                        rows.push(f(&b, &c));
                    }
                }
                Self {
                    spec,
                    window,
                    block,
                    prefactor: 1.0,
                    rows: Arc::new(rows),
                }
            }

            pub fn random(spec: LatticeSpec, coarse_radius: usize, rng: &mut KernelRng) -> Self {
                Self::from_fn(spec, coarse_radius, |_, _| random::complex(rng))
            }

            pub fn spec(&self) -> &LatticeSpec {
                &self.spec
            }

            /// Support radius in coarse steps.
            pub fn coarse_radius(&self) -> usize {
                self.window.radius()
            }

            pub fn window(&self) -> &Window {
                &self.window
            }

            pub fn block(&self) -> &Shape {
                &self.block
            }

            pub fn value(&self, block_index: usize, offset_index: usize) -> Complex64 {
                self.rows[block_index * self.window.len() + offset_index] * self.prefactor
            }

            fn lookup(&self, fine: &[i64], coarse: &[i64]) -> Complex64 {
                let (b, c0) = split(&self.spec, fine);
                let c: Vec<i64> = coarse.iter().zip(&c0).map(|(x, y)| x - y).collect();
                match self.window.index(&c) {
                    Some(j) => self.value(self.block.ravel(&b), j),
                    None => zero(),
                }
            }

            /// (b, c, value) over the stored window.
            pub fn entries(&self) -> impl Iterator<Item = (Vec<i64>, Vec<i64>, Complex64)> + '_ {
                self.block.iter().enumerate().flat_map(move |(bi, b)| {
                    self.window
                        .iter()
                        .enumerate()
                        .map(move |(j, c)| (b.clone(), c, self.value(bi, j)))
                })
            }

            pub(crate) fn rescaled(&self, spec: LatticeSpec, factor: f64) -> Self {
                Self {
                    spec,
                    window: self.window.clone(),
                    block: self.block.clone(),
                    prefactor: self.prefactor * factor,
                    rows: Arc::clone(&self.rows),
                }
            }

            pub fn max_abs(&self) -> f64 {
                self.rows.iter().map(|z| z.norm()).fold(0.0, f64::max) * self.prefactor.abs()
            }

            /// Physical distance between block representative `b` and coarse index `c`.
            pub fn distance(&self, b: &[i64], c: &[i64]) -> f64 {
                let x = coarse_to_fine(&self.spec, c);
                let d: Vec<i64> = x.iter().zip(b).map(|(p, q)| p - q).collect();
                self.spec.fine_length(&d)
            }
        }
    };
}

mixed_kernel_common!(ZKernelFC);
mixed_kernel_common!(ZKernelCF);

impl ZKernelFC {
    /// b(u, x) for a fine index `u` and a coarse index `x`.
    pub fn get(&self, u: &[i64], x: &[i64]) -> Complex64 {
        self.lookup(u, x)
    }

    /// (bψ)(u) = vol_c Σ_x b(u,x)ψ(x) on finitely supported coarse fields.
    pub fn apply(&self, psi: &ZField) -> ZField {
        let mut out = ZField::new(self.spec.clone(), LatticeKind::Fine);
        let vol_c = self.spec.vol_c();
        for (x, v) in psi.iter() {
            for (bi, b) in self.block.iter().enumerate() {
                for (j, c) in self.window.iter().enumerate() {
                    let val = self.value(bi, j);
                    if val == zero() {
                        continue;
                    }
                    // u = b + L(x − c)
                    let shift: Vec<i64> = x.iter().zip(&c).map(|(p, q)| p - q).collect();
                    let u: Vec<i64> = coarse_to_fine(&self.spec, &shift)
                        .iter()
                        .zip(&b)
                        .map(|(p, q)| p + q)
                        .collect();
                    out.add(u, val * v * vol_c);
                }
            }
        }
        out
    }

    /// b*(x,u) = b(u,x); the entry table is shared.
    pub fn transpose(&self) -> ZKernelCF {
        ZKernelCF {
            spec: self.spec.clone(),
            window: self.window.clone(),
            block: self.block.clone(),
            prefactor: self.prefactor,
            rows: Arc::clone(&self.rows),
        }
    }

    /// Periodization onto the finite tori, acting by (bψ)(u) = vol_c Σ_x b(u,x)ψ(x).
    pub fn periodize(&self) -> Result<CoarseToFine> {
        let family = LatticeFamily::new(self.spec.clone())?;
        check_window_fits(&family, self.coarse_radius(), true)?;
        let fine = family.shape(LatticeKind::Fine).clone();
        let coarse = family.shape(LatticeKind::Coarse).clone();
        let mut entries = CMatrix::zeros(fine.len(), coarse.len());
        for (i, u) in fine.iter().enumerate() {
            let (b, c0) = split(&self.spec, &u);
            let bi = self.block.ravel(&b);
            for (j, c) in self.window.iter().enumerate() {
                let x: Vec<i64> = c0.iter().zip(&c).map(|(p, q)| p + q).collect();
                entries[(i, coarse.ravel(&x))] += self.value(bi, j);
            }
        }
        Ok(CoarseToFine { family, entries })
    }
}

impl ZKernelCF {
    /// c(x, u) for a coarse index `x` and a fine index `u`.
    pub fn get(&self, x: &[i64], u: &[i64]) -> Complex64 {
        self.lookup(u, x)
    }

    /// (cφ)(x) = vol_f Σ_u c(x,u)φ(u) on finitely supported fine fields.
    pub fn apply(&self, phi: &ZField) -> ZField {
        let mut out = ZField::new(self.spec.clone(), LatticeKind::Coarse);
        let vol_f = self.spec.vol_f();
        for (u, v) in phi.iter() {
            let (b, c0) = split(&self.spec, u);
            let bi = self.block.ravel(&b);
            for (j, c) in self.window.iter().enumerate() {
                let val = self.value(bi, j);
                if val == zero() {
                    continue;
                }
                let x: Vec<i64> = c0.iter().zip(&c).map(|(p, q)| p + q).collect();
                out.add(x, val * v * vol_f);
            }
        }
        out
    }

    /// c*(u,x) = c(x,u); the entry table is shared.
    pub fn transpose(&self) -> ZKernelFC {
        ZKernelFC {
            spec: self.spec.clone(),
            window: self.window.clone(),
            block: self.block.clone(),
            prefactor: self.prefactor,
            rows: Arc::clone(&self.rows),
        }
    }

    /// Periodization onto the finite tori, acting by (cφ)(x) = vol_f Σ_u c(x,u)φ(u).
    pub fn periodize(&self) -> Result<FineToCoarse> {
        let family = LatticeFamily::new(self.spec.clone())?;
        check_window_fits(&family, self.coarse_radius(), true)?;
        let fine = family.shape(LatticeKind::Fine).clone();
        let coarse = family.shape(LatticeKind::Coarse).clone();
        let mut entries = CMatrix::zeros(coarse.len(), fine.len());
        for (i, u) in fine.iter().enumerate() {
            let (b, c0) = split(&self.spec, &u);
            let bi = self.block.ravel(&b);
            for (j, c) in self.window.iter().enumerate() {
                let x: Vec<i64> = c0.iter().zip(&c).map(|(p, q)| p + q).collect();
                entries[(coarse.ravel(&x), i)] += self.value(bi, j);
            }
        }
        Ok(FineToCoarse { family, entries })
    }
}

/// b̂_k(ℓ) = vol_f Σ_{[u]∈B, x∈Z_crs} e^{−i(k+ℓ)·u} b(u,x) e^{ik·x}.
pub fn fiber_hat_fc(b: &ZKernelFC, k: &[Complex64]) -> Vec<Complex64> {
    let spec = &b.spec;
    check_axes(spec, k);
    let (block, phases) = block_phases(spec);
    let mut out = vec![zero(); block.len()];
    let neg: Vec<Complex64> = k.iter().map(|z| -z).collect();
    for (bi, w) in block.iter().enumerate() {
        let wave_u = plane_wave(&neg, &spec.fine_position(&w));
        let mut s = zero();
        for (j, c) in b.window.iter().enumerate() {
            let v = b.value(bi, j);
            if v == zero() {
                continue;
            }
            s += v * plane_wave(k, &spec.fine_position(&coarse_to_fine(spec, &c)));
        }
        for (m, o) in out.iter_mut().enumerate() {
            *o += phases[m][bi].conj() * wave_u * s;
        }
    }
    out.iter_mut().for_each(|o| *o *= spec.vol_f());
    out
}

/// ĉ_k(ℓ') = vol_f Σ_{[u]∈B, x∈Z_crs} e^{−ik·x} c(x,u) e^{i(k+ℓ')·u}.
pub fn fiber_hat_cf(c: &ZKernelCF, k: &[Complex64]) -> Vec<Complex64> {
    let spec = &c.spec;
    check_axes(spec, k);
    let (block, phases) = block_phases(spec);
    let mut out = vec![zero(); block.len()];
    let neg: Vec<Complex64> = k.iter().map(|z| -z).collect();
    for (bi, w) in block.iter().enumerate() {
        let wave_u = plane_wave(k, &spec.fine_position(&w));
        let mut s = zero();
        for (j, x) in c.window.iter().enumerate() {
            let v = c.value(bi, j);
            if v == zero() {
                continue;
            }
            s += v * plane_wave(&neg, &spec.fine_position(&coarse_to_fine(spec, &x)));
        }
        for (m, o) in out.iter_mut().enumerate() {
            *o += phases[m][bi] * wave_u * s;
        }
    }
    out.iter_mut().for_each(|o| *o *= spec.vol_f());
    out
}

/// Periodized coarse → fine operator, a |X_fin|×|X_crs| kernel.
#[derive(Clone, Debug)]
pub struct CoarseToFine {
    family: LatticeFamily,
    entries: CMatrix,
}

impl CoarseToFine {
    pub fn family(&self) -> &LatticeFamily {
        &self.family
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn apply(&self, psi: &FieldVector) -> Result<FieldVector> {
        if psi.kind() != LatticeKind::Coarse {
            return Err(Error::LatticeMismatch {
                expected: LatticeKind::Coarse,
                found: psi.kind(),
            });
        }
        let v = nalgebra::DVector::from_column_slice(psi.values());
        let out = &self.entries * v * Complex64::new(self.family.vol_c, 0.0);
        Ok(FieldVector::from_parts(LatticeKind::Fine, out.iter().copied().collect()))
    }
}

/// Periodized fine → coarse operator, a |X_crs|×|X_fin| kernel.
#[derive(Clone, Debug)]
pub struct FineToCoarse {
    family: LatticeFamily,
    entries: CMatrix,
}

impl FineToCoarse {
    pub fn family(&self) -> &LatticeFamily {
        &self.family
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
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
        Ok(FieldVector::from_parts(LatticeKind::Coarse, out.iter().copied().collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periodic_op::max_abs_diff;

    fn spec() -> LatticeSpec {
        LatticeSpec::reference()
    }

    fn real(k: &[f64]) -> Vec<Complex64> {
        k.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn identity_periodizes_to_identity() {
        let a = ZKernel::identity(spec());
        let p = periodize(&a).unwrap();
        let fam = LatticeFamily::new(spec()).unwrap();
        assert!(max_abs_diff(p.entries(), PeriodicKernel::identity(fam).entries()) == 0.0);
        let f = fiber_hat(&a, &real(&[0.3, -1.1]));
        assert!(max_abs_diff(f.entries(), &CMatrix::identity(9, 9)) < 1e-14);
    }

    #[test]
    fn in_window_entries_survive_periodization() {
        let mut rng = random::seeded(11);
        let a = ZKernel::random(spec(), 2, &mut rng);
        let p = periodize(&a).unwrap();
        for (b, d, v) in a.entries() {
            let u2: Vec<i64> = b.iter().zip(&d).map(|(x, y)| x + y).collect();
            assert_eq!(p.get(&b, &u2), v);
        }
    }

    #[test]
    fn oversized_support_rejected() {
        let a = ZKernel::identity(spec());
        let big = ZKernel::from_fn(spec(), 5, |_, _| Complex64::new(1.0, 0.0));
        assert!(periodize(&a).is_ok());
        match periodize(&big) {
            Err(Error::SupportExceedsWindow { axis, .. }) => assert_eq!(axis, 0),
            other => panic!("expected window error, got {other:?}"),
        }
    }

    #[test]
    fn shifts_compose_additively() {
        let s1 = ZKernel::shift(spec(), &[1, -2]);
        let s2 = ZKernel::shift(spec(), &[0, 3]);
        let c = compose_z(&s1, &s2).unwrap();
        let want = ZKernel::shift(spec(), &[1, 1]);
        for u in [[0i64, 0], [2, 5], [-4, 1]] {
            for d in Window::new(3, 2).iter() {
                let u2: Vec<i64> = u.iter().zip(&d).map(|(x, y)| x + y).collect();
                assert!((c.get(&u, &u2) - want.get(&u, &u2)).norm() < 1e-15);
            }
        }
        let id = ZKernel::identity(spec());
        let mut rng = random::seeded(5);
        let a = ZKernel::random(spec(), 1, &mut rng);
        let ai = compose_z(&a, &id).unwrap();
        for (b, d, v) in a.entries() {
            let u2: Vec<i64> = b.iter().zip(&d).map(|(x, y)| x + y).collect();
            assert_eq!(ai.get(&b, &u2), v);
        }
    }

    #[test]
    fn identity_fiber_function_inverts_to_identity() {
        let f = FnFiber::new(spec(), |_: &[Complex64]| CMatrix::identity(9, 9));
        let a = inverse_fiber(&f, 1).unwrap();
        let id = ZKernel::identity(spec());
        for (b, d, v) in a.entries() {
            let u2: Vec<i64> = b.iter().zip(&d).map(|(x, y)| x + y).collect();
            assert!((v - id.get(&b, &u2)).norm() < 1e-13);
        }
    }

    #[test]
    fn non_quasi_periodic_function_rejected() {
        let f = FnFiber::new(spec(), |k: &[Complex64]| {
            let mut m = CMatrix::zeros(9, 9);
            m[(0, 0)] = k[0];
            m
        });
        assert!(matches!(
            inverse_fiber(&f, 1),
            Err(Error::QuasiPeriodicity { .. })
        ));
    }

    #[test]
    fn mixed_transposes_are_involutions() {
        let mut rng = random::seeded(8);
        let b = ZKernelFC::random(spec(), 1, &mut rng);
        let back = b.transpose().transpose();
        for (x, y) in b.entries().zip(back.entries()) {
            assert_eq!(x, y);
        }
        assert_eq!(b.transpose().get(&[1, 0], &[4, 2]), b.get(&[4, 2], &[1, 0]));
    }

    #[test]
    fn coarse_sampling_kernel() {
        let s = spec();
        let inv = 1.0 / s.vol_f();
        let c = ZKernelCF::from_fn(s.clone(), 0, |b, _| {
            if b.iter().all(|&x| x == 0) {
                Complex64::new(inv, 0.0)
            } else {
                zero()
            }
        });
        let hat = fiber_hat_cf(&c, &real(&[0.4, 1.3]));
        assert!(hat.iter().all(|v| (v - 1.0).norm() < 1e-14));
        let fam = LatticeFamily::new(s).unwrap();
        let phi = FieldVector::from_fn(&fam, LatticeKind::Fine, |u| {
            Complex64::new(u[0] as f64, 2.0 * u[1] as f64)
        });
        let out = c.periodize().unwrap().apply(&phi).unwrap();
        for (i, x) in fam.shape(LatticeKind::Coarse).iter().enumerate() {
            assert!((out.values()[i] - Complex64::new(3.0 * x[0] as f64, 6.0 * x[1] as f64)).norm() < 1e-13);
        }
    }
}
