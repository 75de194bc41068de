//! Functions of periodic operators through the Cauchy integral
//! f(A) = (1/2πi)∮ f(ζ)(ζ𝟙 − A)^{−1} dζ, evaluated fiber by fiber.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::LatticeFamily;
use crate::norms::{c_constant, CConstant, NormWeight, SamplingPlan, WeightedNorm};
use crate::periodic_op::{max_abs, max_abs_diff, reconstruct, BlochFiber, CMatrix, PeriodicKernel};
use crate::periodization::{fiber_hat, periodize, FiberFunction, ZKernel};

/// Condition estimate above which a resolvent is refused.
pub const CONDITION_LIMIT: f64 = 1e14;
/// Relative change between node doublings accepted as converged.
pub const QUADRATURE_TOLERANCE: f64 = 1e-10;
/// Spectrum points closer to the contour than this times its scale are refused.
pub const CLEARANCE_FACTOR: f64 = 1e-8;
const MAX_DOUBLINGS: u32 = 12;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// A simple closed positively oriented curve.
#[derive(Clone, Debug, PartialEq)]
pub enum Contour {
    Circle { center: Complex64, radius: f64 },
    /// Closed polygon; the last vertex connects back to the first.
    Polyline { vertices: Vec<Complex64> },
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn segments_intersect(p1: Complex64, p2: Complex64, q1: Complex64, q2: Complex64) -> bool {
    let d1 = cross(q2 - q1, p1 - q1);
    let d2 = cross(q2 - q1, p2 - q1);
    let d3 = cross(p2 - p1, q1 - p1);
    let d4 = cross(p2 - p1, q2 - p1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: Complex64, b: Complex64, p: Complex64, d: f64| {
        d == 0.0
            && p.re >= a.re.min(b.re)
            && p.re <= a.re.max(b.re)
            && p.im >= a.im.min(b.im)
            && p.im <= a.im.max(b.im)
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

fn segment_distance(a: Complex64, b: Complex64, z: Complex64) -> f64 {
    let ab = b - a;
    let t = ((z - a).re * ab.re + (z - a).im * ab.im) / ab.norm_sqr();
    (a + ab * t.clamp(0.0, 1.0) - z).norm()
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let p = if n == 0 { 1.0 } else { p1 };
                dp = n as f64 * (x * p - p0) / (x * x - 1.0);
                let step = p / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

impl Contour {
    pub fn circle(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidContour(format!("circle radius must be positive, got {radius}")));
        }
        Ok(Contour::Circle { center, radius })
    }

    /// Validates simplicity and positive orientation (signed area > 0).
    pub fn polyline(vertices: Vec<Complex64>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidContour(format!("polyline needs at least 3 vertices, got {n}")));
        }
        let seg = |i: usize| (vertices[i], vertices[(i + 1) % n]);
        for i in 0..n {
            let (a, b) = seg(i);
            if a == b {
                return Err(Error::InvalidContour(format!("vertex {i} repeats the next vertex")));
            }
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                let (p, q) = seg(j);
                if segments_intersect(a, b, p, q) {
                    return Err(Error::InvalidContour(format!("segments {i} and {j} intersect")));
                }
            }
        }
        let area: f64 = (0..n).map(|i| cross(seg(i).0, seg(i).1)).sum::<f64>() / 2.0;
        if area <= 0.0 {
            return Err(Error::InvalidContour(format!(
                "polyline must be positively oriented, signed area is {area}"
            )));
        }
        Ok(Contour::Polyline { vertices })
    }

    /// Arc length |C|.
    pub fn length(&self) -> f64 {
        match self {
            Contour::Circle { radius, .. } => 2.0 * PI * radius,
            Contour::Polyline { vertices } => {
                let n = vertices.len();
                (0..n).map(|i| (vertices[(i + 1) % n] - vertices[i]).norm()).sum()
            }
        }
    }

    /// Radius of a circle; the largest vertex distance from the vertex mean
    /// of a polyline.
    pub fn scale(&self) -> f64 {
        match self {
            Contour::Circle { radius, .. } => *radius,
            Contour::Polyline { vertices } => {
                let mean = vertices.iter().sum::<Complex64>() / vertices.len() as f64;
                vertices.iter().map(|v| (v - mean).norm()).fold(0.0, f64::max)
            }
        }
    }

    /// Distance from `z` to the curve.
    pub fn distance(&self, z: Complex64) -> f64 {
        match self {
            Contour::Circle { center, radius } => ((z - center).norm() - radius).abs(),
            Contour::Polyline { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| segment_distance(vertices[i], vertices[(i + 1) % n], z))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Whether `z` lies in the open interior.
    pub fn encloses(&self, z: Complex64) -> bool {
        match self {
            Contour::Circle { center, radius } => (z - center).norm() < *radius,
            Contour::Polyline { vertices } => {
                let n = vertices.len();
                let mut inside = false;
                for i in 0..n {
                    let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                    if (a.im > z.im) != (b.im > z.im) {
                        let x = a.re + (z.im - a.im) * (b.re - a.re) / (b.im - a.im);
                        if z.re < x {
                            inside = !inside;
                        }
                    }
                }
                inside && self.distance(z) > 0.0
            }
        }
    }

    /// Nodes ζ_j and weights w_j with Σ w_j g(ζ_j) ≈ ∮ g(ζ) dζ: trapezoid
    /// on a circle, Gauss–Legendre on each polyline segment. `level` doubles
    /// the node count.
    pub fn quadrature(&self, level: u32) -> Vec<(Complex64, Complex64)> {
        match self {
            Contour::Circle { center, radius } => {
                let n = 16usize << level;
                (0..n)
                    .map(|j| {
                        let e = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
                        let z = center + e * *radius;
                        let w = Complex64::i() * e * *radius * (2.0 * PI / n as f64);
                        (z, w)
                    })
                    .collect()
            }
            Contour::Polyline { vertices } => {
                let gl = gauss_legendre(8usize << level);
                let n = vertices.len();
                let mut out = Vec::with_capacity(n * gl.len());
                for i in 0..n {
                    let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                    let half = (b - a) * 0.5;
                    for &(x, w) in &gl {
                        out.push((a + half * (1.0 + x), half * w));
                    }
                }
                out
            }
        }
    }
}

/// A function analytic on a neighbourhood of the closed contour interior.
/// Analyticity is the caller's contract; known poles may be declared so that
/// contours enclosing them are refused.
pub trait AnalyticFunction: Sync {
    fn eval(&self, z: Complex64) -> Complex64;

    fn singularities(&self) -> Vec<Complex64> {
        Vec::new()
    }
}

/// The named functions available from configuration files.
#[derive(Clone, Debug, PartialEq)]
pub enum NamedFunction {
    Identity,
    Square,
    Inverse,
    /// Coefficients c_0, c_1, … of Σ c_n z^n.
    Polynomial(Vec<Complex64>),
    /// exp truncated after z^degree / degree!.
    ExpTaylor(usize),
}

impl NamedFunction {
    /// Coefficients for the polynomial members.
    pub fn coefficients(&self) -> Option<Vec<Complex64>> {
        match self {
            NamedFunction::Identity => Some(vec![c(0.0), c(1.0)]),
            NamedFunction::Square => Some(vec![c(0.0), c(0.0), c(1.0)]),
            NamedFunction::Inverse => None,
            NamedFunction::Polynomial(cs) => Some(cs.clone()),
            NamedFunction::ExpTaylor(deg) => {
                let mut out = Vec::with_capacity(deg + 1);
                let mut f = 1.0;
                for n in 0..=*deg {
                    if n > 0 {
                        f *= n as f64;
                    }
                    out.push(c(1.0 / f));
                }
                Some(out)
            }
        }
    }

    /// f(M) by Horner's rule or a dense inverse, independent of any contour.
    pub fn apply_dense(&self, m: &CMatrix) -> Result<CMatrix> {
        let n = m.nrows();
        match self.coefficients() {
            Some(cs) => {
                let mut acc = CMatrix::zeros(n, n);
                for coef in cs.iter().rev() {
                    acc = &acc * m + CMatrix::identity(n, n) * *coef;
                }
                Ok(acc)
            }
            None => m.clone().try_inverse().ok_or_else(|| Error::Singular {
                zeta: c(0.0),
                k: Vec::new(),
                condition: f64::INFINITY,
            }),
        }
    }
}

impl AnalyticFunction for NamedFunction {
    fn eval(&self, z: Complex64) -> Complex64 {
        match self.coefficients() {
            Some(cs) => cs.iter().rev().fold(c(0.0), |acc, k| acc * z + k),
            None => z.inv(),
        }
    }

    fn singularities(&self) -> Vec<Complex64> {
        match self {
            NamedFunction::Inverse => vec![c(0.0)],
            _ => Vec::new(),
        }
    }
}

/// Wraps a closure as an [`AnalyticFunction`].
pub struct FnAnalytic<F>(pub F);

impl<F: Fn(Complex64) -> Complex64 + Sync> AnalyticFunction for FnAnalytic<F> {
    fn eval(&self, z: Complex64) -> Complex64 {
        (self.0)(z)
    }
}

fn norm1(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn resolvent_matrix(a: &CMatrix, zeta: Complex64, k: &[Complex64]) -> Result<CMatrix> {
    let n = a.nrows();
    let m = CMatrix::identity(n, n) * zeta - a;
    let singular = |condition| Error::Singular {
        zeta,
        k: k.to_vec(),
        condition,
    };
    let inv = m.clone().lu().try_inverse().ok_or_else(|| singular(f64::INFINITY))?;
    let cond = norm1(&m) * norm1(&inv);
    if cond.is_nan() || cond > CONDITION_LIMIT {
        return Err(singular(cond));
    }
    Ok(inv)
}

/// (ζ𝟙 − â_k)^{−1}, refused when the 1-norm condition estimate exceeds 1e14.
pub fn resolvent_fiber(fiber: &BlochFiber, zeta: Complex64) -> Result<BlochFiber> {
    let inv = resolvent_matrix(fiber.entries(), zeta, fiber.k())?;
    Ok(fiber.with_entries(inv))
}

/// One Cauchy-integral evaluation with its convergence record.
#[derive(Clone, Debug)]
pub struct QuadratureResult {
    pub value: CMatrix,
    pub nodes: usize,
    pub change: f64,
}

fn cauchy_sum<F: AnalyticFunction + ?Sized>(
    a: &CMatrix,
    k: &[Complex64],
    f: &F,
    nodes: &[(Complex64, Complex64)],
) -> Result<(CMatrix, f64)> {
    let n = a.nrows();
    let mut acc = CMatrix::zeros(n, n);
    let mut magnitude = 0.0;
    for &(z, w) in nodes {
        let r = resolvent_matrix(a, z, k)?;
        let fw = f.eval(z) * w;
        magnitude += max_abs(&r) * fw.norm();
        acc += r * fw;
    }
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    Ok((acc / two_pi_i, magnitude / (2.0 * PI)))
}

/// Multiple of machine epsilon times the summed term magnitudes below which
/// node-doubling changes are attributed to rounding.
pub const ROUNDING_FLOOR_FACTOR: f64 = 64.0;

/// (1/2πi)∮ f(ζ)(ζ𝟙 − M)^{−1} dζ with node doubling until successive
/// results agree to `QUADRATURE_TOLERANCE` relative to max(1, |result|), or
/// to the rounding level of the quadrature sum if that is larger.
pub fn cauchy_integral<F: AnalyticFunction + ?Sized>(
    a: &CMatrix,
    k: &[Complex64],
    f: &F,
    contour: &Contour,
) -> Result<QuadratureResult> {
    let mut prev = cauchy_sum(a, k, f, &contour.quadrature(0))?.0;
    let mut change = f64::INFINITY;
    let mut nodes = 0;
    for level in 1..=MAX_DOUBLINGS {
        let q = contour.quadrature(level);
        nodes = q.len();
        let (next, magnitude) = cauchy_sum(a, k, f, &q)?;
        change = max_abs_diff(&next, &prev);
        let scale = max_abs(&next).max(1.0);
        let floor = ROUNDING_FLOOR_FACTOR * f64::EPSILON * magnitude;
        prev = next;
        if change <= (QUADRATURE_TOLERANCE * scale).max(floor) {
            return Ok(QuadratureResult {
                value: prev,
                nodes,
                change,
            });
        }
    }
    Err(Error::NotConverged {
        nodes,
        change,
        tolerance: QUADRATURE_TOLERANCE,
    })
}

/// Eigenvalues of a square complex matrix from its Schur form.
pub fn eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    let t = m.clone().schur().unpack().1;
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Largest fine torus for which the spectrum is taken from the dense
/// operator matrix; larger tori use the union of the discrete fiber spectra.
pub const DENSE_SPECTRUM_LIMIT: usize = 1024;

/// Spectrum of the operator with kernel A (matrix vol_f·A).
pub fn operator_spectrum(a: &PeriodicKernel) -> Vec<Complex64> {
    let fam = a.family();
    if fam.n_fine <= DENSE_SPECTRUM_LIMIT {
        return eigenvalues(&a.operator_matrix());
    }
    let mm = a.momentum_matrix();
    fam.canonical_k_reps()
        .iter()
        .flat_map(|k| eigenvalues(mm.fiber(k).entries()))
        .collect()
}

/// Refuses contours that pass within the clearance of, or fail to enclose,
/// a spectrum point or a declared singularity of `f`.
pub fn check_contour<F: AnalyticFunction + ?Sized>(spectrum: &[Complex64], f: &F, contour: &Contour) -> Result<()> {
    let threshold = CLEARANCE_FACTOR * contour.scale();
    for &z in spectrum {
        let distance = contour.distance(z);
        if distance < threshold {
            return Err(Error::ContourClearance {
                eigenvalue: z,
                distance,
                threshold,
            });
        }
    }
    for &z in spectrum {
        if !contour.encloses(z) {
            return Err(Error::SpectrumNotEnclosed { eigenvalue: z });
        }
    }
    for z in f.singularities() {
        if contour.encloses(z) || contour.distance(z) < threshold {
            return Err(Error::InvalidContour(format!(
                "the function is singular at {z}, inside or on the contour"
            )));
        }
    }
    Ok(())
}

fn discrete_fibers(a: &ZKernel, fam: &LatticeFamily) -> Vec<BlochFiber> {
    fam.canonical_k_reps()
        .into_par_iter()
        .map(|j| {
            let k: Vec<Complex64> = a.spec().discrete_momentum(&j).into_iter().map(c).collect();
            BlochFiber::discrete(fam, j, fiber_hat(a, &k).into_entries())
        })
        .collect()
}

/// f(A) for the periodization A of `a`, with the largest node count used by
/// any fiber and the largest final doubling change.
#[derive(Clone, Debug)]
pub struct FunctionResult {
    pub kernel: PeriodicKernel,
    pub spectrum: Vec<Complex64>,
    pub nodes: usize,
    pub change: f64,
}

pub fn function_of_operator<F: AnalyticFunction + ?Sized>(a: &ZKernel, f: &F, contour: &Contour) -> Result<FunctionResult> {
    let periodized = periodize(a)?;
    let spectrum = operator_spectrum(&periodized);
    check_contour(&spectrum, f, contour)?;
    let fam = periodized.family().clone();
    let fibers = discrete_fibers(a, &fam);
    let results: Vec<Result<(BlochFiber, usize, f64)>> = fibers
        .par_iter()
        .map(|fb| {
            let q = cauchy_integral(fb.entries(), fb.k(), f, contour)?;
            Ok((fb.with_entries(q.value), q.nodes, q.change))
        })
        .collect();
    let mut out = Vec::with_capacity(results.len());
    let (mut nodes, mut change) = (0, 0.0f64);
    for r in results {
        let (fb, n, ch) = r?;
        nodes = nodes.max(n);
        change = change.max(ch);
        out.push(fb);
    }
    Ok(FunctionResult {
        kernel: reconstruct(&fam, &out)?,
        spectrum,
        nodes,
        change,
    })
}

/// Dense route: f applied to the operator matrix vol_f·A, returned as a kernel.
pub fn function_dense(a: &PeriodicKernel, f: &NamedFunction) -> Result<PeriodicKernel> {
    let fam = a.family().clone();
    let m = f.apply_dense(&a.operator_matrix())?;
    PeriodicKernel::new(fam.clone(), m / c(fam.vol_f))
}

/// Circle around the Gershgorin discs of every discrete fiber: centred at the
/// mean disc centre, radius 1.5 times the largest reach (at least 0.5).
pub fn default_contour(a: &ZKernel) -> Result<Contour> {
    let fam = LatticeFamily::new(a.spec().clone())?;
    let fibers = discrete_fibers(a, &fam);
    let mut discs = Vec::new();
    for fb in &fibers {
        let m = fb.entries();
        for i in 0..m.nrows() {
            let r: f64 = (0..m.ncols()).filter(|&j| j != i).map(|j| m[(i, j)].norm()).sum();
            discs.push((m[(i, i)], r));
        }
    }
    let center = discs.iter().map(|d| d.0).sum::<Complex64>() / discs.len() as f64;
    let reach = discs
        .iter()
        .map(|(z, r)| (z - center).norm() + r)
        .fold(0.0, f64::max);
    Contour::circle(center, (1.5 * reach).max(0.5))
}

/// Direct norm of f(A) against both right-hand sides of the contour bound.
#[derive(Clone, Debug)]
pub struct FunctionBoundReport {
    pub direct_norm: f64,
    pub c: CConstant,
    pub contour_length: f64,
    pub f_sup: f64,
    /// sup over ζ ∈ C and sampled |Im k| = m' of Σ_{ℓℓ'} |(ζ−â_k)^{−1}|.
    pub resolvent_sum_sup: f64,
    pub resolvent_max_sup: f64,
    pub bound_sum: f64,
    pub bound_max: f64,
    pub witness_zeta: Complex64,
    pub witness_k: Vec<Complex64>,
    pub samples: usize,
    pub pass: bool,
}

/// Contour nodes used to sample sup_{ζ∈C}.
const BOUND_CONTOUR_LEVEL: u32 = 2;

pub fn function_norm_bound<F: AnalyticFunction + ?Sized>(
    a: &ZKernel,
    f: &F,
    contour: &Contour,
    w: NormWeight,
    plan: &SamplingPlan,
) -> Result<FunctionBoundReport> {
    let result = function_of_operator(a, f, contour)?;
    let direct_norm = result.kernel.weighted_norm(w.m_dblprime);
    let spec = a.spec().clone();
    let zetas: Vec<Complex64> = contour.quadrature(BOUND_CONTOUR_LEVEL).into_iter().map(|(z, _)| z).collect();
    let f_sup = zetas.iter().map(|&z| f.eval(z).norm()).fold(0.0, f64::max);

    let dirs = plan.directions(spec.axes(), &[]);
    let reals = plan.real_grid(&spec);
    let ks: Vec<Vec<Complex64>> = dirs
        .iter()
        .flat_map(|d| {
            reals.iter().map(move |r| {
                r.iter()
                    .zip(d)
                    .map(|(&re, &im)| Complex64::new(re, w.m_prime * im))
                    .collect()
            })
        })
        .collect();
    let per_k: Vec<Result<(f64, f64, Complex64)>> = ks
        .par_iter()
        .map(|k| {
            let fk = a.fiber(k);
            let mut best = (0.0f64, 0.0f64, zetas[0]);
            for &z in &zetas {
                let r = resolvent_matrix(&fk, z, k)?;
                let s: f64 = r.iter().map(|x| x.norm()).sum();
                let mx = max_abs(&r);
                if s > best.0 {
                    best.0 = s;
                    best.2 = z;
                }
                best.1 = best.1.max(mx);
            }
            Ok(best)
        })
        .collect();
    let (mut sum_sup, mut max_sup) = (0.0f64, 0.0f64);
    let (mut wz, mut wk) = (zetas[0], ks[0].clone());
    for (k, r) in ks.iter().zip(per_k) {
        let (s, mx, z) = r?;
        if s > sum_sup {
            sum_sup = s;
            wz = z;
            wk = k.clone();
        }
        max_sup = max_sup.max(mx);
    }
    let cc = c_constant(w.m_prime - w.m_dblprime, &spec)?;
    let len = contour.length();
    let bound_sum = cc.value / (2.0 * PI * spec.vol_c()) * len * f_sup * sum_sup;
    let bound_max = cc.value * spec.block_size() as f64 / (2.0 * PI * spec.vol_f()) * len * f_sup * max_sup;
    let pass = direct_norm <= bound_sum * (1.0 + 1e-10) && bound_sum <= bound_max * (1.0 + 1e-12);
    Ok(FunctionBoundReport {
        direct_norm,
        c: cc,
        contour_length: len,
        f_sup,
        resolvent_sum_sup: sum_sup,
        resolvent_max_sup: max_sup,
        bound_sum,
        bound_max,
        witness_zeta: wz,
        witness_k: wk,
        samples: ks.len() * zetas.len(),
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;

    #[test]
    fn scalar_resolvents() {
        let z = BlochFiber::new(vec![c(0.0)], CMatrix::zeros(3, 3));
        let r = resolvent_fiber(&z, c(2.0)).unwrap();
        assert!(max_abs_diff(r.entries(), &(CMatrix::identity(3, 3) * c(0.5))) < 1e-15);
        let i = BlochFiber::new(vec![c(0.0)], CMatrix::identity(3, 3));
        let r = resolvent_fiber(&i, c(3.0)).unwrap();
        assert!(max_abs_diff(r.entries(), &(CMatrix::identity(3, 3) * c(0.5))) < 1e-15);
        assert!(matches!(resolvent_fiber(&i, c(1.0)), Err(Error::Singular { .. })));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [1, 4, 9] {
            let gl = gauss_legendre(n);
            for deg in 0..2 * n {
                let s: f64 = gl.iter().map(|(x, w)| w * x.powi(deg as i32)).sum();
                let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((s - want).abs() < 1e-14, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn polyline_validation() {
        let sq = vec![c(-1.0) - Complex64::i(), c(1.0) - Complex64::i(), c(1.0) + Complex64::i(), c(-1.0) + Complex64::i()];
        let p = Contour::polyline(sq.clone()).unwrap();
        assert!((p.length() - 8.0).abs() < 1e-15);
        assert!(p.encloses(c(0.3)) && !p.encloses(c(1.3)));
        let mut rev = sq.clone();
        rev.reverse();
        assert!(Contour::polyline(rev).is_err());
        let bow = vec![sq[0], sq[2], sq[1], sq[3]];
        assert!(Contour::polyline(bow).is_err());
    }

    #[test]
    fn contour_integral_of_square() {
        let m = CMatrix::identity(2, 2) * c(0.25);
        for contour in [
            Contour::circle(c(0.0), 1.0).unwrap(),
            Contour::polyline(vec![c(-1.0), c(1.0) - Complex64::i(), c(1.0) + Complex64::i()]).unwrap(),
        ] {
            let r = cauchy_integral(&m, &[], &NamedFunction::Square, &contour).unwrap();
            assert!(max_abs_diff(&r.value, &(CMatrix::identity(2, 2) * c(0.0625))) < 1e-12);
        }
    }

    #[test]
    fn schur_eigenvalues_of_triangular_and_rotation() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = c(-1.0);
        m[(1, 0)] = c(1.0);
        let mut ev = eigenvalues(&m);
        ev.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((ev[0] + Complex64::i()).norm() < 1e-14 && (ev[1] - Complex64::i()).norm() < 1e-14);
    }

    #[test]
    fn identity_function_of_identity() {
        let a = ZKernel::identity(LatticeSpec::reference());
        let contour = Contour::circle(c(1.0), 0.5).unwrap();
        let r = function_of_operator(&a, &NamedFunction::Identity, &contour).unwrap();
        let want = periodize(&a).unwrap();
        assert!(max_abs_diff(r.kernel.entries(), want.entries()) < 1e-12);
        let bad = Contour::circle(c(0.5), 0.5).unwrap();
        assert!(matches!(
            function_of_operator(&a, &NamedFunction::Identity, &bad),
            Err(Error::ContourClearance { .. })
        ));
        let outside = Contour::circle(c(3.0), 0.5).unwrap();
        assert!(matches!(
            function_of_operator(&a, &NamedFunction::Identity, &outside),
            Err(Error::SpectrumNotEnclosed { .. })
        ));
        assert!(function_of_operator(&a, &NamedFunction::Inverse, &Contour::circle(c(0.5), 0.75).unwrap()).is_err());
    }
}
