//! Weighted L¹–L∞ norms ‖a‖_m and the two-sided bounds that tie exponential
//! kernel decay to analyticity of the fibers in a strip |Im k| < m.
//!
//! Suprema over complex momenta are taken over finite samples, so every
//! right-hand side reported here is a lower estimate of the true supremum.
//! Real parts run over a uniform grid fine enough for the inverse fiber
//! quadrature to be exact, and the imaginary directions always include the
//! unit vectors of every support displacement. With those two choices the
//! decay inequalities hold for the sampled suprema as well.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{cis_frac, LatticeSpec, Shape, Window};
use crate::periodic_op::{CMatrix, PeriodicKernel};
use crate::periodization::{
    fiber_hat_cf, fiber_hat_fc, periodize, plane_wave, FiberFunction, ZKernel, ZKernelCF,
    ZKernelFC,
};
use crate::random::{self, KernelRng};

/// Decay rates 0 < m'' < m' < m.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormWeight {
    pub m: f64,
    pub m_prime: f64,
    pub m_dblprime: f64,
}

impl NormWeight {
    pub fn new(m: f64, m_prime: f64, m_dblprime: f64) -> Result<Self> {
        if !(0.0 < m_dblprime && m_dblprime < m_prime && m_prime < m) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < m'' < m' < m, got m = {m}, m' = {m_prime}, m'' = {m_dblprime}"
            )));
        }
        Ok(Self {
            m,
            m_prime,
            m_dblprime,
        })
    }
}

/// ‖a‖_m = max(sup_y vol_{X'} Σ_{y'} e^{m|y−y'|}|a(y,y')|, sup_{y'} vol_X Σ_y …).
pub trait WeightedNorm {
    fn weighted_norm(&self, m: f64) -> f64;
}

impl WeightedNorm for PeriodicKernel {
    fn weighted_norm(&self, m: f64) -> f64 {
        let fam = self.family();
        let spec = fam.spec();
        let shape = fam.shape(crate::lattice::LatticeKind::Fine);
        let sites: Vec<Vec<i64>> = shape.iter().collect();
        let n = sites.len();
        let weights: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|j| {
                // The weight depends only on u − u'.
                let d = fam.fine_torus_displacement(&sites[j], &sites[0]);
                (m * spec.fine_length(&d)).exp()
            })
            .collect();
        let e = self.entries();
        let mut rows = vec![0.0; n];
        let mut cols = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                let diff: Vec<i64> = sites[i].iter().zip(&sites[j]).map(|(a, b)| a - b).collect();
                let w = weights[shape.ravel(&diff)];
                let v = e[(i, j)].norm() * w;
                rows[i] += v;
                cols[j] += v;
            }
        }
        let sup = rows.iter().chain(&cols).copied().fold(0.0, f64::max);
        sup * fam.vol_f
    }
}

impl WeightedNorm for ZKernel {
    fn weighted_norm(&self, m: f64) -> f64 {
        let spec = self.spec();
        let block = self.block();
        let weights: Vec<f64> = self
            .window()
            .iter()
            .map(|d| (m * spec.fine_length(&d)).exp())
            .collect();
        let mut rows = vec![0.0; block.len()];
        let mut cols = vec![0.0; block.len()];
        for (bi, b) in block.iter().enumerate() {
            for (j, d) in self.window().iter().enumerate() {
                let v = self.value(bi, j).norm() * weights[j];
                rows[bi] += v;
                let target: Vec<i64> = b.iter().zip(&d).map(|(x, y)| x + y).collect();
                cols[block.ravel(&target)] += v;
            }
        }
        rows.iter().chain(&cols).copied().fold(0.0, f64::max) * spec.vol_f()
    }
}

fn mixed_sums<'a>(
    entries: impl Iterator<Item = (Vec<i64>, Vec<i64>, Complex64)> + 'a,
    block: &Shape,
    m: f64,
    distance: impl Fn(&[i64], &[i64]) -> f64,
) -> (Vec<f64>, f64) {
    let mut per_block = vec![0.0; block.len()];
    let mut total = 0.0;
    for (b, c, v) in entries {
        let w = v.norm() * (m * distance(&b, &c)).exp();
        per_block[block.ravel(&b)] += w;
        total += w;
    }
    (per_block, total)
}

impl WeightedNorm for ZKernelFC {
    fn weighted_norm(&self, m: f64) -> f64 {
        let spec = self.spec();
        let (per_block, total) =
            mixed_sums(self.entries(), self.block(), m, |b, c| self.distance(b, c));
        let rows = per_block.iter().copied().fold(0.0, f64::max) * spec.vol_c();
        rows.max(total * spec.vol_f())
    }
}

impl WeightedNorm for ZKernelCF {
    fn weighted_norm(&self, m: f64) -> f64 {
        let spec = self.spec();
        let (per_block, total) =
            mixed_sums(self.entries(), self.block(), m, |b, c| self.distance(b, c));
        let cols = per_block.iter().copied().fold(0.0, f64::max) * spec.vol_c();
        cols.max(total * spec.vol_f())
    }
}

/// C_gap = vol_f Σ_{u∈Z_fin} e^{−gap·|u|} with an upper bound on the omitted tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CConstant {
    pub value: f64,
    pub tail_bound: f64,
    pub shells: usize,
}

/// Sums sup-norm shells of the index lattice until the geometric tail bound
/// falls below 1e-15 of the accumulated value.
pub fn c_constant(m_gap: f64, spec: &LatticeSpec) -> Result<CConstant> {
    if !(m_gap > 0.0 && m_gap.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "C constant needs a positive finite decay gap, got {m_gap}"
        )));
    }
    let axes = spec.axes() as i32;
    let eps_min = (0..spec.axes()).map(|a| spec.spacing(a)).fold(f64::INFINITY, f64::min);
    let alpha = m_gap * eps_min;
    // Terms bounding shell n: 2D(2n+1)^{D−1} e^{−αn}.
    let shell_bound = |n: f64| 2.0 * axes as f64 * (2.0 * n + 1.0).powi(axes - 1) * (-alpha * n).exp();
    let mut sum = 0.0;
    let mut n: usize = 0;
    loop {
        sum += shell_sum(spec, n, m_gap);
        let next = (n + 1) as f64;
        let ratio = ((2.0 * next + 3.0) / (2.0 * next + 1.0)).powi(axes - 1) * (-alpha).exp();
        if ratio < 1.0 {
            let tail = shell_bound(next) / (1.0 - ratio);
            if tail * spec.vol_f() < 1e-15 * sum * spec.vol_f() {
                return Ok(CConstant {
                    value: sum * spec.vol_f(),
                    tail_bound: tail * spec.vol_f(),
                    shells: n + 1,
                });
            }
        }
        n += 1;
    }
}

/// Σ e^{−gap|u|} over the index shell max_a |u_a| = n, from the closed
/// positive orthant with reflection multiplicities.
fn shell_sum(spec: &LatticeSpec, n: usize, gap: f64) -> f64 {
    let axes = spec.axes();
    let mut s = 0.0;
    // Points with u_j = n for a first such axis j: u_i < n before j, u_i ≤ n after.
    for j in 0..axes {
        let mut extents = vec![n; j];
        extents.extend(vec![n + 1; axes - j - 1]);
        if extents.contains(&0) {
            continue;
        }
        for rest in Shape::new(extents).iter() {
            let mut u = rest;
            u.insert(j, n as i64);
            let mult = u.iter().filter(|&&x| x != 0).count();
            s += (1u64 << mult) as f64 * (-gap * spec.fine_length(&u)).exp();
        }
    }
    s
}

/// Complex momenta k with uniformly random real part over the dual coarse
/// torus and imaginary part strictly inside the ball of radius `m`.
pub fn sample_strip(spec: &LatticeSpec, m: f64, count: usize, rng: &mut KernelRng) -> Vec<Vec<Complex64>> {
    (0..count)
        .map(|_| {
            let dir = random::unit_vector(rng, spec.axes());
            let t = 0.5 * (random::uniform(rng) + 1.0);
            (0..spec.axes())
                .map(|a| {
                    let re = 0.5 * (random::uniform(rng) + 1.0) * spec.dual_coarse_period(a);
                    Complex64::new(re, t * m * dir[a])
                })
                .collect()
        })
        .collect()
}

/// Where a fiber entry attained the reported extreme.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberWitness {
    pub k: Vec<Complex64>,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct SupBoundReport {
    pub norm: f64,
    pub max_entry: f64,
    pub max_ratio: f64,
    pub witness: FiberWitness,
    pub samples: usize,
    pub pass: bool,
}

/// Checks |â_k(ℓ,ℓ')| ≤ ‖a‖_m at each sampled k.
pub fn fiber_sup_bound_check(a: &ZKernel, m: f64, ks: &[Vec<Complex64>]) -> SupBoundReport {
    let norm = a.weighted_norm(m);
    let maxima: Vec<(f64, usize, usize)> = ks
        .par_iter()
        .map(|k| entry_max(&a.fiber(k)))
        .collect();
    let mut best = (0.0, 0usize, 0usize, 0usize);
    for (i, &(v, r, c)) in maxima.iter().enumerate() {
        if i == 0 || v > best.0 {
            best = (v, r, c, i);
        }
    }
    let witness = FiberWitness {
        k: ks.get(best.3).cloned().unwrap_or_default(),
        row: best.1,
        col: best.2,
        value: best.0,
    };
    let max_ratio = if norm > 0.0 { best.0 / norm } else { 0.0 };
    SupBoundReport {
        norm,
        max_entry: best.0,
        max_ratio,
        witness,
        samples: ks.len(),
        pass: best.0 <= norm * (1.0 + 1e-12),
    }
}

fn entry_max(m: &CMatrix) -> (f64, usize, usize) {
    let mut best = (0.0, 0, 0);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)].norm();
            if v > best.0 {
                best = (v, i, j);
            }
        }
    }
    best
}

/// Imaginary directions and real-part grid over which sup_{|Im k| = m'} is sampled.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingPlan {
    /// Uniform real-part nodes per axis.
    pub grid: Vec<usize>,
    /// Random unit directions on top of the coordinate axes and support directions.
    pub random_directions: usize,
    pub seed: u64,
}

impl SamplingPlan {
    /// Grid fine enough for exact inverse fiber quadrature of a kernel whose
    /// coarse-displacement spread is at most `spread` coarse steps.
    pub fn for_spread(spec: &LatticeSpec, spread: usize, random_directions: usize, seed: u64) -> Self {
        Self {
            grid: vec![2 * spread + 1; spec.axes()],
            random_directions,
            seed,
        }
    }

    /// Coordinate axes ±, seeded random unit vectors and the given extra
    /// directions with their negatives, duplicates removed.
    pub fn directions(&self, axes: usize, extra: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        let mut push = |v: Vec<f64>| {
            let dup = out
                .iter()
                .any(|w| w.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-15));
            if !dup {
                out.push(v);
            }
        };
        for a in 0..axes {
            for s in [1.0, -1.0] {
                let mut v = vec![0.0; axes];
                v[a] = s;
                push(v);
            }
        }
        let mut rng = random::seeded(self.seed);
        for _ in 0..self.random_directions {
            push(random::unit_vector(&mut rng, axes));
        }
        for e in extra {
            push(e.clone());
            push(e.iter().map(|x| -x).collect());
        }
        out
    }

    /// Real-part grid points of the dual coarse torus.
    pub fn real_grid(&self, spec: &LatticeSpec) -> Vec<Vec<f64>> {
        let grid = Shape::new(self.grid.clone());
        grid.iter()
            .map(|j| {
                j.iter()
                    .enumerate()
                    .map(|(a, &ja)| ja as f64 * spec.dual_coarse_period(a) / self.grid[a] as f64)
                    .collect()
            })
            .collect()
    }
}

fn unit(x: &[f64]) -> Option<Vec<f64>> {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    (n > 0.0).then(|| x.iter().map(|v| v / n).collect())
}

/// Sup over sampled k with |Im k| = m' of (Σ |f|, max |f|) for fiber
/// matrices or vectors, with the witness momenta.
#[derive(Clone, Debug)]
pub struct StripSup {
    pub sum: f64,
    pub sum_k: Vec<Complex64>,
    pub max: f64,
    pub max_k: Vec<Complex64>,
    pub samples: usize,
}

fn strip_sup(
    spec: &LatticeSpec,
    plan: &SamplingPlan,
    m_prime: f64,
    extra_dirs: &[Vec<f64>],
    eval: impl Fn(&[Complex64]) -> Vec<Complex64> + Sync,
) -> StripSup {
    let dirs = plan.directions(spec.axes(), extra_dirs);
    let reals = plan.real_grid(spec);
    let points: Vec<Vec<Complex64>> = dirs
        .iter()
        .flat_map(|d| {
            reals.iter().map(move |r| {
                r.iter()
                    .zip(d)
                    .map(|(&re, &im)| Complex64::new(re, m_prime * im))
                    .collect()
            })
        })
        .collect();
    let stats: Vec<(f64, f64)> = points
        .par_iter()
        .map(|k| {
            let v = eval(k);
            let sum = v.iter().map(|z| z.norm()).sum();
            let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            (sum, max)
        })
        .collect();
    let mut out = StripSup {
        sum: 0.0,
        sum_k: Vec::new(),
        max: 0.0,
        max_k: Vec::new(),
        samples: points.len(),
    };
    for (k, &(s, m)) in points.iter().zip(&stats) {
        if out.sum_k.is_empty() || s > out.sum {
            out.sum = s;
            out.sum_k = k.clone();
        }
        if out.max_k.is_empty() || m > out.max {
            out.max = m;
            out.max_k = k.clone();
        }
    }
    out
}

/// Decay of a kernel against the fiber supremum on |Im k| = m'.
#[derive(Clone, Debug)]
pub struct DecayReport {
    /// sup |a(y,y')| e^{m'|y−y'|}.
    pub decay: f64,
    /// Block representative and displacement (or coarse offset) of the decay supremum.
    pub decay_witness: (Vec<i64>, Vec<i64>),
    /// (1/vol_c) sup Σ |fiber entries|.
    pub sum_bound: f64,
    /// |B|/vol_f sup max |fiber entries| (1/vol_f for mixed kernels).
    pub max_bound: f64,
    pub strip: StripSup,
    /// Norm chain at m'', present for fine → fine kernels.
    pub chain: Option<NormChain>,
    pub pass: bool,
}

/// ‖A‖_{m''} ≤ ‖a‖_{m''} ≤ C/vol_c·sup Σ ≤ C|B|/vol_f·sup max.
#[derive(Clone, Debug)]
pub struct NormChain {
    pub periodized_norm: Option<f64>,
    pub kernel_norm: f64,
    pub c: CConstant,
    pub sum_bound: f64,
    pub max_bound: f64,
    pub pass: bool,
}

const DECAY_SLACK: f64 = 1e-10;

fn le(a: f64, b: f64) -> bool {
    a <= b * (1.0 + DECAY_SLACK) + 1e-300
}

/// Lemma-style decay bound for a fine → fine kernel with its norm chain at m''.
pub fn decay_bound_from_fibers(a: &ZKernel, w: NormWeight, plan: &SamplingPlan) -> Result<DecayReport> {
    let spec = a.spec().clone();
    let mut decay = 0.0;
    let mut witness = (vec![0; spec.axes()], vec![0; spec.axes()]);
    for (b, d, v) in a.entries() {
        let x = v.norm() * (w.m_prime * spec.fine_length(&d)).exp();
        if x > decay {
            decay = x;
            witness = (b, d);
        }
    }
    let extra: Vec<Vec<f64>> = a
        .support_offsets()
        .iter()
        .filter_map(|d| unit(&spec.fine_position(d)))
        .collect();
    let strip = strip_sup(&spec, plan, w.m_prime, &extra, |k| a.fiber(k).iter().copied().collect());
    let nb = spec.block_size() as f64;
    let sum_bound = strip.sum / spec.vol_c();
    let max_bound = nb * strip.max / spec.vol_f();

    let c = c_constant(w.m_prime - w.m_dblprime, &spec)?;
    let periodized_norm = periodize(a).ok().map(|p| p.weighted_norm(w.m_dblprime));
    let kernel_norm = a.weighted_norm(w.m_dblprime);
    let chain_sum = c.value * sum_bound;
    let chain_max = c.value * max_bound;
    let chain_pass = periodized_norm.is_none_or(|p| le(p, kernel_norm))
        && le(kernel_norm, chain_sum)
        && le(chain_sum, chain_max);
    let chain = NormChain {
        periodized_norm,
        kernel_norm,
        c,
        sum_bound: chain_sum,
        max_bound: chain_max,
        pass: chain_pass,
    };
    let pass = le(decay, sum_bound) && le(sum_bound, max_bound) && chain_pass;
    Ok(DecayReport {
        decay,
        decay_witness: witness,
        sum_bound,
        max_bound,
        strip,
        chain: Some(chain),
        pass,
    })
}

fn mixed_decay(
    spec: &LatticeSpec,
    entries: impl Iterator<Item = (Vec<i64>, Vec<i64>, Complex64)>,
    distance: impl Fn(&[i64], &[i64]) -> Vec<f64>,
    m_prime: f64,
    plan: &SamplingPlan,
    eval: impl Fn(&[Complex64]) -> Vec<Complex64> + Sync,
) -> DecayReport {
    let mut decay = 0.0;
    let mut witness = (vec![0; spec.axes()], vec![0; spec.axes()]);
    let mut extra = Vec::new();
    for (b, c, v) in entries {
        let x = distance(&b, &c);
        let len = x.iter().map(|t| t * t).sum::<f64>().sqrt();
        if v.norm() > 0.0 {
            if let Some(e) = unit(&x) {
                extra.push(e);
            }
        }
        let val = v.norm() * (m_prime * len).exp();
        if val > decay {
            decay = val;
            witness = (b, c);
        }
    }
    let strip = strip_sup(spec, plan, m_prime, &extra, eval);
    let sum_bound = strip.sum / spec.vol_c();
    let max_bound = strip.max / spec.vol_f();
    let pass = le(decay, sum_bound) && le(sum_bound, max_bound);
    DecayReport {
        decay,
        decay_witness: witness,
        sum_bound,
        max_bound,
        strip,
        chain: None,
        pass,
    }
}

fn coarse_minus_fine(spec: &LatticeSpec, b: &[i64], c: &[i64]) -> Vec<f64> {
    let steps: Vec<i64> = c
        .iter()
        .zip(b)
        .enumerate()
        .map(|(a, (&ci, &bi))| ci * spec.period(a) as i64 - bi)
        .collect();
    spec.fine_position(&steps)
}

/// Decay of b(u,x) e^{m'|u−x|} against sup Σ_ℓ |b̂_k(ℓ)|.
pub fn decay_bound_fc(b: &ZKernelFC, m_prime: f64, plan: &SamplingPlan) -> DecayReport {
    let spec = b.spec().clone();
    mixed_decay(
        &spec,
        b.entries(),
        |bb, c| coarse_minus_fine(&spec, bb, c).iter().map(|x| -x).collect(),
        m_prime,
        plan,
        |k| fiber_hat_fc(b, k),
    )
}

/// Decay of c(x,u) e^{m'|x−u|} against sup Σ_ℓ' |ĉ_k(ℓ')|.
pub fn decay_bound_cf(c: &ZKernelCF, m_prime: f64, plan: &SamplingPlan) -> DecayReport {
    let spec = c.spec().clone();
    mixed_decay(
        &spec,
        c.entries(),
        |bb, cc| coarse_minus_fine(&spec, bb, cc),
        m_prime,
        plan,
        |k| fiber_hat_cf(c, k),
    )
}

/// Σ_{ℓ,ℓ'} ∫ â_{k+iq}(ℓ,ℓ') e^{ik·(u−u')} e^{iℓ·u} e^{−iℓ'·u'} dk/(2π)^{1+d}
/// with q = m'(u−u')/|u−u'|, the integral taken on the uniform grid `nodes`.
/// For a grid that integrates the fiber function exactly this equals
/// a(u,u') e^{m'|u−u'|}.
pub fn stokes_shift_value(a: &ZKernel, u: &[i64], u2: &[i64], m_prime: f64, nodes: &[usize]) -> Complex64 {
    let spec = a.spec();
    let d: Vec<i64> = u.iter().zip(u2).map(|(x, y)| x - y).collect();
    let x = spec.fine_position(&d);
    let q: Vec<f64> = unit(&x).map_or(vec![0.0; x.len()], |e| e.iter().map(|v| v * m_prime).collect());
    let block = Shape::new(spec.periods());
    let left: Vec<Complex64> = block
        .iter()
        .map(|m| {
            m.iter()
                .zip(u)
                .enumerate()
                .map(|(ax, (&mi, &ui))| cis_frac(mi * ui, spec.period(ax)))
                .product()
        })
        .collect();
    let right: Vec<Complex64> = block
        .iter()
        .map(|m| {
            m.iter()
                .zip(u2)
                .enumerate()
                .map(|(ax, (&mi, &ui))| cis_frac(-mi * ui, spec.period(ax)))
                .product()
        })
        .collect();
    let grid = Shape::new(nodes.to_vec());
    let terms: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|gi| {
            let j = grid.unravel(gi);
            let kr: Vec<Complex64> = j
                .iter()
                .enumerate()
                .map(|(ax, &ja)| Complex64::new(ja as f64 * spec.dual_coarse_period(ax) / nodes[ax] as f64, 0.0))
                .collect();
            let shifted: Vec<Complex64> = kr.iter().zip(&q).map(|(k, qi)| k + Complex64::new(0.0, *qi)).collect();
            let f = a.fiber(&shifted);
            let mut s = Complex64::new(0.0, 0.0);
            for (i, l) in left.iter().enumerate() {
                for (jj, r) in right.iter().enumerate() {
                    s += l * f[(i, jj)] * r;
                }
            }
            s * plane_wave(&kr, &x)
        })
        .collect();
    terms.iter().sum::<Complex64>() / (spec.vol_c() * grid.len() as f64)
}

/// Window of offsets, for callers that sweep (u, u') pairs.
pub fn offsets(radius: usize, axes: usize) -> Vec<Vec<i64>> {
    Window::new(radius, axes).iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeFamily;

    #[test]
    fn identity_norm_is_one() {
        let spec = LatticeSpec::reference();
        let a = ZKernel::identity(spec.clone());
        for m in [0.0, 0.5, 3.0] {
            assert!((a.weighted_norm(m) - 1.0).abs() < 1e-15);
        }
        let fam = LatticeFamily::new(spec).unwrap();
        assert!((PeriodicKernel::identity(fam).weighted_norm(2.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn shift_norm_closed_form() {
        let spec = LatticeSpec::new(1.0, 2.0, 3, 3, 9, 9, 1).unwrap();
        let a = ZKernel::shift(spec, &[1, -1]);
        let want = (0.7 * 5f64.sqrt()).exp();
        assert!((a.weighted_norm(0.7) - want).abs() < 1e-12 * want);
    }

    #[test]
    fn c_constant_large_gap() {
        let spec = LatticeSpec::new(1.0, 1.0, 1, 1, 4, 4, 0).unwrap();
        let c = c_constant(20.0, &spec).unwrap();
        assert!((c.value - (1.0 + 2.0 * (-20f64).exp())).abs() < 1e-15);
        assert!(c_constant(0.0, &spec).is_err());
    }

    #[test]
    fn c_constant_matches_brute_force() {
        let spec = LatticeSpec::new(0.5, 1.5, 1, 1, 4, 4, 1).unwrap();
        let gap = 0.8;
        let c = c_constant(gap, &spec).unwrap();
        let mut brute = 0.0;
        for u in Window::new(200, 2).iter() {
            brute += (-gap * spec.fine_length(&u)).exp();
        }
        brute *= spec.vol_f();
        assert!((c.value - brute).abs() < 1e-12 * brute);
        assert!(c.tail_bound < 1e-15 * c.value);
    }

    #[test]
    fn identity_fiber_ratio_is_one() {
        let spec = LatticeSpec::reference();
        let a = ZKernel::identity(spec.clone());
        let mut rng = random::seeded(3);
        let ks = sample_strip(&spec, 1.0, 10, &mut rng);
        let r = fiber_sup_bound_check(&a, 1.0, &ks);
        assert!((r.max_ratio - 1.0).abs() < 1e-14 && r.pass);
    }

    #[test]
    fn mixed_norms_by_hand() {
        let spec = LatticeSpec::reference();
        let b = ZKernelFC::from_fn(spec.clone(), 0, |b, _| {
            if b == [0, 0] { Complex64::new(2.0, 0.0) } else { Complex64::new(0.0, 0.0) }
        });
        // One entry per coarse site: rows vol_c·2, columns vol_f·2.
        assert!((b.weighted_norm(0.0) - 18.0).abs() < 1e-14);
        assert!((b.transpose().weighted_norm(0.0) - 18.0).abs() < 1e-14);
    }
}
