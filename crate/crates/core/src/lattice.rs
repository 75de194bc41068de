//! Lattice geometry: the fine torus, its coarse sublattice, the single-period
//! block, the three dual lattices, and the index arithmetic shared by every
//! other module.
//!
//! Sites are integer multi-indices with axis 0 the time direction followed by
//! `dim` spatial axes. Physical coordinates are derived on demand by scaling
//! with the per-axis spacing of the lattice in question, so modular reduction
//! never touches floating point.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// exp(2πi·num/den), with `num` reduced before the trig call.
pub fn cis_frac(num: i64, den: usize) -> Complex64 {
    let den_i = den as i64;
    let r = num.rem_euclid(den_i);
    if r == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let theta = 2.0 * PI * (r as f64) / (den as f64);
    Complex64::new(theta.cos(), theta.sin())
}

/// Parameters of a lattice family.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSpec {
    eps_t: f64,
    eps_x: f64,
    l_t: usize,
    l_x: usize,
    big_l_t: usize,
    big_l_x: usize,
    dim: usize,
}

impl LatticeSpec {
    /// `dim` is the number of spatial axes; zero gives a pure time lattice.
    pub fn new(
        eps_t: f64,
        eps_x: f64,
        l_t: usize,
        l_x: usize,
        big_l_t: usize,
        big_l_x: usize,
        dim: usize,
    ) -> Result<Self> {
        let spec = Self {
            eps_t,
            eps_x,
            l_t,
            l_x,
            big_l_t,
            big_l_x,
            dim,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// ε_T = ε_X = 1, L_T = L_X = 3, torus 9 × 9, one spatial axis.
    pub fn reference() -> Self {
        Self::new(1.0, 1.0, 3, 3, 9, 9, 1).expect("reference lattice is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_t.is_finite() && self.eps_t > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "eps_t must be positive, got {}",
                self.eps_t
            )));
        }
        if !(self.eps_x.is_finite() && self.eps_x > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "eps_x must be positive, got {}",
                self.eps_x
            )));
        }
        for (name, v) in [
            ("l_t", self.l_t),
            ("l_x", self.l_x),
            ("big_l_t", self.big_l_t),
            ("big_l_x", self.big_l_x),
        ] {
            if v == 0 {
                return Err(Error::InvalidSpec(format!("{name} must be positive")));
            }
        }
        if !self.big_l_t.is_multiple_of(self.l_t) {
            return Err(Error::Divisibility {
                period_name: "L_T",
                period: self.l_t,
                extent_name: "torus extent T",
                extent: self.big_l_t,
            });
        }
        if !self.big_l_x.is_multiple_of(self.l_x) {
            return Err(Error::Divisibility {
                period_name: "L_X",
                period: self.l_x,
                extent_name: "torus extent X",
                extent: self.big_l_x,
            });
        }
        Ok(())
    }

    pub fn eps_t(&self) -> f64 {
        self.eps_t
    }
    pub fn eps_x(&self) -> f64 {
        self.eps_x
    }
    pub fn l_t(&self) -> usize {
        self.l_t
    }
    pub fn l_x(&self) -> usize {
        self.l_x
    }
    pub fn big_l_t(&self) -> usize {
        self.big_l_t
    }
    pub fn big_l_x(&self) -> usize {
        self.big_l_x
    }
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of axes, 1 + dim.
    pub fn axes(&self) -> usize {
        1 + self.dim
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        if axis == 0 {
            self.eps_t
        } else {
            self.eps_x
        }
    }

    /// Period ratio L on `axis`.
    pub fn period(&self, axis: usize) -> usize {
        if axis == 0 {
            self.l_t
        } else {
            self.l_x
        }
    }

    /// Torus extent 𝓛 on `axis`, in fine lattice steps.
    pub fn extent(&self, axis: usize) -> usize {
        if axis == 0 {
            self.big_l_t
        } else {
            self.big_l_x
        }
    }

    pub fn periods(&self) -> Vec<usize> {
        (0..self.axes()).map(|a| self.period(a)).collect()
    }

    pub fn extents(&self) -> Vec<usize> {
        (0..self.axes()).map(|a| self.extent(a)).collect()
    }

    /// ε_T ε_X^dim.
    pub fn vol_f(&self) -> f64 {
        self.eps_t * self.eps_x.powi(self.dim as i32)
    }

    /// (ε_T L_T)(ε_X L_X)^dim.
    pub fn vol_c(&self) -> f64 {
        (self.eps_t * self.l_t as f64) * (self.eps_x * self.l_x as f64).powi(self.dim as i32)
    }

    /// |B| = L_T L_X^dim.
    pub fn block_size(&self) -> usize {
        self.l_t * self.l_x.pow(self.dim as u32)
    }

    /// Same integers, spacings replaced.
    pub fn with_spacings(&self, eps_t: f64, eps_x: f64) -> Result<Self> {
        Self::new(
            eps_t,
            eps_x,
            self.l_t,
            self.l_x,
            self.big_l_t,
            self.big_l_x,
            self.dim,
        )
    }

    /// Euclidean length of a fine-lattice displacement given in lattice steps.
    pub fn fine_length(&self, steps: &[i64]) -> f64 {
        steps
            .iter()
            .enumerate()
            .map(|(a, &s)| {
                let x = s as f64 * self.spacing(a);
                x * x
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Physical coordinates of a fine-lattice index vector.
    pub fn fine_position(&self, steps: &[i64]) -> Vec<f64> {
        steps
            .iter()
            .enumerate()
            .map(|(a, &s)| s as f64 * self.spacing(a))
            .collect()
    }

    /// Physical period of the continuous dual torus of the coarse lattice on `axis`.
    pub fn dual_coarse_period(&self, axis: usize) -> f64 {
        2.0 * PI / (self.spacing(axis) * self.period(axis) as f64)
    }

    /// Physical momentum of the dual-block point with index `m`.
    pub fn dual_block_momentum(&self, m: &[i64]) -> Vec<f64> {
        m.iter()
            .enumerate()
            .map(|(a, &mi)| mi as f64 * self.dual_coarse_period(a))
            .collect()
    }

    /// Physical momentum of a point of the universal cover of the finite dual
    /// coarse torus, given in units of 2π/(ε𝓛).
    pub fn discrete_momentum(&self, j: &[i64]) -> Vec<f64> {
        j.iter()
            .enumerate()
            .map(|(a, &ji)| 2.0 * PI * ji as f64 / (self.spacing(a) * self.extent(a) as f64))
            .collect()
    }
}

/// Which of the six lattices a site or vector lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LatticeKind {
    Fine,
    Coarse,
    Block,
    DualFine,
    DualCoarse,
    DualBlock,
}

impl LatticeKind {
    pub fn is_dual(self) -> bool {
        matches!(
            self,
            LatticeKind::DualFine | LatticeKind::DualCoarse | LatticeKind::DualBlock
        )
    }

    pub fn dual(self) -> LatticeKind {
        match self {
            LatticeKind::Fine => LatticeKind::DualFine,
            LatticeKind::Coarse => LatticeKind::DualCoarse,
            LatticeKind::Block => LatticeKind::DualBlock,
            LatticeKind::DualFine => LatticeKind::Fine,
            LatticeKind::DualCoarse => LatticeKind::Coarse,
            LatticeKind::DualBlock => LatticeKind::Block,
        }
    }
}

/// Row-major multi-index layout of a finite torus; axis 0 varies slowest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shape {
    extents: Vec<usize>,
    len: usize,
}

impl Shape {
    pub fn new(extents: Vec<usize>) -> Self {
        let len = extents.iter().product();
        Self { extents, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn axes(&self) -> usize {
        self.extents.len()
    }

    /// Flat index of `coords`, each reduced modulo its extent.
    pub fn ravel(&self, coords: &[i64]) -> usize {
        debug_assert_eq!(coords.len(), self.extents.len());
        coords
            .iter()
            .zip(&self.extents)
            .fold(0usize, |acc, (&c, &e)| {
                acc * e + c.rem_euclid(e as i64) as usize
            })
    }

    pub fn unravel(&self, mut flat: usize) -> Vec<i64> {
        let mut out = vec![0i64; self.extents.len()];
        for (slot, &e) in out.iter_mut().zip(&self.extents).rev() {
            *slot = (flat % e) as i64;
            flat /= e;
        }
        out
    }

    pub fn reduce(&self, coords: &[i64]) -> Vec<i64> {
        coords
            .iter()
            .zip(&self.extents)
            .map(|(&c, &e)| c.rem_euclid(e as i64))
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len).map(move |i| self.unravel(i))
    }
}

/// The cube [−R, R]^axes of displacements, flattened row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    radius: usize,
    axes: usize,
    side: usize,
    len: usize,
}

impl Window {
    pub fn new(radius: usize, axes: usize) -> Self {
        let side = 2 * radius + 1;
        Self {
            radius,
            axes,
            side,
            len: side.pow(axes as u32),
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn axes(&self) -> usize {
        self.axes
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, offset: &[i64]) -> bool {
        let r = self.radius as i64;
        offset.iter().all(|&o| -r <= o && o <= r)
    }

    /// Flat index of `offset`, or `None` outside the window.
    pub fn index(&self, offset: &[i64]) -> Option<usize> {
        if !self.contains(offset) {
            return None;
        }
        let r = self.radius as i64;
        Some(
            offset
                .iter()
                .fold(0usize, |acc, &o| acc * self.side + (o + r) as usize),
        )
    }

    pub fn offset(&self, mut flat: usize) -> Vec<i64> {
        let r = self.radius as i64;
        let mut out = vec![0i64; self.axes];
        for slot in out.iter_mut().rev() {
            *slot = (flat % self.side) as i64 - r;
            flat /= self.side;
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len).map(move |i| self.offset(i))
    }
}

/// A point of one of the six lattices, stored in canonical reduced form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Site {
    coords: Vec<i64>,
    kind: LatticeKind,
}

pub type DualMomentum = Site;

impl Site {
    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }
}

/// Complex values indexed by the sites of one direct lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldVector {
    kind: LatticeKind,
    values: Vec<Complex64>,
}

impl FieldVector {
    pub fn new(family: &LatticeFamily, kind: LatticeKind, values: Vec<Complex64>) -> Result<Self> {
        if kind.is_dual() {
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

    pub fn zeros(family: &LatticeFamily, kind: LatticeKind) -> Self {
        let n = family.shape(kind).len();
        Self {
            kind,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_fn(
        family: &LatticeFamily,
        kind: LatticeKind,
        mut f: impl FnMut(&[i64]) -> Complex64,
    ) -> Self {
        let shape = family.shape(kind);
        let values = shape.iter().map(|c| f(&c)).collect();
        Self { kind, values }
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub(crate) fn from_parts(kind: LatticeKind, values: Vec<Complex64>) -> Self {
        Self { kind, values }
    }

    pub fn max_abs_diff(&self, other: &FieldVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// All six lattices of one spec with their cell volumes and point counts.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeFamily {
    spec: LatticeSpec,
    pub vol_f: f64,
    pub vol_c: f64,
    pub hvol_f: f64,
    pub hvol_c: f64,
    pub hvol_b: f64,
    pub n_fine: usize,
    pub n_coarse: usize,
    pub n_block: usize,
    fine: Shape,
    coarse: Shape,
    block: Shape,
}

/// Computes volumes and counts for every lattice of `spec`.
pub fn build_family(spec: LatticeSpec) -> Result<LatticeFamily> {
    spec.validate()?;
    let axes = spec.axes();
    let two_pi_d = (2.0 * PI).powi(axes as i32);
    let torus_volume: f64 = (0..axes)
        .map(|a| spec.spacing(a) * spec.extent(a) as f64)
        .product();
    let fine = Shape::new(spec.extents());
    let coarse = Shape::new(
        (0..axes)
            .map(|a| spec.extent(a) / spec.period(a))
            .collect(),
    );
    let block = Shape::new(spec.periods());
    Ok(LatticeFamily {
        vol_f: spec.vol_f(),
        vol_c: spec.vol_c(),
        hvol_f: two_pi_d / torus_volume,
        hvol_c: two_pi_d / torus_volume,
        hvol_b: two_pi_d / spec.vol_c(),
        n_fine: fine.len(),
        n_coarse: coarse.len(),
        n_block: block.len(),
        fine,
        coarse,
        block,
        spec,
    })
}

impl LatticeFamily {
    pub fn new(spec: LatticeSpec) -> Result<Self> {
        build_family(spec)
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn axes(&self) -> usize {
        self.spec.axes()
    }

    pub fn shape(&self, kind: LatticeKind) -> &Shape {
        match kind {
            LatticeKind::Fine | LatticeKind::DualFine => &self.fine,
            LatticeKind::Coarse | LatticeKind::DualCoarse => &self.coarse,
            LatticeKind::Block | LatticeKind::DualBlock => &self.block,
        }
    }

    /// Volume prefactor of the forward transform on a direct lattice.
    pub fn cell_volume(&self, kind: LatticeKind) -> f64 {
        match kind {
            LatticeKind::Fine | LatticeKind::Block => self.vol_f,
            LatticeKind::Coarse => self.vol_c,
            LatticeKind::DualFine => self.hvol_f,
            LatticeKind::DualCoarse => self.hvol_c,
            LatticeKind::DualBlock => self.hvol_b,
        }
    }

    pub fn site(&self, kind: LatticeKind, coords: &[i64]) -> Result<Site> {
        let shape = self.shape(kind);
        if coords.len() != shape.axes() {
            return Err(Error::DimensionMismatch {
                expected: shape.axes(),
                found: coords.len(),
            });
        }
        Ok(Site {
            coords: shape.reduce(coords),
            kind,
        })
    }

    /// Physical spacing of `kind` along `axis`.
    pub fn spacing(&self, kind: LatticeKind, axis: usize) -> f64 {
        let eps = self.spec.spacing(axis);
        let l = self.spec.period(axis) as f64;
        let n = self.spec.extent(axis) as f64;
        match kind {
            LatticeKind::Fine | LatticeKind::Block => eps,
            LatticeKind::Coarse => eps * l,
            LatticeKind::DualFine | LatticeKind::DualCoarse => 2.0 * PI / (eps * n),
            LatticeKind::DualBlock => 2.0 * PI / (eps * l),
        }
    }

    pub fn physical(&self, site: &Site) -> Vec<f64> {
        site.coords
            .iter()
            .enumerate()
            .map(|(a, &c)| c as f64 * self.spacing(site.kind, a))
            .collect()
    }

    /// The canonical projection of the dual fine lattice onto the dual coarse
    /// lattice; its kernel is the dual block.
    pub fn project_dual(&self, p: &DualMomentum) -> Result<DualMomentum> {
        if p.kind != LatticeKind::DualFine {
            return Err(Error::LatticeMismatch {
                expected: LatticeKind::DualFine,
                found: p.kind,
            });
        }
        self.site(LatticeKind::DualCoarse, &p.coords)
    }

    /// Dual-fine index of the dual-block point `m`.
    pub fn dual_block_to_fine(&self, m: &[i64]) -> Vec<i64> {
        m.iter()
            .enumerate()
            .map(|(a, &mi)| mi * (self.spec.extent(a) / self.spec.period(a)) as i64)
            .collect()
    }

    /// Direct-lattice coordinates in fine steps.
    fn fine_steps(&self, site: &Site) -> Vec<i64> {
        match site.kind {
            LatticeKind::Coarse => site
                .coords
                .iter()
                .enumerate()
                .map(|(a, &c)| c * self.spec.period(a) as i64)
                .collect(),
            _ => site.coords.clone(),
        }
    }

    /// Dual coordinates in units of 2π/(ε𝓛).
    fn dual_steps(&self, site: &Site) -> Vec<i64> {
        match site.kind {
            LatticeKind::DualBlock => self.dual_block_to_fine(&site.coords),
            _ => site.coords.clone(),
        }
    }

    /// exp(i p·u) for a dual point `p` and a direct point `u`, from exact
    /// integer arithmetic.
    pub fn phase(&self, p: &DualMomentum, u: &Site) -> Result<Complex64> {
        if !p.kind.is_dual() {
            return Err(Error::LatticeMismatch {
                expected: p.kind.dual(),
                found: p.kind,
            });
        }
        if u.kind.is_dual() {
            return Err(Error::LatticeMismatch {
                expected: u.kind.dual(),
                found: u.kind,
            });
        }
        let j = self.dual_steps(p);
        let n = self.fine_steps(u);
        Ok(j.iter()
            .zip(&n)
            .enumerate()
            .map(|(a, (&ji, &ni))| {
                let e = self.spec.extent(a) as i64;
                cis_frac((ji.rem_euclid(e) * ni.rem_euclid(e)) % e, e as usize)
            })
            .product())
    }

    /// Geodesic Euclidean distance on the torus carrying `y` and `y2`, in
    /// physical units.
    pub fn torus_distance(&self, y: &Site, y2: &Site) -> Result<f64> {
        if y.kind != y2.kind {
            return Err(Error::LatticeMismatch {
                expected: y.kind,
                found: y2.kind,
            });
        }
        if y.kind.is_dual() {
            return Err(Error::LatticeMismatch {
                expected: y.kind.dual(),
                found: y.kind,
            });
        }
        let shape = self.shape(y.kind);
        let d2: f64 = (0..shape.axes())
            .map(|a| {
                let e = shape.extents()[a] as i64;
                let diff = (y.coords[a] - y2.coords[a]).rem_euclid(e);
                let steps = diff.min(e - diff) as f64 * self.spacing(y.kind, a);
                steps * steps
            })
            .sum();
        Ok(d2.sqrt())
    }

    /// Minimal-image displacement between two fine torus indices, in steps.
    pub fn fine_torus_displacement(&self, u: &[i64], u2: &[i64]) -> Vec<i64> {
        u.iter()
            .zip(u2)
            .enumerate()
            .map(|(a, (&x, &y))| {
                let e = self.spec.extent(a) as i64;
                let d = (x - y).rem_euclid(e);
                if d > e / 2 {
                    d - e
                } else {
                    d
                }
            })
            .collect()
    }

    /// Canonical representatives of the finite dual coarse torus, in units of
    /// 2π/(ε𝓛).
    pub fn canonical_k_reps(&self) -> Vec<Vec<i64>> {
        self.coarse.iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_family_counts() {
        let fam = build_family(LatticeSpec::reference()).unwrap();
        assert_eq!(fam.vol_f, 1.0);
        assert_eq!(fam.vol_c, 9.0);
        assert_eq!(fam.n_fine, 81);
        assert_eq!(fam.n_coarse, 9);
        assert_eq!(fam.n_block, 9);
        let two_pi_sq = (2.0 * PI).powi(2);
        let lhs = fam.vol_f * fam.hvol_f / two_pi_sq;
        assert!((lhs - 1.0 / 81.0).abs() <= 1e-14 / 81.0);
    }

    #[test]
    fn divisibility_is_enforced() {
        let err = LatticeSpec::new(1.0, 1.0, 3, 3, 8, 9, 1).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("L_T = 3") && msg.contains("8"), "{msg}");
        let err = LatticeSpec::new(1.0, 1.0, 3, 2, 9, 9, 1).unwrap_err();
        assert!(err.to_string().contains("L_X = 2"));
    }

    #[test]
    fn nonpositive_parameters_rejected() {
        assert!(LatticeSpec::new(0.0, 1.0, 3, 3, 9, 9, 1).is_err());
        assert!(LatticeSpec::new(1.0, -1.0, 3, 3, 9, 9, 1).is_err());
        assert!(LatticeSpec::new(1.0, 1.0, 0, 3, 9, 9, 1).is_err());
    }

    #[test]
    fn projection_kills_the_dual_block() {
        let fam = build_family(LatticeSpec::reference()).unwrap();
        let origin = fam.site(LatticeKind::DualFine, &[0, 0]).unwrap();
        let k = fam.project_dual(&origin).unwrap();
        assert_eq!(k.coords(), &[0, 0]);
        for m in fam.shape(LatticeKind::DualBlock).iter() {
            let p = fam
                .site(LatticeKind::DualFine, &fam.dual_block_to_fine(&m))
                .unwrap();
            assert_eq!(fam.project_dual(&p).unwrap().coords(), &[0, 0]);
        }
        let wrong = fam.site(LatticeKind::DualCoarse, &[1, 1]).unwrap();
        assert!(fam.project_dual(&wrong).is_err());
    }

    #[test]
    fn wraparound_distance() {
        let spec = LatticeSpec::new(1.0, 1.0, 3, 3, 9, 9, 0).unwrap();
        let fam = build_family(spec).unwrap();
        let a = fam.site(LatticeKind::Fine, &[1]).unwrap();
        let b = fam.site(LatticeKind::Fine, &[8]).unwrap();
        assert_eq!(fam.torus_distance(&a, &b).unwrap(), 2.0);
        assert_eq!(fam.torus_distance(&a, &a).unwrap(), 0.0);
        let c = fam.site(LatticeKind::Coarse, &[1]).unwrap();
        assert!(fam.torus_distance(&a, &c).is_err());
    }

    #[test]
    fn shape_and_window_round_trip() {
        let s = Shape::new(vec![3, 4, 5]);
        for i in 0..s.len() {
            assert_eq!(s.ravel(&s.unravel(i)), i);
        }
        assert_eq!(s.ravel(&[-1, 4, 5]), s.ravel(&[2, 0, 0]));
        let w = Window::new(2, 2);
        assert_eq!(w.len(), 25);
        for i in 0..w.len() {
            assert_eq!(w.index(&w.offset(i)), Some(i));
        }
        assert_eq!(w.index(&[3, 0]), None);
    }
}
