#![allow(dead_code)]

use blochlat::lattice::Shape;
use blochlat::periodization::{ZKernel, ZKernelCF, ZKernelFC};
use blochlat::{CMatrix, LatticeSpec};
use num_complex::Complex64;

pub fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn dot(k: &[Complex64], x: &[f64]) -> Complex64 {
    k.iter().zip(x).map(|(a, b)| a * b).sum()
}

pub fn wave(k: &[Complex64], x: &[f64]) -> Complex64 {
    (Complex64::i() * dot(k, x)).exp()
}

pub fn add(a: &[Complex64], b: &[f64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn block(spec: &LatticeSpec) -> Shape {
    Shape::new(spec.periods())
}

/// Block representatives b + L·c for a fixed coarse offset c.
pub fn representatives(spec: &LatticeSpec, c: &[i64]) -> Vec<Vec<i64>> {
    block(spec)
        .iter()
        .map(|b| {
            b.iter()
                .enumerate()
                .map(|(a, &x)| x + c[a] * spec.period(a) as i64)
                .collect()
        })
        .collect()
}

/// vol_f/|B| Σ_{u∈reps, u'} e^{−i(k+ℓ)u} a(u,u') e^{i(k+ℓ')u'} in physical units.
pub fn fiber_oracle(a: &ZKernel, k: &[Complex64], reps: &[Vec<i64>]) -> CMatrix {
    let spec = a.spec();
    let blk = block(spec);
    let n = blk.len();
    let ells: Vec<Vec<Complex64>> = blk.iter().map(|m| add(k, &spec.dual_block_momentum(&m))).collect();
    let mut out = CMatrix::zeros(n, n);
    for u in reps {
        let x = spec.fine_position(u);
        for d in a.window().iter() {
            let u2: Vec<i64> = u.iter().zip(&d).map(|(p, q)| p + q).collect();
            let v = a.get(u, &u2);
            let x2 = spec.fine_position(&u2);
            for i in 0..n {
                let left = wave(&ells[i], &x).inv();
                for j in 0..n {
                    out[(i, j)] += left * v * wave(&ells[j], &x2);
                }
            }
        }
    }
    out * Complex64::new(spec.vol_f() / n as f64, 0.0)
}

/// vol_f Σ_{u∈B, x} e^{−i(k+ℓ)u} b(u,x) e^{ikx}.
pub fn fc_oracle(b: &ZKernelFC, k: &[Complex64]) -> Vec<Complex64> {
    let spec = b.spec();
    let blk = block(spec);
    let r = b.coarse_radius() as i64 + 1;
    let xs = Shape::new(vec![(2 * r + 1) as usize; spec.axes()]);
    blk.iter()
        .map(|m| {
            let p = add(k, &spec.dual_block_momentum(&m));
            let mut s = Complex64::new(0.0, 0.0);
            for u in blk.iter() {
                for xi in xs.iter() {
                    let x: Vec<i64> = xi.iter().map(|v| v - r).collect();
                    let xf: Vec<i64> = x.iter().enumerate().map(|(a, v)| v * spec.period(a) as i64).collect();
                    s += wave(&p, &spec.fine_position(&u)).inv() * b.get(&u, &x) * wave(k, &spec.fine_position(&xf));
                }
            }
            s * spec.vol_f()
        })
        .collect()
}

/// vol_f Σ_{u∈B, x} e^{−ikx} c(x,u) e^{i(k+ℓ')u}.
pub fn cf_oracle(c: &ZKernelCF, k: &[Complex64]) -> Vec<Complex64> {
    let spec = c.spec();
    let blk = block(spec);
    let r = c.coarse_radius() as i64 + 1;
    let xs = Shape::new(vec![(2 * r + 1) as usize; spec.axes()]);
    blk.iter()
        .map(|m| {
            let p = add(k, &spec.dual_block_momentum(&m));
            let mut s = Complex64::new(0.0, 0.0);
            for u in blk.iter() {
                for xi in xs.iter() {
                    let x: Vec<i64> = xi.iter().map(|v| v - r).collect();
                    let xf: Vec<i64> = x.iter().enumerate().map(|(a, v)| v * spec.period(a) as i64).collect();
                    s += wave(k, &spec.fine_position(&xf)).inv() * c.get(&x, &u) * wave(&p, &spec.fine_position(&u));
                }
            }
            s * spec.vol_f()
        })
        .collect()
}

pub fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_entry(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn vec_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn vec_max(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn specs() -> Vec<LatticeSpec> {
    vec![
        LatticeSpec::reference(),
        LatticeSpec::new(0.5, 0.25, 3, 3, 9, 9, 1).unwrap(),
        LatticeSpec::new(1.0, 0.7, 2, 1, 8, 7, 1).unwrap(),
        LatticeSpec::new(0.8, 1.0, 3, 1, 15, 1, 0).unwrap(),
    ]
}
