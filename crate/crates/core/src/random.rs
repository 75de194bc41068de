//! Reproducible random inputs.
//!
//! Every random kernel, field and sample plan is drawn from ChaCha8
//! (`rand_chacha::ChaCha8Rng`) seeded through `SeedableRng::seed_from_u64`.
//! Complex values are uniform on the square [−1, 1) × [−1, 1), drawn real part
//! first.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type KernelRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> KernelRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut KernelRng) -> f64 {
    2.0 * rng.random::<f64>() - 1.0
}

pub fn complex(rng: &mut KernelRng) -> Complex64 {
    let re = uniform(rng);
    let im = uniform(rng);
    Complex64::new(re, im)
}

pub fn complex_vec(rng: &mut KernelRng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| complex(rng)).collect()
}

/// Uniform direction on the unit sphere in `axes` dimensions.
pub fn unit_vector(rng: &mut KernelRng, axes: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..axes).map(|_| uniform(rng)).collect();
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 > 1e-4 && n2 <= 1.0 {
            let n = n2.sqrt();
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}
