//! Independent oracles for the integration and acceptance tests. Nothing here
//! calls the library's transform or operator code.

#![allow(dead_code)]

use std::f64::consts::PI;

use mri_lk::{Complex64, ComplexImage, GridShape, JointParameter, KSpaceMask};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_values(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

pub fn random_image(shape: GridShape, rng: &mut ChaCha8Rng) -> ComplexImage {
    ComplexImage::new(shape, random_values(shape.p_num(), rng)).unwrap()
}

pub fn random_joint(shape: GridShape, r: usize, b: usize, rng: &mut ChaCha8Rng) -> JointParameter {
    let image = random_image(shape, rng);
    let coefficients = (0..r).map(|_| random_values(b, rng)).collect();
    JointParameter::new(image, coefficients)
}

/// `Σ a·conj(b)`
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn diff_norm(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Direct O(p²) sum `Σₙ f[n] exp(−2πi kn/p)` with the phase reduced mod p.
pub fn naive_dft(f: &[Complex64]) -> Vec<Complex64> {
    let p = f.len();
    let roots: Vec<Complex64> = (0..p)
        .map(|m| Complex64::from_polar(1.0, -2.0 * PI * m as f64 / p as f64))
        .collect();
    (0..p)
        .map(|k| {
            let mut m = 0;
            let mut acc = Complex64::new(0.0, 0.0);
            for &v in f {
                acc += v * roots[m];
                m += k;
                if m >= p {
                    m %= p;
                }
            }
            acc
        })
        .collect()
}

/// `Σₙ bₙ ℬₙ` by direct summation.
pub fn sensitivity(basis: &[ComplexImage], b: &[Complex64]) -> Vec<Complex64> {
    let p = basis[0].len();
    (0..p)
        .map(|x| basis.iter().zip(b).map(|(bn, c)| bn.values()[x] * c).sum())
        .collect()
}

/// `c · 𝐏 ℱ(P × S)` from first principles.
pub fn forward_oracle(
    scale: f64,
    mask: &KSpaceMask,
    basis: &[ComplexImage],
    b: &[Complex64],
    image: &[Complex64],
) -> Vec<Complex64> {
    let s = sensitivity(basis, b);
    let prod: Vec<Complex64> = image.iter().zip(&s).map(|(p, q)| p * q).collect();
    let full = naive_dft(&prod);
    mask.indices().iter().map(|&k| full[k] * scale).collect()
}

/// `‖c·𝐏ℱ(P×Sᵢ) − data‖` computed by the oracle.
pub fn residual_oracle(
    scale: f64,
    mask: &KSpaceMask,
    basis: &[ComplexImage],
    b: &[Complex64],
    image: &[Complex64],
    data: &[Complex64],
) -> f64 {
    diff_norm(&forward_oracle(scale, mask, basis, b, image), data)
}
