//! The unnormalized DFT over the flattened grid index, its adjoint, and the
//! k-space restriction `𝐏` with its zero-fill adjoint.
//!
//! `(ℱf)(m) = Σₙ f(n) exp(-2πi nm / p_num)` with `n, m` running over the
//! row-major flat index. The adjoint flips the sign of the exponent, so
//! `ℱ*ℱ = p_num·Id` and the inverse is `ℱ* / p_num`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ComplexImage, KSpaceMask, MeasurementVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DftAlgorithm {
    /// Direct `O(p²)` summation with a precomputed root table.
    Naive,
    /// Iterative radix-2 decimation-in-time FFT.
    Fast,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Sign {
    Forward,
    Adjoint,
}

#[derive(Clone, Debug)]
pub struct DftPlan {
    p_num: usize,
    algorithm: DftAlgorithm,
    /// `exp(-2πi k / p_num)`; length `p_num` for the naive path, `p_num / 2` for the fast path.
    roots: Vec<Complex64>,
    /// Bit-reversal permutation (fast path only).
    bitrev: Vec<usize>,
}

fn root(k: usize, n: usize) -> Complex64 {
    let theta = -2.0 * PI * (k as f64) / (n as f64);
    Complex64::new(theta.cos(), theta.sin())
}

impl DftPlan {
    pub fn new(p_num: usize, algorithm: DftAlgorithm) -> Result<Self> {
        if p_num == 0 {
            return Err(Error::Invalid("DFT length must be positive".into()));
        }
        match algorithm {
            DftAlgorithm::Naive => Ok(Self {
                p_num,
                algorithm,
                roots: (0..p_num).map(|k| root(k, p_num)).collect(),
                bitrev: Vec::new(),
            }),
            DftAlgorithm::Fast => {
                if !p_num.is_power_of_two() {
                    return Err(Error::NotPowerOfTwo(p_num));
                }
                let bits = p_num.trailing_zeros();
                let bitrev = (0..p_num)
                    .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
                    .collect();
                Ok(Self {
                    p_num,
                    algorithm,
                    roots: (0..p_num / 2).map(|k| root(k, p_num)).collect(),
                    bitrev,
                })
            }
        }
    }

    /// Fast plan for power-of-two lengths, naive plan (with a warning) otherwise.
    pub fn auto(p_num: usize) -> Result<Self> {
        if p_num.is_power_of_two() {
            Self::new(p_num, DftAlgorithm::Fast)
        } else {
            log::warn!("p_num = {p_num} is not a power of two; using the O(p²) DFT");
            Self::new(p_num, DftAlgorithm::Naive)
        }
    }

    pub fn p_num(&self) -> usize {
        self.p_num
    }

    pub fn algorithm(&self) -> DftAlgorithm {
        self.algorithm
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.p_num {
            return Err(Error::dim(format!(
                "DFT plan has length {}, input has {len}",
                self.p_num
            )));
        }
        Ok(())
    }

    /// `ℱf` on a raw flat buffer.
    pub fn forward_in_place(&self, data: &mut [Complex64]) -> Result<()> {
        self.check_len(data.len())?;
        self.run(data, Sign::Forward);
        Ok(())
    }

    /// `ℱ*g` on a raw flat buffer.
    pub fn adjoint_in_place(&self, data: &mut [Complex64]) -> Result<()> {
        self.check_len(data.len())?;
        self.run(data, Sign::Adjoint);
        Ok(())
    }

    pub fn forward(&self, f: &ComplexImage) -> Result<ComplexImage> {
        let mut values = f.values().to_vec();
        self.forward_in_place(&mut values)?;
        ComplexImage::new(f.shape(), values)
    }

    pub fn adjoint(&self, g: &ComplexImage) -> Result<ComplexImage> {
        let mut values = g.values().to_vec();
        self.adjoint_in_place(&mut values)?;
        ComplexImage::new(g.shape(), values)
    }

    /// `ℱ⁻¹ = ℱ* / p_num`.
    pub fn inverse(&self, g: &ComplexImage) -> Result<ComplexImage> {
        let mut values = g.values().to_vec();
        self.adjoint_in_place(&mut values)?;
        let s = 1.0 / self.p_num as f64;
        values.iter_mut().for_each(|z| *z *= s);
        ComplexImage::new(g.shape(), values)
    }

    fn run(&self, data: &mut [Complex64], sign: Sign) {
        match self.algorithm {
            DftAlgorithm::Naive => self.naive(data, sign),
            DftAlgorithm::Fast => self.radix2(data, sign),
        }
    }

    fn naive(&self, data: &mut [Complex64], sign: Sign) {
        let n = self.p_num;
        let input = data.to_vec();
        for (m, out) in data.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, x) in input.iter().enumerate() {
                let w = self.roots[(k * m) % n];
                acc += x * if sign == Sign::Forward { w } else { w.conj() };
            }
            *out = acc;
        }
    }

    fn radix2(&self, data: &mut [Complex64], sign: Sign) {
        let n = self.p_num;
        for (i, &j) in self.bitrev.iter().enumerate() {
            if i < j {
                data.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for block in data.chunks_exact_mut(len) {
                let (lo, hi) = block.split_at_mut(half);
                for (j, (u, v)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                    let w = self.roots[j * stride];
                    let w = if sign == Sign::Forward { w } else { w.conj() };
                    let t = *v * w;
                    *v = *u - t;
                    *u += t;
                }
            }
            len <<= 1;
        }
    }
}

/// `ℱf`.
pub fn dft_forward(plan: &DftPlan, f: &ComplexImage) -> Result<ComplexImage> {
    plan.forward(f)
}

/// `ℱ*g`.
pub fn dft_adjoint(plan: &DftPlan, g: &ComplexImage) -> Result<ComplexImage> {
    plan.adjoint(g)
}

/// `𝐏f`: restriction of a k-space image to the mask.
pub fn project(mask: &Arc<KSpaceMask>, f: &ComplexImage) -> Result<MeasurementVector> {
    if f.shape() != mask.shape() {
        return Err(Error::dim("image and mask live on different grids"));
    }
    let values = mask.indices().iter().map(|&i| f.values()[i]).collect();
    MeasurementVector::new(Arc::clone(mask), values)
}

/// `𝐏*g`: zero-fill embedding of a measurement into the full grid.
pub fn embed(mask: &KSpaceMask, g: &MeasurementVector) -> Result<ComplexImage> {
    g.check_mask(mask)?;
    let mut out = ComplexImage::zeros(mask.shape());
    let values = out.values_mut();
    for (&i, z) in mask.indices().iter().zip(g.values()) {
        values[i] = *z;
    }
    Ok(out)
}
