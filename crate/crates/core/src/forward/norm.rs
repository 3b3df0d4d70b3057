//! Spectral-norm estimation and the rescaling that enforces `‖F̃ᵢ‖ ≤ 1`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{JointForward, LinearForward};
use crate::error::{Error, Result};
use crate::grid::{ComplexImage, GridShape, JointParameter, Vector};

pub const DEFAULT_NORM_ITERATIONS: usize = 10_000;
pub const NORM_TOLERANCE: f64 = 1e-6;
pub const NORM_SEED: u64 = 0x6e6f726d;
/// Safety margin applied when choosing unit-norm scale factors.
pub const RESCALE_MARGIN: f64 = 1e-9;
/// Largest estimated norm still accepted as "unit".
pub const UNIT_NORM_SLACK: f64 = 1e-6;

pub(crate) fn gaussian_values(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect()
}

pub(crate) fn random_image(shape: GridShape, rng: &mut ChaCha8Rng) -> ComplexImage {
    ComplexImage::new(shape, gaussian_values(shape.p_num(), rng)).expect("length matches shape")
}

/// Power iteration on a positive semidefinite normal operator `A*A`.
///
/// Returns the estimate of `‖A‖ = sqrt(λ_max(A*A))` from the Rayleigh
/// quotient `λ`, stopping once the eigen-residual `‖A*Av − λv‖` drops below
/// `tolerance · λ` or after `max_iterations` applications. The residual test
/// bounds the eigenvalue error directly; a small change between successive
/// quotients does not, and stops early when the top of the spectrum is clustered.
pub fn power_iteration<V: Vector>(
    start: V,
    max_iterations: usize,
    tolerance: f64,
    normal: impl Fn(&V) -> Result<V>,
) -> Result<f64> {
    if max_iterations == 0 {
        return Err(Error::Invalid("power iteration needs at least one step".into()));
    }
    let mut v = start;
    let n0 = v.norm();
    if n0 == 0.0 {
        return Err(Error::Invalid("power iteration start vector is zero".into()));
    }
    v.scale(Complex64::new(1.0 / n0, 0.0));

    let mut estimate = 0.0;
    for _ in 0..max_iterations {
        let w = normal(&v)?;
        let rayleigh = w.inner(&v)?.re.max(0.0);
        let next = rayleigh.sqrt();
        let wn = w.norm();
        if wn == 0.0 {
            return Ok(0.0);
        }
        estimate = next;
        let mut r = w.clone();
        r.axpy(Complex64::new(-rayleigh, 0.0), &v)?;
        if r.norm() <= tolerance * rayleigh {
            break;
        }
        v = w;
        v.scale(Complex64::new(1.0 / wn, 0.0));
    }
    Ok(estimate)
}

/// Seeded power-iteration estimate of `‖F̃ᵢ‖`.
pub fn estimate_norm(op: &LinearForward, iterations: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = random_image(op.model().shape(), &mut rng);
    power_iteration(start, iterations, NORM_TOLERANCE, |v| op.adjoint(&op.apply(v)?))
}

/// Seeded estimate of `‖Fᵢ'(x)‖`, the local derivative bound of the joint operator.
pub fn estimate_derivative_norm(
    op: &JointForward,
    x: &JointParameter,
    iterations: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = x.from_flat_like(&gaussian_values(x.to_flat().len(), &mut rng))?;
    power_iteration(start, iterations, NORM_TOLERANCE, |v| {
        op.adjoint_derivative(x, &op.derivative(x, v)?)
    })
}

/// Outcome of [`rescale_to_unit`], one entry per receiver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    /// Estimated `‖F̃ᵢ‖` before rescaling.
    pub norms_before: Vec<f64>,
    /// Scale factor applied on top of the operator's previous scale.
    pub factors: Vec<f64>,
    /// Resulting operator scale `cᵢ`.
    pub scales: Vec<f64>,
    pub norms_after: Vec<f64>,
    /// Receivers whose operator is zero; left unscaled.
    pub zero_operators: Vec<usize>,
}

impl ScalingReport {
    pub fn is_unit(&self) -> bool {
        self.norms_after.iter().all(|&n| n <= 1.0 + UNIT_NORM_SLACK)
    }
}

/// Rescales every operator so its estimated norm is at most one.
///
/// Only the operators change. Measurements and noise levels must be
/// multiplied by the same `factors`; `LinearProblem::rescale_to_unit`
/// does all three at once.
pub fn rescale_to_unit(ops: &mut [LinearForward]) -> Result<ScalingReport> {
    let mut report = ScalingReport {
        norms_before: Vec::with_capacity(ops.len()),
        factors: Vec::with_capacity(ops.len()),
        scales: Vec::with_capacity(ops.len()),
        norms_after: Vec::with_capacity(ops.len()),
        zero_operators: Vec::new(),
    };
    for (i, op) in ops.iter_mut().enumerate() {
        let seed = NORM_SEED.wrapping_add(i as u64);
        let before = estimate_norm(op, DEFAULT_NORM_ITERATIONS, seed)?;
        let factor = if before > 0.0 {
            1.0 / (before * (1.0 + RESCALE_MARGIN))
        } else {
            report.zero_operators.push(i);
            1.0
        };
        op.set_scale(op.scale() * factor);
        let after = estimate_norm(op, DEFAULT_NORM_ITERATIONS, seed)?;
        report.norms_before.push(before);
        report.factors.push(factor);
        report.scales.push(op.scale());
        report.norms_after.push(after);
    }
    Ok(report)
}
