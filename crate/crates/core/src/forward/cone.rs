//! Sampling probe for the local tangential cone condition
//! `‖F(x) − F(x̄) − F'(x)(x − x̄)‖ ≤ η ‖F(x) − F(x̄)‖`, which classical
//! convergence proofs need with some `η < 1/2`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::norm::gaussian_values;
use super::{JointForward, LinearForward};
use crate::error::{Error, Result};
use crate::grid::{norm_sqr, ComplexImage, JointParameter};

/// Pairs whose `‖F(x) − F(x̄)‖` falls below this are excluded from the ratio statistic.
pub const DENOMINATOR_FLOOR: f64 = 1e-14;
/// The cone condition requires `η < 1/2`.
pub const ETA_BOUND: f64 = 0.5;

/// A differentiable map on a flat parameter vector.
pub trait ConeModel {
    /// Number of (complex) parameters.
    fn dim(&self) -> usize;

    /// Whether parameters are restricted to real values.
    fn real_domain(&self) -> bool {
        false
    }

    fn eval(&self, x: &[Complex64]) -> Result<Vec<Complex64>>;

    fn derivative(&self, x: &[Complex64], dx: &[Complex64]) -> Result<Vec<Complex64>>;
}

/// The real scalar model `f(x, y) = xy`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ProductModel;

fn check_dim(x: &[Complex64], dim: usize) -> Result<()> {
    if x.len() != dim {
        return Err(Error::dim(format!("expected {dim} parameters, got {}", x.len())));
    }
    Ok(())
}

impl ConeModel for ProductModel {
    fn dim(&self) -> usize {
        2
    }

    fn real_domain(&self) -> bool {
        true
    }

    fn eval(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_dim(x, 2)?;
        Ok(vec![x[0] * x[1]])
    }

    fn derivative(&self, x: &[Complex64], dx: &[Complex64]) -> Result<Vec<Complex64>> {
        check_dim(x, 2)?;
        check_dim(dx, 2)?;
        Ok(vec![x[1] * dx[0] + x[0] * dx[1]])
    }
}

/// A linear operator viewed as a cone model on the image values.
#[derive(Clone, Copy, Debug)]
pub struct LinearCone<'a>(pub &'a LinearForward);

impl LinearCone<'_> {
    fn image(&self, x: &[Complex64]) -> Result<ComplexImage> {
        ComplexImage::new(self.0.model().shape(), x.to_vec())
    }
}

impl ConeModel for LinearCone<'_> {
    fn dim(&self) -> usize {
        self.0.model().shape().p_num()
    }

    fn eval(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(self.0.apply(&self.image(x)?)?.values().to_vec())
    }

    fn derivative(&self, _x: &[Complex64], dx: &[Complex64]) -> Result<Vec<Complex64>> {
        self.eval(dx)
    }
}

/// The joint operator on flattened `(𝒫, (𝐛ⱼ))`.
#[derive(Clone, Debug)]
pub struct JointCone<'a> {
    op: &'a JointForward,
    layout: JointParameter,
}

impl<'a> JointCone<'a> {
    pub fn new(op: &'a JointForward) -> Self {
        let model = op.model();
        let layout = JointParameter::zeros(model.shape(), model.r_num(), model.b_num());
        Self { op, layout }
    }
}

impl ConeModel for JointCone<'_> {
    fn dim(&self) -> usize {
        let model = self.op.model();
        model.shape().p_num() + model.r_num() * model.b_num()
    }

    fn eval(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let x = self.layout.from_flat_like(x)?;
        Ok(self.op.apply(&x)?.values().to_vec())
    }

    fn derivative(&self, x: &[Complex64], dx: &[Complex64]) -> Result<Vec<Complex64>> {
        let x = self.layout.from_flat_like(x)?;
        let dx = self.layout.from_flat_like(dx)?;
        Ok(self.op.derivative(&x, &dx)?.values().to_vec())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbePair {
    pub x: Vec<Complex64>,
    pub x_bar: Vec<Complex64>,
    /// `‖F(x) − F(x̄) − F'(x)(x − x̄)‖`
    pub numerator: f64,
    /// `‖F(x) − F(x̄)‖`
    pub denominator: f64,
    /// `None` when the denominator is below [`DENOMINATOR_FLOOR`].
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeProbeReport {
    pub radius: f64,
    pub pairs: Vec<ProbePair>,
    /// Largest ratio among non-excluded pairs.
    pub max_ratio: Option<f64>,
    /// Pairs excluded for a vanishing denominator.
    pub excluded: usize,
    /// Every sampled pair was excluded.
    pub degenerate: bool,
    /// `max_ratio ≥ 1/2`: no admissible `η` exists on the sampled ball.
    pub violated: bool,
}

/// Evaluates one pair.
pub fn cone_pair<M: ConeModel + ?Sized>(
    model: &M,
    x: &[Complex64],
    x_bar: &[Complex64],
) -> Result<ProbePair> {
    let fx = model.eval(x)?;
    let fxb = model.eval(x_bar)?;
    let dx: Vec<Complex64> = x.iter().zip(x_bar).map(|(a, b)| a - b).collect();
    let lin = model.derivative(x, &dx)?;
    let diff: Vec<Complex64> = fx.iter().zip(&fxb).map(|(a, b)| a - b).collect();
    let remainder: Vec<Complex64> = diff.iter().zip(&lin).map(|(d, l)| d - l).collect();
    let numerator = norm_sqr(&remainder).sqrt();
    let denominator = norm_sqr(&diff).sqrt();
    let ratio = (denominator >= DENOMINATOR_FLOOR).then(|| numerator / denominator);
    Ok(ProbePair {
        x: x.to_vec(),
        x_bar: x_bar.to_vec(),
        numerator,
        denominator,
        ratio,
    })
}

fn sample_ball(
    center: &[Complex64],
    radius: f64,
    real: bool,
    rng: &mut ChaCha8Rng,
) -> Vec<Complex64> {
    let mut dir = gaussian_values(center.len(), rng);
    if real {
        dir.iter_mut().for_each(|z| z.im = 0.0);
    }
    let real_dim = if real { center.len() } else { 2 * center.len() };
    let n = norm_sqr(&dir).sqrt();
    let u: f64 = rng.random();
    let r = radius * u.powf(1.0 / real_dim as f64);
    center
        .iter()
        .zip(&dir)
        .map(|(c, d)| c + d * (r / n))
        .collect()
}

/// Draws `samples` pairs uniformly from `B_ρ(center)` and records the cone ratios.
pub fn cone_probe<M: ConeModel + ?Sized>(
    model: &M,
    center: &[Complex64],
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<ConeProbeReport> {
    if samples == 0 {
        return Err(Error::Invalid("cone probe needs at least one sample".into()));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Invalid(format!("probe radius must be positive, got {radius}")));
    }
    check_dim(center, model.dim())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let real = model.real_domain();

    let mut pairs = Vec::with_capacity(samples);
    for _ in 0..samples {
        let x = sample_ball(center, radius, real, &mut rng);
        let x_bar = sample_ball(center, radius, real, &mut rng);
        pairs.push(cone_pair(model, &x, &x_bar)?);
    }
    let excluded = pairs.iter().filter(|p| p.ratio.is_none()).count();
    let max_ratio = pairs.iter().filter_map(|p| p.ratio).reduce(f64::max);
    if excluded == samples {
        log::warn!("cone probe: all {samples} sampled pairs had a vanishing denominator");
    }
    Ok(ConeProbeReport {
        radius,
        pairs,
        max_ratio,
        excluded,
        degenerate: excluded == samples,
        violated: max_ratio.is_some_and(|m| m >= ETA_BOUND),
    })
}
