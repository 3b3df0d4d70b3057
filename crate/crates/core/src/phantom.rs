//! Synthetic ground truth: phantoms, sensitivity bases, k-space masks,
//! exact data from the forward model, and noise calibrated to exact levels.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{norm, JointForward, LinearForward};
use crate::grid::{
    ComplexImage, GridShape, JointParameter, KSpaceMask, MeasurementVector, SensitivityModel,
    Vector,
};
use crate::solver::{JointProblem, LinearProblem, MeasurementSet};
use crate::transform::DftPlan;

/// Noise model identifier written into instance metadata.
pub const NOISE_MODEL: &str = "complex-gaussian-rescaled";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhantomFamily {
    Constant,
    Checker,
    Blobs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisFamily {
    Constant,
    Harmonics,
    Bumps,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskFamily {
    Full,
    Rows,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskSize {
    Count(usize),
    Fraction(f64),
}

/// Noise levels `δᵢ`, either given directly or relative to `‖𝓜ᵢ‖`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseSpec {
    /// One level per receiver, or a single level for all.
    Absolute(Vec<f64>),
    Relative(f64),
}

// RNG streams, one per generated component.
const STREAM_PHANTOM: u64 = 1;
const STREAM_COEFFICIENTS: u64 = 2;
const STREAM_MASK: u64 = 3;
const STREAM_NOISE: u64 = 4;
const STREAM_INITIAL: u64 = 5;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian_2d(dr: f64, dc: f64, sigma: f64) -> f64 {
    (-(dr * dr + dc * dc) / (2.0 * sigma * sigma)).exp()
}

/// Test image. `blobs` is a sum of 3–6 complex Gaussian bumps with modulus
/// at most 2 everywhere.
pub fn make_phantom(family: PhantomFamily, shape: GridShape, seed: u64) -> ComplexImage {
    match family {
        PhantomFamily::Constant => ComplexImage::constant(shape, Complex64::new(1.0, 0.0)),
        PhantomFamily::Checker => ComplexImage::from_fn(shape, |r, c| {
            Complex64::new(if (r + c) % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        }),
        PhantomFamily::Blobs => {
            let mut rng = rng(seed, STREAM_PHANTOM);
            let count = rng.random_range(3..=6usize);
            let side = shape.p_hor().min(shape.p_ver()) as f64;
            let blobs: Vec<_> = (0..count)
                .map(|_| {
                    let r0 = rng.random::<f64>() * (shape.p_ver() as f64 - 1.0);
                    let c0 = rng.random::<f64>() * (shape.p_hor() as f64 - 1.0);
                    let sigma = (rng.random_range(0.08..0.25) * side).max(0.5);
                    let modulus = rng.random_range(0.5..1.0) * 2.0 / count as f64;
                    let phase = rng.random_range(0.0..2.0 * PI);
                    (r0, c0, sigma, Complex64::from_polar(modulus, phase))
                })
                .collect();
            ComplexImage::from_fn(shape, |r, c| {
                blobs
                    .iter()
                    .map(|&(r0, c0, s, a)| a * gaussian_2d(r as f64 - r0, c as f64 - c0, s))
                    .sum()
            })
        }
    }
}

fn signed_frequency(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Sensitivity basis functions.
///
/// * `constant`: a single all-ones image (`b_num` must be 1).
/// * `harmonics`: separable complex exponentials, lowest frequencies first.
/// * `bumps`: unit-peak Gaussian windows centred on a regular grid of cells.
pub fn make_basis(family: BasisFamily, b_num: usize, shape: GridShape) -> Result<Vec<ComplexImage>> {
    if b_num == 0 {
        return Err(Error::Invalid("basis needs at least one function".into()));
    }
    match family {
        BasisFamily::Constant => {
            if b_num != 1 {
                return Err(Error::Invalid(format!(
                    "constant basis has a single function, requested {b_num}"
                )));
            }
            Ok(vec![ComplexImage::constant(shape, Complex64::new(1.0, 0.0))])
        }
        BasisFamily::Harmonics => {
            if b_num > shape.p_num() {
                return Err(Error::Invalid(format!(
                    "cannot form {b_num} distinct harmonics on {} grid points",
                    shape.p_num()
                )));
            }
            let (ph, pv) = (shape.p_hor(), shape.p_ver());
            let mut modes: Vec<(i64, i64)> = (0..pv)
                .flat_map(|ky| (0..ph).map(move |kx| (signed_frequency(kx, ph), signed_frequency(ky, pv))))
                .collect();
            modes.sort_by_key(|&(kx, ky)| (kx.abs().max(ky.abs()), kx.abs() + ky.abs(), ky, kx));
            Ok(modes
                .into_iter()
                .take(b_num)
                .map(|(kx, ky)| {
                    ComplexImage::from_fn(shape, |r, c| {
                        let phase = 2.0 * PI * (kx as f64 * c as f64 / ph as f64 + ky as f64 * r as f64 / pv as f64);
                        Complex64::from_polar(1.0, phase)
                    })
                })
                .collect())
        }
        BasisFamily::Bumps => {
            let cols = (b_num as f64).sqrt().ceil() as usize;
            let rows = b_num.div_ceil(cols);
            let w = shape.p_hor() as f64 / cols as f64;
            let h = shape.p_ver() as f64 / rows as f64;
            let sigma = (0.5 * w.max(h)).max(1.0);
            Ok((0..b_num)
                .map(|n| {
                    let r0 = ((n / cols) as f64 + 0.5) * h - 0.5;
                    let c0 = ((n % cols) as f64 + 0.5) * w - 0.5;
                    ComplexImage::from_fn(shape, |r, c| {
                        Complex64::new(gaussian_2d(r as f64 - r0, c as f64 - c0, sigma), 0.0)
                    })
                })
                .collect())
        }
    }
}

/// Measured k-space subset.
///
/// * `full`: every index.
/// * `rows`: the first `⌈fraction·p_ver⌉` rows of flat indices.
/// * `random`: uniform without replacement, seeded.
pub fn make_mask(family: MaskFamily, shape: GridShape, size: MaskSize, seed: u64) -> Result<KSpaceMask> {
    let p_num = shape.p_num();
    let p_proj = match size {
        MaskSize::Count(n) => n,
        MaskSize::Fraction(f) => {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::Invalid(format!("mask fraction must be in (0, 1], got {f}")));
            }
            ((f * p_num as f64).ceil() as usize).clamp(1, p_num)
        }
    };
    if p_proj == 0 || p_proj > p_num {
        return Err(Error::Invalid(format!("p_proj must be in 1..={p_num}, got {p_proj}")));
    }
    match family {
        MaskFamily::Full => Ok(KSpaceMask::full(shape)),
        MaskFamily::Rows => {
            let rows = match size {
                MaskSize::Count(n) => n.div_ceil(shape.p_hor()),
                MaskSize::Fraction(f) => (f * shape.p_ver() as f64).ceil() as usize,
            }
            .clamp(1, shape.p_ver());
            KSpaceMask::new(shape, (0..rows * shape.p_hor()).collect())
        }
        MaskFamily::Random => {
            if p_proj == p_num {
                return Ok(KSpaceMask::full(shape));
            }
            let mut rng = rng(seed, STREAM_MASK);
            let mut idx = rand::seq::index::sample(&mut rng, p_num, p_proj).into_vec();
            idx.sort_unstable();
            KSpaceMask::new(shape, idx)
        }
    }
}

/// Everything needed to generate one synthetic instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InstanceSpec {
    pub p_hor: usize,
    pub p_ver: usize,
    pub receivers: usize,
    pub basis: BasisFamily,
    pub basis_count: usize,
    pub mask: MaskFamily,
    pub mask_size: MaskSize,
    pub phantom: PhantomFamily,
    pub noise: NoiseSpec,
    pub seed: u64,
    /// Generate a joint (image + coefficients) instance.
    pub joint: bool,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        Self {
            p_hor: 32,
            p_ver: 32,
            receivers: 4,
            basis: BasisFamily::Bumps,
            basis_count: 4,
            mask: MaskFamily::Random,
            mask_size: MaskSize::Fraction(0.5),
            phantom: PhantomFamily::Blobs,
            noise: NoiseSpec::Relative(0.01),
            seed: 0,
            joint: false,
        }
    }
}

impl InstanceSpec {
    pub fn shape(&self) -> Result<GridShape> {
        GridShape::new(self.p_hor, self.p_ver)
    }

    pub fn validate(&self) -> Result<()> {
        self.shape()?;
        if self.receivers == 0 || self.basis_count == 0 {
            return Err(Error::Invalid("receivers and basis_count must be at least 1".into()));
        }
        match &self.noise {
            NoiseSpec::Relative(f) if !(*f >= 0.0 && f.is_finite()) => {
                Err(Error::Invalid(format!("relative noise must be >= 0, got {f}")))
            }
            NoiseSpec::Absolute(v) => {
                if v.len() != 1 && v.len() != self.receivers {
                    return Err(Error::Invalid(format!(
                        "absolute noise needs 1 or {} levels, got {}",
                        self.receivers,
                        v.len()
                    )));
                }
                if v.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
                    return Err(Error::Invalid("noise levels must be >= 0".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Exact solution, exact data and the reference ball of a synthetic instance.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub image: ComplexImage,
    /// Exact coefficients `(𝐛ⱼ)*`.
    pub coefficients: Vec<Vec<Complex64>>,
    pub exact: Vec<MeasurementVector>,
    pub initial_image: ComplexImage,
    /// Initial coefficients for joint runs.
    pub initial_coefficients: Vec<Vec<Complex64>>,
    /// `ρ` with `‖x₀ − x*‖ ≤ ρ/2`.
    pub rho: f64,
}

impl GroundTruth {
    pub fn joint_solution(&self) -> JointParameter {
        JointParameter::new(self.image.clone(), self.coefficients.clone())
    }

    pub fn joint_initial(&self) -> JointParameter {
        JointParameter::new(self.initial_image.clone(), self.initial_coefficients.clone())
    }
}

/// A generated (or loaded) instance.
#[derive(Clone, Debug)]
pub struct Instance {
    pub spec: InstanceSpec,
    pub truth: GroundTruth,
    pub model: Arc<SensitivityModel>,
    pub mask: Arc<KSpaceMask>,
    pub plan: Arc<DftPlan>,
    pub noisy: MeasurementSet,
}

fn receiver_coefficients(rng: &mut ChaCha8Rng, r_num: usize, b_num: usize) -> Vec<Vec<Complex64>> {
    (0..r_num)
        .map(|j| {
            let mut b: Vec<Complex64> = (0..b_num)
                .map(|n| {
                    let weight = if n == j % b_num { 1.0 } else { 0.3 * rng.random::<f64>() };
                    Complex64::from_polar(weight, rng.random_range(0.0..2.0 * PI))
                })
                .collect();
            let norm = crate::grid::norm_sqr(&b).sqrt();
            b.iter_mut().for_each(|z| *z /= norm);
            b
        })
        .collect()
}

/// Unit-norm complex Gaussian direction on `mask`.
fn noise_direction(rng: &mut ChaCha8Rng, mask: &Arc<KSpaceMask>) -> Result<MeasurementVector> {
    let mut n = MeasurementVector::new(Arc::clone(mask), norm::gaussian_values(mask.p_proj(), rng))?;
    let len = n.norm();
    n.scale(Complex64::new(1.0 / len, 0.0));
    Ok(n)
}

/// `𝓜ᵟ = 𝓜 + δ·n` with `‖n‖ = 1`; `δ = 0` returns `𝓜` unchanged.
fn add_noise(exact: &MeasurementVector, direction: &MeasurementVector, delta: f64) -> Result<MeasurementVector> {
    let mut out = exact.clone();
    if delta > 0.0 {
        out.axpy(Complex64::new(delta, 0.0), direction)?;
    }
    Ok(out)
}

/// Generates ground truth, operators and noisy data from `spec`.
pub fn synthesize(spec: &InstanceSpec) -> Result<Instance> {
    spec.validate()?;
    let shape = spec.shape()?;
    let plan = Arc::new(DftPlan::auto(shape.p_num())?);

    let image = make_phantom(spec.phantom, shape, spec.seed);
    let basis = make_basis(spec.basis, spec.basis_count, shape)?;
    let coefficients =
        receiver_coefficients(&mut rng(spec.seed, STREAM_COEFFICIENTS), spec.receivers, spec.basis_count);
    let model = Arc::new(SensitivityModel::new(basis, coefficients.clone())?);
    let mask = Arc::new(make_mask(spec.mask, shape, spec.mask_size, spec.seed)?);

    let exact = (0..spec.receivers)
        .map(|i| LinearForward::new(model.clone(), mask.clone(), plan.clone(), i)?.apply(&image))
        .collect::<Result<Vec<_>>>()?;

    let levels: Vec<f64> = match &spec.noise {
        NoiseSpec::Relative(f) => exact.iter().map(|m| f * m.norm()).collect(),
        NoiseSpec::Absolute(v) if v.len() == 1 => vec![v[0]; spec.receivers],
        NoiseSpec::Absolute(v) => v.clone(),
    };

    let initial_image = ComplexImage::zeros(shape);
    let initial_coefficients = if spec.joint {
        let mut rng = rng(spec.seed, STREAM_INITIAL);
        coefficients
            .iter()
            .map(|b| {
                let scale = 0.2 / (b.len() as f64).sqrt();
                let noise = norm::gaussian_values(b.len(), &mut rng);
                b.iter().zip(noise).map(|(z, e)| z + e * scale).collect()
            })
            .collect()
    } else {
        coefficients.clone()
    };

    let mut truth = GroundTruth {
        image,
        coefficients,
        exact,
        initial_image,
        initial_coefficients,
        rho: 0.0,
    };
    let dist = if spec.joint {
        let mut d = truth.joint_initial();
        d.axpy(Complex64::new(-1.0, 0.0), &truth.joint_solution())?;
        d.norm()
    } else {
        truth.initial_image.sub(&truth.image)?.norm()
    };
    truth.rho = 2.0 * dist;

    let noisy = noisy_set(spec.seed, &mask, &truth.exact, &levels)?;
    Ok(Instance {
        spec: spec.clone(),
        truth,
        model,
        mask,
        plan,
        noisy,
    })
}

/// Noisy data at `levels`. Directions depend only on the seed, so different
/// levels differ by exact rescaling of the same noise.
fn noisy_set(
    seed: u64,
    mask: &Arc<KSpaceMask>,
    exact: &[MeasurementVector],
    levels: &[f64],
) -> Result<MeasurementSet> {
    if levels.len() != exact.len() {
        return Err(Error::dim(format!(
            "{} noise levels for {} receivers",
            levels.len(),
            exact.len()
        )));
    }
    let mut rng = rng(seed, STREAM_NOISE);
    let data = exact
        .iter()
        .zip(levels)
        .map(|(m, &d)| add_noise(m, &noise_direction(&mut rng, mask)?, d))
        .collect::<Result<Vec<_>>>()?;
    MeasurementSet::new(data, levels.to_vec())
}

impl Instance {
    pub fn shape(&self) -> GridShape {
        self.model.shape()
    }

    pub fn r_num(&self) -> usize {
        self.model.r_num()
    }

    pub fn linear_ops(&self) -> Result<Vec<LinearForward>> {
        (0..self.r_num())
            .map(|i| LinearForward::new(self.model.clone(), self.mask.clone(), self.plan.clone(), i))
            .collect()
    }

    pub fn joint_ops(&self) -> Result<Vec<JointForward>> {
        (0..self.r_num())
            .map(|i| JointForward::new(self.model.clone(), self.mask.clone(), self.plan.clone(), i))
            .collect()
    }

    /// Linear problem on the instance's noisy data.
    pub fn linear_problem(&self) -> Result<LinearProblem> {
        self.linear_problem_with(self.noisy.clone())
    }

    pub fn linear_problem_with(&self, data: MeasurementSet) -> Result<LinearProblem> {
        LinearProblem::new(self.linear_ops()?, data)
    }

    pub fn joint_problem(&self) -> Result<JointProblem> {
        JointProblem::new(self.joint_ops()?, self.noisy.clone())
    }

    /// Exact data with zero noise levels.
    pub fn exact_data(&self) -> Result<MeasurementSet> {
        MeasurementSet::new(self.truth.exact.clone(), vec![0.0; self.r_num()])
    }

    /// `fraction · ‖𝓜ᵢ‖` per receiver.
    pub fn relative_levels(&self, fraction: f64) -> Vec<f64> {
        self.truth.exact.iter().map(|m| fraction * m.norm()).collect()
    }

    /// Fresh noisy data at the given levels, reusing the seeded noise directions.
    pub fn with_noise_levels(&self, levels: &[f64]) -> Result<MeasurementSet> {
        noisy_set(self.spec.seed, &self.mask, &self.truth.exact, levels)
    }

    /// Data sets at `δ_m = base · 2^{-m}`, `m = 0..count`, sharing this ground truth.
    pub fn noise_sequence(&self, base: &[f64], count: usize) -> Result<Vec<MeasurementSet>> {
        (0..count)
            .map(|m| {
                let f = 0.5f64.powi(m as i32);
                let levels: Vec<f64> = base.iter().map(|d| d * f).collect();
                self.with_noise_levels(&levels)
            })
            .collect()
    }
}
