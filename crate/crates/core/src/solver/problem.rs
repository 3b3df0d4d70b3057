use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forward::{rescale_to_unit, JointForward, LinearForward, ScalingReport};
use crate::grid::{ComplexImage, JointParameter, MeasurementVector, Vector};

/// Per-receiver data `𝓜ᵢᵟ` with noise levels `δᵢ`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSet {
    data: Vec<MeasurementVector>,
    noise_levels: Vec<f64>,
}

impl MeasurementSet {
    pub fn new(data: Vec<MeasurementVector>, noise_levels: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Invalid("measurement set is empty".into()));
        }
        if data.len() != noise_levels.len() {
            return Err(Error::dim(format!(
                "{} measurements but {} noise levels",
                data.len(),
                noise_levels.len()
            )));
        }
        if let Some(d) = noise_levels.iter().find(|d| !(**d >= 0.0) || !d.is_finite()) {
            return Err(Error::Invalid(format!("noise level must be finite and >= 0, got {d}")));
        }
        Ok(Self { data, noise_levels })
    }

    pub fn data(&self) -> &[MeasurementVector] {
        &self.data
    }

    pub fn noise_levels(&self) -> &[f64] {
        &self.noise_levels
    }

    pub fn r_num(&self) -> usize {
        self.data.len()
    }

    pub fn is_exact(&self) -> bool {
        self.noise_levels.iter().all(|&d| d == 0.0)
    }

    /// Multiplies receiver `i`'s data and noise level by `factors[i]`.
    pub fn rescale(&mut self, factors: &[f64]) {
        for ((m, d), &f) in self.data.iter_mut().zip(&mut self.noise_levels).zip(factors) {
            m.scale(Complex64::new(f, 0.0));
            *d *= f;
        }
    }
}

fn check_masks<'a>(
    masks: impl Iterator<Item = &'a crate::grid::KSpaceMask>,
    data: &MeasurementSet,
) -> Result<()> {
    for (i, (mask, m)) in masks.zip(data.data()).enumerate() {
        m.check_mask(mask)
            .map_err(|_| Error::dim(format!("receiver {i}: data mask differs from operator mask")))?;
    }
    Ok(())
}

/// The linear system `F̃ᵢ(𝒫) = 𝓜ᵢᵟ`.
#[derive(Clone, Debug)]
pub struct LinearProblem {
    ops: Vec<LinearForward>,
    data: MeasurementSet,
}

impl LinearProblem {
    pub fn new(ops: Vec<LinearForward>, data: MeasurementSet) -> Result<Self> {
        if ops.len() != data.r_num() {
            return Err(Error::dim(format!(
                "{} operators but {} measurements",
                ops.len(),
                data.r_num()
            )));
        }
        if ops.iter().any(|op| op.model().shape() != ops[0].model().shape()) {
            return Err(Error::dim("operators live on different grids"));
        }
        check_masks(ops.iter().map(|op| op.mask().as_ref()), &data)?;
        Ok(Self { ops, data })
    }

    pub fn ops(&self) -> &[LinearForward] {
        &self.ops
    }

    pub fn data(&self) -> &MeasurementSet {
        &self.data
    }

    pub fn r_num(&self) -> usize {
        self.ops.len()
    }

    /// `F̃ᵢ(𝒫) − 𝓜ᵢᵟ`.
    pub fn residual(&self, i: usize, image: &ComplexImage) -> Result<MeasurementVector> {
        let mut r = self.ops[i].apply(image)?;
        r.axpy(Complex64::new(-1.0, 0.0), &self.data.data()[i])?;
        Ok(r)
    }

    /// `‖F̃ᵢ(𝒫) − 𝓜ᵢᵟ‖` for every receiver, computed from scratch.
    pub fn residual_norms(&self, image: &ComplexImage) -> Result<Vec<f64>> {
        (0..self.r_num())
            .map(|i| self.residual(i, image).map(|r| r.norm()))
            .collect()
    }

    /// Rescales operators to unit norm and applies the same factors to the
    /// data and noise levels, so `‖𝓜ᵢᵟ − 𝓜ᵢ‖ ≤ δᵢ` keeps holding.
    pub fn rescale_to_unit(&mut self) -> Result<ScalingReport> {
        let report = rescale_to_unit(&mut self.ops)?;
        self.data.rescale(&report.factors);
        Ok(report)
    }
}

/// The bilinear system `Fᵢ(𝒫, (𝐛ⱼ)) = 𝓜ᵢᵟ`.
#[derive(Clone, Debug)]
pub struct JointProblem {
    ops: Vec<JointForward>,
    data: MeasurementSet,
}

impl JointProblem {
    pub fn new(ops: Vec<JointForward>, data: MeasurementSet) -> Result<Self> {
        if ops.len() != data.r_num() {
            return Err(Error::dim(format!(
                "{} operators but {} measurements",
                ops.len(),
                data.r_num()
            )));
        }
        if ops.iter().any(|op| op.model().r_num() != ops.len()) {
            return Err(Error::dim("operator receiver count differs from data"));
        }
        check_masks(ops.iter().map(|op| op.mask().as_ref()), &data)?;
        Ok(Self { ops, data })
    }

    pub fn ops(&self) -> &[JointForward] {
        &self.ops
    }

    pub fn data(&self) -> &MeasurementSet {
        &self.data
    }

    pub fn r_num(&self) -> usize {
        self.ops.len()
    }

    pub fn residual(&self, i: usize, x: &JointParameter) -> Result<MeasurementVector> {
        let mut r = self.ops[i].apply(x)?;
        r.axpy(Complex64::new(-1.0, 0.0), &self.data.data()[i])?;
        Ok(r)
    }

    pub fn residual_norms(&self, x: &JointParameter) -> Result<Vec<f64>> {
        (0..self.r_num())
            .map(|i| self.residual(i, x).map(|r| r.norm()))
            .collect()
    }
}

/// What a Kaczmarz sweep needs from a system of equations.
pub trait KaczmarzSystem {
    type Point: Vector;

    fn r_num(&self) -> usize;

    fn noise_level(&self, i: usize) -> f64;

    /// `Fᵢ(x) − 𝓜ᵢᵟ`.
    fn residual(&self, i: usize, x: &Self::Point) -> Result<MeasurementVector>;

    /// `Fᵢ'(x)* r`.
    fn adjoint_at(&self, i: usize, x: &Self::Point, r: &MeasurementVector) -> Result<Self::Point>;

    /// `Fᵢ'(x) s`.
    fn tangent_at(&self, i: usize, x: &Self::Point, s: &Self::Point) -> Result<MeasurementVector>;
}

impl KaczmarzSystem for LinearProblem {
    type Point = ComplexImage;

    fn r_num(&self) -> usize {
        self.ops.len()
    }

    fn noise_level(&self, i: usize) -> f64 {
        self.data.noise_levels()[i]
    }

    fn residual(&self, i: usize, x: &ComplexImage) -> Result<MeasurementVector> {
        LinearProblem::residual(self, i, x)
    }

    fn adjoint_at(&self, i: usize, _x: &ComplexImage, r: &MeasurementVector) -> Result<ComplexImage> {
        self.ops[i].adjoint(r)
    }

    fn tangent_at(&self, i: usize, _x: &ComplexImage, s: &ComplexImage) -> Result<MeasurementVector> {
        self.ops[i].apply(s)
    }
}

impl KaczmarzSystem for JointProblem {
    type Point = JointParameter;

    fn r_num(&self) -> usize {
        self.ops.len()
    }

    fn noise_level(&self, i: usize) -> f64 {
        self.data.noise_levels()[i]
    }

    fn residual(&self, i: usize, x: &JointParameter) -> Result<MeasurementVector> {
        JointProblem::residual(self, i, x)
    }

    fn adjoint_at(
        &self,
        i: usize,
        x: &JointParameter,
        r: &MeasurementVector,
    ) -> Result<JointParameter> {
        self.ops[i].adjoint_derivative(x, r)
    }

    fn tangent_at(
        &self,
        i: usize,
        x: &JointParameter,
        s: &JointParameter,
    ) -> Result<MeasurementVector> {
        self.ops[i].derivative(x, s)
    }
}
