use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexImage, KSpaceMask, MeasurementVector, SensitivityModel};
use crate::transform::{embed, project, DftPlan};

pub(crate) fn check_setup(
    model: &SensitivityModel,
    mask: &KSpaceMask,
    plan: &DftPlan,
    receiver: usize,
) -> Result<()> {
    if mask.shape() != model.shape() {
        return Err(Error::dim("mask and sensitivity basis live on different grids"));
    }
    if plan.p_num() != model.shape().p_num() {
        return Err(Error::dim(format!(
            "DFT plan length {} does not match p_num = {}",
            plan.p_num(),
            model.shape().p_num()
        )));
    }
    if receiver >= model.r_num() {
        return Err(Error::ReceiverOutOfRange {
            index: receiver,
            count: model.r_num(),
        });
    }
    Ok(())
}

/// Image-to-data operator of one receiver with known sensitivities:
/// `𝒫 ↦ c · Σₙ b_{i,n} 𝐏[ℱ(𝒫 × ℬₙ)]`.
///
/// The basis expansion is folded into the materialized kernel `𝒮ᵢ` once at
/// construction, so each application costs a single FFT.
#[derive(Clone, Debug)]
pub struct LinearForward {
    model: Arc<SensitivityModel>,
    mask: Arc<KSpaceMask>,
    plan: Arc<DftPlan>,
    receiver: usize,
    scale: f64,
    sensitivity: ComplexImage,
}

impl LinearForward {
    pub fn new(
        model: Arc<SensitivityModel>,
        mask: Arc<KSpaceMask>,
        plan: Arc<DftPlan>,
        receiver: usize,
    ) -> Result<Self> {
        check_setup(&model, &mask, &plan, receiver)?;
        let sensitivity = model.materialize(receiver)?;
        Ok(Self {
            model,
            mask,
            plan,
            receiver,
            scale: 1.0,
            sensitivity,
        })
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn set_scale(&mut self, scale: f64) {
        self.scale = scale;
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn receiver(&self) -> usize {
        self.receiver
    }

    pub fn model(&self) -> &Arc<SensitivityModel> {
        &self.model
    }

    pub fn mask(&self) -> &Arc<KSpaceMask> {
        &self.mask
    }

    pub fn plan(&self) -> &Arc<DftPlan> {
        &self.plan
    }

    /// The materialized kernel `𝒮ᵢ` (without the scale factor).
    pub fn sensitivity(&self) -> &ComplexImage {
        &self.sensitivity
    }

    /// `F̃ᵢ 𝒫`.
    pub fn apply(&self, image: &ComplexImage) -> Result<MeasurementVector> {
        let mut weighted = image.pointwise_mul(&self.sensitivity)?;
        self.plan.forward_in_place(weighted.values_mut())?;
        let mut out = project(&self.mask, &weighted)?;
        scale_values(out.values_mut(), self.scale);
        Ok(out)
    }

    /// `F̃ᵢ* g = c · conj(𝒮ᵢ) × ℱ*𝐏*g`.
    pub fn adjoint(&self, g: &MeasurementVector) -> Result<ComplexImage> {
        let mut h = embed(&self.mask, g)?;
        self.plan.adjoint_in_place(h.values_mut())?;
        let scale = self.scale;
        for (z, s) in h.values_mut().iter_mut().zip(self.sensitivity.values()) {
            *z *= s.conj() * scale;
        }
        Ok(h)
    }
}

pub(crate) fn scale_values(values: &mut [Complex64], scale: f64) {
    if scale != 1.0 {
        values.iter_mut().for_each(|z| *z *= scale);
    }
}

/// `F̃ᵢ 𝒫`.
pub fn apply_linear(op: &LinearForward, image: &ComplexImage) -> Result<MeasurementVector> {
    op.apply(image)
}

/// `F̃ᵢ* g`.
pub fn adjoint_linear(op: &LinearForward, g: &MeasurementVector) -> Result<ComplexImage> {
    op.adjoint(g)
}
