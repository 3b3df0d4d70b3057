use std::sync::Arc;

use num_complex::Complex64;

use super::linear::{check_setup, scale_values};
use crate::error::{Error, Result};
use crate::grid::{ComplexImage, JointParameter, KSpaceMask, MeasurementVector, SensitivityModel};
use crate::transform::{embed, project, DftPlan};

/// Bilinear parameter-to-data operator of one receiver:
/// `(𝒫, (𝐛ⱼ)) ↦ c · Σₙ b_{i,n} 𝐏[ℱ(𝒫 × ℬₙ)]`.
///
/// Only the basis of `model` is used; coefficients come from the argument.
#[derive(Clone, Debug)]
pub struct JointForward {
    model: Arc<SensitivityModel>,
    mask: Arc<KSpaceMask>,
    plan: Arc<DftPlan>,
    receiver: usize,
    scale: f64,
}

impl JointForward {
    pub fn new(
        model: Arc<SensitivityModel>,
        mask: Arc<KSpaceMask>,
        plan: Arc<DftPlan>,
        receiver: usize,
    ) -> Result<Self> {
        check_setup(&model, &mask, &plan, receiver)?;
        Ok(Self {
            model,
            mask,
            plan,
            receiver,
            scale: 1.0,
        })
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
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

    fn check(&self, x: &JointParameter) -> Result<()> {
        if x.image.shape() != self.model.shape() {
            return Err(Error::dim("joint image lives on a different grid"));
        }
        if x.coefficients.len() != self.model.r_num() {
            return Err(Error::dim(format!(
                "joint parameter has {} receivers, operator expects {}",
                x.coefficients.len(),
                self.model.r_num()
            )));
        }
        if x.coefficients.iter().any(|c| c.len() != self.model.b_num()) {
            return Err(Error::dim(format!(
                "every coefficient vector must have b_num = {} entries",
                self.model.b_num()
            )));
        }
        Ok(())
    }

    fn project_spectrum(&self, mut u: ComplexImage) -> Result<MeasurementVector> {
        self.plan.forward_in_place(u.values_mut())?;
        let mut out = project(&self.mask, &u)?;
        scale_values(out.values_mut(), self.scale);
        Ok(out)
    }

    /// `Fᵢ(𝒫, (𝐛ⱼ))`.
    pub fn apply(&self, x: &JointParameter) -> Result<MeasurementVector> {
        self.check(x)?;
        let s = self.model.combine(&x.coefficients[self.receiver])?;
        self.project_spectrum(x.image.pointwise_mul(&s)?)
    }

    /// `Fᵢ'(x)[dx] = c · 𝐏ℱ(δ𝒫 × 𝒮(𝐛ᵢ) + 𝒫 × 𝒮(δ𝐛ᵢ))`.
    pub fn derivative(&self, x: &JointParameter, dx: &JointParameter) -> Result<MeasurementVector> {
        self.check(x)?;
        self.check(dx)?;
        let s = self.model.combine(&x.coefficients[self.receiver])?;
        let ds = self.model.combine(&dx.coefficients[self.receiver])?;
        let mut u = dx.image.pointwise_mul(&s)?;
        for ((z, p), d) in u.values_mut().iter_mut().zip(x.image.values()).zip(ds.values()) {
            *z += p * d;
        }
        self.project_spectrum(u)
    }

    /// `Fᵢ'(x)* g`. With `h = ℱ*𝐏*g` the image part is `c · conj(𝒮(𝐛ᵢ)) × h`
    /// and coefficient `(i, n)` is `c · ⟨h, 𝒫 × ℬₙ⟩`; all other receivers get zero.
    pub fn adjoint_derivative(
        &self,
        x: &JointParameter,
        g: &MeasurementVector,
    ) -> Result<JointParameter> {
        self.check(x)?;
        let mut h = embed(&self.mask, g)?;
        self.plan.adjoint_in_place(h.values_mut())?;
        let scale = self.scale;

        let mut out = x.zeros_like();
        out.coefficients[self.receiver] = self
            .model
            .basis()
            .iter()
            .map(|b| {
                let acc: Complex64 = h
                    .values()
                    .iter()
                    .zip(x.image.values())
                    .zip(b.values())
                    .map(|((hm, p), bn)| hm * (p * bn).conj())
                    .sum();
                acc * scale
            })
            .collect();

        let s = self.model.combine(&x.coefficients[self.receiver])?;
        for ((o, hm), sm) in out
            .image
            .values_mut()
            .iter_mut()
            .zip(h.values())
            .zip(s.values())
        {
            *o = hm * sm.conj() * scale;
        }
        Ok(out)
    }
}

/// `Fᵢ(x)`.
pub fn apply_joint(op: &JointForward, x: &JointParameter) -> Result<MeasurementVector> {
    op.apply(x)
}

/// `Fᵢ'(x)[dx]`.
pub fn derivative_joint(
    op: &JointForward,
    x: &JointParameter,
    dx: &JointParameter,
) -> Result<MeasurementVector> {
    op.derivative(x, dx)
}

/// `Fᵢ'(x)* g`.
pub fn adjoint_derivative_joint(
    op: &JointForward,
    x: &JointParameter,
    g: &MeasurementVector,
) -> Result<JointParameter> {
    op.adjoint_derivative(x, g)
}
