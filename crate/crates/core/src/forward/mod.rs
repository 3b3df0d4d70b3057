//! Parameter-to-data operators of the parallel-MRI model.

mod cone;
mod joint;
mod linear;
pub(crate) mod norm;

pub use cone::{
    cone_pair, cone_probe, ConeModel, ConeProbeReport, JointCone, LinearCone, ProbePair,
    ProductModel, DENOMINATOR_FLOOR, ETA_BOUND,
};
pub use joint::{adjoint_derivative_joint, apply_joint, derivative_joint, JointForward};
pub use linear::{adjoint_linear, apply_linear, LinearForward};
pub use norm::{
    estimate_derivative_norm, estimate_norm, power_iteration, rescale_to_unit, ScalingReport,
    DEFAULT_NORM_ITERATIONS, NORM_SEED, NORM_TOLERANCE, RESCALE_MARGIN, UNIT_NORM_SLACK,
};
