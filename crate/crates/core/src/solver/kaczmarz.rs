use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::{Method, SolverConfig, TraceVerbosity};
use super::problem::{JointProblem, KaczmarzSystem, LinearProblem};
use super::trace::{IterationTrace, StepRecord};
use crate::error::{Error, Result};
use crate::forward::{estimate_norm, DEFAULT_NORM_ITERATIONS, NORM_SEED, UNIT_NORM_SLACK};
use crate::grid::{ComplexImage, JointParameter, MeasurementVector, Vector};

/// Denominators `‖F sₖ‖²` below this abort the step.
pub const SINGULAR_STEP_FLOOR: f64 = 1e-300;

/// Norm convention on the joint parameter space, recorded with every run.
pub const JOINT_NORM_CONVENTION: &str = "unweighted direct sum: |x|^2 = |P|^2 + sum_j |b_j|^2";

/// `ωₖ`: 1 iff the residual exceeds `τ δ` strictly.
pub fn loping_weight(residual_norm: f64, tau: f64, delta: f64) -> u8 {
    u8::from(residual_norm > tau * delta)
}

/// Steepest-descent relaxation `‖s‖² / ‖F s‖²` (1 on loped steps).
///
/// A zero direction yields 1; the resulting update is zero either way.
pub fn sdk_step_size<V: Vector>(
    apply: impl FnOnce(&V) -> Result<MeasurementVector>,
    s: &V,
    omega: u8,
    k: usize,
) -> Result<f64> {
    if omega == 0 {
        return Ok(1.0);
    }
    let s2 = s.norm_sqr();
    if s2 == 0.0 {
        return Ok(1.0);
    }
    let fs2 = apply(s)?.norm_sqr();
    if !(fs2 >= SINGULAR_STEP_FLOOR) {
        return Err(Error::SingularStep {
            k,
            denominator: fs2,
        });
    }
    Ok(s2 / fs2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// A full cycle passed without any update.
    StoppingRule,
    CycleCap,
    /// Exact data: the residual fell below the configured fraction of its start value.
    ExactDataTolerance,
}

#[derive(Clone, Debug)]
pub struct SolveResult<P> {
    pub solution: P,
    pub trace: IterationTrace,
    pub termination: Termination,
    /// Set for the joint iteration, which carries no convergence guarantee.
    pub experimental: bool,
}

/// Summary of one completed cycle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleOutcome {
    /// First step index of the cycle.
    pub start: usize,
    pub updates: usize,
    pub max_residual: f64,
    /// Every iterate of the cycle stayed within `stop_tolerance` of the first.
    pub within_tolerance: bool,
}

/// Stateful loping Kaczmarz sweep over a system of equations.
pub struct Kaczmarz<'a, S: KaczmarzSystem> {
    system: &'a S,
    config: SolverConfig,
    x: S::Point,
    k: usize,
    reference: Option<S::Point>,
    trace: IterationTrace,
}

impl<'a, S: KaczmarzSystem> Kaczmarz<'a, S> {
    pub fn new(
        system: &'a S,
        config: SolverConfig,
        initial: S::Point,
        reference: Option<S::Point>,
    ) -> Result<Self> {
        config.validate()?;
        let r = system.r_num();
        let deltas = (0..r).map(|i| system.noise_level(i)).collect();
        Ok(Self {
            system,
            trace: IterationTrace::new(r, config.tau, deltas),
            config,
            x: initial,
            k: 0,
            reference,
        })
    }

    pub fn iterate(&self) -> &S::Point {
        &self.x
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn trace(&self) -> &IterationTrace {
        &self.trace
    }

    fn error(&self) -> Result<Option<f64>> {
        self.reference
            .as_ref()
            .map(|r| {
                let mut d = self.x.clone();
                d.axpy(Complex64::new(-1.0, 0.0), r)?;
                Ok(d.norm())
            })
            .transpose()
    }

    /// One Kaczmarz step on equation `[k]`.
    pub fn step(&mut self) -> Result<StepRecord> {
        let k = self.k;
        let i = k % self.system.r_num();
        let r = self.system.residual(i, &self.x)?;
        let residual = r.norm();
        let omega = loping_weight(residual, self.config.tau, self.system.noise_level(i));
        let error = self.error()?;

        let mut alpha = 1.0;
        let mut overflow = !residual.is_finite();
        if omega == 1 && !overflow {
            let s = self.system.adjoint_at(i, &self.x, &r)?;
            alpha = match (self.config.step_override, self.config.method) {
                (Some(a), _) => a,
                (None, Method::Landweber) => 1.0,
                (None, Method::SteepestDescent) => {
                    match sdk_step_size(|v| self.system.tangent_at(i, &self.x, v), &s, omega, k) {
                        // an overflowing ‖F s‖² is not a genuinely singular step
                        Err(Error::SingularStep { denominator, .. }) if !denominator.is_finite() => {
                            overflow = true;
                            f64::NAN
                        }
                        other => other?,
                    }
                }
            };
            if !overflow {
                self.x.axpy(Complex64::new(-alpha, 0.0), &s)?;
            }
        }

        let record = StepRecord {
            k,
            receiver: i,
            omega,
            alpha,
            residual,
            error,
        };
        if self.config.verbosity == TraceVerbosity::Steps {
            self.trace.records.push(record);
        }
        self.k += 1;
        if overflow || !self.x.is_finite() {
            return Err(Error::NumericalFailure {
                k,
                trace: Box::new(self.trace.clone()),
            });
        }
        Ok(record)
    }

    /// A full sweep over all receivers.
    pub fn cycle(&mut self) -> Result<CycleOutcome> {
        let start = self.k;
        let track = self.config.stop_tolerance > 0.0;
        let first = track.then(|| self.x.clone());
        let mut outcome = CycleOutcome {
            start,
            updates: 0,
            max_residual: 0.0,
            within_tolerance: track,
        };
        for _ in 0..self.system.r_num() {
            let rec = self.step()?;
            outcome.updates += usize::from(rec.omega);
            outcome.max_residual = outcome.max_residual.max(rec.residual);
            if let Some(first) = &first {
                let mut d = self.x.clone();
                d.axpy(Complex64::new(-1.0, 0.0), first)?;
                if d.norm() > self.config.stop_tolerance {
                    outcome.within_tolerance = false;
                }
            }
        }
        Ok(outcome)
    }

    /// Sweeps until the stopping rule, the exact-data tolerance, or the cycle cap.
    pub fn run(mut self, experimental: bool) -> Result<SolveResult<S::Point>> {
        let r = self.system.r_num();
        let exact = (0..r).all(|i| self.system.noise_level(i) == 0.0);
        let initial_max = if exact {
            (0..r)
                .map(|i| self.system.residual(i, &self.x).map(|v| v.norm()))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max)
        } else {
            0.0
        };

        let mut termination = Termination::CycleCap;
        for _ in 0..self.config.max_cycles {
            let outcome = self.cycle()?;
            if outcome.updates == 0 || outcome.within_tolerance {
                self.trace.stopping_index = Some(outcome.start);
                termination = Termination::StoppingRule;
                break;
            }
            if exact && outcome.max_residual <= self.config.exact_data_tolerance * initial_max {
                termination = Termination::ExactDataTolerance;
                break;
            }
        }
        self.trace.cap_reached = termination == Termination::CycleCap;
        self.trace.final_error = self.error()?;
        Ok(SolveResult {
            solution: self.x,
            trace: self.trace,
            termination,
            experimental,
        })
    }
}

/// Rejects lLK on operators whose estimated norm exceeds one.
pub fn check_unit_norms(problem: &LinearProblem) -> Result<()> {
    for (i, op) in problem.ops().iter().enumerate() {
        let norm = estimate_norm(op, DEFAULT_NORM_ITERATIONS, NORM_SEED.wrapping_add(i as u64))?;
        if norm > 1.0 + UNIT_NORM_SLACK {
            return Err(Error::Config(format!(
                "lLK requires ‖F̃ᵢ‖ ≤ 1 but receiver {i} has estimated norm {norm:.6}; \
                 rescale the problem first"
            )));
        }
    }
    Ok(())
}

/// Loping Kaczmarz iteration for the linear image problem.
pub fn run_linear(
    problem: &LinearProblem,
    config: &SolverConfig,
    initial: ComplexImage,
    reference: Option<&ComplexImage>,
) -> Result<SolveResult<ComplexImage>> {
    config.validate()?;
    if config.method == Method::Landweber {
        check_unit_norms(problem)?;
    }
    Kaczmarz::new(problem, config.clone(), initial, reference.cloned())?.run(false)
}

/// Loping Kaczmarz iteration for the joint image + sensitivity problem.
///
/// Experimental: the bilinear operators violate the tangential cone
/// condition, so no convergence guarantee applies.
pub fn run_joint(
    problem: &JointProblem,
    config: &SolverConfig,
    initial: JointParameter,
    reference: Option<&JointParameter>,
) -> Result<SolveResult<JointParameter>> {
    Kaczmarz::new(problem, config.clone(), initial, reference.cloned())?.run(true)
}
