use serde::{Deserialize, Serialize};

/// One Kaczmarz step, recorded before the update is applied.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub k: usize,
    /// `[k] = k mod r_num`
    pub receiver: usize,
    pub omega: u8,
    pub alpha: f64,
    /// `‖F_[k](xₖ) − 𝓜_[k]ᵟ‖`
    pub residual: f64,
    /// `‖xₖ − x*‖` when a reference solution was supplied.
    pub error: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub r_num: usize,
    pub tau: f64,
    pub noise_levels: Vec<f64>,
    pub records: Vec<StepRecord>,
    /// `k*ᵟ`, the first index of the first cycle without any update.
    pub stopping_index: Option<usize>,
    pub cap_reached: bool,
    /// Distance to the reference after the last step.
    pub final_error: Option<f64>,
}

impl IterationTrace {
    pub fn new(r_num: usize, tau: f64, noise_levels: Vec<f64>) -> Self {
        Self {
            r_num,
            tau,
            noise_levels,
            ..Self::default()
        }
    }

    pub fn steps(&self) -> usize {
        self.records.len()
    }

    /// Checks `[k] = k mod r_num`, the loping rule, and cycle alignment of `k*`.
    pub fn check_invariants(&self) -> Result<(), String> {
        for rec in &self.records {
            if rec.receiver != rec.k % self.r_num {
                return Err(format!("step {}: receiver {} != k mod r_num", rec.k, rec.receiver));
            }
            let delta = self.noise_levels.get(rec.receiver).copied().unwrap_or(0.0);
            let expect = u8::from(rec.residual > self.tau * delta);
            if rec.omega != expect {
                return Err(format!(
                    "step {}: omega {} inconsistent with residual {:e} vs tau*delta {:e}",
                    rec.k,
                    rec.omega,
                    rec.residual,
                    self.tau * delta
                ));
            }
        }
        if let Some(k) = self.stopping_index {
            if k % self.r_num != 0 {
                return Err(format!("stopping index {k} is not a multiple of r_num"));
            }
        }
        Ok(())
    }

    /// Errors `‖xₖ − x*‖` for `k = 0, 1, …`, ending with the final iterate.
    pub fn error_sequence(&self) -> Option<Vec<f64>> {
        let mut out: Vec<f64> = self
            .records
            .iter()
            .map(|r| r.error)
            .collect::<Option<_>>()?;
        out.push(self.final_error?);
        Some(out)
    }
}
