//! Diffusion noise schedule and the x0 form of the sampler step.
//!
//! Timesteps are zero-indexed: `t = 0` is the least-noisy step and
//! `t = len - 1` the noisiest; samplers walk t downward. With
//! `abar = alpha_bar[t]`, the forward process is
//! `z_t = sqrt(abar) * x0 + sqrt(1 - abar) * eps`, and `predict_clean` /
//! `predict_noise` invert that relation in either direction given the other
//! component. `ddpm_step` is DDIM (eta = 0) when deterministic, otherwise the
//! ancestral step with the standard posterior variance.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::rng::Rng;
use crate::{field::gaussian_field};

#[derive(Clone, Debug)]
pub struct Schedule {
    betas: Vec<f64>,
    alpha_bars: Vec<f64>,
}

impl Schedule {
    /// Build from per-step variances. Each beta must lie in (0, 1); the
    /// cumulative products then land strictly inside (0, 1) and decrease.
    pub fn from_betas(betas: Vec<f64>) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::InvalidParameter("schedule must have at least one step".into()));
        }
        if let Some(b) = betas.iter().find(|b| !(b.is_finite() && **b > 0.0 && **b < 1.0)) {
            return Err(Error::InvalidParameter(format!("beta {b} outside (0, 1)")));
        }
        let mut alpha_bars = Vec::with_capacity(betas.len());
        let mut prod = 1.0;
        for &b in &betas {
            prod *= 1.0 - b;
            alpha_bars.push(prod);
        }
        Ok(Schedule { betas, alpha_bars })
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    pub fn beta(&self, t: usize) -> f64 {
        self.betas[t]
    }

    pub fn alpha_bar(&self, t: usize) -> f64 {
        self.alpha_bars[t]
    }

    /// Cumulative product one step earlier; 1 by convention at t = 0.
    pub fn alpha_bar_prev(&self, t: usize) -> f64 {
        if t == 0 {
            1.0
        } else {
            self.alpha_bars[t - 1]
        }
    }

    pub fn check_t(&self, t: usize) -> Result<()> {
        if t >= self.len() {
            return Err(Error::TimestepOutOfRange { t, len: self.len() });
        }
        Ok(())
    }
}

/// Linearly spaced betas from `beta_start` to `beta_end` inclusive.
pub fn linear_schedule(num_steps: usize, beta_start: f64, beta_end: f64) -> Result<Schedule> {
    if num_steps == 0 {
        return Err(Error::InvalidParameter("schedule must have at least one step".into()));
    }
    if !(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta range [{beta_start}, {beta_end}] must satisfy 0 < start <= end < 1"
        )));
    }
    let betas = (0..num_steps)
        .map(|i| {
            if num_steps == 1 {
                beta_start
            } else {
                beta_start + (beta_end - beta_start) * i as f64 / (num_steps - 1) as f64
            }
        })
        .collect();
    Schedule::from_betas(betas)
}

pub const DEFAULT_BETA_START: f64 = 1e-4;
pub const DEFAULT_BETA_END: f64 = 2e-2;

/// Forward noising: `sqrt(abar_t) x0 + sqrt(1 - abar_t) eps`.
pub fn add_noise(x0: &Field, eps: &Field, t: usize, sched: &Schedule) -> Result<Field> {
    sched.check_t(t)?;
    let abar = sched.alpha_bar(t);
    x0.lin_comb(abar.sqrt(), eps, (1.0 - abar).sqrt())
}

/// Recover the clean estimate implied by a noise prediction.
pub fn predict_clean(z_t: &Field, eps_hat: &Field, t: usize, sched: &Schedule) -> Result<Field> {
    sched.check_t(t)?;
    let abar = sched.alpha_bar(t);
    if abar <= 0.0 {
        return Err(Error::Numeric(format!("alpha_bar[{t}] = {abar} not invertible")));
    }
    z_t.lin_comb(1.0 / abar.sqrt(), eps_hat, -(1.0 - abar).sqrt() / abar.sqrt())
}

/// Recover the noise prediction implied by a clean estimate. Exact inverse
/// of [`predict_clean`] at the same timestep.
pub fn predict_noise(z_t: &Field, x0_hat: &Field, t: usize, sched: &Schedule) -> Result<Field> {
    sched.check_t(t)?;
    let abar = sched.alpha_bar(t);
    let rem = 1.0 - abar;
    if rem <= 0.0 {
        return Err(Error::Numeric(format!("alpha_bar[{t}] = {abar} leaves no noise component")));
    }
    z_t.lin_comb(1.0 / rem.sqrt(), x0_hat, -abar.sqrt() / rem.sqrt())
}

/// One reverse step from `t` to `t - 1` (to the clean sample when `t = 0`).
///
/// Deterministic: DDIM with eta = 0,
/// `z_prev = sqrt(abar_prev) x0_hat + sqrt(1 - abar_prev) eps_hat`.
/// Stochastic: ancestral step
/// `z_prev = (z_t - beta_t / sqrt(1 - abar_t) eps_hat) / sqrt(1 - beta_t) + sigma_t xi`
/// with `sigma_t^2 = beta_t (1 - abar_prev) / (1 - abar_t)`; no noise is
/// added on the last step, which returns the clean estimate in both modes.
pub fn ddpm_step(
    z_t: &Field,
    eps_hat: &Field,
    t: usize,
    sched: &Schedule,
    deterministic: bool,
    rng: &mut Rng,
) -> Result<Field> {
    sched.check_t(t)?;
    let x0_hat = predict_clean(z_t, eps_hat, t, sched)?;
    if t == 0 {
        return Ok(x0_hat);
    }
    let abar_prev = sched.alpha_bar_prev(t);
    if deterministic {
        return x0_hat.lin_comb(abar_prev.sqrt(), eps_hat, (1.0 - abar_prev).sqrt());
    }
    let beta = sched.beta(t);
    let abar = sched.alpha_bar(t);
    let alpha = 1.0 - beta;
    let mean = z_t.lin_comb(
        1.0 / alpha.sqrt(),
        eps_hat,
        -beta / (alpha.sqrt() * (1.0 - abar).sqrt()),
    )?;
    let sigma = (beta * (1.0 - abar_prev) / (1.0 - abar)).sqrt();
    let noise = gaussian_field(z_t.shape(), rng);
    mean.lin_comb(1.0, &noise, sigma)
}
