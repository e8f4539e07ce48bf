//! Analytic multi-concept diffusion sandbox.
//!
//! A `ConceptModel` replaces a concept-adapted denoiser with the exact
//! noise prediction for a point mass at a known target, so every sampler
//! claim can be checked against algebra instead of eyeballed. On top of
//! that sit three reverse-diffusion drivers sharing one trace format: the
//! adaptive per-subband composition loop, plain score averaging, and
//! round-robin concept switching.
//!
//! One step of the adaptive loop, with the state latent `z` at timestep t:
//!
//! 1. Per concept, noise predictions at t and t-1 from the same `z`; clean
//!    estimates use the timestep-t coefficients for both, and the t-1
//!    estimate is additionally kept as next step's comparison point.
//! 2. Decoded conditional estimates go through the wavelet transform.
//! 3. Per-band absolute change against the estimate cached by the previous
//!    step, area-normalized into scalar scores.
//! 4. Scores transfer from image bands to latent bands via encoder probes.
//! 5. Top-k softmax weights merge the per-concept guided subbands of the
//!    clean latent estimates.
//! 6. Inverse transform, back to a noise prediction, scheduler update.
//!
//! The first step has no cached estimate yet and compares its t and t-1
//! estimates directly. The t-1 noise prediction at t = 0 reuses index 0
//! rather than stepping out of the schedule.
//!
//! The relevance signal (steps 2-4) is computed from the conditional
//! estimates. The unconditional branch here is one shared prior for all
//! concepts, so it carries no per-concept information to difference.

use crate::error::{Error, Result};
use crate::field::{gaussian_field, Field};
use crate::guidance::{
    aggregate_bands, area_normalized_weight, composite_baseline, spatial_cfg, switch_baseline,
    temporal_delta, topk_softmax, BandWeights, GuidanceConfig,
};
use crate::latent_map::{img2latent_weights, ToyCodec};
use crate::rng::Rng;
use crate::schedule::{ddpm_step, predict_clean, predict_noise, Schedule};
use crate::wavelet::{band_energy_fractions, dwt2, idwt2, Band, SubbandSet};

/// Analytic stand-in for a concept-adapted denoiser: the exact noise
/// prediction when the clean distribution is a point mass at `target`.
#[derive(Clone, Debug)]
pub struct ConceptModel {
    /// Clean target in latent space. With the identity codec this is the
    /// target image itself.
    target: Field,
    /// Shared no-concept prior, all zeros by default.
    uncond_target: Field,
    /// Declared dominant subband, evaluation metadata only.
    band_profile: Option<Band>,
}

impl ConceptModel {
    pub fn new(target: Field) -> Self {
        let uncond_target = Field::zeros(target.shape());
        ConceptModel {
            target,
            uncond_target,
            band_profile: None,
        }
    }

    pub fn with_profile(target: Field, band: Band) -> Self {
        let mut model = Self::new(target);
        model.band_profile = Some(band);
        model
    }

    /// Build from an image-space target by encoding it.
    pub fn from_image(image: &Field, codec: &ToyCodec) -> Result<Self> {
        Ok(Self::new(codec.encode(image)?))
    }

    pub fn target(&self) -> &Field {
        &self.target
    }

    pub fn uncond_target(&self) -> &Field {
        &self.uncond_target
    }

    pub fn band_profile(&self) -> Option<Band> {
        self.band_profile
    }

    /// eps(z, t) = (z - sqrt(abar_t) * target) / sqrt(1 - abar_t), the
    /// noise that would have produced `z` from the target at level t.
    /// Feeding the result back through the clean-estimate algebra at the
    /// same t returns the target exactly.
    pub fn eps(&self, z: &Field, t: usize, sched: &Schedule, conditional: bool) -> Result<Field> {
        sched.check_t(t)?;
        let abar = sched.alpha_bar(t);
        let noise_scale = (1.0 - abar).sqrt();
        if noise_scale <= 0.0 {
            return Err(Error::Numeric(format!(
                "no noise at timestep {t}: abar = {abar}"
            )));
        }
        let target = if conditional {
            &self.target
        } else {
            &self.uncond_target
        };
        z.lin_comb(1.0 / noise_scale, target, -abar.sqrt() / noise_scale)
    }
}

/// Whether the merge uses the adaptive relevance weights or flat ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightMode {
    Adaptive,
    Uniform,
}

/// Per-concept decoded clean estimates entering the relevance signal.
#[derive(Clone, Debug)]
pub struct StepDecodes {
    /// Decoded estimate for the current timestep.
    pub current: Field,
    /// The comparison decode: previous step's cached estimate for this
    /// timestep, or the in-step t-1 estimate on the first iteration.
    pub previous: Field,
}

/// Everything one sampler step decided, for export and inspection.
#[derive(Clone, Debug)]
pub struct StepRecord {
    pub timestep: usize,
    /// Per-concept area-normalized change scores in image bands.
    pub image_scores: Vec<[f64; 4]>,
    /// The same scores after transfer to latent bands; softmax input.
    pub latent_scores: Vec<[f64; 4]>,
    /// Merge weights actually applied.
    pub weights: BandWeights,
    /// Band energy fractions of the decoded state latent at this step.
    pub energy: [f64; 4],
    pub decodes: Vec<StepDecodes>,
}

/// Full history of one sampling run.
#[derive(Clone, Debug)]
pub struct RunTrace {
    /// Initial latent plus one entry per step; length T + 1.
    pub latents: Vec<Field>,
    pub steps: Vec<StepRecord>,
    pub final_image: Field,
}

impl RunTrace {
    /// (timestep, band energy fractions) per step, in execution order.
    pub fn energy_trajectory(&self) -> Vec<(usize, [f64; 4])> {
        self.steps.iter().map(|s| (s.timestep, s.energy)).collect()
    }
}

fn check_inputs(
    concepts: &[ConceptModel],
    cfg: &GuidanceConfig,
    sched: &Schedule,
    codec: &ToyCodec,
) -> Result<()> {
    cfg.validate()?;
    if concepts.is_empty() {
        return Err(Error::InvalidParameter("no concepts".into()));
    }
    if cfg.num_concepts != concepts.len() {
        return Err(Error::InvalidParameter(format!(
            "config says {} concepts, got {}",
            cfg.num_concepts,
            concepts.len()
        )));
    }
    if sched.len() == 0 {
        return Err(Error::InvalidParameter("empty schedule".into()));
    }
    let latent_shape = codec.latent_shape();
    if !latent_shape.has_even_spatial() {
        return Err(Error::OddDimensions(latent_shape));
    }
    for (i, c) in concepts.iter().enumerate() {
        if c.target.shape() != latent_shape {
            return Err(Error::InvalidParameter(format!(
                "concept {i} target shape {} does not match latent shape {latent_shape}",
                c.target.shape()
            )));
        }
    }
    Ok(())
}

/// Run the adaptive per-subband composition loop (the full pipeline
/// described in the module docs). The initial latent is drawn from `rng`;
/// `deterministic` picks the noise-free scheduler update.
pub fn multlfg_run(
    concepts: &[ConceptModel],
    cfg: &GuidanceConfig,
    sched: &Schedule,
    codec: &ToyCodec,
    rng: &mut Rng,
    deterministic: bool,
    mode: WeightMode,
) -> Result<RunTrace> {
    check_inputs(concepts, cfg, sched, codec)?;
    let n = concepts.len();
    let mut z = gaussian_field(codec.latent_shape(), rng);
    let mut latents = Vec::with_capacity(sched.len() + 1);
    latents.push(z.clone());
    let mut steps = Vec::with_capacity(sched.len());
    let mut cache: Option<Vec<(Field, SubbandSet)>> = None;

    for t in (0..sched.len()).rev() {
        let prev_t = t.saturating_sub(1);
        let energy = band_energy_fractions(&codec.decode(&z)?)?;

        let mut uncond_bands = Vec::with_capacity(n);
        let mut cond_bands = Vec::with_capacity(n);
        let mut image_scores = Vec::with_capacity(n);
        let mut latent_scores = Vec::with_capacity(n);
        let mut decodes = Vec::with_capacity(n);
        let mut next_cache = Vec::with_capacity(n);

        for (i, concept) in concepts.iter().enumerate() {
            let eps_u = concept.eps(&z, t, sched, false)?;
            let eps_c = concept.eps(&z, t, sched, true)?;
            let clean_u = predict_clean(&z, &eps_u, t, sched)?;
            let clean_c = predict_clean(&z, &eps_c, t, sched)?;

            // The t-1 prediction deliberately mixes timesteps: noise for
            // t-1, clean-estimate coefficients for t. Evaluating both at
            // the same timestep would collapse to the target for any
            // analytic concept and leave nothing to compare.
            let eps_c_prev = concept.eps(&z, prev_t, sched, true)?;
            let clean_c_prev = predict_clean(&z, &eps_c_prev, t, sched)?;

            let current_img = codec.decode(&clean_c)?;
            let prev_img = codec.decode(&clean_c_prev)?;
            let current_bands = dwt2(&current_img)?;
            let prev_bands = dwt2(&prev_img)?;

            let (compare_img, compare_bands) = match cache.as_ref() {
                Some(entries) => entries[i].clone(),
                None => (prev_img.clone(), prev_bands.clone()),
            };
            let delta = temporal_delta(&current_bands, &compare_bands)?;
            let w_img = area_normalized_weight(&delta, cfg.area_threshold)?;
            let w_lat = img2latent_weights(&current_img, w_img, codec, cfg.epsilon_fd)?;

            image_scores.push(w_img);
            latent_scores.push(w_lat);
            decodes.push(StepDecodes {
                current: current_img,
                previous: compare_img,
            });
            next_cache.push((prev_img, prev_bands));
            uncond_bands.push(dwt2(&clean_u)?);
            cond_bands.push(dwt2(&clean_c)?);
        }

        let weights = match mode {
            WeightMode::Adaptive => topk_softmax(&latent_scores, cfg.top_k)?,
            WeightMode::Uniform => BandWeights::uniform(n),
        };
        let merged = aggregate_bands(&uncond_bands, &cond_bands, &weights, cfg)?;
        let z0_hat = idwt2(&merged)?;
        let eps_hat = predict_noise(&z, &z0_hat, t, sched)?;

        steps.push(StepRecord {
            timestep: t,
            image_scores,
            latent_scores,
            weights,
            energy,
            decodes,
        });
        z = ddpm_step(&z, &eps_hat, t, sched, deterministic, rng)?;
        latents.push(z.clone());
        cache = Some(next_cache);
    }

    let final_image = codec.decode(&z)?;
    Ok(RunTrace {
        latents,
        steps,
        final_image,
    })
}

/// Score-averaging baseline: one spatial guidance step per concept,
/// averaged with flat weights.
pub fn composite_run(
    concepts: &[ConceptModel],
    gamma: f64,
    sched: &Schedule,
    codec: &ToyCodec,
    rng: &mut Rng,
    deterministic: bool,
) -> Result<RunTrace> {
    let cfg = GuidanceConfig::new(gamma, concepts.len().max(1), concepts.len().max(1));
    check_inputs(concepts, &cfg, sched, codec)?;
    let n = concepts.len();
    let mut z = gaussian_field(codec.latent_shape(), rng);
    let mut latents = Vec::with_capacity(sched.len() + 1);
    latents.push(z.clone());
    let mut steps = Vec::with_capacity(sched.len());

    for t in (0..sched.len()).rev() {
        let energy = band_energy_fractions(&codec.decode(&z)?)?;
        let mut eps_u = Vec::with_capacity(n);
        let mut eps_c = Vec::with_capacity(n);
        for concept in concepts {
            eps_u.push(concept.eps(&z, t, sched, false)?);
            eps_c.push(concept.eps(&z, t, sched, true)?);
        }
        let eps_hat = composite_baseline(&eps_u, &eps_c, gamma)?;
        steps.push(StepRecord {
            timestep: t,
            image_scores: Vec::new(),
            latent_scores: Vec::new(),
            weights: BandWeights::uniform(n),
            energy,
            decodes: Vec::new(),
        });
        z = ddpm_step(&z, &eps_hat, t, sched, deterministic, rng)?;
        latents.push(z.clone());
    }

    let final_image = codec.decode(&z)?;
    Ok(RunTrace {
        latents,
        steps,
        final_image,
    })
}

/// Round-robin baseline: each step is plain guidance by one concept.
pub fn switch_run(
    concepts: &[ConceptModel],
    gamma: f64,
    sched: &Schedule,
    codec: &ToyCodec,
    rng: &mut Rng,
    deterministic: bool,
) -> Result<RunTrace> {
    let cfg = GuidanceConfig::new(gamma, concepts.len().max(1), concepts.len().max(1));
    check_inputs(concepts, &cfg, sched, codec)?;
    let n = concepts.len();
    let mut z = gaussian_field(codec.latent_shape(), rng);
    let mut latents = Vec::with_capacity(sched.len() + 1);
    latents.push(z.clone());
    let mut steps = Vec::with_capacity(sched.len());

    for (step_index, t) in (0..sched.len()).rev().enumerate() {
        let energy = band_energy_fractions(&codec.decode(&z)?)?;
        let active = switch_baseline(step_index, n);
        let concept = &concepts[active];
        let eps_hat = spatial_cfg(
            &concept.eps(&z, t, sched, false)?,
            &concept.eps(&z, t, sched, true)?,
            gamma,
        )?;
        steps.push(StepRecord {
            timestep: t,
            image_scores: Vec::new(),
            latent_scores: Vec::new(),
            weights: BandWeights::one_hot(n, active),
            energy,
            decodes: Vec::new(),
        });
        z = ddpm_step(&z, &eps_hat, t, sched, deterministic, rng)?;
        latents.push(z.clone());
    }

    let final_image = codec.decode(&z)?;
    Ok(RunTrace {
        latents,
        steps,
        final_image,
    })
}
