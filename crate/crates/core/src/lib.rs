//! Wavelet-subband guidance for composing several concepts in one
//! diffusion sampling run, plus the analytic sandbox used to test it.
//!
//! The pipeline splits every denoiser prediction into four wavelet
//! subbands, weights each concept per band by how much its clean-image
//! estimate changed since the previous step, and merges the guided bands
//! back into one latent update. Everything here is built to be checked
//! exactly: concept denoisers are closed-form point-mass models, the
//! codecs are linear, and the transform is orthonormal, so the important
//! claims reduce to algebra with tolerances near machine precision.
//!
//! Module map:
//! - [`field`]: dense H x W x C arrays and their small linear algebra.
//! - [`rng`]: seeded, platform-independent random streams.
//! - [`wavelet`]: single-level orthonormal Haar analysis and synthesis.
//! - [`schedule`]: beta schedules, forward-noise algebra, sampler steps.
//! - [`guidance`]: spatial and per-subband classifier-free guidance,
//!   change scores, top-k softmax weights, aggregation, baselines.
//! - [`latent_map`]: toy image/latent codecs, image-to-latent weight
//!   transfer, dense band-gain analysis of the encoder.
//! - [`concepts`]: band-pure deterministic target generators.
//! - [`sandbox`]: analytic concept models and the full sampling loops.
//! - [`stats`]: rank correlation and interference metrics.

pub mod concepts;
pub mod error;
pub mod field;
pub mod guidance;
pub mod latent_map;
pub mod rng;
pub mod sandbox;
pub mod schedule;
pub mod stats;
pub mod wavelet;

pub use concepts::{concept_target, localized_field, ConceptFamily};
pub use error::{Error, Result};
pub use field::{gaussian_field, Field, Shape};
pub use guidance::{
    aggregate_bands, area_normalized_weight, composite_baseline, spatial_cfg, subband_cfg,
    switch_baseline, temporal_delta, topk_softmax, BandWeights, GuidanceConfig,
};
pub use latent_map::{
    img2latent_weights, jacobian_band_analysis, BandGainReport, CodecKind, ToyCodec,
    JACOBIAN_SIZE_CAP,
};
pub use rng::Rng;
pub use sandbox::{
    composite_run, multlfg_run, switch_run, ConceptModel, RunTrace, StepDecodes, StepRecord,
    WeightMode,
};
pub use schedule::{
    add_noise, ddpm_step, linear_schedule, predict_clean, predict_noise, Schedule,
    DEFAULT_BETA_END, DEFAULT_BETA_START,
};
pub use stats::{interference, normalized_inner, spearman, Interference};
pub use wavelet::{band_energy_fractions, band_project, dwt2, idwt2, Band, SubbandSet};
