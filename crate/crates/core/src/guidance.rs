//! Classifier-free guidance, spatial and per-subband.
//!
//! The spatial form is the usual `uncond + s * (cond - uncond)`. The subband
//! form applies that bandwise with independent scales, then merges several
//! concepts per band under a convex weight vector chosen by a top-k softmax
//! over relevance scores. Because the wavelet transform is linear, merging
//! with uniform weights and equal scales collapses back to the spatial
//! average; that identity is the main correctness oracle for this module.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::wavelet::{Band, SubbandSet};

/// Tunables for one composition run over `num_concepts` concepts.
#[derive(Clone, Debug)]
pub struct GuidanceConfig {
    /// Per-band guidance scales, in band order LL, LH, HL, HH.
    pub band_scales: [f64; 4],
    /// How many concepts may hold nonzero weight in each band.
    pub top_k: usize,
    /// Threshold on squared per-coefficient change when measuring the
    /// active area of a concept's temporal delta.
    pub area_threshold: f64,
    /// Step size for the finite-difference probes in the image-to-latent
    /// weight transfer.
    pub epsilon_fd: f64,
    pub num_concepts: usize,
}

pub const DEFAULT_AREA_THRESHOLD: f64 = 0.01;
pub const DEFAULT_EPSILON_FD: f64 = 1e-5;

impl GuidanceConfig {
    pub fn new(scale: f64, top_k: usize, num_concepts: usize) -> Self {
        GuidanceConfig {
            band_scales: [scale; 4],
            top_k,
            area_threshold: DEFAULT_AREA_THRESHOLD,
            epsilon_fd: DEFAULT_EPSILON_FD,
            num_concepts,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_concepts == 0 {
            return Err(Error::InvalidParameter("need at least one concept".into()));
        }
        if self.top_k == 0 {
            return Err(Error::InvalidParameter("top_k must be at least 1".into()));
        }
        if self.top_k > self.num_concepts {
            return Err(Error::InvalidParameter(format!(
                "top_k {} exceeds concept count {}",
                self.top_k, self.num_concepts
            )));
        }
        if !(self.area_threshold >= 0.0 && self.area_threshold.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "area threshold {} must be finite and non-negative",
                self.area_threshold
            )));
        }
        if !(self.epsilon_fd > 0.0 && self.epsilon_fd.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "finite-difference epsilon {} must be positive",
                self.epsilon_fd
            )));
        }
        if self.band_scales.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidParameter("band scales must be finite".into()));
        }
        Ok(())
    }
}

/// Per-band convex weights over concepts. `weights[band][concept]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BandWeights {
    weights: [Vec<f64>; 4],
}

impl BandWeights {
    pub fn uniform(num_concepts: usize) -> Self {
        let w = vec![1.0 / num_concepts as f64; num_concepts];
        BandWeights {
            weights: [w.clone(), w.clone(), w.clone(), w],
        }
    }

    /// All weight on one concept, every band.
    pub fn one_hot(num_concepts: usize, concept: usize) -> Self {
        let mut w = vec![0.0; num_concepts];
        w[concept] = 1.0;
        BandWeights {
            weights: [w.clone(), w.clone(), w.clone(), w],
        }
    }

    pub fn from_parts(weights: [Vec<f64>; 4]) -> Result<Self> {
        let bw = BandWeights { weights };
        bw.validate()?;
        Ok(bw)
    }

    pub fn band(&self, band: Band) -> &[f64] {
        &self.weights[band.index()]
    }

    pub fn num_concepts(&self) -> usize {
        self.weights[0].len()
    }

    /// Convexity check: non-negative, summing to one per band.
    pub fn validate(&self) -> Result<()> {
        for band in Band::ALL {
            let w = self.band(band);
            if w.is_empty() {
                return Err(Error::InvalidParameter("empty weight vector".into()));
            }
            if w.len() != self.weights[0].len() {
                return Err(Error::InvalidParameter(
                    "bands disagree on concept count".into(),
                ));
            }
            if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Numeric(format!(
                    "negative or non-finite weight in band {}",
                    band.name()
                )));
            }
            let sum: f64 = w.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Numeric(format!(
                    "band {} weights sum to {sum}, expected 1",
                    band.name()
                )));
            }
        }
        Ok(())
    }

    pub fn nonzero_count(&self, band: Band) -> usize {
        self.band(band).iter().filter(|w| **w > 0.0).count()
    }
}

/// Spatial classifier-free guidance: `uncond + scale * (cond - uncond)`.
pub fn spatial_cfg(uncond: &Field, cond: &Field, scale: f64) -> Result<Field> {
    uncond.lin_comb(1.0 - scale, cond, scale)
}

/// Bandwise guidance with independent per-band scales.
pub fn subband_cfg(
    uncond: &SubbandSet,
    cond: &SubbandSet,
    cfg: &GuidanceConfig,
) -> Result<SubbandSet> {
    let mut out = SubbandSet::zeros(uncond.coeff_shape());
    for band in Band::ALL {
        let s = cfg.band_scales[band.index()];
        *out.band_mut(band) = spatial_cfg(uncond.band(band), cond.band(band), s)?;
    }
    Ok(out)
}

/// Per-coefficient absolute change between two subband sets.
pub fn temporal_delta(current: &SubbandSet, previous: &SubbandSet) -> Result<SubbandSet> {
    let mut out = SubbandSet::zeros(current.coeff_shape());
    for band in Band::ALL {
        *out.band_mut(band) = current
            .band(band)
            .sub(previous.band(band))?
            .abs();
    }
    Ok(out)
}

/// Area-normalized change score per band.
///
/// For each band: numerator is the plain sum of the delta entries, the
/// denominator is the energy of entries whose square clears `tau`. A band
/// with no significant entry scores zero, so faded concepts drop out
/// instead of being boosted by a vanishing denominator.
pub fn area_normalized_weight(delta: &SubbandSet, tau: f64) -> Result<[f64; 4]> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "area threshold {tau} must be finite and non-negative"
        )));
    }
    let mut out = [0.0; 4];
    for band in Band::ALL {
        let d = delta.band(band);
        let sum: f64 = d.data().iter().sum();
        let area: f64 = d
            .data()
            .iter()
            .map(|v| v * v)
            .filter(|sq| *sq >= tau)
            .sum();
        out[band.index()] = if area == 0.0 { 0.0 } else { sum / area };
    }
    Ok(out)
}

/// Softmax over the k largest scores per band; everything else gets weight
/// zero. Ties prefer the lower concept index, k larger than the concept
/// count clamps, and the softmax subtracts the max score before
/// exponentiating so large scores cannot overflow.
///
/// A band in which every concept scores exactly zero carries no relevance
/// signal at all; rather than let the tie-break invent a ranking, such a
/// band falls back to uniform weight over all concepts.
///
/// `raw[concept][band]` are the relevance scores.
pub fn topk_softmax(raw: &[[f64; 4]], k: usize) -> Result<BandWeights> {
    if raw.is_empty() {
        return Err(Error::InvalidParameter("no concepts to weight".into()));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("top_k must be at least 1".into()));
    }
    let n = raw.len();
    let k = k.min(n);
    let mut weights: [Vec<f64>; 4] = [
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    ];
    for band in Band::ALL {
        let b = band.index();
        if raw.iter().all(|scores| scores[b] == 0.0) {
            weights[b] = vec![1.0 / n as f64; n];
            continue;
        }
        let mut order: Vec<usize> = (0..n).collect();
        // Descending score, ascending index on ties.
        order.sort_by(|&i, &j| {
            raw[j][b]
                .partial_cmp(&raw[i][b])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(i.cmp(&j))
        });
        let selected = &order[..k];
        let max = selected
            .iter()
            .map(|&i| raw[i][b])
            .fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = selected.iter().map(|&i| (raw[i][b] - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        for (&i, e) in selected.iter().zip(&exps) {
            weights[b][i] = e / total;
        }
    }
    BandWeights::from_parts(weights)
}

/// Merge per-concept guided subbands under convex weights: for every band F,
/// `sum_i w_F[i] * (uncond_F[i] + s_F * (cond_F[i] - uncond_F[i]))`, summed
/// in concept order.
pub fn aggregate_bands(
    uncond: &[SubbandSet],
    cond: &[SubbandSet],
    weights: &BandWeights,
    cfg: &GuidanceConfig,
) -> Result<SubbandSet> {
    if uncond.len() != cond.len() || uncond.len() != weights.num_concepts() {
        return Err(Error::InvalidParameter(format!(
            "concept count mismatch: {} uncond, {} cond, {} weights",
            uncond.len(),
            cond.len(),
            weights.num_concepts()
        )));
    }
    if uncond.is_empty() {
        return Err(Error::InvalidParameter("no concepts to aggregate".into()));
    }
    weights.validate()?;
    let shape = uncond[0].coeff_shape();
    let mut out = SubbandSet::zeros(shape);
    for band in Band::ALL {
        let s = cfg.band_scales[band.index()];
        let mut acc = Field::zeros(shape);
        for (i, w) in weights.band(band).iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            let guided = spatial_cfg(uncond[i].band(band), cond[i].band(band), s)?;
            acc = acc.lin_comb(1.0, &guided, *w)?;
        }
        *out.band_mut(band) = acc;
    }
    Ok(out)
}

/// Spatial baseline: plain average of per-concept guided predictions.
pub fn composite_baseline(uncond: &[Field], cond: &[Field], scale: f64) -> Result<Field> {
    if uncond.len() != cond.len() || uncond.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "concept count mismatch: {} uncond vs {} cond",
            uncond.len(),
            cond.len()
        )));
    }
    let n = uncond.len() as f64;
    let mut acc = Field::zeros(uncond[0].shape());
    for (u, c) in uncond.iter().zip(cond) {
        let guided = spatial_cfg(u, c, scale)?;
        acc = acc.lin_comb(1.0, &guided, 1.0 / n)?;
    }
    Ok(acc)
}

/// Round-robin baseline: which concept drives this sampler step.
pub fn switch_baseline(step_index: usize, num_concepts: usize) -> usize {
    step_index % num_concepts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{gaussian_field, Shape};
    use crate::rng::Rng;
    use crate::wavelet::{dwt2, idwt2};

    #[test]
    fn spatial_cfg_is_identity_at_scale_one() {
        let mut rng = Rng::new(1);
        let u = gaussian_field(Shape::new(4, 4, 1), &mut rng);
        let c = gaussian_field(Shape::new(4, 4, 1), &mut rng);
        let g = spatial_cfg(&u, &c, 1.0).unwrap();
        assert!(g.max_abs_diff(&c).unwrap() < 1e-15);
        let g0 = spatial_cfg(&u, &c, 0.0).unwrap();
        assert!(g0.max_abs_diff(&u).unwrap() < 1e-15);
    }

    #[test]
    fn area_weight_worked_example() {
        // One significant entry 0.2: numerator 0.2, area 0.04, weight 5.
        let mut delta = SubbandSet::zeros(Shape::new(2, 2, 1));
        delta.ll.set(0, 0, 0, 0.2);
        let w = area_normalized_weight(&delta, 0.01).unwrap();
        assert!((w[0] - 5.0).abs() < 1e-12, "{}", w[0]);
        assert_eq!(&w[1..], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn area_weight_zero_area_scores_zero() {
        let mut delta = SubbandSet::zeros(Shape::new(2, 2, 1));
        delta.hh.set(0, 0, 0, 0.05); // squared 0.0025 < 0.01
        let w = area_normalized_weight(&delta, 0.01).unwrap();
        assert_eq!(w, [0.0; 4]);
    }

    #[test]
    fn area_weight_rejects_bad_tau() {
        let delta = SubbandSet::zeros(Shape::new(2, 2, 1));
        assert!(area_normalized_weight(&delta, -1.0).is_err());
        assert!(area_normalized_weight(&delta, f64::NAN).is_err());
    }

    #[test]
    fn topk_softmax_worked_example() {
        let raw = [[1.0; 4], [2.0; 4], [3.0; 4]];
        let w = topk_softmax(&raw, 2).unwrap();
        for band in Band::ALL {
            let v = w.band(band);
            assert_eq!(v[0], 0.0);
            assert!((v[1] - 0.2689414213699951).abs() < 1e-10, "{}", v[1]);
            assert!((v[2] - 0.7310585786300049).abs() < 1e-10, "{}", v[2]);
        }
    }

    #[test]
    fn topk_softmax_tie_prefers_lower_index() {
        let raw = [[1.0; 4], [1.0; 4], [0.0; 4]];
        let w = topk_softmax(&raw, 2).unwrap();
        for band in Band::ALL {
            let v = w.band(band);
            assert_eq!(v[2], 0.0);
            assert!((v[0] - 0.5).abs() < 1e-12);
            assert!((v[1] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn topk_softmax_all_zero_band_goes_uniform() {
        let raw = [[0.0; 4], [0.0; 4], [0.0; 4]];
        let w = topk_softmax(&raw, 1).unwrap();
        for band in Band::ALL {
            for v in w.band(band) {
                assert!((v - 1.0 / 3.0).abs() < 1e-15);
            }
        }
        // A zero band falls back even when other bands have signal.
        let mixed = [[1.0, 0.0, 0.0, 0.0], [2.0, 0.0, 0.0, 0.0]];
        let w = topk_softmax(&mixed, 1).unwrap();
        assert_eq!(w.band(Band::Ll), &[0.0, 1.0]);
        assert_eq!(w.band(Band::Lh), &[0.5, 0.5]);
    }

    #[test]
    fn topk_softmax_clamps_k() {
        let raw = [[1.0; 4], [2.0; 4]];
        let w = topk_softmax(&raw, 10).unwrap();
        assert_eq!(w.nonzero_count(Band::Ll), 2);
        w.validate().unwrap();
    }

    #[test]
    fn topk_softmax_survives_huge_scores() {
        let raw = [[1e300; 4], [1e300 - 1.0; 4], [0.0; 4]];
        let w = topk_softmax(&raw, 2).unwrap();
        w.validate().unwrap();
    }

    #[test]
    fn band_weights_simplex_enforced() {
        let bad = BandWeights {
            weights: [
                vec![0.5, 0.2],
                vec![0.5, 0.5],
                vec![0.5, 0.5],
                vec![0.5, 0.5],
            ],
        };
        assert!(bad.validate().is_err());
        let neg = BandWeights {
            weights: [
                vec![1.5, -0.5],
                vec![0.5, 0.5],
                vec![0.5, 0.5],
                vec![0.5, 0.5],
            ],
        };
        assert!(neg.validate().is_err());
    }

    #[test]
    fn scale_change_touches_only_its_band() {
        let mut rng = Rng::new(2);
        let u = dwt2(&gaussian_field(Shape::new(8, 8, 1), &mut rng)).unwrap();
        let c = dwt2(&gaussian_field(Shape::new(8, 8, 1), &mut rng)).unwrap();
        let cfg_a = GuidanceConfig::new(2.0, 1, 1);
        let mut cfg_b = cfg_a.clone();
        cfg_b.band_scales[Band::Ll.index()] = 5.0;
        cfg_a.validate().unwrap();
        let out_a = subband_cfg(&u, &c, &cfg_a).unwrap();
        let out_b = subband_cfg(&u, &c, &cfg_b).unwrap();
        assert!(out_a.ll.max_abs_diff(&out_b.ll).unwrap() > 0.0);
        for band in [Band::Lh, Band::Hl, Band::Hh] {
            assert_eq!(out_a.band(band), out_b.band(band), "band {} moved", band.name());
        }
    }

    // Uniform weights, equal scales, k = n: the bandwise merge is the
    // spatial average seen through an orthogonal change of basis.
    #[test]
    fn uniform_merge_matches_spatial_composite() {
        let mut rng = Rng::new(3);
        for n in [2usize, 3, 5] {
            let shape = Shape::new(8, 8, 1);
            let uncond: Vec<Field> = (0..n).map(|_| gaussian_field(shape, &mut rng)).collect();
            let cond: Vec<Field> = (0..n).map(|_| gaussian_field(shape, &mut rng)).collect();
            let cfg = GuidanceConfig::new(7.0, n, n);
            let u_bands: Vec<SubbandSet> = uncond.iter().map(|f| dwt2(f).unwrap()).collect();
            let c_bands: Vec<SubbandSet> = cond.iter().map(|f| dwt2(f).unwrap()).collect();
            let weights = BandWeights::uniform(n);
            let merged = aggregate_bands(&u_bands, &c_bands, &weights, &cfg).unwrap();
            let via_bands = idwt2(&merged).unwrap();
            let spatial = composite_baseline(&uncond, &cond, 7.0).unwrap();
            let diff = via_bands.max_abs_diff(&spatial).unwrap();
            assert!(diff < 1e-10, "n={n} diff={diff}");
        }
    }

    #[test]
    fn aggregate_rejects_invalid_weights() {
        let mut rng = Rng::new(4);
        let shape = Shape::new(4, 4, 1);
        let u = vec![dwt2(&gaussian_field(shape, &mut rng)).unwrap()];
        let c = vec![dwt2(&gaussian_field(shape, &mut rng)).unwrap()];
        let cfg = GuidanceConfig::new(1.0, 1, 1);
        let bad = BandWeights {
            weights: [vec![0.7], vec![1.0], vec![1.0], vec![1.0]],
        };
        assert!(aggregate_bands(&u, &c, &bad, &cfg).is_err());
    }

    #[test]
    fn switch_baseline_round_robin() {
        let picks: Vec<usize> = (0..6).map(|s| switch_baseline(s, 2)).collect();
        assert_eq!(picks, vec![0, 1, 0, 1, 0, 1]);
    }
}
