//! Rank statistics and interference metrics for the experiment reports.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::wavelet::{dwt2, Band};

/// Midranks: ties get the average of the positions they span.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
    let mut out = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end) as f64 / 2.0 + 1.0;
        for &idx in &order[start..=end] {
            out[idx] = rank;
        }
        start = end + 1;
    }
    out
}

/// Spearman rank correlation: Pearson correlation of the midranks.
/// Errors on length mismatch, fewer than two points, or non-finite input;
/// a constant sequence has no ranking to correlate and also errors.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidParameter(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two points to correlate".into(),
        ));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite value in correlation input".into()));
    }
    let rx = ranks(xs);
    let ry = ranks(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::Numeric(
            "constant sequence: rank correlation undefined".into(),
        ));
    }
    Ok(cov / (vx * vy).sqrt())
}

/// Normalized inner product; zero when either input has no energy.
pub fn normalized_inner(a: &Field, b: &Field) -> Result<f64> {
    let na = a.l2_norm();
    let nb = b.l2_norm();
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok(a.inner(b)? / (na * nb))
}

/// Interference between two concepts: spatial correlation plus the same
/// measure inside each subband.
#[derive(Clone, Copy, Debug)]
pub struct Interference {
    pub spatial: f64,
    pub per_band: [f64; 4],
}

impl Interference {
    pub fn max_band_abs(&self) -> f64 {
        self.per_band.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn interference(a: &Field, b: &Field) -> Result<Interference> {
    let spatial = normalized_inner(a, b)?;
    let ba = dwt2(a)?;
    let bb = dwt2(b)?;
    let mut per_band = [0.0; 4];
    for band in Band::ALL {
        per_band[band.index()] = normalized_inner(ba.band(band), bb.band(band))?;
    }
    Ok(Interference { spatial, per_band })
}
