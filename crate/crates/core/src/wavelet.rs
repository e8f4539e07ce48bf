//! Single-level orthonormal 2D Haar transform.
//!
//! `dwt2` splits a field into four half-resolution subbands {LL, LH, HL, HH};
//! `idwt2` is its exact inverse. Per 2x2 block with `a` top-left, `b`
//! top-right, `c` bottom-left, `d` bottom-right:
//!
//! ```text
//! LL = (a + b + c + d) / 2      LH = (a + b - c - d) / 2
//! HL = (a - b + c - d) / 2      HH = (a - b - c + d) / 2
//! ```
//!
//! The block matrix is orthogonal, so the transform preserves inner products
//! and energy exactly (up to rounding) and the inverse is the transpose.
//! LH responds to variation across rows (vertical detail), HL to variation
//! across columns (horizontal detail). Channels transform independently.
//! Spatial dimensions must be even; there is no padding policy.

use crate::error::{Error, Result};
use crate::field::{Field, Shape};

/// Subband identifier, in the fixed order used everywhere: LL, LH, HL, HH.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Band {
    Ll,
    Lh,
    Hl,
    Hh,
}

impl Band {
    pub const ALL: [Band; 4] = [Band::Ll, Band::Lh, Band::Hl, Band::Hh];

    pub fn index(self) -> usize {
        match self {
            Band::Ll => 0,
            Band::Lh => 1,
            Band::Hl => 2,
            Band::Hh => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Band::Ll => "LL",
            Band::Lh => "LH",
            Band::Hl => "HL",
            Band::Hh => "HH",
        }
    }

    pub fn from_name(name: &str) -> Option<Band> {
        match name {
            "LL" => Some(Band::Ll),
            "LH" => Some(Band::Lh),
            "HL" => Some(Band::Hl),
            "HH" => Some(Band::Hh),
            _ => None,
        }
    }
}

/// The four coefficient planes of one analysis level, each of shape
/// `(h/2, w/2, c)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubbandSet {
    pub ll: Field,
    pub lh: Field,
    pub hl: Field,
    pub hh: Field,
}

impl SubbandSet {
    pub fn band(&self, band: Band) -> &Field {
        match band {
            Band::Ll => &self.ll,
            Band::Lh => &self.lh,
            Band::Hl => &self.hl,
            Band::Hh => &self.hh,
        }
    }

    pub fn band_mut(&mut self, band: Band) -> &mut Field {
        match band {
            Band::Ll => &mut self.ll,
            Band::Lh => &mut self.lh,
            Band::Hl => &mut self.hl,
            Band::Hh => &mut self.hh,
        }
    }

    pub fn zeros(coeff_shape: Shape) -> SubbandSet {
        SubbandSet {
            ll: Field::zeros(coeff_shape),
            lh: Field::zeros(coeff_shape),
            hl: Field::zeros(coeff_shape),
            hh: Field::zeros(coeff_shape),
        }
    }

    pub fn coeff_shape(&self) -> Shape {
        self.ll.shape()
    }

    /// Total coefficient energy, all four bands.
    pub fn total_energy(&self) -> f64 {
        Band::ALL
            .iter()
            .map(|&b| self.band(b).l2_norm_sq())
            .sum()
    }
}

fn check_analyzable(shape: Shape) -> Result<()> {
    if !shape.has_even_spatial() {
        return Err(Error::OddDimensions(shape));
    }
    Ok(())
}

/// Forward transform.
pub fn dwt2(x: &Field) -> Result<SubbandSet> {
    check_analyzable(x.shape())?;
    let shape = x.shape();
    let half = shape.halved();
    let mut out = SubbandSet::zeros(half);
    for ch in 0..shape.channels {
        for r in 0..half.height {
            for c in 0..half.width {
                let a = x.get(2 * r, 2 * c, ch);
                let b = x.get(2 * r, 2 * c + 1, ch);
                let cc = x.get(2 * r + 1, 2 * c, ch);
                let d = x.get(2 * r + 1, 2 * c + 1, ch);
                out.ll.set(r, c, ch, (a + b + cc + d) / 2.0);
                out.lh.set(r, c, ch, (a + b - cc - d) / 2.0);
                out.hl.set(r, c, ch, (a - b + cc - d) / 2.0);
                out.hh.set(r, c, ch, (a - b - cc + d) / 2.0);
            }
        }
    }
    Ok(out)
}

/// Inverse transform. Requires all four bands to share one shape.
pub fn idwt2(bands: &SubbandSet) -> Result<Field> {
    let half = bands.ll.shape();
    for b in [Band::Lh, Band::Hl, Band::Hh] {
        if bands.band(b).shape() != half {
            return Err(Error::ShapeMismatch {
                left: half,
                right: bands.band(b).shape(),
            });
        }
    }
    let shape = Shape::new(half.height * 2, half.width * 2, half.channels);
    let mut out = Field::zeros(shape);
    for ch in 0..half.channels {
        for r in 0..half.height {
            for c in 0..half.width {
                let ll = bands.ll.get(r, c, ch);
                let lh = bands.lh.get(r, c, ch);
                let hl = bands.hl.get(r, c, ch);
                let hh = bands.hh.get(r, c, ch);
                out.set(2 * r, 2 * c, ch, (ll + lh + hl + hh) / 2.0);
                out.set(2 * r, 2 * c + 1, ch, (ll + lh - hl - hh) / 2.0);
                out.set(2 * r + 1, 2 * c, ch, (ll - lh + hl - hh) / 2.0);
                out.set(2 * r + 1, 2 * c + 1, ch, (ll - lh - hl + hh) / 2.0);
            }
        }
    }
    Ok(out)
}

/// Image-domain projection onto a single subband: analyze, keep one band,
/// synthesize. The four projections of a field sum back to the field, and
/// projections onto different bands are mutually orthogonal.
pub fn band_project(x: &Field, band: Band) -> Result<Field> {
    let bands = dwt2(x)?;
    let mut kept = SubbandSet::zeros(bands.coeff_shape());
    *kept.band_mut(band) = bands.band(band).clone();
    idwt2(&kept)
}

/// Normalized per-band energy fractions of a field, in band order. For a
/// field with no energy at all the convention is `[1, 0, 0, 0]`, the limit
/// of a vanishing constant image; fractions always sum to one.
pub fn band_energy_fractions(x: &Field) -> Result<[f64; 4]> {
    let bands = dwt2(x)?;
    let energies: Vec<f64> = Band::ALL.iter().map(|&b| bands.band(b).l2_norm_sq()).collect();
    let total: f64 = energies.iter().sum();
    if total == 0.0 {
        return Ok([1.0, 0.0, 0.0, 0.0]);
    }
    Ok([
        energies[0] / total,
        energies[1] / total,
        energies[2] / total,
        energies[3] / total,
    ])
}
