//! Deterministic concept-target generators.
//!
//! Each family places a smooth random bump on the half-resolution grid and
//! expands it to full resolution with a fixed 2x2 block pattern. Because
//! every block is one of (v,v,v,v), (v,-v,v,-v) or (v,-v,-v,v), the result
//! lands in exactly one wavelet subband: blobs are pure approximation,
//! vertical stripes pure horizontal detail, checkerboards pure diagonal
//! detail. The purity is exact in floating point, not just approximate,
//! which the composition experiments rely on.

use crate::error::{Error, Result};
use crate::field::{Field, Shape};
use crate::rng::Rng;
use crate::wavelet::Band;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConceptFamily {
    Blob,
    Stripes,
    Checker,
}

impl ConceptFamily {
    pub const ALL: [ConceptFamily; 3] = [
        ConceptFamily::Blob,
        ConceptFamily::Stripes,
        ConceptFamily::Checker,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConceptFamily::Blob => "blob",
            ConceptFamily::Stripes => "stripes",
            ConceptFamily::Checker => "checker",
        }
    }

    /// The single subband carrying all of this family's energy.
    pub fn band(self) -> Band {
        match self {
            ConceptFamily::Blob => Band::Ll,
            ConceptFamily::Stripes => Band::Hl,
            ConceptFamily::Checker => Band::Hh,
        }
    }
}

impl std::str::FromStr for ConceptFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "blob" => Ok(ConceptFamily::Blob),
            "stripes" => Ok(ConceptFamily::Stripes),
            "checker" => Ok(ConceptFamily::Checker),
            other => Err(Error::InvalidParameter(format!(
                "unknown concept family {other:?}, expected blob, stripes or checker"
            ))),
        }
    }
}

/// Smooth bump on the half-resolution grid: random center in the middle
/// half of the image, random width between an eighth and a quarter of the
/// smaller dimension.
fn bump(half: Shape, amplitude: f64, rng: &mut Rng) -> Vec<f64> {
    let h = half.height as f64;
    let w = half.width as f64;
    let cr = h * (0.25 + 0.5 * rng.uniform());
    let cc = w * (0.25 + 0.5 * rng.uniform());
    let min_dim = h.min(w);
    let sigma = min_dim * (0.125 + 0.125 * rng.uniform());
    let mut m = vec![0.0; half.height * half.width];
    for r in 0..half.height {
        for c in 0..half.width {
            let dr = r as f64 - cr;
            let dc = c as f64 - cc;
            m[r * half.width + c] =
                amplitude * (-(dr * dr + dc * dc) / (2.0 * sigma * sigma)).exp();
        }
    }
    m
}

/// Deterministic target image for one concept.
pub fn concept_target(
    family: ConceptFamily,
    shape: Shape,
    amplitude: f64,
    seed: u64,
) -> Result<Field> {
    if !shape.has_even_spatial() {
        return Err(Error::OddDimensions(shape));
    }
    if !amplitude.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "amplitude {amplitude} must be finite"
        )));
    }
    let half = shape.halved();
    let mut rng = Rng::new(seed);
    let m = bump(half, amplitude, &mut rng);
    let mut out = Field::zeros(shape);
    for r in 0..half.height {
        for c in 0..half.width {
            let v = m[r * half.width + c];
            for (i, j, sign) in block_pattern(family) {
                for ch in 0..shape.channels {
                    out.set(2 * r + i, 2 * c + j, ch, sign * v);
                }
            }
        }
    }
    Ok(out)
}

fn block_pattern(family: ConceptFamily) -> [(usize, usize, f64); 4] {
    match family {
        ConceptFamily::Blob => [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)],
        ConceptFamily::Stripes => [(0, 0, 1.0), (0, 1, -1.0), (1, 0, 1.0), (1, 1, -1.0)],
        ConceptFamily::Checker => [(0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 1.0)],
    }
}

/// Spatially localized random field: a bump envelope times white noise.
/// Generic band content, compact support; the interference studies draw
/// their concept pairs from this.
pub fn localized_field(shape: Shape, amplitude: f64, seed: u64) -> Result<Field> {
    if !shape.has_even_spatial() {
        return Err(Error::OddDimensions(shape));
    }
    let mut rng = Rng::new(seed);
    let envelope = bump(shape, amplitude, &mut rng);
    let mut out = Field::zeros(shape);
    for r in 0..shape.height {
        for c in 0..shape.width {
            let e = envelope[r * shape.width + c];
            for ch in 0..shape.channels {
                out.set(r, c, ch, e * rng.normal());
            }
        }
    }
    Ok(out)
}
