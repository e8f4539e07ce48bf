//! Toy image/latent codecs and the image-to-latent weight transfer.
//!
//! Two stand-in codecs replace a learned autoencoder. The identity codec
//! makes image and latent space coincide, which turns most downstream
//! claims into exact algebra. The downsampling codec averages 2x2 pixel
//! blocks on encode and replicates latent pixels on decode, so it loses
//! exactly the detail subbands: probing it per band shows which image-band
//! changes survive into which latent bands. That probe is also the basis
//! of the weight transfer used inside the sampling loop.

use crate::error::{Error, Result};
use crate::field::{Field, Shape};
use crate::wavelet::{dwt2, idwt2, Band, SubbandSet};
use nalgebra::DMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodecKind {
    Identity,
    Downsample,
}

impl CodecKind {
    pub fn name(self) -> &'static str {
        match self {
            CodecKind::Identity => "identity",
            CodecKind::Downsample => "downsample",
        }
    }
}

impl std::str::FromStr for CodecKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(CodecKind::Identity),
            "downsample" => Ok(CodecKind::Downsample),
            other => Err(Error::InvalidParameter(format!(
                "unknown codec {other:?}, expected identity or downsample"
            ))),
        }
    }
}

/// Linear encoder/decoder pair between image space and latent space.
#[derive(Clone, Debug)]
pub struct ToyCodec {
    kind: CodecKind,
    image_shape: Shape,
}

impl ToyCodec {
    pub fn identity(image_shape: Shape) -> Self {
        ToyCodec {
            kind: CodecKind::Identity,
            image_shape,
        }
    }

    /// 2x2 block averaging; needs even spatial dimensions.
    pub fn downsample(image_shape: Shape) -> Result<Self> {
        if !image_shape.has_even_spatial() {
            return Err(Error::OddDimensions(image_shape));
        }
        Ok(ToyCodec {
            kind: CodecKind::Downsample,
            image_shape,
        })
    }

    pub fn new(kind: CodecKind, image_shape: Shape) -> Result<Self> {
        match kind {
            CodecKind::Identity => Ok(Self::identity(image_shape)),
            CodecKind::Downsample => Self::downsample(image_shape),
        }
    }

    pub fn kind(&self) -> CodecKind {
        self.kind
    }

    pub fn image_shape(&self) -> Shape {
        self.image_shape
    }

    pub fn latent_shape(&self) -> Shape {
        match self.kind {
            CodecKind::Identity => self.image_shape,
            CodecKind::Downsample => self.image_shape.halved(),
        }
    }

    pub fn encode(&self, x: &Field) -> Result<Field> {
        if x.shape() != self.image_shape {
            return Err(Error::ShapeMismatch {
                left: x.shape(),
                right: self.image_shape,
            });
        }
        match self.kind {
            CodecKind::Identity => Ok(x.clone()),
            CodecKind::Downsample => {
                let out_shape = self.latent_shape();
                let mut out = Field::zeros(out_shape);
                for r in 0..out_shape.height {
                    for c in 0..out_shape.width {
                        for ch in 0..out_shape.channels {
                            let sum = x.get(2 * r, 2 * c, ch)
                                + x.get(2 * r, 2 * c + 1, ch)
                                + x.get(2 * r + 1, 2 * c, ch)
                                + x.get(2 * r + 1, 2 * c + 1, ch);
                            out.set(r, c, ch, sum / 4.0);
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// Right inverse of `encode`: nearest-neighbor replication for the
    /// downsampling codec, so `encode(decode(z)) = z`.
    pub fn decode(&self, z: &Field) -> Result<Field> {
        let latent_shape = self.latent_shape();
        if z.shape() != latent_shape {
            return Err(Error::ShapeMismatch {
                left: z.shape(),
                right: latent_shape,
            });
        }
        match self.kind {
            CodecKind::Identity => Ok(z.clone()),
            CodecKind::Downsample => {
                let mut out = Field::zeros(self.image_shape);
                for r in 0..self.image_shape.height {
                    for c in 0..self.image_shape.width {
                        for ch in 0..self.image_shape.channels {
                            out.set(r, c, ch, z.get(r / 2, c / 2, ch));
                        }
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Unit-norm image perturbation supported on a single subband: the inverse
/// transform of one unit coefficient. Orthonormality makes its L2 norm
/// exactly 1.
fn band_probe(coeff_shape: Shape, band: Band, r: usize, c: usize, ch: usize) -> Result<Field> {
    let mut coeffs = SubbandSet::zeros(coeff_shape);
    coeffs.band_mut(band).set(r, c, ch, 1.0);
    idwt2(&coeffs)
}

/// Transfer per-band image-space relevance scores into latent space.
///
/// Each image band gets probed with a centered unit perturbation; the
/// encoder's finite-difference response is decomposed back into bands and
/// reduced to per-band magnitudes. The output for latent band F' is the
/// score-weighted sum of those magnitudes over the probed image bands.
pub fn img2latent_weights(
    x: &Field,
    w_img: [f64; 4],
    codec: &ToyCodec,
    eps: f64,
) -> Result<[f64; 4]> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "finite-difference epsilon {eps} must be positive"
        )));
    }
    if w_img.iter().any(|w| !w.is_finite()) {
        return Err(Error::Numeric("non-finite band score".into()));
    }
    if x.shape() != codec.image_shape() {
        return Err(Error::ShapeMismatch {
            left: x.shape(),
            right: codec.image_shape(),
        });
    }
    let coeff_shape = x.shape().halved();
    let base = codec.encode(x)?;
    let mut out = [0.0; 4];
    for band in Band::ALL {
        let probe = band_probe(
            coeff_shape,
            band,
            coeff_shape.height / 2,
            coeff_shape.width / 2,
            0,
        )?;
        let perturbed = codec.encode(&x.lin_comb(1.0, &probe, eps)?)?;
        let dz = perturbed.sub(&base)?.scale(1.0 / eps);
        let response = dwt2(&dz)?;
        for target in Band::ALL {
            out[target.index()] += w_img[band.index()] * response.band(target).l2_norm();
        }
    }
    Ok(out)
}

/// Largest spatial extent accepted for dense operator assembly.
pub const JACOBIAN_SIZE_CAP: usize = 32;

/// Per (image band, latent band) gain of the encoder seen in wavelet
/// coordinates on both sides.
#[derive(Clone, Debug)]
pub struct BandGainReport {
    /// `gains[i][j]`: largest singular value of the block taking image
    /// band `i` coefficients to latent band `j` coefficients.
    pub gains: [[f64; 4]; 4],
    /// Full singular-value spectra per block, sorted descending.
    pub spectra: [[Vec<f64>; 4]; 4],
}

impl BandGainReport {
    pub fn gain(&self, image_band: Band, latent_band: Band) -> f64 {
        self.gains[image_band.index()][latent_band.index()]
    }
}

/// Dense spectral analysis of the encoder in band coordinates.
///
/// Every image-band basis coefficient is pushed through `idwt2`, the
/// encoder, and `dwt2` on the latent side; the responses assemble sixteen
/// blocks whose singular values say how strongly each image band feeds
/// each latent band. The probes use a unit step, which is an exact
/// directional difference for the linear codecs this module ships.
pub fn jacobian_band_analysis(x: &Field, codec: &ToyCodec) -> Result<BandGainReport> {
    let shape = codec.image_shape();
    if x.shape() != shape {
        return Err(Error::ShapeMismatch {
            left: x.shape(),
            right: shape,
        });
    }
    if shape.height > JACOBIAN_SIZE_CAP || shape.width > JACOBIAN_SIZE_CAP {
        return Err(Error::InvalidParameter(format!(
            "image {} too large for dense assembly (cap {}x{})",
            shape, JACOBIAN_SIZE_CAP, JACOBIAN_SIZE_CAP
        )));
    }
    let img_coeff = shape.halved();
    let lat_coeff = codec.latent_shape().halved();
    let ncols = img_coeff.len();
    let nrows = lat_coeff.len();
    let base = codec.encode(x)?;

    let mut blocks: [[DMatrix<f64>; 4]; 4] =
        std::array::from_fn(|_| std::array::from_fn(|_| DMatrix::zeros(nrows, ncols)));
    for band in Band::ALL {
        let mut col = 0;
        for r in 0..img_coeff.height {
            for c in 0..img_coeff.width {
                for ch in 0..img_coeff.channels {
                    let probe = band_probe(img_coeff, band, r, c, ch)?;
                    let dz = codec.encode(&x.add(&probe)?)?.sub(&base)?;
                    let response = dwt2(&dz)?;
                    for target in Band::ALL {
                        let data = response.band(target).data();
                        for (row, v) in data.iter().enumerate() {
                            blocks[band.index()][target.index()][(row, col)] = *v;
                        }
                    }
                    col += 1;
                }
            }
        }
    }

    let mut gains = [[0.0; 4]; 4];
    let mut spectra: [[Vec<f64>; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| vec![]));
    for i in 0..4 {
        for j in 0..4 {
            let svd = blocks[i][j].clone().svd(false, false);
            let mut sigmas: Vec<f64> = svd.singular_values.iter().copied().collect();
            sigmas.sort_by(|a, b| b.partial_cmp(a).unwrap());
            gains[i][j] = sigmas.first().copied().unwrap_or(0.0);
            spectra[i][j] = sigmas;
        }
    }
    Ok(BandGainReport { gains, spectra })
}
