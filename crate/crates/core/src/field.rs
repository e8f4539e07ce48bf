//! Dense real-valued fields.
//!
//! A [`Field`] is a small `height x width x channels` block of `f64` stored
//! row-major as `(row, col, channel)`. Images, latents, noise tensors and
//! wavelet coefficient planes are all `Field`s; nothing here knows which is
//! which. All arithmetic is plain `f64` with no fused shortcuts, so results
//! are reproducible bit-for-bit across platforms.

use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Shape {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
}

impl Shape {
    pub fn new(height: usize, width: usize, channels: usize) -> Self {
        Shape {
            height,
            width,
            channels,
        }
    }

    pub fn len(&self) -> usize {
        self.height * self.width * self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Both spatial dimensions halved, channels kept.
    pub fn halved(&self) -> Shape {
        Shape::new(self.height / 2, self.width / 2, self.channels)
    }

    pub fn has_even_spatial(&self) -> bool {
        self.height % 2 == 0 && self.width % 2 == 0
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.height, self.width, self.channels)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    shape: Shape,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(shape: Shape) -> Self {
        Field {
            shape,
            data: vec![0.0; shape.len()],
        }
    }

    pub fn constant(shape: Shape, value: f64) -> Self {
        Field {
            shape,
            data: vec![value; shape.len()],
        }
    }

    /// Wrap raw data. Rejects length mismatches and non-finite entries up
    /// front so later operations can assume a clean field.
    pub fn from_vec(shape: Shape, data: Vec<f64>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::InvalidParameter(format!(
                "data length {} does not match shape {} ({} values)",
                data.len(),
                shape,
                shape.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite input value {bad}")));
        }
        Ok(Field { shape, data })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    fn idx(&self, row: usize, col: usize, ch: usize) -> usize {
        (row * self.shape.width + col) * self.shape.channels + ch
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, ch: usize) -> f64 {
        self.data[self.idx(row, col, ch)]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, ch: usize, value: f64) {
        let i = self.idx(row, col, ch);
        self.data[i] = value;
    }

    fn check_same_shape(&self, other: &Field) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                left: self.shape,
                right: other.shape,
            });
        }
        Ok(())
    }

    /// Euclidean inner product over all entries.
    pub fn inner(&self, other: &Field) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Squared L2 norm.
    pub fn l2_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            shape: self.shape,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.check_same_shape(other)?;
        Ok(Field {
            shape: self.shape,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Field {
        self.map(|v| v * s)
    }

    /// `ca * self + cb * other`, the one fused combination everything in the
    /// sampler reduces to.
    pub fn lin_comb(&self, ca: f64, other: &Field, cb: f64) -> Result<Field> {
        self.zip_map(other, |a, b| ca * a + cb * b)
    }

    pub fn abs(&self) -> Field {
        self.map(f64::abs)
    }

    /// Max absolute difference against another field of the same shape.
    pub fn max_abs_diff(&self, other: &Field) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// CSV serialization: one record per pixel row per channel, channels
    /// outermost, values in shortest round-trip decimal form, LF endings.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        for ch in 0..self.shape.channels {
            for row in 0..self.shape.height {
                for col in 0..self.shape.width {
                    if col > 0 {
                        w.write_all(b",")?;
                    }
                    write!(w, "{}", self.get(row, col, ch))?;
                }
                w.write_all(b"\n")?;
            }
        }
        Ok(())
    }

    /// Binary PGM (P5, maxval 65535) for single-channel fields. Values are
    /// mapped affinely from `[min, max]` onto `[0, 65535]`; the original
    /// range is recorded in a header comment so the mapping is invertible.
    /// Extra comment lines (without the leading `#`) can be passed in.
    pub fn write_pgm<W: Write>(&self, w: &mut W, comments: &[String]) -> Result<()> {
        if self.shape.channels != 1 {
            return Err(Error::InvalidParameter(format!(
                "PGM output requires a single channel, got shape {}",
                self.shape
            )));
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.data {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if self.data.is_empty() {
            lo = 0.0;
            hi = 0.0;
        }
        writeln!(w, "P5")?;
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        // Fixed precision keeps the header stable when two algebraically
        // equal pipelines differ in the last few ulps.
        writeln!(w, "# range min={lo:.9e} max={hi:.9e}")?;
        writeln!(w, "{} {}", self.shape.width, self.shape.height)?;
        writeln!(w, "65535")?;
        let span = hi - lo;
        for row in 0..self.shape.height {
            for col in 0..self.shape.width {
                let v = self.get(row, col, 0);
                let q = if span > 0.0 {
                    (((v - lo) / span) * 65535.0).round().clamp(0.0, 65535.0) as u16
                } else {
                    0
                };
                w.write_all(&q.to_be_bytes())?;
            }
        }
        Ok(())
    }
}

/// Field of i.i.d. standard normal samples, filled in storage order.
pub fn gaussian_field(shape: Shape, rng: &mut Rng) -> Field {
    let mut data = Vec::with_capacity(shape.len());
    for _ in 0..shape.len() {
        data.push(rng.normal());
    }
    Field { shape, data }
}
