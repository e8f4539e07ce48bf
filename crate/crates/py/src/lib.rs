//! Python bindings for the composition sandbox: fields, the wavelet
//! transform, schedules, and the three sampling loops. The surface keeps
//! plain Python types (lists, tuples, strings) so the module works
//! without numpy.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use multlfg_core as mc;

fn err(e: mc::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_band(name: &str) -> PyResult<mc::Band> {
    mc::Band::from_name(name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown band {name:?}, expected LL, LH, HL, or HH")))
}

fn parse_codec(kind: &str, shape: mc::Shape) -> PyResult<mc::ToyCodec> {
    let kind: mc::CodecKind = kind.parse().map_err(err)?;
    mc::ToyCodec::new(kind, shape).map_err(err)
}

/// Dense height x width x channels array of f64 samples.
#[pyclass(name = "Field", from_py_object)]
#[derive(Clone)]
struct PyField {
    inner: mc::Field,
}

#[pymethods]
impl PyField {
    #[new]
    #[pyo3(signature = (height, width, channels = 1))]
    fn new(height: usize, width: usize, channels: usize) -> PyField {
        PyField {
            inner: mc::Field::zeros(mc::Shape::new(height, width, channels)),
        }
    }

    #[staticmethod]
    #[pyo3(signature = (height, width, channels, data))]
    fn from_data(height: usize, width: usize, channels: usize, data: Vec<f64>) -> PyResult<PyField> {
        let inner =
            mc::Field::from_vec(mc::Shape::new(height, width, channels), data).map_err(err)?;
        Ok(PyField { inner })
    }

    #[getter]
    fn shape(&self) -> (usize, usize, usize) {
        let s = self.inner.shape();
        (s.height, s.width, s.channels)
    }

    /// Row-major sample list (channel fastest).
    fn data(&self) -> Vec<f64> {
        self.inner.data().to_vec()
    }

    #[pyo3(signature = (row, col, channel = 0))]
    fn get(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.inner.get(row, col, channel)
    }

    fn add(&self, other: &PyField) -> PyResult<PyField> {
        Ok(PyField {
            inner: self.inner.add(&other.inner).map_err(err)?,
        })
    }

    fn sub(&self, other: &PyField) -> PyResult<PyField> {
        Ok(PyField {
            inner: self.inner.sub(&other.inner).map_err(err)?,
        })
    }

    fn scale(&self, s: f64) -> PyField {
        PyField {
            inner: self.inner.scale(s),
        }
    }

    fn l2_norm(&self) -> f64 {
        self.inner.l2_norm()
    }

    fn max_abs(&self) -> f64 {
        self.inner.max_abs()
    }

    fn max_abs_diff(&self, other: &PyField) -> PyResult<f64> {
        self.inner.max_abs_diff(&other.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        let s = self.inner.shape();
        format!("Field({}x{}x{})", s.height, s.width, s.channels)
    }
}

/// Linear beta schedule with the forward-noise algebra.
#[pyclass(name = "Schedule")]
struct PySchedule {
    inner: mc::Schedule,
}

#[pymethods]
impl PySchedule {
    #[staticmethod]
    #[pyo3(signature = (steps, beta_start = 1e-4, beta_end = 2e-2))]
    fn linear(steps: usize, beta_start: f64, beta_end: f64) -> PyResult<PySchedule> {
        Ok(PySchedule {
            inner: mc::linear_schedule(steps, beta_start, beta_end).map_err(err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn alpha_bar(&self, t: usize) -> f64 {
        self.inner.alpha_bar(t)
    }

    fn add_noise(&self, x0: &PyField, eps: &PyField, t: usize) -> PyResult<PyField> {
        Ok(PyField {
            inner: mc::add_noise(&x0.inner, &eps.inner, t, &self.inner).map_err(err)?,
        })
    }

    fn predict_clean(&self, z: &PyField, eps: &PyField, t: usize) -> PyResult<PyField> {
        Ok(PyField {
            inner: mc::predict_clean(&z.inner, &eps.inner, t, &self.inner).map_err(err)?,
        })
    }

    fn predict_noise(&self, z: &PyField, x0: &PyField, t: usize) -> PyResult<PyField> {
        Ok(PyField {
            inner: mc::predict_noise(&z.inner, &x0.inner, t, &self.inner).map_err(err)?,
        })
    }
}

/// Everything one sampling run produced.
#[pyclass(name = "RunResult")]
struct PyRunResult {
    final_image: mc::Field,
    energy: Vec<(usize, [f64; 4])>,
    weights: Vec<(usize, [Vec<f64>; 4])>,
}

impl PyRunResult {
    fn from_trace(trace: &mc::RunTrace) -> PyRunResult {
        let weights = trace
            .steps
            .iter()
            .map(|s| {
                let per_band = std::array::from_fn(|i| {
                    s.weights.band(mc::Band::ALL[i]).to_vec()
                });
                (s.timestep, per_band)
            })
            .collect();
        PyRunResult {
            final_image: trace.final_image.clone(),
            energy: trace.energy_trajectory(),
            weights,
        }
    }
}

#[pymethods]
impl PyRunResult {
    fn final_image(&self) -> PyField {
        PyField {
            inner: self.final_image.clone(),
        }
    }

    /// (timestep, (E_LL, E_LH, E_HL, E_HH)) per step in execution order.
    fn energy(&self) -> Vec<(usize, (f64, f64, f64, f64))> {
        self.energy
            .iter()
            .map(|&(t, e)| (t, (e[0], e[1], e[2], e[3])))
            .collect()
    }

    /// (timestep, per-concept weights) for one band, per step.
    fn weights(&self, band: &str) -> PyResult<Vec<(usize, Vec<f64>)>> {
        let band = parse_band(band)?;
        Ok(self
            .weights
            .iter()
            .map(|(t, per_band)| (*t, per_band[band.index()].clone()))
            .collect())
    }
}

/// Standard normal field drawn from the seeded generator.
#[pyfunction]
#[pyo3(signature = (height, width, channels = 1, seed = 0))]
fn gaussian(height: usize, width: usize, channels: usize, seed: u64) -> PyField {
    let mut rng = mc::Rng::new(seed);
    PyField {
        inner: mc::gaussian_field(mc::Shape::new(height, width, channels), &mut rng),
    }
}

/// Single-level analysis: returns the (LL, LH, HL, HH) coefficient fields.
#[pyfunction]
fn dwt2(x: &PyField) -> PyResult<(PyField, PyField, PyField, PyField)> {
    let bands = mc::dwt2(&x.inner).map_err(err)?;
    let wrap = |b: mc::Band| PyField {
        inner: bands.band(b).clone(),
    };
    Ok((
        wrap(mc::Band::Ll),
        wrap(mc::Band::Lh),
        wrap(mc::Band::Hl),
        wrap(mc::Band::Hh),
    ))
}

/// Inverse of `dwt2`.
#[pyfunction]
fn idwt2(ll: &PyField, lh: &PyField, hl: &PyField, hh: &PyField) -> PyResult<PyField> {
    let mut bands = mc::SubbandSet::zeros(ll.inner.shape());
    *bands.band_mut(mc::Band::Ll) = ll.inner.clone();
    *bands.band_mut(mc::Band::Lh) = lh.inner.clone();
    *bands.band_mut(mc::Band::Hl) = hl.inner.clone();
    *bands.band_mut(mc::Band::Hh) = hh.inner.clone();
    Ok(PyField {
        inner: mc::idwt2(&bands).map_err(err)?,
    })
}

/// Keep one band's content, zero the rest.
#[pyfunction]
fn band_project(x: &PyField, band: &str) -> PyResult<PyField> {
    Ok(PyField {
        inner: mc::band_project(&x.inner, parse_band(band)?).map_err(err)?,
    })
}

/// Normalized per-band energy fractions (LL, LH, HL, HH).
#[pyfunction]
fn band_energy_fractions(x: &PyField) -> PyResult<(f64, f64, f64, f64)> {
    let e = mc::band_energy_fractions(&x.inner).map_err(err)?;
    Ok((e[0], e[1], e[2], e[3]))
}

/// Deterministic band-pure target: family is "blob", "stripes", or
/// "checker"; the image is size x size with one channel.
#[pyfunction]
#[pyo3(signature = (family, size, amplitude = 1.0, seed = 0))]
fn concept_target(family: &str, size: usize, amplitude: f64, seed: u64) -> PyResult<PyField> {
    let family: mc::ConceptFamily = family.parse().map_err(err)?;
    Ok(PyField {
        inner: mc::concept_target(family, mc::Shape::new(size, size, 1), amplitude, seed)
            .map_err(err)?,
    })
}

/// Rank correlation of two equal-length sequences.
#[pyfunction]
fn spearman(xs: Vec<f64>, ys: Vec<f64>) -> PyResult<f64> {
    mc::spearman(&xs, &ys).map_err(err)
}

fn models_for(targets: &[PyField], codec: &mc::ToyCodec) -> PyResult<Vec<mc::ConceptModel>> {
    if targets.is_empty() {
        return Err(PyValueError::new_err("need at least one target"));
    }
    targets
        .iter()
        .map(|t| mc::ConceptModel::from_image(&t.inner, codec).map_err(err))
        .collect()
}

/// Adaptive per-subband composition of several image-space targets.
#[pyfunction]
#[pyo3(signature = (
    targets, scale = 7.0, top_k = None, tau = 0.01, eps_fd = 1e-5, steps = 50,
    beta_start = 1e-4, beta_end = 2e-2, seed = 0, deterministic = true,
    uniform_weights = false, codec = "identity"
))]
#[allow(clippy::too_many_arguments)]
fn multlfg_run(
    targets: Vec<PyField>,
    scale: f64,
    top_k: Option<usize>,
    tau: f64,
    eps_fd: f64,
    steps: usize,
    beta_start: f64,
    beta_end: f64,
    seed: u64,
    deterministic: bool,
    uniform_weights: bool,
    codec: &str,
) -> PyResult<PyRunResult> {
    let codec = parse_codec(codec, targets.first().map(|t| t.inner.shape()).unwrap_or(mc::Shape::new(2, 2, 1)))?;
    let concepts = models_for(&targets, &codec)?;
    let n = concepts.len();
    let mut cfg = mc::GuidanceConfig::new(scale, top_k.unwrap_or(n).min(n), n);
    cfg.area_threshold = tau;
    cfg.epsilon_fd = eps_fd;
    let sched = mc::linear_schedule(steps, beta_start, beta_end).map_err(err)?;
    let mode = if uniform_weights {
        mc::WeightMode::Uniform
    } else {
        mc::WeightMode::Adaptive
    };
    let mut rng = mc::Rng::new(seed);
    let trace = mc::multlfg_run(&concepts, &cfg, &sched, &codec, &mut rng, deterministic, mode)
        .map_err(err)?;
    Ok(PyRunResult::from_trace(&trace))
}

/// Plain score-averaging baseline over the same targets.
#[pyfunction]
#[pyo3(signature = (
    targets, scale = 7.0, steps = 50, beta_start = 1e-4, beta_end = 2e-2,
    seed = 0, deterministic = true, codec = "identity"
))]
#[allow(clippy::too_many_arguments)]
fn composite_run(
    targets: Vec<PyField>,
    scale: f64,
    steps: usize,
    beta_start: f64,
    beta_end: f64,
    seed: u64,
    deterministic: bool,
    codec: &str,
) -> PyResult<PyRunResult> {
    let codec = parse_codec(codec, targets.first().map(|t| t.inner.shape()).unwrap_or(mc::Shape::new(2, 2, 1)))?;
    let concepts = models_for(&targets, &codec)?;
    let sched = mc::linear_schedule(steps, beta_start, beta_end).map_err(err)?;
    let mut rng = mc::Rng::new(seed);
    let trace = mc::composite_run(&concepts, scale, &sched, &codec, &mut rng, deterministic)
        .map_err(err)?;
    Ok(PyRunResult::from_trace(&trace))
}

/// Round-robin baseline: one concept guides per step.
#[pyfunction]
#[pyo3(signature = (
    targets, scale = 7.0, steps = 50, beta_start = 1e-4, beta_end = 2e-2,
    seed = 0, deterministic = true, codec = "identity"
))]
#[allow(clippy::too_many_arguments)]
fn switch_run(
    targets: Vec<PyField>,
    scale: f64,
    steps: usize,
    beta_start: f64,
    beta_end: f64,
    seed: u64,
    deterministic: bool,
    codec: &str,
) -> PyResult<PyRunResult> {
    let codec = parse_codec(codec, targets.first().map(|t| t.inner.shape()).unwrap_or(mc::Shape::new(2, 2, 1)))?;
    let concepts = models_for(&targets, &codec)?;
    let sched = mc::linear_schedule(steps, beta_start, beta_end).map_err(err)?;
    let mut rng = mc::Rng::new(seed);
    let trace = mc::switch_run(&concepts, scale, &sched, &codec, &mut rng, deterministic)
        .map_err(err)?;
    Ok(PyRunResult::from_trace(&trace))
}

#[pymodule]
fn multlfg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyField>()?;
    m.add_class::<PySchedule>()?;
    m.add_class::<PyRunResult>()?;
    m.add_function(wrap_pyfunction!(gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(dwt2, m)?)?;
    m.add_function(wrap_pyfunction!(idwt2, m)?)?;
    m.add_function(wrap_pyfunction!(band_project, m)?)?;
    m.add_function(wrap_pyfunction!(band_energy_fractions, m)?)?;
    m.add_function(wrap_pyfunction!(concept_target, m)?)?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    m.add_function(wrap_pyfunction!(multlfg_run, m)?)?;
    m.add_function(wrap_pyfunction!(composite_run, m)?)?;
    m.add_function(wrap_pyfunction!(switch_run, m)?)?;
    Ok(())
}
