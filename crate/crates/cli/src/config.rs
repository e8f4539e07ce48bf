//! Run configuration: flat `key = value` files, flag overrides, validation,
//! and the canonical serialization whose SHA-256 stamps every output file.

use std::fmt::Write as _;
use std::path::PathBuf;

use multlfg_core::{CodecKind, ConceptFamily};
use sha2::{Digest, Sha256};

use crate::RunArgs;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Multlfg,
    Composite,
    Switch,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Multlfg => "multlfg",
            Method::Composite => "composite",
            Method::Switch => "switch",
        }
    }

    fn parse(s: &str) -> Result<Method, String> {
        match s {
            "multlfg" => Ok(Method::Multlfg),
            "composite" => Ok(Method::Composite),
            "switch" => Ok(Method::Switch),
            other => Err(format!(
                "unknown method {other:?} (expected multlfg, composite, or switch)"
            )),
        }
    }
}

/// One analytic concept: generator family, generator seed, amplitude.
#[derive(Clone, Debug)]
pub struct ConceptSpec {
    pub family: ConceptFamily,
    pub seed: u64,
    pub amplitude: f64,
}

impl ConceptSpec {
    fn parse(s: &str) -> Result<ConceptSpec, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!(
                "concept {s:?} must be family:seed:amplitude"
            ));
        }
        let family = parts[0]
            .parse::<ConceptFamily>()
            .map_err(|e| e.to_string())?;
        let seed = parts[1]
            .parse::<u64>()
            .map_err(|_| format!("bad concept seed {:?}", parts[1]))?;
        let amplitude = parts[2]
            .parse::<f64>()
            .map_err(|_| format!("bad concept amplitude {:?}", parts[2]))?;
        Ok(ConceptSpec {
            family,
            seed,
            amplitude,
        })
    }

    fn canonical(&self) -> String {
        format!("{}:{}:{}", self.family.name(), self.seed, self.amplitude)
    }
}

/// Fully resolved settings for one command invocation.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub seed: u64,
    pub method: Method,
    pub steps: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    pub scale: f64,
    pub band_scales: [f64; 4],
    pub top_k: usize,
    pub tau: f64,
    pub eps_fd: f64,
    pub concepts: Vec<ConceptSpec>,
    pub codec: CodecKind,
    pub deterministic: bool,
    pub uniform_weights: bool,
    pub image_size: usize,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn n(&self) -> usize {
        self.concepts.len()
    }

    /// Sorted `key = value` listing of everything that determines the run
    /// (the output directory is location, not experiment, and is excluded).
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        let scales = self
            .band_scales
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let concepts = self
            .concepts
            .iter()
            .map(ConceptSpec::canonical)
            .collect::<Vec<_>>()
            .join(";");
        let _ = writeln!(s, "band_scales = {scales}");
        let _ = writeln!(s, "beta_end = {}", self.beta_end);
        let _ = writeln!(s, "beta_start = {}", self.beta_start);
        let _ = writeln!(s, "codec = {}", self.codec.name());
        let _ = writeln!(s, "concepts = {concepts}");
        let _ = writeln!(s, "deterministic = {}", self.deterministic);
        let _ = writeln!(s, "eps_fd = {}", self.eps_fd);
        let _ = writeln!(s, "image_size = {}", self.image_size);
        let _ = writeln!(s, "method = {}", self.method.name());
        let _ = writeln!(s, "n = {}", self.n());
        let _ = writeln!(s, "scale = {}", self.scale);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "tau = {}", self.tau);
        let _ = writeln!(s, "top_k = {}", self.top_k);
        let _ = writeln!(s, "uniform_weights = {}", self.uniform_weights);
        s
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_text().as_bytes());
        let mut hex = String::with_capacity(64);
        for byte in digest {
            let _ = write!(hex, "{byte:02x}");
        }
        hex
    }
}

/// Accumulates file values and flag overrides before resolution.
#[derive(Clone, Debug, Default)]
struct Partial {
    seed: Option<u64>,
    method: Option<Method>,
    steps: Option<usize>,
    beta_start: Option<f64>,
    beta_end: Option<f64>,
    scale: Option<f64>,
    band_scales: Option<[f64; 4]>,
    top_k: Option<usize>,
    tau: Option<f64>,
    eps_fd: Option<f64>,
    n: Option<usize>,
    concepts: Option<Vec<ConceptSpec>>,
    codec: Option<CodecKind>,
    deterministic: Option<bool>,
    uniform_weights: Option<bool>,
    equal_scales: bool,
    image_size: Option<usize>,
    out: Option<PathBuf>,
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(format!("expected true or false, got {other:?}")),
    }
}

fn parse_band_scales(v: &str) -> Result<[f64; 4], String> {
    let parts: Vec<&str> = v.split(',').collect();
    if parts.len() != 4 {
        return Err(format!(
            "band scales need four comma-separated values (LL,LH,HL,HH), got {v:?}"
        ));
    }
    let mut out = [0.0; 4];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = part
            .trim()
            .parse::<f64>()
            .map_err(|_| format!("bad band scale {part:?}"))?;
    }
    Ok(out)
}

impl Partial {
    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "seed" => {
                self.seed = Some(value.parse().map_err(|_| format!("bad seed {value:?}"))?)
            }
            "method" => self.method = Some(Method::parse(value)?),
            "steps" => {
                self.steps = Some(value.parse().map_err(|_| format!("bad steps {value:?}"))?)
            }
            "beta_start" => {
                self.beta_start = Some(
                    value
                        .parse()
                        .map_err(|_| format!("bad beta_start {value:?}"))?,
                )
            }
            "beta_end" => {
                self.beta_end = Some(
                    value
                        .parse()
                        .map_err(|_| format!("bad beta_end {value:?}"))?,
                )
            }
            "scale" => {
                self.scale = Some(value.parse().map_err(|_| format!("bad scale {value:?}"))?)
            }
            "band_scales" => self.band_scales = Some(parse_band_scales(value)?),
            "top_k" => {
                self.top_k = Some(value.parse().map_err(|_| format!("bad top_k {value:?}"))?)
            }
            "tau" => self.tau = Some(value.parse().map_err(|_| format!("bad tau {value:?}"))?),
            "eps_fd" => {
                self.eps_fd = Some(value.parse().map_err(|_| format!("bad eps_fd {value:?}"))?)
            }
            "n" => self.n = Some(value.parse().map_err(|_| format!("bad n {value:?}"))?),
            "concepts" => {
                let list = value
                    .split(';')
                    .map(|item| ConceptSpec::parse(item.trim()))
                    .collect::<Result<Vec<_>, _>>()?;
                self.concepts = Some(list);
            }
            "codec" => {
                self.codec = Some(value.parse::<CodecKind>().map_err(|e| e.to_string())?)
            }
            "deterministic" => self.deterministic = Some(parse_bool(value)?),
            "uniform_weights" => self.uniform_weights = Some(parse_bool(value)?),
            "equal_scales" => self.equal_scales = parse_bool(value)?,
            "image_size" => {
                self.image_size = Some(
                    value
                        .parse()
                        .map_err(|_| format!("bad image_size {value:?}"))?,
                )
            }
            "out" => self.out = Some(PathBuf::from(value)),
            other => return Err(format!("unknown config key {other:?}")),
        }
        Ok(())
    }

    fn parse_file(text: &str) -> Result<Partial, String> {
        let mut partial = Partial::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", idx + 1))?;
            partial
                .set(key.trim(), value.trim())
                .map_err(|e| format!("line {}: {e}", idx + 1))?;
        }
        Ok(partial)
    }

    fn apply_flags(&mut self, args: &RunArgs) -> Result<(), String> {
        if let Some(v) = args.seed {
            self.seed = Some(v);
        }
        if let Some(v) = &args.method {
            self.method = Some(Method::parse(v)?);
        }
        if let Some(v) = args.n {
            self.n = Some(v);
        }
        if let Some(v) = args.k {
            self.top_k = Some(v);
        }
        if let Some(v) = args.steps {
            self.steps = Some(v);
        }
        if let Some(v) = args.scale {
            self.scale = Some(v);
        }
        if let Some(v) = &args.band_scales {
            self.band_scales = Some(parse_band_scales(v)?);
        }
        if let Some(v) = args.tau {
            self.tau = Some(v);
        }
        if let Some(v) = args.eps_fd {
            self.eps_fd = Some(v);
        }
        if let Some(v) = &args.codec {
            self.codec = Some(v.parse::<CodecKind>().map_err(|e| e.to_string())?);
        }
        if args.deterministic {
            self.deterministic = Some(true);
        }
        if args.uniform_weights {
            self.uniform_weights = Some(true);
        }
        if args.equal_scales {
            self.equal_scales = true;
        }
        if let Some(v) = &args.out {
            self.out = Some(v.clone());
        }
        Ok(())
    }
}

/// Seed-and-family defaults when only a concept count is given: the three
/// generator families cycle, seeds stay distinct and stable.
fn default_concepts(n: usize) -> Vec<ConceptSpec> {
    let families = [
        ConceptFamily::Blob,
        ConceptFamily::Checker,
        ConceptFamily::Stripes,
    ];
    (0..n)
        .map(|i| ConceptSpec {
            family: families[i % families.len()],
            seed: 100 + i as u64,
            amplitude: 1.0,
        })
        .collect()
}

fn validate(cfg: &RunConfig) -> Result<(), String> {
    if cfg.steps == 0 {
        return Err("steps must be at least 1".into());
    }
    if !(cfg.beta_start > 0.0 && cfg.beta_end < 1.0 && cfg.beta_start <= cfg.beta_end) {
        return Err(format!(
            "betas must satisfy 0 < beta_start <= beta_end < 1, got {} and {}",
            cfg.beta_start, cfg.beta_end
        ));
    }
    if !cfg.scale.is_finite() {
        return Err(format!("scale {} must be finite", cfg.scale));
    }
    if cfg.band_scales.iter().any(|s| !s.is_finite()) {
        return Err("band scales must be finite".into());
    }
    if cfg.top_k == 0 {
        return Err("top_k must be at least 1".into());
    }
    if !(cfg.tau >= 0.0 && cfg.tau.is_finite()) {
        return Err(format!("tau {} must be finite and non-negative", cfg.tau));
    }
    if !(cfg.eps_fd > 0.0 && cfg.eps_fd.is_finite()) {
        return Err(format!("eps_fd {} must be positive", cfg.eps_fd));
    }
    if cfg.concepts.is_empty() {
        return Err("need at least one concept".into());
    }
    for c in &cfg.concepts {
        if !c.amplitude.is_finite() || c.amplitude == 0.0 {
            return Err(format!(
                "concept amplitude {} must be finite and nonzero",
                c.amplitude
            ));
        }
    }
    if cfg.image_size < 2 || cfg.image_size % 2 != 0 {
        return Err(format!(
            "image_size {} must be even and at least 2",
            cfg.image_size
        ));
    }
    Ok(())
}

/// Load the optional config file, apply flag overrides, fill defaults,
/// and validate. Any failure here is a config error (exit code 2).
pub fn resolve(args: &RunArgs) -> Result<RunConfig, String> {
    let mut partial = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            Partial::parse_file(&text)?
        }
        None => Partial::default(),
    };
    partial.apply_flags(args)?;

    let concepts = match (partial.n, partial.concepts) {
        (None, None) => default_concepts(2),
        (Some(n), None) => default_concepts(n),
        (None, Some(list)) => list,
        (Some(n), Some(list)) => {
            if n != list.len() {
                return Err(format!(
                    "n = {n} does not match the {} configured concepts",
                    list.len()
                ));
            }
            list
        }
    };

    let scale = partial.scale.unwrap_or(7.0);
    let band_scales = if partial.equal_scales {
        [scale; 4]
    } else {
        partial.band_scales.unwrap_or([scale; 4])
    };
    let top_k = partial.top_k.unwrap_or(2).min(concepts.len());

    let cfg = RunConfig {
        seed: partial.seed.unwrap_or(0),
        method: partial.method.unwrap_or(Method::Multlfg),
        steps: partial.steps.unwrap_or(100),
        beta_start: partial.beta_start.unwrap_or(1e-4),
        beta_end: partial.beta_end.unwrap_or(2e-2),
        scale,
        band_scales,
        top_k,
        tau: partial.tau.unwrap_or(0.01),
        eps_fd: partial.eps_fd.unwrap_or(1e-5),
        concepts,
        codec: partial.codec.unwrap_or(CodecKind::Identity),
        deterministic: partial.deterministic.unwrap_or(false),
        uniform_weights: partial.uniform_weights.unwrap_or(false),
        image_size: partial.image_size.unwrap_or(32),
        out: partial.out.unwrap_or_else(|| PathBuf::from("out")),
    };
    validate(&cfg)?;
    Ok(cfg)
}
