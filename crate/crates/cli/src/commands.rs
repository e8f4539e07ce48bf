//! Subcommand bodies: shared world assembly from a resolved config, the
//! four commands, and the error type the exit codes are derived from.

use std::fs;
use std::path::Path;

use multlfg_core::{
    add_noise, band_project, composite_run, concept_target, dwt2, gaussian_field, idwt2,
    interference, jacobian_band_analysis, linear_schedule, localized_field, multlfg_run,
    predict_clean, predict_noise, spearman, switch_run, Band, CodecKind, ConceptModel, Field,
    GuidanceConfig, Rng, RunTrace, Schedule, Shape, ToyCodec, WeightMode, JACOBIAN_SIZE_CAP,
};

use crate::config::{self, Method, RunConfig};
use crate::output;
use crate::RunArgs;

#[derive(Debug)]
pub enum CmdError {
    /// Bad settings; maps to exit code 2.
    Config(String),
    /// Numeric or io failure during an otherwise valid run; exit code 3.
    Runtime(String),
}

impl From<multlfg_core::Error> for CmdError {
    fn from(e: multlfg_core::Error) -> Self {
        CmdError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CmdError {
    fn from(e: csv::Error) -> Self {
        CmdError::Runtime(e.to_string())
    }
}

/// Everything a command needs, assembled once from the resolved config.
struct World {
    cfg: RunConfig,
    hash: String,
    sched: Schedule,
    codec: ToyCodec,
    guidance: GuidanceConfig,
    concepts: Vec<ConceptModel>,
    /// Image-space targets, index-aligned with `concepts`.
    targets: Vec<Field>,
}

fn build_world(args: &RunArgs) -> Result<World, CmdError> {
    let cfg = config::resolve(args).map_err(CmdError::Config)?;
    let image_shape = Shape::new(cfg.image_size, cfg.image_size, 1);
    if cfg.codec == CodecKind::Downsample && cfg.image_size % 4 != 0 {
        return Err(CmdError::Config(format!(
            "image_size {} with the downsample codec leaves an odd latent; use a multiple of 4",
            cfg.image_size
        )));
    }
    let codec =
        ToyCodec::new(cfg.codec, image_shape).map_err(|e| CmdError::Config(e.to_string()))?;
    let sched = linear_schedule(cfg.steps, cfg.beta_start, cfg.beta_end)
        .map_err(|e| CmdError::Config(e.to_string()))?;
    let mut targets = Vec::with_capacity(cfg.n());
    let mut concepts = Vec::with_capacity(cfg.n());
    for spec in &cfg.concepts {
        let image = concept_target(spec.family, image_shape, spec.amplitude, spec.seed)?;
        concepts.push(ConceptModel::with_profile(
            codec.encode(&image)?,
            spec.family.band(),
        ));
        targets.push(image);
    }
    let guidance = GuidanceConfig {
        band_scales: cfg.band_scales,
        top_k: cfg.top_k,
        area_threshold: cfg.tau,
        epsilon_fd: cfg.eps_fd,
        num_concepts: cfg.n(),
    };
    let hash = cfg.hash();
    Ok(World {
        cfg,
        hash,
        sched,
        codec,
        guidance,
        concepts,
        targets,
    })
}

/// Run the configured sampler and guard the result against overflow from
/// extreme but individually valid settings.
fn run_trace(world: &World) -> Result<RunTrace, CmdError> {
    let mut rng = Rng::new(world.cfg.seed);
    let trace = match world.cfg.method {
        Method::Multlfg => {
            let mode = if world.cfg.uniform_weights {
                WeightMode::Uniform
            } else {
                WeightMode::Adaptive
            };
            multlfg_run(
                &world.concepts,
                &world.guidance,
                &world.sched,
                &world.codec,
                &mut rng,
                world.cfg.deterministic,
                mode,
            )?
        }
        Method::Composite => composite_run(
            &world.concepts,
            world.cfg.scale,
            &world.sched,
            &world.codec,
            &mut rng,
            world.cfg.deterministic,
        )?,
        Method::Switch => switch_run(
            &world.concepts,
            world.cfg.scale,
            &world.sched,
            &world.codec,
            &mut rng,
            world.cfg.deterministic,
        )?,
    };
    if !trace.final_image.data().iter().all(|v| v.is_finite()) {
        return Err(CmdError::Runtime(
            "final image contains non-finite values".into(),
        ));
    }
    Ok(trace)
}

fn write_energy_csv(path: &Path, hash: &str, trace: &RunTrace) -> Result<(), CmdError> {
    let mut w = output::csv_writer(path, hash)?;
    w.write_record(["t", "E_LL", "E_LH", "E_HL", "E_HH"])?;
    for (t, e) in trace.energy_trajectory() {
        w.write_record([
            t.to_string(),
            e[0].to_string(),
            e[1].to_string(),
            e[2].to_string(),
            e[3].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-band absolute and relative L2 error of `image` against `target`.
/// Bands where the target is empty get a NaN relative error.
fn band_errors(image: &Field, target: &Field) -> Result<[(f64, f64); 4], CmdError> {
    let diff = image.sub(target)?;
    let mut out = [(0.0, 0.0); 4];
    for band in Band::ALL {
        let err = band_project(&diff, band)?.l2_norm();
        let denom = band_project(target, band)?.l2_norm();
        let rel = if denom > 0.0 { err / denom } else { f64::NAN };
        out[band.index()] = (err, rel);
    }
    Ok(out)
}

pub fn cmd_compose(args: &RunArgs) -> Result<(), CmdError> {
    let world = build_world(args)?;
    fs::create_dir_all(&world.cfg.out)?;
    let trace = run_trace(&world)?;

    let weights_path = world.cfg.out.join("weights.csv");
    let mut w = output::csv_writer(&weights_path, &world.hash)?;
    w.write_record(["t", "band", "concept", "weight"])?;
    for step in &trace.steps {
        for band in Band::ALL {
            for (concept, weight) in step.weights.band(band).iter().enumerate() {
                w.write_record([
                    step.timestep.to_string(),
                    band.name().to_string(),
                    concept.to_string(),
                    weight.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;

    write_energy_csv(&world.cfg.out.join("energy.csv"), &world.hash, &trace)?;

    let errors_path = world.cfg.out.join("errors.csv");
    let mut w = output::csv_writer(&errors_path, &world.hash)?;
    w.write_record(["concept", "family", "band", "abs_error", "rel_error"])?;
    let mut summaries = Vec::with_capacity(world.cfg.n());
    for (i, (spec, target)) in world.cfg.concepts.iter().zip(&world.targets).enumerate() {
        let per_band = band_errors(&trace.final_image, target)?;
        for band in Band::ALL {
            let (abs, rel) = per_band[band.index()];
            w.write_record([
                i.to_string(),
                spec.family.name().to_string(),
                band.name().to_string(),
                abs.to_string(),
                rel.to_string(),
            ])?;
        }
        let spatial = trace.final_image.sub(target)?.l2_norm() / target.l2_norm();
        let owned = spec.family.band();
        summaries.push((spec.family, spatial, owned, per_band[owned.index()].1));
    }
    w.flush()?;

    output::write_pgm(
        &world.cfg.out.join("final.pgm"),
        &trace.final_image,
        &world.hash,
    )?;

    println!("config-hash: {}", world.hash);
    println!(
        "method: {}  n: {}  k: {}  steps: {}  seed: {}",
        world.cfg.method.name(),
        world.cfg.n(),
        world.cfg.top_k,
        world.cfg.steps,
        world.cfg.seed
    );
    for (i, (family, spatial, owned, owned_rel)) in summaries.iter().enumerate() {
        println!(
            "concept {i} ({}): rel_error {spatial:.6e}, {} band {owned_rel:.6e}",
            family.name(),
            owned.name()
        );
    }
    println!(
        "wrote final.pgm, weights.csv, energy.csv, errors.csv in {}",
        world.cfg.out.display()
    );
    Ok(())
}

pub fn cmd_freq_analysis(args: &RunArgs) -> Result<(), CmdError> {
    let world = build_world(args)?;
    fs::create_dir_all(&world.cfg.out)?;
    let trace = run_trace(&world)?;

    write_energy_csv(&world.cfg.out.join("energy.csv"), &world.hash, &trace)?;

    let traj = trace.energy_trajectory();
    let ts: Vec<f64> = traj.iter().map(|(t, _)| *t as f64).collect();
    let mut w = output::csv_writer(&world.cfg.out.join("trend.csv"), &world.hash)?;
    w.write_record(["band", "spearman_t"])?;
    println!("config-hash: {}", world.hash);
    for band in Band::ALL {
        let es: Vec<f64> = traj.iter().map(|(_, e)| e[band.index()]).collect();
        let rho = spearman(&ts, &es).unwrap_or(f64::NAN);
        w.write_record([band.name().to_string(), rho.to_string()])?;
        println!("trend rho(t, E_{}) = {rho:.6}", band.name());
    }
    w.flush()?;
    println!(
        "wrote energy.csv, trend.csv in {}",
        world.cfg.out.display()
    );
    Ok(())
}

struct Check {
    name: &'static str,
    worst: f64,
    limit: f64,
}

impl Check {
    fn passed(&self) -> bool {
        self.worst.is_finite() && self.worst < self.limit
    }
}

/// Shape rotation for the verify corpus: odd channel counts, non-square
/// sizes, and the configured size all get exercised.
fn corpus_shapes(image_size: usize) -> [Shape; 5] {
    [
        Shape::new(image_size, image_size, 1),
        Shape::new(64, 64, 3),
        Shape::new(16, 16, 2),
        Shape::new(8, 12, 1),
        Shape::new(4, 4, 3),
    ]
}

fn check_reconstruction(seed: u64, shapes: &[Shape]) -> Result<Check, CmdError> {
    let mut rng = Rng::new(seed);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let x = gaussian_field(shapes[i % shapes.len()], &mut rng);
        let back = idwt2(&dwt2(&x)?)?;
        worst = worst.max(back.max_abs_diff(&x)?);
    }
    Ok(Check {
        name: "reconstruction",
        worst,
        limit: 1e-12,
    })
}

fn check_parseval(seed: u64, shapes: &[Shape]) -> Result<Check, CmdError> {
    let mut rng = Rng::new(seed);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let x = gaussian_field(shapes[i % shapes.len()], &mut rng);
        let bands = dwt2(&x)?;
        worst = worst.max((bands.total_energy() - x.l2_norm_sq()).abs() / x.l2_norm_sq());
    }
    Ok(Check {
        name: "energy identity",
        worst,
        limit: 1e-12,
    })
}

fn check_linearity(seed: u64, shapes: &[Shape]) -> Result<Check, CmdError> {
    let mut rng = Rng::new(seed);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let shape = shapes[i % shapes.len()];
        let x = gaussian_field(shape, &mut rng);
        let y = gaussian_field(shape, &mut rng);
        let a = rng.uniform() * 4.0 - 2.0;
        let b = rng.uniform() * 4.0 - 2.0;
        let lhs = dwt2(&x.lin_comb(a, &y, b)?)?;
        let bx = dwt2(&x)?;
        let by = dwt2(&y)?;
        let mut diff_sq = 0.0;
        for band in Band::ALL {
            let rhs = bx.band(band).lin_comb(a, by.band(band), b)?;
            diff_sq += lhs.band(band).sub(&rhs)?.l2_norm_sq();
        }
        worst = worst.max(diff_sq.sqrt() / lhs.total_energy().sqrt());
    }
    Ok(Check {
        name: "linearity",
        worst,
        limit: 1e-12,
    })
}

fn check_orthogonality(seed: u64, shapes: &[Shape]) -> Result<Check, CmdError> {
    let mut rng = Rng::new(seed);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let x = gaussian_field(shapes[i % shapes.len()], &mut rng);
        let norm_sq = x.l2_norm_sq();
        let projections: Vec<Field> = Band::ALL
            .iter()
            .map(|&b| band_project(&x, b))
            .collect::<Result<_, _>>()?;
        for (j, p) in projections.iter().enumerate() {
            for q in &projections[j + 1..] {
                worst = worst.max(p.inner(q)?.abs() / norm_sq);
            }
        }
    }
    Ok(Check {
        name: "band orthogonality",
        worst,
        limit: 1e-10,
    })
}

fn check_variance_decomposition(seed: u64, shapes: &[Shape]) -> Result<Check, CmdError> {
    let mut rng = Rng::new(seed);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let shape = shapes[i % shapes.len()];
        let parts: Vec<Field> = Band::ALL
            .iter()
            .map(|&b| band_project(&gaussian_field(shape, &mut rng), b))
            .collect::<Result<_, _>>()?;
        let mut total = Field::zeros(shape);
        let mut sum_sq = 0.0;
        for p in &parts {
            total = total.add(p)?;
            sum_sq += p.l2_norm_sq();
        }
        worst = worst.max((total.l2_norm_sq() - sum_sq).abs() / sum_sq);
    }
    Ok(Check {
        name: "variance decomposition",
        worst,
        limit: 1e-10,
    })
}

fn check_schedule_roundtrip(seed: u64, sched: &Schedule, image_size: usize) -> Result<Check, CmdError> {
    let mut rng = Rng::new(seed);
    let shape = Shape::new(image_size, image_size, 1);
    let mut worst = 0.0f64;
    let probes = [0, sched.len() / 2, sched.len() - 1];
    for _ in 0..5 {
        let x0 = gaussian_field(shape, &mut rng);
        let eps = gaussian_field(shape, &mut rng);
        for &t in &probes {
            let z = add_noise(&x0, &eps, t, sched)?;
            let x0_back = predict_clean(&z, &eps, t, sched)?;
            let eps_back = predict_noise(&z, &x0_back, t, sched)?;
            worst = worst.max(x0_back.max_abs_diff(&x0)? / x0.max_abs());
            worst = worst.max(eps_back.max_abs_diff(&eps)? / eps.max_abs());
        }
    }
    Ok(Check {
        name: "schedule roundtrip",
        worst,
        limit: 1e-9,
    })
}

/// Flat weights, equal band scales, and k = n must reproduce plain score
/// averaging through the whole loop, not just one step.
fn check_equivalence_oracle(seed: u64) -> Result<Check, CmdError> {
    let shape = Shape::new(16, 16, 1);
    let codec = ToyCodec::identity(shape);
    let sched = linear_schedule(10, 1e-4, 2e-2).map_err(CmdError::from)?;
    let concepts = vec![
        ConceptModel::from_image(
            &concept_target(multlfg_core::ConceptFamily::Blob, shape, 1.0, 100)?,
            &codec,
        )?,
        ConceptModel::from_image(
            &concept_target(multlfg_core::ConceptFamily::Checker, shape, 1.0, 200)?,
            &codec,
        )?,
    ];
    let cfg = GuidanceConfig::new(3.0, concepts.len(), concepts.len());
    let mut rng_a = Rng::new(seed);
    let a = multlfg_run(
        &concepts,
        &cfg,
        &sched,
        &codec,
        &mut rng_a,
        true,
        WeightMode::Uniform,
    )?;
    let mut rng_b = Rng::new(seed);
    let b = composite_run(&concepts, 3.0, &sched, &codec, &mut rng_b, true)?;
    Ok(Check {
        name: "equivalence oracle",
        worst: a.final_image.max_abs_diff(&b.final_image)?,
        limit: 1e-9,
    })
}

fn check_self_interference(seed: u64, image_size: usize) -> Result<Check, CmdError> {
    let shape = Shape::new(image_size, image_size, 1);
    let mut worst = 0.0f64;
    for i in 0..5u64 {
        let x = localized_field(shape, 1.0, seed.wrapping_add(i))?;
        let report = interference(&x, &x)?;
        worst = worst.max((report.spatial - 1.0).abs());
        let bands = dwt2(&x)?;
        for band in Band::ALL {
            if bands.band(band).l2_norm() > 0.0 {
                worst = worst.max((report.per_band[band.index()] - 1.0).abs());
            }
        }
    }
    Ok(Check {
        name: "self interference",
        worst,
        limit: 1e-12,
    })
}

pub fn cmd_verify(args: &RunArgs) -> Result<(), CmdError> {
    let world = build_world(args)?;
    fs::create_dir_all(&world.cfg.out)?;
    let seed = world.cfg.seed;
    let shapes = corpus_shapes(world.cfg.image_size);

    let checks = [
        check_reconstruction(seed, &shapes)?,
        check_parseval(seed.wrapping_add(1), &shapes)?,
        check_linearity(seed.wrapping_add(2), &shapes)?,
        check_orthogonality(seed.wrapping_add(3), &shapes)?,
        check_variance_decomposition(seed.wrapping_add(4), &shapes)?,
        check_schedule_roundtrip(seed.wrapping_add(5), &world.sched, world.cfg.image_size)?,
        check_equivalence_oracle(seed)?,
        check_self_interference(seed.wrapping_add(6), world.cfg.image_size)?,
    ];

    println!("config-hash: {}", world.hash);
    println!("{:<24} {:>12} {:>9}  status", "check", "worst", "limit");
    let mut failed = 0;
    for check in &checks {
        let status = if check.passed() { "ok" } else { "FAIL" };
        println!(
            "{:<24} {:>12.3e} {:>9.0e}  {status}",
            check.name, check.worst, check.limit
        );
        if !check.passed() {
            failed += 1;
        }
    }

    // Interference distribution over localized concept pairs. The strict
    // band-vs-spatial inequality is counted, not asserted.
    let shape = Shape::new(world.cfg.image_size, world.cfg.image_size, 1);
    let base = seed.wrapping_mul(1_000_003);
    let path = world.cfg.out.join("lemma1.csv");
    let mut w = output::csv_writer(&path, &world.hash)?;
    w.write_record(["pair", "abs_i_spatial", "max_abs_i_band"])?;
    let pairs = 1000u64;
    let mut strict = 0u64;
    for i in 0..pairs {
        let a = localized_field(shape, 1.0, base.wrapping_add(2 * i))?;
        let b = localized_field(shape, 1.0, base.wrapping_add(2 * i + 1))?;
        let report = interference(&a, &b)?;
        let spatial = report.spatial.abs();
        let band = report.max_band_abs();
        if band < spatial {
            strict += 1;
        }
        w.write_record([i.to_string(), spatial.to_string(), band.to_string()])?;
    }
    w.flush()?;
    println!(
        "interference report: {pairs} pairs in {}; max band < spatial in {:.1}%",
        path.display(),
        100.0 * strict as f64 / pairs as f64
    );

    if failed > 0 {
        return Err(CmdError::Runtime(format!(
            "{failed} invariant check(s) failed"
        )));
    }
    println!("all checks passed");
    Ok(())
}

pub fn cmd_jacobian(args: &RunArgs) -> Result<(), CmdError> {
    let world = build_world(args)?;
    if world.cfg.image_size > JACOBIAN_SIZE_CAP {
        return Err(CmdError::Config(format!(
            "image_size {} exceeds the dense-assembly cap {JACOBIAN_SIZE_CAP}",
            world.cfg.image_size
        )));
    }
    fs::create_dir_all(&world.cfg.out)?;
    let report = jacobian_band_analysis(&world.targets[0], &world.codec)?;

    let path = world.cfg.out.join("jacobian.csv");
    let mut w = output::csv_writer(&path, &world.hash)?;
    w.write_record(["image_band", "LL", "LH", "HL", "HH"])?;
    for ib in Band::ALL {
        let mut record = vec![ib.name().to_string()];
        for lb in Band::ALL {
            record.push(report.gain(ib, lb).to_string());
        }
        w.write_record(&record)?;
    }
    w.flush()?;

    println!("config-hash: {}", world.hash);
    println!("encoder gains, image band (rows) to latent band (cols)");
    println!("{:>4} {:>13} {:>13} {:>13} {:>13}", "", "LL", "LH", "HL", "HH");
    for ib in Band::ALL {
        println!(
            "{:>4} {:>13.6e} {:>13.6e} {:>13.6e} {:>13.6e}",
            ib.name(),
            report.gain(ib, Band::Ll),
            report.gain(ib, Band::Lh),
            report.gain(ib, Band::Hl),
            report.gain(ib, Band::Hh),
        );
    }
    println!("wrote jacobian.csv in {}", world.cfg.out.display());
    Ok(())
}
