//! Acceptance gate: thirteen numbered checks covering the transform, the
//! guidance algebra, the sampler oracles, the desk-scale experiments, and
//! the binary's file contract. One line prints per check; the test fails
//! if any check does. The frozen constants are regression values from a
//! reference run of this implementation, recorded before they were
//! asserted here.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use multlfg_core::{
    band_project, composite_run, concept_target, dwt2, gaussian_field, idwt2, img2latent_weights,
    jacobian_band_analysis, linear_schedule, multlfg_run, spearman, subband_cfg, Band,
    ConceptFamily, ConceptModel, Field, GuidanceConfig, Rng, RunTrace, Shape, ToyCodec,
    WeightMode,
};
use tempfile::TempDir;

/// Per-seed owned-band relative errors (LL of the blob, HH of the
/// checker) of the adaptive run at k=2, tau=0.01, amp=1, gamma=1, T=50.
const C8_PER_SEED: [[f64; 2]; 10] = [
    [1.23732552626702369e-7, 2.49865618804117321e-6],
    [1.15634112737138811e-7, 9.99971880173152750e-1],
    [5.58728951897451109e-9, 1.96954639899312983e-10],
    [9.99999692891681891e-1, 4.37167745066927510e-9],
    [4.63646014064562644e-7, 6.04128571997278985e-1],
    [1.36021411942046207e-8, 5.94867687468320605e-7],
    [3.06902938052991527e-6, 1.03809413566467297e-6],
    [3.86608775997511312e-10, 4.32985852856598890e-8],
    [7.31653737239177673e-9, 1.00874403155082594e-8],
    [7.01611282246442786e-2, 3.44741697406166873e-7],
];
/// Means over the ten seeds: adaptive LL, adaptive HH, composite LL,
/// composite HH.
const C8_MEANS: [f64; 4] = [
    1.07016462005096319e-1,
    1.60410498648479838e-1,
    5.00000000000000000e-1,
    4.99999999999999889e-1,
];
const C8_SEED_PASSES: usize = 7;

/// rho(t, E_LL) per seed for the single-concept LL-target run.
const C11_RHO: [f64; 10] = [
    -9.99903961584633905e-1,
    -9.50348139255702273e-1,
    -9.99327731092436999e-1,
    -9.99903961584633905e-1,
    -1.0,
    -1.0,
    -1.0,
    -1.0,
    -1.0,
    -1.0,
];
const C11_MEAN: f64 = -9.94948379351740742e-1;
/// Companion run toward an HH-pure target, same statistic.
const C11_HH_RHO: [f64; 10] = [
    1.0,
    1.0,
    9.96734693877550981e-1,
    9.99711884753901603e-1,
    1.0,
    9.91740696278511358e-1,
    9.77527010804321694e-1,
    9.78103241296518600e-1,
    1.0,
    9.89723889555822356e-1,
];
const C11_HH_MEAN: f64 = 9.93354141656662692e-1;

struct Outcome {
    pass: bool,
    detail: String,
    extra: Vec<String>,
}

impl Outcome {
    fn plain(pass: bool, detail: String) -> Outcome {
        Outcome {
            pass,
            detail,
            extra: Vec::new(),
        }
    }
}

fn corpus(seed: u64, count: usize) -> Vec<Field> {
    let shapes = [
        Shape::new(64, 64, 3),
        Shape::new(32, 32, 1),
        Shape::new(16, 16, 2),
        Shape::new(8, 12, 1),
        Shape::new(4, 4, 3),
        Shape::new(2, 2, 1),
    ];
    let mut rng = Rng::new(seed);
    (0..count)
        .map(|i| gaussian_field(shapes[i % shapes.len()], &mut rng))
        .collect()
}

fn owned_band_rel_err(image: &Field, target: &Field, band: Band) -> f64 {
    let diff = band_project(&image.sub(target).unwrap(), band).unwrap();
    diff.l2_norm() / band_project(target, band).unwrap().l2_norm()
}

fn default_family(i: usize) -> ConceptFamily {
    [
        ConceptFamily::Blob,
        ConceptFamily::Checker,
        ConceptFamily::Stripes,
    ][i % 3]
}

fn test_sched(steps: usize) -> multlfg_core::Schedule {
    linear_schedule(steps, 1e-4, 2e-2).unwrap()
}

fn c1_reconstruction() -> Outcome {
    let fields = corpus(11, 100);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for x in &fields {
        let back = idwt2(&dwt2(x).unwrap()).unwrap();
        worst = worst.max(back.max_abs_diff(x).unwrap());
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::plain(
        worst < 1e-12 && secs < 1.0,
        format!("worst roundtrip error {worst:.3e} (limit 1e-12) over 100 fields in {secs:.3}s (limit 1s)"),
    )
}

fn c2_energy_identity() -> Outcome {
    let mut worst = 0.0f64;
    for x in &corpus(11, 100) {
        let bands = dwt2(x).unwrap();
        worst = worst.max((bands.total_energy() - x.l2_norm_sq()).abs() / x.l2_norm_sq());
    }
    Outcome::plain(
        worst < 1e-12,
        format!("worst relative energy drift {worst:.3e} (limit 1e-12)"),
    )
}

fn c3_linearity() -> Outcome {
    let shapes = [
        Shape::new(64, 64, 3),
        Shape::new(32, 32, 1),
        Shape::new(16, 16, 2),
        Shape::new(8, 12, 1),
    ];
    let mut rng = Rng::new(12);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let shape = shapes[i % shapes.len()];
        let x = gaussian_field(shape, &mut rng);
        let y = gaussian_field(shape, &mut rng);
        let a = rng.uniform() * 4.0 - 2.0;
        let b = rng.uniform() * 4.0 - 2.0;
        let lhs = dwt2(&x.lin_comb(a, &y, b).unwrap()).unwrap();
        let bx = dwt2(&x).unwrap();
        let by = dwt2(&y).unwrap();
        let mut diff_sq = 0.0;
        for band in Band::ALL {
            let rhs = bx.band(band).lin_comb(a, by.band(band), b).unwrap();
            diff_sq += lhs.band(band).sub(&rhs).unwrap().l2_norm_sq();
        }
        worst = worst.max(diff_sq.sqrt() / lhs.total_energy().sqrt());
    }
    Outcome::plain(
        worst < 1e-12,
        format!("worst relative deviation {worst:.3e} over 100 combinations (limit 1e-12)"),
    )
}

fn c4_orthogonality() -> Outcome {
    let mut worst = 0.0f64;
    for x in &corpus(13, 100) {
        let norm_sq = x.l2_norm_sq();
        let projections: Vec<Field> = Band::ALL
            .iter()
            .map(|&b| band_project(x, b).unwrap())
            .collect();
        for (i, p) in projections.iter().enumerate() {
            for q in &projections[i + 1..] {
                worst = worst.max(p.inner(q).unwrap().abs() / norm_sq);
            }
        }
    }
    Outcome::plain(
        worst < 1e-10,
        format!("worst |<P_l x, P_l' x>| / |x|^2 = {worst:.3e} (limit 1e-10)"),
    )
}

fn c5_equivalence_oracle() -> Outcome {
    let shape = Shape::new(32, 32, 1);
    let codec = ToyCodec::identity(shape);
    let sched = test_sched(50);
    let mut worst = 0.0f64;
    for n in [2usize, 3, 5] {
        let concepts: Vec<ConceptModel> = (0..n)
            .map(|i| {
                let img =
                    concept_target(default_family(i), shape, 1.0, 100 + i as u64).unwrap();
                ConceptModel::from_image(&img, &codec).unwrap()
            })
            .collect();
        let cfg = GuidanceConfig::new(7.0, n, n);
        let mut rng_a = Rng::new(42);
        let a = multlfg_run(
            &concepts,
            &cfg,
            &sched,
            &codec,
            &mut rng_a,
            true,
            WeightMode::Uniform,
        )
        .unwrap();
        let mut rng_b = Rng::new(42);
        let b = composite_run(&concepts, 7.0, &sched, &codec, &mut rng_b, true).unwrap();
        worst = worst.max(a.final_image.max_abs_diff(&b.final_image).unwrap());
    }
    Outcome::plain(
        worst < 1e-9,
        format!("worst max-abs gap to score averaging {worst:.3e} for n in 2,3,5 at T=50 (limit 1e-9)"),
    )
}

fn c6_single_concept_exactness() -> Outcome {
    let shape = Shape::new(32, 32, 1);
    let codec = ToyCodec::identity(shape);
    let target = concept_target(ConceptFamily::Blob, shape, 1.0, 100).unwrap();
    let concepts = vec![ConceptModel::from_image(&target, &codec).unwrap()];
    let cfg = GuidanceConfig::new(1.0, 1, 1);
    let mut worst = 0.0f64;
    for steps in [10usize, 50] {
        let sched = test_sched(steps);
        let mut rng = Rng::new(3);
        let trace = multlfg_run(
            &concepts,
            &cfg,
            &sched,
            &codec,
            &mut rng,
            true,
            WeightMode::Adaptive,
        )
        .unwrap();
        worst = worst
            .max(trace.final_image.sub(&target).unwrap().l2_norm() / target.l2_norm());
    }
    Outcome::plain(
        worst < 1e-6,
        format!("worst relative recovery error {worst:.3e} for T in 10,50 (limit 1e-6)"),
    )
}

fn c7_variance_decomposition() -> Outcome {
    let shape = Shape::new(32, 32, 1);
    let mut cfg = GuidanceConfig::new(1.0, 1, 1);
    cfg.band_scales = [0.5, 2.0, 3.0, 7.0];
    let mut rng = Rng::new(17);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let u = gaussian_field(shape, &mut rng);
        let c = gaussian_field(shape, &mut rng);
        let guided = idwt2(&subband_cfg(&dwt2(&u).unwrap(), &dwt2(&c).unwrap(), &cfg).unwrap())
            .unwrap();
        let update = guided.sub(&u).unwrap();
        let mut parts_sq = 0.0;
        for band in Band::ALL {
            parts_sq += band_project(&update, band).unwrap().l2_norm_sq();
        }
        worst = worst.max((update.l2_norm_sq() - parts_sq).abs() / update.l2_norm_sq());
    }
    Outcome::plain(
        worst < 1e-10,
        format!("worst relative gap |total - sum of band energies| = {worst:.3e} (limit 1e-10)"),
    )
}

fn c8_band_disjoint_improvement() -> Outcome {
    let shape = Shape::new(32, 32, 1);
    let codec = ToyCodec::identity(shape);
    let sched = test_sched(50);
    let blob = concept_target(ConceptFamily::Blob, shape, 1.0, 100).unwrap();
    let check = concept_target(ConceptFamily::Checker, shape, 1.0, 200).unwrap();
    let concepts = vec![
        ConceptModel::from_image(&blob, &codec).unwrap(),
        ConceptModel::from_image(&check, &codec).unwrap(),
    ];
    let cfg = GuidanceConfig::new(1.0, 2, 2);

    let mut extra = Vec::new();
    let mut means = [0.0f64; 4];
    let mut seed_passes = 0usize;
    let mut worst_drift = 0.0f64;
    for seed in 0..10u64 {
        let mut rng = Rng::new(seed);
        let trace = multlfg_run(
            &concepts,
            &cfg,
            &sched,
            &codec,
            &mut rng,
            true,
            WeightMode::Adaptive,
        )
        .unwrap();
        let mut rng2 = Rng::new(seed);
        let comp = composite_run(&concepts, 1.0, &sched, &codec, &mut rng2, true).unwrap();
        let ml = owned_band_rel_err(&trace.final_image, &blob, Band::Ll);
        let mh = owned_band_rel_err(&trace.final_image, &check, Band::Hh);
        let cl = owned_band_rel_err(&comp.final_image, &blob, Band::Ll);
        let ch = owned_band_rel_err(&comp.final_image, &check, Band::Hh);
        let seed_pass = ml <= 0.5 * cl && mh <= 0.5 * ch;
        if seed_pass {
            seed_passes += 1;
        }
        let frozen = C8_PER_SEED[seed as usize];
        let drift = (ml - frozen[0]).abs().max((mh - frozen[1]).abs());
        worst_drift = worst_drift.max(drift);
        extra.push(format!(
            "seed {seed}: adaptive LL {ml:.3e} HH {mh:.3e}, composite LL {cl:.3} HH {ch:.3} [{}]",
            if seed_pass { "ok" } else { "miss" }
        ));
        means[0] += ml / 10.0;
        means[1] += mh / 10.0;
        means[2] += cl / 10.0;
        means[3] += ch / 10.0;
    }
    for i in 0..4 {
        worst_drift = worst_drift.max((means[i] - C8_MEANS[i]).abs());
    }
    let gate = means[0] <= 0.5 * means[2] && means[1] <= 0.5 * means[3];
    let frozen_ok = worst_drift <= 1e-9 && seed_passes == C8_SEED_PASSES;
    Outcome {
        pass: gate && frozen_ok,
        detail: format!(
            "mean owned-band error LL {:.4} HH {:.4} vs composite {:.4} / {:.4} (bound: half of composite); per-seed {seed_passes}/10; frozen-value drift {worst_drift:.1e}",
            means[0], means[1], means[2], means[3]
        ),
        extra,
    }
}

fn c9_finite_difference_fidelity() -> Outcome {
    let shape = Shape::new(32, 32, 1);
    let x = concept_target(ConceptFamily::Blob, shape, 1.0, 100).unwrap();
    let w_img = [0.3, 0.7, 0.2, 0.9];
    let mut worst_match = 0.0f64;

    // Identity codec: the exact operator keeps every image band in the
    // same latent band with unit gain, so the transfer must return w_img
    // itself and the gain matrix must be the identity.
    let identity = ToyCodec::identity(shape);
    let out = img2latent_weights(&x, w_img, &identity, 1e-5).unwrap();
    for i in 0..4 {
        worst_match = worst_match.max((out[i] - w_img[i]).abs() / w_img[i]);
    }
    let report = jacobian_band_analysis(&x, &identity).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let expected = if i == j { 1.0 } else { 0.0 };
            worst_match = worst_match.max((report.gains[i][j] - expected).abs());
        }
    }

    // Downsample codec: a unit LL probe block-averages to a half-height
    // latent impulse (0.25 of coefficient magnitude in every latent
    // band); detail probes average to exactly zero. The exact operator
    // therefore maps w to 0.25 * w_LL in each latent band, and the gain
    // matrix is 0.5 across the LL row and zero elsewhere.
    let down = ToyCodec::downsample(shape).unwrap();
    let out = img2latent_weights(&x, w_img, &down, 1e-5).unwrap();
    for value in out {
        let expected = 0.25 * w_img[0];
        worst_match = worst_match.max((value - expected).abs() / expected);
    }
    let report = jacobian_band_analysis(&x, &down).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let expected = if i == 0 { 0.5 } else { 0.0 };
            worst_match = worst_match.max((report.gains[i][j] - expected).abs());
        }
    }

    let mut worst_stability = 0.0f64;
    for codec in [&identity, &down] {
        let base = img2latent_weights(&x, w_img, codec, 1e-5).unwrap();
        for eps in [1e-3, 1e-7] {
            let other = img2latent_weights(&x, w_img, codec, eps).unwrap();
            for i in 0..4 {
                worst_stability = worst_stability.max((other[i] - base[i]).abs() / base[i]);
            }
        }
    }
    Outcome::plain(
        worst_match < 1e-6 && worst_stability < 1e-4,
        format!(
            "worst exact-operator mismatch {worst_match:.3e} (limit 1e-6); step sweep 1e-3..1e-7 drift {worst_stability:.3e} (limit 1e-4)"
        ),
    )
}

fn simplex_stats(trace: &RunTrace, k: usize, n: usize) -> (usize, usize, usize) {
    let mut bands = 0;
    let mut sum_bad = 0;
    let mut count_bad = 0;
    for step in &trace.steps {
        for band in Band::ALL {
            bands += 1;
            let sum: f64 = step.weights.band(band).iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                sum_bad += 1;
            }
            if step.weights.nonzero_count(band) != k.min(n) {
                count_bad += 1;
            }
        }
    }
    (bands, sum_bad, count_bad)
}

fn c10_simplex_invariant() -> Outcome {
    let shape = Shape::new(32, 32, 1);
    let codec = ToyCodec::identity(shape);
    let sched = test_sched(50);
    let mut bands = 0usize;
    let mut sum_bad = 0usize;
    let mut count_bad = 0usize;

    // Ablation grid over the kept-concept count at n=5. Band scores stay
    // nonzero with a zero area threshold, so the nonzero-count invariant
    // is exercised for every k < n.
    let grid_specs = [
        (ConceptFamily::Blob, 1.0, 100u64),
        (ConceptFamily::Blob, 0.7, 101),
        (ConceptFamily::Stripes, 1.0, 102),
        (ConceptFamily::Checker, 1.0, 103),
        (ConceptFamily::Checker, 0.7, 104),
    ];
    let concepts: Vec<ConceptModel> = grid_specs
        .iter()
        .map(|&(family, amp, seed)| {
            let img = concept_target(family, shape, amp, seed).unwrap();
            ConceptModel::from_image(&img, &codec).unwrap()
        })
        .collect();
    for k in 1usize..=5 {
        let mut cfg = GuidanceConfig::new(1.0, k, 5);
        cfg.area_threshold = 0.0;
        let mut rng = Rng::new(7);
        let trace = multlfg_run(
            &concepts,
            &cfg,
            &sched,
            &codec,
            &mut rng,
            true,
            WeightMode::Adaptive,
        )
        .unwrap();
        let (b, s, c) = simplex_stats(&trace, k, 5);
        bands += b;
        sum_bad += s;
        count_bad += c;
    }

    // The paired-comparison configuration (k = n = 2, default threshold).
    let blob = concept_target(ConceptFamily::Blob, shape, 1.0, 100).unwrap();
    let check = concept_target(ConceptFamily::Checker, shape, 1.0, 200).unwrap();
    let pair = vec![
        ConceptModel::from_image(&blob, &codec).unwrap(),
        ConceptModel::from_image(&check, &codec).unwrap(),
    ];
    let cfg = GuidanceConfig::new(1.0, 2, 2);
    for seed in 0..4u64 {
        let mut rng = Rng::new(seed);
        let trace = multlfg_run(
            &pair,
            &cfg,
            &sched,
            &codec,
            &mut rng,
            true,
            WeightMode::Adaptive,
        )
        .unwrap();
        let (b, s, c) = simplex_stats(&trace, 2, 2);
        bands += b;
        sum_bad += s;
        count_bad += c;
    }

    Outcome::plain(
        sum_bad == 0 && count_bad == 0,
        format!(
            "{sum_bad} sum violations, {count_bad} nonzero-count violations over {bands} band-steps (grid k=1..5 at n=5, plus k=n=2 runs)"
        ),
    )
}

fn trend_rhos(family: ConceptFamily, target_seed: u64) -> Vec<f64> {
    let shape = Shape::new(32, 32, 1);
    let codec = ToyCodec::identity(shape);
    let sched = test_sched(50);
    let img = concept_target(family, shape, 1.0, target_seed).unwrap();
    let concepts = vec![ConceptModel::from_image(&img, &codec).unwrap()];
    let cfg = GuidanceConfig::new(1.0, 1, 1);
    (0..10u64)
        .map(|seed| {
            let mut rng = Rng::new(seed);
            let trace = multlfg_run(
                &concepts,
                &cfg,
                &sched,
                &codec,
                &mut rng,
                true,
                WeightMode::Adaptive,
            )
            .unwrap();
            let traj = trace.energy_trajectory();
            let ts: Vec<f64> = traj.iter().map(|(t, _)| *t as f64).collect();
            let ll: Vec<f64> = traj.iter().map(|(_, e)| e[0]).collect();
            spearman(&ts, &ll).unwrap()
        })
        .collect()
}

fn c11_frequency_trend() -> Outcome {
    let rhos = trend_rhos(ConceptFamily::Blob, 100);
    let mean = rhos.iter().sum::<f64>() / rhos.len() as f64;
    let max = rhos.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
    let drift = rhos
        .iter()
        .zip(&C11_RHO)
        .map(|(a, b)| (a - b).abs())
        .fold((mean - C11_MEAN).abs(), f64::max);

    let companion = trend_rhos(ConceptFamily::Checker, 200);
    let cmean = companion.iter().sum::<f64>() / companion.len() as f64;
    let cmin = companion.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let cdrift = companion
        .iter()
        .zip(&C11_HH_RHO)
        .map(|(a, b)| (a - b).abs())
        .fold((cmean - C11_HH_MEAN).abs(), f64::max);

    Outcome {
        pass: mean > 0.5 && rhos.iter().all(|r| *r > 0.5),
        detail: format!(
            "rho(t, E_LL) mean {mean:.6}, max over seeds {max:.6}, required > 0.5; frozen-value drift {drift:.1e}"
        ),
        extra: vec![
            "the trajectory spectrum starts flat at the noise draw and converges to the LL-pure target, so E_LL rises as t falls and the correlation with t is negative by construction".into(),
            format!(
                "companion HH-pure target run: rho(t, E_LL) mean {cmean:.6}, min {cmin:.6} > 0.5 (the coarse band recedes over sampling time); frozen-value drift {cdrift:.1e}"
            ),
        ],
    }
}

fn run_binary(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_multlfg"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn c12_interference_report() -> Outcome {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let mut exit_ok = true;
    let mut report_line = String::new();
    for out in [&a, &b] {
        let result = run_binary(&["verify", "--seed", "0", "--out", out.to_str().unwrap()]);
        if result.status.code() != Some(0) {
            exit_ok = false;
        }
        report_line = String::from_utf8_lossy(&result.stdout)
            .lines()
            .find(|l| l.starts_with("interference report"))
            .unwrap_or("interference report line missing")
            .to_string();
    }
    let bytes_a = fs::read(a.join("lemma1.csv")).unwrap_or_default();
    let bytes_b = fs::read(b.join("lemma1.csv")).unwrap_or_default();
    let rows = String::from_utf8_lossy(&bytes_a)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .count()
        .saturating_sub(1);
    let identical = !bytes_a.is_empty() && bytes_a == bytes_b;
    Outcome {
        pass: exit_ok && rows == 1000 && identical,
        detail: format!(
            "verify exit ok: {exit_ok}; {rows} pairs (need 1000); reruns byte-identical: {identical}"
        ),
        extra: vec![report_line],
    }
}

fn dir_files_equal(a: &Path, b: &Path) -> (usize, bool) {
    let list = |d: &Path| -> Vec<String> {
        let mut names: Vec<String> = fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        names
    };
    let names = list(a);
    if names != list(b) {
        return (0, false);
    }
    let same = names
        .iter()
        .all(|n| fs::read(a.join(n)).unwrap() == fs::read(b.join(n)).unwrap());
    (names.len(), same)
}

fn c13_determinism() -> Outcome {
    let dir = TempDir::new().unwrap();
    let combos: [(&str, &[&str]); 3] = [
        ("compose", &["compose", "--seed", "5", "--steps", "20"]),
        (
            "freq",
            &["freq-analysis", "--seed", "5", "--steps", "20", "--n", "1"],
        ),
        ("jacobian", &["jacobian", "--codec", "downsample"]),
    ];
    let mut files = 0usize;
    let mut all_same = true;
    for (name, args) in combos {
        let a = dir.path().join(format!("{name}1"));
        let b = dir.path().join(format!("{name}2"));
        for out in [&a, &b] {
            let mut full: Vec<&str> = args.to_vec();
            full.push("--out");
            full.push(out.to_str().unwrap());
            let result = run_binary(&full);
            if result.status.code() != Some(0) {
                all_same = false;
            }
        }
        let (n, same) = dir_files_equal(&a, &b);
        files += n;
        all_same = all_same && same;
    }
    Outcome::plain(
        all_same && files > 0,
        format!(
            "{files} output files byte-identical across reruns of compose, freq-analysis, jacobian (verify covered above)"
        ),
    )
}

#[test]
fn acceptance() {
    let outcomes = vec![
        (1, "perfect reconstruction", c1_reconstruction()),
        (2, "energy identity", c2_energy_identity()),
        (3, "transform linearity", c3_linearity()),
        (4, "band-projection orthogonality", c4_orthogonality()),
        (5, "uniform-weight equivalence oracle", c5_equivalence_oracle()),
        (6, "single-concept exactness", c6_single_concept_exactness()),
        (7, "variance decomposition", c7_variance_decomposition()),
        (8, "band-disjoint composition improvement", c8_band_disjoint_improvement()),
        (9, "finite-difference fidelity", c9_finite_difference_fidelity()),
        (10, "weight simplex invariant", c10_simplex_invariant()),
        (11, "frequency-trend experiment", c11_frequency_trend()),
        (12, "interference report", c12_interference_report()),
        (13, "byte-identical reruns", c13_determinism()),
    ];

    let mut failed = Vec::new();
    for (id, name, outcome) in &outcomes {
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {status} {name}: {}", outcome.detail);
        for line in &outcome.extra {
            println!("       {line}");
        }
        if !outcome.pass {
            failed.push(*id);
        }
    }
    assert!(
        failed.is_empty(),
        "failed acceptance criteria: {failed:?} (details in the lines above)"
    );
}
