use std::f64::consts::PI;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::output::{fmt_g17, read_matrix, write_matrix, write_svg, Polyline, Stamp, Table};
use crate::curves::{invert_map, LaurentMap, C64};
use crate::error::{Error, Result};
use crate::gpst::{recovered_gpst, GpstBoundary, GpstMatrix};
use crate::oracle::{laurent_inversion_oracle, moments_from_map};
use crate::pipeline::{noise_study, reconstruct_exact, reconstruct_noisy, run_forward, ForwardData};
use crate::reconstruct::{invert_moments, ReconstructionResult, MAX_ORDER};
use crate::singlelayer::MeasurementMatrix;

/// Absolute tolerance of the moment → coefficient round trip.
pub const ROUNDTRIP_TOL: f64 = 1e-8;
/// Absolute tolerance between the sampled and the series inverse map.
pub const INVERSE_TOL: f64 = 1e-6;
/// Relative tolerance between BEM and contour-integral moments.
pub const BEM_MOMENT_TOL: f64 = 1e-6;

/// Metadata written next to the forward matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForwardMeta {
    pub config_hash: String,
    pub scale: f64,
    pub order: usize,
    pub nodes: usize,
    /// `r` in physical coordinates.
    pub center: [f64; 2],
    /// `s·r`, the center used for assembly.
    pub assembly_center: [f64; 2],
    pub outer_capacity: f64,
    pub cavity: bool,
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn forward_data(cfg: &RunConfig, center: C64) -> Result<ForwardData> {
    let outer = cfg.outer_curve()?;
    let cavity = cfg.cavity_curve()?;
    run_forward(&outer, cavity.as_ref(), cfg.order, center)
}

/// `forward`: writes `measurement.csv`, `outer_gpst.csv` and `forward.json`.
pub fn forward(cfg: &RunConfig) -> Result<ForwardMeta> {
    let data = forward_data(cfg, cfg.center())?;
    create_dir(&cfg.out)?;
    let stamp = Stamp { config_hash: cfg.hash(), scale: data.scale };
    write_matrix(&cfg.out.join("measurement.csv"), &stamp, &data.measurement.entries)?;
    write_matrix(&cfg.out.join("outer_gpst.csv"), &stamp, &data.outer_gpst.entries)?;
    let meta = ForwardMeta {
        config_hash: stamp.config_hash,
        scale: data.scale,
        order: cfg.order,
        nodes: cfg.nodes,
        center: cfg.center,
        assembly_center: pair(data.measurement.center),
        outer_capacity: data.outer_capacity,
        cavity: cfg.cavity_map()?.is_some(),
    };
    write_json(&cfg.out.join("forward.json"), &meta)?;
    Ok(meta)
}

/// Loads the files written by [`forward`].
pub fn load_forward(dir: &Path) -> Result<(ForwardMeta, ForwardData)> {
    let meta_path = dir.join("forward.json");
    let text = std::fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: ForwardMeta = serde_json::from_str(&text).map_err(|e| Error::Format {
        path: meta_path.display().to_string(),
        reason: e.to_string(),
    })?;
    let r = read_matrix(&dir.join("measurement.csv"))?;
    let q = read_matrix(&dir.join("outer_gpst.csv"))?;
    if r.nrows() != 2 * meta.order || q.nrows() != 2 * meta.order {
        return Err(Error::InconsistentMeasurement(format!(
            "order {} needs {}×{} matrices, found {} and {}",
            meta.order,
            2 * meta.order,
            2 * meta.order,
            r.nrows(),
            q.nrows()
        )));
    }
    let center = C64::new(meta.assembly_center[0], meta.assembly_center[1]);
    let data = ForwardData {
        scale: meta.scale,
        measurement: MeasurementMatrix { order: meta.order, center, scale: meta.scale, entries: r },
        outer_gpst: GpstMatrix::new(meta.order, q, GpstBoundary::Outer),
        outer_capacity: meta.outer_capacity,
    };
    Ok((meta, data))
}

/// What `reconstruct` produced.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub config_hash: String,
    pub scale: f64,
    pub result: ReconstructionResult,
    /// Present for multi-seed noisy runs.
    pub retained_order: Option<usize>,
    pub seeds_used: Vec<u64>,
    pub failed_seeds: Vec<(u64, String)>,
}

fn reconstruct_with(
    cfg: &RunConfig,
    data: &ForwardData,
    delta: f64,
    truth: Option<&LaurentMap>,
) -> Result<(ReconstructionReport, Vec<ReconstructionResult>)> {
    let attach = |r: ReconstructionResult| match truth {
        Some(t) => r.with_truth(t),
        None => r,
    };
    let base = |result, retained_order, seeds_used, failed_seeds| ReconstructionReport {
        config_hash: cfg.hash(),
        scale: data.scale,
        result,
        retained_order,
        seeds_used,
        failed_seeds,
    };
    if delta == 0.0 {
        let r = attach(reconstruct_exact(data, cfg.variant)?);
        return Ok((base(r, None, vec![], vec![]), vec![]));
    }
    if let [seed] = cfg.seeds[..] {
        let r = attach(reconstruct_noisy(data, delta, seed, cfg.variant)?);
        return Ok((base(r.clone(), None, vec![seed], vec![]), vec![r]));
    }
    let study = noise_study(data, delta, &cfg.seeds, cfg.variant, truth)?;
    let first = &study.runs[0];
    let mean = ReconstructionResult {
        map: study.mean_map()?,
        order_used: study.retained_order,
        noise: delta,
        seed: None,
        relative_errors: None,
        ..first.clone()
    };
    let seeds_used = study.runs.iter().filter_map(|r| r.seed).collect();
    let report = base(attach(mean), Some(study.retained_order), seeds_used, study.failures.clone());
    Ok((report, study.runs))
}

fn coefficient_rows(map: &LaurentMap, result: &ReconstructionResult) -> Vec<[String; 4]> {
    (-(map.order() as i64)..=1)
        .rev()
        .map(|k| {
            let v = map.coeff(k);
            let err = result.relative_error(k).map(fmt_g17).unwrap_or_default();
            [k.to_string(), fmt_g17(v.re), fmt_g17(v.im), err]
        })
        .collect()
}

fn curve_samples(map: &LaurentMap, n: usize) -> Vec<(f64, C64)> {
    (0..n)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / n as f64;
            (t, map.eval(C64::from_polar(1.0, t)))
        })
        .collect()
}

/// `reconstruct`: reads forward files from `measurement` (or runs the
/// forward solve) and writes coefficients, curve samples and an overlay.
pub fn reconstruct(cfg: &RunConfig, measurement: Option<&Path>) -> Result<ReconstructionReport> {
    let data = match measurement {
        Some(dir) => load_forward(dir)?.1,
        None => forward_data(cfg, cfg.center())?,
    };
    let truth = cfg.cavity_map()?;
    let (report, runs) = reconstruct_with(cfg, &data, cfg.noise, truth.as_ref())?;
    create_dir(&cfg.out)?;
    let stamp = Stamp { config_hash: report.config_hash.clone(), scale: report.scale };

    let mut t = Table::create(&cfg.out.join("coefficients.csv"), &stamp, &["k", "re", "im", "rel_err"])?;
    for row in coefficient_rows(&report.result.map, &report.result) {
        t.row(row)?;
    }
    t.finish()?;

    if !runs.is_empty() {
        let path = cfg.out.join("coefficients_by_seed.csv");
        let mut t = Table::create(&path, &stamp, &["seed", "k", "re", "im", "rel_err"])?;
        for r in &runs {
            let seed = r.seed.map(|s| s.to_string()).unwrap_or_default();
            for row in coefficient_rows(&r.map, r) {
                t.row(std::iter::once(seed.clone()).chain(row))?;
            }
        }
        t.finish()?;
    }

    let samples = curve_samples(&report.result.map, cfg.curve_samples);
    let mut t = Table::create(&cfg.out.join("curve.csv"), &stamp, &["t", "re", "im"])?;
    for (tt, z) in &samples {
        t.row([fmt_g17(*tt), fmt_g17(z.re), fmt_g17(z.im)])?;
    }
    t.finish()?;

    let recon: Vec<C64> = samples.iter().map(|s| s.1).collect();
    let truth_pts: Vec<C64> = truth
        .as_ref()
        .map(|m| curve_samples(m, cfg.curve_samples).into_iter().map(|s| s.1).collect())
        .unwrap_or_default();
    let mut lines = vec![];
    if !truth_pts.is_empty() {
        lines.push(Polyline { points: &truth_pts, color: "gray", width: 3.0 });
    }
    lines.push(Polyline { points: &recon, color: "red", width: 1.5 });
    write_svg(&cfg.out.join("overlay.svg"), &stamp, &lines, Some(report.result.center))?;
    write_json(&cfg.out.join("reconstruction.json"), &report)?;
    Ok(report)
}

/// Number of rows `sweep` wrote and how many grid points failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepSummary {
    pub points: usize,
    pub failures: usize,
}

/// `sweep`: one reconstruction per (center, noise level) pair, one CSV row
/// per grid point and coefficient in `sweep.csv`.
pub fn sweep(cfg: &RunConfig) -> Result<SweepSummary> {
    let centers: Vec<[f64; 2]> = cfg.sweep.centers.clone().unwrap_or_else(|| vec![cfg.center]);
    let levels: Vec<f64> = cfg.sweep.noise_levels.clone().unwrap_or_else(|| vec![cfg.noise]);
    let truth = cfg.cavity_map()?;
    let outer = cfg.outer_curve()?;
    let cavity = cfg.cavity_curve()?;
    create_dir(&cfg.out)?;
    let scale = crate::pipeline::rescale_factor(&outer);

    let per_center: Vec<Vec<Vec<[String; 10]>>> = centers
        .par_iter()
        .map(|c| {
            let center = C64::new(c[0], c[1]);
            let forward = run_forward(&outer, cavity.as_ref(), cfg.order, center);
            levels
                .par_iter()
                .map(|&delta| {
                    let head = [fmt_g17(c[0]), fmt_g17(c[1]), fmt_g17(delta)];
                    let outcome = forward
                        .as_ref()
                        .map_err(|e| e.to_string())
                        .and_then(|data| {
                            reconstruct_with(cfg, data, delta, truth.as_ref()).map_err(|e| e.to_string())
                        });
                    match outcome {
                        Ok((report, runs)) => sweep_rows(&head, &report, &runs),
                        Err(msg) => {
                            let mut row: [String; 10] = Default::default();
                            row[..3].clone_from_slice(&head);
                            row[9] = format!("error: {msg}");
                            vec![row]
                        }
                    }
                })
                .collect()
        })
        .collect();

    let stamp = Stamp { config_hash: cfg.hash(), scale };
    let header = [
        "r_re", "r_im", "delta", "k", "re", "im", "rel_err", "median_rel_err", "retained_order", "status",
    ];
    let mut t = Table::create(&cfg.out.join("sweep.csv"), &stamp, &header)?;
    let mut summary = SweepSummary { points: 0, failures: 0 };
    for point in per_center.into_iter().flatten() {
        summary.points += 1;
        if point.iter().any(|r| r[9] != "ok") {
            summary.failures += 1;
        }
        for row in point {
            t.row(row)?;
        }
    }
    t.finish()?;
    Ok(summary)
}

fn sweep_rows(
    head: &[String; 3],
    report: &ReconstructionReport,
    runs: &[ReconstructionResult],
) -> Vec<[String; 10]> {
    let map = &report.result.map;
    let retained = report.retained_order.map(|o| o.to_string()).unwrap_or_default();
    (-(map.order() as i64)..=1)
        .rev()
        .map(|k| {
            let v = map.coeff(k);
            let err = report.result.relative_error(k).map(fmt_g17).unwrap_or_default();
            let mut errs: Vec<f64> = runs.iter().filter_map(|r| r.relative_error(k)).collect();
            let median = if errs.len() == runs.len() {
                crate::pipeline::median(&mut errs).map(fmt_g17).unwrap_or_default()
            } else {
                String::new()
            };
            [
                head[0].clone(),
                head[1].clone(),
                head[2].clone(),
                k.to_string(),
                fmt_g17(v.re),
                fmt_g17(v.im),
                err,
                median,
                retained.clone(),
                "ok".to_string(),
            ]
        })
        .collect()
}

/// One line of the oracle report.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleCheck {
    pub check: &'static str,
    pub index: i64,
    pub expected: C64,
    pub actual: C64,
    /// Absolute error, or relative for the BEM comparison.
    pub error: f64,
    pub tolerance: f64,
}

impl OracleCheck {
    pub fn passed(&self) -> bool {
        self.error <= self.tolerance
    }

    /// BEM comparisons are reported but do not decide the exit status: the
    /// finite basis leaves a truncation error that only decays with the
    /// order.
    pub fn is_diagnostic(&self) -> bool {
        self.check.starts_with("bem_")
    }
}

/// `oracle-check`: compares the closed-form inversion with independent
/// oracles for the configured cavity map. Writes `oracle_check.csv`.
pub fn oracle_check(cfg: &RunConfig) -> Result<Vec<OracleCheck>> {
    let map = cfg
        .cavity_map()?
        .ok_or_else(|| Error::Config("oracle-check needs a Laurent cavity".into()))?;
    let order = cfg.order.max(map.order()).clamp(2, MAX_ORDER);
    let mut checks = Vec::new();

    let moments = moments_from_map(&map, order).sequences();
    let recovered = invert_moments(&moments, cfg.variant)?.map;
    for k in (-(order as i64)..=1).rev() {
        let (e, a) = (map.coeff(k), recovered.coeff(k));
        checks.push(OracleCheck {
            check: "roundtrip",
            index: k,
            expected: e,
            actual: a,
            error: (a - e).norm(),
            tolerance: ROUNDTRIP_TOL,
        });
    }

    let sampled = laurent_inversion_oracle(&map, order)?;
    let series = invert_map(&map, order);
    for k in (-(order as i64)..=1).rev() {
        let (e, a) = (sampled.coeff(k), series.coeff(k));
        checks.push(OracleCheck {
            check: "inverse",
            index: k,
            expected: e,
            actual: a,
            error: (a - e).norm(),
            tolerance: INVERSE_TOL,
        });
    }

    let data = forward_data(cfg, cfg.center())?;
    let q = recovered_gpst(&data.outer_gpst, &data.measurement)?;
    let frame_map = map.translated(-data.measurement.center / data.scale).scaled(data.scale);
    let oracle = moments_from_map(&frame_map, cfg.order);
    for m in 1..=cfg.order {
        for (check, e, a) in [("bem_mu", oracle.mu(m, 1), q.mu(m, 1)), ("bem_nu", oracle.nu(m, 1), q.nu(m, 1))] {
            checks.push(OracleCheck {
                check,
                index: m as i64,
                expected: e,
                actual: a,
                error: (a - e).norm() / e.norm().max(f64::MIN_POSITIVE),
                tolerance: BEM_MOMENT_TOL,
            });
        }
    }

    create_dir(&cfg.out)?;
    let stamp = Stamp { config_hash: cfg.hash(), scale: data.scale };
    let header = [
        "check", "index", "expected_re", "expected_im", "actual_re", "actual_im", "error", "tolerance", "pass",
    ];
    let mut t = Table::create(&cfg.out.join("oracle_check.csv"), &stamp, &header)?;
    for c in &checks {
        t.row([
            c.check.to_string(),
            c.index.to_string(),
            fmt_g17(c.expected.re),
            fmt_g17(c.expected.im),
            fmt_g17(c.actual.re),
            fmt_g17(c.actual.im),
            fmt_g17(c.error),
            fmt_g17(c.tolerance),
            c.passed().to_string(),
        ])?;
    }
    t.finish()?;
    Ok(checks)
}
