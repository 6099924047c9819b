use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{MetricChoice, RunConfig, SpectrumSource};
use super::{EXIT_CANDIDATE, EXIT_IDENTITY, EXIT_OK};
use crate::error::{Error, Result};
use crate::meanfield::{MeanField, P2_TOLERANCE};
use crate::rotsym::{
    curvature_check, monotonicity_report, normal_flow_check, profile_curve, shi_bound_check, small_volume_asymptotics,
    small_volume_sequence, sphere_data, volumes_for_radii, MetricKind, RadialMetric, SMALL_VOLUME_TOL,
};
use crate::sphharm::{
    build_grid, gaunt_table_check, hersch_energy, orthonormality_defect, random_field, SphCoeffs, IDENTITY_TOLERANCE,
};
use crate::surfspec::{normalize_area, spectrum, AmbientMode, ConformalMetric};

/// Exit code of a finished command with the lines explaining it.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub messages: Vec<String>,
}

/// One named numerical check in a report.
#[derive(Debug, Clone, Serialize)]
struct Check {
    name: &'static str,
    value: f64,
    tolerance: f64,
    passed: bool,
    /// Whether a failure changes the exit code.
    asserted: bool,
}

impl Check {
    fn at_most(name: &'static str, value: f64, tolerance: f64) -> Self {
        Check { name, value, tolerance, passed: value <= tolerance, asserted: true }
    }

    fn at_least(name: &'static str, value: f64, tolerance: f64) -> Self {
        Check { name, value, tolerance, passed: value >= -tolerance, asserted: true }
    }

    fn informative(mut self) -> Self {
        self.asserted = false;
        self
    }
}

fn finish(checks: &[Check], mut messages: Vec<String>) -> Outcome {
    let failed: Vec<&Check> = checks.iter().filter(|c| c.asserted && !c.passed).collect();
    for c in &failed {
        messages.push(format!("FAILED {}: {:.6e} (tolerance {:.1e})", c.name, c.value, c.tolerance));
    }
    Outcome { code: if failed.is_empty() { EXIT_OK } else { EXIT_IDENTITY }, messages }
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn write_json(dir: &Path, name: &str, command: &str, body: Value) -> Result<()> {
    let mut doc = json!({ "schema": 1, "command": command });
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
        d.extend(b);
    }
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    write_text(dir, name, &text)
}

pub fn cmd_sht_check(cfg: &RunConfig) -> Result<Outcome> {
    let grid = build_grid(cfg.band_limit)?;
    let tol = IDENTITY_TOLERANCE * cfg.tol_scale;
    let gaunt = gaunt_table_check(&grid, tol)?;
    let expected = 8.0 * PI / 3.0;
    let hersch = (1..=3).map(|i| hersch_energy(i, &grid)).collect::<Result<Vec<f64>>>()?;
    let ortho = orthonormality_defect(&grid)?;

    let passed = gaunt.results.iter().filter(|r| r.passed).count();
    let mut checks =
        vec![Check::at_most("hersch_energy", hersch.iter().map(|e| (e - expected).abs()).fold(0.0, f64::max), tol)];
    checks.push(Check::at_most("orthonormality", ortho, tol));
    write_json(
        &cfg.out,
        "sht_report.json",
        "sht-check",
        json!({
            "band_limit": cfg.band_limit,
            "identities_passed": passed,
            "identities_total": gaunt.results.len(),
            "identities": gaunt,
            "hersch_energy": hersch,
            "hersch_expected": expected,
            "orthonormality_defect": ortho,
            "checks": checks,
        }),
    )?;
    let mut messages = vec![format!("{passed}/{} product identities reproduced", gaunt.results.len())];
    if let Err(e) = gaunt.into_result() {
        messages.push(e.to_string());
        return Ok(Outcome { code: EXIT_IDENTITY, messages });
    }
    Ok(finish(&checks, messages))
}

pub fn cmd_meanfield(cfg: &RunConfig) -> Result<Outcome> {
    let mf = MeanField::new(cfg.band_limit)?;
    let report = mf.uniqueness_experiment(cfg.delta, cfg.trials, cfg.seed)?;
    let p2 = mf.p2_identity_sweep(cfg.p2_draws, cfg.seed)?;
    let p2_tol = P2_TOLERANCE * cfg.tol_scale;

    let traces = cfg.out.join("traces");
    for t in &report.traces {
        write_text(&traces, &format!("trial_{:04}_fixed_point.csv", t.trial), &t.fixed_point.to_csv())?;
        write_text(&traces, &format!("trial_{:04}_newton.csv", t.trial), &t.newton.to_csv())?;
    }
    let checks = vec![
        Check::at_most("p2_identity_relative_error", p2.max_relative_error, p2_tol),
        Check::at_least("decay_exponent_minus_1.4", report.decay_exponent_estimate - 1.4, 0.0).informative(),
    ];
    write_json(
        &cfg.out,
        "uniqueness_report.json",
        "meanfield",
        json!({
            "report": report,
            "p2_identity": p2,
            "checks": checks,
        }),
    )?;

    let summary = format!(
        "converged {}/{} at delta {}, exponent estimate {:.4}",
        report.converged_to_zero, report.trials, report.delta, report.decay_exponent_estimate
    );
    let mut outcome = finish(&checks, vec![summary]);
    if outcome.code == EXIT_OK && !report.all_zero() {
        for c in &report.nonzero_candidates {
            outcome.messages.push(format!(
                "nonzero candidate in trial {}: fixed point sup {:.3e}, Newton sup {:.3e}",
                c.trial, c.fixed_point.sup_norm, c.newton.sup_norm
            ));
        }
        outcome.code = EXIT_CANDIDATE;
    }
    Ok(outcome)
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Outcome> {
    let band = cfg.band_limit;
    let (u, source) = match &cfg.spectrum_source {
        SpectrumSource::Zero => (SphCoeffs::zeros(band), json!("zero")),
        SpectrumSource::Random => {
            let grid = build_grid(2 * band)?;
            (random_field(&grid, band, cfg.u_sup, cfg.seed, 0)?, json!("random"))
        }
        SpectrumSource::File(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            (SphCoeffs::parse_text(&text)?, json!(p.display().to_string()))
        }
    };
    let raw = ConformalMetric::new(u, band)?;
    let u = normalize_area(raw.u(), raw.grid())?;
    let metric = ConformalMetric::on_grid(u, band, raw.grid().clone())?;
    let report = spectrum(&metric, metric.curvature(), cfg.n_eigs)?;
    let checks = vec![Check::at_least("esi_gap", report.esi_gap, 1e-8 * cfg.tol_scale)];
    write_json(
        &cfg.out,
        "spectrum_report.json",
        "spectrum",
        json!({
            "source": source,
            "band_limit": band,
            "seed": cfg.seed,
            "u_sup": if cfg.spectrum_source == SpectrumSource::Random { json!(cfg.u_sup) } else { Value::Null },
            "input_area": raw.area(),
            "potential": "K",
            "spectrum": report,
            "checks": checks,
        }),
    )?;
    let msg = format!("lambda2 = {:.12}, esi gap = {:.3e}", report.lambda2, report.esi_gap);
    Ok(finish(&checks, vec![msg]))
}

/// Mass every centered sphere carries in its own mode, where the family
/// fixes it.
fn constant_mass(metric: &RadialMetric) -> Option<f64> {
    match (metric.kind(), metric.mode()) {
        (MetricKind::Flat, AmbientMode::Flat) | (MetricKind::Hyperbolic, AmbientMode::Hyperbolic) => Some(0.0),
        (MetricKind::Schwarzschild { m }, AmbientMode::Flat) => Some(m),
        (MetricKind::AdsSchwarzschild { m }, AmbientMode::Hyperbolic) => Some(m),
        _ => None,
    }
}

/// The profile coincides with the model profile of its mode.
fn is_model_space(metric: &RadialMetric) -> bool {
    matches!(
        (metric.kind(), metric.mode()),
        (MetricKind::Flat, AmbientMode::Flat) | (MetricKind::Hyperbolic, AmbientMode::Hyperbolic)
    )
}

pub fn cmd_profile(cfg: &RunConfig) -> Result<Outcome> {
    let pc = &cfg.profile;
    let metric = pc.build_metric()?;
    let mode = metric.mode();
    let scale = cfg.tol_scale;
    let (r_lo, r_hi) = pc.radius_range(&metric)?;

    let small = match pc.small_volume {
        Some(true) => Some(small_volume_asymptotics(&metric, &small_volume_sequence())?),
        Some(false) => None,
        None if metric.has_horizon() => None,
        None => Some(small_volume_asymptotics(&metric, &small_volume_sequence())?),
    };

    let v_grid = volumes_for_radii(&metric, r_lo, r_hi, pc.points)?;
    let curve = profile_curve(&metric, &v_grid)?;
    let radii: Vec<f64> = curve.samples.iter().map(|s| s.r).collect();
    let certificate = curvature_check(&metric, &radii)?;
    let mono = monotonicity_report(&curve)?;
    let r0 = if metric.has_horizon() { 1.5 * metric.r_min() } else { 1.0 };
    let flow = normal_flow_check(&metric, r0, 1.0, 1e-3)?;

    let mut checks = Vec::new();
    let certified_flat = matches!(mode, AmbientMode::Flat) && certificate.certifies_nonnegative();
    let mut mass_check = Check::at_least("mH_plus_min_increment", mono.min_mass_increment, 1e-8 * scale);
    let mut bray_check = Check::at_least("bray_inequality_margin", mono.min_bray_margin, 1e-6 * scale);
    if !certified_flat {
        mass_check = mass_check.informative();
        bray_check = bray_check.informative();
    }
    checks.push(mass_check);
    checks.push(bray_check);
    checks.push(Check::at_most("normal_flow_residual", flow.max(), 1e-8 * scale));
    checks.push(Check::at_most("gauss_equation_closure", certificate.max_gauss_closure_error, 1e-10 * scale));
    if let Some(m) = constant_mass(&metric) {
        let mut worst = 0.0f64;
        for &r in &radii {
            worst = worst.max((sphere_data(&metric, r)?.hawking_mass - m).abs());
        }
        checks.push(Check::at_most("sphere_hawking_mass_deviation", worst, 1e-9 * scale));
        if matches!(pc.metric, MetricChoice::Schwarzschild) {
            let dev = curve.samples.iter().map(|s| (s.mh_plus_normalized - m).abs()).fold(0.0, f64::max);
            checks.push(Check::at_most("mH_plus_deviation", dev, 1e-5 * scale));
        }
    }

    let shi = if metric.has_horizon() {
        None
    } else {
        let rep = shi_bound_check(&curve, mode, &certificate)?;
        checks.push(Check::at_most("shi_bound_gap", rep.max_gap, 1e-8 * scale));
        let flag_ok = rep.equality == is_model_space(&metric);
        checks.push(Check::at_most("equality_flag_mismatch", if flag_ok { 0.0 } else { 1.0 }, 0.0));
        Some(rep)
    };
    if let Some(s) = &small {
        checks.push(Check::at_most("small_volume_ratio_deviation", s.deviation_at_smallest, SMALL_VOLUME_TOL * scale));
    }

    write_text(&cfg.out, "profile.csv", &curve.to_csv())?;
    write_json(
        &cfg.out,
        "profile_report.json",
        "profile",
        json!({
            "metric": metric.label(),
            "mode": mode,
            "r_min": metric.r_min(),
            "r_range": [r_lo, r_hi],
            "points": pc.points,
            "curvature": {
                "min_scalar_curvature": certificate.min_scalar_curvature,
                "max_gauss_closure_error": certificate.max_gauss_closure_error,
                "certifies_nonnegative": certificate.certifies_nonnegative(),
                "certifies_hyperbolic_bound": certificate.certifies_hyperbolic_bound(),
            },
            "monotonicity": mono,
            "shi_bound": shi,
            "shi_bound_skipped": if metric.has_horizon() { json!("horizon boundary") } else { Value::Null },
            "normal_flow": { "r0": r0, "t_span": 1.0, "step": 1e-3, "residuals": flow },
            "small_volume": small,
            "checks": checks,
        }),
    )?;
    let msg = format!(
        "{}: {} samples, m+_H in [{:.9}, {:.9}]",
        metric.label(),
        curve.samples.len(),
        curve.samples.iter().map(|s| s.mh_plus_normalized).fold(f64::INFINITY, f64::min),
        curve.samples.iter().map(|s| s.mh_plus_normalized).fold(f64::NEG_INFINITY, f64::max)
    );
    Ok(finish(&checks, vec![msg]))
}
