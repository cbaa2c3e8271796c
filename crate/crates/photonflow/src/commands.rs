//! One function per subcommand. Each returns the text it prints on stdout.

use std::fmt::Write as _;
use std::path::Path;

use photonflow_core::intensity::{output_intensity, IntensityTrace};
use photonflow_core::oracles::three_photon_coefficients;
use photonflow_core::photonstate::FockState;
use photonflow_core::sysmodel::realize;
use photonflow_core::transferengine::{
    nonpassive_output_with, transfer_mm_with, transfer_multiplicity_with, transfer_product_sum_with,
    transfer_tensor_with, DEFAULT_MEMORY_BUDGET,
};
use photonflow_core::{CMat, Realization, TensorPulse, TransferOptions};
use serde::Serialize;
use serde_json::json;

use crate::config::Job;
use crate::error::{CliError, CliResult};
use crate::pulse::LoadedPulse;
use crate::sidecar;
use crate::verify;

pub const MEM_BUDGET_ENV: &str = "PHOTONFLOW_MEM_BUDGET";

/// `-0` prints as `0`.
fn num(x: f64) -> String {
    format!("{}", x + 0.0)
}

fn matrix_json(x: &CMat) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> =
        (0..x.nrows()).map(|i| (0..x.ncols()).map(|j| [x[(i, j)].re + 0.0, x[(i, j)].im + 0.0]).collect()).collect();
    json!(rows)
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn memory_budget() -> CliResult<f64> {
    match std::env::var(MEM_BUDGET_ENV) {
        Err(_) => Ok(DEFAULT_MEMORY_BUDGET),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(b) if b > 0.0 && b.is_finite() => Ok(b),
            _ => Err(CliError::validation("InvalidInput", format!("{MEM_BUDGET_ENV}={s:?} is not a positive byte count"))),
        },
    }
}

fn options(job: &Job) -> CliResult<TransferOptions> {
    Ok(TransferOptions { mode: job.config.mode.into(), memory_budget: memory_budget()?, ..Default::default() })
}

fn realization(job: &Job) -> CliResult<Realization> {
    Ok(realize(&job.system()?.to_params()?)?)
}

pub fn realize_cmd(job: &Job) -> CliResult<String> {
    let sys = realization(job)?;
    let p = sys.params();
    let omegas = job.config.spectrum.omegas()?;
    let mut out = String::new();
    writeln!(out, "m: {}", sys.m()).unwrap();
    writeln!(out, "n: {}", sys.n()).unwrap();
    writeln!(out, "passive: {}", sys.is_passive()).unwrap();
    writeln!(out, "stable: {}", sys.is_stable()).unwrap();
    writeln!(out, "stability_margin: {}", num(sys.stability_margin())).unwrap();
    if sys.is_passive() {
        writeln!(out, "unitarity_residual: {}", num(sys.unitarity_sweep(&omegas)?)).unwrap();
    } else {
        writeln!(out, "unitarity_residual: null").unwrap();
    }
    writeln!(out, "sweep: [{}, {}] x {}", num(omegas[0]), num(omegas[omegas.len() - 1]), omegas.len()).unwrap();
    for (name, x) in [
        ("S_minus", p.s_minus()),
        ("C_minus", p.c_minus()),
        ("C_plus", p.c_plus()),
        ("Omega_minus", p.omega_minus()),
        ("Omega_plus", p.omega_plus()),
        ("A", &sys.a_mat),
        ("B", &sys.b_mat),
        ("C", &sys.c_mat),
        ("S", &sys.s_mat),
    ] {
        writeln!(out, "{name}: {}", matrix_json(x)).unwrap();
    }
    Ok(out)
}

/// Mass and peak amplitude of the slots mixing different channels, read
/// from the canonical form.
fn cross_channel(t: &TensorPulse) -> CliResult<(f64, f64)> {
    let canon = t.canonical()?;
    let (mut mass, mut peak) = (0.0f64, 0.0f64);
    for s in 0..canon.slot_count() {
        let labels = canon.slot_labels(s);
        if labels.windows(2).all(|w| w[0] == w[1]) {
            continue;
        }
        for z in canon.slot_by_index(s) {
            mass += z.norm_sqr();
            peak = peak.max(z.norm());
        }
    }
    Ok((mass * canon.grid().dt.powi(canon.ways() as i32), peak))
}

#[derive(Debug, Serialize)]
struct TransferReport {
    route: &'static str,
    input_class: &'static str,
    photons: usize,
    mode: &'static str,
    input_norm_sq: f64,
    output_norm_sq: Option<f64>,
    output_l2_mass: f64,
    channel_photon_numbers: Option<Vec<f64>>,
    cross_channel_mass: Option<f64>,
    cross_channel_max: Option<f64>,
    three_photon_coefficients: Option<Vec<[f64; 2]>>,
    output: sidecar::TensorHeader,
}

pub fn transfer_cmd(job: &Job, out_dir: &Path) -> CliResult<String> {
    let sys = realization(job)?;
    let grid = job.grid()?;
    let (spec, base) = job.pulse()?;
    let pulse = spec.build(&grid, &base)?;
    let opts = options(job)?;
    create_dir(out_dir)?;

    let passive = sys.is_passive();
    let (route, tensor, labels) = match (&pulse, passive) {
        (LoadedPulse::Function(p), true) => ("mm", transfer_mm_with(&sys, p, &opts)?, "channel"),
        (LoadedPulse::Function(p), false) => ("nonpassive", nonpassive_output_with(&sys, p, &opts)?.psi_d, "channel_sign"),
        (_, false) => return Err(photonflow_core::Error::NotPassive.into()),
        (LoadedPulse::Tensor(p), true) => ("tensor", transfer_tensor_with(&sys, p, &opts)?, "channel"),
        (LoadedPulse::Multiplicity(p), true) => ("multiplicity", transfer_multiplicity_with(&sys, p, &opts)?, "channel"),
        (LoadedPulse::ProductSum(p), true) => {
            let out = transfer_product_sum_with(&sys, p, &opts)?;
            let out_norm = out.inner_ccr(&out)?.re;
            let t = out.to_tensor()?;
            debug_assert!((t.inner_ccr(&t)?.re - out_norm).abs() <= 1e-8 * out_norm.max(1.0));
            ("product_sum", t, "channel")
        }
    };

    let (cross_mass, cross_max, out_norm, numbers) = if passive {
        let (m, x) = cross_channel(&tensor)?;
        let nrm = tensor.inner_ccr(&tensor)?.re;
        let nums = if nrm > 0.0 { Some(tensor.channel_photon_numbers()?) } else { None };
        (Some(m), Some(x), Some(nrm), nums)
    } else {
        (None, None, None, None)
    };
    let coeffs = match &pulse {
        LoadedPulse::Multiplicity(p) if passive && p.multiplicities() == [1, 2] && sys.m() == 2 => {
            Some(three_photon_coefficients(&tensor, p)?.iter().map(|z| [z.re + 0.0, z.im + 0.0]).collect())
        }
        _ => None,
    };
    let header = sidecar::write_tensor(out_dir, "psi_out", &tensor, labels)?;
    let report = TransferReport {
        route,
        input_class: pulse.class(),
        photons: pulse.photon_count(),
        mode: match opts.mode {
            photonflow_core::TransferMode::Time => "time",
            photonflow_core::TransferMode::Frequency => "frequency",
        },
        input_norm_sq: pulse.norm_sq()?,
        output_norm_sq: out_norm,
        output_l2_mass: tensor.l2_norm_sq(),
        channel_photon_numbers: numbers,
        cross_channel_mass: cross_mass,
        cross_channel_max: cross_max,
        three_photon_coefficients: coeffs,
        output: header,
    };
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    write_text(&out_dir.join("report.json"), &text)?;

    let mut out = String::new();
    writeln!(out, "route: {}", report.route).unwrap();
    writeln!(out, "input_norm_sq: {}", num(report.input_norm_sq)).unwrap();
    if let Some(v) = report.output_norm_sq {
        writeln!(out, "output_norm_sq: {}", num(v)).unwrap();
    }
    writeln!(out, "output_l2_mass: {}", num(report.output_l2_mass)).unwrap();
    if let (Some(m), Some(x)) = (report.cross_channel_mass, report.cross_channel_max) {
        writeln!(out, "cross_channel_mass: {}", num(m)).unwrap();
        writeln!(out, "cross_channel_max: {}", num(x)).unwrap();
    }
    if let Some(c) = &report.three_photon_coefficients {
        let parts: Vec<String> = c.iter().map(|z| format!("{}{:+}i", num(z[0]), z[1] + 0.0)).collect();
        writeln!(out, "three_photon_coefficients: {}", parts.join(" ")).unwrap();
    }
    writeln!(out, "wrote: {}", out_dir.join("psi_out.bin").display()).unwrap();
    Ok(out)
}

fn matrix_header(prefix: &str, dim: usize) -> String {
    let mut h = String::new();
    for i in 1..=dim {
        for j in 1..=dim {
            write!(h, ",re({prefix}_{i}{j}),im({prefix}_{i}{j})").unwrap();
        }
    }
    h
}

fn push_matrix(line: &mut String, x: &CMat) {
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            write!(line, ",{},{}", num(x[(i, j)].re), num(x[(i, j)].im)).unwrap();
        }
    }
}

pub fn intensity_csv(trace: &IntensityTrace) -> String {
    let m = trace.values.first().map_or(0, |v| v.nrows());
    let mut csv = format!("t{}\n", matrix_header("n", m));
    for (j, v) in trace.values.iter().enumerate() {
        let mut line = num(trace.grid.t(j));
        push_matrix(&mut line, v);
        csv.push_str(&line);
        csv.push('\n');
    }
    csv
}

pub fn intensity_cmd(job: &Job, out_dir: &Path) -> CliResult<String> {
    let sys = realization(job)?;
    let grid = job.grid()?;
    let (spec, base) = job.pulse()?;
    let LoadedPulse::Function(pulse) = spec.build(&grid, &base)? else {
        return Err(CliError::validation("InvalidInput", "intensity needs a distinct-channel (function) pulse"));
    };
    let trace = output_intensity(&sys, &pulse)?;
    create_dir(out_dir)?;
    let path = out_dir.join("intensity.csv");
    write_text(&path, &intensity_csv(&trace))?;
    let totals: Vec<String> = trace.channel_totals().into_iter().map(num).collect();
    let mut out = String::new();
    writeln!(out, "channel_photons_out={}", totals.join(",")).unwrap();
    writeln!(out, "total_photons_out={}", num(trace.total_photons())).unwrap();
    writeln!(out, "wrote: {}", path.display()).unwrap();
    Ok(out)
}

pub fn spectrum_cmd(job: &Job, out_dir: &Path) -> CliResult<String> {
    let sys = realization(job)?;
    sys.require_stable()?;
    let omegas = job.config.spectrum.omegas()?;
    let dim = 2 * sys.m();
    let mut csv = format!("omega{}\n", matrix_header("R", dim));
    for &w in &omegas {
        let r = sys.output_spectrum(w)?;
        let mut line = num(w);
        push_matrix(&mut line, &r);
        csv.push_str(&line);
        csv.push('\n');
    }
    create_dir(out_dir)?;
    let path = out_dir.join("spectrum.csv");
    write_text(&path, &csv)?;
    Ok(format!("points: {}\nwrote: {}\n", omegas.len(), path.display()))
}

/// Runs the acceptance battery plus a self-check of the job's own system.
/// Returns the report and whether everything passed.
pub fn verify_cmd(job: &Job) -> CliResult<(String, bool)> {
    let sys = realization(job)?;
    let settings = &job.config.verify;
    let mut out = String::new();
    let mut ok = true;
    for r in verify::run_battery(settings.tolerance_scale, settings.criteria.as_deref()) {
        writeln!(out, "{}", r.line()).unwrap();
        ok &= r.passed();
    }
    let job_check = verify::job_check(&sys, job, settings.tolerance_scale)?;
    writeln!(out, "{}", job_check.line()).unwrap();
    ok &= job_check.passed();
    writeln!(out, "verify: {}", if ok { "PASS" } else { "FAIL" }).unwrap();
    Ok((out, ok))
}

