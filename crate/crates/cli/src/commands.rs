//! Subcommand implementations. Each command reads a parsed [`RunConfig`],
//! produces either a text report or a CSV document, and returns the process
//! exit code.

use std::io::Write;

use oscbath::bath::{kernel_total, memory_kernel};
use oscbath::dynamics::{
    impulse_response, simulate_ensemble, simulate_gle_white_noise, Kick, WhiteNoiseParams,
};
use oscbath::quad_model::{
    build_two_body_bilinear, build_two_body_common, has_lower_bound, is_io_form, rescale_bath_cm,
    split_cm_rel, to_cm_rel, BOUNDED_TOL,
};
use oscbath::spectrum::{
    casimir_cross_correlation, classical_covariance, decompose, quantum_covariance, CovarianceKind,
};

use crate::config::{BathConfig, RunConfig};
use crate::csv_out::{cell, CsvDoc};
use crate::CliError;

pub struct CommandIo<'a> {
    pub config_text: &'a str,
    pub out: &'a mut dyn Write,
}

fn write_doc(doc: &CsvDoc, out: &mut dyn Write) -> Result<(), CliError> {
    doc.write_to(out).map_err(CliError::from)
}

/// Structure report for both two-body variants: boundedness, the
/// center-of-mass/relative split identity, and the independent-oscillator
/// verdicts for the two parts. Exit 0 if the counterterm model is bounded,
/// 2 if not.
pub fn cmd_check(cfg: &RunConfig, io: &mut CommandIo) -> Result<i32, CliError> {
    let bath = cfg.bath_spec()?;
    let common = build_two_body_common(cfg.mass, cfg.omega, &bath)?;
    let bilinear = build_two_body_bilinear(cfg.mass, cfg.omega, &bath)?;

    let rep_common = has_lower_bound(&common, BOUNDED_TOL)?;
    let rep_bilinear = has_lower_bound(&bilinear, BOUNDED_TOL)?;

    let transformed = to_cm_rel(&common)?;
    let (h_cm, h_rel) = split_cm_rel(&transformed)?;

    // Entrywise reassembly of the split over the full coordinate set.
    let n = transformed.dim();
    let nb = n - 2;
    let mut max_dev: f64 = 0.0;
    let k = transformed.stiffness();
    let kc = h_cm.stiffness();
    let kr = h_rel.stiffness();
    let embed_cm = |i: usize| if i == 0 { 0 } else { i + 1 };
    let embed_rel = |i: usize| i + 1;
    let mut sum = vec![vec![0.0; n]; n];
    for i in 0..=nb {
        for j in 0..=nb {
            sum[embed_cm(i)][embed_cm(j)] += kc[(i, j)];
            sum[embed_rel(i)][embed_rel(j)] += kr[(i, j)];
        }
    }
    for i in 0..n {
        for j in 0..n {
            max_dev = max_dev.max((sum[i][j] - k[(i, j)]).abs());
        }
    }

    let rescaled = rescale_bath_cm(&h_cm)?;
    let io_cm = is_io_form(&rescaled)?;
    let io_rel = is_io_form(&h_rel)?;

    let w = &mut io.out;
    writeln!(
        w,
        "model: two oscillators in a common bath, m = {}, omega = {}, {} bath modes",
        cfg.mass,
        cfg.omega,
        bath.len()
    )?;
    writeln!(
        w,
        "common (counterterm) min potential eigenvalue: {}",
        cell(rep_common.min_potential_eigenvalue)
    )?;
    writeln!(w, "bounded: {}", rep_common.bounded)?;
    writeln!(
        w,
        "bilinear variant min potential eigenvalue: {}",
        cell(rep_bilinear.min_potential_eigenvalue)
    )?;
    writeln!(w, "bilinear bounded: {}", rep_bilinear.bounded)?;
    writeln!(w, "split identity max deviation: {}", cell(max_dev))?;
    writeln!(w, "H_cm IO-form: {}", io_cm.is_io_form)?;
    for v in &io_cm.violations {
        writeln!(w, "  violation: {v}")?;
    }
    writeln!(w, "H_rel IO-form: {}", io_rel.is_io_form)?;
    for v in &io_rel.violations {
        writeln!(w, "  violation: {v}")?;
    }
    Ok(if rep_common.bounded { 0 } else { 2 })
}

/// Sample the memory kernel on the configured time grid.
pub fn cmd_kernel(cfg: &RunConfig, io: &mut CommandIo) -> Result<i32, CliError> {
    let bath = cfg.bath_spec()?;
    let n_steps = (cfg.sim.t_max / cfg.sim.dt).round() as usize;
    let times: Vec<f64> = (0..=n_steps).map(|k| k as f64 * cfg.sim.dt).collect();
    let series = memory_kernel(&bath, &times)?;
    let mut doc = CsvDoc::new(&["t", "mu"]);
    doc.provenance("kernel", io.config_text, None);
    doc.comment(format!("mu_zero: {}", cell(series.mu_zero)));
    for (t, v) in series.times.iter().zip(&series.values) {
        doc.push_row(vec![cell(*t), cell(*v)]);
    }
    write_doc(&doc, io.out)?;
    Ok(0)
}

/// Normal-mode frequencies of the common-bath model.
pub fn cmd_spectrum(cfg: &RunConfig, io: &mut CommandIo) -> Result<i32, CliError> {
    let bath = cfg.bath_spec()?;
    let sys = build_two_body_common(cfg.mass, cfg.omega, &bath)?;
    let modes = decompose(&sys)?;
    let mut doc = CsvDoc::new(&["mode", "frequency", "squared_frequency"]);
    doc.provenance("spectrum", io.config_text, None);
    doc.comment(format!("indefinite: {}", modes.indefinite));
    for (k, (w, sq)) in modes
        .frequencies
        .iter()
        .zip(&modes.squared_frequencies)
        .enumerate()
    {
        doc.push_row(vec![k.to_string(), cell(*w), cell(*sq)]);
    }
    write_doc(&doc, io.out)?;
    Ok(0)
}

/// Equilibrium position covariance of the common-bath model, or the
/// mode-count convergence sequence of the cross-correlation (`--converge`,
/// Ohmic baths only).
pub fn cmd_covariance(
    cfg: &RunConfig,
    kind: CovarianceKind,
    converge: bool,
    io: &mut CommandIo,
) -> Result<i32, CliError> {
    if converge {
        let model = match cfg.spectral_model() {
            Some(m) => m?,
            None => {
                return Err(CliError::Usage(
                    "--converge needs an ohmic bath configuration".into(),
                ))
            }
        };
        if kind != CovarianceKind::Quantum {
            return Err(CliError::Usage(
                "--converge supports the quantum covariance only".into(),
            ));
        }
        let est = casimir_cross_correlation(cfg.mass, cfg.omega, &model, cfg.sim.temperature)?;
        let mut doc = CsvDoc::new(&["n_modes", "x1x2"]);
        doc.provenance("covariance", io.config_text, None);
        doc.comment(format!("converged: {}", est.converged));
        doc.comment(format!("value: {}", cell(est.value)));
        for (n, v) in &est.sequence {
            doc.push_row(vec![n.to_string(), cell(*v)]);
        }
        write_doc(&doc, io.out)?;
        return Ok(0);
    }

    let bath = cfg.bath_spec()?;
    let sys = build_two_body_common(cfg.mass, cfg.omega, &bath)?;
    let cov = match kind {
        CovarianceKind::Quantum => quantum_covariance(&sys, cfg.sim.temperature)?,
        CovarianceKind::Classical => classical_covariance(&sys, cfg.sim.temperature)?,
    };
    let mut doc = CsvDoc::new(&["i", "j", "value"]);
    doc.provenance("covariance", io.config_text, None);
    doc.comment(format!(
        "kind: {}",
        match kind {
            CovarianceKind::Quantum => "quantum",
            CovarianceKind::Classical => "classical",
        }
    ));
    doc.comment(format!("temperature: {}", cfg.sim.temperature));
    let n = cov.labels.len();
    for i in 0..n {
        for j in i..n {
            doc.push_row(vec![
                cov.labels[i].clone(),
                cov.labels[j].clone(),
                cell(cov.positions[(i, j)]),
            ]);
        }
    }
    write_doc(&doc, io.out)?;
    Ok(0)
}

/// Impulse-response experiment: kick at t = 0, coordinate histories out.
pub fn cmd_response(
    cfg: &RunConfig,
    kick: &str,
    impulse: f64,
    io: &mut CommandIo,
) -> Result<i32, CliError> {
    let kick = match kick {
        "x1" => Kick::X1,
        "antisymmetric" => Kick::Antisymmetric,
        "symmetric" => Kick::Symmetric,
        other => {
            return Err(CliError::Usage(format!(
                "--kick must be x1, antisymmetric or symmetric, got {other:?}"
            )))
        }
    };
    let bath = cfg.bath_spec()?;
    let sys = build_two_body_common(cfg.mass, cfg.omega, &bath)?;
    let resp = impulse_response(&sys, kick, impulse, cfg.sim.dt, cfg.sim.t_max)?;
    let mut cols: Vec<&str> = vec!["t"];
    for l in &resp.labels {
        cols.push(l);
    }
    let mut doc = CsvDoc::new(&cols);
    doc.provenance("response", io.config_text, None);
    for (k, &t) in resp.times.iter().enumerate() {
        let mut row = vec![cell(t)];
        for series in &resp.series {
            row.push(cell(series[k]));
        }
        doc.push_row(row);
    }
    write_doc(&doc, io.out)?;
    Ok(0)
}

/// Ensemble simulation: explicit-bath trajectories (default) or the
/// two-body white-noise Langevin model (`--white-noise`, Ohmic configs).
pub fn cmd_simulate(
    cfg: &RunConfig,
    white_noise: bool,
    kappa: Option<f64>,
    io: &mut CommandIo,
) -> Result<i32, CliError> {
    let estimates = if white_noise {
        let gamma = match &cfg.bath {
            BathConfig::Ohmic { gamma, .. } => *gamma,
            BathConfig::Explicit(_) => {
                return Err(CliError::Usage(
                    "--white-noise needs an ohmic bath configuration (gamma)".into(),
                ))
            }
        };
        let kappa = match kappa {
            Some(k) => k,
            None => kernel_total(&cfg.bath_spec()?),
        };
        let params = WhiteNoiseParams {
            mass: cfg.mass,
            omega: cfg.omega,
            gamma,
            kappa,
            temperature: cfg.sim.temperature,
        };
        let observables = [
            ("x1".to_string(), "x1".to_string()),
            ("x1".to_string(), "x2".to_string()),
            ("v1".to_string(), "v1".to_string()),
        ];
        simulate_gle_white_noise(&params, &cfg.sim, &observables)?
    } else {
        let bath = cfg.bath_spec()?;
        let sys = build_two_body_common(cfg.mass, cfg.omega, &bath)?;
        let observables = [
            ("x1".to_string(), "x1".to_string()),
            ("x1".to_string(), "x2".to_string()),
        ];
        simulate_ensemble(&sys, &cfg.sim, &observables)?
    };

    let mut columns = vec!["t".to_string()];
    for est in &estimates {
        let tag = format!("{}{}", est.i, est.j);
        columns.push(format!("{tag}_lag"));
        columns.push(format!("{tag}_lag_se"));
        columns.push(format!("{tag}_eq"));
        columns.push(format!("{tag}_eq_se"));
    }
    let col_refs: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
    let mut doc = CsvDoc::new(&col_refs);
    doc.provenance("simulate", io.config_text, Some(cfg.sim.seed));
    doc.comment(format!("n_traj: {}", cfg.sim.n_traj));
    let times = &estimates[0].lagged.times;
    for (k, &t) in times.iter().enumerate() {
        let mut row = vec![cell(t)];
        for est in &estimates {
            row.push(cell(est.lagged.mean[k]));
            row.push(cell(est.lagged.stderr[k]));
            row.push(cell(est.equal_time.mean[k]));
            row.push(cell(est.equal_time.stderr[k]));
        }
        doc.push_row(row);
    }
    write_doc(&doc, io.out)?;
    Ok(0)
}

/// Tabulate the equilibrium cross-correlation over a linear parameter grid.
pub fn cmd_sweep(
    cfg: &RunConfig,
    param: &str,
    from: f64,
    to: f64,
    steps: usize,
    io: &mut CommandIo,
) -> Result<i32, CliError> {
    if steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    if !["gamma", "cutoff", "temperature"].contains(&param) {
        return Err(CliError::Usage(format!(
            "--param must be gamma, cutoff or temperature, got {param:?}"
        )));
    }
    if param != "temperature" && matches!(cfg.bath, BathConfig::Explicit(_)) {
        return Err(CliError::Usage(format!(
            "--param {param} needs an ohmic bath configuration"
        )));
    }

    let grid: Vec<f64> = if steps == 1 {
        vec![from]
    } else {
        (0..steps)
            .map(|k| from + (to - from) * k as f64 / (steps - 1) as f64)
            .collect()
    };

    let mut doc = CsvDoc::new(&[param, "x1x2"]);
    doc.provenance("sweep", io.config_text, None);
    for &value in &grid {
        let mut point = cfg.clone();
        let mut temperature = cfg.sim.temperature;
        match param {
            "gamma" => {
                if let BathConfig::Ohmic { ref mut gamma, .. } = point.bath {
                    *gamma = value;
                }
            }
            "cutoff" => {
                if let BathConfig::Ohmic { ref mut cutoff, .. } = point.bath {
                    *cutoff = Some(value);
                }
            }
            "temperature" => temperature = value,
            _ => unreachable!(),
        }
        let bath = point.bath_spec()?;
        let sys = build_two_body_common(point.mass, point.omega, &bath)?;
        let cov = quantum_covariance(&sys, temperature)?;
        let x1x2 = cov.positions[(0, 1)];
        doc.push_row(vec![cell(value), cell(x1x2)]);
    }
    write_doc(&doc, io.out)?;
    Ok(0)
}
