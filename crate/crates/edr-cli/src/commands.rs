//! Implementations of the single-shot subcommands.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use edr_core::{
    analyze as core_analyze, blw_delta_c_disturbance_estimate, blw_delta_c_estimate, edr_check,
    to_json_17, uniform_disturbance, uniform_error, CouplingParams, EdrCheck, ExtendedValue,
    GridWavefunction, ModelInfo, OracleInput, Regime, SupremumEstimate,
    TransferMatrix, Trend, WavefunctionRecord,
};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::spec::{ModelSpec, StateSpec};
use crate::{BlwArgs, StateArgs, SweepArgs};

pub const CSV_HEADER: &str =
    "alpha,beta,gamma,a,b,c,d,c_plus_d,epsilon,eta,product,sharp_bound,violates_heisenberg";

fn fmt(value: f64) -> String {
    edr_core::report::format_float(value)
}

pub fn csv_row(params: &CouplingParams, m: &TransferMatrix, check: &EdrCheck) -> String {
    [
        fmt(params.alpha()),
        fmt(params.beta()),
        fmt(params.gamma()),
        fmt(m.a()),
        fmt(m.b()),
        fmt(m.c()),
        fmt(m.d()),
        fmt(m.c() + m.d()),
        fmt(check.epsilon),
        fmt(check.eta),
        fmt(check.product),
        fmt(check.sharp_bound),
        check.violates_heisenberg.to_string(),
    ]
    .join(",")
}

#[derive(Serialize)]
struct SolveOutput {
    matrix: TransferMatrix,
    regime: Regime,
    det_residual: f64,
}

pub fn solve(spec: &ModelSpec, hbar: f64, json: bool) -> Result<(), CliError> {
    let (info, matrix) = spec.build(hbar)?;
    let output = SolveOutput {
        matrix,
        regime: info.params.regime(),
        det_residual: matrix.det_residual(),
    };
    if json {
        println!("{}", to_json_17(&output));
    } else {
        println!(
            "a = {}  b = {}  c = {}  d = {}",
            fmt(matrix.a()),
            fmt(matrix.b()),
            fmt(matrix.c()),
            fmt(matrix.d())
        );
        println!(
            "regime = {:?} (discriminant = {})",
            output.regime.kind,
            fmt(output.regime.discriminant)
        );
        println!("det_residual = {}", fmt(output.det_residual));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn analyze(
    model: &ModelSpec,
    psi: &StateSpec,
    xi: &StateSpec,
    hbar: f64,
    oracle: bool,
    grid_n: usize,
    span: f64,
    csv: Option<&Path>,
) -> Result<(), CliError> {
    let (info, matrix) = model.build(hbar)?;
    let psi_moments = psi.moments(hbar)?;
    let xi_moments = xi.moments(hbar)?;

    let grids = if oracle {
        Some((psi.grid(hbar, grid_n, span)?, xi.grid(hbar, grid_n, span)?))
    } else {
        None
    };
    let report = core_analyze(
        &info,
        &matrix,
        &psi_moments,
        &xi_moments,
        grids
            .as_ref()
            .map(|(psi_grid, xi_grid)| OracleInput {
                psi: psi_grid,
                xi: xi_grid,
            }),
    );
    println!("{}", report.to_json());

    if let Some(path) = csv {
        let check = edr_check(&matrix, &psi_moments, &xi_moments, hbar);
        let new_file = !path.exists();
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        if new_file {
            writeln!(file, "{CSV_HEADER}")?;
        }
        writeln!(file, "{}", csv_row(&info.params, &matrix, &check))?;
    }
    Ok(())
}

pub fn sweep(args: &SweepArgs) -> Result<(), CliError> {
    if args.steps == 0 {
        return Err(CliError::Usage("sweep family is empty (--steps 0)".into()));
    }
    let psi: StateSpec = args.psi.parse()?;
    let xi: StateSpec = args.xi.parse()?;
    let psi_moments = psi.moments(args.hbar)?;
    let xi_moments = xi.moments(args.hbar)?;

    let vary = args.vary.to_lowercase();
    let mut rows = Vec::with_capacity(args.steps);
    for index in 0..args.steps {
        let fraction = if args.steps == 1 {
            0.0
        } else {
            index as f64 / (args.steps - 1) as f64
        };
        let value = args.from + fraction * (args.to - args.from);
        let (info, matrix) = match vary.as_str() {
            "a" => ModelInfo::error_free(value, args.hbar)?,
            "alpha" => ModelSpec::Coupling {
                alpha: value,
                beta: args.beta,
                gamma: args.gamma,
            }
            .build(args.hbar)?,
            "beta" => ModelSpec::Coupling {
                alpha: args.alpha,
                beta: value,
                gamma: args.gamma,
            }
            .build(args.hbar)?,
            "gamma" => ModelSpec::Coupling {
                alpha: args.alpha,
                beta: args.beta,
                gamma: value,
            }
            .build(args.hbar)?,
            other => {
                return Err(CliError::Usage(format!(
                    "--vary must be one of a, alpha, beta, gamma; got '{other}'"
                )))
            }
        };
        let check = edr_check(&matrix, &psi_moments, &xi_moments, args.hbar);
        rows.push(csv_row(&info.params, &matrix, &check));
    }

    let mut output = String::with_capacity(rows.len() * 128);
    output.push_str(CSV_HEADER);
    output.push('\n');
    for row in rows {
        output.push_str(&row);
        output.push('\n');
    }
    match &args.out {
        Some(path) => std::fs::write(path, output)?,
        None => print!("{output}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct BlwOutput {
    model: ModelInfo,
    matrix: TransferMatrix,
    eps_eig: f64,
    uniform_error: ExtendedValue,
    uniform_disturbance: ExtendedValue,
    q_estimate: SupremumEstimate,
    p_estimate: SupremumEstimate,
    q_consistent: bool,
    p_consistent: bool,
}

fn estimate_consistent(estimate: &SupremumEstimate, uniform: ExtendedValue, eps_eig: f64) -> bool {
    match uniform {
        ExtendedValue::Finite(value) => {
            estimate.trend == Trend::Converged && (estimate.value - value).abs() <= eps_eig + 1e-6
        }
        ExtendedValue::Infinite => estimate.trend == Trend::Diverging,
    }
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Usage(format!("bad {what} entry '{v}': {e}")))
        })
        .collect()
}

pub fn blw(args: &BlwArgs, config: &RunConfig) -> Result<(), CliError> {
    if !(args.eps_eig > 0.0 && args.eps_eig.is_finite()) {
        return Err(CliError::Usage(format!(
            "--eps-eig must be positive, got {}",
            args.eps_eig
        )));
    }
    let (info, matrix) = args.model.to_spec()?.build(args.hbar)?;
    let xi: StateSpec = args.xi.parse()?;
    let xi_moments = xi.moments(args.hbar)?;

    let mut sweep = config.core_sweep();
    if let Some(text) = &args.theta_magnitudes {
        sweep.theta_magnitudes = parse_list(text, "theta magnitude")?;
    }
    if let Some(text) = &args.width_divisors {
        sweep.width_divisors = parse_list(text, "width divisor")?;
    }

    let q_estimate = blw_delta_c_estimate(&matrix, &xi_moments, args.eps_eig, &sweep, args.hbar)?;
    let p_estimate =
        blw_delta_c_disturbance_estimate(&matrix, &xi_moments, args.eps_eig, &sweep, args.hbar)?;
    let ue = uniform_error(&matrix, &xi_moments);
    let ud = uniform_disturbance(&matrix, &xi_moments);
    let output = BlwOutput {
        model: info,
        matrix,
        eps_eig: args.eps_eig,
        uniform_error: ue,
        uniform_disturbance: ud,
        q_consistent: estimate_consistent(&q_estimate, ue, args.eps_eig),
        p_consistent: estimate_consistent(&p_estimate, ud, args.eps_eig),
        q_estimate,
        p_estimate,
    };
    println!("{}", to_json_17(&output));
    Ok(())
}

#[derive(Serialize)]
struct StateInspection {
    n: usize,
    x_min: f64,
    dx: f64,
    moments: edr_core::grid::MeasuredMoments,
}

pub fn state(args: &StateArgs) -> Result<(), CliError> {
    if let Some(path) = &args.inspect {
        let text = std::fs::read_to_string(path)?;
        let wf = if text.trim_start().starts_with('{') {
            let record: WavefunctionRecord = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("bad wavefunction JSON: {e}")))?;
            GridWavefunction::try_from(record)?
        } else {
            GridWavefunction::from_csv(text.as_bytes())?
        };
        let inspection = StateInspection {
            n: wf.len(),
            x_min: wf.x_min(),
            dx: wf.dx(),
            moments: wf.measured_moments(args.hbar),
        };
        println!("{}", to_json_17(&inspection));
        return Ok(());
    }

    let spec: StateSpec = args
        .spec
        .as_deref()
        .ok_or_else(|| CliError::Usage("--spec is required to export a state".into()))?
        .parse()?;
    let wf = spec.grid(args.hbar, args.grid_n, args.span)?;
    let out = args
        .out
        .as_deref()
        .ok_or_else(|| CliError::Usage("--out is required to export a state".into()))?;
    let format = match args.format.as_deref() {
        Some(f) => f.to_lowercase(),
        None => match out.extension().and_then(|e| e.to_str()) {
            Some("json") => "json".into(),
            _ => "csv".into(),
        },
    };
    match format.as_str() {
        "csv" => {
            let mut buffer = Vec::new();
            wf.to_csv(&mut buffer)?;
            std::fs::write(out, buffer)?;
        }
        "json" => std::fs::write(out, to_json_17(&wf.to_record()))?,
        other => {
            return Err(CliError::Usage(format!(
                "unknown format '{other}', expected csv or json"
            )))
        }
    }
    Ok(())
}
