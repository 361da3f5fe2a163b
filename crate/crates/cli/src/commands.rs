use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use zar_core::model::{wald_tests, WaldRow};
use zar_core::residuals::{compute, halfnormal_envelope, Envelope, EnvelopeOptions};
use zar_core::simulation::SimReport;
use zar_core::synthetic::{exam_scores, AGE_OVER_25, MALE, SCORE_COLUMNS};
use zar_core::{fit, Dataset, ResidualKind, StudyOptions, ZarFit, ZarModelSpec};

use crate::args::{Common, DiagnoseArgs, EnvelopeArgs, FitArgs, SimulateArgs, SynthArgs};
use crate::config::{model_covariates, RunConfig};
use crate::error::{CliError, CliResult};
use crate::table::{cell, read_dataset, write_csv, write_text};

pub const FIT_FILE: &str = "fit.json";
pub const SYNTH_RESPONSE: &str = "essay";

const DEFAULT_DIAGNOSE_KINDS: [ResidualKind; 3] = [
    ResidualKind::Component(zar_core::ComponentKind::Quantile),
    ResidualKind::RandomizedQuantile,
    ResidualKind::ZAQR,
];

pub fn cmd_fit(args: &FitArgs) -> CliResult<()> {
    let cfg = RunConfig::load(&args.common.config)?;
    let spec = cfg.model_spec()?;
    let data = load_data(&cfg, &spec, &args.data)?;
    let fitted = fit(&spec, &data, &cfg.fit_options()?)?;
    let out = &args.common.out;
    write_json(&out.join(FIT_FILE), &fitted)?;

    let wald = if fitted.converged() { Some(wald_tests(&fitted)) } else { None };
    let rows = match &wald {
        Some(Ok(rows)) => rows.as_slice(),
        _ => &[],
    };
    write_csv(
        &out.join("wald.csv"),
        &strings(&["equation", "variable", "estimate", "std_error", "z", "p_value"]),
        rows.iter().map(|r| {
            vec![
                r.submodel.name().to_string(),
                r.variable.clone(),
                r.estimate.to_string(),
                r.std_error.to_string(),
                r.z.to_string(),
                r.p_value.to_string(),
            ]
        }),
    )?;
    let report = fit_report(&fitted, rows);
    write_text(&out.join("report.txt"), &report)?;
    print!("{report}");

    match wald {
        None => Err(CliError::NonConvergence(format!(
            "the optimizer stopped after {} iterations without converging (max |gradient| {:.3e}); \
             the fit artifact was written for inspection",
            fitted.convergence.iterations, fitted.convergence.gradient_norm
        ))),
        Some(Err(e)) => Err(e.into()),
        Some(Ok(_)) => Ok(()),
    }
}

pub fn cmd_diagnose(args: &DiagnoseArgs) -> CliResult<()> {
    let (cfg, fitted, data) = load_fit_and_data(&args.common, &args.data, args.fit.as_deref())?;
    let kinds = cfg.kinds(args.kinds.as_deref(), &DEFAULT_DIAGNOSE_KINDS)?;
    let seed = args.common.seed;
    let residuals = kinds
        .iter()
        .map(|&k| compute(&fitted, Some(&data), k, seed))
        .collect::<Result<Vec<_>, _>>()?;

    let out = &args.common.out;
    let mut header = strings(&["id", "y", "mu", "phi", "alpha"]);
    header.extend(kinds.iter().map(|k| k.to_string()));
    write_csv(
        &out.join("residuals.csv"),
        &header,
        (0..fitted.n()).map(|i| {
            let p = &fitted.fitted[i];
            let mut row = vec![
                fitted.ids[i].clone(),
                fitted.response[i].to_string(),
                p.mu.to_string(),
                p.phi.to_string(),
                p.alpha.to_string(),
            ];
            row.extend(residuals.iter().map(|r| cell(r.values[i])));
            row
        }),
    )?;
    for r in &residuals {
        write_csv(
            &out.join(format!("plot_{}.csv", r.kind)),
            &strings(&["id", "mu_hat", "residual"]),
            r.values.iter().enumerate().filter_map(|(i, v)| {
                v.map(|v| vec![fitted.ids[i].clone(), fitted.fitted[i].mu.to_string(), v.to_string()])
            }),
        )?;
    }
    for r in &residuals {
        let defined: Vec<f64> = r.defined().collect();
        let extreme = defined.iter().filter(|v| v.abs() > 3.0).count();
        println!("{:<16} {} defined, {} beyond |3|", r.kind.to_string(), defined.len(), extreme);
    }
    info!("wrote residuals for {} observations to {}", fitted.n(), out.display());
    Ok(())
}

pub fn cmd_envelope(args: &EnvelopeArgs) -> CliResult<()> {
    let (cfg, fitted, data) = load_fit_and_data(&args.common, &args.data, args.fit.as_deref())?;
    let kind_name = args.kind.as_deref().or(cfg.envelope.kind.as_deref()).unwrap_or("zaqr");
    let kind: ResidualKind = kind_name.parse()?;
    let opts = EnvelopeOptions {
        replicates: args.replicates.or(cfg.envelope.replicates).unwrap_or(100),
        band: cfg.envelope_band(args.band.as_deref())?,
        seed: args.common.seed,
    };
    let env = halfnormal_envelope(&fitted, &data, kind, &opts)?;
    write_envelope(&args.common.out.join(format!("envelope_{kind}.csv")), &env)?;
    println!(
        "{kind}: {} points, {:.1}% inside the band, {} replicates used, {} dropped",
        env.rows.len(),
        100.0 * env.coverage(),
        env.replicates_used,
        env.replicates_dropped
    );
    Ok(())
}

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    let cfg = RunConfig::load(&args.common.config)?;
    let covariates = match &args.data {
        Some(path) => {
            let spec = cfg.model_spec()?;
            Some(read_dataset(path, None, &model_covariates(&spec), None, None)?)
        }
        None => None,
    };
    let scenario = cfg.scenario(covariates.as_ref())?;
    let sc = cfg.scenario.as_ref();
    let kinds = match args.kinds.as_deref().or(sc.and_then(|s| s.kinds.as_deref())) {
        Some(names) => crate::config::parse_kinds(names)?,
        None => vec![ResidualKind::ZAQR],
    };
    let defaults = StudyOptions::default();
    let opts = StudyOptions {
        reps: args.reps.or(sc.and_then(|s| s.reps)).unwrap_or(defaults.reps),
        kinds,
        seed: args.common.seed,
        tails: cfg.tails()?,
        workers: args.workers.or(sc.and_then(|s| s.workers)),
        ..defaults
    };
    if opts.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let report = zar_core::run_study(&scenario, &opts)?;
    write_sim_report(&args.common.out, &report)?;
    print!("{}", report.summary_csv());
    if report.nonconverged > 0 {
        println!("{} of {} replications did not converge and were excluded", report.nonconverged, report.reps);
    }
    Ok(())
}

pub fn cmd_synth(args: &SynthArgs) -> CliResult<()> {
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let data = exam_scores(args.n, args.seed)?;
    let mut cols: Vec<&str> = SCORE_COLUMNS.to_vec();
    cols.extend([MALE, AGE_OVER_25]);
    let mut header = strings(&["id", SYNTH_RESPONSE]);
    header.extend(strings(&cols));
    let columns: Vec<&[f64]> = cols.iter().map(|c| data.column(c).expect("synthetic column")).collect();
    write_csv(
        &args.out,
        &header,
        (0..data.len()).map(|i| {
            let mut row = vec![data.ids()[i].clone(), data.response()[i].to_string()];
            row.extend(columns.iter().map(|c| c[i].to_string()));
            row
        }),
    )?;
    println!("wrote {} synthetic rows ({} zeros) to {}", data.len(), data.zero_count(), args.out.display());
    Ok(())
}

fn load_data(cfg: &RunConfig, spec: &ZarModelSpec, path: &Path) -> CliResult<Dataset> {
    read_dataset(path, Some(cfg.response()?), &model_covariates(spec), cfg.id.as_deref(), Some(spec.family))
}

/// Loads the fit artifact and the data it was made from, checking that
/// the two belong together.
fn load_fit_and_data(common: &Common, data: &Path, fit_path: Option<&Path>) -> CliResult<(RunConfig, ZarFit, Dataset)> {
    let cfg = RunConfig::load(&common.config)?;
    let fit_path: PathBuf = fit_path.map(Path::to_path_buf).unwrap_or_else(|| common.out.join(FIT_FILE));
    let text = fs::read_to_string(&fit_path).map_err(|e| CliError::io(&fit_path, e))?;
    let fitted: ZarFit = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: not a fit artifact: {e}", fit_path.display())))?;
    if cfg.family.is_some() && cfg.model_spec()? != fitted.spec {
        return Err(CliError::Usage(format!(
            "the model in {} differs from the one in {}",
            common.config.display(),
            fit_path.display()
        )));
    }
    let data = load_data(&cfg, &fitted.spec, data)?;
    if data.response() != fitted.response.as_slice() || data.ids() != fitted.ids.as_slice() {
        return Err(CliError::Data(format!(
            "the data do not match the responses stored in {}",
            fit_path.display()
        )));
    }
    Ok((cfg, fitted, data))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_text(path, &text)
}

fn write_envelope(path: &Path, env: &Envelope) -> CliResult<()> {
    write_csv(
        path,
        &strings(&["i", "score", "lower", "median", "upper", "observed"]),
        env.rows.iter().map(|r| {
            vec![
                r.index.to_string(),
                r.score.to_string(),
                r.lower.to_string(),
                r.median.to_string(),
                r.upper.to_string(),
                r.observed.to_string(),
            ]
        }),
    )
}

fn write_sim_report(out: &Path, report: &SimReport) -> CliResult<()> {
    write_text(&out.join("summary.csv"), &report.summary_csv())?;
    write_text(&out.join("observations.csv"), &report.observations_csv())?;
    write_json(&out.join("metadata.json"), &report.metadata())
}

/// P-value with four decimals, floored at `< 0.0001`.
pub fn format_p(p: f64) -> String {
    if p < 0.0001 {
        "< 0.0001".into()
    } else {
        format!("{p:.4}")
    }
}

fn fit_report(fit: &ZarFit, rows: &[WaldRow]) -> String {
    let mut s = String::new();
    let zeros = fit.response.iter().filter(|&&y| y == 0.0).count();
    let c = fit.convergence;
    let _ = writeln!(s, "family: {}", fit.family());
    let _ = writeln!(s, "observations: {} ({zeros} zeros)", fit.n());
    let _ = writeln!(s, "log-likelihood: {:.4}", fit.loglik);
    let _ = writeln!(
        s,
        "converged: {} after {} iterations (max |gradient| {:.2e})",
        c.converged, c.iterations, c.gradient_norm
    );
    if let Some(d) = fit.degenerate {
        let _ = writeln!(s, "degenerate data: {d:?}; the alpha submodel was not estimated");
    }
    if rows.is_empty() {
        return s;
    }
    let w = rows.iter().map(|r| r.variable.len()).max().unwrap_or(8).max(8);
    let _ = writeln!(s);
    let _ = writeln!(s, "{:<9} {:<w$} {:>12} {:>15} {:>9}", "Equation", "Variable", "Estimate", "Standard error", "P-value");
    for r in rows {
        let _ = writeln!(
            s,
            "{:<9} {:<w$} {:>12.4} {:>15.4} {:>9}",
            r.submodel.name(),
            r.variable,
            r.estimate,
            r.std_error,
            format_p(r.p_value)
        );
    }
    s
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_value_display() {
        assert_eq!(format_p(0.00009), "< 0.0001");
        assert_eq!(format_p(0.0001), "0.0001");
        assert_eq!(format_p(0.04567), "0.0457");
        assert_eq!(format_p(1.0), "1.0000");
    }
}
