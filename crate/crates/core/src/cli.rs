//! Command-line front end: `run`, `models` and `validate`.

use crate::config::{self, Command, OutputFormat, RunConfig};
use crate::decomposition::{self, ClassifyOptions, MEMBERSHIP_TOL};
use crate::error::{Error, Result};
use crate::liouvillian::{self, eis_check, LindbladGenerator, CHOI_TOL, CONTRACTION_TOL, TRACE_TOL};
use crate::models::{ModelSpec, MODEL_SCHEMAS};
use crate::operator::{self, DENSITY_TOL, HERMITIAN_TOL};
use crate::sieve;
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "qsieve", version, about = "Sieve quasi-classical states of Lindblad dynamics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Run the command described by a configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `seed` in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = "QSIEVE_THREADS")]
        threads: Option<usize>,
    },
    /// List built-in model types with their parameters.
    Models,
    /// Parse and validate a configuration without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Exit status for an error: 1 for bad input, 2 for numerical failure.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        2
    } else {
        1
    }
}

pub fn error_json(err: &Error) -> Value {
    let mut body = json!({ "kind": err.kind(), "message": err.to_string() });
    match err {
        Error::Config { path, message } => {
            body["path"] = json!(path);
            body["detail"] = json!(message);
        }
        Error::Parse { line, column, .. } => {
            body["line"] = json!(line);
            body["column"] = json!(column);
        }
        _ => {}
    }
    json!({ "error": body })
}

/// Entry point shared by the binary; returns the process exit status.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            exit_code(&e)
        }
    }
}

fn read_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    config::parse_config(&text)
}

fn dispatch(cmd: CliCommand) -> Result<()> {
    match cmd {
        CliCommand::Models => {
            for (name, schema) in MODEL_SCHEMAS {
                println!("{name:<8} {schema}");
            }
            Ok(())
        }
        CliCommand::Validate { config } => {
            let cfg = read_config(&config)?;
            println!("{}", serde_json::to_string_pretty(&cfg).expect("config serializes"));
            Ok(())
        }
        CliCommand::Run { config, out, seed, threads } => {
            let mut cfg = read_config(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = threads {
                if n == 0 {
                    return Err(Error::config("--threads", "must be at least 1"));
                }
                // A pool may already exist when called as a library.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            let dir = out
                .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("qsieve-out"));
            for path in run(&cfg, &dir)? {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}

/// Wall-clock stamp for headers. `SOURCE_DATE_EPOCH`, when set, replaces
/// the current time so that repeated runs produce identical files.
pub fn wall_clock() -> String {
    let secs = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.trim().parse::<i64>().ok());
    let t = match secs {
        Some(s) => chrono::DateTime::from_timestamp(s, 0).unwrap_or_default(),
        None => chrono::Utc::now(),
    };
    t.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Header object written at the top of every output file.
pub fn header(cfg: &RunConfig) -> Value {
    json!({
        "tool": "qsieve",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cfg.command().name(),
        "seed": cfg.seed,
        "wall_clock": wall_clock(),
        "tolerances": {
            "hermitian": HERMITIAN_TOL,
            "density": DENSITY_TOL,
            "choi": CHOI_TOL,
            "trace": TRACE_TOL,
            "contraction": CONTRACTION_TOL,
            "membership": MEMBERSHIP_TOL,
            "sieve_gradient": cfg.sieve.tol,
            "sieve_epsilon": cfg.sieve.epsilon,
            "split": cfg.split_tol,
        },
        "config": cfg,
    })
}

/// `{:.16e}`: 17 significant digits, platform independent.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

const INTEGER_COLUMNS: [&str; 2] = ["index", "quasi_classical"];

/// CSV text: a `# {header}` line, a column line, then rows.
pub fn csv_text(header: &Value, columns: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = String::new();
    s.push_str("# ");
    s.push_str(&header.to_string());
    s.push('\n');
    s.push_str(&columns.join(","));
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .zip(columns)
            .map(|(&x, &c)| if INTEGER_COLUMNS.contains(&c) { format!("{}", x as i64) } else { fmt_float(x) })
            .collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

fn json_text(header: &Value, result: Value) -> String {
    let mut s = serde_json::to_string_pretty(&json!({ "header": header, "result": result })).expect("values serialize");
    s.push('\n');
    s
}

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// An output file before it is written.
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// Execute `cfg` and write its artifacts into `dir`.
pub fn run(cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let artifacts = execute(cfg)?;
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for a in artifacts {
        let path = dir.join(&a.name);
        write_atomic(&path, &a.contents)?;
        written.push(path);
    }
    Ok(written)
}

/// Execute `cfg` and return its artifacts without touching the disk.
pub fn execute(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let gen = cfg.model.build()?;
    let head = header(cfg);
    let cmd = cfg.command();
    let ext = match cfg.format() {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    let name = format!("{}.{ext}", cmd.name());
    let eis = match cfg.model {
        ModelSpec::Custom { .. } => Some(serde_json::to_value(eis_check(&gen, 8, &[0.1, 1.0, 10.0], cfg.seed)).expect("report serializes")),
        _ => None,
    };
    let attach = |mut v: Value| {
        if let Some(e) = &eis {
            v["eis_check"] = e.clone();
        }
        v
    };
    let mut out = Vec::new();
    match cmd {
        Command::Evolve => {
            let (columns, rows) = evolve_table(cfg, &gen)?;
            out.push(tabular(cfg, &head, &name, &columns, rows, &attach));
        }
        Command::Lambda => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let states = config::resolve_states(&cfg.states, gen.dim(), &mut rng, "states")?;
            let rows: Vec<Vec<f64>> =
                states.iter().enumerate().map(|(i, s)| vec![i as f64, sieve::lambda_pure(&gen, s)]).collect();
            match cfg.format() {
                OutputFormat::Csv => out.push(Artifact { name, contents: csv_text(&head, &["index", "lambda"], &rows) }),
                OutputFormat::Json => {
                    let entries: Vec<Value> =
                        states.iter().zip(&rows).map(|(s, r)| json!({ "lambda": r[1], "amplitudes": s })).collect();
                    out.push(Artifact { name, contents: json_text(&head, attach(json!({ "states": entries }))) });
                }
            }
        }
        Command::Sieve => {
            let report = sieve::minimize_lambda(&gen, &cfg.sieve_options())?;
            let h = &report.histogram;
            let hist_rows: Vec<Vec<f64>> =
                (0..h.counts.len()).map(|k| vec![h.edges[k], h.edges[k + 1], h.counts[k] as f64]).collect();
            match cfg.format() {
                OutputFormat::Json => {
                    let v = serde_json::to_value(&report).expect("report serializes");
                    out.push(Artifact { name, contents: json_text(&head, attach(v)) });
                }
                OutputFormat::Csv => {
                    let rows: Vec<Vec<f64>> = report
                        .minimizers
                        .iter()
                        .zip(&report.quasi_classical_flags)
                        .enumerate()
                        .map(|(i, (m, &q))| vec![i as f64, m.lambda, if q { 1.0 } else { 0.0 }])
                        .collect();
                    out.push(Artifact { name, contents: csv_text(&head, &["index", "lambda", "quasi_classical"], &rows) });
                }
            }
            out.push(Artifact {
                name: "sieve_histogram.csv".into(),
                contents: csv_text(&head, &["lower", "upper", "count"], &hist_rows),
            });
        }
        Command::Decompose => {
            let sup = gen.superoperator();
            let split = decomposition::spectral_split(&sup, cfg.split_tol)?;
            let props = decomposition::verify_split_properties(&sup, &split, &cfg.verify_times, cfg.verify_samples, cfg.seed);
            let peripheral: Vec<[f64; 2]> = split.peripheral_eigenvalues.iter().map(|z| [z.re, z.im]).collect();
            match cfg.format() {
                OutputFormat::Json => {
                    let v = json!({
                        "dim": split.dim(),
                        "iso_dim": split.iso_dim(),
                        "sweep_dim": split.sweep_dim(),
                        "peripheral_eigenvalues": peripheral,
                        "diagnostics": split.diagnostics,
                        "properties": props,
                    });
                    out.push(Artifact { name, contents: json_text(&head, attach(v)) });
                }
                OutputFormat::Csv => {
                    let rows: Vec<Vec<f64>> = peripheral.iter().map(|z| vec![z[0], z[1]]).collect();
                    out.push(Artifact { name, contents: csv_text(&head, &["re", "im"], &rows) });
                }
            }
        }
        Command::Classify => {
            let sup = gen.superoperator();
            let split = decomposition::spectral_split(&sup, cfg.split_tol)?;
            let opts = ClassifyOptions { seed: cfg.seed, n_ratio: cfg.sieve.n_ratio, n_phase: cfg.sieve.n_phase, ..Default::default() };
            let set = decomposition::classical_states(&gen, &split, &opts)?;
            match cfg.format() {
                OutputFormat::Json => {
                    let v = serde_json::to_value(&set).expect("set serializes");
                    out.push(Artifact { name, contents: json_text(&head, attach(v)) });
                }
                OutputFormat::Csv => {
                    let rows: Vec<Vec<f64>> =
                        set.fixed_point_residuals.iter().enumerate().map(|(i, &r)| vec![i as f64, r]).collect();
                    out.push(Artifact { name, contents: csv_text(&head, &["index", "fixed_point_residual"], &rows) });
                }
            }
        }
    }
    Ok(out)
}

fn tabular(
    cfg: &RunConfig,
    head: &Value,
    name: &str,
    columns: &[&str],
    rows: Vec<Vec<f64>>,
    attach: &dyn Fn(Value) -> Value,
) -> Artifact {
    let contents = match cfg.format() {
        OutputFormat::Csv => csv_text(head, columns, &rows),
        OutputFormat::Json => json_text(head, attach(json!({ "columns": columns, "rows": rows }))),
    };
    Artifact { name: name.to_string(), contents }
}

/// `(t, S_lin(T_t ρ), ½‖T_t ρ - ρ_∞‖₁)` where `ρ_∞` is the projection of
/// `ρ` onto the stationary states.
fn evolve_table(cfg: &RunConfig, gen: &LindbladGenerator) -> Result<(Vec<&'static str>, Vec<Vec<f64>>)> {
    let rho0 = config::resolve_density(&cfg.initial_state, gen.dim(), cfg.seed, "initial_state")?;
    let times = cfg.times.values();
    let series = liouvillian::evolve_series(gen, &rho0, &times)?;
    let stationary = decomposition::stationary_projection(&gen.superoperator(), cfg.split_tol)?.apply(&rho0);
    let rows = times
        .iter()
        .zip(&series)
        .map(|(&t, rho)| vec![t, operator::linear_entropy_raw(rho), 0.5 * operator::trace_norm(&(rho - &stationary))])
        .collect();
    Ok((vec!["t", "S_lin", "dist"], rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_seventeen_digits() {
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_float(-2.5), "-2.5000000000000000e0");
        let back: f64 = fmt_float(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(exit_code(&Error::config("model.kappa", "bad")), 1);
        assert_eq!(exit_code(&Error::NonConvergence { dropped: 1, max_iter: 2 }), 2);
        assert_eq!(exit_code(&Error::DefectivePeripheral { eigenvalue: "0".into(), coupling: 1.0 }), 2);
    }

    #[test]
    fn toy_evolve_decays_to_maximally_mixed() {
        let cfg = config::parse_config(
            r#"{"model":{"type":"toy"},"command":"evolve","initial_state":"basis:0","times":[0.0,1.0,20.0]}"#,
        )
        .unwrap();
        let gen = cfg.model.build().unwrap();
        let (_, rows) = evolve_table(&cfg, &gen).unwrap();
        assert!(rows[0][1].abs() < 1e-15);
        assert!((rows[0][2] - 0.5).abs() < 1e-12);
        // Off-diagonal and population deviations decay at rate 2.
        assert!((rows[1][2] - 0.5 * (-2.0f64).exp()).abs() < 1e-10);
        assert!((rows[2][1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn csv_has_header_line() {
        let cfg = config::parse_config(r#"{"model":{"type":"toy"},"command":"lambda","states":"random:3","seed":7}"#).unwrap();
        let arts = execute(&cfg).unwrap();
        let text = &arts[0].contents;
        let mut lines = text.lines();
        let first = lines.next().unwrap();
        assert!(first.starts_with("# {"));
        let h: Value = serde_json::from_str(&first[2..]).unwrap();
        assert_eq!(h["seed"], 7);
        assert_eq!(h["config"]["states"], "random:3");
        assert_eq!(lines.next().unwrap(), "index,lambda");
        assert_eq!(lines.count(), 3);
    }
}
