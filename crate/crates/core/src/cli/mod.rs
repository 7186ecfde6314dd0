//! The `mbk` front end and the file formats it reads and writes.
//!
//! Exit codes: 0 success, 1 an audit check failed, 2 usage error or
//! contract violation (including missing audit data), 3 I/O or
//! serialization failure.

pub mod args;
pub mod audit;
pub mod config_file;
pub mod data;
pub mod experiment;
pub mod json;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

use crate::engine::LearningRatePolicy;
use crate::error::{Error, Result};
use crate::geometry::cost;
use crate::oracle::{brute_force_optimal, TinyInstance};
use crate::sampling::{init_kmeanspp, InitScheme, RandomStream};

use args::{AuditArgs, Cli, Command, DataArgs, GenArgs, OracleArgs, RunArgs};
use audit::{AuditRequest, CheckKind, ConcentrationRequest};
use config_file::ConfigFile;
use data::{generate_synthetic, write_csv, DataSource, GenSpec};
use experiment::{run_experiment, ExperimentSpec, StopKind};

pub const DEFAULT_OUT_DIR: &str = "mbk-out";

/// Parses `args` (program name first) and runs the command; returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mbk: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Run(a) => cmd_run(&a, false),
        Command::Sweep(a) => cmd_run(&a, true),
        Command::Audit(a) => cmd_audit(&a),
        Command::Gen(a) => cmd_gen(&a),
        Command::OracleCheck(a) => cmd_oracle_check(&a),
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(value: Option<&str>) -> Result<Option<T>> {
    value.map(str::parse).transpose()
}

fn data_source(data: &DataArgs, file: &ConfigFile) -> Result<DataSource> {
    let normalize = data.normalize || file.get("normalize")?.unwrap_or(false);
    let header = data.header || file.get("header")?.unwrap_or(false);
    if let Some(path) = &data.data {
        return Ok(DataSource::Csv {
            path: path.clone(),
            normalize,
            header,
        });
    }
    if let Some(spec) = &data.gen {
        return Ok(DataSource::Generated(spec.parse()?));
    }
    match (file.raw("data"), file.raw("gen")) {
        (Some(path), None) => Ok(DataSource::Csv {
            path: PathBuf::from(path),
            normalize,
            header,
        }),
        (None, Some(spec)) => Ok(DataSource::Generated(spec.parse()?)),
        (Some(_), Some(_)) => Err(Error::contract("config sets both `data` and `gen`")),
        (None, None) => Err(Error::contract(
            "no dataset: pass --data <csv> or --gen <spec>",
        )),
    }
}

/// Merges command-line flags over config-file values over defaults.
pub fn experiment_spec(a: &RunArgs) -> Result<ExperimentSpec> {
    let file = match &a.config {
        Some(path) => ConfigFile::read(path)?,
        None => ConfigFile::default(),
    };
    let source = data_source(&a.data, &file)?;
    let k =
        a.k.or(file.get("k")?)
            .ok_or_else(|| Error::contract("missing --k"))?;
    let eps = a
        .eps
        .or(file.get("eps")?)
        .ok_or_else(|| Error::contract("missing --eps"))?;
    let out_dir = a
        .out_dir
        .clone()
        .or(file.get("out-dir")?)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));

    let mut spec = ExperimentSpec::new(source, k, eps, out_dir);
    spec.b = a.b.or(file.get("b")?);
    if let Some(p) = parse::<LearningRatePolicy>(a.rate.as_deref().or(file.raw("rate")))? {
        spec.policy = p;
    }
    if let Some(s) = parse::<StopKind>(a.stop.as_deref().or(file.raw("stop")))? {
        spec.stop = s;
    }
    if let Some(i) = parse::<InitScheme>(a.init.as_deref().or(file.raw("init")))? {
        spec.init = i;
    }
    spec.seed = a.seed.or(file.get("seed")?).unwrap_or(0);
    spec.trials = a.trials.or(file.get("trials")?).unwrap_or(1);
    spec.cap = a.cap.or(file.get("cap")?);
    spec.audit_global = a.audit_global || file.get("audit-global")?.unwrap_or(false);
    spec.audit_proximity = a.audit_proximity || file.get("audit-proximity")?.unwrap_or(false);
    spec.full_batch = a.full_batch || file.get("full-batch")?.unwrap_or(false);
    spec.sweep_b = a.sweep_b.clone().or(file.get_list("sweep-b")?);
    spec.sweep_eps = a.sweep_eps.clone().or(file.get_list("sweep-eps")?);
    spec.sweep_k = a.sweep_k.clone().or(file.get_list("sweep-k")?);
    spec.validate()?;
    Ok(spec)
}

fn cmd_run(a: &RunArgs, sweep: bool) -> Result<i32> {
    let spec = experiment_spec(a)?;
    if sweep && !spec.has_sweep() {
        return Err(Error::contract(
            "sweep needs at least one of --sweep-b, --sweep-eps, --sweep-k",
        ));
    }
    let outcome = run_experiment(&spec)?;
    for line in &outcome.summaries {
        println!("{line}");
    }
    println!(
        "{} runs; metrics in {}",
        outcome.rows.len(),
        outcome.metrics_path.display()
    );
    Ok(0)
}

fn cmd_audit(a: &AuditArgs) -> Result<i32> {
    let checks = a
        .checks
        .as_ref()
        .map(|names| {
            names
                .iter()
                .map(|n| n.parse::<CheckKind>())
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    let concentration = if a.concentration {
        Some(ConcentrationRequest {
            data: data_source(&a.data, &ConfigFile::default())?,
            k: a.k,
            b: a.b,
            delta: a.delta,
            trials: a.trials,
            seed: a.seed,
        })
    } else {
        None
    };
    let request = AuditRequest {
        traces: a.traces.clone(),
        checks,
        eps: a.eps,
        concentration,
    };
    let report = audit::run_audit(&request)?;
    json::write_file(&report, &a.out)?;
    for check in &report.checks {
        println!(
            "{:<20} {} ({} of {} events violated, budget {})",
            check.name,
            if check.pass { "PASS" } else { "FAIL" },
            check.violations,
            check.events,
            check.budget
        );
    }
    Ok(if report.pass { 0 } else { 1 })
}

fn cmd_gen(a: &GenArgs) -> Result<i32> {
    let spec: GenSpec = a.gen.parse()?;
    let dataset = generate_synthetic(&spec)?;
    write_csv(&dataset, &a.out)?;
    println!(
        "wrote {} points (d = {}) to {}",
        dataset.len(),
        dataset.dim(),
        a.out.display()
    );
    Ok(0)
}

fn cmd_oracle_check(a: &OracleArgs) -> Result<i32> {
    let spec: GenSpec = a.gen.parse()?;
    let dataset = generate_synthetic(&spec)?;
    let instance = TinyInstance::new(dataset.points().clone(), a.k)?;
    let optimum = brute_force_optimal(&instance);
    let root = RandomStream::new(spec.seed);
    let mut total = 0.0;
    for s in 0..a.seeds {
        let centers = init_kmeanspp(&dataset, a.k, &mut root.substream(s))?;
        total += cost(&dataset, &centers)?;
    }
    let mean = total / a.seeds.max(1) as f64;
    println!("optimum {:.12e}", optimum.cost);
    println!("kmeans++ mean over {} seeds {:.12e}", a.seeds, mean);
    if optimum.cost > 0.0 {
        println!("ratio {:.6}", mean / optimum.cost);
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(argv: &[&str]) -> RunArgs {
        let mut full = vec!["mbk", "run"];
        full.extend_from_slice(argv);
        match Cli::try_parse_from(full).unwrap().command {
            Command::Run(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("exp.conf");
        std::fs::write(
            &cfg,
            "# experiment\ngen = uniform:n=50,d=2,seed=1\nk = 3\neps = 0.2\nrate = sklearn\nsweep-eps = 0.1,0.2\n",
        )
        .unwrap();
        let cfg = cfg.to_str().unwrap();
        let spec = experiment_spec(&run_args(&["--config", cfg, "--k", "4"])).unwrap();
        assert_eq!(spec.k, 4);
        assert_eq!(spec.eps, 0.2);
        assert_eq!(spec.policy, LearningRatePolicy::SklearnCumulative);
        assert_eq!(spec.sweep_eps, Some(vec![0.1, 0.2]));
        assert_eq!(spec.stop, StopKind::Improve);
        assert_eq!(spec.b, None);
    }

    #[test]
    fn usage_errors_and_missing_inputs() {
        assert_eq!(main_with_args(["mbk", "--no-such-flag"]), 2);
        assert_eq!(main_with_args(["mbk", "--help"]), 0);
        assert!(experiment_spec(&run_args(&["--k", "2", "--eps", "0.1"])).is_err());
        assert!(experiment_spec(&run_args(&["--gen", "uniform:n=5,d=1", "--eps", "0.1"])).is_err());
        assert!(experiment_spec(&run_args(&[
            "--gen",
            "uniform:n=5,d=1",
            "--k",
            "1",
            "--eps",
            "0.1",
            "--rate",
            "fast"
        ]))
        .is_err());
    }
}
