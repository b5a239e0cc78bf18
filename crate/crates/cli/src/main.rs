use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use walsh_carleson::harness::{
    convergence_experiment, estimate_operator_norm, export, forest_orthogonality_report, run_invariant_suite, ExperimentConfig,
    ExportFormat, Report,
};

#[derive(Parser, Debug)]
#[command(name = "walsh-harness", version, about = "Exact checks and experiments for the Walsh model Carleson operator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the exact invariant suite.
    Verify(Common),
    /// Estimate operator norms over a range of resolutions.
    Norms(Common),
    /// Tabulate pointwise convergence of partial sums.
    Converge {
        #[command(flatten)]
        common: Common,
        /// indicator(a,b), walsh(n) or file(path).
        #[arg(long)]
        source: Option<String>,
        /// Starting frequencies n0 (repeatable).
        #[arg(long)]
        n0: Vec<u64>,
        /// Deviation thresholds (repeatable).
        #[arg(long)]
        eps: Vec<f64>,
    },
    /// Lie decompositions and their forest-orthogonality tables.
    Lie(Common),
    /// Convert a saved JSON report to JSON or CSV.
    Export {
        /// Report written by another subcommand with `--out x.json`.
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Output format; inferred from the extension when omitted.
        #[arg(long)]
        format: Option<ExportFormat>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// JSON file mirroring the experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// A resolution `r` or a range `a..b` (inclusive).
    #[arg(long)]
    res: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u32>,
    /// Exponents p (repeatable).
    #[arg(long)]
    p: Vec<f64>,
    /// Exact rational arithmetic.
    #[arg(long, conflicts_with = "float")]
    exact: bool,
    /// Floating-point arithmetic.
    #[arg(long)]
    float: bool,
    /// Negate one cell of a wave packet to exercise the suite.
    #[arg(long)]
    fault_injection: bool,
    /// Report destination; format from the extension (.json or .csv).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_res(s: &str) -> Result<(u32, u32)> {
    let parse = |t: &str| t.trim().parse::<u32>().with_context(|| format!("bad resolution {t:?}"));
    match s.split_once("..") {
        Some((a, b)) => Ok((parse(a)?, parse(b.trim_start_matches('='))?)),
        None => {
            let r = parse(s)?;
            Ok((r, r))
        }
    }
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path).with_context(|| format!("reading {}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        if let Some(r) = &self.res {
            (cfg.res_min, cfg.res_max) = parse_res(r)?;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.trials = trials;
        }
        if !self.p.is_empty() {
            cfg.p = self.p.clone();
        }
        if self.exact {
            cfg.exact = true;
        }
        if self.float {
            cfg.exact = false;
        }
        if self.fault_injection {
            cfg.fault_injection = true;
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn format_of(path: &Path, explicit: Option<ExportFormat>) -> Result<ExportFormat> {
    if let Some(f) = explicit {
        return Ok(f);
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => Ok(ext.parse()?),
        None => bail!("cannot infer the format of {}; pass --format", path.display()),
    }
}

fn finish(report: &Report, out: Option<&Path>) -> Result<ExitCode> {
    print!("{report}");
    if let Some(path) = out {
        export(report, format_of(path, None)?, path).with_context(|| format!("writing {}", path.display()))?;
    }
    let failures = report.failures().count();
    if failures == 0 {
        println!("all checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("{failures} checks failed");
        Ok(ExitCode::FAILURE)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Verify(c) => {
            let mut cfg = c.config()?;
            if !cfg.exact {
                eprintln!("verify always runs exact arithmetic; --float is ignored");
                cfg.exact = true;
            }
            finish(&run_invariant_suite(&cfg)?, cfg.out.as_deref())
        }
        Command::Norms(c) => {
            let cfg = c.config()?;
            finish(&estimate_operator_norm(&cfg)?, cfg.out.as_deref())
        }
        Command::Converge { common, source, n0, eps } => {
            let mut cfg = common.config()?;
            if let Some(s) = source {
                cfg.source = s;
            }
            if !n0.is_empty() {
                cfg.n0 = n0;
            }
            if !eps.is_empty() {
                cfg.eps = eps;
            }
            finish(&convergence_experiment(&cfg)?, cfg.out.as_deref())
        }
        Command::Lie(c) => {
            let cfg = c.config()?;
            finish(&forest_orthogonality_report(&cfg)?, cfg.out.as_deref())
        }
        Command::Export { input, out, format } => {
            let text = std::fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let report = Report::from_json_str(&text)?;
            export(&report, format_of(&out, format)?, &out).with_context(|| format!("writing {}", out.display()))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
