use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use sk_clt::covariance::{covariance_csv, covariance_json, CovarianceExport, CovarianceModel};
use sk_clt::harness::{
    report_csv, report_json, run_experiment_with, summary_table, tail_check, write_reports,
    ExperimentConfig, RunOptions, TailConfig,
};
use sk_clt::moments::{
    coeff_table, hermite_rule, q_table, ModelParams, ParamPolicy, Variants,
    DEFAULT_QUADRATURE_ORDER,
};
use sk_clt::skexact::FieldMode;
use sk_clt::Error;

#[derive(Parser)]
#[command(name = "skclt", version, about = "Overlap fluctuations of the SK model: theory and exact-enumeration checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the fixed point q2, the q_p table and the recursion coefficients.
    Theory(TheoryArgs),
    /// Write the limiting covariance matrices for n replicas.
    Covariance(CovarianceArgs),
    /// Run an experiment and write its report.
    Simulate(RunArgs),
    /// Run an experiment; exit 1 if any target misses its prediction.
    Verify(RunArgs),
    /// Score the estimates under every coefficient variant.
    Oracle(RunArgs),
    /// Overlap tail diagnostics only.
    Tails(RunArgs),
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long, default_value_t = 0.15)]
    beta: f64,
    #[arg(long, default_value_t = 0.3)]
    h: f64,
    #[arg(long)]
    allow_high_beta: bool,
}

impl ParamArgs {
    fn params(&self) -> Result<ModelParams, Error> {
        let p = ModelParams::new(self.beta, self.h)?;
        let policy = ParamPolicy {
            allow_high_beta: self.allow_high_beta,
            ..ParamPolicy::default()
        };
        for w in p.validate(&policy)? {
            eprintln!("warning: {w}");
        }
        Ok(p)
    }
}

#[derive(Args)]
struct TheoryArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 8)]
    p_max: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CovarianceArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Number of replicas.
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    p_max: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (key = value lines); defaults to the standard verification run.
    config: Option<PathBuf>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    /// Comma-separated system sizes.
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    order: Option<usize>,
    /// Switch the couplings off (independent spins in the field h).
    #[arg(long)]
    anchor_mode: bool,
    #[arg(long)]
    allow_high_beta: bool,
    /// Worker threads (0 = automatic).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default_verification(),
        };
        if self.beta.is_some() || self.h.is_some() {
            cfg.params = ModelParams::new(
                self.beta.unwrap_or(cfg.params.beta),
                self.h.unwrap_or(cfg.params.h),
            )?;
        }
        if let Some(g) = &self.n_grid {
            cfg.n_grid = g.clone();
        }
        if let Some(m) = self.samples {
            cfg.samples = m;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.order.is_some() {
            cfg.order = self.order;
        }
        if self.anchor_mode {
            cfg.field_mode = FieldMode::IndependentField;
        }
        cfg.allow_high_beta |= self.allow_high_beta;
        Ok(cfg)
    }

    fn options(&self) -> RunOptions {
        RunOptions {
            workers: self.workers,
            cache_dir: self.cache_dir.clone(),
        }
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn theory(a: &TheoryArgs) -> Result<ExitCode, Error> {
    let params = a.params.params()?;
    let rule = hermite_rule(DEFAULT_QUADRATURE_ORDER)?;
    let q = q_table(&params, &rule, (a.p_max + 6).max(8))?;
    let c = coeff_table(&q, Variants::default())?;
    let mut rows = Vec::new();
    for p in 0..=a.p_max {
        rows.push([
            p as f64,
            q.get(p)?,
            c.rho(p)?,
            c.pi(p as i64)?,
            c.phi(p)?,
            c.lambda(p)?,
        ]);
    }
    let text = match a.format {
        Format::Json => {
            let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<_>>();
            let v = json!({
                "beta": params.beta,
                "h": params.h,
                "q2": q.q2,
                "residual": q.residual(&rule),
                "q": col(1),
                "rho": col(2),
                "pi": col(3),
                "phi": col(4),
                "lambda": col(5),
            });
            serde_json::to_string_pretty(&v)? + "\n"
        }
        Format::Csv => {
            let mut s = format!("# beta={},h={},q2={:.16e}\np,q,rho,pi,phi,lambda\n", params.beta, params.h, q.q2);
            for r in &rows {
                s += &format!(
                    "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                    r[0], r[1], r[2], r[3], r[4], r[5]
                );
            }
            s
        }
    };
    emit(&text, a.out.as_ref())?;
    Ok(ExitCode::SUCCESS)
}

fn covariance(a: &CovarianceArgs) -> Result<ExitCode, Error> {
    if !(1..=4).contains(&a.n) || a.p_max > 6 {
        return Err(Error::InvalidArgument("covariance needs 1 <= n <= 4 and p_max <= 6".into()));
    }
    let params = a.params.params()?;
    let rule = hermite_rule(DEFAULT_QUADRATURE_ORDER)?;
    let model = CovarianceModel::new(params, &rule, Variants::default(), 2 * a.p_max + 2 * a.n + 4)?;
    for r in model.flagged_asymmetries() {
        eprintln!(
            "warning: asymmetric recursion entry s={} ({},{}) relative {:.3e}",
            r.s, r.p, r.pt, r.relative
        );
    }
    let export = CovarianceExport::build(&model, a.n, a.p_max)?;
    let text = match a.format {
        Format::Json => covariance_json(&export)? + "\n",
        Format::Csv => covariance_csv(&export),
    };
    emit(&text, a.out.as_ref())?;
    Ok(ExitCode::SUCCESS)
}

enum Mode {
    Simulate,
    Verify,
    Oracle,
}

fn experiment(a: &RunArgs, mode: Mode) -> Result<ExitCode, Error> {
    let mut cfg = a.config()?;
    if matches!(mode, Mode::Oracle) {
        cfg.oracle = true;
        cfg.tails = None;
    }
    let report = run_experiment_with(&cfg, &a.options())?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    write_reports(&report)?;
    match mode {
        Mode::Oracle => {
            let oracle = report.oracle.as_ref().expect("oracle enabled");
            let text = match a.format {
                Format::Json => serde_json::to_string_pretty(oracle)? + "\n",
                Format::Csv => {
                    let mut s = String::from("kappa,phi,target,theory,z\n");
                    for t in &oracle.tables {
                        for r in &t.rows {
                            s += &format!("{},{},\"{}\",{:.16e},{:.16e}\n", t.kappa, t.phi, r.label, r.theory, r.z);
                        }
                    }
                    for v in &oracle.verdicts {
                        s += &format!("# verdict {}: {} ({})\n", v.coefficient, v.verdict, v.reason);
                    }
                    s
                }
            };
            emit(&text, a.out.as_ref())?;
            for v in &oracle.verdicts {
                eprintln!("{}: {} ({})", v.coefficient, v.verdict, v.reason);
            }
            Ok(ExitCode::SUCCESS)
        }
        Mode::Simulate | Mode::Verify => {
            let text = match a.format {
                Format::Json => report_json(&report)?,
                Format::Csv => report_csv(&report),
            };
            match &a.out {
                Some(p) => {
                    std::fs::write(p, text)?;
                    print!("{}", summary_table(&report));
                }
                None => print!("{text}"),
            }
            if matches!(mode, Mode::Verify) && !report.passed {
                eprintln!("verification failed");
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn tails(a: &RunArgs) -> Result<ExitCode, Error> {
    let mut cfg = a.config()?;
    if cfg.tails.is_none() {
        cfg.tails = Some(TailConfig::default());
    }
    for w in cfg.validate()? {
        eprintln!("warning: {w}");
    }
    let t = tail_check(&cfg, a.workers)?;
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&t)? + "\n",
        Format::Csv => {
            let mut s = String::from("n_sites,t,mean,stderr\n");
            for r in &t.rows {
                s += &format!("{},{},{:.16e},{:.16e}\n", r.n_sites, r.t, r.mean, r.stderr);
            }
            s
        }
    };
    emit(&text, a.out.as_ref())?;
    if t.blowup {
        eprintln!("tail blow-up: max/min ratio {:?}", t.ratio);
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Theory(a) => theory(a),
        Command::Covariance(a) => covariance(a),
        Command::Simulate(a) => experiment(a, Mode::Simulate),
        Command::Verify(a) => experiment(a, Mode::Verify),
        Command::Oracle(a) => experiment(a, Mode::Oracle),
        Command::Tails(a) => tails(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
