//! `logbandit` command line: `design`, `warmup-bench`, `regret`, `bias`, `table1`.
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage error, 3 config error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use logbandit::harness::output::{write_csv, write_json};
use logbandit::harness::{
    bias_experiment, design_contrast_experiment, design_experiment, regret_experiment,
    table1_experiment, warmup_bench_experiment, ArmSpec, ExperimentConfig, ExperimentKind,
    ThetaSpec,
};
use logbandit::Error;

// Ignores write failures so `logbandit ... | head` exits quietly.
macro_rules! say {
    ($($t:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

#[derive(Debug, Parser)]
#[command(name = "logbandit", version, about = "Logistic bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// G- and H-optimal designs for one instance, printed as JSON.
    Design(DesignArgs),
    /// Naive, WAR and oracle warmups with real sampling.
    WarmupBench(Common),
    /// HOMER against the baselines.
    Regret(Common),
    /// Exact 1-d bias of the MLE and KT estimators.
    Bias(BiasArgs),
    /// Warmup sample counts on random unit-sphere instances.
    Table1(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repeats: Option<usize>,
    /// Output directory; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DesignArgs {
    #[arg(long, conflicts_with_all = ["arms", "theta"])]
    config: Option<PathBuf>,
    /// `circle30`, `sphere20`, `grid2001` or `spacedK`.
    #[arg(long, default_value = "circle30")]
    arms: String,
    /// Comma-separated coordinates of theta.
    #[arg(long, default_value = "3,0", allow_hyphen_values = true)]
    theta: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Target certificate gap of the solver.
    #[arg(long)]
    tol: Option<f64>,
    /// Also write `design_contrast.json` here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BiasArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Natural parameter `c` (ignored with `--config`).
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    c: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `argv` (program name first), runs, and returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidDelta(_) => 3,
                _ => 1,
            }
        }
    }
}

fn load(common: &Common, kind: ExperimentKind) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if cfg.kind != kind {
        return Err(Error::Config(format!(
            "config kind is {:?}, this subcommand needs {kind:?}",
            cfg.kind
        )));
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(r) = common.repeats {
        cfg.repeats = r;
    }
    if let Some(o) = &common.out {
        cfg.output = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cfg: &ExperimentConfig) -> Result<PathBuf, Error> {
    let dir = cfg.output.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn announce(path: &Path) {
    eprintln!("wrote {}", path.display());
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Table1(c) => {
            let cfg = load(&c, ExperimentKind::Table1)?;
            let out = table1_experiment(&cfg)?;
            let dir = out_dir(&cfg)?;
            write_csv(&dir.join("table1.csv"), "table1", &out.rows)?;
            write_csv(
                &dir.join("table1_summary.csv"),
                "table1_summary",
                &out.summary,
            )?;
            for s in &out.summary {
                say!(
                    "{:>6} S={:<4} planning {:>12.1} ± {:<10.1} total {:>12.1}",
                    s.method,
                    s.s,
                    s.mean_planning,
                    s.std_planning,
                    s.mean_total
                );
            }
            announce(&dir.join("table1.csv"));
        }
        Command::Regret(c) => {
            let cfg = load(&c, ExperimentKind::Regret)?;
            let out = regret_experiment(&cfg)?;
            let dir = out_dir(&cfg)?;
            write_csv(&dir.join("regret.csv"), "regret", &out.curves)?;
            write_csv(
                &dir.join("regret_summary.csv"),
                "regret_summary",
                &out.summary,
            )?;
            for s in &out.summary {
                say!(
                    "{:>10} seed={:<20} R_T={:.1}",
                    s.policy,
                    s.seed,
                    s.final_regret
                );
            }
            announce(&dir.join("regret.csv"));
        }
        Command::WarmupBench(c) => {
            let cfg = load(&c, ExperimentKind::WarmupBench)?;
            let rows = warmup_bench_experiment(&cfg)?;
            let dir = out_dir(&cfg)?;
            write_csv(&dir.join("warmup.csv"), "warmup", &rows)?;
            for m in ["naive", "war", "oracle"] {
                let sel: Vec<_> = rows.iter().filter(|r| r.method == m).collect();
                let mean = sel.iter().map(|r| r.total as f64).sum::<f64>() / sel.len() as f64;
                let fails = sel.iter().filter(|r| !r.valid).count();
                say!("{m:>6} mean total {mean:.1}, invalid {fails}/{}", sel.len());
            }
            announce(&dir.join("warmup.csv"));
        }
        Command::Bias(b) => {
            let (cfg, dir) = match &b.config {
                Some(p) => {
                    let cfg = ExperimentConfig::load(p)?;
                    let dir = b.out.clone().or(cfg.output.clone());
                    (cfg, dir)
                }
                None => {
                    let mut cfg = ExperimentConfig::new(
                        ExperimentKind::Bias,
                        1,
                        ArmSpec::Grid { count: 2 },
                        0.05,
                        0,
                    );
                    cfg.s = b.c;
                    (cfg, b.out.clone())
                }
            };
            if cfg.kind != ExperimentKind::Bias {
                return Err(Error::Config("config kind must be bias".into()));
            }
            let rows = bias_experiment(&cfg)?;
            for r in &rows {
                say!(
                    "{:>3} N={:<6} bias={:+.6e} normalized={:+.6}",
                    r.estimator.name(),
                    r.n,
                    r.bias,
                    r.normalized_bias
                );
            }
            if let Some(dir) = dir {
                std::fs::create_dir_all(&dir)?;
                write_csv(&dir.join("bias.csv"), "bias", &rows)?;
                announce(&dir.join("bias.csv"));
            }
        }
        Command::Design(a) => {
            let mut cfg = match &a.config {
                Some(p) => ExperimentConfig::load(p)?,
                None => {
                    let arms = ArmSpec::parse_short(&a.arms)?;
                    let coords = parse_vector(&a.theta)?;
                    let d = coords.len();
                    let mut cfg = ExperimentConfig::new(ExperimentKind::Design, d, arms, 0.05, 0);
                    cfg.theta = ThetaSpec::Explicit { coords };
                    cfg
                }
            };
            if !matches!(
                cfg.kind,
                ExperimentKind::Design | ExperimentKind::DesignContrast
            ) {
                return Err(Error::Config(
                    "config kind must be design or design-contrast".into(),
                ));
            }
            if let Some(s) = a.seed {
                cfg.seed = s;
            }
            if let Some(t) = a.tol {
                cfg.design.tol = t;
            }
            cfg.validate()?;
            let pair = design_experiment(&cfg)?;
            let json = serde_json::to_string_pretty(&pair).map_err(|e| Error::Io(e.to_string()))?;
            say!("{json}");
            if let Some(dir) = a.out.or(cfg.output.clone()) {
                std::fs::create_dir_all(&dir)?;
                let contrast = design_contrast_experiment(&cfg)?;
                write_json(&dir.join("design_contrast.json"), &contrast)?;
                announce(&dir.join("design_contrast.json"));
            }
        }
    }
    Ok(())
}

fn parse_vector(s: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number '{p}' in '{s}'")))
        })
        .collect()
}
