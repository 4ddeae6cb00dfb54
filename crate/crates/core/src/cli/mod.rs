//! Command-line experiment driver.

mod commands;
pub mod config;
pub mod expr;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

pub use config::Config;
pub use expr::{parse_expr, Expr};

use crate::error::{Error, Result};
use crate::testing::ProbeFit;
use crate::verdict::Verdict;

pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "gfkernel", version, about = "Experiments with nonlinear generalized functions on the line")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// key = value configuration file
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// output directory (overrides the config)
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// seed for the locality probes (overrides the config)
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// run a named demonstration
    Demo { name: DemoName },
    /// check the test-object conditions for the standard sequence
    ValidateTestobject,
    /// classify an expression: tag, locality probes, moderateness, negligibility
    Classify { expr: String },
    /// check whether two expressions are associated
    Associate { e1: String, e2: String },
    /// restriction, gluing, transitivity and support checks
    SheafDemo,
    /// checks for the two Lie derivatives
    LieCheck,
    /// seminorm sweeps of a fixed battery
    Export,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoName {
    DeltaSquared,
    IotaSigma,
    Heaviside,
    Restriction,
    Support,
}

impl DemoName {
    pub fn id(self) -> &'static str {
        match self {
            DemoName::DeltaSquared => "delta-squared",
            DemoName::IotaSigma => "iota-sigma",
            DemoName::Heaviside => "heaviside",
            DemoName::Restriction => "restriction",
            DemoName::Support => "support",
        }
    }
}

impl Command {
    /// File stem for the outputs.
    pub fn id(&self) -> String {
        match self {
            Command::Demo { name } => format!("demo-{}", name.id()),
            Command::ValidateTestobject => "validate-testobject".into(),
            Command::Classify { .. } => "classify".into(),
            Command::Associate { .. } => "associate".into(),
            Command::SheafDemo => "sheaf-demo".into(),
            Command::LieCheck => "lie-check".into(),
            Command::Export => "export".into(),
        }
    }
}

/// One `(experiment, seminorm)` group of the sweep table.
#[derive(Debug, Clone)]
pub struct Group {
    pub experiment: String,
    pub seminorm: String,
    pub values: Vec<(usize, f64)>,
    pub slope: Option<f64>,
    pub verdict: Verdict,
}

impl Group {
    pub fn from_fit(experiment: &str, p: &ProbeFit) -> Self {
        let (values, slope) = match &p.fit {
            Some(f) => (f.k_grid.iter().copied().zip(f.values.iter().copied()).collect(), Some(f.slope)),
            None => (Vec::new(), None),
        };
        Self { experiment: experiment.into(), seminorm: p.label.clone(), values, slope, verdict: p.verdict }
    }

    /// A group of single measurements with no fit.
    pub fn points(experiment: &str, seminorm: &str, values: Vec<(usize, f64)>, verdict: Verdict) -> Self {
        Self { experiment: experiment.into(), seminorm: seminorm.into(), values, slope: None, verdict }
    }
}

/// Everything a command produces.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub groups: Vec<Group>,
    pub verdicts: Vec<(String, Verdict)>,
}

impl Outcome {
    pub fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    /// Records a named check and its verdict in the report.
    pub fn check(&mut self, name: &str, v: Verdict) {
        self.lines.push(format!("[{v}] {name}"));
        self.verdicts.push((name.to_string(), v));
    }

    pub fn verdict(&self) -> Verdict {
        Verdict::all(self.verdicts.iter().map(|(_, v)| *v))
    }
}

/// Labels are free text; keep them from splitting a row.
fn field(s: &str) -> String {
    s.replace([',', '\n'], ";")
}

fn sci(v: f64) -> String {
    format!("{v:e}")
}

/// `experiment,k,seminorm,value,slope,verdict`.
pub fn render_csv(groups: &[Group]) -> String {
    let mut s = String::from("experiment,k,seminorm,value,slope,verdict\n");
    for g in groups {
        let slope = g.slope.map(sci).unwrap_or_default();
        for (k, v) in &g.values {
            let _ = writeln!(s, "{},{},{},{},{},{}", field(&g.experiment), k, field(&g.seminorm), sci(*v), slope, g.verdict);
        }
    }
    s
}

pub fn render_report(cmd: &Command, cfg: &Config, seed: u64, out: &Outcome) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "gfkernel {}", cmd.id());
    let _ = writeln!(s, "seed = {seed}");
    let _ = writeln!(s, "{}\n", cfg.render());
    for l in &out.lines {
        let _ = writeln!(s, "{l}");
    }
    let _ = writeln!(s, "\nverdict: {}", out.verdict());
    s
}

fn write_outputs(dir: &Path, stem: &str, csv: &str, report: &str) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    fs::write(dir.join(format!("{stem}.csv")), csv).map_err(io)?;
    fs::write(dir.join(format!("{stem}.txt")), report).map_err(io)?;
    Ok(())
}

/// Loads the configuration, runs the command and writes its outputs.
pub fn run(cli: &Cli) -> Result<Verdict> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::Config { key: "--config".into(), msg: format!("{}: {e}", p.display()) })?;
            Config::parse(&text)?
        }
        None => Config::default(),
    };
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    let seed = cli.seed.unwrap_or(cfg.seeds[0]);
    let outcome = commands::execute(&cli.command, &cfg, seed)?;
    let report = render_report(&cli.command, &cfg, seed, &outcome);
    write_outputs(&cfg.out, &cli.command.id(), &render_csv(&outcome.groups), &report)?;
    print!("{}", report);
    Ok(outcome.verdict())
}

/// Exit status for an error: 3 for bad input, 2 for computations that could
/// not reach a verdict.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Config { .. }
        | Error::Parse { .. }
        | Error::Io(_)
        | Error::DomainMismatch(_)
        | Error::NotLocal
        | Error::NotContained(..)
        | Error::InvalidArgument(_)
        | Error::InvalidRadius(_)
        | Error::WrongTag(_) => EXIT_USAGE,
        _ => Verdict::Inconclusive.exit_code(),
    }
}

/// Parses arguments, runs, and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(v) => v.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
