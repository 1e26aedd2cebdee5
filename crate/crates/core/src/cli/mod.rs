//! Command-line interface.
//!
//! Every subcommand reads a scenario (from `--in PATH`, or stdin when the flag
//! is absent or `-`), writes a JSON report to stdout and optionally an
//! artifact (CSV, SVG or DOT) to `--out`. Exit codes: 0 success, 1 internal
//! error or failed reference example, 2 invalid input, 3 violated premise.

pub mod reference;
pub mod report;
pub mod scenario;
pub mod svg;

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::compstat::{ratio_vs_level_demo, sweep, SweepSpec};
use crate::equilibrium::{classify, environment_point, region_boundaries};
use crate::error::{Error, Result};
use crate::reactive_design::{design_observable, design_unobservable, period_sweep, steady_state, OptimalReactive};
use crate::reshuffle_design;
use crate::scalar::{Rational, Scalar, Tolerance};
use crate::simulator::{estimate_deviation_gains, run, SimConfig};
use crate::static_assignment::{candidate_grid, TaskEnvironmentSpec};

use report::{
    CheckGameReport, ClassifyReport, CompstatReport, PlotReport, ReactiveReport, ReshuffleReport, SimulateReport,
    StaticReport,
};
use scenario::{Policy, Scenario, Subject};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_PREMISE: i32 = 3;

const DEFAULT_GRID_STEPS: usize = 20;

#[derive(Debug, Parser)]
#[command(name = "coopdesign", version, about = "Cooperation outcomes and team design for stochastic team games")]
struct Cli {
    #[command(flatten)]
    io: IoArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct IoArgs {
    /// Scenario JSON file, or `-` for stdin (the default).
    #[arg(long = "in", value_name = "PATH", global = true)]
    input: Option<String>,
    /// Artifact path (CSV, SVG or DOT depending on the command).
    #[arg(long, value_name = "PATH", global = true)]
    out: Option<PathBuf>,
    /// Exact rational arithmetic.
    #[arg(long, global = true)]
    exact: bool,
    /// Overrides the scenario's simulation seed.
    #[arg(long, value_name = "N", global = true)]
    seed: Option<u64>,
    /// Format of the report written to stdout.
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a stage game's structural properties and extract (c, d).
    CheckGame,
    /// Classify the player-optimal cooperation outcome of an environment.
    Classify,
    /// Optimal reshuffling rate.
    DesignReshuffle,
    /// Optimal static team structure.
    DesignStatic,
    /// Optimal reactive assignment chain.
    DesignReactive {
        /// Whether the designer observes good-game arrivals.
        #[arg(long, value_name = "BOOL", default_value_t = true, action = ArgAction::Set)]
        observe_good: bool,
    },
    /// Monte-Carlo simulation of a population of teams.
    Simulate,
    /// One-dimensional comparative statics.
    Compstat,
    /// Region diagram as SVG.
    PlotRegions,
    /// Reproduce the built-in worked example.
    PaperExamples,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::CheckGame => "check-game",
            Command::Classify => "classify",
            Command::DesignReshuffle => "design-reshuffle",
            Command::DesignStatic => "design-static",
            Command::DesignReactive { .. } => "design-reactive",
            Command::Simulate => "simulate",
            Command::Compstat => "compstat",
            Command::PlotRegions => "plot-regions",
            Command::PaperExamples => "paper-examples",
        }
    }

    fn supports_exact(&self) -> bool {
        matches!(
            self,
            Command::CheckGame
                | Command::Classify
                | Command::DesignReshuffle
                | Command::DesignStatic
                | Command::DesignReactive { .. }
                | Command::PaperExamples
        )
    }

    fn supports_csv(&self) -> bool {
        matches!(
            self,
            Command::DesignStatic | Command::Simulate | Command::Compstat | Command::PaperExamples
        )
    }

    fn has_artifact(&self) -> bool {
        matches!(
            self,
            Command::DesignStatic
                | Command::DesignReactive { .. }
                | Command::Simulate
                | Command::Compstat
                | Command::PlotRegions
        )
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Invalid(_) => EXIT_INVALID,
        Error::Premise(_) => EXIT_PREMISE,
        Error::Internal(_) => EXIT_INTERNAL,
    }
}

/// Runs the CLI against the process's stdin, stdout and stderr.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    dispatch_with_io(args, &mut stdin.lock(), &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the CLI with explicit streams.
pub fn dispatch_with_io<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, stdin, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn io_error(what: &str, path: &Path, e: std::io::Error) -> Error {
    Error::invalid(format!("cannot {what} {}: {e}", path.display()))
}

fn read_scenario(io: &IoArgs, stdin: &mut dyn Read) -> Result<Scenario> {
    let text = match io.input.as_deref() {
        None | Some("-") => {
            let mut s = String::new();
            stdin
                .read_to_string(&mut s)
                .map_err(|e| Error::invalid(format!("cannot read stdin: {e}")))?;
            s
        }
        Some(path) => std::fs::read_to_string(path).map_err(|e| io_error("read", Path::new(path), e))?,
    };
    Scenario::parse(&text)
}

fn write_artifact(io: &IoArgs, contents: &str) -> Result<()> {
    if let Some(path) = &io.out {
        std::fs::write(path, contents).map_err(|e| io_error("write", path, e))?;
    }
    Ok(())
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::internal(format!("serialising report: {e}")))?;
    emit(out, &(text + "\n"))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::internal(format!("writing output: {e}")))
}

/// Calls `$body` with `S = Rational` under `--exact`, `S = f64` otherwise.
macro_rules! with_backend {
    ($exact:expr, $f:ident ( $($arg:expr),* )) => {
        if $exact {
            $f::<Rational>($($arg),*)
        } else {
            $f::<f64>($($arg),*)
        }
    };
}

fn execute(cli: &Cli, stdin: &mut dyn Read, out: &mut dyn Write) -> Result<i32> {
    let io = &cli.io;
    let cmd = &cli.command;
    if io.exact && !cmd.supports_exact() {
        return Err(Error::invalid(format!("--exact is not supported by {}", cmd.name())));
    }
    if io.format == Some(Format::Csv) && !cmd.supports_csv() {
        return Err(Error::invalid(format!("--format csv is not supported by {}", cmd.name())));
    }
    if io.out.is_some() && !cmd.has_artifact() {
        return Err(Error::invalid(format!("{} writes no artifact; drop --out", cmd.name())));
    }
    if io.seed.is_some() && !matches!(cmd, Command::Simulate) {
        return Err(Error::invalid("--seed only applies to simulate"));
    }
    let tol = Tolerance::from_env()?;

    if let Command::PaperExamples = cmd {
        let report = reference::run_examples(tol)?;
        match io.format {
            None => emit(out, &report.to_text())?,
            Some(Format::Json) => emit_json(out, &report)?,
            Some(Format::Csv) => emit(out, &report.to_csv()?)?,
        }
        return Ok(if report.passed { EXIT_OK } else { EXIT_INTERNAL });
    }

    let scenario = read_scenario(io, stdin)?;
    let csv = io.format == Some(Format::Csv);
    match cmd {
        Command::CheckGame => {
            let game = scenario.game()?;
            emit_json(out, &with_backend!(io.exact, check_game(game, tol))?)?;
        }
        Command::Classify => {
            let env = scenario.environment()?;
            emit_json(out, &with_backend!(io.exact, classify_report(env, tol))?)?;
        }
        Command::DesignReshuffle => {
            let env = scenario.environment()?;
            emit_json(out, &with_backend!(io.exact, reshuffle_report(env, tol))?)?;
        }
        Command::DesignStatic => {
            let spec = scenario.task_environment()?;
            let report = with_backend!(io.exact, static_report(spec, tol))?;
            let steps = scenario.grid_steps.unwrap_or(DEFAULT_GRID_STEPS);
            let grid = candidate_csv(spec, steps, tol)?;
            write_artifact(io, &grid)?;
            if csv {
                emit(out, &grid)?;
            } else {
                emit_json(out, &report)?;
            }
        }
        Command::DesignReactive { observe_good } => {
            let spec = scenario.task_environment()?;
            let (mut report, dot, svg) = with_backend!(io.exact, reactive_report(spec, *observe_good, tol))?;
            if let Some(periods) = &scenario.periods {
                let env = spec.to_env::<f64>()?;
                let ts: Vec<f64> = periods.iter().map(|q| q.approx).collect();
                report.periods = Some(period_sweep(&env, &ts, tol)?);
            }
            if let Some(path) = &io.out {
                let is_svg = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("svg"));
                write_artifact(io, if is_svg { &svg } else { &dot })?;
            }
            emit_json(out, &report)?;
        }
        Command::Simulate => {
            let (report, series) = simulate(&scenario, io.seed, tol)?;
            write_artifact(io, &series)?;
            if csv {
                emit(out, &series)?;
            } else {
                emit_json(out, &report)?;
            }
        }
        Command::Compstat => {
            let report = compstat(&scenario, tol)?;
            let table = report.table.to_csv()?;
            write_artifact(io, &table)?;
            if csv {
                emit(out, &table)?;
            } else {
                emit_json(out, &report)?;
            }
        }
        Command::PlotRegions => {
            let env = scenario.environment()?.to_env::<f64>()?;
            let geometry = region_boundaries(&env.good, &env.bad);
            let point = environment_point(&env);
            let svg = svg::regions_svg(&geometry, Some(point));
            match &io.out {
                None => emit(out, &svg)?,
                Some(path) => {
                    write_artifact(io, &svg)?;
                    let report = PlotReport {
                        region: geometry.region_at(point, tol),
                        outcome: classify(&env, tol)?,
                        geometry,
                        point,
                        svg: path.display().to_string(),
                    };
                    emit_json(out, &report)?;
                }
            }
        }
        Command::PaperExamples => unreachable!("handled above"),
    }
    Ok(EXIT_OK)
}

fn check_game<S: Scalar>(game: &crate::stage_games::StageGameSpec, tol: Tolerance) -> Result<CheckGameReport> {
    CheckGameReport::build::<S>(game, tol)
}

fn classify_report<S: Scalar>(env: &crate::equilibrium::EnvironmentSpec, tol: Tolerance) -> Result<ClassifyReport> {
    ClassifyReport::build::<S>(env, tol)
}

fn reshuffle_report<S: Scalar>(env: &crate::equilibrium::EnvironmentSpec, tol: Tolerance) -> Result<ReshuffleReport> {
    ReshuffleReport::build::<S>(env, tol)
}

fn static_report<S: Scalar>(spec: &TaskEnvironmentSpec, tol: Tolerance) -> Result<StaticReport> {
    StaticReport::build::<S>(spec, tol)
}

fn designed<S: Scalar>(spec: &TaskEnvironmentSpec, observe_good: bool, tol: Tolerance) -> Result<OptimalReactive<S>> {
    let env = spec.to_env::<S>()?;
    if observe_good {
        design_observable(&env, tol)
    } else {
        design_unobservable(&env, tol)
    }
}

fn reactive_report<S: Scalar>(
    spec: &TaskEnvironmentSpec,
    observe_good: bool,
    tol: Tolerance,
) -> Result<(ReactiveReport, String, String)> {
    let design = designed::<S>(spec, observe_good, tol)?;
    let name = if observe_good { "observable" } else { "unobservable" };
    Ok((
        ReactiveReport::build(&design)?,
        design.chain.to_dot(name),
        svg::chain_svg(&design.chain),
    ))
}

fn candidate_csv(spec: &TaskEnvironmentSpec, steps: usize, tol: Tolerance) -> Result<String> {
    let env = spec.to_env::<f64>()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in candidate_grid(&env, steps, tol)? {
        w.serialize(c).map_err(|e| Error::internal(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::internal(e.to_string()))
}

fn simulate(scenario: &Scenario, seed: Option<u64>, tol: Tolerance) -> Result<(SimulateReport, String)> {
    let opts = scenario
        .simulation
        .as_ref()
        .ok_or_else(|| Error::invalid("simulate needs a `simulation` block"))?;
    let seed = seed.or(opts.seed).unwrap_or(0);
    let (policy, mut config) = match scenario.subject() {
        Subject::Environment(spec) => {
            let env = spec.to_env::<f64>()?;
            let reshuffle = match &opts.policy {
                None => reshuffle_design::design(&env, tol)?.r,
                Some(Policy::Team { reshuffle }) => *reshuffle,
                Some(_) => return Err(Error::invalid("an `environment` scenario only supports the `team` policy")),
            };
            let config = SimConfig::for_environment(&env, reshuffle, opts.teams, opts.horizon, seed)?;
            (Policy::Team { reshuffle }, config)
        }
        Subject::Tasks(spec) => {
            let env = spec.to_env::<f64>()?;
            match opts.policy.clone().unwrap_or(Policy::Reactive { observe_good: true }) {
                Policy::Reactive { observe_good } => {
                    let design = designed::<f64>(spec, observe_good, tol)?;
                    let config = SimConfig::for_reactive(&env, &design, opts.teams, opts.horizon, seed)?;
                    (Policy::Reactive { observe_good }, config)
                }
                Policy::Static { nu, reshuffle } => {
                    let config = SimConfig::for_static(&env, nu, reshuffle, opts.teams, opts.horizon, seed)?;
                    (Policy::Static { nu, reshuffle }, config)
                }
                Policy::Team { .. } => {
                    return Err(Error::invalid("the `team` policy needs an `environment` scenario"))
                }
            }
        }
        Subject::Game(_) => return Err(Error::invalid("simulate needs an environment or task_environment")),
    };
    if let Some(b) = opts.burn_in {
        config.burn_in = b;
        config.validate()?;
    }
    let steady = steady_state(&config.chain, &config.model.arrivals)?;
    let analytic_bad_share = config
        .chain
        .states
        .iter()
        .zip(&steady)
        .filter(|(s, _)| s.task == crate::reactive_design::Task::Bad)
        .fold(0.0, |acc, (_, p)| acc + p);
    let summary = run(&config)?;
    let deviation_gains = if opts.deviation_samples > 0 {
        Some(estimate_deviation_gains(&config, opts.deviation_samples)?)
    } else {
        None
    };
    let series = summary.series_csv()?;
    Ok((
        SimulateReport {
            policy,
            analytic_bad_share,
            summary,
            deviation_gains,
        },
        series,
    ))
}

fn compstat(scenario: &Scenario, tol: Tolerance) -> Result<CompstatReport> {
    let env = scenario.environment()?.to_env::<f64>()?;
    let opts = scenario
        .sweep
        .as_ref()
        .ok_or_else(|| Error::invalid("compstat needs a `sweep` block"))?;
    let table = sweep(
        &SweepSpec {
            base: env.clone(),
            axis: opts.axis,
            grid: opts.grid()?,
            with_optimal_reshuffle: opts.with_optimal_reshuffle,
        },
        tol,
    )?;
    let ratio = scenario
        .ratio
        .as_ref()
        .map(|r| ratio_vs_level_demo(&env, r.game, r.scale, tol))
        .transpose()?;
    Ok(CompstatReport { table, ratio })
}
