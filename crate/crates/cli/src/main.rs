use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use conpart_cli::files::{self, InputError, PairFile, ProblemFile};
use conpart_cli::report::{self, CheckOut, HomogeneousOut, LiftCheckOut, PartitionOut, SolveOut};
use conpart_core::homogeneous::{check_r0_inclusion, classify_six_dual, HomogeneousError};
use conpart_core::lifting::{
    compare_partitions, lift_problem, HypothesisOptions, LiftError, LiftMap,
};
use conpart_core::model::ModelError;
use conpart_core::partition::{classify_with_witnesses, ClassifyOptions, PartitionError};
use conpart_core::solver::SolverError;
use conpart_core::{classify, solve, ConicProblem, SolveStatus};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "conpart",
    version,
    about = "Optimal partitions of conic linear programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Solver tolerance.
    #[arg(long, global = true, env = "CONPART_TOL")]
    tol: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the problem and print an optimal pair.
    Solve {
        file: PathBuf,
        /// Also write the optimal pair to this file.
        #[arg(long)]
        emit_pair: Option<PathBuf>,
    },
    /// Compute the four- and six-partitions.
    Partition {
        file: PathBuf,
        /// Extra solution pair averaged into the witness.
        #[arg(long)]
        pair: Option<PathBuf>,
    },
    /// Write the lifted problem.
    Lift {
        file: PathBuf,
        /// `arrow` or a map file.
        #[arg(long, default_value = "arrow")]
        map: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check partition relations, a lift, or the homogeneous dual characterization.
    Check {
        file: PathBuf,
        /// Compare the partitions of the problem and its lift.
        #[arg(long)]
        lift: bool,
        /// `arrow` or a map file, used with `--lift`.
        #[arg(long, default_value = "arrow")]
        map: String,
        /// Compare against the exact dual characterization of a homogeneous LP.
        #[arg(long, conflicts_with = "lift")]
        homogeneous_dual: bool,
        /// Sampled points per block for the lift hypotheses.
        #[arg(long)]
        samples: Option<usize>,
    },
}

enum Failure {
    Input(String),
    Solver(String),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Options(_) | SolverError::Model(_) => Failure::Input(e.to_string()),
            _ => Failure::Solver(e.to_string()),
        }
    }
}

impl From<PartitionError> for Failure {
    fn from(e: PartitionError) -> Self {
        match e {
            PartitionError::Solver(s) => s.into(),
            PartitionError::Model(m) => m.into(),
            PartitionError::NotOptimal(_) => Failure::Solver(e.to_string()),
        }
    }
}

impl From<LiftError> for Failure {
    fn from(e: LiftError) -> Self {
        match e {
            LiftError::Partition(p) => p.into(),
            LiftError::Solver(s) => s.into(),
            LiftError::NotInPolar { .. } => Failure::Solver(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<HomogeneousError> for Failure {
    fn from(e: HomogeneousError) -> Self {
        Failure::Input(e.to_string())
    }
}

struct Ctx {
    format: Format,
    opts: ClassifyOptions,
}

impl Ctx {
    fn emit<T: Serialize>(&self, value: &T, text: impl FnOnce() -> String) {
        match self.format {
            Format::Json => print!("{}", files::to_json(value)),
            Format::Text => print!("{}", text()),
        }
    }
}

fn load_map(which: &str, problem: &ConicProblem) -> Result<LiftMap, Failure> {
    if which == "arrow" {
        Ok(LiftMap::arrow(&problem.blocks)?)
    } else {
        Ok(files::load_map(Path::new(which), &problem.blocks)?)
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let opts = match cli.tol {
        Some(t) if !(t.is_finite() && t > 0.0) => {
            return Err(Failure::Input(format!(
                "tolerance must be positive, got {t}"
            )))
        }
        Some(t) => ClassifyOptions::with_tol(t),
        None => ClassifyOptions::default(),
    };
    let ctx = Ctx {
        format: cli.format,
        opts,
    };
    match cli.command {
        Command::Solve { file, emit_pair } => {
            let problem = files::load_problem(&file)?;
            let sol = solve(&problem, &ctx.opts.solver)?;
            let out = SolveOut::new(&problem.name, &sol);
            ctx.emit(&out, || out.text());
            if sol.status != SolveStatus::Optimal {
                return Err(Failure::Solver(format!(
                    "solver stopped with status {:?}",
                    sol.status
                )));
            }
            if let Some(path) = emit_pair {
                files::write_text(&path, &files::to_json(&PairFile::from_pair(&sol.pair)))?;
            }
            Ok(true)
        }
        Command::Partition { file, pair } => {
            let problem = files::load_problem(&file)?;
            let extra = match pair {
                Some(path) => vec![files::load_pair(&path, &problem)?],
                None => Vec::new(),
            };
            let r = classify_with_witnesses(&problem, &ctx.opts, &extra)?;
            let out = PartitionOut::from(&r);
            ctx.emit(&out, || out.text());
            Ok(true)
        }
        Command::Lift { file, map, output } => {
            let problem = files::load_problem(&file)?;
            let map = load_map(&map, &problem)?;
            let lifted = lift_problem(&problem, &map)?;
            let text = files::to_json(&ProblemFile::from_problem(&lifted));
            match output {
                Some(path) => files::write_text(&path, &text)?,
                None => print!("{text}"),
            }
            Ok(true)
        }
        Command::Check {
            file,
            lift,
            map,
            homogeneous_dual,
            samples,
        } => {
            let problem = files::load_problem(&file)?;
            if lift {
                let map = load_map(&map, &problem)?;
                let mut hyp = HypothesisOptions {
                    solver: ctx.opts.solver,
                    ..HypothesisOptions::default()
                };
                if let Some(s) = samples {
                    hyp.samples = s;
                }
                let c = compare_partitions(&problem, &map, &ctx.opts, &hyp)?;
                let out = LiftCheckOut::from(&c);
                ctx.emit(&out, || out.text(report::class_lookup(&c)));
                Ok(out.passed)
            } else if homogeneous_dual {
                let dual = classify_six_dual(&problem)?;
                let r = classify(&problem, &ctx.opts)?;
                let r0_ok = check_r0_inclusion(&problem, &r.four)?;
                let out = HomogeneousOut::new(&problem.name, &dual, &r.six, r0_ok);
                ctx.emit(&out, || out.text());
                Ok(out.passed)
            } else {
                let r = classify(&problem, &ctx.opts)?;
                let out = CheckOut::from(&r);
                ctx.emit(&out, || out.text());
                Ok(out.passed)
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("solver failure: {msg}");
            ExitCode::from(3)
        }
    }
}
