use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use probal::bench::{grn_pipeline, run_sweep, scaling_bench, write_csv, Algorithm, SweepSpec};
use probal::exact::DEFAULT_EVAL_CAP;
use probal::graph::{format_edge_list, read_edge_list, Skeleton};
use probal::loss::{loss_report, InterventionSet};
use probal::report::{design_report, optimal_report, Instance};
use probal::synth::{derive_seed, GenSpec, Model};
use probal::{Error, Mode, PriorKind, PriorSpec};

const ENV_HELP: &str = "\
Environment:
  PROBAL_CAP       default evaluation cap for exhaustive searches (default 10000000)
  PROBAL_THREADS   default worker thread count (default: all cores)

Exit status: 0 on success, 1 on input errors, 2 on internal invariant violations.";

/// Intervention design for causal structure learning on tree skeletons.
#[derive(Parser)]
#[command(name = "probal", version, after_help = ENV_HELP)]
struct Cli {
    /// Base seed for generators and sweeps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads.
    #[arg(long, global = true, env = "PROBAL_THREADS")]
    threads: Option<usize>,
    /// Output file (directory for `gen`); standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design interventions with the probability-balancing algorithm.
    Design(DesignArgs),
    /// Exhaustive optimal design.
    Optimal {
        #[command(flatten)]
        design: DesignArgs,
        /// Maximum number of subsets to evaluate.
        #[arg(long, env = "PROBAL_CAP", default_value_t = DEFAULT_EVAL_CAP)]
        cap: u128,
    },
    /// Evaluate the loss of a given intervention set.
    Eval(EvalArgs),
    /// Generate random trees as edge-list files.
    Gen(GenArgs),
    /// Benchmarks.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Normalized loss against total budget on a network edge list.
    Grn(GrnArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Edge-list file: one edge per line, `#` starts a comment.
    #[arg(long)]
    graph: PathBuf,
    /// Accept lines with extra columns, using the first two.
    #[arg(long)]
    lenient: bool,
    /// Root prior: uniform, degree or file:<path>.
    #[arg(long, default_value = "uniform")]
    prior: PriorSpec,
}

#[derive(Args)]
struct DesignArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Number of interventions.
    #[arg(long)]
    budget: usize,
    #[arg(long, default_value = "bayes")]
    mode: Mode,
    /// Include the per-round trace.
    #[arg(long)]
    trace: bool,
    /// Include the cyst contraction report.
    #[arg(long)]
    decomposition: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Restrict per-root losses to this root.
    #[arg(long)]
    root: Option<String>,
    /// Comma-separated vertex labels.
    #[arg(long, value_delimiter = ',', default_value = "")]
    interventions: Vec<String>,
    /// Also compute losses with the orientation oracle.
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    model: Model,
    #[arg(long)]
    n: usize,
    /// Degree bound for the Galton-Watson model.
    #[arg(long, default_value_t = 4)]
    max_degree: usize,
    #[arg(long, default_value_t = 1)]
    count: usize,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Loss sweep over tree order and budget, written as CSV.
    Sweep(SweepArgs),
    /// Wall time of the designer against tree order.
    Scaling {
        #[arg(long, value_delimiter = ',', default_value = "250,500,1000,2000")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
    },
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "ba")]
    model: Model,
    #[arg(long, default_value_t = 4)]
    max_degree: usize,
    /// uniform or degree.
    #[arg(long, default_value = "uniform")]
    prior: String,
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    m: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    replicates: usize,
    /// Comma-separated subset of probal, probal-minimax, optimal-bayes, optimal-minimax.
    #[arg(long, value_delimiter = ',', default_value = "probal,optimal-bayes")]
    algorithms: Vec<Algorithm>,
    #[arg(long, env = "PROBAL_CAP", default_value_t = DEFAULT_EVAL_CAP)]
    cap: u128,
}

#[derive(Args)]
struct GrnArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Accept lines with extra columns, using the first two.
    #[arg(long)]
    lenient: bool,
    /// uniform or degree.
    #[arg(long, default_value = "degree")]
    prior: String,
    /// Total budgets to evaluate.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4,5,6,7,8,9,10")]
    budgets: Vec<usize>,
}

fn prior_kind(s: &str) -> Result<PriorKind, Error> {
    match s {
        "uniform" => Ok(PriorKind::Uniform),
        "degree" => Ok(PriorKind::Degree),
        _ => Err(Error::InvalidSweep(format!(
            "prior must be uniform or degree, got `{s}`"
        ))),
    }
}

fn load(graph: &GraphArgs, require_tree: bool) -> Result<Skeleton, Error> {
    let edges = read_edge_list(&graph.graph, graph.lenient)?;
    Skeleton::from_labeled_edges(&edges, &[] as &[&str], require_tree)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    emit(out, &text)
}

#[derive(Serialize)]
struct WithDecomposition<T: Serialize> {
    #[serde(flatten)]
    report: T,
    decomposition: probal::chordal::DecompositionReport,
}

#[derive(Serialize)]
struct ManifestEntry {
    file: String,
    seed: u64,
    vertices: usize,
    max_degree: usize,
}

#[derive(Serialize)]
struct Manifest {
    spec: GenSpec,
    count: usize,
    instances: Vec<ManifestEntry>,
}

fn run(cli: Cli) -> Result<(), Error> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Design(a) => {
            let inst = Instance::prepare(load(&a.graph, false)?, &a.graph.prior)?;
            let report = design_report(&inst, a.budget, a.mode, a.trace)?;
            if a.decomposition {
                let decomposition = inst.decomposition.report(&inst.original);
                emit_json(
                    out,
                    &WithDecomposition {
                        report,
                        decomposition,
                    },
                )
            } else {
                emit_json(out, &report)
            }
        }
        Command::Optimal { design: a, cap } => {
            let inst = Instance::prepare(load(&a.graph, false)?, &a.graph.prior)?;
            let report = optimal_report(&inst, a.budget, a.mode, cap)?;
            if a.decomposition {
                let decomposition = inst.decomposition.report(&inst.original);
                emit_json(
                    out,
                    &WithDecomposition {
                        report,
                        decomposition,
                    },
                )
            } else {
                emit_json(out, &report)
            }
        }
        Command::Eval(a) => {
            let tree = load(&a.graph, true)?;
            let prior = a.graph.prior.build(&tree)?;
            let labels: Vec<&String> = a.interventions.iter().filter(|s| !s.is_empty()).collect();
            let set = InterventionSet::from_labels(&tree, &labels)?;
            let root = a.root.as_deref().map(|r| tree.index_of(r)).transpose()?;
            emit_json(out, &loss_report(&tree, &prior, &set, root, a.oracle)?)
        }
        Command::Gen(a) => {
            let dir = out.ok_or_else(|| Error::InvalidGenSpec("gen needs --out <dir>".into()))?;
            fs::create_dir_all(dir)?;
            let spec = GenSpec {
                model: a.model,
                n: a.n,
                max_degree: a.max_degree,
                seed: cli.seed,
            };
            spec.validate()?;
            let mut instances = Vec::with_capacity(a.count);
            for i in 0..a.count {
                let seed = derive_seed(cli.seed, i as u64);
                let tree = GenSpec { seed, ..spec }.generate()?;
                let file = format!("{}-n{}-{:04}.edges", a.model, a.n, i);
                fs::write(dir.join(&file), format_edge_list(&tree))?;
                instances.push(ManifestEntry {
                    file,
                    seed,
                    vertices: tree.order(),
                    max_degree: tree.max_degree(),
                });
            }
            emit_json(
                Some(&dir.join("manifest.json")),
                &Manifest {
                    spec,
                    count: a.count,
                    instances,
                },
            )
        }
        Command::Bench(BenchCommand::Sweep(a)) => {
            let spec = SweepSpec {
                model: a.model,
                max_degree: a.max_degree,
                prior: prior_kind(&a.prior)?,
                n: a.n,
                m: a.m,
                replicates: a.replicates,
                seed: cli.seed,
                algorithms: a.algorithms,
                cap: a.cap,
            };
            let rows = run_sweep(&spec)?;
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            emit(out, &String::from_utf8(buf).expect("csv output is utf-8"))
        }
        Command::Bench(BenchCommand::Scaling {
            n,
            max_degree,
            repeats,
        }) => emit_json(out, &scaling_bench(&n, max_degree, repeats, cli.seed)?),
        Command::Grn(a) => {
            let edges = read_edge_list(&a.graph, a.lenient)?;
            emit_json(
                out,
                &grn_pipeline(&edges, &a.budgets, prior_kind(&a.prior)?)?,
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_internal() { 2 } else { 1 })
        }
    }
}
