//! `pdopt` binary: run one benchmark configuration, batch a config file,
//! train a surrogate network, or gate a trained one against the exact
//! solver. CSV goes to stdout (and `--out` when given), progress and human
//! summaries to stderr. Exit codes: 0 all good, 1 non-convergence or a
//! failed gate, 2 hard error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pdopt::{save_net, Result};
use pdopt_cli::{
    run_spec, run_suite, surrogate_gate, train_surrogate, BenchReport, ExampleSpec, Method,
    RunOverrides, TrainSpec,
};

#[derive(Parser)]
#[command(name = "pdopt", about = "Benchmark driver for the primal-dual control solvers")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a single configuration and print its report row.
    Solve(SolveArgs),
    /// Run every [run] section of a config file and write a report.
    Bench(BenchArgs),
    /// Train the surrogate network for example 3 or 4 and write the model.
    Train(TrainArgs),
    /// Compare a trained model against the exact solver it replaces.
    Eval(EvalArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Benchmark problem, 1 through 4.
    #[arg(long)]
    example: u8,
    /// PD-C, PD-I, APD<m>, or PD-ONet.
    #[arg(long)]
    method: Method,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// l1 weight (example 2).
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    /// Control box bounds.
    #[arg(long, allow_negative_numbers = true)]
    lower: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    upper: Option<f64>,
    /// Spatial cells per axis, h = 1/n.
    #[arg(long)]
    n: Option<usize>,
    /// Time steps, tau = 1/nt (examples 1 and 4).
    #[arg(long)]
    nt: Option<usize>,
    /// State scale (examples 3 and 4).
    #[arg(long, allow_negative_numbers = true)]
    ks: Option<f64>,
    /// Control scale (examples 3 and 4).
    #[arg(long, allow_negative_numbers = true)]
    ka: Option<f64>,
    /// Primal step; defaults to the example's preset.
    #[arg(long)]
    r: Option<f64>,
    /// Dual step; defaults to the example's preset.
    #[arg(long)]
    s: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Trained model file (PD-ONet only).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Also write the row as CSV here, with a JSON summary next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print a progress line every k iterations.
    #[arg(long, default_value_t = 0)]
    log_every: usize,
}

impl SolveArgs {
    fn to_spec(&self) -> Result<ExampleSpec> {
        let overrides = RunOverrides {
            example: Some(self.example),
            method: Some(self.method),
            alpha: self.alpha,
            mu: self.mu,
            lower: self.lower,
            upper: self.upper,
            n: self.n,
            nt: self.nt,
            k_s: self.ks,
            k_a: self.ka,
            r: self.r,
            s: self.s,
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
            model: self.model.clone(),
        };
        let mut spec = overrides.resolve()?;
        spec.log_every = self.log_every;
        Ok(spec)
    }
}

#[derive(Args)]
struct BenchArgs {
    /// Config file listing the runs.
    #[arg(long)]
    config: PathBuf,
    /// Report path; the JSON summary lands next to it.
    #[arg(long, default_value = "report.csv")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    log_every: usize,
}

#[derive(Args)]
struct TrainArgs {
    /// 3 (stationary solve) or 4 (backward Euler stage).
    #[arg(long)]
    example: u8,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    /// Training inputs drawn from the random field.
    #[arg(long)]
    n_inputs: Option<usize>,
    /// Query points per input; their spacing must divide the grid.
    #[arg(long)]
    n_eval: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Where to write the model file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Model file to gate; the problem is read off its metadata.
    #[arg(long)]
    model: PathBuf,
    /// Fresh random inputs to compare on.
    #[arg(long, default_value_t = 32)]
    draws: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Mean relative error the net must stay under; defaults to the gate of
    /// its kind (5e-2 stationary, 1e-1 march).
    #[arg(long, allow_negative_numbers = true)]
    threshold: Option<f64>,
}

fn cmd_solve(args: &SolveArgs) -> Result<ExitCode> {
    let spec = args.to_spec()?;
    let (record, _) = run_spec(&spec)?;
    for w in &record.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!(
        "{} example {}: {} iterations, {}, residual {:.3e}, {:.2}s",
        record.method,
        record.example,
        record.iterations,
        if record.converged { "converged" } else { "NOT converged" },
        record.final_residual,
        record.wall_time_s,
    );
    let converged = record.converged;
    let report = BenchReport::from_runs(vec![record]);
    print!("{}", report.to_csv());
    if let Some(out) = &args.out {
        report.write(out)?;
    }
    Ok(if converged { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_bench(args: &BenchArgs) -> Result<ExitCode> {
    let report = run_suite(&args.config, &args.out, args.log_every)?;
    print!("{}", report.to_csv());
    eprintln!(
        "{} runs, {}; report at {}",
        report.runs.len(),
        if report.all_converged { "all converged" } else { "some did NOT converge" },
        args.out.display(),
    );
    Ok(if report.all_converged { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_train(args: &TrainArgs) -> Result<ExitCode> {
    let mut spec = TrainSpec::new(args.example)?;
    if let Some(v) = args.n {
        spec.n = v;
        spec.n_eval = v + 1;
    }
    if let Some(v) = args.nt {
        spec.nt = v;
    }
    if let Some(v) = args.n_inputs {
        spec.n_inputs = v;
    }
    if let Some(v) = args.n_eval {
        spec.n_eval = v;
    }
    if let Some(v) = args.iterations {
        spec.iterations = v;
    }
    if let Some(v) = args.lr {
        spec.lr = v;
    }
    if let Some(v) = args.seed {
        spec.seed = v;
    }
    let (net, history) = train_surrogate(&spec)?;
    save_net(&net, &args.out)?;
    eprintln!(
        "trained example-{} net: {} iterations, loss {:.3e} -> {:.3e}, saved to {}",
        spec.example,
        history.len(),
        history.first().copied().unwrap_or(f64::NAN),
        net.meta.final_loss,
        args.out.display(),
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval(args: &EvalArgs) -> Result<ExitCode> {
    let net = pdopt::load_net::<f64>(&args.model)?;
    let report = surrogate_gate(&net, args.draws, args.seed, args.threshold)?;
    println!(
        "draws={} mean_rel_err={:e} max_rel_err={:e} threshold={:e} passed={}",
        report.n_draws, report.mean_rel_err, report.max_rel_err, report.threshold, report.passed,
    );
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Cmd::Solve(args) => cmd_solve(args),
        Cmd::Bench(args) => cmd_bench(args),
        Cmd::Train(args) => cmd_train(args),
        Cmd::Eval(args) => cmd_eval(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
