//! Benchmark driver for the pdopt solvers: experiment definitions for the
//! four reference problems, a config-file format for batching runs, and
//! CSV/JSON reporting. The `pdopt` binary in this crate is a thin CLI over
//! [`run_spec`], [`run_suite`], and the surrogate training helpers.

pub mod config;
pub mod examples;
pub mod report;

use std::path::Path;
use std::time::Instant;

use pdopt::{solve, Error, Result, SolveReport};

pub use config::{parse_config, RunOverrides};
pub use examples::{
    build_example, build_example_with, compute_errors, default_steps, noz, surrogate_gate,
    train_surrogate, ExampleSpec, Method, TrainSpec, MARCH_FIDELITY_GATE, NOZ_THRESHOLD,
    STATIONARY_FIDELITY_GATE,
};
pub use report::{BenchReport, RunRecord, CSV_HEADER};

/// Build and solve one spec, timing the solve. Returns the report row plus
/// the raw solver output for callers that need the fields themselves.
pub fn run_spec(spec: &ExampleSpec) -> Result<(RunRecord, SolveReport<f64>)> {
    let inst = build_example(spec)?;
    let cfg = spec.solver_config();
    let start = Instant::now();
    let rep = solve(&inst, &cfg)?;
    let wall_time_s = start.elapsed().as_secs_f64();

    let errs = match &inst.exact {
        Some(exact) => Some(compute_errors(&rep.u, &rep.y, exact)?),
        None => None,
    };
    let record = RunRecord {
        example: spec.example,
        method: spec.method.label(),
        mesh_h: spec.mesh_h(),
        mesh_tau: spec.mesh_tau(),
        iterations: rep.iterations,
        pde_solves: rep.pde_solves,
        objective: rep.objective,
        err_u_abs: errs.map(|e| e.err_u_abs),
        err_u_rel: errs.map(|e| e.err_u_rel),
        err_y_abs: errs.and_then(|e| e.err_y_abs),
        err_y_rel: errs.and_then(|e| e.err_y_rel),
        noz: (spec.example == 2).then(|| noz(&rep.u, examples::NOZ_THRESHOLD)),
        wall_time_s,
        converged: rep.converged,
        final_residual: rep.final_residual,
        warnings: rep.warnings.clone(),
    };
    Ok((record, rep))
}

/// Run every section of a config file in order and write the CSV plus its
/// JSON sibling at `out`. A run that fails to build aborts the suite but
/// still leaves the completed rows on disk; mere non-convergence is
/// recorded in the report and left to the caller's exit code.
pub fn run_suite(config_path: &Path, out: &Path, log_every: usize) -> Result<BenchReport> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| Error::Io(format!("reading {}: {e}", config_path.display())))?;
    let specs = parse_config(&text)?;
    let mut runs = Vec::with_capacity(specs.len());
    for mut spec in specs {
        spec.log_every = log_every;
        match run_spec(&spec) {
            Ok((record, _)) => runs.push(record),
            Err(e) => {
                BenchReport::from_runs(runs).write(out)?;
                return Err(e);
            }
        }
    }
    let report = BenchReport::from_runs(runs);
    report.write(out)?;
    Ok(report)
}
