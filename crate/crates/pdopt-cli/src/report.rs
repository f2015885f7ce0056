//! Run records and their two serializations: a CSV table with a fixed
//! column set, and a JSON summary carrying everything the CSV has no column
//! for (convergence flags, warnings, residuals).
//!
//! Apart from `wall_time_s`, identical configs and seeds produce identical
//! CSV bytes; floats are written in shortest round-trip form.

use std::path::Path;

use pdopt::{Error, Result};
use serde::Serialize;

pub const CSV_HEADER: &str = "method,mesh_h,mesh_tau,iterations,pde_solves,objective,\
                              err_u_abs,err_u_rel,err_y_abs,err_y_rel,noz,wall_time_s";

/// One benchmark run. Error columns stay empty when the example has no
/// exact solution, `noz` is only filled for the sparse example, `mesh_tau`
/// only for the time-dependent ones.
#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub example: u8,
    pub method: String,
    pub mesh_h: f64,
    pub mesh_tau: Option<f64>,
    pub iterations: usize,
    pub pde_solves: usize,
    pub objective: f64,
    pub err_u_abs: Option<f64>,
    pub err_u_rel: Option<f64>,
    pub err_y_abs: Option<f64>,
    pub err_y_rel: Option<f64>,
    pub noz: Option<f64>,
    pub wall_time_s: f64,
    pub converged: bool,
    pub final_residual: f64,
    pub warnings: Vec<String>,
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

impl RunRecord {
    pub fn csv_row(&self) -> String {
        [
            self.method.clone(),
            format!("{}", self.mesh_h),
            cell(self.mesh_tau),
            self.iterations.to_string(),
            self.pde_solves.to_string(),
            format!("{}", self.objective),
            cell(self.err_u_abs),
            cell(self.err_u_rel),
            cell(self.err_y_abs),
            cell(self.err_y_rel),
            cell(self.noz),
            format!("{:.6}", self.wall_time_s),
        ]
        .join(",")
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BenchReport {
    pub runs: Vec<RunRecord>,
    pub all_converged: bool,
}

impl BenchReport {
    pub fn from_runs(runs: Vec<RunRecord>) -> Self {
        let all_converged = runs.iter().all(|r| r.converged);
        Self { runs, all_converged }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for run in &self.runs {
            out.push_str(&run.csv_row());
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Write the CSV at `path` and the JSON summary next to it, swapping
    /// the extension.
    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())
            .map_err(|e| Error::Io(format!("writing {}: {e}", path.display())))?;
        let json_path = path.with_extension("json");
        std::fs::write(&json_path, self.to_json())
            .map_err(|e| Error::Io(format!("writing {}: {e}", json_path.display())))
    }
}
