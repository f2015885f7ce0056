//! Benchmark config files: plain text, one `key = value` per line, each run
//! introduced by a `[run]` header. Blank lines and `#` comments are skipped.
//! `example` and `method` are mandatory in every section; everything else
//! falls back to the example's defaults.
//!
//! ```text
//! # sweep the l1 weight
//! [run]
//! example = 2
//! method = PD-I
//! mu = 5e-4
//!
//! [run]
//! example = 2
//! method = PD-I
//! mu = 3e-3
//! ```

use std::path::PathBuf;

use pdopt::{Error, Result};

use crate::examples::{ExampleSpec, Method};

/// One `[run]` section as read, before defaults are applied. `example` and
/// `method` double as the "section seen" markers.
#[derive(Clone, Debug, Default)]
pub struct RunOverrides {
    pub example: Option<u8>,
    pub method: Option<Method>,
    pub alpha: Option<f64>,
    pub mu: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub n: Option<usize>,
    pub nt: Option<usize>,
    pub k_s: Option<f64>,
    pub k_a: Option<f64>,
    pub r: Option<f64>,
    pub s: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub model: Option<PathBuf>,
}

fn bad_value(key: &str, value: &str) -> Error {
    Error::InvalidParameter(format!("bad value '{value}' for key '{key}'"))
}

impl RunOverrides {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let real = || value.parse::<f64>().map_err(|_| bad_value(key, value));
        match key {
            "example" => self.example = Some(value.parse().map_err(|_| bad_value(key, value))?),
            "method" => self.method = Some(Method::parse(value)?),
            "alpha" => self.alpha = Some(real()?),
            "mu" => self.mu = Some(real()?),
            "lower" => self.lower = Some(real()?),
            "upper" => self.upper = Some(real()?),
            "n" => self.n = Some(value.parse().map_err(|_| bad_value(key, value))?),
            "nt" => self.nt = Some(value.parse().map_err(|_| bad_value(key, value))?),
            "k_s" | "ks" => self.k_s = Some(real()?),
            "k_a" | "ka" => self.k_a = Some(real()?),
            "r" => self.r = Some(real()?),
            "s" => self.s = Some(real()?),
            "tol" => self.tol = Some(real()?),
            "max_iter" => self.max_iter = Some(value.parse().map_err(|_| bad_value(key, value))?),
            "seed" => self.seed = Some(value.parse().map_err(|_| bad_value(key, value))?),
            "model" => self.model = Some(PathBuf::from(value)),
            _ => return Err(Error::InvalidParameter(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Fill in defaults and produce the runnable spec. Alpha is applied
    /// through the preset switch first, so an explicit r or s still wins.
    pub fn resolve(&self) -> Result<ExampleSpec> {
        let example = self
            .example
            .ok_or_else(|| Error::InvalidParameter("run section is missing 'example'".into()))?;
        let method = self
            .method
            .ok_or_else(|| Error::InvalidParameter("run section is missing 'method'".into()))?;
        let mut spec = ExampleSpec::new(example, method)?;
        if let Some(alpha) = self.alpha {
            spec.set_alpha(alpha);
        }
        if let Some(v) = self.mu {
            spec.mu = v;
        }
        if let Some(v) = self.lower {
            spec.lower = v;
        }
        if let Some(v) = self.upper {
            spec.upper = v;
        }
        if let Some(v) = self.n {
            spec.n = v;
        }
        if let Some(v) = self.nt {
            spec.nt = v;
        }
        if let Some(v) = self.k_s {
            spec.k_s = v;
        }
        if let Some(v) = self.k_a {
            spec.k_a = v;
        }
        if let Some(v) = self.r {
            spec.r = v;
        }
        if let Some(v) = self.s {
            spec.s = v;
        }
        if let Some(v) = self.tol {
            spec.tol = v;
        }
        if let Some(v) = self.max_iter {
            spec.max_iter = v;
        }
        if let Some(v) = self.seed {
            spec.seed = v;
        }
        if let Some(v) = &self.model {
            spec.model = Some(v.clone());
        }
        Ok(spec)
    }
}

/// Parse a whole config file into runnable specs, in file order. An empty
/// file (or one with only comments) is a valid empty suite.
pub fn parse_config(text: &str) -> Result<Vec<ExampleSpec>> {
    let mut specs = Vec::new();
    let mut current: Option<RunOverrides> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('[') {
            if line != "[run]" {
                return Err(Error::InvalidParameter(format!(
                    "line {}: unknown section '{line}' (only [run] exists)",
                    idx + 1
                )));
            }
            if let Some(run) = current.take() {
                specs.push(run.resolve()?);
            }
            current = Some(RunOverrides::default());
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::InvalidParameter(format!(
                "line {}: expected 'key = value', got '{line}'",
                idx + 1
            )));
        };
        let Some(run) = current.as_mut() else {
            return Err(Error::InvalidParameter(format!(
                "line {}: key outside any [run] section",
                idx + 1
            )));
        };
        run.set(key.trim(), value.trim())?;
    }
    if let Some(run) = current.take() {
        specs.push(run.resolve()?);
    }
    Ok(specs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_an_empty_suite() {
        assert!(parse_config("").unwrap().is_empty());
        assert!(parse_config("\n# only a comment\n\n").unwrap().is_empty());
    }

    #[test]
    fn two_runs_with_overrides() {
        let text = "
            # mesh sweep
            [run]
            example = 1
            method = PD-C
            n = 32
            nt = 32

            [run]
            example = 2
            method = APD5
            mu = 2e-2
            tol = 1e-6
        ";
        let specs = parse_config(text).unwrap();
        assert_eq!(specs.len(), 2);
        assert_eq!(specs[0].example, 1);
        assert_eq!(specs[0].method, Method::PdC);
        assert_eq!((specs[0].n, specs[0].nt), (32, 32));
        assert_eq!((specs[0].r, specs[0].s), (4e3, 0.1));
        assert_eq!(specs[1].method, Method::Apd(5));
        assert_eq!(specs[1].mu, 2e-2);
        assert_eq!(specs[1].tol, 1e-6);
    }

    #[test]
    fn alpha_override_rederives_steps_unless_pinned() {
        let derived = parse_config("[run]\nexample = 1\nmethod = PD-I\nalpha = 1e-5")
            .unwrap()
            .remove(0);
        assert_eq!((derived.r, derived.s), (5.6e3, 0.1));
        let pinned = parse_config("[run]\nexample = 1\nmethod = PD-I\nalpha = 1e-5\ns = 0.2")
            .unwrap()
            .remove(0);
        assert_eq!((pinned.r, pinned.s), (5.6e3, 0.2));
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(parse_config("[sweep]").is_err());
        assert!(parse_config("example = 1").is_err());
        assert!(parse_config("[run]\nexample = 1\nmethod = PD-C\nwhat = 3").is_err());
        assert!(parse_config("[run]\nexample = 1\nmethod = PD-C\nno equals sign").is_err());
        assert!(parse_config("[run]\nexample = 1").is_err());
        assert!(parse_config("[run]\nexample = 9\nmethod = PD-C").is_err());
        assert!(parse_config("[run]\nexample = 1\nmethod = PD-C\nn = -3").is_err());
    }

    #[test]
    fn model_path_is_carried_through() {
        let spec = parse_config("[run]\nexample = 3\nmethod = PD-ONet\nmodel = nets/a.model")
            .unwrap()
            .remove(0);
        assert_eq!(spec.model.as_deref(), Some(std::path::Path::new("nets/a.model")));
    }
}
