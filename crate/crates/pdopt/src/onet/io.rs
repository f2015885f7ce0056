//! Plain-text model files. Everything is line-oriented and printed with 17
//! significant digits, so a save/load cycle reproduces the parameters bit
//! for bit and diffs stay readable.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::{real, Scalar};

use super::mlp::Mlp;
use super::{BoundaryFactor, NetMetadata, OperatorNet};

const MAGIC: &str = "pdopt-onet";
const VERSION: u32 = 1;

pub fn net_to_string<T: Scalar>(net: &OperatorNet<T>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC} {VERSION}");
    let _ = writeln!(s, "nu {:.16e}", net.meta.nu);
    let _ = writeln!(s, "c {:.16e}", net.meta.c);
    let _ = writeln!(s, "n_cells {}", net.meta.n_cells);
    match net.meta.tau {
        Some(t) => {
            let _ = writeln!(s, "tau {t:.16e}");
        }
        None => {
            let _ = writeln!(s, "tau none");
        }
    }
    let _ = writeln!(s, "seed {}", net.meta.seed);
    let _ = writeln!(s, "iterations {}", net.meta.iterations);
    let _ = writeln!(s, "final_loss {:.16e}", net.meta.final_loss);
    let _ = writeln!(s, "reference_norm {:.16e}", net.meta.reference_norm);
    let _ = writeln!(s, "normalize_inputs {}", u8::from(net.meta.normalize_inputs));
    let _ = writeln!(s, "symmetrize {}", u8::from(net.meta.symmetrize));
    let _ = writeln!(s, "boundary_factor {}", net.boundary_factor.tag());
    let widths = |w: &[usize]| w.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
    let _ = writeln!(s, "branch_widths {}", widths(net.branch.widths()));
    let _ = writeln!(s, "trunk_widths {}", widths(net.trunk.widths()));
    let _ = writeln!(s, "params {}", net.param_count());
    for v in net.flatten() {
        let _ = writeln!(s, "{v:.16e}");
    }
    s
}

fn take_kv<'a>(lines: &mut impl Iterator<Item = &'a str>, key: &str) -> Result<&'a str> {
    let line = lines
        .next()
        .ok_or_else(|| Error::ModelFormat(format!("missing '{key}' line")))?;
    let rest = line
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| Error::ModelFormat(format!("expected '{key} ...', found '{line}'")))?;
    Ok(rest.trim())
}

fn parse_real<T: Scalar>(s: &str, what: &str) -> Result<T> {
    s.parse::<f64>()
        .map(real::<T>)
        .map_err(|_| Error::ModelFormat(format!("bad {what} value '{s}'")))
}

fn parse_int(s: &str, what: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| Error::ModelFormat(format!("bad {what} value '{s}'")))
}

fn parse_widths(s: &str, what: &str) -> Result<Vec<usize>> {
    s.split_whitespace().map(|tok| parse_int(tok, what)).collect()
}

pub fn net_from_str<T: Scalar>(text: &str) -> Result<OperatorNet<T>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::ModelFormat("empty model file".into()))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err(Error::ModelFormat(format!("not a model file: '{header}'")));
    }
    let version = parts
        .next()
        .and_then(|v| v.parse::<u32>().ok())
        .ok_or_else(|| Error::ModelFormat("missing format version".into()))?;
    if version != VERSION {
        return Err(Error::ModelFormat(format!("unsupported format version {version}")));
    }

    let nu = parse_real::<T>(take_kv(&mut lines, "nu")?, "nu")?;
    let c = parse_real::<T>(take_kv(&mut lines, "c")?, "c")?;
    let n_cells = parse_int(take_kv(&mut lines, "n_cells")?, "n_cells")?;
    let tau_raw = take_kv(&mut lines, "tau")?;
    let tau = if tau_raw == "none" { None } else { Some(parse_real::<T>(tau_raw, "tau")?) };
    let seed = take_kv(&mut lines, "seed")?
        .parse::<u64>()
        .map_err(|_| Error::ModelFormat("bad seed value".into()))?;
    let iterations = parse_int(take_kv(&mut lines, "iterations")?, "iterations")?;
    let final_loss = parse_real::<T>(take_kv(&mut lines, "final_loss")?, "final_loss")?;
    let reference_norm =
        parse_real::<T>(take_kv(&mut lines, "reference_norm")?, "reference_norm")?;
    let normalize_inputs = match take_kv(&mut lines, "normalize_inputs")? {
        "0" => false,
        "1" => true,
        other => {
            return Err(Error::ModelFormat(format!("bad normalize_inputs value '{other}'")))
        }
    };
    let symmetrize = match take_kv(&mut lines, "symmetrize")? {
        "0" => false,
        "1" => true,
        other => return Err(Error::ModelFormat(format!("bad symmetrize value '{other}'"))),
    };
    let boundary_factor = BoundaryFactor::from_tag(take_kv(&mut lines, "boundary_factor")?)?;
    let branch_widths = parse_widths(take_kv(&mut lines, "branch_widths")?, "branch width")?;
    let trunk_widths = parse_widths(take_kv(&mut lines, "trunk_widths")?, "trunk width")?;
    let n_params = parse_int(take_kv(&mut lines, "params")?, "params")?;

    let mut net = OperatorNet {
        branch: Mlp::zeros(&branch_widths)?,
        trunk: Mlp::zeros(&trunk_widths)?,
        b0: T::zero(),
        boundary_factor,
        meta: NetMetadata {
            nu,
            c,
            n_cells,
            tau,
            seed,
            iterations,
            final_loss,
            reference_norm,
            normalize_inputs,
            symmetrize,
        },
    };
    if net.param_count() != n_params {
        return Err(Error::ModelFormat(format!(
            "parameter count {n_params} does not match the declared widths ({})",
            net.param_count()
        )));
    }
    if n_cells + 1 != net.sensor_count() {
        return Err(Error::ModelFormat(format!(
            "n_cells {n_cells} does not match branch input width {}",
            net.sensor_count()
        )));
    }
    let mut params = Vec::with_capacity(n_params);
    for _ in 0..n_params {
        let line = lines
            .next()
            .ok_or_else(|| Error::ModelFormat("model file ends before all parameters".into()))?;
        params.push(parse_real::<T>(line.trim(), "parameter")?);
    }
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(Error::ModelFormat("trailing data after parameters".into()));
    }
    net.unflatten(&params)?;
    Ok(net)
}

pub fn save_net<T: Scalar>(net: &OperatorNet<T>, path: &Path) -> Result<()> {
    std::fs::write(path, net_to_string(net))
        .map_err(|e| Error::Io(format!("writing {}: {e}", path.display())))
}

pub fn load_net<T: Scalar>(path: &Path) -> Result<OperatorNet<T>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("reading {}: {e}", path.display())))?;
    net_from_str(&text)
}
