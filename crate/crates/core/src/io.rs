//! Deterministic CSV emission and parsing for fields, kernels, sweeps,
//! trajectories, and diagnostic reports.
//!
//! Every float is written with the same 16-significant-digit scientific
//! format, so identical inputs produce bit-identical files; the parsers
//! below round-trip them exactly.  Metadata travels in leading
//! `# key,value` rows ahead of the column header.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::evolution::{AuditReport, Trajectory};
use crate::grid::{FullField, GridSpec, OddField};
use crate::kernel::FractionalKernel;
use crate::stationary::{StationarySolution, SweepResult};

/// Canonical float rendering used in every emitted file.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_float(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Config(format!("unparsable float {s:?}: {e}")))
}

/// Render an odd half-line field: trace and grid metadata, then one
/// `x,value` row per cell.
pub fn render_odd_field(field: &OddField) -> String {
    let g = field.grid();
    let mut out = String::new();
    let _ = writeln!(out, "# h,{}", format_float(g.h()));
    let _ = writeln!(out, "# n,{}", g.n());
    let _ = writeln!(out, "# trace_plus,{}", format_float(field.trace_plus()));
    out.push_str("x,value\n");
    for (i, v) in field.values().iter().enumerate() {
        let _ = writeln!(out, "{},{}", format_float(g.center(i)), format_float(*v));
    }
    out
}

pub fn write_odd_field(path: &Path, field: &OddField) -> Result<()> {
    fs::write(path, render_odd_field(field))?;
    Ok(())
}

/// Parse a file produced by `write_odd_field`, reconstructing the grid
/// from the metadata rows.
pub fn read_odd_field(path: &Path) -> Result<OddField> {
    let text = fs::read_to_string(path)?;
    let mut h = None;
    let mut n = None;
    let mut trace = None;
    let mut values = Vec::new();
    for line in text.lines() {
        if let Some(meta) = line.strip_prefix("# ") {
            let (key, value) = meta
                .split_once(',')
                .ok_or_else(|| Error::Config(format!("malformed metadata row {line:?}")))?;
            match key {
                "h" => h = Some(parse_float(value)?),
                "n" => {
                    n = Some(value.trim().parse::<usize>().map_err(|e| {
                        Error::Config(format!("unparsable cell count {value:?}: {e}"))
                    })?)
                }
                "trace_plus" => trace = Some(parse_float(value)?),
                _ => return Err(Error::Config(format!("unknown metadata key {key:?}"))),
            }
        } else if line == "x,value" || line.is_empty() {
            continue;
        } else {
            let (_, v) = line
                .split_once(',')
                .ok_or_else(|| Error::Config(format!("malformed data row {line:?}")))?;
            values.push(parse_float(v)?);
        }
    }
    let h = h.ok_or_else(|| Error::Config("missing h metadata".into()))?;
    let n = n.ok_or_else(|| Error::Config("missing n metadata".into()))?;
    let trace = trace.ok_or_else(|| Error::Config("missing trace_plus metadata".into()))?;
    if values.len() != n {
        return Err(Error::Config(format!(
            "cell count mismatch: metadata says {n}, file holds {}",
            values.len()
        )));
    }
    OddField::new(GridSpec::new(h, n)?, values, trace)
}

/// Render a full-line field as `x,u` rows (one checkpoint of a
/// trajectory dump).
pub fn render_full_field(field: &FullField) -> String {
    let g = field.grid();
    let mut out = String::new();
    let _ = writeln!(out, "# h,{}", format_float(g.h()));
    let _ = writeln!(out, "# n,{}", g.n());
    out.push_str("x,u\n");
    for (j, v) in field.values().iter().enumerate() {
        let _ = writeln!(out, "{},{}", format_float(g.full_center(j)), format_float(*v));
    }
    out
}

pub fn write_full_field(path: &Path, field: &FullField) -> Result<()> {
    fs::write(path, render_full_field(field))?;
    Ok(())
}

/// Render the kernel: metadata (lambda, normalizing constant, split
/// radius, far coefficient), then one `lag,weight` row per lag cell.
pub fn render_kernel(kernel: &FractionalKernel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# lambda,{}", format_float(kernel.lambda()));
    let _ = writeln!(out, "# g_const,{}", format_float(kernel.g_const()));
    let _ = writeln!(out, "# split_radius,{}", format_float(kernel.split_radius()));
    let _ = writeln!(out, "# tail_coeff,{}", format_float(kernel.tail_coeff()));
    out.push_str("lag,weight\n");
    for (j, w) in kernel.weights().iter().enumerate() {
        let _ = writeln!(out, "{},{}", j + 1, format_float(*w));
    }
    out
}

pub fn write_kernel(path: &Path, kernel: &FractionalKernel) -> Result<()> {
    fs::write(path, render_kernel(kernel))?;
    Ok(())
}

/// Render a converged profile with its solver provenance: `x,v` rows
/// plus metadata (viscosity, iteration counts, residual, flags, norms).
pub fn render_solution(solution: &StationarySolution) -> String {
    let g = solution.v.grid();
    let mut out = String::new();
    let _ = writeln!(out, "# h,{}", format_float(g.h()));
    let _ = writeln!(out, "# n,{}", g.n());
    let _ = writeln!(out, "# trace_plus,{}", format_float(solution.v.trace_plus()));
    let _ = writeln!(out, "# epsilon,{}", format_float(solution.epsilon));
    let _ = writeln!(out, "# iterations,{}", solution.iterations);
    let _ = writeln!(out, "# linear_iterations,{}", solution.linear_iterations);
    let _ = writeln!(out, "# residual_fp,{}", format_float(solution.residual_fp));
    let _ = writeln!(out, "# norm_sq,{}", format_float(solution.norm_sq));
    let _ = writeln!(out, "# monitor,{}", format_float(solution.monitor));
    let _ = writeln!(out, "# energy_bound_rhs,{}", format_float(solution.energy_bound_rhs));
    let _ = writeln!(out, "# converged,{}", solution.flags.converged);
    let _ = writeln!(out, "# bounds_ok,{}", solution.flags.bounds_ok);
    let _ = writeln!(out, "# truncation_inactive,{}", solution.flags.truncation_inactive);
    let _ = writeln!(out, "# energy_bound_ok,{}", solution.flags.energy_bound_ok);
    out.push_str("x,v\n");
    for (i, v) in solution.v.values().iter().enumerate() {
        let _ = writeln!(out, "{},{}", format_float(g.center(i)), format_float(*v));
    }
    out
}

pub fn write_solution(path: &Path, solution: &StationarySolution) -> Result<()> {
    fs::write(path, render_solution(solution))?;
    Ok(())
}

/// Per-iteration energy ledger of a fixed-point solve:
/// `iter,norm_sq,monitor,energy`.
pub fn render_energy_record(solution: &StationarySolution) -> String {
    let mut out = String::from("iter,norm_sq,monitor,energy\n");
    for (k, ((ns, mon), e)) in solution
        .energy_record
        .iter()
        .zip(&solution.energy_values)
        .enumerate()
    {
        let _ = writeln!(
            out,
            "{k},{},{},{}",
            format_float(*ns),
            format_float(*mon),
            format_float(*e)
        );
    }
    out
}

/// Sweep overview: one row per member plus the sweep-wide monitor bound
/// and the tail Cauchy increments as metadata.
pub fn render_sweep_manifest(sweep: &SweepResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# monitor_sup,{}", format_float(sweep.monitor_sup));
    let cauchy: Vec<String> = sweep.cauchy_window.iter().map(|d| format_float(*d)).collect();
    let _ = writeln!(out, "# cauchy_window,{}", cauchy.join(";"));
    out.push_str("epsilon,file,iterations,residual_fp,norm_sq,monitor,converged\n");
    for m in &sweep.members {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            format_float(m.epsilon),
            solution_file_name(m.epsilon),
            m.iterations,
            format_float(m.residual_fp),
            format_float(m.norm_sq),
            format_float(m.monitor),
            m.flags.converged
        );
    }
    out
}

/// Deterministic archive name for a sweep member.
pub fn solution_file_name(epsilon: f64) -> String {
    // The exponent-free form keeps names readable for desk-scale eps.
    format!("stationary_eps{}.csv", format!("{epsilon:.6}").replace('.', "p"))
}

/// Write every member archive, its energy ledger, and the manifest into
/// `dir`; returns the manifest path.
pub fn write_sweep(dir: &Path, sweep: &SweepResult) -> Result<std::path::PathBuf> {
    fs::create_dir_all(dir)?;
    for m in &sweep.members {
        let base = solution_file_name(m.epsilon);
        fs::write(dir.join(&base), render_solution(m))?;
        let energy_name = base.replace("stationary_", "energy_");
        fs::write(dir.join(energy_name), render_energy_record(m))?;
    }
    let manifest = dir.join("sweep_manifest.csv");
    fs::write(&manifest, render_sweep_manifest(sweep))?;
    Ok(manifest)
}

/// Write one `x,u` file per recorded state, named by checkpoint index,
/// plus an index file with times and conservation metadata.
pub fn write_trajectory(dir: &Path, trajectory: &Trajectory) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut index = String::new();
    let _ = writeln!(index, "# completed,{}", trajectory.completed);
    let _ = writeln!(index, "# mass_drift,{}", format_float(trajectory.mass_drift));
    let _ = writeln!(
        index,
        "# boundary_exchange,{}",
        format_float(trajectory.boundary_exchange)
    );
    let _ = writeln!(index, "# envelope_min,{}", format_float(trajectory.envelope.0));
    let _ = writeln!(index, "# envelope_max,{}", format_float(trajectory.envelope.1));
    index.push_str("checkpoint,t,file\n");
    for (k, state) in trajectory.states.iter().enumerate() {
        let name = format!("state_{k:04}.csv");
        fs::write(dir.join(&name), render_full_field(&state.u))?;
        let _ = writeln!(index, "{k},{},{name}", format_float(state.t));
    }
    fs::write(dir.join("trajectory_index.csv"), index)?;
    Ok(())
}

/// Entropy-audit table: `k,r,residual` rows plus the worst residual.
pub fn render_audit(report: &AuditReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# worst,{}", format_float(report.worst));
    out.push_str("k,r,residual\n");
    for row in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            format_float(row.k),
            format_float(row.r_cut),
            format_float(row.residual)
        );
    }
    out
}

pub fn write_audit(path: &Path, report: &AuditReport) -> Result<()> {
    fs::write(path, render_audit(report))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::kernel::FractionalKernel;

    #[test]
    fn odd_field_round_trips_bitwise() {
        let g = GridSpec::new(0.125, 24).expect("grid");
        let field = OddField::from_fn(g, 1.0, |x| (1.0 - x / 2.5).max(0.0) * (1.1 * x).cos());
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("field.csv");
        write_odd_field(&path, &field).expect("write");
        let back = read_odd_field(&path).expect("read");
        assert_eq!(back.grid(), field.grid());
        assert_eq!(back.trace_plus(), field.trace_plus());
        assert_eq!(back.values(), field.values(), "round trip must be bit-exact");
    }

    #[test]
    fn renders_are_deterministic() {
        let g = GridSpec::new(0.25, 16).expect("grid");
        let kernel = FractionalKernel::build(g, 0.5).expect("kernel");
        assert_eq!(render_kernel(&kernel), render_kernel(&kernel));
        let field = OddField::from_fn(g, 1.0, |x| 1.0 / (1.0 + x * x));
        assert_eq!(render_odd_field(&field), render_odd_field(&field));
        assert!(render_kernel(&kernel).starts_with("# lambda,5.0000000000000000e-1\n"));
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("junk.csv");
        std::fs::write(&path, "# h,0.1\nx,value\n0.05,nonsense\n").expect("write");
        assert!(read_odd_field(&path).is_err(), "missing metadata and bad float must fail");
    }
}
