//! Command-line front end shared by the `lindspec` binary and its tests.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::{OutputFormat, RunConfig};
use crate::dynamics::{basis_projector, emission_spectrum, evolve_coefficients, expand_state};
use crate::error::{Error, Result};
use crate::model::BlockModel;
use crate::spectral::full_eigensystem;
use crate::verify::verify_model;

#[derive(Debug, Parser)]
#[command(name = "lindspec", version, about = "Block-recursive Liouvillian eigensystems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write every Liouvillian eigenvalue as JSON records.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the emission spectrum of the model's emitter as CSV.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        omega_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        omega_max: f64,
        #[arg(long)]
        points: usize,
        /// `ground`, `excited_atom` or `n,j`.
        #[arg(long, default_value = "excited_atom")]
        initial: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write trace, purity and basis populations over time as CSV.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        /// `ground`, `excited_atom` or `n,j`.
        #[arg(long)]
        initial: String,
        #[arg(long)]
        t_max: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the block construction against the dense Liouvillian.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Resolves a named initial state to a density matrix.
pub fn initial_state(model: &BlockModel, name: &str) -> Result<crate::linalg::CMatrix> {
    let (n, j) = match name.trim() {
        "ground" => (0, 1),
        "excited_atom" => model.excited_atom,
        other => {
            let parsed = other
                .split_once(',')
                .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
            parsed.ok_or_else(|| Error::Config(format!("unknown initial state '{other}'")))?
        }
    };
    basis_projector(&model.basis, n, j).map_err(|e| Error::Config(format!("initial state '{name}': {e}")))
}

/// `points` evenly spaced values including both end points.
pub fn linear_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::Config(format!("need at least 2 grid points, got {points}")));
    }
    if !(min.is_finite() && max.is_finite()) || min > max {
        return Err(Error::Config(format!("invalid range [{min}, {max}]")));
    }
    let last = (points - 1) as f64;
    Ok((0..points)
        .map(|i| (min * (last - i as f64) + max * i as f64) / last)
        .collect())
}

#[derive(Debug, Serialize)]
struct EigenRecord {
    l: usize,
    m: usize,
    j: usize,
    k: usize,
    mu: usize,
    lambda_re: f64,
    lambda_im: f64,
    adjoint: bool,
}

#[derive(Debug, Serialize)]
struct SolveOutput {
    model: String,
    dimension: usize,
    count: usize,
    eigenvalues: Vec<EigenRecord>,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)?;
    Ok(())
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn cmd_solve(cfg: &RunConfig, out: Option<&Path>) -> Result<()> {
    let path = cfg.output_path(out, OutputFormat::Json)?;
    let model = cfg.build_model()?;
    let sys = full_eigensystem(&model, &cfg.solver_options())?;
    let eigenvalues = sys
        .modes()
        .iter()
        .map(|mode| {
            let p = mode.pair;
            let (j, k) = p.pair_labels(&model.basis);
            let lambda = mode.lambda();
            EigenRecord {
                l: p.l,
                m: p.m,
                j,
                k,
                mu: p.mu,
                lambda_re: lambda.re,
                lambda_im: lambda.im,
                adjoint: mode.adjoint,
            }
        })
        .collect::<Vec<_>>();
    let output = SolveOutput {
        model: model.name.clone(),
        dimension: model.basis.total_dimension(),
        count: eigenvalues.len(),
        eigenvalues,
    };
    let mut text = serde_json::to_string_pretty(&output)?;
    text.push('\n');
    write_file(&path, &text)
}

fn cmd_spectrum(cfg: &RunConfig, grid: &[f64], initial: &str, out: Option<&Path>) -> Result<()> {
    let path = cfg.output_path(out, OutputFormat::Csv)?;
    let model = cfg.build_model()?;
    let rho0 = initial_state(&model, initial)?;
    let sys = full_eigensystem(&model, &cfg.solver_options())?;
    let res = emission_spectrum(&sys, &rho0, grid, &model.emitter)?;
    let mut text = String::from("omega,s,S\n");
    for ((w, s), big_s) in grid.iter().zip(&res.s).zip(&res.normalized) {
        writeln!(text, "{},{},{}", num(*w), num(*s), num(*big_s)).expect("string write");
    }
    write_file(&path, &text)
}

fn cmd_evolve(cfg: &RunConfig, initial: &str, t_max: f64, steps: usize, out: Option<&Path>) -> Result<()> {
    if steps < 1 {
        return Err(Error::Config("steps must be >= 1".into()));
    }
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(Error::Config(format!("t_max = {t_max} must be finite and >= 0")));
    }
    let path = cfg.output_path(out, OutputFormat::Csv)?;
    let model = cfg.build_model()?;
    let rho0 = initial_state(&model, initial)?;
    let sys = full_eigensystem(&model, &cfg.solver_options())?;
    let coeffs = expand_state(&rho0, &sys)?;
    let basis = &model.basis;

    let mut text = String::from("t,trace,purity");
    for n in 0..=basis.max_excitation() {
        for j in 1..=basis.dim(n) {
            write!(text, ",p_{n}_{j}").expect("string write");
        }
    }
    text.push('\n');
    let times: Vec<f64> = if t_max == 0.0 {
        vec![0.0]
    } else {
        (0..=steps).map(|i| t_max * i as f64 / steps as f64).collect()
    };
    for t in times {
        let rho = evolve_coefficients(&coeffs, t, &sys);
        let purity = (&rho * &rho).trace().re;
        write!(text, "{},{},{}", num(t), num(rho.trace().re), num(purity)).expect("string write");
        for i in 0..rho.nrows() {
            write!(text, ",{}", num(rho[(i, i)].re)).expect("string write");
        }
        text.push('\n');
    }
    write_file(&path, &text)
}

/// Executes one command. Returns the process exit code on success paths
/// (0, or 1 when verification fails); errors carry their own code.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Solve { config, out } => {
            cmd_solve(&RunConfig::from_path(config)?, out.as_deref())?;
            Ok(0)
        }
        Command::Spectrum {
            config,
            omega_min,
            omega_max,
            points,
            initial,
            out,
        } => {
            let cfg = RunConfig::from_path(config)?;
            let grid = linear_grid(*omega_min, *omega_max, *points)?;
            cmd_spectrum(&cfg, &grid, initial, out.as_deref())?;
            Ok(0)
        }
        Command::Evolve {
            config,
            initial,
            t_max,
            steps,
            out,
        } => {
            cmd_evolve(&RunConfig::from_path(config)?, initial, *t_max, *steps, out.as_deref())?;
            Ok(0)
        }
        Command::Verify { config } => {
            let cfg = RunConfig::from_path(config)?;
            let model = cfg.build_model()?;
            let report = verify_model(&model, &cfg.solver_options(), cfg.tolerances.residual)?;
            write!(stdout, "{report}")?;
            let ok = report.all_passed();
            writeln!(stdout, "{}", if ok { "verify: all checks passed" } else { "verify: FAILED" })?;
            Ok(if ok { 0 } else { 1 })
        }
    }
}

/// Parses arguments, runs, and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_jc;

    #[test]
    fn grid_has_exact_end_points_and_zero() {
        let g = linear_grid(-5.0, 5.0, 201).unwrap();
        assert_eq!(g.len(), 201);
        assert_eq!(g[0], -5.0);
        assert_eq!(g[100], 0.0);
        assert_eq!(g[200], 5.0);
        assert_eq!(linear_grid(0.0, 1.0, 2).unwrap(), vec![0.0, 1.0]);
        assert!(linear_grid(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn initial_state_names() {
        let model = build_jc(1.0, 0.3, 0.5, 0.2, 2).unwrap();
        assert_eq!(initial_state(&model, "ground").unwrap()[(0, 0)].re, 1.0);
        assert_eq!(initial_state(&model, "excited_atom").unwrap()[(2, 2)].re, 1.0);
        assert_eq!(initial_state(&model, "2, 1").unwrap()[(3, 3)].re, 1.0);
        assert!(matches!(initial_state(&model, "bright"), Err(Error::Config(_))));
        assert!(matches!(initial_state(&model, "3,1"), Err(Error::Config(_))));
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.16, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
