//! Command-line front end. Subcommands map one-to-one onto the library
//! stages and compose through CSV files, so any step can be rerun or
//! swapped out by hand; `run` drives the whole pipeline from a config
//! file.

use clap::{Parser, Subcommand};
use landscape_lab::analysis::{
    decay_envelope_check, eigenpair_residual, landscape_residual, localization_match, log_log_slope,
};
use landscape_lab::config::ExperimentConfig;
use landscape_lab::eigen::lowest_eigenpairs;
use landscape_lab::error::{Error, Result};
use landscape_lab::grid::Grid1D;
use landscape_lab::landscape::solve_landscape;
use landscape_lab::operator::assemble_hamiltonian;
use landscape_lab::pipeline::{load_potential_csv, run, write_potential_csv};
use landscape_lab::potential::{gen_modulated_rhs, gen_piecewise_potential, Potential};
use landscape_lab::regularize::{default_time_scale, regularized_potential, BoundaryPolicy};
use landscape_lab::report::write_report;
use landscape_lab::stochastic::{avg_potential_mc, fk_reproducing_check, sample_paths};
use landscape_lab::table::{fmt_f64, read_column, Table};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "landscape-lab",
    version,
    about = "1-D Schrodinger landscape laboratory"
)]
struct Cli {
    /// Worker threads (default: all cores). Results are identical either way.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a piecewise-constant random potential CSV.
    GenPotential {
        #[arg(long, default_value_t = 3000)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        intervals: usize,
        #[arg(long, default_value_t = 1e5)]
        vmax: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Lowest eigenpairs of -D_h + V.
    Eigen {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// Eigenvalue summary CSV; vectors land next to it as <out>.vectors.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Landscape solve (-D_h + V) u = f.
    Landscape {
        #[arg(long)]
        potential: PathBuf,
        /// constant:<value> | modulated | file:<path>
        #[arg(long, default_value = "constant:1")]
        rhs: String,
        /// Seed for the modulated rhs profile.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Smoothed potential V_t = V * k_t.
    Regularize {
        #[arg(long)]
        potential: PathBuf,
        /// Smoothing time, or "auto" for the potential's own scale.
        #[arg(long, default_value = "auto")]
        t: String,
        #[arg(long, default_value = "reflect")]
        boundary: BoundaryPolicy,
        #[arg(long)]
        out: PathBuf,
    },
    /// Residuals of the smoothed equations over a t sweep.
    Residuals {
        #[arg(long)]
        potential: PathBuf,
        /// Sweep bounds "t_min..t_max" (geometric ladder between them).
        #[arg(long, default_value = "1e-6..1e-4")]
        sweep: String,
        #[arg(long, default_value_t = 7)]
        points: usize,
        #[arg(long, default_value = "reflect")]
        boundary: BoundaryPolicy,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo reproducing-formula and averaged-potential checks.
    FeynmanKac {
        #[arg(long)]
        potential: PathBuf,
        /// Start coordinate in (0,1); default: the ground state's peak.
        #[arg(long)]
        x: Option<f64>,
        /// Horizon; default keeps e^{lambda t} of order one.
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, default_value_t = landscape_lab::stochastic::DEFAULT_PATHS)]
        paths: usize,
        #[arg(long, default_value_t = landscape_lab::stochastic::DEFAULT_SUBSTEPS)]
        substeps: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Agmon distance profiles and decay-envelope offsets.
    Agmon {
        #[arg(long)]
        potential: PathBuf,
        /// Smoothing time for the V_t envelope, or "auto".
        #[arg(long, default_value = "auto")]
        t: String,
        #[arg(long, default_value = "reflect")]
        boundary: BoundaryPolicy,
        #[arg(long)]
        out: PathBuf,
    },
    /// Localization predictions: u-peaks and V_t-valleys vs eigenfunctions.
    Predict {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// Smoothing time, or "auto".
        #[arg(long, default_value = "auto")]
        t: String,
        /// Match tolerance in nodes; default scales with n.
        #[arg(long)]
        tolerance: Option<usize>,
        #[arg(long, default_value = "reflect")]
        boundary: BoundaryPolicy,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render report.html over an artifact directory.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
    /// Full pipeline from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // ignore the error when a pool already exists (tests, reentry)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::GenPotential {
            n,
            intervals,
            vmax,
            seed,
            out,
        } => {
            let grid = Grid1D::new(n)?;
            let v = gen_piecewise_potential(&grid, intervals, vmax, seed)?;
            write_potential_csv(&out, &v)?;
            println!(
                "wrote {} ({} nodes, sup {})",
                out.display(),
                n,
                fmt_f64(v.sup())
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Eigen { potential, k, out } => {
            let v = load_potential_csv(&potential)?;
            let grid = v.grid().clone();
            let op = assemble_hamiltonian(&grid, &v)?;
            let pairs = lowest_eigenpairs(&op, k)?;
            let mut summary = Table::new(&["index", "lambda", "residual", "argmax_node"]);
            for p in &pairs {
                summary.push(vec![
                    p.index.to_string(),
                    fmt_f64(p.lambda),
                    fmt_f64(p.residual),
                    argmax_abs(&p.phi).to_string(),
                ])?;
            }
            summary.write(&out)?;
            let mut cols: Vec<String> = vec!["node".into(), "x".into()];
            cols.extend(pairs.iter().map(|p| format!("phi_{}", p.index)));
            let col_refs: Vec<&str> = cols.iter().map(|c| c.as_str()).collect();
            let mut vectors = Table::new(&col_refs);
            for i in 0..grid.n() {
                let mut row = vec![i.to_string(), fmt_f64(grid.x(i))];
                row.extend(pairs.iter().map(|p| fmt_f64(p.phi[i])));
                vectors.push(row)?;
            }
            vectors.write(&vectors_path(&out))?;
            for p in &pairs {
                println!("lambda_{} = {}", p.index, fmt_f64(p.lambda));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Landscape {
            potential,
            rhs,
            seed,
            out,
        } => {
            let v = load_potential_csv(&potential)?;
            let grid = v.grid().clone();
            let f = parse_rhs_arg(&rhs, &grid, seed)?;
            let op = assemble_hamiltonian(&grid, &v)?;
            let sol = solve_landscape(&op, &f)?;
            let mut table = Table::new(&["node", "x", "f", "u", "inv_u"]);
            for (i, fi) in f.iter().enumerate() {
                table.push(vec![
                    i.to_string(),
                    fmt_f64(grid.x(i)),
                    fmt_f64(*fi),
                    fmt_f64(sol.values()[i]),
                    fmt_f64(1.0 / sol.values()[i]),
                ])?;
            }
            table.write(&out)?;
            println!(
                "wrote {} (residual {})",
                out.display(),
                fmt_f64(sol.residual())
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Regularize {
            potential,
            t,
            boundary,
            out,
        } => {
            let v = load_potential_csv(&potential)?;
            let t = parse_time_arg(&t, &v)?;
            let vt = regularized_potential(&v, t, boundary)?;
            let grid = v.grid();
            let mut table = Table::new(&["node", "x", "v", "v_t"]);
            for i in 0..grid.n() {
                table.push(vec![
                    i.to_string(),
                    fmt_f64(grid.x(i)),
                    fmt_f64(v.values()[i]),
                    fmt_f64(vt.values()[i]),
                ])?;
            }
            table.write(&out)?;
            println!("wrote {} (t = {})", out.display(), fmt_f64(t));
            Ok(ExitCode::SUCCESS)
        }
        Command::Residuals {
            potential,
            sweep,
            points,
            boundary,
            out,
        } => {
            let v = load_potential_csv(&potential)?;
            let grid = v.grid().clone();
            let ts = sweep_ladder(&sweep, points)?;
            let op = assemble_hamiltonian(&grid, &v)?;
            let pair = &lowest_eigenpairs(&op, 1)?[0];
            let sol = solve_landscape(&op, &vec![1.0; grid.n()])?;
            let mut table = Table::new(&[
                "t",
                "eigen_sup",
                "eigen_gap",
                "landscape_sup",
                "landscape_gap",
            ]);
            let mut sups = Vec::new();
            for &t in &ts {
                let e = eigenpair_residual(pair, &v, t, boundary)?;
                let l = landscape_residual(&sol, &v, t, boundary)?;
                sups.push(e.sup_window);
                table.push(vec![
                    fmt_f64(t),
                    fmt_f64(e.sup_window),
                    fmt_f64(e.identity_gap),
                    fmt_f64(l.sup_window),
                    fmt_f64(l.identity_gap),
                ])?;
            }
            table.write(&out)?;
            match log_log_slope(&ts, &sups) {
                Ok(slope) => println!("eigen residual slope = {}", fmt_f64(slope)),
                Err(e) => println!("slope not fitted: {e}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::FeynmanKac {
            potential,
            x,
            t,
            paths,
            substeps,
            seed,
            out,
        } => {
            let v = load_potential_csv(&potential)?;
            let grid = v.grid().clone();
            let op = assemble_hamiltonian(&grid, &v)?;
            let pair = &lowest_eigenpairs(&op, 1)?[0];
            let x0 = x.unwrap_or_else(|| grid.x(argmax_abs(&pair.phi)));
            let horizon = t.unwrap_or(0.1 / pair.lambda);
            let ensemble = sample_paths(x0, horizon, substeps, paths, seed)?;
            let fk = fk_reproducing_check(&pair.phi, pair.lambda, &v, &ensemble)?;
            let avg = avg_potential_mc(&v, &ensemble);
            let vt = regularized_potential(&v, horizon, BoundaryPolicy::Reflect)?;
            let target = vt.values()[grid.nearest_node(x0)];
            let mut table =
                Table::new(&["check", "value", "stderr", "target", "allowance", "passes"]);
            table.push(vec![
                "reproducing".into(),
                fmt_f64(fk.estimate.mean),
                fmt_f64(fk.estimate.stderr),
                fmt_f64(fk.target),
                fmt_f64(fk.allowance),
                fk.passes.to_string(),
            ])?;
            let allowance = 2.0 * v.sup() / substeps as f64;
            let avg_pass = (avg.mean - target).abs() <= 3.0 * avg.stderr + allowance;
            table.push(vec![
                "avg_potential".into(),
                fmt_f64(avg.mean),
                fmt_f64(avg.stderr),
                fmt_f64(target),
                fmt_f64(allowance),
                avg_pass.to_string(),
            ])?;
            table.write(&out)?;
            println!(
                "reproducing: {} vs {} ({})",
                fmt_f64(fk.estimate.mean),
                fmt_f64(fk.target),
                if fk.passes { "pass" } else { "FAIL" }
            );
            Ok(if fk.passes && avg_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Agmon {
            potential,
            t,
            boundary,
            out,
        } => {
            let v = load_potential_csv(&potential)?;
            let grid = v.grid().clone();
            let t = parse_time_arg(&t, &v)?;
            let op = assemble_hamiltonian(&grid, &v)?;
            let pair = &lowest_eigenpairs(&op, 1)?[0];
            let sol = solve_landscape(&op, &vec![1.0; grid.n()])?;
            let vt = regularized_potential(&v, t, boundary)?;
            let inv_u: Vec<f64> = sol.values().iter().map(|&u| 1.0 / u).collect();
            let r0 = argmax_abs(&pair.phi);
            let rho_u = landscape_lab::analysis::agmon_profile(&grid, &inv_u, pair.lambda, r0)?;
            let rho_vt =
                landscape_lab::analysis::agmon_profile(&grid, vt.values(), pair.lambda, r0)?;
            let env_u = decay_envelope_check(&grid, &pair.phi, &inv_u, pair.lambda, r0)?;
            let env_vt = decay_envelope_check(&grid, &pair.phi, vt.values(), pair.lambda, r0)?;
            let mut table = Table::new(&["node", "x", "abs_phi", "rho_inv_u", "rho_v_t"]);
            for i in 0..grid.n() {
                table.push(vec![
                    i.to_string(),
                    fmt_f64(grid.x(i)),
                    fmt_f64(pair.phi[i].abs()),
                    fmt_f64(rho_u[i]),
                    fmt_f64(rho_vt[i]),
                ])?;
            }
            table.write(&out)?;
            println!(
                "envelope offsets: 1/u {} ; V_t {}",
                fmt_f64(env_u.offset),
                fmt_f64(env_vt.offset)
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Predict {
            potential,
            k,
            t,
            tolerance,
            boundary,
            out,
        } => {
            let v = load_potential_csv(&potential)?;
            let grid = v.grid().clone();
            let t = parse_time_arg(&t, &v)?;
            let op = assemble_hamiltonian(&grid, &v)?;
            let pairs = lowest_eigenpairs(&op, k)?;
            let sol = solve_landscape(&op, &vec![1.0; grid.n()])?;
            let vt = regularized_potential(&v, t, boundary)?;
            let tol = tolerance.unwrap_or_else(|| (grid.n() / 50).max(1));
            let rep = localization_match(&pairs, sol.values(), vt.values(), tol)?;
            let mut table = Table::new(&["index", "eigen_node", "dist_u_peak", "dist_vt_valley"]);
            let fmt_dist = |d: usize| {
                if d == usize::MAX {
                    String::new()
                } else {
                    d.to_string()
                }
            };
            for (i, p) in pairs.iter().enumerate() {
                table.push(vec![
                    p.index.to_string(),
                    rep.eigen_nodes[i].to_string(),
                    fmt_dist(rep.peak_distance[i]),
                    fmt_dist(rep.valley_distance[i]),
                ])?;
            }
            table.write(&out)?;
            println!(
                "matched {}/{} by u-peaks, {}/{} by V_t-valleys (tolerance {tol})",
                rep.peak_matches,
                pairs.len(),
                rep.valley_matches,
                pairs.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { dir } => {
            let path = write_report(&dir)?;
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { config, out } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(out) = out {
                cfg.out = out;
            }
            let summary = run(&cfg)?;
            for gate in &summary.gates {
                println!(
                    "gate {}: {} ({})",
                    gate.name,
                    if gate.passed { "pass" } else { "FAIL" },
                    gate.detail
                );
            }
            println!("artifacts in {}", summary.out.display());
            Ok(if summary.all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}

fn vectors_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".vectors.csv");
    out.with_file_name(name)
}

fn argmax_abs(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    best
}

fn parse_time_arg(s: &str, v: &Potential) -> Result<f64> {
    if s == "auto" {
        Ok(default_time_scale(v))
    } else {
        s.parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad time {s:?}")))
    }
}

/// "t_min..t_max" -> geometric ladder of `points` times, largest first.
fn sweep_ladder(spec: &str, points: usize) -> Result<Vec<f64>> {
    let (lo, hi) = spec
        .split_once("..")
        .ok_or_else(|| Error::Parse(format!("sweep must be t_min..t_max, got {spec:?}")))?;
    let lo: f64 = lo
        .parse()
        .map_err(|_| Error::Parse(format!("bad sweep bound {lo:?}")))?;
    let hi: f64 = hi
        .parse()
        .map_err(|_| Error::Parse(format!("bad sweep bound {hi:?}")))?;
    if !(lo > 0.0 && hi > lo && points >= 2) {
        return Err(Error::Parse(format!(
            "need 0 < t_min < t_max and >= 2 points, got {spec:?}"
        )));
    }
    let ratio = lo / hi;
    Ok((0..points)
        .map(|i| hi * ratio.powf(i as f64 / (points - 1) as f64))
        .collect())
}

fn parse_rhs_arg(s: &str, grid: &Grid1D, seed: u64) -> Result<Vec<f64>> {
    if s == "modulated" {
        return Ok(gen_modulated_rhs(grid, seed));
    }
    if let Some(c) = s.strip_prefix("constant:") {
        let c: f64 = c
            .parse()
            .map_err(|_| Error::Parse(format!("bad rhs constant {c:?}")))?;
        return Ok(vec![c; grid.n()]);
    }
    if let Some(path) = s.strip_prefix("file:") {
        return read_column(std::path::Path::new(path), "value");
    }
    Err(Error::Parse(format!(
        "rhs must be constant:<value>, modulated, or file:<path>, got {s:?}"
    )))
}
