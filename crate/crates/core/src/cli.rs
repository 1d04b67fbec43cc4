//! `run` and `decompose` commands.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};

use crate::assembly::{assemble_stiffness, StiffnessSystem};
use crate::cases::{make_waveform, LoadWaveform};
use crate::driver;
use crate::error::{Error, Result};
use crate::io::csv::write_columns;
use crate::io::{vtk, RunConfig};
use crate::mesh::Mesh;
use crate::multitime::{decompose, decompose_field, make_grid, MultiTimeGrid, MultiTimeModes};
use crate::reference::{nearest_gauss_point, point_strains, solve_incremental, Response};

/// Environment variable overriding the configured output directory.
pub const OUTPUT_DIR_VAR: &str = "MTPGD_OUTPUT_DIR";

fn output_dir(configured: &Path, cli: Option<&Path>) -> PathBuf {
    if let Some(p) = cli {
        return p.to_path_buf();
    }
    match std::env::var_os(OUTPUT_DIR_VAR) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => configured.to_path_buf(),
    }
}

/// Summary of a `run`; `success` is true when every requested solver converged.
#[derive(Debug)]
pub struct RunSummary {
    pub success: bool,
    pub output_dir: PathBuf,
    pub pgd_report: Option<driver::SolveReport>,
    /// Relative Frobenius difference of the dense displacement histories (both solvers).
    pub displacement_difference: Option<f64>,
}

pub fn cmd_run(config_path: &Path, out_override: Option<&Path>) -> Result<RunSummary> {
    let cfg = RunConfig::load(config_path)?;
    run_config(&cfg, out_override)
}

pub fn run_config(cfg: &RunConfig, out_override: Option<&Path>) -> Result<RunSummary> {
    let out = output_dir(&cfg.output_dir, out_override);
    std::fs::create_dir_all(&out)?;
    let mesh = cfg.case.build_mesh()?;
    let waveform = make_waveform(&cfg.case)?;
    let sys = assemble_stiffness(&mesh, &cfg.material)?;
    mesh.write_nodes_csv(std::fs::File::create(out.join("mesh_nodes.csv"))?)?;
    mesh.write_elements_csv(std::fs::File::create(out.join("mesh_elements.csv"))?)?;
    write_columns(&out.join("waveform.csv"), &["time", "u_d"], &[&waveform.times, &waveform.values])?;
    println!(
        "case {:?}: {} nodes, {} elements, {} free dofs, {} time nodes",
        cfg.case.geometry,
        mesh.n_nodes(),
        mesh.n_elements(),
        sys.n_free(),
        waveform.len()
    );

    let mut success = true;
    let mut pgd_response = None;
    let mut pgd_report = None;
    if cfg.solver.pgd() {
        let result = driver::run(&sys, &waveform, &cfg.driver)?;
        let report = &result.report;
        write_report(&out.join("solve_report.csv"), report)?;
        println!(
            "pgd: {} after {} iterations, e_L = {:.3e}, rank {}",
            if report.converged { "converged" } else { "NOT converged" },
            report.iterations,
            report.errors.last().copied().unwrap_or(0.0),
            result.field.rank()
        );
        success &= report.converged;
        write_modes(&out, &result.field, &waveform, &sys)?;
        let grid = make_grid(waveform.len(), cfg.case.n_cycles, cfg.macro_cycles, cfg.case.cycle_duration)?;
        let sub = decompose_field(&result.field.time, &grid, cfg.mt_tol)?;
        write_submodes(&out.join("mt_submodes.csv"), &sub)?;
        let stored: usize = sub.iter().map(MultiTimeModes::storage).sum();
        println!(
            "mt-pgd: N_T = {}, N_tau = {}, sub-modes per mode {:?}, stored {} of {} time values",
            grid.n_macro,
            grid.n_tau,
            sub.iter().map(MultiTimeModes::n_submodes).collect::<Vec<_>>(),
            stored,
            result.field.rank() * waveform.len()
        );
        let u = crate::pgd::evaluate_field(&result.field, &sys, &waveform)?;
        let response = Response { displacement: u, state: result.state };
        write_probes(&out, "pgd", cfg, &sys, &mesh, &waveform, &response)?;
        if cfg.vtk {
            write_final_vtk(&out.join("pgd_final.vtk"), &mesh, &sys, &response)?;
        }
        pgd_report = Some(result.report);
        pgd_response = Some(response);
    }

    let mut displacement_difference = None;
    if cfg.solver.fe() {
        let fe = match solve_incremental(&sys, &waveform, cfg.tol_eq) {
            Ok(fe) => fe,
            Err(e) => {
                eprintln!("fe: {e}");
                return Ok(RunSummary { success: false, output_dir: out, pgd_report, displacement_difference });
            }
        };
        println!("fe: {} linear solves over {} steps", fe.iterations.iter().sum::<usize>(), waveform.len() - 1);
        write_probes(&out, "fe", cfg, &sys, &mesh, &waveform, &fe.response)?;
        if cfg.vtk {
            write_final_vtk(&out.join("fe_final.vtk"), &mesh, &sys, &fe.response)?;
        }
        if let Some(pgd) = &pgd_response {
            let diff = (&pgd.displacement - &fe.response.displacement).norm() / fe.response.displacement.norm();
            println!("pgd vs fe: relative displacement difference {diff:.3e}");
            write_comparison(&out, cfg, &sys, &mesh, &waveform, pgd, &fe.response)?;
            displacement_difference = Some(diff);
        }
    }
    Ok(RunSummary { success, output_dir: out, pgd_report, displacement_difference })
}

fn write_report(path: &Path, report: &driver::SolveReport) -> Result<()> {
    let it: Vec<f64> = (1..=report.errors.len()).map(|i| i as f64).collect();
    let ranks: Vec<f64> = report.ranks[1..].iter().map(|&r| r as f64).collect();
    let rhs: Vec<f64> = report.rhs_ranks.iter().map(|&r| r as f64).collect();
    write_columns(path, &["iteration", "error", "rank", "rhs_rank"], &[&it, &report.errors, &ranks, &rhs])
}

fn normalized(v: &DVector<f64>) -> Vec<f64> {
    let m = v.amax();
    if m > 0.0 {
        v.iter().map(|x| x / m).collect()
    } else {
        v.iter().copied().collect()
    }
}

fn write_modes(out: &Path, field: &crate::pgd::SpaceTimeField, waveform: &LoadWaveform, sys: &StiffnessSystem) -> Result<()> {
    let names: Vec<String> = (1..=field.rank()).map(|k| format!("mode_{k}")).collect();
    let dofs: Vec<f64> = sys.free_dofs.iter().map(|&d| d as f64).collect();
    for (suffix, norm) in [("", false), ("_normalized", true)] {
        let space: Vec<Vec<f64>> =
            field.space.iter().map(|w| if norm { normalized(w) } else { w.iter().copied().collect() }).collect();
        let time: Vec<Vec<f64>> =
            field.time.iter().map(|l| if norm { normalized(l) } else { l.iter().copied().collect() }).collect();
        let mut header = vec!["dof"];
        header.extend(names.iter().map(String::as_str));
        let mut cols: Vec<&[f64]> = vec![&dofs];
        cols.extend(space.iter().map(Vec::as_slice));
        write_columns(&out.join(format!("pgd_space_modes{suffix}.csv")), &header, &cols)?;
        header[0] = "time";
        let mut cols: Vec<&[f64]> = vec![&waveform.times];
        cols.extend(time.iter().map(Vec::as_slice));
        write_columns(&out.join(format!("pgd_time_modes{suffix}.csv")), &header, &cols)?;
    }
    Ok(())
}

/// Long format: `mode, submode, scale (0 micro, 1 macro), index, value, residual`.
pub fn write_submodes(path: &Path, modes: &[MultiTimeModes]) -> Result<()> {
    let mut cols: [Vec<f64>; 6] = Default::default();
    for (k, m) in modes.iter().enumerate() {
        for j in 0..m.n_submodes() {
            for (scale, v) in [(0.0, &m.micro[j]), (1.0, &m.macro_[j])] {
                for (i, x) in v.iter().enumerate() {
                    cols[0].push((k + 1) as f64);
                    cols[1].push((j + 1) as f64);
                    cols[2].push(scale);
                    cols[3].push(i as f64);
                    cols[4].push(*x);
                    cols[5].push(m.residuals[j + 1]);
                }
            }
        }
    }
    let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
    write_columns(path, &["mode", "submode", "scale", "index", "value", "residual"], &refs)
}

const PROBE_HEADER: [&str; 17] = [
    "time", "u_d", "ux", "uy", "eps_xx", "eps_yy", "eps_zz", "gamma_xy", "eps_p_xx", "eps_p_yy", "eps_p_zz",
    "gamma_p_xy", "ebar_p", "sigma_xx", "sigma_yy", "sigma_zz", "sigma_xy",
];

/// Probe table columns in the order of `PROBE_HEADER`.
pub fn probe_table(
    sys: &StiffnessSystem,
    mesh: &Mesh,
    waveform: &LoadWaveform,
    response: &Response,
    point: [f64; 2],
) -> Result<Vec<Vec<f64>>> {
    let gp = nearest_gauss_point(sys, mesh, point)?;
    let node = mesh.nearest_node(point);
    let strains = point_strains(sys, &response.displacement, gp);
    let nt = waveform.len();
    let mut cols = vec![Vec::with_capacity(nt); PROBE_HEADER.len()];
    for t in 0..nt {
        let ep = response.state.eps_p_at(gp, t);
        let sigma = sys.elastic * (strains[t] - ep);
        let row = [
            waveform.times[t],
            waveform.values[t],
            response.displacement[(2 * node, t)],
            response.displacement[(2 * node + 1, t)],
            strains[t][0],
            strains[t][1],
            strains[t][2],
            strains[t][3],
            ep[0],
            ep[1],
            ep[2],
            ep[3],
            response.state.ebar_at(gp, t),
            sigma[0],
            sigma[1],
            sigma[2],
            sigma[3],
        ];
        for (c, v) in cols.iter_mut().zip(row) {
            c.push(v);
        }
    }
    Ok(cols)
}

fn write_probes(
    out: &Path,
    tag: &str,
    cfg: &RunConfig,
    sys: &StiffnessSystem,
    mesh: &Mesh,
    waveform: &LoadWaveform,
    response: &Response,
) -> Result<()> {
    for (i, p) in cfg.probes.iter().enumerate() {
        let cols = probe_table(sys, mesh, waveform, response, *p)?;
        let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
        write_columns(&out.join(format!("{tag}_probe_{i}.csv")), &PROBE_HEADER, &refs)?;
    }
    Ok(())
}

fn write_comparison(
    out: &Path,
    cfg: &RunConfig,
    sys: &StiffnessSystem,
    mesh: &Mesh,
    waveform: &LoadWaveform,
    pgd: &Response,
    fe: &Response,
) -> Result<()> {
    for (i, p) in cfg.probes.iter().enumerate() {
        let a = probe_table(sys, mesh, waveform, pgd, *p)?;
        let b = probe_table(sys, mesh, waveform, fe, *p)?;
        let d_sigma: Vec<f64> = a[13].iter().zip(&b[13]).map(|(x, y)| x - y).collect();
        let d_eps: Vec<f64> = a[4].iter().zip(&b[4]).map(|(x, y)| x - y).collect();
        write_columns(
            &out.join(format!("comparison_probe_{i}.csv")),
            &["time", "u_d", "sigma_xx_pgd", "sigma_xx_fe", "delta_sigma_xx", "eps_xx_pgd", "eps_xx_fe", "delta_eps_xx"],
            &[&a[0], &a[1], &a[13], &b[13], &d_sigma, &a[4], &b[4], &d_eps],
        )?;
    }
    Ok(())
}

fn write_final_vtk(path: &Path, mesh: &Mesh, sys: &StiffnessSystem, response: &Response) -> Result<()> {
    let t = response.displacement.ncols() - 1;
    let u = response.displacement.column(t);
    let mag: Vec<f64> = (0..mesh.n_nodes()).map(|n| u[2 * n].hypot(u[2 * n + 1])).collect();
    let mut ebar = vec![0.0; mesh.n_elements()];
    for (gp, g) in sys.gauss.iter().enumerate() {
        ebar[g.element] += 0.25 * response.state.ebar_at(gp, t);
    }
    vtk::write_snapshot(path, mesh, &[("displacement_magnitude", &mag)], &[("ebar_p", &ebar)])
}

/// Standalone micro/macro decomposition of a sampled signal.
pub fn cmd_decompose(signal: &Path, n_tau: usize, n_macro: usize, tol: f64, out_override: Option<&Path>) -> Result<MultiTimeModes> {
    if !(0.0..1.0).contains(&tol) {
        return Err(Error::InvalidSpec(format!("tolerance must lie in [0, 1), got {tol}")));
    }
    let h = crate::io::csv::read_signal(signal)?;
    let grid = MultiTimeGrid::from_sizes(n_tau, n_macro)?;
    if h.len() != grid.n_times() {
        return Err(Error::DimensionMismatch(format!(
            "signal has {} samples, N_tau * N_T = {}",
            h.len(),
            grid.n_times()
        )));
    }
    let modes = decompose(&h, &grid, tol)?;
    let out = output_dir(Path::new("."), out_override);
    std::fs::create_dir_all(&out)?;
    let stem = signal.file_stem().and_then(|s| s.to_str()).unwrap_or("signal");
    write_submodes(&out.join(format!("{stem}_submodes.csv")), std::slice::from_ref(&modes))?;
    let idx: Vec<f64> = (0..modes.residuals.len()).map(|i| i as f64).collect();
    write_columns(&out.join(format!("{stem}_residuals.csv")), &["submodes", "residual"], &[&idx, &modes.residuals])?;
    println!("{} sub-modes, relative residual {:.3e}", modes.n_submodes(), modes.residual());
    Ok(modes)
}

/// Dense time-mode matrix helper used by the figure scripts: one column per mode.
pub fn time_mode_matrix(field: &crate::pgd::SpaceTimeField) -> DMatrix<f64> {
    if field.rank() == 0 {
        return DMatrix::zeros(0, 0);
    }
    DMatrix::from_columns(&field.time)
}
