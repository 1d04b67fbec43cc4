//! Classical incremental FE solver with modified Newton iterations, and point probes.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::assembly::StiffnessSystem;
use crate::cases::LoadWaveform;
use crate::error::{Error, Result};
use crate::material::Voigt;
use crate::mesh::Mesh;
use crate::plasticity::{trial_and_return, PlasticState, StrainHistory};

const MAX_STEP_ITERATIONS: usize = 200;

/// Displacement history over all dofs with the matching plastic state.
#[derive(Clone, Debug)]
pub struct Response {
    pub displacement: DMatrix<f64>,
    pub state: PlasticState,
}

#[derive(Clone, Debug)]
pub struct IncrementalSolution {
    pub response: Response,
    /// Linear solves per time step (0 for the initial state).
    pub iterations: Vec<usize>,
}

/// Time stepping with the constant elastic stiffness; each step iterates
/// `u += K^{-1} r`, `r = F_ext + F_p(trial state) - K u`, until `|r|` drops below
/// `tol_eq` times the larger of `|F_ext + F_p|` and the peak external load.
pub fn solve_incremental(sys: &StiffnessSystem, waveform: &LoadWaveform, tol_eq: f64) -> Result<IncrementalSolution> {
    let nt = waveform.len();
    let ng = sys.n_gauss();
    let mat = sys.material;
    let c = sys.elastic;
    let mut displacement = DMatrix::zeros(sys.n_dofs, nt);
    let mut state = PlasticState::virgin(ng, nt);
    let mut iterations = vec![0; nt];
    let peak = waveform.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let load_scale = sys.load_space.norm() * peak;

    let mut uf = DVector::<f64>::zeros(sys.n_free());
    let mut ep = vec![Voigt::zeros(); ng];
    let mut eb = vec![0.0; ng];
    let mut ep_trial = ep.clone();
    let mut eb_trial = eb.clone();
    for t in 1..nt {
        let load = waveform.values[t];
        let fext = &sys.load_space * load;
        let mut done = false;
        let mut last = f64::NAN;
        for it in 0..=MAX_STEP_ITERATIONS {
            let u = sys.expand(uf.as_slice(), load);
            let strains = sys.gauss_strains(u.as_slice());
            ep_trial
                .par_iter_mut()
                .zip(eb_trial.par_iter_mut())
                .enumerate()
                .try_for_each(|(gp, (ept, ebt))| -> Result<()> {
                    let r = trial_and_return(&strains[gp], &ep[gp], eb[gp], &mat, &c)?;
                    *ept = r.eps_p;
                    *ebt = r.ebar;
                    Ok(())
                })?;
            let fp = sys.internal_force_from_state(&ep_trial)?;
            let total = &fext + &fp;
            let r = &total - sys.k_mul(&uf);
            let reference = total.norm().max(load_scale);
            last = if reference > 0.0 { r.norm() / reference } else { r.norm() };
            if last < tol_eq {
                iterations[t] = it;
                done = true;
                break;
            }
            if it == MAX_STEP_ITERATIONS {
                break;
            }
            uf += sys.solve(&r);
        }
        if !done {
            return Err(Error::StepFailure { time: t, iterations: MAX_STEP_ITERATIONS, residual: last });
        }
        ep.copy_from_slice(&ep_trial);
        eb.copy_from_slice(&eb_trial);
        let u = sys.expand(uf.as_slice(), load);
        displacement.set_column(t, &u);
        for gp in 0..ng {
            state.eps_p[gp * nt + t] = ep[gp];
            state.ebar[gp * nt + t] = eb[gp];
        }
    }
    Ok(IncrementalSolution { response: Response { displacement, state }, iterations })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    StressXX,
    StrainXX,
    PlasticStrainXX,
    AccumulatedPlasticStrain,
    DisplacementX,
    DisplacementY,
}

/// Gauss point closest to `point`, which must lie inside the mesh.
pub fn nearest_gauss_point(sys: &StiffnessSystem, mesh: &Mesh, point: [f64; 2]) -> Result<usize> {
    mesh.locate(point).ok_or(Error::OutsideMesh(point[0], point[1]))?;
    let d = |g: usize| {
        let p = sys.gauss[g].position;
        (p[0] - point[0]).powi(2) + (p[1] - point[1]).powi(2)
    };
    Ok((0..sys.n_gauss()).min_by(|&a, &b| d(a).total_cmp(&d(b))).unwrap_or(0))
}

/// Time series of `quantity` at the Gauss point or node nearest to `point`.
pub fn probe(sys: &StiffnessSystem, mesh: &Mesh, response: &Response, point: [f64; 2], quantity: Quantity) -> Result<Vec<f64>> {
    let nt = response.displacement.ncols();
    match quantity {
        Quantity::DisplacementX | Quantity::DisplacementY => {
            mesh.locate(point).ok_or(Error::OutsideMesh(point[0], point[1]))?;
            let dof = 2 * mesh.nearest_node(point) + usize::from(quantity == Quantity::DisplacementY);
            Ok(response.displacement.row(dof).iter().copied().collect())
        }
        _ => {
            let gp = nearest_gauss_point(sys, mesh, point)?;
            let strains = point_strains(sys, &response.displacement, gp);
            Ok((0..nt)
                .map(|t| match quantity {
                    Quantity::StressXX => (sys.elastic * (strains[t] - response.state.eps_p_at(gp, t)))[0],
                    Quantity::StrainXX => strains[t][0],
                    Quantity::PlasticStrainXX => response.state.eps_p_at(gp, t)[0],
                    _ => response.state.ebar_at(gp, t),
                })
                .collect())
        }
    }
}

/// Strain history of one Gauss point from a dense displacement history.
pub fn point_strains(sys: &StiffnessSystem, u: &DMatrix<f64>, gp: usize) -> Vec<Voigt> {
    let g = &sys.gauss[gp];
    let dofs = &sys.element_dofs[g.element];
    (0..u.ncols())
        .map(|t| g.b * nalgebra::SVector::<f64, 8>::from_fn(|r, _| u[(dofs[r], t)]))
        .collect()
}

impl Response {
    pub fn strains(&self, sys: &StiffnessSystem) -> StrainHistory {
        StrainHistory::from_displacements(sys, &self.displacement)
    }
}
