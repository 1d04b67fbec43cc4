//! J2 plasticity with linear isotropic hardening: radial return and history sweep.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::assembly::StiffnessSystem;
use crate::error::{Error, Result};
use crate::material::{Material, Voigt};

const SQRT_3_2: f64 = 1.224_744_871_391_589;

/// Yield function evaluation at a stress state.
#[derive(Clone, Copy, Debug)]
pub struct YieldEval {
    /// Deviatoric stress (Voigt, tensor shear component).
    pub s: Voigt,
    pub j2: f64,
    /// Von Mises equivalent stress `sqrt(3 J2)`.
    pub q: f64,
    pub phi: f64,
    /// Flow direction `sqrt(3/2) s / |s|` as a tensor; zero when `q = 0`.
    pub n_dir: Voigt,
}

/// Frobenius norm of a symmetric tensor stored as (xx, yy, zz, xy).
pub fn tensor_norm(t: &Voigt) -> f64 {
    (t[0] * t[0] + t[1] * t[1] + t[2] * t[2] + 2.0 * t[3] * t[3]).sqrt()
}

pub fn deviator(sigma: &Voigt) -> Voigt {
    let p = (sigma[0] + sigma[1] + sigma[2]) / 3.0;
    Voigt::new(sigma[0] - p, sigma[1] - p, sigma[2] - p, sigma[3])
}

pub fn yield_eval(sigma: &Voigt, ebar: f64, mat: &Material) -> YieldEval {
    let s = deviator(sigma);
    let norm = tensor_norm(&s);
    let j2 = 0.5 * norm * norm;
    let q = SQRT_3_2 * norm;
    let n_dir = if norm > 0.0 { s * (SQRT_3_2 / norm) } else { Voigt::zeros() };
    YieldEval { s, j2, q, phi: q - mat.yield_at(ebar), n_dir }
}

/// Outcome of one elastic-predictor / return-mapping step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReturnMap {
    pub eps_p: Voigt,
    pub ebar: f64,
    pub sigma: Voigt,
    pub dlambda: f64,
}

/// Backward-Euler radial return. With linear hardening the consistency
/// condition is linear in the multiplier, so it is solved in closed form.
pub fn trial_and_return(
    eps: &Voigt,
    eps_p_old: &Voigt,
    ebar_old: f64,
    mat: &Material,
    c: &nalgebra::Matrix4<f64>,
) -> Result<ReturnMap> {
    let sigma_trial = c * (eps - eps_p_old);
    let trial = yield_eval(&sigma_trial, ebar_old, mat);
    if trial.phi <= 0.0 {
        return Ok(ReturnMap { eps_p: *eps_p_old, ebar: ebar_old, sigma: sigma_trial, dlambda: 0.0 });
    }
    if trial.q == 0.0 {
        return Err(Error::CorruptedState);
    }
    let g = mat.shear_modulus();
    let dlambda = trial.phi / (3.0 * g + mat.hardening);
    let n = trial.n_dir;
    // engineering shear in the strain vector
    let dep = Voigt::new(n[0], n[1], n[2], 2.0 * n[3]) * dlambda;
    let eps_p = eps_p_old + dep;
    Ok(ReturnMap { eps_p, ebar: ebar_old + dlambda, sigma: c * (eps - eps_p), dlambda })
}

/// Dense total strain history at the Gauss points, stored point-major.
#[derive(Clone, Debug)]
pub struct StrainHistory {
    pub n_gauss: usize,
    pub n_times: usize,
    pub data: Vec<Voigt>,
}

impl StrainHistory {
    pub fn zeros(n_gauss: usize, n_times: usize) -> Self {
        StrainHistory { n_gauss, n_times, data: vec![Voigt::zeros(); n_gauss * n_times] }
    }

    pub fn at(&self, gp: usize, t: usize) -> &Voigt {
        &self.data[gp * self.n_times + t]
    }

    pub fn point(&self, gp: usize) -> &[Voigt] {
        &self.data[gp * self.n_times..(gp + 1) * self.n_times]
    }

    /// Strains from a dense displacement history (all dofs by time).
    pub fn from_displacements(sys: &StiffnessSystem, u: &DMatrix<f64>) -> Self {
        let n_times = u.ncols();
        let mut data = vec![Voigt::zeros(); sys.n_gauss() * n_times];
        data.par_chunks_mut(n_times).enumerate().for_each(|(gp, out)| {
            let g = &sys.gauss[gp];
            let dofs = &sys.element_dofs[g.element];
            for (t, e) in out.iter_mut().enumerate() {
                let ue = nalgebra::SVector::<f64, 8>::from_fn(|r, _| u[(dofs[r], t)]);
                *e = g.b * ue;
            }
        });
        StrainHistory { n_gauss: sys.n_gauss(), n_times, data }
    }
}

/// Plastic variables at every Gauss point and time node, stored point-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PlasticState {
    pub n_gauss: usize,
    pub n_times: usize,
    pub eps_p: Vec<Voigt>,
    pub ebar: Vec<f64>,
    pub sigma: Option<Vec<Voigt>>,
}

impl PlasticState {
    pub fn virgin(n_gauss: usize, n_times: usize) -> Self {
        PlasticState {
            n_gauss,
            n_times,
            eps_p: vec![Voigt::zeros(); n_gauss * n_times],
            ebar: vec![0.0; n_gauss * n_times],
            sigma: None,
        }
    }

    pub fn eps_p_at(&self, gp: usize, t: usize) -> &Voigt {
        &self.eps_p[gp * self.n_times + t]
    }

    pub fn ebar_at(&self, gp: usize, t: usize) -> f64 {
        self.ebar[gp * self.n_times + t]
    }

    pub fn ebar_history(&self, gp: usize) -> &[f64] {
        &self.ebar[gp * self.n_times..(gp + 1) * self.n_times]
    }

    /// Plastic strains of all Gauss points at time index `t`.
    pub fn slice_at(&self, t: usize) -> Vec<Voigt> {
        (0..self.n_gauss).map(|gp| *self.eps_p_at(gp, t)).collect()
    }

    pub fn is_virgin(&self) -> bool {
        self.ebar.iter().all(|&e| e == 0.0)
    }
}

/// Integrates the constitutive law along the whole time grid at every Gauss point.
///
/// Time index 0 is the virgin initial state; steps 1.. are sequential return maps.
pub fn history_sweep(strains: &StrainHistory, mat: &Material, store_stress: bool) -> Result<PlasticState> {
    let (ng, nt) = (strains.n_gauss, strains.n_times);
    let c = mat.elastic_matrix();
    let mut state = PlasticState::virgin(ng, nt);
    let mut sigma = if store_stress { vec![Voigt::zeros(); ng * nt] } else { Vec::new() };

    let results: Vec<Result<()>> = if store_stress {
        state
            .eps_p
            .par_chunks_mut(nt)
            .zip(state.ebar.par_chunks_mut(nt))
            .zip(sigma.par_chunks_mut(nt))
            .enumerate()
            .map(|(gp, ((ep, eb), sg))| sweep_point(gp, strains.point(gp), mat, &c, ep, eb, Some(sg)))
            .collect()
    } else {
        state
            .eps_p
            .par_chunks_mut(nt)
            .zip(state.ebar.par_chunks_mut(nt))
            .enumerate()
            .map(|(gp, (ep, eb))| sweep_point(gp, strains.point(gp), mat, &c, ep, eb, None))
            .collect()
    };
    results.into_iter().collect::<Result<Vec<_>>>()?;
    if store_stress {
        state.sigma = Some(sigma);
    }
    Ok(state)
}

fn sweep_point(
    gp: usize,
    eps: &[Voigt],
    mat: &Material,
    c: &nalgebra::Matrix4<f64>,
    eps_p: &mut [Voigt],
    ebar: &mut [f64],
    mut sigma: Option<&mut [Voigt]>,
) -> Result<()> {
    if let Some(s) = sigma.as_deref_mut() {
        s[0] = c * eps[0];
    }
    for t in 1..eps.len() {
        if !eps[t].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteStrain { gauss_point: gp, time: t });
        }
        let r = trial_and_return(&eps[t], &eps_p[t - 1], ebar[t - 1], mat, c)?;
        eps_p[t] = r.eps_p;
        ebar[t] = r.ebar;
        if let Some(s) = sigma.as_deref_mut() {
            s[t] = r.sigma;
        }
    }
    Ok(())
}

/// Space-time plastic force: column `t` is the assembled plastic force at time `t`.
pub fn plastic_rhs(state: &PlasticState, sys: &StiffnessSystem) -> Result<DMatrix<f64>> {
    if state.n_gauss != sys.n_gauss() {
        return Err(Error::InconsistentState(format!(
            "state has {} gauss points, system has {}",
            state.n_gauss,
            sys.n_gauss()
        )));
    }
    let nf = sys.n_free();
    let nt = state.n_times;
    // same expression and accumulation order as `internal_force_from_state`
    let mut f = DMatrix::<f64>::zeros(nf, nt);
    f.as_mut_slice().par_chunks_mut(nf.max(1)).enumerate().for_each(|(t, col)| {
        if nf == 0 {
            return;
        }
        for (gp, g) in sys.gauss.iter().enumerate() {
            let ep = state.eps_p_at(gp, t);
            if ep.iter().all(|v| *v == 0.0) {
                continue;
            }
            let fe = g.b.transpose() * (sys.elastic * ep) * g.weight;
            for (r, &d) in sys.element_dofs[g.element].iter().enumerate() {
                if let Some(i) = sys.dof_index[d] {
                    col[i] += fe[r];
                }
            }
        }
    });
    Ok(f)
}
