//! Stiffness assembly, Dirichlet elimination and plastic force assembly.

use std::io::Write;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Matrix4};

use crate::element::{gauss_points, map_point, strain_operator, StrainOperator};
use crate::error::{Error, Result};
use crate::material::{Material, Voigt};
use crate::mesh::Mesh;

/// Integration point data. Gauss point `g` belongs to element `g / 4`.
#[derive(Clone, Debug)]
pub struct GaussPoint {
    pub element: usize,
    pub position: [f64; 2],
    /// Quadrature weight times Jacobian determinant.
    pub weight: f64,
    pub b: StrainOperator,
}

/// Elastic stiffness restricted to the free dofs, with the rank-one Dirichlet lifting.
///
/// The imposed displacement at time `t` is `lift * u_D(t)`; the matching load on the
/// free dofs is `load_space * u_D(t)` with `load_space = -K_fc * lift_c`.
pub struct StiffnessSystem {
    pub material: Material,
    pub elastic: Matrix4<f64>,
    pub n_dofs: usize,
    /// System index to global dof.
    pub free_dofs: Vec<usize>,
    /// Global dof to system index, `None` when constrained.
    pub dof_index: Vec<Option<usize>>,
    pub lift: DVector<f64>,
    pub load_space: DVector<f64>,
    pub k_free: DMatrix<f64>,
    pub gauss: Vec<GaussPoint>,
    pub element_dofs: Vec<[usize; 8]>,
    k_full: DMatrix<f64>,
    factor: Cholesky<f64, Dyn>,
}

pub fn assemble_stiffness(mesh: &Mesh, mat: &Material) -> Result<StiffnessSystem> {
    let n_dofs = mesh.n_dofs();
    let c = mat.elastic_matrix();
    let gp = gauss_points();

    let mut gauss = Vec::with_capacity(4 * mesh.n_elements());
    let mut element_dofs = Vec::with_capacity(mesh.n_elements());
    let mut k_full = DMatrix::<f64>::zeros(n_dofs, n_dofs);
    for (e, el) in mesh.elements.iter().enumerate() {
        let coords = mesh.element_coords(e);
        let mut dofs = [0usize; 8];
        for a in 0..4 {
            dofs[2 * a] = 2 * el[a];
            dofs[2 * a + 1] = 2 * el[a] + 1;
        }
        let mut ke = nalgebra::SMatrix::<f64, 8, 8>::zeros();
        for xi in gp {
            let (b, det_j) = strain_operator(&coords, xi, e)?;
            ke += b.transpose() * c * b * det_j;
            gauss.push(GaussPoint { element: e, position: map_point(&coords, xi), weight: det_j, b });
        }
        let ke = (ke + ke.transpose()) * 0.5;
        for r in 0..8 {
            for s in 0..8 {
                k_full[(dofs[r], dofs[s])] += ke[(r, s)];
            }
        }
        element_dofs.push(dofs);
    }

    let mut constrained = vec![false; n_dofs];
    let mut lift = DVector::<f64>::zeros(n_dofs);
    for set in &mesh.dirichlet {
        for &n in &set.nodes {
            for d in 0..2 {
                if set.mask[d] {
                    constrained[2 * n + d] = true;
                    lift[2 * n + d] = set.lift[d];
                }
            }
        }
    }
    let free_dofs: Vec<usize> = (0..n_dofs).filter(|&d| !constrained[d]).collect();
    let mut dof_index = vec![None; n_dofs];
    for (i, &d) in free_dofs.iter().enumerate() {
        dof_index[d] = Some(i);
    }
    let nf = free_dofs.len();
    let k_free = DMatrix::from_fn(nf, nf, |r, s| k_full[(free_dofs[r], free_dofs[s])]);
    let k_lift = &k_full * &lift;
    let load_space = DVector::from_fn(nf, |r, _| -k_lift[free_dofs[r]]);

    let factor = Cholesky::new(k_free.clone()).ok_or(Error::Underconstrained)?;
    let kmax = (0..nf).map(|i| k_free[(i, i)]).fold(0.0, f64::max);
    let lmin = factor.l_dirty().diagonal().iter().fold(f64::INFINITY, |m, v| m.min(*v));
    if nf > 0 && lmin * lmin < 1e-12 * kmax {
        return Err(Error::Underconstrained);
    }

    Ok(StiffnessSystem {
        material: *mat,
        elastic: c,
        n_dofs,
        free_dofs,
        dof_index,
        lift,
        load_space,
        k_free,
        gauss,
        element_dofs,
        k_full,
        factor,
    })
}

impl StiffnessSystem {
    pub fn n_free(&self) -> usize {
        self.free_dofs.len()
    }

    pub fn n_gauss(&self) -> usize {
        self.gauss.len()
    }

    /// Full stiffness before constraint elimination.
    pub fn k_full(&self) -> &DMatrix<f64> {
        &self.k_full
    }

    /// Solves `K_ff x = rhs` with the stored factorization.
    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.factor.solve(rhs)
    }

    pub fn k_mul(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.k_free * x
    }

    /// Full dof vector from free values plus `load` times the lifting.
    pub fn expand(&self, free: &[f64], load: f64) -> DVector<f64> {
        let mut u = &self.lift * load;
        for (i, &d) in self.free_dofs.iter().enumerate() {
            u[d] = free[i];
        }
        u
    }

    /// Elastic equilibrium for imposed load `load` and extra free-dof force `force`.
    pub fn static_solve(&self, load: f64, force: Option<&DVector<f64>>) -> DVector<f64> {
        let mut rhs = &self.load_space * load;
        if let Some(f) = force {
            rhs += f;
        }
        let uf = self.solve(&rhs);
        self.expand(uf.as_slice(), load)
    }

    /// Total strain at every Gauss point for a full dof vector.
    pub fn gauss_strains(&self, u: &[f64]) -> Vec<Voigt> {
        self.gauss
            .iter()
            .map(|g| {
                let dofs = &self.element_dofs[g.element];
                let ue = nalgebra::SVector::<f64, 8>::from_fn(|r, _| u[dofs[r]]);
                g.b * ue
            })
            .collect()
    }

    /// Assembled plastic force `int B^T C eps_p` on the free dofs for one time slice.
    pub fn internal_force_from_state(&self, eps_p: &[Voigt]) -> Result<DVector<f64>> {
        let mut out = DVector::zeros(self.n_free());
        self.add_plastic_force(eps_p, out.as_mut_slice())?;
        Ok(out)
    }

    pub(crate) fn add_plastic_force(&self, eps_p: &[Voigt], out: &mut [f64]) -> Result<()> {
        if eps_p.len() != self.gauss.len() {
            return Err(Error::InconsistentState(format!(
                "{} plastic strain values for {} gauss points",
                eps_p.len(),
                self.gauss.len()
            )));
        }
        for (g, ep) in self.gauss.iter().zip(eps_p) {
            if ep.iter().all(|v| *v == 0.0) {
                continue;
            }
            let f = g.b.transpose() * (self.elastic * ep) * g.weight;
            for (r, &d) in self.element_dofs[g.element].iter().enumerate() {
                if let Some(i) = self.dof_index[d] {
                    out[i] += f[r];
                }
            }
        }
        Ok(())
    }

    /// Debug dump of the free-dof stiffness.
    pub fn write_matrix_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for r in 0..self.k_free.nrows() {
            let row: Vec<String> = self.k_free.row(r).iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}
