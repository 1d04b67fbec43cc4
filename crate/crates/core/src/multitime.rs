//! Micro/macro separation of time functions on a tensorized time grid.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lowrank::{deflate, PowerIteration};

/// Tensorized time grid with `N_t = N_T * N_tau`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MultiTimeGrid {
    pub n_tau: usize,
    pub n_macro: usize,
    pub dtau: f64,
    pub d_macro: f64,
}

impl MultiTimeGrid {
    pub fn n_times(&self) -> usize {
        self.n_tau * self.n_macro
    }

    /// Grid with sizes only; steps are set to 1 per micro node.
    pub fn from_sizes(n_tau: usize, n_macro: usize) -> Result<Self> {
        if n_tau == 0 || n_macro == 0 {
            return Err(Error::Grid("grid sizes must be positive".into()));
        }
        Ok(MultiTimeGrid { n_tau, n_macro, dtau: 1.0, d_macro: n_tau as f64 })
    }

    /// Flat time index of micro node `i` in macro cell `j`.
    pub fn flat(&self, i: usize, j: usize) -> usize {
        j * self.n_tau + i
    }

    /// Inverse of [`MultiTimeGrid::flat`].
    pub fn split(&self, t: usize) -> (usize, usize) {
        (t % self.n_tau, t / self.n_tau)
    }

    /// Micro-by-macro matrix `M[i, j] = h[j N_tau + i]`.
    pub fn reshape(&self, h: &[f64]) -> Result<DMatrix<f64>> {
        if h.len() != self.n_times() {
            return Err(Error::DimensionMismatch(format!(
                "signal of length {} on a {}x{} grid",
                h.len(),
                self.n_tau,
                self.n_macro
            )));
        }
        Ok(DMatrix::from_column_slice(self.n_tau, self.n_macro, h))
    }
}

/// Macro step of `k` loading cycles over `n_cycles` cycles sampled at `n_times` nodes.
pub fn make_grid(n_times: usize, n_cycles: usize, k: usize, cycle_duration: f64) -> Result<MultiTimeGrid> {
    if k == 0 || n_cycles == 0 || n_cycles % k != 0 {
        return Err(Error::Grid(format!("{n_cycles} cycles cannot be split into macro steps of {k} cycles")));
    }
    let n_macro = n_cycles / k;
    if n_times % n_macro != 0 {
        return Err(Error::Grid(format!("{n_times} time nodes cannot be split into {n_macro} macro cells")));
    }
    let n_tau = n_times / n_macro;
    let d_macro = k as f64 * cycle_duration;
    Ok(MultiTimeGrid { n_tau, n_macro, dtau: d_macro / n_tau as f64, d_macro })
}

/// Sub-modes of one time function: `h ≈ sum_j micro[j] ⊗ macro[j]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MultiTimeModes {
    /// Unit-norm micro functions (length `N_tau`).
    pub micro: Vec<DVector<f64>>,
    /// Macro functions carrying the amplitudes (length `N_T`).
    pub macro_: Vec<DVector<f64>>,
    /// Relative residual after 0, 1, ... sub-modes.
    pub residuals: Vec<f64>,
}

impl MultiTimeModes {
    pub fn n_submodes(&self) -> usize {
        self.micro.len()
    }

    pub fn residual(&self) -> f64 {
        *self.residuals.last().unwrap_or(&0.0)
    }

    /// Stored scalars of the separated form.
    pub fn storage(&self) -> usize {
        self.micro.iter().map(|v| v.len()).sum::<usize>() + self.macro_.iter().map(|v| v.len()).sum::<usize>()
    }

    /// Reconstruction from the first `m` sub-modes.
    pub fn truncated(&self, m: usize) -> MultiTimeModes {
        let m = m.min(self.n_submodes());
        MultiTimeModes {
            micro: self.micro[..m].to_vec(),
            macro_: self.macro_[..m].to_vec(),
            residuals: self.residuals[..=m].to_vec(),
        }
    }
}

/// Greedy micro/macro decomposition of `h` down to relative residual `tol`.
pub fn decompose(h: &[f64], grid: &MultiTimeGrid, tol: f64) -> Result<MultiTimeModes> {
    let m = grid.reshape(h)?;
    let d = deflate(&m, tol, grid.n_tau.min(grid.n_macro), PowerIteration { tol: 1e-14, max_iter: 2000 });
    Ok(MultiTimeModes { micro: d.left, macro_: d.right, residuals: d.residuals })
}

pub fn reconstruct(modes: &MultiTimeModes, grid: &MultiTimeGrid) -> Result<Vec<f64>> {
    let mut m = DMatrix::zeros(grid.n_tau, grid.n_macro);
    for (a, b) in modes.micro.iter().zip(&modes.macro_) {
        if a.len() != grid.n_tau || b.len() != grid.n_macro {
            return Err(Error::DimensionMismatch(format!(
                "sub-mode of size {}x{} on a {}x{} grid",
                a.len(),
                b.len(),
                grid.n_tau,
                grid.n_macro
            )));
        }
        m.ger(1.0, a, b, 1.0);
    }
    Ok(m.as_slice().to_vec())
}

/// Decomposes every time function of a separated field.
pub fn decompose_field(time_modes: &[DVector<f64>], grid: &MultiTimeGrid, tol: f64) -> Result<Vec<MultiTimeModes>> {
    time_modes.par_iter().map(|h| decompose(h.as_slice(), grid, tol)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_grids() {
        let g = make_grid(800, 10, 1, 20.0).unwrap();
        assert_eq!((g.n_macro, g.n_tau), (10, 80));
        assert_eq!(g.d_macro, 20.0);
        let g = make_grid(3200, 40, 1, 30.0).unwrap();
        assert_eq!((g.n_macro, g.n_tau), (40, 80));
        let g = make_grid(800, 10, 10, 20.0).unwrap();
        assert_eq!((g.n_macro, g.n_tau), (1, 800));
        assert!(make_grid(800, 10, 3, 20.0).is_err());
        assert!(make_grid(801, 10, 1, 20.0).is_err());
    }

    #[test]
    fn index_round_trip() {
        let g = MultiTimeGrid::from_sizes(7, 5).unwrap();
        let h: Vec<f64> = (0..35).map(|v| v as f64).collect();
        let m = g.reshape(&h).unwrap();
        for t in 0..35 {
            let (i, j) = g.split(t);
            assert_eq!(g.flat(i, j), t);
            assert_eq!(m[(i, j)], h[t]);
        }
    }

    #[test]
    fn periodic_signal_has_one_submode() {
        let g = MultiTimeGrid::from_sizes(16, 6).unwrap();
        let h: Vec<f64> = (0..96).map(|t| ((t % 16) as f64 * 0.7).cos() + 0.3).collect();
        let modes = decompose(&h, &g, 1e-12).unwrap();
        assert_eq!(modes.n_submodes(), 1);
        assert!(modes.residual() < 1e-12);
        let mac = &modes.macro_[0];
        assert!(mac.iter().all(|v| (v - mac[0]).abs() < 1e-12 * mac[0].abs()));
        let back = reconstruct(&modes, &g).unwrap();
        assert!(back.iter().zip(&h).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn length_mismatch() {
        let g = MultiTimeGrid::from_sizes(4, 3).unwrap();
        assert!(decompose(&[0.0; 11], &g, 1e-6).is_err());
    }
}
