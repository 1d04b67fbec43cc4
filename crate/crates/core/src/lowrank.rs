//! Greedy rank-one deflation of dense matrices by alternating power iteration.

use nalgebra::{DMatrix, DVector};

/// Stopping rules of the inner power iteration.
#[derive(Clone, Copy, Debug)]
pub struct PowerIteration {
    /// Relative change of the normalized right vector between sweeps.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerIteration {
    fn default() -> Self {
        PowerIteration { tol: 1e-12, max_iter: 500 }
    }
}

/// Sum of rank-one terms `left[k] * right[k]^T`, each `left[k]` of unit norm.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Deflation {
    pub left: Vec<DVector<f64>>,
    pub right: Vec<DVector<f64>>,
    /// Relative Frobenius residual after 0, 1, ... terms.
    pub residuals: Vec<f64>,
}

impl Deflation {
    pub fn rank(&self) -> usize {
        self.left.len()
    }

    pub fn residual(&self) -> f64 {
        *self.residuals.last().unwrap_or(&0.0)
    }

    pub fn to_dense(&self, nrows: usize, ncols: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(nrows, ncols);
        for (a, b) in self.left.iter().zip(&self.right) {
            m.ger(1.0, a, b, 1.0);
        }
        m
    }
}

/// Greedy deflation until `|M - sum| <= tol |M|` (Frobenius) or `max_terms` terms.
///
/// Each term is the least-squares fit `a = R b / |b|^2` of the current residual `R`
/// for the right vector `b` returned by the power iteration; it removes the
/// direction `b` from the row space of `R`, so the rank of the residual drops by one
/// per term whether or not the power iteration converged.
pub fn deflate(m: &DMatrix<f64>, tol: f64, max_terms: usize, power: PowerIteration) -> Deflation {
    let norm0 = m.norm();
    let mut out = Deflation { residuals: vec![if norm0 > 0.0 { 1.0 } else { 0.0 }], ..Default::default() };
    if norm0 == 0.0 {
        return out;
    }
    let mut r = m.clone();
    while out.rank() < max_terms && out.residual() > tol {
        let Some((a, b)) = dominant_pair(&r, power) else { break };
        r.ger(-1.0, &a, &b, 1.0);
        let (a, b) = normalize(a, b);
        out.left.push(a);
        out.right.push(b);
        out.residuals.push(r.norm() / norm0);
    }
    out
}

/// Dominant rank-one pair `(a, b)` of `r` with `a = r b / |b|^2`; `None` if `r = 0`.
pub fn dominant_pair(r: &DMatrix<f64>, power: PowerIteration) -> Option<(DVector<f64>, DVector<f64>)> {
    let (jmax, cmax) = r
        .column_iter()
        .map(|c| c.norm_squared())
        .enumerate()
        .fold((0, 0.0), |best, (j, n)| if n > best.1 { (j, n) } else { best });
    if cmax == 0.0 {
        return None;
    }
    let mut b = r.tr_mul(&r.column(jmax));
    let mut bn = b.norm();
    if bn == 0.0 {
        return None;
    }
    b /= bn;
    for _ in 0..power.max_iter {
        let a = r * &b;
        let mut b_new = r.tr_mul(&a);
        bn = b_new.norm();
        if bn == 0.0 {
            break;
        }
        b_new /= bn;
        let change = (&b_new - &b).norm();
        b = b_new;
        if change <= power.tol {
            break;
        }
    }
    let a = r * &b;
    if a.norm() == 0.0 {
        return None;
    }
    Some((a, b))
}

/// Moves the amplitude to the right vector; the largest entry of `a` is made positive.
fn normalize(a: DVector<f64>, b: DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let na = a.norm();
    let imax = a.iamax();
    let s = if a[imax] < 0.0 { -1.0 } else { 1.0 };
    (a * (s / na), b * (s * na))
}
