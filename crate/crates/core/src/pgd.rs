//! Space-time PGD for the linearized problem `(K ⊗ I_t) : U = F`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::assembly::StiffnessSystem;
use crate::cases::LoadWaveform;
use crate::error::{Error, Result};
use crate::lowrank::{deflate, PowerIteration};
use crate::material::Voigt;
use crate::plasticity::StrainHistory;

/// Rank-`m` separated field `sum_k space[k] ⊗ time[k]` over the free dofs.
///
/// Space modes have unit Euclidean norm; amplitudes live in the time modes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpaceTimeField {
    pub space: Vec<DVector<f64>>,
    pub time: Vec<DVector<f64>>,
    /// Modes accepted without reaching the alternating-direction fixed point.
    pub stagnated: Vec<usize>,
    /// Enrichment stopped at `max_modes` before meeting the mode tolerance.
    pub truncated: bool,
}

impl SpaceTimeField {
    pub fn rank(&self) -> usize {
        self.space.len()
    }

    pub fn to_dense(&self, n_space: usize, n_times: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n_space, n_times);
        for (w, l) in self.space.iter().zip(&self.time) {
            m.ger(1.0, w, l, 1.0);
        }
        m
    }

    /// Frobenius norm computed from the modes without forming the dense field.
    pub fn norm(&self) -> f64 {
        separated_norm(&self.space, &self.time)
    }

    /// `|self - other|_F`, from the modes of both fields.
    pub fn distance(&self, other: &SpaceTimeField) -> f64 {
        let space: Vec<DVector<f64>> = self.space.iter().cloned().chain(other.space.iter().map(|w| -w)).collect();
        let time: Vec<DVector<f64>> = self.time.iter().chain(&other.time).cloned().collect();
        separated_norm(&space, &time)
    }

    /// Total strain history at the Gauss points of `field + lift ⊗ waveform`.
    pub fn strain_history(&self, sys: &StiffnessSystem, waveform: &LoadWaveform) -> StrainHistory {
        let (space_strains, time) = self.strain_modes(sys, waveform);
        let nt = waveform.len();
        let mut data = vec![Voigt::zeros(); sys.n_gauss() * nt];
        data.par_chunks_mut(nt).enumerate().for_each(|(gp, out)| {
            for (eps_k, lam) in space_strains.iter().zip(&time) {
                let e = eps_k[gp];
                if e.iter().all(|v| *v == 0.0) {
                    continue;
                }
                for (o, l) in out.iter_mut().zip(lam.iter()) {
                    *o += e * *l;
                }
            }
        });
        StrainHistory { n_gauss: sys.n_gauss(), n_times: nt, data }
    }

    /// Separated strain representation: Gauss-point strains of each space mode
    /// (lifting first) and the matching time functions.
    pub fn strain_modes(&self, sys: &StiffnessSystem, waveform: &LoadWaveform) -> (Vec<Vec<Voigt>>, Vec<DVector<f64>>) {
        let mut space = vec![sys.gauss_strains(sys.lift.as_slice())];
        let mut time = vec![DVector::from_column_slice(&waveform.values)];
        for (w, l) in self.space.iter().zip(&self.time) {
            space.push(sys.gauss_strains(sys.expand(w.as_slice(), 0.0).as_slice()));
            time.push(l.clone());
        }
        (space, time)
    }
}

/// `|sum_k a_k ⊗ b_k|_F` through thin QR factors of both mode matrices.
pub fn separated_norm(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let ra = DMatrix::from_columns(a).qr().r();
    let rb = DMatrix::from_columns(b).qr().r();
    (ra * rb.transpose()).norm()
}

/// Separated right-hand side `sum_r space[r] ⊗ time[r]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SeparatedRhs {
    pub space: Vec<DVector<f64>>,
    pub time: Vec<DVector<f64>>,
}

impl SeparatedRhs {
    pub fn rank(&self) -> usize {
        self.space.len()
    }

    pub fn push(&mut self, space: DVector<f64>, time: DVector<f64>) {
        self.space.push(space);
        self.time.push(time);
    }

    pub fn extend(&mut self, other: SeparatedRhs) {
        self.space.extend(other.space);
        self.time.extend(other.time);
    }

    pub fn to_dense(&self, n_space: usize, n_times: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n_space, n_times);
        for (f, g) in self.space.iter().zip(&self.time) {
            m.ger(1.0, f, g, 1.0);
        }
        m
    }
}

/// Compresses a dense right-hand side to relative Frobenius accuracy `tol`.
///
/// `max_terms` defaults to `min(rows, cols)`.
pub fn compress_rhs(f: &DMatrix<f64>, tol: f64, max_terms: Option<usize>) -> Result<SeparatedRhs> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidSpec(format!("compression tolerance must lie in (0, 1), got {tol}")));
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::InconsistentState("non-finite right-hand side".into()));
    }
    let max_terms = max_terms.unwrap_or(f.nrows().min(f.ncols()));
    let power = PowerIteration { tol: (tol * 1e-2).max(1e-13), max_iter: 300 };
    let d = deflate(f, tol, max_terms, power);
    if d.residual() > tol {
        return Err(Error::CompressionFailure { residual: d.residual(), tol, terms: d.rank() });
    }
    Ok(SeparatedRhs { space: d.left, time: d.right })
}

#[derive(Clone, Copy, Debug)]
pub struct PgdOptions {
    /// Enrichment stops once a new mode is smaller than `eps_mode` times the first one.
    pub eps_mode: f64,
    pub max_modes: usize,
    /// Alternating-direction sweeps per mode.
    pub max_inner: usize,
    /// Relative change of the time function that ends the sweeps.
    pub inner_tol: f64,
}

impl Default for PgdOptions {
    fn default() -> Self {
        PgdOptions { eps_mode: 1e-8, max_modes: 200, max_inner: 50, inner_tol: 1e-8 }
    }
}

/// Greedy rank-one enrichment with an alternating-direction fixed point per mode.
///
/// The space step `(λ·λ) K w = R λ` uses precomputed `K^{-1} f_r`, so the stored
/// factorization is applied once per right-hand-side term. The time operator is the
/// identity, so the time step is a pointwise division by `wᵀ K w`.
pub fn pgd_solve(sys: &StiffnessSystem, rhs: &SeparatedRhs, opts: &PgdOptions) -> Result<SpaceTimeField> {
    let mut field = SpaceTimeField::default();
    if rhs.rank() == 0 {
        return Ok(field);
    }
    let nf = sys.n_free();
    let nt = rhs.time[0].len();
    for (f, g) in rhs.space.iter().zip(&rhs.time) {
        if f.len() != nf || g.len() != nt {
            return Err(Error::DimensionMismatch(format!(
                "rhs term of size {}x{}, expected {nf}x{nt}",
                f.len(),
                g.len()
            )));
        }
    }
    let solved: Vec<DVector<f64>> = rhs.space.iter().map(|f| sys.solve(f)).collect();

    // right-hand-side terms by decreasing norm: candidates for the initial time function
    let mut order: Vec<usize> = (0..rhs.rank()).collect();
    let term_norm = |r: usize| rhs.space[r].norm() * rhs.time[r].norm();
    order.sort_by(|&a, &b| term_norm(b).total_cmp(&term_norm(a)));

    let mut k_space: Vec<DVector<f64>> = Vec::new();
    let mut first_norm = 0.0;
    while field.rank() < opts.max_modes {
        let candidates = order.iter().map(|&r| rhs.time[r].clone()).chain(field.time.iter().cloned());
        let mut start = None;
        for lam in candidates {
            if let Some(step) = space_step(&lam, rhs, &solved, &field, &k_space) {
                start = Some((lam, step));
                break;
            }
        }
        let Some((mut lam, (mut w, mut kw))) = start else { break };

        let mut converged = false;
        for sweep in 0..opts.max_inner {
            if sweep > 0 {
                match space_step(&lam, rhs, &solved, &field, &k_space) {
                    Some(step) => (w, kw) = step,
                    None => break,
                }
            }
            let lam_new = time_step(&w, &kw, rhs, &field, &k_space);
            let change = (&lam_new - &lam).norm() / lam_new.norm().max(f64::MIN_POSITIVE);
            lam = lam_new;
            if change < opts.inner_tol {
                converged = true;
                break;
            }
        }

        let amp = lam.norm();
        if field.rank() == 0 {
            first_norm = amp;
        }
        if amp == 0.0 || amp < opts.eps_mode * first_norm {
            return Ok(field);
        }
        if !converged {
            log::debug!("PGD mode {} accepted without reaching the ADS fixed point", field.rank() + 1);
            field.stagnated.push(field.rank());
        }
        let imax = w.iamax();
        if w[imax] < 0.0 {
            w = -w;
            kw = -kw;
            lam = -lam;
        }
        field.space.push(w);
        field.time.push(lam);
        k_space.push(kw);
    }
    if field.rank() >= opts.max_modes {
        log::warn!("PGD enrichment truncated at {} modes", opts.max_modes);
        field.truncated = true;
    }
    Ok(field)
}

/// Unit space mode `w ∝ K^{-1} R λ` and `K w`; `None` when `R λ` vanishes.
fn space_step(
    lam: &DVector<f64>,
    rhs: &SeparatedRhs,
    solved: &[DVector<f64>],
    field: &SpaceTimeField,
    k_space: &[DVector<f64>],
) -> Option<(DVector<f64>, DVector<f64>)> {
    let nf = solved[0].len();
    let mut w = DVector::zeros(nf);
    let mut kw = DVector::zeros(nf);
    let mut scale = 0.0;
    for ((y, f), g) in solved.iter().zip(&rhs.space).zip(&rhs.time) {
        let c = g.dot(lam);
        w.axpy(c, y, 1.0);
        kw.axpy(c, f, 1.0);
        scale += c.abs() * y.norm();
    }
    for ((wk, kwk), lk) in field.space.iter().zip(k_space).zip(&field.time) {
        let c = lk.dot(lam);
        w.axpy(-c, wk, 1.0);
        kw.axpy(-c, kwk, 1.0);
        scale += c.abs();
    }
    let n = w.norm();
    if !(n > 1e-13 * scale) {
        return None;
    }
    Some((w / n, kw / n))
}

/// `λ = Rᵀ w / (wᵀ K w)` from the separated residual.
fn time_step(
    w: &DVector<f64>,
    kw: &DVector<f64>,
    rhs: &SeparatedRhs,
    field: &SpaceTimeField,
    k_space: &[DVector<f64>],
) -> DVector<f64> {
    let nt = rhs.time[0].len();
    let mut lam = DVector::zeros(nt);
    for (f, g) in rhs.space.iter().zip(&rhs.time) {
        lam.axpy(w.dot(f), g, 1.0);
    }
    for (kwk, lk) in k_space.iter().zip(&field.time) {
        lam.axpy(-w.dot(kwk), lk, 1.0);
    }
    lam / w.dot(kw)
}

/// Dense displacement history over all dofs: field on the free dofs plus the lifting.
pub fn evaluate_field(field: &SpaceTimeField, sys: &StiffnessSystem, waveform: &LoadWaveform) -> Result<DMatrix<f64>> {
    let nt = waveform.len();
    for (w, l) in field.space.iter().zip(&field.time) {
        if w.len() != sys.n_free() || l.len() != nt {
            return Err(Error::DimensionMismatch(format!(
                "mode of size {}x{}, expected {}x{nt}",
                w.len(),
                l.len(),
                sys.n_free()
            )));
        }
    }
    let free = field.to_dense(sys.n_free(), nt);
    let mut u = DMatrix::zeros(sys.n_dofs, nt);
    let wave = DVector::from_column_slice(&waveform.values);
    u.ger(1.0, &sys.lift, &wave, 0.0);
    for (i, &d) in sys.free_dofs.iter().enumerate() {
        u.row_mut(d).copy_from(&free.row(i));
    }
    Ok(u)
}
