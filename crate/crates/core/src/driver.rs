//! Outer linearization loop: state update, plastic right-hand side, PGD re-solve.

use std::collections::VecDeque;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::assembly::StiffnessSystem;
use crate::cases::LoadWaveform;
use crate::error::Result;
use crate::pgd::{compress_rhs, pgd_solve, PgdOptions, SeparatedRhs, SpaceTimeField};
use crate::plasticity::{history_sweep, plastic_rhs, PlasticState};

#[derive(Clone, Copy, Debug)]
pub struct DriverOptions {
    /// Convergence threshold on the relative change between iterates.
    pub delta: f64,
    pub max_iters: usize,
    /// Under-relaxation of the plastic force, in (0, 1].
    pub relaxation: f64,
    /// Relative accuracy of the compressed plastic right-hand side.
    pub rhs_tol: f64,
    /// Number of previous iterates mixed by Anderson acceleration of the
    /// plastic force. Zero gives the plain fixed-point iteration.
    pub anderson_depth: usize,
    pub pgd: PgdOptions,
    pub store_stress: bool,
}

impl Default for DriverOptions {
    fn default() -> Self {
        DriverOptions {
            delta: 1e-4,
            max_iters: 50,
            relaxation: 1.0,
            rhs_tol: 1e-8,
            anderson_depth: 0,
            pgd: PgdOptions::default(),
            store_stress: false,
        }
    }
}

/// Seconds spent in each phase, summed over iterations.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseTimes {
    pub state_update: f64,
    pub plastic_rhs: f64,
    pub compression: f64,
    pub pgd: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// `e_l` for `l = 1..=L`.
    pub errors: Vec<f64>,
    /// PGD rank `m^(l)` for `l = 0..=L`.
    pub ranks: Vec<usize>,
    /// Rank of the compressed plastic right-hand side per iteration.
    pub rhs_ranks: Vec<usize>,
    pub converged: bool,
    pub diverged: bool,
    pub wall_times: PhaseTimes,
}

pub struct DriverOutput {
    pub field: SpaceTimeField,
    /// State recomputed from the returned field.
    pub state: PlasticState,
    pub report: SolveReport,
}

/// External load of a pure Dirichlet problem: `load_space ⊗ waveform`.
pub fn external_rhs(sys: &StiffnessSystem, waveform: &LoadWaveform) -> SeparatedRhs {
    let mut rhs = SeparatedRhs::default();
    rhs.push(sys.load_space.clone(), DVector::from_column_slice(&waveform.values));
    rhs
}

pub fn solve_elastic(sys: &StiffnessSystem, waveform: &LoadWaveform, opts: &PgdOptions) -> Result<SpaceTimeField> {
    pgd_solve(sys, &external_rhs(sys, waveform), opts)
}

/// Fixed-point iteration on the plastic force until `e_l < delta`.
pub fn run(sys: &StiffnessSystem, waveform: &LoadWaveform, opts: &DriverOptions) -> Result<DriverOutput> {
    let mut report = SolveReport::default();
    let ext = external_rhs(sys, waveform);
    let mut field = pgd_solve(sys, &ext, &opts.pgd)?;
    report.ranks.push(field.rank());
    let mut mixer = Anderson::new(opts.anderson_depth, opts.relaxation);
    let mut growth = 0;

    for l in 1..=opts.max_iters {
        let clock = Instant::now();
        let state = history_sweep(&field.strain_history(sys, waveform), &sys.material, false)?;
        report.wall_times.state_update += clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        let fp = mixer.next(plastic_rhs(&state, sys)?);
        report.wall_times.plastic_rhs += clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        let mut rhs = ext.clone();
        let compressed = compress_rhs(&fp, opts.rhs_tol, None)?;
        report.rhs_ranks.push(compressed.rank());
        rhs.extend(compressed);
        report.wall_times.compression += clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        let next = pgd_solve(sys, &rhs, &opts.pgd)?;
        report.wall_times.pgd += clock.elapsed().as_secs_f64();

        let denom = field.norm();
        let dist = next.distance(&field);
        let e = if dist == 0.0 { 0.0 } else { dist / denom };
        report.errors.push(e);
        report.ranks.push(next.rank());
        report.iterations = l;
        field = next;
        log::info!("iteration {l}: e = {e:.3e}, rank = {}", field.rank());

        if e < opts.delta {
            report.converged = true;
            break;
        }
        if e > 10.0 * report.errors[0] {
            growth += 1;
            if growth >= 3 {
                log::error!("linearization diverged at iteration {l} (e = {e:.3e})");
                report.diverged = true;
                break;
            }
        } else {
            growth = 0;
        }
    }
    let state = history_sweep(&field.strain_history(sys, waveform), &sys.material, opts.store_stress)?;
    Ok(DriverOutput { field, state, report })
}

/// Anderson mixing of the plastic force iterates.
///
/// The input of the fixed-point map is the plastic force used in the last
/// PGD solve and its output is the force recomputed from the resulting state.
/// With depth zero this reduces to `x <- x + beta (g - x)`.
struct Anderson {
    depth: usize,
    beta: f64,
    /// Current input and its residual from the previous call.
    x: Option<DMatrix<f64>>,
    last: Option<(DMatrix<f64>, DMatrix<f64>)>,
    dx: VecDeque<DMatrix<f64>>,
    df: VecDeque<DMatrix<f64>>,
}

impl Anderson {
    fn new(depth: usize, beta: f64) -> Self {
        Anderson { depth, beta, x: None, last: None, dx: VecDeque::new(), df: VecDeque::new() }
    }

    /// Takes the map output for the current input and returns the next input.
    fn next(&mut self, g: DMatrix<f64>) -> DMatrix<f64> {
        // the elastic predictor used a zero plastic force
        let x = self.x.take().unwrap_or_else(|| DMatrix::zeros(g.nrows(), g.ncols()));
        let f = g - &x;
        if self.depth > 0 {
            if let Some((x_old, f_old)) = self.last.take() {
                self.dx.push_back(&x - x_old);
                self.df.push_back(&f - f_old);
                if self.dx.len() > self.depth {
                    self.dx.pop_front();
                    self.df.pop_front();
                }
            }
        }
        let mut out = &x + &f * self.beta;
        let m = self.df.len();
        if m > 0 {
            let gram = DMatrix::from_fn(m, m, |i, j| self.df[i].dot(&self.df[j]));
            let b = DVector::from_fn(m, |i, _| self.df[i].dot(&f));
            let smax = gram.norm();
            if let Ok(gamma) = gram.svd(true, true).solve(&b, 1e-14 * smax) {
                for i in 0..m {
                    out -= (&self.dx[i] + &self.df[i] * self.beta) * gamma[i];
                }
            }
        }
        if self.depth > 0 {
            self.last = Some((x, f));
        }
        self.x = Some(out.clone());
        out
    }
}
