//! Alternating projections towards a hermitian unitary with prescribed
//! entry moduli and constant diagonal.
//!
//! One cycle maps the iterate `A` through
//! [`impose_moduli`] → [`hermitize_and_fix_diagonal`] →
//! [`orthonormalize_columns`] and then measures the residual. A seed whose
//! residual drops below [`PolishConfig::threshold`] is handed to a
//! Levenberg–Marquardt refinement on the frame equations (see [`polish`]);
//! every signature the solver returns is checked against the full set of
//! signature invariants first.

pub mod polish;
pub mod projections;
pub mod scan;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{EtfError, Result};
use crate::frame::{bistochastic_from_cos, naimark_complement, FrameSpec, SignatureUnitary};
use crate::matrix::ComplexMatrix;
use crate::scalar::Scalar;

pub use polish::PolishConfig;
pub use projections::{
    hermitize_and_fix_diagonal, impose_moduli, iteration_residual, orthonormalize_columns, seed_matrix, seed_rng,
};
pub use scan::{scan, scan_to_csv, ExistenceRecord};

use projections::{hermitize_in_place, impose_moduli_in_place, orthonormalize_in_place, residual_against};

/// Seeds are dispatched in fixed-size batches; the winner is chosen within
/// the first batch that contains a convergent seed.
pub const SEED_BATCH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub tol: f64,
    pub seeds: usize,
    pub master_seed: u64,
    pub real_mode: bool,
    pub stall_window: usize,
    pub stall_epsilon: f64,
    pub polish: PolishConfig,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            tol: 1e-10,
            seeds: 1000,
            master_seed: 0,
            real_mode: false,
            stall_window: 500,
            stall_epsilon: 1e-14,
            polish: PolishConfig::default(),
            threads: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(EtfError::OutOfRange("max_iters must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(EtfError::OutOfRange("tol must be positive".into()));
        }
        if self.seeds < 1 {
            return Err(EtfError::OutOfRange("seeds must be at least 1".into()));
        }
        if self.stall_window < 2 {
            return Err(EtfError::OutOfRange("stall_window must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverStatus {
    Converged,
    Oscillating,
    Exhausted,
}

/// How a single seed ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeedOutcome {
    Converged,
    /// Residual range over the stall window fell below `stall_epsilon`.
    Oscillating,
    MaxIterations,
    RankDeficient,
    /// Residual reached `tol` but the candidate failed signature validation.
    Rejected,
}

#[derive(Debug, Clone)]
pub struct SeedRun<T: Scalar> {
    pub index: usize,
    pub outcome: SeedOutcome,
    pub residual_history: Vec<f64>,
    pub final_residual: f64,
    pub best_residual: f64,
    pub polished: bool,
    pub signature: Option<SignatureUnitary<T>>,
}

impl<T: Scalar> SeedRun<T> {
    pub fn iterations(&self) -> usize {
        self.residual_history.len()
    }
}

/// Seed outcome counts over the seeds that were consulted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedTally {
    pub converged: usize,
    pub oscillating: usize,
    pub max_iterations: usize,
    pub rank_deficient: usize,
    pub rejected: usize,
}

impl SeedTally {
    fn record(&mut self, outcome: SeedOutcome) {
        match outcome {
            SeedOutcome::Converged => self.converged += 1,
            SeedOutcome::Oscillating => self.oscillating += 1,
            SeedOutcome::MaxIterations => self.max_iterations += 1,
            SeedOutcome::RankDeficient => self.rank_deficient += 1,
            SeedOutcome::Rejected => self.rejected += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.converged + self.oscillating + self.max_iterations + self.rank_deficient + self.rejected
    }
}

#[derive(Debug, Clone)]
pub struct SolverResult<T: Scalar> {
    /// `Converged` or `Exhausted` for multi-seed runs; a single-seed run
    /// reports `Oscillating` when its only seed stalled.
    pub status: SolverStatus,
    pub signature: Option<SignatureUnitary<T>>,
    /// Residual after each cycle of the winning seed, or of the seed that
    /// came closest when nothing converged.
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    pub winning_seed_index: Option<usize>,
    pub final_residual: f64,
    pub best_residual: f64,
    pub seeds_used: usize,
    pub tally: SeedTally,
    pub polished: bool,
    /// The search ran on the Naimark complement and the signature was negated.
    pub via_complement: bool,
}

/// Precomputed per-(d, N) data shared by every seed.
struct Target<T: Scalar> {
    n: usize,
    d: usize,
    cos_theta: T,
    moduli_sq: Vec<T>,
    moduli: Vec<T>,
}

impl<T: Scalar> Target<T> {
    fn new(spec: &FrameSpec<T>) -> Self {
        let cos_theta = spec.cos_theta();
        let b = bistochastic_from_cos(spec.n, cos_theta);
        let moduli_sq: Vec<T> = b.as_slice().iter().map(|z| z.re).collect();
        let moduli = moduli_sq.iter().map(|v| v.max(T::zero()).sqrt()).collect();
        Self { n: spec.n, d: spec.d, cos_theta, moduli_sq, moduli }
    }
}

fn stalled(history: &[f64], window: usize, epsilon: f64) -> bool {
    if history.len() < window {
        return false;
    }
    let tail = &history[history.len() - window..];
    let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    hi - lo < epsilon
}

fn accept<T: Scalar>(matrix: ComplexMatrix<T>, target: &Target<T>, tol: T) -> Option<(SignatureUnitary<T>, T)> {
    let residual = residual_against(&matrix, &target.moduli_sq, target.cos_theta);
    if !(residual <= tol) {
        return None;
    }
    let u = SignatureUnitary::new(matrix, tol).ok()?;
    (u.dimension() == target.d).then_some((u, residual))
}

fn run_seed<T: Scalar>(target: &Target<T>, config: &SolverConfig, index: usize) -> SeedRun<T> {
    let tol = T::lit(config.tol);
    let mut rng = seed_rng(config.master_seed, index as u64);
    let mut a: ComplexMatrix<T> = seed_matrix(target.n, config.real_mode, &mut rng);
    let mut work = Vec::new();
    let mut history = Vec::with_capacity(config.max_iters.min(4096));
    let mut best = f64::INFINITY;
    let mut polish_at = config.polish.threshold;
    let finish = |outcome, history: Vec<f64>, best, signature: Option<(SignatureUnitary<T>, T)>, polished| {
        let final_residual = match &signature {
            Some((_, r)) => r.as_f64(),
            None => history.last().copied().unwrap_or(f64::INFINITY),
        };
        SeedRun {
            index,
            outcome,
            residual_history: history,
            final_residual,
            best_residual: best,
            polished,
            signature: signature.map(|(u, _)| u),
        }
    };
    for _ in 0..config.max_iters {
        impose_moduli_in_place(&mut a, &target.moduli);
        hermitize_in_place(&mut a, target.cos_theta);
        if orthonormalize_in_place(&mut a, &mut work).is_err() {
            return finish(SeedOutcome::RankDeficient, history, best, None, false);
        }
        let r = residual_against(&a, &target.moduli_sq, target.cos_theta).as_f64();
        history.push(r);
        best = best.min(r);
        if r <= config.tol {
            return match accept(a, target, tol) {
                Some(found) => finish(SeedOutcome::Converged, history, best, Some(found), false),
                None => finish(SeedOutcome::Rejected, history, best, None, false),
            };
        }
        if polish_at > 0.0 && r <= polish_at {
            let refined = polish::polish_signature(
                &a,
                target.cos_theta,
                target.d,
                config.real_mode,
                config.polish.max_iters,
                T::lit(config.tol * 1e-3),
            );
            if let Some(found) = refined.and_then(|u| accept(u, target, tol)) {
                best = best.min(found.1.as_f64());
                return finish(SeedOutcome::Converged, history, best, Some(found), true);
            }
            polish_at = r * 0.1;
        }
        if stalled(&history, config.stall_window, config.stall_epsilon) {
            return finish(SeedOutcome::Oscillating, history, best, None, false);
        }
    }
    finish(SeedOutcome::MaxIterations, history, best, None, false)
}

/// Runs a single seed of the search for `spec` (no complement switch).
pub fn solve_seed<T: Scalar>(spec: &FrameSpec<T>, config: &SolverConfig, seed_index: usize) -> Result<SeedRun<T>> {
    config.validate()?;
    Ok(run_seed(&Target::new(spec), config, seed_index))
}

/// Multi-seed search for the signature unitary of `spec`.
///
/// Targets with `d > N/2` are solved through the complement ETF(N − d, N)
/// and the resulting signature is negated.
pub fn solve_signature<T: Scalar>(spec: &FrameSpec<T>, config: &SolverConfig) -> Result<SolverResult<T>> {
    config.validate()?;
    if spec.d < 1 || spec.d >= spec.n {
        return Err(EtfError::InvalidParameters { d: spec.d, n: spec.n, reason: "requires 1 <= d < n".into() });
    }
    if spec.is_above_midpoint() {
        let mut result = solve_direct(&spec.complement()?, config)?;
        result.signature = result.signature.map(|u| naimark_complement(&u));
        result.via_complement = true;
        return Ok(result);
    }
    solve_direct(spec, config)
}

fn solve_direct<T: Scalar>(spec: &FrameSpec<T>, config: &SolverConfig) -> Result<SolverResult<T>> {
    let target = Target::new(spec);
    let pool = match config.threads {
        Some(k) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| EtfError::OutOfRange(format!("thread pool: {e}")))?,
        ),
        None => None,
    };
    let run_batch = |range: std::ops::Range<usize>| -> Vec<SeedRun<T>> {
        let job = || range.clone().into_par_iter().map(|i| run_seed(&target, config, i)).collect::<Vec<_>>();
        match &pool {
            Some(p) => p.install(job),
            None => job(),
        }
    };

    let mut tally = SeedTally::default();
    let mut closest: Option<SeedRun<T>> = None;
    let mut start = 0;
    while start < config.seeds {
        let end = (start + SEED_BATCH).min(config.seeds);
        for run in run_batch(start..end) {
            tally.record(run.outcome);
            if run.outcome == SeedOutcome::Converged {
                let polished = run.polished;
                return Ok(SolverResult {
                    status: SolverStatus::Converged,
                    iterations: run.iterations(),
                    winning_seed_index: Some(run.index),
                    final_residual: run.final_residual,
                    best_residual: run.best_residual.min(closest.as_ref().map_or(f64::INFINITY, |c| c.best_residual)),
                    seeds_used: run.index + 1,
                    signature: run.signature,
                    residual_history: run.residual_history,
                    tally,
                    polished,
                    via_complement: false,
                });
            }
            if closest.as_ref().is_none_or(|c| run.best_residual < c.best_residual) {
                closest = Some(run);
            }
        }
        start = end;
    }
    let closest = closest.expect("at least one seed ran");
    let status = if config.seeds == 1 && closest.outcome == SeedOutcome::Oscillating {
        SolverStatus::Oscillating
    } else {
        SolverStatus::Exhausted
    };
    Ok(SolverResult {
        status,
        signature: None,
        iterations: closest.iterations(),
        winning_seed_index: None,
        final_residual: closest.final_residual,
        best_residual: closest.best_residual,
        seeds_used: config.seeds,
        residual_history: closest.residual_history,
        tally,
        polished: false,
        via_complement: false,
    })
}

/// Result of the plain unistochastic iteration (moduli and Gram–Schmidt only).
#[derive(Debug, Clone)]
pub struct UnistochasticResult<T: Scalar> {
    pub unitary: Option<ComplexMatrix<T>>,
    pub residual_history: Vec<f64>,
    pub winning_seed_index: Option<usize>,
}

/// Searches for a unitary whose squared moduli equal the bistochastic `b`,
/// alternating [`impose_moduli`] and [`orthonormalize_columns`] only.
pub fn solve_unistochastic<T: Scalar>(b: &ComplexMatrix<T>, config: &SolverConfig) -> Result<UnistochasticResult<T>> {
    config.validate()?;
    if !b.is_square() {
        return Err(EtfError::DimensionMismatch { expected: format!("{0}x{0}", b.rows()), found: format!("{}x{}", b.rows(), b.cols()) });
    }
    let n = b.rows();
    let moduli_sq: Vec<T> = b.as_slice().iter().map(|z| z.re).collect();
    let moduli: Vec<T> = moduli_sq.iter().map(|v| v.max(T::zero()).sqrt()).collect();
    let mut last_history = Vec::new();
    let mut work = Vec::new();
    for index in 0..config.seeds {
        let mut rng = seed_rng(config.master_seed, index as u64);
        let mut a: ComplexMatrix<T> = seed_matrix(n, config.real_mode, &mut rng);
        let mut history = Vec::new();
        for _ in 0..config.max_iters {
            impose_moduli_in_place(&mut a, &moduli);
            if orthonormalize_in_place(&mut a, &mut work).is_err() {
                break;
            }
            let r = a
                .as_slice()
                .iter()
                .zip(&moduli_sq)
                .fold(T::zero(), |m, (z, t)| m.max((z.norm_sqr() - *t).abs()))
                .as_f64();
            history.push(r);
            if r <= config.tol {
                return Ok(UnistochasticResult { unitary: Some(a), residual_history: history, winning_seed_index: Some(index) });
            }
            if stalled(&history, config.stall_window, config.stall_epsilon) {
                break;
            }
        }
        last_history = history;
    }
    Ok(UnistochasticResult { unitary: None, residual_history: last_history, winning_seed_index: None })
}
