//! Entanglement of frame vectors across a bipartition `d = d_A × d_B`,
//! measured by the purity `Tr ρ_A²` of the reduced states.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{EtfError, Result};
use crate::families::{u16_parametric, ParametricFamily};
use crate::frame::{frame_from_gram, frame_from_gram_cholesky, gram_from_signature, SignatureUnitary, SynthesisMatrix};
use crate::matrix::ComplexMatrix;
use crate::scalar::{modulus_sqr, Scalar};
use crate::solver::projections::seed_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    pub d_a: usize,
    pub d_b: usize,
}

impl Bipartition {
    pub fn new(d_a: usize, d_b: usize) -> Result<Self> {
        if d_a < 1 || d_b < 1 {
            return Err(EtfError::OutOfRange(format!("bipartition {d_a}x{d_b} has an empty factor")));
        }
        Ok(Self { d_a, d_b })
    }

    pub fn dim(&self) -> usize {
        self.d_a * self.d_b
    }

    /// The same split with the roles of A and B exchanged.
    pub fn swapped(&self) -> Self {
        Self { d_a: self.d_b, d_b: self.d_a }
    }
}

impl std::str::FromStr for Bipartition {
    type Err = EtfError;

    /// Parses `AxB`, for example `2x3`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| EtfError::Parse(format!("bipartition '{s}' is not of the form AxB")))?;
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| EtfError::Parse(format!("bad factor '{t}' in '{s}'")));
        Bipartition::new(parse(a)?, parse(b)?)
    }
}

/// How the coordinates of a frame vector are split into `A ⊗ B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum IndexOrder {
    /// Component `i·d_B + k` carries A index `i` and B index `k`.
    #[default]
    AMajor,
    /// Component `k·d_A + i` carries A index `i` and B index `k`.
    BMajor,
}

/// Which rank-d factorisation `G = F†F` supplies the frame vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Factorization {
    /// Leading eigenpairs, [`frame_from_gram`].
    #[default]
    Eigen,
    /// Column-order Cholesky, [`frame_from_gram_cholesky`].
    Cholesky,
}

/// `ρ_A[i, j] = Σ_k ψ[i·d_B + k]·conj(ψ[j·d_B + k])`.
pub fn partial_trace<T: Scalar>(psi: &[num_complex::Complex<T>], bp: Bipartition) -> Result<ComplexMatrix<T>> {
    if psi.len() != bp.dim() {
        return Err(EtfError::DimensionMismatch { expected: format!("length {}", bp.dim()), found: format!("length {}", psi.len()) });
    }
    let norm = psi.iter().fold(T::zero(), |s, z| s + modulus_sqr(*z)).sqrt();
    let deviation = (norm - T::one()).abs();
    if deviation > T::lit(1e-10).max(T::lit(T::INVARIANT_TOL) * T::lit(1e-2)) {
        return Err(EtfError::NotNormalized { column: 0, deviation: deviation.as_f64() });
    }
    let db = bp.d_b;
    Ok(ComplexMatrix::from_fn(bp.d_a, bp.d_a, |i, j| {
        (0..db).fold(crate::scalar::czero(), |s, k| s + psi[i * db + k] * psi[j * db + k].conj())
    }))
}

/// `Tr ρ²` of a hermitian `ρ`, computed as `Σ |ρ_ij|²`.
pub fn purity<T: Scalar>(rho: &ComplexMatrix<T>) -> T {
    rho.as_slice().iter().fold(T::zero(), |s, z| s + modulus_sqr(*z))
}

#[derive(Debug, Clone, Serialize)]
pub struct PurityReport {
    pub bipartition: Bipartition,
    pub order: IndexOrder,
    pub per_vector: Vec<f64>,
    pub average: f64,
    pub argmin: usize,
    pub argmax: usize,
}

fn reorder<T: Scalar>(v: Vec<num_complex::Complex<T>>, bp: Bipartition, order: IndexOrder) -> Vec<num_complex::Complex<T>> {
    match order {
        IndexOrder::AMajor => v,
        IndexOrder::BMajor => (0..bp.dim()).map(|idx| v[(idx % bp.d_b) * bp.d_a + idx / bp.d_b]).collect(),
    }
}

/// Purity of the A-reduction of every frame vector, and their mean.
pub fn average_purity<T: Scalar>(f: &SynthesisMatrix<T>, bp: Bipartition) -> Result<PurityReport> {
    average_purity_with(f, bp, IndexOrder::AMajor)
}

pub fn average_purity_with<T: Scalar>(f: &SynthesisMatrix<T>, bp: Bipartition, order: IndexOrder) -> Result<PurityReport> {
    if f.d() != bp.dim() {
        return Err(EtfError::DimensionMismatch { expected: format!("frame dimension {}", bp.dim()), found: format!("{}", f.d()) });
    }
    // frame vectors are unit norm to the synthesis tolerance; rescale exactly
    let per_vector = (0..f.n())
        .map(|j| {
            let mut psi = reorder(f.vector(j), bp, order);
            let norm = psi.iter().fold(T::zero(), |s, z| s + modulus_sqr(*z)).sqrt();
            psi.iter_mut().for_each(|z| *z = *z / norm);
            Ok(purity(&partial_trace(&psi, bp)?).as_f64())
        })
        .collect::<Result<Vec<f64>>>()?;
    let average = per_vector.iter().sum::<f64>() / per_vector.len() as f64;
    let argmin = (0..per_vector.len()).fold(0, |b, j| if per_vector[j] < per_vector[b] { j } else { b });
    let argmax = (0..per_vector.len()).fold(0, |b, j| if per_vector[j] > per_vector[b] { j } else { b });
    Ok(PurityReport { bipartition: bp, order, per_vector, average, argmin, argmax })
}

/// `(d_A + d_B)/(d_A·d_B + 1)`, the average reduced purity of any SIC in
/// dimension `d_A·d_B`.
pub fn sic_average_purity(bp: Bipartition) -> f64 {
    (bp.d_a + bp.d_b) as f64 / (bp.dim() + 1) as f64
}

/// Synthesis matrix of the ETF(d, N) encoded by a signature.
pub fn signature_frame<T: Scalar>(u: &SignatureUnitary<T>, d: usize, factorization: Factorization) -> Result<SynthesisMatrix<T>> {
    let g = gram_from_signature(u, d)?;
    match factorization {
        Factorization::Eigen => frame_from_gram(&g),
        Factorization::Cholesky => frame_from_gram_cholesky(&g),
    }
}

/// A map from real parameters to frames.
pub trait FrameFamily: Sync {
    fn num_parameters(&self) -> usize;
    fn frame(&self, params: &[f64]) -> Result<SynthesisMatrix<f64>>;
}

/// Frames of a parametric signature family with fixed `d`.
pub struct SignatureFamily {
    pub family: ParametricFamily<f64>,
    pub d: usize,
    pub factorization: Factorization,
}

impl SignatureFamily {
    /// The ETF(6, 16) family from [`u16_parametric`].
    pub fn u16(factorization: Factorization) -> Self {
        Self { family: u16_parametric(), d: 6, factorization }
    }
}

impl FrameFamily for SignatureFamily {
    fn num_parameters(&self) -> usize {
        self.family.num_parameters()
    }

    fn frame(&self, params: &[f64]) -> Result<SynthesisMatrix<f64>> {
        let m = self.family.evaluate(params)?;
        let u = SignatureUnitary::new(m, 1e-8)?;
        signature_frame(&u, self.d, self.factorization)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub master_seed: u64,
    /// Nelder–Mead iterations per restart.
    pub max_iters: u64,
    /// Stop when the standard deviation of the simplex values falls below this.
    pub f_tol: f64,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    pub order: IndexOrder,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { restarts: 100, master_seed: 0, max_iters: 4000, f_tol: 1e-10, initial_step: 0.5, order: IndexOrder::AMajor }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizationResult {
    pub mode: Mode,
    pub params: Vec<f64>,
    pub value: f64,
    pub restart_index: usize,
    pub restarts: usize,
    pub per_restart: Vec<f64>,
}

struct Objective<'a, F: FrameFamily> {
    family: &'a F,
    bp: Bipartition,
    order: IndexOrder,
    sign: f64,
    /// First evaluation failure; the optimizer sees `+∞` instead.
    failure: std::sync::Mutex<Option<EtfError>>,
}

impl<F: FrameFamily> Objective<'_, F> {
    fn value(&self, params: &[f64]) -> Result<f64> {
        let frame = self.family.frame(params).map_err(|e| EtfError::FamilyEvaluation { params: params.to_vec(), reason: e.to_string() })?;
        Ok(average_purity_with(&frame, self.bp, self.order)?.average)
    }
}

impl<F: FrameFamily> CostFunction for Objective<'_, F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        match self.value(p) {
            Ok(v) => Ok(self.sign * v),
            Err(e) => {
                let mut slot = self.failure.lock().expect("failure slot");
                slot.get_or_insert(e);
                Ok(f64::INFINITY)
            }
        }
    }
}

/// Multi-start Nelder–Mead on the average purity over `[0, 2π)^p`. Restart
/// `r` starts from a point drawn from the random stream `r` of
/// `master_seed`; the best restart wins, ties going to the lower index.
pub fn optimize_average_purity<F: FrameFamily>(
    family: &F,
    bp: Bipartition,
    mode: Mode,
    config: &OptimizerConfig,
) -> Result<OptimizationResult> {
    if config.restarts < 1 {
        return Err(EtfError::OutOfRange("at least one restart is required".into()));
    }
    let p = family.num_parameters();
    let sign = match mode {
        Mode::Min => 1.0,
        Mode::Max => -1.0,
    };
    let objective = Objective { family, bp, order: config.order, sign, failure: Default::default() };
    let runs: Vec<(Vec<f64>, f64)> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed_rng(config.master_seed, r as u64);
            let start: Vec<f64> = (0..p).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
            if p == 0 {
                let v = objective.value(&start)?;
                return Ok((start, v));
            }
            let mut simplex = vec![start.clone()];
            for i in 0..p {
                let mut vertex = start.clone();
                vertex[i] += config.initial_step;
                simplex.push(vertex);
            }
            let solver = NelderMead::new(simplex)
                .with_sd_tolerance(config.f_tol)
                .map_err(|e| EtfError::Optimizer(e.to_string()))?;
            let result = Executor::new(Objective { family, bp, order: config.order, sign, failure: Default::default() }, solver)
                .configure(|state| state.max_iters(config.max_iters))
                .run()
                .map_err(|e| EtfError::Optimizer(e.to_string()))?;
            if let Some(failure) = result.problem.problem.as_ref().and_then(|o| o.failure.lock().expect("failure slot").take()) {
                return Err(failure);
            }
            let state = result.state();
            let params = state.get_best_param().cloned().unwrap_or(start);
            let value = objective.value(&params)?;
            Ok((params, value))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (r, run) in runs.iter().enumerate() {
        if sign * run.1 < sign * runs[best].1 {
            best = r;
        }
    }
    Ok(OptimizationResult {
        mode,
        params: runs[best].0.clone(),
        value: runs[best].1,
        restart_index: best,
        restarts: config.restarts,
        per_restart: runs.iter().map(|r| r.1).collect(),
    })
}
