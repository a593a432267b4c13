//! Equiangular tight frames and the hermitian unitaries that encode them.
//!
//! An ETF(d, N) is described equivalently by
//!
//! * its synthesis matrix `F` (d×N, unit-norm columns, `(d/N)·F F† = I`),
//! * its Gram matrix `G = F†F` (unit diagonal, off-diagonal modulus `1/α`,
//!   spectrum `{0, N/d}`),
//! * its signature unitary `U = I − (2d/N)·G`, hermitian and unitary with
//!   constant diagonal `cos θ` where `d = N·sin²(θ/2)`.
//!
//! The squared moduli of `U` form the bistochastic target
//! [`target_bistochastic`], which is what the solver searches against.

use serde::Serialize;

use crate::error::{EtfError, Result};
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues};
use crate::matrix::ComplexMatrix;
use crate::scalar::{creal, modulus, modulus_sqr, Scalar};

/// Inverse coherence `α = sqrt(d(N−1)/(N−d))`; the pairwise overlap of an
/// ETF(d, N) is `1/α`.
pub fn welch_bound<T: Scalar>(d: usize, n: usize) -> Result<T> {
    check_dn(d, n)?;
    let (d, n) = (T::from_usize_lossy(d), T::from_usize_lossy(n));
    Ok((d * (n - T::one()) / (n - d)).sqrt())
}

/// `k = (N − 2d)/2 · sqrt((N − 1)/(d(N − d)))`, equal to `cot θ · sqrt(N − 1)`.
pub fn k_parameter<T: Scalar>(d: usize, n: usize) -> Result<T> {
    check_dn(d, n)?;
    let (dt, nt) = (T::from_usize_lossy(d), T::from_usize_lossy(n));
    let two = T::lit(2.0);
    Ok((nt - two * dt) / two * ((nt - T::one()) / (dt * (nt - dt))).sqrt())
}

fn check_dn(d: usize, n: usize) -> Result<()> {
    if d < 1 || d >= n {
        return Err(EtfError::InvalidParameters { d, n, reason: "requires 1 <= d < n".into() });
    }
    Ok(())
}

/// Parameter bundle tying an ETF(d, N) to its unistochastic target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrameSpec<T: Scalar> {
    pub n: usize,
    pub d: usize,
    /// `θ = 2·arcsin(sqrt(d/N))`, in `(0, π)`; above `π/2` exactly when `d > N/2`.
    pub theta: T,
    pub alpha: T,
    pub k: T,
    pub real_mode: bool,
}

pub fn spec_from_dn<T: Scalar>(d: usize, n: usize, real_mode: bool) -> Result<FrameSpec<T>> {
    let alpha = welch_bound(d, n)?;
    let k = k_parameter(d, n)?;
    let ratio = T::from_usize_lossy(d) / T::from_usize_lossy(n);
    let theta = T::lit(2.0) * ratio.sqrt().asin();
    Ok(FrameSpec { n, d, theta, alpha, k, real_mode })
}

impl<T: Scalar> FrameSpec<T> {
    /// `cos θ = 1 − 2d/N`, computed without trigonometry.
    pub fn cos_theta(&self) -> T {
        T::one() - T::lit(2.0) * T::from_usize_lossy(self.d) / T::from_usize_lossy(self.n)
    }

    /// The spec of the Naimark complement ETF(N − d, N).
    pub fn complement(&self) -> Result<FrameSpec<T>> {
        spec_from_dn(self.n - self.d, self.n, self.real_mode)
    }

    pub fn is_above_midpoint(&self) -> bool {
        2 * self.d > self.n
    }

    /// Checks `d = N sin²(θ/2)`, the Welch bound and the k formula.
    pub fn check_invariants(&self, tol: T) -> Result<()> {
        let (d, n) = (T::from_usize_lossy(self.d), T::from_usize_lossy(self.n));
        let half_sin = (self.theta / T::lit(2.0)).sin();
        let mut failures = Vec::new();
        if (n * half_sin * half_sin - d).abs() > tol {
            failures.push("d != N sin^2(theta/2)".to_string());
        }
        if (self.alpha * self.alpha - d * (n - T::one()) / (n - d)).abs() > tol {
            failures.push("alpha^2 != d(N-1)/(N-d)".to_string());
        }
        let k = k_parameter::<T>(self.d, self.n)?;
        if (self.k - k).abs() > tol {
            failures.push("k mismatch".to_string());
        }
        if failures.is_empty() {
            Ok(())
        } else {
            Err(EtfError::InvalidParameters { d: self.d, n: self.n, reason: failures.join(", ") })
        }
    }
}

/// `B_N(θ)`: `cos²θ` on the diagonal and `sin²θ/(N−1)` elsewhere.
pub fn target_bistochastic<T: Scalar>(n: usize, theta: T) -> Result<ComplexMatrix<T>> {
    if n < 2 {
        return Err(EtfError::OutOfRange(format!("target size {n} must be at least 2")));
    }
    if theta < T::zero() || theta > T::frac_pi_2() + T::default_epsilon() {
        return Err(EtfError::OutOfRange(format!("theta = {theta} outside [0, pi/2]")));
    }
    Ok(bistochastic_from_cos(n, theta.cos()))
}

/// Same as [`target_bistochastic`] but parametrised by `cos θ` directly, so
/// exact rationals such as `1 − 2d/N` do not pass through `acos`.
pub(crate) fn bistochastic_from_cos<T: Scalar>(n: usize, cos_theta: T) -> ComplexMatrix<T> {
    let diag = cos_theta * cos_theta;
    let off = (T::one() - diag) / T::from_usize_lossy(n - 1);
    ComplexMatrix::from_real_fn(n, n, |i, j| if i == j { diag } else { off })
}

/// Measured deviations of a matrix from the signature-unitary conditions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SignatureCheck {
    pub hermiticity: f64,
    pub unitarity: f64,
    pub diagonal: f64,
    pub off_diagonal_moduli: f64,
}

impl SignatureCheck {
    pub fn measure<T: Scalar>(matrix: &ComplexMatrix<T>, cos_theta: T) -> Self {
        let n = matrix.rows();
        let off_target = if n > 1 {
            (T::one() - cos_theta * cos_theta) / T::from_usize_lossy(n - 1)
        } else {
            T::zero()
        };
        let mut diagonal = T::zero();
        let mut moduli = T::zero();
        for i in 0..n {
            for j in 0..n {
                let z = matrix[(i, j)];
                if i == j {
                    diagonal = diagonal.max(modulus(z - creal(cos_theta)));
                } else {
                    moduli = moduli.max((modulus_sqr(z) - off_target).abs());
                }
            }
        }
        Self {
            hermiticity: matrix.hermiticity_deviation().as_f64(),
            unitarity: matrix.unitarity_deviation().as_f64(),
            diagonal: diagonal.as_f64(),
            off_diagonal_moduli: moduli.as_f64(),
        }
    }

    pub fn worst(&self) -> f64 {
        self.hermiticity.max(self.unitarity).max(self.diagonal).max(self.off_diagonal_moduli)
    }

    pub fn failures(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (name, value) in [
            ("hermiticity", self.hermiticity),
            ("unitarity", self.unitarity),
            ("constant diagonal", self.diagonal),
            ("off-diagonal moduli", self.off_diagonal_moduli),
        ] {
            if !(value <= tol) {
                out.push(format!("{name} deviation {value:e} > {tol:e}"));
            }
        }
        out
    }
}

/// Hermitian unitary with constant diagonal `cos θ`; the matrix `U_N(θ)`
/// whose squared moduli are `B_N(θ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SignatureUnitary<T: Scalar> {
    theta: T,
    matrix: ComplexMatrix<T>,
}

impl<T: Scalar> SignatureUnitary<T> {
    /// Validates `matrix` at `tol`, inferring `θ` from the mean diagonal.
    pub fn new(matrix: ComplexMatrix<T>, tol: T) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() == 0 {
            return Err(EtfError::InvalidSignature(vec![format!(
                "shape {}x{} is not square",
                matrix.rows(),
                matrix.cols()
            )]));
        }
        let n = matrix.rows();
        let mean = matrix.diagonal().iter().fold(T::zero(), |s, z| s + z.re) / T::from_usize_lossy(n);
        let cos_theta = mean.max(-T::one()).min(T::one());
        let check = SignatureCheck::measure(&matrix, cos_theta);
        let failures = check.failures(tol.as_f64());
        if !failures.is_empty() {
            return Err(EtfError::InvalidSignature(failures));
        }
        Ok(Self { theta: cos_theta.acos(), matrix })
    }

    pub fn with_default_tol(matrix: ComplexMatrix<T>) -> Result<Self> {
        Self::new(matrix, T::lit(T::INVARIANT_TOL))
    }

    /// Wraps a matrix known to be valid by construction.
    pub(crate) fn from_parts(theta: T, matrix: ComplexMatrix<T>) -> Self {
        Self { theta, matrix }
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn cos_theta(&self) -> T {
        self.theta.cos()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    /// `N·sin²(θ/2)`, the frame dimension this signature encodes.
    pub fn implied_dimension(&self) -> T {
        let s = (self.theta / T::lit(2.0)).sin();
        T::from_usize_lossy(self.n()) * s * s
    }

    /// The nearest integer to [`Self::implied_dimension`].
    pub fn dimension(&self) -> usize {
        self.implied_dimension().round().as_f64() as usize
    }

    pub fn check(&self) -> SignatureCheck {
        SignatureCheck::measure(&self.matrix, self.cos_theta())
    }
}

/// Gram matrix of an ETF(d, N).
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix<T: Scalar> {
    d: usize,
    matrix: ComplexMatrix<T>,
}

impl<T: Scalar> GramMatrix<T> {
    /// Validates unit diagonal, hermiticity, equiangularity and the spectrum
    /// at the scalar type's default tolerances.
    pub fn new(matrix: ComplexMatrix<T>, d: usize) -> Result<Self> {
        let report = verify_etf(EtfCandidate::Gram { matrix: &matrix, d }, T::lit(T::INVARIANT_TOL));
        if !report.pass {
            return Err(EtfError::InvalidGram(report.failures()));
        }
        Ok(Self { d, matrix })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }
}

/// d×N matrix whose columns are the frame vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisMatrix<T: Scalar> {
    matrix: ComplexMatrix<T>,
}

impl<T: Scalar> SynthesisMatrix<T> {
    /// Validates unit-norm columns and the tight-frame identity.
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        let tol = T::lit(T::INVARIANT_TOL);
        let mut failures = Vec::new();
        let norm_dev = max_column_norm_deviation(&matrix);
        if norm_dev > tol {
            failures.push(format!("column norm deviation {norm_dev}"));
        }
        let tight = tight_frame_deviation(&matrix);
        if tight > tol {
            failures.push(format!("tight-frame deviation {tight}"));
        }
        if failures.is_empty() {
            Ok(Self { matrix })
        } else {
            Err(EtfError::InvalidSynthesis(failures))
        }
    }

    pub fn d(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n(&self) -> usize {
        self.matrix.cols()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn vector(&self, j: usize) -> Vec<num_complex::Complex<T>> {
        self.matrix.column(j)
    }
}

fn max_column_norm_deviation<T: Scalar>(f: &ComplexMatrix<T>) -> T {
    (0..f.cols())
        .map(|j| {
            let norm_sq = (0..f.rows()).fold(T::zero(), |s, i| s + modulus_sqr(f[(i, j)]));
            (norm_sq.sqrt() - T::one()).abs()
        })
        .fold(T::zero(), |m, x| m.max(x))
}

/// `max |(d/N)·F F† − I|`.
fn tight_frame_deviation<T: Scalar>(f: &ComplexMatrix<T>) -> T {
    let (d, n) = (f.rows(), f.cols());
    if n == 0 {
        return T::zero();
    }
    let frame_op = f.matmul(&f.adjoint()).scale(T::from_usize_lossy(d) / T::from_usize_lossy(n));
    frame_op.max_abs_diff(&ComplexMatrix::identity(d))
}

/// `G = (N/2d)·(I − U)`.
pub fn gram_from_signature<T: Scalar>(u: &SignatureUnitary<T>, d: usize) -> Result<GramMatrix<T>> {
    let implied = u.implied_dimension();
    if d == 0 || (implied - T::from_usize_lossy(d)).abs() > T::lit(T::SPECTRAL_TOL) {
        return Err(EtfError::ThetaMismatch { d, implied: implied.as_f64() });
    }
    let n = u.n();
    let scale = T::from_usize_lossy(n) / (T::lit(2.0) * T::from_usize_lossy(d));
    let g = (&ComplexMatrix::identity(n) - u.matrix()).scale(scale);
    GramMatrix::new(g, d)
}

/// `U = I − (2d/N)·G`, after validating `matrix` as an ETF(d, N) Gram.
pub fn signature_from_gram<T: Scalar>(matrix: &ComplexMatrix<T>, d: usize) -> Result<SignatureUnitary<T>> {
    let g = GramMatrix::new(matrix.clone(), d)?;
    Ok(signature_of(&g))
}

/// The signature of an already validated Gram matrix.
pub fn signature_of<T: Scalar>(g: &GramMatrix<T>) -> SignatureUnitary<T> {
    let n = g.n();
    let scale = T::lit(2.0) * T::from_usize_lossy(g.d()) / T::from_usize_lossy(n);
    let u = &ComplexMatrix::identity(n) - &g.matrix().scale(scale);
    let cos_theta = T::one() - scale;
    SignatureUnitary::from_parts(cos_theta.max(-T::one()).min(T::one()).acos(), u)
}

/// Rank-d factorisation `G = F†F` from the d leading eigenpairs,
/// `F = diag(sqrt λ)·V†`.
pub fn frame_from_gram<T: Scalar>(g: &GramMatrix<T>) -> Result<SynthesisMatrix<T>> {
    let (n, d) = (g.n(), g.d());
    let (values, vectors) = hermitian_eigen(g.matrix());
    let threshold = T::lit(T::SPECTRAL_TOL) * T::from_usize_lossy(n) / T::from_usize_lossy(d);
    let rank = values.iter().filter(|&&v| v > threshold).count();
    if rank != d {
        return Err(EtfError::RankMismatch { expected: d, found: rank });
    }
    let f = ComplexMatrix::from_fn(d, n, |k, j| vectors[(j, k)].conj() * values[k].sqrt());
    SynthesisMatrix::new(f)
}

/// Rank-revealing Cholesky factorisation `G = F†F` taking pivots in column
/// order; equivalently Gram–Schmidt of the frame vectors in index order.
///
/// Columns whose residual pivot falls below `SPECTRAL_TOL` are treated as
/// dependent. The result is upper-trapezoidal with positive pivots, so it is
/// a continuous function of `G` wherever the pivot pattern is stable.
pub fn frame_from_gram_cholesky<T: Scalar>(g: &GramMatrix<T>) -> Result<SynthesisMatrix<T>> {
    let (n, d) = (g.n(), g.d());
    let threshold = T::lit(T::SPECTRAL_TOL);
    // rows of `basis` are the orthonormal coordinates built so far
    let mut rows: Vec<Vec<num_complex::Complex<T>>> = Vec::with_capacity(d);
    for j in 0..n {
        // residual of column j: G[:, j] − Σ_r conj(row_r[j]) row_r
        let mut v: Vec<_> = (0..n).map(|i| g.matrix()[(j, i)]).collect();
        for row in &rows {
            let c = row[j].conj();
            for (vi, ri) in v.iter_mut().zip(row) {
                *vi -= c * *ri;
            }
        }
        let pivot = v[j].re;
        if pivot > threshold {
            if rows.len() == d {
                return Err(EtfError::RankMismatch { expected: d, found: d + 1 });
            }
            let inv = T::one() / pivot.sqrt();
            rows.push(v.into_iter().map(|z| z * inv).collect());
        }
    }
    if rows.len() != d {
        return Err(EtfError::RankMismatch { expected: d, found: rows.len() });
    }
    let f = ComplexMatrix::from_fn(d, n, |k, j| rows[k][j]);
    SynthesisMatrix::new(f)
}

/// `G = F†F` of a unit-norm synthesis matrix, validated as an ETF Gram.
pub fn gram_from_frame<T: Scalar>(f: &ComplexMatrix<T>) -> Result<GramMatrix<T>> {
    let tol = T::lit(T::INVARIANT_TOL);
    for j in 0..f.cols() {
        let norm = (0..f.rows()).fold(T::zero(), |s, i| s + modulus_sqr(f[(i, j)])).sqrt();
        let deviation = (norm - T::one()).abs();
        if deviation > tol {
            return Err(EtfError::NotNormalized { column: j, deviation: deviation.as_f64() });
        }
    }
    GramMatrix::new(f.adjoint_mul(f), f.rows())
}

/// `U ↦ −U`: the signature of the Naimark complement ETF(N − d, N).
pub fn naimark_complement<T: Scalar>(u: &SignatureUnitary<T>) -> SignatureUnitary<T> {
    SignatureUnitary::from_parts(T::pi() - u.theta(), -u.matrix())
}

/// True iff one of `d`, `N − 1`, `N − d` divides the product of the other two.
pub fn fickus_check(d: u64, n: u64) -> bool {
    assert!(d >= 1 && d < n, "fickus_check requires 1 <= d < n");
    let (a, b, c) = (d as u128, (n - 1) as u128, (n - d) as u128);
    (b * c) % a == 0 || (a * c) % b == 0 || (a * b) % c == 0
}

/// Input accepted by [`verify_etf`].
#[derive(Clone, Copy, Debug)]
pub enum EtfCandidate<'a, T: Scalar> {
    Gram { matrix: &'a ComplexMatrix<T>, d: usize },
    Synthesis(&'a ComplexMatrix<T>),
}

impl<'a, T: Scalar> From<&'a GramMatrix<T>> for EtfCandidate<'a, T> {
    fn from(g: &'a GramMatrix<T>) -> Self {
        EtfCandidate::Gram { matrix: g.matrix(), d: g.d() }
    }
}

impl<'a, T: Scalar> From<&'a SynthesisMatrix<T>> for EtfCandidate<'a, T> {
    fn from(f: &'a SynthesisMatrix<T>) -> Self {
        EtfCandidate::Synthesis(f.matrix())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenCluster {
    pub value: f64,
    pub multiplicity: usize,
}

/// Per-condition outcome of [`verify_etf`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub n: usize,
    pub d: usize,
    pub tol: f64,
    pub hermitian_ok: bool,
    pub hermiticity_deviation: f64,
    pub normalization_ok: bool,
    pub max_norm_deviation: f64,
    pub equiangular_ok: bool,
    pub target_coherence: f64,
    pub min_overlap: f64,
    pub max_overlap: f64,
    pub spectrum_ok: bool,
    pub spectral_tol: f64,
    pub max_spectral_deviation: f64,
    pub eigenvalue_clusters: Vec<EigenCluster>,
    /// `max |(d/N)·FF† − I|`, only measured for synthesis input.
    pub tight_frame_deviation: Option<f64>,
    pub pass: bool,
}

impl VerificationReport {
    /// The measured coherence, `max_{j≠l} |G_jl|`.
    pub fn coherence(&self) -> f64 {
        self.max_overlap
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.d == 0 || self.d > self.n {
            out.push(format!("dimension d = {} invalid for N = {}", self.d, self.n));
        }
        if !self.hermitian_ok {
            out.push(format!("hermiticity deviation {:e}", self.hermiticity_deviation));
        }
        if !self.normalization_ok {
            out.push(format!("unit diagonal deviation {:e}", self.max_norm_deviation));
        }
        if !self.equiangular_ok {
            out.push(format!(
                "overlaps in [{:.12}, {:.12}] but 1/alpha = {:.12}",
                self.min_overlap, self.max_overlap, self.target_coherence
            ));
        }
        if !self.spectrum_ok {
            out.push(format!(
                "spectrum deviates from {{0, N/d}} by {:e}",
                self.max_spectral_deviation
            ));
        }
        if let Some(t) = self.tight_frame_deviation {
            if !(t <= self.tol) {
                out.push(format!("tight-frame deviation {t:e}"));
            }
        }
        out
    }
}

/// Checks the three ETF conditions at `tol`; the spectrum uses the relative
/// tolerance `max(tol, SPECTRAL_TOL)·N/d`. Failures are report content.
pub fn verify_etf<'a, T: Scalar>(candidate: impl Into<EtfCandidate<'a, T>>, tol: T) -> VerificationReport {
    let candidate = candidate.into();
    let (gram, d, tight) = match candidate {
        EtfCandidate::Gram { matrix, d } => (matrix.clone(), d, None),
        EtfCandidate::Synthesis(f) => (f.adjoint_mul(f), f.rows(), Some(tight_frame_deviation(f).as_f64())),
    };
    let n = gram.rows();
    let tol_f = tol.as_f64();
    let degenerate = d == 0 || d > n || !gram.is_square();
    if degenerate {
        return VerificationReport {
            n,
            d,
            tol: tol_f,
            hermitian_ok: false,
            hermiticity_deviation: f64::NAN,
            normalization_ok: false,
            max_norm_deviation: f64::NAN,
            equiangular_ok: false,
            target_coherence: f64::NAN,
            min_overlap: f64::NAN,
            max_overlap: f64::NAN,
            spectrum_ok: false,
            spectral_tol: f64::NAN,
            max_spectral_deviation: f64::NAN,
            eigenvalue_clusters: Vec::new(),
            tight_frame_deviation: tight,
            pass: false,
        };
    }

    let hermiticity = gram.hermiticity_deviation();
    let norm_dev = gram
        .diagonal()
        .iter()
        .fold(T::zero(), |m, &z| m.max(modulus(z - creal(T::one()))));

    let (dt, nt) = (T::from_usize_lossy(d), T::from_usize_lossy(n));
    let target = if n > 1 { ((nt - dt) / (dt * (nt - T::one()))).sqrt() } else { T::zero() };
    let mut min_overlap = T::lit(f64::INFINITY);
    let mut max_overlap = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let m = modulus(gram[(i, j)]);
                min_overlap = min_overlap.min(m);
                max_overlap = max_overlap.max(m);
            }
        }
    }
    if n == 1 {
        min_overlap = T::zero();
    }
    let equiangular_ok = (max_overlap - target).abs() <= tol && (min_overlap - target).abs() <= tol;

    let top = nt / dt;
    let spectral_tol = tol.max(T::lit(T::SPECTRAL_TOL)) * top;
    let eigenvalues = hermitian_eigenvalues(&gram);
    let mut max_dev = T::zero();
    for (idx, &ev) in eigenvalues.iter().enumerate() {
        let expected = if idx < d { top } else { T::zero() };
        max_dev = max_dev.max((ev - expected).abs());
    }
    let clusters = cluster_eigenvalues(&eigenvalues, spectral_tol);

    let hermitian_ok = hermiticity <= tol;
    let normalization_ok = norm_dev <= tol;
    let spectrum_ok = max_dev <= spectral_tol;
    let tight_ok = tight.is_none_or(|t| t <= tol_f);
    VerificationReport {
        n,
        d,
        tol: tol_f,
        hermitian_ok,
        hermiticity_deviation: hermiticity.as_f64(),
        normalization_ok,
        max_norm_deviation: norm_dev.as_f64(),
        equiangular_ok,
        target_coherence: target.as_f64(),
        min_overlap: min_overlap.as_f64(),
        max_overlap: max_overlap.as_f64(),
        spectrum_ok,
        spectral_tol: spectral_tol.as_f64(),
        max_spectral_deviation: max_dev.as_f64(),
        eigenvalue_clusters: clusters,
        tight_frame_deviation: tight,
        pass: hermitian_ok && normalization_ok && equiangular_ok && spectrum_ok && tight_ok,
    }
}

/// Verifies a signature unitary and the ETF it encodes. A signature with
/// `θ = 0` (the identity) is the orthonormal-basis endpoint and is checked
/// through its complement, the ETF(N, N) with `G = I`.
pub fn verify_signature<T: Scalar>(u: &SignatureUnitary<T>, tol: T) -> (SignatureCheck, VerificationReport) {
    let check = u.check();
    let d = u.dimension();
    let report = if d == 0 {
        let n = u.n();
        let g = (&ComplexMatrix::identity(n) + u.matrix()).scale(T::lit(0.5));
        verify_etf(EtfCandidate::Gram { matrix: &g, d: n }, tol)
    } else {
        let n = u.n();
        let scale = T::from_usize_lossy(n) / (T::lit(2.0) * T::from_usize_lossy(d));
        let g = (&ComplexMatrix::identity(n) - u.matrix()).scale(scale);
        verify_etf(EtfCandidate::Gram { matrix: &g, d }, tol)
    };
    (check, report)
}

fn cluster_eigenvalues<T: Scalar>(sorted_desc: &[T], gap: T) -> Vec<EigenCluster> {
    let mut clusters: Vec<(T, T, usize)> = Vec::new(); // (sum, last, count)
    for &v in sorted_desc {
        match clusters.last_mut() {
            Some((sum, last, count)) if (*last - v).abs() <= gap => {
                *sum += v;
                *last = v;
                *count += 1;
            }
            _ => clusters.push((v, v, 1)),
        }
    }
    clusters
        .into_iter()
        .map(|(sum, _, count)| EigenCluster {
            value: (sum / T::from_usize_lossy(count)).as_f64(),
            multiplicity: count,
        })
        .collect()
}

/// Hermitian-part helper used by callers that want an exactly hermitian
/// representative of a nearly hermitian signature.
pub fn symmetrize_signature<T: Scalar>(m: &ComplexMatrix<T>, cos_theta: T) -> ComplexMatrix<T> {
    let mut h = m.hermitian_part();
    for i in 0..h.rows() {
        h[(i, i)] = creal(cos_theta);
    }
    h
}
