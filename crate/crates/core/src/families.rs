//! Free parameters in complex Hadamard matrices through ER pairs, and the
//! six-parameter family of hermitian unitaries of order 16.
//!
//! Two columns `C_A`, `C_B` of a complex Hadamard matrix form an ER pair when
//! `C_A ∘ conj(C_B)` is real, hence a vector of signs. Multiplying both
//! columns by `e^{iα}` on the rows where the sign is `−1` keeps them
//! orthogonal to each other and to every other column. For a hermitian
//! result the same rule is applied to the rows `A`, `B` with `−α`.
//!
//! Families are stored as a base matrix plus an integer coefficient per
//! (parameter, entry): entry `(j, k)` at parameters `α` is
//! `base_jk · exp(i Σ_p c_pjk α_p)`. Contributions that cancel therefore
//! cancel exactly.

use rand::Rng;
use serde::Serialize;

use crate::error::{EtfError, Result};
use crate::frame::{gram_from_signature, verify_etf, SignatureCheck, SignatureUnitary};
use crate::matrix::ComplexMatrix;
use crate::scalar::{cis, modulus, Scalar};
use crate::solver::projections::seed_rng;

pub const ER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErPair {
    pub i: usize,
    pub j: usize,
    /// Signs of `C_i ∘ conj(C_j)` after removing the global scale.
    pub signs: Vec<i8>,
}

impl ErPair {
    /// The pair `(i, j)` with signs taken from the real parts of
    /// `C_i ∘ conj(C_j)`, without checking that the imaginary parts vanish.
    pub fn from_columns_unchecked<T: Scalar>(h: &ComplexMatrix<T>, i: usize, j: usize) -> Self {
        let signs = (0..h.rows())
            .map(|k| if (h[(k, i)] * h[(k, j)].conj()).re >= T::zero() { 1 } else { -1 })
            .collect();
        Self { i, j, signs }
    }

    /// The pair as 1-based column numbers.
    pub fn one_based(&self) -> (usize, usize) {
        (self.i + 1, self.j + 1)
    }
}

fn unit_scale<T: Scalar>(h: &ComplexMatrix<T>) -> Result<T> {
    let scale = modulus(h[(0, 0)]);
    for r in 0..h.rows() {
        for c in 0..h.cols() {
            let m = modulus(h[(r, c)]);
            if !(scale > T::zero()) || (m / scale - T::one()).abs() > T::lit(ER_TOL) {
                return Err(EtfError::NotUnimodular { row: r, col: c, modulus: (m / scale).as_f64() });
            }
        }
    }
    Ok(scale)
}

fn pair_deviation<T: Scalar>(h: &ComplexMatrix<T>, i: usize, j: usize, scale_sq: T) -> T {
    (0..h.rows()).fold(T::zero(), |worst, k| worst.max(((h[(k, i)] * h[(k, j)].conj()).im / scale_sq).abs()))
}

/// Every unordered column pair `i < j` of `h` whose entrywise product
/// `C_i ∘ conj(C_j)` is real within [`ER_TOL`].
pub fn find_er_pairs<T: Scalar>(h: &ComplexMatrix<T>) -> Result<Vec<ErPair>> {
    let scale = unit_scale(h)?;
    let scale_sq = scale * scale;
    let n = h.cols();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if pair_deviation(h, i, j, scale_sq) <= T::lit(ER_TOL) {
                out.push(ErPair::from_columns_unchecked(h, i, j));
            }
        }
    }
    Ok(out)
}

/// A base matrix with integer phase coefficients for each parameter.
#[derive(Debug, Clone)]
pub struct ParametricFamily<T: Scalar> {
    pub base: ComplexMatrix<T>,
    /// `coefficients[p][j * cols + k]` multiplies `α_p` in the phase of entry `(j, k)`.
    pub coefficients: Vec<Vec<i32>>,
    pub pairs: Vec<ErPair>,
    pub hermitian_mode: bool,
}

impl<T: Scalar> ParametricFamily<T> {
    pub fn new(base: ComplexMatrix<T>, hermitian_mode: bool) -> Self {
        Self { base, coefficients: Vec::new(), pairs: Vec::new(), hermitian_mode }
    }

    pub fn num_parameters(&self) -> usize {
        self.coefficients.len()
    }

    /// Parameters whose coefficients do not all cancel.
    pub fn effective_parameters(&self) -> usize {
        self.coefficients.iter().filter(|c| c.iter().any(|&v| v != 0)).count()
    }

    /// Adds a parameter on an ER pair after checking the pair on the base.
    pub fn add_pair(&mut self, pair: ErPair) -> Result<usize> {
        let scale = unit_scale(&self.base)?;
        let deviation = pair_deviation(&self.base, pair.i, pair.j, scale * scale);
        if deviation > T::lit(ER_TOL) {
            return Err(EtfError::NotErPair { i: pair.i, j: pair.j, deviation: deviation.as_f64() });
        }
        Ok(self.add_pair_unchecked(pair))
    }

    /// Adds a parameter on `pair` without the ER check.
    pub fn add_pair_unchecked(&mut self, pair: ErPair) -> usize {
        let (rows, cols) = (self.base.rows(), self.base.cols());
        let mut c = vec![0i32; rows * cols];
        for (row, &s) in pair.signs.iter().enumerate() {
            if s < 0 {
                c[row * cols + pair.i] += 1;
                c[row * cols + pair.j] += 1;
            }
        }
        if self.hermitian_mode {
            // mirrored rows A, B with −α, signs from the transposed pair
            for (col, &s) in pair.signs.iter().enumerate() {
                if s < 0 {
                    c[pair.i * cols + col] -= 1;
                    c[pair.j * cols + col] -= 1;
                }
            }
        }
        self.coefficients.push(c);
        self.pairs.push(pair);
        self.coefficients.len() - 1
    }

    pub fn evaluate(&self, alphas: &[T]) -> Result<ComplexMatrix<T>> {
        if alphas.len() != self.num_parameters() {
            return Err(EtfError::DimensionMismatch {
                expected: format!("{} parameters", self.num_parameters()),
                found: format!("{} parameters", alphas.len()),
            });
        }
        let cols = self.base.cols();
        Ok(ComplexMatrix::from_fn(self.base.rows(), cols, |j, k| {
            let idx = j * cols + k;
            let mut phase = T::zero();
            let mut any = false;
            for (c, &a) in self.coefficients.iter().zip(alphas) {
                if c[idx] != 0 {
                    phase += T::lit(c[idx] as f64) * a;
                    any = true;
                }
            }
            if any { self.base[(j, k)] * cis(phase) } else { self.base[(j, k)] }
        }))
    }
}

/// `h` with the parameter `alpha` injected on `pair`.
pub fn inject_parameter<T: Scalar>(h: &ComplexMatrix<T>, pair: &ErPair, alpha: T, hermitian_mode: bool) -> Result<ComplexMatrix<T>> {
    let mut family = ParametricFamily::new(h.clone(), hermitian_mode);
    family.add_pair(pair.clone())?;
    family.evaluate(&[alpha])
}

/// Entries of `4·U16(α)`: a sign followed by the parameters in the phase,
/// `~p` meaning `−α_p`. For example `-1~2` is `−e^{i(α1 − α2)}`.
const U16_TABLE: [&str; 16] = [
    "+     +     +     +     +     +     +     +     +     +     +     +     +     +     +     +",
    "+     +     -     -     +~12  +~12  -~12  -~12  +     +     -     -     +~12  +~12  -~12  -~12",
    "+     -     +     -     +~13  -~13  +~13  -~13  +     -     +     -     +~13  -~13  +~13  -~13",
    "+     -     -     +     +~1   -~1   -~1   +~1   +     -     -     +     +~1   -~1   -~1   +~1",
    "+     +1~2  +1~3  +1    +     +~45  +~46  +~4   -     -1~2  -1~3  -1    -     -~45  -~46  -~4",
    "+     +1~2  -1~3  -1    +4~5  +     -~56  -~5   -     -1~2  +1~3  +1    -4~5  -     +~56  +~5",
    "+     -1~2  +1~3  -1    +4~6  -5~6  +     -~6   -     +1~2  -1~3  +1    -4~6  +5~6  -     +~6",
    "+     -1~2  -1~3  +1    +4    -5    -6    +     -     +1~2  +1~3  -1    -4    +5    +6    -",
    "+     +     +     +     -     -     -     -     +     +     +     +     -     -     -     -",
    "+     +     -     -     -~12  -~12  +~12  +~12  +     +     -     -     -~12  -~12  +~12  +~12",
    "+     -     +     -     -~13  +~13  -~13  +~13  +     -     +     -     -~13  +~13  -~13  +~13",
    "+     -     -     +     -~1   +~1   +~1   -~1   +     -     -     +     -~1   +~1   +~1   -~1",
    "+     +1~2  +1~3  +1    -     -~45  -~46  -~4   -     -1~2  -1~3  -1    +     +~45  +~46  +~4",
    "+     +1~2  -1~3  -1    -4~5  -     +~56  +~5   -     -1~2  +1~3  +1    +4~5  +     -~56  -~5",
    "+     -1~2  +1~3  -1    -4~6  +5~6  -     +~6   -     +1~2  -1~3  +1    +4~6  -5~6  +     -~6",
    "+     -1~2  -1~3  +1    -4    +5    +6    -     -     +1~2  +1~3  -1    +4    -5    -6    +",
];

fn parse_token(token: &str) -> (i8, [i32; 6]) {
    let mut chars = token.chars();
    let sign = match chars.next() {
        Some('+') => 1,
        Some('-') => -1,
        other => panic!("bad sign {other:?} in U16 table"),
    };
    let mut coeffs = [0i32; 6];
    let mut negate = false;
    for c in chars {
        match c {
            '~' => negate = true,
            '1'..='6' => {
                coeffs[c as usize - '1' as usize] += if negate { -1 } else { 1 };
                negate = false;
            }
            other => panic!("bad character {other:?} in U16 table"),
        }
    }
    (sign, coeffs)
}

/// The six-parameter family of 16×16 hermitian unitaries with diagonal `1/4`
/// (so ETF(6, 16) signatures) stemming from the real symmetric Hadamard
/// matrix at `α = 0`.
pub fn u16_parametric<T: Scalar>() -> ParametricFamily<T> {
    let quarter = T::lit(0.25);
    let mut base = ComplexMatrix::zeros(16, 16);
    let mut coefficients = vec![vec![0i32; 256]; 6];
    for (row, line) in U16_TABLE.iter().enumerate() {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(tokens.len(), 16, "U16 row {row}");
        for (col, token) in tokens.into_iter().enumerate() {
            let (sign, coeffs) = parse_token(token);
            base[(row, col)] = crate::scalar::creal(quarter * T::lit(sign as f64));
            for p in 0..6 {
                coefficients[p][row * 16 + col] = coeffs[p];
            }
        }
    }
    ParametricFamily { base, coefficients, pairs: Vec::new(), hermitian_mode: true }
}

pub fn u16_family<T: Scalar>(alphas: &[T; 6]) -> SignatureUnitary<T> {
    let matrix = u16_parametric::<T>().evaluate(alphas).expect("six parameters");
    SignatureUnitary::from_parts(T::lit(0.25).acos(), matrix)
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyReport {
    pub samples: usize,
    pub parameters: usize,
    pub effective_parameters: usize,
    pub worst_hermiticity: f64,
    pub worst_unitarity: f64,
    pub worst_diagonal: f64,
    pub worst_off_diagonal_moduli: f64,
    /// Largest deviation of the Gram spectrum from `{0, N/d}`.
    pub worst_spectral_deviation: f64,
    pub failed_samples: usize,
    pub tol: f64,
    pub pass: bool,
}

/// Samples `α` uniformly in `[0, 2π)^p` and checks the signature invariants
/// of the row-normalised family member and ETF verification of its Gram.
pub fn validate_family<T: Scalar>(family: &ParametricFamily<T>, sample_count: usize, master_seed: u64, tol: T) -> FamilyReport {
    let n = family.base.rows();
    let p = family.num_parameters();
    let mut rng = seed_rng(master_seed, 0);
    let mut report = FamilyReport {
        samples: sample_count,
        parameters: p,
        effective_parameters: family.effective_parameters(),
        worst_hermiticity: 0.0,
        worst_unitarity: 0.0,
        worst_diagonal: 0.0,
        worst_off_diagonal_moduli: 0.0,
        worst_spectral_deviation: 0.0,
        failed_samples: 0,
        tol: tol.as_f64(),
        pass: true,
    };
    for _ in 0..sample_count {
        let alphas: Vec<T> = (0..p).map(|_| T::lit(rng.random_range(0.0..std::f64::consts::TAU))).collect();
        let m = family.evaluate(&alphas).expect("parameter count matches");
        let row_norm = (0..n).fold(T::zero(), |s, k| s + m[(0, k)].norm_sqr()).sqrt();
        let m = m.scale(T::one() / row_norm);
        let cos = m.diagonal().iter().fold(T::zero(), |s, z| s + z.re) / T::from_usize_lossy(n);
        let check = SignatureCheck::measure(&m, cos);
        report.worst_hermiticity = report.worst_hermiticity.max(check.hermiticity);
        report.worst_unitarity = report.worst_unitarity.max(check.unitarity);
        report.worst_diagonal = report.worst_diagonal.max(check.diagonal);
        report.worst_off_diagonal_moduli = report.worst_off_diagonal_moduli.max(check.off_diagonal_moduli);
        let mut ok = check.failures(tol.as_f64()).is_empty();
        if ok {
            let u = SignatureUnitary::from_parts(cos.acos(), m);
            let d = u.dimension();
            match gram_from_signature(&u, d) {
                Ok(g) => {
                    let v = verify_etf(&g, tol);
                    report.worst_spectral_deviation = report.worst_spectral_deviation.max(v.max_spectral_deviation);
                    ok = v.pass;
                }
                Err(_) => ok = false,
            }
        }
        if !ok {
            report.failed_samples += 1;
        }
    }
    report.pass = report.failed_samples == 0;
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{hermitian_fourier, real_hadamard_tensor};
    use num_complex::Complex64;

    fn h4() -> ComplexMatrix<f64> {
        ComplexMatrix::from_real_fn(4, 4, |i, j| if i == j { -1.0 } else { 1.0 })
    }

    #[test]
    fn four_by_four_pair_and_injection() {
        let h = h4();
        let pairs = find_er_pairs(&h).unwrap();
        assert_eq!(pairs.len(), 6);
        let pair = pairs.iter().find(|p| (p.i, p.j) == (2, 3)).unwrap();
        assert_eq!(pair.signs, vec![1, 1, -1, -1]);
        let alpha = 0.7;
        let e = Complex64::from_polar(1.0, alpha);
        let printed = ComplexMatrix::from_fn(4, 4, |i, j| match (i, j) {
            (2, 2) | (3, 3) => -e,
            (2, 3) | (3, 2) => e,
            _ => h[(i, j)],
        });
        let injected = inject_parameter(&h, pair, alpha, false).unwrap();
        assert!(injected.max_abs_diff(&printed) < 1e-15);
        assert_eq!(inject_parameter(&h, pair, 0.0, false).unwrap(), h);
    }

    #[test]
    fn hermitian_injection_on_four_by_four_is_constant() {
        let h = h4();
        let pair = find_er_pairs(&h).unwrap().into_iter().find(|p| (p.i, p.j) == (2, 3)).unwrap();
        for k in 0..32 {
            let alpha = k as f64 * std::f64::consts::TAU / 32.0;
            assert_eq!(inject_parameter(&h, &pair, alpha, true).unwrap(), h);
        }
    }

    #[test]
    fn injection_keeps_orthogonality_and_moduli() {
        let h = real_hadamard_tensor::<f64>(4).unwrap().matrix().scale(4.0);
        for pair in find_er_pairs(&h).unwrap().into_iter().take(20) {
            for k in 0..32 {
                let alpha = k as f64 * std::f64::consts::TAU / 32.0;
                let m = inject_parameter(&h, &pair, alpha, false).unwrap().scale(0.25);
                assert!(m.unitarity_deviation() < 1e-10);
                assert!(m.as_slice().iter().all(|z| (z.norm() - 0.25).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn real_hadamard_has_all_pairs() {
        let h = real_hadamard_tensor::<f64>(4).unwrap();
        assert_eq!(find_er_pairs(h.matrix()).unwrap().len(), 16 * 15 / 2);
    }

    #[test]
    fn odd_fourier_has_no_pairs() {
        for n in [3, 5] {
            let u = hermitian_fourier::<f64>(n).unwrap();
            assert!(find_er_pairs(u.matrix()).unwrap().is_empty(), "n = {n}");
        }
    }

    #[test]
    fn non_unimodular_rejected() {
        let mut h = h4();
        h[(1, 2)] = Complex64::new(0.5, 0.0);
        assert!(matches!(find_er_pairs(&h), Err(EtfError::NotUnimodular { row: 1, col: 2, .. })));
    }

    #[test]
    fn non_er_pair_rejected_and_fails_validation() {
        let u = hermitian_fourier::<f64>(3).unwrap();
        let m = u.matrix().scale(3.0);
        let pair = ErPair::from_columns_unchecked(&m, 0, 1);
        let mut family = ParametricFamily::new(m.clone(), false);
        assert!(matches!(family.add_pair(pair.clone()), Err(EtfError::NotErPair { .. })));
        family.add_pair_unchecked(pair);
        let report = validate_family(&family, 10, 3, 1e-8);
        assert!(!report.pass);
        assert!(report.worst_unitarity > 1e-3);
    }

    #[test]
    fn u16_at_zero_is_the_hadamard_signature() {
        let u = u16_family(&[0.0; 6]);
        let h = real_hadamard_tensor::<f64>(4).unwrap();
        assert!(u.matrix().max_abs_diff(h.matrix()) < 1e-12);
    }

    #[test]
    fn u16_listed_pairs_are_er_at_zero() {
        let u0 = u16_family(&[0.0; 6]).matrix().scale(4.0);
        let pairs: Vec<(usize, usize)> = find_er_pairs(&u0).unwrap().iter().map(ErPair::one_based).collect();
        for listed in [(2, 3), (4, 13), (5, 8), (6, 7), (9, 12), (10, 11), (14, 15)] {
            assert!(pairs.contains(&listed), "{listed:?}");
        }
    }

    #[test]
    fn u16_single_parameter_changes_only_its_entries() {
        let base = u16_family(&[0.0; 6]);
        let a = 0.9;
        let moved = u16_family(&[a, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let family = u16_parametric::<f64>();
        for j in 0..16 {
            for k in 0..16 {
                let c = family.coefficients[0][j * 16 + k];
                let expected = base.matrix()[(j, k)] * Complex64::from_polar(1.0, c as f64 * a);
                assert!((moved.matrix()[(j, k)] - expected).norm() < 1e-15);
                if c == 0 {
                    assert_eq!(moved.matrix()[(j, k)], base.matrix()[(j, k)]);
                }
            }
        }
    }

    #[test]
    fn u16_family_validates() {
        let report = validate_family(&u16_parametric::<f64>(), 100, 11, 1e-8);
        assert!(report.pass, "{report:?}");
        assert_eq!(report.effective_parameters, 6);
    }

    #[test]
    fn four_by_four_hermitian_family_is_degenerate() {
        let h = h4();
        let pair = find_er_pairs(&h).unwrap().into_iter().find(|p| (p.i, p.j) == (2, 3)).unwrap();
        let mut family = ParametricFamily::new(h, true);
        family.add_pair(pair).unwrap();
        assert_eq!(family.effective_parameters(), 0);
        let report = validate_family(&family, 8, 1, 1e-8);
        assert!(report.pass);
        assert_eq!(report.effective_parameters, 0);
    }
}
