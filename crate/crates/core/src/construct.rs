//! Explicit signature unitaries: hermitian Fourier matrices, tensor powers of
//! the symmetric 2×2 Hadamard matrix, their Kronecker products, and the
//! Haagerup invariant used to tell the resulting frames apart.
//!
//! A hermitian complex Hadamard matrix `H` of order `N = n²` with constant
//! diagonal `√N` gives the signature `H/√N` with `cos θ = 1/n`, that is an
//! ETF((N − n)/2, N). Kronecker products of such matrices stay in the class,
//! so every factorisation of `n` into prime powers yields a construction;
//! distinct factorisations give inequivalent frames.

use std::cmp::Ordering;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{EtfError, Result};
use crate::frame::SignatureUnitary;
use crate::matrix::ComplexMatrix;
use crate::scalar::{modulus, root_of_unity, Scalar};

/// Hermitian Fourier signature of order `n²`:
/// `U_{(a,b),(c,d)} = ω^{ad − bc}/n` with `ω = e^{2πi/n}` and row index `a·n + b`.
pub fn hermitian_fourier<T: Scalar>(n: usize) -> Result<SignatureUnitary<T>> {
    if n < 2 {
        return Err(EtfError::OutOfRange(format!("hermitian Fourier order must be at least 2, got {n}")));
    }
    let inv = T::one() / T::from_usize_lossy(n);
    let matrix = ComplexMatrix::from_fn(n * n, n * n, |row, col| {
        let (a, b) = ((row / n) as i64, (row % n) as i64);
        let (c, d) = ((col / n) as i64, (col % n) as i64);
        root_of_unity::<T>(a * d - b * c, n as u64) * inv
    });
    Ok(SignatureUnitary::from_parts(inv.acos(), matrix))
}

/// `H2^{⊗k}/2^{k/2}` with the standard `H2 = [[1, 1], [1, −1]]`. Its diagonal
/// is not constant; see [`real_hadamard_tensor`] for the signature form.
pub fn real_hadamard_power<T: Scalar>(k: u32) -> ComplexMatrix<T> {
    let size = 1usize << k;
    let scale = T::one() / T::lit(2f64.powi(k as i32)).sqrt();
    ComplexMatrix::from_real_fn(size, size, |i, j| {
        if (i & j).count_ones() % 2 == 0 { scale } else { -scale }
    })
}

/// Real symmetric Hadamard signature of order `2^k` with constant diagonal
/// `2^{−k/2}`, built as the `(k/2)`-fold tensor power of the 4×4 matrix
/// `hermitian_fourier(2)`. It is permutation equivalent to
/// [`real_hadamard_power`]`(k)`: within each pair of binary digits the column
/// digits are swapped.
pub fn real_hadamard_tensor<T: Scalar>(k: u32) -> Result<SignatureUnitary<T>> {
    if k == 0 || k % 2 == 1 {
        return Err(EtfError::OddPower(k));
    }
    let base = hermitian_fourier::<T>(2)?;
    let mut out = base.clone();
    for _ in 1..k / 2 {
        out = tensor(&out, &base);
    }
    Ok(out)
}

/// Kronecker product; `cos θ` multiplies.
pub fn tensor<T: Scalar>(u1: &SignatureUnitary<T>, u2: &SignatureUnitary<T>) -> SignatureUnitary<T> {
    let cos = u1.cos_theta() * u2.cos_theta();
    SignatureUnitary::from_parts(cos.max(-T::one()).min(T::one()).acos(), u1.matrix().kron(u2.matrix()))
}

/// The 1×1 signature `[1]`, neutral for [`tensor`].
pub fn unit_signature<T: Scalar>() -> SignatureUnitary<T> {
    SignatureUnitary::from_parts(T::zero(), ComplexMatrix::identity(1))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionList {
    pub r: usize,
    pub partitions: Vec<Vec<usize>>,
}

/// All partitions of `r` into non-increasing positive parts, in
/// reverse-lexicographic order (`[r]` first, `[1, …, 1]` last).
pub fn partitions(r: usize) -> PartitionList {
    fn extend(remaining: usize, max_part: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=remaining.min(max_part)).rev() {
            prefix.push(part);
            extend(remaining - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(r, r, &mut Vec::new(), &mut out);
    PartitionList { r, partitions: out }
}

/// Number of unrestricted partitions `P(r)`, by the standard coin-change
/// recurrence.
pub fn partition_count(r: usize) -> u128 {
    let mut counts = vec![0u128; r + 1];
    counts[0] = 1;
    for part in 1..=r {
        for total in part..=r {
            counts[total] += counts[total - part];
        }
    }
    counts[r]
}

/// Prime factorisation as `(p, exponent)` pairs with `p` ascending.
pub fn factorize(mut m: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= m {
        if m.is_multiple_of(p) {
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

/// Integer square root when `n` is a perfect square.
pub fn exact_sqrt(n: u64) -> Option<u64> {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    (r * r == n).then_some(r)
}

/// One tensor-product construction: the Fourier orders of its factors.
#[derive(Debug, Clone)]
pub struct FourierTensor<T: Scalar> {
    pub factors: Vec<usize>,
    pub signature: SignatureUnitary<T>,
}

impl<T: Scalar> FourierTensor<T> {
    pub fn label(&self) -> String {
        self.factors.iter().map(|m| format!("F{m}")).collect::<Vec<_>>().join("⊗")
    }
}

/// Every tensor product of hermitian Fourier matrices of order `n`: with
/// `√n = ∏ p_i^{r_i}`, one product per choice of a partition of each `r_i`,
/// the part `s` of a partition of `r_i` contributing `hermitian_fourier(p_i^s)`.
/// The count is `∏ P(r_i)`.
pub fn enumerate_fourier_tensors<T: Scalar>(n: u64) -> Result<Vec<FourierTensor<T>>> {
    let root = exact_sqrt(n).filter(|&r| r >= 2).ok_or(EtfError::NotASquare(n))?;
    let mut choices: Vec<Vec<usize>> = vec![Vec::new()];
    for (p, r) in factorize(root) {
        let per_prime: Vec<Vec<usize>> = partitions(r as usize)
            .partitions
            .into_iter()
            .map(|parts| parts.iter().map(|&s| (p as usize).pow(s as u32)).collect())
            .collect();
        choices = choices
            .iter()
            .flat_map(|prefix| {
                per_prime.iter().map(move |orders| {
                    let mut next = prefix.clone();
                    next.extend(orders);
                    next
                })
            })
            .collect();
    }
    choices
        .into_iter()
        .map(|factors| {
            let signature = factors
                .iter()
                .try_fold(unit_signature(), |acc, &m| Ok::<_, EtfError>(tensor(&acc, &hermitian_fourier(m)?)))?;
            Ok(FourierTensor { factors, signature })
        })
        .collect()
}

/// `Λ(U) = {U_st·U_uv·conj(U_sv)·conj(U_ut)}`, deduplicated and sorted by
/// (real, imaginary).
#[derive(Debug, Clone)]
pub struct HaagerupSet<T: Scalar> {
    pub values: Vec<Complex<T>>,
    /// Absolute matching tolerance, `1e-8` times the largest product modulus.
    pub tol: T,
}

fn cmp_complex<T: Scalar>(a: &Complex<T>, b: &Complex<T>) -> Ordering {
    a.re.partial_cmp(&b.re).unwrap_or(Ordering::Equal).then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

/// Inserts `z` into the sorted `set` unless a value within `tol` is present.
fn insert_close<T: Scalar>(set: &mut Vec<Complex<T>>, z: Complex<T>, tol: T) {
    let lo = set.partition_point(|v| v.re < z.re - tol);
    for v in &set[lo..] {
        if v.re > z.re + tol {
            break;
        }
        if modulus(*v - z) <= tol {
            return;
        }
    }
    let at = set.partition_point(|v| cmp_complex(v, &z) == Ordering::Less);
    set.insert(at, z);
}

pub const HAAGERUP_TOL: f64 = 1e-8;

pub fn haagerup_set<T: Scalar>(u: &ComplexMatrix<T>) -> Result<HaagerupSet<T>> {
    if !u.is_square() {
        return Err(EtfError::DimensionMismatch {
            expected: format!("{0}x{0}", u.rows()),
            found: format!("{}x{}", u.rows(), u.cols()),
        });
    }
    let n = u.rows();
    let mut largest = T::zero();
    for i in 0..n {
        for j in 0..n {
            let m = modulus(u[(i, j)]);
            if m == T::zero() {
                return Err(EtfError::ZeroEntry { row: i, col: j });
            }
            largest = largest.max(m);
        }
    }
    let tol = T::lit(HAAGERUP_TOL) * largest.powi(4);
    let partial: Vec<Vec<Complex<T>>> = (0..n)
        .into_par_iter()
        .map(|s| {
            let mut local = Vec::new();
            for t in 0..n {
                let ust = u[(s, t)];
                for uu in 0..n {
                    let ut_conj = u[(uu, t)].conj();
                    for v in 0..n {
                        let z = ust * u[(uu, v)] * u[(s, v)].conj() * ut_conj;
                        insert_close(&mut local, z, tol);
                    }
                }
            }
            local
        })
        .collect();
    let mut values = Vec::new();
    for part in partial {
        for z in part {
            insert_close(&mut values, z, tol);
        }
    }
    Ok(HaagerupSet { values, tol })
}

impl<T: Scalar> HaagerupSet<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Whether every value has a distinct partner in `other` within tolerance.
    pub fn matches(&self, other: &HaagerupSet<T>) -> bool {
        if self.values.len() != other.values.len() {
            return false;
        }
        let tol = self.tol.max(other.tol);
        let mut used = vec![false; other.values.len()];
        self.values.iter().all(|z| {
            let hit = other.values.iter().enumerate().find(|(k, w)| !used[*k] && modulus(**w - *z) <= tol);
            match hit {
                Some((k, _)) => {
                    used[k] = true;
                    true
                }
                None => false,
            }
        })
    }

    pub fn contains(&self, z: Complex<T>) -> bool {
        self.values.iter().any(|w| modulus(*w - z) <= self.tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Equivalence {
    Inequivalent,
    /// Haagerup sets agree; equality does not prove equivalence.
    Inconclusive,
}

pub fn certify_inequivalent<T: Scalar>(u1: &ComplexMatrix<T>, u2: &ComplexMatrix<T>) -> Result<Equivalence> {
    if u1.rows() != u2.rows() {
        return Ok(Equivalence::Inequivalent);
    }
    let (a, b) = (haagerup_set(u1)?, haagerup_set(u2)?);
    Ok(if a.matches(&b) { Equivalence::Inconclusive } else { Equivalence::Inequivalent })
}

/// Builds a signature from a construction expression such as `fourier:3`,
/// `hadamard:4` or `tensor(fourier:2,tensor(hadamard:2,fourier:3))`.
pub fn build_construction<T: Scalar>(expr: &str) -> Result<SignatureUnitary<T>> {
    let expr = expr.trim();
    if let Some(inner) = expr.strip_prefix("tensor(").and_then(|rest| rest.strip_suffix(')')) {
        let split = top_level_comma(inner)
            .ok_or_else(|| EtfError::Parse(format!("tensor needs two arguments: {expr}")))?;
        let left = build_construction(&inner[..split])?;
        let right = build_construction(&inner[split + 1..])?;
        return Ok(tensor(&left, &right));
    }
    let (name, arg) = expr
        .split_once(':')
        .ok_or_else(|| EtfError::Parse(format!("unknown construction '{expr}'")))?;
    let value: u32 = arg
        .trim()
        .parse()
        .map_err(|_| EtfError::Parse(format!("bad order '{arg}' in '{expr}'")))?;
    match name.trim() {
        "fourier" => hermitian_fourier(value as usize),
        "hadamard" => real_hadamard_tensor(value),
        other => Err(EtfError::Parse(format!("unknown construction '{other}'"))),
    }
}

fn top_level_comma(s: &str) -> Option<usize> {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => return Some(i),
            _ => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{gram_from_signature, verify_etf, SignatureCheck};
    use num_complex::Complex64;

    fn assert_signature(u: &SignatureUnitary<f64>, tol: f64) {
        let check = SignatureCheck::measure(u.matrix(), u.cos_theta());
        assert!(check.failures(tol).is_empty(), "{:?}", check);
    }

    #[test]
    fn fourier_two_is_real_with_half_entries() {
        let u = hermitian_fourier::<f64>(2).unwrap();
        assert_eq!(u.n(), 4);
        assert!(u.matrix().as_slice().iter().all(|z| z.im == 0.0 && z.re.abs() == 0.5));
        assert!(u.matrix().diagonal().iter().all(|z| z.re == 0.5));
        assert_signature(&u, 1e-12);
    }

    #[test]
    fn fourier_three_is_a_sic_signature() {
        let u = hermitian_fourier::<f64>(3).unwrap();
        assert!((u.cos_theta() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(u.dimension(), 3);
        assert!(verify_etf(&gram_from_signature(&u, 3).unwrap(), 1e-8).pass);
    }

    #[test]
    fn fourier_orders_two_to_eight_are_signatures() {
        for n in 2..=8 {
            let u = hermitian_fourier::<f64>(n).unwrap();
            assert_signature(&u, 1e-12);
            assert!(u.matrix().as_slice().iter().all(|z| (z.norm() - 1.0 / n as f64).abs() < 1e-15));
        }
        assert!(hermitian_fourier::<f64>(1).is_err());
    }

    #[test]
    fn hadamard_tensor_examples() {
        let u2 = real_hadamard_tensor::<f64>(2).unwrap();
        assert_eq!(u2.n(), 4);
        assert!(u2.matrix().diagonal().iter().all(|z| z.re == 0.5));
        assert!(u2.matrix().is_real(0.0));
        let u4 = real_hadamard_tensor::<f64>(4).unwrap();
        assert_eq!(u4.n(), 16);
        assert!((u4.cos_theta() - 0.25).abs() < 1e-15);
        assert_eq!(u4.dimension(), 6);
        assert_signature(&u4, 1e-12);
        assert!(matches!(real_hadamard_tensor::<f64>(3), Err(EtfError::OddPower(3))));
    }

    #[test]
    fn hadamard_tensor_is_a_column_permutation_of_the_plain_power() {
        for k in [2u32, 4, 6] {
            let plain = real_hadamard_power::<f64>(k);
            let sig = real_hadamard_tensor::<f64>(k).unwrap();
            let swap_pairs = |j: usize| {
                let mut out = 0;
                for pair in 0..k / 2 {
                    let hi = (j >> (2 * pair + 1)) & 1;
                    let lo = (j >> (2 * pair)) & 1;
                    out |= (lo << (2 * pair + 1)) | (hi << (2 * pair));
                }
                out
            };
            let size = 1 << k;
            let rows: Vec<usize> = (0..size).collect();
            let cols: Vec<usize> = (0..size).map(swap_pairs).collect();
            assert!(plain.permute(&rows, &cols).max_abs_diff(sig.matrix()) < 1e-15);
        }
    }

    #[test]
    fn tensor_examples() {
        let f2 = hermitian_fourier::<f64>(2).unwrap();
        let t = tensor(&f2, &f2);
        assert_eq!(t.n(), 16);
        assert!((t.cos_theta() - 0.25).abs() < 1e-15);
        assert_signature(&t, 1e-12);
        let same = tensor(&f2, &unit_signature());
        assert_eq!(same.matrix(), f2.matrix());
        assert!((same.cos_theta() - f2.cos_theta()).abs() < 1e-15);
    }

    #[test]
    fn partition_examples() {
        let p4 = partitions(4);
        assert_eq!(p4.partitions, vec![vec![4], vec![3, 1], vec![2, 2], vec![2, 1, 1], vec![1, 1, 1, 1]]);
        assert_eq!(partitions(0).partitions, vec![Vec::<usize>::new()]);
        assert_eq!(partitions(10).partitions.len(), 42);
        assert_eq!(partition_count(10), 42);
        assert_eq!(partition_count(100), 190_569_292);
    }

    #[test]
    fn fourier_tensor_counts() {
        assert_eq!(enumerate_fourier_tensors::<f64>(16).unwrap().len(), 2);
        assert_eq!(enumerate_fourier_tensors::<f64>(36).unwrap().len(), 1);
        assert!(matches!(enumerate_fourier_tensors::<f64>(15), Err(EtfError::NotASquare(15))));
        let labels: Vec<String> = enumerate_fourier_tensors::<f64>(16).unwrap().iter().map(|c| c.label()).collect();
        assert_eq!(labels, vec!["F4", "F2⊗F2"]);
    }

    #[test]
    fn haagerup_of_real_matrix_is_real() {
        let u = real_hadamard_tensor::<f64>(4).unwrap();
        let set = haagerup_set(u.matrix()).unwrap();
        assert!(set.values.iter().all(|z| z.im.abs() < 1e-15));
        assert!(set.contains(Complex64::new(1.0 / 256.0, 0.0)));
        assert!(set.contains(Complex64::new(-1.0 / 256.0, 0.0)));
        assert_eq!(set.len(), 2);
    }

    #[test]
    fn haagerup_of_fourier_three_has_complex_values() {
        let u = hermitian_fourier::<f64>(3).unwrap();
        let set = haagerup_set(u.matrix()).unwrap();
        // oracle: scaled by 9⁴ every product is a cube root of unity; count the distinct ones
        let m = u.matrix();
        let mut phases = std::collections::BTreeSet::new();
        for s in 0..9 {
            for t in 0..9 {
                for a in 0..9 {
                    for b in 0..9 {
                        let z = m[(s, t)] * m[(a, b)] * m[(s, b)].conj() * m[(a, t)].conj() * 6561.0;
                        phases.insert(((z.arg() / (2.0 * std::f64::consts::PI) * 3.0).round() as i64).rem_euclid(3));
                    }
                }
            }
        }
        assert_eq!(set.len(), phases.len());
        assert!(set.values.iter().any(|z| z.im.abs() > 1e-6));
        // closed under conjugation
        assert!(set.values.iter().all(|z| set.contains(z.conj())));
    }

    #[test]
    fn zero_entry_rejected() {
        let m = ComplexMatrix::<f64>::identity(3);
        assert!(matches!(haagerup_set(&m), Err(EtfError::ZeroEntry { .. })));
    }

    #[test]
    fn construction_expressions() {
        let u = build_construction::<f64>("tensor(fourier:2, tensor(hadamard:2,fourier:3))").unwrap();
        assert_eq!(u.n(), 4 * 4 * 9);
        assert!((u.cos_theta() - 1.0 / 12.0).abs() < 1e-15);
        assert!(build_construction::<f64>("fourier").is_err());
        assert!(build_construction::<f64>("hadamard:3").is_err());
        assert!(build_construction::<f64>("tensor(fourier:2)").is_err());
        assert!(build_construction::<f64>("sic:4").is_err());
    }
}
