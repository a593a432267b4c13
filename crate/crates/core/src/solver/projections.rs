//! The individual maps of the alternating-projection iteration.

use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{EtfError, Result};
use crate::matrix::ComplexMatrix;
use crate::scalar::{creal, modulus, modulus_sqr, Scalar};

/// Pivot norm below which a seed is declared rank deficient.
pub const PIVOT_THRESHOLD: f64 = 1e-12;
/// Loss of orthogonality that triggers a second Gram–Schmidt pass.
pub const REORTHOGONALIZE_THRESHOLD: f64 = 1e-10;

/// Independent random stream for one seed: the master seed keys the
/// generator, the seed index selects the stream.
pub fn seed_rng(master_seed: u64, seed_index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(seed_index);
    rng
}

/// N×N matrix of i.i.d. standard Gaussians: complex with `E|z|² = 1`, or
/// real with unit variance in real mode.
pub fn seed_matrix<T: Scalar, R: Rng + ?Sized>(n: usize, real_mode: bool, rng: &mut R) -> ComplexMatrix<T> {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(n, n, |_, _| {
        if real_mode {
            let x: f64 = rng.sample(StandardNormal);
            creal(T::lit(x))
        } else {
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            Complex::new(T::lit(x * inv_sqrt2), T::lit(y * inv_sqrt2))
        }
    })
}

/// `a_ij ↦ (a_ij/|a_ij|)·sqrt(b_ij)`; a zero entry takes phase 1.
pub fn impose_moduli<T: Scalar>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()));
    let sqrt_b: Vec<T> = b.as_slice().iter().map(|z| z.re.max(T::zero()).sqrt()).collect();
    let mut out = a.clone();
    impose_moduli_in_place(&mut out, &sqrt_b);
    out
}

pub(crate) fn impose_moduli_in_place<T: Scalar>(a: &mut ComplexMatrix<T>, sqrt_b: &[T]) {
    for (z, &s) in a.as_mut_slice().iter_mut().zip(sqrt_b) {
        let m = modulus(*z);
        *z = if m > T::zero() { *z * (s / m) } else { creal(s) };
    }
}

/// `A ↦ (A + A†)/2` followed by `A_ii ↦ cos θ`.
pub fn hermitize_and_fix_diagonal<T: Scalar>(a: &ComplexMatrix<T>, cos_theta: T) -> ComplexMatrix<T> {
    let mut out = a.clone();
    hermitize_in_place(&mut out, cos_theta);
    out
}

pub(crate) fn hermitize_in_place<T: Scalar>(a: &mut ComplexMatrix<T>, cos_theta: T) {
    assert!(a.is_square());
    let n = a.rows();
    let half = T::lit(0.5);
    for i in 0..n {
        a[(i, i)] = creal(cos_theta);
        for j in i + 1..n {
            let upper = (a[(i, j)] + a[(j, i)].conj()) * half;
            a[(i, j)] = upper;
            a[(j, i)] = upper.conj();
        }
    }
}

/// Modified Gram–Schmidt on the columns in natural order, with a second pass
/// for any column whose estimated residual overlap with earlier columns
/// exceeds [`REORTHOGONALIZE_THRESHOLD`]. The estimate is the usual
/// cancellation bound `ε·sqrt(j)·‖v_before‖/‖v_after‖`.
pub fn orthonormalize_columns<T: Scalar>(a: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let mut out = a.clone();
    let mut work = Vec::new();
    orthonormalize_in_place(&mut out, &mut work)?;
    Ok(out)
}

/// In-place variant; `work` is scratch space reused across calls.
pub(crate) fn orthonormalize_in_place<T: Scalar>(a: &mut ComplexMatrix<T>, work: &mut Vec<Complex<T>>) -> Result<()> {
    assert!(a.is_square());
    let n = a.rows();
    // column-major copy so each column is contiguous
    work.clear();
    work.extend((0..n * n).map(|idx| a[(idx % n, idx / n)]));
    let pivot_threshold = T::lit(PIVOT_THRESHOLD);
    let reorth = T::lit(REORTHOGONALIZE_THRESHOLD);
    let eps = T::lit(f64::EPSILON);
    for j in 0..n {
        let (done, rest) = work.split_at_mut(j * n);
        let v = &mut rest[..n];
        let before = norm2(v);
        for i in 0..j {
            let q = &done[i * n..(i + 1) * n];
            let r = dot(q, v);
            axpy(v, q, r);
        }
        let mut norm = norm2(v);
        if !(norm > pivot_threshold) {
            return Err(EtfError::RankDeficientSeed { column: j, pivot_norm: norm.as_f64() });
        }
        // one projection pass leaves an overlap of order ε·‖before‖/‖after‖
        let loss = eps * T::from_usize_lossy(j.max(1)).sqrt() * before / norm;
        if j > 0 && loss > reorth {
            for i in 0..j {
                let q = &done[i * n..(i + 1) * n];
                let r = dot(q, v);
                axpy(v, q, r);
            }
            norm = norm2(v);
            if !(norm > pivot_threshold) {
                return Err(EtfError::RankDeficientSeed { column: j, pivot_norm: norm.as_f64() });
            }
        }
        let inv = T::one() / norm;
        for z in v.iter_mut() {
            *z = *z * inv;
        }
    }
    for (idx, z) in work.iter().enumerate() {
        a[(idx % n, idx / n)] = *z;
    }
    Ok(())
}

#[inline]
fn dot<T: Scalar>(q: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
    let mut re = T::zero();
    let mut im = T::zero();
    for (a, b) in q.iter().zip(v) {
        // conj(a)·b
        re += a.re * b.re + a.im * b.im;
        im += a.re * b.im - a.im * b.re;
    }
    Complex::new(re, im)
}

#[inline]
fn axpy<T: Scalar>(v: &mut [Complex<T>], q: &[Complex<T>], r: Complex<T>) {
    for (x, y) in v.iter_mut().zip(q) {
        *x -= r * *y;
    }
}

#[inline]
fn norm2<T: Scalar>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |s, z| s + modulus_sqr(*z)).sqrt()
}

/// `max{ max_ij ||A_ij|² − B_ij|, max |A − A†|, max |A_ii − cos θ| }`.
pub fn iteration_residual<T: Scalar>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>, cos_theta: T) -> T {
    let targets: Vec<T> = b.as_slice().iter().map(|z| z.re).collect();
    residual_against(a, &targets, cos_theta)
}

pub(crate) fn residual_against<T: Scalar>(a: &ComplexMatrix<T>, targets: &[T], cos_theta: T) -> T {
    let n = a.rows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in 0..n {
            let z = a[(i, j)];
            worst = worst.max((modulus_sqr(z) - targets[i * n + j]).abs());
            if i == j {
                worst = worst.max(modulus(z - creal(cos_theta)));
            } else if j > i {
                worst = worst.max(modulus(z - a[(j, i)].conj()));
            }
        }
    }
    worst
}
