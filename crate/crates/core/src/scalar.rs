use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point type the numerical core is generic over.
///
/// Implemented for `f32` and `f64`. Besides the arithmetic supplied by
/// [`RealField`], each type carries the default tolerances used when a
/// caller does not pass one explicitly; the values for `f64` are the
/// production thresholds, the `f32` ones are scaled to its precision.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Tolerance for entrywise structural invariants (hermiticity,
    /// unitarity, moduli, unit norms).
    const INVARIANT_TOL: f64;
    /// Relative tolerance used when clustering Gram eigenvalues.
    const SPECTRAL_TOL: f64;
    /// Tolerance for exact algebraic identities (roundtrips, idempotence).
    const IDENTITY_TOL: f64;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(x: usize) -> Self {
        Self::from_usize(x).expect("usize representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Scalar for f64 {
    const INVARIANT_TOL: f64 = 1e-8;
    const SPECTRAL_TOL: f64 = 1e-6;
    const IDENTITY_TOL: f64 = 1e-10;
}

impl Scalar for f32 {
    const INVARIANT_TOL: f64 = 1e-4;
    const SPECTRAL_TOL: f64 = 1e-3;
    const IDENTITY_TOL: f64 = 1e-4;
}

/// `e^{i·phase}`.
#[inline]
pub fn cis<T: Scalar>(phase: T) -> Complex<T> {
    Complex::new(phase.cos(), phase.sin())
}

/// `exp(2πi·k/n)`, exact whenever `k/n` is a multiple of a quarter turn.
pub fn root_of_unity<T: Scalar>(k: i64, n: u64) -> Complex<T> {
    assert!(n > 0, "root of unity of order zero");
    let n_i = n as i64;
    let k = k.rem_euclid(n_i);
    if (4 * k) % n_i == 0 {
        return match 4 * k / n_i {
            0 => Complex::new(T::one(), T::zero()),
            1 => Complex::new(T::zero(), T::one()),
            2 => Complex::new(-T::one(), T::zero()),
            _ => Complex::new(T::zero(), -T::one()),
        };
    }
    cis(T::two_pi() * T::lit(k as f64) / T::lit(n as f64))
}

#[inline]
pub fn modulus<T: Scalar>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}

#[inline]
pub fn modulus_sqr<T: Scalar>(z: Complex<T>) -> T {
    z.re * z.re + z.im * z.im
}

#[inline]
pub fn czero<T: Scalar>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub fn cone<T: Scalar>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

#[inline]
pub fn creal<T: Scalar>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}
