//! Levenberg–Marquardt refinement of a nearly converged iterate.
//!
//! The unknowns are the entries of a d×N synthesis matrix `F`. The residual
//! vector stacks the equiangularity conditions `|G_jk|² − 1/α²` for `j < k`,
//! the unit-norm conditions `|f_j|² − 1` and the tightness conditions
//! `FF† − (N/d)·I`. In real mode only the real parts of `F` vary and the
//! imaginary parts of the tightness block are dropped.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;

use crate::linalg::{hermitian_eigen, solve_spd};
use crate::matrix::ComplexMatrix;
use crate::scalar::{creal, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PolishConfig {
    /// Alternating-projection residual below which refinement is attempted.
    /// Zero disables refinement.
    pub threshold: f64,
    pub max_iters: usize,
}

impl Default for PolishConfig {
    fn default() -> Self {
        Self { threshold: 1e-3, max_iters: 200 }
    }
}

/// Shape of the least-squares problem for one (d, N, real_mode).
#[derive(Debug, Clone, Copy)]
pub struct FrameEquations {
    pub d: usize,
    pub n: usize,
    pub real_mode: bool,
}

impl FrameEquations {
    pub fn new(d: usize, n: usize, real_mode: bool) -> Self {
        Self { d, n, real_mode }
    }

    pub fn num_variables(&self) -> usize {
        if self.real_mode { self.d * self.n } else { 2 * self.d * self.n }
    }

    pub fn num_residuals(&self) -> usize {
        let (d, n) = (self.d, self.n);
        let tight = if self.real_mode { d * (d + 1) / 2 } else { d * d };
        n * (n - 1) / 2 + n + tight
    }

    fn stride(&self) -> usize {
        if self.real_mode { 1 } else { 2 }
    }

    /// Index of `Re F_mj` in the variable vector; `Im F_mj` follows it in
    /// complex mode.
    fn var(&self, m: usize, j: usize) -> usize {
        self.stride() * (j * self.d + m)
    }

    pub fn pack<T: Scalar>(&self, f: &ComplexMatrix<T>) -> Vec<T> {
        let mut x = vec![T::zero(); self.num_variables()];
        for j in 0..self.n {
            for m in 0..self.d {
                let k = self.var(m, j);
                x[k] = f[(m, j)].re;
                if !self.real_mode {
                    x[k + 1] = f[(m, j)].im;
                }
            }
        }
        x
    }

    pub fn unpack<T: Scalar>(&self, x: &[T]) -> ComplexMatrix<T> {
        ComplexMatrix::from_fn(self.d, self.n, |m, j| {
            let k = self.var(m, j);
            if self.real_mode { creal(x[k]) } else { Complex::new(x[k], x[k + 1]) }
        })
    }

    fn overlap_target<T: Scalar>(&self) -> T {
        let (d, n) = (T::from_usize_lossy(self.d), T::from_usize_lossy(self.n));
        (n - d) / (d * (n - T::one()))
    }

    pub fn residuals<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        let f = self.unpack(x);
        let g = f.adjoint_mul(&f);
        let s = f.matmul(&f.adjoint());
        let (d, n) = (self.d, self.n);
        let target = self.overlap_target::<T>();
        let ratio = T::from_usize_lossy(n) / T::from_usize_lossy(d);
        let mut r = Vec::with_capacity(self.num_residuals());
        for j in 0..n {
            for k in j + 1..n {
                r.push(g[(j, k)].norm_sqr() - target);
            }
        }
        for j in 0..n {
            r.push(g[(j, j)].re - T::one());
        }
        for a in 0..d {
            r.push(s[(a, a)].re - ratio);
            for b in a + 1..d {
                r.push(s[(a, b)].re);
                if !self.real_mode {
                    r.push(s[(a, b)].im);
                }
            }
        }
        r
    }

    pub fn jacobian<T: Scalar>(&self, x: &[T]) -> DMatrix<T> {
        let f = self.unpack(x);
        let g = f.adjoint_mul(&f);
        let (d, n) = (self.d, self.n);
        let complex = !self.real_mode;
        let two = T::lit(2.0);
        let mut jac = DMatrix::zeros(self.num_residuals(), self.num_variables());
        let mut row = 0;
        for j in 0..n {
            for k in j + 1..n {
                let gc = g[(j, k)].conj();
                for m in 0..d {
                    let a = gc * f[(m, k)];
                    let b = gc * f[(m, j)].conj();
                    let (vj, vk) = (self.var(m, j), self.var(m, k));
                    jac[(row, vj)] = two * a.re;
                    jac[(row, vk)] = two * b.re;
                    if complex {
                        jac[(row, vj + 1)] = two * a.im;
                        jac[(row, vk + 1)] = -two * b.im;
                    }
                }
                row += 1;
            }
        }
        for j in 0..n {
            for m in 0..d {
                let v = self.var(m, j);
                jac[(row, v)] = two * f[(m, j)].re;
                if complex {
                    jac[(row, v + 1)] = two * f[(m, j)].im;
                }
            }
            row += 1;
        }
        for a in 0..d {
            for j in 0..n {
                let v = self.var(a, j);
                jac[(row, v)] = two * f[(a, j)].re;
                if complex {
                    jac[(row, v + 1)] = two * f[(a, j)].im;
                }
            }
            row += 1;
            for b in a + 1..d {
                // S_ab = Σ_j F_aj conj(F_bj)
                for j in 0..n {
                    let (fa, fb) = (f[(a, j)], f[(b, j)]);
                    let (va, vb) = (self.var(a, j), self.var(b, j));
                    // ∂/∂Re F_aj = conj(F_bj), ∂/∂Im F_aj = i conj(F_bj),
                    // ∂/∂Re F_bj = F_aj, ∂/∂Im F_bj = −i F_aj
                    jac[(row, va)] = fb.re;
                    jac[(row, vb)] = fa.re;
                    if complex {
                        jac[(row, va + 1)] = fb.im;
                        jac[(row, vb + 1)] = fa.im;
                        jac[(row + 1, va)] = -fb.im;
                        jac[(row + 1, vb)] = fa.im;
                        jac[(row + 1, va + 1)] = fb.re;
                        jac[(row + 1, vb + 1)] = -fa.re;
                    }
                }
                row += if complex { 2 } else { 1 };
            }
        }
        debug_assert_eq!(row, self.num_residuals());
        jac
    }
}

fn max_abs<T: Scalar>(r: &[T]) -> T {
    r.iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

fn half_sq<T: Scalar>(r: &[T]) -> T {
    r.iter().fold(T::zero(), |s, v| s + *v * *v) * T::lit(0.5)
}

/// Damped Gauss–Newton on the frame equations starting from `x0`. Returns
/// the final point and its largest absolute residual.
pub fn levenberg_marquardt<T: Scalar>(eqs: &FrameEquations, x0: Vec<T>, max_iters: usize, target: T) -> (Vec<T>, T) {
    let mut x = x0;
    let mut r = eqs.residuals(&x);
    let mut cost = half_sq(&r);
    let mut mu: Option<T> = None;
    let mut nu = T::lit(2.0);
    for _ in 0..max_iters {
        if max_abs(&r) <= target {
            break;
        }
        let jac = eqs.jacobian(&x);
        let jtj = jac.tr_mul(&jac);
        let grad: DVector<T> = jac.tr_mul(&DVector::from_column_slice(&r));
        let damping = *mu.get_or_insert_with(|| {
            T::lit(1e-3) * (0..jtj.nrows()).fold(T::zero(), |m, i| m.max(jtj[(i, i)]))
        });
        let mut system = jtj.clone();
        for i in 0..system.nrows() {
            system[(i, i)] += damping;
        }
        let neg_grad: Vec<T> = grad.iter().map(|g| -*g).collect();
        let Some(step) = solve_spd(system, &neg_grad) else {
            mu = Some(damping * nu);
            nu *= T::lit(2.0);
            continue;
        };
        let trial: Vec<T> = x.iter().zip(&step).map(|(a, b)| *a + *b).collect();
        let trial_r = eqs.residuals(&trial);
        let trial_cost = half_sq(&trial_r);
        // predicted decrease ½ δᵀ(μδ − g)
        let predicted = step
            .iter()
            .zip(grad.iter())
            .fold(T::zero(), |s, (h, g)| s + *h * (damping * *h - *g))
            * T::lit(0.5);
        let rho = if predicted > T::zero() { (cost - trial_cost) / predicted } else { -T::one() };
        if rho > T::zero() {
            x = trial;
            r = trial_r;
            cost = trial_cost;
            let t = T::lit(2.0) * rho - T::one();
            mu = Some(damping * T::lit(1.0 / 3.0).max(T::one() - t * t * t));
            nu = T::lit(2.0);
        } else {
            mu = Some(damping * nu);
            nu *= T::lit(2.0);
        }
        if damping > T::lit(1e20) {
            break;
        }
    }
    let worst = max_abs(&r);
    (x, worst)
}

/// Leading d-dimensional factor of the Gram matrix implied by an iterate `a`
/// close to a signature with diagonal `cos_theta`, with unit columns.
pub fn initial_frame<T: Scalar>(a: &ComplexMatrix<T>, cos_theta: T, d: usize, real_mode: bool) -> ComplexMatrix<T> {
    let n = a.rows();
    let scale = T::from_usize_lossy(n) / (T::lit(2.0) * T::from_usize_lossy(d));
    let mut h = a.hermitian_part();
    for i in 0..n {
        h[(i, i)] = creal(cos_theta);
    }
    let g = (&ComplexMatrix::identity(n) - &h).scale(scale);
    let mut f = if real_mode {
        let re = DMatrix::from_fn(n, n, |i, j| g[(i, j)].re);
        let eig = SymmetricEigen::new(re);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&p, &q| eig.eigenvalues[q].partial_cmp(&eig.eigenvalues[p]).unwrap_or(std::cmp::Ordering::Equal));
        ComplexMatrix::from_fn(d, n, |k, j| {
            let lambda = eig.eigenvalues[order[k]].max(T::zero());
            creal(eig.eigenvectors[(j, order[k])] * lambda.sqrt())
        })
    } else {
        let (values, vectors) = hermitian_eigen(&g);
        ComplexMatrix::from_fn(d, n, |k, j| vectors[(j, k)].conj() * values[k].max(T::zero()).sqrt())
    };
    for j in 0..n {
        let norm = (0..d).fold(T::zero(), |s, m| s + f[(m, j)].norm_sqr()).sqrt();
        if norm > T::zero() {
            for m in 0..d {
                f[(m, j)] = f[(m, j)] / norm;
            }
        }
    }
    f
}

/// Refines the iterate and returns the signature `I − (2d/N)·F†F` of the
/// refined frame, or `None` when the refinement does not reach `target`.
pub fn polish_signature<T: Scalar>(
    a: &ComplexMatrix<T>,
    cos_theta: T,
    d: usize,
    real_mode: bool,
    max_iters: usize,
    target: T,
) -> Option<ComplexMatrix<T>> {
    let n = a.rows();
    let eqs = FrameEquations::new(d, n, real_mode);
    let f0 = initial_frame(a, cos_theta, d, real_mode);
    let (x, worst) = levenberg_marquardt(&eqs, eqs.pack(&f0), max_iters, target);
    if !(worst <= target) {
        return None;
    }
    let f = eqs.unpack(&x);
    let scale = T::lit(2.0) * T::from_usize_lossy(d) / T::from_usize_lossy(n);
    let mut u = &ComplexMatrix::identity(n) - &f.adjoint_mul(&f).scale(scale);
    // F†F is hermitian up to rounding; make it exact and pin the diagonal
    let h = u.hermitian_part();
    u = h;
    for i in 0..n {
        u[(i, i)] = creal(cos_theta);
    }
    Some(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::projections::{seed_matrix, seed_rng};

    fn finite_difference_check(real_mode: bool) {
        let eqs = FrameEquations::new(3, 7, real_mode);
        let f: ComplexMatrix<f64> = seed_matrix(7, real_mode, &mut seed_rng(9, 1));
        let f = ComplexMatrix::from_fn(3, 7, |m, j| f[(m, j)]);
        let x = eqs.pack(&f);
        let jac = eqs.jacobian(&x);
        let h = 1e-6;
        for v in 0..x.len() {
            let mut plus = x.clone();
            let mut minus = x.clone();
            plus[v] += h;
            minus[v] -= h;
            let rp = eqs.residuals(&plus);
            let rm = eqs.residuals(&minus);
            for row in 0..rp.len() {
                let fd = (rp[row] - rm[row]) / (2.0 * h);
                assert!(
                    (fd - jac[(row, v)]).abs() < 1e-6,
                    "row {row} var {v}: analytic {} numeric {fd}",
                    jac[(row, v)]
                );
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        finite_difference_check(false);
        finite_difference_check(true);
    }

    #[test]
    fn residual_count_matches_layout() {
        for &(d, n, real) in &[(2, 4, false), (3, 7, true), (1, 3, false)] {
            let eqs = FrameEquations::new(d, n, real);
            let x = vec![0.1; eqs.num_variables()];
            assert_eq!(eqs.residuals(&x).len(), eqs.num_residuals());
        }
    }

    #[test]
    fn perturbed_simplex_is_restored() {
        // ETF(2,3): the Mercedes-Benz frame, perturbed
        let eqs = FrameEquations::new(2, 3, true);
        let angles = [0.0f64, 2.0943951023931957, 4.1887902047863905];
        let f = ComplexMatrix::from_real_fn(2, 3, |m, j| if m == 0 { angles[j].cos() } else { angles[j].sin() });
        let mut x = eqs.pack(&f);
        x[1] += 0.05;
        x[4] -= 0.03;
        let (x, worst) = levenberg_marquardt(&eqs, x, 100, 1e-14);
        assert!(worst <= 1e-14, "worst {worst}");
        assert!(max_abs(&eqs.residuals(&x)) <= 1e-14);
    }
}
