//! Integrality conditions for Gram matrices whose off-diagonal phases are
//! m-th roots of unity.
//!
//! If every off-diagonal entry of an ETF(d, N) Gram matrix is `ω/α` with `ω`
//! an m-th root of unity, then a row of the signature gives a vanishing sum of
//! `2k + N − 2` m-th roots of unity. By the Lam–Leung theorem such a sum
//! exists only when `2k + N − 2` lies in the numerical semigroup generated by
//! the primes dividing `m`. Everything here is exact integer arithmetic.

use num_rational::Ratio;
use serde::Serialize;

use crate::construct::factorize;
use crate::error::{EtfError, Result};

/// Label carried by every feasibility record.
pub const NECESSARY_ONLY: &str = "necessary condition";

/// `2k` together with its exact square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TwoK {
    /// `(2k)² = (N − 2d)²(N − 1)/(d(N − d))` in lowest terms.
    pub squared_num: i128,
    pub squared_den: i128,
    /// The integer `2k` (negative when `d > N/2`), when `2k` is an integer.
    pub value: Option<i64>,
}

impl TwoK {
    pub fn is_integer(&self) -> bool {
        self.value.is_some()
    }
}

fn isqrt_exact(v: i128) -> Option<i128> {
    if v < 0 {
        return None;
    }
    let mut r = (v as f64).sqrt() as i128;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    (r * r == v).then_some(r)
}

/// `2k = (N − 2d)·sqrt((N − 1)/(d(N − d)))`, decided exactly.
pub fn two_k_exact(d: u64, n: u64) -> Result<TwoK> {
    if d < 1 || d >= n {
        return Err(EtfError::InvalidParameters { d: d as usize, n: n as usize, reason: "requires 1 <= d < n".into() });
    }
    let (d, n) = (d as i128, n as i128);
    let diff = n - 2 * d;
    let num = diff
        .checked_mul(diff)
        .and_then(|v| v.checked_mul(n - 1))
        .ok_or(EtfError::Overflow)?;
    let den = d.checked_mul(n - d).ok_or(EtfError::Overflow)?;
    let squared = Ratio::new(num, den);
    let (sn, sd) = (*squared.numer(), *squared.denom());
    let value = match (isqrt_exact(sn), sd) {
        (Some(root), 1) => Some(i64::try_from(root).map_err(|_| EtfError::Overflow)? * diff.signum() as i64),
        _ => None,
    };
    Ok(TwoK { squared_num: sn, squared_den: sd, value })
}

/// Distinct primes of `m`, ascending.
pub fn prime_support(m: u64) -> Vec<u64> {
    factorize(m).into_iter().map(|(p, _)| p).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SemigroupMembership {
    pub primes: Vec<u64>,
    pub feasible: bool,
    /// Coefficients `x_i ≥ 0` with `Σ x_i p_i = n′`, aligned with `primes`.
    pub witness: Option<Vec<u64>>,
}

/// Whether `n_prime = Σ x_i p_i` over the distinct primes `p_i` of `m` with
/// `x_i ≥ 0`, by dynamic programming over `0..=n_prime`.
pub fn vanishing_sum_feasible(n_prime: u64, m: u64) -> Result<SemigroupMembership> {
    if m < 2 {
        return Err(EtfError::OutOfRange(format!("root order must be at least 2, got {m}")));
    }
    let primes = prime_support(m);
    let target = usize::try_from(n_prime).map_err(|_| EtfError::Overflow)?;
    // via[v] = index of the prime used last to reach v
    let mut via: Vec<Option<usize>> = vec![None; target + 1];
    let mut reachable = vec![false; target + 1];
    reachable[0] = true;
    for v in 1..=target {
        for (i, &p) in primes.iter().enumerate() {
            let p = p as usize;
            if p <= v && reachable[v - p] {
                reachable[v] = true;
                via[v] = Some(i);
                break;
            }
        }
    }
    let witness = reachable[target].then(|| {
        let mut x = vec![0u64; primes.len()];
        let mut v = target;
        while v > 0 {
            let i = via[v].expect("reachable value has a predecessor");
            x[i] += 1;
            v -= primes[i] as usize;
        }
        x
    });
    Ok(SemigroupMembership { primes, feasible: witness.is_some(), witness })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RootsFeasibility {
    pub n: u64,
    pub d: u64,
    pub m: u64,
    pub two_k: TwoK,
    /// `2k + N − 2` when `2k` is an integer and the sum is non-negative.
    pub n_prime: Option<u64>,
    pub feasible: bool,
    pub witness: Option<Vec<u64>>,
    pub primes: Vec<u64>,
    /// `2k < 0`, which happens exactly when `d > N/2`.
    pub negative_two_k: bool,
    /// `d = 1`: all frame vectors coincide up to phase.
    pub trivial: bool,
    pub label: &'static str,
}

impl RootsFeasibility {
    /// Passes the filter as a nontrivial frame with `2k ≥ 0`.
    pub fn compatible(&self) -> bool {
        self.feasible && !self.negative_two_k && !self.trivial
    }
}

/// Evaluates the condition for one `(d, N)` literally.
pub fn roots_feasibility(d: u64, n: u64, m: u64) -> Result<RootsFeasibility> {
    let two_k = two_k_exact(d, n)?;
    let n_prime = two_k.value.and_then(|t| u64::try_from(t + n as i64 - 2).ok());
    let membership = match n_prime {
        Some(v) => vanishing_sum_feasible(v, m)?,
        None => SemigroupMembership { primes: prime_support(m), feasible: false, witness: None },
    };
    Ok(RootsFeasibility {
        n,
        d,
        m,
        two_k,
        n_prime,
        feasible: membership.feasible,
        witness: membership.witness,
        primes: membership.primes,
        negative_two_k: two_k.value.is_some_and(|t| t < 0),
        trivial: d == 1,
        label: NECESSARY_ONLY,
    })
}

/// Every `d` in `1..n` with integer `2k`, each evaluated independently.
pub fn roots_scan(n: u64, m: u64) -> Result<Vec<RootsFeasibility>> {
    if n < 2 {
        return Err(EtfError::OutOfRange(format!("N must be at least 2, got {n}")));
    }
    let mut out = Vec::new();
    for d in 1..n {
        let record = roots_feasibility(d, n, m)?;
        if record.two_k.is_integer() {
            out.push(record);
        }
    }
    Ok(out)
}

/// The nontrivial `d` with `2k ≥ 0` whose `2k + N − 2` is a sum of primes of `m`.
pub fn roots_compatible_etfs(n: u64, m: u64) -> Result<Vec<RootsFeasibility>> {
    Ok(roots_scan(n, m)?.into_iter().filter(RootsFeasibility::compatible).collect())
}

/// Dimensions `d ≤ d_max` for which a SIC (`N = d²`) can have a Gram matrix
/// with root-of-unity phases: `d = 2` or `d + 1` a perfect square.
pub fn sic_root_candidates(d_max: u64) -> Vec<u64> {
    (2..=d_max)
        .filter(|&d| d == 2 || isqrt_exact(d as i128 + 1).is_some())
        .collect()
}
