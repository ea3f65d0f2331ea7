use crate::error::{CbcError, Result};
use crate::params::is_prime;

use super::{poly_mul_mod, PolyF};

/// Order of the unit group of `F_b[x]/(x^k)` and its number of invariant
/// factors, found by exhaustive enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LemmaCheck {
    pub order: u64,
    pub factor_count: u32,
}

/// Enumerates `U_k = {g : deg g < k, g(0) ≠ 0}` and counts cyclic factors as
/// `max_p log_p |{g ∈ U_k : g^p = 1}|` over the primes `p` dividing the order.
pub fn check_unit_group_lemma(b: u64, k: u32) -> Result<LemmaCheck> {
    if !is_prime(b) {
        return Err(CbcError::Domain(format!("base {b} is not prime")));
    }
    if k == 0 || k > 12 || b.checked_pow(k).is_none_or(|n| n > 1 << 24) {
        return Err(CbcError::Capacity(format!(
            "exhaustive check limited to 1 <= k <= 12 and b^k <= 2^24, got b={b}, k={k}"
        )));
    }
    let modulus = b.pow(k);
    let units: Vec<PolyF> = (1..modulus)
        .filter(|g| g % b != 0)
        .map(|g| PolyF::from_int(g, b))
        .collect::<Result<_>>()?;
    let order = units.len() as u64;
    if order != (b - 1) * b.pow(k - 1) {
        return Err(CbcError::Validation(format!(
            "enumerated {order} units, expected {}",
            (b - 1) * b.pow(k - 1)
        )));
    }
    let one = PolyF::monomial(b, 0);
    let mut primes: Vec<u64> = (2..=b).filter(|&p| is_prime(p) && order % p == 0).collect();
    primes.dedup();
    let mut factor_count = 0u32;
    for p in primes {
        let mut torsion = 0u64;
        for g in &units {
            let mut acc = g.clone();
            for _ in 1..p {
                acc = poly_mul_mod(&acc, g, k)?;
            }
            if acc == one {
                torsion += 1;
            }
        }
        let mut rank = 0u32;
        let mut t = torsion;
        while t > 1 {
            if t % p != 0 {
                return Err(CbcError::Validation(format!(
                    "{p}-torsion of size {torsion} is not a power of {p}"
                )));
            }
            t /= p;
            rank += 1;
        }
        factor_count = factor_count.max(rank);
    }
    if factor_count > k {
        return Err(CbcError::Validation(format!(
            "{factor_count} cyclic factors exceed k = {k}"
        )));
    }
    Ok(LemmaCheck {
        order,
        factor_count,
    })
}
