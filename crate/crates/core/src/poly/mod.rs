//! Polynomial lattice rules over `F_b` with modulus `x^m`.
//!
//! A polynomial `Σ a_i x^i` of degree `< m` is identified with the integer
//! `Σ a_i b^i`; under this encoding `ν(f / x^m) = enc(f mod x^m) / b^m` and
//! multiplication by `x^w` is `enc · b^w mod b^m`.

mod lemma;
mod walsh;

pub use lemma::{check_unit_group_lemma, LemmaCheck};
pub use walsh::{
    mu_b, reduced_cbc_poly, theorem_bound_walsh, theorem_bound_walsh_prefixes, walsh_kernel_table,
    wce_walsh_general, wce_walsh_product, WalshKernelProfile,
};

use crate::error::{CbcError, Result};
use crate::params::is_prime;

/// Polynomial over `F_b`, little-endian coefficients with no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyF {
    base: u64,
    coeffs: Vec<u64>,
}

impl PolyF {
    pub fn new(base: u64, coeffs: Vec<u64>) -> Result<Self> {
        if !is_prime(base) {
            return Err(CbcError::Domain(format!("base {base} is not prime")));
        }
        if let Some(c) = coeffs.iter().find(|&&c| c >= base) {
            return Err(CbcError::Validation(format!(
                "coefficient {c} is not a digit in base {base}"
            )));
        }
        let mut p = Self { base, coeffs };
        p.trim();
        Ok(p)
    }

    pub fn zero(base: u64) -> Self {
        Self {
            base,
            coeffs: Vec::new(),
        }
    }

    /// `x^k`.
    pub fn monomial(base: u64, k: usize) -> Self {
        let mut coeffs = vec![0; k + 1];
        coeffs[k] = 1;
        Self { base, coeffs }
    }

    /// Polynomial whose coefficients are the base-`b` digits of `n`.
    pub fn from_int(mut n: u64, base: u64) -> Result<Self> {
        if !is_prime(base) {
            return Err(CbcError::Domain(format!("base {base} is not prime")));
        }
        let mut coeffs = Vec::new();
        while n > 0 {
            coeffs.push(n % base);
            n /= base;
        }
        Ok(Self { base, coeffs })
    }

    /// Integer encoding `Σ a_i b^i`, or `None` if it overflows.
    pub fn to_int(&self) -> Option<u64> {
        self.coeffs
            .iter()
            .rev()
            .try_fold(0u64, |acc, &c| acc.checked_mul(self.base)?.checked_add(c))
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn reduce(&self, m: u32) -> Self {
        let mut p = Self {
            base: self.base,
            coeffs: self.coeffs.iter().take(m as usize).copied().collect(),
        };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }
}

/// `(a · c) mod x^m` with coefficients in `F_b`.
pub fn poly_mul_mod(a: &PolyF, c: &PolyF, m: u32) -> Result<PolyF> {
    if a.base != c.base {
        return Err(CbcError::DimensionMismatch(format!(
            "polynomials over F_{} and F_{}",
            a.base, c.base
        )));
    }
    let b = a.base;
    let m = m as usize;
    let len = (a.coeffs.len() + c.coeffs.len()).saturating_sub(1).min(m);
    let mut out = vec![0u64; len];
    for (i, &ai) in a.coeffs.iter().enumerate().take(len) {
        if ai == 0 {
            continue;
        }
        for (j, &cj) in c.coeffs.iter().enumerate().take(len - i) {
            out[i + j] = (out[i + j] + ai * cj) % b;
        }
    }
    let mut p = PolyF {
        base: b,
        coeffs: out,
    };
    p.trim();
    Ok(p)
}

/// `ν(f / x^m) = Σ_{i<m} a_i b^{i−m}` after reduction mod `x^m`.
pub fn nu_map(f: &PolyF, m: u32) -> f64 {
    let b = f.base as f64;
    f.coeffs
        .iter()
        .take(m as usize)
        .enumerate()
        .rev()
        .fold(0.0, |acc, (i, &a)| acc + a as f64 * b.powi(i as i32 - m as i32))
}

/// Digitwise sum of two encodings with `m` digits.
fn digit_add(mut x: u64, mut y: u64, b: u64, m: u32) -> u64 {
    if b == 2 {
        return x ^ y;
    }
    let mut out = 0;
    let mut place = 1;
    for _ in 0..m {
        out += ((x % b + y % b) % b) * place;
        x /= b;
        y /= b;
        place *= b;
    }
    out
}

/// `enc(n · g mod x^m)` for every `n < b^m`, where `g` is given by its
/// encoding.
///
/// Uses `n · g = (n − x^i) · g + x^i g` with `i` the lowest nonzero digit
/// position of `n`, so each entry costs one digitwise addition.
pub(crate) fn multiples_table(g: u64, b: u64, m: u32, out: &mut [u32]) {
    let n_points = b.pow(m);
    debug_assert_eq!(out.len() as u64, n_points);
    // shifted[i] = enc(x^i g mod x^m)
    let shifted: Vec<u64> = (0..m)
        .map(|i| (g as u128 * b.pow(i) as u128 % n_points as u128) as u64)
        .collect();
    out[0] = 0;
    for n in 1..n_points {
        let mut i = 0;
        let mut place = 1;
        while (n / place) % b == 0 {
            i += 1;
            place *= b;
        }
        let prev = out[(n - place) as usize] as u64;
        out[n as usize] = digit_add(prev, shifted[i], b, m) as u32;
    }
}

/// Points `x_n = (ν(n g_1 / x^m), …, ν(n g_s / x^m))`, `deg n < m`, with `n`
/// ordered by its integer encoding.
pub fn plattice_points(g: &[PolyF], m: u32) -> Result<Vec<Vec<f64>>> {
    let Some(first) = g.first() else {
        return Err(CbcError::DimensionMismatch("empty generating vector".into()));
    };
    let b = first.base;
    let n_points = b
        .checked_pow(m)
        .filter(|&n| n <= u32::MAX as u64)
        .ok_or_else(|| CbcError::Capacity(format!("{b}^{m} points")))?;
    let scale = 1.0 / n_points as f64;
    let mut columns = Vec::with_capacity(g.len());
    let mut buf = vec![0u32; n_points as usize];
    for gj in g {
        if gj.base != b {
            return Err(CbcError::DimensionMismatch("mixed bases in generating vector".into()));
        }
        let enc = gj.reduce(m).to_int().expect("reduced polynomial fits");
        multiples_table(enc, b, m, &mut buf);
        columns.push(buf.iter().map(|&v| v as f64 * scale).collect::<Vec<f64>>());
    }
    Ok((0..n_points as usize)
        .map(|n| columns.iter().map(|c| c[n]).collect())
        .collect())
}
