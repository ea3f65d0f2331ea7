//! Precomputed kernel value tables at the `N` nodes of a rule.

use crate::dd::{exact_sum, DoubleDouble};
use crate::error::{CbcError, Result};
use crate::params::SpaceParams;
use crate::special::{bernoulli_numbers, binomial, lcm};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    /// `φ_α(x) = Σ_{h≠0} e^{2πihx} |h|^{-α}` at `x = n/N`.
    Korobov,
    /// Walsh-space kernel at `x = ν(n / x^m) = n / b^m`.
    Walsh,
}

/// `φ` tabulated at `n / b^m`, `n = 0..b^m`.
///
/// Entries are held as double-double pairs; [`values`](Self::values) is the
/// rounded `f64` view used by the constructions.
#[derive(Clone, Debug)]
pub struct KernelProfile {
    kind: KernelKind,
    alpha: f64,
    base: u64,
    m: u32,
    values: Vec<f64>,
    residuals: Vec<f64>,
    mu: Option<f64>,
}

/// `ρ_α(h) = |h|^{-α}` for `h ≠ 0`.
pub fn rho_alpha(h: i64, alpha: f64) -> f64 {
    debug_assert!(h != 0);
    (h.unsigned_abs() as f64).powf(-alpha)
}

impl KernelProfile {
    pub(crate) fn from_dd(
        kind: KernelKind,
        alpha: f64,
        base: u64,
        m: u32,
        table: Vec<DoubleDouble>,
        mu: Option<f64>,
    ) -> Self {
        let (values, residuals) = table.iter().map(|v| (v.hi, v.lo)).unzip();
        Self {
            kind,
            alpha,
            base,
            m,
            values,
            residuals,
            mu,
        }
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `μ_b(α)` for Walsh tables.
    pub fn mu(&self) -> Option<f64> {
        self.mu
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_dd(&self, n: usize) -> DoubleDouble {
        DoubleDouble {
            hi: self.values[n],
            lo: self.residuals[n],
        }
    }

    /// `(1/N) Σ_n φ(n/N)`, summed exactly over the stored double-double entries.
    pub fn mean(&self) -> f64 {
        let sum = exact_sum(self.values.iter().chain(&self.residuals).copied());
        (sum / self.len() as f64).to_f64()
    }

    /// `φ(v / b^level)` for `level <= m`, read from the finer table.
    #[inline]
    pub fn at_level(&self, level: u32, v: u64) -> f64 {
        let stride = self.base.pow(self.m - level);
        self.values[(v * stride) as usize]
    }

    pub(crate) fn check_against(&self, params: &SpaceParams, kind: KernelKind) -> Result<()> {
        if self.kind != kind {
            return Err(CbcError::DimensionMismatch(format!(
                "expected a {kind:?} kernel profile, got {:?}",
                self.kind
            )));
        }
        if self.base != params.base() || self.m != params.m() || self.alpha != params.alpha() {
            return Err(CbcError::DimensionMismatch(format!(
                "profile for (b={}, m={}, alpha={}) used with (b={}, m={}, alpha={})",
                self.base,
                self.m,
                self.alpha,
                params.base(),
                params.m(),
                params.alpha()
            )));
        }
        Ok(())
    }
}

/// Korobov kernel table via the Bernoulli polynomial identity
/// `φ_α(x) = (−1)^{(α+2)/2} (2π)^α / α! · B_α({x})` for even `α`.
///
/// `B_α(n/N)` is evaluated as an exact integer numerator over `D N^α` when
/// that fits in 128 bits, so each entry carries only the rounding of the
/// final scaling.
pub fn phi_korobov_table(params: &SpaceParams) -> Result<KernelProfile> {
    let a = params
        .even_alpha()
        .ok_or(CbcError::UnsupportedSmoothness(params.alpha()))?;
    if a > 30 {
        return Err(CbcError::UnsupportedSmoothness(params.alpha()));
    }
    let n_points = params.n_points();
    let bern = bernoulli_numbers(a as usize)?;

    // φ = sign · (2π)^a / a! · B_a(x)
    let mut scale = (DoubleDouble::PI * 2.0).powi(a as i32);
    for k in 2..=a {
        scale = scale / k as f64;
    }
    // (−1)^{(a+2)/2} is −1 exactly when a/2 is even
    if (a / 2) % 2 == 0 {
        scale = -scale;
    }

    let table = match exact_numerators(a, n_points, &bern) {
        Some((numerators, denom)) => {
            // B_a(n/N) = P(n) / (D N^a)
            let scale = scale
                / DoubleDouble::from_i128(denom)
                / DoubleDouble::from_f64(n_points as f64).powi(a as i32);
            numerators
                .into_iter()
                .map(|p| scale * DoubleDouble::from_i128(p))
                .collect()
        }
        None => {
            // polynomial in x = n/N with double-double coefficients
            let coeffs: Vec<DoubleDouble> = (0..=a)
                .map(|k| {
                    let (num, den) = bern[k as usize];
                    DoubleDouble::from_i128(binomial(a, k) * num) / DoubleDouble::from_i128(den)
                })
                .collect();
            let inv_n = DoubleDouble::ONE / n_points as f64;
            (0..n_points)
                .map(|n| {
                    let x = inv_n * n as f64;
                    // Σ_k coeffs[k] x^{a-k}, Horner from k = 0
                    let b = coeffs
                        .iter()
                        .fold(DoubleDouble::ZERO, |acc, c| acc * x + *c);
                    scale * b
                })
                .collect()
        }
    };
    Ok(KernelProfile::from_dd(
        KernelKind::Korobov,
        params.alpha(),
        params.base(),
        params.m(),
        table,
        None,
    ))
}

/// Integer numerators `P(n) = D N^a B_a(n/N)` and the common denominator `D`,
/// or `None` if any intermediate would overflow.
fn exact_numerators(a: u32, n_points: u64, bern: &[(i128, i128)]) -> Option<(Vec<i128>, i128)> {
    let denom = (0..=a).fold(1i128, |acc, k| lcm(acc, bern[k as usize].1));
    // coef_k = C(a,k) B_k D N^k
    let n = n_points as i128;
    let mut coefs = Vec::with_capacity(a as usize + 1);
    let mut n_pow: i128 = 1;
    let mut bound = 0f64;
    for k in 0..=a {
        let (num, den) = bern[k as usize];
        let c = binomial(a, k).checked_mul(num)?.checked_mul(denom / den)?;
        let c = c.checked_mul(n_pow)?;
        bound += (c as f64).abs() * (n_points as f64).powi((a - k) as i32);
        coefs.push(c);
        if k < a {
            n_pow = n_pow.checked_mul(n)?;
        }
    }
    if bound >= 2f64.powi(125) {
        return None;
    }
    let numerators = (0..n)
        .map(|i| coefs.iter().fold(0i128, |acc, c| acc * i + c))
        .collect();
    Some((numerators, denom))
}
