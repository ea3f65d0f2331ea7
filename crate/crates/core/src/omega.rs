//! The structured matrix `Ω^{(k)} = [φ(z n mod b^k / b^k)]_{z ∈ U_k, n < b^k}`
//! and its `O(b^k log b^k)` product through the cyclic structure of the unit
//! group `U_k = (Z/b^k Z)^×`.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::cbc::OpCounters;
use crate::error::{CbcError, Result};
use crate::kernel::KernelProfile;
use crate::params::is_prime;

/// Invariant factor decomposition of `U_k` for a prime `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitGroupStructure {
    pub order: u64,
    /// Cyclic factor orders, each dividing the next; empty for the trivial group.
    pub invariant_factors: Vec<u64>,
    /// One generator per factor, as residues mod `b^k`.
    pub generators: Vec<u64>,
}

fn pow_mod(a: u64, mut e: u64, n: u64) -> u64 {
    let n = n as u128;
    let mut r = 1u128 % n;
    let mut a = a as u128 % n;
    while e > 0 {
        if e & 1 == 1 {
            r = r * a % n;
        }
        a = a * a % n;
        e >>= 1;
    }
    r as u64
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// A primitive root modulo every power of the odd prime `b`.
fn primitive_root_lifted(b: u64) -> u64 {
    let factors = prime_factors(b - 1);
    let g = (2..b)
        .find(|&g| factors.iter().all(|q| pow_mod(g, (b - 1) / q, b) != 1))
        .unwrap_or(1);
    let b2 = b * b;
    if pow_mod(g, b - 1, b2) == 1 {
        g + b
    } else {
        g
    }
}

pub fn unit_group_structure(b: u64, k: u32) -> Result<UnitGroupStructure> {
    if !is_prime(b) {
        return Err(CbcError::Domain(format!("base {b} is not prime")));
    }
    let modulus = b
        .checked_pow(k)
        .ok_or_else(|| CbcError::Capacity(format!("{b}^{k} overflows")))?;
    if k == 0 {
        return Ok(UnitGroupStructure {
            order: 1,
            invariant_factors: vec![],
            generators: vec![],
        });
    }
    let order = modulus / b * (b - 1);
    let (invariant_factors, generators) = if b == 2 {
        match k {
            1 => (vec![], vec![]),
            2 => (vec![2], vec![3]),
            _ => (vec![2, order / 2], vec![modulus - 1, 3]),
        }
    } else {
        (vec![order], vec![primitive_root_lifted(b) % modulus])
    };
    Ok(UnitGroupStructure {
        order,
        invariant_factors,
        generators,
    })
}

/// Group indexing of `U_ℓ` as `(−1)^s g^i`, `s < sign_order`, `i < cycle`.
struct LevelPlan {
    modulus: u64,
    sign_order: usize,
    cycle: usize,
    /// `elems[s * cycle + i]`
    elems: Vec<u64>,
    /// group index of each unit residue; unused slots hold `u32::MAX`
    dlog: Vec<u32>,
    /// FFT of `c_s[i] = φ(elems[s*cycle + i] / b^ℓ)` for each `s`
    spectra: Vec<Vec<Complex<f64>>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl LevelPlan {
    fn new(profile: &KernelProfile, level: u32, planner: &mut FftPlanner<f64>) -> Self {
        let b = profile.base();
        let modulus = b.pow(level);
        let order = (modulus / b * (b - 1)) as usize;
        let (sign_order, generator) = if b == 2 {
            match level {
                1 => (1, 1),
                2 => (1, 3),
                _ => (2, 3),
            }
        } else {
            (1, primitive_root_lifted(b) % modulus)
        };
        let cycle = order / sign_order;
        let mut elems = Vec::with_capacity(order);
        for s in 0..sign_order {
            let mut e = if s == 0 { 1 } else { modulus - 1 };
            for _ in 0..cycle {
                elems.push(e);
                e = (e as u128 * generator as u128 % modulus as u128) as u64;
            }
        }
        let mut dlog = vec![u32::MAX; modulus as usize];
        for (idx, &e) in elems.iter().enumerate() {
            debug_assert_eq!(dlog[e as usize], u32::MAX);
            dlog[e as usize] = idx as u32;
        }
        let forward = planner.plan_fft_forward(cycle);
        let inverse = planner.plan_fft_inverse(cycle);
        let spectra = (0..sign_order)
            .map(|s| {
                let mut c: Vec<Complex<f64>> = elems[s * cycle..(s + 1) * cycle]
                    .iter()
                    .map(|&e| Complex::new(profile.at_level(level, e), 0.0))
                    .collect();
                forward.process(&mut c);
                c
            })
            .collect();
        Self {
            modulus,
            sign_order,
            cycle,
            elems,
            dlog,
            spectra,
            forward,
            inverse,
        }
    }

    /// `r[idx] = Σ_{u ∈ U_ℓ} φ(elems[idx] u / b^ℓ) x[stride u]`, in group order.
    fn convolve(&self, x: &[f64], stride: usize, counters: &mut OpCounters) -> Vec<f64> {
        let l = self.cycle;
        let fft_cost = (l * log2_ceil(l)) as u64;
        // x'_s[i'] = x[stride · elem(s, −i')]
        let inputs: Vec<Vec<Complex<f64>>> = (0..self.sign_order)
            .map(|s| {
                let mut v: Vec<Complex<f64>> = (0..l)
                    .map(|i| {
                        let e = self.elems[s * l + (l - i) % l];
                        Complex::new(x[stride * e as usize], 0.0)
                    })
                    .collect();
                self.forward.process(&mut v);
                v
            })
            .collect();
        counters.multiply_adds += self.sign_order as u64 * (l as u64 + fft_cost);
        let scale = 1.0 / l as f64;
        let mut out = Vec::with_capacity(self.sign_order * l);
        for sz in 0..self.sign_order {
            let mut acc = vec![Complex::new(0.0, 0.0); l];
            for (su, xs) in inputs.iter().enumerate() {
                let cs = &self.spectra[(sz + su) % self.sign_order];
                for ((a, c), xv) in acc.iter_mut().zip(cs).zip(xs) {
                    *a += c * xv;
                }
            }
            self.inverse.process(&mut acc);
            out.extend(acc.iter().map(|v| v.re * scale));
        }
        counters.multiply_adds +=
            (self.sign_order * self.sign_order * l) as u64 + self.sign_order as u64 * fft_cost;
        out
    }
}

fn log2_ceil(n: usize) -> usize {
    if n <= 1 {
        1
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// `Ω^{(ℓ)}` for every level `ℓ = 1..=k`, sharing one kernel table.
pub struct OmegaOperator {
    profile: KernelProfile,
    levels: Vec<LevelPlan>,
    max_level: u32,
}

impl OmegaOperator {
    pub fn new(profile: &KernelProfile, k: u32) -> Result<Self> {
        if k == 0 || k > profile.m() {
            return Err(CbcError::Domain(format!(
                "omega level {k} outside 1..={}",
                profile.m()
            )));
        }
        let mut planner = FftPlanner::new();
        let levels = (1..=k)
            .map(|level| LevelPlan::new(profile, level, &mut planner))
            .collect();
        Ok(Self {
            profile: profile.clone(),
            levels,
            max_level: k,
        })
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn profile(&self) -> &KernelProfile {
        &self.profile
    }

    /// Units mod `b^level` in ascending order: the row labels of `Ω^{(level)}`.
    pub fn units(&self, level: u32) -> Vec<u64> {
        let b = self.profile.base();
        (1..b.pow(level)).filter(|z| z % b != 0).collect()
    }

    fn check_input(&self, level: u32, x: &[f64]) -> Result<()> {
        if level == 0 || level > self.max_level {
            return Err(CbcError::Domain(format!(
                "omega level {level} outside 1..={}",
                self.max_level
            )));
        }
        let expected = self.profile.base().pow(level) as usize;
        if x.len() != expected {
            return Err(CbcError::DimensionMismatch(format!(
                "omega level {level} expects {expected} entries, got {}",
                x.len()
            )));
        }
        Ok(())
    }

    /// Direct `O(b^{2k})` product, rows in ascending unit order.
    pub fn apply_naive(&self, level: u32, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(level, x)?;
        let modulus = self.profile.base().pow(level);
        Ok(self
            .units(level)
            .into_iter()
            .map(|z| {
                let mut acc = 0.0;
                let mut zn = 0u64;
                for &xn in x {
                    acc += self.profile.at_level(level, zn) * xn;
                    zn = (zn + z) % modulus;
                }
                acc
            })
            .collect())
    }

    pub fn apply_fast(&self, level: u32, x: &[f64]) -> Result<Vec<f64>> {
        let mut counters = OpCounters::default();
        self.apply_fast_level(level, x, &mut counters)
    }

    /// FFT-based product, rows in ascending unit order.
    ///
    /// Columns split as `n = 0` and `n = b^t u` with `u ∈ U_{level−t}`; the
    /// class `t` only depends on `z mod b^{level−t}`, so partial results are
    /// lifted level by level.
    pub fn apply_fast_level(
        &self,
        level: u32,
        x: &[f64],
        counters: &mut OpCounters,
    ) -> Result<Vec<f64>> {
        self.check_input(level, x)?;
        let b = self.profile.base();
        let mut acc: Vec<f64> = Vec::new();
        for l in 1..=level {
            let plan = &self.levels[(l - 1) as usize];
            let stride = b.pow(level - l) as usize;
            let mut r = plan.convolve(x, stride, counters);
            if l > 1 {
                let lower = &self.levels[(l - 2) as usize];
                for (slot, &e) in r.iter_mut().zip(&plan.elems) {
                    *slot += acc[lower.dlog[(e % lower.modulus) as usize] as usize];
                }
                counters.multiply_adds += r.len() as u64;
            }
            acc = r;
        }
        let top = &self.levels[(level - 1) as usize];
        let zero_col = self.profile.at_level(level, 0) * x[0];
        let out: Vec<f64> = self
            .units(level)
            .into_iter()
            .map(|z| acc[top.dlog[z as usize] as usize] + zero_col)
            .collect();
        counters.multiply_adds += out.len() as u64;
        Ok(out)
    }
}

/// `x'[i] = Σ_{n ≡ i (b^{m−w})} x[n]`: folds a length-`b^m` vector onto the
/// coarser grid used by a coordinate with reduction exponent `w`.
pub fn fold_vector(x: &[f64], base: u64, w: u32) -> Result<Vec<f64>> {
    let mut len = x.len() as u64;
    let mut m = 0u32;
    while len > 1 && len % base == 0 {
        len /= base;
        m += 1;
    }
    if len != 1 {
        return Err(CbcError::DimensionMismatch(format!(
            "vector length {} is not a power of {base}",
            x.len()
        )));
    }
    if w > m {
        return Err(CbcError::Domain(format!("fold exponent w = {w} exceeds m = {m}")));
    }
    let target = base.pow(m - w) as usize;
    let mut out = vec![0.0; target];
    for chunk in x.chunks(target) {
        for (o, v) in out.iter_mut().zip(chunk) {
            *o += v;
        }
    }
    Ok(out)
}
