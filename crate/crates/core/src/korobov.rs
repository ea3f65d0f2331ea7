//! Worst-case errors in the weighted Korobov space and their bounds.

use crate::dd::DoubleDouble;
use crate::error::{CbcError, Result};
use crate::kernel::{KernelKind, KernelProfile};
use crate::params::{GeneralWeights, ReductionSchedule, SpaceParams, Weights, MAX_GENERAL_DIM};
use crate::special::riemann_zeta;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatticeKind {
    /// Integer generating vector, nodes `{n z / N}`.
    Rank1,
    /// Polynomial generating vector over `F_b`, nodes `ν(n g / x^m)`; the
    /// components hold the integer encoding `Σ a_i b^i` of `Σ a_i x^i`.
    Polynomial,
}

/// Constructed components `z_j`, their effective values `Y_j z_j mod N`, and
/// the squared error after each coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratingVector {
    pub kind: LatticeKind,
    pub base: u64,
    pub m: u32,
    pub reduction: Vec<u32>,
    pub components: Vec<u64>,
    pub effective: Vec<u64>,
    /// `e²_{N,d}` for `d = 1..=s`; empty when the vector was not constructed
    /// by one of the CBC engines.
    pub trace: Vec<f64>,
}

impl GeneratingVector {
    /// Builds a vector from raw components, checking `z_j ∈ Z_{N,w_j}`.
    pub fn from_components(
        kind: LatticeKind,
        schedule: &ReductionSchedule,
        components: Vec<u64>,
    ) -> Result<Self> {
        if components.len() != schedule.len() {
            return Err(CbcError::DimensionMismatch(format!(
                "{} components for a schedule of length {}",
                components.len(),
                schedule.len()
            )));
        }
        for (dim, &z) in components.iter().enumerate() {
            if !is_candidate(schedule, dim, z) {
                return Err(CbcError::Validation(format!(
                    "component z_{} = {z} is not in its candidate set (w = {})",
                    dim + 1,
                    schedule.w(dim)
                )));
            }
        }
        let effective = components
            .iter()
            .enumerate()
            .map(|(dim, &z)| schedule.effective(dim, z))
            .collect();
        Ok(Self {
            kind,
            base: schedule.base(),
            m: schedule.m(),
            reduction: schedule.exponents().to_vec(),
            components,
            effective,
            trace: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn n_points(&self) -> u64 {
        self.base.pow(self.m)
    }

    pub fn schedule(&self, params: &SpaceParams) -> Result<ReductionSchedule> {
        ReductionSchedule::new(self.reduction.clone(), params)
    }

    fn check(&self, params: &SpaceParams, kind: LatticeKind, weights: &Weights) -> Result<()> {
        if self.kind != kind {
            return Err(CbcError::DimensionMismatch(format!(
                "expected a {kind:?} generating vector, got {:?}",
                self.kind
            )));
        }
        if self.base != params.base() || self.m != params.m() {
            return Err(CbcError::DimensionMismatch(format!(
                "vector for b={}, m={} used with b={}, m={}",
                self.base,
                self.m,
                params.base(),
                params.m()
            )));
        }
        if self.dim() == 0 {
            return Err(CbcError::DimensionMismatch("empty generating vector".into()));
        }
        if weights.dim() < self.dim() {
            return Err(CbcError::DimensionMismatch(format!(
                "weights cover {} coordinates, vector has {}",
                weights.dim(),
                self.dim()
            )));
        }
        Ok(())
    }
}

pub(crate) fn is_candidate(schedule: &ReductionSchedule, dim: usize, z: u64) -> bool {
    let w = schedule.w(dim);
    let m = schedule.m();
    if w >= m {
        z == 1
    } else {
        let b = schedule.base();
        z >= 1 && z < b.pow(m - w) && z % b != 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorMethod {
    ProductFast,
    GeneralSubset,
    DualOracle,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub squared_error: f64,
    /// `log10 e = log10 sqrt(e²)`.
    pub log10_error: f64,
    /// Right-hand side of the CBC error bound at `λ = 1` for the full vector.
    pub bound_lambda1: f64,
    pub method: ErrorMethod,
}

impl ErrorReport {
    pub(crate) fn new(squared_error: f64, bound_lambda1: f64, method: ErrorMethod) -> Self {
        Self {
            squared_error,
            log10_error: 0.5 * squared_error.log10(),
            bound_lambda1,
            method,
        }
    }
}

/// `−1 + (1/N) Σ_n Π_j (1 + γ_j φ[idx_j(n)])`, where `fill_index(j, buf)`
/// writes the table index of coordinate `j` for every `n`.
pub(crate) fn product_form_error<F>(n_points: usize, gammas: &[f64], phi: &[f64], mut fill_index: F) -> f64
where
    F: FnMut(usize, &mut [u32]),
{
    let mut eta = vec![1.0f64; n_points];
    let mut index = vec![0u32; n_points];
    for (dim, &gamma) in gammas.iter().enumerate() {
        fill_index(dim, &mut index);
        for (e, &i) in eta.iter_mut().zip(&index) {
            *e *= 1.0 + gamma * phi[i as usize];
        }
    }
    let sum: DoubleDouble = eta.iter().map(|&e| DoubleDouble::from_f64(e) - 1.0).sum();
    (sum / n_points as f64).to_f64()
}

/// `Σ_{∅≠u} γ_u (1/N) Σ_n Π_{j∈u} φ[idx_j(n)]` by subset recursion per node.
pub(crate) fn subset_form_error<F>(
    n_points: usize,
    weights: &GeneralWeights,
    phi: &[f64],
    mut fill_index: F,
) -> f64
where
    F: FnMut(usize, &mut [u32]),
{
    let s = weights.dim();
    let mut index = vec![vec![0u32; n_points]; s];
    for (dim, buf) in index.iter_mut().enumerate() {
        fill_index(dim, buf);
    }
    let mut prod = vec![1.0f64; 1usize << s];
    let mut total = DoubleDouble::ZERO;
    for n in 0..n_points {
        let mut acc = 0.0;
        for mask in 1..prod.len() {
            let low = mask.trailing_zeros() as usize;
            prod[mask] = prod[mask & (mask - 1)] * phi[index[low][n] as usize];
            acc += weights.gamma(mask) * prod[mask];
        }
        total += acc;
    }
    (total / n_points as f64).to_f64()
}

/// Writes `(n · eff) mod N` for `n = 0..N`.
pub(crate) fn fill_rank1_index(eff: u64, n_points: u64, buf: &mut [u32]) {
    let mut acc = 0u64;
    for slot in buf.iter_mut() {
        *slot = acc as u32;
        acc += eff;
        if acc >= n_points {
            acc -= n_points;
        }
    }
}

/// Exact squared worst-case error for product weights in `O(sN)`.
pub fn wce_product(
    params: &SpaceParams,
    weights: &Weights,
    vector: &GeneratingVector,
    profile: &KernelProfile,
) -> Result<ErrorReport> {
    profile.check_against(params, KernelKind::Korobov)?;
    vector.check(params, LatticeKind::Rank1, weights)?;
    let gammas = weights.product_gammas().ok_or_else(|| {
        CbcError::Validation("wce_product requires product weights".into())
    })?;
    let s = vector.dim();
    let n = params.n_points();
    let e2 = product_form_error(n as usize, &gammas[..s], profile.values(), |dim, buf| {
        fill_rank1_index(vector.effective[dim], n, buf)
    });
    let schedule = vector.schedule(params)?;
    let bound = theorem_bound(params, weights, &schedule, s, 1.0)?;
    Ok(ErrorReport::new(e2, bound, ErrorMethod::ProductFast))
}

/// Exact squared worst-case error for general weights, `O(2^s N)`.
pub fn wce_general(
    params: &SpaceParams,
    weights: &Weights,
    vector: &GeneratingVector,
    profile: &KernelProfile,
) -> Result<ErrorReport> {
    profile.check_against(params, KernelKind::Korobov)?;
    vector.check(params, LatticeKind::Rank1, weights)?;
    let s = vector.dim();
    if s > MAX_GENERAL_DIM {
        return Err(CbcError::Capacity(format!(
            "subset evaluation limited to s <= {MAX_GENERAL_DIM}, got {s}"
        )));
    }
    let expanded = weights.expand(s)?;
    let n = params.n_points();
    let e2 = subset_form_error(n as usize, &expanded, profile.values(), |dim, buf| {
        fill_rank1_index(vector.effective[dim], n, buf)
    });
    let schedule = vector.schedule(params)?;
    let bound = theorem_bound(params, weights, &schedule, s, 1.0)?;
    Ok(ErrorReport::new(e2, bound, ErrorMethod::GeneralSubset))
}

/// Truncated dual-lattice sum and a rigorous bound on what was truncated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualSum {
    pub value: f64,
    pub tail_bound: f64,
}

/// `Σ_u γ_u Σ_{h ∈ D_u, |h_j| <= H} ρ_α(h)` enumerated through residue classes
/// mod `N`, with tail bound `Σ_u γ_u |u| T_H (2ζ(α))^{|u|-1}`,
/// `T_H = 2 H^{1-α} / (α − 1)`. A test oracle; cost `O(H + N^{s})`.
pub fn wce_dual_oracle(
    params: &SpaceParams,
    weights: &Weights,
    vector: &GeneratingVector,
    h_max: u64,
) -> Result<DualSum> {
    vector.check(params, LatticeKind::Rank1, weights)?;
    let s = vector.dim();
    if s > 4 {
        return Err(CbcError::Capacity(format!("dual oracle limited to s <= 4, got {s}")));
    }
    let n = params.n_points() as usize;
    if (n as f64).powi(s as i32 - 1) > 5e8 {
        return Err(CbcError::Capacity(format!(
            "dual oracle enumeration N^(s-1) too large for N = {n}, s = {s}"
        )));
    }
    let alpha = params.alpha();
    // S[r] = Σ_{0<|h|<=H, h ≡ r (N)} |h|^{-α}
    let mut residue = vec![DoubleDouble::ZERO; n];
    for h in (1..=h_max).rev() {
        let v = (h as f64).powf(-alpha);
        let r = (h % n as u64) as usize;
        residue[r] += v;
        residue[(n - r) % n] += v;
    }
    let residue: Vec<f64> = residue.into_iter().map(DoubleDouble::to_f64).collect();
    // class[j][t] = Σ_{r : r eff_j ≡ t} S[r]
    let class: Vec<Vec<f64>> = vector
        .effective
        .iter()
        .map(|&eff| {
            let mut c = vec![0.0; n];
            for (r, &v) in residue.iter().enumerate() {
                c[(r as u128 * eff as u128 % n as u128) as usize] += v;
            }
            c
        })
        .collect();

    let expanded = weights.expand(s)?;
    let zeta2 = 2.0 * riemann_zeta(alpha)?;
    let tail_one = 2.0 * (h_max as f64).powf(1.0 - alpha) / (alpha - 1.0);
    let mut value = DoubleDouble::ZERO;
    let mut tail = 0.0;
    for mask in 1..(1usize << s) {
        let gamma = expanded.gamma(mask);
        if gamma == 0.0 {
            continue;
        }
        let dims: Vec<usize> = (0..s).filter(|j| mask >> j & 1 == 1).collect();
        let k = dims.len();
        tail += gamma * k as f64 * tail_one * zeta2.powi(k as i32 - 1);
        let (last, free) = dims.split_last().expect("nonempty subset");
        let mut sum = DoubleDouble::ZERO;
        enumerate_residues(free, n, vector, &residue, 0, 1.0, &mut |t, weight| {
            sum += weight * class[*last][(n - t) % n];
        });
        value += sum * gamma;
    }
    Ok(DualSum {
        value: value.to_f64(),
        tail_bound: tail,
    })
}

fn enumerate_residues(
    dims: &[usize],
    n: usize,
    vector: &GeneratingVector,
    residue: &[f64],
    partial: usize,
    weight: f64,
    visit: &mut dyn FnMut(usize, f64),
) {
    match dims.split_first() {
        None => visit(partial, weight),
        Some((&dim, rest)) => {
            let eff = vector.effective[dim] as u128;
            for (r, &v) in residue.iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                let t = (partial as u128 + r as u128 * eff) % n as u128;
                enumerate_residues(rest, n, vector, residue, t as usize, weight * v, visit);
            }
        }
    }
}

/// `Σ_{∅≠u⊆[d]} γ_u^λ z^{|u|} f(w_{max u})` for every prefix `d = 1..=len`,
/// relying on `w` being nondecreasing so that `max_{j∈u} w_j = w_{max u}`.
pub(crate) fn subset_sum_prefixes(
    weights: &Weights,
    schedule: &ReductionSchedule,
    len: usize,
    lambda: f64,
    z: f64,
    factor: impl Fn(u32) -> f64,
) -> Result<Vec<f64>> {
    if len == 0 || len > schedule.len() || len > weights.dim() {
        return Err(CbcError::DimensionMismatch(format!(
            "prefix length {len} outside 1..={}",
            schedule.len().min(weights.dim())
        )));
    }
    match weights {
        Weights::Product(g) => {
            let mut out = Vec::with_capacity(len);
            let mut prefix_product = 1.0;
            let mut acc = 0.0;
            for k in 0..len {
                let term = g[k].powf(lambda) * z;
                acc += term * factor(schedule.w(k)) * prefix_product;
                prefix_product *= 1.0 + term;
                out.push(acc);
            }
            Ok(out)
        }
        Weights::General(gw) => {
            if len > MAX_GENERAL_DIM {
                return Err(CbcError::Capacity(format!(
                    "subset enumeration limited to s <= {MAX_GENERAL_DIM}"
                )));
            }
            let mut out = Vec::with_capacity(len);
            let mut acc = 0.0;
            for k in 0..len {
                // subsets whose largest element is k
                let f = factor(schedule.w(k));
                for rest in 0..(1usize << k) {
                    let mask = rest | (1 << k);
                    let gamma = gw.gamma(mask);
                    if gamma > 0.0 {
                        acc += gamma.powf(lambda) * z.powi(mask.count_ones() as i32) * f;
                    }
                }
                out.push(acc);
            }
            Ok(out)
        }
    }
}

pub(crate) fn check_lambda(alpha: f64, lambda: f64) -> Result<()> {
    if !(lambda > 1.0 / alpha && lambda <= 1.0) {
        return Err(CbcError::Domain(format!(
            "lambda = {lambda} outside (1/alpha, 1] = ({}, 1]",
            1.0 / alpha
        )));
    }
    Ok(())
}

fn finite_or_inf(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        f64::INFINITY
    }
}

/// CBC error bound for every prefix `d = 1..=len`:
/// `(Σ_{∅≠u⊆[d]} γ_u^λ 2 (2ζ(αλ))^{|u|} / b^{max(0, m − max_{j∈u} w_j)})^{1/λ}`.
pub fn theorem_bound_prefixes(
    params: &SpaceParams,
    weights: &Weights,
    schedule: &ReductionSchedule,
    len: usize,
    lambda: f64,
) -> Result<Vec<f64>> {
    check_lambda(params.alpha(), lambda)?;
    let z = 2.0 * riemann_zeta(params.alpha() * lambda)?;
    let b = params.base() as f64;
    let m = params.m();
    let sums = subset_sum_prefixes(weights, schedule, len, lambda, z, |w| {
        b.powi(-(m.saturating_sub(w) as i32))
    })?;
    Ok(sums
        .into_iter()
        .map(|s| finite_or_inf((2.0 * s).powf(1.0 / lambda)))
        .collect())
}

pub fn theorem_bound(
    params: &SpaceParams,
    weights: &Weights,
    schedule: &ReductionSchedule,
    d: usize,
    lambda: f64,
) -> Result<f64> {
    Ok(*theorem_bound_prefixes(params, weights, schedule, d, lambda)?
        .last()
        .expect("nonempty"))
}

/// Tractability constants for a constructed vector.
#[derive(Clone, Debug, PartialEq)]
pub struct CorollaryConstants {
    /// `c_{s,α,γ,δ,w}` with `e_{N,s} <= c N^{-α/2+δ}`.
    pub c_sadw: f64,
    /// `max_{1<=s'<=s} s'^{-q} Σ_{u⊆[s']} …`: the supremum restricted to the
    /// dimensions actually evaluated. Infinite on overflow.
    pub c_delta_q: f64,
    /// Product-weight upper bound on `c_sadw`; `None` for general weights.
    pub product_bound: Option<f64>,
}

pub fn corollary_constants(
    params: &SpaceParams,
    weights: &Weights,
    schedule: &ReductionSchedule,
    delta: f64,
    q: f64,
    s: usize,
) -> Result<CorollaryConstants> {
    let alpha = params.alpha();
    if !(delta > 0.0 && delta <= (alpha - 1.0) / 2.0) {
        return Err(CbcError::Domain(format!(
            "delta = {delta} outside (0, (alpha-1)/2] = (0, {}]",
            (alpha - 1.0) / 2.0
        )));
    }
    if !(q >= 0.0) {
        return Err(CbcError::Domain(format!("q = {q} must be non-negative")));
    }
    let lambda = 1.0 / (alpha - 2.0 * delta);
    let z = 2.0 * riemann_zeta(alpha * lambda)?;
    let b = params.base() as f64;
    let sums = subset_sum_prefixes(weights, schedule, s, lambda, z, |w| b.powi(w as i32))?;
    let total = *sums.last().expect("nonempty");
    if !(total > 0.0) {
        return Err(CbcError::Validation(
            "weight sum is zero; positive weights are required".into(),
        ));
    }
    let exponent = alpha / 2.0 - delta;
    let c_sadw = finite_or_inf((2.0 * total).powf(exponent));
    let c_delta_q = sums
        .iter()
        .enumerate()
        .map(|(k, v)| v / ((k + 1) as f64).powf(q))
        .fold(0.0, f64::max);
    let product_bound = weights.product_gammas().map(|g| {
        let prod: f64 = (0..s)
            .map(|j| 1.0 + g[j].powf(lambda) * z * b.powi(schedule.w(j) as i32))
            .product();
        finite_or_inf((2.0 * prod).powf(exponent))
    });
    Ok(CorollaryConstants {
        c_sadw,
        c_delta_q: finite_or_inf(c_delta_q),
        product_bound,
    })
}
