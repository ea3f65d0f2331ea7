//! Component-by-component construction over reduced candidate sets.

use crate::dd::DoubleDouble;
use crate::error::{CbcError, Result};
use crate::kernel::{phi_korobov_table, KernelKind, KernelProfile};
use crate::korobov::{fill_rank1_index, GeneratingVector, LatticeKind};
use crate::omega::{fold_vector, OmegaOperator};
use crate::params::{ReductionSchedule, SpaceParams, Weights, MAX_GENERAL_DIM};

/// Work counters collected during a construction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounters {
    pub candidate_evaluations: u64,
    pub multiply_adds: u64,
}

/// Relative gap below which two criterion values count as a tie.
const TIE_RELATIVE: f64 = 1e-13;

/// Index of the smallest value, preferring the earliest entry among ties.
pub(crate) fn argmin_with_ties(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        let gap = values[best] - v;
        if gap > TIE_RELATIVE * values[best].abs().max(v.abs()) {
            best = i;
        }
    }
    best
}

/// Running state of the product-weight recursion
/// `η_d(n) = Π_{j<=d} (1 + γ_j φ({n Y_j z_j / N}))`.
///
/// Coordinates with `w_j >= m` multiply every entry by the same factor
/// `1 + γ_j φ(0)`, which is kept in `scale` instead of touching `eta`.
#[derive(Clone, Debug)]
pub struct CbcState {
    pub d: usize,
    pub eta: Vec<f64>,
    pub scale: f64,
    /// Criterion values over the candidate set of the last active step.
    pub td: Vec<f64>,
    pub counters: OpCounters,
}

impl CbcState {
    pub fn new(n_points: usize) -> Self {
        Self {
            d: 0,
            eta: vec![1.0; n_points],
            scale: 1.0,
            td: Vec::new(),
            counters: OpCounters::default(),
        }
    }

    /// `Σ_n (η(n) − 1)` before applying `scale`.
    fn excess(&mut self) -> DoubleDouble {
        self.counters.multiply_adds += self.eta.len() as u64;
        self.eta.iter().map(|&e| DoubleDouble::from_f64(e) - 1.0).sum()
    }

    /// `e²_{N,d} = −1 + scale · (1/N) Σ η(n)`.
    pub fn squared_error(&mut self) -> f64 {
        let n = self.eta.len() as f64;
        let mean_excess = self.excess() / n;
        (mean_excess * self.scale + (self.scale - 1.0)).to_f64()
    }

    fn multiply_by_component(&mut self, phi: &[f64], gamma: f64, eff: u64) {
        let n = self.eta.len() as u64;
        let mut idx = 0u64;
        for e in self.eta.iter_mut() {
            *e *= 1.0 + gamma * phi[idx as usize];
            idx += eff;
            if idx >= n {
                idx -= n;
            }
        }
        self.counters.multiply_adds += n;
    }
}

pub(crate) fn check_inputs(
    params: &SpaceParams,
    weights: &Weights,
    schedule: &ReductionSchedule,
    s: usize,
) -> Result<()> {
    if s == 0 {
        return Err(CbcError::Validation("dimension s must be at least 1".into()));
    }
    if schedule.len() < s || weights.dim() < s {
        return Err(CbcError::DimensionMismatch(format!(
            "s = {s} but the schedule covers {} and the weights {} coordinates",
            schedule.len(),
            weights.dim()
        )));
    }
    if schedule.base() != params.base() || schedule.m() != params.m() {
        return Err(CbcError::DimensionMismatch(
            "schedule built for different (b, m)".into(),
        ));
    }
    Ok(())
}

pub(crate) fn finish(
    params: &SpaceParams,
    kind: LatticeKind,
    schedule: &ReductionSchedule,
    s: usize,
    components: Vec<u64>,
    trace: Vec<f64>,
) -> Result<GeneratingVector> {
    let truncated = ReductionSchedule::new(schedule.exponents()[..s].to_vec(), params)?;
    let mut vector = GeneratingVector::from_components(kind, &truncated, components)?;
    vector.trace = trace;
    Ok(vector)
}

/// CBC search with direct evaluation of every candidate, for product or
/// general weights.
pub fn reduced_cbc_naive(
    params: &SpaceParams,
    weights: &Weights,
    schedule: &ReductionSchedule,
    s: usize,
) -> Result<(GeneratingVector, OpCounters)> {
    check_inputs(params, weights, schedule, s)?;
    let profile = phi_korobov_table(params)?;
    let n = params.n_points();
    let (components, trace, counters) =
        direct_cbc(params, weights, schedule, s, profile.values(), &|eff, buf| {
            fill_rank1_index(eff, n, buf)
        })?;
    Ok((finish(params, LatticeKind::Rank1, schedule, s, components, trace)?, counters))
}

/// Shared direct-evaluation engine. `fill_index(eff, buf)` writes the kernel
/// table index of node `n` under effective component `eff`.
///
/// Each step evaluates `e²_{N,d}(z) = e²_{N,d−1} + (1/N) Σ_n A(n) φ[idx_z(n)]`
/// with `A(n) = γ_d η_{d−1}(n)` for product weights and
/// `A(n) = Σ_{u⊆[d−1]} γ_{u∪{d}} Π_{j∈u} φ_j(n)` for general weights.
pub(crate) fn direct_cbc(
    params: &SpaceParams,
    weights: &Weights,
    schedule: &ReductionSchedule,
    s: usize,
    phi: &[f64],
    fill_index: &dyn Fn(u64, &mut [u32]),
) -> Result<(Vec<u64>, Vec<f64>, OpCounters)> {
    check_inputs(params, weights, schedule, s)?;
    let general = match weights {
        Weights::Product(_) => None,
        Weights::General(_) => {
            if s > MAX_GENERAL_DIM {
                return Err(CbcError::Capacity(format!(
                    "general-weight construction limited to s <= {MAX_GENERAL_DIM}, got {s}"
                )));
            }
            Some(weights.expand(s)?)
        }
    };
    let n = params.n_points() as usize;
    let nf = n as f64;
    let mut state = CbcState::new(n);
    state.counters.multiply_adds += n as u64;
    let mut components = Vec::with_capacity(s);
    let mut chosen_index: Vec<Vec<u32>> = Vec::new();
    let mut trace = Vec::with_capacity(s);
    let mut e2_prev = DoubleDouble::ZERO;
    let mut index = vec![0u32; n];

    for dim in 0..s {
        let a: Vec<f64> = match (&general, weights) {
            (Some(gw), _) => {
                let mut prod = vec![1.0f64; 1usize << dim];
                let mut out = Vec::with_capacity(n);
                for node in 0..n {
                    let mut acc = gw.gamma(1 << dim);
                    for mask in 1..prod.len() {
                        let low = mask.trailing_zeros() as usize;
                        prod[mask] =
                            prod[mask & (mask - 1)] * phi[chosen_index[low][node] as usize];
                        acc += gw.gamma(mask | 1 << dim) * prod[mask];
                    }
                    out.push(acc);
                }
                state.counters.multiply_adds += (n as u64) << dim;
                out
            }
            (None, Weights::Product(g)) => {
                state.eta.iter().map(|&e| g[dim] * e * state.scale).collect()
            }
            (None, Weights::General(_)) => unreachable!("general weights are expanded"),
        };
        let candidates = schedule.candidates(dim);
        let crit: Vec<DoubleDouble> = candidates
            .iter()
            .map(|&z| {
                fill_index(schedule.effective(dim, z), &mut index);
                let sum: DoubleDouble = a
                    .iter()
                    .zip(&index)
                    .map(|(&ai, &i)| DoubleDouble::from_f64(ai * phi[i as usize]))
                    .sum();
                e2_prev + sum / nf
            })
            .collect();
        state.counters.candidate_evaluations += candidates.len() as u64;
        state.counters.multiply_adds += (candidates.len() * n) as u64;
        let crit_f: Vec<f64> = crit.iter().map(|c| c.to_f64()).collect();
        let best = if dim == 0 { 0 } else { argmin_with_ties(&crit_f) };
        let z = candidates[best];
        let eff = schedule.effective(dim, z);
        match weights {
            Weights::Product(g) if schedule.is_saturated(dim) => {
                state.scale *= 1.0 + g[dim] * phi[0];
            }
            Weights::Product(g) => {
                fill_index(eff, &mut index);
                for (e, &i) in state.eta.iter_mut().zip(&index) {
                    *e *= 1.0 + g[dim] * phi[i as usize];
                }
                state.counters.multiply_adds += n as u64;
            }
            Weights::General(_) => {
                fill_index(eff, &mut index);
                chosen_index.push(index.clone());
            }
        }
        e2_prev = crit[best];
        state.td = crit_f;
        state.d = dim + 1;
        components.push(z);
        trace.push(e2_prev.to_f64());
    }
    Ok((components, trace, state.counters))
}

/// Reduced fast CBC for product weights: per active coordinate one fold of
/// `η`, one `Ω^{(m−w_d)}` product and one `η` update.
pub fn reduced_cbc_fast(
    params: &SpaceParams,
    weights: &Weights,
    schedule: &ReductionSchedule,
    s: usize,
    profile: &KernelProfile,
) -> Result<(GeneratingVector, OpCounters)> {
    check_inputs(params, weights, schedule, s)?;
    profile.check_against(params, KernelKind::Korobov)?;
    let gammas = weights.product_gammas().ok_or_else(|| {
        CbcError::Validation("the fast construction requires product weights".into())
    })?;
    let m = params.m();
    let n = params.n_points();
    let nf = n as f64;
    let phi = profile.values();
    let mut state = CbcState::new(n as usize);
    state.counters.multiply_adds += n;

    let active = schedule.active_dims().min(s);
    let top_level = (0..active).map(|d| m - schedule.w(d)).max();
    let omega = match top_level {
        Some(k) => {
            let op = OmegaOperator::new(profile, k)?;
            state.counters.multiply_adds += spectra_cost(params.base(), k);
            Some(op)
        }
        None => None,
    };

    let mut components = Vec::with_capacity(s);
    let mut trace = Vec::with_capacity(s);
    for dim in 0..s {
        let gamma = gammas[dim];
        if schedule.is_saturated(dim) {
            state.counters.candidate_evaluations += 1;
            state.scale *= 1.0 + gamma * phi[0];
            components.push(1);
            trace.push(state.squared_error());
            state.d = dim + 1;
            continue;
        }
        let w = schedule.w(dim);
        let level = m - w;
        let folded = fold_vector(&state.eta, params.base(), w)?;
        state.counters.multiply_adds += n;
        let omega = omega.as_ref().expect("operator exists for active coordinates");
        let t = omega.apply_fast_level(level, &folded, &mut state.counters)?;
        let excess = state.excess();
        // e²(z) = −1 + scale (Σ η + γ T(z)) / N
        let crit: Vec<f64> = t
            .iter()
            .map(|&tz| {
                let total = excess + gamma * tz;
                (total / nf * state.scale + (state.scale - 1.0)).to_f64()
            })
            .collect();
        state.counters.candidate_evaluations += crit.len() as u64;
        state.counters.multiply_adds += crit.len() as u64;
        let best = if dim == 0 { 0 } else { argmin_with_ties(&crit) };
        let candidates = omega.units(level);
        let z = candidates[best];
        state.multiply_by_component(phi, gamma, schedule.effective(dim, z));
        state.td = crit;
        state.d = dim + 1;
        components.push(z);
        trace.push(state.squared_error());
    }
    let counters = state.counters;
    Ok((finish(params, LatticeKind::Rank1, schedule, s, components, trace)?, counters))
}

/// Multiply-adds charged for the FFT spectra of levels `1..=k`.
fn spectra_cost(b: u64, k: u32) -> u64 {
    (1..=k)
        .map(|l| {
            let order = b.pow(l - 1) * (b - 1);
            let log = 64 - order.saturating_sub(1).leading_zeros().min(63) as u64;
            order * log.max(1)
        })
        .sum()
}

/// Three-term operation count `b^m + n b^m + Σ_{d<=n} (m − w_d) b^{m−w_d}`,
/// `n = min(s, s* − 1)` the number of coordinates with `w_d < m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CostPrediction {
    pub predicted: u64,
    pub precompute: u64,
    pub linear: u64,
    pub omega: u64,
    pub active_dims: usize,
}

pub fn cost_model(schedule: &ReductionSchedule, s: usize) -> CostPrediction {
    let b = schedule.base();
    let m = schedule.m();
    let n_points = b.pow(m);
    let active = schedule.active_dims().min(s).min(schedule.len());
    let omega: u64 = (0..active)
        .map(|d| {
            let k = m - schedule.w(d);
            k as u64 * b.pow(k)
        })
        .sum();
    let linear = active as u64 * n_points;
    CostPrediction {
        predicted: n_points + linear + omega,
        precompute: n_points,
        linear,
        omega,
        active_dims: active,
    }
}
