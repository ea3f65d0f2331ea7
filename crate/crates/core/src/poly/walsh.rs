use crate::cbc::{check_inputs, direct_cbc, finish, OpCounters};
use crate::dd::{ComplexDd, DoubleDouble};
use crate::error::{CbcError, Result};
use crate::kernel::{KernelKind, KernelProfile};
use crate::korobov::{
    check_lambda, product_form_error, subset_form_error, subset_sum_prefixes, ErrorMethod,
    ErrorReport, GeneratingVector, LatticeKind,
};
use crate::params::{ReductionSchedule, SpaceParams, Weights, MAX_GENERAL_DIM};

use super::multiples_table;

/// `μ_b(α) = Σ_{h>=1} b^{−α ψ_b(h)} = b^α (b−1) / (b^α − b)` for `α > 1`.
pub fn mu_b(base: u64, alpha: f64) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(CbcError::Domain(format!("mu_b requires alpha > 1, got {alpha}")));
    }
    let b = base as f64;
    let ba = b.powf(alpha);
    Ok(ba * (b - 1.0) / (ba - b))
}

/// Walsh kernel `φ(x) = Σ_{h>=1} b^{−α ψ_b(h)} wal_h(x)` at the nodes
/// `n / b^m`, together with the folded coefficients `R`.
#[derive(Clone, Debug)]
pub struct WalshKernelProfile {
    pub profile: KernelProfile,
    /// `R(h') = Σ_{q>=0} b^{−α ψ_b(q b^m + h')}` for `h' < b^m` (zero term excluded).
    pub coefficients: Vec<f64>,
}

impl WalshKernelProfile {
    pub fn values(&self) -> &[f64] {
        self.profile.values()
    }

    pub fn mu(&self) -> f64 {
        self.profile.mu().expect("Walsh profiles carry mu")
    }

    pub fn mean(&self) -> f64 {
        self.profile.mean()
    }
}

fn b_pow_neg(b: u64, alpha: f64, k: u32) -> DoubleDouble {
    if alpha.fract() == 0.0 && alpha <= 64.0 {
        DoubleDouble::from_f64(b as f64)
            .powi(alpha as i32 * k as i32)
            .recip()
    } else {
        DoubleDouble::from_f64((b as f64).powf(-alpha * k as f64))
    }
}

/// Builds the table by folding all frequencies onto `h' < b^m` and applying
/// one `b`-ary Walsh (Chrestenson) transform in double-double arithmetic.
pub fn walsh_kernel_table(params: &SpaceParams) -> Result<WalshKernelProfile> {
    let b = params.base();
    let m = params.m();
    let alpha = params.alpha();
    let n = params.n_points() as usize;
    let mu = mu_b(b, alpha)?;
    let floor = b_pow_neg(b, alpha, m) * mu;

    let mut coefficients = Vec::with_capacity(n);
    let mut data: Vec<ComplexDd> = Vec::with_capacity(n);
    let mut psi = 0u32;
    let mut next = b as usize;
    let mut level = DoubleDouble::ONE;
    for h in 0..n {
        let r = if h == 0 {
            floor
        } else {
            if h == next {
                psi += 1;
                next *= b as usize;
                level = b_pow_neg(b, alpha, psi);
            }
            level + floor
        };
        coefficients.push(r.to_f64());
        data.push(ComplexDd::new(r, DoubleDouble::ZERO));
    }

    chrestenson(&mut data, b as usize, m);

    // value at n / b^m is W[rev_m(n)]: the k-th digit of x is a_{m−1−k}
    let mut table = Vec::with_capacity(n);
    for idx in 0..n {
        let w = data[digit_reverse(idx as u64, b, m) as usize];
        let re = w.re.to_f64();
        if w.im.to_f64().abs() > 1e-12 * re.abs().max(1.0) {
            return Err(CbcError::Validation(format!(
                "Walsh transform produced a complex value at node {idx}"
            )));
        }
        table.push(w.re);
    }
    Ok(WalshKernelProfile {
        profile: KernelProfile::from_dd(KernelKind::Walsh, alpha, b, m, table, Some(mu)),
        coefficients,
    })
}

fn digit_reverse(mut n: u64, b: u64, m: u32) -> u64 {
    let mut out = 0;
    for _ in 0..m {
        out = out * b + n % b;
        n /= b;
    }
    out
}

/// In-place `W[c] = Σ_h x[h] ω^{Σ_k h_k c_k}` with `ω = e^{2πi/b}`.
fn chrestenson(data: &mut [ComplexDd], b: usize, m: u32) {
    let roots: Vec<ComplexDd> = (0..b as u64)
        .map(|j| ComplexDd::root_of_unity(j, b as u64))
        .collect();
    let mut scratch = vec![ComplexDd::ZERO; b];
    let mut stride = 1usize;
    for _ in 0..m {
        let block = stride * b;
        for start in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (j, out) in scratch.iter_mut().enumerate() {
                    let mut acc = ComplexDd::ZERO;
                    for t in 0..b {
                        acc = acc + data[base + t * stride] * roots[(t * j) % b];
                    }
                    *out = acc;
                }
                for (j, v) in scratch.iter().enumerate() {
                    data[base + j * stride] = *v;
                }
            }
        }
        stride = block;
    }
}

fn check_vector(params: &SpaceParams, weights: &Weights, vector: &GeneratingVector) -> Result<()> {
    if vector.kind != LatticeKind::Polynomial {
        return Err(CbcError::DimensionMismatch(
            "expected a polynomial generating vector".into(),
        ));
    }
    if vector.base != params.base() || vector.m != params.m() {
        return Err(CbcError::DimensionMismatch(
            "generating vector built for different (b, m)".into(),
        ));
    }
    if vector.dim() == 0 || weights.dim() < vector.dim() {
        return Err(CbcError::DimensionMismatch(format!(
            "weights cover {} coordinates, vector has {}",
            weights.dim(),
            vector.dim()
        )));
    }
    Ok(())
}

/// `e² = −1 + (1/N) Σ_n Π_j (1 + γ_j φ(ν(n g_j / x^m)))` in `O(sN)`.
pub fn wce_walsh_product(
    params: &SpaceParams,
    weights: &Weights,
    vector: &GeneratingVector,
    profile: &WalshKernelProfile,
) -> Result<ErrorReport> {
    profile.profile.check_against(params, KernelKind::Walsh)?;
    check_vector(params, weights, vector)?;
    let gammas = weights
        .product_gammas()
        .ok_or_else(|| CbcError::Validation("wce_walsh_product requires product weights".into()))?;
    let s = vector.dim();
    let e2 = product_form_error(
        params.n_points() as usize,
        &gammas[..s],
        profile.values(),
        |dim, buf| multiples_table(vector.effective[dim], params.base(), params.m(), buf),
    );
    let bound = theorem_bound_walsh(params, weights, &vector.schedule(params)?, s, 1.0)?;
    Ok(ErrorReport::new(e2, bound, ErrorMethod::ProductFast))
}

/// Subset form `Σ_{∅≠u} γ_u (1/N) Σ_n Π_{j∈u} φ(ν(n g_j / x^m))`.
pub fn wce_walsh_general(
    params: &SpaceParams,
    weights: &Weights,
    vector: &GeneratingVector,
    profile: &WalshKernelProfile,
) -> Result<ErrorReport> {
    profile.profile.check_against(params, KernelKind::Walsh)?;
    check_vector(params, weights, vector)?;
    let s = vector.dim();
    if s > MAX_GENERAL_DIM {
        return Err(CbcError::Capacity(format!(
            "subset evaluation limited to s <= {MAX_GENERAL_DIM}, got {s}"
        )));
    }
    let expanded = weights.expand(s)?;
    let e2 = subset_form_error(
        params.n_points() as usize,
        &expanded,
        profile.values(),
        |dim, buf| multiples_table(vector.effective[dim], params.base(), params.m(), buf),
    );
    let bound = theorem_bound_walsh(params, weights, &vector.schedule(params)?, s, 1.0)?;
    Ok(ErrorReport::new(e2, bound, ErrorMethod::GeneralSubset))
}

/// CBC for polynomial lattice rules with candidates
/// `{h : deg h < m − w_d, h(0) ≠ 0}` and `Y_d = x^{w_d}`, every candidate
/// evaluated directly against the running `η`.
pub fn reduced_cbc_poly(
    params: &SpaceParams,
    weights: &Weights,
    schedule: &ReductionSchedule,
    s: usize,
    profile: &WalshKernelProfile,
) -> Result<(GeneratingVector, OpCounters)> {
    check_inputs(params, weights, schedule, s)?;
    profile.profile.check_against(params, KernelKind::Walsh)?;
    let (b, m) = (params.base(), params.m());
    let (components, trace, counters) =
        direct_cbc(params, weights, schedule, s, profile.values(), &|eff, buf| {
            multiples_table(eff, b, m, buf)
        })?;
    let vector = finish(params, LatticeKind::Polynomial, schedule, s, components, trace)?;
    Ok((vector, counters))
}

/// `((b/(b−1)) Σ_{∅≠u⊆[d]} γ_u^λ μ_b(αλ)^{|u|} / b^{max(0, m − max_{j∈u} w_j)})^{1/λ}`
/// for every prefix `d = 1..=len`.
pub fn theorem_bound_walsh_prefixes(
    params: &SpaceParams,
    weights: &Weights,
    schedule: &ReductionSchedule,
    len: usize,
    lambda: f64,
) -> Result<Vec<f64>> {
    check_lambda(params.alpha(), lambda)?;
    let b = params.base() as f64;
    let m = params.m();
    let z = mu_b(params.base(), params.alpha() * lambda)?;
    let lead = b / (b - 1.0);
    let sums = subset_sum_prefixes(weights, schedule, len, lambda, z, |w| {
        b.powi(-(m.saturating_sub(w) as i32))
    })?;
    Ok(sums
        .into_iter()
        .map(|s| {
            let v = (lead * s).powf(1.0 / lambda);
            if v.is_finite() {
                v
            } else {
                f64::INFINITY
            }
        })
        .collect())
}

pub fn theorem_bound_walsh(
    params: &SpaceParams,
    weights: &Weights,
    schedule: &ReductionSchedule,
    d: usize,
    lambda: f64,
) -> Result<f64> {
    Ok(*theorem_bound_walsh_prefixes(params, weights, schedule, d, lambda)?
        .last()
        .expect("nonempty"))
}
