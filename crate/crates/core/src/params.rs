//! Space parameters, weights and reduction schedules.

use std::f64::consts::PI;

use num_bigint::BigUint;

use crate::error::{CbcError, Result};

/// Largest dimension for which general (subset) weights are stored densely.
pub const MAX_GENERAL_DIM: usize = 20;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Base `b`, exponent `m`, point count `N = b^m` and smoothness `alpha`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceParams {
    base: u64,
    m: u32,
    n_points: u64,
    alpha: f64,
}

impl SpaceParams {
    pub fn new(base: u64, m: u32, alpha: f64) -> Result<Self> {
        if !is_prime(base) {
            return Err(CbcError::Validation(format!("base {base} is not prime")));
        }
        if m == 0 {
            return Err(CbcError::Validation("exponent m must be at least 1".into()));
        }
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(CbcError::Validation(format!("alpha = {alpha} must exceed 1")));
        }
        let mut n: u64 = 1;
        for _ in 0..m {
            n = n.checked_mul(base).ok_or_else(|| {
                CbcError::Capacity(format!("{base}^{m} does not fit in 64 bits"))
            })?;
        }
        if n > u32::MAX as u64 {
            return Err(CbcError::Capacity(format!(
                "N = {base}^{m} exceeds the supported table size"
            )));
        }
        Ok(Self {
            base,
            m,
            n_points: n,
            alpha,
        })
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// `N = b^m`.
    pub fn n_points(&self) -> u64 {
        self.n_points
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `b^k` for `k <= m`.
    pub fn pow(&self, k: u32) -> u64 {
        debug_assert!(k <= self.m);
        self.base.pow(k)
    }

    /// `Some(alpha as u32)` when alpha is a positive even integer.
    pub fn even_alpha(&self) -> Option<u32> {
        let a = self.alpha;
        if a.fract() == 0.0 && a >= 2.0 && a <= 64.0 && (a as u32) % 2 == 0 {
            Some(a as u32)
        } else {
            None
        }
    }
}

/// Coordinate weights: product form `γ_j`, or general subset weights `γ_u`.
#[derive(Clone, Debug, PartialEq)]
pub enum Weights {
    Product(Vec<f64>),
    General(GeneralWeights),
}

/// Dense table of subset weights indexed by bit mask (bit `j` = coordinate
/// `j + 1`). `γ_∅ = 1`; subsets never assigned carry weight zero.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralWeights {
    dim: usize,
    table: Vec<f64>,
}

impl GeneralWeights {
    /// Builds from `(subset, gamma)` pairs with 1-based coordinate indices.
    pub fn new(dim: usize, entries: &[(Vec<usize>, f64)]) -> Result<Self> {
        if dim > MAX_GENERAL_DIM {
            return Err(CbcError::Capacity(format!(
                "general weights limited to s <= {MAX_GENERAL_DIM}, got {dim}"
            )));
        }
        let mut table = vec![0.0; 1usize << dim];
        table[0] = 1.0;
        let mut seen = vec![false; table.len()];
        for (subset, gamma) in entries {
            if subset.is_empty() {
                return Err(CbcError::Validation("empty subset in general weights".into()));
            }
            if !(*gamma > 0.0) || !gamma.is_finite() {
                return Err(CbcError::Validation(format!(
                    "weight for {subset:?} must be positive, got {gamma}"
                )));
            }
            let mut mask = 0usize;
            for &j in subset {
                if j == 0 || j > dim {
                    return Err(CbcError::Validation(format!(
                        "coordinate {j} outside 1..={dim}"
                    )));
                }
                mask |= 1 << (j - 1);
            }
            if seen[mask] {
                return Err(CbcError::Validation(format!("subset {subset:?} given twice")));
            }
            seen[mask] = true;
            table[mask] = *gamma;
        }
        Ok(Self { dim, table })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Weight of the subset encoded by `mask`.
    pub fn gamma(&self, mask: usize) -> f64 {
        self.table[mask]
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    fn scaled(&self, factor: f64) -> Self {
        let table = self
            .table
            .iter()
            .enumerate()
            .map(|(mask, g)| {
                if mask == 0 {
                    *g
                } else {
                    g * factor.powi(mask.count_ones() as i32)
                }
            })
            .collect();
        Self {
            dim: self.dim,
            table,
        }
    }
}

impl Weights {
    pub fn product(gammas: Vec<f64>) -> Result<Self> {
        if let Some(bad) = gammas.iter().find(|g| !(**g > 0.0) || !g.is_finite()) {
            return Err(CbcError::Validation(format!(
                "product weights must be positive and finite, got {bad}"
            )));
        }
        Ok(Self::Product(gammas))
    }

    /// Product weights from a rule string `c*j^-a` (see [`WeightRule`]).
    pub fn from_rule(rule: &str, s: usize) -> Result<Self> {
        Self::product(WeightRule::parse(rule)?.weights(s))
    }

    pub fn is_product(&self) -> bool {
        matches!(self, Self::Product(_))
    }

    /// Number of coordinates the weights cover.
    pub fn dim(&self) -> usize {
        match self {
            Self::Product(g) => g.len(),
            Self::General(g) => g.dim(),
        }
    }

    pub fn product_gammas(&self) -> Option<&[f64]> {
        match self {
            Self::Product(g) => Some(g),
            Self::General(_) => None,
        }
    }

    /// Dense subset form restricted to the first `s` coordinates.
    pub fn expand(&self, s: usize) -> Result<GeneralWeights> {
        if s > self.dim() {
            return Err(CbcError::DimensionMismatch(format!(
                "weights cover {} coordinates, {s} requested",
                self.dim()
            )));
        }
        if s > MAX_GENERAL_DIM {
            return Err(CbcError::Capacity(format!(
                "subset expansion limited to s <= {MAX_GENERAL_DIM}, got {s}"
            )));
        }
        match self {
            Self::Product(g) => {
                let mut table = vec![1.0; 1usize << s];
                for mask in 1..table.len() {
                    let low = mask.trailing_zeros() as usize;
                    table[mask] = table[mask & (mask - 1)] * g[low];
                }
                Ok(GeneralWeights { dim: s, table })
            }
            Self::General(g) => {
                if s == g.dim {
                    return Ok(g.clone());
                }
                Ok(GeneralWeights {
                    dim: s,
                    table: g.table[..1usize << s].to_vec(),
                })
            }
        }
    }

    fn scaled(&self, factor: f64) -> Self {
        match self {
            Self::Product(g) => Self::Product(g.iter().map(|x| x * factor).collect()),
            Self::General(g) => Self::General(g.scaled(factor)),
        }
    }
}

/// Weights `(2π²)^{|u|} γ_u` under which the Korobov (α = 2) error equals the
/// root-mean-square shifted-lattice error in the unanchored Sobolev space.
pub fn map_weights_sobolev(weights: &Weights) -> Weights {
    weights.scaled(2.0 * PI * PI)
}

/// Weights `π^{2|u|} γ_u` for tent-transformed lattice rules.
pub fn map_weights_tent(weights: &Weights) -> Weights {
    weights.scaled(PI * PI)
}

/// Componentwise `x ↦ 1 − |1 − 2x|`.
pub fn tent_transform(point: &[f64]) -> Result<Vec<f64>> {
    point
        .iter()
        .map(|&x| {
            if (0.0..=1.0).contains(&x) {
                Ok(1.0 - (1.0 - 2.0 * x).abs())
            } else {
                Err(CbcError::Validation(format!("coordinate {x} outside [0, 1]")))
            }
        })
        .collect()
}

/// A non-negative rational `num / den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = || CbcError::Validation(format!("cannot parse rational '{text}'"));
        let (num, den) = if let Some((p, q)) = text.split_once('/') {
            let p: u64 = p.trim().parse().map_err(|_| bad())?;
            let q: u64 = q.trim().parse().map_err(|_| bad())?;
            (p, q)
        } else if let Some((int, frac)) = text.split_once('.') {
            if frac.len() > 12 || (int.is_empty() && frac.is_empty()) {
                return Err(bad());
            }
            let scale = 10u64.pow(frac.len() as u32);
            let i: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
            let f: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
            (i * scale + f, scale)
        } else {
            (text.parse().map_err(|_| bad())?, 1)
        };
        if den == 0 {
            return Err(bad());
        }
        let g = gcd_u64(num, den);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// Product weight rule `γ_j = c · j^{-a}` with rational `c`, `a`.
///
/// Accepted spellings: `j^-3`, `j^(-3)`, `0.5*j^-2`, `1/2*j^-3/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightRule {
    pub scale: Ratio,
    pub decay: Ratio,
}

impl WeightRule {
    pub fn parse(text: &str) -> Result<Self> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || {
            CbcError::Validation(format!(
                "unsupported weight rule '{text}', expected c*j^-a with rational c, a"
            ))
        };
        let (scale, power) = match compact.rsplit_once('*') {
            Some((c, rest)) => (Ratio::parse(c)?, rest),
            None => (Ratio { num: 1, den: 1 }, compact.as_str()),
        };
        let exponent = power.strip_prefix("j^").ok_or_else(bad)?;
        let exponent = exponent
            .strip_prefix('(')
            .and_then(|e| e.strip_suffix(')'))
            .unwrap_or(exponent);
        let decay = exponent.strip_prefix('-').ok_or_else(bad)?;
        let decay = Ratio::parse(decay)?;
        if scale.num == 0 {
            return Err(CbcError::Validation("weight scale must be positive".into()));
        }
        Ok(Self { scale, decay })
    }

    pub fn weights(&self, s: usize) -> Vec<f64> {
        let c = self.scale.to_f64();
        let a = self.decay.to_f64();
        (1..=s).map(|j| c * (j as f64).powf(-a)).collect()
    }
}

/// How the reduction exponents `w_j` are specified.
#[derive(Clone, Debug, PartialEq)]
pub enum ReductionSpec {
    Explicit(Vec<u32>),
    /// `w_j = ⌊c · log_b j⌋`; `base`, when given, must equal the space base.
    LogRule { scale: Ratio, base: Option<u64> },
}

impl ReductionSpec {
    /// Parses `floor(c*log_b(j))`, `floor(c*log2(j))` (the digit must match
    /// the base at schedule time), `zero` or `0`.
    pub fn parse(text: &str) -> Result<Self> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact == "0" || compact == "zero" {
            return Ok(Self::LogRule {
                scale: Ratio { num: 0, den: 1 },
                base: None,
            });
        }
        let bad = || {
            CbcError::Validation(format!(
                "unsupported reduction rule '{text}', expected floor(c*log_b(j))"
            ))
        };
        let inner = compact
            .strip_prefix("floor(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (c, log) = match inner.split_once("*log") {
            Some((c, log)) => (Ratio::parse(c)?, log),
            None => (Ratio { num: 1, den: 1 }, inner.strip_prefix("log").ok_or_else(bad)?),
        };
        let base_text = log.strip_suffix("(j)").ok_or_else(bad)?;
        let base_text = base_text.strip_prefix('_').unwrap_or(base_text);
        let base = match base_text {
            "b" => None,
            digits => Some(digits.parse::<u64>().map_err(|_| bad())?),
        };
        Ok(Self::LogRule { scale: c, base })
    }
}

/// Nondecreasing reduction exponents `w_1 <= ... <= w_s` for a fixed `(b, m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionSchedule {
    base: u64,
    m: u32,
    exponents: Vec<u32>,
    s_star: usize,
}

/// `max { w : b^{w q} <= j^p }`, i.e. `⌊(p/q) log_b j⌋` in exact arithmetic.
fn floor_scaled_log(j: u64, ratio: Ratio, base: u64) -> u32 {
    if ratio.num == 0 || j <= 1 {
        return 0;
    }
    let target = BigUint::from(j).pow(ratio.num as u32);
    let step = BigUint::from(base).pow(ratio.den as u32);
    let mut acc = step.clone();
    let mut w = 0u32;
    while acc <= target {
        w += 1;
        acc *= &step;
    }
    w
}

impl ReductionSchedule {
    pub fn new(exponents: Vec<u32>, params: &SpaceParams) -> Result<Self> {
        if let Some(pos) = exponents.windows(2).position(|w| w[0] > w[1]) {
            return Err(CbcError::Validation(format!(
                "reduction exponents must be nondecreasing: w_{} = {} > w_{} = {}",
                pos + 1,
                exponents[pos],
                pos + 2,
                exponents[pos + 1]
            )));
        }
        if exponents.first().is_some_and(|&w| w > 0) {
            log::warn!(
                "w_1 = {} > 0: every point is repeated b^w_1 times",
                exponents[0]
            );
        }
        let m = params.m();
        let s_star = exponents
            .iter()
            .position(|&w| w >= m)
            .map(|p| p + 1)
            .unwrap_or(exponents.len() + 1);
        Ok(Self {
            base: params.base(),
            m,
            exponents,
            s_star,
        })
    }

    /// All-zero schedule: the classic fast CBC search.
    pub fn zero(s: usize, params: &SpaceParams) -> Self {
        Self::new(vec![0; s], params).expect("zero schedule is valid")
    }

    pub fn from_spec(spec: &ReductionSpec, s: usize, params: &SpaceParams) -> Result<Self> {
        match spec {
            ReductionSpec::Explicit(list) => {
                if list.len() < s {
                    return Err(CbcError::DimensionMismatch(format!(
                        "reduction list has {} entries, s = {s}",
                        list.len()
                    )));
                }
                Self::new(list[..s].to_vec(), params)
            }
            ReductionSpec::LogRule { scale, base } => {
                if let Some(b) = base {
                    if *b != params.base() {
                        return Err(CbcError::Validation(format!(
                            "reduction rule uses log base {b} but b = {}",
                            params.base()
                        )));
                    }
                }
                let w = (1..=s as u64)
                    .map(|j| floor_scaled_log(j, *scale, params.base()))
                    .collect();
                Self::new(w, params)
            }
        }
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    /// `w` of the 0-based coordinate `dim`.
    pub fn w(&self, dim: usize) -> u32 {
        self.exponents[dim]
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// 1-based index of the first coordinate with `w_j >= m`, or `s + 1`.
    pub fn s_star(&self) -> usize {
        self.s_star
    }

    /// Number of coordinates searched over a nontrivial candidate set
    /// (those with `w_j < m`).
    pub fn active_dims(&self) -> usize {
        self.s_star - 1
    }

    pub fn is_saturated(&self, dim: usize) -> bool {
        self.exponents[dim] >= self.m
    }

    /// `Y_j mod N = b^{w_j} mod b^m`; zero once `w_j >= m`.
    pub fn y_mod_n(&self, dim: usize) -> u64 {
        let w = self.exponents[dim];
        if w >= self.m {
            0
        } else {
            self.base.pow(w)
        }
    }

    /// Effective component `Y_j z mod N`.
    pub fn effective(&self, dim: usize, z: u64) -> u64 {
        let n = self.base.pow(self.m);
        ((self.y_mod_n(dim) as u128 * z as u128) % n as u128) as u64
    }

    /// `|Z_{N,w_j}|`.
    pub fn candidate_count(&self, dim: usize) -> u64 {
        let w = self.exponents[dim];
        if w >= self.m {
            1
        } else {
            self.base.pow(self.m - w - 1) * (self.base - 1)
        }
    }

    /// Ascending candidate set `Z_{N,w_j}` for the 0-based coordinate `dim`.
    pub fn candidates(&self, dim: usize) -> Vec<u64> {
        let w = self.exponents[dim];
        if w >= self.m {
            return vec![1];
        }
        let upper = self.base.pow(self.m - w);
        (1..upper).filter(|z| z % self.base != 0).collect()
    }
}

/// `Z_{N,w_j}` for the 1-based coordinate `j`.
pub fn candidate_set(schedule: &ReductionSchedule, j: usize) -> Result<Vec<u64>> {
    if j == 0 || j > schedule.len() {
        return Err(CbcError::Validation(format!(
            "coordinate {j} outside 1..={}",
            schedule.len()
        )));
    }
    Ok(schedule.candidates(j - 1))
}
