//! One grid cell: construction, exact error, bounds and cost model.

use std::time::Instant;

use redcbc::{
    cost_model, phi_korobov_table, reduced_cbc_fast, reduced_cbc_naive, reduced_cbc_poly,
    theorem_bound, theorem_bound_walsh, walsh_kernel_table, wce_general, wce_product,
    wce_walsh_general, wce_walsh_product, CostPrediction, GeneratingVector, OpCounters,
    ReductionSchedule, SpaceParams, Weights,
};
use serde::Serialize;

use crate::config::{Algorithm, Mode, RunConfig};
use crate::Failure;

#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    pub lambda: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CostReport {
    pub predicted: u64,
    pub precompute: u64,
    pub linear: u64,
    pub omega: u64,
    pub active_dims: usize,
}

impl From<CostPrediction> for CostReport {
    fn from(c: CostPrediction) -> Self {
        Self {
            predicted: c.predicted,
            precompute: c.precompute,
            linear: c.linear,
            omega: c.omega,
            active_dims: c.active_dims,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Counters {
    pub candidate_evaluations: u64,
    pub multiply_adds: u64,
}

#[derive(Debug)]
pub struct CellResult {
    pub m: u32,
    pub s: usize,
    pub vector: GeneratingVector,
    pub squared_error: f64,
    pub bounds: Vec<BoundCheck>,
    pub cost: CostPrediction,
    pub counters: OpCounters,
    pub seconds: f64,
}

impl CellResult {
    pub fn log10_error(&self) -> f64 {
        0.5 * self.squared_error.log10()
    }
}

/// Exact squared worst-case error of `vector`, evaluated from scratch.
pub fn exact_error(
    mode: Mode,
    params: &SpaceParams,
    weights: &Weights,
    vector: &GeneratingVector,
) -> Result<f64, Failure> {
    let report = match mode {
        Mode::Korobov => {
            let profile = phi_korobov_table(params)?;
            if weights.is_product() {
                wce_product(params, weights, vector, &profile)?
            } else {
                wce_general(params, weights, vector, &profile)?
            }
        }
        Mode::Polynomial => {
            let profile = walsh_kernel_table(params)?;
            if weights.is_product() {
                wce_walsh_product(params, weights, vector, &profile)?
            } else {
                wce_walsh_general(params, weights, vector, &profile)?
            }
        }
    };
    Ok(report.squared_error)
}

pub fn bound_checks(
    mode: Mode,
    params: &SpaceParams,
    weights: &Weights,
    schedule: &ReductionSchedule,
    s: usize,
    lambdas: &[f64],
    squared_error: f64,
) -> Result<Vec<BoundCheck>, Failure> {
    lambdas
        .iter()
        .map(|&lambda| {
            let bound = match mode {
                Mode::Korobov => theorem_bound(params, weights, schedule, s, lambda)?,
                Mode::Polynomial => theorem_bound_walsh(params, weights, schedule, s, lambda)?,
            };
            Ok(BoundCheck {
                lambda,
                bound,
                holds: squared_error <= bound,
            })
        })
        .collect()
}

pub fn run_cell(config: &RunConfig, m: u32, s: usize) -> Result<CellResult, Failure> {
    let params = config.params(m)?;
    let weights = config.weights.weights(s)?;
    let schedule = ReductionSchedule::from_spec(&config.reduction, s, &params)?;
    let start = Instant::now();
    let (vector, counters) = match config.mode {
        Mode::Korobov => match config.algorithm {
            Algorithm::Fast => {
                if !weights.is_product() {
                    return Err(Failure::Config(
                        "algorithm fast requires product weights; use naive".into(),
                    ));
                }
                let profile = phi_korobov_table(&params)?;
                reduced_cbc_fast(&params, &weights, &schedule, s, &profile)?
            }
            Algorithm::Naive => reduced_cbc_naive(&params, &weights, &schedule, s)?,
        },
        Mode::Polynomial => {
            let profile = walsh_kernel_table(&params)?;
            reduced_cbc_poly(&params, &weights, &schedule, s, &profile)?
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    let squared_error = exact_error(config.mode, &params, &weights, &vector)?;
    let bounds = bound_checks(
        config.mode,
        &params,
        &weights,
        &schedule,
        s,
        &config.lambdas,
        squared_error,
    )?;
    Ok(CellResult {
        m,
        s,
        vector,
        squared_error,
        bounds,
        cost: cost_model(&schedule, s),
        counters,
        seconds,
    })
}
