//! Reduced fast component-by-component construction of rank-1 lattice rules
//! and polynomial lattice rules for weighted Korobov and Walsh spaces.
//!
//! The search for coordinate `j` is restricted to multiples of `b^{w_j}`,
//! which shrinks the candidate set for coordinates with small weights and
//! caps the construction cost once `w_j >= m`.

pub mod cbc;
pub mod dd;
pub mod error;
pub mod kernel;
pub mod korobov;
pub mod omega;
pub mod params;
pub mod poly;
pub mod special;

pub use cbc::{cost_model, reduced_cbc_fast, reduced_cbc_naive, CbcState, CostPrediction, OpCounters};
pub use error::{CbcError, Result};
pub use kernel::{phi_korobov_table, KernelKind, KernelProfile};
pub use korobov::{
    corollary_constants, theorem_bound, theorem_bound_prefixes, wce_dual_oracle, wce_general, wce_product,
    CorollaryConstants, DualSum, ErrorMethod, ErrorReport, GeneratingVector, LatticeKind,
};
pub use omega::{fold_vector, unit_group_structure, OmegaOperator, UnitGroupStructure};
pub use params::{
    candidate_set, map_weights_sobolev, map_weights_tent, tent_transform, GeneralWeights,
    ReductionSchedule, ReductionSpec, SpaceParams, WeightRule, Weights,
};
pub use poly::{
    check_unit_group_lemma, mu_b, nu_map, plattice_points, poly_mul_mod, reduced_cbc_poly,
    theorem_bound_walsh, theorem_bound_walsh_prefixes, walsh_kernel_table, wce_walsh_general,
    wce_walsh_product, LemmaCheck, PolyF, WalshKernelProfile,
};
pub use special::riemann_zeta;
