//! Differential sequences: compatibility conditions, resolutions, Janet
//! tabulars, the Spencer/hybrid/Janet bundle rows and exactness checks.

mod bundles;
mod cc;
mod exactness;
mod operator;

pub use bundles::{
    fundamental_diagram, hybrid_bundles, hybrid_first_slot, janet_tabular, spencer_bundles, tabular_in_given_coordinates,
    DiagramReport, FirstSlot, JanetTabular, TabularGroup,
};
pub use cc::{
    cc_at_order, cc_by_substitution, cc_order_bound, cc_space, euler_poincare, resolution, resolve_operator,
    ProlongationDims, ResolutionOptions, SequenceReport, StageReport,
};
pub use exactness::{check_jet_exactness, check_symbol_exactness, ExactnessReport};
pub use operator::{prolonged_matrix, Operator, OperatorHandle};
