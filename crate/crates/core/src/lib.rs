//! Quantum Fisher information toolkit for measurement-encoded qubit
//! parameters: two-outcome POVM encodings, SLD/QFIM computation, outcome
//! remembered and forgotten estimation errors, and checkers for QFIM
//! singularity and QCRB achievability.

pub mod closed_form;
pub mod criteria;
pub mod error;
pub mod estimation;
pub mod fisher;
pub mod linalg;
pub mod povm;
pub mod scenarios;
pub mod simplex;

pub use error::{Error, Result};
pub use estimation::{
    of_error, optimize_probe, or_error, ErrorResult, ErrorStatus, ErrorValue, Objective,
    OptimizerBudget, ProbeOptimum, WeightMatrix,
};
pub use fisher::{cfi, qfi, qfim, qfim_from_jet, sld, FisherReport, Information};
pub use linalg::{Mat2, QubitState};
pub use povm::{
    encode_nonselective, encode_selective, family_nonselective, family_selective, AxisConvention,
    EncodedFamily, MeasurementFamily, Outcome, ParamFn, TwoOutcomePovm,
};
