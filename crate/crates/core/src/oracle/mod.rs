//! Ground-truth oracles: the response-type SCM, the LP sharpness oracle,
//! the sensitivity-model DGP and a multi-arm enumeration oracle.

pub mod lp;
pub mod msm_dgp;
pub mod multi_arm;
pub mod response_type;
pub mod simplex;

pub use lp::{sharp_bounds_lp, sharp_bounds_lp_with, Arithmetic, Target};
pub use msm_dgp::{msm_dgp, MsmDgp, MsmSample, MsmTruth, OutcomeModel};
pub use multi_arm::MultiArmLaw;
pub use response_type::{ground_truth, observed_law, sample, GroundTruth, ResponseTypeLaw, RtStratum, StratumTruth};
