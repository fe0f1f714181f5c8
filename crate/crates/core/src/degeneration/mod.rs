//! Degenerating one-parameter families over `ℚ(i)(t)`: reduction at
//! `t = 0`, base change, rescaling limits and Newton-polygon proposals.

mod family;
mod newton;
mod tparam;

pub use family::{
    base_change, normalize_family, reduce_at_zero, rescaling_limit, rescaling_limit_with_budget,
    FamilyJson, FamilyMap, GoodReductionReport, MobiusFamily, ReductionJson, RescalingLimit,
    DEFAULT_COMPOSE_BUDGET,
};
pub use newton::{
    newton_polygon, propose_rescalings, propose_rescalings_with, puiseux_centers, root_valuations,
    NewtonSegment, ProposalOptions, RescalingProposal, SegmentJson,
};
pub use tparam::TParam;
