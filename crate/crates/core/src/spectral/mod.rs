//! Poisson integrals of synthetic measures, Kac-class and tail criteria,
//! Tauberian checks and regular variation.

mod criteria;
mod endpoint;
mod measure;
mod regvar;
mod tauberian;


pub use criteria::{
    diagonal_dominance, fg_criterion, growth_classes, kac_criterion, limsup_toward, ConditionReport, Evidence,
    GrowthClass, GrowthClassReport, LimsupEstimate, Membership, RatioLimit, LIMSUP_DECADES, LIMSUP_POINTS,
    LIMSUP_WINDOW_DECADES, SLOPE_TOL,
};
pub use endpoint::{endpoint_integral, Convergence, EndpointStudy};
pub use measure::{DensityPiece, SyntheticMeasure};
pub use regvar::{karamata_check, regvar_index_estimate, IndexEstimate, KaramataReport, RegVarFunction};
pub use tauberian::{
    abelian_comparison, lower_constant, parts_identity, tauberian_check, upper_constant, AbelianComparison,
    TauberianReport, R_GRID_DECADES, R_GRID_POINTS, R_WINDOW_DECADES,
};
