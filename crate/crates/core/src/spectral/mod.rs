//! Spectral checks: strict accretivity of the fractional term, numerical
//! range samples and sector fits, eigenvalues of self-adjoint operators,
//! and the two-sided comparison with constant-coefficient operators.

pub mod accretivity;
pub mod comparison;
pub mod eigen;
pub mod range;

pub use accretivity::{
    accretivity_constants, empirical_rayleigh, AccretivityReport, RayBlockOperator, RayleighReport,
    WeightConstants, WeightedOperator,
};
pub use comparison::{
    accretivity_for, comparison_operators, sandwich_check, sandwich_pipeline, Comparator, ComparisonOperators,
    SandwichReport, SandwichRun, UpperEstimate,
};
pub use eigen::{
    eigen_solve, eigen_solve_with, lanczos_extreme, laplacian_eigenvalues, laplacian_modes, symmetrized,
    EigenMethod, EigenOptions, EigenResult, ExtremeEigen, LaplacianPreconditioner,
};
pub use range::{
    numerical_range_sample, sector_fit, sector_fit_with_vertex, sector_params_analytic, AnalyticSector, NuParams,
    RangeSample, RangeStrategy, SectorConstants, SectorEstimate,
};
