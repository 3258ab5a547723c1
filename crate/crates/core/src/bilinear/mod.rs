//! Hirota operators on truncated series, tau-function residuals, the
//! epsilon-expansion solver and the two-time NLS link.

mod epsilon;
mod grid;
mod hirota;
mod schur;
mod series;
mod tau;

pub use epsilon::{eps_slope, series_solve, series_solve_with, EpsSeries, EpsilonFamily, SolveOptions, SolveReport};
pub use grid::{nls_bilinear_residual, nlse_residual, GridFn2, TimeAxis};
pub use hirota::{hirota_dt, sinh_form_residual, toda_bilinear_residual, BilinearVariant};
pub use schur::{schur_all, schur_h};
pub use series::{SeriesAlgebra, SeriesFn};
pub use tau::{
    c_from_tau, closed_form_seed, dw_from_tau, exact_seed, gtl_tau_residual, intermediate_residual, residual_lines,
    taylor_flow, CSeries, SquaredForm, TauConstants, TauTriple,
};
