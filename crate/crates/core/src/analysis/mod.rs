//! Sensitivity of designs and selection of the regular solution.

mod pseudospectrum;
mod selection;
mod sensitivity;

pub use pseudospectrum::{pseudospectrum, Contour, PseudospectrumGrid, Window, DEFAULT_EPSILONS};
pub use selection::{
    convexity_constraints, convexity_margin, flatness, flatness_quadratic_form, select_regular, select_regular_by,
    select_regular_indices, Objective,
};
pub use sensitivity::{condition_numbers, condition_of_f, eigen_conditions, SensitivityReport};
