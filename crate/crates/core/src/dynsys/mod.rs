//! Symbolic dynamical systems with exponentially decaying correlations:
//! the doubling map, its natural extension (the baker's map), and the cat
//! map on the 2-torus. None of the orbits are iterated in native floating
//! point, which would shift out all mantissa bits after ~53 steps.

mod observable;
mod torus;
mod word;

pub use observable::{
    cylinder_diameter, empirical_cat_cylinder_diameter, max_uniform_zscore, pushforward_histogram,
    rectangle_value, validate_rectangles, variation_estimate, CylinderDiameter, Observable,
    Rectangle, SymbolicSystem,
};
pub use torus::{
    cat_map_eigenvalues, cat_map_step, eigenvalues, FixedPointT2, CAT_MATRIX, GUARD_BITS_PER_STEP,
};
pub use word::{baker_map, baker_step, dyadic_fraction, dyadic_map, BitWord, COORDINATE_BITS};
