//! Reference engines that do not rely on the path-integral approximation.

pub mod convolution;
pub mod mc;
pub mod pde;
pub mod tridiag;

pub use convolution::{
    bond_from_convolution, convolution_grid, short_time_convolution, short_time_convolution_x,
    short_time_kernel, Convention, ConvolutionSolution,
};
pub use pde::{
    bond_from_pde, solve_fokker_planck, solve_fokker_planck_x, Boundary, FokkerPlanckSolution,
    PdeGrid,
};
pub use mc::{monte_carlo_bond, McEstimate};
