//! Solutions of `y'' + a(x) y + c / y^3 = 0` built from two solutions of the
//! linear equation `w'' + a(x) w = 0`, plus a direct integrator used as an oracle.

pub mod constcoeff;
pub mod error;
pub mod expr;
pub mod linode;
pub mod oracle;
pub mod pinney;
pub mod problem;
pub mod rk;
pub mod singular;

pub use constcoeff::{
    closed_form_pair, energy_constant, z_closed_form, ClosedFormPair, EnergyConstant, Regime, ZClosedForm,
};
pub use error::{ExprError, PinneyError, Result};
pub use expr::{parse_coefficient, CoefficientSpec, ExprNode};
pub use linode::{integrate_pair, integrate_pair_over, wronskian, DensePairSolution, FundamentalPairState};
pub use oracle::{
    cross_validate, integrate_direct, integrate_direct_over, CrossValidation, DirectSolution, Termination,
};
pub use pinney::{compose_solution, method_agreement, residual, solve, Method, SolveOutput, SolvedPoint};
pub use problem::{
    equilibrium_solution, validate_problem, Branch, PinneyProblem, SampleMethod, SolutionSample, SolverConfig,
};
pub use singular::{find_singularities, Factor, SingularPoint, SingularityReport};
