mod bundle;
mod covderiv;
pub mod identities;

pub use bundle::{fundamental_tensor, nonlinear_connection, BundleDerivatives, ConnectionBundle};
pub use covderiv::CovDerivs;
pub use identities::{run_all, run_suite, IdentityResidual, SUITES};
