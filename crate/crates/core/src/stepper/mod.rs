//! Stiff-aware time stepping: the constant-coefficient singular and
//! diffusive parts are tabulated per wavenumber and integrated exactly by
//! cached matrix exponentials (or implicitly by the IMEX scheme); the
//! variable-coefficient and nonlinear remainder is treated explicitly.

pub mod expm;
pub mod integrate;
pub mod scheme;
pub mod split;

pub use expm::expm;
pub use integrate::{integrate, integrate_full, Monitor, TrajectorySummary};
pub use scheme::{choose_dt, step, Scheme, StepperCache, StepperConfig};
pub use split::{build_split, ExpCache, ImplicitCache, SplitOperator};
