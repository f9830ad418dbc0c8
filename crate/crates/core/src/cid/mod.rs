//! Families under which the observations are conditionally identically
//! distributed, plus a fixture that is not.

pub mod adversarial;
pub mod change_point;
pub mod covariate;
pub mod hmw;
pub mod recursive;
pub mod smoothing;

pub use adversarial::Adversarial;
pub use change_point::{ChangePoint, PostMode, StopRule};
pub use covariate::Covariate;
pub use hmw::{Copula, CopulaChain, CopulaSchedule, Hmw, TabulatedCopula};
pub use recursive::{QSchedule, RecursiveUpdate};
pub use smoothing::ExpSmoothing;
