//! Families under which the observations are stationary, and the symmetric
//! stable laws they use.

pub mod ar;
pub mod cyclic;
pub mod stable;

pub use ar::StableAr;
pub use cyclic::{cyclic_symmetrize, CyclicMarkov, CyclicMarkovGrid};
pub use stable::StableLaw;
