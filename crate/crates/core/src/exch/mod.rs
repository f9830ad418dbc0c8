//! Families under which the observations are exchangeable.

pub mod dirichlet;
pub mod species;
pub mod stick;
pub mod urn;

pub use dirichlet::{Dirichlet, FiniteDirichlet};
pub use species::{partition_law, species_weights, Species, SpeciesRule};
pub use stick::{StickBreaking, StickDraw};
pub use urn::{Urn, UrnState};
