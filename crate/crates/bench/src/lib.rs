//! Fixtures shared by the benchmarks: one representative strategy per
//! family and the settings used to time them.

use predictive::cid::{Copula, CopulaSchedule, ExpSmoothing, Hmw};
use predictive::exch::{Dirichlet, Species, SpeciesRule};
use predictive::stationary::{CyclicMarkov, StableAr};
use predictive::{Density, Measure};

pub fn std_normal() -> Measure {
    Measure::gaussian(0.0, 1.0).expect("valid normal")
}

pub fn dirichlet_binary() -> Dirichlet {
    Dirichlet::classical(1.0, Measure::uniform(2).expect("valid alphabet")).expect("valid Dirichlet")
}

pub fn dirichlet_real(c: f64) -> Dirichlet {
    Dirichlet::classical(c, std_normal()).expect("valid Dirichlet")
}

pub fn pitman_yor() -> Species {
    Species::new(SpeciesRule::PoissonDirichlet { b: 0.5, c: 1.0 }, std_normal()).expect("valid species rule")
}

pub fn smoothing() -> ExpSmoothing {
    ExpSmoothing::new(0.5, Measure::uniform(2).expect("valid alphabet")).expect("valid smoothing")
}

pub fn hmw(rho: f64) -> Hmw {
    let f0 = Density::Gaussian { mean: 0.0, var: 1.0 };
    Hmw::new(f0, CopulaSchedule::Fixed(vec![Copula::gaussian(rho).expect("valid rho")])).expect("valid HMW")
}

pub fn cyclic() -> CyclicMarkov<f64> {
    CyclicMarkov::new(vec![0.1, 0.2, 0.3, 0.4], 2, 2).expect("valid h")
}

pub fn stable_ar(gamma: f64) -> StableAr {
    StableAr::new(gamma, 0.0, 1.0, 0.5).expect("valid autoregression")
}
