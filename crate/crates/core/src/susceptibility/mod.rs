//! Entanglement and fidelity susceptibilities, the bounds relating them,
//! finite-difference cross-checks, the doubled/twisted purity identity and the
//! imaginary-time cumulant series.

mod amplitudes;
mod bounds;
mod cumulant;
mod doubled;
mod finite_diff;

pub use amplitudes::{perturbation_amplitudes, perturbative_rdm, PerturbationAmplitudes, PerturbativeRdm};
pub use bounds::{area_bound, correlator_bound, susceptibility_report, SusceptibilityReport, CHAIN_SLACK};
pub use cumulant::{
    beta_grid_for_gap, cumulants, fidelity_beta_limit, unperturbed, BetaLimit, CumulantFit,
    CumulantSeries, DEFAULT_LAMBDA_PROBES, DEFAULT_TAIL_BETA_GAP, MAX_ORDER,
};
pub use doubled::{
    swap_purity, twisted_ground_overlap, DoubledSystem, TwistedOverlap, DEFAULT_DOUBLED_CAP,
};
pub use finite_diff::{
    chi_e_fd, chi_f_fd, entanglement_derivative, fidelity, renyi2_at, FdEstimate, DEFAULT_PROBES,
};
