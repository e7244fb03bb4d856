//! Decay fitting, uncertainty, planning, and model-side oracles.
//!
//! The benchmark side: [`fit_decay`] fits f̄_d = A·p^d to per-depth mean
//! success values and converts p to the layer error rate r_Ω, with
//! [`bootstrap`] resampling circuits for uncertainties and
//! [`plan_samples`] sizing the experiment up front.
//!
//! The model side, for validating the benchmark against a known noise
//! model: [`epsilon_omega_oracle`] computes the rate the benchmark should
//! report by fitting exact core polarizations, and
//! [`build_l_superchannel`] predicts the decay rate spectrally as the
//! second eigenvalue of the layer-averaged superchannel.

mod fit;
mod lsuper;
mod oracle;
mod planner;

pub use fit::{
    bootstrap, fit_dataset, fit_decay, per_qubit_rate, r_omega, DecayCurve, DecayFit, DecayPoint,
    FitOptions, FitSigma, FitStatus, RateConvention,
};
pub use lsuper::{
    build_l_superchannel, build_l_superchannel_sampled, enumerate_omega_layers,
    LSuperchannelReport, MAX_SUPERCHANNEL_QUBITS,
};
pub use oracle::{
    epsilon_omega_oracle, epsilon_omega_oracle_with, EpsilonOmegaEstimate, EpsilonOmegaOptions,
};
pub use planner::{plan_samples, PlannerInput, PlannerOutput, TwoDepthPlan};
