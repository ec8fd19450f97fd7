//! Comparison of simulation with theory, exact combinatorial identities and
//! the finite-matrix two-line determinant check.

pub mod combinatorics;
pub mod experiments;
pub mod stats;
pub mod trace;

pub use combinatorics::{binomial, circular_placements, hockey_stick};
pub use experiments::{
    experiments, exponent_fit, exponent_target, gumbel_cdf, gumbel_experiment, half_offset_correlations,
    run_experiment, triviality_probe, Check, ExperimentEntry, GumbelResult, TabulatedCdf, TrivialityResult,
};
pub use stats::{fit_log_variance, ks_distance, ks_two_sample, pearson, EmpiricalDist, LogLogFit};
pub use trace::{trace_identity_check, GSign, TraceInstance, TraceReport, TwoLineKernelMatrix};
