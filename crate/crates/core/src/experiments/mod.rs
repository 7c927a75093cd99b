//! Reproducible experiment protocols: steady-state and generation-count
//! measurements on the sphere, μ-schedules, fixed-μ signal traces, PCS runs,
//! Rastrigin benchmarks and the offspring-median shift oracle.
//!
//! Every protocol takes a master seed; trial `i` of configuration `label`
//! always draws from the same stream, whatever the number of workers.

mod benchmark;
mod median_shift;
mod params;
mod runner;
mod schedule;
mod signals;
mod sphere;
mod trial;

pub use benchmark::{
    pcs_table_suite, rastrigin_ladder, rastrigin_n_sweep, run_benchmark, BenchmarkConfig, BenchmarkResult,
    RASTRIGIN_LADDER,
};
pub use median_shift::{median_shift_oracle, MedianShift};
pub use params::{ParamSet, Preset};
pub use runner::{par_trials, with_workers};
pub use schedule::{run_schedule, ScheduleConfig, ScheduleResult, ScheduleRow, ScheduleVerdict};
pub use signals::{measure_signals_fixed_mu, SignalConfig, SignalRow, SignalTrace};
pub use sphere::{
    measure_gamma, measure_generation_count, measure_psa_steady_state, GammaConfig, GammaMeasurement, GammaTrial,
    GenCountConfig, GenCountResult, PsaSteadyMeasurement,
};
pub use trial::{run_pcs_trial, run_plain_trial, TraceRow, TrialConfig, TrialRecord};
