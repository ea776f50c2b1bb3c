//! Monte-Carlo experiments, exact oracles and report output.

mod experiment;
mod report;
mod scenario;
mod selftest;
mod stats;

pub use experiment::{
    failure_independence, run_experiment, run_rounds, run_sessions, ExperimentConfig,
    ExperimentReport, IndependenceTest, Tally,
};
pub use report::{emit_report, parse_json_report, write_report, ReportFormat, CSV_HEADER};
pub use scenario::{
    cell_label, compare_tables, oracle_table, run_oracle_check, simulate_scenario, CellCheck,
    CellKey, EmpiricalTable, OracleTable, Scenario, ScenarioKind,
};
pub use selftest::{selftest, Check};
pub use stats::{
    binomial_std_error, chi_square_2x2, mutual_information_bits, mutual_information_of,
    within_binomial_band, RateEstimate, CHI_SQUARE_1DF_CRITICAL_001,
};
