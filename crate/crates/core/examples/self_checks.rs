//! Runs the small-lattice consistency checks with a short random sample.

use nhqc::validate::{run_oracle_suite, OracleOptions};

fn main() {
    let report = run_oracle_suite(&OracleOptions { seed: 1, n_random: 20 });
    print!("{report}");
    std::process::exit(if report.passed() { 0 } else { 1 });
}
