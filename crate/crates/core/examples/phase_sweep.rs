//! Runs a plan file through the sweep engine and reads the phase boundaries
//! off the result.

use nhqc::sweep::transitions::{critical_window, phase_boundaries};
use nhqc::sweep::{run_sweep, to_csv, SweepPlan};

const PLAN: &str = "
model.kind = model3
model.L = 144
model.V = 0.5
model.phi = pi/2
axis1.param = gamma
axis1.start = 0
axis1.stop = 1.2
axis1.step = 0.1
diagnostics = realness, localization
";

fn main() -> nhqc::Result<()> {
    let plan = SweepPlan::parse(PLAN)?;
    let res = run_sweep(&plan)?;
    print!("{}", to_csv(&res));
    for b in phase_boundaries(&res.rows) {
        println!("boundary at gamma={:.2}: {:?} -> {:?}", b.at, b.from, b.to);
    }
    println!("critical window {:?}", critical_window(&res.rows));
    Ok(())
}
