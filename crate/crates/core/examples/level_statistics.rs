//! Mean adjacent gap ratio of Model 1 across the J axis, with a histogram of
//! the localized-phase ratios.

use nhqc::levels::{adjacent_gap_ratio, histogram_csv};
use nhqc::model::{build_hamiltonian, ModelKind, ModelSpec};
use nhqc::spectrum::decompose;

fn main() -> nhqc::Result<()> {
    let base = ModelSpec::fibonacci(ModelKind::Model1, 12).with_v(1.0).with_phi(std::f64::consts::PI / 10.0);
    for j in [0.05, 0.3, 0.5, 0.8, 1.2] {
        let agr = adjacent_gap_ratio(&decompose(&build_hamiltonian(&base.clone().with_j(j))?)?)?;
        println!("J={j:<4} g_mean={:.3} ratios={} merged={}", agr.g_mean, agr.g_values.len(), agr.n_dropped);
    }
    let agr = adjacent_gap_ratio(&decompose(&build_hamiltonian(&base.with_j(0.05))?)?)?;
    print!("{}", histogram_csv(&agr, 10));
    Ok(())
}
