//! Localized and extended energy windows of Model 2 inside its critical phase.

use nhqc::localization::{default_ipr_threshold, mobility_edge_table, profile};
use nhqc::model::{build_hamiltonian, ModelKind, ModelSpec};
use nhqc::spectrum::{decompose, default_tol_imag};

fn main() -> nhqc::Result<()> {
    let spec = ModelSpec::fibonacci(ModelKind::Model2, 13).with_v(6.0).with_phi(std::f64::consts::FRAC_PI_2).with_beta(1.1);
    let dec = decompose(&build_hamiltonian(&spec)?)?;
    let prof = profile(&dec);
    let table = mobility_edge_table(&dec, &prof, default_tol_imag(&dec), default_ipr_threshold(dec.len()));
    println!("{} states, eta = {:.3}", dec.len(), prof.eta);
    for iv in &table.intervals {
        println!(
            "{:>9} [{:8.3}, {:8.3}] {:4} states real={} complex={}",
            iv.class.name(),
            iv.re_min,
            iv.re_max,
            iv.count,
            iv.all_real,
            iv.all_complex
        );
    }
    println!("mobility edges: {:?}", table.edges.iter().map(|e| format!("{e:.3}")).collect::<Vec<_>>());
    Ok(())
}
