//! Half-chain entanglement of Model 1 in its extended and localized phases,
//! and the entanglement spectrum against the filling level.

use nhqc::entanglement::{entanglement_entropy, es_vs_energy_scan, OccupationRule, Subsystem};
use nhqc::model::{build_hamiltonian, ModelKind, ModelSpec};
use nhqc::spectrum::{decompose, default_tol_imag};

fn main() -> nhqc::Result<()> {
    let base = ModelSpec::fibonacci(ModelKind::Model1, 12).with_v(1.0).with_phi(std::f64::consts::PI / 10.0);
    for j in [0.1, 0.5, 2.0] {
        let dec = decompose(&build_hamiltonian(&base.clone().with_j(j))?)?;
        let sub = Subsystem::half(dec.sites());
        let s = entanglement_entropy(&dec, &OccupationRule::AllRealEnergy(default_tol_imag(&dec)), &sub)?;
        println!("J={j}: S = {:.4} (4 ln 2 = {:.4})", s.entropy, 4.0 * 2f64.ln());
    }
    let dec = decompose(&build_hamiltonian(&base.with_j(2.0))?)?;
    let sub = Subsystem::half(dec.sites());
    for cut in es_vs_energy_scan(&dec, &sub, 9)? {
        let pinned = cut.spectrum.pinned_fraction(1e-6);
        println!("cutoff {:8.3}: S = {:.4}, {:.0}% of zeta pinned at 0 or 1", cut.cutoff, cut.spectrum.entropy, 100.0 * pinned);
    }
    Ok(())
}
