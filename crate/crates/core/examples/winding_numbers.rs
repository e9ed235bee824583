//! Spectral winding numbers of Model 1 around base energies picked from the
//! J-sweep itself.

use nhqc::localization::{default_ipr_threshold, profile};
use nhqc::model::{build_hamiltonian, ModelKind, ModelSpec};
use nhqc::spectrum::decompose;
use nhqc::topology::{select_base_energies, winding_pair, winding_trace, SweepStates, WindingOptions};

fn main() -> nhqc::Result<()> {
    let base = ModelSpec::fibonacci(ModelKind::Model1, 11).with_v(1.0).with_phi(std::f64::consts::PI / 10.0);
    let js: Vec<f64> = (1..=12).map(|k| 0.1 * k as f64).collect();
    let mut states = Vec::new();
    let mut threshold = 0.0;
    for &j in &js {
        let dec = decompose(&build_hamiltonian(&base.clone().with_j(j))?)?;
        threshold = default_ipr_threshold(dec.len());
        states.push(SweepStates::new(j, &dec, &profile(&dec)));
    }
    let bases = select_base_energies(&states, threshold)?;
    println!("base energies E1={:.4} E2={:.4}", bases.e1, bases.e2);
    let opts = WindingOptions::default();
    for &j in &js {
        let w = winding_pair(&base.clone().with_j(j), bases, &opts)?;
        println!("J={j:.1} w1={} w2={}", w.w1, w.w2);
    }
    let trace = winding_trace(&base.clone().with_j(0.5), bases.e1, &opts)?;
    println!("J=0.5 trace around E1: {} samples, total {:.6} turns", trace.theta.len(), trace.total());
    Ok(())
}
