//! At φ = 0 the two spin sectors decouple into scalar chains whose spectra
//! make up the full spectrum.

use nhqc::model::{build_abelian_chains, build_hamiltonian, ModelKind, ModelSpec};
use nhqc::spectrum::{decompose, decompose_matrix, default_tol_imag, realness};
use nhqc::validate::spectral_distance;

fn main() -> nhqc::Result<()> {
    let spec = ModelSpec::fibonacci(ModelKind::Model2, 11).with_v(6.0).with_phi(0.0).with_beta(0.8);
    let full = decompose(&build_hamiltonian(&spec)?)?;
    let chains = build_abelian_chains(&spec)?;
    let mut union = decompose_matrix(&chains.up, 1, true)?.eigenvalues;
    union.extend(decompose_matrix(&chains.down, 1, true)?.eigenvalues);
    println!("solver path {:?}", full.path);
    println!("full vs chain-union spectra differ by {:.2e}", spectral_distance(&full.eigenvalues, &union));
    for beta in [0.6, 1.0, 1.2, 1.6] {
        let dec = decompose(&build_hamiltonian(&spec.clone().with_beta(beta))?)?;
        let r = realness(&dec, default_tol_imag(&dec));
        println!("beta={beta}: rho={:.3} (real-complex transition near ln 3 = {:.3})", r.rho, 3f64.ln());
    }
    Ok(())
}
