//! Realness of the Model 2 spectrum along the nonreciprocity β.

use nhqc::model::{build_hamiltonian, ModelKind, ModelSpec};
use nhqc::spectrum::{decompose, default_tol_imag, realness};

fn main() -> nhqc::Result<()> {
    let base = ModelSpec::fibonacci(ModelKind::Model2, 12).with_v(6.0).with_phi(std::f64::consts::FRAC_PI_2);
    println!("beta,e_imag_max,rho,path");
    for step in 0..=10 {
        let beta = 0.25 * step as f64;
        let dec = decompose(&build_hamiltonian(&base.clone().with_beta(beta))?)?;
        let r = realness(&dec, default_tol_imag(&dec));
        println!("{beta:.2},{:.3e},{:.3},{:?}", r.e_imag_max, r.rho, dec.path);
    }
    Ok(())
}
