//! Builds each model, prints its hoppings and first onsite blocks, and runs
//! the PT rotation check of the momentum-space form.

use nhqc::model::{build_hamiltonian, build_momentum_hamiltonian, pt_operator_check, ModelKind, ModelSpec};
use nhqc::spectrum::decompose;
use nhqc::validate::spectral_distance;

fn main() -> nhqc::Result<()> {
    for kind in [ModelKind::Model1, ModelKind::Model2, ModelKind::Model3] {
        let spec = ModelSpec::fibonacci(kind, 6).with_j(0.8).with_v(1.2).with_phi(0.4).with_beta(0.3).with_gamma(0.2);
        let (jl, jr) = spec.hoppings();
        println!("{kind}: L={} J_L={jl:.4} J_R={jr:.4}", spec.len);
        for n in 1..=2 {
            println!("  onsite block at n={n}: {:?}", spec.onsite(n).0);
        }
        let h = build_hamiltonian(&spec)?;
        println!("  Hermiticity defect {:.3e}", h.hermiticity_defect());
        if kind != ModelKind::Model3 {
            let real_space = decompose(&h)?.eigenvalues;
            let momentum = decompose(&build_momentum_hamiltonian(&spec)?)?.eigenvalues;
            println!("  real-space vs momentum spectra differ by {:.2e}", spectral_distance(&real_space, &momentum));
        }
    }
    let pt = pt_operator_check();
    println!("PT rotation check passed: {} (residual {:.1e})", pt.passed(), pt.max_residual);
    Ok(())
}
