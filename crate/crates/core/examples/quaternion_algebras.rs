//! Products in the algebras qaf[α₁, α₂], the Euler formula and the adjoint rotation.

use conegeom::clifford::CliffordParams;

fn main() -> conegeom::Result<()> {
    for (a1, a2) in [(-1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
        let p = CliffordParams::new(a1, a2);
        let (e1, e2) = (p.basis(1), p.basis(2));
        let e12 = e1.multiply(&e2)?;
        let w = p.imaginary([0.6, 0.0, 0.8]);
        let r = w.euler_exp(0.3)?;
        println!("qaf[{a1},{a2}]: e1e2 = {:?}, n(w) = {}, n(exp(0.3w)) = {:.15}", e12.q, w.norm(), r.norm());
        if w.norm() != 0.0 {
            println!("  rotation block:\n{}", w.rodrigues(0.3)?);
        }
    }
    Ok(())
}
