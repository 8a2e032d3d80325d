//! Einstein-Weyl branches of the lifted Berger structure for a range of κ.

use conegeom::cone_lift::berger_ew;

fn main() -> conegeom::Result<()> {
    for a2 in [-1.0, 1.0] {
        for kappa in [0.5, 1.0, 1.5, 1.9, 2.0, 2.5] {
            let ew = berger_ew(-1.0, a2, kappa, 0.0)?;
            println!("α₂ = {a2:>4}, κ = {kappa}: α = {:.4}, {} real s", ew.fit.alpha, ew.branches.len());
            for b in &ew.branches {
                println!("    s = {:+.6}: weyl {:.1e}, ricci {:.1e}, conservation {:.1e}", b.s, b.weyl, b.ricci, b.conservation);
            }
        }
    }
    Ok(())
}
