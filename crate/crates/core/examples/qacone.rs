//! The cone connection on Im qaf[α₁, α₂]: radiant and conelike defects and Ricci.

use conegeom::connection::qacone_preset;

fn main() -> conegeom::Result<()> {
    for (a1, a2, kappa) in [(-1.0, -1.0, 1.0), (1.0, 1.0, 0.5), (-1.0, 1.0, 2.0), (1.0, 0.0, 1.0)] {
        let c = qacone_preset(a1, a2, kappa)?;
        let t = [1.0 / kappa, 0.0, 0.0];
        let sol = c.conelike_solve(&t)?;
        let cd = c.curvature_with_rho(&t);
        println!(
            "({a1:>4}, {a2:>4}, κ={kappa}): radiant {:.1e}, conelike {:.1e}, ric(E2,E3) = {}, rho = {:?}",
            c.radiant_defect(&t),
            sol.residual,
            cd.ric[[1, 2]],
            cd.rho.unwrap()
        );
    }
    Ok(())
}
