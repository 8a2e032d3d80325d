//! Lifting base data (frame, Π, ω) to a cone connection and comparing Ricci forms.

use conegeom::cone_lift::{cone_connection, eta_two_form, BaseData};
use conegeom::connection::random_symmetric_pi;
use conegeom::lie::{FrameAlgebra, Preset};
use conegeom::tensor::{max_abs_diff, L};
use conegeom::DenseTensor;
use rand::SeedableRng;

fn main() -> conegeom::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let frame = FrameAlgebra::preset(Preset::QaIm(-1.0, 1.0))?;
    let pi = random_symmetric_pi(&mut rng, 3, 0.5);
    let omega = DenseTensor::matrix(3, [L, L], |i, j| [[0.0, 0.3, -0.2], [-0.3, 0.0, 0.5], [0.2, -0.5, 0.0]][i][j]);
    let base = BaseData::new(frame, pi, omega)?;
    let lifted = cone_connection(&base)?;
    let eta = eta_two_form(&base);
    let ric = lifted.connection().curvature().ric;
    println!("eta =\n{}", eta.to_matrix());
    println!("|Ric + 2η| = {:.1e}", max_abs_diff(&ric, &eta.scale(-2.0).embed(4))?);
    let s = 0.9;
    let cf = lifted.ricci_closed_form(0.0, s)?;
    println!("closed form vs direct at t = 0: {:.1e}", max_abs_diff(&cf.ric, &lifted.ricci_direct(0.0, s)?)?);
    println!("modified identities: {:.1e}", lifted.modified_identities(0.0, s)?.max());
    Ok(())
}
