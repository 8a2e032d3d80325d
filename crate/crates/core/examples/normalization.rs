//! A random cone shift of the qaf cone connection and its normalization back.

use conegeom::connection::{qacone_preset, random_annihilating_q};
use conegeom::tensor::max_abs_diff;
use rand::SeedableRng;

fn main() -> conegeom::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let kappa = 0.8;
    let t = [1.0 / kappa, 0.0, 0.0];
    let base = qacone_preset(-1.0, 1.0, kappa)?;
    let q = random_annihilating_q(&mut rng, &t, 1.0);
    let shifted = base.apply_cone_shift(&t, &q)?;
    let ric = shifted.curvature().ric;
    println!("shifted: symmetric Ricci part {:.3}", conegeom::tensor::sym_part(&ric).norm_inf());
    let back = shifted.normalize_antisym_ricci(&t)?;
    println!("normalized vs preset: {:.1e}", max_abs_diff(&back.full(), &base.full())?);
    Ok(())
}
