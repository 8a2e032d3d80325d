//! Conjugate connections, statistical structures and AH/Einstein reports.

use conegeom::lie::{FrameAlgebra, Preset};
use conegeom::metric::{ah_curvature_relation_defect, ah_data, conjugate_curvature_defect, einstein_ah_report, random_ah, random_statistical, structure_report};
use rand::SeedableRng;

fn main() -> conegeom::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let (c, h) = random_statistical(&mut rng, 3);
    let rep = structure_report(&c, &h, None)?;
    let (curv, gap) = conjugate_curvature_defect(&c, &h)?;
    println!("statistical {:.1e}, special {:.3}, R̄ + R {:.1e}, scalar gap {:.1e}", rep.statistical_defect, rep.special_defect, curv, gap);

    let frame = FrameAlgebra::preset(Preset::Aff1c)?;
    let (c, g) = random_ah(&mut rng, &frame);
    let d = ah_data(&c, &g)?;
    println!("AH defect {:.1e}, chi {:?}", d.ah_defect(), d.chi);
    println!("curvature relation {:.1e}", ah_curvature_relation_defect(&c, &g)?);
    let e = einstein_ah_report(&c, &g)?;
    println!("scalar {:.4}, naive Einstein {:.3}, conservation {:.3}", e.scalar, e.naive_defect, e.conservation_defect);
    Ok(())
}
