//! Dilatative fields on a flat chart and their radiantization.

use conegeom::chart::{ChartConnection, FD_STEP};

fn main() -> conegeom::Result<()> {
    let chart = ChartConnection::flat(3)?;
    let x = [0.4, -0.3, 0.7];
    let power = |y: &[f64]| {
        let r2: f64 = y.iter().map(|v| v * v).sum();
        y.iter().map(|v| r2 * v).collect::<Vec<f64>>()
    };
    let rotation = |y: &[f64]| vec![-y[1], y[0], 0.0];
    println!("|x|²x projectively dilatative defect {:.1e}", chart.proj_dilatative_defect_at(&power, &x, FD_STEP)?);
    println!("rotation projectively dilatative defect {:.1e}", chart.proj_dilatative_defect_at(&rotation, &x, FD_STEP)?);
    let split = chart.dilatation_split(&power, &x, FD_STEP)?;
    println!("∇X = fδ + σ⊗X with f = {:.6}, σ = {:?}", split.f, split.sigma);
    let rad = chart.radiantize_at(&power, &x, FD_STEP)?;
    println!("radiantized: scale {:.6}, radiant defect {:.1e}, torsion {:.1e}", rad.scale, rad.defect, rad.torsion);
    Ok(())
}
