//! Projective parameters of projected cone lines on the quadric charts.

use conegeom::chart::ChartConnection;
use conegeom::ode::{projective_kappa, CURVE_STEP};

fn main() -> conegeom::Result<()> {
    for eps in [1.0, -1.0] {
        let chart = ChartConnection::projflat_quadric(2, eps)?;
        let p = |x: &[f64]| chart.schouten_closed_form(x).unwrap();
        let (z0, w) = ([0.2, -0.1, 1.0], [0.3, 0.25, 0.4]);
        let line = |t: f64| vec![(z0[0] + t * w[0]) / (z0[2] + t * w[2]), (z0[1] + t * w[1]) / (z0[2] + t * w[2])];
        let bent = |t: f64| line(t.tan());
        let ts = [0.0, 0.25, 0.5];
        let k0: Vec<String> = projective_kappa(&chart, &line, &p, &ts, CURVE_STEP, 1e-6)?.iter().map(|k| format!("{:.1e}", k.kappa)).collect();
        let k1: Vec<f64> = projective_kappa(&chart, &bent, &p, &ts, CURVE_STEP, 1e-6)?.iter().map(|k| k.kappa).collect();
        println!("ε = {eps:+}: κ along the line {k0:?}, after t ↦ tan t {k1:.6?}");
    }
    Ok(())
}
