//! Geodesics of the central chart: conserved c² and E in three regimes.

use conegeom::chart::ChartConnection;
use conegeom::ode::{integrate, max_drifts, ODE_STEP};

fn main() -> conegeom::Result<()> {
    let chart = ChartConnection::central(3)?;
    for (name, x0, v0) in [
        ("circular", [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
        ("escaping", [1.5, 0.0, 0.0], [0.0, 1.0 / 1.5, 0.0]),
        ("collapsing", [0.8, 0.0, 0.0], [-0.1, 1.25, 0.0]),
    ] {
        let run = integrate(&chart, &x0, &v0, 10.0, ODE_STEP)?;
        let (dc, de) = max_drifts(&run.states)?;
        let last = run.states.last().unwrap();
        let r = last.x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let stop = run.stopped.map(|e| e.to_string()).unwrap_or_else(|| "ran to T".into());
        println!("{name:>10}: t = {:.3}, r = {r:.4}, drift c² {dc:.1e}, E {de:.1e} ({stop})", last.t);
    }
    Ok(())
}
