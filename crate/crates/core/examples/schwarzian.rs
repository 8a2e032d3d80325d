//! Solving S(f) = 2r through the linear system, with checks against closed forms.

use conegeom::ode::{fit_lft, schwarzian_of_samples, schwarzian_solve, SchwarzianProblem};

fn main() -> conegeom::Result<()> {
    let flat = schwarzian_solve(&SchwarzianProblem::constant(0.0, 1.0, 1.0, 2.0, (-0.5, 0.5), 1e-3)?);
    let worst = flat.samples.iter().map(|s| (s.f - 1.0 / (1.0 - s.t)).abs()).fold(0.0, f64::max);
    println!("r = 0: max |f − 1/(1−t)| = {worst:.1e}");

    let kappa = 0.35;
    let sol = schwarzian_solve(&SchwarzianProblem::constant(kappa, 0.3, -0.7, 0.4, (-0.6, 0.6), 1e-3)?);
    let fs = sol.fs();
    let mid = fs.len() / 2 + 100;
    println!("r = {kappa}: S(f) at t = {:.2} is {:.8}", sol.samples[mid].t, schwarzian_of_samples(&fs, sol.dt, mid, 1)?);

    let other = schwarzian_solve(&SchwarzianProblem::constant(kappa, -1.0, 2.0, 0.0, (-0.6, 0.6), 1e-3)?);
    let n = fs.len().min(other.samples.len());
    let fit = fit_lft(&other.fs()[..n], &fs[..n])?;
    println!("two solutions differ by an LFT: coefficients {:?}, residual {:.1e}", fit.coeffs, fit.residual);
    Ok(())
}
