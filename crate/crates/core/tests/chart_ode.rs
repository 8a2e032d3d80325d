use std::sync::Arc;

use conegeom::chart::{ChartConnection, FD_STEP};
use conegeom::ode::*;
use conegeom::tensor::dot;
use conegeom::{DenseTensor, Error};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn sample_points() -> Vec<Vec<f64>> {
    vec![
        vec![0.7, -0.2, 0.4],
        vec![1.3, 0.5, -0.9],
        vec![-0.4, 0.8, 0.6],
        vec![0.2, 0.1, -1.7],
        vec![-1.1, -0.6, 0.3],
    ]
}

#[test]
fn central_family_acceleration_matches_closed_form() {
    let c = ChartConnection::central(3).unwrap();
    let x = [0.7, -0.2, 0.4];
    let v = [0.3, 1.1, -0.5];
    let a = c.acceleration(&x, &v).unwrap();
    let r2 = dot(&x, &x);
    let coef = r2.powf(-2.5) * (dot(&v, &v) * r2 - dot(&x, &v).powi(2));
    for i in 0..3 {
        assert!((a[i] + coef * x[i]).abs() < 1e-14);
    }
}

#[test]
fn central_family_is_ricci_flat_and_radiant() {
    for dim in [3, 4] {
        let c = ChartConnection::central(dim).unwrap();
        for p in sample_points() {
            let mut x = p.clone();
            x.resize(dim, 0.35);
            let k = c.curvature_at(&x, FD_STEP).unwrap();
            assert!(k.ricci.norm_inf() <= 1e-5, "dim {dim}: {}", k.ricci.norm_inf());
            assert!(k.riemann.norm_inf() > 1e-2, "the central chart is not flat");
            assert!(c.radiant_defect_at(&x, FD_STEP).unwrap() <= 1e-6);
        }
    }
}

#[test]
fn radiant_power_ricci_is_multiple_of_q() {
    // For σ = 0 the Ricci tensor is (n − 1 + α) Q with Q_ij = |x|^{α−4}(|x|²δ_ij − x_i x_j), n + 1 the dimension.
    let alpha = 0.5;
    let c = ChartConnection::radiant_power(alpha, DMatrix::identity(3, 3)).unwrap();
    for x in sample_points() {
        let ric = c.curvature_at(&x, FD_STEP).unwrap().ricci;
        let r2 = dot(&x, &x);
        for i in 0..3 {
            for j in 0..3 {
                let q = r2.powf((alpha - 4.0) / 2.0) * (r2 * if i == j { 1.0 } else { 0.0 } - x[i] * x[j]);
                assert!((ric[[i, j]] - (1.0 + alpha) * q).abs() < 1e-5);
            }
        }
    }
}

#[test]
fn quadric_ricci_at_origin() {
    for dim in [2, 3, 4] {
        let c = ChartConnection::projflat_quadric(dim, -1.0).unwrap();
        let ric = c.curvature_at(&vec![0.0; dim], FD_STEP).unwrap().ricci;
        for i in 0..dim {
            for j in 0..dim {
                let expect = if i == j { 1.0 - dim as f64 } else { 0.0 };
                assert!((ric[[i, j]] - expect).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn quadric_ricci_matches_closed_form_schouten_everywhere() {
    for eps in [1.0, -1.0] {
        let c = ChartConnection::projflat_quadric(3, eps).unwrap();
        for x in sample_points() {
            let x: Vec<f64> = x.iter().map(|v| v * 0.5).collect();
            let k = c.curvature_at(&x, FD_STEP).unwrap();
            let p = c.schouten_closed_form(&x).unwrap();
            assert!((&k.ricci - &p.scale(-2.0)).norm_inf() < 1e-4);
            // projectively flat in dimension 3: the Weyl part of the curvature vanishes
            let w = conegeom::connection::projective_weyl(&k.riemann, &conegeom::connection::schouten_of(&k.ricci));
            assert!(w.norm_inf() < 1e-4);
        }
    }
}

/// `G = ∇̂β + 2β⊗β` on the cone over the quadric equals `β⊗β − ρ*(P)`.
#[test]
fn quadric_cone_g_block() {
    let n = 3;
    for eps in [1.0, -1.0] {
        let c = ChartConnection::projflat_quadric(n, eps).unwrap();
        for (k, x) in sample_points().into_iter().enumerate() {
            let x: Vec<f64> = x.iter().map(|v| v * 0.4).collect();
            let t = 0.5 + 0.3 * k as f64;
            let z: Vec<f64> = x.iter().map(|xi| t * xi).chain([t]).collect();
            let ff = |z: &[f64]| z[n] * z[n] + eps * z[..n].iter().map(|a| a * a).sum::<f64>();
            let beta = |z: &[f64]| -> Vec<f64> {
                let h = 1e-5;
                (0..=n)
                    .map(|i| {
                        let mut p = z.to_vec();
                        let mut q = z.to_vec();
                        p[i] += h;
                        q[i] -= h;
                        0.5 * (ff(&p) - ff(&q)) / (2.0 * h) / ff(z)
                    })
                    .collect()
            };
            let b0 = beta(&z);
            let h = 1e-4;
            let p = c.curvature_at(&x, FD_STEP).unwrap().ricci.scale(-1.0 / (n as f64 - 1.0));
            let jac = |i: usize, a: usize| if i == n { -x[a] / t } else if i == a { 1.0 / t } else { 0.0 };
            let mut worst = 0.0f64;
            for i in 0..=n {
                let mut zp = z.clone();
                let mut zm = z.clone();
                zp[i] += h;
                zm[i] -= h;
                let (bp, bm) = (beta(&zp), beta(&zm));
                for j in 0..=n {
                    let g = (bp[j] - bm[j]) / (2.0 * h) + 2.0 * b0[i] * b0[j];
                    let mut pull = 0.0;
                    for a in 0..n {
                        for b in 0..n {
                            pull += p[[a, b]] * jac(i, a) * jac(j, b);
                        }
                    }
                    worst = worst.max((g - (b0[i] * b0[j] - pull)).abs());
                }
            }
            assert!(worst <= 1e-4, "eps {eps}: {worst}");
        }
    }
}

/// `det ∇̂dF` is constant for the quadratic `F`, and `det Dd|u|^{1/2} · |u|^{(n+2)/2}` is constant on the base.
#[test]
fn quadric_affine_sphere_constants() {
    let n = 3;
    for eps in [1.0f64, -1.0] {
        let ff = |z: &[f64]| z[n] * z[n] + eps * z[..n].iter().map(|a| a * a).sum::<f64>();
        let mut dets = vec![];
        for x in sample_points() {
            let z: Vec<f64> = x.iter().copied().chain([1.3]).collect();
            let h = 0.5;
            let hess = DMatrix::from_fn(n + 1, n + 1, |i, j| {
                let at = |si: f64, sj: f64| {
                    let mut p = z.clone();
                    p[i] += si * h;
                    p[j] += sj * h;
                    ff(&p)
                };
                (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * h * h)
            });
            dets.push(hess.determinant());
        }
        let expect = 2f64.powi(n as i32 + 1) * eps.powi(n as i32);
        assert!(dets.iter().all(|d| (d - expect).abs() <= 1e-10), "{dets:?}");

        let mut ks = vec![];
        for x in sample_points() {
            let x: Vec<f64> = x.iter().map(|v| v * 0.3).collect();
            let u = 1.0 + eps * dot(&x, &x);
            let w = DMatrix::from_fn(n, n, |i, j| {
                eps * if i == j { 1.0 } else { 0.0 } * u.abs().powf(-0.5) - x[i] * x[j] * u.abs().powf(-1.5)
            });
            ks.push(w.determinant() * u.abs().powf((n as f64 + 2.0) / 2.0));
        }
        assert!(ks.iter().all(|k| (k - ks[0]).abs() <= 1e-10), "{ks:?}");
    }
}

#[test]
fn power_field_is_projectively_dilatative() {
    let flat = ChartConnection::flat(3).unwrap();
    for alpha in [-1.5, -0.3, 0.0, 0.7] {
        let field = move |x: &[f64]| {
            let w = dot(x, x).powf(alpha);
            x.iter().map(|c| w * c).collect::<Vec<f64>>()
        };
        for x in sample_points() {
            assert!(flat.proj_dilatative_defect_at(&field, &x, FD_STEP).unwrap() <= 1e-6);
            let split = flat.dilatation_split(&field, &x, FD_STEP).unwrap();
            let r2 = dot(&x, &x);
            for i in 0..3 {
                assert!((split.sigma[i] - 2.0 * alpha * x[i] / r2).abs() < 1e-6);
            }
        }
    }
    let constant = |_: &[f64]| vec![1.0, -2.0, 0.5];
    assert_eq!(flat.proj_dilatative_defect_at(&constant, &[0.3, 0.2, 0.1], FD_STEP).unwrap(), 0.0);
    let rotation = |x: &[f64]| vec![-x[1], x[0], 0.0];
    assert!(flat.proj_dilatative_defect_at(&rotation, &[0.3, 0.2, 0.1], FD_STEP).unwrap() > 1e-3);
}

#[test]
fn radiantize_scaled_euler_field() {
    let flat = ChartConnection::flat(3).unwrap();
    let field = |x: &[f64]| {
        let w = dot(x, x);
        x.iter().map(|c| w * c).collect::<Vec<f64>>()
    };
    for x in sample_points() {
        let r = flat.radiantize_at(&field, &x, FD_STEP).unwrap();
        assert!(r.defect <= 1e-5, "{}", r.defect);
        assert!(r.torsion <= 1e-6);
    }
}

#[test]
fn radiantize_radiant_pair_is_identity() {
    let c = ChartConnection::central(3).unwrap();
    let x = [0.6, -0.8, 0.5];
    let r = c.radiantize_at(&|y: &[f64]| y.to_vec(), &x, FD_STEP).unwrap();
    assert!((r.scale - 1.0).abs() < 1e-8);
    assert!((&r.gamma - &c.christoffel(&x).unwrap()).norm_inf() < 1e-5);
    assert!(r.field.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-8));
    assert!(r.defect <= 1e-5);
}

#[test]
fn radiantize_rejects_vanishing_divergence() {
    let flat = ChartConnection::flat(3).unwrap();
    let e = flat.radiantize_at(&|_: &[f64]| vec![0.0, 1.0, 0.0], &[0.2, 0.4, 0.1], FD_STEP);
    assert_eq!(e.unwrap_err(), Error::VanishingDivergence);
}

#[test]
fn circular_geodesic_stays_on_unit_sphere() {
    let c = ChartConnection::central(3).unwrap();
    let s = geodesic_integrate(&c, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], 10.0, ODE_STEP).unwrap();
    let worst = s.iter().map(|st| (dot(&st.x, &st.x).sqrt() - 1.0).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-6, "{worst}");
    // the circle is traversed at unit angular speed
    let last = s.last().unwrap();
    assert!((last.x[0] - 10f64.cos()).abs() < 1e-6 && (last.x[1] - 10f64.sin()).abs() < 1e-6);
}

#[test]
fn collapse_below_inner_turning_point() {
    let c = ChartConnection::central(3).unwrap();
    let r0 = 0.8;
    let err = geodesic_integrate(&c, &[r0, 0.0, 0.0], &[-0.1, 1.0 / r0, 0.0], 50.0, ODE_STEP).unwrap_err();
    match err {
        Error::DomainViolation { t, x, .. } => {
            assert!(t < 50.0);
            assert!(dot(&x, &x).sqrt() < 0.1);
        }
        e => panic!("unexpected {e}"),
    }
    let run = integrate(&c, &[r0, 0.0, 0.0], &[-0.1, 1.0 / r0, 0.0], 50.0, ODE_STEP).unwrap();
    let radii: Vec<f64> = run.states.iter().map(|s| dot(&s.x, &s.x).sqrt()).collect();
    assert!(radii.windows(2).all(|w| w[1] < w[0]));
}

fn endpoint_error(c: &ChartConnection, x0: &[f64], v0: &[f64], t: f64, h: f64, exact: &[f64]) -> f64 {
    let s = geodesic_integrate(c, x0, v0, t, h).unwrap();
    let x = &s.last().unwrap().x;
    x.iter().zip(exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

#[test]
fn rk4_is_fourth_order_on_the_circle() {
    let c = ChartConnection::central(3).unwrap();
    let exact = [2f64.cos(), 2f64.sin(), 0.0];
    let e1 = endpoint_error(&c, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], 2.0, 0.04, &exact);
    let e2 = endpoint_error(&c, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], 2.0, 0.02, &exact);
    let ratio = e1 / e2;
    assert!((12.0..=20.0).contains(&ratio), "{ratio}");
}

#[test]
fn rk4_order_on_the_quadric_chart() {
    // Richardson-style order check: the fixture has no closed form, so compare to a fine reference.
    let c = ChartConnection::projflat_quadric(2, 1.0).unwrap();
    let (x0, v0) = ([0.3, -0.2], [0.7, 0.4]);
    let reference = geodesic_integrate(&c, &x0, &v0, 1.0, 1e-4).unwrap().last().unwrap().x.clone();
    let e1 = endpoint_error(&c, &x0, &v0, 1.0, 0.05, &reference);
    let e2 = endpoint_error(&c, &x0, &v0, 1.0, 0.025, &reference);
    let ratio = e1 / e2;
    assert!((12.0..=20.0).contains(&ratio), "{ratio}");
}

fn regimes() -> Vec<(&'static str, [f64; 3], [f64; 3])> {
    vec![
        ("circular", [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
        ("escaping", [1.5, 0.0, 0.0], [0.0, 1.0 / 1.5, 0.0]),
        ("collapsing", [0.8, 0.0, 0.0], [-0.1, 1.0 / 0.8, 0.0]),
    ]
}

#[test]
fn central_invariants_are_conserved() {
    let c = ChartConnection::central(3).unwrap();
    for (name, x0, v0) in regimes() {
        let run = integrate(&c, &x0, &v0, 10.0, ODE_STEP).unwrap();
        // the collapsing orbit is checked up to the point where r drops below 0.3
        let states: Vec<GeodesicState> = run.states.into_iter().take_while(|s| dot(&s.x, &s.x).sqrt() >= 0.3).collect();
        assert!(states.len() > 100, "{name}");
        let (dc, de) = max_drifts(&states).unwrap();
        assert!(dc <= 1e-6 && de <= 1e-6, "{name}: {dc:e} {de:e}");
    }
}

#[test]
fn radial_equation_of_motion() {
    let c = ChartConnection::central(3).unwrap();
    let n = 2.0;
    for (name, x0, v0) in regimes() {
        let run = integrate(&c, &x0, &v0, 6.0, ODE_STEP).unwrap();
        let states: Vec<&GeodesicState> = run.states.iter().take_while(|s| dot(&s.x, &s.x).sqrt() >= 0.5).collect();
        let (c_sq, _) = central_invariants(states[0], 3).unwrap();
        let r: Vec<f64> = states.iter().map(|s| dot(&s.x, &s.x).sqrt()).collect();
        let h = ODE_STEP;
        let mut worst = 0.0f64;
        for i in 2..r.len() - 2 {
            let rdd = (-r[i + 2] + 16.0 * r[i + 1] - 30.0 * r[i] + 16.0 * r[i - 1] - r[i - 2]) / (12.0 * h * h);
            worst = worst.max((rdd - c_sq * (r[i].powi(-3) - r[i].powf(-n - 2.0))).abs());
        }
        assert!(worst <= 1e-4, "{name}: {worst}");
    }
}

#[test]
fn csv_trace_shape() {
    let c = ChartConnection::central(3).unwrap();
    let s = geodesic_integrate(&c, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], 0.01, ODE_STEP).unwrap();
    let csv = trace_csv(&s);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,x1,x2,x3,v1,v2,v3,c_sq,energy,c_sq_drift,energy_drift");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), s.len());
    for row in rows {
        let cells: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells.len(), 11);
    }
    assert_eq!(csv, trace_csv(&s));
}

#[test]
fn flat_schwarzian_gives_the_lft() {
    let p = SchwarzianProblem::constant(0.0, 1.0, 1.0, 2.0, (-0.5, 0.9), 1e-3).unwrap();
    let sol = schwarzian_solve(&p);
    let at = |t: f64| sol.samples.iter().find(|s| (s.t - t).abs() < 1e-9).unwrap().f;
    assert!((at(0.5) - 2.0).abs() <= 1e-8);
    for s in &sol.samples {
        assert!((s.f - 1.0 / (1.0 - s.t)).abs() <= 1e-8);
    }
    // x₂ = 2 − 2t vanishes at t = 1
    let p = SchwarzianProblem::constant(0.0, 1.0, 1.0, 2.0, (0.0, 3.0), 1e-3).unwrap();
    let sol = schwarzian_solve(&p);
    assert!((sol.truncated_above.unwrap() - 1.0).abs() < 1e-9);
    assert!(sol.samples.last().unwrap().t < 1.0);

    let p = SchwarzianProblem::constant(0.0, 0.0, 1.0, 0.0, (-1.0, 1.0), 1e-3).unwrap();
    for s in schwarzian_solve(&p).samples {
        assert!((s.f - s.t).abs() <= 1e-12);
    }
}

#[test]
fn constant_schwarzian_solutions() {
    for kappa in [-0.8, 0.35, 2.0] {
        let p = SchwarzianProblem::constant(kappa, 0.3, -0.7, 0.4, (-0.6, 0.6), 1e-3).unwrap();
        let sol = schwarzian_solve(&p);
        let fs = sol.fs();
        let stride = 1;
        for i in (3 * stride..fs.len() - 3 * stride).step_by(37) {
            let s = schwarzian_of_samples(&fs, sol.dt, i, stride).unwrap();
            assert!((s - 2.0 * kappa).abs() <= 1e-6, "κ {kappa} at {}: {s}", sol.samples[i].t);
        }
        // initial conditions
        let zero = sol.samples.iter().find(|s| s.t == 0.0).unwrap();
        assert!((zero.f - 0.3).abs() < 1e-15 && (zero.fdot + 0.7).abs() < 1e-15);
        assert!((zero.u - 0.4 / 1.4).abs() < 1e-15);
    }
}

#[test]
fn riccati_linear_schwarzian_triangle() {
    let r: ScalarFn = Arc::new(|t: f64| 0.5 + 0.3 * (2.0 * t).sin());
    let p = SchwarzianProblem::new(r.clone(), -0.4, 1.2, 0.9, (-0.5, 0.5), 1e-3).unwrap();
    let sol = schwarzian_solve(&p);
    let fs = sol.fs();
    let dt = sol.dt;
    let stride = 4;
    for i in (2 * stride..fs.len() - 2 * stride).step_by(29) {
        let f = |k: usize| fs[k];
        let h = dt * stride as f64;
        let d1 = (-f(i + 2 * stride) + 8.0 * f(i + stride) - 8.0 * f(i - stride) + f(i - 2 * stride)) / (12.0 * h);
        let d2 = (-f(i + 2 * stride) + 16.0 * f(i + stride) - 30.0 * f(i) + 16.0 * f(i - stride) - f(i - 2 * stride)) / (12.0 * h * h);
        let s = &sol.samples[i];
        assert!((s.u + 0.5 * d2 / d1).abs() <= 1e-6, "{} vs {}", s.u, -0.5 * d2 / d1);
        assert!((s.fdot - d1).abs() <= 1e-6);
        let u_dot_plus = -s.u * s.u - r(s.t);
        let us = |k: usize| sol.samples[k].u;
        let du = (-us(i + 2) + 8.0 * us(i + 1) - 8.0 * us(i - 1) + us(i - 2)) / (12.0 * dt);
        assert!((du - u_dot_plus).abs() <= 1e-6, "{du} vs {u_dot_plus}");
    }
    // a second solution of the same problem with other data differs by an LFT
    let q = SchwarzianProblem::new(r, 2.0, -0.5, 0.1, (-0.5, 0.5), 1e-3).unwrap();
    let other = schwarzian_solve(&q);
    let n = sol.samples.len().min(other.samples.len());
    let fit = fit_lft(&other.fs()[..n], &sol.fs()[..n]).unwrap();
    assert!(fit.residual <= 1e-6, "{}", fit.residual);
}

#[test]
fn lft_has_zero_schwarzian_and_riccati_residual_tracks_r() {
    let f = |t: f64| (2.0 * t - 1.0) / (0.5 * t + 3.0);
    for t in [-1.0, 0.0, 0.7, 2.5] {
        assert!(schwarzian_numeric(&f, t, SCHWARZIAN_STEP).unwrap().abs() <= 1e-6);
        assert!(riccati_residual(&f, &|_| 0.0, t, SCHWARZIAN_STEP).unwrap().abs() <= 1e-6);
    }
    assert!((riccati_residual(&f64::exp, &|_| 0.25, 0.4, SCHWARZIAN_STEP).unwrap() - 0.5).abs() <= 1e-6);
}

#[test]
fn kappa_on_flat_lines() {
    let flat = ChartConnection::flat(2).unwrap();
    let zero = |_: &[f64]| DenseTensor::zeros(2, &[conegeom::tensor::L, conegeom::tensor::L]);
    let line = |t: f64| vec![1.0 + 2.0 * t, -0.5 + t];
    let ts = [0.0, 0.3, 1.0];
    for k in projective_kappa(&flat, &line, &zero, &ts, CURVE_STEP, 1e-6).unwrap() {
        assert!(k.kappa.abs() <= 1e-7 && k.q.abs() <= 1e-7);
    }
    // t → e^t picks up S(exp) = −1/2
    let exp_line = |t: f64| vec![1.0 + 2.0 * t.exp(), -0.5 + t.exp()];
    for k in projective_kappa(&flat, &exp_line, &zero, &ts, CURVE_STEP, 1e-6).unwrap() {
        assert!((k.kappa + 0.5).abs() <= 1e-5, "{}", k.kappa);
    }
    let circle = |t: f64| vec![t.cos(), t.sin()];
    assert!(matches!(
        projective_kappa(&flat, &circle, &zero, &ts, CURVE_STEP, 1e-6),
        Err(Error::NotAGeodesicPath { .. })
    ));
}

#[test]
fn projected_cone_geodesics_are_projectively_parametrized() {
    for eps in [1.0, -1.0] {
        let chart = ChartConnection::projflat_quadric(2, eps).unwrap();
        let p = |x: &[f64]| chart.schouten_closed_form(x).unwrap();
        // straight line in the ambient R^3, projected to the base chart x = z'/z³
        let (z0, w) = ([0.2, -0.1, 1.0], [0.3, 0.25, 0.4]);
        let curve = |t: f64| vec![(z0[0] + t * w[0]) / (z0[2] + t * w[2]), (z0[1] + t * w[1]) / (z0[2] + t * w[2])];
        let ts = [0.0, 0.2, 0.5];
        for k in projective_kappa(&chart, &curve, &p, &ts, CURVE_STEP, 1e-6).unwrap() {
            assert!(k.kappa.abs() <= 1e-6, "eps {eps}: {}", k.kappa);
        }
        // reparametrizing by φ adds S(φ): here φ(t) = tan t with S = 2
        let re = |t: f64| curve(t.tan());
        for k in projective_kappa(&chart, &re, &p, &ts, CURVE_STEP, 1e-6).unwrap() {
            assert!((k.kappa - 2.0).abs() <= 1e-5, "{}", k.kappa);
        }
    }
}

fn lft_strategy() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-2.0f64..2.0).prop_filter("nondegenerate", |[a, b, c, d]| (a * d - b * c).abs() > 0.3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cocycle_identity(phi in lft_strategy(), t in -0.3f64..0.3) {
        let [a, b, c, d] = phi;
        prop_assume!((c * t + d).abs() > 0.5 && (c / (c * t + d)).abs() < 1.0);
        let ph = move |s: f64| (a * s + b) / (c * s + d);
        let f = |y: f64| (0.7 * y).exp() + 0.2 * y;
        let comp = |s: f64| f(ph(s));
        let lhs = schwarzian_numeric(&comp, t, SCHWARZIAN_STEP).unwrap();
        let dphi = (a * d - b * c) / (c * t + d).powi(2);
        let rhs = dphi * dphi * schwarzian_numeric(&f, ph(t), SCHWARZIAN_STEP).unwrap() + schwarzian_numeric(&ph, t, SCHWARZIAN_STEP).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-5, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn lft_fit_recovers_composition(phi in lft_strategy()) {
        let [a, b, c, d] = phi;
        let ts: Vec<f64> = (0..50).map(|k| -0.2 + 0.008 * k as f64).collect();
        let g: Vec<f64> = ts.iter().map(|t| t.sin() + 0.3).collect();
        prop_assume!(g.iter().all(|y| (c * y + d).abs() > 0.2));
        let f: Vec<f64> = g.iter().map(|y| (a * y + b) / (c * y + d)).collect();
        let fit = fit_lft(&g, &f).unwrap();
        prop_assert!(fit.residual <= 1e-8);
    }

    #[test]
    fn central_invariants_conserved_on_short_runs(r0 in 0.9f64..1.4, vr in -0.2f64..0.2, vp in 0.6f64..1.2) {
        let c = ChartConnection::central(3).unwrap();
        let run = integrate(&c, &[r0, 0.0, 0.0], &[vr, vp, 0.0], 2.0, ODE_STEP).unwrap();
        let states: Vec<GeodesicState> = run.states.into_iter().take_while(|s| dot(&s.x, &s.x).sqrt() >= 0.3).collect();
        let (dc, de) = max_drifts(&states).unwrap();
        prop_assert!(dc <= 1e-6 && de <= 1e-6);
    }

    #[test]
    fn chart_coefficients_are_symmetric(x in prop::array::uniform3(-1.0f64..1.0), alpha in -3.0f64..2.0) {
        prop_assume!(dot(&x, &x) > 0.01);
        let c = ChartConnection::radiant_power(alpha, DMatrix::identity(3, 3)).unwrap();
        let g = c.christoffel(&x).unwrap();
        prop_assert!((&g - &g.swap(0, 1)).norm_inf() == 0.0);
    }
}
