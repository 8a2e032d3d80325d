use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use conegeom::chart::ChartConnection;
use conegeom::cone_lift::{berger_ew, cone_connection, designate_vertical, eta_two_form, LiftedData};
use conegeom::connection::{qacone_preset, ConeForm};
use conegeom::error::Error;
use conegeom::io;
use conegeom::lie::FrameAlgebra;
use conegeom::metric::{ah_data, einstein_ah_report, structure_report};
use conegeom::ode::{integrate, schwarzian_solve, trace_csv, SchwarzianProblem};
use conegeom::report::{OutputMode, Report};
use conegeom::tensor::{sym_part, DenseTensor};

#[derive(Parser)]
#[command(name = "conegeom", version, about = "Radiant, conelike and cone connections on frames and charts")]
struct Cli {
    #[command(flatten)]
    cfg: Config,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Config {
    /// Largest admissible defect.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 1e-5)]
    fd_step: f64,
    #[arg(long, global = true, default_value_t = 1e-3)]
    ode_step: f64,
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    #[arg(long, global = true)]
    csv: bool,
    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Jacobi, Killing form, trace form and invariance defects of a frame algebra.
    Lie {
        /// A frame JSON file or a preset such as `qa-im(-1,-1)`.
        source: String,
        /// Also check invariance along this vector (comma separated).
        #[arg(long, allow_negative_numbers = true)]
        along: Option<String>,
    },
    /// The cone connection on Im qaf[α₁, α₂] with t = κ⁻¹e₁.
    Cone3d {
        #[arg(allow_negative_numbers = true)]
        a1: f64,
        #[arg(allow_negative_numbers = true)]
        a2: f64,
        #[arg(allow_negative_numbers = true)]
        kappa: f64,
    },
    /// Cone connection of base data, or a designated connection with `vertical`.
    Conelift {
        file: PathBuf,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        s: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t: f64,
    },
    /// Modified connection of a lift and its Einstein-AH report.
    Ew {
        file: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        s: f64,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
    },
    /// AH and Einstein report for a connection file carrying `h`.
    Ah { file: PathBuf },
    /// Solve S(f) = 2κ with f(0)=a, f'(0)=b, f''(0)=c; CSV trace.
    Schwarzian {
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        c: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        kappa: f64,
        #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        to: f64,
    },
    /// Geodesic from x = r0·e₁, v = vr·e₁ + vperp·e₂; CSV trace.
    Geodesic {
        #[arg(long, value_enum, default_value_t = Family::Central)]
        family: Family,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        r0: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        vperp: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        vr: f64,
        #[arg(short = 'T', default_value_t = 10.0)]
        t_end: f64,
        /// Sign of the quadric.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        eps: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Central,
    Flat,
    Quadric,
}

enum Output {
    Report(Report),
    Csv(String),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let cfg = &cli.cfg;
    if !(cfg.tol > 0.0 && cfg.fd_step > 0.0 && cfg.ode_step > 0.0) {
        eprintln!("error: --tol, --fd-step and --ode-step must be positive");
        return ExitCode::from(1);
    }
    let out = match run(&cli.cmd, cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e} [{}]", kind(&e));
            return ExitCode::from(1);
        }
    };
    let mode = if cfg.json {
        OutputMode::Json
    } else if cfg.csv {
        OutputMode::Csv
    } else {
        OutputMode::Text
    };
    let (text, failures) = match &out {
        Output::Report(r) => {
            let f: Vec<String> = r.failures(cfg.tol).iter().map(|(k, v)| format!("{k} = {v:e}")).collect();
            (r.render(mode), f)
        }
        Output::Csv(s) => (s.clone(), Vec::new()),
    };
    if let Err(e) = emit(&text, cfg.out.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        for f in failures {
            eprintln!("defect above tolerance: {f}");
        }
        ExitCode::from(2)
    }
}

fn kind(e: &Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split([' ', '(', '{']).next().unwrap_or_default().to_string()
}

fn emit(text: &str, path: Option<&Path>) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn run(cmd: &Cmd, cfg: &Config) -> conegeom::error::Result<Output> {
    match cmd {
        Cmd::Lie { source, along } => lie(source, along.as_deref()).map(Output::Report),
        Cmd::Cone3d { a1, a2, kappa } => cone3d(*a1, *a2, *kappa).map(Output::Report),
        Cmd::Conelift { file, s, t } => conelift(file, *s, *t).map(Output::Report),
        Cmd::Ew { file, s, t } => ew(file, *s, *t).map(Output::Report),
        Cmd::Ah { file } => ah(file).map(Output::Report),
        Cmd::Schwarzian { a, b, c, kappa, from, to } => {
            let p = SchwarzianProblem::constant(*kappa, *a, *b, *c, (*from, *to), cfg.ode_step)?;
            Ok(Output::Csv(schwarzian_solve(&p).to_csv()))
        }
        Cmd::Geodesic { family, dim, r0, vperp, vr, t_end, eps } => {
            let chart = match family {
                Family::Central => ChartConnection::central(*dim)?,
                Family::Flat => ChartConnection::flat(*dim)?,
                Family::Quadric => ChartConnection::projflat_quadric(*dim, *eps)?,
            };
            if *dim < 2 {
                return Err(Error::BadParams("geodesic needs dim ≥ 2".into()));
            }
            let mut x0 = vec![0.0; *dim];
            let mut v0 = vec![0.0; *dim];
            x0[0] = *r0;
            v0[0] = *vr;
            v0[1] = *vperp;
            let run = integrate(&chart, &x0, &v0, *t_end, cfg.ode_step)?;
            let csv = trace_csv(&run.states);
            if let Some(e) = run.stopped {
                emit(&csv, cfg.out.as_deref()).map_err(|io| Error::Validation(io.to_string()))?;
                return Err(e);
            }
            Ok(Output::Csv(csv))
        }
    }
}

fn read_text(path: &Path) -> conegeom::error::Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn lie(source: &str, along: Option<&str>) -> conegeom::error::Result<Report> {
    let path = Path::new(source);
    let frame = if path.is_file() { io::load_frame(path)? } else { FrameAlgebra::preset_by_name(source)? };
    let t = along.map(parse_vector).transpose()?;
    if let Some(t) = &t {
        if t.len() != frame.dim() {
            return Err(Error::ShapeMismatch(format!("--along needs {} entries", frame.dim())));
        }
    }
    let k = frame.killing_form();
    let inv = frame.invariance_defect(&k, t.as_deref());
    let mut r = Report::new();
    r.value("dim", frame.dim() as f64)
        .defect("jacobi_defect", frame.jacobi_defect())
        .tensor("killing", &k)
        .vector("ell", &frame.trace_form())
        .defect("killing_invariance_defect", inv.full);
    if let Some(a) = inv.along_t {
        r.defect("killing_invariance_along_defect", a);
    }
    Ok(r)
}

fn parse_vector(s: &str) -> conegeom::error::Result<Vec<f64>> {
    s.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{x}`")))).collect()
}

fn cone3d(a1: f64, a2: f64, kappa: f64) -> conegeom::error::Result<Report> {
    let conn = qacone_preset(a1, a2, kappa)?;
    let t = [1.0 / kappa, 0.0, 0.0];
    let cd = conn.curvature_with_rho(&t);
    let sol = conn.conelike_solve(&t)?;
    let mut r = Report::new();
    r.tensor("gamma", &conn.full())
        .tensor("ric", &cd.ric)
        .vector("rho", cd.rho.as_deref().unwrap_or(&[]))
        .defect("radiant_defect", conn.radiant_defect(&t))
        .defect("conelike_residual", sol.residual)
        .defect("conelike_rho_defect", sol.rho_defect)
        .defect("ric_symmetric_part", sym_part(&cd.ric).norm_inf())
        .defect("ric23_defect", cd.ric[[1, 2]] + 3.0 * a2 * kappa);
    let built = conegeom::connection::build_cone(conn.frame(), &ConeForm::Killing, &t)?;
    r.defect("builder_defect", (&built.full() - &conn.full()).norm_inf());
    let ew = berger_ew(a1, a2, kappa, 0.0)?;
    let bq = ew.lifted.base_quantities();
    r.tensor("eta", &bq.eta).tensor("omega", &bq.omega).value("alpha", ew.fit.alpha).defect("alpha_fit_defect", ew.fit.relative_defect);
    if let Ok(g) = ew.lifted.lifted_metric(0.0) {
        r.tensor("G", g.h());
    }
    r.value("ew_s_count", ew.branches.len() as f64);
    for (b, name) in ew.branches.iter().zip(["plus", "minus"]) {
        r.value(format!("ew_s_{name}"), b.s)
            .defect(format!("ew_{name}_weyl_defect"), b.weyl)
            .defect(format!("ew_{name}_ricci_defect"), b.ricci)
            .defect(format!("ew_{name}_conservation_defect"), b.conservation);
    }
    Ok(r)
}

fn load_lift(path: &Path) -> conegeom::error::Result<(LiftedData, Option<DenseTensor>)> {
    let text = read_text(path)?;
    if io::is_base_doc(&text) {
        let base = io::base_from_str(&text)?;
        Ok((cone_connection(&base)?, Some(eta_two_form(&base))))
    } else {
        let lc = io::connection_from_str(&text)?;
        let v = lc.vertical.ok_or(Error::MissingField)?;
        Ok((designate_vertical(&lc.conn, &v)?.0, None))
    }
}

fn conelift(path: &Path, s: f64, t: f64) -> conegeom::error::Result<Report> {
    let (lifted, eta) = load_lift(path)?;
    let bq = lifted.base_quantities();
    let ric = lifted.connection().curvature().ric;
    let n = lifted.base_dim();
    let mut r = Report::new();
    r.tensor("eta", &bq.eta).tensor("ric", &ric);
    if let Some(eta) = eta {
        // the normalized cone connection has Ricci −((n+1)/2)η on the base block
        let nf = n as f64;
        let pred = eta.scale(-(nf + 1.0) / 2.0).embed(n + 1);
        r.defect("ric_prediction_defect", (&ric - &pred).norm_inf());
        r.defect("eta_defect", (&bq.eta - &eta).norm_inf());
    }
    let (a, b) = lifted.vertical_annihilation();
    r.defect("vertical_annihilation_defect", a.max(b));
    match lifted.ricci_closed_form(t, s) {
        Ok(cf) => {
            let direct = lifted.ricci_direct(t, s)?;
            r.value("s", s)
                .value("t", t)
                .defect("ricci_closed_form_defect", (&cf.ric - &direct).norm_inf())
                .value("ricci_trace", cf.trace_of_ric)
                .value("ricci_trace_formula", cf.trace_formula);
            let id = lifted.modified_identities(t, s)?;
            identities(&mut r, &id);
        }
        Err(e @ (Error::SingularMetric { .. } | Error::DegenerateT)) => eprintln!("note: lifted metric unavailable: {e}"),
        Err(e) => return Err(e),
    }
    Ok(r)
}

fn identities(r: &mut Report, id: &conegeom::cone_lift::ModifiedIdentities) {
    r.defect("metricity_defect", id.metricity)
        .defect("skew_defect", id.skew)
        .defect("alignment_defect", id.alignment)
        .defect("fibre_geodesic_defect", id.fibre_geodesic)
        .defect("volume_defect", id.volume);
}

fn ew(path: &Path, s: f64, t: f64) -> conegeom::error::Result<Report> {
    let (lifted, _) = load_lift(path)?;
    let (d, gm) = lifted.modified_connection(t, s)?;
    let mut r = Report::new();
    r.value("s", s).value("t", t).tensor("G", gm.h()).tensor("ric", &d.curvature().ric);
    identities(&mut r, &lifted.modified_identities(t, s)?);
    let fit = lifted.omega_alpha()?;
    r.value("alpha", fit.alpha).value("alpha_fit_relative", fit.relative_defect);
    let e = einstein_ah_report(&d, &gm)?;
    r.value("scalar", e.scalar)
        .value("naive_einstein", e.naive_defect)
        .value("conjugate_naive_einstein", e.conjugate_naive_defect)
        .value("conservation", e.conservation_defect)
        .vector("chi", &e.chi);
    Ok(r)
}

fn ah(path: &Path) -> conegeom::error::Result<Report> {
    let lc = io::load_connection(path)?;
    let g = lc.metric.ok_or(Error::MissingField)?;
    let d = ah_data(&lc.conn, &g)?;
    let mut r = Report::new();
    r.defect("alignment_defect", d.alignment_defect)
        .defect("codazzi_defect", d.codazzi_defect)
        .defect("cubic_symmetry_defect", d.cubic_symmetry_defect)
        .defect("cubic_trace_defect", d.cubic_trace_defect)
        .vector("chi", &d.chi)
        .vector("tau", &d.tau);
    let sr = structure_report(&lc.conn, &g, lc.vertical.as_deref())?;
    r.value("statistical", sr.statistical_defect).value("special", sr.special_defect);
    if d.ah_defect() <= conegeom::cone_lift::PRE_TOL {
        let e = einstein_ah_report(&lc.conn, &g)?;
        r.value("scalar", e.scalar)
            .value("naive_einstein", e.naive_defect)
            .value("conjugate_naive_einstein", e.conjugate_naive_defect)
            .value("conservation", e.conservation_defect);
    }
    Ok(r)
}
