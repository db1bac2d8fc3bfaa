use clap::{Args, Parser, Subcommand, ValueEnum};
use frobkit::arith::{cabs_log2, digits_for, fmt_complex, parse_complex, parse_exact_real};
use frobkit::catalog::{self, CatalogEntry};
use frobkit::error::FrobError;
use frobkit::frobenius::{eval_frobenius, frobenius_table, principal_log, residual_check, Exponent, TableMode};
use frobkit::gamma::{fit_pointwise, sample_points, difference_residual, GammaConfig, GammaModel};
use frobkit::limits::kappa_limits;
use frobkit::local::{local_basis_near_singularity, LocalOp};
use frobkit::monodromy::{complex_json, kappa_via_monodromy, PathSpec};
use frobkit::op::CanonicalOp;
use frobkit::parser::parse_op;
use frobkit::qstructure::eta_checks;
use frobkit::recognition::{recognize, recognize_any, ValueSource};
use rug::{Complex, Float, Rational};
use serde_json::{json, Value};
use std::io::Write;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "frobkit", version, about = "Frobenius constants and gamma functions of differential operators")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct OpArgs {
    /// Operator expression in t and D.
    #[arg(long, conflicts_with = "catalog")]
    op: Option<String>,
    /// Catalog entry name.
    #[arg(long)]
    catalog: Option<String>,
    /// Parameters for gauss-generic, comma separated.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    /// Reflection point (decimal string, e.g. "1" or "0.5+0.1i").
    #[arg(long)]
    c: Option<String>,
    /// Working precision in bits.
    #[arg(long, env = "FROBKIT_PRECISION", default_value_t = 256)]
    precision: u32,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    output: Option<String>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Method {
    Limit,
    Monodromy,
    Both,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Check {
    MainTheorem,
    DifferenceEquation,
    ClosedForm,
    Residual,
    Qstructure,
}

#[derive(Subcommand)]
enum Cmd {
    /// Canonical form of an operator.
    Parse(OpArgs),
    /// Formal adjoint.
    Adjoint(OpArgs),
    /// Indicial polynomial and admissible exponents at 0.
    Indicial(OpArgs),
    /// Local exponents at 0 and at every finite singularity.
    Exponents(OpArgs),
    /// Frobenius coefficient table.
    Frobenius {
        #[command(flatten)]
        o: OpArgs,
        #[arg(long, default_value = "0")]
        rho: String,
        #[arg(long = "K", default_value_t = 2)]
        k: usize,
        #[arg(long = "N", default_value_t = 20)]
        n: usize,
        /// Evaluate φ_{ρ,0..K} at this point.
        #[arg(long)]
        t: Option<String>,
    },
    /// Frobenius constants.
    Kappa {
        #[command(flatten)]
        o: OpArgs,
        #[arg(long, default_value = "0")]
        rho: String,
        #[arg(long = "K", default_value_t = 4)]
        k: usize,
        #[arg(long = "N", default_value_t = 1000)]
        n: usize,
        /// Richardson order of the limit method.
        #[arg(long, default_value_t = 8)]
        order: usize,
        #[arg(long, value_enum, default_value_t = Method::Monodromy)]
        method: Method,
    },
    /// Gamma function values or Taylor jet.
    Gamma {
        #[command(flatten)]
        o: OpArgs,
        /// Evaluation points (repeatable).
        #[arg(long)]
        s: Vec<String>,
        /// Jet of I(s)Γ(s)/R(e^{−2πis}) at rho instead of values.
        #[arg(long)]
        taylor: bool,
        #[arg(long, default_value = "0")]
        rho: String,
        #[arg(long = "K", default_value_t = 4)]
        k: usize,
        /// Normalize against monodromy κ at rho.
        #[arg(long)]
        normalize: bool,
    },
    /// Runs a verification and exits with 3 if a residual exceeds the tolerance.
    Verify {
        #[command(flatten)]
        o: OpArgs,
        #[arg(long, value_enum)]
        check: Check,
        #[arg(long, default_value = "0")]
        rho: String,
        #[arg(long = "K", default_value_t = 4)]
        k: usize,
        #[arg(long = "N", default_value_t = 30)]
        n: usize,
        /// Centre of the random sample points of the difference equation.
        #[arg(long, default_value = "3")]
        s0: String,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long)]
        tolerance: Option<String>,
    },
    /// Integer-relation recognition against products of zeta values.
    Recognize {
        #[arg(long, allow_hyphen_values = true)]
        value: String,
        #[arg(long)]
        weight: Option<u32>,
        #[arg(long, default_value_t = 6)]
        max_weight: u32,
        #[arg(long)]
        log_c: Option<String>,
        #[arg(long, env = "FROBKIT_PRECISION", default_value_t = 256)]
        precision: u32,
        #[arg(long)]
        output: Option<String>,
    },
    /// Lists the shipped operators or shows one.
    Catalog {
        name: Option<String>,
        #[arg(long, env = "FROBKIT_PRECISION", default_value_t = 256)]
        precision: u32,
    },
}

enum Fail {
    Usage(String),
    Compute(FrobError),
    Verify(Value),
}

impl From<FrobError> for Fail {
    fn from(e: FrobError) -> Self {
        Fail::Compute(e)
    }
}

type Out = std::result::Result<Value, Fail>;

fn progress(msg: &str) {
    eprintln!("[frobkit] {}", msg);
}

struct Job {
    op: CanonicalOp,
    entry: Option<CatalogEntry>,
    prec: u32,
    digits: usize,
}

impl Job {
    fn new(o: &OpArgs) -> std::result::Result<Self, Fail> {
        if o.precision < 64 {
            return Err(Fail::Usage("precision must be at least 64 bits".into()));
        }
        let prec = o.precision;
        let (op, entry) = match (&o.op, &o.catalog) {
            (Some(s), None) => (parse_op(s)?, None),
            (None, Some(name)) => {
                let e = if name == "gauss-generic" && (o.alpha.is_some() || o.beta.is_some()) {
                    let a = rationals(o.alpha.as_deref().unwrap_or("1/3,2/3"))?;
                    let b = rationals(o.beta.as_deref().unwrap_or("1,1"))?;
                    if a.len() != b.len() {
                        return Err(Fail::Usage("alpha and beta must have the same length".into()));
                    }
                    catalog::gauss_generic(&a, &b, prec + 64)
                } else {
                    catalog::entry(name, prec + 64)?
                };
                (e.op.clone(), Some(e))
            }
            _ => return Err(Fail::Usage("give exactly one of --op or --catalog".into())),
        };
        Ok(Job { op, entry, prec, digits: digits_for(prec).min(60) })
    }

    fn reflection_point(&self, o: &OpArgs) -> std::result::Result<Complex, Fail> {
        let w = self.prec + 64;
        if let Some(s) = &o.c {
            return complex_arg(s, w);
        }
        if let Some(e) = &self.entry {
            return Ok(Complex::with_val(w, &e.c));
        }
        self.op
            .singularities(w)
            .nearest_to_origin()
            .map(|r| Complex::with_val(w, &r.value))
            .ok_or_else(|| Fail::Usage("operator has no finite nonzero singularity; pass --c".into()))
    }

    fn label(&self) -> String {
        self.entry.as_ref().map(|e| e.name.clone()).unwrap_or_else(|| self.op.to_string())
    }
}

fn rationals(s: &str) -> std::result::Result<Vec<Rational>, Fail> {
    s.split(',').map(|x| parse_exact_real(x).ok_or_else(|| Fail::Usage(format!("not a rational: {}", x)))).collect()
}

fn rational_arg(s: &str) -> std::result::Result<Rational, Fail> {
    parse_exact_real(s).ok_or_else(|| Fail::Usage(format!("not a rational: {}", s)))
}

fn complex_arg(s: &str, prec: u32) -> std::result::Result<Complex, Fail> {
    parse_complex(s, prec).ok_or_else(|| Fail::Usage(format!("not a decimal complex number: {}", s)))
}

fn tolerance(t: &Option<String>, default: f64) -> std::result::Result<f64, Fail> {
    match t {
        Some(s) => Ok(rational_arg(s)?.to_f64()),
        None => Ok(default),
    }
}

fn check_k(k: usize) -> std::result::Result<(), Fail> {
    if k > 32 {
        return Err(Fail::Usage("K must be at most 32".into()));
    }
    Ok(())
}

fn ratios(k: &[Complex]) -> Vec<Complex> {
    let p = k[0].prec().0;
    k.iter().map(|z| Complex::with_val(p, z / &k[0])).collect()
}

fn cmd_exponents(job: &Job) -> Out {
    let w = job.prec + 64;
    let sing = job.op.singularities(w);
    let mut pts = Vec::new();
    for r in &sing.finite {
        let exps = LocalOp::at_point(&job.op, &r.value, w)?.exponents();
        let e: Vec<Value> = exps.iter().map(|(e, m)| json!({"value": e.label(), "multiplicity": m})).collect();
        let mut v = json!({"point": r.exact.as_ref().map(|q| q.to_string()).unwrap_or_else(|| fmt_complex(&r.value, job.digits)), "exponents": e});
        match local_basis_near_singularity(&job.op, &r.value, job.prec) {
            Ok(rep) => {
                v["variation_rank"] = json!(rep.variation_rank);
                v["invariants_analytic"] = json!(rep.invariants_analytic);
                v["pole_order"] = json!(rep.pole_order);
            }
            Err(e) => v["local_analysis_error"] = json!(e.to_string()),
        }
        pts.push(v);
    }
    Ok(json!({"at_zero": job.op.indicial(w)?.to_json(job.digits), "singularities": pts, "infinity_singular": sing.at_infinity}))
}

fn cmd_frobenius(job: &Job, rho: &str, k: usize, n: usize, t: &Option<String>) -> Out {
    check_k(k)?;
    let rho = Exponent::Exact(rational_arg(rho)?);
    let table = frobenius_table(&job.op, &rho, k, n, job.prec, TableMode::Auto)?;
    let res = residual_check(&job.op, &table);
    let mut out = json!({"table": table.to_json(job.digits), "residual": {"exact_zero": res.exact_zero, "max_log2": res.max_log2}});
    if let Some(ts) = t {
        let tv = complex_arg(ts, job.prec)?;
        let lt = principal_log(&tv);
        let mut vals = Vec::new();
        for kk in 0..=k {
            let v = eval_frobenius(&table, kk, &tv, &lt)?;
            vals.push(json!({"k": kk, "value": complex_json(&v.value, job.digits), "tail_estimate": format!("{:e}", v.tail_estimate)}));
        }
        out["values"] = json!(vals);
    }
    Ok(out)
}

fn cmd_kappa(job: &Job, o: &OpArgs, rho: &str, k: usize, n: usize, order: usize, method: Method) -> Out {
    check_k(k)?;
    let rho = rational_arg(rho)?;
    let mut out = json!({"operator": job.label(), "rho": rho.to_string(), "K": k});
    let mut lim = None;
    let mut mon = None;
    if method != Method::Monodromy {
        progress(&format!("limit method, N = {}", n));
        let rep = kappa_limits(&job.op, &rho, k, n, order, job.prec)?;
        out["limit"] = rep.to_json(job.digits);
        lim = Some(rep.kappa_ratios.clone());
    }
    if method != Method::Limit {
        let c = job.reflection_point(o)?;
        progress(&format!("monodromy around c = {}", fmt_complex(&c, 20)));
        let path = PathSpec::direct(&job.op, &c, job.prec + 64);
        let md = kappa_via_monodromy(&job.op, &rho, k, &path, job.prec)?;
        let r = ratios(&md.kappa.coeffs);
        out["monodromy"] = md.to_json(job.digits);
        out["monodromy"]["kappa_ratios"] = json!(r.iter().map(|z| fmt_complex(z, job.digits)).collect::<Vec<_>>());
        out["monodromy"]["path"] = path.to_json(30);
        mon = Some(r);
    }
    if let (Some(a), Some(b)) = (lim, mon) {
        let worst = a.iter().zip(&b).map(|(x, y)| cabs_log2(&Complex::with_val(job.prec, x - y))).fold(f64::NEG_INFINITY, f64::max);
        out["max_disagreement"] = json!(format!("{:e}", worst.exp2()));
    }
    Ok(out)
}

fn gamma_model(job: &Job, o: &OpArgs) -> std::result::Result<GammaModel, Fail> {
    let c = job.reflection_point(o)?;
    progress(&format!("gamma integrand at c = {}", fmt_complex(&c, 20)));
    Ok(GammaModel::new(&GammaConfig::new(&job.op, &c, job.prec))?)
}

fn cmd_gamma(job: &Job, o: &OpArgs, s: &[String], taylor: bool, rho: &str, k: usize, normalize: bool) -> Out {
    check_k(k)?;
    let mut m = gamma_model(job, o)?;
    let w = m.work();
    let rho_q = rational_arg(rho)?;
    let rho_c = Complex::with_val(w, &rho_q);
    let mut out = json!({"operator": job.label(), "R": m.r.to_json(job.digits)});
    if normalize {
        let path = PathSpec::direct(&job.op, &m.config.c, job.prec + 64);
        let md = kappa_via_monodromy(&job.op, &rho_q, k, &path, job.prec)?;
        let n = m.normalize_to(&md.kappa, &rho_c)?;
        out["normalization"] = n.to_json(job.digits);
    }
    if taylor {
        let (g, err) = m.taylor(&rho_c, k)?;
        let g = match &m.normalization {
            Some(n) => {
                let p = w;
                let shift = Complex::with_val(p, frobkit::arith::two_pi_i(p) * &rho_c * n.m).exp();
                frobkit::gamma::Normalization { lambda: Complex::with_val(p, &n.lambda * shift), ..n.clone() }.apply(&g)
            }
            None => g,
        };
        out["taylor"] = json!({"rho": rho_q.to_string(), "coeffs": g.coeffs.iter().map(|z| complex_json(z, job.digits)).collect::<Vec<_>>(), "est_error": format!("{:e}", err.exp2())});
    }
    let mut vals = Vec::new();
    for x in s {
        let sv = complex_arg(x, w)?;
        vals.push(m.eval(&sv)?.to_json(&m, job.digits));
    }
    if !vals.is_empty() {
        out["values"] = json!(vals);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(job: &Job, o: &OpArgs, check: Check, rho: &str, k: usize, n: usize, s0: &str, samples: usize, tol: &Option<String>) -> Out {
    check_k(k)?;
    let rho_q = rational_arg(rho)?;
    let (name, worst, tol, mut out) = match check {
        Check::MainTheorem => {
            let tol = tolerance(tol, 1e-20)?;
            let mut m = gamma_model(job, o)?;
            let w = m.work();
            let rho_c = Complex::with_val(w, &rho_q);
            progress("monodromy κ");
            let path = PathSpec::direct(&job.op, &m.config.c, job.prec + 64);
            let md = kappa_via_monodromy(&job.op, &rho_q, k, &path, job.prec)?;
            progress("Taylor jet of the gamma side");
            let (g, err) = m.taylor(&rho_c, k)?;
            let nz = frobkit::gamma::fit_normalization(&md.kappa, &g, -(job.prec as f64) / 2.0)?;
            let pred = nz.apply(&g);
            let scale = md.kappa.max_mag_log2();
            let res: Vec<f64> = (0..=k).map(|i| (cabs_log2(&Complex::with_val(w, &pred.coeffs[i] - &md.kappa.coeffs[i])) - scale).exp2()).collect();
            let worst = res.iter().cloned().fold(0.0, f64::max);
            let _ = m.normalize_to(&md.kappa, &rho_c);
            let out = json!({
                "R": m.r.to_json(job.digits),
                "normalization": nz.to_json(job.digits),
                "kappa": md.kappa.coeffs.iter().map(|z| complex_json(z, job.digits)).collect::<Vec<_>>(),
                "gamma_jet": pred.coeffs.iter().map(|z| complex_json(z, job.digits)).collect::<Vec<_>>(),
                "residuals": res.iter().map(|r| format!("{:e}", r)).collect::<Vec<_>>(),
                "taylor_est_error": format!("{:e}", err.exp2()),
            });
            ("main-theorem", worst, tol, out)
        }
        Check::DifferenceEquation => {
            let closed = job.entry.as_ref().and_then(|e| e.gamma_closed);
            let tol = tolerance(tol, 1e-12)?;
            let m = gamma_model(job, o)?;
            let w = m.work();
            let s0 = complex_arg(s0, w)?;
            let pts = sample_points(&s0, samples, 7, w);
            let quad = |s: &Complex| m.eval(s).map(|g| g.value);
            let mut worst = 0.0f64;
            let mut res = Vec::new();
            for s in &pts {
                let r = difference_residual(&m.integrand.adjoint, &quad, s)?;
                worst = worst.max(r);
                res.push(json!({"s": fmt_complex(s, 20), "residual": format!("{:e}", r)}));
            }
            let mut out = json!({"quadrature": res});
            if let Some(cf) = closed {
                let f = |s: &Complex| Ok(cf.eval(s));
                let mut cw = 0.0f64;
                for s in &pts {
                    cw = cw.max(difference_residual(&m.integrand.adjoint, &f, s)?);
                }
                out["closed_form_max_residual"] = json!(format!("{:e}", cw));
            }
            ("difference-equation", worst, tol, out)
        }
        Check::ClosedForm => {
            let cf = job.entry.as_ref().and_then(|e| e.gamma_closed).ok_or_else(|| Fail::Usage("operator has no closed-form gamma".into()))?;
            let tol = tolerance(tol, 1e-25)?;
            let m = gamma_model(job, o)?;
            let w = m.work();
            let mut smp = Vec::new();
            for i in 0..samples.max(3) {
                let s = Complex::with_val(w, (0.5 + 4.5 * i as f64 / (samples.max(3) - 1) as f64, 0.3 * ((i * 7) % 5) as f64 - 0.55));
                let v = m.eval(&s)?.value;
                smp.push((s.clone(), v, cf.eval(&s)));
            }
            let (lambda, mm) = fit_pointwise(&smp);
            let mut worst = 0.0f64;
            for (s, a, r) in &smp {
                let pred = Complex::with_val(w, &lambda * a) * Complex::with_val(w, frobkit::arith::two_pi_i(w) * s * mm).exp();
                worst = worst.max((cabs_log2(&Complex::with_val(w, &pred - r)) - cabs_log2(r)).exp2());
            }
            let out = json!({"lambda": complex_json(&lambda, job.digits), "m": mm, "points": smp.len()});
            ("closed-form", worst, tol, out)
        }
        Check::Residual => {
            let table = frobenius_table(&job.op, &Exponent::Exact(rho_q.clone()), k, n, job.prec, TableMode::Auto)?;
            let r = residual_check(&job.op, &table);
            let tol = tolerance(tol, 0.0)?;
            let worst = if r.exact_zero { 0.0 } else { r.max_log2.exp2() };
            ("residual", worst, tol, json!({"exact": table.is_exact(), "exact_zero": r.exact_zero}))
        }
        Check::Qstructure => {
            let tol = tolerance(tol, 1e-20)?;
            let c = job.reflection_point(o)?;
            let path = PathSpec::direct(&job.op, &c, job.prec + 64);
            let rep = eta_checks(&job.op, k.max(1), &path, job.prec)?;
            let worst = rep.log_shift_residual_log2.iter().chain(&rep.sigma_c_residual_log2).cloned().fold(f64::NEG_INFINITY, f64::max).exp2();
            ("qstructure", worst, tol, rep.to_json(job.digits))
        }
    };
    let passed = worst <= tol;
    out["check"] = json!(name);
    out["max_residual"] = json!(format!("{:e}", worst));
    out["tolerance"] = json!(format!("{:e}", tol));
    out["passed"] = json!(passed);
    if passed {
        Ok(out)
    } else {
        Err(Fail::Verify(out))
    }
}

fn cmd_recognize(value: &str, weight: Option<u32>, max_weight: u32, log_c: &Option<String>, precision: u32) -> Out {
    let q = rational_arg(value)?;
    // the value carries no more bits than its decimal digits
    let sig = value.chars().filter(|c| c.is_ascii_digit()).count();
    let prec = precision.min(((sig as f64) * std::f64::consts::LOG2_10).floor() as u32).max(64);
    let x = Float::with_val(prec, &q);
    let lc = match log_c {
        Some(s) => Some(complex_arg(s, prec * 2)?),
        None => None,
    };
    let src = ValueSource::Fixed(x);
    let r = match weight {
        Some(w) => recognize(&src, w, lc.as_ref(), &[], prec)?,
        None => recognize_any(&src, max_weight, lc.as_ref(), prec)?,
    };
    Ok(json!({"precision": prec, "result": r.map(|r| r.to_json(30))}))
}

fn cmd_catalog(name: &Option<String>, prec: u32) -> Out {
    let show = |e: &CatalogEntry| {
        json!({
            "name": e.name,
            "description": e.description,
            "operator": e.op.to_string(),
            "rho": e.rho.to_string(),
            "c": e.c_label,
            "kappa_closed": e.kappa_closed.iter().map(|k| k.label()).collect::<Vec<_>>(),
            "gamma_closed": e.gamma_closed.map(|g| format!("{:?}", g)),
            "hypergeometric": e.hypergeometric.as_ref().map(|(a, b)| json!({"alpha": a.iter().map(|x| x.to_string()).collect::<Vec<_>>(), "beta": b.iter().map(|x| x.to_string()).collect::<Vec<_>>()})),
        })
    };
    match name {
        Some(n) => Ok(show(&catalog::entry(n, prec)?)),
        None => Ok(json!({"entries": catalog::NAMES.iter().map(|n| show(&catalog::entry(n, prec).unwrap())).collect::<Vec<_>>()})),
    }
}

fn run(cmd: &Cmd) -> (Out, Option<String>) {
    let out_of = |o: &OpArgs| o.output.clone();
    match cmd {
        Cmd::Parse(o) => (
            Job::new(o).map(|j| json!({"operator": j.op.to_string(), "canonical": j.op.to_json(), "theta_form": j.op.theta_form().to_json()})),
            out_of(o),
        ),
        Cmd::Adjoint(o) => (
            Job::new(o).map(|j| {
                let a = j.op.adjoint();
                json!({"operator": j.op.to_string(), "adjoint": a.to_string(), "canonical": a.to_json()})
            }),
            out_of(o),
        ),
        Cmd::Indicial(o) => (Job::new(o).and_then(|j| Ok(j.op.indicial(j.prec)?.to_json(j.digits))), out_of(o)),
        Cmd::Exponents(o) => (Job::new(o).and_then(|j| cmd_exponents(&j)), out_of(o)),
        Cmd::Frobenius { o, rho, k, n, t } => (Job::new(o).and_then(|j| cmd_frobenius(&j, rho, *k, *n, t)), out_of(o)),
        Cmd::Kappa { o, rho, k, n, order, method } => (Job::new(o).and_then(|j| cmd_kappa(&j, o, rho, *k, *n, *order, *method)), out_of(o)),
        Cmd::Gamma { o, s, taylor, rho, k, normalize } => (Job::new(o).and_then(|j| cmd_gamma(&j, o, s, *taylor, rho, *k, *normalize)), out_of(o)),
        Cmd::Verify { o, check, rho, k, n, s0, samples, tolerance } => {
            (Job::new(o).and_then(|j| cmd_verify(&j, o, *check, rho, *k, *n, s0, *samples, tolerance)), out_of(o))
        }
        Cmd::Recognize { value, weight, max_weight, log_c, precision, output } => (cmd_recognize(value, *weight, *max_weight, log_c, *precision), output.clone()),
        Cmd::Catalog { name, precision } => (cmd_catalog(name, (*precision).max(64)), None),
    }
}

fn emit(v: &Value, path: &Option<String>) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(v).unwrap();
    match path {
        Some(p) => std::fs::write(p, text + "\n"),
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{}", text) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => r,
            }
        }
    }
}

fn error_kind(e: &FrobError) -> String {
    let d = format!("{:?}", e);
    d.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (res, path) = run(&cli.cmd);
    let with_schema = |mut v: Value| {
        v["schema"] = json!("1");
        v
    };
    match res {
        Ok(v) => match emit(&with_schema(v), &path) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("{}", json!({"schema": "1", "error": {"kind": "Io", "message": e.to_string()}}));
                ExitCode::from(2)
            }
        },
        Err(Fail::Usage(m)) => {
            eprintln!("{}", json!({"schema": "1", "error": {"kind": "Usage", "message": m}}));
            ExitCode::from(1)
        }
        Err(Fail::Compute(e)) => {
            let code = match e {
                FrobError::Syntax { .. } | FrobError::DenominatorContainsD { .. } | FrobError::UnknownCatalog(_) | FrobError::InvalidArgument(_) => 1,
                _ => 2,
            };
            eprintln!("{}", json!({"schema": "1", "error": {"kind": error_kind(&e), "message": e.to_string()}}));
            ExitCode::from(code)
        }
        Err(Fail::Verify(v)) => {
            let _ = emit(&with_schema(v), &path);
            eprintln!("{}", json!({"schema": "1", "error": {"kind": "VerificationFailed", "message": "residual above tolerance"}}));
            ExitCode::from(3)
        }
    }
}
