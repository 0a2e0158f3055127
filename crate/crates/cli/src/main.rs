use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hopfzero::algebra::bigfloat::set_default_digits;
use hopfzero::algebra::json::{CoeffIo, FieldJson, LieJson};
use hopfzero::algebra::ratfunc::UPoly;
use hopfzero::classical::{classical_normal_form, to_lie_element, ClassicalError};
use hopfzero::hypernorm::{self, conjugacy_check, HyperError, HyperOptions, Level, ReportJson};
use hopfzero::integral::{first_integral_closed, IntegralJson};
use hopfzero::parametric::{emit_parametric_template, index_sets};
use hopfzero::radius::{self, Example, RadiusFlag};
use hopfzero::systems::{self, SystemError};
use hopfzero::truncation::{self, POptFormula};
use hopfzero::{Backend, BigFloat, LieElement, RatFunc, Q};
use serde_json::json;

#[derive(Parser)]
#[command(name = "hopfzero", version, about = "Volume-preserving Hopf-zero normal forms")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Io {
    /// Input file; stdin when omitted or "-".
    #[arg(long, short)]
    input: Option<PathBuf>,
    /// Output file; stdout when omitted or "-".
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Precision {
    /// Decimal digits for the float backend.
    #[arg(long, env = "HOPFZERO_DIGITS", default_value_t = 128)]
    digits: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum CMethod {
    Sum,
    Opt,
    Both,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a case-study system (or its cubic classical normal form).
    Example {
        #[arg(value_parser = parse_example)]
        system: Example,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        /// Emit the closed-form cubic classical normal form instead of the system.
        #[arg(long)]
        nf: bool,
        #[arg(long, default_value = "rational")]
        backend: Backend,
        #[command(flatten)]
        prec: Precision,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Classical normal form of a polynomial system, as an element of the algebra.
    Classical {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 3)]
        degree: u32,
        #[command(flatten)]
        prec: Precision,
    },
    /// Second, (p+1) or infinite level normal form.
    Normalize {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value = "inf", value_parser = parse_level)]
        level: Level,
        #[arg(long, default_value_t = 12)]
        max_grade: i64,
        #[arg(long, default_value = "rational")]
        backend: Backend,
        #[command(flatten)]
        prec: Precision,
    },
    /// First integral of an element or of a report's output.
    Integral {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        prec: Precision,
    },
    /// Optimal truncation degree and remainder bound over a δ grid (CSV).
    TruncateOpt {
        /// Polynomial system (field JSON).
        #[arg(long)]
        system: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-7)]
        delta_min: f64,
        #[arg(long, default_value_t = 1e-4)]
        delta_max: f64,
        #[arg(long, default_value_t = 50)]
        grid_points: usize,
        #[arg(long, value_enum, default_value_t = CMethod::Both)]
        c_method: CMethod,
        /// Use the optimal-degree constant of the KS example.
        #[arg(long)]
        compat_ks_example: bool,
        #[command(flatten)]
        prec: Precision,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Ratio-test radius sweep over a parameter grid (CSV).
    Radius {
        #[arg(long, value_parser = parse_example)]
        example: Example,
        #[arg(long, allow_hyphen_values = true)]
        a_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        a_max: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long, default_value_t = 256)]
        grade: usize,
        /// Rerun every point at twice the digits and fail on disagreement.
        #[arg(long)]
        check_precision: bool,
        #[command(flatten)]
        prec: Precision,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Index sets and the infinite-level parametric template.
    Paramtemplate {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        max_grade: i64,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        sign: i8,
        /// Print the template text instead of JSON.
        #[arg(long)]
        text: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Replay a normalization report and check it reproduces its output.
    Verify {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        prec: Precision,
    },
}

fn parse_example(s: &str) -> Result<Example, String> {
    s.parse()
}

fn parse_level(s: &str) -> Result<Level, String> {
    s.parse()
}

/// Exit 2: the input violates a precondition. Exit 3: numerical failure.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

fn precondition(kind: &'static str, m: impl ToString) -> Failure {
    Failure { code: 2, kind, message: m.to_string() }
}

fn numerical(kind: &'static str, m: impl ToString) -> Failure {
    Failure { code: 3, kind, message: m.to_string() }
}

type Res<T> = Result<T, Failure>;

fn read_input(path: &Option<PathBuf>) -> Res<String> {
    let mut s = String::new();
    match path {
        Some(p) if p.as_os_str() != "-" => {
            s = std::fs::read_to_string(p).map_err(|e| precondition("io", format!("{}: {e}", p.display())))?
        }
        _ => {
            std::io::stdin().read_to_string(&mut s).map_err(|e| precondition("io", e))?;
        }
    }
    Ok(s)
}

fn write_output(path: &Option<PathBuf>, text: &str) -> Res<()> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            std::fs::write(p, text).map_err(|e| precondition("io", format!("{}: {e}", p.display())))
        }
        _ => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| precondition("io", e))
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Res<T> {
    serde_json::from_str(text).map_err(|e| precondition("json", e))
}

fn set_digits(p: &Precision) -> Res<()> {
    if p.digits < 64 {
        return Err(precondition("digits", format!("float runs need at least 64 digits, got {}", p.digits)));
    }
    set_default_digits(p.digits);
    Ok(())
}

fn system_failure(e: SystemError) -> Failure {
    precondition("system", e)
}

fn hyper_failure(e: HyperError) -> Failure {
    match e {
        HyperError::Infeasible { .. } | HyperError::Transform(_) => numerical("normalize", e),
        _ => precondition("normalize", e),
    }
}

fn example_cmd(system: Example, a: &str, nf: bool, backend: Backend, prec: &Precision) -> Res<String> {
    fn build<C: CoeffIo>(system: Example, a: &str, nf: bool) -> Res<String> {
        let a = C::parse_coeff(a).map_err(|e| precondition("parameter", e))?;
        Ok(match (system, nf) {
            (Example::Rossler, false) => to_json(&FieldJson::from_field(&systems::rossler(&a).map_err(system_failure)?)),
            (Example::Ks, false) => to_json(&FieldJson::from_field(&systems::ks(&a))),
            (Example::Rossler, true) => {
                to_json(&LieJson::from_element(&systems::rossler_cubic_nf_golden(&a).map_err(system_failure)?))
            }
            (Example::Ks, true) => to_json(&LieJson::from_element(&systems::ks_cubic_nf_golden(&a))),
        })
    }
    match backend {
        Backend::Rational => build::<Q>(system, a, nf),
        Backend::Float => {
            set_digits(prec)?;
            build::<BigFloat>(system, a, nf)
        }
        Backend::RatFunc => Err(precondition("backend", "examples are built with the rational or float backend")),
    }
}

fn classical_cmd(text: &str, degree: u32, prec: &Precision) -> Res<String> {
    fn run<C: CoeffIo>(f: &FieldJson, degree: u32) -> Res<String> {
        let sys = f.to_field_as::<C>().map_err(|e| precondition("json", e))?;
        let (nf, _) = classical_normal_form(&sys, degree).map_err(|e| match e {
            ClassicalError::Singular(_) => numerical("classical", e),
            _ => precondition("classical", e),
        })?;
        let v = to_lie_element(&nf).map_err(|e| match e {
            ClassicalError::NotInL(d) => precondition("not-in-L", format!("{d:?}")),
            e => precondition("classical", e),
        })?;
        Ok(to_json(&LieJson::from_element(&v)))
    }
    let f: FieldJson = parse_json(text)?;
    match f.backend {
        Backend::Rational => run::<Q>(&f, degree),
        Backend::Float => {
            set_digits(prec)?;
            run::<BigFloat>(&f, degree)
        }
        Backend::RatFunc => run::<RatFunc>(&f, degree),
    }
}

fn normalize_cmd(text: &str, level: Level, n: i64, backend: Backend, prec: &Precision) -> Res<String> {
    if n < 4 {
        return Err(precondition("max-grade", "max grade must be at least 4"));
    }
    let j: LieJson = parse_json(text)?;
    fn run<C: CoeffIo>(v: &LieElement<C>, level: Level, n: i64, opts: &HyperOptions<C>) -> Res<String> {
        let r = hypernorm::normalize(v, level, n, opts).map_err(hyper_failure)?;
        Ok(to_json(&ReportJson::from_report(&r)))
    }
    let bad = |e| precondition("json", e);
    match backend {
        Backend::Rational => run::<Q>(&j.to_element_as().map_err(bad)?, level, n, &HyperOptions::default()),
        Backend::Float => {
            set_digits(prec)?;
            run::<BigFloat>(&j.to_element_as().map_err(bad)?, level, n, &HyperOptions::default())
        }
        Backend::RatFunc => {
            let v: LieElement<RatFunc> = if j.backend == Backend::RatFunc {
                j.to_element().map_err(bad)?
            } else {
                let q: LieElement<Q> = j.to_element_as().map_err(bad)?;
                q.map(|c| RatFunc::from_poly(UPoly::constant(c.clone())))
            };
            let opts = HyperOptions { generic: Some(RatFunc::alpha()), ..HyperOptions::default() };
            run(&v, level, n, &opts)
        }
    }
}

fn integral_cmd(text: &str, prec: &Precision) -> Res<String> {
    let value: serde_json::Value = parse_json(text)?;
    let j: LieJson = if value.get("level").is_some() {
        serde_json::from_value(value["output"].clone()).map_err(|e| precondition("json", e))?
    } else {
        serde_json::from_value(value).map_err(|e| precondition("json", e))?
    };
    fn run<C: CoeffIo>(j: &LieJson) -> Res<String> {
        let v: LieElement<C> = j.to_element().map_err(|e| precondition("json", e))?;
        let f = first_integral_closed(&v).map_err(|e| precondition("no-unique-generator", e))?;
        Ok(to_json(&IntegralJson::from_integral(&f)))
    }
    match j.backend {
        Backend::Rational => run::<Q>(&j),
        Backend::RatFunc => run::<RatFunc>(&j),
        Backend::Float => {
            set_digits(prec)?;
            run::<BigFloat>(&j)
        }
    }
}

fn verify_cmd(text: &str, prec: &Precision) -> Res<String> {
    let j: ReportJson = parse_json(text)?;
    fn run<C: CoeffIo>(j: &ReportJson) -> Res<bool> {
        let r = j.to_report::<C>().map_err(|e| precondition("json", e))?;
        Ok(conjugacy_check(&r))
    }
    let ok = match j.input.backend {
        Backend::Rational => run::<Q>(&j)?,
        Backend::RatFunc => run::<RatFunc>(&j)?,
        Backend::Float => {
            set_digits(prec)?;
            run::<BigFloat>(&j)?
        }
    };
    if !ok {
        return Err(numerical("conjugacy", "replaying the steps does not reproduce the reported output"));
    }
    Ok(to_json(&json!({ "ok": true, "level": j.level, "steps": j.steps.len() })))
}

#[allow(clippy::too_many_arguments)]
fn truncate_cmd(
    text: &str,
    dmin: f64,
    dmax: f64,
    points: usize,
    method: CMethod,
    compat: bool,
    prec: &Precision,
) -> Res<String> {
    let f: FieldJson = parse_json(text)?;
    fn constants<C: CoeffIo>(f: &FieldJson, method: CMethod) -> Res<Vec<(&'static str, f64)>> {
        let sys = f.to_field_as::<C>().map_err(|e| precondition("json", e))?;
        let mut cs = Vec::new();
        if matches!(method, CMethod::Sum | CMethod::Both) {
            let (_, eff) = truncation::c_sum(&sys).map_err(|e| precondition("truncation", e))?;
            cs.push(("sum", eff));
        }
        if matches!(method, CMethod::Opt | CMethod::Both) {
            let c = truncation::c_min(&sys, 64).map_err(|e| match e {
                truncation::TruncationError::NoConvergence { .. } => numerical("c-min", e),
                e => precondition("truncation", e),
            })?;
            cs.push(("opt", c.effective));
        }
        Ok(cs)
    }
    let cs = match f.backend {
        Backend::Rational => constants::<Q>(&f, method)?,
        Backend::Float => {
            set_digits(prec)?;
            constants::<BigFloat>(&f, method)?
        }
        Backend::RatFunc => return Err(precondition("backend", "truncation needs a numeric system")),
    };
    if !(dmin > 0.0 && dmax >= dmin) || points == 0 {
        return Err(precondition("grid", "need 0 < delta-min <= delta-max and grid-points >= 1"));
    }
    let formula = if compat { POptFormula::KsExample } else { POptFormula::Proposition };
    let rows = truncation::bound_curve(&cs, &truncation::log_grid(dmin, dmax, points), formula)
        .map_err(|e| precondition("truncation", e))?;
    let mut s = String::from("delta,c,p_opt,M,bound\n");
    for r in rows {
        let _ = writeln!(s, "{:e},{},{},{:e},{:e}", r.delta, r.c, r.p_opt, r.m, r.bound);
    }
    Ok(s)
}

#[allow(clippy::too_many_arguments)]
fn radius_cmd(ex: Example, a_min: f64, a_max: f64, step: f64, grade: usize, check: bool, prec: &Precision) -> Res<String> {
    set_digits(prec)?;
    if step.is_nan() || step <= 0.0 || a_max < a_min {
        return Err(precondition("grid", "need a-min <= a-max and step > 0"));
    }
    let rows = radius::sweep(ex, &radius::grid(a_min, a_max, step), grade, prec.digits, check);
    if rows.iter().all(|r| matches!(&r.estimate, Err(e) if e.starts_with("precision-insufficient"))) {
        return Err(numerical("precision-insufficient", rows[0].estimate.as_ref().err().cloned().unwrap_or_default()));
    }
    let mut s = String::from("a,R,L,converged,grade\n");
    for r in rows {
        let _ = match &r.estimate {
            Ok(e) => {
                let flag = match e.flag {
                    RadiusFlag::Converged => "true",
                    RadiusFlag::NotConverged => "false",
                    RadiusFlag::Entire => "entire",
                };
                writeln!(s, "{},{},{},{},{}", r.a, e.r, e.l, flag, r.grade)
            }
            Err(_) => writeln!(s, "{},,,error,{}", r.a, r.grade),
        };
    }
    Ok(s)
}

fn paramtemplate_cmd(p: u32, q: u32, n: i64, sign: i8, text: bool) -> Res<String> {
    let idx = index_sets(n, p, q).map_err(|e| precondition("index-sets", e))?;
    let t = emit_parametric_template(&idx, sign);
    Ok(if text { format!("{}\n{}\n", t.text, t.integral) } else { to_json(&t) })
}

fn run(cli: Cli) -> Res<()> {
    match cli.cmd {
        Cmd::Example { system, a, nf, backend, prec, out } => write_output(&out, &example_cmd(system, &a, nf, backend, &prec)?),
        Cmd::Classical { io, degree, prec } => write_output(&io.out, &classical_cmd(&read_input(&io.input)?, degree, &prec)?),
        Cmd::Normalize { io, level, max_grade, backend, prec } => {
            write_output(&io.out, &normalize_cmd(&read_input(&io.input)?, level, max_grade, backend, &prec)?)
        }
        Cmd::Integral { io, prec } => write_output(&io.out, &integral_cmd(&read_input(&io.input)?, &prec)?),
        Cmd::TruncateOpt { system, delta_min, delta_max, grid_points, c_method, compat_ks_example, prec, out } => {
            let text = read_input(&system)?;
            write_output(&out, &truncate_cmd(&text, delta_min, delta_max, grid_points, c_method, compat_ks_example, &prec)?)
        }
        Cmd::Radius { example, a_min, a_max, step, grade, check_precision, prec, out } => {
            write_output(&out, &radius_cmd(example, a_min, a_max, step, grade, check_precision, &prec)?)
        }
        Cmd::Paramtemplate { p, q, max_grade, sign, text, out } => {
            write_output(&out, &paramtemplate_cmd(p, q, max_grade, sign, text)?)
        }
        Cmd::Verify { io, prec } => write_output(&io.out, &verify_cmd(&read_input(&io.input)?, &prec)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", json!({ "error": f.kind, "message": f.message, "exit": f.code }));
            ExitCode::from(f.code)
        }
    }
}
