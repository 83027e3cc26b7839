//! One function per subcommand. Each prints a human-readable summary to
//! stdout and, with `--out`, writes a machine-readable file plus manifest.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::{json, Value};
use tracecalc::exppoly::{fmt_at_time, fmt_by_rate, fmt_exponent, split_at_time, split_by_rate};
use tracecalc::heat::{expect_finite, heat_finite_n, HeatEngine, DEFAULT_BLOCK_CAP};
use tracecalc::lab::kernel::fill_powers;
use tracecalc::lab::{experiment_csv, mc_multi, BrownianConfig, ExperimentRow, Group};
use tracecalc::scalar::{parse_rational, rational_to_f64};
use tracecalc::series::{expand_phi_st, pde_residual, pk_table_csv, Pde};
use tracecalc::validation::{
    concentration_rate, laplacian_equivalence, magic_formulas, l2_convergence_point, oracle_equivalence, run_all,
};
use tracecalc::{Error, ExpPoly, JsonCoeff, Rational, RationalTracePoly, Scalar, SingleVarPoly, Var};

use crate::cache;
use crate::error::{CliError, CliResult};
use crate::manifest::Run;
use crate::{Experiment, GenfunArgs, InverseArgs, McArgs, MomentsArgs, SelftestArgs, Suite, TransformArgs, VerifyArgs};

/// Largest grade the symbolic large-N path accepts.
pub const LIMIT_GRADE_CAP: u32 = 24;

/// Loads the memo, falling back to an empty engine with a warning.
pub fn open_engine(path: Option<&Path>) -> HeatEngine {
    let Some(path) = path else {
        return HeatEngine::new();
    };
    cache::load(path).unwrap_or_else(|e| {
        eprintln!("warning: ignoring cache {} ({e}); recomputing", path.display());
        HeatEngine::new()
    })
}

#[derive(Clone, Debug)]
enum Time {
    Exact(Rational),
    Float(f64),
}

impl Time {
    fn parse(s: &str, float: bool) -> CliResult<Self> {
        let time = if float {
            let x: f64 = s
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("cannot parse time {s:?} as a number")))?;
            Time::Float(x)
        } else {
            Time::Exact(parse_rational(s).map_err(|_| {
                CliError::Usage(format!("time {s:?} is not an exact rational p/q; pass --float for decimals"))
            })?)
        };
        if !(time.as_f64() >= 0.0) {
            return Err(CliError::Usage(format!("time must be non-negative, got {s}")));
        }
        Ok(time)
    }

    fn as_f64(&self) -> f64 {
        match self {
            Time::Exact(q) => rational_to_f64(q),
            Time::Float(x) => *x,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Time::Exact(q) => Value::String(q.to_string()),
            Time::Float(x) => json!(x),
        }
    }
}

fn check_limit_grade(grade: u32) -> CliResult<()> {
    if grade > LIMIT_GRADE_CAP {
        return Err(Error::GradeTooLarge {
            grade,
            cap: LIMIT_GRADE_CAP,
        }
        .into());
    }
    Ok(())
}

fn read_poly(arg: &str) -> CliResult<RationalTracePoly> {
    let text = match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| CliError::io(path, e))?,
        None => arg.to_string(),
    };
    let v: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("polynomial is not valid JSON: {e}")))?;
    Ok(RationalTracePoly::from_json(&v)?)
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn rational_poly_json(p: &SingleVarPoly<Rational>) -> Value {
    Value::Array(p.coeffs().iter().map(JsonCoeff::to_json).collect())
}

fn exp_poly_json(c: &ExpPoly) -> Value {
    Value::Array(
        c.parts()
            .map(|(rate, body)| json!({ "rate": rate, "body": body.to_json() }))
            .collect(),
    )
}

/// Symbolic, exact-at-`t` (when `t` is rational) and numeric forms of a
/// polynomial with exponential-polynomial coefficients.
fn print_exp_poly_table(label: &str, p: &SingleVarPoly<ExpPoly>, time: &Time) {
    println!("{label} = {}", fmt_by_rate(&split_by_rate(p)));
    if let Time::Exact(t) = time {
        println!("  at t = {t}: {}", fmt_at_time(&split_at_time(p, t)));
    }
    let x = p.var().name();
    let values = p.eval_at_time(time.as_f64());
    if values.degree().is_none() {
        println!("  (zero)");
        return;
    }
    println!("  {:>6}  {:>24}", "degree", "value");
    for (d, c) in values.coeffs().iter().enumerate().rev() {
        println!("  {:>6}  {:>24.17e}", format!("{x}^{d}"), c.re);
    }
}

fn exp_poly_at_time_json(p: &SingleVarPoly<ExpPoly>, time: &Time) -> Value {
    let numeric: Vec<Value> = p.eval_at_time(time.as_f64()).coeffs().iter().map(|c| complex_json(*c)).collect();
    let mut out = json!({
        "symbolic": p.coeffs().iter().map(exp_poly_json).collect::<Vec<_>>(),
        "numeric": numeric,
    });
    if let Time::Exact(t) = time {
        out["exact"] = Value::Array(
            split_at_time(p, t)
                .iter()
                .map(|(x, body)| json!({ "exponent": x.to_string(), "body": rational_poly_json(body) }))
                .collect(),
        );
    }
    out
}

pub fn transform(ctx: &Run, engine: &HeatEngine, a: &TransformArgs) -> CliResult<()> {
    let p = match (&a.power, &a.poly) {
        (Some(k), _) => RationalTracePoly::u(*k),
        (None, Some(json)) => read_poly(json)?,
        (None, None) => unreachable!("clap requires one input"),
    };
    let time = Time::parse(&a.t, a.float)?;
    let doc = if a.limit {
        check_limit_grade(p.max_grade().unwrap_or(0))?;
        let value = engine.heat_limit(&p);
        let q = engine.limit_transform(&p);
        println!("p = {p}");
        println!("limit heat flow = {value}");
        print_exp_poly_table("q_t(z)", &q, &time);
        json!({
            "input": p.to_json(),
            "t": time.to_json(),
            "mode": "limit",
            "semigroup": value.to_json(),
            "q": exp_poly_at_time_json(&q, &time),
        })
    } else {
        let n = a.n.expect("clap requires --N or --limit");
        let f = heat_finite_n(&p, time.as_f64(), n, DEFAULT_BLOCK_CAP)?;
        println!("p = {p}");
        println!("heat flow at N = {n}, t = {}:", time.as_f64());
        println!("  {:<20} {:>24} {:>24}", "monomial", "re", "im");
        for (m, c) in f.terms() {
            println!("  {:<20} {:>24.17e} {:>24.17e}", m.to_string(), c.re, c.im);
        }
        json!({
            "input": p.to_json(),
            "t": time.to_json(),
            "mode": "finite",
            "N": n,
            "result": f.to_json(),
        })
    };
    if let Some(out) = &a.out {
        ctx.write_output(out, &(serde_json::to_string_pretty(&doc).expect("JSON") + "\n"))?;
    }
    Ok(())
}

pub const MOMENTS_HEADER: &str = "k,N,t,moment,exact,value_re,value_im";

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn exp_scalar_at(c: &ExpPoly, t: &Rational) -> String {
    let groups = split_at_time(&SingleVarPoly::new(Var::U, vec![c.clone()]), t);
    if groups.is_empty() {
        return "0".into();
    }
    groups
        .iter()
        .map(|(x, body)| match fmt_exponent(x) {
            e if e.is_empty() => body.coeff(0).to_string(),
            e if body.coeff(0) == Rational::from_int(1) => e,
            e => format!("{e}·({})", body.coeff(0)),
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

pub fn moments(ctx: &Run, engine: &HeatEngine, a: &MomentsArgs) -> CliResult<()> {
    let time = Time::parse(&a.t, a.float)?;
    let n: Option<u32> = match a.n.trim() {
        "inf" | "infinity" => None,
        s => Some(
            s.parse()
                .map_err(|_| CliError::Usage(format!("--N expects a positive integer or inf, got {s:?}")))?,
        ),
    };
    let tf = time.as_f64();
    let mut csv = String::from(MOMENTS_HEADER);
    csv.push('\n');
    let n_label = n.map_or("inf".to_string(), |n| n.to_string());
    match n {
        None => {
            check_limit_grade(a.kmax)?;
            let table = engine.moment_table(a.kmax);
            for k in 1..=a.kmax {
                let m = table.moment(k);
                let exact = match &time {
                    Time::Exact(t) => exp_scalar_at(&m, t),
                    Time::Float(_) => String::new(),
                };
                let value = table.eval(k, tf);
                println!("nu_{k}(t) = {m}");
                if exact.is_empty() {
                    println!("  at t = {tf}: {value:.17e}");
                } else {
                    println!("  at t = {}: {exact} = {value:.17e}", a.t);
                }
                csv.push_str(&format!(
                    "{k},{n_label},{},{},{},{value:e},0e0\n",
                    tf,
                    csv_quote(&m.to_string()),
                    csv_quote(&exact)
                ));
            }
        }
        Some(n) => {
            for k in 1..=a.kmax {
                let value = expect_finite(&RationalTracePoly::v(k), tf, n)?;
                println!("E[tr U^{k}] at N = {n}, t = {tf}: {:.17e} {:+.3e}i", value.re, value.im);
                csv.push_str(&format!("{k},{n},{tf},,,{:e},{:e}\n", value.re, value.im));
            }
        }
    }
    if let Some(out) = &a.out {
        ctx.write_output(out, &csv)?;
    }
    Ok(())
}

pub fn inverse(ctx: &Run, engine: &HeatEngine, a: &InverseArgs) -> CliResult<()> {
    check_limit_grade(a.power)?;
    let time = Time::parse(&a.t, a.float)?;
    let target = SingleVarPoly::monomial(Var::Z, a.power as usize, ExpPoly::exp_half(0));
    let p = engine.inverse_free_hall(&target);
    print_exp_poly_table(&format!("preimage of z^{}", a.power), &p, &time);
    if let Some(out) = &a.out {
        let doc = json!({
            "power": a.power,
            "t": time.to_json(),
            "preimage": exp_poly_at_time_json(&p, &time),
        });
        ctx.write_output(out, &(serde_json::to_string_pretty(&doc).expect("JSON") + "\n"))?;
    }
    Ok(())
}

/// `dir/name.csv` → `dir/name-pde.csv`.
fn pde_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}-pde.csv"))
}

pub fn genfun(ctx: &Run, engine: &HeatEngine, a: &GenfunArgs) -> CliResult<()> {
    let ps = expand_phi_st(a.s, a.t, a.order)?;
    let table = pk_table_csv(&ps);
    print!("{table}");
    if let Some(out) = &a.out {
        ctx.write_output(out, &table)?;
    }
    if a.pde {
        let mut csv = String::new();
        for which in [Pde::Rho, Pde::Psi, Pde::Phi] {
            let report = pde_residual(engine, which, a.s, a.t, a.order)?;
            let flagged = report.flagged();
            eprintln!(
                "pde {}: residual above threshold at orders {flagged:?}; initial-condition defect {:.2e}",
                which.name(),
                report.max_initial()
            );
            let body = report.to_csv();
            if csv.is_empty() {
                csv.push_str(&body);
            } else {
                csv.extend(body.lines().skip(1).map(|l| format!("{l}\n")));
            }
        }
        if let Some(out) = &a.out {
            ctx.write_output(&pde_path(out), &csv)?;
        }
    }
    Ok(())
}

pub fn mc(ctx: &Run, engine: &HeatEngine, a: &McArgs) -> CliResult<()> {
    let group: Group = a.group.parse()?;
    let mut rows = Vec::new();
    for &n in &a.n {
        let cfg = BrownianConfig {
            group,
            n,
            t: a.t,
            h: a.h,
            paths: a.paths,
            seed: ctx.seed,
        };
        cfg.validate()?;
        match a.experiment {
            Experiment::Trace | Experiment::Deviation => {
                let kmax = a.k.iter().copied().max().unwrap_or(1) as usize;
                let names: Vec<String> = a.k.iter().map(|k| format!("k{k}")).collect();
                let names: Vec<&str> = names.iter().map(String::as_str).collect();
                let deviation = matches!(a.experiment, Experiment::Deviation);
                let one = Complex64::new(1.0, 0.0);
                let stats = mc_multi(&cfg, &names, |u, powers| {
                    fill_powers(u, kmax, powers);
                    a.k.iter()
                        .map(|&k| {
                            let x = powers[k as usize].tr();
                            if deviation {
                                Complex64::new((x - one).norm_sqr(), 0.0)
                            } else {
                                x
                            }
                        })
                        .collect()
                })?;
                let label = if deviation { "deviation" } else { "trace" };
                for (&k, s) in a.k.iter().zip(stats) {
                    rows.push(ExperimentRow {
                        experiment: label.into(),
                        cfg: cfg.clone(),
                        k,
                        stats: s,
                    });
                }
            }
            Experiment::L2 => {
                if group != Group::General {
                    return Err(CliError::Usage("the l2 experiment runs on --group gl".into()));
                }
                let point = l2_convergence_point(engine, n, a.t, a.h, a.paths, ctx.seed)?;
                rows.push(ExperimentRow {
                    experiment: "l2".into(),
                    cfg: cfg.clone(),
                    k: 2,
                    stats: point.distance,
                });
            }
        }
    }
    let csv = experiment_csv(&rows);
    print!("{csv}");
    if let Some(out) = &a.out {
        ctx.write_output(out, &csv)?;
    }
    Ok(())
}

pub fn verify(ctx: &Run, engine: &HeatEngine, a: &VerifyArgs) -> CliResult<()> {
    let result = match a.suite {
        Suite::Magic => magic_formulas(ctx.seed),
        Suite::Laplacian => laplacian_equivalence(ctx.seed),
        Suite::Oracle => oracle_equivalence(engine, 10),
        Suite::Concentration => concentration_rate(),
    };
    println!("{}", result.line());
    if result.passed {
        Ok(())
    } else {
        Err(CliError::Failed(format!("{} failed", result.id)))
    }
}

pub fn selftest(ctx: &Run, engine: &HeatEngine, a: &SelftestArgs) -> CliResult<()> {
    let results = run_all(engine, ctx.seed, a.skip_mc);
    for r in &results {
        println!("{}", r.line());
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    println!("{}/{} criteria passed", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("failed: {}", failed.join(", "))))
    }
}
