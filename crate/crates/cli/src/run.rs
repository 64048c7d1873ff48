use std::path::{Path, PathBuf};
use std::time::Instant;

use orlicz_hardy::bloomkerman::{bk_check, muckenhoupt_b, BkError, BkStatus};
use orlicz_hardy::catalog::{self, CatalogError};
use orlicz_hardy::classify::{classify_with, k_bound_check, l_bound_check, BoundCheck, TestFunction, TestKind, Tri};
use orlicz_hardy::config::Config;
use orlicz_hardy::func::Func;
use orlicz_hardy::integrate::weighted_modular;
use orlicz_hardy::nfunction::parse_params;
use orlicz_hardy::spec_file::{load_functions, load_triple, FunctionSpec, SpecError, TripleSpec};
use orlicz_hardy::verifier::{
    norm_verify, sharpness_search, stock_functions, verify_with, Family, FamilyError, Holds, ParamRange,
};
use orlicz_hardy::weights::WeightTriple;
use rayon::prelude::*;

use crate::args::{CatalogAction, Cli, Command, Curve, FamilyArg, FunctionArgs, KindArg, TripleArgs};
use crate::report::{CatalogItem, Classification, FunctionsEcho, RunReport, Timing};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_MET: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Bk(#[from] BkError),
    #[error("{0}")]
    Input(String),
    #[error("cannot write {path}: {reason}")]
    Write { path: String, reason: String },
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Bk(BkError::Integrate(_)) => EXIT_NUMERIC,
            CliError::Write { .. } | CliError::Pool(_) => EXIT_NUMERIC,
            _ => EXIT_INPUT,
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Analyze { .. } => "analyze",
        Command::Verify { .. } => "verify",
        Command::Classify { .. } => "classify",
        Command::Bk { .. } => "bk",
        Command::Muckenhoupt { .. } => "muckenhoupt",
        Command::Sharpness { .. } => "sharpness",
        Command::Catalog { action: CatalogAction::List } => "catalog list",
        Command::Catalog { action: CatalogAction::Show { .. } } => "catalog show",
    }
}

/// Run one command; the report always carries the exit code.
pub fn run(cli: &Cli) -> RunReport {
    let start = Instant::now();
    let mut report = RunReport::new(command_name(&cli.command));
    let outcome = load_config(cli.config.as_deref()).and_then(|cfg| {
        report.ledger = Some(cfg.ledger());
        dispatch(cli, &cfg, &mut report)
    });
    match outcome {
        Ok(code) => report.exit_code = code,
        Err(e) => {
            report.exit_code = e.exit_code();
            report.diagnostics.push(e.to_string());
        }
    }
    if cli.timing {
        report.timing = Some(Timing { seconds: start.elapsed().as_secs_f64() });
    }
    report
}

fn load_config(path: Option<&Path>) -> Result<Config, CliError> {
    Ok(match path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    })
}

fn triple_spec(args: &TripleArgs) -> Result<TripleSpec, CliError> {
    if let Some(path) = &args.triple {
        return Ok(load_triple(path)?);
    }
    if let Some(name) = &args.preset {
        return Ok(catalog::load(name)?.triple);
    }
    match (&args.m, &args.phi, &args.omega) {
        (Some(m), Some(phi), Some(omega)) => Ok(TripleSpec::new(m, phi, omega)),
        _ => Err(CliError::Input("give --triple, --preset, or all of --M, --phi, --omega".into())),
    }
}

fn triple(args: &TripleArgs, cfg: &Config, report: &mut RunReport) -> Result<WeightTriple, CliError> {
    let spec = triple_spec(args)?;
    report.input.preset = args.preset.clone();
    let t = spec.build_in(cfg.probe)?;
    report.input.triple = Some(spec);
    Ok(t)
}

fn kind(k: KindArg) -> TestKind {
    match k {
        KindArg::Generic => TestKind::Generic,
        KindArg::HardyTransform => TestKind::HardyTransform,
        KindArg::ConjugateHardyTransform => TestKind::ConjugateHardyTransform,
    }
}

fn functions(args: &FunctionArgs, report: &mut RunReport) -> Result<Vec<TestFunction>, CliError> {
    let specs = if let Some(path) = &args.functions {
        load_functions(path)?
    } else if args.stock {
        report.input.functions = Some(FunctionsEcho::Named("stock".into()));
        return Ok(stock_functions());
    } else if let Some(u) = &args.u {
        let support = match args.support.as_deref() {
            None => None,
            Some(&[a, b]) if a < b => Some((a, b)),
            Some(_) => return Err(CliError::Input("--support expects a,b with a < b".into())),
        };
        vec![FunctionSpec { name: None, u: u.clone(), uprime: args.uprime.clone(), kind: kind(args.kind), support }]
    } else {
        return Err(CliError::Input("give --functions, --stock, or --u".into()));
    };
    let built = specs.iter().map(|s| s.build()).collect::<Result<Vec<_>, _>>()?;
    report.input.functions = Some(FunctionsEcho::Listed(specs));
    Ok(built)
}

/// Map `f` over `items` on `jobs` threads, keeping input order.
fn batch<T: Sync, R: Send>(jobs: usize, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Result<Vec<R>, CliError> {
    if jobs <= 1 {
        return Ok(items.iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    Ok(pool.install(|| items.par_iter().map(f).collect()))
}

fn param(report: &mut RunReport, key: &str, value: impl serde::Serialize) {
    report.input.params.insert(key.into(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
}

fn dispatch(cli: &Cli, cfg: &Config, report: &mut RunReport) -> Result<i32, CliError> {
    match &cli.command {
        Command::Analyze { triple: ta, trace, curve } => {
            let t = triple(ta, cfg, report)?;
            let cert = t.certify();
            let numeric_failure = [cert.b1.0, cert.b2.0, cert.l.0].iter().any(|v| v.is_nan());
            let code = if numeric_failure {
                EXIT_NUMERIC
            } else if cert.verdict.holds() {
                EXIT_OK
            } else {
                EXIT_NOT_MET
            };
            report.certificate = Some(cert);
            if let (Some(path), Some(curve)) = (trace, curve) {
                param(report, "curve", format!("{curve:?}"));
                let rows = match curve {
                    Curve::B1 => grid_curve(&t, |r| t.b1_at(r).ok()),
                    Curve::B2 => grid_curve(&t, |r| t.b2_at(r).ok()),
                    Curve::L => grid_curve(&t, |r| t.l_at(r).ok()),
                    Curve::K => {
                        let k = k_bound_check(&t, &cfg.quad);
                        let rows = bound_rows(&k);
                        report.k_check = Some(k);
                        rows
                    }
                    Curve::BigL => {
                        let l = l_bound_check(&t, &cfg.quad);
                        let rows = bound_rows(&l);
                        report.l_check = Some(l);
                        rows
                    }
                };
                write_csv(path, &["r", "value"], rows.iter().map(|(r, v)| vec![num(*r), num(*v)]))?;
            }
            Ok(code)
        }
        Command::Verify { triple: ta, functions: fa, constant, norm } => {
            let t = triple(ta, cfg, report)?;
            let us = functions(fa, report)?;
            if let Some(c) = constant {
                param(report, "constant", c);
            }
            let cert = t.certify();
            if cert.c.is_none() && constant.is_none() {
                report.diagnostics.push("no certified constant; pass --constant to compare against one".into());
            }
            report.reports = batch(cli.jobs, &us, |u| verify_with(&t, &cert, u, *constant, &cfg.quad))?;
            if *norm {
                let mut norm_cert = cert.clone();
                if let Some(c) = constant {
                    norm_cert.c_tilde = Some(c + 1.0);
                }
                report.norm_reports = batch(cli.jobs, &us, |u| norm_verify(&t, &norm_cert, u, &cfg.quad))?;
            }
            let violated = report.reports.iter().any(|r| r.holds == Holds::No)
                || report.norm_reports.iter().any(|r| r.holds == Holds::No);
            report.certificate = Some(cert);
            Ok(if violated { EXIT_NOT_MET } else { EXIT_OK })
        }
        Command::Classify { triple: ta, functions: fa, trace } => {
            let t = triple(ta, cfg, report)?;
            let us = functions(fa, report)?;
            let phi = Func::expr(t.phi.clone());
            let verdicts = batch(cli.jobs, &us, |u| {
                let energy = (u.kind != TestKind::Generic).then(|| {
                    weighted_modular(&u.uprime, &t.m, Some(&phi), 0.0, f64::INFINITY, &cfg.quad)
                        .ok()
                        .and_then(|h| if h.converged() { Some(true) } else if h.diverges() { Some(false) } else { None })
                });
                classify_with(&t, u, energy.flatten(), &cfg.quad)
            })?;
            report.classification =
                us.iter().zip(verdicts).map(|(u, v)| Classification { function: u.name.clone(), verdict: v }).collect();
            if let Some(path) = trace {
                let rows = report.classification.iter().flat_map(|c| {
                    c.verdict.theta_trace.iter().map(move |p| {
                        vec![c.function.clone(), p.n.to_string(), num(p.s), num(p.r), num(p.theta.0)]
                    })
                });
                write_csv(path, &["function", "n", "s", "R", "theta"], rows)?;
            }
            let unresolved = report
                .classification
                .iter()
                .any(|c| c.verdict.in_rplus == Tri::Undetermined && c.verdict.in_rminus == Tri::Undetermined);
            Ok(if unresolved { EXIT_NUMERIC } else { EXIT_OK })
        }
        Command::Bk { triple: ta } => {
            let t = triple(ta, cfg, report)?;
            let v = bk_check(&t, &cfg.bk, &cfg.quad)?;
            let code = match v.status {
                BkStatus::Satisfied => EXIT_OK,
                BkStatus::ViolatedGInfinite | BkStatus::ViolatedNoB => EXIT_NOT_MET,
                BkStatus::Undetermined => EXIT_NUMERIC,
            };
            report.bk = Some(v);
            Ok(code)
        }
        Command::Muckenhoupt { triple: ta, p } => {
            let t = triple(ta, cfg, report)?;
            param(report, "p", p);
            let m = muckenhoupt_b(*p, &t, &cfg.quad)?;
            let code = if m.b.0.is_finite() {
                EXIT_OK
            } else if m.b.0.is_nan() {
                EXIT_NUMERIC
            } else {
                EXIT_NOT_MET
            };
            report.muckenhoupt = Some(m);
            Ok(code)
        }
        Command::Sharpness { triple: ta, family, family_p, family_alpha, template, params, budget } => {
            let t = triple(ta, cfg, report)?;
            let fam = build_family(*family, *family_p, *family_alpha, ta.preset.as_deref(), template.as_deref(), params)?;
            let budget = budget.unwrap_or(cfg.sharpness.budget);
            param(report, "family", &fam);
            param(report, "budget", budget);
            let cert = t.certify();
            let result = sharpness_search(&t, &cert, &fam, budget, &cfg.quad)?;
            let code = if result.violation.is_some() { EXIT_NOT_MET } else { EXIT_OK };
            report.certificate = Some(cert);
            report.sharpness = Some(result);
            Ok(code)
        }
        Command::Catalog { action: CatalogAction::List } => {
            for name in catalog::sweep_entries() {
                let e = catalog::load(&name)?;
                report.catalog.push(CatalogItem { name: e.name, description: e.description });
            }
            Ok(EXIT_OK)
        }
        Command::Catalog { action: CatalogAction::Show { name } } => {
            let e = catalog::load(name)?;
            let t = e.triple.build_in(cfg.probe)?;
            report.certificate = Some(t.certify());
            report.entry = Some(e);
            Ok(EXIT_OK)
        }
    }
}

fn grid_curve(t: &WeightTriple, f: impl Fn(f64) -> Option<f64>) -> Vec<(f64, f64)> {
    t.window.grid().iter().map(|r| (r, f(r).unwrap_or(f64::NAN))).collect()
}

fn bound_rows(b: &BoundCheck) -> Vec<(f64, f64)> {
    b.trace.iter().map(|p| (p.r, p.value.0)).collect()
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:e}")
    }
}

fn write_csv(path: &PathBuf, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<(), CliError> {
    let fail = |e: csv::Error| CliError::Write { path: path.display().to_string(), reason: e.to_string() };
    let mut w = csv::Writer::from_path(path).map_err(fail)?;
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(&row).map_err(fail)?;
    }
    w.flush().map_err(|e| CliError::Write { path: path.display().to_string(), reason: e.to_string() })
}

fn parse_range(text: &str) -> Result<ParamRange, CliError> {
    let bad = || CliError::Input(format!("--param expects name=lo:hi or name=lo:hi:log, got {text:?}"));
    let (name, range) = text.split_once('=').ok_or_else(bad)?;
    let parts: Vec<&str> = range.split(':').collect();
    let log = match parts.get(2) {
        None => false,
        Some(&"log") => true,
        Some(_) => return Err(bad()),
    };
    if parts.len() < 2 || parts.len() > 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    Ok(ParamRange { name: name.trim().into(), lo, hi, log })
}

/// p and α of a `classical:` preset.
fn classical_params(preset: Option<&str>) -> Option<(f64, f64)> {
    let rest = preset?.strip_prefix("classical:")?;
    let kv = parse_params(rest).ok()?;
    let get = |k: &str| kv.iter().find(|(n, _)| n == k).map(|(_, v)| *v);
    Some((get("p")?, get("alpha")?))
}

fn build_family(
    family: FamilyArg,
    p: Option<f64>,
    alpha: Option<f64>,
    preset: Option<&str>,
    template: Option<&str>,
    params: &[String],
) -> Result<Family, CliError> {
    match family {
        FamilyArg::Extremal => {
            let (p, alpha) = match (p, alpha, classical_params(preset)) {
                (Some(p), Some(a), _) => (p, a),
                (None, None, Some(pa)) => pa,
                _ => return Err(CliError::Input("the extremal family needs --family-p and --family-alpha".into())),
            };
            Ok(Family::classical_extremal(p, alpha))
        }
        FamilyArg::Bumps => Ok(Family::compact_bumps()),
        FamilyArg::Custom => {
            let template = template.ok_or_else(|| CliError::Input("the custom family needs --template".into()))?;
            let params = params.iter().map(|s| parse_range(s)).collect::<Result<Vec<_>, _>>()?;
            Ok(Family { name: "custom".into(), params, template: template.into(), kind: TestKind::Generic })
        }
    }
}
