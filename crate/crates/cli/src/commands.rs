use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use pdm_core::dynamics::{estimate_period, integrate_pdm, InitialState};
use pdm_core::function::Interval;
use pdm_core::integrator::{IntegratorOptions, SampleGrid, DEFAULT_ATOL, DEFAULT_RTOL};
use pdm_core::models::{build_model, FamilyTag, ModelFamily};
use pdm_core::output::{fmt_float, map_table, write_map_table_csv, write_row, write_trajectory_csv};
use pdm_core::solutions::ClosedFormSolution;
use pdm_core::transform::{catalog_map, default_center};
use pdm_core::verify::{transform_checks, verify_family, VerifyOptions, VerifyReport};
use pdm_core::{ModelDocument, PdmError};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::args::{MapTableArgs, ModelArgs, SimulateArgs, SweepArgs, ToleranceArgs, TransformCheckArgs, VerifyArgs};
use crate::error::CliError;

pub const TOL_ENV: &str = "PDM_DEFAULT_TOL";

/// Exit status of a command that ran to completion.
pub enum Outcome {
    Ok,
    InvariantFailure,
}

pub fn resolve_model(args: &ModelArgs) -> Result<ModelFamily, CliError> {
    let mut doc = match &args.model {
        Some(src) => {
            let text = if src.trim_start().starts_with('{') {
                src.clone()
            } else {
                fs::read_to_string(src).map_err(|e| CliError::validation("model", format!("cannot read {src}: {e}")))?
            };
            ModelDocument::from_json(&text)?
        }
        None => ModelDocument::default(),
    };
    match (&args.family, doc.family.is_empty()) {
        (Some(name), true) => doc.family = name.clone(),
        (Some(name), false) if !name.eq_ignore_ascii_case(&doc.family) => {
            return Err(CliError::validation(
                "model",
                format!("family `{name}` conflicts with `{}` in the model document", doc.family),
            ))
        }
        (None, true) => return Err(CliError::validation("model", "no model family given")),
        _ => {}
    }
    if let Some(s) = &args.sign {
        doc.sign = Some(s.parse()?);
    }
    let overrides = [
        (&mut doc.lambda, args.lambda),
        (&mut doc.omega, args.omega),
        (&mut doc.big_omega, args.big_omega),
        (&mut doc.xi, args.xi),
        (&mut doc.beta, args.beta),
        (&mut doc.eta, args.eta),
        (&mut doc.alpha, args.alpha),
        (&mut doc.amplitude, args.amplitude),
        (&mut doc.phi, args.phi),
        (&mut doc.delta, args.delta),
    ];
    for (slot, value) in overrides {
        if value.is_some() {
            *slot = value;
        }
    }
    Ok(doc.to_family()?)
}

pub fn integrator_options(tol: &ToleranceArgs) -> Result<IntegratorOptions, CliError> {
    let rtol = match tol.rtol {
        Some(r) => r,
        None => match std::env::var(TOL_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::validation("rtol", format!("{TOL_ENV}=`{v}` is not a number")))?,
            Err(_) => DEFAULT_RTOL,
        },
    };
    let atol = tol.atol.unwrap_or(DEFAULT_ATOL);
    if !(rtol > 0.0) || !(atol > 0.0) {
        return Err(CliError::validation("rtol", "tolerances must be > 0"));
    }
    Ok(IntegratorOptions {
        rtol,
        atol,
        ..IntegratorOptions::default()
    })
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, bytes).map_err(|e| CliError::io(path, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

pub fn list_models(as_json: bool) -> Result<Outcome, CliError> {
    let mut text = String::new();
    if as_json {
        let entries: Vec<_> = FamilyTag::ALL
            .iter()
            .map(|t| json!({ "name": t.name(), "signed": t.has_sign(), "parameters": parameter_names(*t), "description": t.description() }))
            .collect();
        text = serde_json::to_string_pretty(&entries).expect("json") + "\n";
    } else {
        for t in FamilyTag::ALL {
            let _ = writeln!(text, "{:<11} {:<36} {}", t.name(), parameter_names(t).join(","), t.description());
        }
        let _ = writeln!(text, "{:<11} {:<36} {}", "sho", "omega,A,phi", "harmonic oscillator (ml1 with λ = 0)");
    }
    emit(None, text.as_bytes())?;
    Ok(Outcome::Ok)
}

fn parameter_names(tag: FamilyTag) -> Vec<&'static str> {
    let fam = match tag {
        FamilyTag::Ml1 => ModelFamily::ml1(pdm_core::Sign::Plus, 0.1, 1.0, 1.0),
        FamilyTag::Ml2 => ModelFamily::ml2(pdm_core::Sign::Plus, 0.1, 1.0, 1.0),
        FamilyTag::ShiftedMl => ModelFamily::shifted(pdm_core::Sign::Plus, 0.1, 1.0, 0.0, 1.0),
        FamilyTag::QuadraticNl => ModelFamily::quadratic(0.1, 1.0, 1.0),
        FamilyTag::Morse => ModelFamily::morse(0.5, 1.0, 0.5),
        FamilyTag::Isotonic => ModelFamily::isotonic(pdm_core::Sign::Plus, 0.1, 1.0, 0.1, 1.0),
    }
    .expect("catalog defaults are valid");
    fam.params().into_iter().map(|(n, _)| n).collect()
}

pub fn simulate(args: &SimulateArgs) -> Result<Outcome, CliError> {
    let family = resolve_model(&args.model)?;
    let system = build_model(&family)?;
    let map = catalog_map(&family)?;
    let sol = ClosedFormSolution::new(&family)?;
    let (x_cf, v_cf) = sol.initial_state();
    let ic = InitialState::new(args.x0.unwrap_or(x_cf), args.xdot0.unwrap_or(v_cf));
    let t_end = args.t_end.unwrap_or(args.periods * sol.period());
    let grid = match args.dt {
        Some(dt) => SampleGrid::Step(dt),
        None => SampleGrid::Count(args.samples),
    };
    let opts = integrator_options(&args.tol)?.with_grid(grid);
    let traj = integrate_pdm(&system, &map, ic, t_end, &opts)?;
    let mut buf = Vec::new();
    write_trajectory_csv(&mut buf, &traj).expect("write to memory");
    emit(args.output.as_deref(), &buf)?;
    Ok(Outcome::Ok)
}

#[derive(Serialize)]
struct TransformReport {
    model: ModelDocument,
    domain: (Option<f64>, Option<f64>),
    monotone: bool,
    checks: Vec<pdm_core::CheckResult>,
    passed: bool,
}

pub fn transform_check(args: &TransformCheckArgs) -> Result<Outcome, CliError> {
    let family = resolve_model(&args.model)?;
    let map = catalog_map(&family)?;
    let checks = transform_checks(&family, args.points)?;
    let passed = checks.iter().all(|c| c.passed);
    let finite = |v: f64| v.is_finite().then_some(v);
    let report = TransformReport {
        model: ModelDocument::from_family(&family),
        domain: (finite(map.domain().lo), finite(map.domain().hi)),
        monotone: map.monotone(),
        checks,
        passed,
    };
    let text = serde_json::to_string_pretty(&report).expect("json") + "\n";
    emit(args.output.as_deref(), text.as_bytes())?;
    Ok(if passed { Outcome::Ok } else { Outcome::InvariantFailure })
}

pub fn verify(args: &VerifyArgs) -> Result<Outcome, CliError> {
    let family = resolve_model(&args.model)?;
    let opts = VerifyOptions {
        rtol: integrator_options(&args.tol)?.rtol,
        periods: args.periods,
        random_points: args.points,
    };
    if !(opts.periods > 0.0) || opts.random_points == 0 {
        return Err(CliError::validation("periods", "periods and points must be positive"));
    }
    let report = verify_family(&family, &opts)?;
    let text = if args.json {
        serde_json::to_string_pretty(&report).expect("json") + "\n"
    } else {
        render_report(&report)
    };
    emit(args.output.as_deref(), text.as_bytes())?;
    Ok(if report.all_passed() { Outcome::Ok } else { Outcome::InvariantFailure })
}

fn render_report(report: &VerifyReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "model {}", report.model.to_json());
    for c in &report.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        let _ = write!(s, "{status} {:<26} measured={:.3e} tolerance={:.0e}", c.name, c.measured, c.tolerance);
        if let Some(d) = &c.detail {
            let _ = write!(s, "  ({d})");
        }
        s.push('\n');
    }
    match report.measured_period {
        Some(p) => {
            let _ = writeln!(s, "period measured={p:.9} predicted={:.9}", report.predicted_period);
        }
        None => {
            let _ = writeln!(s, "period measured=n/a predicted={:.9}", report.predicted_period);
        }
    }
    for (k, v) in &report.notes {
        let _ = writeln!(s, "note {k}={v:.12}");
    }
    let passed = report.checks.iter().filter(|c| c.passed).count();
    let verdict = if report.all_passed() { "PASS" } else { "FAIL" };
    let _ = writeln!(s, "result {verdict} ({passed}/{})", report.checks.len());
    s
}

struct SweepRow {
    value: f64,
    measured: f64,
    predicted: f64,
    energy: f64,
    drift: f64,
}

/// Fills the swept parameter with `value` when the model does not set it.
fn seed_param(model: &ModelArgs, name: &str, value: f64) -> ModelArgs {
    let mut m = model.clone();
    let slot = match name {
        "lambda" => &mut m.lambda,
        "omega" => &mut m.omega,
        "xi" => &mut m.xi,
        "beta" => &mut m.beta,
        "eta" => &mut m.eta,
        "A" => &mut m.amplitude,
        "phi" => &mut m.phi,
        "delta" => &mut m.delta,
        _ => return m,
    };
    slot.get_or_insert(value);
    m
}

pub fn sweep(args: &SweepArgs) -> Result<Outcome, CliError> {
    let family = resolve_model(&seed_param(&args.model, &args.param, args.lo))?;
    if args.count < 2 {
        return Err(CliError::validation("count", "a sweep needs at least 2 points"));
    }
    if !(args.lo.is_finite() && args.hi.is_finite()) {
        return Err(CliError::validation("lo", "sweep bounds must be finite"));
    }
    if !(args.periods > 0.0) {
        return Err(CliError::validation("periods", "must be > 0"));
    }
    if !family.params().iter().any(|(n, _)| *n == args.param) || args.param == "sign" {
        return Err(CliError::validation(
            "param",
            format!("family {} has no sweepable parameter `{}`", family.tag(), args.param),
        ));
    }
    let base_opts = integrator_options(&args.tol)?;
    let values: Vec<f64> = (0..args.count)
        .map(|i| args.lo + (args.hi - args.lo) * i as f64 / (args.count - 1) as f64)
        .collect();
    let rows: Vec<Result<SweepRow, PdmError>> = values
        .par_iter()
        .map(|&v| sweep_point(&family, &args.param, v, args.periods, &base_opts))
        .collect();

    let mut buf = Vec::new();
    writeln!(buf, "{},measured_period,predicted_period,energy,drift", args.param).expect("write to memory");
    for row in rows {
        let r = row?;
        write_row(&mut buf, &[r.value, r.measured, r.predicted, r.energy, r.drift]).expect("write to memory");
    }
    emit(args.output.as_deref(), &buf)?;
    Ok(Outcome::Ok)
}

fn sweep_point(base: &ModelFamily, param: &str, value: f64, periods: f64, opts: &IntegratorOptions) -> Result<SweepRow, PdmError> {
    let family = base.with_param(param, value)?;
    let system = build_model(&family)?;
    let map = catalog_map(&family)?;
    let sol = ClosedFormSolution::new(&family)?;
    let period = sol.period();
    let (x0, v0) = sol.initial_state();
    let opts = opts.clone().with_grid(SampleGrid::Step(period / 2000.0));
    let traj = integrate_pdm(&system, &map, InitialState::new(x0, v0), periods * period, &opts)?;
    Ok(SweepRow {
        value,
        measured: estimate_period(&traj)?,
        predicted: period,
        energy: traj.samples[0].energy,
        drift: traj.energy_drift(),
    })
}

pub fn map_table_cmd(args: &MapTableArgs) -> Result<Outcome, CliError> {
    let family = resolve_model(&args.model)?;
    let map = catalog_map(&family)?;
    let domain = map.domain();
    let window = domain.sampling_window(default_center(domain));
    let window = Interval::new(args.lo.unwrap_or(window.lo), args.hi.unwrap_or(window.hi));
    if !(window.lo < window.hi) {
        return Err(CliError::validation("lo", format!("need lo < hi, got [{}, {}]", fmt_float(window.lo), fmt_float(window.hi))));
    }
    let rows = map_table(&map, window, args.count)?;
    let mut buf = Vec::new();
    write_map_table_csv(&mut buf, &rows).expect("write to memory");
    emit(args.output.as_deref(), &buf)?;
    Ok(Outcome::Ok)
}
