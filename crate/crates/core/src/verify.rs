//! Invariant suite for one catalog family: closed forms against the equation
//! of motion, the integrator against closed forms, and the two Lagrangian
//! pictures against each other.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::document::ModelDocument;
use crate::dynamics::{estimate_period, integrate_pdm, picture_discrepancy, InitialState, Trajectory};
use crate::error::Result;
use crate::integrator::{IntegratorOptions, SampleGrid, DEFAULT_RTOL};
use crate::models::{build_model, paired_potential, ModelFamily, PdmSystem};
use crate::solutions::{
    isotonic_omega_from_frequency, mapped_reference_solution, omega_effective, ClosedFormSolution,
};
use crate::transform::{
    catalog_map, check_compatibility, default_center, invert_q, is_linearizing, linearization_q, q_anchor,
    q_from_quadrature, reference_potential, NonlocalMap,
};

pub const COMPATIBILITY_TOL: f64 = 1e-12;
pub const CLOSED_FORM_RESIDUAL_TOL: f64 = 1e-10;
pub const QUADRATURE_TOL: f64 = 1e-9;
pub const INVERSION_TOL: f64 = 1e-8;
pub const ENERGY_DRIFT_TOL: f64 = 1e-8;
pub const TRAJECTORY_TOL: f64 = 1e-6;
pub const PERIOD_REL_TOL: f64 = 1e-5;
pub const PICTURE_TOL: f64 = 1e-6;
pub const EXACT_TOL: f64 = 1e-12;
pub const LINEARIZATION_TOL: f64 = 1e-6;

const SEED: u64 = 0x7e51_f00d;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckResult {
    fn new(name: &str, measured: f64, tolerance: f64) -> Self {
        CheckResult {
            name: name.to_string(),
            measured,
            tolerance,
            passed: measured <= tolerance,
            detail: None,
        }
    }

    fn failed(name: &str, tolerance: f64, err: impl ToString) -> Self {
        CheckResult {
            name: name.to_string(),
            measured: f64::INFINITY,
            tolerance,
            passed: false,
            detail: Some(err.to_string()),
        }
    }

    fn with_detail(mut self, detail: String) -> Self {
        self.detail = Some(detail);
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub model: ModelDocument,
    pub checks: Vec<CheckResult>,
    pub measured_period: Option<f64>,
    pub predicted_period: f64,
    /// Extra reported quantities that are not pass/fail.
    pub notes: BTreeMap<String, f64>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub rtol: f64,
    /// Closed-form periods covered by the long integrations.
    pub periods: f64,
    pub random_points: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            rtol: DEFAULT_RTOL,
            periods: 10.0,
            random_points: 1000,
        }
    }
}

/// Runs every invariant that applies to `family`.
pub fn verify_family(family: &ModelFamily, opts: &VerifyOptions) -> Result<VerifyReport> {
    let system = build_model(family)?;
    let map = catalog_map(family)?;
    let sol = ClosedFormSolution::new(family)?;
    let period = sol.period();
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut checks = Vec::new();
    let mut notes = BTreeMap::new();

    checks.extend(transform_checks(family, opts.random_points)?);
    checks.push(closed_form_residual(&system, &sol, opts, &mut rng)?);

    let t_end = opts.periods * period;
    let int_opts = IntegratorOptions::default().with_rtol(opts.rtol);
    let (x0, v0) = sol.initial_state();
    let ic = InitialState::new(x0, v0);
    let mut measured_period = None;

    match integrate_pdm(&system, &map, ic, t_end, &int_opts.clone().with_grid(SampleGrid::Step(period / 2000.0))) {
        Ok(traj) => {
            checks.push(CheckResult::new("energy_drift", traj.energy_drift(), ENERGY_DRIFT_TOL));
            checks.push(CheckResult::new(
                "integrator_vs_closed_form",
                max_closed_form_deviation(&traj, &sol),
                TRAJECTORY_TOL,
            ));
            match estimate_period(&traj) {
                Ok(p) => {
                    measured_period = Some(p);
                    checks.push(
                        CheckResult::new("period", (p / period - 1.0).abs(), PERIOD_REL_TOL)
                            .with_detail(format!("measured {p:.9} vs predicted {period:.9}")),
                    );
                }
                Err(e) => checks.push(CheckResult::failed("period", PERIOD_REL_TOL, e)),
            }
            if let ModelFamily::Ml1 { omega, .. } = *family {
                checks.push(CheckResult::new(
                    "quasi_conservation",
                    quasi_conservation_drift(&traj, omega),
                    ENERGY_DRIFT_TOL,
                ));
            }
        }
        Err(e) => {
            for (name, tol) in [
                ("energy_drift", ENERGY_DRIFT_TOL),
                ("integrator_vs_closed_form", TRAJECTORY_TOL),
                ("period", PERIOD_REL_TOL),
            ] {
                checks.push(CheckResult::failed(name, tol, &e));
            }
        }
    }

    match picture_window(family, period, t_end) {
        Some(window) => {
            let opts = int_opts.clone().with_grid(SampleGrid::Count(2001));
            match integrate_pdm(&system, &map, ic, window, &opts) {
                Ok(traj) => {
                    let reference = reference_potential(family);
                    checks.push(match picture_discrepancy(&traj, &map, &reference, &opts) {
                        Ok(d) => CheckResult::new("picture_equivalence", d, PICTURE_TOL),
                        Err(e) => CheckResult::failed("picture_equivalence", PICTURE_TOL, e),
                    });
                    checks.push(match mapping_identity(&traj, &sol, &map, family) {
                        Ok(d) => CheckResult::new("mapping_identity", d, PICTURE_TOL),
                        Err(e) => CheckResult::failed("mapping_identity", PICTURE_TOL, e),
                    });
                }
                Err(e) => {
                    checks.push(CheckResult::failed("picture_equivalence", PICTURE_TOL, &e));
                    checks.push(CheckResult::failed("mapping_identity", PICTURE_TOL, &e));
                }
            }
            notes.insert("picture_window".into(), window);
        }
        None => {}
    }

    family_specific(family, &system, &mut checks, &mut notes)?;

    Ok(VerifyReport {
        model: ModelDocument::from_family(family),
        checks,
        measured_period,
        predicted_period: period,
        notes,
    })
}

/// Checks on the nonlocal map alone: compatibility over `points` random
/// points, quadrature and inversion of `q`, and the linearization identity
/// where the reference is harmonic.
pub fn transform_checks(family: &ModelFamily, points: usize) -> Result<Vec<CheckResult>> {
    let system = build_model(family)?;
    let map = catalog_map(family)?;
    let mut rng = StdRng::seed_from_u64(SEED ^ 0x9);
    let mut checks = vec![CheckResult::new(
        "compatibility",
        check_compatibility(&map.mass, &map.f, &map.g, points)?,
        COMPATIBILITY_TOL,
    )];
    checks.extend(quadrature_checks(&map, family, &mut rng));
    if is_linearizing(family) {
        checks.push(linearization_check(&system, &map, family.omega()));
    }
    Ok(checks)
}

fn closed_form_residual(
    system: &PdmSystem,
    sol: &ClosedFormSolution,
    opts: &VerifyOptions,
    rng: &mut StdRng,
) -> Result<CheckResult> {
    let t_max = opts.periods * sol.period();
    let mut worst: f64 = 0.0;
    for _ in 0..opts.random_points {
        let k = sol.evaluate(rng.gen_range(0.0..t_max));
        worst = worst.max(system.el_residual(k.x, k.xdot, k.xddot)?.abs());
    }
    Ok(CheckResult::new("closed_form_residual", worst, CLOSED_FORM_RESIDUAL_TOL))
}

/// Random points of the map's sampling window, kept off the endpoints.
pub fn sample_points(map: &NonlocalMap, count: usize, rng: &mut StdRng) -> Vec<f64> {
    let domain = map.domain();
    let w = domain.sampling_window(default_center(domain));
    (0..count).map(|_| rng.gen_range(w.lo..w.hi)).collect()
}

fn quadrature_checks(map: &NonlocalMap, family: &ModelFamily, rng: &mut StdRng) -> Vec<CheckResult> {
    let (x_anchor, q_at_anchor) = q_anchor(family);
    let domain = map.domain();
    let window = domain.sampling_window(default_center(domain));
    let mut worst_q: f64 = 0.0;
    let mut worst_inv: f64 = 0.0;
    for x in sample_points(map, 100, rng) {
        match q_from_quadrature(&map.mass, &map.f, x_anchor, x) {
            Ok(v) => worst_q = worst_q.max((v + q_at_anchor - map.q.value(x)).abs()),
            Err(e) => return vec![CheckResult::failed("q_quadrature", QUADRATURE_TOL, e)],
        }
        match invert_q(map, map.q.value(x), window) {
            Ok(back) => worst_inv = worst_inv.max((back - x).abs()),
            Err(e) => return vec![CheckResult::failed("q_inversion", INVERSION_TOL, e)],
        }
    }
    vec![
        CheckResult::new("q_quadrature", worst_q, QUADRATURE_TOL),
        CheckResult::new("q_inversion", worst_inv, INVERSION_TOL),
    ]
}

fn linearization_check(system: &PdmSystem, map: &NonlocalMap, omega: f64) -> CheckResult {
    let domain = map.domain().intersect(&system.domain());
    let w = domain.sampling_window(default_center(domain));
    let mut worst: f64 = 0.0;
    for i in 1..200 {
        let x = w.lo + (w.hi - w.lo) * i as f64 / 200.0;
        if map.f.value(x).abs() < 1e-6 {
            continue;
        }
        match linearization_q(system, &map.f, omega, x) {
            Ok(lin) => {
                let dq = (lin.q - map.q.value(x)).abs() / (1.0 + map.q.value(x).abs());
                worst = worst.max(dq).max(lin.consistency_residual);
            }
            Err(e) => return CheckResult::failed("linearization", LINEARIZATION_TOL, e),
        }
    }
    CheckResult::new("linearization", worst, LINEARIZATION_TOL)
}

fn max_closed_form_deviation(traj: &Trajectory, sol: &ClosedFormSolution) -> f64 {
    traj.samples
        .iter()
        .map(|s| (s.x - sol.evaluate(s.t).x).abs())
        .fold(0.0, f64::max)
}

/// `max |(q̃² + ω²q²) - (q̃₀² + ω²q₀²)| / (1 + q̃₀² + ω²q₀²)`.
pub fn quasi_conservation_drift(traj: &Trajectory, omega: f64) -> f64 {
    let invariant = |q: f64, p: f64| p * p + omega * omega * q * q;
    let first = &traj.samples[0];
    let i0 = invariant(first.q, first.qdot_tau);
    traj.samples
        .iter()
        .map(|s| (invariant(s.q, s.qdot_tau) - i0).abs())
        .fold(0.0, f64::max)
        / (1.0 + i0)
}

/// `max |q(x_closed(t)) - q_ref(τ(t))|` along an integrated trajectory.
fn mapping_identity(traj: &Trajectory, sol: &ClosedFormSolution, map: &NonlocalMap, family: &ModelFamily) -> Result<f64> {
    let reference = mapped_reference_solution(family)?;
    Ok(traj
        .samples
        .iter()
        .map(|s| (map.q.value(sol.evaluate(s.t).x) - reference.q(s.tau)).abs())
        .fold(0.0, f64::max))
}

/// Time span over which the trajectory stays inside the map's domain.
///
/// The ML-II map only covers `x > 0`, so the comparison stops short of the
/// first zero of `A cos(Ωt + φ)`.
fn picture_window(family: &ModelFamily, period: f64, t_end: f64) -> Option<f64> {
    match *family {
        ModelFamily::Ml2 { amplitude, phase, .. } => {
            let phi = phase.rem_euclid(2.0 * PI);
            let phi = if phi > PI { phi - 2.0 * PI } else { phi };
            let reach = 0.45 * PI - phi;
            if amplitude <= 0.0 || reach <= 0.0 || phi < -0.45 * PI {
                None
            } else {
                Some(reach / (2.0 * PI) * period)
            }
        }
        _ => Some(t_end),
    }
}

fn family_specific(
    family: &ModelFamily,
    system: &PdmSystem,
    checks: &mut Vec<CheckResult>,
    notes: &mut BTreeMap<String, f64>,
) -> Result<()> {
    if let Some(paired) = paired_potential(family) {
        let w = system.domain().sampling_window(default_center(system.domain()));
        let mut worst: f64 = 0.0;
        for i in 0..=400 {
            let x = w.lo + (w.hi - w.lo) * i as f64 / 400.0;
            let m = system.mass.value(x);
            worst = worst.max((paired.derivative(x) / m - system.potential.derivative(x) / m).abs());
        }
        checks.push(CheckResult::new("paired_force_field", worst, EXACT_TOL));
    }

    match *family {
        ModelFamily::Ml1 {
            sign,
            lambda,
            omega,
            amplitude,
            ..
        } => {
            let formula = 0.5 * omega * omega * amplitude * amplitude / (1.0 + sign.factor() * lambda * amplitude * amplitude);
            let e = system.energy(amplitude, 0.0)?;
            checks.push(CheckResult::new("turning_point_energy", (e - formula).abs(), EXACT_TOL));
        }
        ModelFamily::ShiftedMl {
            sign,
            lambda,
            omega,
            xi,
            amplitude,
            ..
        } => {
            let s = sign.factor() * lambda;
            let e = system.energy(amplitude - xi, 0.0)?;
            let in_u = 0.5 * omega * omega * amplitude * amplitude / (1.0 + s * amplitude * amplitude);
            let shifted = amplitude - xi;
            let in_x = 0.5 * omega * omega * shifted * shifted / (1.0 + s * shifted * shifted);
            checks.push(CheckResult::new("turning_point_energy", (e - in_u).abs(), EXACT_TOL));
            notes.insert("energy_turning_point".into(), e);
            notes.insert("energy_formula_amplitude".into(), in_u);
            notes.insert("energy_formula_shifted_amplitude".into(), in_x);
        }
        ModelFamily::Isotonic {
            sign,
            lambda,
            omega,
            beta,
            amplitude,
            ..
        } => {
            let big = omega_effective(family)?;
            let back = isotonic_omega_from_frequency(sign, lambda, beta, amplitude, big)?;
            checks.push(CheckResult::new("frequency_relation", (back - omega).abs(), EXACT_TOL));
            notes.insert("Omega".into(), big);
        }
        _ => {}
    }
    notes.insert("Omega_effective".into(), omega_effective(family)?);
    Ok(())
}
