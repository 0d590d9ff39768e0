//! Numerical integration of the PDM Euler-Lagrange equation together with the
//! rescaled time `τ`, and of the unit-mass reference equation in `τ`.

use crate::error::{PdmError, Result};
use crate::function::DifferentiableFn;
use crate::integrator::{self, IntegratorOptions, SampleGrid, StepStats};
use crate::models::PdmSystem;
use crate::transform::NonlocalMap;

/// Start of an x-space integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub x0: f64,
    pub xdot0: f64,
    pub t0: f64,
    pub tau0: f64,
}

impl InitialState {
    pub fn new(x0: f64, xdot0: f64) -> Self {
        InitialState {
            x0,
            xdot0,
            t0: 0.0,
            tau0: 0.0,
        }
    }
}

/// One record of a PDM trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub xdot: f64,
    pub tau: f64,
    pub q: f64,
    /// `dq/dτ = ẋ√m(x)`.
    pub qdot_tau: f64,
    pub energy: f64,
    /// Euler-Lagrange residual with `ẍ` taken from finite differences of the
    /// sampled velocity.
    pub residual: f64,
}

/// How a trajectory was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta {
    pub integrator: &'static str,
    pub rtol: f64,
    pub atol: f64,
    pub stats: StepStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn positions(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.x).collect()
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least one sample")
    }

    /// `max |E(i) - E(0)| / (1 + |E(0)|)`.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.samples[0].energy;
        self.samples
            .iter()
            .map(|s| (s.energy - e0).abs())
            .fold(0.0, f64::max)
            / (1.0 + e0.abs())
    }
}

/// One record in the reference picture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSample {
    pub tau: f64,
    pub q: f64,
    pub qdot: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTrajectory {
    pub samples: Vec<ReferenceSample>,
    pub meta: Option<TrajectoryMeta>,
}

/// Total energy `½m(x)ẋ² + V(x)`.
pub fn energy(system: &PdmSystem, x: f64, xdot: f64) -> Result<f64> {
    system.energy(x, xdot)
}

/// Integrates `ẋ = v`, `v̇ = -½(m'/m)v² - V'/m`, `τ̇ = f(x)` and fills the
/// mapped columns through `map`.
pub fn integrate_pdm(
    system: &PdmSystem,
    map: &NonlocalMap,
    ic: InitialState,
    t_end: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    system.domain().check(ic.x0)?;
    let rhs = |_t: f64, y: &[f64; 3]| [y[1], system.acceleration(y[0], y[1]), map.f.value(y[0])];
    let guard = |t: f64, y: &[f64; 3]| {
        if system.domain().contains(y[0]) && y.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(PdmError::DomainEscape { t, x: y[0] })
        }
    };
    let (raw, stats) = integrator::integrate(rhs, guard, ic.t0, [ic.x0, ic.xdot0, ic.tau0], t_end, opts)?;

    let accel = finite_difference_rates(
        &raw.iter().map(|(t, _)| *t).collect::<Vec<_>>(),
        &raw.iter().map(|(_, y)| y[1]).collect::<Vec<_>>(),
    );
    let samples = raw
        .iter()
        .zip(accel)
        .map(|((t, y), xddot)| {
            let (x, xdot, tau) = (y[0], y[1], y[2]);
            let m = system.mass.value(x);
            Sample {
                t: *t,
                x,
                xdot,
                tau,
                q: map.q.value(x),
                qdot_tau: xdot * m.sqrt(),
                energy: 0.5 * m * xdot * xdot + system.potential.value(x),
                residual: xddot + 0.5 * system.mass.derivative(x) / m * xdot * xdot + system.potential.derivative(x) / m,
            }
        })
        .collect();
    Ok(Trajectory {
        samples,
        meta: TrajectoryMeta {
            integrator: integrator::METHOD_NAME,
            rtol: opts.rtol,
            atol: opts.atol,
            stats,
        },
    })
}

/// Integrates the unit-mass equation `d²q/dτ² = -V'(q)` from `τ = 0`.
pub fn integrate_reference(
    potential_q: &DifferentiableFn,
    q0: f64,
    qdot0: f64,
    tau_end: f64,
    opts: &IntegratorOptions,
) -> Result<ReferenceTrajectory> {
    potential_q.domain().check(q0)?;
    let rhs = |_t: f64, y: &[f64; 2]| [y[1], -potential_q.derivative(y[0])];
    let guard = |t: f64, y: &[f64; 2]| {
        if potential_q.domain().contains(y[0]) && y.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(PdmError::DomainEscape { t, x: y[0] })
        }
    };
    let (raw, stats) = integrator::integrate(rhs, guard, 0.0, [q0, qdot0], tau_end, opts)?;
    Ok(ReferenceTrajectory {
        samples: raw
            .into_iter()
            .map(|(tau, y)| ReferenceSample {
                tau,
                q: y[0],
                qdot: y[1],
            })
            .collect(),
        meta: Some(TrajectoryMeta {
            integrator: integrator::METHOD_NAME,
            rtol: opts.rtol,
            atol: opts.atol,
            stats,
        }),
    })
}

/// Re-expresses a PDM trajectory as `(τ, q, dq/dτ)` samples.
///
/// `τ` must be strictly monotone; a decreasing `τ` (negative `f`) is accepted
/// since the reference equation is invariant under `τ → -τ`.
pub fn pushforward(traj: &Trajectory, map: &NonlocalMap) -> Result<ReferenceTrajectory> {
    let taus: Vec<f64> = traj.samples.iter().map(|s| s.tau).collect();
    if tau_direction(&taus).is_none() {
        return Err(PdmError::NonMonotoneTau);
    }
    let samples = traj
        .samples
        .iter()
        .map(|s| ReferenceSample {
            tau: s.tau,
            q: map.q.value(s.x),
            qdot: s.xdot * map.mass.value(s.x).sqrt(),
        })
        .collect();
    Ok(ReferenceTrajectory { samples, meta: None })
}

/// `Some(+1.0)` for strictly increasing, `Some(-1.0)` for strictly decreasing,
/// `None` otherwise. A single sample counts as increasing.
fn tau_direction(taus: &[f64]) -> Option<f64> {
    if taus.len() < 2 {
        return Some(1.0);
    }
    if taus.windows(2).all(|w| w[1] > w[0]) {
        Some(1.0)
    } else if taus.windows(2).all(|w| w[1] < w[0]) {
        Some(-1.0)
    } else {
        None
    }
}

/// Finite-difference check of the reference equation on pushed-forward
/// samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceResidual {
    /// `max |q̈ + V'(q)|` with `q̈` from second-order differences of `dq/dτ`.
    pub max_residual: f64,
    /// Estimated truncation plus round-off error of those differences.
    pub truncation_bound: f64,
}

/// Evaluates `q̈ + V'(q)` along a reference trajectory by finite differences.
pub fn reference_residual(traj: &ReferenceTrajectory, potential_q: &DifferentiableFn) -> Result<ReferenceResidual> {
    let n = traj.samples.len();
    if n < 5 {
        return Err(PdmError::invalid("samples", "need at least 5 samples for the residual"));
    }
    let taus: Vec<f64> = traj.samples.iter().map(|s| s.tau).collect();
    if tau_direction(&taus).is_none() {
        return Err(PdmError::NonMonotoneTau);
    }
    let rates: Vec<f64> = traj.samples.iter().map(|s| s.qdot).collect();
    let acc = finite_difference_rates(&taus, &rates);
    let qdot_scale = rates.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);

    let mut max_residual: f64 = 0.0;
    let mut bound: f64 = 0.0;
    for i in 2..n - 2 {
        let r = (acc[i] + potential_q.derivative(traj.samples[i].q)).abs();
        max_residual = max_residual.max(r);
        // Leading error of the three-point rate is h₀h₁/6 · (dq/dτ)'''.
        let h0 = (taus[i] - taus[i - 1]).abs();
        let h1 = (taus[i + 1] - taus[i]).abs();
        let third = second_difference(&taus[i - 1..=i + 1], &acc[i - 1..=i + 1]).abs();
        let roundoff = 4.0 * f64::EPSILON * qdot_scale / h0.min(h1);
        bound = bound.max(h0 * h1 / 6.0 * third + roundoff);
    }
    Ok(ReferenceResidual {
        max_residual,
        truncation_bound: bound,
    })
}

fn second_difference(x: &[f64], y: &[f64]) -> f64 {
    let (h0, h1) = (x[1] - x[0], x[2] - x[1]);
    2.0 * (h0 * y[2] - (h0 + h1) * y[1] + h1 * y[0]) / (h0 * h1 * (h0 + h1))
}

/// Derivative of `y(x)` at every sample: second-order three-point formula on
/// the (possibly non-uniform) grid, one-sided at the ends.
fn finite_difference_rates(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let three = |i0: usize, at: usize| -> f64 {
        let (x0, x1, x2) = (x[i0], x[i0 + 1], x[i0 + 2]);
        let (y0, y1, y2) = (y[i0], y[i0 + 1], y[i0 + 2]);
        let xa = x[at];
        // derivative of the interpolating parabola at xa
        y0 * (2.0 * xa - x1 - x2) / ((x0 - x1) * (x0 - x2))
            + y1 * (2.0 * xa - x0 - x2) / ((x1 - x0) * (x1 - x2))
            + y2 * (2.0 * xa - x0 - x1) / ((x2 - x0) * (x2 - x1))
    };
    (0..n)
        .map(|i| match i {
            0 => three(0, 0),
            i if i == n - 1 => three(n - 3, n - 1),
            i => three(i - 1, i),
        })
        .collect()
}

/// Period of a sampled signal from same-direction crossings of its mean,
/// linearly interpolated between samples and averaged over full cycles.
pub fn estimate_period_of(times: &[f64], values: &[f64]) -> Result<f64> {
    let n = values.len().min(times.len());
    if n < 2 {
        return Err(PdmError::InsufficientCycles { found: 0 });
    }
    let mean = values[..n].iter().sum::<f64>() / n as f64;
    let mut up = Vec::new();
    let mut down = Vec::new();
    for i in 0..n - 1 {
        let (a, b) = (values[i] - mean, values[i + 1] - mean);
        if a < 0.0 && b >= 0.0 || a >= 0.0 && b < 0.0 {
            let frac = a / (a - b);
            let tc = times[i] + frac * (times[i + 1] - times[i]);
            if a < 0.0 {
                up.push(tc);
            } else {
                down.push(tc);
            }
        }
    }
    let found = up.len() + down.len();
    if found < 3 {
        return Err(PdmError::InsufficientCycles { found });
    }
    let mut total = 0.0;
    let mut cycles = 0usize;
    for c in [&up, &down] {
        if c.len() >= 2 {
            total += c[c.len() - 1] - c[0];
            cycles += c.len() - 1;
        }
    }
    Ok(total / cycles as f64)
}

/// Period of the `x(t)` signal of a trajectory.
pub fn estimate_period(traj: &Trajectory) -> Result<f64> {
    estimate_period_of(&traj.times(), &traj.positions())
}

/// Largest distance between the pushforward of a PDM trajectory and an
/// independent integration of the reference equation started from the mapped
/// initial state, compared on the pushforward's own `τ` grid.
pub fn picture_discrepancy(
    traj: &Trajectory,
    map: &NonlocalMap,
    reference: &DifferentiableFn,
    opts: &IntegratorOptions,
) -> Result<f64> {
    let pushed = pushforward(traj, map)?;
    let taus: Vec<f64> = pushed.samples.iter().map(|s| s.tau).collect();
    let dir = tau_direction(&taus).ok_or(PdmError::NonMonotoneTau)?;
    let tau0 = taus[0];
    // Reference runs forward in s = dir·(τ - τ₀); reversing time flips the velocity.
    let grid: Vec<f64> = taus.iter().map(|t| dir * (t - tau0)).collect();
    let s_end = *grid.last().unwrap();
    let first = pushed.samples[0];
    let ref_opts = IntegratorOptions {
        grid: SampleGrid::Times(grid),
        ..opts.clone()
    };
    let reference_traj = integrate_reference(reference, first.q, dir * first.qdot, s_end, &ref_opts)?;
    Ok(pushed
        .samples
        .iter()
        .zip(&reference_traj.samples)
        .map(|(a, b)| (a.q - b.q).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_model, ModelFamily, Sign};
    use crate::transform::{catalog_map, reference_potential};
    use std::f64::consts::PI;

    fn ml1(sign: Sign, lambda: f64) -> (PdmSystem, NonlocalMap) {
        let fam = ModelFamily::ml1(sign, lambda, 1.0, 1.0).unwrap();
        (build_model(&fam).unwrap(), catalog_map(&fam).unwrap())
    }

    #[test]
    fn sho_returns_after_one_period() {
        let (sys, map) = ml1(Sign::Plus, 0.0);
        let traj = integrate_pdm(&sys, &map, InitialState::new(1.0, 0.0), 2.0 * PI, &IntegratorOptions::default()).unwrap();
        let last = traj.last();
        assert!((last.x - 1.0).abs() < 1e-8);
        assert!(last.xdot.abs() < 1e-8);
        for s in &traj.samples {
            assert!((s.tau - s.t).abs() < 1e-12);
            assert_eq!(s.q, s.x);
        }
    }

    #[test]
    fn ml1_returns_after_its_period() {
        let (sys, map) = ml1(Sign::Plus, 0.1);
        let t_end = 2.0 * PI * 1.1f64.sqrt();
        let traj = integrate_pdm(&sys, &map, InitialState::new(1.0, 0.0), t_end, &IntegratorOptions::default()).unwrap();
        assert!((traj.last().x - 1.0).abs() < 1e-6);
    }

    #[test]
    fn equilibrium_stays_put() {
        let (sys, map) = ml1(Sign::Plus, 0.1);
        let traj = integrate_pdm(&sys, &map, InitialState::new(0.0, 0.0), 10.0, &IntegratorOptions::default()).unwrap();
        for s in &traj.samples {
            assert_eq!(s.x, 0.0);
            assert_eq!(s.energy, 0.0);
        }
    }

    #[test]
    fn trajectory_columns_are_consistent() {
        let (sys, map) = ml1(Sign::Minus, 0.25);
        let traj = integrate_pdm(&sys, &map, InitialState::new(1.0, 0.0), 20.0, &IntegratorOptions::default()).unwrap();
        assert!(traj.samples.windows(2).all(|w| w[1].t > w[0].t && w[1].tau > w[0].tau));
        for s in &traj.samples {
            assert_eq!(s.qdot_tau, s.xdot * sys.mass.value(s.x).sqrt());
        }
        assert!(traj.energy_drift() < 1e-8);
    }

    #[test]
    fn energy_examples() {
        let (sys, _) = ml1(Sign::Plus, 0.1);
        assert!((energy(&sys, 1.0, 0.0).unwrap() - 0.5 / 1.1).abs() < 1e-15);
        assert_eq!(energy(&sys, 0.0, 0.0).unwrap(), 0.0);
        let (sho, _) = ml1(Sign::Plus, 0.0);
        assert_eq!(energy(&sho, 1.0, 1.0).unwrap(), 1.0);
        let (minus, _) = ml1(Sign::Minus, 0.5);
        assert!(energy(&minus, 2.0, 0.0).is_err());
    }

    #[test]
    fn domain_escape_is_reported() {
        let (sys, map) = ml1(Sign::Minus, 0.25);
        assert!(integrate_pdm(&sys, &map, InitialState::new(2.5, 0.0), 1.0, &IntegratorOptions::default()).is_err());
    }

    #[test]
    fn period_examples() {
        for (sign, lambda, expected) in [
            (Sign::Plus, 0.0, 2.0 * PI),
            (Sign::Plus, 0.1, 2.0 * PI * 1.1f64.sqrt()),
            (Sign::Minus, 0.1, 2.0 * PI * 0.9f64.sqrt()),
        ] {
            let (sys, map) = ml1(sign, lambda);
            let opts = IntegratorOptions::default().with_grid(SampleGrid::Step(1e-3));
            let traj = integrate_pdm(&sys, &map, InitialState::new(1.0, 0.0), 10.0 * expected, &opts).unwrap();
            let p = estimate_period(&traj).unwrap();
            assert!((p - expected).abs() < 1e-5, "{sign} {lambda}: {p} vs {expected}");
        }
        assert!((2.0 * PI * 1.1f64.sqrt() / 6.589836 - 1.0).abs() < 1e-5);
        assert!((2.0 * PI * 0.9f64.sqrt() / 5.960753 - 1.0).abs() < 1e-5);
    }

    #[test]
    fn period_needs_cycles() {
        let t: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let v: Vec<f64> = t.iter().map(|x| x * x).collect();
        assert!(matches!(
            estimate_period_of(&t, &v),
            Err(PdmError::InsufficientCycles { .. })
        ));
    }

    #[test]
    fn reference_harmonic_and_isotonic() {
        let fam = ModelFamily::ml1(Sign::Plus, 0.0, 1.0, 1.0).unwrap();
        let v = reference_potential(&fam);
        let r = integrate_reference(&v, 0.8, 0.0, 20.0, &IntegratorOptions::default()).unwrap();
        for s in &r.samples {
            assert!((s.q - 0.8 * s.tau.cos()).abs() < 1e-8);
        }

        let iso = ModelFamily::isotonic(Sign::Plus, 0.1, 1.0, 0.1, 1.0).unwrap();
        let v = reference_potential(&iso);
        let q_star = (0.2f64).sqrt().sqrt();
        let r = integrate_reference(&v, q_star, 0.0, 30.0, &IntegratorOptions::default()).unwrap();
        for s in &r.samples {
            assert!((s.q - q_star).abs() < 1e-10);
        }
    }

    #[test]
    fn pushforward_identity_and_constant() {
        let (sys, map) = ml1(Sign::Plus, 0.0);
        let traj = integrate_pdm(&sys, &map, InitialState::new(0.6, 0.2), 5.0, &IntegratorOptions::default()).unwrap();
        let pushed = pushforward(&traj, &map).unwrap();
        for (a, b) in pushed.samples.iter().zip(&traj.samples) {
            assert!((a.tau - b.t).abs() < 1e-12);
            assert_eq!((a.q, a.qdot), (b.x, b.xdot));
        }

        let (sys, map) = ml1(Sign::Plus, 0.3);
        let traj = integrate_pdm(&sys, &map, InitialState::new(0.0, 0.0), 5.0, &IntegratorOptions::default()).unwrap();
        let pushed = pushforward(&traj, &map).unwrap();
        assert!(pushed.samples.iter().all(|s| s.q == 0.0));
    }

    #[test]
    fn pushforward_satisfies_reference_equation() {
        let fam = ModelFamily::ml1(Sign::Plus, 0.3, 1.0, 1.0).unwrap();
        let (sys, map) = (build_model(&fam).unwrap(), catalog_map(&fam).unwrap());
        let opts = IntegratorOptions::default().with_grid(SampleGrid::Step(0.01));
        let traj = integrate_pdm(&sys, &map, InitialState::new(1.0, 0.0), 30.0, &opts).unwrap();
        let pushed = pushforward(&traj, &map).unwrap();
        let res = reference_residual(&pushed, &reference_potential(&fam)).unwrap();
        assert!(res.max_residual <= res.truncation_bound * 10.0, "{res:?}");
        assert!(res.max_residual < 1e-4);
    }

    #[test]
    fn pushforward_rejects_non_monotone_tau() {
        // ML-II: f changes sign where x crosses 0.
        let fam = ModelFamily::ml2(Sign::Minus, 0.2, 1.0, 1.0).unwrap();
        let (sys, map) = (build_model(&fam).unwrap(), catalog_map(&fam).unwrap());
        let traj = integrate_pdm(&sys, &map, InitialState::new(1.0, 0.0), 8.0, &IntegratorOptions::default()).unwrap();
        assert_eq!(pushforward(&traj, &map).unwrap_err(), PdmError::NonMonotoneTau);
    }

    #[test]
    fn finite_differences_are_second_order() {
        let x: Vec<f64> = (0..50).map(|i| (i as f64 * 0.1).powf(1.3)).collect();
        let y: Vec<f64> = x.iter().map(|v| v.sin()).collect();
        let d = finite_difference_rates(&x, &y);
        for i in 1..49 {
            assert!((d[i] - x[i].cos()).abs() < 2e-2, "i={i}");
        }
    }
}
