//! Dormand-Prince 5(4) integrator with PI step-size control and fourth-order
//! dense output, for small fixed-size autonomous-or-not systems.

use crate::error::{PdmError, Result};

pub const DEFAULT_RTOL: f64 = 1e-10;
pub const DEFAULT_ATOL: f64 = 1e-12;
pub const MIN_STEP: f64 = 1e-14;
pub const METHOD_NAME: &str = "dopri5(4)-pi-dense4";

/// Where the integrator reports samples.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleGrid {
    /// `n ≥ 2` uniformly spaced times including both ends.
    Count(usize),
    /// Every `dt` from the start, plus the end time.
    Step(f64),
    /// Explicit non-decreasing times inside the integration span.
    Times(Vec<f64>),
}

impl SampleGrid {
    pub(crate) fn times(&self, t0: f64, t_end: f64) -> Result<Vec<f64>> {
        let span = t_end - t0;
        let out = match self {
            SampleGrid::Count(n) => {
                if *n < 2 {
                    return Err(PdmError::invalid("samples", "need at least 2 samples"));
                }
                let mut v: Vec<f64> = (0..*n).map(|i| t0 + span * i as f64 / (*n - 1) as f64).collect();
                *v.last_mut().unwrap() = t_end;
                v
            }
            SampleGrid::Step(dt) => {
                if !(*dt > 0.0) {
                    return Err(PdmError::invalid("dt", format!("must be > 0, got {dt}")));
                }
                let n = (span / dt).floor() as usize;
                let mut v: Vec<f64> = (0..=n).map(|i| t0 + dt * i as f64).collect();
                if t_end - v[v.len() - 1] > 1e-12 * span.abs().max(1.0) {
                    v.push(t_end);
                } else {
                    *v.last_mut().unwrap() = t_end;
                }
                v
            }
            SampleGrid::Times(ts) => {
                if ts.is_empty() {
                    return Err(PdmError::invalid("samples", "empty sample grid"));
                }
                if ts.windows(2).any(|w| w[1] < w[0]) || ts[0] < t0 || ts[ts.len() - 1] > t_end {
                    return Err(PdmError::invalid(
                        "samples",
                        "sample times must be sorted and inside the integration span",
                    ));
                }
                ts.clone()
            }
        };
        Ok(out)
    }
}

/// Tolerances and limits for one integration.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: Option<f64>,
    pub max_step: Option<f64>,
    pub max_steps: usize,
    pub grid: SampleGrid,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rtol: DEFAULT_RTOL,
            atol: DEFAULT_ATOL,
            initial_step: None,
            max_step: None,
            max_steps: 5_000_000,
            grid: SampleGrid::Count(2001),
        }
    }
}

impl IntegratorOptions {
    pub fn with_grid(mut self, grid: SampleGrid) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_rtol(mut self, rtol: f64) -> Self {
        self.rtol = rtol;
        self
    }
}

/// Step statistics of a finished integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

// Dormand-Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// error coefficients b - b*
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const PI_ALPHA: f64 = 0.7 / 5.0;
const PI_BETA: f64 = 0.4 / 5.0;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

// Dense-output weights of the continuous extension.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Coefficients of the fourth-order interpolant over one accepted step.
struct Dense<const N: usize> {
    t0: f64,
    h: f64,
    r: [[f64; N]; 5],
}

impl<const N: usize> Dense<N> {
    fn new(t0: f64, h: f64, y0: &[f64; N], y1: &[f64; N], k: [&[f64; N]; 7]) -> Self {
        let mut r = [[0.0; N]; 5];
        for i in 0..N {
            let dy = y1[i] - y0[i];
            let bspl = h * k[0][i] - dy;
            r[0][i] = y0[i];
            r[1][i] = dy;
            r[2][i] = bspl;
            r[3][i] = dy - h * k[6][i] - bspl;
            r[4][i] = h
                * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i]);
        }
        Dense { t0, h, r }
    }

    fn at(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let r = &self.r;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
        }
        out
    }
}

fn error_norm<const N: usize>(err: &[f64; N], y0: &[f64; N], y1: &[f64; N], rtol: f64, atol: f64) -> f64 {
    let mut sum = 0.0;
    for i in 0..N {
        let sc = atol + rtol * y0[i].abs().max(y1[i].abs());
        let r = err[i] / sc;
        sum += r * r;
    }
    (sum / N as f64).sqrt()
}

/// Output times with their states.
pub type Samples<const N: usize> = Vec<(f64, [f64; N])>;

/// Integrates `y' = rhs(t, y)` from `t0` to `t_end` and returns the state at
/// every grid time. `guard` is called on each accepted step and aborts the
/// integration with its error.
pub fn integrate<const N: usize, F, G>(
    rhs: F,
    guard: G,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &IntegratorOptions,
) -> Result<(Samples<N>, StepStats)>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    G: Fn(f64, &[f64; N]) -> Result<()>,
{
    if !(t_end > t0) {
        return Err(PdmError::invalid("t_end", format!("must exceed the start time {t0}, got {t_end}")));
    }
    if !(opts.rtol > 0.0) || !(opts.atol > 0.0) {
        return Err(PdmError::invalid("tolerance", "rtol and atol must be > 0"));
    }
    guard(t0, &y0)?;
    let grid = opts.grid.times(t0, t_end)?;
    let mut out = Vec::with_capacity(grid.len());
    let mut next = 0;
    while next < grid.len() && grid[next] <= t0 {
        out.push((grid[next], y0));
        next += 1;
    }

    let mut stats = StepStats::default();
    let span = t_end - t0;
    let max_step = opts.max_step.unwrap_or(span).min(span);
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    stats.evaluations += 1;
    let mut h = match opts.initial_step {
        Some(h) => h,
        None => initial_step(&rhs, t, &y, &k1, opts, &mut stats),
    }
    .min(max_step);
    let mut err_old: f64 = 1e-4;

    while t < t_end {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(PdmError::TooManySteps(opts.max_steps));
        }
        // Stretch by up to 1% rather than leave a sliver before t_end.
        let last = t + 1.01 * h >= t_end;
        if last {
            h = t_end - t;
        }
        if h < MIN_STEP {
            return Err(PdmError::StepUnderflow { t, h });
        }

        let k2 = rhs(t + C2 * h, &combine(&y, h, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * h, &combine(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(t + C4 * h, &combine(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(
            t + C5 * h,
            &combine(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = rhs(
            t + h,
            &combine(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = combine(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = rhs(t + h, &y_new);
        stats.evaluations += 6;

        let mut err = [0.0; N];
        for i in 0..N {
            err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let e = error_norm(&err, &y, &y_new, opts.rtol, opts.atol);

        if !e.is_finite() || e > 1.0 {
            stats.rejected += 1;
            let fac = if e.is_finite() {
                (SAFETY * e.powf(-0.2)).clamp(FAC_MIN, 1.0)
            } else {
                FAC_MIN
            };
            h *= fac;
            continue;
        }

        let t_new = if last { t_end } else { t + h };
        guard(t_new, &y_new).map_err(|err| match err {
            PdmError::DomainViolation { x, .. } => PdmError::DomainEscape { t: t_new, x },
            other => other,
        })?;
        let dense = Dense::new(t, h, &y, &y_new, [&k1, &k2, &k3, &k4, &k5, &k6, &k7]);
        while next < grid.len() && grid[next] <= t_new {
            let ts = grid[next];
            let ys = if ts == t_new { y_new } else { dense.at(ts) };
            out.push((ts, ys));
            next += 1;
        }
        stats.accepted += 1;
        t = t_new;
        y = y_new;
        k1 = k7;

        let e = e.max(1e-10);
        let fac = (SAFETY * e.powf(-PI_ALPHA) * err_old.powf(PI_BETA)).clamp(FAC_MIN, FAC_MAX);
        err_old = e;
        h = (h * fac).min(max_step);
    }
    Ok((out, stats))
}

fn initial_step<const N: usize, F>(
    rhs: &F,
    t: f64,
    y: &[f64; N],
    f0: &[f64; N],
    opts: &IntegratorOptions,
    stats: &mut StepStats,
) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let scale = |i: usize| opts.atol + opts.rtol * y[i].abs();
    let norm = |v: &[f64; N]| -> f64 {
        let s: f64 = (0..N).map(|i| (v[i] / scale(i)).powi(2)).sum();
        (s / N as f64).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = combine(y, h0, &[(1.0, f0)]);
    let f1 = rhs(t + h0, &y1);
    stats.evaluations += 1;
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}
