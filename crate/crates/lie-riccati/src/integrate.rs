//! Adaptive initial-value integration on R^n and on the projective line,
//! plus cumulative quadrature.
//!
//! The engine is an embedded Dormand-Prince 5(4) pair with FSAL, a
//! weighted-RMS error norm, and cubic Hermite dense output at the requested
//! grid nodes.  The step controller bounds not only the embedded local error
//! but also the dense-output deviation, so node values inherit the requested
//! tolerance no matter where the accepted steps fall.
//!
//! Riccati flows are integrated projectively: the x chart while the solution
//! is small, the reciprocal w = 1/x chart while it is large, switching with a
//! hysteresis band so poles are ordinary interior events.

use crate::coeff::RiccatiSystem;
use crate::error::{Error, Result};
use crate::projective::ProjectivePoint;

/// Default local-error tolerance for all integrations.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Default number of uniform output nodes.
pub const DEFAULT_NODES: usize = 1001;

/// Leave the x chart when |x| exceeds this; leave the w chart when |w|
/// exceeds its reciprocal.  The band keeps both charts well-conditioned and
/// prevents chatter at |x| = 1.
const CHART_UPPER: f64 = 1.05;
const CHART_LOWER: f64 = 0.95;

/// Steps smaller than this fraction of the requested span signal blow-up in
/// the current chart.
const UNDERFLOW_FRACTION: f64 = 1e-14;

/// Hard cap on attempted steps per integration, as a loop guard.
const MAX_ATTEMPTS: usize = 5_000_000;

/// Strictly increasing sample times; the output locations of every
/// integration and quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

impl TimeGrid {
    /// `n >= 2` equally spaced nodes from `start` to `stop`.
    pub fn uniform(start: f64, stop: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::parse(format!(
                "a time grid needs at least 2 nodes, got {n}"
            )));
        }
        if !(start < stop) || !start.is_finite() || !stop.is_finite() {
            return Err(Error::parse(format!(
                "invalid grid bounds [{start}, {stop}]"
            )));
        }
        let step = (stop - start) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| start + i as f64 * step).collect();
        // Land exactly on the endpoint regardless of rounding.
        nodes[n - 1] = stop;
        Ok(TimeGrid { nodes })
    }

    /// The default 1001-node uniform grid over `[start, stop]`.
    pub fn default_for(start: f64, stop: f64) -> Result<Self> {
        Self::uniform(start, stop, DEFAULT_NODES)
    }

    /// A grid from explicit node times, which must be finite and strictly
    /// increasing.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::parse(format!(
                "a time grid needs at least 2 nodes, got {}",
                nodes.len()
            )));
        }
        for w in nodes.windows(2) {
            if !w[0].is_finite() || !w[1].is_finite() || w[0] >= w[1] {
                return Err(Error::parse(
                    "grid nodes must be finite and strictly increasing".to_string(),
                ));
            }
        }
        Ok(TimeGrid { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    pub fn start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn stop(&self) -> f64 {
        *self.nodes.last().expect("grids have at least 2 nodes")
    }

    pub fn span(&self) -> f64 {
        self.stop() - self.start()
    }
}

/// A solution curve on the projective line, sampled at the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    states: Vec<ProjectivePoint>,
}

impl Trajectory {
    pub fn new(grid: TimeGrid, states: Vec<ProjectivePoint>) -> Result<Self> {
        if states.len() != grid.len() {
            return Err(Error::parse(format!(
                "trajectory has {} states for {} grid nodes",
                states.len(),
                grid.len()
            )));
        }
        Ok(Trajectory { grid, states })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn states(&self) -> &[ProjectivePoint] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &ProjectivePoint {
        &self.states[i]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Scalar values p/q per node; poles come out as +-infinity.
    pub fn real_values(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.to_real_extended()).collect()
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const A7: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// 5th-order weights coincide with the last stage row (FSAL).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];
// Weights of the classical 5th-order continuous extension's quartic term.
// Used only to estimate how far the cubic Hermite interpolant can stray
// inside a step; output values never use these.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// One accepted step, with everything dense output needs.
struct StepRecord<'a> {
    t0: f64,
    t1: f64,
    h: f64,
    y0: &'a [f64],
    y1: &'a [f64],
    f0: &'a [f64],
    f1: &'a [f64],
}

impl StepRecord<'_> {
    /// Cubic Hermite value at fraction `theta` of the step, written to `out`.
    fn interpolate(&self, theta: f64, out: &mut [f64]) {
        for i in 0..out.len() {
            let ydiff = self.y1[i] - self.y0[i];
            let bspl = self.h * self.f0[i] - ydiff;
            let cspl = ydiff - self.h * self.f1[i] - bspl;
            out[i] = self.y0[i] + theta * (ydiff + (1.0 - theta) * (bspl + theta * cspl));
        }
    }
}

/// Outcome of `adaptive_march`: where the march stopped, the state there, and
/// the last accepted step size (a good initial step for a continuation).
struct MarchEnd {
    t: f64,
    y: Vec<f64>,
    h_last: f64,
}

/// March the DP5(4) pair from `t_start` to `t_end`, invoking `on_accept`
/// after every accepted step.  `on_accept` returns false to stop early (the
/// chart-switching integrator uses this); `underflow_span` is the full
/// requested span, so restarts keep the original underflow threshold.
fn adaptive_march<F, G>(
    mut f: F,
    y_start: &[f64],
    t_start: f64,
    t_end: f64,
    underflow_span: f64,
    tol: f64,
    h_init: Option<f64>,
    mut on_accept: G,
) -> Result<MarchEnd>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    G: FnMut(&StepRecord) -> bool,
{
    debug_assert!(t_start < t_end);
    let dim = y_start.len();
    let mut y = y_start.to_vec();
    let mut t = t_start;
    let mut h = h_init
        .unwrap_or((t_end - t_start) / 100.0)
        .min(t_end - t_start);
    let h_min = UNDERFLOW_FRACTION * underflow_span;

    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; dim]);
    let mut y_stage = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    let mut err_vec = vec![0.0; dim];
    let mut dense_dev = vec![0.0; dim];

    f(t, &y, &mut k[0])?;
    let mut h_last = h;
    let mut attempts = 0usize;

    while t < t_end {
        attempts += 1;
        if attempts > MAX_ATTEMPTS {
            return Err(Error::StepSizeUnderflow { t, ordering: None });
        }
        if h < h_min {
            return Err(Error::StepSizeUnderflow { t, ordering: None });
        }
        let mut last = false;
        if t + h >= t_end {
            h = t_end - t;
            last = true;
        }

        // Stages 2..=7.  Stage 7 is f at the candidate endpoint (FSAL).
        let a_rows: [&[f64]; 6] = [&A2, &A3, &A4, &A5, &A6, &A7];
        let mut stage_failed = false;
        for (s, row) in a_rows.iter().enumerate() {
            for i in 0..dim {
                let mut acc = 0.0;
                for (j, aij) in row.iter().enumerate() {
                    acc += aij * k[j][i];
                }
                y_stage[i] = y[i] + h * acc;
            }
            let ts = t + C[s + 1] * h;
            match f(ts, &y_stage, &mut k[s + 1]) {
                Ok(()) => {}
                Err(Error::DomainExceeded { .. }) if !last => {
                    // A trial step may poke past the domain edge; shrink it.
                    stage_failed = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if stage_failed {
            h *= 0.5;
            continue;
        }
        // Stage 7 used row A7 = B5, so y_stage already holds the 5th-order
        // candidate; keep a copy before reusing the buffer.
        y_new.copy_from_slice(&y_stage);

        // Embedded error estimate and dense-output deviation estimate.
        for i in 0..dim {
            let mut e = 0.0;
            let mut d = 0.0;
            for s in 0..7 {
                e += (B5[s] - B4[s]) * k[s][i];
                d += D[s] * k[s][i];
            }
            err_vec[i] = h * e;
            // The cubic Hermite interpolant differs from the quartic
            // continuous extension by at most |h * d| / 16 inside the step;
            // weight it by 1/2 instead for an 8x safety margin so node
            // values stay within the requested tolerance.
            dense_dev[i] = h * d * 0.5;
        }
        let err = wrms(&err_vec, &y, &y_new, tol).max(wrms(&dense_dev, &y, &y_new, tol));

        if err <= 1.0 {
            let t1 = if last { t_end } else { t + h };
            let keep_going = {
                let rec = StepRecord {
                    t0: t,
                    t1,
                    h,
                    y0: &y,
                    y1: &y_new,
                    f0: &k[0],
                    f1: &k[6],
                };
                on_accept(&rec)
            };
            std::mem::swap(&mut y, &mut y_new);
            let (head, tail) = k.split_at_mut(6);
            std::mem::swap(&mut head[0], &mut tail[0]);
            t = t1;
            h_last = h;
            h *= step_factor(err);
            if !keep_going {
                break;
            }
        } else {
            h *= step_factor(err);
        }
    }

    Ok(MarchEnd { t, y, h_last })
}

/// Weighted RMS norm with equal absolute and relative weights `tol`.
fn wrms(e: &[f64], y0: &[f64], y1: &[f64], tol: f64) -> f64 {
    let mut sum = 0.0;
    for i in 0..e.len() {
        let scale = tol + tol * y0[i].abs().max(y1[i].abs());
        let r = e[i] / scale;
        sum += r * r;
    }
    (sum / e.len() as f64).sqrt()
}

/// Standard PI-free controller: factor 0.9 * err^(-1/5), clamped to [0.2, 5].
/// NaN errors (overflowed stages) fall to the minimum factor.
fn step_factor(err: f64) -> f64 {
    if err.is_nan() || err.is_infinite() {
        return 0.2;
    }
    if err == 0.0 {
        return 5.0;
    }
    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
}

/// Integrate dy/dt = f(t, y) from the grid start, returning the state at
/// every grid node.  Dense output is cubic Hermite over accepted steps; the
/// controller also bounds the interpolant's deviation, so node values meet
/// `tol`.  Deterministic: identical inputs give bit-identical output.
pub fn integrate_ivp<F>(f: F, y0: &[f64], grid: &TimeGrid, tol: f64) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    if !(tol > 0.0) {
        return Err(Error::parse(format!("tolerance must be positive, got {tol}")));
    }
    let nodes = grid.nodes();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(nodes.len());
    out.push(y0.to_vec());
    let mut next = 1usize;
    let mut buf = vec![0.0; y0.len()];

    let end = adaptive_march(
        f,
        y0,
        grid.start(),
        grid.stop(),
        grid.span(),
        tol,
        None,
        |rec| {
            while next < nodes.len() && nodes[next] <= rec.t1 {
                let theta = (nodes[next] - rec.t0) / rec.h;
                rec.interpolate(theta, &mut buf);
                out.push(buf.clone());
                next += 1;
            }
            true
        },
    )?;

    // The march lands exactly on the stop node, so this only guards against
    // pathological rounding.
    while out.len() < nodes.len() {
        out.push(end.y.clone());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Chart {
    /// State is x itself.
    X,
    /// State is w = 1/x.
    W,
}

/// A projective integration together with event counts.
#[derive(Debug, Clone)]
pub struct ProjectiveRun {
    pub trajectory: Trajectory,
    /// Number of passes through infinity (sign changes of w in the w chart).
    pub pole_crossings: usize,
    /// Number of chart switches taken.
    pub chart_switches: usize,
}

/// Integrate the Riccati flow of `sys` from `x0` across the grid on the
/// projective line.  Uses the x chart while |x| is small and the w = 1/x
/// chart while |x| is large, switching inside the hysteresis band, so the
/// trajectory passes through infinity without incident.
pub fn integrate_riccati_projective(
    sys: &RiccatiSystem,
    x0: &ProjectivePoint,
    grid: &TimeGrid,
    tol: f64,
) -> Result<Trajectory> {
    Ok(integrate_riccati_projective_detailed(sys, x0, grid, tol)?.trajectory)
}

/// As `integrate_riccati_projective`, but also reports pole crossings and
/// chart switches (the spectral shooting count uses the former).
pub fn integrate_riccati_projective_detailed(
    sys: &RiccatiSystem,
    x0: &ProjectivePoint,
    grid: &TimeGrid,
    tol: f64,
) -> Result<ProjectiveRun> {
    if !(tol > 0.0) {
        return Err(Error::parse(format!("tolerance must be positive, got {tol}")));
    }
    if grid.start() < sys.t_min || grid.stop() > sys.t_max {
        return Err(Error::DomainExceeded { t: grid.start().min(grid.stop()) });
    }
    let x0c = x0.canonicalize();
    if !x0c.is_valid() {
        return Err(Error::parse("initial point must be a valid projective point"));
    }

    let nodes = grid.nodes();
    let mut states: Vec<ProjectivePoint> = Vec::with_capacity(nodes.len());
    let (mut chart, mut state) = if x0c.p.abs() <= x0c.q.abs() {
        (Chart::X, x0c.p / x0c.q)
    } else {
        (Chart::W, x0c.q / x0c.p)
    };
    states.push(point_in_chart(chart, state));

    let mut next = 1usize;
    let mut poles = 0usize;
    let mut switches = 0usize;
    let mut t = grid.start();
    let mut h_carry: Option<f64> = None;
    let span = grid.span();

    while t < grid.stop() {
        let current_chart = chart;
        let mut switch_pending = false;
        let end = adaptive_march(
            |tt: f64, y: &[f64], dy: &mut [f64]| {
                let [a0, a1, a2] = sys.eval(tt)?;
                dy[0] = match current_chart {
                    Chart::X => a0 + y[0] * (a1 + a2 * y[0]),
                    Chart::W => -(a2 + y[0] * (a1 + a0 * y[0])),
                };
                Ok(())
            },
            &[state],
            t,
            grid.stop(),
            span,
            tol,
            h_carry,
            |rec| {
                let mut buf = [0.0];
                while next < nodes.len() && nodes[next] <= rec.t1 {
                    let theta = (nodes[next] - rec.t0) / rec.h;
                    rec.interpolate(theta, &mut buf);
                    states.push(point_in_chart(current_chart, buf[0]));
                    next += 1;
                }
                if current_chart == Chart::W && rec.y0[0] * rec.y1[0] < 0.0 {
                    poles += 1;
                }
                let leave = match current_chart {
                    Chart::X => rec.y1[0].abs() > CHART_UPPER,
                    Chart::W => rec.y1[0].abs() > 1.0 / CHART_LOWER,
                };
                if leave {
                    switch_pending = true;
                }
                !leave
            },
        )?;
        t = end.t;
        state = end.y[0];
        h_carry = Some(end.h_last);
        if switch_pending && t < grid.stop() {
            state = 1.0 / state;
            chart = match chart {
                Chart::X => Chart::W,
                Chart::W => Chart::X,
            };
            switches += 1;
        }
    }

    while states.len() < nodes.len() {
        states.push(point_in_chart(chart, state));
    }
    Ok(ProjectiveRun {
        trajectory: Trajectory::new(grid.clone(), states)?,
        pole_crossings: poles,
        chart_switches: switches,
    })
}

fn point_in_chart(chart: Chart, value: f64) -> ProjectivePoint {
    match chart {
        Chart::X => ProjectivePoint::new(value, 1.0).canonicalize(),
        Chart::W => ProjectivePoint::new(1.0, value).canonicalize(),
    }
}

/// How far a sampled trajectory is from solving a Riccati system, node by
/// node, evaluated pole-transparently: nodes whose five-point stencil window
/// stays moderate in the x chart are differenced there against
/// a0 + a1 x + a2 x^2; windows that stay moderate only in the w = 1/x chart
/// (near poles) are differenced against w' = -(a0 w^2 + a1 w + a2).  Nodes
/// whose window swings wildly through both charts cannot be differenced and
/// come back as NaN.
pub fn riccati_residual(sys: &RiccatiSystem, traj: &Trajectory) -> Result<Vec<f64>> {
    /// Chart values beyond this bound are too steep to difference reliably.
    const CHART_BOUND: f64 = 4.0;
    let n = traj.len();
    let t = traj.grid().nodes();
    let coeffs: Vec<[f64; 3]> = t.iter().map(|&ti| sys.eval(ti)).collect::<Result<_>>()?;
    let x_vals: Vec<f64> = traj.states().iter().map(|s| s.p / s.q).collect();
    let w_vals: Vec<f64> = traj.states().iter().map(|s| s.q / s.p).collect();
    let dx = derivative_samples(t, &x_vals);
    let dw = derivative_samples(t, &w_vals);
    let window = |i: usize| -> (usize, usize) {
        if n >= 5 {
            if i <= 1 {
                (0, 5)
            } else if i >= n - 2 {
                (n - 5, n)
            } else {
                (i - 2, i + 3)
            }
        } else {
            (0, n)
        }
    };
    Ok((0..n)
        .map(|i| {
            let (lo, hi) = window(i);
            let x_ok = x_vals[lo..hi].iter().all(|v| v.abs() <= CHART_BOUND);
            let w_ok = w_vals[lo..hi].iter().all(|v| v.abs() <= CHART_BOUND);
            let [a0, a1, a2] = coeffs[i];
            let rx = if x_ok {
                let x = x_vals[i];
                (dx[i] - (a0 + x * (a1 + a2 * x))).abs()
            } else {
                f64::INFINITY
            };
            let rw = if w_ok {
                let w = w_vals[i];
                (dw[i] + (a2 + w * (a1 + a0 * w))).abs()
            } else {
                f64::INFINITY
            };
            let r = rx.min(rw);
            if r.is_finite() {
                r
            } else {
                f64::NAN
            }
        })
        .collect())
}

/// The largest entry of [`riccati_residual`], ignoring nodes that could not
/// be differenced; fails if no node could be.
pub fn max_riccati_residual(sys: &RiccatiSystem, traj: &Trajectory) -> Result<f64> {
    let res = riccati_residual(sys, traj)?;
    let max = res
        .iter()
        .filter(|r| !r.is_nan())
        .fold(f64::NEG_INFINITY, |m, &r| m.max(r));
    if max.is_finite() {
        Ok(max)
    } else {
        Err(Error::parse(
            "no node of the trajectory could be differenced in either chart",
        ))
    }
}

/// Derivative estimates for sampled values at every grid node.
///
/// Uniform grids with at least five nodes get fourth-order five-point
/// stencils (centered in the interior, offset/one-sided near the ends),
/// exact for polynomials up to degree four.  Non-uniform or very short
/// grids fall back to second-order three-point Lagrange formulas.
pub fn derivative_samples(t: &[f64], values: &[f64]) -> Vec<f64> {
    assert_eq!(
        t.len(),
        values.len(),
        "one sample per node is required to differentiate"
    );
    let n = t.len();
    assert!(n >= 2, "need at least two samples to differentiate");
    if n == 2 {
        let slope = (values[1] - values[0]) / (t[1] - t[0]);
        return vec![slope; 2];
    }
    let h = t[1] - t[0];
    let uniform = n >= 5
        && t.windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-8 * h.abs());
    if uniform {
        let f = values;
        return (0..n)
            .map(|i| {
                let s = if i == 0 {
                    // forward stencil on nodes 0..5
                    (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / 12.0
                } else if i == 1 {
                    (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / 12.0
                } else if i == n - 2 {
                    (-f[n - 5] + 6.0 * f[n - 4] - 18.0 * f[n - 3] + 10.0 * f[n - 2]
                        + 3.0 * f[n - 1])
                        / 12.0
                } else if i == n - 1 {
                    (3.0 * f[n - 5] - 16.0 * f[n - 4] + 36.0 * f[n - 3] - 48.0 * f[n - 2]
                        + 25.0 * f[n - 1])
                        / 12.0
                } else {
                    (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / 12.0
                };
                s / h
            })
            .collect();
    }
    // Three-point Lagrange derivative around each node (second order).
    (0..n)
        .map(|i| {
            let j = i.clamp(1, n - 2);
            let (ta, tb, tc) = (t[j - 1], t[j], t[j + 1]);
            let (fa, fb, fc) = (values[j - 1], values[j], values[j + 1]);
            let x = t[i];
            fa * (2.0 * x - tb - tc) / ((ta - tb) * (ta - tc))
                + fb * (2.0 * x - ta - tc) / ((tb - ta) * (tb - tc))
                + fc * (2.0 * x - ta - tb) / ((tc - ta) * (tc - tb))
        })
        .collect()
}

/// Cumulative integral of samples `f` along the grid: out[i] approximates
/// the integral from the first node to node i, with out[0] = 0.
///
/// Uniform panel pairs use composite Simpson split into per-node increments;
/// a trailing unpaired uniform panel uses the right-hand three-point rule;
/// panels with unequal neighbors fall back to the trapezoid rule.  Exact on
/// quadratics over uniform grids.
pub fn cumulative_quadrature(grid: &TimeGrid, f: &[f64]) -> Vec<f64> {
    let t = grid.nodes();
    assert_eq!(t.len(), f.len(), "one sample per grid node");
    let n = t.len();
    let mut out = vec![0.0; n];
    let mut i = 0usize;
    while i + 1 < n {
        let h1 = t[i + 1] - t[i];
        if i + 2 < n {
            let h2 = t[i + 2] - t[i + 1];
            if uniform_pair(h1, h2) {
                let h = 0.5 * (h1 + h2);
                out[i + 1] = out[i] + h / 12.0 * (5.0 * f[i] + 8.0 * f[i + 1] - f[i + 2]);
                out[i + 2] = out[i] + h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
                i += 2;
                continue;
            }
        } else if i >= 1 {
            let h0 = t[i] - t[i - 1];
            if uniform_pair(h0, h1) {
                out[i + 1] =
                    out[i] + h1 / 12.0 * (-f[i - 1] + 8.0 * f[i] + 5.0 * f[i + 1]);
                i += 1;
                continue;
            }
        }
        out[i + 1] = out[i] + 0.5 * h1 * (f[i] + f[i + 1]);
        i += 1;
    }
    out
}

fn uniform_pair(h1: f64, h2: f64) -> bool {
    (h2 - h1).abs() <= 1e-9 * h1.abs().max(h2.abs())
}
