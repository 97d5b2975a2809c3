//! The bridge between second-order linear ODEs and Riccati equations.
//!
//! A linear equation u'' + b(t) u' + c(t) u = 0 maps to the Riccati equation
//! x' = -c - b x - x^2 under the logarithmic derivative x = u'/u
//! ([`riccati_from_linear`], [`log_derivative`]); zeros of u are poles of x,
//! which the homogeneous representation (u', u) absorbs without incident.
//! The inverse direction rebuilds u from a pole-free x by one quadrature
//! ([`reconstruct_u`]).  Two linear solutions project onto the same Riccati
//! solution exactly when their initial data are proportional
//! ([`projection_equivalence`]).

use crate::coeff::{CoefficientFn, RiccatiSystem};
use crate::error::{Error, Result};
use crate::integrate::{cumulative_quadrature, integrate_ivp, TimeGrid, Trajectory};
use crate::projective::ProjectivePoint;

/// A linear second-order equation u'' + b(t) u' + c(t) u = 0 on a time
/// interval.
#[derive(Debug, Clone)]
pub struct LinearSecondOrder {
    pub b: CoefficientFn,
    pub c: CoefficientFn,
    pub t_min: f64,
    pub t_max: f64,
}

impl LinearSecondOrder {
    /// Validate the domain and that both coefficients cover it.
    pub fn new(b: CoefficientFn, c: CoefficientFn, t_min: f64, t_max: f64) -> Result<Self> {
        if !(t_min < t_max) || !t_min.is_finite() || !t_max.is_finite() {
            return Err(Error::parse(format!("empty domain [{t_min}, {t_max}]")));
        }
        for (name, coeff) in [("b", &b), ("c", &c)] {
            if !coeff.covers(t_min, t_max) {
                return Err(Error::parse(format!(
                    "{name} is not defined on all of [{t_min}, {t_max}]"
                )));
            }
        }
        Ok(LinearSecondOrder { b, c, t_min, t_max })
    }

    /// Both coefficients at time t.
    pub fn eval(&self, t: f64) -> Result<[f64; 2]> {
        Ok([self.b.eval(t)?, self.c.eval(t)?])
    }
}

/// The Riccati equation satisfied by the logarithmic derivative x = u'/u of
/// solutions of `lin`: coefficients (a0, a1, a2) = (-c, -b, -1).
pub fn riccati_from_linear(lin: &LinearSecondOrder) -> RiccatiSystem {
    RiccatiSystem::new(
        lin.c.negate(),
        lin.b.negate(),
        CoefficientFn::constant(-1.0),
        lin.t_min,
        lin.t_max,
    )
    .expect("the linear equation's domain is already validated")
}

/// A solution of a linear second-order equation sampled on a grid together
/// with its derivative, the form needed to project it onto the Riccati
/// equation.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution {
    grid: TimeGrid,
    u: Vec<f64>,
    du: Vec<f64>,
}

impl LinearSolution {
    /// Wrap already-sampled values; both sample lists must match the grid.
    pub fn from_samples(grid: TimeGrid, u: Vec<f64>, du: Vec<f64>) -> Result<Self> {
        if u.len() != grid.len() || du.len() != grid.len() {
            return Err(Error::parse(format!(
                "{} value and {} derivative samples for {} grid nodes",
                u.len(),
                du.len(),
                grid.len()
            )));
        }
        Ok(LinearSolution { grid, u, du })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn du(&self) -> &[f64] {
        &self.du
    }
}

/// Integrate the linear equation as the first-order system (u, u')' =
/// (u', -b u' - c u) with the shared adaptive integrator, sampling both
/// components on the grid.
pub fn integrate_linear(
    lin: &LinearSecondOrder,
    initial: (f64, f64),
    grid: &TimeGrid,
    tol: f64,
) -> Result<LinearSolution> {
    if grid.start() < lin.t_min || grid.stop() > lin.t_max {
        return Err(Error::DomainExceeded {
            t: if grid.start() < lin.t_min {
                grid.start()
            } else {
                grid.stop()
            },
        });
    }
    let f = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let [b, c] = lin.eval(t)?;
        dy[0] = y[1];
        dy[1] = -b * y[1] - c * y[0];
        Ok(())
    };
    let rows = integrate_ivp(f, &[initial.0, initial.1], grid, tol)?;
    let u = rows.iter().map(|r| r[0]).collect();
    let du = rows.iter().map(|r| r[1]).collect();
    LinearSolution::from_samples(grid.clone(), u, du)
}

/// Project a linear solution onto the Riccati equation: x = u'/u in
/// homogeneous form (u', u), so zeros of u become poles of x with no special
/// handling.  A node where u and u' both vanish cannot belong to a nonzero
/// solution of a linear equation and is rejected as `BothZero`.
pub fn log_derivative(sol: &LinearSolution) -> Result<Trajectory> {
    let states = (0..sol.grid.len())
        .map(|i| {
            let point = ProjectivePoint::new(sol.du[i], sol.u[i]);
            if !point.is_valid() {
                return Err(Error::BothZero { node: i });
            }
            Ok(point.canonicalize())
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(sol.grid.clone(), states)
}

/// Rebuild a linear solution from a pole-free Riccati solution by one
/// quadrature: u = u0 exp(integral of x), with u' = x u so that
/// [`log_derivative`] inverts it exactly.  Trajectories that touch infinity
/// must be segmented by the caller first.
pub fn reconstruct_u(x: &Trajectory, u0: f64) -> Result<LinearSolution> {
    if u0 == 0.0 || !u0.is_finite() {
        return Err(Error::wrong_initial_data(
            "reconstruction needs a nonzero finite u(t0)",
        ));
    }
    for (i, s) in x.states().iter().enumerate() {
        if s.is_infinite() {
            return Err(Error::PoleOnPath { node: i });
        }
    }
    let values = x.real_values();
    let integral = cumulative_quadrature(x.grid(), &values);
    let u: Vec<f64> = integral.iter().map(|v| u0 * v.exp()).collect();
    let du: Vec<f64> = values.iter().zip(&u).map(|(x, u)| x * u).collect();
    LinearSolution::from_samples(x.grid().clone(), u, du)
}

/// Whether two initial data pairs (u(t0), u'(t0)) of a linear equation
/// project onto the same Riccati solution, i.e. are proportional: the
/// normalized 2x2 determinant of the pairs vanishes within 1e-12.
pub fn projection_equivalence(u1: (f64, f64), u2: (f64, f64)) -> Result<bool> {
    for pair in [u1, u2] {
        let norm = pair.0.hypot(pair.1);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroData);
        }
    }
    let det = u1.0 * u2.1 - u1.1 * u2.0;
    Ok(det.abs() <= 1e-12 * u1.0.hypot(u1.1) * u2.0.hypot(u2.1))
}
