//! The quantum harmonic oscillator driven entirely through its Riccati
//! equation.
//!
//! The eigenproblem -psi'' + xi^2 psi = lambda psi maps under z = psi'/psi to
//! the Riccati flow z' = -z^2 + (xi^2 - lambda).  For lambda = 2n+1 the flow
//! has closed-form factorization coordinates built from Hermite polynomials
//! ([`g0_closed_form`], [`g1_g2_closed_form`] for even n, [`odd_case_coords`]
//! for odd n, where the pole of z at the origin forces the reciprocal chart).
//! Away from the quantized values the flow ends up on the growing branch
//! z -> +xi, which makes a sharp shooting discriminator: [`spectrum_scan`]
//! recovers the spectrum and node counts by counting poles of the projective
//! flow and bisecting the tail sign.  [`kummer_map_check`] verifies the
//! change of variables y = xi^2, z = 2 xi v - xi that carries the problem to
//! the confluent hypergeometric equation y W'' + (b - y) W' - a W = 0 with
//! a = (1 - lambda)/4, b = 1/2.
//!
//! Exponentials of xi^2 never appear directly: every Hermite-exponential
//! expression is assembled in log space.

use crate::coeff::{CoefficientFn, Interpolation, RiccatiSystem};
use crate::error::{Error, Result};
use crate::integrate::{
    cumulative_quadrature, integrate_ivp, integrate_riccati_projective_detailed,
    max_riccati_residual, TimeGrid, Trajectory,
};
use crate::projective::ProjectivePoint;

/// Coefficient domain handed to [`oscillator_riccati`]; wide enough for any
/// reasonable shooting range.
const XI_DOMAIN: f64 = 50.0;

/// Integration tolerance used inside the spectrum shooting runs.
const SHOOT_TOL: f64 = 1e-10;

/// Relative distance to a root (|f / f'|) below which closed forms refuse to
/// divide.
const ROOT_PROXIMITY: f64 = 1e-8;

/// A physicists' Hermite polynomial value with its derivative, produced by
/// upward recurrence: H_0 = 1, H_1 = 2 xi, H_n = 2 xi H_{n-1} - 2(n-1)
/// H_{n-2}, and H_n' = 2 n H_{n-1}.
#[derive(Debug, Clone, Copy)]
pub struct HermiteEval {
    pub n: usize,
    pub value: f64,
    pub derivative: f64,
}

/// Evaluate H_n and H_n' at xi by upward recurrence.
pub fn hermite(n: usize, xi: f64) -> HermiteEval {
    let (mut prev, mut curr) = (1.0_f64, 2.0 * xi);
    if n == 0 {
        return HermiteEval {
            n,
            value: 1.0,
            derivative: 0.0,
        };
    }
    for k in 2..=n {
        let next = 2.0 * xi * curr - 2.0 * (k as f64 - 1.0) * prev;
        prev = curr;
        curr = next;
    }
    HermiteEval {
        n,
        value: curr,
        derivative: 2.0 * n as f64 * prev,
    }
}

/// H_n(0) in exact integer arithmetic: H_0(0) = 1, H_1(0) = 0,
/// H_n(0) = -2 (n-1) H_{n-2}(0).
pub fn hermite_at_zero(n: usize) -> Result<i128> {
    let (mut prev, mut curr) = (1_i128, 0_i128);
    if n == 0 {
        return Ok(1);
    }
    for k in 2..=n {
        let next = (-2 * (k as i128 - 1))
            .checked_mul(prev)
            .ok_or_else(|| Error::parse(format!("H_{n}(0) overflows 128-bit integers")))?;
        prev = curr;
        curr = next;
    }
    Ok(curr)
}

/// All roots of H_n inside [lo, hi], found by sign-change scan plus
/// bisection.  Used to keep evaluation grids away from the poles of the
/// closed forms.
pub fn hermite_zeros(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut zeros = Vec::new();
    let steps = 2000.max(200 * n);
    let h = (hi - lo) / steps as f64;
    let mut prev_x = lo;
    let mut prev_v = hermite(n, lo).value;
    for i in 1..=steps {
        let x = lo + i as f64 * h;
        let v = hermite(n, x).value;
        if prev_v == 0.0 {
            zeros.push(prev_x);
        } else if prev_v * v < 0.0 {
            let (mut a, mut b) = (prev_x, x);
            let mut fa = prev_v;
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                let fm = hermite(n, m).value;
                if fa * fm <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            zeros.push(0.5 * (a + b));
        }
        prev_x = x;
        prev_v = v;
    }
    zeros
}

/// The Riccati equation of the oscillator's logarithmic derivative:
/// z' = -z^2 + (xi^2 - lambda), i.e. coefficients (xi^2 - lambda, 0, -1).
pub fn oscillator_riccati(lambda: f64) -> RiccatiSystem {
    RiccatiSystem::new(
        CoefficientFn::polynomial(vec![-lambda, 0.0, 1.0]),
        CoefficientFn::constant(0.0),
        CoefficientFn::constant(-1.0),
        -XI_DOMAIN,
        XI_DOMAIN,
    )
    .expect("polynomial coefficients cover any domain")
}

/// Exact integer n! / (n/2)! style rising products, with overflow reported.
fn integer_product(lo: u64, hi: u64) -> Result<i128> {
    let mut acc = 1_i128;
    for j in lo..=hi {
        acc = acc
            .checked_mul(j as i128)
            .ok_or_else(|| Error::parse("factorial ratio overflows 128-bit integers"))?;
    }
    Ok(acc)
}

/// The even-n normalization constant k1 = [n! / ((n/2)!)]^2 = H_n(0)^2,
/// exact.
pub fn k1_even(n: usize) -> Result<i128> {
    let half = (n / 2) as u64;
    let ratio = integer_product(half + 1, n as u64)?;
    ratio
        .checked_mul(ratio)
        .ok_or_else(|| Error::parse("k1 overflows 128-bit integers"))
}

/// The odd-n constant k1 = H_n'(0) = (-1)^((n-1)/2) 2 n! / (((n-1)/2)!),
/// exact and signed.
pub fn k1_odd(n: usize) -> Result<i128> {
    let half = ((n - 1) / 2) as u64;
    let ratio = integer_product(half + 1, n as u64)?;
    let signed = if (n - 1) / 2 % 2 == 1 { -ratio } else { ratio };
    signed
        .checked_mul(2)
        .ok_or_else(|| Error::parse("k1 overflows 128-bit integers"))
}

/// The first factorization coordinate of the even-n bound state:
/// g0 = H_n'/H_n - xi, the logarithmic derivative of the eigenfunction.
/// Vanishes at 0 (H_n' is odd) and satisfies g0' = xi^2 - (2n+1) - g0^2.
///
/// Near a root of H_n (estimated distance |H/H'| below 1e-8) the value is a
/// pole and `HermiteZero` reports the root estimate instead; the projective
/// integrator is the right tool there.
pub fn g0_closed_form(n: usize, xi: f64) -> Result<f64> {
    if n % 2 != 0 {
        return Err(Error::parse(format!(
            "g0 closed form is the even-parity branch, got n = {n}"
        )));
    }
    let h = hermite(n, xi);
    if h.value.abs() <= ROOT_PROXIMITY * h.derivative.abs() {
        return Err(Error::HermiteZero {
            xi: xi - h.value / h.derivative,
        });
    }
    Ok(h.derivative / h.value - xi)
}

/// Closed-form coordinate samples for one parity branch, anchored to vanish
/// at xi = 0, plus the exact integer constant entering the logarithms.
#[derive(Debug, Clone)]
pub struct ClosedFormCoords {
    /// First coordinate; for the even branch this duplicates
    /// [`g0_closed_form`] at the nodes.
    pub g0: Vec<f64>,
    /// Log-space coordinate, g1(0) = 0.
    pub g1: Vec<f64>,
    /// Quadrature coordinate, g2(0) = 0.
    pub g2: Vec<f64>,
    /// Exact integer constant: H_n(0)^2 for even n, H_n'(0) for odd n.
    pub k1: i128,
    /// Anchor constant of g2 under the vanish-at-zero convention.
    pub k2: f64,
}

/// Even-n closed forms on a grid starting at 0:
/// g1 = log k1 - 2 log |H_n| + xi^2 (so e^{g1} = k1 e^{xi^2} / H_n^2 and
/// g1(0) = 0 since k1 = H_n(0)^2), and g2 = -integral of e^{g1} from 0,
/// assembled in log space throughout.  The grid must stay clear of the roots
/// of H_n, where g1 has a logarithmic singularity and the g2 integrand a
/// double pole.
pub fn g1_g2_closed_form(n: usize, grid: &TimeGrid) -> Result<ClosedFormCoords> {
    if n % 2 != 0 {
        return Err(Error::parse(format!(
            "the log/quadrature closed forms split by parity; use the odd branch for n = {n}"
        )));
    }
    if grid.start() != 0.0 {
        return Err(Error::parse(
            "closed-form coordinates are anchored at 0; the grid must start there",
        ));
    }
    let k1 = k1_even(n)?;
    let log_k1 = (k1 as f64).ln();
    let mut g0 = Vec::with_capacity(grid.len());
    let mut g1 = Vec::with_capacity(grid.len());
    for &xi in grid.nodes() {
        let h = hermite(n, xi);
        if h.value.abs() <= ROOT_PROXIMITY * h.derivative.abs() {
            return Err(Error::HermiteZero {
                xi: xi - h.value / h.derivative,
            });
        }
        g0.push(h.derivative / h.value - xi);
        g1.push(log_k1 - 2.0 * h.value.abs().ln() + xi * xi);
    }
    let integrand: Vec<f64> = g1.iter().map(|v| -v.exp()).collect();
    let g2 = cumulative_quadrature(grid, &integrand);
    Ok(ClosedFormCoords {
        g0,
        g1,
        g2,
        k1,
        k2: 0.0,
    })
}

/// Odd-n closed forms on a grid starting at 0, expressed in the reciprocal
/// chart v = 1/z (z has a pole at the origin for odd parity, so the v flow
/// is the one with zero initial data):
///
/// ```text
/// g0 = H_n / (H_n' - xi H_n)
/// g1 = xi^2 + 2 log |k1| - 2 log |H_n' - xi H_n|      (g1(0) = 0)
/// g2 = integral of (lambda - xi^2) e^{g1} from 0      (lambda = 2n+1)
/// ```
///
/// These integrate the system g0' = 1 - (xi^2 - lambda) g0^2,
/// g1' = -2 (xi^2 - lambda) g0, g2' = -(xi^2 - lambda) e^{g1}.  Zeros of the
/// denominator H_n' - xi H_n are poles of g0 and are refused as
/// `DenominatorZero` with a root estimate.
pub fn odd_case_coords(n: usize, grid: &TimeGrid) -> Result<ClosedFormCoords> {
    if n % 2 != 1 {
        return Err(Error::parse(format!(
            "the reciprocal-chart closed forms are the odd-parity branch, got n = {n}"
        )));
    }
    if grid.start() != 0.0 {
        return Err(Error::parse(
            "closed-form coordinates are anchored at 0; the grid must start there",
        ));
    }
    let lambda = (2 * n + 1) as f64;
    let k1 = k1_odd(n)?;
    let log_k1 = (k1 as f64).abs().ln();
    let mut g0 = Vec::with_capacity(grid.len());
    let mut g1 = Vec::with_capacity(grid.len());
    for &xi in grid.nodes() {
        let h = hermite(n, xi);
        let den = h.derivative - xi * h.value;
        // den' = xi H_n' - lambda H_n by the Hermite equation.
        let den_slope = xi * h.derivative - lambda * h.value;
        if den.abs() <= ROOT_PROXIMITY * den_slope.abs() {
            return Err(Error::DenominatorZero {
                xi: xi - den / den_slope,
            });
        }
        g0.push(h.value / den);
        g1.push(xi * xi + 2.0 * log_k1 - 2.0 * den.abs().ln());
    }
    let integrand: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(&g1)
        .map(|(&xi, v)| (lambda - xi * xi) * v.exp())
        .collect();
    let g2 = cumulative_quadrature(grid, &integrand);
    Ok(ClosedFormCoords {
        g0,
        g1,
        g2,
        k1,
        k2: 0.0,
    })
}

/// Unnormalized eigenfunction samples psi = H_n(xi) e^{-xi^2/2}.
pub fn eigenfunction(n: usize, grid: &TimeGrid) -> Vec<f64> {
    grid.nodes()
        .iter()
        .map(|&xi| hermite(n, xi).value * (-xi * xi / 2.0).exp())
        .collect()
}

/// Derivative samples psi' = (H_n' - xi H_n) e^{-xi^2/2} matching
/// [`eigenfunction`].
pub fn eigenfunction_derivative(n: usize, grid: &TimeGrid) -> Vec<f64> {
    grid.nodes()
        .iter()
        .map(|&xi| {
            let h = hermite(n, xi);
            (h.derivative - xi * h.value) * (-xi * xi / 2.0).exp()
        })
        .collect()
}

/// Eigenvalues found by [`spectrum_scan`]: (lambda, full-line node count)
/// pairs sorted by lambda, with the scan interval and the bisection width
/// achieved.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub eigenvalues: Vec<(f64, usize)>,
    pub interval: (f64, f64),
    pub tolerance: f64,
}

/// One shooting run: integrate the projective flow of
/// `oscillator_riccati(lambda)` from the parity-appropriate initial state
/// and fold the outcome into the step function 2 * (pole count) + (tail
/// sign), which increases through each eigenvalue.
fn shoot(lambda: f64, xi_max: f64, odd_parity: bool) -> Result<usize> {
    let sys = oscillator_riccati(lambda);
    let grid = TimeGrid::uniform(0.0, xi_max, 65)?;
    let start = if odd_parity {
        // z = psi'/psi has a pole at 0 for odd states; start at infinity,
        // i.e. with v = 1/z = 0.
        ProjectivePoint::infinity()
    } else {
        ProjectivePoint::from_real(0.0)
    };
    let run = integrate_riccati_projective_detailed(&sys, &start, &grid, SHOOT_TOL)?;
    let z_end = run
        .trajectory
        .state(run.trajectory.len() - 1)
        .to_real_extended();
    // Bound-like tails hug z = -xi; everything else has escaped to the
    // growing branch z = +xi by xi_max.
    let tail = usize::from(z_end + xi_max < 0.0);
    Ok(2 * run.pole_crossings + tail)
}

/// Scan [lambda_lo, lambda_hi] for oscillator eigenvalues by parity-split
/// shooting: each unit jump of the shooting step function brackets one
/// eigenvalue, located by bisection to width `tol`.  Node counts come from
/// the pole count of the projective flow (poles of z on (0, xi_max) are
/// interior zeros of psi; odd states add their zero at the origin).
///
/// Fails with `NoSignChange` when the interval contains no eigenvalue of
/// either parity.
pub fn spectrum_scan(
    lambda_lo: f64,
    lambda_hi: f64,
    xi_max: f64,
    tol: f64,
) -> Result<SpectralResult> {
    if !(lambda_lo < lambda_hi) || !lambda_lo.is_finite() || !lambda_hi.is_finite() {
        return Err(Error::parse(format!(
            "empty scan interval [{lambda_lo}, {lambda_hi}]"
        )));
    }
    if !(tol > 0.0) || !(xi_max > 0.0) {
        return Err(Error::parse(
            "scan tolerance and xi_max must be positive",
        ));
    }
    let mut eigenvalues: Vec<(f64, usize)> = Vec::new();
    for odd_parity in [false, true] {
        let f_lo = shoot(lambda_lo, xi_max, odd_parity)?;
        let f_hi = shoot(lambda_hi, xi_max, odd_parity)?;
        // Odd thresholds T with f_lo < T <= f_hi each bracket the m-th
        // eigenvalue of this parity, m = (T-1)/2.
        let mut threshold = if f_lo % 2 == 0 { f_lo + 1 } else { f_lo + 2 };
        while threshold <= f_hi {
            let (mut lo, mut hi) = (lambda_lo, lambda_hi);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if shoot(mid, xi_max, odd_parity)? >= threshold {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let m = (threshold - 1) / 2;
            let node_count = 2 * m + usize::from(odd_parity);
            eigenvalues.push((0.5 * (lo + hi), node_count));
            threshold += 2;
        }
    }
    if eigenvalues.is_empty() {
        return Err(Error::NoSignChange {
            lo: lambda_lo,
            hi: lambda_hi,
        });
    }
    eigenvalues.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(SpectralResult {
        eigenvalues,
        interval: (lambda_lo, lambda_hi),
        tolerance: tol,
    })
}

/// Verify the change of variables tying the oscillator to the confluent
/// hypergeometric equation y W'' + (b - y) W' - a W = 0 with a =
/// (1 - lambda)/4, b = 1/2:
///
/// 1. integrate W on the y grid, started just off the regular singular
///    point y = 0 with the power-series solution truncated at order 6;
/// 2. check v = W'/W against its Riccati equation
///    v' = -v^2 + (1 - b/y) v + a/y;
/// 3. map back through z = 2 xi v - xi, y = xi^2, and check z against
///    z' = -z^2 + (xi^2 - lambda).
///
/// Returns the larger of the two residuals.  The grid must start at some
/// y > 0 (`SeriesStartFailure` otherwise); both checks are pole-transparent,
/// so polynomial W with interior zeros (quantized lambda) pass through.
/// The z check runs on a uniform xi grid of the same size spanning the same
/// range (with its own W integration on the matching y nodes), because
/// accurate derivative stencils need uniform spacing in the variable being
/// differentiated.
pub fn kummer_map_check(lambda: f64, y_grid: &TimeGrid) -> Result<f64> {
    let y0 = y_grid.start();
    if y0 <= 0.0 {
        return Err(Error::SeriesStartFailure { y: y0 });
    }
    let a = (1.0 - lambda) / 4.0;
    let b = 0.5;
    // Regular solution series W = sum c_k y^k, c_0 = 1,
    // c_{k+1} = c_k (a + k) / ((b + k)(k + 1)); order-6 truncation at
    // y0 ~ 1e-4 is far below the working tolerances.
    let series_start = |y: f64| {
        let (mut w, mut dw) = (0.0_f64, 0.0_f64);
        let mut coeff = 1.0_f64;
        for k in 0..=6_u32 {
            let kf = k as f64;
            w += coeff * y.powi(k as i32);
            if k >= 1 {
                dw += coeff * kf * y.powi(k as i32 - 1);
            }
            coeff *= (a + kf) / ((b + kf) * (kf + 1.0));
        }
        [w, dw]
    };
    let f = |y: f64, s: &[f64], ds: &mut [f64]| -> Result<()> {
        ds[0] = s[1];
        ds[1] = ((y - b) * s[1] + a * s[0]) / y;
        Ok(())
    };
    let rows = integrate_ivp(f, &series_start(y0), y_grid, 1e-10)?;
    let v_states: Vec<ProjectivePoint> = rows
        .iter()
        .map(|r| ProjectivePoint::new(r[1], r[0]).canonicalize())
        .collect();
    let v_traj = Trajectory::new(y_grid.clone(), v_states)?;
    let nodes = y_grid.nodes().to_vec();
    let table = |values: Vec<f64>| {
        CoefficientFn::table(nodes.clone(), values, Interpolation::Cubic)
    };
    let v_sys = RiccatiSystem::new(
        table(nodes.iter().map(|&y| a / y).collect())?,
        table(nodes.iter().map(|&y| 1.0 - b / y).collect())?,
        CoefficientFn::constant(-1.0),
        y0,
        y_grid.stop(),
    )?;
    let residual_v = max_riccati_residual(&v_sys, &v_traj)?;
    // Pull back to the oscillator variable on a uniform xi grid.
    let xi_grid = TimeGrid::uniform(y0.sqrt(), y_grid.stop().sqrt(), y_grid.len())?;
    let y_of_xi = TimeGrid::from_nodes(xi_grid.nodes().iter().map(|&xi| xi * xi).collect())?;
    let rows = integrate_ivp(f, &series_start(y_of_xi.start()), &y_of_xi, 1e-10)?;
    let z_states: Vec<ProjectivePoint> = rows
        .iter()
        .zip(xi_grid.nodes())
        .map(|(r, &xi)| {
            let (w, dw) = (r[0], r[1]);
            ProjectivePoint::new(2.0 * xi * dw - xi * w, w).canonicalize()
        })
        .collect();
    let z_traj = Trajectory::new(xi_grid, z_states)?;
    let residual_z = max_riccati_residual(&oscillator_riccati(lambda), &z_traj)?;
    Ok(residual_v.max(residual_z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::derivative_samples;
    use crate::reduction::{log_derivative, LinearSolution};
    use crate::wei_norman::{solve_wn, FactorizationOrdering};

    /// Direct series evaluation of H_n as an independent oracle:
    /// H_n = n! sum_k (-1)^k (2 xi)^{n-2k} / (k! (n-2k)!).
    fn hermite_series(n: usize, xi: f64) -> f64 {
        let fact = |m: usize| (1..=m).map(|v| v as f64).product::<f64>();
        (0..=n / 2)
            .map(|k| {
                (-1.0_f64).powi(k as i32) * (2.0 * xi).powi((n - 2 * k) as i32)
                    / (fact(k) * fact(n - 2 * k))
            })
            .sum::<f64>()
            * fact(n)
    }

    #[test]
    fn hermite_low_orders_and_series_oracle() {
        assert_eq!(hermite(0, 0.3).value, 1.0);
        assert_eq!(hermite(0, 0.3).derivative, 0.0);
        assert_eq!(hermite(1, 0.3).value, 0.6);
        let h2 = hermite(2, 0.9);
        assert!((h2.value - (4.0 * 0.81 - 2.0)).abs() <= 1e-14);
        assert!((h2.derivative - 8.0 * 0.9).abs() <= 1e-14);
        let h6 = hermite(6, 0.7);
        let oracle = hermite_series(6, 0.7);
        assert!(
            (h6.value - oracle).abs() <= 1e-10 * oracle.abs(),
            "{} vs {oracle}",
            h6.value
        );
    }

    #[test]
    fn telescoping_identity_holds_through_n_twelve() {
        // H'' computed through the second recurrence route must satisfy
        // 4n(n-1) H_{n-2} - H_n = -(2n+1) H_n + 2 xi H_n' exactly.
        for n in 2..=12_usize {
            for &xi in &[-1.7, -0.4, 0.0, 0.3, 1.1, 2.6] {
                let h = hermite(n, xi);
                let h_minus2 = hermite(n - 2, xi).value;
                let lambda = (2 * n + 1) as f64;
                let lhs = 4.0 * (n as f64) * (n as f64 - 1.0) * h_minus2 - h.value;
                let rhs = -lambda * h.value + 2.0 * xi * h.derivative;
                let scale = lhs.abs().max(rhs.abs()).max(1.0);
                assert!(
                    (lhs - rhs).abs() <= 1e-8 * scale,
                    "n={n}, xi={xi}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn oscillator_riccati_matches_the_linear_reduction() {
        use crate::reduction::{riccati_from_linear, LinearSecondOrder};
        let lambda = 3.7;
        let sys = oscillator_riccati(lambda);
        // lambda = 1 ground state: z = -xi solves the flow exactly.
        let ground = oscillator_riccati(1.0);
        for &xi in &[0.0, 0.8, -1.3] {
            let z = -xi;
            let [a0, a1, a2] = ground.eval(xi).unwrap();
            let rhs = a0 + a1 * z + a2 * z * z;
            assert!((rhs - (-1.0)).abs() <= 1e-14, "flow of -xi must be -1");
        }
        // Same equation as reducing u'' + (lambda - xi^2) u = 0.
        let lin = LinearSecondOrder::new(
            CoefficientFn::constant(0.0),
            CoefficientFn::polynomial(vec![lambda, 0.0, -1.0]),
            -5.0,
            5.0,
        )
        .unwrap();
        let reduced = riccati_from_linear(&lin);
        for &xi in &[-4.0, -0.5, 0.0, 1.9] {
            assert_eq!(sys.eval(xi).unwrap(), reduced.eval(xi).unwrap());
        }
    }

    #[test]
    fn g0_closed_form_basics() {
        for &xi in &[-2.0, 0.0, 0.6, 3.1] {
            assert!((g0_closed_form(0, xi).unwrap() - (-xi)).abs() <= 1e-14);
        }
        let xi = 0.4;
        let expected = 8.0 * xi / (4.0 * xi * xi - 2.0) - xi;
        assert!((g0_closed_form(2, xi).unwrap() - expected).abs() <= 1e-13);
        let h4 = hermite(4, 0.5);
        let expected = h4.derivative / h4.value - 0.5;
        assert!((g0_closed_form(4, 0.5).unwrap() - expected).abs() <= 1e-13);
        // Near the positive root of H_2 the closed form refuses and points
        // at the root.
        let root = std::f64::consts::FRAC_1_SQRT_2;
        match g0_closed_form(2, root + 1e-12).unwrap_err() {
            Error::HermiteZero { xi } => assert!((xi - root).abs() <= 1e-9, "estimate {xi}"),
            other => panic!("unexpected error {other}"),
        }
        assert!(matches!(
            g0_closed_form(1, 0.3).unwrap_err(),
            Error::Parse { .. }
        ));
    }

    #[test]
    fn even_g0_satisfies_its_riccati_flow_away_from_zeros() {
        for n in (0..=10_usize).step_by(2) {
            let lambda = (2 * n + 1) as f64;
            let zeros = hermite_zeros(n, -4.0, 4.0);
            let mut checked = 0_usize;
            for i in 0..=1600 {
                let xi = -4.0 + i as f64 * (8.0 / 1600.0);
                if zeros.iter().any(|z| (xi - z).abs() < 1e-2) {
                    continue;
                }
                let g0 = g0_closed_form(n, xi).unwrap();
                let h = hermite(n, xi);
                // Analytic derivative through the independent H'' route.
                let h2 = if n >= 2 {
                    4.0 * (n as f64) * (n as f64 - 1.0) * hermite(n - 2, xi).value
                } else {
                    0.0
                };
                let dg0 = h2 / h.value - (h.derivative / h.value).powi(2) - 1.0;
                let residual = (dg0 - (xi * xi - lambda - g0 * g0)).abs();
                let scale = 1.0 + g0 * g0;
                assert!(
                    residual <= 1e-8 * scale,
                    "n={n}, xi={xi}: residual {residual:.3e}"
                );
                checked += 1;
            }
            assert!(checked > 1000, "exclusion zones swallowed the domain");
        }
    }

    #[test]
    fn even_closed_forms_match_the_integrated_coordinates() {
        // Ordering with the scaling factor in the middle: its coordinate
        // system is exactly (g0, g1, g2) with zero initial data.
        let n = 2;
        let grid = TimeGrid::uniform(0.0, 0.6, 601).unwrap();
        let closed = g1_g2_closed_form(n, &grid).unwrap();
        let sys = oscillator_riccati((2 * n + 1) as f64);
        let coords = solve_wn(FactorizationOrdering::III, &sys, &grid, 1e-10).unwrap();
        let mut worst = 0.0_f64;
        for i in 0..grid.len() {
            let s = coords.sample(i);
            worst = worst
                .max((closed.g0[i] - s[0]).abs())
                .max((closed.g1[i] - s[1]).abs())
                .max((closed.g2[i] - s[2]).abs());
        }
        assert!(worst <= 1e-7, "closed vs integrated gap {worst:.3e}");
    }

    #[test]
    fn even_constants_and_anchors() {
        assert_eq!(k1_even(0).unwrap(), 1);
        assert_eq!(k1_even(2).unwrap(), 4);
        assert_eq!(k1_even(4).unwrap(), 144);
        // k1 = H_n(0)^2 exactly up to n = 20.
        for n in (0..=20_usize).step_by(2) {
            let h0 = hermite_at_zero(n).unwrap();
            assert_eq!(k1_even(n).unwrap(), h0 * h0, "n = {n}");
        }
        let grid = TimeGrid::uniform(0.0, 1.2, 401).unwrap();
        let closed = g1_g2_closed_form(0, &grid).unwrap();
        assert!(closed.g1[0].abs() <= 1e-10);
        assert!(closed.g2[0].abs() <= 1e-10);
        assert_eq!(closed.k2, 0.0);
        // n = 0: g1 = xi^2 and g2 = -integral of e^{xi^2}.
        for (i, &xi) in grid.nodes().iter().enumerate() {
            assert!((closed.g1[i] - xi * xi).abs() <= 1e-12);
        }
        let growth: Vec<f64> = grid.nodes().iter().map(|&xi| (xi * xi).exp()).collect();
        let reference = cumulative_quadrature(&grid, &growth);
        for i in 0..grid.len() {
            assert!((closed.g2[i] + reference[i]).abs() <= 1e-10);
        }
        // Grids not anchored at zero are refused.
        let off = TimeGrid::uniform(0.1, 1.0, 11).unwrap();
        assert!(g1_g2_closed_form(0, &off).is_err());
    }

    #[test]
    fn odd_closed_forms_and_constants() {
        assert_eq!(k1_odd(1).unwrap(), 2);
        assert_eq!(k1_odd(3).unwrap(), -12);
        // k1 = H_n'(0) = 2 n H_{n-1}(0) exactly up to n = 19.
        for n in (1..=19_usize).step_by(2) {
            let expected = 2 * n as i128 * hermite_at_zero(n - 1).unwrap();
            assert_eq!(k1_odd(n).unwrap(), expected, "n = {n}");
        }
        let grid = TimeGrid::uniform(0.0, 0.9, 901).unwrap();
        let closed = odd_case_coords(1, &grid).unwrap();
        for (i, &xi) in grid.nodes().iter().enumerate() {
            let expected = xi / (1.0 - xi * xi);
            assert!(
                (closed.g0[i] - expected).abs() <= 1e-12 * (1.0 + expected.abs()),
                "node {i}"
            );
        }
        assert!(closed.g1[0].abs() <= 1e-10 && closed.g2[0].abs() <= 1e-10);
        // The closed forms integrate the v-chart system
        // g0' = 1 - (xi^2 - lambda) g0^2, g1' = -2 (xi^2 - lambda) g0,
        // g2' = -(xi^2 - lambda) e^{g1}: check against an independent
        // adaptive integration of exactly that system from zero data.
        let n = 3;
        let lambda = (2 * n + 1) as f64;
        let grid = TimeGrid::uniform(0.0, 0.5, 1101).unwrap();
        let closed = odd_case_coords(n, &grid).unwrap();
        let system = |xi: f64, s: &[f64], ds: &mut [f64]| -> Result<()> {
            let c = xi * xi - lambda;
            ds[0] = 1.0 - c * s[0] * s[0];
            ds[1] = -2.0 * c * s[0];
            ds[2] = -c * s[1].exp();
            Ok(())
        };
        let rows = integrate_ivp(system, &[0.0, 0.0, 0.0], &grid, 1e-12).unwrap();
        let mut worst = 0.0_f64;
        for i in 0..grid.len() {
            worst = worst
                .max((closed.g0[i] - rows[i][0]).abs())
                .max((closed.g1[i] - rows[i][1]).abs())
                .max((closed.g2[i] - rows[i][2]).abs());
        }
        assert!(worst <= 1e-8, "printed-system residual {worst:.3e}");
        // And they match the integrated v-flow coordinates.
        let v_sys = RiccatiSystem::new(
            CoefficientFn::constant(1.0),
            CoefficientFn::constant(0.0),
            CoefficientFn::polynomial(vec![lambda, 0.0, -1.0]),
            -XI_DOMAIN,
            XI_DOMAIN,
        )
        .unwrap();
        let coords = solve_wn(FactorizationOrdering::III, &v_sys, &grid, 1e-10).unwrap();
        let mut gap = 0.0_f64;
        for i in 0..grid.len() {
            let s = coords.sample(i);
            gap = gap
                .max((closed.g0[i] - s[0]).abs())
                .max((closed.g1[i] - s[1]).abs())
                .max((closed.g2[i] - s[2]).abs());
        }
        assert!(gap <= 1e-7, "closed vs integrated gap {gap:.3e}");
        // Denominator zeros are refused with an estimate (H_1' - xi H_1
        // vanishes at xi = 1).
        let bad = TimeGrid::from_nodes(vec![0.0, 0.5, 1.0 - 1e-12]).unwrap();
        match odd_case_coords(1, &bad).unwrap_err() {
            Error::DenominatorZero { xi } => assert!((xi - 1.0).abs() <= 1e-9),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn eigenfunctions_solve_the_spectral_problem() {
        let grid = TimeGrid::uniform(-4.0, 4.0, 4001).unwrap();
        // Ground state: positive Gaussian.
        let psi0 = eigenfunction(0, &grid);
        assert!(psi0.iter().all(|v| *v > 0.0));
        // n = 2: sign changes exactly at +-1/sqrt(2).
        let psi2 = eigenfunction(2, &grid);
        let sign_changes = psi2.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
        assert_eq!(sign_changes, 2);
        // Spectral residual -psi'' + xi^2 psi - lambda psi for n = 3.
        let n = 3;
        let lambda = (2 * n + 1) as f64;
        let psi = eigenfunction(n, &grid);
        let dpsi = derivative_samples(grid.nodes(), &psi);
        let ddpsi = derivative_samples(grid.nodes(), &dpsi);
        let mut worst = 0.0_f64;
        for (i, &xi) in grid.nodes().iter().enumerate() {
            worst = worst.max((-ddpsi[i] + (xi * xi - lambda) * psi[i]).abs());
        }
        assert!(worst <= 1e-6, "spectral residual {worst:.3e}");
    }

    #[test]
    fn eigenfunction_log_derivative_is_the_closed_coordinate() {
        // Through the Hermite zeros: compare projectively against the
        // exponential-free homogeneous pair (H' - xi H, H).
        let n = 4;
        let grid = TimeGrid::uniform(-3.0, 3.0, 601).unwrap();
        let sol = LinearSolution::from_samples(
            grid.clone(),
            eigenfunction(n, &grid),
            eigenfunction_derivative(n, &grid),
        )
        .unwrap();
        let z = log_derivative(&sol).unwrap();
        let mut worst = 0.0_f64;
        for (i, &xi) in grid.nodes().iter().enumerate() {
            let h = hermite(n, xi);
            let expected =
                ProjectivePoint::new(h.derivative - xi * h.value, h.value).canonicalize();
            worst = worst.max(z.state(i).distance(&expected));
        }
        assert!(worst <= 1e-7, "distance {worst:.3e}");
    }

    #[test]
    fn narrow_scan_finds_the_ground_state() {
        let result = spectrum_scan(0.5, 1.5, 6.0, 1e-8).unwrap();
        assert_eq!(result.eigenvalues.len(), 1);
        let (lambda, nodes) = result.eigenvalues[0];
        assert!((lambda - 1.0).abs() <= 1e-6, "lambda = {lambda}");
        assert_eq!(nodes, 0);
    }

    #[test]
    fn scan_recovers_three_consecutive_states() {
        let result = spectrum_scan(2.0, 8.0, 6.0, 1e-8).unwrap();
        let expect = [(3.0, 1_usize), (5.0, 2), (7.0, 3)];
        assert_eq!(result.eigenvalues.len(), expect.len());
        for ((lambda, nodes), (le, ne)) in result.eigenvalues.iter().zip(expect) {
            assert!((lambda - le).abs() <= 1e-6, "{lambda} vs {le}");
            assert_eq!(*nodes, ne);
        }
    }

    #[test]
    fn scan_is_insensitive_to_the_cutoff() {
        let a = spectrum_scan(2.5, 3.5, 4.0, 1e-9).unwrap();
        let b = spectrum_scan(2.5, 3.5, 8.0, 1e-9).unwrap();
        assert!((a.eigenvalues[0].0 - b.eigenvalues[0].0).abs() <= 1e-6);
    }

    #[test]
    fn empty_scan_interval_reports_no_sign_change() {
        let err = spectrum_scan(1.5, 2.5, 6.0, 1e-8).unwrap_err();
        assert!(matches!(err, Error::NoSignChange { .. }), "{err}");
    }

    #[test]
    fn kummer_map_residuals() {
        let grid = TimeGrid::uniform(1e-4, 6.0, 4001).unwrap();
        // lambda = 1: a = 0, W constant, v = 0, z = -xi.
        assert!(kummer_map_check(1.0, &grid).unwrap() <= 1e-6);
        // lambda = 5: a = -1, W = 1 - 2y crosses zero at y = 1/2; both
        // residual checks must pass straight through the pole of v.
        assert!(kummer_map_check(5.0, &grid).unwrap() <= 1e-6);
        // Generic non-quantized value.
        assert!(kummer_map_check(2.3, &grid).unwrap() <= 1e-6);
        // The y = 0 singular point itself is refused.
        let bad = TimeGrid::from_nodes(vec![0.0, 1.0, 2.0]).unwrap();
        assert!(matches!(
            kummer_map_check(1.0, &bad).unwrap_err(),
            Error::SeriesStartFailure { .. }
        ));
    }
}
