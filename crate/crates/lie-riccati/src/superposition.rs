//! Nonlinear superposition for Riccati equations.
//!
//! Three distinct particular solutions x1, x2, x3 determine the full solution
//! set of a Riccati equation without further integration: every solution is
//!
//! ```text
//! x(t) = [x0 * x1 * (x3 - x2) + x2 * (x1 - x3)] / [x0 * (x3 - x2) + (x1 - x3)]
//! ```
//!
//! for one constant x0, and the cross ratio of (x, x1, x2, x3) is constant in
//! time along any fourth solution x.  This module provides that superposition
//! rule ([`superpose`]), the matching first integral ([`first_integral`]),
//! recovery of factorization coordinates ([`coords_from_solutions`]) and of
//! the underlying group curve ([`group_curve_from_solutions`]) from a triple
//! of solutions, the inverse map from a group curve back to equation
//! coefficients ([`riccati_from_group_curve`]), a numerical check that the
//! projected vector fields annihilate the cross ratio
//! ([`annihilation_check`]), and the classical one-known-solution reduction
//! to a linear first-order problem solved by quadratures
//! ([`bernoulli_reduce`]).
//!
//! All pointwise arithmetic runs on homogeneous coordinates, so solutions may
//! pass through infinity anywhere except where a formula genuinely degenerates.

use crate::coeff::{CoefficientFn, Interpolation, RiccatiSystem};
use crate::error::{Error, Result};
use crate::integrate::{
    cumulative_quadrature, derivative_samples, integrate_riccati_projective, TimeGrid, Trajectory,
};
use crate::projective::{cross_ratio_first_integral, det2, ProjectivePoint, Sl2Element};
use crate::wei_norman::{FactorizationOrdering, WnCoordinates};

/// Pairwise projective separation below which a triple is rejected outright.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Separation below which a triple is accepted but flagged near-degenerate,
/// warning that results are ill-conditioned.
pub const NEAR_DEGENERACY_TOL: f64 = 1e-6;

/// How close the initial data must be to (infinity, 0, 1) for coordinate
/// recovery.
const CANONICAL_DATA_TOL: f64 = 1e-8;

/// Residual gate used when checking that a claimed solution actually solves
/// the stated equation.
const SOLUTION_RESIDUAL_TOL: f64 = 1e-6;

/// Tolerated drift from unit determinant in a reconstructed group curve.
const UNIT_DET_TOL: f64 = 1e-6;

/// Step used for the central differences in [`annihilation_check`].
const ANNIHILATION_FD_STEP: f64 = 1e-5;

/// Three pairwise-distinct solutions of one Riccati equation sampled on a
/// shared grid.  Construction checks the separation at every node.
#[derive(Debug, Clone)]
pub struct FundamentalTriple {
    x1: Trajectory,
    x2: Trajectory,
    x3: Trajectory,
    min_separation: f64,
}

impl FundamentalTriple {
    /// Validate and assemble a triple.  All three trajectories must share one
    /// grid, and the three states must be pairwise separated by more than
    /// [`DEGENERACY_TOL`] (projective distance) at every node.  A triple that
    /// passes but dips below [`NEAR_DEGENERACY_TOL`] somewhere is accepted
    /// and reported by [`FundamentalTriple::near_degenerate`]; callers should
    /// treat downstream tolerances as widened in that case.
    pub fn new(x1: Trajectory, x2: Trajectory, x3: Trajectory) -> Result<Self> {
        if x1.grid() != x2.grid() || x1.grid() != x3.grid() {
            return Err(Error::parse(
                "fundamental triple trajectories must share one grid",
            ));
        }
        let canon = |t: &Trajectory| -> Result<Trajectory> {
            let states = t.states().iter().map(|s| s.canonicalize()).collect();
            Trajectory::new(t.grid().clone(), states)
        };
        let (x1, x2, x3) = (canon(&x1)?, canon(&x2)?, canon(&x3)?);
        let mut min_separation = f64::INFINITY;
        for i in 0..x1.len() {
            for (label, a, b) in [
                ("x1,x2", x1.state(i), x2.state(i)),
                ("x1,x3", x1.state(i), x3.state(i)),
                ("x2,x3", x2.state(i), x3.state(i)),
            ] {
                let d = a.distance(b);
                if d <= DEGENERACY_TOL {
                    return Err(Error::degenerate(format!(
                        "solutions {label} collide at node {i} (separation {d:.3e})"
                    )));
                }
                min_separation = min_separation.min(d);
            }
        }
        Ok(FundamentalTriple {
            x1,
            x2,
            x3,
            min_separation,
        })
    }

    /// Build a triple by integrating the equation from three initial points.
    pub fn integrate(
        sys: &RiccatiSystem,
        initial: [&ProjectivePoint; 3],
        grid: &TimeGrid,
        tol: f64,
    ) -> Result<Self> {
        let x1 = integrate_riccati_projective(sys, initial[0], grid, tol)?;
        let x2 = integrate_riccati_projective(sys, initial[1], grid, tol)?;
        let x3 = integrate_riccati_projective(sys, initial[2], grid, tol)?;
        FundamentalTriple::new(x1, x2, x3)
    }

    pub fn grid(&self) -> &TimeGrid {
        self.x1.grid()
    }

    pub fn x1(&self) -> &Trajectory {
        &self.x1
    }

    pub fn x2(&self) -> &Trajectory {
        &self.x2
    }

    pub fn x3(&self) -> &Trajectory {
        &self.x3
    }

    /// The three states at node `i`.
    pub fn at(&self, i: usize) -> [&ProjectivePoint; 3] {
        [self.x1.state(i), self.x2.state(i), self.x3.state(i)]
    }

    /// Smallest pairwise projective separation over all nodes.
    pub fn min_separation(&self) -> f64 {
        self.min_separation
    }

    /// True when the triple came closer than [`NEAR_DEGENERACY_TOL`]
    /// somewhere; results are then ill-conditioned and tolerances should be
    /// widened accordingly.
    pub fn near_degenerate(&self) -> bool {
        self.min_separation < NEAR_DEGENERACY_TOL
    }
}

/// The superposition rule: the solution through `k` (its value at the first
/// node when the triple has canonical initial data), evaluated node by node.
///
/// In homogeneous form the rule is linear,
/// `X = k_p * det2(x3, x2) * X1 + k_q * det2(x1, x3) * X2`,
/// so `k = infinity` returns x1, `k = 0` returns x2, and `k = 1` returns x3
/// exactly; poles of the new solution need no special treatment.
pub fn superpose(triple: &FundamentalTriple, k: &ProjectivePoint) -> Result<Trajectory> {
    if !k.is_valid() {
        return Err(Error::wrong_initial_data(
            "superposition constant has no nonzero finite component",
        ));
    }
    let k = k.canonicalize();
    let states = (0..triple.grid().len())
        .map(|i| {
            let [x1, x2, x3] = triple.at(i);
            let w1 = k.p * det2(x3, x2);
            let w2 = k.q * det2(x1, x3);
            ProjectivePoint::new(w1 * x1.p + w2 * x2.p, w1 * x1.q + w2 * x2.q).canonicalize()
        })
        .collect();
    Trajectory::new(triple.grid().clone(), states)
}

/// The first integral attached to a triple: the cross ratio
/// `(x - x2)(x3 - x1) / ((x - x1)(x3 - x2))` evaluated at every node.  For a
/// genuine fourth solution the returned values are constant in time and equal
/// to the superposition constant of [`superpose`] when the triple has
/// canonical initial data.
///
/// Fails with `PoleValue` (carrying the node index) where x coincides with
/// x1.
pub fn first_integral(x: &Trajectory, triple: &FundamentalTriple) -> Result<Vec<f64>> {
    if x.grid() != triple.grid() {
        return Err(Error::parse(
            "first integral requires the solution on the triple's grid",
        ));
    }
    (0..x.len())
        .map(|i| {
            let [x1, x2, x3] = triple.at(i);
            cross_ratio_first_integral(x.state(i), x1, x2, x3).map_err(|e| match e {
                Error::PoleValue { .. } => Error::PoleValue { node: Some(i) },
                other => other,
            })
        })
        .collect()
}

/// A raw 2x2 real matrix in row-major order, used where a Moebius map is
/// needed that may reverse orientation (negative determinant) and therefore
/// cannot be an [`Sl2Element`].
pub type Mat2 = [f64; 4];

/// Apply a raw 2x2 matrix to a projective point.
pub fn mat2_apply(m: &Mat2, x: &ProjectivePoint) -> ProjectivePoint {
    ProjectivePoint::new(m[0] * x.p + m[1] * x.q, m[2] * x.p + m[3] * x.q).canonicalize()
}

/// The unique (up to scale) Moebius map sending three distinct points to
/// (infinity, 0, 1), scaled so its determinant is +-1.
fn three_point_map(x1: &ProjectivePoint, x2: &ProjectivePoint, x3: &ProjectivePoint) -> Mat2 {
    let d31 = det2(x3, x1);
    let d32 = det2(x3, x2);
    let m = [d31 * x2.q, -d31 * x2.p, d32 * x1.q, -d32 * x1.p];
    let det = m[0] * m[3] - m[1] * m[2];
    let s = det.abs().sqrt();
    [m[0] / s, m[1] / s, m[2] / s, m[3] / s]
}

/// Determinant of a raw 2x2 matrix.
pub fn mat2_det(m: &Mat2) -> f64 {
    m[0] * m[3] - m[1] * m[2]
}

/// Renormalize a triple with arbitrary initial data to one with canonical
/// initial data (infinity, 0, 1) by applying one constant Moebius map to all
/// three solutions.  Returns the transformed triple and the map.
///
/// The transformed trajectories solve the conjugated Riccati equation (the
/// pushforward of the original field under the map), not the original one;
/// superposition and the first integral are unchanged because the cross
/// ratio is Moebius-invariant.
pub fn canonicalize_triple(triple: &FundamentalTriple) -> Result<(FundamentalTriple, Mat2)> {
    let [x1, x2, x3] = triple.at(0);
    let m = three_point_map(x1, x2, x3);
    let transform = |t: &Trajectory| -> Result<Trajectory> {
        let states = t.states().iter().map(|s| mat2_apply(&m, s)).collect();
        Trajectory::new(t.grid().clone(), states)
    };
    let new = FundamentalTriple::new(
        transform(&triple.x1)?,
        transform(&triple.x2)?,
        transform(&triple.x3)?,
    )?;
    Ok((new, m))
}

/// Recover the factorization coordinates of an ordering directly from three
/// solutions with canonical initial data (x1, x2, x3)(t0) = (infinity, 0, 1),
/// with no further integration.
///
/// Fails with `WrongInitialData` when the initial data is not canonical
/// (renormalize with [`canonicalize_triple`] first) and with `LogDomain`
/// (carrying the first offending node) when the logarithm argument of the
/// c_L1 coordinate leaves the positive axis, which signals that the chosen
/// ordering's coordinate chart has broken down along the path.
pub fn coords_from_solutions(
    ordering: FactorizationOrdering,
    triple: &FundamentalTriple,
) -> Result<WnCoordinates> {
    let [x1_0, x2_0, x3_0] = triple.at(0);
    let canonical = [
        ProjectivePoint::infinity(),
        ProjectivePoint::from_real(0.0),
        ProjectivePoint::from_real(1.0),
    ];
    for (i, (have, want)) in [x1_0, x2_0, x3_0].iter().zip(&canonical).enumerate() {
        if !have.approx_eq(want, CANONICAL_DATA_TOL) {
            return Err(Error::wrong_initial_data(format!(
                "coordinate recovery needs initial data (inf, 0, 1); solution {} starts at {}",
                i + 1,
                have
            )));
        }
    }
    let mut samples = Vec::with_capacity(triple.grid().len());
    for i in 0..triple.grid().len() {
        let [x1, x2, x3] = triple.at(i);
        let (p1, q1) = (x1.p, x1.q);
        let (p2, q2) = (x2.p, x2.q);
        let d12 = det2(x1, x2);
        let d13 = det2(x1, x3);
        let d21 = -d12;
        let d23 = det2(x2, x3);
        let d31 = -d13;
        let d32 = -d23;
        let log_arg = match ordering {
            FactorizationOrdering::I | FactorizationOrdering::III | FactorizationOrdering::VI => {
                d32 * d21 / (q2 * q2 * d31)
            }
            FactorizationOrdering::II | FactorizationOrdering::IV => p1 * p1 * d32 / (d12 * d13),
            FactorizationOrdering::V => p1 * p1 * d23 / (d21 * d13),
        };
        if !(log_arg > 0.0) || !log_arg.is_finite() {
            return Err(Error::LogDomain { node: i });
        }
        let c1 = log_arg.ln();
        let (c0, c2) = match ordering {
            FactorizationOrdering::I => (p2 / q2, q2 * q1 / d21),
            FactorizationOrdering::II => (p2 * d13 / (p1 * d32), -q1 / p1),
            FactorizationOrdering::III => (p2 / q2, q1 * d23 / (q2 * d13)),
            FactorizationOrdering::IV => (p1 * p2 / d12, -q1 / p1),
            FactorizationOrdering::V => (d31 * p2 / (d23 * p1), -p1 * q1 * d32 / (d12 * d13)),
            FactorizationOrdering::VI => {
                (d31 * p2 * q2 / (d21 * d32), q1 * d32 / (q2 * d31))
            }
        };
        samples.push([c0, c1, c2]);
    }
    // The inverse relations return exact zeros at t0 only for exactly
    // canonical data; the gate above tolerates CANONICAL_DATA_TOL, so the
    // first sample may carry an offset of that size.  It still must be small.
    if samples[0].iter().any(|c| c.abs() > 10.0 * CANONICAL_DATA_TOL) {
        return Err(Error::wrong_initial_data(format!(
            "recovered coordinates do not vanish at the first node: {:?}",
            samples[0]
        )));
    }
    Ok(WnCoordinates::from_recovered(
        ordering,
        triple.grid().clone(),
        samples,
    ))
}

/// Reconstruct the curve of group elements generating a triple of solutions:
/// U(t) maps each solution's initial value to its value at time t, equals the
/// identity at the first node, and is independent of which triple of the
/// equation's solutions is used.  Initial data may be arbitrary.
///
/// Each element's overall sign (the two lifts +-U act identically) is fixed
/// by making the first entry of magnitude above 1e-12 positive.
pub fn group_curve_from_solutions(triple: &FundamentalTriple) -> Result<Vec<Sl2Element>> {
    let [x1_0, x2_0, x3_0] = triple.at(0);
    let m0 = three_point_map(x1_0, x2_0, x3_0);
    (0..triple.grid().len())
        .map(|i| {
            let [x1, x2, x3] = triple.at(i);
            let mt = three_point_map(x1, x2, x3);
            // U = inverse(mt) * m0 up to scale; the adjugate avoids dividing
            // by the determinant, and det U = det(mt) det(m0) > 0 because
            // the cyclic order of three distinct points cannot change along
            // a continuous collision-free path.
            let adj = [mt[3], -mt[1], -mt[2], mt[0]];
            let u = [
                adj[0] * m0[0] + adj[1] * m0[2],
                adj[0] * m0[1] + adj[1] * m0[3],
                adj[2] * m0[0] + adj[3] * m0[2],
                adj[2] * m0[1] + adj[3] * m0[3],
            ];
            Sl2Element::from_scaled(u[0], u[1], u[2], u[3]).map(|e| e.sign_canonical())
        })
        .collect()
}

/// Recover the Riccati coefficients generated by a unit-determinant group
/// curve sampled on a grid: with entries (a, b; c, d) per element,
///
/// ```text
/// a0 = (a' b - a b') / (b c - a d)
/// a1 = (-a' d + a d' + b' c - b c') / (b c - a d)
/// a2 = (c' d - c d') / (b c - a d)
/// ```
///
/// where primes are time derivatives, estimated with the stencils of
/// [`derivative_samples`].  The result carries the coefficients as cubic
/// interpolation tables over the grid nodes.
pub fn riccati_from_group_curve(grid: &TimeGrid, curve: &[Sl2Element]) -> Result<RiccatiSystem> {
    if curve.len() != grid.len() {
        return Err(Error::parse(format!(
            "{} curve samples for {} grid nodes",
            curve.len(),
            grid.len()
        )));
    }
    for e in curve {
        let det = e.det();
        if (det - 1.0).abs() > UNIT_DET_TOL {
            return Err(Error::NonUnitDeterminant { det });
        }
    }
    // The two lifts +-U are the same Moebius map, but finite differences
    // need one continuous representative: align each sample's sign with its
    // predecessor before differentiating.
    let mut entries: Vec<[f64; 4]> = Vec::with_capacity(curve.len());
    for e in curve {
        let mut m = [e.a, e.b, e.c, e.d];
        if let Some(prev) = entries.last() {
            let dot: f64 = prev.iter().zip(&m).map(|(p, c)| p * c).sum();
            if dot < 0.0 {
                for v in &mut m {
                    *v = -*v;
                }
            }
        }
        entries.push(m);
    }
    let t = grid.nodes();
    let column = |k: usize| -> Vec<f64> { entries.iter().map(|m| m[k]).collect() };
    let (a_s, b_s, c_s, d_s) = (column(0), column(1), column(2), column(3));
    let da = derivative_samples(t, &a_s);
    let db = derivative_samples(t, &b_s);
    let dc = derivative_samples(t, &c_s);
    let dd = derivative_samples(t, &d_s);
    let n = grid.len();
    let mut a0 = Vec::with_capacity(n);
    let mut a1 = Vec::with_capacity(n);
    let mut a2 = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b, c, d) = (a_s[i], b_s[i], c_s[i], d_s[i]);
        let den = b * c - a * d; // = -det = -1 for unit-determinant curves
        a0.push((da[i] * b - a * db[i]) / den);
        a1.push((-da[i] * d + a * dd[i] + db[i] * c - b * dc[i]) / den);
        a2.push((dc[i] * d - c * dd[i]) / den);
    }
    let table = |v: Vec<f64>| CoefficientFn::table(t.to_vec(), v, Interpolation::Cubic);
    RiccatiSystem::new(
        table(a0)?,
        table(a1)?,
        table(a2)?,
        grid.start(),
        grid.stop(),
    )
}

/// The scalar cross ratio `(x - x1)(x2 - x3) / ((x - x2)(x1 - x3))` on real
/// arguments, as a plain differentiable function of four variables.  The
/// caller keeps the arguments away from the poles (x = x2, or coincident
/// x1, x3).
pub fn cross_ratio_real(x: f64, x1: f64, x2: f64, x3: f64) -> f64 {
    (x - x1) * (x2 - x3) / ((x - x2) * (x1 - x3))
}

/// Largest directional derivatives of the cross ratio along the three
/// diagonal vector fields of the projective action, reported per field by
/// [`annihilation_check`].
#[derive(Debug, Clone, Copy)]
pub struct AnnihilationResidual {
    /// Along (1, 1, 1, 1): simultaneous translation of all four arguments.
    pub translation: f64,
    /// Along (x, x1, x2, x3): simultaneous scaling.
    pub scaling: f64,
    /// Along (x^2, x1^2, x2^2, x3^2): the quadratic field.
    pub quadratic: f64,
}

impl AnnihilationResidual {
    pub fn max(&self) -> f64 {
        self.translation.max(self.scaling).max(self.quadratic)
    }
}

/// Check numerically that the cross ratio is annihilated by the three vector
/// fields whose simultaneous action on (x, x1, x2, x3) generates the Moebius
/// transformations: for each sample point the partial derivatives are taken
/// by central differences with step 1e-5 and contracted with the field.
/// Sample points must be pairwise well separated.
pub fn annihilation_check(samples: &[[f64; 4]]) -> AnnihilationResidual {
    let mut res = AnnihilationResidual {
        translation: 0.0,
        scaling: 0.0,
        quadratic: 0.0,
    };
    let h = ANNIHILATION_FD_STEP;
    for y in samples {
        let mut grad = [0.0; 4];
        for (i, g) in grad.iter_mut().enumerate() {
            let mut hi = *y;
            let mut lo = *y;
            hi[i] += h;
            lo[i] -= h;
            let f = |v: [f64; 4]| cross_ratio_real(v[0], v[1], v[2], v[3]);
            *g = (f(hi) - f(lo)) / (2.0 * h);
        }
        let contract = |dir: [f64; 4]| -> f64 {
            dir.iter().zip(&grad).map(|(d, g)| d * g).sum::<f64>().abs()
        };
        res.translation = res.translation.max(contract([1.0; 4]));
        res.scaling = res.scaling.max(contract(*y));
        res.quadratic = res
            .quadratic
            .max(contract([y[0] * y[0], y[1] * y[1], y[2] * y[2], y[3] * y[3]]));
    }
    res
}

/// Solve a Riccati equation by quadratures given one known particular
/// solution x1: substituting x = x1 + 1/u turns the equation into the linear
/// problem u' = -(2 a2 x1 + a1) u - a2, solved here with two cumulative
/// quadratures over the grid of `x1`.
///
/// `x0` is the initial value of the desired solution; it must differ from
/// x1(t0).  The known solution must stay finite on the grid (the new
/// solution may pass through infinity freely) and is first checked to
/// actually solve `sys` within residual 1e-6.
pub fn bernoulli_reduce(
    sys: &RiccatiSystem,
    x1: &Trajectory,
    x0: &ProjectivePoint,
) -> Result<Trajectory> {
    let grid = x1.grid();
    let t = grid.nodes();
    for (i, s) in x1.states().iter().enumerate() {
        if s.is_infinite() {
            return Err(Error::PoleOnPath { node: i });
        }
    }
    let x0 = x0.canonicalize();
    if !x0.is_valid() {
        return Err(Error::wrong_initial_data(
            "initial value has no nonzero finite component",
        ));
    }
    let x1_0 = x1.state(0);
    if x0.approx_eq(x1_0, 1e-12) {
        return Err(Error::wrong_initial_data(
            "initial value coincides with the known solution; the reduction chart is singular",
        ));
    }
    let values = x1.real_values();
    let coeffs: Vec<[f64; 3]> = t.iter().map(|&ti| sys.eval(ti)).collect::<Result<_>>()?;
    // Residual pre-check: the claimed solution must satisfy the equation.
    let derivs = derivative_samples(t, &values);
    let mut residual = 0.0_f64;
    for i in 0..t.len() {
        let [a0, a1, a2] = coeffs[i];
        let v = values[i];
        residual = residual.max((derivs[i] - (a0 + a1 * v + a2 * v * v)).abs());
    }
    if residual > SOLUTION_RESIDUAL_TOL {
        return Err(Error::SolutionMismatch {
            residual,
            tolerance: SOLUTION_RESIDUAL_TOL,
        });
    }
    // u' = -P u - a2 with P = 2 a2 x1 + a1, so with Q1 = integral of P,
    // u = exp(-Q1) (u0 - integral of a2 exp(Q1)).
    let p_samples: Vec<f64> = (0..t.len())
        .map(|i| 2.0 * coeffs[i][2] * values[i] + coeffs[i][1])
        .collect();
    let q1 = cumulative_quadrature(grid, &p_samples);
    let growth: Vec<f64> = q1.iter().map(|v| v.exp()).collect();
    let integrand: Vec<f64> = (0..t.len()).map(|i| coeffs[i][2] * growth[i]).collect();
    let q2 = cumulative_quadrature(grid, &integrand);
    // u(t0) = 1 / (x0 - x1(t0)) in homogeneous form; x0 = infinity gives 0.
    let u0 = x0.q * x1_0.q / det2(&x0, x1_0);
    let states = (0..t.len())
        .map(|i| {
            let u = (u0 - q2[i]) / growth[i];
            let s = x1.state(i);
            ProjectivePoint::new(s.p * u + s.q, s.q * u).canonicalize()
        })
        .collect();
    Trajectory::new(grid.clone(), states)
}
