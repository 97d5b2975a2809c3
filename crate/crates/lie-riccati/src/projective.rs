//! SL(2,R) elements, the Moebius action on the extended real line, and
//! projective-point arithmetic.

use std::fmt;

use crate::error::{Error, Result};

/// Tolerance for the unit-determinant invariant.
pub const DET_TOL: f64 = 1e-10;

/// Tolerance for projective-point equality on canonicalized pairs.
pub const POINT_EQ_TOL: f64 = 1e-12;

/// A real 2x2 matrix [[a, b], [c, d]] with unit determinant, acting on the
/// extended real line by x -> (a x + b) / (c x + d).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sl2Element {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Sl2Element {
    /// Entries are accepted when the determinant is 1 within `DET_TOL`,
    /// then renormalized to determinant 1 exactly (up to roundoff).
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !det.is_finite() || (det - 1.0).abs() > DET_TOL {
            return Err(Error::NonUnitDeterminant { det });
        }
        Ok(Sl2Element { a, b, c, d }.renormalized())
    }

    /// Accept any matrix with positive determinant, scaling it into SL(2,R).
    pub fn from_scaled(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::NonUnitDeterminant { det });
        }
        let s = det.sqrt();
        Ok(Sl2Element {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        })
    }

    pub fn identity() -> Self {
        Sl2Element {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
        }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// Divide all entries by sqrt(det); keeps composition chains on the group.
    pub fn renormalized(&self) -> Self {
        let s = self.det().sqrt();
        Sl2Element {
            a: self.a / s,
            b: self.b / s,
            c: self.c / s,
            d: self.d / s,
        }
    }

    /// Matrix product self * rhs, renormalized.
    pub fn compose(&self, rhs: &Sl2Element) -> Self {
        Sl2Element {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
        .renormalized()
    }

    pub fn inverse(&self) -> Self {
        Sl2Element {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
        .renormalized()
    }

    /// Flip the global sign so the first entry that is not tiny is positive.
    /// A and -A act identically; this picks a deterministic representative.
    pub fn sign_canonical(&self) -> Self {
        let entries = [self.a, self.b, self.c, self.d];
        for e in entries {
            if e.abs() > 1e-12 {
                if e < 0.0 {
                    return Sl2Element {
                        a: -self.a,
                        b: -self.b,
                        c: -self.c,
                        d: -self.d,
                    };
                }
                break;
            }
        }
        *self
    }

    /// Largest entrywise difference after aligning the sign of `other`.
    pub fn distance_up_to_sign(&self, other: &Sl2Element) -> f64 {
        let direct = [
            (self.a - other.a).abs(),
            (self.b - other.b).abs(),
            (self.c - other.c).abs(),
            (self.d - other.d).abs(),
        ]
        .into_iter()
        .fold(0.0_f64, f64::max);
        let flipped = [
            (self.a + other.a).abs(),
            (self.b + other.b).abs(),
            (self.c + other.c).abs(),
            (self.d + other.d).abs(),
        ]
        .into_iter()
        .fold(0.0_f64, f64::max);
        direct.min(flipped)
    }
}

impl fmt::Display for Sl2Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// The Lie-algebra basis: generators of translations (L0), scalings (L1),
/// and special conformal maps (L2) of the line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generator {
    L0,
    L1,
    L2,
}

impl Generator {
    pub const ALL: [Generator; 3] = [Generator::L0, Generator::L1, Generator::L2];

    /// Index into (L0, L1, L2)-ordered component arrays.
    pub fn index(&self) -> usize {
        match self {
            Generator::L0 => 0,
            Generator::L1 => 1,
            Generator::L2 => 2,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::L0 => write!(f, "L0"),
            Generator::L1 => write!(f, "L1"),
            Generator::L2 => write!(f, "L2"),
        }
    }
}

/// The one-parameter subgroup exp(s * generator) as a matrix: the actions are
/// x -> x + s, x -> e^s x, and x -> x / (1 - x s) respectively.
pub fn sl2_exp_generator(which: Generator, s: f64) -> Sl2Element {
    match which {
        Generator::L0 => Sl2Element {
            a: 1.0,
            b: s,
            c: 0.0,
            d: 1.0,
        },
        Generator::L1 => Sl2Element {
            a: (0.5 * s).exp(),
            b: 0.0,
            c: 0.0,
            d: (-0.5 * s).exp(),
        },
        Generator::L2 => Sl2Element {
            a: 1.0,
            b: 0.0,
            c: -s,
            d: 1.0,
        },
    }
}

/// A point of the extended real line in homogeneous coordinates (p, q):
/// finite x is (x, 1), infinity is (1, 0), both up to scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectivePoint {
    pub p: f64,
    pub q: f64,
}

impl ProjectivePoint {
    /// Raw homogeneous pair; (0,0) is rejected by canonicalization-time users,
    /// so prefer the named constructors.
    pub fn new(p: f64, q: f64) -> Self {
        ProjectivePoint { p, q }
    }

    pub fn from_real(x: f64) -> Self {
        if x.is_infinite() {
            Self::infinity()
        } else {
            ProjectivePoint { p: x, q: 1.0 }
        }
    }

    pub fn infinity() -> Self {
        ProjectivePoint { p: 1.0, q: 0.0 }
    }

    pub fn is_valid(&self) -> bool {
        self.p.is_finite() && self.q.is_finite() && (self.p != 0.0 || self.q != 0.0)
    }

    /// Normalized representative: p^2 + q^2 = 1 with the first nonzero
    /// coordinate positive. Idempotent; used for equality tests and storage.
    pub fn canonicalize(&self) -> Self {
        let norm = self.p.hypot(self.q);
        // Dividing an already-unit pair by its norm (1 up to an ulp) can
        // dither the last bit; skipping the division there makes repeated
        // canonicalization a fixed point, as promised above.
        let (mut p, mut q) = if (norm - 1.0).abs() <= 4.0 * f64::EPSILON {
            (self.p, self.q)
        } else {
            (self.p / norm, self.q / norm)
        };
        let flip = if p != 0.0 { p < 0.0 } else { q < 0.0 };
        if flip {
            p = -p;
            q = -q;
        }
        // Snap the signed-zero case so (x, -0.0) and (x, 0.0) coincide.
        if p == 0.0 {
            p = 0.0;
        }
        if q == 0.0 {
            q = 0.0;
        }
        ProjectivePoint { p, q }
    }

    pub fn is_infinite(&self) -> bool {
        let c = self.canonicalize();
        c.q.abs() <= POINT_EQ_TOL * c.p.abs().max(1.0)
    }

    /// Scalar value p/q; infinite points return None.
    pub fn to_real(&self) -> Option<f64> {
        if self.is_infinite() {
            None
        } else {
            Some(self.p / self.q)
        }
    }

    /// Scalar value with poles mapped to +-infinity (sign of p).
    pub fn to_real_extended(&self) -> f64 {
        self.p / self.q
    }

    /// Scale-invariant distance |p1 q2 - p2 q1| / (|P1| |P2|); zero iff equal
    /// as projective points, and at most 1.
    pub fn distance(&self, other: &ProjectivePoint) -> f64 {
        let det = self.p * other.q - other.p * self.q;
        det.abs() / (self.p.hypot(self.q) * other.p.hypot(other.q))
    }

    pub fn approx_eq(&self, other: &ProjectivePoint, tol: f64) -> bool {
        self.distance(other) <= tol
    }
}

impl fmt::Display for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_real() {
            Some(x) => write!(f, "{x}"),
            None => write!(f, "inf"),
        }
    }
}

impl From<f64> for ProjectivePoint {
    fn from(x: f64) -> Self {
        ProjectivePoint::from_real(x)
    }
}

/// Determinant pairing of homogeneous pairs: the projective stand-in for the
/// difference x - y (it equals x - y when both are finite with q = 1).
pub fn det2(x: &ProjectivePoint, y: &ProjectivePoint) -> f64 {
    x.p * y.q - y.p * x.q
}

/// The Moebius action of A on a projective point: (p, q) -> (a p + b q, c p + d q).
pub fn moebius_apply(m: &Sl2Element, x: &ProjectivePoint) -> ProjectivePoint {
    ProjectivePoint {
        p: m.a * x.p + m.b * x.q,
        q: m.c * x.p + m.d * x.q,
    }
    .canonicalize()
}

/// Cross ratio (x - x1)(x2 - x3) / ((x - x2)(x1 - x3)) in determinant
/// arithmetic, so infinite arguments need no special cases.
///
/// Returns `PoleValue` exactly when x = x2, `DegenerateTriple` when any two
/// of x1, x2, x3 coincide.
pub fn cross_ratio(
    x: &ProjectivePoint,
    x1: &ProjectivePoint,
    x2: &ProjectivePoint,
    x3: &ProjectivePoint,
) -> Result<f64> {
    check_distinct(x1, x2, x3)?;
    let num = det2(x, x1) * det2(x2, x3);
    let den = det2(x, x2) * det2(x1, x3);
    ratio_or_pole(num, den, x, x2)
}

/// The second convention used for the first integral:
/// (x - x2)(x3 - x1) / ((x - x1)(x3 - x2)); equals the superposition constant
/// for the canonical triple. Pole exactly when x = x1.
pub fn cross_ratio_first_integral(
    x: &ProjectivePoint,
    x1: &ProjectivePoint,
    x2: &ProjectivePoint,
    x3: &ProjectivePoint,
) -> Result<f64> {
    check_distinct(x1, x2, x3)?;
    let num = det2(x, x2) * det2(x3, x1);
    let den = det2(x, x1) * det2(x3, x2);
    ratio_or_pole(num, den, x, x1)
}

fn check_distinct(x1: &ProjectivePoint, x2: &ProjectivePoint, x3: &ProjectivePoint) -> Result<()> {
    for (label, a, b) in [("x1,x2", x1, x2), ("x1,x3", x1, x3), ("x2,x3", x2, x3)] {
        if a.distance(b) <= POINT_EQ_TOL {
            return Err(Error::degenerate(format!("{label} coincide")));
        }
    }
    Ok(())
}

fn ratio_or_pole(
    num: f64,
    den: f64,
    x: &ProjectivePoint,
    pole_at: &ProjectivePoint,
) -> Result<f64> {
    if x.distance(pole_at) <= POINT_EQ_TOL {
        return Err(Error::PoleValue { node: None });
    }
    let scale = num.abs().max(1.0);
    if den.abs() <= f64::MIN_POSITIVE * scale {
        return Err(Error::PoleValue { node: None });
    }
    Ok(num / den)
}
