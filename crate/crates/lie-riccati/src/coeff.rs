//! Time-dependent real coefficients and the Riccati systems built from them.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Interpolation rule for sampled-table coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    Linear,
    /// Local cubic through the four surrounding samples (Catmull–Rom).
    Cubic,
}

/// A time-dependent real coefficient: constant, polynomial in t, or a
/// sampled table with interpolation.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientFn {
    Constant(f64),
    /// Coefficients in ascending powers of t.
    Polynomial(Vec<f64>),
    Table {
        times: Vec<f64>,
        values: Vec<f64>,
        interp: Interpolation,
    },
}

impl CoefficientFn {
    pub fn constant(v: f64) -> Self {
        CoefficientFn::Constant(v)
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        CoefficientFn::Polynomial(coeffs)
    }

    /// Build a table coefficient. Times must be strictly increasing, length >= 2.
    pub fn table(times: Vec<f64>, values: Vec<f64>, interp: Interpolation) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::parse("table needs at least 2 samples"));
        }
        if times.len() != values.len() {
            return Err(Error::parse("table times and values differ in length"));
        }
        if !times.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::parse("table times must be strictly increasing"));
        }
        if !times.iter().chain(values.iter()).all(|v| v.is_finite()) {
            return Err(Error::parse("table entries must be finite"));
        }
        Ok(CoefficientFn::Table {
            times,
            values,
            interp,
        })
    }

    /// Parse the coefficient mini-language:
    /// `const:<v>`, `poly:<c0>,<c1>,...`, `table:<path.csv>` (CSV header `t,value`).
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::parse(format!("coefficient spec `{spec}` has no `kind:` prefix")))?;
        match kind {
            "const" => {
                let v: f64 = rest
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(format!("bad constant `{rest}`")))?;
                Ok(CoefficientFn::Constant(v))
            }
            "poly" => {
                let coeffs: Result<Vec<f64>> = rest
                    .split(',')
                    .map(|c| {
                        c.trim()
                            .parse()
                            .map_err(|_| Error::parse(format!("bad polynomial coefficient `{c}`")))
                    })
                    .collect();
                let coeffs = coeffs?;
                if coeffs.is_empty() {
                    return Err(Error::parse("empty polynomial"));
                }
                Ok(CoefficientFn::Polynomial(coeffs))
            }
            "table" => Self::from_csv(Path::new(rest.trim())),
            other => Err(Error::parse(format!("unknown coefficient kind `{other}`"))),
        }
    }

    /// Read a `t,value` CSV into a linear-interpolation table.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)
            .map_err(|e| Error::parse(format!("cannot read `{}`: {e}", path.display())))?;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for record in reader.records() {
            let record =
                record.map_err(|e| Error::parse(format!("bad CSV row in `{}`: {e}", path.display())))?;
            if record.len() < 2 {
                return Err(Error::parse(format!(
                    "`{}`: expected columns t,value",
                    path.display()
                )));
            }
            let t: f64 = record[0]
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("bad t `{}` in `{}`", &record[0], path.display())))?;
            let v: f64 = record[1]
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("bad value `{}` in `{}`", &record[1], path.display())))?;
            times.push(t);
            values.push(v);
        }
        Self::table(times, values, Interpolation::Linear)
    }

    /// Evaluate at time t. Table evaluation outside the sample range is an
    /// error, never extrapolation.
    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            CoefficientFn::Constant(v) => Ok(*v),
            CoefficientFn::Polynomial(coeffs) => {
                Ok(coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c))
            }
            CoefficientFn::Table {
                times,
                values,
                interp,
            } => {
                let (t0, tn) = (times[0], times[times.len() - 1]);
                // Tolerate roundoff at the endpoints.
                let slack = 1e-12 * (tn - t0).max(1.0);
                if t < t0 - slack || t > tn + slack {
                    return Err(Error::DomainExceeded { t });
                }
                let t = t.clamp(t0, tn);
                let i = segment_index(times, t);
                match interp {
                    Interpolation::Linear => {
                        let s = (t - times[i]) / (times[i + 1] - times[i]);
                        Ok(values[i] + s * (values[i + 1] - values[i]))
                    }
                    Interpolation::Cubic => Ok(catmull_rom(times, values, i, t)),
                }
            }
        }
    }

    /// Derivative at time t: analytic for constants and polynomials; for
    /// tables, centered differences on the sample grid, interpolated linearly.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        match self {
            CoefficientFn::Constant(_) => Ok(0.0),
            CoefficientFn::Polynomial(coeffs) => {
                let mut acc = 0.0;
                for k in (1..coeffs.len()).rev() {
                    acc = acc * t + coeffs[k] * k as f64;
                }
                Ok(acc)
            }
            CoefficientFn::Table { times, values, .. } => {
                let (t0, tn) = (times[0], times[times.len() - 1]);
                let slack = 1e-12 * (tn - t0).max(1.0);
                if t < t0 - slack || t > tn + slack {
                    return Err(Error::DomainExceeded { t });
                }
                let t = t.clamp(t0, tn);
                let n = times.len();
                let node_slope = |i: usize| -> f64 {
                    if i == 0 {
                        (values[1] - values[0]) / (times[1] - times[0])
                    } else if i == n - 1 {
                        (values[n - 1] - values[n - 2]) / (times[n - 1] - times[n - 2])
                    } else {
                        (values[i + 1] - values[i - 1]) / (times[i + 1] - times[i - 1])
                    }
                };
                let i = segment_index(times, t);
                let s = (t - times[i]) / (times[i + 1] - times[i]);
                Ok(node_slope(i) + s * (node_slope(i + 1) - node_slope(i)))
            }
        }
    }

    /// The coefficient multiplied by -1.
    pub fn negate(&self) -> Self {
        match self {
            CoefficientFn::Constant(v) => CoefficientFn::Constant(-v),
            CoefficientFn::Polynomial(coeffs) => {
                CoefficientFn::Polynomial(coeffs.iter().map(|c| -c).collect())
            }
            CoefficientFn::Table {
                times,
                values,
                interp,
            } => CoefficientFn::Table {
                times: times.clone(),
                values: values.iter().map(|v| -v).collect(),
                interp: *interp,
            },
        }
    }

    /// True when `eval` is defined on all of [lo, hi].
    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        match self {
            CoefficientFn::Table { times, .. } => {
                let slack = 1e-12 * (times[times.len() - 1] - times[0]).max(1.0);
                times[0] - slack <= lo && hi <= times[times.len() - 1] + slack
            }
            _ => true,
        }
    }
}

impl fmt::Display for CoefficientFn {
    /// Mini-language rendering; tables print as an inline sample count.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientFn::Constant(v) => write!(f, "const:{v}"),
            CoefficientFn::Polynomial(coeffs) => {
                write!(f, "poly:")?;
                for (i, c) in coeffs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
            CoefficientFn::Table { times, .. } => write!(f, "table:<{} samples>", times.len()),
        }
    }
}

/// Index i with times[i] <= t <= times[i+1] (t already clamped to range).
fn segment_index(times: &[f64], t: f64) -> usize {
    match times.binary_search_by(|probe| probe.partial_cmp(&t).unwrap()) {
        Ok(i) => i.min(times.len() - 2),
        Err(i) => i.saturating_sub(1).min(times.len() - 2),
    }
}

/// Catmull–Rom value on segment i at time t, degrading to linear at the ends.
fn catmull_rom(times: &[f64], values: &[f64], i: usize, t: f64) -> f64 {
    let n = times.len();
    let h = times[i + 1] - times[i];
    let s = (t - times[i]) / h;
    // Endpoint tangents fall back to one-sided slopes.
    let m0 = if i == 0 {
        (values[1] - values[0]) / (times[1] - times[0])
    } else {
        (values[i + 1] - values[i - 1]) / (times[i + 1] - times[i - 1])
    };
    let m1 = if i + 2 >= n {
        (values[n - 1] - values[n - 2]) / (times[n - 1] - times[n - 2])
    } else {
        (values[i + 2] - values[i]) / (times[i + 2] - times[i])
    };
    let (y0, y1) = (values[i], values[i + 1]);
    let s2 = s * s;
    let s3 = s2 * s;
    y0 * (2.0 * s3 - 3.0 * s2 + 1.0)
        + m0 * h * (s3 - 2.0 * s2 + s)
        + y1 * (-2.0 * s3 + 3.0 * s2)
        + m1 * h * (s3 - s2)
}

/// The equation dx/dt = a0(t) + a1(t) x + a2(t) x^2 on a closed time interval.
#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiSystem {
    pub a0: CoefficientFn,
    pub a1: CoefficientFn,
    pub a2: CoefficientFn,
    pub t_min: f64,
    pub t_max: f64,
}

impl RiccatiSystem {
    pub fn new(
        a0: CoefficientFn,
        a1: CoefficientFn,
        a2: CoefficientFn,
        t_min: f64,
        t_max: f64,
    ) -> Result<Self> {
        if !(t_min < t_max) {
            return Err(Error::parse(format!("empty domain [{t_min}, {t_max}]")));
        }
        for (name, c) in [("a0", &a0), ("a1", &a1), ("a2", &a2)] {
            if !c.covers(t_min, t_max) {
                return Err(Error::parse(format!(
                    "{name} is not defined on all of [{t_min}, {t_max}]"
                )));
            }
        }
        Ok(RiccatiSystem {
            a0,
            a1,
            a2,
            t_min,
            t_max,
        })
    }

    /// Convenience constructor for constant coefficients.
    pub fn constants(a0: f64, a1: f64, a2: f64, t_min: f64, t_max: f64) -> Self {
        RiccatiSystem::new(
            CoefficientFn::constant(a0),
            CoefficientFn::constant(a1),
            CoefficientFn::constant(a2),
            t_min,
            t_max,
        )
        .expect("constant coefficients always cover the domain")
    }

    /// (a0, a1, a2) at time t.
    pub fn eval(&self, t: f64) -> Result<[f64; 3]> {
        Ok([self.a0.eval(t)?, self.a1.eval(t)?, self.a2.eval(t)?])
    }

    /// Right-hand side a0 + a1 x + a2 x^2.
    pub fn rhs(&self, t: f64, x: f64) -> Result<f64> {
        let [a0, a1, a2] = self.eval(t)?;
        Ok(a0 + x * (a1 + x * a2))
    }

    /// The system satisfied by w = 1/x: dw/dt = -(a2 + a1 w + a0 w^2).
    pub fn reciprocal(&self) -> Self {
        RiccatiSystem {
            a0: self.a2.negate(),
            a1: self.a1.negate(),
            a2: self.a0.negate(),
            t_min: self.t_min,
            t_max: self.t_max,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_eval() {
        let c = CoefficientFn::constant(2.5);
        assert_eq!(c.eval(0.0).unwrap(), 2.5);
        assert_eq!(c.eval(-100.0).unwrap(), 2.5);
        assert_eq!(c.derivative(3.0).unwrap(), 0.0);
    }

    #[test]
    fn polynomial_eval_and_derivative() {
        // 1 + 2t + 3t^2
        let p = CoefficientFn::polynomial(vec![1.0, 2.0, 3.0]);
        assert_eq!(p.eval(0.0).unwrap(), 1.0);
        assert_eq!(p.eval(2.0).unwrap(), 1.0 + 4.0 + 12.0);
        assert_eq!(p.derivative(2.0).unwrap(), 2.0 + 12.0);
    }

    #[test]
    fn table_linear_interpolation() {
        let t = CoefficientFn::table(
            vec![0.0, 1.0, 2.0],
            vec![0.0, 2.0, 0.0],
            Interpolation::Linear,
        )
        .unwrap();
        assert_eq!(t.eval(0.5).unwrap(), 1.0);
        assert_eq!(t.eval(1.5).unwrap(), 1.0);
        assert_eq!(t.eval(2.0).unwrap(), 0.0);
    }

    #[test]
    fn table_rejects_out_of_domain() {
        let t = CoefficientFn::table(vec![0.0, 1.0], vec![1.0, 1.0], Interpolation::Linear).unwrap();
        assert!(matches!(t.eval(1.5), Err(Error::DomainExceeded { .. })));
        assert!(matches!(t.eval(-0.1), Err(Error::DomainExceeded { .. })));
    }

    #[test]
    fn table_rejects_bad_times() {
        assert!(CoefficientFn::table(vec![0.0, 0.0], vec![1.0, 1.0], Interpolation::Linear).is_err());
        assert!(CoefficientFn::table(vec![0.0], vec![1.0], Interpolation::Linear).is_err());
    }

    #[test]
    fn cubic_table_reproduces_cubics_inside() {
        // Catmull-Rom is exact on quadratics away from the ends.
        let times: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let values: Vec<f64> = times.iter().map(|&t| 1.0 + t + t * t).collect();
        let c = CoefficientFn::table(times, values, Interpolation::Cubic).unwrap();
        for &t in &[0.15, 0.33, 0.55, 0.84] {
            let expected = 1.0 + t + t * t;
            assert!((c.eval(t).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn parse_mini_language() {
        assert_eq!(
            CoefficientFn::parse("const:2.5").unwrap(),
            CoefficientFn::Constant(2.5)
        );
        assert_eq!(
            CoefficientFn::parse("poly:0,0.3").unwrap(),
            CoefficientFn::Polynomial(vec![0.0, 0.3])
        );
        assert!(CoefficientFn::parse("huh:1").is_err());
        assert!(CoefficientFn::parse("const:abc").is_err());
        assert!(CoefficientFn::parse("1.5").is_err());
    }

    #[test]
    fn table_derivative_matches_slope() {
        let t = CoefficientFn::table(
            vec![0.0, 1.0, 2.0, 3.0],
            vec![0.0, 1.0, 4.0, 9.0],
            Interpolation::Linear,
        )
        .unwrap();
        // Centered differences of t^2 samples give the exact derivative at
        // interior nodes.
        assert!((t.derivative(1.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((t.derivative(2.0).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn riccati_system_eval() {
        let sys = RiccatiSystem::constants(1.0, 0.0, 1.0, 0.0, 1.0);
        assert_eq!(sys.eval(0.5).unwrap(), [1.0, 0.0, 1.0]);
        assert_eq!(sys.rhs(0.5, 2.0).unwrap(), 5.0);
    }

    #[test]
    fn reciprocal_swaps_and_negates() {
        let sys = RiccatiSystem::constants(1.0, 2.0, 3.0, 0.0, 1.0);
        let rec = sys.reciprocal();
        assert_eq!(rec.eval(0.0).unwrap(), [-3.0, -2.0, -1.0]);
    }

    #[test]
    fn domain_must_cover_tables() {
        let tab = CoefficientFn::table(vec![0.0, 0.5], vec![1.0, 1.0], Interpolation::Linear).unwrap();
        assert!(RiccatiSystem::new(
            tab,
            CoefficientFn::constant(0.0),
            CoefficientFn::constant(0.0),
            0.0,
            1.0
        )
        .is_err());
    }
}
