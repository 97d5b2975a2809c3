//! Implementations of the five subcommands.

use std::path::Path;
use std::process::ExitCode;
use std::str::FromStr;

use serde_json::json;

use lie_riccati::{
    annihilation_check, eigenfunction, first_integral, general_solution, hermite,
    hermite_at_zero, integrate_linear, k1_even, k1_odd, log_derivative, max_riccati_residual,
    riccati_from_linear, solve_wn, spectrum_scan, superpose as superpose_solutions,
    verify_wn_relation, CoefficientFn, Error as LibError, FactorizationOrdering,
    FundamentalTriple, LinearSecondOrder, ProjectivePoint, RiccatiSystem, TimeGrid, Trajectory,
    DEFAULT_TOL,
};

use crate::emit;
use crate::{CliError, ReduceArgs, SolveArgs, SpectrumArgs, SuperposeArgs, VerifyArgs};

/// Parse a `start:stop:nodes` grid specification.
fn parse_grid(spec: &str) -> Result<TimeGrid, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::config(format!(
            "grid spec `{spec}` must be start:stop:nodes"
        )));
    }
    let start: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::config(format!("bad grid start `{}`", parts[0])))?;
    let stop: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| CliError::config(format!("bad grid stop `{}`", parts[1])))?;
    let nodes: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| CliError::config(format!("bad grid node count `{}`", parts[2])))?;
    if nodes < 2 {
        return Err(CliError::config("grid needs at least 2 nodes"));
    }
    TimeGrid::uniform(start, stop, nodes).map_err(|e| CliError::config(e.to_string()))
}

/// Parse a point on the extended real line: a float, or `inf`
/// (case-insensitive, optional sign — the projective line has one infinity).
fn parse_point(spec: &str, what: &str) -> Result<ProjectivePoint, CliError> {
    let s = spec.trim();
    let bare = s.strip_prefix(['+', '-']).unwrap_or(s);
    if bare.eq_ignore_ascii_case("inf") || bare.eq_ignore_ascii_case("infinity") {
        return Ok(ProjectivePoint::infinity());
    }
    s.parse::<f64>()
        .map(ProjectivePoint::from_real)
        .map_err(|_| CliError::config(format!("{what}: expected a float or `inf`, got `{spec}`")))
}

/// Tolerance precedence: explicit flag, then LIE_RICCATI_TOL, then the
/// command's default.
fn resolve_tol(flag: Option<f64>, default: f64) -> Result<f64, CliError> {
    let tol = if let Some(t) = flag {
        t
    } else if let Ok(s) = std::env::var("LIE_RICCATI_TOL") {
        s.trim().parse().map_err(|_| {
            CliError::config(format!("LIE_RICCATI_TOL must be a float, got `{s}`"))
        })?
    } else {
        default
    };
    if !tol.is_finite() || !(tol > 0.0) {
        return Err(CliError::config(format!(
            "tolerance must be a positive float, got {tol}"
        )));
    }
    Ok(tol)
}

fn coefficient(spec: &str, name: &str) -> Result<CoefficientFn, CliError> {
    CoefficientFn::parse(spec).map_err(|e| CliError::config(format!("--{name}: {e}")))
}

fn riccati_system(
    a0: &str,
    a1: &str,
    a2: &str,
    grid: &TimeGrid,
) -> Result<RiccatiSystem, CliError> {
    RiccatiSystem::new(
        coefficient(a0, "a0")?,
        coefficient(a1, "a1")?,
        coefficient(a2, "a2")?,
        grid.start(),
        grid.stop(),
    )
    .map_err(|e| CliError::config(e.to_string()))
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::config(format!("cannot create `{}`: {e}", dir.display())))
}

const ALL_ORDERINGS: [FactorizationOrdering; 6] = [
    FactorizationOrdering::I,
    FactorizationOrdering::II,
    FactorizationOrdering::III,
    FactorizationOrdering::IV,
    FactorizationOrdering::V,
    FactorizationOrdering::VI,
];

fn parse_orderings(spec: &str) -> Result<Vec<FactorizationOrdering>, CliError> {
    if spec.trim().eq_ignore_ascii_case("all") {
        Ok(ALL_ORDERINGS.to_vec())
    } else {
        FactorizationOrdering::from_str(spec)
            .map(|o| vec![o])
            .map_err(|e| CliError::config(e.to_string()))
    }
}

/// `solve`: integrate the factorization coordinates of every requested
/// ordering, write per-ordering coordinate and trajectory CSVs, and a JSON
/// summary with the six-way disagreement and any per-ordering blow-ups.
///
/// Blow-up of *some* orderings under `--ordering all` is a reportable
/// outcome, not a failure; an explicitly requested single ordering that
/// fails, or all orderings failing, exits 2.
pub fn solve(args: SolveArgs) -> Result<ExitCode, CliError> {
    let grid = parse_grid(&args.t)?;
    let x0 = parse_point(&args.x0, "--x0")?;
    let tol = resolve_tol(args.tol, DEFAULT_TOL)?;
    let orderings = parse_orderings(&args.ordering)?;
    let explicit_single = orderings.len() == 1;
    let sys = riccati_system(&args.a0, &args.a1, &args.a2, &grid)?;
    ensure_out_dir(&args.out_dir)?;

    let mut files: Vec<String> = Vec::new();
    let mut attempted: Vec<String> = Vec::new();
    let mut succeeded: Vec<(FactorizationOrdering, Trajectory)> = Vec::new();
    let mut blow_ups: Vec<(String, String)> = Vec::new();
    for ord in &orderings {
        attempted.push(ord.to_string());
        let outcome = solve_wn(*ord, &sys, &grid, tol)
            .and_then(|coords| general_solution(&coords, &x0).map(|traj| (coords, traj)));
        match outcome {
            Ok((coords, traj)) => {
                let coords_name = format!("coords_{ord}.csv");
                let traj_name = format!("trajectory_{ord}.csv");
                emit::write_csv(
                    &args.out_dir.join(&coords_name),
                    &["t", "c_L0", "c_L1", "c_L2"],
                    emit::coords_rows(&coords),
                )?;
                emit::write_csv(
                    &args.out_dir.join(&traj_name),
                    &["t", "p", "q", "x_repr"],
                    emit::trajectory_rows(&traj),
                )?;
                files.push(coords_name);
                files.push(traj_name);
                succeeded.push((*ord, traj));
            }
            Err(e) => blow_ups.push((ord.to_string(), e.to_string())),
        }
    }

    let mut max_disagreement: Option<f64> = None;
    for (i, (_, ti)) in succeeded.iter().enumerate() {
        for (_, tj) in &succeeded[i + 1..] {
            for node in 0..grid.len() {
                let d = ti.state(node).distance(tj.state(node));
                max_disagreement = Some(max_disagreement.unwrap_or(0.0).max(d));
            }
        }
    }

    files.push("summary.json".to_string());
    let summary = json!({
        "command": "solve",
        "grid": {"start": grid.start(), "stop": grid.stop(), "nodes": grid.len()},
        "x0": emit::fmt_point(&x0),
        "tolerance": tol,
        "orderings_attempted": attempted,
        "orderings_succeeded": succeeded.iter().map(|(o, _)| o.to_string()).collect::<Vec<_>>(),
        "blow_ups": blow_ups
            .iter()
            .map(|(o, e)| json!({"ordering": o, "error": e}))
            .collect::<Vec<_>>(),
        "max_disagreement": max_disagreement,
        "files": files,
    });
    emit::write_json(&args.out_dir.join("summary.json"), &summary)?;

    if succeeded.is_empty() || (explicit_single && !blow_ups.is_empty()) {
        let (ord, msg) = &blow_ups[0];
        return Err(CliError::run(format!("ordering {ord} failed: {msg}")));
    }
    Ok(ExitCode::SUCCESS)
}

/// `superpose`: integrate three particular solutions, combine them with the
/// constant k, and report the first-integral drift of the result.
pub fn superpose(args: SuperposeArgs) -> Result<ExitCode, CliError> {
    let grid = parse_grid(&args.t)?;
    let tol = resolve_tol(args.tol, DEFAULT_TOL)?;
    let k = parse_point(&args.k, "--k")?;
    let p1 = parse_point(&args.x1, "--x1")?;
    let p2 = parse_point(&args.x2, "--x2")?;
    let p3 = parse_point(&args.x3, "--x3")?;
    let sys = riccati_system(&args.a0, &args.a1, &args.a2, &grid)?;
    ensure_out_dir(&args.out_dir)?;

    let triple = FundamentalTriple::integrate(&sys, [&p1, &p2, &p3], &grid, tol)
        .map_err(|e| CliError::run(e.to_string()))?;
    let x = superpose_solutions(&triple, &k).map_err(|e| CliError::run(e.to_string()))?;
    emit::write_csv(
        &args.out_dir.join("superposed.csv"),
        &["t", "p", "q", "x_repr"],
        emit::trajectory_rows(&x),
    )?;

    // The cross-ratio against the triple; constant along the flow.  When k
    // collides with a basis solution the integral is a pole (a valid
    // outcome, reported as null).
    let (fi_value, fi_drift) = match first_integral(&x, &triple) {
        Ok(values) => {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &v in &values {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            (Some(values[0]), Some(hi - lo))
        }
        Err(LibError::PoleValue { .. }) => (None, None),
        Err(e) => return Err(CliError::run(e.to_string())),
    };

    let summary = json!({
        "command": "superpose",
        "grid": {"start": grid.start(), "stop": grid.stop(), "nodes": grid.len()},
        "k": emit::fmt_point(&k),
        "initial_data": [emit::fmt_point(&p1), emit::fmt_point(&p2), emit::fmt_point(&p3)],
        "tolerance": tol,
        "first_integral": {"value": fi_value, "drift": fi_drift},
        "near_degenerate": triple.near_degenerate(),
        "files": ["superposed.csv", "summary.json"],
    });
    emit::write_json(&args.out_dir.join("summary.json"), &summary)?;
    Ok(ExitCode::SUCCESS)
}

/// `reduce`: integrate u'' + b u' + c u = 0, project u to x = u'/u, and
/// check the projection against the reduced Riccati equation.
pub fn reduce(args: ReduceArgs) -> Result<ExitCode, CliError> {
    let grid = parse_grid(&args.t)?;
    let tol = resolve_tol(args.tol, DEFAULT_TOL)?;
    let lin = LinearSecondOrder::new(
        coefficient(&args.b, "b")?,
        coefficient(&args.c, "c")?,
        grid.start(),
        grid.stop(),
    )
    .map_err(|e| CliError::config(e.to_string()))?;
    ensure_out_dir(&args.out_dir)?;

    let sol = integrate_linear(&lin, (args.u0, args.du0), &grid, tol)
        .map_err(|e| CliError::run(e.to_string()))?;
    let linear_rows: Vec<Vec<String>> = grid
        .nodes()
        .iter()
        .zip(sol.u().iter().zip(sol.du()))
        .map(|(&t, (&u, &du))| vec![emit::fmt_f64(t), emit::fmt_f64(u), emit::fmt_f64(du)])
        .collect();
    emit::write_csv(&args.out_dir.join("linear.csv"), &["t", "u", "du"], linear_rows)?;

    let x = log_derivative(&sol).map_err(|e| CliError::run(e.to_string()))?;
    emit::write_csv(
        &args.out_dir.join("riccati_projection.csv"),
        &["t", "p", "q", "x_repr"],
        emit::trajectory_rows(&x),
    )?;
    let max_residual = max_riccati_residual(&riccati_from_linear(&lin), &x)
        .map_err(|e| CliError::run(e.to_string()))?;

    let summary = json!({
        "command": "reduce",
        "grid": {"start": grid.start(), "stop": grid.stop(), "nodes": grid.len()},
        "initial": {"u0": args.u0, "du0": args.du0},
        "tolerance": tol,
        "max_riccati_residual": max_residual,
        "files": ["linear.csv", "riccati_projection.csv", "summary.json"],
    });
    emit::write_json(&args.out_dir.join("summary.json"), &summary)?;
    Ok(ExitCode::SUCCESS)
}

/// `spectrum`: scan for eigenvalues; the JSON report goes to stdout and to
/// spectrum.json.  An interval with no eigenvalue still emits the report
/// (empty list) and exits 2.
pub fn spectrum(args: SpectrumArgs) -> Result<ExitCode, CliError> {
    let (lo, hi) = args
        .lambda_range
        .split_once(',')
        .and_then(|(a, b)| Some((a.trim().parse::<f64>().ok()?, b.trim().parse::<f64>().ok()?)))
        .ok_or_else(|| {
            CliError::config(format!(
                "--lambda-range must be `lo,hi`, got `{}`",
                args.lambda_range
            ))
        })?;
    let tol = resolve_tol(args.tol, 1e-8)?;
    ensure_out_dir(&args.out_dir)?;

    let emit_report = |eigenvalues: &[(f64, usize)], files: &[String]| -> Result<(), CliError> {
        let doc = json!({
            "eigenvalues": eigenvalues
                .iter()
                .map(|(lambda, nodes)| json!({"lambda": lambda, "nodes": nodes}))
                .collect::<Vec<_>>(),
            "interval": [lo, hi],
            "xi_max": args.xi_max,
            "tolerance": tol,
            "files": files,
        });
        print!("{}", emit::json_text(&doc));
        emit::write_json(&args.out_dir.join("spectrum.json"), &doc)
    };

    match spectrum_scan(lo, hi, args.xi_max, tol) {
        Ok(result) => {
            let mut files = vec!["spectrum.json".to_string()];
            if args.emit_eigenfunction {
                let plot_grid = TimeGrid::uniform(-4.0, 4.0, 801)
                    .expect("fixed plot grid is valid");
                for &(_, nodes) in &result.eigenvalues {
                    let psi = eigenfunction(nodes, &plot_grid);
                    let name = format!("eigenfunction_{nodes}.csv");
                    let rows = plot_grid
                        .nodes()
                        .iter()
                        .zip(&psi)
                        .map(|(&xi, &v)| vec![emit::fmt_f64(xi), emit::fmt_f64(v)]);
                    emit::write_csv(&args.out_dir.join(&name), &["xi", "psi"], rows)?;
                    files.push(name);
                }
            }
            emit_report(&result.eigenvalues, &files)?;
            Ok(ExitCode::SUCCESS)
        }
        Err(LibError::NoSignChange { .. }) => {
            emit_report(&[], &["spectrum.json".to_string()])?;
            Err(CliError::run(format!("no eigenvalue in [{lo}, {hi}]")))
        }
        Err(e) => Err(CliError::run(e.to_string())),
    }
}

/// Deterministic 53-bit uniform stream (splitmix64) so the verify suites
/// need no external randomness and identical configs stay byte-identical.
struct SampleStream(u64);

impl SampleStream {
    fn next_unit(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64
    }

    fn in_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_unit()
    }
}

struct BuiltinSystem {
    name: &'static str,
    sys: RiccatiSystem,
    grid: TimeGrid,
}

/// The named systems the verify suites run on: `tan` is the unit-coefficient
/// equation whose solutions are shifted tangents (one pole inside the
/// window), `poly` has a time-dependent linear coefficient.
fn builtin_systems(filter: Option<&str>) -> Result<Vec<BuiltinSystem>, CliError> {
    let mut all = vec![
        BuiltinSystem {
            name: "tan",
            sys: RiccatiSystem::new(
                CoefficientFn::constant(1.0),
                CoefficientFn::constant(0.0),
                CoefficientFn::constant(1.0),
                0.0,
                3.0,
            )
            .expect("constant coefficients cover any domain"),
            grid: TimeGrid::uniform(0.0, 3.0, 1001).expect("fixed grid is valid"),
        },
        BuiltinSystem {
            name: "poly",
            sys: RiccatiSystem::new(
                CoefficientFn::constant(1.0),
                CoefficientFn::polynomial(vec![0.0, 0.3]),
                CoefficientFn::constant(0.5),
                0.0,
                1.0,
            )
            .expect("polynomial coefficients cover any domain"),
            grid: TimeGrid::uniform(0.0, 1.0, 1001).expect("fixed grid is valid"),
        },
    ];
    if let Some(name) = filter {
        all.retain(|s| s.name == name);
        if all.is_empty() {
            return Err(CliError::config(format!(
                "unknown system `{name}` (expected tan or poly)"
            )));
        }
    }
    Ok(all)
}

struct PropertyRow {
    name: &'static str,
    detail: String,
    residual: f64,
    tolerance: f64,
}

impl PropertyRow {
    fn pass(&self) -> bool {
        self.residual <= self.tolerance
    }

    fn to_json(&self) -> serde_json::Value {
        json!({
            "name": self.name,
            "detail": self.detail,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "pass": self.pass(),
        })
    }
}

/// `verify`: run the selected invariant suites, print and write the JSON
/// report, exit 0 iff every property passes (3 otherwise).
pub fn verify(args: VerifyArgs) -> Result<ExitCode, CliError> {
    let tol = resolve_tol(args.tol, DEFAULT_TOL)?;
    let orderings = match &args.ordering {
        Some(spec) => parse_orderings(spec)?,
        None => ALL_ORDERINGS.to_vec(),
    };
    let selected = args.property.trim().to_ascii_lowercase();
    let known = ["all", "wnrel", "cross-ratio", "annihilation", "hermite"];
    if !known.contains(&selected.as_str()) {
        return Err(CliError::config(format!(
            "unknown property `{}` (expected one of {})",
            args.property,
            known.join(", ")
        )));
    }
    let want = |name: &str| selected == "all" || selected == name;
    ensure_out_dir(&args.out_dir)?;

    let mut rows: Vec<PropertyRow> = Vec::new();

    if want("wnrel") {
        // The factorization relation, evaluated at deterministic random
        // (t, coordinate) samples: an exact coordinate system leaves only
        // roundoff.
        for system in builtin_systems(args.system.as_deref())? {
            for (oi, ord) in orderings.iter().enumerate() {
                let mut stream = SampleStream(0x5EED_0000 + oi as u64);
                let mut ts = Vec::with_capacity(100);
                let mut cs = Vec::with_capacity(100);
                for _ in 0..100 {
                    ts.push(stream.in_range(system.grid.start(), system.grid.stop()));
                    cs.push([
                        stream.in_range(-1.5, 1.5),
                        stream.in_range(-1.5, 1.5),
                        stream.in_range(-1.5, 1.5),
                    ]);
                }
                let residual = verify_wn_relation(*ord, &system.sys, &ts, &cs)
                    .map_err(|e| CliError::run(e.to_string()))?;
                rows.push(PropertyRow {
                    name: "wnrel",
                    detail: format!("ordering {ord}, system {}", system.name),
                    residual,
                    tolerance: 1e-10,
                });
            }
        }
    }

    if want("cross-ratio") {
        // Constancy of the cross-ratio first integral along a superposed
        // solution of each built-in system.
        for system in builtin_systems(args.system.as_deref())? {
            let triple = FundamentalTriple::integrate(
                &system.sys,
                [
                    &ProjectivePoint::infinity(),
                    &ProjectivePoint::from_real(0.0),
                    &ProjectivePoint::from_real(1.0),
                ],
                &system.grid,
                tol,
            )
            .map_err(|e| CliError::run(e.to_string()))?;
            let x = superpose_solutions(&triple, &ProjectivePoint::from_real(0.3))
                .map_err(|e| CliError::run(e.to_string()))?;
            let values =
                first_integral(&x, &triple).map_err(|e| CliError::run(e.to_string()))?;
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &v in &values {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            rows.push(PropertyRow {
                name: "cross-ratio",
                detail: format!("system {}, k = 0.3", system.name),
                residual: hi - lo,
                tolerance: 1e-7,
            });
        }
    }

    if want("annihilation") {
        // The superposition-rule function is annihilated by the three
        // diagonal vector fields; checked by central differences at 100
        // deterministic well-separated points.
        let mut stream = SampleStream(0x5EED_AAAA);
        let mut samples: Vec<[f64; 4]> = Vec::with_capacity(100);
        while samples.len() < 100 {
            let cand = [
                stream.in_range(-2.0, 2.0),
                stream.in_range(-2.0, 2.0),
                stream.in_range(-2.0, 2.0),
                stream.in_range(-2.0, 2.0),
            ];
            let mut separated = true;
            for i in 0..4 {
                for j in i + 1..4 {
                    if (cand[i] - cand[j]).abs() < 0.25 {
                        separated = false;
                    }
                }
            }
            if separated {
                samples.push(cand);
            }
        }
        let residual = annihilation_check(&samples);
        rows.push(PropertyRow {
            name: "annihilation",
            detail: "100 generic points, central differences h = 1e-5".to_string(),
            residual: residual.max(),
            tolerance: 1e-6,
        });
    }

    if want("hermite") {
        // Telescoping route to the second derivative vs the eigenvalue
        // identity, relative error over n <= 12.
        let mut worst = 0.0_f64;
        for n in 2..=12_usize {
            for &xi in &[-2.6, -1.1, -0.3, 0.0, 0.4, 1.2, 2.7] {
                let h = hermite(n, xi);
                let h2 = hermite(n - 2, xi).value;
                let lambda = (2 * n + 1) as f64;
                let lhs = 4.0 * (n as f64) * (n as f64 - 1.0) * h2 - h.value;
                let rhs = -lambda * h.value + 2.0 * xi * h.derivative;
                let scale = lhs.abs().max(rhs.abs()).max(1.0);
                worst = worst.max((lhs - rhs).abs() / scale);
            }
        }
        rows.push(PropertyRow {
            name: "hermite",
            detail: "telescoping second-derivative identity, n <= 12".to_string(),
            residual: worst,
            tolerance: 1e-8,
        });
        // Exactness of the integer normalization constants against the
        // integer Hermite recurrence at 0.
        let mut exact = true;
        for n in (0..=20_usize).step_by(2) {
            let h0 = hermite_at_zero(n).map_err(|e| CliError::run(e.to_string()))?;
            exact &= k1_even(n).map_err(|e| CliError::run(e.to_string()))? == h0 * h0;
        }
        for n in (1..=19_usize).step_by(2) {
            let h0 = hermite_at_zero(n - 1).map_err(|e| CliError::run(e.to_string()))?;
            exact &= k1_odd(n).map_err(|e| CliError::run(e.to_string()))? == 2 * n as i128 * h0;
        }
        rows.push(PropertyRow {
            name: "hermite-k1",
            detail: "integer normalization constants, n <= 20".to_string(),
            residual: if exact { 0.0 } else { 1.0 },
            tolerance: 0.5,
        });
    }

    let all_pass = rows.iter().all(PropertyRow::pass);
    let doc = json!({
        "command": "verify",
        "properties": rows.iter().map(PropertyRow::to_json).collect::<Vec<_>>(),
        "all_pass": all_pass,
    });
    print!("{}", emit::json_text(&doc));
    emit::write_json(&args.out_dir.join("verify.json"), &doc)?;
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}
