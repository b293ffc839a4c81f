//! One function per subcommand. Each validates its inputs before building
//! any grid and returns the report in both formats.

use std::path::Path;

use serde_json::{json, Map, Value};

use polyharm_core::estimate::{falsify_estimate, verify_estimate, LemmaParams};
use polyharm_core::exponents::{classify_regime, compute_exponents, run_bootstrap};
use polyharm_core::green::KernelCase;
use polyharm_core::singular::{construct_counterexample, growth_factors, SingularLevel, SingularSystem};
use polyharm_core::spectral::{principal_eigenpair, verify_sandwich};
use polyharm_core::{
    BallProblem, BootstrapRules, BootstrapTrace, BoundCase, ConeRegion, EstimateCase, EstimateReport, ExponentParams,
    Grading, GreenKernel, GreenOperator, OperatorSource, Point, Regime, RhsProfile,
};

use crate::cache::{GridCache, Workspace};
use crate::cli::{
    BootstrapArgs, Cli, Command, EigenArgs, EstimateArgs, EstimateKind, Exponents, Format, GreenArgs, SingularArgs,
    SolveArgs,
};
use crate::format::{f17, num, nums, to_csv};
use crate::{dump, suite, Failure};

/// A report in its canonical JSON form and the derived CSV table.
pub struct Report {
    pub json: Value,
    pub csv: String,
    /// Human-readable companion written to stderr.
    pub note: Option<String>,
    /// Criteria that failed (suite only).
    pub failed: Vec<String>,
}

impl Report {
    pub fn new(json: Value, csv: String) -> Self {
        Self { json, csv, note: None, failed: Vec::new() }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => crate::format::to_json(&self.json),
            Format::Csv => self.csv.clone(),
        }
    }
}

pub fn workspace(cli: &Cli) -> Workspace {
    let grids = if cli.no_cache {
        None
    } else {
        Some(match &cli.cache_dir {
            Some(d) => GridCache::new(d),
            None => GridCache::from_env(),
        })
    };
    let mut ws = Workspace::new(grids);
    ws.operators = polyharm_core::OperatorCache::new(cli.budget_mb << 20);
    ws
}

pub fn run(cli: &Cli) -> Result<Report, Failure> {
    let mut ws = workspace(cli);
    match &cli.command {
        Command::Regimes(a) => regimes(a),
        Command::Bootstrap(a) => bootstrap(a),
        Command::Green(a) => green(a, cli.seed, &mut ws),
        Command::Solve(a) => solve(a, &mut ws),
        Command::Eigen(a) => eigen(a, &mut ws),
        Command::Estimate(a) => estimate(a, &mut ws),
        Command::Singular(a) => singular(a, &mut ws),
        Command::Suite(a) => {
            let levels = parse_levels(&a.levels)?;
            Ok(suite::run(&mut ws, cli.seed, &levels))
        }
    }
}

pub fn parse_levels(s: &str) -> Result<Vec<u32>, Failure> {
    let levels = s
        .split(',')
        .map(|t| t.trim().parse::<u32>().map_err(|_| Failure::Input(format!("bad level `{t}` in `{s}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Failure::Input(format!("levels must increase: `{s}`")));
    }
    Ok(levels)
}

fn parse_point(s: &str, n: usize) -> Result<Point, Failure> {
    let c = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Failure::Input(format!("bad coordinate `{t}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    if c.len() != n {
        return Err(Failure::Input(format!("point `{s}` needs {n} coordinates")));
    }
    Ok(Point::from_slice(&c))
}

fn require(v: Option<f64>, name: &str, case: &str) -> Result<f64, Failure> {
    v.ok_or_else(|| Failure::Input(format!("--{name} is required for {case}")))
}

fn row(values: &[f64]) -> Vec<String> {
    values.iter().map(|&v| f17(v)).collect()
}

fn given_order(e: &ExponentParams) -> (f64, f64) {
    if e.swapped {
        (e.beta, e.alpha)
    } else {
        (e.alpha, e.beta)
    }
}

fn regimes(a: &Exponents) -> Result<Report, Failure> {
    let problem = BallProblem::new(a.n, a.m)?;
    let e = compute_exponents(a.p, a.q, a.m)?;
    let regime = classify_regime(&e, problem.n(), problem.m());
    let (alpha, beta) = given_order(&e);
    let json = json!({
        "p": num(a.p), "q": num(a.q), "m": a.m, "n": a.n,
        "alpha": num(alpha), "beta": num(beta),
        "n_minus_m": a.n as i64 - a.m as i64,
        "regime": regime.name(),
    });
    let csv = to_csv(
        &["p", "q", "m", "n", "alpha", "beta", "regime"],
        &[vec![f17(a.p), f17(a.q), a.m.to_string(), a.n.to_string(), f17(alpha), f17(beta), regime.name().into()]],
    );
    Ok(Report::new(json, csv))
}

pub fn trace_json(t: &BootstrapTrace, rules: &BootstrapRules) -> Value {
    let rounds: Vec<Value> = t
        .rounds
        .iter()
        .map(|r| {
            json!({
                "k": num(r.k), "eta": num(r.eta), "rho": num(r.rho),
                "k1": num(r.k1), "k2": num(r.k2.unwrap_or(f64::INFINITY)),
            })
        })
        .collect();
    json!({
        "inputs": {
            "p": num(t.p), "q": num(t.q), "m": t.m, "n": t.n, "swapped": t.swapped,
            "rules": {
                "initial_fraction": num(rules.initial_fraction),
                "rho_position": num(rules.rho_position),
                "k1_position": num(rules.k1_position),
                "k2_position": num(rules.k2_position),
                "max_rounds": rules.max_rounds,
            },
        },
        "epsilon": num(t.epsilon),
        "initial_k": num(t.initial_k),
        "threshold": num(t.threshold()),
        "rounds": rounds,
        "k_bar": num(t.k_bar),
        "k1_final": num(t.k1_final),
        "k2_final": num(t.k2_final.unwrap_or(f64::INFINITY)),
        "terminated": t.terminated,
    })
}

fn bootstrap(a: &BootstrapArgs) -> Result<Report, Failure> {
    let e = &a.exponents;
    BallProblem::new(e.n, e.m)?;
    let rules = BootstrapRules {
        initial_fraction: a.initial_fraction,
        rho_position: a.rho_position,
        k1_position: a.k1_position,
        k2_position: a.k2_position,
        max_rounds: a.max_rounds,
    };
    let t = run_bootstrap(e.p, e.q, e.m, e.n, &rules)?;
    let header = ["round", "k", "eta", "rho", "k1", "k2"];
    let mut rows: Vec<Vec<String>> = t
        .rounds
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let mut v = vec![j.to_string()];
            v.extend(row(&[r.k, r.eta, r.rho, r.k1, r.k2.unwrap_or(f64::INFINITY)]));
            v
        })
        .collect();
    let mut last = vec!["final".to_string(), f17(t.k_bar), String::new(), String::new()];
    last.extend(row(&[t.k1_final, t.k2_final.unwrap_or(f64::INFINITY)]));
    rows.push(last);
    let mut table = format!(
        "{:>6} {:>12} {:>12} {:>12} {:>12} {:>12}\n",
        header[0], header[1], header[2], header[3], header[4], header[5]
    );
    for r in &rows {
        let cell =
            |i: usize| r[i].parse::<f64>().map(|v| format!("{v:>12.6}")).unwrap_or_else(|_| format!("{:>12}", r[i]));
        table.push_str(&format!("{:>6} {} {} {} {} {}\n", r[0], cell(1), cell(2), cell(3), cell(4), cell(5)));
    }
    let mut rep = Report::new(trace_json(&t, &rules), to_csv(&header, &rows));
    rep.note = Some(table);
    Ok(rep)
}

fn kernel_case_name(c: KernelCase) -> &'static str {
    match c {
        KernelCase::Subcritical => "subcritical",
        KernelCase::Critical => "critical",
        KernelCase::Supercritical => "supercritical",
    }
}

fn green(a: &GreenArgs, seed: u64, ws: &mut Workspace) -> Result<Report, Failure> {
    let problem = BallProblem::new(a.n, a.m)?;
    let kernel = GreenKernel::new(&problem)?;
    let pair = match (&a.x, &a.y) {
        (Some(x), Some(y)) => Some((parse_point(x, a.n)?, parse_point(y, a.n)?)),
        _ => None,
    };
    let bound = BoundCase::for_case(kernel.case());
    let lb = kernel.verify_lower_bound(bound, a.pairs, a.densities, seed)?;
    let mut json = json!({
        "n": a.n, "m": a.m,
        "kernel_case": kernel_case_name(kernel.case()),
        "normalization": num(kernel.normalization()),
        "seed": seed,
        "lower_bound": {
            "case": bound.name(),
            "sample_counts": lb.sample_counts,
            "per_density_min": nums(&lb.per_level_min),
            "min_ratio": num(lb.min_ratio),
            "last_variation": num(lb.last_variation()),
        },
    });
    if let Some((x, y)) = pair {
        let g = kernel.eval(&x, &y)?;
        json["value"] = json!({ "x": nums(&x.0[..a.n]), "y": nums(&y.0[..a.n]), "g": num(g) });
    }
    if let Some(path) = &a.dump {
        let op = ws.operator(&problem, a.level, Grading::default())?;
        dump::write_kernel(path, &op)?;
        json["dump"] = json!({ "path": path.display().to_string(), "level": a.level, "nodes": op.len() });
    }
    let rows: Vec<Vec<String>> = lb
        .sample_counts
        .iter()
        .zip(&lb.per_level_min)
        .enumerate()
        .map(|(i, (c, v))| vec![i.to_string(), c.to_string(), f17(*v)])
        .collect();
    Ok(Report::new(json, to_csv(&["density", "pairs", "min_ratio"], &rows)))
}

/// `(1 - |x|²)^m / Π_{j<m} 4 (j+1)(n/2 + j)`, the solution for `f ≡ 1`.
pub fn constant_rhs_solution(n: usize, m: usize, x: &Point) -> f64 {
    let c: f64 = (0..m).map(|j| 4.0 * (j as f64 + 1.0) * (n as f64 / 2.0 + j as f64)).product();
    (1.0 - x.norm_sq()).powi(m as i32) / c
}

/// Largest nodal relative error against [`constant_rhs_solution`].
pub fn constant_rhs_sup_error(op: &GreenOperator, u: &polyharm_core::SampledField) -> f64 {
    let problem = op.grid().problem();
    op.grid()
        .nodes()
        .iter()
        .zip(u.values())
        .map(|(x, v)| (v / constant_rhs_solution(problem.n(), problem.m(), x) - 1.0).abs())
        .fold(0.0, f64::max)
}

fn solve(a: &SolveArgs, ws: &mut Workspace) -> Result<Report, Failure> {
    let problem = BallProblem::new(a.n, a.m)?;
    let profile = RhsProfile::from_name(&a.rhs).ok_or_else(|| Failure::Input(format!("unknown rhs `{}`", a.rhs)))?;
    if !(a.grading >= 1.0 && a.grading.is_finite()) {
        return Err(Failure::Input(format!("grading exponent must be at least 1, got {}", a.grading)));
    }
    let op = ws.operator(&problem, a.level, Grading::boundary(a.grading))?;
    let f = profile.sample(&op)?;
    let u = op.apply(&f)?;
    let u0 = op.potential_at(&Point::ORIGIN, &f)?;
    let mut json = json!({
        "n": a.n, "m": a.m, "rhs": profile.name(), "level": a.level,
        "grading": num(a.grading), "nodes": op.len(),
        "u0": num(u0), "max_u": num(u.max_abs()),
    });
    let mut header = vec!["n", "m", "rhs", "level", "nodes", "u0", "max_u"];
    let mut line = vec![
        a.n.to_string(),
        a.m.to_string(),
        profile.name().into(),
        a.level.to_string(),
        op.len().to_string(),
        f17(u0),
        f17(u.max_abs()),
    ];
    if profile == RhsProfile::Constant {
        let exact = constant_rhs_solution(a.n, a.m, &Point::ORIGIN);
        let rel = u0 / exact - 1.0;
        let sup = constant_rhs_sup_error(&op, &u);
        json["exact"] = json!({ "u0": num(exact), "rel_error_u0": num(rel), "sup_rel_error": num(sup) });
        header.extend(["exact_u0", "rel_error_u0", "sup_rel_error"]);
        line.extend(row(&[exact, rel, sup]));
    }
    if let Some(path) = &a.dump {
        dump::write_field(path, &op, &u, "u")?;
        json["dump"] = json!(path.display().to_string());
    }
    Ok(Report::new(json, to_csv(&header, &[line])))
}

fn eigen(a: &EigenArgs, ws: &mut Workspace) -> Result<Report, Failure> {
    let problem = BallProblem::new(a.n, a.m)?;
    if !(a.tol > 0.0 && a.residual_tol > 0.0) || a.max_iters == 0 {
        return Err(Failure::Input("tolerances and max-iters must be positive".into()));
    }
    let op = ws.operator(&problem, a.level, Grading::default())?;
    let pair = principal_eigenpair(&op, a.tol, a.residual_tol, a.max_iters)?;
    let (c1, c2) = verify_sandwich(&pair, &op)?;
    let mut json = json!({
        "n": a.n, "m": a.m, "level": a.level, "nodes": op.len(),
        "lambda": num(pair.eigenvalue), "iterations": pair.iterations,
        "residual": num(pair.residual), "c1": num(c1), "c2": num(c2),
    });
    if let Some(path) = &a.dump {
        dump::write_field(path, &op, &pair.eigenfunction, "phi")?;
        json["dump"] = json!(path.display().to_string());
    }
    let csv = to_csv(
        &["n", "m", "level", "nodes", "lambda", "iterations", "residual", "c1", "c2"],
        &[vec![
            a.n.to_string(),
            a.m.to_string(),
            a.level.to_string(),
            op.len().to_string(),
            f17(pair.eigenvalue),
            pair.iterations.to_string(),
            f17(pair.residual),
            f17(c1),
            f17(c2),
        ]],
    );
    Ok(Report::new(json, csv))
}

fn opt(v: Option<f64>) -> Value {
    v.map_or(Value::Null, num)
}

pub fn estimate_json(r: &EstimateReport) -> Value {
    let levels: Vec<Value> = r
        .levels
        .iter()
        .map(|l| {
            let per: Map<String, Value> = r.rhs.iter().cloned().zip(l.per_rhs.iter().map(|&v| num(v))).collect();
            json!({ "level": l.level, "nodes": l.nodes, "ratio": num(l.ratio), "per_rhs": per })
        })
        .collect();
    let p = &r.params;
    let mut json = json!({
        "estimate_id": r.estimate_id,
        "params": {
            "n": p.n, "m": p.m, "p": opt(p.p), "q": opt(p.q), "k": opt(p.k),
            "theta": opt(p.theta), "alpha": opt(p.alpha),
        },
        "rhs": r.rhs,
        "levels": levels,
        "trend": r.trend.name(),
        "empirical_C": opt(r.empirical_c),
    });
    if !r.data_norms.is_empty() {
        json["data_norms"] = nums(&r.data_norms);
        json["exploratory"] = json!(r.exploratory);
    }
    json
}

fn estimate_csv(r: &EstimateReport) -> String {
    let mut header = vec!["estimate_id", "level", "nodes", "ratio", "trend"];
    header.extend(r.rhs.iter().map(String::as_str));
    if !r.data_norms.is_empty() {
        header.push("data_norm");
    }
    let rows: Vec<Vec<String>> = r
        .levels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let mut v = vec![
                r.estimate_id.to_string(),
                l.level.to_string(),
                l.nodes.to_string(),
                f17(l.ratio),
                r.trend.name().into(),
            ];
            v.extend(row(&l.per_rhs));
            if let Some(d) = r.data_norms.get(i) {
                v.push(f17(*d));
            }
            v
        })
        .collect();
    to_csv(&header, &rows)
}

fn estimate(a: &EstimateArgs, ws: &mut Workspace) -> Result<Report, Failure> {
    let problem = BallProblem::new(a.n, a.m)?;
    let levels = parse_levels(&a.levels)?;
    let family: Vec<RhsProfile> = match &a.rhs {
        Some(list) => list
            .split(',')
            .map(|s| RhsProfile::from_name(s.trim()).ok_or_else(|| Failure::Input(format!("unknown rhs `{s}`"))))
            .collect::<Result<_, _>>()?,
        None => RhsProfile::DEFAULT_FAMILY.to_vec(),
    };
    let id = match a.case {
        EstimateKind::SupNorm => "prop21_1",
        EstimateKind::WeightedLpLq => "prop21_2",
        EstimateKind::HigherIntegrability => "prop23",
        EstimateKind::Lemma => "lemma_propDS",
        EstimateKind::Falsify => "falsify",
    };
    let report = match a.case {
        EstimateKind::Falsify => {
            let (p, q) = (require(a.p, "p", id)?, require(a.q, "q", id)?);
            let region = ConeRegion::default_for(&problem);
            falsify_estimate(ws, &problem, p, q, &levels, &region, a.exploratory)?
        }
        kind => {
            let case = match kind {
                EstimateKind::SupNorm => EstimateCase::SupNorm,
                EstimateKind::WeightedLpLq => {
                    EstimateCase::WeightedLpLq { p: require(a.p, "p", id)?, q: require(a.q, "q", id)? }
                }
                EstimateKind::HigherIntegrability => EstimateCase::HigherIntegrability { k: require(a.k, "k", id)? },
                _ => EstimateCase::Lemma(LemmaParams {
                    theta: require(a.theta, "theta", id)?,
                    alpha: require(a.alpha, "alpha", id)?,
                    p: require(a.p, "p", id)?,
                    q: require(a.q, "q", id)?,
                }),
            };
            verify_estimate(ws, &problem, case, &family, &levels, Grading::default())?
        }
    };
    Ok(Report::new(estimate_json(&report), estimate_csv(&report)))
}

pub fn singular_level_json(l: &SingularLevel) -> Value {
    json!({
        "level": l.level, "nodes": l.nodes,
        "sup_a": num(l.sup_a), "sup_b": num(l.sup_b),
        "C_u": num(l.c_u), "C_v": num(l.c_v),
        "near_vertex_max_u": num(l.near_vertex_max_u),
        "residual_u": num(l.residual_u), "residual_v": num(l.residual_v),
    })
}

fn write_profile(path: &Path, s: &SingularSystem, op: &GreenOperator, points: usize) -> Result<(), Failure> {
    if points < 2 {
        return Err(Failure::Input("profile needs at least 2 points".into()));
    }
    let region = &s.region;
    let (lo, hi) = (s.cutoff, region.cap_radius);
    let mut rows = Vec::with_capacity(points);
    for i in 0..points {
        let r = lo * (hi / lo).powf(i as f64 / (points - 1) as f64);
        let x = region.x0 + r * region.axis;
        let u = op.potential_at(&x, &s.phi)?;
        let v = op.potential_at(&x, &s.psi)?;
        rows.push(row(&[r, u, v, s.c_u * r.powf(-s.alpha), s.c_v * r.powf(-s.beta)]));
    }
    std::fs::write(path, to_csv(&["r", "u", "v", "c_u_r_pow_minus_alpha", "c_v_r_pow_minus_beta"], &rows))?;
    Ok(())
}

fn singular(a: &SingularArgs, ws: &mut Workspace) -> Result<Report, Failure> {
    let problem = BallProblem::new(a.n, a.m)?;
    let levels = parse_levels(&a.levels)?;
    let e = compute_exponents(a.p, a.q, a.m)?;
    let regime = classify_regime(&e, a.n, a.m);
    if regime != Regime::Singular {
        return Err(polyharm_core::Error::NotApplicable(format!(
            "cone solutions need the singular regime, (p, q) = ({}, {}) is {}",
            a.p,
            a.q,
            regime.name()
        ))
        .into());
    }
    let region = ConeRegion::default_for(&problem);
    let grading = Grading::default().with_focus(region.x0);
    let mut rows = Vec::new();
    let mut last = None;
    for &level in &levels {
        let op = ws.operator(&problem, level, grading)?;
        let s = construct_counterexample(a.p, a.q, &op, &region)?;
        rows.push(SingularLevel::from_system(&s, &op)?);
        last = Some((s, op));
    }
    let (s, op) = last.expect("at least one level");
    if let Some(path) = &a.profile {
        write_profile(path, &s, &op, a.profile_points)?;
    }
    let fin = rows.last().expect("at least one level");
    let near: Vec<f64> = rows.iter().map(|l| l.near_vertex_max_u).collect();
    let json = json!({
        "params": { "n": a.n, "m": a.m, "p": num(a.p), "q": num(a.q), "alpha": num(s.alpha), "beta": num(s.beta) },
        "regime": regime.name(),
        "sup_a": num(fin.sup_a), "sup_b": num(fin.sup_b),
        "C_u": num(fin.c_u), "C_v": num(fin.c_v),
        "residuals": { "u": num(fin.residual_u), "v": num(fin.residual_v) },
        "near_vertex_growth": nums(&near),
        "growth_factors": nums(&growth_factors(&near)),
        "levels": rows.iter().map(singular_level_json).collect::<Vec<_>>(),
    });
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|l| {
            let mut v = vec![l.level.to_string(), l.nodes.to_string()];
            v.extend(row(&[l.sup_a, l.sup_b, l.c_u, l.c_v, l.near_vertex_max_u, l.residual_u, l.residual_v]));
            v
        })
        .collect();
    let csv = to_csv(
        &["level", "nodes", "sup_a", "sup_b", "C_u", "C_v", "near_vertex_max_u", "residual_u", "residual_v"],
        &csv_rows,
    );
    Ok(Report::new(json, csv))
}
