use std::collections::HashMap;

use rayon::prelude::*;
use robinspec::assembly::SigmaField;
use robinspec::bounds::{
    convex_robin_sandwich, corollary_sandwich_with, dirichlet_inradius_check, hardy_check, kn_ball, li_yau_bound,
    scaling_study_on_gamma, BoundReport,
};
use robinspec::exact1d::{lambda1_exact, IntervalProblem};
use robinspec::geometry::{build_mesh, write_mesh, DomainKind, Mesh};
use robinspec::mixed_dn::MixedProblem;
use robinspec::robin;
use robinspec::{Error, Result};
use serde_json::{json, Map, Value};

use crate::config::{Command, RunConfig};
use crate::output::{num, nums, opt_num, Table};

pub enum Report {
    Json { body: Value, csv: Option<Table> },
    /// Mesh text for the `mesh` command.
    Text { body: String, summary: Value },
}

pub fn run(cfg: &RunConfig) -> Result<Report> {
    match cfg.command {
        Command::Solve => solve(cfg),
        Command::Optimal => optimal(cfg),
        Command::Bounds => bounds(cfg),
        Command::Scaling => scaling(cfg),
        Command::Hardy => hardy(cfg),
        Command::Converge => converge(cfg),
        Command::Mesh => mesh(cfg),
    }
}

fn mesh_at(cfg: &RunConfig, level: usize) -> Result<Mesh> {
    Ok(build_mesh(&cfg.domain, 0.5)?.refined(level))
}

/// σ from `--sigma-a/--sigma-b` on an interval, else the first `--sigma`
/// value on the Γ facets.
fn sigma_field(cfg: &RunConfig, mesh: &Mesh) -> SigmaField {
    match cfg.sigma_ends {
        Some((a, b)) => SigmaField::PerFacet(vec![a, b]),
        None => SigmaField::on_gamma(mesh, cfg.sigma[0]),
    }
}

fn interval_exact(cfg: &RunConfig, mesh: &Mesh) -> Result<Option<f64>> {
    let DomainKind::Interval { a, b } = cfg.domain.kind else { return Ok(None) };
    let SigmaField::PerFacet(v) = sigma_field(cfg, mesh) else { unreachable!("interval σ is per endpoint") };
    Ok(Some(lambda1_exact(&IntervalProblem::new(a, b, v[0], v[1])?)))
}

fn header(cfg: &RunConfig) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(cfg.command.name()));
    m.insert("domain".into(), json!(cfg.domain_name));
    m.insert("gamma".into(), json!(cfg.gamma_text));
    m.insert("seed".into(), json!(cfg.seed));
    m
}

fn finish(mut head: Map<String, Value>, body: Value, csv: Option<Table>) -> Report {
    if let Value::Object(b) = body {
        head.extend(b);
    }
    Report::Json { body: Value::Object(head), csv }
}

fn solve(cfg: &RunConfig) -> Result<Report> {
    if cfg.sigma.len() != 1 && cfg.sigma_ends.is_none() {
        return Err(Error::Argument("solve takes a single --sigma value".into()));
    }
    let mesh = mesh_at(cfg, cfg.levels)?;
    let coarse = mesh_at(cfg, cfg.levels - 1)?;
    let sigma = sigma_field(cfg, &mesh);
    let r = robin::lambda1(&mesh, &sigma)?;
    let prev = robin::lambda1(&coarse, &sigma_field(cfg, &coarse))?.lambda1;
    let exact = interval_exact(cfg, &mesh)?;
    let body = json!({
        "level": cfg.levels,
        "h": num(mesh.max_diameter()),
        "dofs": mesh.num_nodes(),
        "sigma": sigma_json(cfg),
        "lambda1": num(r.lambda1),
        "residual": num(r.euler_lagrange_residual / r.operator_norm),
        "min_psi": num(r.min_psi()),
        // |λ_L − λ_{L−1}|: three times the second-order Richardson estimate
        "error_bar": num((r.lambda1 - prev).abs()),
        "exact_lambda1": opt_num(exact),
        "relative_error": opt_num(exact.map(|e| if e == 0.0 { r.lambda1.abs() } else { (r.lambda1 - e).abs() / e })),
    });
    Ok(finish(header(cfg), body, None))
}

fn sigma_json(cfg: &RunConfig) -> Value {
    match cfg.sigma_ends {
        Some((a, b)) => nums(&[a, b]),
        None => num(cfg.sigma[0]),
    }
}

/// Boundary nodes in traversal order with their arc-length coordinate.
fn boundary_walk(mesh: &Mesh) -> Vec<(usize, f64)> {
    let nodes = mesh.nodes();
    if mesh.dim() == 1 {
        let x0 = nodes[mesh.boundary()[0].nodes[0]][0];
        return mesh.boundary().iter().map(|f| (f.nodes[0], (nodes[f.nodes[0]][0] - x0).abs())).collect();
    }
    let next: HashMap<usize, usize> = mesh.boundary().iter().map(|f| (f.nodes[0], f.nodes[1])).collect();
    let start = mesh.boundary()[0].nodes[0];
    let mut out = vec![(start, 0.0)];
    let (mut cur, mut s) = (start, 0.0);
    while let Some(&nxt) = next.get(&cur) {
        if nxt == start || out.len() > next.len() {
            break;
        }
        s += (nodes[nxt][0] - nodes[cur][0]).hypot(nodes[nxt][1] - nodes[cur][1]);
        out.push((nxt, s));
        cur = nxt;
    }
    out
}

fn optimal(cfg: &RunConfig) -> Result<Report> {
    let mesh = mesh_at(cfg, cfg.levels)?;
    let problem = MixedProblem::new(&mesh)?;
    let walk = boundary_walk(&mesh);
    let gamma_nodes: std::collections::HashSet<usize> = mesh.gamma_nodes().into_iter().collect();
    let results = cfg
        .m
        .par_iter()
        .map(|&m| {
            let opt = problem.optimal_sigma(m)?;
            let rep = problem.verify_maximality(&opt, cfg.trials, cfg.seed, 1e-6)?;
            Ok((opt, rep))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&["m", "s", "x", "y", "sigma"]);
    let rows: Vec<Value> = results
        .iter()
        .map(|(opt, rep)| {
            let values = opt.sigma_values();
            for &(i, s) in walk.iter().filter(|(i, _)| gamma_nodes.contains(i)) {
                let p = mesh.nodes()[i];
                table.push(vec![opt.m.into(), s.into(), p[0].into(), p[1].into(), values[i].into()]);
            }
            json!({
                "m": num(opt.m),
                "xi": num(opt.xi),
                "E1": num(opt.e1),
                "f_value": num(opt.f_value),
                "mass": num(opt.mass),
                "mass_defect": num(opt.mass_defect),
                "lambda_check": num(opt.lambda_check),
                "sigma_min": num(opt.sigma_min),
                "trials": rep.trials.len(),
                "violations": rep.violations,
            })
        })
        .collect();
    let body = json!({
        "level": cfg.levels,
        "dofs": mesh.num_nodes(),
        "area": num(problem.area),
        "E1": num(problem.e1()),
        "gamma1": num(problem.ground.gamma1),
        "results": rows,
    });
    Ok(finish(header(cfg), body, Some(table)))
}

fn bound_json(r: &BoundReport) -> Value {
    json!({
        "quantity": r.quantity,
        "lower": num(r.lower),
        "computed": num(r.computed),
        "upper": num(r.upper),
        "slack_lower": num(r.slack_lower),
        "slack_upper": num(r.slack_upper),
        "tol": num(r.tol),
        "pass": r.pass,
    })
}

const BOUND_COLUMNS: [&str; 10] =
    ["section", "parameter", "quantity", "lower", "computed", "upper", "slack_lower", "slack_upper", "tol", "pass"];

fn bound_row(table: &mut Table, section: &str, parameter: Option<f64>, r: &BoundReport) {
    table.push(vec![
        section.into(),
        parameter.into(),
        r.quantity.as_str().into(),
        r.lower.into(),
        r.computed.into(),
        r.upper.into(),
        r.slack_lower.into(),
        r.slack_upper.into(),
        r.tol.into(),
        r.pass.into(),
    ]);
}

/// Relative slack allowed for discretisation error in every bound check.
const FEM_SLACK: f64 = 0.02;

fn bounds(cfg: &RunConfig) -> Result<Report> {
    let mesh = mesh_at(cfg, cfg.levels)?;
    let problem = MixedProblem::new(&mesh)?;
    let sandwich = cfg
        .m
        .par_iter()
        .map(|&m| corollary_sandwich_with(&problem, m, FEM_SLACK))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&BOUND_COLUMNS);
    for s in &sandwich {
        bound_row(&mut table, "mass_simple", Some(s.m), &s.simple);
        bound_row(&mut table, "mass_gamma1", Some(s.m), &s.tight);
    }
    let convex = cfg.domain.inradius().is_ok();
    let (dirichlet, robin_rows) = if convex {
        let full = mesh.with_gamma(&robinspec::geometry::GammaSelector::All)?;
        let d = dirichlet_inradius_check(&full, &cfg.domain, FEM_SLACK)?;
        let rows = cfg
            .sigma
            .par_iter()
            .filter(|&&s| s > 0.0)
            .map(|&s| Ok((s, convex_robin_sandwich(&full, &cfg.domain, s, FEM_SLACK)?)))
            .collect::<Result<Vec<_>>>()?;
        bound_row(&mut table, "dirichlet_inradius", None, &d);
        for (s, r) in &rows {
            bound_row(&mut table, "robin_inradius", Some(*s), r);
        }
        (Some(d), rows)
    } else {
        (None, Vec::new())
    };
    let dim = mesh.dim();
    let kn = kn_ball(dim)?;
    let all_pass = sandwich.iter().all(|s| s.pass())
        && dirichlet.as_ref().is_none_or(|d| d.pass)
        && robin_rows.iter().all(|(_, r)| r.pass);
    let body = json!({
        "level": cfg.levels,
        "dofs": mesh.num_nodes(),
        "area": num(problem.area),
        "E1": num(problem.e1()),
        "gamma1": num(problem.ground.gamma1),
        "fem_slack": num(FEM_SLACK),
        "mass_sandwich": sandwich.iter().map(|s| json!({
            "m": num(s.m),
            "t0": num(s.t0),
            "simple": bound_json(&s.simple),
            "gamma1": bound_json(&s.tight),
        })).collect::<Vec<_>>(),
        "convex": convex,
        "dirichlet_inradius": dirichlet.as_ref().map_or(Value::Null, bound_json),
        "robin_inradius": robin_rows.iter().map(|(s, r)| json!({ "sigma": num(*s), "report": bound_json(r) })).collect::<Vec<_>>(),
        "ball": json!({
            "dim": dim,
            "K_N": num(kn),
            "li_yau": num(li_yau_bound(dim)),
        }),
        "pass": all_pass,
    });
    Ok(finish(header(cfg), body, Some(table)))
}

fn scaling(cfg: &RunConfig) -> Result<Report> {
    if cfg.sigma.len() != 1 {
        return Err(Error::Argument("scaling takes a single --sigma value".into()));
    }
    let mesh = mesh_at(cfg, cfg.levels)?;
    let study = scaling_study_on_gamma(&mesh, &cfg.domain.gamma, cfg.sigma[0], &cfg.eps)?;
    let mut table = Table::new(&[
        "eps",
        "lambda1",
        "eps_lambda1",
        "eps2_lambda1",
        "eps_lambda1_limit",
        "eps2_lambda1_limit",
        "small_bound_holds",
        "large_bound_holds",
        "sandwich_holds",
    ]);
    for r in &study.rows {
        table.push(vec![
            r.eps.into(),
            r.lambda1.into(),
            r.eps_lambda.into(),
            r.eps2_lambda.into(),
            study.small_limit.into(),
            study.e1.into(),
            r.small_bound_holds.into(),
            r.large_bound_holds.into(),
            r.sandwich_holds.into(),
        ]);
    }
    let body = json!({
        "level": cfg.levels,
        "dofs": mesh.num_nodes(),
        "sigma": num(cfg.sigma[0]),
        "area": num(study.area),
        "boundary_mass": num(study.boundary_mass),
        "limits": {
            "eps_lambda1_as_eps_to_0": num(study.small_limit),
            "eps2_lambda1_as_eps_to_inf": num(study.e1),
        },
        "neumann": nums(&study.neumann),
        "dirichlet": nums(&study.dirichlet),
        "rows": study.rows.iter().map(|r| json!({
            "eps": num(r.eps),
            "lambda1": num(r.lambda1),
            "eps_lambda1": num(r.eps_lambda),
            "eps2_lambda1": num(r.eps2_lambda),
            "scaled_spectrum": nums(&r.scaled_spectrum),
            "small_bound_holds": r.small_bound_holds,
            "large_bound_holds": r.large_bound_holds,
            "sandwich_holds": r.sandwich_holds,
        })).collect::<Vec<_>>(),
    });
    Ok(finish(header(cfg), body, Some(table)))
}

fn hardy(cfg: &RunConfig) -> Result<Report> {
    cfg.domain.inradius()?;
    let mesh = mesh_at(cfg, cfg.levels)?;
    let cases: Vec<(f64, f64)> = cfg
        .sigma
        .iter()
        .flat_map(|&s| {
            let mut alphas = match &cfg.alpha {
                Some(a) => a.clone(),
                None if s > 0.0 => vec![0.1, 0.25, 1.0 / (2.0 * s), 1.0],
                None => vec![0.1, 0.25, 1.0],
            };
            let mut seen = Vec::new();
            alphas.retain(|a| !seen.contains(a) && {
                seen.push(*a);
                true
            });
            alphas.into_iter().map(move |a| (s, a))
        })
        .collect();
    let reports = cases
        .par_iter()
        .map(|&(s, a)| hardy_check(&mesh, s, a, cfg.trials, cfg.seed))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&[
        "sigma",
        "alpha",
        "coefficient",
        "functions",
        "violations",
        "min_ratio",
        "ground_lhs",
        "ground_rhs",
        "pass",
    ]);
    let mut rows = Vec::new();
    for r in &reports {
        let min_ratio = r
            .samples
            .iter()
            .chain([&r.ground_state])
            .filter(|t| t.rhs > 0.0)
            .map(|t| t.lhs / t.rhs)
            .reduce(f64::min);
        let functions = r.samples.len() + 1;
        table.push(vec![
            r.sigma.into(),
            r.alpha.into(),
            r.coefficient.into(),
            functions.into(),
            r.violations.into(),
            min_ratio.into(),
            r.ground_state.lhs.into(),
            r.ground_state.rhs.into(),
            r.pass().into(),
        ]);
        rows.push(json!({
            "sigma": num(r.sigma),
            "alpha": num(r.alpha),
            "coefficient": num(r.coefficient),
            "functions": functions,
            "violations": r.violations,
            "min_ratio": opt_num(min_ratio),
            "ground_lhs": num(r.ground_state.lhs),
            "ground_rhs": num(r.ground_state.rhs),
            "pass": r.pass(),
        }));
    }
    let body = json!({
        "level": cfg.levels,
        "dofs": mesh.num_nodes(),
        "trials": cfg.trials,
        "quadrature_tol": num(robinspec::bounds::HARDY_TOL),
        "rows": rows,
        "pass": reports.iter().all(|r| r.pass()),
    });
    Ok(finish(header(cfg), body, Some(table)))
}

fn converge(cfg: &RunConfig) -> Result<Report> {
    let levels: Vec<usize> = (1..=cfg.levels).collect();
    let solved = levels
        .par_iter()
        .map(|&l| {
            let mesh = mesh_at(cfg, l)?;
            let r = robin::lambda1(&mesh, &sigma_field(cfg, &mesh))?;
            Ok((l, mesh.max_diameter(), mesh.num_nodes(), r.lambda1))
        })
        .collect::<Result<Vec<_>>>()?;
    let exact = interval_exact(cfg, &mesh_at(cfg, 0)?)?;
    let lams: Vec<f64> = solved.iter().map(|s| s.3).collect();
    let diffs: Vec<f64> = lams.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
    let orders: Vec<f64> = diffs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let mut table = Table::new(&["level", "h", "dofs", "lambda1", "diff", "ratio", "order", "error"]);
    let mut rows = Vec::new();
    for (i, &(l, h, dofs, lam)) in solved.iter().enumerate() {
        let diff = diffs.get(i).copied();
        let ratio = (i + 1 < diffs.len()).then(|| diffs[i] / diffs[i + 1]);
        let order = orders.get(i).copied();
        let error = exact.map(|e| (lam - e).abs());
        table.push(vec![l.into(), h.into(), dofs.into(), lam.into(), diff.into(), ratio.into(), order.into(), error.into()]);
        rows.push(json!({
            "level": l,
            "h": num(h),
            "dofs": dofs,
            "lambda1": num(lam),
            "diff": opt_num(diff),
            "ratio": opt_num(ratio),
            "order": opt_num(order),
            "error": opt_num(error),
        }));
    }
    let body = json!({
        "sigma": sigma_json(cfg),
        "exact_lambda1": opt_num(exact),
        "observed_order": opt_num(orders.last().copied()),
        "rows": rows,
    });
    Ok(finish(header(cfg), body, Some(table)))
}

fn mesh(cfg: &RunConfig) -> Result<Report> {
    let mesh = mesh_at(cfg, cfg.levels)?;
    let mut summary = header(cfg);
    summary.insert("level".into(), json!(cfg.levels));
    summary.insert("nodes".into(), json!(mesh.num_nodes()));
    summary.insert("cells".into(), json!(mesh.num_cells()));
    summary.insert("boundary_facets".into(), json!(mesh.boundary().len()));
    summary.insert("gamma_facets".into(), json!(mesh.boundary().iter().filter(|f| f.gamma).count()));
    summary.insert("h".into(), num(mesh.max_diameter()));
    summary.insert("area".into(), num(mesh.area()));
    Ok(Report::Text { body: write_mesh(&mesh), summary: Value::Object(summary) })
}
