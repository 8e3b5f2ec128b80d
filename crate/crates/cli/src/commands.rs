use std::path::Path;

use pdtp_core::counting::{ct_state_prob_routed, scaled_limit_probe, tail_asymptote, ClosedFormConfig, TailMode};
use pdtp_core::graphwalk::dtrw_matrix_with;
use pdtp_core::montecarlo::{
    build_sampler, compare, coverage, empirical_occupation, empirical_state_probs, simulate_counting_ensemble,
    simulate_walk_ensemble, EnsembleConfig, SamplerTail,
};
use pdtp_core::{CtParams, Evaluator, Graph, PdtpParams, Route};

use crate::args::{
    Command, Continuous, CtStatesArgs, Discrete, Global, LimitProbeArgs, PmfArgs, RouteArg, SimulateArgs, StatesArgs,
    TailArgs, TailModeArg, WalkArgs,
};
use crate::error::CliError;
use crate::grid;
use crate::report::{Cell, Report};

type Params = Vec<(&'static str, String)>;

pub fn run(global: &Global, command: &Command) -> Result<Report, CliError> {
    let evaluator = Evaluator {
        route: match global.route {
            RouteArg::Auto => Route::Auto,
            RouteArg::ClosedForm => Route::ClosedForm,
            RouteArg::Oracle => Route::Oracle,
        },
        closed_form: ClosedFormConfig::default(),
    };
    let mut report = match command {
        Command::Pmf(a) => pmf(a, &evaluator)?,
        Command::States(a) => states(a, &evaluator)?,
        Command::CtStates(a) => ct_states(a)?,
        Command::Tail(a) => tail(a, &evaluator)?,
        Command::LimitProbe(a) => limit_probe(a)?,
        Command::Walk(a) => walk(a, &evaluator)?,
        Command::Simulate(a) => simulate(a, &evaluator)?,
    };
    report.params.push(("route", global.route.as_str().into()));
    report.params.push(("format", global.format.as_str().into()));
    Ok(report)
}

fn discrete(d: &Discrete) -> Result<(PdtpParams, Params), CliError> {
    let p = PdtpParams::new(d.alpha, d.nu, d.xi)?;
    let echo = vec![
        ("alpha", d.alpha.to_string()),
        ("nu", d.nu.to_string()),
        ("xi", d.xi.to_string()),
    ];
    Ok((p, echo))
}

fn continuous(c: &Continuous) -> Result<(CtParams, Params), CliError> {
    let p = CtParams::new(c.alpha, c.nu, c.xi0)?;
    let echo = vec![
        ("alpha", c.alpha.to_string()),
        ("nu", c.nu.to_string()),
        ("xi0", c.xi0.to_string()),
    ];
    Ok((p, echo))
}

fn nonempty<T>(v: Vec<T>, flag: &str) -> Result<Vec<T>, CliError> {
    if v.is_empty() {
        Err(CliError::Usage(format!("--{flag} selects nothing")))
    } else {
        Ok(v)
    }
}

fn pmf(a: &PmfArgs, ev: &Evaluator) -> Result<Report, CliError> {
    let (p, mut echo) = discrete(&a.params)?;
    echo.push(("t", a.t.clone()));
    let times = nonempty(grid::integers(&a.t)?, "t")?;
    let t_max = *times.last().unwrap();
    let (table, route) = ev.interarrival_table_routed(&p, t_max)?;

    let mut r = Report::new("pmf", echo, &["t", "theta"]);
    r.info("resolved_route", route.as_str());
    for t in times {
        r.rows.push(vec![Cell::Int(t), Cell::Real(table[t as usize])]);
    }
    Ok(r)
}

fn states(a: &StatesArgs, ev: &Evaluator) -> Result<Report, CliError> {
    let (p, mut echo) = discrete(&a.params)?;
    echo.push(("t", a.t.clone()));
    let times = nonempty(grid::integers(&a.t)?, "t")?;
    let t_max = *times.last().unwrap();
    let (table, route) = ev.state_table_routed(&p, t_max)?;

    let mut r = Report::new("states", echo, &["t", "n", "probability"]);
    r.info("resolved_route", route.as_str());
    for t in times {
        for (n, &prob) in table[t as usize].probs().iter().enumerate() {
            r.rows.push(vec![Cell::Int(t), Cell::Int(n as u64), Cell::Real(prob)]);
        }
    }
    Ok(r)
}

fn ct_states(a: &CtStatesArgs) -> Result<Report, CliError> {
    let (ct, mut echo) = continuous(&a.params)?;
    echo.push(("n", a.n.clone()));
    echo.push(("t-grid", a.t_grid.clone()));
    let ns = nonempty(grid::integers(&a.n)?, "n")?;
    let ts = nonempty(grid::reals(&a.t_grid)?, "t-grid")?;

    let mut r = Report::new(
        "ct-states",
        echo,
        &["t", "n", "probability", "est_error", "method", "converged"],
    );
    let mut flagged = 0usize;
    for &t in &ts {
        for &n in &ns {
            let e = ct_state_prob_routed(&ct, n, t)?;
            flagged += usize::from(!e.converged);
            r.rows.push(vec![
                Cell::Real(t),
                Cell::Int(n),
                Cell::Real(e.value),
                Cell::Real(e.est_abs_error),
                Cell::Text(e.method.as_str().into()),
                Cell::Bool(e.converged),
            ]);
        }
    }
    r.info("nonconverged_rows", flagged);
    Ok(r)
}

fn tail(a: &TailArgs, ev: &Evaluator) -> Result<Report, CliError> {
    let (p, mut echo) = discrete(&a.params)?;
    echo.push(("mode", a.mode.as_str().into()));
    echo.push(("n", a.n.to_string()));
    echo.push(("t", a.t.clone()));
    let times = nonempty(grid::integers(&a.t)?, "t")?;
    let t_max = *times.last().unwrap();

    let (exact, mode, route): (Box<dyn Fn(u64) -> f64>, TailMode, _) = match a.mode {
        TailModeArg::State => {
            let (cols, route) = ev.state_columns_routed(&p, a.n, t_max)?;
            let n = a.n as usize;
            (
                Box::new(move |t| cols[t as usize].get(n).copied().unwrap_or(0.0)),
                TailMode::State,
                route,
            )
        }
        TailModeArg::Interarrival => {
            let (table, route) = ev.interarrival_table_routed(&p, t_max)?;
            (Box::new(move |t| table[t as usize]), TailMode::Interarrival, route)
        }
    };

    let mut r = Report::new("tail", echo, &["t", "exact", "asymptote", "ratio"]);
    r.info("resolved_route", route.as_str());
    for t in times {
        let asym = tail_asymptote(&p, mode, t as f64)?;
        let x = exact(t);
        r.rows.push(vec![
            Cell::Int(t),
            Cell::Real(x),
            Cell::Real(asym),
            Cell::Real(x / asym),
        ]);
    }
    Ok(r)
}

fn limit_probe(a: &LimitProbeArgs) -> Result<Report, CliError> {
    let (ct, mut echo) = continuous(&a.params)?;
    echo.push(("n", a.n.to_string()));
    echo.push(("t", a.t.to_string()));
    echo.push(("h", a.h.clone()));
    let hs = nonempty(grid::reals(&a.h)?, "h")?;
    let rows = scaled_limit_probe(&ct, a.n, a.t, &hs)?;

    let mut r = Report::new(
        "limit-probe",
        echo,
        &[
            "h",
            "steps",
            "rounding_residue",
            "xi",
            "route",
            "discrete",
            "continuous",
            "gap",
        ],
    );
    r.info("step_route", "auto");
    for row in rows {
        r.rows.push(vec![
            Cell::Real(row.h),
            Cell::Int(row.steps),
            Cell::Real(row.rounding_residue),
            Cell::Real(row.xi),
            Cell::Text(row.route.as_str().into()),
            Cell::Real(row.discrete),
            Cell::Real(row.continuous),
            Cell::Real(row.gap),
        ]);
    }
    Ok(r)
}

fn load_graph(path: &Path) -> Result<Graph, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(Graph::parse_edge_list(&text)?)
}

fn walk(a: &WalkArgs, ev: &Evaluator) -> Result<Report, CliError> {
    let (p, mut echo) = discrete(&a.params)?;
    echo.push(("graph", a.graph.display().to_string()));
    echo.push(("t", a.t.to_string()));
    if let Some(s) = a.start {
        echo.push(("start", s.to_string()));
    }
    let g = load_graph(&a.graph)?;
    if let Some(s) = a.start {
        g.check_node(s)?;
    }
    let m = dtrw_matrix_with(&g, &p, a.t, ev)?;
    let n = g.node_count();

    let mut r = match a.start {
        Some(s) => {
            let mut r = Report::new("walk", echo, &["node", "probability"]);
            for (j, &x) in m.row(s).iter().enumerate() {
                r.rows.push(vec![Cell::Int(j as u64), Cell::Real(x)]);
            }
            r
        }
        None => {
            let mut cols = vec!["from".to_string()];
            cols.extend((0..n).map(|j| format!("to_{j}")));
            let mut r = Report::new("walk", echo, &[]);
            r.columns = cols;
            for i in 0..n {
                let mut row = vec![Cell::Int(i as u64)];
                row.extend(m.row(i).iter().map(|&x| Cell::Real(x)));
                r.rows.push(row);
            }
            r
        }
    };
    r.info("nodes", n);
    Ok(r)
}

fn simulate(a: &SimulateArgs, ev: &Evaluator) -> Result<Report, CliError> {
    let (p, mut echo) = discrete(&a.params)?;
    echo.push(("t", a.t.clone()));
    echo.push(("seed", a.seed.to_string()));
    echo.push(("walkers", a.walkers.to_string()));
    echo.push(("eps-tail", a.eps_tail.to_string()));
    if let Some(path) = &a.graph {
        echo.push(("graph", path.display().to_string()));
        echo.push(("start", a.start.to_string()));
    }
    if a.walkers == 0 {
        return Err(CliError::Usage("--walkers must be positive".into()));
    }
    let times = nonempty(grid::integers(&a.t)?, "t")?;
    let horizon = *times.last().unwrap();
    let sampler = build_sampler(&p, a.eps_tail)?;
    let cfg = EnsembleConfig {
        seed: a.seed,
        walkers: a.walkers,
    };

    let (rows, cell_name) = match &a.graph {
        None => {
            let ensemble = simulate_counting_ensemble(&sampler, horizon, &cfg);
            let hists = times
                .iter()
                .map(|&t| empirical_state_probs(&ensemble, t))
                .collect::<Result<Vec<_>, _>>()?;
            let (table, _) = ev.state_table_routed(&p, horizon)?;
            let rows = compare(&hists, |t, n| Ok(table[t as usize].prob(n)))?;
            (rows, "n")
        }
        Some(path) => {
            let g = load_graph(path)?;
            let paths = simulate_walk_ensemble(&g, &sampler, horizon, a.start, &cfg)?;
            let hists = times
                .iter()
                .map(|&t| empirical_occupation(&paths, g.node_count(), t))
                .collect::<Result<Vec<_>, _>>()?;
            let rows_at = times
                .iter()
                .map(|&t| Ok((t, dtrw_matrix_with(&g, &p, t, ev)?.row(a.start).to_vec())))
                .collect::<Result<Vec<_>, CliError>>()?;
            let rows = compare(&hists, |t, node| {
                let (_, row) = rows_at.iter().find(|(s, _)| *s == t).expect("time simulated");
                Ok(row[node])
            })?;
            (rows, "node")
        }
    };

    let mut r = Report::new(
        "simulate",
        echo,
        &[
            "t",
            cell_name,
            "empirical",
            "analytic",
            "wilson_halfwidth",
            "within_band",
        ],
    );
    r.info("sampler_t_max", sampler.t_max());
    r.info(
        "sampler_truncation_mass",
        pdtp_core::csv::fmt_real(sampler.truncation_mass()),
    );
    match sampler.tail() {
        SamplerTail::Renormalized => r.info("sampler_tail", "renormalized"),
        SamplerTail::PowerLaw { tv_bound, .. } => r.info(
            "sampler_tail",
            format!("power-law, tv bound {}", pdtp_core::csv::fmt_real(tv_bound)),
        ),
    }
    r.info("coverage_99", pdtp_core::csv::fmt_real(coverage(&rows)));
    for row in rows {
        r.rows.push(vec![
            Cell::Int(row.t),
            Cell::Int(row.n as u64),
            Cell::Real(row.empirical),
            Cell::Real(row.analytic),
            Cell::Real(row.wilson_halfwidth),
            Cell::Bool(row.within_band),
        ]);
    }
    Ok(r)
}
