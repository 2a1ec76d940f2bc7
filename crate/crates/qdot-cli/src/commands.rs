//! The run, steady, and sweep subcommands.

use std::fmt::Write as _;
use std::fs;

use qdot::config::{
    parse_run_spec, prepare, OutputFormat, OutputSpec, PreparedRun, RunSpec, Scenario, SolverSpec,
};
use qdot::observables::{coherence_magnitude, current, trace_out_detector};
use qdot::scenarios::{AssemblyMode, FermiRegime, ScenarioParams};
use qdot::solver::{
    evolve, steady_state_by_integration, steady_state_direct, DensityMatrix, Trajectory,
};

use crate::output::{csv_field, fmt_full, json_string, Table};
use crate::{AxisArg, Failure, SpecArgs, SweepArgs};

/// Layer the run description: built-in defaults, then the configuration
/// file, then the flags; revalidate the result since a flag can invalidate a
/// spec that parsed cleanly.
pub fn assemble(args: &SpecArgs) -> Result<RunSpec, Failure> {
    let mut spec = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            parse_run_spec(&text)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
        }
        None => RunSpec {
            scenario: Scenario::DoubleDot,
            params: ScenarioParams::default(),
            regime: FermiRegime::default(),
            mode: AssemblyMode::default(),
            solver: SolverSpec::default(),
            output: OutputSpec::default(),
            model: None,
        },
    };

    if let Some(v) = args.scenario {
        spec.scenario = v.into();
    }
    if let Some(v) = args.regime {
        spec.regime = v.into();
    }
    if let Some(v) = args.mode {
        spec.mode = v.into();
    }
    if let Some(v) = args.gamma0 {
        spec.params.gamma0 = v;
    }
    if let Some(v) = args.gamma0p {
        spec.params.gamma0p = v;
    }
    if let Some(v) = args.gamma0pp {
        spec.params.gamma0pp = v;
    }
    if let Some(v) = args.gamma_l {
        spec.params.gamma_l = v;
    }
    if let Some(v) = args.gamma_lp {
        spec.params.gamma_lp = v;
    }
    if let Some(v) = args.gamma_r {
        spec.params.gamma_r = v;
    }
    if let Some(v) = args.gamma_rp {
        spec.params.gamma_rp = v;
    }
    if let Some(v) = args.omega {
        spec.params.omega = v;
    }
    if let Some(v) = args.omegap {
        spec.params.omegap = v;
    }
    if let Some(v) = args.epsilon {
        spec.params.epsilon = v;
    }
    if let Some(v) = args.delta_u {
        spec.params.delta_u = v;
    }
    if let Some(v) = args.rel_tol {
        spec.solver.rel_tol = v;
    }
    if let Some(v) = args.abs_tol {
        spec.solver.abs_tol = v;
    }
    if let Some(v) = args.t_end {
        spec.solver.t_end = v;
    }
    if let Some(v) = args.grid_points {
        spec.solver.grid_points = v;
    }
    if let Some(v) = args.format {
        spec.output.format = v.into();
    }
    if let Some(v) = &args.output {
        spec.output.path = Some(v.display().to_string());
    }

    spec.validate()
        .map_err(|e| Failure::Config(e.to_string()))?;
    Ok(spec)
}

fn emit(path: &Option<String>, text: String) -> Result<(), Failure> {
    match path {
        Some(p) => {
            fs::write(p, text).map_err(|e| Failure::Config(format!("cannot write {p}: {e}")))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// The coherence column: |σ̄| of the configured pair, traced over the
/// detector when there is one, 0 when the device has no pair to watch.
fn reported_coherence(state: &DensityMatrix, prepared: &PreparedRun) -> f64 {
    match (&prepared.partition, prepared.coherence_pair) {
        (Some(part), Some((a, b))) => {
            let reduced =
                trace_out_detector(state, part).expect("partition matches the prepared model");
            coherence_magnitude(&reduced, a, b)
        }
        (None, Some((a, b))) => coherence_magnitude(state, a, b),
        (_, None) => 0.0,
    }
}

fn observed_row(
    t: f64,
    state: &DensityMatrix,
    q_d: f64,
    q_s: f64,
    prepared: &PreparedRun,
) -> Vec<f64> {
    let i_d = current(state, &prepared.detector_collector)
        .expect("collector indices were validated at preparation");
    let i_s = current(state, &prepared.system_collector)
        .expect("collector indices were validated at preparation");
    let mut row = vec![t, i_d, i_s, q_d, q_s];
    row.extend(state.populations());
    row.push(reported_coherence(state, prepared));
    row
}

pub fn run(args: &SpecArgs) -> Result<(), Failure> {
    let spec = assemble(args)?;
    let prepared = prepare(&spec).map_err(|e| Failure::Config(e.to_string()))?;
    let n = prepared.liouvillian.n_states();
    let initial = DensityMatrix::pure(n, prepared.initial_state);

    let mut columns: Vec<String> = ["t", "I_D", "I_S", "Q_D", "Q_S"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    columns.extend(
        prepared
            .model
            .space
            .labels()
            .iter()
            .map(|l| format!("occ_{l}")),
    );
    columns.push("coherence".into());

    let mut rows = Vec::new();
    if spec.solver.t_end == 0.0 {
        rows.push(observed_row(0.0, &initial, 0.0, 0.0, &prepared));
    } else {
        let traj: Trajectory = evolve(
            &prepared.liouvillian,
            &initial,
            spec.solver.t_end,
            &spec.solver.options(),
        )
        .map_err(|e| Failure::Solver(e.to_string()))?;
        let q_d = qdot::observables::accumulated_charge(&traj, &prepared.detector_collector)
            .expect("collector indices were validated at preparation");
        let q_s = qdot::observables::accumulated_charge(&traj, &prepared.system_collector)
            .expect("collector indices were validated at preparation");
        for i in 0..traj.len() {
            rows.push(observed_row(
                traj.time(i),
                traj.state(i),
                q_d[i],
                q_s[i],
                &prepared,
            ));
        }
    }

    let table = Table { columns, rows };
    let text = match spec.output.format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => table.to_json(),
    };
    emit(&spec.output.path, text)
}

pub fn steady(args: &SpecArgs) -> Result<(), Failure> {
    let spec = assemble(args)?;
    let prepared = prepare(&spec).map_err(|e| Failure::Config(e.to_string()))?;
    let lv = &prepared.liouvillian;

    let direct = steady_state_direct(lv).map_err(|e| Failure::Solver(e.to_string()))?;
    let initial = DensityMatrix::pure(lv.n_states(), prepared.initial_state);
    let relaxed =
        steady_state_by_integration(lv, &initial).map_err(|e| Failure::Solver(e.to_string()))?;
    let residual = direct.max_abs_diff(&relaxed);

    let i_d = current(&direct, &prepared.detector_collector)
        .expect("collector indices were validated at preparation");
    let i_s = current(&direct, &prepared.system_collector)
        .expect("collector indices were validated at preparation");
    let labels = prepared.model.space.labels();
    let pops = direct.populations();

    let mut text = String::new();
    text.push_str("{\n");
    let _ = writeln!(text, "  \"I_D\": {},", fmt_full(i_d));
    let _ = writeln!(text, "  \"I_S\": {},", fmt_full(i_s));
    text.push_str("  \"occupancies\": {\n");
    for (i, (label, p)) in labels.iter().zip(&pops).enumerate() {
        let sep = if i + 1 < pops.len() { "," } else { "" };
        let _ = writeln!(text, "    {}: {}{}", json_string(label), fmt_full(*p), sep);
    }
    text.push_str("  },\n");
    text.push_str("  \"coherences\": [\n");
    let n = lv.n_states();
    let n_pairs = n * (n - 1) / 2;
    let mut k = 0;
    for a in 0..n {
        for b in (a + 1)..n {
            k += 1;
            let sep = if k < n_pairs { "," } else { "" };
            let _ = writeln!(
                text,
                "    {{\"a\": {}, \"b\": {}, \"magnitude\": {}}}{}",
                json_string(&labels[a]),
                json_string(&labels[b]),
                fmt_full(coherence_magnitude(&direct, a, b)),
                sep
            );
        }
    }
    text.push_str("  ],\n");
    if prepared.coherence_pair.is_some() {
        let _ = writeln!(
            text,
            "  \"reduced_coherence\": {},",
            fmt_full(reported_coherence(&direct, &prepared))
        );
    }
    let _ = writeln!(text, "  \"integration_residual\": {}", fmt_full(residual));
    text.push_str("}\n");

    emit(&spec.output.path, text)
}

/// One sweep point: the axis label for the first column plus the spec to
/// solve.
enum Point {
    Regime(FermiRegime),
    Value(f64),
}

fn parse_grid(axis: AxisArg, grid: &Option<String>) -> Result<Vec<Point>, Failure> {
    match axis {
        AxisArg::Regime => {
            let names = match grid {
                Some(g) => g.split(',').map(str::trim).map(str::to_owned).collect(),
                None => vec!["blocked".into(), "partial".into(), "open".into()],
            };
            names
                .iter()
                .map(|name| match name.as_str() {
                    "blocked" => Ok(Point::Regime(FermiRegime::Blocked)),
                    "partial" => Ok(Point::Regime(FermiRegime::Partial)),
                    "open" => Ok(Point::Regime(FermiRegime::Open)),
                    other => Err(Failure::Config(format!(
                        "unknown regime {other:?} in --grid; expected blocked, partial, or open"
                    ))),
                })
                .collect()
        }
        _ => {
            let g = grid
                .as_ref()
                .ok_or_else(|| Failure::Config("--grid is required for a numeric axis".into()))?;
            g.split(',')
                .map(str::trim)
                .map(|tok| {
                    tok.parse::<f64>().map(Point::Value).map_err(|_| {
                        Failure::Config(format!("cannot parse {tok:?} in --grid as a number"))
                    })
                })
                .collect()
        }
    }
}

fn axis_name(axis: AxisArg) -> &'static str {
    match axis {
        AxisArg::Regime => "regime",
        AxisArg::Gamma0p => "gamma0p",
        AxisArg::Epsilon => "epsilon",
        AxisArg::DeltaU => "deltaU",
    }
}

fn apply_point(spec: &mut RunSpec, axis: AxisArg, point: &Point) -> String {
    match (axis, point) {
        (AxisArg::Regime, Point::Regime(r)) => {
            spec.regime = *r;
            r.to_string()
        }
        (AxisArg::Gamma0p, Point::Value(v)) => {
            // One knob for both detector-occupied widths, matching how the
            // dephasing scans are defined.
            spec.params.gamma0p = *v;
            spec.params.gamma0pp = *v;
            fmt_full(*v)
        }
        (AxisArg::Epsilon, Point::Value(v)) => {
            spec.params.epsilon = *v;
            fmt_full(*v)
        }
        (AxisArg::DeltaU, Point::Value(v)) => {
            spec.params.delta_u = *v;
            fmt_full(*v)
        }
        _ => unreachable!("grid parser matches the axis"),
    }
}

fn solve_point(spec: &RunSpec) -> Result<(f64, f64, f64), String> {
    let prepared = prepare(spec).map_err(|e| e.to_string())?;
    let steady = steady_state_direct(&prepared.liouvillian).map_err(|e| e.to_string())?;
    let i_s = current(&steady, &prepared.system_collector)
        .expect("collector indices were validated at preparation");
    let i_d = current(&steady, &prepared.detector_collector)
        .expect("collector indices were validated at preparation");
    Ok((i_s, i_d, reported_coherence(&steady, &prepared)))
}

pub fn sweep(args: &SweepArgs) -> Result<(), Failure> {
    let base = assemble(&args.spec)?;
    if base.scenario == Scenario::Custom {
        return Err(Failure::Config(
            "sweep axes act on the preset parameters; custom models have none".into(),
        ));
    }
    let points = parse_grid(args.axis, &args.grid)?;
    if points.is_empty() {
        return Err(Failure::Config("--grid is empty".into()));
    }

    let mut text = String::new();
    let _ = writeln!(text, "{},I_S,I_D,coherence,status", axis_name(args.axis));
    let mut failed = 0usize;
    for point in &points {
        let mut spec = base.clone();
        let cell = apply_point(&mut spec, args.axis, point);
        match solve_point(&spec) {
            Ok((i_s, i_d, coh)) => {
                let _ = writeln!(
                    text,
                    "{},{},{},{},ok",
                    csv_field(&cell),
                    fmt_full(i_s),
                    fmt_full(i_d),
                    fmt_full(coh)
                );
            }
            Err(why) => {
                failed += 1;
                let _ = writeln!(text, "{},,,,{}", csv_field(&cell), csv_field(&why));
            }
        }
    }

    emit(&base.output.path, text)?;
    if failed > 0 {
        return Err(Failure::Solver(format!(
            "{failed} of {} sweep points failed; see the status column",
            points.len()
        )));
    }
    Ok(())
}
