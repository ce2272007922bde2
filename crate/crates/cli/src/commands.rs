use std::io::Write;
use std::time::Instant;

use serde_json::{json, Value};

use sensor_place_core::bounds::{min_interval_for_error, min_sensors_for_error, mmse_bounds};
use sensor_place_core::estimation::log_ellipsoid_volume;
use sensor_place_core::format::{round_sig12, sig12};
use sensor_place_core::io::system_to_json;
use sensor_place_core::{
    enumerate_all, greedy_p1, greedy_p2, BoundTarget, Error, GreedyOptions, LogDetObjective, LtvSystem,
    PlacementResult, PlacementStatus, SensorSet, StackedMaps,
};

use crate::failure::{CliResult, Failure, EXIT_INFEASIBLE};

fn num(v: f64) -> Value {
    json!(round_sig12(v))
}

fn one_based(indices: &[usize]) -> Value {
    json!(indices.iter().map(|i| i + 1).collect::<Vec<_>>())
}

/// Pretty JSON; keys come out sorted because `serde_json::Map` is ordered.
pub fn emit_json(value: &Value) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(value).expect("value serializes"))?;
    Ok(())
}

pub fn write_text(path: Option<&str>, text: &str) -> CliResult<()> {
    match path {
        None | Some("-") => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::usage(format!("cannot write {p}: {e}"))),
    }
}

/// Parses `3,5` (1-based); an empty string is the empty set.
pub fn parse_sensors(list: &str, n: usize) -> CliResult<SensorSet> {
    let indices = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| Failure::usage(format!("bad sensor index {s:?}"))))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(SensorSet::from_one_based(&indices, n)?)
}

pub fn gen(system: &LtvSystem, output: Option<&str>) -> CliResult<()> {
    write_text(output, &(system_to_json(system) + "\n"))
}

pub fn eval(system: &LtvSystem, sensors: &SensorSet, epsilon: Option<f64>) -> CliResult<()> {
    let obj = LogDetObjective::new(system)?;
    let rep = obj.report(sensors)?;
    let mut value = json!({
        "logdet_error": num(rep.logdet_error),
        "mmse_z": num(rep.mmse_z),
        "mmse_x0": num(rep.mmse_x0),
        "mmse_xk": num(rep.mmse_xk),
        "path": rep.path,
    });
    if let Some(eps) = epsilon {
        value["log_ellipsoid_volume"] = num(log_ellipsoid_volume(obj.dim(), rep.logdet_error, eps)?);
    }
    emit_json(&value)
}

pub enum PlaceMode {
    MinSet { budget: f64 },
    Budgeted { r: usize, l: usize },
}

pub fn placement_json(res: &PlacementResult) -> Value {
    let trace: Vec<Value> = res
        .trace
        .iter()
        .map(|t| {
            json!({
                "iter": t.iteration,
                "selected": t.selected + 1,
                "logdet": num(t.logdet),
                "gain": num(t.gain),
            })
        })
        .collect();
    json!({
        "chosen": one_based(res.chosen.indices()),
        "selection_order": one_based(&res.selection_order),
        "achieved_logdet": num(res.achieved_logdet),
        "trace": trace,
        "guarantee": res.guarantee.map(|g| num(g.headline())),
        "status": res.status,
    })
}

pub fn place(system: &LtvSystem, mode: PlaceMode, opts: GreedyOptions) -> CliResult<()> {
    let obj = LogDetObjective::new(system)?;
    let res = match mode {
        PlaceMode::MinSet { budget } => greedy_p1(&obj, budget, opts)?,
        PlaceMode::Budgeted { r, l } => greedy_p2(&obj, r, l, opts)?,
    };
    emit_json(&placement_json(&res))?;
    match res.status {
        PlacementStatus::Ok => Ok(()),
        PlacementStatus::BudgetInfeasible => Err(Failure {
            code: EXIT_INFEASIBLE,
            message: format!("budget not reachable: best value {}", sig12(res.achieved_logdet)),
        }),
    }
}

pub fn bounds(system: &LtvSystem, sensors: &SensorSet, target: BoundTarget, alpha: Option<f64>) -> CliResult<()> {
    let summary = system.noise_prior_summary()?;
    let maps = StackedMaps::build(system);
    let b = mmse_bounds(system, &summary, &maps, sensors.len(), target)?;
    let mut value = json!({
        "target": b.target,
        "n_sensors": sensors.len(),
        "mu": num(summary.mu),
        "lower": num(b.lower),
        "upper": num(b.upper),
        "l_i": num(b.l_i),
        "u_i": num(b.u_i),
        "vacuous": b.vacuous,
    });
    if let Some(alpha) = alpha {
        let (n, sigma) = (system.n(), system.sigma());
        let real_and_ceiled = |v: f64| json!({ "real": num(v), "ceiled": v.max(0.0).ceil() as u64 });
        let c1 = min_sensors_for_error(&summary, alpha, system.k(), n, sigma, b.l_i)?;
        value["cor1_min_sensors"] = real_and_ceiled(c1);
        value["cor2_min_interval"] = match min_interval_for_error(&summary, alpha, n, sigma, sensors.len(), b.l_i) {
            Ok(v) => real_and_ceiled(v),
            Err(Error::InfeasibleAlpha) => json!("infeasible"),
            Err(Error::InvalidParameter(_)) => Value::Null,
            Err(e) => return Err(e.into()),
        };
    }
    emit_json(&value)
}

pub fn sweep(system: &LtvSystem, r_from: usize, r_to: usize, step: usize, opts: GreedyOptions) -> CliResult<String> {
    let n = system.n();
    if r_from > r_to {
        return Err(Failure::usage(format!("--r-from {r_from} exceeds --r-to {r_to}")));
    }
    if r_to > n {
        return Err(Failure::usage(format!("--r-to {r_to} exceeds n = {n}")));
    }
    if step == 0 {
        return Err(Failure::usage("--step must be positive"));
    }
    let obj = LogDetObjective::new(system)?;
    let mut csv = String::from("r,logdet,runtime_ms\n");
    for r in (r_from..=r_to).step_by(step) {
        let start = Instant::now();
        let value = if r == 0 { obj.value(&SensorSet::empty())? } else { greedy_p2(&obj, r, r, opts)?.achieved_logdet };
        let ms = start.elapsed().as_secs_f64() * 1e3;
        csv.push_str(&format!("{r},{},{}\n", sig12(value), sig12(ms)));
    }
    Ok(csv)
}

pub enum OracleAction {
    Dump(String),
    CheckSupermodularity,
    OptimalMinSet(f64),
    OptimalBudgeted(usize),
}

pub fn oracle(system: &LtvSystem, action: OracleAction) -> CliResult<()> {
    let obj = LogDetObjective::new(system)?;
    let table = enumerate_all(&obj)?;
    let optimal_json = |set: &SensorSet| json!({ "chosen": one_based(set.indices()), "logdet": num(table.get(set)) });
    match action {
        OracleAction::Dump(path) => write_text(Some(&path), &table.to_csv()),
        OracleAction::CheckSupermodularity => {
            let violations = table.verify_supermodularity();
            let monotone = table.verify_monotonicity();
            let worst = violations.iter().map(|v| v.excess).fold(0.0, f64::max);
            emit_json(&json!({
                "n": table.n(),
                "supermodularity_violations": violations.len(),
                "monotonicity_violations": monotone.len(),
                "worst_excess": num(worst),
            }))?;
            if violations.is_empty() {
                Ok(())
            } else {
                Err(Failure { code: 1, message: format!("{} supermodularity violations", violations.len()) })
            }
        }
        OracleAction::OptimalMinSet(budget) => emit_json(&optimal_json(&table.optimal_p1(budget)?)),
        OracleAction::OptimalBudgeted(r) => {
            if r > table.n() {
                return Err(Failure::usage(format!("r = {r} exceeds n = {}", table.n())));
            }
            emit_json(&optimal_json(&table.optimal_p2(r)))
        }
    }
}
