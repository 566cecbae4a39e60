//! CSV persistence. Rows are written in (variant, replication, iteration)
//! order and floats use the shortest round-trip representation, so identical
//! results give byte-identical files.

use std::io::Write;
use std::path::Path;

use csv::Writer;

use crate::features::FEATURE_NAMES;
use crate::learner::Variant;
use crate::lfd::DirectionState;

use super::eval::rescale_weights_for_report;
use super::ReplicationResult;

pub const LEARNING_CURVE: &str = "learning_curve.csv";
pub const WEIGHTS: &str = "weights.csv";
pub const DIRECTIONS: &str = "directions.csv";
pub const METER: &str = "meter.csv";
pub const AGGREGATED_CURVE: &str = "aggregated_curve.csv";
pub const TRACES_DIR: &str = "traces";

pub fn trace_file_name(variant: Variant, replication: u32) -> String {
    format!("{}_r{}.csv", variant.as_str(), replication)
}

fn beta_columns() -> impl Iterator<Item = String> {
    FEATURE_NAMES.iter().map(|n| format!("beta_{n}"))
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn write_all(dir: &Path, results: &[ReplicationResult]) -> csv::Result<()> {
    std::fs::create_dir_all(dir.join(TRACES_DIR))?;
    for r in results {
        write_trace(&dir.join(TRACES_DIR).join(trace_file_name(r.variant, r.replication)), r)?;
    }
    write_learning_curve(&dir.join(LEARNING_CURVE), results)?;
    write_weights(&dir.join(WEIGHTS), results)?;
    write_directions_file(&dir.join(DIRECTIONS), results)?;
    write_meter(&dir.join(METER), results)?;
    write_aggregated_curve(&dir.join(AGGREGATED_CURVE), results)?;
    Ok(())
}

fn write_trace(path: &Path, r: &ReplicationResult) -> csv::Result<()> {
    let mut w = Writer::from_path(path)?;
    let mut header: Vec<String> = [
        "iteration",
        "phase",
        "lambda",
        "window",
        "generative_calls",
        "terminal",
        "fit_flagged",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(beta_columns());
    w.write_record(&header)?;
    for row in &r.trace.rows {
        let mut rec = vec![
            row.iteration.to_string(),
            row.phase.as_str().to_string(),
            opt(row.lambda),
            row.window.to_string(),
            row.meter_delta.to_string(),
            flag(row.terminal).to_string(),
            flag(row.fit_flagged).to_string(),
        ];
        rec.extend(row.weights.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn write_learning_curve(path: &Path, results: &[ReplicationResult]) -> csv::Result<()> {
    let mut w = Writer::from_path(path)?;
    w.write_record([
        "variant",
        "replication",
        "iteration",
        "phase",
        "mean_score",
        "std_score",
        "games",
        "capped_games",
    ])?;
    for r in results {
        for p in &r.curve {
            w.write_record([
                r.variant.as_str().to_string(),
                r.replication.to_string(),
                p.iteration.to_string(),
                p.phase.as_str().to_string(),
                p.eval.mean_score.to_string(),
                p.eval.std_score.to_string(),
                p.eval.games.to_string(),
                p.eval.capped_games.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reported weights are divided by `|beta_rows_with_holes|`; `rescaled_flag`
/// is 1 when that happened and 0 when the normalizer was zero and the weights
/// are written as they are. Iteration 0 is the initial policy.
fn write_weights(path: &Path, results: &[ReplicationResult]) -> csv::Result<()> {
    let mut w = Writer::from_path(path)?;
    let mut header: Vec<String> = ["variant", "replication", "iteration", "phase", "lambda"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(beta_columns());
    header.push("rescaled_flag".into());
    w.write_record(&header)?;
    for r in results {
        let initial = std::iter::once((0, r.initial_phase(), None, r.trace.initial_weights));
        let rows = r
            .trace
            .rows
            .iter()
            .map(|row| (row.iteration, row.phase, row.lambda, row.weights));
        for (iteration, phase, lambda, weights) in initial.chain(rows) {
            let (scaled, rescaled) = rescale_weights_for_report(&weights);
            let mut rec = vec![
                r.variant.as_str().to_string(),
                r.replication.to_string(),
                iteration.to_string(),
                phase.as_str().to_string(),
                opt(lambda),
            ];
            rec.extend(scaled.iter().map(f64::to_string));
            rec.push(flag(rescaled).to_string());
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub const DIRECTIONS_HEADER: [&str; 7] = [
    "variant",
    "replication",
    "feature",
    "direction",
    "decided_at_iteration",
    "n_plus",
    "n_minus",
];

/// Appends one row per feature; undecided features have an empty
/// `decided_at_iteration`.
pub fn write_direction_rows<W: Write>(
    w: &mut Writer<W>,
    variant: &str,
    replication: u32,
    state: &DirectionState,
) -> csv::Result<()> {
    for (i, name) in FEATURE_NAMES.iter().enumerate() {
        w.write_record([
            variant.to_string(),
            replication.to_string(),
            name.to_string(),
            state.directions[i].to_string(),
            opt(state.decided_at[i]),
            state.n_plus[i].to_string(),
            state.n_minus[i].to_string(),
        ])?;
    }
    Ok(())
}

fn write_directions_file(path: &Path, results: &[ReplicationResult]) -> csv::Result<()> {
    let mut w = Writer::from_path(path)?;
    w.write_record(DIRECTIONS_HEADER)?;
    for r in results {
        if let Some(state) = &r.trace.directions {
            write_direction_rows(&mut w, r.variant.as_str(), r.replication, state)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_meter(path: &Path, results: &[ReplicationResult]) -> csv::Result<()> {
    let mut w = Writer::from_path(path)?;
    w.write_record(["variant", "replication", "iteration", "generative_calls"])?;
    for r in results {
        for row in &r.trace.rows {
            w.write_record([
                r.variant.as_str().to_string(),
                r.replication.to_string(),
                row.iteration.to_string(),
                row.meter_delta.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Pointwise mean over replications of each variant's learning curve, with
/// the between-replication standard deviation.
fn write_aggregated_curve(path: &Path, results: &[ReplicationResult]) -> csv::Result<()> {
    let mut w = Writer::from_path(path)?;
    w.write_record(["variant", "iteration", "replications", "mean_score", "sd_between_replications"])?;
    for curve in super::aggregate_curves(results) {
        w.write_record([
            curve.variant.as_str().to_string(),
            curve.iteration.to_string(),
            curve.replications.to_string(),
            curve.mean_score.to_string(),
            curve.sd_between_replications.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
