//! Result files: per-period CSV, JSON metadata sidecar, trade ledger and
//! belief dumps.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::scenario::{ScenarioConfig, BLOCK_SIZE};
use crate::seeds::GENERATOR;
use crate::simulation::ExperimentResult;

pub const RESULTS_HEADER: &str = "cell,period,mean_norm_perf,ci99_half_width";
pub const TRADES_HEADER: &str = "cell,replication,period,decision,seller,winner,winning_bid,price,strategy";
pub const BELIEFS_HEADER: &str = "cell,replication,period,agent,i,j,p,q,belief";

/// Periods shown in the summary table.
pub const SUMMARY_PERIODS: [u32; 3] = [100, 250, 500];

pub fn results_csv(results: &[ExperimentResult]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in results {
        for (k, (m, h)) in r.mean.iter().zip(&r.ci99_half_width).enumerate() {
            let _ = writeln!(out, "{},{},{},{}", r.cell, k + 1, m, h);
        }
    }
    out
}

pub fn trades_csv(results: &[ExperimentResult]) -> String {
    let mut out = String::from(TRADES_HEADER);
    out.push('\n');
    for r in results {
        let strategy = r.scenario.strategy.name();
        for (rep, t) in &r.trades {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.cell, rep, t.period, t.decision, t.seller, t.winner, t.winning_bid, t.price, strategy
            );
        }
    }
    out
}

/// Belief counters recorded at auction periods (replication 0 of each cell).
pub fn beliefs_csv(results: &[ExperimentResult]) -> String {
    let mut out = String::from(BELIEFS_HEADER);
    out.push('\n');
    for r in results {
        for snap in &r.belief_snapshots {
            let b = &snap.beliefs;
            for i in 0..b.n() {
                for j in (0..b.n()).filter(|&j| j != i) {
                    let _ = writeln!(
                        out,
                        "{},0,{},{},{},{},{},{},{}",
                        r.cell,
                        snap.period,
                        snap.agent,
                        i,
                        j,
                        b.p(i, j),
                        b.q(i, j),
                        b.belief(i, j)
                    );
                }
            }
        }
    }
    out
}

#[derive(Serialize)]
struct CellMeta<'a> {
    cell: u64,
    label: &'a str,
    scenario: &'a ScenarioConfig,
    seeds: &'a crate::simulation::SeedLedger,
    matrix: Vec<String>,
}

pub fn metadata_json(results: &[ExperimentResult]) -> Result<String> {
    let cells = results
        .iter()
        .map(|r| {
            let matrix = r.scenario.structure.matrix(r.scenario.n)?.rows();
            Ok(CellMeta {
                cell: r.cell,
                label: &r.label,
                scenario: &r.scenario,
                seeds: &r.seeds,
                matrix,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let doc = json!({
        "artifact": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "generator": GENERATOR,
        "table_uniform": "U[0,1) via rand::Rng::random::<f64>()",
        "initial_configuration": "uniform over all 2^n configurations",
        "k5_pattern": "block-mates plus (j+3, j+6, j+9) mod n, advancing past own-block and repeated decisions",
        "block_size": BLOCK_SIZE,
        "ci": "2.576 * sample_std / sqrt(S)",
        "cells": cells,
    });
    serde_json::to_string_pretty(&doc).map_err(|e| Error::Config(e.to_string()))
}

/// Fixed-width summary of the mean at the summary periods within the horizon.
pub fn summary_table(results: &[ExperimentResult]) -> String {
    let horizon = results.iter().map(|r| r.scenario.horizon).max().unwrap_or(0);
    let mut periods: Vec<u32> = SUMMARY_PERIODS.iter().copied().filter(|&t| t <= horizon).collect();
    if !periods.contains(&horizon) && horizon > 0 {
        periods.push(horizon);
    }
    let width = results.iter().map(|r| r.label.len()).max().unwrap_or(0).max(5);
    let mut out = format!("{:>4}  {:<width$}", "cell", "label");
    for t in &periods {
        let _ = write!(out, "  {:>17}", format!("t={t}"));
    }
    out.push('\n');
    for r in results {
        let _ = write!(out, "{:>4}  {:<width$}", r.cell, r.label);
        for &t in &periods {
            match r.at(t) {
                Some((m, h)) => {
                    let _ = write!(out, "  {:>8.4} ± {:<6.4}", m, h);
                }
                None => {
                    let _ = write!(out, "  {:>17}", "-");
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Which files to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Emit {
    pub csv: bool,
    pub json: bool,
    pub beliefs: bool,
    pub trades: bool,
}

impl Default for Emit {
    fn default() -> Self {
        Emit {
            csv: true,
            json: true,
            beliefs: false,
            trades: false,
        }
    }
}

/// Writes the requested files under `dir` and returns their paths.
pub fn write_outputs(dir: &Path, results: &[ExperimentResult], emit: Emit) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files: Vec<(&str, String)> = Vec::new();
    if emit.csv {
        files.push(("results.csv", results_csv(results)));
    }
    if emit.json {
        files.push(("metadata.json", metadata_json(results)?));
    }
    if emit.trades {
        files.push(("trades.csv", trades_csv(results)));
    }
    if emit.beliefs {
        files.push(("beliefs.csv", beliefs_csv(results)));
    }
    files
        .into_iter()
        .map(|(name, body)| {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}
