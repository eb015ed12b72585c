//! Period loop, replications, experiments and grids.
//!
//! In period `t` (starting at 1) the organization either holds an auction
//! (`t mod tau == 0`, auction strategies only) or every agent hillclimbs
//! once against the previous period's configuration, the moves are applied
//! together, and agents that flipped a decision update their beliefs.
//! Auction periods leave the configuration unchanged.

use rayon::prelude::*;
use serde::Serialize;

use crate::auction::{check_consistency, clear_auction, collect_offers, AuctionContext, TradeRecord};
use crate::error::{Error, InvariantViolation, Result};
use crate::landscape::{Configuration, InteractionMatrix, Landscape};
use crate::learning::{update_beliefs, BeliefCounters};
use crate::organization::{
    agents_from_allocation, assemble_configuration, hillclimb_step, initial_allocation, mirrored_allocation,
    AgentState, OwnDecisions,
};
use crate::scenario::{GridAxes, ScenarioConfig, Strategy};
use crate::seeds::{Role, SeedBank};

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.576;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodRecord {
    pub period: u32,
    pub performance: f64,
    pub normalized: f64,
    pub owned_sizes: Vec<usize>,
    pub trades: usize,
}

/// Belief counters of one agent at the start of an auction period.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefSnapshot {
    pub period: u32,
    pub agent: usize,
    pub beliefs: BeliefCounters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationOutcome {
    pub replication: u64,
    pub optimum: f64,
    pub records: Vec<PeriodRecord>,
    pub trades: Vec<TradeRecord>,
    pub agents: Vec<AgentState>,
    /// Per agent: flips adopted times the other decisions owned at the time,
    /// tallied by the scheduler independently of the counters.
    pub observation_tally: Vec<u64>,
    pub belief_snapshots: Vec<BeliefSnapshot>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Keep belief counters at every auction period of replication 0.
    pub record_beliefs: bool,
    /// Worker threads for replications; `None` uses the global pool.
    pub jobs: Option<usize>,
}

/// Runs one replication of `scenario` with streams from `bank`.
pub fn run_replication(
    scenario: &ScenarioConfig,
    matrix: &InteractionMatrix,
    bank: &SeedBank,
    replication: u64,
    options: &RunOptions,
) -> Result<ReplicationOutcome> {
    let n = scenario.n;
    let fail = |period: u32| move |v: InvariantViolation| v.at(replication, period);

    let landscape = Landscape::generate(matrix.clone(), &mut bank.stream(replication, Role::Landscape))?;
    let mut allocation = match scenario.strategy {
        Strategy::Benchmark => mirrored_allocation(matrix, scenario.m)?,
        _ => initial_allocation(
            n,
            scenario.m,
            &scenario.capacities,
            &mut bank.stream(replication, Role::Allocation),
        )?,
    };
    let mut agents = agents_from_allocation(&allocation, &scenario.capacities);
    let mut config = Configuration::random(n, &mut bank.stream(replication, Role::InitialConfig));
    let mut hill_rng = bank.stream(replication, Role::Hillclimb);
    let mut noise_rng = bank.stream(replication, Role::AuctionNoise);
    let mut tie_rng = bank.stream(replication, Role::TieBreak);

    let optimum = landscape.optimum().performance;
    let mut records = Vec::with_capacity(scenario.horizon as usize);
    let mut trades = Vec::new();
    let mut tally = vec![0u64; agents.len()];
    let mut snapshots = Vec::new();

    for period in 1..=scenario.horizon {
        let auction = scenario.strategy.auction().filter(|_| period % scenario.tau == 0);
        let mut period_trades = 0;
        if let Some(strategy) = auction {
            if options.record_beliefs && replication == 0 {
                snapshots.extend(agents.iter().map(|a| BeliefSnapshot {
                    period,
                    agent: a.id,
                    beliefs: a.beliefs.clone(),
                }));
            }
            let ctx = AuctionContext {
                strategy,
                landscape: &landscape,
                config: &config,
                sigma: scenario.sigma,
                period,
            };
            let offers = collect_offers(&agents, &ctx, &mut tie_rng);
            let cleared = clear_auction(&offers, &mut allocation, &mut agents, &ctx, &mut noise_rng, &mut tie_rng)
                .map_err(fail(period))?;
            period_trades = cleared.len();
            trades.extend(cleared);
            check_beliefs(&agents, &tally).map_err(fail(period))?;
        } else {
            let before = landscape.contributions(&config);
            let moves: Vec<(OwnDecisions, Option<usize>)> = agents
                .iter()
                .map(|a| hillclimb_step(a, &landscape, &config, &scenario.incentive, &mut hill_rng))
                .collect();
            let parts: Vec<OwnDecisions> = moves.iter().map(|(own, _)| own.clone()).collect();
            config = assemble_configuration(n, &parts)
                .map_err(|e| InvariantViolation::new(e.to_string()))
                .map_err(fail(period))?;
            let after = landscape.contributions(&config);
            for (agent, (_, flipped)) in agents.iter_mut().zip(&moves) {
                if let Some(i) = *flipped {
                    tally[agent.id] += (agent.owned.len() - 1) as u64;
                    update_beliefs(agent, i, &before, &after);
                }
            }
        }

        check_consistency(&allocation, &agents, &scenario.capacities).map_err(fail(period))?;
        let performance = landscape.total_performance(&config);
        let normalized = performance / optimum;
        if !(normalized > 0.0 && normalized <= 1.0) {
            return Err(fail(period)(InvariantViolation::new(format!(
                "normalized performance {normalized} outside (0, 1]"
            ))));
        }
        records.push(PeriodRecord {
            period,
            performance,
            normalized,
            owned_sizes: allocation.sizes(),
            trades: period_trades,
        });
    }
    check_beliefs(&agents, &tally).map_err(fail(scenario.horizon))?;

    Ok(ReplicationOutcome {
        replication,
        optimum,
        records,
        trades,
        agents,
        observation_tally: tally,
        belief_snapshots: snapshots,
    })
}

fn check_beliefs(agents: &[AgentState], tally: &[u64]) -> Result<(), InvariantViolation> {
    for agent in agents {
        let evidence = agent.beliefs.evidence_total();
        if evidence != tally[agent.id] {
            return Err(InvariantViolation::agent(
                agent.id,
                format!("belief counters hold {evidence} observations, expected {}", tally[agent.id]),
            ));
        }
    }
    Ok(())
}

/// Seed bookkeeping for one experiment cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeedLedger {
    pub master_seed: u64,
    pub cell: u64,
    pub cell_key: u64,
    pub replications: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub cell: u64,
    pub label: String,
    pub scenario: ScenarioConfig,
    /// Mean normalized performance for periods `1..=T`.
    pub mean: Vec<f64>,
    /// 99% confidence half-width per period.
    pub ci99_half_width: Vec<f64>,
    pub seeds: SeedLedger,
    #[serde(skip)]
    pub trades: Vec<(u64, TradeRecord)>,
    #[serde(skip)]
    pub belief_snapshots: Vec<BeliefSnapshot>,
}

impl ExperimentResult {
    /// Mean and half-width at period `t` (1-based).
    pub fn at(&self, t: u32) -> Option<(f64, f64)> {
        let k = (t as usize).checked_sub(1)?;
        Some((*self.mean.get(k)?, self.ci99_half_width[k]))
    }
}

/// Runs all replications of one cell, in replication order.
pub fn run_replications(
    scenario: &ScenarioConfig,
    cell: u64,
    options: &RunOptions,
) -> Result<Vec<ReplicationOutcome>> {
    scenario.validate()?;
    let matrix = scenario.structure.matrix(scenario.n)?;
    let bank = SeedBank::new(scenario.seed, cell);
    let work = || {
        (0..scenario.replications)
            .into_par_iter()
            .map(|rep| run_replication(scenario, &matrix, &bank, rep, options))
            .collect::<Result<Vec<_>>>()
    };
    match options.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| Error::Config(format!("cannot start {jobs} worker threads: {e}")))?
            .install(work),
        None => work(),
    }
}

/// Per-period mean and 99% half-width (`Z99 * s / sqrt(S)`, sample standard
/// deviation) of normalized performance, reduced in replication order.
pub fn aggregate(outcomes: &[ReplicationOutcome], horizon: u32) -> (Vec<f64>, Vec<f64>) {
    let s = outcomes.len();
    let mut mean = Vec::with_capacity(horizon as usize);
    let mut half = Vec::with_capacity(horizon as usize);
    for k in 0..horizon as usize {
        let values: Vec<f64> = outcomes.iter().map(|o| o.records[k].normalized).collect();
        let (m, h) = mean_and_half_width(&values);
        debug_assert_eq!(values.len(), s);
        mean.push(m);
        half.push(h);
    }
    (mean, half)
}

pub fn mean_and_half_width(values: &[f64]) -> (f64, f64) {
    let s = values.len();
    if s == 0 {
        return (f64::NAN, f64::NAN);
    }
    if values.iter().all(|&v| v == values[0]) {
        return (values[0], 0.0);
    }
    let mean = values.iter().sum::<f64>() / s as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (s - 1) as f64;
    (mean, Z99 * var.sqrt() / (s as f64).sqrt())
}

/// Runs one experiment cell. `run_experiment(s)` is cell 0.
pub fn run_cell(scenario: &ScenarioConfig, cell: u64, options: &RunOptions) -> Result<ExperimentResult> {
    let outcomes = run_replications(scenario, cell, options)?;
    let (mean, ci99_half_width) = aggregate(&outcomes, scenario.horizon);
    let bank = SeedBank::new(scenario.seed, cell);
    let mut trades = Vec::new();
    let mut belief_snapshots = Vec::new();
    for o in outcomes {
        trades.extend(o.trades.into_iter().map(|t| (o.replication, t)));
        belief_snapshots.extend(o.belief_snapshots);
    }
    Ok(ExperimentResult {
        cell,
        label: scenario.label(),
        scenario: scenario.clone(),
        mean,
        ci99_half_width,
        seeds: SeedLedger {
            master_seed: scenario.seed,
            cell,
            cell_key: bank.cell_key(),
            replications: scenario.replications,
        },
        trades,
        belief_snapshots,
    })
}

pub fn run_experiment(scenario: &ScenarioConfig, options: &RunOptions) -> Result<ExperimentResult> {
    run_cell(scenario, 0, options)
}

/// Runs every cell of the grid; cell `k` draws from seed bank `(seed, k)`.
pub fn run_grid(base: &ScenarioConfig, axes: &GridAxes, options: &RunOptions) -> Result<Vec<ExperimentResult>> {
    if axes.is_empty() {
        return Err(Error::Config("grid axes must not be empty".into()));
    }
    axes.cells(base)
        .iter()
        .enumerate()
        .map(|(k, cell)| run_cell(cell, k as u64, options))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::organization::IncentiveScheme;
    use crate::scenario::Structure;
    use crate::landscape::StructureKind;

    fn small(strategy: Strategy) -> ScenarioConfig {
        ScenarioConfig {
            strategy,
            structure: Structure::Stylized(StructureKind::NondecomposableK5),
            horizon: 100,
            replications: 4,
            ..ScenarioConfig::default()
        }
    }

    fn one(s: &ScenarioConfig, rep: u64) -> ReplicationOutcome {
        let matrix = s.structure.matrix(s.n).unwrap();
        run_replication(s, &matrix, &SeedBank::new(s.seed, 0), rep, &RunOptions::default()).unwrap()
    }

    #[test]
    fn benchmark_never_trades() {
        let o = one(&small(Strategy::Benchmark), 0);
        assert!(o.trades.is_empty());
        assert!(o.records.iter().all(|r| r.trades == 0 && r.owned_sizes == vec![3; 5]));
    }

    #[test]
    fn auction_cadence() {
        let s = ScenarioConfig {
            horizon: 500,
            ..small(Strategy::Utility)
        };
        let o = one(&s, 1);
        let auction_periods: Vec<u32> = (1..=500).filter(|t| t % 25 == 0).collect();
        assert_eq!(auction_periods.len(), 20);
        assert!(o.trades.iter().all(|t| t.period % 25 == 0));
        for r in &o.records {
            if r.period % 25 != 0 {
                assert_eq!(r.trades, 0);
            }
        }
        // Configuration is frozen across auction periods.
        for w in o.records.windows(2) {
            if w[1].period % 25 == 0 {
                assert_eq!(w[0].performance, w[1].performance);
            }
        }
    }

    #[test]
    fn replication_is_deterministic() {
        let s = small(Strategy::Interdependence);
        assert_eq!(one(&s, 2), one(&s, 2));
        assert_ne!(one(&s, 2).records, one(&s, 3).records);
    }

    #[test]
    fn single_agent_separable_converges() {
        let s = ScenarioConfig {
            m: 1,
            capacities: vec![15],
            structure: Structure::File(std::path::PathBuf::new()),
            ..small(Strategy::Benchmark)
        };
        let matrix = InteractionMatrix::identity(15).unwrap();
        let o = run_replication(
            &ScenarioConfig { horizon: 400, ..s },
            &matrix,
            &SeedBank::new(3, 0),
            0,
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(o.records.last().unwrap().normalized, 1.0);
        for w in o.records.windows(2) {
            assert!(w[1].performance >= w[0].performance);
        }
    }

    #[test]
    fn degenerate_statistics() {
        assert_eq!(mean_and_half_width(&[0.7]), (0.7, 0.0));
        assert_eq!(mean_and_half_width(&[0.4, 0.4, 0.4]), (0.4, 0.0));
        let (m, h) = mean_and_half_width(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        let s = (5.0f64 / 3.0).sqrt();
        assert!((h - Z99 * s / 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_replication_experiment() {
        let s = ScenarioConfig {
            replications: 1,
            ..small(Strategy::Utility)
        };
        let r = run_experiment(&s, &RunOptions::default()).unwrap();
        let o = one(&s, 0);
        let series: Vec<f64> = o.records.iter().map(|r| r.normalized).collect();
        assert_eq!(r.mean, series);
        assert!(r.ci99_half_width.iter().all(|&h| h == 0.0));
    }

    #[test]
    fn jobs_do_not_change_results() {
        let s = small(Strategy::Utility);
        let a = run_experiment(&s, &RunOptions { jobs: Some(1), ..Default::default() }).unwrap();
        let b = run_experiment(&s, &RunOptions { jobs: Some(3), ..Default::default() }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn grid_cells_and_seeds() {
        let base = ScenarioConfig {
            horizon: 30,
            replications: 2,
            ..ScenarioConfig::default()
        };
        let axes = GridAxes {
            incentives: vec![IncentiveScheme::BALANCED],
            ..GridAxes::standard()
        };
        let results = run_grid(&base, &axes, &RunOptions::default()).unwrap();
        assert_eq!(results.len(), 6);
        let keys: std::collections::HashSet<u64> = results.iter().map(|r| r.seeds.cell_key).collect();
        assert_eq!(keys.len(), 6);

        let single = GridAxes::single(&base);
        let g = run_grid(&base, &single, &RunOptions::default()).unwrap();
        assert_eq!(g[0], run_experiment(&base, &RunOptions::default()).unwrap());
    }

    #[test]
    fn belief_snapshots_only_when_requested() {
        let s = ScenarioConfig {
            replications: 2,
            ..small(Strategy::Interdependence)
        };
        let quiet = run_experiment(&s, &RunOptions::default()).unwrap();
        assert!(quiet.belief_snapshots.is_empty());
        let loud = run_experiment(&s, &RunOptions { record_beliefs: true, jobs: None }).unwrap();
        // Four auction periods in 100, five agents, replication 0 only.
        assert_eq!(loud.belief_snapshots.len(), 4 * 5);
    }
}
