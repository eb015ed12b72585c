//! Agents, task allocation, incentive-weighted utility and hillclimbing.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::{Configuration, InteractionMatrix, Landscape};
use crate::learning::BeliefCounters;

/// Linear weighting of own and residual performance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncentiveScheme {
    pub alpha: f64,
    pub beta: f64,
}

impl IncentiveScheme {
    pub const INDIVIDUALISTIC: IncentiveScheme = IncentiveScheme { alpha: 1.0, beta: 0.0 };
    pub const BALANCED: IncentiveScheme = IncentiveScheme { alpha: 0.5, beta: 0.5 };
    pub const ALTRUISTIC: IncentiveScheme = IncentiveScheme { alpha: 0.25, beta: 0.75 };

    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let scheme = IncentiveScheme { alpha, beta };
        scheme.validate().map_err(Error::Config)?;
        Ok(scheme)
    }

    /// Scheme with `beta = 1 - alpha`.
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        Self::new(alpha, 1.0 - alpha)
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        let unit = 0.0..=1.0;
        if !unit.contains(&self.alpha) || !unit.contains(&self.beta) {
            return Err(format!(
                "incentive weights must lie in [0, 1] (alpha = {}, beta = {})",
                self.alpha, self.beta
            ));
        }
        if (self.alpha + self.beta - 1.0).abs() > 1e-9 {
            return Err(format!(
                "incentive weights must sum to 1 (alpha = {}, beta = {})",
                self.alpha, self.beta
            ));
        }
        Ok(())
    }

    /// Named preset this scheme matches, if any.
    pub fn name(&self) -> Option<&'static str> {
        [
            (Self::INDIVIDUALISTIC, "individualistic"),
            (Self::BALANCED, "balanced"),
            (Self::ALTRUISTIC, "altruistic"),
        ]
        .into_iter()
        .find(|(s, _)| s == self)
        .map(|(_, name)| name)
    }

    pub fn utility(&self, own: f64, residual: f64) -> f64 {
        self.alpha * own + self.beta * residual
    }
}

/// Which agent owns each decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    owner: Vec<usize>,
    agents: usize,
}

impl Allocation {
    /// Validates that every agent owns at least one decision.
    pub fn new(owner: Vec<usize>, agents: usize) -> Result<Self> {
        let alloc = Allocation { owner, agents };
        if let Some(&bad) = alloc.owner.iter().find(|&&a| a >= agents) {
            return Err(Error::Config(format!("owner {bad} out of range for {agents} agents")));
        }
        if let Some(empty) = (0..agents).find(|&a| alloc.size(a) == 0) {
            return Err(Error::Config(format!("agent {empty} owns no decision")));
        }
        Ok(alloc)
    }

    pub fn from_sets(sets: &[Vec<usize>], n: usize) -> Result<Self> {
        let mut owner = vec![usize::MAX; n];
        for (agent, set) in sets.iter().enumerate() {
            for &d in set {
                if d >= n {
                    return Err(Error::Config(format!("decision {d} out of range")));
                }
                if owner[d] != usize::MAX {
                    return Err(Error::Config(format!("decision {d} assigned twice")));
                }
                owner[d] = agent;
            }
        }
        if let Some(d) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::Config(format!("decision {d} has no owner")));
        }
        Self::new(owner, sets.len())
    }

    pub fn n(&self) -> usize {
        self.owner.len()
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn owner(&self, decision: usize) -> usize {
        self.owner[decision]
    }

    /// Decisions owned by `agent`, ascending.
    pub fn owned_by(&self, agent: usize) -> Vec<usize> {
        (0..self.n()).filter(|&d| self.owner[d] == agent).collect()
    }

    pub fn size(&self, agent: usize) -> usize {
        self.owner.iter().filter(|&&a| a == agent).count()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.agents];
        for &a in &self.owner {
            sizes[a] += 1;
        }
        sizes
    }

    pub(crate) fn reassign(&mut self, decision: usize, to: usize) {
        self.owner[decision] = to;
    }

    /// Checks the owned-set floor of 1 and the per-agent capacities.
    pub fn check(&self, capacities: &[usize]) -> std::result::Result<(), String> {
        for (agent, size) in self.sizes().into_iter().enumerate() {
            if size == 0 {
                return Err(format!("agent {agent} owns no decision"));
            }
            if size > capacities[agent] {
                return Err(format!(
                    "agent {agent} owns {size} decisions, capacity {}",
                    capacities[agent]
                ));
            }
        }
        Ok(())
    }
}

/// Uniformly random partition into `m` sets of exactly `n / m` decisions.
pub fn initial_allocation<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    capacities: &[usize],
    rng: &mut R,
) -> Result<Allocation> {
    check_equal_split(n, m)?;
    let share = n / m;
    if let Some((agent, &c)) = capacities.iter().enumerate().find(|(_, &c)| c < share) {
        return Err(Error::Config(format!(
            "agent {agent} has capacity {c} below the initial share {share}"
        )));
    }
    let mut decisions: Vec<usize> = (0..n).collect();
    decisions.shuffle(rng);
    let mut owner = vec![0; n];
    for (slot, &d) in decisions.iter().enumerate() {
        owner[d] = slot / share;
    }
    Allocation::new(owner, m)
}

/// Contiguous blocks: agent `k` owns `[k * n / m, (k + 1) * n / m)`.
pub fn mirrored_allocation(matrix: &InteractionMatrix, m: usize) -> Result<Allocation> {
    let n = matrix.n();
    check_equal_split(n, m)?;
    let share = n / m;
    Allocation::new((0..n).map(|d| d / share).collect(), m)
}

fn check_equal_split(n: usize, m: usize) -> Result<()> {
    if m == 0 || !n.is_multiple_of(m) {
        return Err(Error::Config(format!(
            "{n} decisions cannot be split equally among {m} agents"
        )));
    }
    Ok(())
}

/// Number of matrix entries `(j, i)` linking decisions of different owners.
pub fn cross_agent_dependencies(matrix: &InteractionMatrix, allocation: &Allocation) -> usize {
    let n = matrix.n();
    (0..n)
        .flat_map(|j| (0..n).map(move |i| (j, i)))
        .filter(|&(j, i)| matrix.depends(j, i) && allocation.owner(j) != allocation.owner(i))
        .count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub id: usize,
    /// Owned decisions, kept ascending.
    pub owned: Vec<usize>,
    pub capacity: usize,
    pub beliefs: BeliefCounters,
}

impl AgentState {
    pub fn new(id: usize, owned: Vec<usize>, capacity: usize, n: usize) -> Self {
        let mut owned = owned;
        owned.sort_unstable();
        AgentState {
            id,
            owned,
            capacity,
            beliefs: BeliefCounters::new(n),
        }
    }

    pub fn owns(&self, decision: usize) -> bool {
        self.owned.binary_search(&decision).is_ok()
    }

    pub(crate) fn remove(&mut self, decision: usize) {
        if let Ok(pos) = self.owned.binary_search(&decision) {
            self.owned.remove(pos);
        }
    }

    pub(crate) fn insert(&mut self, decision: usize) {
        if let Err(pos) = self.owned.binary_search(&decision) {
            self.owned.insert(pos, decision);
        }
    }

    /// Decisions not owned by this agent.
    pub fn residual(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|&d| !self.owns(d)).collect()
    }
}

/// Builds one agent per allocation set.
pub fn agents_from_allocation(allocation: &Allocation, capacities: &[usize]) -> Vec<AgentState> {
    (0..allocation.agents())
        .map(|a| AgentState::new(a, allocation.owned_by(a), capacities[a], allocation.n()))
        .collect()
}

/// Flips one uniformly chosen owned decision.
pub fn propose_neighbor<R: Rng + ?Sized>(
    agent: &AgentState,
    current: &Configuration,
    rng: &mut R,
) -> (Configuration, usize) {
    assert!(!agent.owned.is_empty(), "agent {} owns no decision", agent.id);
    let flipped = agent.owned[rng.random_range(0..agent.owned.len())];
    let mut neighbor = current.clone();
    neighbor.flip(flipped);
    (neighbor, flipped)
}

/// Utility of `agent` if `config` were implemented. An empty residual set
/// contributes 0.
pub fn agent_utility(
    agent: &AgentState,
    landscape: &Landscape,
    config: &Configuration,
    scheme: &IncentiveScheme,
) -> f64 {
    let own = landscape.performance(config, &agent.owned);
    let residual = agent.residual(landscape.n());
    let residual_perf = if residual.is_empty() {
        0.0
    } else {
        landscape.performance(config, &residual)
    };
    scheme.utility(own, residual_perf)
}

/// An agent's chosen values for its own decisions in one period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OwnDecisions {
    pub decisions: Vec<usize>,
    pub bits: Vec<bool>,
}

impl OwnDecisions {
    pub fn read(decisions: &[usize], config: &Configuration) -> Self {
        OwnDecisions {
            decisions: decisions.to_vec(),
            bits: decisions.iter().map(|&d| config.get(d)).collect(),
        }
    }
}

/// One hillclimbing move against the previous period's residual decisions.
/// The status quo wins ties. The flipped index is returned only when the
/// neighbor was adopted.
pub fn hillclimb_step<R: Rng + ?Sized>(
    agent: &AgentState,
    landscape: &Landscape,
    prev: &Configuration,
    scheme: &IncentiveScheme,
    rng: &mut R,
) -> (OwnDecisions, Option<usize>) {
    let (neighbor, flipped) = propose_neighbor(agent, prev, rng);
    let stay = agent_utility(agent, landscape, prev, scheme);
    let moved = agent_utility(agent, landscape, &neighbor, scheme);
    if stay >= moved {
        (OwnDecisions::read(&agent.owned, prev), None)
    } else {
        (OwnDecisions::read(&agent.owned, &neighbor), Some(flipped))
    }
}

/// Concatenates the agents' decisions into a full configuration. The parts
/// must cover every decision exactly once.
pub fn assemble_configuration(n: usize, parts: &[OwnDecisions]) -> Result<Configuration> {
    let mut bits = vec![None; n];
    for part in parts {
        for (&d, &b) in part.decisions.iter().zip(&part.bits) {
            if d >= n {
                return Err(Error::Config(format!("decision {d} out of range")));
            }
            if bits[d].replace(b).is_some() {
                return Err(Error::Config(format!("decision {d} set by more than one agent")));
            }
        }
    }
    bits.into_iter()
        .enumerate()
        .map(|(d, b)| b.ok_or_else(|| Error::Config(format!("decision {d} set by no agent"))))
        .collect::<Result<Vec<bool>>>()
        .map(Configuration::new)
}
