//! Beta-Bernoulli beliefs about pairwise interdependencies.
//!
//! For every ordered pair `(i, j)` an agent keeps counters `p` and `q`,
//! both starting at 1. When the agent flips `i` and then sees the
//! contribution of an owned `j` change, `p` grows; otherwise `q` grows.
//! The belief that flipping `i` affects `j` is the Beta mean `p / (p + q)`.

use crate::organization::AgentState;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeliefCounters {
    n: usize,
    p: Vec<u32>,
    q: Vec<u32>,
    /// Number of (flip, observed decision) events processed so far.
    observations: u64,
}

impl BeliefCounters {
    /// Uninformed prior: `p = q = 1` everywhere, so every belief is 0.5.
    pub fn new(n: usize) -> Self {
        BeliefCounters {
            n,
            p: vec![1; n * n],
            q: vec![1; n * n],
            observations: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        assert!(i != j, "beliefs are undefined for i = j ({i})");
        assert!(i < self.n && j < self.n, "pair ({i}, {j}) out of range");
        i * self.n + j
    }

    pub fn p(&self, i: usize, j: usize) -> u32 {
        self.p[self.idx(i, j)]
    }

    pub fn q(&self, i: usize, j: usize) -> u32 {
        self.q[self.idx(i, j)]
    }

    /// Overwrites the counters of one pair. Both counts must be at least 1.
    pub fn set_counts(&mut self, i: usize, j: usize, p: u32, q: u32) {
        assert!(p >= 1 && q >= 1, "counters must stay positive");
        let k = self.idx(i, j);
        let delta = (p + q) as i64 - (self.p[k] + self.q[k]) as i64;
        self.observations = (self.observations as i64 + delta) as u64;
        self.p[k] = p;
        self.q[k] = q;
    }

    /// Belief that flipping `i` changes the contribution of `j`.
    pub fn belief(&self, i: usize, j: usize) -> f64 {
        let k = self.idx(i, j);
        let p = self.p[k] as f64;
        p / (p + self.q[k] as f64)
    }

    /// Records one observation for the pair `(i, j)`.
    pub fn record(&mut self, i: usize, j: usize, changed: bool) {
        let k = self.idx(i, j);
        if changed {
            self.p[k] += 1;
        } else {
            self.q[k] += 1;
        }
        self.observations += 1;
    }

    /// Processes the consequences of flipping `flipped`: every other decision
    /// in `owned` is compared exactly between `before` and `after`.
    ///
    /// `before` and `after` are indexed by decision; entries outside `owned`
    /// are never read.
    pub fn observe_flip(&mut self, flipped: usize, owned: &[usize], before: &[f64], after: &[f64]) {
        assert!(
            owned.contains(&flipped),
            "flipped decision {flipped} is not in the owned set {owned:?}"
        );
        for &j in owned.iter().filter(|&&j| j != flipped) {
            self.record(flipped, j, after[j] != before[j]);
        }
    }

    /// Mean belief from owned decision `i` to every other owned decision.
    pub fn mean_internal_belief(&self, owned: &[usize], i: usize) -> f64 {
        assert!(owned.len() >= 2, "internal belief needs at least two owned decisions");
        assert!(owned.contains(&i), "decision {i} is not owned");
        let sum: f64 = owned.iter().filter(|&&j| j != i).map(|&j| self.belief(i, j)).sum();
        sum / (owned.len() - 1) as f64
    }

    /// Mean belief from an external decision `i` to every decision in `owned`.
    pub fn mean_belief_towards(&self, i: usize, owned: &[usize]) -> f64 {
        assert!(!owned.is_empty(), "mean belief over an empty portfolio");
        let sum: f64 = owned.iter().map(|&j| self.belief(i, j)).sum();
        sum / owned.len() as f64
    }

    pub fn observations(&self) -> u64 {
        self.observations
    }

    /// `sum(p + q - 2)` over all off-diagonal pairs; equals
    /// [`observations`](Self::observations) unless the counters were corrupted.
    pub fn evidence_total(&self) -> u64 {
        (0..self.n * self.n)
            .filter(|k| k / self.n != k % self.n)
            .map(|k| (self.p[k] + self.q[k] - 2) as u64)
            .sum()
    }
}

/// Belief update for an agent that flipped `flipped` this period.
pub fn update_beliefs(agent: &mut AgentState, flipped: usize, before: &[f64], after: &[f64]) {
    let AgentState { owned, beliefs, .. } = agent;
    beliefs.observe_flip(flipped, owned, before, after);
}
