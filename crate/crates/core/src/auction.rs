//! Periodic re-allocation of decisions through sealed-bid second-price auctions.
//!
//! Every agent owning at least two decisions offers one of them with a
//! reserve (minimum) price. Offers are then cleared one at a time in a
//! random order. Agents below capacity bid on every offer except their own;
//! the highest bid wins if it reaches the reserve and the winner is charged
//! the second-highest bid when that exceeds the reserve, otherwise the
//! reserve itself. Payments are bookkeeping only.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::InvariantViolation;
use crate::landscape::{Configuration, Landscape};
use crate::organization::{AgentState, Allocation};

/// How agents price offers and bids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuctionStrategy {
    /// Offer the weakest contribution, bid a noisy estimate of the offered one.
    Utility,
    /// Offer the decision least tied to the rest of the portfolio, bid the
    /// mean belief that the offered decision interacts with one's own.
    Interdependence,
}

impl AuctionStrategy {
    pub fn name(self) -> &'static str {
        match self {
            AuctionStrategy::Utility => "utility",
            AuctionStrategy::Interdependence => "interdependence",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Offer {
    pub seller: usize,
    pub decision: usize,
    pub min_price: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bid {
    pub bidder: usize,
    pub decision: usize,
    pub amount: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TradeRecord {
    pub period: u32,
    pub decision: usize,
    pub seller: usize,
    pub winner: usize,
    pub winning_bid: f64,
    pub price: f64,
    pub min_price: f64,
}

/// Indices of the minimal values, compared exactly.
fn argmin_set(values: &[f64]) -> Vec<usize> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    (0..values.len()).filter(|&k| values[k] == min).collect()
}

fn pick<R: Rng + ?Sized>(candidates: &[usize], rng: &mut R) -> usize {
    *candidates.choose(rng).expect("non-empty candidate set")
}

/// Offers the owned decision with the lowest current contribution; abstains
/// when the agent owns fewer than two decisions.
pub fn select_offer_utility<R: Rng + ?Sized>(
    agent: &AgentState,
    landscape: &Landscape,
    config: &Configuration,
    rng: &mut R,
) -> Option<Offer> {
    if agent.owned.len() < 2 {
        return None;
    }
    let values: Vec<f64> = agent.owned.iter().map(|&d| landscape.contribution(config, d)).collect();
    let k = pick(&argmin_set(&values), rng);
    Some(Offer {
        seller: agent.id,
        decision: agent.owned[k],
        min_price: values[k],
    })
}

/// Offers the owned decision with the lowest mean internal belief; the
/// reserve is that mean.
pub fn select_offer_interdependence<R: Rng + ?Sized>(agent: &AgentState, rng: &mut R) -> Option<Offer> {
    if agent.owned.len() < 2 {
        return None;
    }
    let values: Vec<f64> = agent
        .owned
        .iter()
        .map(|&d| agent.beliefs.mean_internal_belief(&agent.owned, d))
        .collect();
    let k = pick(&argmin_set(&values), rng);
    Some(Offer {
        seller: agent.id,
        decision: agent.owned[k],
        min_price: values[k],
    })
}

fn may_bid(bidder: &AgentState, offer: &Offer) -> bool {
    assert!(bidder.id != offer.seller, "agent {} bid on its own offer", bidder.id);
    bidder.owned.len() < bidder.capacity
}

/// Bids the true contribution of the offered decision plus `N(0, sigma)`
/// noise. The amount is not clamped.
pub fn bid_utility<R: Rng + ?Sized>(
    bidder: &AgentState,
    offer: &Offer,
    landscape: &Landscape,
    config: &Configuration,
    sigma: f64,
    rng: &mut R,
) -> Option<Bid> {
    if !may_bid(bidder, offer) {
        return None;
    }
    let truth = landscape.contribution(config, offer.decision);
    let noise = if sigma > 0.0 {
        Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
    } else {
        0.0
    };
    Some(Bid {
        bidder: bidder.id,
        decision: offer.decision,
        amount: truth + noise,
    })
}

/// Bids the mean belief that the offered decision affects each owned decision.
pub fn bid_interdependence(bidder: &AgentState, offer: &Offer) -> Option<Bid> {
    if !may_bid(bidder, offer) {
        return None;
    }
    Some(Bid {
        bidder: bidder.id,
        decision: offer.decision,
        amount: bidder.beliefs.mean_belief_towards(offer.decision, &bidder.owned),
    })
}

/// What clearing needs to know about the current period.
#[derive(Debug, Clone, Copy)]
pub struct AuctionContext<'a> {
    pub strategy: AuctionStrategy,
    pub landscape: &'a Landscape,
    pub config: &'a Configuration,
    pub sigma: f64,
    pub period: u32,
}

/// Collects one offer per agent (agents owning a single decision abstain).
pub fn collect_offers<R: Rng + ?Sized>(
    agents: &[AgentState],
    ctx: &AuctionContext<'_>,
    rng: &mut R,
) -> Vec<Offer> {
    agents
        .iter()
        .filter_map(|a| match ctx.strategy {
            AuctionStrategy::Utility => select_offer_utility(a, ctx.landscape, ctx.config, rng),
            AuctionStrategy::Interdependence => select_offer_interdependence(a, rng),
        })
        .collect()
}

/// Clears `offers` sequentially in a uniformly random order, updating the
/// allocation and the agents' owned sets after every trade.
///
/// `noise` drives the utility-bid errors; `ties` drives processing order
/// and tie-breaking among equal maximal bids.
pub fn clear_auction<N: Rng + ?Sized, T: Rng + ?Sized>(
    offers: &[Offer],
    allocation: &mut Allocation,
    agents: &mut [AgentState],
    ctx: &AuctionContext<'_>,
    noise: &mut N,
    ties: &mut T,
) -> Result<Vec<TradeRecord>, InvariantViolation> {
    let mut order: Vec<usize> = (0..offers.len()).collect();
    order.shuffle(ties);
    let capacities: Vec<usize> = agents.iter().map(|a| a.capacity).collect();
    let mut trades = Vec::new();

    for offer in order.into_iter().map(|k| &offers[k]) {
        if allocation.owner(offer.decision) != offer.seller {
            return Err(InvariantViolation::agent(
                offer.seller,
                format!("offered decision {} is no longer owned by the seller", offer.decision),
            ));
        }
        let bids: Vec<Bid> = agents
            .iter()
            .filter(|a| a.id != offer.seller)
            .filter_map(|a| match ctx.strategy {
                AuctionStrategy::Utility => {
                    bid_utility(a, offer, ctx.landscape, ctx.config, ctx.sigma, noise)
                }
                AuctionStrategy::Interdependence => bid_interdependence(a, offer),
            })
            .collect();
        let Some(trade) = settle(offer, &bids, ctx.period, ties) else {
            continue;
        };

        let winner = &agents[trade.winner];
        if winner.owned.len() >= winner.capacity {
            return Err(InvariantViolation::agent(
                trade.winner,
                format!("award of decision {} would exceed capacity {}", trade.decision, winner.capacity),
            ));
        }
        if agents[offer.seller].owned.len() < 2 {
            return Err(InvariantViolation::agent(
                offer.seller,
                format!("sale of decision {} would leave the seller empty", trade.decision),
            ));
        }
        agents[offer.seller].remove(offer.decision);
        agents[trade.winner].insert(offer.decision);
        allocation.reassign(offer.decision, trade.winner);

        check_consistency(allocation, agents, &capacities)?;
        if !(trade.min_price <= trade.price && trade.price <= trade.winning_bid) {
            return Err(InvariantViolation::agent(
                trade.winner,
                format!(
                    "price {} outside [min_price {}, winning bid {}]",
                    trade.price, trade.min_price, trade.winning_bid
                ),
            ));
        }
        trades.push(trade);
    }
    Ok(trades)
}

/// Applies the second-price rule to the bids for one offer.
pub fn settle<R: Rng + ?Sized>(offer: &Offer, bids: &[Bid], period: u32, ties: &mut R) -> Option<TradeRecord> {
    let max = bids.iter().map(|b| b.amount).fold(f64::NEG_INFINITY, f64::max);
    if bids.is_empty() || max < offer.min_price {
        return None;
    }
    let top: Vec<usize> = (0..bids.len()).filter(|&k| bids[k].amount == max).collect();
    let win = pick(&top, ties);
    let second = bids
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != win)
        .map(|(_, b)| b.amount)
        .fold(f64::NEG_INFINITY, f64::max);
    let price = if second > offer.min_price { second } else { offer.min_price };
    Some(TradeRecord {
        period,
        decision: offer.decision,
        seller: offer.seller,
        winner: bids[win].bidder,
        winning_bid: max,
        price,
        min_price: offer.min_price,
    })
}

/// Agents' owned sets must mirror the allocation, respect capacities and
/// never be empty.
pub fn check_consistency(
    allocation: &Allocation,
    agents: &[AgentState],
    capacities: &[usize],
) -> Result<(), InvariantViolation> {
    for agent in agents {
        if agent.owned != allocation.owned_by(agent.id) {
            return Err(InvariantViolation::agent(
                agent.id,
                "owned set disagrees with the allocation".to_string(),
            ));
        }
    }
    allocation.check(capacities).map_err(InvariantViolation::new)
}
