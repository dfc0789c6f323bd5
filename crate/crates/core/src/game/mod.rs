//! Finite one-round sequential games with perfect information.
//!
//! Players move one after the other in a fixed decision order, each seeing
//! the choices already made. [`solve_backward_induction`] returns the
//! subgame-perfect profile; [`exhaustive_solve`] recomputes it bottom-up over
//! the explicit game tree and serves as an oracle.

mod decision;

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::Result;

pub use decision::{build_decision_game, CostTable, DecisionGame, Equilibrium, EquilibriumCache, PatternSet};

/// Strategy index chosen by each player, indexed by player.
pub type StrategyProfile = Vec<usize>;

pub trait SequentialGame {
    fn player_count(&self) -> usize;

    fn strategy_count(&self) -> usize;

    /// Players in the order they commit; the first entry decides first.
    fn decision_order(&self) -> &[usize];

    /// Cost of `player` under a complete profile (indexed by player).
    fn cost(&self, player: usize, profile: &[usize]) -> f64;
}

/// Backward induction along the decision order. Ties go to the lowest
/// strategy index.
pub fn solve_backward_induction<G: SequentialGame + ?Sized>(game: &G) -> StrategyProfile {
    let n = game.player_count();
    let mut profile = vec![0; n];
    if n == 0 || game.strategy_count() == 0 {
        return profile;
    }
    let order = game.decision_order();
    let mut scratch = vec![0; n * n];
    induce(game, order, 0, &mut profile, &mut scratch);
    profile
}

/// Leaves `profile[order[depth..]]` set to the continuation induced once the
/// earlier players' choices (already in `profile`) are fixed.
fn induce<G: SequentialGame + ?Sized>(
    game: &G,
    order: &[usize],
    depth: usize,
    profile: &mut [usize],
    scratch: &mut [usize],
) {
    let n = order.len();
    let player = order[depth];
    let last = depth + 1 == n;
    let mut best_cost = f64::INFINITY;
    let mut found = false;
    for s in 0..game.strategy_count() {
        profile[player] = s;
        if !last {
            induce(game, order, depth + 1, profile, scratch);
        }
        let c = game.cost(player, profile);
        if !found || c < best_cost {
            found = true;
            best_cost = c;
            let row = &mut scratch[depth * n..(depth + 1) * n];
            for &p in &order[depth..] {
                row[p] = profile[p];
            }
        }
    }
    for &p in &order[depth..] {
        profile[p] = scratch[depth * n + p];
    }
}

/// Profiles the oracle is willing to enumerate by default.
pub const DEFAULT_ENUMERATION_LIMIT: u128 = 1 << 22;

/// Tabulates every profile's costs, then resolves the tree level by level
/// from the leaves up. Must agree exactly with [`solve_backward_induction`].
pub fn exhaustive_solve<G: SequentialGame + ?Sized>(game: &G, limit: u128) -> Result<StrategyProfile> {
    let n = game.player_count();
    let m = game.strategy_count();
    if n == 0 || m == 0 {
        return Ok(vec![0; n]);
    }
    let profiles = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if profiles > limit {
        return Err(Error::GameTooLarge { profiles, limit });
    }
    let total = profiles as usize;
    let order = game.decision_order();

    // Leaves are numbered by the choices in decision order, first mover most
    // significant, so the children of prefix `q` are `q * m + s`.
    let decode = |leaf: usize| -> Vec<usize> {
        let mut profile = vec![0; n];
        let mut rest = leaf;
        for depth in (0..n).rev() {
            profile[order[depth]] = rest % m;
            rest /= m;
        }
        profile
    };
    let mut costs = vec![0.0; total * n];
    for leaf in 0..total {
        let profile = decode(leaf);
        for p in 0..n {
            costs[leaf * n + p] = game.cost(p, &profile);
        }
    }

    let mut reached: Vec<usize> = (0..total).collect();
    for depth in (0..n).rev() {
        let player = order[depth];
        let width = reached.len() / m;
        let mut above = vec![0; width];
        for (prefix, slot) in above.iter_mut().enumerate() {
            let mut best_leaf = reached[prefix * m];
            let mut best_cost = costs[best_leaf * n + player];
            for s in 1..m {
                let leaf = reached[prefix * m + s];
                let c = costs[leaf * n + player];
                if c < best_cost {
                    best_cost = c;
                    best_leaf = leaf;
                }
            }
            *slot = best_leaf;
        }
        reached = above;
    }
    Ok(decode(reached[0]))
}

/// Whether the last player to move could lower its own cost by switching
/// alone, given everyone else's choices in `profile`.
pub fn last_mover_can_improve<G: SequentialGame + ?Sized>(game: &G, profile: &[usize]) -> bool {
    let Some(&last) = game.decision_order().last() else {
        return false;
    };
    let chosen = game.cost(last, profile);
    let mut probe = profile.to_vec();
    (0..game.strategy_count()).any(|s| {
        probe[last] = s;
        game.cost(last, &probe) < chosen
    })
}

/// A game given by an explicit cost table, mostly for tests and tooling.
#[derive(Clone, Debug, PartialEq)]
pub struct TableGame {
    order: Vec<usize>,
    strategies: usize,
    /// `costs[profile_index][player]`, with the profile index little-endian
    /// in player number (player 0 least significant).
    costs: Vec<Vec<f64>>,
}

impl TableGame {
    pub fn new(order: Vec<usize>, strategies: usize, costs: Vec<Vec<f64>>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &p in &order {
            if p >= n || seen[p] {
                return Err(Error::invalid("decision order must be a permutation of the players"));
            }
            seen[p] = true;
        }
        if strategies == 0 {
            return Err(Error::invalid("a game needs at least one strategy"));
        }
        let expected = strategies
            .checked_pow(n as u32)
            .ok_or_else(|| Error::invalid("game too large"))?;
        if costs.len() != expected || costs.iter().any(|row| row.len() != n) {
            return Err(Error::invalid("cost table must have one row of n costs per profile"));
        }
        Ok(TableGame {
            order,
            strategies,
            costs,
        })
    }

    pub fn from_fn(
        order: Vec<usize>,
        strategies: usize,
        mut cost: impl FnMut(usize, &[usize]) -> f64,
    ) -> Result<Self> {
        let n = order.len();
        let total = strategies
            .checked_pow(n as u32)
            .ok_or_else(|| Error::invalid("game too large"))?;
        let mut costs = Vec::with_capacity(total);
        for idx in 0..total {
            let profile = unrank(idx, n, strategies);
            costs.push((0..n).map(|p| cost(p, &profile)).collect());
        }
        TableGame::new(order, strategies, costs)
    }
}

pub(crate) fn rank(profile: &[usize], strategies: usize) -> usize {
    profile.iter().rev().fold(0, |acc, &s| acc * strategies + s)
}

pub(crate) fn unrank(mut idx: usize, n: usize, strategies: usize) -> Vec<usize> {
    let mut profile = vec![0; n];
    for slot in profile.iter_mut() {
        *slot = idx % strategies;
        idx /= strategies;
    }
    profile
}

impl SequentialGame for TableGame {
    fn player_count(&self) -> usize {
        self.order.len()
    }

    fn strategy_count(&self) -> usize {
        self.strategies
    }

    fn decision_order(&self) -> &[usize] {
        &self.order
    }

    fn cost(&self, player: usize, profile: &[usize]) -> f64 {
        self.costs[rank(profile, self.strategies)][player]
    }
}
