use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::{last_mover_can_improve, rank, solve_backward_induction, unrank, SequentialGame, StrategyProfile};
use crate::cost::{pair_penalty, priority_holder, velocity_feature, CostParams};
use crate::error::Error;
use crate::geometry::{disk_set_distance, routes_conflict, IntersectionLayout};
use crate::kinematics::{next_config, Configuration, Scene, Status, VehicleId, VehicleSpec};
use crate::priority::PriorityOrder;
use crate::Result;

/// The finite strategy set shared by every player: acceleration sequences
/// (m/s^2) of equal length.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternSet {
    patterns: Vec<Vec<f64>>,
}

impl PatternSet {
    pub fn new(patterns: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = patterns.first() else {
            return Err(Error::invalid("pattern set must not be empty"));
        };
        let h = first.len();
        if h == 0 {
            return Err(Error::invalid("patterns must have at least one step"));
        }
        if patterns.iter().any(|p| p.len() != h) {
            return Err(Error::invalid("all patterns must have the same length"));
        }
        if patterns.iter().flatten().any(|a| !a.is_finite()) {
            return Err(Error::invalid("pattern accelerations must be finite"));
        }
        Ok(PatternSet { patterns })
    }

    /// Hard braking, coasting, small and strong acceleration, most
    /// conservative first so that ties resolve towards braking.
    pub fn standard() -> Self {
        PatternSet {
            patterns: vec![
                vec![-50.0, -50.0, -50.0],
                vec![0.0, 0.0, 0.0],
                vec![10.0, 0.0, 0.0],
                vec![20.0, 0.0, 0.0],
            ],
        }
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.patterns[0].len()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.patterns[i]
    }

    pub fn head(&self, i: usize) -> f64 {
        self.patterns[i][0]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.patterns.iter().map(|p| p.as_slice())
    }
}

/// Every player's accumulated cost for every profile of a decision game,
/// computed once per joint configuration.
///
/// The priority order only enters the costs through whether the player holds
/// priority, so both variants are stored and one table serves all orders.
/// Each entry repeats the exact arithmetic of
/// [`crate::cost::accumulated_cost`], so the two agree bit for bit.
#[derive(Clone, Debug)]
pub struct CostTable {
    players: usize,
    strategies: usize,
    /// `[leaf * players + j]` = (cost if j is minimal, cost otherwise).
    costs: Vec<[f64; 2]>,
}

impl CostTable {
    pub fn build(scene: &Scene<'_>, params: &CostParams, patterns: &PatternSet) -> Self {
        let n = scene.len();
        let m = patterns.len();
        let h = params.horizon;
        debug_assert!(patterns.horizon() >= h);

        // Each vehicle's predicted trajectory depends only on its own pattern.
        let mut traj: Vec<Configuration> = Vec::with_capacity(n * m * h);
        for (spec, start) in scene.specs.iter().zip(scene.configs) {
            for pat in patterns.iter() {
                let mut c = *start;
                traj.push(c);
                for a in pat.iter().take(h.saturating_sub(1)) {
                    c = next_config(&c, *a, params.dt, &spec.path, &spec.dims, scene.layout);
                    traj.push(c);
                }
            }
        }
        let at = |p: usize, pat: usize, s: usize| &traj[(p * m + pat) * h + s];
        let disks: Vec<_> = (0..n * m * h)
            .map(|idx| {
                let p = idx / (m * h);
                scene.specs[p].disks(&traj[idx])
            })
            .collect();

        // Static route conflicts, and whether leaving clears them.
        let mut conflict = vec![false; n * n];
        let mut clears = vec![false; n * n];
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    let (sp, sq) = (&scene.specs[p], &scene.specs[q]);
                    conflict[p * n + q] = routes_conflict(sp.path.route(), sq.path.route());
                    clears[p * n + q] =
                        params.leaving_clears_conflict && sp.path.exit_arm() != sq.path.exit_arm();
                }
            }
        }
        // gap[((p * n + q) * h + s) * m * m + pp * m + pq]
        let mut gap = vec![0.0; n * n * h * m * m];
        for p in 0..n {
            for q in 0..n {
                if p == q {
                    continue;
                }
                for s in 0..h {
                    for pp in 0..m {
                        for pq in 0..m {
                            let d = disk_set_distance(
                                &disks[(p * m + pp) * h + s],
                                &disks[(q * m + pq) * h + s],
                            );
                            gap[((p * n + q) * h + s) * m * m + pp * m + pq] = d;
                        }
                    }
                }
            }
        }
        let velo: Vec<f64> = traj.iter().map(|c| velocity_feature(c.v, params)).collect();

        let leaves = m.pow(n as u32);
        let mut costs = vec![[0.0; 2]; leaves * n];
        for leaf in 0..leaves {
            let profile = unrank(leaf, n, m);
            for j in 0..n {
                let pj = profile[j];
                for (slot, minimal) in [(0, true), (1, false)] {
                    let mut total = 0.0;
                    for s in 0..h {
                        let cj = at(j, pj, s);
                        let mut safety = 0.0;
                        for k in 0..n {
                            if k == j {
                                continue;
                            }
                            let d = gap[((j * n + k) * h + s) * m * m + pj * m + profile[k]];
                            let ck = at(k, profile[k], s);
                            let leaving = cj.status == Status::Leaving || ck.status == Status::Leaving;
                            let live = conflict[j * n + k] && !(clears[j * n + k] && leaving);
                            safety += pair_penalty(cj.status, live, d, minimal, params);
                        }
                        let step = safety + velo[(j * m + pj) * h + s];
                        total += params.weight(s) * step;
                    }
                    costs[leaf * n + j][slot] = total;
                }
            }
        }
        CostTable {
            players: n,
            strategies: m,
            costs,
        }
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn strategies(&self) -> usize {
        self.strategies
    }

    pub fn cost(&self, player: usize, profile: &[usize], minimal: bool) -> f64 {
        let leaf = rank(profile, self.strategies);
        self.costs[leaf * self.players + player][if minimal { 0 } else { 1 }]
    }
}

/// The decision game of one joint configuration under one priority order.
/// Players are scene indices; the highest-priority vehicle decides first.
#[derive(Clone, Debug)]
pub struct DecisionGame {
    table: Arc<CostTable>,
    order: Vec<usize>,
    /// Scene index of the vehicle the safety rule treats as minimal.
    holder: Option<usize>,
}

impl DecisionGame {
    pub fn new(table: Arc<CostTable>, scene: &Scene<'_>, order: &PriorityOrder, params: &CostParams) -> Result<Self> {
        let indices = order_indices(scene, order)?;
        if table.players() != indices.len() {
            return Err(Error::invalid("cost table does not match the scene"));
        }
        let holder = priority_holder(scene, order, params).and_then(|id| scene.index_of(id));
        Ok(DecisionGame {
            table,
            order: indices,
            holder,
        })
    }
}

fn order_indices(scene: &Scene<'_>, order: &PriorityOrder) -> Result<Vec<usize>> {
    if order.len() != scene.len() {
        return Err(Error::invalid("priority order must cover exactly the vehicles in the scene"));
    }
    order
        .ids()
        .iter()
        .map(|id| {
            scene
                .index_of(*id)
                .ok_or_else(|| Error::invalid(alloc::format!("vehicle {id} is not in the scene")))
        })
        .collect()
}

impl SequentialGame for DecisionGame {
    fn player_count(&self) -> usize {
        self.order.len()
    }

    fn strategy_count(&self) -> usize {
        self.table.strategies()
    }

    fn decision_order(&self) -> &[usize] {
        &self.order
    }

    fn cost(&self, player: usize, profile: &[usize]) -> f64 {
        self.table.cost(player, profile, self.holder == Some(player))
    }
}

pub fn build_decision_game(
    scene: &Scene<'_>,
    order: &PriorityOrder,
    params: &CostParams,
    patterns: &PatternSet,
) -> Result<DecisionGame> {
    DecisionGame::new(Arc::new(CostTable::build(scene, params, patterns)), scene, order, params)
}

/// A solved decision game.
#[derive(Clone, Debug, PartialEq)]
pub struct Equilibrium {
    /// Pattern index per scene index.
    pub profile: StrategyProfile,
    /// First acceleration of each vehicle's equilibrium pattern, per scene index.
    pub heads: Vec<f64>,
    pub last_mover_optimal: bool,
}

/// Equilibria of one joint configuration under any number of priority
/// orders, sharing one cost table. Every rational vehicle decides against the
/// same snapshot and later fits orders against it, so one cache serves a
/// whole simulation step.
#[derive(Clone, Debug)]
pub struct EquilibriumCache {
    specs: Vec<VehicleSpec>,
    configs: Vec<Configuration>,
    layout: IntersectionLayout,
    params: CostParams,
    patterns: PatternSet,
    table: Arc<CostTable>,
    solved: BTreeMap<Vec<VehicleId>, Equilibrium>,
    games_solved: usize,
    last_mover_violations: usize,
}

impl EquilibriumCache {
    pub fn new(scene: &Scene<'_>, params: &CostParams, patterns: &PatternSet) -> Self {
        EquilibriumCache {
            specs: scene.specs.to_vec(),
            configs: scene.configs.to_vec(),
            layout: *scene.layout,
            params: *params,
            patterns: patterns.clone(),
            table: Arc::new(CostTable::build(scene, params, patterns)),
            solved: BTreeMap::new(),
            games_solved: 0,
            last_mover_violations: 0,
        }
    }

    pub fn scene(&self) -> Scene<'_> {
        Scene::new(&self.specs, &self.configs, &self.layout)
    }

    pub fn params(&self) -> &CostParams {
        &self.params
    }

    pub fn patterns(&self) -> &PatternSet {
        &self.patterns
    }

    pub fn table(&self) -> &Arc<CostTable> {
        &self.table
    }

    /// Distinct games solved so far.
    pub fn games_solved(&self) -> usize {
        self.games_solved
    }

    /// Solved games where the last decision-maker could still improve alone.
    pub fn last_mover_violations(&self) -> usize {
        self.last_mover_violations
    }

    pub fn solve(&mut self, order: &PriorityOrder) -> Result<&Equilibrium> {
        if !self.solved.contains_key(order.ids()) {
            let game = DecisionGame::new(self.table.clone(), &self.scene(), order, &self.params)?;
            let profile = solve_backward_induction(&game);
            let last_mover_optimal = !last_mover_can_improve(&game, &profile);
            self.games_solved += 1;
            if !last_mover_optimal {
                self.last_mover_violations += 1;
            }
            let heads = profile.iter().map(|&p| self.patterns.head(p)).collect();
            self.solved.insert(
                order.ids().to_vec(),
                Equilibrium {
                    profile,
                    heads,
                    last_mover_optimal,
                },
            );
        }
        Ok(&self.solved[order.ids()])
    }
}
