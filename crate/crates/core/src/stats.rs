//! Batch statistics as a commutative monoid of exact counts.

use crate::sim::SimResult;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AggregateStats {
    pub runs: u64,
    pub collisions: u64,
    pub congestions: u64,
    pub timeouts: u64,
    /// Runs that neither collided nor timed out.
    pub completed: u64,
    pub total_steps_sum: u64,
    /// Vehicles of completed runs and the sum of their leaving steps.
    pub vehicles: u64,
    pub leaving_steps_sum: u64,
    pub games_solved: u64,
    pub last_mover_violations: u64,
}

fn pct(count: u64, runs: u64) -> f64 {
    if runs == 0 {
        0.0
    } else {
        100.0 * count as f64 / runs as f64
    }
}

impl AggregateStats {
    pub fn from_result(r: &SimResult) -> Self {
        let mut s = AggregateStats {
            runs: 1,
            collisions: r.collided as u64,
            congestions: r.congested as u64,
            timeouts: r.timed_out as u64,
            games_solved: r.games_solved as u64,
            last_mover_violations: r.last_mover_violations as u64,
            ..Default::default()
        };
        if let Some(t) = r.total_steps {
            s.completed = 1;
            s.total_steps_sum = t as u64;
            s.vehicles = r.leaving_steps.len() as u64;
            s.leaving_steps_sum = r.leaving_steps.iter().filter_map(|(_, x)| *x).map(|x| x as u64).sum();
        }
        s
    }

    pub fn merge(self, o: AggregateStats) -> AggregateStats {
        AggregateStats {
            runs: self.runs + o.runs,
            collisions: self.collisions + o.collisions,
            congestions: self.congestions + o.congestions,
            timeouts: self.timeouts + o.timeouts,
            completed: self.completed + o.completed,
            total_steps_sum: self.total_steps_sum + o.total_steps_sum,
            vehicles: self.vehicles + o.vehicles,
            leaving_steps_sum: self.leaving_steps_sum + o.leaving_steps_sum,
            games_solved: self.games_solved + o.games_solved,
            last_mover_violations: self.last_mover_violations + o.last_mover_violations,
        }
    }

    pub fn collision_rate_pct(&self) -> f64 {
        pct(self.collisions, self.runs)
    }

    pub fn congestion_rate_pct(&self) -> f64 {
        pct(self.congestions, self.runs)
    }

    /// Mean run length over completed runs; NaN when none completed.
    pub fn avg_total_steps(&self) -> f64 {
        if self.completed == 0 {
            f64::NAN
        } else {
            self.total_steps_sum as f64 / self.completed as f64
        }
    }

    /// Mean step at which a vehicle started leaving, over completed runs.
    pub fn avg_vehicle_steps(&self) -> f64 {
        if self.vehicles == 0 {
            f64::NAN
        } else {
            self.leaving_steps_sum as f64 / self.vehicles as f64
        }
    }
}

impl core::iter::Sum for AggregateStats {
    fn sum<I: Iterator<Item = AggregateStats>>(iter: I) -> Self {
        iter.fold(AggregateStats::default(), AggregateStats::merge)
    }
}

impl<'a> core::iter::FromIterator<&'a SimResult> for AggregateStats {
    fn from_iter<I: IntoIterator<Item = &'a SimResult>>(iter: I) -> Self {
        iter.into_iter().map(AggregateStats::from_result).sum()
    }
}
