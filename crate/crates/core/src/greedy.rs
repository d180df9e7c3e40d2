//! Slot-by-slot greedy selection of stop cells.
//!
//! A schedule picks at most one cell per time slot, which makes the feasible
//! schedules the independent sets of a partition matroid over the
//! (slot, cell) edges. The total charging utility is monotone submodular in
//! the chosen edge set, so taking the best marginal edge slot by slot is a
//! ½-approximation.
//!
//! Floating-point evaluation order is fixed on purpose: per-node energies are
//! accumulated in slot order and gains are summed in node order. Both are
//! monotone under IEEE rounding, so the diminishing-returns inequality holds
//! exactly on the computed values, not just up to round-off.

use serde::{Deserialize, Serialize};

use crate::discretize::{GridMap, SlotPlan};
use crate::error::{Result, SchedError};
use crate::model::{clamped_utility, Scenario};

/// One (slot, cell) edge of the scheduling graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub slot: usize,
    pub grid: usize,
}

/// Per-slot choice of stop cell (by index into the [`GridMap`]); `None` is an
/// idle slot.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Assignment {
    entries: Vec<Option<usize>>,
}

impl Assignment {
    pub fn empty(slot_count: usize) -> Self {
        Assignment {
            entries: vec![None; slot_count],
        }
    }

    pub fn from_entries(entries: Vec<Option<usize>>) -> Self {
        Assignment { entries }
    }

    /// Builds an assignment from raw edges; fails when a slot would carry
    /// two cells or an index is out of range.
    pub fn from_edges(edges: &[Edge], slot_count: usize) -> Result<Self> {
        let mut a = Assignment::empty(slot_count);
        for e in edges {
            a.assign(e.slot, e.grid)?;
        }
        Ok(a)
    }

    pub fn slot_count(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Option<usize>] {
        &self.entries
    }

    pub fn get(&self, slot: usize) -> Option<usize> {
        self.entries.get(slot).copied().flatten()
    }

    pub fn assign(&mut self, slot: usize, grid: usize) -> Result<()> {
        let count = self.entries.len();
        let entry = self
            .entries
            .get_mut(slot)
            .ok_or(SchedError::SlotOutOfRange { slot, count })?;
        if let Some(existing) = *entry {
            return Err(SchedError::SlotAssigned {
                slot,
                grid: existing,
            });
        }
        *entry = Some(grid);
        Ok(())
    }

    pub fn edges(&self) -> Vec<Edge> {
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(slot, g)| g.map(|grid| Edge { slot, grid }))
            .collect()
    }

    pub fn assigned_count(&self) -> usize {
        self.entries.iter().flatten().count()
    }

    /// Whether every edge of `self` is also in `other`.
    pub fn is_subset_of(&self, other: &Assignment) -> bool {
        self.entries.len() == other.entries.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.is_none() || a == b)
    }
}

/// Partition-matroid independence test over raw edges: at most one cell per
/// slot and every index in range.
pub fn validate(edges: &[Edge], slots: &SlotPlan, grid_count: usize) -> bool {
    let mut seen = vec![false; slots.count];
    for e in edges {
        if e.slot >= slots.count || e.grid >= grid_count || seen[e.slot] {
            return false;
        }
        seen[e.slot] = true;
    }
    true
}

/// Energy node `n` collects from the assigned slots that start before its
/// rounded deadline.
pub fn slotted_energy(
    assignment: &Assignment,
    n: usize,
    gridmap: &GridMap,
    slots: &SlotPlan,
) -> f64 {
    let mut q = 0.0;
    for (h, entry) in assignment.entries().iter().enumerate() {
        if let Some(k) = *entry {
            if slots.active(h, n) {
                q += gridmap.power(k, n) * slots.dt;
            }
        }
    }
    q
}

#[inline]
fn node_gain(power: f64, dt: f64, energy: f64, demand: f64) -> f64 {
    (power * dt).min((demand - energy).max(0.0)) / demand
}

/// Increase in total utility from adding cell `k` at the unassigned slot `h`.
pub fn marginal_gain(
    assignment: &Assignment,
    h: usize,
    k: usize,
    scenario: &Scenario,
    gridmap: &GridMap,
    slots: &SlotPlan,
) -> Result<f64> {
    if h >= assignment.slot_count() {
        return Err(SchedError::SlotOutOfRange {
            slot: h,
            count: assignment.slot_count(),
        });
    }
    if let Some(grid) = assignment.get(h) {
        return Err(SchedError::SlotAssigned { slot: h, grid });
    }
    let mut gain = 0.0;
    for (n, node) in scenario.nodes.iter().enumerate() {
        if !slots.active(h, n) {
            continue;
        }
        let q = slotted_energy(assignment, n, gridmap, slots);
        gain += node_gain(gridmap.power(k, n), slots.dt, q, node.demand);
    }
    Ok(gain)
}

/// Total utility of an assignment.
pub fn objective(
    assignment: &Assignment,
    scenario: &Scenario,
    gridmap: &GridMap,
    slots: &SlotPlan,
) -> f64 {
    scenario
        .nodes
        .iter()
        .enumerate()
        .map(|(n, node)| {
            clamped_utility(slotted_energy(assignment, n, gridmap, slots), node.demand)
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleResult {
    pub assignment: Assignment,
    pub per_node_energy: Vec<f64>,
    pub per_node_utility: Vec<f64>,
    pub total_utility: f64,
    /// Marginal gain of each accepted edge, in acceptance order. Empty for
    /// schedules not produced by the greedy.
    pub accepted_gains: Vec<f64>,
}

impl ScheduleResult {
    /// Scores an arbitrary assignment.
    pub fn evaluate(
        assignment: Assignment,
        scenario: &Scenario,
        gridmap: &GridMap,
        slots: &SlotPlan,
    ) -> Self {
        let per_node_energy: Vec<f64> = (0..scenario.nodes.len())
            .map(|n| slotted_energy(&assignment, n, gridmap, slots))
            .collect();
        let per_node_utility: Vec<f64> = per_node_energy
            .iter()
            .zip(&scenario.nodes)
            .map(|(&q, node)| clamped_utility(q, node.demand))
            .collect();
        let total_utility = per_node_utility.iter().sum();
        ScheduleResult {
            assignment,
            per_node_energy,
            per_node_utility,
            total_utility,
            accepted_gains: Vec::new(),
        }
    }
}

/// Greedy over slots `1..=m`: each slot takes the cell with the largest
/// marginal gain (lowest index on ties). The whole schedule stops at the
/// first slot whose best gain is zero; slot activity only shrinks and
/// saturation is permanent, so no later slot could gain either.
pub fn greedy_schedule(scenario: &Scenario, gridmap: &GridMap, slots: &SlotPlan) -> ScheduleResult {
    let node_count = scenario.nodes.len();
    let dt = slots.dt;
    let mut assignment = Assignment::empty(slots.count);
    let mut energy = vec![0.0; node_count];
    // nodes whose demand is not met yet, in index order
    let mut open: Vec<usize> = (0..node_count).collect();
    let mut gains = vec![0.0; gridmap.len()];
    let mut accepted_gains = Vec::new();

    for h in 0..slots.count {
        gains.iter_mut().for_each(|g| *g = 0.0);
        for &n in &open {
            if !slots.active(h, n) {
                continue;
            }
            let demand = scenario.nodes[n].demand;
            for &(k, p) in gridmap.reach(n) {
                gains[k] += node_gain(p, dt, energy[n], demand);
            }
        }
        let mut best = 0;
        let mut best_gain = f64::NEG_INFINITY;
        for (k, &g) in gains.iter().enumerate() {
            if g > best_gain {
                best = k;
                best_gain = g;
            }
        }
        if !(best_gain > 0.0) {
            break;
        }
        assignment
            .assign(h, best)
            .expect("greedy visits each slot once");
        accepted_gains.push(best_gain);
        for (n, q) in energy.iter_mut().enumerate() {
            if slots.active(h, n) {
                *q += gridmap.power(best, n) * dt;
            }
        }
        open.retain(|&n| energy[n] < scenario.nodes[n].demand);
    }

    let mut result = ScheduleResult::evaluate(assignment, scenario, gridmap, slots);
    result.accepted_gains = accepted_gains;
    result
}
