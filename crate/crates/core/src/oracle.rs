//! Brute-force references for verification: exhaustive schedule search,
//! a sampled order-preserving shortest tour, and time-stepped energy
//! integration. None of these share code paths with the solvers they check.

use crate::discretize::{GridMap, SlotPlan};
use crate::error::{invalid, Result, SchedError};
use crate::geometry::{Point, Rect};
use crate::greedy::Assignment;
use crate::model::{ChargerSpec, Scenario, SensorNode, StopRecord};

/// Cap on `(Γ + 1)^m` for [`exhaustive_opt`].
pub const EXHAUSTIVE_LIMIT: f64 = 1e6;
/// Cap on the stop count for [`sampled_optimal_path`].
pub const MAX_PATH_STOPS: usize = 8;

struct Search<'a> {
    demands: Vec<f64>,
    deadlines: &'a [f64],
    dt: f64,
    gridmap: &'a GridMap,
    slot_count: usize,
    energy: Vec<f64>,
    choice: Vec<Option<usize>>,
    best_value: f64,
    best_choice: Vec<Option<usize>>,
}

impl Search<'_> {
    fn value(&self) -> f64 {
        self.energy
            .iter()
            .zip(&self.demands)
            .map(|(&q, &e)| (q / e).min(1.0))
            .sum()
    }

    fn descend(&mut self, h: usize) {
        if h == self.slot_count {
            let v = self.value();
            if v > self.best_value {
                self.best_value = v;
                self.best_choice.clone_from(&self.choice);
            }
            return;
        }
        self.choice[h] = None;
        self.descend(h + 1);
        let start = h as f64 * self.dt;
        for k in 0..self.gridmap.len() {
            let saved = self.energy.clone();
            for (n, q) in self.energy.iter_mut().enumerate() {
                if start < self.deadlines[n] {
                    *q += self.gridmap.power(k, n) * self.dt;
                }
            }
            self.choice[h] = Some(k);
            self.descend(h + 1);
            self.energy = saved;
        }
        self.choice[h] = None;
    }
}

/// Best total utility over every per-slot choice (idle or one cell), with one
/// optimal assignment. Refuses instances with `(Γ + 1)^m > 10⁶`.
pub fn exhaustive_opt(
    scenario: &Scenario,
    gridmap: &GridMap,
    slots: &SlotPlan,
) -> Result<(f64, Assignment)> {
    let size = (gridmap.len() as f64 + 1.0).powi(slots.count as i32);
    if size > EXHAUSTIVE_LIMIT {
        return Err(SchedError::InstanceTooLarge {
            what: "(grids + 1)^slots",
            size,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let mut search = Search {
        demands: scenario.nodes.iter().map(|n| n.demand).collect(),
        deadlines: &slots.rounded_deadlines,
        dt: slots.dt,
        gridmap,
        slot_count: slots.count,
        energy: vec![0.0; scenario.nodes.len()],
        choice: vec![None; slots.count],
        best_value: f64::NEG_INFINITY,
        best_choice: vec![None; slots.count],
    };
    search.descend(0);
    Ok((
        search.best_value,
        Assignment::from_entries(search.best_choice),
    ))
}

/// Sample lattice over a cell: `⌊√samples⌋` points per axis including both
/// edges, plus the centre when the lattice misses it.
fn cell_samples(cell: &Rect, samples_per_cell: usize) -> Vec<Point> {
    let side = (samples_per_cell as f64).sqrt().floor() as usize;
    let mut pts = Vec::with_capacity(side * side + 1);
    for i in 0..side {
        for j in 0..side {
            let fx = i as f64 / (side - 1) as f64;
            let fy = j as f64 / (side - 1) as f64;
            pts.push(Point::new(
                cell.min.x + fx * cell.width(),
                cell.min.y + fy * cell.height(),
            ));
        }
    }
    if side.is_multiple_of(2) {
        pts.push(cell.center());
    }
    pts
}

/// Shortest closed tour from `depot` that visits one sampled point of each
/// cell in the given order. Refining nested lattices can only lower it, and
/// it bounds the true order-preserving optimum from above.
pub fn sampled_optimal_path(cells: &[Rect], depot: Point, samples_per_cell: usize) -> Result<f64> {
    if cells.len() > MAX_PATH_STOPS {
        return Err(SchedError::InstanceTooLarge {
            what: "stops",
            size: cells.len() as f64,
            limit: MAX_PATH_STOPS as f64,
        });
    }
    if samples_per_cell < 9 {
        return Err(invalid(
            "samples_per_cell",
            format!("need at least 9 (a 3×3 lattice), got {samples_per_cell}"),
        ));
    }
    let mut frontier: Vec<(Point, f64)> = vec![(depot, 0.0)];
    for cell in cells {
        let next = cell_samples(cell, samples_per_cell)
            .into_iter()
            .map(|p| {
                let best = frontier
                    .iter()
                    .map(|(q, c)| c + q.distance(p))
                    .fold(f64::INFINITY, f64::min);
                (p, best)
            })
            .collect();
        frontier = next;
    }
    Ok(frontier
        .iter()
        .map(|(q, c)| c + q.distance(depot))
        .fold(f64::INFINITY, f64::min))
}

/// Integrates received power over time in steps of `fine_dt`, weighting each
/// step by the exact part of it during which a stop is active and the node's
/// deadline has not passed.
pub fn integrate_energy(
    stops: &[StopRecord],
    node: &SensorNode,
    spec: &ChargerSpec,
    fine_dt: f64,
) -> Result<f64> {
    if !(fine_dt > 0.0) {
        return Err(invalid("fine_dt", format!("must be > 0, got {fine_dt}")));
    }
    let horizon = stops
        .iter()
        .map(|s| s.arrival + s.dwell)
        .fold(0.0, f64::max)
        .min(node.deadline);
    if horizon <= 0.0 {
        return Ok(0.0);
    }
    let sources: Vec<(f64, f64, f64)> = stops
        .iter()
        .map(|s| {
            let d = s.location.distance(node.position);
            let p = if d <= spec.range_d {
                spec.alpha / (d + spec.beta).powi(2)
            } else {
                0.0
            };
            (s.arrival, s.arrival + s.dwell, p)
        })
        .collect();
    let steps = (horizon / fine_dt).ceil() as usize;
    let mut total = 0.0;
    for i in 0..steps {
        let a = i as f64 * fine_dt;
        let b = ((i + 1) as f64 * fine_dt).min(node.deadline);
        for &(start, end, p) in &sources {
            let overlap = b.min(end) - a.max(start);
            if overlap > 0.0 {
                total += p * overlap;
            }
        }
    }
    Ok(total)
}
