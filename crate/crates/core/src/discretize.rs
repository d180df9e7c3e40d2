//! Spatial grid partition with a bounded power-approximation error, and the
//! uniform time slotting used by the scheduler.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{Point, Rect};
use crate::model::{ChargerSpec, Scenario, SensorNode};

/// One grid cell. `bounds` is always a full δ-square, even where it overhangs
/// the plane; `representative` is the centre of the part inside the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    /// Row-major index in the unpruned partition.
    pub id: usize,
    pub bounds: Rect,
    pub representative: Point,
}

/// Largest cell side δ for which the conservative per-cell power stays within
/// a factor `1 - lambda` of the power from any point in the cell:
/// `β / (β + √2·δ) ≥ √(1-λ)`.
pub fn max_side_for_error(lambda: f64, beta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(invalid(
            "lambda",
            format!("must lie in [0, 1), got {lambda}"),
        ));
    }
    if !(beta > 0.0) {
        return Err(invalid("beta", format!("must be > 0, got {beta}")));
    }
    let root = (1.0 - lambda).sqrt();
    Ok(beta * (1.0 - root) / (std::f64::consts::SQRT_2 * root))
}

/// `floor(a / b)` that treats quotients within 1e-9 of an integer as exact.
pub(crate) fn floor_ratio(a: f64, b: f64) -> f64 {
    let q = a / b;
    let r = q.round();
    if (q - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        q.floor()
    }
}

fn ceil_ratio(a: f64, b: f64) -> f64 {
    let q = a / b;
    let r = q.round();
    if (q - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        q.ceil()
    }
}

/// Tiles `plane` with δ-squares in row-major order (rows along y, columns
/// along x), starting at the plane's minimum corner.
pub fn partition(plane: &Rect, delta: f64) -> Result<Vec<GridCell>> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(invalid(
            "delta",
            format!("must be a finite value > 0, got {delta}"),
        ));
    }
    let per_side = ceil_ratio(plane.width(), delta).max(1.0) as usize;
    let mut cells = Vec::with_capacity(per_side * per_side);
    for row in 0..per_side {
        for col in 0..per_side {
            let min = Point::new(
                plane.min.x + col as f64 * delta,
                plane.min.y + row as f64 * delta,
            );
            let bounds = Rect::square(min, delta);
            let clipped = Rect::new(
                min,
                Point::new(bounds.max.x.min(plane.max.x), bounds.max.y.min(plane.max.y)),
            );
            cells.push(GridCell {
                id: row * per_side + col,
                bounds,
                representative: clipped.center(),
            });
        }
    }
    Ok(cells)
}

/// Longest distance from `p` to any point of the cell.
pub fn conservative_distance(cell: &GridCell, p: Point) -> f64 {
    cell.bounds.farthest_distance(p)
}

/// Per-cell charging power: the power law evaluated at the conservative
/// distance. Never exceeds the power from any in-cell charger position.
pub fn grid_power(cell: &GridCell, node: &SensorNode, spec: &ChargerSpec) -> f64 {
    spec.power(conservative_distance(cell, node.position))
}

/// Candidate stop cells with their conservative power towards every node.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    pub delta: f64,
    pub cells: Vec<GridCell>,
    node_count: usize,
    /// Row-major `cells.len() × node_count`.
    power: Vec<f64>,
    /// Per node: `(cell index, power)` for every cell with nonzero power.
    reach: Vec<Vec<(usize, f64)>>,
}

impl GridMap {
    /// Partitions the scenario plane with side `delta` and fills the power
    /// matrix. With `prune`, cells that reach no node are dropped.
    pub fn build(scenario: &Scenario, delta: f64, prune: bool) -> Result<Self> {
        let cells = partition(&scenario.plane, delta)?;
        let n = scenario.nodes.len();
        let mut power = Vec::with_capacity(cells.len() * n);
        for cell in &cells {
            power.extend(
                scenario
                    .nodes
                    .iter()
                    .map(|node| grid_power(cell, node, &scenario.charger)),
            );
        }
        let map = GridMap::from_parts(delta, cells, n, power)?;
        Ok(if prune { map.pruned() } else { map })
    }

    /// Assembles a map from an explicit power matrix (row-major, one row per
    /// cell). Used for synthetic instances.
    pub fn from_parts(
        delta: f64,
        cells: Vec<GridCell>,
        node_count: usize,
        power: Vec<f64>,
    ) -> Result<Self> {
        if power.len() != cells.len() * node_count {
            return Err(invalid(
                "power",
                format!(
                    "expected {}×{} entries, got {}",
                    cells.len(),
                    node_count,
                    power.len()
                ),
            ));
        }
        if power.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(invalid("power", "entries must be finite and >= 0"));
        }
        let mut reach = vec![Vec::new(); node_count];
        for (k, row) in power
            .chunks(node_count.max(1))
            .enumerate()
            .take(cells.len())
        {
            for (n, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    reach[n].push((k, p));
                }
            }
        }
        Ok(GridMap {
            delta,
            cells,
            node_count,
            power,
            reach,
        })
    }

    /// Drops cells whose power row is all zeros.
    pub fn pruned(self) -> Self {
        let n = self.node_count;
        let mut cells = Vec::new();
        let mut power = Vec::new();
        for (k, cell) in self.cells.iter().enumerate() {
            let row = &self.power[k * n..(k + 1) * n];
            if row.iter().any(|&p| p > 0.0) {
                cells.push(*cell);
                power.extend_from_slice(row);
            }
        }
        GridMap::from_parts(self.delta, cells, n, power).expect("pruned rows stay consistent")
    }

    /// Γ, the number of candidate cells.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Conservative power from cell index `k` to node `n`.
    #[inline]
    pub fn power(&self, k: usize, n: usize) -> f64 {
        self.power[k * self.node_count + n]
    }

    pub fn power_row(&self, k: usize) -> &[f64] {
        &self.power[k * self.node_count..(k + 1) * self.node_count]
    }

    /// Cells with nonzero power to node `n`, in increasing index order.
    pub fn reach(&self, n: usize) -> &[(usize, f64)] {
        &self.reach[n]
    }

    /// Index of the cell with the given row-major id, if present.
    pub fn index_of(&self, id: usize) -> Option<usize> {
        self.cells.binary_search_by_key(&id, |c| c.id).ok()
    }
}

/// Uniform time slots over the deadline budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotPlan {
    /// Slot length Δt (s).
    pub dt: f64,
    /// Number of slots m.
    pub count: usize,
    /// Per-node deadline rounded down to a slot boundary (s).
    pub rounded_deadlines: Vec<f64>,
    /// Per-node number of slots that start before the rounded deadline.
    pub deadline_slots: Vec<usize>,
}

impl SlotPlan {
    /// Whether slot `h` (0-based) still charges node `n` before its rounded
    /// deadline, i.e. `h·Δt < τ'_n`.
    #[inline]
    pub fn active(&self, h: usize, n: usize) -> bool {
        h < self.deadline_slots[n]
    }
}

pub fn slotting(budget_t: f64, dt: f64, nodes: &[SensorNode]) -> Result<SlotPlan> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(invalid(
            "dt",
            format!("must be a finite value > 0, got {dt}"),
        ));
    }
    if dt > budget_t {
        return Err(invalid(
            "dt",
            format!("slot length {dt} s exceeds the budget {budget_t} s"),
        ));
    }
    let count = floor_ratio(budget_t, dt) as usize;
    let deadline_slots: Vec<usize> = nodes
        .iter()
        .map(|n| floor_ratio(n.deadline, dt).max(0.0) as usize)
        .collect();
    let rounded_deadlines = deadline_slots.iter().map(|&s| s as f64 * dt).collect();
    Ok(SlotPlan {
        dt,
        count,
        rounded_deadlines,
        deadline_slots,
    })
}
