//! Turning a slot assignment into a travel tour, shortening it while every
//! stop cell stays covered in visiting order, and cutting it to the budget.

use serde::{Deserialize, Serialize};

use crate::discretize::{GridMap, SlotPlan};
use crate::error::{invalid, Result};
use crate::geometry::{polyline_length, Point, Rect};
use crate::greedy::Assignment;
use crate::model::{clamped_utility, clipped_stop_energy, ChargerSpec, Scenario};

/// Position on a polyline: segment index and parameter in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct PathPos {
    pub segment: usize,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TourStop {
    /// Index into the [`GridMap`] cells.
    pub grid: usize,
    /// Row-major cell id.
    pub grid_id: usize,
    /// Dwell duration (s), a positive multiple of Δt.
    pub dwell: f64,
    /// Where the charger parks; lies on the path inside the cell.
    pub point: Point,
    pub pos: PathPos,
}

/// A closed tour from the depot through the stop cells in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TourPlan {
    pub waypoints: Vec<Point>,
    pub stops: Vec<TourStop>,
    pub length: f64,
}

impl TourPlan {
    /// The degenerate tour `{S, S}`.
    pub fn stay_home(depot: Point) -> Self {
        TourPlan {
            waypoints: vec![depot, depot],
            stops: Vec::new(),
            length: 0.0,
        }
    }

    pub fn depot(&self) -> Point {
        self.waypoints[0]
    }

    pub fn segment_lengths(&self) -> Vec<f64> {
        self.waypoints
            .windows(2)
            .map(|w| w[0].distance(w[1]))
            .collect()
    }

    /// Distance travelled from the depot to each stop's dwell point.
    pub fn stop_offsets(&self) -> Vec<f64> {
        let seg = self.segment_lengths();
        let mut prefix = Vec::with_capacity(seg.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for l in &seg {
            acc += l;
            prefix.push(acc);
        }
        self.stops
            .iter()
            .map(|s| prefix[s.pos.segment] + s.pos.t * seg[s.pos.segment])
            .collect()
    }

    /// Arrival time at every stop: travel to its dwell point, plus the dwell
    /// of earlier stops when `include_dwell` is set.
    pub fn arrivals(&self, spec: &ChargerSpec, include_dwell: bool) -> Vec<f64> {
        let mut dwell_so_far = 0.0;
        self.stop_offsets()
            .into_iter()
            .zip(&self.stops)
            .map(|(offset, stop)| {
                let r = spec.travel_time(offset) + if include_dwell { dwell_so_far } else { 0.0 };
                dwell_so_far += stop.dwell;
                r
            })
            .collect()
    }

    /// Structural check: endpoints at the depot, each dwell point on the path
    /// inside its cell, stops in path order, cached length consistent.
    pub fn is_consistent(&self, gridmap: &GridMap) -> bool {
        let n = self.waypoints.len();
        if n < 2 || self.waypoints[0] != self.waypoints[n - 1] {
            return false;
        }
        if (polyline_length(&self.waypoints) - self.length).abs() > 1e-9 * self.length.max(1.0) {
            return false;
        }
        let mut prev = PathPos { segment: 0, t: 0.0 };
        for s in &self.stops {
            if s.pos.segment + 1 >= n || s.pos < prev {
                return false;
            }
            prev = s.pos;
            let on_path =
                self.waypoints[s.pos.segment].lerp(self.waypoints[s.pos.segment + 1], s.pos.t);
            let cell = &gridmap.cells[s.grid].bounds;
            if on_path.distance(s.point) > 1e-9 || !contains_eps(cell, s.point) {
                return false;
            }
        }
        true
    }

    pub fn export(&self, spec: &ChargerSpec) -> TourExport {
        let arrivals = self.arrivals(spec, true);
        TourExport {
            waypoints: self.waypoints.clone(),
            stops: self
                .stops
                .iter()
                .zip(arrivals)
                .map(|(s, arrival)| ExportedStop {
                    grid_id: s.grid_id,
                    x: s.point.x,
                    y: s.point.y,
                    arrival_s: arrival,
                    dwell_s: s.dwell,
                })
                .collect(),
            length_m: self.length,
        }
    }
}

fn contains_eps(r: &Rect, p: Point) -> bool {
    const EPS: f64 = 1e-9;
    p.x >= r.min.x - EPS && p.x <= r.max.x + EPS && p.y >= r.min.y - EPS && p.y <= r.max.y + EPS
}

/// Serialized tour record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TourExport {
    pub waypoints: Vec<Point>,
    pub stops: Vec<ExportedStop>,
    pub length_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportedStop {
    pub grid_id: usize,
    pub x: f64,
    pub y: f64,
    pub arrival_s: f64,
    pub dwell_s: f64,
}

pub fn path_length(tour: &TourPlan) -> f64 {
    polyline_length(&tour.waypoints)
}

/// Whether the closed segment `a -> b` touches the closed cell.
pub fn path_covers(a: Point, b: Point, cell: &Rect) -> bool {
    cell.intersects_segment(a, b)
}

/// Depot, then the centre of every run of equal consecutive cells, then the
/// depot again. Each run becomes one stop dwelling `run length × Δt`.
pub fn initial_path(assignment: &Assignment, gridmap: &GridMap, depot: Point, dt: f64) -> TourPlan {
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for k in assignment.entries().iter().flatten().copied() {
        match runs.last_mut() {
            Some((g, count)) if *g == k => *count += 1,
            _ => runs.push((k, 1)),
        }
    }
    if runs.is_empty() {
        return TourPlan::stay_home(depot);
    }
    let mut waypoints = Vec::with_capacity(runs.len() + 2);
    waypoints.push(depot);
    let mut stops = Vec::with_capacity(runs.len());
    for (i, &(g, count)) in runs.iter().enumerate() {
        let cell = &gridmap.cells[g];
        let center = cell.bounds.center();
        waypoints.push(center);
        stops.push(TourStop {
            grid: g,
            grid_id: cell.id,
            dwell: count as f64 * dt,
            point: center,
            pos: PathPos { segment: i, t: 1.0 },
        });
    }
    waypoints.push(depot);
    let length = polyline_length(&waypoints);
    TourPlan {
        waypoints,
        stops,
        length,
    }
}

/// Earliest positions at which the polyline visits each cell, in order.
/// `None` when some cell cannot be reached after the previous one.
pub fn ordered_cover(waypoints: &[Point], cells: &[Rect]) -> Option<Vec<(PathPos, f64)>> {
    let segments = waypoints.len().saturating_sub(1);
    let mut cur = PathPos { segment: 0, t: 0.0 };
    let mut out = Vec::with_capacity(cells.len());
    for cell in cells {
        let mut found = None;
        for s in cur.segment..segments {
            if let Some((a, b)) = cell.clip_segment(waypoints[s], waypoints[s + 1]) {
                let lo = if s == cur.segment { a.max(cur.t) } else { a };
                if lo <= b {
                    found = Some((PathPos { segment: s, t: lo }, b));
                    break;
                }
            }
        }
        let (pos, exit) = found?;
        cur = pos;
        out.push((pos, exit));
    }
    Some(out)
}

fn covers_all(waypoints: &[Point], cells: &[Rect]) -> bool {
    ordered_cover(waypoints, cells).is_some()
}

/// Dwell positions: the midpoint of each cell's visit interval on its
/// earliest covering segment, pulled back where needed so stops stay in
/// path order.
fn dwell_positions(waypoints: &[Point], cells: &[Rect]) -> Option<Vec<PathPos>> {
    let cover = ordered_cover(waypoints, cells)?;
    let mut out: Vec<PathPos> = cover
        .iter()
        .map(|(entry, exit)| PathPos {
            segment: entry.segment,
            t: 0.5 * (entry.t + exit),
        })
        .collect();
    for i in (0..out.len().saturating_sub(1)).rev() {
        let next = out[i + 1];
        if next.segment == out[i].segment && next.t < out[i].t {
            out[i].t = next.t;
        }
    }
    Some(out)
}

fn rebuild(waypoints: Vec<Point>, template: &[TourStop], cells: &[Rect]) -> TourPlan {
    let positions = dwell_positions(&waypoints, cells).expect("tour covers its stop cells");
    let stops = template
        .iter()
        .zip(positions)
        .map(|(s, pos)| TourStop {
            point: waypoints[pos.segment].lerp(waypoints[pos.segment + 1], pos.t),
            pos,
            ..*s
        })
        .collect();
    let length = polyline_length(&waypoints);
    TourPlan {
        waypoints,
        stops,
        length,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathOpKind {
    Skip,
    Substitute,
}

/// One accepted shortening move, for auditing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathOp {
    pub kind: PathOpKind,
    pub pass: usize,
    pub length_before: f64,
    pub length_after: f64,
    pub covers_all: bool,
}

/// Shortens the tour with skip and substitute moves until a full pass
/// changes nothing. See [`skip_substitute_traced`].
pub fn skip_substitute(tour: &TourPlan, gridmap: &GridMap, sigma: f64) -> Result<TourPlan> {
    skip_substitute_traced(tour, gridmap, sigma).map(|(t, _)| t)
}

/// For each interior waypoint in order: drop it when the polyline without
/// it still covers every stop cell in order (skip); otherwise binary-search
/// the farthest replacement on the segment towards the next waypoint that
/// keeps the cover, to resolution `sigma` (substitute). A move is kept only
/// when it shortens the tour, and a substitute only when it moves the point
/// by at least `sigma`. Passes repeat until one makes no change.
pub fn skip_substitute_traced(
    tour: &TourPlan,
    gridmap: &GridMap,
    sigma: f64,
) -> Result<(TourPlan, Vec<PathOp>)> {
    if !(sigma > 0.0) {
        return Err(invalid("sigma", format!("must be > 0, got {sigma}")));
    }
    let cells: Vec<Rect> = tour
        .stops
        .iter()
        .map(|s| gridmap.cells[s.grid].bounds)
        .collect();
    if !covers_all(&tour.waypoints, &cells) {
        return Err(invalid("tour", "does not cover its stop cells in order"));
    }
    let mut w = tour.waypoints.clone();
    let mut ops = Vec::new();
    let mut length = polyline_length(&w);
    // every productive pass removes a waypoint or moves one by at least
    // sigma along a strictly shortening direction
    let max_passes = 4 * (tour.stops.len() + 1);
    let mut pass = 0;
    loop {
        let mut changed = false;
        let mut k = 1;
        while k + 1 < w.len() {
            let mut skipped = w.clone();
            skipped.remove(k);
            let skipped_len = polyline_length(&skipped);
            if skipped_len < length && covers_all(&skipped, &cells) {
                ops.push(PathOp {
                    kind: PathOpKind::Skip,
                    pass,
                    length_before: length,
                    length_after: skipped_len,
                    covers_all: true,
                });
                w = skipped;
                length = skipped_len;
                changed = true;
                continue;
            }

            let original = w[k];
            let (mut ls, mut lt) = (w[k], w[k + 1]);
            let mut trial = w.clone();
            while ls.distance(lt) > sigma {
                let mid = ls.midpoint(lt);
                trial[k] = mid;
                if covers_all(&trial, &cells) {
                    ls = mid;
                } else {
                    lt = mid;
                }
            }
            if original.distance(ls) >= sigma {
                trial[k] = ls;
                let trial_len = polyline_length(&trial);
                if trial_len < length {
                    ops.push(PathOp {
                        kind: PathOpKind::Substitute,
                        pass,
                        length_before: length,
                        length_after: trial_len,
                        covers_all: covers_all(&trial, &cells),
                    });
                    w = trial;
                    length = trial_len;
                    changed = true;
                }
            }
            k += 1;
        }
        pass += 1;
        if !changed || pass >= max_passes {
            break;
        }
    }
    Ok((rebuild(w, &tour.stops, &cells), ops))
}

/// How elapsed time is charged against the budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BudgetAccounting {
    /// Travel time plus dwell at earlier stops.
    #[default]
    TravelAndDwell,
    /// Travel time only.
    TravelOnly,
}

/// Keeps the stops that start before `budget_t` and returns to the depot
/// straight from the last kept dwell point. Tours that fit are unchanged.
pub fn truncate_to_budget(
    tour: &TourPlan,
    budget_t: f64,
    spec: &ChargerSpec,
    accounting: BudgetAccounting,
) -> TourPlan {
    let arrivals = tour.arrivals(spec, accounting == BudgetAccounting::TravelAndDwell);
    let keep = arrivals.iter().take_while(|&&r| r < budget_t).count();
    if keep == tour.stops.len() {
        return tour.clone();
    }
    let depot = tour.depot();
    if keep == 0 {
        return TourPlan::stay_home(depot);
    }
    let last = tour.stops[keep - 1];
    let seg = last.pos.segment;
    let mut waypoints: Vec<Point> = tour.waypoints[..=seg].to_vec();
    waypoints.push(last.point);
    waypoints.push(depot);
    let stops = tour.stops[..keep]
        .iter()
        .map(|s| {
            let mut s = *s;
            if s.pos.segment == seg {
                s.pos.t = if last.pos.t > 0.0 {
                    (s.pos.t / last.pos.t).min(1.0)
                } else {
                    1.0
                };
            }
            s
        })
        .collect();
    let length = polyline_length(&waypoints);
    TourPlan {
        waypoints,
        stops,
        length,
    }
}

/// Travel-aware score of a tour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanEvaluation {
    pub arrivals: Vec<f64>,
    pub per_node_energy: Vec<f64>,
    pub per_node_utility: Vec<f64>,
    pub total_utility: f64,
}

/// Charges each node with the conservative cell power of every stop,
/// starting at the stop's real arrival time and clipped at the node's
/// slot-rounded deadline.
pub fn evaluate_plan(
    tour: &TourPlan,
    scenario: &Scenario,
    gridmap: &GridMap,
    slots: &SlotPlan,
) -> PlanEvaluation {
    let arrivals = tour.arrivals(&scenario.charger, true);
    let per_node_energy: Vec<f64> = (0..scenario.nodes.len())
        .map(|n| {
            let deadline = slots.rounded_deadlines[n];
            tour.stops
                .iter()
                .zip(&arrivals)
                .map(|(s, &r)| clipped_stop_energy(gridmap.power(s.grid, n), r, s.dwell, deadline))
                .sum()
        })
        .collect();
    let per_node_utility: Vec<f64> = per_node_energy
        .iter()
        .zip(&scenario.nodes)
        .map(|(&q, node)| clamped_utility(q, node.demand))
        .collect();
    PlanEvaluation {
        arrivals,
        total_utility: per_node_utility.iter().sum(),
        per_node_energy,
        per_node_utility,
    }
}
