//! Seeded randomized verification suites pairing each solver with its
//! brute-force reference. Shared by the `oracle-check` subcommand and the
//! acceptance tests.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::discretize::{grid_power, max_side_for_error, partition, slotting, GridCell, GridMap};
use crate::error::Result;
use crate::geometry::{Point, Rect};
use crate::greedy::{greedy_schedule, marginal_gain, objective, Assignment};
use crate::model::{effective_energy, ChargerSpec, Scenario, SensorNode, StopRecord};
use crate::oracle::{
    exhaustive_opt, integrate_energy, sampled_optimal_path, EXHAUSTIVE_LIMIT, MAX_PATH_STOPS,
};
use crate::path::{initial_path, ordered_cover, skip_substitute, skip_substitute_traced};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: &'static str,
    pub cases: usize,
    pub violations: usize,
    pub detail: String,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.cases > 0
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: {} cases, {} violations; {}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.violations,
            self.detail
        )
    }
}

/// A small scheduling instance: scenario, candidate cells and slots.
pub struct SmallInstance {
    pub scenario: Scenario,
    pub gridmap: GridMap,
    pub slots: crate::discretize::SlotPlan,
}

/// Random instance with at most `max_slots` slots, `max_cells` cells and
/// `max_nodes` nodes. Even draws use real geometry (1 or 4 cells, pruned
/// when a cell reaches nobody); odd draws use a random power matrix.
pub fn random_small_instance(
    rng: &mut ChaCha8Rng,
    max_slots: usize,
    max_cells: usize,
    max_nodes: usize,
) -> Result<SmallInstance> {
    let dt = 10.0;
    let m = rng.random_range(1..=max_slots);
    let n = rng.random_range(1..=max_nodes);
    let side = rng.random_range(3.0..12.0);
    let nodes = (0..n)
        .map(|i| {
            SensorNode::new(
                i as u32,
                Point::new(rng.random_range(0.0..side), rng.random_range(0.0..side)),
                rng.random_range(2.0..25.0),
                rng.random_range(1.0..(m as f64 * dt + 5.0)),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let scenario = Scenario::new(side, nodes, ChargerSpec::default(), Some(m as f64 * dt))?;
    let gridmap = if rng.random_bool(0.5) && max_cells >= 4 {
        let per_side = if rng.random_bool(0.8) { 2.0 } else { 1.0 };
        let map = GridMap::build(&scenario, side / per_side, false)?;
        if rng.random_bool(0.3) {
            map.pruned()
        } else {
            map
        }
    } else {
        let cells_n = rng.random_range(1..=max_cells);
        let cells: Vec<GridCell> = (0..cells_n)
            .map(|k| GridCell {
                id: k,
                bounds: Rect::square(Point::new(k as f64, 0.0), 1.0),
                representative: Point::new(k as f64 + 0.5, 0.5),
            })
            .collect();
        let power = (0..cells_n * n)
            .map(|_| {
                if rng.random_bool(0.3) {
                    0.0
                } else {
                    rng.random_range(0.05..1.0)
                }
            })
            .collect();
        GridMap::from_parts(1.0, cells, n, power)?
    };
    let slots = slotting(scenario.budget_t, dt, &scenario.nodes)?;
    Ok(SmallInstance {
        scenario,
        gridmap,
        slots,
    })
}

/// Greedy value against the exhaustive optimum on random tiny instances.
pub fn check_approximation(instances: usize, seed: u64, max_size: f64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let limit = max_size.min(EXHAUSTIVE_LIMIT);
    let mut violations = 0;
    let mut cases = 0;
    let mut worst = f64::INFINITY;
    let mut ratio_sum = 0.0;
    while cases < instances {
        let inst = random_small_instance(&mut rng, 4, 6, 4)?;
        if (inst.gridmap.len() as f64 + 1.0).powi(inst.slots.count as i32) > limit {
            continue;
        }
        let greedy = greedy_schedule(&inst.scenario, &inst.gridmap, &inst.slots).total_utility;
        let (opt, _) = exhaustive_opt(&inst.scenario, &inst.gridmap, &inst.slots)?;
        let ratio = if opt > 0.0 { greedy / opt } else { 1.0 };
        if ratio < 0.5 || greedy > opt + 1e-12 {
            violations += 1;
        }
        worst = worst.min(ratio);
        ratio_sum += ratio;
        cases += 1;
    }
    Ok(CheckReport {
        name: "greedy vs exhaustive optimum (ratio >= 0.5)",
        cases,
        violations,
        detail: format!(
            "worst ratio {worst:.4}, mean ratio {:.4}",
            ratio_sum / cases.max(1) as f64
        ),
    })
}

/// Random nested pair `A ⊆ B` plus an edge `u` on a slot free in `B`.
pub struct NestedTriple {
    pub a: Assignment,
    pub b: Assignment,
    pub slot: usize,
    pub grid: usize,
}

pub fn random_triple(rng: &mut ChaCha8Rng, inst: &SmallInstance) -> Option<NestedTriple> {
    let m = inst.slots.count;
    let g = inst.gridmap.len();
    if g == 0 {
        return None;
    }
    let mut b = Assignment::empty(m);
    let mut a = Assignment::empty(m);
    let free = rng.random_range(0..m);
    for h in 0..m {
        if h == free || !rng.random_bool(0.7) {
            continue;
        }
        let k = rng.random_range(0..g);
        b.assign(h, k).ok()?;
        if rng.random_bool(0.5) {
            a.assign(h, k).ok()?;
        }
    }
    Some(NestedTriple {
        a,
        b,
        slot: free,
        grid: rng.random_range(0..g),
    })
}

/// Diminishing returns and monotonicity on random nested triples, compared
/// exactly (no tolerance).
pub fn check_submodularity(triples: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut cases = 0;
    while cases < triples {
        let inst = random_small_instance(&mut rng, 8, 10, 6)?;
        for _ in 0..10 {
            let Some(t) = random_triple(&mut rng, &inst) else {
                continue;
            };
            let (sc, gm, sl) = (&inst.scenario, &inst.gridmap, &inst.slots);
            let ga = marginal_gain(&t.a, t.slot, t.grid, sc, gm, sl)?;
            let gb = marginal_gain(&t.b, t.slot, t.grid, sc, gm, sl)?;
            let fa = objective(&t.a, sc, gm, sl);
            let fb = objective(&t.b, sc, gm, sl);
            if !(ga >= gb && gb >= 0.0 && fb >= fa) {
                violations += 1;
            }
            cases += 1;
        }
    }
    Ok(CheckReport {
        name: "submodularity and monotonicity (exact)",
        cases,
        violations,
        detail: "checked gain(u|A) >= gain(u|B) >= 0 and f(B) >= f(A)".into(),
    })
}

/// Counts for [`check_power_bound`] at one error level.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PowerBoundCounts {
    pub samples: usize,
    pub below_lower: usize,
    pub above_true: usize,
    /// Cutoff runs only: samples where the true point is in range but the
    /// conservative cell distance is not.
    pub straddling: usize,
}

/// Samples (cell, node, in-cell point) triples with δ from the error level
/// and compares per-cell power with the power from the sampled point.
/// Without a cutoff every sample must satisfy `(1-λ)·P ≤ P_cell ≤ P`. With
/// the cutoff the upper bound must always hold; the lower bound is checked on
/// cells lying wholly within range, and straddling samples are counted.
pub fn check_power_bound(
    lambda: f64,
    samples: usize,
    seed: u64,
    range_d: f64,
) -> Result<PowerBoundCounts> {
    let spec = ChargerSpec {
        range_d,
        ..ChargerSpec::default()
    };
    let delta = max_side_for_error(lambda, spec.beta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = PowerBoundCounts::default();
    let reach = if range_d.is_finite() {
        range_d + 2.0 * delta
    } else {
        4.0 * delta + 15.0
    };
    for i in 0..samples {
        let origin = Point::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0));
        let cell = GridCell {
            id: 0,
            bounds: Rect::square(origin, delta),
            representative: Point::new(origin.x + delta / 2.0, origin.y + delta / 2.0),
        };
        let c = cell.bounds.corners();
        // first samples pin nodes and points to corners and edge midpoints
        let (node_pos, point) = if i < 64 {
            let special = [
                c[0],
                c[1],
                c[2],
                c[3],
                c[0].midpoint(c[1]),
                c[1].midpoint(c[2]),
                cell.bounds.center(),
                c[3].midpoint(c[0]),
            ];
            (special[i % 8], special[(i / 8) % 8])
        } else {
            let center = cell.bounds.center();
            (
                Point::new(
                    center.x + rng.random_range(-reach..reach),
                    center.y + rng.random_range(-reach..reach),
                ),
                Point::new(
                    origin.x + rng.random_range(0.0..=delta),
                    origin.y + rng.random_range(0.0..=delta),
                ),
            )
        };
        let node = SensorNode::new(0, node_pos, 1.0, 1.0)?;
        let cell_power = grid_power(&cell, &node, &spec);
        let true_power = spec.power(point.distance(node_pos));
        counts.samples += 1;
        if cell_power > true_power {
            counts.above_true += 1;
        }
        let within = cell.bounds.farthest_distance(node_pos) <= spec.range_d;
        if !within && true_power > 0.0 {
            counts.straddling += 1;
        }
        if within && cell_power < (1.0 - lambda) * true_power * (1.0 - 1e-12) {
            counts.below_lower += 1;
        }
    }
    Ok(counts)
}

pub fn check_cell_power(lambdas: &[f64], samples: usize, seed: u64) -> Result<CheckReport> {
    let mut cases = 0;
    let mut violations = 0;
    let mut detail = Vec::new();
    for (i, &lambda) in lambdas.iter().enumerate() {
        let free = check_power_bound(lambda, samples, seed + i as u64, f64::INFINITY)?;
        let cut = check_power_bound(
            lambda,
            samples,
            seed + 1000 + i as u64,
            ChargerSpec::default().range_d,
        )?;
        cases += free.samples + cut.samples;
        violations += free.below_lower + free.above_true + cut.below_lower + cut.above_true;
        detail.push(format!(
            "λ={lambda}: no-cutoff {}/{} low/high, D=6 {}/{} low/high, {} straddling",
            free.below_lower, free.above_true, cut.below_lower, cut.above_true, cut.straddling
        ));
    }
    Ok(CheckReport {
        name: "cell power within (1-λ)·P and P",
        cases,
        violations,
        detail: detail.join("; "),
    })
}

/// Random path-optimizer instance: stop cells on a small plane.
pub fn random_tour_instance(
    rng: &mut ChaCha8Rng,
    max_stops: usize,
) -> Result<(GridMap, crate::path::TourPlan)> {
    let side = rng.random_range(8.0..25.0);
    let delta = rng.random_range(0.5..3.0);
    let cells = partition(&Rect::square(Point::ORIGIN, side), delta)?;
    let gridmap = GridMap::from_parts(delta, cells, 0, vec![])?;
    let stops = rng.random_range(1..=max_stops);
    let mut entries = Vec::with_capacity(stops);
    while entries.len() < stops {
        let k = rng.random_range(0..gridmap.len());
        if entries.last() != Some(&Some(k)) {
            entries.push(Some(k));
        }
    }
    let depot = if rng.random_bool(0.5) {
        Point::ORIGIN
    } else {
        Point::new(rng.random_range(0.0..side), rng.random_range(0.0..side))
    };
    let tour = initial_path(&Assignment::from_entries(entries), &gridmap, depot, 1.0);
    Ok((gridmap, tour))
}

/// Per-move shortening and coverage, fixpoint, and the additive
/// `√2·m·δ` bound against the sampled order-preserving optimum.
pub fn check_path_optimizer(tours: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut bound_cases = 0;
    let mut ops_total = 0;
    let mut worst_gap = f64::NEG_INFINITY;
    for _ in 0..tours {
        let (gm, tour) = random_tour_instance(&mut rng, 12)?;
        let sigma = gm.delta / 100.0;
        let (out, ops) = skip_substitute_traced(&tour, &gm, sigma)?;
        ops_total += ops.len();
        let mut bad = ops
            .iter()
            .any(|op| !(op.length_after < op.length_before) || !op.covers_all);
        let cells: Vec<Rect> = out.stops.iter().map(|s| gm.cells[s.grid].bounds).collect();
        bad |= ordered_cover(&out.waypoints, &cells).is_none();
        bad |= !out.is_consistent(&gm);
        bad |= out.length > tour.length;
        bad |= skip_substitute(&out, &gm, sigma)? != out;
        if out.stops.len() <= MAX_PATH_STOPS {
            let oracle = sampled_optimal_path(&cells, tour.depot(), 49)?;
            let slack = std::f64::consts::SQRT_2 * out.stops.len() as f64 * gm.delta;
            worst_gap = worst_gap.max(out.length - oracle - slack);
            bad |= out.length > oracle + slack;
            bound_cases += 1;
        }
        if bad {
            violations += 1;
        }
    }
    Ok(CheckReport {
        name: "skip-substitute coverage, shortening, fixpoint and √2·m·δ bound",
        cases: tours,
        violations,
        detail: format!(
            "{ops_total} accepted moves, {bound_cases} tours against the oracle, worst (len - oracle - √2mδ) = {worst_gap:.4} m"
        ),
    })
}

/// Closed-form deadline-clipped energy against time-stepped integration.
pub fn check_energy(lists: usize, seed: u64, fine_dt: f64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = ChargerSpec::default();
    let mut violations = 0;
    let mut worst = 0.0_f64;
    for _ in 0..lists {
        let node_pos = Point::new(rng.random_range(0.0..20.0), rng.random_range(0.0..20.0));
        let count = rng.random_range(1..=6);
        let mut t = rng.random_range(0.0..20.0);
        let mut stops = Vec::with_capacity(count);
        for _ in 0..count {
            let dwell = rng.random_range(0.5..40.0);
            let r = rng.random_range(0.0..8.0);
            let ang = rng.random_range(0.0..std::f64::consts::TAU);
            stops.push(StopRecord {
                location: Point::new(node_pos.x + r * ang.cos(), node_pos.y + r * ang.sin()),
                arrival: t,
                dwell,
                grid_id: None,
            });
            t += dwell + rng.random_range(0.0..15.0);
        }
        let node = SensorNode::new(0, node_pos, 50.0, rng.random_range(1.0..t + 10.0))?;
        let closed = effective_energy(&stops, &node, &spec);
        let stepped = integrate_energy(&stops, &node, &spec, fine_dt)?;
        let rel = if closed == 0.0 && stepped == 0.0 {
            0.0
        } else {
            (closed - stepped).abs() / closed.abs().max(stepped.abs())
        };
        worst = worst.max(rel);
        if rel > 1e-6 {
            violations += 1;
        }
    }
    Ok(CheckReport {
        name: "closed-form energy vs time-stepped integration (rel 1e-6)",
        cases: lists,
        violations,
        detail: format!("worst relative error {worst:.3e}"),
    })
}

/// All oracle suites at their default sizes.
pub fn run_all(seed: u64, max_size: f64) -> Result<Vec<CheckReport>> {
    Ok(vec![
        check_approximation(200, seed, max_size)?,
        check_submodularity(1000, seed + 1)?,
        check_cell_power(&[0.05, 0.15, 0.45, 0.75], 10_000, seed + 2)?,
        check_path_optimizer(100, seed + 3)?,
        check_energy(500, seed + 4, 1e-3)?,
    ])
}
