//! Comparison schedulers: earliest deadline first and uniform random.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::discretize::{conservative_distance, GridMap, SlotPlan};
use crate::greedy::{Assignment, ScheduleResult};
use crate::model::Scenario;
use crate::path::{initial_path, TourPlan};

/// Cell with the smallest conservative distance to node `n`, lowest index
/// on ties.
pub fn nearest_cell(scenario: &Scenario, gridmap: &GridMap, n: usize) -> Option<usize> {
    let p = scenario.nodes[n].position;
    let mut best: Option<(usize, f64)> = None;
    for (k, cell) in gridmap.cells.iter().enumerate() {
        let d = conservative_distance(cell, p);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((k, d));
        }
    }
    best.map(|(k, _)| k)
}

/// Serves one node at a time in deadline order, parking at the cell nearest
/// to it until its demand is met or its rounded deadline passes. Nodes that
/// already hold their demand, whose deadline slot has passed, or that their
/// nearest cell cannot reach are skipped.
pub fn edf_schedule(
    scenario: &Scenario,
    gridmap: &GridMap,
    slots: &SlotPlan,
) -> (ScheduleResult, TourPlan) {
    let node_count = scenario.nodes.len();
    let mut order: Vec<usize> = (0..node_count).collect();
    order.sort_by(|&a, &b| {
        scenario.nodes[a]
            .deadline
            .total_cmp(&scenario.nodes[b].deadline)
            .then(a.cmp(&b))
    });

    let mut assignment = Assignment::empty(slots.count);
    let mut energy = vec![0.0; node_count];
    let mut h = 0;
    for n in order {
        if h >= slots.count {
            break;
        }
        let demand = scenario.nodes[n].demand;
        if !slots.active(h, n) || energy[n] >= demand {
            continue;
        }
        let Some(k) = nearest_cell(scenario, gridmap, n) else {
            break;
        };
        if gridmap.power(k, n) <= 0.0 {
            continue;
        }
        while h < slots.count && slots.active(h, n) && energy[n] < demand {
            assignment.assign(h, k).expect("slots are filled in order");
            for (m, q) in energy.iter_mut().enumerate() {
                if slots.active(h, m) {
                    *q += gridmap.power(k, m) * slots.dt;
                }
            }
            h += 1;
        }
    }

    let tour = initial_path(&assignment, gridmap, scenario.charger.depot, slots.dt);
    (
        ScheduleResult::evaluate(assignment, scenario, gridmap, slots),
        tour,
    )
}

/// Picks a cell uniformly at random for every slot.
pub fn random_schedule(
    scenario: &Scenario,
    gridmap: &GridMap,
    slots: &SlotPlan,
    seed: u64,
) -> (ScheduleResult, TourPlan) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = Assignment::empty(slots.count);
    if !gridmap.is_empty() {
        for h in 0..slots.count {
            let k = rng.random_range(0..gridmap.len());
            assignment.assign(h, k).expect("fresh slot");
        }
    }
    let tour = initial_path(&assignment, gridmap, scenario.charger.depot, slots.dt);
    (
        ScheduleResult::evaluate(assignment, scenario, gridmap, slots),
        tour,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::slotting;
    use crate::geometry::Point;
    use crate::greedy::{greedy_schedule, validate};
    use crate::model::{ChargerSpec, SensorNode};

    fn two_node_scenario() -> Scenario {
        let nodes = vec![
            SensorNode::new(0, Point::new(40.2, 40.2), 30.0, 1200.0).unwrap(),
            SensorNode::new(1, Point::new(10.2, 10.2), 30.0, 600.0).unwrap(),
        ];
        Scenario::new(50.0, nodes, ChargerSpec::default(), None).unwrap()
    }

    #[test]
    fn earliest_deadline_served_first() {
        let sc = two_node_scenario();
        let gm = GridMap::build(&sc, 0.6, false).unwrap();
        let slots = slotting(sc.budget_t, 30.0, &sc.nodes).unwrap();
        let (res, tour) = edf_schedule(&sc, &gm, &slots);
        let first = res.assignment.get(0).unwrap();
        assert_eq!(Some(first), nearest_cell(&sc, &gm, 1));
        assert!(gm.cells[first].bounds.contains(sc.nodes[1].position));
        assert_eq!(tour.stops.len(), 2);
        assert_eq!(res.total_utility, 2.0);
        assert!(validate(&res.assignment.edges(), &slots, gm.len()));
    }

    #[test]
    fn node_past_its_deadline_is_missed() {
        // node 1 needs more slots than remain before its deadline
        let nodes = vec![
            SensorNode::new(0, Point::new(5.2, 5.2), 100.0, 60.0).unwrap(),
            SensorNode::new(1, Point::new(40.2, 40.2), 10.0, 60.0).unwrap(),
        ];
        let sc = Scenario::new(50.0, nodes, ChargerSpec::default(), Some(120.0)).unwrap();
        let gm = GridMap::build(&sc, 0.6, false).unwrap();
        let slots = slotting(sc.budget_t, 30.0, &sc.nodes).unwrap();
        let (res, _) = edf_schedule(&sc, &gm, &slots);
        assert_eq!(res.per_node_utility[1], 0.0);
        assert!(res.per_node_utility[0] > 0.0);
    }

    #[test]
    fn single_node_matches_greedy_choice_of_node() {
        let nodes = vec![SensorNode::new(0, Point::new(20.3, 31.1), 50.0, 900.0).unwrap()];
        let sc = Scenario::new(50.0, nodes, ChargerSpec::default(), None).unwrap();
        let gm = GridMap::build(&sc, 0.6, false).unwrap();
        let slots = slotting(sc.budget_t, 30.0, &sc.nodes).unwrap();
        let (edf, _) = edf_schedule(&sc, &gm, &slots);
        let greedy = greedy_schedule(&sc, &gm, &slots);
        assert_eq!(edf.total_utility, 1.0);
        assert_eq!(greedy.total_utility, 1.0);
        assert_eq!(
            edf.assignment.assigned_count(),
            greedy.assignment.assigned_count()
        );
    }

    #[test]
    fn random_is_seeded() {
        let sc = two_node_scenario();
        let gm = GridMap::build(&sc, 5.0, false).unwrap();
        let slots = slotting(sc.budget_t, 30.0, &sc.nodes).unwrap();
        let (a, _) = random_schedule(&sc, &gm, &slots, 7);
        let (b, _) = random_schedule(&sc, &gm, &slots, 7);
        let (c, _) = random_schedule(&sc, &gm, &slots, 8);
        assert_eq!(a, b);
        assert_ne!(a.assignment, c.assignment);
        assert_eq!(a.assignment.assigned_count(), slots.count);
        assert!(validate(&a.assignment.edges(), &slots, gm.len()));
    }

    #[test]
    fn random_with_one_cell_matches_greedy_option() {
        let sc = two_node_scenario();
        let gm = GridMap::build(&sc, 60.0, false).unwrap();
        assert_eq!(gm.len(), 1);
        let slots = slotting(sc.budget_t, 30.0, &sc.nodes).unwrap();
        let (r, _) = random_schedule(&sc, &gm, &slots, 3);
        assert!(r.assignment.entries().iter().all(|e| *e == Some(0)));
    }
}
