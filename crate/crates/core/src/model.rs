//! Charging power law, bounded utility and deadline-clipped charging energy.
//!
//! Units are SI throughout: metres, seconds, watts and joules.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SchedError};
use crate::geometry::{Point, Rect};

/// Physical parameters of the mobile charger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargerSpec {
    /// Power-scale constant (W·m²).
    pub alpha: f64,
    /// Distance offset (m).
    pub beta: f64,
    /// Maximum charging distance (m). Power is zero beyond it.
    pub range_d: f64,
    /// Travel speed (m/s). `f64::INFINITY` models instantaneous travel.
    pub speed_v: f64,
    pub depot: Point,
}

impl Default for ChargerSpec {
    fn default() -> Self {
        ChargerSpec {
            alpha: 100.0,
            beta: 10.0,
            range_d: 6.0,
            speed_v: 1.0,
            depot: Point::ORIGIN,
        }
    }
}

impl ChargerSpec {
    pub fn new(alpha: f64, beta: f64, range_d: f64, speed_v: f64, depot: Point) -> Result<Self> {
        let spec = ChargerSpec {
            alpha,
            beta,
            range_d,
            speed_v,
            depot,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        positive("alpha", self.alpha)?;
        positive("beta", self.beta)?;
        positive("range_d", self.range_d)?;
        positive("speed_v", self.speed_v)?;
        if !(self.depot.x.is_finite() && self.depot.y.is_finite()) {
            return Err(invalid("depot", "coordinates must be finite"));
        }
        Ok(())
    }

    /// Received power at distance `d`; `d` is assumed nonnegative.
    #[inline]
    pub fn power(&self, d: f64) -> f64 {
        if d <= self.range_d {
            self.alpha / ((d + self.beta) * (d + self.beta))
        } else {
            0.0
        }
    }

    /// Seconds needed to travel `meters`.
    #[inline]
    pub fn travel_time(&self, meters: f64) -> f64 {
        if meters == 0.0 {
            0.0
        } else {
            meters / self.speed_v
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be > 0, got {v}")))
    }
}

/// A rechargeable node together with its charging request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorNode {
    pub id: u32,
    pub position: Point,
    /// Required energy (J).
    pub demand: f64,
    /// Absolute deadline (s) measured from depot departure.
    pub deadline: f64,
}

impl SensorNode {
    pub fn new(id: u32, position: Point, demand: f64, deadline: f64) -> Result<Self> {
        positive("demand", demand)?;
        positive("deadline", deadline)?;
        if !deadline.is_finite() || !demand.is_finite() {
            return Err(invalid("node", "demand and deadline must be finite"));
        }
        Ok(SensorNode {
            id,
            position,
            demand,
            deadline,
        })
    }
}

/// A square field of nodes served by one charger within a deadline budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub plane: Rect,
    pub nodes: Vec<SensorNode>,
    pub charger: ChargerSpec,
    /// Deadline budget (s); the largest node deadline unless overridden.
    pub budget_t: f64,
}

impl Scenario {
    /// Builds a scenario on the square `[0, side]²`. `budget_t` defaults to
    /// the maximum node deadline.
    pub fn new(
        plane_side: f64,
        nodes: Vec<SensorNode>,
        charger: ChargerSpec,
        budget_t: Option<f64>,
    ) -> Result<Self> {
        positive("plane_side", plane_side)?;
        let plane = Rect::square(Point::ORIGIN, plane_side);
        let budget_t =
            budget_t.unwrap_or_else(|| nodes.iter().map(|n| n.deadline).fold(0.0, f64::max));
        let scenario = Scenario {
            plane,
            nodes,
            charger,
            budget_t,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        self.charger.validate()?;
        if self.nodes.is_empty() {
            return Err(SchedError::InvalidScenario("no sensor nodes".into()));
        }
        if (self.plane.width() - self.plane.height()).abs() > 1e-9 * self.plane.width() {
            return Err(SchedError::InvalidScenario("plane must be square".into()));
        }
        for n in &self.nodes {
            if !self.plane.contains(n.position) {
                return Err(SchedError::InvalidScenario(format!(
                    "node {} at ({}, {}) lies outside the plane",
                    n.id, n.position.x, n.position.y
                )));
            }
            if !(n.demand > 0.0 && n.deadline > 0.0) {
                return Err(SchedError::InvalidScenario(format!(
                    "node {} needs positive demand and deadline",
                    n.id
                )));
            }
        }
        positive("budget_t", self.budget_t)?;
        Ok(())
    }

    pub fn plane_side(&self) -> f64 {
        self.plane.width()
    }
}

/// One charger stop: where it parks, when it gets there and how long it stays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRecord {
    pub location: Point,
    /// Arrival time (s).
    pub arrival: f64,
    /// Dwell duration (s).
    pub dwell: f64,
    pub grid_id: Option<usize>,
}

/// Received power `α/(d+β)²` for `d ≤ D`, zero beyond.
pub fn power_at_distance(d: f64, spec: &ChargerSpec) -> Result<f64> {
    if !(d >= 0.0) {
        return Err(invalid("distance", format!("must be >= 0, got {d}")));
    }
    Ok(spec.power(d))
}

/// Linear charging utility saturating at the demand.
pub fn utility(q: f64, demand: f64) -> Result<f64> {
    if !(demand > 0.0) {
        return Err(invalid("demand", format!("must be > 0, got {demand}")));
    }
    if !(q >= 0.0) {
        return Err(invalid("energy", format!("must be >= 0, got {q}")));
    }
    Ok(clamped_utility(q, demand))
}

#[inline]
pub(crate) fn clamped_utility(q: f64, demand: f64) -> f64 {
    if q <= demand {
        q / demand
    } else {
        1.0
    }
}

/// Energy one stop delivers before `deadline` at constant `power`.
#[inline]
pub(crate) fn clipped_stop_energy(power: f64, arrival: f64, dwell: f64, deadline: f64) -> f64 {
    if arrival < deadline {
        power * (deadline - arrival).min(dwell)
    } else {
        0.0
    }
}

/// Energy a node receives strictly before its deadline from a list of stops,
/// using the true charger-to-node distance of each stop.
pub fn effective_energy(stops: &[StopRecord], node: &SensorNode, spec: &ChargerSpec) -> f64 {
    stops
        .iter()
        .map(|s| {
            let p = spec.power(s.location.distance(node.position));
            clipped_stop_energy(p, s.arrival, s.dwell, node.deadline)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec() -> ChargerSpec {
        ChargerSpec::default()
    }

    #[test]
    fn power_examples() {
        assert_eq!(power_at_distance(0.0, &spec()).unwrap(), 1.0);
        assert_eq!(power_at_distance(7.0, &spec()).unwrap(), 0.0);
        assert_relative_eq!(power_at_distance(5.0, &spec()).unwrap(), 100.0 / 225.0);
        // closed interval at the cutoff
        assert_relative_eq!(power_at_distance(6.0, &spec()).unwrap(), 100.0 / 256.0);
        assert!(power_at_distance(-1.0, &spec()).is_err());
        assert!(power_at_distance(f64::NAN, &spec()).is_err());
    }

    #[test]
    fn utility_examples() {
        assert_eq!(utility(50.0, 100.0).unwrap(), 0.5);
        assert_eq!(utility(150.0, 100.0).unwrap(), 1.0);
        assert_eq!(utility(0.0, 100.0).unwrap(), 0.0);
        assert!(utility(1.0, 0.0).is_err());
        assert!(utility(1.0, -3.0).is_err());
    }

    #[test]
    fn charger_rejects_nonpositive_parameters() {
        assert!(ChargerSpec::new(0.0, 10.0, 6.0, 1.0, Point::ORIGIN).is_err());
        assert!(ChargerSpec::new(100.0, 10.0, 6.0, -1.0, Point::ORIGIN).is_err());
        assert!(ChargerSpec::new(100.0, 10.0, 6.0, f64::INFINITY, Point::ORIGIN).is_ok());
    }

    fn node(deadline: f64) -> SensorNode {
        SensorNode::new(0, Point::new(1.0, 1.0), 100.0, deadline).unwrap()
    }

    fn stop_at(p: Point, arrival: f64, dwell: f64) -> StopRecord {
        StopRecord {
            location: p,
            arrival,
            dwell,
            grid_id: None,
        }
    }

    #[test]
    fn effective_energy_single_stop() {
        let n = node(100.0);
        let q = effective_energy(&[stop_at(n.position, 0.0, 10.0)], &n, &spec());
        assert_relative_eq!(q, 10.0);
    }

    #[test]
    fn effective_energy_deadline_boundaries() {
        let n = node(100.0);
        // arrival exactly at the deadline contributes nothing
        assert_eq!(
            effective_energy(&[stop_at(n.position, 100.0, 10.0)], &n, &spec()),
            0.0
        );
        // straddling stop is clipped at the deadline
        assert_relative_eq!(
            effective_energy(&[stop_at(n.position, 95.0, 10.0)], &n, &spec()),
            5.0
        );
    }

    #[test]
    fn effective_energy_is_additive() {
        let n = node(50.0);
        let a = [stop_at(Point::new(2.0, 1.0), 0.0, 20.0)];
        let b = [stop_at(Point::new(4.0, 3.0), 30.0, 30.0)];
        let both = [a[0], b[0]];
        assert_relative_eq!(
            effective_energy(&both, &n, &spec()),
            effective_energy(&a, &n, &spec()) + effective_energy(&b, &n, &spec())
        );
    }

    #[test]
    fn scenario_validation() {
        let n = SensorNode::new(0, Point::new(60.0, 1.0), 10.0, 300.0).unwrap();
        assert!(Scenario::new(50.0, vec![n], spec(), None).is_err());
        assert!(Scenario::new(50.0, vec![], spec(), Some(10.0)).is_err());
        let n = SensorNode::new(0, Point::new(6.0, 1.0), 10.0, 300.0).unwrap();
        let s = Scenario::new(50.0, vec![n], spec(), None).unwrap();
        assert_eq!(s.budget_t, 300.0);
        assert!(SensorNode::new(1, Point::ORIGIN, 0.0, 1.0).is_err());
    }
}
