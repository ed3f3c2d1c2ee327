//! Capacitated vehicle routing with Euclidean distances on the unit square.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ObjectiveVector, ProblemError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvrpGenConfig {
    pub demand: (u32, u32),
    pub capacity: u32,
}

impl Default for CvrpGenConfig {
    fn default() -> Self {
        Self { demand: (1, 9), capacity: 40 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Customer {
    pub pos: [f64; 2],
    pub demand: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CvrpData", into = "CvrpData")]
pub struct CvrpInstance {
    depot: [f64; 2],
    customers: Vec<Customer>,
    capacity: u32,
}

#[derive(Serialize, Deserialize)]
struct CvrpData {
    depot: [f64; 2],
    customers: Vec<Customer>,
    capacity: u32,
}

impl TryFrom<CvrpData> for CvrpInstance {
    type Error = ProblemError;

    fn try_from(d: CvrpData) -> Result<Self, ProblemError> {
        CvrpInstance::new(d.depot, d.customers, d.capacity)
    }
}

impl From<CvrpInstance> for CvrpData {
    fn from(i: CvrpInstance) -> Self {
        CvrpData { depot: i.depot, customers: i.customers, capacity: i.capacity }
    }
}

fn in_unit_square(p: [f64; 2]) -> bool {
    p.iter().all(|c| (0.0..=1.0).contains(c))
}

impl CvrpInstance {
    pub fn new(depot: [f64; 2], customers: Vec<Customer>, capacity: u32) -> Result<Self, ProblemError> {
        if customers.is_empty() {
            return Err(ProblemError::InvalidCount { what: "customers", value: 0 });
        }
        if capacity == 0 {
            return Err(ProblemError::InvalidInstance("capacity must be positive".into()));
        }
        if !in_unit_square(depot) {
            return Err(ProblemError::InvalidInstance("depot outside the unit square".into()));
        }
        for (i, c) in customers.iter().enumerate() {
            if !in_unit_square(c.pos) {
                return Err(ProblemError::InvalidInstance(format!("customer {i} outside the unit square")));
            }
            if c.demand == 0 || c.demand > capacity {
                return Err(ProblemError::InvalidInstance(format!(
                    "customer {i} demand {} not in 1..={capacity}",
                    c.demand
                )));
            }
        }
        Ok(Self { depot, customers, capacity })
    }

    pub fn depot(&self) -> [f64; 2] {
        self.depot
    }

    pub fn customers(&self) -> &[Customer] {
        &self.customers
    }

    pub fn num_customers(&self) -> usize {
        self.customers.len()
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn demand(&self, customer: usize) -> u32 {
        self.customers[customer].demand
    }

    /// Location of node `i`: customer `i`, or the depot for `None`.
    fn pos(&self, node: Option<usize>) -> [f64; 2] {
        node.map_or(self.depot, |c| self.customers[c].pos)
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

pub fn generate_cvrp(seed: u64, num_customers: usize, cfg: &CvrpGenConfig) -> Result<CvrpInstance, ProblemError> {
    if num_customers == 0 {
        return Err(ProblemError::InvalidCount { what: "customers", value: 0 });
    }
    let (lo, hi) = cfg.demand;
    if lo > hi {
        return Err(ProblemError::InvalidRange { what: "demand", min: lo as u64, max: hi as u64 });
    }
    if lo == 0 || hi > cfg.capacity {
        return Err(ProblemError::InvalidInstance(format!(
            "demand range {lo}..={hi} incompatible with capacity {}",
            cfg.capacity
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let depot = [rng.random::<f64>(), rng.random::<f64>()];
    let customers = (0..num_customers)
        .map(|_| Customer { pos: [rng.random(), rng.random()], demand: rng.random_range(lo..=hi) })
        .collect();
    CvrpInstance::new(depot, customers, cfg.capacity)
}

/// Length of depot → customers → depot.
pub fn route_length(inst: &CvrpInstance, route: &[usize]) -> f64 {
    let mut prev = inst.depot;
    let mut total = 0.0;
    for &c in route {
        let p = inst.pos(Some(c));
        total += dist(prev, p);
        prev = p;
    }
    total + dist(prev, inst.depot)
}

/// `[D_total, D_max]` of routes assumed valid.
pub fn routes_objectives(inst: &CvrpInstance, routes: &[Vec<usize>]) -> ObjectiveVector {
    let mut total = 0.0;
    let mut longest = 0.0f64;
    for r in routes {
        let len = route_length(inst, r);
        total += len;
        longest = longest.max(len);
    }
    ObjectiveVector(vec![total, longest])
}

/// Validates that `routes` partition the customers within capacity and
/// returns `[D_total, D_max]`.
pub fn evaluate_cvrp(inst: &CvrpInstance, routes: &[Vec<usize>]) -> Result<ObjectiveVector, ProblemError> {
    let mut visited = vec![false; inst.num_customers()];
    for (k, r) in routes.iter().enumerate() {
        let mut load = 0u64;
        for &c in r {
            if c >= inst.num_customers() {
                return Err(ProblemError::InvalidRoutes(format!("route {k} visits unknown customer {c}")));
            }
            if std::mem::replace(&mut visited[c], true) {
                return Err(ProblemError::InvalidRoutes(format!("customer {c} visited more than once")));
            }
            load += u64::from(inst.demand(c));
        }
        if load > u64::from(inst.capacity) {
            return Err(ProblemError::InvalidRoutes(format!(
                "route {k} carries {load}, exceeding capacity {}",
                inst.capacity
            )));
        }
    }
    if let Some(c) = visited.iter().position(|v| !v) {
        return Err(ProblemError::InvalidRoutes(format!("customer {c} is not visited")));
    }
    Ok(routes_objectives(inst, routes))
}

/// Splits a visiting order into routes, opening a new route whenever the next
/// customer would exceed the vehicle capacity.
pub fn split_by_capacity(inst: &CvrpInstance, order: &[usize]) -> Vec<Vec<usize>> {
    let mut routes = Vec::new();
    let mut current = Vec::new();
    let mut load = 0u32;
    for &c in order {
        let d = inst.demand(c);
        if load + d > inst.capacity && !current.is_empty() {
            routes.push(std::mem::take(&mut current));
            load = 0;
        }
        current.push(c);
        load += d;
    }
    if !current.is_empty() {
        routes.push(current);
    }
    routes
}
