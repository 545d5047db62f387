//! Plan validation that does not trust the planner's reservation table:
//! occupancy is recounted from the visit lists alone.

use std::collections::BTreeMap;
use std::fmt;

use warehouse_routing::{PlanSet, ResourceGraph, ResourceId, RobotId, RoutePlan, Tick, INFINITY};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// More robots than the capacity allows, starting at `tick`.
    Capacity {
        resource: ResourceId,
        tick: Tick,
        count: usize,
        capacity: u32,
    },
    NotAdjacent {
        robot: RobotId,
        seq: usize,
        from: ResourceId,
        to: ResourceId,
    },
    /// Visit `seq` does not start when visit `seq - 1` ends.
    Gap {
        robot: RobotId,
        seq: usize,
        exit: Tick,
        entry: Tick,
    },
    TooShort {
        robot: RobotId,
        seq: usize,
        resource: ResourceId,
        length: Tick,
        duration: Tick,
    },
    UnknownResource {
        robot: RobotId,
        seq: usize,
        resource: ResourceId,
    },
    /// The final visit must be open-ended on a node; no other visit may be.
    BadEnding {
        robot: RobotId,
    },
    EmptyPlan {
        robot: RobotId,
    },
    CostMismatch {
        what: &'static str,
        recorded: u64,
        actual: u64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Capacity {
                resource,
                tick,
                count,
                capacity,
            } => write!(f, "resource {resource} holds {count} robots at tick {tick} (capacity {capacity})"),
            Violation::NotAdjacent { robot, seq, from, to } => {
                write!(f, "robot {robot} visit {seq}: {from} -> {to} are not adjacent")
            }
            Violation::Gap { robot, seq, exit, entry } => {
                write!(f, "robot {robot} visit {seq}: entered at {entry} but left previous at {exit}")
            }
            Violation::TooShort {
                robot,
                seq,
                resource,
                length,
                duration,
            } => write!(
                f,
                "robot {robot} visit {seq}: {length} ticks on resource {resource} (needs {duration})"
            ),
            Violation::UnknownResource { robot, seq, resource } => {
                write!(f, "robot {robot} visit {seq}: unknown resource {resource}")
            }
            Violation::BadEnding { robot } => write!(f, "robot {robot}: route does not end with an open stay on a node"),
            Violation::EmptyPlan { robot } => write!(f, "robot {robot}: empty route"),
            Violation::CostMismatch { what, recorded, actual } => {
                write!(f, "{what} recorded as {recorded} but routes give {actual}")
            }
        }
    }
}

/// Checks every route's shape and the joint occupancy of all routes.
pub fn validate_plans(graph: &ResourceGraph, plans: &[RoutePlan]) -> Vec<Violation> {
    let mut violations = Vec::new();
    let mut intervals: BTreeMap<ResourceId, Vec<(Tick, Tick)>> = BTreeMap::new();

    for plan in plans {
        let robot = plan.robot;
        if plan.visits.is_empty() {
            violations.push(Violation::EmptyPlan { robot });
            continue;
        }
        let last = plan.visits.len() - 1;
        let ending_ok = graph.is_node(plan.visits[last].resource)
            && plan.visits[last].interval.end == INFINITY
            && plan.visits[..last]
                .iter()
                .all(|v| v.interval.end != INFINITY);
        if !ending_ok {
            violations.push(Violation::BadEnding { robot });
        }
        for (seq, visit) in plan.visits.iter().enumerate() {
            let Some(resource) = graph.resource(visit.resource) else {
                violations.push(Violation::UnknownResource {
                    robot,
                    seq,
                    resource: visit.resource,
                });
                continue;
            };
            let iv = visit.interval;
            let length = iv.end.saturating_sub(iv.start);
            if length < resource.duration {
                violations.push(Violation::TooShort {
                    robot,
                    seq,
                    resource: visit.resource,
                    length,
                    duration: resource.duration,
                });
            }
            if seq > 0 {
                let prev = &plan.visits[seq - 1];
                if prev.interval.end != iv.start {
                    violations.push(Violation::Gap {
                        robot,
                        seq,
                        exit: prev.interval.end,
                        entry: iv.start,
                    });
                }
                if !graph.are_adjacent(prev.resource, visit.resource) {
                    violations.push(Violation::NotAdjacent {
                        robot,
                        seq,
                        from: prev.resource,
                        to: visit.resource,
                    });
                }
            }
            intervals
                .entry(visit.resource)
                .or_default()
                .push((iv.start, iv.end));
        }
    }

    for (resource, list) in intervals {
        let Some(res) = graph.resource(resource) else {
            continue;
        };
        // Ends sort before starts at the same tick: half-open intervals.
        let mut events: Vec<(Tick, i8)> = Vec::with_capacity(list.len() * 2);
        for (s, e) in list {
            events.push((s, 1));
            if e != INFINITY {
                events.push((e, -1));
            }
        }
        events.sort_unstable();
        let capacity = res.capacity as usize;
        let mut count = 0usize;
        let mut i = 0;
        while i < events.len() {
            let tick = events[i].0;
            let before = count;
            while i < events.len() && events[i].0 == tick {
                if events[i].1 > 0 {
                    count += 1;
                } else {
                    count -= 1;
                }
                i += 1;
            }
            if count > capacity && count > before {
                violations.push(Violation::Capacity {
                    resource,
                    tick,
                    count,
                    capacity: res.capacity,
                });
            }
        }
    }
    violations
}

/// [`validate_plans`] plus consistency of the recorded totals.
pub fn validate_planset(graph: &ResourceGraph, set: &PlanSet) -> Vec<Violation> {
    let mut violations = validate_plans(graph, set.plans());
    let actions: u64 = set.plans().iter().map(|p| p.arrival - p.depart()).sum();
    if actions != set.total_actions() {
        violations.push(Violation::CostMismatch {
            what: "total actions",
            recorded: set.total_actions(),
            actual: actions,
        });
    }
    let makespan = set.plans().iter().map(|p| p.arrival).max().unwrap_or(0);
    if makespan != set.makespan() {
        violations.push(Violation::CostMismatch {
            what: "makespan",
            recorded: set.makespan(),
            actual: makespan,
        });
    }
    violations
}
