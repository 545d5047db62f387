//! Reference router: breadth-first search over the time-expanded state
//! space, one layer per tick. Exponentially slower than the free-window
//! search and meant only to cross-check it on small instances.

use std::collections::HashSet;

use warehouse_routing::{ReservationTable, ResourceGraph, ResourceId, Tick, INFINITY};

/// Occupancy of every resource at every tick, counted straight from the
/// table entries.
struct Occupancy<'a> {
    graph: &'a ResourceGraph,
    table: &'a ReservationTable,
}

impl Occupancy<'_> {
    fn count(&self, r: ResourceId, t: Tick) -> usize {
        self.table
            .entries(r)
            .iter()
            .filter(|e| e.interval.start <= t && t < e.interval.end)
            .count()
    }

    fn has_room(&self, r: ResourceId, t: Tick) -> bool {
        self.count(r, t) < self.graph.get(r).capacity as usize
    }

    /// Room at every tick from `t` on.
    fn room_forever(&self, r: ResourceId, t: Tick) -> bool {
        let last = self
            .table
            .entries(r)
            .iter()
            .flat_map(|e| [e.interval.start, e.interval.end])
            .filter(|&x| x != INFINITY)
            .max()
            .unwrap_or(0);
        (t..=last.max(t)).all(|tick| self.has_room(r, tick))
    }
}

/// Earliest tick at which a robot leaving `start` at tick 0 can enter `goal`
/// and stay there forever, searching no further than `horizon`.
pub fn earliest_arrival(
    graph: &ResourceGraph,
    table: &ReservationTable,
    start: ResourceId,
    goal: ResourceId,
    horizon: Tick,
) -> Option<Tick> {
    let occ = Occupancy { graph, table };
    if !occ.has_room(start, 0) {
        return None;
    }
    if start == goal && occ.room_forever(goal, 0) {
        return Some(0);
    }
    // (resource, ticks spent there so far capped at its duration)
    let mut layer: HashSet<(ResourceId, Tick)> = HashSet::from([(start, 1)]);
    for t in 1..=horizon {
        let mut next = HashSet::new();
        for &(r, spent) in &layer {
            let duration = graph.get(r).duration;
            if occ.has_room(r, t) {
                next.insert((r, (spent + 1).min(duration)));
            }
            if spent >= duration {
                for &n in graph.neighbors(r) {
                    if occ.has_room(n, t) {
                        if n == goal && occ.room_forever(n, t) {
                            return Some(t);
                        }
                        next.insert((n, 1));
                    }
                }
            }
        }
        if next.is_empty() {
            return None;
        }
        layer = next;
    }
    None
}
