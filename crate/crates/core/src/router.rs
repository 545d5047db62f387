//! Single-robot routing through free time windows.
//!
//! Search states are `(resource, free window)` pairs labelled with the
//! earliest tick the robot can enter that window. Because a robot may wait
//! inside a resource until its window closes, the earliest entry dominates
//! every later one, so each state is expanded at most once.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use thiserror::Error;

use crate::graph::{Point, ResourceGraph, ResourceId};
use crate::reservation::{ReservationTable, TimeInterval};
use crate::{RobotId, Tick, INFINITY};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Visit {
    pub resource: ResourceId,
    pub interval: TimeInterval,
}

/// Timed route of one robot. The last visit is on the goal node and never
/// ends.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RoutePlan {
    pub robot: RobotId,
    pub visits: Vec<Visit>,
    /// Entry tick of the final visit.
    pub arrival: Tick,
    /// Ticks between departure and arrival.
    pub actions: Tick,
}

impl RoutePlan {
    /// Panics on an empty visit list.
    pub fn from_visits(robot: RobotId, visits: Vec<Visit>) -> Self {
        let first = visits.first().expect("a plan has at least one visit");
        let last = visits.last().expect("a plan has at least one visit");
        let arrival = last.interval.start;
        Self {
            robot,
            actions: arrival - first.interval.start,
            arrival,
            visits,
        }
    }

    pub fn start(&self) -> ResourceId {
        self.visits[0].resource
    }

    pub fn goal(&self) -> ResourceId {
        self.visits[self.visits.len() - 1].resource
    }

    pub fn depart(&self) -> Tick {
        self.visits[0].interval.start
    }

    /// Resource occupied at `tick`; the start before departure, the goal after
    /// arrival.
    pub fn resource_at(&self, tick: Tick) -> ResourceId {
        if tick < self.depart() {
            return self.start();
        }
        let i = self.visits.partition_point(|v| v.interval.start <= tick);
        self.visits[i.saturating_sub(1)].resource
    }

    pub fn position(&self, graph: &ResourceGraph, tick: Tick) -> Point {
        graph.get(self.resource_at(tick)).coords
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RouteError {
    #[error("no route through the free time windows for robot {robot}")]
    NoRoute { robot: RobotId },
    #[error("resource {0} is not a node of the graph")]
    NotANode(ResourceId),
    #[error("reservation table does not match the graph")]
    TableMismatch,
}

/// Fastest route ignoring all reservations, departing at tick 0.
pub fn shortest_path(
    graph: &ResourceGraph,
    robot: RobotId,
    start: ResourceId,
    goal: ResourceId,
) -> Result<RoutePlan, RouteError> {
    plan_route(graph, &ReservationTable::new(graph), robot, start, goal, 0)
}

/// Earliest-arrival route for `robot` that respects every reservation in
/// `table` and ends with an open-ended stay on `goal`.
pub fn plan_route(
    graph: &ResourceGraph,
    table: &ReservationTable,
    robot: RobotId,
    start: ResourceId,
    goal: ResourceId,
    depart: Tick,
) -> Result<RoutePlan, RouteError> {
    for r in [start, goal] {
        if !graph.is_node(r) {
            return Err(RouteError::NotANode(r));
        }
    }
    if table.resource_count() != graph.len() {
        return Err(RouteError::TableMismatch);
    }
    Search::new(graph, table, goal)
        .run(start, depart)
        .map(|visits| RoutePlan::from_visits(robot, visits))
        .ok_or(RouteError::NoRoute { robot })
}

struct State {
    resource: ResourceId,
    window: TimeInterval,
    entry: Tick,
    parent: Option<usize>,
    closed: bool,
}

struct Search<'a> {
    graph: &'a ResourceGraph,
    table: &'a ReservationTable,
    goal: ResourceId,
    windows: HashMap<ResourceId, Vec<TimeInterval>>,
    states: Vec<State>,
    index: HashMap<(ResourceId, Tick), usize>,
    /// `(f, resource, window start, state)`; the ordering is the tie-break rule.
    open: BinaryHeap<Reverse<(Tick, ResourceId, Tick, usize)>>,
}

impl<'a> Search<'a> {
    fn new(graph: &'a ResourceGraph, table: &'a ReservationTable, goal: ResourceId) -> Self {
        Self {
            graph,
            table,
            goal,
            windows: HashMap::new(),
            states: Vec::new(),
            index: HashMap::new(),
            open: BinaryHeap::new(),
        }
    }

    fn heuristic(&self, r: ResourceId) -> Tick {
        Tick::from(self.graph.hops(r, self.goal)) * self.graph.min_duration()
    }

    fn windows_of(&mut self, r: ResourceId) -> &[TimeInterval] {
        let (graph, table) = (self.graph, self.table);
        self.windows.entry(r).or_insert_with(|| {
            let res = graph.get(r);
            table
                .below_capacity(r, res.capacity)
                .into_iter()
                .filter(|w| w.len() >= res.duration)
                .collect()
        })
    }

    fn relax(
        &mut self,
        resource: ResourceId,
        window: TimeInterval,
        entry: Tick,
        parent: Option<usize>,
    ) {
        let id = match self.index.get(&(resource, window.start)) {
            Some(&id) => {
                let s = &mut self.states[id];
                if s.closed || s.entry <= entry {
                    return;
                }
                s.entry = entry;
                s.parent = parent;
                id
            }
            None => {
                let id = self.states.len();
                self.states.push(State {
                    resource,
                    window,
                    entry,
                    parent,
                    closed: false,
                });
                self.index.insert((resource, window.start), id);
                id
            }
        };
        let f = entry + self.heuristic(resource);
        self.open.push(Reverse((f, resource, window.start, id)));
    }

    fn run(mut self, start: ResourceId, depart: Tick) -> Option<Vec<Visit>> {
        let start_duration = self.graph.get(start).duration;
        let first =
            self.windows_of(start).iter().copied().find(|w| {
                w.contains(depart) && (w.is_open() || depart + start_duration <= w.end)
            })?;
        self.relax(start, first, depart, None);

        while let Some(Reverse((_, _, _, id))) = self.open.pop() {
            if self.states[id].closed {
                continue;
            }
            self.states[id].closed = true;
            let (resource, window, entry) = {
                let s = &self.states[id];
                (s.resource, s.window, s.entry)
            };
            if resource == self.goal && window.is_open() {
                return Some(self.reconstruct(id));
            }
            let earliest_exit = entry + self.graph.get(resource).duration;
            if earliest_exit > window.end {
                continue;
            }
            for &next in self.graph.neighbors(resource) {
                let next_duration = self.graph.get(next).duration;
                let candidates: Vec<(TimeInterval, Tick)> = self
                    .windows_of(next)
                    .iter()
                    .take_while(|w| w.start <= window.end)
                    .filter_map(|w| {
                        let enter = earliest_exit.max(w.start);
                        let fits = enter <= window.end
                            && (w.is_open() || enter.saturating_add(next_duration) <= w.end);
                        fits.then_some((*w, enter))
                    })
                    .collect();
                for (w, enter) in candidates {
                    self.relax(next, w, enter, Some(id));
                }
            }
        }
        None
    }

    /// Walks the parent chain and assigns visit times. Entry times are the
    /// earliest feasible ones; waiting is then pushed as far back along the
    /// route as the windows allow, so robots hold position before moving
    /// rather than stalling mid-route.
    fn reconstruct(&self, goal_state: usize) -> Vec<Visit> {
        let mut chain = Vec::new();
        let mut cur = Some(goal_state);
        while let Some(id) = cur {
            chain.push(id);
            cur = self.states[id].parent;
        }
        chain.reverse();

        let n = chain.len();
        let mut enter = vec![0; n];
        enter[0] = self.states[chain[0]].entry;
        enter[n - 1] = self.states[chain[n - 1]].entry;
        for i in (1..n.saturating_sub(1)).rev() {
            let here = &self.states[chain[i]];
            let prev_window_end = self.states[chain[i - 1]].window.end;
            let latest = enter[i + 1] - self.graph.get(here.resource).duration;
            enter[i] = latest.min(prev_window_end);
            debug_assert!(enter[i] >= here.entry);
        }

        (0..n)
            .map(|i| Visit {
                resource: self.states[chain[i]].resource,
                interval: TimeInterval {
                    start: enter[i],
                    end: if i + 1 < n { enter[i + 1] } else { INFINITY },
                },
            })
            .collect()
    }
}
