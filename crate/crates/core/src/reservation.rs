//! Per-resource occupancy bookkeeping and free time window extraction.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::graph::{ResourceGraph, ResourceId};
use crate::router::RoutePlan;
use crate::{RobotId, Tick, INFINITY};

/// Half-open tick interval `[start, end)`; `end == INFINITY` is open-ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TimeInterval {
    pub start: Tick,
    pub end: Tick,
}

impl TimeInterval {
    pub fn new(start: Tick, end: Tick) -> Self {
        debug_assert!(start < end, "empty interval [{start}, {end})");
        Self { start, end }
    }

    pub fn open(start: Tick) -> Self {
        Self {
            start,
            end: INFINITY,
        }
    }

    pub fn is_open(&self) -> bool {
        self.end == INFINITY
    }

    pub fn len(&self) -> Tick {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    #[inline]
    pub fn contains(&self, tick: Tick) -> bool {
        self.start <= tick && tick < self.end
    }

    #[inline]
    pub fn overlaps(&self, other: &TimeInterval) -> bool {
        self.start < other.end && other.start < self.end
    }
}

impl fmt::Display for TimeInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_open() {
            write!(f, "[{}, inf)", self.start)
        } else {
            write!(f, "[{}, {})", self.start, self.end)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Reservation {
    pub interval: TimeInterval,
    pub robot: RobotId,
}

/// Interval on one resource during which occupancy stays below capacity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FreeTimeWindow {
    pub resource: ResourceId,
    pub interval: TimeInterval,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReservationError {
    #[error("resource {0} does not exist")]
    UnknownResource(ResourceId),
    #[error("robot {robot} would exceed the capacity of resource {resource} at tick {tick}")]
    CapacityExceeded {
        robot: RobotId,
        resource: ResourceId,
        tick: Tick,
    },
    #[error("robot {0} already holds reservations")]
    AlreadyReserved(RobotId),
}

/// Occupancy of every resource of one graph.
///
/// Entries per resource are kept sorted, so two tables holding the same
/// reservations compare equal regardless of insertion history.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReservationTable {
    slots: Vec<Vec<Reservation>>,
    by_robot: BTreeMap<RobotId, Vec<ResourceId>>,
}

impl ReservationTable {
    pub fn new(graph: &ResourceGraph) -> Self {
        Self::with_resources(graph.len())
    }

    pub fn with_resources(count: usize) -> Self {
        Self {
            slots: vec![Vec::new(); count],
            by_robot: BTreeMap::new(),
        }
    }

    pub fn resource_count(&self) -> usize {
        self.slots.len()
    }

    #[inline]
    pub fn entries(&self, resource: ResourceId) -> &[Reservation] {
        &self.slots[resource.index()]
    }

    pub fn robots(&self) -> impl Iterator<Item = RobotId> + '_ {
        self.by_robot.keys().copied()
    }

    pub fn contains_robot(&self, robot: RobotId) -> bool {
        self.by_robot.contains_key(&robot)
    }

    pub fn is_empty(&self) -> bool {
        self.by_robot.is_empty()
    }

    /// Number of reservations covering `tick` on `resource`.
    pub fn occupancy(&self, resource: ResourceId, tick: Tick) -> usize {
        self.entries(resource)
            .iter()
            .take_while(|e| e.interval.start <= tick)
            .filter(|e| e.interval.contains(tick))
            .count()
    }

    /// Records every visit of `plan`. The table is left untouched on error.
    pub fn reserve(
        &mut self,
        graph: &ResourceGraph,
        plan: &RoutePlan,
    ) -> Result<(), ReservationError> {
        if self.contains_robot(plan.robot) {
            return Err(ReservationError::AlreadyReserved(plan.robot));
        }
        // A plan's own visits are contiguous and never overlap, so each one
        // only has to fit against what is already in the table.
        for visit in &plan.visits {
            if visit.resource.index() >= self.slots.len() || !graph.contains(visit.resource) {
                return Err(ReservationError::UnknownResource(visit.resource));
            }
            let capacity = graph.get(visit.resource).capacity as usize;
            if let Some(tick) = self.first_full_tick(visit.resource, &visit.interval, capacity) {
                return Err(ReservationError::CapacityExceeded {
                    robot: plan.robot,
                    resource: visit.resource,
                    tick,
                });
            }
        }
        let touched = self.by_robot.entry(plan.robot).or_default();
        for visit in &plan.visits {
            let entry = Reservation {
                interval: visit.interval,
                robot: plan.robot,
            };
            let slot = &mut self.slots[visit.resource.index()];
            let at = slot.partition_point(|e| *e < entry);
            slot.insert(at, entry);
            touched.push(visit.resource);
        }
        Ok(())
    }

    /// Removes every reservation held by `robot`; unknown robots are a no-op.
    pub fn release(&mut self, robot: RobotId) {
        let Some(mut touched) = self.by_robot.remove(&robot) else {
            return;
        };
        touched.sort_unstable();
        touched.dedup();
        for r in touched {
            self.slots[r.index()].retain(|e| e.robot != robot);
        }
    }

    /// Earliest tick inside `interval` at which `resource` already holds
    /// `capacity` robots.
    fn first_full_tick(
        &self,
        resource: ResourceId,
        interval: &TimeInterval,
        capacity: usize,
    ) -> Option<Tick> {
        let entries = self.entries(resource);
        let overlapping: Vec<&Reservation> = entries
            .iter()
            .take_while(|e| e.interval.start < interval.end)
            .filter(|e| e.interval.overlaps(interval))
            .collect();
        if overlapping.len() < capacity {
            return None;
        }
        // Occupancy only rises at entry starts, so those are the candidates.
        let mut candidates: Vec<Tick> = std::iter::once(interval.start)
            .chain(
                overlapping
                    .iter()
                    .map(|e| e.interval.start)
                    .filter(|&s| s > interval.start),
            )
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        candidates.into_iter().find(|&t| {
            overlapping
                .iter()
                .filter(|e| e.interval.contains(t))
                .count()
                >= capacity
        })
    }

    /// Maximal intervals (from tick 0) during which `resource` is below
    /// capacity, without the duration filter.
    pub(crate) fn below_capacity(&self, resource: ResourceId, capacity: u32) -> Vec<TimeInterval> {
        let entries = self.entries(resource);
        if entries.len() < capacity as usize {
            return vec![TimeInterval::open(0)];
        }
        let mut events: Vec<(Tick, i64)> = Vec::with_capacity(entries.len() * 2);
        for e in entries {
            events.push((e.interval.start, 1));
            if !e.interval.is_open() {
                events.push((e.interval.end, -1));
            }
        }
        events.sort_unstable();

        let capacity = i64::from(capacity);
        let mut out = Vec::new();
        let mut count = 0i64;
        let mut free_since = Some(0);
        let mut i = 0;
        while i < events.len() {
            let tick = events[i].0;
            while i < events.len() && events[i].0 == tick {
                count += events[i].1;
                i += 1;
            }
            match free_since {
                Some(start) if count >= capacity => {
                    if start < tick {
                        out.push(TimeInterval::new(start, tick));
                    }
                    free_since = None;
                }
                None if count < capacity => free_since = Some(tick),
                _ => {}
            }
        }
        if let Some(start) = free_since {
            out.push(TimeInterval::open(start));
        }
        out
    }
}

/// Free windows of `resource` at or after `from`, in ascending order.
///
/// Gaps shorter than the resource's duration are dropped: no robot could
/// traverse the resource inside them.
pub fn free_time_windows(
    table: &ReservationTable,
    graph: &ResourceGraph,
    resource: ResourceId,
    from: Tick,
) -> Result<Vec<FreeTimeWindow>, ReservationError> {
    let res = graph
        .resource(resource)
        .filter(|_| resource.index() < table.resource_count())
        .ok_or(ReservationError::UnknownResource(resource))?;
    Ok(table
        .below_capacity(resource, res.capacity)
        .into_iter()
        .filter(|w| w.end > from)
        .map(|w| TimeInterval {
            start: w.start.max(from),
            end: w.end,
        })
        .filter(|w| w.len() >= res.duration)
        .map(|interval| FreeTimeWindow { resource, interval })
        .collect())
}
