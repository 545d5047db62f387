//! Multi-robot route planning on resource graphs.
//!
//! The infrastructure is a [`ResourceGraph`] of nodes and edges, each with a
//! capacity and a traversal duration. Robots reserve time intervals on the
//! resources they pass through ([`ReservationTable`]); a new robot is routed
//! through the free time windows that remain ([`plan_route`]).
//!
//! On top of the single-robot router sit the prioritized planner ([`Carp`])
//! and the neighborhood replanner ([`plan_update`]) that inserts robots into a
//! running fleet one at a time.

pub mod graph;
pub mod mapfile;
pub mod neighborhood;
pub mod plan_csv;
pub mod planner;
pub mod reservation;
pub mod router;
pub mod scenario;

use std::fmt;

/// Discrete time step.
pub type Tick = u64;

/// End tick of an open-ended interval.
pub const INFINITY: Tick = Tick::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RobotId(pub u32);

impl fmt::Display for RobotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub use graph::{
    build_resource_graph, Cell, Point, Resource, ResourceGraph, ResourceId, ResourceKind,
};
pub use mapfile::MapSpec;
pub use neighborhood::{
    nearest_to_neighborhood, permutations_with_prefix_reuse, plan_update, trajectory_distance,
    PermutationBudget, PrefixReuse, UpdateError, UpdateOutcome, UpdateParams,
};
pub use planner::{longest_first_order, Assignment, Carp, PlanError, PlanSet, Task};
pub use reservation::{
    free_time_windows, FreeTimeWindow, ReservationError, ReservationTable, TimeInterval,
};
pub use router::{plan_route, shortest_path, RouteError, RoutePlan, Visit};
pub use scenario::{
    generate_assignments, generate_map_family, generate_suite, FleetAssignment, MapFamily,
    ScenarioSuite,
};
