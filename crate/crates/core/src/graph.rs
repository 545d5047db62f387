//! Resource graph: the infrastructure split into reservable units.
//!
//! Every grid node and every undirected edge of the input graph becomes a
//! [`Resource`] with a capacity and a traversal duration. A robot moves from a
//! node resource onto an incident edge resource and from there onto the other
//! endpoint, so the traversal structure is bipartite between the two kinds.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::Tick;

/// Index of a resource inside its [`ResourceGraph`].
///
/// Node resources always come first, so a node's id doubles as its node index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResourceId(pub u32);

impl ResourceId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ResourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Integer grid cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Position in grid units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<Cell> for Point {
    fn from(c: Cell) -> Self {
        Point {
            x: f64::from(c.x),
            y: f64::from(c.y),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResourceKind {
    Node { cell: Cell },
    Edge { ends: [ResourceId; 2] },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Resource {
    pub id: ResourceId,
    pub kind: ResourceKind,
    /// Maximum number of robots inside the resource at the same tick.
    pub capacity: u32,
    /// Minimum number of ticks a robot spends traversing the resource.
    pub duration: Tick,
    pub coords: Point,
}

impl Resource {
    pub fn is_node(&self) -> bool {
        matches!(self.kind, ResourceKind::Node { .. })
    }
}

/// Capacity and duration applied to resources that do not override them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResourceDefaults {
    pub capacity: u32,
    pub duration: Tick,
}

impl Default for ResourceDefaults {
    fn default() -> Self {
        Self {
            capacity: 1,
            duration: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeSpec {
    pub cell: Cell,
    pub capacity: Option<u32>,
    pub duration: Option<Tick>,
}

impl NodeSpec {
    pub fn new(cell: Cell) -> Self {
        Self {
            cell,
            capacity: None,
            duration: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeSpec {
    pub a: Cell,
    pub b: Cell,
    pub capacity: Option<u32>,
    pub duration: Option<Tick>,
}

impl EdgeSpec {
    pub fn new(a: Cell, b: Cell) -> Self {
        Self {
            a,
            b,
            capacity: None,
            duration: None,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("map has no nodes")]
    Empty,
    #[error("node {0} listed more than once")]
    DuplicateNode(Cell),
    #[error("edge {0} - {1} references a missing node")]
    UnknownEndpoint(Cell, Cell),
    #[error("edge at {0} connects a node to itself")]
    SelfLoop(Cell),
    #[error("edge {0} - {1} listed more than once")]
    DuplicateEdge(Cell, Cell),
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("resource at {at} has zero {attribute}")]
    ZeroAttribute { at: Cell, attribute: &'static str },
}

/// The resource graph together with the hop distances used by the router's
/// heuristic.
#[derive(Clone, Debug)]
pub struct ResourceGraph {
    resources: Vec<Resource>,
    adjacency: Vec<Vec<ResourceId>>,
    node_count: usize,
    cells: HashMap<Cell, ResourceId>,
    /// `hops_to_node[n][r]` is the number of transitions from `r` to node `n`.
    hops_to_node: Vec<Vec<u32>>,
    min_duration: Tick,
}

/// Convenience wrapper over [`ResourceGraph::build`] for maps where every
/// resource uses the same attributes.
pub fn build_resource_graph(
    nodes: &[Cell],
    edges: &[(Cell, Cell)],
    default_capacity: u32,
    default_duration: Tick,
) -> Result<ResourceGraph, GraphError> {
    let nodes: Vec<NodeSpec> = nodes.iter().copied().map(NodeSpec::new).collect();
    let edges: Vec<EdgeSpec> = edges.iter().map(|&(a, b)| EdgeSpec::new(a, b)).collect();
    ResourceGraph::build(
        &nodes,
        &edges,
        ResourceDefaults {
            capacity: default_capacity,
            duration: default_duration,
        },
    )
}

impl ResourceGraph {
    /// Nodes receive ids `0..nodes.len()` in input order, edges follow in
    /// input order.
    pub fn build(
        nodes: &[NodeSpec],
        edges: &[EdgeSpec],
        defaults: ResourceDefaults,
    ) -> Result<Self, GraphError> {
        if nodes.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut resources = Vec::with_capacity(nodes.len() + edges.len());
        let mut cells = HashMap::with_capacity(nodes.len());
        for (i, spec) in nodes.iter().enumerate() {
            let id = ResourceId(i as u32);
            if cells.insert(spec.cell, id).is_some() {
                return Err(GraphError::DuplicateNode(spec.cell));
            }
            let (capacity, duration) =
                attributes(spec.capacity, spec.duration, defaults, spec.cell)?;
            resources.push(Resource {
                id,
                kind: ResourceKind::Node { cell: spec.cell },
                capacity,
                duration,
                coords: spec.cell.into(),
            });
        }

        let node_count = nodes.len();
        let mut adjacency = vec![Vec::new(); node_count + edges.len()];
        let mut seen = HashSet::with_capacity(edges.len());
        for (i, spec) in edges.iter().enumerate() {
            let (Some(&a), Some(&b)) = (cells.get(&spec.a), cells.get(&spec.b)) else {
                return Err(GraphError::UnknownEndpoint(spec.a, spec.b));
            };
            if a == b {
                return Err(GraphError::SelfLoop(spec.a));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(GraphError::DuplicateEdge(spec.a, spec.b));
            }
            let id = ResourceId((node_count + i) as u32);
            let (capacity, duration) = attributes(spec.capacity, spec.duration, defaults, spec.a)?;
            let (pa, pb) = (Point::from(spec.a), Point::from(spec.b));
            resources.push(Resource {
                id,
                kind: ResourceKind::Edge { ends: [a, b] },
                capacity,
                duration,
                coords: Point {
                    x: (pa.x + pb.x) / 2.0,
                    y: (pa.y + pb.y) / 2.0,
                },
            });
            adjacency[id.index()].extend([a.min(b), a.max(b)]);
            adjacency[a.index()].push(id);
            adjacency[b.index()].push(id);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        let components = count_components(&adjacency);
        if components > 1 {
            return Err(GraphError::Disconnected { components });
        }

        let hops_to_node = (0..node_count)
            .map(|n| bfs_hops(&adjacency, ResourceId(n as u32)))
            .collect();
        let min_duration = resources.iter().map(|r| r.duration).min().unwrap_or(1);

        Ok(Self {
            resources,
            adjacency,
            node_count,
            cells,
            hops_to_node,
            min_duration,
        })
    }

    pub fn len(&self) -> usize {
        self.resources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resources.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.resources.len() - self.node_count
    }

    pub fn resources(&self) -> &[Resource] {
        &self.resources
    }

    pub fn resource(&self, id: ResourceId) -> Option<&Resource> {
        self.resources.get(id.index())
    }

    /// Panics on an id that does not belong to this graph.
    #[inline]
    pub fn get(&self, id: ResourceId) -> &Resource {
        &self.resources[id.index()]
    }

    pub fn contains(&self, id: ResourceId) -> bool {
        id.index() < self.resources.len()
    }

    pub fn is_node(&self, id: ResourceId) -> bool {
        id.index() < self.node_count
    }

    #[inline]
    pub fn neighbors(&self, id: ResourceId) -> &[ResourceId] {
        &self.adjacency[id.index()]
    }

    pub fn are_adjacent(&self, a: ResourceId, b: ResourceId) -> bool {
        self.contains(a) && self.neighbors(a).binary_search(&b).is_ok()
    }

    /// Number of unordered adjacent pairs.
    pub fn adjacency_pairs(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn node_at(&self, cell: Cell) -> Option<ResourceId> {
        self.cells.get(&cell).copied()
    }

    pub fn cell_of(&self, node: ResourceId) -> Option<Cell> {
        match self.resource(node)?.kind {
            ResourceKind::Node { cell } => Some(cell),
            ResourceKind::Edge { .. } => None,
        }
    }

    /// Edge resource joining two node resources, if any.
    pub fn edge_between(&self, a: ResourceId, b: ResourceId) -> Option<ResourceId> {
        if !self.is_node(a) || !self.is_node(b) {
            return None;
        }
        self.neighbors(a)
            .iter()
            .copied()
            .find(|&e| self.neighbors(e).contains(&b))
    }

    pub fn min_duration(&self) -> Tick {
        self.min_duration
    }

    /// Transitions needed to get from `from` to the node resource `goal`.
    #[inline]
    pub fn hops(&self, from: ResourceId, goal: ResourceId) -> u32 {
        self.hops_to_node[goal.index()][from.index()]
    }
}

fn attributes(
    capacity: Option<u32>,
    duration: Option<Tick>,
    defaults: ResourceDefaults,
    at: Cell,
) -> Result<(u32, Tick), GraphError> {
    let capacity = capacity.unwrap_or(defaults.capacity);
    let duration = duration.unwrap_or(defaults.duration);
    if capacity == 0 {
        return Err(GraphError::ZeroAttribute {
            at,
            attribute: "capacity",
        });
    }
    if duration == 0 {
        return Err(GraphError::ZeroAttribute {
            at,
            attribute: "duration",
        });
    }
    Ok((capacity, duration))
}

fn bfs_hops(adjacency: &[Vec<ResourceId>], source: ResourceId) -> Vec<u32> {
    let mut dist = vec![u32::MAX; adjacency.len()];
    let mut queue = VecDeque::new();
    dist[source.index()] = 0;
    queue.push_back(source);
    while let Some(r) = queue.pop_front() {
        let d = dist[r.index()] + 1;
        for &n in &adjacency[r.index()] {
            if dist[n.index()] == u32::MAX {
                dist[n.index()] = d;
                queue.push_back(n);
            }
        }
    }
    dist
}

fn count_components(adjacency: &[Vec<ResourceId>]) -> usize {
    let mut seen = vec![false; adjacency.len()];
    let mut components = 0;
    for start in 0..adjacency.len() {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(r) = stack.pop() {
            for n in &adjacency[r] {
                if !seen[n.index()] {
                    seen[n.index()] = true;
                    stack.push(n.index());
                }
            }
        }
    }
    components
}

/// Cells and edges of a full `width` x `height` grid in row-major order.
pub fn grid_cells(width: i32, height: i32) -> Vec<Cell> {
    (0..height)
        .flat_map(|y| (0..width).map(move |x| Cell::new(x, y)))
        .collect()
}

/// Every 4-connected edge of the grid, each once, lower cell first.
pub fn grid_edges(width: i32, height: i32) -> Vec<(Cell, Cell)> {
    let mut edges = Vec::with_capacity((2 * width * height - width - height).max(0) as usize);
    for y in 0..height {
        for x in 0..width {
            if x + 1 < width {
                edges.push((Cell::new(x, y), Cell::new(x + 1, y)));
            }
            if y + 1 < height {
                edges.push((Cell::new(x, y), Cell::new(x, y + 1)));
            }
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> ResourceGraph {
        build_resource_graph(
            &[Cell::new(0, 0), Cell::new(1, 0), Cell::new(2, 0)],
            &[
                (Cell::new(0, 0), Cell::new(1, 0)),
                (Cell::new(1, 0), Cell::new(2, 0)),
            ],
            1,
            1,
        )
        .unwrap()
    }

    #[test]
    fn full_grid_counts() {
        let g = build_resource_graph(&grid_cells(20, 20), &grid_edges(20, 20), 1, 1).unwrap();
        assert_eq!(g.node_count(), 400);
        assert_eq!(g.edge_count(), 760);
        assert_eq!(g.adjacency_pairs(), 1520);
    }

    #[test]
    fn path_graph_structure() {
        let g = line();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        let a = g.node_at(Cell::new(0, 0)).unwrap();
        let ab = g
            .edge_between(a, g.node_at(Cell::new(1, 0)).unwrap())
            .unwrap();
        assert_eq!(g.neighbors(a), &[ab]);
        assert_eq!(g.get(ab).coords, Point { x: 0.5, y: 0.0 });
    }

    #[test]
    fn adjacency_is_symmetric_and_bipartite() {
        let g = build_resource_graph(&grid_cells(4, 3), &grid_edges(4, 3), 1, 1).unwrap();
        for r in g.resources() {
            for &n in g.neighbors(r.id) {
                assert!(g.neighbors(n).contains(&r.id));
                assert_ne!(g.is_node(n), r.is_node());
            }
        }
    }

    #[test]
    fn duplicate_edge_rejected() {
        let cells = [Cell::new(0, 0), Cell::new(1, 0), Cell::new(0, 1)];
        let edges = [
            (cells[0], cells[1]),
            (cells[1], cells[2]),
            (cells[2], cells[0]),
            (cells[1], cells[0]),
        ];
        assert_eq!(
            build_resource_graph(&cells, &edges, 1, 1).unwrap_err(),
            GraphError::DuplicateEdge(cells[1], cells[0])
        );
    }

    #[test]
    fn disconnected_rejected() {
        let cells = [Cell::new(0, 0), Cell::new(1, 0), Cell::new(5, 5)];
        let err = build_resource_graph(&cells, &[(cells[0], cells[1])], 1, 1).unwrap_err();
        assert_eq!(err, GraphError::Disconnected { components: 2 });
    }

    #[test]
    fn bad_endpoints_and_attributes() {
        let cells = [Cell::new(0, 0), Cell::new(1, 0)];
        assert!(matches!(
            build_resource_graph(&cells, &[(cells[0], Cell::new(9, 9))], 1, 1),
            Err(GraphError::UnknownEndpoint(..))
        ));
        assert!(matches!(
            build_resource_graph(&cells, &[(cells[0], cells[0])], 1, 1),
            Err(GraphError::SelfLoop(_))
        ));
        assert!(matches!(
            build_resource_graph(&cells, &[(cells[0], cells[1])], 0, 1),
            Err(GraphError::ZeroAttribute { .. })
        ));
        assert_eq!(
            build_resource_graph(&[], &[], 1, 1).unwrap_err(),
            GraphError::Empty
        );
    }

    #[test]
    fn hop_distances() {
        let g = line();
        let c = g.node_at(Cell::new(2, 0)).unwrap();
        let a = g.node_at(Cell::new(0, 0)).unwrap();
        assert_eq!(g.hops(a, c), 4);
        assert_eq!(g.hops(c, c), 0);
    }
}
