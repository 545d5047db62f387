//! Benchmark inputs: a family of increasingly dense maps grown from a random
//! spanning tree of a grid, and random fleet assignments on its nodes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{grid_cells, grid_edges, Cell, GraphError, ResourceDefaults, ResourceGraph};
use crate::mapfile::{MapSpec, ParseError};
use crate::planner::{Assignment, PlanError, Task};
use crate::RobotId;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("grid must be at least 2x2, got {width}x{height}")]
    GridTooSmall { width: i32, height: i32 },
    #[error("a family needs at least 2 maps, got {0}")]
    TooFewMaps(usize),
    #[error("{count} maps requested but only {max} distinct densities exist")]
    TooManyMaps { count: usize, max: usize },
    #[error("{robots} robots do not fit on {nodes} nodes")]
    TooManyRobots { robots: usize, nodes: usize },
    #[error("suite file {file}: {message}")]
    Malformed { file: String, message: String },
    #[error("{file}: {source}")]
    MapFile { file: String, source: ParseError },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Maps over one grid, sparsest first. Each map's edges are a superset of
/// the previous map's; the last map is the full grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapFamily {
    pub width: i32,
    pub height: i32,
    pub seed: u64,
    /// Edge lists in canonical grid order.
    pub maps: Vec<Vec<(Cell, Cell)>>,
}

impl MapFamily {
    pub fn nodes(&self) -> Vec<Cell> {
        grid_cells(self.width, self.height)
    }

    pub fn map_spec(&self, index: usize) -> MapSpec {
        MapSpec::from_grid_parts(&self.nodes(), &self.maps[index])
    }

    pub fn graph(
        &self,
        index: usize,
        defaults: ResourceDefaults,
    ) -> Result<ResourceGraph, GraphError> {
        self.map_spec(index).build(defaults)
    }
}

/// Map 0 is the minimum spanning tree under i.i.d. uniform edge weights,
/// i.e. a uniformly shuffled Kruskal. The remaining grid edges are shuffled
/// once and added in `count - 1` near-equal slices.
pub fn generate_map_family(
    width: i32,
    height: i32,
    count: usize,
    seed: u64,
) -> Result<MapFamily, ScenarioError> {
    if width < 2 || height < 2 {
        return Err(ScenarioError::GridTooSmall { width, height });
    }
    if count < 2 {
        return Err(ScenarioError::TooFewMaps(count));
    }
    let all = grid_edges(width, height);
    let node_count = (width * height) as usize;
    let extra_count = all.len() - (node_count - 1);
    if count - 1 > extra_count {
        return Err(ScenarioError::TooManyMaps {
            count,
            max: extra_count + 1,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let index_of = |c: Cell| (c.y * width + c.x) as usize;
    let mut weights_order: Vec<usize> = (0..all.len()).collect();
    weights_order.shuffle(&mut rng);

    let mut components = DisjointSets::new(node_count);
    let mut in_tree = vec![false; all.len()];
    let mut extras = Vec::with_capacity(extra_count);
    for e in weights_order {
        let (a, b) = all[e];
        if components.union(index_of(a), index_of(b)) {
            in_tree[e] = true;
        } else {
            extras.push(e);
        }
    }
    extras.sort_unstable();
    extras.shuffle(&mut rng);

    let steps = count - 1;
    let maps = (0..count)
        .map(|i| {
            let mut present = in_tree.clone();
            for &e in &extras[..i * extra_count / steps] {
                present[e] = true;
            }
            all.iter()
                .zip(&present)
                .filter(|(_, &p)| p)
                .map(|(&e, _)| e)
                .collect()
        })
        .collect();
    Ok(MapFamily {
        width,
        height,
        seed,
        maps,
    })
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when both were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Start and goal cells per robot; robot `i` is entry `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FleetAssignment {
    pub tasks: Vec<(Cell, Cell)>,
}

impl FleetAssignment {
    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    /// Resolves cells against `graph`, optionally keeping only the first
    /// `robots` entries.
    pub fn to_assignment(
        &self,
        graph: &ResourceGraph,
        robots: Option<usize>,
    ) -> Result<Assignment, ScenarioError> {
        let take = robots.unwrap_or(self.tasks.len()).min(self.tasks.len());
        let missing = |c: Cell| ScenarioError::Malformed {
            file: "assignments.csv".into(),
            message: format!("cell {c} is not on the map"),
        };
        let tasks = self.tasks[..take]
            .iter()
            .enumerate()
            .map(|(i, &(s, g))| {
                let start = graph.node_at(s).ok_or_else(|| missing(s))?;
                let goal = graph.node_at(g).ok_or_else(|| missing(g))?;
                Ok((RobotId(i as u32), Task { start, goal }))
            })
            .collect::<Result<Vec<_>, ScenarioError>>()?;
        Ok(Assignment::new(tasks)?)
    }
}

/// Starts and goals are each drawn without replacement, independently of
/// one another, so a robot may start on its own goal.
pub fn generate_assignments(
    nodes: &[Cell],
    robots: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<FleetAssignment>, ScenarioError> {
    if robots > nodes.len() {
        return Err(ScenarioError::TooManyRobots {
            robots,
            nodes: nodes.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let starts = index::sample(&mut rng, nodes.len(), robots);
            let goals = index::sample(&mut rng, nodes.len(), robots);
            FleetAssignment {
                tasks: starts
                    .iter()
                    .zip(goals.iter())
                    .map(|(s, g)| (nodes[s], nodes[g]))
                    .collect(),
            }
        })
        .collect())
}

/// Maps plus fleet assignments, as stored on disk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioSuite {
    pub family: MapFamily,
    pub assignments: Vec<FleetAssignment>,
    pub robots: usize,
    pub seed: u64,
}

/// Seed for the assignment stream, derived from the suite seed.
pub fn assignment_seed(seed: u64) -> u64 {
    seed.wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407)
}

pub fn generate_suite(
    width: i32,
    height: i32,
    maps: usize,
    assignments: usize,
    robots: usize,
    seed: u64,
) -> Result<ScenarioSuite, ScenarioError> {
    let family = generate_map_family(width, height, maps, seed)?;
    let assignments =
        generate_assignments(&family.nodes(), robots, assignments, assignment_seed(seed))?;
    Ok(ScenarioSuite {
        family,
        assignments,
        robots,
        seed,
    })
}

fn map_file_name(index: usize, count: usize) -> String {
    let width = count.saturating_sub(1).to_string().len().max(2);
    format!("map_{index:0width$}.txt")
}

impl ScenarioSuite {
    /// Writes `map_NN.txt`, `assignments.csv` and `meta.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), ScenarioError> {
        fs::create_dir_all(dir)?;
        let count = self.family.maps.len();
        for i in 0..count {
            let mut text = format!(
                "# map {i} of {count}: {}x{} grid, {} edges\n",
                self.family.width,
                self.family.height,
                self.family.maps[i].len()
            );
            text.push_str(&self.family.map_spec(i).to_text());
            fs::write(dir.join(map_file_name(i, count)), text)?;
        }

        let mut w = csv::Writer::from_path(dir.join("assignments.csv"))?;
        w.write_record(["assignment", "robot", "sx", "sy", "gx", "gy"])?;
        for (a, fleet) in self.assignments.iter().enumerate() {
            for (r, (s, g)) in fleet.tasks.iter().enumerate() {
                w.serialize((a, r, s.x, s.y, g.x, g.y))?;
            }
        }
        w.flush()?;

        let mut meta = String::new();
        let _ = writeln!(meta, "grid={}x{}", self.family.width, self.family.height);
        let _ = writeln!(meta, "maps={count}");
        let _ = writeln!(meta, "assignments={}", self.assignments.len());
        let _ = writeln!(meta, "robots={}", self.robots);
        let _ = writeln!(meta, "seed={}", self.seed);
        let _ = writeln!(meta, "map_seed={}", self.family.seed);
        let _ = writeln!(meta, "assignment_seed={}", assignment_seed(self.seed));
        fs::write(dir.join("meta.txt"), meta)?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self, ScenarioError> {
        let malformed = |file: &str, message: String| ScenarioError::Malformed {
            file: file.into(),
            message,
        };
        let meta_text = fs::read_to_string(dir.join("meta.txt"))?;
        let meta = |key: &str| -> Result<&str, ScenarioError> {
            meta_text
                .lines()
                .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
                .map(str::trim)
                .ok_or_else(|| malformed("meta.txt", format!("missing `{key}`")))
        };
        let number = |key: &str| -> Result<u64, ScenarioError> {
            meta(key)?
                .parse()
                .map_err(|_| malformed("meta.txt", format!("`{key}` is not a number")))
        };
        let (width, height) = meta("grid")?
            .split_once('x')
            .and_then(|(w, h)| Some((w.parse().ok()?, h.parse().ok()?)))
            .ok_or_else(|| malformed("meta.txt", "bad `grid`".into()))?;
        let count = number("maps")? as usize;
        let robots = number("robots")? as usize;
        let seed = number("seed")?;
        let map_seed = number("map_seed")?;

        let mut maps = Vec::with_capacity(count);
        for i in 0..count {
            let name = map_file_name(i, count);
            let spec = MapSpec::parse(&fs::read_to_string(dir.join(&name))?)
                .map_err(|source| ScenarioError::MapFile { file: name, source })?;
            maps.push(spec.edges.iter().map(|e| (e.a, e.b)).collect());
        }

        let mut assignments: Vec<FleetAssignment> = Vec::new();
        let mut reader = csv::Reader::from_path(dir.join("assignments.csv"))?;
        for row in reader.deserialize() {
            let (a, r, sx, sy, gx, gy): (usize, usize, i32, i32, i32, i32) = row?;
            if a > assignments.len() || (a == assignments.len()) != (r == 0) {
                return Err(malformed(
                    "assignments.csv",
                    format!("rows out of order at assignment {a}"),
                ));
            }
            if a == assignments.len() {
                assignments.push(FleetAssignment { tasks: Vec::new() });
            }
            let fleet = &mut assignments[a];
            if r != fleet.tasks.len() {
                return Err(malformed(
                    "assignments.csv",
                    format!("robot {r} out of order in assignment {a}"),
                ));
            }
            fleet.tasks.push((Cell::new(sx, sy), Cell::new(gx, gy)));
        }

        Ok(Self {
            family: MapFamily {
                width,
                height,
                seed: map_seed,
                maps,
            },
            assignments,
            robots,
            seed,
        })
    }
}
