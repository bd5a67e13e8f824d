//! 2D meshes: data model, structured generation, explicit notches and a
//! plain-text file format.

mod generate;
mod io;
mod notch;

use std::collections::{BTreeMap, BTreeSet, HashMap};

pub use generate::{generate_rect_mesh, CircularHole, RectMeshBuilder, RefinementBand};
pub use io::{load_mesh, parse_mesh, save_mesh, write_mesh};
pub use notch::cut_notch;

use crate::error::{Error, Result};
use crate::fem::shape::{self, ElementKind};

/// Element connectivity, counter-clockwise.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Cell {
    Quad4([usize; 4]),
    Tri3([usize; 3]),
}

impl Cell {
    pub fn nodes(&self) -> &[usize] {
        match self {
            Cell::Quad4(n) => n,
            Cell::Tri3(n) => n,
        }
    }

    pub fn nodes_mut(&mut self) -> &mut [usize] {
        match self {
            Cell::Quad4(n) => n,
            Cell::Tri3(n) => n,
        }
    }

    pub fn kind(&self) -> ElementKind {
        match self {
            Cell::Quad4(_) => ElementKind::Quad4,
            Cell::Tri3(_) => ElementKind::Tri3,
        }
    }

    /// Edges in local order, each as `(a, b)` along the element boundary.
    pub fn edges(&self) -> impl Iterator<Item = [usize; 2]> + '_ {
        let n = self.nodes();
        (0..n.len()).map(move |i| [n[i], n[(i + 1) % n.len()]])
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    pub cells: Vec<Cell>,
    pub node_sets: BTreeMap<String, Vec<usize>>,
    pub edge_sets: BTreeMap<String, Vec<[usize; 2]>>,
    pub cell_sets: BTreeMap<String, Vec<usize>>,
}

fn edge_key(e: [usize; 2]) -> (usize, usize) {
    (e[0].min(e[1]), e[0].max(e[1]))
}

impl Mesh {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_coords(&self, c: usize) -> Vec<[f64; 2]> {
        self.cells[c].nodes().iter().map(|&n| self.nodes[n]).collect()
    }

    pub fn centroid(&self, c: usize) -> [f64; 2] {
        let pts = self.cell_coords(c);
        let k = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p[0], b + p[1]));
        [sx / k, sy / k]
    }

    /// Looks up a named node set.
    pub fn node_set(&self, name: &str) -> Result<&[usize]> {
        self.node_sets
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Setup(format!("mesh has no node set `{name}`")))
    }

    pub fn edge_set(&self, name: &str) -> Result<&[[usize; 2]]> {
        self.edge_sets
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Setup(format!("mesh has no edge set `{name}`")))
    }

    /// Number of cells sharing each undirected edge.
    pub fn edge_use_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut counts = HashMap::new();
        for cell in &self.cells {
            for e in cell.edges() {
                *counts.entry(edge_key(e)).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Edges used by exactly one cell, oriented as in that cell.
    pub fn boundary_edges(&self) -> Vec<[usize; 2]> {
        let counts = self.edge_use_counts();
        let mut out: Vec<[usize; 2]> = self
            .cells
            .iter()
            .flat_map(|c| c.edges().collect::<Vec<_>>())
            .filter(|e| counts[&edge_key(*e)] == 1)
            .collect();
        out.sort_unstable();
        out
    }

    pub fn boundary_nodes(&self) -> BTreeSet<usize> {
        self.boundary_edges().into_iter().flatten().collect()
    }

    pub fn is_cell_edge(&self, e: [usize; 2]) -> bool {
        let key = edge_key(e);
        self.cells.iter().any(|c| c.edges().any(|x| edge_key(x) == key))
    }

    /// `V − E + F` over nodes referenced by cells.
    pub fn euler_characteristic(&self) -> i64 {
        let used: BTreeSet<usize> = self.cells.iter().flat_map(|c| c.nodes().to_vec()).collect();
        let edges = self.edge_use_counts().len();
        used.len() as i64 - edges as i64 + self.cells.len() as i64
    }

    /// Longest edge of a cell.
    pub fn max_edge(&self, c: usize) -> f64 {
        self.cells[c]
            .edges()
            .map(|[a, b]| dist(self.nodes[a], self.nodes[b]))
            .fold(0.0, f64::max)
    }

    /// Smallest Jacobian determinant over all quadrature points.
    pub fn min_jacobian(&self) -> f64 {
        (0..self.cells.len())
            .map(|c| match shape::evaluate::<f64>(self.cells[c].kind(), &self.cell_coords(c)) {
                Ok(sh) => sh.iter().map(|g| g.det_j).fold(f64::INFINITY, f64::min),
                Err(det) => det,
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks index ranges, duplicate connectivity, Jacobian positivity and
    /// set references.
    pub fn validate(&self) -> Result<()> {
        let nn = self.nodes.len();
        if let Some(i) = self.nodes.iter().position(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::Mesh(format!("node {i} has non-finite coordinates")));
        }
        let mut seen = HashMap::new();
        for (c, cell) in self.cells.iter().enumerate() {
            if let Some(&bad) = cell.nodes().iter().find(|&&n| n >= nn) {
                return Err(Error::Mesh(format!("element {c} references missing node {bad}")));
            }
            let mut key = cell.nodes().to_vec();
            key.sort_unstable();
            if key.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Mesh(format!("element {c} repeats a node")));
            }
            if let Some(prev) = seen.insert(key, c) {
                return Err(Error::Mesh(format!("element {c} duplicates the connectivity of element {prev}")));
            }
            if let Err(det) = shape::evaluate::<f64>(cell.kind(), &self.cell_coords(c)) {
                return Err(Error::Mesh(format!("element {c} has non-positive Jacobian {det:.3e}")));
            }
        }
        for (name, ids) in &self.node_sets {
            if let Some(&bad) = ids.iter().find(|&&n| n >= nn) {
                return Err(Error::Mesh(format!("node set `{name}` references missing node {bad}")));
            }
        }
        for (name, edges) in &self.edge_sets {
            if let Some(e) = edges.iter().find(|e| e[0] >= nn || e[1] >= nn) {
                return Err(Error::Mesh(format!("edge set `{name}` references missing node in {:?}", e)));
            }
        }
        for (name, ids) in &self.cell_sets {
            if let Some(&bad) = ids.iter().find(|&&c| c >= self.cells.len()) {
                return Err(Error::Mesh(format!("element set `{name}` references missing element {bad}")));
            }
        }
        Ok(())
    }

    /// Adds a node set of all nodes satisfying `pred`.
    pub fn add_node_set_where(&mut self, name: &str, pred: impl Fn([f64; 2]) -> bool) {
        let ids = (0..self.nodes.len()).filter(|&i| pred(self.nodes[i])).collect();
        self.node_sets.insert(name.to_string(), ids);
    }

    /// Adds an edge set of boundary edges whose two end nodes satisfy `pred`,
    /// plus the matching node set.
    pub fn add_boundary_set_where(&mut self, name: &str, pred: impl Fn([f64; 2]) -> bool) {
        let edges: Vec<[usize; 2]> = self
            .boundary_edges()
            .into_iter()
            .filter(|e| pred(self.nodes[e[0]]) && pred(self.nodes[e[1]]))
            .collect();
        let nodes: BTreeSet<usize> = edges.iter().flatten().copied().collect();
        self.edge_sets.insert(name.to_string(), edges);
        self.node_sets.insert(name.to_string(), nodes.into_iter().collect());
    }

    /// Node closest to `p`.
    pub fn nearest_node(&self, p: [f64; 2]) -> usize {
        (0..self.nodes.len())
            .min_by(|&a, &b| dist(self.nodes[a], p).total_cmp(&dist(self.nodes[b], p)))
            .unwrap_or(0)
    }

    /// Removes nodes not referenced by any cell and renumbers in order.
    pub(crate) fn compact(&mut self) {
        let mut used = vec![false; self.nodes.len()];
        for c in &self.cells {
            for &n in c.nodes() {
                used[n] = true;
            }
        }
        let mut map = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, p) in self.nodes.iter().enumerate() {
            if used[i] {
                map[i] = nodes.len();
                nodes.push(*p);
            }
        }
        self.nodes = nodes;
        for c in &mut self.cells {
            for n in c.nodes_mut() {
                *n = map[*n];
            }
        }
        for ids in self.node_sets.values_mut() {
            *ids = ids.iter().filter(|&&n| used[n]).map(|&n| map[n]).collect();
        }
        for edges in self.edge_sets.values_mut() {
            *edges = edges
                .iter()
                .filter(|e| used[e[0]] && used[e[1]])
                .map(|e| [map[e[0]], map[e[1]]])
                .collect();
        }
    }
}

pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Checks that an edge set forms one closed loop; returns its nodes in loop order.
pub fn closed_loop(edges: &[[usize; 2]]) -> Result<Vec<usize>> {
    if edges.len() < 3 {
        return Err(Error::Setup(format!("edge loop needs at least 3 edges, got {}", edges.len())));
    }
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for e in edges {
        adj.entry(e[0]).or_default().push(e[1]);
        adj.entry(e[1]).or_default().push(e[0]);
    }
    if let Some((n, nb)) = adj.iter().find(|(_, nb)| nb.len() != 2) {
        return Err(Error::Setup(format!(
            "edge loop is not closed: node {n} has {} neighbours",
            nb.len()
        )));
    }
    let start = *adj.keys().next().expect("non-empty");
    let mut order = vec![start];
    let mut prev = start;
    let mut cur = adj[&start][0];
    while cur != start {
        order.push(cur);
        let nb = &adj[&cur];
        let next = if nb[0] == prev { nb[1] } else { nb[0] };
        prev = cur;
        cur = next;
        if order.len() > adj.len() {
            break;
        }
    }
    if order.len() != adj.len() {
        return Err(Error::Setup("edge set splits into several loops".into()));
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_quads() -> Mesh {
        Mesh {
            nodes: vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 1.0]],
            cells: vec![Cell::Quad4([0, 1, 4, 3]), Cell::Quad4([1, 2, 5, 4])],
            ..Default::default()
        }
    }

    #[test]
    fn boundary_and_euler() {
        let m = two_quads();
        assert_eq!(m.boundary_edges().len(), 6);
        assert_eq!(m.euler_characteristic(), 1);
        m.validate().unwrap();
    }

    #[test]
    fn duplicate_connectivity_rejected() {
        let mut m = two_quads();
        m.cells.push(Cell::Quad4([1, 4, 3, 0]));
        assert!(m.validate().is_err());
    }

    #[test]
    fn loop_detection() {
        let m = two_quads();
        let order = closed_loop(&m.boundary_edges()).unwrap();
        assert_eq!(order.len(), 6);
        assert!(closed_loop(&[[0, 1], [1, 2], [2, 3]]).is_err());
    }
}
