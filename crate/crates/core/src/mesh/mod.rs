//! Conforming triangulations of the unit square with newest-vertex bisection.
//!
//! Every mesh is a leaf view of a refinement forest rooted at a macro mesh.
//! The forest (vertex pool, edge midpoints, all cells ever created) travels
//! with each mesh, so re-refining a coarsened region reuses the same vertex
//! and cell ids. Meshes are immutable: [`Mesh::refine`] and [`Mesh::coarsen`]
//! return new meshes.
//!
//! Cells store their vertices newest-first, `[newest, a, b]`, and the
//! refinement edge is always `(a, b)`.

mod geometry;

pub use geometry::{EdgeGeometry, Geometry, TriangleGeometry};

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

static NEXT_MESH_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone)]
struct Cell {
    verts: [u32; 3],
    parent: u32,
    children: [u32; 2],
    depth: u16,
}

impl Cell {
    fn has_children(&self) -> bool {
        self.children[0] != NONE
    }
}

#[derive(Debug, Clone, Default)]
struct Forest {
    points: Vec<[f64; 2]>,
    /// endpoints of the edge a vertex bisects; `None` for macro vertices
    vert_parent: Vec<Option<[u32; 2]>>,
    midpoints: HashMap<(u32, u32), u32>,
    cells: Vec<Cell>,
}

#[inline]
fn edge_key(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Forest {
    fn midpoint(&mut self, a: u32, b: u32) -> u32 {
        if let Some(&m) = self.midpoints.get(&edge_key(a, b)) {
            return m;
        }
        let pa = self.points[a as usize];
        let pb = self.points[b as usize];
        let m = self.points.len() as u32;
        self.points.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
        self.vert_parent.push(Some([a, b]));
        self.midpoints.insert(edge_key(a, b), m);
        m
    }

    /// Splits `cell` across its refinement edge, reusing old children if present.
    fn bisect(&mut self, cell: u32, leaf: &mut Vec<bool>) {
        let c = self.cells[cell as usize].clone();
        if !c.has_children() {
            let [v0, v1, v2] = c.verts;
            let m = self.midpoint(v1, v2);
            let first = self.cells.len() as u32;
            for verts in [[m, v0, v1], [m, v2, v0]] {
                self.cells.push(Cell {
                    verts,
                    parent: cell,
                    children: [NONE, NONE],
                    depth: c.depth + 1,
                });
            }
            self.cells[cell as usize].children = [first, first + 1];
        }
        leaf.resize(self.cells.len(), false);
        let ch = self.cells[cell as usize].children;
        leaf[cell as usize] = false;
        leaf[ch[0] as usize] = true;
        leaf[ch[1] as usize] = true;
    }
}

/// An edge of the leaf mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    /// Node indices, ascending.
    pub vertices: [usize; 2],
    /// Adjacent triangles; `triangles[0] < triangles[1]` for interior edges.
    pub triangles: [usize; 2],
    pub interior: bool,
}

/// A conforming leaf triangulation together with its refinement history.
#[derive(Debug, Clone)]
pub struct Mesh {
    forest: Arc<Forest>,
    macro_n: usize,
    generation: u64,
    id: u64,
    /// forest cell id of each leaf triangle
    leaf_cells: Vec<u32>,
    /// forest vertex id of each node
    node_pool: Vec<u32>,
    /// inverse of `node_pool`
    pool_node: Vec<u32>,
    coords: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    /// edge opposite local vertex i
    triangle_edges: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    geometry: OnceLock<Geometry>,
    pattern: OnceLock<crate::fem::Pattern>,
}

impl Mesh {
    /// The unit square split into `n × n` squares, each cut into four
    /// triangles through its center. The square sides are the refinement edges.
    pub fn macro_mesh(n: usize) -> Result<Mesh> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "macro mesh needs at least one square per side".into(),
            ));
        }
        let h = 1.0 / n as f64;
        let mut forest = Forest::default();
        for j in 0..=n {
            for i in 0..=n {
                forest.points.push([i as f64 * h, j as f64 * h]);
                forest.vert_parent.push(None);
            }
        }
        let grid = |i: usize, j: usize| (j * (n + 1) + i) as u32;
        let center0 = forest.points.len();
        for j in 0..n {
            for i in 0..n {
                forest.points.push([(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]);
                forest.vert_parent.push(None);
            }
        }
        for j in 0..n {
            for i in 0..n {
                let m = (center0 + j * n + i) as u32;
                let (a, b, c, d) = (grid(i, j), grid(i + 1, j), grid(i + 1, j + 1), grid(i, j + 1));
                for (p, q) in [(a, b), (b, c), (c, d), (d, a)] {
                    forest.cells.push(Cell {
                        verts: [m, p, q],
                        parent: NONE,
                        children: [NONE, NONE],
                        depth: 0,
                    });
                }
            }
        }
        let leaf = vec![true; forest.cells.len()];
        Ok(Mesh::from_forest(Arc::new(forest), &leaf, n, 0))
    }

    /// A macro mesh from explicit triangles. Each triangle is reordered so
    /// that its longest edge is the refinement edge and it is oriented
    /// counter-clockwise.
    pub fn from_triangles(points: &[[f64; 2]], triangles: &[[usize; 3]]) -> Result<Mesh> {
        let mut forest = Forest {
            points: points.to_vec(),
            vert_parent: vec![None; points.len()],
            ..Forest::default()
        };
        for tri in triangles {
            if tri.iter().any(|&v| v >= points.len()) {
                return Err(Error::InvalidArgument(format!("triangle {tri:?} references a missing point")));
            }
            let p = tri.map(|v| points[v]);
            let len2 = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
            // vertex opposite the longest edge goes first
            let k = (0..3)
                .max_by(|&i, &j| {
                    let li = len2(p[(i + 1) % 3], p[(i + 2) % 3]);
                    let lj = len2(p[(j + 1) % 3], p[(j + 2) % 3]);
                    li.total_cmp(&lj)
                })
                .unwrap();
            let mut verts = [tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]];
            let q = verts.map(|v| points[v]);
            let det = (q[1][0] - q[0][0]) * (q[2][1] - q[0][1]) - (q[2][0] - q[0][0]) * (q[1][1] - q[0][1]);
            if det == 0.0 {
                return Err(Error::InvalidArgument(format!("triangle {tri:?} is degenerate")));
            }
            if det < 0.0 {
                verts.swap(1, 2);
            }
            forest.cells.push(Cell {
                verts: verts.map(|v| v as u32),
                parent: NONE,
                children: [NONE, NONE],
                depth: 0,
            });
        }
        let leaf = vec![true; forest.cells.len()];
        Ok(Mesh::from_forest(Arc::new(forest), &leaf, 0, 0))
    }

    fn from_forest(forest: Arc<Forest>, leaf: &[bool], macro_n: usize, generation: u64) -> Mesh {
        let leaf_cells: Vec<u32> = (0..forest.cells.len() as u32)
            .filter(|&c| leaf[c as usize])
            .collect();
        let mut used = vec![false; forest.points.len()];
        for &c in &leaf_cells {
            for &v in &forest.cells[c as usize].verts {
                used[v as usize] = true;
            }
        }
        let mut pool_node = vec![NONE; forest.points.len()];
        let mut node_pool = Vec::new();
        for (p, &u) in used.iter().enumerate() {
            if u {
                pool_node[p] = node_pool.len() as u32;
                node_pool.push(p as u32);
            }
        }
        let coords: Vec<[f64; 2]> = node_pool.iter().map(|&p| forest.points[p as usize]).collect();
        let triangles: Vec<[usize; 3]> = leaf_cells
            .iter()
            .map(|&c| forest.cells[c as usize].verts.map(|v| pool_node[v as usize] as usize))
            .collect();

        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::with_capacity(triangles.len() * 2);
        let mut edges: Vec<Edge> = Vec::with_capacity(triangles.len() * 2);
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut te = [0usize; 3];
            for (k, slot) in te.iter_mut().enumerate() {
                let a = tri[(k + 1) % 3];
                let b = tri[(k + 2) % 3];
                let key = if a < b { (a, b) } else { (b, a) };
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        vertices: [key.0, key.1],
                        triangles: [t, usize::MAX],
                        interior: false,
                    });
                    edges.len() - 1
                });
                if edges[e].triangles[0] != t {
                    edges[e].triangles[1] = t;
                    edges[e].interior = true;
                }
                *slot = e;
            }
            triangle_edges.push(te);
        }
        let mut boundary = vec![false; coords.len()];
        for e in edges.iter().filter(|e| !e.interior) {
            boundary[e.vertices[0]] = true;
            boundary[e.vertices[1]] = true;
        }
        Mesh {
            forest,
            macro_n,
            generation,
            id: NEXT_MESH_ID.fetch_add(1, Ordering::Relaxed),
            leaf_cells,
            node_pool,
            pool_node,
            coords,
            triangles,
            edges,
            triangle_edges,
            boundary,
            geometry: OnceLock::new(),
            pattern: OnceLock::new(),
        }
    }

    fn leaf_flags(&self) -> Vec<bool> {
        let mut leaf = vec![false; self.forest.cells.len()];
        for &c in &self.leaf_cells {
            leaf[c as usize] = true;
        }
        leaf
    }

    /// Bisects every marked triangle once, then closes hanging nodes by
    /// further bisections until the mesh is conforming again.
    pub fn refine(&self, marked: &[usize]) -> Mesh {
        let cells: Vec<u32> = marked.iter().map(|&t| self.leaf_cells[t]).collect();
        self.refine_cells(&cells)
    }

    fn refine_cells(&self, cells: &[u32]) -> Mesh {
        if cells.is_empty() {
            return Mesh::from_forest(
                self.forest.clone(),
                &self.leaf_flags(),
                self.macro_n,
                self.generation + 1,
            );
        }
        let mut forest = (*self.forest).clone();
        let mut leaf = self.leaf_flags();
        let mut queue: Vec<u32> = cells.to_vec();
        queue.sort_unstable();
        queue.dedup();
        let mut active = vec![0u32; forest.points.len()];
        loop {
            for &c in &queue {
                if leaf[c as usize] {
                    forest.bisect(c, &mut leaf);
                }
            }
            // a leaf is non-conforming iff the midpoint of one of its edges is in use
            active.clear();
            active.resize(forest.points.len(), 0);
            for (c, _) in leaf.iter().enumerate().filter(|(_, &l)| l) {
                for &v in &forest.cells[c].verts {
                    active[v as usize] = 1;
                }
            }
            queue.clear();
            for (c, _) in leaf.iter().enumerate().filter(|(_, &l)| l) {
                let [v0, v1, v2] = forest.cells[c].verts;
                let hanging = [(v0, v1), (v1, v2), (v2, v0)].iter().any(|&(a, b)| {
                    forest
                        .midpoints
                        .get(&edge_key(a, b))
                        .is_some_and(|&m| active[m as usize] == 1)
                });
                if hanging {
                    queue.push(c as u32);
                }
            }
            if queue.is_empty() {
                break;
            }
        }
        Mesh::from_forest(Arc::new(forest), &leaf, self.macro_n, self.generation + 1)
    }

    /// Undoes one bisection level where possible. A bisection vertex is
    /// removed only when every leaf around it is marked, carries it as newest
    /// vertex and has its sibling in the same patch. Other marks are ignored.
    pub fn coarsen(&self, marked: &[usize]) -> Mesh {
        let cells: Vec<u32> = marked.iter().map(|&t| self.leaf_cells[t]).collect();
        self.coarsen_cells(&cells)
    }

    fn coarsen_cells(&self, cells: &[u32]) -> Mesh {
        let forest = &self.forest;
        let mut leaf = self.leaf_flags();
        let marked: HashSet<u32> = cells.iter().copied().filter(|&c| leaf[c as usize]).collect();
        // leaves around every node
        let mut around: Vec<Vec<u32>> = vec![Vec::new(); self.node_pool.len()];
        for &c in &self.leaf_cells {
            for &v in &forest.cells[c as usize].verts {
                around[self.pool_node[v as usize] as usize].push(c);
            }
        }
        let mut candidates: Vec<u32> = marked
            .iter()
            .filter(|&&c| forest.cells[c as usize].parent != NONE)
            .map(|&c| forest.cells[c as usize].verts[0])
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        for m in candidates {
            if forest.vert_parent[m as usize].is_none() {
                continue;
            }
            let patch = &around[self.pool_node[m as usize] as usize];
            let ok = (patch.len() == 2 || patch.len() == 4)
                && patch.iter().all(|&c| {
                    let cell = &forest.cells[c as usize];
                    if cell.verts[0] != m || cell.parent == NONE || !marked.contains(&c) {
                        return false;
                    }
                    let sib = forest.cells[cell.parent as usize].children;
                    let other = if sib[0] == c { sib[1] } else { sib[0] };
                    patch.contains(&other)
                });
            if !ok {
                continue;
            }
            for &c in patch {
                let p = forest.cells[c as usize].parent;
                leaf[c as usize] = false;
                leaf[p as usize] = true;
            }
        }
        Mesh::from_forest(self.forest.clone(), &leaf, self.macro_n, self.generation + 1)
    }

    /// Refinement and coarsening in one pass. Indices refer to this mesh's
    /// triangles; coarsening marks invalidated by the refinement closure are
    /// dropped.
    pub fn adapt(&self, refine: &[usize], coarsen: &[usize]) -> Mesh {
        let refine_cells: Vec<u32> = refine.iter().map(|&t| self.leaf_cells[t]).collect();
        let coarsen_cells: Vec<u32> = coarsen.iter().map(|&t| self.leaf_cells[t]).collect();
        let refined = self.refine_cells(&refine_cells);
        let mut out = refined.coarsen_cells(&coarsen_cells);
        out.generation = self.generation + 1;
        out
    }

    pub fn macro_subdivisions(&self) -> usize {
        self.macro_n
    }

    /// Monotone counter bumped by every refine/coarsen.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// Process-unique identity of this mesh instance.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.coords
    }

    /// Triangles as node triples, newest vertex first, counter-clockwise.
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edge indices of triangle `t`; entry `i` is the edge opposite vertex `i`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    /// Number of bisections separating triangle `t` from its macro ancestor.
    pub fn depth(&self, t: usize) -> usize {
        self.forest.cells[self.leaf_cells[t] as usize].depth as usize
    }

    pub fn max_depth(&self) -> usize {
        (0..self.num_triangles()).map(|t| self.depth(t)).max().unwrap_or(0)
    }

    pub fn corners(&self, t: usize) -> [[f64; 2]; 3] {
        self.triangles[t].map(|v| self.coords[v])
    }

    pub fn barycenter(&self, t: usize) -> [f64; 2] {
        let c = self.corners(t);
        [(c[0][0] + c[1][0] + c[2][0]) / 3.0, (c[0][1] + c[1][1] + c[2][1]) / 3.0]
    }

    /// Geometric quantities, computed on first use.
    pub fn geometry(&self) -> &Geometry {
        self.geometry.get_or_init(|| Geometry::new(self))
    }

    pub(crate) fn pattern(&self) -> &crate::fem::Pattern {
        self.pattern.get_or_init(|| crate::fem::Pattern::new(self))
    }

    /// True when both meshes descend from the same macro mesh.
    pub fn shares_hierarchy(&self, other: &Mesh) -> bool {
        if Arc::ptr_eq(&self.forest, &other.forest) {
            return true;
        }
        // forests only grow, so the older one is a prefix of the newer one
        let (a, b) = if self.forest.cells.len() <= other.forest.cells.len() {
            (&self.forest, &other.forest)
        } else {
            (&other.forest, &self.forest)
        };
        self.macro_n == other.macro_n
            && a.points.len() <= b.points.len()
            && a.cells.iter().zip(&b.cells).all(|(x, y)| x.verts == y.verts)
    }

    /// Endpoints (as forest ids) of the edge bisected to create node `v`.
    pub(crate) fn pool_id(&self, v: usize) -> u32 {
        self.node_pool[v]
    }

    pub(crate) fn pool_parent(&self, pool: u32) -> Option<[u32; 2]> {
        self.forest.vert_parent.get(pool as usize).copied().flatten()
    }

    pub(crate) fn pool_node(&self, pool: u32) -> Option<usize> {
        self.pool_node
            .get(pool as usize)
            .copied()
            .filter(|&n| n != NONE)
            .map(|n| n as usize)
    }

    /// Leaf set as forest cell ids; equal sets mean equal triangulations.
    pub fn leaf_signature(&self) -> Vec<u32> {
        self.leaf_cells.clone()
    }

    /// Checks every structural invariant; used by tests and debug assertions.
    pub fn check_invariants(&self) -> Result<()> {
        let geo = self.geometry();
        let area: f64 = geo.triangles.iter().map(|t| t.area).sum();
        if (area - 1.0).abs() > 1e-12 {
            return Err(Error::Internal(format!("total area {area} != 1")));
        }
        for (t, g) in geo.triangles.iter().enumerate() {
            if g.area <= 0.0 {
                return Err(Error::Internal(format!("triangle {t} has area {}", g.area)));
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            let pa = self.coords[e.vertices[0]];
            let pb = self.coords[e.vertices[1]];
            let both = |k: usize, value: f64| (pa[k] - value).abs() < 1e-14 && (pb[k] - value).abs() < 1e-14;
            let geometric_boundary = both(0, 0.0) || both(0, 1.0) || both(1, 0.0) || both(1, 1.0);
            if e.interior == geometric_boundary {
                return Err(Error::Internal(format!("edge {i} has wrong adjacency count")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent conformity oracle: no vertex may lie in the relative
    /// interior of any leaf edge.
    fn hanging_nodes(mesh: &Mesh) -> usize {
        let v = mesh.vertices();
        let mut count = 0;
        for e in mesh.edges() {
            let a = v[e.vertices[0]];
            let b = v[e.vertices[1]];
            for (k, p) in v.iter().enumerate() {
                if k == e.vertices[0] || k == e.vertices[1] {
                    continue;
                }
                let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
                let dot = (p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1]);
                let len2 = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
                if cross.abs() < 1e-14 && dot > 1e-14 && dot < len2 - 1e-14 {
                    count += 1;
                }
            }
        }
        count
    }

    fn edge_multiplicities_ok(mesh: &Mesh) -> bool {
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for t in mesh.triangles() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        mesh.edges().iter().all(|e| {
            let c = count[&(e.vertices[0], e.vertices[1])];
            (e.interior && c == 2) || (!e.interior && c == 1)
        })
    }

    #[test]
    fn macro_counts() {
        for (n, tris, verts) in [(1, 4, 5), (2, 16, 13), (32, 4096, 2113)] {
            let m = Mesh::macro_mesh(n).unwrap();
            assert_eq!(m.num_triangles(), tris);
            assert_eq!(m.num_vertices(), verts);
            m.check_invariants().unwrap();
        }
        assert!(Mesh::macro_mesh(0).is_err());
    }

    #[test]
    fn refine_all_of_single_square() {
        let m = Mesh::macro_mesh(1).unwrap();
        let r = m.refine(&[0, 1, 2, 3]);
        assert_eq!(r.num_triangles(), 8);
        assert_eq!(r.generation(), 1);
        r.check_invariants().unwrap();
        assert_eq!(hanging_nodes(&r), 0);
    }

    #[test]
    fn empty_refine_is_identity() {
        let m = Mesh::macro_mesh(3).unwrap().refine(&[5]);
        let r = m.refine(&[]);
        assert_eq!(r.leaf_signature(), m.leaf_signature());
        assert_eq!(r.generation(), m.generation() + 1);
    }

    #[test]
    fn corner_refinement_is_conforming() {
        let m = Mesh::macro_mesh(2).unwrap();
        let mut r = m.refine(&[0]);
        for _ in 0..4 {
            // keep hitting the triangle touching the origin
            let t = (0..r.num_triangles())
                .find(|&t| r.corners(t).iter().any(|c| c[0] == 0.0 && c[1] == 0.0))
                .unwrap();
            r = r.refine(&[t]);
            assert_eq!(hanging_nodes(&r), 0);
            assert!(edge_multiplicities_ok(&r));
            r.check_invariants().unwrap();
        }
        assert!(r.num_triangles() > 16);
    }

    #[test]
    fn refine_then_coarsen_restores_macro() {
        let m = Mesh::macro_mesh(2).unwrap();
        let all: Vec<usize> = (0..m.num_triangles()).collect();
        let r = m.refine(&all);
        assert_eq!(r.num_triangles(), 32);
        let all: Vec<usize> = (0..r.num_triangles()).collect();
        let c = r.coarsen(&all);
        assert_eq!(c.leaf_signature(), m.leaf_signature());
        // nothing below the macro mesh
        let c2 = c.coarsen(&all[..c.num_triangles()]);
        assert_eq!(c2.leaf_signature(), m.leaf_signature());
    }

    #[test]
    fn single_child_mark_does_not_coarsen() {
        let m = Mesh::macro_mesh(1).unwrap();
        let r = m.refine(&[0, 1, 2, 3]);
        let c = r.coarsen(&[0]);
        assert_eq!(c.leaf_signature(), r.leaf_signature());
    }

    #[test]
    fn mixed_marks_keep_conformity() {
        let mut m = Mesh::macro_mesh(2).unwrap();
        for round in 0..6 {
            let n = m.num_triangles();
            let refine: Vec<usize> = (0..n).filter(|t| (t * 7 + round) % 5 == 0).collect();
            m = m.refine(&refine);
            let n = m.num_triangles();
            let coarsen: Vec<usize> = (0..n).filter(|t| (t * 3 + round) % 4 != 0).collect();
            m = m.coarsen(&coarsen);
            assert_eq!(hanging_nodes(&m), 0, "round {round}");
            assert!(edge_multiplicities_ok(&m));
            m.check_invariants().unwrap();
        }
    }

    #[test]
    fn re_refinement_reuses_vertices() {
        let m = Mesh::macro_mesh(2).unwrap();
        let r1 = m.refine(&[3]);
        let all: Vec<usize> = (0..r1.num_triangles()).collect();
        let c = r1.coarsen(&all);
        let r2 = c.refine(&[3]);
        assert_eq!(r1.leaf_signature(), r2.leaf_signature());
        assert_eq!(r1.vertices(), r2.vertices());
    }
}
