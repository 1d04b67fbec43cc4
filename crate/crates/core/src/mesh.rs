//! Quadrilateral meshes and boundary node sets.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use crate::error::Result;

/// A group of nodes with prescribed displacement.
///
/// `lift` is the displacement of the set for a unit value of the imposed
/// loading signal, so that the boundary datum is `lift * u_D(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DirichletSet {
    pub name: String,
    pub nodes: Vec<usize>,
    /// Constrained directions (x, y).
    pub mask: [bool; 2],
    pub lift: [f64; 2],
}

/// Two-dimensional mesh of bilinear quadrilaterals (counter-clockwise connectivity).
#[derive(Clone, Debug, Default)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    pub elements: Vec<[usize; 4]>,
    pub dirichlet: Vec<DirichletSet>,
    pub neumann_edges: Vec<[usize; 2]>,
}

impl Mesh {
    pub fn new(nodes: Vec<[f64; 2]>, elements: Vec<[usize; 4]>) -> Self {
        Mesh { nodes, elements, dirichlet: Vec::new(), neumann_edges: Vec::new() }
    }

    /// Structured `nx` by `ny` grid over `[x0, x0 + lx] x [y0, y0 + ly]`.
    ///
    /// Node `(i, j)` has id `j * (nx + 1) + i`.
    pub fn rectangle(nx: usize, ny: usize, origin: [f64; 2], size: [f64; 2]) -> Self {
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push([
                    origin[0] + size[0] * i as f64 / nx as f64,
                    origin[1] + size[1] * j as f64 / ny as f64,
                ]);
            }
        }
        let mut elements = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let n0 = j * (nx + 1) + i;
                elements.push([n0, n0 + 1, n0 + nx + 2, n0 + nx + 1]);
            }
        }
        let mut mesh = Mesh::new(nodes, elements);
        mesh.update_neumann_edges();
        mesh
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn n_dofs(&self) -> usize {
        2 * self.nodes.len()
    }

    pub fn add_dirichlet(&mut self, set: DirichletSet) {
        self.dirichlet.push(set);
        self.update_neumann_edges();
    }

    /// Edges owned by exactly one element.
    pub fn boundary_edges(&self) -> Vec<[usize; 2]> {
        let mut count: BTreeMap<[usize; 2], (usize, [usize; 2])> = BTreeMap::new();
        for el in &self.elements {
            for a in 0..4 {
                let e = [el[a], el[(a + 1) % 4]];
                let key = [e[0].min(e[1]), e[0].max(e[1])];
                count.entry(key).and_modify(|c| c.0 += 1).or_insert((1, e));
            }
        }
        count.into_values().filter(|(c, _)| *c == 1).map(|(_, e)| e).collect()
    }

    pub fn boundary_nodes(&self) -> BTreeSet<usize> {
        self.boundary_edges().into_iter().flatten().collect()
    }

    pub fn dirichlet_nodes(&self) -> BTreeSet<usize> {
        self.dirichlet.iter().flat_map(|s| s.nodes.iter().copied()).collect()
    }

    /// Boundary nodes that carry no displacement constraint.
    pub fn neumann_nodes(&self) -> BTreeSet<usize> {
        let d = self.dirichlet_nodes();
        self.boundary_nodes().into_iter().filter(|n| !d.contains(n)).collect()
    }

    fn update_neumann_edges(&mut self) {
        let d = self.dirichlet_nodes();
        self.neumann_edges = self
            .boundary_edges()
            .into_iter()
            .filter(|e| !(d.contains(&e[0]) && d.contains(&e[1])))
            .collect();
    }

    pub fn element_coords(&self, e: usize) -> [[f64; 2]; 4] {
        let el = &self.elements[e];
        [self.nodes[el[0]], self.nodes[el[1]], self.nodes[el[2]], self.nodes[el[3]]]
    }

    /// Index of the first element containing `p` (corners treated as a convex polygon).
    pub fn locate(&self, p: [f64; 2]) -> Option<usize> {
        (0..self.elements.len()).find(|&e| {
            let c = self.element_coords(e);
            let scale = (c[2][0] - c[0][0]).abs() + (c[2][1] - c[0][1]).abs();
            (0..4).all(|a| {
                let q0 = c[a];
                let q1 = c[(a + 1) % 4];
                let cross = (q1[0] - q0[0]) * (p[1] - q0[1]) - (q1[1] - q0[1]) * (p[0] - q0[0]);
                cross >= -1e-12 * scale * scale
            })
        })
    }

    pub fn nearest_node(&self, p: [f64; 2]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, x) in self.nodes.iter().enumerate() {
            let d = (x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    pub fn write_nodes_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "id,x,y")?;
        for (i, x) in self.nodes.iter().enumerate() {
            writeln!(w, "{},{:.17e},{:.17e}", i, x[0], x[1])?;
        }
        Ok(())
    }

    pub fn write_elements_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "id,n0,n1,n2,n3")?;
        for (i, el) in self.elements.iter().enumerate() {
            writeln!(w, "{},{},{},{},{}", i, el[0], el[1], el[2], el[3])?;
        }
        Ok(())
    }
}
