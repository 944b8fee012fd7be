//! Structured simplex meshes of axis-aligned boxes.
//!
//! Squares are split into two triangles along the diagonal through the
//! lower-left corner; cubes are split into the six tetrahedra of the Kuhn
//! (Freudenthal) subdivision, all sharing the main diagonal of the cube. Both
//! subdivisions are translation invariant, so neighbouring grid cells match
//! conformingly and every simplex has the same volume.

use std::io::Write;

use crate::error::{Error, Result};
use crate::geom::{self, Point};

/// Axis-aligned box. For two-dimensional meshes only the first two
/// components are used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxDomain {
    pub min: Point,
    pub max: Point,
}

impl BoxDomain {
    pub fn new(min: Point, max: Point) -> Self {
        Self { min, max }
    }

    pub fn unit() -> Self {
        Self::new([0.0; 3], [1.0; 3])
    }

    pub fn volume(&self, dim: usize) -> f64 {
        (0..dim).map(|k| self.max[k] - self.min[k]).product()
    }
}

/// Interior face shared by exactly two cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// Adjacent cells, lower index first.
    pub cells: [usize; 2],
    /// Face vertices; only the first `dim` entries are meaningful.
    pub nodes: [usize; 3],
    /// Unit normal pointing from `cells[0]` into `cells[1]`.
    pub normal: Point,
    pub measure: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundMesh {
    dim: usize,
    nodes: Vec<Point>,
    /// Flat cell connectivity with stride `dim + 1`.
    cells: Vec<usize>,
    faces: Vec<Face>,
    h: f64,
    cells_per_axis: usize,
}

/// Kuhn subdivision of the unit cube: one tetrahedron per permutation of the
/// axes, walking from corner 0 to corner 7 (vertex `i` of the cube sits at
/// `(i & 1, (i >> 1) & 1, (i >> 2) & 1)`).
const KUHN_TETS: [[usize; 4]; 6] = [
    [0, 1, 3, 7], // x, y, z
    [0, 1, 5, 7], // x, z, y
    [0, 2, 3, 7], // y, x, z
    [0, 2, 6, 7], // y, z, x
    [0, 4, 5, 7], // z, x, y
    [0, 4, 6, 7], // z, y, x
];

/// Square corners numbered like the cube corners; split along 0-3.
const SQUARE_TRIS: [[usize; 3]; 2] = [[0, 1, 3], [0, 3, 2]];

impl BackgroundMesh {
    /// Builds the structured mesh with `cells_per_axis` grid cells along every
    /// axis of `domain`.
    pub fn build(domain: &BoxDomain, cells_per_axis: usize, dim: usize) -> Result<Self> {
        if cells_per_axis == 0 {
            return Err(Error::InvalidMesh("cells_per_axis must be positive".into()));
        }
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidMesh(format!("dimension {dim} not supported")));
        }
        for k in 0..dim {
            let extent = domain.max[k] - domain.min[k];
            if !(extent > 0.0 && extent.is_finite()) {
                return Err(Error::InvalidMesh(format!("box has extent {extent} along axis {k}")));
            }
        }

        let n = cells_per_axis;
        let np = n + 1;
        let spacing: Vec<f64> = (0..dim).map(|k| (domain.max[k] - domain.min[k]) / n as f64).collect();
        let h = spacing.iter().cloned().fold(0.0, f64::max);

        let coord = |k: usize, i: usize| {
            if i == n {
                domain.max[k]
            } else {
                domain.min[k] + i as f64 * spacing[k]
            }
        };

        let mut nodes = Vec::new();
        let mut cells = Vec::new();
        if dim == 2 {
            nodes.reserve(np * np);
            for j in 0..np {
                for i in 0..np {
                    nodes.push([coord(0, i), coord(1, j), 0.0]);
                }
            }
            cells.reserve(2 * n * n * 3);
            for j in 0..n {
                for i in 0..n {
                    let corner = |c: usize| (i + (c & 1)) + np * (j + ((c >> 1) & 1));
                    for tri in SQUARE_TRIS {
                        cells.extend(tri.iter().map(|&c| corner(c)));
                    }
                }
            }
        } else {
            nodes.reserve(np * np * np);
            for k in 0..np {
                for j in 0..np {
                    for i in 0..np {
                        nodes.push([coord(0, i), coord(1, j), coord(2, k)]);
                    }
                }
            }
            cells.reserve(6 * n * n * n * 4);
            for k in 0..n {
                for j in 0..n {
                    for i in 0..n {
                        let corner = |c: usize| {
                            (i + (c & 1)) + np * ((j + ((c >> 1) & 1)) + np * (k + ((c >> 2) & 1)))
                        };
                        for tet in KUHN_TETS {
                            cells.extend(tet.iter().map(|&c| corner(c)));
                        }
                    }
                }
            }
        }

        let mut mesh = Self {
            dim,
            nodes,
            cells,
            faces: Vec::new(),
            h,
            cells_per_axis,
        };
        mesh.faces = mesh.collect_interior_faces();
        Ok(mesh)
    }

    fn collect_interior_faces(&self) -> Vec<Face> {
        let nv = self.dim + 1;
        // (sorted face key, cell) for every cell-face slot
        let mut slots: Vec<([usize; 3], usize)> = Vec::with_capacity(self.num_cells() * nv);
        for c in 0..self.num_cells() {
            let cell = self.cell(c);
            for omit in 0..nv {
                let mut key = [usize::MAX; 3];
                let mut m = 0;
                for (l, &v) in cell.iter().enumerate() {
                    if l != omit {
                        key[m] = v;
                        m += 1;
                    }
                }
                key[..self.dim].sort_unstable();
                slots.push((key, c));
            }
        }
        slots.sort_unstable();

        let mut faces = Vec::new();
        let mut i = 0;
        while i < slots.len() {
            let mut j = i + 1;
            while j < slots.len() && slots[j].0 == slots[i].0 {
                j += 1;
            }
            debug_assert!(j - i <= 2, "face shared by more than two cells");
            if j - i == 2 {
                let key = slots[i].0;
                let cells = [slots[i].1, slots[i + 1].1];
                let (normal, measure) = self.oriented_face_geometry(&key[..self.dim], cells);
                faces.push(Face {
                    cells,
                    nodes: key,
                    normal,
                    measure,
                });
            }
            i = j;
        }
        faces
    }

    fn oriented_face_geometry(&self, face_nodes: &[usize], cells: [usize; 2]) -> (Point, f64) {
        let pts: Vec<Point> = face_nodes.iter().map(|&v| self.nodes[v]).collect();
        let raw = if self.dim == 2 {
            let t = geom::sub(pts[1], pts[0]);
            [t[1], -t[0], 0.0]
        } else {
            geom::cross(geom::sub(pts[1], pts[0]), geom::sub(pts[2], pts[0]))
        };
        let mut normal = geom::scale(raw, 1.0 / geom::norm(raw));
        let toward = geom::sub(self.cell_centroid(cells[1]), geom::centroid(&pts));
        if geom::dot(normal, toward) < 0.0 {
            normal = geom::scale(normal, -1.0);
        }
        (normal, geom::simplex_measure(&pts))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        let nv = self.dim + 1;
        &self.cells[c * nv..(c + 1) * nv]
    }

    pub fn cell_vertices(&self, c: usize) -> Vec<Point> {
        self.cell(c).iter().map(|&v| self.nodes[v]).collect()
    }

    pub fn cell_centroid(&self, c: usize) -> Point {
        geom::centroid(&self.cell_vertices(c))
    }

    pub fn cell_volume(&self, c: usize) -> f64 {
        geom::simplex_measure(&self.cell_vertices(c))
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face_nodes(&self, f: usize) -> &[usize] {
        &self.faces[f].nodes[..self.dim]
    }

    /// Stored unit normal and measure of interior face `f`.
    pub fn face_normal_and_measure(&self, f: usize) -> Result<(Point, f64)> {
        let face = self.faces.get(f).ok_or(Error::OutOfRange {
            index: f,
            len: self.faces.len(),
        })?;
        Ok((face.normal, face.measure))
    }

    /// Writes nodes and cells as two CSV sections for external inspection.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "node,x,y,z")?;
        for (i, p) in self.nodes.iter().enumerate() {
            writeln!(out, "{i},{:.12e},{:.12e},{:.12e}", p[0], p[1], p[2])?;
        }
        writeln!(out, "cell,v0,v1,v2,v3")?;
        for c in 0..self.num_cells() {
            let cell = self.cell(c);
            let v3 = cell.get(3).map(|v| v.to_string()).unwrap_or_default();
            writeln!(out, "{c},{},{},{},{v3}", cell[0], cell[1], cell[2])?;
        }
        Ok(())
    }
}
