//! Extraction of the discrete surface: the zero set of the piecewise linear
//! level set, cut cell by cell.
//!
//! In three dimensions each cut tetrahedron yields a triangle (one vertex
//! separated from the other three) or a planar quadrilateral (two against two)
//! that is split into two triangles. In two dimensions a cut triangle yields a
//! single segment; segments are stored as [`CutTriangle`]s with two vertices.

use std::io::Write;

use crate::error::{Error, Result};
use crate::geom::{self, Point};
use crate::levelset::{AnalyticSurface, LevelSetField};
use crate::mesh::BackgroundMesh;

/// One flat piece of the discrete surface inside its owner cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CutTriangle {
    pub owner: usize,
    vertices: [Point; 3],
    num_vertices: usize,
    pub area: f64,
    /// Unit normal of the piece, pointing towards increasing level-set values.
    pub normal: Point,
}

impl CutTriangle {
    pub fn vertices(&self) -> &[Point] {
        &self.vertices[..self.num_vertices]
    }

    pub fn centroid(&self) -> Point {
        geom::centroid(self.vertices())
    }

    /// Degree-2 exact rule: edge midpoints for triangles, two-point Gauss
    /// for segments.
    pub fn quadrature(&self) -> Vec<(Point, f64)> {
        let v = self.vertices();
        if v.len() == 3 {
            let w = self.area / 3.0;
            vec![
                (geom::lerp(v[0], v[1], 0.5), w),
                (geom::lerp(v[1], v[2], 0.5), w),
                (geom::lerp(v[2], v[0], 0.5), w),
            ]
        } else {
            let s = 0.5 / 3f64.sqrt();
            let w = self.area / 2.0;
            vec![(geom::lerp(v[0], v[1], 0.5 - s), w), (geom::lerp(v[0], v[1], 0.5 + s), w)]
        }
    }

    /// Vertex rule; exact for affine integrands.
    pub fn vertex_quadrature(&self) -> Vec<(Point, f64)> {
        let v = self.vertices();
        let w = self.area / v.len() as f64;
        v.iter().map(|&p| (p, w)).collect()
    }
}

/// Local edges of a simplex, in the numbering used for the quad split rule.
const TET_EDGES: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];
const TRI_EDGES: [[usize; 2]; 3] = [[0, 1], [0, 2], [1, 2]];

/// Cuts one simplex (3 or 4 vertices) along the zero set of the linear
/// interpolant of `values`. `owner` is recorded on the returned pieces.
pub fn cut_cell(owner: usize, vertices: &[Point], values: &[f64]) -> Result<Vec<CutTriangle>> {
    let dim = vertices.len() - 1;
    if values.len() != vertices.len() || !(dim == 2 || dim == 3) {
        return Err(Error::DimensionMismatch(format!(
            "{} vertices, {} values",
            vertices.len(),
            values.len()
        )));
    }
    let negatives = values.iter().filter(|&&v| v < 0.0).count();
    if negatives == 0 || negatives == values.len() {
        return Err(Error::CellNotCut);
    }

    let grads = geom::p1_gradients(vertices, dim);
    let mut grad = [0.0; 3];
    for (g, &v) in grads.iter().zip(values) {
        grad = geom::add(grad, geom::scale(*g, v));
    }
    let normal = geom::scale(grad, 1.0 / geom::norm(grad));

    let edges: &[[usize; 2]] = if dim == 3 { &TET_EDGES } else { &TRI_EDGES };
    let mut points: Vec<(usize, [usize; 2], Point)> = Vec::with_capacity(4);
    for (e, &[a, b]) in edges.iter().enumerate() {
        let (ra, rb) = (values[a], values[b]);
        if (ra < 0.0) != (rb < 0.0) {
            let t = ra / (ra - rb);
            points.push((e, [a, b], geom::lerp(vertices[a], vertices[b], t)));
        }
    }

    let piece = |pts: &[Point]| {
        let mut vs = [[0.0; 3]; 3];
        vs[..pts.len()].copy_from_slice(pts);
        CutTriangle {
            owner,
            vertices: vs,
            num_vertices: pts.len(),
            area: geom::simplex_measure(pts),
            normal,
        }
    };

    match points.len() {
        2 | 3 => {
            let pts: Vec<Point> = points.iter().map(|p| p.2).collect();
            Ok(vec![piece(&pts)])
        }
        4 => {
            // Quad: two cut edges are adjacent in the cycle iff they share a
            // vertex. The first point (lowest edge index) is opposite to the
            // one edge-disjoint from it; split along that diagonal.
            let first = points[0];
            let (opposite, neighbours): (Vec<&_>, Vec<&_>) = points[1..]
                .iter()
                .partition(|p| p.1.iter().all(|v| !first.1.contains(v)));
            debug_assert!(opposite.len() == 1 && neighbours.len() == 2);
            let q = opposite[0].2;
            Ok(vec![
                piece(&[first.2, neighbours[0].2, q]),
                piece(&[first.2, q, neighbours[1].2]),
            ])
        }
        n => unreachable!("{n} intersection points on a sign-changing simplex"),
    }
}

/// Discrete surface restricted to the active cells of the background mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct CutSurface {
    pub active_cells: Vec<usize>,
    pub triangles: Vec<CutTriangle>,
    pub active_faces: Vec<usize>,
    pub total_area: f64,
}

/// Cells whose nodal level-set values change sign.
pub fn classify_cells(mesh: &BackgroundMesh, field: &LevelSetField) -> Vec<usize> {
    (0..mesh.num_cells())
        .filter(|&c| {
            let cell = mesh.cell(c);
            let first = field.nodal_values[cell[0]] < 0.0;
            cell[1..].iter().any(|&v| (field.nodal_values[v] < 0.0) != first)
        })
        .collect()
}

/// Interior faces whose two neighbours are both in the sorted list `active`.
pub fn active_faces(mesh: &BackgroundMesh, active: &[usize]) -> Vec<usize> {
    let mut is_active = vec![false; mesh.num_cells()];
    for &c in active {
        is_active[c] = true;
    }
    mesh.faces()
        .iter()
        .enumerate()
        .filter(|(_, f)| is_active[f.cells[0]] && is_active[f.cells[1]])
        .map(|(i, _)| i)
        .collect()
}

impl CutSurface {
    pub fn build(mesh: &BackgroundMesh, field: &LevelSetField) -> Result<Self> {
        let active_cells = classify_cells(mesh, field);
        let mut triangles = Vec::with_capacity(2 * active_cells.len());
        for &c in &active_cells {
            let verts = mesh.cell_vertices(c);
            let values = field.cell_values(mesh, c);
            triangles.extend(cut_cell(c, &verts, &values)?);
        }
        let total_area = triangles.iter().map(|t| t.area).sum();
        let active_faces = active_faces(mesh, &active_cells);
        Ok(Self {
            active_cells,
            triangles,
            active_faces,
            total_area,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "owner,x0,y0,z0,x1,y1,z1,x2,y2,z2,area,nx,ny,nz")?;
        for t in &self.triangles {
            write!(out, "{}", t.owner)?;
            for k in 0..3 {
                match t.vertices().get(k) {
                    Some(p) => write!(out, ",{:.12e},{:.12e},{:.12e}", p[0], p[1], p[2])?,
                    None => write!(out, ",,,")?,
                }
            }
            writeln!(
                out,
                ",{:.12e},{:.12e},{:.12e},{:.12e}",
                t.area, t.normal[0], t.normal[1], t.normal[2]
            )?;
        }
        Ok(())
    }
}

/// Sampled geometric approximation quality of a cut surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryReport {
    /// Largest `|rho|` over piece vertices and centroids.
    pub max_distance: f64,
    /// Largest angle (radians) between the exact normal and the piece normal.
    pub max_normal_angle: f64,
}

pub fn geometry_report(surface: &AnalyticSurface, cut: &CutSurface) -> Result<GeometryReport> {
    let mut max_distance = 0.0f64;
    let mut max_normal_angle = 0.0f64;
    for t in &cut.triangles {
        let mut samples: Vec<Point> = t.vertices().to_vec();
        samples.push(t.centroid());
        for x in samples {
            max_distance = max_distance.max(surface.signed_distance(x).abs());
            let n = surface.normal(x)?;
            let cos = geom::dot(n, t.normal).clamp(-1.0, 1.0);
            // acos loses accuracy near 0; use atan2 of |n x n_h| and n . n_h
            let sin = geom::norm(geom::cross(n, t.normal));
            max_normal_angle = max_normal_angle.max(sin.atan2(cos));
        }
    }
    Ok(GeometryReport {
        max_distance,
        max_normal_angle,
    })
}
