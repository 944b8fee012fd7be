//! Discrete forms of the stabilized method on the active cells.
//!
//! All P1 basis gradients are constant per cell, so the tangential stiffness
//! and the face-jump penalty are integrated exactly with one point. The load
//! uses a degree-2 rule on each surface piece.

use crate::cutgeom::CutSurface;
use crate::error::{Error, Result};
use crate::geom::{self, Point};
use crate::levelset::AnalyticSurface;
use crate::linalg::{self, SolveStats, SolverKind, SparseSym, SymTriplets};
use crate::mesh::BackgroundMesh;

/// Degrees of freedom: every node of an active cell, numbered by increasing
/// node index.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub nodes: Vec<usize>,
    node_to_dof: Vec<Option<usize>>,
}

impl DofMap {
    pub fn new(mesh: &BackgroundMesh, active_cells: &[usize]) -> Self {
        let mut used = vec![false; mesh.num_nodes()];
        for &c in active_cells {
            for &v in mesh.cell(c) {
                used[v] = true;
            }
        }
        let mut node_to_dof = vec![None; mesh.num_nodes()];
        let mut nodes = Vec::new();
        for (v, _) in used.iter().enumerate().filter(|(_, u)| **u) {
            node_to_dof[v] = Some(nodes.len());
            nodes.push(v);
        }
        Self { nodes, node_to_dof }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dof(&self, node: usize) -> Option<usize> {
        self.node_to_dof[node]
    }

    fn cell_dofs(&self, mesh: &BackgroundMesh, c: usize) -> Vec<usize> {
        mesh.cell(c)
            .iter()
            .map(|&v| self.node_to_dof[v].expect("node of an active cell without dof"))
            .collect()
    }

    /// Restriction of a nodal vector to the dofs.
    pub fn restrict(&self, nodal: &[f64]) -> Vec<f64> {
        self.nodes.iter().map(|&v| nodal[v]).collect()
    }
}

/// `(I - n n^T) g`.
pub fn tangential_project(g: Point, n: Point) -> Result<Point> {
    let len = geom::norm(n);
    if (len - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnitNormal(len));
    }
    Ok(geom::sub(g, geom::scale(n, geom::dot(n, g))))
}

fn cell_gradients(mesh: &BackgroundMesh, c: usize) -> [Point; 4] {
    geom::p1_gradients(&mesh.cell_vertices(c), mesh.dim())
}

/// Tangential stiffness `a_h(phi_i, phi_j)` over the cut pieces.
pub fn assemble_stiffness(cut: &CutSurface, mesh: &BackgroundMesh, dofs: &DofMap) -> Result<SparseSym> {
    let nv = mesh.dim() + 1;
    let mut t = SymTriplets::new(dofs.len());
    for tri in &cut.triangles {
        let grads = cell_gradients(mesh, tri.owner);
        let local = dofs.cell_dofs(mesh, tri.owner);
        let mut pg = [[0.0; 3]; 4];
        for a in 0..nv {
            pg[a] = tangential_project(grads[a], tri.normal)?;
        }
        for a in 0..nv {
            for b in a..nv {
                t.add(local[a], local[b], tri.area * geom::dot(pg[a], pg[b]));
            }
        }
    }
    Ok(t.build())
}

/// Face-jump penalty with unit parameter: for every active face,
/// `|F| [n_F . grad phi_i] [n_F . grad phi_j]`.
pub fn assemble_stabilization(mesh: &BackgroundMesh, active_faces: &[usize], dofs: &DofMap) -> SparseSym {
    let mut t = SymTriplets::new(dofs.len());
    for &f in active_faces {
        let face = &mesh.faces()[f];
        // union of the two cells' dofs with their jump coefficients
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(mesh.dim() + 2);
        for (side, &c) in face.cells.iter().enumerate() {
            let sign = if side == 0 { 1.0 } else { -1.0 };
            let grads = cell_gradients(mesh, c);
            for (a, dof) in dofs.cell_dofs(mesh, c).into_iter().enumerate() {
                let g = sign * geom::dot(face.normal, grads[a]);
                match entries.iter_mut().find(|(d, _)| *d == dof) {
                    Some(e) => e.1 += g,
                    None => entries.push((dof, g)),
                }
            }
        }
        for a in 0..entries.len() {
            for b in a..entries.len() {
                t.add(entries[a].0, entries[b].0, face.measure * entries[a].1 * entries[b].1);
            }
        }
    }
    t.build()
}

/// P1 mass matrix over the whole active cells.
pub fn assemble_mass(mesh: &BackgroundMesh, active_cells: &[usize], dofs: &DofMap) -> SparseSym {
    let d = mesh.dim() as f64;
    let nv = mesh.dim() + 1;
    let mut t = SymTriplets::new(dofs.len());
    for &c in active_cells {
        let vol = mesh.cell_volume(c);
        let local = dofs.cell_dofs(mesh, c);
        let off = vol / ((d + 1.0) * (d + 2.0));
        for a in 0..nv {
            for b in a..nv {
                t.add(local[a], local[b], if a == b { 2.0 * off } else { off });
            }
        }
    }
    t.build()
}

/// Load vector `(f o p, phi_i)` on the discrete surface.
pub fn assemble_load<F>(cut: &CutSurface, mesh: &BackgroundMesh, surface: &AnalyticSurface, f: F, dofs: &DofMap) -> Result<Vec<f64>>
where
    F: Fn(Point) -> f64,
{
    let dim = mesh.dim();
    let mut b = vec![0.0; dofs.len()];
    for tri in &cut.triangles {
        let verts = mesh.cell_vertices(tri.owner);
        let grads = geom::p1_gradients(&verts, dim);
        let local = dofs.cell_dofs(mesh, tri.owner);
        for (x, w) in tri.quadrature() {
            let fx = f(surface.closest_point(x)?);
            let lam = geom::barycentric(&grads, verts[0], x, dim);
            for (a, &dof) in local.iter().enumerate() {
                b[dof] += w * fx * lam[a];
            }
        }
    }
    Ok(b)
}

/// `c_i = integral of phi_i over the discrete surface`.
pub fn mean_constraint(cut: &CutSurface, mesh: &BackgroundMesh, dofs: &DofMap) -> Vec<f64> {
    let dim = mesh.dim();
    let mut c = vec![0.0; dofs.len()];
    for tri in &cut.triangles {
        let verts = mesh.cell_vertices(tri.owner);
        let grads = geom::p1_gradients(&verts, dim);
        let local = dofs.cell_dofs(mesh, tri.owner);
        for (x, w) in tri.vertex_quadrature() {
            let lam = geom::barycentric(&grads, verts[0], x, dim);
            for (a, &dof) in local.iter().enumerate() {
                c[dof] += w * lam[a];
            }
        }
    }
    c
}

/// Bordered system `[[A_a + tau0 A_j, c], [c^T, 0]]`, rhs `[b; 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub matrix: SparseSym,
    pub rhs: Vec<f64>,
    pub tau0: f64,
    /// Number of finite element unknowns; the multiplier is index `n_dofs`.
    pub n_dofs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub coefficients: Vec<f64>,
    pub multiplier: f64,
    pub stats: SolveStats,
}

pub fn build_system(stiffness: &SparseSym, stabilization: &SparseSym, tau0: f64, constraint: &[f64], load: &[f64]) -> Result<LinearSystem> {
    if tau0 < 0.0 || tau0.is_nan() {
        return Err(Error::NegativeTau(tau0));
    }
    let n = stiffness.dim();
    if stabilization.dim() != n || constraint.len() != n || load.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "stiffness {n}, stabilization {}, constraint {}, load {}",
            stabilization.dim(),
            constraint.len(),
            load.len()
        )));
    }
    let block = if tau0 == 0.0 {
        stiffness.clone()
    } else {
        stiffness.add_scaled(stabilization, tau0)?
    };
    let matrix = block.bordered(constraint)?;
    let mut rhs = load.to_vec();
    rhs.push(0.0);
    Ok(LinearSystem {
        matrix,
        rhs,
        tau0,
        n_dofs: n,
    })
}

impl LinearSystem {
    pub fn size(&self) -> usize {
        self.n_dofs + 1
    }

    pub fn stiffness_block(&self) -> SparseSym {
        self.matrix.leading_block(self.n_dofs)
    }

    pub fn solve(&self, kind: SolverKind) -> Result<Solution> {
        let (mut x, stats) = linalg::solve(&self.matrix, &self.rhs, kind)?;
        let multiplier = x.pop().unwrap_or(0.0);
        Ok(Solution {
            coefficients: x,
            multiplier,
            stats,
        })
    }
}

/// Floor of the scaling diagonal, relative to its largest entry.
pub const SCALING_FLOOR: f64 = 1e-14;

/// Symmetric Jacobi scaling `D^{-1/2} A D^{-1/2}` of the stiffness block with
/// `D_ii = max(A_ii, 1e-14 max A_ii)`. The constraint column picks up the
/// same factors on its stiffness side; the multiplier itself is not rescaled.
pub fn diagonal_scaling(system: &LinearSystem) -> Result<LinearSystem> {
    let diag = system.matrix.diagonal();
    let block = &diag[..system.n_dofs];
    let dmax = block.iter().cloned().fold(0.0f64, f64::max);
    if !(dmax > 0.0) {
        return Err(Error::ZeroDiagonal);
    }
    let mut s: Vec<f64> = block.iter().map(|&d| 1.0 / d.max(SCALING_FLOOR * dmax).sqrt()).collect();
    s.extend(std::iter::repeat_n(1.0, system.matrix.dim() - system.n_dofs));
    let matrix = system.matrix.scale_symmetric(&s);
    let rhs = system.rhs.iter().zip(&s).map(|(b, f)| b * f).collect();
    Ok(LinearSystem {
        matrix,
        rhs,
        tau0: system.tau0,
        n_dofs: system.n_dofs,
    })
}
