//! One discretization level: mesh, level set, cut surface and the assembled
//! forms, plus the sphere benchmark with a known solution.

use crate::assembly::{self, DofMap, LinearSystem};
use crate::cutgeom::{geometry_report, CutSurface, GeometryReport};
use crate::error::Result;
use crate::geom::Point;
use crate::levelset::{AnalyticSurface, LevelSetField};
use crate::linalg::SparseSym;
use crate::mesh::{BackgroundMesh, BoxDomain};

#[derive(Debug, Clone)]
pub struct Discretization {
    pub surface: AnalyticSurface,
    pub mesh: BackgroundMesh,
    pub field: LevelSetField,
    pub cut: CutSurface,
    pub dofs: DofMap,
    pub stiffness: SparseSym,
    pub stabilization: SparseSym,
    pub constraint: Vec<f64>,
}

impl Discretization {
    pub fn new(surface: AnalyticSurface, domain: &BoxDomain, cells_per_axis: usize) -> Result<Self> {
        let mesh = BackgroundMesh::build(domain, cells_per_axis, surface.dim())?;
        Self::on_mesh(surface, mesh)
    }

    pub fn on_mesh(surface: AnalyticSurface, mesh: BackgroundMesh) -> Result<Self> {
        let field = LevelSetField::interpolate(&surface, &mesh);
        let cut = CutSurface::build(&mesh, &field)?;
        let dofs = DofMap::new(&mesh, &cut.active_cells);
        let stiffness = assembly::assemble_stiffness(&cut, &mesh, &dofs)?;
        let stabilization = assembly::assemble_stabilization(&mesh, &cut.active_faces, &dofs);
        let constraint = assembly::mean_constraint(&cut, &mesh, &dofs);
        Ok(Self {
            surface,
            mesh,
            field,
            cut,
            dofs,
            stiffness,
            stabilization,
            constraint,
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.len()
    }

    pub fn h(&self) -> f64 {
        self.mesh.h()
    }

    pub fn load<F: Fn(Point) -> f64>(&self, f: F) -> Result<Vec<f64>> {
        assembly::assemble_load(&self.cut, &self.mesh, &self.surface, f, &self.dofs)
    }

    pub fn system(&self, tau0: f64, load: &[f64]) -> Result<LinearSystem> {
        assembly::build_system(&self.stiffness, &self.stabilization, tau0, &self.constraint, load)
    }

    /// System with a zero right-hand side, for spectral studies.
    pub fn operator(&self, tau0: f64) -> Result<LinearSystem> {
        self.system(tau0, &vec![0.0; self.n_dofs()])
    }

    pub fn geometry(&self) -> Result<GeometryReport> {
        geometry_report(&self.surface, &self.cut)
    }

    /// Nodal values of the closest-point extension of `g` at the dofs.
    pub fn interpolate_extension<F: Fn(Point) -> f64>(&self, g: F) -> Result<Vec<f64>> {
        self.dofs
            .nodes
            .iter()
            .map(|&v| self.surface.extend(&g, self.mesh.nodes()[v]))
            .collect()
    }

    /// Level-set nodal values restricted to the dofs.
    pub fn level_set_dofs(&self) -> Vec<f64> {
        self.dofs.restrict(&self.field.nodal_values)
    }
}

/// Sphere of radius 1/2 centred in the unit cube with the cubic exact
/// solution `u = (x - 1/2)(y - 1/2)(z - 1/2)`.
pub mod sphere_benchmark {
    use crate::geom::{self, Point};
    use crate::levelset::AnalyticSurface;

    pub fn surface() -> AnalyticSurface {
        AnalyticSurface::sphere([0.5; 3], 0.5)
    }

    pub fn exact(x: Point) -> f64 {
        (x[0] - 0.5) * (x[1] - 0.5) * (x[2] - 0.5)
    }

    /// Right-hand side `-Laplace-Beltrami u`, written so that it is exact on
    /// the sphere.
    pub fn load(x: Point) -> f64 {
        let [x, y, z] = x;
        6.0 * (2.0 * x - 1.0) * (2.0 * y - 1.0) * (2.0 * z - 1.0)
            / (3.0 + 4.0 * x * (x - 1.0) + 4.0 * y * (y - 1.0) + 4.0 * z * (z - 1.0))
    }

    /// Tangential gradient of `exact` at a point on the sphere.
    pub fn tangential_gradient(x: Point) -> Point {
        let d = geom::sub(x, [0.5; 3]);
        let grad = [d[1] * d[2], d[0] * d[2], d[0] * d[1]];
        let n = geom::scale(d, 1.0 / geom::norm(d));
        geom::sub(grad, geom::scale(n, geom::dot(n, grad)))
    }
}
