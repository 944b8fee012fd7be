//! Analytic signed-distance surfaces and their nodal interpolants.

use crate::error::{Error, Result};
use crate::geom::{self, Point};
use crate::mesh::BackgroundMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceKind {
    /// Circle in the `xy` plane; the `z` component is ignored.
    Circle,
    Sphere,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticSurface {
    pub kind: SurfaceKind,
    pub center: Point,
    pub radius: f64,
}

/// Points closer than this to the center have no well-defined projection.
const CENTER_TOLERANCE: f64 = 1e-12;

impl AnalyticSurface {
    pub fn circle(center: [f64; 2], radius: f64) -> Self {
        assert!(radius > 0.0, "radius must be positive");
        Self {
            kind: SurfaceKind::Circle,
            center: [center[0], center[1], 0.0],
            radius,
        }
    }

    pub fn sphere(center: Point, radius: f64) -> Self {
        assert!(radius > 0.0, "radius must be positive");
        Self {
            kind: SurfaceKind::Sphere,
            center,
            radius,
        }
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            SurfaceKind::Circle => 2,
            SurfaceKind::Sphere => 3,
        }
    }

    fn offset(&self, x: Point) -> Point {
        let mut d = geom::sub(x, self.center);
        if self.kind == SurfaceKind::Circle {
            d[2] = 0.0;
        }
        d
    }

    /// `|x - center| - radius`: negative inside, positive outside.
    pub fn signed_distance(&self, x: Point) -> f64 {
        geom::norm(self.offset(x)) - self.radius
    }

    /// Exact exterior unit normal of the level sets, `grad rho(x)`.
    pub fn normal(&self, x: Point) -> Result<Point> {
        let d = self.offset(x);
        let r = geom::norm(d);
        if r <= CENTER_TOLERANCE {
            return Err(Error::ProjectionUndefined);
        }
        Ok(geom::scale(d, 1.0 / r))
    }

    /// Nearest point on the surface.
    pub fn closest_point(&self, x: Point) -> Result<Point> {
        let n = self.normal(x)?;
        let mut p = geom::add(self.center, geom::scale(n, self.radius));
        if self.kind == SurfaceKind::Circle {
            p[2] = x[2];
        }
        Ok(p)
    }

    /// Extension of a surface function constant along normals, `g(p(x))`.
    pub fn extend<F>(&self, g: F, x: Point) -> Result<f64>
    where
        F: Fn(Point) -> f64,
    {
        Ok(g(self.closest_point(x)?))
    }

    /// Surface measure (circumference or area).
    pub fn measure(&self) -> f64 {
        match self.kind {
            SurfaceKind::Circle => 2.0 * std::f64::consts::PI * self.radius,
            SurfaceKind::Sphere => 4.0 * std::f64::consts::PI * self.radius * self.radius,
        }
    }
}

/// Nodal (P1 Lagrange) interpolant of the signed distance on a background mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetField {
    pub surface: AnalyticSurface,
    pub nodal_values: Vec<f64>,
    pub h: f64,
}

/// Relative size (in units of `h`) of the shift applied to vanishing nodal values.
pub const ZERO_PERTURBATION: f64 = 1e-12;

impl LevelSetField {
    /// Interpolates the signed distance at the mesh nodes. Values with
    /// magnitude below `1e-12 h` are replaced by `+1e-12 h`, so no node lies
    /// exactly on the discrete surface.
    pub fn interpolate(surface: &AnalyticSurface, mesh: &BackgroundMesh) -> Self {
        let eps = ZERO_PERTURBATION * mesh.h();
        let nodal_values = mesh
            .nodes()
            .iter()
            .map(|&x| {
                let v = surface.signed_distance(x);
                if v.abs() < eps {
                    eps
                } else {
                    v
                }
            })
            .collect();
        Self {
            surface: *surface,
            nodal_values,
            h: mesh.h(),
        }
    }

    pub fn cell_values(&self, mesh: &BackgroundMesh, c: usize) -> Vec<f64> {
        mesh.cell(c).iter().map(|&v| self.nodal_values[v]).collect()
    }
}
