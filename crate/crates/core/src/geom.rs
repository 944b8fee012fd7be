//! Small fixed-size vector helpers. Points are always stored with three
//! components; two-dimensional data keeps `z = 0`.

pub type Point = [f64; 3];

#[inline]
pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn lerp(a: Point, b: Point, t: f64) -> Point {
    add(a, scale(sub(b, a), t))
}

pub fn centroid(points: &[Point]) -> Point {
    let s = points.iter().fold([0.0; 3], |acc, p| add(acc, *p));
    scale(s, 1.0 / points.len() as f64)
}

/// Measure of the simplex spanned by `points` (length, area or volume,
/// depending on the number of points).
pub fn simplex_measure(points: &[Point]) -> f64 {
    match points.len() {
        2 => norm(sub(points[1], points[0])),
        3 => 0.5 * norm(cross(sub(points[1], points[0]), sub(points[2], points[0]))),
        4 => {
            let a = sub(points[1], points[0]);
            let b = sub(points[2], points[0]);
            let c = sub(points[3], points[0]);
            dot(a, cross(b, c)).abs() / 6.0
        }
        n => panic!("simplex with {n} vertices"),
    }
}

/// Gradients of the barycentric (P1 nodal) basis functions of a `dim`-simplex.
///
/// Entries `dim + 1..` are left at zero. The gradient of vertex 0 is
/// `-(sum of the others)` so the gradients sum to zero up to rounding.
pub fn p1_gradients(vertices: &[Point], dim: usize) -> [Point; 4] {
    let mut grads = [[0.0; 3]; 4];
    match dim {
        2 => {
            let e1 = sub(vertices[1], vertices[0]);
            let e2 = sub(vertices[2], vertices[0]);
            let det = e1[0] * e2[1] - e1[1] * e2[0];
            // rows of J^{-T} where J = [e1 e2]
            grads[1] = [e2[1] / det, -e2[0] / det, 0.0];
            grads[2] = [-e1[1] / det, e1[0] / det, 0.0];
        }
        3 => {
            let e1 = sub(vertices[1], vertices[0]);
            let e2 = sub(vertices[2], vertices[0]);
            let e3 = sub(vertices[3], vertices[0]);
            let det = dot(e1, cross(e2, e3));
            grads[1] = scale(cross(e2, e3), 1.0 / det);
            grads[2] = scale(cross(e3, e1), 1.0 / det);
            grads[3] = scale(cross(e1, e2), 1.0 / det);
        }
        _ => panic!("unsupported dimension {dim}"),
    }
    let mut g0 = [0.0; 3];
    for g in &grads[1..=dim] {
        g0 = sub(g0, *g);
    }
    grads[0] = g0;
    grads
}

/// Barycentric coordinates of `x` in the simplex with basis gradients `grads`
/// and first vertex `v0`.
pub fn barycentric(grads: &[Point; 4], v0: Point, x: Point, dim: usize) -> [f64; 4] {
    let d = sub(x, v0);
    let mut lam = [0.0; 4];
    for i in 1..=dim {
        lam[i] = dot(grads[i], d);
    }
    lam[0] = 1.0 - lam[1..=dim].iter().sum::<f64>();
    lam
}
