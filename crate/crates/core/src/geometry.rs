//! Structured triangulations of rectangles and L-shaped domains, the exact
//! distance to the boundary, cutoff functions and P1 calculus on the mesh.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::fmt_f64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("resolution too coarse: {interior} interior nodes along {axis}, need at least 3")]
    ResolutionTooCoarse { axis: &'static str, interior: usize },
    #[error("cutoff ramp unresolved: 1/(2m) = {ramp} is below 2h = {two_h}")]
    RampUnresolved { ramp: f64, two_h: f64 },
    #[error("field has {got} values, mesh has {expected} nodes")]
    FieldSize { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, GeometryError>;

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Rectangle { width: f64, height: f64 },
    /// Outer square `[0, outer]^2` with the square `[0, notch]^2` removed,
    /// leaving a reentrant corner at `(notch, notch)`.
    LShape { outer: f64, notch: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub shape: Shape,
    /// Grid steps per unit length; the mesh size is `1 / resolution`.
    pub resolution: usize,
}

impl DomainSpec {
    pub fn unit_square(resolution: usize) -> Self {
        Self {
            shape: Shape::Rectangle {
                width: 1.0,
                height: 1.0,
            },
            resolution,
        }
    }

    pub fn l_shape(outer: f64, notch: f64, resolution: usize) -> Self {
        Self {
            shape: Shape::LShape { outer, notch },
            resolution,
        }
    }

    pub fn with_resolution(&self, resolution: usize) -> Self {
        Self {
            shape: self.shape,
            resolution,
        }
    }

    pub fn area(&self) -> f64 {
        match self.shape {
            Shape::Rectangle { width, height } => width * height,
            Shape::LShape { outer, notch } => outer * outer - notch * notch,
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self.shape {
            Shape::Rectangle { width, height } => 2.0 * (width + height),
            Shape::LShape { outer, .. } => 4.0 * outer,
        }
    }

    /// Counter-clockwise boundary polygon.
    pub fn boundary_polygon(&self) -> Vec<Point> {
        match self.shape {
            Shape::Rectangle { width, height } => {
                vec![[0.0, 0.0], [width, 0.0], [width, height], [0.0, height]]
            }
            Shape::LShape { outer, notch } => vec![
                [notch, 0.0],
                [outer, 0.0],
                [outer, outer],
                [0.0, outer],
                [0.0, notch],
                [notch, notch],
            ],
        }
    }
}

// Number of grid steps covering `len`, which must be a whole multiple of h.
fn steps(len: f64, resolution: usize, what: &str) -> Result<usize> {
    if !(len.is_finite() && len > 0.0) {
        return Err(GeometryError::InvalidDomain(format!(
            "{what} must be positive, got {len}"
        )));
    }
    let exact = len * resolution as f64;
    let n = exact.round();
    if (exact - n).abs() > 1e-9 * exact.max(1.0) {
        return Err(GeometryError::InvalidDomain(format!(
            "{what} = {len} is not a multiple of h = 1/{resolution}"
        )));
    }
    Ok(n as usize)
}

fn require_interior(axis: &'static str, cells: usize) -> Result<()> {
    let interior = cells.saturating_sub(1);
    if interior < 3 {
        return Err(GeometryError::ResolutionTooCoarse { axis, interior });
    }
    Ok(())
}

/// Euclidean distance from `p` to the segment `[a, b]`.
pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let (px, py) = (p[0] - a[0], p[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        ((px * dx + py * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (ex, ey) = (px - t * dx, py - t * dy);
    ex.hypot(ey)
}

pub fn polygon_distance(p: Point, polygon: &[Point]) -> f64 {
    let n = polygon.len();
    (0..n)
        .map(|i| segment_distance(p, polygon[i], polygon[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Nodal values of a continuous piecewise-linear function.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField(pub Vec<f64>);

impl ScalarField {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn from_fn(mesh: &DomainMesh, f: impl Fn(f64, f64) -> f64) -> Self {
        Self(mesh.nodes.iter().map(|p| f(p[0], p[1])).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sup_distance(&self, other: &ScalarField) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }
}

#[derive(Debug, Clone)]
pub struct DomainMesh {
    pub spec: DomainSpec,
    pub nodes: Vec<Point>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_mask: Vec<bool>,
    /// Exact distance of each node to the boundary.
    pub dist: Vec<f64>,
    pub h: f64,
}

pub fn build_mesh(spec: &DomainSpec) -> Result<DomainMesh> {
    if spec.resolution == 0 {
        return Err(GeometryError::InvalidDomain("resolution must be positive".into()));
    }
    let res = spec.resolution;
    let h = 1.0 / res as f64;
    // (cells in x, cells in y, notch cells)
    let (nx, ny, nn) = match spec.shape {
        Shape::Rectangle { width, height } => {
            let nx = steps(width, res, "width")?;
            let ny = steps(height, res, "height")?;
            require_interior("x", nx)?;
            require_interior("y", ny)?;
            (nx, ny, 0)
        }
        Shape::LShape { outer, notch } => {
            let no = steps(outer, res, "outer side")?;
            let nn = steps(notch, res, "notch side")?;
            if nn >= no {
                return Err(GeometryError::InvalidDomain(format!(
                    "notch {notch} must be strictly smaller than outer side {outer}"
                )));
            }
            require_interior("x", no)?;
            require_interior("arm width", no - nn + 1)?;
            (no, no, nn)
        }
    };

    let in_notch_node = |i: usize, j: usize| i < nn && j < nn;
    let mut index = vec![usize::MAX; (nx + 1) * (ny + 1)];
    let mut nodes = Vec::new();
    let mut boundary_mask = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            if in_notch_node(i, j) {
                continue;
            }
            index[j * (nx + 1) + i] = nodes.len();
            nodes.push([i as f64 * h, j as f64 * h]);
            let outer = i == 0 || j == 0 || i == nx || j == ny;
            let notch_edge = nn > 0 && ((i == nn && j <= nn) || (j == nn && i <= nn));
            boundary_mask.push(outer || notch_edge);
        }
    }

    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            if i < nn && j < nn {
                continue;
            }
            let id = |a: usize, b: usize| index[b * (nx + 1) + a];
            let (v00, v10, v11, v01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }

    let polygon = spec.boundary_polygon();
    let dist = nodes
        .iter()
        .zip(&boundary_mask)
        .map(|(&p, &b)| if b { 0.0 } else { polygon_distance(p, &polygon) })
        .collect();

    Ok(DomainMesh {
        spec: *spec,
        nodes,
        triangles,
        boundary_mask,
        dist,
        h,
    })
}

impl DomainMesh {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]))
    }

    /// Gradients of the three barycentric hat functions on triangle `t`.
    pub fn hat_gradients(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        let two_area = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
        [
            [(pb[1] - pc[1]) / two_area, (pc[0] - pb[0]) / two_area],
            [(pc[1] - pa[1]) / two_area, (pa[0] - pc[0]) / two_area],
            [(pa[1] - pb[1]) / two_area, (pb[0] - pa[0]) / two_area],
        ]
    }

    pub fn check_field(&self, field: &ScalarField) -> Result<()> {
        if field.len() != self.num_nodes() {
            return Err(GeometryError::FieldSize {
                expected: self.num_nodes(),
                got: field.len(),
            });
        }
        Ok(())
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.boundary_mask
            .iter()
            .enumerate()
            .filter(|(_, &b)| !b)
            .map(|(i, _)| i)
    }

    /// Index of the node at `p`, if `p` coincides with a node.
    pub fn node_at(&self, p: Point) -> Option<usize> {
        let tol = 1e-9 * self.h;
        self.nodes
            .iter()
            .position(|q| (q[0] - p[0]).abs() <= tol && (q[1] - p[1]).abs() <= tol)
    }

    pub fn write_mesh_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "triangle,v0,v1,v2")?;
        for (t, tri) in self.triangles.iter().enumerate() {
            writeln!(w, "{t},{},{},{}", tri[0], tri[1], tri[2])?;
        }
        Ok(())
    }

    pub fn write_field_csv<W: Write>(&self, field: &ScalarField, mut w: W) -> io::Result<()> {
        writeln!(w, "x,y,value")?;
        for (p, v) in self.nodes.iter().zip(field.values()) {
            writeln!(w, "{},{},{}", fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(*v))?;
        }
        Ok(())
    }
}

/// Piecewise-linear cutoff `clamp(2 m d - 1, 0, 1)` of the boundary distance.
#[derive(Debug, Clone)]
pub struct CutoffFamily {
    pub m: u32,
    pub values: ScalarField,
}

pub fn cutoff(mesh: &DomainMesh, m: u32) -> Result<CutoffFamily> {
    let ramp = 1.0 / (2.0 * f64::from(m.max(1)));
    if m == 0 || ramp < 2.0 * mesh.h {
        return Err(GeometryError::RampUnresolved {
            ramp,
            two_h: 2.0 * mesh.h,
        });
    }
    let two_m = 2.0 * f64::from(m);
    let values = mesh
        .dist
        .iter()
        .map(|&d| (two_m * d - 1.0).clamp(0.0, 1.0))
        .collect();
    Ok(CutoffFamily {
        m,
        values: ScalarField(values),
    })
}

/// Constant gradient of the P1 interpolant on every triangle.
pub fn p1_gradient(mesh: &DomainMesh, field: &ScalarField) -> Vec<[f64; 2]> {
    let v = field.values();
    (0..mesh.triangles.len())
        .map(|t| {
            let tri = mesh.triangles[t];
            let g = mesh.hat_gradients(t);
            let mut out = [0.0; 2];
            for k in 0..3 {
                out[0] += v[tri[k]] * g[k][0];
                out[1] += v[tri[k]] * g[k][1];
            }
            out
        })
        .collect()
}

/// Recovered nodal gradient: area-weighted average of the gradients on the
/// incident triangles. The average is accumulated relative to the first
/// incident value so that identical inputs are reproduced bit-exactly.
pub fn recover_nodal_gradient(mesh: &DomainMesh, tri_grad: &[[f64; 2]]) -> [ScalarField; 2] {
    let n = mesh.num_nodes();
    let mut reference: Vec<Option<[f64; 2]>> = vec![None; n];
    let mut acc = vec![[0.0f64; 2]; n];
    let mut weight = vec![0.0f64; n];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let a = mesh.area(t);
        let g = tri_grad[t];
        for &v in tri {
            let r = *reference[v].get_or_insert(g);
            acc[v][0] += a * (g[0] - r[0]);
            acc[v][1] += a * (g[1] - r[1]);
            weight[v] += a;
        }
    }
    let mut gx = Vec::with_capacity(n);
    let mut gy = Vec::with_capacity(n);
    for v in 0..n {
        let r = reference[v].unwrap_or([0.0; 2]);
        if weight[v] > 0.0 {
            gx.push(r[0] + acc[v][0] / weight[v]);
            gy.push(r[1] + acc[v][1] / weight[v]);
        } else {
            gx.push(r[0]);
            gy.push(r[1]);
        }
    }
    [ScalarField(gx), ScalarField(gy)]
}

/// `sum_T area(T) * value(T)`.
pub fn integrate(mesh: &DomainMesh, triangle_values: &[f64]) -> f64 {
    triangle_values
        .iter()
        .enumerate()
        .map(|(t, v)| mesh.area(t) * v)
        .sum()
}

/// Values of a P1 field at the three edge midpoints of triangle `t`.
pub fn edge_midpoint_values(mesh: &DomainMesh, field: &ScalarField, t: usize) -> [f64; 3] {
    let [a, b, c] = mesh.triangles[t];
    let v = field.values();
    [
        0.5 * (v[a] + v[b]),
        0.5 * (v[b] + v[c]),
        0.5 * (v[c] + v[a]),
    ]
}

/// Edge-midpoint quadrature weight average of `g` applied to a P1 field.
pub fn midpoint_average(
    mesh: &DomainMesh,
    field: &ScalarField,
    t: usize,
    g: impl Fn(f64) -> f64,
) -> f64 {
    let m = edge_midpoint_values(mesh, field, t);
    (g(m[0]) + g(m[1]) + g(m[2])) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn unit_square_distances() {
        let mesh = build_mesh(&DomainSpec::unit_square(10)).unwrap();
        let c = mesh.node_at([0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(mesh.dist[c], 0.5, epsilon = 1e-15);
        let p = mesh.node_at([0.1, 0.3]).unwrap();
        assert_abs_diff_eq!(mesh.dist[p], 0.1, epsilon = 1e-15);
        for (i, &b) in mesh.boundary_mask.iter().enumerate() {
            if b {
                assert_eq!(mesh.dist[i], 0.0);
            } else {
                assert!(mesh.dist[i] > 0.0);
            }
        }
    }

    #[test]
    fn l_shape_reentrant_corner_distance() {
        let spec = DomainSpec::l_shape(1.0, 0.5, 64);
        let mesh = build_mesh(&spec).unwrap();
        let poly = spec.boundary_polygon();
        // Brute-force oracle: dense sampling of the boundary.
        let mut samples = Vec::new();
        for i in 0..poly.len() {
            let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
            let k = 200_000;
            for s in 0..=k {
                let t = s as f64 / k as f64;
                samples.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            }
        }
        let brute = |p: Point| {
            samples
                .iter()
                .map(|q| (p[0] - q[0]).hypot(p[1] - q[1]))
                .fold(f64::INFINITY, f64::min)
        };
        for k in 1..4 {
            let eps = k as f64 / 64.0;
            let id = mesh.node_at([0.5 + eps, 0.5 + eps]).unwrap();
            assert_abs_diff_eq!(mesh.dist[id], eps * 2f64.sqrt(), epsilon = 1e-12);
            assert_abs_diff_eq!(mesh.dist[id], brute(mesh.nodes[id]), epsilon = 1e-9);
        }
        let area: f64 = (0..mesh.triangles.len()).map(|t| mesh.area(t)).sum();
        assert_abs_diff_eq!(area, 0.75, epsilon = 1e-14);
        // no node inside the notch
        assert!(mesh.nodes.iter().all(|p| !(p[0] < 0.5 && p[1] < 0.5)));
    }

    #[test]
    fn triangles_are_positive_with_uniform_area() {
        for spec in [DomainSpec::unit_square(8), DomainSpec::l_shape(1.0, 0.5, 8)] {
            let mesh = build_mesh(&spec).unwrap();
            let h = mesh.h;
            for t in 0..mesh.triangles.len() {
                assert_abs_diff_eq!(mesh.area(t), h * h / 2.0, epsilon = 1e-16);
            }
        }
    }

    #[test]
    fn dist_is_one_lipschitz_across_edges() {
        let mesh = build_mesh(&DomainSpec::l_shape(1.0, 0.5, 32)).unwrap();
        for tri in &mesh.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let (pa, pb) = (mesh.nodes[a], mesh.nodes[b]);
                let len = (pa[0] - pb[0]).hypot(pa[1] - pb[1]);
                assert!((mesh.dist[a] - mesh.dist[b]).abs() <= len * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn coarse_and_invalid_domains() {
        assert!(matches!(
            build_mesh(&DomainSpec::unit_square(3)),
            Err(GeometryError::ResolutionTooCoarse { .. })
        ));
        assert!(build_mesh(&DomainSpec::unit_square(4)).is_ok());
        assert!(matches!(
            build_mesh(&DomainSpec::l_shape(1.0, 1.0, 8)),
            Err(GeometryError::InvalidDomain(_))
        ));
        assert!(build_mesh(&DomainSpec::l_shape(1.0, 0.3, 8)).is_err());
        let bad = DomainSpec {
            shape: Shape::Rectangle {
                width: -1.0,
                height: 1.0,
            },
            resolution: 8,
        };
        assert!(build_mesh(&bad).is_err());
    }

    #[test]
    fn cutoff_values_and_gradient_bound() {
        let mesh = build_mesh(&DomainSpec::unit_square(64)).unwrap();
        let m = 4;
        let phi = cutoff(&mesh, m).unwrap();
        for (&d, &v) in mesh.dist.iter().zip(phi.values.values()) {
            assert!((0.0..=1.0).contains(&v));
            if d >= 1.0 / m as f64 {
                assert_eq!(v, 1.0);
            }
            if d <= 1.0 / (2.0 * m as f64) {
                assert_eq!(v, 0.0);
            }
            if (d - 3.0 / (4.0 * m as f64)).abs() < 1e-15 {
                assert_abs_diff_eq!(v, 0.5, epsilon = 1e-12);
            }
        }
        let grads = p1_gradient(&mesh, &phi.values);
        let bound = 2.0 * m as f64 * (1.0 + 1e-12);
        let mut support = 0.0;
        for (t, g) in grads.iter().enumerate() {
            let norm = g[0].hypot(g[1]);
            // The interpolant of the distance can reach sqrt(2) times its
            // Lipschitz constant only where the triangle straddles the
            // corner bisector x + y = 1 or x = y.
            if norm > bound {
                let near_ridge = mesh.triangles[t].iter().any(|&v| {
                    let [x, y] = mesh.nodes[v];
                    (x + y - 1.0).abs() <= 2.0 * mesh.h || (x - y).abs() <= 2.0 * mesh.h
                });
                assert!(near_ridge, "triangle {t}: {norm}");
                assert!(norm <= 2f64.sqrt() * bound, "triangle {t}: {norm}");
            }
            if norm > 0.0 {
                support += mesh.area(t);
            }
        }
        assert!(support <= 4.0 * mesh.spec.perimeter() / m as f64);
        assert!(matches!(cutoff(&mesh, 32), Err(GeometryError::RampUnresolved { .. })));
        assert!(cutoff(&mesh, 16).is_ok());
    }

    #[test]
    fn p1_gradient_reproduces_affine_fields() {
        let mesh = build_mesh(&DomainSpec::l_shape(1.0, 0.5, 16)).unwrap();
        let f = ScalarField::from_fn(&mesh, |x, y| 2.0 * x - y);
        for g in p1_gradient(&mesh, &f) {
            assert_abs_diff_eq!(g[0], 2.0, epsilon = 1e-13);
            assert_abs_diff_eq!(g[1], -1.0, epsilon = 1e-13);
        }
        let c = ScalarField(vec![3.7; mesh.num_nodes()]);
        for g in p1_gradient(&mesh, &c) {
            assert_eq!(g, [0.0, 0.0]);
        }
    }

    #[test]
    fn hat_function_gradient_magnitude() {
        let mesh = build_mesh(&DomainSpec::unit_square(8)).unwrap();
        let node = mesh.node_at([0.5, 0.5]).unwrap();
        let mut hat = ScalarField::zeros(mesh.num_nodes());
        hat.0[node] = 1.0;
        let grads = p1_gradient(&mesh, &hat);
        // On the reference patch the node is an acute vertex of four
        // triangles (|grad| = 1/h) and the right-angle vertex of two
        // (|grad| = sqrt(2)/h).
        let (mut acute, mut right) = (0, 0);
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let norm = grads[t][0].hypot(grads[t][1]);
            if tri.contains(&node) {
                if (norm - 1.0 / mesh.h).abs() < 1e-12 {
                    acute += 1;
                } else {
                    assert_abs_diff_eq!(norm, 2f64.sqrt() / mesh.h, epsilon = 1e-12);
                    right += 1;
                }
            } else {
                assert_eq!(norm, 0.0);
            }
        }
        assert_eq!((acute, right), (4, 2));
    }

    #[test]
    fn integrate_areas_and_linear_functions() {
        let sq = build_mesh(&DomainSpec::unit_square(16)).unwrap();
        assert_eq!(integrate(&sq, &vec![1.0; sq.triangles.len()]), 1.0);
        let l = build_mesh(&DomainSpec::l_shape(1.0, 0.5, 16)).unwrap();
        assert_eq!(integrate(&l, &vec![1.0; l.triangles.len()]), 0.75);
        let x = ScalarField::from_fn(&sq, |x, _| x);
        let avg: Vec<f64> = sq
            .triangles
            .iter()
            .map(|tri| tri.iter().map(|&v| x.0[v]).sum::<f64>() / 3.0)
            .collect();
        assert_abs_diff_eq!(integrate(&sq, &avg), 0.5, epsilon = 1e-14);
        let mid: Vec<f64> = (0..sq.triangles.len())
            .map(|t| midpoint_average(&sq, &x, t, |v| v * v))
            .collect();
        // edge-midpoint rule is exact for quadratics
        assert_abs_diff_eq!(integrate(&sq, &mid), 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn recovery_is_exact_for_constant_gradients() {
        let mesh = build_mesh(&DomainSpec::unit_square(16)).unwrap();
        let f = ScalarField::from_fn(&mesh, |x, y| 2.0 * x - y);
        let g = p1_gradient(&mesh, &f);
        let [gx, gy] = recover_nodal_gradient(&mesh, &g);
        assert!(gx.values().iter().all(|&v| v == 2.0));
        assert!(gy.values().iter().all(|&v| v == -1.0));
        for d in p1_gradient(&mesh, &gx) {
            assert_eq!(d, [0.0, 0.0]);
        }
    }

    #[test]
    fn csv_exports() {
        let mesh = build_mesh(&DomainSpec::unit_square(4)).unwrap();
        let mut buf = Vec::new();
        mesh.write_field_csv(&ScalarField::zeros(mesh.num_nodes()), &mut buf)
            .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,y,value\n"));
        assert_eq!(text.lines().count(), 26);
        let mut buf = Vec::new();
        mesh.write_mesh_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 33);
    }
}
