//! Icosahedral geodesic grid on the unit sphere: construction, uniform
//! refinement, point location and integration over spherical triangles.
//!
//! Integration maps a planar-triangle quadrature rule through the central
//! projection `x -> x / |x|`. For a planar point `x = xi1 x1 + xi2 x2 + xi3 x3`
//! the solid-angle element is `det(x1, x2, x3) / |x|^3 dxi1 dxi2`, which is
//! positive because triangles are stored with outward orientation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::quadrature::TriangleRule;

pub type Vec3 = Vector3<f64>;

/// Golden ratio.
pub const GOLDEN: f64 = 1.618_033_988_749_894_8;

/// Tolerance used when deciding whether a direction lies inside a triangle.
pub const CONTAINMENT_TOL: f64 = 1e-13;

/// Areal coordinates of a point in a (planar) triangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BarycentricPoint {
    pub xi: [f64; 3],
}

impl BarycentricPoint {
    pub fn new(xi1: f64, xi2: f64, xi3: f64) -> Result<Self> {
        let xi = [xi1, xi2, xi3];
        if xi.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite barycentric coordinate".into()));
        }
        if (xi1 + xi2 + xi3 - 1.0).abs() > 1e-14 {
            return Err(Error::InvalidArgument(format!(
                "barycentric coordinates sum to {}, not 1",
                xi1 + xi2 + xi3
            )));
        }
        if xi.iter().any(|&v| !(-1e-14..=1.0 + 1e-14).contains(&v)) {
            return Err(Error::InvalidArgument(format!(
                "barycentric coordinates {xi:?} outside the simplex"
            )));
        }
        Ok(BarycentricPoint { xi })
    }

    pub fn centroid() -> Self {
        BarycentricPoint {
            xi: [1.0 / 3.0; 3],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicGrid {
    level: usize,
    vertices: Vec<Vec3>,
    edges: Vec<[usize; 2]>,
    triangles: Vec<[usize; 3]>,
    neighbors: Vec<Vec<usize>>,
    vertex_triangles: Vec<Vec<usize>>,
}

/// Closed-form vertex, edge and triangle counts after `k` refinements.
pub fn expected_counts(k: i64) -> Result<(usize, usize, usize)> {
    if k < 0 {
        return Err(Error::InvalidArgument(format!(
            "refinement level must be non-negative, got {k}"
        )));
    }
    if k > 20 {
        return Err(Error::InvalidArgument(format!("refinement level {k} is too large")));
    }
    let k = k as u32;
    let geometric: usize = (0..k).map(|i| 4usize.pow(i)).sum();
    let points = 12 * 4usize.pow(k) - 6 * geometric;
    Ok((points, 3 * (points - 2), 2 * (points - 2)))
}

fn default_rule() -> &'static TriangleRule {
    static RULE: OnceLock<TriangleRule> = OnceLock::new();
    RULE.get_or_init(TriangleRule::default)
}

impl GeodesicGrid {
    /// The regular icosahedron, vertices in the order of the three cyclic
    /// families `(0, ±1, ±φ)`, `(±1, ±φ, 0)`, `(±φ, 0, ±1)`.
    pub fn base_icosahedron() -> Self {
        let s = 1.0 / (1.0 + GOLDEN * GOLDEN).sqrt();
        let mut vertices = Vec::with_capacity(12);
        for (a, b) in [(1.0, GOLDEN), (1.0, -GOLDEN), (-1.0, GOLDEN), (-1.0, -GOLDEN)] {
            vertices.push(Vec3::new(0.0, a * s, b * s));
        }
        for (a, b) in [(1.0, GOLDEN), (1.0, -GOLDEN), (-1.0, GOLDEN), (-1.0, -GOLDEN)] {
            vertices.push(Vec3::new(a * s, b * s, 0.0));
        }
        for (a, b) in [(GOLDEN, 1.0), (GOLDEN, -1.0), (-GOLDEN, 1.0), (-GOLDEN, -1.0)] {
            vertices.push(Vec3::new(a * s, 0.0, b * s));
        }

        // Neighbours sit at the minimum pairwise distance 2s.
        let edge_len2 = 4.0 * s * s;
        let mut adjacent = [[false; 12]; 12];
        for i in 0..12 {
            for j in (i + 1)..12 {
                if ((vertices[i] - vertices[j]).norm_squared() - edge_len2).abs() < 1e-9 {
                    adjacent[i][j] = true;
                    adjacent[j][i] = true;
                }
            }
        }
        let mut triangles = Vec::with_capacity(20);
        for i in 0..12 {
            for j in (i + 1)..12 {
                for k in (j + 1)..12 {
                    if adjacent[i][j] && adjacent[j][k] && adjacent[i][k] {
                        triangles.push(orient_outward(&vertices, [i, j, k]));
                    }
                }
            }
        }
        Self::from_parts(0, vertices, triangles)
    }

    /// Grid after `k` uniform refinements of the icosahedron.
    pub fn with_level(k: usize) -> Self {
        let mut grid = Self::base_icosahedron();
        for _ in 0..k {
            grid = grid.refine();
        }
        grid
    }

    fn from_parts(level: usize, vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Self {
        let mut edge_set = std::collections::BTreeSet::new();
        for t in &triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                edge_set.insert(edge_key(a, b));
            }
        }
        let edges: Vec<[usize; 2]> = edge_set.into_iter().map(|(a, b)| [a, b]).collect();
        let mut neighbors = vec![Vec::new(); vertices.len()];
        for &[a, b] in &edges {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for n in &mut neighbors {
            n.sort_unstable();
        }
        let mut vertex_triangles = vec![Vec::new(); vertices.len()];
        for (ti, t) in triangles.iter().enumerate() {
            for &v in t {
                vertex_triangles[v].push(ti);
            }
        }
        GeodesicGrid {
            level,
            vertices,
            edges,
            triangles,
            neighbors,
            vertex_triangles,
        }
    }

    /// Bisects every edge, projects the midpoints onto the sphere and splits
    /// each triangle into four. Parent vertices keep their indices; midpoints
    /// follow in ascending `(min, max)` edge-key order.
    pub fn refine(&self) -> Self {
        let n = self.vertices.len();
        let mut vertices = self.vertices.clone();
        let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (offset, &[a, b]) in self.edges.iter().enumerate() {
            let c = (self.vertices[a] + self.vertices[b]) * 0.5;
            vertices.push(c / c.norm());
            midpoint.insert((a, b), n + offset);
        }
        let mid = |a: usize, b: usize| midpoint[&edge_key(a, b)];
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
            triangles.push([a, ab, ca]);
            triangles.push([b, bc, ab]);
            triangles.push([c, ca, bc]);
            triangles.push([ab, bc, ca]);
        }
        Self::from_parts(self.level + 1, vertices, triangles)
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn incident_triangles(&self, v: usize) -> &[usize] {
        &self.vertex_triangles[v]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        (self.vertices.len(), self.edges.len(), self.triangles.len())
    }

    pub fn triangle_vertices(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Planar combination `xi1 x1 + xi2 x2 + xi3 x3` projected onto the sphere.
    pub fn barycentric_to_unit_vector(&self, t: usize, p: BarycentricPoint) -> Vec3 {
        let [x1, x2, x3] = self.triangle_vertices(t);
        let x = x1 * p.xi[0] + x2 * p.xi[1] + x3 * p.xi[2];
        x / x.norm()
    }

    /// Areal coordinates of the planar point that projects onto `omega`, or
    /// `None` if the ray through `omega` does not meet the triangle's plane
    /// on the positive side.
    pub fn planar_barycentric(&self, t: usize, omega: &Vec3) -> Option<[f64; 3]> {
        let [x1, x2, x3] = self.triangle_vertices(t);
        let m = Matrix3::from_columns(&[x1, x2, x3]);
        let sol = m.lu().solve(omega)?;
        let sum = sol.x + sol.y + sol.z;
        if sum <= 0.0 {
            return None;
        }
        Some([sol.x / sum, sol.y / sum, sol.z / sum])
    }

    pub fn nearest_vertex(&self, omega: &Vec3) -> usize {
        let mut best = 0;
        let mut best_dot = f64::NEG_INFINITY;
        for (i, v) in self.vertices.iter().enumerate() {
            let d = v.dot(omega);
            if d > best_dot {
                best_dot = d;
                best = i;
            }
        }
        best
    }

    /// Lowest-index triangle containing the direction `omega`, together with
    /// its areal coordinates.
    pub fn locate(&self, omega: &Vec3) -> (usize, [f64; 3]) {
        let inside = |t: usize| -> Option<[f64; 3]> {
            let xi = self.planar_barycentric(t, omega)?;
            xi.iter().all(|&c| c >= -CONTAINMENT_TOL).then_some(xi)
        };
        let near = self.nearest_vertex(omega);
        let mut found: Option<(usize, [f64; 3])> = None;
        for &t in &self.vertex_triangles[near] {
            if let Some(xi) = inside(t) {
                if found.is_none_or(|(best, _)| t < best) {
                    found = Some((t, xi));
                }
            }
        }
        if let Some(hit) = found {
            return hit;
        }
        for t in 0..self.triangles.len() {
            if let Some(xi) = inside(t) {
                return (t, xi);
            }
        }
        // Unreachable for a closed triangulation; fall back to the best candidate.
        let t = self.vertex_triangles[near][0];
        (t, self.planar_barycentric(t, omega).unwrap_or([1.0, 0.0, 0.0]))
    }

    /// Exact solid angle of the spherical triangle (Van Oosterom-Strackee).
    pub fn spherical_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_vertices(t);
        let num = a.dot(&b.cross(&c)).abs();
        let den = 1.0 + a.dot(&b) + b.dot(&c) + c.dot(&a);
        2.0 * num.atan2(den)
    }

    /// `∫ f dΩ` over spherical triangle `t`.
    pub fn integrate_triangle<F: FnMut(&Vec3) -> f64>(&self, t: usize, f: F) -> f64 {
        self.integrate_subtriangle_with(default_rule(), t, IDENTITY_CORNERS, f)
    }

    /// Integrates over the part of triangle `t` whose planar pre-image is the
    /// sub-triangle with barycentric corners `corners`.
    pub fn integrate_subtriangle<F: FnMut(&Vec3) -> f64>(
        &self,
        t: usize,
        corners: [[f64; 3]; 3],
        f: F,
    ) -> f64 {
        self.integrate_subtriangle_with(default_rule(), t, corners, f)
    }

    pub fn integrate_subtriangle_with<F: FnMut(&Vec3) -> f64>(
        &self,
        rule: &TriangleRule,
        t: usize,
        corners: [[f64; 3]; 3],
        mut f: F,
    ) -> f64 {
        let mut total = 0.0;
        self.for_each_node(rule, t, corners, |omega, _xi, w| total += w * f(omega));
        total
    }

    /// Visits every quadrature node of the (sub-)triangle with the projected
    /// direction, the planar areal coordinates and the solid-angle weight.
    ///
    /// Triangles wider than [`MAX_PANEL_ANGLE`] are split into `4^s`
    /// congruent barycentric panels so the rule stays accurate on the coarse
    /// levels.
    pub fn for_each_node<F: FnMut(&Vec3, &[f64; 3], f64)>(
        &self,
        rule: &TriangleRule,
        t: usize,
        corners: [[f64; 3]; 3],
        mut visit: F,
    ) {
        let [x1, x2, x3] = self.triangle_vertices(t);
        let widest = [x1.angle(&x2), x2.angle(&x3), x3.angle(&x1)]
            .into_iter()
            .fold(0.0, f64::max);
        let mut splits = 0;
        while widest / f64::from(1u32 << splits) > MAX_PANEL_ANGLE {
            splits += 1;
        }
        let mut panels = vec![corners];
        for _ in 0..splits {
            panels = panels.into_iter().flat_map(split_panel).collect();
        }
        for panel in panels {
            self.visit_panel(rule, t, panel, &mut visit);
        }
    }

    fn visit_panel<F: FnMut(&Vec3, &[f64; 3], f64)>(
        &self,
        rule: &TriangleRule,
        t: usize,
        corners: [[f64; 3]; 3],
        visit: &mut F,
    ) {
        let [x1, x2, x3] = self.triangle_vertices(t);
        let det = x1.dot(&x2.cross(&x3));
        let [p, q, r] = corners;
        let jac = ((p[0] - r[0]) * (q[1] - r[1]) - (q[0] - r[0]) * (p[1] - r[1])).abs();
        for (lam, &w) in rule.points.iter().zip(&rule.weights) {
            let xi = [
                lam[0] * p[0] + lam[1] * q[0] + lam[2] * r[0],
                lam[0] * p[1] + lam[1] * q[1] + lam[2] * r[1],
                lam[0] * p[2] + lam[1] * q[2] + lam[2] * r[2],
            ];
            let x = x1 * xi[0] + x2 * xi[1] + x3 * xi[2];
            let norm = x.norm();
            let omega = x / norm;
            visit(&omega, &xi, w * jac * det / (norm * norm * norm));
        }
    }

    /// Plain-text export: `geogrid k N_points N_edges N_triangles`, then
    /// vertices, edges and triangles one per line (0-based indices).
    pub fn to_text(&self) -> String {
        let (np, ne, nt) = self.counts();
        let mut s = String::with_capacity(64 * np + 16 * (ne + nt));
        let _ = writeln!(s, "geogrid {} {np} {ne} {nt}", self.level);
        for v in &self.vertices {
            let _ = writeln!(s, "{:.16e} {:.16e} {:.16e}", v.x, v.y, v.z);
        }
        for [a, b] in &self.edges {
            let _ = writeln!(s, "{a} {b}");
        }
        for [a, b, c] in &self.triangles {
            let _ = writeln!(s, "{a} {b} {c}");
        }
        s
    }

    /// Parses the text export. Vertices must be unit vectors and the edge
    /// list must match the one implied by the triangles.
    pub fn from_text(text: &str) -> Result<Self> {
        const WHAT: &str = "grid file";
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::format(WHAT, "empty input"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 || fields[0] != "geogrid" {
            return Err(Error::format(WHAT, "missing `geogrid k Np Ne Nt` header"));
        }
        let num = |s: &str| -> Result<usize> {
            s.parse::<usize>()
                .map_err(|_| Error::format(WHAT, format!("bad integer `{s}` in header")))
        };
        let (level, np, ne, nt) = (num(fields[1])?, num(fields[2])?, num(fields[3])?, num(fields[4])?);
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        let mut triangles = Vec::new();
        let parse_row = |line: Option<&str>, width: usize, idx: usize| -> Result<Vec<String>> {
            let line = line.ok_or_else(|| Error::format(WHAT, format!("truncated at record {idx}")))?;
            let parts: Vec<String> = line.split_whitespace().map(str::to_owned).collect();
            if parts.len() != width {
                return Err(Error::format(WHAT, format!("record {idx} has {} fields, expected {width}", parts.len())));
            }
            Ok(parts)
        };
        for i in 0..np {
            let parts = parse_row(lines.next(), 3, i)?;
            let mut v = [0.0; 3];
            for (k, p) in parts.iter().enumerate() {
                v[k] = p
                    .parse::<f64>()
                    .map_err(|_| Error::format(WHAT, format!("bad coordinate `{p}`")))?;
            }
            let v = Vec3::new(v[0], v[1], v[2]);
            if !(v.norm() - 1.0).abs().lt(&1e-12) {
                return Err(Error::format(WHAT, format!("vertex {i} is not on the unit sphere")));
            }
            vertices.push(v);
        }
        let index = |p: &str| -> Result<usize> {
            let i = p
                .parse::<usize>()
                .map_err(|_| Error::format(WHAT, format!("bad index `{p}`")))?;
            if i >= np {
                return Err(Error::format(WHAT, format!("index {i} out of range")));
            }
            Ok(i)
        };
        for i in 0..ne {
            let parts = parse_row(lines.next(), 2, np + i)?;
            edges.push([index(&parts[0])?, index(&parts[1])?]);
        }
        for i in 0..nt {
            let parts = parse_row(lines.next(), 3, np + ne + i)?;
            let t = [index(&parts[0])?, index(&parts[1])?, index(&parts[2])?];
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::format(WHAT, format!("degenerate triangle {i}")));
            }
            triangles.push(t);
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(Error::format(WHAT, "trailing data after triangle list"));
        }
        let grid = Self::from_parts(level, vertices, triangles);
        let mut listed: Vec<[usize; 2]> = edges.iter().map(|&[a, b]| [a.min(b), a.max(b)]).collect();
        listed.sort_unstable();
        if listed != grid.edges {
            return Err(Error::format(WHAT, "edge list inconsistent with triangles"));
        }
        Ok(grid)
    }
}

/// Widest edge (radians) a quadrature panel may span before it is split.
pub const MAX_PANEL_ANGLE: f64 = 0.35;

fn split_panel([p, q, r]: [[f64; 3]; 3]) -> [[[f64; 3]; 3]; 4] {
    let mid = |a: [f64; 3], b: [f64; 3]| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])];
    let (pq, qr, rp) = (mid(p, q), mid(q, r), mid(r, p));
    [[p, pq, rp], [pq, q, qr], [rp, qr, r], [pq, qr, rp]]
}

const IDENTITY_CORNERS: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn orient_outward(vertices: &[Vec3], [a, b, c]: [usize; 3]) -> [usize; 3] {
    if vertices[a].dot(&vertices[b].cross(&vertices[c])) > 0.0 {
        [a, b, c]
    } else {
        [a, c, b]
    }
}
