//! One-dimensional Gauss-Legendre rules and a symmetric planar-triangle rule
//! built from them.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, exact for polynomials of
/// degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss-Legendre rule mapped onto `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter()
        .zip(&w)
        .map(|(&xi, &wi)| (mid + half * xi, half * wi))
        .collect()
}

/// A quadrature rule on the reference triangle in barycentric form.
///
/// Weights sum to 1/2, the area of `{xi1, xi2 >= 0, xi1 + xi2 <= 1}`.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    degree: usize,
}

impl TriangleRule {
    /// Conical (collapsed) product of two `n`-point Gauss-Legendre rules,
    /// symmetrized over the six permutations of the barycentric coordinates.
    /// Exact for polynomials of degree `2n - 2`.
    pub fn symmetric_conical(n: usize) -> Self {
        let gl = gauss_legendre_on(n, 0.0, 1.0);
        let mut points = Vec::with_capacity(6 * n * n);
        let mut weights = Vec::with_capacity(6 * n * n);
        const PERMS: [[usize; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        for &(u, wu) in &gl {
            for &(v, wv) in &gl {
                let xi1 = u;
                let xi2 = (1.0 - u) * v;
                let xi = [xi1, xi2, 1.0 - xi1 - xi2];
                let w = wu * wv * (1.0 - u) / 6.0;
                for p in PERMS {
                    points.push([xi[p[0]], xi[p[1]], xi[p[2]]]);
                    weights.push(w);
                }
            }
        }
        TriangleRule {
            points,
            weights,
            degree: 2 * n - 2,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl Default for TriangleRule {
    /// Degree-10 rule, 216 points.
    fn default() -> Self {
        TriangleRule::symmetric_conical(6)
    }
}
