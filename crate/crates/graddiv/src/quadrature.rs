//! Exact-for-polynomials integration on reference triangles and edges.
//!
//! Triangle rules come from the Duffy transform of tensorized Gauss rules on
//! the unit square, so any requested degree is available through one code
//! path. Edge rules are plain Gauss-Legendre on `[0, 1]`.

use thiserror::Error;

/// Reference triangle: vertices (0,0), (1,0), (0,1).
pub const REF_TRIANGLE_MEASURE: f64 = 0.5;

pub const MAX_TRIANGLE_DEGREE: usize = 20;

#[derive(Debug, Error)]
pub enum QuadratureError {
    #[error("triangle rule degree {0} exceeds supported maximum {MAX_TRIANGLE_DEGREE}")]
    DegreeOutOfRange(usize),
}

/// Quadrature rule on a reference domain (triangle or unit interval).
#[derive(Clone, Debug)]
pub struct QuadRule {
    /// Points in reference coordinates; triangle points are (x, y), edge points (s, 0).
    pub points: Vec<[f64; 2]>,
    /// Weights summing to the reference measure (1/2 for the triangle, 1 for the edge).
    pub weights: Vec<f64>,
    /// All polynomials up to this total degree integrate exactly.
    pub degree: usize,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate<F: FnMut([f64; 2]) -> f64>(&self, mut f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(p))
            .sum()
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`, exact for degree `2n - 1`.
fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Newton iteration on P_n, starting from the Chebyshev-like guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        // standard [-1,1] weight, then map to [0,1]
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = 0.5 * (x + 1.0);
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

/// Value and derivative of the Legendre polynomial `P_n` at `x` (on `[-1, 1]`).
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Shifted Legendre polynomial `P_k(2s - 1)` on `[0, 1]`.
pub fn shifted_legendre(k: usize, s: f64) -> f64 {
    let x = 2.0 * s - 1.0;
    let mut p0 = 1.0;
    if k == 0 {
        return p0;
    }
    let mut p1 = x;
    for j in 1..k {
        let p2 = ((2 * j + 1) as f64 * x * p1 - j as f64 * p0) / (j + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Gauss rule on `[0, 1]` exact for polynomials of the given degree.
pub fn edge_rule(degree: usize) -> QuadRule {
    let n = degree / 2 + 1;
    let (nodes, weights) = gauss_legendre_unit(n);
    QuadRule {
        points: nodes.iter().map(|&s| [s, 0.0]).collect(),
        weights,
        degree: 2 * n - 1,
    }
}

/// Rule on the reference triangle exact for total degree `degree`.
///
/// Built by collapsing a tensor Gauss rule on the unit square through
/// x = u, y = v (1 - u); the extra factor (1 - u) raises the u-degree by one.
pub fn triangle_rule(degree: usize) -> Result<QuadRule, QuadratureError> {
    if degree > MAX_TRIANGLE_DEGREE {
        return Err(QuadratureError::DegreeOutOfRange(degree));
    }
    let n = (degree + 3) / 2; // 2n - 1 >= degree + 1, the collapse raises the u-degree by one
    let (nu, wu) = gauss_legendre_unit(n);
    let (nv, wv) = gauss_legendre_unit(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (u, wu) in nu.iter().zip(&wu) {
        for (v, wv) in nv.iter().zip(&wv) {
            points.push([*u, v * (1.0 - u)]);
            weights.push(wu * wv * (1.0 - u));
        }
    }
    Ok(QuadRule {
        points,
        weights,
        degree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact integral of x^a y^b over the reference triangle: a! b! / (a + b + 2)!.
    fn monomial_integral(a: usize, b: usize) -> f64 {
        let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
        fact(a) * fact(b) / fact(a + b + 2)
    }

    #[test]
    fn degree_zero_integrates_constant() {
        let rule = triangle_rule(0).unwrap();
        let v = rule.integrate(|_| 1.0);
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bilinear_monomial() {
        let rule = triangle_rule(2).unwrap();
        let v = rule.integrate(|[x, y]| x * y);
        assert!((v - 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn x_power_six() {
        // independent oracle: Dirichlet integral x^a y^b -> a! b! / (a+b+2)!
        assert!((monomial_integral(6, 0) - 1.0 / 56.0).abs() < 1e-18);
        let rule = triangle_rule(6).unwrap();
        let v = rule.integrate(|[x, _]| x.powi(6));
        assert!((v - 1.0 / 56.0).abs() < 1e-15);
    }

    #[test]
    fn monomial_exactness_sweep() {
        for degree in 0..=MAX_TRIANGLE_DEGREE {
            let rule = triangle_rule(degree).unwrap();
            let wsum: f64 = rule.weights.iter().sum();
            assert!(
                (wsum - REF_TRIANGLE_MEASURE).abs() < 1e-14,
                "weights at degree {degree}"
            );
            for a in 0..=degree {
                for b in 0..=(degree - a) {
                    let exact = monomial_integral(a, b);
                    let got = rule.integrate(|[x, y]| x.powi(a as i32) * y.powi(b as i32));
                    assert!(
                        (got - exact).abs() <= 1e-13 * exact.abs().max(1.0),
                        "x^{a} y^{b} at degree {degree}: got {got}, exact {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn degree_out_of_range_rejected() {
        assert!(triangle_rule(MAX_TRIANGLE_DEGREE + 1).is_err());
    }

    #[test]
    fn edge_one_point_rule() {
        let rule = edge_rule(1);
        assert_eq!(rule.len(), 1);
        let v = rule.integrate(|[s, _]| s);
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn edge_two_point_cubic() {
        let rule = edge_rule(3);
        assert_eq!(rule.len(), 2);
        let v = rule.integrate(|[s, _]| s * s * s);
        assert!((v - 0.25).abs() < 1e-15);
    }

    #[test]
    fn edge_gauss_exactness() {
        for n in 1..=12 {
            let rule = edge_rule(2 * n - 1);
            assert_eq!(rule.len(), n);
            for k in 0..=(2 * n - 1) {
                let exact = 1.0 / (k + 1) as f64;
                let got = rule.integrate(|[s, _]| s.powi(k as i32));
                assert!(
                    (got - exact).abs() <= 1e-13 * exact.max(1.0),
                    "s^{k} with {n} points"
                );
            }
        }
    }

    #[test]
    fn shifted_legendre_orthogonality() {
        let rule = edge_rule(12);
        for j in 0..=5usize {
            for k in 0..=5usize {
                let v = rule.integrate(|[s, _]| shifted_legendre(j, s) * shifted_legendre(k, s));
                let exact = if j == k { 1.0 / (2 * k + 1) as f64 } else { 0.0 };
                assert!((v - exact).abs() < 1e-14, "P_{j} P_{k}");
            }
        }
    }
}
