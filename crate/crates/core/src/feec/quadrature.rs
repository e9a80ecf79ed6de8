//! Numerical quadrature on edges and triangles.
//!
//! Gauss-Legendre nodes are generated at runtime by Newton iteration on the
//! Legendre recurrence — no hardcoded tables to get wrong — and the triangle
//! rules are collapsed (Duffy) tensor products of those nodes.  A rule
//! requested for polynomial degree `d` integrates every bivariate polynomial
//! of total degree `<= d` exactly; the unit tests verify this monomial by
//! monomial against closed-form integrals.
//!
//! Quadrature is used only for right-hand-side functionals and error norms;
//! mass and incidence matrices are assembled in exact rational arithmetic
//! elsewhere.

/// Gauss-Legendre rule with `m` points on `[0, 1]`; returns `(node, weight)`
/// pairs.  Exact for polynomials of degree `<= 2m - 1`.
pub fn gauss_legendre_01(m: usize) -> Vec<(f64, f64)> {
    assert!(m >= 1);
    let mut rule = Vec::with_capacity(m);
    for k in 0..m {
        // Standard initial guess for the k-th root of P_m on [-1, 1].
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(m, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push(((x + 1.0) * 0.5, w * 0.5));
    }
    // Roots come out in decreasing order; flip for readability.
    rule.reverse();
    rule
}

/// Legendre polynomial `P_m(x)` and its derivative via the three-term
/// recurrence.
fn legendre_and_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0f64;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 1..m {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// A quadrature rule on triangles in barycentric form.  Weights sum to 1;
/// integrate as `area * sum(w_k * f(bary_k))`.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<([f64; 3], f64)>,
    /// Every polynomial of total degree `<= exact_degree` is integrated
    /// exactly.
    pub exact_degree: usize,
}

/// Collapsed (Duffy) tensor-product rule exact for total degree `>= degree`.
pub fn triangle_rule(degree: usize) -> TriangleRule {
    // After the substitution x = u, y = v(1-u) with Jacobian (1-u), a
    // monomial x^a y^b becomes v^b * u^a (1-u)^{b+1}: degree <= `degree` in v
    // and <= degree + 1 in u, so m points handle degree <= 2m - 2 overall.
    let m = degree / 2 + 1;
    let gl = gauss_legendre_01(m);
    let mut points = Vec::with_capacity(m * m);
    for &(u, wu) in &gl {
        for &(v, wv) in &gl {
            let l1 = u;
            let l2 = v * (1.0 - u);
            let l0 = 1.0 - l1 - l2;
            points.push(([l0, l1, l2], 2.0 * wu * wv * (1.0 - u)));
        }
    }
    TriangleRule {
        points,
        exact_degree: 2 * m - 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    /// Exact integral of `l0^a l1^b l2^c` over a triangle of area 1.
    fn exact_bary_monomial(a: usize, b: usize, c: usize) -> f64 {
        2.0 * factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 2)
    }

    #[test]
    fn gauss_legendre_is_exact() {
        for m in 1..=8 {
            let rule = gauss_legendre_01(m);
            for deg in 0..=(2 * m - 1) {
                let approx: f64 = rule.iter().map(|&(x, w)| w * x.powi(deg as i32)).sum();
                let exact = 1.0 / (deg as f64 + 1.0);
                assert!(
                    (approx - exact).abs() < 1e-14,
                    "m={m} deg={deg}: {approx} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn triangle_rules_integrate_monomials_exactly() {
        for degree in [2usize, 4, 6, 8, 10] {
            let rule = triangle_rule(degree);
            assert!(rule.exact_degree >= degree);
            for total in 0..=rule.exact_degree {
                for b in 0..=total {
                    for c in 0..=(total - b) {
                        let a = total - b - c;
                        let approx: f64 = rule
                            .points
                            .iter()
                            .map(|&(l, w)| {
                                w * l[0].powi(a as i32) * l[1].powi(b as i32) * l[2].powi(c as i32)
                            })
                            .sum();
                        let exact = exact_bary_monomial(a, b, c);
                        assert!(
                            (approx - exact).abs() < 1e-14,
                            "deg {degree} monomial ({a},{b},{c}): {approx} vs {exact}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn weights_are_normalized_and_positive() {
        for degree in [2usize, 8] {
            let rule = triangle_rule(degree);
            let sum: f64 = rule.points.iter().map(|p| p.1).sum();
            assert!((sum - 1.0).abs() < 1e-14);
            assert!(rule.points.iter().all(|p| p.1 > 0.0));
            assert!(rule
                .points
                .iter()
                .all(|p| p.0.iter().all(|&l| (0.0..=1.0).contains(&l))));
        }
    }
}
