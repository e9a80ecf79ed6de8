//! The two analytic benchmark problems on the unit square.
//!
//! Both problems have closed-form (p, E, H) fields with constant eps = mu = 1
//! and final time 1. The first has vanishing p and homogeneous boundary
//! traces; the second mixes standing and traveling waves and needs
//! nonhomogeneous boundary data for p and E.
//!
//! Alongside the fields we hard-code their analytic spatial derivatives, so
//! the PDE residual oracle only ever differentiates in time (by central
//! differences) and stays independent of the finite element machinery.

use std::f64::consts::PI;

/// A benchmark problem: exact fields, their spatial derivatives, materials,
/// and boundary-condition character.
#[derive(Clone, Copy)]
pub struct Problem {
    /// Stable identifier accepted by the CLI ("example1", "example2").
    pub id: &'static str,
    pub eps: f64,
    pub mu: f64,
    /// Whether all essential traces (p and tangential E) vanish identically.
    pub homogeneous_bc: bool,
    /// Conventional final time of the benchmark.
    pub t_final: f64,
    pub p: fn([f64; 2], f64) -> f64,
    pub e: fn([f64; 2], f64) -> [f64; 2],
    pub h: fn([f64; 2], f64) -> f64,
    /// Analytic grad p.
    pub grad_p: fn([f64; 2], f64) -> [f64; 2],
    /// Analytic div E.
    pub div_e: fn([f64; 2], f64) -> f64,
    /// Analytic scalar curl of E: dEy/dx - dEx/dy.
    pub curl_e: fn([f64; 2], f64) -> f64,
    /// Analytic vector curl (rot) of H: (dH/dy, -dH/dx).
    pub curl_h: fn([f64; 2], f64) -> [f64; 2],
}

impl Problem {
    /// Looks a problem up by CLI identifier; accepts the bare number too.
    pub fn by_id(id: &str) -> Option<Problem> {
        match id {
            "example1" | "1" => Some(example1()),
            "example2" | "2" => Some(example2()),
            _ => None,
        }
    }

    /// Residuals of the three field equations at one sample point, with time
    /// derivatives replaced by central differences of half-width `delta`:
    ///
    /// 1. dp/dt + div(eps E)
    /// 2. grad p + eps dE/dt - curl H   (two components)
    /// 3. mu dH/dt + curl E
    pub fn residuals(&self, x: [f64; 2], t: f64, delta: f64) -> [f64; 4] {
        let dp_dt = ((self.p)(x, t + delta) - (self.p)(x, t - delta)) / (2.0 * delta);
        let ep = (self.e)(x, t + delta);
        let em = (self.e)(x, t - delta);
        let de_dt = [
            (ep[0] - em[0]) / (2.0 * delta),
            (ep[1] - em[1]) / (2.0 * delta),
        ];
        let dh_dt = ((self.h)(x, t + delta) - (self.h)(x, t - delta)) / (2.0 * delta);

        let gp = (self.grad_p)(x, t);
        let ch = (self.curl_h)(x, t);
        [
            dp_dt + self.eps * (self.div_e)(x, t),
            gp[0] + self.eps * de_dt[0] - ch[0],
            gp[1] + self.eps * de_dt[1] - ch[1],
            self.mu * dh_dt + (self.curl_e)(x, t),
        ]
    }

    /// Largest residual magnitude over a set of samples.
    pub fn max_residual(&self, samples: &[([f64; 2], f64)], delta: f64) -> f64 {
        let mut worst = 0.0f64;
        for &(x, t) in samples {
            for r in self.residuals(x, t, delta) {
                worst = worst.max(r.abs());
            }
        }
        worst
    }
}

/// Standing-wave problem: p vanishes identically and every essential trace is
/// zero, so it runs in homogeneous mode and conserves energy exactly.
pub fn example1() -> Problem {
    Problem {
        id: "example1",
        eps: 1.0,
        mu: 1.0,
        homogeneous_bc: true,
        t_final: 1.0,
        p: |_, _| 0.0,
        e: |x, t| {
            let c = (PI * t).cos();
            [(PI * x[1]).sin() * c, (PI * x[0]).sin() * c]
        },
        h: |x, t| ((PI * x[1]).cos() - (PI * x[0]).cos()) * (PI * t).sin(),
        grad_p: |_, _| [0.0, 0.0],
        div_e: |_, _| 0.0,
        curl_e: |x, t| PI * ((PI * x[0]).cos() - (PI * x[1]).cos()) * (PI * t).cos(),
        curl_h: |x, t| {
            let s = (PI * t).sin();
            [-PI * (PI * x[1]).sin() * s, -PI * (PI * x[0]).sin() * s]
        },
    }
}

/// Mixed standing/traveling-wave problem with nonzero p and nonhomogeneous
/// boundary traces for p and tangential E.
pub fn example2() -> Problem {
    Problem {
        id: "example2",
        eps: 1.0,
        mu: 1.0,
        homogeneous_bc: false,
        t_final: 1.0,
        p: |x, t| ((PI * x[0]).cos() + (PI * x[1]).cos()) * (PI * t).sin(),
        e: |x, t| {
            let s = wave_sin(x, t);
            let c = (PI * t).cos();
            [
                s - (PI * x[0]).sin() * c,
                -s - (PI * x[1]).sin() * c,
            ]
        },
        h: |x, t| -f64::sqrt(2.0) * wave_sin(x, t),
        grad_p: |x, t| {
            let s = (PI * t).sin();
            [
                -PI * (PI * x[0]).sin() * s,
                -PI * (PI * x[1]).sin() * s,
            ]
        },
        div_e: |x, t| -PI * ((PI * x[0]).cos() + (PI * x[1]).cos()) * (PI * t).cos(),
        curl_e: |x, t| 2.0 * PI * wave_cos(x, t),
        curl_h: |x, t| {
            let c = f64::sqrt(2.0) * PI * wave_cos(x, t);
            [c, -c]
        },
    }
}

/// The traveling-wave phase sin(pi (sqrt2 t - x - y)).
fn wave_sin(x: [f64; 2], t: f64) -> f64 {
    (PI * (f64::sqrt(2.0) * t - x[0] - x[1])).sin()
}

fn wave_cos(x: [f64; 2], t: f64) -> f64 {
    (PI * (f64::sqrt(2.0) * t - x[0] - x[1])).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feec::quadrature::gauss_legendre_01;

    fn samples() -> Vec<([f64; 2], f64)> {
        // Deterministic pseudo-random interior samples.
        let mut s = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            s as f64 / u64::MAX as f64
        };
        (0..200)
            .map(|_| ([next(), next()], next()))
            .collect()
    }

    #[test]
    fn lookup_by_id() {
        assert_eq!(Problem::by_id("example1").unwrap().id, "example1");
        assert_eq!(Problem::by_id("2").unwrap().id, "example2");
        assert!(Problem::by_id("example3").is_none());
    }

    #[test]
    fn example1_pointwise_values() {
        let pr = example1();
        for &(x, _) in &samples()[..50] {
            assert_eq!((pr.h)(x, 0.0), 0.0);
        }
        let e = (pr.e)([0.5, 0.5], 0.0);
        assert!((e[0] - 1.0).abs() < 1e-15 && (e[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn example1_residuals_vanish() {
        let pr = example1();
        assert!(pr.max_residual(&samples(), 1e-4) < 1e-6);
    }

    #[test]
    fn example1_traces_vanish() {
        let pr = example1();
        for i in 0..=20 {
            let s = i as f64 / 20.0;
            for t in [0.0, 0.3, 0.77] {
                // Tangential component on each side plus the p trace.
                assert!((pr.e)([s, 0.0], t)[0].abs() < 1e-15);
                assert!((pr.e)([s, 1.0], t)[0].abs() < 1e-15);
                assert!((pr.e)([0.0, s], t)[1].abs() < 1e-15);
                assert!((pr.e)([1.0, s], t)[1].abs() < 1e-15);
                assert_eq!((pr.p)([s, 0.0], t), 0.0);
            }
        }
    }

    #[test]
    fn example1_field_energy_is_one_for_all_times() {
        // The analytic integral of |E|^2 + H^2 over the square is exactly 1
        // at every time; check with a tensor Gauss rule.
        let pr = example1();
        let rule = gauss_legendre_01(16);
        for t in [0.0, 0.21, 0.5, 0.83] {
            let mut total = 0.0;
            for &(xi, wi) in &rule {
                for &(yj, wj) in &rule {
                    let e = (pr.e)([xi, yj], t);
                    let h = (pr.h)([xi, yj], t);
                    total += wi * wj * (e[0] * e[0] + e[1] * e[1] + h * h);
                }
            }
            assert!((total - 1.0).abs() < 1e-12, "t={t}: {total}");
        }
    }

    #[test]
    fn example2_pointwise_values() {
        let pr = example2();
        for &(x, _) in &samples()[..50] {
            assert!((pr.p)(x, 0.0).abs() < 1e-15);
        }
        assert!((pr.h)([0.0, 0.0], 0.0).abs() < 1e-15);
        for t in [0.1, 0.4, 0.9] {
            let e = (pr.e)([0.0, 0.0], t);
            let expect = (PI * f64::sqrt(2.0) * t).sin();
            assert!((e[0] - expect).abs() < 1e-14);
            assert!((e[1] + expect).abs() < 1e-14);
        }
    }

    #[test]
    fn example2_residuals_vanish() {
        let pr = example2();
        assert!(pr.max_residual(&samples(), 1e-4) < 1e-6);
    }

    #[test]
    fn example2_is_nonhomogeneous() {
        let pr = example2();
        assert!(!pr.homogeneous_bc);
        // p trace is visibly nonzero on the left side at t = 1/2.
        assert!((pr.p)([0.0, 0.5], 0.5).abs() > 0.5);
    }
}
