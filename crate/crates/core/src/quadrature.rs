//! Periodic trapezoid rule on `[0, 2 pi)`.
//!
//! For a smooth `2 pi`-periodic integrand the equally weighted rule converges
//! geometrically; it is exact for trigonometric polynomials of degree `< M`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::Deformation;

pub const MIN_NODES: usize = 16;
pub const MAX_NODES: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureRule {
    node_count: usize,
}

impl QuadratureRule {
    /// `node_count` must be even and at least [`MIN_NODES`].
    pub fn new(node_count: usize) -> Result<Self> {
        if node_count < MIN_NODES || !node_count.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "quadrature needs an even node count >= {MIN_NODES}, got {node_count}"
            )));
        }
        Ok(QuadratureRule { node_count })
    }

    /// Node floor for an `N`-function basis at deformation `xi`.
    ///
    /// `max(64, 8N + 32)` covers the trigonometric degree of the basis
    /// products. The rational factors `g^{-p}` have Fourier coefficients
    /// decaying like `exp(-d |k|)` with `d = arccosh((2 + xi)/|xi|) / 2`, so an
    /// extra `40/d` nodes push the aliasing error below roundoff when `xi`
    /// approaches -1.
    pub fn for_system(size: usize, xi: f64) -> Self {
        let base = 64.max(8 * size + 32);
        let decay_floor = if xi == 0.0 {
            0
        } else {
            let d = ((2.0 + xi) / xi.abs()).acosh() / 2.0;
            let extra = (40.0 / d).ceil();
            if extra.is_finite() {
                4 * size + 8 + extra as usize
            } else {
                MAX_NODES
            }
        };
        let m = base.max(decay_floor).min(MAX_NODES);
        QuadratureRule {
            node_count: m + m % 2,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn weight(&self) -> f64 {
        2.0 * PI / self.node_count as f64
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        let h = self.weight();
        (0..self.node_count).map(move |j| j as f64 * h)
    }

    pub fn doubled(&self) -> Self {
        QuadratureRule {
            node_count: 2 * self.node_count,
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.weight() * self.nodes().map(f).sum::<f64>()
    }
}

/// `int_0^{2 pi} cos^{2m}(phi) dphi = 2 pi C(2m, m) / 4^m`.
pub fn wallis(m: usize) -> f64 {
    (0..m).fold(2.0 * PI, |acc, j| {
        acc * (2 * j + 1) as f64 / (2 * j + 2) as f64
    })
}

/// `int_0^{2 pi} cos^m(phi) (1 + xi cos^2 phi)^{-p} dphi` by repeated doubling of
/// the periodic rule until two successive values agree to `1e-13` relative.
pub fn trig_rational_integral(m: u32, p: i32, xi: f64) -> Result<f64> {
    let xi = Deformation::new(xi)?.value();
    if !m.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "power m = {m} must be even"
        )));
    }
    let integrand = |phi: f64| {
        let c = phi.cos();
        c.powi(m as i32) * (1.0 + xi * c * c).powi(-p)
    };
    let mut rule = QuadratureRule::new(MIN_NODES)?;
    let mut prev = rule.integrate(integrand);
    while rule.node_count() < MAX_NODES {
        rule = rule.doubled();
        let next = rule.integrate(integrand);
        if (next - prev).abs() <= 1e-13 * next.abs().max(f64::MIN_POSITIVE) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NonConvergence {
        max_nodes: MAX_NODES,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    /// Midpoint Riemann sum with a million nodes; independent of the rule above.
    fn riemann(m: u32, p: i32, xi: f64) -> f64 {
        let n = 1_000_000;
        let h = 2.0 * PI / n as f64;
        (0..n)
            .map(|j| {
                let c = ((j as f64 + 0.5) * h).cos();
                c.powi(m as i32) * (1.0 + xi * c * c).powi(-p)
            })
            .sum::<f64>()
            * h
    }

    #[test]
    fn closed_forms() {
        assert_relative_eq!(trig_rational_integral(0, 1, 0.0).unwrap(), 2.0 * PI);
        let j01 = trig_rational_integral(0, 1, 1.0).unwrap();
        assert_relative_eq!(j01, 2.0 * PI / 2f64.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(j01, 4.442882938, epsilon = 1e-9);
        let j21 = trig_rational_integral(2, 1, 1.0).unwrap();
        assert_relative_eq!(
            j21,
            2.0 * PI * (1.0 - 1.0 / 2f64.sqrt()),
            max_relative = 1e-13
        );
        assert_relative_eq!(j21, 1.840302370, epsilon = 1e-9);
    }

    #[test]
    fn agrees_with_brute_force_riemann_sum() {
        for (m, p, xi) in [(0, 1, 1.0), (2, 1, 1.0), (4, 2, -0.5), (6, 2, 3.0)] {
            assert_relative_eq!(
                trig_rational_integral(m, p, xi).unwrap(),
                riemann(m, p, xi),
                max_relative = 1e-11
            );
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(trig_rational_integral(0, 1, -1.0).is_err());
        assert!(trig_rational_integral(3, 1, 0.5).is_err());
        assert!(QuadratureRule::new(15).is_err());
        assert!(QuadratureRule::new(18).is_ok());
    }

    #[test]
    fn exact_on_trig_polynomials() {
        let rule = QuadratureRule::new(64).unwrap();
        for m in 0..31 {
            let q = rule.integrate(|phi| phi.cos().powi(2 * m as i32));
            assert_relative_eq!(q, wallis(m), max_relative = 1e-13);
        }
        // odd powers integrate to zero
        assert!(rule.integrate(|phi| phi.cos().powi(7)).abs() < 1e-14);
    }

    #[test]
    fn floor_grows_near_singular_deformation() {
        assert_eq!(QuadratureRule::for_system(4, 0.0).node_count(), 64);
        assert_eq!(QuadratureRule::for_system(10, 0.0).node_count(), 112);
        assert!(QuadratureRule::for_system(10, -0.9).node_count() > 112);
        assert!(QuadratureRule::for_system(10, -0.999).node_count() <= MAX_NODES);
        for xi in [-0.99, -0.5, 0.3, 1.0, 50.0] {
            assert_eq!(QuadratureRule::for_system(7, xi).node_count() % 2, 0);
        }
    }
}
