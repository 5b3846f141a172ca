//! Dimensionless models of a particle confined to an ellipse.
//!
//! The angle `phi` parameterizes the path `x = a cos(phi)`, `y = b sin(phi)`
//! and the only free parameter is the deformation `xi = (b^2 - a^2) / a^2`.
//! Both Hamiltonians are second-order operators of the form
//! `H psi = -(c2 psi'' + c1 psi')` with `c2 = 1/g` and `g = 1 + xi cos^2(phi)`:
//!
//! * [`ModelKind::PathNonHermitian`]: `H = -g^{-1/2} d/dphi g^{-1/2} d/dphi`,
//!   so `c1 = -g'/(2 g^2)`.
//! * [`ModelKind::PathHermitian`]: `H = -d/dphi g^{-1} d/dphi`, so `c1 = -g'/g^2`.
//!
//! The first is `-A A` and the second `-A^T A` for `A = g^{-1/2} d/dphi`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant in J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Guard added to the singular point `xi = -1`.
pub const XI_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    /// `-g^{-1/2} d g^{-1/2} d`; non-Hermitian under the plain product but
    /// similar to a Hermitian operator.
    PathNonHermitian,
    /// `-d g^{-1} d`; Hermitian under the plain product.
    PathHermitian,
}

impl ModelKind {
    pub const ALL: [ModelKind; 2] = [ModelKind::PathNonHermitian, ModelKind::PathHermitian];

    pub fn short_name(self) -> &'static str {
        match self {
            ModelKind::PathNonHermitian => "m1",
            ModelKind::PathHermitian => "m2",
        }
    }

    pub fn is_hermitian(self) -> bool {
        matches!(self, ModelKind::PathHermitian)
    }

    /// Weight of the first-derivative term relative to `-g'/g^2`.
    pub(crate) fn drift_weight(self) -> f64 {
        match self {
            ModelKind::PathNonHermitian => 0.5,
            ModelKind::PathHermitian => 1.0,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "m1" | "1" => Ok(ModelKind::PathNonHermitian),
            "m2" | "2" => Ok(ModelKind::PathHermitian),
            _ => Err(Error::InvalidArgument(format!(
                "unknown model '{s}' (expected m1 or m2)"
            ))),
        }
    }
}

/// A validated deformation parameter, `xi > -1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Deformation(f64);

impl Deformation {
    pub fn new(xi: f64) -> Result<Self> {
        if xi.is_finite() && xi > -1.0 + XI_GUARD {
            Ok(Deformation(xi))
        } else {
            Err(Error::Domain { xi })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Physical ellipse with semi-axes `a`, `b` (m) and particle mass (kg).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalEllipse {
    pub a: f64,
    pub b: f64,
    pub mass: f64,
}

impl PhysicalEllipse {
    pub fn new(a: f64, b: f64, mass: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("mass", mass)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(PhysicalEllipse { a, b, mass })
    }
}

/// Returns `(xi, energy_scale)` with physical energy `= energy_scale * E`.
pub fn nondimensionalize(e: &PhysicalEllipse) -> (f64, f64) {
    let xi = (e.b * e.b - e.a * e.a) / (e.a * e.a);
    let energy_scale = HBAR * HBAR / (2.0 * e.mass * e.a * e.a);
    (xi, energy_scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    fn symbol(self) -> char {
        match self {
            Parity::Even => '+',
            Parity::Odd => '-',
        }
    }
}

/// Joint parity under `phi -> -phi` (reflection) and `phi -> phi + pi`
/// (translation). The derived ordering is (+,+) < (+,-) < (-,+) < (-,-).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SymmetryClass {
    pub reflection: Parity,
    pub translation: Parity,
}

impl SymmetryClass {
    pub const PP: SymmetryClass = SymmetryClass::new(Parity::Even, Parity::Even);
    pub const PM: SymmetryClass = SymmetryClass::new(Parity::Even, Parity::Odd);
    pub const MP: SymmetryClass = SymmetryClass::new(Parity::Odd, Parity::Even);
    pub const MM: SymmetryClass = SymmetryClass::new(Parity::Odd, Parity::Odd);

    pub const ALL: [SymmetryClass; 4] = [Self::PP, Self::PM, Self::MP, Self::MM];

    pub const fn new(reflection: Parity, translation: Parity) -> Self {
        SymmetryClass {
            reflection,
            translation,
        }
    }

    /// Shell-safe spelling: `pp`, `pm`, `mp`, `mm`.
    pub fn short_name(self) -> &'static str {
        match (self.reflection, self.translation) {
            (Parity::Even, Parity::Even) => "pp",
            (Parity::Even, Parity::Odd) => "pm",
            (Parity::Odd, Parity::Even) => "mp",
            (Parity::Odd, Parity::Odd) => "mm",
        }
    }

    /// Fourier index `n` of the `k`-th unperturbed (`xi = 0`) state in this class.
    pub fn fourier_index(self, k: usize) -> u32 {
        let k = k as u32;
        match (self.reflection, self.translation) {
            (Parity::Even, Parity::Even) => 2 * k,
            (Parity::Odd, Parity::Even) => 2 * k + 2,
            (_, Parity::Odd) => 2 * k + 1,
        }
    }

    /// Inverse of [`fourier_index`](Self::fourier_index).
    pub fn position_of_level(self, n: u32) -> Option<usize> {
        let k = match (self.reflection, self.translation) {
            (Parity::Even, Parity::Even) if n.is_multiple_of(2) => n / 2,
            (Parity::Odd, Parity::Even) if n.is_multiple_of(2) && n >= 2 => n / 2 - 1,
            (_, Parity::Odd) if n % 2 == 1 => n / 2,
            _ => return None,
        };
        Some(k as usize)
    }

    /// Cosine-type classes are even under reflection.
    pub fn is_cosine(self) -> bool {
        self.reflection == Parity::Even
    }

    /// The classes whose unperturbed level `n >= 1` is two-fold degenerate.
    pub fn partners_of_level(n: u32) -> Option<(SymmetryClass, SymmetryClass)> {
        match n {
            0 => None,
            n if n % 2 == 0 => Some((Self::PP, Self::MP)),
            _ => Some((Self::PM, Self::MM)),
        }
    }
}

impl fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{})",
            self.reflection.symbol(),
            self.translation.symbol()
        )
    }
}

impl FromStr for SymmetryClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pp" | "(+,+)" => Ok(Self::PP),
            "pm" | "(+,-)" => Ok(Self::PM),
            "mp" | "(-,+)" => Ok(Self::MP),
            "mm" | "(-,-)" => Ok(Self::MM),
            _ => Err(Error::InvalidArgument(format!(
                "unknown symmetry class '{s}' (expected pp, pm, mp or mm)"
            ))),
        }
    }
}

/// Irreducible representation labels in the D2 and C2v point groups.
pub fn group_labels(class: SymmetryClass) -> (&'static str, &'static str) {
    match class.short_name() {
        "pp" => ("A", "A1"),
        "mp" => ("B1", "A2"),
        "pm" => ("B2", "B1"),
        _ => ("B3", "B2"),
    }
}

/// Fourier indices of the first `count` unperturbed states of `class`.
pub fn unperturbed_levels(class: SymmetryClass, count: usize) -> Vec<u32> {
    (0..count).map(|k| class.fourier_index(k)).collect()
}

/// `g = 1 + xi cos^2(phi)`.
pub fn metric(phi: f64, xi: f64) -> Result<f64> {
    let xi = Deformation::new(xi)?.value();
    Ok(metric_unchecked(phi, xi))
}

#[inline]
pub(crate) fn metric_unchecked(phi: f64, xi: f64) -> f64 {
    let c = phi.cos();
    1.0 + xi * c * c
}

/// Coefficients of `H psi = -(c2 psi'' + c1 psi')` for one model at fixed `xi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientPair {
    pub model: ModelKind,
    pub xi: f64,
}

impl CoefficientPair {
    /// `c2 = 1/g`.
    #[inline]
    pub fn c2(&self, phi: f64) -> f64 {
        1.0 / metric_unchecked(phi, self.xi)
    }

    /// `c1 = -w g'/g^2` with `w = 1/2` (model 1) or `w = 1` (model 2).
    #[inline]
    pub fn c1(&self, phi: f64) -> f64 {
        let g = metric_unchecked(phi, self.xi);
        let g_prime = -self.xi * (2.0 * phi).sin();
        -self.model.drift_weight() * g_prime / (g * g)
    }

    /// `d c2 / d xi = -cos^2(phi) / g^2`.
    #[inline]
    pub fn dc2_dxi(&self, phi: f64) -> f64 {
        let c = phi.cos();
        let g = metric_unchecked(phi, self.xi);
        -c * c / (g * g)
    }

    /// `d c1 / d xi = w sin(2 phi) (1 - xi cos^2 phi) / g^3`.
    #[inline]
    pub fn dc1_dxi(&self, phi: f64) -> f64 {
        let c = phi.cos();
        let g = metric_unchecked(phi, self.xi);
        self.model.drift_weight() * (2.0 * phi).sin() * (1.0 - self.xi * c * c) / (g * g * g)
    }

    /// Applies the operator to a function given by its value derivatives.
    #[inline]
    pub fn apply(&self, phi: f64, value: BasisValue) -> f64 {
        -(self.c2(phi) * value.d2 + self.c1(phi) * value.d1)
    }
}

pub fn coefficient_functions(model: ModelKind, xi: f64) -> Result<CoefficientPair> {
    let xi = Deformation::new(xi)?.value();
    Ok(CoefficientPair { model, xi })
}

/// A basis function value together with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BasisValue {
    pub f: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Which family spans the class subspace.
///
/// Both families span the same `N`-dimensional space for every class, so they
/// give identical Ritz values in exact arithmetic. The monomial family is
/// badly conditioned beyond `N ~ 10`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum BasisKind {
    /// Powers of `cos(phi)`, optionally times `sin(phi)`.
    Monomial,
    /// `cos(n phi)` or `sin(n phi)` for the class's unperturbed indices `n`.
    #[default]
    Fourier,
}

impl BasisKind {
    pub fn evaluate(self, class: SymmetryClass, k: usize, phi: f64) -> BasisValue {
        match self {
            BasisKind::Monomial => basis_function(class, k, phi),
            BasisKind::Fourier => fourier_basis_function(class, k, phi),
        }
    }
}

/// `k`-th member of the monomial family of `class`:
/// (+,+): `cos^{2k}`, (+,-): `cos^{2k+1}`, (-,+): `sin cos^{2k+1}`,
/// (-,-): `sin cos^{2k}`.
pub fn basis_function(class: SymmetryClass, k: usize, phi: f64) -> BasisValue {
    let p = match (class.reflection, class.translation) {
        (Parity::Even, Parity::Even) | (Parity::Odd, Parity::Odd) => 2 * k,
        _ => 2 * k + 1,
    } as i32;
    let (s, c) = phi.sin_cos();
    let pf = p as f64;
    let pow = |e: i32| if e <= 0 { 1.0 } else { c.powi(e) };
    if class.is_cosine() {
        let f = pow(p);
        let d1 = if p == 0 { 0.0 } else { -pf * pow(p - 1) * s };
        let d2 = if p >= 2 {
            pf * (pf - 1.0) * pow(p - 2) * s * s - pf * f
        } else {
            -pf * f
        };
        BasisValue { f, d1, d2 }
    } else {
        let cp = pow(p);
        let f = s * cp;
        let d1 = c * cp - if p == 0 { 0.0 } else { pf * s * s * pow(p - 1) };
        let tail = if p >= 2 {
            pf * (pf - 1.0) * s * s * s * pow(p - 2)
        } else {
            0.0
        };
        let d2 = -(3.0 * pf + 1.0) * s * cp + tail;
        BasisValue { f, d1, d2 }
    }
}

/// `cos(n phi)` or `sin(n phi)` with `n = class.fourier_index(k)`.
pub fn fourier_basis_function(class: SymmetryClass, k: usize, phi: f64) -> BasisValue {
    let n = class.fourier_index(k) as f64;
    let (s, c) = (n * phi).sin_cos();
    if class.is_cosine() {
        BasisValue {
            f: c,
            d1: -n * s,
            d2: -n * n * c,
        }
    } else {
        BasisValue {
            f: s,
            d1: n * c,
            d2: -n * n * s,
        }
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;

    fn fd(f: impl Fn(f64) -> f64, x: f64, h: f64) -> (f64, f64) {
        let (fp, f0, fm) = (f(x + h), f(x), f(x - h));
        ((fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h))
    }

    #[test]
    fn metric_examples() {
        assert_eq!(metric(0.0, 1.0).unwrap(), 2.0);
        assert_relative_eq!(metric(PI / 2.0, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(metric(PI / 4.0, 3.0).unwrap(), 2.5, epsilon = 1e-15);
        assert!(matches!(metric(0.0, -1.0), Err(Error::Domain { .. })));
        assert!(metric(0.0, -1.5).is_err());
        assert!(metric(0.0, f64::NAN).is_err());
    }

    #[test]
    fn coefficients_reduce_to_free_rotor_at_zero() {
        for model in ModelKind::ALL {
            let cp = coefficient_functions(model, 0.0).unwrap();
            for phi in [0.0, 0.3, 1.7, 4.0] {
                assert_eq!(cp.c2(phi), 1.0);
                assert_eq!(cp.c1(phi), 0.0);
            }
        }
    }

    #[test]
    fn coefficients_at_quarter_turn() {
        let cp = coefficient_functions(ModelKind::PathNonHermitian, 1.0).unwrap();
        let phi = PI / 4.0;
        assert_relative_eq!(cp.c2(phi), 1.0 / 1.5, epsilon = 1e-15);
        assert_relative_eq!(cp.c1(phi), 1.0 / 4.5, epsilon = 1e-15);
        // g' cross-checked against finite differences of the metric
        let (g_prime, _) = fd(|p| metric(p, 1.0).unwrap(), phi, 1e-5);
        assert_relative_eq!(g_prime, -1.0, epsilon = 1e-9);
        assert!(coefficient_functions(ModelKind::PathHermitian, -2.0).is_err());
    }

    #[test]
    fn xi_derivatives_match_finite_differences() {
        let h = 1e-6;
        for model in ModelKind::ALL {
            for (phi, xi) in [(0.3, 0.7), (1.1, -0.4), (2.5, 2.0)] {
                let cp = CoefficientPair { model, xi };
                let up = CoefficientPair { model, xi: xi + h };
                let dn = CoefficientPair { model, xi: xi - h };
                assert_relative_eq!(
                    cp.dc2_dxi(phi),
                    (up.c2(phi) - dn.c2(phi)) / (2.0 * h),
                    max_relative = 1e-7
                );
                assert_relative_eq!(
                    cp.dc1_dxi(phi),
                    (up.c1(phi) - dn.c1(phi)) / (2.0 * h),
                    max_relative = 1e-7
                );
            }
        }
    }

    #[test]
    fn basis_examples() {
        let v = basis_function(SymmetryClass::PP, 0, 0.7);
        assert_eq!((v.f, v.d1, v.d2), (1.0, 0.0, 0.0));
        let phi = 0.7f64;
        let v = basis_function(SymmetryClass::MM, 0, phi);
        assert_relative_eq!(v.f, phi.sin());
        assert_relative_eq!(v.d1, phi.cos());
        assert_relative_eq!(v.d2, -phi.sin());
        let v = basis_function(SymmetryClass::MP, 0, phi);
        assert_relative_eq!(v.f, phi.sin() * phi.cos());
        assert_relative_eq!(v.d1, (2.0 * phi).cos(), epsilon = 1e-15);
        assert_relative_eq!(v.d2, -2.0 * (2.0 * phi).sin(), epsilon = 1e-14);
    }

    #[test]
    fn levels_and_labels() {
        assert_eq!(unperturbed_levels(SymmetryClass::PP, 3), vec![0, 2, 4]);
        assert_eq!(unperturbed_levels(SymmetryClass::MM, 2), vec![1, 3]);
        assert_eq!(unperturbed_levels(SymmetryClass::MP, 2), vec![2, 4]);
        assert_eq!(unperturbed_levels(SymmetryClass::PM, 2), vec![1, 3]);
        assert_eq!(group_labels(SymmetryClass::PP), ("A", "A1"));
        assert_eq!(group_labels(SymmetryClass::MP), ("B1", "A2"));
        assert_eq!(group_labels(SymmetryClass::PM), ("B2", "B1"));
        assert_eq!(group_labels(SymmetryClass::MM), ("B3", "B2"));
        for class in SymmetryClass::ALL {
            for k in 0..6 {
                let n = class.fourier_index(k);
                assert_eq!(class.position_of_level(n), Some(k));
            }
            assert_eq!(class.short_name().parse::<SymmetryClass>().unwrap(), class);
        }
        assert_eq!(SymmetryClass::MP.position_of_level(0), None);
        assert_eq!(SymmetryClass::PP.position_of_level(3), None);
        assert_eq!(SymmetryClass::PM.to_string(), "(+,-)");
    }

    #[test]
    fn nondimensionalization() {
        let m = 9.109e-31;
        let (xi, _) = nondimensionalize(&PhysicalEllipse::new(1.0, 1.0, m).unwrap());
        assert_eq!(xi, 0.0);
        let (xi, _) = nondimensionalize(&PhysicalEllipse::new(1.0, 2f64.sqrt(), m).unwrap());
        assert_relative_eq!(xi, 1.0, epsilon = 1e-15);
        let (xi, scale) = nondimensionalize(&PhysicalEllipse::new(2.0, 1.0, m).unwrap());
        assert_eq!(xi, -0.75);
        assert_relative_eq!(scale, HBAR * HBAR / (2.0 * m * 4.0));
        assert!(PhysicalEllipse::new(1.0, 0.0, m).is_err());
    }

    fn class_strategy() -> impl Strategy<Value = SymmetryClass> {
        prop::sample::select(SymmetryClass::ALL.to_vec())
    }

    proptest! {
        #[test]
        fn metric_has_both_symmetries(phi in -7.0f64..7.0, xi in -0.99f64..5.0) {
            let g = metric(phi, xi).unwrap();
            prop_assert!(g > 0.0);
            prop_assert!((g - metric(-phi, xi).unwrap()).abs() < 1e-14 * g);
            prop_assert!((g - metric(phi + PI, xi).unwrap()).abs() < 1e-13 * g);
        }

        #[test]
        fn constant_is_annihilated(phi in 0.0f64..6.3, xi in -0.9f64..4.0) {
            for model in ModelKind::ALL {
                let cp = coefficient_functions(model, xi).unwrap();
                prop_assert_eq!(cp.apply(phi, BasisValue { f: 1.0, d1: 0.0, d2: 0.0 }), 0.0);
            }
        }

        #[test]
        fn operator_difference(phi in 0.0f64..6.3, xi in -0.9f64..4.0) {
            let m1 = coefficient_functions(ModelKind::PathNonHermitian, xi).unwrap();
            let m2 = coefficient_functions(ModelKind::PathHermitian, xi).unwrap();
            let g = metric(phi, xi).unwrap();
            let g_prime = -xi * (2.0 * phi).sin();
            prop_assert_eq!(m1.c2(phi), m2.c2(phi));
            let diff = m1.c1(phi) - m2.c1(phi);
            prop_assert!((diff - g_prime / (2.0 * g * g)).abs() < 1e-13 * (1.0 + diff.abs()));
        }

        #[test]
        fn basis_respects_class(class in class_strategy(), k in 0usize..8, phi in 0.0f64..6.3) {
            for kind in [BasisKind::Monomial, BasisKind::Fourier] {
                let f = kind.evaluate(class, k, phi).f;
                let refl = kind.evaluate(class, k, -phi).f;
                let trans = kind.evaluate(class, k, phi + PI).f;
                prop_assert!((refl - class.reflection.sign() * f).abs() < 1e-12);
                prop_assert!((trans - class.translation.sign() * f).abs() < 1e-12);
            }
        }

        #[test]
        fn basis_derivatives_match_finite_differences(
            class in class_strategy(), k in 0usize..6, phi in 0.0f64..6.3,
        ) {
            let h = 1e-5;
            for kind in [BasisKind::Monomial, BasisKind::Fourier] {
                let v = kind.evaluate(class, k, phi);
                let (d1, _) = fd(|p| kind.evaluate(class, k, p).f, phi, h);
                // second derivative as the central difference of d1
                let (d2, _) = fd(|p| kind.evaluate(class, k, p).d1, phi, h);
                let scale = 1.0 + (k as f64 + 1.0).powi(2);
                prop_assert!((v.d1 - d1).abs() < 1e-8 * scale, "d1 {} vs {}", v.d1, d1);
                prop_assert!((v.d2 - d2).abs() < 1e-8 * scale, "d2 {} vs {}", v.d2, d2);
            }
        }
    }
}
