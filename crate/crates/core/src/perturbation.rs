//! Exact Rayleigh-Schrodinger series of the block eigenvalues in powers of `xi`.
//!
//! With `1/g = sum_k (-xi)^k cos^{2k}` and `g' = -xi sin(2 phi)` both models
//! expand as `H = sum_k xi^k H_k` with
//!
//! ```text
//! H_0 = -d^2/dphi^2
//! H_k = -(-1)^k cos^{2k} d^2/dphi^2 + w k (-1)^k sin(2 phi) cos^{2k-2} d/dphi
//! ```
//!
//! where `w = 1/2` for the non-Hermitian model and `w = 1` for the Hermitian
//! one. Acting on `exp(i n phi)` every `H_k` produces a finite exponential sum
//! with rational coefficients, so the matrices of `H_k` in the trigonometric
//! block basis are exact rationals and `H_k` couples block indices at most `k`
//! apart.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{Deformation, ModelKind, SymmetryClass};

pub type Rational = BigRational;

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn binomial(n: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, j| {
        acc * BigInt::from(n - j) / BigInt::from(j + 1)
    })
}

/// Finite Fourier sum `sum_p c_p exp(i p phi)`.
pub(crate) type ExpSeries = BTreeMap<i64, Rational>;

pub(crate) fn accumulate(series: &mut ExpSeries, index: i64, value: Rational) {
    let entry = series.entry(index).or_insert_with(Rational::zero);
    *entry += value;
    if entry.is_zero() {
        series.remove(&index);
    }
}

/// Coefficients of `cos^{2m}` as an exponential sum.
fn cos_power(m: u64) -> ExpSeries {
    let denom = BigInt::from(4u32).pow(m as u32);
    (0..=2 * m)
        .map(|j| {
            (
                2 * m as i64 - 2 * j as i64,
                Rational::new(binomial(2 * m, j), denom.clone()),
            )
        })
        .collect()
}

/// `H_k exp(i n phi)`.
fn apply_term(model: ModelKind, k: u64, n: i64) -> ExpSeries {
    let mut out = ExpSeries::new();
    let n_rat = Rational::from_integer(BigInt::from(n));
    if k == 0 {
        accumulate(&mut out, n, &n_rat * &n_rat);
        return out;
    }
    let sign = if k.is_multiple_of(2) {
        Rational::one()
    } else {
        -Rational::one()
    };
    // -(-1)^k cos^{2k} (exp)'' = (-1)^k n^2 cos^{2k} exp
    let second = &sign * &n_rat * &n_rat;
    for (p, c) in cos_power(k) {
        accumulate(&mut out, n + p, &second * c);
    }
    // w k (-1)^k sin(2 phi) cos^{2k-2} (i n) exp, with i sin(2 phi) = (e^{2i} - e^{-2i}) / 2
    let weight = match model {
        ModelKind::PathNonHermitian => rat(1, 2),
        ModelKind::PathHermitian => Rational::one(),
    };
    let first = weight * Rational::from_integer(BigInt::from(k)) * &sign * &n_rat * rat(1, 2);
    for (p, c) in cos_power(k - 1) {
        let term = &first * c;
        accumulate(&mut out, n + p + 2, term.clone());
        accumulate(&mut out, n + p - 2, -term);
    }
    out
}

/// Block basis element as an exponential sum: `1`, `2 cos(n phi)` or
/// `2i sin(n phi)` (the common factor `i` is dropped).
fn block_vector(class: SymmetryClass, n: u32) -> ExpSeries {
    let n = i64::from(n);
    let mut v = ExpSeries::new();
    if n == 0 {
        v.insert(0, Rational::one());
    } else {
        v.insert(n, Rational::one());
        let mirror = if class.is_cosine() {
            Rational::one()
        } else {
            -Rational::one()
        };
        v.insert(-n, mirror);
    }
    v
}

/// Dense square matrix of rationals, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    size: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(size: usize) -> Self {
        RationalMatrix {
            size,
            data: vec![Rational::zero(); size * size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.size + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Rational) {
        self.data[i * self.size + j] = value;
    }

    pub fn transpose(&self) -> Self {
        let mut t = RationalMatrix::zeros(self.size);
        for i in 0..self.size {
            for j in 0..self.size {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    /// Largest `|i - j|` with a nonzero entry.
    pub fn bandwidth(&self) -> usize {
        let mut band = 0;
        for i in 0..self.size {
            for j in 0..self.size {
                if !self.get(i, j).is_zero() {
                    band = band.max(i.abs_diff(j));
                }
            }
        }
        band
    }

    pub(crate) fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        (0..self.size)
            .map(|i| {
                v.iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .fold(Rational::zero(), |acc, (j, x)| acc + self.get(i, j) * x)
            })
            .collect()
    }
}

/// Taylor coefficients `[H_0, ..., H_J]` of one block Hamiltonian.
///
/// Entry `(i, j)` is the coefficient of basis element `i` in `H_k` applied to
/// basis element `j`, for the basis `{1, 2 cos(n phi)}` or `{2i sin(n phi)}`.
/// Away from the constant function this basis has uniform norm, so the
/// matrices coincide with the orthonormal representation; with the constant
/// included they differ from it only by a diagonal similarity.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSeries {
    pub model: ModelKind,
    pub class: SymmetryClass,
    pub cutoff: usize,
    pub matrices: Vec<RationalMatrix>,
}

impl OperatorSeries {
    pub fn order(&self) -> usize {
        self.matrices.len() - 1
    }

    /// Fourier indices of the block basis.
    pub fn fourier_indices(&self) -> Vec<u32> {
        (0..self.cutoff)
            .map(|k| self.class.fourier_index(k))
            .collect()
    }

    /// The first `cutoff` block functions only.
    pub fn truncated(&self, cutoff: usize) -> OperatorSeries {
        let cutoff = cutoff.min(self.cutoff);
        let matrices = self
            .matrices
            .iter()
            .map(|m| {
                let mut t = RationalMatrix::zeros(cutoff);
                for i in 0..cutoff {
                    for j in 0..cutoff {
                        t.set(i, j, m.get(i, j).clone());
                    }
                }
                t
            })
            .collect();
        OperatorSeries {
            cutoff,
            matrices,
            ..self.clone()
        }
    }

    /// Same series with every `H_k` for `k >= 1` transposed.
    pub fn adjoint(&self) -> OperatorSeries {
        OperatorSeries {
            matrices: self
                .matrices
                .iter()
                .map(RationalMatrix::transpose)
                .collect(),
            ..self.clone()
        }
    }
}

pub fn expand_operator(
    model: ModelKind,
    class: SymmetryClass,
    order: usize,
    cutoff: usize,
) -> OperatorSeries {
    let matrices = (0..=order as u64)
        .map(|k| block_matrix(class, cutoff, |n| apply_term(model, k, n)))
        .collect();
    OperatorSeries {
        model,
        class,
        cutoff,
        matrices,
    }
}

/// Matrix of an operator, given by its action on `exp(i n phi)`, in the first
/// `cutoff` block functions of `class`.
pub(crate) fn block_matrix(
    class: SymmetryClass,
    cutoff: usize,
    apply: impl Fn(i64) -> ExpSeries,
) -> RationalMatrix {
    let basis: Vec<ExpSeries> = (0..cutoff)
        .map(|k| block_vector(class, class.fourier_index(k)))
        .collect();
    let norms: Vec<Rational> = basis
        .iter()
        .map(|v| v.values().fold(Rational::zero(), |acc, c| acc + c * c))
        .collect();
    let mut m = RationalMatrix::zeros(cutoff);
    for (j, vj) in basis.iter().enumerate() {
        let mut image = ExpSeries::new();
        for (&p, c) in vj {
            for (q, d) in apply(p) {
                accumulate(&mut image, q, c * d);
            }
        }
        for (i, vi) in basis.iter().enumerate() {
            let projection = vi
                .iter()
                .fold(Rational::zero(), |acc, (p, c)| match image.get(p) {
                    Some(d) => acc + c * d,
                    None => acc,
                });
            if !projection.is_zero() {
                m.set(i, j, projection / &norms[i]);
            }
        }
    }
    m
}

/// Exact coefficients `[E^(0), ..., E^(J)]` of one level in one class.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalSeries {
    pub model: ModelKind,
    pub class: SymmetryClass,
    pub level: u32,
    pub coefficients: Vec<Rational>,
}

impl RationalSeries {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// `"p/q"` renderings, integers without a denominator.
    pub fn coefficient_strings(&self) -> Vec<String> {
        self.coefficients.iter().map(ToString::to_string).collect()
    }

    pub fn coefficient_values(&self) -> Vec<f64> {
        self.coefficients.iter().map(rational_to_f64).collect()
    }

    /// Partial sum through order `order` (clamped to the available order).
    pub fn truncated(&self, order: usize) -> RationalSeries {
        RationalSeries {
            coefficients: self.coefficients[..=order.min(self.order())].to_vec(),
            ..self.clone()
        }
    }
}

impl fmt::Display for RationalSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, c) in self.coefficients.iter().enumerate() {
            match j {
                0 => write!(f, "{c}")?,
                _ => {
                    let sign = if c.is_negative() { '-' } else { '+' };
                    write!(f, " {sign} {} xi^{j}", c.abs())?
                }
            }
        }
        Ok(())
    }
}

impl Serialize for RationalSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.coefficient_strings())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // numerator or denominator beyond f64 range
        let num = r.numer().to_f64().unwrap_or(f64::NAN);
        let den = r.denom().to_f64().unwrap_or(f64::NAN);
        num / den
    })
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    text.trim()
        .parse::<Rational>()
        .map_err(|e| Error::InvalidArgument(format!("bad rational '{text}': {e}")))
}

/// Non-degenerate order-by-order recursion for block index `target`.
///
/// With `psi^(0) = e_target` and intermediate normalization
/// (`psi^(j)_target = 0` for `j >= 1`):
///
/// ```text
/// E^(j)           = sum_{k=1..j} (H_k psi^(j-k))_target
/// (d_i - d_t) psi^(j)_i = -sum_{k=1..j} (H_k psi^(j-k))_i + sum_{k=1..j} E^(k) psi^(j-k)_i
/// ```
///
/// No symmetry of `H_k` is assumed.
pub fn block_recursion(ops: &OperatorSeries, target: usize, order: usize) -> Vec<Rational> {
    let n = ops.cutoff;
    assert!(target < n, "target index outside the block");
    assert!(order <= ops.order(), "operator series too short");
    let diag: Vec<Rational> = (0..n).map(|i| ops.matrices[0].get(i, i).clone()).collect();
    let e0 = diag[target].clone();
    let mut psi: Vec<Vec<Rational>> = Vec::with_capacity(order + 1);
    let mut unit = vec![Rational::zero(); n];
    unit[target] = Rational::one();
    psi.push(unit);
    let mut energies = vec![e0.clone()];
    for j in 1..=order {
        let mut rhs = vec![Rational::zero(); n];
        for k in 1..=j {
            let hv = ops.matrices[k].mul_vec(&psi[j - k]);
            for (r, x) in rhs.iter_mut().zip(hv) {
                *r += x;
            }
        }
        let ej = rhs[target].clone();
        let mut next = vec![Rational::zero(); n];
        for i in (0..n).filter(|&i| i != target) {
            let mut value = -rhs[i].clone();
            for k in 1..j {
                // k = j pairs E^(j) with psi^(0)_i = 0
                value += &energies[k] * &psi[j - k][i];
            }
            if !value.is_zero() {
                next[i] = value / (&diag[i] - &e0);
            }
        }
        energies.push(ej);
        psi.push(next);
    }
    energies
}

/// Block size that makes the coefficients through `order` exact for level `n`.
pub fn exact_cutoff(level: u32, order: usize) -> usize {
    level as usize + 2 * order + 2
}

pub fn eigenvalue_series(
    model: ModelKind,
    class: SymmetryClass,
    level: u32,
    order: usize,
) -> Result<RationalSeries> {
    eigenvalue_series_with_cutoff(model, class, level, order, exact_cutoff(level, order))
}

pub fn eigenvalue_series_with_cutoff(
    model: ModelKind,
    class: SymmetryClass,
    level: u32,
    order: usize,
    cutoff: usize,
) -> Result<RationalSeries> {
    let target = class
        .position_of_level(level)
        .ok_or(Error::LevelNotInClass { level, class })?;
    if cutoff <= target {
        return Err(Error::InvalidArgument(format!(
            "cutoff {cutoff} does not reach level {level}"
        )));
    }
    let ops = expand_operator(model, class, order, cutoff);
    Ok(RationalSeries {
        model,
        class,
        level,
        coefficients: block_recursion(&ops, target, order),
    })
}

/// Series for several `(class, level)` pairs, dispatched in parallel.
pub fn eigenvalue_series_batch(
    model: ModelKind,
    requests: &[(SymmetryClass, u32)],
    order: usize,
    exec: Execution,
) -> Result<Vec<RationalSeries>> {
    exec.try_map(requests, |&(class, level)| {
        eigenvalue_series(model, class, level, order)
    })
}

/// Horner evaluation of the partial sum at `xi`.
pub fn evaluate_series(series: &RationalSeries, xi: f64) -> f64 {
    series
        .coefficient_values()
        .iter()
        .rev()
        .fold(0.0, |acc, c| acc * xi + c)
}

/// `n^2 (1 - xi/2)`.
pub fn first_order_energy(n: u32, xi: f64) -> f64 {
    f64::from(n * n) * (1.0 - 0.5 * xi)
}

/// `n^2 / sqrt(1 + xi)`: the diagonal element of the full Hamiltonian in the
/// unperturbed state, singular at `xi = -1`.
pub fn improved_energy(n: u32, xi: f64) -> Result<f64> {
    let xi = Deformation::new(xi)?.value();
    Ok(f64::from(n * n) / (1.0 + xi).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SplitOrder {
    /// First order at which the two class series differ.
    At(usize),
    /// Identical through the computed order.
    NotThrough(usize),
}

impl fmt::Display for SplitOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitOrder::At(j) => write!(f, "{j}"),
            SplitOrder::NotThrough(j) => write!(f, "not split through {j}"),
        }
    }
}

/// Order at which the Hermitian model lifts the two-fold degeneracy of `n^2`.
pub fn splitting_order(level: u32, max_order: usize) -> Result<SplitOrder> {
    let (a, b) = SymmetryClass::partners_of_level(level)
        .ok_or_else(|| Error::InvalidArgument("level 0 is not degenerate".into()))?;
    if max_order == 0 {
        return Err(Error::InvalidArgument(
            "max_order must be at least 1".into(),
        ));
    }
    let requests = [(a, level), (b, level)];
    let series = eigenvalue_series_batch(
        ModelKind::PathHermitian,
        &requests,
        max_order,
        Execution::default(),
    )?;
    Ok(series[0]
        .coefficients
        .iter()
        .zip(&series[1].coefficients)
        .position(|(x, y)| x != y)
        .map_or(SplitOrder::NotThrough(max_order), SplitOrder::At))
}
