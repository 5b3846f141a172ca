//! High-precision Ritz values from closed-form matrix elements.
//!
//! With `a = 1 + xi/2`, `b = xi/2`, `s = sqrt(1 + xi)` and `r = b / (a + s)`,
//!
//! ```text
//! 1/g = 1/(a + b cos 2phi) = sum_k c_k exp(2ik phi),   c_k = (-r)^|k| / s
//! ```
//!
//! and since `c1 = w (1/g)'` both Hamiltonians act on exponentials as
//! `H exp(i n phi) = sum_k c_k (n^2 + 2 w k n) exp(i (n + 2k) phi)`.
//! The block matrix is therefore exact up to the rational approximation of
//! `s`, and the eigenvalue is polished by Newton's method in rational
//! arithmetic. This route shares no code with the quadrature path and serves
//! as its independent check where double precision runs out.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::model::{ModelKind, SymmetryClass};
use crate::perturbation::{block_matrix, rational_to_f64, ExpSeries, Rational, RationalMatrix};
use crate::solver::{general_eigenvalues, inverse_iteration};

fn two_pow(bits: u32) -> BigInt {
    BigInt::one() << bits
}

/// Nearest multiple of `2^-bits`.
pub fn round_to_bits(x: &Rational, bits: u32) -> Rational {
    let scale = two_pow(bits);
    let scaled = x * Rational::from_integer(scale.clone());
    Rational::new(scaled.round().to_integer(), scale)
}

/// `sqrt(x)` to within `2^-bits`.
pub fn rational_sqrt(x: &Rational, bits: u32) -> Result<Rational> {
    if x.is_negative() {
        return Err(Error::InvalidArgument(
            "square root of a negative number".into(),
        ));
    }
    let scale = two_pow(2 * bits);
    let scaled = (x * Rational::from_integer(scale)).to_integer();
    Ok(Rational::new(scaled.sqrt(), two_pow(bits)))
}

/// Exponential coefficients `c_0..=c_max` of `1/g`, rounded to `2^-bits`.
fn inverse_metric_coefficients(xi: &Rational, max: usize, bits: u32) -> Result<Vec<Rational>> {
    let one = Rational::one();
    if xi <= &-one.clone() {
        return Err(Error::Domain {
            xi: rational_to_f64(xi),
        });
    }
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let a = &one + xi * &half;
    let b = xi * &half;
    let s = rational_sqrt(&(&one + xi), bits + 8)?;
    let r = -(b / (a + &s));
    let mut out = Vec::with_capacity(max + 1);
    let mut power = one.clone() / &s;
    for _ in 0..=max {
        out.push(round_to_bits(&power, bits));
        power = round_to_bits(&(power * &r), bits + 8);
    }
    Ok(out)
}

/// Galerkin matrix of the first `size` functions of `class`, in the same
/// trigonometric basis as the perturbation engine.
pub fn precise_ritz_matrix(
    model: ModelKind,
    class: SymmetryClass,
    xi: &Rational,
    size: usize,
    bits: u32,
) -> Result<RationalMatrix> {
    let max_index = i64::from(class.fourier_index(size.saturating_sub(1)));
    let kmax = max_index as usize + 1;
    let coeffs = inverse_metric_coefficients(xi, kmax, bits)?;
    let weight = match model {
        ModelKind::PathNonHermitian => Rational::new(BigInt::one(), BigInt::from(2)),
        ModelKind::PathHermitian => Rational::one(),
    };
    Ok(block_matrix(class, size, |n| {
        let mut out = ExpSeries::new();
        for k in -(kmax as i64)..=kmax as i64 {
            let factor = Rational::from_integer(BigInt::from(n * n))
                + &weight * Rational::from_integer(BigInt::from(2 * k * n));
            if factor.is_zero() {
                continue;
            }
            let c = &coeffs[k.unsigned_abs() as usize];
            out.insert(n + 2 * k, c * factor);
        }
        out
    }))
}

/// The `index`-th smallest Ritz value, accurate to roughly `2^-(bits - 16)`.
///
/// Newton's method on `(A - lambda) x = 0` with one component of `x` pinned:
/// residuals are exact, corrections come from a double-precision LU of the
/// bordered Jacobian, so each step gains about as many bits as `f64` carries.
pub fn precise_ritz_value(
    model: ModelKind,
    class: SymmetryClass,
    xi: &Rational,
    size: usize,
    index: usize,
    bits: u32,
) -> Result<Rational> {
    if index >= size {
        return Err(Error::InvalidArgument(format!(
            "level index {index} outside a block of size {size}"
        )));
    }
    let m = precise_ritz_matrix(model, class, xi, size, bits)?;
    let approx = DMatrix::from_fn(size, size, |i, j| rational_to_f64(m.get(i, j)));
    let guess = general_eigenvalues(&approx)[index].0;
    let v = inverse_iteration(&approx, guess + 1e-10 * guess.abs().max(1.0))?;
    let target = v.iamax();
    let v = &v / v[target];

    // [A - lambda, -x; e_t^T, 0]
    let mut jac = DMatrix::zeros(size + 1, size + 1);
    jac.view_mut((0, 0), (size, size)).copy_from(&approx);
    for i in 0..size {
        jac[(i, i)] -= guess;
        jac[(i, size)] = -v[i];
    }
    jac[(size, target)] = 1.0;
    let lu = jac.lu();

    let mut x: Vec<Rational> = v
        .iter()
        .map(|&c| round_to_bits(&Rational::from_float(c).expect("finite"), bits))
        .collect();
    x[target] = Rational::one();
    let mut lambda = Rational::from_float(guess).expect("finite eigenvalue");
    let tolerance = Rational::new(BigInt::one(), two_pow(bits - 16));
    let max_steps = bits as usize / 40 + 4;
    for _ in 0..max_steps {
        let ax = m.mul_vec(&x);
        let mut rhs = DVector::zeros(size + 1);
        for i in 0..size {
            rhs[i] = -rational_to_f64(&(&ax[i] - &lambda * &x[i]));
        }
        let step = lu
            .solve(&rhs)
            .ok_or_else(|| Error::InvalidArgument("singular Newton system".into()))?;
        let dlambda = Rational::from_float(step[size]).expect("finite step");
        for (xi_, &dx) in x.iter_mut().zip(step.iter()) {
            *xi_ = round_to_bits(
                &(&*xi_ + Rational::from_float(dx).expect("finite step")),
                bits,
            );
        }
        x[target] = Rational::one();
        lambda = round_to_bits(&(&lambda + &dlambda), bits);
        if dlambda.abs() < tolerance {
            return Ok(lambda);
        }
    }
    Err(Error::RefinementStalled { steps: max_steps })
}
