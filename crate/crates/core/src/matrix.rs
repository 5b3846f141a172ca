//! Overlap and Hamiltonian matrices of the Ritz problem `|H - W S| = 0`.
//!
//! Matrix elements use the plain product `<u|v> = int_0^{2 pi} u v dphi`.
//! `S` comes from closed forms; `H` from the periodic trapezoid rule.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{
    coefficient_functions, BasisKind, BasisValue, CoefficientPair, Deformation, ModelKind, Parity,
    SymmetryClass,
};
use crate::quadrature::{wallis, QuadratureRule};

/// Largest size accepted for the monomial basis. Its overlap matrix has a
/// condition number near `1e14` already at `N = 10`.
pub const MONOMIAL_SIZE_LIMIT: usize = 24;
pub const FOURIER_SIZE_LIMIT: usize = 512;

/// `S_ij` for the monomial family, from Wallis integrals.
pub fn overlap_element(class: SymmetryClass, i: usize, j: usize) -> f64 {
    let s = i + j;
    match (class.reflection, class.translation) {
        (Parity::Even, Parity::Even) => wallis(s),
        (Parity::Even, Parity::Odd) => wallis(s + 1),
        // sin^2 cos^{2q} = cos^{2q} - cos^{2q+2}
        (Parity::Odd, Parity::Even) => wallis(s + 1) - wallis(s + 2),
        (Parity::Odd, Parity::Odd) => wallis(s) - wallis(s + 1),
    }
}

/// `S_ij` for the trigonometric family: `2 pi` for the constant, `pi` on the
/// rest of the diagonal.
pub fn fourier_overlap_element(class: SymmetryClass, i: usize, j: usize) -> f64 {
    if i != j {
        0.0
    } else if class.fourier_index(i) == 0 {
        2.0 * PI
    } else {
        PI
    }
}

/// `H_ij = <phi_i | H | phi_j>` in the monomial family.
pub fn hamiltonian_element(
    model: ModelKind,
    class: SymmetryClass,
    xi: f64,
    i: usize,
    j: usize,
    rule: &QuadratureRule,
) -> Result<f64> {
    hamiltonian_element_in(BasisKind::Monomial, model, class, xi, i, j, rule)
}

pub fn hamiltonian_element_in(
    basis: BasisKind,
    model: ModelKind,
    class: SymmetryClass,
    xi: f64,
    i: usize,
    j: usize,
    rule: &QuadratureRule,
) -> Result<f64> {
    let coeffs = coefficient_functions(model, xi)?;
    Ok(rule.integrate(|phi| {
        basis.evaluate(class, i, phi).f * coeffs.apply(phi, basis.evaluate(class, j, phi))
    }))
}

/// Model-2 element after integration by parts, `int phi_i' phi_j' / g`.
/// Only used as a cross-check of [`hamiltonian_element_in`].
pub fn hermitian_element_by_parts(
    basis: BasisKind,
    class: SymmetryClass,
    xi: f64,
    i: usize,
    j: usize,
    rule: &QuadratureRule,
) -> Result<f64> {
    let coeffs = coefficient_functions(ModelKind::PathHermitian, xi)?;
    Ok(rule.integrate(|phi| {
        basis.evaluate(class, i, phi).d1 * basis.evaluate(class, j, phi).d1 * coeffs.c2(phi)
    }))
}

/// Basis values tabulated on the quadrature nodes, `[function][node]`.
pub(crate) fn tabulate(
    basis: BasisKind,
    class: SymmetryClass,
    size: usize,
    rule: &QuadratureRule,
) -> Vec<Vec<BasisValue>> {
    let nodes: Vec<f64> = rule.nodes().collect();
    (0..size)
        .map(|k| {
            nodes
                .iter()
                .map(|&phi| basis.evaluate(class, k, phi))
                .collect()
        })
        .collect()
}

/// `int f_i (-a2 f_j'' - a1 f_j') dphi` for tabulated coefficient functions.
pub(crate) fn assemble_operator(
    table: &[Vec<BasisValue>],
    a2: &[f64],
    a1: &[f64],
    weight: f64,
    exec: Execution,
) -> DMatrix<f64> {
    let n = table.len();
    let applied: Vec<Vec<f64>> = table
        .iter()
        .map(|col| {
            col.iter()
                .zip(a2.iter().zip(a1))
                .map(|(v, (c2, c1))| -(c2 * v.d2 + c1 * v.d1))
                .collect()
        })
        .collect();
    let rows: Vec<usize> = (0..n).collect();
    let rows = exec.map(&rows, |&i| {
        (0..n)
            .map(|j| {
                weight
                    * table[i]
                        .iter()
                        .zip(&applied[j])
                        .map(|(u, hv)| u.f * hv)
                        .sum::<f64>()
            })
            .collect::<Vec<f64>>()
    });
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

/// The `N x N` pair `(H, S)` for one model, class, deformation and basis.
#[derive(Debug, Clone, PartialEq)]
pub struct RitzSystem {
    pub model: ModelKind,
    pub class: SymmetryClass,
    pub xi: f64,
    pub size: usize,
    pub basis: BasisKind,
    pub rule: QuadratureRule,
    pub h_matrix: DMatrix<f64>,
    pub s_matrix: DMatrix<f64>,
}

impl RitzSystem {
    /// Builds in the trigonometric family, which spans the same space as the
    /// monomial one and keeps `S` diagonal.
    pub fn build(model: ModelKind, class: SymmetryClass, xi: f64, size: usize) -> Result<Self> {
        Self::build_with(
            model,
            class,
            xi,
            size,
            BasisKind::Fourier,
            Execution::default(),
        )
    }

    pub fn build_with(
        model: ModelKind,
        class: SymmetryClass,
        xi: f64,
        size: usize,
        basis: BasisKind,
        exec: Execution,
    ) -> Result<Self> {
        let rule = QuadratureRule::for_system(size, xi);
        Self::build_with_rule(model, class, xi, size, basis, rule, exec)
    }

    pub fn build_with_rule(
        model: ModelKind,
        class: SymmetryClass,
        xi: f64,
        size: usize,
        basis: BasisKind,
        rule: QuadratureRule,
        exec: Execution,
    ) -> Result<Self> {
        let xi = Deformation::new(xi)?.value();
        check_size(basis, size)?;
        let coeffs = CoefficientPair { model, xi };
        let nodes: Vec<f64> = rule.nodes().collect();
        let c2: Vec<f64> = nodes.iter().map(|&phi| coeffs.c2(phi)).collect();
        let c1: Vec<f64> = nodes.iter().map(|&phi| coeffs.c1(phi)).collect();
        let table = tabulate(basis, class, size, &rule);
        let h_matrix = assemble_operator(&table, &c2, &c1, rule.weight(), exec);
        Ok(RitzSystem {
            model,
            class,
            xi,
            size,
            basis,
            rule,
            h_matrix,
            s_matrix: overlap_matrix(basis, class, size),
        })
    }

    /// Matrix of `dH/dxi` in the same basis and rule.
    pub fn xi_derivative(&self) -> DMatrix<f64> {
        let coeffs = CoefficientPair {
            model: self.model,
            xi: self.xi,
        };
        let nodes: Vec<f64> = self.rule.nodes().collect();
        let a2: Vec<f64> = nodes.iter().map(|&phi| coeffs.dc2_dxi(phi)).collect();
        let a1: Vec<f64> = nodes.iter().map(|&phi| coeffs.dc1_dxi(phi)).collect();
        let table = tabulate(self.basis, self.class, self.size, &self.rule);
        assemble_operator(&table, &a2, &a1, self.rule.weight(), Execution::Sequential)
    }
}

pub(crate) fn check_size(basis: BasisKind, size: usize) -> Result<()> {
    let limit = match basis {
        BasisKind::Monomial => MONOMIAL_SIZE_LIMIT,
        BasisKind::Fourier => FOURIER_SIZE_LIMIT,
    };
    if size == 0 {
        Err(Error::InvalidArgument(
            "basis size must be at least 1".into(),
        ))
    } else if size > limit {
        Err(Error::SizeTooLarge { size, limit })
    } else {
        Ok(())
    }
}

pub fn overlap_matrix(basis: BasisKind, class: SymmetryClass, size: usize) -> DMatrix<f64> {
    match basis {
        BasisKind::Monomial => DMatrix::from_fn(size, size, |i, j| overlap_element(class, i, j)),
        BasisKind::Fourier => {
            DMatrix::from_fn(size, size, |i, j| fourier_overlap_element(class, i, j))
        }
    }
}

/// Convenience wrapper with the default basis and execution mode.
pub fn build_system(
    model: ModelKind,
    class: SymmetryClass,
    xi: f64,
    size: usize,
) -> Result<RitzSystem> {
    RitzSystem::build(model, class, xi, size)
}
