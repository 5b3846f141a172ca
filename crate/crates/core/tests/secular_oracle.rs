//! Substituting a truncated eigenvalue series into the secular determinant of
//! the same block must cancel every power of `xi` through the truncation order.

use ellipse_spectra::perturbation::{block_recursion, expand_operator};
use ellipse_spectra::{ModelKind, Rational, SymmetryClass};
use num_traits::Zero;

/// Power series in `xi`, truncated at a fixed length.
type Poly = Vec<Rational>;

fn mul(a: &Poly, b: &Poly) -> Poly {
    let len = a.len();
    let mut out = vec![Rational::zero(); len];
    for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Laplace expansion along the first row; blocks here are at most 6x6.
fn det(m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    let len = m[0][0].len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut out = vec![Rational::zero(); len];
    for col in 0..n {
        if m[0][col].iter().all(Zero::is_zero) {
            continue;
        }
        let minor: Vec<Vec<Poly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != col)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let term = mul(&m[0][col], &det(&minor));
        for (o, t) in out.iter_mut().zip(term) {
            if col % 2 == 0 {
                *o += t;
            } else {
                *o -= t;
            }
        }
    }
    out
}

fn check(model: ModelKind, class: SymmetryClass, level: u32, order: usize, cutoff: usize) {
    let target = class.position_of_level(level).unwrap();
    let ops = expand_operator(model, class, order + 1, cutoff);
    let series = block_recursion(&ops, target, order + 1);
    let len = order + 2;
    let matrix: Vec<Vec<Poly>> = (0..cutoff)
        .map(|i| {
            (0..cutoff)
                .map(|j| {
                    let mut p: Poly = (0..len)
                        .map(|k| ops.matrices[k].get(i, j).clone())
                        .collect();
                    if i == j {
                        for (c, e) in p.iter_mut().zip(&series[..=order]) {
                            *c -= e;
                        }
                    }
                    p
                })
                .collect()
        })
        .collect();
    let d = det(&matrix);
    for (k, c) in d.iter().enumerate().take(order + 1) {
        assert!(
            c.is_zero(),
            "{model} {class} n={level}: xi^{k} coefficient {c}"
        );
    }
    // leading remainder: next series coefficient times the unperturbed gaps
    let diag = |i: usize| ops.matrices[0].get(i, i).clone();
    let gaps = (0..cutoff)
        .filter(|&i| i != target)
        .fold(Rational::from_integer(1.into()), |acc, i| {
            acc * (diag(i) - diag(target))
        });
    assert_eq!(
        d[order + 1],
        &series[order + 1] * gaps,
        "{model} {class} n={level}"
    );
    assert!(!d[order + 1].is_zero());
}

#[test]
fn hermitian_series_cancel_the_determinant() {
    check(ModelKind::PathHermitian, SymmetryClass::PM, 1, 4, 5);
    check(ModelKind::PathHermitian, SymmetryClass::MP, 4, 3, 5);
    check(ModelKind::PathHermitian, SymmetryClass::PP, 2, 4, 4);
}

#[test]
fn non_hermitian_series_cancel_the_determinant() {
    check(ModelKind::PathNonHermitian, SymmetryClass::MM, 3, 4, 5);
    check(ModelKind::PathNonHermitian, SymmetryClass::PP, 2, 3, 6);
}
