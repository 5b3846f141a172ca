//! Generalized eigenvalue problem `H c = W S c` for one symmetry block.
//!
//! `S = L L^T` by Cholesky and the reduced matrix `C = L^{-1} H L^{-T}` has the
//! same eigenvalues. For the Hermitian model `C` is symmetric; for the
//! non-Hermitian model `C` is balanced and handed to a Hessenberg/Francis QR
//! Schur decomposition.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::matrix::RitzSystem;
use crate::model::{group_labels, BasisKind, ModelKind, SymmetryClass};

/// Imaginary parts up to `IMAG_TOLERANCE * max(1, |Re W|)` are treated as
/// truncation noise of the non-Hermitian projection.
pub const IMAG_TOLERANCE: f64 = 1e-8;

/// Relative gap below which two merged levels count as degenerate.
pub const PAIRING_TOLERANCE: f64 = 1e-8;

/// Tolerance used to match eigenvalues of `C` and `C^T`.
pub const LEFT_MATCH_TOLERANCE: f64 = 1e-9;

pub fn imag_tolerance(re: f64) -> f64 {
    IMAG_TOLERANCE * re.abs().max(1.0)
}

pub fn pairing_tolerance(energy: f64) -> f64 {
    PAIRING_TOLERANCE * energy.abs().max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub model: ModelKind,
    pub class: SymmetryClass,
    pub xi: f64,
    pub size: usize,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `|Im W|` of each returned eigenvalue; zero on the symmetric path.
    pub imag_residuals: Vec<f64>,
    /// Spectral condition number of `S`.
    pub condition_estimate: f64,
}

/// Cholesky factor of `S` and the reduced matrix `C`.
pub(crate) struct Reduced {
    l: DMatrix<f64>,
    c: DMatrix<f64>,
}

impl Reduced {
    pub(crate) fn new(h: &DMatrix<f64>, s: &DMatrix<f64>, symmetric: bool) -> Result<Self> {
        let size = s.nrows();
        let chol = nalgebra::Cholesky::new(s.clone()).ok_or(Error::CholeskyFailure { size })?;
        let l = chol.l();
        let y = l
            .solve_lower_triangular(h)
            .ok_or(Error::CholeskyFailure { size })?;
        let mut c = l
            .solve_lower_triangular(&y.transpose())
            .ok_or(Error::CholeskyFailure { size })?
            .transpose();
        if symmetric {
            c = (&c + c.transpose()) * 0.5;
        }
        Ok(Reduced { l, c })
    }

    pub(crate) fn reduced(&self) -> &DMatrix<f64> {
        &self.c
    }

    /// Coefficients `x = L^{-T} y` in the original basis.
    fn back_transform(&self, y: &DVector<f64>) -> DVector<f64> {
        self.l
            .transpose()
            .solve_upper_triangular(y)
            .expect("Cholesky factor has a nonzero diagonal")
    }
}

/// Parlett-Reinsch balancing by powers of two; a similarity transform.
pub fn balance(a: &mut DMatrix<f64>) {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// Eigenvalues of a real square matrix as `(re, |im|)`, sorted by real part.
pub(crate) fn general_eigenvalues(c: &DMatrix<f64>) -> Vec<(f64, f64)> {
    let mut balanced = c.clone();
    balance(&mut balanced);
    let mut ev: Vec<(f64, f64)> = balanced
        .complex_eigenvalues()
        .iter()
        .map(|z| (z.re, z.im.abs()))
        .collect();
    ev.sort_by(|a, b| a.0.total_cmp(&b.0));
    ev
}

fn symmetric_eigenvalues(c: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = c.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn condition_number(s: &DMatrix<f64>) -> f64 {
    let ev = symmetric_eigenvalues(s);
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// The `count` smallest generalized eigenvalues of `system`.
pub fn solve(system: &RitzSystem, count: usize) -> Result<Spectrum> {
    if count == 0 || count > system.size {
        return Err(Error::InvalidArgument(format!(
            "requested {count} eigenvalues from a system of size {}",
            system.size
        )));
    }
    let hermitian = system.model.is_hermitian();
    let reduced = Reduced::new(&system.h_matrix, &system.s_matrix, hermitian)?;
    let (eigenvalues, imag_residuals) = if hermitian {
        let ev = symmetric_eigenvalues(&reduced.c);
        (ev[..count].to_vec(), vec![0.0; count])
    } else {
        let ev = general_eigenvalues(&reduced.c);
        for &(re, im) in &ev[..count] {
            let tolerance = imag_tolerance(re);
            if im > tolerance {
                return Err(Error::RealityViolation {
                    size: system.size,
                    real: re,
                    imag: im,
                    tolerance,
                });
            }
        }
        ev[..count].iter().copied().unzip()
    };
    let condition_estimate = condition_number(&system.s_matrix);
    Ok(Spectrum {
        model: system.model,
        class: system.class,
        xi: system.xi,
        size: system.size,
        eigenvalues,
        imag_residuals,
        condition_estimate,
    })
}

/// Right and left eigenvectors of one level, as coefficient vectors in the
/// system basis: `H c = W S c` and `H^T d = W S d`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub eigenvalue: f64,
    pub right: DVector<f64>,
    pub left: DVector<f64>,
}

pub(crate) fn inverse_iteration(a: &DMatrix<f64>, shift: f64) -> Result<DVector<f64>> {
    let n = a.nrows();
    let shifted = a - DMatrix::identity(n, n) * shift;
    let lu = shifted.lu();
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.1 * i as f64);
    for _ in 0..4 {
        let next = lu.solve(&v).ok_or_else(|| {
            Error::InvalidArgument("inverse iteration hit an exactly singular shift".into())
        })?;
        v = next.normalize();
    }
    Ok(v)
}

/// Eigenvectors for the `index`-th smallest eigenvalue of `system`.
pub fn eigenpair(system: &RitzSystem, index: usize) -> Result<EigenPair> {
    let spectrum = solve(system, index + 1)?;
    let value = spectrum.eigenvalues[index];
    let hermitian = system.model.is_hermitian();
    let reduced = Reduced::new(&system.h_matrix, &system.s_matrix, hermitian)?;
    let shift = value + 1e-10 * value.abs().max(1.0);
    let right_reduced = inverse_iteration(&reduced.c, shift)?;
    let left_reduced = if hermitian {
        right_reduced.clone()
    } else {
        let ct = reduced.c.transpose();
        let matched = general_eigenvalues(&ct)
            .into_iter()
            .any(|(re, _)| (re - value).abs() <= LEFT_MATCH_TOLERANCE * value.abs().max(1.0));
        if !matched {
            return Err(Error::InvalidArgument(format!(
                "no eigenvalue of the transposed problem matches {value}"
            )));
        }
        inverse_iteration(&ct, shift)?
    };
    Ok(EigenPair {
        eigenvalue: value,
        right: reduced.back_transform(&right_reduced),
        left: reduced.back_transform(&left_reduced),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub size: usize,
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub model: ModelKind,
    pub class: SymmetryClass,
    pub xi: f64,
    pub rows: Vec<ConvergenceRow>,
}

/// One solve per `N` in `n_min..=n_max`.
pub fn convergence_scan(
    model: ModelKind,
    class: SymmetryClass,
    xi: f64,
    n_min: usize,
    n_max: usize,
    count: usize,
) -> Result<ConvergenceTable> {
    convergence_scan_with(model, class, xi, n_min, n_max, count, Execution::default())
}

pub fn convergence_scan_with(
    model: ModelKind,
    class: SymmetryClass,
    xi: f64,
    n_min: usize,
    n_max: usize,
    count: usize,
    exec: Execution,
) -> Result<ConvergenceTable> {
    if n_min < count || n_max < n_min {
        return Err(Error::InvalidArgument(format!(
            "need levels <= n_min <= n_max, got levels={count}, n_min={n_min}, n_max={n_max}"
        )));
    }
    let sizes: Vec<usize> = (n_min..=n_max).collect();
    let rows = exec.try_map(&sizes, |&size| {
        let system = RitzSystem::build_with(
            model,
            class,
            xi,
            size,
            BasisKind::Fourier,
            Execution::Sequential,
        )?;
        solve(&system, count).map(|s| ConvergenceRow {
            size,
            eigenvalues: s.eigenvalues,
        })
    })?;
    Ok(ConvergenceTable {
        model,
        class,
        xi,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergedLevel {
    pub energy: f64,
    pub class: SymmetryClass,
    pub d2_label: &'static str,
    pub c2v_label: &'static str,
    /// Fourier index of the state this level connects to at `xi = 0`.
    pub unperturbed_index: u32,
    pub imag_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergedSpectrum {
    pub model: ModelKind,
    pub xi: f64,
    pub size: usize,
    pub levels: Vec<MergedLevel>,
    /// Index pairs `(i, i + 1)` into `levels` that agree within the pairing tolerance.
    pub degenerate_pairs: Vec<(usize, usize)>,
}

impl MergedSpectrum {
    /// Energy of the first level connecting to Fourier index `n`.
    pub fn level_energy(&self, n: u32) -> Option<f64> {
        self.levels
            .iter()
            .find(|l| l.unperturbed_index == n)
            .map(|l| l.energy)
    }
}

/// Spectrum per class, `count` levels each (capped at `size`).
pub fn class_spectra(
    model: ModelKind,
    xi: f64,
    size: usize,
    count: usize,
    exec: Execution,
) -> Result<Vec<Spectrum>> {
    let per_class = count.min(size);
    exec.try_map(&SymmetryClass::ALL, |&class| {
        let system = RitzSystem::build_with(
            model,
            class,
            xi,
            size,
            BasisKind::Fourier,
            Execution::Sequential,
        )?;
        solve(&system, per_class)
    })
}

/// All four blocks merged and sorted; the lowest `count` levels are kept.
pub fn merged_spectrum(
    model: ModelKind,
    xi: f64,
    size: usize,
    count: usize,
) -> Result<MergedSpectrum> {
    merged_spectrum_with(model, xi, size, count, Execution::default())
}

pub fn merged_spectrum_with(
    model: ModelKind,
    xi: f64,
    size: usize,
    count: usize,
    exec: Execution,
) -> Result<MergedSpectrum> {
    let spectra = class_spectra(model, xi, size, count, exec)?;
    Ok(merge(model, xi, size, count, &spectra))
}

pub fn merge(
    model: ModelKind,
    xi: f64,
    size: usize,
    count: usize,
    spectra: &[Spectrum],
) -> MergedSpectrum {
    let mut levels: Vec<MergedLevel> = spectra
        .iter()
        .flat_map(|s| {
            let (d2, c2v) = group_labels(s.class);
            s.eigenvalues.iter().zip(&s.imag_residuals).enumerate().map(
                move |(k, (&energy, &imag_residual))| MergedLevel {
                    energy,
                    class: s.class,
                    d2_label: d2,
                    c2v_label: c2v,
                    unperturbed_index: s.class.fourier_index(k),
                    imag_residual,
                },
            )
        })
        .collect();
    levels.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.class.cmp(&b.class)));
    // near-degenerate neighbours are ordered by class label
    for i in 1..levels.len() {
        let mut j = i;
        while j > 0
            && (levels[j].energy - levels[j - 1].energy).abs()
                <= pairing_tolerance(levels[j].energy)
            && levels[j].class.cmp(&levels[j - 1].class) == Ordering::Less
        {
            levels.swap(j, j - 1);
            j -= 1;
        }
    }
    levels.truncate(count);
    let degenerate_pairs = (1..levels.len())
        .filter(|&i| {
            (levels[i].energy - levels[i - 1].energy).abs() <= pairing_tolerance(levels[i].energy)
        })
        .map(|i| (i - 1, i))
        .collect();
    MergedSpectrum {
        model,
        xi,
        size,
        levels,
        degenerate_pairs,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureRow {
    pub n: u32,
    pub energy: f64,
    pub scaled_ground: f64,
    pub relative_deviation: f64,
}

/// Compares `E_n` with `n^2 E_1` for the non-Hermitian model, `n = 1..=max_n`.
pub fn conjecture_check(xi: f64, size: usize, max_n: u32) -> Result<Vec<ConjectureRow>> {
    if max_n == 0 {
        return Err(Error::InvalidArgument("max_n must be at least 1".into()));
    }
    // levels n <= max_n need (max_n / 2 + 1) states per class, two classes each
    let per_class = max_n as usize / 2 + 1;
    if per_class > size {
        return Err(Error::InvalidArgument(format!(
            "size {size} is too small to resolve level {max_n}"
        )));
    }
    let merged = merged_spectrum(ModelKind::PathNonHermitian, xi, size, 4 * per_class)?;
    let e1 = merged.level_energy(1).expect("level 1 is always present");
    Ok((1..=max_n)
        .map(|n| {
            let energy = merged
                .level_energy(n)
                .expect("level resolved by construction");
            let scaled_ground = f64::from(n * n) * e1;
            ConjectureRow {
                n,
                energy,
                scaled_ground,
                relative_deviation: (energy - scaled_ground).abs() / energy,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;
    use crate::model::unperturbed_levels;

    #[test]
    fn balancing_preserves_eigenvalues() {
        let mut a = DMatrix::from_row_slice(3, 3, &[1.0, 1e6, 0.0, 1e-6, 2.0, 1e4, 0.0, 1e-4, 3.0]);
        let before = general_eigenvalues(&a);
        balance(&mut a);
        let after = general_eigenvalues(&a);
        for (x, y) in before.iter().zip(&after) {
            assert_relative_eq!(x.0, y.0, max_relative = 1e-10);
        }
        assert!(a[(0, 1)].abs() < 1e6);
    }

    #[test]
    fn free_rotor_levels_in_every_block() {
        for model in ModelKind::ALL {
            for class in SymmetryClass::ALL {
                for basis in [BasisKind::Monomial, BasisKind::Fourier] {
                    let sys =
                        RitzSystem::build_with(model, class, 0.0, 6, basis, Execution::Sequential)
                            .unwrap();
                    let spectrum = solve(&sys, 6).unwrap();
                    let expected: Vec<f64> = unperturbed_levels(class, 6)
                        .iter()
                        .map(|&n| f64::from(n * n))
                        .collect();
                    // the monomial family loses digits to the conditioning of S
                    let tol = match basis {
                        BasisKind::Fourier => 1e-10,
                        BasisKind::Monomial => 1e-9,
                    };
                    for (w, e) in spectrum.eigenvalues.iter().zip(&expected) {
                        assert!((w - e).abs() <= tol * e.max(1.0), "{class} {w} vs {e}");
                    }
                }
            }
        }
    }

    #[test]
    fn monomial_and_fourier_families_agree_at_small_size() {
        for model in ModelKind::ALL {
            for class in SymmetryClass::ALL {
                let a = RitzSystem::build_with(
                    model,
                    class,
                    1.0,
                    7,
                    BasisKind::Monomial,
                    Execution::Sequential,
                )
                .unwrap();
                let b = RitzSystem::build_with(
                    model,
                    class,
                    1.0,
                    7,
                    BasisKind::Fourier,
                    Execution::Sequential,
                )
                .unwrap();
                let (sa, sb) = (solve(&a, 4).unwrap(), solve(&b, 4).unwrap());
                for (x, y) in sa.eigenvalues.iter().zip(&sb.eigenvalues) {
                    assert!(
                        (x - y).abs() <= 1e-9 * y.max(1.0),
                        "{model} {class}: {x} vs {y}"
                    );
                }
                assert!(sa.condition_estimate > 1e6);
                assert_relative_eq!(
                    sb.condition_estimate,
                    if class == SymmetryClass::PP { 2.0 } else { 1.0 }
                );
            }
        }
    }

    #[test]
    fn solve_rejects_bad_counts() {
        let sys = RitzSystem::build(ModelKind::PathHermitian, SymmetryClass::PP, 1.0, 4).unwrap();
        assert!(solve(&sys, 0).is_err());
        assert!(solve(&sys, 5).is_err());
    }

    #[test]
    fn indefinite_overlap_is_reported() {
        let mut sys =
            RitzSystem::build(ModelKind::PathHermitian, SymmetryClass::PP, 1.0, 3).unwrap();
        sys.s_matrix[(1, 1)] = -1.0;
        assert!(matches!(
            solve(&sys, 2),
            Err(Error::CholeskyFailure { size: 3 })
        ));
    }

    #[test]
    fn complex_eigenvalues_are_rejected() {
        let mut sys =
            RitzSystem::build(ModelKind::PathNonHermitian, SymmetryClass::PP, 0.0, 2).unwrap();
        // rotation block: eigenvalues 1 +- i
        sys.h_matrix = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 1.0, 1.0]);
        sys.s_matrix = DMatrix::identity(2, 2);
        assert!(matches!(
            solve(&sys, 1),
            Err(Error::RealityViolation { .. })
        ));
    }

    #[test]
    fn eigenpairs_satisfy_both_equations() {
        for model in ModelKind::ALL {
            let sys = RitzSystem::build(model, SymmetryClass::PM, 0.8, 8).unwrap();
            for idx in 0..3 {
                let p = eigenpair(&sys, idx).unwrap();
                let r = &sys.h_matrix * &p.right - &sys.s_matrix * &p.right * p.eigenvalue;
                let l = sys.h_matrix.transpose() * &p.left - &sys.s_matrix * &p.left * p.eigenvalue;
                assert!(r.norm() < 1e-9 * p.right.norm() * p.eigenvalue.max(1.0));
                assert!(l.norm() < 1e-9 * p.left.norm() * p.eigenvalue.max(1.0));
            }
        }
    }

    #[test]
    fn merged_free_rotor_has_pairs() {
        for model in ModelKind::ALL {
            let m = merged_spectrum(model, 0.0, 8, 9).unwrap();
            let e: Vec<f64> = m.levels.iter().map(|l| l.energy).collect();
            let expected = [0.0, 1.0, 1.0, 4.0, 4.0, 9.0, 9.0, 16.0, 16.0];
            for (x, y) in e.iter().zip(expected) {
                assert!((x - y).abs() < 1e-10);
            }
            assert_eq!(m.degenerate_pairs, vec![(1, 2), (3, 4), (5, 6), (7, 8)]);
            // ties ordered by class label
            assert_eq!(m.levels[1].class, SymmetryClass::PM);
            assert_eq!(m.levels[2].class, SymmetryClass::MM);
            assert_eq!(m.levels[3].class, SymmetryClass::PP);
            assert_eq!(m.levels[4].class, SymmetryClass::MP);
        }
    }

    #[test]
    fn convergence_scan_validates_range() {
        let m = ModelKind::PathHermitian;
        assert!(convergence_scan(m, SymmetryClass::MM, 1.0, 3, 6, 4).is_err());
        assert!(convergence_scan(m, SymmetryClass::MM, 1.0, 6, 5, 4).is_err());
        let t = convergence_scan(m, SymmetryClass::MM, 0.0, 4, 6, 2).unwrap();
        assert_eq!(t.rows.len(), 3);
        for row in &t.rows {
            assert!((row.eigenvalues[0] - 1.0).abs() < 1e-12);
            assert!((row.eigenvalues[1] - 9.0).abs() < 1e-12);
        }
    }

    #[test]
    fn conjecture_is_exact_for_the_circle() {
        for row in conjecture_check(0.0, 8, 4).unwrap() {
            assert!(row.relative_deviation < 1e-13);
        }
    }
}
