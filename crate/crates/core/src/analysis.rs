//! Consistency instruments: Hellmann-Feynman slopes, the isospectral
//! Hermitian reformulation of the non-Hermitian model, and deformation scans.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::matrix::{tabulate, RitzSystem};
use crate::model::{
    group_labels, metric_unchecked, BasisKind, Deformation, ModelKind, SymmetryClass,
};
use crate::perturbation::{
    eigenvalue_series, evaluate_series, first_order_energy, improved_energy,
};
use crate::quadrature::QuadratureRule;
use crate::solver::{class_spectra, eigenpair, Reduced};

pub const BIORTHOGONALITY_THRESHOLD: f64 = 1e-10;

/// `dE/dxi = <phi| dH/dxi |psi> / <phi|psi>` for the `level`-th eigenvalue of
/// one block, with `phi` the left and `psi` the right Ritz eigenvector.
pub fn hft_derivative(
    model: ModelKind,
    class: SymmetryClass,
    xi: f64,
    level: usize,
    size: usize,
) -> Result<f64> {
    let system = RitzSystem::build(model, class, xi, size)?;
    let pair = eigenpair(&system, level)?;
    let dh = system.xi_derivative();
    let s_right = &system.s_matrix * &pair.right;
    let overlap = pair.left.dot(&s_right);
    let normalized = overlap.abs() / (pair.left.norm() * s_right.norm());
    if normalized < BIORTHOGONALITY_THRESHOLD {
        return Err(Error::BiorthogonalityFailure {
            overlap: normalized,
            threshold: BIORTHOGONALITY_THRESHOLD,
        });
    }
    Ok(pair.left.dot(&(dh * &pair.right)) / overlap)
}

/// Ritz values of the non-Hermitian model in the product weighted by
/// `sqrt(g)`, where it is symmetric:
/// `S_ij = int f_i f_j sqrt(g)` and `H_ij = int f_i' f_j' / sqrt(g)`.
pub fn weighted_spectrum(
    class: SymmetryClass,
    xi: f64,
    size: usize,
    count: usize,
) -> Result<Vec<f64>> {
    let xi = Deformation::new(xi)?.value();
    crate::matrix::check_size(BasisKind::Fourier, size)?;
    if count == 0 || count > size {
        return Err(Error::InvalidArgument(format!(
            "requested {count} eigenvalues from a system of size {size}"
        )));
    }
    let rule = QuadratureRule::for_system(size, xi);
    let table = tabulate(BasisKind::Fourier, class, size, &rule);
    let root_g: Vec<f64> = rule
        .nodes()
        .map(|phi| metric_unchecked(phi, xi).sqrt())
        .collect();
    let w = rule.weight();
    let s = DMatrix::from_fn(size, size, |i, j| {
        w * table[i]
            .iter()
            .zip(&table[j])
            .zip(&root_g)
            .map(|((a, b), r)| a.f * b.f * r)
            .sum::<f64>()
    });
    let h = DMatrix::from_fn(size, size, |i, j| {
        w * table[i]
            .iter()
            .zip(&table[j])
            .zip(&root_g)
            .map(|((a, b), r)| a.d1 * b.d1 / r)
            .sum::<f64>()
    });
    let reduced = Reduced::new(&h, &s, true)?;
    let mut ev: Vec<f64> = reduced
        .reduced()
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev.truncate(count);
    Ok(ev)
}

/// Largest relative difference between the plain-product (non-symmetric) and
/// weighted-product (symmetric) Ritz values of the non-Hermitian model over
/// the first `count` levels of every class, skipping the zero mode.
pub fn isospectral_check(xi: f64, size: usize, count: usize) -> Result<f64> {
    let plain = class_spectra(
        ModelKind::PathNonHermitian,
        xi,
        size,
        count,
        Execution::default(),
    )?;
    let mut worst = 0.0f64;
    for spectrum in &plain {
        let weighted = weighted_spectrum(spectrum.class, xi, size, spectrum.eigenvalues.len())?;
        for (a, b) in spectrum.eigenvalues.iter().zip(&weighted) {
            if b.abs() > 1e-10 {
                worst = worst.max((a - b).abs() / b.abs());
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub xi: f64,
    /// Fourier index `n` of the state at `xi = 0`.
    pub level_index: u32,
    pub class: SymmetryClass,
    pub d2_label: &'static str,
    pub energy: f64,
    pub pt_first_order: f64,
    pub pt_improved: f64,
    /// Order-4 series of this class and level, where one is computed.
    pub pt_series4: Option<f64>,
}

/// Eigenvalues over a uniform deformation grid with perturbative references.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanGrid {
    pub model: ModelKind,
    pub xi_values: Vec<f64>,
    pub size: usize,
    pub levels: u32,
    /// Ordered by `xi`, then level, then class.
    pub rows: Vec<ScanRow>,
}

pub const SCAN_CSV_HEADER: &str =
    "xi,level_index,class,d2_label,energy,pt_first_order,pt_improved,pt_series4";

impl ScanGrid {
    pub fn rows_at(&self, xi_index: usize) -> impl Iterator<Item = &ScanRow> {
        let xi = self.xi_values[xi_index];
        self.rows.iter().filter(move |r| r.xi == xi)
    }

    pub fn energy(&self, xi_index: usize, class: SymmetryClass, level: u32) -> Option<f64> {
        self.rows_at(xi_index)
            .find(|r| r.class == class && r.level_index == level)
            .map(|r| r.energy)
    }

    /// Comma separated, `\n` line endings, shortest round-trip numbers.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(SCAN_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let series = r.pt_series4.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.xi,
                r.level_index,
                r.class.short_name(),
                r.d2_label,
                r.energy,
                r.pt_first_order,
                r.pt_improved,
                series
            );
        }
        out
    }
}

/// Inclusive uniform grid of `steps` points.
pub fn deformation_grid(xi_min: f64, xi_max: f64, steps: usize) -> Result<Vec<f64>> {
    Deformation::new(xi_min)?;
    Deformation::new(xi_max)?;
    if steps == 0 || xi_max < xi_min || (steps == 1 && xi_max != xi_min) {
        return Err(Error::InvalidArgument(format!(
            "bad grid: xi_min={xi_min}, xi_max={xi_max}, steps={steps}"
        )));
    }
    if steps == 1 {
        return Ok(vec![xi_min]);
    }
    let last = steps - 1;
    Ok((0..steps)
        .map(|i| match i {
            0 => xi_min,
            i if i == last => xi_max,
            i => xi_min + (xi_max - xi_min) * (i as f64 / last as f64),
        })
        .collect())
}

/// States `1 <= n <= levels` of every class at each grid point.
pub fn scan(
    model: ModelKind,
    xi_min: f64,
    xi_max: f64,
    steps: usize,
    size: usize,
    levels: u32,
) -> Result<ScanGrid> {
    scan_with(
        model,
        xi_min,
        xi_max,
        steps,
        size,
        levels,
        Execution::default(),
    )
}

pub fn scan_with(
    model: ModelKind,
    xi_min: f64,
    xi_max: f64,
    steps: usize,
    size: usize,
    levels: u32,
    exec: Execution,
) -> Result<ScanGrid> {
    if levels == 0 {
        return Err(Error::InvalidArgument("levels must be at least 1".into()));
    }
    let per_class = levels as usize / 2 + 1;
    if per_class > size {
        return Err(Error::InvalidArgument(format!(
            "size {size} cannot resolve {levels} levels"
        )));
    }
    let xi_values = deformation_grid(xi_min, xi_max, steps)?;
    let series = match model {
        ModelKind::PathHermitian => {
            let mut out = Vec::new();
            for n in 1..=levels.min(2) {
                let (a, b) = SymmetryClass::partners_of_level(n).expect("n >= 1");
                out.push(eigenvalue_series(model, a, n, 4)?);
                out.push(eigenvalue_series(model, b, n, 4)?);
            }
            out
        }
        ModelKind::PathNonHermitian => Vec::new(),
    };
    let blocks = exec.try_map(&xi_values, |&xi| {
        let spectra = class_spectra(model, xi, size, per_class, Execution::Sequential)?;
        let mut rows = Vec::new();
        for spectrum in &spectra {
            for (k, &energy) in spectrum.eigenvalues.iter().enumerate() {
                let n = spectrum.class.fourier_index(k);
                if n == 0 || n > levels {
                    continue;
                }
                let pt_series4 = series
                    .iter()
                    .find(|s| s.class == spectrum.class && s.level == n)
                    .map(|s| evaluate_series(s, xi));
                rows.push(ScanRow {
                    xi,
                    level_index: n,
                    class: spectrum.class,
                    d2_label: group_labels(spectrum.class).0,
                    energy,
                    pt_first_order: first_order_energy(n, xi),
                    pt_improved: improved_energy(n, xi)?,
                    pt_series4,
                });
            }
        }
        rows.sort_by(|a, b| {
            a.level_index
                .cmp(&b.level_index)
                .then(a.class.cmp(&b.class))
        });
        Ok::<_, Error>(rows)
    })?;
    Ok(ScanGrid {
        model,
        xi_values,
        size,
        levels,
        rows: blocks.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::RitzSystem;
    use crate::solver::solve;

    fn fd_slope(model: ModelKind, class: SymmetryClass, xi: f64, level: usize, size: usize) -> f64 {
        let h = 1e-4;
        let e = |x: f64| {
            let sys = RitzSystem::build(model, class, x, size).unwrap();
            solve(&sys, level + 1).unwrap().eigenvalues[level]
        };
        (e(xi + h) - e(xi - h)) / (2.0 * h)
    }

    #[test]
    fn slopes_at_origin() {
        for class in SymmetryClass::ALL {
            for level in 0..3 {
                let n = class.fourier_index(level);
                let slope =
                    hft_derivative(ModelKind::PathNonHermitian, class, 0.0, level, 8).unwrap();
                assert!(
                    (slope + f64::from(n * n) / 2.0).abs() < 1e-9,
                    "{class} n={n}: {slope}"
                );
            }
        }
        let zero = hft_derivative(ModelKind::PathHermitian, SymmetryClass::PP, 0.7, 0, 8).unwrap();
        assert!(zero.abs() < 1e-10);
    }

    #[test]
    fn hft_matches_finite_differences() {
        let slope =
            hft_derivative(ModelKind::PathNonHermitian, SymmetryClass::PM, 1.0, 1, 12).unwrap();
        let fd = fd_slope(ModelKind::PathNonHermitian, SymmetryClass::PM, 1.0, 1, 12);
        assert!((slope - fd).abs() <= 1e-6 * fd.abs(), "{slope} vs {fd}");
    }

    #[test]
    fn weighted_formulation_reduces_to_plain_at_zero() {
        assert!(isospectral_check(0.0, 8, 4).unwrap() < 1e-12);
    }

    #[test]
    fn grid_validation() {
        assert_eq!(deformation_grid(-0.5, 0.5, 11).unwrap()[5], 0.0);
        assert_eq!(deformation_grid(0.2, 0.2, 1).unwrap(), vec![0.2]);
        assert!(deformation_grid(0.5, -0.5, 3).is_err());
        assert!(deformation_grid(-1.0, 0.5, 3).is_err());
        assert!(deformation_grid(0.0, 0.5, 0).is_err());
        assert!(deformation_grid(0.0, 0.5, 1).is_err());
    }

    #[test]
    fn scan_csv_layout() {
        let grid = scan(ModelKind::PathHermitian, -0.2, 0.2, 3, 8, 2).unwrap();
        let csv = grid.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], SCAN_CSV_HEADER);
        // 4 states (n = 1, 2 in two classes each) per grid point
        assert_eq!(lines.len(), 1 + 3 * 4);
        assert!(lines[1].starts_with("-0.2,1,pm,B2,"));
        assert!(lines[12].starts_with("0.2,2,mp,B1,"));
        assert!(csv.ends_with('\n'));
        assert!(lines.iter().skip(1).all(|l| !l.ends_with(',')));
        let m1 = scan(ModelKind::PathNonHermitian, 0.0, 0.0, 1, 6, 1).unwrap();
        assert!(m1.to_csv().lines().nth(1).unwrap().ends_with(','));
    }
}
