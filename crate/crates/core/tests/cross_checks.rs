use ellipse_spectra::analysis::scan_with;
use ellipse_spectra::perturbation::{eigenvalue_series, evaluate_series, rational_to_f64};
use ellipse_spectra::precise::precise_ritz_value;
use ellipse_spectra::solver::{convergence_scan_with, merged_spectrum_with};
use ellipse_spectra::{
    solve, BasisKind, Execution, ModelKind, Rational, RitzSystem, SymmetryClass,
};

#[test]
fn monomial_and_trigonometric_bases_span_the_same_space() {
    for model in ModelKind::ALL {
        for class in SymmetryClass::ALL {
            for xi in [-0.4, 0.8] {
                let solve_in = |basis| {
                    let system =
                        RitzSystem::build_with(model, class, xi, 8, basis, Execution::Sequential)
                            .unwrap();
                    solve(&system, 4).unwrap().eigenvalues
                };
                let mono = solve_in(BasisKind::Monomial);
                let trig = solve_in(BasisKind::Fourier);
                for (a, b) in mono.iter().zip(&trig) {
                    assert!(
                        (a - b).abs() <= 1e-7 * b.abs().max(1.0),
                        "{model} {class} xi={xi}: {a} vs {b}"
                    );
                }
            }
        }
    }
}

#[test]
fn execution_modes_agree_bitwise() {
    let seq = convergence_scan_with(
        ModelKind::PathHermitian,
        SymmetryClass::MM,
        1.0,
        5,
        14,
        4,
        Execution::Sequential,
    )
    .unwrap();
    let par = convergence_scan_with(
        ModelKind::PathHermitian,
        SymmetryClass::MM,
        1.0,
        5,
        14,
        4,
        Execution::Parallel,
    )
    .unwrap();
    assert_eq!(seq, par);

    let seq = merged_spectrum_with(
        ModelKind::PathNonHermitian,
        0.6,
        12,
        10,
        Execution::Sequential,
    )
    .unwrap();
    let par = merged_spectrum_with(
        ModelKind::PathNonHermitian,
        0.6,
        12,
        10,
        Execution::Parallel,
    )
    .unwrap();
    assert_eq!(seq, par);

    let seq = scan_with(
        ModelKind::PathHermitian,
        -0.3,
        0.3,
        7,
        10,
        3,
        Execution::Sequential,
    )
    .unwrap();
    let par = scan_with(
        ModelKind::PathHermitian,
        -0.3,
        0.3,
        7,
        10,
        3,
        Execution::Parallel,
    )
    .unwrap();
    assert_eq!(seq.to_csv(), par.to_csv());
}

#[test]
fn hermitian_series_tracks_ritz_values() {
    // the order-4 remainder is O(xi^5) with a modest constant
    let xi = 0.02;
    for n in 1..=4u32 {
        let (a, b) = SymmetryClass::partners_of_level(n).unwrap();
        for class in [a, b] {
            let series = eigenvalue_series(ModelKind::PathHermitian, class, n, 4).unwrap();
            let index = class.position_of_level(n).unwrap();
            let system = RitzSystem::build(ModelKind::PathHermitian, class, xi, 12).unwrap();
            let ritz = solve(&system, index + 1).unwrap().eigenvalues[index];
            let approx = evaluate_series(&series, xi);
            assert!(
                (approx - ritz).abs() < 20.0 * f64::from(n * n) * xi.powi(5),
                "n={n} {class}: {approx} vs {ritz}"
            );
        }
    }
}

#[test]
fn hermitian_split_appears_at_the_predicted_order() {
    // the (+,-)/(-,-) gap of level 3 opens at third order
    let xi = Rational::new(1.into(), 1000.into());
    let e = |class| {
        rational_to_f64(
            &precise_ritz_value(ModelKind::PathHermitian, class, &xi, 10, 1, 200).unwrap(),
        )
    };
    let split = e(SymmetryClass::MM) - e(SymmetryClass::PM);
    let predicted = (-7281.0 + 5823.0) / 4096.0 * 1e-9;
    assert!(
        (split - predicted).abs() < 0.05 * predicted.abs(),
        "{split} vs {predicted}"
    );
}
