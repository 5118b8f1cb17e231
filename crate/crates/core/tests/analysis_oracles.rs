mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use vqe_core::analysis::{
    fit_quadratic_minimum, monte_carlo_minimum_uncertainty, overlap, spectrum_of, tangle, FitPoint,
};
use vqe_core::{DenseHermitian, StateVector};

fn two_qubit(amps: [(f64, f64); 4]) -> StateVector {
    StateVector::normalized(amps.iter().map(|&(re, im)| c(re, im)).collect()).unwrap()
}

#[test]
fn spectrum_matches_characteristic_polynomial_roots() {
    let mut r = rng(41);
    for dim in [2, 4] {
        for _ in 0..30 {
            let m = random_hermitian(&mut r, dim);
            let s = spectrum_of(&DenseHermitian::new(m.clone()).unwrap());
            let roots = characteristic_roots(&m);
            for (a, b) in s.eigenvalues.iter().zip(&roots) {
                assert!((a - b).abs() < 1e-8, "{a} vs {b}");
            }
            for k in 0..dim {
                let v = state_vec(&s.eigenvector(k));
                let res = (&m * &v - &v * c(s.eigenvalues[k], 0.0)).norm();
                assert!(res < 1e-10);
            }
        }
    }
}

#[test]
fn tangle_matches_the_determinant_formula() {
    let mut r = rng(42);
    for _ in 0..100 {
        let s = random_state(&mut r, 2);
        let a = s.amplitudes();
        let oracle = 4.0 * (a[0] * a[3] - a[1] * a[2]).norm_sqr();
        let t = tangle(&s).unwrap();
        assert!((t - oracle).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&t));
    }
}

#[test]
fn tangle_reference_states() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = two_qubit([(h, 0.0), (0.0, 0.0), (0.0, 0.0), (h, 0.0)]);
    assert!((tangle(&bell).unwrap() - 1.0).abs() < 1e-12);
    let singlet = two_qubit([(0.0, 0.0), (h, 0.0), (-h, 0.0), (0.0, 0.0)]);
    assert!((tangle(&singlet).unwrap() - 1.0).abs() < 1e-12);
    let product = two_qubit([(0.5, 0.0), (0.5, 0.0), (0.5, 0.0), (0.5, 0.0)]);
    assert!(tangle(&product).unwrap() < 1e-12);
    assert!(tangle(&StateVector::basis_state(2, 2).unwrap()).unwrap() < 1e-12);
}

#[test]
fn tangle_is_invariant_under_local_unitaries() {
    let mut r = rng(43);
    for _ in 0..100 {
        let s = random_state(&mut r, 2);
        let u = kron(&random_unitary(&mut r, 2), &random_unitary(&mut r, 2));
        let t = s.apply_unitary(&u).unwrap();
        assert!((tangle(&s).unwrap() - tangle(&t).unwrap()).abs() < 1e-10);
    }
}

#[test]
fn overlap_is_symmetric_and_unitarily_invariant() {
    let mut r = rng(44);
    for n in 1..=3 {
        for _ in 0..30 {
            let a = random_state(&mut r, n);
            let b = random_state(&mut r, n);
            let u = random_unitary(&mut r, 1 << n);
            let o = overlap(&a, &b).unwrap();
            assert!((o - overlap(&b, &a).unwrap()).abs() < 1e-12);
            let moved = overlap(&a.apply_unitary(&u).unwrap(), &b.apply_unitary(&u).unwrap()).unwrap();
            assert!((o - moved).abs() < 1e-10);
            assert!((overlap(&a, &a).unwrap() - 1.0).abs() < 1e-12);
            let oracle = (state_vec(&a).adjoint() * state_vec(&b))[(0, 0)].norm();
            assert!((o - oracle).abs() < 1e-12);
        }
    }
}

/// Weighted normal equations solved in the raw variable.
fn normal_equations(points: &[FitPoint]) -> DVector<f64> {
    let x = DMatrix::from_fn(points.len(), 3, |i, j| points[i].r.powi(2 - j as i32));
    let w = DMatrix::from_diagonal(&DVector::from_iterator(points.len(), points.iter().map(|p| 1.0 / p.variance)));
    let y = DVector::from_iterator(points.len(), points.iter().map(|p| p.energy));
    let xtw = x.transpose() * w;
    (&xtw * &x).lu().solve(&(xtw * y)).unwrap()
}

#[test]
fn noiseless_parabola_is_recovered() {
    let (a, b, c0) = (0.7, -2.1, 0.4);
    let points: Vec<FitPoint> = (0..7)
        .map(|i| {
            let r = 0.5 + 0.25 * i as f64;
            FitPoint {
                r,
                energy: a * r * r + b * r + c0,
                variance: 1e-4,
            }
        })
        .collect();
    let fit = fit_quadratic_minimum(&points).unwrap();
    assert!((fit.a - a).abs() < 1e-9 && (fit.b - b).abs() < 1e-9 && (fit.c - c0).abs() < 1e-9);
    let r_min = -b / (2.0 * a);
    assert!((fit.r_min.unwrap() - r_min).abs() < 1e-9);
    assert!((fit.e_min.unwrap() - (c0 - b * b / (4.0 * a))).abs() < 1e-9);
    assert!(fit.chi_square < 1e-12);
}

#[test]
fn weighted_fit_matches_the_normal_equations() {
    let mut r = rng(45);
    for _ in 0..20 {
        let points: Vec<FitPoint> = (0..8)
            .map(|i| FitPoint {
                r: 1.0 + 0.1 * i as f64,
                energy: r.random_range(-1.0..1.0),
                variance: r.random_range(0.01..0.2),
            })
            .collect();
        let fit = fit_quadratic_minimum(&points).unwrap();
        let sol = normal_equations(&points);
        assert!((fit.a - sol[0]).abs() < 1e-6 * sol[0].abs().max(1.0));
        assert!((fit.b - sol[1]).abs() < 1e-6 * sol[1].abs().max(1.0));
        assert!((fit.c - sol[2]).abs() < 1e-6 * sol[2].abs().max(1.0));
    }
}

#[test]
fn reported_uncertainties_are_calibrated() {
    let (a, b, c0) = (1.3, -3.0, 0.2);
    let true_r = -b / (2.0 * a);
    let true_e = c0 - b * b / (4.0 * a);
    let sigma = 0.01;
    let mut r = rng(46);
    let (mut in_r, mut in_e, mut in_a) = (0, 0, 0);
    for trial in 0..100u64 {
        let points: Vec<FitPoint> = (0..9)
            .map(|i| {
                let x = 0.75 + 0.09 * i as f64;
                FitPoint {
                    r: x,
                    energy: a * x * x + b * x + c0 + sigma * gaussian(&mut r),
                    variance: sigma * sigma,
                }
            })
            .collect();
        let fit = fit_quadratic_minimum(&points).unwrap();
        let u = monte_carlo_minimum_uncertainty(&fit, 10_000, trial).unwrap();
        in_r += ((fit.r_min.unwrap() - true_r).abs() <= 3.0 * u.sigma_r_min) as usize;
        in_e += ((fit.e_min.unwrap() - true_e).abs() <= 3.0 * u.sigma_e_min) as usize;
        in_a += ((fit.a - a).abs() <= 3.0 * fit.covariance[0][0].sqrt()) as usize;
    }
    assert!(in_r >= 95 && in_e >= 95 && in_a >= 95, "{in_r} {in_e} {in_a}");
}

#[test]
fn fit_needs_four_points() {
    let p = FitPoint {
        r: 1.0,
        energy: 0.0,
        variance: 1.0,
    };
    let pts: Vec<FitPoint> = (0..3).map(|i| FitPoint { r: i as f64, ..p }).collect();
    assert!(fit_quadratic_minimum(&pts).is_err());
}
