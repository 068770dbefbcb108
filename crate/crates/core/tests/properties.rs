use drem_core::fixtures;
use drem_core::linear::{drem_closed_form_error, drem_extend, drem_simulate, gradient_simulate};
use drem_core::matalg::{adjugate, determinant, left_annihilator};
use drem_core::{LinearRegression, Matrix, TimeGrid};
use proptest::prelude::*;

/// Laplace expansion along the first row.
fn det_laplace(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    if n == 1 {
        return a[0][0];
    }
    (0..n)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * a[0][j] * det_laplace(&minor(a, 0, j))
        })
        .sum()
}

fn minor(a: &[Vec<f64>], r: usize, c: usize) -> Vec<Vec<f64>> {
    a.iter()
        .enumerate()
        .filter(|(i, _)| *i != r)
        .map(|(_, row)| {
            row.iter()
                .enumerate()
                .filter(|(j, _)| *j != c)
                .map(|(_, v)| *v)
                .collect()
        })
        .collect()
}

fn adj_cofactor(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    if n == 1 {
        return vec![vec![1.0]];
    }
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if (i + j) % 2 == 0 { 1.0 } else { -1.0 } * det_laplace(&minor(a, j, i)))
                .collect()
        })
        .collect()
}

fn square() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=5).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(-2.0f64..2.0, n), n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn adjugate_matches_cofactors(a in square()) {
        let m = Matrix::from_rows(&a).unwrap();
        let adj = adjugate(&m).unwrap();
        let oracle = adj_cofactor(&a);
        for (i, row) in oracle.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                prop_assert!((adj.row(i)[j] - v).abs() <= 1e-9 * (1.0 + v.abs()));
            }
        }
        prop_assert!((determinant(&m).unwrap() - det_laplace(&a)).abs() <= 1e-9 * (1.0 + det_laplace(&a).abs()));
    }

    #[test]
    fn annihilator_kills_and_spans(rows in 3usize..=6, cols in 1usize..=2, seed in prop::collection::vec(-1.0f64..1.0, 12)) {
        let b = Matrix::from_row_major(rows, cols, seed[..rows * cols].to_vec()).unwrap();
        let n = left_annihilator(&b).unwrap();
        prop_assert!(n.matmul(&b).max_abs() < 1e-10);
        let gram = n.matmul(&n.transpose());
        prop_assert!(gram.sub(&Matrix::identity(n.rows())).max_abs() < 1e-10);
    }

    #[test]
    fn gradient_lyapunov_never_increases(
        g1 in 0.5f64..5.0, g2 in 0.5f64..5.0, t1 in -3.0f64..3.0, t2 in -3.0f64..3.0,
    ) {
        let reg = LinearRegression::simulated(fixtures::sin_cos_regressor(), &[t1, t2]).unwrap();
        let grid = TimeGrid::spanning(0.0, 10.0, 1e-2).unwrap();
        let run = gradient_simulate(&reg, &Matrix::diagonal(&[g1, g2]), &[0.0, 0.0], &grid).unwrap();
        let v = run.diagnostics.lyapunov.unwrap();
        for w in v.values().windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-9) + 1e-15);
        }
    }

    #[test]
    fn drem_channels_are_decoupled(g1 in 0.1f64..10.0, g2 in 0.1f64..10.0, g2b in 0.1f64..10.0) {
        let grid = TimeGrid::spanning(0.0, 5.0, 1e-2).unwrap();
        let ext = drem_extend(&fixtures::decaying_regression(), &[fixtures::unit_lag()], &grid).unwrap();
        let a = drem_simulate(&ext, &[g1, g2], &[0.0, 0.0]).unwrap();
        let b = drem_simulate(&ext, &[g1, g2b], &[0.0, 0.0]).unwrap();
        prop_assert_eq!(a.theta_hat[0].values(), b.theta_hat[0].values());
    }

    #[test]
    fn mixing_identity_holds(t1 in -5.0f64..5.0, t2 in -5.0f64..5.0) {
        let reg = LinearRegression::simulated(fixtures::decaying_regressor(), &[t1, t2]).unwrap();
        let grid = TimeGrid::spanning(0.0, 10.0, 1e-2).unwrap();
        let ext = drem_extend(&reg, &[fixtures::unit_lag()], &grid).unwrap();
        for (i, th) in [t1, t2].iter().enumerate() {
            for (y, phi) in ext.mixed()[i].values().iter().zip(ext.phi().values()) {
                prop_assert!((y - phi * th).abs() <= 1e-9 * (1.0 + th.abs()));
            }
        }
    }

    #[test]
    fn simulated_error_matches_closed_form(g in 0.1f64..10.0, t1 in -3.0f64..3.0) {
        let reg = LinearRegression::simulated(fixtures::decaying_regressor(), &[t1, 1.0]).unwrap();
        let grid = TimeGrid::spanning(0.0, 5.0, 1e-3).unwrap();
        let ext = drem_extend(&reg, &[fixtures::unit_lag()], &grid).unwrap();
        let run = drem_simulate(&ext, &[g, g], &[0.0, 0.0]).unwrap();
        let closed = drem_closed_form_error(ext.phi(), &[g, g], &[-t1, -1.0]).unwrap();
        for (a, b) in run.theta_tilde.unwrap().iter().zip(&closed) {
            for (x, y) in a.values().iter().zip(b.values()) {
                prop_assert!((x - y).abs() < 1e-6);
            }
        }
    }
}
