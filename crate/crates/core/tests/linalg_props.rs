mod common;

use approx::assert_relative_eq;
use optdesign::linalg::{gram, inverse_spd, logdet_spd, rank, Matrix, RANK_TOL};
use proptest::prelude::*;

fn int_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-2i64..=2, cols), rows)
}

fn to_matrix(rows: &[Vec<i64>]) -> Matrix {
    let f: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    Matrix::from_rows(&f).unwrap()
}

fn to_i128(rows: &[Vec<i64>]) -> Vec<Vec<i128>> {
    rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect()
}

proptest! {
    #[test]
    fn gram_is_symmetric_and_matches_integer_products(x in (1usize..6).prop_flat_map(|c| int_matrix(c + 3, c))) {
        let g = gram(&to_matrix(&x));
        let exact = common::int_gram(&to_i128(&x));
        for i in 0..g.rows() {
            for j in 0..g.cols() {
                prop_assert_eq!(g[(i, j)], g[(j, i)]);
                prop_assert_eq!(g[(i, j)], exact[i][j] as f64);
            }
        }
    }

    #[test]
    fn logdet_agrees_with_exact_determinant(x in (1usize..6).prop_flat_map(|c| int_matrix(c + 4, c))) {
        let g = gram(&to_matrix(&x));
        let det = common::int_det(&common::int_gram(&to_i128(&x)));
        let ld = logdet_spd(&g);
        if det == 0 {
            prop_assert!(ld.is_singular);
        } else {
            prop_assert!(!ld.is_singular);
            prop_assert!((ld.logdet - (det as f64).ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn inverse_round_trip(x in (1usize..6).prop_flat_map(|c| int_matrix(c + 4, c))) {
        let g = gram(&to_matrix(&x));
        match inverse_spd(&g) {
            Ok(inv) => {
                let prod = g.matmul(&inv).unwrap();
                let eye = Matrix::identity(g.rows());
                for i in 0..g.rows() {
                    for j in 0..g.cols() {
                        prop_assert!((prod[(i, j)] - eye[(i, j)]).abs() < 1e-8);
                    }
                }
            }
            Err(_) => prop_assert_eq!(common::int_det(&common::int_gram(&to_i128(&x))), 0),
        }
    }

    #[test]
    fn rank_matches_exact_rank(x in (1usize..7).prop_flat_map(|c| int_matrix(c + 2, c))) {
        prop_assert_eq!(rank(&to_matrix(&x), RANK_TOL), common::int_rank(&to_i128(&x)));
    }
}

#[test]
fn logdet_of_scaled_identity() {
    let m = Matrix::identity(5).scale(3.0);
    assert_relative_eq!(logdet_spd(&m).logdet, 5.0 * 3f64.ln(), epsilon = 1e-12);
}
