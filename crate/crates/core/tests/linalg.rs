use std::sync::Arc;

use phinlab_core::linalg::Matrix;
use phinlab_core::padic::{FieldElement, LocalFieldDesc};
use proptest::prelude::*;

fn desc() -> Arc<LocalFieldDesc> {
    Arc::new(LocalFieldDesc::qp(5, 30).unwrap())
}

fn matrix(d: &Arc<LocalFieldDesc>, n: usize, vals: &[i64]) -> Matrix {
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| FieldElement::from_int(d, vals[i * n + j]))
                .collect()
        })
        .collect();
    Matrix::from_rows(d, rows).unwrap()
}

#[test]
fn subspace_operations() {
    let d = desc();
    let a = Matrix::from_ints(&d, &[&[1, 0], &[0, 1], &[0, 0]]);
    let b = Matrix::from_ints(&d, &[&[1, 0], &[1, 0], &[0, 1]]);
    let i = a.intersect(&b).unwrap();
    assert!(i
        .same_span(&Matrix::from_ints(&d, &[&[1], &[1], &[0]]))
        .unwrap());
    let ann = a.annihilator().unwrap();
    assert!(ann
        .same_span(&Matrix::from_ints(&d, &[&[0], &[0], &[1]]))
        .unwrap());
    assert_eq!(Matrix::zeros(&d, 3, 0).annihilator().unwrap().cols(), 3);
}

#[test]
fn singular_matrices() {
    let d = desc();
    let m = Matrix::from_ints(&d, &[&[1, 2], &[2, 4]]);
    assert!(m.det().unwrap().decide_zero().unwrap());
    assert_eq!(m.rank().unwrap(), 1);
    assert!(m.inverse().is_err());
    assert_eq!(m.kernel().unwrap().cols(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_nullity_and_inverse(n in 1usize..4, vals in proptest::collection::vec(-6i64..6, 9)) {
        let d = desc();
        let m = matrix(&d, n, &vals);
        let r = m.rank().unwrap();
        let k = m.kernel().unwrap();
        prop_assert_eq!(r + k.cols(), n);
        prop_assert!(m.try_mul(&k).unwrap().decide_zero().unwrap());
        if r == n {
            let inv = m.inverse().unwrap();
            prop_assert!(m.try_mul(&inv).unwrap().decide_eq(&Matrix::identity(&d, n)).unwrap());
            prop_assert!(!m.det().unwrap().decide_zero().unwrap());
        } else {
            prop_assert!(m.det().unwrap().decide_zero().unwrap());
        }
    }

    #[test]
    fn det_is_multiplicative(n in 1usize..4, a in proptest::collection::vec(-6i64..6, 9), b in proptest::collection::vec(-6i64..6, 9)) {
        let d = desc();
        let (x, y) = (matrix(&d, n, &a), matrix(&d, n, &b));
        prop_assert_eq!(x.try_mul(&y).unwrap().det().unwrap(), &x.det().unwrap() * &y.det().unwrap());
    }
}
