use std::sync::Arc;

use phinlab_core::coeff::{dlog, DualNumber, GaloisShape, Level, ProductElement};
use phinlab_core::padic::{FieldElement, LocalFieldDesc};
use phinlab_core::Error;
use proptest::prelude::*;

fn desc() -> Arc<LocalFieldDesc> {
    Arc::new(LocalFieldDesc::qp(7, 30).unwrap())
}

fn ints(d: &Arc<LocalFieldDesc>, v: &[i64]) -> Vec<FieldElement> {
    v.iter().map(|&x| FieldElement::from_int(d, x)).collect()
}

#[test]
fn frobenius_shift_examples() {
    let d = desc();
    let s = GaloisShape::new(1, 3).unwrap();
    let v = ProductElement::new(s, Level::K0, ints(&d, &[1, 2, 3])).unwrap();
    let w = v.frobenius_shift().unwrap();
    assert_eq!(w.comps(), ints(&d, &[3, 1, 2]).as_slice());
    let c = ProductElement::constant(s, Level::K0, &FieldElement::from_int(&d, 4));
    assert_eq!(c.frobenius_shift().unwrap(), c);
    assert_eq!(w.frobenius_shift().unwrap().frobenius_shift().unwrap(), v);
    let k = ProductElement::one(s, Level::K, &d);
    assert!(matches!(
        k.frobenius_shift(),
        Err(Error::LevelMismatch { .. })
    ));
}

#[test]
fn trace_examples() {
    let d = desc();
    let s = GaloisShape::new(2, 3).unwrap();
    assert_eq!(
        ProductElement::one(s, Level::K, &d).trace_k().unwrap(),
        FieldElement::from_int(&d, 6)
    );
    assert_eq!(
        ProductElement::one_hot(s, Level::K, &d, 4)
            .trace_k()
            .unwrap(),
        FieldElement::one(&d)
    );
    let s2 = GaloisShape::new(1, 2).unwrap();
    let c = ProductElement::new(s2, Level::K, ints(&d, &[5, -5])).unwrap();
    assert!(c.trace_k().unwrap().decide_zero().unwrap());
}

#[test]
fn embedding_examples() {
    let d = desc();
    let s = GaloisShape::new(2, 1).unwrap();
    let a = ProductElement::new(s, Level::K0, ints(&d, &[3])).unwrap();
    assert_eq!(
        a.embed_k0_in_k().unwrap().comps(),
        ints(&d, &[3, 3]).as_slice()
    );
    let s2 = GaloisShape::new(1, 2).unwrap();
    let b = ProductElement::new(s2, Level::K0, ints(&d, &[3, 8])).unwrap();
    assert_eq!(
        b.embed_k0_in_k().unwrap().comps(),
        ints(&d, &[3, 8]).as_slice()
    );
}

#[test]
fn dual_number_examples() {
    let d = desc();
    let z = FieldElement::zero(&d);
    let one = FieldElement::one(&d);
    let a = FieldElement::from_int(&d, 3);
    let b = FieldElement::from_int(&d, 5);
    let x = DualNumber::new(a.clone(), z.clone()).unwrap();
    let y = DualNumber::new(b.clone(), z.clone()).unwrap();
    assert_eq!(
        x.mul(&y).unwrap(),
        DualNumber::new(&a * &b, z.clone()).unwrap()
    );
    let eps = DualNumber::new(z.clone(), one.clone()).unwrap();
    assert_eq!(
        eps.mul(&eps).unwrap(),
        DualNumber::new(z.clone(), z.clone()).unwrap()
    );
    let u = DualNumber::new(a.clone(), b.clone()).unwrap();
    assert_eq!(
        u.mul(&u.invert().unwrap()).unwrap(),
        DualNumber::new(one, z).unwrap()
    );
    assert_eq!(dlog(&u).unwrap(), b.try_div(&a).unwrap());
    let other = Arc::new(LocalFieldDesc::qp(5, 30).unwrap());
    assert_eq!(
        DualNumber::new(a, FieldElement::one(&other)).unwrap_err(),
        Error::BaseMismatch
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shift_has_order_f(f in 1usize..5, vals in proptest::collection::vec(-50i64..50, 4)) {
        let d = desc();
        let s = GaloisShape::new(1, f).unwrap();
        let v = ProductElement::new(s, Level::K0, ints(&d, &vals[..f])).unwrap();
        let mut w = v.clone();
        for _ in 0..f {
            w = w.frobenius_shift().unwrap();
        }
        prop_assert_eq!(w, v.clone());
        // automorphism: shift(v^2) = shift(v)^2
        let sq = v.try_mul(&v).unwrap().frobenius_shift().unwrap();
        let sh = v.frobenius_shift().unwrap();
        prop_assert_eq!(sq, sh.try_mul(&sh).unwrap());
    }

    #[test]
    fn trace_is_linear(e in 1usize..3, f in 1usize..3, a in proptest::collection::vec(-50i64..50, 4), b in proptest::collection::vec(-50i64..50, 4), c in -9i64..9) {
        let d = desc();
        let s = GaloisShape::new(e, f).unwrap();
        let n = s.n();
        let x = ProductElement::new(s, Level::K, ints(&d, &a[..n])).unwrap();
        let y = ProductElement::new(s, Level::K, ints(&d, &b[..n])).unwrap();
        let cc = FieldElement::from_int(&d, c);
        let lhs = x.scale(&cc).try_add(&y).unwrap().trace_k().unwrap();
        prop_assert_eq!(lhs, &(&cc * &x.trace_k().unwrap()) + &y.trace_k().unwrap());
        // trace of an embedded K0 vector is e times the sum
        let v = ProductElement::new(s, Level::K0, ints(&d, &a[..f])).unwrap();
        let sum: i64 = a[..f].iter().sum();
        prop_assert_eq!(v.embed_k0_in_k().unwrap().trace_k().unwrap(), FieldElement::from_int(&d, e as i64 * sum));
    }

    #[test]
    fn dual_numbers_follow_leibniz(a0 in 1i64..50, a1 in -50i64..50, b0 in -50i64..50, b1 in -50i64..50) {
        let d = desc();
        let fe = |x| FieldElement::from_int(&d, x);
        let x = DualNumber::new(fe(a0), fe(a1)).unwrap();
        let y = DualNumber::new(fe(b0), fe(b1)).unwrap();
        let p = x.mul(&y).unwrap();
        prop_assert_eq!(p.derivative().clone(), fe(a0 * b1 + a1 * b0));
        prop_assert_eq!(x.mul(&y).unwrap(), y.mul(&x).unwrap());
        let z = x.add(&y).unwrap().mul(&x).unwrap();
        prop_assert_eq!(z, x.mul(&x).unwrap().add(&y.mul(&x).unwrap()).unwrap());
    }
}
