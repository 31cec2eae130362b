use std::sync::Arc;

use phinlab_core::coeff::{GaloisShape, Level, ProductElement};
use phinlab_core::filtration::{is_admissible, Filtration, FlagStep};
use phinlab_core::linalg::Matrix;
use phinlab_core::monodromy::{self, MonodromyData};
use phinlab_core::padic::{FieldElement, LocalFieldDesc, Rational};
use phinlab_core::phin::{PhiNModule, Submodule};
use phinlab_core::Error;
use proptest::prelude::*;

fn desc() -> Arc<LocalFieldDesc> {
    Arc::new(LocalFieldDesc::qp(7, 30).unwrap())
}

fn fe(d: &Arc<LocalFieldDesc>, k: i64) -> FieldElement {
    FieldElement::from_int(d, k)
}

fn mono(
    d: &Arc<LocalFieldDesc>,
    f: usize,
    alpha: FieldElement,
    m: Vec<i64>,
    k: Vec<i64>,
    ell: Vec<i64>,
) -> MonodromyData {
    let s = GaloisShape::new(1, f).unwrap();
    MonodromyData {
        alpha,
        m,
        k,
        ell: ProductElement::new(s, Level::K, ell.into_iter().map(|x| fe(d, x)).collect()).unwrap(),
        degenerate: false,
    }
}

#[test]
fn rejects_malformed_flags() {
    let d = desc();
    let s = GaloisShape::new(1, 1).unwrap();
    let line = Matrix::from_ints(&d, &[&[1], &[0]]);
    let same = vec![vec![
        FlagStep {
            jump: 0,
            space: Matrix::identity(&d, 2),
        },
        FlagStep {
            jump: 0,
            space: line.clone(),
        },
    ]];
    assert!(matches!(
        Filtration::new(s, 2, same),
        Err(Error::InvalidFiltration(_))
    ));
    let flat = vec![vec![
        FlagStep {
            jump: 0,
            space: line.clone(),
        },
        FlagStep {
            jump: 1,
            space: line.clone(),
        },
    ]];
    assert!(matches!(
        Filtration::new(s, 2, flat),
        Err(Error::InvalidFiltration(_))
    ));
    let wrong_dim = vec![vec![FlagStep {
        jump: 0,
        space: Matrix::identity(&d, 3),
    }]];
    assert!(matches!(
        Filtration::new(s, 2, wrong_dim),
        Err(Error::InvalidFiltration(_))
    ));
    assert!(Filtration::new(s, 2, vec![]).is_err());
}

#[test]
fn hodge_number_examples() {
    let d = desc();
    let s = GaloisShape::new(2, 2).unwrap();
    assert_eq!(Filtration::trivial(s, &d, 3, 2).hodge_number(), 4 * 3 * 2);
    let alpha = fe(&d, 1);
    let (_, fil) = monodromy::build_monodromy_unchecked(&mono(
        &d,
        2,
        alpha,
        vec![1, 0],
        vec![4, 3],
        vec![1, 2],
    ))
    .unwrap();
    assert_eq!(fil.hodge_number(), 1 + 4 + 3);
    assert_eq!(fil.jumps(s_index(&fil, 0)), vec![1, 4]);
    assert_eq!(fil.fil(s_index(&fil, 1), 1).cols(), 1);
    assert_eq!(fil.fil(s_index(&fil, 1), 4).cols(), 0);
    assert_eq!(fil.fil(s_index(&fil, 0), -9).cols(), 2);
}

fn s_index(fil: &Filtration, i: usize) -> phinlab_core::coeff::EmbeddingIndex {
    fil.shape().embeddings().nth(i).unwrap()
}

#[test]
fn induced_on_the_n_kernel() {
    let d = desc();
    // p alpha: e v(alpha) = 1 >= sum m = 1, e(2 + 1) = 3 = k + m
    let alpha = fe(&d, 7);
    let data = mono(&d, 1, alpha, vec![1], vec![2], vec![5]);
    let (m, fil) = monodromy::build_monodromy(&data).unwrap();
    let sub = Submodule::from_slot0(&m, &Matrix::from_ints(&d, &[&[0], &[1]])).unwrap();
    assert!(m.is_stable(&sub).unwrap());
    let sf = fil.induce_on_submodule(&sub).unwrap();
    assert_eq!(sf.hodge_number(), 1);
    let qf = fil.induce_on_quotient(&sub).unwrap();
    assert_eq!(qf.hodge_number(), 2);
    let v = is_admissible(&m, &fil).unwrap();
    assert!(v.admissible);
    assert_eq!(v.t_n, Rational::from_integer(3));
    assert_eq!(v.checked.len(), 1);
    assert_eq!(v.checked[0].t_n, Rational::from_integer(1));
    assert_eq!(v.checked[0].t_h, 1);
}

#[test]
fn dual_filtration_of_monodromy_module() {
    let d = desc();
    let (_, fil) =
        monodromy::build_monodromy_unchecked(&mono(&d, 1, fe(&d, 1), vec![0], vec![1], vec![4]))
            .unwrap();
    let dual = fil.dual().unwrap();
    let s = s_index(&dual, 0);
    assert_eq!(dual.jumps(s), vec![-1, 0]);
    // the line e1* - L e2*, coordinates (e2*, e1*)
    let want = Matrix::from_ints(&d, &[&[-4], &[1]]);
    assert!(dual.steps(s)[1].space.same_span(&want).unwrap());
    assert_eq!(dual.hodge_number(), -fil.hodge_number());
    assert!(dual.dual().unwrap().same_as(&fil).unwrap());
}

#[test]
fn tensor_filtration_examples() {
    let d = desc();
    let s = GaloisShape::new(1, 1).unwrap();
    let a = Filtration::trivial(s, &d, 2, 3);
    let (_, b) =
        monodromy::build_monodromy_unchecked(&mono(&d, 1, fe(&d, 1), vec![0], vec![1], vec![2]))
            .unwrap();
    let t = a.tensor(&b).unwrap();
    assert_eq!(t.rank(), 4);
    assert_eq!(t.jumps(s_index(&t, 0)), vec![3, 4]);
    assert_eq!(
        t.hodge_number(),
        2 * b.hodge_number() + 2 * a.hodge_number()
    );
    let bb = b.tensor(&b).unwrap();
    assert_eq!(bb.jumps(s_index(&bb, 0)), vec![0, 1, 2]);
    assert_eq!(bb.fil(s_index(&bb, 0), 2).cols(), 1);
    assert_eq!(bb.fil(s_index(&bb, 0), 1).cols(), 3);
}

#[test]
fn filtration_type_comparison() {
    let d = desc();
    let (_, f1) =
        monodromy::build_monodromy_unchecked(&mono(&d, 1, fe(&d, 1), vec![0], vec![1], vec![2]))
            .unwrap();
    let (_, f2) =
        monodromy::build_monodromy_unchecked(&mono(&d, 1, fe(&d, 1), vec![-3], vec![5], vec![2]))
            .unwrap();
    let (_, f3) =
        monodromy::build_monodromy_unchecked(&mono(&d, 1, fe(&d, 1), vec![0], vec![1], vec![3]))
            .unwrap();
    assert!(f1.same_filtration_type(&f2).unwrap());
    assert!(!f1.same_as(&f2).unwrap());
    assert!(!f1.same_filtration_type(&f3).unwrap());
    let s = GaloisShape::new(1, 1).unwrap();
    assert!(!f1
        .same_filtration_type(&Filtration::trivial(s, &d, 2, 0))
        .unwrap());
}

#[test]
fn small_alpha_is_witnessed_by_the_kernel_line() {
    // e v(alpha) = 0 < m = 1; no data can break this bound alone, so the
    // balance condition fails too
    let d = desc();
    let data = mono(&d, 1, fe(&d, 1), vec![1], vec![3], vec![5]);
    let c = data.conditions().unwrap();
    assert!(c.weights_ordered && !c.balanced && !c.bound);
    let (m, fil) = monodromy::build_monodromy_unchecked(&data).unwrap();
    let v = is_admissible(&m, &fil).unwrap();
    assert!(!v.admissible);
    let e1 = Matrix::from_ints(&d, &[&[0], &[1]]);
    let w = v
        .violations
        .iter()
        .find(|w| w.submodule.basis(0).same_span(&e1).unwrap())
        .unwrap();
    assert_eq!((w.t_n, w.t_h), (Rational::from_integer(0), 1));
}

#[test]
fn split_module_with_bad_line() {
    let d = desc();
    let s = GaloisShape::new(1, 1).unwrap();
    let m = PhiNModule::new(
        s,
        vec![Matrix::diagonal(&d, &[fe(&d, 7), fe(&d, 1)])],
        vec![Matrix::zeros(&d, 2, 2)],
    )
    .unwrap();
    let fil = Filtration::new(
        s,
        2,
        vec![vec![
            FlagStep {
                jump: 0,
                space: Matrix::identity(&d, 2),
            },
            FlagStep {
                jump: 1,
                space: Matrix::from_ints(&d, &[&[0], &[1]]),
            },
        ]],
    )
    .unwrap();
    let v = is_admissible(&m, &fil).unwrap();
    assert!(!v.admissible);
    assert_eq!(v.violations.len(), 1);
    assert_eq!(v.violations[0].t_n, Rational::from_integer(0));
    assert_eq!(v.violations[0].t_h, 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sub_and_quotient_hodge_numbers_add(m0 in -3i64..3, dk in 1i64..4, ell in -20i64..20) {
        let d = desc();
        let (m, fil) = monodromy::build_monodromy_unchecked(&mono(&d, 1, fe(&d, 1), vec![m0], vec![m0 + dk], vec![ell])).unwrap();
        for sub in m.n_kernel_flag().unwrap().into_iter().filter(|s| s.rank() < 2) {
            let a = fil.induce_on_submodule(&sub).unwrap().hodge_number();
            let b = fil.induce_on_quotient(&sub).unwrap().hodge_number();
            prop_assert_eq!(a + b, fil.hodge_number());
        }
    }

    #[test]
    fn admissibility_is_self_dual(v in 0i64..3, m0 in 0i64..3, dk in 1i64..5, ell in -10i64..10, degenerate: bool) {
        let d = desc();
        let alpha = fe(&d, 7i64.pow(v as u32));
        let mut data = mono(&d, 1, alpha, vec![m0], vec![m0 + dk], vec![ell]);
        data.degenerate = degenerate;
        let (m, fil) = monodromy::build_monodromy_unchecked(&data).unwrap();
        let a = is_admissible(&m, &fil).unwrap().admissible;
        let b = is_admissible(&m.dual().unwrap(), &fil.dual().unwrap()).unwrap().admissible;
        prop_assert_eq!(a, b);
        let dd = fil.dual().unwrap().dual().unwrap();
        prop_assert!(dd.same_as(&fil).unwrap());
    }

    #[test]
    fn tensor_hodge_number_is_rank_weighted(j1 in -3i64..3, j2 in -3i64..3, ell in -5i64..5) {
        let d = desc();
        let s = GaloisShape::new(1, 1).unwrap();
        let a = Filtration::trivial(s, &d, 3, j1);
        let (_, b) = monodromy::build_monodromy_unchecked(&mono(&d, 1, fe(&d, 1), vec![j2], vec![j2 + 2], vec![ell])).unwrap();
        let t = a.tensor(&b).unwrap();
        prop_assert_eq!(t.hodge_number(), 2 * a.hodge_number() + 3 * b.hodge_number());
    }
}

#[test]
fn trivial_submodules_and_shifts() {
    let d = desc();
    let data = mono(&d, 2, fe(&d, 7), vec![0, 1], vec![2, 3], vec![1, 4]);
    let (m, fil) = monodromy::build_monodromy_unchecked(&data).unwrap();
    let zero = Submodule::new(vec![Matrix::zeros(&d, 2, 0); 2]).unwrap();
    let z = fil.induce_on_submodule(&zero).unwrap();
    assert_eq!((z.rank(), z.hodge_number()), (0, 0));
    assert!(z.flags().iter().all(|f| f.is_empty()));
    assert!(fil
        .induce_on_quotient(&zero)
        .unwrap()
        .same_as(&fil)
        .unwrap());
    let full = Submodule::new(vec![Matrix::identity(&d, 2); 2]).unwrap();
    assert!(fil
        .induce_on_submodule(&full)
        .unwrap()
        .same_as(&fil)
        .unwrap());
    assert_eq!(fil.induce_on_quotient(&full).unwrap().rank(), 0);
    assert!(m.is_stable(&full).unwrap());

    let shifted = Filtration::new(
        fil.shape(),
        2,
        fil.flags()
            .iter()
            .map(|f| {
                f.iter()
                    .map(|st| FlagStep {
                        jump: st.jump + 1,
                        space: st.space.clone(),
                    })
                    .collect()
            })
            .collect(),
    )
    .unwrap();
    assert!(shifted.same_filtration_type(&fil).unwrap());
    assert_eq!(shifted.hodge_number(), fil.hodge_number() + 2 * 2);
}

#[test]
fn w_filtrations_share_their_type() {
    let d = desc();
    let s = GaloisShape::new(1, 2).unwrap();
    let ell = ProductElement::new(s, Level::K, vec![fe(&d, 3), fe(&d, -2)]).unwrap();
    let (_, f1) = monodromy::build_w(&ell, &[1, 1]).unwrap();
    let (_, fk) = monodromy::build_w(&ell, &[2, 5]).unwrap();
    assert!(f1.same_filtration_type(&fk).unwrap());
    assert!(!f1.same_as(&fk).unwrap());
    assert_eq!((f1.hodge_number(), fk.hodge_number()), (0, 0));
}

#[test]
fn tensor_of_rank_one_flags() {
    let d = desc();
    let s = GaloisShape::new(1, 1).unwrap();
    let t = Filtration::trivial(s, &d, 1, 2)
        .tensor(&Filtration::trivial(s, &d, 1, -5))
        .unwrap();
    assert_eq!(t.rank(), 1);
    assert_eq!(t.jumps(s_index(&t, 0)), vec![-3]);
    let z = Filtration::zero(s, &d);
    assert_eq!(t.tensor(&z).unwrap().rank(), 0);
    assert_eq!(z.dual().unwrap().rank(), 0);
}
