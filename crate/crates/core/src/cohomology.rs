//! Coordinate models of `H^1(L)`, `H^1(L(1))` and `H^2(L(1))`.
//!
//! `H^1(L) = Hom(K^x, L)` is written `a1 psi_1 + a2 psi_2` with `a1` in `L`
//! and `a2` in `L (x) K`; `psi_1` takes the value `f` on Frobenius.
//! `H^1(L(1)) = (p) L + exp(L (x) K)` is written `b1 (p) + exp(b2)`.
//! `H^2(L(1))` is generated by `psi_1 u (p)`.

use crate::coeff::{GaloisShape, Level, ProductElement};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::padic::FieldElement;
use crate::phin::PhiNModule;

use std::sync::Arc;

use crate::padic::LocalFieldDesc;

#[derive(Clone, Debug, PartialEq)]
pub struct H1Trivial {
    pub a1: FieldElement,
    pub a2: ProductElement,
}

#[derive(Clone, Debug, PartialEq)]
pub struct H1Tate {
    pub b1: FieldElement,
    pub b2: ProductElement,
}

#[derive(Clone, Debug, PartialEq)]
pub struct H2Class {
    pub c: FieldElement,
}

impl H1Trivial {
    pub fn new(a1: FieldElement, a2: ProductElement) -> Result<Self> {
        if a2.level() != Level::K {
            return Err(Error::LevelMismatch {
                expected: "K",
                found: "K0",
            });
        }
        if !a1.same_field(&a2.comps()[0]) {
            return Err(Error::FieldMismatch);
        }
        Ok(H1Trivial { a1, a2 })
    }

    pub fn zero(shape: GaloisShape, desc: &Arc<LocalFieldDesc>) -> Self {
        H1Trivial {
            a1: FieldElement::zero(desc),
            a2: ProductElement::zero(shape, Level::K, desc),
        }
    }

    pub fn shape(&self) -> GaloisShape {
        self.a2.shape()
    }

    pub fn try_add(&self, other: &H1Trivial) -> Result<Self> {
        Ok(H1Trivial {
            a1: self.a1.try_add(&other.a1)?,
            a2: self.a2.try_add(&other.a2)?,
        })
    }

    pub fn scale(&self, x: &FieldElement) -> Self {
        H1Trivial {
            a1: &self.a1 * x,
            a2: self.a2.scale(x),
        }
    }

    /// Basis vector `k` of the model: `psi_1` for `k = 0`, else `e_{k-1} psi_2`.
    pub fn basis(shape: GaloisShape, desc: &Arc<LocalFieldDesc>, k: usize) -> Self {
        if k == 0 {
            H1Trivial {
                a1: FieldElement::one(desc),
                a2: ProductElement::zero(shape, Level::K, desc),
            }
        } else {
            H1Trivial {
                a1: FieldElement::zero(desc),
                a2: ProductElement::one_hot(shape, Level::K, desc, k - 1),
            }
        }
    }

    fn coords(&self) -> Vec<FieldElement> {
        std::iter::once(self.a1.clone())
            .chain(self.a2.comps().iter().cloned())
            .collect()
    }
}

impl H1Tate {
    pub fn new(b1: FieldElement, b2: ProductElement) -> Result<Self> {
        if b2.level() != Level::K {
            return Err(Error::LevelMismatch {
                expected: "K",
                found: "K0",
            });
        }
        if !b1.same_field(&b2.comps()[0]) {
            return Err(Error::FieldMismatch);
        }
        Ok(H1Tate { b1, b2 })
    }

    pub fn shape(&self) -> GaloisShape {
        self.b2.shape()
    }

    pub fn try_add(&self, other: &H1Tate) -> Result<Self> {
        Ok(H1Tate {
            b1: self.b1.try_add(&other.b1)?,
            b2: self.b2.try_add(&other.b2)?,
        })
    }

    pub fn scale(&self, x: &FieldElement) -> Self {
        H1Tate {
            b1: &self.b1 * x,
            b2: self.b2.scale(x),
        }
    }

    /// `(p)` for `k = 0`, else `exp(e_{k-1})`.
    pub fn basis(shape: GaloisShape, desc: &Arc<LocalFieldDesc>, k: usize) -> Self {
        if k == 0 {
            H1Tate {
                b1: FieldElement::one(desc),
                b2: ProductElement::zero(shape, Level::K, desc),
            }
        } else {
            H1Tate {
                b1: FieldElement::zero(desc),
                b2: ProductElement::one_hot(shape, Level::K, desc, k - 1),
            }
        }
    }
}

fn inv_n(shape: GaloisShape, desc: &Arc<LocalFieldDesc>) -> Result<FieldElement> {
    FieldElement::from_int(desc, shape.n() as i64).invert()
}

/// `x u y = (a1 b1 - tr(a2 b2) / n) psi_1 u (p)`.
pub fn cup(x: &H1Trivial, y: &H1Tate) -> Result<H2Class> {
    if x.shape() != y.shape() {
        return Err(Error::ShapeMismatch(
            "cup of classes over different shapes".into(),
        ));
    }
    let t = x.a2.try_mul(&y.b2)?.trace_k()?;
    let c =
        x.a1.try_mul(&y.b1)?
            .try_sub(&(&t * &inv_n(x.shape(), x.a1.desc())?))?;
    Ok(H2Class { c })
}

/// Gram matrix of `cup` on the standard bases; entry `(i, j)` is
/// `basis_i u basis_j`.
pub fn gram_matrix(shape: GaloisShape, desc: &Arc<LocalFieldDesc>) -> Result<Matrix> {
    let d = shape.n() + 1;
    let mut g = Matrix::zeros(desc, d, d);
    for i in 0..d {
        let x = H1Trivial::basis(shape, desc, i);
        for j in 0..d {
            g.set(i, j, cup(&x, &H1Tate::basis(shape, desc, j))?.c);
        }
    }
    Ok(g)
}

pub fn pairing_is_perfect(shape: GaloisShape, desc: &Arc<LocalFieldDesc>) -> Result<bool> {
    Ok(gram_matrix(shape, desc)?.rank()? == shape.n() + 1)
}

/// The class `(exp L) + (p)` of the extension `W_2`.
pub fn monodromy_extension_class(ell: &ProductElement) -> H1Tate {
    H1Tate {
        b1: FieldElement::one(ell.desc()),
        b2: ell.clone(),
    }
}

/// `a1 = tr(a2 L) / n`: `x` is orthogonal to `(1, L)`.
pub fn satisfies_colmez_condition(x: &H1Trivial, ell: &ProductElement) -> Result<bool> {
    let t = x.a2.try_mul(ell)?.trace_k()?;
    let rhs = &t * &inv_n(x.shape(), x.a1.desc())?;
    x.a1.try_sub(&rhs)?.decide_zero()
}

/// `tr(a2 L) = 0`, no condition on `a1`.
pub fn degenerate_condition(x: &H1Trivial, ell: &ProductElement) -> Result<bool> {
    x.a2.try_mul(ell)?.trace_k()?.decide_zero()
}

/// Basis (as columns of coordinates `(a1, a2)`) of the classes satisfying
/// [`satisfies_colmez_condition`].
pub fn colmez_annihilator(ell: &ProductElement) -> Result<Matrix> {
    let shape = ell.shape();
    let desc = ell.desc();
    // the functional x -> x u (1, L) as a 1 x (n+1) row
    let y = monodromy_extension_class(ell);
    let row = (0..=shape.n())
        .map(|k| Ok(cup(&H1Trivial::basis(shape, desc, k), &y)?.c))
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(desc, vec![row])?.kernel()
}

/// Basis of the classes satisfying [`degenerate_condition`].
pub fn degenerate_annihilator(ell: &ProductElement) -> Result<Matrix> {
    let desc = ell.desc();
    let row = std::iter::once(FieldElement::zero(desc))
        .chain(ell.comps().iter().cloned())
        .collect();
    Matrix::from_rows(desc, vec![row])?.kernel()
}

/// The class with coordinates given by column `k` of a coordinate matrix.
pub fn class_from_column(shape: GaloisShape, m: &Matrix, k: usize) -> Result<H1Trivial> {
    let col = m.column(k);
    H1Trivial::new(
        col[0].clone(),
        ProductElement::new(shape, Level::K, col[1..].to_vec())?,
    )
}

/// Coordinates of `x` as a column vector.
pub fn class_column(x: &H1Trivial) -> Vec<FieldElement> {
    x.coords()
}

/// Rank 2, `N = 0`, `phi_0 = [[1, alpha], [0, 1]]` in the basis `(v1', v2')`
/// and `phi_i = 1` for `i > 0`.
pub fn standard_unipotent(shape: GaloisShape, alpha: &FieldElement) -> Result<PhiNModule> {
    let desc = alpha.desc();
    let mut phi0 = Matrix::identity(desc, 2);
    phi0.set(0, 1, alpha.clone());
    let phi = (0..shape.f())
        .map(|i| {
            if i == 0 {
                phi0.clone()
            } else {
                Matrix::identity(desc, 2)
            }
        })
        .collect();
    PhiNModule::new(shape, phi, vec![Matrix::zeros(desc, 2, 2); shape.f()])
}

/// Class of the extension `0 -> L v1 -> D -> L v2 -> 0` in the trivializations
/// `sub` (a slot-0 vector spanning the sub-line) and `quot` (a slot-0 lift of
/// the quotient generator): if `phi^f quot = quot + c sub`, the class is
/// `-(c / f) psi_1`.
pub fn unipotent_extension_class(
    m: &PhiNModule,
    sub: &[FieldElement],
    quot: &[FieldElement],
) -> Result<H1Trivial> {
    if m.rank() != 2 {
        return Err(Error::NotUnipotent(format!("rank {} != 2", m.rank())));
    }
    if !m.n()[0].decide_zero()? {
        return Err(Error::NotUnipotent("N is nonzero".into()));
    }
    let desc = m.desc().clone();
    let basis = Matrix::from_columns(&desc, 2, &[sub.to_vec(), quot.to_vec()])?;
    if basis.rank()? != 2 {
        return Err(Error::NotUnipotent(
            "trivializations are not a basis".into(),
        ));
    }
    let f = basis
        .inverse()?
        .try_mul(&m.frobenius_f())?
        .try_mul(&basis)?;
    let one = FieldElement::one(&desc);
    let unipotent = (f.get(0, 0) - &one).decide_zero()?
        && (f.get(1, 1) - &one).decide_zero()?
        && f.get(1, 0).decide_zero()?;
    if !unipotent {
        return Err(Error::NotUnipotent(
            "phi^f is not unipotent in the adapted basis".into(),
        ));
    }
    let shape = m.shape();
    let fdeg = FieldElement::from_int(&desc, shape.f() as i64);
    let a1 = -&f.get(0, 1).try_div(&fdeg)?;
    Ok(H1Trivial {
        a1,
        a2: ProductElement::zero(shape, Level::K, &desc),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cup_examples() {
        let d = Arc::new(LocalFieldDesc::qp(7, 30).unwrap());
        let shape = GaloisShape::new(2, 1).unwrap();
        let pe = |v: &[i64]| {
            ProductElement::new(
                shape,
                Level::K,
                v.iter().map(|&x| FieldElement::from_int(&d, x)).collect(),
            )
            .unwrap()
        };
        let x = H1Trivial::new(FieldElement::zero(&d), pe(&[1, 1])).unwrap();
        let y = H1Tate::new(FieldElement::zero(&d), pe(&[1, -1])).unwrap();
        assert!(cup(&x, &y).unwrap().c.decide_zero().unwrap());
        assert!(pairing_is_perfect(shape, &d).unwrap());
        let g = gram_matrix(GaloisShape::new(1, 1).unwrap(), &d).unwrap();
        assert!(g
            .decide_eq(&Matrix::from_ints(&d, &[&[1, 0], &[0, -1]]))
            .unwrap());
        assert_eq!(colmez_annihilator(&pe(&[3, 5])).unwrap().cols(), 2);
    }

    #[test]
    fn standard_class() {
        let d = Arc::new(LocalFieldDesc::qp(5, 30).unwrap());
        for f in 1..=3 {
            let shape = GaloisShape::new(1, f).unwrap();
            let alpha = FieldElement::from_int(&d, 6);
            let m = standard_unipotent(shape, &alpha).unwrap();
            let e1 = vec![FieldElement::one(&d), FieldElement::zero(&d)];
            let e2 = vec![FieldElement::zero(&d), FieldElement::one(&d)];
            let x = unipotent_extension_class(&m, &e1, &e2).unwrap();
            let want = -&alpha
                .try_div(&FieldElement::from_int(&d, f as i64))
                .unwrap();
            assert_eq!(x.a1, want);
        }
    }
}
