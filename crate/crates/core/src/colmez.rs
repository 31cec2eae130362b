//! The differential form of the trivial-zero formula evaluated on
//! first-order family germs over `L[x]/(x^2)`.

use crate::coeff::{DualNumber, GaloisShape, Level, ProductElement};
use crate::error::{Error, Result};
use crate::padic::FieldElement;

/// A tangent vector to a family at a point: the `phi^f`-eigenvalue `alpha`
/// on the crystalline line, `log det V = delta psi_1 + kappa psi_2`, and the
/// `L`-invariant at the point.
#[derive(Clone, Debug)]
pub struct FamilyGerm {
    shape: GaloisShape,
    pub alpha: DualNumber<FieldElement>,
    pub delta: DualNumber<FieldElement>,
    pub kappa: DualNumber<ProductElement>,
    pub ell: ProductElement,
}

impl FamilyGerm {
    pub fn new(
        alpha: DualNumber<FieldElement>,
        delta: DualNumber<FieldElement>,
        kappa: DualNumber<ProductElement>,
        ell: ProductElement,
    ) -> Result<Self> {
        let shape = ell.shape();
        if kappa.a0.shape() != shape || kappa.a1.shape() != shape {
            return Err(Error::ShapeMismatch(
                "kappa and ell over different shapes".into(),
            ));
        }
        for x in [&kappa.a0, &kappa.a1, &ell] {
            if x.level() != Level::K {
                return Err(Error::LevelMismatch {
                    expected: "K",
                    found: "K0",
                });
            }
        }
        let desc = alpha.a0.desc();
        let all = [
            &alpha.a1,
            &delta.a0,
            &delta.a1,
            &kappa.a0.comps()[0],
            &kappa.a1.comps()[0],
            &ell.comps()[0],
        ];
        if all.iter().any(|x| x.desc() != desc && **x.desc() != **desc) {
            return Err(Error::FieldMismatch);
        }
        if alpha.a0.known_valuation().is_none() {
            return Err(Error::PrecisionLoss(
                "alpha_0 is not certified invertible".into(),
            ));
        }
        Ok(FamilyGerm {
            shape,
            alpha,
            delta,
            kappa,
            ell,
        })
    }

    pub fn shape(&self) -> GaloisShape {
        self.shape
    }

    pub fn with_ell(&self, ell: ProductElement) -> Result<Self> {
        FamilyGerm::new(
            self.alpha.clone(),
            self.delta.clone(),
            self.kappa.clone(),
            ell,
        )
    }

    fn int(&self, k: i64) -> FieldElement {
        FieldElement::from_int(self.alpha.a0.desc(), k)
    }

    /// `alpha' / (f alpha_0)`.
    fn dlog_alpha_over_f(&self) -> Result<FieldElement> {
        self.alpha
            .a1
            .try_div(&(&self.int(self.shape.f() as i64) * &self.alpha.a0))
    }
}

/// `d alpha / (f alpha) + d delta / 2 - tr(L d kappa) / (2n)`.
pub fn colmez_form(g: &FamilyGerm) -> Result<FieldElement> {
    let n = g.shape.n() as i64;
    let half = g.int(2).invert()?;
    let t = g.ell.try_mul(&g.kappa.a1)?.trace_k()?;
    let a = g.dlog_alpha_over_f()?;
    Ok(&(&a + &(&g.delta.a1 * &half)) - &t.try_div(&g.int(2 * n))?)
}

/// `tr(L d kappa)`.
pub fn degenerate_form(g: &FamilyGerm) -> Result<FieldElement> {
    if g.ell.decide_zero()? {
        return Err(Error::ZeroEll);
    }
    g.ell.try_mul(&g.kappa.a1)?.trace_k()
}

/// `gamma = -kappa'/2`, matching `psi_2`-coefficients, and the residual
/// `delta'/2 + tr(gamma L)/n + alpha'/(f alpha_0)` of the `psi_1`-coefficients.
pub fn gamma_consistency(g: &FamilyGerm) -> Result<(ProductElement, FieldElement)> {
    let n = g.shape.n() as i64;
    let half = g.int(2).invert()?;
    let gamma = g.kappa.a1.scale(&-&half);
    let t = gamma.try_mul(&g.ell)?.trace_k()?;
    let residual = &(&(&g.delta.a1 * &half) + &t.try_div(&g.int(n))?) + &g.dlog_alpha_over_f()?;
    Ok((gamma, residual))
}

/// The scalar `s` for which `colmez_form` vanishes with `L = s direction`.
/// `g.ell` is ignored.
pub fn solve_ell_scalar(g: &FamilyGerm, direction: &ProductElement) -> Result<FieldElement> {
    let den = direction.try_mul(&g.kappa.a1)?.trace_k()?;
    if den.known_valuation().is_none() {
        return Err(Error::SingularDirection);
    }
    let n = g.shape.n() as i64;
    let num = &g.dlog_alpha_over_f()? + &(&g.delta.a1 * &g.int(2).invert()?);
    (&g.int(2 * n) * &num).try_div(&den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::LocalFieldDesc;
    use std::sync::Arc;

    #[test]
    fn qp_example() {
        let d = Arc::new(LocalFieldDesc::qp(5, 30).unwrap());
        let shape = GaloisShape::new(1, 1).unwrap();
        let fe = |k| FieldElement::from_int(&d, k);
        let pe = |k| ProductElement::constant(shape, Level::K, &fe(k));
        let g = FamilyGerm::new(
            DualNumber::new(fe(1), fe(1)).unwrap(),
            DualNumber::new(fe(3), fe(0)).unwrap(),
            DualNumber::new(pe(0), pe(2)).unwrap(),
            pe(1),
        )
        .unwrap();
        assert!(colmez_form(&g).unwrap().decide_zero().unwrap());
        let s = solve_ell_scalar(&g, &pe(1)).unwrap();
        assert_eq!(s, fe(1));
        let (_, r) = gamma_consistency(&g).unwrap();
        assert_eq!(r, colmez_form(&g).unwrap());
        assert_eq!(degenerate_form(&g).unwrap(), fe(2));
    }
}
