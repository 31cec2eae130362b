//! Coefficient algebras `L (x) K0 = prod_{i<f} L` and `L (x) K = prod_sigma L`,
//! plus dual numbers over either.
//!
//! `K` itself is never represented: after identifying `L (x) K` with a
//! product of copies of `L`, only `(e, f)` and the embedding index set matter.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::padic::{FieldElement, LocalFieldDesc};

/// Ramification index `e` and inertia degree `f` of `K / Q_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GaloisShape {
    e: usize,
    f: usize,
}

/// An embedding `sigma = (i, j)`: `i` is the `K0`-slot it restricts to, `j`
/// the ramified branch. Flat index `i * e + j` (lexicographic order).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EmbeddingIndex {
    pub i: usize,
    pub j: usize,
}

impl GaloisShape {
    pub fn new(e: usize, f: usize) -> Result<Self> {
        if e == 0 || f == 0 {
            return Err(Error::ShapeMismatch(format!(
                "e = {e} and f = {f} must be positive"
            )));
        }
        Ok(GaloisShape { e, f })
    }

    pub fn e(&self) -> usize {
        self.e
    }

    pub fn f(&self) -> usize {
        self.f
    }

    pub fn n(&self) -> usize {
        self.e * self.f
    }

    pub fn embeddings(&self) -> impl Iterator<Item = EmbeddingIndex> + '_ {
        (0..self.f).flat_map(move |i| (0..self.e).map(move |j| EmbeddingIndex { i, j }))
    }

    pub fn flat(&self, s: EmbeddingIndex) -> usize {
        s.i * self.e + s.j
    }

    pub fn embedding(&self, flat: usize) -> EmbeddingIndex {
        EmbeddingIndex {
            i: flat / self.e,
            j: flat % self.e,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    K0,
    K,
}

impl Level {
    fn name(self) -> &'static str {
        match self {
            Level::K0 => "K0",
            Level::K => "K",
        }
    }
}

/// An element of `L (x) K0` (length `f`) or `L (x) K` (length `n`).
#[derive(Clone)]
pub struct ProductElement {
    shape: GaloisShape,
    level: Level,
    comps: Vec<FieldElement>,
}

impl ProductElement {
    pub fn new(shape: GaloisShape, level: Level, comps: Vec<FieldElement>) -> Result<Self> {
        let want = match level {
            Level::K0 => shape.f(),
            Level::K => shape.n(),
        };
        if comps.len() != want {
            return Err(Error::ShapeMismatch(format!(
                "{}-level element needs {want} components, got {}",
                level.name(),
                comps.len()
            )));
        }
        if comps.windows(2).any(|w| !w[0].same_field(&w[1])) {
            return Err(Error::FieldMismatch);
        }
        Ok(ProductElement {
            shape,
            level,
            comps,
        })
    }

    pub fn constant(shape: GaloisShape, level: Level, x: &FieldElement) -> Self {
        let n = match level {
            Level::K0 => shape.f(),
            Level::K => shape.n(),
        };
        ProductElement {
            shape,
            level,
            comps: vec![x.clone(); n],
        }
    }

    pub fn zero(shape: GaloisShape, level: Level, desc: &Arc<LocalFieldDesc>) -> Self {
        Self::constant(shape, level, &FieldElement::zero(desc))
    }

    pub fn one(shape: GaloisShape, level: Level, desc: &Arc<LocalFieldDesc>) -> Self {
        Self::constant(shape, level, &FieldElement::one(desc))
    }

    /// The idempotent supported at one flat index.
    pub fn one_hot(
        shape: GaloisShape,
        level: Level,
        desc: &Arc<LocalFieldDesc>,
        at: usize,
    ) -> Self {
        let mut x = Self::zero(shape, level, desc);
        x.comps[at] = FieldElement::one(desc);
        x
    }

    pub fn shape(&self) -> GaloisShape {
        self.shape
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn desc(&self) -> &Arc<LocalFieldDesc> {
        self.comps[0].desc()
    }

    pub fn comps(&self) -> &[FieldElement] {
        &self.comps
    }

    pub fn at(&self, s: EmbeddingIndex) -> &FieldElement {
        match self.level {
            Level::K0 => &self.comps[s.i],
            Level::K => &self.comps[self.shape.flat(s)],
        }
    }

    fn expect_level(&self, level: Level) -> Result<()> {
        if self.level == level {
            Ok(())
        } else {
            Err(Error::LevelMismatch {
                expected: level.name(),
                found: self.level.name(),
            })
        }
    }

    fn check_compatible(&self, other: &ProductElement) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch("different Galois shapes".into()));
        }
        other.expect_level(self.level)?;
        if !self.comps[0].same_field(&other.comps[0]) {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    fn zip(
        &self,
        other: &ProductElement,
        f: impl Fn(&FieldElement, &FieldElement) -> FieldElement,
    ) -> Result<Self> {
        self.check_compatible(other)?;
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| f(a, b))
            .collect();
        Ok(ProductElement {
            shape: self.shape,
            level: self.level,
            comps,
        })
    }

    pub fn try_add(&self, other: &ProductElement) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &ProductElement) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn try_mul(&self, other: &ProductElement) -> Result<Self> {
        self.zip(other, |a, b| a * b)
    }

    pub fn neg(&self) -> Self {
        self.map(|a| -a)
    }

    /// Multiply every component by the same element of `L`.
    pub fn scale(&self, x: &FieldElement) -> Self {
        self.map(|a| a * x)
    }

    pub fn map(&self, f: impl Fn(&FieldElement) -> FieldElement) -> Self {
        ProductElement {
            shape: self.shape,
            level: self.level,
            comps: self.comps.iter().map(f).collect(),
        }
    }

    /// A unit iff every component is a certified nonzero element.
    pub fn is_unit(&self) -> bool {
        self.comps.iter().all(|c| c.known_valuation().is_some())
    }

    pub fn invert(&self) -> Result<Self> {
        let comps = self
            .comps
            .iter()
            .map(|c| c.invert())
            .collect::<Result<Vec<_>>>()?;
        Ok(ProductElement {
            shape: self.shape,
            level: self.level,
            comps,
        })
    }

    /// Every component decided zero at the zero guard.
    pub fn decide_zero(&self) -> Result<bool> {
        for c in &self.comps {
            if !c.decide_zero()? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `1 (x) Frob` on `K0`-slots: slot `i` moves to slot `i + 1 (mod f)`, the
    /// same orientation as `phi : D^(i) -> D^(i+1)`.
    pub fn frobenius_shift(&self) -> Result<Self> {
        self.expect_level(Level::K0)?;
        let f = self.shape.f();
        let comps = (0..f)
            .map(|i| self.comps[(i + f - 1) % f].clone())
            .collect();
        Ok(ProductElement {
            shape: self.shape,
            level: Level::K0,
            comps,
        })
    }

    /// `sum_sigma a_sigma`.
    pub fn trace_k(&self) -> Result<FieldElement> {
        self.expect_level(Level::K)?;
        Ok(self
            .comps
            .iter()
            .skip(1)
            .fold(self.comps[0].clone(), |acc, c| &acc + c))
    }

    /// Base change to `K`: the component at `(i, j)` is `v_i`.
    pub fn embed_k0_in_k(&self) -> Result<Self> {
        self.expect_level(Level::K0)?;
        let comps = self
            .shape
            .embeddings()
            .map(|s| self.comps[s.i].clone())
            .collect();
        Ok(ProductElement {
            shape: self.shape,
            level: Level::K,
            comps,
        })
    }
}

impl PartialEq for ProductElement {
    fn eq(&self, other: &Self) -> bool {
        self.shape == other.shape && self.level == other.level && self.comps == other.comps
    }
}

impl fmt::Debug for ProductElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.level.name(), self.comps)
    }
}

/// Base rings for [`DualNumber`].
pub trait DualBase: Clone + PartialEq {
    fn compatible(&self, other: &Self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn invert(&self) -> Result<Self>;
}

impl DualBase for FieldElement {
    fn compatible(&self, other: &Self) -> bool {
        self.same_field(other)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn invert(&self) -> Result<Self> {
        FieldElement::invert(self)
    }
}

impl DualBase for ProductElement {
    fn compatible(&self, other: &Self) -> bool {
        self.check_compatible(other).is_ok()
    }
    fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("compatible")
    }
    fn sub(&self, other: &Self) -> Self {
        self.try_sub(other).expect("compatible")
    }
    fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("compatible")
    }
    fn neg(&self) -> Self {
        ProductElement::neg(self)
    }
    fn invert(&self) -> Result<Self> {
        ProductElement::invert(self)
    }
}

/// `a0 + a1 x` in `R[x]/(x^2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualNumber<T> {
    pub a0: T,
    pub a1: T,
}

impl<T: DualBase> DualNumber<T> {
    pub fn new(a0: T, a1: T) -> Result<Self> {
        if !a0.compatible(&a1) {
            return Err(Error::BaseMismatch);
        }
        Ok(DualNumber { a0, a1 })
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.a0.compatible(&other.a0) {
            Ok(())
        } else {
            Err(Error::BaseMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(DualNumber {
            a0: self.a0.add(&other.a0),
            a1: self.a1.add(&other.a1),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(DualNumber {
            a0: self.a0.sub(&other.a0),
            a1: self.a1.sub(&other.a1),
        })
    }

    /// `(a0, a1)(b0, b1) = (a0 b0, a0 b1 + a1 b0)`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(DualNumber {
            a0: self.a0.mul(&other.a0),
            a1: self.a0.mul(&other.a1).add(&self.a1.mul(&other.a0)),
        })
    }

    /// `(a0, a1)^-1 = (a0^-1, -a1 a0^-2)`; needs `a0` a unit.
    pub fn invert(&self) -> Result<Self> {
        let inv = self.a0.invert()?;
        let a1 = self.a1.mul(&inv).mul(&inv).neg();
        Ok(DualNumber { a0: inv, a1 })
    }

    /// The derivative slot.
    pub fn derivative(&self) -> &T {
        &self.a1
    }
}

/// `d log` of a dual number over `L`: `a1 / a0`.
pub fn dlog(x: &DualNumber<FieldElement>) -> Result<FieldElement> {
    x.a1.try_div(&x.a0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q7() -> Arc<LocalFieldDesc> {
        Arc::new(LocalFieldDesc::qp(7, 20).unwrap())
    }

    fn ints(d: &Arc<LocalFieldDesc>, xs: &[i64]) -> Vec<FieldElement> {
        xs.iter().map(|&x| FieldElement::from_int(d, x)).collect()
    }

    #[test]
    fn shift_orientation() {
        let d = q7();
        let s = GaloisShape::new(1, 3).unwrap();
        let v = ProductElement::new(s, Level::K0, ints(&d, &[1, 2, 3])).unwrap();
        let w = v.frobenius_shift().unwrap();
        assert_eq!(w.comps(), ints(&d, &[3, 1, 2]).as_slice());
        let k = ProductElement::one(s, Level::K, &d);
        assert!(matches!(
            k.frobenius_shift(),
            Err(Error::LevelMismatch { .. })
        ));
    }

    #[test]
    fn trace_and_embedding() {
        let d = q7();
        let s = GaloisShape::new(2, 2).unwrap();
        let one = ProductElement::one(s, Level::K, &d);
        assert_eq!(one.trace_k().unwrap(), FieldElement::from_int(&d, 4));
        let v = ProductElement::new(s, Level::K0, ints(&d, &[5, -2])).unwrap();
        let k = v.embed_k0_in_k().unwrap();
        assert_eq!(k.comps(), ints(&d, &[5, 5, -2, -2]).as_slice());
        assert_eq!(k.trace_k().unwrap(), FieldElement::from_int(&d, 6));
        assert!(v.trace_k().is_err());
    }

    #[test]
    fn dual_numbers() {
        let d = q7();
        let eps = DualNumber::new(FieldElement::zero(&d), FieldElement::one(&d)).unwrap();
        let sq = eps.mul(&eps).unwrap();
        assert!(sq.a0.is_zero() && sq.a1.is_zero());
        let a =
            DualNumber::new(FieldElement::from_int(&d, 3), FieldElement::from_int(&d, 5)).unwrap();
        let prod = a.mul(&a.invert().unwrap()).unwrap();
        assert_eq!(prod.a0, FieldElement::one(&d));
        assert!(prod.a1.is_zero());
        let other = DualNumber::new(FieldElement::one(&q7()), FieldElement::one(&q7())).unwrap();
        assert!(a.mul(&other).is_ok());
        let q5 = Arc::new(LocalFieldDesc::qp(5, 20).unwrap());
        let bad = DualNumber::new(FieldElement::one(&q5), FieldElement::one(&q5)).unwrap();
        assert_eq!(a.mul(&bad).unwrap_err(), Error::BaseMismatch);
    }
}
