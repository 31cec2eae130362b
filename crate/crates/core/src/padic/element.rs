use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::field::{vp, LocalFieldDesc};
use super::residue;
use super::Rational;
use crate::error::{Error, Result};

/// Sentinel for "infinite" tick counts (the literal zero).
const INF: i64 = i64::MAX / 4;

/// Valuation of an element, normalized so that `v(p) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Valuation {
    Finite(Rational),
    /// The literal zero constant.
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<Rational> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

/// An element of `L` with a capped absolute precision.
///
/// The value is `p^shift * sum_{a,b} c[a][b] * pi^a * theta^b`, known modulo
/// the elements of valuation `>= prec / e_L`. Coordinates are kept reduced
/// (symmetric residues) modulo the smallest power of `p` that still covers the
/// precision floor. Values are immutable.
#[derive(Clone)]
pub struct FieldElement {
    desc: Arc<LocalFieldDesc>,
    repr: Repr,
}

#[derive(Clone)]
enum Repr {
    Zero,
    Approx {
        shift: i64,
        coords: Vec<BigInt>,
        prec: i64,
    },
}

fn pow_p(desc: &LocalFieldDesc, k: i64) -> BigInt {
    num_traits::pow(desc.p_big().clone(), k.max(0) as usize)
}

fn sym_mod(x: &BigInt, m: &BigInt) -> BigInt {
    let r = x.mod_floor(m);
    if &r * 2 > *m {
        r - m
    } else {
        r
    }
}

/// Number of p-adic digits needed so that `p^shift * p^digits` lies below the
/// precision floor.
fn digits_needed(e: i64, shift: i64, prec: i64) -> i64 {
    Integer::div_ceil(&(prec - e * shift), &e).max(0)
}

impl FieldElement {
    fn approx(desc: &Arc<LocalFieldDesc>, shift: i64, coords: Vec<BigInt>, prec: i64) -> Self {
        let e = desc.e_l() as i64;
        let p = desc.p_big();
        let mut shift = shift;
        let mut digits = digits_needed(e, shift, prec);
        let mut modulus = pow_p(desc, digits);
        let mut coords: Vec<BigInt> = coords.iter().map(|c| sym_mod(c, &modulus)).collect();
        if coords.iter().any(|c| !c.is_zero()) {
            while digits > 0 && coords.iter().all(|c| c.is_multiple_of(p)) {
                coords.iter_mut().for_each(|c| *c /= p);
                shift += 1;
                digits -= 1;
                modulus /= p;
            }
            coords = coords.iter().map(|c| sym_mod(c, &modulus)).collect();
        }
        FieldElement {
            desc: desc.clone(),
            repr: Repr::Approx {
                shift,
                coords,
                prec,
            },
        }
    }

    /// The literal zero constant (valuation `+infinity`, exact).
    pub fn zero(desc: &Arc<LocalFieldDesc>) -> Self {
        FieldElement {
            desc: desc.clone(),
            repr: Repr::Zero,
        }
    }

    pub fn one(desc: &Arc<LocalFieldDesc>) -> Self {
        Self::from_int(desc, 1)
    }

    pub fn from_int(desc: &Arc<LocalFieldDesc>, n: i64) -> Self {
        Self::from_bigint(desc, &BigInt::from(n))
    }

    pub fn from_bigint(desc: &Arc<LocalFieldDesc>, n: &BigInt) -> Self {
        if n.is_zero() {
            return Self::zero(desc);
        }
        let mut coords = vec![BigInt::zero(); desc.degree()];
        coords[0] = n.clone();
        Self::approx(desc, 0, coords, desc.prec_ticks())
    }

    /// The rational number `num / den`, exact up to the default precision.
    pub fn from_rational(desc: &Arc<LocalFieldDesc>, q: &BigRational) -> Self {
        let mut coords = vec![BigRational::zero(); desc.degree()];
        coords[0] = q.clone();
        Self::from_coords(desc, &coords)
    }

    /// Build `sum c[a*f_L + b] * pi^a * theta^b` from rational coordinates.
    pub fn from_coords(desc: &Arc<LocalFieldDesc>, coords: &[BigRational]) -> Self {
        assert_eq!(
            coords.len(),
            desc.degree(),
            "coordinate count must be e_L * f_L"
        );
        if coords.iter().all(|c| c.is_zero()) {
            return Self::zero(desc);
        }
        let p = desc.p_big();
        // common power of p to clear from denominators
        let s = coords
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| vp(c.denom(), p) as i64)
            .max()
            .unwrap_or(0);
        let prec = desc.prec_ticks();
        let e = desc.e_l() as i64;
        let digits = digits_needed(e, -s, prec);
        let modulus = pow_p(desc, digits + 1);
        let ints = coords
            .iter()
            .map(|c| {
                if c.is_zero() {
                    return BigInt::zero();
                }
                let sd = vp(c.denom(), p) as i64;
                let unit_den = c.denom() / pow_p(desc, sd);
                let inv = unit_den.extended_gcd(&modulus).x;
                c.numer() * inv * pow_p(desc, s - sd)
            })
            .collect();
        Self::approx(desc, -s, ints, prec)
    }

    /// The Eisenstein uniformizer `pi`.
    pub fn uniformizer(desc: &Arc<LocalFieldDesc>) -> Self {
        Self::monomial(desc, 1, 0)
    }

    /// The unramified generator `theta`.
    pub fn theta(desc: &Arc<LocalFieldDesc>) -> Self {
        Self::monomial(desc, 0, 1)
    }

    fn monomial(desc: &Arc<LocalFieldDesc>, a: usize, b: usize) -> Self {
        let f = desc.f_l();
        let e = desc.e_l();
        if a >= e {
            // pi^e = -sum_{k<e} eis[k] pi^k
            let mut coords = vec![BigInt::zero(); desc.degree()];
            for (k, c) in desc.eis_poly()[..e].iter().enumerate() {
                for (b, x) in c.iter().enumerate() {
                    coords[k * f + b] = -x;
                }
            }
            let pi_e = Self::approx(desc, 0, coords, desc.prec_ticks());
            return &pi_e * &Self::monomial(desc, a - e, b);
        }
        let mut coords = vec![BigInt::zero(); desc.degree()];
        if b < f {
            coords[a * f + b] = BigInt::one();
            Self::approx(desc, 0, coords, desc.prec_ticks())
        } else {
            Self::monomial(desc, a, 0) * Self::monomial(desc, 0, 1).pow(b as u32)
        }
    }

    pub fn desc(&self) -> &Arc<LocalFieldDesc> {
        &self.desc
    }

    pub fn same_field(&self, other: &FieldElement) -> bool {
        Arc::ptr_eq(&self.desc, &other.desc) || *self.desc == *other.desc
    }

    fn check_field(&self, other: &FieldElement) -> Result<()> {
        if self.same_field(other) {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn is_literal_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero)
    }

    /// Smallest certified term valuation, in ticks.
    fn val_ticks(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero => None,
            Repr::Approx {
                shift,
                coords,
                prec,
            } => {
                let (e, f) = (self.desc.e_l(), self.desc.f_l());
                let p = self.desc.p_big();
                (0..e)
                    .filter_map(|a| {
                        coords[a * f..(a + 1) * f]
                            .iter()
                            .filter(|c| !c.is_zero())
                            .map(|c| vp(c, p) as i64)
                            .min()
                            .map(|v| e as i64 * (shift + v) + a as i64)
                    })
                    .filter(|t| t < prec)
                    .min()
            }
        }
    }

    /// Lower bound on the valuation, in ticks (the precision floor when the
    /// element is indistinguishable from zero).
    fn lower_ticks(&self) -> i64 {
        match &self.repr {
            Repr::Zero => INF,
            Repr::Approx { prec, .. } => self.val_ticks().unwrap_or(*prec),
        }
    }

    /// Absolute precision floor; `None` for the exact literal zero.
    pub fn precision(&self) -> Option<Rational> {
        match &self.repr {
            Repr::Zero => None,
            Repr::Approx { prec, .. } => Some(Rational::new(*prec, self.desc.e_l() as i64)),
        }
    }

    /// `v_p(self)`. The literal zero has infinite valuation; an element that is
    /// indistinguishable from zero at its precision raises `PrecisionLoss`.
    pub fn valuation(&self) -> Result<Valuation> {
        match &self.repr {
            Repr::Zero => Ok(Valuation::Infinite),
            Repr::Approx { prec, .. } => match self.val_ticks() {
                Some(t) => Ok(Valuation::Finite(Rational::new(t, self.desc.e_l() as i64))),
                None => Err(Error::PrecisionLoss(format!(
                    "element is indistinguishable from zero at precision {}",
                    Rational::new(*prec, self.desc.e_l() as i64)
                ))),
            },
        }
    }

    /// Certified finite valuation; zero of either kind is an error.
    pub fn nonzero_valuation(&self) -> Result<Rational> {
        match self.valuation()? {
            Valuation::Finite(v) => Ok(v),
            Valuation::Infinite => Err(Error::ZeroInput("valuation of the zero constant".into())),
        }
    }

    /// Certified valuation, or `None` when the element is zero or
    /// indistinguishable from zero.
    pub fn known_valuation(&self) -> Option<Rational> {
        self.val_ticks()
            .map(|t| Rational::new(t, self.desc.e_l() as i64))
    }

    /// True when the element cannot be distinguished from zero.
    pub fn is_zero(&self) -> bool {
        self.val_ticks().is_none()
    }

    /// Zero test that feeds a verdict: accepts "indistinguishable from zero"
    /// only if the precision floor clears the field's zero guard.
    pub fn decide_zero(&self) -> Result<bool> {
        match &self.repr {
            Repr::Zero => Ok(true),
            Repr::Approx { prec, .. } => {
                if self.val_ticks().is_some() {
                    Ok(false)
                } else if *prec >= self.desc.zero_guard_ticks() {
                    Ok(true)
                } else {
                    Err(Error::PrecisionLoss(format!(
                        "cannot decide whether an element is zero: precision floor {} is below the guard {}",
                        Rational::new(*prec, self.desc.e_l() as i64),
                        Rational::new(self.desc.zero_guard_ticks(), self.desc.e_l() as i64)
                    )))
                }
            }
        }
    }

    /// `v(self) == 0`, certified.
    pub fn is_unit(&self) -> bool {
        self.val_ticks() == Some(0)
    }

    pub fn try_add(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check_field(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn try_sub(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check_field(other)?;
        Ok(self.add_unchecked(&other.neg_ref()))
    }

    /// Product; the precision floor is `min(prec(x) + v(y), prec(y) + v(x))`.
    pub fn try_mul(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check_field(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub fn try_div(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check_field(other)?;
        Ok(self.mul_unchecked(&other.invert()?))
    }

    fn add_unchecked(&self, other: &FieldElement) -> FieldElement {
        let (
            Repr::Approx {
                shift: s1,
                coords: c1,
                prec: p1,
            },
            Repr::Approx {
                shift: s2,
                coords: c2,
                prec: p2,
            },
        ) = (&self.repr, &other.repr)
        else {
            return if self.is_literal_zero() {
                other.clone()
            } else {
                self.clone()
            };
        };
        let e = self.desc.e_l() as i64;
        let shift = (*s1).min(*s2);
        let prec = (*p1).min(*p2);
        let digits = digits_needed(e, shift, prec);
        let scaled = |c: &[BigInt], s: i64| -> Vec<BigInt> {
            if s - shift >= digits {
                vec![BigInt::zero(); c.len()]
            } else {
                let k = pow_p(&self.desc, s - shift);
                c.iter().map(|x| x * &k).collect()
            }
        };
        let a = scaled(c1, *s1);
        let b = scaled(c2, *s2);
        let sum = a.into_iter().zip(b).map(|(x, y)| x + y).collect();
        Self::approx(&self.desc, shift, sum, prec)
    }

    fn mul_unchecked(&self, other: &FieldElement) -> FieldElement {
        let (
            Repr::Approx {
                shift: s1,
                coords: c1,
                prec: p1,
            },
            Repr::Approx {
                shift: s2,
                coords: c2,
                prec: p2,
            },
        ) = (&self.repr, &other.repr)
        else {
            return Self::zero(&self.desc);
        };
        let e = self.desc.e_l() as i64;
        let prec = (p1 + other.lower_ticks()).min(p2 + self.lower_ticks());
        let shift = s1 + s2;
        let digits = digits_needed(e, shift, prec);
        let modulus = pow_p(&self.desc, digits);
        let coords = self.desc.coords_mul(c1, c2, &modulus);
        Self::approx(&self.desc, shift, coords, prec)
    }

    fn neg_ref(&self) -> FieldElement {
        match &self.repr {
            Repr::Zero => self.clone(),
            Repr::Approx {
                shift,
                coords,
                prec,
            } => FieldElement {
                desc: self.desc.clone(),
                repr: Repr::Approx {
                    shift: *shift,
                    coords: coords.iter().map(|c| -c).collect(),
                    prec: *prec,
                },
            },
        }
    }

    /// Multiplicative inverse by Newton-Hensel iteration from the residue of the
    /// unit part. The result's absolute precision is `prec - 2 v(x)`.
    pub fn invert(&self) -> Result<FieldElement> {
        let Repr::Approx {
            shift,
            coords,
            prec,
        } = &self.repr
        else {
            return Err(Error::ZeroInput("inverse of the zero constant".into()));
        };
        let v = self.val_ticks().ok_or_else(|| {
            Error::PrecisionLoss("inverse of an element indistinguishable from zero".into())
        })?;
        let desc = &self.desc;
        let (e, f) = (desc.e_l() as i64, desc.f_l());
        // self = p^shift * X, v(X) = j / e; X * pi^r = p^t * U with U a unit
        let j = v - e * shift;
        let r = (e - j % e) % e;
        let t = (j + r) / e;
        let res_prec = prec - 2 * v;
        let res_shift = -shift - t;
        let res_digits = digits_needed(e, res_shift, res_prec).max(1);

        let pi_r = {
            let mut c = vec![BigInt::zero(); desc.degree()];
            c[r as usize * f] = BigInt::one();
            c
        };
        let work = pow_p(desc, res_digits + t);
        let xr = desc.coords_mul(coords, &pi_r, &work);
        let pt = pow_p(desc, t);
        let modulus = pow_p(desc, res_digits);
        let unit: Vec<BigInt> = xr
            .iter()
            .map(|c| {
                debug_assert!(c.is_multiple_of(&pt));
                (c / &pt).mod_floor(&modulus)
            })
            .collect();

        let p = desc.p_big();
        let residue_poly = residue::reduce(&unit[..f], p);
        let g = residue::reduce(desc.unram_poly(), p);
        let y0 = residue::inverse_mod_poly(&residue_poly, &g, p)
            .ok_or_else(|| Error::PrecisionLoss("unit part has no residue inverse".into()))?;
        let mut y = vec![BigInt::zero(); desc.degree()];
        for (b, c) in y0.into_iter().enumerate() {
            y[b] = c;
        }
        let mut one = vec![BigInt::zero(); desc.degree()];
        one[0] = BigInt::one();
        // 1 - U*y_{k+1} = (1 - U*y_k)^2: pi-adic precision doubles each round
        let max_rounds = 2 + (64 - ((e * res_digits) as u64).leading_zeros()) as usize;
        for _ in 0..=max_rounds {
            let uy = desc.coords_mul(&unit, &y, &modulus);
            let err: Vec<BigInt> = one
                .iter()
                .zip(&uy)
                .map(|(a, b)| (a - b).mod_floor(&modulus))
                .collect();
            if err.iter().all(|c| c.is_zero()) {
                break;
            }
            let corr = desc.coords_mul(&y, &err, &modulus);
            y = y
                .iter()
                .zip(corr)
                .map(|(a, b)| (a + b).mod_floor(&modulus))
                .collect();
        }
        let res = desc.coords_mul(&pi_r, &y, &modulus);
        Ok(Self::approx(desc, res_shift, res, res_prec))
    }

    pub fn pow(&self, k: u32) -> FieldElement {
        let mut result = Self::one(&self.desc);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        result
    }

    /// Integer power, negative exponents through [`FieldElement::invert`].
    pub fn powi(&self, k: i64) -> Result<FieldElement> {
        if k >= 0 {
            Ok(self.pow(k as u32))
        } else {
            self.invert().map(|x| x.pow((-k) as u32))
        }
    }

    /// Rational coordinates `c[a*f_L + b]` of the stored representative.
    pub fn coords(&self) -> Vec<BigRational> {
        match &self.repr {
            Repr::Zero => vec![BigRational::zero(); self.desc.degree()],
            Repr::Approx { shift, coords, .. } => {
                let scale = if *shift >= 0 {
                    BigRational::from_integer(pow_p(&self.desc, *shift))
                } else {
                    BigRational::new(BigInt::one(), pow_p(&self.desc, -shift))
                };
                coords
                    .iter()
                    .map(|c| BigRational::from_integer(c.clone()) * &scale)
                    .collect()
            }
        }
    }

    /// Residue class in `F_p[theta]/(g)` of a certified unit (theta-coordinates mod p).
    pub(crate) fn residue(&self) -> Option<Vec<BigInt>> {
        if !self.is_unit() {
            return None;
        }
        let p = self.desc.p_big();
        self.coords()[..self.desc.f_l()]
            .iter()
            .map(|c| {
                if c.denom().is_multiple_of(p) {
                    None
                } else {
                    let inv = c.denom().extended_gcd(p).x;
                    Some((c.numer() * inv).mod_floor(p))
                }
            })
            .collect()
    }

    /// Teichmuller-free lift of a residue: the integer theta-polynomial itself.
    pub(crate) fn from_residue(desc: &Arc<LocalFieldDesc>, r: &[BigInt]) -> Self {
        let mut coords = vec![BigRational::zero(); desc.degree()];
        for (b, c) in r.iter().enumerate().take(desc.f_l()) {
            coords[b] = BigRational::from_integer(c.clone());
        }
        Self::from_coords(desc, &coords)
    }

    /// Same value with its precision floor lowered to `prec` (never raised).
    pub fn truncate(&self, prec: Rational) -> FieldElement {
        match &self.repr {
            Repr::Zero => self.clone(),
            Repr::Approx {
                shift,
                coords,
                prec: old,
            } => {
                let ticks = (prec * Rational::from_integer(self.desc.e_l() as i64))
                    .floor()
                    .to_integer();
                Self::approx(&self.desc, *shift, coords.clone(), ticks.min(*old))
            }
        }
    }

    /// A deterministic element of exactly the requested valuation.
    pub fn sample(desc: &Arc<LocalFieldDesc>, valuation: Rational, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::sample_with_rng(desc, valuation, &mut rng)
    }

    pub fn sample_with_rng<R: Rng + ?Sized>(
        desc: &Arc<LocalFieldDesc>,
        valuation: Rational,
        rng: &mut R,
    ) -> Result<Self> {
        let e = desc.e_l() as i64;
        let ticks = valuation * Rational::from_integer(e);
        if !ticks.is_integer() {
            return Err(Error::InvalidValuation(format!(
                "{valuation} is not in (1/{e})Z"
            )));
        }
        let ticks = ticks.to_integer();
        let (q, r) = (
            Integer::div_floor(&ticks, &e),
            Integer::mod_floor(&ticks, &e),
        );
        let unit = Self::sample_unit_coords(desc, rng);
        let mut pi_r = vec![BigInt::zero(); desc.degree()];
        pi_r[r as usize * desc.f_l()] = BigInt::one();
        let modulus = pow_p(desc, desc.prec() as i64 + 1);
        let coords = desc.coords_mul(&pi_r, &unit, &modulus);
        Ok(Self::approx(
            desc,
            q,
            coords,
            desc.prec_ticks() + e * q.max(0),
        ))
    }

    /// Uniform p-adic unit at the default precision.
    pub fn sample_unit<R: Rng + ?Sized>(desc: &Arc<LocalFieldDesc>, rng: &mut R) -> Self {
        let coords = Self::sample_unit_coords(desc, rng);
        Self::approx(desc, 0, coords, desc.prec_ticks())
    }

    fn sample_unit_coords<R: Rng + ?Sized>(desc: &LocalFieldDesc, rng: &mut R) -> Vec<BigInt> {
        let bound: BigUint = pow_p(desc, desc.prec() as i64).to_biguint().unwrap();
        let mut coords: Vec<BigInt> = (0..desc.degree())
            .map(|_| BigInt::from(rng.gen_biguint_below(&bound)))
            .collect();
        if coords[0].is_multiple_of(desc.p_big()) {
            coords[0] += 1;
        }
        coords
    }

    /// Small-height sample: integer coordinates in `[-bound, bound]` scaled to
    /// the requested valuation. Handy for readable fixtures and fast tests.
    pub fn sample_small<R: Rng + ?Sized>(
        desc: &Arc<LocalFieldDesc>,
        valuation: Rational,
        bound: i64,
        rng: &mut R,
    ) -> Result<Self> {
        let e = desc.e_l() as i64;
        let ticks = valuation * Rational::from_integer(e);
        if !ticks.is_integer() {
            return Err(Error::InvalidValuation(format!(
                "{valuation} is not in (1/{e})Z"
            )));
        }
        let ticks = ticks.to_integer();
        let (q, r) = (
            Integer::div_floor(&ticks, &e),
            Integer::mod_floor(&ticks, &e),
        );
        let mut unit: Vec<BigInt> = (0..desc.degree())
            .map(|_| BigInt::from(rng.gen_range(-bound..=bound)))
            .collect();
        while unit[0].is_multiple_of(desc.p_big()) {
            unit[0] = BigInt::from(rng.gen_range(-bound..=bound));
        }
        let mut pi_r = vec![BigInt::zero(); desc.degree()];
        pi_r[r as usize * desc.f_l()] = BigInt::one();
        let modulus = pow_p(desc, desc.prec() as i64 + 1);
        let coords = desc.coords_mul(&pi_r, &unit, &modulus);
        Ok(Self::approx(
            desc,
            q,
            coords,
            desc.prec_ticks() + e * q.max(0),
        ))
    }
}

impl PartialEq for FieldElement {
    /// Equality at the minimum of the two precision floors.
    fn eq(&self, other: &Self) -> bool {
        self.same_field(other) && self.add_unchecked(&other.neg_ref()).is_zero()
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.precision() {
            None => write!(f, "0"),
            Some(prec) => write!(f, "{} + O(p^{})", self, prec),
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coords = self.coords();
        let f = self.desc.f_l();
        let mut terms = Vec::new();
        for (i, c) in coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (a, b) = (i / f, i % f);
            let mut s = if c.is_negative() {
                format!("({c})")
            } else {
                c.to_string()
            };
            if a > 0 {
                s.push_str(&if a == 1 {
                    "*pi".to_string()
                } else {
                    format!("*pi^{a}")
                });
            }
            if b > 0 {
                s.push_str(&if b == 1 {
                    "*theta".to_string()
                } else {
                    format!("*theta^{b}")
                });
            }
            terms.push(s);
        }
        if terms.is_empty() {
            write!(fm, "0")
        } else {
            write!(fm, "{}", terms.join(" + "))
        }
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr<&FieldElement> for &FieldElement {
            type Output = FieldElement;
            /// Panics when the operands live in different fields; use the
            /// `try_*` methods on unvalidated input.
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                assert!(self.same_field(rhs), "field mismatch");
                $body(self, rhs)
            }
        }
        impl $tr<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, |a: &FieldElement, b: &FieldElement| a
    .add_unchecked(b));
binop!(Sub, sub, |a: &FieldElement, b: &FieldElement| a
    .add_unchecked(&b.neg_ref()));
binop!(Mul, mul, |a: &FieldElement, b: &FieldElement| a
    .mul_unchecked(b));

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        self.neg_ref()
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        self.neg_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn qp(p: u64) -> Arc<LocalFieldDesc> {
        Arc::new(LocalFieldDesc::qp(p, 30).unwrap())
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn valuation_normalization() {
        let d = qp(5);
        let p = FieldElement::from_int(&d, 5);
        assert_eq!(p.valuation().unwrap(), Valuation::Finite(r(1, 1)));
        let ram = Arc::new(LocalFieldDesc::ramified(3, 2, 30).unwrap());
        let pi = FieldElement::uniformizer(&ram);
        assert_eq!(pi.valuation().unwrap(), Valuation::Finite(r(1, 2)));
        // 3 + pi over Q_3(sqrt 3): the pi term dominates... no, 3 has valuation 1 and pi 1/2
        let x = &FieldElement::from_int(&ram, 3) + &FieldElement::one(&ram);
        assert_eq!(x.valuation().unwrap(), Valuation::Finite(r(0, 1)));
        let y = &FieldElement::from_int(&ram, 3) + &pi;
        assert_eq!(y.valuation().unwrap(), Valuation::Finite(r(1, 2)));
    }

    #[test]
    fn zero_handling() {
        let d = qp(3);
        let z = FieldElement::zero(&d);
        assert_eq!(z.valuation().unwrap(), Valuation::Infinite);
        assert!(matches!(z.invert(), Err(Error::ZeroInput(_))));
        let one = FieldElement::one(&d);
        let c = &one - &one;
        assert!(!c.is_literal_zero());
        assert!(c.is_zero());
        assert!(matches!(c.valuation(), Err(Error::PrecisionLoss(_))));
        assert!(matches!(c.invert(), Err(Error::PrecisionLoss(_))));
        assert!(c.decide_zero().unwrap());
        let low = c.truncate(r(3, 1));
        assert!(matches!(low.decide_zero(), Err(Error::PrecisionLoss(_))));
    }

    #[test]
    fn defining_relations() {
        let d = Arc::new(LocalFieldDesc::ramified(7, 2, 20).unwrap());
        let pi = FieldElement::uniformizer(&d);
        assert_eq!(&pi * &pi, FieldElement::from_int(&d, 7));
        let one = FieldElement::one(&d);
        let p = FieldElement::from_int(&d, 7);
        assert_eq!((&one + &p) * (&one - &p), &one - &(&p * &p));
    }

    #[test]
    fn inverse_of_p_and_rationals() {
        let d = qp(3);
        let p = FieldElement::from_int(&d, 3);
        let pinv = p.invert().unwrap();
        assert_eq!(pinv.nonzero_valuation().unwrap(), r(-1, 1));
        assert_eq!(&pinv * &p, FieldElement::one(&d));
        let half =
            FieldElement::from_rational(&d, &BigRational::new(BigInt::from(1), BigInt::from(2)));
        assert_eq!(
            &half * &FieldElement::from_int(&d, 2),
            FieldElement::one(&d)
        );
        let third =
            FieldElement::from_rational(&d, &BigRational::new(BigInt::from(5), BigInt::from(9)));
        assert_eq!(third.nonzero_valuation().unwrap(), r(-2, 1));
        assert_eq!(
            &third * &FieldElement::from_int(&d, 9),
            FieldElement::from_int(&d, 5)
        );
    }

    #[test]
    fn inverse_in_tower() {
        let d = Arc::new(
            LocalFieldDesc::new(
                3,
                vec![BigInt::from(1), BigInt::from(0), BigInt::from(1)],
                vec![
                    vec![BigInt::from(0), BigInt::from(3)],
                    vec![BigInt::from(3), BigInt::from(0)],
                    vec![BigInt::from(1), BigInt::from(0)],
                ],
                25,
            )
            .unwrap(),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in -3..4 {
            let x = FieldElement::sample_with_rng(&d, r(k, 2), &mut rng).unwrap();
            assert_eq!(x.nonzero_valuation().unwrap(), r(k, 2));
            let y = x.invert().unwrap();
            assert_eq!(y.nonzero_valuation().unwrap(), r(-k, 2));
            assert_eq!(&x * &y, FieldElement::one(&d));
        }
        let theta = FieldElement::theta(&d);
        assert_eq!(&theta * &theta, -FieldElement::one(&d));
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = qp(5);
        let a = FieldElement::sample(&d, r(2, 1), 11).unwrap();
        let b = FieldElement::sample(&d, r(2, 1), 11).unwrap();
        assert_eq!(a.coords(), b.coords());
        assert_eq!(a.nonzero_valuation().unwrap(), r(2, 1));
        assert!(FieldElement::sample(&d, r(0, 1), 1).unwrap().is_unit());
        assert!(matches!(
            FieldElement::sample(&d, r(1, 2), 1),
            Err(Error::InvalidValuation(_))
        ));
        let ram = Arc::new(LocalFieldDesc::ramified(5, 3, 20).unwrap());
        let x = FieldElement::sample(&ram, r(1, 3), 4).unwrap();
        assert_eq!(x.nonzero_valuation().unwrap(), r(1, 3));
    }

    #[test]
    fn field_mismatch() {
        let a = FieldElement::one(&qp(3));
        let b = FieldElement::one(&qp(5));
        assert_eq!(a.try_mul(&b).unwrap_err(), Error::FieldMismatch);
    }
}
