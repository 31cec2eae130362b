use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::residue;
use crate::error::{Error, Result};

/// Default absolute precision, in p-adic digits.
pub const DEFAULT_PREC: u32 = 60;

/// A finite extension `L / Q_p` presented as an unramified step `Q_p(theta)`
/// followed by an Eisenstein step `Q_p(theta)(pi)`.
///
/// `unram_poly` is monic of degree `f_L`, irreducible mod `p`; `eis_poly` is
/// monic of degree `e_L` with coefficients in `Z[theta]` (each given by its
/// `f_L` theta-coordinates). Both are stored low degree first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalFieldDesc {
    p: u64,
    p_big: BigInt,
    unram_poly: Vec<BigInt>,
    eis_poly: Vec<Vec<BigInt>>,
    prec: u32,
}

impl LocalFieldDesc {
    pub fn new(
        p: u64,
        unram_poly: Vec<BigInt>,
        eis_poly: Vec<Vec<BigInt>>,
        prec: u32,
    ) -> Result<Self> {
        if !residue::is_prime_u64(p) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        if prec == 0 {
            return Err(Error::InvalidField("precision must be positive".into()));
        }
        let p_big = BigInt::from(p);
        if unram_poly.len() < 2 || !unram_poly.last().unwrap().is_one() {
            return Err(Error::InvalidField(
                "unram_poly must be monic of degree >= 1".into(),
            ));
        }
        let f_l = unram_poly.len() - 1;
        if !residue::is_irreducible(&unram_poly, &p_big) {
            return Err(Error::InvalidField(
                "unram_poly is not irreducible mod p".into(),
            ));
        }
        if eis_poly.len() < 2 {
            return Err(Error::InvalidField("eis_poly must have degree >= 1".into()));
        }
        let e_l = eis_poly.len() - 1;
        let mut eis = Vec::with_capacity(e_l + 1);
        for (i, c) in eis_poly.into_iter().enumerate() {
            if c.len() > f_l {
                return Err(Error::InvalidField(format!(
                    "eis_poly coefficient {i} has more than {f_l} theta-coordinates"
                )));
            }
            let mut c = c;
            c.resize(f_l, BigInt::zero());
            eis.push(c);
        }
        let lead = &eis[e_l];
        if !lead[0].is_one() || lead[1..].iter().any(|c| !c.is_zero()) {
            return Err(Error::InvalidField("eis_poly must be monic".into()));
        }
        // theta is a unit and (theta^b) is an integral basis, so the valuation of a
        // coefficient is the minimum over its theta-coordinates
        let coeff_val = |c: &[BigInt]| -> Option<u64> {
            c.iter()
                .filter(|x| !x.is_zero())
                .map(|x| vp(x, &p_big))
                .min()
        };
        for (i, c) in eis[..e_l].iter().enumerate() {
            match coeff_val(c) {
                Some(0) => {
                    return Err(Error::InvalidField(format!(
                        "eis_poly is not Eisenstein: coefficient {i} is a unit"
                    )))
                }
                None if i == 0 => {
                    return Err(Error::InvalidField(
                        "eis_poly has zero constant term".into(),
                    ))
                }
                Some(v) if i == 0 && v != 1 => {
                    return Err(Error::InvalidField(
                        "eis_poly constant term must have valuation exactly 1".into(),
                    ))
                }
                _ => {}
            }
        }
        Ok(LocalFieldDesc {
            p,
            p_big,
            unram_poly,
            eis_poly: eis,
            prec,
        })
    }

    /// `Q_p` itself.
    pub fn qp(p: u64, prec: u32) -> Result<Self> {
        Self::ramified(p, 1, prec)
    }

    /// Totally ramified `Q_p(pi)` with `pi^e = p` (`e = 1` gives `Q_p`, `pi = p`).
    pub fn ramified(p: u64, e: usize, prec: u32) -> Result<Self> {
        let mut eis = vec![vec![BigInt::zero()]; e + 1];
        eis[0] = vec![-BigInt::from(p)];
        eis[e] = vec![BigInt::one()];
        Self::new(p, vec![BigInt::zero(), BigInt::one()], eis, prec)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub(crate) fn p_big(&self) -> &BigInt {
        &self.p_big
    }

    pub fn f_l(&self) -> usize {
        self.unram_poly.len() - 1
    }

    pub fn e_l(&self) -> usize {
        self.eis_poly.len() - 1
    }

    /// Absolute degree `[L : Q_p]`.
    pub fn degree(&self) -> usize {
        self.e_l() * self.f_l()
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn unram_poly(&self) -> &[BigInt] {
        &self.unram_poly
    }

    pub fn eis_poly(&self) -> &[Vec<BigInt>] {
        &self.eis_poly
    }

    /// Same field at another default precision.
    pub fn with_prec(&self, prec: u32) -> Result<Self> {
        if prec == 0 {
            return Err(Error::InvalidField("precision must be positive".into()));
        }
        Ok(LocalFieldDesc {
            prec,
            ..self.clone()
        })
    }

    /// Default precision floor in ticks (units of `1/e_L`).
    pub(crate) fn prec_ticks(&self) -> i64 {
        self.prec as i64 * self.e_l() as i64
    }

    /// An element indistinguishable from zero is accepted as zero only when its
    /// precision floor is at least this many ticks; below it, zero-tests that
    /// feed a verdict raise `PrecisionLoss`.
    pub(crate) fn zero_guard_ticks(&self) -> i64 {
        Integer::div_ceil(&(self.prec as i64), &2) * self.e_l() as i64
    }

    /// Multiply two theta-polynomials (length `f_L`), reducing by `unram_poly`.
    pub(crate) fn theta_mul(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let f = self.f_l();
        let mut prod = vec![BigInt::zero(); 2 * f - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                prod[i + j] += x * y;
            }
        }
        for d in (f..prod.len()).rev() {
            let c = std::mem::take(&mut prod[d]);
            if c.is_zero() {
                continue;
            }
            for (b, u) in self.unram_poly[..f].iter().enumerate() {
                prod[d - f + b] -= &c * u;
            }
        }
        prod.truncate(f);
        prod
    }

    /// Multiply two coordinate vectors (index `a * f_L + b` for `pi^a theta^b`),
    /// reducing modulo both defining polynomials and modulo `modulus`.
    pub(crate) fn coords_mul(&self, x: &[BigInt], y: &[BigInt], modulus: &BigInt) -> Vec<BigInt> {
        let (e, f) = (self.e_l(), self.f_l());
        let mut prod: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); f]; 2 * e - 1];
        for i in 0..e {
            let xi = &x[i * f..(i + 1) * f];
            if xi.iter().all(|c| c.is_zero()) {
                continue;
            }
            for j in 0..e {
                let yj = &y[j * f..(j + 1) * f];
                if yj.iter().all(|c| c.is_zero()) {
                    continue;
                }
                let t = self.theta_mul(xi, yj);
                for (acc, v) in prod[i + j].iter_mut().zip(t) {
                    *acc += v;
                }
            }
        }
        for c in prod.iter_mut() {
            for v in c.iter_mut() {
                *v = v.mod_floor(modulus);
            }
        }
        // pi^e = -sum_{a<e} eis[a] pi^a
        for d in (e..prod.len()).rev() {
            let c = std::mem::replace(&mut prod[d], vec![BigInt::zero(); f]);
            if c.iter().all(|v| v.is_zero()) {
                continue;
            }
            for a in 0..e {
                let t = self.theta_mul(&c, &self.eis_poly[a]);
                for (acc, v) in prod[d - e + a].iter_mut().zip(t) {
                    *acc = (&*acc - v).mod_floor(modulus);
                }
            }
        }
        prod.truncate(e);
        prod.into_iter().flatten().collect()
    }
}

/// p-adic valuation of a nonzero integer.
pub(crate) fn vp(x: &BigInt, p: &BigInt) -> u64 {
    debug_assert!(!x.is_zero());
    let mut v = 0;
    let mut y = x.clone();
    loop {
        let (q, r) = y.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        y = q;
        v += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(cs: &[i64]) -> Vec<BigInt> {
        cs.iter().map(|&c| BigInt::from(c)).collect()
    }

    #[test]
    fn rejects_bad_descriptions() {
        assert!(matches!(
            LocalFieldDesc::qp(4, 10),
            Err(Error::InvalidField(_))
        ));
        // x^2 - 1 is reducible mod 3
        let r = LocalFieldDesc::new(3, ints(&[-1, 0, 1]), vec![ints(&[0]), ints(&[1])], 10);
        assert!(r.is_err());
        // T^2 - 9 is not Eisenstein
        let r = LocalFieldDesc::new(
            3,
            ints(&[0, 1]),
            vec![ints(&[-9]), ints(&[0]), ints(&[1])],
            10,
        );
        assert!(r.is_err());
        // T^2 + T - 3: middle coefficient is a unit
        let r = LocalFieldDesc::new(
            3,
            ints(&[0, 1]),
            vec![ints(&[-3]), ints(&[1]), ints(&[1])],
            10,
        );
        assert!(r.is_err());
    }

    #[test]
    fn accepts_towers() {
        let d = LocalFieldDesc::new(
            3,
            ints(&[1, 0, 1]),
            vec![ints(&[0, 3]), ints(&[3, 0]), ints(&[1, 0])],
            20,
        )
        .unwrap();
        assert_eq!((d.e_l(), d.f_l(), d.degree()), (2, 2, 4));
        let q = LocalFieldDesc::qp(5, 60).unwrap();
        assert_eq!((q.e_l(), q.f_l()), (1, 1));
    }
}
