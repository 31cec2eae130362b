//! Eigenvalues of `phi^f` for ranks up to 3.
//!
//! Roots of the characteristic polynomial are isolated by its Newton polygon.
//! A segment of length one carries exactly one root, which is the fixed point
//! of a contraction; a segment of length two is solved by the quadratic formula
//! with a Hensel square root. Everything else is outside the supported regime.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::padic::{residue, FieldElement, LocalFieldDesc, Rational};

/// Largest residue field searched exhaustively for square roots.
const MAX_RESIDUE_FIELD: u64 = 1 << 16;

/// Monic characteristic polynomial, coefficients low degree first.
pub(crate) fn charpoly(m: &Matrix) -> Result<Vec<FieldElement>> {
    let desc = m.desc();
    let one = FieldElement::one(desc);
    let g = |i: usize, j: usize| m.get(i, j).clone();
    match m.rows() {
        1 => Ok(vec![-g(0, 0), one]),
        2 => Ok(vec![m.det()?, -m.trace(), one]),
        3 => {
            let c2 = &(&(&g(0, 0) * &g(1, 1) - &g(0, 1) * &g(1, 0))
                + &(&g(0, 0) * &g(2, 2) - &g(0, 2) * &g(2, 0)))
                + &(&g(1, 1) * &g(2, 2) - &g(1, 2) * &g(2, 1));
            Ok(vec![-m.det()?, c2, -m.trace(), one])
        }
        d => Err(Error::UnsupportedEnumeration(format!("rank {d} > 3"))),
    }
}

/// Roots of a monic polynomial that lie in `L`, and the monic cofactor
/// collecting the rest (irreducible over `L` when nonconstant).
#[derive(Debug)]
pub(crate) enum Roots {
    /// Pairwise distinct roots; `rest` has degree `deg - roots.len()`.
    Distinct {
        roots: Vec<FieldElement>,
        rest: Vec<FieldElement>,
    },
    /// A double root of a quadratic.
    Double(FieldElement),
}

pub(crate) fn roots(poly: &[FieldElement]) -> Result<Roots> {
    let deg = poly.len() - 1;
    let desc = poly[0].desc().clone();
    if deg == 1 {
        return Ok(Roots::Distinct {
            roots: vec![-&poly[0]],
            rest: vec![FieldElement::one(&desc)],
        });
    }
    let segments = newton_segments(poly)?;
    let long: Vec<&(usize, usize)> = segments.iter().filter(|(a, b)| b - a > 1).collect();
    if long.is_empty() {
        let roots = segments
            .iter()
            .map(|&(i, _)| isolated_root(poly, i))
            .collect::<Result<Vec<_>>>()?;
        return Ok(Roots::Distinct {
            roots,
            rest: vec![FieldElement::one(&desc)],
        });
    }
    if long[0].1 - long[0].0 > 2 {
        return Err(Error::UnsupportedEnumeration(
            "three eigenvalues of equal valuation".into(),
        ));
    }
    // one segment of length two, possibly with one isolated root to deflate
    let mut quad = poly.to_vec();
    let mut found = Vec::new();
    for &(i, j) in &segments {
        if j - i == 1 {
            let r = isolated_root(poly, i)?;
            quad = deflate(&quad, &r);
            found.push(r);
        }
    }
    match quadratic(&quad)? {
        Quadratic::Double(r) => {
            if deg == 2 {
                Ok(Roots::Double(r))
            } else {
                Err(Error::UnsupportedEnumeration(
                    "repeated eigenvalue in rank 3".into(),
                ))
            }
        }
        Quadratic::Split(a, b) => {
            found.push(a);
            found.push(b);
            Ok(Roots::Distinct {
                roots: found,
                rest: vec![FieldElement::one(&desc)],
            })
        }
        Quadratic::Irreducible => Ok(Roots::Distinct {
            roots: found,
            rest: quad,
        }),
    }
}

/// Segments `(i, j)` of the lower convex hull of `(k, v(a_k))`.
fn newton_segments(poly: &[FieldElement]) -> Result<Vec<(usize, usize)>> {
    let pts: Vec<(usize, Rational)> = poly
        .iter()
        .enumerate()
        .filter_map(|(k, a)| a.known_valuation().map(|v| (k, v)))
        .collect();
    if pts.first().map(|p| p.0) != Some(0) {
        return Err(Error::PrecisionLoss(
            "constant term of the characteristic polynomial is not certified".into(),
        ));
    }
    let mut hull: Vec<(usize, Rational)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (a, b) = (&hull[hull.len() - 2], &hull[hull.len() - 1]);
            // drop b if it lies on or above the segment a -> p
            let lhs = (b.1 - a.1) * Rational::from_integer((p.0 - a.0) as i64);
            let rhs = (p.1 - a.1) * Rational::from_integer((b.0 - a.0) as i64);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    // absent coefficients must be provably above the hull
    for (k, a) in poly.iter().enumerate() {
        if a.known_valuation().is_none() {
            if let Some(prec) = a.precision() {
                let seg = hull
                    .windows(2)
                    .find(|w| w[0].0 <= k && k <= w[1].0)
                    .expect("hull spans");
                let (x0, y0, x1, y1) = (seg[0].0 as i64, seg[0].1, seg[1].0 as i64, seg[1].1);
                let on_hull = y0 + (y1 - y0) * Rational::new(k as i64 - x0, x1 - x0);
                if prec <= on_hull {
                    return Err(Error::PrecisionLoss(format!(
                        "coefficient {k} of the characteristic polynomial is not certified"
                    )));
                }
            }
        }
    }
    Ok(hull.windows(2).map(|w| (w[0].0, w[1].0)).collect())
}

/// The unique root on the length-one segment `(i, i + 1)`, as the fixed point
/// of `x = -(a_i + sum_{k != i, i+1} a_k x^(k-i)) / a_{i+1}`.
fn isolated_root(poly: &[FieldElement], i: usize) -> Result<FieldElement> {
    let desc = poly[0].desc();
    let lead_inv = poly[i + 1].invert()?;
    let mut x = -(&poly[i] * &lead_inv);
    let max_iter = (desc.prec() as usize) * desc.e_l() + 5;
    for _ in 0..max_iter {
        let mut acc = poly[i].clone();
        for (k, a) in poly.iter().enumerate() {
            if k == i || k == i + 1 || a.is_literal_zero() {
                continue;
            }
            acc = &acc + &(a * &x.powi(k as i64 - i as i64)?);
        }
        let next = -(&acc * &lead_inv);
        if (&next - &x).is_zero() {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::PrecisionLoss(
        "eigenvalue iteration did not stabilize".into(),
    ))
}

/// Synthetic division by `x - r`, dropping the remainder.
fn deflate(poly: &[FieldElement], r: &FieldElement) -> Vec<FieldElement> {
    let deg = poly.len() - 1;
    let mut q = vec![FieldElement::zero(r.desc()); deg];
    q[deg - 1] = poly[deg].clone();
    for k in (1..deg).rev() {
        q[k - 1] = &poly[k] + &(r * &q[k]);
    }
    q
}

enum Quadratic {
    Double(FieldElement),
    Split(FieldElement, FieldElement),
    Irreducible,
}

fn quadratic(poly: &[FieldElement]) -> Result<Quadratic> {
    let desc = poly[0].desc().clone();
    let half =
        FieldElement::from_rational(&desc, &BigRational::new(BigInt::one(), BigInt::from(2)));
    let (c, b) = (&poly[0], &poly[1]);
    let disc = &(b * b) - &(&FieldElement::from_int(&desc, 4) * c);
    if disc.decide_zero()? {
        return Ok(Quadratic::Double(-(b * &half)));
    }
    if desc.p() == 2 {
        return Err(Error::UnsupportedEnumeration(
            "eigenvalues of equal valuation over a 2-adic field".into(),
        ));
    }
    match sqrt(&disc)? {
        None => Ok(Quadratic::Irreducible),
        Some(s) => Ok(Quadratic::Split(&(&s - b) * &half, -(&(&s + b) * &half))),
    }
}

/// Square root in `L` for odd `p`, or `None` when there is none.
pub(crate) fn sqrt(w: &FieldElement) -> Result<Option<FieldElement>> {
    let desc = w.desc().clone();
    let v = w.nonzero_valuation()?;
    let ticks = (v * Rational::from_integer(desc.e_l() as i64)).to_integer();
    if ticks.is_odd() {
        return Ok(None);
    }
    let pi_h = FieldElement::uniformizer(&desc).powi(ticks / 2)?;
    let u = w.try_div(&(&pi_h * &pi_h))?;
    let Some(res) = u.residue() else {
        return Err(Error::PrecisionLoss(
            "unit part of a square root argument".into(),
        ));
    };
    let Some(root) = residue_sqrt(&desc, &res)? else {
        return Ok(None);
    };
    let half =
        FieldElement::from_rational(&desc, &BigRational::new(BigInt::one(), BigInt::from(2)));
    let mut y = FieldElement::from_residue(&desc, &root);
    for _ in 0..(2 * desc.prec() as usize + 5) {
        let next = &(&y + &u.try_div(&y)?) * &half;
        if (&next - &y).is_zero() {
            return Ok(Some(&pi_h * &next));
        }
        y = next;
    }
    Err(Error::PrecisionLoss(
        "square root iteration did not stabilize".into(),
    ))
}

/// Exhaustive square root in the residue field `F_p[theta]/(g)`.
fn residue_sqrt(desc: &Arc<LocalFieldDesc>, target: &[BigInt]) -> Result<Option<Vec<BigInt>>> {
    let p = BigInt::from(desc.p());
    let f = desc.f_l();
    let q = (desc.p() as u128)
        .checked_pow(f as u32)
        .unwrap_or(u128::MAX);
    if q > MAX_RESIDUE_FIELD as u128 {
        return Err(Error::UnsupportedEnumeration(format!(
            "residue field of size {q} too large to search"
        )));
    }
    let g = residue::reduce(desc.unram_poly(), &p);
    let target = residue::reduce(target, &p);
    for idx in 0..q as u64 {
        let mut digits = Vec::with_capacity(f);
        let mut r = idx;
        for _ in 0..f {
            digits.push(BigInt::from(r % desc.p()));
            r /= desc.p();
        }
        let cand = residue::reduce(&digits, &p);
        let sq = residue::rem(&residue::mul(&cand, &cand, &p), &g, &p);
        if sq == target {
            let mut out = cand;
            out.resize(f, BigInt::zero());
            return Ok(Some(out));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: u64) -> Arc<LocalFieldDesc> {
        Arc::new(LocalFieldDesc::qp(p, 40).unwrap())
    }

    fn poly(d: &Arc<LocalFieldDesc>, cs: &[i64]) -> Vec<FieldElement> {
        cs.iter().map(|&c| FieldElement::from_int(d, c)).collect()
    }

    fn eval(p: &[FieldElement], x: &FieldElement) -> FieldElement {
        p.iter()
            .rev()
            .fold(FieldElement::zero(x.desc()), |acc, c| &(&acc * x) + c)
    }

    #[test]
    fn separated_roots() {
        let d = q(3);
        // (x - 1)(x - 3)(x - 9)
        let p = poly(&d, &[-27, 39, -13, 1]);
        let Roots::Distinct { roots, rest } = roots(&p).unwrap() else {
            panic!()
        };
        assert_eq!(rest.len(), 1);
        assert_eq!(roots.len(), 3);
        for r in &roots {
            assert!(eval(&p, r).is_zero());
        }
    }

    #[test]
    fn equal_valuation_roots() {
        let d = q(5);
        // (x - 1)(x - 2)
        let p = poly(&d, &[2, -3, 1]);
        let Roots::Distinct { roots, .. } = roots(&p).unwrap() else {
            panic!()
        };
        assert_eq!(roots.len(), 2);
        assert!(roots.iter().all(|r| eval(&p, r).is_zero()));
        // x^2 - 2 is irreducible over Q_5
        let Roots::Distinct { roots, rest } = super::roots(&poly(&d, &[-2, 0, 1])).unwrap() else {
            panic!()
        };
        assert!(roots.is_empty());
        assert_eq!(rest.len(), 3);
        // x^2 - 6 splits over Q_5 (6 = 1 mod 5)
        let Roots::Distinct { roots, .. } = super::roots(&poly(&d, &[-6, 0, 1])).unwrap() else {
            panic!()
        };
        assert_eq!(roots.len(), 2);
        // (x - 1)^2
        assert!(matches!(
            super::roots(&poly(&d, &[1, -2, 1])).unwrap(),
            Roots::Double(_)
        ));
        // (x - 5)(x^2 - 2) : one isolated root plus an irreducible quadratic
        let Roots::Distinct { roots, rest } = super::roots(&poly(&d, &[10, -2, -5, 1])).unwrap()
        else {
            panic!()
        };
        assert_eq!(roots.len(), 1);
        assert_eq!(rest.len(), 3);
    }
}
