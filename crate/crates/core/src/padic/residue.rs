//! Polynomials over F_p, used for the residue field of the unramified step.
//!
//! Coefficients are stored low degree first and kept reduced into `[0, p)`.
//! The zero polynomial is the empty vector.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

pub(crate) type FpPoly = Vec<BigInt>;

pub(crate) fn reduce(poly: &[BigInt], p: &BigInt) -> FpPoly {
    let mut out: FpPoly = poly.iter().map(|c| c.mod_floor(p)).collect();
    trim(&mut out);
    out
}

fn trim(poly: &mut FpPoly) {
    while poly.last().is_some_and(|c| c.is_zero()) {
        poly.pop();
    }
}

fn degree(poly: &FpPoly) -> Option<usize> {
    poly.len().checked_sub(1)
}

pub(crate) fn sub(a: &FpPoly, b: &FpPoly, p: &BigInt) -> FpPoly {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).cloned().unwrap_or_default();
        let y = b.get(i).cloned().unwrap_or_default();
        out.push((x - y).mod_floor(p));
    }
    trim(&mut out);
    out
}

pub(crate) fn mul(a: &FpPoly, b: &FpPoly, p: &BigInt) -> FpPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    reduce(&out, p)
}

fn inv_mod(a: &BigInt, p: &BigInt) -> BigInt {
    let e = a.extended_gcd(p);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(p)
}

/// Division with remainder; `b` must be nonzero.
pub(crate) fn divmod(a: &FpPoly, b: &FpPoly, p: &BigInt) -> (FpPoly, FpPoly) {
    let db = degree(b).expect("division by the zero polynomial");
    let lead_inv = inv_mod(&b[db], p);
    let mut rem = a.clone();
    let mut quot = vec![BigInt::zero(); a.len().saturating_sub(db).max(1)];
    while let Some(dr) = degree(&rem) {
        if dr < db {
            break;
        }
        let c = (&rem[dr] * &lead_inv).mod_floor(p);
        let shift = dr - db;
        quot[shift] = c.clone();
        for (i, y) in b.iter().enumerate() {
            rem[i + shift] = (&rem[i + shift] - &c * y).mod_floor(p);
        }
        trim(&mut rem);
    }
    trim(&mut quot);
    (quot, rem)
}

pub(crate) fn rem(a: &FpPoly, b: &FpPoly, p: &BigInt) -> FpPoly {
    divmod(a, b, p).1
}

fn make_monic(a: &FpPoly, p: &BigInt) -> FpPoly {
    match a.last() {
        None => Vec::new(),
        Some(lead) => {
            let inv = inv_mod(lead, p);
            a.iter().map(|c| (c * &inv).mod_floor(p)).collect()
        }
    }
}

pub(crate) fn gcd(a: &FpPoly, b: &FpPoly, p: &BigInt) -> FpPoly {
    let (mut x, mut y) = (a.clone(), b.clone());
    while !y.is_empty() {
        let r = rem(&x, &y, p);
        x = y;
        y = r;
    }
    make_monic(&x, p)
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub(crate) fn inverse_mod_poly(a: &FpPoly, m: &FpPoly, p: &BigInt) -> Option<FpPoly> {
    // extended Euclid keeping only the Bezout coefficient of `a`
    let (mut r0, mut r1) = (m.clone(), rem(a, m, p));
    let (mut s0, mut s1): (FpPoly, FpPoly) = (Vec::new(), vec![BigInt::one()]);
    while !r1.is_empty() {
        let (q, r) = divmod(&r0, &r1, p);
        let s2 = sub(&s0, &mul(&q, &s1, p), p);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
    }
    if degree(&r0) != Some(0) {
        return None;
    }
    let c = inv_mod(&r0[0], p);
    Some(rem(
        &s0.iter().map(|x| (x * &c).mod_floor(p)).collect(),
        m,
        p,
    ))
}

fn pow_mod(base: &FpPoly, exp: &BigUint, m: &FpPoly, p: &BigInt) -> FpPoly {
    let mut result = rem(&vec![BigInt::one()], m, p);
    let mut b = rem(base, m, p);
    for i in 0..exp.bits() {
        if exp.bit(i) {
            result = rem(&mul(&result, &b, p), m, p);
        }
        b = rem(&mul(&b, &b, p), m, p);
    }
    result
}

fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin's irreducibility test for a polynomial of positive degree.
pub(crate) fn is_irreducible(g: &FpPoly, p: &BigInt) -> bool {
    let g = make_monic(&reduce(g, p), p);
    let Some(d) = degree(&g) else { return false };
    if d == 0 {
        return false;
    }
    if d == 1 {
        return true;
    }
    let x: FpPoly = vec![BigInt::zero(), BigInt::one()];
    let pu = p.to_biguint().expect("positive prime");
    // x^(p^i) mod g for i = 0..=d
    let mut frob = vec![rem(&x, &g, p)];
    for i in 1..=d {
        let next = pow_mod(&frob[i - 1], &pu, &g, p);
        frob.push(next);
    }
    if !sub(&frob[d], &frob[0], p).is_empty() {
        return false;
    }
    prime_factors(d).into_iter().all(|q| {
        let h = sub(&frob[d / q], &frob[0], p);
        degree(&gcd(&h, &g, p)) == Some(0)
    })
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n == b {
            return true;
        }
        if n.is_multiple_of(b) {
            return false;
        }
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut a: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, a);
            }
            a = mul(a, a);
            e >>= 1;
        }
        r
    };
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &BASES {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(cs: &[i64]) -> FpPoly {
        cs.iter().map(|&c| BigInt::from(c)).collect()
    }

    #[test]
    fn irreducibility_small_cases() {
        let three = BigInt::from(3);
        assert!(is_irreducible(&poly(&[1, 0, 1]), &three)); // x^2+1 mod 3
        assert!(!is_irreducible(&poly(&[2, 0, 1]), &three)); // x^2-1
        let two = BigInt::from(2);
        assert!(is_irreducible(&poly(&[1, 1, 1]), &two));
        assert!(is_irreducible(&poly(&[1, 1, 0, 1]), &two)); // x^3+x+1
        assert!(!is_irreducible(&poly(&[1, 0, 0, 1]), &two)); // x^3+1 = (x+1)(...)
                                                              // product of two irreducible quadratics mod 3 has no roots but is reducible
        let q = mul(&poly(&[1, 0, 1]), &poly(&[2, 1, 1]), &three);
        assert!(!is_irreducible(&q, &three));
    }

    #[test]
    fn inverse_in_residue_field() {
        let three = BigInt::from(3);
        let g = poly(&[1, 0, 1]);
        let a = poly(&[1, 1]);
        let inv = inverse_mod_poly(&a, &g, &three).unwrap();
        assert_eq!(rem(&mul(&a, &inv, &three), &g, &three), poly(&[1]));
    }

    #[test]
    fn primality() {
        let primes: Vec<u64> = (0..100).filter(|&n| is_prime_u64(n)).collect();
        assert_eq!(primes.len(), 25);
        assert!(is_prime_u64(1_000_000_007));
        assert!(!is_prime_u64(3_215_031_751));
    }
}
