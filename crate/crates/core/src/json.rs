//! JSON encoding of the library's values. Decoders report failures as
//! [`Error::Parse`] with a JSON pointer to the offending node.
//!
//! A field element is an integer, a rational string such as `"-3/25"`, or an
//! array of `e_L f_L` such coordinates (`c[a f_L + b]` multiplies
//! `pi^a theta^b`). Encoders emit the string form for `Q_p` and for
//! rational constants, and the array form otherwise.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Map, Value};

use crate::coeff::{DualNumber, GaloisShape, Level, ProductElement};
use crate::cohomology::{H1Tate, H1Trivial, H2Class};
use crate::colmez::FamilyGerm;
use crate::error::{Error, Result};
use crate::filtration::{Filtration, FlagStep};
use crate::linalg::Matrix;
use crate::monodromy::MonodromyData;
use crate::padic::{FieldElement, LocalFieldDesc};
use crate::phin::PhiNModule;

fn child(ptr: &str, key: impl std::fmt::Display) -> String {
    format!("{ptr}/{key}")
}

pub fn get<'a>(v: &'a Value, ptr: &str, key: &str) -> Result<(&'a Value, String)> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::parse(ptr, "expected an object"))?;
    let p = child(ptr, key);
    obj.get(key)
        .map(|x| (x, p.clone()))
        .ok_or_else(|| Error::parse(p, "missing field"))
}

pub fn array<'a>(v: &'a Value, ptr: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::parse(ptr, "expected an array"))
}

pub fn int(v: &Value, ptr: &str) -> Result<i64> {
    v.as_i64()
        .ok_or_else(|| Error::parse(ptr, "expected an integer"))
}

fn uint(v: &Value, ptr: &str) -> Result<u64> {
    v.as_u64()
        .ok_or_else(|| Error::parse(ptr, "expected a nonnegative integer"))
}

fn int_vec(v: &Value, ptr: &str) -> Result<Vec<i64>> {
    array(v, ptr)?
        .iter()
        .enumerate()
        .map(|(i, x)| int(x, &child(ptr, i)))
        .collect()
}

fn bigint(v: &Value, ptr: &str) -> Result<BigInt> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| Error::parse(ptr, "expected an integer")),
        Value::String(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::parse(ptr, format!("bad integer {s:?}"))),
        _ => Err(Error::parse(ptr, "expected an integer")),
    }
}

fn rational(v: &Value, ptr: &str) -> Result<BigRational> {
    match v {
        Value::String(s) => {
            let (num, den) = match s.split_once('/') {
                Some((a, b)) => (a, b),
                None => (s.as_str(), "1"),
            };
            let bad = || Error::parse(ptr, format!("bad rational {s:?}"));
            let num: BigInt = num.trim().parse().map_err(|_| bad())?;
            let den: BigInt = den.trim().parse().map_err(|_| bad())?;
            if den.is_zero() {
                return Err(Error::parse(ptr, "zero denominator"));
            }
            Ok(BigRational::new(num, den))
        }
        _ => Ok(BigRational::from_integer(bigint(v, ptr)?)),
    }
}

/// `{"p": 5, "prec": 60}` for `Q_p`; `"eL": e` (or `"ramification"`) gives
/// `pi^e = p`; explicit `"unram_poly"` / `"eis_poly"` give a general tower,
/// with optional `"eL"` / `"fL"` checked against them.
pub fn field_from_json(v: &Value, ptr: &str) -> Result<LocalFieldDesc> {
    let (p, pp) = get(v, ptr, "p")?;
    let p = uint(p, &pp)?;
    let prec = match get(v, ptr, "prec") {
        Ok((x, xp)) => {
            u32::try_from(uint(x, &xp)?).map_err(|_| Error::parse(xp, "precision too large"))?
        }
        Err(_) => crate::padic::DEFAULT_PREC,
    };
    let obj = v.as_object().expect("checked by get");
    let field_err = |e: Error| match e {
        Error::InvalidField(m) => Error::parse(ptr, m),
        other => other,
    };
    if obj.contains_key("unram_poly") || obj.contains_key("eis_poly") {
        let (u, up) = get(v, ptr, "unram_poly")?;
        let unram = array(u, &up)?
            .iter()
            .enumerate()
            .map(|(i, x)| bigint(x, &child(&up, i)))
            .collect::<Result<_>>()?;
        let (e, ep) = get(v, ptr, "eis_poly")?;
        let eis = array(e, &ep)?
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let cp = child(&ep, i);
                array(c, &cp)?
                    .iter()
                    .enumerate()
                    .map(|(j, x)| bigint(x, &child(&cp, j)))
                    .collect()
            })
            .collect::<Result<_>>()?;
        let d = LocalFieldDesc::new(p, unram, eis, prec).map_err(field_err)?;
        for (key, want) in [("eL", d.e_l()), ("fL", d.f_l())] {
            if let Ok((x, xp)) = get(v, ptr, key) {
                if uint(x, &xp)? as usize != want {
                    return Err(Error::parse(
                        xp,
                        format!("disagrees with the polynomials ({want})"),
                    ));
                }
            }
        }
        return Ok(d);
    }
    if let Ok((x, xp)) = get(v, ptr, "fL") {
        if uint(x, &xp)? != 1 {
            return Err(Error::parse(
                xp,
                "fL > 1 needs \"unram_poly\" and \"eis_poly\"",
            ));
        }
    }
    let e = match get(v, ptr, "eL").or_else(|_| get(v, ptr, "ramification")) {
        Ok((x, xp)) => uint(x, &xp)? as usize,
        Err(_) => 1,
    };
    LocalFieldDesc::ramified(p, e, prec).map_err(field_err)
}

pub fn field_to_json(d: &LocalFieldDesc) -> Value {
    json!({
        "p": d.p(),
        "eL": d.e_l(),
        "fL": d.f_l(),
        "prec": d.prec(),
        "unram_poly": d.unram_poly().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "eis_poly": d.eis_poly().iter().map(|c| c.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

pub fn shape_from_json(v: &Value, ptr: &str) -> Result<GaloisShape> {
    let (e, ep) = get(v, ptr, "e")?;
    let (f, fp) = get(v, ptr, "f")?;
    let (e, f) = (uint(e, &ep)? as usize, uint(f, &fp)? as usize);
    GaloisShape::new(e, f).map_err(|err| Error::parse(ptr, err.to_string()))
}

pub fn shape_to_json(s: GaloisShape) -> Value {
    json!({"e": s.e(), "f": s.f()})
}

pub fn element_from_json(desc: &Arc<LocalFieldDesc>, v: &Value, ptr: &str) -> Result<FieldElement> {
    match v {
        Value::Array(items) => {
            if items.len() != desc.degree() {
                return Err(Error::parse(
                    ptr,
                    format!(
                        "expected {} coordinates, found {}",
                        desc.degree(),
                        items.len()
                    ),
                ));
            }
            let coords = items
                .iter()
                .enumerate()
                .map(|(i, x)| rational(x, &child(ptr, i)))
                .collect::<Result<Vec<_>>>()?;
            Ok(FieldElement::from_coords(desc, &coords))
        }
        _ => Ok(FieldElement::from_rational(desc, &rational(v, ptr)?)),
    }
}

pub fn element_to_json(x: &FieldElement) -> Value {
    if let Some(r) = small_rational(x) {
        return Value::String(r.to_string());
    }
    let coords = x.coords();
    if coords.len() == 1 || coords[1..].iter().all(Zero::is_zero) {
        return Value::String(coords[0].to_string());
    }
    Value::Array(
        coords
            .iter()
            .map(|c| Value::String(c.to_string()))
            .collect(),
    )
}

/// The rational of smallest height congruent to `x` at its precision, for
/// elements of `Q_p` (rational reconstruction by the half extended gcd).
fn small_rational(x: &FieldElement) -> Option<BigRational> {
    if x.desc().degree() != 1 {
        return None;
    }
    let prec = x.precision()?.floor().to_integer();
    let c = x.coords().pop()?;
    let p = BigInt::from(x.desc().p());
    let mut s = 0u32;
    let mut den = c.denom().clone();
    while (&den % &p).is_zero() {
        den /= &p;
        s += 1;
    }
    if !den.is_one() {
        return Some(c);
    }
    let digits = prec + i64::from(s);
    if digits <= 0 {
        return None;
    }
    let modulus = num_traits::pow(p.clone(), digits as usize);
    let u = c.numer().mod_floor(&modulus);
    let bound = (&modulus / 2u32).sqrt();
    let (mut r0, mut r1) = (modulus.clone(), u);
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        (r0, r1, t0, t1) = (r1, r2, t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound || (&t1 % &p).is_zero() {
        return None;
    }
    let scale = num_traits::pow(p, s as usize);
    Some(BigRational::new(r1, t1 * scale))
}

pub fn product_from_json(
    shape: GaloisShape,
    level: Level,
    desc: &Arc<LocalFieldDesc>,
    v: &Value,
    ptr: &str,
) -> Result<ProductElement> {
    let items = array(v, ptr)?;
    let want = if level == Level::K {
        shape.n()
    } else {
        shape.f()
    };
    if items.len() != want {
        return Err(Error::parse(
            ptr,
            format!("expected {want} components, found {}", items.len()),
        ));
    }
    let comps = items
        .iter()
        .enumerate()
        .map(|(i, x)| element_from_json(desc, x, &child(ptr, i)))
        .collect::<Result<_>>()?;
    ProductElement::new(shape, level, comps)
}

pub fn product_to_json(x: &ProductElement) -> Value {
    Value::Array(x.comps().iter().map(element_to_json).collect())
}

/// A matrix is an array of rows.
pub fn matrix_from_json(desc: &Arc<LocalFieldDesc>, v: &Value, ptr: &str) -> Result<Matrix> {
    let rows = array(v, ptr)?
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let rp = child(ptr, i);
            array(r, &rp)?
                .iter()
                .enumerate()
                .map(|(j, x)| element_from_json(desc, x, &child(&rp, j)))
                .collect()
        })
        .collect::<Result<Vec<Vec<_>>>>()?;
    Matrix::from_rows(desc, rows).map_err(|e| Error::parse(ptr, e.to_string()))
}

pub fn matrix_to_json(m: &Matrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array(m.row(i).iter().map(element_to_json).collect()))
            .collect(),
    )
}

/// `{"phi": [matrix per slot], "n": [matrix per slot]}`.
pub fn module_from_json(
    shape: GaloisShape,
    desc: &Arc<LocalFieldDesc>,
    v: &Value,
    ptr: &str,
) -> Result<PhiNModule> {
    let slots = |key: &str| -> Result<Vec<Matrix>> {
        let (x, xp) = get(v, ptr, key)?;
        let items = array(x, &xp)?;
        if items.len() != shape.f() {
            return Err(Error::parse(
                &xp,
                format!("expected {} slots, found {}", shape.f(), items.len()),
            ));
        }
        items
            .iter()
            .enumerate()
            .map(|(i, m)| matrix_from_json(desc, m, &child(&xp, i)))
            .collect()
    };
    PhiNModule::new(shape, slots("phi")?, slots("n")?)
}

pub fn module_to_json(m: &PhiNModule) -> Value {
    json!({
        "phi": m.phi().iter().map(matrix_to_json).collect::<Vec<_>>(),
        "n": m.n().iter().map(matrix_to_json).collect::<Vec<_>>(),
    })
}

/// An array (one entry per embedding, flat order) of steps
/// `{"jump": j, "basis": [vector, ...]}`.
pub fn filtration_from_json(
    shape: GaloisShape,
    desc: &Arc<LocalFieldDesc>,
    rank: usize,
    v: &Value,
    ptr: &str,
) -> Result<Filtration> {
    let per = array(v, ptr)?;
    if per.len() != shape.n() {
        return Err(Error::parse(
            ptr,
            format!("expected {} embeddings, found {}", shape.n(), per.len()),
        ));
    }
    let mut flags = Vec::with_capacity(per.len());
    for (s, steps) in per.iter().enumerate() {
        let sp = child(ptr, s);
        let mut flag = Vec::new();
        for (t, step) in array(steps, &sp)?.iter().enumerate() {
            let tp = child(&sp, t);
            let (j, jp) = get(step, &tp, "jump")?;
            let (b, bp) = get(step, &tp, "basis")?;
            let cols = array(b, &bp)?
                .iter()
                .enumerate()
                .map(|(c, col)| {
                    let cp = child(&bp, c);
                    let items = array(col, &cp)?;
                    if items.len() != rank {
                        return Err(Error::parse(
                            &cp,
                            format!("expected a vector of length {rank}"),
                        ));
                    }
                    items
                        .iter()
                        .enumerate()
                        .map(|(k, x)| element_from_json(desc, x, &child(&cp, k)))
                        .collect()
                })
                .collect::<Result<Vec<Vec<_>>>>()?;
            flag.push(FlagStep {
                jump: int(j, &jp)?,
                space: Matrix::from_columns(desc, rank, &cols)?,
            });
        }
        flags.push(flag);
    }
    Filtration::new(shape, rank, flags)
}

pub fn filtration_to_json(fil: &Filtration) -> Value {
    let shape = fil.shape();
    Value::Array(
        shape
            .embeddings()
            .map(|s| {
                Value::Array(
                    fil.steps(s)
                        .iter()
                        .map(|st| {
                            let basis: Vec<Value> = st
                                .space
                                .columns()
                                .iter()
                                .map(|c| Value::Array(c.iter().map(element_to_json).collect()))
                                .collect();
                            json!({"jump": st.jump, "basis": basis})
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn monodromy_from_json(
    shape: GaloisShape,
    desc: &Arc<LocalFieldDesc>,
    v: &Value,
    ptr: &str,
) -> Result<MonodromyData> {
    let (a, ap) = get(v, ptr, "alpha")?;
    let (m, mp) = get(v, ptr, "m")?;
    let (k, kp) = get(v, ptr, "k")?;
    let (l, lp) = get(v, ptr, "ell")?;
    let degenerate = match get(v, ptr, "degenerate") {
        Ok((x, xp)) => x
            .as_bool()
            .ok_or_else(|| Error::parse(xp, "expected a boolean"))?,
        Err(_) => false,
    };
    let (m, k) = (int_vec(m, &mp)?, int_vec(k, &kp)?);
    if m.len() != shape.n() {
        return Err(Error::parse(mp, format!("expected {} entries", shape.n())));
    }
    if k.len() != shape.n() {
        return Err(Error::parse(kp, format!("expected {} entries", shape.n())));
    }
    Ok(MonodromyData {
        alpha: element_from_json(desc, a, &ap)?,
        m,
        k,
        ell: product_from_json(shape, Level::K, desc, l, &lp)?,
        degenerate,
    })
}

pub fn monodromy_to_json(d: &MonodromyData) -> Value {
    json!({
        "alpha": element_to_json(&d.alpha),
        "m": d.m,
        "k": d.k,
        "ell": product_to_json(&d.ell),
        "degenerate": d.degenerate,
    })
}

fn pair<'a>(v: &'a Value, ptr: &str) -> Result<(&'a Value, &'a Value)> {
    match array(v, ptr)?.as_slice() {
        [a, b] => Ok((a, b)),
        _ => Err(Error::parse(ptr, "expected a pair [value, derivative]")),
    }
}

/// `{"alpha": [a0, a1], "delta": [d0, d1], "kappa": [[...], [...]], "ell": [...]}`;
/// `ell` may be omitted (it is then zero).
pub fn germ_from_json(
    shape: GaloisShape,
    desc: &Arc<LocalFieldDesc>,
    v: &Value,
    ptr: &str,
) -> Result<FamilyGerm> {
    let dual = |key: &str| -> Result<DualNumber<FieldElement>> {
        let (x, xp) = get(v, ptr, key)?;
        let (a, b) = pair(x, &xp)?;
        DualNumber::new(
            element_from_json(desc, a, &child(&xp, 0))?,
            element_from_json(desc, b, &child(&xp, 1))?,
        )
    };
    let (k, kp) = get(v, ptr, "kappa")?;
    let (k0, k1) = pair(k, &kp)?;
    let kappa = DualNumber::new(
        product_from_json(shape, Level::K, desc, k0, &child(&kp, 0))?,
        product_from_json(shape, Level::K, desc, k1, &child(&kp, 1))?,
    )?;
    let ell = match get(v, ptr, "ell") {
        Ok((l, lp)) => product_from_json(shape, Level::K, desc, l, &lp)?,
        Err(_) => ProductElement::zero(shape, Level::K, desc),
    };
    FamilyGerm::new(dual("alpha")?, dual("delta")?, kappa, ell)
}

pub fn germ_to_json(g: &FamilyGerm) -> Value {
    json!({
        "alpha": [element_to_json(&g.alpha.a0), element_to_json(&g.alpha.a1)],
        "delta": [element_to_json(&g.delta.a0), element_to_json(&g.delta.a1)],
        "kappa": [product_to_json(&g.kappa.a0), product_to_json(&g.kappa.a1)],
        "ell": product_to_json(&g.ell),
    })
}

pub fn h1_trivial_from_json(
    shape: GaloisShape,
    desc: &Arc<LocalFieldDesc>,
    v: &Value,
    ptr: &str,
) -> Result<H1Trivial> {
    let (a1, p1) = get(v, ptr, "a1")?;
    let (a2, p2) = get(v, ptr, "a2")?;
    H1Trivial::new(
        element_from_json(desc, a1, &p1)?,
        product_from_json(shape, Level::K, desc, a2, &p2)?,
    )
}

pub fn h1_tate_from_json(
    shape: GaloisShape,
    desc: &Arc<LocalFieldDesc>,
    v: &Value,
    ptr: &str,
) -> Result<H1Tate> {
    let (b1, p1) = get(v, ptr, "b1")?;
    let (b2, p2) = get(v, ptr, "b2")?;
    H1Tate::new(
        element_from_json(desc, b1, &p1)?,
        product_from_json(shape, Level::K, desc, b2, &p2)?,
    )
}

pub fn h1_trivial_to_json(x: &H1Trivial) -> Value {
    json!({"a1": element_to_json(&x.a1), "a2": product_to_json(&x.a2)})
}

pub fn h1_tate_to_json(x: &H1Tate) -> Value {
    json!({"b1": element_to_json(&x.b1), "b2": product_to_json(&x.b2)})
}

pub fn h2_to_json(x: &H2Class) -> Value {
    json!({"c": element_to_json(&x.c)})
}

/// Drop keys whose value is `null`.
pub fn compact(v: Value) -> Value {
    match v {
        Value::Object(m) => Value::Object(
            m.into_iter()
                .filter(|(_, x)| !x.is_null())
                .map(|(k, x)| (k, compact(x)))
                .collect::<Map<_, _>>(),
        ),
        Value::Array(a) => Value::Array(a.into_iter().map(compact).collect()),
        x => x,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn element_round_trip() {
        let d = Arc::new(LocalFieldDesc::ramified(3, 2, 20).unwrap());
        let v = json!(["1/3", 4]);
        let x = element_from_json(&d, &v, "").unwrap();
        let back = element_from_json(&d, &element_to_json(&x), "").unwrap();
        assert_eq!(x, back);
        let err = element_from_json(&d, &json!([1]), "/x").unwrap_err();
        assert!(matches!(err, Error::Parse { pointer, .. } if pointer == "/x"));
    }

    #[test]
    fn field_parse() {
        let d = field_from_json(&json!({"p": 5, "prec": 30}), "/field").unwrap();
        assert_eq!(d.degree(), 1);
        let err = field_from_json(&json!({"p": 6}), "/field").unwrap_err();
        assert!(matches!(err, Error::Parse { pointer, .. } if pointer == "/field"));
        let d2 = field_from_json(&field_to_json(&d), "").unwrap();
        assert_eq!(d, d2);
    }
}
