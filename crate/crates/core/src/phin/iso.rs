//! Isomorphism of filtered (phi, N)-modules with split, multiplicity-free `phi^f`.
//!
//! In eigen-coordinates (slot-0 eigenbasis propagated by `phi`) both modules
//! have the same `phi`, so a morphism is a diagonal torus element `D` acting
//! identically on every slot. Compatibility with `N` and with the flags
//! reduces to constraints `d_a / d_b = r`, checked by a multiplicative
//! union-find.

use crate::error::{Error, Result};
use crate::filtration::Filtration;
use crate::linalg::Matrix;
use crate::padic::FieldElement;

use super::eigen::{self, Roots};
use super::PhiNModule;

pub fn is_isomorphic(
    m1: &PhiNModule,
    f1: &Filtration,
    m2: &PhiNModule,
    f2: &Filtration,
) -> Result<bool> {
    if m1.shape() != m2.shape() {
        return Err(Error::ShapeMismatch(
            "modules over different Galois shapes".into(),
        ));
    }
    if **m1.desc() != **m2.desc() {
        return Err(Error::FieldMismatch);
    }
    if m1.rank() != m2.rank() {
        return Ok(false);
    }
    let d = m1.rank();
    let (b1, l1) = eigenbasis(m1)?;
    let (b2, l2) = eigenbasis(m2)?;
    // match eigenvalues
    let mut order = Vec::with_capacity(d);
    for x in &l1 {
        let mut hit = None;
        for (k, y) in l2.iter().enumerate() {
            if (x - y).decide_zero()? {
                hit = Some(k);
                break;
            }
        }
        match hit {
            Some(k) if !order.contains(&k) => order.push(k),
            _ => return Ok(false),
        }
    }
    let b2 = b2.select_columns(&order);

    let mut torus = Torus::new(d);
    let n1 = b1.inverse()?.try_mul(&m1.n()[0])?.try_mul(&b1)?;
    let n2 = b2.inverse()?.try_mul(&m2.n()[0])?.try_mul(&b2)?;
    for a in 0..d {
        for b in 0..d {
            let (x, y) = (n1.get(a, b), n2.get(a, b));
            match (x.decide_zero()?, y.decide_zero()?) {
                (true, true) => {}
                (false, false) => {
                    // d_a x = y d_b
                    if !torus.relate(a, b, y.try_div(x)?)? {
                        return Ok(false);
                    }
                }
                _ => return Ok(false),
            }
        }
    }

    let shape = m1.shape();
    let c1: Vec<Matrix> = (0..shape.f())
        .map(|i| m1.transfer(i).try_mul(&b1))
        .collect::<Result<_>>()?;
    let c2: Vec<Matrix> = (0..shape.f())
        .map(|i| m2.transfer(i).try_mul(&b2))
        .collect::<Result<_>>()?;
    for s in shape.embeddings() {
        let (s1, s2) = (f1.steps(s), f2.steps(s));
        if s1.len() != s2.len() || s1.iter().zip(s2).any(|(a, b)| a.jump != b.jump) {
            return Ok(false);
        }
        for (a, b) in s1.iter().zip(s2) {
            let dim = a.space.cols();
            if dim != b.space.cols() {
                return Ok(false);
            }
            if dim == 0 || dim == d {
                continue;
            }
            let w1 = c1[s.i].coordinates_of(&a.space)?;
            let w2 = c2[s.i].coordinates_of(&b.space)?;
            let ok = if dim == 1 {
                line_constraint(&mut torus, &w1.column(0), &w2.column(0), false)?
            } else if dim == d - 1 {
                let v1 = w1.annihilator()?.column(0);
                let v2 = w2.annihilator()?.column(0);
                line_constraint(&mut torus, &v1, &v2, true)?
            } else {
                return Err(Error::UnsupportedEnumeration(format!(
                    "flag step of dimension {dim} in rank {d}"
                )));
            };
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Eigenbasis of `phi^f` on slot 0 with its eigenvalues.
fn eigenbasis(m: &PhiNModule) -> Result<(Matrix, Vec<FieldElement>)> {
    let d = m.rank();
    if d > 3 {
        return Err(Error::UnsupportedEnumeration(format!("rank {d} > 3")));
    }
    let f = m.frobenius_f();
    let roots = match eigen::roots(&eigen::charpoly(&f)?)? {
        Roots::Distinct { roots, rest } if rest.len() == 1 => roots,
        _ => {
            return Err(Error::UnsupportedEnumeration(
                "isomorphism test needs distinct eigenvalues of phi^f in L".into(),
            ))
        }
    };
    let mut b = Matrix::zeros(m.desc(), d, 0);
    for lambda in &roots {
        let k = f.try_sub(&Matrix::scalar(m.desc(), d, lambda))?.kernel()?;
        if k.cols() != 1 {
            return Err(Error::PrecisionLoss("eigenspace dimension is not 1".into()));
        }
        b = b.hstack(&k)?;
    }
    Ok((b, roots))
}

/// `D x` parallel to `y` (or, for normals, `D^-1 x` parallel to `y`).
fn line_constraint(
    t: &mut Torus,
    x: &[FieldElement],
    y: &[FieldElement],
    inverse: bool,
) -> Result<bool> {
    let mut support = Vec::new();
    for (a, (u, v)) in x.iter().zip(y).enumerate() {
        match (u.decide_zero()?, v.decide_zero()?) {
            (true, true) => {}
            (false, false) => support.push(a),
            _ => return Ok(false),
        }
    }
    let Some(&a0) = support.first() else {
        return Ok(false);
    };
    for &a in &support[1..] {
        // d_a x_a / (d_a0 x_a0) = y_a / y_a0
        let mut r = (&y[a] * &x[a0]).try_div(&(&y[a0] * &x[a]))?;
        if inverse {
            r = r.invert()?;
        }
        if !t.relate(a, a0, r)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Multiplicative union-find over the diagonal entries `d_a`.
struct Torus {
    parent: Vec<usize>,
    /// `d_a / d_parent(a)`
    ratio: Vec<Option<FieldElement>>,
}

impl Torus {
    fn new(d: usize) -> Self {
        Torus {
            parent: (0..d).collect(),
            ratio: vec![None; d],
        }
    }

    /// Root of `a` and `d_a / d_root` (`None` meaning 1).
    fn find(&self, a: usize) -> (usize, Option<FieldElement>) {
        let mut cur = a;
        let mut acc: Option<FieldElement> = None;
        while self.parent[cur] != cur {
            let r = self.ratio[cur].clone().expect("non-root has a ratio");
            acc = Some(match acc {
                None => r,
                Some(x) => &x * &r,
            });
            cur = self.parent[cur];
        }
        (cur, acc)
    }

    /// Impose `d_a / d_b = r`; false when inconsistent with earlier constraints.
    fn relate(&mut self, a: usize, b: usize, r: FieldElement) -> Result<bool> {
        let (ra, x) = self.find(a);
        let (rb, y) = self.find(b);
        let one = || FieldElement::one(r.desc());
        let x = x.unwrap_or_else(one);
        let y = y.unwrap_or_else(one);
        if ra == rb {
            // d_a / d_b = x / y
            return (&x - &(&r * &y)).decide_zero();
        }
        // d_ra / d_rb = r * y / x
        let link = (&r * &y).try_div(&x)?;
        self.parent[ra] = rb;
        self.ratio[ra] = Some(link);
        Ok(true)
    }
}
