//! The rank-2 monodromy modules `(D_alpha, Fil_{m,k,L})`, their degenerate
//! (`N = 0`) variants, and the rank-3 modules `W_{L,k}`.
//!
//! Rank-2 modules use the basis order `(e2, e1)`: `phi_0 = diag(p alpha, alpha)`,
//! `phi_i = diag(p, 1)` for `i > 0`, and `N e2 = e1`. The jump line at `sigma`
//! is spanned by `e2 + L_sigma e1`.

use std::sync::Arc;

use crate::coeff::{GaloisShape, Level, ProductElement};
use crate::error::{Error, Result};
use crate::filtration::{Filtration, FlagStep};
use crate::linalg::Matrix;
use crate::padic::{FieldElement, LocalFieldDesc, Rational};
use crate::phin::{PhiNModule, Submodule};

#[derive(Clone, Debug)]
pub struct MonodromyData {
    pub alpha: FieldElement,
    pub m: Vec<i64>,
    pub k: Vec<i64>,
    /// One component per embedding (`K`-level).
    pub ell: ProductElement,
    pub degenerate: bool,
}

/// Which of the defining conditions hold. `bound` is
/// `e v(alpha) >= sum m` for monodromy data and
/// `e v(alpha) + n >= sum_{L != 0} m + sum_{L = 0} k` for degenerate data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Conditions {
    pub weights_ordered: bool,
    pub balanced: bool,
    pub bound: bool,
}

impl Conditions {
    pub fn all(&self) -> bool {
        self.weights_ordered && self.balanced && self.bound
    }
}

impl MonodromyData {
    pub fn shape(&self) -> GaloisShape {
        self.ell.shape()
    }

    pub fn desc(&self) -> &Arc<LocalFieldDesc> {
        self.alpha.desc()
    }

    fn check_lengths(&self) -> Result<()> {
        let n = self.shape().n();
        if self.m.len() != n || self.k.len() != n {
            return Err(Error::ShapeMismatch(format!("m and k need {n} entries")));
        }
        if self.ell.level() != Level::K {
            return Err(Error::LevelMismatch {
                expected: "K",
                found: "K0",
            });
        }
        if !self.alpha.same_field(&self.ell.comps()[0]) {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    pub fn conditions(&self) -> Result<Conditions> {
        self.check_lengths()?;
        let shape = self.shape();
        let (e, f, n) = (shape.e() as i64, shape.f() as i64, shape.n() as i64);
        let v = self.alpha.nonzero_valuation()?;
        let ev = v * Rational::from_integer(e);
        let sum_m: i64 = self.m.iter().sum();
        let sum_k: i64 = self.k.iter().sum();
        let weights_ordered = self.k.iter().zip(&self.m).all(|(k, m)| k > m);
        let balanced = Rational::from_integer(e) * (v * 2 + Rational::from_integer(f))
            == Rational::from_integer(sum_k + sum_m);
        let bound = if self.degenerate {
            let mut rhs = 0;
            for (s, c) in self.ell.comps().iter().enumerate() {
                rhs += if c.decide_zero()? {
                    self.k[s]
                } else {
                    self.m[s]
                };
            }
            ev + Rational::from_integer(n) >= Rational::from_integer(rhs)
        } else {
            ev >= Rational::from_integer(sum_m)
        };
        Ok(Conditions {
            weights_ordered,
            balanced,
            bound,
        })
    }

    /// `ConstraintViolation` naming the first failing condition.
    pub fn check(&self) -> Result<()> {
        if self.degenerate && self.ell.decide_zero()? {
            return Err(Error::ZeroEll);
        }
        let c = self.conditions()?;
        if !c.weights_ordered {
            return Err(Error::ConstraintViolation(
                "condition 1: k_sigma > m_sigma fails".into(),
            ));
        }
        if !c.balanced {
            return Err(Error::ConstraintViolation(
                "condition 2: e(2 v_p(alpha) + f) = sum (k_sigma + m_sigma) fails".into(),
            ));
        }
        if !c.bound {
            return Err(Error::ConstraintViolation(if self.degenerate {
                "degenerate bound: e v_p(alpha) + n >= sum_{L != 0} m + sum_{L = 0} k fails".into()
            } else {
                "condition 3: e v_p(alpha) >= sum m_sigma fails".into()
            }));
        }
        Ok(())
    }
}

fn rank2_phi(shape: GaloisShape, alpha: &FieldElement) -> Vec<Matrix> {
    let desc = alpha.desc();
    let p = FieldElement::from_int(desc, desc.p() as i64);
    let one = FieldElement::one(desc);
    (0..shape.f())
        .map(|i| {
            if i == 0 {
                Matrix::diagonal(desc, &[&p * alpha, alpha.clone()])
            } else {
                Matrix::diagonal(desc, &[p.clone(), one.clone()])
            }
        })
        .collect()
}

fn rank2_filtration(data: &MonodromyData) -> Result<Filtration> {
    let desc = data.desc();
    let shape = data.shape();
    let flags = shape
        .embeddings()
        .map(|s| {
            let idx = shape.flat(s);
            let line = Matrix::from_columns(
                desc,
                2,
                &[vec![FieldElement::one(desc), data.ell.comps()[idx].clone()]],
            )?;
            Ok(vec![
                FlagStep {
                    jump: data.m[idx],
                    space: Matrix::identity(desc, 2),
                },
                FlagStep {
                    jump: data.k[idx],
                    space: line,
                },
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Filtration::new(shape, 2, flags)
}

/// The monodromy module without checking the defining conditions; used to
/// probe what the admissibility checker says about arbitrary parameters.
pub fn build_monodromy_unchecked(data: &MonodromyData) -> Result<(PhiNModule, Filtration)> {
    data.check_lengths()?;
    let shape = data.shape();
    let desc = data.desc();
    let nmat = if data.degenerate {
        Matrix::zeros(desc, 2, 2)
    } else {
        Matrix::from_ints(desc, &[&[0, 0], &[1, 0]])
    };
    let m = PhiNModule::new(shape, rank2_phi(shape, &data.alpha), vec![nmat; shape.f()])?;
    Ok((m, rank2_filtration(data)?))
}

/// `(D_alpha, Fil_{m,k,L})` with `N e2 = e1`.
pub fn build_monodromy(data: &MonodromyData) -> Result<(PhiNModule, Filtration)> {
    if data.degenerate {
        return Err(Error::ConstraintViolation(
            "degenerate data: use build_degenerate".into(),
        ));
    }
    data.check()?;
    build_monodromy_unchecked(data)
}

/// `(D_{alpha, p alpha}, Fil_{m,k,L})`: same phi and flag, `N = 0`.
pub fn build_degenerate(data: &MonodromyData) -> Result<(PhiNModule, Filtration)> {
    if !data.degenerate {
        return Err(Error::ConstraintViolation(
            "non-degenerate data: use build_monodromy".into(),
        ));
    }
    data.check()?;
    build_monodromy_unchecked(data)
}

/// `W_{L,k}`: `phi = diag(p, 1, 1/p)` on `(f1, f2, f3)` at every slot,
/// `N f1 = 2 f2`, `N f2 = f3`, flag `<g1> < <g1, g2> < D` with jumps
/// `k, 0, -k`, where `g1 = f1 + 2L f2 + L^2 f3` and `g2 = f2 + L f3`.
pub fn build_w(ell: &ProductElement, k: &[i64]) -> Result<(PhiNModule, Filtration)> {
    let shape = ell.shape();
    let desc = ell.desc().clone();
    if ell.level() != Level::K {
        return Err(Error::LevelMismatch {
            expected: "K",
            found: "K0",
        });
    }
    if k.len() != shape.n() {
        return Err(Error::ShapeMismatch(format!(
            "k needs {} entries",
            shape.n()
        )));
    }
    if let Some(bad) = k.iter().find(|&&x| x < 1) {
        return Err(Error::ConstraintViolation(format!(
            "W needs k_sigma >= 1, got {bad}"
        )));
    }
    let p = FieldElement::from_int(&desc, desc.p() as i64);
    let phi = Matrix::diagonal(&desc, &[p.clone(), FieldElement::one(&desc), p.invert()?]);
    let n = Matrix::from_ints(&desc, &[&[0, 0, 0], &[2, 0, 0], &[0, 1, 0]]);
    let module = PhiNModule::new(shape, vec![phi; shape.f()], vec![n; shape.f()])?;
    let one = FieldElement::one(&desc);
    let zero = FieldElement::zero(&desc);
    let two = FieldElement::from_int(&desc, 2);
    let flags = shape
        .embeddings()
        .map(|s| {
            let idx = shape.flat(s);
            let l = &ell.comps()[idx];
            let g1 = vec![one.clone(), &two * l, l * l];
            let g2 = vec![zero.clone(), one.clone(), l.clone()];
            Ok(vec![
                FlagStep {
                    jump: -k[idx],
                    space: Matrix::identity(&desc, 3),
                },
                FlagStep {
                    jump: 0,
                    space: Matrix::from_columns(&desc, 3, &[g1.clone(), g2])?,
                },
                FlagStep {
                    jump: k[idx],
                    space: Matrix::from_columns(&desc, 3, &[g1])?,
                },
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((module, Filtration::new(shape, 3, flags)?))
}

/// `End0` of a filtered module, with the filtration induced from
/// `D* (x) D`, in the basis of [`PhiNModule::end0_basis`].
pub fn end0_filtered(m: &PhiNModule, fil: &Filtration) -> Result<(PhiNModule, Filtration)> {
    let basis = m.end0_basis();
    let sub = Submodule::new(vec![basis; m.shape().f()])?;
    let hom_fil = fil.dual()?.tensor(fil)?;
    Ok((m.end0()?, hom_fil.induce_on_submodule(&sub)?))
}

/// Direct check of the explicit map `f1 -> e2 (x) e1*`,
/// `f2 -> (e1 (x) e1* - e2 (x) e2*)/2`, `f3 -> -e1 (x) e2*` from `W_{L,k}`
/// to `End0(D_alpha, Fil_{0,k,L})`: in the coordinates it defines, phi, N
/// and the flags must agree exactly.
pub fn end0_map_is_isomorphism(
    alpha: &FieldElement,
    k: &[i64],
    ell: &ProductElement,
) -> Result<bool> {
    let shape = ell.shape();
    let data = MonodromyData {
        alpha: alpha.clone(),
        m: vec![0; shape.n()],
        k: k.to_vec(),
        ell: ell.clone(),
        degenerate: false,
    };
    let (m, fil) = build_monodromy_unchecked(&data)?;
    let (e, efil) = end0_filtered(&m, &fil)?;
    let (w, wfil) = build_w(ell, k)?;
    for i in 0..shape.f() {
        if !e.phi()[i].decide_eq(&w.phi()[i])? || !e.n()[i].decide_eq(&w.n()[i])? {
            return Ok(false);
        }
    }
    efil.same_as(&wfil)
}

/// Recover `(alpha, m, k, L)` from a rank-2 module in an arbitrary basis.
///
/// With `N != 0` the basis `(e2, e1)` is pinned down by `phi^f e2 = p^f alpha e2`
/// and `e1 = N e2` up to one common scalar, which does not move `L`. With
/// `N = 0` the two eigenlines scale independently and `L` is only defined up
/// to `L^x`; it is returned with its first nonzero component equal to 1.
pub fn extract_invariants(m: &PhiNModule, fil: &Filtration) -> Result<MonodromyData> {
    if m.rank() != 2 {
        return Err(Error::NotMonodromyType(format!("rank {} != 2", m.rank())));
    }
    let shape = m.shape();
    let desc = m.desc().clone();
    let p = FieldElement::from_int(&desc, desc.p() as i64);
    let pf = p.pow(shape.f() as u32);
    let frob = m.frobenius_f();
    let degenerate = m.n()[0].decide_zero()?;

    let (alpha, e2, e1) = if !degenerate {
        let ker = m.n()[0].kernel()?;
        if ker.cols() != 1 {
            return Err(Error::NotMonodromyType("N does not have rank 1".into()));
        }
        let v1 = ker.column(0);
        let alpha = eigenvalue_of(&frob, &v1)?
            .ok_or_else(|| Error::NotMonodromyType("ker N is not a phi^f-eigenline".into()))?;
        let target = &pf * &alpha;
        let k2 = frob.try_sub(&Matrix::scalar(&desc, 2, &target))?.kernel()?;
        if k2.cols() != 1 {
            return Err(Error::NotMonodromyType(
                "no phi^f-eigenvalue p^f alpha".into(),
            ));
        }
        let e2 = k2.column(0);
        let e1 = m.n()[0].apply(&e2)?;
        (alpha, e2, e1)
    } else {
        let roots = match crate::phin::eigenvalues(&frob)? {
            Some(r) if r.len() == 2 => r,
            _ => {
                return Err(Error::NotMonodromyType(
                    "phi^f does not have two eigenvalues in L".into(),
                ))
            }
        };
        let (hi, lo) = if (&roots[0] - &(&pf * &roots[1])).decide_zero()? {
            (roots[0].clone(), roots[1].clone())
        } else if (&roots[1] - &(&pf * &roots[0])).decide_zero()? {
            (roots[1].clone(), roots[0].clone())
        } else {
            return Err(Error::NotMonodromyType(
                "eigenvalue ratio is not p^f".into(),
            ));
        };
        let eig = |l: &FieldElement| -> Result<Vec<FieldElement>> {
            let k = frob.try_sub(&Matrix::scalar(&desc, 2, l))?.kernel()?;
            if k.cols() != 1 {
                return Err(Error::PrecisionLoss("eigenspace dimension is not 1".into()));
            }
            Ok(k.column(0))
        };
        (lo.clone(), eig(&hi)?, eig(&lo)?)
    };

    // propagate the adapted basis to every slot
    let mut slot_bases = Vec::with_capacity(shape.f());
    let (mut b2, mut b1) = (e2, e1);
    let p_alpha_inv = (&p * &alpha).invert()?;
    let alpha_inv = alpha.invert()?;
    let p_inv = p.invert()?;
    for i in 0..shape.f() {
        slot_bases.push(Matrix::from_columns(&desc, 2, &[b2.clone(), b1.clone()])?);
        let (s2, s1) = if i == 0 {
            (&p_alpha_inv, &alpha_inv)
        } else {
            (&p_inv, &FieldElement::one(&desc))
        };
        b2 = m.phi()[i].apply(&b2)?.iter().map(|x| x * s2).collect();
        b1 = m.phi()[i].apply(&b1)?.iter().map(|x| x * s1).collect();
    }

    let n = shape.n();
    let (mut mv, mut kv, mut ell) = (vec![0; n], vec![0; n], Vec::with_capacity(n));
    for s in shape.embeddings() {
        let idx = shape.flat(s);
        let steps = fil.steps(s);
        if steps.len() != 2 {
            return Err(Error::NotMonodromyType(format!(
                "embedding {idx}: flag has no jump line"
            )));
        }
        mv[idx] = steps[0].jump;
        kv[idx] = steps[1].jump;
        let c = slot_bases[s.i].coordinates_of(&steps[1].space)?;
        let (x, y) = (c.get(0, 0), c.get(1, 0));
        if x.decide_zero()? {
            return Err(Error::NotMonodromyType(format!(
                "embedding {idx}: the jump line is the e1-line"
            )));
        }
        ell.push(y.try_div(x)?);
    }
    let mut ell = ProductElement::new(shape, Level::K, ell)?;
    if degenerate {
        let mut lead = None;
        for c in ell.comps() {
            if !c.decide_zero()? {
                lead = Some(c.invert()?);
                break;
            }
        }
        let lead = lead.ok_or(Error::ZeroEll)?;
        ell = ell.scale(&lead);
    }
    Ok(MonodromyData {
        alpha,
        m: mv,
        k: kv,
        ell,
        degenerate,
    })
}

/// `lambda` with `a v = lambda v`, if `v` is an eigenvector.
fn eigenvalue_of(a: &Matrix, v: &[FieldElement]) -> Result<Option<FieldElement>> {
    let w = a.apply(v)?;
    let pivot = v
        .iter()
        .enumerate()
        .filter_map(|(i, x)| x.known_valuation().map(|val| (val, i)))
        .min()
        .map(|(_, i)| i)
        .ok_or_else(|| Error::PrecisionLoss("zero eigenvector".into()))?;
    let lambda = w[pivot].try_div(&v[pivot])?;
    for (x, y) in v.iter().zip(&w) {
        if !(y - &(x * &lambda)).decide_zero()? {
            return Ok(None);
        }
    }
    Ok(Some(lambda))
}

/// Degenerate classification: equal `alpha`, `m`, `k`, and `L2 = b L1` for
/// some `b` in `L^x`.
pub fn iso_degenerate(d1: &MonodromyData, d2: &MonodromyData) -> Result<bool> {
    if !(d1.degenerate && d2.degenerate) {
        return Err(Error::ConstraintViolation(
            "iso_degenerate needs degenerate data".into(),
        ));
    }
    if d1.shape() != d2.shape() || d1.m != d2.m || d1.k != d2.k {
        return Ok(false);
    }
    if !(&d1.alpha - &d2.alpha).decide_zero()? {
        return Ok(false);
    }
    let (l1, l2) = (d1.ell.comps(), d2.ell.comps());
    let mut b = None;
    for (x, y) in l1.iter().zip(l2) {
        match (x.decide_zero()?, y.decide_zero()?) {
            (true, true) => {}
            (false, false) => {
                let r = y.try_div(x)?;
                match &b {
                    None => b = Some(r),
                    Some(b0) => {
                        if !(b0 - &r).decide_zero()? {
                            return Ok(false);
                        }
                    }
                }
            }
            _ => return Ok(false),
        }
    }
    Ok(b.is_some())
}

/// Twist by the rank-1 module `phi = (beta, 1, ..., 1)` with jumps `-m`,
/// where `beta = pi^t` has valuation `-sum m / e`. Returns the data with
/// `m = 0`, `k - m` and `alpha beta`, together with `beta`.
pub fn twist_to_m0(data: &MonodromyData) -> Result<(MonodromyData, FieldElement)> {
    data.check_lengths()?;
    let desc = data.desc();
    let e = data.shape().e() as i64;
    let sum_m: i64 = data.m.iter().sum();
    let ticks = Rational::new(-sum_m * desc.e_l() as i64, e);
    if !ticks.is_integer() {
        return Err(Error::InvalidValuation(format!(
            "{} is not in (1/e_L)Z",
            Rational::new(-sum_m, e)
        )));
    }
    let beta = FieldElement::uniformizer(desc).powi(ticks.to_integer())?;
    let twisted = MonodromyData {
        alpha: &data.alpha * &beta,
        m: vec![0; data.m.len()],
        k: data.k.iter().zip(&data.m).map(|(k, m)| k - m).collect(),
        ell: data.ell.clone(),
        degenerate: data.degenerate,
    };
    Ok((twisted, beta))
}

impl MonodromyData {
    /// Same `alpha`, `m`, `k`, `degenerate`, and `L` equal componentwise.
    pub fn same_as(&self, other: &MonodromyData) -> Result<bool> {
        if self.m != other.m || self.k != other.k || self.degenerate != other.degenerate {
            return Ok(false);
        }
        if !(&self.alpha - &other.alpha).decide_zero()? {
            return Ok(false);
        }
        self.ell.try_sub(&other.ell)?.decide_zero()
    }
}
