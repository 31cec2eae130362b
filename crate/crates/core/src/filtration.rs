//! Per-embedding decreasing flags on `D_K`, Hodge numbers and admissibility.
//!
//! A flag at `sigma` is a list of steps `(j_1, V_1), ..., (j_r, V_r)` with
//! `j_1 < ... < j_r`, `V_1 = D^(i(sigma))` and `dim V_t` strictly decreasing.
//! `Fil^i = V_t` for the least `t` with `j_t >= i`, and `Fil^i = 0` for
//! `i > j_r`. Zero spaces are never stored.

use std::sync::Arc;

use crate::coeff::{EmbeddingIndex, GaloisShape};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::padic::{LocalFieldDesc, Rational};
use crate::phin::{PhiNModule, Submodule, SubmoduleSet};

#[derive(Clone, Debug)]
pub struct FlagStep {
    pub jump: i64,
    /// Basis of the step, as columns in `L^rank`.
    pub space: Matrix,
}

#[derive(Clone, Debug)]
pub struct Filtration {
    shape: GaloisShape,
    desc: Arc<LocalFieldDesc>,
    rank: usize,
    flags: Vec<Vec<FlagStep>>,
}

impl Filtration {
    /// Validates and normalizes per-embedding flags (lexicographic `sigma`
    /// order). Trailing zero spaces are dropped.
    pub fn new(shape: GaloisShape, rank: usize, flags: Vec<Vec<FlagStep>>) -> Result<Self> {
        if flags.len() != shape.n() {
            return Err(Error::InvalidFiltration(format!(
                "expected {} embeddings, got {}",
                shape.n(),
                flags.len()
            )));
        }
        let mut out = Vec::with_capacity(flags.len());
        for (s, steps) in flags.into_iter().enumerate() {
            let mut norm: Vec<FlagStep> = Vec::new();
            for step in steps {
                if step.space.rows() != rank {
                    return Err(Error::InvalidFiltration(format!(
                        "embedding {s}: subspace lives in dimension {}, expected {rank}",
                        step.space.rows()
                    )));
                }
                let space = step.space.column_space()?;
                if let Some(prev) = norm.last() {
                    if step.jump <= prev.jump {
                        return Err(Error::InvalidFiltration(format!(
                            "embedding {s}: jumps must increase"
                        )));
                    }
                    if space.cols() >= prev.space.cols() {
                        return Err(Error::InvalidFiltration(format!(
                            "embedding {s}: dimensions must strictly decrease"
                        )));
                    }
                    if !prev.space.spans(&space)? {
                        return Err(Error::InvalidFiltration(format!(
                            "embedding {s}: step at jump {} is not contained in its predecessor",
                            step.jump
                        )));
                    }
                } else if space.cols() != rank {
                    return Err(Error::InvalidFiltration(format!(
                        "embedding {s}: the first step must be the whole space"
                    )));
                }
                if space.cols() > 0 {
                    norm.push(FlagStep {
                        jump: step.jump,
                        space,
                    });
                }
            }
            if norm.is_empty() {
                return Err(Error::InvalidFiltration(format!(
                    "embedding {s}: empty flag"
                )));
            }
            out.push(norm);
        }
        let desc = out[0][0].space.desc().clone();
        Ok(Filtration {
            shape,
            desc,
            rank,
            flags: out,
        })
    }

    /// The filtration of the zero module: every flag is empty.
    pub fn zero(shape: GaloisShape, desc: &Arc<LocalFieldDesc>) -> Self {
        Filtration {
            shape,
            desc: desc.clone(),
            rank: 0,
            flags: vec![Vec::new(); shape.n()],
        }
    }

    /// Single jump at `jump` for every embedding.
    pub fn trivial(shape: GaloisShape, desc: &Arc<LocalFieldDesc>, rank: usize, jump: i64) -> Self {
        let step = FlagStep {
            jump,
            space: Matrix::identity(desc, rank),
        };
        Filtration {
            shape,
            desc: desc.clone(),
            rank,
            flags: vec![vec![step]; shape.n()],
        }
    }

    pub fn shape(&self) -> GaloisShape {
        self.shape
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn steps(&self, s: EmbeddingIndex) -> &[FlagStep] {
        &self.flags[self.shape.flat(s)]
    }

    pub fn flags(&self) -> &[Vec<FlagStep>] {
        &self.flags
    }

    pub fn jumps(&self, s: EmbeddingIndex) -> Vec<i64> {
        self.steps(s).iter().map(|st| st.jump).collect()
    }

    fn desc(&self) -> &Arc<LocalFieldDesc> {
        &self.desc
    }

    /// `Fil^i` at `sigma`.
    pub fn fil(&self, s: EmbeddingIndex, i: i64) -> Matrix {
        self.steps(s)
            .iter()
            .find(|st| st.jump >= i)
            .map(|st| st.space.clone())
            .unwrap_or_else(|| Matrix::zeros(self.desc(), self.rank, 0))
    }

    /// `t_H = sum_sigma sum_i i * dim gr^i`.
    pub fn hodge_number(&self) -> i64 {
        self.flags
            .iter()
            .map(|steps| {
                steps
                    .iter()
                    .enumerate()
                    .map(|(t, st)| {
                        let next = steps.get(t + 1).map_or(0, |n| n.space.cols());
                        st.jump * (st.space.cols() - next) as i64
                    })
                    .sum::<i64>()
            })
            .sum()
    }

    /// Rebuild every step through `f(slot, space)`.
    pub(crate) fn map_subspaces(
        &self,
        f: impl Fn(usize, &Matrix) -> Result<Matrix>,
    ) -> Result<Filtration> {
        let flags = self
            .shape
            .embeddings()
            .map(|s| {
                self.steps(s)
                    .iter()
                    .map(|st| {
                        Ok(FlagStep {
                            jump: st.jump,
                            space: f(s.i, &st.space)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        match flags[0].first() {
            Some(st) => Filtration::new(self.shape, st.space.rows(), flags),
            None => Ok(self.clone()),
        }
    }

    /// `Fil^i(D') = Fil^i(D) cap D'`, in the coordinates of the submodule's
    /// slot bases.
    pub fn induce_on_submodule(&self, sub: &Submodule) -> Result<Filtration> {
        let r = sub.rank();
        if r == 0 {
            return Ok(Filtration::zero(self.shape, self.desc()));
        }
        let flags = self
            .shape
            .embeddings()
            .map(|s| {
                let basis = sub.basis(s.i);
                let steps = self
                    .steps(s)
                    .iter()
                    .map(|st| {
                        // v in span(basis) cap V: basis * x = V * y
                        let k = basis.hstack(&st.space.map(|x| -x))?.kernel()?;
                        let coords = k.select_rows(0..r).column_space()?;
                        Ok(FlagStep {
                            jump: st.jump,
                            space: coords,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(merge_steps(steps))
            })
            .collect::<Result<Vec<_>>>()?;
        Filtration::new(self.shape, r, flags)
    }

    /// Image filtration on `D / D'`, in coordinates complementary to the
    /// submodule's slot bases.
    pub fn induce_on_quotient(&self, sub: &Submodule) -> Result<Filtration> {
        let (d, r) = (self.rank, sub.rank());
        if r >= d {
            return Ok(Filtration::zero(self.shape, self.desc()));
        }
        let flags = self
            .shape
            .embeddings()
            .map(|s| {
                let basis = sub.basis(s.i);
                let full = extend_basis(basis)?;
                let inv = full.inverse()?;
                let steps = self
                    .steps(s)
                    .iter()
                    .map(|st| {
                        let img = inv.try_mul(&st.space)?.select_rows(r..d).column_space()?;
                        Ok(FlagStep {
                            jump: st.jump,
                            space: img,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(merge_steps(steps))
            })
            .collect::<Result<Vec<_>>>()?;
        Filtration::new(self.shape, d - r, flags)
    }

    /// `Fil^i(D*) = Ann(Fil^{1-i}(D))`.
    pub fn dual(&self) -> Result<Filtration> {
        if self.rank == 0 {
            return Ok(self.clone());
        }
        let flags = self
            .flags
            .iter()
            .map(|steps| {
                let r = steps.len();
                let mut out = vec![FlagStep {
                    jump: -steps[r - 1].jump,
                    space: Matrix::identity(self.desc(), self.rank),
                }];
                for t in (1..r).rev() {
                    out.push(FlagStep {
                        jump: -steps[t - 1].jump,
                        space: steps[t].space.annihilator()?,
                    });
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        Filtration::new(self.shape, self.rank, flags)
    }

    /// `Fil^c = sum_{a + b = c} Fil^a (x) Fil^b`, basis index `a * rank(other) + b`.
    pub fn tensor(&self, other: &Filtration) -> Result<Filtration> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(
                "filtrations over different Galois shapes".into(),
            ));
        }
        let d = self.rank * other.rank;
        if d == 0 {
            return Ok(Filtration::zero(self.shape, self.desc()));
        }
        let flags = self
            .flags
            .iter()
            .zip(&other.flags)
            .map(|(x, y)| {
                let mut cands: Vec<i64> = x
                    .iter()
                    .flat_map(|a| y.iter().map(move |b| a.jump + b.jump))
                    .collect();
                cands.sort_unstable();
                cands.dedup();
                let steps = cands
                    .into_iter()
                    .map(|c| {
                        let mut span = Matrix::zeros(self.desc(), d, 0);
                        for a in x {
                            for b in y {
                                if a.jump + b.jump >= c {
                                    span = span.hstack(&a.space.kron(&b.space))?;
                                }
                            }
                        }
                        Ok(FlagStep {
                            jump: c,
                            space: span.column_space()?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(merge_steps(steps))
            })
            .collect::<Result<Vec<_>>>()?;
        Filtration::new(self.shape, d, flags)
    }

    /// Same chains of subspaces at every embedding, jumps ignored.
    pub fn same_filtration_type(&self, other: &Filtration) -> Result<bool> {
        if self.shape != other.shape || self.rank != other.rank {
            return Ok(false);
        }
        for (x, y) in self.flags.iter().zip(&other.flags) {
            if x.len() != y.len() {
                return Ok(false);
            }
            for (a, b) in x.iter().zip(y) {
                if !a.space.same_span(&b.space)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Equal jumps and equal subspaces at every embedding.
    pub fn same_as(&self, other: &Filtration) -> Result<bool> {
        if !self.same_filtration_type(other)? {
            return Ok(false);
        }
        Ok(self
            .flags
            .iter()
            .zip(&other.flags)
            .all(|(x, y)| x.iter().zip(y).all(|(a, b)| a.jump == b.jump)))
    }
}

/// Collapse runs of equal subspaces to the step with the largest jump and
/// drop zero spaces. Input steps are weakly decreasing in dimension.
fn merge_steps(steps: Vec<FlagStep>) -> Vec<FlagStep> {
    let mut out: Vec<FlagStep> = Vec::new();
    for st in steps {
        if st.space.cols() == 0 {
            break;
        }
        match out.last_mut() {
            Some(prev) if prev.space.cols() == st.space.cols() => *prev = st,
            _ => out.push(st),
        }
    }
    out
}

/// Extend independent columns to a basis of the ambient space with standard vectors.
fn extend_basis(basis: &Matrix) -> Result<Matrix> {
    let d = basis.rows();
    let id = Matrix::identity(basis.desc(), d);
    let mut cur = basis.clone();
    for j in 0..d {
        if cur.cols() == d {
            break;
        }
        let cand = cur.hstack(&id.select_columns(&[j]))?;
        if cand.rank()? == cand.cols() {
            cur = cand;
        }
    }
    Ok(cur)
}

/// A submodule examined by the admissibility checker.
#[derive(Clone, Debug)]
pub struct SubmoduleCheck {
    pub submodule: Submodule,
    pub t_n: Rational,
    pub t_h: i64,
}

#[derive(Clone, Debug)]
pub struct AdmissibilityVerdict {
    pub admissible: bool,
    pub t_n: Rational,
    pub t_h: i64,
    /// Submodules with `t_N(D') < t_H(D')`.
    pub violations: Vec<SubmoduleCheck>,
    /// Every submodule examined, violating or not.
    pub checked: Vec<SubmoduleCheck>,
}

/// `t_N(D) = t_H(D)` and `t_N(D') >= t_H(D')` for every phi- and N-stable
/// submodule `D'` with the induced filtration.
///
/// For a rank-2 module with scalar `phi^f` and `N = 0` every line is a
/// submodule, and `t_H` of a line only depends on which jump lines it meets;
/// the supremum is attained among the jump lines (pulled back to slot 0) and
/// one line avoiding all of them.
pub fn is_admissible(m: &PhiNModule, fil: &Filtration) -> Result<AdmissibilityVerdict> {
    if m.shape() != fil.shape() || m.rank() != fil.rank() {
        return Err(Error::ShapeMismatch(
            "module and filtration disagree".into(),
        ));
    }
    let t_n = m.newton_number()?;
    let t_h = fil.hodge_number();
    let subs = match m.enumerate_submodules()? {
        SubmoduleSet::Finite(subs) => subs,
        SubmoduleSet::LineFamily => line_family_candidates(m, fil)?,
    };
    let mut checked = Vec::new();
    for sub in subs {
        let tn = m.restrict(&sub)?.newton_number()?;
        let th = fil.induce_on_submodule(&sub)?.hodge_number();
        checked.push(SubmoduleCheck {
            submodule: sub,
            t_n: tn,
            t_h: th,
        });
    }
    let violations: Vec<SubmoduleCheck> = checked
        .iter()
        .filter(|c| c.t_n < Rational::from_integer(c.t_h))
        .cloned()
        .collect();
    Ok(AdmissibilityVerdict {
        admissible: t_n == Rational::from_integer(t_h) && violations.is_empty(),
        t_n,
        t_h,
        violations,
        checked,
    })
}

fn line_family_candidates(m: &PhiNModule, fil: &Filtration) -> Result<Vec<Submodule>> {
    let desc = m.desc().clone();
    let mut lines: Vec<Matrix> = Vec::new();
    let push = |lines: &mut Vec<Matrix>, l: Matrix| -> Result<()> {
        for x in lines.iter() {
            if x.same_span(&l)? {
                return Ok(());
            }
        }
        lines.push(l);
        Ok(())
    };
    for s in m.shape().embeddings() {
        let back = m.transfer(s.i).inverse()?;
        for st in fil.steps(s) {
            if st.space.cols() == 1 {
                push(&mut lines, back.try_mul(&st.space)?)?;
            }
        }
    }
    let jump_lines = lines.clone();
    let n = jump_lines.len() as i64;
    let mut generic = None;
    let candidates = (0..=n + 1)
        .map(|c| Matrix::from_ints(&desc, &[&[1], &[c]]))
        .chain(std::iter::once(Matrix::from_ints(&desc, &[&[0], &[1]])));
    for cand in candidates {
        let mut fresh = true;
        for l in &jump_lines {
            if l.same_span(&cand)? {
                fresh = false;
                break;
            }
        }
        if fresh {
            generic = Some(cand);
            break;
        }
    }
    if let Some(g) = generic {
        push(&mut lines, g)?;
    }
    lines.iter().map(|l| Submodule::from_slot0(m, l)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::FieldElement;

    fn q3() -> Arc<LocalFieldDesc> {
        Arc::new(LocalFieldDesc::qp(3, 30).unwrap())
    }

    fn line(d: &Arc<LocalFieldDesc>, a: i64, b: i64) -> Matrix {
        Matrix::from_ints(d, &[&[a], &[b]])
    }

    fn two_step(d: &Arc<LocalFieldDesc>, lo: i64, hi: i64, l: Matrix) -> Vec<FlagStep> {
        vec![
            FlagStep {
                jump: lo,
                space: Matrix::identity(d, 2),
            },
            FlagStep { jump: hi, space: l },
        ]
    }

    #[test]
    fn hodge_numbers() {
        let d = q3();
        let shape = GaloisShape::new(1, 1).unwrap();
        let f = Filtration::new(shape, 2, vec![two_step(&d, 0, 1, line(&d, 1, 1))]).unwrap();
        assert_eq!(f.hodge_number(), 1);
        assert_eq!(Filtration::trivial(shape, &d, 3, 0).hodge_number(), 0);
        assert_eq!(f.dual().unwrap().hodge_number(), -1);
    }

    #[test]
    fn rejects_bad_flags() {
        let d = q3();
        let shape = GaloisShape::new(1, 1).unwrap();
        let bad = Filtration::new(shape, 2, vec![two_step(&d, 1, 1, line(&d, 1, 0))]);
        assert!(matches!(bad, Err(Error::InvalidFiltration(_))));
        let not_full = Filtration::new(
            shape,
            2,
            vec![vec![FlagStep {
                jump: 0,
                space: line(&d, 1, 0),
            }]],
        );
        assert!(matches!(not_full, Err(Error::InvalidFiltration(_))));
    }

    #[test]
    fn dual_line() {
        let d = q3();
        let shape = GaloisShape::new(1, 1).unwrap();
        let ell = FieldElement::from_int(&d, 7);
        let l =
            Matrix::from_rows(&d, vec![vec![FieldElement::one(&d)], vec![ell.clone()]]).unwrap();
        let f = Filtration::new(shape, 2, vec![two_step(&d, 0, 4, l)]).unwrap();
        let g = f.dual().unwrap();
        let s = shape.embedding(0);
        assert_eq!(g.jumps(s), vec![-4, 0]);
        // e1* - L e2* in the basis (e2*, e1*)
        let want = Matrix::from_rows(&d, vec![vec![-ell], vec![FieldElement::one(&d)]]).unwrap();
        assert!(g.steps(s)[1].space.same_span(&want).unwrap());
        assert!(g.dual().unwrap().same_as(&f).unwrap());
    }

    #[test]
    fn tensor_rank_one() {
        let d = q3();
        let shape = GaloisShape::new(1, 1).unwrap();
        let a = Filtration::trivial(shape, &d, 1, 2);
        let b = Filtration::trivial(shape, &d, 1, -5);
        let t = a.tensor(&b).unwrap();
        assert_eq!(t.jumps(shape.embedding(0)), vec![-3]);
    }
}
