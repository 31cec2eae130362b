use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::eigen::{self, Roots};
use super::PhiNModule;

/// A sub-`L (x) K0`-module, given by a basis of each slot (columns).
/// Slot ranks are equal: `phi` is bijective and cycles the slots.
#[derive(Clone, Debug)]
pub struct Submodule {
    rank: usize,
    bases: Vec<Matrix>,
}

impl Submodule {
    pub fn new(bases: Vec<Matrix>) -> Result<Self> {
        let bases = bases
            .iter()
            .map(|b| b.column_space())
            .collect::<Result<Vec<_>>>()?;
        let rank = bases.first().map_or(0, |b| b.cols());
        if bases.iter().any(|b| b.cols() != rank) {
            return Err(Error::ShapeMismatch("submodule slot ranks differ".into()));
        }
        Ok(Submodule { rank, bases })
    }

    /// The phi-orbit of a slot-0 subspace: `S_i = phi_{i-1} ... phi_0 S_0`.
    pub fn from_slot0(m: &PhiNModule, s0: &Matrix) -> Result<Self> {
        let bases = (0..m.shape().f())
            .map(|i| m.transfer(i).try_mul(s0))
            .collect::<Result<Vec<_>>>()?;
        Self::new(bases)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn bases(&self) -> &[Matrix] {
        &self.bases
    }

    pub fn basis(&self, slot: usize) -> &Matrix {
        &self.bases[slot]
    }

    /// Same subspace at every slot.
    pub fn same_as(&self, other: &Submodule) -> Result<bool> {
        if self.rank != other.rank || self.bases.len() != other.bases.len() {
            return Ok(false);
        }
        for (a, b) in self.bases.iter().zip(&other.bases) {
            if !a.same_span(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Result of submodule enumeration.
#[derive(Clone, Debug)]
pub enum SubmoduleSet {
    Finite(Vec<Submodule>),
    /// Rank 2, scalar `phi^f` and `N = 0`: every line is a submodule.
    LineFamily,
}

/// Phi-stable subspaces of slot 0 are sums of the primary components of
/// `phi^f` (eigenlines, plus the kernel of the irreducible cofactor); the
/// N-stable ones are propagated to every slot.
pub(crate) fn enumerate(m: &PhiNModule) -> Result<SubmoduleSet> {
    let d = m.rank();
    if d > 3 {
        return Err(Error::UnsupportedEnumeration(format!("rank {d} > 3")));
    }
    if d == 1 {
        return Ok(SubmoduleSet::Finite(Vec::new()));
    }
    let f = m.frobenius_f();
    let n0 = &m.n()[0];
    let desc = m.desc().clone();
    let atoms: Vec<Matrix> = match eigen::roots(&eigen::charpoly(&f)?)? {
        Roots::Double(lambda) => {
            let g = f.try_sub(&Matrix::scalar(&desc, d, &lambda))?;
            if g.decide_zero()? {
                if n0.decide_zero()? {
                    return Ok(SubmoduleSet::LineFamily);
                }
                // every line is phi-stable; only ker N is N-stable
                let line = n0.kernel()?;
                return Ok(SubmoduleSet::Finite(vec![Submodule::from_slot0(m, &line)?]));
            }
            vec![g.kernel()?]
        }
        Roots::Distinct { roots, rest } => {
            let mut atoms = Vec::new();
            for lambda in &roots {
                let k = f.try_sub(&Matrix::scalar(&desc, d, lambda))?.kernel()?;
                if k.cols() != 1 {
                    return Err(Error::PrecisionLoss("eigenspace dimension is not 1".into()));
                }
                atoms.push(k);
            }
            if rest.len() > 1 {
                atoms.push(poly_at(&rest, &f)?.kernel()?);
            }
            atoms
        }
    };
    let mut found: Vec<(usize, usize, Matrix)> = Vec::new();
    for mask in 1usize..(1 << atoms.len()) {
        let mut s = Matrix::zeros(&desc, d, 0);
        for (k, a) in atoms.iter().enumerate() {
            if mask & (1 << k) != 0 {
                s = s.hstack(a)?;
            }
        }
        if s.cols() == 0 || s.cols() >= d {
            continue;
        }
        if s.spans(&n0.try_mul(&s)?)? {
            found.push((s.cols(), mask, s));
        }
    }
    found.sort_by_key(|(r, mask, _)| (*r, *mask));
    let subs = found
        .into_iter()
        .map(|(_, _, s)| Submodule::from_slot0(m, &s))
        .collect::<Result<Vec<_>>>()?;
    Ok(SubmoduleSet::Finite(subs))
}

/// `sum_k c_k A^k`.
fn poly_at(coeffs: &[crate::padic::FieldElement], a: &Matrix) -> Result<Matrix> {
    let desc = a.desc();
    let mut acc = Matrix::zeros(desc, a.rows(), a.cols());
    let mut power = Matrix::identity(desc, a.rows());
    for c in coeffs {
        acc = acc.try_add(&power.scale(c))?;
        power = power.try_mul(a)?;
    }
    Ok(acc)
}
