//! (phi, N)-modules over `L (x) K0`, stored slotwise.
//!
//! Slot `i` holds the coordinate copy `D^(i)` of the module. `phi[i]` is the
//! matrix of `phi : D^(i) -> D^(i+1 mod f)` (columns are images of basis
//! vectors) and `n[i]` is the matrix of `N` on `D^(i)`.

mod eigen;
mod iso;
mod submodules;

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coeff::GaloisShape;
use crate::error::{Error, Result};
use crate::filtration::Filtration;
use crate::linalg::Matrix;
use crate::padic::{FieldElement, LocalFieldDesc, Rational};

pub use iso::is_isomorphic;
pub use submodules::{Submodule, SubmoduleSet};

/// Eigenvalues in `L` of a matrix of size at most 3, when all of them lie in
/// `L` and are pairwise distinct; `None` otherwise.
pub fn eigenvalues(a: &Matrix) -> Result<Option<Vec<FieldElement>>> {
    match eigen::roots(&eigen::charpoly(a)?)? {
        eigen::Roots::Distinct { roots, rest } if rest.len() == 1 => Ok(Some(roots)),
        _ => Ok(None),
    }
}

#[derive(Clone, Debug)]
pub struct PhiNModule {
    shape: GaloisShape,
    rank: usize,
    phi: Vec<Matrix>,
    n: Vec<Matrix>,
}

impl PhiNModule {
    /// Structural checks only (slot count, square sizes, one field); see
    /// [`PhiNModule::validate`] for the defining relations.
    pub fn new(shape: GaloisShape, phi: Vec<Matrix>, n: Vec<Matrix>) -> Result<Self> {
        let f = shape.f();
        if phi.len() != f || n.len() != f {
            return Err(Error::ShapeMismatch(format!(
                "expected {f} phi and N matrices, got {} and {}",
                phi.len(),
                n.len()
            )));
        }
        let rank = phi[0].rows();
        if rank == 0 {
            return Err(Error::ShapeMismatch("rank must be positive".into()));
        }
        let desc = phi[0].desc().clone();
        for (i, m) in phi.iter().chain(n.iter()).enumerate() {
            if m.rows() != rank || m.cols() != rank {
                return Err(Error::ShapeMismatch(format!(
                    "matrix {} is {}x{}, expected {rank}x{rank}",
                    i % f,
                    m.rows(),
                    m.cols()
                )));
            }
            if **m.desc() != *desc {
                return Err(Error::FieldMismatch);
            }
        }
        Ok(PhiNModule {
            shape,
            rank,
            phi,
            n,
        })
    }

    /// Module with `phi` scalar on every slot, `phi_i = scalars[i] * I`, and `N = 0`.
    pub fn scalar(shape: GaloisShape, rank: usize, scalars: &[FieldElement]) -> Result<Self> {
        let desc = scalars
            .first()
            .ok_or_else(|| Error::ShapeMismatch("no slot scalars".into()))?
            .desc()
            .clone();
        let phi = scalars
            .iter()
            .map(|s| Matrix::scalar(&desc, rank, s))
            .collect();
        let n = vec![Matrix::zeros(&desc, rank, rank); scalars.len()];
        Self::new(shape, phi, n)
    }

    pub fn shape(&self) -> GaloisShape {
        self.shape
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn desc(&self) -> &Arc<LocalFieldDesc> {
        self.phi[0].desc()
    }

    pub fn phi(&self) -> &[Matrix] {
        &self.phi
    }

    pub fn n(&self) -> &[Matrix] {
        &self.n
    }

    fn next(&self, i: usize) -> usize {
        (i + 1) % self.shape.f()
    }

    /// Checks `N_{i+1} phi_i = p phi_i N_i`, invertibility of every `phi_i`,
    /// and nilpotence of every `N_i`.
    pub fn validate(&self) -> Result<()> {
        let desc = self.desc().clone();
        let p = FieldElement::from_int(&desc, self.desc().p() as i64);
        for i in 0..self.shape.f() {
            let lhs = self.n[self.next(i)].try_mul(&self.phi[i])?;
            let rhs = self.phi[i].try_mul(&self.n[i])?.scale(&p);
            if !lhs.decide_eq(&rhs)? {
                return Err(Error::RelationViolation { slot: i });
            }
        }
        for i in 0..self.shape.f() {
            if self.phi[i].det()?.decide_zero()? {
                return Err(Error::NonInvertiblePhi { slot: i });
            }
        }
        for i in 0..self.shape.f() {
            if !self.n[i].pow(self.rank as u32).decide_zero()? {
                return Err(Error::NonNilpotent { slot: i });
            }
        }
        Ok(())
    }

    /// `phi_{f-1} ... phi_0`: the linear action of `phi^f` on `D^(0)`.
    pub fn frobenius_f(&self) -> Matrix {
        self.transfer(self.shape.f())
    }

    /// `phi_{k-1} ... phi_0 : D^(0) -> D^(k)`.
    pub(crate) fn transfer(&self, k: usize) -> Matrix {
        let mut m = Matrix::identity(self.desc(), self.rank);
        for i in 0..k {
            m = self.phi[i].try_mul(&m).expect("square");
        }
        m
    }

    /// `t_N = e * v_p(det phi^f)`.
    pub fn newton_number(&self) -> Result<Rational> {
        let v = self.frobenius_f().det()?.nonzero_valuation()?;
        Ok(v * Rational::from_integer(self.shape.e() as i64))
    }

    fn check_pair(&self, other: &PhiNModule) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(
                "modules over different Galois shapes".into(),
            ));
        }
        if **self.desc() != **other.desc() {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    /// `phi* = (phi^-1)^T`, `N* = -N^T` in the dual basis.
    pub fn dual(&self) -> Result<PhiNModule> {
        let phi = self
            .phi
            .iter()
            .enumerate()
            .map(|(i, m)| {
                m.inverse()
                    .map(|x| x.transpose())
                    .map_err(|_| Error::NonInvertiblePhi { slot: i })
            })
            .collect::<Result<Vec<_>>>()?;
        let n = self.n.iter().map(|m| m.transpose().map(|x| -x)).collect();
        PhiNModule::new(self.shape, phi, n)
    }

    /// Slotwise Kronecker product; basis index `(a, b) -> a * rank(other) + b`.
    pub fn tensor(&self, other: &PhiNModule) -> Result<PhiNModule> {
        self.check_pair(other)?;
        let desc = self.desc();
        let (i1, i2) = (
            Matrix::identity(desc, self.rank),
            Matrix::identity(desc, other.rank),
        );
        let phi = self
            .phi
            .iter()
            .zip(&other.phi)
            .map(|(a, b)| a.kron(b))
            .collect();
        let n = self
            .n
            .iter()
            .zip(&other.n)
            .map(|(a, b)| a.kron(&i2).try_add(&i1.kron(b)))
            .collect::<Result<Vec<_>>>()?;
        PhiNModule::new(self.shape, phi, n)
    }

    /// `Hom(self, other) = self* (x) other`. Basis vector `(a, b)` is
    /// `e_a* (x) e_b`, the map sending `e_a` to `e_b` (matrix unit `E_{b,a}`).
    pub fn hom(&self, other: &PhiNModule) -> Result<PhiNModule> {
        self.dual()?.tensor(other)
    }

    /// Direct sum, block diagonal.
    pub fn direct_sum(&self, other: &PhiNModule) -> Result<PhiNModule> {
        self.check_pair(other)?;
        let block = |a: &Matrix, b: &Matrix| {
            let (r1, r2) = (a.rows(), b.rows());
            let mut m = Matrix::zeros(a.desc(), r1 + r2, r1 + r2);
            for i in 0..r1 {
                for j in 0..r1 {
                    m.set(i, j, a.get(i, j).clone());
                }
            }
            for i in 0..r2 {
                for j in 0..r2 {
                    m.set(r1 + i, r1 + j, b.get(i, j).clone());
                }
            }
            m
        };
        let phi = self
            .phi
            .iter()
            .zip(&other.phi)
            .map(|(a, b)| block(a, b))
            .collect();
        let n = self
            .n
            .iter()
            .zip(&other.n)
            .map(|(a, b)| block(a, b))
            .collect();
        PhiNModule::new(self.shape, phi, n)
    }

    /// Basis of the trace-zero part of `End(D) = Hom(D, D)`, as vectors in the
    /// `(a, b)` indexing of [`PhiNModule::hom`].
    ///
    /// For rank 2 the basis is `E_{01}, (E_{11} - E_{00})/2, -E_{10}`: with the
    /// basis order `(e2, e1)` of the monodromy modules these are
    /// `e2 (x) e1*`, `(e1 (x) e1* - e2 (x) e2*)/2` and `-e1 (x) e2*`.
    pub fn end0_basis(&self) -> Matrix {
        let d = self.rank;
        let desc = self.desc();
        // matrix unit E_{row,col} is the map e_col -> e_row, vector index col * d + row
        let unit = |row: usize, col: usize| col * d + row;
        let mut cols: Vec<Vec<FieldElement>> = Vec::new();
        let zero = || vec![FieldElement::zero(desc); d * d];
        if d == 2 {
            let half = FieldElement::from_rational(
                desc,
                &num_rational::BigRational::new(1.into(), 2.into()),
            );
            let mut f1 = zero();
            f1[unit(0, 1)] = FieldElement::one(desc);
            let mut f2 = zero();
            f2[unit(1, 1)] = half.clone();
            f2[unit(0, 0)] = -&half;
            let mut f3 = zero();
            f3[unit(1, 0)] = -FieldElement::one(desc);
            cols = vec![f1, f2, f3];
        } else {
            for r in 0..d {
                for c in 0..d {
                    if r != c {
                        let mut v = zero();
                        v[unit(r, c)] = FieldElement::one(desc);
                        cols.push(v);
                    }
                }
            }
            for i in 0..d.saturating_sub(1) {
                let mut v = zero();
                v[unit(i, i)] = FieldElement::one(desc);
                v[unit(i + 1, i + 1)] = -FieldElement::one(desc);
                cols.push(v);
            }
        }
        Matrix::from_columns(desc, d * d, &cols).expect("consistent lengths")
    }

    /// Trace-zero endomorphisms `End0(D)`, in the basis of [`PhiNModule::end0_basis`].
    pub fn end0(&self) -> Result<PhiNModule> {
        let hom = self.hom(self)?;
        let basis = self.end0_basis();
        let sub = Submodule::new(vec![basis; self.shape.f()])?;
        hom.restrict(&sub)
    }

    /// The module structure on a phi- and N-stable submodule, in the
    /// coordinates of its slot bases.
    pub fn restrict(&self, sub: &Submodule) -> Result<PhiNModule> {
        if sub.bases().len() != self.shape.f() {
            return Err(Error::ShapeMismatch("submodule slot count".into()));
        }
        if sub.rank() == 0 {
            return Err(Error::ShapeMismatch(
                "restriction to the zero submodule".into(),
            ));
        }
        let mut phi = Vec::new();
        let mut n = Vec::new();
        for i in 0..self.shape.f() {
            let s = &sub.bases()[i];
            let image = self.phi[i].try_mul(s)?;
            let x = sub.bases()[self.next(i)].solve(&image)?.ok_or_else(|| {
                Error::ShapeMismatch(format!("submodule is not phi-stable at slot {i}"))
            })?;
            phi.push(x);
            let image = self.n[i].try_mul(s)?;
            let y = s.solve(&image)?.ok_or_else(|| {
                Error::ShapeMismatch(format!("submodule is not N-stable at slot {i}"))
            })?;
            n.push(y);
        }
        PhiNModule::new(self.shape, phi, n)
    }

    /// Change of basis: the new basis of `D^(i)` is given by the columns of
    /// `c[i]`. Returns `phi'_i = c_{i+1}^-1 phi_i c_i`, `N'_i = c_i^-1 N_i c_i`
    /// and the filtration rewritten in the new coordinates.
    pub fn transport(&self, fil: &Filtration, c: &[Matrix]) -> Result<(PhiNModule, Filtration)> {
        if c.len() != self.shape.f() {
            return Err(Error::ShapeMismatch("one basis change per slot".into()));
        }
        let inv = c.iter().map(|m| m.inverse()).collect::<Result<Vec<_>>>()?;
        let mut phi = Vec::new();
        let mut n = Vec::new();
        for i in 0..self.shape.f() {
            phi.push(inv[self.next(i)].try_mul(&self.phi[i])?.try_mul(&c[i])?);
            n.push(inv[i].try_mul(&self.n[i])?.try_mul(&c[i])?);
        }
        let m = PhiNModule::new(self.shape, phi, n)?;
        let f = fil.map_subspaces(|slot, v| inv[slot].try_mul(v))?;
        Ok((m, f))
    }

    /// Random integral basis changes with unit determinant.
    pub fn random_basis_change<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Matrix> {
        let desc = self.desc().clone();
        (0..self.shape.f())
            .map(|_| loop {
                let rows: Vec<Vec<FieldElement>> = (0..self.rank)
                    .map(|_| {
                        (0..self.rank)
                            .map(|_| FieldElement::from_int(&desc, rng.gen_range(-3..=3)))
                            .collect()
                    })
                    .collect();
                let m = Matrix::from_rows(&desc, rows).expect("square");
                if m.det().is_ok_and(|d| d.is_unit()) {
                    break m;
                }
            })
            .collect()
    }

    /// [`PhiNModule::transport`] along a seeded random basis change.
    pub fn random_transport(
        &self,
        fil: &Filtration,
        seed: u64,
    ) -> Result<(PhiNModule, Filtration)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = self.random_basis_change(&mut rng);
        self.transport(fil, &c)
    }

    /// `ker N subset ker N^2 subset ... subset D`, each as a submodule.
    pub fn n_kernel_flag(&self) -> Result<Vec<Submodule>> {
        let mut flag = Vec::new();
        for k in 1..=self.rank {
            let bases = self
                .n
                .iter()
                .map(|m| m.pow(k as u32).kernel())
                .collect::<Result<Vec<_>>>()?;
            let sub = Submodule::new(bases)?;
            if !self.is_stable(&sub)? {
                return Err(Error::RelationViolation { slot: 0 });
            }
            let full = sub.rank() == self.rank;
            flag.push(sub);
            if full {
                break;
            }
        }
        Ok(flag)
    }

    /// Whether a family of slot subspaces is phi- and N-stable.
    pub fn is_stable(&self, sub: &Submodule) -> Result<bool> {
        for i in 0..self.shape.f() {
            let s = &sub.bases()[i];
            if !sub.bases()[self.next(i)].spans(&self.phi[i].try_mul(s)?)?
                || !s.spans(&self.n[i].try_mul(s)?)?
            {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Every phi- and N-stable proper nonzero submodule.
    pub fn enumerate_submodules(&self) -> Result<SubmoduleSet> {
        submodules::enumerate(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::GaloisShape;

    fn q5() -> Arc<LocalFieldDesc> {
        Arc::new(LocalFieldDesc::qp(5, 40).unwrap())
    }

    fn int(d: &Arc<LocalFieldDesc>, x: i64) -> FieldElement {
        FieldElement::from_int(d, x)
    }

    #[test]
    fn rank_one_example() {
        let d = q5();
        let shape = GaloisShape::new(2, 3).unwrap();
        let m = PhiNModule::scalar(shape, 1, &[int(&d, 5), int(&d, 1), int(&d, 1)]).unwrap();
        m.validate().unwrap();
        assert!(m
            .frobenius_f()
            .decide_eq(&Matrix::from_ints(&d, &[&[5]]))
            .unwrap());
        assert_eq!(m.newton_number().unwrap(), Rational::from_integer(2));
    }

    #[test]
    fn relation_without_p_fails() {
        let d = q5();
        let shape = GaloisShape::new(1, 1).unwrap();
        let phi = Matrix::from_ints(&d, &[&[3, 0], &[0, 3]]);
        let n = Matrix::from_ints(&d, &[&[0, 1], &[0, 0]]);
        let m = PhiNModule::new(shape, vec![phi], vec![n]).unwrap();
        assert_eq!(
            m.validate().unwrap_err(),
            Error::RelationViolation { slot: 0 }
        );
        let bad = PhiNModule::new(
            shape,
            vec![Matrix::identity(&d, 1)],
            vec![Matrix::from_ints(&d, &[&[1]])],
        )
        .unwrap();
        assert!(matches!(
            bad.validate(),
            Err(Error::RelationViolation { .. } | Error::NonNilpotent { .. })
        ));
        let sing = PhiNModule::new(
            shape,
            vec![Matrix::from_ints(&d, &[&[1, 2], &[2, 4]])],
            vec![Matrix::zeros(&d, 2, 2)],
        )
        .unwrap();
        assert_eq!(
            sing.validate().unwrap_err(),
            Error::NonInvertiblePhi { slot: 0 }
        );
    }

    #[test]
    fn dual_and_tensor_newton() {
        let d = q5();
        let shape = GaloisShape::new(2, 2).unwrap();
        let a = PhiNModule::new(
            shape,
            vec![
                Matrix::from_ints(&d, &[&[25, 1], &[0, 1]]),
                Matrix::from_ints(&d, &[&[1, 0], &[3, 5]]),
            ],
            vec![Matrix::zeros(&d, 2, 2), Matrix::zeros(&d, 2, 2)],
        )
        .unwrap();
        a.validate().unwrap();
        let ta = a.newton_number().unwrap();
        assert_eq!(ta, Rational::from_integer(6));
        assert_eq!(a.dual().unwrap().newton_number().unwrap(), -ta);
        let b = PhiNModule::scalar(shape, 1, &[int(&d, 5), int(&d, 1)]).unwrap();
        let t = a.tensor(&b).unwrap();
        t.validate().unwrap();
        assert_eq!(
            t.newton_number().unwrap(),
            ta + Rational::from_integer(2 * 2)
        );
    }
}
