//! The operator algebra `End_A(M)`.
//!
//! An A-linear operator on a fiberwise module is exactly a family of square
//! matrices, one per fiber, so `End_A(M)` is the block-diagonal algebra
//! `M_{n_1} + ... + M_{n_k}`. Every such operator has a blockwise adjoint,
//! hence `End_A(M)` and `End*_A(M)` coincide here, and so do the finite-rank
//! ideals built from `theta_{x,f}` and `theta_{x,y^}`. The trace functional
//! `phi` below therefore serves both the `End_A` and the `End*_A` statements.
//!
//! Canonical coordinates: the matrix units `E^(t)_pq`, fibers ascending and
//! `(p, q)` row-major inside each fiber.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calgebra::AlgebraElement;
use crate::dersolve::ConcreteAlgebra;
use crate::error::{Error, Result};
use crate::hilbmod::{riesz, Functional, ModuleElement, ModuleSpec};
use crate::linalg;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Operator {
    #[serde(with = "blocks_json")]
    blocks: Vec<DMatrix<Complex64>>,
}

mod blocks_json {
    use super::*;
    use crate::cjson::{matrix_from_rows, matrix_to_rows, Pair};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        b: &[DMatrix<Complex64>],
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        b.iter()
            .map(matrix_to_rows)
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<DMatrix<Complex64>>, D::Error> {
        let raw = Vec::<Vec<Vec<Pair>>>::deserialize(d)?;
        raw.iter()
            .map(|rows| {
                let m = matrix_from_rows(rows).map_err(serde::de::Error::custom)?;
                if m.nrows() != m.ncols() {
                    return Err(serde::de::Error::custom("operator blocks must be square"));
                }
                Ok(m)
            })
            .collect()
    }
}

impl Operator {
    pub fn from_blocks(blocks: Vec<DMatrix<Complex64>>) -> Self {
        Self { blocks }
    }

    pub fn identity(spec: &ModuleSpec) -> Self {
        Self::from_blocks(
            spec.fiber_dims()
                .iter()
                .map(|&n| DMatrix::identity(n, n))
                .collect(),
        )
    }

    pub fn zero(spec: &ModuleSpec) -> Self {
        Self::from_blocks(
            spec.fiber_dims()
                .iter()
                .map(|&n| DMatrix::zeros(n, n))
                .collect(),
        )
    }

    pub fn blocks(&self) -> &[DMatrix<Complex64>] {
        &self.blocks
    }

    pub fn block(&self, t: usize) -> &DMatrix<Complex64> {
        &self.blocks[t]
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(DMatrix::nrows).collect()
    }

    pub fn check(&self, spec: &ModuleSpec) -> Result<()> {
        if self.dims() != spec.fiber_dims() {
            return Err(Error::mismatch(spec.fiber_dims(), self.dims()));
        }
        Ok(())
    }

    pub fn try_apply(&self, x: &ModuleElement) -> Result<ModuleElement> {
        if self.dims() != x.dims() {
            return Err(Error::mismatch(self.dims(), x.dims()));
        }
        Ok(ModuleElement::from_fibers(
            self.blocks
                .iter()
                .zip(x.fibers())
                .map(|(b, v)| b * v)
                .collect(),
        ))
    }

    pub fn apply(&self, x: &ModuleElement) -> ModuleElement {
        self.try_apply(x)
            .expect("operator and module element with different fiber shapes")
    }

    pub fn scale(&self, lambda: Complex64) -> Self {
        Self::from_blocks(self.blocks.iter().map(|b| b * lambda).collect())
    }

    /// Frobenius norm over all blocks; used for residuals.
    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// The C*-norm: largest blockwise spectral norm.
    pub fn spectral_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.clone().singular_values().max())
            .fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }

    /// Coordinates in the canonical matrix-unit basis.
    pub fn to_coords(&self) -> DVector<Complex64> {
        let mut out = Vec::with_capacity(self.blocks.iter().map(|b| b.len()).sum());
        for b in &self.blocks {
            for p in 0..b.nrows() {
                for q in 0..b.ncols() {
                    out.push(b[(p, q)]);
                }
            }
        }
        DVector::from_vec(out)
    }

    pub fn from_coords(spec: &ModuleSpec, coords: &DVector<Complex64>) -> Result<Self> {
        if coords.len() != spec.operator_dim() {
            return Err(Error::mismatch(spec.operator_dim(), coords.len()));
        }
        let mut offset = 0;
        let mut blocks = Vec::with_capacity(spec.k());
        for &n in spec.fiber_dims() {
            blocks.push(DMatrix::from_fn(n, n, |p, q| coords[offset + p * n + q]));
            offset += n * n;
        }
        Ok(Self::from_blocks(blocks))
    }

    /// Canonical basis operators `E^(t)_pq` in coordinate order.
    pub fn basis(spec: &ModuleSpec) -> Vec<Self> {
        let d = spec.operator_dim();
        (0..d)
            .map(|i| {
                let mut c = DVector::zeros(d);
                c[i] = Complex64::new(1.0, 0.0);
                Self::from_coords(spec, &c).expect("dimension matches")
            })
            .collect()
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(&DMatrix<Complex64>, &DMatrix<Complex64>) -> DMatrix<Complex64>,
    ) -> Result<Self> {
        if self.dims() != other.dims() {
            return Err(Error::mismatch(self.dims(), other.dims()));
        }
        Ok(Self::from_blocks(
            self.blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        ))
    }
}

pub fn compose(a: &Operator, b: &Operator) -> Result<Operator> {
    a.zip_with(b, |x, y| x * y)
}

pub fn adjoint(a: &Operator) -> Operator {
    Operator::from_blocks(a.blocks.iter().map(|b| b.adjoint()).collect())
}

/// `AB - BA`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    a.zip_with(b, |x, y| x * y - y * x)
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: Self) -> Operator {
        self.zip_with(rhs, |a, b| a + b)
            .expect("operators with different block shapes")
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: Self) -> Operator {
        self.zip_with(rhs, |a, b| a - b)
            .expect("operators with different block shapes")
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: Self) -> Operator {
        compose(self, rhs).expect("operators with different block shapes")
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

/// `theta_{x,f} : y -> f(y) x`; block `t` is `x_t w_t^H` for `f = w^`.
pub fn theta(x: &ModuleElement, f: &Functional) -> Result<Operator> {
    let w = f.riesz();
    if x.dims() != w.dims() {
        return Err(Error::mismatch(x.dims(), w.dims()));
    }
    Ok(Operator::from_blocks(
        x.fibers()
            .iter()
            .zip(w.fibers())
            .map(|(u, v)| u * v.adjoint())
            .collect(),
    ))
}

/// `T_a : x -> a x`.
pub fn mult_op(spec: &ModuleSpec, a: &AlgebraElement) -> Result<Operator> {
    if a.len() != spec.k() {
        return Err(Error::mismatch(spec.k(), a.len()));
    }
    Ok(Operator::from_blocks(
        spec.fiber_dims()
            .iter()
            .zip(a.values())
            .map(|(&n, &s)| DMatrix::identity(n, n) * s)
            .collect(),
    ))
}

/// A formal sum `sum_i theta_{x_i, f_i}`, kept unassembled.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RankOneSum {
    pub terms: Vec<(ModuleElement, Functional)>,
}

impl RankOneSum {
    pub fn new(terms: Vec<(ModuleElement, Functional)>) -> Self {
        Self { terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, x: ModuleElement, f: Functional) {
        self.terms.push((x, f));
    }

    pub fn extend(&mut self, other: RankOneSum) {
        self.terms.extend(other.terms);
    }

    /// The matrix-unit expansion `A = sum A^(t)_pq theta_{e_tp, e_tq^}`, with
    /// each coefficient absorbed into the module element.
    pub fn canonical_expansion(spec: &ModuleSpec, a: &Operator) -> Result<Self> {
        a.check(spec)?;
        let mut terms = Vec::new();
        for (t, b) in a.blocks().iter().enumerate() {
            for p in 0..b.nrows() {
                for q in 0..b.ncols() {
                    let x = ModuleElement::basis_vector(spec, t, p).scale(b[(p, q)]);
                    terms.push((x, riesz(&ModuleElement::basis_vector(spec, t, q))));
                }
            }
        }
        Ok(Self::new(terms))
    }
}

pub fn assemble(spec: &ModuleSpec, s: &RankOneSum) -> Result<Operator> {
    let mut acc = Operator::zero(spec);
    for (x, f) in &s.terms {
        x.check(spec)?;
        f.riesz().check(spec)?;
        acc = &acc + &theta(x, f)?;
    }
    Ok(acc)
}

/// Basis of the commutant of `End_A(M)`, from the nullspace of `Z -> [Z, E]`
/// stacked over all matrix units `E`.
pub fn centralizer_basis(spec: &ModuleSpec) -> Result<Vec<Operator>> {
    let alg = structure_constants(spec);
    let d = alg.dim();
    let mut constraints = DMatrix::zeros(d * d, d);
    for i in 0..d {
        for j in 0..d {
            for m in 0..d {
                // column j: coordinates of [e_j, e_i]
                constraints[(i * d + m, j)] = alg.constant(j, i, m) - alg.constant(i, j, m);
            }
        }
    }
    let ns = linalg::nullspace(&constraints, linalg::DEFAULT_RANK_TOL)?;
    ns.basis
        .iter()
        .map(|v| Operator::from_coords(spec, v))
        .collect()
}

/// `a = sum_i <A x_i, x_i>`; for central `A` this gives `A = T_a`.
pub fn center_coefficient(a: &Operator, frame: &[ModuleElement]) -> Result<AlgebraElement> {
    let first = frame
        .first()
        .ok_or_else(|| Error::InvalidConfig("empty frame".into()))?;
    let mut acc = AlgebraElement::zero(crate::calgebra::PointSpace::new(first.fibers().len())?);
    for x in frame {
        acc = acc.try_add(&crate::hilbmod::inner(&a.try_apply(x)?, x)?)?;
    }
    Ok(acc)
}

/// For nonzero `A`, an operator `B` with `ABA != 0`.
///
/// Takes the basis vector `x` maximizing `|Ax|` and returns `theta_{x,(Ax)^}`,
/// for which `ABAx = <Ax, Ax> Ax`.
pub fn semiprime_witness(a: &Operator, tol: f64) -> Result<Operator> {
    let norm = a.spectral_norm();
    if norm <= tol {
        return Err(Error::ZeroOperator { norm });
    }
    let dims = a.dims();
    let spec = ModuleSpec::new(dims)?;
    let (x, ax) = ModuleElement::basis(&spec)
        .into_iter()
        .map(|x| {
            let ax = a.apply(&x);
            (x, ax)
        })
        .max_by(|p, q| {
            crate::hilbmod::module_norm(&p.1).total_cmp(&crate::hilbmod::module_norm(&q.1))
        })
        .expect("nonempty module basis");
    theta(&x, &riesz(&ax))
}

/// `phi(sum theta_{x_i,f_i}) = sum f_i(x_i)`; the empty sum gives zero.
///
/// On assembled operators this equals the pointwise block trace, which is
/// what makes it well defined on `End_A(M)`.
pub fn phi(spec: &ModuleSpec, s: &RankOneSum) -> Result<AlgebraElement> {
    let mut acc = AlgebraElement::zero(spec.space());
    for (x, f) in &s.terms {
        x.check(spec)?;
        acc = acc.try_add(&f.apply(x)?)?;
    }
    Ok(acc)
}

/// Pointwise trace of the blocks.
pub fn fiber_trace(a: &Operator) -> AlgebraElement {
    AlgebraElement::from_values(a.blocks().iter().map(|b| b.trace()).collect())
}

/// `Lambda = (f_j(x_i))_{ij}` with entries in `C(S)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LambdaMatrix {
    entries: Vec<Vec<AlgebraElement>>,
}

impl LambdaMatrix {
    pub fn entries(&self) -> &[Vec<AlgebraElement>] {
        &self.entries
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    /// The complex matrix `Lambda(t)`.
    pub fn at_point(&self, t: usize) -> DMatrix<Complex64> {
        let n = self.size();
        DMatrix::from_fn(n, n, |i, j| self.entries[i][j].values()[t])
    }

    pub fn square(&self) -> Self {
        let n = self.size();
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n).fold(
                            AlgebraElement::zero(self.entries[i][j].space()),
                            |acc, l| &acc + &(&self.entries[i][l] * &self.entries[l][j]),
                        )
                    })
                    .collect()
            })
            .collect();
        Self { entries }
    }

    pub fn trace(&self) -> Option<AlgebraElement> {
        let first = self.entries.first()?.first()?;
        Some(
            (0..self.size()).fold(AlgebraElement::zero(first.space()), |acc, i| {
                &acc + &self.entries[i][i]
            }),
        )
    }

    /// Largest entry modulus over all points.
    pub fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(AlgebraElement::sup_norm)
            .fold(0.0, f64::max)
    }
}

pub fn lambda_matrix(s: &RankOneSum) -> Result<LambdaMatrix> {
    let entries = s
        .terms
        .iter()
        .map(|(xi, _)| {
            s.terms
                .iter()
                .map(|(_, fj)| fj.apply(xi))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LambdaMatrix { entries })
}

/// Structure constants of the block algebra in the canonical matrix-unit basis:
/// `E^(t)_pq E^(t)_rs = delta_qr E^(t)_ps`, distinct fibers multiply to zero.
pub fn structure_constants(spec: &ModuleSpec) -> ConcreteAlgebra {
    let d = spec.operator_dim();
    let mut entries = Vec::new();
    let mut unit = DVector::zeros(d);
    let mut offset = 0;
    let one = Complex64::new(1.0, 0.0);
    for &n in spec.fiber_dims() {
        let idx = |p: usize, q: usize| offset + p * n + q;
        for p in 0..n {
            unit[idx(p, p)] = one;
            for q in 0..n {
                for s in 0..n {
                    entries.push((idx(p, q), idx(q, s), idx(p, s), one));
                }
            }
        }
        offset += n * n;
    }
    ConcreteAlgebra::from_sparse(d, &entries, unit)
}
