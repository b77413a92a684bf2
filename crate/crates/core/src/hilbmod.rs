//! Full Hilbert modules over `C(S)`.
//!
//! A module is a family of finite-dimensional inner-product spaces, one fiber
//! `C^{n_t}` per point `t`. The algebra acts by scaling fiber `t` with `a(t)`
//! and the algebra-valued inner product is the family of fiber inner products.
//! Fullness (`<M, M> = A`) holds exactly when every fiber is nonzero.
//!
//! Inner products are linear in the first slot: `<x, y>(t) = sum_j x_tj conj(y_tj)`.
//! Functionals are stored by their Riesz vector `w`, acting as `f(y) = <y, w>`;
//! in finite fibers every bounded A-linear functional has this form.

use std::ops::{Add, Sub};

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calgebra::{self, AlgebraElement, PointSpace};
use crate::error::{Error, Result};
use crate::opalg::Operator;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct ModuleSpec {
    space: PointSpace,
    fiber_dims: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    fibers: Vec<usize>,
}

impl TryFrom<RawSpec> for ModuleSpec {
    type Error = Error;
    fn try_from(raw: RawSpec) -> Result<Self> {
        ModuleSpec::new(raw.fibers)
    }
}

impl From<ModuleSpec> for RawSpec {
    fn from(spec: ModuleSpec) -> Self {
        RawSpec {
            fibers: spec.fiber_dims,
        }
    }
}

impl ModuleSpec {
    pub fn new(fiber_dims: Vec<usize>) -> Result<Self> {
        if fiber_dims.is_empty() {
            return Err(Error::InvalidConfig("fiber list must be nonempty".into()));
        }
        if let Some(t) = fiber_dims.iter().position(|&n| n == 0) {
            return Err(Error::InvalidConfig(format!(
                "fiber {t} has dimension 0; the module would not be full \
                 (<M,M> would vanish at that point)"
            )));
        }
        let space = PointSpace::new(fiber_dims.len())?;
        Ok(Self { space, fiber_dims })
    }

    pub fn space(&self) -> PointSpace {
        self.space
    }

    pub fn k(&self) -> usize {
        self.space.k()
    }

    pub fn fiber_dims(&self) -> &[usize] {
        &self.fiber_dims
    }

    /// Dimension of the operator algebra, `sum n_t^2`.
    pub fn operator_dim(&self) -> usize {
        self.fiber_dims.iter().map(|n| n * n).sum()
    }

    /// Complex dimension of the module, `sum n_t`.
    pub fn module_dim(&self) -> usize {
        self.fiber_dims.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModuleElement {
    #[serde(with = "fibers_json")]
    fibers: Vec<DVector<Complex64>>,
}

mod fibers_json {
    use super::*;
    use crate::cjson::{from_pairs, to_pairs, Pair};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        f: &[DVector<Complex64>],
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        f.iter()
            .map(|v| to_pairs(v.iter()))
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<DVector<Complex64>>, D::Error> {
        let raw = Vec::<Vec<Pair>>::deserialize(d)?;
        Ok(raw
            .iter()
            .map(|p| DVector::from_vec(from_pairs(p)))
            .collect())
    }
}

impl ModuleElement {
    pub fn from_fibers(fibers: Vec<DVector<Complex64>>) -> Self {
        Self { fibers }
    }

    pub fn zero(spec: &ModuleSpec) -> Self {
        Self::from_fibers(
            spec.fiber_dims()
                .iter()
                .map(|&n| DVector::zeros(n))
                .collect(),
        )
    }

    /// The element with `e_j` in fiber `t` and zeros elsewhere.
    pub fn basis_vector(spec: &ModuleSpec, t: usize, j: usize) -> Self {
        let mut x = Self::zero(spec);
        x.fibers[t][j] = Complex64::new(1.0, 0.0);
        x
    }

    /// All basis vectors, fibers ascending then index ascending.
    pub fn basis(spec: &ModuleSpec) -> Vec<Self> {
        spec.fiber_dims()
            .iter()
            .enumerate()
            .flat_map(|(t, &n)| (0..n).map(move |j| (t, j)))
            .map(|(t, j)| Self::basis_vector(spec, t, j))
            .collect()
    }

    pub fn fibers(&self) -> &[DVector<Complex64>] {
        &self.fibers
    }

    pub fn fiber(&self, t: usize) -> &DVector<Complex64> {
        &self.fibers[t]
    }

    pub fn dims(&self) -> Vec<usize> {
        self.fibers.iter().map(DVector::len).collect()
    }

    pub fn check(&self, spec: &ModuleSpec) -> Result<()> {
        if self.dims() != spec.fiber_dims() {
            return Err(Error::mismatch(spec.fiber_dims(), self.dims()));
        }
        Ok(())
    }

    pub fn scale(&self, lambda: Complex64) -> Self {
        Self::from_fibers(self.fibers.iter().map(|v| v * lambda).collect())
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(&DVector<Complex64>, &DVector<Complex64>) -> DVector<Complex64>,
    ) -> Result<Self> {
        if self.dims() != other.dims() {
            return Err(Error::mismatch(self.dims(), other.dims()));
        }
        Ok(Self::from_fibers(
            self.fibers
                .iter()
                .zip(&other.fibers)
                .map(|(a, b)| f(a, b))
                .collect(),
        ))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        module_norm(&(self - other))
    }
}

impl Add for &ModuleElement {
    type Output = ModuleElement;
    fn add(self, rhs: Self) -> ModuleElement {
        self.try_add(rhs)
            .expect("module elements with different fiber shapes")
    }
}

impl Sub for &ModuleElement {
    type Output = ModuleElement;
    fn sub(self, rhs: Self) -> ModuleElement {
        self.try_sub(rhs)
            .expect("module elements with different fiber shapes")
    }
}

/// A bounded A-linear functional `y -> <y, w>`, stored by its Riesz vector `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Functional {
    riesz: ModuleElement,
}

impl Functional {
    pub fn new(riesz: ModuleElement) -> Self {
        Self { riesz }
    }

    pub fn riesz(&self) -> &ModuleElement {
        &self.riesz
    }

    pub fn apply(&self, y: &ModuleElement) -> Result<AlgebraElement> {
        inner(y, &self.riesz)
    }

    /// The functional `f o A`, built from its values on the module basis.
    ///
    /// `(f o A)(e_tj) = <A e_tj, w>` is the `j`-th coordinate of the Riesz
    /// vector conjugated, which recovers the vector without using `A*`.
    pub fn precompose(&self, a: &Operator) -> Result<Self> {
        let dims = self.riesz.dims();
        let mut fibers = Vec::with_capacity(dims.len());
        for (t, &n) in dims.iter().enumerate() {
            let mut w = DVector::zeros(n);
            for j in 0..n {
                let mut e =
                    ModuleElement::from_fibers(dims.iter().map(|&m| DVector::zeros(m)).collect());
                e.fibers[t][j] = Complex64::new(1.0, 0.0);
                let value = self.apply(&a.try_apply(&e)?)?;
                w[j] = value.values()[t].conj();
            }
            fibers.push(w);
        }
        Ok(Self::new(ModuleElement::from_fibers(fibers)))
    }

    /// The functional `a f : y -> a f(y)`, whose Riesz vector is `a* w`.
    pub fn scale_by(&self, a: &AlgebraElement) -> Result<Self> {
        Ok(Self::new(act(&calgebra::star(a), &self.riesz)?))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        Ok(Self::new(self.riesz.try_sub(&other.riesz)?))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        Ok(Self::new(self.riesz.try_add(&other.riesz)?))
    }
}

pub fn inner(x: &ModuleElement, y: &ModuleElement) -> Result<AlgebraElement> {
    if x.dims() != y.dims() {
        return Err(Error::mismatch(x.dims(), y.dims()));
    }
    Ok(AlgebraElement::from_values(
        x.fibers
            .iter()
            .zip(&y.fibers)
            .map(|(u, v)| v.dotc(u))
            .collect(),
    ))
}

pub fn act(a: &AlgebraElement, x: &ModuleElement) -> Result<ModuleElement> {
    if a.len() != x.fibers.len() {
        return Err(Error::mismatch(x.fibers.len(), a.len()));
    }
    Ok(ModuleElement::from_fibers(
        x.fibers
            .iter()
            .zip(a.values())
            .map(|(v, s)| v * *s)
            .collect(),
    ))
}

/// `|x| = |<x, x>|^{1/2}`: the largest Euclidean fiber norm.
pub fn module_norm(x: &ModuleElement) -> f64 {
    x.fibers.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// The functional `x^ : y -> <y, x>`.
pub fn riesz(x: &ModuleElement) -> Functional {
    Functional::new(x.clone())
}

/// A finite frame `{x_i}` with `sum <x_i, x_i> = e`.
///
/// Element `i` carries `e_{i mod n_t} / sqrt(m)` in fiber `t`, so for `m = 1`
/// it is the first standard basis vector in every fiber.
pub fn frame(spec: &ModuleSpec, m: usize) -> Result<Vec<ModuleElement>> {
    if m == 0 {
        return Err(Error::InvalidConfig("frame size must be at least 1".into()));
    }
    let scale = 1.0 / (m as f64).sqrt();
    Ok((0..m)
        .map(|i| {
            ModuleElement::from_fibers(
                spec.fiber_dims()
                    .iter()
                    .map(|&n| {
                        let mut v = DVector::zeros(n);
                        v[i % n] = Complex64::new(scale, 0.0);
                        v
                    })
                    .collect(),
            )
        })
        .collect())
}

/// `(x0, f0)` with `f0(x0) = e`: the first frame element and its Riesz functional.
pub fn unit_pair(spec: &ModuleSpec) -> (ModuleElement, Functional) {
    let x0 = frame(spec, 1).expect("size 1 frame").remove(0);
    let f0 = riesz(&x0);
    (x0, f0)
}
