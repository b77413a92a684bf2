//! Derivation spaces of finite-dimensional algebras given by structure
//! constants, and the inner implementer of a derivation on `End_A(M)`.
//!
//! A linear map is stored as a `D x D` matrix acting on coordinates: column
//! `l` holds the coordinates of `d(e_l)`. Derivation spaces are nullspaces of
//! the Leibniz (or polarized Jordan) constraints written over all ordered basis
//! pairs; the unknown `d_{m,l}` sits at column `l * D + m`.
//!
//! In finite dimension every linear map is bounded, so continuity of
//! derivations needs no separate check; A-linearity is checked by
//! [`alinearity_defect`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calgebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::hilbmod::{riesz, ModuleElement, ModuleSpec};
use crate::linalg;
use crate::opalg::{mult_op, structure_constants, theta, Operator};

/// A unital associative algebra with basis `e_0 .. e_{D-1}` and
/// `e_i e_j = sum_m c_ijm e_m`.
#[derive(Debug, Clone)]
pub struct ConcreteAlgebra {
    dim: usize,
    structure: Vec<Complex64>,
    nonzeros: Vec<(usize, usize, usize, Complex64)>,
    unit: DVector<Complex64>,
}

impl ConcreteAlgebra {
    /// Builds and validates an algebra from a dense `D^3` tensor indexed `(i * D + j) * D + m`.
    pub fn new(dim: usize, structure: Vec<Complex64>, unit: DVector<Complex64>) -> Result<Self> {
        if structure.len() != dim * dim * dim || unit.len() != dim {
            return Err(Error::InvalidAlgebra(format!(
                "expected {} structure constants and a unit of length {dim}",
                dim * dim * dim
            )));
        }
        let nonzeros = (0..dim)
            .flat_map(|i| (0..dim).flat_map(move |j| (0..dim).map(move |m| (i, j, m))))
            .filter_map(|(i, j, m)| {
                let c = structure[(i * dim + j) * dim + m];
                (c != Complex64::new(0.0, 0.0)).then_some((i, j, m, c))
            })
            .collect();
        let alg = Self {
            dim,
            structure,
            nonzeros,
            unit,
        };
        let assoc = alg.associativity_defect();
        if assoc > 1e-10 {
            return Err(Error::InvalidAlgebra(format!(
                "associativity defect {assoc:e}"
            )));
        }
        let unit_defect = alg.unit_defect();
        if unit_defect > 1e-10 {
            return Err(Error::InvalidAlgebra(format!(
                "unit law defect {unit_defect:e}"
            )));
        }
        Ok(alg)
    }

    pub(crate) fn from_sparse(
        dim: usize,
        entries: &[(usize, usize, usize, Complex64)],
        unit: DVector<Complex64>,
    ) -> Self {
        let mut structure = vec![Complex64::new(0.0, 0.0); dim * dim * dim];
        for &(i, j, m, c) in entries {
            structure[(i * dim + j) * dim + m] += c;
        }
        Self::new(dim, structure, unit).expect("block algebras are associative and unital")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constant(&self, i: usize, j: usize, m: usize) -> Complex64 {
        self.structure[(i * self.dim + j) * self.dim + m]
    }

    pub fn unit_coords(&self) -> &DVector<Complex64> {
        &self.unit
    }

    pub fn basis_vector(&self, i: usize) -> DVector<Complex64> {
        let mut v = DVector::zeros(self.dim);
        v[i] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn mul(&self, x: &DVector<Complex64>, y: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = DVector::zeros(self.dim);
        for &(i, j, m, c) in &self.nonzeros {
            out[m] += x[i] * y[j] * c;
        }
        out
    }

    /// Matrix of `y -> x y`.
    pub fn left_matrix(&self, x: &DVector<Complex64>) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for &(i, j, m, c) in &self.nonzeros {
            out[(m, j)] += x[i] * c;
        }
        out
    }

    /// Matrix of `y -> y x`.
    pub fn right_matrix(&self, x: &DVector<Complex64>) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for &(i, j, m, c) in &self.nonzeros {
            out[(m, i)] += x[j] * c;
        }
        out
    }

    /// Largest `|(e_i e_j) e_l - e_i (e_j e_l)|` over basis triples.
    pub fn associativity_defect(&self) -> f64 {
        let basis: Vec<_> = (0..self.dim).map(|i| self.basis_vector(i)).collect();
        let mut worst: f64 = 0.0;
        for a in &basis {
            for b in &basis {
                let ab = self.mul(a, b);
                for c in &basis {
                    let lhs = self.mul(&ab, c);
                    let rhs = self.mul(a, &self.mul(b, c));
                    worst = worst.max((lhs - rhs).norm());
                }
            }
        }
        worst
    }

    pub fn unit_defect(&self) -> f64 {
        (0..self.dim)
            .map(|i| {
                let e = self.basis_vector(i);
                (self.mul(&self.unit, &e) - &e)
                    .norm()
                    .max((self.mul(&e, &self.unit) - &e).norm())
            })
            .fold(0.0, f64::max)
    }
}

/// A linear self-map of a [`ConcreteAlgebra`] in coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMapOnAlgebra {
    matrix: DMatrix<Complex64>,
}

/// On-disk form: `{"dim": D, "matrix": [[[re, im], ...], ...]}`, row-major.
#[derive(Serialize, Deserialize)]
struct MapFile {
    dim: usize,
    matrix: Vec<Vec<crate::cjson::Pair>>,
}

impl Serialize for LinearMapOnAlgebra {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MapFile {
            dim: self.dim(),
            matrix: crate::cjson::matrix_to_rows(&self.matrix),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinearMapOnAlgebra {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = MapFile::deserialize(d)?;
        let m = crate::cjson::matrix_from_rows(&raw.matrix).map_err(D::Error::custom)?;
        if m.nrows() != raw.dim || m.ncols() != raw.dim {
            return Err(D::Error::custom(format!(
                "matrix is {}x{} but dim is {}",
                m.nrows(),
                m.ncols(),
                raw.dim
            )));
        }
        Ok(Self { matrix: m })
    }
}

impl LinearMapOnAlgebra {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::mismatch(
                (matrix.nrows(), matrix.nrows()),
                matrix.shape(),
            ));
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(dim, dim),
        }
    }

    /// Map whose column `l` is `image(l)`.
    pub fn from_images(dim: usize, image: impl Fn(usize) -> DVector<Complex64>) -> Self {
        let mut matrix = DMatrix::zeros(dim, dim);
        for l in 0..dim {
            matrix.set_column(l, &image(l));
        }
        Self { matrix }
    }

    /// Map on the block algebra of `spec` induced by an operator-valued function.
    pub fn from_operator_fn(spec: &ModuleSpec, f: impl Fn(&Operator) -> Operator) -> Self {
        let basis = Operator::basis(spec);
        Self::from_images(spec.operator_dim(), |l| f(&basis[l]).to_coords())
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        &self.matrix * x
    }

    pub fn apply_to_operator(&self, spec: &ModuleSpec, a: &Operator) -> Operator {
        Operator::from_coords(spec, &self.apply(&a.to_coords()))
            .expect("map dimension matches spec")
    }

    pub fn scale(&self, lambda: Complex64) -> Self {
        Self {
            matrix: &self.matrix * lambda,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix - &other.matrix,
        }
    }

    /// Frobenius distance between the coordinate matrices.
    pub fn distance(&self, other: &Self) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }
}

/// A derivation space with the spectral data behind its rank decision.
#[derive(Debug, Clone)]
pub struct MapNullspace {
    pub basis: Vec<LinearMapOnAlgebra>,
    pub singular_values: Vec<f64>,
    pub gap_ratio: f64,
}

impl MapNullspace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Adds `sign * [d(e_i e_j) - d(e_i) e_j - e_i d(e_j)]` into rows `row0 .. row0 + D`.
fn add_leibniz_rows(
    alg: &ConcreteAlgebra,
    a: &mut DMatrix<Complex64>,
    row0: usize,
    i: usize,
    j: usize,
) {
    let d = alg.dim();
    for m in 0..d {
        let row = row0 + m;
        for l in 0..d {
            a[(row, l * d + m)] += alg.constant(i, j, l);
        }
        for p in 0..d {
            a[(row, i * d + p)] -= alg.constant(p, j, m);
            a[(row, j * d + p)] -= alg.constant(i, p, m);
        }
    }
}

fn maps_from_nullspace(d: usize, ns: linalg::Nullspace) -> MapNullspace {
    let basis = ns
        .basis
        .iter()
        .map(|v| LinearMapOnAlgebra {
            matrix: DMatrix::from_column_slice(d, d, v.as_slice()),
        })
        .collect();
    MapNullspace {
        basis,
        singular_values: ns.singular_values,
        gap_ratio: ns.gap_ratio,
    }
}

/// Orthonormal basis of all derivations `d(xy) = d(x)y + x d(y)`.
///
/// Every ordered basis pair contributes; the Leibniz rule is not symmetric in
/// its arguments.
pub fn leibniz_nullspace(alg: &ConcreteAlgebra, tol: f64) -> Result<MapNullspace> {
    let d = alg.dim();
    let mut a = DMatrix::zeros(d * d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            add_leibniz_rows(alg, &mut a, (i * d + j) * d, i, j);
        }
    }
    Ok(maps_from_nullspace(d, linalg::nullspace(&a, tol)?))
}

/// Basis of the Jordan derivations, from the polarized identity
/// `d(xy + yx) = d(x)y + x d(y) + d(y)x + y d(x)` on unordered basis pairs.
pub fn jordan_nullspace(alg: &ConcreteAlgebra, tol: f64) -> Result<MapNullspace> {
    let d = alg.dim();
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (i..d).map(move |j| (i, j))).collect();
    let mut a = DMatrix::zeros(pairs.len() * d, d * d);
    for (r, &(i, j)) in pairs.iter().enumerate() {
        add_leibniz_rows(alg, &mut a, r * d, i, j);
        add_leibniz_rows(alg, &mut a, r * d, j, i);
    }
    Ok(maps_from_nullspace(d, linalg::nullspace(&a, tol)?))
}

/// The inner derivation `x -> m x - x m`.
pub fn inner_map(alg: &ConcreteAlgebra, m: &DVector<Complex64>) -> LinearMapOnAlgebra {
    LinearMapOnAlgebra {
        matrix: alg.left_matrix(m) - alg.right_matrix(m),
    }
}

/// Largest Leibniz residual `|d(e_i e_j) - d(e_i) e_j - e_i d(e_j)|` over basis pairs.
pub fn derivation_defect(alg: &ConcreteAlgebra, d: &LinearMapOnAlgebra) -> f64 {
    let n = alg.dim();
    let images: Vec<_> = (0..n).map(|i| d.matrix.column(i).into_owned()).collect();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let ei = alg.basis_vector(i);
        for j in 0..n {
            let ej = alg.basis_vector(j);
            let lhs = d.apply(&alg.mul(&ei, &ej));
            let rhs = alg.mul(&images[i], &ej) + alg.mul(&ei, &images[j]);
            worst = worst.max((lhs - rhs).norm());
        }
    }
    worst
}

/// The implementer `T` of a derivation `d` on `End_A(M)`:
/// `T x = sum_i d(theta_{x, x_i^}) x_i` for a frame `{x_i}`.
///
/// `T` is built column by column from the module basis, and satisfies
/// `d = [T, .]`. It is determined up to a central summand `T_a`.
pub fn extract_implementer(
    spec: &ModuleSpec,
    d: &LinearMapOnAlgebra,
    frame: &[ModuleElement],
    tol: f64,
) -> Result<Operator> {
    if d.dim() != spec.operator_dim() {
        return Err(Error::mismatch(spec.operator_dim(), d.dim()));
    }
    let alg = structure_constants(spec);
    let defect = derivation_defect(&alg, d);
    if defect > tol {
        return Err(Error::NotADerivation { defect });
    }
    let hats: Vec<_> = frame.iter().map(riesz).collect();
    let mut blocks: Vec<DMatrix<Complex64>> = spec
        .fiber_dims()
        .iter()
        .map(|&n| DMatrix::zeros(n, n))
        .collect();
    for (t, &n) in spec.fiber_dims().iter().enumerate() {
        for j in 0..n {
            let x = ModuleElement::basis_vector(spec, t, j);
            let mut tx = ModuleElement::zero(spec);
            for (xi, hat) in frame.iter().zip(&hats) {
                let image = d.apply_to_operator(spec, &theta(&x, hat)?);
                tx = tx.try_add(&image.try_apply(xi)?)?;
            }
            blocks[t].set_column(j, tx.fiber(t));
        }
    }
    Ok(Operator::from_blocks(blocks))
}

/// The inner derivation `[T, .]` on the block algebra of `spec`.
pub fn inner_map_of(spec: &ModuleSpec, t: &Operator) -> LinearMapOnAlgebra {
    inner_map(&structure_constants(spec), &t.to_coords())
}

/// Largest of `|d(T_a E) - T_a d(E)|` and `|d(T_a)|` over the given scalars
/// `a` and all matrix units `E`.
pub fn alinearity_defect(
    spec: &ModuleSpec,
    d: &LinearMapOnAlgebra,
    scalars: &[AlgebraElement],
) -> Result<f64> {
    let mut worst = module_linearity_defect(spec, d, scalars)?;
    for a in scalars {
        worst = worst.max(d.apply_to_operator(spec, &mult_op(spec, a)?).norm());
    }
    Ok(worst)
}

/// Max of `|d(T_a E) - T_a d(E)|` over `scalars` and basis operators `E`; the
/// commutation half of [`alinearity_defect`] without the `d(T_a) = 0` term.
pub fn module_linearity_defect(
    spec: &ModuleSpec,
    d: &LinearMapOnAlgebra,
    scalars: &[AlgebraElement],
) -> Result<f64> {
    if d.dim() != spec.operator_dim() {
        return Err(Error::mismatch(spec.operator_dim(), d.dim()));
    }
    let basis = Operator::basis(spec);
    let mut worst: f64 = 0.0;
    for a in scalars {
        let ta = mult_op(spec, a)?;
        for e in &basis {
            let lhs = d.apply_to_operator(spec, &(&ta * e));
            let rhs = &ta * &d.apply_to_operator(spec, e);
            worst = worst.max(lhs.distance(&rhs));
        }
    }
    Ok(worst)
}

/// `|d(T_a)|` for each scalar.
pub fn center_image_norm(
    spec: &ModuleSpec,
    d: &LinearMapOnAlgebra,
    a: &AlgebraElement,
) -> Result<f64> {
    Ok(d.apply_to_operator(spec, &mult_op(spec, a)?).norm())
}

/// Blockwise transpose, an anti-automorphism; used as a non-derivation probe.
pub fn blockwise_transpose(spec: &ModuleSpec) -> LinearMapOnAlgebra {
    LinearMapOnAlgebra::from_operator_fn(spec, |a| {
        Operator::from_blocks(a.blocks().iter().map(|b| b.transpose()).collect())
    })
}
