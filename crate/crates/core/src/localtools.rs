//! Tools for local derivations on `End_A(M)` given a unit pair
//! `f0(x0) = e`: the one-sided ideals `L = span{theta_{x,f0}}` and
//! `R = span{theta_{x0,f}}`, their idempotent decompositions and separating
//! witnesses, the zero-product identities for A-bilinear maps, and the
//! generalized-derivation and local-derivation checks.
//!
//! Local derivation certification is sample based. A failing probe proves the
//! map is not a local derivation; passing every probe only certifies the
//! sampled points.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calgebra::{self, AlgebraElement};
use crate::dersolve::{
    derivation_defect, module_linearity_defect, ConcreteAlgebra, LinearMapOnAlgebra,
};
use crate::error::{Error, Result};
use crate::hilbmod::{act, module_norm, riesz, Functional, ModuleElement, ModuleSpec};
use crate::linalg;
use crate::opalg::{mult_op, structure_constants, theta, Operator};
use crate::sample::Sampler;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Spanning set of `L` (left side) or `R` (right side).
#[derive(Debug, Clone)]
pub struct IdealBasis {
    pub side: Side,
    pub elements: Vec<Operator>,
}

impl IdealBasis {
    /// Distance from `a` to the complex span of the basis.
    pub fn span_residual(&self, a: &Operator) -> f64 {
        let cols: Vec<_> = self.elements.iter().map(Operator::to_coords).collect();
        if cols.is_empty() {
            return a.norm();
        }
        linalg::span_residual(&DMatrix::from_columns(&cols), &a.to_coords())
    }
}

fn check_unit_pair(x0: &ModuleElement, f0: &Functional) -> Result<()> {
    let v = f0.apply(x0)?;
    let residual = v.distance(&calgebra::unit(v.space()));
    if residual > 1e-12 {
        return Err(Error::UnitPairInvalid { residual });
    }
    Ok(())
}

pub fn ideal_basis(
    spec: &ModuleSpec,
    side: Side,
    x0: &ModuleElement,
    f0: &Functional,
) -> Result<IdealBasis> {
    x0.check(spec)?;
    f0.riesz().check(spec)?;
    check_unit_pair(x0, f0)?;
    let elements = ModuleElement::basis(spec)
        .iter()
        .map(|b| match side {
            Side::Left => theta(b, f0),
            Side::Right => theta(x0, &riesz(b)),
        })
        .collect::<Result<_>>()?;
    Ok(IdealBasis { side, elements })
}

/// `theta = lambda^{-1} P1 - lambda^{-1} a^{-1} P2` with idempotents `P1`, `P2`.
#[derive(Debug, Clone)]
pub struct IdempotentDecomposition {
    pub lambda: Complex64,
    pub a: AlgebraElement,
    pub p1: Operator,
    pub p2: Operator,
}

impl IdempotentDecomposition {
    pub fn reconstruct(&self, spec: &ModuleSpec) -> Result<Operator> {
        let inv_lambda = self.lambda.inv();
        let a_inv = calgebra::invert(&self.a, calgebra::DEFAULT_INVERT_TOL)?;
        let second = &mult_op(spec, &a_inv)? * &self.p2;
        Ok(&self.p1.scale(inv_lambda) - &second.scale(inv_lambda))
    }

    /// Largest of `|P1^2 - P1|` and `|P2^2 - P2|`.
    pub fn idempotency_defect(&self) -> f64 {
        let d1 = (&self.p1 * &self.p1).distance(&self.p1);
        let d2 = (&self.p2 * &self.p2).distance(&self.p2);
        d1.max(d2)
    }
}

/// `lambda = 1 / (1 + |s|)` keeps `|lambda s(t)| < 1`, so `e - lambda s` is invertible.
fn choose_lambda(s: &AlgebraElement) -> Complex64 {
    Complex64::new(1.0 / (1.0 + s.sup_norm()), 0.0)
}

/// Decomposition of `theta_{x,f0}` in `L`:
/// `P1 = theta_{x0,f0}`, `P2 = theta_{a(x0 - lambda x), f0}`, `a = (e - lambda f0(x))^{-1}`.
pub fn idempotent_decomposition(
    spec: &ModuleSpec,
    x: &ModuleElement,
    x0: &ModuleElement,
    f0: &Functional,
) -> Result<IdempotentDecomposition> {
    check_unit_pair(x0, f0)?;
    let f0x = f0.apply(x)?;
    let lambda = choose_lambda(&f0x);
    let e = calgebra::unit(spec.space());
    let a = calgebra::invert(&(&e - &f0x.scale(lambda)), calgebra::DEFAULT_INVERT_TOL)?;
    let p1 = theta(x0, f0)?;
    let p2 = theta(&act(&a, &(x0 - &x.scale(lambda)))?, f0)?;
    Ok(IdempotentDecomposition { lambda, a, p1, p2 })
}

/// Decomposition of `theta_{x0,f}` in `R`:
/// `P1 = theta_{x0,f0}`, `P2 = theta_{x0, a(f0 - lambda f)}`, `a = (e - lambda f(x0))^{-1}`.
pub fn right_idempotent_decomposition(
    spec: &ModuleSpec,
    f: &Functional,
    x0: &ModuleElement,
    f0: &Functional,
) -> Result<IdempotentDecomposition> {
    check_unit_pair(x0, f0)?;
    let fx0 = f.apply(x0)?;
    let lambda = choose_lambda(&fx0);
    let e = calgebra::unit(spec.space());
    let a = calgebra::invert(&(&e - &fx0.scale(lambda)), calgebra::DEFAULT_INVERT_TOL)?;
    let p1 = theta(x0, f0)?;
    let g = f0
        .try_sub(&Functional::new(f.riesz().scale(lambda.conj())))?
        .scale_by(&a)?;
    let p2 = theta(x0, &g)?;
    Ok(IdempotentDecomposition { lambda, a, p1, p2 })
}

#[derive(Debug, Clone)]
pub struct SeparatingWitness {
    /// Left side: the `x` in `A theta_{x,f0} != 0`.
    /// Right side: the Riesz vector of `f` in `theta_{x0,f} A != 0`.
    pub probe: ModuleElement,
    /// Frobenius norm of the nonzero product.
    pub product_norm: f64,
}

/// Shows `A L != 0` (left) or `R A != 0` (right) for nonzero `A`; `None` when
/// `|A| <= 1e-10`.
///
/// Both sides start from the basis vector `x` maximizing `|Ax|`. On the left,
/// `A theta_{x,f0} x0 = f0(x0) A x = A x`. On the right, with `f = (Ax)^`,
/// `theta_{x0,f} A x = <Ax, Ax> x0`.
pub fn separating_witness(
    spec: &ModuleSpec,
    side: Side,
    a: &Operator,
    x0: &ModuleElement,
    f0: &Functional,
) -> Result<Option<SeparatingWitness>> {
    a.check(spec)?;
    check_unit_pair(x0, f0)?;
    if a.spectral_norm() <= 1e-10 {
        return Ok(None);
    }
    let (x, ax) = ModuleElement::basis(spec)
        .into_iter()
        .map(|x| {
            let ax = a.apply(&x);
            (x, ax)
        })
        .max_by(|p, q| module_norm(&p.1).total_cmp(&module_norm(&q.1)))
        .expect("nonempty module basis");
    Ok(Some(match side {
        Side::Left => {
            let product = a * &theta(&x, f0)?;
            SeparatingWitness {
                probe: x,
                product_norm: product.norm(),
            }
        }
        Side::Right => {
            let product = &theta(x0, &riesz(&ax))? * a;
            SeparatingWitness {
                probe: ax,
                product_norm: product.norm(),
            }
        }
    }))
}

/// Operator-valued bilinear map evaluated on demand.
pub type BilinearMap<'a> = dyn Fn(&Operator, &Operator) -> Operator + 'a;

/// Largest deviation in the chains `phi(A,LB) = phi(AL,B) = phi(I,ALB)` and
/// `phi(AR,B) = phi(A,RB) = phi(ARB,I)`.
pub fn zero_product_chain_defect(
    spec: &ModuleSpec,
    phi: &BilinearMap<'_>,
    a: &Operator,
    b: &Operator,
    l: &Operator,
    r: &Operator,
) -> f64 {
    let id = Operator::identity(spec);
    let al = a * l;
    let ar = a * r;
    let lb = l * b;
    let rb = r * b;
    let left1 = phi(a, &lb).distance(&phi(&al, b));
    let left2 = phi(&al, b).distance(&phi(&id, &(&al * b)));
    let right1 = phi(&ar, b).distance(&phi(a, &rb));
    let right2 = phi(a, &rb).distance(&phi(&(&ar * b), &id));
    left1.max(left2).max(right1).max(right2)
}

/// `phi1(X, Y) = X delta(Y A0) B0`; zero-product preserving when `A0 B0 = 0`.
pub fn phi1<'a>(
    delta: &'a dyn Fn(&Operator) -> Operator,
    a0: &'a Operator,
    b0: &'a Operator,
) -> impl Fn(&Operator, &Operator) -> Operator + 'a {
    move |x, y| &(x * &delta(&(y * a0))) * b0
}

/// `phi2(X, Y) = delta(A X) Y - A delta(X) Y`.
pub fn phi2<'a>(
    delta: &'a dyn Fn(&Operator) -> Operator,
    a: &'a Operator,
) -> impl Fn(&Operator, &Operator) -> Operator + 'a {
    move |x, y| &(&delta(&(a * x)) * y) - &(&(a * &delta(x)) * y)
}

/// Largest `|delta(e_i e_j) - e_i delta(e_j) - delta(e_i) e_j + e_i delta(1) e_j|`.
pub fn generalized_derivation_defect(alg: &ConcreteAlgebra, delta: &LinearMapOnAlgebra) -> f64 {
    let n = alg.dim();
    let d_unit = delta.apply(alg.unit_coords());
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let ei = alg.basis_vector(i);
        let di = delta.apply(&ei);
        let ei_du = alg.mul(&ei, &d_unit);
        for j in 0..n {
            let ej = alg.basis_vector(j);
            let lhs = delta.apply(&alg.mul(&ei, &ej));
            let rhs = alg.mul(&ei, &delta.apply(&ej)) + alg.mul(&di, &ej) - alg.mul(&ei_du, &ej);
            worst = worst.max((lhs - rhs).norm());
        }
    }
    worst
}

/// Operators with `A B = B C = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroTriple {
    pub a: Operator,
    pub b: Operator,
    pub c: Operator,
}

impl ZeroTriple {
    /// Largest of `|AB|` and `|BC|`.
    pub fn product_defect(&self) -> f64 {
        (&self.a * &self.b).norm().max((&self.b * &self.c).norm())
    }
}

#[derive(Debug, Clone)]
pub struct ZeroTripleSample {
    pub triples: Vec<ZeroTriple>,
    /// Every fiber is one-dimensional, so every sampled `B` is zero.
    pub degenerate: bool,
}

fn orthonormal_pair(rng: &mut Sampler, n: usize) -> (DVector<Complex64>, DVector<Complex64>) {
    let u = rng.vector(n).normalize();
    let w = rng.vector(n);
    let v = (&w - &u * u.dotc(&w)).normalize();
    (u, v)
}

/// Triples with exact zero products placed by construction.
///
/// In each fiber with `n_t >= 2` choose orthonormal `u, v`; then
/// `B = beta u v^H`, `A = G (I - u u^H)` and `C = (I - v v^H) H` with random
/// `beta, G, H`. One-dimensional fibers get `B = 0` and random `A`, `C`.
pub fn zero_triple_sampler(spec: &ModuleSpec, count: usize, seed: u64) -> ZeroTripleSample {
    let mut rng = Sampler::new(seed, "zero-triples");
    let degenerate = spec.fiber_dims().iter().all(|&n| n == 1);
    let triples = (0..count)
        .map(|_| {
            let mut a = Vec::new();
            let mut b = Vec::new();
            let mut c = Vec::new();
            for &n in spec.fiber_dims() {
                let g = rng.matrix(n, n);
                let h = rng.matrix(n, n);
                if n >= 2 {
                    let (u, v) = orthonormal_pair(&mut rng, n);
                    let beta = rng.complex();
                    let id = DMatrix::<Complex64>::identity(n, n);
                    a.push(&g * (&id - &u * u.adjoint()));
                    b.push(&u * v.adjoint() * beta);
                    c.push((&id - &v * v.adjoint()) * &h);
                } else {
                    a.push(g);
                    b.push(DMatrix::zeros(1, 1));
                    c.push(h);
                }
            }
            ZeroTriple {
                a: Operator::from_blocks(a),
                b: Operator::from_blocks(b),
                c: Operator::from_blocks(c),
            }
        })
        .collect();
    ZeroTripleSample {
        triples,
        degenerate,
    }
}

/// Largest `|A delta(B) C|` over the triples; zero for an empty list.
pub fn zero_product_hypothesis_check(
    spec: &ModuleSpec,
    delta: &LinearMapOnAlgebra,
    triples: &[ZeroTriple],
) -> f64 {
    triples
        .iter()
        .map(|t| (&(&t.a * &delta.apply_to_operator(spec, &t.b)) * &t.c).norm())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbeLabel {
    Index(usize),
    Named(String),
}

#[derive(Debug, Clone)]
pub struct LocalProbe {
    pub label: ProbeLabel,
    pub coords: DVector<Complex64>,
}

/// The canonical basis (labels `0..D`) followed by `random` seeded elements
/// labelled `"random:<seed>:<i>"`.
pub fn local_probes(spec: &ModuleSpec, random: usize, seed: u64) -> Vec<LocalProbe> {
    let d = spec.operator_dim();
    let mut rng = Sampler::new(seed, "local-probes");
    let mut probes: Vec<LocalProbe> = Operator::basis(spec)
        .iter()
        .enumerate()
        .map(|(i, e)| LocalProbe {
            label: ProbeLabel::Index(i),
            coords: e.to_coords(),
        })
        .collect();
    probes.extend((0..random).map(|i| LocalProbe {
        label: ProbeLabel::Named(format!("random:{seed}:{i}")),
        coords: rng.vector(d),
    }));
    probes
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResidual {
    pub element: ProbeLabel,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalVerdict {
    /// Every probe is implemented by a commutator and the map is a derivation.
    Derivation,
    /// Some probe has no implementing commutator.
    NotLocal,
    /// Every probe passed but the Leibniz rule fails.
    Contradiction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalCertReport {
    pub residuals: Vec<ProbeResidual>,
    pub alinearity_defect: f64,
    pub derivation_defect: f64,
    pub certified_local: bool,
    pub verdict: LocalVerdict,
}

impl LocalCertReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals
            .iter()
            .map(|r| r.residual)
            .fold(0.0, f64::max)
    }

    pub fn failing(&self, tol: f64) -> impl Iterator<Item = &ProbeResidual> {
        self.residuals.iter().filter(move |r| r.residual > tol)
    }
}

/// Checks that `delta(E)` is a commutator `[T_E, E]` at every probe `E`.
///
/// Derivations of `End_A(M)` are inner, so this is exactly local
/// implementability. Requires `delta(T_a E) = T_a delta(E)` for `a` in
/// `scalars`; `delta(T_a) = 0` is not assumed, so maps with `delta(1) != 0`
/// reach the probes and fail at the unit. A certified map must satisfy the
/// Leibniz rule to within `10 * tol`.
pub fn local_derivation_certify(
    spec: &ModuleSpec,
    delta: &LinearMapOnAlgebra,
    probes: &[LocalProbe],
    scalars: &[AlgebraElement],
    tol: f64,
) -> Result<LocalCertReport> {
    let alinearity = module_linearity_defect(spec, delta, scalars)?;
    if alinearity > tol {
        return Err(Error::NotALinear { defect: alinearity });
    }
    let alg = structure_constants(spec);
    let residuals: Vec<ProbeResidual> = probes
        .iter()
        .map(|p| {
            let ad = alg.right_matrix(&p.coords) - alg.left_matrix(&p.coords);
            let target = delta.apply(&p.coords);
            ProbeResidual {
                element: p.label.clone(),
                residual: linalg::least_squares(&ad, &target).residual,
            }
        })
        .collect();
    let certified_local = residuals.iter().all(|r| r.residual <= tol);
    let defect = derivation_defect(&alg, delta);
    let verdict = match (certified_local, defect <= 10.0 * tol) {
        (false, _) => LocalVerdict::NotLocal,
        (true, true) => LocalVerdict::Derivation,
        (true, false) => LocalVerdict::Contradiction,
    };
    Ok(LocalCertReport {
        residuals,
        alinearity_defect: alinearity,
        derivation_defect: defect,
        certified_local,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dersolve::{blockwise_transpose, inner_map, inner_map_of, leibniz_nullspace};
    use crate::hilbmod::unit_pair;

    fn spec(f: &[usize]) -> ModuleSpec {
        ModuleSpec::new(f.to_vec()).unwrap()
    }

    #[test]
    fn ideals_are_one_sided() {
        let s = spec(&[2, 3]);
        let (x0, f0) = unit_pair(&s);
        let left = ideal_basis(&s, Side::Left, &x0, &f0).unwrap();
        let right = ideal_basis(&s, Side::Right, &x0, &f0).unwrap();
        assert_eq!(left.elements.len(), 5);
        let mut rng = Sampler::new(41, "ideals");
        for _ in 0..20 {
            let a = rng.operator(&s);
            let l = theta(&rng.module_element(&s), &f0).unwrap();
            let r = theta(&x0, &rng.functional(&s)).unwrap();
            assert!(left.span_residual(&l) <= 1e-10);
            assert!(left.span_residual(&(&a * &l)) <= 1e-10);
            assert!(right.span_residual(&(&r * &a)) <= 1e-10);
        }
        // a generic operator is in neither ideal
        assert!(left.span_residual(&Operator::identity(&s)) > 0.1);
        let bad = Functional::new(x0.scale(Complex64::new(2.0, 0.0)));
        assert!(matches!(
            ideal_basis(&s, Side::Left, &x0, &bad),
            Err(Error::UnitPairInvalid { .. })
        ));
        assert_eq!(
            spec(&[2]).module_dim(),
            ideal_basis(
                &spec(&[2]),
                Side::Left,
                &unit_pair(&spec(&[2])).0,
                &unit_pair(&spec(&[2])).1
            )
            .unwrap()
            .elements
            .len()
        );
    }

    #[test]
    fn decomposition_matrix_example() {
        let s = spec(&[2]);
        let (x0, f0) = unit_pair(&s);
        let e2 = ModuleElement::basis_vector(&s, 0, 1);
        let dec = idempotent_decomposition(&s, &e2, &x0, &f0).unwrap();
        assert_eq!(dec.lambda, Complex64::new(1.0, 0.0));
        assert_eq!(dec.a, calgebra::unit(s.space()));
        // theta_{e2,e1^} = theta_{e1,e1^} - theta_{e1-e2,e1^}
        let expected = &theta(&x0, &f0).unwrap() - &theta(&(&x0 - &e2), &f0).unwrap();
        assert_eq!(theta(&e2, &f0).unwrap(), expected);
        assert!(dec.reconstruct(&s).unwrap().distance(&expected) <= 1e-15);
        assert!(dec.idempotency_defect() <= 1e-15);
    }

    #[test]
    fn decompositions_reconstruct() {
        let s = spec(&[2, 3]);
        let (x0, f0) = unit_pair(&s);
        let same = idempotent_decomposition(&s, &x0, &x0, &f0).unwrap();
        assert!(
            same.reconstruct(&s)
                .unwrap()
                .distance(&theta(&x0, &f0).unwrap())
                <= 1e-12
        );
        let mut rng = Sampler::new(42, "decomp");
        for _ in 0..100 {
            let x = rng.module_element(&s);
            let dec = idempotent_decomposition(&s, &x, &x0, &f0).unwrap();
            assert!(dec.idempotency_defect() <= 1e-10);
            assert!(
                dec.reconstruct(&s)
                    .unwrap()
                    .distance(&theta(&x, &f0).unwrap())
                    <= 1e-10
            );
            let f = rng.functional(&s);
            let dec = right_idempotent_decomposition(&s, &f, &x0, &f0).unwrap();
            assert!(dec.idempotency_defect() <= 1e-10);
            assert!(
                dec.reconstruct(&s)
                    .unwrap()
                    .distance(&theta(&x0, &f).unwrap())
                    <= 1e-10
            );
        }
    }

    #[test]
    fn separating_witnesses() {
        let s = spec(&[2, 3]);
        let (x0, f0) = unit_pair(&s);
        for side in [Side::Left, Side::Right] {
            let w = separating_witness(&s, side, &Operator::identity(&s), &x0, &f0)
                .unwrap()
                .unwrap();
            assert!(w.product_norm > 0.5);
            assert!(separating_witness(&s, side, &Operator::zero(&s), &x0, &f0)
                .unwrap()
                .is_none());
        }
        let mut rng = Sampler::new(43, "separate");
        for _ in 0..100 {
            let a = rng.operator(&s);
            for side in [Side::Left, Side::Right] {
                let w = separating_witness(&s, side, &a, &x0, &f0).unwrap().unwrap();
                assert!(w.product_norm > 1e-8);
            }
        }
    }

    #[test]
    fn zero_product_chains() {
        let s = spec(&[2, 3]);
        let (x0, f0) = unit_pair(&s);
        let mut rng = Sampler::new(44, "chains");
        let product = |x: &Operator, y: &Operator| x * y;
        let swapped = |x: &Operator, y: &Operator| y * x;
        let t0 = rng.operator(&s);
        let d = inner_map_of(&s, &t0);
        let delta = |x: &Operator| d.apply_to_operator(&s, x);
        let triples = zero_triple_sampler(&s, 5, 9).triples;
        let mut worst_swapped: f64 = 0.0;
        for t in &triples {
            let a = rng.operator(&s);
            let b = rng.operator(&s);
            let l = theta(&rng.module_element(&s), &f0).unwrap();
            let r = theta(&x0, &rng.functional(&s)).unwrap();
            assert!(zero_product_chain_defect(&s, &product, &a, &b, &l, &r) <= 1e-12);
            let p1 = phi1(&delta, &t.a, &t.b);
            assert!(zero_product_chain_defect(&s, &p1, &a, &b, &l, &r) <= 1e-10);
            let p2 = phi2(&delta, &a);
            assert!(zero_product_chain_defect(&s, &p2, &rng.operator(&s), &b, &l, &r) <= 1e-10);
            worst_swapped =
                worst_swapped.max(zero_product_chain_defect(&s, &swapped, &a, &b, &l, &r));
        }
        assert!(worst_swapped > 0.1);
    }

    #[test]
    fn generalized_derivations() {
        let s = spec(&[2, 3]);
        let alg = structure_constants(&s);
        let mut rng = Sampler::new(45, "generalized");
        let d = inner_map(&alg, &rng.vector(alg.dim()));
        assert!(generalized_derivation_defect(&alg, &d) <= 1e-10);
        assert!(d.apply(alg.unit_coords()).norm() <= 1e-12);
        let m = rng.vector(alg.dim());
        let g = d.add(&LinearMapOnAlgebra::new(alg.left_matrix(&m)).unwrap());
        assert!(generalized_derivation_defect(&alg, &g) <= 1e-10);
        assert!(derivation_defect(&alg, &g) > 0.1);
        assert!(generalized_derivation_defect(&alg, &blockwise_transpose(&s)) > 0.1);
        // identity: d(ab) = ab = a b + a b - a b
        assert!(
            generalized_derivation_defect(&alg, &LinearMapOnAlgebra::identity(alg.dim())) <= 1e-14
        );
    }

    #[test]
    fn zero_triples() {
        let s = spec(&[2, 3, 1]);
        let sample = zero_triple_sampler(&s, 50, 3);
        assert!(!sample.degenerate);
        assert_eq!(sample.triples.len(), 50);
        for t in &sample.triples {
            assert!(t.product_defect() <= 1e-12);
            assert!(t.b.norm() > 0.0);
        }
        let again = zero_triple_sampler(&s, 50, 3);
        assert_eq!(sample.triples, again.triples);
        let flat = zero_triple_sampler(&spec(&[1, 1]), 4, 3);
        assert!(flat.degenerate);
        assert!(flat.triples.iter().all(|t| t.b.norm() == 0.0));
    }

    #[test]
    fn hypothesis_check() {
        let s = spec(&[2, 3]);
        let alg = structure_constants(&s);
        let triples = zero_triple_sampler(&s, 100, 5).triples;
        let mut rng = Sampler::new(46, "hypothesis");
        let d = inner_map(&alg, &rng.vector(alg.dim()));
        assert!(zero_product_hypothesis_check(&s, &d, &triples) <= 1e-10);
        // generalized derivations also satisfy the hypothesis
        let g = d.add(&LinearMapOnAlgebra::new(alg.left_matrix(&rng.vector(alg.dim()))).unwrap());
        assert!(zero_product_hypothesis_check(&s, &g, &triples) <= 1e-10);
        assert!(zero_product_hypothesis_check(&s, &blockwise_transpose(&s), &triples) > 0.1);
        assert_eq!(
            zero_product_hypothesis_check(&s, &blockwise_transpose(&s), &[]),
            0.0
        );
    }

    #[test]
    fn local_certification() {
        let s = spec(&[2, 3]);
        let alg = structure_constants(&s);
        let mut rng = Sampler::new(47, "local");
        let scalars: Vec<_> = (0..5).map(|_| rng.algebra_element(s.space())).collect();
        let probes = local_probes(&s, 20, 47);
        assert_eq!(probes.len(), 33);

        let d = inner_map(&alg, &rng.vector(alg.dim()));
        let rep = local_derivation_certify(&s, &d, &probes, &scalars, 1e-10).unwrap();
        assert!(rep.certified_local);
        assert_eq!(rep.verdict, LocalVerdict::Derivation);
        assert!(rep.max_residual() <= 1e-10);

        let m = rng.vector(alg.dim());
        let g = d.add(&LinearMapOnAlgebra::new(alg.left_matrix(&m)).unwrap());
        let rep = local_derivation_certify(&s, &g, &probes, &scalars, 1e-10).unwrap();
        assert_eq!(rep.verdict, LocalVerdict::NotLocal);
        let unit_idx = local_probes(&s, 0, 0).len(); // first random probe follows the basis
        let unit_probe = [LocalProbe {
            label: ProbeLabel::Named("unit".into()),
            coords: alg.unit_coords().clone(),
        }];
        let at_unit = local_derivation_certify(&s, &g, &unit_probe, &scalars, 1e-10).unwrap();
        let du = g.apply(alg.unit_coords()).norm();
        assert!((at_unit.residuals[0].residual - du).abs() <= 1e-12);
        assert!(unit_idx == 13);

        let tr = blockwise_transpose(&s);
        let rep = local_derivation_certify(&s, &tr, &probes[..13], &scalars, 1e-10).unwrap();
        assert!(rep.failing(1e-10).any(|r| r.residual > 0.1));

        let generic = LinearMapOnAlgebra::new(rng.matrix(13, 13)).unwrap();
        assert!(matches!(
            local_derivation_certify(&s, &generic, &probes, &scalars, 1e-10),
            Err(Error::NotALinear { .. })
        ));

        for dn in leibniz_nullspace(&alg, 1e-9).unwrap().basis.iter().take(3) {
            let rep = local_derivation_certify(&s, dn, &probes, &scalars, 1e-10).unwrap();
            assert_eq!(rep.verdict, LocalVerdict::Derivation);
        }
    }

    #[test]
    fn report_json_shape() {
        let r = ProbeResidual {
            element: ProbeLabel::Index(3),
            residual: 0.5,
        };
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"element":3,"residual":0.5}"#
        );
        let r = ProbeResidual {
            element: ProbeLabel::Named("random:7:0".into()),
            residual: 0.0,
        };
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"element":"random:7:0","residual":0.0}"#
        );
    }
}
