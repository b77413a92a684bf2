//! The commutative unital C*-algebra `C(S)` of complex functions on a finite
//! point space `S = {0, .., k-1}`.
//!
//! Elements are stored as their values at the points. Every operation is
//! pointwise, so the algebra is commutative by construction and the sup norm
//! satisfies the C*-identity `|a* a| = |a|^2`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default modulus below which an entry is treated as zero when inverting.
pub const DEFAULT_INVERT_TOL: f64 = 1e-9;

/// The finite point space `S`, identified with `{0, .., k-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PointSpace {
    k: usize,
}

impl PointSpace {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidConfig(
                "point space needs at least one point".into(),
            ));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// An element of `C(S)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AlgebraElement {
    #[serde(with = "crate::cjson::vec")]
    values: Vec<Complex64>,
}

impl AlgebraElement {
    pub fn from_values(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::from_values(values.iter().map(|&r| Complex64::new(r, 0.0)).collect())
    }

    /// The constant function with value `lambda`.
    pub fn constant(space: PointSpace, lambda: Complex64) -> Self {
        Self::from_values(vec![lambda; space.k()])
    }

    pub fn zero(space: PointSpace) -> Self {
        Self::constant(space, Complex64::new(0.0, 0.0))
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn space(&self) -> PointSpace {
        PointSpace {
            k: self.values.len(),
        }
    }

    pub fn scale(&self, lambda: Complex64) -> Self {
        Self::from_values(self.values.iter().map(|v| v * lambda).collect())
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::mismatch(self.len(), other.len()));
        }
        Ok(Self::from_values(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        ))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn distance(&self, other: &Self) -> f64 {
        (self - other).sup_norm()
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(self)
    }
}

pub fn unit(space: PointSpace) -> AlgebraElement {
    AlgebraElement::constant(space, Complex64::new(1.0, 0.0))
}

pub fn product(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
    a.zip_with(b, |x, y| x * y)
}

pub fn star(a: &AlgebraElement) -> AlgebraElement {
    AlgebraElement::from_values(a.values.iter().map(|v| v.conj()).collect())
}

/// Pointwise reciprocal; fails when some entry has modulus at most `tol`.
pub fn invert(a: &AlgebraElement, tol: f64) -> Result<AlgebraElement> {
    if let Some((index, v)) = a.values.iter().enumerate().find(|(_, v)| v.norm() <= tol) {
        return Err(Error::NotInvertible {
            index,
            modulus: v.norm(),
        });
    }
    Ok(AlgebraElement::from_values(
        a.values.iter().map(|v| v.inv()).collect(),
    ))
}

pub fn is_positive(a: &AlgebraElement, tol: f64) -> bool {
    a.values.iter().all(|v| v.im.abs() <= tol && v.re >= -tol)
}

pub fn sup_norm(a: &AlgebraElement) -> f64 {
    a.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

// Operator impls panic on mismatched point spaces; the free functions above
// report the mismatch instead.

impl Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: Self) -> AlgebraElement {
        self.try_add(rhs)
            .expect("algebra elements over different point spaces")
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: Self) -> AlgebraElement {
        self.try_sub(rhs)
            .expect("algebra elements over different point spaces")
    }
}

impl Mul for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: Self) -> AlgebraElement {
        product(self, rhs).expect("algebra elements over different point spaces")
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::Sampler;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unit_is_all_ones() {
        let s1 = PointSpace::new(1).unwrap();
        assert_eq!(unit(s1).values(), &[c(1.0, 0.0)]);
        let s3 = PointSpace::new(3).unwrap();
        assert_eq!(unit(s3).values(), &[c(1.0, 0.0); 3]);
        assert!(PointSpace::new(0).is_err());
    }

    #[test]
    fn unit_law_and_commutativity() {
        let space = PointSpace::new(4).unwrap();
        let mut rng = Sampler::new(7, "calgebra");
        for _ in 0..100 {
            let a = rng.algebra_element(space);
            let b = rng.algebra_element(space);
            assert!(product(&unit(space), &a).unwrap().distance(&a) <= 1e-15);
            assert_eq!(&a * &b, &b * &a);
        }
    }

    #[test]
    fn pointwise_products() {
        let p = product(
            &AlgebraElement::from_real(&[2.0, 0.0]),
            &AlgebraElement::from_real(&[3.0, 5.0]),
        )
        .unwrap();
        assert_eq!(p, AlgebraElement::from_real(&[6.0, 0.0]));
        let a = AlgebraElement::from_values(vec![c(0.0, 1.0), c(1.0, 0.0)]);
        assert_eq!(
            product(&a, &a).unwrap(),
            AlgebraElement::from_real(&[-1.0, 1.0])
        );
        assert!(product(&a, &AlgebraElement::from_real(&[1.0])).is_err());
    }

    #[test]
    fn star_properties() {
        let a = AlgebraElement::from_values(vec![c(0.0, 1.0)]);
        assert_eq!(star(&a).values(), &[c(0.0, -1.0)]);
        let space = PointSpace::new(3).unwrap();
        assert_eq!(star(&unit(space)), unit(space));
        let mut rng = Sampler::new(8, "star");
        for _ in 0..50 {
            let a = rng.algebra_element(space);
            let b = rng.algebra_element(space);
            assert!(star(&(&a * &b)).distance(&(&star(&a) * &star(&b))) <= 1e-15);
            assert_eq!(star(&star(&a)), a);
        }
    }

    #[test]
    fn invert_cases() {
        let inv = invert(&AlgebraElement::from_real(&[2.0, -1.0]), DEFAULT_INVERT_TOL).unwrap();
        assert_eq!(inv, AlgebraElement::from_real(&[0.5, -1.0]));
        let space = PointSpace::new(2).unwrap();
        assert_eq!(
            invert(&unit(space), DEFAULT_INVERT_TOL).unwrap(),
            unit(space)
        );
        let err = invert(&AlgebraElement::from_real(&[1.0, 0.0]), DEFAULT_INVERT_TOL).unwrap_err();
        assert!(matches!(err, Error::NotInvertible { index: 1, .. }));
    }

    #[test]
    fn positivity_and_norm() {
        assert!(is_positive(&AlgebraElement::from_real(&[0.0, 3.0]), 1e-12));
        assert!(!is_positive(
            &AlgebraElement::from_real(&[-1.0, 2.0]),
            1e-12
        ));
        assert!(!is_positive(
            &AlgebraElement::from_values(vec![c(1.0, 0.5)]),
            1e-12
        ));
        let a = AlgebraElement::from_values(vec![c(3.0, 0.0), c(0.0, -4.0)]);
        assert_eq!(sup_norm(&a), 4.0);
        assert_eq!(sup_norm(&unit(PointSpace::new(5).unwrap())), 1.0);
    }

    #[test]
    fn json_is_pair_array() {
        let a = AlgebraElement::from_values(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        assert_eq!(serde_json::to_string(&a).unwrap(), "[[1.0,0.0],[0.0,1.0]]");
        let back: AlgebraElement = serde_json::from_str("[[1.0,0.0],[0.0,1.0]]").unwrap();
        assert_eq!(back, a);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn element(k: usize) -> impl Strategy<Value = AlgebraElement> {
            prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), k).prop_map(|v| {
                AlgebraElement::from_values(v.into_iter().map(|(r, i)| c(r, i)).collect())
            })
        }

        proptest! {
            #[test]
            fn ring_laws((a, b, d) in (element(3), element(3), element(3))) {
                let assoc = (&(&a * &b) * &d).distance(&(&a * &(&b * &d)));
                let distr = (&a * &(&b + &d)).distance(&(&(&a * &b) + &(&a * &d)));
                prop_assert!(assoc <= 1e-12);
                prop_assert!(distr <= 1e-12);
                prop_assert!((&a * &b).distance(&(&b * &a)) <= 1e-12);
            }

            #[test]
            fn c_star_identity(a in element(4)) {
                let lhs = sup_norm(&(&star(&a) * &a));
                let rhs = sup_norm(&a).powi(2);
                prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
            }

            #[test]
            fn submultiplicative((a, b) in (element(3), element(3))) {
                prop_assert!(sup_norm(&(&a * &b)) <= sup_norm(&a) * sup_norm(&b) * (1.0 + 1e-12));
            }

            #[test]
            fn double_inverse(a in element(3)) {
                prop_assume!(a.values().iter().all(|v| v.norm() > 1e-3));
                let back = invert(&invert(&a, DEFAULT_INVERT_TOL).unwrap(), DEFAULT_INVERT_TOL).unwrap();
                prop_assert!(back.distance(&a) <= 1e-12 * sup_norm(&a).max(1.0));
                let one = &a * &invert(&a, DEFAULT_INVERT_TOL).unwrap();
                prop_assert!(one.distance(&unit(a.space())) <= 1e-12);
            }
        }
    }
}
