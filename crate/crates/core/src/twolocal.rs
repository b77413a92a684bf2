//! 2-local derivations: pairwise implementer feasibility, certification of
//! finite tables, the additivity / homogeneity / Jordan consequence checks and
//! the upper-triangular negative control.
//!
//! On block models every derivation is inner, so pairs are solved over
//! commutators `[T, .]`. On other algebras the caller supplies the derivation
//! space explicitly (see [`ImplementerSpace`]).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cjson;
use crate::dersolve::{leibniz_nullspace, ConcreteAlgebra, LinearMapOnAlgebra};
use crate::error::{Error, Result};
use crate::linalg;
use crate::sample::Sampler;

/// Relative distance under which two table keys are the same point.
const KEY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointEntry {
    #[serde(with = "cjson::dvector")]
    pub at: DVector<Complex64>,
    #[serde(with = "cjson::dvector")]
    pub value: DVector<Complex64>,
}

/// A finite table `A -> delta(A)`; `delta` is not assumed linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<PointEntry>", into = "Vec<PointEntry>")]
pub struct PointMap {
    dim: usize,
    entries: Vec<PointEntry>,
}

impl TryFrom<Vec<PointEntry>> for PointMap {
    type Error = Error;

    fn try_from(entries: Vec<PointEntry>) -> Result<Self> {
        let dim = entries.first().map_or(0, |e| e.at.len());
        let mut map = PointMap::new(dim);
        for e in entries {
            map.insert(e.at, e.value)?;
        }
        Ok(map)
    }
}

impl From<PointMap> for Vec<PointEntry> {
    fn from(m: PointMap) -> Self {
        m.entries
    }
}

fn same_point(a: &DVector<Complex64>, b: &DVector<Complex64>) -> bool {
    (a - b).norm() <= KEY_TOL * (1.0 + a.norm())
}

impl PointMap {
    pub fn new(dim: usize) -> Self {
        PointMap {
            dim,
            entries: Vec::new(),
        }
    }

    /// Table of `f` on `points`, skipping repeated points.
    pub fn from_fn(
        dim: usize,
        points: &[DVector<Complex64>],
        f: impl Fn(&DVector<Complex64>) -> DVector<Complex64>,
    ) -> Result<Self> {
        let mut map = PointMap::new(dim);
        for p in points {
            if map.get(p).is_none() {
                map.insert(p.clone(), f(p))?;
            }
        }
        Ok(map)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Inserts or overwrites the value at `at`.
    pub fn insert(&mut self, at: DVector<Complex64>, value: DVector<Complex64>) -> Result<()> {
        if at.len() != self.dim || value.len() != self.dim {
            return Err(Error::mismatch(self.dim, (at.len(), value.len())));
        }
        match self.entries.iter_mut().find(|e| same_point(&e.at, &at)) {
            Some(e) => e.value = value,
            None => self.entries.push(PointEntry { at, value }),
        }
        Ok(())
    }

    pub fn get(&self, at: &DVector<Complex64>) -> Option<&DVector<Complex64>> {
        self.entries
            .iter()
            .find(|e| same_point(&e.at, at))
            .map(|e| &e.value)
    }

    pub fn point(&self, i: usize) -> (&DVector<Complex64>, &DVector<Complex64>) {
        let e = &self.entries[i];
        (&e.at, &e.value)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DVector<Complex64>, &DVector<Complex64>)> {
        self.entries.iter().map(|e| (&e.at, &e.value))
    }
}

/// Where pairwise implementers are searched.
#[derive(Debug, Clone, Copy)]
pub enum ImplementerSpace<'a> {
    /// Inner derivations `[T, .]`; complete for block models.
    Inner,
    /// Linear combinations of the given derivations.
    Span(&'a [LinearMapOnAlgebra]),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PairOutcome {
    /// `implementer` holds the coordinates of `T` for [`ImplementerSpace::Inner`]
    /// and the combination coefficients for [`ImplementerSpace::Span`].
    Feasible {
        implementer: DVector<Complex64>,
        residual: f64,
    },
    Infeasible {
        residual: f64,
    },
}

impl PairOutcome {
    pub fn residual(&self) -> f64 {
        match self {
            PairOutcome::Feasible { residual, .. } | PairOutcome::Infeasible { residual } => {
                *residual
            }
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, PairOutcome::Feasible { .. })
    }
}

/// Least-squares solve of `d(A) = dA`, `d(B) = dB` for one `d` in `space`.
pub fn pairwise_implementer(
    alg: &ConcreteAlgebra,
    space: ImplementerSpace<'_>,
    a: &DVector<Complex64>,
    da: &DVector<Complex64>,
    b: &DVector<Complex64>,
    db: &DVector<Complex64>,
    tol: f64,
) -> PairOutcome {
    let n = alg.dim();
    let system = match space {
        ImplementerSpace::Inner => {
            let mut m = DMatrix::zeros(2 * n, n);
            m.rows_mut(0, n)
                .copy_from(&(alg.right_matrix(a) - alg.left_matrix(a)));
            m.rows_mut(n, n)
                .copy_from(&(alg.right_matrix(b) - alg.left_matrix(b)));
            m
        }
        ImplementerSpace::Span(basis) => DMatrix::from_fn(2 * n, basis.len(), |r, c| {
            if r < n {
                basis[c].apply(a)[r]
            } else {
                basis[c].apply(b)[r - n]
            }
        }),
    };
    let mut rhs = DVector::zeros(2 * n);
    rhs.rows_mut(0, n).copy_from(da);
    rhs.rows_mut(n, n).copy_from(db);
    let ls = linalg::least_squares(&system, &rhs);
    if ls.residual <= tol {
        PairOutcome::Feasible {
            implementer: ls.solution,
            residual: ls.residual,
        }
    } else {
        PairOutcome::Infeasible {
            residual: ls.residual,
        }
    }
}

/// Every unordered pair `(i, j)` with `i <= j` of `0..n`.
pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResidual {
    pub pair: (usize, usize),
    pub residual: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwoLocalVerdict {
    ConsistentWith2Local,
    Rejected,
    /// No pairs were checked.
    Vacuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoLocalReport {
    pub pairs: Vec<PairResidual>,
    pub verdict: TwoLocalVerdict,
}

impl TwoLocalReport {
    pub fn max_residual(&self) -> f64 {
        self.pairs.iter().map(|p| p.residual).fold(0.0, f64::max)
    }
}

/// Pairwise feasibility over `pairs` of table indices.
///
/// A rejected table is certainly not a 2-local derivation; a consistent one is
/// only known to be 2-local on the checked pairs.
pub fn certify_2local(
    alg: &ConcreteAlgebra,
    delta: &PointMap,
    pairs: &[(usize, usize)],
    space: ImplementerSpace<'_>,
    tol: f64,
) -> Result<TwoLocalReport> {
    if delta.dim() != alg.dim() && !delta.is_empty() {
        return Err(Error::mismatch(alg.dim(), delta.dim()));
    }
    let mut out = Vec::with_capacity(pairs.len());
    for &(i, j) in pairs {
        if i >= delta.len() || j >= delta.len() {
            return Err(Error::InvalidConfig(format!(
                "pair ({i}, {j}) outside a table of {} points",
                delta.len()
            )));
        }
        let (a, da) = delta.point(i);
        let (b, db) = delta.point(j);
        let outcome = pairwise_implementer(alg, space, a, da, b, db, tol);
        out.push(PairResidual {
            pair: (i, j),
            residual: outcome.residual(),
            feasible: outcome.is_feasible(),
        });
    }
    let verdict = if out.is_empty() {
        TwoLocalVerdict::Vacuous
    } else if out.iter().all(|p| p.feasible) {
        TwoLocalVerdict::ConsistentWith2Local
    } else {
        TwoLocalVerdict::Rejected
    };
    Ok(TwoLocalReport {
        pairs: out,
        verdict,
    })
}

/// Points `A`, `B` and scalar `lambda` for the consequence checks; the table
/// must also hold `A + B`, `lambda A` and `A^2`.
#[derive(Debug, Clone)]
pub struct ConsequenceProbe {
    pub a: DVector<Complex64>,
    pub b: DVector<Complex64>,
    pub lambda: Complex64,
}

impl ConsequenceProbe {
    pub fn random(rng: &mut Sampler, dim: usize) -> Self {
        ConsequenceProbe {
            a: rng.vector(dim),
            b: rng.vector(dim),
            lambda: rng.complex(),
        }
    }

    pub fn points(&self, alg: &ConcreteAlgebra) -> [DVector<Complex64>; 5] {
        [
            self.a.clone(),
            self.b.clone(),
            &self.a + &self.b,
            &self.a * self.lambda,
            alg.mul(&self.a, &self.a),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsequenceReport {
    pub additivity: f64,
    pub homogeneity: f64,
    pub jordan: f64,
}

impl ConsequenceReport {
    pub fn max(&self) -> f64 {
        self.additivity.max(self.homogeneity).max(self.jordan)
    }
}

/// Largest additivity, homogeneity and Jordan defects over the probes.
pub fn consequence_check(
    alg: &ConcreteAlgebra,
    delta: &PointMap,
    probes: &[ConsequenceProbe],
) -> Result<ConsequenceReport> {
    let lookup = |p: &DVector<Complex64>, what: &str| {
        delta
            .get(p)
            .ok_or_else(|| Error::MissingProbe(format!("table has no value at {what}")))
    };
    let mut rep = ConsequenceReport {
        additivity: 0.0,
        homogeneity: 0.0,
        jordan: 0.0,
    };
    for p in probes {
        let [a, b, sum, scaled, square] = p.points(alg);
        let da = lookup(&a, "A")?;
        let db = lookup(&b, "B")?;
        let dsum = lookup(&sum, "A+B")?;
        let dscaled = lookup(&scaled, "lambda A")?;
        let dsquare = lookup(&square, "A^2")?;
        rep.additivity = rep.additivity.max((dsum - da - db).norm());
        rep.homogeneity = rep.homogeneity.max((dscaled - da * p.lambda).norm());
        let jordan = dsquare - alg.mul(&a, da) - alg.mul(da, &a);
        rep.jordan = rep.jordan.max(jordan.norm());
    }
    Ok(rep)
}

/// Canonical basis points followed by every consequence probe point.
pub fn probe_points(alg: &ConcreteAlgebra, probes: &[ConsequenceProbe]) -> Vec<DVector<Complex64>> {
    let mut pts: Vec<_> = (0..alg.dim()).map(|i| alg.basis_vector(i)).collect();
    for p in probes {
        pts.extend(p.points(alg));
    }
    pts
}

/// Upper-triangular 2x2 matrices with basis `E11, E12, E22`.
pub fn upper_triangular_algebra() -> ConcreteAlgebra {
    let one = Complex64::new(1.0, 0.0);
    let mut c = vec![Complex64::new(0.0, 0.0); 27];
    let idx = |i: usize, j: usize, m: usize| (i * 3 + j) * 3 + m;
    c[idx(0, 0, 0)] = one; // E11 E11 = E11
    c[idx(0, 1, 1)] = one; // E11 E12 = E12
    c[idx(1, 2, 1)] = one; // E12 E22 = E12
    c[idx(2, 2, 2)] = one; // E22 E22 = E22
    let unit = DVector::from_vec(vec![one, Complex64::new(0.0, 0.0), one]);
    ConcreteAlgebra::new(3, c, unit).expect("upper-triangular algebra is valid")
}

/// A table on the upper-triangular algebra that is 2-local on every pair but
/// not additive.
#[derive(Debug, Clone)]
pub struct NegativeControl {
    pub table: PointMap,
    pub report: TwoLocalReport,
    pub consequences: ConsequenceReport,
    /// `theta_1 .. theta_4` of the winning candidate.
    pub parameters: [Complex64; 4],
    pub attempts: usize,
}

/// Candidate `delta(X) = phi(u) E12` with `u = (x12, x22 - x11)` and
/// `phi(u) = (t1 u1^2 + t2 u2^2) / (t3 u1 + t4 u2)`, zero where the denominator
/// vanishes.
fn t2_candidate(t: &[Complex64; 4], x: &DVector<Complex64>) -> DVector<Complex64> {
    let (u1, u2) = (x[1], x[2] - x[0]);
    let den = t[2] * u1 + t[3] * u2;
    let phi = if den.norm() <= 1e-300 {
        Complex64::new(0.0, 0.0)
    } else {
        (t[0] * u1 * u1 + t[1] * u2 * u2) / den
    };
    DVector::from_vec(vec![
        Complex64::new(0.0, 0.0),
        phi,
        Complex64::new(0.0, 0.0),
    ])
}

/// Seeded search for a non-additive table that passes 2-local certification
/// against the full derivation space of the upper-triangular algebra.
///
/// Exploratory: exhausting `budget` candidates returns
/// [`Error::SearchBudgetExceeded`] rather than asserting nonexistence.
pub fn t2_negative_control(tol: f64, seed: u64, budget: usize) -> Result<NegativeControl> {
    let alg = upper_triangular_algebra();
    let derivations = leibniz_nullspace(&alg, linalg::DEFAULT_RANK_TOL)?.basis;
    let mut rng = Sampler::new(seed, "t2-control");
    for attempt in 0..budget {
        let params = [rng.complex(), rng.complex(), rng.complex(), rng.complex()];
        let probes: Vec<_> = (0..4)
            .map(|_| ConsequenceProbe::random(&mut rng, 3))
            .collect();
        let table = PointMap::from_fn(3, &probe_points(&alg, &probes), |x| {
            t2_candidate(&params, x)
        })?;
        let report = certify_2local(
            &alg,
            &table,
            &all_pairs(table.len()),
            ImplementerSpace::Span(&derivations),
            tol,
        )?;
        let consequences = consequence_check(&alg, &table, &probes)?;
        if report.verdict == TwoLocalVerdict::ConsistentWith2Local && consequences.additivity >= 0.1
        {
            return Ok(NegativeControl {
                table,
                report,
                consequences,
                parameters: params,
                attempts: attempt + 1,
            });
        }
    }
    Err(Error::SearchBudgetExceeded { budget })
}
