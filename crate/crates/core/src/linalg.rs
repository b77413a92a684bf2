//! SVD-based nullspaces and least squares over complex matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default relative cut for rank decisions: `sigma < 1e-9 * sigma_max` is zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Smallest singular-value ratio across the cut that still counts as a clear gap.
pub const MIN_GAP_RATIO: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct Nullspace {
    /// Orthonormal, sign-fixed basis vectors.
    pub basis: Vec<DVector<Complex64>>,
    /// Singular values in descending order.
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// `sigma_rank / sigma_{rank+1}`; infinite when one side of the cut is empty
    /// or the discarded values are exactly zero.
    pub gap_ratio: f64,
}

/// Singular values (descending) with the full `U` and `V` factors.
///
/// The decomposition is delegated to faer; nalgebra's bidiagonal SVD loses
/// accuracy on the clustered and exactly-zero spectra of commutator systems.
struct Svd {
    sigma: Vec<f64>,
    u: faer::Mat<Complex64>,
    v: faer::Mat<Complex64>,
}

fn svd(a: &DMatrix<Complex64>) -> Svd {
    let (m, n) = a.shape();
    let fa = faer::Mat::<Complex64>::from_fn(m, n, |i, j| a[(i, j)]);
    let dec = fa.svd().expect("SVD iteration converged");
    let sigma = dec.S().column_vector().iter().map(|z| z.re).collect();
    Svd {
        sigma,
        u: dec.U().to_owned(),
        v: dec.V().to_owned(),
    }
}

/// Rotate `v` by a unit phase so its largest-modulus coordinate (first on ties)
/// is real and positive.
pub fn sign_fix(v: &mut DVector<Complex64>) {
    let mut best = 0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > v[best].norm() * (1.0 + 1e-12) {
            best = i;
        }
    }
    let pivot = v[best];
    if pivot.norm() > 0.0 {
        let phase = pivot.conj() / pivot.norm();
        v.iter_mut().for_each(|z| *z *= phase);
        v[best] = Complex64::new(v[best].re, 0.0);
    }
}

/// Orthonormal basis of `{x : a x = 0}`.
///
/// Singular values below `rel_tol * sigma_max` are treated as zero. The call
/// refuses with [`Error::RankAmbiguous`] when the cut falls inside floating-point
/// noise (`rel_tol` below `max(m, n) * eps`) or when the singular values on the
/// two sides of the cut differ by less than [`MIN_GAP_RATIO`].
pub fn nullspace(a: &DMatrix<Complex64>, rel_tol: f64) -> Result<Nullspace> {
    let n = a.ncols();
    let noise = a.nrows().max(n) as f64 * f64::EPSILON;
    if rel_tol.is_nan() || rel_tol <= 0.0 {
        return Err(Error::RankAmbiguous {
            reason: format!("tolerance {rel_tol:e} is not positive"),
        });
    }
    if rel_tol < noise {
        return Err(Error::RankAmbiguous {
            reason: format!("relative tolerance {rel_tol:e} is below the noise floor {noise:e} of a {}x{} system", a.nrows(), n),
        });
    }
    let rank_of = |sigma: &[f64]| {
        let sigma_max = sigma.first().copied().unwrap_or(0.0);
        if sigma_max == 0.0 {
            0
        } else {
            sigma
                .iter()
                .take_while(|&&s| s >= rel_tol * sigma_max)
                .count()
        }
    };
    let Svd { sigma, v, .. } = svd(a);
    let rank = rank_of(&sigma);
    let gap_ratio = if rank == 0 || rank == n || sigma[rank] == 0.0 {
        f64::INFINITY
    } else {
        sigma[rank - 1] / sigma[rank]
    };
    if gap_ratio < MIN_GAP_RATIO {
        return Err(Error::RankAmbiguous {
            reason: format!(
                "singular values {:e} and {:e} straddle the cut (ratio {gap_ratio:.3})",
                sigma[rank - 1],
                sigma[rank]
            ),
        });
    }
    let basis = (rank..n)
        .map(|c| {
            let mut col = DVector::from_fn(n, |r, _| v[(r, c)]);
            sign_fix(&mut col);
            col
        })
        .collect();
    Ok(Nullspace {
        basis,
        singular_values: sigma,
        rank,
        gap_ratio,
    })
}

#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub solution: DVector<Complex64>,
    /// `|a x - b|` at the returned minimizer.
    pub residual: f64,
}

/// Relative singular-value cut of the pseudo-inverse in [`least_squares`].
pub const PINV_RCOND: f64 = 1e-12;

/// Minimum-norm least-squares solution of `a x = b` via the pseudo-inverse;
/// singular values below `PINV_RCOND * sigma_max` are dropped.
pub fn least_squares(a: &DMatrix<Complex64>, b: &DVector<Complex64>) -> LeastSquares {
    if a.ncols() == 0 {
        return LeastSquares {
            solution: DVector::zeros(0),
            residual: b.norm(),
        };
    }
    let Svd { sigma, u, v } = svd(a);
    let cut = PINV_RCOND * sigma.first().copied().unwrap_or(0.0);
    let mut solution = DVector::zeros(a.ncols());
    for (i, &s) in sigma.iter().enumerate() {
        if s <= cut || s == 0.0 {
            break;
        }
        let coef: Complex64 = (0..a.nrows())
            .map(|r| u[(r, i)].conj() * b[r])
            .sum::<Complex64>()
            / s;
        solution += DVector::from_fn(a.ncols(), |r, _| v[(r, i)] * coef);
    }
    let residual = (a * &solution - b).norm();
    LeastSquares { solution, residual }
}

/// Distance from `b` to the column span of `a`.
pub fn span_residual(a: &DMatrix<Complex64>, b: &DVector<Complex64>) -> f64 {
    least_squares(a, b).residual
}
