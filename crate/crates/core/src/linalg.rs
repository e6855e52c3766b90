//! Complex linear-algebra kernels shared by the precoders, metrics and
//! validators.
//!
//! Everything here is a thin, pure layer over `nalgebra` with the numerical
//! contracts the rest of the crate relies on: a full-width SVD null space,
//! Gram-based orthogonal projectors with a conditioning guard, descending
//! Hermitian spectra, and a Cholesky solve for the regularized DVSINR system.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

/// Singular values at or below this fraction of the largest one count as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Condition number of `A^H A` above which a projector is refused.
pub const MAX_GRAM_CONDITION: f64 = 1e12;

const HERMITIAN_TOL: f64 = 1e-10;

/// Orthonormal basis of `Sp(A)^⊥`, i.e. of the null space of `A^H`.
#[derive(Debug, Clone)]
pub struct NullSpace {
    pub basis: CMatrix,
    pub rank: usize,
    /// Set when a singular value sits within two decades of the rank cut.
    /// The value is still treated as zero if it is below the cut.
    pub ambiguous: bool,
}

impl NullSpace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

/// Builds an `nrows x columns.len()` matrix from column vectors.
pub fn from_columns(columns: &[&CVector]) -> CMatrix {
    let rows = columns.first().map_or(0, |c| c.len());
    CMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i])
}

pub fn null_space_basis(a: &CMatrix) -> NullSpace {
    let nt = a.nrows();
    let m = a.ncols();
    // The SVD only returns min(rows, cols) left vectors, so pad to square to
    // get the full unitary U.
    let square = if m < nt {
        let mut s = CMatrix::zeros(nt, nt);
        s.columns_mut(0, m).copy_from(a);
        s
    } else {
        a.clone()
    };
    let svd = square.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    let tol = RANK_TOL * smax;

    let mut rank = 0;
    let mut ambiguous = false;
    let mut null_cols = Vec::new();
    for (i, &s) in sv.iter().enumerate() {
        if s > tol * 1e-2 && s < tol * 1e2 {
            ambiguous = true;
        }
        if s > tol {
            rank += 1;
        } else {
            null_cols.push(i);
        }
    }
    // Left vectors beyond the singular-value count (only when m > nt, which
    // cannot happen with the padding above) would also be null directions.
    for i in sv.len()..u.ncols() {
        null_cols.push(i);
    }
    let basis = CMatrix::from_fn(nt, null_cols.len(), |r, c| u[(r, null_cols[c])]);
    NullSpace {
        basis,
        rank,
        ambiguous,
    }
}

/// Orthogonal projectors onto `Sp(A)` and its complement:
/// `P = A (A^H A)^{-1} A^H`, `Q = I - P`.
pub fn projectors(a: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let nt = a.nrows();
    let ah = a.adjoint();
    let gram = &ah * a;
    let eig = hermitian_eigvals(&gram)?;
    let (hi, lo) = (eig[0], eig[eig.len() - 1]);
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if cond.is_nan() || cond > MAX_GRAM_CONDITION {
        return Err(Error::RankDeficient(cond));
    }
    let chol = Cholesky::new(gram).ok_or(Error::RankDeficient(cond))?;
    let x = chol.solve(&ah);
    let p = a * x;
    let p = (&p + p.adjoint()) * Complex64::new(0.5, 0.0);
    let q = CMatrix::identity(nt, nt) - &p;
    Ok((p, q))
}

/// Jain's fairness index `(sum x)^2 / (n sum x^2)`.
pub fn jain_index(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::UndefinedFairness);
    }
    if x.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidFairnessInput);
    }
    let sum: f64 = x.iter().sum();
    let sum_sq: f64 = x.iter().map(|v| v * v).sum();
    if sum_sq == 0.0 {
        return Err(Error::UndefinedFairness);
    }
    let j = sum * sum / (x.len() as f64 * sum_sq);
    Ok(j.clamp(1.0 / x.len() as f64, 1.0))
}

/// `|<a, b>| / (‖a‖ ‖b‖)`, the cosine of the angle between two channels.
pub fn correlation_coeff(a: &CVector, b: &CVector) -> Result<f64> {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((a.dotc(b).norm() / (na * nb)).min(1.0))
}

fn hermitian_asymmetry(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Real eigenvalues of a Hermitian matrix, largest first.
pub fn hermitian_eigvals(a: &CMatrix) -> Result<Vec<f64>> {
    assert!(a.is_square(), "hermitian_eigvals needs a square matrix");
    let scale = a.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    let asym = hermitian_asymmetry(a);
    if asym > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(asym));
    }
    let eig = SymmetricEigen::<Complex64, Dyn>::new(a.clone());
    let mut vals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    vals.sort_by(|x, y| y.total_cmp(x));
    Ok(vals)
}

/// Largest eigenvalue of `A^H A`, i.e. the squared spectral norm of `A`.
pub fn lambda_max_gram(a: &CMatrix) -> f64 {
    if a.ncols() == 0 {
        return 0.0;
    }
    let gram = a.adjoint() * a;
    hermitian_eigvals(&gram).map(|v| v[0].max(0.0)).unwrap_or(0.0)
}

pub fn abs_det(a: &CMatrix) -> f64 {
    assert!(a.is_square(), "abs_det needs a square matrix");
    if a.nrows() == 0 {
        return 1.0;
    }
    a.clone().determinant().norm()
}

/// Solves `C x = b` for Hermitian positive-definite `C`.
pub fn solve_hpd(c: &CMatrix, b: &CVector) -> Result<CVector> {
    let chol = Cholesky::new(c.clone()).ok_or(Error::NotPositiveDefinite)?;
    Ok(chol.solve(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
        CMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| c(x, 0.0)))
    }

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn null_space_of_first_axis() {
        let a = real_matrix(3, 1, &[1.0, 0.0, 0.0]);
        let ns = null_space_basis(&a);
        assert_eq!(ns.dim(), 2);
        assert_eq!(ns.rank, 1);
        // Both basis vectors live in span{e2, e3}.
        for j in 0..2 {
            assert!(ns.basis[(0, j)].norm() < 1e-12);
        }
        let gram = ns.basis.adjoint() * &ns.basis;
        assert!(max_abs(&(gram - CMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn null_space_of_two_axes_is_e3() {
        let a = real_matrix(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let ns = null_space_basis(&a);
        assert_eq!(ns.dim(), 1);
        assert_relative_eq!(ns.basis[(2, 0)].norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn null_space_random_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a = random_matrix(&mut rng, 4, 2);
            let ns = null_space_basis(&a);
            assert_eq!(ns.dim(), 2);
            assert!(!ns.ambiguous);
            assert!(max_abs(&(a.adjoint() * &ns.basis)) < 1e-10);
            let gram = ns.basis.adjoint() * &ns.basis;
            assert!(max_abs(&(gram - CMatrix::identity(2, 2))) < 1e-10);
        }
    }

    #[test]
    fn null_space_flags_near_rank_deficiency() {
        // Second column is the first plus a perturbation right at the cut.
        let mut a = real_matrix(3, 2, &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        a[(1, 1)] = c(1e-10, 0.0);
        let ns = null_space_basis(&a);
        assert!(ns.ambiguous);
    }

    #[test]
    fn null_space_of_zero_matrix_is_everything() {
        let a = CMatrix::zeros(3, 1);
        let ns = null_space_basis(&a);
        assert_eq!(ns.dim(), 3);
        assert_eq!(ns.rank, 0);
    }

    #[test]
    fn projector_of_first_axis() {
        let a = real_matrix(2, 1, &[1.0, 0.0]);
        let (p, q) = projectors(&a).unwrap();
        assert!(max_abs(&(p - real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.0]))) < 1e-15);
        assert!(max_abs(&(q - real_matrix(2, 2, &[0.0, 0.0, 0.0, 1.0]))) < 1e-15);
    }

    #[test]
    fn projector_of_orthonormal_columns_is_uu_h() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(&mut rng, 4, 2);
        let u = a.clone().qr().q();
        let (p, _) = projectors(&u).unwrap();
        assert!(max_abs(&(p - &u * u.adjoint())) < 1e-12);
    }

    #[test]
    fn projector_properties_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let a = random_matrix(&mut rng, 3, 2);
            let (p, q) = projectors(&a).unwrap();
            assert!(max_abs(&(&p * &p - &p)) < 1e-9);
            assert!(max_abs(&(&p - p.adjoint())) < 1e-12);
            assert!(max_abs(&(&q * &a)) < 1e-9);
            assert!(max_abs(&(&p * &a - &a)) < 1e-9);
        }
    }

    #[test]
    fn projector_q_matches_null_space_outer_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (nt, m) in [(3, 1), (4, 2), (6, 3), (8, 3)] {
            let a = random_matrix(&mut rng, nt, m);
            let (_, q) = projectors(&a).unwrap();
            let v = null_space_basis(&a).basis;
            assert!(max_abs(&(q - &v * v.adjoint())) < 1e-8);
        }
    }

    #[test]
    fn projector_rejects_rank_deficient_input() {
        let a = real_matrix(3, 2, &[1.0, 2.0, 1.0, 2.0, 0.0, 0.0]);
        assert!(matches!(projectors(&a), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn jain_examples() {
        assert_relative_eq!(jain_index(&[1.0, 1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert_relative_eq!(jain_index(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 0.25);
        assert_relative_eq!(jain_index(&[2.0, 1.0, 1.0]).unwrap(), 16.0 / 18.0, epsilon = 1e-15);
        assert_eq!(jain_index(&[0.0, 0.0]), Err(Error::UndefinedFairness));
        assert_eq!(jain_index(&[1.0, -1.0]), Err(Error::InvalidFairnessInput));
    }

    #[test]
    fn correlation_examples() {
        let v = |a: f64, b: f64| CVector::from_vec(vec![c(a, 0.0), c(b, 0.0)]);
        assert_eq!(correlation_coeff(&v(1.0, 0.0), &v(0.0, 1.0)).unwrap(), 0.0);
        assert_relative_eq!(correlation_coeff(&v(1.0, 0.0), &v(1.0, 0.0)).unwrap(), 1.0);
        assert_relative_eq!(
            correlation_coeff(&v(1.0, 1.0), &v(1.0, 0.0)).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-15
        );
        assert_eq!(correlation_coeff(&v(0.0, 0.0), &v(1.0, 0.0)), Err(Error::ZeroVector));
    }

    #[test]
    fn eigvals_examples() {
        let d = real_matrix(2, 2, &[1.0, 0.0, 0.0, 3.0]);
        assert_eq!(hermitian_eigvals(&d).unwrap(), vec![3.0, 1.0]);
        let i4 = CMatrix::identity(4, 4);
        for v in hermitian_eigvals(&i4).unwrap() {
            assert_relative_eq!(v, 1.0, epsilon = 1e-14);
        }
        let mut nh = CMatrix::identity(2, 2);
        nh[(0, 1)] = c(0.5, 0.0);
        assert!(matches!(hermitian_eigvals(&nh), Err(Error::NotHermitian(_))));
    }

    /// Roots of the characteristic polynomial of a 3x3 Hermitian matrix,
    /// found by bisection on det(A - x I) between Gershgorin bounds.
    fn charpoly_roots_3x3(a: &CMatrix) -> Vec<f64> {
        let det3 = |x: f64| {
            let m = |i: usize, j: usize| a[(i, j)] - if i == j { c(x, 0.0) } else { c(0.0, 0.0) };
            (m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
                - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0)))
            .re
        };
        let bound = (0..3)
            .map(|i| (0..3).map(|j| a[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
            + 1.0;
        // Scan for sign changes then bisect.
        let steps = 200_000;
        let mut roots = Vec::new();
        let mut prev_x = -bound;
        let mut prev = det3(prev_x);
        for s in 1..=steps {
            let x = -bound + 2.0 * bound * s as f64 / steps as f64;
            let val = det3(x);
            if prev == 0.0 || prev.signum() != val.signum() {
                let (mut lo, mut hi) = (prev_x, x);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if det3(lo).signum() == det3(mid).signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            prev_x = x;
            prev = val;
        }
        roots.sort_by(|x, y| y.total_cmp(x));
        roots
    }

    #[test]
    fn eigvals_match_characteristic_polynomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let r = random_matrix(&mut rng, 3, 3);
            let h = &r + r.adjoint();
            let roots = charpoly_roots_3x3(&h);
            let eig = hermitian_eigvals(&h).unwrap();
            assert_eq!(roots.len(), 3);
            for (x, y) in roots.iter().zip(&eig) {
                assert!((x - y).abs() < 1e-8, "{roots:?} vs {eig:?}");
            }
            let trace: f64 = (0..3).map(|i| h[(i, i)].re).sum();
            assert!((eig.iter().sum::<f64>() - trace).abs() <= 1e-8 * trace.abs().max(1.0));
        }
    }

    fn cofactor_det(a: &CMatrix) -> Complex64 {
        let n = a.nrows();
        if n == 1 {
            return a[(0, 0)];
        }
        let mut total = c(0.0, 0.0);
        for j in 0..n {
            let minor = CMatrix::from_fn(n - 1, n - 1, |r, s| a[(r + 1, if s < j { s } else { s + 1 })]);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            total += a[(0, j)] * cofactor_det(&minor) * sign;
        }
        total
    }

    #[test]
    fn abs_det_examples() {
        assert_relative_eq!(abs_det(&CMatrix::identity(3, 3)), 1.0);
        assert_relative_eq!(abs_det(&real_matrix(2, 2, &[2.0, 0.0, 0.0, 0.5])), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let a = random_matrix(&mut rng, 3, 3);
            let oracle = cofactor_det(&a).norm();
            assert!((abs_det(&a) - oracle).abs() <= 1e-9 * oracle.max(1e-300));
        }
    }

    #[test]
    fn hpd_solve_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 2..=8 {
            let a = random_matrix(&mut rng, n, n);
            let cmat = &a * a.adjoint() + CMatrix::identity(n, n) * c(0.1, 0.0);
            let b = random_matrix(&mut rng, n, 1).column(0).into_owned();
            let x = solve_hpd(&cmat, &b).unwrap();
            assert!((&cmat * &x - &b).norm() < 1e-10 * b.norm());
        }
    }

    #[test]
    fn lambda_max_gram_matches_spectral_norm() {
        let a = real_matrix(2, 2, &[0.0, 1.0 / 2f64.sqrt(), 1.0, 1.0 / 2f64.sqrt()]);
        assert_relative_eq!(lambda_max_gram(&a), 1.0 + 1.0 / 2f64.sqrt(), epsilon = 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn jain_bounds(x in proptest::collection::vec(0.0f64..10.0, 1..12)) {
            proptest::prop_assume!(x.iter().any(|v| *v > 0.0));
            let j = jain_index(&x).unwrap();
            let n = x.len() as f64;
            proptest::prop_assert!(j >= 1.0 / n - 1e-15 && j <= 1.0 + 1e-15);
        }

        #[test]
        fn jain_is_one_for_constant_vectors(v in 1e-3f64..1e3, n in 1usize..16) {
            let j = jain_index(&vec![v; n]).unwrap();
            proptest::prop_assert!((j - 1.0).abs() < 1e-12);
        }
    }
}
