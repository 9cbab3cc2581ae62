//! Dense complex LU with partial pivoting and overflow-safe determinants.
//!
//! A determinant is never formed as a raw product of pivots. It is carried as a
//! [`DetTriplet`]: a unit-modulus phase, the log of the geometric mean of the pivot
//! moduli, and the order, so that `det = rho * exp(n * log_k)`.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::matrix_io::MatrixHandle;
use crate::scalar::Real;

/// Combined `P M = L U` factors. `L` is unit lower triangular (stored below the
/// diagonal), `U` sits on and above it.
#[derive(Debug, Clone)]
pub struct LuFactors<T> {
    lu: DenseMatrix<T>,
    /// Row `k` was swapped with row `pivots[k]` at step `k`.
    pivots: Vec<usize>,
    signature: i8,
    min_pivot: T,
    norm1: T,
}

impl<T: Real> LuFactors<T> {
    pub fn order(&self) -> usize {
        self.lu.order()
    }

    /// Parity of the row permutation, `+1` or `-1`.
    pub fn signature(&self) -> i8 {
        self.signature
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Smallest pivot modulus encountered.
    pub fn min_pivot(&self) -> T {
        self.min_pivot
    }

    /// One-norm of the factored matrix.
    pub fn input_norm1(&self) -> T {
        self.norm1
    }

    /// True when some pivot fell below `eps * ||M||_1`.
    pub fn small_pivot(&self) -> bool {
        self.min_pivot < T::epsilon() * self.norm1
    }

    pub fn diagonal(&self) -> impl Iterator<Item = Complex<T>> + '_ {
        (0..self.order()).map(move |i| self.lu[(i, i)])
    }

    pub fn lower(&self) -> DenseMatrix<T> {
        let n = self.order();
        let mut l = DenseMatrix::identity(n);
        for j in 0..n {
            for i in j + 1..n {
                l[(i, j)] = self.lu[(i, j)];
            }
        }
        l
    }

    pub fn upper(&self) -> DenseMatrix<T> {
        let n = self.order();
        let mut u = DenseMatrix::zeros(n);
        for j in 0..n {
            for i in 0..=j {
                u[(i, j)] = self.lu[(i, j)];
            }
        }
        u
    }

    /// Applies the recorded row interchanges to `m` in place, giving `P m`.
    pub fn permute_rows(&self, m: &mut DenseMatrix<T>) {
        let n = m.order();
        for (k, &p) in self.pivots.iter().enumerate() {
            if p != k {
                for j in 0..n {
                    let col = m.col_mut(j);
                    col.swap(k, p);
                }
            }
        }
    }

    /// Solves `M x = b`.
    pub fn solve(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.order();
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for (k, &p) in self.pivots.iter().enumerate() {
            x.swap(k, p);
        }
        // L y = P b, unit diagonal; column-oriented.
        for j in 0..n {
            let xj = x[j];
            if xj.is_zero() {
                continue;
            }
            let col = self.lu.col(j);
            for i in j + 1..n {
                x[i] -= col[i] * xj;
            }
        }
        // U x = y
        for j in (0..n).rev() {
            let col = self.lu.col(j);
            x[j] /= col[j];
            let xj = x[j];
            for i in 0..j {
                x[i] -= col[i] * xj;
            }
        }
        x
    }
}

/// Factors `m` with row pivoting on the largest modulus in the active column.
/// Ties go to the lowest row index.
pub fn lu_factor<T: Real>(mut m: DenseMatrix<T>) -> Result<LuFactors<T>> {
    let n = m.order();
    let norm1 = m.one_norm();
    let mut pivots = Vec::with_capacity(n);
    let mut signature = 1i8;
    let mut min_pivot = T::infinity();

    let data = m.as_mut_slice();
    for k in 0..n {
        let col = &data[k * n..(k + 1) * n];
        let mut p = k;
        let mut best = col[k].norm();
        for (i, v) in col.iter().enumerate().skip(k + 1) {
            let a = v.norm();
            if a > best {
                best = a;
                p = i;
            }
        }
        if best.is_nan() || best.is_infinite() {
            return Err(Error::Internal(format!("non-finite entry in column {k}")));
        }
        if best == T::zero() {
            return Err(Error::SingularMatrix { column: k });
        }
        if p != k {
            for j in 0..n {
                data.swap(j * n + k, j * n + p);
            }
            signature = -signature;
        }
        pivots.push(p);
        min_pivot = min_pivot.min(best);

        let inv = Complex::<T>::one() / data[k * n + k];
        for v in &mut data[k * n + k + 1..(k + 1) * n] {
            *v *= inv;
        }
        let (left, right) = data.split_at_mut((k + 1) * n);
        let lcol = &left[k * n + k + 1..(k + 1) * n];
        for rcol in right.chunks_exact_mut(n) {
            let akj = rcol[k];
            if akj.is_zero() {
                continue;
            }
            for (r, l) in rcol[k + 1..].iter_mut().zip(lcol) {
                *r -= *l * akj;
            }
        }
    }

    Ok(LuFactors {
        lu: m,
        pivots,
        signature,
        min_pivot: if n == 0 { T::zero() } else { min_pivot },
        norm1,
    })
}

/// Overflow-safe determinant: `det = rho * exp(n * log_k)` with `|rho| = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetTriplet<T> {
    pub rho: Complex<T>,
    pub log_k: T,
    pub n: usize,
}

impl<T: Real> DetTriplet<T> {
    /// Recomposes the raw determinant. Overflows or underflows whenever the
    /// triplet does not fit the floating-point range; meant for tests and small orders.
    pub fn value(&self) -> Complex<T> {
        self.rho * (T::from_usize_lossy(self.n) * self.log_k).exp()
    }

    /// Natural log of `|det|`.
    pub fn ln_abs(&self) -> T {
        T::from_usize_lossy(self.n) * self.log_k
    }
}

pub fn det_triplet<T: Real>(f: &LuFactors<T>) -> Result<DetTriplet<T>> {
    let n = f.order();
    let mut rho = Complex::new(T::from_i8(f.signature).unwrap_or_else(T::one), T::zero());
    let mut log_sum = T::zero();
    for (i, u) in f.diagonal().enumerate() {
        let m = u.norm();
        if m == T::zero() {
            return Err(Error::SingularMatrix { column: i });
        }
        rho *= u / m;
        log_sum += m.ln();
    }
    // The running product of unit factors drifts by O(n eps); renormalize once.
    let r = rho.norm();
    if r > T::zero() {
        rho /= r;
    }
    Ok(DetTriplet {
        rho,
        log_k: if n == 0 { T::zero() } else { log_sum / T::from_usize_lossy(n) },
        n,
    })
}

/// `det(num) / det(den)`.
///
/// The exponent `n (log_k_num - log_k_den)` is checked against `ln(M_fl)` before
/// exponentiating; past it the ratio is unrepresentable and the caller must
/// subdivide.
pub fn phi_ratio<T: Real>(num: &DetTriplet<T>, den: &DetTriplet<T>) -> Result<Complex<T>> {
    if num.n != den.n {
        return Err(Error::DimensionMismatch(num.n, den.n));
    }
    let exponent = T::from_usize_lossy(num.n) * (num.log_k - den.log_k);
    if !(exponent.abs() < T::ln_max()) {
        return Err(Error::RatioOverflow {
            exponent: exponent.to_f64_lossy(),
        });
    }
    Ok(num.rho / den.rho * exponent.exp())
}

/// Principal argument of `det(num) / det(den)`. Needs only the phases, so it
/// never overflows.
pub fn ratio_arg<T: Real>(num: &DetTriplet<T>, den: &DetTriplet<T>) -> T {
    (num.rho * den.rho.conj()).arg()
}

/// Trace of `M^{-1}` from the factors of `M`, through `2n` triangular solves.
pub fn trace_inverse<T: Real>(f: &LuFactors<T>) -> Result<Complex<T>> {
    let n = f.order();
    if let Some(i) = f.diagonal().position(|u| u.is_zero()) {
        return Err(Error::SingularMatrix { column: i });
    }
    let mut trace = Complex::zero();
    let mut e = vec![Complex::zero(); n];
    for i in 0..n {
        e.iter_mut().for_each(|v| *v = Complex::zero());
        e[i] = Complex::one();
        trace += f.solve(&e)[i];
    }
    Ok(trace)
}

/// `z I - A`.
pub fn shift_matrix<T: Real>(a: &MatrixHandle<T>, z: Complex<T>) -> DenseMatrix<T> {
    let mut m = a.matrix.clone();
    m.as_mut_slice().iter_mut().for_each(|v| *v = -*v);
    m.add_diagonal(z);
    m
}

/// Determinant triplet of `z I - A`, plus the factorization's small-pivot flag.
pub fn shifted_det<T: Real>(a: &MatrixHandle<T>, z: Complex<T>) -> Result<(DetTriplet<T>, bool)> {
    let f = lu_factor(shift_matrix(a, z))?;
    Ok((det_triplet(&f)?, f.small_pivot()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::cofactor_det;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        Complex::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix<f64> {
        let rows: Vec<Vec<C>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect()
            })
            .collect();
        DenseMatrix::from_rows(&rows)
    }

    #[test]
    fn identity_factors() {
        let f = lu_factor(DenseMatrix::<f64>::identity(3)).unwrap();
        assert_eq!(f.signature(), 1);
        assert_eq!(f.lower(), DenseMatrix::identity(3));
        assert_eq!(f.upper(), DenseMatrix::identity(3));
        let t = det_triplet(&f).unwrap();
        assert_eq!(t.rho, c(1.0, 0.0));
        assert_eq!(t.log_k, 0.0);
    }

    #[test]
    fn swap_matrix_pivots_once() {
        let f = lu_factor(DenseMatrix::<f64>::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])).unwrap();
        assert_eq!(f.signature(), -1);
        assert_eq!(f.pivots(), &[1, 1]);
        assert_eq!(f.upper(), DenseMatrix::identity(2));
        let t = det_triplet(&f).unwrap();
        assert_eq!(t.rho, c(-1.0, 0.0));
    }

    #[test]
    fn pivot_tie_prefers_lowest_row() {
        let f = lu_factor(DenseMatrix::<f64>::from_real_rows(&[
            vec![1.0, 2.0],
            vec![-1.0, 3.0],
        ]))
        .unwrap();
        assert_eq!(f.pivots(), &[0, 1]);
        assert_eq!(f.signature(), 1);
    }

    #[test]
    fn zero_column_is_singular() {
        let r = lu_factor(DenseMatrix::<f64>::from_real_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]));
        assert!(matches!(r, Err(Error::SingularMatrix { column: 1 })));
        let r = lu_factor(DenseMatrix::<f64>::zeros(2));
        assert!(matches!(r, Err(Error::SingularMatrix { column: 0 })));
    }

    #[test]
    fn reconstruction_is_backward_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=12 {
            let m = random_matrix(&mut rng, n);
            let f = lu_factor(m.clone()).unwrap();
            let mut pm = m.clone();
            f.permute_rows(&mut pm);
            let lu = f.lower().matmul(&f.upper());
            let mut err = 0.0f64;
            for j in 0..n {
                let col: f64 = (0..n).map(|i| (pm[(i, j)] - lu[(i, j)]).norm()).sum();
                err = err.max(col);
            }
            assert!(err <= 4.0 * n as f64 * f64::EPSILON * m.one_norm(), "n={n} err={err}");
            let sig = (0..n).filter(|&k| f.pivots()[k] != k).count();
            assert_eq!(f.signature() as i32, if sig % 2 == 0 { 1 } else { -1 });
        }
    }

    #[test]
    fn det_matches_cofactor_expansion_n4() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let m = random_matrix(&mut rng, 4);
        let expect = cofactor_det(&m);
        let got = det_triplet(&lu_factor(m).unwrap()).unwrap().value();
        assert!((got - expect).norm() <= 1e-12 * expect.norm());
    }

    #[test]
    fn diag_triplets() {
        let t = det_triplet(&lu_factor(DenseMatrix::from_diagonal(&[c(2.0, 0.0), c(2.0, 0.0)])).unwrap()).unwrap();
        assert_eq!(t.rho, c(1.0, 0.0));
        assert!((t.log_k - 2f64.ln()).abs() < 1e-15);
        assert!((t.value() - c(4.0, 0.0)).norm() < 1e-14);

        let huge = DenseMatrix::from_diagonal(&[c(1e200, 0.0), c(1e200, 0.0), c(1e-300, 0.0)]);
        let t = det_triplet(&lu_factor(huge).unwrap()).unwrap();
        assert!(t.log_k.is_finite());
        assert_eq!(t.rho, c(1.0, 0.0));
        let expect = 100.0 / 3.0 * 10f64.ln();
        assert!((t.log_k - expect).abs() <= 1e-13 * expect);
    }

    #[test]
    fn phi_ratio_cases() {
        let t = DetTriplet {
            rho: c(0.6, 0.8),
            log_k: 3.0,
            n: 5,
        };
        assert!((phi_ratio(&t, &t).unwrap() - c(1.0, 0.0)).norm() < 1e-15);

        // A = diag(0,1), z = 2, h = -1 + i: closed form 1 + 3h/2 + h^2/2.
        let a = MatrixHandle::from_dense(DenseMatrix::from_diagonal(&[c(0.0, 0.0), c(1.0, 0.0)]));
        let z = c(2.0, 0.0);
        let h = c(-1.0, 1.0);
        let (d0, _) = shifted_det(&a, z).unwrap();
        let (d1, _) = shifted_det(&a, z + h).unwrap();
        let phi = phi_ratio(&d1, &d0).unwrap();
        let closed = c(1.0, 0.0) + h * 1.5 + h * h * 0.5;
        assert!((closed - c(-0.5, 0.5)).norm() < 1e-15);
        assert!((phi - closed).norm() < 1e-14);

        let num = DetTriplet { rho: c(1.0, 0.0), log_k: 8.0, n: 100 };
        let den = DetTriplet { rho: c(1.0, 0.0), log_k: 0.0, n: 100 };
        assert!(matches!(phi_ratio(&num, &den), Err(Error::RatioOverflow { .. })));
        assert!(matches!(phi_ratio(&den, &num), Err(Error::RatioOverflow { .. })));
        let other = DetTriplet { rho: c(1.0, 0.0), log_k: 0.0, n: 3 };
        assert!(matches!(phi_ratio(&num, &other), Err(Error::DimensionMismatch(100, 3))));
    }

    #[test]
    fn phi_ratio_guard_uses_scalar_range() {
        // exp(100) overflows f32 but not f64.
        let num = DetTriplet::<f32> { rho: Complex::new(1.0, 0.0), log_k: 1.0, n: 100 };
        let den = DetTriplet::<f32> { rho: Complex::new(1.0, 0.0), log_k: 0.0, n: 100 };
        assert!(phi_ratio(&num, &den).is_err());
        let num = DetTriplet::<f64> { rho: c(1.0, 0.0), log_k: 1.0, n: 100 };
        let den = DetTriplet::<f64> { rho: c(1.0, 0.0), log_k: 0.0, n: 100 };
        assert!(phi_ratio(&num, &den).is_ok());
    }

    #[test]
    fn trace_inverse_cases() {
        let f = lu_factor(DenseMatrix::<f64>::identity(3)).unwrap();
        assert!((trace_inverse(&f).unwrap() - c(3.0, 0.0)).norm() < 1e-15);
        let f = lu_factor(DenseMatrix::from_diagonal(&[c(2.0, 0.0), c(4.0, 0.0)])).unwrap();
        assert!((trace_inverse(&f).unwrap() - c(0.75, 0.0)).norm() < 1e-15);
        // diag(0,1) shifted at z=2: 1/z + 1/(z-1).
        let a = MatrixHandle::from_dense(DenseMatrix::from_diagonal(&[c(0.0, 0.0), c(1.0, 0.0)]));
        let f = lu_factor(shift_matrix(&a, c(2.0, 0.0))).unwrap();
        assert!((trace_inverse(&f).unwrap() - c(1.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn trace_inverse_triangular_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=8 {
            let mut m = random_matrix(&mut rng, n);
            for j in 0..n {
                for i in j + 1..n {
                    m[(i, j)] = c(0.0, 0.0);
                }
                m[(j, j)] += c(2.0, 0.0);
            }
            let expect: C = (0..n).map(|i| c(1.0, 0.0) / m[(i, i)]).sum();
            let got = trace_inverse(&lu_factor(m).unwrap()).unwrap();
            assert!((got - expect).norm() <= 1e-12 * expect.norm().max(1.0));
        }
    }

    #[test]
    fn shift_cases() {
        let zero = MatrixHandle::from_dense(DenseMatrix::<f64>::zeros(2));
        assert_eq!(shift_matrix(&zero, c(1.0, 0.0)), DenseMatrix::identity(2));
        let a = MatrixHandle::from_dense(DenseMatrix::from_diagonal(&[c(0.0, 0.0), c(1.0, 0.0)]));
        assert_eq!(
            shift_matrix(&a, c(2.0, 0.0)),
            DenseMatrix::from_diagonal(&[c(2.0, 0.0), c(1.0, 0.0)])
        );
        let id = MatrixHandle::from_dense(DenseMatrix::<f64>::identity(2));
        let m = shift_matrix(&id, c(1.0, 0.0));
        assert_eq!(m, DenseMatrix::zeros(2));
        assert!(matches!(lu_factor(m), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn small_pivot_flag() {
        let m = DenseMatrix::<f64>::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 1e-20]]);
        assert!(lu_factor(m).unwrap().small_pivot());
        assert!(!lu_factor(DenseMatrix::<f64>::identity(2)).unwrap().small_pivot());
    }
}
