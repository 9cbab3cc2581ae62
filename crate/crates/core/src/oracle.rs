//! Ground truth for verification: matrices with prescribed spectra, winding-number
//! point-in-polygon counting, a dense brute-force contour quadrature and a
//! cofactor-expansion determinant. None of these touch the adaptive engine.

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::contour::Contour;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::linalg::{ratio_arg, shifted_det};
use crate::matrix_io::MatrixHandle;
use crate::scalar::Real;

/// Recipe for a matrix whose spectrum is known by construction.
#[derive(Debug, Clone)]
pub struct SynthSpec<T> {
    /// Eigenvalues with multiplicity.
    pub eigenvalues: Vec<Complex<T>>,
    pub seed: u64,
    /// Upper bound on the 1-norm condition number of the similarity transform.
    pub conditioning: T,
    /// Strictly-lower entries of the similarity are drawn from `[-b, b]`; 0 gives the identity.
    pub lower_bound: T,
    /// Strictly-upper entries of the triangular core are drawn from `[-b, b]`.
    pub upper_bound: T,
    /// Build a real matrix (eigenvalues must then come in exact conjugate pairs).
    pub real: bool,
}

impl<T: Real> SynthSpec<T> {
    pub fn new(eigenvalues: Vec<Complex<T>>, seed: u64) -> Self {
        Self {
            eigenvalues,
            seed,
            conditioning: T::lit(1e3),
            lower_bound: T::lit(0.3),
            upper_bound: T::lit(0.5),
            real: false,
        }
    }

    pub fn real(mut self) -> Self {
        self.real = true;
        self
    }

    /// No similarity and no coupling: the result is block diagonal.
    pub fn plain(mut self) -> Self {
        self.lower_bound = T::zero();
        self.upper_bound = T::zero();
        self
    }
}

/// Diagonal blocks of the core: a real eigenvalue, or `a ± ib` as a 2x2 rotation-scaling block.
enum Block<T> {
    One(Complex<T>),
    Pair(T, T),
}

fn real_blocks<T: Real>(eigs: &[Complex<T>]) -> Result<Vec<Block<T>>> {
    let mut used = vec![false; eigs.len()];
    let mut blocks = Vec::new();
    for i in 0..eigs.len() {
        if used[i] {
            continue;
        }
        let l = eigs[i];
        used[i] = true;
        if l.im == T::zero() {
            blocks.push(Block::One(l));
            continue;
        }
        let j = (0..eigs.len())
            .find(|&j| !used[j] && eigs[j] == l.conj())
            .ok_or_else(|| Error::InvalidConfig(format!("eigenvalue {l} has no conjugate partner")))?;
        used[j] = true;
        blocks.push(Block::Pair(l.re, l.im.abs()));
    }
    Ok(blocks)
}

fn unit_lower_inverse<T: Real>(l: &DenseMatrix<T>) -> DenseMatrix<T> {
    let n = l.order();
    let mut inv = DenseMatrix::identity(n);
    for j in 0..n {
        for i in j + 1..n {
            let mut s = Complex::zero();
            for k in j..i {
                s += l[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -s;
        }
    }
    inv
}

/// `A = L T L^{-1}` with `T` (block) upper triangular carrying the prescribed
/// eigenvalues and `L` unit lower triangular. Reproducible bit-for-bit from the spec.
pub fn synth_matrix<T: Real>(spec: &SynthSpec<T>) -> Result<MatrixHandle<T>> {
    if spec.eigenvalues.is_empty() {
        return Err(Error::InvalidConfig("empty eigenvalue list".into()));
    }
    if !(spec.conditioning >= T::one()) || !spec.conditioning.is_finite() {
        return Err(Error::InvalidConfig("conditioning must be finite and >= 1".into()));
    }
    let n = spec.eigenvalues.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let lower = spec.lower_bound.to_f64_lossy();
    let upper = spec.upper_bound.to_f64_lossy();
    let draw = |rng: &mut ChaCha8Rng, b: f64, complex: bool| -> Complex<T> {
        if b == 0.0 {
            return Complex::zero();
        }
        let re = T::lit(rng.gen_range(-b..=b));
        let im = if complex { T::lit(rng.gen_range(-b..=b)) } else { T::zero() };
        Complex::new(re, im)
    };

    let mut core = DenseMatrix::<T>::zeros(n);
    // Column index at which each row's strictly-upper coupling starts.
    let mut upper_from = vec![0usize; n];
    if spec.real {
        let mut k = 0;
        for block in real_blocks(&spec.eigenvalues)? {
            match block {
                Block::One(l) => {
                    core[(k, k)] = l;
                    upper_from[k] = k + 1;
                    k += 1;
                }
                Block::Pair(a, b) => {
                    core[(k, k)] = Complex::new(a, T::zero());
                    core[(k, k + 1)] = Complex::new(b, T::zero());
                    core[(k + 1, k)] = Complex::new(-b, T::zero());
                    core[(k + 1, k + 1)] = Complex::new(a, T::zero());
                    upper_from[k] = k + 2;
                    upper_from[k + 1] = k + 2;
                    k += 2;
                }
            }
        }
    } else {
        for (k, &l) in spec.eigenvalues.iter().enumerate() {
            core[(k, k)] = l;
            upper_from[k] = k + 1;
        }
    }
    let complex = !spec.real;
    for i in 0..n {
        for j in upper_from[i]..n {
            core[(i, j)] = draw(&mut rng, upper, complex);
        }
    }

    let mut l = DenseMatrix::<T>::identity(n);
    for j in 0..n {
        for i in j + 1..n {
            l[(i, j)] = draw(&mut rng, lower, complex);
        }
    }
    let mut l_inv = unit_lower_inverse(&l);
    let half = T::lit(0.5);
    let mut tries = 0;
    while l.one_norm() * l_inv.one_norm() > spec.conditioning {
        tries += 1;
        for j in 0..n {
            for i in j + 1..n {
                l[(i, j)] = if tries > 60 { Complex::zero() } else { l[(i, j)] * half };
            }
        }
        l_inv = unit_lower_inverse(&l);
    }

    let a = l.matmul(&core).matmul(&l_inv);
    Ok(MatrixHandle::from_dense(a))
}

fn segment_distance<T: Real>(z: Complex<T>, a: Complex<T>, b: Complex<T>) -> T {
    let e = b - a;
    let len2 = e.norm_sqr();
    if len2 == T::zero() {
        return (z - a).norm();
    }
    let s = (((z - a) * e.conj()).re / len2).max(T::zero()).min(T::one());
    (z - (a + e * s)).norm()
}

/// Distance from `z` to the polygon boundary.
pub fn boundary_distance<T: Real>(z: Complex<T>, c: &Contour<T>) -> T {
    c.edges()
        .map(|(a, b)| segment_distance(z, a, b))
        .fold(T::infinity(), T::min)
}

/// Winding-number containment test. Points within `64 eps * diameter` of an edge
/// are rejected as boundary points.
pub fn point_in_polygon<T: Real>(z: Complex<T>, c: &Contour<T>) -> Result<bool> {
    let tol = T::lit(64.0) * T::epsilon() * c.diameter();
    if boundary_distance(z, c) <= tol {
        return Err(Error::BoundaryPoint {
            re: z.re.to_f64_lossy(),
            im: z.im.to_f64_lossy(),
        });
    }
    let mut winding = 0i32;
    for (a, b) in c.edges() {
        let side = (b.re - a.re) * (z.im - a.im) - (z.re - a.re) * (b.im - a.im);
        if a.im <= z.im {
            if b.im > z.im && side > T::zero() {
                winding += 1;
            }
        } else if b.im <= z.im && side < T::zero() {
            winding -= 1;
        }
    }
    Ok(winding != 0)
}

/// Number of listed eigenvalues inside `c`.
pub fn count_inside<T: Real>(eigs: &[Complex<T>], c: &Contour<T>) -> Result<usize> {
    let mut k = 0;
    for &l in eigs {
        if point_in_polygon(l, c)? {
            k += 1;
        }
    }
    Ok(k)
}

/// Brute-force argument count: samples every edge uniformly at `pts_per_edge`
/// points and sums principal arguments of consecutive determinant ratios with no
/// step control at all. Right only when the sampling is fine enough.
pub fn quadrature_count<T: Real>(
    a: &MatrixHandle<T>,
    c: &Contour<T>,
    pts_per_edge: usize,
) -> Result<i64> {
    if pts_per_edge < 100 {
        return Err(Error::InvalidConfig(format!(
            "pts_per_edge must be >= 100, got {pts_per_edge}"
        )));
    }
    let m = T::from_usize_lossy(pts_per_edge);
    let points: Vec<Complex<T>> = c
        .edges()
        .flat_map(|(p, q)| (0..pts_per_edge).map(move |k| p + (q - p) * (T::from_usize_lossy(k) / m)))
        .collect();
    let dets = points
        .par_iter()
        .map(|&z| {
            shifted_det(a, z).map(|(d, _)| d).map_err(|e| match e {
                Error::SingularMatrix { .. } => Error::ContourTouchesSpectrum {
                    re: z.re.to_f64_lossy(),
                    im: z.im.to_f64_lossy(),
                },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = dets.len();
    let sum: T = (0..n).map(|i| ratio_arg(&dets[(i + 1) % n], &dets[i])).sum();
    Ok((sum / T::TAU()).round().to_i64().unwrap_or(i64::MAX))
}

/// Determinant by Laplace expansion along the first row. Exponential cost; for
/// cross-checking at small orders only.
pub fn cofactor_det<T: Real>(m: &DenseMatrix<T>) -> Complex<T> {
    fn rec<T: Real>(m: &DenseMatrix<T>, rows: &[usize], cols: &[usize]) -> Complex<T> {
        if rows.is_empty() {
            return Complex::one();
        }
        let r = rows[0];
        let mut acc = Complex::zero();
        let mut sign = T::one();
        for (k, &c) in cols.iter().enumerate() {
            let v = m[(r, c)];
            if !v.is_zero() {
                let sub: Vec<usize> = cols.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &c)| c).collect();
                acc += v * rec(m, &rows[1..], &sub) * sign;
            }
            sign = -sign;
        }
        acc
    }
    let idx: Vec<usize> = (0..m.order()).collect();
    rec(m, &idx, &idx)
}
