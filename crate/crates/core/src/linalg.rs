//! Dense complex matrix helpers and site-local operator application.
//!
//! Global basis indices are big-endian in the qudit order: qudit 0 is the most
//! significant digit, so `kron(A, B)` places `A` on qudit 0.

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{LrcError, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;
pub type Vector = DVector<C64>;

pub const DEFAULT_DENSE_LIMIT: usize = 4096;

static DENSE_LIMIT: AtomicUsize = AtomicUsize::new(DEFAULT_DENSE_LIMIT);

/// Largest Hilbert-space dimension for which dense matrices are built.
pub fn dense_limit() -> usize {
    DENSE_LIMIT.load(Ordering::Relaxed)
}

pub fn set_dense_limit(limit: usize) {
    DENSE_LIMIT.store(limit.max(1), Ordering::Relaxed);
}

pub(crate) fn check_dense(what: &str, dim: usize) -> Result<()> {
    let limit = dense_limit();
    if dim > limit {
        return Err(LrcError::Capacity {
            what: what.to_string(),
            requested: dim,
            limit,
        });
    }
    Ok(())
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `exp(i pi exp / d)`: the 2d-th root of unity with the given exponent.
pub fn root_of_unity(exp: u32, d: u32) -> C64 {
    let angle = std::f64::consts::PI * f64::from(exp) / f64::from(d);
    C64::from_polar(1.0, angle)
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

pub fn identity(dim: usize) -> Matrix {
    Matrix::identity(dim, dim)
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn frobenius(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn is_unitary(m: &Matrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(&(m.adjoint() * m), &identity(m.nrows())) < tol
}

pub fn is_hermitian(m: &Matrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(&m.adjoint(), m) < tol
}

/// Maximum deviation between `a` and `b` after removing a global phase from `b`.
pub fn phase_insensitive_diff(a: &Matrix, b: &Matrix) -> f64 {
    let overlap: C64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 1e-300 {
        overlap / overlap.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    max_abs_diff(a, &(b * phase))
}

/// Discrete Fourier transform `F|j> = d^{-1/2} sum_c w^{jc} |c>`.
pub fn dft(d: usize) -> Matrix {
    let norm = 1.0 / (d as f64).sqrt();
    Matrix::from_fn(d, d, |c, j| {
        let e = ((j * c) % d) as u32;
        root_of_unity(2 * e, d as u32) * norm
    })
}

/// `exp(-i theta H)` for Hermitian `H`.
pub fn expm_hermitian(h: &Matrix, theta: f64) -> Matrix {
    let dim = h.nrows();
    let squared = h * h;
    if max_abs_diff(&squared, &identity(dim)) < 1e-12 {
        let (s, co) = theta.sin_cos();
        return identity(dim) * c(co, 0.0) - h * c(0.0, s);
    }
    let eig = h.clone().symmetric_eigen();
    let phases = Matrix::from_diagonal(&DVector::from_iterator(
        dim,
        eig.eigenvalues
            .iter()
            .map(|&lambda| C64::from_polar(1.0, -theta * lambda)),
    ));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

/// Index bookkeeping for acting on a subset of qudits of a larger register.
#[derive(Debug, Clone)]
pub struct SiteMap {
    pub local_dim: usize,
    /// Global offset contributed by each local basis index.
    pub local_offsets: Vec<usize>,
    /// Global indices with all selected sites set to zero.
    pub rest_bases: Vec<usize>,
}

impl SiteMap {
    pub fn new(d: usize, num_qudits: usize, sites: &[usize]) -> Self {
        let strides: Vec<usize> = (0..num_qudits)
            .map(|q| d.pow((num_qudits - 1 - q) as u32))
            .collect();
        let m = sites.len();
        let local_dim = d.pow(m as u32);
        let local_offsets = (0..local_dim)
            .map(|a| {
                let mut rem = a;
                let mut off = 0;
                for i in (0..m).rev() {
                    off += (rem % d) * strides[sites[i]];
                    rem /= d;
                }
                off
            })
            .collect();
        let rest: Vec<usize> = (0..num_qudits).filter(|q| !sites.contains(q)).collect();
        let rest_dim = d.pow(rest.len() as u32);
        let rest_bases = (0..rest_dim)
            .map(|r| {
                let mut rem = r;
                let mut off = 0;
                for &q in rest.iter().rev() {
                    off += (rem % d) * strides[q];
                    rem /= d;
                }
                off
            })
            .collect();
        SiteMap {
            local_dim,
            local_offsets,
            rest_bases,
        }
    }
}

/// `rho <- (M on sites) rho`.
pub fn apply_left(rho: &mut Matrix, local: &Matrix, map: &SiteMap) {
    let ld = map.local_dim;
    let mut buf = vec![C64::new(0.0, 0.0); ld];
    for col in 0..rho.ncols() {
        for &base in &map.rest_bases {
            for (a, slot) in buf.iter_mut().enumerate() {
                *slot = rho[(base + map.local_offsets[a], col)];
            }
            for a in 0..ld {
                let mut acc = C64::new(0.0, 0.0);
                for (b, v) in buf.iter().enumerate() {
                    acc += local[(a, b)] * v;
                }
                rho[(base + map.local_offsets[a], col)] = acc;
            }
        }
    }
}

/// `rho <- rho (M on sites)^dagger`.
pub fn apply_right_adjoint(rho: &mut Matrix, local: &Matrix, map: &SiteMap) {
    let ld = map.local_dim;
    let mut buf = vec![C64::new(0.0, 0.0); ld];
    for row in 0..rho.nrows() {
        for &base in &map.rest_bases {
            for (a, slot) in buf.iter_mut().enumerate() {
                *slot = rho[(row, base + map.local_offsets[a])];
            }
            for a in 0..ld {
                let mut acc = C64::new(0.0, 0.0);
                for (b, v) in buf.iter().enumerate() {
                    acc += local[(a, b)].conj() * v;
                }
                rho[(row, base + map.local_offsets[a])] = acc;
            }
        }
    }
}

/// `rho <- M rho M^dagger` with `M` acting on the mapped sites.
pub fn conjugate_local(rho: &mut Matrix, local: &Matrix, map: &SiteMap) {
    apply_left(rho, local, map);
    apply_right_adjoint(rho, local, map);
}

/// Apply a local superoperator (natural representation, column stacking) to
/// the mapped sites of `rho`.
pub fn apply_local_superop(rho: &Matrix, superop: &Matrix, map: &SiteMap) -> Matrix {
    let ld = map.local_dim;
    let mut out = Matrix::zeros(rho.nrows(), rho.ncols());
    let mut block = vec![C64::new(0.0, 0.0); ld * ld];
    for &r1 in &map.rest_bases {
        for &r2 in &map.rest_bases {
            for b in 0..ld {
                for a in 0..ld {
                    block[b * ld + a] = rho[(r1 + map.local_offsets[a], r2 + map.local_offsets[b])];
                }
            }
            for b in 0..ld {
                for a in 0..ld {
                    let row = b * ld + a;
                    let mut acc = C64::new(0.0, 0.0);
                    for (k, v) in block.iter().enumerate() {
                        acc += superop[(row, k)] * v;
                    }
                    out[(r1 + map.local_offsets[a], r2 + map.local_offsets[b])] = acc;
                }
            }
        }
    }
    out
}

/// Replace the mapped sites by the pure state `psi`, tracing out their content.
pub fn prepare_local(rho: &Matrix, psi: &Vector, map: &SiteMap) -> Matrix {
    let ld = map.local_dim;
    let mut out = Matrix::zeros(rho.nrows(), rho.ncols());
    for &r1 in &map.rest_bases {
        for &r2 in &map.rest_bases {
            let mut tr = C64::new(0.0, 0.0);
            for a in 0..ld {
                tr += rho[(r1 + map.local_offsets[a], r2 + map.local_offsets[a])];
            }
            if tr == C64::new(0.0, 0.0) {
                continue;
            }
            for a in 0..ld {
                for b in 0..ld {
                    out[(r1 + map.local_offsets[a], r2 + map.local_offsets[b])] =
                        psi[a] * psi[b].conj() * tr;
                }
            }
        }
    }
    out
}

/// Reduced operator on `keep` (in the given order), tracing out all other qudits.
pub fn partial_trace_keep(rho: &Matrix, d: usize, num_qudits: usize, keep: &[usize]) -> Matrix {
    let map = SiteMap::new(d, num_qudits, keep);
    let ld = map.local_dim;
    Matrix::from_fn(ld, ld, |a, b| {
        map.rest_bases
            .iter()
            .map(|&r| rho[(r + map.local_offsets[a], r + map.local_offsets[b])])
            .sum()
    })
}

/// Column-stacked vectorization, matching the natural representation.
pub fn vectorize(m: &Matrix) -> Vector {
    Vector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &[C64], dim: usize) -> Matrix {
    Matrix::from_column_slice(dim, dim, v)
}

pub fn trace(m: &Matrix) -> C64 {
    m.diagonal().iter().sum()
}
