// Copyright 2026 The spinstar Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra for small qubit registers.
//!
//! Basis convention: qubit 0 is the leftmost (most significant) tensor
//! factor, and `|0>` is the `+1` eigenstate of `sigma_z`.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Hermiticity tolerance for operators built by this crate.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Inputs to [`herm_eig`] beyond this deviation are rejected.
pub const HERMITIAN_REJECT_TOL: f64 = 1e-9;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator(DMatrix<C64>);

impl Operator {
    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                actual: matrix.ncols(),
            });
        }
        Ok(Self(matrix))
    }

    /// Builds an operator from row-major entries.
    pub fn from_row_major(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        Self::from_matrix(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Largest elementwise deviation `max |A - A^H|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_error() < HERMITIAN_TOL
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(&self.0 * C64::new(factor, 0.0))
    }

    /// `[A, B] = AB - BA`
    pub fn commutator(&self, other: &Operator) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    /// `{A, B} = AB + BA`
    pub fn anticommutator(&self, other: &Operator) -> Self {
        Self(&self.0 * &other.0 + &other.0 * &self.0)
    }

    /// Largest elementwise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// Max-norm distance `max |A - B|`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm()))
    }

    /// Max-norm deviation of `A^H A` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let prod = self.0.adjoint() * &self.0;
        Operator(prod).max_abs_diff(&Operator::identity(self.dim()))
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.0 * v
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator(&self.0 + &rhs.0)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator(&self.0 - &rhs.0)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator(&self.0 * &rhs.0)
    }
}

pub fn pauli_x() -> Operator {
    Operator(DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]))
}

pub fn pauli_y() -> Operator {
    let i = C64::new(0.0, 1.0);
    Operator(DMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]))
}

pub fn pauli_z() -> Operator {
    Operator(DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]))
}

/// Normalized complex state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState(DVector<C64>);

impl PureState {
    /// Accepts amplitudes already normalized to `1e-12`.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let v = DVector::from_vec(amplitudes);
        let norm_sq = v.norm_squared();
        if v.is_empty() || (norm_sq - 1.0).abs() >= 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "state is not normalized (<psi|psi> = {norm_sq})"
            )));
        }
        Ok(Self(v))
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if v.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        Ok(Self(v / C64::new(norm, 0.0)))
    }

    /// Computational basis state `|index>`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut v = DVector::zeros(dim);
        v[index] = ONE;
        Ok(Self(v))
    }

    /// Wraps a vector produced by unitary evolution without re-checking the norm.
    pub(crate) fn from_vector_unchecked(v: DVector<C64>) -> Self {
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn vector(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.0.as_slice()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &PureState) -> C64 {
        self.0.dotc(&other.0)
    }

    /// `|<self|other>|^2`
    pub fn overlap(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn kron(&self, other: &PureState) -> PureState {
        PureState(self.0.kronecker(&other.0))
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix(&self.0 * self.0.adjoint())
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(DMatrix<C64>);

impl DensityMatrix {
    /// Validates Hermiticity (`1e-12`), unit trace (`1e-12`) and positivity (`-1e-10`).
    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        let op = Operator::from_matrix(matrix)?;
        let herm = op.hermiticity_error();
        if herm >= HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() >= 1e-12 || tr.im.abs() >= 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "density matrix trace is {tr}, expected 1"
            )));
        }
        let rho = DensityMatrix(op.into_matrix());
        let min_eig = rho.eigenvalues().first().copied().unwrap_or(0.0);
        if min_eig < -1e-10 {
            return Err(Error::InvalidArgument(format!(
                "density matrix has negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(rho)
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// `tr(rho^2)`
    pub fn purity(&self) -> f64 {
        // tr(rho rho) = sum_ij |rho_ij|^2 for Hermitian rho
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Expectation value `tr(rho A)`.
    pub fn expectation(&self, op: &Operator) -> Result<f64> {
        check_dim(self.dim(), op.dim())?;
        Ok((&self.0 * op.matrix()).trace().re)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.0)
    }

    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix(self.0.kronecker(&other.0))
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm()))
    }
}

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// Tensor product, `a` as the leftmost factor.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    Operator(a.0.kronecker(&b.0))
}

/// Places a single-qubit operator at `site` of an `n_qubits` register.
pub fn embed(op: &Operator, site: usize, n_qubits: usize) -> Result<Operator> {
    if site >= n_qubits {
        return Err(Error::InvalidSubsystem(format!(
            "site {site} out of range for {n_qubits} qubits"
        )));
    }
    check_dim(2, op.dim())?;
    let left = Operator::identity(1 << site);
    let right = Operator::identity(1 << (n_qubits - site - 1));
    Ok(kron(&kron(&left, op), &right))
}

fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let (mut vals, _) = jacobi_eigen(m.clone(), false);
    vals.sort_by(f64::total_cmp);
    vals
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic complex Jacobi diagonalization of a Hermitian matrix.
///
/// Each rotation first removes the phase of `a_pq` with a diagonal unitary,
/// then applies the real symmetric Jacobi rotation that zeroes it. Returns
/// the unsorted eigenvalues and, if requested, the accumulated unitary whose
/// columns are eigenvectors.
fn jacobi_eigen(mut a: DMatrix<C64>, want_vectors: bool) -> (Vec<f64>, DMatrix<C64>) {
    let n = a.nrows();
    let mut v = if want_vectors {
        DMatrix::identity(n, n)
    } else {
        DMatrix::zeros(0, 0)
    };
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
    }
    let scale: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if scale == 0.0 {
        return (vec![0.0; n], if want_vectors { v } else { DMatrix::zeros(0, 0) });
    }
    let stop = scale * (f64::EPSILON * f64::EPSILON);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for q in 1..n {
            for p in 0..q {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                if r <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    continue;
                }
                let phase = apq / r; // e^{i phi}
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G restricted to (p, q): [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
                let gpp = C64::new(c, 0.0);
                let gpq = C64::new(s, 0.0);
                let gqp = -phase.conj() * s;
                let gqq = phase.conj() * c;

                // A <- A G (columns p, q)
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * gpp + aiq * gqp;
                    a[(i, q)] = aip * gpq + aiq * gqq;
                }
                // A <- G^H A (rows p, q)
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = gpp.conj() * apj + gqp.conj() * aqj;
                    a[(q, j)] = gpq.conj() * apj + gqq.conj() * aqj;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(app - t * r, 0.0);
                a[(q, q)] = C64::new(aqq + t * r, 0.0);

                if want_vectors {
                    for i in 0..n {
                        let vip = v[(i, p)];
                        let viq = v[(i, q)];
                        v[(i, p)] = vip * gpp + viq * gqp;
                        v[(i, q)] = vip * gpq + viq * gqq;
                    }
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)].re).collect(), v)
}

/// Diagonal phases `d` with `d_i a_ij conj(d_j)` real for every entry, if
/// such a gauge exists.
fn real_gauge(a: &DMatrix<C64>) -> Option<Vec<C64>> {
    let n = a.nrows();
    let mut d: Vec<Option<C64>> = vec![None; n];
    let mut queue = Vec::with_capacity(n);
    for root in 0..n {
        if d[root].is_some() {
            continue;
        }
        d[root] = Some(ONE);
        queue.push(root);
        while let Some(i) = queue.pop() {
            let di = d[i].unwrap_or(ONE);
            for j in 0..n {
                let aij = a[(i, j)];
                let r = aij.norm();
                if d[j].is_none() && r > 0.0 {
                    d[j] = Some(di * aij / r);
                    queue.push(j);
                }
            }
        }
    }
    let d: Vec<C64> = d.into_iter().map(|x| x.unwrap_or(ONE)).collect();
    let tol = 1e-14 * a.camax().max(f64::MIN_POSITIVE);
    for j in 0..n {
        for i in 0..n {
            if (d[i] * a[(i, j)] * d[j].conj()).im.abs() > tol {
                return None;
            }
        }
    }
    Some(d)
}

/// Real symmetric eigensolve after a diagonal phase gauge. `None` when the
/// matrix has no real gauge or the result fails a reconstruction check.
fn real_gauge_eigen(a: &DMatrix<C64>) -> Option<(Vec<f64>, DMatrix<C64>)> {
    let n = a.nrows();
    let d = real_gauge(a)?;
    let real = DMatrix::from_fn(n, n, |i, j| (d[i] * a[(i, j)] * d[j].conj()).re);
    let real = (&real + real.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::try_new(real.clone(), f64::EPSILON, 0)?;
    let w = &eig.eigenvectors;
    let mut resid = &real * w;
    for (k, mut col) in resid.column_iter_mut().enumerate() {
        col.axpy(-eig.eigenvalues[k], &w.column(k), 1.0);
    }
    if resid.amax() > 1e-12 * real.amax().max(1.0) * n as f64 {
        return None;
    }
    let vectors = DMatrix::from_fn(n, n, |i, k| d[i].conj() * w[(i, k)]);
    Some((eig.eigenvalues.iter().copied().collect(), vectors))
}

/// Eigendecomposition `A = V diag(values) V^H` of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors.
    pub vectors: DMatrix<C64>,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn reconstruct(&self) -> Operator {
        let diag = DMatrix::from_diagonal(&DVector::from_iterator(
            self.dim(),
            self.values.iter().map(|&v| C64::new(v, 0.0)),
        ));
        Operator(&self.vectors * diag * self.vectors.adjoint())
    }

    /// `exp(-i A t)` assembled in the eigenbasis.
    pub fn propagator(&self, t: f64) -> Operator {
        let phases: Vec<C64> = self.values.iter().map(|&v| C64::from_polar(1.0, -v * t)).collect();
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[j];
        }
        Operator(scaled * self.vectors.adjoint())
    }

    /// Coefficients `V^H v` of `v` in the eigenbasis.
    pub fn to_eigenbasis(&self, v: &DVector<C64>) -> DVector<C64> {
        self.vectors.ad_mul(v)
    }

    /// Applies `exp(-i A t)` to a vector given its eigenbasis coefficients.
    pub fn evolve_coefficients(&self, coeffs: &DVector<C64>, t: f64) -> DVector<C64> {
        let phased = DVector::from_iterator(
            coeffs.len(),
            coeffs
                .iter()
                .zip(&self.values)
                .map(|(c, &v)| c * C64::from_polar(1.0, -v * t)),
        );
        &self.vectors * phased
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
pub fn herm_eig(a: &Operator) -> Result<HermitianEigen> {
    let herm = a.hermiticity_error();
    if herm >= HERMITIAN_REJECT_TOL {
        return Err(Error::NotHermitian(herm));
    }
    let (raw, vecs) = real_gauge_eigen(&a.0).unwrap_or_else(|| jacobi_eigen(a.0.clone(), true));
    let mut order: Vec<usize> = (0..a.dim()).collect();
    order.sort_by(|&i, &j| raw[i].total_cmp(&raw[j]));
    let values = order.iter().map(|&i| raw[i]).collect();
    let vectors = DMatrix::from_fn(a.dim(), a.dim(), |r, c| vecs[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// `exp(-i h dt)` via eigendecomposition.
pub fn propagator(h: &Operator, dt: f64) -> Result<Operator> {
    Ok(herm_eig(h)?.propagator(dt))
}

/// Reduced state of the qubits in `keep`, in the order given.
pub fn partial_trace(rho: &DensityMatrix, n_total: usize, keep: &[usize]) -> Result<DensityMatrix> {
    if n_total == 0 || n_total > 30 {
        return Err(Error::InvalidSubsystem(format!("unsupported register size {n_total}")));
    }
    check_dim(1 << n_total, rho.dim())?;
    if keep.is_empty() {
        return Err(Error::InvalidSubsystem("keep set is empty".into()));
    }
    let mut seen = vec![false; n_total];
    for &q in keep {
        if q >= n_total {
            return Err(Error::InvalidSubsystem(format!(
                "qubit {q} out of range for {n_total} qubits"
            )));
        }
        if seen[q] {
            return Err(Error::InvalidSubsystem(format!("qubit {q} listed twice")));
        }
        seen[q] = true;
    }
    let traced: Vec<usize> = (0..n_total).filter(|&q| !seen[q]).collect();
    let bit = |q: usize| 1usize << (n_total - 1 - q);

    // full index of (kept configuration, traced configuration)
    let full_index = |kept: usize, env: usize| -> usize {
        let mut idx = 0;
        for (pos, &q) in keep.iter().enumerate() {
            if kept >> (keep.len() - 1 - pos) & 1 == 1 {
                idx |= bit(q);
            }
        }
        for (pos, &q) in traced.iter().enumerate() {
            if env >> (traced.len() - 1 - pos) & 1 == 1 {
                idx |= bit(q);
            }
        }
        idx
    };

    let d_keep = 1usize << keep.len();
    let d_env = 1usize << traced.len();
    let mut out = DMatrix::zeros(d_keep, d_keep);
    for r in 0..d_keep {
        for c in 0..d_keep {
            let mut acc = ZERO;
            for e in 0..d_env {
                acc += rho.0[(full_index(r, e), full_index(c, e))];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(DensityMatrix(out))
}

/// Reduced state of the leading `sys_dim`-dimensional factor of a pure
/// state on `sys_dim x env_dim`, i.e. `Psi Psi^H` with `Psi` the reshaped
/// amplitude matrix.
pub fn reduce_leading(psi: &DVector<C64>, sys_dim: usize) -> Result<DensityMatrix> {
    if sys_dim == 0 || psi.len() % sys_dim != 0 {
        return Err(Error::DimensionMismatch {
            expected: sys_dim,
            actual: psi.len(),
        });
    }
    let env_dim = psi.len() / sys_dim;
    let amp = DMatrix::from_fn(sys_dim, env_dim, |s, e| psi[s * env_dim + e]);
    Ok(DensityMatrix(&amp * amp.adjoint()))
}

/// `D = 1/2 sum |eig(r1 - r2)|`, clamped to `[0, 1]`.
pub fn trace_distance(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<f64> {
    check_dim(r1.dim(), r2.dim())?;
    let diff = &r1.0 - &r2.0;
    let d = 0.5 * hermitian_eigenvalues(&diff).iter().map(|v| v.abs()).sum::<f64>();
    Ok(d.clamp(0.0, 1.0))
}

/// `<target| rho |target>`, clamped to `[0, 1]`.
pub fn fidelity_pure(target: &PureState, rho: &DensityMatrix) -> Result<f64> {
    check_dim(target.dim(), rho.dim())?;
    let v = target.vector();
    let f = v.dotc(&(&rho.0 * v)).re;
    Ok(f.clamp(0.0, 1.0))
}
