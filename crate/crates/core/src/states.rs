//! Bipartite density matrices and their Bloch–Fano coordinates.
//!
//! The local operator basis is the generalized Gell-Mann set, ordered as
//! symmetric pairs, antisymmetric pairs, then diagonal generators. With this
//! normalization (`Tr[g_i g_j] = 2 δ_ij`) a state on `d_A ⊗ d_B` expands as
//!
//! ```text
//! ρ = 1/(d_A d_B) [ I⊗I + Σ a_i g_i⊗I + Σ b_j I⊗g_j + Σ t_ij g_i⊗g_j ]
//! ```
//!
//! which reduces to the usual Pauli expansion for two qubits. For `d > 2`
//! the same scaling is used; it is self-consistent but other normalizations
//! of `a`, `b` and `T` exist in the literature.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig, partial_trace, ComplexMatrix, HermitianSpectrum, Subsystem, HERMITIAN_TOL, ONE, ZERO,
};

/// Largest local dimension supported by the state constructors.
pub const MAX_LOCAL_DIM: usize = 8;

const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// Generalized Gell-Mann matrices for dimension `d` (`d² - 1` of them).
pub fn gell_mann_basis(d: usize) -> Result<Vec<ComplexMatrix>> {
    if !(2..=MAX_LOCAL_DIM).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    let mut basis = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in j + 1..d {
            let mut g = ComplexMatrix::zeros(d, d);
            g[(j, k)] = ONE;
            g[(k, j)] = ONE;
            basis.push(g);
        }
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut g = ComplexMatrix::zeros(d, d);
            g[(j, k)] = Complex64::new(0.0, -1.0);
            g[(k, j)] = Complex64::new(0.0, 1.0);
            basis.push(g);
        }
    }
    for l in 1..d {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut g = ComplexMatrix::zeros(d, d);
        for m in 0..l {
            g[(m, m)] = Complex64::new(norm, 0.0);
        }
        g[(l, l)] = Complex64::new(-(l as f64) * norm, 0.0);
        basis.push(g);
    }
    Ok(basis)
}

/// A validated bipartite density matrix on `d_A ⊗ d_B`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dims: (usize, usize),
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity. Eigenvalues in
    /// `(-1e-10, 0)` are clipped to zero and the result renormalized.
    pub fn new(matrix: ComplexMatrix, dims: (usize, usize)) -> Result<Self> {
        let n = dims.0 * dims.1;
        if dims.0 == 0 || dims.1 == 0 || matrix.rows() != n || matrix.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "dims {}x{} need a {n}x{n} matrix, got {}x{}",
                dims.0,
                dims.1,
                matrix.rows(),
                matrix.cols()
            )));
        }
        let dev = matrix.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NonHermitian(dev));
        }
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr));
        }
        let matrix = matrix.hermitian_part();
        let spec = hermitian_eig(&matrix)?;
        let min = spec.min();
        if min < -PSD_TOL {
            return Err(Error::NotPsd(min));
        }
        if min < 0.0 {
            let clipped = spec.map(|l| l.max(0.0));
            let tr = clipped.trace().re;
            return Ok(Self {
                dims,
                matrix: clipped.scale(1.0 / tr),
            });
        }
        Ok(Self { dims, matrix })
    }

    /// Two-qubit state from a 4x4 matrix.
    pub fn two_qubit(matrix: ComplexMatrix) -> Result<Self> {
        Self::new(matrix, (2, 2))
    }

    /// Maximally mixed state `I / (d_A d_B)`.
    pub fn maximally_mixed(dims: (usize, usize)) -> Self {
        let n = dims.0 * dims.1;
        Self {
            dims,
            matrix: ComplexMatrix::identity(n).scale(1.0 / n as f64),
        }
    }

    /// `|φ⁺⟩⟨φ⁺|` with `|φ⁺⟩ = Σ|ii⟩/√d`.
    pub fn maximally_entangled(d: usize) -> Self {
        Self {
            dims: (d, d),
            matrix: ComplexMatrix::outer(&phi_plus(d)),
        }
    }

    /// Isotropic state `w |φ⁺⟩⟨φ⁺| + (1-w) I/d²`; the Werner family for `d = 2`.
    pub fn isotropic(d: usize, w: f64) -> Result<Self> {
        let phi = ComplexMatrix::outer(&phi_plus(d));
        let mixed = ComplexMatrix::identity(d * d).scale((1.0 - w) / (d * d) as f64);
        Self::new(&phi.scale(w) + &mixed, (d, d))
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.0 * self.dims.1
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn spectrum(&self) -> Result<HermitianSpectrum> {
        hermitian_eig(&self.matrix)
    }

    /// Reduced state of one subsystem, as a single-system density matrix
    /// with dims `(d, 1)`.
    pub fn reduced(&self, keep: Subsystem) -> Result<DensityMatrix> {
        let m = partial_trace(&self.matrix, self.dims, keep)?;
        let d = m.rows();
        Ok(Self {
            dims: (d, 1),
            matrix: m,
        })
    }

    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).re
    }

    /// Convex combination `λ self + (1-λ) other`.
    pub fn mix(&self, other: &DensityMatrix, lambda: f64) -> Result<DensityMatrix> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch("mixing states of different dims".into()));
        }
        Self::new(
            &self.matrix.scale(lambda) + &other.matrix.scale(1.0 - lambda),
            self.dims,
        )
    }

    /// `(U⊗V) ρ (U⊗V)^dagger`.
    pub fn local_unitary(&self, u: &ComplexMatrix, v: &ComplexMatrix) -> Result<DensityMatrix> {
        let uv = crate::linalg::tensor_product(u, v)?;
        Self::new(self.matrix.conjugate_by(&uv), self.dims)
    }

    pub(crate) fn from_trusted(matrix: ComplexMatrix, dims: (usize, usize)) -> Self {
        Self { dims, matrix }
    }
}

/// Amplitudes of `|φ⁺⟩ = Σ_i |ii⟩ / √d`.
pub fn phi_plus(d: usize) -> Vec<Complex64> {
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut v = vec![ZERO; d * d];
    for i in 0..d {
        v[i * d + i] = amp;
    }
    v
}

// Tr[ρ (X ⊗ Y)] without forming the Kronecker product.
fn local_expectation(rho: &ComplexMatrix, dims: (usize, usize), x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    let (da, db) = dims;
    let mut acc = ZERO;
    for i in 0..da {
        for j in 0..da {
            let xji = x[(j, i)];
            if xji == ZERO {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    let ylk = y[(l, k)];
                    if ylk == ZERO {
                        continue;
                    }
                    acc += rho[(i * db + k, j * db + l)] * xji * ylk;
                }
            }
        }
    }
    acc.re
}

/// Local Bloch vectors and correlation tensor of a bipartite state.
#[derive(Clone, Debug, PartialEq)]
pub struct BlochFano {
    pub dims: (usize, usize),
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Row-major `(d_A² - 1) x (d_B² - 1)` correlation tensor.
    pub t: Vec<f64>,
}

impl BlochFano {
    pub fn t_rows(&self) -> usize {
        self.dims.0 * self.dims.0 - 1
    }

    pub fn t_cols(&self) -> usize {
        self.dims.1 * self.dims.1 - 1
    }

    pub fn t_entry(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.t_cols() + j]
    }

    pub fn correlation_matrix(&self) -> ComplexMatrix {
        let cols = self.t_cols();
        ComplexMatrix::from_fn(self.t_rows(), cols, |i, j| Complex64::new(self.t[i * cols + j], 0.0))
    }

    pub fn a_norm_sq(&self) -> f64 {
        self.a.iter().map(|x| x * x).sum()
    }

    pub fn b_norm_sq(&self) -> f64 {
        self.b.iter().map(|x| x * x).sum()
    }

    /// `||T||₂²`.
    pub fn t_frobenius_sq(&self) -> f64 {
        self.t.iter().map(|x| x * x).sum()
    }

    /// Singular values of `T`, descending.
    pub fn t_singular_values(&self) -> Result<Vec<f64>> {
        crate::linalg::singular_values(&self.correlation_matrix())
    }
}

pub fn decompose(rho: &DensityMatrix) -> Result<BlochFano> {
    let (da, db) = rho.dims();
    let ga = gell_mann_basis(da)?;
    let gb = gell_mann_basis(db)?;
    let ia = ComplexMatrix::identity(da);
    let ib = ComplexMatrix::identity(db);
    let m = rho.matrix();
    let a = ga
        .iter()
        .map(|g| 0.5 * da as f64 * local_expectation(m, (da, db), g, &ib))
        .collect();
    let b = gb
        .iter()
        .map(|g| 0.5 * db as f64 * local_expectation(m, (da, db), &ia, g))
        .collect();
    let scale = 0.25 * (da * db) as f64;
    let mut t = Vec::with_capacity(ga.len() * gb.len());
    for gi in &ga {
        for gj in &gb {
            t.push(scale * local_expectation(m, (da, db), gi, gj));
        }
    }
    Ok(BlochFano {
        dims: (da, db),
        a,
        b,
        t,
    })
}

pub fn reconstruct(bf: &BlochFano) -> Result<DensityMatrix> {
    let (da, db) = bf.dims;
    let ga = gell_mann_basis(da)?;
    let gb = gell_mann_basis(db)?;
    if bf.a.len() != ga.len() || bf.b.len() != gb.len() || bf.t.len() != ga.len() * gb.len() {
        return Err(Error::DimensionMismatch(
            "Bloch-Fano coefficient counts do not match dims".into(),
        ));
    }
    let ia = ComplexMatrix::identity(da);
    let ib = ComplexMatrix::identity(db);
    let kron = |x: &ComplexMatrix, y: &ComplexMatrix| crate::linalg::tensor_product(x, y);
    let mut acc = kron(&ia, &ib)?;
    for (ai, g) in bf.a.iter().zip(&ga) {
        acc = &acc + &kron(g, &ib)?.scale(*ai);
    }
    for (bj, g) in bf.b.iter().zip(&gb) {
        acc = &acc + &kron(&ia, g)?.scale(*bj);
    }
    for (i, gi) in ga.iter().enumerate() {
        for (j, gj) in gb.iter().enumerate() {
            let tij = bf.t[i * gb.len() + j];
            if tij != 0.0 {
                acc = &acc + &kron(gi, gj)?.scale(tij);
            }
        }
    }
    DensityMatrix::new(acc.scale(1.0 / (da * db) as f64), (da, db))
}

/// Diagonal correlations `(t₁₁, t₂₂, t₃₃)` of a two-qubit Weyl state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeylParams {
    t: [f64; 3],
}

impl WeylParams {
    pub fn new(t: [f64; 3]) -> Result<Self> {
        let min = weyl_spectrum(t)[0];
        if min < -PSD_TOL {
            return Err(Error::NotPsd(min));
        }
        Ok(Self { t })
    }

    pub fn t(&self) -> [f64; 3] {
        self.t
    }

    /// `|t₁||t₂| + |t₁||t₃| + |t₂||t₃|`.
    pub fn omega(&self) -> f64 {
        let [x, y, z] = self.t.map(f64::abs);
        x * y + x * z + y * z
    }

    /// Uniform draw from the tetrahedron of valid parameters.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let t = [
                rng.random_range(-1.0..=1.0),
                rng.random_range(-1.0..=1.0),
                rng.random_range(-1.0..=1.0),
            ];
            if weyl_spectrum(t)[0] >= 0.0 {
                return Self { t };
            }
        }
    }
}

/// Eigenvalues of the Weyl state, ascending.
pub fn weyl_spectrum(t: [f64; 3]) -> [f64; 4] {
    let [t1, t2, t3] = t;
    let mut s = [
        (1.0 - t1 - t2 - t3) / 4.0,
        (1.0 - t1 + t2 + t3) / 4.0,
        (1.0 + t1 - t2 + t3) / 4.0,
        (1.0 + t1 + t2 - t3) / 4.0,
    ];
    s.sort_by(f64::total_cmp);
    s
}

/// `ρ = (I + Σ t_i σ_i⊗σ_i) / 4`.
pub fn weyl_state(params: &WeylParams) -> Result<DensityMatrix> {
    reconstruct(&BlochFano {
        dims: (2, 2),
        a: vec![0.0; 3],
        b: vec![0.0; 3],
        t: vec![params.t[0], 0.0, 0.0, 0.0, params.t[1], 0.0, 0.0, 0.0, params.t[2]],
    })
}

/// Squared Schmidt coefficients of a pure `d ⊗ d` state.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtPureState {
    q: Vec<f64>,
}

impl SchmidtPureState {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.len() < 2 || q.len() > MAX_LOCAL_DIM {
            return Err(Error::UnsupportedDimension(q.len()));
        }
        if q.iter().any(|&x| !(x >= -1e-15)) {
            return Err(Error::InvalidParameter(format!("negative Schmidt weight in {q:?}")));
        }
        let sum: f64 = q.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("Schmidt weights sum to {sum}")));
        }
        Ok(Self {
            q: q.into_iter().map(|x| x.max(0.0)).collect(),
        })
    }

    /// Qubit state `√q₀|00⟩ + √(1-q₀)|11⟩`.
    pub fn qubit(q0: f64) -> Result<Self> {
        Self::new(vec![q0, 1.0 - q0])
    }

    /// `cos α |00⟩ + sin α |11⟩`.
    pub fn from_angle(alpha: f64) -> Self {
        let c2 = alpha.cos().powi(2);
        Self { q: vec![c2, 1.0 - c2] }
    }

    pub fn uniform(d: usize) -> Result<Self> {
        Self::new(vec![1.0 / d as f64; d])
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }
}

/// Projector onto `Σ_j √q_j |jj⟩`.
pub fn schmidt_state(s: &SchmidtPureState) -> DensityMatrix {
    let d = s.dim();
    let mut v = vec![ZERO; d * d];
    for (j, &qj) in s.q.iter().enumerate() {
        v[j * d + j] = Complex64::new(qj.sqrt(), 0.0);
    }
    DensityMatrix::from_trusted(ComplexMatrix::outer(&v), (d, d))
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Hilbert–Schmidt-induced random state `G G† / Tr(G G†)` with `G` a
/// `(d_A d_B) x rank` complex Ginibre matrix.
pub fn random_density_matrix<R: Rng + ?Sized>(
    da: usize,
    db: usize,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let n = da * db;
    if rank == 0 || rank > n {
        return Err(Error::InvalidParameter(format!("rank {rank} outside 1..={n}")));
    }
    let g = ComplexMatrix::from_fn(n, rank, |_, _| complex_gaussian(rng));
    let w = g.matmul(&g.adjoint()).hermitian_part();
    let tr = w.trace().re;
    DensityMatrix::new(w.scale(1.0 / tr), (da, db))
}

/// Haar-random unitary from the QR (Gram–Schmidt) of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<Complex64> = (0..d).map(|_| complex_gaussian(rng)).collect();
        for u in &cols {
            let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= proj * ui;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    ComplexMatrix::from_fn(d, d, |i, j| cols[j][i])
}

/// Product of two random pure states, `|a⟩⟨a| ⊗ |b⟩⟨b|`.
pub fn random_product_pure<R: Rng + ?Sized>(da: usize, db: usize, rng: &mut R) -> DensityMatrix {
    let mut unit = |d: usize| {
        let v: Vec<Complex64> = (0..d).map(|_| complex_gaussian(rng)).collect();
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.into_iter().map(|z| z / n).collect::<Vec<_>>()
    };
    let a = unit(da);
    let b = unit(db);
    let v: Vec<Complex64> = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
    DensityMatrix::from_trusted(ComplexMatrix::outer(&v), (da, db))
}
