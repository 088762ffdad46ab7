//! Kraus channels and the depolarizing constructions used for certification.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{tensor_product, ComplexMatrix, Subsystem};
use crate::states::DensityMatrix;

const TP_TOL: f64 = 1e-10;

/// Completely positive trace-preserving map given by Kraus operators
/// `K_i : C^{input_dim} -> C^{output_dim}`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    input_dim: usize,
    output_dim: usize,
    ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(input_dim: usize, output_dim: usize, ops: Vec<ComplexMatrix>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::InvalidParameter("a channel needs at least one Kraus operator".into()));
        }
        for k in &ops {
            if k.rows() != output_dim || k.cols() != input_dim {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator is {}x{}, expected {output_dim}x{input_dim}",
                    k.rows(),
                    k.cols()
                )));
            }
        }
        let sum = ops
            .iter()
            .fold(ComplexMatrix::zeros(input_dim, input_dim), |acc, k| &acc + &k.adjoint().matmul(k));
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(input_dim));
        if dev > TP_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(Self {
            input_dim,
            output_dim,
            ops,
        })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            input_dim: d,
            output_dim: d,
            ops: vec![ComplexMatrix::identity(d)],
        }
    }

    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        let d = u.rows();
        Self::new(d, u.cols(), vec![u])
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn kraus_ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    /// `Σ K K† = I` within 1e-10.
    pub fn is_unital(&self) -> bool {
        if self.input_dim != self.output_dim {
            return false;
        }
        let d = self.output_dim;
        let sum = self
            .ops
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, k| &acc + &k.matmul(&k.adjoint()));
        sum.max_abs_diff(&ComplexMatrix::identity(d)) <= TP_TOL
    }

    fn act(&self, m: &ComplexMatrix) -> ComplexMatrix {
        act_with(&self.ops, m)
    }
}

fn act_with(ops: &[ComplexMatrix], m: &ComplexMatrix) -> ComplexMatrix {
    let rows = ops[0].rows();
    ops.iter()
        .fold(ComplexMatrix::zeros(rows, rows), |acc, k| &acc + &m.conjugate_by(k))
}

/// Generalized Pauli `X^a Z^b` on `C^d`.
pub fn weyl_heisenberg(d: usize, a: usize, b: usize) -> ComplexMatrix {
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    let mut u = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        // X^a Z^b |j> = ω^{bj} |j + a>
        u[((j + a) % d, j)] = Complex64::from_polar(1.0, omega * (b * j) as f64);
    }
    u
}

/// `N(ρ) = p ρ + (1 - p) Tr(ρ) I/d`, as the Weyl–Heisenberg twirl
/// `{√(p + (1-p)/d²) I} ∪ {√(1-p)/d · X^a Z^b : (a,b) ≠ (0,0)}`.
pub fn depolarizing(d: usize, p: f64) -> Result<KrausChannel> {
    if !(2..=4).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("depolarizing parameter p = {p} outside [0, 1]")));
    }
    let dd = (d * d) as f64;
    let mut ops = vec![ComplexMatrix::identity(d).scale((p + (1.0 - p) / dd).sqrt())];
    let w = (1.0 - p).sqrt() / d as f64;
    if w > 0.0 {
        for a in 0..d {
            for b in 0..d {
                if (a, b) != (0, 0) {
                    ops.push(weyl_heisenberg(d, a, b).scale(w));
                }
            }
        }
    }
    KrausChannel::new(d, d, ops)
}

/// Applies the channel to a state whose total dimension is the channel input.
pub fn apply(channel: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != channel.input_dim {
        return Err(Error::DimensionMismatch(format!(
            "channel input {} vs state dimension {}",
            channel.input_dim,
            rho.dim()
        )));
    }
    DensityMatrix::new(channel.act(rho.matrix()), (channel.output_dim, 1))
}

/// `(I ⊗ N)(ρ)` for `side = B`, `(N ⊗ I)(ρ)` for `side = A`.
pub fn apply_one_sided(channel: &KrausChannel, rho: &DensityMatrix, side: Subsystem) -> Result<DensityMatrix> {
    let (da, db) = rho.dims();
    let (acted, out_dims) = match side {
        Subsystem::A => (da, (channel.output_dim, db)),
        Subsystem::B => (db, (da, channel.output_dim)),
    };
    if acted != channel.input_dim {
        return Err(Error::DimensionMismatch(format!(
            "channel input {} vs subsystem dimension {acted}",
            channel.input_dim
        )));
    }
    let ops = channel
        .ops
        .iter()
        .map(|k| match side {
            Subsystem::A => tensor_product(k, &ComplexMatrix::identity(db)),
            Subsystem::B => tensor_product(&ComplexMatrix::identity(da), k),
        })
        .collect::<Result<Vec<_>>>()?;
    DensityMatrix::new(act_with(&ops, rho.matrix()), out_dims)
}

/// `(N₁ ⊗ N₂)(ρ)`.
pub fn apply_two_local(first: &KrausChannel, second: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let (da, db) = rho.dims();
    if da != first.input_dim || db != second.input_dim {
        return Err(Error::DimensionMismatch(format!(
            "channels act on {}⊗{}, state is {da}⊗{db}",
            first.input_dim, second.input_dim
        )));
    }
    let n = first.output_dim * second.output_dim;
    let mut out = ComplexMatrix::zeros(n, n);
    for k1 in &first.ops {
        for k2 in &second.ops {
            out = &out + &rho.matrix().conjugate_by(&tensor_product(k1, k2)?);
        }
    }
    DensityMatrix::new(out, (first.output_dim, second.output_dim))
}

/// `outer ∘ inner`: `inner` acts first.
pub fn compose(outer: &KrausChannel, inner: &KrausChannel) -> Result<KrausChannel> {
    if inner.output_dim != outer.input_dim {
        return Err(Error::DimensionMismatch(format!(
            "cannot compose: inner outputs {} but outer takes {}",
            inner.output_dim, outer.input_dim
        )));
    }
    let ops = outer
        .ops
        .iter()
        .flat_map(|a| inner.ops.iter().map(move |b| a.matmul(b)))
        .filter(|k| k.max_abs() > 0.0)
        .collect();
    KrausChannel::new(inner.input_dim, outer.output_dim, ops)
}

/// `λ N₁ + (1 - λ) N₂`.
pub fn convex_mix(lambda: f64, first: &KrausChannel, second: &KrausChannel) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("mixing weight {lambda} outside [0, 1]")));
    }
    if first.input_dim != second.input_dim || first.output_dim != second.output_dim {
        return Err(Error::DimensionMismatch("mixing channels of different shapes".into()));
    }
    let mut ops = Vec::new();
    if lambda > 0.0 {
        ops.extend(first.ops.iter().map(|k| k.scale(lambda.sqrt())));
    }
    if lambda < 1.0 {
        ops.extend(second.ops.iter().map(|k| k.scale((1.0 - lambda).sqrt())));
    }
    KrausChannel::new(first.input_dim, first.output_dim, ops)
}

fn qubit_schmidt_weights(q0: f64) -> (f64, f64, f64) {
    let q1 = 1.0 - q0;
    (q0, q1, (q0 * q1).max(0.0).sqrt())
}

/// Output of `(N₂ ⊗ N₂)` on `√q₀|00⟩ + √q₁|11⟩`, qubit depolarizing.
pub fn two_local_qubit_output(p: f64, q0: f64) -> ComplexMatrix {
    let (q0, q1, s) = qubit_schmidt_weights(q0);
    let side = (1.0 - p * p) / 4.0;
    let mut m = ComplexMatrix::from_real_diag(&[
        ((1.0 - p).powi(2) + 4.0 * p * q0) / 4.0,
        side,
        side,
        ((1.0 - p).powi(2) + 4.0 * p * q1) / 4.0,
    ]);
    let c = Complex64::new(p * p * s, 0.0);
    m[(0, 3)] = c;
    m[(3, 0)] = c;
    m
}

/// Output of `(I ⊗ N₂)` on `√q₀|00⟩ + √q₁|11⟩`, qubit depolarizing.
pub fn one_sided_qubit_output(p: f64, q0: f64) -> ComplexMatrix {
    let (q0, q1, s) = qubit_schmidt_weights(q0);
    let mut m = ComplexMatrix::from_real_diag(&[
        (2.0 * p * q0 + (1.0 - p) * q0) / 2.0,
        (1.0 - p) * q0 / 2.0,
        (1.0 - p) * q1 / 2.0,
        (2.0 * p * q1 + (1.0 - p) * q1) / 2.0,
    ]);
    let c = Complex64::new(p * s, 0.0);
    m[(0, 3)] = c;
    m[(3, 0)] = c;
    m
}

/// Output of `(N₃ ⊗ N₃)` on `Σ √q_j |jj⟩`, qutrit depolarizing.
pub fn two_local_qutrit_output(p: f64, q: [f64; 3]) -> ComplexMatrix {
    let t = (1.0 - p).powi(2) / 9.0;
    let mixed = p * (1.0 - p) / 3.0;
    let diag_pure = (p * p + 2.0 * p) / 3.0;
    let mut m = ComplexMatrix::zeros(9, 9);
    for i in 0..3 {
        for j in 0..3 {
            let idx = 3 * i + j;
            let v = if i == j {
                diag_pure * q[i] + t
            } else {
                mixed * (q[i] + q[j]) + t
            };
            m[(idx, idx)] = Complex64::new(v, 0.0);
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                m[(4 * i, 4 * j)] = Complex64::new(p * p * (q[i] * q[j]).max(0.0).sqrt(), 0.0);
            }
        }
    }
    m
}

/// `F((N₂⊗N₂)(ψ)) = [1 + p² + 4p²√(q₀(1-q₀))] / 4`.
pub fn depol_2local_fidelity(p: f64, q0: f64) -> f64 {
    (1.0 + p * p + 4.0 * p * p * (q0 * (1.0 - q0)).max(0.0).sqrt()) / 4.0
}

/// `F((I⊗N₂)(ψ)) = [1 + p + 4p√(q₀(1-q₀))] / 4`.
pub fn depol_fbc_fidelity(p: f64, q0: f64) -> f64 {
    (1.0 + p + 4.0 * p * (q0 * (1.0 - q0)).max(0.0).sqrt()) / 4.0
}

/// `min_q Tr[W (N₃⊗N₃)(ψ_q)] = (2 - 8p²) / 9`, attained at uniform `q`.
pub fn qutrit_witness_min(p: f64) -> f64 {
    (2.0 - 8.0 * p * p) / 9.0
}
