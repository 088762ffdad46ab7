//! Worst-case certification of channel classes over Schmidt-parameterized
//! pure inputs, threshold bisection, and closure checks.
//!
//! By convexity of the fidelity and concavity-type arguments for the
//! conditional entropy, the worst case over all inputs is attained on pure
//! states, and local unitaries reduce those to Schmidt form
//! `Σ √q_j |jj⟩`. Certification therefore searches the probability simplex
//! of Schmidt weights.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channels::{apply_one_sided, apply_two_local, compose, convex_mix, depolarizing, KrausChannel};
use crate::entropy::conditional_von_neumann;
use crate::error::{Error, Result};
use crate::fidelity::{fidelity_optimize, fidelity_two_qubit, teleportation_witness, OptimizerConfig};
use crate::io::{csv_line, fmt_num};
use crate::linalg::{tensor_product, ComplexMatrix, Subsystem};
use crate::optim::NelderMead;
use crate::states::{phi_plus, random_density_matrix, random_unitary, schmidt_state, DensityMatrix, SchmidtPureState};

/// Margins within this distance of zero give an undecided verdict.
pub const DECISION_TOL: f64 = 1e-9;
/// Target bracket width for [`threshold`].
pub const THRESHOLD_WIDTH: f64 = 1e-5;
/// Smallest accepted Schmidt grid.
pub const MIN_GRID: usize = 101;
/// Upper limit on simplex grid points for local dimension ≥ 3.
pub const MAX_SIMPLEX_POINTS: usize = 6000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChannelClass {
    /// Fidelity breaking: `F((I⊗N)(ρ)) ≤ 1/d`.
    Fbc,
    /// Two-local fidelity annihilating: `F((N⊗N)(ρ)) ≤ 1/d`.
    Fac2,
    /// Negative-conditional-entropy breaking: `S(A|B) ≥ 0` after `I⊗N`.
    Ncebc,
    /// Two-local negative-conditional-entropy annihilating: `S(B₁|B₂) ≥ 0` after `N⊗N`.
    Nceac,
}

impl ChannelClass {
    pub const ALL: [ChannelClass; 4] = [Self::Fbc, Self::Fac2, Self::Ncebc, Self::Nceac];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Fbc => "FBC",
            Self::Fac2 => "FAC2",
            Self::Ncebc => "NCEBC",
            Self::Nceac => "NCEAC",
        }
    }

    fn two_local(self) -> bool {
        matches!(self, Self::Fac2 | Self::Nceac)
    }

    fn is_fidelity(self) -> bool {
        matches!(self, Self::Fbc | Self::Fac2)
    }
}

impl fmt::Display for ChannelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChannelClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown channel class `{s}`")))
    }
}

/// Channel families indexed by a parameter `p ∈ [0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub enum ChannelFamily {
    QubitDepolarizing,
    QutritDepolarizing,
    /// A fixed user channel; `p` is ignored.
    Custom(KrausChannel),
}

impl ChannelFamily {
    pub fn channel_at(&self, p: f64) -> Result<KrausChannel> {
        match self {
            Self::QubitDepolarizing => depolarizing(2, p),
            Self::QutritDepolarizing => depolarizing(3, p),
            Self::Custom(ch) => Ok(ch.clone()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::QubitDepolarizing => "qubit-depol",
            Self::QutritDepolarizing => "qutrit-depol",
            Self::Custom(_) => "custom",
        }
    }

    fn is_custom(&self) -> bool {
        matches!(self, Self::Custom(_))
    }
}

impl FromStr for ChannelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qubit-depol" => Ok(Self::QubitDepolarizing),
            "qutrit-depol" => Ok(Self::QutritDepolarizing),
            other => Err(Error::UnsupportedFamily(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Member,
    NonMember,
    Undecided,
    /// Every sampled input satisfied the defining inequality, but the
    /// pure-state reduction is not established for this channel.
    SampledEvidence,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Member => "member",
            Self::NonMember => "non-member",
            Self::Undecided => "undecided",
            Self::SampledEvidence => "sampled-evidence",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationReport {
    pub class: ChannelClass,
    pub p: f64,
    pub verdict: Verdict,
    pub worst_input: SchmidtPureState,
    /// Largest output fidelity (fidelity classes) or smallest conditional
    /// entropy (entropy classes) found.
    pub worst_value: f64,
    /// Signed slack of the defining inequality at the worst input:
    /// `1/d - F` or `S`. Positive means the inequality holds.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertifyOptions {
    pub grid: usize,
    pub optimizer: OptimizerConfig,
    pub seed: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            grid: MIN_GRID,
            optimizer: OptimizerConfig::default(),
            seed: 42,
        }
    }
}

/// Images of `|ii⟩⟨jj|` under the lifted map, so any Schmidt input's output
/// is `Σ √(q_i q_j) Φ(|ii⟩⟨jj|)`.
struct SchmidtImages {
    d: usize,
    dims: (usize, usize),
    images: Vec<ComplexMatrix>,
}

impl SchmidtImages {
    fn new(class: ChannelClass, channel: &KrausChannel) -> Result<Self> {
        let d = channel.input_dim();
        let (ops, dims) = if class.two_local() {
            let mut ops = Vec::new();
            for k1 in channel.kraus_ops() {
                for k2 in channel.kraus_ops() {
                    ops.push(tensor_product(k1, k2)?);
                }
            }
            (ops, (channel.output_dim(), channel.output_dim()))
        } else {
            let id = ComplexMatrix::identity(d);
            let ops = channel
                .kraus_ops()
                .iter()
                .map(|k| tensor_product(&id, k))
                .collect::<Result<Vec<_>>>()?;
            (ops, (d, channel.output_dim()))
        };
        let n_out = dims.0 * dims.1;
        let mut images = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut x = ComplexMatrix::zeros(d * d, d * d);
                x[(i * d + i, j * d + j)] = Complex64::new(1.0, 0.0);
                let img = ops
                    .iter()
                    .fold(ComplexMatrix::zeros(n_out, n_out), |acc, k| &acc + &x.conjugate_by(k));
                images.push(img);
            }
        }
        Ok(Self { d, dims, images })
    }

    fn output(&self, q: &[f64]) -> DensityMatrix {
        let n = self.dims.0 * self.dims.1;
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..self.d {
            for j in 0..self.d {
                let w = (q[i] * q[j]).max(0.0).sqrt();
                if w > 0.0 {
                    m = &m + &self.images[i * self.d + j].scale(w);
                }
            }
        }
        DensityMatrix::from_trusted(m.hermitian_part(), self.dims)
    }
}

#[derive(Clone, Copy, Debug)]
struct Score {
    /// Fidelity estimate (a lower bound) or conditional entropy.
    value: f64,
    /// Upper bound on the fidelity; equals `value` for entropies and for
    /// two-qubit outputs.
    upper: f64,
}

fn score(class: ChannelClass, out: &DensityMatrix) -> Result<Score> {
    if class.is_fidelity() {
        if out.dims() == (2, 2) {
            let f = fidelity_two_qubit(out)?.value;
            Ok(Score { value: f, upper: f })
        } else {
            let d = out.dims().0;
            let overlap = out.matrix().expectation(&phi_plus(d)).re;
            Ok(Score {
                value: overlap,
                upper: out.spectrum()?.max(),
            })
        }
    } else {
        let s = conditional_von_neumann(out)?;
        Ok(Score { value: s, upper: s })
    }
}

/// Quantity to minimize: `-F` for fidelity classes, `S` otherwise.
fn objective(class: ChannelClass, s: &Score) -> f64 {
    if class.is_fidelity() {
        -s.value
    } else {
        s.value
    }
}

fn simplex_points(d: usize, n: usize) -> Vec<Vec<f64>> {
    fn rec(remaining: usize, slots: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=remaining).rev() {
            prefix.push(k);
            rec(remaining - k, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut raw = Vec::new();
    rec(n, d, &mut Vec::new(), &mut raw);
    raw.into_iter()
        .map(|c| c.into_iter().map(|k| k as f64 / n as f64).collect())
        .collect()
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Schmidt weight vectors to scan: a `grid`-point line for qubits, a
/// simplex lattice (resolution a multiple of `d`, so the uniform point is
/// included) for larger `d`.
fn candidates(d: usize, grid: usize) -> Vec<Vec<f64>> {
    if d == 2 {
        return (0..grid)
            .map(|k| {
                let q0 = k as f64 / (grid - 1) as f64;
                vec![q0, 1.0 - q0]
            })
            .collect();
    }
    let mut n = grid - 1;
    while n > d && binomial(n + d - 1, d - 1) > MAX_SIMPLEX_POINTS {
        n -= 1;
    }
    n -= n % d;
    simplex_points(d, n.max(d))
}

fn normalize_squares(x: &[f64]) -> Vec<f64> {
    let total: f64 = x.iter().map(|v| v * v).sum();
    if total <= 0.0 {
        return vec![1.0 / x.len() as f64; x.len()];
    }
    x.iter().map(|v| v * v / total).collect()
}

struct Search {
    q: Vec<f64>,
    score: Score,
    max_upper: f64,
}

fn search(class: ChannelClass, images: &SchmidtImages, grid: usize, shortcut: bool) -> Result<Search> {
    let d = images.d;
    let points = if shortcut {
        vec![vec![1.0 / d as f64; d]]
    } else {
        candidates(d, grid)
    };
    let mut best: Option<(Vec<f64>, Score)> = None;
    let mut max_upper = f64::NEG_INFINITY;
    for q in points {
        let s = score(class, &images.output(&q))?;
        max_upper = max_upper.max(s.upper);
        if best.as_ref().is_none_or(|(_, b)| objective(class, &s) < objective(class, b)) {
            best = Some((q, s));
        }
    }
    let (mut q, mut s) = best.expect("at least one candidate");

    if !shortcut {
        let nm = NelderMead {
            simplex_scale: 0.05,
            max_evals: 400,
            spread_tol: 1e-14,
        };
        let x0: Vec<f64> = q.iter().map(|v| v.sqrt()).collect();
        let refined = nm.minimize(
            |x| {
                score(class, &images.output(&normalize_squares(x)))
                    .map(|s| objective(class, &s))
                    .unwrap_or(f64::INFINITY)
            },
            &x0,
        );
        let rq = normalize_squares(&refined.x);
        let rs = score(class, &images.output(&rq))?;
        max_upper = max_upper.max(rs.upper);
        if objective(class, &rs) < objective(class, &s) {
            q = rq;
            s = rs;
        }
    }
    Ok(Search {
        q,
        score: s,
        max_upper,
    })
}

fn simulate(class: ChannelClass, channel: &KrausChannel, input: &SchmidtPureState) -> Result<DensityMatrix> {
    let psi = schmidt_state(input);
    if class.two_local() {
        apply_two_local(channel, channel, &psi)
    } else {
        apply_one_sided(channel, &psi, Subsystem::B)
    }
}

/// The class quantity evaluated by full Kraus simulation, independent of
/// the precomputed images.
fn direct_value(class: ChannelClass, channel: &KrausChannel, input: &SchmidtPureState, opts: &CertifyOptions) -> Result<f64> {
    let out = simulate(class, channel, input)?;
    let s = score(class, &out)?;
    if class.is_fidelity() && out.dims() != (2, 2) {
        Ok(s.value.max(fidelity_optimize(&out, &opts.optimizer, opts.seed)?.value))
    } else {
        Ok(s.value)
    }
}

fn schmidt_from(q: &[f64]) -> Result<SchmidtPureState> {
    let total: f64 = q.iter().sum();
    SchmidtPureState::new(q.iter().map(|v| v / total).collect())
}

/// Decides membership of the channel `family(p)` in `class`.
pub fn certify(class: ChannelClass, family: &ChannelFamily, p: f64, opts: &CertifyOptions) -> Result<ClassificationReport> {
    if opts.grid < MIN_GRID {
        return Err(Error::InvalidParameter(format!("grid size {} below {MIN_GRID}", opts.grid)));
    }
    let channel = family.channel_at(p)?;
    let images = SchmidtImages::new(class, &channel)?;
    let shortcut = class == ChannelClass::Ncebc && channel.is_unital();
    let mut found = search(class, &images, opts.grid, shortcut)?;
    let worst_input = schmidt_from(&found.q)?;

    if class.is_fidelity() && images.dims != (2, 2) {
        let out = images.output(&found.q);
        let opt = fidelity_optimize(&out, &opts.optimizer, opts.seed)?;
        found.score.value = found.score.value.max(opt.value);
        found.max_upper = found.max_upper.max(found.score.value);
    }

    let (margin, upper_margin) = if class.is_fidelity() {
        let thr = 1.0 / images.dims.0 as f64;
        (thr - found.score.value, thr - found.max_upper)
    } else {
        (found.score.value, found.score.value)
    };

    let mut verdict = if margin < -DECISION_TOL {
        let recomputed = direct_value(class, &channel, &worst_input, opts)?;
        let confirms = (recomputed - found.score.value).abs() <= DECISION_TOL;
        if confirms {
            Verdict::NonMember
        } else {
            Verdict::Undecided
        }
    } else if upper_margin > DECISION_TOL {
        Verdict::Member
    } else {
        Verdict::Undecided
    };
    if verdict == Verdict::Member && family.is_custom() {
        verdict = Verdict::SampledEvidence;
    }

    Ok(ClassificationReport {
        class,
        p,
        verdict,
        worst_input,
        worst_value: found.score.value,
        margin,
    })
}

/// Certification at each `p`, in input order.
pub fn sweep(class: ChannelClass, family: &ChannelFamily, ps: &[f64], opts: &CertifyOptions) -> Result<Vec<ClassificationReport>> {
    ps.iter().map(|&p| certify(class, family, p, opts)).collect()
}

pub const SWEEP_CSV_HEADER: &str = "class,p,q0_worst,value,verdict,margin";

/// `q0_worst` is the first Schmidt weight of the worst-case input.
pub fn sweep_csv(reports: &[ClassificationReport]) -> String {
    let mut out = format!("{SWEEP_CSV_HEADER}\n");
    for r in reports {
        out.push_str(&csv_line(&[
            r.class.as_str().to_string(),
            fmt_num(r.p),
            fmt_num(r.worst_input.q()[0]),
            fmt_num(r.worst_value),
            r.verdict.as_str().to_string(),
            fmt_num(r.margin),
        ]));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdResult {
    pub p_star: f64,
    /// `lo` is not a non-member, `hi` is.
    pub bracket: (f64, f64),
    pub iterations: usize,
}

/// Boundary between non-non-member and non-member verdicts, by bisection
/// from a 21-point scan of `[0, 1]`.
pub fn threshold(class: ChannelClass, family: &ChannelFamily, opts: &CertifyOptions) -> Result<ThresholdResult> {
    if family.is_custom() {
        return Err(Error::UnsupportedFamily(
            "thresholds need a parameterized family, not a fixed channel".into(),
        ));
    }
    let inside = |p: f64| -> Result<bool> { Ok(certify(class, family, p, opts)?.verdict != Verdict::NonMember) };
    let grid: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
    let flags = grid.iter().map(|&p| inside(p)).collect::<Result<Vec<_>>>()?;
    let first_out = flags.iter().position(|f| !f);
    let k = match first_out {
        Some(0) | None => {
            return Err(Error::NonMonotone(format!(
                "{class} verdicts on {} do not change across [0, 1]",
                family.name()
            )))
        }
        Some(k) => k,
    };
    if flags[k..].iter().any(|&f| f) {
        return Err(Error::NonMonotone(format!(
            "{class} verdicts on {} switch back to inside after p = {}",
            family.name(),
            grid[k]
        )));
    }
    let (mut lo, mut hi) = (grid[k - 1], grid[k]);
    let mut iterations = 0;
    while hi - lo > THRESHOLD_WIDTH {
        let mid = 0.5 * (lo + hi);
        if inside(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(ThresholdResult {
        p_star: 0.5 * (lo + hi),
        bracket: (lo, hi),
        iterations,
    })
}

/// Minimum of `Tr[W (N⊗N)(ψ_q)]` over Schmidt inputs, for the teleportation
/// witness `W` on the channel's output dimension.
pub fn witness_minimum(channel: &KrausChannel, grid: usize) -> Result<(SchmidtPureState, f64)> {
    let w = teleportation_witness(channel.output_dim())?;
    let images = SchmidtImages::new(ChannelClass::Fac2, channel)?;
    let value = |q: &[f64]| w.matrix.trace_product(images.output(q).matrix()).re;
    let mut best = candidates(images.d, grid.max(MIN_GRID))
        .into_iter()
        .map(|q| {
            let v = value(&q);
            (q, v)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty grid");
    let nm = NelderMead {
        simplex_scale: 0.05,
        max_evals: 600,
        spread_tol: 1e-15,
    };
    let x0: Vec<f64> = best.0.iter().map(|v| v.sqrt()).collect();
    let refined = nm.minimize(|x| value(&normalize_squares(x)), &x0);
    let rq = normalize_squares(&refined.x);
    let rv = value(&rq);
    if rv < best.1 {
        best = (rq, rv);
    }
    Ok((schmidt_from(&best.0)?, best.1))
}

fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// `S(B₁|B₂)` of `(N₂⊗N₂)(ψ_{q₀})` from its eigenvalues.
pub fn ncea_conditional_entropy_closed_form(p: f64, q0: f64) -> f64 {
    let p2 = p * p;
    let p4 = p2 * p2;
    let sigma = (p2 - 4.0 * p2 * q0 + 4.0 * p4 * q0 + 4.0 * p2 * q0 * q0 - 4.0 * p4 * q0 * q0)
        .max(0.0)
        .sqrt();
    let l12 = (1.0 - p2) / 4.0;
    let l3 = (1.0 + p2 - 2.0 * sigma) / 4.0;
    let l4 = (1.0 + p2 + 2.0 * sigma) / 4.0;
    let l5 = (1.0 - p + 2.0 * p * q0) / 2.0;
    let l6 = (1.0 + p - 2.0 * p * q0) / 2.0;
    -2.0 * xlog2x(l12) - xlog2x(l3) - xlog2x(l4) + xlog2x(l5) + xlog2x(l6)
}

/// `S(A|B)` of `(I⊗N₂)(cos α|00⟩ + sin α|11⟩)` from its eigenvalues.
pub fn ncebc_conditional_entropy_closed_form(p: f64, alpha: f64) -> f64 {
    let (c2, s2) = (alpha.cos().powi(2), alpha.sin().powi(2));
    let c4 = (4.0 * alpha).cos();
    let sigma = (2.0 + 4.0 * p + 10.0 * p * p + 2.0 * c4 + 4.0 * p * c4 - 6.0 * p * p * c4)
        .max(0.0)
        .sqrt();
    let l1 = (1.0 - p) / 2.0 * c2;
    let l2 = (1.0 - p) / 2.0 * s2;
    let l3 = (2.0 + 2.0 * p - sigma) / 8.0;
    let l4 = (2.0 + 2.0 * p + sigma) / 8.0;
    let c2a = (2.0 * alpha).cos();
    let l5 = (1.0 + p * c2a) / 2.0;
    let l6 = (1.0 - p * c2a) / 2.0;
    -xlog2x(l1) - xlog2x(l2) - xlog2x(l3) - xlog2x(l4) + xlog2x(l5) + xlog2x(l6)
}

/// Outcome of one closure property over a sample of random states.
#[derive(Clone, Debug, PartialEq)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub samples: usize,
    pub failures: usize,
    /// Smallest slack of the class inequality seen; negative is a failure.
    pub worst_margin: f64,
}

impl PropertyCheck {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct Tally {
    name: &'static str,
    samples: usize,
    failures: usize,
    worst: f64,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            samples: 0,
            failures: 0,
            worst: f64::INFINITY,
        }
    }

    fn record(&mut self, margin: f64) {
        self.samples += 1;
        self.worst = self.worst.min(margin);
        if margin < -DECISION_TOL {
            self.failures += 1;
        }
    }

    fn finish(self) -> PropertyCheck {
        PropertyCheck {
            name: self.name,
            samples: self.samples,
            failures: self.failures,
            worst_margin: self.worst,
        }
    }
}

fn fidelity_slack(rho: &DensityMatrix) -> Result<f64> {
    Ok(0.5 - fidelity_two_qubit(rho)?.value)
}

/// Closure checks on qubit depolarizing instances: every base channel is
/// certified first, then composites are exercised on `samples` random
/// two-qubit states (ranks 1–4).
pub fn property_suite(samples: usize, seed: u64) -> Result<Vec<PropertyCheck>> {
    let opts = CertifyOptions {
        seed,
        ..Default::default()
    };
    let fbc = depolarizing(2, 0.3)?;
    let fac = depolarizing(2, 0.5)?;
    let fac_other = depolarizing(2, 0.2)?;
    let nce_a = depolarizing(2, 0.7)?;
    let nce_b = depolarizing(2, 0.9)?;

    let fbc_composite = compose(&fbc, &fbc)?;
    let fac_mix = convex_mix(0.5, &fac, &fac_other)?;
    let ncebc_composite = compose(&nce_a, &nce_b)?;

    let mut pre = Tally::new("preconditions");
    let base = [
        (ChannelClass::Fbc, 0.3),
        (ChannelClass::Fac2, 0.5),
        (ChannelClass::Fac2, 0.2),
        (ChannelClass::Ncebc, 0.7),
    ];
    for (class, p) in base {
        let r = certify(class, &ChannelFamily::QubitDepolarizing, p, &opts)?;
        pre.record(if r.verdict == Verdict::Member { r.margin } else { -1.0 });
    }
    // composites are fixed channels, so sampled evidence is the strongest
    // verdict they can receive
    for (class, ch) in [
        (ChannelClass::Fbc, &fbc_composite),
        (ChannelClass::Fac2, &fac_mix),
        (ChannelClass::Ncebc, &ncebc_composite),
    ] {
        let r = certify(class, &ChannelFamily::Custom(ch.clone()), 0.0, &opts)?;
        let ok = matches!(r.verdict, Verdict::Member | Verdict::SampledEvidence);
        pre.record(if ok { r.margin } else { -1.0 });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut composition = Tally::new("fbc_composition");
    let mut post = Tally::new("fbc_unitary_composition");
    let mut fac_post = Tally::new("fac2_unitary_composition");
    let mut mixing = Tally::new("fac2_convex_mixing");
    let mut extension = Tally::new("mixed_state_extension");
    let mut nce = Tally::new("ncebc_composition");

    for _ in 0..samples {
        let rank = rng.random_range(1..=4);
        let rho = random_density_matrix(2, 2, rank, &mut rng)?;

        composition.record(fidelity_slack(&apply_one_sided(&fbc_composite, &rho, Subsystem::B)?)?);

        let u = KrausChannel::unitary(random_unitary(2, &mut rng))?;
        let after = compose(&u, &fbc)?;
        let before = compose(&fbc, &u)?;
        post.record(fidelity_slack(&apply_one_sided(&after, &rho, Subsystem::B)?)?);
        post.record(fidelity_slack(&apply_one_sided(&before, &rho, Subsystem::B)?)?);

        let v = KrausChannel::unitary(random_unitary(2, &mut rng))?;
        let left = compose(&fac, &u)?;
        let right = compose(&fac, &v)?;
        fac_post.record(fidelity_slack(&apply_two_local(&left, &right, &rho)?)?);

        mixing.record(fidelity_slack(&apply_two_local(&fac_mix, &fac_mix, &rho)?)?);

        extension.record(fidelity_slack(&apply_one_sided(&fbc, &rho, Subsystem::B)?)?);
        extension.record(fidelity_slack(&apply_two_local(&fac, &fac, &rho)?)?);

        nce.record(conditional_von_neumann(&apply_one_sided(&ncebc_composite, &rho, Subsystem::B)?)?);
    }

    Ok([pre, composition, post, fac_post, mixing, extension, nce]
        .into_iter()
        .map(Tally::finish)
        .collect())
}
