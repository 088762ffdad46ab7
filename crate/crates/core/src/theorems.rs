//! Sampling harness for the entropy–fidelity relations of two-qubit states,
//! Weyl states, and the relative-entropy quantity `R`.
//!
//! Each check evaluates both sides of an inequality or biconditional on
//! random states. Samples where a compared quantity lies within
//! [`BOUNDARY_TOL`] of its threshold are excluded (and counted) rather than
//! perturbed. Checks with a side condition keep drawing states until the
//! requested number of in-domain samples is reached.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::entropy::{
    conditional_min_entropy, conditional_renyi, conditional_tsallis, conditional_tsallis2_closed_form, min_entropy,
    renyi, tsallis,
};
use crate::error::{Error, Result};
use crate::fidelity::{fidelity, fidelity_two_qubit, r_quantity, OptimizerConfig};
use crate::io::{csv_line, fmt_num};
use crate::linalg::Subsystem;
use crate::states::{decompose, random_density_matrix, weyl_state, BlochFano, DensityMatrix, WeylParams};

pub const BOUNDARY_TOL: f64 = 1e-9;
/// Stop drawing once this many times the target count has been tried.
const MAX_DRAW_FACTOR: usize = 50;

/// Summary of one relation over a sample.
#[derive(Clone, Debug, PartialEq)]
pub struct TheoremCheck {
    pub id: &'static str,
    /// In-domain samples evaluated (boundary exclusions included).
    pub samples: usize,
    pub failures: usize,
    /// Samples inside the boundary exclusion zone.
    pub excluded: usize,
    /// Draws rejected by the relation's side condition.
    pub out_of_domain: usize,
    /// Smallest signed slack seen; negative means a counterexample.
    pub worst_margin: f64,
    /// The state with the worst margin, when that margin is a failure.
    pub counterexample: Option<DensityMatrix>,
    /// Reported for comparison only; failures here do not fail a run.
    pub informational: bool,
}

impl TheoremCheck {
    pub fn passed(&self) -> bool {
        self.informational || self.failures == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Lemma1,
    Renyi,
    Tsallis,
    MinEntropy,
    Weyl,
    Relent,
    All,
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Lemma1 => "lemma1",
            Self::Renyi => "renyi",
            Self::Tsallis => "tsallis",
            Self::MinEntropy => "minentropy",
            Self::Weyl => "weyl",
            Self::Relent => "relent",
            Self::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Self::Lemma1,
            Self::Renyi,
            Self::Tsallis,
            Self::MinEntropy,
            Self::Weyl,
            Self::Relent,
            Self::All,
        ]
        .into_iter()
        .find(|x| x.as_str() == s)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    /// In-domain samples per two-qubit or Weyl check.
    pub samples: usize,
    /// Random full-rank two-qubit states for the `R ≥ -F` check; Werner and
    /// qutrit isotropic families get a tenth and a fiftieth of this.
    pub relent_samples: usize,
    pub seed: u64,
    pub optimizer: OptimizerConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            relent_samples: 1_000,
            seed: 42,
            optimizer: OptimizerConfig::default(),
        }
    }
}

enum Outcome {
    Margin(f64),
    Boundary,
    OutOfDomain,
}

/// `x > 0 ⟺ y > 0`, signed by agreement and sized by the nearer boundary.
fn iff(x: f64, y: f64) -> Outcome {
    if x.abs() < BOUNDARY_TOL || y.abs() < BOUNDARY_TOL {
        return Outcome::Boundary;
    }
    let m = x.abs().min(y.abs());
    Outcome::Margin(if (x > 0.0) == (y > 0.0) { m } else { -m })
}

/// `lhs ≤ rhs`.
fn at_most(lhs: f64, rhs: f64) -> Outcome {
    Outcome::Margin(rhs - lhs)
}

/// `lhs < rhs`, with the boundary excluded.
fn below(lhs: f64, rhs: f64) -> Outcome {
    let m = rhs - lhs;
    if m.abs() < BOUNDARY_TOL {
        Outcome::Boundary
    } else {
        Outcome::Margin(m)
    }
}

struct Acc {
    check: TheoremCheck,
}

impl Acc {
    fn new(id: &'static str, informational: bool) -> Self {
        Self {
            check: TheoremCheck {
                id,
                samples: 0,
                failures: 0,
                excluded: 0,
                out_of_domain: 0,
                worst_margin: f64::INFINITY,
                counterexample: None,
                informational,
            },
        }
    }

    fn push(&mut self, outcome: Outcome, state: &DensityMatrix) {
        let c = &mut self.check;
        match outcome {
            Outcome::OutOfDomain => c.out_of_domain += 1,
            Outcome::Boundary => {
                c.samples += 1;
                c.excluded += 1;
            }
            Outcome::Margin(m) => {
                c.samples += 1;
                if m < -BOUNDARY_TOL {
                    c.failures += 1;
                }
                if m < c.worst_margin {
                    c.worst_margin = m;
                    if m < -BOUNDARY_TOL {
                        c.counterexample = Some(state.clone());
                    }
                }
            }
        }
    }
}

fn sample_rng(seed: u64, group: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ group.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(index);
    rng
}

/// Draws states until every check has `target` in-domain samples.
fn run_sampled<S>(
    ids: &[(&'static str, bool)],
    target: usize,
    seed: u64,
    group: u64,
    draw: impl Fn(&mut ChaCha8Rng) -> Result<S>,
    state: impl Fn(&S) -> &DensityMatrix,
    eval: impl Fn(&S) -> Result<Vec<Outcome>>,
) -> Result<Vec<TheoremCheck>> {
    let mut accs: Vec<Acc> = ids.iter().map(|&(id, info)| Acc::new(id, info)).collect();
    let limit = target.saturating_mul(MAX_DRAW_FACTOR).max(1);
    let mut index = 0usize;
    while accs.iter().any(|a| a.check.samples < target) && index < limit {
        let mut rng = sample_rng(seed, group, index as u64);
        let s = draw(&mut rng)?;
        let outcomes = eval(&s)?;
        for (acc, o) in accs.iter_mut().zip(outcomes) {
            if acc.check.samples < target {
                acc.push(o, state(&s));
            }
        }
        index += 1;
    }
    Ok(accs.into_iter().map(|a| a.check).collect())
}

/// Two-qubit states from the induced Hilbert–Schmidt measure with a
/// uniformly chosen rank 1–4, so entangled and separable samples both occur.
fn random_two_qubit(rng: &mut ChaCha8Rng) -> Result<DensityMatrix> {
    let rank = rng.random_range(1..=4);
    random_density_matrix(2, 2, rank, rng)
}

/// Bloch-form quantities shared by the two-qubit relations.
pub struct TwoQubitSummary {
    pub bloch: BlochFano,
    pub a_sq: f64,
    pub b_sq: f64,
    pub t_trace_norm: f64,
    pub t_frobenius_sq: f64,
    /// `2(σ₁σ₂ + σ₁σ₃ + σ₂σ₃)` over the singular values of `T`.
    pub r: f64,
    pub fidelity: f64,
}

pub fn two_qubit_summary(rho: &DensityMatrix) -> Result<TwoQubitSummary> {
    let bloch = decompose(rho)?;
    let s = bloch.t_singular_values()?;
    Ok(TwoQubitSummary {
        a_sq: bloch.a_norm_sq(),
        b_sq: bloch.b_norm_sq(),
        t_trace_norm: s.iter().sum(),
        t_frobenius_sq: bloch.t_frobenius_sq(),
        r: 2.0 * (s[0] * s[1] + s[0] * s[2] + s[1] * s[2]),
        fidelity: fidelity_two_qubit(rho)?.value,
        bloch,
    })
}

fn lemma1_outcome(q: &TwoQubitSummary) -> Outcome {
    iff(q.t_trace_norm - 1.0, q.t_frobenius_sq - (1.0 - q.r))
}

pub fn check_lemma1(cfg: &SuiteConfig) -> Result<Vec<TheoremCheck>> {
    run_sampled(
        &[("lemma1", false)],
        cfg.samples,
        cfg.seed,
        1,
        random_two_qubit,
        |rho| rho,
        |rho| Ok(vec![lemma1_outcome(&two_qubit_summary(rho)?)]),
    )
}

pub fn check_renyi2_bounds(cfg: &SuiteConfig) -> Result<Vec<TheoremCheck>> {
    run_sampled(
        &[("thm6", false), ("thm7", false)],
        cfg.samples,
        cfg.seed,
        2,
        random_two_qubit,
        |rho| rho,
        |rho| {
            let q = two_qubit_summary(rho)?;
            let denom = 2.0 + q.a_sq + q.b_sq - q.r;
            if denom <= 0.0 {
                return Ok(vec![Outcome::OutOfDomain, Outcome::OutOfDomain]);
            }
            let gamma = 4.0 / denom;
            let delta = (2.0 + 2.0 * q.b_sq) / denom;
            let f = q.fidelity - 0.5;
            Ok(vec![
                iff(f, gamma.log2() - renyi(rho, 2.0)?),
                iff(f, delta.log2() - conditional_renyi(rho, 2.0)?),
            ])
        },
    )
}

pub fn check_min_entropy_bounds(cfg: &SuiteConfig) -> Result<Vec<TheoremCheck>> {
    run_sampled(
        &[("thm8", false), ("thm9", false), ("thm10", false), ("thm11", false)],
        cfg.samples,
        cfg.seed,
        3,
        random_two_qubit,
        |rho| rho,
        |rho| {
            let f = fidelity_two_qubit(rho)?.value;
            let s_ab = min_entropy(rho)?;
            let s_cond = conditional_min_entropy(rho)?;
            let rho_b_norm = rho.reduced(Subsystem::B)?.spectrum()?.max();
            let useful = f - 0.5 > BOUNDARY_TOL;
            Ok(vec![
                at_most(s_ab, -f.log2()),
                at_most(s_cond, -(f / rho_b_norm).log2()),
                if useful { below(s_ab, 1.0) } else { Outcome::OutOfDomain },
                if useful {
                    below(s_cond, (2.0 * rho_b_norm).log2())
                } else {
                    Outcome::OutOfDomain
                },
            ])
        },
    )
}

/// The conditional relation uses the difference form
/// `(1 - |a|² + |b|² - ||T||₂²)/4`; `thm13_quotient` repeats it with the
/// quotient-form conditional Tsallis entropy for comparison.
pub fn check_tsallis_bounds(cfg: &SuiteConfig) -> Result<Vec<TheoremCheck>> {
    run_sampled(
        &[("thm12", false), ("thm13", false), ("thm13_quotient", true)],
        cfg.samples,
        cfg.seed,
        4,
        random_two_qubit,
        |rho| rho,
        |rho| {
            let q = two_qubit_summary(rho)?;
            let eta = (2.0 - q.a_sq - q.b_sq + q.r) / 4.0;
            let lambda = (q.b_sq - q.a_sq + q.r) / 4.0;
            let f = q.fidelity - 0.5;
            Ok(vec![
                iff(f, eta - tsallis(rho, 2.0)?),
                iff(f, lambda - conditional_tsallis2_closed_form(&q.bloch)?),
                iff(f, lambda - conditional_tsallis(rho, 2.0)?),
            ])
        },
    )
}

struct WeylSample {
    t: [f64; 3],
    rho: DensityMatrix,
}

/// Observations on Weyl states; the first two only where `0 < Ω < 1`.
pub fn check_weyl_observations(cfg: &SuiteConfig) -> Result<Vec<TheoremCheck>> {
    run_sampled(
        &[
            ("obs1", false),
            ("obs2", false),
            ("obs3", false),
            ("obs4", false),
            ("obs5", false),
            ("obs6", false),
        ],
        cfg.samples,
        cfg.seed,
        5,
        |rng| {
            let params = WeylParams::random(rng);
            Ok(WeylSample {
                t: params.t(),
                rho: weyl_state(&params)?,
            })
        },
        |s| &s.rho,
        |s| {
            let [t1, t2, t3] = s.t.map(f64::abs);
            let omega = t1 * t2 + t1 * t3 + t2 * t3;
            let f = fidelity_two_qubit(&s.rho)?.value - 0.5;
            let in_domain = omega > 0.0 && omega < 1.0;
            let cond_tsallis = conditional_tsallis2_closed_form(&decompose(&s.rho)?)?;
            Ok(vec![
                if in_domain {
                    iff(f, (2.0 / (1.0 - omega)).log2() - renyi(&s.rho, 2.0)?)
                } else {
                    Outcome::OutOfDomain
                },
                if in_domain {
                    iff(f, (1.0 / (1.0 - omega)).log2() - conditional_renyi(&s.rho, 2.0)?)
                } else {
                    Outcome::OutOfDomain
                },
                iff(f, 1.0 - min_entropy(&s.rho)?),
                iff(f, -conditional_min_entropy(&s.rho)?),
                iff(f, (1.0 + omega) / 2.0 - tsallis(&s.rho, 2.0)?),
                iff(f, omega / 2.0 - cond_tsallis),
            ])
        },
    )
}

fn relent_outcome(rho: &DensityMatrix, cfg: &SuiteConfig, seed: u64) -> Result<Outcome> {
    let r = r_quantity(rho, &cfg.optimizer, seed)?;
    let f = fidelity(rho, &cfg.optimizer, seed)?;
    // the optimizer value of R is a lower bound on the maximum, and the
    // fidelity's lower bracket end gives the stricter comparison
    Ok(at_most(-f.value, r))
}

/// `R(ρ) ≥ -F(ρ)` on full-rank two-qubit states, Werner states, and
/// qutrit isotropic states.
pub fn check_relative_entropy_theorem(cfg: &SuiteConfig) -> Result<Vec<TheoremCheck>> {
    let n = cfg.relent_samples;
    let mut out = run_sampled(
        &[("thm14", false)],
        n,
        cfg.seed,
        6,
        |rng| random_density_matrix(2, 2, 4, rng),
        |rho| rho,
        |rho| Ok(vec![relent_outcome(rho, cfg, cfg.seed)?]),
    )?;
    out.extend(run_sampled(
        &[("thm14_werner", false)],
        (n / 10).max(1),
        cfg.seed,
        7,
        |rng| DensityMatrix::isotropic(2, rng.random_range(0.0..0.99)),
        |rho| rho,
        |rho| Ok(vec![relent_outcome(rho, cfg, cfg.seed)?]),
    )?);
    out.extend(run_sampled(
        &[("thm14_isotropic3", false)],
        (n / 50).max(1),
        cfg.seed,
        8,
        |rng| DensityMatrix::isotropic(3, rng.random_range(0.0..0.99)),
        |rho| rho,
        |rho| Ok(vec![relent_outcome(rho, cfg, cfg.seed)?]),
    )?);
    Ok(out)
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<Vec<TheoremCheck>> {
    let mut out = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Lemma1 {
        out.extend(check_lemma1(cfg)?);
    }
    if all || suite == Suite::Renyi {
        out.extend(check_renyi2_bounds(cfg)?);
    }
    if all || suite == Suite::MinEntropy {
        out.extend(check_min_entropy_bounds(cfg)?);
    }
    if all || suite == Suite::Tsallis {
        out.extend(check_tsallis_bounds(cfg)?);
    }
    if all || suite == Suite::Weyl {
        out.extend(check_weyl_observations(cfg)?);
    }
    if all || suite == Suite::Relent {
        out.extend(check_relative_entropy_theorem(cfg)?);
    }
    Ok(out)
}

pub const THEOREM_CSV_HEADER: &str = "theorem_id,samples,failures,excluded,worst_margin";

pub fn report_csv(checks: &[TheoremCheck]) -> String {
    let mut out = format!("{THEOREM_CSV_HEADER}\n");
    for c in checks {
        out.push_str(&csv_line(&[
            c.id.to_string(),
            c.samples.to_string(),
            c.failures.to_string(),
            c.excluded.to_string(),
            fmt_num(c.worst_margin),
        ]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteConfig {
        SuiteConfig {
            samples: 300,
            relent_samples: 20,
            ..Default::default()
        }
    }

    #[test]
    fn bell_and_mixed_reference_points() {
        let bell = DensityMatrix::maximally_entangled(2);
        let q = two_qubit_summary(&bell).unwrap();
        assert!((q.t_trace_norm - 3.0).abs() < 1e-12);
        assert!((q.r - 6.0).abs() < 1e-12);
        assert!(matches!(lemma1_outcome(&q), Outcome::Margin(m) if m > 0.0));

        let mixed = DensityMatrix::maximally_mixed((2, 2));
        let q = two_qubit_summary(&mixed).unwrap();
        assert_eq!(q.t_trace_norm, 0.0);
        // ‖T‖₁ - 1 = -1 and ‖T‖₂² - (1 - R) = -1: both false
        assert!(matches!(lemma1_outcome(&q), Outcome::Margin(m) if (m - 1.0).abs() < 1e-12));

        let cfg = SuiteConfig::default();
        assert!(matches!(relent_outcome(&mixed, &cfg, 1).unwrap(), Outcome::Margin(m) if m >= 2.0 - 1e-9));
    }

    #[test]
    fn small_suite_runs_clean() {
        let checks = run_suite(Suite::All, &small()).unwrap();
        assert_eq!(checks.len(), 19);
        for c in &checks {
            assert!(c.passed(), "{c:?}");
            assert!(c.samples >= 1);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = report_csv(&run_suite(Suite::Lemma1, &small()).unwrap());
        let b = report_csv(&run_suite(Suite::Lemma1, &small()).unwrap());
        assert_eq!(a, b);
        let other = SuiteConfig { seed: 7, ..small() };
        assert_ne!(a, report_csv(&run_suite(Suite::Lemma1, &other).unwrap()));
    }

    #[test]
    fn suite_names_round_trip() {
        for s in ["lemma1", "renyi", "tsallis", "minentropy", "weyl", "relent", "all"] {
            assert_eq!(s.parse::<Suite>().unwrap().as_str(), s);
        }
        assert!("obs".parse::<Suite>().is_err());
    }

    #[test]
    fn csv_layout() {
        let csv = report_csv(&run_suite(Suite::Lemma1, &small()).unwrap());
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(THEOREM_CSV_HEADER));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "lemma1");
        assert_eq!(row[1], "300");
        assert_eq!(row[2], "0");
    }
}
