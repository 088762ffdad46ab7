//! Derivative-free Nelder–Mead minimization.

/// Stopping rules and initial simplex size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NelderMead {
    /// Edge length of the initial simplex around the start point.
    pub simplex_scale: f64,
    pub max_evals: usize,
    /// Converged once `f_worst - f_best` across the simplex drops below this.
    pub spread_tol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            simplex_scale: 0.3,
            max_evals: 2000,
            spread_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

impl NelderMead {
    pub fn minimize(&self, mut f: impl FnMut(&[f64]) -> f64, x0: &[f64]) -> Minimum {
        let n = x0.len();
        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            f(x)
        };

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        let v0 = eval(x0, &mut evals);
        simplex.push((x0.to_vec(), v0));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += self.simplex_scale;
            let v = eval(&x, &mut evals);
            simplex.push((x, v));
        }

        let mut converged = false;
        while evals < self.max_evals {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if simplex[n].1 - simplex[0].1 < self.spread_tol {
                converged = true;
                break;
            }
            let mut centroid = vec![0.0; n];
            for (x, _) in &simplex[..n] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / n as f64;
                }
            }
            let toward = |t: f64, from: &[f64]| -> Vec<f64> {
                centroid.iter().zip(from).map(|(c, w)| c + t * (w - c)).collect()
            };

            let worst = simplex[n].0.clone();
            let reflected = toward(-REFLECT, &worst);
            let fr = eval(&reflected, &mut evals);
            if fr < simplex[0].1 {
                let expanded = toward(-EXPAND, &worst);
                let fe = eval(&expanded, &mut evals);
                simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (reflected, fr);
                continue;
            }
            let (contracted, fc) = if fr < simplex[n].1 {
                let xc = toward(-CONTRACT, &worst);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = toward(CONTRACT, &worst);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (contracted, fc);
                continue;
            }
            let best = simplex[0].0.clone();
            for (x, v) in simplex.iter_mut().skip(1) {
                for (xi, bi) in x.iter_mut().zip(&best) {
                    *xi = bi + SHRINK * (*xi - bi);
                }
                *v = eval(x, &mut evals);
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, value) = simplex.swap_remove(0);
        Minimum {
            x,
            value,
            evaluations: evals,
            converged,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let nm = NelderMead::default();
        let m = nm.minimize(|x| (x[0] - 1.0).powi(2) + 2.0 * (x[1] + 0.5).powi(2) + 3.0, &[0.0, 0.0]);
        assert!(m.converged);
        assert!((m.value - 3.0).abs() < 1e-9);
        assert!((m.x[0] - 1.0).abs() < 1e-4);
        assert!((m.x[1] + 0.5).abs() < 1e-4);
    }

    #[test]
    fn rosenbrock_gets_close() {
        let nm = NelderMead {
            max_evals: 20_000,
            spread_tol: 1e-14,
            ..Default::default()
        };
        let m = nm.minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
        );
        assert!(m.value < 1e-8, "value {}", m.value);
    }

    #[test]
    fn respects_evaluation_budget() {
        let nm = NelderMead {
            max_evals: 50,
            spread_tol: 0.0,
            ..Default::default()
        };
        let m = nm.minimize(|x| x.iter().map(|v| v.sin()).sum(), &[0.1; 6]);
        assert!(!m.converged);
        assert!(m.evaluations <= 50 + 7);
    }
}
