//! Iterative solvers used as references: a projected-gradient solver for the
//! Tsallis-2 RFTL step (cross-checks the spectral closed form) and the
//! hindsight-best comparator behind regret accounting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adversary::random_mixed;
use crate::error::{Error, Result};
use crate::hermitian::{
    eigh, frobenius_norm, trace_inner_unchecked, DensityMatrix, HermitianMatrix,
};
use crate::loss::{LossFunction, LossKind};

use super::projection::project_density;
use super::update::{check_eta, tsallis2_objective, GradientSum};

/// Result of an iterative solve over the density-matrix set.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub solution: DensityMatrix,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// One revealed round: measurement E_t and feedback b_t.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub measurement: HermitianMatrix,
    pub feedback: f64,
}

/// Projection onto density matrices with the spectral threshold found by
/// bisection on Σ max(λᵢ − τ, 0) = 1, finished by solving exactly on the
/// detected support. Deliberately separate from the sort-based routine.
fn project_density_bisection(h: &HermitianMatrix) -> Result<DensityMatrix> {
    let eig = eigh(h)?;
    let l = &eig.eigenvalues;
    let mass = |tau: f64| l.iter().map(|&x| (x - tau).max(0.0)).sum::<f64>();
    let mut lo = l[0] - 1.0;
    let mut hi = *l.last().unwrap();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mass(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let support: Vec<f64> = l.iter().copied().filter(|&x| x > lo).collect();
    let tau = (support.iter().sum::<f64>() - 1.0) / support.len() as f64;
    let p: Vec<f64> = l.iter().map(|&x| (x - tau).max(0.0)).collect();
    Ok(DensityMatrix::new_unchecked(eig.compose(&p)))
}

/// Solves min_ω η·tr(Gω) + tr(ω²) − 1 over density matrices by projected
/// gradient descent from I/d with step 1/(2L), L = 2 the gradient's
/// Lipschitz constant. Converged when the step norm drops to `tol`.
pub fn sdp_oracle_update(g: &GradientSum, eta: f64, tol: f64, max_iter: usize) -> Result<OracleReport> {
    check_eta(eta)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let d = g.dim();
    const STEP: f64 = 0.25;
    let mut omega = DensityMatrix::maximally_mixed(d);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let grad = &g.total.scale(eta) + &omega.scale(2.0);
        let next = project_density_bisection(&(&*omega - &grad.scale(STEP)))?;
        iterations += 1;
        let step = frobenius_norm(&(&*next - &*omega));
        omega = next;
        if step <= tol {
            converged = true;
            break;
        }
    }
    let objective = tsallis2_objective(g, eta, &omega);
    Ok(OracleReport { solution: omega, objective, iterations, converged })
}

/// Options for [`hindsight_best_with`].
#[derive(Debug, Clone)]
pub struct HindsightOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Random mixed starting points in addition to I/d.
    pub restarts: usize,
    pub seed: u64,
    /// Caller-supplied feasible starting points, tried first.
    pub extra_starts: Vec<DensityMatrix>,
}

impl Default for HindsightOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 20_000, restarts: 3, seed: 0, extra_starts: Vec::new() }
    }
}

/// Objective values at or below this are the global minimum of a
/// nonnegative loss up to rounding; remaining starts are skipped.
const ZERO_LOSS_CERTIFICATE: f64 = 1e-14;

/// Total loss Σ ℓ(tr E_t ω, b_t).
pub fn total_loss(rounds: &[Observation], loss: &LossFunction, omega: &HermitianMatrix) -> f64 {
    rounds
        .iter()
        .map(|r| loss.value(trace_inner_unchecked(&r.measurement, omega), r.feedback))
        .sum()
}

/// Best fixed state in hindsight, min_ω Σ ℓ_t(tr E_t ω), with default options.
pub fn hindsight_best(
    rounds: &[Observation],
    loss: &LossFunction,
    tol: f64,
    max_iter: usize,
) -> Result<OracleReport> {
    hindsight_best_with(rounds, loss, &HindsightOptions { tol, max_iter, ..Default::default() })
}

/// Multi-start projected gradient on the convex total loss.
///
/// L2 uses accelerated projected gradient with step 1/(2·λ_max) of the
/// measurement Gram matrix and stops when the step norm is at
/// most `tol`. L1 uses a projected subgradient method with step
/// √2/(G·√k) and keeps the best iterate.
pub fn hindsight_best_with(
    rounds: &[Observation],
    loss: &LossFunction,
    opts: &HindsightOptions,
) -> Result<OracleReport> {
    let first = rounds
        .first()
        .ok_or_else(|| Error::InvalidArgument("hindsight oracle needs at least one round".into()))?;
    let d = first.measurement.dim();
    if let Some(bad) = rounds.iter().find(|r| r.measurement.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: bad.measurement.dim() });
    }

    let mut starts: Vec<DensityMatrix> = opts.extra_starts.clone();
    starts.push(DensityMatrix::maximally_mixed(d));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let qubits = d.trailing_zeros() as usize;
    for _ in 0..opts.restarts {
        if d.is_power_of_two() {
            starts.push(random_mixed(qubits, &mut rng)?.rho);
        } else {
            starts.push(random_density_any_dim(d, &mut rng)?);
        }
    }

    let solver: Box<dyn Fn(&DensityMatrix) -> Result<OracleReport>> = match loss.kind {
        LossKind::L2 => {
            let problem = QuadraticProblem::new(rounds);
            Box::new(move |s| problem.solve(s, opts.tol, opts.max_iter))
        }
        LossKind::L1 => Box::new(|s| l1_subgradient(rounds, loss, s, opts.tol, opts.max_iter)),
    };

    let mut best: Option<OracleReport> = None;
    let mut total_iterations = 0;
    for start in &starts {
        let report = solver(start)?;
        total_iterations += report.iterations;
        let better = best.as_ref().is_none_or(|b| report.objective < b.objective);
        if better {
            best = Some(report);
        }
        if best.as_ref().unwrap().objective <= ZERO_LOSS_CERTIFICATE {
            let b = best.as_mut().unwrap();
            b.converged = true;
            break;
        }
    }
    let mut best = best.expect("at least one start");
    best.iterations = total_iterations;
    Ok(best)
}

fn random_density_any_dim<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<DensityMatrix> {
    let g = crate::hermitian::random_hermitian(d, rng);
    project_density(&g)
}

/// Real coordinates of a Hermitian matrix in which tr(AB) is the dot product:
/// diagonal entries, then √2·Re and √2·Im of the strict upper triangle.
pub(crate) fn to_real_vec(h: &HermitianMatrix) -> Vec<f64> {
    let d = h.dim();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(h.get(i, i).re);
    }
    let s = std::f64::consts::SQRT_2;
    for i in 0..d {
        for j in i + 1..d {
            let z = h.get(i, j);
            out.push(s * z.re);
            out.push(s * z.im);
        }
    }
    out
}

pub(crate) fn from_real_vec(d: usize, x: &[f64]) -> HermitianMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut offsets = vec![0usize; d];
    let mut k = d;
    for (i, off) in offsets.iter_mut().enumerate() {
        *off = k;
        k += 2 * (d - i - 1);
    }
    HermitianMatrix::from_upper(d, |i, j| {
        if i == j {
            num_complex::Complex64::new(x[i], 0.0)
        } else {
            let idx = offsets[i] + 2 * (j - i - 1);
            num_complex::Complex64::new(s * x[idx], s * x[idx + 1])
        }
    })
}

/// Σ (⟨e_t, x⟩ − b_t)² = xᵀAx − 2cᵀx + Σb² in real coordinates.
struct QuadraticProblem<'a> {
    rounds: &'a [Observation],
    dim: usize,
    n: usize,
    gram: Vec<f64>,
    linear: Vec<f64>,
    constant: f64,
    step: f64,
}

impl<'a> QuadraticProblem<'a> {
    fn new(rounds: &'a [Observation]) -> Self {
        let dim = rounds[0].measurement.dim();
        let n = dim * dim;
        let mut gram = vec![0.0; n * n];
        let mut linear = vec![0.0; n];
        let mut constant = 0.0;
        let mut norm_sum = 0.0;
        for r in rounds {
            let e = to_real_vec(&r.measurement);
            norm_sum += e.iter().map(|x| x * x).sum::<f64>();
            constant += r.feedback * r.feedback;
            for (i, &ei) in e.iter().enumerate() {
                if ei == 0.0 {
                    continue;
                }
                linear[i] += r.feedback * ei;
                let row = &mut gram[i * n..(i + 1) * n];
                for (g, &ej) in row[i..].iter_mut().zip(&e[i..]) {
                    *g += ei * ej;
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                gram[i * n + j] = gram[j * n + i];
            }
        }
        let mut problem = Self { rounds, dim, n, gram, linear, constant, step: 1.0 };
        let lambda = problem.top_eigenvalue().min(norm_sum);
        problem.step = if lambda > 0.0 { 1.0 / (2.0 * lambda) } else { 1.0 };
        problem
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| self.gram[i * n..(i + 1) * n].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest Gram eigenvalue by power iteration, padded by 5% since the
    /// iteration approaches it from below.
    fn top_eigenvalue(&self) -> f64 {
        let mut v: Vec<f64> = (0..self.n).map(|i| 1.0 + (i as f64 * 0.618_033_988_7).fract()).collect();
        let mut lambda = 0.0;
        for _ in 0..300 {
            let w = self.apply(&v);
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            let next = norm / v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v = w.into_iter().map(|x| x / norm).collect();
            if (next - lambda).abs() <= 1e-6 * next {
                lambda = next;
                break;
            }
            lambda = next;
        }
        1.05 * lambda
    }

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let ax = self.apply(x);
        let value = x.iter().zip(&ax).map(|(a, b)| a * b).sum::<f64>()
            - 2.0 * x.iter().zip(&self.linear).map(|(a, b)| a * b).sum::<f64>()
            + self.constant;
        let grad = ax.iter().zip(&self.linear).map(|(a, c)| 2.0 * (a - c)).collect();
        (value, grad)
    }

    /// Accelerated projected gradient with adaptive momentum restart.
    /// Converged when the projected step from the extrapolated point is at
    /// most `tol`.
    fn solve(&self, start: &DensityMatrix, tol: f64, max_iter: usize) -> Result<OracleReport> {
        let mut omega = start.clone();
        let mut x = to_real_vec(&omega);
        let mut y = x.clone();
        let mut theta = 1.0f64;
        let mut lr = self.step;
        let mut fx = self.value_and_gradient(&x).0;
        let mut iterations = 0;
        let mut converged = false;
        while iterations < max_iter {
            let (_, g) = self.value_and_gradient(&y);
            let z: Vec<f64> = y.iter().zip(&g).map(|(a, b)| a - lr * b).collect();
            let next = project_density(&from_real_vec(self.dim, &z))?;
            let nx = to_real_vec(&next);
            iterations += 1;
            let step = nx.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let fn_ = self.value_and_gradient(&nx).0;
            if fn_ > fx {
                // Momentum overshot: restart from the last accepted point.
                // Without momentum an ascent means the step is too long.
                if theta == 1.0 {
                    lr *= 0.5;
                }
                theta = 1.0;
                y.clone_from(&x);
                if step <= tol {
                    converged = true;
                    break;
                }
                continue;
            }
            let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
            let beta = (theta - 1.0) / theta_next;
            y = nx.iter().zip(&x).map(|(a, b)| a + beta * (a - b)).collect();
            theta = theta_next;
            x = nx;
            fx = fn_;
            omega = next;
            if step <= tol {
                converged = true;
                break;
            }
        }
        let objective = total_loss(self.rounds, &LossFunction::L2, &omega);
        Ok(OracleReport { solution: omega, objective, iterations, converged })
    }
}

fn l1_subgradient(
    rounds: &[Observation],
    loss: &LossFunction,
    start: &DensityMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<OracleReport> {
    let d = start.dim();
    let bound: f64 = rounds.iter().map(|r| frobenius_norm(&r.measurement)).sum::<f64>().max(1e-300);
    let mut omega = start.clone();
    let mut best = omega.clone();
    let mut best_obj = total_loss(rounds, loss, &omega);
    let mut last_improvement = 0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let mut g = HermitianMatrix::zeros(d);
        for r in rounds {
            let z = trace_inner_unchecked(&r.measurement, &omega);
            let s = loss.derivative(z, r.feedback);
            if s != 0.0 {
                g += &r.measurement.scale(s);
            }
        }
        iterations += 1;
        let step = std::f64::consts::SQRT_2 / (bound * (iterations as f64).sqrt());
        let next = project_density(&(&*omega - &g.scale(step)))?;
        let moved = frobenius_norm(&(&*next - &*omega));
        omega = next;
        let obj = total_loss(rounds, loss, &omega);
        if obj < best_obj - tol {
            last_improvement = iterations;
        }
        if obj < best_obj {
            best_obj = obj;
            best = omega.clone();
        }
        if moved <= tol || iterations - last_improvement > max_iter / 4 + 50 {
            converged = true;
            break;
        }
    }
    Ok(OracleReport { solution: best, objective: best_obj, iterations, converged })
}
