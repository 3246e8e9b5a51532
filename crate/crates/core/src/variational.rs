//! Statevector simulation of the variational predictor.
//!
//! A layered circuit acts on n system qubits plus n reference qubits starting
//! from |0…0⟩. The system marginal ρ_A(θ) is steered by gradient descent on
//! η·tr(Gρ_A) + tr(ρ_A²) − 1, whose global minimum over all density matrices
//! is the Tsallis-2 RFTL prediction.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::hermitian::{trace_inner_unchecked, DensityMatrix, HermitianMatrix};
use crate::spectrahedron::{check_eta, tsallis2_objective, tsallis2_rftl_update, GradientSum};

/// Largest system size the simulator accepts (2n qubits in the register).
pub const MAX_SYSTEM_QUBITS: usize = 4;
/// Central finite-difference step for the parameter gradient.
pub const FD_STEP: f64 = 1e-4;
const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct Ansatz {
    pub n_system: usize,
    pub n_reference: usize,
    pub layers: usize,
    pub params: Vec<f64>,
}

impl Ansatz {
    /// Equal-size reference register and 2n layers, all angles zero.
    pub fn new(n_system: usize) -> Result<Self> {
        Self::with_layers(n_system, n_system, 2 * n_system)
    }

    pub fn with_layers(n_system: usize, n_reference: usize, layers: usize) -> Result<Self> {
        if n_system == 0 || n_system > MAX_SYSTEM_QUBITS || n_reference > MAX_SYSTEM_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "register sizes ({n_system}, {n_reference}) outside 1..={MAX_SYSTEM_QUBITS}"
            )));
        }
        if layers == 0 {
            return Err(Error::InvalidArgument("ansatz needs at least one layer".into()));
        }
        let n_params = layers * (n_system + n_reference) * 3;
        Ok(Self { n_system, n_reference, layers, params: vec![0.0; n_params] })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_system + self.n_reference
    }

    pub fn n_params(&self) -> usize {
        self.layers * self.n_qubits() * 3
    }

    /// Index of angle `k` (0: first Rz, 1: Ry, 2: second Rz) on `qubit` in `layer`.
    pub fn param_index(&self, layer: usize, qubit: usize, k: usize) -> usize {
        (layer * self.n_qubits() + qubit) * 3 + k
    }

    fn check(&self) -> Result<()> {
        if self.params.len() != self.n_params() {
            return Err(Error::DimensionMismatch { expected: self.n_params(), got: self.params.len() });
        }
        if let Some(p) = self.params.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite circuit parameter {p}")));
        }
        Ok(())
    }
}

type Gate = [[Complex64; 2]; 2];

fn zyz(alpha: f64, beta: f64, gamma: f64) -> Gate {
    // Rz(γ)·Ry(β)·Rz(α)
    let (s, c) = (0.5 * beta).sin_cos();
    let e = |phi: f64| Complex64::from_polar(1.0, phi);
    let sum = 0.5 * (alpha + gamma);
    let diff = 0.5 * (alpha - gamma);
    [
        [e(-sum) * c, -e(diff) * s],
        [e(-diff) * s, e(sum) * c],
    ]
}

struct Register {
    n: usize,
    amps: Vec<Complex64>,
}

impl Register {
    fn zero(n: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { n, amps }
    }

    fn mask(&self, qubit: usize) -> usize {
        1 << (self.n - 1 - qubit)
    }

    fn apply(&mut self, qubit: usize, g: &Gate) {
        let m = self.mask(qubit);
        for i in 0..self.amps.len() {
            if i & m == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | m]);
                self.amps[i] = g[0][0] * a0 + g[0][1] * a1;
                self.amps[i | m] = g[1][0] * a0 + g[1][1] * a1;
            }
        }
    }

    fn cnot(&mut self, control: usize, target: usize) {
        let (mc, mt) = (self.mask(control), self.mask(target));
        for i in 0..self.amps.len() {
            if i & mc != 0 && i & mt == 0 {
                self.amps.swap(i, i | mt);
            }
        }
    }

    fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn run_circuit(ansatz: &Ansatz) -> Register {
    let nq = ansatz.n_qubits();
    let mut reg = Register::zero(nq);
    let p = &ansatz.params;
    for layer in 0..ansatz.layers {
        for q in 0..nq {
            let i = ansatz.param_index(layer, q, 0);
            reg.apply(q, &zyz(p[i], p[i + 1], p[i + 2]));
        }
        match nq {
            1 => {}
            2 => reg.cnot(0, 1),
            _ => (0..nq).for_each(|q| reg.cnot(q, (q + 1) % nq)),
        }
        debug_assert!((reg.norm() - 1.0).abs() < 1e-12);
    }
    reg
}

/// Statevector 2-norm after the full circuit.
pub fn circuit_norm(ansatz: &Ansatz) -> Result<f64> {
    ansatz.check()?;
    Ok(run_circuit(ansatz).norm())
}

/// ρ_A = tr_R U(θ)|0…0⟩⟨0…0|U(θ)†, system qubits being the leading ones.
pub fn simulate_marginal(ansatz: &Ansatz) -> Result<DensityMatrix> {
    ansatz.check()?;
    let psi = run_circuit(ansatz).amps;
    let da = 1 << ansatz.n_system;
    let dr = 1 << ansatz.n_reference;
    let rho = HermitianMatrix::from_upper(da, |a, b| {
        (0..dr).map(|r| psi[a * dr + r] * psi[b * dr + r].conj()).sum()
    });
    Ok(DensityMatrix::new_unchecked(rho))
}

/// tr(ρσ). With `shots`, a Binomial(shots, tr ρσ) sample mean: unbiased with
/// variance at most 1/(4·shots).
pub fn overlap<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    shots: Option<u64>,
    rng: &mut R,
) -> Result<f64> {
    rho.check_dim(sigma)?;
    let exact = trace_inner_unchecked(rho, sigma);
    match shots {
        None => Ok(exact),
        Some(0) => Err(Error::InvalidArgument("shots must be at least 1".into())),
        Some(n) => {
            let hits = Binomial::new(n, exact.clamp(0.0, 1.0))
                .map_err(|e| Error::InvalidArgument(e.to_string()))?
                .sample(rng);
            Ok(hits as f64 / n as f64)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationalCost {
    /// tr(Hρ_A) with H = η·G.
    pub l1: f64,
    /// tr(ρ_A²) − 1.
    pub l2: f64,
    pub total: f64,
}

impl VariationalCost {
    pub fn evaluate(h: &HermitianMatrix, rho: &DensityMatrix) -> Self {
        let l1 = trace_inner_unchecked(h, rho);
        let l2 = rho.purity() - 1.0;
        Self { l1, l2, total: l1 + l2 }
    }
}

#[derive(Debug, Clone)]
pub struct VariationalPrediction {
    pub state: DensityMatrix,
    pub cost: VariationalCost,
    pub initial_cost: f64,
    pub iterations: usize,
    pub converged: bool,
    pub ansatz: Ansatz,
}

fn cost_at(ansatz: &Ansatz, h: &HermitianMatrix) -> f64 {
    let rho = simulate_marginal(ansatz).expect("parameters checked");
    VariationalCost::evaluate(h, &rho).total
}

fn fd_gradient(ansatz: &mut Ansatz, h: &HermitianMatrix, grad: &mut [f64]) {
    for (i, g) in grad.iter_mut().enumerate() {
        let keep = ansatz.params[i];
        ansatz.params[i] = keep + FD_STEP;
        let up = cost_at(ansatz, h);
        ansatz.params[i] = keep - FD_STEP;
        let down = cost_at(ansatz, h);
        ansatz.params[i] = keep;
        *g = (up - down) / (2.0 * FD_STEP);
    }
}

/// Variational approximation of the Tsallis-2 RFTL prediction for the
/// gradient sum `g`.
///
/// Starts from θ ~ U(−0.1, 0.1) drawn from `seed` and runs gradient descent
/// with central finite differences and Armijo backtracking until one accepted
/// step lowers the cost by at most `tol`, or `max_iters` steps are taken.
pub fn variational_predict(
    g: &GradientSum,
    eta: f64,
    seed: u64,
    tol: f64,
    max_iters: usize,
) -> Result<VariationalPrediction> {
    check_eta(eta)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let d = g.dim();
    if !d.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("dimension {d} is not a power of two")));
    }
    let n = d.trailing_zeros() as usize;
    let h = g.total.scale(eta);
    let lower_bound = tsallis2_objective(g, eta, &*tsallis2_rftl_update(g, eta)?);

    let mut ansatz = Ansatz::new(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ansatz.params.iter_mut().for_each(|p| *p = rng.random_range(-0.1..0.1));

    let initial_cost = cost_at(&ansatz, &h);
    let mut value = initial_cost;
    let mut grad = vec![0.0; ansatz.n_params()];
    let mut step = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        fd_gradient(&mut ansatz, &h, &mut grad);
        let gn2: f64 = grad.iter().map(|x| x * x).sum();
        if gn2 == 0.0 {
            converged = true;
            break;
        }
        let mut trial = ansatz.clone();
        let accepted = loop {
            for (t, (p, gi)) in trial.params.iter_mut().zip(ansatz.params.iter().zip(&grad)) {
                *t = p - step * gi;
            }
            let v = cost_at(&trial, &h);
            if v <= value - ARMIJO * step * gn2 {
                break Some(v);
            }
            step *= 0.5;
            if step < MIN_STEP {
                break None;
            }
        };
        let Some(next) = accepted else {
            // No descent available at finite-difference resolution.
            converged = true;
            break;
        };
        debug_assert!(next >= lower_bound - 1e-9, "cost {next} below spectral minimum {lower_bound}");
        let decrease = value - next;
        ansatz = trial;
        value = next;
        step = (step * 2.0).min(16.0);
        if decrease <= tol {
            converged = true;
            break;
        }
    }
    let state = simulate_marginal(&ansatz)?;
    let cost = VariationalCost::evaluate(&h, &state);
    Ok(VariationalPrediction { state, cost, initial_cost, iterations, converged, ansatz })
}

/// Parameters that prepare a Bell pair between one system and one reference
/// qubit with a single layer.
pub fn bell_ansatz() -> Ansatz {
    let mut a = Ansatz::with_layers(1, 1, 1).expect("valid sizes");
    let i = a.param_index(0, 0, 1);
    a.params[i] = std::f64::consts::FRAC_PI_2;
    a
}
