use crate::error::{Error, Result};
use crate::hermitian::{
    eigh, frobenius_norm, mat_log_floored, trace_inner_unchecked, DensityMatrix, HermitianMatrix,
};

use super::projection::project_density;

/// Running sum of gradients over a window of rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSum {
    pub total: HermitianMatrix,
    pub count: usize,
}

impl GradientSum {
    pub fn new(dim: usize) -> Self {
        Self { total: HermitianMatrix::zeros(dim), count: 0 }
    }

    pub fn single(grad: HermitianMatrix) -> Self {
        Self { total: grad, count: 1 }
    }

    pub fn push(&mut self, grad: &HermitianMatrix) {
        self.total += grad;
        self.count += 1;
    }

    pub fn reset(&mut self) {
        *self = Self::new(self.total.dim());
    }

    pub fn dim(&self) -> usize {
        self.total.dim()
    }
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("learning rate must be positive and finite, got {eta}")))
    }
}

/// RFTL objective with the Tsallis-2 regularizer:
/// η·tr(Gω) − S₂(ω) = η·tr(Gω) + tr(ω²) − 1.
pub fn tsallis2_objective(g: &GradientSum, eta: f64, omega: &HermitianMatrix) -> f64 {
    eta * trace_inner_unchecked(&g.total, omega) + frobenius_norm(omega).powi(2) - 1.0
}

/// RFTL step with the Tsallis-2 regularizer.
///
/// The objective equals ‖ω + ηG/2‖₂² up to a constant, so the minimizer over
/// density matrices is the Frobenius projection of −ηG/2.
pub fn tsallis2_rftl_update(g: &GradientSum, eta: f64) -> Result<DensityMatrix> {
    check_eta(eta)?;
    project_density(&g.total.scale(-0.5 * eta))
}

/// Normalized exponential of a Hermitian matrix, exp(H)/tr exp(H), with the
/// largest eigenvalue subtracted before exponentiation.
pub(crate) fn softmax_state(h: &HermitianMatrix) -> Result<DensityMatrix> {
    let eig = eigh(h)?;
    let top = *eig.eigenvalues.last().expect("dimension ≥ 1");
    let w: Vec<f64> = eig.eigenvalues.iter().map(|&l| (l - top).exp()).collect();
    let z: f64 = w.iter().sum();
    let p: Vec<f64> = w.iter().map(|x| x / z).collect();
    Ok(DensityMatrix::new_unchecked(eig.compose(&p)))
}

/// RFTL step with the von Neumann regularizer, closed form
/// exp(−ηG)/tr exp(−ηG).
pub fn vn_rftl_update(g: &GradientSum, eta: f64) -> Result<DensityMatrix> {
    check_eta(eta)?;
    softmax_state(&g.total.scale(-eta))
}

/// Matrix exponentiated gradient: exp(log ω − η∇)/tr(·).
pub fn meg_update(omega_prev: &DensityMatrix, grad_prev: &HermitianMatrix, eta: f64) -> Result<DensityMatrix> {
    check_eta(eta)?;
    if omega_prev.dim() != grad_prev.dim() {
        return Err(Error::DimensionMismatch { expected: omega_prev.dim(), got: grad_prev.dim() });
    }
    if grad_prev.is_zero() {
        return Ok(omega_prev.clone());
    }
    let log = mat_log_floored(omega_prev)?;
    softmax_state(&(&log - &grad_prev.scale(eta)))
}

/// Online gradient descent: Frobenius projection of ω − η∇.
pub fn ogd_update(omega_prev: &DensityMatrix, grad_prev: &HermitianMatrix, eta: f64) -> Result<DensityMatrix> {
    check_eta(eta)?;
    if omega_prev.dim() != grad_prev.dim() {
        return Err(Error::DimensionMismatch { expected: omega_prev.dim(), got: grad_prev.dim() });
    }
    if grad_prev.is_zero() {
        return Ok(omega_prev.clone());
    }
    project_density(&(&**omega_prev - &grad_prev.scale(eta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::{random_hermitian, random_hermitian_bounded};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dist(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
        frobenius_norm(&(a - b))
    }

    #[test]
    fn tsallis_zero_and_uniform_shift() {
        for d in [2, 4, 16] {
            let w = tsallis2_rftl_update(&GradientSum::new(d), 0.7).unwrap();
            assert!(dist(&w, &DensityMatrix::maximally_mixed(d)) < 1e-15);
        }
        let g = GradientSum::single(HermitianMatrix::from_real_diagonal(&[3.0, 3.0]));
        let w = tsallis2_rftl_update(&g, 0.4).unwrap();
        assert!(dist(&w, &DensityMatrix::maximally_mixed(2)) < 1e-15);
    }

    #[test]
    fn tsallis_rejects_bad_eta() {
        assert!(tsallis2_rftl_update(&GradientSum::new(2), 0.0).is_err());
        assert!(vn_rftl_update(&GradientSum::new(2), f64::NAN).is_err());
    }

    #[test]
    fn tsallis_first_order_optimality() {
        // tr((ω − ω⁺)(ηG + 2ω⁺)) ≥ 0 for every feasible ω.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let d = [2, 4, 8][rng.random_range(0..3)];
            let eta = rng.random_range(0.01..1.0);
            let mut g = GradientSum::new(d);
            g.push(&random_hermitian(d, &mut rng));
            let next = tsallis2_rftl_update(&g, eta).unwrap();
            let prev = crate::adversary::random_mixed(d.trailing_zeros() as usize, &mut rng).unwrap().rho;
            let grad = &g.total.scale(eta) + &next.scale(2.0);
            let v = trace_inner_unchecked(&(&*prev - &*next), &grad);
            assert!(v >= -1e-8, "violation {v}");
        }
    }

    #[test]
    fn tsallis_is_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..100 {
            let eta = rng.random_range(0.01..1.0);
            let g1 = GradientSum::single(random_hermitian(4, &mut rng));
            let mut g2 = g1.clone();
            g2.push(&random_hermitian(4, &mut rng).scale(0.1));
            let w1 = tsallis2_rftl_update(&g1, eta).unwrap();
            let w2 = tsallis2_rftl_update(&g2, eta).unwrap();
            let input_gap = dist(&g1.total, &g2.total) * eta / 2.0;
            assert!(dist(&w1, &w2) <= input_gap + 1e-12);
        }
    }

    #[test]
    fn vn_examples() {
        let w = vn_rftl_update(&GradientSum::new(8), 1.0).unwrap();
        assert!(dist(&w, &DensityMatrix::maximally_mixed(8)) < 1e-15);
        let g = GradientSum::single(HermitianMatrix::from_real_diagonal(&[-4.0, -4.0]));
        let w = vn_rftl_update(&g, 2.0).unwrap();
        assert!(dist(&w, &DensityMatrix::maximally_mixed(2)) < 1e-15);
        // η·G = diag(0, ln 3) → diag(e⁰, e^{−ln 3})/(1 + 1/3) = diag(3/4, 1/4)
        let g = GradientSum::single(HermitianMatrix::from_real_diagonal(&[0.0, 3f64.ln() / 0.5]));
        let w = vn_rftl_update(&g, 0.5).unwrap();
        assert!(dist(&w, &HermitianMatrix::from_real_diagonal(&[0.75, 0.25])) < 1e-15);
    }

    #[test]
    fn vn_survives_huge_gradients() {
        let g = GradientSum::single(HermitianMatrix::from_real_diagonal(&[1e6, -1e6, 0.0]));
        let w = vn_rftl_update(&g, 10.0).unwrap();
        assert!((w.get(1, 1).re - 1.0).abs() < 1e-15);
        assert!(w.get(0, 0).re.is_finite());
    }

    #[test]
    fn meg_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let prev = crate::adversary::random_mixed(2, &mut rng).unwrap().rho;
        let same = meg_update(&prev, &HermitianMatrix::zeros(4), 0.3).unwrap();
        assert!(dist(&same, &prev) < 1e-10);

        let grad = random_hermitian(4, &mut rng);
        let from_mixed = meg_update(&DensityMatrix::maximally_mixed(4), &grad, 0.3).unwrap();
        let closed = vn_rftl_update(&GradientSum::single(grad), 0.3).unwrap();
        assert!(dist(&from_mixed, &closed) < 1e-12);
    }

    #[test]
    fn meg_chain_matches_vn_closed_form_on_commuting_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let d = 4;
        let eta = 0.25;
        let mut omega = DensityMatrix::maximally_mixed(d);
        let mut sum = GradientSum::new(d);
        for _ in 0..30 {
            let diag: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let grad = HermitianMatrix::from_real_diagonal(&diag);
            omega = meg_update(&omega, &grad, eta).unwrap();
            sum.push(&grad);
            let closed = vn_rftl_update(&sum, eta).unwrap();
            assert!(dist(&omega, &closed) < 1e-8);
        }
    }

    #[test]
    fn ogd_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let prev = crate::adversary::random_mixed(1, &mut rng).unwrap().rho;
        assert_eq!(ogd_update(&prev, &HermitianMatrix::zeros(2), 0.2).unwrap(), prev);

        // Interior step: traceless gradient that keeps the iterate positive.
        let mixed = DensityMatrix::maximally_mixed(2);
        let grad = HermitianMatrix::from_real(2, &[0.1, 0.05, 0.05, -0.1]).unwrap();
        let step = ogd_update(&mixed, &grad, 0.5).unwrap();
        assert!(dist(&step, &(&*mixed - &grad.scale(0.5))) < 1e-15);

        // Eigenvalues (−9.5, 10.5) project to (0, 1).
        let grad = HermitianMatrix::from_real_diagonal(&[1.0, -1.0]);
        let step = ogd_update(&mixed, &grad, 10.0).unwrap();
        assert!(dist(&step, &HermitianMatrix::from_real_diagonal(&[0.0, 1.0])) < 1e-15);
    }

    #[test]
    fn outputs_are_density_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..50 {
            let d = 1 << rng.random_range(1..4);
            let eta = rng.random_range(0.01..2.0);
            let g = GradientSum::single(random_hermitian_bounded(d, 5.0, &mut rng).unwrap());
            let prev = crate::adversary::random_mixed(d.trailing_zeros() as usize, &mut rng).unwrap().rho;
            for w in [
                tsallis2_rftl_update(&g, eta).unwrap(),
                vn_rftl_update(&g, eta).unwrap(),
                meg_update(&prev, &g.total, eta).unwrap(),
                ogd_update(&prev, &g.total, eta).unwrap(),
            ] {
                DensityMatrix::new(w.into_hermitian()).unwrap();
            }
        }
    }
}
