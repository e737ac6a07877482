//! Generalized Hermite bases H_{jn} for the three evolution kernels.
//!
//! A basis element is the λ-jet extraction
//!   H_{jn}(x) = (−i)^j ∂^j/∂λ^j ( G(λ) φ(x,λ) ) |_{λ=0},
//! with G the kernel's spectral symbol: e^{λ²τ} (classical),
//! E_{α,1}(λ²τ^α) (fractal), cos(λτ) (cos-kernel). Expanding G gives the
//! closed coefficient form over the generalized power functions:
//!   classical/fractal: H_{jn} = Σ_k (−1)^k τ^{αk} j!/(Γ(kα+1)(j−2k)!) x_n^{j−2k}
//!   cos-kernel:        H_{jn} = Σ_k τ^{2k}  j!/((2k)!(j−2k)!)  x_n^{j−2k}
//! The bases are materialized as per-layer polynomial tables; the
//! generating-function residual check ties them back to the jets.
//!
//! Forward evolution for time τ maps H_{jn}(·; τ) to x_n^j exactly. That
//! heat-polynomial identity is the transform-free correctness anchor for
//! layered media.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{max_abs_diff, rel_l2, SampledField};
use crate::jet::Jet;
use crate::linalg::gauss_hermite;
use crate::media::{horner, EigenKind, GeneralizedMonomialTable, JetEigenfunction, LayeredMedium};
use crate::special::{falling, gamma, ml_eval, FractalOrder};

/// Spectral symbol of the evolution being inverted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvolutionKernel {
    /// G(λ) = e^{λ²τ}; diffusion run backward for time τ.
    Classical { tau: f64 },
    /// G(λ) = E_{α,1}(λ²τ^α); time-fractional diffusion.
    Fractal { alpha: FractalOrder, tau: f64 },
    /// G(λ) = cos(λτ); the hyperbolic variant whose basis sums to the
    /// d'Alembert closed form (all-plus coefficient signs).
    CosKernel { tau: f64 },
}

impl EvolutionKernel {
    pub fn tau(&self) -> f64 {
        match *self {
            EvolutionKernel::Classical { tau }
            | EvolutionKernel::Fractal { tau, .. }
            | EvolutionKernel::CosKernel { tau } => tau,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau() > 0.0) || !self.tau().is_finite() {
            return Err(Error::InvalidArgument(format!(
                "kernel time must be positive, got {}",
                self.tau()
            )));
        }
        Ok(())
    }

    /// Basis combination coefficient c_{j,k} multiplying x_n^{j−2k}.
    fn coefficient(&self, j: usize, k: usize) -> Result<f64> {
        let fall = falling(j, 2 * k);
        Ok(match *self {
            EvolutionKernel::Classical { tau } => {
                let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
                sign * tau.powi(k as i32) * fall / gamma(k as f64 + 1.0)?
            }
            EvolutionKernel::Fractal { alpha, tau } => {
                let a = alpha.get();
                let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
                sign * tau.powf(a * k as f64) * fall / gamma(a * k as f64 + 1.0)?
            }
            EvolutionKernel::CosKernel { tau } => {
                tau.powi(2 * k as i32) * fall / gamma(2.0 * k as f64 + 1.0)?
            }
        })
    }

    /// G(−iμ) for real μ: the generating-function prefactor.
    pub fn symbol_at_minus_i_mu(&self, mu: f64) -> f64 {
        match *self {
            EvolutionKernel::Classical { tau } => (-mu * mu * tau).exp(),
            EvolutionKernel::Fractal { alpha, tau } => {
                ml_eval(alpha, -mu * mu * tau.powf(alpha.get()))
            }
            EvolutionKernel::CosKernel { tau } => (mu * tau).cosh(),
        }
    }

    /// Spectral multiplier e^{−λ²t}-analogue of the forward evolution.
    pub fn forward_multiplier(&self, lambda: f64) -> f64 {
        match *self {
            EvolutionKernel::Classical { tau } => (-lambda * lambda * tau).exp(),
            EvolutionKernel::Fractal { alpha, tau } => {
                ml_eval(alpha, -lambda * lambda * tau.powf(alpha.get()))
            }
            EvolutionKernel::CosKernel { tau } => (lambda * tau).cos(),
        }
    }

    /// The paper-literal inverse multiplier G(λ) used by spectral
    /// inversion. Reciprocal of the forward multiplier only for the
    /// classical kernel.
    pub fn inverse_multiplier(&self, lambda: f64) -> f64 {
        match *self {
            EvolutionKernel::Classical { tau } => (lambda * lambda * tau).exp(),
            EvolutionKernel::Fractal { alpha, tau } => {
                ml_eval(alpha, lambda * lambda * tau.powf(alpha.get()))
            }
            EvolutionKernel::CosKernel { tau } => (lambda * tau).cosh(),
        }
    }
}

/// Per-layer polynomial table of H_{jn}, j = 0..=j_max.
#[derive(Clone, Debug)]
pub struct GenHermiteBasis {
    kernel: EvolutionKernel,
    j_max: usize,
    monomials: GeneralizedMonomialTable,
    eigenfunction: JetEigenfunction,
    // polys[layer][j] = low-to-high coefficients of H_{jn} in that layer.
    polys: Vec<Vec<Vec<f64>>>,
}

pub fn gen_hermite_basis(
    medium: &LayeredMedium,
    kernel: EvolutionKernel,
    j_max: usize,
) -> Result<GenHermiteBasis> {
    if j_max > 48 {
        return Err(Error::OutOfRange(format!("basis order {j_max} exceeds 48")));
    }
    kernel.validate()?;
    let monomials = medium.generalized_monomials(j_max)?;
    let eigenfunction = medium.eigenfunction_jet(j_max, EigenKind::Direct)?;
    let n_layers = medium.n_layers();
    let mut polys = vec![Vec::with_capacity(j_max + 1); n_layers];
    for (layer, out) in polys.iter_mut().enumerate() {
        for j in 0..=j_max {
            let mut coeffs = vec![0.0; j + 1];
            for k in 0..=(j / 2) {
                let c = kernel.coefficient(j, k)?;
                for (r, &p) in monomials.poly(layer, j - 2 * k).iter().enumerate() {
                    coeffs[r] += c * p;
                }
            }
            out.push(coeffs);
        }
    }
    Ok(GenHermiteBasis {
        kernel,
        j_max,
        monomials,
        eigenfunction,
        polys,
    })
}

impl GenHermiteBasis {
    pub fn kernel(&self) -> EvolutionKernel {
        self.kernel
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    pub fn medium(&self) -> &LayeredMedium {
        self.monomials.medium()
    }

    pub fn monomials(&self) -> &GeneralizedMonomialTable {
        &self.monomials
    }

    pub fn poly(&self, layer: usize, j: usize) -> &[f64] {
        &self.polys[layer][j]
    }

    pub fn eval(&self, j: usize, x: f64) -> Result<f64> {
        if j > self.j_max {
            return Err(Error::OutOfRange(format!(
                "basis index {j} exceeds built order {}",
                self.j_max
            )));
        }
        let layer = self.medium().layer_of(x);
        Ok(horner(&self.polys[layer][j], x))
    }

    /// Sample H_{jn}(·) on a grid as backward initial data.
    pub fn sample(&self, j: usize, grid: crate::field::Grid) -> Result<SampledField> {
        if j > self.j_max {
            return Err(Error::OutOfRange(format!(
                "basis index {j} exceeds built order {}",
                self.j_max
            )));
        }
        SampledField::from_fn(grid, 0.0, |x| {
            horner(&self.polys[self.medium().layer_of(x)][j], x)
        })
    }

    /// |Σ_{j≤J} H_{jn}(x) μ^j/j! − G(−iμ) φ(x,−iμ)|: the truncation residual
    /// of the generating function, with φ evaluated from the jet amplitudes.
    pub fn generating_check(&self, mu: f64, x: f64) -> Result<f64> {
        if mu.abs() > 0.5 {
            return Err(Error::InvalidArgument(format!(
                "generating check is specified for |mu| <= 0.5, got {mu}"
            )));
        }
        let mut lhs = 0.0;
        let mut mu_pow_over_fact = 1.0;
        for j in 0..=self.j_max {
            if j > 0 {
                mu_pow_over_fact *= mu / j as f64;
            }
            lhs += self.eval(j, x)? * mu_pow_over_fact;
        }
        let phi = self.eigenfunction.eval_at(x, Complex64::new(0.0, -mu));
        let rhs = phi * self.kernel.symbol_at_minus_i_mu(mu);
        Ok((Complex64::new(lhs, 0.0) - rhs).norm())
    }
}

/// Gram matrix ∫ h_j h_k dx of the orthonormal Hermite functions by
/// 128-node Gauss–Hermite quadrature; the homogeneous-reduction check of
/// the biorthogonality lemma.
pub fn biorthogonality_matrix(j_max: usize) -> Result<Vec<Vec<f64>>> {
    if j_max > 12 {
        return Err(Error::OutOfRange(format!(
            "biorthogonality check is specified for j <= 12, got {j_max}"
        )));
    }
    let (nodes, weights) = gauss_hermite(128);
    // h_j h_k = e^{−x²} p_j p_k with p the orthonormal polynomials, so the
    // weight factor is absorbed by the rule and only p values are needed.
    let p_rows: Vec<Vec<f64>> = nodes
        .iter()
        .map(|&x| {
            let mut row = vec![0.0; j_max + 1];
            let mut prev = std::f64::consts::PI.powf(-0.25);
            row[0] = prev;
            if j_max >= 1 {
                let mut cur = std::f64::consts::SQRT_2 * x * prev;
                row[1] = cur;
                for k in 1..j_max {
                    let kf = k as f64;
                    let next =
                        (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
                    prev = cur;
                    cur = next;
                    row[k + 1] = cur;
                }
            }
            row
        })
        .collect();
    let mut gram = vec![vec![0.0; j_max + 1]; j_max + 1];
    for (i, &w) in weights.iter().enumerate() {
        for j in 0..=j_max {
            for k in j..=j_max {
                gram[j][k] += w * p_rows[i][j] * p_rows[i][k];
            }
        }
    }
    for j in 0..=j_max {
        for k in 0..j {
            gram[j][k] = gram[k][j];
        }
    }
    Ok(gram)
}

/// Check on a sampled pair that `evolved` really is the forward image of
/// `initial`; returns the windowed relative L2 and sup errors.
pub fn heat_polynomial_errors(
    evolved: &SampledField,
    expected: &SampledField,
    half_window: f64,
) -> (f64, f64) {
    let w = |x: f64| x.abs() <= half_window;
    let rel = rel_l2(evolved, expected, w);
    let sup = max_abs_diff(evolved, expected, w)
        / expected
            .grid
            .xs()
            .enumerate()
            .filter(|(_, x)| w(*x))
            .map(|(i, _)| expected.values[i].abs())
            .fold(0.0, f64::max)
            .max(1e-300);
    (rel, sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::two_layer_ideal;
    use crate::special::hermite_poly;

    fn homog() -> LayeredMedium {
        LayeredMedium::homogeneous(1.0).unwrap()
    }

    #[test]
    fn classical_heat_polynomial_values() {
        let b = gen_hermite_basis(&homog(), EvolutionKernel::Classical { tau: 1.0 }, 6).unwrap();
        // H_2 = x² − 2τ; at τ = 1, x = 1: −1
        assert!((b.eval(2, 1.0).unwrap() + 1.0).abs() < 1e-13);
        // H_0 = φ(x, 0) = 1
        assert!((b.eval(0, 5.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fractal_hyperbolic_value() {
        let k = EvolutionKernel::Fractal {
            alpha: FractalOrder::HYPERBOLIC,
            tau: 1.0,
        };
        let b = gen_hermite_basis(&homog(), k, 4).unwrap();
        // x² − τ² at x = 1, τ = 1 → 0
        assert!(b.eval(2, 1.0).unwrap().abs() < 1e-13);
    }

    #[test]
    fn cos_kernel_binomial_value() {
        let b = gen_hermite_basis(&homog(), EvolutionKernel::CosKernel { tau: 1.0 }, 4).unwrap();
        // ((x+τ)³ + (x−τ)³)/2 at x = 2, τ = 1 → 14
        assert!((b.eval(3, 2.0).unwrap() - 14.0).abs() < 1e-12);
    }

    #[test]
    fn layered_eval_uses_monomials() {
        let b = gen_hermite_basis(
            &two_layer_ideal(),
            EvolutionKernel::Classical { tau: 0.1 },
            4,
        )
        .unwrap();
        // j = 2 at x = −1: x_n² − 2τ = 1 − 0.2
        assert!((b.eval(2, -1.0).unwrap() - 0.8).abs() < 1e-13);
    }

    #[test]
    fn classical_reduction_to_scaled_hermite() {
        // Homogeneous: H_{jn}(x) = τ^{j/2} H_j(x / (2√τ))
        for &tau in &[0.25, 1.0, 0.1] {
            let b = gen_hermite_basis(&homog(), EvolutionKernel::Classical { tau }, 12).unwrap();
            for j in 0..=12 {
                for &x in &[-4.0, -1.0, 0.0, 0.5, 2.0, 4.0] {
                    let want =
                        tau.powf(j as f64 / 2.0) * hermite_poly(j, x / (2.0 * tau.sqrt())).unwrap();
                    let got = b.eval(j, x).unwrap();
                    assert!(
                        (got - want).abs() <= 1e-10 * want.abs().max(1.0),
                        "tau {tau}, j {j}, x {x}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn fractal_alpha_one_equals_classical_coefficients() {
        let med = two_layer_ideal();
        let a = gen_hermite_basis(&med, EvolutionKernel::Classical { tau: 0.3 }, 10).unwrap();
        let b = gen_hermite_basis(
            &med,
            EvolutionKernel::Fractal {
                alpha: FractalOrder::CLASSICAL,
                tau: 0.3,
            },
            10,
        )
        .unwrap();
        for layer in 0..2 {
            for j in 0..=10 {
                assert_eq!(a.poly(layer, j), b.poly(layer, j), "layer {layer} j {j}");
            }
        }
    }

    #[test]
    fn scaled_form_identity_fractal() {
        // Homogeneous: H_{jn}(x) = τ^{βj} H_j^{fractal}(x/τ^β), β = α/2.
        use crate::special::fractal_hermite;
        for &alpha in &[0.5, 1.0, 1.5, 2.0] {
            let ord = FractalOrder::new(alpha).unwrap();
            let tau = 0.7;
            let b = gen_hermite_basis(&homog(), EvolutionKernel::Fractal { alpha: ord, tau }, 10)
                .unwrap();
            let beta = ord.beta();
            for j in 0..=10 {
                for &x in &[-2.0, 0.3, 1.9] {
                    let want =
                        tau.powf(beta * j as f64) * fractal_hermite(ord, j, x / tau.powf(beta)).unwrap();
                    let got = b.eval(j, x).unwrap();
                    assert!(
                        (got - want).abs() <= 1e-12 * want.abs().max(1.0),
                        "alpha {alpha}, j {j}, x {x}"
                    );
                }
            }
        }
    }

    #[test]
    fn parity_in_homogeneous_media() {
        for kernel in [
            EvolutionKernel::Classical { tau: 0.4 },
            EvolutionKernel::Fractal {
                alpha: FractalOrder::new(0.7).unwrap(),
                tau: 0.4,
            },
        ] {
            let b = gen_hermite_basis(&homog(), kernel, 9).unwrap();
            for j in 0..=9 {
                for (r, &c) in b.poly(0, j).iter().enumerate() {
                    if r % 2 != j % 2 {
                        assert_eq!(c, 0.0, "kernel {kernel:?}, j {j}, power {r}");
                    }
                }
            }
        }
    }

    #[test]
    fn generating_check_residuals() {
        let media = [homog(), two_layer_ideal()];
        let kernels = |tau: f64| {
            vec![
                EvolutionKernel::Classical { tau },
                EvolutionKernel::Fractal {
                    alpha: FractalOrder::new(0.5).unwrap(),
                    tau,
                },
                EvolutionKernel::Fractal {
                    alpha: FractalOrder::HYPERBOLIC,
                    tau,
                },
                EvolutionKernel::CosKernel { tau },
            ]
        };
        for med in &media {
            for kernel in kernels(0.1) {
                let b = gen_hermite_basis(med, kernel, 24).unwrap();
                for &mu in &[0.0, 0.2, -0.3, 0.5] {
                    for &x in &[-0.7, 0.7, 1.5] {
                        let r = b.generating_check(mu, x).unwrap();
                        assert!(
                            r <= 1e-10,
                            "kernel {kernel:?}, mu {mu}, x {x}: residual {r:e}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn generating_check_zero_mu_is_exact() {
        let b = gen_hermite_basis(&homog(), EvolutionKernel::Classical { tau: 0.1 }, 8).unwrap();
        assert!(b.generating_check(0.0, 1.0).unwrap() < 1e-14);
    }

    #[test]
    fn generating_check_truncation_bound() {
        // Residual obeys 2 |μ|^{J+1} max_j |H| / (J+1)!.
        let b = gen_hermite_basis(&homog(), EvolutionKernel::Classical { tau: 0.1 }, 24).unwrap();
        let x = 1.0;
        let mu: f64 = 0.3;
        let max_h = (0..=24)
            .map(|j| b.eval(j, x).unwrap().abs())
            .fold(0.0, f64::max);
        let bound = 2.0 * mu.powi(25) * max_h / falling(25, 25);
        let r = b.generating_check(mu, x).unwrap();
        assert!(r <= bound.max(1e-12), "residual {r:e} vs bound {bound:e}");
    }

    #[test]
    fn biorthogonality_gram_is_identity() {
        let g = biorthogonality_matrix(10).unwrap();
        for (j, row) in g.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((v - want).abs() <= 1e-8, "({j},{k}): {v}");
            }
        }
        assert!((g[0][0] - 1.0).abs() < 1e-10);
        assert!(g[0][1].abs() < 1e-12);
        assert!((g[3][3] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn basis_order_guard() {
        assert!(gen_hermite_basis(&homog(), EvolutionKernel::Classical { tau: 1.0 }, 49).is_err());
    }
}
