//! The inverse engines: generalized-Taylor coefficient estimation, series
//! reconstruction over the generalized Hermite bases, spectral-cutoff
//! inversion, and the hyperbolic d'Alembert closed form.
//!
//! Ill-posedness shows up as the truncation parameters: series order J and
//! spectral cutoff Λ. The error of a noisy inversion is not monotone in
//! either; the runner exposes sweeps, not an automatic choice.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::basis::{gen_hermite_basis, EvolutionKernel};
use crate::error::{Error, Result};
use crate::field::{SampledField, Spectrum};
use crate::linalg::lstsq;
use crate::media::LayeredMedium;
use crate::special::falling;

/// How Taylor coefficients of the observed field are estimated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffMethod {
    /// Least-squares fit against the generalized Taylor basis {x_n^j/j!}
    /// on a window around the expansion point.
    #[default]
    Polyfit,
    /// Damped moment quadrature u_j = (1/2π)∫(iλ)^j ũ(λ) e^{−ελ²} dλ.
    /// Oscillatory; kept as a cross-check of the fit.
    Moments,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InversionMethod {
    Series,
    Spectral,
    Dalembert,
}

/// Knobs of a reconstruction run.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ReconstructionConfig {
    pub method: InversionMethod,
    /// Series order J.
    pub order: usize,
    /// Spectral cutoff Λ.
    pub cutoff: f64,
    pub coeff_method: CoeffMethod,
    /// Half-width of the polyfit window.
    pub fit_window: f64,
    /// Expansion point of the generalized Taylor series.
    pub fit_center: f64,
    pub kernel: EvolutionKernel,
}

impl ReconstructionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order > 48 {
            return Err(Error::InvalidArgument(format!(
                "series order {} exceeds 48",
                self.order
            )));
        }
        if !(self.cutoff > 0.0) || self.cutoff > 64.0 {
            return Err(Error::InvalidArgument(format!(
                "cutoff must lie in (0, 64], got {}",
                self.cutoff
            )));
        }
        if !(self.fit_window > 0.0) {
            return Err(Error::InvalidArgument(
                "fit window must be positive".into(),
            ));
        }
        self.kernel.validate()
    }
}

/// Estimated generalized Taylor coefficients u_j of an observed field,
/// u(τ, ·) ≈ Σ u_j x_n^j / j!.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TaylorCoeffs {
    pub coeffs: Vec<f64>,
    pub method: CoeffMethod,
    /// Condition estimate of the fit (ratio of extreme R diagonals for the
    /// polyfit; 1 for moments).
    pub condition: f64,
}

/// Estimate u_j, j = 0..=j_max, from the observed field.
pub fn taylor_coeffs(
    u: &SampledField,
    medium: &LayeredMedium,
    j_max: usize,
    config: &ReconstructionConfig,
) -> Result<TaylorCoeffs> {
    match config.coeff_method {
        CoeffMethod::Polyfit => polyfit_coeffs(u, medium, j_max, config.fit_window, config.fit_center),
        CoeffMethod::Moments => moments_coeffs(u, medium, j_max),
    }
}

fn polyfit_coeffs(
    u: &SampledField,
    medium: &LayeredMedium,
    j_max: usize,
    window: f64,
    center: f64,
) -> Result<TaylorCoeffs> {
    let table = medium.generalized_monomials(j_max)?;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (i, x) in u.grid.xs().enumerate() {
        if (x - center).abs() <= window {
            let mut row = Vec::with_capacity(j_max + 1);
            for j in 0..=j_max {
                row.push(table.eval(j, x) / falling(j, j));
            }
            rows.push(row);
            rhs.push(u.values[i]);
        }
    }
    if rows.len() < j_max + 1 {
        return Err(Error::InvalidArgument(format!(
            "fit window [{:.3}, {:.3}] holds only {} samples for {} coefficients",
            center - window,
            center + window,
            rows.len(),
            j_max + 1
        )));
    }
    let (coeffs, condition) = lstsq(&rows, &rhs)?;
    Ok(TaylorCoeffs {
        coeffs,
        method: CoeffMethod::Polyfit,
        condition,
    })
}

fn moments_coeffs(u: &SampledField, medium: &LayeredMedium, j_max: usize) -> Result<TaylorCoeffs> {
    // u_j = (1/2π) ∫ (iλ)^j ũ(λ) e^{−ελ²} dλ with ε = 1e-4.
    const EPSILON: f64 = 1e-4;
    const LAMBDA_MAX: f64 = 40.0;
    const D_LAMBDA: f64 = 0.02;
    let n_half = (LAMBDA_MAX / D_LAMBDA).round() as usize;
    let lambdas = Spectrum::symmetric_grid(LAMBDA_MAX, n_half);
    let spec = medium.transform_analysis(u, &lambdas)?;
    let n = lambdas.len();
    let mut coeffs = Vec::with_capacity(j_max + 1);
    for j in 0..=j_max {
        let mut acc = Complex64::ZERO;
        for (idx, &lambda) in lambdas.iter().enumerate() {
            let w = if idx == 0 || idx == n - 1 { 0.5 } else { 1.0 };
            let damp = (-EPSILON * lambda * lambda).exp();
            let il = (Complex64::i() * lambda).powu(j as u32);
            acc += il * spec.values[idx] * (w * damp);
        }
        let val = acc * Complex64::new(D_LAMBDA / (2.0 * std::f64::consts::PI), 0.0);
        if !val.re.is_finite() {
            return Err(Error::QuadratureFailure(format!(
                "moment quadrature diverged at order {j}"
            )));
        }
        coeffs.push(val.re);
    }
    Ok(TaylorCoeffs {
        coeffs,
        method: CoeffMethod::Moments,
        condition: 1.0,
    })
}

/// Series reconstruction output with its diagnostics.
#[derive(Clone, Debug)]
pub struct SeriesReconstruction {
    pub field: SampledField,
    pub coeffs: TaylorCoeffs,
    /// Term sup-norms grew monotonically over the last six orders: the
    /// truncated series shows no sign of settling.
    pub divergent: bool,
}

/// Reconstruct the initial state as f = Σ_{j≤J} u_j/j! · H_{jn}.
pub fn reconstruct_series(
    u: &SampledField,
    medium: &LayeredMedium,
    config: &ReconstructionConfig,
) -> Result<SeriesReconstruction> {
    config.validate()?;
    let j_max = config.order;
    let coeffs = taylor_coeffs(u, medium, j_max, config)?;
    let basis = gen_hermite_basis(medium, config.kernel, j_max)?;
    let mut values = vec![0.0; u.grid.n];
    let mut term_norms = Vec::with_capacity(j_max + 1);
    for j in 0..=j_max {
        let scale = coeffs.coeffs[j] / falling(j, j);
        let mut norm = 0.0f64;
        for (i, x) in u.grid.xs().enumerate() {
            let t = scale * basis.eval(j, x)?;
            values[i] += t;
            norm = norm.max(t.abs());
        }
        term_norms.push(norm);
    }
    let divergent = term_norms.len() > 6
        && term_norms
            .windows(2)
            .rev()
            .take(6)
            .all(|w| w[1] > w[0] && w[1] > 0.0);
    let field = SampledField::new(u.grid, values, 0.0)?;
    Ok(SeriesReconstruction {
        field,
        coeffs,
        divergent,
    })
}

/// Spectral-cutoff inversion: analysis transform, multiplication by the
/// kernel's inverse multiplier, synthesis truncated at |λ| ≤ cutoff.
///
/// For the fractal kernel the literal multiplier E_{α,1}(λ²τ^α) is applied
/// even though it is the reciprocal of the forward one only at α = 1; see
/// [`EvolutionKernel::inverse_multiplier`].
pub fn spectral_invert(
    u: &SampledField,
    medium: &LayeredMedium,
    kernel: EvolutionKernel,
    cutoff: f64,
) -> Result<SampledField> {
    kernel.validate()?;
    if !(cutoff >= 0.0) || !cutoff.is_finite() {
        return Err(Error::InvalidArgument(format!("bad cutoff {cutoff}")));
    }
    if cutoff == 0.0 {
        return Ok(SampledField::zeros(u.grid, 0.0));
    }
    const D_LAMBDA: f64 = 0.02;
    let n_half = (cutoff / D_LAMBDA).ceil() as usize;
    let lambdas = Spectrum::symmetric_grid(cutoff, n_half);
    let mut spec = medium.transform_analysis(u, &lambdas)?;
    for (i, &lambda) in spec.lambdas.iter().enumerate() {
        let m = kernel.inverse_multiplier(lambda);
        let amplified = m * spec.values[i].norm();
        if !amplified.is_finite() || amplified > 1e12 {
            return Err(Error::AmplificationOverflow { lambda });
        }
        spec.values[i] *= m;
    }
    let mut f = medium.transform_synthesis(&spec, u.grid, medium.default_weight())?;
    f.time_tag = 0.0;
    Ok(f)
}

/// Hyperbolic closed-form inversion f(x) = (u(τ, x+τ) + u(τ, x−τ))/2.
///
/// The output grid is the input grid trimmed by the shift τ on both sides;
/// off-grid shifts fall back to linear interpolation.
pub fn dalembert_invert(u_tau: &SampledField, tau: f64) -> Result<SampledField> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("bad shift {tau}")));
    }
    let g = u_tau.grid;
    let shift = tau / g.dx;
    let margin = (shift - 1e-9).ceil().max(0.0) as usize;
    if g.n < 2 * margin + 16 {
        return Err(Error::OutOfDomain(format!(
            "grid too narrow to shift by ±{tau}"
        )));
    }
    let out_grid = crate::field::Grid {
        x0: g.x0 + margin as f64 * g.dx,
        dx: g.dx,
        n: g.n - 2 * margin,
    };
    let integer = (shift - shift.round()).abs() < 1e-9;
    let mut values = Vec::with_capacity(out_grid.n);
    if integer {
        let s = shift.round() as usize;
        for i in 0..out_grid.n {
            let base = i + margin;
            values.push(0.5 * (u_tau.values[base + s] + u_tau.values[base - s]));
        }
    } else {
        for x in out_grid.xs() {
            let right = u_tau.interp(x + tau).ok_or_else(|| {
                Error::OutOfDomain(format!("x + tau = {} leaves the grid", x + tau))
            })?;
            let left = u_tau.interp(x - tau).ok_or_else(|| {
                Error::OutOfDomain(format!("x - tau = {} leaves the grid", x - tau))
            })?;
            values.push(0.5 * (right + left));
        }
    }
    SampledField::new(out_grid, values, 0.0)
}

/// Additive independent Gaussian noise, one draw per grid point, from a
/// seeded ChaCha stream (Box–Muller), so runs are reproducible bit-for-bit
/// across platforms.
pub fn add_noise(field: &SampledField, sigma: f64, seed: u64) -> SampledField {
    if sigma == 0.0 {
        return field.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniform = move || {
        // (0, 1]: avoid log(0).
        ((rng.next_u64() >> 11) as f64 + 1.0) * (1.0 / 9007199254740992.0)
    };
    let mut out = field.clone();
    let mut cache: Option<f64> = None;
    for v in out.values.iter_mut() {
        let z = if let Some(z) = cache.take() {
            z
        } else {
            let (u1, u2) = (uniform(), uniform());
            let r = (-2.0 * u1.ln()).sqrt();
            let theta = 2.0 * std::f64::consts::PI * u2;
            cache = Some(r * theta.sin());
            r * theta.cos()
        };
        *v += sigma * z;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{max_abs_diff, rel_l2, Grid};
    use crate::forward::{heat_forward_homogeneous, wave_forward_family};
    use crate::media::two_layer_ideal;
    use crate::special::FractalOrder;

    fn grid() -> Grid {
        Grid::from_range(-8.0, 8.0, 2048).unwrap()
    }

    fn series_config(tau: f64) -> ReconstructionConfig {
        ReconstructionConfig {
            method: InversionMethod::Series,
            order: 24,
            cutoff: 12.0,
            coeff_method: CoeffMethod::Polyfit,
            fit_window: 3.0,
            fit_center: 0.0,
            kernel: EvolutionKernel::Classical { tau },
        }
    }

    #[test]
    fn polyfit_of_monomial() {
        let m = LayeredMedium::homogeneous(1.0).unwrap();
        let u = SampledField::from_fn(grid(), 0.1, |x| x * x).unwrap();
        let cfg = series_config(0.1);
        let tc = taylor_coeffs(&u, &m, 4, &cfg).unwrap();
        let want = [0.0, 0.0, 2.0, 0.0, 0.0];
        for (j, (&got, &w)) in tc.coeffs.iter().zip(&want).enumerate() {
            assert!((got - w).abs() < 1e-9, "u_{j}: {got}");
        }
    }

    #[test]
    fn polyfit_of_evolved_gaussian() {
        let m = LayeredMedium::homogeneous(1.0).unwrap();
        let f = SampledField::from_fn(grid(), 0.0, |x| (-x * x).exp()).unwrap();
        let u = heat_forward_homogeneous(&f, 0.1, 1.0, FractalOrder::CLASSICAL).unwrap();
        let tc = taylor_coeffs(&u, &m, 24, &series_config(0.1)).unwrap();
        assert!((tc.coeffs[0] - 0.845_154_254_728_516_6).abs() < 1e-8);
        assert!((tc.coeffs[2] - (-1.207_363_221_040_738)).abs() < 1e-6);
        assert!(tc.condition.is_finite());
    }

    #[test]
    fn moments_agree_with_polyfit_on_evolved_gaussian() {
        let m = LayeredMedium::homogeneous(1.0).unwrap();
        let f = SampledField::from_fn(grid(), 0.0, |x| (-x * x).exp()).unwrap();
        let u = heat_forward_homogeneous(&f, 0.1, 1.0, FractalOrder::CLASSICAL).unwrap();
        let mut cfg = series_config(0.1);
        cfg.coeff_method = CoeffMethod::Moments;
        let tc = taylor_coeffs(&u, &m, 6, &cfg).unwrap();
        assert!((tc.coeffs[0] - 0.845_154_254_728_516_6).abs() < 1e-7);
        assert!((tc.coeffs[2] - (-1.207_363_221_040_738)).abs() < 1e-6);
        assert!((tc.coeffs[4] - 5.174_413_804_460_306).abs() < 1e-5);
        assert!(tc.coeffs[1].abs() < 1e-8 && tc.coeffs[3].abs() < 1e-7);
    }

    #[test]
    fn polyfit_recovers_exact_layered_expansion() {
        let med = two_layer_ideal();
        let table = med.generalized_monomials(3).unwrap();
        let c = [1.0, 0.5, -0.3, 0.2];
        let g = Grid::from_range(-16.0, 16.0, 2048).unwrap();
        let u = SampledField::from_fn(g, 0.1, |x| {
            c.iter()
                .enumerate()
                .map(|(j, &cj)| cj * table.eval(j, x) / falling(j, j))
                .sum()
        })
        .unwrap();
        let mut cfg = series_config(0.1);
        cfg.order = 3;
        let tc = taylor_coeffs(&u, &med, 3, &cfg).unwrap();
        for (j, (&got, &want)) in tc.coeffs.iter().zip(&c).enumerate() {
            assert!((got - want).abs() < 1e-8, "c_{j}: {got} vs {want}");
        }
    }

    #[test]
    fn series_reconstruction_constant_passthrough() {
        let m = LayeredMedium::homogeneous(1.0).unwrap();
        let u = SampledField::from_fn(grid(), 0.1, |_| 0.7).unwrap();
        let rec = reconstruct_series(&u, &m, &series_config(0.1)).unwrap();
        let want = SampledField::from_fn(grid(), 0.0, |_| 0.7).unwrap();
        assert!(max_abs_diff(&rec.field, &want, |x| x.abs() <= 4.0) < 1e-8);
        assert!(!rec.divergent);
    }

    #[test]
    fn series_reconstruction_of_evolved_gaussian() {
        let m = LayeredMedium::homogeneous(1.0).unwrap();
        let f = SampledField::from_fn(grid(), 0.0, |x| (-x * x).exp()).unwrap();
        let u = heat_forward_homogeneous(&f, 0.1, 1.0, FractalOrder::CLASSICAL).unwrap();
        let rec = reconstruct_series(&u, &m, &series_config(0.1)).unwrap();
        let err = rel_l2(&rec.field, &f, |x| x.abs() <= 1.0);
        assert!(err <= 1e-4, "rel-L2 {err:e}");
    }

    #[test]
    fn spectral_cutoff_zero_gives_zero() {
        let m = LayeredMedium::homogeneous(1.0).unwrap();
        let u = SampledField::from_fn(grid(), 0.1, |x| (-x * x).exp()).unwrap();
        let f = spectral_invert(&u, &m, EvolutionKernel::Classical { tau: 0.1 }, 0.0).unwrap();
        assert_eq!(f.max_abs(), 0.0);
    }

    #[test]
    fn spectral_inversion_of_evolved_gaussian() {
        let m = LayeredMedium::homogeneous(1.0).unwrap();
        let f = SampledField::from_fn(grid(), 0.0, |x| (-x * x).exp()).unwrap();
        let u = heat_forward_homogeneous(&f, 0.1, 1.0, FractalOrder::CLASSICAL).unwrap();
        let rec = spectral_invert(&u, &m, EvolutionKernel::Classical { tau: 0.1 }, 12.0).unwrap();
        let err = rel_l2(&rec, &f, |_| true);
        assert!(err <= 1e-8, "rel-L2 {err:e}");
    }

    #[test]
    fn spectral_overflow_guard_fires() {
        let m = LayeredMedium::homogeneous(1.0).unwrap();
        let u = SampledField::from_fn(grid(), 2.0, |x| (-x * x).exp()).unwrap();
        // τ = 2 at Λ = 12 amplifies by e^{288}; the observed field's tail
        // cannot balance that.
        let err = spectral_invert(&u, &m, EvolutionKernel::Classical { tau: 2.0 }, 12.0);
        assert!(matches!(err, Err(Error::AmplificationOverflow { .. })));
    }

    #[test]
    fn noisy_inversion_error_grows_with_cutoff() {
        let m = LayeredMedium::homogeneous(1.0).unwrap();
        let f = SampledField::from_fn(grid(), 0.0, |x| (-x * x).exp()).unwrap();
        let u = heat_forward_homogeneous(&f, 0.1, 1.0, FractalOrder::CLASSICAL).unwrap();
        let noisy = add_noise(&u, 1e-3, 42);
        let kernel = EvolutionKernel::Classical { tau: 0.1 };
        let err_at = |cutoff: f64| {
            let rec = spectral_invert(&noisy, &m, kernel, cutoff).unwrap();
            rel_l2(&rec, &f, |_| true)
        };
        assert!(err_at(12.0) > err_at(4.0));
    }

    #[test]
    fn regularization_sweep_has_interior_minimum() {
        let m = LayeredMedium::homogeneous(1.0).unwrap();
        let f = SampledField::from_fn(grid(), 0.0, |x| (-x * x).exp()).unwrap();
        let u = heat_forward_homogeneous(&f, 0.1, 1.0, FractalOrder::CLASSICAL).unwrap();
        let kernel = EvolutionKernel::Classical { tau: 0.1 };
        for &sigma in &[1e-4, 1e-3] {
            let noisy = add_noise(&u, sigma, 7);
            let errs: Vec<f64> = [2.0, 4.0, 6.0, 8.0, 10.0, 12.0]
                .iter()
                .map(|&c| {
                    let rec = spectral_invert(&noisy, &m, kernel, c).unwrap();
                    rel_l2(&rec, &f, |_| true)
                })
                .collect();
            let min = errs.iter().cloned().fold(f64::INFINITY, f64::min);
            let last = *errs.last().unwrap();
            assert!(
                last >= 2.0 * min,
                "sigma {sigma}: sweep {errs:?} lacks an interior minimum"
            );
        }
    }

    #[test]
    fn dalembert_recovers_traveling_family() {
        let g = Grid::from_range(-8.0, 8.0, 2048).unwrap();
        let gauss = |x: f64| (-x * x).exp();
        let tau = 0.5;
        let u_tau = wave_forward_family(gauss, tau, tau, g).unwrap();
        let f = dalembert_invert(&u_tau, tau).unwrap();
        for (i, x) in f.grid.xs().enumerate() {
            let want = gauss(x + tau) + gauss(x - tau);
            assert!((f.values[i] - want).abs() <= 1e-12);
        }
        // f_rec(0) = 2 e^{−τ²}
        let at0 = f.values[f.grid.index_of(0.0).unwrap()];
        assert!((at0 - 1.557_601_566_142_809_7).abs() < 1e-12);
    }

    #[test]
    fn dalembert_constant_passthrough() {
        let g = Grid::from_range(-4.0, 4.0, 256).unwrap();
        let u = SampledField::from_fn(g, 0.5, |_| 3.25).unwrap();
        let f = dalembert_invert(&u, 0.5).unwrap();
        assert!(f.values.iter().all(|&v| (v - 3.25).abs() < 1e-14));
    }

    #[test]
    fn dalembert_margin_error() {
        let g = Grid::from_range(-1.0, 1.0, 64).unwrap();
        let u = SampledField::from_fn(g, 0.9, |x| x).unwrap();
        assert!(matches!(
            dalembert_invert(&u, 0.9),
            Err(Error::OutOfDomain(_))
        ));
    }

    #[test]
    fn inversions_are_linear() {
        let m = LayeredMedium::homogeneous(1.0).unwrap();
        let g = grid();
        let u1 = SampledField::from_fn(g, 0.1, |x| (-x * x).exp()).unwrap();
        let u2 = SampledField::from_fn(g, 0.1, |x| x * (-x * x / 2.0).exp()).unwrap();
        let combo = SampledField::from_fn(g, 0.1, |x| {
            0.6 * (-x * x).exp() + 1.7 * x * (-x * x / 2.0).exp()
        })
        .unwrap();
        let kernel = EvolutionKernel::Classical { tau: 0.1 };
        // spectral
        let s1 = spectral_invert(&u1, &m, kernel, 6.0).unwrap();
        let s2 = spectral_invert(&u2, &m, kernel, 6.0).unwrap();
        let sc = spectral_invert(&combo, &m, kernel, 6.0).unwrap();
        let lin = SampledField::new(
            g,
            s1.values
                .iter()
                .zip(&s2.values)
                .map(|(a, b)| 0.6 * a + 1.7 * b)
                .collect(),
            0.0,
        )
        .unwrap();
        let scale = sc.max_abs().max(1.0);
        assert!(max_abs_diff(&sc, &lin, |_| true) <= 1e-12 * scale);
        // series
        let cfg = series_config(0.1);
        let r1 = reconstruct_series(&u1, &m, &cfg).unwrap().field;
        let r2 = reconstruct_series(&u2, &m, &cfg).unwrap().field;
        let rc = reconstruct_series(&combo, &m, &cfg).unwrap().field;
        let lin = SampledField::new(
            g,
            r1.values
                .iter()
                .zip(&r2.values)
                .map(|(a, b)| 0.6 * a + 1.7 * b)
                .collect(),
            0.0,
        )
        .unwrap();
        let scale = rc.max_abs().max(1.0);
        assert!(max_abs_diff(&rc, &lin, |_| true) <= 1e-11 * scale);
    }

    #[test]
    fn noise_is_deterministic_per_seed() {
        let g = Grid::from_range(-4.0, 4.0, 128).unwrap();
        let u = SampledField::zeros(g, 0.0);
        let a = add_noise(&u, 1e-3, 42);
        let b = add_noise(&u, 1e-3, 42);
        let c = add_noise(&u, 1e-3, 43);
        assert_eq!(a.values, b.values);
        assert_ne!(a.values, c.values);
        let mean: f64 = a.values.iter().sum::<f64>() / a.values.len() as f64;
        assert!(mean.abs() < 5e-4);
    }
}
