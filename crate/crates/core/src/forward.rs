//! Independent forward solvers. Each inverse method in this crate is
//! checked against one of these: a spectral multiplier on a padded
//! periodic grid, an interface-aware Crank–Nicolson stepper, the exact
//! d'Alembert family, the dual-Hermite forward series, and the Poisson
//! half-plane multiplier.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::field::{Grid, SampledField};
use crate::linalg::BandedMatrix;
use crate::media::LayeredMedium;
use crate::special::{dual_hermite, falling, gamma, ml_eval, FractalOrder};

/// Signed angular frequencies of a length-n FFT with sample spacing dx.
fn fft_freqs(n: usize, dx: f64) -> Vec<f64> {
    let d = 2.0 * std::f64::consts::PI / (n as f64 * dx);
    (0..n)
        .map(|k| {
            let signed = if k <= n / 2 { k as isize } else { k as isize - n as isize };
            signed as f64 * d
        })
        .collect()
}

/// Apply a real spectral multiplier m(λ) on the padded periodic extension
/// of the field (pad factor 2, cosine taper of the edge values onto the
/// padding).
fn apply_multiplier(f: &SampledField, m: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    let n = f.grid.n;
    let n_pad = 2 * n;
    let offset = n / 2;
    let mut buf = vec![Complex64::ZERO; n_pad];
    for (i, &v) in f.values.iter().enumerate() {
        buf[offset + i] = Complex64::new(v, 0.0);
    }
    // Taper the pads from the edge values down to zero.
    let left = f.values[0];
    let right = f.values[n - 1];
    for j in 0..offset {
        let ramp = 0.5 * (1.0 - (std::f64::consts::PI * j as f64 / offset as f64).cos());
        buf[j] = Complex64::new(left * ramp, 0.0);
        buf[n_pad - 1 - j] = Complex64::new(right * ramp, 0.0);
    }

    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n_pad).process(&mut buf);
    for (k, lambda) in fft_freqs(n_pad, f.grid.dx).into_iter().enumerate() {
        let mult = m(lambda);
        if !mult.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "spectral multiplier not finite at lambda = {lambda}"
            )));
        }
        buf[k] *= mult;
    }
    planner.plan_fft_inverse(n_pad).process(&mut buf);
    let scale = 1.0 / n_pad as f64;
    Ok((0..n).map(|i| buf[offset + i].re * scale).collect())
}

/// Evolve a field on the homogeneous axis by the diffusion semigroup with
/// speed a and fractional order α: multiplier E_{α,1}(−a²λ²τ^α), which is
/// e^{−a²λ²τ} at α = 1 and cos(aλτ) at α = 2.
pub fn heat_forward_homogeneous(
    f: &SampledField,
    tau: f64,
    a: f64,
    alpha: FractalOrder,
) -> Result<SampledField> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("bad evolution time {tau}")));
    }
    if !(a > 0.0) {
        return Err(Error::InvalidArgument(format!("bad speed {a}")));
    }
    let values = if tau == 0.0 {
        f.values.clone()
    } else {
        let al = alpha.get();
        apply_multiplier(f, |lambda| {
            ml_eval(alpha, -a * a * lambda * lambda * tau.powf(al))
        })?
    };
    SampledField::new(f.grid, values, f.time_tag + tau)
}

fn is_flux_coupling(medium: &LayeredMedium, k: usize) -> bool {
    let c = &medium.couplings()[k];
    let a_l = medium.speed(k);
    let a_r = medium.speed(k + 1);
    let r0 = &c.rows[0];
    let r1 = &c.rows[1];
    let continuity = r0.left.alpha == 0.0
        && r0.right.alpha == 0.0
        && r0.left.beta != 0.0
        && (r0.left.beta - r0.right.beta).abs() <= 1e-12 * r0.left.beta.abs();
    // Flux row must be (α_l, α_r) ∝ (a_l², a_r²) with no value terms.
    let flux = r1.left.beta == 0.0
        && r1.right.beta == 0.0
        && r1.left.alpha != 0.0
        && (r1.left.alpha * a_r * a_r - r1.right.alpha * a_l * a_l).abs()
            <= 1e-12 * (r1.left.alpha * a_r * a_r).abs();
    continuity && flux
}

/// Crank–Nicolson evolution of the layered diffusion system with
/// conservative flux-balance rows at the interfaces and zero Dirichlet
/// conditions at the truncated ends.
///
/// Interface nodes must lie on the grid. Only the flux coupling form
/// (continuity of u and of a²u_x) is discretized; the value condition is
/// met by sharing the nodal unknown and the flux condition becomes the
/// half-cell balance, which conserves the trapezoid mass to solver
/// precision.
pub fn piecewise_heat_fd(
    medium: &LayeredMedium,
    f: &SampledField,
    tau: f64,
    steps: usize,
) -> Result<SampledField> {
    if !(tau > 0.0) || steps == 0 {
        return Err(Error::InvalidArgument(
            "piecewise_heat_fd needs tau > 0 and steps > 0".into(),
        ));
    }
    let g = f.grid;
    let mut interface_nodes = Vec::with_capacity(medium.n_interfaces());
    for (k, &l) in medium.breakpoints().iter().enumerate() {
        let Some(i) = g.index_of(l) else {
            return Err(Error::GridMismatch(format!(
                "breakpoint {l} is not a grid point"
            )));
        };
        if i < 2 || i + 2 >= g.n {
            return Err(Error::GridMismatch(format!(
                "breakpoint {l} too close to the grid boundary"
            )));
        }
        if !is_flux_coupling(medium, k) {
            return Err(Error::NotImplemented(
                "finite differences support only flux couplings (u and a²u_x continuous)".into(),
            ));
        }
        interface_nodes.push(i);
    }

    let n = g.n;
    let dt = tau / steps as f64;
    let dx = g.dx;
    let mut mat = BandedMatrix::zeros(n, 1, 1);
    // Row coefficients of the explicit half, applied per step.
    let mut rhs_lo = vec![0.0; n];
    let mut rhs_di = vec![0.0; n];
    let mut rhs_hi = vec![0.0; n];
    for i in 0..n {
        if i == 0 || i == n - 1 {
            mat.set(i, i, 1.0);
            // Dirichlet: rhs row zero.
            continue;
        }
        let (dl, dr) = if let Some(_k) = interface_nodes.iter().position(|&j| j == i) {
            // Half-cell flux balance across the interface node.
            let a_l = medium.diffusivity(g.x(i) - 0.5 * dx);
            let a_r = medium.diffusivity(g.x(i) + 0.5 * dx);
            (a_l, a_r)
        } else {
            let a2 = medium.diffusivity(g.x(i));
            (a2, a2)
        };
        let r = dt / (2.0 * dx * dx);
        mat.set(i, i - 1, -r * dl);
        mat.set(i, i, 1.0 + r * (dl + dr));
        mat.set(i, i + 1, -r * dr);
        rhs_lo[i] = r * dl;
        rhs_di[i] = 1.0 - r * (dl + dr);
        rhs_hi[i] = r * dr;
    }
    let lu = mat.factor()?;

    let mut u = f.values.clone();
    u[0] = 0.0;
    u[n - 1] = 0.0;
    let mut b = vec![0.0; n];
    for _ in 0..steps {
        b[0] = 0.0;
        b[n - 1] = 0.0;
        for i in 1..n - 1 {
            b[i] = rhs_lo[i] * u[i - 1] + rhs_di[i] * u[i] + rhs_hi[i] * u[i + 1];
        }
        u = lu.solve(&b);
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure(
                "finite-difference step produced non-finite values".into(),
            ));
        }
    }
    SampledField::new(g, u, f.time_tag + tau)
}

/// Influence kernel H(t, x, ξ) = weight ∫ φ(x,λ) e^{−λ²t} φ*(ξ,λ) dλ,
/// truncated at |λ| ≤ cutoff. On the homogeneous axis this is the heat
/// kernel e^{−(x−ξ)²/(4t)} / (2√(πt)); on layered media it inherits the
/// transform pair's completeness defect and is reported as a diagnostic.
pub fn influence_kernel(
    medium: &LayeredMedium,
    t: f64,
    x: f64,
    xi: f64,
    lambda_cutoff: f64,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument("influence kernel needs t > 0".into()));
    }
    let rate = (x.abs() + xi.abs() + 2.0) / medium.speeds().iter().cloned().fold(f64::INFINITY, f64::min);
    let d_lam = (0.5 / rate).min(0.02);
    let n_half = (lambda_cutoff / d_lam).ceil() as usize;
    let weight = medium.default_weight();
    let mut acc = Complex64::ZERO;
    for j in -(n_half as isize)..=(n_half as isize) {
        let lambda = j as f64 * d_lam;
        let damp = (-lambda * lambda * t).exp();
        if damp < 1e-16 {
            continue;
        }
        let direct = medium.eigenfunction_at(lambda, crate::media::EigenKind::Direct)?;
        let conj = medium.eigenfunction_at(lambda, crate::media::EigenKind::Conjugate)?;
        let w = if j.unsigned_abs() == n_half { 0.5 } else { 1.0 };
        acc += direct.eval(x) * conj.eval(xi) * (damp * w);
    }
    Ok(acc.re * d_lam * weight)
}

/// The exact traveling family u(t, x) = g(x + t − τ) + g(x − t + τ)
/// sampled on a grid.
pub fn wave_forward_family(
    g: impl Fn(f64) -> f64,
    t: f64,
    tau: f64,
    grid: Grid,
) -> Result<SampledField> {
    SampledField::from_fn(grid, t, |x| g(x + t - tau) + g(x - t + tau))
}

/// Forward evolution of polynomial initial data by the dual-Hermite series
/// u(τ, x) = Σ_j f_j τ^{βj}/j! · H*_j(x/τ^β), β = α/2, where f_j are the
/// Taylor coefficients of f = Σ f_j x^j/j!.
///
/// Returns the polynomial evaluator of u(τ, ·).
pub fn forward_series(
    f_taylor: &[f64],
    tau: f64,
    alpha: FractalOrder,
) -> Result<impl Fn(f64) -> f64> {
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument("forward series needs tau > 0".into()));
    }
    if f_taylor.len() > 64 {
        return Err(Error::OutOfRange("forward series degree exceeds 64".into()));
    }
    let a = alpha.get();
    let mut coeffs = vec![0.0; f_taylor.len()];
    for (j, &fj) in f_taylor.iter().enumerate() {
        if fj == 0.0 {
            continue;
        }
        // f_j τ^{βj}/j! H*_j(x/τ^β): the x^{j−2k} coefficient picks up
        // τ^{β·2k} = τ^{αk}.
        for k in 0..=(j / 2) {
            let c = fj * tau.powf(a * k as f64) * falling(j, 2 * k)
                / (falling(j, j) * gamma(a * k as f64 + 1.0)?);
            coeffs[j - 2 * k] += c;
        }
    }
    Ok(move |x: f64| crate::media::horner(&coeffs, x))
}

/// Harmonic extension to depth l of boundary data on the line: the Poisson
/// multiplier e^{−l|λ|} applied on the periodic reading of the grid. Exact
/// for trigonometric data whose period divides the grid length.
pub fn halfplane_forward(f: &SampledField, l: f64) -> Result<SampledField> {
    if !(l >= 0.0) || !l.is_finite() {
        return Err(Error::InvalidArgument(format!("bad depth {l}")));
    }
    let n = f.grid.n;
    let mut buf: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, lambda) in fft_freqs(n, f.grid.dx).into_iter().enumerate() {
        buf[k] *= (-l * lambda.abs()).exp();
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    SampledField::new(
        f.grid,
        buf.iter().map(|c| c.re * scale).collect(),
        f.time_tag,
    )
}
