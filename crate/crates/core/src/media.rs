//! Piecewise-homogeneous axis model.
//!
//! The real line is split by breakpoints l_1 < … < l_n into n+1 layers,
//! layer m carrying a wave speed a_m. Eigenfunctions of
//! (a_m² d²/dx² + λ²)φ = 0 are per-layer plane-wave pairs glued by two
//! Robin-type coupling conditions per interface. The direct family is
//! normalized to a pure right-going wave in the rightmost layer,
//! φ_{n+1} = e^{iλx/a_{n+1}}; the conjugate family mirrors that with
//! e^{−iλx/a_{n+1}} and couples through the Δ-weighted conditions.
//!
//! Amplitudes are obtained by backward recursion from layer n+1, solving a
//! 2×2 system per interface, either pointwise in λ or as truncated series
//! (jets) around λ = 0. The jet route provides the λ-derivative
//! extractions behind the generalized power functions x_n^k and every
//! basis built on top of them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Grid, SampledField, Spectrum};
use crate::jet::{laurent_solve_2x2, Jet};

/// One side of a coupling condition: the operator α·d/dx + β.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobinCoeff {
    pub alpha: f64,
    pub beta: f64,
}

/// One coupling condition across an interface: left operator applied to the
/// left layer equals right operator applied to the right layer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingRow {
    pub left: RobinCoeff,
    pub right: RobinCoeff,
}

/// The two coupling conditions at one interface.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterfaceCoupling {
    pub rows: [CouplingRow; 2],
}

impl InterfaceCoupling {
    /// Continuity of u and of a²·u_x across the interface.
    pub fn ideal_contact(a_left: f64, a_right: f64) -> Self {
        InterfaceCoupling {
            rows: [
                CouplingRow {
                    left: RobinCoeff { alpha: 0.0, beta: 1.0 },
                    right: RobinCoeff { alpha: 0.0, beta: 1.0 },
                },
                CouplingRow {
                    left: RobinCoeff { alpha: a_left * a_left, beta: 0.0 },
                    right: RobinCoeff { alpha: a_right * a_right, beta: 0.0 },
                },
            ],
        }
    }

    /// Determinant of the side-i coefficient block (0 = left, 1 = right).
    pub fn delta(&self, side: usize) -> f64 {
        let (r0, r1) = (&self.rows[0], &self.rows[1]);
        let (a0, b0, a1, b1) = match side {
            0 => (r0.left.alpha, r0.left.beta, r1.left.alpha, r1.left.beta),
            _ => (r0.right.alpha, r0.right.beta, r1.right.alpha, r1.right.beta),
        };
        a0 * b1 - a1 * b0
    }
}

/// Validated piecewise-homogeneous axis.
#[derive(Clone, Debug, PartialEq)]
pub struct LayeredMedium {
    breakpoints: Vec<f64>,
    speeds: Vec<f64>,
    couplings: Vec<InterfaceCoupling>,
    deltas: Vec<[f64; 2]>,
}

impl LayeredMedium {
    pub fn new(
        breakpoints: Vec<f64>,
        speeds: Vec<f64>,
        couplings: Vec<InterfaceCoupling>,
    ) -> Result<Self> {
        let n = breakpoints.len();
        if speeds.len() != n + 1 {
            return Err(Error::Construction(format!(
                "need {} speeds for {} breakpoints, got {}",
                n + 1,
                n,
                speeds.len()
            )));
        }
        if couplings.len() != n {
            return Err(Error::Construction(format!(
                "need {} coupling blocks, got {}",
                n,
                couplings.len()
            )));
        }
        for w in breakpoints.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Construction(format!(
                    "breakpoints must increase strictly: {} !< {}",
                    w[0], w[1]
                )));
            }
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::Construction("non-finite breakpoint".into()));
        }
        for (m, &a) in speeds.iter().enumerate() {
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::Construction(format!(
                    "layer {} speed must be positive, got {a}",
                    m + 1
                )));
            }
        }
        let mut deltas = Vec::with_capacity(n);
        for (k, c) in couplings.iter().enumerate() {
            let d = [c.delta(0), c.delta(1)];
            for (i, &di) in d.iter().enumerate() {
                if di == 0.0 || !di.is_finite() {
                    return Err(Error::Construction(format!(
                        "coupling determinant Delta_{{{},{}}} vanishes",
                        i + 1,
                        k + 1
                    )));
                }
            }
            deltas.push(d);
        }
        Ok(LayeredMedium {
            breakpoints,
            speeds,
            couplings,
            deltas,
        })
    }

    pub fn homogeneous(speed: f64) -> Result<Self> {
        Self::new(vec![], vec![speed], vec![])
    }

    pub fn n_interfaces(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn n_layers(&self) -> usize {
        self.speeds.len()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.breakpoints.is_empty()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    pub fn couplings(&self) -> &[InterfaceCoupling] {
        &self.couplings
    }

    pub fn deltas(&self) -> &[[f64; 2]] {
        &self.deltas
    }

    /// Layer index (0-based) containing x. A breakpoint belongs to the
    /// layer on its left.
    pub fn layer_of(&self, x: f64) -> usize {
        self.breakpoints.partition_point(|&l| l < x)
    }

    pub fn speed(&self, layer: usize) -> f64 {
        self.speeds[layer]
    }

    /// a(x)², the diffusivity profile.
    pub fn diffusivity(&self, x: f64) -> f64 {
        let a = self.speeds[self.layer_of(x)];
        a * a
    }

    /// Spectral weight making the homogeneous transform pair an exact
    /// Fourier inversion: 1/(2π a_{n+1}).
    pub fn default_weight(&self) -> f64 {
        1.0 / (2.0 * std::f64::consts::PI * self.speeds[self.speeds.len() - 1])
    }

    /// Pointwise eigenfunction at a fixed λ. At λ = 0 the interface systems
    /// are singular, so the jet path is evaluated there instead.
    pub fn eigenfunction_at(&self, lambda: f64, kind: EigenKind) -> Result<PointEigenfunction> {
        if !lambda.is_finite() {
            return Err(Error::InvalidArgument("lambda must be finite".into()));
        }
        if lambda == 0.0 {
            let jet = self.eigenfunction_jet(4, kind)?;
            let amps = jet.amps.iter().map(|[a, b]| [a.coeff(0), b.coeff(0)]).collect();
            return Ok(PointEigenfunction {
                medium: self,
                kind,
                lambda,
                amps,
            });
        }

        let s = kind.sign();
        let n = self.n_interfaces();
        let mut amps = vec![[Complex64::ZERO; 2]; n + 1];
        amps[n] = [Complex64::ONE, Complex64::ZERO];
        for k in (0..n).rev() {
            let l = self.breakpoints[k];
            let a_l = self.speeds[k];
            let a_r = self.speeds[k + 1];
            let [ar, br] = amps[k + 1];
            let ep_r = (Complex64::i() * (s * lambda * l / a_r)).exp();
            let em_r = 1.0 / ep_r;
            let ep_l = (Complex64::i() * (s * lambda * l / a_l)).exp();
            let em_l = 1.0 / ep_l;
            let il_r = Complex64::i() * (s * lambda / a_r);
            let il_l = Complex64::i() * (s * lambda / a_l);
            let weight = match kind {
                EigenKind::Direct => Complex64::ONE,
                EigenKind::Conjugate => {
                    Complex64::new(self.deltas[k][0] / self.deltas[k][1], 0.0)
                }
            };
            let mut m = [[Complex64::ZERO; 2]; 2];
            let mut rhs = [Complex64::ZERO; 2];
            for cond in 0..2 {
                let row = &self.couplings[k].rows[cond];
                rhs[cond] = weight
                    * (ar * ep_r * (row.right.beta + row.right.alpha * il_r)
                        + br * em_r * (row.right.beta - row.right.alpha * il_r));
                m[cond][0] = (row.left.beta + row.left.alpha * il_l) * ep_l;
                m[cond][1] = (row.left.beta - row.left.alpha * il_l) * em_l;
            }
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let scale = m
                .iter()
                .flatten()
                .map(|c| c.norm())
                .fold(0.0, f64::max)
                .max(1e-300);
            if det.norm() <= 1e-13 * scale * scale {
                return Err(Error::SingularSystem {
                    interface: Some(k),
                    lambda: Some(lambda),
                });
            }
            amps[k] = [
                (rhs[0] * m[1][1] - rhs[1] * m[0][1]) / det,
                (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det,
            ];
        }
        Ok(PointEigenfunction {
            medium: self,
            kind,
            lambda,
            amps,
        })
    }

    /// Eigenfunction with amplitude jets around λ = 0.
    ///
    /// Internally the series run a few orders past the request so that the
    /// valuation shifts inside the interface solves cannot eat into the
    /// returned coefficients.
    pub fn eigenfunction_jet(&self, order: usize, kind: EigenKind) -> Result<JetEigenfunction> {
        if order > 64 {
            return Err(Error::OutOfRange(format!(
                "jet order {order} exceeds 64"
            )));
        }
        let s = kind.sign();
        let n = self.n_interfaces();
        let work = order + 2 * n;
        let mut amps: Vec<[Jet; 2]> = vec![[Jet::zero(work), Jet::zero(work)]; n + 1];
        amps[n] = [Jet::from_real(work, 1.0), Jet::zero(work)];
        for k in (0..n).rev() {
            let l = self.breakpoints[k];
            let a_l = self.speeds[k];
            let a_r = self.speeds[k + 1];
            let wave = |speed: f64, dir: f64| -> Result<Jet> {
                // exp(i s dir l λ / speed)
                let mut c = vec![Complex64::ZERO; work + 1];
                if work >= 1 {
                    c[1] = Complex64::i() * (s * dir * l / speed);
                }
                Jet::from_coeffs(c)?.exp()
            };
            let robin = |coeff: &RobinCoeff, speed: f64, dir: f64| -> Jet {
                // β + i α s dir λ / speed, with the λ factor tracked as a
                // valuation when β = 0 so flux rows keep exact order.
                let slope = Complex64::i() * (coeff.alpha * s * dir / speed);
                if coeff.beta == 0.0 {
                    Jet::linear_factored(work, slope)
                } else if coeff.alpha == 0.0 {
                    Jet::from_real(work, coeff.beta)
                } else {
                    let mut c = vec![Complex64::ZERO; work + 1];
                    c[0] = Complex64::new(coeff.beta, 0.0);
                    c[1] = slope;
                    Jet::from_coeffs(c).expect("finite robin coefficients")
                }
            };
            let ep_r = wave(a_r, 1.0)?;
            let em_r = wave(a_r, -1.0)?;
            let ep_l = wave(a_l, 1.0)?;
            let em_l = wave(a_l, -1.0)?;
            let [ar, br] = amps[k + 1].clone();
            let weight = match kind {
                EigenKind::Direct => Complex64::ONE,
                EigenKind::Conjugate => {
                    Complex64::new(self.deltas[k][0] / self.deltas[k][1], 0.0)
                }
            };
            let mut m_rows: Vec<[Jet; 2]> = Vec::with_capacity(2);
            let mut rhs: Vec<Jet> = Vec::with_capacity(2);
            for cond in 0..2 {
                let row = &self.couplings[k].rows[cond];
                let r = ar
                    .mul(&ep_r)?
                    .mul(&robin(&row.right, a_r, 1.0))?
                    .add(&br.mul(&em_r)?.mul(&robin(&row.right, a_r, -1.0))?)?
                    .scale(weight);
                rhs.push(r);
                m_rows.push([
                    robin(&row.left, a_l, 1.0).mul(&ep_l)?,
                    robin(&row.left, a_l, -1.0).mul(&em_l)?,
                ]);
            }
            let m = [m_rows.remove(0), m_rows.remove(0)];
            let rhs = [rhs.remove(0), rhs.remove(0)];
            amps[k] = laurent_solve_2x2(&m, &rhs).map_err(|e| match e {
                Error::SingularSystem { .. } => Error::SingularSystem {
                    interface: Some(k),
                    lambda: None,
                },
                Error::IncompatibleSystem { .. } => {
                    Error::IncompatibleSystem { interface: Some(k) }
                }
                other => other,
            })?;
        }
        let amps = amps
            .into_iter()
            .map(|[a, b]| [a.truncated(order), b.truncated(order)])
            .collect();
        Ok(JetEigenfunction {
            medium: self.clone(),
            kind,
            order,
            amps,
        })
    }

    /// Table of generalized power functions x_n^k, k = 0..k_max, as
    /// per-layer polynomials: x_n^k = (−i)^k ∂^k φ/∂λ^k |_{λ=0}.
    pub fn generalized_monomials(&self, k_max: usize) -> Result<GeneralizedMonomialTable> {
        if k_max > 64 {
            return Err(Error::OutOfRange(format!("degree {k_max} exceeds 64")));
        }
        let eig = self.eigenfunction_jet(k_max, EigenKind::Direct)?;
        let n_layers = self.n_layers();
        let mut polys = vec![Vec::with_capacity(k_max + 1); n_layers];
        for (m, layer_polys) in polys.iter_mut().enumerate() {
            let a = self.speeds[m];
            let amp_a = eig.amps[m][0].normalized();
            let amp_b = eig.amps[m][1].normalized();
            for k in 0..=k_max {
                let mut coeffs = vec![0.0; k + 1];
                let pref = (-Complex64::i()).powu(k as u32);
                let mut scale = 0.0f64;
                let mut worst_im = 0.0f64;
                for (q, c) in coeffs.iter_mut().enumerate() {
                    // (−i)^k (k!/q!) (i/a)^q [A_{k−q} + (−1)^q B_{k−q}]
                    let fall = crate::special::falling(k, k - q);
                    let iq = (Complex64::i() / a).powu(q as u32);
                    let parity = if q % 2 == 1 { -1.0 } else { 1.0 };
                    let val =
                        pref * fall * iq * (amp_a.coeff(k - q) + parity * amp_b.coeff(k - q));
                    scale = scale.max(val.norm());
                    worst_im = worst_im.max(val.im.abs());
                    *c = val.re;
                }
                if worst_im > 1e-12 * scale.max(1.0) {
                    return Err(Error::InternalConsistency(format!(
                        "generalized monomial x_n^{k} in layer {} has imaginary residue {worst_im:e}",
                        m + 1
                    )));
                }
                layer_polys.push(coeffs);
            }
        }
        Ok(GeneralizedMonomialTable {
            medium: self.clone(),
            k_max,
            polys,
        })
    }

    /// Forward transform ũ(λ) = ∫ φ*(ξ, λ) u(ξ) dξ by trapezoid quadrature
    /// on the field's grid, for each λ in `lambdas`.
    pub fn transform_analysis(&self, field: &SampledField, lambdas: &[f64]) -> Result<Spectrum> {
        let g = field.grid;
        let mut values = Vec::with_capacity(lambdas.len());
        for &lambda in lambdas {
            let eig = self.eigenfunction_at(lambda, EigenKind::Conjugate)?;
            let mut acc = Complex64::ZERO;
            for (i, x) in g.xs().enumerate() {
                let w = if i == 0 || i == g.n - 1 { 0.5 } else { 1.0 };
                acc += eig.eval(x) * (field.values[i] * w);
            }
            values.push(acc * g.dx);
        }
        let mut spec = Spectrum::new(lambdas.to_vec(), values)?;
        spec.decay_warning = field.decay_warning();
        Ok(spec)
    }

    /// Inverse transform f(x) = weight ∫ φ(x, λ) ũ(λ) dλ on the given grid.
    /// The spectrum's λ grid must be uniform and symmetric about 0.
    pub fn transform_synthesis(
        &self,
        spectrum: &Spectrum,
        grid: Grid,
        weight: f64,
    ) -> Result<SampledField> {
        let nl = spectrum.lambdas.len();
        if nl < 2 {
            return Ok(SampledField::zeros(grid, 0.0));
        }
        let dl = spectrum.lambdas[1] - spectrum.lambdas[0];
        for w in spectrum.lambdas.windows(2) {
            if ((w[1] - w[0]) - dl).abs() > 1e-9 * dl.abs().max(1e-9) {
                return Err(Error::InvalidArgument(
                    "synthesis requires a uniform lambda grid".into(),
                ));
            }
        }
        let mut acc = vec![Complex64::ZERO; grid.n];
        for (j, &lambda) in spectrum.lambdas.iter().enumerate() {
            let wq = if j == 0 || j == nl - 1 { 0.5 } else { 1.0 };
            let s = spectrum.values[j] * wq * dl * weight;
            if s == Complex64::ZERO {
                continue;
            }
            let eig = self.eigenfunction_at(lambda, EigenKind::Direct)?;
            for (i, x) in grid.xs().enumerate() {
                acc[i] += eig.eval(x) * s;
            }
        }
        SampledField::new(grid, acc.iter().map(|c| c.re).collect(), 0.0)
    }

    /// Numerical check of how close the transform pair comes to a
    /// resolution of the identity: evaluates the damped kernel
    /// K_ε(x, ξ) = weight ∫ φ(x,λ) e^{−ελ²} φ*(ξ,λ) dλ and reports, per
    /// probe point x, the mass near the diagonal and the stray mass away
    /// from it.
    pub fn completeness_defect(&self, epsilon: f64, xs: &[f64]) -> Result<DefectReport> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidArgument("epsilon must be positive".into()));
        }
        if xs.is_empty() {
            return Err(Error::InvalidArgument("need at least one probe point".into()));
        }
        let a_min = self.speeds.iter().cloned().fold(f64::INFINITY, f64::min);
        let a_max = self.speeds.iter().cloned().fold(0.0, f64::max);
        let x_lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let x_hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

        let sigma_min = (2.0 * epsilon).sqrt() * a_min;
        let sigma_max = (2.0 * epsilon).sqrt() * a_max;
        let r_diag = (10.0 * sigma_max).max(0.5);

        let xi_lo = x_lo - r_diag - 2.0;
        let xi_hi = x_hi + r_diag + 2.0;
        let d_xi = (sigma_min / 6.0).max((xi_hi - xi_lo) / 6000.0);
        let n_xi = ((xi_hi - xi_lo) / d_xi).ceil() as usize + 1;
        let xis: Vec<f64> = (0..n_xi).map(|i| xi_lo + d_xi * i as f64).collect();

        let lam_max = (21.0_f64 / epsilon).sqrt();
        let rate = (x_hi.abs().max(x_lo.abs()) + xi_hi.abs().max(xi_lo.abs()) + 2.0) / a_min;
        let d_lam = (0.5 / rate).min(0.05);
        let n_half = (lam_max / d_lam).ceil() as usize;
        let weight = self.default_weight();

        let mut kernel = vec![vec![Complex64::ZERO; n_xi]; xs.len()];
        let mut phi_x = vec![Complex64::ZERO; xs.len()];
        let mut phi_xi = vec![Complex64::ZERO; n_xi];
        for j in -(n_half as isize)..=(n_half as isize) {
            let lambda = j as f64 * d_lam;
            let damp = (-epsilon * lambda * lambda).exp();
            if damp < 1e-14 {
                continue;
            }
            let direct = self.eigenfunction_at(lambda, EigenKind::Direct)?;
            let conj = self.eigenfunction_at(lambda, EigenKind::Conjugate)?;
            for (i, &x) in xs.iter().enumerate() {
                phi_x[i] = direct.eval(x);
            }
            for (i, &xi) in xis.iter().enumerate() {
                phi_xi[i] = conj.eval(xi);
            }
            let f = weight * damp * d_lam;
            for (row, &px) in kernel.iter_mut().zip(phi_x.iter()) {
                let c = px * f;
                for (cell, &pxi) in row.iter_mut().zip(phi_xi.iter()) {
                    *cell += c * pxi;
                }
            }
        }

        let mut entries = Vec::with_capacity(xs.len());
        for (i, &x) in xs.iter().enumerate() {
            let mut diag = 0.0;
            let mut ghost = 0.0;
            for (k, &xi) in xis.iter().enumerate() {
                let v = kernel[i][k];
                if (xi - x).abs() <= r_diag {
                    diag += v.re * d_xi;
                } else {
                    ghost += v.norm() * d_xi;
                }
            }
            entries.push(DefectEntry {
                x,
                layer: self.layer_of(x) + 1,
                diagonal_mass: diag,
                ghost_mass: ghost,
            });
        }
        let mismatch = entries
            .iter()
            .any(|e| (e.diagonal_mass - 1.0).abs() > 1e-2 || e.ghost_mass > 1e-2);
        Ok(DefectReport {
            epsilon,
            weight,
            entries,
            mismatch,
        })
    }
}

/// Which Sturm–Liouville family an eigenfunction belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EigenKind {
    Direct,
    Conjugate,
}

impl EigenKind {
    /// Sign of the normalized wave in the rightmost layer: the per-layer
    /// convention is φ_m = A e^{i s λ x / a_m} + B e^{−i s λ x / a_m}.
    pub fn sign(self) -> f64 {
        match self {
            EigenKind::Direct => 1.0,
            EigenKind::Conjugate => -1.0,
        }
    }
}

/// Eigenfunction evaluated at a fixed λ.
pub struct PointEigenfunction<'m> {
    medium: &'m LayeredMedium,
    kind: EigenKind,
    lambda: f64,
    amps: Vec<[Complex64; 2]>,
}

impl PointEigenfunction<'_> {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn kind(&self) -> EigenKind {
        self.kind
    }

    /// Per-layer amplitudes (A_m, B_m).
    pub fn amplitudes(&self) -> &[[Complex64; 2]] {
        &self.amps
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let m = self.medium.layer_of(x);
        self.eval_in_layer(m, x)
    }

    fn eval_in_layer(&self, m: usize, x: f64) -> Complex64 {
        let s = self.kind.sign();
        let a = self.medium.speed(m);
        let phase = (Complex64::i() * (s * self.lambda * x / a)).exp();
        self.amps[m][0] * phase + self.amps[m][1] / phase
    }

    pub fn derivative(&self, x: f64) -> Complex64 {
        let m = self.medium.layer_of(x);
        let s = self.kind.sign();
        let a = self.medium.speed(m);
        let il = Complex64::i() * (s * self.lambda / a);
        let phase = (Complex64::i() * (s * self.lambda * x / a)).exp();
        self.amps[m][0] * il * phase - self.amps[m][1] * il / phase
    }

    /// Largest violation of the two coupling conditions at interface k
    /// (Δ-weighted for the conjugate family).
    pub fn coupling_residual(&self, k: usize) -> f64 {
        let med = self.medium;
        let l = med.breakpoints[k];
        let s = self.kind.sign();
        let mut worst = 0.0f64;
        for cond in 0..2 {
            let row = &med.couplings[k].rows[cond];
            let apply = |layer: usize, rc: &RobinCoeff| {
                let a = med.speed(layer);
                let phase = (Complex64::i() * (s * self.lambda * l / a)).exp();
                let il = Complex64::i() * (s * self.lambda / a);
                let val = self.amps[layer][0] * phase + self.amps[layer][1] / phase;
                let der = self.amps[layer][0] * il * phase - self.amps[layer][1] * il / phase;
                rc.alpha * der + rc.beta * val
            };
            let (wl, wr) = match self.kind {
                EigenKind::Direct => (1.0, 1.0),
                EigenKind::Conjugate => (1.0 / med.deltas[k][0], 1.0 / med.deltas[k][1]),
            };
            let lhs = apply(k, &row.left) * wl;
            let rhs = apply(k + 1, &row.right) * wr;
            worst = worst.max((lhs - rhs).norm());
        }
        worst
    }
}

/// Eigenfunction with amplitude jets around λ = 0.
#[derive(Clone, Debug)]
pub struct JetEigenfunction {
    medium: LayeredMedium,
    kind: EigenKind,
    order: usize,
    amps: Vec<[Jet; 2]>,
}

impl JetEigenfunction {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn kind(&self) -> EigenKind {
        self.kind
    }

    pub fn amplitudes(&self) -> &[[Jet; 2]] {
        &self.amps
    }

    pub fn medium(&self) -> &LayeredMedium {
        &self.medium
    }

    /// Evaluate φ(x, λ) by summing the truncated amplitude series at a
    /// (possibly complex) λ and applying the layer waves.
    pub fn eval_at(&self, x: f64, lambda: Complex64) -> Complex64 {
        let m = self.medium.layer_of(x);
        let s = self.kind.sign();
        let a = self.medium.speed(m);
        let phase = (Complex64::i() * lambda * (s * x / a)).exp();
        self.amps[m][0].eval(lambda) * phase + self.amps[m][1].eval(lambda) / phase
    }
}

/// Per-layer polynomial table of generalized power functions.
#[derive(Clone, Debug)]
pub struct GeneralizedMonomialTable {
    medium: LayeredMedium,
    k_max: usize,
    // polys[layer][k] = low-to-high coefficients of x_n^k restricted there.
    polys: Vec<Vec<Vec<f64>>>,
}

impl GeneralizedMonomialTable {
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn medium(&self) -> &LayeredMedium {
        &self.medium
    }

    pub fn poly(&self, layer: usize, k: usize) -> &[f64] {
        &self.polys[layer][k]
    }

    pub fn eval(&self, k: usize, x: f64) -> f64 {
        let layer = self.medium.layer_of(x);
        horner(&self.polys[layer][k], x)
    }

    /// a(x)²·(x_n^k)″ as per-layer coefficients, for the intertwining
    /// identity a² (x_n^k)″ = k(k−1) x_n^{k−2}.
    pub fn weighted_second_derivative(&self, layer: usize, k: usize) -> Vec<f64> {
        let p = &self.polys[layer][k];
        let a2 = self.medium.speed(layer).powi(2);
        if p.len() <= 2 {
            return vec![0.0];
        }
        (2..p.len())
            .map(|r| a2 * p[r] * (r as f64) * (r as f64 - 1.0))
            .collect()
    }
}

pub(crate) fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// One probe point of the completeness diagnostic.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DefectEntry {
    pub x: f64,
    pub layer: usize,
    pub diagonal_mass: f64,
    pub ghost_mass: f64,
}

/// Output of [`LayeredMedium::completeness_defect`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DefectReport {
    pub epsilon: f64,
    pub weight: f64,
    pub entries: Vec<DefectEntry>,
    /// True when some diagonal mass deviates from 1 or some ghost mass
    /// exceeds 1e-2: the transform pair is not a numerical identity there.
    pub mismatch: bool,
}

/// The standard two-layer test medium: speeds (1, 2), ideal contact at 0.
pub fn two_layer_ideal() -> LayeredMedium {
    LayeredMedium::new(
        vec![0.0],
        vec![1.0, 2.0],
        vec![InterfaceCoupling::ideal_contact(1.0, 2.0)],
    )
    .expect("valid test medium")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn build_medium_validation() {
        assert!(LayeredMedium::homogeneous(1.0).is_ok());
        // shape mismatch
        assert!(LayeredMedium::new(vec![0.0], vec![1.0], vec![]).is_err());
        // non-monotone breakpoints
        assert!(LayeredMedium::new(
            vec![1.0, 0.0],
            vec![1.0, 1.0, 1.0],
            vec![
                InterfaceCoupling::ideal_contact(1.0, 1.0),
                InterfaceCoupling::ideal_contact(1.0, 1.0)
            ]
        )
        .is_err());
        // non-positive speed
        assert!(LayeredMedium::new(
            vec![0.0],
            vec![1.0, -2.0],
            vec![InterfaceCoupling::ideal_contact(1.0, 2.0)]
        )
        .is_err());
    }

    #[test]
    fn ideal_contact_deltas() {
        let m = two_layer_ideal();
        assert_eq!(m.deltas()[0], [-1.0, -4.0]);
    }

    #[test]
    fn degenerate_coupling_rejected() {
        let degenerate = InterfaceCoupling {
            rows: [
                CouplingRow {
                    left: RobinCoeff { alpha: 1.0, beta: 1.0 },
                    right: RobinCoeff { alpha: 0.0, beta: 1.0 },
                },
                CouplingRow {
                    left: RobinCoeff { alpha: 2.0, beta: 2.0 },
                    right: RobinCoeff { alpha: 1.0, beta: 0.0 },
                },
            ],
        };
        let err = LayeredMedium::new(vec![0.0], vec![1.0, 2.0], vec![degenerate]);
        assert!(matches!(err, Err(Error::Construction(_))));
    }

    #[test]
    fn homogeneous_plane_wave() {
        let m = LayeredMedium::homogeneous(1.0).unwrap();
        let e = m.eigenfunction_at(1.0, EigenKind::Direct).unwrap();
        let v = e.eval(std::f64::consts::FRAC_PI_2);
        assert!((v - Complex64::i()).norm() < 1e-14);
    }

    #[test]
    fn two_layer_direct_amplitudes() {
        let m = two_layer_ideal();
        for &lambda in &[0.5, 1.0, 3.7, -2.0] {
            let e = m.eigenfunction_at(lambda, EigenKind::Direct).unwrap();
            let [a1, b1] = e.amplitudes()[0];
            assert!((a1 - Complex64::new(1.5, 0.0)).norm() < 1e-12, "lambda = {lambda}");
            assert!((b1 - Complex64::new(-0.5, 0.0)).norm() < 1e-12);
            assert!(e.coupling_residual(0) < 1e-10);
        }
    }

    #[test]
    fn two_layer_conjugate_amplitudes() {
        let m = two_layer_ideal();
        let e = m.eigenfunction_at(2.0, EigenKind::Conjugate).unwrap();
        let [a1, b1] = e.amplitudes()[0];
        assert!((a1 - Complex64::new(0.375, 0.0)).norm() < 1e-12);
        assert!((b1 - Complex64::new(-0.125, 0.0)).norm() < 1e-12);
        assert!(e.coupling_residual(0) < 1e-12);
    }

    #[test]
    fn coupling_residuals_over_lambda_range() {
        let m = two_layer_ideal();
        for kind in [EigenKind::Direct, EigenKind::Conjugate] {
            let mut lambda = -10.0;
            while lambda <= 10.0 {
                let e = m.eigenfunction_at(lambda, kind).unwrap();
                assert!(
                    e.coupling_residual(0) < 1e-10,
                    "kind {kind:?} lambda {lambda}"
                );
                lambda += 0.73;
            }
        }
    }

    #[test]
    fn ode_residual_central_difference() {
        let m = two_layer_ideal();
        let h = 1e-4;
        for &lambda in &[0.5, 3.0, 10.0] {
            let e = m.eigenfunction_at(lambda, EigenKind::Direct).unwrap();
            for &x in &[-2.0, -0.5, 0.7, 3.0] {
                let a2 = m.diffusivity(x);
                let second =
                    (e.eval(x + h) - e.eval(x) * 2.0 + e.eval(x - h)) / Complex64::new(h * h, 0.0);
                let res = (second * a2 + e.eval(x) * lambda * lambda).norm();
                let scale = (lambda * lambda * e.eval(x).norm()).max(1.0);
                assert!(res / scale < 1e-6, "x = {x}, lambda = {lambda}: {res:e}");
            }
        }
    }

    #[test]
    fn jet_amplitudes_constant_for_ideal_contact() {
        let m = two_layer_ideal();
        let e = m.eigenfunction_jet(8, EigenKind::Direct).unwrap();
        let [a1, b1] = &e.amplitudes()[0];
        assert!((a1.coeff(0) - Complex64::new(1.5, 0.0)).norm() < 1e-13);
        assert!((b1.coeff(0) - Complex64::new(-0.5, 0.0)).norm() < 1e-13);
        for j in 1..=8 {
            assert!(a1.coeff(j).norm() < 1e-12);
            assert!(b1.coeff(j).norm() < 1e-12);
        }
    }

    #[test]
    fn homogeneous_jet_is_trivial() {
        let m = LayeredMedium::homogeneous(2.0).unwrap();
        let e = m.eigenfunction_jet(6, EigenKind::Direct).unwrap();
        assert!((e.amplitudes()[0][0].coeff(0) - Complex64::ONE).norm() == 0.0);
        assert_eq!(e.amplitudes()[0][1].max_abs(), 0.0);
    }

    #[test]
    fn jet_matches_pointwise_near_zero() {
        // Taylor partial sums of the amplitudes agree with the pointwise
        // solve at small λ.
        let m = LayeredMedium::new(
            vec![-0.5, 1.0],
            vec![1.0, 0.7, 2.0],
            vec![
                InterfaceCoupling::ideal_contact(1.0, 0.7),
                InterfaceCoupling::ideal_contact(0.7, 2.0),
            ],
        )
        .unwrap();
        let jet = m.eigenfunction_jet(24, EigenKind::Direct).unwrap();
        for &lambda in &[0.05, -0.08, 0.1] {
            let point = m.eigenfunction_at(lambda, EigenKind::Direct).unwrap();
            let lc = Complex64::new(lambda, 0.0);
            for layer in 0..3 {
                for side in 0..2 {
                    let series = jet.amplitudes()[layer][side].eval(lc);
                    let exact = point.amplitudes()[layer][side];
                    assert!(
                        (series - exact).norm() < 1e-10,
                        "layer {layer} side {side} lambda {lambda}: {series} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn eigenfunction_at_zero_falls_back_to_jets() {
        let m = two_layer_ideal();
        let e = m.eigenfunction_at(0.0, EigenKind::Direct).unwrap();
        // φ(x, 0) = 1 in both layers for ideal contact.
        assert!((e.eval(-3.0) - Complex64::ONE).norm() < 1e-12);
        assert!((e.eval(2.0) - Complex64::ONE).norm() < 1e-12);
    }

    #[test]
    fn monomials_homogeneous_reduction() {
        let m = LayeredMedium::homogeneous(1.0).unwrap();
        let t = m.generalized_monomials(6).unwrap();
        for k in 0..=6 {
            for &x in &[-2.0, 0.3, 1.7] {
                assert!(close(t.eval(k, x), x.powi(k as i32), 1e-12 * x.abs().powi(k as i32).max(1.0)));
            }
        }
    }

    #[test]
    fn monomials_two_layer_values() {
        let t = two_layer_ideal().generalized_monomials(4).unwrap();
        // x_n^1 = 2x on the left, x/2 on the right
        assert!(close(t.eval(1, -1.0), -2.0, 1e-12));
        assert!(close(t.eval(1, 3.0), 1.5, 1e-12));
        // x_n^2 = x² left, x²/4 right
        assert!(close(t.eval(2, -2.0), 4.0, 1e-12));
        assert!(close(t.eval(2, 2.0), 1.0, 1e-12));
        // layer n+1 is exactly (x/a)^k
        assert!(close(t.eval(4, 1.2), (1.2f64 / 2.0).powi(4), 1e-13));
    }

    #[test]
    fn monomials_satisfy_weighted_second_derivative_identity() {
        let med = two_layer_ideal();
        let t = med.generalized_monomials(12).unwrap();
        for layer in 0..2 {
            for k in 2..=12 {
                let lhs = t.weighted_second_derivative(layer, k);
                let rhs = t.poly(layer, k - 2);
                let factor = (k * (k - 1)) as f64;
                for (r, &c) in rhs.iter().enumerate() {
                    let got = lhs.get(r).copied().unwrap_or(0.0);
                    assert!(
                        close(got, factor * c, 1e-12 * (factor * c.abs()).max(1.0)),
                        "layer {layer}, k = {k}, power {r}"
                    );
                }
            }
        }
        // a²(x_n^2)″ = 2 in both layers
        assert!(close(t.weighted_second_derivative(0, 2)[0], 2.0, 1e-12));
        assert!(close(t.weighted_second_derivative(1, 2)[0], 2.0, 1e-12));
    }

    #[test]
    fn monomials_satisfy_direct_coupling() {
        let med = two_layer_ideal();
        let t = med.generalized_monomials(12).unwrap();
        let l = 0.0;
        for k in 0..=12 {
            let pl = t.poly(0, k);
            let pr = t.poly(1, k);
            let val = |p: &[f64]| horner(p, l);
            let der = |p: &[f64]| {
                p.iter()
                    .enumerate()
                    .skip(1)
                    .map(|(r, c)| c * r as f64 * l.powi(r as i32 - 1))
                    .sum::<f64>()
            };
            for row in &med.couplings()[0].rows {
                let lhs = row.left.alpha * der(pl) + row.left.beta * val(pl);
                let rhs = row.right.alpha * der(pr) + row.right.beta * val(pr);
                assert!(close(lhs, rhs, 1e-10), "k = {k}");
            }
        }
    }

    #[test]
    fn analysis_of_gaussian_matches_fourier_transform() {
        let m = LayeredMedium::homogeneous(1.0).unwrap();
        let grid = Grid::from_range(-8.0, 8.0, 1024).unwrap();
        let u = SampledField::from_fn(grid, 0.0, |x| (-x * x).exp()).unwrap();
        let lambdas = Spectrum::symmetric_grid(8.0, 64);
        let spec = m.transform_analysis(&u, &lambdas).unwrap();
        for (i, &l) in spec.lambdas.iter().enumerate() {
            let want = std::f64::consts::PI.sqrt() * (-l * l / 4.0).exp();
            assert!(
                (spec.values[i] - Complex64::new(want, 0.0)).norm() < 1e-8,
                "lambda = {l}"
            );
            assert!(spec.values[i].im.abs() < 1e-12); // real even input
        }
        assert!(!spec.decay_warning);
    }

    #[test]
    fn analysis_of_zero_is_zero() {
        let m = LayeredMedium::homogeneous(1.0).unwrap();
        let grid = Grid::from_range(-4.0, 4.0, 64).unwrap();
        let u = SampledField::zeros(grid, 0.0);
        let spec = m
            .transform_analysis(&u, &Spectrum::symmetric_grid(4.0, 16))
            .unwrap();
        assert!(spec.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn fourier_round_trip_homogeneous() {
        for (speed, range) in [(1.0, 12.0), (2.0, 12.0)] {
            let m = LayeredMedium::homogeneous(speed).unwrap();
            let grid = Grid::from_range(-8.0, 8.0, 512).unwrap();
            let u = SampledField::from_fn(grid, 0.0, |x| (-x * x).exp()).unwrap();
            let lambdas = Spectrum::symmetric_grid(range * speed, 600);
            let spec = m.transform_analysis(&u, &lambdas).unwrap();
            let back = m
                .transform_synthesis(&spec, grid, m.default_weight())
                .unwrap();
            let worst = u
                .values
                .iter()
                .zip(&back.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(worst < 1e-6, "speed {speed}: {worst:e}");
        }
    }

    #[test]
    fn zero_spectrum_synthesizes_zero() {
        let m = LayeredMedium::homogeneous(1.0).unwrap();
        let grid = Grid::from_range(-4.0, 4.0, 64).unwrap();
        let lambdas = Spectrum::symmetric_grid(4.0, 16);
        let spec = Spectrum::new(lambdas, vec![Complex64::ZERO; 33]).unwrap();
        let f = m.transform_synthesis(&spec, grid, m.default_weight()).unwrap();
        assert_eq!(f.max_abs(), 0.0);
    }

    #[test]
    fn completeness_defect_homogeneous_is_identity() {
        let m = LayeredMedium::homogeneous(1.0).unwrap();
        let xs = [-2.0, -0.5, 0.0, 1.0, 2.5];
        let rep = m.completeness_defect(1e-3, &xs).unwrap();
        for e in &rep.entries {
            assert!((e.diagonal_mass - 1.0).abs() < 1e-3, "x = {}: {}", e.x, e.diagonal_mass);
            assert!(e.ghost_mass < 1e-3, "x = {}: {}", e.x, e.ghost_mass);
        }
        assert!(!rep.mismatch);
    }

    #[test]
    fn completeness_defect_two_layer_flags_mismatch() {
        let m = two_layer_ideal();
        let rep = m.completeness_defect(1e-3, &[-2.0, -1.0, 1.0, 2.0]).unwrap();
        assert!(rep.mismatch);
        for e in &rep.entries {
            assert!(e.diagonal_mass.is_finite() && e.ghost_mass.is_finite());
        }
        // Left layer sees 5/8 of the plane-wave diagonal mass with the
        // rightmost-layer weight normalization: 5/8 · (2π·weight) = 5/16.
        let left = rep.entries.iter().find(|e| e.x == -2.0).unwrap();
        assert!(close(left.diagonal_mass, 5.0 / 16.0, 5e-3), "{}", left.diagonal_mass);
        // Right layer diagonal is exact.
        let right = rep.entries.iter().find(|e| e.x == 2.0).unwrap();
        assert!(close(right.diagonal_mass, 1.0, 5e-3), "{}", right.diagonal_mass);
        // Ghost ridge along x = −ξ/2.
        assert!(left.ghost_mass > 0.1);
    }

    #[test]
    fn completeness_defect_smooths_with_larger_epsilon() {
        let m = two_layer_ideal();
        let rep = m.completeness_defect(0.1, &[-1.0, 1.0]).unwrap();
        for e in &rep.entries {
            assert!(e.diagonal_mass.is_finite() && e.ghost_mass.is_finite());
        }
    }
}
