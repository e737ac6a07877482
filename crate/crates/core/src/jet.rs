//! Truncated power-series ("jet") arithmetic in one variable over complex
//! coefficients.
//!
//! A jet of order J holds the coefficients c_0..c_J of a series in the
//! spectral parameter λ. A nonnegative `valuation` v records leading zero
//! coefficients that were factored out, so the jet represents
//! λ^v · Σ c_j λ^j. Valuation tracking is what lets the interface solver
//! divide by determinants that vanish to finite order at λ = 0 without
//! storing negative powers.
//!
//! All derivative-at-zero extractions used by the eigenfunction and basis
//! builders go through this module: ∂^j/∂λ^j f(λ)|_{λ=0} = j! · c_j.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Series order used when a configuration does not override it.
pub const DEFAULT_ORDER: usize = 24;

/// Relative threshold below which a leading coefficient counts as zero for
/// valuation detection and compatibility checks.
const VALUATION_RTOL: f64 = 1e-10;

/// Truncated Taylor series λ^v · (c_0 + c_1 λ + … + c_J λ^J).
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    order: usize,
    valuation: usize,
    coeffs: Vec<Complex64>,
}

impl Jet {
    /// Jet from raw coefficients (valuation 0). Rejects non-finite entries.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("jet needs at least c_0".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite jet coefficient".into()));
        }
        Ok(Jet {
            order: coeffs.len() - 1,
            valuation: 0,
            coeffs,
        })
    }

    /// Constant jet c + 0·λ + … of the given order.
    pub fn constant(order: usize, c: Complex64) -> Self {
        let mut coeffs = vec![Complex64::ZERO; order + 1];
        coeffs[0] = c;
        Jet {
            order,
            valuation: 0,
            coeffs,
        }
    }

    pub fn from_real(order: usize, x: f64) -> Self {
        Self::constant(order, Complex64::new(x, 0.0))
    }

    pub fn zero(order: usize) -> Self {
        Jet {
            order,
            valuation: 0,
            coeffs: vec![Complex64::ZERO; order + 1],
        }
    }

    /// The series λ itself.
    pub fn lambda(order: usize) -> Self {
        let mut coeffs = vec![Complex64::ZERO; order + 1];
        if order >= 1 {
            coeffs[1] = Complex64::ONE;
        }
        Jet {
            order,
            valuation: 0,
            coeffs,
        }
    }

    /// c·λ stored with valuation 1, i.e. the factor λ is tracked rather than
    /// spent as a coefficient slot. Used for interface rows built from pure
    /// derivative conditions.
    pub fn linear_factored(order: usize, c: Complex64) -> Self {
        let mut coeffs = vec![Complex64::ZERO; order + 1];
        coeffs[0] = c;
        Jet {
            order,
            valuation: 1,
            coeffs,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn valuation(&self) -> usize {
        self.valuation
    }

    /// Stored coefficient c_j (relative to the factored form). For jets with
    /// valuation 0 this is the coefficient of λ^j.
    pub fn coeff(&self, j: usize) -> Complex64 {
        self.coeffs.get(j).copied().unwrap_or(Complex64::ZERO)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Evaluate the represented series at λ (Horner, then λ^valuation).
    pub fn eval(&self, lambda: Complex64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for c in self.coeffs.iter().rev() {
            acc = acc * lambda + c;
        }
        acc * lambda.powu(self.valuation as u32)
    }

    /// Same jet truncated to a lower order.
    pub fn truncated(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Jet {
            order,
            valuation: self.valuation,
            coeffs: self.coeffs[..=order].to_vec(),
        }
    }

    /// Fold the tracked valuation into the coefficient array (valuation 0).
    /// Coefficients shifted past the order are dropped.
    pub fn normalized(&self) -> Self {
        if self.valuation == 0 {
            return self.clone();
        }
        let mut coeffs = vec![Complex64::ZERO; self.order + 1];
        for j in 0..=self.order {
            if j + self.valuation <= self.order {
                coeffs[j + self.valuation] = self.coeffs[j];
            }
        }
        Jet {
            order: self.order,
            valuation: 0,
            coeffs,
        }
    }

    fn check_order(&self, rhs: &Jet) -> Result<()> {
        if self.order != rhs.order {
            return Err(Error::OrderMismatch {
                left: self.order,
                right: rhs.order,
            });
        }
        Ok(())
    }

    /// Cauchy product truncated at the common order; valuations add.
    pub fn mul(&self, rhs: &Jet) -> Result<Jet> {
        self.check_order(rhs)?;
        let n = self.order;
        let mut coeffs = vec![Complex64::ZERO; n + 1];
        for i in 0..=n {
            if self.coeffs[i] == Complex64::ZERO {
                continue;
            }
            for j in 0..=(n - i) {
                coeffs[i + j] += self.coeffs[i] * rhs.coeffs[j];
            }
        }
        Ok(Jet {
            order: n,
            valuation: self.valuation + rhs.valuation,
            coeffs,
        })
    }

    /// Sum; the operand with higher valuation is realigned to the lower one.
    pub fn add(&self, rhs: &Jet) -> Result<Jet> {
        self.check_order(rhs)?;
        let v = self.valuation.min(rhs.valuation);
        let a = self.realigned(v);
        let b = rhs.realigned(v);
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| x + y)
            .collect();
        Ok(Jet {
            order: self.order,
            valuation: v,
            coeffs,
        })
    }

    pub fn sub(&self, rhs: &Jet) -> Result<Jet> {
        self.add(&rhs.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Jet {
        Jet {
            order: self.order,
            valuation: self.valuation,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// Representation of the same series with the given (smaller or equal)
    /// valuation; excess factored zeros move back into the coefficients.
    fn realigned(&self, v: usize) -> Jet {
        debug_assert!(v <= self.valuation);
        let shift = self.valuation - v;
        if shift == 0 {
            return self.clone();
        }
        let mut coeffs = vec![Complex64::ZERO; self.order + 1];
        for j in 0..=self.order {
            if j + shift <= self.order {
                coeffs[j + shift] = self.coeffs[j];
            }
        }
        Jet {
            order: self.order,
            valuation: v,
            coeffs,
        }
    }

    /// Series exponential via the standard recurrence
    /// e_n = (1/n) Σ_{k=1..n} k a_k e_{n−k}, scaled by exp(a_0).
    pub fn exp(&self) -> Result<Jet> {
        if self.valuation != 0 {
            return Err(Error::InvalidArgument(
                "jet exp requires valuation 0".into(),
            ));
        }
        let n = self.order;
        let mut out = vec![Complex64::ZERO; n + 1];
        out[0] = self.coeffs[0].exp();
        for m in 1..=n {
            let mut acc = Complex64::ZERO;
            for k in 1..=m {
                acc += self.coeffs[k] * out[m - k] * (k as f64);
            }
            out[m] = acc / (m as f64);
        }
        Jet::from_coeffs(out)
    }

    /// Index of the first coefficient that is non-negligible relative to the
    /// largest one, or None if the jet is (numerically) identically zero.
    fn leading_index(&self) -> Option<usize> {
        let scale = self.max_abs();
        if scale == 0.0 {
            return None;
        }
        self.coeffs
            .iter()
            .position(|c| c.norm() > VALUATION_RTOL * scale)
    }

    /// Valuation of the represented series, counting numerically-zero
    /// leading coefficients. None when identically zero through the order.
    pub fn effective_valuation(&self) -> Option<usize> {
        self.leading_index().map(|i| i + self.valuation)
    }
}

/// Coefficient-wise quotient of power series with d_0 != 0.
fn series_div(num: &[Complex64], den: &[Complex64]) -> Vec<Complex64> {
    let n = num.len();
    let mut q = vec![Complex64::ZERO; n];
    for j in 0..n {
        let mut acc = num[j];
        for i in 1..=j {
            acc -= den[i] * q[j - i];
        }
        q[j] = acc / den[0];
    }
    q
}

/// Solve M·x = rhs for 2×2 systems of jets whose determinant may vanish to
/// finite order at λ = 0.
///
/// The determinant's effective valuation v_d is located first; every Cramer
/// numerator must vanish at least as fast, otherwise the system has no
/// series solution (this is how an inadmissible coupling-coefficient set
/// shows up). Both sides are shifted down by λ^{v_d} and divided. Returned
/// jets always carry valuation 0.
pub fn laurent_solve_2x2(m: &[[Jet; 2]; 2], rhs: &[Jet; 2]) -> Result<[Jet; 2]> {
    let order = m[0][0].order();
    for row in m {
        for e in row {
            if e.order() != order {
                return Err(Error::OrderMismatch {
                    left: order,
                    right: e.order(),
                });
            }
        }
    }
    for e in rhs {
        if e.order() != order {
            return Err(Error::OrderMismatch {
                left: order,
                right: e.order(),
            });
        }
    }

    let det = m[0][0].mul(&m[1][1])?.sub(&m[0][1].mul(&m[1][0])?)?;
    let num0 = rhs[0].mul(&m[1][1])?.sub(&rhs[1].mul(&m[0][1])?)?;
    let num1 = m[0][0].mul(&rhs[1])?.sub(&m[1][0].mul(&rhs[0])?)?;

    let Some(lead) = det.leading_index() else {
        // Determinant vanishes through the truncation order. If some
        // numerator does not, the equations contradict each other;
        // otherwise the system is underdetermined.
        if num0.effective_valuation().is_some() || num1.effective_valuation().is_some() {
            return Err(Error::IncompatibleSystem { interface: None });
        }
        return Err(Error::SingularSystem {
            interface: None,
            lambda: None,
        });
    };
    let v_d = det.valuation() + lead;

    // Drop the factored λ^{v_d} from the determinant coefficients.
    let den: Vec<Complex64> = det.coeffs()[lead..].to_vec();

    let solve_one = |num: &Jet| -> Result<Jet> {
        let scale = num.max_abs();
        if scale == 0.0 {
            return Ok(Jet::zero(order));
        }
        let sv = num.valuation();
        // Coefficients of num/λ^{v_d}, as a series with valuation sv-v_d
        // (folded into the coefficients below when positive).
        let (shifted, res_val) = if sv >= v_d {
            (num.coeffs().to_vec(), sv - v_d)
        } else {
            let drop = v_d - sv;
            if num.coeffs()[..drop.min(num.coeffs().len())]
                .iter()
                .any(|c| c.norm() > VALUATION_RTOL * scale)
            {
                return Err(Error::IncompatibleSystem { interface: None });
            }
            (num.coeffs()[drop.min(num.coeffs().len())..].to_vec(), 0)
        };
        let mut q = series_div(&shifted, &den[..shifted.len().min(den.len())]);
        q.resize(order + 1, Complex64::ZERO);
        if res_val > 0 {
            let mut folded = vec![Complex64::ZERO; order + 1];
            for (j, c) in q.iter().enumerate() {
                if j + res_val <= order {
                    folded[j + res_val] = *c;
                }
            }
            q = folded;
        }
        Jet::from_coeffs(q)
    };

    Ok([solve_one(&num0)?, solve_one(&num1)?])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn jet(vals: &[f64]) -> Jet {
        Jet::from_coeffs(vals.iter().map(|&v| re(v)).collect()).unwrap()
    }

    fn assert_coeffs(j: &Jet, expect: &[f64], tol: f64) {
        let n = j.normalized();
        for (i, &e) in expect.iter().enumerate() {
            assert!(
                (n.coeff(i) - re(e)).norm() <= tol,
                "coeff {i}: got {:?}, want {e}",
                n.coeff(i)
            );
        }
    }

    #[test]
    fn mul_difference_of_squares() {
        // (1 + λ)(1 − λ) = 1 − λ² at J=2
        let a = jet(&[1.0, 1.0, 0.0]);
        let b = jet(&[1.0, -1.0, 0.0]);
        assert_coeffs(&a.mul(&b).unwrap(), &[1.0, 0.0, -1.0], 0.0);
    }

    #[test]
    fn mul_identity() {
        let one = Jet::from_real(3, 1.0);
        let b = jet(&[0.3, -0.7, 2.0, 0.25]);
        assert_eq!(one.mul(&b).unwrap(), b);
    }

    #[test]
    fn mul_valuation_factors() {
        // (λ + λ²)·λ = λ² + λ³, with λ tracked as a valuation-1 factor.
        let a = Jet {
            order: 3,
            valuation: 1,
            coeffs: vec![re(1.0), re(1.0), re(0.0), re(0.0)],
        };
        let b = Jet::linear_factored(3, re(1.0));
        let p = a.mul(&b).unwrap();
        assert_eq!(p.valuation(), 2);
        assert_coeffs(&p, &[0.0, 0.0, 1.0, 1.0], 0.0);
    }

    #[test]
    fn mul_order_mismatch() {
        let a = Jet::from_real(2, 1.0);
        let b = Jet::from_real(3, 1.0);
        assert!(matches!(
            a.mul(&b),
            Err(Error::OrderMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn exp_of_lambda() {
        let e = Jet::lambda(3).exp().unwrap();
        assert_coeffs(&e, &[1.0, 1.0, 0.5, 1.0 / 6.0], 1e-15);
    }

    #[test]
    fn exp_of_zero() {
        let e = Jet::zero(4).exp().unwrap();
        assert_coeffs(&e, &[1.0, 0.0, 0.0, 0.0, 0.0], 0.0);
    }

    #[test]
    fn exp_of_tau_lambda_squared() {
        // exp(0.1·λ²) at J=4 → 1 + 0.1λ² + 0.005λ⁴
        let a = jet(&[0.0, 0.0, 0.1, 0.0, 0.0]);
        assert_coeffs(&a.exp().unwrap(), &[1.0, 0.0, 0.1, 0.0, 0.005], 1e-16);
    }

    #[test]
    fn exp_rejects_factored_valuation() {
        let a = Jet::linear_factored(3, re(1.0));
        assert!(a.exp().is_err());
    }

    #[test]
    fn laurent_solve_hand_elimination() {
        // M = [[1, 1], [λ, −λ]], rhs = [1, 2λ]: det = −2λ, x = [1.5, −0.5].
        let n = 4;
        let m = [
            [Jet::from_real(n, 1.0), Jet::from_real(n, 1.0)],
            [
                Jet::linear_factored(n, re(1.0)),
                Jet::linear_factored(n, re(-1.0)),
            ],
        ];
        let rhs = [Jet::from_real(n, 1.0), Jet::linear_factored(n, re(2.0))];
        let x = laurent_solve_2x2(&m, &rhs).unwrap();
        assert_eq!(x[0].valuation(), 0);
        assert_coeffs(&x[0], &[1.5, 0.0, 0.0], 1e-15);
        assert_coeffs(&x[1], &[-0.5, 0.0, 0.0], 1e-15);
    }

    #[test]
    fn laurent_solve_identity() {
        let n = 3;
        let m = [
            [Jet::from_real(n, 1.0), Jet::zero(n)],
            [Jet::zero(n), Jet::from_real(n, 1.0)],
        ];
        let rhs = [jet(&[0.2, 1.0, -0.5, 0.0]), jet(&[4.0, 0.0, 0.0, 1.0])];
        let x = laurent_solve_2x2(&m, &rhs).unwrap();
        assert_eq!(x[0], rhs[0]);
        assert_eq!(x[1], rhs[1]);
    }

    #[test]
    fn laurent_solve_rank_deficient_is_incompatible() {
        let n = 3;
        let one = || Jet::from_real(n, 1.0);
        let m = [[one(), one()], [one(), one()]];
        let rhs = [Jet::from_real(n, 1.0), Jet::zero(n)];
        assert!(matches!(
            laurent_solve_2x2(&m, &rhs),
            Err(Error::IncompatibleSystem { .. })
        ));
    }

    #[test]
    fn laurent_solve_zero_rhs_singular() {
        let n = 3;
        let one = || Jet::from_real(n, 1.0);
        let m = [[one(), one()], [one(), one()]];
        let rhs = [Jet::zero(n), Jet::zero(n)];
        assert!(matches!(
            laurent_solve_2x2(&m, &rhs),
            Err(Error::SingularSystem { .. })
        ));
    }

    #[test]
    fn eval_matches_horner_with_valuation() {
        let a = Jet::linear_factored(3, re(2.0)); // 2λ
        let l = Complex64::new(0.3, 0.1);
        assert!((a.eval(l) - re(2.0) * l).norm() < 1e-15);
    }
}
