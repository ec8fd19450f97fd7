//! Airy kernel, extended Airy kernel and the cubic double contour integral
//! they come from.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::contour::{scan_radius, ContourSpec, DoubleContour};
use super::Kernel;
use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use crate::specfun::{airy, airy_pair, AIRY_RANGE};

const PANEL: f64 = 0.5;
const LOG_TAIL: f64 = -37.0;

/// Static Airy kernel (Ai(x) Ai'(y) - Ai'(x) Ai(y)) / (x - y), with the
/// diagonal Ai'(x)^2 - x Ai(x)^2.
pub fn airy_kernel(x: f64, y: f64) -> Result<f64> {
    if (x - y).abs() < 1e-6 {
        let m = 0.5 * (x + y);
        let (a, ap) = airy_pair_tail(m)?;
        return Ok(ap * ap - m * a * a);
    }
    let (ax, apx) = airy_pair_tail(x)?;
    let (ay, apy) = airy_pair_tail(y)?;
    Ok((ax * apy - apx * ay) / (x - y))
}

/// Ai and Ai', with both set to 0 past the range where they underflow.
fn airy_pair_tail(x: f64) -> Result<(f64, f64)> {
    if x > AIRY_RANGE.1 {
        Ok((0.0, 0.0))
    } else {
        airy_pair(x)
    }
}

/// Upper bound of log |Ai(x)|.
fn log_ai_bound(x: f64) -> f64 {
    if x > 1.0 {
        -2.0 / 3.0 * x.powf(1.5) - (2.0 * PI.sqrt()).ln() - 0.25 * x.ln()
    } else {
        0.0
    }
}

/// int_0^inf e^{c l} Ai(xi + l) Ai(eta + l) dl, cut where the integrand
/// bound has fallen below e^{-37} and keeps falling.
pub fn ai_product_integral(c: f64, xi: f64, eta: f64) -> Result<f64> {
    let lo = xi.min(eta);
    if lo < AIRY_RANGE.0 {
        return Err(Error::OutOfRange {
            what: "airy argument",
            value: lo,
            lo: AIRY_RANGE.0,
            hi: AIRY_RANGE.1,
        });
    }
    let mut end = 0.0;
    loop {
        let m = lo + end;
        if m > 1.0 && c < 2.0 * m.sqrt() && c * end + log_ai_bound(xi + end) + log_ai_bound(eta + end) < LOG_TAIL {
            break;
        }
        end += PANEL;
        if xi.max(eta) + end > AIRY_RANGE.1 {
            return Err(Error::NonConvergence(format!(
                "Airy product integral with c = {c} does not decay"
            )));
        }
    }
    let rule = GaussLegendre::new(16);
    let panels = (end / PANEL).round() as usize;
    let mut err = None;
    let v = rule.integrate_uniform(0.0, end, panels.max(1), |l| match (airy(xi + l), airy(eta + l)) {
        (Ok(a), Ok(b)) => (c * l).exp() * a * b,
        (Err(e), _) | (_, Err(e)) => {
            err.get_or_insert(e);
            0.0
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Closed form of int_R e^{c l} Ai(xi + l) Ai(eta + l) dl for c > 0:
/// (4 pi c)^{-1/2} exp(c^3/12 - c (xi + eta)/2 - (xi - eta)^2 / (4c)).
pub fn okounkov(c: f64, xi: f64, eta: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::invalid(format!("need c > 0, got {c}")));
    }
    let e = c.powi(3) / 12.0 - c * (xi + eta) / 2.0 - (xi - eta).powi(2) / (4.0 * c);
    Ok(e.exp() / (4.0 * PI * c).sqrt())
}

/// int_{-L}^0 e^{c l} Ai(xi + l) Ai(eta + l) dl with L as large as the Airy
/// range allows; fails when the neglected tail may exceed `tol`.
fn negative_half(c: f64, xi: f64, eta: f64, tol: f64) -> Result<f64> {
    let len = xi.min(eta) - AIRY_RANGE.0;
    // |Ai Ai| <= 0.3 on the negative axis
    if !(c > 0.0) || 0.3 * (-c * len).exp() / c > tol {
        return Err(Error::NonConvergence(format!(
            "tail of the negative half-line integral with c = {c} exceeds {tol:e}"
        )));
    }
    let rule = GaussLegendre::new(16);
    let panels = (len / PANEL).ceil().max(1.0) as usize;
    Ok(rule.integrate_uniform(-len, 0.0, panels, |l| {
        (c * l).exp() * airy(xi + l).unwrap_or(0.0) * airy(eta + l).unwrap_or(0.0)
    }))
}

/// int_R e^{c l} Ai(xi + l) Ai(eta + l) dl by direct quadrature.
pub fn okounkov_quadrature(c: f64, xi: f64, eta: f64) -> Result<f64> {
    Ok(negative_half(c, xi, eta, 1e-8)? + ai_product_integral(c, xi, eta)?)
}

/// Extended Airy kernel: int_0^inf e^{-l (tau - sigma)} Ai Ai for tau >= sigma,
/// otherwise -int_{-inf}^0 of the same integrand, evaluated as the
/// half-line integral minus the Gaussian closed form.
pub fn extended_airy(tau: f64, xi: f64, sigma: f64, eta: f64) -> Result<f64> {
    let c = sigma - tau;
    if tau >= sigma {
        ai_product_integral(c, xi, eta)
    } else {
        Ok(ai_product_integral(c, xi, eta)? - okounkov(c, xi, eta)?)
    }
}

/// Extended Airy kernel with tau < sigma by direct quadrature over the
/// negative half-line.
pub fn extended_airy_direct(tau: f64, xi: f64, sigma: f64, eta: f64) -> Result<f64> {
    if tau >= sigma {
        ai_product_integral(sigma - tau, xi, eta)
    } else {
        Ok(-negative_half(sigma - tau, xi, eta, 1e-8)?)
    }
}

/// e^{-tau^3/3 + sigma^3/3 - sigma eta + tau xi}.
pub fn gauge_factor(tau: f64, xi: f64, sigma: f64, eta: f64) -> f64 {
    (-tau.powi(3) / 3.0 + sigma.powi(3) / 3.0 - sigma * eta + tau * xi).exp()
}

/// (1 / (2 pi i)^2) int dw int dz e^{-xi z - eta w - tau z^2 + sigma w^2 + z^3/3 + w^3/3} / (z + w).
pub fn cubic_double_contour(tau: f64, xi: f64, sigma: f64, eta: f64) -> Result<f64> {
    let shift = 0.25;
    let a = move |z: Complex64| -tau * z * z + z * z * z / 3.0;
    let b = move |w: Complex64| sigma * w * w + w * w * w / 3.0;
    let ua = scan_radius(shift, 2.0, |z| Ok((-xi * z + a(z)).re))?;
    let ub = scan_radius(0.0, 2.0, |w| Ok((-eta * w + b(w)).re))?;
    let spec = ContourSpec::new(ua.max(ub), 48, 16, shift)?;
    DoubleContour::new(&spec, |z| Ok(a(z)), |w| Ok(b(w)))?.eval(xi, eta)
}

/// e^{2 (sigma^3 - tau^3)/3 + sigma eta - xi tau} int_0^inf e^{(sigma - tau) l}
/// Ai(xi + tau^2 + l) Ai(eta + sigma^2 + l) dl.
pub fn cubic_rhs(tau: f64, xi: f64, sigma: f64, eta: f64) -> Result<f64> {
    let pre = 2.0 * (sigma.powi(3) - tau.powi(3)) / 3.0 + sigma * eta - xi * tau;
    Ok(pre.exp() * ai_product_integral(sigma - tau, xi + tau * tau, eta + sigma * sigma)?)
}

pub struct AiryKernel;

impl Kernel for AiryKernel {
    fn name(&self) -> &'static str {
        "airy"
    }

    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        airy_kernel(x, y)
    }

    fn eval_grid(&self, xs: &[f64], ys: &[f64]) -> Result<nalgebra::DMatrix<f64>> {
        let px = xs.iter().map(|&x| airy_pair_tail(x)).collect::<Result<Vec<_>>>()?;
        let py = ys.iter().map(|&y| airy_pair_tail(y)).collect::<Result<Vec<_>>>()?;
        let mut m = nalgebra::DMatrix::zeros(xs.len(), ys.len());
        for (i, (&x, &(ax, apx))) in xs.iter().zip(&px).enumerate() {
            for (j, (&y, &(ay, apy))) in ys.iter().zip(&py).enumerate() {
                m[(i, j)] = if (x - y).abs() < 1e-6 {
                    airy_kernel(x, y)?
                } else {
                    (ax * apy - apx * ay) / (x - y)
                };
            }
        }
        Ok(m)
    }

    fn symmetric(&self) -> bool {
        true
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "diagonal_window": 1e-6 })
    }
}

pub struct ExtendedAiryKernel {
    tau: f64,
    sigma: f64,
}

impl ExtendedAiryKernel {
    pub fn new(tau: f64, sigma: f64) -> Self {
        Self { tau, sigma }
    }
}

impl Kernel for ExtendedAiryKernel {
    fn name(&self) -> &'static str {
        "extended-airy"
    }

    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        extended_airy(self.tau, x, self.sigma, y)
    }

    fn symmetric(&self) -> bool {
        self.tau == self.sigma
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "tau": self.tau, "sigma": self.sigma, "log_tail": LOG_TAIL })
    }
}
