//! Bessel kernel and its exponential change of variables.

use super::Kernel;
use crate::error::{Error, Result};
use crate::params::digamma_one_plus;
use crate::specfun::{bessel_j_pair, BESSEL_NU_MAX};

/// K^Bessel_nu(x, y) = [J_nu(a) b J'_nu(b) - a J'_nu(a) J_nu(b)] / (2 (x - y)),
/// a = sqrt(x), b = sqrt(y), written with J_{nu+1} in place of J'_nu; the
/// diagonal is (1/4)[J_nu^2 - (2 nu / a) J_nu J_{nu+1} + J_{nu+1}^2].
pub fn bessel_kernel(nu: f64, x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::invalid(format!("Bessel kernel needs x, y > 0, got ({x}, {y})")));
    }
    if (x - y).abs() < 1e-7 * (x + y) {
        let a = (0.5 * (x + y)).sqrt();
        let (j, j1) = bessel_j_pair(nu, a)?;
        return Ok(0.25 * (j * j - 2.0 * nu / a * j * j1 + j1 * j1));
    }
    let (a, b) = (x.sqrt(), y.sqrt());
    let (ja, ja1) = bessel_j_pair(nu, a)?;
    let (jb, jb1) = bessel_j_pair(nu, b)?;
    Ok((a * ja1 * jb - b * ja * jb1) / (2.0 * (x - y)))
}

pub struct BesselKernel {
    nu: f64,
}

impl BesselKernel {
    pub fn new(nu: f64) -> Result<Self> {
        if !(0.0..=BESSEL_NU_MAX).contains(&nu) {
            return Err(Error::OutOfRange {
                what: "bessel order",
                value: nu,
                lo: 0.0,
                hi: BESSEL_NU_MAX,
            });
        }
        Ok(Self { nu })
    }
}

impl Kernel for BesselKernel {
    fn name(&self) -> &'static str {
        "bessel"
    }

    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        bessel_kernel(self.nu, x, y)
    }

    fn symmetric(&self) -> bool {
        true
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "nu": self.nu })
    }
}

/// L(x, y) = 4 e^{-(x+y)/2} K^Bessel_{2 beta + 1}(4 e^{-x}, 4 e^{-y}). This is
/// the linear-parameter hard-edge kernel moved left by delta = 2 psi(1 + beta),
/// so det(I - L) on (xi, inf) gives U_beta(xi).
pub struct HardEdgeBessel {
    beta: f64,
    nu: f64,
}

impl HardEdgeBessel {
    pub fn new(beta: f64) -> Result<Self> {
        let nu = 2.0 * beta + 1.0;
        if !(beta > -1.0) || nu > BESSEL_NU_MAX {
            return Err(Error::OutOfRange {
                what: "beta",
                value: beta,
                lo: -1.0,
                hi: 0.5 * (BESSEL_NU_MAX - 1.0),
            });
        }
        Ok(Self { beta, nu })
    }

    /// delta = 2 psi(1 + beta), the shift between the two coordinate systems.
    pub fn delta(&self) -> f64 {
        2.0 * digamma_one_plus(self.beta)
    }
}

impl Kernel for HardEdgeBessel {
    fn name(&self) -> &'static str {
        "hard-edge-bessel"
    }

    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        Ok(4.0 * (-(x + y) / 2.0).exp() * bessel_kernel(self.nu, 4.0 * (-x).exp(), 4.0 * (-y).exp())?)
    }

    fn eval_grid(&self, xs: &[f64], ys: &[f64]) -> Result<nalgebra::DMatrix<f64>> {
        let pairs = |v: &[f64]| -> Result<Vec<(f64, f64, f64)>> {
            v.iter()
                .map(|&x| {
                    let a = 2.0 * (-x / 2.0).exp();
                    let (j, j1) = bessel_j_pair(self.nu, a)?;
                    Ok((a, j, j1))
                })
                .collect()
        };
        let (px, py) = (pairs(xs)?, pairs(ys)?);
        let mut m = nalgebra::DMatrix::zeros(xs.len(), ys.len());
        for (i, &(a, ja, ja1)) in px.iter().enumerate() {
            for (j, &(b, jb, jb1)) in py.iter().enumerate() {
                let (u, v) = (a * a, b * b);
                m[(i, j)] = if (u - v).abs() < 1e-7 * (u + v) {
                    self.eval(xs[i], ys[j])?
                } else {
                    a * b * (a * ja1 * jb - b * ja * jb1) / (2.0 * (u - v))
                };
            }
        }
        Ok(m)
    }

    fn symmetric(&self) -> bool {
        true
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "beta": self.beta, "nu": self.nu, "delta": self.delta() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn symmetric_and_domain() {
        let (a, b) = (
            bessel_kernel(1.3, 0.7, 2.9).unwrap(),
            bessel_kernel(1.3, 2.9, 0.7).unwrap(),
        );
        assert!((a - b).abs() < 1e-15);
        assert!(bessel_kernel(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn diagonal_against_richardson() {
        let (nu, x, h) = (1.0, 2.0, 1e-4);
        let k1 = bessel_kernel(nu, x, x + h).unwrap();
        let k2 = bessel_kernel(nu, x, x + h / 2.0).unwrap();
        let extrap = 2.0 * k2 - k1;
        assert!((extrap - bessel_kernel(nu, x, x).unwrap()).abs() < 1e-7);
    }

    #[test]
    fn half_order_closed_form() {
        // J_{1/2}(a) = sqrt(2/(pi a)) sin a, J_{3/2}(a) = sqrt(2/(pi a)) (sin a / a - cos a)
        let j = |a: f64| (2.0 / (PI * a)).sqrt() * a.sin();
        let j1 = |a: f64| (2.0 / (PI * a)).sqrt() * (a.sin() / a - a.cos());
        let (x, y) = (1.7f64, 4.2f64);
        let (a, b) = (x.sqrt(), y.sqrt());
        let want = (a * j1(a) * j(b) - b * j(a) * j1(b)) / (2.0 * (x - y));
        assert!((bessel_kernel(0.5, x, y).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn transformed_grid_matches_pointwise() {
        let k = HardEdgeBessel::new(1.5).unwrap();
        let xs = [-2.0, -0.3, 0.0, 1.7];
        let g = k.eval_grid(&xs, &xs).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            for (j, &y) in xs.iter().enumerate() {
                let p = k.eval(x, y).unwrap();
                assert!((g[(i, j)] - p).abs() < 1e-14 * (1.0 + p.abs()));
            }
        }
    }
}
