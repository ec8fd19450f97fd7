//! Quadrature on the contour Gamma = -Gamma_- + Gamma_+ (rays t e^{+-i pi/4})
//! and the double integrals
//!
//!   (1 / (2 pi i)^2) int dw int dz e^{-x z - y w} / (z + w) A(z) B(w),
//!
//! with the z-contour moved right by the origin shift so that z + w never
//! vanishes.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;

/// e^{-u} at this radius is below 1e-16.
pub const MIN_DECAY_RADIUS: f64 = 36.85;

/// Log-modulus an integrand must fall under before the rays are cut.
pub const CUTOFF_LOG: f64 = -37.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourSpec {
    /// Truncation radius on each ray.
    pub u_max: f64,
    /// Panels per ray; a quarter of them (at least one) are graded
    /// geometrically toward the origin on [0, 1].
    pub panels: usize,
    pub nodes_per_panel: usize,
    /// Rightward shift of the z-contour.
    pub origin_shift: f64,
}

impl ContourSpec {
    pub fn new(u_max: f64, panels: usize, nodes_per_panel: usize, origin_shift: f64) -> Result<Self> {
        let spec = Self {
            u_max,
            panels,
            nodes_per_panel,
            origin_shift,
        };
        spec.validate(f64::INFINITY)?;
        Ok(spec)
    }

    /// Checks the shape and that the shift stays left of the first pole t_1.
    pub fn validate(&self, t1: f64) -> Result<()> {
        if !(self.u_max > 1.0 && self.u_max.is_finite()) {
            return Err(Error::invalid(format!(
                "contour u_max must exceed 1, got {}",
                self.u_max
            )));
        }
        if self.panels < 2 || self.nodes_per_panel < 2 {
            return Err(Error::invalid("contour needs at least 2 panels of 2 nodes"));
        }
        if !(self.origin_shift >= 0.0 && self.origin_shift < t1) {
            return Err(Error::invalid(format!(
                "origin shift {} must lie in [0, t_1 = {t1})",
                self.origin_shift
            )));
        }
        Ok(())
    }

    /// Same contour with twice the panels.
    pub fn refined(&self) -> Self {
        Self {
            panels: 2 * self.panels,
            ..*self
        }
    }

    /// Default shift for a sequence whose first pole is t_1.
    pub fn default_shift(t1: f64) -> f64 {
        (0.5 * t1).min(0.25)
    }

    fn graded_panels(&self) -> usize {
        (self.panels / 4).max(1)
    }

    /// Nodes and weights on [0, u_max].
    pub fn ray_rule(&self) -> (Vec<f64>, Vec<f64>) {
        let g = self.graded_panels();
        let mut breaks: Vec<f64> = vec![0.0];
        breaks.extend((0..g).rev().map(|k| 0.5f64.powi(k as i32)));
        let rest = self.panels - g;
        let top = breaks[breaks.len() - 1];
        for k in 1..=rest {
            breaks.push(top + (self.u_max - top) * k as f64 / rest as f64);
        }
        let rule = GaussLegendre::new(self.nodes_per_panel);
        let mut nodes = Vec::with_capacity(self.panels * self.nodes_per_panel);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for p in breaks.windows(2) {
            for (u, w) in rule.mapped(p[0], p[1]) {
                nodes.push(u);
                weights.push(w);
            }
        }
        (nodes, weights)
    }

    /// Points of Gamma shifted by `shift`, each with its oriented weight dz.
    pub fn contour_points(&self, shift: f64) -> Vec<(Complex64, Complex64)> {
        let (u, w) = self.ray_rule();
        let up = Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        let down = up.conj();
        let mut out = Vec::with_capacity(2 * u.len());
        for (&u, &w) in u.iter().zip(&w) {
            out.push((shift + u * up, w * up));
            out.push((shift + u * down, -w * down));
        }
        out
    }
}

/// (1 / 2 pi i) int_Gamma e^{f(z)} dz on the shifted contour.
pub fn single_contour<F>(spec: &ContourSpec, shift: f64, f: F) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut sum = Complex64::new(0.0, 0.0);
    for (z, dz) in spec.contour_points(shift) {
        sum += dz * f(z)?.exp();
    }
    Ok(sum / Complex64::new(0.0, 2.0 * PI))
}

/// Smallest radius beyond which `log_mod(u e^{+-i pi/4})` stays below the
/// cutoff, found by a forward scan and confirmed out to twice that radius.
pub fn scan_radius<F>(shift: f64, floor: f64, log_mod: F) -> Result<f64>
where
    F: Fn(Complex64) -> Result<f64>,
{
    let up = Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
    let worst = |u: f64| -> Result<f64> { Ok(log_mod(shift + u * up)?.max(log_mod(shift + u * up.conj())?)) };
    let step = 0.25;
    let mut u = step;
    let mut last_bad = 0.0;
    while u < 4000.0 {
        if worst(u)? >= CUTOFF_LOG {
            last_bad = u;
        } else if u > 2.0 * last_bad + 1.0 {
            return Ok((last_bad + step).max(floor));
        }
        u += step * (1.0 + u / 16.0).floor();
    }
    Err(Error::NonConvergence(
        "integrand does not decay on the contour rays before u = 4000".into(),
    ))
}

/// Nodes of the double integral with the integrand factors folded in.
pub struct DoubleContour {
    z: Vec<Complex64>,
    /// dz * A(z), kept as (log |.|, phase) via the complex log.
    za: Vec<Complex64>,
    w: Vec<Complex64>,
    wb: Vec<Complex64>,
    cauchy: DMatrix<Complex64>,
}

impl DoubleContour {
    /// `log_a` and `log_b` give log A(z), log B(w); the z-contour is shifted
    /// by `spec.origin_shift`, the w-contour is not.
    pub fn new<FA, FB>(spec: &ContourSpec, log_a: FA, log_b: FB) -> Result<Self>
    where
        FA: Fn(Complex64) -> Result<Complex64>,
        FB: Fn(Complex64) -> Result<Complex64>,
    {
        let zs = spec.contour_points(spec.origin_shift);
        let ws = spec.contour_points(0.0);
        let mut z = Vec::with_capacity(zs.len());
        let mut za = Vec::with_capacity(zs.len());
        for (p, dz) in zs {
            z.push(p);
            za.push(dz.ln() + log_a(p)?);
        }
        let mut w = Vec::with_capacity(ws.len());
        let mut wb = Vec::with_capacity(ws.len());
        for (q, dw) in ws {
            w.push(q);
            wb.push(dw.ln() + log_b(q)?);
        }
        let cauchy = DMatrix::from_fn(z.len(), w.len(), |p, q| 1.0 / (z[p] + w[q]));
        Ok(Self { z, za, w, wb, cauchy })
    }

    pub fn nodes(&self) -> usize {
        self.z.len()
    }

    fn left(&self, xs: &[f64]) -> DMatrix<Complex64> {
        DMatrix::from_fn(xs.len(), self.z.len(), |i, p| (self.za[p] - xs[i] * self.z[p]).exp())
    }

    fn right(&self, ys: &[f64]) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.w.len(), ys.len(), |q, j| (self.wb[q] - ys[j] * self.w[q]).exp())
    }

    /// Complex value of the double integral, before taking the real part.
    pub fn eval_complex(&self, x: f64, y: f64) -> Complex64 {
        let b: Vec<Complex64> = (0..self.w.len()).map(|q| (self.wb[q] - y * self.w[q]).exp()).collect();
        let mut total = Complex64::new(0.0, 0.0);
        for p in 0..self.z.len() {
            let a = (self.za[p] - x * self.z[p]).exp();
            let row = self.cauchy.row(p);
            let mut inner = Complex64::new(0.0, 0.0);
            for (c, bq) in row.iter().zip(&b) {
                inner += c * bq;
            }
            total += a * inner;
        }
        total * (-1.0 / (4.0 * PI * PI))
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        real_part(self.eval_complex(x, y))
    }

    pub fn eval_grid(&self, xs: &[f64], ys: &[f64]) -> Result<DMatrix<f64>> {
        let inner = &self.cauchy * self.right(ys);
        let full = self.left(xs) * inner * Complex64::new(-1.0 / (4.0 * PI * PI), 0.0);
        let mut out = DMatrix::zeros(xs.len(), ys.len());
        for (o, v) in out.iter_mut().zip(full.iter()) {
            *o = real_part(*v)?;
        }
        Ok(out)
    }
}

/// Real part of a contour value after checking the imaginary residue.
pub fn real_part(v: Complex64) -> Result<f64> {
    if !v.re.is_finite() || !v.im.is_finite() {
        return Err(Error::NonConvergence(format!("contour value is not finite: {v}")));
    }
    if v.im.abs() > 1e-8 * (1.0 + v.re.abs()) {
        return Err(Error::NonConvergence(format!(
            "imaginary residue {:e} of contour value {}",
            v.im, v.re
        )));
    }
    Ok(v.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::airy;

    #[test]
    fn ray_rule_integrates_polynomials() {
        let spec = ContourSpec::new(10.0, 12, 8, 0.25).unwrap();
        let (u, w) = spec.ray_rule();
        assert_eq!(u.len(), 96);
        let s: f64 = u.iter().zip(&w).map(|(u, w)| w * u * u).sum();
        assert!((s - 1000.0 / 3.0).abs() < 1e-10);
        assert!(u.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(ContourSpec::new(0.5, 8, 8, 0.1).is_err());
        assert!(ContourSpec::new(10.0, 1, 8, 0.1).is_err());
        let s = ContourSpec::new(10.0, 8, 8, 0.6).unwrap();
        assert!(s.validate(0.5).is_err());
    }

    #[test]
    fn single_contour_gives_airy() {
        // (1/2 pi i) int e^{-z xi + z^3/3} dz = Ai(xi)
        let spec = ContourSpec::new(8.0, 48, 16, 0.25).unwrap();
        for xi in [1.0, -2.0, 0.0] {
            let v = single_contour(&spec, 0.25, |z| Ok(-z * xi + z * z * z / 3.0)).unwrap();
            let a = airy(xi).unwrap();
            assert!((v.re - a).abs() < 1e-8 && v.im.abs() < 1e-8, "xi={xi}: {v} vs {a}");
        }
    }

    #[test]
    fn double_contour_of_exponentials() {
        // with cubic weights, 1/(z+w) = int_0^inf e^{-l (z+w)} dl turns the
        // double integral into int_0^inf Ai(x+l) Ai(y+l) dl
        let spec = ContourSpec::new(8.0, 48, 16, 0.25).unwrap();
        let dc = DoubleContour::new(&spec, |z| Ok(z * z * z / 3.0), |w| Ok(w * w * w / 3.0)).unwrap();
        let rule = GaussLegendre::new(20);
        for (x, y) in [(0.0, 0.0), (0.5, -1.0)] {
            let want = rule.integrate_uniform(0.0, 20.0, 80, |l| airy(x + l).unwrap() * airy(y + l).unwrap());
            let got = dc.eval(x, y).unwrap();
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
            let grid = dc.eval_grid(&[x], &[y]).unwrap();
            assert!((grid[(0, 0)] - got).abs() < 1e-12);
        }
    }

    #[test]
    fn scan_finds_cubic_cutoff() {
        let r = scan_radius(0.25, 0.0, |z| Ok((z * z * z / 3.0).re)).unwrap();
        // -u^3 / (3 sqrt 2) < -37 from u ~ 5.4
        assert!(r > 5.0 && r < 6.5, "{r}");
    }
}
