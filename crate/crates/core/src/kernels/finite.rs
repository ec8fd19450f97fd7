//! The finite-N two-line kernel K_N = K~_N - phi_{r,s} in centered
//! coordinates, and its contour.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::contour::{scan_radius, ContourSpec, DoubleContour, MIN_DECAY_RADIUS};
use super::Kernel;
use crate::error::{Error, Result};
use crate::params::ParamSeq;
use crate::quad::GaussLegendre;
use crate::specfun::{h_sum, primary_factor_log};

/// Default panel layout for contour kernels.
pub const DEFAULT_PANELS: usize = 24;
pub const DEFAULT_NODES: usize = 16;

/// (seq, N, r, s) with |r|, |s| < N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoLine {
    pub seq: ParamSeq,
    pub n: u64,
    pub r: i64,
    pub s: i64,
}

impl TwoLine {
    pub fn new(seq: ParamSeq, n: u64, r: i64, s: i64) -> Result<Self> {
        let tl = Self { seq, n, r, s };
        tl.validate()?;
        Ok(tl)
    }

    pub fn validate(&self) -> Result<()> {
        self.seq.validate()?;
        if matches!(self.seq, ParamSeq::Constant { .. }) {
            return Err(Error::invalid("finite-N kernels need a linear or power sequence"));
        }
        if self.r.unsigned_abs() >= self.n || self.s.unsigned_abs() >= self.n {
            return Err(Error::invalid(format!(
                "need |r|, |s| < N, got N={}, r={}, s={}",
                self.n, self.r, self.s
            )));
        }
        Ok(())
    }

    fn ts(&self, m: i64) -> Vec<f64> {
        (1..=m as u64).map(|k| self.seq.t(k)).collect()
    }

    fn n(&self) -> i64 {
        self.n as i64
    }
}

/// log of H_plus(z) - H_minus(-z) for parameter slices.
fn side_log(plus: &[f64], minus: &[f64], z: Complex64) -> Result<Complex64> {
    Ok(h_sum(plus, z)? - h_sum(minus, -z)?)
}

/// log F(z, w). With `centered`, the factor e^{-z c_{N,r} - w c_{N,s}} is
/// included, which is the form entering the centered kernel.
pub fn f_log(tl: &TwoLine, z: Complex64, w: Complex64, centered: bool) -> Result<Complex64> {
    tl.validate()?;
    let n = tl.n();
    let a = side_log(&tl.ts(n + tl.r), &tl.ts(n - tl.r), z)?;
    let b = side_log(&tl.ts(n - tl.s), &tl.ts(n + tl.s), w)?;
    let mut v = a + b;
    if !v.re.is_finite() {
        return Err(Error::Pole("F(z, w) at a zero or pole".into()));
    }
    if !centered {
        v += z * tl.seq.centering(tl.n, tl.r)? + w * tl.seq.centering(tl.n, tl.s)?;
    }
    Ok(v)
}

/// Truncation radius for the side with `plus = N + r`, `minus = N - r`
/// factors: the scan of log |e^{-xz} e^{H_{N+r}(z) - H_{N-r}(-z)}| with
/// |x| <= sqrt(2) x_bound on both rays, floored so that e^{-u_max} < 1e-16.
pub fn truncation_radius(seq: &ParamSeq, n: u64, r: i64, x_bound: f64) -> Result<f64> {
    let tl = TwoLine::new(*seq, n, r, 0)?;
    side_radius(
        &tl.ts(tl.n() + r),
        &tl.ts(tl.n() - r),
        x_bound,
        ContourSpec::default_shift(seq.t(1)),
    )
}

fn side_radius(plus: &[f64], minus: &[f64], x_bound: f64, shift: f64) -> Result<f64> {
    if !(x_bound >= 0.0) {
        return Err(Error::invalid("x_bound must be >= 0"));
    }
    let xmax = std::f64::consts::SQRT_2 * x_bound;
    scan_radius(shift, MIN_DECAY_RADIUS, |z| {
        Ok(xmax * z.re + side_log(plus, minus, z)?.re)
    })
}

/// Contour adequate for K~_N(r, .; s, .) on |x|, |y| <= sqrt(2) x_bound.
pub fn finite_contour(tl: &TwoLine, x_bound: f64) -> Result<ContourSpec> {
    tl.validate()?;
    let n = tl.n();
    let shift = ContourSpec::default_shift(tl.seq.t(1));
    let uz = side_radius(&tl.ts(n + tl.r), &tl.ts(n - tl.r), x_bound, shift)?;
    let uw = side_radius(&tl.ts(n - tl.s), &tl.ts(n + tl.s), x_bound, 0.0)?;
    ContourSpec::new(uz.max(uw), DEFAULT_PANELS, DEFAULT_NODES, shift)
}

/// K~_N(r, x + c_{N,r}; s, y + c_{N,s}) by double contour quadrature, with
/// the assembled K_N = K~_N - phi_{r,s} available through `with_phi`.
pub struct FiniteKernel {
    tl: TwoLine,
    contour: ContourSpec,
    dc: DoubleContour,
    phi: Option<PhiFinite>,
}

impl FiniteKernel {
    pub fn new(tl: TwoLine, contour: ContourSpec) -> Result<Self> {
        tl.validate()?;
        contour.validate(tl.seq.t(1))?;
        let n = tl.n();
        let (zp, zm) = (tl.ts(n + tl.r), tl.ts(n - tl.r));
        let (wp, wm) = (tl.ts(n - tl.s), tl.ts(n + tl.s));
        let dc = DoubleContour::new(&contour, |z| side_log(&zp, &zm, z), |w| side_log(&wp, &wm, w))?;
        Ok(Self {
            tl,
            contour,
            dc,
            phi: None,
        })
    }

    /// Subtract phi_{r,s} to form the full kernel K_N.
    pub fn with_phi(mut self) -> Result<Self> {
        self.phi = Some(PhiFinite::new(self.tl)?);
        Ok(self)
    }

    pub fn contour(&self) -> &ContourSpec {
        &self.contour
    }

    pub fn ktilde(&self, x: f64, y: f64) -> Result<f64> {
        self.dc.eval(x, y)
    }
}

impl Kernel for FiniteKernel {
    fn name(&self) -> &'static str {
        if self.phi.is_some() {
            "finite-n"
        } else {
            "finite-n-tilde"
        }
    }

    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        let k = self.dc.eval(x, y)?;
        match &self.phi {
            Some(phi) => Ok(k - phi.psi(y - x)?),
            None => Ok(k),
        }
    }

    fn eval_grid(&self, xs: &[f64], ys: &[f64]) -> Result<nalgebra::DMatrix<f64>> {
        let mut m = self.dc.eval_grid(xs, ys)?;
        if let Some(phi) = &self.phi {
            for (i, &x) in xs.iter().enumerate() {
                for (j, &y) in ys.iter().enumerate() {
                    m[(i, j)] -= phi.psi(y - x)?;
                }
            }
        }
        Ok(m)
    }

    fn symmetric(&self) -> bool {
        self.tl.r == self.tl.s
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "two_line": self.tl, "contour": self.contour, "with_phi": self.phi.is_some() })
    }
}

/// ktilde_finite at a single point with a contour chosen for that point.
pub fn ktilde_finite(tl: &TwoLine, x: f64, y: f64, contour: Option<ContourSpec>) -> Result<f64> {
    let contour = match contour {
        Some(c) => c,
        None => finite_contour(tl, x.abs().max(y.abs()) / std::f64::consts::SQRT_2)?,
    };
    FiniteKernel::new(*tl, contour)?.ktilde(x, y)
}

/// psi_{r,s}(t) = (1 / pi) int_0^inf Re[e^{i l t} F_{N,r,s}(l)] dl with
/// F_{N,r,s}(l) = prod_{N-s<k<=N-r} 1/E(i l/t_k; 1) prod_{N+r<k<=N+s} 1/E(-i l/t_k; 1).
pub struct PhiFinite {
    lower: Vec<f64>,
    upper: Vec<f64>,
    active: bool,
}

const PHI_MAX_PANELS: usize = 200_000;

impl PhiFinite {
    pub fn new(tl: TwoLine) -> Result<Self> {
        tl.validate()?;
        let n = tl.n();
        let active = tl.r < tl.s;
        let (lower, upper) = if active {
            (
                ((n - tl.s + 1)..=(n - tl.r)).map(|k| tl.seq.t(k as u64)).collect(),
                ((n + tl.r + 1)..=(n + tl.s)).map(|k| tl.seq.t(k as u64)).collect(),
            )
        } else {
            (Vec::new(), Vec::new())
        };
        Ok(Self { lower, upper, active })
    }

    pub fn fourier_log(&self, lambda: f64) -> Complex64 {
        let il = Complex64::new(0.0, lambda);
        let mut v = Complex64::new(0.0, 0.0);
        for &t in &self.lower {
            v -= primary_factor_log(il / t, 1).expect("imaginary argument is never 1");
        }
        for &t in &self.upper {
            v -= primary_factor_log(-il / t, 1).expect("imaginary argument is never 1");
        }
        v
    }

    /// F_{N,r,s}(lambda).
    pub fn fourier(&self, lambda: f64) -> Complex64 {
        self.fourier_log(lambda).exp()
    }

    /// psi_{r,s}(t); exactly 0 when r >= s.
    pub fn psi(&self, t: f64) -> Result<f64> {
        if !self.active {
            return Ok(0.0);
        }
        let rate = 1.0 + t.abs() + self.lower.iter().chain(&self.upper).map(|t| 1.0 / t).sum::<f64>();
        let h = (4.0 / rate).min(1.0);
        let rule = GaussLegendre::new(16);
        let mut total = 0.0;
        for p in 0..PHI_MAX_PANELS {
            let a = p as f64 * h;
            total += rule.integrate(a, a + h, |l| {
                (Complex64::new(0.0, l * t) + self.fourier_log(l)).exp().re
            });
            if self.fourier_log(a + h).re < (1e-14f64).ln() {
                return Ok(total / PI);
            }
        }
        Err(Error::NonConvergence(format!(
            "|F_(N,r,s)| stays above 1e-14 beyond lambda = {}",
            PHI_MAX_PANELS as f64 * h
        )))
    }
}

impl Kernel for PhiFinite {
    fn name(&self) -> &'static str {
        "phi-finite-n"
    }

    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        self.psi(y - x)
    }

    fn symmetric(&self) -> bool {
        !self.active
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "factors": self.lower.len() + self.upper.len() })
    }
}

/// phi_{r,s}(x + c_{N,r}, y + c_{N,s}) = psi_{r,s}(y - x).
pub fn phi_finite(tl: &TwoLine, x: f64, y: f64) -> Result<f64> {
    PhiFinite::new(*tl)?.psi(y - x)
}
