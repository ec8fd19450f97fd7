//! N -> infinity limits of the two-line kernel: the hard-edge kernel built
//! from G(-z)/G(z), its Gaussian-deformed version for 1/3 < alpha <= 1/2,
//! and the heat kernel that replaces phi_{r,s}.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use super::contour::{scan_radius, ContourSpec, DoubleContour, MIN_DECAY_RADIUS};
use super::finite::{DEFAULT_NODES, DEFAULT_PANELS};
use super::Kernel;
use crate::error::{Error, Result};
use crate::params::ParamSeq;
use crate::specfun::CanonicalProduct;

const PRODUCT_TOL: f64 = 1e-13;
const PREP_RADII: [f64; 4] = [40.0, 80.0, 160.0, 320.0];

/// log of G(-z) / G(z) + q z^2.
fn side_log(g: &CanonicalProduct, q: f64, z: Complex64) -> Result<Complex64> {
    match (g.log(-z)?, g.log(z)?) {
        (Some(a), Some(b)) => Ok(a - b + q * z * z),
        _ => Err(Error::Pole(format!("G has a zero at {z}"))),
    }
}

fn genus_for(seq: &ParamSeq) -> Result<u32> {
    match *seq {
        ParamSeq::Linear { .. } => Ok(1),
        ParamSeq::Power { alpha } if alpha > 0.5 => Ok(1),
        ParamSeq::Power { alpha } if alpha > 1.0 / 3.0 => Ok(2),
        _ => Err(Error::invalid(format!(
            "limit kernels need linear parameters or power alpha > 1/3, got {seq:?}"
        ))),
    }
}

/// Finds u_max for both sides, preparing G on growing discs as needed.
fn limit_radius(seq: &ParamSeq, genus: u32, tau: f64, sigma: f64, x_bound: f64, shift: f64) -> Result<f64> {
    let grow = SQRT_2 * x_bound;
    for &prep in &PREP_RADII {
        let g = CanonicalProduct::new(seq, genus, prep, PRODUCT_TOL)?;
        let side = |q: f64, sh: f64| {
            scan_radius(sh, MIN_DECAY_RADIUS, |z| {
                if z.norm() > prep {
                    return Err(Error::OutOfRange {
                        what: "contour radius",
                        value: z.norm(),
                        lo: 0.0,
                        hi: prep,
                    });
                }
                Ok(grow * z.re + side_log(&g, q, z)?.re)
            })
        };
        match (side(-tau, shift), side(sigma, 0.0)) {
            (Ok(a), Ok(b)) => return Ok(a.max(b)),
            (
                Err(Error::OutOfRange {
                    what: "contour radius", ..
                }),
                _,
            )
            | (
                _,
                Err(Error::OutOfRange {
                    what: "contour radius", ..
                }),
            ) => continue,
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    Err(Error::NonConvergence(format!(
        "limit integrand does not decay within radius {}",
        PREP_RADII[PREP_RADII.len() - 1]
    )))
}

/// Double contour kernel with A(z) = e^{-tau z^2} G(-z)/G(z) and
/// B(w) = e^{sigma w^2} G(-w)/G(w).
pub struct LimitKernel {
    seq: ParamSeq,
    tau: f64,
    sigma: f64,
    genus: u32,
    contour: ContourSpec,
    dc: DoubleContour,
    phi: Option<PhiGaussian>,
}

impl LimitKernel {
    /// Hard-edge limit, for linear parameters or alpha > 1/2.
    pub fn hard_edge(seq: ParamSeq, x_bound: f64, contour: Option<ContourSpec>) -> Result<Self> {
        if genus_for(&seq)? != 1 {
            return Err(Error::invalid(
                "the hard-edge limit needs linear parameters or alpha > 1/2",
            ));
        }
        Self::build(seq, 0.0, 0.0, x_bound, contour)
    }

    /// Case alpha in (1/3, 1/2] with line times tau, sigma; the heat kernel
    /// is subtracted when tau < sigma.
    pub fn case_b(seq: ParamSeq, tau: f64, sigma: f64, x_bound: f64, contour: Option<ContourSpec>) -> Result<Self> {
        if genus_for(&seq)? != 2 {
            return Err(Error::invalid("case b needs power parameters with 1/3 < alpha <= 1/2"));
        }
        if !(tau.abs() <= 3.0 && sigma.abs() <= 3.0) {
            return Err(Error::OutOfRange {
                what: "tau, sigma",
                value: tau.abs().max(sigma.abs()),
                lo: -3.0,
                hi: 3.0,
            });
        }
        let mut k = Self::build(seq, tau, sigma, x_bound, contour)?;
        if tau < sigma {
            k.phi = Some(PhiGaussian::new(sigma - tau)?);
        }
        Ok(k)
    }

    fn build(seq: ParamSeq, tau: f64, sigma: f64, x_bound: f64, contour: Option<ContourSpec>) -> Result<Self> {
        seq.validate()?;
        let genus = genus_for(&seq)?;
        let t1 = seq.t(1);
        let contour = match contour {
            Some(c) => c,
            None => {
                let shift = ContourSpec::default_shift(t1);
                let u = limit_radius(&seq, genus, tau, sigma, x_bound, shift)?;
                ContourSpec::new(u, DEFAULT_PANELS, DEFAULT_NODES, shift)?
            }
        };
        contour.validate(t1)?;
        let g = CanonicalProduct::new(&seq, genus, contour.u_max + contour.origin_shift + 1.0, PRODUCT_TOL)?;
        let dc = DoubleContour::new(&contour, |z| side_log(&g, -tau, z), |w| side_log(&g, sigma, w))?;
        Ok(Self {
            seq,
            tau,
            sigma,
            genus,
            contour,
            dc,
            phi: None,
        })
    }

    pub fn contour(&self) -> &ContourSpec {
        &self.contour
    }

    /// The double contour part alone.
    pub fn contour_part(&self, x: f64, y: f64) -> Result<f64> {
        self.dc.eval(x, y)
    }
}

impl Kernel for LimitKernel {
    fn name(&self) -> &'static str {
        if self.genus == 1 {
            "hard-edge"
        } else {
            "case-b"
        }
    }

    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        let k = self.dc.eval(x, y)?;
        match &self.phi {
            Some(p) => Ok(k - p.eval_gap(y - x)),
            None => Ok(k),
        }
    }

    fn eval_grid(&self, xs: &[f64], ys: &[f64]) -> Result<nalgebra::DMatrix<f64>> {
        let mut m = self.dc.eval_grid(xs, ys)?;
        if let Some(p) = &self.phi {
            for (i, &x) in xs.iter().enumerate() {
                for (j, &y) in ys.iter().enumerate() {
                    m[(i, j)] -= p.eval_gap(y - x);
                }
            }
        }
        Ok(m)
    }

    fn symmetric(&self) -> bool {
        self.tau == 0.0 && self.sigma == 0.0
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "seq": self.seq, "tau": self.tau, "sigma": self.sigma,
            "genus": self.genus, "contour": self.contour, "product_tol": PRODUCT_TOL,
        })
    }
}

/// Hard-edge limit kernel at one point.
pub fn hard_edge_limit(seq: &ParamSeq, x: f64, y: f64, contour: Option<ContourSpec>) -> Result<f64> {
    LimitKernel::hard_edge(*seq, x.abs().max(y.abs()) / SQRT_2, contour)?.eval(x, y)
}

/// Case-b limit kernel (including the heat-kernel term) at one point.
pub fn case_b_limit(seq: &ParamSeq, tau: f64, sigma: f64, x: f64, y: f64, contour: Option<ContourSpec>) -> Result<f64> {
    LimitKernel::case_b(*seq, tau, sigma, x.abs().max(y.abs()) / SQRT_2, contour)?.eval(x, y)
}

/// Heat kernel with time gap sigma - tau > 0, as a function of y - x.
#[derive(Debug, Clone, Copy)]
pub struct PhiGaussian {
    gap: f64,
}

impl PhiGaussian {
    pub fn new(sigma_minus_tau: f64) -> Result<Self> {
        if !(sigma_minus_tau > 0.0 && sigma_minus_tau.is_finite()) {
            return Err(Error::invalid(format!(
                "sigma - tau must be > 0, got {sigma_minus_tau}"
            )));
        }
        Ok(Self { gap: sigma_minus_tau })
    }

    pub fn eval_gap(&self, t: f64) -> f64 {
        (-t * t / (4.0 * self.gap)).exp() / (4.0 * PI * self.gap).sqrt()
    }
}

impl Kernel for PhiGaussian {
    fn name(&self) -> &'static str {
        "phi-gaussian"
    }

    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.eval_gap(y - x))
    }

    fn symmetric(&self) -> bool {
        true
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "sigma_minus_tau": self.gap })
    }
}

pub fn phi_gaussian(sigma_minus_tau: f64, t: f64) -> Result<f64> {
    Ok(PhiGaussian::new(sigma_minus_tau)?.eval_gap(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::bessel_kernel;
    use crate::kernels::finite::{finite_contour, FiniteKernel, PhiFinite, TwoLine};
    use crate::params::digamma_one_plus;
    use crate::quad::GaussLegendre;

    #[test]
    fn heat_kernel_values() {
        assert!((phi_gaussian(0.25, 0.0).unwrap() - 1.0 / PI.sqrt()).abs() < 1e-15);
        assert!(phi_gaussian(0.0, 1.0).is_err());
        let rule = GaussLegendre::new(20);
        let mass = rule.integrate_uniform(-20.0, 20.0, 40, |t| phi_gaussian(0.7, t).unwrap());
        assert!((mass - 1.0).abs() < 1e-13);
    }

    #[test]
    fn hard_edge_symmetric() {
        let k = LimitKernel::hard_edge(ParamSeq::linear(0.0).unwrap(), 2.0, None).unwrap();
        let (a, b) = (k.eval(0.7, 1.3).unwrap(), k.eval(1.3, 0.7).unwrap());
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn bessel_relation_beta0() {
        let beta = 0.0;
        let delta = 2.0 * digamma_one_plus(beta);
        let (u, v) = (0.2f64, 0.35f64);
        let (x, y) = ((1.0 / u).ln() + delta, (1.0 / v).ln() + delta);
        let lhs = hard_edge_limit(&ParamSeq::linear(beta).unwrap(), x, y, None).unwrap() / (u * v).sqrt();
        let rhs = 4.0 * bessel_kernel(2.0 * beta + 1.0, 4.0 * u, 4.0 * v).unwrap();
        assert!((lhs - rhs).abs() < 1e-5, "{lhs} vs {rhs}");
    }

    #[test]
    fn finite_n_approaches_hard_edge() {
        let seq = ParamSeq::linear(0.0).unwrap();
        let lim = LimitKernel::hard_edge(seq, 2.0, None).unwrap().eval(1.0, 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for n in [50u64, 100, 200, 400] {
            let tl = TwoLine::new(seq, n, 0, 0).unwrap();
            let k = FiniteKernel::new(tl, finite_contour(&tl, 2.0).unwrap()).unwrap();
            let err = (k.eval(1.0, 1.0).unwrap() - lim).abs();
            assert!(err < prev, "N={n}: {err} !< {prev}");
            prev = err;
        }
        assert!(prev < 1e-3, "{prev}");
    }

    #[test]
    fn case_b_degenerates_to_genus_two_hard_edge() {
        let seq = ParamSeq::power(0.45).unwrap();
        let k = LimitKernel::case_b(seq, 0.0, 0.0, 1.0, None).unwrap();
        let contour = *k.contour();
        let g = CanonicalProduct::new(&seq, 2, contour.u_max + 2.0, 1e-13).unwrap();
        let f = |z: Complex64| Ok(g.log(-z)?.unwrap() - g.log(z)?.unwrap());
        let direct = DoubleContour::new(&contour, f, f).unwrap().eval(0.4, 0.9).unwrap();
        assert!((k.eval(0.4, 0.9).unwrap() - direct).abs() < 1e-9);
    }

    #[test]
    fn case_b_relabeling() {
        let seq = ParamSeq::power(0.45).unwrap();
        let a = LimitKernel::case_b(seq, 0.3, -0.5, 1.5, None)
            .unwrap()
            .contour_part(0.2, 1.1)
            .unwrap();
        let b = LimitKernel::case_b(seq, 0.5, -0.3, 1.5, None)
            .unwrap()
            .contour_part(1.1, 0.2)
            .unwrap();
        // (tau, sigma) -> (-sigma, -tau) with x <-> y swaps the roles of z and w
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn finite_phi_near_heat_kernel() {
        let alpha = 0.45;
        let n = 300u64;
        let scale = (n as f64).powf(2.0 * alpha);
        let s = (0.5 * scale).floor() as i64;
        let phi = PhiFinite::new(TwoLine::new(ParamSeq::power(alpha).unwrap(), n, 0, s).unwrap()).unwrap();
        for t in [0.0, 0.5, 1.0] {
            let (a, b) = (phi.psi(t).unwrap(), phi_gaussian(0.5, t).unwrap());
            assert!((a - b).abs() < 5e-2, "t={t}: {a} vs {b}");
        }
    }
}
