//! Correlation kernels: the finite-N two-line kernel, its limits, and the
//! classical Airy and Bessel kernels, all behind the [`Kernel`] trait and a
//! by-name registry.

mod airy;
mod bessel;
mod contour;
mod finite;
mod limits;

pub use airy::{
    ai_product_integral, airy_kernel, cubic_double_contour, cubic_rhs, extended_airy, extended_airy_direct,
    gauge_factor, okounkov, okounkov_quadrature, AiryKernel, ExtendedAiryKernel,
};
pub use bessel::{bessel_kernel, BesselKernel, HardEdgeBessel};
pub use contour::{real_part, scan_radius, single_contour, ContourSpec, DoubleContour, CUTOFF_LOG, MIN_DECAY_RADIUS};
pub use finite::{
    f_log, finite_contour, ktilde_finite, phi_finite, truncation_radius, FiniteKernel, PhiFinite, TwoLine,
    DEFAULT_NODES, DEFAULT_PANELS,
};
pub use limits::{case_b_limit, hard_edge_limit, phi_gaussian, LimitKernel, PhiGaussian};

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::params::ParamSeq;

/// A real kernel K(x, y).
pub trait Kernel: Send + Sync {
    fn name(&self) -> &'static str;

    fn eval(&self, x: f64, y: f64) -> Result<f64>;

    /// Matrix K(xs[i], ys[j]).
    fn eval_grid(&self, xs: &[f64], ys: &[f64]) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(xs.len(), ys.len());
        for (i, &x) in xs.iter().enumerate() {
            for (j, &y) in ys.iter().enumerate() {
                m[(i, j)] = self.eval(x, y)?;
            }
        }
        Ok(m)
    }

    /// Whether K(x, y) = K(y, x) holds by construction.
    fn symmetric(&self) -> bool {
        false
    }

    /// Parameters, contour and tolerances, for output sidecars.
    fn describe(&self) -> serde_json::Value;
}

type Builder = fn(&serde_json::Value) -> Result<Box<dyn Kernel>>;

pub struct KernelEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub build: Builder,
}

fn params<T: DeserializeOwned>(name: &str, v: &serde_json::Value) -> Result<T> {
    T::deserialize(v).map_err(|e| Error::Config(format!("kernel {name}: {e}")))
}

fn default_x_bound() -> f64 {
    4.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FiniteParams {
    seq: ParamSeq,
    n: u64,
    r: i64,
    s: i64,
    #[serde(default = "default_x_bound")]
    x_bound: f64,
    #[serde(default)]
    contour: Option<ContourSpec>,
}

impl FiniteParams {
    fn build(self, with_phi: bool) -> Result<Box<dyn Kernel>> {
        let tl = TwoLine::new(self.seq, self.n, self.r, self.s)?;
        let contour = match self.contour {
            Some(c) => c,
            None => finite_contour(&tl, self.x_bound)?,
        };
        let k = FiniteKernel::new(tl, contour)?;
        Ok(Box::new(if with_phi { k.with_phi()? } else { k }))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PhiFiniteParams {
    seq: ParamSeq,
    n: u64,
    r: i64,
    s: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LimitParams {
    seq: ParamSeq,
    #[serde(default)]
    tau: f64,
    #[serde(default)]
    sigma: f64,
    #[serde(default = "default_x_bound")]
    x_bound: f64,
    #[serde(default)]
    contour: Option<ContourSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TwoTimeParams {
    tau: f64,
    sigma: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Empty {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NuParams {
    nu: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BetaParams {
    beta: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GapParams {
    sigma_minus_tau: f64,
}

static REGISTRY: &[KernelEntry] = &[
    KernelEntry {
        name: "finite-n",
        summary: "two-line kernel K_N = K~_N - phi_{r,s}, centered coordinates",
        build: |v| params::<FiniteParams>("finite-n", v)?.build(true),
    },
    KernelEntry {
        name: "finite-n-tilde",
        summary: "double contour part K~_N of the two-line kernel, centered coordinates",
        build: |v| params::<FiniteParams>("finite-n-tilde", v)?.build(false),
    },
    KernelEntry {
        name: "phi-finite-n",
        summary: "psi_{r,s}(y - x), the finite-N transition density between lines",
        build: |v| {
            let p: PhiFiniteParams = params("phi-finite-n", v)?;
            Ok(Box::new(PhiFinite::new(TwoLine::new(p.seq, p.n, p.r, p.s)?)?))
        },
    },
    KernelEntry {
        name: "hard-edge",
        summary: "limit kernel with G(-z)G(-w)/(G(z)G(w)) for linear or alpha > 1/2 parameters",
        build: |v| {
            let p: LimitParams = params("hard-edge", v)?;
            if p.tau != 0.0 || p.sigma != 0.0 {
                return Err(Error::Config("kernel hard-edge takes no tau/sigma".into()));
            }
            Ok(Box::new(LimitKernel::hard_edge(p.seq, p.x_bound, p.contour)?))
        },
    },
    KernelEntry {
        name: "case-b",
        summary: "limit kernel with Gaussian factors e^{-tau z^2 + sigma w^2}, 1/3 < alpha <= 1/2",
        build: |v| {
            let p: LimitParams = params("case-b", v)?;
            Ok(Box::new(LimitKernel::case_b(
                p.seq, p.tau, p.sigma, p.x_bound, p.contour,
            )?))
        },
    },
    KernelEntry {
        name: "phi-gaussian",
        summary: "heat kernel (4 pi (sigma - tau))^{-1/2} e^{-(y - x)^2 / 4(sigma - tau)}",
        build: |v| {
            let p: GapParams = params("phi-gaussian", v)?;
            Ok(Box::new(PhiGaussian::new(p.sigma_minus_tau)?))
        },
    },
    KernelEntry {
        name: "airy",
        summary: "static Airy kernel",
        build: |v| {
            params::<Empty>("airy", v)?;
            Ok(Box::new(AiryKernel))
        },
    },
    KernelEntry {
        name: "extended-airy",
        summary: "extended Airy kernel A(tau, x; sigma, y)",
        build: |v| {
            let p: TwoTimeParams = params("extended-airy", v)?;
            Ok(Box::new(ExtendedAiryKernel::new(p.tau, p.sigma)))
        },
    },
    KernelEntry {
        name: "bessel",
        summary: "Bessel kernel of order nu",
        build: |v| {
            let p: NuParams = params("bessel", v)?;
            Ok(Box::new(BesselKernel::new(p.nu)?))
        },
    },
    KernelEntry {
        name: "hard-edge-bessel",
        summary:
            "4 e^{-(x+y)/2} K^Bessel_{2 beta + 1}(4 e^{-x}, 4 e^{-y}), the linear hard-edge kernel shifted by delta",
        build: |v| {
            let p: BetaParams = params("hard-edge-bessel", v)?;
            Ok(Box::new(HardEdgeBessel::new(p.beta)?))
        },
    },
];

pub fn registry() -> &'static [KernelEntry] {
    REGISTRY
}

/// Builds the kernel registered under `name` from JSON parameters.
pub fn build(name: &str, params: &serde_json::Value) -> Result<Box<dyn Kernel>> {
    let entry = REGISTRY.iter().find(|e| e.name == name).ok_or_else(|| {
        let known: Vec<&str> = REGISTRY.iter().map(|e| e.name).collect();
        Error::Config(format!("unknown kernel {name:?}; known: {}", known.join(", ")))
    })?;
    (entry.build)(params)
}
