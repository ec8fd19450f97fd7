//! Fredholm determinants det(I - K) on (xi, inf) by Nystrom discretization.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{AiryKernel, HardEdgeBessel, Kernel, LimitKernel};
use crate::params::{digamma_one_plus, ParamSeq};
use crate::quad::gauss_legendre;

/// Change of variables from (0, 1) onto (xi, inf).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMap {
    /// x = xi - ln(1 - t)
    Exp,
    /// x = xi + 2 t / (1 - t)
    Algebraic,
}

const ALGEBRAIC_SCALE: f64 = 2.0;

#[derive(Debug, Clone)]
pub struct QuadGrid {
    pub xi: f64,
    pub map: GridMap,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl QuadGrid {
    pub fn new(xi: f64, map: GridMap, order: usize) -> Result<Self> {
        if order == 0 || !xi.is_finite() {
            return Err(Error::invalid(format!("bad grid: xi = {xi}, order = {order}")));
        }
        let (t, w) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(order);
        let mut weights = Vec::with_capacity(order);
        for (&t, &w) in t.iter().zip(&w) {
            // Gauss-Legendre nodes on [-1, 1] moved to (0, 1)
            let u = 0.5 * (t + 1.0);
            let wu = 0.5 * w;
            let (x, dx) = match map {
                GridMap::Exp => (xi - (-u).ln_1p(), 1.0 / (1.0 - u)),
                GridMap::Algebraic => (
                    xi + ALGEBRAIC_SCALE * u / (1.0 - u),
                    ALGEBRAIC_SCALE / ((1.0 - u) * (1.0 - u)),
                ),
            };
            nodes.push(x);
            weights.push(wu * dx);
        }
        Ok(Self {
            xi,
            map,
            nodes,
            weights,
            order,
        })
    }
}

/// det(I - W^{1/2} K W^{1/2}) on the grid.
pub fn det_nystrom(kernel: &dyn Kernel, grid: &QuadGrid) -> Result<f64> {
    let mut m = kernel.eval_grid(&grid.nodes, &grid.nodes)?;
    let n = grid.order;
    let sw: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    if kernel.symmetric() {
        for i in 0..n {
            for j in 0..i {
                m[(i, j)] = m[(j, i)];
            }
        }
    }
    let a = DMatrix::from_fn(
        n,
        n,
        |i, j| if i == j { 1.0 } else { 0.0 } - m[(i, j)] * (sw[i] * sw[j]),
    );
    let d = a.lu().determinant();
    if !d.is_finite() {
        return Err(Error::NonConvergence("Nystrom determinant is not finite".into()));
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetOptions {
    pub map: GridMap,
    pub order: usize,
    pub max_order: usize,
    /// Accepted change between successive orders.
    pub tol: f64,
}

impl Default for DetOptions {
    fn default() -> Self {
        Self {
            map: GridMap::Exp,
            order: 40,
            max_order: 320,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetValue {
    pub value: f64,
    /// Change from the previous order.
    pub err_estimate: f64,
    pub order: usize,
}

/// det(I - K) on (xi, inf), raising the order by half until two successive
/// values agree within `opts.tol`.
pub fn det_fredholm(kernel: &dyn Kernel, xi: f64, opts: &DetOptions) -> Result<DetValue> {
    if opts.order < 2 || opts.max_order < opts.order || !(opts.tol > 0.0) {
        return Err(Error::invalid(format!("bad determinant options {opts:?}")));
    }
    let mut order = opts.order;
    let mut prev = det_nystrom(kernel, &QuadGrid::new(xi, opts.map, order)?)?;
    loop {
        let next_order = order + order / 2;
        if next_order > opts.max_order {
            return Err(Error::NonConvergence(format!(
                "determinant at xi = {xi} still moving at order {order}"
            )));
        }
        let next = det_nystrom(kernel, &QuadGrid::new(xi, opts.map, next_order)?)?;
        let diff = (next - prev).abs();
        order = next_order;
        prev = next;
        if diff < opts.tol {
            if next < -opts.tol.max(1e-8) {
                return Err(Error::NonConvergence(format!(
                    "negative determinant {next} at xi = {xi}"
                )));
            }
            return Ok(DetValue {
                value: next,
                err_estimate: diff,
                order,
            });
        }
    }
}

/// F_TW(xi) = det(I - A) on (xi, inf).
pub fn tracy_widom_cdf(xi: f64, opts: &DetOptions) -> Result<DetValue> {
    if !(-8.0..=6.0).contains(&xi) {
        return Err(Error::OutOfRange {
            what: "xi",
            value: xi,
            lo: -8.0,
            hi: 6.0,
        });
    }
    det_fredholm(&AiryKernel, xi, opts)
}

/// Representation used for U_beta.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UPath {
    /// Double contour kernel with G_{1,beta} on (xi + delta, inf).
    Contour,
    /// Exponentially transformed Bessel kernel of order 2 beta + 1 on (xi, inf).
    Bessel,
}

/// U_beta(xi), the limit law of G(n, n) - 2 log n for t_k = k + beta.
pub fn u_beta_cdf(beta: f64, xi: f64, path: UPath, opts: &DetOptions) -> Result<DetValue> {
    if !(beta > -1.0 && beta <= 20.0) {
        return Err(Error::OutOfRange {
            what: "beta",
            value: beta,
            lo: -1.0,
            hi: 20.0,
        });
    }
    if !(-6.0..=12.0).contains(&xi) {
        return Err(Error::OutOfRange {
            what: "xi",
            value: xi,
            lo: -6.0,
            hi: 12.0,
        });
    }
    match path {
        UPath::Bessel => det_fredholm(&HardEdgeBessel::new(beta)?, xi, opts),
        UPath::Contour => {
            let left = xi + 2.0 * digamma_one_plus(beta);
            let x_bound = (-left).max(0.0) / std::f64::consts::SQRT_2;
            let k = LimitKernel::hard_edge(ParamSeq::linear(beta)?, x_bound, None)?;
            det_fredholm(&k, left, opts)
        }
    }
}

/// The U_beta argument that tracks F_TW(s) for large beta: the soft edge of
/// the Bessel kernel of order nu = 2 beta + 1, sqrt(X) = nu - (nu/2)^{1/3} s,
/// carried to (xi, inf) through X = 4 e^{-xi}.
pub fn soft_edge_argument(beta: f64, s: f64) -> Result<f64> {
    let nu = 2.0 * beta + 1.0;
    let edge = nu - (nu / 2.0).cbrt() * s;
    if !(edge > 0.0) {
        return Err(Error::invalid(format!(
            "s = {s} lies beyond the hard edge for beta = {beta}"
        )));
    }
    Ok(-2.0 * (edge / 2.0).ln())
}

/// (U_beta at the rescaled argument, F_TW(s)).
pub fn soft_edge_probe(beta: f64, s: f64, opts: &DetOptions) -> Result<(f64, f64)> {
    if !(2.0..=20.0).contains(&beta) {
        return Err(Error::OutOfRange {
            what: "beta",
            value: beta,
            lo: 2.0,
            hi: 20.0,
        });
    }
    let xi = soft_edge_argument(beta, s)?;
    let u = det_fredholm(&HardEdgeBessel::new(beta)?, xi, opts)?.value;
    let f = tracy_widom_cdf(s, opts)?.value;
    Ok((u, f))
}
