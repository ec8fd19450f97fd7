//! Finite-matrix check of the two-line determinant identity
//! det(I - K_ext diag(phi1, phi2)) = det(I - K diag(g)).

use nalgebra::{DMatrix, DVector};
use rand_core::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lpp::{substream_rng, unit_open_closed};

/// Largest order for which the dense check is run.
pub const MAX_ORDER: usize = 12;
/// Highest trace power compared.
pub const MAX_POWER: usize = 6;
const MATCH_TOL: f64 = 1e-10;

/// Base kernel K on one line and its two-line extension
/// K_ext(i, x; j, y) = K(x, y) - delta(x - y) eta_ij, eta_ij = 1 iff i < j.
#[derive(Debug, Clone)]
pub struct TwoLineKernelMatrix {
    pub base: DMatrix<f64>,
}

impl TwoLineKernelMatrix {
    pub fn new(base: DMatrix<f64>) -> Result<Self> {
        if !base.is_square() {
            return Err(Error::invalid("base kernel matrix must be square"));
        }
        Ok(Self { base })
    }

    /// Blocks [[K, K - s I], [K, K]]; s = 1 is the extended matrix itself.
    pub fn extended_with(&self, s: f64) -> DMatrix<f64> {
        let n = self.base.nrows();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for bi in 0..2 {
            for bj in 0..2 {
                m.view_mut((bi * n, bj * n), (n, n)).copy_from(&self.base);
            }
        }
        for i in 0..n {
            m[(i, n + i)] -= s;
        }
        m
    }

    pub fn extended(&self) -> DMatrix<f64> {
        self.extended_with(1.0)
    }
}

/// Sign choice in g = phi1 + phi2 +- phi1 phi2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GSign {
    Plus,
    Minus,
}

impl GSign {
    fn value(self) -> f64 {
        match self {
            GSign::Plus => 1.0,
            GSign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceReport {
    pub n: usize,
    pub det_ext: f64,
    pub det_plus: f64,
    pub det_minus: f64,
    pub plus_matches: bool,
    pub minus_matches: bool,
    /// The single matching sign, if exactly one matched.
    pub winner: Option<GSign>,
    /// Largest mismatch of the graded identity
    /// (1/m)[s^r] Tr(K_ext(s) Phi)^m = (1/(m-r))[s^r] Tr(K g(s))^{m-r}, m <= 6,
    /// with g(s) = phi1 + phi2 + sign s phi1 phi2 for the winning sign.
    pub graded_max_discrepancy: Option<f64>,
    /// Tr(K_ext Phi)^m - Tr(K g)^m for m = 1..=6 with the winning g; these
    /// need not vanish, only the graded pieces do.
    pub naive_trace_gaps: Vec<f64>,
}

/// One instance: K symmetric, phi1 and phi2 diagonal.
#[derive(Debug, Clone)]
pub struct TraceInstance {
    pub kernel: TwoLineKernelMatrix,
    pub phi1: DVector<f64>,
    pub phi2: DVector<f64>,
}

fn spectral_norm(k: &DMatrix<f64>) -> f64 {
    k.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()))
}

impl TraceInstance {
    /// Random symmetric K rescaled to spectral norm `norm` (< 1/2) and
    /// phi1, phi2 with entries in [0, 1/2).
    pub fn random(n: usize, seed: u64, norm: f64) -> Result<Self> {
        if n == 0 || n > MAX_ORDER {
            return Err(Error::OutOfRange {
                what: "matrix order",
                value: n as f64,
                lo: 1.0,
                hi: MAX_ORDER as f64,
            });
        }
        if !(norm > 0.0 && norm < 0.5) {
            return Err(Error::invalid(format!(
                "spectral norm target {norm} must lie in (0, 1/2)"
            )));
        }
        let mut rng = substream_rng(seed, 0);
        let mut u = || unit_open_closed(rng.next_u64());
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = 2.0 * u() - 1.0;
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        let scale = norm / spectral_norm(&k);
        k *= scale;
        let phi1 = DVector::from_fn(n, |_, _| 0.5 * (1.0 - u()));
        let phi2 = DVector::from_fn(n, |_, _| 0.5 * (1.0 - u()));
        Self::new(k, phi1, phi2)
    }

    pub fn new(k: DMatrix<f64>, phi1: DVector<f64>, phi2: DVector<f64>) -> Result<Self> {
        let n = k.nrows();
        if phi1.len() != n || phi2.len() != n {
            return Err(Error::invalid("phi vectors must match the kernel order"));
        }
        if spectral_norm(&k) >= 0.5 {
            return Err(Error::invalid("spectral norm of K must stay below 1/2"));
        }
        Ok(Self {
            kernel: TwoLineKernelMatrix::new(k)?,
            phi1,
            phi2,
        })
    }

    fn n(&self) -> usize {
        self.phi1.len()
    }

    fn phi(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(2 * n, 2 * n, |i, j| match (i == j, i < n) {
            (true, true) => self.phi1[i],
            (true, false) => self.phi2[i - n],
            _ => 0.0,
        })
    }

    fn g(&self, sign: f64, s: f64) -> DVector<f64> {
        self.phi1.zip_map(&self.phi2, |a, b| a + b + sign * s * a * b)
    }

    fn k_diag(&self, d: &DVector<f64>) -> DMatrix<f64> {
        let mut m = self.kernel.base.clone();
        for j in 0..d.len() {
            m.column_mut(j).scale_mut(d[j]);
        }
        m
    }

    pub fn det_extended(&self) -> f64 {
        let n = self.n();
        (DMatrix::identity(2 * n, 2 * n) - self.kernel.extended() * self.phi()).determinant()
    }

    pub fn det_single(&self, sign: GSign) -> f64 {
        let n = self.n();
        (DMatrix::identity(n, n) - self.k_diag(&self.g(sign.value(), 1.0))).determinant()
    }

    /// log det(I - K g) from the series -sum_{m <= terms} Tr(K g)^m / m.
    pub fn log_det_series(&self, sign: GSign, terms: usize) -> f64 {
        let kg = self.k_diag(&self.g(sign.value(), 1.0));
        let mut p = kg.clone();
        let mut total = 0.0;
        for m in 1..=terms {
            total -= p.trace() / m as f64;
            p = &p * &kg;
        }
        total
    }

    pub fn check(&self) -> TraceReport {
        let det_ext = self.det_extended();
        let det_plus = self.det_single(GSign::Plus);
        let det_minus = self.det_single(GSign::Minus);
        let close = |a: f64| (a - det_ext).abs() < MATCH_TOL;
        let (plus_matches, minus_matches) = (close(det_plus), close(det_minus));
        let winner = match (plus_matches, minus_matches) {
            (true, false) => Some(GSign::Plus),
            (false, true) => Some(GSign::Minus),
            _ => None,
        };
        let (graded_max_discrepancy, naive_trace_gaps) = match winner {
            Some(w) => (Some(self.graded_discrepancy(w)), self.naive_gaps(w)),
            None => (None, Vec::new()),
        };
        TraceReport {
            n: self.n(),
            det_ext,
            det_plus,
            det_minus,
            plus_matches,
            minus_matches,
            winner,
            graded_max_discrepancy,
            naive_trace_gaps,
        }
    }

    fn naive_gaps(&self, sign: GSign) -> Vec<f64> {
        let a = self.kernel.extended() * self.phi();
        let b = self.k_diag(&self.g(sign.value(), 1.0));
        let (mut pa, mut pb) = (a.clone(), b.clone());
        let mut out = Vec::with_capacity(MAX_POWER);
        for _ in 0..MAX_POWER {
            out.push(pa.trace() - pb.trace());
            pa = &pa * &a;
            pb = &pb * &b;
        }
        out
    }

    fn graded_discrepancy(&self, sign: GSign) -> f64 {
        let phi = self.phi();
        let a0 = self.kernel.extended_with(0.0) * &phi;
        let a1 = (self.kernel.extended_with(1.0) - self.kernel.extended_with(0.0)) * &phi;
        let b0 = self.k_diag(&self.g(0.0, 0.0));
        let b1 = self.k_diag(&self.phi1.component_mul(&self.phi2)) * sign.value();
        let left = poly_traces(&a0, &a1, MAX_POWER);
        let right = poly_traces(&b0, &b1, MAX_POWER);
        let mut worst = 0.0f64;
        for m in 1..=MAX_POWER {
            for r in 0..=m {
                let l = left[m][r] / m as f64;
                let rt = if r < m {
                    right[m - r].get(r).map_or(0.0, |c| c / (m - r) as f64)
                } else {
                    0.0
                };
                worst = worst.max((l - rt).abs());
            }
        }
        worst
    }
}

/// out[m][r] = [s^r] Tr(a0 + s a1)^m for m <= max_power.
fn poly_traces(a0: &DMatrix<f64>, a1: &DMatrix<f64>, max_power: usize) -> Vec<Vec<f64>> {
    let dim = a0.nrows();
    let mut p: Vec<DMatrix<f64>> = vec![DMatrix::identity(dim, dim)];
    let mut out = vec![vec![dim as f64]];
    for _ in 1..=max_power {
        let mut next = vec![DMatrix::zeros(dim, dim); p.len() + 1];
        for (k, pk) in p.iter().enumerate() {
            next[k] += pk * a0;
            next[k + 1] += pk * a1;
        }
        out.push(next.iter().map(|m| m.trace()).collect());
        p = next;
    }
    out
}

/// Random instance of order n with spectral norm 0.45.
pub fn trace_identity_check(n: usize, seed: u64) -> Result<TraceReport> {
    Ok(TraceInstance::random(n, seed, 0.45)?.check())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extended_blocks() {
        let k = DMatrix::from_row_slice(2, 2, &[0.1, 0.2, 0.2, 0.3]);
        let e = TwoLineKernelMatrix::new(k.clone()).unwrap().extended();
        assert_eq!(e.view((0, 0), (2, 2)), k);
        assert_eq!(e.view((2, 0), (2, 2)), k);
        assert_eq!(e.view((2, 2), (2, 2)), k);
        assert_eq!(e.view((0, 2), (2, 2)), k - DMatrix::identity(2, 2));
    }

    #[test]
    fn single_line_reduction() {
        let mut inst = TraceInstance::random(6, 3, 0.45).unwrap();
        inst.phi2.fill(0.0);
        let d1 = (DMatrix::identity(6, 6) - inst.k_diag(&inst.phi1)).determinant();
        let r = inst.check();
        for d in [r.det_ext, r.det_plus, r.det_minus] {
            assert!((d - d1).abs() < 1e-12);
        }
        inst.phi1.fill(0.0);
        let r = inst.check();
        assert_eq!((r.det_ext, r.det_plus, r.det_minus), (1.0, 1.0, 1.0));
    }

    #[test]
    fn one_sign_wins_consistently() {
        let mut winners = Vec::new();
        for seed in 0..100 {
            let r = trace_identity_check(6, seed).unwrap();
            assert!(r.plus_matches != r.minus_matches, "seed {seed}: {r:?}");
            assert!(r.graded_max_discrepancy.unwrap() < 1e-12);
            winners.push(r.winner.unwrap());
        }
        assert!(winners.iter().all(|w| *w == winners[0]));
    }

    #[test]
    fn log_det_series_converges() {
        let inst = TraceInstance::random(8, 11, 0.3).unwrap();
        let r = inst.check();
        let w = r.winner.unwrap();
        let exact = inst.det_single(w).ln();
        assert!((inst.log_det_series(w, 12) - exact).abs() < 1e-8);
        assert!((exact - r.det_ext.ln()).abs() < 1e-10);
    }

    #[test]
    fn guards() {
        assert!(TraceInstance::random(13, 0, 0.4).is_err());
        assert!(TraceInstance::random(4, 0, 0.5).is_err());
        let k = DMatrix::identity(2, 2) * 0.6;
        assert!(TraceInstance::new(k, DVector::zeros(2), DVector::zeros(2)).is_err());
    }
}
