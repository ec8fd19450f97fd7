//! Parameter sequences t_i, their counting function, partial sums and
//! centering constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Euler's constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// The rate sequence t_1, t_2, ... of the weight model. Weight w(i, j) is
/// exponential with rate t_i + t_j.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamSeq {
    /// t_i = i + beta, beta > -1.
    Linear { beta: f64 },
    /// t_i = i^alpha, 0 < alpha <= 1.
    Power { alpha: f64 },
    /// t_i = value for all i. Only used as the classical control in
    /// simulations; kernels and sums reject it where they would diverge.
    Constant { value: f64 },
}

impl ParamSeq {
    pub fn linear(beta: f64) -> Result<Self> {
        if !(beta > -1.0) || !beta.is_finite() {
            return Err(Error::invalid(format!("linear sequence needs beta > -1, got {beta}")));
        }
        Ok(ParamSeq::Linear { beta })
    }

    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid(format!(
                "power sequence needs 0 < alpha <= 1, got {alpha}"
            )));
        }
        Ok(ParamSeq::Power { alpha })
    }

    pub fn constant(value: f64) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::invalid(format!(
                "constant sequence needs value > 0, got {value}"
            )));
        }
        Ok(ParamSeq::Constant { value })
    }

    /// Re-checks the domain of a value that may have come from deserialization.
    pub fn validate(&self) -> Result<()> {
        match *self {
            ParamSeq::Linear { beta } => Self::linear(beta).map(|_| ()),
            ParamSeq::Power { alpha } => Self::power(alpha).map(|_| ()),
            ParamSeq::Constant { value } => Self::constant(value).map(|_| ()),
        }
    }

    /// t_i for i >= 1.
    #[inline]
    pub fn t(&self, i: u64) -> f64 {
        debug_assert!(i >= 1);
        match *self {
            ParamSeq::Linear { beta } => i as f64 + beta,
            ParamSeq::Power { alpha } => {
                if alpha == 1.0 {
                    i as f64
                } else {
                    (i as f64).powf(alpha)
                }
            }
            ParamSeq::Constant { value } => value,
        }
    }

    /// t_1, ..., t_n.
    pub fn values(&self, n: u64) -> Vec<f64> {
        (1..=n).map(|i| self.t(i)).collect()
    }

    /// n(t) = #{k >= 1 : t_k <= t}. Saturates at `u64::MAX` for the
    /// constant sequence once t reaches its value.
    pub fn counting(&self, tval: f64) -> u64 {
        if tval < self.t(1) {
            return 0;
        }
        let guess = match *self {
            ParamSeq::Linear { beta } => (tval - beta).floor().max(0.0),
            ParamSeq::Power { alpha } => tval.powf(1.0 / alpha).floor(),
            ParamSeq::Constant { .. } => return u64::MAX,
        };
        let mut k = guess as u64;
        // floors of rounded powers can land one off either way
        while self.t(k + 1) <= tval {
            k += 1;
        }
        while k > 0 && self.t(k) > tval {
            k -= 1;
        }
        k
    }

    /// c_M^{(j)} = sum_{k=1}^M t_k^{-j}, compensated summation.
    pub fn partial_sum(&self, m: u64, j: u32) -> f64 {
        let mut acc = KahanSum::default();
        for k in 1..=m {
            acc.add(self.t(k).powi(-(j as i32)));
        }
        acc.value()
    }

    /// sum_{k > M} t_k^{-j}, by direct summation to a cut-off followed by an
    /// Euler–Maclaurin tail.
    pub fn tail_sum(&self, m: u64, j: u32) -> Result<f64> {
        let (shift, exponent) = match *self {
            ParamSeq::Linear { beta } => (beta, j as f64),
            ParamSeq::Power { alpha } => (0.0, alpha * j as f64),
            ParamSeq::Constant { .. } => return Err(Error::invalid("series over a constant sequence diverges")),
        };
        if exponent <= 1.0 {
            return Err(Error::invalid(format!("sum of t_k^-{j} diverges for {self:?}")));
        }
        let cut = m.max(200) + 1;
        let mut acc = KahanSum::default();
        for k in (m + 1)..cut {
            acc.add(self.t(k).powi(-(j as i32)));
        }
        acc.add(power_tail(cut as f64 + shift, exponent));
        Ok(acc.value())
    }

    /// sum_{k >= 1} t_k^{-j}.
    pub fn series_sum(&self, j: u32) -> Result<f64> {
        self.tail_sum(0, j)
    }

    /// c_{N,r} = c_{N+r}^{(1)} + c_{N-r}^{(1)}.
    pub fn centering(&self, n: u64, r: i64) -> Result<f64> {
        if r.unsigned_abs() >= n {
            return Err(Error::invalid(format!("centering needs |r| < N, got N={n}, r={r}")));
        }
        let hi = (n as i64 + r) as u64;
        let lo = (n as i64 - r) as u64;
        Ok(self.partial_sum(hi, 1) + self.partial_sum(lo, 1))
    }
}

/// sum_{k >= 0} (x0 + k)^{-s} for s > 1, x0 >= ~100, via Euler–Maclaurin.
fn power_tail(x0: f64, s: f64) -> f64 {
    // B_{2p} / (2p)!
    const COEF: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
        1.0 / 74724249600.0,
    ];
    let f0 = x0.powf(-s);
    let mut total = x0.powf(1.0 - s) / (s - 1.0) + 0.5 * f0;
    // odd derivatives f^{(2p-1)}(x0) = -(s)_{2p-1} x0^{-s-2p+1}
    let mut rising = s; // (s)_1
    let mut pow = f0 / x0;
    for (p, c) in COEF.iter().enumerate() {
        let deriv = -rising * pow;
        total -= c * deriv;
        let n = 2 * p as u32 + 1;
        rising *= (s + n as f64) * (s + n as f64 + 1.0);
        pow /= x0 * x0;
    }
    total
}

/// sum_{k >= 1} beta / (k (k + beta)) = psi(1 + beta) + gamma, accelerated
/// with an Euler–Maclaurin tail.
pub fn digamma_series(beta: f64) -> f64 {
    if beta == 0.0 {
        return 0.0;
    }
    let cut = 400u32;
    let mut acc = KahanSum::default();
    for k in 1..cut {
        let k = k as f64;
        acc.add(beta / (k * (k + beta)));
    }
    // tail of f(x) = 1/x - 1/(x+beta) from x0 = cut
    let x0 = cut as f64;
    let f = |x: f64| 1.0 / x - 1.0 / (x + beta);
    let mut tail = (1.0 + beta / x0).ln() + 0.5 * f(x0);
    const COEF: [f64; 5] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
    ];
    let mut fact = 1.0; // (2p-1)!
    for (p, c) in COEF.iter().enumerate() {
        let n = 2 * p as i32 + 1;
        if p > 0 {
            fact *= (n - 1) as f64 * n as f64;
        }
        // d^n/dx^n [x^-1] = (-1)^n n! x^{-n-1}
        let deriv = -fact * (x0.powi(-n - 1) - (x0 + beta).powi(-n - 1));
        tail -= c * deriv;
    }
    acc.add(tail);
    acc.value()
}

/// psi(1 + beta), the shift between the `c_{N,0}` and `2 log N` centerings
/// is twice this value.
pub fn digamma_one_plus(beta: f64) -> f64 {
    digamma_series(beta) - EULER_GAMMA
}

/// Two-branch approximation of sum_{j=m}^n j^{-2 alpha}. `n = None` means
/// n -> infinity. At alpha = 1/2 the branches degenerate to log(n/m).
pub fn variance_heuristic(alpha: f64, m: u64, n: Option<u64>) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if m < 1 || n.is_some_and(|n| n < m) {
        return Err(Error::invalid("variance heuristic needs 1 <= m <= n"));
    }
    let mf = m as f64;
    let e = 1.0 - 2.0 * alpha;
    if e == 0.0 {
        return Ok(match n {
            Some(n) => (n as f64 / mf).ln(),
            None => f64::INFINITY,
        });
    }
    let n_pow = match n {
        Some(n) => (n as f64).powf(e),
        None if e < 0.0 => 0.0,
        None => f64::INFINITY,
    };
    Ok(if alpha > 0.5 {
        (mf.powf(e) - n_pow) / (2.0 * alpha - 1.0)
    } else {
        (n_pow - mf.powf(e)) / e
    })
}

/// Which line-index map to use in the intermediate regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineScaling {
    /// r = [N tau] (as stated in the theorem for 1/3 < alpha < 1/2).
    Theorem,
    /// r = [tau N^{2 alpha}] (as used in the convergence argument).
    Proof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Linear sequences and alpha > 1/2: trivial extended process.
    CaseA,
    /// 1/3 < alpha <= 1/2: Gaussian-coupled non-universal process.
    CaseB,
    /// alpha <= 1/3: Airy process.
    CaseC,
}

/// Scaling of the line index and fluctuation scale for a given N.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScalingPlan {
    pub regime: Regime,
    pub seq: ParamSeq,
    pub n: u64,
    /// Fluctuation scale d_N (1 outside the Airy regime).
    pub d_n: f64,
}

impl ScalingPlan {
    pub fn new(seq: ParamSeq, n: u64) -> Result<Self> {
        seq.validate()?;
        if n < 2 {
            return Err(Error::invalid("scaling plan needs N >= 2"));
        }
        let nf = n as f64;
        let (regime, d_n) = match seq {
            ParamSeq::Linear { .. } => (Regime::CaseA, 1.0),
            ParamSeq::Power { alpha } if alpha > 0.5 => (Regime::CaseA, 1.0),
            ParamSeq::Power { alpha } if alpha > 1.0 / 3.0 => (Regime::CaseB, 1.0),
            ParamSeq::Power { alpha } if (alpha - 1.0 / 3.0).abs() < 1e-15 => (Regime::CaseC, (2.0 * nf.ln()).cbrt()),
            ParamSeq::Power { alpha } => (
                Regime::CaseC,
                2f64.cbrt() * (1.0 - 3.0 * alpha).powf(-1.0 / 3.0) * nf.powf(1.0 / 3.0 - alpha),
            ),
            ParamSeq::Constant { .. } => return Err(Error::invalid("no scaling plan for the constant sequence")),
        };
        Ok(Self { regime, seq, n, d_n })
    }

    fn alpha(&self) -> f64 {
        match self.seq {
            ParamSeq::Power { alpha } => alpha,
            _ => 1.0,
        }
    }

    /// Line index r for the slow variable tau.
    pub fn line_index(&self, tau: f64, scaling: LineScaling) -> i64 {
        let nf = self.n as f64;
        let a = self.alpha();
        let r = match self.regime {
            Regime::CaseA => nf * tau,
            Regime::CaseB if a == 0.5 => nf * tau.tanh(),
            Regime::CaseB => match scaling {
                LineScaling::Theorem => nf * tau,
                LineScaling::Proof => tau * nf.powf(2.0 * a),
            },
            Regime::CaseC => self.d_n * self.d_n * nf.powf(2.0 * a) * tau,
        };
        r.floor() as i64
    }

    pub fn centering(&self, r: i64) -> Result<f64> {
        self.seq.centering(self.n, r)
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn t_examples() {
        assert_eq!(ParamSeq::linear(0.5).unwrap().t(3), 3.5);
        assert_eq!(ParamSeq::power(0.5).unwrap().t(4), 2.0);
        assert_eq!(ParamSeq::power(1.0).unwrap().t(7), 7.0);
        assert_eq!(ParamSeq::linear(0.0).unwrap().t(7), 7.0);
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(ParamSeq::linear(-1.0).is_err());
        assert!(ParamSeq::power(0.0).is_err());
        assert!(ParamSeq::power(1.2).is_err());
        assert!(ParamSeq::constant(0.0).is_err());
    }

    #[test]
    fn counting_examples() {
        assert_eq!(ParamSeq::power(0.5).unwrap().counting(3.0), 9);
        assert_eq!(ParamSeq::linear(0.0).unwrap().counting(4.7), 4);
        assert_eq!(ParamSeq::linear(0.0).unwrap().counting(0.5), 0);
        assert_eq!(ParamSeq::power(0.3).unwrap().counting(0.5), 0);
        assert_eq!(ParamSeq::linear(-0.5).unwrap().counting(0.4), 0);
        assert_eq!(ParamSeq::linear(-0.5).unwrap().counting(0.5), 1);
    }

    #[test]
    fn counting_inverts_t() {
        for seq in [
            ParamSeq::power(0.3).unwrap(),
            ParamSeq::power(0.45).unwrap(),
            ParamSeq::power(1.0 / 3.0).unwrap(),
            ParamSeq::linear(0.7).unwrap(),
        ] {
            for i in 1..=10_000u64 {
                assert!(seq.counting(seq.t(i)) >= i, "{seq:?} i={i}");
            }
        }
    }

    #[test]
    fn partial_sum_examples() {
        let seq = ParamSeq::linear(0.0).unwrap();
        assert!((seq.partial_sum(3, 1) - 11.0 / 6.0).abs() < 1e-15);
        assert_eq!(seq.partial_sum(0, 3), 0.0);
        let z2 = seq.series_sum(2).unwrap();
        assert!((z2 - PI * PI / 6.0).abs() < 1e-10, "{z2}");
    }

    #[test]
    fn tail_sum_against_brute_force() {
        // direct sum far out plus the integral remainder as an independent oracle
        let seq = ParamSeq::power(0.75).unwrap();
        let m = 10u64;
        let cut = 2_000_000u64;
        let direct: f64 = ((m + 1)..=cut).map(|k| seq.t(k).powi(-3)).sum();
        let s = 2.25;
        let rem = (cut as f64 + 0.5).powf(1.0 - s) / (s - 1.0);
        let tail = seq.tail_sum(m, 3).unwrap();
        assert!((tail - direct - rem).abs() < 1e-12, "{tail} vs {}", direct + rem);
        assert!(ParamSeq::power(0.5).unwrap().tail_sum(0, 2).is_err());
    }

    #[test]
    fn centering_examples() {
        let seq = ParamSeq::linear(0.0).unwrap();
        assert!((seq.centering(2, 0).unwrap() - 3.0).abs() < 1e-15);
        assert!((seq.centering(2, 1).unwrap() - 17.0 / 6.0).abs() < 1e-15);
        assert!(seq.centering(2, 2).is_err());
        assert!(seq.centering(2, -2).is_err());
    }

    #[test]
    fn centering_symmetric_and_decreasing() {
        for beta in [0.0, 0.5, 3.0] {
            let seq = ParamSeq::linear(beta).unwrap();
            let n = 40;
            let mut prev = f64::INFINITY;
            for r in 0..40i64 {
                let c = seq.centering(n, r).unwrap();
                assert_eq!(c, seq.centering(n, -r).unwrap());
                assert!(c < prev);
                prev = c;
            }
        }
    }

    #[test]
    fn digamma_values() {
        // psi(1) = -gamma, psi(2) = 1 - gamma, psi(3/2) = 2 - gamma - 2 ln 2
        assert!((digamma_one_plus(0.0) + EULER_GAMMA).abs() < 1e-15);
        assert!((digamma_one_plus(1.0) - (1.0 - EULER_GAMMA)).abs() < 1e-13);
        let v = digamma_one_plus(0.5);
        assert!((v - (2.0 - EULER_GAMMA - 2.0 * 2f64.ln())).abs() < 1e-13, "{v}");
        // sum 1/(k(k+1)) = 1
        assert!((digamma_series(1.0) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn variance_heuristic_examples() {
        assert!((variance_heuristic(1.0, 1, None).unwrap() - 1.0).abs() < 1e-15);
        assert!((variance_heuristic(0.25, 1, Some(16)).unwrap() - 6.0).abs() < 1e-12);
        assert!(variance_heuristic(0.0, 1, Some(3)).is_err());
        assert!(variance_heuristic(1.5, 1, Some(3)).is_err());
        assert!(variance_heuristic(0.25, 5, Some(3)).is_err());
    }

    #[test]
    fn variance_heuristic_tracks_direct_sum() {
        // direct-sum oracle, away from the degenerate m = n end
        for alpha in [0.2, 0.4, 0.5, 0.7, 1.0] {
            let (m, n) = (10u64, 1000u64);
            let direct: f64 = (m..=n).map(|j| (j as f64).powf(-2.0 * alpha)).sum();
            let h = variance_heuristic(alpha, m, Some(n)).unwrap();
            assert!(h > direct / 2.0 && h < direct * 2.0, "alpha={alpha} {h} vs {direct}");
        }
    }

    #[test]
    fn scaling_plan_regimes() {
        let p = ScalingPlan::new(ParamSeq::power(1.0 / 3.0).unwrap(), 1000).unwrap();
        assert_eq!(p.regime, Regime::CaseC);
        assert!((p.d_n - (2.0 * 1000f64.ln()).cbrt()).abs() < 1e-14);
        let p = ScalingPlan::new(ParamSeq::power(0.1).unwrap(), 1000).unwrap();
        let expect = 2f64.cbrt() * (0.7f64).powf(-1.0 / 3.0) * 1000f64.powf(1.0 / 3.0 - 0.1);
        assert!((p.d_n - expect).abs() < 1e-12);
        let p = ScalingPlan::new(ParamSeq::power(0.5).unwrap(), 100).unwrap();
        assert_eq!(p.regime, Regime::CaseB);
        assert_eq!(
            p.line_index(0.5, LineScaling::Theorem),
            (100.0 * 0.5f64.tanh()).floor() as i64
        );
        let p = ScalingPlan::new(ParamSeq::power(0.45).unwrap(), 200).unwrap();
        assert_eq!(p.line_index(0.5, LineScaling::Theorem), 100);
        assert_eq!(
            p.line_index(0.5, LineScaling::Proof),
            (0.5 * 200f64.powf(0.9)).floor() as i64
        );
        assert_eq!(
            ScalingPlan::new(ParamSeq::linear(0.0).unwrap(), 10).unwrap().regime,
            Regime::CaseA
        );
    }

    proptest! {
        #[test]
        fn partial_sum_additive(m in 1u64..3000, j in 1u32..4, alpha in 0.05f64..1.0) {
            let seq = ParamSeq::power(alpha).unwrap();
            let a = seq.partial_sum(m, j);
            let b = seq.partial_sum(m - 1, j) + seq.t(m).powi(-(j as i32));
            prop_assert!((a - b).abs() <= 4.0 * f64::EPSILON * a.abs());
        }

        #[test]
        fn t_positive_nondecreasing(i in 1u64..1_000_000, alpha in 0.01f64..1.0, beta in -0.99f64..10.0) {
            for seq in [ParamSeq::power(alpha).unwrap(), ParamSeq::linear(beta).unwrap()] {
                prop_assert!(seq.t(i) > 0.0);
                prop_assert!(seq.t(i + 1) >= seq.t(i));
            }
        }
    }
}
