//! Bessel functions J_nu of real order nu in [0, 64] and argument x in [0, 1000].
//!
//! Ascending series for x <= 6, Hankel's expansion once x >= max(40, nu^2/2),
//! and Miller's backward recurrence in between, normalized with
//! (x/2)^mu / Gamma(1+mu) = sum_k (mu+2k) (mu+1)_{k-1} / k! J_{mu+2k}(x)
//! at the fractional order mu = nu - floor(nu).

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

pub const BESSEL_NU_MAX: f64 = 64.0;
pub const BESSEL_X_MAX: f64 = 1000.0;

fn check(nu: f64, x: f64) -> Result<()> {
    if !(0.0..=BESSEL_NU_MAX).contains(&nu) {
        return Err(Error::OutOfRange {
            what: "bessel order",
            value: nu,
            lo: 0.0,
            hi: BESSEL_NU_MAX,
        });
    }
    if !(0.0..=BESSEL_X_MAX).contains(&x) {
        return Err(Error::OutOfRange {
            what: "bessel argument",
            value: x,
            lo: 0.0,
            hi: BESSEL_X_MAX,
        });
    }
    Ok(())
}

pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    bessel_j_pair(nu, x).map(|p| p.0)
}

/// (J_nu(x), J_{nu+1}(x)).
pub fn bessel_j_pair(nu: f64, x: f64) -> Result<(f64, f64)> {
    check(nu, x)?;
    Ok(if x <= 6.0 {
        (series(nu, x), series(nu + 1.0, x))
    } else if x >= (0.5 * nu * nu).max(40.0) {
        (hankel(nu, x), hankel(nu + 1.0, x))
    } else {
        miller(nu, x)
    })
}

/// J'_nu(x) = (nu/x) J_nu(x) - J_{nu+1}(x).
pub fn bessel_j_prime(nu: f64, x: f64) -> Result<f64> {
    check(nu, x)?;
    if x == 0.0 {
        return if nu == 1.0 {
            Ok(0.5)
        } else if nu == 0.0 || nu > 1.0 {
            Ok(0.0)
        } else {
            Err(Error::Pole(format!("J'_{nu}(0) is infinite")))
        };
    }
    let (j, j1) = bessel_j_pair(nu, x)?;
    Ok(nu / x * j - j1)
}

pub(crate) fn series(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let lead = (nu * (0.5 * x).ln() - ln_gamma(nu + 1.0)).exp();
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * (nu + k));
        sum += term;
        if term.abs() < 1e-18 * sum.abs() || k > 300.0 {
            break;
        }
        k += 1.0;
    }
    lead * sum
}

pub(crate) fn hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let (mut p, mut q) = (1.0, 0.0);
    let mut a = 1.0; // a_k(nu) / x^k
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        a *= (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
        if a.abs() > prev || a == 0.0 {
            break;
        }
        prev = a.abs();
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let omega = x - (0.5 * nu + 0.25) * std::f64::consts::PI;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * omega.cos() - q * omega.sin())
}

pub(crate) fn miller(nu: f64, x: f64) -> (f64, f64) {
    let n_nu = nu.floor() as usize;
    let mu = nu - n_nu as f64;
    let start = (nu.max(x) + 60.0 + 10.0 * x.cbrt()).ceil() as usize;
    // normalization weights c_k = (mu+2k) (mu+1)_{k-1} / k!, k >= 1
    let half = start / 2 + 1;
    let mut weights = vec![1.0f64; half + 1];
    let mut p = 1.0; // (mu+1)_{k-1} / k!
    for (k, w) in weights.iter_mut().enumerate().skip(1) {
        if k > 1 {
            p *= (mu + (k - 1) as f64) / k as f64;
        }
        *w = (mu + 2.0 * k as f64) * p;
    }
    let (mut hi, mut cur) = (0.0f64, 1e-300f64); // J_{mu+n+1}, J_{mu+n}
    let mut norm = 0.0;
    let (mut at_nu, mut at_nu1) = (0.0, 0.0);
    let mut n = start;
    loop {
        if n == n_nu + 1 {
            at_nu1 = cur;
        }
        if n == n_nu {
            at_nu = cur;
        }
        if n.is_multiple_of(2) {
            norm += weights[n / 2] * cur;
        }
        if n == 0 {
            break;
        }
        let lower = 2.0 * (mu + n as f64) / x * cur - hi;
        hi = cur;
        cur = lower;
        n -= 1;
        if cur.abs() > 1e250 {
            let s = 1e-250;
            cur *= s;
            hi *= s;
            norm *= s;
            at_nu *= s;
            at_nu1 *= s;
        }
    }
    let lhs = (mu * (0.5 * x).ln() - ln_gamma(1.0 + mu)).exp();
    let scale = lhs / norm;
    (at_nu * scale, at_nu1 * scale)
}
