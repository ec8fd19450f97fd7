//! Airy function Ai and its derivative on [-40, 200].
//!
//! Paths: Maclaurin series on [-5, 2]; on x > 2 the steepest-descent
//! integral through the saddle at sqrt(x),
//!   Ai(x)  = e^{-zeta} / pi * int_0^inf e^{-sqrt(x) s^2} cos(s^3/3) ds,
//!   Ai'(x) = -e^{-zeta} / pi * int_0^inf e^{-sqrt(x) s^2} (sqrt(x) cos(s^3/3) + s sin(s^3/3)) ds,
//! zeta = 2 x^{3/2} / 3; on [-40, -5) Taylor steps of the Airy equation
//! from a table of anchors spaced 1/4 apart.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;

pub const AIRY_RANGE: (f64, f64) = (-40.0, 200.0);

const AI0: f64 = 0.355_028_053_887_817_2;
const AIP0: f64 = -0.258_819_403_792_806_8;
const ANCHOR_STEP: f64 = 0.25;

pub fn airy(x: f64) -> Result<f64> {
    airy_pair(x).map(|p| p.0)
}

/// (Ai(x), Ai'(x)).
pub fn airy_pair(x: f64) -> Result<(f64, f64)> {
    if !(x >= AIRY_RANGE.0 && x <= AIRY_RANGE.1) {
        return Err(Error::OutOfRange {
            what: "airy",
            value: x,
            lo: AIRY_RANGE.0,
            hi: AIRY_RANGE.1,
        });
    }
    Ok(if x > 2.0 {
        saddle(x)
    } else if x >= -5.0 {
        maclaurin(x)
    } else {
        from_anchor(x)
    })
}

pub(crate) fn maclaurin(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    let x2 = x * x;
    // f = sum a_k, g = sum b_k; f' and g' from the same recursions
    let (mut a, mut b) = (1.0, x);
    let (mut f, mut g) = (1.0, x);
    let (mut fp, mut gp) = (0.0, 1.0);
    let mut k = 1.0f64;
    loop {
        let da = a * x2 / (3.0 * k - 1.0);
        let db = b * x2 / (3.0 * k);
        a *= x3 / ((3.0 * k - 1.0) * (3.0 * k));
        b *= x3 / ((3.0 * k) * (3.0 * k + 1.0));
        f += a;
        g += b;
        fp += da;
        gp += db;
        if (a.abs() + b.abs() + da.abs() + db.abs()) < 1e-18 * (f.abs() + g.abs() + 1e-300) || k > 200.0 {
            break;
        }
        k += 1.0;
    }
    (AI0 * f + AIP0 * g, AI0 * fp + AIP0 * gp)
}

fn saddle_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(24))
}

pub(crate) fn saddle(x: f64) -> (f64, f64) {
    let sx = x.sqrt();
    let zeta = 2.0 / 3.0 * x * sx;
    // e^{-sqrt(x) s^2} < e^{-42} beyond s_max
    let s_max = (42.0 / sx).sqrt();
    let panels = 24;
    let h = s_max / panels as f64;
    let rule = saddle_rule();
    let (mut ia, mut ip) = (0.0, 0.0);
    for p in 0..panels {
        let a = p as f64 * h;
        for (s, w) in rule.mapped(a, a + h) {
            let damp = (-sx * s * s).exp();
            let (sn, cs) = (s * s * s / 3.0).sin_cos();
            ia += w * damp * cs;
            ip += w * damp * (sx * cs + s * sn);
        }
    }
    let pre = (-zeta).exp() / std::f64::consts::PI;
    (pre * ia, -pre * ip)
}

/// Taylor step of y'' = x y from (x0, y, y') to x0 + h.
fn taylor_step(x0: f64, y: f64, yp: f64, h: f64) -> (f64, f64) {
    // c_{n+2} = (x0 c_n + c_{n-1}) / ((n+2)(n+1)), c_2 = x0 c_0 / 2
    let mut c = [y, yp, 0.5 * x0 * y];
    let mut val = y + h * (yp + h * c[2]);
    let mut der = yp + 2.0 * h * c[2];
    let mut hp = h * h; // h^n for the newest c_n
    let mut small = 0;
    for n in 1..200usize {
        let next = (x0 * c[1] + c[0]) / ((n + 2) as f64 * (n + 1) as f64);
        der += (n + 2) as f64 * next * hp;
        hp *= h;
        val += next * hp;
        c = [c[1], c[2], next];
        small = if (next * hp).abs() < 1e-19 * (1.0 + val.abs()) {
            small + 1
        } else {
            0
        };
        if small >= 3 {
            break;
        }
    }
    (val, der)
}

fn anchors() -> &'static Vec<(f64, f64)> {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let count = (-AIRY_RANGE.0 / ANCHOR_STEP).round() as usize;
        let mut out = Vec::with_capacity(count + 1);
        let (mut y, mut yp) = (AI0, AIP0);
        out.push((y, yp));
        for j in 0..count {
            let x0 = -(j as f64) * ANCHOR_STEP;
            (y, yp) = taylor_step(x0, y, yp, -ANCHOR_STEP);
            out.push((y, yp));
        }
        out
    })
}

pub(crate) fn from_anchor(x: f64) -> (f64, f64) {
    let table = anchors();
    let j = ((-x / ANCHOR_STEP).round() as usize).min(table.len() - 1);
    let x0 = -(j as f64) * ANCHOR_STEP;
    let (y, yp) = table[j];
    taylor_step(x0, y, yp, x - x0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn value_at_zero() {
        // 3^{-2/3} / Gamma(2/3)
        let oracle = 3f64.powf(-2.0 / 3.0) / statrs::function::gamma::gamma(2.0 / 3.0);
        assert!((airy(0.0).unwrap() - oracle).abs() < 1e-16);
        assert!((airy(0.0).unwrap() - 0.355_028_053_887_817_2).abs() < 1e-16);
    }

    #[test]
    fn out_of_range() {
        assert!(airy(-40.5).is_err());
        assert!(airy(201.0).is_err());
        assert!(airy(f64::NAN).is_err());
    }

    #[test]
    fn reference_values() {
        let cases = [
            (-25.0, 0.16352657883043045),
            (-7.3, 0.3357703705151474),
            (-2.0, 0.22740742820168564),
            (1.0, 0.13529241631288147),
            (3.0, 0.006591139357460717),
            (10.0, 1.1047532552898654e-10),
        ];
        for (x, want) in cases {
            let got = airy(x).unwrap();
            assert!((got - want).abs() < 1e-10 * want.abs(), "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn ode_residual() {
        // fourth-order central second difference at h = 1e-3
        let h = 1e-3;
        let f = |t: f64| airy(t).unwrap();
        for x in [-2.0, 0.0, 3.0, -7.3, -25.0, 10.0] {
            let d2 =
                (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h);
            assert!((d2 - x * f(x)).abs() < 1e-8, "x={x}: {}", d2 - x * f(x));
        }
    }

    #[test]
    fn derivative_matches_differences() {
        for x in [-30.0, -12.0, -4.0, 0.5, 2.5, 8.0] {
            let h = 1e-5;
            let fd = (airy(x + h).unwrap() - airy(x - h).unwrap()) / (2.0 * h);
            let d = airy_pair(x).unwrap().1;
            assert!((fd - d).abs() < 1e-7 * (1.0 + d.abs()), "x={x}: {fd} vs {d}");
        }
    }

    #[test]
    fn paths_agree_at_switch_points() {
        for x in [1.5, 2.0, 2.5, 3.0] {
            let (a, ap) = maclaurin(x);
            let (b, bp) = saddle(x);
            assert!((a - b).abs() < 1e-12 * b.abs(), "x={x}");
            assert!((ap - bp).abs() < 1e-12 * bp.abs(), "x={x}");
        }
        for x in [-4.0, -5.0, -6.0] {
            let (a, ap) = maclaurin(x);
            let (b, bp) = from_anchor(x);
            assert!((a - b).abs() < 1e-12 && (ap - bp).abs() < 1e-12, "x={x}");
        }
    }

    fn u_coeffs(n: usize) -> Vec<f64> {
        let mut u = vec![1.0];
        for k in 1..n {
            let kf = k as f64;
            let prev = u[k - 1];
            u.push(prev * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf));
        }
        u
    }

    #[test]
    fn asymptotic_oracles() {
        let u = u_coeffs(12);
        for x in [15.0f64, 40.0, 90.0] {
            let zeta = 2.0 / 3.0 * x.powf(1.5);
            let s: f64 = u
                .iter()
                .enumerate()
                .map(|(k, c)| (-1f64).powi(k as i32) * c / zeta.powi(k as i32))
                .sum();
            let want = (-zeta).exp() / (2.0 * PI.sqrt() * x.powf(0.25)) * s;
            let got = airy(x).unwrap();
            assert!((got - want).abs() < 1e-10 * want, "x={x}: {got} vs {want}");
        }
        for x in [15.0f64, 22.0, 38.0] {
            let zeta = 2.0 / 3.0 * x.powf(1.5);
            let (mut p, mut q) = (0.0, 0.0);
            for (k, c) in u.iter().enumerate() {
                let term = c / zeta.powi(k as i32);
                match k % 4 {
                    0 => p += term,
                    1 => q += term,
                    2 => p -= term,
                    _ => q -= term,
                }
            }
            let want = (PI.sqrt() * x.powf(0.25)).recip() * ((zeta - PI / 4.0).cos() * p + (zeta - PI / 4.0).sin() * q);
            let got = airy(-x).unwrap();
            assert!((got - want).abs() < 1e-11, "x=-{x}: {got} vs {want}");
        }
    }

    #[test]
    fn large_argument_underflows_cleanly() {
        let v = airy(200.0).unwrap();
        assert!((0.0..1e-300).contains(&v));
    }
}
