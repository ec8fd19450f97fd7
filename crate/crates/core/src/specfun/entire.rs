use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::ParamSeq;

/// log E(z; p) = log(1 - z) + z + z^2/2 + ... + z^p/p, principal branch.
pub fn primary_factor_log(z: Complex64, p: u32) -> Result<Complex64> {
    if z == Complex64::new(1.0, 0.0) {
        return Err(Error::Pole("log E(z; p) at z = 1".into()));
    }
    if z.norm() <= 0.5 {
        Ok(primary_series(z, p))
    } else {
        Ok(primary_direct(z, p))
    }
}

/// -sum_{j > p} z^j / j, for |z| <= 1/2.
fn primary_series(z: Complex64, p: u32) -> Complex64 {
    let mut pow = z.powu(p + 1);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut j = p + 1;
    loop {
        let term = pow / j as f64;
        sum -= term;
        if term.norm() <= 1e-18 * sum.norm() || j > 200 {
            return sum;
        }
        pow *= z;
        j += 1;
    }
}

fn primary_direct(z: Complex64, p: u32) -> Complex64 {
    let mut sum = (1.0 - z).ln();
    let mut pow = Complex64::new(1.0, 0.0);
    for j in 1..=p {
        pow *= z;
        sum += pow / j as f64;
    }
    sum
}

/// H_M(z) = sum_{k=1}^M log E(-z / t_k; 1).
pub fn h_m(seq: &ParamSeq, m: u64, z: Complex64) -> Result<Complex64> {
    let t: Vec<f64> = (1..=m).map(|k| seq.t(k)).collect();
    h_sum(&t, z)
}

/// sum_k log E(-z / t_k; 1) over the given parameters.
pub fn h_sum(t: &[f64], z: Complex64) -> Result<Complex64> {
    let mut sum = Complex64::new(0.0, 0.0);
    for (k, &t) in t.iter().enumerate() {
        let u = -z / t;
        if u == Complex64::new(1.0, 0.0) {
            return Err(Error::Pole(format!("H_M at z = -t_{}", k + 1)));
        }
        sum += if u.norm() <= 0.5 {
            primary_series(u, 1)
        } else {
            primary_direct(u, 1)
        };
    }
    Ok(sum)
}

/// Value of a canonical product, with log kept when finite.
#[derive(Debug, Clone, Copy)]
pub struct ProductValue {
    pub value: Complex64,
    /// log G(z); `None` on the zero set.
    pub log: Option<Complex64>,
    /// Terms multiplied explicitly before the tail series takes over.
    pub terms: u64,
}

/// Evaluator of G(z) = prod_k E(z / t_k; g) on a disc |z| <= radius.
///
/// The first M factors (M chosen so that radius / t_{M+1} <= 1/2) are summed
/// in log space; the rest enter through -sum_{j > g} z^j zeta_M(j) / j with
/// zeta_M(j) = sum_{k > M} t_k^{-j}, precomputed once.
#[derive(Debug, Clone)]
pub struct CanonicalProduct {
    genus: u32,
    t: Vec<f64>,
    zeta: Vec<f64>,
    radius: f64,
}

impl CanonicalProduct {
    pub fn new(seq: &ParamSeq, genus: u32, radius: f64, tol: f64) -> Result<Self> {
        Self::with_min_terms(seq, genus, radius, tol, 16)
    }

    pub fn with_min_terms(seq: &ParamSeq, genus: u32, radius: f64, tol: f64, min_terms: u64) -> Result<Self> {
        seq.validate()?;
        if !(1..=3).contains(&genus) {
            return Err(Error::invalid(format!("genus must be 1, 2 or 3, got {genus}")));
        }
        let decay = match *seq {
            ParamSeq::Linear { .. } => 1.0,
            ParamSeq::Power { alpha } => alpha,
            ParamSeq::Constant { .. } => 0.0,
        };
        if (genus + 1) as f64 * decay <= 1.0 {
            return Err(Error::invalid(format!(
                "sum of t_k^-{} diverges; genus {genus} product does not converge for {seq:?}",
                genus + 1
            )));
        }
        if !(radius >= 0.0) || !(tol > 0.0) {
            return Err(Error::invalid("radius must be >= 0 and tol > 0"));
        }
        let m = seq.counting(2.0 * radius).max(min_terms);
        let t: Vec<f64> = (1..=m).map(|k| seq.t(k)).collect();
        let q = radius / seq.t(m + 1);
        // |tail| <= zeta_M(j) |z|^j / j <= n_eff q^j, keep j until that is below tol
        let mut zeta = Vec::new();
        let mut j = genus + 1;
        loop {
            let z = seq.tail_sum(m, j)?;
            zeta.push(z);
            let bound = z * radius.powi(j as i32) / j as f64 / (1.0 - q);
            if bound < tol * 1e-3 || j > 400 {
                break;
            }
            j += 1;
        }
        Ok(Self { genus, t, zeta, radius })
    }

    pub fn terms(&self) -> u64 {
        self.t.len() as u64
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// log G(z); `None` when z is a zero.
    pub fn log(&self, z: Complex64) -> Result<Option<Complex64>> {
        if z.norm() > self.radius * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "|z| = {} outside the prepared radius {}",
                z.norm(),
                self.radius
            )));
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for &t in &self.t {
            let u = z / t;
            if u == Complex64::new(1.0, 0.0) {
                return Ok(None);
            }
            sum += if u.norm() <= 0.5 {
                primary_series(u, self.genus)
            } else {
                primary_direct(u, self.genus)
            };
        }
        let mut pow = z.powu(self.genus + 1);
        for (i, &zeta) in self.zeta.iter().enumerate() {
            let j = self.genus + 1 + i as u32;
            sum -= pow * zeta / j as f64;
            pow *= z;
        }
        Ok(Some(sum))
    }

    pub fn eval(&self, z: Complex64) -> Result<ProductValue> {
        let log = self.log(z)?;
        Ok(ProductValue {
            value: log.map_or(Complex64::new(0.0, 0.0), |l| l.exp()),
            log,
            terms: self.terms(),
        })
    }
}

/// G(z) = prod_k E(z / t_k; genus) at a single point.
pub fn canonical_product(seq: &ParamSeq, genus: u32, z: Complex64, tol: f64) -> Result<ProductValue> {
    CanonicalProduct::new(seq, genus, z.norm(), tol)?.eval(z)
}
