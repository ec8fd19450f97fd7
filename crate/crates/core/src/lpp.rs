//! Exponential weight fields and max-plus last-passage times.
//!
//! Random fields draw from ChaCha8 with key derived from the seed and the
//! stream id set to the Monte Carlo substream. The weight w(i, j) always
//! occupies the same slot of the keystream (cells numbered along
//! anti-diagonals), so a rectangle sweep and an anti-diagonal sweep of the
//! same (seed, substream) see the same field.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ParamSeq;

/// Default per-realization cell budget, overridable with `LPPLAB_MAX_CELLS`.
pub const DEFAULT_MAX_CELLS: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seq: ParamSeq,
    pub m: u64,
    pub n: u64,
    pub seed: u64,
    pub samples: u64,
}

impl SimConfig {
    pub fn square(seq: ParamSeq, n: u64, seed: u64, samples: u64) -> Self {
        Self {
            seq,
            m: n,
            n,
            seed,
            samples,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.seq.validate()?;
        if self.m == 0 || self.n == 0 {
            return Err(Error::invalid("lattice dimensions must be positive"));
        }
        if self.samples == 0 {
            return Err(Error::invalid("samples must be >= 1"));
        }
        check_cells(self.m.saturating_mul(self.n))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LppResult {
    pub g: f64,
    /// (k, G(N + k, N - k)) for |k| < N, when requested.
    pub antidiagonal: Option<Vec<(i64, f64)>>,
    pub seed: u64,
    pub substream: u64,
}

/// Cell budget in force: `LPPLAB_MAX_CELLS` or the default.
pub fn max_cells() -> Result<u64> {
    match std::env::var("LPPLAB_MAX_CELLS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("LPPLAB_MAX_CELLS is not an integer: {v:?}"))),
        Err(_) => Ok(DEFAULT_MAX_CELLS),
    }
}

fn check_cells(cells: u64) -> Result<()> {
    let limit = max_cells()?;
    if cells > limit {
        return Err(Error::Resource(format!(
            "{cells} lattice cells exceed the budget of {limit} (LPPLAB_MAX_CELLS)"
        )));
    }
    Ok(())
}

/// Uniform on (0, 1] from the top 53 bits of a word.
#[inline]
pub fn unit_open_closed(bits: u64) -> f64 {
    ((bits >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Inverse-CDF exponential variate with the given rate from uniform `u` in (0, 1].
#[inline]
pub fn exponential_from_uniform(u: f64, rate: f64) -> f64 {
    -u.ln() / rate
}

/// One draw of w(i, j) from an arbitrary generator.
pub fn sample_weight<R: RngCore>(seq: &ParamSeq, i: u64, j: u64, rng: &mut R) -> f64 {
    exponential_from_uniform(unit_open_closed(rng.next_u64()), seq.t(i) + seq.t(j))
}

/// Generator for the given (seed, substream) at the start of the keystream.
pub fn substream_rng(seed: u64, substream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(substream);
    rng
}

/// Supplies the weights of one anti-diagonal i + j = d + 2 at a time.
pub trait WeightSource {
    /// Fills `out[k]` with w(i_lo + k, d + 2 - i_lo - k).
    fn fill_diagonal(&mut self, d: u64, i_lo: u64, out: &mut [f64]);
}

/// The seeded random field of a (seq, seed, substream) triple.
pub struct RandomField {
    t: Vec<f64>,
    rng: ChaCha8Rng,
}

impl RandomField {
    /// `extent` bounds every row and column index that will be requested.
    pub fn new(seq: &ParamSeq, extent: u64, seed: u64, substream: u64) -> Self {
        let mut t = Vec::with_capacity(extent as usize + 1);
        t.push(f64::NAN);
        t.extend((1..=extent).map(|i| seq.t(i)));
        Self {
            t,
            rng: substream_rng(seed, substream),
        }
    }
}

/// Keystream slot of w(i, j): cells numbered by anti-diagonal, then by i.
#[inline]
fn cell_index(d: u64, i: u64) -> u128 {
    let d = d as u128;
    d * (d + 1) / 2 + (i as u128 - 1)
}

impl WeightSource for RandomField {
    fn fill_diagonal(&mut self, d: u64, i_lo: u64, out: &mut [f64]) {
        // two 32-bit words per u64 draw
        self.rng.set_word_pos(2 * cell_index(d, i_lo));
        let s = d + 2;
        for (k, w) in out.iter_mut().enumerate() {
            let i = i_lo + k as u64;
            let rate = self.t[i as usize] + self.t[(s - i) as usize];
            *w = exponential_from_uniform(unit_open_closed(self.rng.next_u64()), rate);
        }
    }
}

/// A fully specified field, `w[i-1][j-1] = w(i, j)`.
pub struct FixedField<'a> {
    pub w: &'a [Vec<f64>],
}

impl WeightSource for FixedField<'_> {
    fn fill_diagonal(&mut self, d: u64, i_lo: u64, out: &mut [f64]) {
        let s = d + 2;
        for (k, w) in out.iter_mut().enumerate() {
            let i = i_lo + k as u64;
            *w = self.w[(i - 1) as usize][(s - i - 1) as usize];
        }
    }
}

/// Materializes the m x n block of a field (reference and test use).
pub fn materialize<S: WeightSource>(src: &mut S, m: u64, n: u64) -> Vec<Vec<f64>> {
    let mut w = vec![vec![0.0; n as usize]; m as usize];
    let mut buf = Vec::new();
    for d in 0..(m + n - 1) {
        let i_lo = (d + 2).saturating_sub(n).max(1);
        let i_hi = m.min(d + 1);
        buf.resize((i_hi + 1 - i_lo) as usize, 0.0);
        src.fill_diagonal(d, i_lo, &mut buf);
        for (k, &x) in buf.iter().enumerate() {
            let i = i_lo + k as u64;
            w[(i - 1) as usize][(d + 2 - i - 1) as usize] = x;
        }
    }
    w
}

/// G(m, n) by an anti-diagonal sweep keeping one frontier of length
/// min(m, n) + 1.
pub fn last_passage_streaming<S: WeightSource>(src: &mut S, m: u64, n: u64) -> f64 {
    assert!(m >= 1 && n >= 1);
    // frontier indexed by the shorter side; slot 0 is the zero boundary
    let by_row = m <= n;
    let len = m.min(n) as usize;
    let mut g = vec![0.0f64; len + 1];
    let mut buf = Vec::with_capacity(len);
    for d in 0..(m + n - 1) {
        let i_lo = (d + 2).saturating_sub(n).max(1);
        let i_hi = m.min(d + 1);
        buf.resize((i_hi + 1 - i_lo) as usize, 0.0);
        src.fill_diagonal(d, i_lo, &mut buf);
        if by_row {
            // g[i] = G(i, d + 1 - i) on entry; descending keeps g[i - 1] stale
            for i in (i_lo..=i_hi).rev() {
                let i = i as usize;
                g[i] = buf[i - i_lo as usize] + g[i].max(g[i - 1]);
            }
        } else {
            // g[j] = G(d + 1 - j, j); ascending i is descending j
            for (k, &w) in buf.iter().enumerate() {
                let j = (d + 2 - i_lo) as usize - k;
                g[j] = w + g[j].max(g[j - 1]);
            }
        }
    }
    g[len]
}

/// Full-matrix reference DP on `w[i-1][j-1]`.
pub fn last_passage_dense(w: &[Vec<f64>]) -> f64 {
    let m = w.len();
    let n = w[0].len();
    let mut g = vec![vec![0.0f64; n + 1]; m + 1];
    for i in 1..=m {
        for j in 1..=n {
            g[i][j] = w[i - 1][j - 1] + g[i - 1][j].max(g[i][j - 1]);
        }
    }
    g[m][n]
}

/// G(m, n) for one substream of the configured field.
pub fn last_passage(cfg: &SimConfig, substream: u64) -> Result<LppResult> {
    cfg.validate()?;
    let mut field = RandomField::new(&cfg.seq, cfg.m.max(cfg.n), cfg.seed, substream);
    Ok(LppResult {
        g: last_passage_streaming(&mut field, cfg.m, cfg.n),
        antidiagonal: None,
        seed: cfg.seed,
        substream,
    })
}

/// All of k -> G(N + k, N - k), |k| < N, from one shared field via a single
/// sweep of the triangle i + j <= 2N.
pub fn antidiagonal_from<S: WeightSource>(src: &mut S, big_n: u64) -> Vec<(i64, f64)> {
    assert!(big_n >= 1);
    let last = 2 * big_n - 2;
    let width = (2 * big_n - 1) as usize;
    let mut g = vec![0.0f64; width + 1];
    let mut buf = Vec::with_capacity(width);
    for d in 0..=last {
        buf.resize((d + 1) as usize, 0.0);
        src.fill_diagonal(d, 1, &mut buf);
        for i in (1..=(d + 1) as usize).rev() {
            g[i] = buf[i - 1] + g[i].max(g[i - 1]);
        }
    }
    // on diagonal i + j = 2N, slot i holds G(i, 2N - i); k = i - N
    (1..=width).map(|i| (i as i64 - big_n as i64, g[i])).collect()
}

pub fn antidiagonal_process(seq: &ParamSeq, big_n: u64, seed: u64, substream: u64) -> Result<Vec<(i64, f64)>> {
    seq.validate()?;
    if big_n < 2 {
        return Err(Error::invalid("anti-diagonal process needs N >= 2"));
    }
    check_cells(big_n.saturating_mul(2 * big_n))?;
    let mut field = RandomField::new(seq, 2 * big_n, seed, substream);
    Ok(antidiagonal_from(&mut field, big_n))
}

/// Runs `f(substream)` for substreams 0..samples on a pool of `workers`
/// threads (None = available parallelism); output sorted by substream.
pub fn run_substreams<T, F>(samples: u64, workers: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::invalid("workers must be >= 1"));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    pool.install(|| (0..samples).into_par_iter().map(&f).collect())
}

/// `samples` independent draws of G(m, n).
pub fn monte_carlo_gmn(cfg: &SimConfig, workers: Option<usize>) -> Result<Vec<f64>> {
    cfg.validate()?;
    run_substreams(cfg.samples, workers, |s| last_passage(cfg, s).map(|r| r.g))
}

/// `samples` independent anti-diagonal profiles G(N + k, N - k), N = cfg.n.
pub fn monte_carlo_antidiagonal(cfg: &SimConfig, workers: Option<usize>) -> Result<Vec<Vec<(i64, f64)>>> {
    cfg.validate()?;
    run_substreams(cfg.samples, workers, |s| {
        antidiagonal_process(&cfg.seq, cfg.n, cfg.seed, s)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin0() -> ParamSeq {
        ParamSeq::linear(0.0).unwrap()
    }

    #[test]
    fn first_draws_pinned() {
        let mut rng = substream_rng(42, 0);
        let got: Vec<u64> = (0..4).map(|_| rng.next_u64()).collect();
        assert_eq!(got, PINNED_SEED42);
    }

    // ChaCha8, key from seed_from_u64(42), stream 0
    const PINNED_SEED42: [u64; 4] = [
        12578764544318200737,
        17529487244874322312,
        7886285670807131020,
        11572758976476374866,
    ];

    #[test]
    fn uniform_endpoint() {
        assert_eq!(unit_open_closed(u64::MAX), 1.0);
        assert_eq!(exponential_from_uniform(1.0, 2.0), 0.0);
        assert!(unit_open_closed(0) > 0.0);
    }

    #[test]
    fn weight_moments() {
        let mut rng = substream_rng(7, 3);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_weight(&lin0(), 1, 1, &mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // Exp(2): sd(mean) = 0.5/sqrt(n), sd(sample variance) ~ sqrt(8/n)/4
        assert!((mean - 0.5).abs() < 3.0 * 0.5 / (n as f64).sqrt(), "{mean}");
        let var_se = 0.25 * (8.0f64 / n as f64).sqrt();
        assert!((var - 0.25).abs() < 3.0 * var_se, "{var}");
    }

    #[test]
    fn two_by_two_fixed() {
        let w = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        assert_eq!(last_passage_dense(&w), 8.0);
        assert_eq!(last_passage_streaming(&mut FixedField { w: &w }, 2, 2), 8.0);
        let one = vec![vec![2.5]];
        assert_eq!(last_passage_streaming(&mut FixedField { w: &one }, 1, 1), 2.5);
    }

    fn brute_force(w: &[Vec<f64>], i: usize, j: usize) -> f64 {
        // all up/right paths from (0,0) to (i,j)
        let here = w[i][j];
        let best = match (i, j) {
            (0, 0) => 0.0,
            (0, _) => brute_force(w, 0, j - 1),
            (_, 0) => brute_force(w, i - 1, 0),
            _ => brute_force(w, i - 1, j).max(brute_force(w, i, j - 1)),
        };
        here + best
    }

    #[test]
    fn dp_matches_path_enumeration() {
        for s in 0..5 {
            let w = materialize(&mut RandomField::new(&lin0(), 5, 11, s), 5, 5);
            let bf = brute_force(&w, 4, 4);
            let dp = last_passage_streaming(&mut RandomField::new(&lin0(), 5, 11, s), 5, 5);
            assert_eq!(dp, bf);
        }
    }

    #[test]
    fn streaming_equals_dense_on_rectangles() {
        let seq = ParamSeq::power(0.4).unwrap();
        for (s, (m, n)) in [(20, 20), (7, 20), (20, 7), (1, 9), (9, 1)].into_iter().enumerate() {
            let mut f = RandomField::new(&seq, 20, 5, s as u64);
            let w = materialize(&mut f, m, n);
            let dense = last_passage_dense(&w);
            let mut f = RandomField::new(&seq, 20, 5, s as u64);
            assert_eq!(last_passage_streaming(&mut f, m, n), dense, "{m}x{n}");
        }
    }

    #[test]
    fn field_is_shared_across_shapes() {
        let a = materialize(&mut RandomField::new(&lin0(), 8, 1, 2), 8, 8);
        let b = materialize(&mut RandomField::new(&lin0(), 8, 1, 2), 3, 6);
        for i in 0..3 {
            for j in 0..6 {
                assert_eq!(a[i][j], b[i][j]);
            }
        }
    }

    #[test]
    fn antidiagonal_matches_rectangles() {
        let seq = lin0();
        let big_n = 6;
        let prof = antidiagonal_process(&seq, big_n, 9, 4).unwrap();
        assert_eq!(prof.len(), 11);
        for &(k, v) in &prof {
            let m = (big_n as i64 + k) as u64;
            let n = (big_n as i64 - k) as u64;
            let mut f = RandomField::new(&seq, 2 * big_n, 9, 4);
            assert_eq!(last_passage_streaming(&mut f, m, n), v, "k={k}");
        }
    }

    #[test]
    fn antidiagonal_dominates_corner() {
        let seq = lin0();
        let prof = antidiagonal_process(&seq, 2, 3, 0).unwrap();
        let w = materialize(&mut RandomField::new(&seq, 4, 3, 0), 1, 1);
        assert_eq!(prof.iter().map(|p| p.0).collect::<Vec<_>>(), vec![-1, 0, 1]);
        for &(_, v) in &prof {
            assert!(v >= w[0][0]);
        }
    }

    #[test]
    fn monotone_in_shape_and_weights() {
        let seq = lin0();
        let w = materialize(&mut RandomField::new(&seq, 3, 8, 1), 3, 3);
        let g33 = last_passage_dense(&w);
        let g23 = last_passage_dense(&w[..2]);
        let g32 = last_passage_dense(&w.iter().map(|r| r[..2].to_vec()).collect::<Vec<_>>());
        assert!(g33 >= g23 && g33 >= g32);
        for i in 0..3 {
            for j in 0..3 {
                let mut v = w.clone();
                v[i][j] += 0.3;
                assert!(last_passage_dense(&v) >= g33);
            }
        }
    }

    #[test]
    fn monte_carlo_deterministic_and_worker_independent() {
        let cfg = SimConfig::square(lin0(), 16, 99, 40);
        let a = monte_carlo_gmn(&cfg, Some(1)).unwrap();
        let b = monte_carlo_gmn(&cfg, Some(3)).unwrap();
        let c = monte_carlo_gmn(&cfg, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        let one = SimConfig { samples: 1, ..cfg };
        let single = monte_carlo_gmn(&one, Some(1)).unwrap();
        assert_eq!(single, vec![last_passage(&cfg, 0).unwrap().g]);
    }

    #[test]
    fn rejects_zero_samples_and_huge_lattices() {
        let cfg = SimConfig {
            samples: 0,
            ..SimConfig::square(lin0(), 4, 1, 1)
        };
        assert!(cfg.validate().is_err());
        let cfg = SimConfig::square(lin0(), 1 << 20, 1, 1);
        assert!(matches!(cfg.validate(), Err(Error::Resource(_))));
    }
}
