//! Exact counts behind the trace expansion of the two-line determinant.

use crate::error::{Error, Result};

/// Largest circle size m + r accepted by `circular_placements`.
pub const MAX_CIRCLE: u32 = 28;

/// C(n, k) in exact integer arithmetic.
pub fn binomial(n: u64, k: u64) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        // c * (n - i) is divisible by i + 1 after the multiplication
        c = c.checked_mul((n - i) as u128).ok_or(Error::Overflow("binomial"))? / (i + 1) as u128;
    }
    Ok(c)
}

/// Number of r-subsets of Z_{m+r} in which no two chosen points are
/// adjacent, counted by running through every r-subset.
pub fn circular_placements(m: u32, r: u32) -> Result<u64> {
    if m < 1 || r > m {
        return Err(Error::invalid(format!("need 1 <= m and 0 <= r <= m, got m={m}, r={r}")));
    }
    let size = m + r;
    if size > MAX_CIRCLE {
        return Err(Error::Resource(format!("circle of {size} points exceeds {MAX_CIRCLE}")));
    }
    if r == 0 {
        return Ok(1);
    }
    let full: u32 = if size == 32 { u32::MAX } else { (1u32 << size) - 1 };
    let mut mask: u32 = (1u32 << r) - 1;
    let mut count = 0u64;
    loop {
        let rot = ((mask << 1) | (mask >> (size - 1))) & full;
        if mask & rot == 0 {
            count += 1;
        }
        // next subset of the same size (Gosper)
        let c = mask & mask.wrapping_neg();
        let rr = mask + c;
        if rr > full || rr == 0 {
            break;
        }
        mask = (((rr ^ mask) >> 2) / c) | rr;
        if mask > full {
            break;
        }
    }
    Ok(count)
}

/// (sum_{k=0}^m C(n+k, n), C(n+m+1, n+1)).
pub fn hockey_stick(n: u64, m: u64) -> Result<(u128, u128)> {
    if n > 60 || m > 60 {
        return Err(Error::OutOfRange {
            what: "hockey stick n, m",
            value: n.max(m) as f64,
            lo: 0.0,
            hi: 60.0,
        });
    }
    let mut lhs: u128 = 0;
    for k in 0..=m {
        lhs = lhs
            .checked_add(binomial(n + k, n)?)
            .ok_or(Error::Overflow("hockey stick"))?;
    }
    Ok((lhs, binomial(n + m + 1, n + 1)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_placements() {
        assert_eq!(circular_placements(4, 2).unwrap(), 9);
        assert_eq!(circular_placements(3, 1).unwrap(), 4);
        assert_eq!(circular_placements(5, 0).unwrap(), 1);
        // one point on a circle of two: its gap to itself is 2
        assert_eq!(circular_placements(1, 1).unwrap(), 2);
        assert!(circular_placements(0, 0).is_err());
        assert!(circular_placements(15, 14).is_err());
    }

    #[test]
    fn placements_by_hand() {
        // m = 2, r = 2: circle of 4, the two antipodal pairs
        assert_eq!(circular_placements(2, 2).unwrap(), 2);
        // m = 3, r = 2: circle of 5 has 5 non-adjacent pairs
        assert_eq!(circular_placements(3, 2).unwrap(), 5);
    }

    #[test]
    fn placements_closed_form() {
        for m in 1..=12u32 {
            for r in 0..=m {
                let want = binomial(m as u64, r as u64).unwrap()
                    + if r >= 1 {
                        binomial(m as u64 - 1, r as u64 - 1).unwrap()
                    } else {
                        0
                    };
                assert_eq!(circular_placements(m, r).unwrap() as u128, want, "m={m} r={r}");
            }
        }
    }

    #[test]
    fn hockey() {
        assert_eq!(hockey_stick(2, 3).unwrap(), (20, 20));
        assert_eq!(hockey_stick(7, 0).unwrap(), (1, 1));
        assert_eq!(hockey_stick(0, 9).unwrap(), (10, 10));
        for n in 0..=60 {
            for m in 0..=60 {
                let (a, b) = hockey_stick(n, m).unwrap();
                assert_eq!(a, b);
            }
        }
        assert!(hockey_stick(61, 0).is_err());
    }

    #[test]
    fn binomial_rows() {
        assert_eq!(binomial(10, 3).unwrap(), 120);
        assert_eq!(binomial(3, 5).unwrap(), 0);
        for n in 1..=120u64 {
            for k in 1..n {
                let pascal = binomial(n - 1, k - 1).unwrap() + binomial(n - 1, k).unwrap();
                assert_eq!(binomial(n, k).unwrap(), pascal, "n={n} k={k}");
            }
        }
    }
}
