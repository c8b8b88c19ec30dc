//! Exact monochromatic Schur triple counts and the objectives `F` and `G`.
//!
//! The canonical triple is `(i, j, i + j)` with `1 <= i < j`, `i + j <= n`.
//! The classical reading that also admits `i = j` is only available through
//! the `include_equal` flag of [`count_naive`].

use serde::Serialize;

use crate::coloring::RColoring;
use crate::error::Result;
use crate::halfint::HalfInt;
use crate::ntt;

/// Monochromatic triple counts of one coloring, split by color.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TripleCount {
    pub n: usize,
    pub r: usize,
    pub per_color: Vec<u64>,
    pub total: u64,
}

impl TripleCount {
    fn from_per_color(n: usize, per_color: Vec<u64>) -> Self {
        let total = per_color.iter().sum();
        TripleCount {
            n,
            r: per_color.len(),
            per_color,
            total,
        }
    }

    /// Number of admissible pairs `i < j`, `i + j <= n`, i.e. `floor((n-1)^2 / 4)`.
    pub fn max_pairs(n: usize) -> u64 {
        let m = n.saturating_sub(1) as u64;
        m * m / 4
    }
}

/// Direct double loop over all admissible pairs.
pub fn count_naive(c: &RColoring, include_equal: bool) -> TripleCount {
    let n = c.n();
    let x = c.colors();
    let mut per_color = vec![0u64; c.r()];
    // positions are 1-based: x[p - 1] is the color of p
    for i in 1..=n / 2 {
        let ci = x[i - 1];
        if include_equal && x[2 * i - 1] == ci {
            per_color[ci as usize] += 1;
        }
        for j in (i + 1)..=(n - i) {
            if x[j - 1] == ci && x[i + j - 1] == ci {
                per_color[ci as usize] += 1;
            }
        }
    }
    TripleCount::from_per_color(n, per_color)
}

/// Same result as `count_naive(c, false)` in `O(r n log n)`.
///
/// For each color class `S`, the self-convolution of its indicator gives the
/// number of ordered pairs in `S x S` with each sum; removing the diagonal
/// `s/2` term and halving leaves the pairs `i < j`, which are summed over
/// `s in S`, `s <= n`.
pub fn count_fast(c: &RColoring) -> TripleCount {
    let n = c.n();
    let x = c.colors();
    let per_color = (0..c.r())
        .map(|color| {
            let color = color as u8;
            // index p holds position p; index 0 is unused
            let mut indicator = vec![0u64; n + 1];
            for (p, &cp) in x.iter().enumerate() {
                if cp == color {
                    indicator[p + 1] = 1;
                }
            }
            if indicator.iter().all(|&v| v == 0) {
                return 0;
            }
            let corr = ntt::self_convolve(&indicator, n + 1);
            (3..=n)
                .filter(|&s| x[s - 1] == color)
                .map(|s| {
                    let diagonal = (s % 2 == 0 && x[s / 2 - 1] == color) as u64;
                    (corr[s] - diagonal) / 2
                })
                .sum()
        })
        .collect();
    TripleCount::from_per_color(n, per_color)
}

// Below this size the double loop beats the transform.
const FAST_THRESHOLD: usize = 512;

pub(crate) fn count(c: &RColoring) -> TripleCount {
    if c.n() < FAST_THRESHOLD {
        count_naive(c, false)
    } else {
        count_fast(c)
    }
}

/// The objective `F`: number of monochromatic triples of a 2-coloring.
pub fn eval_f(c: &RColoring) -> Result<u64> {
    c.require_binary()?;
    Ok(count(c).total)
}

/// The surrogate `G = F + sum_{i <= n/2} x_i (x_{2i} - 1) - (1/2) sum_i x_i`.
pub fn eval_g(c: &RColoring) -> Result<HalfInt> {
    let f = eval_f(c)?;
    Ok(g_from_f(c, f))
}

pub(crate) fn g_from_f(c: &RColoring, f: u64) -> HalfInt {
    let x = c.colors();
    let n = c.n();
    let pair_term: i64 = (1..=n / 2)
        .map(|i| x[i - 1] as i64 * (x[2 * i - 1] as i64 - 1))
        .sum();
    let ones = c.ones() as i64;
    HalfInt::from_doubled(2 * f as i64 + 2 * pair_term - ones)
}
