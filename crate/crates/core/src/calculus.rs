//! Discrete partial derivatives `d_r f(x) = f(x) - f(x with bit r flipped)`
//! of `F` and `G`, by brute force and in closed form.
//!
//! With `S = sum x_i`, `P(m) = x_1 + .. + x_m`, `chi = [2r <= n]`:
//!
//! ```text
//! d_r F = (2x_r - 1) { S + P(n-r) - (n - floor(r/2)) - (1 - chi) - (2x_r - 1)
//!                      + x_r (1 - chi) + 1 - x_{r/2} [r even] - x_{2r} chi }
//! d_r G = (2x_r - 1) { S + P(n-r) - (n - floor(r/2)) - chi/2 } - chi/2 - 1/2
//! ```
//!
//! The `x_{r/2}` term of `d_r F` applies for every even `r`, not only for
//! `r <= n/2`: the excluded diagonal pair `(r/2, r/2)` exists whenever `r` is
//! even. Placing it under the `chi` guard disagrees with the flip oracle.

use serde::Serialize;

use crate::coloring::RColoring;
use crate::counting::{count, g_from_f};
use crate::error::{Error, Result};
use crate::halfint::HalfInt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Objective {
    F,
    G,
}

/// Oracle and closed-form derivatives at one index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeltaReport {
    pub r: usize,
    pub delta_f: i64,
    pub delta_g: HalfInt,
    pub closed_form_f: i64,
    pub closed_form_g: HalfInt,
    pub agree: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalMinCertificate {
    pub coloring: RColoring,
    pub objective: Objective,
    /// `deltas[r - 1]` is `d_r` of the objective.
    pub deltas: Vec<HalfInt>,
    pub is_local_min: bool,
    pub k: usize,
    pub w: i64,
}

fn check_index(c: &RColoring, r: usize) -> Result<()> {
    if r == 0 || r > c.n() {
        Err(Error::IndexOutOfRange { index: r, n: c.n() })
    } else {
        Ok(())
    }
}

fn objective_value(c: &RColoring, objective: Objective) -> HalfInt {
    let f = count(c).total;
    match objective {
        Objective::F => HalfInt::from_int(f as i64),
        Objective::G => g_from_f(c, f),
    }
}

/// Oracle: two full evaluations of the objective.
pub fn flip_delta(c: &RColoring, r: usize, objective: Objective) -> Result<HalfInt> {
    c.require_binary()?;
    check_index(c, r)?;
    let flipped = c.flipped(r)?;
    Ok(objective_value(c, objective) - objective_value(&flipped, objective))
}

/// The local quantities the closed forms depend on.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Site {
    pub n: i64,
    pub r: i64,
    /// `S = sum x_i`
    pub total: i64,
    /// `P(n - r)`
    pub prefix: i64,
    pub x_r: i64,
    /// `x_{r/2}` for even `r`, else 0
    pub x_half: i64,
    /// `x_{2r}` when `2r <= n`, else 0
    pub x_double: i64,
}

impl Site {
    pub fn partial_f(&self) -> i64 {
        let sign = 2 * self.x_r - 1;
        let small = (2 * self.r <= self.n) as i64;
        let big = 1 - small;
        sign * (self.total + self.prefix - (self.n - self.r / 2) - big - sign + self.x_r * big + 1
            - self.x_half
            - self.x_double * small)
    }

    pub fn partial_g(&self) -> HalfInt {
        let sign = 2 * self.x_r - 1;
        let small = (2 * self.r <= self.n) as i64;
        HalfInt::from_doubled(
            sign * (2 * (self.total + self.prefix) - 2 * (self.n - self.r / 2) - small) - small - 1,
        )
    }
}

/// Prefix sums of a 2-coloring, for O(1) closed-form evaluation at any index.
pub(crate) struct Prefix<'a> {
    x: &'a [u8],
    // sums[m] = x_1 + .. + x_m
    sums: Vec<i64>,
}

impl<'a> Prefix<'a> {
    pub fn new(c: &'a RColoring) -> Self {
        let x = c.colors();
        let mut sums = Vec::with_capacity(x.len() + 1);
        sums.push(0);
        let mut acc = 0;
        for &b in x {
            acc += b as i64;
            sums.push(acc);
        }
        Prefix { x, sums }
    }

    pub fn site(&self, r: usize) -> Site {
        let n = self.x.len();
        let bit = |i: usize| self.x[i - 1] as i64;
        Site {
            n: n as i64,
            r: r as i64,
            total: self.sums[n],
            prefix: self.sums[n - r],
            x_r: bit(r),
            x_half: if r.is_multiple_of(2) { bit(r / 2) } else { 0 },
            x_double: if 2 * r <= n { bit(2 * r) } else { 0 },
        }
    }
}

pub fn closed_partial_f(c: &RColoring, r: usize) -> Result<i64> {
    c.require_binary()?;
    check_index(c, r)?;
    Ok(Prefix::new(c).site(r).partial_f())
}

pub fn closed_partial_g(c: &RColoring, r: usize) -> Result<HalfInt> {
    c.require_binary()?;
    check_index(c, r)?;
    Ok(Prefix::new(c).site(r).partial_g())
}

pub fn delta_report(c: &RColoring, r: usize) -> Result<DeltaReport> {
    c.require_binary()?;
    check_index(c, r)?;
    let flipped = c.flipped(r)?;
    let (f0, f1) = (count(c).total, count(&flipped).total);
    let delta_f = f0 as i64 - f1 as i64;
    let delta_g = g_from_f(c, f0) - g_from_f(&flipped, f1);
    let site = Prefix::new(c).site(r);
    let closed_form_f = site.partial_f();
    let closed_form_g = site.partial_g();
    Ok(DeltaReport {
        r,
        delta_f,
        delta_g,
        closed_form_f,
        closed_form_g,
        agree: delta_f == closed_form_f && delta_g == closed_form_g,
    })
}

/// All `n` closed-form derivatives of `F` or `G`.
pub fn gradient(c: &RColoring, objective: Objective) -> Result<Vec<HalfInt>> {
    c.require_binary()?;
    let prefix = Prefix::new(c);
    Ok((1..=c.n())
        .map(|r| {
            let site = prefix.site(r);
            match objective {
                Objective::F => HalfInt::from_int(site.partial_f()),
                Objective::G => site.partial_g(),
            }
        })
        .collect())
}

/// Evaluate every closed-form derivative and decide whether `c` is a Hamming
/// local minimum (every `d_r <= 0`). The first, last and largest derivative
/// are re-checked against the flip oracle.
pub fn certify_local_min(c: &RColoring, objective: Objective) -> Result<LocalMinCertificate> {
    let deltas = gradient(c, objective)?;
    let n = c.n();
    let argmax = (0..n)
        .max_by_key(|&i| (deltas[i], std::cmp::Reverse(i)))
        .unwrap_or(0);
    for r in [1, n, argmax + 1] {
        let oracle = flip_delta(c, r, objective)?;
        assert_eq!(
            oracle,
            deltas[r - 1],
            "closed form disagrees with the flip oracle at r = {r}"
        );
    }
    let k = c.ones();
    Ok(LocalMinCertificate {
        coloring: c.clone(),
        objective,
        is_local_min: deltas.iter().all(|&d| d <= HalfInt::ZERO),
        deltas,
        k,
        w: 2 * k as i64 - n as i64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::{make_zs, parse_coloring};

    fn col(s: &str) -> RColoring {
        parse_coloring(s).unwrap()
    }

    fn int(v: i64) -> HalfInt {
        HalfInt::from_int(v)
    }

    #[test]
    fn flip_delta_examples() {
        assert_eq!(flip_delta(&col("000"), 1, Objective::F).unwrap(), int(1));
        assert_eq!(flip_delta(&col("100"), 1, Objective::F).unwrap(), int(-1));
        // F(00010) = 2: (1,2,3) and (2,3,5) are both monochromatic
        assert_eq!(flip_delta(&col("00110"), 3, Objective::F).unwrap(), int(-2));
        assert!(matches!(
            flip_delta(&col("000"), 4, Objective::F),
            Err(Error::IndexOutOfRange { index: 4, n: 3 })
        ));
        assert!(flip_delta(&col("000"), 0, Objective::G).is_err());
        assert!(matches!(
            flip_delta(&col("012"), 1, Objective::F),
            Err(Error::InvalidPalette(3))
        ));
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(closed_partial_f(&col("000"), 1).unwrap(), 1);
        let ones = col("111111");
        assert_eq!(
            int(closed_partial_f(&ones, 3).unwrap()),
            flip_delta(&ones, 3, Objective::F).unwrap()
        );
        assert_eq!(
            closed_partial_g(&col("000"), 1).unwrap(),
            flip_delta(&col("000"), 1, Objective::G).unwrap()
        );
        assert!(closed_partial_g(&col("000"), 9).is_err());
    }

    #[test]
    fn half_index_term_applies_above_n_over_2() {
        // r = 4 > n/2 with x_2 = 1: the guarded reading would be off by one
        let c = col("01010");
        assert_eq!(
            int(closed_partial_f(&c, 4).unwrap()),
            flip_delta(&c, 4, Objective::F).unwrap()
        );
    }

    #[test]
    fn exhaustive_small_sweep() {
        for n in 1..=9 {
            for mask in 0u64..(1 << n) {
                let c = RColoring::from_mask(mask, n).unwrap();
                for r in 1..=n {
                    assert!(delta_report(&c, r).unwrap().agree, "{c} r={r}");
                }
            }
        }
    }

    #[test]
    fn certificates() {
        let cert = certify_local_min(&col("00110"), Objective::F).unwrap();
        assert!(cert.is_local_min);
        assert_eq!((cert.k, cert.w), (2, -1));

        // every flip of 0^5 removes triples
        let zero = certify_local_min(&col("00000"), Objective::F).unwrap();
        assert!(!zero.is_local_min);

        let z0 = make_zs(0, 1100).unwrap();
        let cert = certify_local_min(&z0, Objective::G).unwrap();
        assert!(cert.is_local_min);
        assert_eq!(cert.w, 100);
    }
}
