//! Direct minimization of `F`: bit-flip descent, seeded multistart, and
//! exhaustive enumeration for small `n` as ground truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{Objective, Site};
use crate::coloring::RColoring;
use crate::counting::count;
use crate::error::{Error, Result};
use crate::fenwick::Fenwick;
use crate::halfint::HalfInt;

pub const GLOBAL_CAP: usize = 26;
pub const LOCAL_CAP: usize = 20;
pub const ARGMIN_CAP: usize = 64;
pub const DEFAULT_SEED: u64 = 0x5c4u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Rule {
    BestImprovement,
    FirstImprovement,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub start: RColoring,
    pub best: RColoring,
    pub value: u64,
    pub iterations: usize,
    /// `(flipped position, F after the flip)` per step.
    pub trajectory: Vec<(usize, u64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BruteReport {
    pub n: usize,
    pub min_value: u64,
    pub argmin_count: u64,
    /// At most [`ARGMIN_CAP`] minimizers, in enumeration order.
    pub argmins: Vec<RColoring>,
    pub local_minima: Option<Vec<RColoring>>,
    pub objective: Option<Objective>,
}

/// `F` of the 2-coloring whose position `p` is bit `p - 1` of `x`.
pub(crate) fn mask_f(x: u64, n: usize) -> u64 {
    debug_assert!(n < 64);
    let full = (1u64 << n) - 1;
    let mut total = 0u64;
    for i in 1..=n / 2 {
        // j ranges over i+1..=n-i, i.e. bits i..=n-i-1
        let window = ((1u64 << (n - i)) - 1) & !((1u64 << i) - 1);
        let same = if (x >> (i - 1)) & 1 == 1 {
            x
        } else {
            !x & full
        };
        total += (same & (same >> i) & window).count_ones() as u64;
    }
    total
}

/// Doubled `G` of a mask.
pub(crate) fn mask_g2(x: u64, n: usize) -> i64 {
    let mut pair = 0i64;
    for i in 1..=n / 2 {
        let xi = ((x >> (i - 1)) & 1) as i64;
        let x2i = ((x >> (2 * i - 1)) & 1) as i64;
        pair += xi * (x2i - 1);
    }
    2 * mask_f(x, n) as i64 + 2 * pair - x.count_ones() as i64
}

fn mask_site(x: u64, n: usize, r: usize) -> Site {
    let bit = |i: usize| ((x >> (i - 1)) & 1) as i64;
    let low = if n - r == 0 { 0 } else { (1u64 << (n - r)) - 1 };
    Site {
        n: n as i64,
        r: r as i64,
        total: x.count_ones() as i64,
        prefix: (x & low).count_ones() as i64,
        x_r: bit(r),
        x_half: if r.is_multiple_of(2) { bit(r / 2) } else { 0 },
        x_double: if 2 * r <= n { bit(2 * r) } else { 0 },
    }
}

/// Reflected Gray-code walk over all `2^n` masks, starting at 0, with `F`
/// carried along by the closed-form derivative of the flipped bit.
pub(crate) fn gray_walk(n: usize, mut visit: impl FnMut(u64, u64)) {
    let mut x = 0u64;
    let mut f = mask_f(0, n);
    visit(x, f);
    for step in 1u64..(1u64 << n) {
        let r = step.trailing_zeros() as usize + 1;
        f = (f as i64 - mask_site(x, n, r).partial_f()) as u64;
        x ^= 1 << (r - 1);
        visit(x, f);
    }
}

fn over_cap(n: usize, cap: usize) -> Error {
    Error::OverCap {
        n,
        cap,
        states: 1u128 << n.min(127),
    }
}

pub fn brute_global_min(n: usize) -> Result<BruteReport> {
    brute_global_min_capped(n, GLOBAL_CAP)
}

pub fn brute_global_min_capped(n: usize, cap: usize) -> Result<BruteReport> {
    if n == 0 {
        return Err(Error::param("n must be positive"));
    }
    if n > cap.min(40) {
        return Err(over_cap(n, cap));
    }
    let mut min_value = u64::MAX;
    let mut count = 0u64;
    let mut masks = Vec::new();
    gray_walk(n, |x, f| {
        if f < min_value {
            min_value = f;
            count = 0;
            masks.clear();
        }
        if f == min_value {
            count += 1;
            if masks.len() < ARGMIN_CAP {
                masks.push(x);
            }
        }
    });
    Ok(BruteReport {
        n,
        min_value,
        argmin_count: count,
        argmins: masks
            .into_iter()
            .map(|m| RColoring::from_mask(m, n).expect("n <= 40"))
            .collect(),
        local_minima: None,
        objective: None,
    })
}

pub fn brute_local_minima(n: usize, objective: Objective) -> Result<BruteReport> {
    brute_local_minima_capped(n, objective, LOCAL_CAP)
}

/// Every Hamming local minimum of `F` or `G`, found by full re-evaluation of
/// the objective at each of the `n` neighbours (no closed forms).
pub fn brute_local_minima_capped(
    n: usize,
    objective: Objective,
    cap: usize,
) -> Result<BruteReport> {
    if n == 0 {
        return Err(Error::param("n must be positive"));
    }
    if n > cap.min(30) {
        return Err(over_cap(n, cap));
    }
    let value = |x: u64| match objective {
        Objective::F => 2 * mask_f(x, n) as i64,
        Objective::G => mask_g2(x, n),
    };
    let per_mask: Vec<(u64, u64, bool)> = (0u64..(1u64 << n))
        .into_par_iter()
        .map(|x| {
            let here = value(x);
            let is_min = (0..n).all(|b| here - value(x ^ (1 << b)) <= 0);
            (x, mask_f(x, n), is_min)
        })
        .collect();
    let min_value = per_mask.iter().map(|&(_, f, _)| f).min().unwrap_or(0);
    let argmin_masks: Vec<u64> = per_mask
        .iter()
        .filter(|&&(_, f, _)| f == min_value)
        .map(|&(x, _, _)| x)
        .collect();
    let to_coloring = |m: u64| RColoring::from_mask(m, n).expect("n <= 30");
    Ok(BruteReport {
        n,
        min_value,
        argmin_count: argmin_masks.len() as u64,
        argmins: argmin_masks
            .iter()
            .take(ARGMIN_CAP)
            .map(|&m| to_coloring(m))
            .collect(),
        local_minima: Some(
            per_mask
                .iter()
                .filter(|&&(_, _, is_min)| is_min)
                .map(|&(x, _, _)| to_coloring(x))
                .collect(),
        ),
        objective: Some(objective),
    })
}

/// Flip improving bits until every `d_r F <= 0`.
///
/// `BestImprovement` flips the largest positive derivative (smallest index
/// on ties); `FirstImprovement` flips the first positive one in index order.
pub fn descend(start: &RColoring, rule: Rule) -> Result<SearchResult> {
    start.require_binary()?;
    let n = start.n();
    let mut bits = start.colors().to_vec();
    let mut tree = Fenwick::from_bits(&bits);
    let mut total: i64 = bits.iter().map(|&b| b as i64).sum();
    let mut value = count(start).total;
    let mut trajectory = Vec::new();

    let site = |bits: &[u8], tree: &Fenwick, total: i64, r: usize| {
        let bit = |i: usize| bits[i - 1] as i64;
        Site {
            n: n as i64,
            r: r as i64,
            total,
            prefix: tree.prefix(n - r),
            x_r: bit(r),
            x_half: if r.is_multiple_of(2) { bit(r / 2) } else { 0 },
            x_double: if 2 * r <= n { bit(2 * r) } else { 0 },
        }
    };

    loop {
        let mut pick: Option<(usize, i64)> = None;
        for r in 1..=n {
            let d = site(&bits, &tree, total, r).partial_f();
            if d > 0 && pick.is_none_or(|(_, best)| d > best) {
                pick = Some((r, d));
                if rule == Rule::FirstImprovement {
                    break;
                }
            }
        }
        let Some((r, d)) = pick else { break };
        let delta = if bits[r - 1] == 1 { -1 } else { 1 };
        bits[r - 1] ^= 1;
        tree.add(r, delta);
        total += delta;
        value -= d as u64;
        trajectory.push((r, value));
    }

    Ok(SearchResult {
        start: start.clone(),
        best: RColoring::from_bits(&bits)?,
        value,
        iterations: trajectory.len(),
        trajectory,
    })
}

/// Best descent over `restarts` uniform random starts. Starts are drawn in
/// order from a ChaCha8 stream seeded with `seed`; ties go to the earliest.
pub fn multistart(n: usize, restarts: usize, seed: u64, rule: Rule) -> Result<SearchResult> {
    if n == 0 {
        return Err(Error::param("n must be positive"));
    }
    if restarts == 0 {
        return Err(Error::param("restarts must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<RColoring> = (0..restarts)
        .map(|_| {
            let bits: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2u8)).collect();
            RColoring::from_bits(&bits)
        })
        .collect::<Result<_>>()?;
    let results: Vec<SearchResult> = starts
        .par_iter()
        .map(|s| descend(s, rule))
        .collect::<Result<_>>()?;
    Ok(results
        .into_iter()
        .enumerate()
        .min_by_key(|(i, r)| (r.value, *i))
        .map(|(_, r)| r)
        .expect("restarts > 0"))
}

/// Value of the objective at a mask, as a half-integer.
pub fn mask_objective(x: u64, n: usize, objective: Objective) -> HalfInt {
    match objective {
        Objective::F => HalfInt::from_int(mask_f(x, n) as i64),
        Objective::G => HalfInt::from_doubled(mask_g2(x, n)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::certify_local_min;
    use crate::coloring::{make_zs, parse_coloring};
    use crate::counting::{count_naive, eval_g};

    #[test]
    fn mask_objectives_match_counting() {
        for n in 1..=12 {
            for x in 0u64..(1 << n) {
                let c = RColoring::from_mask(x, n).unwrap();
                assert_eq!(mask_f(x, n), count_naive(&c, false).total);
                assert_eq!(mask_objective(x, n, Objective::G), eval_g(&c).unwrap());
            }
        }
    }

    #[test]
    fn gray_walk_visits_every_mask_once() {
        for n in 1..=16 {
            let mut seen = vec![false; 1 << n];
            let mut visits = 0usize;
            gray_walk(n, |x, f| {
                assert!(!seen[x as usize]);
                seen[x as usize] = true;
                visits += 1;
                if n <= 10 {
                    assert_eq!(f, mask_f(x, n));
                }
            });
            assert_eq!(visits, 1 << n);
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn brute_examples() {
        assert_eq!(brute_global_min(1).unwrap().min_value, 0);
        let r3 = brute_global_min(3).unwrap();
        assert_eq!(r3.min_value, 0);
        assert!(r3.argmins.contains(&parse_coloring("001").unwrap()));
        let r5 = brute_global_min(5).unwrap();
        assert_eq!(r5.min_value, 0);
        assert!(r5.argmins.contains(&parse_coloring("00110").unwrap()));
        assert!(matches!(brute_global_min(27), Err(Error::OverCap { .. })));
        assert!(matches!(
            brute_local_minima(21, Objective::G),
            Err(Error::OverCap { .. })
        ));
    }

    #[test]
    fn local_minima_n3() {
        let report = brute_local_minima(3, Objective::F).unwrap();
        let minima = report.local_minima.unwrap();
        let c = parse_coloring("001").unwrap();
        let cert = certify_local_min(&c, Objective::F).unwrap();
        assert_eq!(minima.contains(&c), cert.is_local_min);
        assert!(!minima.contains(&parse_coloring("000").unwrap()));
    }

    #[test]
    fn descend_examples() {
        let r = descend(&parse_coloring("11111").unwrap(), Rule::BestImprovement).unwrap();
        assert_eq!(r.value, 0);
        assert!(r.trajectory.windows(2).all(|w| w[1].1 < w[0].1));

        let z = make_zs(0, 110).unwrap();
        let r = descend(&z, Rule::BestImprovement).unwrap();
        assert!(
            certify_local_min(&r.best, Objective::F)
                .unwrap()
                .is_local_min
        );

        let fixed = descend(&r.best, Rule::FirstImprovement).unwrap();
        assert_eq!(fixed.iterations, 0);
        assert_eq!(fixed.best, r.best);
    }

    #[test]
    fn multistart_examples() {
        assert_eq!(
            multistart(5, 10, 7, Rule::BestImprovement).unwrap().value,
            0
        );
        let a = multistart(30, 20, 11, Rule::BestImprovement).unwrap();
        let b = multistart(30, 20, 11, Rule::BestImprovement).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(a.trajectory, b.trajectory);
        assert!(multistart(5, 0, 1, Rule::BestImprovement).is_err());
    }
}
