//! Colorings of `[1, n]`, their text formats and the extremal block families.
//!
//! Positions are 1-based in every public accessor; color indices are
//! 0-based, so the colors `C_1..C_r` of an `r`-coloring are `0..r-1`.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A coloring of `[1, n]` with palette `{0, .., r-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RColoring {
    r: usize,
    colors: Vec<u8>,
}

impl RColoring {
    pub fn new(r: usize, colors: Vec<u8>) -> Result<Self> {
        if !(2..=256).contains(&r) {
            return Err(Error::param(format!("palette size {r} not in 2..=256")));
        }
        if colors.is_empty() {
            return Err(Error::param("a coloring needs n >= 1"));
        }
        if let Some(pos) = colors.iter().position(|&c| c as usize >= r) {
            return Err(Error::param(format!(
                "color {} at position {} is outside the palette 0..{}",
                colors[pos],
                pos + 1,
                r
            )));
        }
        Ok(RColoring { r, colors })
    }

    /// A 2-coloring from bits; any nonzero entry is read as color 1.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        Self::new(2, bits.iter().map(|&b| (b != 0) as u8).collect())
    }

    /// A 2-coloring of `[1, n]` from the low `n` bits of `mask`;
    /// bit `i - 1` holds position `i`.
    pub fn from_mask(mask: u64, n: usize) -> Result<Self> {
        if n > 64 {
            return Err(Error::param("bit masks hold at most 64 positions"));
        }
        Self::new(2, (0..n).map(|i| ((mask >> i) & 1) as u8).collect())
    }

    pub fn constant(r: usize, n: usize, color: u8) -> Result<Self> {
        Self::new(r, vec![color; n])
    }

    pub fn n(&self) -> usize {
        self.colors.len()
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Color of position `i`, `1 <= i <= n`.
    pub fn color(&self, i: usize) -> u8 {
        self.colors[i - 1]
    }

    /// Raw color slice; index `i - 1` holds position `i`.
    pub fn colors(&self) -> &[u8] {
        &self.colors
    }

    pub fn into_colors(self) -> Vec<u8> {
        self.colors
    }

    pub fn is_binary(&self) -> bool {
        self.r == 2
    }

    pub(crate) fn require_binary(&self) -> Result<()> {
        if self.r == 2 {
            Ok(())
        } else {
            Err(Error::InvalidPalette(self.r))
        }
    }

    /// Number of positions with color 1 (the `k` of a 2-coloring).
    pub fn ones(&self) -> usize {
        self.colors.iter().filter(|&&c| c == 1).count()
    }

    /// The low `n` bits as a mask; `None` for `n > 64` or `r != 2`.
    pub fn to_mask(&self) -> Option<u64> {
        if self.r != 2 || self.n() > 64 {
            return None;
        }
        Some(
            self.colors
                .iter()
                .enumerate()
                .fold(0u64, |m, (i, &c)| m | ((c as u64) << i)),
        )
    }

    /// Copy with position `i` (1-based) switched to the other color.
    pub fn flipped(&self, i: usize) -> Result<RColoring> {
        self.require_binary()?;
        if i == 0 || i > self.n() {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: self.n(),
            });
        }
        let mut colors = self.colors.clone();
        colors[i - 1] ^= 1;
        Ok(RColoring { r: 2, colors })
    }

    pub fn runs(&self) -> RunLengthSpec {
        let mut runs: Vec<(u8, usize)> = Vec::new();
        for &c in &self.colors {
            match runs.last_mut() {
                Some((last, len)) if *last == c => *len += 1,
                _ => runs.push((c, 1)),
            }
        }
        RunLengthSpec { runs }
    }
}

impl fmt::Display for RColoring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_coloring(self, Format::RunLength))
    }
}

impl Serialize for RColoring {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Run-length description `c_1^{l_1} c_2^{l_2} ...` of a coloring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunLengthSpec {
    pub runs: Vec<(u8, usize)>,
}

impl RunLengthSpec {
    pub fn total_len(&self) -> usize {
        self.runs.iter().map(|&(_, l)| l).sum()
    }

    /// Merge adjacent runs of equal color and drop empty ones.
    pub fn normalized(&self) -> RunLengthSpec {
        let mut runs: Vec<(u8, usize)> = Vec::with_capacity(self.runs.len());
        for &(c, l) in &self.runs {
            if l == 0 {
                continue;
            }
            match runs.last_mut() {
                Some((last, len)) if *last == c => *len += l,
                _ => runs.push((c, l)),
            }
        }
        RunLengthSpec { runs }
    }

    pub fn expand(&self, r: usize) -> Result<RColoring> {
        if let Some(pos) = self.runs.iter().position(|&(_, l)| l == 0) {
            return Err(Error::param(format!("run {} has zero length", pos + 1)));
        }
        let mut colors = Vec::with_capacity(self.total_len());
        for &(c, l) in &self.runs {
            colors.extend(std::iter::repeat_n(c, l));
        }
        RColoring::new(r, colors)
    }
}

impl fmt::Display for RunLengthSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (c, l)) in self.runs.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}^{l}")?;
        }
        Ok(())
    }
}

/// Text style for [`format_coloring`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    /// One digit per position, e.g. `00001111110`. Needs `r <= 10`.
    Raw,
    /// Normalized runs, e.g. `0^4 1^6 0^1`.
    #[default]
    RunLength,
}

pub fn format_coloring(c: &RColoring, style: Format) -> String {
    match style {
        Format::Raw if c.r() <= 10 => c.colors.iter().map(|&d| (b'0' + d) as char).collect(),
        // digits cannot express colors >= 10
        Format::Raw | Format::RunLength => c.runs().to_string(),
    }
}

/// Parse either format. The palette is the smallest `r >= 2` covering every
/// color that appears.
pub fn parse_coloring(text: &str) -> Result<RColoring> {
    let tokens = parse_tokens(text)?;
    let r = tokens
        .iter()
        .map(|t| t.color as usize + 1)
        .max()
        .unwrap_or(0)
        .max(2);
    runs_of(&tokens).expand(r)
}

/// Parse with a fixed palette; any color `>= r` is an error.
pub fn parse_coloring_with_palette(text: &str, r: usize) -> Result<RColoring> {
    let tokens = parse_tokens(text)?;
    if let Some(t) = tokens.iter().find(|t| t.color as usize >= r) {
        return Err(Error::parse(
            t.position,
            format!("color {} is not below palette size {r}", t.color),
        ));
    }
    runs_of(&tokens).expand(r)
}

struct RunToken {
    color: u8,
    len: usize,
    position: usize,
}

fn runs_of(tokens: &[RunToken]) -> RunLengthSpec {
    RunLengthSpec {
        runs: tokens.iter().map(|t| (t.color, t.len)).collect(),
    }
    .normalized()
}

/// Tokens are whitespace separated; each is `c^len` or a run of raw digits.
fn parse_tokens(text: &str) -> Result<Vec<RunToken>> {
    let mut tokens = Vec::new();
    let mut offset = 0;
    for token in text.split_whitespace() {
        let start = offset + text[offset..].find(token).unwrap_or(0);
        offset = start + token.len();
        if let Some((color, len)) = token.split_once('^') {
            let c: u8 = color
                .parse()
                .map_err(|_| Error::parse(start, format!("bad color in token '{token}'")))?;
            let len_at = start + color.len() + 1;
            let l: usize = len
                .parse()
                .map_err(|_| Error::parse(len_at, format!("bad run length in token '{token}'")))?;
            if l == 0 {
                return Err(Error::parse(
                    len_at,
                    format!("zero-length run in token '{token}'"),
                ));
            }
            tokens.push(RunToken {
                color: c,
                len: l,
                position: start,
            });
        } else {
            for (i, ch) in token.char_indices() {
                let d = ch.to_digit(10).ok_or_else(|| {
                    Error::parse(start + i, format!("unexpected character '{ch}'"))
                })?;
                tokens.push(RunToken {
                    color: d as u8,
                    len: 1,
                    position: start + i,
                });
            }
        }
    }
    if tokens.is_empty() {
        return Err(Error::parse(0, "empty coloring"));
    }
    Ok(tokens)
}

/// Swap the two colors of a 2-coloring.
pub fn complement(c: &RColoring) -> Result<RColoring> {
    c.require_binary()?;
    Ok(RColoring {
        r: 2,
        colors: c.colors.iter().map(|&b| b ^ 1).collect(),
    })
}

/// Lay out weighted blocks over `[1, n]`: block `b` covers
/// `(floor(n * W_{b-1} / W), floor(n * W_b / W)]` with `W_b` the cumulative
/// weight, so the total is exactly `n` and each block is off by less than 1.
fn weighted_blocks(n: usize, blocks: &[(u8, u64)]) -> Vec<u8> {
    let total: u64 = blocks.iter().map(|&(_, w)| w).sum();
    let mut colors = Vec::with_capacity(n);
    let mut cum = 0u64;
    for &(c, w) in blocks {
        cum += w;
        let end = (n as u128 * cum as u128 / total as u128) as usize;
        colors.resize(end, c);
    }
    colors
}

/// Block weights (in units of `w_s = n / (12s + 11)`) of `Z_s`:
/// `0^4 (1^6 0^6)^s 1^6 0^1`.
pub(crate) fn zs_weights(s: u64) -> Vec<(u8, u64)> {
    let mut blocks = vec![(0, 4)];
    for _ in 0..s {
        blocks.push((1, 6));
        blocks.push((0, 6));
    }
    blocks.push((1, 6));
    blocks.push((0, 1));
    blocks
}

/// The local-minimum family `Z_s`, with blocks of `6 w_s` alternating
/// between a leading `0^{4 w_s}` and a trailing `0^{w_s}`.
///
/// For even `s` this is `0^{4w} (1^{6w} 0^{6w})^{s/2} 1^{6w} (0^{6w} 1^{6w})^{s/2} 0^w`.
/// Odd `s` keeps the strict alternation (so `Z_1 = 0^{4w} 1^{6w} 0^{6w} 1^{6w} 0^w`).
pub fn make_zs(s: u64, n: usize) -> Result<RColoring> {
    let period = s
        .checked_mul(12)
        .and_then(|v| v.checked_add(11))
        .ok_or_else(|| Error::param("s too large"))?;
    if (n as u64) < period {
        return Err(Error::param(format!(
            "Z_{s} needs n >= 12s + 11 = {period}, got {n}"
        )));
    }
    RColoring::new(2, weighted_blocks(n, &zs_weights(s)))
}

/// `Z_inf^t = (0^t 1^t)^{n/(2t)}`, truncated when `2t` does not divide `n`.
pub fn make_zinf(t: usize, n: usize) -> Result<RColoring> {
    if !(3..=11).contains(&t) {
        return Err(Error::param(format!("t = {t} outside 3..=11")));
    }
    if n < 2 * t {
        return Err(Error::param(format!(
            "Z_inf^{t} needs n >= {}, got {n}",
            2 * t
        )));
    }
    RColoring::new(2, (0..n).map(|i| ((i / t) % 2) as u8).collect())
}

/// The `r`-coloring built from dyadic tail intervals plus a scaled `Z_0`:
///
/// * `C_j` on `(n/2^j, n/2^{j-1}]` for `1 <= j <= r-2`;
/// * `C_{r-1}` on `[1, 4m/11] ∪ (10m/11, m]` and `C_r` on `(4m/11, 10m/11]`,
///   where `m = n / 2^{r-2}`.
///
/// Boundaries are floored. `C_j` is color index `j - 1`.
pub fn make_extension(r: usize, n: usize) -> Result<RColoring> {
    if !(2..=64).contains(&r) {
        return Err(Error::param(format!("palette size r = {r} outside 2..=64")));
    }
    let scale = 1u128 << (r - 2);
    if (n as u128) < scale * 11 {
        return Err(Error::param(format!(
            "extension with r = {r} needs n >= 11 * 2^{} = {}, got {n}",
            r - 2,
            scale * 11
        )));
    }
    let n128 = n as u128;
    let mut colors = vec![0u8; n];
    for j in 1..=(r - 2) {
        let lo = (n128 >> j) as usize;
        let hi = (n128 >> (j - 1)) as usize;
        colors[lo..hi].fill((j - 1) as u8);
    }
    let a = (4 * n128 / (scale * 11)) as usize;
    let b = (10 * n128 / (scale * 11)) as usize;
    let m = (n128 / scale) as usize;
    let outer = (r - 2) as u8;
    let inner = (r - 1) as u8;
    colors[..a].fill(outer);
    colors[a..b].fill(inner);
    colors[b..m].fill(outer);
    RColoring::new(r, colors)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    Zs,
    Zinf,
    Extension,
}

/// Parameters of one of the named families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilyParams {
    pub kind: Family,
    pub s: u64,
    pub t: usize,
    pub r: usize,
    pub n: usize,
}

impl FamilyParams {
    pub fn zs(s: u64, n: usize) -> Self {
        FamilyParams {
            kind: Family::Zs,
            s,
            t: 3,
            r: 2,
            n,
        }
    }

    pub fn zinf(t: usize, n: usize) -> Self {
        FamilyParams {
            kind: Family::Zinf,
            s: 0,
            t,
            r: 2,
            n,
        }
    }

    pub fn extension(r: usize, n: usize) -> Self {
        FamilyParams {
            kind: Family::Extension,
            s: 0,
            t: 3,
            r,
            n,
        }
    }

    pub fn build(&self) -> Result<RColoring> {
        match self.kind {
            Family::Zs => make_zs(self.s, self.n),
            Family::Zinf => make_zinf(self.t, self.n),
            Family::Extension => make_extension(self.r, self.n),
        }
    }
}
