/// Binary indexed tree over positions `1..=n` holding 0/1 bits.
#[derive(Debug, Clone)]
pub(crate) struct Fenwick {
    tree: Vec<i64>,
}

impl Fenwick {
    pub fn from_bits(bits: &[u8]) -> Self {
        let n = bits.len();
        let mut tree = vec![0i64; n + 1];
        for (i, &b) in bits.iter().enumerate() {
            tree[i + 1] += b as i64;
            let parent = (i + 1) + ((i + 1) & (i + 1).wrapping_neg());
            if parent <= n {
                tree[parent] += tree[i + 1];
            }
        }
        Fenwick { tree }
    }

    pub fn add(&mut self, pos: usize, delta: i64) {
        let mut i = pos;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum of positions `1..=m`.
    pub fn prefix(&self, m: usize) -> i64 {
        let mut i = m;
        let mut acc = 0;
        while i > 0 {
            acc += self.tree[i];
            i &= i - 1;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_sums_track_updates() {
        let mut bits = vec![1u8, 0, 1, 1, 0, 1, 0, 0, 1];
        let mut fw = Fenwick::from_bits(&bits);
        for (pos, delta) in [(2usize, 1i64), (4, -1), (9, -1), (5, 1)] {
            fw.add(pos, delta);
            bits[pos - 1] = (bits[pos - 1] as i64 + delta) as u8;
            for m in 0..=bits.len() {
                let expect: i64 = bits[..m].iter().map(|&b| b as i64).sum();
                assert_eq!(fw.prefix(m), expect);
            }
        }
    }
}
