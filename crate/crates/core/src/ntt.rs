//! Number-theoretic transform over `Z/998244353`, used for exact integer
//! self-convolution of indicator sequences. Every coefficient the counters
//! produce is at most `n`, far below the modulus, so results are exact.

const MOD: u64 = 998_244_353;
const ROOT: u64 = 3;

fn pow_mod(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1;
    base %= MOD;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % MOD;
        }
        base = base * base % MOD;
        exp >>= 1;
    }
    acc
}

fn transform(a: &mut [u64], invert: bool) {
    let len = a.len();
    debug_assert!(len.is_power_of_two());
    let mut j = 0;
    for i in 1..len {
        let mut bit = len >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut width = 2;
    while width <= len {
        let mut w_len = pow_mod(ROOT, (MOD - 1) / width as u64);
        if invert {
            w_len = pow_mod(w_len, MOD - 2);
        }
        let half = width / 2;
        let mut twiddles = Vec::with_capacity(half);
        let mut w = 1;
        for _ in 0..half {
            twiddles.push(w);
            w = w * w_len % MOD;
        }
        for chunk in a.chunks_exact_mut(width) {
            let (lo, hi) = chunk.split_at_mut(half);
            for ((u, v), &tw) in lo.iter_mut().zip(hi.iter_mut()).zip(&twiddles) {
                let x = *u;
                let y = *v * tw % MOD;
                *u = if x + y >= MOD { x + y - MOD } else { x + y };
                *v = if x >= y { x - y } else { x + MOD - y };
            }
        }
        width <<= 1;
    }
    if invert {
        let inv_len = pow_mod(len as u64, MOD - 2);
        for x in a.iter_mut() {
            *x = *x * inv_len % MOD;
        }
    }
}

/// `out[s] = sum_{i + j = s} a[i] a[j]` for `s < keep`.
pub(crate) fn self_convolve(a: &[u64], keep: usize) -> Vec<u64> {
    if a.is_empty() {
        return vec![0; keep];
    }
    let len = (2 * a.len() - 1).next_power_of_two();
    let mut buf = vec![0u64; len];
    buf[..a.len()].copy_from_slice(a);
    transform(&mut buf, false);
    for x in buf.iter_mut() {
        *x = *x * *x % MOD;
    }
    transform(&mut buf, true);
    buf.resize(keep.max(len), 0);
    buf.truncate(keep);
    buf
}
