//! Fixed bijections `N x N -> N` and `N x Z -> N`.

/// Cantor's diagonal enumeration.
pub fn cantor_pair(i: u64, j: u64) -> u64 {
    let s = i + j;
    s * (s + 1) / 2 + j
}

pub fn cantor_unpair(n: u64) -> (u64, u64) {
    // largest s with s(s+1)/2 <= n
    let mut s = ((((8 * n + 1) as f64).sqrt() - 1.0) / 2.0) as u64;
    while s * (s + 1) / 2 > n {
        s -= 1;
    }
    while (s + 1) * (s + 2) / 2 <= n {
        s += 1;
    }
    let j = n - s * (s + 1) / 2;
    (s - j, j)
}

/// Z enumerated as 0, -1, 1, -2, 2, ...
pub fn int_index(k: i64) -> u64 {
    if k >= 0 {
        2 * k as u64
    } else {
        (-2 * k - 1) as u64
    }
}

pub fn int_from_index(n: u64) -> i64 {
    if n % 2 == 0 {
        (n / 2) as i64
    } else {
        -(((n + 1) / 2) as i64)
    }
}

pub fn pair_nz(m: u64, k: i64) -> u64 {
    cantor_pair(m, int_index(k))
}

pub fn unpair_nz(n: u64) -> (u64, i64) {
    let (m, k) = cantor_unpair(n);
    (m, int_from_index(k))
}
