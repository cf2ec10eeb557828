//! Dihedral coset states written out by hand from their closed forms.

use std::f64::consts::TAU;

use num_complex::Complex64;

/// Index of `t^e r^a` in `dihedral:n`.
pub fn dihedral_index(n: usize, e: usize, a: i64) -> usize {
    (e % 2) * n + a.rem_euclid(n as i64) as usize
}

/// The three families of D_p coset states inside D_N written out by hand:
/// `(|r^{Nj/p+q}⟩ ± |t r^{Nj/p-q}⟩)/sqrt(2p)` for the one-dimensional irreps and
/// `p^{-1/2} Σ_j exp((-1)^m 2πi jk/p) |t^{m+n} r^{Nj/p + (-1)^{m+n} q}⟩`
/// for the two-dimensional ones.
pub fn hand_states(n: usize, p: usize, q: usize) -> Vec<(String, Vec<Complex64>)> {
    let step = (n / p) as i64;
    let q = q as i64;
    let mut out = Vec::new();
    for (name, sign) in [("H^0", 1.0), ("H^-1", -1.0)] {
        let mut v = vec![Complex64::from(0.0); 2 * n];
        for j in 0..p as i64 {
            v[dihedral_index(n, 0, step * j + q)] += 1.0 / (2.0 * p as f64).sqrt();
            v[dihedral_index(n, 1, step * j - q)] += sign / (2.0 * p as f64).sqrt();
        }
        out.push((name.to_string(), v));
    }
    for k in 1..=(p - 1) / 2 {
        for m in 0..2usize {
            for nn in 0..2usize {
                let mut v = vec![Complex64::from(0.0); 2 * n];
                let sgn_m = if m % 2 == 0 { 1.0 } else { -1.0 };
                let sgn_mn = if (m + nn) % 2 == 0 { 1 } else { -1 };
                for j in 0..p as i64 {
                    let phase =
                        Complex64::from_polar(1.0, sgn_m * TAU * (j * k as i64) as f64 / p as f64);
                    v[dihedral_index(n, m + nn, step * j + sgn_mn * q)] +=
                        phase / (p as f64).sqrt();
                }
                out.push((format!("H^{k}_{m}{nn}"), v));
            }
        }
    }
    out
}

/// Largest entrywise gap between a library basis for `D_p ≤ D_N` and the
/// hand formulas. The one-dimensional irreps line up directly; the hand
/// formula indexes the two-dimensional matrix elements as (column, row), and
/// irrep `k` of dimension two sits at index `1 + k`.
pub fn hand_expansion_error(basis: &monoqkd::finite_coset::CosetBasis, n: usize, p: usize) -> f64 {
    let labels = basis.labels();
    let mut worst = 0.0f64;
    for (r, &rep) in basis.representatives().iter().enumerate() {
        for (name, v) in hand_states(n, p, rep) {
            let l = match name.as_str() {
                "H^0" => 0,
                "H^-1" => 1,
                other => {
                    let (k, mn) = other[2..].split_once('_').unwrap();
                    let k: usize = k.parse().unwrap();
                    let mn = mn.as_bytes();
                    let (m, nn) = ((mn[0] - b'0') as usize, (mn[1] - b'0') as usize);
                    labels
                        .iter()
                        .position(|x| x.irrep == 1 + k && x.m == nn && x.n == m)
                        .unwrap()
                }
            };
            let col = basis.column(r, l);
            let err = col
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            worst = worst.max(err);
        }
    }
    worst
}
