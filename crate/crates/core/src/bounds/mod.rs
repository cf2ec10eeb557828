//! Closed-form upper bounds on coset monogamy-game winning probabilities.
//!
//! Each game family has a parameter record (`GameSpec*`) whose constructor
//! checks the hypotheses under which the bound is proven. Evaluation happens in
//! binary64. Values above one are returned unclamped and flagged as trivial so
//! that curves can be plotted through the uninformative region.

mod so3;

pub use so3::{
    so3_coset_overlap, so3_coset_overlap_published, so3_overlap_mc, GameSpecSo3, So3Estimate,
    BETA_GRID,
};

use std::f64::consts::{E, LN_2, PI};
use std::fmt;

use crate::error::{ensure, Result};

/// An evaluated upper bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub value: f64,
    /// Set when `value >= 1`, i.e. the bound carries no information.
    pub trivial: bool,
}

impl Bound {
    pub fn new(value: f64) -> Self {
        Bound {
            value,
            trivial: value >= 1.0,
        }
    }

    /// The bound as a probability.
    pub fn clamped(&self) -> f64 {
        self.value.min(1.0)
    }
}

/// One evaluated game instance, ready for CSV output.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub game: String,
    pub params: String,
    pub bound: f64,
    pub flags: Vec<String>,
}

impl BoundReport {
    pub fn new(game: &str, params: String, bound: Bound) -> Self {
        let mut flags = Vec::new();
        if bound.trivial {
            flags.push("trivial".to_string());
        }
        BoundReport {
            game: game.to_string(),
            params,
            bound: bound.value,
            flags,
        }
    }

    pub const CSV_HEADER: &'static str = "game,params,bound,flags";

    pub fn csv_row(&self) -> String {
        format!(
            "{},\"{}\",{:.17e},{}",
            self.game,
            self.params,
            self.bound,
            self.flags.join(";")
        )
    }
}

/// Binary entropy `h(g) = -g lg g - (1-g) lg(1-g)` with `0 lg 0 = 0`.
pub fn binary_entropy(gamma: f64) -> Result<f64> {
    ensure!(
        (0.0..=1.0).contains(&gamma),
        Domain,
        "binary entropy needs 0 <= gamma <= 1, got {gamma}"
    );
    Ok(entropy_term(gamma) + entropy_term(1.0 - gamma))
}

fn entropy_term(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// A permutation of `{0, .., m-1}` stored as its image table.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            ensure!(
                i < images.len() && !seen[i],
                Validation,
                "not a permutation: {images:?}"
            );
            seen[i] = true;
        }
        Ok(Permutation(images))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, k: usize) -> usize {
        self.0[k]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (k, &v) in self.0.iter().enumerate() {
            inv[v] = k;
        }
        Permutation(inv)
    }

    /// `self ∘ other`, i.e. `k -> self(other(k))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&k| self.0[k]).collect())
    }

    pub fn fixed_points(&self) -> usize {
        self.0.iter().enumerate().filter(|(k, &v)| *k == v).count()
    }
}

/// The cyclic family `π_j(k) = (k + j) mod m` for `j = 0..m`.
///
/// `π_i ∘ π_j⁻¹` is the shift by `i - j`, which has no fixed point unless `i = j`.
pub fn orthogonal_permutations(m: usize) -> Result<Vec<Permutation>> {
    ensure!(m >= 1, Domain, "orthogonal permutation family needs m >= 1");
    Ok((0..m)
        .map(|j| Permutation((0..m).map(|k| (k + j) % m).collect()))
        .collect())
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// The U(1) game over the finite subgroups `Z_{p_1}, .., Z_{p_N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpecU1 {
    primes: Vec<u64>,
    epsilon: f64,
}

impl GameSpecU1 {
    pub fn new(primes: Vec<u64>, epsilon: f64) -> Result<Self> {
        ensure!(!primes.is_empty(), Domain, "need at least one prime");
        ensure!(
            primes.windows(2).all(|w| w[0] < w[1]),
            Domain,
            "primes must be strictly ascending: {primes:?}"
        );
        ensure!(
            primes.iter().all(|&p| is_prime(p)),
            Domain,
            "not all entries are prime: {primes:?}"
        );
        ensure!(epsilon > 0.0, Domain, "epsilon must be positive");
        let p_max = *primes.last().unwrap() as f64;
        ensure!(
            epsilon <= PI / (p_max * p_max),
            Precondition,
            "epsilon = {epsilon} exceeds pi/p_N^2 = {}",
            PI / (p_max * p_max)
        );
        Ok(GameSpecU1 { primes, epsilon })
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// `1/N + 1/sqrt(p_1)`.
pub fn bound_u1(spec: &GameSpecU1) -> Bound {
    let n = spec.primes.len() as f64;
    Bound::new(1.0 / n + 1.0 / (spec.primes[0] as f64).sqrt())
}

/// The complex-plane game with `n` real lines through the origin.
///
/// Returns `2/n + 4(1 + 1/n) sqrt(delta epsilon)`.
pub fn bound_complex(n: usize, delta: f64, epsilon: f64) -> Result<Bound> {
    ensure!(
        n > 0 && n % 4 == 0,
        Domain,
        "n must be a positive multiple of 4, got {n}"
    );
    ensure!(
        delta >= 0.0 && epsilon >= 0.0,
        Domain,
        "delta and epsilon must be nonnegative"
    );
    let n = n as f64;
    Ok(Bound::new(
        2.0 / n + 4.0 * (1.0 + 1.0 / n) * (delta * epsilon).sqrt(),
    ))
}

/// The n-mode quadrature game, optionally with a tolerated fraction `gamma`
/// of failed position modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameSpecRn {
    pub n: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub gamma: Option<f64>,
}

impl GameSpecRn {
    pub fn new(n: usize, delta: f64, epsilon: f64, gamma: Option<f64>) -> Result<Self> {
        ensure!(
            n > 0 && n % 2 == 0,
            Domain,
            "n must be even and positive, got {n}"
        );
        ensure!(
            delta >= 0.0 && epsilon >= 0.0,
            Domain,
            "delta and epsilon must be nonnegative"
        );
        if let Some(g) = gamma {
            ensure!(
                (0.0..1.0).contains(&g),
                Domain,
                "gamma must lie in [0, 1), got {g}"
            );
            let failures = g * n as f64 / 2.0;
            ensure!(
                (failures - failures.round()).abs() < 1e-9,
                Domain,
                "gamma * n / 2 = {failures} is not an integer"
            );
        }
        Ok(GameSpecRn {
            n,
            delta,
            epsilon,
            gamma,
        })
    }

    fn root_product(&self) -> f64 {
        (self.delta * self.epsilon).sqrt()
    }
}

/// Both sides of the quadrature-game bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RnBound {
    /// `C(n, n/2)^-1 Σ_k C(n/2, k)^2 (2 sqrt(δε))^k`
    pub exact_sum: f64,
    /// `sqrt(e) (1/2 + sqrt(δε))^(n/2)`
    pub closed_form: f64,
}

pub fn bound_rn(spec: &GameSpecRn) -> Result<RnBound> {
    ensure!(
        spec.gamma.is_none(),
        Domain,
        "bound_rn takes no gamma; use bound_rn_mode_failure"
    );
    let half = spec.n / 2;
    let x = 2.0 * spec.root_product();

    // ln C(n, n/2) = Σ_{i=1}^{h} ln((h + i) / i)
    let ln_central: f64 = (1..=half)
        .map(|i| ((half + i) as f64 / i as f64).ln())
        .sum();

    let exact_sum = if x == 0.0 {
        (-ln_central).exp()
    } else {
        let ln_x = x.ln();
        let mut ln_choose = 0.0;
        let mut logs = Vec::with_capacity(half + 1);
        for k in 0..=half {
            logs.push(2.0 * ln_choose + k as f64 * ln_x - ln_central);
            if k < half {
                ln_choose += ((half - k) as f64 / (k + 1) as f64).ln();
            }
        }
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        top.exp() * logs.iter().map(|l| (l - top).exp()).sum::<f64>()
    };

    let closed_form = E.sqrt() * (0.5 + spec.root_product()).powf(half as f64);
    Ok(RnBound {
        exact_sum,
        closed_form,
    })
}

/// `2^{[(1-γ) lg(1/2 + sqrt(δε)) + h(γ) + 1/(n ln 2)] n/2}`.
pub fn bound_rn_mode_failure(spec: &GameSpecRn) -> Result<Bound> {
    let gamma = spec
        .gamma
        .ok_or_else(|| crate::Error::Domain("bound_rn_mode_failure needs gamma".to_string()))?;
    let n = spec.n as f64;
    let exponent = (1.0 - gamma) * (0.5 + spec.root_product()).log2()
        + binary_entropy(gamma)?
        + 1.0 / (LN_2 * n);
    Ok(Bound::new((exponent * n / 2.0).exp2()))
}

/// GKP state-sending game over lattices with prime spacings `α_1 < .. < α_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpecGkp {
    alphas: Vec<u64>,
    pub epsilon: f64,
    pub support_cutoff: f64,
    pub damping: f64,
}

impl GameSpecGkp {
    pub fn new(alphas: Vec<u64>, epsilon: f64, support_cutoff: f64, damping: f64) -> Result<Self> {
        ensure!(
            !alphas.is_empty(),
            Domain,
            "need at least one lattice spacing"
        );
        ensure!(
            alphas.windows(2).all(|w| w[0] < w[1]) && alphas.iter().all(|&p| is_prime(p)),
            Domain,
            "alphas must be ascending primes: {alphas:?}"
        );
        ensure!(epsilon > 0.0, Domain, "epsilon must be positive");
        ensure!(
            support_cutoff > 0.0 && damping > 0.0,
            Domain,
            "support cutoff M and damping a must be positive"
        );
        Ok(GameSpecGkp {
            alphas,
            epsilon,
            support_cutoff,
            damping,
        })
    }

    pub fn alphas(&self) -> &[u64] {
        &self.alphas
    }
}

/// `1/N + 2 sqrt((α_N + 2M/α_1) ε) + sqrt((1/M) sqrt(2/(π a))) e^{-a M^2}`.
pub fn bound_gkp(spec: &GameSpecGkp) -> Bound {
    let n = spec.alphas.len() as f64;
    let first = spec.alphas[0] as f64;
    let last = *spec.alphas.last().unwrap() as f64;
    let m = spec.support_cutoff;
    let a = spec.damping;
    let lattice = 2.0 * ((last + 2.0 * m / first) * spec.epsilon).sqrt();
    let tail = ((1.0 / m) * (2.0 / (PI * a)).sqrt()).sqrt() * (-a * m * m).exp();
    Bound::new(1.0 / n + lattice + tail)
}

/// Evaluates the GKP bound at each cutoff and returns the smallest, with its cutoff.
pub fn bound_gkp_sweep(
    alphas: Vec<u64>,
    epsilon: f64,
    cutoffs: &[f64],
    damping: f64,
) -> Result<(f64, Bound)> {
    ensure!(!cutoffs.is_empty(), Domain, "empty cutoff list");
    let mut best: Option<(f64, Bound)> = None;
    for &m in cutoffs {
        let b = bound_gkp(&GameSpecGkp::new(alphas.clone(), epsilon, m, damping)?);
        if best.is_none_or(|(_, cur)| b.value < cur.value) {
            best = Some((m, b));
        }
    }
    Ok(best.unwrap())
}

impl fmt::Display for GameSpecU1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let primes: Vec<String> = self.primes.iter().map(u64::to_string).collect();
        write!(f, "primes={};epsilon={}", primes.join(" "), self.epsilon)
    }
}

impl fmt::Display for GameSpecRn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={};delta={};epsilon={}",
            self.n, self.delta, self.epsilon
        )?;
        if let Some(g) = self.gamma {
            write!(f, ";gamma={g}")?;
        }
        Ok(())
    }
}

impl fmt::Display for GameSpecGkp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let alphas: Vec<String> = self.alphas.iter().map(u64::to_string).collect();
        write!(
            f,
            "alphas={};epsilon={};M={};a={}",
            alphas.join(" "),
            self.epsilon,
            self.support_cutoff,
            self.damping
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn entropy_endpoints_and_midpoint() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert!((binary_entropy(0.25).unwrap() - 0.811_278_124_459_132_8).abs() < 1e-12);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn permutation_families() {
        assert!(orthogonal_permutations(0).is_err());
        let one = orthogonal_permutations(1).unwrap();
        assert_eq!(one, vec![Permutation(vec![0])]);
        let three = orthogonal_permutations(3).unwrap();
        assert_eq!(three[0].images(), &[0, 1, 2]);
        assert_eq!(three[1].images(), &[1, 2, 0]);
        assert_eq!(three[2].images(), &[2, 0, 1]);

        let four = orthogonal_permutations(4).unwrap();
        let q = four[2].compose(&four[1].inverse());
        assert_eq!(q.images(), &[1, 2, 3, 0]);
        assert_eq!(q.fixed_points(), 0);
    }

    #[test]
    fn permutation_families_are_orthogonal_exhaustively() {
        for m in 1..=64 {
            let fam = orthogonal_permutations(m).unwrap();
            assert_eq!(fam[0].fixed_points(), m);
            for (i, pi) in fam.iter().enumerate() {
                for (j, pj) in fam.iter().enumerate() {
                    let q = pi.compose(&pj.inverse());
                    if i == j {
                        assert_eq!(q.fixed_points(), m);
                    } else {
                        for k in 0..m {
                            assert_ne!(pi.apply(pj.inverse().apply(k)), k);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn u1_examples() {
        let spec = GameSpecU1::new(vec![2, 3, 5, 7], PI / 50.0).unwrap();
        assert!((bound_u1(&spec).value - (0.25 + 0.5f64.sqrt())).abs() < 1e-15);

        let spec = GameSpecU1::new(vec![101], PI / (101.0 * 101.0)).unwrap();
        let b = bound_u1(&spec);
        assert!(b.trivial);
        assert!((b.value - (1.0 + 1.0 / 101f64.sqrt())).abs() < 1e-15);

        let spec = GameSpecU1::new(vec![2, 3], PI / 9.0).unwrap();
        assert_eq!(bound_u1(&spec).value, 0.5 + 1.0 / 2f64.sqrt());

        let err = GameSpecU1::new(vec![2, 3], PI / 9.0 * 1.001).unwrap_err();
        assert!(matches!(err, crate::Error::Precondition(_)));
        assert!(GameSpecU1::new(vec![3, 2], 0.01).is_err());
        assert!(GameSpecU1::new(vec![2, 4], 0.01).is_err());
    }

    #[test]
    fn complex_examples() {
        assert_eq!(bound_complex(4, 0.0, 0.0).unwrap().value, 0.5);
        assert!((bound_complex(8, 1.0 / 16.0, 1.0 / 16.0).unwrap().value - 0.53125).abs() < 1e-15);
        let v = bound_complex(100, 1e-3, 1e-3).unwrap().value;
        assert!((v - 0.02404).abs() < 1e-12);
        assert!(bound_complex(6, 0.1, 0.1).is_err());
    }

    #[test]
    fn rn_small_cases() {
        let b = bound_rn(&GameSpecRn::new(2, 0.0, 0.0, None).unwrap()).unwrap();
        assert_eq!(b.exact_sum, 0.5);
        // 2 sqrt(δε) = 1/8
        let b = bound_rn(&GameSpecRn::new(2, 1.0 / 16.0, 1.0 / 16.0, None).unwrap()).unwrap();
        assert!((b.exact_sum - 0.5625).abs() < 1e-15);
        assert!(b.exact_sum <= b.closed_form);
        assert!(GameSpecRn::new(3, 0.1, 0.1, None).is_err());
    }

    #[test]
    fn mode_failure_examples() {
        for n in [2usize, 8, 16, 64] {
            let spec = GameSpecRn::new(n, 0.0, 0.0, Some(0.0)).unwrap();
            let v = bound_rn_mode_failure(&spec).unwrap().value;
            let expect = E.sqrt() * 2f64.powf(-(n as f64) / 2.0);
            assert!(
                (v - expect).abs() < 1e-14 * expect.max(1e-300),
                "{n}: {v} vs {expect}"
            );
        }
        let spec = GameSpecRn::new(16, 1.0 / 16.0, 1.0 / 16.0, Some(0.25)).unwrap();
        let b = bound_rn_mode_failure(&spec).unwrap();
        assert!(b.trivial && b.value > 1.0);
        let spec = GameSpecRn::new(16, 0.01, 0.01, Some(0.125)).unwrap();
        let v = bound_rn_mode_failure(&spec).unwrap().value;
        assert!((v.log2() + 1.73).abs() < 5e-3, "{v}");
        assert!(GameSpecRn::new(16, 0.01, 0.01, Some(0.1)).is_err());
    }

    #[test]
    fn gkp_examples() {
        let b = bound_gkp(&GameSpecGkp::new(vec![2, 3, 5], 0.001, 10.0, 1.0).unwrap());
        let expect = 1.0 / 3.0 + 2.0 * 0.015f64.sqrt();
        assert!((b.value - expect).abs() < 1e-12);
        assert!((b.value - 0.578).abs() < 1e-3);

        let b = bound_gkp(&GameSpecGkp::new(vec![2], 0.01, 5.0, 0.5).unwrap());
        let t1 = 1.0;
        let t2 = 2.0 * ((2.0 + 10.0 / 2.0) * 0.01f64).sqrt();
        let t3 = ((1.0 / 5.0) * (2.0 / (PI * 0.5)).sqrt()).sqrt() * (-12.5f64).exp();
        assert!((b.value - (t1 + t2 + t3)).abs() < 1e-14);

        // shrinking ε with growing M drives the bound to 1/N
        let alphas = vec![2, 3, 5, 7];
        let mut last = f64::INFINITY;
        for k in 1..8 {
            let m = 2.0 * k as f64;
            let eps = 1e-4 / 10f64.powi(2 * k);
            let v = bound_gkp(&GameSpecGkp::new(alphas.clone(), eps, m, 1.0).unwrap()).value;
            assert!(v <= last);
            last = v;
        }
        assert!((last - 0.25).abs() < 1e-6);

        assert!(GameSpecGkp::new(vec![2, 3], 0.1, 0.0, 1.0).is_err());
        assert!(GameSpecGkp::new(vec![2, 3], 0.1, 1.0, -1.0).is_err());

        let (m, best) = bound_gkp_sweep(vec![2, 3, 5], 1e-5, &[0.5, 1.0, 2.0, 4.0], 1.0).unwrap();
        assert!(
            m > 0.0
                && best.value
                    <= bound_gkp(&GameSpecGkp::new(vec![2, 3, 5], 1e-5, 4.0, 1.0).unwrap()).value
        );
    }

    #[test]
    fn report_row() {
        let spec = GameSpecU1::new(vec![101], PI / (101.0 * 101.0)).unwrap();
        let r = BoundReport::new("u1", spec.to_string(), bound_u1(&spec));
        assert!(r.csv_row().starts_with("u1,\"primes=101;"));
        assert!(r.csv_row().ends_with(",trivial"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn exact_sum_below_closed_form(half in 1usize..200, d in 0.0f64..2.0, e in 0.0f64..2.0) {
            let b = bound_rn(&GameSpecRn::new(2 * half, d, e, None).unwrap()).unwrap();
            prop_assert!(b.exact_sum <= b.closed_form * (1.0 + 1e-12));
        }

        #[test]
        fn bounds_monotone_in_precision(d1 in 0.0f64..0.5, d2 in 0.0f64..0.5, e in 0.0f64..0.5, half in 1usize..40) {
            let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            let n = 2 * half;
            let a = bound_rn(&GameSpecRn::new(n, lo, e, None).unwrap()).unwrap();
            let b = bound_rn(&GameSpecRn::new(n, hi, e, None).unwrap()).unwrap();
            prop_assert!(a.exact_sum <= b.exact_sum * (1.0 + 1e-12));
            prop_assert!(a.closed_form <= b.closed_form * (1.0 + 1e-12));

            let a = bound_complex(4 * half, lo, e).unwrap().value;
            let b = bound_complex(4 * half, hi, e).unwrap().value;
            prop_assert!(a <= b);

            let gkp_lo = bound_gkp(&GameSpecGkp::new(vec![2, 3, 5], lo.max(1e-9), 3.0, 1.0).unwrap()).value;
            let gkp_hi = bound_gkp(&GameSpecGkp::new(vec![2, 3, 5], hi.max(1e-9), 3.0, 1.0).unwrap()).value;
            prop_assert!(gkp_lo <= gkp_hi);
        }

        #[test]
        fn bounds_monotone_in_size(half in 1usize..60, de in 0.0f64..0.25) {
            // the quadrature sum decreases in n while 2 sqrt(δε) <= 1
            let small = bound_rn(&GameSpecRn::new(2 * half, de, 1.0, None).unwrap()).unwrap();
            let large = bound_rn(&GameSpecRn::new(2 * half + 2, de, 1.0, None).unwrap()).unwrap();
            prop_assert!(large.exact_sum <= small.exact_sum * (1.0 + 1e-12));
            prop_assert!(large.closed_form <= small.closed_form * (1.0 + 1e-12));
            prop_assert!(bound_complex(4 * half + 4, de, 1.0).unwrap().value <= bound_complex(4 * half, de, 1.0).unwrap().value);
        }

        #[test]
        fn mode_failure_monotone(de1 in 0.0f64..0.05, de2 in 0.0f64..0.05, k in 0usize..3) {
            let (lo, hi) = if de1 <= de2 { (de1, de2) } else { (de2, de1) };
            let gamma = k as f64 / 16.0;
            let a = bound_rn_mode_failure(&GameSpecRn::new(32, lo, 1.0, Some(gamma)).unwrap()).unwrap().value;
            let b = bound_rn_mode_failure(&GameSpecRn::new(32, hi, 1.0, Some(gamma)).unwrap()).unwrap().value;
            prop_assert!(a <= b * (1.0 + 1e-12));
        }
    }
}
