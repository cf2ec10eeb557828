//! Gaussian primitives for damped squeezed coset states.
//!
//! Nothing here touches wavefunctions. Sampling and homodyne detection work
//! with the exact outcome Gaussians implied by the squared overlaps:
//!
//! | quantity                 | variance             |
//! |--------------------------|----------------------|
//! | sampled position `q`     | `1/(4a)`             |
//! | sampled momentum `p`     | `(a+b)/(4π²)`        |
//! | position outcome         | `1/(4b)`             |
//! | momentum outcome         | `ab/(4π²(a+b))`      |

use std::f64::consts::PI;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::seed;

const STREAM_Q: u64 = 0xc0_5e71;
const STREAM_P: u64 = 0xc0_5e72;

/// Smallest per-coordinate acceptance rate for which truncated sampling runs.
pub const MIN_ACCEPTANCE: f64 = 1e-6;

/// The damping pair `(a, b)` with `b > a > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Damping {
    a: f64,
    b: f64,
}

impl Damping {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        ensure!(
            a > 0.0 && b > a && b.is_finite(),
            Domain,
            "damping needs b > a > 0, got a = {a}, b = {b}"
        );
        Ok(Damping { a, b })
    }

    /// The symmetric choice `a = Δ²/2`, `b = 1/(2Δ²)`.
    pub fn from_squeeze(delta: f64) -> Result<Self> {
        ensure!(delta > 0.0, Domain, "squeeze parameter must be positive");
        Damping::new(delta * delta / 2.0, 1.0 / (2.0 * delta * delta))
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn sample_q_variance(&self) -> f64 {
        1.0 / (4.0 * self.a)
    }

    pub fn sample_p_variance(&self) -> f64 {
        (self.a + self.b) / (4.0 * PI * PI)
    }

    pub fn position_outcome_variance(&self) -> f64 {
        1.0 / (4.0 * self.b)
    }

    pub fn momentum_outcome_variance(&self) -> f64 {
        self.a * self.b / (4.0 * PI * PI * (self.a + self.b))
    }
}

/// The squeezed state `|a, x0, p0⟩`, whose position variance is `1/(4a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedMode {
    pub a: f64,
    pub x0: f64,
    pub p0: f64,
}

/// A register subspace `span{e_i : i ∈ I}` of `R^n` with `|I| = n/2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterSubspace {
    n: usize,
    indices: Vec<usize>,
}

impl RegisterSubspace {
    pub fn new(n: usize, mut indices: Vec<usize>) -> Result<Self> {
        ensure!(
            n > 0 && n % 2 == 0,
            Domain,
            "mode count must be even, got {n}"
        );
        indices.sort_unstable();
        indices.dedup();
        ensure!(
            indices.len() == n / 2 && indices.iter().all(|&i| i < n),
            Validation,
            "register subspace needs n/2 distinct indices below {n}"
        );
        Ok(RegisterSubspace { n, indices })
    }

    /// Uniform over the `C(n, n/2)` register subspaces.
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Result<Self> {
        ensure!(
            n > 0 && n % 2 == 0,
            Domain,
            "mode count must be even, got {n}"
        );
        RegisterSubspace::new(n, sample(rng, n, n / 2).into_vec())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The momentum-encoded modes `I`.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// The position-encoded modes, `I` complement.
    pub fn complement(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|i| self.indices.binary_search(i).is_err())
            .collect()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// `mask[i]` is set for `i ∈ I`.
    pub fn mask(&self) -> Vec<bool> {
        (0..self.n).map(|i| self.contains(i)).collect()
    }

    pub fn from_mask(mask: &[bool]) -> Result<Self> {
        let idx = mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| i)
            .collect();
        RegisterSubspace::new(mask.len(), idx)
    }
}

/// Noise scales of the additive Gaussian white noise channel. `x = y = 0` is
/// the identity channel.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AgwnParams {
    pub x: f64,
    pub y: f64,
}

impl AgwnParams {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        ensure!(
            x >= 0.0 && y >= 0.0 && x.is_finite() && y.is_finite(),
            Domain,
            "noise scales must be finite and nonnegative"
        );
        Ok(AgwnParams { x, y })
    }

    pub fn identity() -> Self {
        AgwnParams { x: 0.0, y: 0.0 }
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0.0 && self.y == 0.0
    }
}

/// A damped coset state of a register subspace: positions `q` on the modes
/// outside `I` and momenta `p` on the modes in `I`, both in increasing mode order.
#[derive(Debug, Clone, PartialEq)]
pub struct DampedCosetState {
    pub subspace: RegisterSubspace,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub damping: Damping,
}

impl DampedCosetState {
    pub fn new(
        subspace: RegisterSubspace,
        q: Vec<f64>,
        p: Vec<f64>,
        damping: Damping,
    ) -> Result<Self> {
        let half = subspace.n() / 2;
        ensure!(
            q.len() == half && p.len() == half,
            Validation,
            "need {half} positions and {half} momenta"
        );
        Ok(DampedCosetState {
            subspace,
            q,
            p,
            damping,
        })
    }

    /// Per-mode factors: `|b, q_i, 0⟩` off `I` and `|ab/(a+b), 0, -b p_i/(a+b)⟩` on `I`.
    pub fn modes(&self) -> Vec<SqueezedMode> {
        let (a, b) = (self.damping.a, self.damping.b);
        let (mut qi, mut pi) = (self.q.iter(), self.p.iter());
        (0..self.subspace.n())
            .map(|i| {
                if self.subspace.contains(i) {
                    let p = *pi.next().unwrap();
                    SqueezedMode {
                        a: a * b / (a + b),
                        x0: 0.0,
                        p0: -b * p / (a + b),
                    }
                } else {
                    SqueezedMode {
                        a: b,
                        x0: *qi.next().unwrap(),
                        p0: 0.0,
                    }
                }
            })
            .collect()
    }
}

/// Standard normal mass inside `[-cut, cut)` for a centred Gaussian.
fn acceptance(sigma: f64, cut: f64) -> f64 {
    libm::erf(cut / (sigma * std::f64::consts::SQRT_2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CosetSample {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    /// Draws rejected by the cutoffs, over all coordinates.
    pub resamples: u64,
}

fn truncated_draws(count: usize, sigma: f64, cut: f64, seed: u64, stream: u64) -> (Vec<f64>, u64) {
    let normal = Normal::new(0.0, sigma).expect("positive finite sigma");
    let draws: Vec<(f64, u64)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::rng(seed, stream, i as u64);
            let mut rejected = 0;
            loop {
                let v: f64 = normal.sample(&mut rng);
                if (-cut..cut).contains(&v) {
                    return (v, rejected);
                }
                rejected += 1;
            }
        })
        .collect();
    let total = draws.iter().map(|d| d.1).sum();
    (draws.into_iter().map(|d| d.0).collect(), total)
}

/// Draws `(q, p)` from the damped-state distribution
/// `∝ exp(-2a|q|² - (2π²/(a+b))|p|²)`, truncated to `[-q_cut, q_cut)` and
/// `[-p_cut, p_cut)` per coordinate by resampling.
pub fn sample_coset_params(
    subspace: &RegisterSubspace,
    damping: Damping,
    q_cut: f64,
    p_cut: f64,
    seed: u64,
) -> Result<CosetSample> {
    ensure!(
        q_cut > 0.0 && p_cut > 0.0,
        Domain,
        "cutoffs must be positive"
    );
    let sq = damping.sample_q_variance().sqrt();
    let sp = damping.sample_p_variance().sqrt();
    for (name, s, c) in [("position", sq, q_cut), ("momentum", sp, p_cut)] {
        let acc = acceptance(s, c);
        if acc < MIN_ACCEPTANCE {
            return Err(Error::Resource(format!(
                "{name} cutoff {c} keeps only {acc:e} of the mass"
            )));
        }
    }
    let half = subspace.n() / 2;
    let (q, rq) = truncated_draws(half, sq, q_cut, seed, STREAM_Q);
    let (p, rp) = truncated_draws(half, sp, p_cut, seed, STREAM_P);
    Ok(CosetSample {
        q,
        p,
        resamples: rq + rp,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    Position,
    Momentum,
}

/// One homodyne outcome on a damped mode sent through the AGWN channel.
///
/// Position: `N(q + ξ, 1/(4b))` with `ξ ~ N(0, x²/2)`.
/// Momentum: `N(-p/(1+a/b) + φ, ab/(4π²(a+b)))` with `φ ~ N(0, y²/2)`.
/// A zero noise scale draws nothing, so the identity channel consumes the
/// same random numbers as the noiseless path.
pub fn homodyne_measure<R: Rng>(
    kind: Quadrature,
    true_val: f64,
    damping: Damping,
    noise: AgwnParams,
    rng: &mut R,
) -> f64 {
    let (mean, var, scale) = match kind {
        Quadrature::Position => (true_val, damping.position_outcome_variance(), noise.x),
        Quadrature::Momentum => (
            -true_val / (1.0 + damping.a / damping.b),
            damping.momentum_outcome_variance(),
            noise.y,
        ),
    };
    let shift = if scale > 0.0 {
        Normal::new(0.0, scale / std::f64::consts::SQRT_2)
            .expect("positive noise scale")
            .sample(rng)
    } else {
        0.0
    };
    let z: f64 = rng.sample(rand_distr::StandardNormal);
    mean + shift + var.sqrt() * z
}

/// Bob's estimate `-(1 + a/b) p̂` of the encoded momentum.
pub fn rescale_momentum(outcome: f64, damping: Damping) -> f64 {
    -(1.0 + damping.a / damping.b) * outcome
}

/// `6 sqrt(1 + 2bx²) / (sqrt(2πb) δ)`.
pub fn expected_mismatch_position(damping: Damping, delta: f64, x: f64) -> Result<f64> {
    ensure!(delta > 0.0 && x >= 0.0, Domain, "need delta > 0 and x >= 0");
    let b = damping.b;
    Ok(6.0 * (1.0 + 2.0 * b * x * x).sqrt() / ((2.0 * PI * b).sqrt() * delta))
}

/// `3 sqrt(a(1+a/b)) / (π^{3/2} ε) · sqrt(1 + 2π²(1/a + 1/b) y²)`.
pub fn expected_mismatch_momentum(damping: Damping, epsilon: f64, y: f64) -> Result<f64> {
    ensure!(
        epsilon > 0.0 && y >= 0.0,
        Domain,
        "need epsilon > 0 and y >= 0"
    );
    let (a, b) = (damping.a, damping.b);
    let base = 3.0 * (a * (1.0 + a / b)).sqrt() / (PI.powf(1.5) * epsilon);
    Ok(base * (1.0 + 2.0 * PI * PI * (1.0 / a + 1.0 / b) * y * y).sqrt())
}

/// Densities accepted by [`floor_integral_check`]: symmetric and nonincreasing in `|x|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestDensity {
    Gaussian { sigma: f64 },
    Uniform { half_width: f64 },
}

impl TestDensity {
    fn pdf(&self, x: f64) -> f64 {
        match *self {
            TestDensity::Gaussian { sigma } => {
                (-x * x / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * PI).sqrt())
            }
            TestDensity::Uniform { half_width } => {
                if x.abs() <= half_width {
                    0.5 / half_width
                } else {
                    0.0
                }
            }
        }
    }

    fn scale(&self) -> f64 {
        match *self {
            TestDensity::Gaussian { sigma } => sigma,
            TestDensity::Uniform { half_width } => half_width,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub points: usize,
    /// Half-width of the square; `None` picks `max(8σ, 8/sqrt(α))`.
    pub half_width: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points: 4001,
            half_width: None,
        }
    }
}

fn trapezoid_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i + 1 == n {
        0.5
    } else {
        1.0
    }
}

/// Trapezoid-rule value of `∬ |⌊x+½⌋ - ⌊y+½⌋| e^{-α(x-y)²} π(x) dx dy`,
/// which is at most `6/α` for any symmetric density nonincreasing in `|x|`.
pub fn floor_integral_check(alpha: f64, density: TestDensity, grid: GridSpec) -> Result<f64> {
    ensure!(alpha > 0.0, Domain, "alpha must be positive");
    ensure!(
        density.scale() > 0.0,
        Domain,
        "density scale must be positive"
    );
    ensure!(grid.points >= 3, Domain, "grid needs at least 3 points");
    let l = grid
        .half_width
        .unwrap_or_else(|| (8.0 * density.scale()).max(8.0 / alpha.sqrt()));
    let n = grid.points;
    let h = 2.0 * l / (n - 1) as f64;
    // centred indices keep the grid exactly symmetric
    let mid = (n - 1) as f64 / 2.0;
    let xs: Vec<f64> = (0..n).map(|i| (i as f64 - mid) * h).collect();
    let pdf: Vec<f64> = xs.iter().map(|&x| density.pdf(x)).collect();

    let mass: f64 = pdf
        .iter()
        .enumerate()
        .map(|(i, p)| p * trapezoid_weight(i, n))
        .sum::<f64>()
        * h;
    ensure!(
        (mass - 1.0).abs() < 1e-2,
        Validation,
        "density integrates to {mass} on the grid"
    );
    for i in n / 2..n - 1 {
        ensure!(
            pdf[i + 1] <= pdf[i] && (pdf[n - 1 - i] - pdf[i]).abs() <= 1e-12 * pdf[i].max(1e-300),
            Validation,
            "density is not symmetric and nonincreasing in |x|"
        );
    }

    let bins: Vec<f64> = xs.iter().map(|&x| (x + 0.5).floor()).collect();
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            if pdf[i] == 0.0 {
                return 0.0;
            }
            let mut acc = 0.0;
            for j in 0..n {
                let d = (bins[i] - bins[j]).abs();
                if d != 0.0 {
                    let t = xs[i] - xs[j];
                    acc += trapezoid_weight(j, n) * d * (-alpha * t * t).exp();
                }
            }
            trapezoid_weight(i, n) * pdf[i] * acc
        })
        .collect();
    Ok(rows.iter().sum::<f64>() * h * h)
}
