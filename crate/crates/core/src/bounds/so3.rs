//! The SO(3) game over the rotation subgroups `H_θ` (rotations about an axis
//! tilted by `θ` from Z) and the two-coset overlap that feeds its bound.
//!
//! Rotations are unit quaternions up to sign. The Z axis coset of a rotation
//! `g` is `{g Z(χ)}`; two rotations are `ε`-close when `|<p, q>| > 1 - ε²/2`.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rayon::prelude::*;

use super::Bound;
use crate::error::{ensure, Result};
use crate::seed;

const STREAM_SO3: u64 = 0x50_33;

/// Number of evenly spaced `β` values scanned before local refinement.
pub const BETA_GRID: usize = 720;
const REFINE_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameSpecSo3 {
    pub n: usize,
    pub epsilon: f64,
}

impl GameSpecSo3 {
    pub fn new(n: usize, epsilon: f64) -> Result<Self> {
        ensure!(
            n >= 2 && n % 2 == 0,
            Domain,
            "N must be even and positive, got {n}"
        );
        ensure!(epsilon > 0.0, Domain, "epsilon must be positive");
        let limit = 2.0 * (PI / (2.0 * n as f64)).sin();
        ensure!(
            epsilon < limit,
            Precondition,
            "epsilon = {epsilon} is not below 2 sin(pi/2N) = {limit}"
        );
        Ok(GameSpecSo3 { n, epsilon })
    }

    /// `2/N + 2 sqrt(π ε)`.
    pub fn bound(&self) -> Bound {
        Bound::new(2.0 / self.n as f64 + 2.0 * (PI * self.epsilon).sqrt())
    }

    /// The average of `sqrt(overlap(2πi/N, ε))` over `i`, which the closed form
    /// above dominates.
    pub fn averaged_overlaps(&self) -> Result<f64> {
        let n = self.n as f64;
        let mut total = 0.0;
        for i in 0..self.n {
            total += so3_coset_overlap(TAU * i as f64 / n, self.epsilon)?.sqrt();
        }
        Ok(total / n)
    }
}

fn check_overlap_args(theta: f64, epsilon: f64) -> Result<()> {
    ensure!(
        (0.0..TAU).contains(&theta),
        Domain,
        "theta must lie in [0, 2pi), got {theta}"
    );
    ensure!(
        epsilon > 0.0 && epsilon < 1.0,
        Domain,
        "epsilon must lie in (0, 1), got {epsilon}"
    );
    Ok(())
}

/// Half-angle `η` with `cos(η/2) = 1 - ε²/2`.
fn eta(epsilon: f64) -> f64 {
    2.0 * (1.0 - epsilon * epsilon / 2.0).acos()
}

/// Largest probability, over `β`, that `Z(φ)X(θ)` with uniform `φ` is `ε`-close
/// to the coset of `X(β)`.
///
/// Equals 1 when `|cos θ| > cos η`. Otherwise the winning set in `φ` is
/// `sin²(φ/2) < (cos(θ-β) - cos η) / (2 sin θ sin β)`, whose measure is
/// maximised at `sin² β = sin² η / sin² θ`.
pub fn so3_coset_overlap(theta: f64, epsilon: f64) -> Result<f64> {
    check_overlap_args(theta, epsilon)?;
    let eta = eta(epsilon);
    if theta.cos().abs() > eta.cos() {
        return Ok(1.0);
    }
    let ratio = (eta.sin() / theta.sin()).powi(2).min(1.0);
    let inner = ((1.0 - (1.0 - ratio).sqrt()) / 2.0).sqrt();
    Ok(2.0 / PI * inner.asin())
}

/// The same overlap as it is usually quoted, with `1 - sqrt(1 - r)` in place
/// of `(1 - sqrt(1 - r)) / 2`. Kept for comparison; it overstates the overlap.
pub fn so3_coset_overlap_published(theta: f64, epsilon: f64) -> Result<f64> {
    check_overlap_args(theta, epsilon)?;
    let eta = eta(epsilon);
    if theta.cos().abs() > eta.cos() {
        return Ok(1.0);
    }
    let ratio = (eta.sin() / theta.sin()).powi(2).min(1.0);
    Ok(2.0 / PI * (1.0 - (1.0 - ratio).sqrt()).sqrt().asin())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct So3Estimate {
    pub estimate: f64,
    pub std_error: f64,
    /// The coset angle at which the estimate was attained.
    pub beta: f64,
}

type Quat = [f64; 4];

fn qmul(p: Quat, q: Quat) -> Quat {
    [
        p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3],
        p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2],
        p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1],
        p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0],
    ]
}

fn dot(p: Quat, q: Quat) -> f64 {
    p.iter().zip(q).map(|(a, b)| a * b).sum()
}

fn rot_z(angle: f64) -> Quat {
    [(angle / 2.0).cos(), (angle / 2.0).sin(), 0.0, 0.0]
}

fn rot_x(angle: f64) -> Quat {
    [(angle / 2.0).cos(), 0.0, 0.0, (angle / 2.0).sin()]
}

/// Monte Carlo estimate of [`so3_coset_overlap`] that only uses quaternion
/// arithmetic. The same `φ` samples are reused for every `β`.
pub fn so3_overlap_mc(theta: f64, epsilon: f64, trials: usize, seed: u64) -> Result<So3Estimate> {
    check_overlap_args(theta, epsilon)?;
    ensure!(
        trials >= 1000,
        Domain,
        "need at least 1000 trials, got {trials}"
    );

    let half_phis: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let phi: f64 = seed::rng(seed, STREAM_SO3, i as u64).random_range(0.0..TAU);
            ((phi / 2.0).cos(), (phi / 2.0).sin())
        })
        .collect();

    let base = rot_x(theta);
    let twisted = qmul(rot_z(PI), base);
    let threshold = (1.0 - epsilon * epsilon / 2.0).powi(2);

    // p(φ) = cos(φ/2) base + sin(φ/2) twisted; the coset of X(β) is spanned by
    // u = X(β) and v = X(β) Z(π).
    let count = |beta: f64| -> usize {
        let u = rot_x(beta);
        let v = qmul(u, rot_z(PI));
        let (bu, tu, bv, tv) = (dot(base, u), dot(twisted, u), dot(base, v), dot(twisted, v));
        half_phis
            .iter()
            .filter(|(c, s)| {
                let a = c * bu + s * tu;
                let b = c * bv + s * tv;
                a * a + b * b > threshold
            })
            .count()
    };

    let step = TAU / BETA_GRID as f64;
    let (best_idx, mut best) = (0..BETA_GRID)
        .into_par_iter()
        .map(|j| (j, count(j as f64 * step)))
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0, 0), |acc, x| if x.1 > acc.1 { x } else { acc });
    let mut best_beta = best_idx as f64 * step;

    let centre = best_beta;
    let refined: Vec<(f64, usize)> = (0..=REFINE_POINTS)
        .into_par_iter()
        .map(|k| {
            let beta = centre - step + 2.0 * step * k as f64 / REFINE_POINTS as f64;
            (beta, count(beta))
        })
        .collect();
    for (beta, c) in refined {
        if c > best {
            best = c;
            best_beta = beta.rem_euclid(TAU);
        }
    }

    let p = best as f64 / trials as f64;
    Ok(So3Estimate {
        estimate: p,
        std_error: (p * (1.0 - p) / trials as f64).sqrt(),
        beta: best_beta,
    })
}
