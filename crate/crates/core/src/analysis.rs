//! Asymptotic key rate against error tolerance, with and without the
//! completeness constraints, and plain-text data emission.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::bounds::binary_entropy;
use crate::coding::BinConfig;
use crate::config::Config;
use crate::cv_gaussian::{
    expected_mismatch_momentum, expected_mismatch_position, AgwnParams, Damping,
};
use crate::error::{ensure, Error, Result};
use crate::qkd::truncation_terms;

/// Absolute tolerance of the tolerance-threshold bisection.
pub const BISECTION_TOL: f64 = 1e-6;

/// Parameters of the asymptotic analysis: squeezing `Δ` with `a = Δ²/2`,
/// `b = 1/(2Δ²)`, bin widths and index sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticParams {
    pub squeeze: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub n_m: usize,
    pub n_n: usize,
}

pub const ASYMPTOTIC_KEYS: &[&str] = &["squeeze", "delta", "epsilon", "n_m", "n_n"];

impl AsymptoticParams {
    pub fn new(squeeze: f64, delta: f64, epsilon: f64, n_m: usize, n_n: usize) -> Result<Self> {
        let p = AsymptoticParams {
            squeeze,
            delta,
            epsilon,
            n_m,
            n_n,
        };
        p.damping()?;
        p.pos_bins()?;
        p.mom_bins()?;
        Ok(p)
    }

    /// `Δ = 0.001`, `δ = 4`, `ε = 1/64`, `n_M = n_N = 16`.
    pub fn reference() -> Self {
        AsymptoticParams::new(0.001, 4.0, 1.0 / 64.0, 16, 16)
            .expect("reference parameters are valid")
    }

    pub fn from_config(cfg: &Config) -> Result<Self> {
        let r = Self::reference();
        AsymptoticParams::new(
            cfg.get_or("squeeze", r.squeeze)?,
            cfg.get_or("delta", r.delta)?,
            cfg.get_or("epsilon", r.epsilon)?,
            cfg.get_or("n_m", r.n_m)?,
            cfg.get_or("n_n", r.n_n)?,
        )
    }

    pub fn damping(&self) -> Result<Damping> {
        ensure!(
            self.squeeze > 0.0 && self.squeeze < 1.0,
            Domain,
            "squeeze must lie in (0, 1) so that b > a"
        );
        Damping::from_squeeze(self.squeeze)
    }

    pub fn pos_bins(&self) -> Result<BinConfig> {
        BinConfig::new(self.delta, self.n_m)
    }

    pub fn mom_bins(&self) -> Result<BinConfig> {
        BinConfig::new(self.epsilon, self.n_n)
    }
}

/// The terms of the key-generation condition at one `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LhsTerms {
    /// `-lg(1/2 + sqrt(δε))`.
    pub constant: f64,
    /// Coefficient of `h(γ)`, namely `1 + n_N`.
    pub entropy_coefficient: f64,
    pub position_truncation: f64,
    pub momentum_truncation: f64,
    pub value: f64,
}

/// `-(1-γ)lg(1/2+sqrt(δε)) - (1+n_N)h(γ)` plus the two truncation terms,
/// with Gilbert-Varshamov syndromes `2s/n = n_N h(γ)`.
pub fn asymptotic_terms(gamma: f64, p: &AsymptoticParams) -> Result<LhsTerms> {
    ensure!(
        (0.0..=0.5).contains(&gamma),
        Domain,
        "gamma must lie in [0, 1/2], got {gamma}"
    );
    let (tq, tp) = truncation_terms(p.damping()?, &p.pos_bins()?, &p.mom_bins()?)?;
    let constant = -(0.5 + (p.delta * p.epsilon).sqrt()).log2();
    let entropy_coefficient = 1.0 + p.n_n as f64;
    let value = (1.0 - gamma) * constant - entropy_coefficient * binary_entropy(gamma)? + tq + tp;
    Ok(LhsTerms {
        constant,
        entropy_coefficient,
        position_truncation: tq,
        momentum_truncation: tp,
        value,
    })
}

pub fn asymptotic_lhs(gamma: f64, p: &AsymptoticParams) -> Result<f64> {
    Ok(asymptotic_terms(gamma, p)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub rate: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToleranceCurve {
    pub points: Vec<CurvePoint>,
    /// Root of the left-hand side in `γ`.
    pub gamma_max: f64,
    /// Half the left-hand side at `γ = 0`.
    pub r_max: f64,
}

impl ToleranceCurve {
    pub fn dataset(&self) -> Dataset {
        Dataset {
            columns: vec!["rate".into(), "gamma".into()],
            rows: self.points.iter().map(|p| vec![p.rate, p.gamma]).collect(),
        }
    }
}

/// Largest `γ` with a nonnegative left-hand side, by bisection.
pub fn gamma_max(p: &AsymptoticParams) -> Result<f64> {
    let f = |g: f64| asymptotic_lhs(g, p);
    if f(0.0)? <= 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, 0.5);
    if f(hi)? > 0.0 {
        return Ok(hi);
    }
    while hi - lo > BISECTION_TOL / 4.0 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Samples `γ` evenly on `[0, γ_max]` and pairs it with `r = max(0, lhs/2)`.
pub fn tolerance_curve(p: &AsymptoticParams, grid_points: usize) -> Result<ToleranceCurve> {
    ensure!(grid_points >= 2, Domain, "need at least two grid points");
    let gmax = gamma_max(p)?;
    let points = (0..grid_points)
        .map(|i| {
            let gamma = gmax * i as f64 / (grid_points - 1) as f64;
            Ok(CurvePoint {
                rate: (asymptotic_lhs(gamma, p)? / 2.0).max(0.0),
                gamma,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ToleranceCurve {
        points,
        gamma_max: gmax,
        r_max: (asymptotic_lhs(0.0, p)? / 2.0).max(0.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// `γ` must exceed the expected position mismatch.
    PositionMismatch,
    /// The code's relative distance must exceed the expected per-bit momentum mismatch.
    CodeDistance,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constraint::PositionMismatch => "position-mismatch",
            Constraint::CodeDistance => "code-distance",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstrainedRate {
    pub rate: f64,
    pub feasible: bool,
    /// Smallest `γ` satisfying both completeness conditions.
    pub gamma_required: f64,
    pub position_floor: f64,
    pub distance_floor: f64,
    pub binding: Constraint,
}

/// The best rate once completeness is imposed.
///
/// The tolerance `γ` is used twice: as the estimation threshold, which must
/// exceed the expected position mismatch, and as the relative distance of a
/// Gilbert-Varshamov code with `s/(nn_N/2) = h(γ)`, which must exceed the
/// expected momentum mismatch per bit. The rate is then `lhs(γ)/2` at the
/// smallest admissible `γ`, or 0 with the binding condition named.
pub fn completeness_constrained_rate(
    p: &AsymptoticParams,
    noise: AgwnParams,
) -> Result<ConstrainedRate> {
    let damping = p.damping()?;
    let position_floor = expected_mismatch_position(damping, p.delta, noise.x)?;
    let distance_floor = expected_mismatch_momentum(damping, p.epsilon, noise.y)? / p.n_n as f64;
    let (gamma_required, binding) = if position_floor >= distance_floor {
        (position_floor, Constraint::PositionMismatch)
    } else {
        (distance_floor, Constraint::CodeDistance)
    };
    let lhs = if gamma_required <= 0.5 {
        asymptotic_lhs(gamma_required, p)?
    } else {
        f64::NEG_INFINITY
    };
    let feasible = lhs > 0.0;
    Ok(ConstrainedRate {
        rate: if feasible { lhs / 2.0 } else { 0.0 },
        feasible,
        gamma_required,
        position_floor,
        distance_floor,
        binding,
    })
}

/// Largest position and momentum noise scales that keep the constrained rate
/// positive, each with the other scale at 0.
pub fn noise_thresholds(p: &AsymptoticParams) -> Result<(f64, f64)> {
    let damping = p.damping()?;
    let gmax = gamma_max(p)?;
    let g1 = expected_mismatch_position(damping, p.delta, 0.0)?;
    let g2 = expected_mismatch_momentum(damping, p.epsilon, 0.0)? / p.n_n as f64;
    ensure!(
        g1 < gmax && g2 < gmax,
        Precondition,
        "completeness fails even on the identity channel"
    );
    let (a, b) = (damping.a(), damping.b());
    let x = (((gmax / g1).powi(2) - 1.0) / (2.0 * b)).sqrt();
    let y = (((gmax / g2).powi(2) - 1.0)
        / (2.0 * std::f64::consts::PI.powi(2) * (1.0 / a + 1.0 / b)))
        .sqrt();
    Ok((x, y))
}

/// Named numeric columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Gnuplot,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "gnuplot" | "gnuplot-data" | "dat" => Ok(Format::Gnuplot),
            _ => Err(Error::Parse(format!("unknown format '{s}'"))),
        }
    }
}

/// 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV with a header row, or whitespace-separated columns behind a `#` header.
pub fn emit<W: Write>(data: &Dataset, format: Format, out: &mut W) -> Result<()> {
    ensure!(
        !data.rows.is_empty() && !data.columns.is_empty(),
        Validation,
        "empty dataset"
    );
    ensure!(
        data.rows.iter().all(|r| r.len() == data.columns.len()),
        Validation,
        "row width does not match the {} columns",
        data.columns.len()
    );
    let sep = match format {
        Format::Csv => {
            writeln!(out, "{}", data.columns.join(","))?;
            ","
        }
        Format::Gnuplot => {
            writeln!(out, "# {}", data.columns.join(" "))?;
            " "
        }
    };
    for row in &data.rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_num(x)).collect();
        writeln!(out, "{}", cells.join(sep))?;
    }
    Ok(())
}

pub fn emit_to_path(data: &Dataset, format: Format, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    emit(data, format, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_point() {
        let p = AsymptoticParams::reference();
        let t = asymptotic_terms(0.0, &p).unwrap();
        assert!((t.constant - (4.0f64 / 3.0).log2()).abs() < 1e-15);
        assert_eq!(t.entropy_coefficient, 17.0);
        assert!(t.position_truncation.abs() < 1e-4 && t.momentum_truncation.abs() < 1e-4);
        let gmax = gamma_max(&p).unwrap();
        assert!(asymptotic_lhs(gmax - 1e-6, &p).unwrap() > 0.0);
        assert!(asymptotic_lhs(gmax + 1e-6, &p).unwrap() < 0.0);
    }

    #[test]
    fn curve_is_monotone() {
        let c = tolerance_curve(&AsymptoticParams::reference(), 50).unwrap();
        assert_eq!(c.points[0].rate, c.r_max);
        assert!(c
            .points
            .windows(2)
            .all(|w| w[1].rate < w[0].rate || w[1].rate == 0.0));
        assert!(tolerance_curve(&AsymptoticParams::reference(), 1).is_err());
    }

    #[test]
    fn constrained_rate_names_the_binding_condition() {
        let p = AsymptoticParams::reference();
        let id = completeness_constrained_rate(&p, AgwnParams::identity()).unwrap();
        assert!(id.feasible && id.binding == Constraint::CodeDistance);
        let (x, _) = noise_thresholds(&p).unwrap();
        let loud =
            completeness_constrained_rate(&p, AgwnParams::new(2.0 * x, 0.0).unwrap()).unwrap();
        assert!(!loud.feasible && loud.rate == 0.0);
        assert_eq!(loud.binding, Constraint::PositionMismatch);
    }

    #[test]
    fn emission() {
        let d = Dataset {
            columns: vec!["r".into(), "g".into()],
            rows: vec![vec![0.1, 0.5], vec![1.0 / 3.0, 0.0]],
        };
        let mut a = Vec::new();
        emit(&d, Format::Csv, &mut a).unwrap();
        let text = String::from_utf8(a).unwrap();
        assert_eq!(text.lines().next(), Some("r,g"));
        assert!(text.contains("3.3333333333333331e-1"));
        let mut g = Vec::new();
        emit(&d, Format::Gnuplot, &mut g).unwrap();
        assert!(String::from_utf8(g).unwrap().starts_with("# r g\n"));
        let empty = Dataset {
            columns: vec!["r".into()],
            rows: vec![],
        };
        assert!(matches!(
            emit(&empty, Format::Csv, &mut Vec::new()),
            Err(Error::Validation(_))
        ));
    }
}
