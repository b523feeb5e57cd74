//! α-coverings of the frequency line generated by the position and size
//! functions
//!
//! ```text
//! p(j) = sgn(j)·((1 + (1-α)·b·|j|)^{1/(1-α)} - 1)
//! s(j) = b·(1 + (1-α)·b·(|j|+1))^{α/(1-α)}
//! ```
//!
//! with intervals `I_j = p(j) + sgn(p(j))·[0, s(j)]` for `j ≠ 0` and
//! `I_0 = [-s(0), s(0)]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::GridSpec;

/// Fraction of Nyquist the covered band may reach when `jmax` is derived from a grid.
pub const NYQUIST_MARGIN: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringSpec {
    alpha: f64,
    b: f64,
    jmax: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringInterval {
    pub j: i64,
    pub left: f64,
    pub right: f64,
    /// Reference frequency `ω_{I_j} = p(j)`.
    pub omega: f64,
}

impl CoveringInterval {
    pub fn contains(&self, xi: f64) -> bool {
        self.left <= xi && xi <= self.right
    }
    pub fn length(&self) -> f64 {
        self.right - self.left
    }
}

impl CoveringSpec {
    pub fn new(alpha: f64, b: f64, jmax: i64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in [0, 1)")));
        }
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::InvalidParameter(format!("b = {b} must be positive")));
        }
        if jmax < 0 {
            return Err(Error::InvalidParameter("jmax must be nonnegative".into()));
        }
        Ok(CoveringSpec { alpha, b, jmax })
    }

    /// Largest `J` with `p(J) + s(J) < 0.9·Nyquist`.
    pub fn for_grid(alpha: f64, b: f64, grid: &GridSpec) -> Result<Self> {
        let probe = CoveringSpec::new(alpha, b, 0)?;
        let limit = NYQUIST_MARGIN * grid.nyquist();
        if probe.size(0) >= limit {
            return Err(Error::InvalidParameter(format!(
                "the central interval already exceeds {NYQUIST_MARGIN}·Nyquist"
            )));
        }
        let mut j = 0;
        while probe.position(j + 1) + probe.size(j + 1) < limit {
            j += 1;
        }
        CoveringSpec::new(alpha, b, j)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn jmax(&self) -> i64 {
        self.jmax
    }
    pub fn with_jmax(&self, jmax: i64) -> Result<Self> {
        CoveringSpec::new(self.alpha, self.b, jmax)
    }
    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        -self.jmax..=self.jmax
    }

    /// Checks the covered band stays below the grid's Nyquist frequency.
    pub fn validate_for_grid(&self, grid: &GridSpec) -> Result<()> {
        let edge = self.position(self.jmax) + self.size(self.jmax);
        if edge >= grid.nyquist() {
            return Err(Error::InvalidParameter(format!(
                "covered band edge {edge} reaches Nyquist {}",
                grid.nyquist()
            )));
        }
        Ok(())
    }

    pub fn position(&self, j: i64) -> f64 {
        let beta = 1.0 - self.alpha;
        let mag = (1.0 + beta * self.b * j.unsigned_abs() as f64).powf(1.0 / beta) - 1.0;
        mag * j.signum() as f64
    }

    pub fn size(&self, j: i64) -> f64 {
        let beta = 1.0 - self.alpha;
        self.b * (1.0 + beta * self.b * (j.unsigned_abs() as f64 + 1.0)).powf(self.alpha / beta)
    }

    pub fn interval(&self, j: i64) -> CoveringInterval {
        let p = self.position(j);
        let s = self.size(j);
        let (left, right) = match j.signum() {
            0 => (-s, s),
            1 => (p, p + s),
            _ => (p - s, p),
        };
        CoveringInterval { j, left, right, omega: p }
    }

    pub fn intervals(&self) -> Vec<CoveringInterval> {
        self.indices().map(|j| self.interval(j)).collect()
    }

    /// `[left(-J), right(J)]`.
    pub fn covered_range(&self) -> (f64, f64) {
        (self.interval(-self.jmax).left, self.interval(self.jmax).right)
    }

    /// Weight `m_{s,α}(j) = (1 + (1-α)|j|)^{s/(1-α)}`.
    pub fn weight(&self, j: i64, s: f64) -> f64 {
        weight(self.alpha, j, s)
    }
}

pub fn weight(alpha: f64, j: i64, s: f64) -> f64 {
    let beta = 1.0 - alpha;
    (1.0 + beta * j.unsigned_abs() as f64).powf(s / beta)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub max_overlap: usize,
    pub gap_found: bool,
    pub gap_at: Option<f64>,
    pub ratio_min: f64,
    pub ratio_max: f64,
}

impl AdmissibilityReport {
    pub fn pass(&self) -> bool {
        self.max_overlap <= 2 && !self.gap_found
    }
}

/// Scans the grid points of `xi` that fall inside the covered range.
pub fn verify_admissible(spec: &CoveringSpec, xi: &[f64]) -> AdmissibilityReport {
    let ivs = spec.intervals();
    let (lo, hi) = spec.covered_range();
    let mut max_overlap = 0;
    let mut gap_at = None;
    let mut ratio_min = f64::INFINITY;
    let mut ratio_max = 0.0f64;
    for &x in xi.iter().filter(|&&x| lo <= x && x <= hi) {
        let mut count = 0;
        for iv in ivs.iter().filter(|iv| iv.contains(x)) {
            count += 1;
            let r = iv.length() / (1.0 + x.abs()).powf(spec.alpha);
            ratio_min = ratio_min.min(r);
            ratio_max = ratio_max.max(r);
        }
        if count == 0 && gap_at.is_none() {
            gap_at = Some(x);
        }
        max_overlap = max_overlap.max(count);
    }
    AdmissibilityReport { max_overlap, gap_found: gap_at.is_some(), gap_at, ratio_min, ratio_max }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsReport {
    pub ps0: bool,
    pub ps1: bool,
    pub ps2: bool,
    pub ps3: bool,
    /// Least-squares slope of `c(j) - (1-α)` against `1/|j|` over `|j| ∈ [J/2, J]`.
    pub c_residual_slope: f64,
    /// Indices skipped in the ps3 ratio because `p(j - sgn j) = 0`.
    pub ps3_skipped: Vec<i64>,
}

impl PsReport {
    pub fn pass(&self) -> bool {
        self.ps0 && self.ps1 && self.ps2 && self.ps3
    }
}

pub fn verify_ps_properties(spec: &CoveringSpec) -> Result<PsReport> {
    let jm = spec.jmax;
    if jm < 4 {
        return Err(Error::InvalidParameter("ps checks need jmax >= 4".into()));
    }
    let p = |j: i64| spec.position(j);
    let s = |j: i64| spec.size(j);

    let ps0 = spec.indices().all(|j| p(j) * j as f64 >= 0.0);

    let ps1 = (1..=jm).all(|j| {
        p(j).abs() >= p(j - 1).abs() && p(-j).abs() >= p(-(j - 1)).abs() && s(j) >= s(j - 1) && s(-j) >= s(-(j - 1))
    }) && (1..=jm).all(|j| p(j) == -p(-j) && s(j) == s(-j));

    let beta = 1.0 - spec.alpha;
    let residual = |j: i64| p(j) / (s(j) * j as f64) - beta;
    let scaled: Vec<f64> = spec.indices().filter(|&j| j != 0).map(|j| (residual(j) * j as f64).abs()).collect();
    let mut sorted = scaled.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let ps2 = scaled.iter().all(|&v| v <= 10.0 * median + 1e-12);
    let (xs, ys): (Vec<f64>, Vec<f64>) = ((jm + 1) / 2..=jm).map(|j| (1.0 / j as f64, residual(j))).unzip();
    let c_residual_slope = slope(&xs, &ys);

    let mut ps3 = true;
    let mut ps3_skipped = Vec::new();
    for j in spec.indices().filter(|j| j.abs() >= 1) {
        let prev = j - j.signum();
        if p(prev) == 0.0 {
            ps3_skipped.push(j);
            continue;
        }
        let ratio = p(j).abs() * s(prev) / (p(prev).abs() * s(j));
        if ratio < 1.0 - 1e-12 {
            ps3 = false;
        }
    }
    Ok(PsReport { ps0, ps1, ps2, ps3, c_residual_slope, ps3_skipped })
}

/// Least-squares slope of `ys` against `xs`.
pub(crate) fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}
