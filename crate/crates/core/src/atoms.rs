//! Mother windows, α-Gabor-wavelet atoms and atom systems.
//!
//! The atom with index `(j, k)` is `M_{p_j} D_{1/s_j} T_{ak} g`, i.e.
//! `e^{2πi p_j t} s_j^{1/2} g(s_j t - ak)`, with spectrum
//! `s_j^{-1/2} ĝ((ξ-p_j)/s_j) e^{-2πi(ξ-p_j)ak/s_j}`.
//!
//! Atoms are never stored as dense signals. An [`AtomSystem`] keeps, per
//! scale, the spectrum of the `k = 0` atom on the bins where it is non-negligible
//! and the time step `τ = a/s`; every other atom of the scale is a phase ramp
//! away. Analysis and synthesis run directly on these bands.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bapu::{plateau, Bapu};
use crate::covering::CoveringSpec;
use crate::decay::fit_tail_exponent;
use crate::error::{Error, Result};
use crate::signal::{forward_spectrum, signal_from_values, GridSpec, SampledSignal};

/// Relative amplitude below which atom spectra are truncated.
pub const SPECTRAL_TRUNCATION: f64 = 1e-16;
/// Fraction of the grid period (about the origin) filled by atom time centres.
pub const CORE_FRACTION: f64 = 0.8;
/// Envelope constants at or above this value count as divergent.
pub const ENVELOPE_GUARD: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum WindowShape {
    /// `ĝ(ξ) = 2^{1/4} w^{1/2} e^{-π(wξ)²}`, unit `L²` norm.
    Gaussian { width: f64 },
    /// `ĝ = φ`: one on `[-1, 1]`, smoothstep ramp to zero at `±(1+ε)`.
    SpectralBump { epsilon: f64, order: usize },
    /// `ĝ(ξ) = (1 + (2πξ)²)^{-m}`.
    Matern { order: u32 },
    /// Indicator of `[-w/2, w/2]`.
    Boxcar { width: f64 },
    /// `ĝ(ξ)·φ(ξ/ρ)`.
    LowPass { base: Box<WindowShape>, rho: f64, epsilon: f64, order: usize },
    /// `ĝ(ξ)·(1 - φ(ξ/ρ))`.
    HighPass { base: Box<WindowShape>, rho: f64, epsilon: f64, order: usize },
    /// `scale·χ(ξ)/conj(ĝ(ξ))` with `χ` one on `[-1, 1]` and zero beyond `1+ε/2`.
    PainlessDual { base: Box<WindowShape>, epsilon: f64, order: usize, scale: f64 },
}

impl WindowShape {
    pub fn gaussian(width: f64) -> Self {
        WindowShape::Gaussian { width }
    }

    pub fn spectral_bump(epsilon: f64) -> Self {
        WindowShape::SpectralBump { epsilon, order: crate::bapu::DEFAULT_SMOOTHNESS }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        match self {
            WindowShape::Gaussian { width } | WindowShape::Boxcar { width } if !(*width > 0.0) => {
                bad("window width must be positive")
            }
            WindowShape::SpectralBump { epsilon, .. } if !(*epsilon > 0.0) => bad("epsilon must be positive"),
            WindowShape::Matern { order } if *order == 0 => bad("Matern order must be at least 1"),
            WindowShape::LowPass { base, rho, epsilon, .. } | WindowShape::HighPass { base, rho, epsilon, .. } => {
                if !(*rho >= 1.0) || !(*epsilon > 0.0) {
                    return bad("band split needs rho >= 1 and epsilon > 0");
                }
                base.validate()
            }
            WindowShape::PainlessDual { base, epsilon, .. } => {
                if !(*epsilon > 0.0) {
                    return bad("epsilon must be positive");
                }
                base.validate()
            }
            _ => Ok(()),
        }
    }

    /// Continuous Fourier transform `ĝ(ξ)`.
    pub fn spectrum(&self, xi: f64) -> C64 {
        match self {
            WindowShape::Gaussian { width } => {
                let v = 2f64.powf(0.25) * width.sqrt() * (-PI * (width * xi).powi(2)).exp();
                C64::new(v, 0.0)
            }
            WindowShape::SpectralBump { epsilon, order } => C64::new(plateau(*order, *epsilon, xi), 0.0),
            WindowShape::Matern { order } => {
                C64::new((1.0 + (2.0 * PI * xi).powi(2)).powi(-(*order as i32)), 0.0)
            }
            WindowShape::Boxcar { width } => {
                let x = PI * width * xi;
                let sinc = if x.abs() < 1e-12 { 1.0 } else { x.sin() / x };
                C64::new(width * sinc, 0.0)
            }
            WindowShape::LowPass { base, rho, epsilon, order } => {
                let w = plateau(*order, *epsilon, xi / rho);
                if w == 0.0 {
                    C64::new(0.0, 0.0)
                } else {
                    base.spectrum(xi) * w
                }
            }
            WindowShape::HighPass { base, rho, epsilon, order } => {
                let w = 1.0 - plateau(*order, *epsilon, xi / rho);
                if w == 0.0 {
                    C64::new(0.0, 0.0)
                } else {
                    base.spectrum(xi) * w
                }
            }
            WindowShape::PainlessDual { base, epsilon, order, scale } => {
                let chi = plateau(*order, epsilon / 2.0, xi);
                if chi == 0.0 {
                    C64::new(0.0, 0.0)
                } else {
                    chi * scale / base.spectrum(xi).conj()
                }
            }
        }
    }

    /// Radius of the spectral support when it is compact.
    pub fn support_radius(&self) -> Option<f64> {
        match self {
            WindowShape::SpectralBump { epsilon, .. } => Some(1.0 + epsilon),
            WindowShape::LowPass { base, rho, epsilon, .. } => {
                let r = rho * (1.0 + epsilon);
                Some(base.support_radius().map_or(r, |b| b.min(r)))
            }
            WindowShape::HighPass { base, .. } => base.support_radius(),
            WindowShape::PainlessDual { epsilon, .. } => Some(1.0 + epsilon / 2.0),
            _ => None,
        }
    }

    /// Smallest `R ≤ limit` with `|ĝ(u)| ≤ tol·max|ĝ|` for all scanned `|u| > R`.
    pub fn spectral_radius(&self, tol: f64, limit: f64) -> f64 {
        let limit = self.support_radius().map_or(limit, |r| r.min(limit));
        let steps = 8192;
        let h = limit / steps as f64;
        let mags: Vec<(f64, f64)> = (-(steps as i64)..=steps as i64)
            .map(|i| {
                let u = i as f64 * h;
                (u.abs(), self.spectrum(u).norm())
            })
            .collect();
        let peak = mags.iter().map(|m| m.1).fold(0.0, f64::max);
        let outer = mags.iter().filter(|m| m.1 > tol * peak).map(|m| m.0).fold(0.0, f64::max);
        (outer + h).min(limit)
    }

    fn time_closed_form(&self, t: f64) -> Option<C64> {
        match self {
            WindowShape::Gaussian { width } => {
                Some(C64::new(2f64.powf(0.25) / width.sqrt() * (-PI * (t / width).powi(2)).exp(), 0.0))
            }
            WindowShape::Boxcar { width } => Some(C64::new(if t.abs() <= width / 2.0 { 1.0 } else { 0.0 }, 0.0)),
            _ => None,
        }
    }

    /// Samples of `g` on the grid: closed form where available, otherwise the
    /// inverse transform of the analytic spectrum.
    pub fn samples(&self, grid: &GridSpec) -> SampledSignal {
        if self.time_closed_form(0.0).is_some() {
            SampledSignal::from_fn(*grid, |t| self.time_closed_form(t).unwrap())
        } else {
            let vals = grid.freqs().iter().map(|&x| self.spectrum(x)).collect();
            signal_from_values(*grid, vals)
        }
    }
}

/// A mother window sampled on a grid, with its measured tail exponents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotherWindow {
    shape: WindowShape,
    g: SampledSignal,
    /// Measured exponent of `|g(x)| ≲ (1+|x|)^{-γ_t}` (`∞` for compact support).
    pub gamma_t: f64,
    /// Measured exponent of `|ĝ(ω)| ≲ (1+|ω|)^{-γ_f}` (`∞` for compact support).
    pub gamma_f: f64,
    /// The time tail steepens along the fit range (faster than any power).
    pub time_superpolynomial: bool,
    pub freq_superpolynomial: bool,
    pub fg_nonvanishing_on_omega0: bool,
}

struct TailFit {
    exponent: f64,
    superpolynomial: bool,
}

fn tail_fit(xs: &[f64], mags: &[f64], cap: f64) -> TailFit {
    let peak = mags.iter().cloned().fold(0.0, f64::max);
    let beyond_zero = xs
        .iter()
        .zip(mags)
        .filter(|(x, _)| x.abs() <= cap && x.abs() >= 0.9 * cap)
        .all(|(_, &m)| m == 0.0);
    if peak > 0.0 && beyond_zero {
        return TailFit { exponent: f64::INFINITY, superpolynomial: true };
    }
    let outer = xs
        .iter()
        .zip(mags)
        .filter(|(x, _)| x.abs() >= cap / 4.0 && x.abs() <= cap)
        .map(|(_, &m)| m)
        .fold(0.0, f64::max);
    if outer > 1e-3 * peak {
        let e = fit_tail_exponent(xs, mags, outer / peak, 0.0, cap).unwrap_or(0.0);
        return TailFit { exponent: e, superpolynomial: false };
    }
    let full = fit_tail_exponent(xs, mags, 1e-3, 1e-13, cap);
    let head = fit_tail_exponent(xs, mags, 1e-3, 1e-8, cap);
    let tail = fit_tail_exponent(xs, mags, 1e-8, 1e-13, cap);
    match (full, head, tail) {
        (Some(e), Some(h), Some(t)) => TailFit { exponent: e, superpolynomial: t > 1.5 * h },
        (Some(e), _, _) => TailFit { exponent: e, superpolynomial: false },
        (None, _, _) => TailFit { exponent: f64::INFINITY, superpolynomial: true },
    }
}

impl MotherWindow {
    pub fn new(shape: WindowShape, grid: &GridSpec) -> Result<Self> {
        shape.validate()?;
        let g = shape.samples(grid);
        let times = grid.times();
        let freqs = grid.freqs();
        let tm: Vec<f64> = g.samples().iter().map(|z| z.norm()).collect();
        let fm: Vec<f64> = freqs.iter().map(|&x| shape.spectrum(x).norm()).collect();
        let t = tail_fit(&times, &tm, 0.95 * grid.period() / 2.0);
        let f = tail_fit(&freqs, &fm, 0.95 * grid.nyquist());
        let peak = fm.iter().cloned().fold(0.0, f64::max);
        let fg_nonvanishing_on_omega0 =
            (0..=2000).all(|i| shape.spectrum(-1.0 + i as f64 * 1e-3).norm() > 1e-12 * peak);
        Ok(MotherWindow {
            shape,
            g,
            gamma_t: t.exponent,
            gamma_f: f.exponent,
            time_superpolynomial: t.superpolynomial,
            freq_superpolynomial: f.superpolynomial,
            fg_nonvanishing_on_omega0,
        })
    }

    pub fn shape(&self) -> &WindowShape {
        &self.shape
    }
    pub fn samples(&self) -> &SampledSignal {
        &self.g
    }
    pub fn grid(&self) -> &GridSpec {
        self.g.grid()
    }
    pub fn norm(&self) -> f64 {
        self.g.norm()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub c_time: f64,
    pub c_freq: f64,
    pub exponents_ok: bool,
    pub s_alpha_localized: bool,
}

/// Envelope constants `sup |g(x)|(1+|x|)^{γ_t}` and `sup |ĝ(ω)|(1+|ω|)^{γ_f}`
/// over the grid without its outer 5%, plus the exponent inequalities.
///
/// A constant is reported as infinite when the measured tail decays slower
/// than the demanded exponent, since the supremum over the line then diverges.
pub fn localization_check(
    w: &MotherWindow,
    s: f64,
    alpha: f64,
    gamma_t: f64,
    gamma_f: f64,
    gamma_f_prime: f64,
) -> Result<LocalizationReport> {
    if !(gamma_t > 2.0) {
        return Err(Error::InvalidParameter(format!("gamma_t = {gamma_t} must exceed 2")));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in [0, 1)")));
    }
    let grid = w.grid();
    let tcap = 0.95 * grid.period() / 2.0;
    let fcap = 0.95 * grid.nyquist();
    let mut c_time = grid
        .times()
        .iter()
        .zip(w.g.samples())
        .filter(|(t, _)| t.abs() <= tcap)
        .map(|(t, z)| z.norm() * (1.0 + t.abs()).powf(gamma_t))
        .fold(0.0, f64::max);
    let mut c_freq = grid
        .freqs()
        .iter()
        .filter(|x| x.abs() <= fcap)
        .map(|&x| w.shape.spectrum(x).norm() * (1.0 + x.abs()).powf(gamma_f))
        .fold(0.0, f64::max);
    if !w.time_superpolynomial && w.gamma_t < gamma_t {
        c_time = f64::INFINITY;
    }
    if !w.freq_superpolynomial && w.gamma_f < gamma_f {
        c_freq = f64::INFINITY;
    }
    let r = alpha / (1.0 - alpha);
    let exponents_ok = gamma_f_prime > 2.0 * (1.0 + s / (1.0 - alpha)) + r * gamma_t
        && gamma_f > gamma_f_prime + gamma_t + 1.5;
    let s_alpha_localized = c_time < ENVELOPE_GUARD && c_freq < ENVELOPE_GUARD && exponents_ok;
    Ok(LocalizationReport { c_time, c_freq, exponents_ok, s_alpha_localized })
}

/// Splits `g = g_ρ + g^ρ` with `𝓕g_ρ = φ(·/ρ)·𝓕g`.
pub fn band_split(w: &MotherWindow, rho: f64, epsilon: f64) -> Result<(MotherWindow, MotherWindow)> {
    if !(rho >= 1.0) || !(epsilon > 0.0) {
        return Err(Error::InvalidParameter("band split needs rho >= 1 and epsilon > 0".into()));
    }
    let grid = *w.grid();
    if rho * (1.0 + epsilon) >= grid.nyquist() {
        return Err(Error::InvalidParameter(format!("rho(1+eps) = {} reaches Nyquist", rho * (1.0 + epsilon))));
    }
    let order = crate::bapu::DEFAULT_SMOOTHNESS;
    let base = Box::new(w.shape.clone());
    let low = WindowShape::LowPass { base: base.clone(), rho, epsilon, order };
    let high = WindowShape::HighPass { base, rho, epsilon, order };
    Ok((MotherWindow::new(low, &grid)?, MotherWindow::new(high, &grid)?))
}

/// Atoms of one scale: `gen` holds the `k = 0` spectrum on bins `start..start+gen.len()`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleBank {
    pub j: i64,
    /// Demodulation frequency (the scale's position `p_j`).
    pub p: f64,
    pub s: f64,
    /// Time step between neighbouring atoms.
    pub tau: f64,
    pub kmax: i64,
    pub start: usize,
    pub gen: Vec<C64>,
}

impl ScaleBank {
    pub fn len(&self) -> usize {
        (2 * self.kmax + 1) as usize
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spectrum values of atom `k` on the bank's bins.
    pub fn atom_band(&self, grid: &GridSpec, k: i64) -> Vec<C64> {
        let df = grid.df();
        let x0 = grid.freq(self.start) - self.p;
        let mut ph = C64::from_polar(1.0, -2.0 * PI * x0 * k as f64 * self.tau);
        let step = C64::from_polar(1.0, -2.0 * PI * df * k as f64 * self.tau);
        self.gen
            .iter()
            .map(|g| {
                let v = g * ph;
                ph *= step;
                v
            })
            .collect()
    }

    /// `c_k = dξ·Σ F·conj(Ĝ)·e^{2πi(ξ-p)kτ}` for `|k| ≤ kmax`.
    pub(crate) fn analyze(&self, grid: &GridSpec, values: &[C64]) -> Vec<C64> {
        let df = grid.df();
        let h: Vec<C64> =
            self.gen.iter().enumerate().map(|(l, g)| values[self.start + l] * g.conj() * df).collect();
        let x0 = grid.freq(self.start) - self.p;
        (-self.kmax..=self.kmax)
            .map(|k| {
                let kt = k as f64 * self.tau;
                let mut ph = C64::from_polar(1.0, 2.0 * PI * x0 * kt);
                let step = C64::from_polar(1.0, 2.0 * PI * df * kt);
                let mut acc = C64::new(0.0, 0.0);
                for v in &h {
                    acc += v * ph;
                    ph *= step;
                }
                acc
            })
            .collect()
    }

    /// Spectrum band of `Σ_k c_k·atom_k`.
    pub(crate) fn synthesize(&self, grid: &GridSpec, coeffs: &[C64]) -> Vec<C64> {
        let df = grid.df();
        let x0 = grid.freq(self.start) - self.p;
        let mut out = vec![C64::new(0.0, 0.0); self.gen.len()];
        for (i, c) in coeffs.iter().enumerate() {
            if *c == C64::new(0.0, 0.0) {
                continue;
            }
            let kt = (i as i64 - self.kmax) as f64 * self.tau;
            let mut ph = *c * C64::from_polar(1.0, -2.0 * PI * x0 * kt);
            let step = C64::from_polar(1.0, -2.0 * PI * df * kt);
            for o in out.iter_mut() {
                *o += ph;
                ph *= step;
            }
        }
        out.iter_mut().zip(&self.gen).for_each(|(o, g)| *o *= g);
        out
    }
}

/// `(0..n).map(f)`, in parallel when the feature is on; output order is fixed.
#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).map(f).collect()
}

/// How the translation index `k` is truncated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Lattice {
    /// `τ = a/s`, keeping `|kτ| ≤ time_limit`.
    Truncated { time_limit: f64 },
    /// `τ = T/N` with `N ≥ T·s/a` odd, and `k` running over one full period.
    /// On the periodic grid this is the complete lattice.
    Periodic,
}

impl Lattice {
    /// `(τ, kmax)` for a scale of size `s`.
    pub fn step(&self, grid: &GridSpec, s: f64, a: f64) -> (f64, i64) {
        match *self {
            Lattice::Truncated { time_limit } => {
                let tau = a / s;
                (tau, (time_limit / tau + 1e-9).floor() as i64)
            }
            Lattice::Periodic => {
                let t = grid.period();
                let mut n = (t * s / a - 1e-9).ceil() as i64;
                if n % 2 == 0 {
                    n += 1;
                }
                (t / n as f64, (n - 1) / 2)
            }
        }
    }
}

/// A finite family of atoms organised by scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomSystem {
    grid: GridSpec,
    banks: Vec<ScaleBank>,
    offsets: Vec<usize>,
}

/// Coefficients indexed like the banks of an [`AtomSystem`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientArray {
    /// `(j, kmax)` per bank.
    pub layout: Vec<(i64, i64)>,
    pub values: Vec<C64>,
}

impl CoefficientArray {
    pub fn zeros(layout: Vec<(i64, i64)>) -> Self {
        let n = layout.iter().map(|&(_, km)| (2 * km + 1) as usize).sum();
        CoefficientArray { layout, values: vec![C64::new(0.0, 0.0); n] }
    }

    fn offset(&self, bank: usize) -> usize {
        self.layout[..bank].iter().map(|&(_, km)| (2 * km + 1) as usize).sum()
    }

    /// Coefficients of bank `b`, ordered `k = -kmax..=kmax`.
    pub fn bank(&self, b: usize) -> &[C64] {
        let o = self.offset(b);
        &self.values[o..o + (2 * self.layout[b].1 + 1) as usize]
    }

    pub fn bank_mut(&mut self, b: usize) -> &mut [C64] {
        let o = self.offset(b);
        let len = (2 * self.layout[b].1 + 1) as usize;
        &mut self.values[o..o + len]
    }

    /// Position of `(j, k)` in `values` (first bank with index `j`).
    pub fn position(&self, j: i64, k: i64) -> Option<usize> {
        let b = self.layout.iter().position(|&(jj, _)| jj == j)?;
        let km = self.layout[b].1;
        if k.abs() > km {
            return None;
        }
        Some(self.offset(b) + (k + km) as usize)
    }

    pub fn get(&self, j: i64, k: i64) -> Option<C64> {
        self.position(j, k).map(|i| self.values[i])
    }

    /// `(j, k, value)` triples in storage order.
    pub fn entries(&self) -> Vec<(i64, i64, C64)> {
        let mut out = Vec::with_capacity(self.values.len());
        let mut i = 0;
        for &(j, km) in &self.layout {
            for k in -km..=km {
                out.push((j, k, self.values[i]));
                i += 1;
            }
        }
        out
    }

    /// `Σ c·conj(d)`.
    pub fn pairing(&self, other: &CoefficientArray) -> Result<C64> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch);
        }
        Ok(crate::signal::dot(&self.values, &other.values))
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl AtomSystem {
    pub fn from_banks(grid: GridSpec, banks: Vec<ScaleBank>) -> Result<Self> {
        let mut offsets = Vec::with_capacity(banks.len());
        let mut o = 0;
        for b in &banks {
            if b.kmax < 0 || b.start + b.gen.len() > grid.n() {
                return Err(Error::InvalidParameter(format!("bank for j = {} exceeds the grid", b.j)));
            }
            offsets.push(o);
            o += b.len();
        }
        Ok(AtomSystem { grid, banks, offsets })
    }

    /// Atoms `M_{p_j} D_{1/s_j} T_{ak} g` for the given scales, optionally
    /// multiplied in frequency by the partition-of-unity windows of `psi`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_shape(
        grid: GridSpec,
        covering: &CoveringSpec,
        shape: &WindowShape,
        a: f64,
        js: impl IntoIterator<Item = i64>,
        lattice: Lattice,
        psi: Option<&Bapu>,
    ) -> Result<Self> {
        Self::from_shape_with(grid, covering, shape, a, js, lattice, psi, SpectralCut::default())
    }

    /// As [`AtomSystem::from_shape`] with an explicit spectral cut.
    #[allow(clippy::too_many_arguments)]
    pub fn from_shape_with(
        grid: GridSpec,
        covering: &CoveringSpec,
        shape: &WindowShape,
        a: f64,
        js: impl IntoIterator<Item = i64>,
        lattice: Lattice,
        psi: Option<&Bapu>,
        cut: SpectralCut,
    ) -> Result<Self> {
        let nyq = grid.nyquist();
        let s_min = covering.size(0);
        let radius = shape.spectral_radius(cut.truncation, 2.0 * nyq / s_min);
        let freqs = grid.freqs();
        let mut banks = Vec::new();
        for j in js {
            let p = covering.position(j);
            let s = covering.size(j);
            let (mut lo, mut hi) = (p - radius * s, p + radius * s);
            if let Some(b) = psi {
                let iv = b.spec().interval(j);
                lo = lo.max(iv.left);
                hi = hi.min(iv.right);
            }
            if cut.clip_to_grid {
                lo = lo.max(-nyq);
                hi = hi.min(nyq);
            } else if lo < -nyq || hi >= nyq {
                return Err(Error::InvalidParameter(format!(
                    "atoms at scale j = {j} reach beyond Nyquist ({lo:.3}, {hi:.3})"
                )));
            }
            let range = grid.freq_range(lo, hi);
            let amp = s.powf(-0.5);
            let gen: Vec<C64> = range
                .clone()
                .map(|k| {
                    let w = psi.map_or(1.0, |b| b.window(j)[k]);
                    shape.spectrum((freqs[k] - p) / s) * amp * w
                })
                .collect();
            let (tau, kmax) = lattice.step(&grid, s, a);
            banks.push(ScaleBank { j, p, s, tau, kmax, start: range.start, gen });
        }
        AtomSystem::from_banks(grid, banks)
    }

    /// Orthonormal exponentials `e^{2πiξ_k t}/√T`, one bank per bin.
    pub fn fourier_basis(grid: GridSpec) -> Self {
        let amp = C64::new((grid.period()).sqrt(), 0.0);
        let banks = (0..grid.n())
            .map(|k| ScaleBank {
                j: k as i64 - (grid.n() / 2) as i64,
                p: grid.freq(k),
                s: 1.0,
                tau: 1.0,
                kmax: 0,
                start: k,
                gen: vec![amp],
            })
            .collect();
        AtomSystem::from_banks(grid, banks).expect("valid banks")
    }

    /// The family with every atom repeated once.
    pub fn duplicated(&self) -> Self {
        let mut banks = self.banks.clone();
        banks.extend(self.banks.iter().cloned());
        AtomSystem::from_banks(self.grid, banks).expect("valid banks")
    }

    /// Keeps atoms with time centre `|kτ| ≤ t`.
    pub fn restrict_time(&self, t: f64) -> Self {
        let banks = self
            .banks
            .iter()
            .map(|b| {
                let mut b = b.clone();
                b.kmax = b.kmax.min((t / b.tau + 1e-9).floor() as i64);
                b
            })
            .collect();
        AtomSystem::from_banks(self.grid, banks).expect("valid banks")
    }

    /// Applies `edit` to every bank.
    pub fn map_banks(&self, edit: impl Fn(&mut ScaleBank)) -> Self {
        let mut banks = self.banks.clone();
        banks.iter_mut().for_each(edit);
        AtomSystem::from_banks(self.grid, banks).expect("valid banks")
    }

    /// Keeps the banks whose index passes `keep`.
    pub fn select_scales(&self, keep: impl Fn(i64) -> bool) -> Self {
        let banks = self.banks.iter().filter(|b| keep(b.j)).cloned().collect();
        AtomSystem::from_banks(self.grid, banks).expect("valid banks")
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn banks(&self) -> &[ScaleBank] {
        &self.banks
    }
    pub fn len(&self) -> usize {
        self.banks.iter().map(|b| b.len()).sum()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn layout(&self) -> Vec<(i64, i64)> {
        self.banks.iter().map(|b| (b.j, b.kmax)).collect()
    }

    /// `(j, k)` for every atom in storage order.
    pub fn indices(&self) -> Vec<(i64, i64)> {
        self.banks.iter().flat_map(|b| (-b.kmax..=b.kmax).map(move |k| (b.j, k))).collect()
    }

    /// Bank number and `k` of the atom stored at position `i`.
    pub fn locate(&self, i: usize) -> (usize, i64) {
        let b = match self.offsets.binary_search(&i) {
            Ok(b) => b,
            Err(b) => b - 1,
        };
        (b, (i - self.offsets[b]) as i64 - self.banks[b].kmax)
    }

    fn bank_of(&self, j: i64, k: i64) -> Result<&ScaleBank> {
        self.banks
            .iter()
            .find(|b| b.j == j && k.abs() <= b.kmax)
            .ok_or(Error::IndexOutOfRange { j, k })
    }

    /// Continuous spectrum of atom `(j, k)` on the full grid.
    pub fn atom_spectrum(&self, j: i64, k: i64) -> Result<Vec<C64>> {
        let b = self.bank_of(j, k)?;
        let mut v = vec![C64::new(0.0, 0.0); self.grid.n()];
        for (l, z) in b.atom_band(&self.grid, k).into_iter().enumerate() {
            v[b.start + l] = z;
        }
        Ok(v)
    }

    pub fn atom(&self, j: i64, k: i64) -> Result<SampledSignal> {
        Ok(signal_from_values(self.grid, self.atom_spectrum(j, k)?))
    }

    pub fn analyze(&self, f: &SampledSignal) -> Result<CoefficientArray> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let values = forward_spectrum(f).values();
        let parts = map_indexed(self.banks.len(), |i| self.banks[i].analyze(&self.grid, &values));
        Ok(CoefficientArray { layout: self.layout(), values: parts.concat() })
    }

    pub fn synthesize(&self, c: &CoefficientArray) -> Result<SampledSignal> {
        if c.layout != self.layout() {
            return Err(Error::LayoutMismatch);
        }
        let parts = map_indexed(self.banks.len(), |i| {
            let b = &self.banks[i];
            b.synthesize(&self.grid, &c.values[self.offsets[i]..self.offsets[i] + b.len()])
        });
        let mut values = vec![C64::new(0.0, 0.0); self.grid.n()];
        for (b, part) in self.banks.iter().zip(parts) {
            for (l, z) in part.into_iter().enumerate() {
                values[b.start + l] += z;
            }
        }
        Ok(signal_from_values(self.grid, values))
    }
}

/// Options shaping the index range of a [`FrameSpec`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameOptions {
    /// Largest `|j|`; defaults to the largest scale whose truncated spectrum fits below Nyquist.
    pub jmax: Option<i64>,
    /// Largest atom time centre; defaults to 40% of the grid period.
    pub time_limit: Option<f64>,
    /// Use the full periodic lattice instead of a time limit.
    pub periodic: bool,
    /// Relative spectral level at which atoms are cut; defaults to [`SPECTRAL_TRUNCATION`].
    pub truncation: Option<f64>,
    /// Cut atom spectra at the grid band instead of rejecting scales that reach Nyquist.
    /// Requires an explicit `jmax`.
    pub clip_to_grid: bool,
}

/// Where atom spectra are cut.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralCut {
    pub truncation: f64,
    pub clip_to_grid: bool,
}

impl Default for SpectralCut {
    fn default() -> Self {
        SpectralCut { truncation: SPECTRAL_TRUNCATION, clip_to_grid: false }
    }
}

/// An α-Gabor-wavelet frame: window, covering, lattice parameter and index ranges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameSpec {
    window: MotherWindow,
    covering: CoveringSpec,
    a: f64,
    jmax: i64,
    lattice: Lattice,
    system: AtomSystem,
}

impl FrameSpec {
    pub fn new(window: MotherWindow, covering: CoveringSpec, a: f64) -> Result<Self> {
        Self::with_options(window, covering, a, FrameOptions::default())
    }

    pub fn with_options(window: MotherWindow, covering: CoveringSpec, a: f64, opts: FrameOptions) -> Result<Self> {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::InvalidParameter(format!("a = {a} violates 0 < a <= 1")));
        }
        if !(window.norm() > 0.0) {
            return Err(Error::InvalidParameter("window has zero norm".into()));
        }
        let grid = *window.grid();
        let nyq = grid.nyquist();
        let cut = SpectralCut {
            truncation: opts.truncation.unwrap_or(SPECTRAL_TRUNCATION),
            clip_to_grid: opts.clip_to_grid,
        };
        if cut.clip_to_grid && opts.jmax.is_none() {
            return Err(Error::InvalidParameter("clipping to the grid needs an explicit jmax".into()));
        }
        let radius = window.shape.spectral_radius(cut.truncation, 2.0 * nyq / covering.size(0));
        let fits = |j: i64| covering.position(j) + radius * covering.size(j) < nyq;
        let jmax = match opts.jmax {
            Some(j) => {
                if !cut.clip_to_grid && !fits(j) {
                    return Err(Error::InvalidParameter(format!("atoms at scale {j} reach beyond Nyquist")));
                }
                j
            }
            None => {
                if !fits(0) {
                    return Err(Error::InvalidParameter("window too wide for the grid".into()));
                }
                let mut j = 0;
                while j < covering.jmax() && fits(j + 1) {
                    j += 1;
                }
                j
            }
        };
        let lattice = if opts.periodic {
            Lattice::Periodic
        } else {
            Lattice::Truncated { time_limit: opts.time_limit.unwrap_or(CORE_FRACTION * grid.period() / 2.0) }
        };
        let system =
            AtomSystem::from_shape_with(grid, &covering, &window.shape, a, -jmax..=jmax, lattice, None, cut)?;
        Ok(FrameSpec { window, covering, a, jmax, lattice, system })
    }

    pub fn window(&self) -> &MotherWindow {
        &self.window
    }
    pub fn covering(&self) -> &CoveringSpec {
        &self.covering
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn jmax(&self) -> i64 {
        self.jmax
    }
    pub fn lattice(&self) -> Lattice {
        self.lattice
    }
    pub fn kmax(&self, j: i64) -> Option<i64> {
        self.system.banks.iter().find(|b| b.j == j).map(|b| b.kmax)
    }
    pub fn system(&self) -> &AtomSystem {
        &self.system
    }
    pub fn grid(&self) -> &GridSpec {
        self.window.grid()
    }
}

pub fn atom(fs: &FrameSpec, j: i64, k: i64) -> Result<SampledSignal> {
    fs.system.atom(j, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{dilate, inner_product, modulate, translate};

    fn grid() -> GridSpec {
        GridSpec::new(2048, 1.0 / 64.0).unwrap()
    }

    fn frame(a: f64) -> FrameSpec {
        let g = grid();
        let w = MotherWindow::new(WindowShape::gaussian(1.0), &g).unwrap();
        let c = CoveringSpec::for_grid(0.5, 1.0, &g).unwrap();
        FrameSpec::new(w, c, a).unwrap()
    }

    #[test]
    fn gaussian_window_is_unit_norm_and_superpolynomial() {
        let w = MotherWindow::new(WindowShape::gaussian(1.0), &grid()).unwrap();
        assert!((w.norm() - 1.0).abs() < 1e-12);
        assert!(w.time_superpolynomial && w.freq_superpolynomial);
        assert!(w.fg_nonvanishing_on_omega0);
        assert!(w.gamma_t > 10.0 && w.gamma_f > 10.0);
    }

    #[test]
    fn matern_spectrum_exponent() {
        let w = MotherWindow::new(WindowShape::Matern { order: 2 }, &grid()).unwrap();
        assert!(w.gamma_f > 3.8 && w.gamma_f < 5.0, "{}", w.gamma_f);
        assert!(!w.freq_superpolynomial);
    }

    #[test]
    fn bump_window_is_compact() {
        let w = MotherWindow::new(WindowShape::spectral_bump(0.5), &grid()).unwrap();
        assert_eq!(w.gamma_f, f64::INFINITY);
        let r = WindowShape::spectral_bump(0.5).spectral_radius(1e-16, 100.0);
        assert!(r > 1.49 && r <= 1.5, "{r}");
    }

    #[test]
    fn localization_checks() {
        let g = grid();
        let gauss = MotherWindow::new(WindowShape::gaussian(1.0), &g).unwrap();
        let r = localization_check(&gauss, 1.0, 0.5, 3.0, 20.0, 10.0).unwrap();
        assert!(r.s_alpha_localized, "{r:?} {gauss:?}");
        let r = localization_check(&gauss, 0.0, 0.25, 4.0, 16.0, 6.0).unwrap();
        assert!(r.s_alpha_localized);
        let boxcar = MotherWindow::new(WindowShape::Boxcar { width: 1.0 }, &g).unwrap();
        let r = localization_check(&boxcar, 0.0, 0.0, 3.0, 3.0, 1.0).unwrap();
        assert_eq!(r.c_freq, f64::INFINITY);
        assert!(!r.s_alpha_localized);
        assert!(localization_check(&gauss, 0.0, 0.5, 2.0, 20.0, 10.0).is_err());
    }

    #[test]
    fn frame_index_ranges() {
        let fs = frame(0.36);
        assert_eq!(fs.jmax(), 6);
        let s6 = fs.covering().size(6);
        assert_eq!(fs.kmax(6), Some((12.8 * s6 / 0.36).floor() as i64));
        assert!(FrameSpec::new(fs.window().clone(), *fs.covering(), 1.5).is_err());
        assert!(FrameSpec::new(fs.window().clone(), *fs.covering(), 0.0).is_err());
    }

    #[test]
    fn atoms_have_window_norm() {
        let fs = frame(0.36);
        for (j, k) in [(0, 0), (3, -20), (-6, 100), (6, -150)] {
            let at = atom(&fs, j, k).unwrap();
            assert!((at.norm() - fs.window().norm()).abs() < 1e-10, "({j},{k})");
        }
        assert!(matches!(atom(&fs, 7, 0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(atom(&fs, 0, 10_000), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn atom_matches_operator_composition() {
        let fs = frame(0.36);
        let g = fs.window().samples().clone();
        for (j, k) in [(0, 3), (2, -7), (-4, 11)] {
            let p = fs.covering().position(j);
            let s = fs.covering().size(j);
            let composed = modulate(&dilate(&translate(&g, 0.36 * k as f64), 1.0 / s).unwrap(), p);
            let direct = atom(&fs, j, k).unwrap();
            assert!(direct.max_abs_diff(&composed).unwrap() < 1e-10, "({j},{k})");
        }
    }

    #[test]
    fn uniform_case_is_gabor() {
        let g = grid();
        let w = MotherWindow::new(WindowShape::gaussian(1.0), &g).unwrap();
        let c = CoveringSpec::new(0.0, 1.0, 10).unwrap();
        let fs = FrameSpec::new(w, c, 0.5).unwrap();
        for (j, k) in [(0, 0), (3, 5), (-7, -9)] {
            let at = atom(&fs, j, k).unwrap();
            let gabor = SampledSignal::from_fn(g, |t| {
                let u = t - 0.5 * k as f64;
                C64::from_polar(2f64.powf(0.25) * (-PI * u * u).exp(), 2.0 * PI * j as f64 * t)
            });
            let d = at
                .samples()
                .iter()
                .zip(gabor.samples())
                .map(|(x, y)| (x.norm() - y.norm()).abs())
                .fold(0.0, f64::max);
            assert!(d < 1e-10, "({j},{k}) {d}");
        }
    }

    #[test]
    fn stationarity_within_scale() {
        let fs = frame(0.36);
        let ip = |k: i64, h: i64| inner_product(&atom(&fs, 3, k).unwrap(), &atom(&fs, 3, h).unwrap()).unwrap();
        let base = ip(0, 2);
        for shift in [-5, 3, 9] {
            assert!((ip(shift, shift + 2) - base).norm() < 1e-10);
        }
    }

    #[test]
    fn spectral_centroid_near_interval() {
        let fs = frame(0.36);
        for j in -6..=6 {
            let spec = fs.system().atom_spectrum(j, 0).unwrap();
            let g = fs.grid();
            let (num, den) = spec
                .iter()
                .enumerate()
                .fold((0.0, 0.0), |(n, d), (k, z)| (n + g.freq(k) * z.norm_sqr(), d + z.norm_sqr()));
            let c = num / den;
            let p = fs.covering().position(j);
            let s = fs.covering().size(j);
            assert!(c >= p - s && c <= p + 2.0 * s, "j = {j}");
        }
    }

    #[test]
    fn band_split_properties() {
        let g = grid();
        let w = MotherWindow::new(WindowShape::gaussian(1.0), &g).unwrap();
        let mut last = f64::INFINITY;
        for rho in [1.0, 2.0, 4.0, 8.0] {
            let (low, high) = band_split(&w, rho, 0.5).unwrap();
            let sum = low.samples().add(high.samples()).unwrap();
            assert!(sum.max_abs_diff(w.samples()).unwrap() < 1e-12);
            for x in g.freqs().into_iter().filter(|x| x.abs() <= rho) {
                assert_eq!(high.shape().spectrum(x).norm(), 0.0);
            }
            for x in g.freqs().into_iter().filter(|x| x.abs() > rho * 1.5) {
                assert_eq!(low.shape().spectrum(x).norm(), 0.0);
            }
            let n = high.norm();
            assert!(n <= last);
            last = n;
        }
        let bump = MotherWindow::new(WindowShape::spectral_bump(0.5), &g).unwrap();
        let (_, high) = band_split(&bump, 2.0, 0.5).unwrap();
        assert_eq!(high.norm(), 0.0);
        assert!(band_split(&w, 0.5, 0.5).is_err());
        assert!(band_split(&w, 30.0, 0.5).is_err());
    }
}
