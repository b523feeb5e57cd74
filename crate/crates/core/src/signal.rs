//! Uniform periodic grids, the grid Fourier transform, the elementary
//! operators `T_x`, `M_ω`, `D_a`, and deterministic test signals.
//!
//! Frequencies are in cycles per time unit. Spectra are stored in centred
//! order: bin `k` sits at `ξ_k = (k - n/2)·dξ`, covering `[-Nyquist, Nyquist)`.
//! The stored coefficients are unitary (`Σ|c_k|² = Σ|f_m|²`); the continuous
//! Fourier transform samples are `F(ξ_k) = dt·Σ_m f(t_m) e^{-2πiξ_k t_m}`.

use std::f64::consts::PI;
use std::io::{BufRead, Read, Write};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative energy above which `dilate` reports aliasing.
pub const DILATE_SPILL_TOL: f64 = 1e-12;
/// Relative amplitude a test signal may keep at Nyquist and at the grid edge.
pub const TEST_SIGNAL_EDGE_TOL: f64 = 1e-8;

static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let planner = PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()));
    let mut planner = planner.lock().unwrap_or_else(|p| p.into_inner());
    if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    dt: f64,
    origin: f64,
}

impl GridSpec {
    /// Centred grid covering `[-n·dt/2, n·dt/2)`.
    pub fn new(n: usize, dt: f64) -> Result<Self> {
        Self::with_origin(n, dt, -(n as f64) * dt / 2.0)
    }

    pub fn with_origin(n: usize, dt: f64, origin: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n = {n} must be a power of two and at least 16")));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidGrid(format!("dt = {dt} must be positive")));
        }
        if !origin.is_finite() {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(GridSpec { n, dt, origin })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn origin(&self) -> f64 {
        self.origin
    }
    pub fn df(&self) -> f64 {
        1.0 / (self.n as f64 * self.dt)
    }
    pub fn nyquist(&self) -> f64 {
        0.5 / self.dt
    }
    pub fn period(&self) -> f64 {
        self.n as f64 * self.dt
    }
    pub fn time(&self, m: usize) -> f64 {
        self.origin + m as f64 * self.dt
    }
    pub fn freq(&self, k: usize) -> f64 {
        (k as f64 - (self.n / 2) as f64) * self.df()
    }
    pub fn times(&self) -> Vec<f64> {
        (0..self.n).map(|m| self.time(m)).collect()
    }
    pub fn freqs(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.freq(k)).collect()
    }
    /// Nearest centred bin to `xi`, clamped to the grid.
    pub fn freq_index(&self, xi: f64) -> usize {
        let k = (xi / self.df()).round() + (self.n / 2) as f64;
        k.clamp(0.0, (self.n - 1) as f64) as usize
    }
    /// Half-open range of bins with `lo ≤ ξ ≤ hi`.
    pub fn freq_range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let df = self.df();
        let half = (self.n / 2) as f64;
        let start = ((lo / df).ceil() + half).clamp(0.0, self.n as f64) as usize;
        let end = ((hi / df).floor() + half + 1.0).clamp(0.0, self.n as f64) as usize;
        start..end.max(start)
    }

    fn centred(&self) -> bool {
        self.origin == -(self.n as f64) * self.dt / 2.0
    }

    /// Phase `e^{-2πiξ_k·origin}` linking DFT bins to continuous-transform samples.
    fn origin_phase(&self, k: usize) -> C64 {
        if self.centred() {
            if k.is_multiple_of(2) {
                C64::new(1.0, 0.0)
            } else {
                C64::new(-1.0, 0.0)
            }
        } else {
            C64::from_polar(1.0, -2.0 * PI * self.freq(k) * self.origin)
        }
    }

    pub fn same_as(&self, other: &GridSpec) -> bool {
        self == other
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledSignal {
    grid: GridSpec,
    samples: Vec<C64>,
}

impl SampledSignal {
    pub fn new(grid: GridSpec, samples: Vec<C64>) -> Result<Self> {
        if samples.len() != grid.n {
            return Err(Error::InvalidParameter(format!(
                "{} samples for a grid of size {}",
                samples.len(),
                grid.n
            )));
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite sample".into()));
        }
        Ok(SampledSignal { grid, samples })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        SampledSignal { grid, samples: vec![C64::new(0.0, 0.0); grid.n] }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> C64) -> Self {
        let samples = (0..grid.n).map(|m| f(grid.time(m))).collect();
        SampledSignal { grid, samples }
    }

    pub(crate) fn from_raw(grid: GridSpec, samples: Vec<C64>) -> Self {
        debug_assert_eq!(samples.len(), grid.n);
        SampledSignal { grid, samples }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn samples(&self) -> &[C64] {
        &self.samples
    }
    pub fn into_samples(self) -> Vec<C64> {
        self.samples
    }

    /// `L²` norm as the Riemann sum `(dt·Σ|f|²)^{1/2}`.
    pub fn norm(&self) -> f64 {
        (self.grid.dt * self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn scale(&self, c: C64) -> Self {
        SampledSignal::from_raw(self.grid, self.samples.iter().map(|z| z * c).collect())
    }

    pub fn add(&self, other: &SampledSignal) -> Result<Self> {
        check_grid(self, other)?;
        let s = self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect();
        Ok(SampledSignal::from_raw(self.grid, s))
    }

    pub fn sub(&self, other: &SampledSignal) -> Result<Self> {
        check_grid(self, other)?;
        let s = self.samples.iter().zip(&other.samples).map(|(a, b)| a - b).collect();
        Ok(SampledSignal::from_raw(self.grid, s))
    }

    /// `‖self - other‖ / ‖other‖`.
    pub fn relative_error(&self, reference: &SampledSignal) -> Result<f64> {
        let d = self.sub(reference)?.norm();
        let r = reference.norm();
        Ok(if r > 0.0 { d / r } else { d })
    }

    pub fn max_abs_diff(&self, other: &SampledSignal) -> Result<f64> {
        check_grid(self, other)?;
        Ok(self.samples.iter().zip(&other.samples).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }
}

fn check_grid(f: &SampledSignal, g: &SampledSignal) -> Result<()> {
    if f.grid != g.grid {
        Err(Error::GridMismatch)
    } else {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    grid: GridSpec,
    coeffs: Vec<C64>,
}

impl Spectrum {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    /// Unitary coefficients in centred order.
    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Continuous Fourier transform samples `F(ξ_k)`.
    pub fn values(&self) -> Vec<C64> {
        let c = self.value_scale();
        self.coeffs.iter().map(|z| z * c).collect()
    }

    /// Builds a spectrum from continuous transform samples `F(ξ_k)`.
    pub fn from_values(grid: GridSpec, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::InvalidParameter("spectrum length differs from grid size".into()));
        }
        let c = 1.0 / (grid.dt * (grid.n as f64).sqrt());
        Ok(Spectrum { grid, coeffs: values.into_iter().map(|z| z * c).collect() })
    }

    fn value_scale(&self) -> f64 {
        self.grid.dt * (self.grid.n as f64).sqrt()
    }

    /// `L²` norm of the continuous transform, `(dξ·Σ|F|²)^{1/2}`.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() * (self.grid.dt).sqrt()
    }
}

pub fn forward_spectrum(f: &SampledSignal) -> Spectrum {
    let g = f.grid;
    let n = g.n;
    let mut buf = f.samples.clone();
    plan(n, false).process(&mut buf);
    let norm = 1.0 / (n as f64).sqrt();
    let coeffs = (0..n).map(|k| buf[(k + n / 2) % n] * g.origin_phase(k) * norm).collect();
    Spectrum { grid: g, coeffs }
}

pub fn inverse_spectrum(s: &Spectrum) -> SampledSignal {
    let g = s.grid;
    let n = g.n;
    let norm = 1.0 / (n as f64).sqrt();
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for k in 0..n {
        buf[(k + n / 2) % n] = s.coeffs[k] * g.origin_phase(k).conj() * norm;
    }
    plan(n, true).process(&mut buf);
    SampledSignal::from_raw(g, buf)
}

/// Continuous transform samples of `f`.
pub fn spectrum_values(f: &SampledSignal) -> Vec<C64> {
    forward_spectrum(f).values()
}

/// Signal whose continuous transform samples are `values`.
pub fn signal_from_values(grid: GridSpec, values: Vec<C64>) -> SampledSignal {
    let c = 1.0 / (grid.dt * (grid.n as f64).sqrt());
    let coeffs = values.into_iter().map(|z| z * c).collect();
    inverse_spectrum(&Spectrum { grid, coeffs })
}

/// `dt·Σ f·conj(g)`.
pub fn inner_product(f: &SampledSignal, g: &SampledSignal) -> Result<C64> {
    check_grid(f, g)?;
    Ok(dot(&f.samples, &g.samples) * f.grid.dt)
}

/// Inner product of two spectra in continuous units, `dξ·Σ F·conj(G)`.
pub fn spectral_inner_product(f: &Spectrum, g: &Spectrum) -> Result<C64> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch);
    }
    Ok(dot(&f.coeffs, &g.coeffs) * f.grid.dt)
}

pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// `T_x f(t) = f(t - x)`, realised as a spectral phase ramp.
pub fn translate(f: &SampledSignal, x: f64) -> SampledSignal {
    let mut s = forward_spectrum(f);
    let g = s.grid;
    for (k, c) in s.coeffs.iter_mut().enumerate() {
        *c *= C64::from_polar(1.0, -2.0 * PI * x * g.freq(k));
    }
    inverse_spectrum(&s)
}

/// `M_ω f(t) = e^{2πiωt} f(t)`.
pub fn modulate(f: &SampledSignal, omega: f64) -> SampledSignal {
    let g = f.grid;
    let samples = f
        .samples
        .iter()
        .enumerate()
        .map(|(m, z)| z * C64::from_polar(1.0, 2.0 * PI * omega * g.time(m)))
        .collect();
    SampledSignal::from_raw(g, samples)
}

/// `D_a f(t) = a^{-1/2} f(t/a)`, computed from `𝓕(D_a f)(ξ) = a^{1/2} F(aξ)`.
///
/// Fails with [`Error::Aliasing`] when the part of `f` that cannot be
/// represented after dilation (spectrum beyond `a·Nyquist` for `a < 1`,
/// samples beyond `|t| > period/(2a)` for `a > 1`) carries more than
/// [`DILATE_SPILL_TOL`] of the energy.
pub fn dilate(f: &SampledSignal, a: f64) -> Result<SampledSignal> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidParameter(format!("dilation factor {a} must be positive")));
    }
    if a == 1.0 {
        return Ok(f.clone());
    }
    let g = f.grid;
    let total: f64 = f.samples.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        return Ok(f.clone());
    }
    let spec = forward_spectrum(f);
    let spill = if a < 1.0 {
        let lim = a * g.nyquist();
        spec.coeffs
            .iter()
            .enumerate()
            .filter(|(k, _)| g.freq(*k).abs() >= lim)
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
    } else {
        let lim = g.period() / (2.0 * a);
        f.samples
            .iter()
            .enumerate()
            .filter(|(m, _)| g.time(*m).abs() > lim)
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
    } / total;
    if spill > DILATE_SPILL_TOL {
        return Err(Error::Aliasing { spill });
    }
    let nyq = g.nyquist();
    let scale = a.sqrt() * g.dt;
    let values: Vec<C64> = (0..g.n)
        .map(|k| {
            let eta = a * g.freq(k);
            if eta.abs() >= nyq {
                return C64::new(0.0, 0.0);
            }
            let step = C64::from_polar(1.0, -2.0 * PI * eta * g.dt);
            let mut ph = C64::from_polar(1.0, -2.0 * PI * eta * g.origin);
            let mut acc = C64::new(0.0, 0.0);
            for z in &f.samples {
                acc += z * ph;
                ph *= step;
            }
            acc * scale
        })
        .collect();
    Ok(signal_from_values(g, values))
}

/// Deterministic test signals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TestSignal {
    /// `A·e^{-(t-c)²/(2σ²)}·e^{2πiω₀t}`.
    Gaussian { sigma: f64, center: f64, freq: f64, amplitude: f64 },
    /// Gaussian envelope with instantaneous frequency `f0 + rate·t`.
    Chirp { sigma: f64, center: f64, f0: f64, rate: f64, amplitude: f64 },
    /// Compactly supported `C^∞` bump `e^{-1/(1-u²)}`, `u = (t-c)/half_width`, modulated to `freq`.
    ModulatedBump { half_width: f64, center: f64, freq: f64, amplitude: f64 },
    /// Unit-norm random sum of Gaussian wave packets with centres in
    /// `time_center ± time_halfwidth` and frequencies in `[band_lo, band_hi]`.
    RandomBandlimited {
        band_lo: f64,
        band_hi: f64,
        time_center: f64,
        time_halfwidth: f64,
        packets: usize,
        packet_width: f64,
        seed: u64,
    },
}

pub fn make_test_signal(grid: GridSpec, kind: &TestSignal) -> Result<SampledSignal> {
    let f = match *kind {
        TestSignal::Gaussian { sigma, center, freq, amplitude } => {
            positive("sigma", sigma)?;
            SampledSignal::from_fn(grid, |t| {
                let u = (t - center) / sigma;
                C64::from_polar(amplitude * (-0.5 * u * u).exp(), 2.0 * PI * freq * t)
            })
        }
        TestSignal::Chirp { sigma, center, f0, rate, amplitude } => {
            positive("sigma", sigma)?;
            SampledSignal::from_fn(grid, |t| {
                let u = (t - center) / sigma;
                C64::from_polar(amplitude * (-0.5 * u * u).exp(), 2.0 * PI * (f0 * t + 0.5 * rate * t * t))
            })
        }
        TestSignal::ModulatedBump { half_width, center, freq, amplitude } => {
            positive("half_width", half_width)?;
            SampledSignal::from_fn(grid, |t| {
                let u = (t - center) / half_width;
                let env = if u.abs() < 1.0 { (1.0 - 1.0 / (1.0 - u * u)).exp() } else { 0.0 };
                C64::from_polar(amplitude * env, 2.0 * PI * freq * t)
            })
        }
        TestSignal::RandomBandlimited {
            band_lo,
            band_hi,
            time_center,
            time_halfwidth,
            packets,
            packet_width,
            seed,
        } => {
            positive("packet_width", packet_width)?;
            if !(band_hi >= band_lo) || time_halfwidth < 0.0 || packets == 0 {
                return Err(Error::InvalidParameter("empty band, time range or packet count".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let params: Vec<(f64, f64, C64)> = (0..packets)
                .map(|_| {
                    let tc = time_center + time_halfwidth * (2.0 * rng.random::<f64>() - 1.0);
                    let fc = band_lo + (band_hi - band_lo) * rng.random::<f64>();
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    (tc, fc, C64::new(re, im))
                })
                .collect();
            let f = SampledSignal::from_fn(grid, |t| {
                params
                    .iter()
                    .map(|&(tc, fc, c)| {
                        let u = (t - tc) / packet_width;
                        c * C64::from_polar((-PI * u * u).exp(), 2.0 * PI * fc * t)
                    })
                    .sum()
            });
            let nrm = f.norm();
            if nrm > 0.0 {
                f.scale(C64::new(1.0 / nrm, 0.0))
            } else {
                f
            }
        }
    };
    check_edges(&f)?;
    Ok(f)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} must be positive")))
    }
}

/// Rejects signals with non-negligible content at Nyquist or at the grid edge.
fn check_edges(f: &SampledSignal) -> Result<()> {
    let n = f.grid.n;
    let edge = (n / 50).max(1);
    let peak_t = f.samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak_t == 0.0 {
        return Ok(());
    }
    let edge_t = f.samples[..edge]
        .iter()
        .chain(&f.samples[n - edge..])
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if edge_t > TEST_SIGNAL_EDGE_TOL * peak_t {
        return Err(Error::InvalidParameter(format!(
            "signal reaches {:.2e} of its peak at the grid boundary",
            edge_t / peak_t
        )));
    }
    let spec = forward_spectrum(f);
    let c = spec.coeffs();
    let peak_f = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let edge_f = c[..edge].iter().chain(&c[n - edge..]).map(|z| z.norm()).fold(0.0, f64::max);
    if edge_f > TEST_SIGNAL_EDGE_TOL * peak_f {
        return Err(Error::Aliasing { spill: edge_f / peak_f });
    }
    Ok(())
}

/// Writes `n,dt,origin` followed by one `re,im` row per sample.
pub fn write_csv<W: Write>(f: &SampledSignal, mut w: W) -> Result<()> {
    writeln!(w, "n,dt,origin")?;
    writeln!(w, "{},{},{}", f.grid.n, f.grid.dt, f.grid.origin)?;
    writeln!(w, "re,im")?;
    for z in &f.samples {
        writeln!(w, "{},{}", z.re, z.im)?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(r: R) -> Result<SampledSignal> {
    let mut lines = r.lines();
    let mut next = || -> Result<String> {
        lines.next().ok_or_else(|| Error::Format("unexpected end of file".into()))?.map_err(Error::from)
    };
    next()?;
    let head = next()?;
    let parts: Vec<&str> = head.trim().split(',').collect();
    if parts.len() != 3 {
        return Err(Error::Format("header must hold n,dt,origin".into()));
    }
    let n: usize = parts[0].parse().map_err(|_| Error::Format("bad n".into()))?;
    let dt: f64 = parts[1].parse().map_err(|_| Error::Format("bad dt".into()))?;
    let origin: f64 = parts[2].parse().map_err(|_| Error::Format("bad origin".into()))?;
    let grid = GridSpec::with_origin(n, dt, origin)?;
    next()?;
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let line = next()?;
        let (re, im) = line.trim().split_once(',').ok_or_else(|| Error::Format("expected re,im".into()))?;
        let re: f64 = re.parse().map_err(|_| Error::Format(format!("bad value {re}")))?;
        let im: f64 = im.parse().map_err(|_| Error::Format(format!("bad value {im}")))?;
        samples.push(C64::new(re, im));
    }
    SampledSignal::new(grid, samples)
}

const MAGIC: &[u8; 4] = b"ASIG";

/// Little-endian binary layout: `ASIG`, `n: u64`, `dt: f64`, `origin: f64`, then `re, im` pairs.
pub fn write_binary<W: Write>(f: &SampledSignal, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(f.grid.n as u64).to_le_bytes())?;
    w.write_all(&f.grid.dt.to_le_bytes())?;
    w.write_all(&f.grid.origin.to_le_bytes())?;
    for z in &f.samples {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<SampledSignal> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut b8 = [0u8; 8];
    let mut word = |r: &mut R| -> Result<[u8; 8]> {
        r.read_exact(&mut b8)?;
        Ok(b8)
    };
    let n = u64::from_le_bytes(word(&mut r)?) as usize;
    let dt = f64::from_le_bytes(word(&mut r)?);
    let origin = f64::from_le_bytes(word(&mut r)?);
    let grid = GridSpec::with_origin(n, dt, origin)?;
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let re = f64::from_le_bytes(word(&mut r)?);
        let im = f64::from_le_bytes(word(&mut r)?);
        samples.push(C64::new(re, im));
    }
    SampledSignal::new(grid, samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::new(512, 1.0 / 16.0).unwrap()
    }

    fn packet(seed: u64) -> SampledSignal {
        let kind = TestSignal::RandomBandlimited {
            band_lo: -3.0,
            band_hi: 3.0,
            time_center: 0.0,
            time_halfwidth: 3.0,
            packets: 6,
            packet_width: 1.0,
            seed,
        };
        make_test_signal(grid(), &kind).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(8, 0.1).is_err());
        assert!(GridSpec::new(100, 0.1).is_err());
        assert!(GridSpec::new(64, 0.0).is_err());
        let g = grid();
        assert_eq!(g.nyquist(), 8.0);
        assert_eq!(g.df(), 1.0 / 32.0);
        assert_eq!(g.freq(0), -8.0);
        assert_eq!(g.freq(256), 0.0);
        assert_eq!(g.time(0), -16.0);
    }

    #[test]
    fn constant_has_single_bin() {
        let g = grid();
        let f = SampledSignal::from_fn(g, |_| C64::new(1.0, 0.0));
        let s = forward_spectrum(&f);
        for (k, c) in s.coeffs().iter().enumerate() {
            if k == g.n() / 2 {
                assert!((c.norm() - (g.n() as f64).sqrt()).abs() < 1e-9);
            } else {
                assert!(c.norm() < 1e-9);
            }
        }
    }

    #[test]
    fn on_grid_exponential_single_bin() {
        let g = grid();
        let k0 = 300;
        let w = g.freq(k0);
        let f = SampledSignal::from_fn(g, |t| C64::from_polar(1.0, 2.0 * PI * w * t));
        let s = forward_spectrum(&f);
        let big: Vec<usize> = (0..g.n()).filter(|&k| s.coeffs()[k].norm() > 1e-9).collect();
        assert_eq!(big, vec![k0]);
    }

    #[test]
    fn continuous_values_match_gaussian_pair() {
        let g = grid();
        let f = SampledSignal::from_fn(g, |t| C64::new((-PI * t * t).exp(), 0.0));
        let v = spectrum_values(&f);
        for k in 0..g.n() {
            let xi = g.freq(k);
            assert!((v[k] - C64::new((-PI * xi * xi).exp(), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn off_centre_origin_round_trip() {
        let g = GridSpec::with_origin(128, 0.125, -6.3).unwrap();
        let f = SampledSignal::from_fn(g, |t| C64::new(t.sin(), (2.0 * t).cos()));
        let back = inverse_spectrum(&forward_spectrum(&f));
        assert!(back.max_abs_diff(&f).unwrap() < 1e-12);
        let h = SampledSignal::from_fn(g, |t| C64::new((-PI * (t + 0.7).powi(2)).exp(), 0.0));
        let v = spectrum_values(&h);
        for k in 0..g.n() {
            let xi = g.freq(k);
            let exact = C64::from_polar((-PI * xi * xi).exp(), 2.0 * PI * 0.7 * xi);
            assert!((v[k] - exact).norm() < 1e-10);
        }
    }

    #[test]
    fn dilation_identity_and_isometry() {
        let f = packet(3);
        assert_eq!(dilate(&f, 1.0).unwrap(), f);
        for a in [0.8, 1.3, 2.0] {
            let d = dilate(&f, a).unwrap();
            assert!((d.norm() - f.norm()).abs() < 1e-10 * f.norm(), "a = {a}");
        }
    }

    #[test]
    fn dilation_matches_closed_form() {
        let g = grid();
        let f = SampledSignal::from_fn(g, |t| C64::new((-PI * t * t).exp(), 0.0));
        let a = 1.7;
        let d = dilate(&f, a).unwrap();
        let exact = SampledSignal::from_fn(g, |t| C64::new(a.powf(-0.5) * (-PI * (t / a).powi(2)).exp(), 0.0));
        assert!(d.max_abs_diff(&exact).unwrap() < 1e-12);
    }

    #[test]
    fn dilation_guards_aliasing() {
        let g = grid();
        let f = make_test_signal(
            g,
            &TestSignal::Gaussian { sigma: 0.3, center: 0.0, freq: 2.0, amplitude: 1.0 },
        )
        .unwrap();
        match dilate(&f, 0.25) {
            Err(Error::Aliasing { spill }) => assert!(spill > 0.1),
            other => panic!("expected aliasing, got {other:?}"),
        }
        let wide = make_test_signal(
            g,
            &TestSignal::Gaussian { sigma: 2.0, center: 0.0, freq: 0.0, amplitude: 1.0 },
        )
        .unwrap();
        assert!(matches!(dilate(&wide, 4.0), Err(Error::Aliasing { .. })));
    }

    #[test]
    fn gaussian_moments() {
        let g = GridSpec::new(1024, 1.0 / 16.0).unwrap();
        let sigma = 1.0;
        let f = make_test_signal(g, &TestSignal::Gaussian { sigma, center: 0.0, freq: 0.0, amplitude: 1.0 })
            .unwrap();
        let var = |xs: &[f64], w: &[f64]| {
            let tot: f64 = w.iter().sum();
            xs.iter().zip(w).map(|(x, w)| x * x * w).sum::<f64>() / tot
        };
        let wt: Vec<f64> = f.samples().iter().map(|z| z.norm_sqr()).collect();
        let wf: Vec<f64> = forward_spectrum(&f).coeffs().iter().map(|z| z.norm_sqr()).collect();
        let st = var(&g.times(), &wt).sqrt();
        let sf = var(&g.freqs(), &wf).sqrt();
        let want_t = sigma / 2f64.sqrt();
        let want_f = 1.0 / (2.0 * PI * sigma * 2f64.sqrt());
        assert!((st / want_t - 1.0).abs() < 1e-3);
        assert!((sf / want_f - 1.0).abs() < 1e-3);
    }

    #[test]
    fn zero_amplitude_is_zero() {
        let f = make_test_signal(
            grid(),
            &TestSignal::ModulatedBump { half_width: 2.0, center: 0.0, freq: 1.0, amplitude: 0.0 },
        )
        .unwrap();
        assert_eq!(f.norm(), 0.0);
    }

    #[test]
    fn random_signal_reproducible() {
        assert_eq!(packet(11), packet(11));
        assert_ne!(packet(11), packet(12));
    }

    #[test]
    fn edge_guards() {
        let g = grid();
        let wide = TestSignal::Gaussian { sigma: 6.0, center: 0.0, freq: 0.0, amplitude: 1.0 };
        assert!(make_test_signal(g, &wide).is_err());
        let sharp = TestSignal::Gaussian { sigma: 0.05, center: 0.0, freq: 0.0, amplitude: 1.0 };
        assert!(make_test_signal(g, &sharp).is_err());
    }

    #[test]
    fn inner_product_mismatch() {
        let f = packet(1);
        let h = SampledSignal::zeros(GridSpec::new(256, 1.0 / 16.0).unwrap());
        assert_eq!(inner_product(&f, &h), Err(Error::GridMismatch));
    }

    #[test]
    fn csv_and_binary_round_trip() {
        let f = packet(5);
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        assert_eq!(read_csv(&buf[..]).unwrap(), f);
        let mut bin = Vec::new();
        write_binary(&f, &mut bin).unwrap();
        assert_eq!(read_binary(&bin[..]).unwrap(), f);
        assert!(read_binary(&b"NOPE"[..]).is_err());
    }
}
