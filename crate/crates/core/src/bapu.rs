//! Bounded admissible partitions of unity subordinate to an α-covering, and
//! the segmentation operators `𝒫_j f = 𝓕^{-1}(ψ_j·𝓕f)`.
//!
//! Each `ψ_j` is a plateau on `I_j` with smoothstep ramps across the overlaps
//! with its neighbours, divided pointwise by the sum of all windows. Outside
//! `I_j` the window is exactly zero on the grid.

use serde::{Deserialize, Serialize};

use crate::covering::{verify_admissible, CoveringInterval, CoveringSpec};
use crate::error::{Error, Result};
use crate::signal::{forward_spectrum, inverse_spectrum, signal_from_values, GridSpec, SampledSignal, Spectrum};

pub const DEFAULT_SMOOTHNESS: usize = 7;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Polynomial smoothstep of order `N`: `C^N` at both ends, `S(x) + S(1-x) = 1`.
pub fn smoothstep(order: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    if x > 0.5 {
        return 1.0 - smoothstep(order, 1.0 - x);
    }
    let n = order;
    let poly: f64 = (0..=n)
        .map(|k| binomial(n + k, k) * binomial(2 * n + 1, n - k) * (-x).powi(k as i32))
        .sum();
    x.powi(n as i32 + 1) * poly
}

/// `1` on `[-1, 1]`, smoothstep ramp to `0` at `±(1+eps)`.
pub fn plateau(order: usize, eps: f64, x: f64) -> f64 {
    smoothstep(order, (1.0 + eps - x.abs()) / eps)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bapu {
    spec: CoveringSpec,
    grid: GridSpec,
    order: usize,
    windows: Vec<Vec<f64>>,
}

impl Bapu {
    /// Wraps hand-made windows, one per `j ∈ [-J, J]`, without checks.
    pub fn from_windows(spec: CoveringSpec, grid: GridSpec, windows: Vec<Vec<f64>>) -> Result<Self> {
        if windows.len() != (2 * spec.jmax() + 1) as usize || windows.iter().any(|w| w.len() != grid.n()) {
            return Err(Error::InvalidParameter("one grid-length window per index is required".into()));
        }
        Ok(Bapu { spec, grid, order: 0, windows })
    }

    pub fn spec(&self) -> &CoveringSpec {
        &self.spec
    }
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn order(&self) -> usize {
        self.order
    }
    pub fn window(&self, j: i64) -> &[f64] {
        &self.windows[(j + self.spec.jmax()) as usize]
    }
    /// Bins where `ψ_j` may be nonzero.
    pub fn support(&self, j: i64) -> std::ops::Range<usize> {
        let iv = self.spec.interval(j);
        self.grid.freq_range(iv.left, iv.right)
    }
}

pub fn build_bapu(spec: &CoveringSpec, grid: &GridSpec, smoothness: usize) -> Result<Bapu> {
    spec.validate_for_grid(grid)?;
    let freqs = grid.freqs();
    let report = verify_admissible(spec, &freqs);
    if let Some(at) = report.gap_at {
        return Err(Error::CoveringGap { at });
    }
    if report.max_overlap > 2 {
        let ivs = spec.intervals();
        let at = freqs
            .iter()
            .cloned()
            .find(|&x| ivs.iter().filter(|iv| iv.contains(x)).count() > 2)
            .unwrap_or(f64::NAN);
        return Err(Error::CoveringOverlap { count: report.max_overlap, at });
    }

    let ivs = spec.intervals();
    let n = grid.n();
    let mut raw: Vec<Vec<f64>> = Vec::with_capacity(ivs.len());
    for (idx, iv) in ivs.iter().enumerate() {
        let wl = if idx > 0 { (ivs[idx - 1].right - iv.left).max(0.0) } else { 0.0 };
        let wr = if idx + 1 < ivs.len() { (iv.right - ivs[idx + 1].left).max(0.0) } else { 0.0 };
        let mut w = vec![0.0; n];
        for k in grid.freq_range(iv.left, iv.right) {
            w[k] = ramp(iv, wl, wr, smoothness, freqs[k]);
        }
        raw.push(w);
    }
    let (lo, hi) = spec.covered_range();
    for k in 0..n {
        let total: f64 = raw.iter().map(|w| w[k]).sum();
        let inside = lo <= freqs[k] && freqs[k] <= hi;
        for w in raw.iter_mut() {
            w[k] = if inside && total > 0.0 { w[k] / total } else { 0.0 };
        }
    }
    Ok(Bapu { spec: *spec, grid: *grid, order: smoothness, windows: raw })
}

fn ramp(iv: &CoveringInterval, wl: f64, wr: f64, order: usize, xi: f64) -> f64 {
    if wl > 0.0 && xi < iv.left + wl {
        smoothstep(order, (xi - iv.left) / wl)
    } else if wr > 0.0 && xi > iv.right - wr {
        smoothstep(order, (iv.right - xi) / wr)
    } else {
        1.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BapuReport {
    /// `max_j ‖𝓕^{-1}ψ_j‖₁` on the grid.
    pub p1_proxy: f64,
    pub p1_norms: Vec<(i64, f64)>,
    /// `max / median` of the per-window `𝓕L¹` proxies.
    pub p1_spread: f64,
    pub p2_violation: f64,
    pub p3_deviation: f64,
    pub p3_worst_at: f64,
}

impl BapuReport {
    pub fn pass(&self) -> bool {
        self.p2_violation == 0.0 && self.p3_deviation <= 1e-10 && self.p1_proxy.is_finite() && self.p1_spread <= 10.0
    }
}

pub fn verify_bapu(b: &Bapu) -> BapuReport {
    let g = b.grid;
    let freqs = g.freqs();
    let mut p2_violation = 0.0f64;
    let mut p1_norms = Vec::new();
    for j in b.spec.indices() {
        let iv = b.spec.interval(j);
        let w = b.window(j);
        for (k, &v) in w.iter().enumerate() {
            if !iv.contains(freqs[k]) {
                p2_violation = p2_violation.max(v.abs());
            }
        }
        let time = signal_from_values(g, w.iter().map(|&v| v.into()).collect());
        p1_norms.push((j, g.dt() * time.samples().iter().map(|z| z.norm()).sum::<f64>()));
    }
    let (lo, hi) = b.spec.covered_range();
    let mut p3_deviation = 0.0f64;
    let mut p3_worst_at = f64::NAN;
    for (k, &x) in freqs.iter().enumerate() {
        if x < lo || x > hi {
            continue;
        }
        let total: f64 = b.windows.iter().map(|w| w[k]).sum();
        let dev = (total - 1.0).abs();
        if dev > p3_deviation {
            p3_deviation = dev;
            p3_worst_at = x;
        }
    }
    let mut vals: Vec<f64> = p1_norms.iter().map(|&(_, v)| v).collect();
    vals.sort_by(f64::total_cmp);
    let p1_proxy = *vals.last().unwrap_or(&0.0);
    let median = vals[vals.len() / 2];
    let p1_spread = if median > 0.0 { p1_proxy / median } else { f64::INFINITY };
    BapuReport { p1_proxy, p1_norms, p1_spread, p2_violation, p3_deviation, p3_worst_at }
}

pub fn segment(b: &Bapu, f: &SampledSignal, j: i64) -> Result<SampledSignal> {
    if f.grid() != &b.grid {
        return Err(Error::GridMismatch);
    }
    if j.abs() > b.spec.jmax() {
        return Err(Error::IndexOutOfRange { j, k: 0 });
    }
    Ok(segment_spectrum(b, &forward_spectrum(f), j))
}

/// All segments `(j, 𝒫_j f)` from one forward transform.
pub fn segment_all(b: &Bapu, f: &SampledSignal) -> Result<Vec<(i64, SampledSignal)>> {
    if f.grid() != &b.grid {
        return Err(Error::GridMismatch);
    }
    let spec = forward_spectrum(f);
    Ok(b.spec.indices().map(|j| (j, segment_spectrum(b, &spec, j))).collect())
}

fn segment_spectrum(b: &Bapu, s: &Spectrum, j: i64) -> SampledSignal {
    let w = b.window(j);
    let values: Vec<_> = s.values().iter().zip(w).map(|(z, &v)| z * v).collect();
    inverse_spectrum(&Spectrum::from_values(b.grid, values).expect("grid-length spectrum"))
}

/// Relative `L²` size of the part of `f` not reproduced by `Σ_j ψ_j`.
pub fn band_spill(b: &Bapu, f: &SampledSignal) -> Result<f64> {
    if f.grid() != &b.grid {
        return Err(Error::GridMismatch);
    }
    let s = forward_spectrum(f);
    let mut lost = 0.0;
    let mut total = 0.0;
    for (k, c) in s.coeffs().iter().enumerate() {
        let sum: f64 = b.windows.iter().map(|w| w[k]).sum();
        lost += c.norm_sqr() * (1.0 - sum).powi(2);
        total += c.norm_sqr();
    }
    Ok(if total > 0.0 { (lost / total).sqrt() } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decay::fit_tail_exponent;
    use crate::signal::{make_test_signal, TestSignal};

    fn grid() -> GridSpec {
        GridSpec::new(2048, 1.0 / 64.0).unwrap()
    }

    #[test]
    fn smoothstep_symmetry_and_range() {
        for order in [1, 3, 7] {
            for i in 0..=100 {
                let x = i as f64 / 100.0;
                let s = smoothstep(order, x);
                assert!((0.0..=1.0).contains(&s));
                assert!((s + smoothstep(order, 1.0 - x) - 1.0).abs() < 1e-13);
            }
        }
        assert_eq!(smoothstep(7, 0.0), 0.0);
        assert_eq!(smoothstep(7, 1.0), 1.0);
        assert!((smoothstep(1, 0.25) - (3.0 * 0.0625 - 2.0 * 0.015625)).abs() < 1e-15);
    }

    #[test]
    fn half_alpha_partition() {
        let g = grid();
        let spec = CoveringSpec::for_grid(0.5, 1.0, &g).unwrap();
        let b = build_bapu(&spec, &g, DEFAULT_SMOOTHNESS).unwrap();
        let r = verify_bapu(&b);
        assert!(r.pass(), "{r:?}");
        assert!(r.p3_deviation <= 1e-12);
        for j in spec.indices() {
            assert!(b.window(j).iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
        let j0 = b.window(0);
        let n = g.n();
        for k in 1..n / 2 {
            assert_eq!(j0[n / 2 + k], j0[n / 2 - k]);
        }
    }

    #[test]
    fn single_cover_region_is_one() {
        let g = grid();
        let spec = CoveringSpec::for_grid(0.5, 1.0, &g).unwrap();
        let b = build_bapu(&spec, &g, DEFAULT_SMOOTHNESS).unwrap();
        // I_2 = [3.0, 5.5]; I_1 ends at 3.25, I_3 starts at 5.25.
        let k = g.freq_index(4.25);
        assert_eq!(b.window(2)[k], 1.0);
        for j in spec.indices().filter(|&j| j != 2) {
            assert_eq!(b.window(j)[k], 0.0);
        }
    }

    #[test]
    fn uniform_case_halves_at_endpoints() {
        let g = grid();
        let spec = CoveringSpec::new(0.0, 1.0, 10).unwrap();
        let b = build_bapu(&spec, &g, DEFAULT_SMOOTHNESS).unwrap();
        let k = g.freq_index(3.0);
        assert_eq!(b.window(2)[k], 0.5);
        assert_eq!(b.window(3)[k], 0.5);
        assert!(verify_bapu(&b).p3_deviation < 1e-15);
    }

    #[test]
    fn hand_built_defects_flagged() {
        let g = grid();
        let spec = CoveringSpec::new(0.5, 1.0, 5).unwrap();
        let good = build_bapu(&spec, &g, 7).unwrap();
        let mut gap: Vec<Vec<f64>> = spec.indices().map(|j| good.window(j).to_vec()).collect();
        let k = g.freq_index(4.25);
        gap[(2 + 5) as usize][k] = 0.0;
        let r = verify_bapu(&Bapu::from_windows(spec, g, gap).unwrap());
        assert!((r.p3_deviation - 1.0).abs() < 1e-12);
        assert!(!r.pass());

        let mut wide: Vec<Vec<f64>> = spec.indices().map(|j| good.window(j).to_vec()).collect();
        let edge = g.freq_range(spec.interval(2).left, spec.interval(2).right).end;
        wide[(2 + 5) as usize][edge] = 0.01;
        let r = verify_bapu(&Bapu::from_windows(spec, g, wide).unwrap());
        assert!(r.p2_violation > 0.0);
        assert!(!r.pass());
    }

    #[test]
    fn rejects_band_beyond_nyquist() {
        let g = GridSpec::new(256, 1.0 / 16.0).unwrap();
        let spec = CoveringSpec::new(0.5, 1.0, 9).unwrap();
        assert!(build_bapu(&spec, &g, 7).is_err());
    }

    #[test]
    fn segments_sum_to_signal() {
        let g = grid();
        let spec = CoveringSpec::for_grid(0.5, 1.0, &g).unwrap();
        let b = build_bapu(&spec, &g, 7).unwrap();
        let f = make_test_signal(
            g,
            &TestSignal::RandomBandlimited {
                band_lo: -18.0,
                band_hi: 18.0,
                time_center: 0.0,
                time_halfwidth: 4.0,
                packets: 12,
                packet_width: 1.0,
                seed: 9,
            },
        )
        .unwrap();
        let mut acc = SampledSignal::zeros(g);
        for (_, s) in segment_all(&b, &f).unwrap() {
            acc = acc.add(&s).unwrap();
        }
        assert!(acc.relative_error(&f).unwrap() < 1e-10);
        assert!(band_spill(&b, &f).unwrap() < 1e-10);
    }

    #[test]
    fn segment_inside_and_outside() {
        let g = grid();
        let spec = CoveringSpec::for_grid(0.5, 1.0, &g).unwrap();
        let b = build_bapu(&spec, &g, 7).unwrap();
        let f = make_test_signal(g, &TestSignal::Gaussian { sigma: 2.0, center: 0.0, freq: 4.25, amplitude: 1.0 })
            .unwrap();
        let s2 = segment(&b, &f, 2).unwrap();
        assert!(s2.relative_error(&f).unwrap() < 1e-10);
        let s22 = segment(&b, &s2, 2).unwrap();
        assert!(s22.relative_error(&s2).unwrap() < 1e-10);
        assert!(segment(&b, &f, -3).unwrap().norm() < 1e-10 * f.norm());
        assert!(segment(&b, &f, 9).is_err());
    }

    #[test]
    fn window_time_decay() {
        let g = GridSpec::new(4096, 1.0 / 64.0).unwrap();
        let spec = CoveringSpec::new(0.5, 1.0, 7).unwrap();
        let order = 5;
        let b = build_bapu(&spec, &g, order).unwrap();
        let times = g.times();
        for j in [0, 3] {
            let w = signal_from_values(g, b.window(j).iter().map(|&v| v.into()).collect());
            let mags: Vec<f64> = w.samples().iter().map(|z| z.norm()).collect();
            let gamma = fit_tail_exponent(&times, &mags, 1e-2, 1e-14, 20.0).unwrap();
            assert!(gamma >= order as f64 - 1.0, "j = {j}: {gamma}");
        }
    }
}
