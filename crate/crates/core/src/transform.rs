//! The α-transform `V_g^α f(x, ω) = ⟨f, T_x M_ω D_{c(1+|ω|)^{-α}} g⟩` on the signal grid.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::atoms::{map_indexed, WindowShape};
use crate::error::{Error, Result};
use crate::signal::{forward_spectrum, signal_from_values, GridSpec, SampledSignal};
use crate::spaces::{seq_norm, RatioReport};

/// Largest window energy fraction allowed outside the grid band.
pub const TRANSFORM_SPILL_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformGrid {
    pub omegas: Vec<f64>,
    pub c: f64,
}

impl TransformGrid {
    /// `count` equispaced frequencies on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, count: usize, c: f64) -> Result<Self> {
        if count < 2 || !(hi > lo) || !(c > 0.0) {
            return Err(Error::InvalidParameter("transform grid needs count >= 2, hi > lo, c > 0".into()));
        }
        let step = (hi - lo) / (count - 1) as f64;
        Ok(TransformGrid { omegas: (0..count).map(|i| lo + i as f64 * step).collect(), c })
    }

    pub fn d_omega(&self) -> f64 {
        if self.omegas.len() < 2 {
            1.0
        } else {
            self.omegas[1] - self.omegas[0]
        }
    }

    pub fn dilation(&self, omega: f64, alpha: f64) -> f64 {
        self.c * (1.0 + omega.abs()).powf(-alpha)
    }
}

/// Values over `(ω, x)`: one row per frequency sample, one column per grid time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaTransform {
    pub grid: GridSpec,
    pub omegas: Vec<f64>,
    pub d_omega: f64,
    pub rows: Vec<Vec<C64>>,
}

impl AlphaTransform {
    /// `|V|²` for plotting.
    pub fn power(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.iter().map(|z| z.norm_sqr()).collect()).collect()
    }
}

/// Energy fraction of `d^{1/2}ĝ(d(ξ-ω))` outside the grid band.
fn window_spill(g: &WindowShape, grid: &GridSpec, omega: f64, d: f64) -> f64 {
    let nyq = grid.nyquist();
    let df = grid.df();
    let n = grid.n() as i64;
    let (mut inside, mut outside) = (0.0, 0.0);
    for k in -2 * n..2 * n {
        let xi = k as f64 * df;
        let v = g.spectrum(d * (xi - omega)).norm_sqr();
        if xi >= -nyq && xi < nyq {
            inside += v;
        } else {
            outside += v;
        }
    }
    if inside + outside == 0.0 {
        0.0
    } else {
        outside / (inside + outside)
    }
}

pub fn alpha_transform(f: &SampledSignal, g: &WindowShape, alpha: f64, tg: &TransformGrid) -> Result<AlphaTransform> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in [0, 1)")));
    }
    let grid = *f.grid();
    let freqs = grid.freqs();
    for &w in &tg.omegas {
        let spill = window_spill(g, &grid, w, tg.dilation(w, alpha));
        if spill > TRANSFORM_SPILL_TOL {
            return Err(Error::Aliasing { spill });
        }
    }
    let values = forward_spectrum(f).values();
    let rows = map_indexed(tg.omegas.len(), |i| {
        let w = tg.omegas[i];
        let d = tg.dilation(w, alpha);
        let prod = values.iter().zip(&freqs).map(|(v, &x)| v * (g.spectrum(d * (x - w)) * d.sqrt()).conj()).collect();
        signal_from_values(grid, prod).into_samples()
    });
    Ok(AlphaTransform { grid, omegas: tg.omegas.clone(), d_omega: tg.d_omega(), rows })
}

/// `(Σ_ω (Σ_x |V|^p dx)^{q/p} (1+|ω|)^{sq} dω)^{1/q}`, with sups at infinity.
pub fn mixed_norm(v: &AlphaTransform, p: f64, q: f64, s: f64) -> f64 {
    let dx = v.grid.dt();
    let inner = v.rows.iter().zip(&v.omegas).map(|(row, w)| {
        let x = seq_norm(row.iter().map(|z| z.norm()), p);
        let x = if p.is_infinite() { x } else { x * dx.powf(1.0 / p) };
        x * (1.0 + w.abs()).powf(s)
    });
    let outer = seq_norm(inner, q);
    if q.is_infinite() {
        outer
    } else {
        outer * v.d_omega.powf(1.0 / q)
    }
}

/// `‖(1+|ξ|)^s 𝓕f‖₂`.
pub fn sobolev_norm(f: &SampledSignal, s: f64) -> f64 {
    let grid = f.grid();
    let sp = forward_spectrum(f);
    sp.coeffs()
        .iter()
        .enumerate()
        .map(|(k, z)| z.norm_sqr() * (1.0 + grid.freq(k).abs()).powf(2.0 * s))
        .sum::<f64>()
        .sqrt()
        * grid.dt().sqrt()
}

/// Ratios `mixed_norm(V f; 2, 2, s) / ‖f‖_{H^s}` over nonzero test signals.
pub fn sobolev_equivalence(
    signals: &[SampledSignal],
    g: &WindowShape,
    alpha: f64,
    s: f64,
    tg: &TransformGrid,
) -> Result<RatioReport> {
    let mut ratios = Vec::new();
    let mut skipped = 0;
    for f in signals {
        let h = sobolev_norm(f, s);
        if h == 0.0 {
            skipped += 1;
            continue;
        }
        ratios.push(mixed_norm(&alpha_transform(f, g, alpha, tg)?, 2.0, 2.0, s) / h);
    }
    RatioReport::from_ratios(ratios, skipped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{dilate, inner_product, make_test_signal, modulate, translate, TestSignal};
    use std::f64::consts::PI;

    fn grid() -> GridSpec {
        GridSpec::new(1024, 1.0 / 32.0).unwrap()
    }

    fn sample(seed: u64) -> SampledSignal {
        make_test_signal(
            grid(),
            &TestSignal::RandomBandlimited {
                band_lo: -6.0,
                band_hi: 6.0,
                time_center: 0.0,
                time_halfwidth: 3.0,
                packets: 6,
                packet_width: 1.0,
                seed,
            },
        )
        .unwrap()
    }

    fn tgrid() -> TransformGrid {
        TransformGrid::uniform(-10.0, 10.0, 161, 1.0).unwrap()
    }

    #[test]
    fn zero_signal_and_norms() {
        let g = WindowShape::gaussian(1.0);
        let v = alpha_transform(&SampledSignal::zeros(grid()), &g, 0.5, &tgrid()).unwrap();
        assert!(v.rows.iter().flatten().all(|z| z.norm() == 0.0));
        assert_eq!(mixed_norm(&v, 2.0, 2.0, 1.0), 0.0);
    }

    #[test]
    fn matched_atom_gives_window_energy() {
        let gr = grid();
        let shape = WindowShape::gaussian(1.0);
        let g = shape.samples(&gr);
        let tg = tgrid();
        let (wi, x0) = (100, 1.5);
        let w0 = tg.omegas[wi];
        let d = tg.dilation(w0, 0.5);
        let atom = translate(&modulate(&dilate(&g, d).unwrap(), w0), x0);
        let v = alpha_transform(&atom, &shape, 0.5, &tg).unwrap();
        let m = gr.times().iter().position(|&t| (t - x0).abs() < 1e-12).unwrap();
        assert!((v.rows[wi][m].norm() - g.norm().powi(2)).abs() < 1e-10);
    }

    #[test]
    fn entries_match_inner_products() {
        let gr = grid();
        let shape = WindowShape::gaussian(1.0);
        let g = shape.samples(&gr);
        let f = sample(2);
        let tg = tgrid();
        let v = alpha_transform(&f, &shape, 0.5, &tg).unwrap();
        for (wi, m) in [(10, 400), (80, 512), (150, 600)] {
            let w = tg.omegas[wi];
            let h = translate(&modulate(&dilate(&g, tg.dilation(w, 0.5)).unwrap(), w), gr.time(m));
            assert!((v.rows[wi][m] - inner_product(&f, &h).unwrap()).norm() < 1e-10);
        }
    }

    #[test]
    fn stft_slice_matches_windowed_dft() {
        let gr = grid();
        let shape = WindowShape::gaussian(1.0);
        let f = sample(3);
        let tg = tgrid();
        let v = alpha_transform(&f, &shape, 0.0, &tg).unwrap();
        let wi = 97;
        let w = tg.omegas[wi];
        let period = gr.period();
        let mut worst = 0.0f64;
        for m in (0..gr.n()).step_by(7) {
            let x = gr.time(m);
            let mut acc = C64::new(0.0, 0.0);
            for (i, z) in f.samples().iter().enumerate() {
                let t = gr.time(i);
                let mut u = t - x;
                u -= period * (u / period).round();
                let win = 2f64.powf(0.25) * (-PI * u * u).exp();
                acc += z * win * C64::from_polar(1.0, -2.0 * PI * w * u);
            }
            worst = worst.max((acc * gr.dt() - v.rows[wi][m]).norm());
        }
        assert!(worst <= 1e-10, "{worst}");
    }

    #[test]
    fn covariance_and_linearity() {
        let gr = grid();
        let shape = WindowShape::gaussian(1.0);
        let f = sample(4);
        let tg = tgrid();
        let v = alpha_transform(&f, &shape, 0.5, &tg).unwrap();
        let shift = 40;
        let x1 = shift as f64 * gr.dt();
        let vs = alpha_transform(&translate(&f, x1), &shape, 0.5, &tg).unwrap();
        for wi in [0, 60, 160] {
            for m in 0..gr.n() {
                let mm = (m + gr.n() - shift) % gr.n();
                assert!((vs.rows[wi][m].norm() - v.rows[wi][mm].norm()).abs() < 1e-10);
            }
        }
        let h = sample(5);
        let (a, b) = (C64::new(0.3, -1.1), C64::new(-2.0, 0.4));
        let combo = f.scale(a).add(&h.scale(b)).unwrap();
        let vc = alpha_transform(&combo, &shape, 0.5, &tg).unwrap();
        let vh = alpha_transform(&h, &shape, 0.5, &tg).unwrap();
        for wi in [5, 90] {
            for m in (0..gr.n()).step_by(13) {
                assert!((vc.rows[wi][m] - (v.rows[wi][m] * a + vh.rows[wi][m] * b)).norm() < 1e-10);
            }
        }
        let c = C64::new(0.0, 3.0);
        let vf = alpha_transform(&f.scale(c), &shape, 0.5, &tg).unwrap();
        assert!((mixed_norm(&vf, 2.0, 1.0, 1.0) - 3.0 * mixed_norm(&v, 2.0, 1.0, 1.0)).abs() < 1e-10);
    }

    #[test]
    fn stft_isometry_at_alpha_zero() {
        let shape = WindowShape::gaussian(1.0);
        let signals: Vec<_> = (0..5).map(sample).collect();
        let r = sobolev_equivalence(&signals, &shape, 0.0, 0.0, &tgrid()).unwrap();
        assert!((r.ratio_min - 1.0).abs() < 0.05 && (r.ratio_max - 1.0).abs() < 0.05, "{r:?}");
    }

    #[test]
    fn aliasing_guard() {
        let shape = WindowShape::gaussian(1.0);
        let tg = TransformGrid::uniform(-15.5, 15.5, 32, 1.0).unwrap();
        assert!(matches!(alpha_transform(&sample(1), &shape, 0.0, &tg), Err(Error::Aliasing { .. })));
    }
}
