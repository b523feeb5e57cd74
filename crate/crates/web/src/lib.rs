use alphaframe::atoms::{atom, FrameSpec, MotherWindow, WindowShape};
use alphaframe::bapu::build_bapu;
use alphaframe::covering::CoveringSpec;
use alphaframe::signal::{forward_spectrum, make_test_signal, GridSpec, TestSignal};
use alphaframe::transform::{alpha_transform, TransformGrid};
use wasm_bindgen::prelude::*;

// Small grid keeps the page responsive on one thread.
const N: usize = 1024;
const DT: f64 = 1.0 / 32.0;
const SMOOTHNESS: usize = 7;

fn grid() -> GridSpec {
    GridSpec::new(N, DT).expect("demo grid")
}

/// Same period at twice the rate, so dilated windows stay inside the band.
fn fine_grid() -> GridSpec {
    GridSpec::new(2 * N, DT / 2.0).expect("demo grid")
}

fn js(e: alphaframe::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Partition windows over the positive half of the band, one row per index.
#[wasm_bindgen(getter_with_clone)]
pub struct Partition {
    pub freqs: Vec<f64>,
    /// Row-major, `count × freqs.len()`.
    pub windows: Vec<f64>,
    pub sum: Vec<f64>,
    pub positions: Vec<f64>,
    pub lefts: Vec<f64>,
    pub rights: Vec<f64>,
    pub count: usize,
}

pub fn partition_view(alpha: f64, b: f64) -> alphaframe::Result<Partition> {
    let grid = grid();
    let cov = CoveringSpec::for_grid(alpha, b, &grid)?;
    let bapu = build_bapu(&cov, &grid, SMOOTHNESS)?;
    let bins = grid.freq_range(-grid.nyquist(), grid.nyquist());
    let freqs: Vec<f64> = bins.clone().map(|k| grid.freq(k)).collect();
    let mut windows = Vec::new();
    let mut sum = vec![0.0; freqs.len()];
    for j in cov.indices() {
        let w = bapu.window(j);
        for (i, k) in bins.clone().enumerate() {
            windows.push(w[k]);
            sum[i] += w[k];
        }
    }
    let ivs = cov.intervals();
    Ok(Partition {
        freqs,
        windows,
        sum,
        positions: cov.indices().map(|j| cov.position(j)).collect(),
        lefts: ivs.iter().map(|iv| iv.left).collect(),
        rights: ivs.iter().map(|iv| iv.right).collect(),
        count: ivs.len(),
    })
}

#[wasm_bindgen]
pub fn partition(alpha: f64, b: f64) -> Result<Partition, JsValue> {
    partition_view(alpha, b).map_err(js)
}

#[wasm_bindgen(getter_with_clone)]
pub struct Spectrogram {
    pub times: Vec<f64>,
    pub omegas: Vec<f64>,
    /// `|V|²`, row-major over `(ω, x)`.
    pub power: Vec<f64>,
}

/// α-spectrogram of a chirp plus a short high-frequency burst.
pub fn spectrogram_view(alpha: f64, rate: f64, bins: usize) -> alphaframe::Result<Spectrogram> {
    let grid = fine_grid();
    let chirp = make_test_signal(grid, &TestSignal::Chirp { sigma: 2.0, center: 0.0, f0: 0.0, rate, amplitude: 1.0 })?;
    let burst = make_test_signal(
        grid,
        &TestSignal::Gaussian { sigma: 0.15, center: 4.0, freq: 8.0, amplitude: 1.0 },
    )?;
    let f = chirp.add(&burst)?;
    let tg = TransformGrid::uniform(-12.0, 12.0, bins.max(2), 1.0)?;
    let v = alpha_transform(&f, &WindowShape::spectral_bump(0.5), alpha, &tg)?;
    let stride = 8;
    let power = v.power().iter().flat_map(|r| r.iter().step_by(stride).copied().collect::<Vec<_>>()).collect();
    Ok(Spectrogram { times: grid.times().into_iter().step_by(stride).collect(), omegas: v.omegas, power })
}

#[wasm_bindgen]
pub fn spectrogram(alpha: f64, rate: f64, bins: usize) -> Result<Spectrogram, JsValue> {
    spectrogram_view(alpha, rate, bins).map_err(js)
}

#[wasm_bindgen(getter_with_clone)]
pub struct AtomView {
    pub times: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub freqs: Vec<f64>,
    pub magnitude: Vec<f64>,
    pub jmax: i32,
    pub kmax: i32,
}

pub fn atom_view(alpha: f64, a: f64, j: i32, k: i32) -> alphaframe::Result<AtomView> {
    let grid = grid();
    let w = MotherWindow::new(WindowShape::gaussian(1.0), &grid)?;
    let fs = FrameSpec::new(w, CoveringSpec::for_grid(alpha, 1.0, &grid)?, a)?;
    let jmax = fs.jmax();
    let j = i64::from(j).clamp(-jmax, jmax);
    let kmax = fs.kmax(j).unwrap_or(0);
    let g = atom(&fs, j, i64::from(k).clamp(-kmax, kmax))?;
    Ok(AtomView {
        times: grid.times(),
        re: g.samples().iter().map(|z| z.re).collect(),
        im: g.samples().iter().map(|z| z.im).collect(),
        freqs: grid.freqs(),
        magnitude: forward_spectrum(&g).values().iter().map(|z| z.norm()).collect(),
        jmax: jmax as i32,
        kmax: kmax as i32,
    })
}

#[wasm_bindgen]
pub fn atom_at(alpha: f64, a: f64, j: i32, k: i32) -> Result<AtomView, JsValue> {
    atom_view(alpha, a, j, k).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_sums_to_one_on_the_band() {
        let p = partition_view(0.5, 1.0).unwrap();
        assert_eq!(p.windows.len(), p.count * p.freqs.len());
        let (lo, hi) = (p.lefts[0], p.rights[p.count - 1]);
        for (x, s) in p.freqs.iter().zip(&p.sum) {
            if *x > lo + 1.0 && *x < hi - 1.0 {
                assert!((s - 1.0).abs() < 1e-10, "{x}: {s}");
            }
        }
    }

    #[test]
    fn spectrogram_shape() {
        for alpha in [0.0, 0.9] {
            assert!(spectrogram_view(alpha, 1.5, 16).is_ok());
        }
        let s = spectrogram_view(0.5, 1.5, 48).unwrap();
        assert_eq!(s.omegas.len(), 48);
        assert_eq!(s.power.len(), 48 * s.times.len());
        assert!(s.power.iter().all(|x| x.is_finite() && *x >= 0.0));
        assert!(s.power.iter().cloned().fold(0.0, f64::max) > 0.0);
    }

    #[test]
    fn atom_peaks_at_its_position() {
        let v = atom_view(0.5, 0.36, 3, 0).unwrap();
        let (i, _) = v.magnitude.iter().enumerate().fold((0, 0.0), |b, (i, &m)| if m > b.1 { (i, m) } else { b });
        let cov = CoveringSpec::for_grid(0.5, 1.0, &grid()).unwrap();
        assert!((v.freqs[i] - cov.position(3)).abs() < 0.1);
        assert!(v.kmax > 0);
    }

    #[test]
    fn out_of_range_indices_are_clamped() {
        let v = atom_view(0.25, 0.5, 999, -999).unwrap();
        assert!(v.jmax > 0 && v.re.len() == N);
    }
}
