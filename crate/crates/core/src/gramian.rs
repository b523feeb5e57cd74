//! Gramian matrices of atom systems, off-diagonal decay envelopes and
//! operator norms on weighted sequence spaces.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::atoms::{map_indexed, AtomSystem, FrameSpec, Lattice, WindowShape};
use crate::bapu::build_bapu;
use crate::covering::{slope, weight};
use crate::error::{Error, Result};
use crate::frame::painless_dual;

/// Index of one atom with the size of its scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomTag {
    pub j: i64,
    pub k: i64,
    pub s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GramianMatrix {
    pub rows: Vec<AtomTag>,
    pub cols: Vec<AtomTag>,
    pub entries: DMatrix<C64>,
}

impl GramianMatrix {
    pub fn new(rows: Vec<AtomTag>, cols: Vec<AtomTag>, entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != rows.len() || entries.ncols() != cols.len() {
            return Err(Error::InvalidParameter("entry matrix does not match the index lists".into()));
        }
        Ok(GramianMatrix { rows, cols, entries })
    }

    pub fn identity(tags: Vec<AtomTag>) -> Self {
        let n = tags.len();
        GramianMatrix { rows: tags.clone(), cols: tags, entries: DMatrix::identity(n, n) }
    }

    pub fn adjoint(&self) -> Self {
        GramianMatrix { rows: self.cols.clone(), cols: self.rows.clone(), entries: self.entries.adjoint() }
    }

    /// Largest `|M - M*|` entry; zero for a Hermitian matrix.
    pub fn hermitian_defect(&self) -> f64 {
        if self.entries.nrows() != self.entries.ncols() {
            return f64::INFINITY;
        }
        (&self.entries - self.entries.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn tags(sys: &AtomSystem, time_window: f64) -> Vec<(usize, AtomTag)> {
    let mut out = Vec::new();
    for (bi, b) in sys.banks().iter().enumerate() {
        for k in -b.kmax..=b.kmax {
            if (k as f64 * b.tau).abs() <= time_window + 1e-12 {
                out.push((bi, AtomTag { j: b.j, k, s: b.s }));
            }
        }
    }
    out
}

/// `entries[n, m] = ⟨a_n, b_m⟩` over atoms with time centre `|t| ≤ time_window`.
pub fn gramian(a: &AtomSystem, b: &AtomSystem, time_window: f64) -> Result<GramianMatrix> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *a.grid();
    let df = grid.df();
    let rows = tags(a, time_window);
    let cols = tags(b, time_window);
    let band = |sys: &AtomSystem, bi: usize, k: i64| {
        let bank = &sys.banks()[bi];
        (bank.start, bank.atom_band(&grid, k))
    };
    let rb: Vec<(usize, Vec<C64>)> = rows.iter().map(|(bi, t)| band(a, *bi, t.k)).collect();
    let cb: Vec<(usize, Vec<C64>)> = cols.iter().map(|(bi, t)| band(b, *bi, t.k)).collect();
    let data = map_indexed(rows.len(), |r| {
        let (s0, x) = &rb[r];
        cb.iter()
            .map(|(s1, y)| {
                let lo = (*s0).max(*s1);
                let hi = (s0 + x.len()).min(s1 + y.len());
                let mut acc = C64::new(0.0, 0.0);
                for l in lo..hi {
                    acc += x[l - s0] * y[l - s1].conj();
                }
                acc * df
            })
            .collect::<Vec<_>>()
    });
    let entries = DMatrix::from_fn(rows.len(), cols.len(), |r, c| data[r][c]);
    GramianMatrix::new(rows.into_iter().map(|x| x.1).collect(), cols.into_iter().map(|x| x.1).collect(), entries)
}

/// `K (1+(1-α)|j-i|)^{-γ/(1-α)} (1 + max(s_i,s_j)|k/s_j - h/s_i|)^{-η}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayEnvelope {
    pub k: f64,
    pub gamma: f64,
    pub eta: f64,
    pub alpha: f64,
}

fn time_offset(r: &AtomTag, c: &AtomTag) -> f64 {
    r.s.max(c.s) * (r.k as f64 / r.s - c.k as f64 / c.s).abs()
}

impl DecayEnvelope {
    pub fn new(k: f64, gamma: f64, eta: f64, alpha: f64) -> Result<Self> {
        if !(k >= 0.0) || !(gamma > 0.0) || !(eta > 0.0) || !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidParameter("envelope needs K >= 0, gamma, eta > 0, 0 <= alpha < 1".into()));
        }
        Ok(DecayEnvelope { k, gamma, eta, alpha })
    }

    /// Envelope shape without the constant.
    pub fn shape(&self, r: &AtomTag, c: &AtomTag) -> f64 {
        let beta = 1.0 - self.alpha;
        let d = (r.j - c.j).abs() as f64;
        (1.0 + beta * d).powf(-self.gamma / beta) * (1.0 + time_offset(r, c)).powf(-self.eta)
    }

    pub fn value(&self, r: &AtomTag, c: &AtomTag) -> f64 {
        self.k * self.shape(r, c)
    }
}

/// Smallest `K` for which `M` lies under the envelope.
pub fn envelope_distance(m: &GramianMatrix, env: &DecayEnvelope) -> f64 {
    let mut best = 0.0f64;
    for (ri, r) in m.rows.iter().enumerate() {
        for (ci, c) in m.cols.iter().enumerate() {
            let v = m.entries[(ri, ci)].norm();
            if v > 0.0 {
                best = best.max(v / env.shape(r, c));
            }
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Envelope rate `γ`: shell maxima fall like `(1+(1-α)d)^{-γ/(1-α)}`.
    pub gamma_hat: f64,
    /// `γ/(1-α)`, the exponent of `1+(1-α)|j-i|`.
    pub freq_exponent: f64,
    pub eta_hat: f64,
    pub k_hat: f64,
    pub freq_shells: usize,
    pub time_shells: usize,
}

/// Log-log least squares on shell maxima in `d = |j-i|` and in the rescaled time offset.
pub fn fit_decay_exponents(m: &GramianMatrix, alpha: f64) -> Result<DecayFit> {
    let beta = 1.0 - alpha;
    let mut by_d: std::collections::BTreeMap<i64, f64> = Default::default();
    for (ri, r) in m.rows.iter().enumerate() {
        for (ci, c) in m.cols.iter().enumerate() {
            let e = by_d.entry((r.j - c.j).abs()).or_insert(0.0);
            *e = e.max(m.entries[(ri, ci)].norm());
        }
    }
    let (dx, dy): (Vec<f64>, Vec<f64>) =
        by_d.iter().filter(|(_, &v)| v > 0.0).map(|(&d, &v)| ((1.0 + beta * d as f64).ln(), v.ln())).unzip();
    if dx.len() < 8 {
        return Err(Error::InsufficientData(format!("{} frequency shells; at least 8 are needed", dx.len())));
    }
    let freq_exponent = -slope(&dx, &dy);

    // Time shells use entries with the fitted frequency factor divided out.
    let mut by_u: std::collections::BTreeMap<i64, (f64, f64)> = Default::default();
    for (ri, r) in m.rows.iter().enumerate() {
        for (ci, c) in m.cols.iter().enumerate() {
            let d = (r.j - c.j).abs() as f64;
            let v = m.entries[(ri, ci)].norm() * (1.0 + beta * d).powf(freq_exponent);
            let u = time_offset(r, c);
            let shell = by_u.entry(u.floor() as i64).or_insert((0.0, 0.0));
            if v > shell.0 {
                *shell = (v, u);
            }
        }
    }
    let (ux, uy): (Vec<f64>, Vec<f64>) =
        by_u.values().filter(|(v, _)| *v > 0.0).map(|&(v, u)| ((1.0 + u).ln(), v.ln())).unzip();
    if ux.len() < 8 {
        return Err(Error::InsufficientData(format!("{} time shells; at least 8 are needed", ux.len())));
    }
    let eta_hat = -slope(&ux, &uy);
    let mut k_hat = 0.0f64;
    for (ri, r) in m.rows.iter().enumerate() {
        for (ci, c) in m.cols.iter().enumerate() {
            let d = (r.j - c.j).abs() as f64;
            let env = (1.0 + beta * d).powf(-freq_exponent) * (1.0 + time_offset(r, c)).powf(-eta_hat);
            k_hat = k_hat.max(m.entries[(ri, ci)].norm() / env);
        }
    }
    Ok(DecayFit {
        gamma_hat: freq_exponent * beta,
        freq_exponent,
        eta_hat,
        k_hat,
        freq_shells: dx.len(),
        time_shells: ux.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum NormKind {
    One,
    Two,
    Infinity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpNorm {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub const POWER_ITERATIONS: usize = 200;
pub const POWER_TOL: f64 = 1e-8;

/// Norm of `M` on `ℓ^p` weighted by `m_{s,α}(j)`, i.e. of `D M D⁻¹` with `D = diag(m(j))`.
pub fn weighted_opnorm(m: &GramianMatrix, p: NormKind, s: f64, alpha: f64) -> OpNorm {
    let rw: Vec<f64> = m.rows.iter().map(|t| weight(alpha, t.j, s)).collect();
    let cw: Vec<f64> = m.cols.iter().map(|t| weight(alpha, t.j, s)).collect();
    let w = DMatrix::from_fn(m.entries.nrows(), m.entries.ncols(), |r, c| m.entries[(r, c)] * (rw[r] / cw[c]));
    let exact = |value| OpNorm { value, iterations: 0, converged: true };
    match p {
        NormKind::One => exact(
            (0..w.ncols()).map(|c| w.column(c).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max),
        ),
        NormKind::Infinity => {
            exact((0..w.nrows()).map(|r| w.row(r).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max))
        }
        NormKind::Two => {
            let n = w.ncols();
            if n == 0 {
                return exact(0.0);
            }
            let wh = w.adjoint();
            let mut v = DVector::from_element(n, C64::new(1.0 / (n as f64).sqrt(), 0.0));
            let mut lambda = 0.0;
            for it in 1..=POWER_ITERATIONS {
                let y = &wh * (&w * &v);
                let next = v.dotc(&y).re;
                let ny = y.norm();
                if ny == 0.0 {
                    return OpNorm { value: 0.0, iterations: it, converged: true };
                }
                v = y / C64::new(ny, 0.0);
                if (next - lambda).abs() <= POWER_TOL * next {
                    return OpNorm { value: next.sqrt(), iterations: it, converged: true };
                }
                lambda = next;
            }
            OpNorm { value: lambda.sqrt(), iterations: POWER_ITERATIONS, converged: false }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualPoint {
    pub rho: f64,
    pub d_hat: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualTrend {
    pub points: Vec<ResidualPoint>,
    /// Scales `|j| ≤ jmax` entering the Gramians.
    pub jmax: i64,
    pub envelope: DecayEnvelope,
    pub strictly_decreasing: bool,
}

/// Envelope constants of the cross-Gramian between the residual atoms of `g^ρ`
/// and the painless dual system at `ρ = 1`, for each `ρ` in `rhos`.
pub fn residual_envelope_trend(
    fs: &FrameSpec,
    rhos: &[f64],
    gamma_t: f64,
    gamma_f_prime: f64,
    time_window: f64,
) -> Result<ResidualTrend> {
    if rhos.is_empty() || rhos.windows(2).any(|w| !(w[1] > w[0])) || rhos[0] < 1.0 {
        return Err(Error::InvalidParameter("rho list must be increasing and start at 1 or above".into()));
    }
    let eps = 0.5;
    let order = crate::bapu::DEFAULT_SMOOTHNESS;
    let grid = *fs.grid();
    let cov = fs.covering();
    let alpha = cov.alpha();
    let base = Box::new(fs.window().shape().clone());
    let residuals: Vec<WindowShape> = rhos
        .iter()
        .map(|&rho| WindowShape::HighPass { base: base.clone(), rho, epsilon: eps, order })
        .collect();
    let nyq = grid.nyquist();
    let limit = 2.0 * nyq / cov.size(0);
    let radii: Vec<f64> = residuals.iter().map(|r| r.spectral_radius(crate::atoms::SPECTRAL_TRUNCATION, limit)).collect();
    let fits = |j: i64| {
        let (p, s) = (cov.position(j), cov.size(j));
        radii.iter().all(|r| p + r * s < nyq) && p + (1.0 + eps) * s < nyq
    };
    let mut jr = -1;
    while jr < cov.jmax() && fits(jr + 1) {
        jr += 1;
    }
    if jr < 0 {
        return Err(Error::InvalidParameter("no scale fits below Nyquist".into()));
    }
    let cov_r = cov.with_jmax(jr)?;
    let bapu = build_bapu(&cov_r, &grid, order)?;
    let reference = painless_dual(fs, &bapu, 1.0, eps)?.dual;
    let envelope = DecayEnvelope::new(
        1.0,
        (1.0 - alpha) * 0.5 * (gamma_f_prime - alpha / (1.0 - alpha) * gamma_t),
        gamma_t / 2.0,
        alpha,
    )?;
    let mut points = Vec::new();
    for (shape, &rho) in residuals.iter().zip(rhos) {
        let sys = AtomSystem::from_shape(grid, &cov_r, shape, fs.a(), -jr..=jr, Lattice::Periodic, None)?;
        let m = gramian(&sys, &reference, time_window)?;
        points.push(ResidualPoint { rho, d_hat: envelope_distance(&m, &envelope) });
    }
    let strictly_decreasing = points.windows(2).all(|w| w[1].d_hat < w[0].d_hat);
    Ok(ResidualTrend { points, jmax: jr, envelope, strictly_decreasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::{FrameOptions, MotherWindow};
    use crate::covering::CoveringSpec;
    use crate::signal::GridSpec;

    fn gauss_frame(alpha: f64) -> FrameSpec {
        let g = GridSpec::new(2048, 1.0 / 64.0).unwrap();
        let w = MotherWindow::new(WindowShape::gaussian(1.0), &g).unwrap();
        FrameSpec::new(w, CoveringSpec::for_grid(alpha, 1.0, &g).unwrap(), 0.36).unwrap()
    }

    fn tags_grid(nj: i64, nk: i64, alpha: f64) -> Vec<AtomTag> {
        let cov = CoveringSpec::new(alpha, 1.0, nj).unwrap();
        let mut out = Vec::new();
        for j in -nj..=nj {
            for k in -nk..=nk {
                out.push(AtomTag { j, k, s: cov.size(j) });
            }
        }
        out
    }

    #[test]
    fn self_gramian_structure() {
        let fs = gauss_frame(0.5);
        let m = gramian(fs.system(), fs.system(), 2.0).unwrap();
        let g2 = fs.window().norm().powi(2);
        for i in 0..m.rows.len() {
            assert!((m.entries[(i, i)].re - g2).abs() <= 1e-10 * g2);
        }
        assert!(m.hermitian_defect() <= 1e-12);
    }

    #[test]
    fn cross_gramian_adjoint() {
        let fs = gauss_frame(0.5);
        let other = fs.system().map_banks(|b| b.gen.iter_mut().for_each(|z| *z *= C64::new(0.5, 0.3)));
        let ab = gramian(fs.system(), &other, 1.0).unwrap();
        let ba = gramian(&other, fs.system(), 1.0).unwrap();
        let d = (&ab.entries - ba.entries.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(d < 1e-14);
    }

    #[test]
    fn fourier_basis_gives_identity() {
        let g = GridSpec::new(64, 0.25).unwrap();
        let sys = AtomSystem::fourier_basis(g);
        let m = gramian(&sys, &sys, 0.0).unwrap();
        let d = (&m.entries - DMatrix::<C64>::identity(64, 64)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(d < 1e-12);
    }

    #[test]
    fn envelope_constants() {
        let t = tags_grid(4, 3, 0.5);
        let env = DecayEnvelope::new(1.0, 2.0, 2.0, 0.5).unwrap();
        let id = GramianMatrix::identity(t.clone());
        assert_eq!(envelope_distance(&id, &env), 1.0);
        let zero = GramianMatrix::new(t.clone(), t.clone(), DMatrix::zeros(t.len(), t.len())).unwrap();
        assert_eq!(envelope_distance(&zero, &env), 0.0);
        let fs = gauss_frame(0.5);
        let m = gramian(fs.system(), fs.system(), 2.0).unwrap();
        let weak = envelope_distance(&m, &DecayEnvelope::new(1.0, 1.0, 1.0, 0.5).unwrap());
        let strong = envelope_distance(&m, &DecayEnvelope::new(1.0, 2.0, 3.0, 0.5).unwrap());
        assert!(weak.is_finite() && strong >= weak);
    }

    #[test]
    fn fit_recovers_envelope() {
        for alpha in [0.0, 0.5] {
            let t = tags_grid(6, 6, alpha);
            let env = DecayEnvelope::new(3.0, 2.5, 1.75, alpha).unwrap();
            let e = DMatrix::from_fn(t.len(), t.len(), |r, c| C64::new(env.value(&t[r], &t[c]), 0.0));
            let m = GramianMatrix::new(t.clone(), t.clone(), e).unwrap();
            let fit = fit_decay_exponents(&m, alpha).unwrap();
            assert!((fit.gamma_hat / 2.5 - 1.0).abs() < 0.01, "{fit:?}");
            assert!((fit.eta_hat / 1.75 - 1.0).abs() < 0.01, "{fit:?}");
            assert!((fit.k_hat / 3.0 - 1.0).abs() < 0.01, "{fit:?}");
        }
        let small = GramianMatrix::identity(tags_grid(2, 2, 0.5));
        assert!(matches!(fit_decay_exponents(&small, 0.5), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn smoother_window_decays_faster_across_scales() {
        let g = GridSpec::new(2048, 1.0 / 64.0).unwrap();
        let cov = CoveringSpec::for_grid(0.5, 1.0, &g).unwrap();
        let fit = |shape: WindowShape| {
            let w = MotherWindow::new(shape, &g).unwrap();
            let opts = FrameOptions { jmax: Some(6), clip_to_grid: true, ..Default::default() };
            let fs = FrameSpec::with_options(w, cov, 0.36, opts).unwrap();
            let m = gramian(fs.system(), fs.system(), 2.0).unwrap();
            fit_decay_exponents(&m, 0.5).unwrap().gamma_hat
        };
        let rough = fit(WindowShape::Matern { order: 2 });
        let smooth = fit(WindowShape::Matern { order: 4 });
        assert!(smooth >= rough, "{rough} {smooth}");
    }

    #[test]
    fn opnorm_basics() {
        let t = tags_grid(4, 2, 0.5);
        let id = GramianMatrix::identity(t.clone());
        for p in [NormKind::One, NormKind::Two, NormKind::Infinity] {
            for s in [0.0, 1.0] {
                assert!((weighted_opnorm(&id, p, s, 0.5).value - 1.0).abs() < 1e-12);
            }
        }
        let d = DMatrix::from_fn(t.len(), t.len(), |r, c| if r == c { C64::new(1.0 / (1.0 + r as f64), 0.2) } else { C64::new(0.0, 0.0) });
        let dmax = d.diagonal().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let dm = GramianMatrix::new(t.clone(), t.clone(), d).unwrap();
        for p in [NormKind::One, NormKind::Two, NormKind::Infinity] {
            assert!((weighted_opnorm(&dm, p, 1.0, 0.5).value - dmax).abs() < 1e-7 * dmax);
        }
    }

    #[test]
    fn opnorm_duality() {
        let fs = gauss_frame(0.5);
        let m = gramian(fs.system(), fs.system(), 1.0).unwrap();
        let one = weighted_opnorm(&m, NormKind::One, 1.0, 0.5).value;
        let inf = weighted_opnorm(&m.adjoint(), NormKind::Infinity, -1.0, 0.5).value;
        assert!((one - inf).abs() <= 1e-10 * one);
    }

    #[test]
    fn residual_trend_for_bump_is_zero() {
        let g = GridSpec::new(2048, 1.0 / 64.0).unwrap();
        let w = MotherWindow::new(WindowShape::spectral_bump(0.5), &g).unwrap();
        let fs = FrameSpec::new(w, CoveringSpec::for_grid(0.5, 1.0, &g).unwrap(), 0.36).unwrap();
        let t = residual_envelope_trend(&fs, &[2.0, 4.0], 3.0, 10.0, 2.0).unwrap();
        assert!(t.points.iter().all(|p| p.d_hat == 0.0));
    }
}
