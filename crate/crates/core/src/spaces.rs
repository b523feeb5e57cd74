//! Discrete α-modulation norms: segmentation norms, weighted coefficient
//! norms, and the ratios between them.

use serde::{Deserialize, Serialize};

use crate::atoms::CoefficientArray;
use crate::bapu::{band_spill, build_bapu, segment, Bapu, DEFAULT_SMOOTHNESS};
use crate::covering::{weight, CoveringSpec};
use crate::error::{Error, Result};
use crate::signal::SampledSignal;

/// Spill above which a norm is flagged as truncated.
pub const SPILL_FLAG: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub alpha: f64,
}

impl SpaceParams {
    pub fn new(p: f64, q: f64, s: f64, alpha: f64) -> Result<Self> {
        if !(p >= 1.0) || !(q >= 1.0) {
            return Err(Error::InvalidParameter(format!("p = {p}, q = {q} must be at least 1")));
        }
        if !(0.0..1.0).contains(&alpha) || !s.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in [0, 1)")));
        }
        Ok(SpaceParams { p, q, s, alpha })
    }

    pub fn with_s(&self, s: f64) -> Self {
        SpaceParams { s, ..*self }
    }
}

/// `‖x‖_p` of a finite sequence; `p = ∞` gives the largest entry.
pub fn seq_norm(xs: impl IntoIterator<Item = f64>, p: f64) -> f64 {
    if p.is_infinite() {
        xs.into_iter().fold(0.0, f64::max)
    } else {
        xs.into_iter().map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Riemann-sum `L^p` norm.
pub fn lp_norm(f: &SampledSignal, p: f64) -> f64 {
    let mags = f.samples().iter().map(|z| z.norm());
    if p.is_infinite() {
        seq_norm(mags, p)
    } else {
        seq_norm(mags, p) * f.grid().dt().powf(1.0 / p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentationNorm {
    pub value: f64,
    /// `(j, ‖𝒫_j f‖_p)`.
    pub profile: Vec<(i64, f64)>,
    pub spill: f64,
    pub spill_flag: bool,
}

/// `(Σ_j ‖𝒫_j f‖_p^q (1+|p_j|)^{sq})^{1/q}`.
pub fn segmentation_norm(f: &SampledSignal, params: &SpaceParams, bapu: &Bapu) -> Result<SegmentationNorm> {
    let cov = bapu.spec();
    if (cov.alpha() - params.alpha).abs() > 1e-12 {
        return Err(Error::InvalidParameter("partition and parameters use different alpha".into()));
    }
    let mut profile = Vec::new();
    for j in cov.indices() {
        profile.push((j, lp_norm(&segment(bapu, f, j)?, params.p)));
    }
    let value = seq_norm(profile.iter().map(|&(j, v)| v * (1.0 + cov.position(j).abs()).powf(params.s)), params.q);
    let spill = band_spill(bapu, f)?;
    Ok(SegmentationNorm { value, profile, spill, spill_flag: spill > SPILL_FLAG })
}

/// Mixed norm: `ℓ^p` over `k`, then `ℓ^q` over `j` weighted by `m_{s,α}(j)`.
pub fn coefficient_norm(c: &CoefficientArray, params: &SpaceParams) -> f64 {
    let blocks = (0..c.layout.len()).map(|b| {
        let j = c.layout[b].0;
        seq_norm(c.bank(b).iter().map(|z| z.norm()), params.p) * weight(params.alpha, j, params.s)
    });
    seq_norm(blocks, params.q)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub ratios: Vec<f64>,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub skipped: usize,
}

impl RatioReport {
    pub fn from_ratios(ratios: Vec<f64>, skipped: usize) -> Result<Self> {
        if ratios.is_empty() {
            return Err(Error::InsufficientData("no usable test signals".into()));
        }
        let ratio_min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let ratio_max = ratios.iter().cloned().fold(0.0, f64::max);
        Ok(RatioReport { ratios, ratio_min, ratio_max, skipped })
    }

    pub fn spread(&self) -> f64 {
        self.ratio_max / self.ratio_min
    }
}

/// Ratios of `coefficient_norm(dual(f); p, p, s)` to the segmentation norm of
/// `M_p^{s+α(1/p-1/2), α}` for each nonzero test signal.
pub fn equivalence_ratio(
    dual: impl Fn(&SampledSignal) -> Result<CoefficientArray>,
    params: &SpaceParams,
    bapu: &Bapu,
    signals: &[SampledSignal],
) -> Result<RatioReport> {
    if params.p != params.q {
        return Err(Error::InvalidParameter("norm equivalence is stated for q = p".into()));
    }
    let inv_p = if params.p.is_infinite() { 0.0 } else { 1.0 / params.p };
    let shifted = params.with_s(params.s + params.alpha * (inv_p - 0.5));
    let mut ratios = Vec::new();
    let mut skipped = 0;
    for f in signals {
        let seg = segmentation_norm(f, &shifted, bapu)?.value;
        if seg == 0.0 {
            skipped += 1;
            continue;
        }
        ratios.push(coefficient_norm(&dual(f)?, params) / seg);
    }
    RatioReport::from_ratios(ratios, skipped)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub forward_c: f64,
    pub backward_c: f64,
    /// `s + (α₂-α₁)/q`.
    pub s_forward: f64,
    /// `s - (1-1/q)(α₂-α₁)`.
    pub s_backward: f64,
    pub forward_ratios: Vec<f64>,
    pub backward_ratios: Vec<f64>,
    pub max_spill: f64,
}

/// Constants of `M^{s+(α₂-α₁)/q, α₂} ⊂ M^{s, α₁}` and `M^{s, α₁} ⊂ M^{s-(1-1/q)(α₂-α₁), α₂}`
/// measured over `signals`.
#[allow(clippy::too_many_arguments)]
pub fn embedding_check(
    signals: &[SampledSignal],
    p: f64,
    q: f64,
    s: f64,
    alpha1: f64,
    alpha2: f64,
    b: f64,
) -> Result<EmbeddingReport> {
    if !(alpha1 <= alpha2) {
        return Err(Error::InvalidParameter("embedding needs alpha1 <= alpha2".into()));
    }
    let grid = *signals.first().ok_or(Error::InsufficientData("no test signals".into()))?.grid();
    let b1 = build_bapu(&CoveringSpec::for_grid(alpha1, b, &grid)?, &grid, DEFAULT_SMOOTHNESS)?;
    let b2 = build_bapu(&CoveringSpec::for_grid(alpha2, b, &grid)?, &grid, DEFAULT_SMOOTHNESS)?;
    let inv_q = if q.is_infinite() { 0.0 } else { 1.0 / q };
    let da = alpha2 - alpha1;
    let s_forward = s + da * inv_q;
    let s_backward = s - (1.0 - inv_q) * da;
    let m1 = SpaceParams::new(p, q, s, alpha1)?;
    let m2f = SpaceParams::new(p, q, s_forward, alpha2)?;
    let m2b = SpaceParams::new(p, q, s_backward, alpha2)?;
    let mut forward_ratios = Vec::new();
    let mut backward_ratios = Vec::new();
    let mut max_spill = 0.0f64;
    for f in signals {
        let n1 = segmentation_norm(f, &m1, &b1)?;
        let nf = segmentation_norm(f, &m2f, &b2)?;
        let nb = segmentation_norm(f, &m2b, &b2)?;
        max_spill = max_spill.max(n1.spill).max(nf.spill);
        if n1.value == 0.0 {
            continue;
        }
        forward_ratios.push(n1.value / nf.value);
        backward_ratios.push(nb.value / n1.value);
    }
    let forward_c = forward_ratios.iter().cloned().fold(0.0, f64::max);
    let backward_c = backward_ratios.iter().cloned().fold(0.0, f64::max);
    Ok(EmbeddingReport { forward_c, backward_c, s_forward, s_backward, forward_ratios, backward_ratios, max_spill })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{inner_product, make_test_signal, GridSpec, TestSignal};
    use crate::C64;

    fn grid() -> GridSpec {
        GridSpec::new(2048, 1.0 / 64.0).unwrap()
    }

    fn random(seed: u64, lo: f64, hi: f64) -> SampledSignal {
        make_test_signal(
            grid(),
            &TestSignal::RandomBandlimited {
                band_lo: lo,
                band_hi: hi,
                time_center: 0.0,
                time_halfwidth: 3.0,
                packets: 8,
                packet_width: 1.0,
                seed,
            },
        )
        .unwrap()
    }

    #[test]
    fn lp_basics() {
        let g = grid();
        let mut v = vec![C64::new(0.0, 0.0); g.n()];
        v[100] = C64::new(3.0, 4.0);
        let pulse = SampledSignal::new(g, v).unwrap();
        assert!((lp_norm(&pulse, 1.0) - 5.0 * g.dt()).abs() < 1e-15);
        assert_eq!(lp_norm(&pulse, f64::INFINITY), 5.0);
        let f = random(1, -5.0, 5.0);
        assert!((lp_norm(&f, 2.0) - inner_product(&f, &f).unwrap().re.sqrt()).abs() < 1e-12);
        let c = C64::new(-1.5, 2.0);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert!((lp_norm(&f.scale(c), p) - c.norm() * lp_norm(&f, p)).abs() < 1e-12 * lp_norm(&f, p).max(1.0));
        }
    }

    #[test]
    fn segmentation_single_window() {
        let g = grid();
        let cov = CoveringSpec::for_grid(0.5, 1.0, &g).unwrap();
        let bapu = build_bapu(&cov, &g, 7).unwrap();
        let params = SpaceParams::new(2.0, 2.0, 1.0, 0.5).unwrap();
        assert_eq!(segmentation_norm(&SampledSignal::zeros(g), &params, &bapu).unwrap().value, 0.0);
        let j0 = 4;
        let iv = cov.interval(j0);
        let x = 0.5 * (iv.left + iv.right);
        let f = make_test_signal(
            g,
            &TestSignal::Gaussian { sigma: 2.0, center: 0.0, freq: x, amplitude: 1.0 },
        )
        .unwrap();
        let got = segmentation_norm(&f, &params, &bapu).unwrap();
        let want = lp_norm(&f, 2.0) * (1.0 + cov.position(j0).abs());
        assert!((got.value - want).abs() <= 1e-9 * want, "{} {}", got.value, want);
    }

    #[test]
    fn uniform_case_is_near_plancherel() {
        let g = grid();
        let cov = CoveringSpec::for_grid(0.0, 1.0, &g).unwrap();
        let bapu = build_bapu(&cov, &g, 7).unwrap();
        let params = SpaceParams::new(2.0, 2.0, 0.0, 0.0).unwrap();
        for seed in 0..10 {
            let f = random(seed, -10.0, 10.0);
            let r = segmentation_norm(&f, &params, &bapu).unwrap().value / lp_norm(&f, 2.0);
            assert!((0.5..=2.0).contains(&r), "{r}");
        }
    }

    #[test]
    fn segmentation_is_a_norm() {
        let g = grid();
        let cov = CoveringSpec::for_grid(0.5, 1.0, &g).unwrap();
        let bapu = build_bapu(&cov, &g, 7).unwrap();
        for (p, q) in [(1.0, 1.0), (2.0, 2.0), (f64::INFINITY, 2.0), (2.0, f64::INFINITY)] {
            let params = SpaceParams::new(p, q, 0.5, 0.5).unwrap();
            let n = |f: &SampledSignal| segmentation_norm(f, &params, &bapu).unwrap().value;
            let (f, h) = (random(3, -12.0, 12.0), random(4, -12.0, 12.0));
            assert!(n(&f.add(&h).unwrap()) <= n(&f) + n(&h) + 1e-10);
            let c = C64::new(0.3, -2.0);
            assert!((n(&f.scale(c)) - c.norm() * n(&f)).abs() <= 1e-10 * n(&f));
        }
    }

    #[test]
    fn segmentation_monotone_in_s() {
        let g = grid();
        let cov = CoveringSpec::for_grid(0.5, 1.0, &g).unwrap();
        let bapu = build_bapu(&cov, &g, 7).unwrap();
        let f = random(9, 4.0, 14.0);
        let mut last = 0.0;
        for s in [-1.0, 0.0, 0.5, 1.0, 2.0] {
            let v = segmentation_norm(&f, &SpaceParams::new(2.0, 2.0, s, 0.5).unwrap(), &bapu).unwrap().value;
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn coefficient_norm_cases() {
        let mut c = CoefficientArray::zeros(vec![(-2, 3), (0, 3), (2, 3)]);
        let i = c.position(2, -1).unwrap();
        c.values[i] = C64::new(0.0, 2.0);
        for (s, alpha) in [(0.0, 0.5), (1.0, 0.5), (1.0, 0.0), (2.0, 0.75)] {
            let params = SpaceParams::new(1.5, 3.0, s, alpha).unwrap();
            let want = 2.0 * weight(alpha, 2, s);
            assert!((coefficient_norm(&c, &params) - want).abs() < 1e-13 * want);
        }
        assert!((weight(0.0, 5, 1.5) - 6f64.powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn weight_is_moderate() {
        for alpha in [0.0, 0.25, 0.5, 0.75] {
            for s in [0.0, 1.0, 2.5] {
                for j in -20..=20 {
                    for k in -10..=10i64 {
                        let lhs = weight(alpha, j + k, s);
                        let rhs = (1.0 + k.abs() as f64).powf(s / (1.0 - alpha)) * weight(alpha, j, s);
                        assert!(lhs <= rhs * (1.0 + 1e-12));
                    }
                }
            }
        }
    }

    #[test]
    fn embedding_same_alpha_is_one() {
        let sigs: Vec<_> = (0..4).map(|i| random(i, -10.0, 10.0)).collect();
        let r = embedding_check(&sigs, 2.0, 2.0, 1.0, 0.5, 0.5, 1.0).unwrap();
        assert!((r.forward_c - 1.0).abs() < 1e-12 && (r.backward_c - 1.0).abs() < 1e-12);
    }
}
