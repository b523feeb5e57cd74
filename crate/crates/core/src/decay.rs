//! Polynomial tail-decay fits on sampled magnitudes.

use crate::covering::slope;

/// Fitted exponent `γ` of `|f(x)| ≲ (1+|x|)^{-γ}` on the upper envelope of `mags`.
///
/// The envelope at `x` is the largest magnitude at any `|x'| ≥ |x|`. Points are
/// kept where the envelope lies between `hi_rel` and `lo_rel` times the peak and
/// `|x| ≤ x_cap`. Returns `None` when fewer than four points qualify, which
/// happens for functions that drop from the plateau to zero abruptly or decay
/// too fast for the sampling to resolve.
pub fn fit_tail_exponent(xs: &[f64], mags: &[f64], hi_rel: f64, lo_rel: f64, x_cap: f64) -> Option<f64> {
    let peak = mags.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return None;
    }
    let mut order: Vec<usize> = (0..xs.len()).filter(|&i| xs[i].abs() <= x_cap).collect();
    order.sort_by(|&a, &b| xs[b].abs().total_cmp(&xs[a].abs()));
    let mut env = 0.0f64;
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for i in order {
        env = env.max(mags[i]);
        if env <= hi_rel * peak && env >= lo_rel * peak && env > 0.0 {
            lx.push((1.0 + xs[i].abs()).ln());
            ly.push(env.ln());
        }
    }
    if lx.len() < 4 {
        return None;
    }
    Some(-slope(&lx, &ly))
}
