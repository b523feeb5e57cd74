//! Frame operator, frame-bound estimates, canonical and painless duals.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::atoms::{map_indexed, AtomSystem, CoefficientArray, FrameSpec, Lattice, ScaleBank, WindowShape};
use crate::bapu::{segment, Bapu};
use crate::error::{Error, Result};
use crate::signal::{forward_spectrum, inner_product, signal_from_values, GridSpec, SampledSignal};

/// Safety factor applied to the alias-free lattice bound of the painless construction.
pub const PAINLESS_SAFETY: f64 = 0.9;

/// `S f = Σ ⟨f, g_n⟩ g_n`.
pub fn frame_operator_apply(sys: &AtomSystem, f: &SampledSignal) -> Result<SampledSignal> {
    sys.synthesize(&sys.analyze(f)?)
}

/// Span of Gaussian wave packets on an undersampled time-frequency lattice.
///
/// The lattice density is below one, so the packets form a Riesz sequence and
/// their Gram matrix is well conditioned.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestClass {
    pub time_halfwidth: f64,
    pub band: (f64, f64),
    pub packet_width: f64,
}

impl TestClass {
    /// Packets centred in `|t| ≤ 3` and in the band up to the top atom centre.
    pub fn for_frame(fs: &FrameSpec) -> Self {
        let top = fs.covering().position(fs.jmax());
        TestClass { time_halfwidth: 3.0, band: (-top, top), packet_width: 1.0 }
    }

    pub fn lattice(&self) -> Vec<(f64, f64)> {
        let dt = 1.25 * self.packet_width;
        let df = 1.25 / self.packet_width;
        let nt = (self.time_halfwidth / dt).floor() as i64;
        let f0 = (self.band.0 / df).ceil() as i64;
        let f1 = (self.band.1 / df).floor() as i64;
        let mut out = Vec::new();
        for a in -nt..=nt {
            for b in f0..=f1 {
                out.push((a as f64 * dt, b as f64 * df));
            }
        }
        out
    }

    pub fn basis(&self, grid: &GridSpec) -> Vec<SampledSignal> {
        let w = self.packet_width;
        self.lattice()
            .into_iter()
            .map(|(tc, xi)| {
                SampledSignal::from_fn(*grid, |t| C64::from_polar((-PI * ((t - tc) / w).powi(2)).exp(), 2.0 * PI * xi * t))
            })
            .collect()
    }

    /// A random unit-norm member of the class.
    pub fn random_function(&self, grid: &GridSpec, rng: &mut impl Rng) -> SampledSignal {
        let basis = self.basis(grid);
        let mut acc = vec![C64::new(0.0, 0.0); grid.n()];
        for b in &basis {
            let c = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            for (a, x) in acc.iter_mut().zip(b.samples()) {
                *a += c * x;
            }
        }
        let f = SampledSignal::new(*grid, acc).expect("grid-sized");
        let n = f.norm();
        f.scale(C64::new(1.0 / n, 0.0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub a_est: f64,
    pub b_est: f64,
    pub ritz_min: f64,
    pub ritz_max: f64,
    pub power_b: f64,
    pub quotient_min: f64,
    pub quotient_max: f64,
    pub trials: usize,
    pub class_dim: usize,
    /// The class basis Gram matrix was numerically singular; `a_est` is then 0.
    pub degenerate: bool,
}

impl FrameBounds {
    pub fn ratio(&self) -> f64 {
        self.b_est / self.a_est
    }
}

fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Frame-bound estimates on `class`.
///
/// `a_est` and part of `b_est` are the extreme Ritz values of `S` on the class,
/// from the generalised eigenproblem `M v = λ G v`. `b_est` also takes a global
/// power iteration into account. `trials` random class members supply sample
/// Rayleigh quotients.
pub fn estimate_frame_bounds(sys: &AtomSystem, class: &TestClass, trials: usize, seed: u64) -> Result<FrameBounds> {
    let grid = *sys.grid();
    let basis = class.basis(&grid);
    let m = basis.len();
    if m == 0 {
        return Err(Error::InsufficientData("empty test class".into()));
    }
    let coeffs: Vec<Vec<C64>> = basis.iter().map(|b| sys.analyze(b).map(|c| c.values)).collect::<Result<_>>()?;
    let gram = DMatrix::from_fn(m, m, |a, b| inner_product(&basis[b], &basis[a]).unwrap());
    let rows = map_indexed(m, |a| (0..m).map(|b| crate::signal::dot(&coeffs[b], &coeffs[a])).collect::<Vec<_>>());
    let mm = DMatrix::from_fn(m, m, |a, b| rows[a][b]);
    let gram = hermitian_part(&gram);
    let mm = hermitian_part(&mm);

    let (ritz_min, ritz_max, degenerate) = match gram.clone().cholesky() {
        Some(ch) => {
            let l = ch.l();
            let x = l.solve_lower_triangular(&mm).ok_or(Error::InsufficientData("triangular solve".into()))?;
            let y = l
                .solve_lower_triangular(&x.adjoint())
                .ok_or(Error::InsufficientData("triangular solve".into()))?;
            let eig = SymmetricEigen::new(hermitian_part(&y)).eigenvalues;
            let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (lo.max(0.0), hi, false)
        }
        None => (0.0, f64::NAN, true),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut qmin = f64::INFINITY;
    let mut qmax = 0.0f64;
    for _ in 0..trials {
        let v: nalgebra::DVector<C64> =
            nalgebra::DVector::from_fn(m, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let num = (v.adjoint() * &mm * &v)[(0, 0)].re;
        let den = (v.adjoint() * &gram * &v)[(0, 0)].re;
        let q = num / den;
        qmin = qmin.min(q);
        qmax = qmax.max(q);
    }

    let mut f = class.random_function(&grid, &mut rng);
    let mut power_b = 0.0;
    for _ in 0..30 {
        let sf = frame_operator_apply(sys, &f)?;
        power_b = inner_product(&sf, &f)?.re / inner_product(&f, &f)?.re;
        let n = sf.norm();
        if n == 0.0 {
            break;
        }
        f = sf.scale(C64::new(1.0 / n, 0.0));
    }

    let b_est = if degenerate { power_b.max(qmax) } else { power_b.max(ritz_max) };
    Ok(FrameBounds {
        a_est: if degenerate { 0.0 } else { ritz_min },
        b_est,
        ritz_min,
        ritz_max,
        power_b,
        quotient_min: qmin,
        quotient_max: qmax,
        trials,
        class_dim: m,
        degenerate,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Start from `f / B` instead of zero.
    pub warm_start: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-9, max_iter: 500, warm_start: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualSolution {
    pub u: SampledSignal,
    pub iterations: usize,
    /// `‖S u - f‖ / ‖f‖`.
    pub residual: f64,
    pub converged: bool,
}

fn axpy(y: &mut [C64], a: C64, x: &[C64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += a * x);
}

/// Relative level below which the diagonal preconditioner treats a bin as outside the frame's reach.
pub const REACH_FLOOR: f64 = 1e-10;

/// `D(ξ) = Σ_j (2k_max+1)/T·|Ĝ_j(ξ)|²`, the time-averaged diagonal of `S` in frequency.
pub fn frequency_diagonal(sys: &AtomSystem) -> Vec<f64> {
    let grid = sys.grid();
    let mut d = vec![0.0; grid.n()];
    for b in sys.banks() {
        let w = b.len() as f64 / grid.period();
        for (l, g) in b.gen.iter().enumerate() {
            d[b.start + l] += w * g.norm_sqr();
        }
    }
    d
}

fn solve(sys: &AtomSystem, f: &SampledSignal, opts: &SolverOptions) -> Result<DualSolution> {
    let grid = *f.grid();
    if sys.grid() != &grid {
        return Err(Error::GridMismatch);
    }
    let fnorm = f.norm();
    if fnorm == 0.0 {
        return Ok(DualSolution { u: f.clone(), iterations: 0, residual: 0.0, converged: true });
    }
    let apply = |v: &[C64]| -> Result<Vec<C64>> {
        Ok(frame_operator_apply(sys, &SampledSignal::new(grid, v.to_vec())?)?.into_samples())
    };
    let d = frequency_diagonal(sys);
    let dmax = d.iter().cloned().fold(0.0, f64::max);
    let inv: Vec<f64> = d.iter().map(|&x| if x > REACH_FLOOR * dmax { 1.0 / x } else { 0.0 }).collect();
    let precond = |v: &[C64]| -> Result<Vec<C64>> {
        let vals = forward_spectrum(&SampledSignal::new(grid, v.to_vec())?).values();
        Ok(signal_from_values(grid, vals.iter().zip(&inv).map(|(z, w)| z * w).collect()).into_samples())
    };
    let ip = |a: &[C64], b: &[C64]| crate::signal::dot(a, b).re;

    let mut x = match opts.warm_start {
        Some(b) => f.samples().iter().map(|z| z / b).collect(),
        None => vec![C64::new(0.0, 0.0); grid.n()],
    };
    let mut r: Vec<C64> = if opts.warm_start.is_some() {
        let sx = apply(&x)?;
        f.samples().iter().zip(&sx).map(|(a, b)| a - b).collect()
    } else {
        f.samples().to_vec()
    };
    let target = opts.tol * opts.tol * ip(f.samples(), f.samples());
    let mut z = precond(&r)?;
    let mut rz = ip(&r, &z);
    let mut p = z.clone();
    let mut it = 0;
    while ip(&r, &r) > target && it < opts.max_iter && rz > 0.0 {
        let sp = apply(&p)?;
        let alpha = rz / ip(&p, &sp);
        axpy(&mut x, C64::new(alpha, 0.0), &p);
        axpy(&mut r, C64::new(-alpha, 0.0), &sp);
        z = precond(&r)?;
        let rz_new = ip(&r, &z);
        let beta = rz_new / rz;
        p.iter_mut().zip(&z).for_each(|(p, z)| *p = z + *p * beta);
        rz = rz_new;
        it += 1;
    }
    let u = SampledSignal::new(grid, x)?;
    let res = frame_operator_apply(sys, &u)?.sub(f)?.norm() / fnorm;
    Ok(DualSolution { u, iterations: it, residual: res, converged: res <= opts.tol * 10.0 })
}

/// `u = S⁻¹ f` by conjugate gradients, preconditioned with [`frequency_diagonal`].
pub fn dual_apply(sys: &AtomSystem, f: &SampledSignal, opts: &SolverOptions) -> Result<DualSolution> {
    let sol = solve(sys, f, opts)?;
    if !sol.converged {
        return Err(Error::NotConverged { iterations: sol.iterations, residual: sol.residual });
    }
    Ok(sol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub f_hat: SampledSignal,
    /// Canonical dual coefficients `⟨f, S⁻¹g_n⟩`.
    pub coefficients: CoefficientArray,
    pub relative_error: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `f̂ = Σ ⟨f, S⁻¹g_n⟩ g_n`. A stalled solve is reported, not raised.
pub fn reconstruct(sys: &AtomSystem, f: &SampledSignal, opts: &SolverOptions) -> Result<Reconstruction> {
    let sol = solve(sys, f, opts)?;
    let coefficients = sys.analyze(&sol.u)?;
    let f_hat = sys.synthesize(&coefficients)?;
    let relative_error = f_hat.relative_error(f)?;
    Ok(Reconstruction { f_hat, coefficients, relative_error, iterations: sol.iterations, converged: sol.converged })
}

/// Lattice parameter used for the painless construction at `(ρ, ε)`.
pub fn painless_rate(rho: f64, epsilon: f64) -> f64 {
    PAINLESS_SAFETY / (1.0 + rho * (1.0 + epsilon))
}

/// Primal atoms from the band-limited window `g_ρ` and dual atoms
/// `ψ_j·M_{p_j}D_{1/s_j}T_{ak} g̃` with `𝓕g̃ = a·χ/conj(𝓕g)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PainlessSystem {
    pub primal: AtomSystem,
    pub dual: AtomSystem,
    pub a: f64,
    pub rho: f64,
    pub epsilon: f64,
}

pub fn painless_dual(fs: &FrameSpec, bapu: &Bapu, rho: f64, epsilon: f64) -> Result<PainlessSystem> {
    if !(rho >= 1.0) || !(epsilon > 0.0) {
        return Err(Error::InvalidParameter("painless construction needs rho >= 1 and epsilon > 0".into()));
    }
    let cov = bapu.spec();
    if cov.alpha() != fs.covering().alpha() || cov.b() != fs.covering().b() {
        return Err(Error::InvalidParameter("partition and frame use different coverings".into()));
    }
    let a = fs.a();
    let bound = 1.0 / (1.0 + rho * (1.0 + epsilon));
    if a > bound {
        return Err(Error::InvalidParameter(format!("a = {a} exceeds the alias-free bound {bound:.6}")));
    }
    let base = fs.window().shape().clone();
    let lim = 1.0 + epsilon / 2.0;
    let peak = (0..=4000).map(|i| base.spectrum(-lim + i as f64 * lim / 2000.0).norm()).fold(0.0, f64::max);
    for i in 0..=4000 {
        let u = -lim + i as f64 * lim / 2000.0;
        if base.spectrum(u).norm() <= 1e-12 * peak {
            return Err(Error::VanishingSpectrum { at: u });
        }
    }
    let order = crate::bapu::DEFAULT_SMOOTHNESS;
    let low = WindowShape::LowPass { base: Box::new(base.clone()), rho, epsilon, order };
    let dual = WindowShape::PainlessDual { base: Box::new(base), epsilon, order, scale: a };
    let grid = *fs.grid();
    let js = cov.indices();
    let primal = AtomSystem::from_shape(grid, cov, &low, a, js.clone(), Lattice::Periodic, None)?;
    let mut dual = AtomSystem::from_shape(grid, cov, &dual, a, js, Lattice::Periodic, Some(bapu))?;
    dual = dual.map_banks(|b| {
        let c = b.tau * b.s / a;
        b.gen.iter_mut().for_each(|z| *z *= c);
    });
    Ok(PainlessSystem { primal, dual, a, rho, epsilon })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    /// `(j, ‖Σ_k ⟨f, dual_{j,k}⟩ g_{j,k} - 𝒫_j f‖ / ‖f‖)`.
    pub per_scale: Vec<(i64, f64)>,
    pub max_scale_error: f64,
    /// Relative error of the full expansion.
    pub total_error: f64,
}

impl PainlessSystem {
    pub fn analyze(&self, f: &SampledSignal) -> Result<CoefficientArray> {
        self.dual.analyze(f)
    }

    pub fn synthesize(&self, c: &CoefficientArray) -> Result<SampledSignal> {
        self.primal.synthesize(c)
    }

    pub fn expansion_report(&self, bapu: &Bapu, f: &SampledSignal) -> Result<ExpansionReport> {
        let grid = *self.primal.grid();
        let values = forward_spectrum(f).values();
        let fnorm = f.norm();
        let pieces: Vec<Result<(i64, f64)>> = map_indexed(self.dual.banks().len(), |i| {
            let (d, p): (&ScaleBank, &ScaleBank) = (&self.dual.banks()[i], &self.primal.banks()[i]);
            let c = d.analyze(&grid, &values);
            let band = p.synthesize(&grid, &c);
            let mut full = vec![C64::new(0.0, 0.0); grid.n()];
            full[p.start..p.start + band.len()].copy_from_slice(&band);
            let got = signal_from_values(grid, full);
            Ok((d.j, got.sub(&segment(bapu, f, d.j)?)?.norm() / fnorm))
        });
        let per_scale = pieces.into_iter().collect::<Result<Vec<_>>>()?;
        let max_scale_error = per_scale.iter().map(|x| x.1).fold(0.0, f64::max);
        let total_error = self.synthesize(&self.analyze(f)?)?.relative_error(f)?;
        Ok(ExpansionReport { per_scale, max_scale_error, total_error })
    }
}

/// Tight frame with atoms `M_{p_j}T_{kτ_j}` of `√(τ_j ψ_j)`; its frame operator is the identity
/// on signals supported in the covered band.
pub fn tight_painless(bapu: &Bapu, a: f64, lattice: Lattice) -> Result<AtomSystem> {
    let cov = bapu.spec();
    let grid = *bapu.grid();
    let mut banks = Vec::new();
    for j in cov.indices() {
        let supp = bapu.support(j);
        let s = cov.size(j);
        let width = supp.len() as f64 * grid.df();
        let (tau, kmax) = lattice.step(&grid, s, a);
        if tau * width > 1.0 {
            return Err(Error::InvalidParameter(format!("a = {a} too large for the support of psi_{j}")));
        }
        let w = bapu.window(j);
        let gen = supp.clone().map(|k| C64::new((tau * w[k]).sqrt(), 0.0)).collect();
        banks.push(ScaleBank { j, p: cov.position(j), s, tau, kmax, start: supp.start, gen });
    }
    AtomSystem::from_banks(grid, banks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::MotherWindow;
    use crate::bapu::build_bapu;
    use crate::covering::CoveringSpec;
    use crate::signal::{make_test_signal, TestSignal};

    fn grid() -> GridSpec {
        GridSpec::new(2048, 1.0 / 64.0).unwrap()
    }

    fn gauss_frame(a: f64) -> FrameSpec {
        let g = grid();
        let w = MotherWindow::new(WindowShape::gaussian(1.0), &g).unwrap();
        FrameSpec::new(w, CoveringSpec::for_grid(0.5, 1.0, &g).unwrap(), a).unwrap()
    }

    fn sample(seed: u64, band: f64) -> SampledSignal {
        make_test_signal(
            grid(),
            &TestSignal::RandomBandlimited {
                band_lo: -band,
                band_hi: band,
                time_center: 0.0,
                time_halfwidth: 3.0,
                packets: 12,
                packet_width: 1.0,
                seed,
            },
        )
        .unwrap()
    }

    #[test]
    fn adjointness() {
        let fs = gauss_frame(0.36);
        let sys = fs.system();
        let f = sample(1, 12.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut c = CoefficientArray::zeros(sys.layout());
        c.values.iter_mut().for_each(|z| *z = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let lhs = sys.analyze(&f).unwrap().pairing(&c).unwrap();
        let rhs = inner_product(&f, &sys.synthesize(&c).unwrap()).unwrap();
        assert!((lhs - rhs).norm() <= 1e-10 * f.norm() * c.norm(), "{lhs} {rhs}");
    }

    #[test]
    fn analysis_matches_inner_products() {
        let fs = gauss_frame(0.36);
        let f = sample(3, 10.0);
        let c = fs.system().analyze(&f).unwrap();
        for (j, k) in [(0, 0), (2, 5), (-5, -40)] {
            let at = fs.system().atom(j, k).unwrap();
            let direct = inner_product(&f, &at).unwrap();
            assert!((c.get(j, k).unwrap() - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn fourier_basis_bounds() {
        let sys = AtomSystem::fourier_basis(grid());
        let class = TestClass { time_halfwidth: 2.0, band: (-5.0, 5.0), packet_width: 1.0 };
        let b = estimate_frame_bounds(&sys, &class, 32, 7).unwrap();
        assert!((b.a_est - 1.0).abs() < 1e-10 && (b.b_est - 1.0).abs() < 1e-10, "{b:?}");
        let b = estimate_frame_bounds(&sys.duplicated(), &class, 32, 7).unwrap();
        assert!((b.a_est - 2.0).abs() < 1e-10 && (b.b_est - 2.0).abs() < 1e-10, "{b:?}");
        let f = sample(4, 8.0);
        let sol = dual_apply(&sys, &f, &SolverOptions::default()).unwrap();
        assert_eq!(sol.iterations, 1);
        assert!(sol.u.max_abs_diff(&f).unwrap() < 1e-12);
    }

    #[test]
    fn gaussian_frame_bounds() {
        let fs = gauss_frame(0.36);
        let b = estimate_frame_bounds(fs.system(), &TestClass::for_frame(&fs), 32, 1).unwrap();
        assert!(!b.degenerate && b.a_est > 0.0 && b.ratio() <= 100.0, "{b:?}");
        assert!(b.quotient_min >= b.a_est - 1e-9 && b.quotient_max <= b.b_est + 1e-9);
    }

    #[test]
    fn reconstruction_and_stall() {
        let g = GridSpec::new(4096, 1.0 / 128.0).unwrap();
        let w = MotherWindow::new(WindowShape::gaussian(1.0), &g).unwrap();
        let fs = FrameSpec::new(w, CoveringSpec::for_grid(0.5, 1.0, &g).unwrap(), 0.36).unwrap();
        let f = make_test_signal(
            g,
            &TestSignal::RandomBandlimited {
                band_lo: -15.0,
                band_hi: 15.0,
                time_center: 0.0,
                time_halfwidth: 4.0,
                packets: 12,
                packet_width: 1.0,
                seed: 5,
            },
        )
        .unwrap();
        let r = reconstruct(fs.system(), &f, &SolverOptions::default()).unwrap();
        assert!(r.converged && r.relative_error <= 1e-8, "{} {}", r.relative_error, r.iterations);
        let opts = SolverOptions { max_iter: 1, ..Default::default() };
        assert!(matches!(dual_apply(fs.system(), &f, &opts), Err(Error::NotConverged { .. })));
        let r = reconstruct(fs.system(), &f, &opts).unwrap();
        assert!(!r.converged);
    }

    #[test]
    fn tight_painless_is_identity() {
        let g = grid();
        let cov = CoveringSpec::for_grid(0.5, 1.0, &g).unwrap();
        let bapu = build_bapu(&cov, &g, 7).unwrap();
        let sys = tight_painless(&bapu, 0.4, Lattice::Periodic).unwrap();
        let f = sample(6, 15.0);
        let sf = frame_operator_apply(&sys, &f).unwrap();
        assert!(sf.relative_error(&f).unwrap() < 1e-9, "{}", sf.relative_error(&f).unwrap());
        assert!(tight_painless(&bapu, 0.9, Lattice::Periodic).is_err());
    }

    #[test]
    fn painless_per_scale_expansion() {
        let g = grid();
        let fs = gauss_frame(painless_rate(1.0, 0.5));
        let bapu = build_bapu(fs.covering(), &g, 7).unwrap();
        let ps = painless_dual(&fs, &bapu, 1.0, 0.5).unwrap();
        let f = sample(8, 15.0);
        let rep = ps.expansion_report(&bapu, &f).unwrap();
        assert!(rep.max_scale_error <= 1e-8, "{rep:?}");
        assert!(rep.total_error <= 1e-8);
        let too_coarse = gauss_frame(0.5);
        assert!(painless_dual(&too_coarse, &bapu, 1.0, 0.5).is_err());
    }
}
