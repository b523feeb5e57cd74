use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use alphaframe::atoms::{atom, CoefficientArray, FrameSpec};
use alphaframe::bapu::{build_bapu, verify_bapu, Bapu};
use alphaframe::covering::{verify_admissible, verify_ps_properties};
use alphaframe::frame::{estimate_frame_bounds, reconstruct, SolverOptions, TestClass};
use alphaframe::gramian::{fit_decay_exponents, gramian};
use alphaframe::signal::{make_test_signal, read_binary, read_csv, write_csv, SampledSignal, TestSignal};
use alphaframe::spaces::{coefficient_norm, embedding_check, equivalence_ratio, segmentation_norm, SpaceParams};
use alphaframe::transform::{alpha_transform, mixed_norm, sobolev_norm, TransformGrid};
use alphaframe::verify::{self, EMBEDDING_MAX, EQUIVALENCE_SPREAD, EXPONENT_SLACK, FRAME_RATIO_MAX};
use alphaframe::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;

/// Time half-width of generated test signals.
const SIGNAL_HALFWIDTH: f64 = 4.0;
const BOUND_TRIALS: usize = 32;

#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidGrid(_)
            | Error::GridMismatch
            | Error::InvalidParameter(_)
            | Error::IndexOutOfRange { .. }
            | Error::Io(_)
            | Error::Format(_) => Failure::Validation(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Validation(format!("i/o: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Validation(format!("csv: {e}"))
    }
}

pub type Outcome = Result<bool, Failure>;

pub struct Context {
    pub cfg: ExperimentConfig,
    pub hash: String,
}

impl Context {
    pub fn new(cfg: ExperimentConfig) -> Self {
        let hash = cfg.hash();
        Context { cfg, hash }
    }

    fn path(&self, name: &str) -> Result<PathBuf, Failure> {
        std::fs::create_dir_all(&self.cfg.output)?;
        Ok(self.cfg.output.join(name))
    }

    fn report(&self, name: &str, command: &str, passed: bool, body: impl Serialize) -> Result<(), Failure> {
        let mut v = json!({ "command": command, "config_hash": self.hash, "passed": passed });
        if let Value::Object(extra) = serde_json::to_value(body).map_err(|e| Failure::Numerical(e.to_string()))? {
            v.as_object_mut().expect("object").extend(extra);
        }
        let path = self.path(name)?;
        let text = serde_json::to_string_pretty(&v).map_err(|e| Failure::Numerical(e.to_string()))?;
        std::fs::write(&path, text + "\n")?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn csv(&self, name: &str) -> Result<csv::Writer<File>, Failure> {
        let path = self.path(name)?;
        println!("wrote {}", path.display());
        Ok(csv::Writer::from_path(path)?)
    }

    fn write_signal(&self, name: &str, f: &SampledSignal) -> Result<(), Failure> {
        let path = self.path(name)?;
        write_csv(f, BufWriter::new(File::create(&path)?))?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn frame(&self) -> Result<FrameSpec, Failure> {
        Ok(FrameSpec::new(self.cfg.mother_window()?, self.cfg.covering(), self.cfg.a)?)
    }

    fn bapu(&self) -> Result<Bapu, Failure> {
        Ok(build_bapu(&self.cfg.covering(), &self.cfg.grid(), self.cfg.smoothness)?)
    }

    fn params(&self, p: f64, q: f64) -> Result<SpaceParams, Failure> {
        Ok(SpaceParams::new(p, q, self.cfg.s, self.cfg.alpha)?)
    }

    fn solver(&self) -> SolverOptions {
        SolverOptions { tol: self.cfg.tol, max_iter: self.cfg.max_iter, warm_start: None }
    }

    /// The input file, or the seeded random family from the config.
    fn signals(&self, input: Option<&Path>) -> Result<Vec<SampledSignal>, Failure> {
        let grid = self.cfg.grid();
        if let Some(path) = input {
            let file = File::open(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
            let f = match path.extension().and_then(|e| e.to_str()) {
                Some("bin") => read_binary(BufReader::new(file))?,
                _ => read_csv(BufReader::new(file))?,
            };
            if !f.grid().same_as(&grid) {
                return Err(Failure::Validation(format!(
                    "{} has n = {}, dt = {} but the config grid is n = {}, dt = {}",
                    path.display(),
                    f.grid().n(),
                    f.grid().dt(),
                    grid.n(),
                    grid.dt()
                )));
            }
            return Ok(vec![f]);
        }
        (0..self.cfg.signals as u64)
            .map(|i| {
                let kind = TestSignal::RandomBandlimited {
                    band_lo: -self.cfg.band,
                    band_hi: self.cfg.band,
                    time_center: 0.0,
                    time_halfwidth: SIGNAL_HALFWIDTH,
                    packets: 12,
                    packet_width: 1.0,
                    seed: self.cfg.seed.wrapping_mul(7919).wrapping_add(i),
                };
                make_test_signal(grid, &kind).map_err(Failure::from)
            })
            .collect()
    }
}

fn write_coefficients(ctx: &Context, name: &str, c: &CoefficientArray) -> Result<(), Failure> {
    let mut w = ctx.csv(name)?;
    w.write_record(["j", "k", "re", "im"])?;
    for (j, k, z) in c.entries() {
        w.serialize((j, k, z.re, z.im))?;
    }
    w.flush()?;
    Ok(())
}

pub fn covering(ctx: &Context) -> Outcome {
    let cov = ctx.cfg.covering();
    let mut w = ctx.csv("covering.csv")?;
    w.write_record(["j", "p", "s", "left", "right"])?;
    for iv in cov.intervals() {
        w.serialize((iv.j, cov.position(iv.j), cov.size(iv.j), iv.left, iv.right))?;
    }
    w.flush()?;
    let adm = verify_admissible(&cov, &ctx.cfg.grid().freqs());
    let ps = verify_ps_properties(&cov)?;
    let passed = adm.pass() && ps.pass();
    ctx.report("covering.json", "covering", passed, json!({ "admissibility": adm, "ps": ps }))?;
    Ok(passed)
}

pub fn bapu_check(ctx: &Context, windows: bool) -> Outcome {
    let b = ctx.bapu()?;
    let rep = verify_bapu(&b);
    if windows {
        let grid = ctx.cfg.grid();
        let mut w = ctx.csv("bapu_windows.csv")?;
        w.write_record(["j", "xi", "value"])?;
        for j in b.spec().indices() {
            let win = b.window(j);
            for i in b.support(j) {
                w.serialize((j, grid.freq(i), win[i]))?;
            }
        }
        w.flush()?;
    }
    let passed = rep.pass();
    ctx.report("bapu.json", "bapu-check", passed, json!({ "report": rep }))?;
    Ok(passed)
}

pub fn atoms(ctx: &Context, j: i64, k: i64) -> Outcome {
    let fs = ctx.frame()?;
    let g = atom(&fs, j, k)?;
    ctx.write_signal(&format!("atom_{j}_{k}.csv"), &g)?;
    let cov = fs.covering();
    let body = json!({
        "j": j,
        "k": k,
        "position": cov.position(j),
        "size": cov.size(j),
        "kmax": fs.kmax(j),
        "norm": g.norm(),
    });
    ctx.report(&format!("atom_{j}_{k}.json"), "atoms", true, body)?;
    Ok(true)
}

pub fn analyze(ctx: &Context, input: Option<&Path>) -> Outcome {
    let f = ctx.signals(input)?.swap_remove(0);
    let fs = ctx.frame()?;
    let c = fs.system().analyze(&f)?;
    write_coefficients(ctx, "coefficients.csv", &c)?;
    let bounds = estimate_frame_bounds(fs.system(), &TestClass::for_frame(&fs), BOUND_TRIALS, ctx.cfg.seed)?;
    let params = ctx.params(ctx.cfg.p, ctx.cfg.q)?;
    let passed = !bounds.degenerate && bounds.a_est > 0.0 && bounds.ratio() <= FRAME_RATIO_MAX;
    let body = json!({
        "atoms": fs.system().len(),
        "jmax": fs.jmax(),
        "bounds": bounds,
        "bound_ratio": bounds.ratio(),
        "coefficient_norm": coefficient_norm(&c, &params),
        "signal_norm": f.norm(),
    });
    ctx.report("analyze.json", "analyze", passed, body)?;
    Ok(passed)
}

pub fn reconstruct_cmd(ctx: &Context, input: Option<&Path>) -> Outcome {
    let f = ctx.signals(input)?.swap_remove(0);
    let fs = ctx.frame()?;
    let r = reconstruct(fs.system(), &f, &ctx.solver())?;
    write_coefficients(ctx, "dual_coefficients.csv", &r.coefficients)?;
    ctx.write_signal("reconstruction.csv", &r.f_hat)?;
    let passed = r.converged;
    let body = json!({
        "relative_error": r.relative_error,
        "iterations": r.iterations,
        "converged": r.converged,
        "tol": ctx.cfg.tol,
    });
    ctx.report("reconstruct.json", "reconstruct", passed, body)?;
    Ok(passed)
}

pub fn gramian_cmd(ctx: &Context) -> Outcome {
    let fs = ctx.frame()?;
    let m = gramian(fs.system(), fs.system(), ctx.cfg.time_window)?;
    let mut w = ctx.csv("gramian.csv")?;
    w.write_record(["row_j", "row_k", "col_j", "col_k", "magnitude"])?;
    for (ri, r) in m.rows.iter().enumerate() {
        for (ci, c) in m.cols.iter().enumerate() {
            w.serialize((r.j, r.k, c.j, c.k, m.entries[(ri, ci)].norm()))?;
        }
    }
    w.flush()?;
    let fit = fit_decay_exponents(&m, ctx.cfg.alpha)?;
    let win = fs.window();
    let predicted = 0.5 * (win.gamma_f - win.gamma_t);
    let exponent_ok = !predicted.is_finite() || fit.freq_exponent >= predicted - EXPONENT_SLACK;
    let passed = exponent_ok && fit.k_hat.is_finite();
    let body = json!({
        "fit": fit,
        "predicted_freq_exponent": predicted.is_finite().then_some(predicted),
        "window_gamma_t": win.gamma_t.is_finite().then_some(win.gamma_t),
        "window_gamma_f": win.gamma_f.is_finite().then_some(win.gamma_f),
        "hermitian_defect": m.hermitian_defect(),
        "size": m.rows.len(),
    });
    ctx.report("gramian.json", "gramian", passed, body)?;
    Ok(passed)
}

pub fn norms(ctx: &Context, input: Option<&Path>) -> Outcome {
    let signals = ctx.signals(input)?;
    let bapu = ctx.bapu()?;
    let fs = ctx.frame()?;
    let params = ctx.params(ctx.cfg.p, ctx.cfg.q)?;
    let mut w = ctx.csv("norm_profiles.csv")?;
    w.write_record(["signal", "j", "block_norm"])?;
    let mut rows = Vec::new();
    for (i, f) in signals.iter().enumerate() {
        let seg = segmentation_norm(f, &params, &bapu)?;
        for &(j, v) in &seg.profile {
            w.serialize((i, j, v))?;
        }
        let coef = coefficient_norm(&fs.system().analyze(f)?, &params);
        rows.push(json!({
            "signal": i,
            "segmentation_norm": seg.value,
            "coefficient_norm": coef,
            "spill": seg.spill,
            "spill_flag": seg.spill_flag,
        }));
    }
    w.flush()?;
    ctx.report("norms.json", "norms", true, json!({ "params": params, "signals": rows }))?;
    Ok(true)
}

pub fn equivalence(ctx: &Context) -> Outcome {
    let signals = ctx.signals(None)?;
    let bapu = ctx.bapu()?;
    let fs = ctx.frame()?;
    // Equivalence is stated on the diagonal q = p.
    let params = ctx.params(ctx.cfg.p, ctx.cfg.p)?;
    let r = equivalence_ratio(|f| fs.system().analyze(f), &params, &bapu, &signals)?;
    let mut w = ctx.csv("equivalence.csv")?;
    w.write_record(["signal", "ratio"])?;
    for (i, x) in r.ratios.iter().enumerate() {
        w.serialize((i, x))?;
    }
    w.flush()?;
    let passed = r.spread() <= EQUIVALENCE_SPREAD;
    let body = json!({ "params": params, "spread": r.spread(), "report": r });
    ctx.report("equivalence.json", "equivalence", passed, body)?;
    Ok(passed)
}

pub fn embedding(ctx: &Context) -> Outcome {
    let signals = ctx.signals(None)?;
    let c = &ctx.cfg;
    let r = embedding_check(&signals, c.p, c.q, c.s, c.alpha, c.alpha2, c.b)?;
    let passed = r.forward_c <= EMBEDDING_MAX && r.backward_c <= EMBEDDING_MAX;
    let body = json!({ "alpha1": c.alpha, "alpha2": c.alpha2, "report": r });
    ctx.report("embedding.json", "embedding", passed, body)?;
    Ok(passed)
}

pub fn transform(ctx: &Context, input: Option<&Path>) -> Outcome {
    let f = ctx.signals(input)?.swap_remove(0);
    let t = &ctx.cfg.transform;
    let tg = TransformGrid::uniform(t.omega_min, t.omega_max, t.count, t.c)?;
    let v = alpha_transform(&f, &ctx.cfg.transform_shape(), ctx.cfg.alpha, &tg)?;
    let mut w = ctx.csv("spectrogram.csv")?;
    let stride = t.time_stride;
    let mut header = vec!["omega".to_string()];
    header.extend(ctx.cfg.grid().times().iter().step_by(stride).map(|x| x.to_string()));
    w.write_record(&header)?;
    for (omega, row) in v.omegas.iter().zip(v.power()) {
        let mut rec = vec![omega.to_string()];
        rec.extend(row.iter().step_by(stride).map(|x| x.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    let c = &ctx.cfg;
    let body = json!({
        "mixed_norm": mixed_norm(&v, c.p, c.q, c.s),
        "sobolev_norm": sobolev_norm(&f, c.s),
        "l2_mixed_norm": mixed_norm(&v, 2.0, 2.0, c.s),
        "p": c.p,
        "q": c.q,
        "s": c.s,
    });
    ctx.report("transform.json", "transform", true, body)?;
    Ok(true)
}

pub fn verify_all(ctx: &Context, criteria: &[u32]) -> Outcome {
    let ids: Vec<u32> = if criteria.is_empty() { verify::CRITERIA.iter().map(|c| c.0).collect() } else { criteria.to_vec() };
    let mut outcomes = Vec::new();
    for id in ids {
        let o = verify::run_criterion(id, ctx.cfg.seed);
        println!("{}", o.line());
        outcomes.push(o);
    }
    let passed = outcomes.iter().all(|o| o.passed);
    ctx.report("verify.json", "verify-all", passed, json!({ "seed": ctx.cfg.seed, "criteria": outcomes }))?;
    Ok(passed)
}
