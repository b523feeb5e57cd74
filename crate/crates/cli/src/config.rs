use std::path::{Path, PathBuf};

use alphaframe::atoms::{MotherWindow, WindowShape};
use alphaframe::covering::CoveringSpec;
use alphaframe::signal::GridSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const DEFAULT_CONFIG: &str = include_str!("../config/default.toml");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    /// `gaussian`, `bump`, `matern` or `boxcar`.
    pub kind: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    pub count: usize,
    pub c: f64,
    /// Every `time_stride`-th time column goes into the spectrogram CSV.
    #[serde(default = "one")]
    pub time_stride: usize,
    pub window: WindowConfig,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub dt: f64,
    pub alpha: f64,
    pub b: f64,
    pub a: f64,
    pub smoothness: usize,
    pub window: WindowConfig,
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub seed: u64,
    /// Size of the random test family.
    pub signals: usize,
    /// Half-width of the frequency band of generated signals.
    pub band: f64,
    pub alpha2: f64,
    pub time_window: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Not part of the hash.
    #[serde(skip_serializing)]
    pub output: PathBuf,
    pub transform: TransformConfig,
}

#[derive(Debug)]
pub enum ConfigError {
    Read(String),
    Parse(String),
    Invalid(Vec<String>),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Read(m) => write!(f, "cannot read config: {m}"),
            ConfigError::Parse(m) => write!(f, "cannot parse config: {m}"),
            ConfigError::Invalid(v) => {
                writeln!(f, "invalid config:")?;
                for m in v {
                    writeln!(f, "  - {m}")?;
                }
                Ok(())
            }
        }
    }
}

fn window_shape(w: &WindowConfig) -> Result<WindowShape, String> {
    let param = |i: usize, default: f64| w.params.get(i).copied().unwrap_or(default);
    let shape = match w.kind.as_str() {
        "gaussian" => WindowShape::Gaussian { width: param(0, 1.0) },
        "bump" => WindowShape::SpectralBump { epsilon: param(0, 0.5), order: param(1, 7.0) as usize },
        "matern" => WindowShape::Matern { order: param(0, 4.0) as u32 },
        "boxcar" => WindowShape::Boxcar { width: param(0, 1.0) },
        other => return Err(format!("window.kind = {other:?} is not one of gaussian, bump, matern, boxcar")),
    };
    shape.validate().map_err(|e| format!("window: {e}"))?;
    Ok(shape)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| ConfigError::Read(format!("{}: {e}", p.display())))?;
                Self::parse(&text)
            }
            None => Self::parse(DEFAULT_CONFIG),
        }
    }

    /// Every violated constraint, checked before any run.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.a > 0.0 && self.a <= 1.0) {
            v.push(format!("a = {} violates the constraint 0<a≤1", self.a));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            v.push(format!("alpha = {} violates 0≤alpha<1", self.alpha));
        }
        if !(self.alpha2 >= self.alpha && self.alpha2 < 1.0) {
            v.push(format!("alpha2 = {} violates alpha≤alpha2<1", self.alpha2));
        }
        if !(self.b > 0.0) {
            v.push(format!("b = {} violates b>0", self.b));
        }
        for (name, x) in [("p", self.p), ("q", self.q)] {
            if !(x >= 1.0) {
                v.push(format!("{name} = {x} violates 1≤{name}≤∞"));
            }
        }
        if !self.s.is_finite() {
            v.push(format!("s = {} must be finite", self.s));
        }
        if self.smoothness == 0 {
            v.push("smoothness must be at least 1".into());
        }
        if self.signals == 0 {
            v.push("signals must be at least 1".into());
        }
        if !(self.band > 0.0) {
            v.push(format!("band = {} must be positive", self.band));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            v.push("solver needs tol > 0 and max_iter ≥ 1".into());
        }
        if !(self.time_window >= 0.0) {
            v.push(format!("time_window = {} must be nonnegative", self.time_window));
        }
        let t = &self.transform;
        if t.count < 2 || !(t.omega_max > t.omega_min) || !(t.c > 0.0) || t.time_stride == 0 {
            v.push("transform needs count ≥ 2, omega_max > omega_min, c > 0 and time_stride ≥ 1".into());
        }
        for (name, w) in [("window", &self.window), ("transform.window", &t.window)] {
            if let Err(e) = window_shape(w) {
                v.push(format!("{name}: {e}"));
            }
        }
        match GridSpec::new(self.n, self.dt) {
            Err(e) => v.push(format!("grid: {e}")),
            Ok(grid) => {
                if v.is_empty() {
                    if let Err(e) = CoveringSpec::for_grid(self.alpha, self.b, &grid) {
                        v.push(format!("covering: {e}"));
                    }
                    if self.band >= grid.nyquist() {
                        v.push(format!("band = {} must stay below Nyquist {}", self.band, grid.nyquist()));
                    }
                }
            }
        }
        v
    }

    pub fn validated(self) -> Result<Self, ConfigError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(ConfigError::Invalid(v))
        }
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec::new(self.n, self.dt).expect("validated grid")
    }

    pub fn covering(&self) -> CoveringSpec {
        CoveringSpec::for_grid(self.alpha, self.b, &self.grid()).expect("validated covering")
    }

    pub fn window_shape(&self) -> WindowShape {
        window_shape(&self.window).expect("validated window")
    }

    pub fn transform_shape(&self) -> WindowShape {
        window_shape(&self.transform.window).expect("validated window")
    }

    pub fn mother_window(&self) -> alphaframe::Result<MotherWindow> {
        MotherWindow::new(self.window_shape(), &self.grid())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serialises");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        let c = ExperimentConfig::load(None).unwrap();
        assert!(c.violations().is_empty(), "{:?}", c.violations());
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn all_violations_listed() {
        let mut c = ExperimentConfig::load(None).unwrap();
        c.a = 1.5;
        c.b = -1.0;
        c.window.kind = "triangle".into();
        let v = c.violations();
        assert!(v.iter().any(|m| m.contains("0<a≤1")));
        assert!(v.iter().any(|m| m.contains("b>0")));
        assert!(v.iter().any(|m| m.contains("triangle")));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = format!("{DEFAULT_CONFIG}\nbogus = 3\n");
        assert!(matches!(ExperimentConfig::parse(&text), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn infinite_exponent_parses() {
        let text = DEFAULT_CONFIG.replace("p = 2.0", "p = inf");
        let c = ExperimentConfig::parse(&text).unwrap();
        assert!(c.p.is_infinite() && c.violations().is_empty());
    }

    #[test]
    fn hash_tracks_content() {
        let c = ExperimentConfig::load(None).unwrap();
        let mut d = c.clone();
        d.seed += 1;
        assert_ne!(c.hash(), d.hash());
        let mut e = c.clone();
        e.output = "elsewhere".into();
        assert_eq!(c.hash(), e.hash());
        assert_eq!(c.hash(), c.clone().hash());
    }
}
