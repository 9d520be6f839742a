use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::curves::{ellipse, from_laurent, LaurentMap, ParamCurve, C64};
use crate::error::{Error, Result};
use crate::reconstruct::{CoefficientVariant, MAX_ORDER};

/// Outer boundary: an ellipse centered at the origin or the image of the
/// unit circle under a Laurent map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum OuterSpec {
    Ellipse { semi_major: f64, semi_minor: f64 },
    /// Coefficients `a_1, a_0, a_{-1}, …` as `[re, im]` pairs.
    Laurent { coefficients: Vec<[f64; 2]> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CavitySpec {
    // empty struct variants, so that stray keys are rejected
    None {},
    /// The nine-coefficient map used throughout the examples.
    Benchmark {},
    Laurent { coefficients: Vec<[f64; 2]> },
}

/// Grids for `sweep`. A missing list falls back to the single value of the
/// run configuration; an empty list yields an empty sweep.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub centers: Option<Vec<[f64; 2]>>,
    pub noise_levels: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub outer: OuterSpec,
    pub cavity: CavitySpec,
    /// Quadrature nodes per curve.
    pub nodes: usize,
    pub order: usize,
    /// Center `r` of the shifted polynomials, physical coordinates.
    pub center: [f64; 2],
    pub noise: f64,
    pub seeds: Vec<u64>,
    pub variant: CoefficientVariant,
    pub out: PathBuf,
    /// Number of samples in the curve CSV and the overlay.
    pub curve_samples: usize,
    pub sweep: SweepSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            outer: OuterSpec::Ellipse { semi_major: 1.9, semi_minor: 1.1 },
            cavity: CavitySpec::Benchmark {},
            nodes: 256,
            order: 8,
            center: [-0.5, 0.0],
            noise: 0.0,
            seeds: (0..20).collect(),
            variant: CoefficientVariant::Corrected,
            out: PathBuf::from("out"),
            curve_samples: 256,
            sweep: SweepSpec::default(),
        }
    }
}

fn map_from_pairs(pairs: &[[f64; 2]]) -> Result<LaurentMap> {
    let coeffs: Vec<C64> = pairs.iter().map(|p| C64::new(p[0], p[1])).collect();
    LaurentMap::from_coefficients(&coeffs)
}

impl RunConfig {
    /// Reads a TOML document; absent keys take their defaults.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Checks every field against the preconditions of the stage it feeds.
    pub fn validate(&self) -> Result<()> {
        let cfg = |msg: String| Err(Error::Config(msg));
        if self.nodes < 16 || !self.nodes.is_multiple_of(2) {
            return cfg(format!("nodes must be even and at least 16, got {}", self.nodes));
        }
        if !(2..=MAX_ORDER).contains(&self.order) {
            return cfg(format!("order must be in 2..={MAX_ORDER}, got {}", self.order));
        }
        if !self.center.iter().all(|c| c.is_finite()) {
            return cfg(format!("center must be finite, got {:?}", self.center));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return cfg(format!("noise must be a finite number >= 0, got {}", self.noise));
        }
        if self.curve_samples < 8 {
            return cfg(format!("curve_samples must be at least 8, got {}", self.curve_samples));
        }
        if let Some(levels) = &self.sweep.noise_levels {
            if levels.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
                return cfg(format!("sweep noise levels must be >= 0, got {levels:?}"));
            }
        }
        if let Some(centers) = &self.sweep.centers {
            if centers.iter().flatten().any(|c| !c.is_finite()) {
                return cfg("sweep centers must be finite".into());
            }
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.seeds.len() {
            return cfg(format!("seeds must be distinct, got {:?}", self.seeds));
        }
        if self.noise > 0.0 && self.seeds.is_empty() {
            return cfg("noisy runs need at least one seed".into());
        }
        self.outer_curve().map_err(|e| Error::Config(format!("outer boundary: {e}")))?;
        self.cavity_curve().map_err(|e| Error::Config(format!("cavity: {e}")))?;
        Ok(())
    }

    pub fn center(&self) -> C64 {
        C64::new(self.center[0], self.center[1])
    }

    pub fn outer_curve(&self) -> Result<ParamCurve> {
        match &self.outer {
            OuterSpec::Ellipse { semi_major, semi_minor } => ellipse(*semi_major, *semi_minor, self.nodes),
            OuterSpec::Laurent { coefficients } => from_laurent(&map_from_pairs(coefficients)?, self.nodes),
        }
    }

    /// The true cavity map, when the configuration knows one.
    pub fn cavity_map(&self) -> Result<Option<LaurentMap>> {
        Ok(match &self.cavity {
            CavitySpec::None {} => None,
            CavitySpec::Benchmark {} => Some(LaurentMap::benchmark_cavity()),
            CavitySpec::Laurent { coefficients } => Some(map_from_pairs(coefficients)?),
        })
    }

    pub fn cavity_curve(&self) -> Result<Option<ParamCurve>> {
        self.cavity_map()?.map(|m| from_laurent(&m, self.nodes)).transpose()
    }

    /// Hex SHA-256 of the canonical JSON form of the effective configuration,
    /// leaving out the output directory.
    pub fn hash(&self) -> String {
        let identity = RunConfig { out: PathBuf::new(), ..self.clone() };
        let json = serde_json::to_string(&identity).expect("configuration serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Parses `RE,IM`.
pub fn parse_center(s: &str) -> Result<[f64; 2]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || Error::Config(format!("center must be RE,IM, got {s:?}"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let re = parts[0].parse().map_err(|_| bad())?;
    let im = parts[1].parse().map_err(|_| bad())?;
    Ok([re, im])
}

/// Parses a comma-separated seed list; `a..b` entries expand to the
/// half-open range.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = |item: &str| Error::Config(format!("bad seed {item:?} in {s:?}"));
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad(item))?;
            let b: u64 = b.trim().parse().map_err(|_| bad(item))?;
            out.extend(a..b);
        } else {
            out.push(item.parse().map_err(|_| bad(item))?);
        }
    }
    Ok(out)
}
