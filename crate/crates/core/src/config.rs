//! Run configuration: one TOML file with a `[run]` section, sampler
//! sections and one optional section per observable.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chains::GeodesicLimits;
use crate::error::{Error, Result};
use crate::gff::GffOptions;
use crate::loops::explorer::{ExploreMode, ExplorerOptions};
use crate::loops::{LoopMode, LoopOptions, PointLoopLaw, DEFAULT_GLUE_RATE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Gff,
    Loops,
    Both,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Gff => "gff",
            Route::Loops => "loops",
            Route::Both => "both",
        }
    }

    /// The single routes this selection runs, in output order.
    pub fn expand(self) -> Vec<Route> {
        match self {
            Route::Both => vec![Route::Gff, Route::Loops],
            r => vec![r],
        }
    }
}

impl std::str::FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gff" => Ok(Route::Gff),
            "loops" => Ok(Route::Loops),
            "both" => Ok(Route::Both),
            _ => Err(Error::param("route", format!("expected gff, loops or both, got {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub d: usize,
    pub route: Route,
    pub box_radius: u32,
    pub replicas: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    /// Realize every loop in the box.
    Dense,
    /// Reveal only the loops needed for the origin's cluster.
    Explorer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoopsSection {
    pub engine: Engine,
    pub mode: LoopMode,
    pub k_max: usize,
    pub glue_rate: f64,
    pub signed: bool,
    pub point_law: PointLoopLaw,
    /// Explorer budget of processed vertices per replica.
    pub max_sites: usize,
    /// Cutoffs for the truncation sweep; the last entry should be `k_max`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_grid: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_replicas: Option<u64>,
}

impl Default for LoopsSection {
    fn default() -> Self {
        Self {
            engine: Engine::Dense,
            mode: LoopMode::BoxKilled,
            k_max: 32,
            glue_rate: DEFAULT_GLUE_RATE,
            signed: true,
            point_law: PointLoopLaw::default(),
            max_sites: 200_000,
            k_grid: None,
            sweep_replicas: None,
        }
    }
}

impl LoopsSection {
    pub fn loop_options(&self) -> LoopOptions {
        LoopOptions { k_max: self.k_max, mode: self.mode, point_law: self.point_law, glue_rate: self.glue_rate, signed: self.signed }
    }

    pub fn explorer_options(&self) -> Result<ExplorerOptions> {
        let mode = match self.mode {
            LoopMode::Free => ExploreMode::Free,
            LoopMode::BoxKilled => ExploreMode::BoxKilled,
            LoopMode::Torus => return Err(Error::param("loops.mode", "the explorer supports free and box-killed modes")),
        };
        Ok(ExplorerOptions {
            k_max: self.k_max,
            mode,
            point_law: self.point_law,
            glue_rate: self.glue_rate,
            signed: self.signed,
            max_sites: self.max_sites,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pi1Section {
    pub r_grid: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoPointSection {
    pub x_list: Vec<Vec<i64>>,
}

fn default_beta() -> f64 {
    8.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalSection {
    pub r_grid: Vec<u64>,
    #[serde(default = "default_beta")]
    pub beta: f64,
}

fn default_kappa() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChemicalSection {
    /// Individual targets `x` for `E[d(0,x) | 0 ↔ x]`.
    #[serde(default)]
    pub x_list: Vec<Vec<i64>>,
    /// ℓ∞ spheres: the conditional mean over all `x` with `‖x‖∞ = R`.
    #[serde(default)]
    pub shells: Vec<u64>,
    /// Radii for the point-to-boundary distance.
    #[serde(default)]
    pub r_grid: Vec<u64>,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    /// Tail levels `M` in `P(d(0,∂B_r) ≥ M r² | 0 ↔ ∂B_r)`.
    #[serde(default)]
    pub m_grid: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntrinsicSection {
    pub r_grid: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WernerSection {
    pub r: u64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    pub b_grid: Vec<f64>,
}

fn default_instances() -> u64 {
    1000
}

fn default_max_len() -> usize {
    8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainsSection {
    #[serde(default = "default_instances")]
    pub instances: u64,
    #[serde(default = "default_max_len")]
    pub max_len: usize,
    #[serde(default)]
    pub limits: GeodesicLimits,
}

impl Default for ChainsSection {
    fn default() -> Self {
        Self { instances: default_instances(), max_len: default_max_len(), limits: GeodesicLimits::default() }
    }
}

fn default_sample_count() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSection {
    #[serde(default = "default_sample_count")]
    pub count: u64,
    /// Label CSVs are written only for boxes up to this many sites.
    #[serde(default = "default_label_sites")]
    pub max_label_sites: u64,
}

fn default_label_sites() -> u64 {
    100_000
}

impl Default for SampleSection {
    fn default() -> Self {
        Self { count: default_sample_count(), max_label_sites: default_label_sites() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub run: RunSection,
    #[serde(default)]
    pub gff: GffOptions,
    #[serde(default)]
    pub loops: LoopsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi1: Option<Pi1Section>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_point: Option<TwoPointSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local: Option<LocalSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chemical: Option<ChemicalSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intrinsic: Option<IntrinsicSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub werner: Option<WernerSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chains: Option<ChainsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleSection>,
}

fn increasing<T: PartialOrd>(v: &[T]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

impl Config {
    /// A configuration with only the `[run]` section set.
    pub fn new(d: usize, route: Route, box_radius: u32, replicas: u64, seed: u64) -> Self {
        Config {
            run: RunSection { d, route, box_radius, replicas, seed, threads: None },
            gff: GffOptions::default(),
            loops: LoopsSection::default(),
            pi1: None,
            two_point: None,
            local: None,
            chemical: None,
            intrinsic: None,
            werner: None,
            chains: None,
            sample: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::param("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::InvalidParameter { field, reason } if field == "config" => {
                Error::Format { path: path.to_path_buf(), reason }
            }
            e => e,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable in TOML")
    }

    /// Largest ℓ∞ radius an observable may use around the origin. The
    /// free-mode explorer sees every loop meeting its window, so it may use
    /// the whole window; everything else keeps to the inner half.
    pub fn margin_radius(&self, route: Route) -> u64 {
        let r = self.run.box_radius as u64;
        match route {
            Route::Loops if self.loops.engine == Engine::Explorer && self.loops.mode == LoopMode::Free => r,
            _ => r / 2,
        }
    }

    fn check_radius(&self, field: &str, r: u64) -> Result<()> {
        for route in self.run.route.expand() {
            let m = self.margin_radius(route);
            if r > m {
                return Err(Error::param(
                    field,
                    format!("radius {r} exceeds the margin {m} of a box of radius {} ({} route)", self.run.box_radius, route.name()),
                ));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let run = &self.run;
        if run.d == 0 || run.d > crate::walk_oracle::kernel::MAX_DIM {
            return Err(Error::param("run.d", format!("must be in 1..={}", crate::walk_oracle::kernel::MAX_DIM)));
        }
        if run.replicas == 0 {
            return Err(Error::param("run.replicas", "must be positive"));
        }
        if run.box_radius == 0 {
            return Err(Error::param("run.box_radius", "must be positive"));
        }
        if run.threads == Some(0) {
            return Err(Error::param("run.threads", "must be positive"));
        }
        let lp = &self.loops;
        if lp.k_max < 2 {
            return Err(Error::param("loops.k_max", "must be at least 2"));
        }
        if !(lp.glue_rate > 0.0) {
            return Err(Error::param("loops.glue_rate", "must be positive"));
        }
        if lp.max_sites == 0 {
            return Err(Error::param("loops.max_sites", "must be positive"));
        }
        lp.point_law.validate().map_err(|_| Error::param("loops.point_law", "shape and scale must be positive"))?;
        if lp.engine == Engine::Explorer {
            lp.explorer_options()?;
        }
        if let Some(g) = &lp.k_grid {
            if g.is_empty() || !increasing(g) || g[0] < 2 {
                return Err(Error::param("loops.k_grid", "must be strictly increasing with entries at least 2"));
            }
        }
        if lp.sweep_replicas == Some(0) {
            return Err(Error::param("loops.sweep_replicas", "must be positive"));
        }
        let dim = |field: &str, x: &[i64]| -> Result<()> {
            if x.len() != run.d {
                return Err(Error::param(field, format!("point {x:?} does not have {} coordinates", run.d)));
            }
            Ok(())
        };
        if let Some(p) = &self.pi1 {
            if p.r_grid.is_empty() || !increasing(&p.r_grid) {
                return Err(Error::param("pi1.r_grid", "must be nonempty and strictly increasing"));
            }
            self.check_radius("pi1.r_grid", *p.r_grid.last().unwrap())?;
        }
        if let Some(t) = &self.two_point {
            if t.x_list.is_empty() {
                return Err(Error::param("two_point.x_list", "must be nonempty"));
            }
            for x in &t.x_list {
                dim("two_point.x_list", x)?;
                self.check_radius("two_point.x_list", x.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0))?;
            }
        }
        if let Some(l) = &self.local {
            if !(l.beta > 1.0) {
                return Err(Error::param("local.beta", "must exceed 1"));
            }
            if l.beta < 2.0 {
                return Err(Error::param("local.beta", "must be at least 2 so that B(0,2r) lies in B(0,βr)"));
            }
            if l.r_grid.is_empty() || !increasing(&l.r_grid) {
                return Err(Error::param("local.r_grid", "must be nonempty and strictly increasing"));
            }
            self.check_radius("local.beta", (l.beta * *l.r_grid.last().unwrap() as f64).floor() as u64)?;
        }
        if let Some(c) = &self.chemical {
            for x in &c.x_list {
                dim("chemical.x_list", x)?;
                self.check_radius("chemical.x_list", x.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0))?;
            }
            if !increasing(&c.shells) || !increasing(&c.r_grid) {
                return Err(Error::param("chemical", "shells and r_grid must be strictly increasing"));
            }
            if let Some(&s) = c.shells.last() {
                self.check_radius("chemical.shells", s)?;
            }
            if let Some(&r) = c.r_grid.last() {
                self.check_radius("chemical.r_grid", r)?;
            }
            if !(c.kappa > 0.0 && c.kappa <= 1.0) {
                return Err(Error::param("chemical.kappa", "must be in (0, 1]"));
            }
            if c.m_grid.iter().any(|m| !(*m > 0.0)) {
                return Err(Error::param("chemical.m_grid", "levels must be positive"));
            }
            if c.x_list.is_empty() && c.shells.is_empty() && c.r_grid.is_empty() {
                return Err(Error::param("chemical", "needs x_list, shells or r_grid"));
            }
        }
        if let Some(i) = &self.intrinsic {
            if i.r_grid.is_empty() || !increasing(&i.r_grid) {
                return Err(Error::param("intrinsic.r_grid", "must be nonempty and strictly increasing"));
            }
        }
        if let Some(w) = &self.werner {
            if !(w.beta > 1.0) {
                return Err(Error::param("werner.beta", "must exceed 1"));
            }
            if w.b_grid.is_empty() || !increasing(&w.b_grid) || w.b_grid[0] <= 0.0 {
                return Err(Error::param("werner.b_grid", "must be positive and strictly increasing"));
            }
            self.check_radius("werner.beta", (w.beta * w.r as f64).floor() as u64)?;
        }
        if let Some(c) = &self.chains {
            if c.instances == 0 || c.max_len == 0 {
                return Err(Error::param("chains", "instances and max_len must be positive"));
            }
        }
        if let Some(s) = &self.sample {
            if s.count == 0 {
                return Err(Error::param("sample.count", "must be positive"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
[run]
d = 3
route = "both"
box_radius = 6
replicas = 100
seed = 7

[gff]
sweeps = 80

[loops]
engine = "dense"
mode = "box-killed"
k_max = 16
k_grid = [4, 8, 16]

[pi1]
r_grid = [1, 2, 3]

[two_point]
x_list = [[1, 0, 0], [2, 0, 0]]

[chemical]
shells = [1, 2]
m_grid = [0.5]

[werner]
r = 1
beta = 3.0
b_grid = [1.0, 2.0]
"#;

    #[test]
    fn round_trip_is_a_fixed_point() {
        let a = Config::from_toml(FULL).unwrap();
        let text = a.to_toml();
        let b = Config::from_toml(&text).unwrap();
        assert_eq!(a, b);
        assert_eq!(text, b.to_toml());
        assert_eq!(a.gff.sweeps, Some(80));
        assert_eq!(a.chemical.as_ref().unwrap().kappa, 0.5);
    }

    #[test]
    fn field_level_errors() {
        let zero = FULL.replace("replicas = 100", "replicas = 0");
        match Config::from_toml(&zero) {
            Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, "run.replicas"),
            other => panic!("{other:?}"),
        }
        let far = FULL.replace("r_grid = [1, 2, 3]", "r_grid = [1, 2, 4]");
        assert!(matches!(Config::from_toml(&far), Err(Error::InvalidParameter { field, .. }) if field == "pi1.r_grid"));
        let unknown = FULL.replace("seed = 7", "seed = 7\ncolour = 1");
        assert!(Config::from_toml(&unknown).is_err());
        let bad_dim = FULL.replace("[2, 0, 0]", "[2, 0]");
        assert!(Config::from_toml(&bad_dim).is_err());
    }

    #[test]
    fn explorer_free_margin_is_whole_window() {
        let mut c = Config::new(7, Route::Loops, 6, 10, 1);
        c.loops.engine = Engine::Explorer;
        c.loops.mode = LoopMode::Free;
        assert_eq!(c.margin_radius(Route::Loops), 6);
        c.loops.mode = LoopMode::BoxKilled;
        assert_eq!(c.margin_radius(Route::Loops), 3);
        c.loops.mode = LoopMode::Torus;
        assert!(c.validate().is_err());
    }
}
