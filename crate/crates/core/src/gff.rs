//! The discrete GFF on a box with zero boundary values, and its cable-graph
//! sign clusters through independent Brownian-bridge edge openings.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::cluster::{ClusterMap, Coverage, Margin};
use crate::error::{Error, Result};
use crate::lattice::{BoxSpec, OUTSIDE};
use crate::rng::{keyed_uniform, stream, Domain};
use crate::walk_oracle::BoxPrecision;

/// How a field was sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum SampleMethod {
    /// `φ = L^{−T} z` with `I − P_B = L Lᵀ`.
    Exact,
    /// Red–black heat-bath sweeps started from zero.
    HeatBath { sweeps: u32 },
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GffOptions {
    /// Boxes up to this many vertices use the exact sampler.
    pub exact_max_sites: u64,
    /// Bytes the per-replica state may use.
    pub memory_budget: u64,
    /// Target contraction of the heat-bath chain's slowest mode.
    pub heat_bath_tol: f64,
    pub min_sweeps: u32,
    /// Overrides the computed sweep count.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweeps: Option<u32>,
    /// Force the heat-bath sampler even for small boxes.
    pub force_heat_bath: bool,
}

impl Default for GffOptions {
    fn default() -> Self {
        Self {
            exact_max_sites: 20_000,
            memory_budget: 1 << 30,
            heat_bath_tol: 1e-6,
            min_sweeps: 64,
            sweeps: None,
            force_heat_bath: false,
        }
    }
}

/// Bytes per site a replica needs: field, edge bits and cluster bookkeeping.
pub const BYTES_PER_SITE: u64 = 24;

/// Heat-bath sweeps so that the slowest mode, which contracts by `λ_max²`
/// per red–black sweep with `λ_max = cos(π/(2r+2))` the top eigenvalue of
/// `P_B`, decays below `tol`.
pub fn heat_bath_sweeps(bx: &BoxSpec, tol: f64, min_sweeps: u32) -> u32 {
    let lambda = (std::f64::consts::PI / (2.0 * bx.radius() as f64 + 2.0)).cos();
    let rho = lambda * lambda;
    if rho <= 0.0 {
        return min_sweeps;
    }
    let n = (tol.ln() / (2.0 * rho.ln())).ceil();
    (n as u32).max(min_sweeps)
}

#[derive(Clone, Debug)]
pub struct Field {
    pub bx: BoxSpec,
    pub phi: Vec<f64>,
    pub seed: u64,
    pub replica: u64,
    pub method: SampleMethod,
}

/// Samples fields on one box; the Cholesky factor is built once and shared
/// by all replicas.
#[derive(Debug)]
pub struct DgffSampler {
    bx: BoxSpec,
    exact: Option<BoxPrecision>,
    sweeps: u32,
}

impl DgffSampler {
    pub fn new(bx: &BoxSpec, opts: &GffOptions) -> Result<Self> {
        let required = bx.len().saturating_mul(BYTES_PER_SITE);
        if required > opts.memory_budget {
            return Err(Error::MemoryBudget { required, budget: opts.memory_budget });
        }
        let exact = if !opts.force_heat_bath && bx.len() <= opts.exact_max_sites {
            Some(BoxPrecision::new(bx)?)
        } else {
            None
        };
        let sweeps = opts.sweeps.unwrap_or_else(|| heat_bath_sweeps(bx, opts.heat_bath_tol, opts.min_sweeps));
        Ok(Self { bx: bx.clone(), exact, sweeps })
    }

    pub fn box_spec(&self) -> &BoxSpec {
        &self.bx
    }

    pub fn method(&self) -> SampleMethod {
        match self.exact {
            Some(_) => SampleMethod::Exact,
            None => SampleMethod::HeatBath { sweeps: self.sweeps },
        }
    }

    pub fn sample(&self, seed: u64, replica: u64) -> Field {
        let n = self.bx.len() as usize;
        let mut rng = stream(seed, replica, Domain::Field, &[]);
        let phi = match &self.exact {
            Some(prec) => {
                let mut z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                prec.factor().backward(&mut z);
                z
            }
            None => {
                let mut phi = vec![0.0; n];
                heat_bath(&self.bx, &mut phi, self.sweeps, &mut rng);
                phi
            }
        };
        Field { bx: self.bx.clone(), phi, seed, replica, method: self.method() }
    }
}

/// `φ_x ← (1/2d) Σ_{y∼x} φ_y + N(0,1)`, even sites then odd sites, each in
/// index order; neighbors outside the box are held at zero.
fn heat_bath(bx: &BoxSpec, phi: &mut [f64], sweeps: u32, rng: &mut impl Rng) {
    let d = bx.d();
    let inv = 1.0 / (2 * d) as f64;
    let n = bx.len();
    let parity: Vec<bool> = (0..n)
        .map(|i| (0..d).map(|a| bx.axis_offset(i, a)).sum::<u64>() % 2 == 0)
        .collect();
    for _ in 0..sweeps {
        for color in [true, false] {
            for i in 0..n {
                if parity[i as usize] != color {
                    continue;
                }
                let mut s = 0.0;
                for dir in 0..2 * d {
                    let j = bx.neighbor(i, dir);
                    if j != OUTSIDE {
                        s += phi[j as usize];
                    }
                }
                let z: f64 = rng.sample(StandardNormal);
                phi[i as usize] = s * inv + z;
            }
        }
    }
}

pub fn sample_dgff(bx: &BoxSpec, seed: u64, replica: u64, opts: &GffOptions) -> Result<Field> {
    Ok(DgffSampler::new(bx, opts)?.sample(seed, replica))
}

/// Edge `(site, axis)` joins `site` and `site + stride[axis]`.
#[derive(Clone, Debug)]
pub struct CableConfig {
    pub field: Field,
    open: Vec<u64>,
}

/// Probability that a Brownian bridge of duration `d` and variance rate 2
/// from `a` to `b` avoids zero.
#[inline]
pub fn edge_open_prob(a: f64, b: f64, d: usize) -> f64 {
    let ab = a * b;
    if ab <= 0.0 {
        0.0
    } else {
        -(-ab / d as f64).exp_m1()
    }
}

impl CableConfig {
    pub fn d(&self) -> usize {
        self.field.bx.d()
    }

    #[inline]
    pub fn is_open(&self, site: u64, axis: usize) -> bool {
        let k = site as usize * self.d() + axis;
        self.open[k / 64] >> (k % 64) & 1 == 1
    }

    pub fn sign(&self, site: u64) -> i8 {
        let v = self.field.phi[site as usize];
        if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        }
    }

    /// Open edges as `(x, y)` index pairs with `x < y`.
    pub fn open_edges(&self) -> Vec<(u64, u64)> {
        let bx = &self.field.bx;
        let mut out = Vec::new();
        for i in 0..bx.len() {
            for axis in 0..bx.d() {
                if self.is_open(i, axis) {
                    out.push((i, bx.neighbor(i, 2 * axis + 1)));
                }
            }
        }
        out
    }

    /// Edge-list text: a header line, then one `x -- y` line per open edge
    /// with comma-separated coordinates.
    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        let bx = &self.field.bx;
        let mut out = String::new();
        out.push_str(&format!(
            "# cable-config v1 d={} radius={} seed={} replica={}\n",
            bx.d(),
            bx.radius(),
            self.field.seed,
            self.field.replica
        ));
        let fmt = |v: &crate::lattice::Vertex| v.0.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
        for (a, b) in self.open_edges() {
            out.push_str(&format!("{} -- {}\n", fmt(&bx.vertex(a)), fmt(&bx.vertex(b))));
        }
        fs::write(path, out)?;
        Ok(())
    }
}

/// Opens each edge `{x,y}` with `φ_x φ_y > 0` independently with probability
/// `1 − exp(−φ_x φ_y / d)`. Every edge consumes its own keyed uniform, so
/// configurations from different fields with the same seed are coupled.
pub fn open_edges(field: &Field, seed: u64) -> CableConfig {
    let bx = &field.bx;
    let d = bx.d();
    let n = bx.len() as usize;
    let mut open = vec![0u64; (n * d).div_ceil(64)];
    for i in 0..bx.len() {
        let a = field.phi[i as usize];
        for axis in 0..d {
            let j = bx.neighbor(i, 2 * axis + 1);
            if j == OUTSIDE {
                continue;
            }
            let p = edge_open_prob(a, field.phi[j as usize], d);
            if p > 0.0 && keyed_uniform(seed, field.replica, Domain::EdgeOpen, &[i, axis as u64]) < p {
                let k = i as usize * d + axis;
                open[k / 64] |= 1 << (k % 64);
            }
        }
    }
    CableConfig { field: field.clone(), open }
}

/// Clusters of `{φ > 0}` joined through open edges.
pub fn positive_clusters(config: &CableConfig) -> ClusterMap {
    let bx = &config.field.bx;
    let sites: Vec<u64> = (0..bx.len()).filter(|&i| config.field.phi[i as usize] > 0.0).collect();
    let edges = config.open_edges();
    ClusterMap::from_edges(bx.clone(), Coverage::Full, Margin::HalfRadius, sites, &edges)
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct BridgeEstimate {
    pub estimate: f64,
    pub stderr: f64,
    /// Fraction of paths whose fine-grid minimum stayed positive.
    pub fine: f64,
    /// Same on every fourth grid point.
    pub coarse: f64,
    pub replicas: u64,
}

/// Monte Carlo estimate of `P(min of the bridge > 0)` for a Gaussian bridge
/// from `a` to `b` over `duration` with the given variance rate.
///
/// Paths are simulated exactly on a grid of `steps` intervals. Monitoring a
/// grid misses excursions below zero between grid points, with an error of
/// order `√Δt`; the estimate is the extrapolation `2 P_fine − P_coarse`
/// using every fourth grid point as the coarse grid of the same paths.
pub fn bridge_min_oracle(
    a: f64,
    b: f64,
    duration: f64,
    variance_rate: f64,
    steps: usize,
    replicas: u64,
    seed: u64,
) -> Result<BridgeEstimate> {
    use rayon::prelude::*;
    if steps < 1000 || steps % 4 != 0 {
        return Err(Error::param("steps", "need at least 1000 steps, divisible by 4"));
    }
    if replicas < 2 || duration <= 0.0 || variance_rate <= 0.0 {
        return Err(Error::param("replicas", "need replicas >= 2 and positive duration and rate"));
    }
    let dt = duration / steps as f64;
    let results: Vec<(bool, bool)> = (0..replicas)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream(seed, rep, Domain::Bridge, &[]);
            if a <= 0.0 || b <= 0.0 {
                return (false, false);
            }
            let mut x = a;
            let mut fine_ok = true;
            let mut i = 0usize;
            // fine grid until the path first dips to zero
            while i < steps {
                let t = i as f64 * dt;
                let h = if i + 1 == steps { duration - t } else { dt };
                x = bridge_step(x, b, duration - t, h, variance_rate, &mut rng);
                i += 1;
                if x <= 0.0 {
                    fine_ok = false;
                    if i % 4 == 0 {
                        return (false, false);
                    }
                    break;
                }
            }
            if fine_ok {
                return (true, true);
            }
            // coarse grid only: jump to the next multiple of 4
            let mut coarse_ok = true;
            while i < steps {
                let next = (i / 4 + 1) * 4;
                let t = i as f64 * dt;
                let h = (next - i) as f64 * dt;
                x = bridge_step(x, b, duration - t, h, variance_rate, &mut rng);
                i = next;
                if x <= 0.0 && i < steps {
                    coarse_ok = false;
                    break;
                }
            }
            (false, coarse_ok)
        })
        .collect();
    let n = replicas as f64;
    let fine = results.iter().filter(|r| r.0).count() as f64 / n;
    let coarse = results.iter().filter(|r| r.1).count() as f64 / n;
    let ys: Vec<f64> = results.iter().map(|&(f, c)| 2.0 * f as u8 as f64 - c as u8 as f64).collect();
    let mean = ys.iter().sum::<f64>() / n;
    let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(BridgeEstimate { estimate: mean, stderr: (var / n).sqrt(), fine, coarse, replicas })
}

/// One exact step of length `h` of a bridge currently at `x`, pinned at
/// `b` after the remaining time `rem`.
#[inline]
fn bridge_step(x: f64, b: f64, rem: f64, h: f64, rate: f64, rng: &mut impl Rng) -> f64 {
    if h >= rem {
        return b;
    }
    let mean = x + (b - x) * h / rem;
    let var = rate * h * (rem - h) / rem;
    let z: f64 = rng.sample(StandardNormal);
    mean + var.sqrt() * z
}

const SNAPSHOT_MAGIC: &[u8; 4] = b"CGFF";
const SNAPSHOT_VERSION: u32 = 1;

impl Field {
    /// Binary snapshot: magic `CGFF`, version, `d`, radius, seed, replica,
    /// method code and sweeps, value count, then `φ` as little-endian `f64`.
    pub fn write_snapshot(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(48 + 8 * self.phi.len());
        buf.extend_from_slice(SNAPSHOT_MAGIC);
        buf.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.bx.d() as u32).to_le_bytes());
        buf.extend_from_slice(&self.bx.radius().to_le_bytes());
        buf.extend_from_slice(&self.seed.to_le_bytes());
        buf.extend_from_slice(&self.replica.to_le_bytes());
        let (code, sweeps) = match self.method {
            SampleMethod::Exact => (0u32, 0u32),
            SampleMethod::HeatBath { sweeps } => (1, sweeps),
        };
        buf.extend_from_slice(&code.to_le_bytes());
        buf.extend_from_slice(&sweeps.to_le_bytes());
        buf.extend_from_slice(&(self.phi.len() as u64).to_le_bytes());
        for v in &self.phi {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        fs::File::create(path)?.write_all(&buf)?;
        Ok(())
    }

    pub fn read_snapshot(path: &Path) -> Result<Self> {
        let bad = |r: &str| Error::Format { path: path.to_path_buf(), reason: r.into() };
        let mut buf = Vec::new();
        fs::File::open(path)?.read_to_end(&mut buf)?;
        if buf.len() < 48 || &buf[..4] != SNAPSHOT_MAGIC {
            return Err(bad("not a field snapshot"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(buf[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(buf[o..o + 8].try_into().unwrap());
        if u32_at(4) != SNAPSHOT_VERSION {
            return Err(bad("unsupported snapshot version"));
        }
        let bx = BoxSpec::centered(u32_at(8) as usize, u32_at(12)).map_err(|e| bad(&e.to_string()))?;
        let method = match u32_at(32) {
            0 => SampleMethod::Exact,
            1 => SampleMethod::HeatBath { sweeps: u32_at(36) },
            _ => return Err(bad("unknown sampling method")),
        };
        let n = u64_at(40);
        if n != bx.len() || buf.len() as u64 != 48 + 8 * n {
            return Err(bad("payload length does not match header"));
        }
        let phi = buf[48..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(Field { bx, phi, seed: u64_at(16), replica: u64_at(24), method })
    }
}

/// Reads the edge-list text back into index pairs.
pub fn read_edge_list(path: &Path, bx: &BoxSpec) -> Result<Vec<(u64, u64)>> {
    let bad = |r: String| Error::Format { path: path.to_path_buf(), reason: r };
    let parse = |s: &str| -> std::result::Result<u64, String> {
        let c: Vec<i64> = s.split(',').map(|t| t.trim().parse::<i64>().map_err(|e| e.to_string())).collect::<std::result::Result<_, _>>()?;
        match bx.index(&c) {
            OUTSIDE => Err(format!("vertex {s} outside the box")),
            i => Ok(i),
        }
    };
    let mut out = Vec::new();
    for line in BufReader::new(fs::File::open(path)?).lines() {
        let line = line?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let (a, b) = line.split_once(" -- ").ok_or_else(|| bad(format!("bad line `{line}`")))?;
        out.push((parse(a).map_err(bad)?, parse(b).map_err(bad)?));
    }
    Ok(out)
}
