//! Random-walk loop soup at intensity α = 1/2, its local times and cable
//! gluing, and large-loop deletion.
//!
//! Loops are sampled through the rooted representation: for each length `k`
//! the number of rooted loops is Poisson with mean `(1/2)·Σ_x p_k(x,x)/k`,
//! roots are uniform (or proportional to `p_k(x,x)`), and paths are uniform
//! closed walks drawn as random-walk bridges. Point loops only contribute
//! local time. Edge loops never touch a lattice point and are folded into
//! the gluing law of [`cable_gluing`].
//!
//! The dense route here realizes every loop in a box; [`explorer`] reveals
//! only the loops needed for the cluster of the origin.

pub mod dump;
pub mod explorer;
pub mod sampler;
pub mod truncation;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson};
use rustc_hash::{FxHashMap, FxHashSet};

use crate::cluster::{ClusterMap, Coverage, Margin};
use crate::error::{Error, Result};
use crate::lattice::{BoxSpec, Vertex, OUTSIDE};
use crate::rng::{coord_key, keyed_uniform, stream, Domain};
use crate::walk_oracle::{BoxKernel, FreeKernel, TorusKernel, ALPHA};

use sampler::{positions, sample_closed_walk, BridgeKernel};

/// Geometry of the soup.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoopMode {
    /// Loops of the walk on Z^d rooted in the box padded by `⌊K_max/2⌋`
    /// (every loop of length at most `K_max` that meets the box).
    Free,
    /// Loops of the walk killed on leaving the box.
    BoxKilled,
    /// Loops on the box with periodic wrap.
    Torus,
}

/// Law of the point-loop local time at each vertex.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum PointLoopLaw {
    Gamma { shape: f64, scale: f64 },
}

impl Default for PointLoopLaw {
    /// Trivial continuous-time loops at a vertex have intensity
    /// `α e^{−t}/t dt` under unit holding rate; their total time is
    /// Gamma(α, 1).
    fn default() -> Self {
        PointLoopLaw::Gamma { shape: ALPHA, scale: 1.0 }
    }
}

impl PointLoopLaw {
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            PointLoopLaw::Gamma { shape, scale } => Gamma::new(shape, scale).expect("validated law").sample(rng),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PointLoopLaw::Gamma { shape, scale } if shape > 0.0 && scale > 0.0 => Ok(()),
            _ => Err(Error::param("point_loop_law", "shape and scale must be positive")),
        }
    }
}

/// Rate in the conditional gluing law `1 − exp(−rate·√(L_x L_y)/d)` for an
/// edge that no loop crosses.
pub const DEFAULT_GLUE_RATE: f64 = 1.0;

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct LoopOptions {
    pub k_max: usize,
    pub mode: LoopMode,
    #[serde(default)]
    pub point_law: PointLoopLaw,
    pub glue_rate: f64,
    /// Give each cluster an independent fair sign and keep the positive
    /// ones, matching the one-signed clusters of the GFF route.
    pub signed: bool,
}

impl Default for LoopOptions {
    fn default() -> Self {
        Self { k_max: 64, mode: LoopMode::BoxKilled, point_law: PointLoopLaw::default(), glue_rate: DEFAULT_GLUE_RATE, signed: false }
    }
}

impl LoopOptions {
    pub fn validate(&self) -> Result<()> {
        if self.k_max < 2 {
            return Err(Error::param("k_max", "must be at least 2"));
        }
        if !(self.glue_rate > 0.0) {
            return Err(Error::param("glue_rate", "must be positive"));
        }
        self.point_law.validate()
    }
}

/// Loop id layout: length in the high 32 bits, index among loops of that
/// length in the low 32 bits.
pub fn loop_id(k: usize, index: u64) -> u64 {
    ((k as u64) << 32) | (index & 0xFFFF_FFFF)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedLoop {
    pub id: u64,
    pub root: Vertex,
    /// Step directions: axis `s/2`, negative for even `s`.
    pub steps: Vec<u8>,
    pub multiplicity: u32,
}

impl RootedLoop {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn positions(&self, torus: Option<&BoxSpec>) -> Vec<Vec<i64>> {
        positions(&self.root.0, &self.steps, torus)
    }

    /// The set of visited lattice points, sorted.
    pub fn vrange(&self, torus: Option<&BoxSpec>) -> Vec<Vertex> {
        let mut v: Vec<Vertex> = self.positions(torus).into_iter().map(Vertex).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn glued(&self, torus: Option<&BoxSpec>) -> GluedLoop {
        GluedLoop { loop_id: self.id, vertices: self.vrange(torus) }
    }

    pub fn is_closed(&self) -> bool {
        let mut u = self.root.0.clone();
        for &s in &self.steps {
            u[s as usize / 2] += if s % 2 == 0 { -1 } else { 1 };
        }
        u == self.root.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluedLoop {
    pub loop_id: u64,
    pub vertices: Vec<Vertex>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalTimes {
    /// Exp(1) holding time at each position of each loop, parallel to `loops`.
    pub holding: Vec<Vec<f64>>,
    /// Point-loop time at each site of the cluster region.
    pub point: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LoopSample {
    pub loops: Vec<RootedLoop>,
    pub k_max: usize,
    pub mode: LoopMode,
    /// The box the sample describes; clusters live on it.
    pub base: BoxSpec,
    /// Where roots were drawn.
    pub sample_region: BoxSpec,
    pub local_times: Option<LocalTimes>,
    /// Length cutoff applied by [`delete_large_loops`], if any.
    pub cutoff: Option<usize>,
    pub seed: u64,
    pub replica: u64,
}

impl LoopSample {
    pub fn torus(&self) -> Option<&BoxSpec> {
        (self.mode == LoopMode::Torus).then_some(&self.base)
    }

    /// Number of loops of each length `0..=k_max`.
    pub fn counts_by_length(&self) -> Vec<u64> {
        let mut c = vec![0u64; self.k_max + 1];
        for l in &self.loops {
            c[l.len()] += 1;
        }
        c
    }

    /// Total local time per site of `base`: point loops plus holding times.
    pub fn total_local_times(&self) -> Result<Vec<f64>> {
        let lt = self.local_times.as_ref().ok_or(Error::MissingLocalTimes)?;
        let mut total = lt.point.clone();
        for (l, hold) in self.loops.iter().zip(&lt.holding) {
            for (p, h) in l.positions(self.torus()).iter().zip(hold) {
                let i = self.base.index(p);
                if i != OUTSIDE {
                    total[i as usize] += h;
                }
            }
        }
        Ok(total)
    }

    /// Fundamental-loop local time per site (no point loops).
    pub fn fundamental_local_times(&self) -> Result<Vec<f64>> {
        let lt = self.local_times.as_ref().ok_or(Error::MissingLocalTimes)?;
        let mut f = vec![0.0; self.base.len() as usize];
        for (l, hold) in self.loops.iter().zip(&lt.holding) {
            for (p, h) in l.positions(self.torus()).iter().zip(hold) {
                let i = self.base.index(p);
                if i != OUTSIDE {
                    f[i as usize] += h;
                }
            }
        }
        Ok(f)
    }
}

/// Shared state for sampling many replicas of the soup on one box.
#[derive(Debug)]
pub struct LoopSampler {
    opts: LoopOptions,
    base: BoxSpec,
    sample_region: BoxSpec,
    free: Option<FreeKernel>,
    torus: Option<TorusKernel>,
}

impl LoopSampler {
    pub fn new(base: &BoxSpec, opts: &LoopOptions) -> Result<Self> {
        opts.validate()?;
        let (sample_region, free, torus) = match opts.mode {
            LoopMode::Free => (base.padded((opts.k_max / 2) as u32)?, Some(FreeKernel::new(base.d(), opts.k_max)?), None),
            LoopMode::BoxKilled => (base.clone(), Some(FreeKernel::new(base.d(), opts.k_max)?), None),
            LoopMode::Torus => (base.clone(), None, Some(TorusKernel::new(base, opts.k_max)?)),
        };
        Ok(Self { opts: opts.clone(), base: base.clone(), sample_region, free, torus })
    }

    pub fn options(&self) -> &LoopOptions {
        &self.opts
    }

    pub fn base(&self) -> &BoxSpec {
        &self.base
    }

    pub fn sample_region(&self) -> &BoxSpec {
        &self.sample_region
    }

    fn kernel(&self) -> BridgeKernel<'_> {
        match (&self.free, &self.torus) {
            (Some(f), _) => BridgeKernel::Free(f),
            (None, Some(t)) => BridgeKernel::Torus(t),
            _ => unreachable!("a kernel is always built"),
        }
    }

    /// Mean number of rooted loops of length `k` proposed per replica.
    pub fn proposal_mean(&self, k: usize) -> f64 {
        ALPHA * self.sample_region.len() as f64 * self.kernel().return_prob(k) / k as f64
    }

    /// `Λ_k` for `k ≤ K_max`: the mean number of loops of each length in a
    /// sample. Box-killed mode computes `tr(P_B^k)` by propagation.
    pub fn expected_counts(&self) -> Result<Vec<f64>> {
        let kmax = self.opts.k_max;
        let mut out = vec![0.0; kmax + 1];
        match self.opts.mode {
            LoopMode::BoxKilled => {
                let bk = BoxKernel::new(&self.base, kmax)?;
                for (k, o) in out.iter_mut().enumerate().skip(2) {
                    *o = ALPHA * bk.trace(k) / k as f64;
                }
            }
            _ => {
                for (k, o) in out.iter_mut().enumerate().skip(2) {
                    *o = self.proposal_mean(k);
                }
            }
        }
        Ok(out)
    }

    pub fn sample(&self, seed: u64, replica: u64) -> LoopSample {
        let kernel = self.kernel();
        let region = &self.sample_region;
        let killed = self.opts.mode == LoopMode::BoxKilled;
        let mut loops = Vec::new();
        for k in 2..=self.opts.k_max {
            let mean = self.proposal_mean(k);
            if mean <= 0.0 {
                continue;
            }
            let mut rng = stream(seed, replica, Domain::LoopLength, &[k as u64]);
            let n = Poisson::new(mean).expect("positive mean").sample(&mut rng) as u64;
            for idx in 0..n {
                let root = region.vertex(rng.random_range(0..region.len()));
                let base = &self.base;
                let steps = sample_closed_walk(kernel, &root.0, k, &mut rng, |u| !killed || base.contains(u));
                if let Some(steps) = steps {
                    let multiplicity = sampler::multiplicity(&steps);
                    loops.push(RootedLoop { id: loop_id(k, idx), root, steps, multiplicity });
                }
            }
        }
        LoopSample {
            loops,
            k_max: self.opts.k_max,
            mode: self.opts.mode,
            base: self.base.clone(),
            sample_region: self.sample_region.clone(),
            local_times: None,
            cutoff: None,
            seed,
            replica,
        }
    }
}

pub fn sample_loop_soup(base: &BoxSpec, opts: &LoopOptions, seed: u64, replica: u64) -> Result<LoopSample> {
    Ok(LoopSampler::new(base, opts)?.sample(seed, replica))
}

/// Draws an Exp(1) holding time at every position of every loop and a
/// point-loop time at every site of the base box.
pub fn lift_local_times(mut sample: LoopSample, seed: u64, law: &PointLoopLaw) -> Result<LoopSample> {
    law.validate()?;
    let holding = sample
        .loops
        .iter()
        .map(|l| {
            let mut rng = stream(seed, sample.replica, Domain::Holding, &[l.id]);
            (0..l.len()).map(|_| Exp1.sample(&mut rng)).collect()
        })
        .collect();
    let bx = &sample.base;
    let mut coords = vec![0i64; bx.d()];
    let point = (0..bx.len())
        .map(|i| {
            bx.coords_into(i, &mut coords);
            let mut rng = stream(seed, sample.replica, Domain::PointLoop, &[coord_key(&coords)]);
            law.sample(&mut rng)
        })
        .collect();
    sample.local_times = Some(LocalTimes { holding, point });
    Ok(sample)
}

/// Keeps exactly the loops of length at most `cutoff`, with their
/// holding-time draws; point-loop times are untouched.
pub fn delete_large_loops(sample: &LoopSample, cutoff: usize) -> LoopSample {
    let keep: Vec<bool> = sample.loops.iter().map(|l| l.len() <= cutoff).collect();
    let loops = sample.loops.iter().zip(&keep).filter(|(_, k)| **k).map(|(l, _)| l.clone()).collect();
    let local_times = sample.local_times.as_ref().map(|lt| LocalTimes {
        holding: lt.holding.iter().zip(&keep).filter(|(_, k)| **k).map(|(h, _)| h.clone()).collect(),
        point: lt.point.clone(),
    });
    LoopSample {
        loops,
        local_times,
        cutoff: Some(sample.cutoff.map_or(cutoff, |c| c.min(cutoff))),
        ..sample.clone()
    }
}

/// Probability that an uncrossed edge is covered, given the endpoint local
/// times.
#[inline]
pub fn glue_prob(lx: f64, ly: f64, d: usize, rate: f64) -> f64 {
    if lx <= 0.0 || ly <= 0.0 {
        0.0
    } else {
        -(-rate * (lx * ly).sqrt() / d as f64).exp_m1()
    }
}

/// Result of cable gluing on a dense sample.
#[derive(Clone, Debug)]
pub struct GluedConfig {
    pub map: ClusterMap,
    /// Edges crossed by some loop, as `(x, y)` base-box index pairs.
    pub crossed: Vec<(u64, u64)>,
    /// Uncrossed edges opened by the gluing law.
    pub glued: Vec<(u64, u64)>,
}

/// Loop-resolved clusters: loops join along the edges they cross (so loops
/// sharing a vertex merge), and each uncrossed edge is opened independently
/// with [`glue_prob`] of its endpoint local times.
pub fn cable_gluing(sample: &LoopSample, seed: u64, opts: &LoopOptions) -> Result<GluedConfig> {
    let total = sample.total_local_times()?;
    let bx = &sample.base;
    let d = bx.d();
    let torus = sample.torus();
    let mut crossed: FxHashSet<(u64, u64)> = FxHashSet::default();
    for l in &sample.loops {
        let pos = l.positions(torus);
        for (i, p) in pos.iter().enumerate() {
            let q = &pos[(i + 1) % pos.len()];
            let (a, b) = (bx.index(p), bx.index(q));
            if a != OUTSIDE && b != OUTSIDE && a != b {
                crossed.insert((a.min(b), a.max(b)));
            }
        }
    }
    let mut edges = Vec::new();
    let mut glued = Vec::new();
    let mut coords = vec![0i64; d];
    for x in 0..bx.len() {
        for axis in 0..d {
            let y = if torus.is_some() { bx.torus_neighbor(x, 2 * axis + 1) } else { bx.neighbor(x, 2 * axis + 1) };
            if y == OUTSIDE || y == x {
                continue;
            }
            let e = (x.min(y), x.max(y));
            if crossed.contains(&e) {
                edges.push(e);
                continue;
            }
            let p = glue_prob(total[x as usize], total[y as usize], d, opts.glue_rate);
            if p > 0.0 {
                bx.coords_into(x, &mut coords);
                if keyed_uniform(seed, sample.replica, Domain::Glue, &[coord_key(&coords), axis as u64]) < p {
                    edges.push(e);
                    glued.push(e);
                }
            }
        }
    }
    let margin = match sample.mode {
        LoopMode::Torus => Margin::None,
        _ => Margin::HalfRadius,
    };
    let sites: Vec<u64> = (0..bx.len()).filter(|&i| total[i as usize] > 0.0).collect();
    let mut map = ClusterMap::from_edges(bx.clone(), Coverage::Full, margin, sites, &edges);
    if opts.signed {
        let keep: FxHashSet<u64> = map
            .labels()
            .into_iter()
            .filter(|&lab| {
                bx.coords_into(lab, &mut coords);
                keyed_uniform(seed, sample.replica, Domain::Sign, &[coord_key(&coords)]) < 0.5
            })
            .collect();
        let sites: Vec<u64> = map.sites().iter().copied().filter(|&s| keep.contains(&map.label_of(s).unwrap())).collect();
        map = ClusterMap::from_edges(bx.clone(), Coverage::Full, margin, sites, &edges);
    }
    let mut members: FxHashMap<u64, Vec<u64>> = FxHashMap::default();
    for l in &sample.loops {
        if let Some(lab) = l.positions(torus).iter().map(|p| bx.index(p)).find(|&i| i != OUTSIDE).and_then(|i| map.label_of(i)) {
            members.entry(lab).or_default().push(l.id);
        }
    }
    let mut crossed: Vec<(u64, u64)> = crossed.into_iter().collect();
    crossed.sort_unstable();
    Ok(GluedConfig { map: map.with_loop_members(members), crossed, glued })
}
