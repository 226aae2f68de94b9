//! Lazy exploration of the loop cluster of the origin.
//!
//! Vertices are processed on demand. Processing `v` reveals every loop
//! through `v` not already revealed: closed walks rooted at `v` arrive at
//! rate `(1/2)·p_k(0,0)` per length, each is kept with probability `1/n_v`
//! (`n_v` = visits to `v`) and discarded if it touches an earlier processed
//! vertex. Kept loops have unrooted intensity `(1/2)μ`, and the loops found
//! at different vertices are disjoint, so the revealed soup has the law of
//! the dense soup restricted to loops through processed vertices. After
//! `v` is processed its total local time is final.
//!
//! The cluster grows by BFS over window edges; an edge is open when a loop
//! crosses it or its glue uniform falls below the gluing law. Uniforms are
//! keyed by lattice coordinates, so a filtered cluster (loops of length at
//! most `ℓ`) reuses the same draws and is contained in the full one.

use std::collections::VecDeque;

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rustc_hash::{FxHashMap, FxHashSet};

use super::sampler::{sample_closed_walk, BridgeKernel};
use super::{glue_prob, PointLoopLaw, DEFAULT_GLUE_RATE};
use crate::cluster::{ClusterMap, Coverage, Margin};
use crate::error::{Error, Result};
use crate::lattice::{BoxSpec, Vertex, OUTSIDE};
use crate::rng::{coord_key, keyed_uniform, stream, Domain};
use crate::walk_oracle::{FreeKernel, ALPHA};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExploreMode {
    /// Loops of the walk on Z^d; the cluster uses window edges only.
    Free,
    /// Loops of the walk killed on leaving the window.
    BoxKilled,
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct ExplorerOptions {
    pub k_max: usize,
    pub mode: ExploreMode,
    #[serde(default)]
    pub point_law: PointLoopLaw,
    pub glue_rate: f64,
    pub signed: bool,
    /// Processing stops after this many vertices and the result is
    /// flagged truncated.
    pub max_sites: usize,
}

impl Default for ExplorerOptions {
    fn default() -> Self {
        Self {
            k_max: 32,
            mode: ExploreMode::Free,
            point_law: PointLoopLaw::default(),
            glue_rate: DEFAULT_GLUE_RATE,
            signed: false,
            max_sites: 200_000,
        }
    }
}

#[derive(Debug)]
pub struct Explorer {
    opts: ExplorerOptions,
    window: BoxSpec,
    kernel: FreeKernel,
    rate: f64,
    lengths: Vec<usize>,
    length_law: WeightedIndex<f64>,
}

/// Everything revealed about one replica.
#[derive(Clone, Debug)]
pub struct Exploration {
    window: BoxSpec,
    origin: u64,
    d: usize,
    glue_rate: f64,
    seed: u64,
    replica: u64,
    /// Per processed window vertex: point time and `(k, holding)` for each
    /// visit of a revealed loop of length `k`.
    times: FxHashMap<u64, (f64, Vec<(u32, f64)>)>,
    /// Shortest loop length crossing each window edge `(lo, hi)`.
    crossed: FxHashMap<(u64, u64), u32>,
    loops_found: usize,
    truncated: bool,
    map: ClusterMap,
}

impl Explorer {
    pub fn new(window: &BoxSpec, opts: &ExplorerOptions) -> Result<Self> {
        if opts.k_max < 2 {
            return Err(Error::param("k_max", "must be at least 2"));
        }
        if !(opts.glue_rate > 0.0) {
            return Err(Error::param("glue_rate", "must be positive"));
        }
        if opts.max_sites == 0 {
            return Err(Error::param("max_sites", "must be positive"));
        }
        opts.point_law.validate()?;
        if !window.contains(&vec![0; window.d()]) {
            return Err(Error::OutOfRegion("window must contain the origin".into()));
        }
        let kernel = FreeKernel::new(window.d(), opts.k_max)?;
        let lengths: Vec<usize> = (2..=opts.k_max).step_by(2).collect();
        let weights: Vec<f64> = lengths.iter().map(|&k| kernel.return_prob(k)).collect();
        let rate = ALPHA * weights.iter().sum::<f64>();
        let length_law = WeightedIndex::new(&weights).map_err(|e| Error::param("k_max", e.to_string()))?;
        Ok(Self { opts: opts.clone(), window: window.clone(), kernel, rate, lengths, length_law })
    }

    pub fn window(&self) -> &BoxSpec {
        &self.window
    }

    pub fn options(&self) -> &ExplorerOptions {
        &self.opts
    }

    /// Rate of proposed rooted loops per processed vertex.
    pub fn proposal_rate(&self) -> f64 {
        self.rate
    }

    pub fn explore(&self, seed: u64, replica: u64) -> Exploration {
        let w = &self.window;
        let d = w.d();
        let origin = w.index(&vec![0; d]);
        let mut ex = Exploration {
            window: w.clone(),
            origin,
            d,
            glue_rate: self.opts.glue_rate,
            seed,
            replica,
            times: FxHashMap::default(),
            crossed: FxHashMap::default(),
            loops_found: 0,
            truncated: false,
            map: ClusterMap::from_edges(w.clone(), Coverage::Cluster { root: origin }, Margin::None, vec![], &[]),
        };
        // visits to not-yet-processed vertices accumulate here
        let mut pending: FxHashMap<u64, Vec<(u32, f64)>> = FxHashMap::default();
        let mut process = |v: u64, ex: &mut Exploration| -> bool {
            if ex.times.contains_key(&v) {
                return true;
            }
            if ex.times.len() >= self.opts.max_sites {
                ex.truncated = true;
                return false;
            }
            self.process(v, ex, &mut pending);
            true
        };
        let (sites, edges) = ex.bfs(None, &mut process);
        let margin = match self.opts.mode {
            ExploreMode::Free => Margin::Interior,
            ExploreMode::BoxKilled => Margin::HalfRadius,
        };
        let keep = !self.opts.signed || ex.positive_sign(&sites);
        let (sites, edges) = if keep { (sites, edges) } else { (vec![], vec![]) };
        ex.map = ClusterMap::from_edges(w.clone(), Coverage::Cluster { root: origin }, margin, sites, &edges)
            .with_truncated(ex.truncated);
        ex
    }

    fn process(&self, v: u64, ex: &mut Exploration, pending: &mut FxHashMap<u64, Vec<(u32, f64)>>) {
        let w = &self.window;
        let d = w.d();
        let mut root = vec![0i64; d];
        w.coords_into(v, &mut root);
        let mut rng = stream(ex.seed, ex.replica, Domain::ExploreLoops, &[coord_key(&root)]);
        let point = self.opts.point_law.sample(&mut rng);
        let mut visits = pending.remove(&v).unwrap_or_default();
        let n = Poisson::new(self.rate).expect("positive rate").sample(&mut rng) as u64;
        let killed = self.opts.mode == ExploreMode::BoxKilled;
        for _ in 0..n {
            let k = self.lengths[self.length_law.sample(&mut rng)];
            let mut n_v = 1usize;
            let times = &ex.times;
            let steps = sample_closed_walk(BridgeKernel::Free(&self.kernel), &root, k, &mut rng, |u| {
                let i = w.index(u);
                if i == OUTSIDE {
                    return !killed;
                }
                if i == v {
                    n_v += 1;
                    return true;
                }
                !times.contains_key(&i)
            });
            let Some(steps) = steps else { continue };
            if n_v > 1 && rng.random::<f64>() * n_v as f64 >= 1.0 {
                continue;
            }
            ex.loops_found += 1;
            let mut u = root.clone();
            let mut prev = v;
            for &s in &steps {
                let h: f64 = Exp1.sample(&mut rng);
                if prev == v {
                    visits.push((k as u32, h));
                } else if prev != OUTSIDE {
                    pending.entry(prev).or_default().push((k as u32, h));
                }
                u[s as usize / 2] += if s % 2 == 0 { -1 } else { 1 };
                let next = w.index(&u);
                if prev != OUTSIDE && next != OUTSIDE {
                    let e = (prev.min(next), prev.max(next));
                    let c = ex.crossed.entry(e).or_insert(k as u32);
                    *c = (*c).min(k as u32);
                }
                prev = next;
            }
        }
        ex.times.insert(v, (point, visits));
    }
}

impl Exploration {
    /// The origin's cluster, with `Coverage::Cluster` over the window.
    pub fn cluster(&self) -> &ClusterMap {
        &self.map
    }

    pub fn into_cluster(self) -> ClusterMap {
        self.map
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn processed(&self) -> usize {
        self.times.len()
    }

    pub fn loops_found(&self) -> usize {
        self.loops_found
    }

    /// Total local time of a processed vertex counting loops of length at
    /// most `cutoff`.
    pub fn local_time(&self, v: &Vertex, cutoff: Option<usize>) -> Option<f64> {
        let i = self.window.index(&v.0);
        self.times.get(&i).map(|t| Self::total(t, cutoff))
    }

    fn total(t: &(f64, Vec<(u32, f64)>), cutoff: Option<usize>) -> f64 {
        t.0 + t.1.iter().filter(|(k, _)| cutoff.is_none_or(|c| *k as usize <= c)).map(|(_, h)| h).sum::<f64>()
    }

    /// The origin's cluster after deleting loops longer than `cutoff`,
    /// built from the same draws. Unsigned; contained in the unsigned full
    /// cluster.
    pub fn filtered(&self, cutoff: usize) -> ClusterMap {
        let mut process = |v: u64, ex: &mut Exploration| ex.times.contains_key(&v);
        let mut copy = self.clone();
        let (sites, edges) = copy.bfs(Some(cutoff), &mut process);
        ClusterMap::from_edges(
            self.window.clone(),
            Coverage::Cluster { root: self.origin },
            self.map.margin(),
            sites,
            &edges,
        )
        .with_truncated(self.truncated)
    }

    fn edge_open(&self, x: u64, y: u64, axis: usize, lo: u64, cutoff: Option<usize>) -> bool {
        let e = (x.min(y), x.max(y));
        if let Some(&k) = self.crossed.get(&e) {
            if cutoff.is_none_or(|c| k as usize <= c) {
                return true;
            }
        }
        let lx = Self::total(&self.times[&x], cutoff);
        let ly = Self::total(&self.times[&y], cutoff);
        let p = glue_prob(lx, ly, self.d, self.glue_rate);
        if p <= 0.0 {
            return false;
        }
        let mut c = vec![0i64; self.d];
        self.window.coords_into(lo, &mut c);
        keyed_uniform(self.seed, self.replica, Domain::Glue, &[coord_key(&c), axis as u64]) < p
    }

    /// BFS from the origin. `process` must make a vertex's times final and
    /// returns false when the budget is exhausted.
    fn bfs(
        &mut self,
        cutoff: Option<usize>,
        process: &mut impl FnMut(u64, &mut Exploration) -> bool,
    ) -> (Vec<u64>, Vec<(u64, u64)>) {
        let w = self.window.clone();
        let mut seen = FxHashSet::default();
        let mut sites = vec![self.origin];
        let mut edges = Vec::new();
        if !process(self.origin, self) {
            return (sites, edges);
        }
        seen.insert(self.origin);
        let mut queue = VecDeque::from([self.origin]);
        'outer: while let Some(x) = queue.pop_front() {
            for dir in 0..2 * self.d {
                let y = w.neighbor(x, dir);
                if y == OUTSIDE {
                    continue;
                }
                if !process(y, self) {
                    break 'outer;
                }
                let lo = if dir % 2 == 0 { y } else { x };
                if self.edge_open(x, y, dir / 2, lo, cutoff) {
                    edges.push((x.min(y), x.max(y)));
                    if seen.insert(y) {
                        sites.push(y);
                        queue.push_back(y);
                    }
                }
            }
        }
        (sites, edges)
    }

    /// Fair sign of the cluster, keyed by its lexicographically smallest
    /// vertex.
    fn positive_sign(&self, sites: &[u64]) -> bool {
        let lab = *sites.iter().min().expect("origin is always present");
        let mut c = vec![0i64; self.d];
        self.window.coords_into(lab, &mut c);
        keyed_uniform(self.seed, self.replica, Domain::Sign, &[coord_key(&c)]) < 0.5
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loops::{cable_gluing, lift_local_times, sample_loop_soup, LoopMode, LoopOptions};

    fn rate_of(mode: ExploreMode, window: &BoxSpec, reps: u64, k: usize) -> (f64, f64) {
        let opts = ExplorerOptions { k_max: k, mode, ..Default::default() };
        let ex = Explorer::new(window, &opts).unwrap();
        let e1 = Vertex::unit(window.d(), 0);
        let hits = (0..reps).filter(|&r| ex.explore(11, r).cluster().connected(&Vertex::origin(window.d()), &e1).unwrap()).count();
        let p = hits as f64 / reps as f64;
        (p, (p * (1.0 - p) / reps as f64).sqrt())
    }

    fn dense_rate(mode: LoopMode, window: &BoxSpec, reps: u64, k: usize) -> (f64, f64) {
        let o = LoopOptions { k_max: k, mode, ..Default::default() };
        let e1 = Vertex::unit(window.d(), 0);
        let o0 = Vertex::origin(window.d());
        let hits = (0..reps)
            .filter(|&r| {
                let s = lift_local_times(sample_loop_soup(window, &o, 77, r).unwrap(), 77, &o.point_law).unwrap();
                cable_gluing(&s, 77, &o).unwrap().map.connected(&o0, &e1).unwrap()
            })
            .count();
        let p = hits as f64 / reps as f64;
        (p, (p * (1.0 - p) / reps as f64).sqrt())
    }

    #[test]
    fn matches_dense_route() {
        let window = BoxSpec::centered(3, 2).unwrap();
        for (em, dm) in [(ExploreMode::BoxKilled, LoopMode::BoxKilled), (ExploreMode::Free, LoopMode::Free)] {
            let (a, sa) = rate_of(em, &window, 6000, 8);
            let (b, sb) = dense_rate(dm, &window, 6000, 8);
            assert!((a - b).abs() < 4.0 * (sa * sa + sb * sb).sqrt(), "{em:?}: {a} vs {b}");
        }
    }

    #[test]
    fn filtered_is_contained_in_full() {
        let window = BoxSpec::centered(4, 3).unwrap();
        let ex = Explorer::new(&window, &ExplorerOptions { k_max: 16, ..Default::default() }).unwrap();
        for r in 0..50 {
            let e = ex.explore(3, r);
            let full = e.cluster();
            assert_eq!(e.filtered(16).sites(), full.sites());
            for cut in [0, 2, 6] {
                let f = e.filtered(cut);
                assert!(f.sites().iter().all(|s| full.label_of(*s).is_some()));
                assert!(f.num_labeled() <= full.num_labeled());
            }
        }
    }

    #[test]
    fn deterministic_and_truncates() {
        let window = BoxSpec::centered(3, 3).unwrap();
        let ex = Explorer::new(&window, &ExplorerOptions { k_max: 8, ..Default::default() }).unwrap();
        assert_eq!(ex.explore(1, 2).cluster().sites(), ex.explore(1, 2).cluster().sites());
        let small = Explorer::new(&window, &ExplorerOptions { k_max: 8, max_sites: 1, ..Default::default() }).unwrap();
        let e = small.explore(1, 2);
        assert!(e.truncated() && e.cluster().truncated());
        assert_eq!(e.processed(), 1);
    }
}
