//! Glued-loop sequences of lattice paths: covering a path by glued objects,
//! pruning to a minimal cover, extracting a simple chain, and the exact
//! simple geodesic on small fragments.
//!
//! A glued object is either a fundamental glued loop (all loops with the
//! same vertex range, covering the edges they cross) or an opened gluing
//! edge (a two-vertex object covering that one edge). A path segment is
//! covered by an object when every edge of the segment is.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::seq::IndexedRandom;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::cluster::Distance;
use crate::error::{Error, Result};
use crate::lattice::{BoxSpec, Vertex};
use crate::loops::{cable_gluing, lift_local_times, GluedConfig, LoopMode, LoopOptions, LoopSample, LoopSampler};
use crate::rng::{stream, Domain};

/// Ids at or above this value name gluing-edge objects.
pub const EDGE_ID_BASE: u64 = 1 << 63;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectKind {
    Fundamental,
    Edge,
}

#[derive(Clone, Debug)]
pub struct GluedObject {
    pub id: u64,
    pub kind: ObjectKind,
    vertices: Vec<u32>,
    edges: FxHashSet<(u32, u32)>,
}

impl GluedObject {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
}

fn ekey(a: u32, b: u32) -> (u32, u32) {
    (a.min(b), a.max(b))
}

/// A collection of glued objects over a shared vertex table, sorted by id.
#[derive(Clone, Debug, Default)]
pub struct ObjectSet {
    verts: Vec<Vertex>,
    index: FxHashMap<Vertex, u32>,
    objects: Vec<GluedObject>,
    by_id: FxHashMap<u64, usize>,
}

impl ObjectSet {
    fn intern(&mut self, v: &Vertex) -> u32 {
        if let Some(&i) = self.index.get(v) {
            return i;
        }
        let i = self.verts.len() as u32;
        self.verts.push(v.clone());
        self.index.insert(v.clone(), i);
        i
    }

    /// Builds objects from closed walks (positions of each loop, by id) and
    /// gluing edges. Loops with equal vertex ranges form one glued loop,
    /// named by its smallest loop id.
    pub fn from_parts(loops: &[(u64, Vec<Vertex>)], glue_edges: &[(Vertex, Vertex)]) -> Result<Self> {
        let mut set = ObjectSet::default();
        let mut groups: FxHashMap<Vec<u32>, usize> = FxHashMap::default();
        let mut objects: Vec<GluedObject> = Vec::new();
        for (id, pos) in loops {
            if pos.len() < 2 {
                return Err(Error::InvalidQuery(format!("loop {id} has fewer than two positions")));
            }
            let idx: Vec<u32> = pos.iter().map(|v| set.intern(v)).collect();
            let mut range = idx.clone();
            range.sort_unstable();
            range.dedup();
            let slot = *groups.entry(range.clone()).or_insert_with(|| {
                objects.push(GluedObject { id: *id, kind: ObjectKind::Fundamental, vertices: range, edges: FxHashSet::default() });
                objects.len() - 1
            });
            let obj = &mut objects[slot];
            obj.id = obj.id.min(*id);
            for i in 0..idx.len() {
                let (a, b) = (idx[i], idx[(i + 1) % idx.len()]);
                if a != b {
                    if !set.verts[a as usize].is_adjacent(&set.verts[b as usize]) {
                        return Err(Error::InvalidQuery(format!("loop {id} makes a non-lattice step")));
                    }
                    obj.edges.insert(ekey(a, b));
                }
            }
        }
        let mut ge: Vec<(Vertex, Vertex)> =
            glue_edges.iter().map(|(a, b)| if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) }).collect();
        ge.sort();
        ge.dedup();
        for (i, (a, b)) in ge.iter().enumerate() {
            if !a.is_adjacent(b) {
                return Err(Error::InvalidQuery(format!("gluing edge {a} -- {b} is not a lattice edge")));
            }
            let (ia, ib) = (set.intern(a), set.intern(b));
            let mut edges = FxHashSet::default();
            edges.insert(ekey(ia, ib));
            objects.push(GluedObject { id: EDGE_ID_BASE + i as u64, kind: ObjectKind::Edge, vertices: vec![ia.min(ib), ia.max(ib)], edges });
        }
        objects.sort_by_key(|o| o.id);
        set.by_id = objects.iter().enumerate().map(|(i, o)| (o.id, i)).collect();
        set.objects = objects;
        Ok(set)
    }

    /// Objects of a dense sample and its gluing: fundamental glued loops and
    /// the opened uncrossed edges.
    pub fn from_sample(sample: &LoopSample, glued: &GluedConfig) -> Result<Self> {
        let loops: Vec<(u64, Vec<Vertex>)> =
            sample.loops.iter().map(|l| (l.id, l.positions(sample.torus()).into_iter().map(Vertex).collect())).collect();
        let bx = &sample.base;
        let ge: Vec<(Vertex, Vertex)> = glued.glued.iter().map(|&(a, b)| (bx.vertex(a), bx.vertex(b))).collect();
        Self::from_parts(&loops, &ge)
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn objects(&self) -> &[GluedObject] {
        &self.objects
    }

    pub fn get(&self, id: u64) -> Option<&GluedObject> {
        self.by_id.get(&id).map(|&i| &self.objects[i])
    }

    pub fn vertices_of(&self, id: u64) -> Option<Vec<Vertex>> {
        self.get(id).map(|o| o.vertices.iter().map(|&i| self.verts[i as usize].clone()).collect())
    }

    /// Edges traversed by the object, each as a sorted vertex pair.
    pub fn edges_of(&self, id: u64) -> Option<Vec<(Vertex, Vertex)>> {
        self.get(id).map(|o| {
            let mut es: Vec<(Vertex, Vertex)> = o
                .edges
                .iter()
                .map(|&(a, b)| {
                    let (x, y) = (self.verts[a as usize].clone(), self.verts[b as usize].clone());
                    if x <= y { (x, y) } else { (y, x) }
                })
                .collect();
            es.sort();
            es
        })
    }

    pub fn contains_vertex(&self, id: u64, v: &Vertex) -> bool {
        match (self.get(id), self.index.get(v)) {
            (Some(o), Some(i)) => o.vertices.binary_search(i).is_ok(),
            _ => false,
        }
    }

    fn covers(&self, obj: usize, a: u32, b: u32) -> bool {
        self.objects[obj].edges.contains(&ekey(a, b))
    }

    /// The sub-collection with the given ids.
    pub fn restrict(&self, ids: &[u64]) -> ObjectSet {
        let keep: FxHashSet<u64> = ids.iter().copied().collect();
        let mut out = ObjectSet::default();
        let mut objects = Vec::new();
        for o in self.objects.iter().filter(|o| keep.contains(&o.id)) {
            let map: Vec<u32> = o.vertices.iter().map(|&v| out.intern(&self.verts[v as usize])).collect();
            let remap = |v: u32| map[o.vertices.binary_search(&v).expect("edge endpoint in range")];
            let edges = o.edges.iter().map(|&(a, b)| ekey(remap(a), remap(b))).collect();
            let mut vertices = map.clone();
            vertices.sort_unstable();
            objects.push(GluedObject { id: o.id, kind: o.kind, vertices, edges });
        }
        out.by_id = objects.iter().enumerate().map(|(i, o)| (o.id, i)).collect();
        out.objects = objects;
        out
    }

    pub fn num_vertices(&self) -> usize {
        let mut all: Vec<u32> = self.objects.iter().flat_map(|o| o.vertices.iter().copied()).collect();
        all.sort_unstable();
        all.dedup();
        all.len()
    }

    fn lookup(&self, v: &Vertex) -> Option<u32> {
        self.index.get(v).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticePath {
    vertices: Vec<Vertex>,
}

impl LatticePath {
    pub fn new(vertices: Vec<Vertex>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidQuery("a path needs at least one vertex".into()));
        }
        if let Some(w) = vertices.windows(2).find(|w| !w[0].is_adjacent(&w[1])) {
            return Err(Error::InvalidQuery(format!("{} and {} are not adjacent", w[0], w[1])));
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() == 1
    }

    pub fn is_self_avoiding(&self) -> bool {
        let mut seen = FxHashSet::default();
        self.vertices.iter().all(|v| seen.insert(v))
    }

    pub fn start(&self) -> &Vertex {
        &self.vertices[0]
    }

    pub fn end(&self) -> &Vertex {
        self.vertices.last().expect("nonempty")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluedChain {
    pub sequence: Vec<u64>,
}

impl GluedChain {
    pub fn is_simple(&self) -> bool {
        let mut seen = FxHashSet::default();
        self.sequence.iter().all(|id| seen.insert(*id))
    }

    /// Distinct ids, sorted.
    pub fn set(&self) -> Vec<u64> {
        let mut s = self.sequence.clone();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }
}

fn path_indices(path: &LatticePath, objs: &ObjectSet) -> Vec<Option<u32>> {
    path.vertices.iter().map(|v| objs.lookup(v)).collect()
}

/// Greedy cover using only objects in `allowed` (all when `None`): from
/// each position take the object covering the longest run of following
/// edges, smallest id on ties. Returns the chain and its edge runs.
fn greedy_cover(path: &LatticePath, objs: &ObjectSet, allowed: Option<&FxHashSet<u64>>) -> Result<(GluedChain, Vec<(usize, usize)>)> {
    let idx = path_indices(path, objs);
    let ok = |o: &GluedObject| allowed.is_none_or(|a| a.contains(&o.id));
    if path.is_empty() {
        let v = idx[0];
        return objs
            .objects
            .iter()
            .find(|o| ok(o) && v.is_some_and(|v| o.vertices.binary_search(&v).is_ok()))
            .map(|o| (GluedChain { sequence: vec![o.id] }, vec![(0, 0)]))
            .ok_or_else(|| Error::Uncoverable { edge: format!("{} (empty path)", path.start()) });
    }
    let m = path.len();
    let mut seq = Vec::new();
    let mut runs = Vec::new();
    let mut i = 0;
    while i < m {
        let mut best: Option<(usize, usize)> = None;
        for (oi, o) in objs.objects.iter().enumerate() {
            if !ok(o) {
                continue;
            }
            let mut j = i;
            while j < m {
                match (idx[j], idx[j + 1]) {
                    (Some(a), Some(b)) if objs.covers(oi, a, b) => j += 1,
                    _ => break,
                }
            }
            if j > i && best.is_none_or(|(_, bj)| j > bj) {
                best = Some((oi, j));
            }
        }
        let Some((oi, j)) = best else {
            return Err(Error::Uncoverable { edge: format!("{} -- {}", path.vertices[i], path.vertices[i + 1]) });
        };
        seq.push(objs.objects[oi].id);
        runs.push((i, j));
        i = j;
    }
    Ok((GluedChain { sequence: seq }, runs))
}

/// A glued-loop sequence of `path`, by greedy longest-run cover.
pub fn loop_sequence_of_path(path: &LatticePath, objs: &ObjectSet) -> Result<GluedChain> {
    greedy_cover(path, objs, None).map(|(c, _)| c)
}

/// Splits the path's edges into consecutive nonempty runs, run `i` covered
/// by `chain[i]`, if possible. Runs are `(first edge, end edge)`.
pub fn segmentation(path: &LatticePath, chain: &GluedChain, objs: &ObjectSet) -> Option<Vec<(usize, usize)>> {
    let idx = path_indices(path, objs);
    let k = chain.len();
    let pos: Option<Vec<usize>> = chain.sequence.iter().map(|id| objs.by_id.get(id).copied()).collect();
    let pos = pos?;
    if k == 0 {
        return None;
    }
    if path.is_empty() {
        let v = idx[0]?;
        return (k == 1 && objs.objects[pos[0]].vertices.binary_search(&v).is_ok()).then(|| vec![(0, 0)]);
    }
    let m = path.len();
    let covered = |o: usize, e: usize| match (idx[e], idx[e + 1]) {
        (Some(a), Some(b)) => objs.covers(o, a, b),
        _ => false,
    };
    // reach[i][j]: the first i objects cover exactly the first j edges
    let mut reach = vec![vec![false; m + 1]; k + 1];
    let mut from = vec![vec![0usize; m + 1]; k + 1];
    reach[0][0] = true;
    for i in 1..=k {
        for s in 0..m {
            if !reach[i - 1][s] {
                continue;
            }
            let mut j = s;
            while j < m && covered(pos[i - 1], j) {
                j += 1;
                if !reach[i][j] {
                    reach[i][j] = true;
                    from[i][j] = s;
                }
            }
        }
    }
    if !reach[k][m] {
        return None;
    }
    let mut runs = vec![(0, 0); k];
    let mut j = m;
    for i in (1..=k).rev() {
        let s = from[i][j];
        runs[i - 1] = (s, j);
        j = s;
    }
    Some(runs)
}

pub fn is_sequence_for(path: &LatticePath, chain: &GluedChain, objs: &ObjectSet) -> bool {
    segmentation(path, chain, objs).is_some()
}

/// Whether every edge of `path` is covered by some object of `ids`, i.e.
/// the path is an `ids`-path.
pub fn is_covered_by(path: &LatticePath, ids: &[u64], objs: &ObjectSet) -> bool {
    let allowed: FxHashSet<u64> = ids.iter().copied().collect();
    greedy_cover(path, objs, Some(&allowed)).is_ok()
}

/// No member of the chain's set can be dropped while keeping the path
/// covered.
pub fn is_minimal(path: &LatticePath, chain: &GluedChain, objs: &ObjectSet) -> bool {
    let set = chain.set();
    set.iter().all(|g| {
        let rest: Vec<u64> = set.iter().copied().filter(|x| x != g).collect();
        !is_covered_by(path, &rest, objs)
    })
}

/// Drops members one at a time, in chain order, whenever the path stays
/// covered without them, then re-derives a sequence from what is left.
pub fn minimal_sequence(path: &LatticePath, chain: &GluedChain, objs: &ObjectSet) -> Result<GluedChain> {
    if !is_sequence_for(path, chain, objs) {
        return Err(Error::InvalidChain("not a glued-loop sequence of the path".into()));
    }
    let mut keep: Vec<u64> = Vec::new();
    for id in &chain.sequence {
        if !keep.contains(id) {
            keep.push(*id);
        }
    }
    let order = keep.clone();
    for g in order {
        let rest: Vec<u64> = keep.iter().copied().filter(|&x| x != g).collect();
        if !rest.is_empty() && is_covered_by(path, &rest, objs) {
            keep = rest;
        }
    }
    let allowed: FxHashSet<u64> = keep.iter().copied().collect();
    let (out, _) = greedy_cover(path, objs, Some(&allowed))?;
    if path.len() >= 1 && out.set().len() > 3 * path.len() {
        return Err(Error::StrictCheck(format!(
            "minimal sequence uses {} objects for a path of {} edges",
            out.set().len(),
            path.len()
        )));
    }
    Ok(out)
}

/// Consecutive members share a vertex, the first touches `a` and the last
/// touches `b`.
pub fn chain_connects(chain: &GluedChain, a: &[Vertex], b: &[Vertex], objs: &ObjectSet) -> bool {
    let Some((first, last)) = chain.sequence.first().zip(chain.sequence.last()) else { return false };
    let touches = |id: u64, set: &[Vertex]| set.iter().any(|v| objs.contains_vertex(id, v));
    if !touches(*first, a) || !touches(*last, b) {
        return false;
    }
    chain.sequence.windows(2).all(|w| match (objs.get(w[0]), objs.get(w[1])) {
        (Some(x), Some(y)) => x.vertices.iter().any(|v| y.vertices.binary_search(v).is_ok()),
        _ => false,
    })
}

/// A simple chain from `a` to `b` using only members of `chain`: a
/// shortest path in the intersection graph of its set, smallest ids first.
pub fn simplify_chain(chain: &GluedChain, a: &[Vertex], b: &[Vertex], objs: &ObjectSet) -> Result<GluedChain> {
    let set = chain.set();
    if set.iter().any(|id| objs.get(*id).is_none()) {
        return Err(Error::InvalidChain("chain names an unknown object".into()));
    }
    let touches = |id: u64, s: &[Vertex]| s.iter().any(|v| objs.contains_vertex(id, v));
    let n = set.len();
    let meets = |i: usize, j: usize| {
        let (x, y) = (objs.get(set[i]).unwrap(), objs.get(set[j]).unwrap());
        x.vertices.iter().any(|v| y.vertices.binary_search(v).is_ok())
    };
    let mut prev = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for i in 0..n {
        if touches(set[i], a) {
            seen[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        if touches(set[i], b) {
            let mut seq = vec![set[i]];
            let mut c = i;
            while prev[c] != usize::MAX {
                c = prev[c];
                seq.push(set[c]);
            }
            seq.reverse();
            return Ok(GluedChain { sequence: seq });
        }
        for j in 0..n {
            if !seen[j] && meets(i, j) {
                seen[j] = true;
                prev[j] = i;
                queue.push_back(j);
            }
        }
    }
    Err(Error::NotConnected)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GeodesicLimits {
    pub max_objects: usize,
    pub max_vertices: usize,
}

impl Default for GeodesicLimits {
    fn default() -> Self {
        Self { max_objects: 12, max_vertices: 60 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeodesicPair {
    /// Shortest path admitting a simple chain.
    pub simple: Distance,
    /// Shortest path over all covered edges.
    pub ordinary: Distance,
}

/// Exact simple and ordinary geodesic distances between `x` and `y` in a
/// small fragment.
///
/// Shortest walks are searched over states (vertex, current object, used
/// objects); each step follows an edge of the current object and the
/// walk may switch to an unused object containing the current vertex.
/// Cutting a cycle out of such a walk keeps its chain simple, so the
/// minimum over walks is attained by a self-avoiding path.
pub fn simple_geodesic_exact(objs: &ObjectSet, x: &Vertex, y: &Vertex, limits: GeodesicLimits) -> Result<GeodesicPair> {
    let no = objs.len();
    let nv = objs.num_vertices();
    if no > limits.max_objects.min(16) || nv > limits.max_vertices {
        return Err(Error::LimitsExceeded(format!(
            "{no} objects and {nv} vertices, limits {} and {}",
            limits.max_objects, limits.max_vertices
        )));
    }
    let (Some(xi), Some(yi)) = (objs.lookup(x), objs.lookup(y)) else {
        return Ok(GeodesicPair { simple: Distance::Unreachable, ordinary: Distance::Unreachable });
    };
    let nt = objs.verts.len();
    // neighbor lists with the mask of objects covering each edge
    let mut adj: Vec<Vec<(u32, u32)>> = vec![Vec::new(); nt];
    let mut cov: FxHashMap<(u32, u32), u32> = FxHashMap::default();
    let mut member = vec![0u32; nt];
    for (oi, o) in objs.objects.iter().enumerate() {
        for &(a, b) in &o.edges {
            *cov.entry((a, b)).or_default() |= 1 << oi;
        }
        for &v in &o.vertices {
            member[v as usize] |= 1 << oi;
        }
    }
    let mut keys: Vec<_> = cov.into_iter().collect();
    keys.sort_unstable();
    for ((a, b), m) in keys {
        adj[a as usize].push((b, m));
        adj[b as usize].push((a, m));
    }
    // ordinary BFS
    let mut dist = vec![u64::MAX; nt];
    dist[xi as usize] = 0;
    let mut q = VecDeque::from([xi]);
    while let Some(u) = q.pop_front() {
        for &(w, _) in &adj[u as usize] {
            if dist[w as usize] == u64::MAX {
                dist[w as usize] = dist[u as usize] + 1;
                q.push_back(w);
            }
        }
    }
    let ordinary = if member[xi as usize] == 0 || dist[yi as usize] == u64::MAX {
        Distance::Unreachable
    } else {
        Distance::Finite(dist[yi as usize])
    };
    // 0-1 BFS over (vertex, object, used mask)
    let states = nt * no << no;
    let id = |v: u32, o: usize, m: u32| ((v as usize * no + o) << no) | m as usize;
    let mut best = vec![u64::MAX; states];
    let mut dq = VecDeque::new();
    for o in 0..no {
        if member[xi as usize] >> o & 1 == 1 {
            best[id(xi, o, 1 << o)] = 0;
            dq.push_back((xi, o, 1u32 << o));
        }
    }
    let mut simple = Distance::Unreachable;
    while let Some((v, o, m)) = dq.pop_front() {
        let dv = best[id(v, o, m)];
        if v == yi {
            simple = Distance::Finite(dv);
            break;
        }
        for o2 in 0..no {
            if m >> o2 & 1 == 0 && member[v as usize] >> o2 & 1 == 1 {
                let m2 = m | 1 << o2;
                let s = id(v, o2, m2);
                if dv < best[s] {
                    best[s] = dv;
                    dq.push_front((v, o2, m2));
                }
            }
        }
        for &(w, cm) in &adj[v as usize] {
            if cm >> o & 1 == 1 {
                let s = id(w, o, m);
                if dv + 1 < best[s] {
                    best[s] = dv + 1;
                    dq.push_back((w, o, m));
                }
            }
        }
    }
    Ok(GeodesicPair { simple, ordinary })
}

/// One line per run: `first..end -> id`, edge positions along the path.
pub fn chain_trace(path: &LatticePath, chain: &GluedChain, objs: &ObjectSet) -> Result<String> {
    let runs = segmentation(path, chain, objs).ok_or_else(|| Error::InvalidChain("not a glued-loop sequence of the path".into()))?;
    let mut s = String::new();
    for ((a, b), id) in runs.iter().zip(&chain.sequence) {
        let kind = if *id >= EDGE_ID_BASE { "edge" } else { "loop" };
        writeln!(s, "{a}..{b} -> {kind} {id}").expect("write to string");
    }
    Ok(s)
}

/// A random instance for exercising the chain operations: a small loop
/// configuration and a self-avoiding path over its covered edges.
#[derive(Clone, Debug)]
pub struct ChainInstance {
    pub objects: ObjectSet,
    pub path: LatticePath,
}

/// Samples a box-killed soup on a d=2 box of radius 4 with `K_max = 16`,
/// glues it, and runs a loop-erased random walk over covered edges from a
/// random covered edge, keeping the longest erased path seen (at most
/// `max_len` edges). Returns `None` when the configuration has no covered
/// edge.
pub fn random_instance(seed: u64, index: u64, max_len: usize) -> Result<Option<ChainInstance>> {
    let bx = BoxSpec::centered(2, 4)?;
    let opts = LoopOptions { k_max: 16, mode: LoopMode::BoxKilled, ..Default::default() };
    let sampler = LoopSampler::new(&bx, &opts)?;
    let sample = lift_local_times(sampler.sample(seed, index), seed, &opts.point_law)?;
    let glued = cable_gluing(&sample, seed, &opts)?;
    let objects = ObjectSet::from_sample(&sample, &glued)?;
    let mut adj: FxHashMap<&Vertex, Vec<&Vertex>> = FxHashMap::default();
    let mut edges: Vec<(&Vertex, &Vertex)> = Vec::new();
    for o in &objects.objects {
        let mut es: Vec<_> = o.edges.iter().copied().collect();
        es.sort_unstable();
        for (a, b) in es {
            let (va, vb) = (&objects.verts[a as usize], &objects.verts[b as usize]);
            adj.entry(va).or_default().push(vb);
            adj.entry(vb).or_default().push(va);
            edges.push((va, vb));
        }
    }
    if edges.is_empty() {
        return Ok(None);
    }
    for l in adj.values_mut() {
        l.sort();
        l.dedup();
    }
    let max_len = max_len.max(1);
    let mut rng = stream(seed, index, Domain::Instance, &[]);
    let (start, first) = *edges.choose(&mut rng).expect("nonempty");
    let mut walk = vec![start, first];
    let mut best = walk.clone();
    for _ in 0..16 * max_len {
        let cur = *walk.last().unwrap();
        let next = *adj[cur].choose(&mut rng).expect("covered vertex has a neighbor");
        // loop erasure
        if let Some(p) = walk.iter().position(|v| *v == next) {
            walk.truncate(p + 1);
        } else {
            walk.push(next);
        }
        if walk.len() > best.len() {
            best = walk.clone();
        }
        if best.len() > max_len {
            break;
        }
    }
    best.truncate(max_len + 1);
    let path = LatticePath::new(best.into_iter().cloned().collect())?;
    Ok(Some(ChainInstance { objects, path }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[i64]) -> Vertex {
        Vertex(c.to_vec())
    }

    /// Square loop with lower-left corner `c`.
    fn square(id: u64, c: [i64; 2]) -> (u64, Vec<Vertex>) {
        let [x, y] = c;
        (id, vec![v(&[x, y]), v(&[x + 1, y]), v(&[x + 1, y + 1]), v(&[x, y + 1])])
    }

    #[test]
    fn single_loop_chain() {
        let objs = ObjectSet::from_parts(&[square(5, [0, 0])], &[]).unwrap();
        let p = LatticePath::new(vec![v(&[0, 0]), v(&[1, 0]), v(&[1, 1])]).unwrap();
        let c = loop_sequence_of_path(&p, &objs).unwrap();
        assert_eq!(c.sequence, vec![5]);
        assert!(is_minimal(&p, &c, &objs));
    }

    #[test]
    fn two_loops_through_shared_vertex() {
        let objs = ObjectSet::from_parts(&[square(1, [0, 0]), square(2, [1, 1])], &[]).unwrap();
        let p = LatticePath::new(vec![v(&[0, 0]), v(&[1, 0]), v(&[1, 1]), v(&[2, 1]), v(&[2, 2])]).unwrap();
        let c = loop_sequence_of_path(&p, &objs).unwrap();
        assert_eq!(c.sequence, vec![1, 2]);
        assert_eq!(chain_trace(&p, &c, &objs).unwrap(), "0..2 -> loop 1\n2..4 -> loop 2\n");
        let bad = LatticePath::new(vec![v(&[0, 0]), v(&[-1, 0])]).unwrap();
        assert!(matches!(loop_sequence_of_path(&bad, &objs), Err(Error::Uncoverable { .. })));
    }

    #[test]
    fn equal_ranges_glue_into_one_object() {
        let a = square(4, [0, 0]);
        let mut b = a.clone();
        b.0 = 3;
        b.1.reverse();
        let objs = ObjectSet::from_parts(&[a, b], &[]).unwrap();
        assert_eq!(objs.len(), 1);
        assert_eq!(objs.objects()[0].id, 3);
    }

    #[test]
    fn minimal_removes_duplicates() {
        let objs = ObjectSet::from_parts(&[square(1, [0, 0]), square(2, [0, 0]).clone()], &[]).unwrap();
        assert_eq!(objs.len(), 1);
        let objs = ObjectSet::from_parts(&[square(1, [0, 0]), square(2, [1, 0])], &[(v(&[0, 0]), v(&[1, 0]))]).unwrap();
        let p = LatticePath::new(vec![v(&[0, 0]), v(&[1, 0]), v(&[2, 0])]).unwrap();
        let e = EDGE_ID_BASE;
        let chain = GluedChain { sequence: vec![e, 1, 2] };
        assert!(!is_sequence_for(&p, &chain, &objs));
        let chain = GluedChain { sequence: vec![e, 2] };
        assert!(is_sequence_for(&p, &chain, &objs));
        let m = minimal_sequence(&p, &chain, &objs).unwrap();
        assert_eq!(m.sequence, vec![e, 2]);
        let chain = GluedChain { sequence: vec![1, e, 2] };
        assert!(!is_sequence_for(&p, &chain, &objs));
        let objs = ObjectSet::from_parts(&[square(1, [0, 0]), square(2, [1, 0]), square(4, [1, -1])], &[]).unwrap();
        let p3 = LatticePath::new(vec![v(&[0, 0]), v(&[1, 0]), v(&[2, 0]), v(&[2, 1])]).unwrap();
        let chain = GluedChain { sequence: vec![1, 2, 2] };
        assert!(is_sequence_for(&p3, &chain, &objs));
        assert_eq!(minimal_sequence(&p3, &chain, &objs).unwrap().sequence, vec![1, 2]);
        let chain = GluedChain { sequence: vec![1, 4, 2] };
        assert!(is_sequence_for(&p3, &chain, &objs));
        let m = minimal_sequence(&p3, &chain, &objs).unwrap();
        assert_eq!(m.sequence, vec![1, 2]);
        assert!(is_minimal(&p3, &m, &objs));
        assert!(!is_minimal(&p3, &chain, &objs));
        assert!(matches!(minimal_sequence(&p, &GluedChain { sequence: vec![2] }, &objs), Err(Error::InvalidChain(_))));
    }

    #[test]
    fn simplify_aba() {
        let objs = ObjectSet::from_parts(&[square(1, [0, 0]), square(2, [1, 1])], &[]).unwrap();
        let chain = GluedChain { sequence: vec![1, 2, 1] };
        let s = simplify_chain(&chain, &[v(&[0, 0])], &[v(&[0, 1])], &objs).unwrap();
        assert_eq!(s.sequence, vec![1]);
        let s = simplify_chain(&chain, &[v(&[0, 0])], &[v(&[2, 2])], &objs).unwrap();
        assert_eq!(s.sequence, vec![1, 2]);
        assert!(matches!(simplify_chain(&chain, &[v(&[0, 0])], &[v(&[5, 5])], &objs), Err(Error::NotConnected)));
    }

    #[test]
    fn geodesic_examples() {
        let objs = ObjectSet::from_parts(&[square(1, [0, 0]), square(2, [1, 1])], &[]).unwrap();
        let g = simple_geodesic_exact(&objs, &v(&[0, 0]), &v(&[1, 1]), GeodesicLimits::default()).unwrap();
        assert_eq!(g, GeodesicPair { simple: Distance::Finite(2), ordinary: Distance::Finite(2) });
        let g = simple_geodesic_exact(&objs, &v(&[0, 0]), &v(&[2, 2]), GeodesicLimits::default()).unwrap();
        assert_eq!(g.simple, Distance::Finite(4));
        let g = simple_geodesic_exact(&objs, &v(&[0, 0]), &v(&[0, 0]), GeodesicLimits::default()).unwrap();
        assert_eq!(g.simple, Distance::Finite(0));
        let tight = GeodesicLimits { max_objects: 1, max_vertices: 60 };
        assert!(matches!(simple_geodesic_exact(&objs, &v(&[0, 0]), &v(&[2, 2]), tight), Err(Error::LimitsExceeded(_))));
    }

    #[test]
    fn simple_geodesic_at_least_geodesic() {
        // a long loop A and a short loop B; the short route uses A, B, A
        let a = (1, vec![
            v(&[0, 0]), v(&[1, 0]), v(&[2, 0]), v(&[3, 0]), v(&[3, 1]), v(&[3, 2]), v(&[2, 2]), v(&[1, 2]), v(&[0, 2]), v(&[0, 1]),
        ]);
        let b = (2, vec![v(&[1, 0]), v(&[1, 1]), v(&[2, 1]), v(&[2, 0])]);
        let mut b2 = b.clone();
        b2.0 = 3;
        b2.1 = vec![v(&[2, 1]), v(&[2, 2]), v(&[1, 2]), v(&[1, 1])];
        let objs = ObjectSet::from_parts(&[a, b], &[]).unwrap();
        let g = simple_geodesic_exact(&objs, &v(&[0, 0]), &v(&[3, 0]), GeodesicLimits::default()).unwrap();
        assert_eq!(g.ordinary, Distance::Finite(3));
        assert_eq!(g.simple, Distance::Finite(3));
        let objs = ObjectSet::from_parts(&[(1, vec![v(&[0, 0]), v(&[1, 0]), v(&[1, 1]), v(&[2, 1]), v(&[2, 0]), v(&[3, 0]), v(&[3, -1]), v(&[2, -1]), v(&[1, -1]), v(&[0, -1])]), b2], &[]).unwrap();
        let g = simple_geodesic_exact(&objs, &v(&[0, 0]), &v(&[3, 0]), GeodesicLimits::default()).unwrap();
        assert_eq!(g.ordinary, Distance::Finite(5));
        assert!(g.simple.finite().unwrap() >= 5);
    }

    #[test]
    fn random_instances_are_covered() {
        let mut n = 0;
        for i in 0..40 {
            if let Some(inst) = random_instance(8, i, 8).unwrap() {
                assert!(inst.path.is_self_avoiding());
                assert!(inst.path.len() >= 1);
                let c = loop_sequence_of_path(&inst.path, &inst.objects).unwrap();
                assert!(is_sequence_for(&inst.path, &c, &inst.objects));
                n += 1;
            }
        }
        assert!(n > 30);
    }
}
