//! Connectivity and intrinsic geometry of a realized configuration.
//!
//! A [`ClusterMap`] stores the labeled vertices of a configuration, the opened
//! lattice edges between them and union-find cluster labels. Vertices are
//! identified by their dense index in the map's region box. Both the dense
//! routes (every vertex of a box known) and the lazy explorer (only the
//! origin's cluster known) produce the same type; queries that would need
//! unexplored vertices return [`Error::Unexplored`].

use std::collections::VecDeque;
use std::path::Path;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::lattice::{BoxSpec, Norm, Vertex, OUTSIDE};

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n as u32).collect(), size: vec![1; n] }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    /// Returns true when `a` and `b` were in different sets.
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        true
    }
}

/// Which vertices of the region have a known status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coverage {
    /// Every vertex of the region; unlabeled means not in the level set.
    Full,
    /// Only the cluster of the given vertex was explored.
    Cluster { root: u64 },
}

/// How far observables must stay from the region boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Margin {
    /// Zero boundary values: observables within the inner half radius.
    HalfRadius,
    /// Infinite-volume configuration explored in a window: observables may
    /// use the whole window, which only decides events determined by edges
    /// inside it (such as reaching the window's own boundary).
    Interior,
    /// No restriction (torus geometry or tests).
    None,
}

impl Margin {
    /// Largest admissible ℓ∞ radius around the region center.
    pub fn max_radius(self, region: &BoxSpec) -> u64 {
        let r = region.radius() as u64;
        match self {
            Margin::HalfRadius => r / 2,
            Margin::Interior | Margin::None => r,
        }
    }
}

/// Graph distance in a configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Distance {
    Finite(u64),
    Unreachable,
}

impl Distance {
    pub fn finite(self) -> Option<u64> {
        match self {
            Distance::Finite(v) => Some(v),
            Distance::Unreachable => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntrinsicBall {
    pub center: Vertex,
    pub radius: u64,
    /// Vertices at distance at most `radius`, in BFS order.
    pub members: Vec<Vertex>,
    /// Vertices at distance exactly `radius`.
    pub sphere: Vec<Vertex>,
}

#[derive(Clone, Debug)]
pub struct ClusterMap {
    region: BoxSpec,
    coverage: Coverage,
    margin: Margin,
    sites: Vec<u64>,
    pos: FxHashMap<u64, u32>,
    label: Vec<u64>,
    adj_start: Vec<u32>,
    adj: Vec<u32>,
    loop_members: Option<FxHashMap<u64, Vec<u64>>>,
    truncated: bool,
}

impl ClusterMap {
    /// Builds the map from labeled sites and opened edges. Edges touching an
    /// unlabeled site are ignored.
    pub fn from_edges(
        region: BoxSpec,
        coverage: Coverage,
        margin: Margin,
        mut sites: Vec<u64>,
        edges: &[(u64, u64)],
    ) -> Self {
        sites.sort_unstable();
        sites.dedup();
        let pos: FxHashMap<u64, u32> = sites.iter().enumerate().map(|(i, &s)| (s, i as u32)).collect();
        let n = sites.len();
        let mut deg = vec![0u32; n + 1];
        let mut local = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                continue;
            }
            if let (Some(&la), Some(&lb)) = (pos.get(&a), pos.get(&b)) {
                local.push((la.min(lb), la.max(lb)));
            }
        }
        local.sort_unstable();
        local.dedup();
        for &(a, b) in &local {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        let mut adj_start = vec![0u32; n + 1];
        for i in 0..n {
            adj_start[i + 1] = adj_start[i] + deg[i];
        }
        let mut fill = adj_start.clone();
        let mut adj = vec![0u32; adj_start[n] as usize];
        let mut uf = UnionFind::new(n);
        for &(a, b) in &local {
            adj[fill[a as usize] as usize] = b;
            fill[a as usize] += 1;
            adj[fill[b as usize] as usize] = a;
            fill[b as usize] += 1;
            uf.union(a, b);
        }
        for i in 0..n {
            adj[adj_start[i] as usize..adj_start[i + 1] as usize].sort_unstable();
        }
        // canonical label: smallest site index in the cluster
        let mut min_site: FxHashMap<u32, u64> = FxHashMap::default();
        for (i, &s) in sites.iter().enumerate() {
            let r = uf.find(i as u32);
            let e = min_site.entry(r).or_insert(s);
            *e = (*e).min(s);
        }
        let label = (0..n).map(|i| min_site[&uf.find(i as u32)]).collect();
        Self {
            region,
            coverage,
            margin,
            sites,
            pos,
            label,
            adj_start,
            adj,
            loop_members: None,
            truncated: false,
        }
    }

    pub fn with_loop_members(mut self, members: FxHashMap<u64, Vec<u64>>) -> Self {
        self.loop_members = Some(members);
        self
    }

    pub fn with_truncated(mut self, truncated: bool) -> Self {
        self.truncated = truncated;
        self
    }

    pub fn region(&self) -> &BoxSpec {
        &self.region
    }

    pub fn coverage(&self) -> Coverage {
        self.coverage
    }

    pub fn margin(&self) -> Margin {
        self.margin
    }

    /// Set when the configuration could not be fully resolved (exploration
    /// cap reached); observables carry a bias warning.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn sites(&self) -> &[u64] {
        &self.sites
    }

    pub fn num_labeled(&self) -> usize {
        self.sites.len()
    }

    /// Loop ids per cluster label, for loop-route configurations.
    pub fn loop_members(&self) -> Option<&FxHashMap<u64, Vec<u64>>> {
        self.loop_members.as_ref()
    }

    /// Opened edges as pairs of region indices, each listed once.
    pub fn edges(&self) -> Vec<(u64, u64)> {
        let mut out = Vec::with_capacity(self.adj.len() / 2);
        for a in 0..self.sites.len() {
            for &b in self.neighbors_local(a as u32) {
                if (a as u32) < b {
                    out.push((self.sites[a], self.sites[b as usize]));
                }
            }
        }
        out
    }

    pub fn label_of(&self, site: u64) -> Option<u64> {
        self.pos.get(&site).map(|&l| self.label[l as usize])
    }

    /// Distinct cluster labels in increasing order.
    pub fn labels(&self) -> Vec<u64> {
        let mut l = self.label.clone();
        l.sort_unstable();
        l.dedup();
        l
    }

    pub fn cluster_size(&self, label: u64) -> usize {
        self.label.iter().filter(|&&l| l == label).count()
    }

    #[inline]
    fn neighbors_local(&self, i: u32) -> &[u32] {
        &self.adj[self.adj_start[i as usize] as usize..self.adj_start[i as usize + 1] as usize]
    }

    fn site_index(&self, v: &Vertex) -> Result<u64> {
        match self.region.index(&v.0) {
            OUTSIDE => Err(Error::OutOfRegion(v.to_string())),
            i => Ok(i),
        }
    }

    /// Whether the status of `site` is known, and if so whether it is labeled.
    fn status(&self, site: u64) -> Result<bool> {
        if self.pos.contains_key(&site) {
            return Ok(true);
        }
        match self.coverage {
            Coverage::Full => Ok(false),
            Coverage::Cluster { root } if root == site => Ok(false),
            Coverage::Cluster { .. } => Err(Error::Unexplored(self.region.vertex(site).to_string())),
        }
    }

    pub fn is_labeled(&self, v: &Vertex) -> Result<bool> {
        let s = self.site_index(v)?;
        self.status(s)
    }

    fn root_covers(&self, s: u64) -> bool {
        match self.coverage {
            Coverage::Full => true,
            Coverage::Cluster { root } => root == s || self.pos.contains_key(&s),
        }
    }

    pub fn connected(&self, x: &Vertex, y: &Vertex) -> Result<bool> {
        let (sx, sy) = (self.site_index(x)?, self.site_index(y)?);
        if !self.root_covers(sx) && !self.root_covers(sy) {
            return Err(Error::Unexplored(format!("{x} and {y}")));
        }
        match (self.label_of(sx), self.label_of(sy)) {
            (Some(a), Some(b)) => Ok(a == b),
            _ => Ok(false),
        }
    }

    /// Connectivity using only opened edges with both endpoints in `sub`.
    pub fn connected_within(&self, sub: &BoxSpec, x: &Vertex, y: &Vertex) -> Result<bool> {
        if !self.region.contains_box(sub) {
            return Err(Error::OutOfRegion(format!("sub-box around {} of radius {}", sub.center(), sub.radius())));
        }
        if !sub.contains(&x.0) || !sub.contains(&y.0) {
            return Ok(false);
        }
        if !self.connected(x, y)? {
            return Ok(false);
        }
        let (sx, sy) = (self.site_index(x)?, self.site_index(y)?);
        let reach = self.reach_within(sx, sub);
        Ok(reach.contains(&sy))
    }

    /// Sites reachable from `start` through edges inside `sub`.
    pub fn reach_within(&self, start: u64, sub: &BoxSpec) -> Vec<u64> {
        let Some(&s) = self.pos.get(&start) else { return Vec::new() };
        let mut coords = vec![0i64; self.region.d()];
        let mut inside = |site: u64| {
            self.region.coords_into(site, &mut coords);
            sub.contains(&coords)
        };
        if !inside(start) {
            return Vec::new();
        }
        let mut seen = rustc_hash::FxHashSet::default();
        seen.insert(s);
        let mut queue = VecDeque::from([s]);
        let mut out = vec![start];
        while let Some(u) = queue.pop_front() {
            for &w in self.neighbors_local(u) {
                if !seen.contains(&w) && inside(self.sites[w as usize]) {
                    seen.insert(w);
                    queue.push_back(w);
                    out.push(self.sites[w as usize]);
                }
            }
        }
        out
    }

    fn origin_site(&self) -> Result<u64> {
        self.site_index(&Vertex::origin(self.region.d()))
    }

    /// Checks that `B(0, r)` respects the region's margin.
    pub fn check_margin(&self, r: u64) -> Result<()> {
        let max = self.margin.max_radius(&self.region);
        if r > max {
            return Err(Error::Margin(format!(
                "radius {r} exceeds {max} allowed in a region of radius {} ({:?})",
                self.region.radius(),
                self.margin
            )));
        }
        Ok(())
    }

    /// Largest ℓ∞ distance from the origin reached by the origin's cluster,
    /// or `None` if the origin is unlabeled.
    pub fn origin_reach(&self) -> Result<Option<u64>> {
        let o = self.origin_site()?;
        if !self.status(o)? {
            return Ok(None);
        }
        let l = self.label_of(o);
        let d = self.region.d();
        let mut coords = vec![0i64; d];
        let mut best = 0;
        for (i, &s) in self.sites.iter().enumerate() {
            if Some(self.label[i]) == l {
                self.region.coords_into(s, &mut coords);
                best = best.max(Norm::LInf.length(&coords));
            }
        }
        Ok(Some(best))
    }

    /// `0 ↔ ∂B(0, r)`. A lattice path changes the ℓ∞ norm by at most one per
    /// step, so this holds iff the cluster reaches ℓ∞ distance `r`.
    pub fn one_arm(&self, r: u64) -> Result<bool> {
        self.check_margin(r)?;
        Ok(self.origin_reach()?.is_some_and(|m| m >= r))
    }

    /// BFS distances from `x` over opened edges, stopping at depth `cap`.
    pub fn distances_from(&self, x: &Vertex, cap: u64) -> Result<FxHashMap<u64, u64>> {
        let sx = self.site_index(x)?;
        let mut dist = FxHashMap::default();
        if !self.status(sx)? {
            return Ok(dist);
        }
        let s = self.pos[&sx];
        let mut local: FxHashMap<u32, u64> = FxHashMap::default();
        local.insert(s, 0);
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let du = local[&u];
            if du == cap {
                continue;
            }
            for &w in self.neighbors_local(u) {
                if let std::collections::hash_map::Entry::Vacant(e) = local.entry(w) {
                    e.insert(du + 1);
                    queue.push_back(w);
                }
            }
        }
        for (l, d) in local {
            dist.insert(self.sites[l as usize], d);
        }
        Ok(dist)
    }

    pub fn chemical_distance(&self, x: &Vertex, y: &Vertex, cap: u64) -> Result<Distance> {
        let sy = self.site_index(y)?;
        if !self.connected(x, y)? {
            return Ok(Distance::Unreachable);
        }
        let dist = self.distances_from(x, cap)?;
        Ok(dist.get(&sy).map_or(Distance::Unreachable, |&d| Distance::Finite(d)))
    }

    pub fn intrinsic_ball(&self, center: &Vertex, r: u64) -> Result<IntrinsicBall> {
        let dist = self.distances_from(center, r)?;
        let mut pairs: Vec<(u64, u64)> = dist.into_iter().map(|(s, d)| (d, s)).collect();
        pairs.sort_unstable();
        let members: Vec<Vertex> = pairs.iter().map(|&(_, s)| self.region.vertex(s)).collect();
        let sphere = pairs.iter().filter(|&&(d, _)| d == r).map(|&(_, s)| self.region.vertex(s)).collect();
        Ok(IntrinsicBall { center: center.clone(), radius: r, members, sphere })
    }

    /// Per-vertex labels as CSV (`coords...,label`), refusing regions larger
    /// than `max_sites`.
    pub fn export_labels_csv(&self, path: &Path, max_sites: u64) -> Result<()> {
        if self.region.len() > max_sites {
            return Err(Error::MemoryBudget { required: self.region.len(), budget: max_sites });
        }
        let mut w = csv::Writer::from_path(path)?;
        let d = self.region.d();
        let mut header: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
        header.push("label".into());
        w.write_record(&header)?;
        for i in 0..self.region.len() {
            let v = self.region.vertex(i);
            let mut row: Vec<String> = v.0.iter().map(|c| c.to_string()).collect();
            row.push(match self.label_of(i) {
                Some(l) => l.to_string(),
                None if self.root_covers(i) => String::new(),
                None => "?".into(),
            });
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: i64) -> (BoxSpec, Vec<u64>) {
        let bx = BoxSpec::centered(1, n as u32).unwrap();
        let sites = (0..bx.len()).collect();
        (bx, sites)
    }

    fn v(x: i64) -> Vertex {
        Vertex(vec![x])
    }

    #[test]
    fn union_find_basics() {
        let mut uf = UnionFind::new(5);
        assert!(uf.union(0, 1));
        assert!(uf.union(3, 4));
        assert!(!uf.union(1, 0));
        assert_eq!(uf.find(0), uf.find(1));
        assert_ne!(uf.find(1), uf.find(3));
    }

    #[test]
    fn path_with_gap_outside_sub_box() {
        // 2D path (0,0)-(0,1)-(1,1)-(2,1)-(2,0): middle edges leave the sub-box {y=0 row and x ≤ 2}
        let bx = BoxSpec::centered(2, 3).unwrap();
        let p = [[0, 0], [0, 1], [1, 1], [2, 1], [2, 0]];
        let sites: Vec<u64> = p.iter().map(|c| bx.index(c)).collect();
        let edges: Vec<(u64, u64)> = sites.windows(2).map(|w| (w[0], w[1])).collect();
        let map = ClusterMap::from_edges(bx, Coverage::Full, Margin::None, sites, &edges);
        let a = Vertex(vec![0, 0]);
        let b = Vertex(vec![2, 0]);
        assert!(map.connected(&a, &b).unwrap());
        let sub = BoxSpec::new(Vertex(vec![1, -1]), 1).unwrap();
        assert!(!map.connected_within(&sub, &a, &b).unwrap());
        let big = BoxSpec::centered(2, 2).unwrap();
        assert!(map.connected_within(&big, &a, &b).unwrap());
        assert_eq!(map.chemical_distance(&a, &b, 100).unwrap(), Distance::Finite(4));
    }

    #[test]
    fn arm_of_exact_length() {
        let (bx, _) = line(6);
        let sites: Vec<u64> = (0..=3).map(|x| bx.index(&[x])).collect();
        let edges: Vec<(u64, u64)> = sites.windows(2).map(|w| (w[0], w[1])).collect();
        let map = ClusterMap::from_edges(bx, Coverage::Full, Margin::None, sites, &edges);
        assert!(map.one_arm(0).unwrap());
        assert!(map.one_arm(3).unwrap());
        assert!(!map.one_arm(4).unwrap());
        let ball = map.intrinsic_ball(&v(0), 3).unwrap();
        assert_eq!(ball.sphere, vec![v(3)]);
        assert!(map.intrinsic_ball(&v(0), 4).unwrap().sphere.is_empty());
    }

    #[test]
    fn unlabeled_origin() {
        let (bx, _) = line(4);
        let map = ClusterMap::from_edges(bx, Coverage::Full, Margin::HalfRadius, vec![], &[]);
        assert!(!map.one_arm(0).unwrap());
        assert!(!map.connected(&v(0), &v(0)).unwrap());
        assert!(matches!(map.one_arm(3), Err(Error::Margin(_))));
        assert_eq!(map.chemical_distance(&v(0), &v(1), 5).unwrap(), Distance::Unreachable);
    }

    #[test]
    fn isolated_vertex_ball() {
        let (bx, _) = line(2);
        let o = bx.index(&[0]);
        let map = ClusterMap::from_edges(bx, Coverage::Full, Margin::None, vec![o], &[]);
        let b = map.intrinsic_ball(&v(0), 1).unwrap();
        assert_eq!(b.members, vec![v(0)]);
        assert!(b.sphere.is_empty());
        assert_eq!(map.chemical_distance(&v(0), &v(0), 0).unwrap(), Distance::Finite(0));
    }

    #[test]
    fn cluster_coverage_reports_unexplored() {
        let (bx, _) = line(4);
        let s: Vec<u64> = [0, 1].iter().map(|&x| bx.index(&[x])).collect();
        let root = s[0];
        let map = ClusterMap::from_edges(bx, Coverage::Cluster { root }, Margin::Interior, s.clone(), &[(s[0], s[1])]);
        assert!(map.connected(&v(0), &v(1)).unwrap());
        assert!(!map.connected(&v(0), &v(3)).unwrap());
        assert!(matches!(map.connected(&v(2), &v(3)), Err(Error::Unexplored(_))));
    }

    #[test]
    fn labels_are_canonical() {
        let (bx, sites) = line(3);
        let e1 = vec![(5, 6), (0, 1), (1, 2)];
        let mut e2 = e1.clone();
        e2.reverse();
        let mut s2 = sites.clone();
        s2.reverse();
        let a = ClusterMap::from_edges(bx.clone(), Coverage::Full, Margin::None, sites, &e1);
        let b = ClusterMap::from_edges(bx, Coverage::Full, Margin::None, s2, &e2);
        assert_eq!(a.labels(), b.labels());
        assert_eq!(a.labels(), vec![0, 3, 4, 5]);
        assert_eq!(a.label_of(6), Some(5));
    }
}
