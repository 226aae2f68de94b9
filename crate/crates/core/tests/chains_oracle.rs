// Exact geodesics against exhaustive enumeration of self-avoiding paths,
// and chain operations against brute-force segmentations.

use std::collections::{BTreeMap, BTreeSet};

use cable_lab::chains::{
    is_minimal, is_sequence_for, loop_sequence_of_path, minimal_sequence, random_instance, simple_geodesic_exact,
    GeodesicLimits, GluedChain, LatticePath, ObjectSet,
};
use cable_lab::cluster::Distance;
use cable_lab::Vertex;

type Edge = (Vertex, Vertex);

fn key(a: &Vertex, b: &Vertex) -> Edge {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

struct Cover {
    /// objects covering each edge
    by_edge: BTreeMap<Edge, Vec<u64>>,
    adj: BTreeMap<Vertex, BTreeSet<Vertex>>,
}

fn cover(objs: &ObjectSet) -> Cover {
    let mut by_edge: BTreeMap<Edge, Vec<u64>> = BTreeMap::new();
    let mut adj: BTreeMap<Vertex, BTreeSet<Vertex>> = BTreeMap::new();
    for o in objs.objects() {
        for (a, b) in objs.edges_of(o.id).unwrap() {
            by_edge.entry(key(&a, &b)).or_default().push(o.id);
            adj.entry(a.clone()).or_default().insert(b.clone());
            adj.entry(b).or_default().insert(a);
        }
    }
    Cover { by_edge, adj }
}

/// Whether edges `i..` of `path` split into runs, each covered by one
/// object not in `used`.
fn simple_split(path: &[Vertex], i: usize, used: &mut Vec<u64>, c: &Cover) -> bool {
    if i + 1 >= path.len() {
        return true;
    }
    for &o in &c.by_edge[&key(&path[i], &path[i + 1])] {
        if used.contains(&o) {
            continue;
        }
        used.push(o);
        let mut j = i;
        while j + 1 < path.len() && c.by_edge[&key(&path[j], &path[j + 1])].contains(&o) {
            j += 1;
            if simple_split(path, j, used, c) {
                used.pop();
                return true;
            }
        }
        used.pop();
    }
    false
}

/// Shortest self-avoiding covered path, and shortest admitting a simple
/// chain, by enumerating every self-avoiding path of at most `max_len`
/// edges.
fn brute_geodesics(c: &Cover, x: &Vertex, y: &Vertex, max_len: usize) -> (Option<usize>, Option<usize>) {
    fn go(c: &Cover, path: &mut Vec<Vertex>, y: &Vertex, max_len: usize, best: &mut (Option<usize>, Option<usize>)) {
        let cur = path.last().unwrap().clone();
        if &cur == y {
            let len = path.len() - 1;
            best.0 = Some(best.0.map_or(len, |b: usize| b.min(len)));
            if best.1.is_none_or(|b| len < b) && simple_split(path, 0, &mut Vec::new(), c) {
                best.1 = Some(len);
            }
            return;
        }
        if path.len() > max_len {
            return;
        }
        if let Some(ns) = c.adj.get(&cur) {
            for n in ns {
                if !path.contains(n) {
                    path.push(n.clone());
                    go(c, path, y, max_len, best);
                    path.pop();
                }
            }
        }
    }
    let mut best = (None, None);
    if x == y {
        return (Some(0), Some(0));
    }
    go(c, &mut vec![x.clone()], y, max_len, &mut best);
    best
}

fn as_opt(d: Distance) -> Option<usize> {
    d.finite().map(|v| v as usize)
}

#[test]
fn exact_geodesics_match_enumeration() {
    let mut compared = 0;
    let mut strict_gap = 0;
    for i in 0..200 {
        let Some(inst) = random_instance(21, i, 8).unwrap() else { continue };
        let chain = loop_sequence_of_path(&inst.path, &inst.objects).unwrap();
        let frag = inst.objects.restrict(&chain.set());
        let c = cover(&frag);
        let limits = GeodesicLimits::default();
        if frag.len() > limits.max_objects || frag.num_vertices() > limits.max_vertices {
            continue;
        }
        let verts: Vec<Vertex> = c.adj.keys().cloned().collect();
        let x = inst.path.start();
        for y in verts.iter().step_by(3) {
            let g = simple_geodesic_exact(&frag, x, y, limits).unwrap();
            let (d, ds) = brute_geodesics(&c, x, y, 14);
            // ordinary distance beyond 14 cannot be confirmed by enumeration
            if d.is_some() || as_opt(g.ordinary).is_some_and(|v| v <= 14) {
                assert_eq!(as_opt(g.ordinary), d, "instance {i}, {x} -> {y}");
            }
            if as_opt(g.simple).is_none_or(|v| v <= 14) {
                assert_eq!(as_opt(g.simple), ds, "instance {i}, {x} -> {y}");
            }
            if let (Some(a), Some(b)) = (d, ds) {
                assert!(a <= b);
                strict_gap += (a < b) as usize;
            }
            compared += 1;
        }
    }
    assert!(compared > 200, "{compared}");
    println!("{compared} pairs compared, {strict_gap} with a strictly longer simple geodesic");
}

/// Every set of objects, by brute force: which ones cover the path.
fn covering_sets(path: &LatticePath, ids: &[u64], c: &Cover) -> Vec<Vec<u64>> {
    let n = ids.len();
    let vs = path.vertices();
    (0u32..1 << n)
        .map(|mask| (0..n).filter(|b| mask >> b & 1 == 1).map(|b| ids[b]).collect::<Vec<u64>>())
        .filter(|s| vs.windows(2).all(|w| c.by_edge[&key(&w[0], &w[1])].iter().any(|o| s.contains(o))))
        .collect()
}

#[test]
fn minimal_sequences_match_brute_force() {
    let mut checked = 0;
    for i in 0..300 {
        let Some(inst) = random_instance(33, i, 8).unwrap() else { continue };
        let (objs, path) = (&inst.objects, &inst.path);
        let chain = loop_sequence_of_path(path, objs).unwrap();
        let c = cover(objs);
        // every object touching a path edge
        let mut ids: Vec<u64> = path
            .vertices()
            .windows(2)
            .flat_map(|w| c.by_edge[&key(&w[0], &w[1])].clone())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() > 14 {
            continue;
        }
        let sets = covering_sets(path, &ids, &c);
        let min = minimal_sequence(path, &chain, objs).unwrap();
        let set = min.set();
        assert!(sets.contains(&set), "instance {i}");
        // no proper subset covers
        assert!(sets.iter().all(|s| s == &set || !s.iter().all(|x| set.contains(x))), "instance {i}");
        assert!(is_minimal(path, &min, objs));
        assert!(is_sequence_for(path, &min, objs));
        // the smallest cover is no larger than this one and within 3|ℓ|
        let smallest = sets.iter().map(Vec::len).min().unwrap();
        assert!(smallest <= set.len() && set.len() <= 3 * path.len());
        checked += 1;
    }
    assert!(checked > 100, "{checked}");
}

#[test]
fn sequence_membership_is_exact() {
    for i in 0..100 {
        let Some(inst) = random_instance(44, i, 6).unwrap() else { continue };
        let (objs, path) = (&inst.objects, &inst.path);
        let chain = loop_sequence_of_path(path, objs).unwrap();
        assert!(is_sequence_for(path, &chain, objs));
        // an object off the final edge cannot end the sequence
        let c = cover(objs);
        let vs = path.vertices();
        let last = &c.by_edge[&key(&vs[vs.len() - 2], &vs[vs.len() - 1])];
        if let Some(o) = objs.objects().iter().map(|o| o.id).find(|id| !last.contains(id)) {
            let mut longer = chain.sequence.clone();
            longer.push(o);
            assert!(!is_sequence_for(path, &GluedChain { sequence: longer }, objs), "instance {i}");
        }
    }
}
