//! Invariant checks for chain operations over random loop configurations.

use serde::Serialize;

use super::replicate;
use crate::chains::{
    chain_connects, is_minimal, is_sequence_for, loop_sequence_of_path, minimal_sequence, random_instance,
    simple_geodesic_exact, simplify_chain, GeodesicLimits,
};
use crate::cluster::Distance;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, Serialize)]
pub struct CheckCount {
    pub passed: u64,
    pub total: u64,
}

impl CheckCount {
    fn add(&mut self, ok: bool) {
        self.total += 1;
        self.passed += ok as u64;
    }

    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ChainSuiteReport {
    pub instances: u64,
    /// Instances with at least one covered edge.
    pub used: u64,
    pub simple_chain: CheckCount,
    pub minimality: CheckCount,
    pub size_bound: CheckCount,
    pub geodesic_order: CheckCount,
    /// Fragments too large for the exact geodesic search.
    pub geodesic_skipped: u64,
    pub failures: Vec<String>,
}

impl ChainSuiteReport {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty()
            && self.simple_chain.all_passed()
            && self.minimality.all_passed()
            && self.size_bound.all_passed()
            && self.geodesic_order.all_passed()
    }
}

#[derive(Default)]
struct Outcome {
    used: bool,
    simple: Option<bool>,
    minimal: Option<bool>,
    bound: Option<bool>,
    geodesic: Option<bool>,
    skipped: bool,
    failure: Option<String>,
}

fn check_one(seed: u64, index: u64, max_len: usize, limits: GeodesicLimits) -> Result<Outcome> {
    let mut out = Outcome::default();
    let Some(inst) = random_instance(seed, index, max_len)? else { return Ok(out) };
    out.used = true;
    let (objs, path) = (&inst.objects, &inst.path);
    let chain = loop_sequence_of_path(path, objs)?;

    let (a, b) = (std::slice::from_ref(path.start()), std::slice::from_ref(path.end()));
    let simple = simplify_chain(&chain, a, b, objs)?;
    let set = chain.set();
    let ok = simple.is_simple() && chain_connects(&simple, a, b, objs) && simple.set().iter().all(|id| set.binary_search(id).is_ok());
    out.simple = Some(ok);
    if !ok {
        out.failure = Some(format!("instance {index}: simplified chain {:?} from {:?} is invalid", simple.sequence, chain.sequence));
    }

    let minimal = match minimal_sequence(path, &chain, objs) {
        Ok(m) => m,
        Err(Error::StrictCheck(msg)) => {
            out.bound = Some(false);
            out.failure = Some(format!("instance {index}: {msg}"));
            return Ok(out);
        }
        Err(e) => return Err(e),
    };
    let ok = is_sequence_for(path, &minimal, objs) && is_minimal(path, &minimal, objs);
    out.minimal = Some(ok);
    if !ok {
        out.failure = Some(format!("instance {index}: minimal sequence {:?} has a removable member", minimal.sequence));
    }
    let ok = minimal.set().len() <= 3 * path.len().max(1);
    out.bound = Some(ok);

    // exact search on the fragment the minimal chain spans
    let fragment = objs.restrict(&minimal.set());
    match simple_geodesic_exact(&fragment, path.start(), path.end(), limits) {
        Ok(g) => {
            let ok = match (g.ordinary, g.simple) {
                (Distance::Finite(o), Distance::Finite(s)) => o <= s && s <= path.len() as u64,
                _ => false,
            };
            out.geodesic = Some(ok);
            if !ok {
                out.failure = Some(format!("instance {index}: geodesic pair {g:?} on a path of {} edges", path.len()));
            }
        }
        Err(Error::LimitsExceeded(_)) => out.skipped = true,
        Err(e) => return Err(e),
    }
    Ok(out)
}

/// Runs every check on `instances` random configurations.
pub fn run_chain_suite(seed: u64, instances: u64, max_len: usize, limits: GeodesicLimits, threads: usize) -> Result<ChainSuiteReport> {
    let outcomes = replicate(instances, threads, |i| check_one(seed, i, max_len, limits))?;
    let mut rep = ChainSuiteReport { instances, ..Default::default() };
    for o in outcomes {
        rep.used += o.used as u64;
        for (slot, v) in [
            (&mut rep.simple_chain, o.simple),
            (&mut rep.minimality, o.minimal),
            (&mut rep.size_bound, o.bound),
            (&mut rep.geodesic_order, o.geodesic),
        ] {
            if let Some(ok) = v {
                slot.add(ok);
            }
        }
        rep.geodesic_skipped += o.skipped as u64;
        rep.failures.extend(o.failure);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let rep = run_chain_suite(11, 60, 8, GeodesicLimits::default(), 2).unwrap();
        assert!(rep.used > 30, "{rep:?}");
        assert!(rep.all_passed(), "{:?}", rep.failures);
        assert!(rep.geodesic_order.total > 0);
    }
}
