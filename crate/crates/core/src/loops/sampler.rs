//! Rooted-loop path sampling: a random-walk bridge from the root back to
//! itself, one step at a time, from kernel tables.

use rand::Rng;

use crate::lattice::BoxSpec;
use crate::walk_oracle::{FreeKernel, TorusKernel};

/// Kernel used to steer the bridge.
#[derive(Clone, Copy, Debug)]
pub enum BridgeKernel<'a> {
    Free(&'a FreeKernel),
    Torus(&'a TorusKernel),
}

impl BridgeKernel<'_> {
    pub fn kmax(&self) -> usize {
        match self {
            BridgeKernel::Free(k) => k.kmax(),
            BridgeKernel::Torus(k) => k.kmax(),
        }
    }

    pub fn return_prob(&self, k: usize) -> f64 {
        match self {
            BridgeKernel::Free(f) => f.return_prob(k),
            BridgeKernel::Torus(t) => t.return_prob(k),
        }
    }
}

/// Samples the step directions of a closed walk of length `k` from `root`
/// under the uniform measure on such walks: from `u` with `j` steps left the
/// walk moves to `y` with probability `p_{j−1}(y, root) / (2d p_j(u, root))`.
///
/// `visit` is called on every position after the root, in order; returning
/// false aborts the walk and makes the function return `None`. Coordinates
/// are plain lattice coordinates in free mode and wrapped into `torus` in
/// torus mode.
pub fn sample_closed_walk<R: Rng>(
    kernel: BridgeKernel<'_>,
    root: &[i64],
    k: usize,
    rng: &mut R,
    mut visit: impl FnMut(&[i64]) -> bool,
) -> Option<Vec<u8>> {
    let d = root.len();
    let mut steps = Vec::with_capacity(k);
    let mut u = root.to_vec();
    let mut off = vec![0i64; d];
    let mut weights = vec![0.0f64; 2 * d];
    for j in (1..=k).rev() {
        let mut total = 0.0;
        for (dir, w) in weights.iter_mut().enumerate() {
            let axis = dir / 2;
            let sgn = if dir % 2 == 0 { -1 } else { 1 };
            *w = match kernel {
                BridgeKernel::Free(f) => {
                    for a in 0..d {
                        off[a] = root[a] - u[a];
                    }
                    off[axis] -= sgn;
                    f.p(j - 1, &off)
                }
                BridgeKernel::Torus(t) => {
                    let bx = t.box_spec();
                    u[axis] += sgn;
                    wrap(bx, &mut u, axis);
                    let w = t.p(j - 1, bx.index(&u), bx.index(root));
                    u[axis] -= sgn;
                    wrap(bx, &mut u, axis);
                    w
                }
            };
            total += *w;
        }
        debug_assert!(total > 0.0, "bridge reached a dead end");
        let mut x = rng.random::<f64>() * total;
        let mut choice = 2 * d - 1;
        for (dir, w) in weights.iter().enumerate() {
            if *w > 0.0 {
                choice = dir;
                if x < *w {
                    break;
                }
                x -= w;
            }
        }
        let axis = choice / 2;
        u[axis] += if choice % 2 == 0 { -1 } else { 1 };
        if let BridgeKernel::Torus(t) = kernel {
            wrap(t.box_spec(), &mut u, axis);
        }
        steps.push(choice as u8);
        if j > 1 && !visit(&u) {
            return None;
        }
    }
    debug_assert_eq!(u, root);
    Some(steps)
}

/// Brings coordinate `axis` back into the box, periodically.
#[inline]
pub fn wrap(bx: &BoxSpec, u: &mut [i64], axis: usize) {
    let c = bx.center().0[axis];
    let r = bx.radius() as i64;
    let side = bx.side() as i64;
    let mut v = u[axis] - c + r;
    v = v.rem_euclid(side);
    u[axis] = v - r + c;
}

/// Positions `x_0 .. x_{k−1}` of a loop.
pub fn positions(root: &[i64], steps: &[u8], torus: Option<&BoxSpec>) -> Vec<Vec<i64>> {
    let mut out = Vec::with_capacity(steps.len());
    let mut u = root.to_vec();
    for &s in steps {
        out.push(u.clone());
        let axis = s as usize / 2;
        u[axis] += if s % 2 == 0 { -1 } else { 1 };
        if let Some(bx) = torus {
            wrap(bx, &mut u, axis);
        }
    }
    out
}

/// Largest `J` such that the step sequence is `J`-fold periodic.
pub fn multiplicity(steps: &[u8]) -> u32 {
    let k = steps.len();
    for p in 1..=k {
        if k % p == 0 && (p..k).all(|i| steps[i] == steps[i - p]) {
            return (k / p) as u32;
        }
    }
    1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Domain};

    #[test]
    fn multiplicity_examples() {
        assert_eq!(multiplicity(&[0, 1]), 1);
        assert_eq!(multiplicity(&[1, 0, 1, 0]), 2);
        assert_eq!(multiplicity(&[1, 0, 1, 0, 1, 0]), 3);
        assert_eq!(multiplicity(&[1, 1, 0, 0]), 1);
    }

    #[test]
    fn closed_walks_return() {
        let fk = FreeKernel::new(3, 20).unwrap();
        let mut rng = stream(1, 0, Domain::LoopLength, &[]);
        for k in [2, 4, 10, 20] {
            for _ in 0..50 {
                let root = [3, -1, 2];
                let steps = sample_closed_walk(BridgeKernel::Free(&fk), &root, k, &mut rng, |_| true).unwrap();
                assert_eq!(steps.len(), k);
                let mut u = root.to_vec();
                for s in &steps {
                    u[*s as usize / 2] += if s % 2 == 0 { -1 } else { 1 };
                }
                assert_eq!(u, root);
            }
        }
    }

    #[test]
    fn length_four_loops_are_uniform() {
        // all 36 closed walks of length 4 in d = 2 are equally likely
        let fk = FreeKernel::new(2, 4).unwrap();
        let mut rng = stream(2, 0, Domain::LoopLength, &[]);
        let mut counts = std::collections::HashMap::new();
        let n = 72_000;
        for _ in 0..n {
            let s = sample_closed_walk(BridgeKernel::Free(&fk), &[0, 0], 4, &mut rng, |_| true).unwrap();
            *counts.entry(s).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 36);
        let expect = n as f64 / 36.0;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
        // 35 degrees of freedom, p = 0.001 quantile is about 66.6
        assert!(chi2 < 66.6, "chi2 {chi2}");
    }

    #[test]
    fn torus_walks_wrap() {
        let bx = BoxSpec::centered(1, 1).unwrap();
        let tk = TorusKernel::new(&bx, 6).unwrap();
        let mut rng = stream(3, 0, Domain::LoopLength, &[]);
        let mut wound = false;
        for _ in 0..500 {
            let s = sample_closed_walk(BridgeKernel::Torus(&tk), &[1], 3, &mut rng, |u| bx.contains(u)).unwrap();
            wound |= s.iter().all(|&x| x == s[0]);
        }
        // length-3 loops exist only by winding around the 3-cycle
        assert!(wound);
    }
}
