//! Exact numerics for the simple random walk on Z^d: kernel powers, return
//! probabilities, Green's functions and loop-measure masses. Samplers are
//! calibrated against these.

pub mod cache;
pub mod green;
pub mod kernel;
pub mod masses;
pub mod quadrature;

pub use green::{free_green, greens_function, BoxPrecision, GreenMode, GreensTable};
pub use kernel::{
    closed_walk_count, return_prob_dp, BoxKernel, FreeKernel, KernelMode, KernelTable, OffsetClasses, TorusKernel,
};
pub use masses::{
    convolution_inequality_check, loop_count_scaling_check, loop_mass_by_length, two_point_scaling_check, ALPHA,
};

use crate::error::{Error, Result};

/// Agreement required between the two return-probability routes.
pub const RETURN_PROB_TOL: f64 = 1e-9;

/// Both routes to `p_k(0,0)`: the integer walk count and the characteristic
/// function quadrature.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ReturnProb {
    pub d: usize,
    pub k: usize,
    pub dp: f64,
    pub quadrature: f64,
}

impl ReturnProb {
    pub fn discrepancy(&self) -> f64 {
        (self.dp - self.quadrature).abs()
    }
}

pub fn return_prob_both(d: usize, k: usize) -> Result<ReturnProb> {
    if (2 * d as u128).checked_pow(k as u32).is_none() {
        return Err(Error::param("k", format!("walk counts for d = {d}, k = {k} overflow 128 bits")));
    }
    let dp = return_prob_dp(d, k)?;
    let quadrature = quadrature::return_probs(d, k)[k];
    Ok(ReturnProb { d, k, dp, quadrature })
}

/// `p_k(0,0)` on Z^d, after checking that both routes agree.
pub fn return_prob(d: usize, k: usize) -> Result<f64> {
    let r = return_prob_both(d, k)?;
    if r.discrepancy() > RETURN_PROB_TOL {
        return Err(Error::StrictCheck(format!(
            "return_prob mismatch at d = {d}, k = {k}: dp {} vs quadrature {}",
            r.dp, r.quadrature
        )));
    }
    Ok(r.dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn routes_agree_for_small_walks() {
        for d in 1..=7 {
            for k in 0..=16 {
                let r = return_prob_both(d, k).unwrap();
                assert!(r.discrepancy() < RETURN_PROB_TOL, "{r:?}");
            }
        }
        assert!((return_prob(2, 4).unwrap() - 36.0 / 256.0).abs() < 1e-16);
        assert_eq!(return_prob(7, 3).unwrap(), 0.0);
    }
}
