//! Kernels, growth functions, and convolution.

mod convolve;
mod growth;
mod kernel;

pub use convolve::{convolve, convolve_direct, convolve_fft, fft_eligible, FftConvolver};
pub(crate) use convolve::{convolve_values, direct_values};
pub use growth::{growth_eval, GrowthSpec};
pub use kernel::{l1_norm, DiscreteKernel, KernelShape, KernelSpec, Ring, RING_TRUNCATION};

use crate::error::{Error, Result};

/// `C_V = C_G * ||K||_1`, the Lipschitz constant of `f -> G(K * f)`.
pub fn lipschitz_bound(growth: &GrowthSpec, kernel: &DiscreteKernel) -> Result<f64> {
    growth
        .lipschitz_constant()
        .map(|c| c * kernel.l1_norm())
        .ok_or_else(|| Error::UnsupportedGrowth(format!("{growth:?} is not Lipschitz continuous")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lipschitz_bound_examples() {
        let norm = KernelSpec::normalized(KernelShape::ExpBump { scale: 1.0 })
            .discretize(1.0 / 16.0)
            .unwrap();
        let gol = KernelSpec::new(KernelShape::GoL).discretize(1.0).unwrap();
        assert_eq!(lipschitz_bound(&GrowthSpec::Constant(0.3), &norm).unwrap(), 0.0);
        let cv = lipschitz_bound(&GrowthSpec::GaussianBump { mu: 0.15, sigma: 0.015 }, &norm).unwrap();
        assert!((cv - 80.870_754_628).abs() < 1e-6, "{cv}");
        assert_eq!(lipschitz_bound(&GrowthSpec::Rectifier, &gol).unwrap(), 8.5);
        assert!(matches!(
            lipschitz_bound(&GrowthSpec::GoL, &gol),
            Err(Error::UnsupportedGrowth(_))
        ));
    }
}
