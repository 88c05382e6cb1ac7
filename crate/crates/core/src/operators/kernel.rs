use std::sync::{Arc, Mutex};

use crate::clipcore::ClipBounds;
use crate::error::{Error, Result};
use crate::field::{MultiField, ScalarField};

use super::convolve::FftConvolver;

/// Relative cutoff below which ring-sum Gaussians are truncated.
pub const RING_TRUNCATION: f64 = 1e-12;

/// One Gaussian shell `b * exp(-(r / c - a)^2 / (2 w))` of a ring-sum kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ring {
    pub center: f64,
    pub amplitude: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelShape {
    /// The 3x3 Moore table: 1 on the eight neighbors, 1/2 at the center.
    GoL,
    /// `exp(4 - 1 / (rho (1 - rho)))` for `0 < rho = r / scale < 1`.
    ExpBump { scale: f64 },
    /// `sum_i b_i exp(-(r / c - a_i)^2 / (2 w_i))`.
    RingSum { c: f64, rings: Vec<Ring> },
    /// Explicit `(2 radius + 1)^2` weights, row-major, used as-is.
    Table { radius: usize, weights: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub shape: KernelShape,
    /// Rescale the discrete weights to unit L1 norm.
    pub normalize: bool,
}

impl KernelSpec {
    pub fn new(shape: KernelShape) -> Self {
        KernelSpec {
            shape,
            normalize: false,
        }
    }

    pub fn normalized(shape: KernelShape) -> Self {
        KernelSpec { shape, normalize: true }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.shape {
            KernelShape::GoL => Ok(()),
            KernelShape::ExpBump { scale } => {
                if !(*scale > 0.0) || !scale.is_finite() {
                    return Err(Error::InvalidKernel(format!("exp bump scale {scale} must be positive")));
                }
                Ok(())
            }
            KernelShape::RingSum { c, rings } => {
                if rings.is_empty() {
                    return Err(Error::InvalidKernel("ring sum needs k >= 1 rings".into()));
                }
                if !(*c > 0.0) || !c.is_finite() {
                    return Err(Error::InvalidKernel(format!("ring sum scale c = {c} must be positive")));
                }
                for (i, r) in rings.iter().enumerate() {
                    if !(r.width > 0.0) || !r.center.is_finite() || !r.amplitude.is_finite() {
                        return Err(Error::InvalidKernel(format!(
                            "ring {i}: need finite a, b and w > 0 (a = {}, b = {}, w = {})",
                            r.center, r.amplitude, r.width
                        )));
                    }
                }
                Ok(())
            }
            KernelShape::Table { radius, weights } => {
                let side = 2 * radius + 1;
                if weights.len() != side * side {
                    return Err(Error::InvalidKernel(format!(
                        "table of radius {radius} needs {} weights, got {}",
                        side * side,
                        weights.len()
                    )));
                }
                if weights.iter().any(|w| !w.is_finite()) {
                    return Err(Error::InvalidKernel("table weights must be finite".into()));
                }
                Ok(())
            }
        }
    }

    /// Analytic kernel value at a point in space units. `None` for the
    /// table-defined shapes, which have no continuum counterpart.
    pub fn evaluate(&self, x: f64, y: f64) -> Option<f64> {
        let r = (x * x + y * y).sqrt();
        match &self.shape {
            KernelShape::ExpBump { scale } => Some(exp_bump(r / scale)),
            KernelShape::RingSum { c, rings } => Some(ring_sum(*c, rings, r)),
            KernelShape::GoL | KernelShape::Table { .. } => None,
        }
    }

    /// Midpoint quadrature on a grid of spacing `dx`: the weight at offset
    /// `(i, j)` is `dx^2 K(i dx, j dx)`, so the discrete sum approximates the
    /// convolution integral.
    pub fn discretize(&self, dx: f64) -> Result<DiscreteKernel> {
        self.validate()?;
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::InvalidArgument(format!("dx = {dx} must be positive")));
        }
        let (radius, mut weights, cell) = match &self.shape {
            KernelShape::GoL => {
                let mut w = vec![1.0; 9];
                w[4] = 0.5;
                (1, w, 1.0)
            }
            KernelShape::Table { radius, weights } => (*radius, weights.clone(), dx),
            KernelShape::ExpBump { scale } => {
                // Identically zero from rho = 1 on.
                let radius = (scale / dx).ceil() as usize;
                let w = radial_weights(radius, dx, f64::INFINITY, |r| exp_bump(r / scale));
                (radius, w, dx)
            }
            KernelShape::RingSum { c, rings } => {
                let cutoff = ring_cutoff(*c, rings);
                let radius = (cutoff / dx).ceil() as usize;
                let w = radial_weights(radius, dx, cutoff, |r| ring_sum(*c, rings, r));
                (radius, w, dx)
            }
        };
        let l1 = l1_in_order(&weights);
        if !(l1 > 0.0) {
            return Err(Error::DegenerateKernel(format!(
                "all weights vanish at dx = {dx}; the kernel support covers no cell"
            )));
        }
        let l1 = if self.normalize {
            for w in weights.iter_mut() {
                *w /= l1;
            }
            l1_in_order(&weights)
        } else {
            l1
        };
        Ok(DiscreteKernel::from_weights(radius, weights, l1, cell))
    }
}

fn exp_bump(rho: f64) -> f64 {
    if rho > 0.0 && rho < 1.0 {
        (4.0 - 1.0 / (rho * (1.0 - rho))).exp()
    } else {
        0.0
    }
}

fn ring_sum(c: f64, rings: &[Ring], r: f64) -> f64 {
    rings
        .iter()
        .map(|ring| {
            let z = r / c - ring.center;
            ring.amplitude * (-(z * z) / (2.0 * ring.width)).exp()
        })
        .sum()
}

/// Radius (space units) beyond which every ring term is below
/// `RING_TRUNCATION * peak / k`, hence the sum below `RING_TRUNCATION * peak`.
fn ring_cutoff(c: f64, rings: &[Ring]) -> f64 {
    let far = rings
        .iter()
        .map(|r| c * (r.center.max(0.0) + 40.0 * r.width.sqrt()))
        .fold(0.0, f64::max);
    let samples = 20_000;
    let peak = (0..=samples)
        .map(|i| ring_sum(c, rings, far * i as f64 / samples as f64).abs())
        .fold(0.0, f64::max);
    let k = rings.len() as f64;
    rings
        .iter()
        .map(|r| {
            let ratio = k * r.amplitude.abs() / (RING_TRUNCATION * peak);
            if ratio > 1.0 {
                c * (r.center.max(0.0) + (2.0 * r.width * ratio.ln()).sqrt())
            } else {
                c * r.center.max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// `dx^2 K(|o| dx)` on the `(2 radius + 1)^2` offset square, zero beyond
/// `cutoff`.
fn radial_weights(radius: usize, dx: f64, cutoff: f64, k: impl Fn(f64) -> f64) -> Vec<f64> {
    let side = 2 * radius + 1;
    let r = radius as isize;
    let mut w = Vec::with_capacity(side * side);
    for oy in -r..=r {
        for ox in -r..=r {
            let dist = ((ox * ox + oy * oy) as f64).sqrt() * dx;
            w.push(if dist <= cutoff { dx * dx * k(dist) } else { 0.0 });
        }
    }
    w
}

/// `sum |w|`, left to right.
fn l1_in_order(weights: &[f64]) -> f64 {
    weights.iter().fold(0.0, |acc, w| acc + w.abs())
}

/// A truncated, quadrature-weighted kernel table centered at `(radius, radius)`.
#[derive(Debug, Clone)]
pub struct DiscreteKernel {
    radius: usize,
    weights: Vec<f64>,
    l1_norm: f64,
    dx: f64,
    /// Nonzero taps `(ox, oy, w)` in row-major order.
    taps: Vec<(isize, isize, f64)>,
    fft_cache: Arc<Mutex<Vec<Arc<FftConvolver>>>>,
}

impl PartialEq for DiscreteKernel {
    fn eq(&self, other: &Self) -> bool {
        self.radius == other.radius
            && self.weights == other.weights
            && self.l1_norm == other.l1_norm
            && self.dx == other.dx
    }
}

impl DiscreteKernel {
    fn from_weights(radius: usize, weights: Vec<f64>, l1_norm: f64, dx: f64) -> Self {
        let r = radius as isize;
        let side = 2 * radius + 1;
        let taps = weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != 0.0)
            .map(|(i, &w)| ((i % side) as isize - r, (i / side) as isize - r, w))
            .collect();
        DiscreteKernel {
            radius,
            weights,
            l1_norm,
            dx,
            taps,
            fft_cache: Arc::new(Mutex::new(Vec::new())),
        }
    }

    /// Builds a kernel from explicit weights; equivalent to discretizing a
    /// `Table` spec.
    pub fn from_table(radius: usize, weights: Vec<f64>, dx: f64) -> Result<Self> {
        KernelSpec::new(KernelShape::Table { radius, weights }).discretize(dx)
    }

    #[inline]
    pub fn radius_cells(&self) -> usize {
        self.radius
    }

    #[inline]
    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at offset `(ox, oy)` from the center.
    pub fn weight(&self, ox: isize, oy: isize) -> f64 {
        let r = self.radius as isize;
        if ox.abs() > r || oy.abs() > r {
            return 0.0;
        }
        self.weights[((oy + r) as usize) * self.side() + (ox + r) as usize]
    }

    /// Cached `sum |w|`.
    #[inline]
    pub fn l1_norm(&self) -> f64 {
        self.l1_norm
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub(crate) fn taps(&self) -> &[(isize, isize, f64)] {
        &self.taps
    }

    /// Largest Euclidean length (cells) of an offset carrying a nonzero weight.
    pub fn reach_cells(&self) -> f64 {
        self.taps
            .iter()
            .map(|&(ox, oy, _)| ((ox * ox + oy * oy) as f64).sqrt())
            .fold(0.0, f64::max)
    }

    /// Radius `R` (space units) of an open ball containing the kernel support:
    /// `(radius_cells + 1/2) dx` for radially truncated kernels, and half a
    /// cell beyond the farthest nonzero tap when corner taps reach further.
    pub fn support_radius_space(&self) -> f64 {
        let reach = self.reach_cells();
        if reach <= self.radius as f64 {
            (self.radius as f64 + 0.5) * self.dx
        } else {
            (reach + 0.5) * self.dx
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.weights.iter().all(|&w| w >= 0.0)
    }

    pub fn center_weight(&self) -> f64 {
        self.weight(0, 0)
    }

    /// The weight table as a one-channel field container.
    pub fn to_field(&self) -> Result<MultiField> {
        let field = ScalarField::new(
            self.side(),
            self.side(),
            self.dx,
            ClipBounds::UNBOUNDED,
            self.weights.clone(),
        )?;
        MultiField::single(field)
    }

    pub(crate) fn fft_for(&self, width: usize, height: usize) -> Arc<FftConvolver> {
        let mut cache = self.fft_cache.lock().expect("fft cache poisoned");
        if let Some(c) = cache.iter().find(|c| c.width() == width && c.height() == height) {
            return Arc::clone(c);
        }
        let conv = Arc::new(FftConvolver::new(self, width, height));
        cache.push(Arc::clone(&conv));
        conv
    }
}

/// `sum |w|` of the kernel.
pub fn l1_norm(kernel: &DiscreteKernel) -> f64 {
    kernel.l1_norm()
}
