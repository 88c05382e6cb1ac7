//! Circular convolution on the periodic grid.
//!
//! `out(x) = sum_o K(o) f(x - o)` with indices wrapped on the torus. The direct
//! path is the reference; the FFT path handles power-of-two grids.

use std::sync::Arc;

use rayon::prelude::*;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::ScalarField;

use super::kernel::DiscreteKernel;

fn check_fits(f: &ScalarField, k: &DiscreteKernel) -> Result<()> {
    if k.side() > f.width() || k.side() > f.height() {
        return Err(Error::Dimension(format!(
            "kernel diameter {} exceeds the {}x{} grid",
            k.side(),
            f.width(),
            f.height()
        )));
    }
    Ok(())
}

/// True when the FFT path applies to this grid.
pub fn fft_eligible(width: usize, height: usize) -> bool {
    width.is_power_of_two() && height.is_power_of_two()
}

/// Reference convolution. Each output cell sums the nonzero taps in
/// row-major offset order, so results do not depend on the thread count.
pub fn convolve_direct(f: &ScalarField, k: &DiscreteKernel) -> Result<ScalarField> {
    check_fits(f, k)?;
    Ok(f.like_unbounded(direct_values(f, k)))
}

pub(crate) fn direct_values(f: &ScalarField, k: &DiscreteKernel) -> Vec<f64> {
    let (w, h) = (f.width(), f.height());
    let src = f.values();
    let taps = k.taps();
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for &(ox, oy, weight) in taps {
            let sy = (y as isize - oy).rem_euclid(h as isize) as usize;
            let src_row = &src[sy * w..(sy + 1) * w];
            let shift = ox.rem_euclid(w as isize) as usize;
            // row[x] += weight * src_row[(x - ox) mod w]
            let (head, tail) = row.split_at_mut(shift);
            for (o, s) in tail.iter_mut().zip(&src_row[..w - shift]) {
                *o += weight * s;
            }
            for (o, s) in head.iter_mut().zip(&src_row[w - shift..]) {
                *o += weight * s;
            }
        }
    });
    out
}

/// Convolution through the discrete Fourier transform. Grids whose sides
/// are not powers of two fall back to [`convolve_direct`].
pub fn convolve_fft(f: &ScalarField, k: &DiscreteKernel) -> Result<ScalarField> {
    check_fits(f, k)?;
    if !fft_eligible(f.width(), f.height()) {
        return convolve_direct(f, k);
    }
    let conv = k.fft_for(f.width(), f.height());
    Ok(f.like_unbounded(conv.apply(f.values())))
}

/// FFT on eligible grids, direct otherwise. This is the path the steppers use.
pub fn convolve(f: &ScalarField, k: &DiscreteKernel) -> Result<ScalarField> {
    convolve_fft(f, k)
}

pub(crate) fn convolve_values(f: &ScalarField, k: &DiscreteKernel) -> Result<Vec<f64>> {
    check_fits(f, k)?;
    if fft_eligible(f.width(), f.height()) {
        Ok(k.fft_for(f.width(), f.height()).apply(f.values()))
    } else {
        Ok(direct_values(f, k))
    }
}

/// A planned 2-D real FFT convolution for one grid size: row transforms are
/// real-to-complex, column transforms complex. The kernel spectrum is stored
/// column-major and pre-divided by the transform size.
pub struct FftConvolver {
    width: usize,
    height: usize,
    spectrum: Vec<Complex64>,
    row_forward: Arc<dyn RealToComplex<f64>>,
    row_inverse: Arc<dyn ComplexToReal<f64>>,
    col_forward: Arc<dyn Fft<f64>>,
    col_inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftConvolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftConvolver")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl FftConvolver {
    pub(crate) fn new(kernel: &DiscreteKernel, width: usize, height: usize) -> Self {
        let mut real = RealFftPlanner::<f64>::new();
        let mut complex = FftPlanner::<f64>::new();
        let mut conv = FftConvolver {
            width,
            height,
            spectrum: Vec::new(),
            row_forward: real.plan_fft_forward(width),
            row_inverse: real.plan_fft_inverse(width),
            col_forward: complex.plan_fft_forward(height),
            col_inverse: complex.plan_fft_inverse(height),
        };
        // Zero-embedded kernel: tap at offset o lands on cell o mod (w, h).
        let mut embedded = vec![0.0; width * height];
        for &(ox, oy, w) in kernel.taps() {
            let x = ox.rem_euclid(width as isize) as usize;
            let y = oy.rem_euclid(height as isize) as usize;
            embedded[y * width + x] += w;
        }
        let scale = 1.0 / (width * height) as f64;
        let mut spectrum = conv.forward(&embedded);
        for c in spectrum.iter_mut() {
            *c *= scale;
        }
        conv.spectrum = spectrum;
        conv
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    fn bins(&self) -> usize {
        self.width / 2 + 1
    }

    /// Row r2c then column c2c; result column-major (`bins` columns of `height`).
    fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let (w, h, nb) = (self.width, self.height, self.bins());
        let mut rows = vec![Complex64::default(); h * nb];
        rows.par_chunks_mut(nb).zip(values.par_chunks(w)).for_each_init(
            || vec![0.0; w],
            |scratch, (out, src)| {
                scratch.copy_from_slice(src);
                self.row_forward
                    .process(scratch, out)
                    .expect("row forward transform sizes match");
            },
        );
        let mut cols = transpose(&rows, h, nb);
        cols.par_chunks_mut(h).for_each(|col| self.col_forward.process(col));
        cols
    }

    pub(crate) fn apply(&self, values: &[f64]) -> Vec<f64> {
        let (w, h, nb) = (self.width, self.height, self.bins());
        let mut cols = self.forward(values);
        cols.par_chunks_mut(h)
            .zip(self.spectrum.par_chunks(h))
            .for_each(|(col, k)| {
                for (a, b) in col.iter_mut().zip(k) {
                    *a *= b;
                }
                self.col_inverse.process(col);
            });
        let mut rows = transpose(&cols, nb, h);
        let mut out = vec![0.0; w * h];
        out.par_chunks_mut(w)
            .zip(rows.par_chunks_mut(nb))
            .for_each(|(dst, spec)| {
                // A real signal has real DC and Nyquist bins.
                spec[0].im = 0.0;
                if w % 2 == 0 {
                    spec[nb - 1].im = 0.0;
                }
                self.row_inverse
                    .process(spec, dst)
                    .expect("row inverse transform sizes match");
            });
        out
    }
}

/// `src` is `rows x cols` row-major; returns `cols x rows` row-major.
fn transpose(src: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = src[r * cols + c];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clipcore::ClipBounds;
    use crate::field::{random_field, single_cell_field, sup_distance};
    use crate::operators::kernel::{KernelShape, KernelSpec, Ring};

    fn ring_kernel(dx: f64) -> DiscreteKernel {
        KernelSpec::normalized(KernelShape::RingSum {
            c: 0.25,
            rings: vec![
                Ring {
                    center: 0.5,
                    amplitude: 1.0,
                    width: 0.02,
                },
                Ring {
                    center: 0.9,
                    amplitude: 0.5,
                    width: 0.01,
                },
            ],
        })
        .discretize(dx)
        .unwrap()
    }

    /// Naive loop over every kernel offset, zero weights included.
    fn quadruple_loop(f: &ScalarField, k: &DiscreteKernel) -> Vec<f64> {
        let (w, h) = (f.width() as isize, f.height() as isize);
        let r = k.radius_cells() as isize;
        let mut out = vec![0.0; (w * h) as usize];
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for oy in -r..=r {
                    for ox in -r..=r {
                        let sx = (x - ox).rem_euclid(w);
                        let sy = (y - oy).rem_euclid(h);
                        acc += k.weight(ox, oy) * f.values()[(sy * w + sx) as usize];
                    }
                }
                out[(y * w + x) as usize] = acc;
            }
        }
        out
    }

    #[test]
    fn constant_field_scales_by_l1() {
        let k = ring_kernel(1.0 / 16.0);
        let f = ScalarField::filled(32, 32, 1.0 / 16.0, ClipBounds::UNIT, 0.25).unwrap();
        let out = convolve_direct(&f, &k).unwrap();
        for &v in out.values() {
            assert!((v - 0.25 * k.l1_norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn impulse_response_is_kernel_stamp() {
        let k = DiscreteKernel::from_table(1, (1..=9).map(f64::from).collect(), 1.0).unwrap();
        let f = single_cell_field(8, 8, 1.0, ClipBounds::UNIT, 3, 4, 1.0).unwrap();
        let out = convolve_direct(&f, &k).unwrap();
        for oy in -1isize..=1 {
            for ox in -1isize..=1 {
                let x = (3 + ox) as usize;
                let y = (4 + oy) as usize;
                assert_eq!(out.get(x, y), k.weight(ox, oy));
            }
        }
        assert_eq!(out.values().iter().filter(|v| **v != 0.0).count(), 9);
    }

    #[test]
    fn direct_equals_quadruple_loop() {
        let k = ring_kernel(1.0 / 16.0);
        let f = random_field(32, 32, 1.0 / 16.0, ClipBounds::UNIT, 9).unwrap();
        assert_eq!(convolve_direct(&f, &k).unwrap().values(), &quadruple_loop(&f, &k)[..]);
        let g = random_field(30, 26, 1.0 / 16.0, ClipBounds::UNIT, 10).unwrap();
        assert_eq!(convolve_direct(&g, &k).unwrap().values(), &quadruple_loop(&g, &k)[..]);
    }

    #[test]
    fn fft_matches_direct() {
        let k = ring_kernel(1.0 / 16.0);
        for seed in 0..5 {
            let f = random_field(64, 64, 1.0 / 16.0, ClipBounds::UNIT, seed).unwrap();
            let a = convolve_fft(&f, &k).unwrap();
            let b = convolve_direct(&f, &k).unwrap();
            assert!(sup_distance(&a, &b).unwrap() <= 1e-10);
        }
        // Non-square grid.
        let f = random_field(64, 32, 1.0 / 16.0, ClipBounds::UNIT, 77).unwrap();
        let a = convolve_fft(&f, &k).unwrap();
        let b = convolve_direct(&f, &k).unwrap();
        assert!(sup_distance(&a, &b).unwrap() <= 1e-10);
    }

    #[test]
    fn fft_impulse_and_zero() {
        let k = KernelSpec::new(KernelShape::GoL).discretize(1.0).unwrap();
        let f = single_cell_field(16, 16, 1.0, ClipBounds::UNIT, 0, 15, 1.0).unwrap();
        let a = convolve_fft(&f, &k).unwrap();
        let b = convolve_direct(&f, &k).unwrap();
        assert!(sup_distance(&a, &b).unwrap() <= 1e-12);
        let zero = ScalarField::filled(16, 16, 1.0, ClipBounds::UNIT, 0.0).unwrap();
        let z = convolve_fft(&zero, &k).unwrap();
        assert!(z.values().iter().all(|v| v.abs() <= 1e-14));
    }

    #[test]
    fn non_power_of_two_falls_back_to_direct() {
        let k = ring_kernel(1.0 / 16.0);
        let f = random_field(48, 40, 1.0 / 16.0, ClipBounds::UNIT, 2).unwrap();
        assert_eq!(
            convolve_fft(&f, &k).unwrap().values(),
            convolve_direct(&f, &k).unwrap().values()
        );
    }

    #[test]
    fn kernel_larger_than_grid_rejected() {
        let k = ring_kernel(1.0 / 16.0);
        let f = random_field(8, 8, 1.0 / 16.0, ClipBounds::UNIT, 2).unwrap();
        assert!(matches!(convolve_direct(&f, &k), Err(Error::Dimension(_))));
        assert!(matches!(convolve_fft(&f, &k), Err(Error::Dimension(_))));
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let k = ring_kernel(1.0 / 16.0);
        let f = random_field(64, 64, 1.0 / 16.0, ClipBounds::UNIT, 12).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| (convolve_fft(&f, &k).unwrap(), convolve_direct(&f, &k).unwrap()))
        };
        assert_eq!(run(1), run(4));
    }
}
