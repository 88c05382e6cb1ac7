//! Grid-discretized states on a flat periodic rectangle.
//!
//! A [`ScalarField`] samples a density `f: T^2 -> [a, b]` at cell centers with
//! spacing `dx`. Distances between states use the sup metric. The torus
//! replaces the unbounded plane so that convolution is total.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::clipcore::ClipBounds;
use crate::error::{Error, Result};

/// A single-channel state.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    width: usize,
    height: usize,
    dx: f64,
    values: Vec<f64>,
    bounds: ClipBounds,
}

impl ScalarField {
    /// Validates every invariant: shape, `dx > 0`, finite values inside bounds.
    pub fn new(width: usize, height: usize, dx: f64, bounds: ClipBounds, values: Vec<f64>) -> Result<Self> {
        check_shape(width, height, dx)?;
        if values.len() != width * height {
            return Err(Error::Dimension(format!(
                "{} values for a {width}x{height} grid",
                values.len()
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || !bounds.contains(**v))
        {
            return Err(Error::InvalidField(format!(
                "value {v} at index {i} is not finite or lies outside [{}, {}]",
                bounds.lower(),
                bounds.upper()
            )));
        }
        Ok(ScalarField {
            width,
            height,
            dx,
            values,
            bounds,
        })
    }

    pub fn filled(width: usize, height: usize, dx: f64, bounds: ClipBounds, value: f64) -> Result<Self> {
        Self::new(width, height, dx, bounds, vec![value; width * height])
    }

    /// A field with bounds `(-inf, inf)`, used for convolution and growth
    /// outputs.
    pub fn unbounded(width: usize, height: usize, dx: f64, values: Vec<f64>) -> Result<Self> {
        Self::new(width, height, dx, ClipBounds::UNBOUNDED, values)
    }

    /// Stepper outputs: the caller guarantees the invariants, checked in debug
    /// builds only.
    pub(crate) fn from_parts(width: usize, height: usize, dx: f64, bounds: ClipBounds, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), width * height);
        debug_assert!(
            values.iter().all(|v| v.is_finite() && bounds.contains(*v)),
            "stepper produced a value outside [{}, {}]",
            bounds.lower(),
            bounds.upper()
        );
        ScalarField {
            width,
            height,
            dx,
            values,
            bounds,
        }
    }

    /// Same grid and bounds, new values.
    pub(crate) fn like(&self, values: Vec<f64>) -> Self {
        Self::from_parts(self.width, self.height, self.dx, self.bounds, values)
    }

    /// Same grid, unbounded values.
    pub(crate) fn like_unbounded(&self, values: Vec<f64>) -> Self {
        Self::from_parts(self.width, self.height, self.dx, ClipBounds::UNBOUNDED, values)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.dx
    }

    #[inline]
    pub fn bounds(&self) -> ClipBounds {
        self.bounds
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at column `x`, row `y`.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Replaces the bounds, rechecking that every value fits.
    pub fn with_bounds(self, bounds: ClipBounds) -> Result<Self> {
        Self::new(self.width, self.height, self.dx, bounds, self.values)
    }

    pub fn same_grid(&self, other: &ScalarField) -> bool {
        self.width == other.width && self.height == other.height && self.dx == other.dx
    }

    pub(crate) fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "{}x{} (dx {}) vs {}x{} (dx {})",
                self.width, self.height, self.dx, other.width, other.height, other.dx
            )))
        }
    }

    /// Quadrature approximation of the integral: `dx^2 * sum(values)`.
    pub fn mass(&self) -> f64 {
        self.dx * self.dx * self.values.iter().sum::<f64>()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_identically_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Number of cells with a strictly positive value.
    pub fn support_size(&self) -> usize {
        self.values.iter().filter(|&&v| v > 0.0).count()
    }

    /// For every cell, the wrapped Euclidean distance (space units) to the
    /// nearest cell with `f > 0`; `+inf` everywhere if there is none.
    ///
    /// Exact squared distance transform (lower envelope of parabolas) run on
    /// three periodic copies of each line.
    pub fn support_distance_map(&self) -> Vec<f64> {
        let (w, h) = (self.width, self.height);
        // Column pass: squared vertical distance to the nearest support cell.
        let mut partial = vec![f64::INFINITY; w * h];
        let mut line = vec![0.0; h];
        for x in 0..w {
            for (y, slot) in line.iter_mut().enumerate() {
                *slot = if self.values[y * w + x] > 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                };
            }
            let d = periodic_squared_distance(&line);
            for y in 0..h {
                partial[y * w + x] = d[y];
            }
        }
        // Row pass.
        let mut out = vec![0.0; w * h];
        for y in 0..h {
            let row = &partial[y * w..(y + 1) * w];
            let d = periodic_squared_distance(row);
            for x in 0..w {
                out[y * w + x] = d[x].sqrt() * self.dx;
            }
        }
        out
    }
}

fn check_shape(width: usize, height: usize, dx: f64) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Dimension(format!("empty grid {width}x{height}")));
    }
    if width.checked_mul(height).is_none() {
        return Err(Error::Dimension(format!("grid {width}x{height} overflows")));
    }
    if !(dx > 0.0) || !dx.is_finite() {
        return Err(Error::InvalidField(format!("cell size dx = {dx} must be positive")));
    }
    Ok(())
}

/// 1-D squared distance transform on a cycle: `out[i] = min_j (wrap(i-j)^2 + f[j])`.
fn periodic_squared_distance(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let tripled: Vec<f64> = (0..3 * n).map(|i| f[i % n]).collect();
    let d = squared_distance_1d(&tripled);
    d[n..2 * n].to_vec()
}

/// Felzenszwalb-Huttenlocher lower envelope. Infinite samples are skipped.
fn squared_distance_1d(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![f64::INFINITY; n];
    let mut vertices: Vec<usize> = Vec::with_capacity(n);
    let mut boundaries: Vec<f64> = Vec::with_capacity(n + 1);
    for q in 0..n {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            match vertices.last() {
                None => {
                    vertices.push(q);
                    boundaries.clear();
                    boundaries.push(f64::NEG_INFINITY);
                    break;
                }
                Some(&p) => {
                    let (qf, pf) = (q as f64, p as f64);
                    let s = ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * (qf - pf));
                    if s <= *boundaries.last().unwrap() {
                        vertices.pop();
                        boundaries.pop();
                        continue;
                    }
                    vertices.push(q);
                    boundaries.push(s);
                    break;
                }
            }
        }
    }
    if vertices.is_empty() {
        return out;
    }
    let mut k = 0;
    for (q, slot) in out.iter_mut().enumerate() {
        let qf = q as f64;
        while k + 1 < vertices.len() && boundaries[k + 1] < qf {
            k += 1;
        }
        let p = vertices[k];
        let diff = qf - p as f64;
        *slot = diff * diff + f[p];
    }
    out
}

/// Channel-stacked state sharing one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiField {
    channels: Vec<ScalarField>,
}

impl MultiField {
    pub fn new(channels: Vec<ScalarField>) -> Result<Self> {
        let first = channels
            .first()
            .ok_or_else(|| Error::InvalidField("a multi-field needs at least one channel".into()))?;
        for (i, c) in channels.iter().enumerate().skip(1) {
            first
                .check_same_grid(c)
                .map_err(|e| Error::Dimension(format!("channel {i}: {e}")))?;
        }
        for (i, c) in channels.iter().enumerate() {
            if !(c.bounds().width() > 0.0) {
                return Err(Error::InvalidField(format!(
                    "channel {i} has an empty range [{}, {}]",
                    c.bounds().lower(),
                    c.bounds().upper()
                )));
            }
        }
        Ok(MultiField { channels })
    }

    pub fn single(field: ScalarField) -> Result<Self> {
        Self::new(vec![field])
    }

    pub fn channels(&self) -> &[ScalarField] {
        &self.channels
    }

    pub fn channel(&self, i: usize) -> &ScalarField {
        &self.channels[i]
    }

    pub fn into_channels(self) -> Vec<ScalarField> {
        self.channels
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn width(&self) -> usize {
        self.channels[0].width()
    }

    pub fn height(&self) -> usize {
        self.channels[0].height()
    }

    pub fn dx(&self) -> f64 {
        self.channels[0].dx()
    }

    /// `min(upper - lower)` over channels.
    pub fn min_range(&self) -> f64 {
        self.channels
            .iter()
            .map(|c| c.bounds().width())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Distance in the sup metric.
pub trait SupMetric {
    fn sup_distance(&self, other: &Self) -> Result<f64>;
}

impl SupMetric for ScalarField {
    fn sup_distance(&self, other: &Self) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

impl SupMetric for MultiField {
    fn sup_distance(&self, other: &Self) -> Result<f64> {
        if self.channel_count() != other.channel_count() {
            return Err(Error::ChannelCount {
                expected: self.channel_count(),
                actual: other.channel_count(),
            });
        }
        self.channels
            .iter()
            .zip(&other.channels)
            .try_fold(0.0f64, |acc, (a, b)| Ok(acc.max(a.sup_distance(b)?)))
    }
}

/// `max |f - g|` over all cells (and channels).
pub fn sup_distance<F: SupMetric>(f: &F, g: &F) -> Result<f64> {
    f.sup_distance(g)
}

// ---------------------------------------------------------------------------
// Container format

const MAGIC: &[u8; 4] = b"LENF";
const VERSION: u16 = 1;

/// Serializes to the little-endian `LENF` container:
/// magic, `u16` version, `u16` channels, `u32` width, `u32` height, `f64` dx,
/// per-channel `f64` lower/upper, then all values channel-major, row-major.
pub fn encode_field(f: &MultiField) -> Result<Vec<u8>> {
    let channels = u16::try_from(f.channel_count()).map_err(|_| Error::Dimension("more than 65535 channels".into()))?;
    let width = u32::try_from(f.width()).map_err(|_| Error::Dimension("width exceeds u32".into()))?;
    let height = u32::try_from(f.height()).map_err(|_| Error::Dimension("height exceeds u32".into()))?;
    let cells = f.width() * f.height();
    let mut out = Vec::with_capacity(24 + 16 * f.channel_count() + 8 * cells * f.channel_count());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&channels.to_le_bytes());
    out.extend_from_slice(&width.to_le_bytes());
    out.extend_from_slice(&height.to_le_bytes());
    out.extend_from_slice(&f.dx().to_le_bytes());
    for c in f.channels() {
        out.extend_from_slice(&c.bounds().lower().to_le_bytes());
        out.extend_from_slice(&c.bounds().upper().to_le_bytes());
    }
    for c in f.channels() {
        for v in c.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    offset: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, section: &str) -> Result<&'a [u8]> {
        let end = self.offset.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.offset..end];
                self.offset = end;
                Ok(s)
            }
            None => Err(Error::Format {
                offset: self.offset,
                message: format!(
                    "truncated: missing {section} ({n} bytes needed, {} left)",
                    self.bytes.len() - self.offset
                ),
            }),
        }
    }

    fn u16(&mut self, section: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, section)?.try_into().unwrap()))
    }

    fn u32(&mut self, section: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, section)?.try_into().unwrap()))
    }

    fn f64(&mut self, section: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, section)?.try_into().unwrap()))
    }
}

pub fn decode_field(bytes: &[u8]) -> Result<MultiField> {
    let mut r = Reader { bytes, offset: 0 };
    let magic = r.take(4, "magic")?;
    if magic != MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: format!("bad magic {magic:?}, expected \"LENF\""),
        });
    }
    let version_at = r.offset;
    let version = r.u16("version")?;
    if version != VERSION {
        return Err(Error::Format {
            offset: version_at,
            message: format!("unsupported version {version}"),
        });
    }
    let channels_at = r.offset;
    let channels = r.u16("channel count")? as usize;
    if channels == 0 {
        return Err(Error::Format {
            offset: channels_at,
            message: "zero channels".into(),
        });
    }
    let dims_at = r.offset;
    let width = r.u32("width")? as usize;
    let height = r.u32("height")? as usize;
    let dx = r.f64("dx")?;
    let cells = width
        .checked_mul(height)
        .filter(|&c| c > 0)
        .filter(|&c| c.checked_mul(channels).and_then(|n| n.checked_mul(8)).is_some())
        .ok_or_else(|| Error::Format {
            offset: dims_at,
            message: format!("dimension overflow or empty grid: {channels} x {width} x {height}"),
        })?;
    let mut bounds = Vec::with_capacity(channels);
    for i in 0..channels {
        let section = format!("bounds of channel {i}");
        let lower = r.f64(&section)?;
        let upper = r.f64(&section)?;
        let b = ClipBounds::new(lower, upper).map_err(|e| Error::InvalidField(format!("channel {i}: {e}")))?;
        bounds.push(b);
    }
    let mut fields = Vec::with_capacity(channels);
    for (i, b) in bounds.into_iter().enumerate() {
        let raw = r.take(cells * 8, &format!("values of channel {i}"))?;
        let values = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let field = ScalarField::new(width, height, dx, b, values)
            .map_err(|e| Error::InvalidField(format!("channel {i}: {e}")))?;
        fields.push(field);
    }
    if r.offset != bytes.len() {
        return Err(Error::Format {
            offset: r.offset,
            message: format!("{} trailing bytes", bytes.len() - r.offset),
        });
    }
    MultiField::new(fields)
}

pub fn write_field_file(f: &MultiField, path: impl AsRef<Path>) -> Result<()> {
    let bytes = encode_field(f)?;
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_field_file(path: impl AsRef<Path>) -> Result<MultiField> {
    let bytes = fs::read(path)?;
    decode_field(&bytes)
}

/// Binary PGM (`P5`, maxval 255); pixel = `round((v - lower) / (upper - lower) * 255)`.
pub fn encode_pgm(f: &ScalarField) -> Result<Vec<u8>> {
    let b = f.bounds();
    if !b.is_finite() || !(b.width() > 0.0) {
        return Err(Error::Render(format!(
            "cannot map values onto gray levels with bounds [{}, {}]",
            b.lower(),
            b.upper()
        )));
    }
    let mut out = format!("P5\n{} {}\n255\n", f.width(), f.height()).into_bytes();
    out.extend(f.values().iter().map(|&v| {
        let level = ((v - b.lower()) / b.width() * 255.0).round();
        level.clamp(0.0, 255.0) as u8
    }));
    Ok(out)
}

pub fn render_pgm(f: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    let bytes = encode_pgm(f)?;
    let mut file = fs::File::create(path)?;
    file.write_all(&bytes)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Generators

/// Maps one SplitMix64 output to `[0, 1)`: the top 53 bits times `2^-53`.
#[inline]
pub fn unit_from_u64(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// I.i.d. uniform values in `[lower, upper]`.
///
/// The generator is SplitMix64 (Steele, Lea and Flood): the state advances by
/// `0x9e3779b97f4a7c15` and each output is the state passed through the
/// finalizer `z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9;
/// z = (z ^ (z >> 27)) * 0x94d049bb133111eb; z ^ (z >> 31)`. The initial state
/// is the seed. Cells are filled in row-major order, one output per cell,
/// mapped through [`unit_from_u64`] and scaled as `lower + (upper - lower) * u`.
pub fn random_field(width: usize, height: usize, dx: f64, bounds: ClipBounds, seed: u64) -> Result<ScalarField> {
    check_shape(width, height, dx)?;
    if !bounds.is_finite() {
        return Err(Error::InvalidArgument("random fields need finite bounds".into()));
    }
    let mut rng = SplitMix64::seed_from_u64(seed);
    let values = (0..width * height)
        .map(|_| {
            let u = unit_from_u64(rng.next_u64());
            (bounds.lower() + bounds.width() * u).min(bounds.upper())
        })
        .collect();
    ScalarField::new(width, height, dx, bounds, values)
}

/// Binary board: cell `i` is 1 when the `i`-th SplitMix64 draw from `seed`,
/// mapped through [`unit_from_u64`], is below `density`, and 0 otherwise.
pub fn random_board(width: usize, height: usize, density: f64, seed: u64) -> Result<ScalarField> {
    check_shape(width, height, 1.0)?;
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidArgument(format!("density {density} outside [0, 1]")));
    }
    let mut rng = SplitMix64::seed_from_u64(seed);
    let values = (0..width * height)
        .map(|_| {
            if unit_from_u64(rng.next_u64()) < density {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    ScalarField::new(width, height, 1.0, ClipBounds::UNIT, values)
}

/// Shortest signed offset from `a` to `b` on a cycle of length `n`.
#[inline]
pub fn wrapped_offset(a: f64, b: f64, n: f64) -> f64 {
    let d = (b - a).rem_euclid(n);
    if d > n / 2.0 {
        d - n
    } else {
        d
    }
}

/// Smooth, compactly supported bump centered at `(cx, cy)` (cell
/// coordinates): `peak * exp(1 - 1 / (1 - rho^2))` for `rho = d / radius < 1`
/// with `d` the wrapped distance in cells, zero elsewhere.
#[allow(clippy::too_many_arguments)]
pub fn blob_field(
    width: usize,
    height: usize,
    dx: f64,
    bounds: ClipBounds,
    cx: f64,
    cy: f64,
    radius: f64,
    peak: f64,
) -> Result<ScalarField> {
    check_shape(width, height, dx)?;
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("blob radius {radius} must be positive")));
    }
    let mut values = vec![bounds.lower().max(0.0).min(bounds.upper()); width * height];
    for y in 0..height {
        let oy = wrapped_offset(cy, y as f64, height as f64);
        for x in 0..width {
            let ox = wrapped_offset(cx, x as f64, width as f64);
            let rho2 = (ox * ox + oy * oy) / (radius * radius);
            if rho2 < 1.0 {
                values[y * width + x] = peak * (1.0 - 1.0 / (1.0 - rho2)).exp();
            }
        }
    }
    ScalarField::new(width, height, dx, bounds, values)
}

/// All cells at `background` except `(x, y)` which is `value`.
pub fn single_cell_field(
    width: usize,
    height: usize,
    dx: f64,
    bounds: ClipBounds,
    x: usize,
    y: usize,
    value: f64,
) -> Result<ScalarField> {
    check_shape(width, height, dx)?;
    if x >= width || y >= height {
        return Err(Error::Dimension(format!("cell ({x}, {y}) outside {width}x{height}")));
    }
    let background = if bounds.contains(0.0) { 0.0 } else { bounds.lower() };
    let mut values = vec![background; width * height];
    values[y * width + x] = value;
    ScalarField::new(width, height, dx, bounds, values)
}
