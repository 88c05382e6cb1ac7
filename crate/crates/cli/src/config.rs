//! Simulation configuration files.
//!
//! The format is flat `key = value` text, one pair per line. Keys are either
//! plain (`steps`) or carry one section prefix (`grid.width`). Blank lines and
//! lines starting with `#` are ignored; values may be wrapped in double
//! quotes. Every key must be known to the chosen model and may appear once.
//! Relative paths are resolved against the directory of the config file.
//!
//! Required keys: `model`, `grid.width`, `grid.height`, `t_step`, `steps`,
//! plus `kernel.type` and `growth.type` for every model except `gol`.
//!
//! | key | default |
//! |-----|---------|
//! | `grid.dx` | `1` |
//! | `kernel.scale` (`exp_bump`) | `13 * grid.dx` |
//! | `kernel.normalize` | `true`, `false` for `gol` |
//! | `growth.mu`, `growth.sigma` (`gaussian`) | `0.15`, `0.015` |
//! | `bounds.lower`, `bounds.upper` | `0`, `1` |
//! | `food.lower`, `food.upper` | `0`, `1` |
//! | `init.type` | `blob` (`random` for `gol`) |
//! | `seed` | `0` |
//! | `output.frames_every` | `steps` (`0` disables frames) |
//! | `output.frame_dir` | `frames` |
//! | `output.metrics_path` | `metrics.csv` |
//! | `output.convergence_path` | `convergence.csv` |
//! | `output.tangency_path` | `tangency.csv` |
//! | `converge.time` | `1` |
//! | `converge.reference_steps` | `1024` |

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use clipflow_core::operators::{GrowthSpec, KernelShape, KernelSpec, Ring};
use clipflow_core::ClipBounds;

/// A configuration problem, located by key and (when present) line.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: `{}`: {}", self.key, self.message),
            None => write!(f, "`{}`: {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Lenia,
    Asymptotic,
    Gol,
    Food,
    DepletingFood,
    PredatorPrey,
    Ecosystem,
}

impl Model {
    fn parse(s: &str) -> Option<Model> {
        Some(match s {
            "lenia" => Model::Lenia,
            "asymptotic" => Model::Asymptotic,
            "gol" => Model::Gol,
            "food" => Model::Food,
            "depleting_food" => Model::DepletingFood,
            "predator_prey" => Model::PredatorPrey,
            "ecosystem" => Model::Ecosystem,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Lenia => "lenia",
            Model::Asymptotic => "asymptotic",
            Model::Gol => "gol",
            Model::Food => "food",
            Model::DepletingFood => "depleting_food",
            Model::PredatorPrey => "predator_prey",
            Model::Ecosystem => "ecosystem",
        }
    }

    /// Creature channels plus the food channel where food is part of the state.
    pub fn channel_count(self) -> usize {
        match self {
            Model::Lenia | Model::Asymptotic | Model::Gol | Model::Food => 1,
            Model::DepletingFood | Model::PredatorPrey => 2,
            Model::Ecosystem => 3,
        }
    }

    pub fn has_prey(self) -> bool {
        matches!(self, Model::PredatorPrey | Model::Ecosystem)
    }

    pub fn has_food(self) -> bool {
        matches!(self, Model::Food | Model::DepletingFood | Model::Ecosystem)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub width: usize,
    pub height: usize,
    pub dx: f64,
}

/// How a channel's initial values are produced. Coordinates are in cells.
#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Blob {
        cx: f64,
        cy: f64,
        radius: f64,
        peak: f64,
    },
    /// Uniform in `[low, high]`; for `gol` cells are alive with probability
    /// `density` instead.
    Random {
        low: f64,
        high: f64,
        density: f64,
    },
    SingleCell {
        x: usize,
        y: usize,
        value: f64,
    },
    Constant(f64),
    /// One channel of a field container.
    File {
        path: PathBuf,
        channel: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    /// Write a frame every this many steps (and after the last); 0 disables.
    pub frames_every: usize,
    pub frame_dir: PathBuf,
    pub metrics_path: PathBuf,
    pub convergence_path: PathBuf,
    pub tangency_path: PathBuf,
}

/// A validated simulation configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub model: Model,
    pub grid: GridConfig,
    pub kernel: KernelSpec,
    pub growth: GrowthSpec,
    /// Prey species for `predator_prey` and `ecosystem`.
    pub kernel2: Option<KernelSpec>,
    pub growth2: Option<GrowthSpec>,
    pub bounds: ClipBounds,
    pub food_bounds: ClipBounds,
    /// The food field: static for `food`, initial state for the others.
    pub food: Option<InitSpec>,
    pub init: InitSpec,
    pub init2: Option<InitSpec>,
    pub t_step: f64,
    pub steps: usize,
    pub seed: u64,
    pub output: OutputConfig,
    pub converge_time: f64,
    pub converge_reference_steps: usize,
}

struct Entry {
    line: usize,
    value: String,
}

/// Key-value pairs with consumption tracking, so leftovers can be reported.
struct Table {
    entries: BTreeMap<String, Entry>,
}

fn err(line: Option<usize>, key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

fn valid_key(key: &str) -> bool {
    let mut parts = key.split('.');
    let ok = |p: &str| {
        !p.is_empty()
            && p.chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
    };
    match (parts.next(), parts.next(), parts.next()) {
        (Some(a), None, None) => ok(a),
        (Some(a), Some(b), None) => ok(a) && ok(b),
        _ => false,
    }
}

impl Table {
    fn parse(text: &str) -> Result<Table, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(err(Some(line), trimmed, "expected `key = value`"));
            };
            let key = key.trim();
            if !valid_key(key) {
                return Err(err(
                    Some(line),
                    key,
                    "keys are lowercase words with at most one `.` section separator",
                ));
            }
            let mut value = value.trim();
            if value.len() >= 2 && value.starts_with('"') && value.ends_with('"') {
                value = &value[1..value.len() - 1];
            }
            if let Some(prev) = entries.insert(
                key.to_string(),
                Entry {
                    line,
                    value: value.to_string(),
                },
            ) {
                return Err(err(
                    Some(line),
                    key,
                    format!("duplicate key (first set on line {})", prev.line),
                ));
            }
        }
        Ok(Table { entries })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key).map(|e| (e.line, e.value))
    }

    fn has_section(&self, section: &str) -> bool {
        let prefix = format!("{section}.");
        self.entries.keys().any(|k| k.starts_with(&prefix))
    }

    fn required(&mut self, key: &str) -> Result<(usize, String), ConfigError> {
        self.take(key).ok_or_else(|| err(None, key, "missing required key"))
    }

    fn parsed<T>(
        &mut self,
        key: &str,
        what: &str,
        parse: impl Fn(&str) -> Option<T>,
    ) -> Result<Option<T>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => parse(&v)
                .map(Some)
                .ok_or_else(|| err(Some(line), key, format!("expected {what}, got `{v}`"))),
        }
    }

    fn f64(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.parsed(key, "a finite number", |v| {
            v.parse::<f64>().ok().filter(|x| x.is_finite())
        })
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    fn f64_required(&mut self, key: &str) -> Result<f64, ConfigError> {
        let line = self.line_of(key);
        self.f64(key)?.ok_or_else(|| err(line, key, "missing required key"))
    }

    fn usize(&mut self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.parsed(key, "a non-negative integer", |v| v.parse::<usize>().ok())
    }

    fn u64(&mut self, key: &str) -> Result<Option<u64>, ConfigError> {
        self.parsed(key, "a non-negative integer", |v| v.parse::<u64>().ok())
    }

    fn bool(&mut self, key: &str) -> Result<Option<bool>, ConfigError> {
        self.parsed(key, "`true` or `false`", |v| match v {
            "true" => Some(true),
            "false" => Some(false),
            _ => None,
        })
    }

    fn list(&mut self, key: &str) -> Result<Option<(usize, Vec<f64>)>, ConfigError> {
        let Some((line, v)) = self.take(key) else {
            return Ok(None);
        };
        let items: Option<Vec<f64>> = v
            .split(',')
            .map(|s| s.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect();
        items.map(|xs| Some((line, xs))).ok_or_else(|| {
            err(
                Some(line),
                key,
                format!("expected a comma-separated list of numbers, got `{v}`"),
            )
        })
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|e| e.line)
    }

    fn first_leftover(&self) -> Option<(&String, &Entry)> {
        self.entries.iter().min_by_key(|(_, e)| e.line)
    }
}

fn parse_kernel(t: &mut Table, section: &str, dx: f64) -> Result<KernelSpec, ConfigError> {
    let type_key = format!("{section}.type");
    let (line, kind) = t.required(&type_key)?;
    let key = |name: &str| format!("{section}.{name}");
    let shape = match kind.as_str() {
        "gol" => KernelShape::GoL,
        "exp_bump" => KernelShape::ExpBump {
            scale: t.f64_or(&key("scale"), 13.0 * dx)?,
        },
        "ring_sum" => {
            let c = t.f64_required(&key("c"))?;
            let centers = t
                .list(&key("centers"))?
                .ok_or_else(|| err(None, &key("centers"), "missing required key"))?;
            let amplitudes = t
                .list(&key("amplitudes"))?
                .ok_or_else(|| err(None, &key("amplitudes"), "missing required key"))?;
            let widths = t
                .list(&key("widths"))?
                .ok_or_else(|| err(None, &key("widths"), "missing required key"))?;
            if centers.1.len() != amplitudes.1.len() || centers.1.len() != widths.1.len() {
                return Err(err(
                    Some(widths.0),
                    &key("widths"),
                    "centers, amplitudes and widths must have the same length",
                ));
            }
            let rings = (0..centers.1.len())
                .map(|i| Ring {
                    center: centers.1[i],
                    amplitude: amplitudes.1[i],
                    width: widths.1[i],
                })
                .collect();
            KernelShape::RingSum { c, rings }
        }
        "table" => {
            let radius = t
                .usize(&key("radius"))?
                .ok_or_else(|| err(None, &key("radius"), "missing required key"))?;
            let weights = t
                .list(&key("weights"))?
                .ok_or_else(|| err(None, &key("weights"), "missing required key"))?;
            KernelShape::Table {
                radius,
                weights: weights.1,
            }
        }
        other => {
            return Err(err(
                Some(line),
                &type_key,
                format!("unknown kernel type `{other}` (expected gol, exp_bump, ring_sum or table)"),
            ))
        }
    };
    let default_normalize = !matches!(shape, KernelShape::GoL);
    let normalize = t.bool(&key("normalize"))?.unwrap_or(default_normalize);
    let spec = KernelSpec { shape, normalize };
    spec.validate().map_err(|e| err(Some(line), &type_key, e.to_string()))?;
    Ok(spec)
}

fn parse_growth(t: &mut Table, section: &str) -> Result<GrowthSpec, ConfigError> {
    let type_key = format!("{section}.type");
    let (line, kind) = t.required(&type_key)?;
    let key = |name: &str| format!("{section}.{name}");
    let growth = match kind.as_str() {
        "gol" => GrowthSpec::GoL,
        "gaussian" => GrowthSpec::GaussianBump {
            mu: t.f64_or(&key("mu"), 0.15)?,
            sigma: t.f64_or(&key("sigma"), 0.015)?,
        },
        "constant" => GrowthSpec::Constant(t.f64_required(&key("value"))?),
        "rectifier" => GrowthSpec::Rectifier,
        "table" => {
            let (pline, v) = t.required(&key("points"))?;
            let points: Option<Vec<(f64, f64)>> = v
                .split(',')
                .map(|p| {
                    let (u, g) = p.split_once(':')?;
                    Some((u.trim().parse().ok()?, g.trim().parse().ok()?))
                })
                .collect();
            GrowthSpec::Table(points.ok_or_else(|| {
                err(
                    Some(pline),
                    &key("points"),
                    format!("expected `u:g, u:g, ...`, got `{v}`"),
                )
            })?)
        }
        other => {
            return Err(err(
                Some(line),
                &type_key,
                format!("unknown growth type `{other}` (expected gol, gaussian, constant, rectifier or table)"),
            ))
        }
    };
    growth
        .validate()
        .map_err(|e| err(Some(line), &type_key, e.to_string()))?;
    Ok(growth)
}

fn parse_bounds(t: &mut Table, lower_key: &str, upper_key: &str) -> Result<ClipBounds, ConfigError> {
    let line = t.line_of(upper_key).or(t.line_of(lower_key));
    let lower = t.f64_or(lower_key, 0.0)?;
    let upper = t.f64_or(upper_key, 1.0)?;
    if !(lower < upper) {
        return Err(err(
            line,
            upper_key,
            format!("bounds need lower < upper, got [{lower}, {upper}]"),
        ));
    }
    ClipBounds::new(lower, upper).map_err(|e| err(line, upper_key, e.to_string()))
}

fn parse_init(
    t: &mut Table,
    section: &str,
    grid: GridConfig,
    bounds: ClipBounds,
    default_kind: &str,
    base_dir: &Path,
) -> Result<InitSpec, ConfigError> {
    let type_key = format!("{section}.type");
    let (line, kind) = t
        .take(&type_key)
        .map(|(l, v)| (Some(l), v))
        .unwrap_or((None, default_kind.to_string()));
    let key = |name: &str| format!("{section}.{name}");
    let (w, h) = (grid.width as f64, grid.height as f64);
    Ok(match kind.as_str() {
        "blob" => {
            let radius = t.f64_or(&key("radius"), w.min(h) / 4.0)?;
            if !(radius > 0.0) {
                return Err(err(
                    t.line_of(&key("radius")).or(line),
                    &key("radius"),
                    "blob radius must be positive",
                ));
            }
            InitSpec::Blob {
                cx: t.f64_or(&key("cx"), w / 2.0)?,
                cy: t.f64_or(&key("cy"), h / 2.0)?,
                radius,
                peak: t.f64_or(&key("peak"), bounds.upper())?,
            }
        }
        "random" => {
            let low = t.f64_or(&key("low"), bounds.lower())?;
            let high = t.f64_or(&key("high"), bounds.upper())?;
            if !(low <= high) {
                return Err(err(line, &key("high"), "random init needs low <= high"));
            }
            let density = t.f64_or(&key("density"), 0.5)?;
            if !(0.0..=1.0).contains(&density) {
                return Err(err(line, &key("density"), "density must lie in [0, 1]"));
            }
            InitSpec::Random { low, high, density }
        }
        "single_cell" => {
            let x = t.usize(&key("x"))?.unwrap_or(grid.width / 2);
            let y = t.usize(&key("y"))?.unwrap_or(grid.height / 2);
            if x >= grid.width || y >= grid.height {
                return Err(err(line, &key("x"), format!("cell ({x}, {y}) lies outside the grid")));
            }
            InitSpec::SingleCell {
                x,
                y,
                value: t.f64_or(&key("value"), bounds.upper())?,
            }
        }
        "constant" => InitSpec::Constant(t.f64_required(&key("value"))?),
        "file" => {
            let (_, path) = t.required(&key("path"))?;
            InitSpec::File {
                path: base_dir.join(path),
                channel: t.usize(&key("channel"))?.unwrap_or(0),
            }
        }
        other => {
            return Err(err(
                line,
                &type_key,
                format!("unknown initial condition `{other}` (expected blob, random, single_cell, constant or file)"),
            ))
        }
    })
}

/// Reads and validates a config file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<SimConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| err(None, "config", format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config_str(&text, &base)
}

/// Parses config text; relative paths resolve against `base_dir`.
pub fn parse_config_str(text: &str, base_dir: &Path) -> Result<SimConfig, ConfigError> {
    let mut t = Table::parse(text)?;

    let (mline, mname) = t.required("model")?;
    let model = Model::parse(&mname).ok_or_else(|| {
        err(
            Some(mline),
            "model",
            format!("unknown model `{mname}` (expected lenia, asymptotic, gol, food, depleting_food, predator_prey or ecosystem)"),
        )
    })?;

    let width = t
        .usize("grid.width")?
        .ok_or_else(|| err(None, "grid.width", "missing required key"))?;
    let height = t
        .usize("grid.height")?
        .ok_or_else(|| err(None, "grid.height", "missing required key"))?;
    if width == 0 || height == 0 {
        return Err(err(
            t.line_of("grid.width"),
            "grid.width",
            "grid sides must be positive",
        ));
    }
    let dx_line = t.line_of("grid.dx");
    let dx = t.f64_or("grid.dx", 1.0)?;
    if !(dx > 0.0) {
        return Err(err(dx_line, "grid.dx", "dx must be positive"));
    }
    let grid = GridConfig { width, height, dx };

    let (t_line, t_raw) = t.required("t_step")?;
    let t_step: f64 = t_raw.parse().ok().filter(|x: &f64| x.is_finite()).ok_or_else(|| {
        err(
            Some(t_line),
            "t_step",
            format!("expected a finite number, got `{t_raw}`"),
        )
    })?;
    if !(t_step > 0.0 && t_step <= 1.0) {
        return Err(err(
            Some(t_line),
            "t_step",
            format!("t_step = {t_step} lies outside (0, 1]; the arc field is defined for times in [0, 1]"),
        ));
    }
    let steps_line = t.line_of("steps");
    let steps = t
        .usize("steps")?
        .ok_or_else(|| err(None, "steps", "missing required key"))?;
    if steps == 0 {
        return Err(err(steps_line, "steps", "steps must be at least 1"));
    }

    let (kernel, growth) = if model == Model::Gol {
        for key in ["kernel.type", "growth.type"] {
            if let Some((line, v)) = t.take(key) {
                if v != "gol" {
                    return Err(err(Some(line), key, "the gol model only accepts `gol`"));
                }
            }
        }
        if dx != 1.0 {
            return Err(err(dx_line, "grid.dx", "the gol model needs dx = 1"));
        }
        if t_step != 1.0 {
            return Err(err(Some(t_line), "t_step", "the gol model steps with t_step = 1"));
        }
        (KernelSpec::new(KernelShape::GoL), GrowthSpec::GoL)
    } else {
        (parse_kernel(&mut t, "kernel", dx)?, parse_growth(&mut t, "growth")?)
    };

    let (kernel2, growth2) = if model.has_prey() {
        if !t.has_section("kernel2") {
            return Err(err(
                None,
                "kernel2.type",
                format!("model `{}` needs a second species: missing `kernel2`", model.name()),
            ));
        }
        if !t.has_section("growth2") {
            return Err(err(
                None,
                "growth2.type",
                format!("model `{}` needs a second species: missing `growth2`", model.name()),
            ));
        }
        (
            Some(parse_kernel(&mut t, "kernel2", dx)?),
            Some(parse_growth(&mut t, "growth2")?),
        )
    } else {
        (None, None)
    };

    let bounds = parse_bounds(&mut t, "bounds.lower", "bounds.upper")?;
    let food_bounds = if model.has_food() {
        parse_bounds(&mut t, "food.lower", "food.upper")?
    } else {
        ClipBounds::UNIT
    };
    let food = if model.has_food() {
        if t.line_of("food.type").is_none() {
            return Err(err(
                None,
                "food.type",
                format!("model `{}` needs a food field", model.name()),
            ));
        }
        Some(parse_init(&mut t, "food", grid, food_bounds, "constant", base_dir)?)
    } else {
        None
    };

    let default_init = if model == Model::Gol { "random" } else { "blob" };
    let init = parse_init(&mut t, "init", grid, bounds, default_init, base_dir)?;
    let init2 = if model.has_prey() {
        Some(parse_init(&mut t, "init2", grid, bounds, "blob", base_dir)?)
    } else {
        None
    };

    let seed = t.u64("seed")?.unwrap_or(0);
    let output = OutputConfig {
        frames_every: t.usize("output.frames_every")?.unwrap_or(steps),
        frame_dir: base_dir.join(
            t.take("output.frame_dir")
                .map(|e| e.1)
                .unwrap_or_else(|| "frames".into()),
        ),
        metrics_path: base_dir.join(
            t.take("output.metrics_path")
                .map(|e| e.1)
                .unwrap_or_else(|| "metrics.csv".into()),
        ),
        convergence_path: base_dir.join(
            t.take("output.convergence_path")
                .map(|e| e.1)
                .unwrap_or_else(|| "convergence.csv".into()),
        ),
        tangency_path: base_dir.join(
            t.take("output.tangency_path")
                .map(|e| e.1)
                .unwrap_or_else(|| "tangency.csv".into()),
        ),
    };
    let ct_line = t.line_of("converge.time");
    let converge_time = t.f64_or("converge.time", 1.0)?;
    if !(converge_time > 0.0) {
        return Err(err(ct_line, "converge.time", "convergence time must be positive"));
    }
    let converge_reference_steps = t.usize("converge.reference_steps")?.unwrap_or(1024);

    if let Some((key, entry)) = t.first_leftover() {
        let message = if key.starts_with("kernel2.") || key.starts_with("growth2.") || key.starts_with("init2.") {
            format!("model `{}` has no second species", model.name())
        } else if key.starts_with("food.") {
            format!("model `{}` has no food field", model.name())
        } else {
            "unknown key".to_string()
        };
        return Err(err(Some(entry.line), key, message));
    }

    Ok(SimConfig {
        model,
        grid,
        kernel,
        growth,
        kernel2,
        growth2,
        bounds,
        food_bounds,
        food,
        init,
        init2,
        t_step,
        steps,
        seed,
        output,
        converge_time,
        converge_reference_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "model = lenia
grid.width = 64
grid.height = 64
kernel.type = exp_bump
growth.type = gaussian
t_step = 0.1
steps = 10
";

    fn parse(text: &str) -> Result<SimConfig, ConfigError> {
        parse_config_str(text, Path::new("/base"))
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.model, Model::Lenia);
        assert_eq!(
            c.grid,
            GridConfig {
                width: 64,
                height: 64,
                dx: 1.0
            }
        );
        assert_eq!(c.kernel, KernelSpec::normalized(KernelShape::ExpBump { scale: 13.0 }));
        assert_eq!(c.growth, GrowthSpec::GaussianBump { mu: 0.15, sigma: 0.015 });
        assert_eq!(c.bounds, ClipBounds::UNIT);
        assert_eq!(
            c.init,
            InitSpec::Blob {
                cx: 32.0,
                cy: 32.0,
                radius: 16.0,
                peak: 1.0
            }
        );
        assert_eq!(c.seed, 0);
        assert_eq!(c.output.frames_every, 10);
        assert_eq!(c.output.metrics_path, PathBuf::from("/base/metrics.csv"));
        assert_eq!(c.output.frame_dir, PathBuf::from("/base/frames"));
        assert_eq!(c.food, None);
        assert_eq!(c.converge_reference_steps, 1024);
    }

    #[test]
    fn comments_quotes_and_sections() {
        let text = format!(
            "# a comment\n\n{MINIMAL}output.metrics_path = \"out dir/m.csv\"\nkernel.scale = 8\ngrowth.mu = 0.2\n"
        );
        let c = parse(&text).unwrap();
        assert_eq!(c.output.metrics_path, PathBuf::from("/base/out dir/m.csv"));
        assert_eq!(c.kernel.shape, KernelShape::ExpBump { scale: 8.0 });
        assert_eq!(c.growth, GrowthSpec::GaussianBump { mu: 0.2, sigma: 0.015 });
    }

    #[test]
    fn step_size_outside_domain() {
        let e = parse(&MINIMAL.replace("t_step = 0.1", "t_step = 1.5")).unwrap_err();
        assert_eq!(e.key, "t_step");
        assert_eq!(e.line, Some(6));
        assert!(e.message.contains("[0, 1]"), "{e}");
        assert!(parse(&MINIMAL.replace("t_step = 0.1", "t_step = 0")).is_err());
        assert!(parse(&MINIMAL.replace("t_step = 0.1", "t_step = 1")).is_ok());
    }

    #[test]
    fn ecosystem_needs_second_species() {
        let text = MINIMAL.replace("model = lenia", "model = ecosystem") + "food.type = constant\nfood.value = 0.5\n";
        let e = parse(&text).unwrap_err();
        assert_eq!(e.key, "kernel2.type");
        assert!(e.message.contains("kernel2"));
        let text = text + "kernel2.type = exp_bump\n";
        let e = parse(&text).unwrap_err();
        assert!(e.message.contains("growth2"), "{e}");
        let c = parse(&(text + "growth2.type = constant\ngrowth2.value = 0\n")).unwrap();
        assert_eq!(c.growth2, Some(GrowthSpec::Constant(0.0)));
        assert_eq!(c.food, Some(InitSpec::Constant(0.5)));
    }

    #[test]
    fn unknown_and_misplaced_keys() {
        let e = parse(&format!("{MINIMAL}kernel.sclae = 3\n")).unwrap_err();
        assert_eq!(
            (e.key.as_str(), e.line, e.message.as_str()),
            ("kernel.sclae", Some(8), "unknown key")
        );
        let e = parse(&format!("{MINIMAL}kernel2.type = gol\n")).unwrap_err();
        assert!(e.message.contains("no second species"));
        let e = parse(&format!("{MINIMAL}food.value = 1\n")).unwrap_err();
        assert!(e.message.contains("no food"));
        let e = parse(&format!("{MINIMAL}a.b.c = 1\n")).unwrap_err();
        assert_eq!(e.line, Some(8));
    }

    #[test]
    fn syntax_and_type_errors_name_the_line() {
        let e = parse(&format!("{MINIMAL}steps\n")).unwrap_err();
        assert_eq!(e.line, Some(8));
        let e = parse(&MINIMAL.replace("grid.width = 64", "grid.width = wide")).unwrap_err();
        assert_eq!((e.key.as_str(), e.line), ("grid.width", Some(2)));
        let e = parse(&format!("{MINIMAL}steps = 3\n")).unwrap_err();
        assert!(e.message.contains("duplicate"));
        let e = parse(&MINIMAL.replace("growth.type = gaussian", "growth.type = sigmoid")).unwrap_err();
        assert_eq!(e.key, "growth.type");
        let e = parse(&MINIMAL.replace("steps = 10\n", "")).unwrap_err();
        assert_eq!((e.key.as_str(), e.line), ("steps", None));
        assert!(e.to_string().contains("`steps`"));
    }

    #[test]
    fn gol_model_rules() {
        let text = "model = gol\ngrid.width = 16\ngrid.height = 16\nt_step = 1\nsteps = 4\n";
        let c = parse(text).unwrap();
        assert_eq!(c.kernel, KernelSpec::new(KernelShape::GoL));
        assert_eq!(
            c.init,
            InitSpec::Random {
                low: 0.0,
                high: 1.0,
                density: 0.5
            }
        );
        assert!(parse(&text.replace("t_step = 1", "t_step = 0.5")).is_err());
        assert!(parse(&format!("{text}grid.dx = 0.5\n")).is_err());
        assert!(parse(&format!("{text}kernel.type = exp_bump\n")).is_err());
    }

    #[test]
    fn kernels_and_growths() {
        let text = MINIMAL.replace(
            "kernel.type = exp_bump",
            "kernel.type = ring_sum\nkernel.c = 10\nkernel.centers = 0.5, 0.8\nkernel.amplitudes = 1, 0.3\nkernel.widths = 0.02,0.01\nkernel.normalize = false",
        );
        let c = parse(&text).unwrap();
        match &c.kernel.shape {
            KernelShape::RingSum { c, rings } => {
                assert_eq!(*c, 10.0);
                assert_eq!(rings.len(), 2);
                assert_eq!(
                    rings[1],
                    Ring {
                        center: 0.8,
                        amplitude: 0.3,
                        width: 0.01
                    }
                );
            }
            other => panic!("{other:?}"),
        }
        assert!(!c.kernel.normalize);
        let bad = text.replace("kernel.widths = 0.02,0.01", "kernel.widths = 0.02");
        assert!(parse(&bad).is_err());
        let c = parse(&MINIMAL.replace(
            "growth.type = gaussian",
            "growth.type = table\ngrowth.points = 0:-1, 0.2:1, 0.4:-1",
        ))
        .unwrap();
        assert_eq!(c.growth, GrowthSpec::Table(vec![(0.0, -1.0), (0.2, 1.0), (0.4, -1.0)]));
        let c = parse(&MINIMAL.replace(
            "kernel.type = exp_bump",
            "kernel.type = table\nkernel.radius = 1\nkernel.weights = 1,1,1,1,0.5,1,1,1,1",
        ))
        .unwrap();
        assert_eq!(
            c.kernel.shape,
            KernelShape::Table {
                radius: 1,
                weights: vec![1.0, 1.0, 1.0, 1.0, 0.5, 1.0, 1.0, 1.0, 1.0]
            }
        );
    }

    #[test]
    fn init_generators() {
        let c = parse(&format!(
            "{MINIMAL}init.type = single_cell\ninit.x = 3\ninit.value = 0.5\n"
        ))
        .unwrap();
        assert_eq!(
            c.init,
            InitSpec::SingleCell {
                x: 3,
                y: 32,
                value: 0.5
            }
        );
        let c = parse(&format!("{MINIMAL}init.type = file\ninit.path = start.lenf\n")).unwrap();
        assert_eq!(
            c.init,
            InitSpec::File {
                path: PathBuf::from("/base/start.lenf"),
                channel: 0
            }
        );
        assert!(parse(&format!("{MINIMAL}init.type = single_cell\ninit.x = 64\n")).is_err());
        assert!(parse(&format!("{MINIMAL}init.type = noise\n")).is_err());
    }
}
