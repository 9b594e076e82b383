//! Flat key-value run configuration with `[section]` headers.
//!
//! The grammar is line-oriented: blank lines and `#` comments are skipped,
//! `[name]` opens a section, and `key = value` assigns within it. Keys may
//! repeat where a list is meaningful (piecewise activity boxes, boundary
//! points). Values are plain tokens separated by spaces.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use repgas::activity::ActivityField;
use repgas::mc::McConfig;
use repgas::observables::ObservableParams;
use repgas::potential::Potential;
use repgas::quadrature::Region;
use repgas::recursion::RecursionParams;

/// Configuration or usage problem; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

type CResult<T> = Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> CResult<T> {
    Err(ConfigError(msg.into()))
}

/// Raw parsed sections, order-preserving so repeated keys survive.
pub struct RawConfig {
    sections: Vec<(String, Vec<(String, String)>)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> CResult<RawConfig> {
        let mut sections: Vec<(String, Vec<(String, String)>)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = match name.strip_suffix(']') {
                    Some(n) => n.trim(),
                    None => return err(format!("line {}: unterminated section", idx + 1)),
                };
                sections.push((name.to_string(), Vec::new()));
                continue;
            }
            let (key, value) = match line.split_once('=') {
                Some((k, v)) => (k.trim(), v.trim()),
                None => return err(format!("line {}: expected key = value", idx + 1)),
            };
            if key.is_empty() {
                return err(format!("line {}: empty key", idx + 1));
            }
            match sections.last_mut() {
                Some((_, entries)) => entries.push((key.to_string(), value.to_string())),
                None => return err(format!("line {}: key outside any section", idx + 1)),
            }
        }
        Ok(RawConfig { sections })
    }

    fn section(&self, name: &str) -> Option<&[(String, String)]> {
        self.sections
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, e)| e.as_slice())
    }

    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.section(section)?
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn get_all(&self, section: &str, key: &str) -> Vec<&str> {
        self.section(section)
            .map(|entries| {
                entries
                    .iter()
                    .filter(|(k, _)| k == key)
                    .map(|(_, v)| v.as_str())
                    .collect()
            })
            .unwrap_or_default()
    }
}

fn parse_f64(section: &str, key: &str, value: &str) -> CResult<f64> {
    value
        .parse()
        .map_err(|_| ConfigError(format!("[{section}] {key}: not a number: {value}")))
}

fn parse_usize(section: &str, key: &str, value: &str) -> CResult<usize> {
    value
        .parse()
        .map_err(|_| ConfigError(format!("[{section}] {key}: not an integer: {value}")))
}

fn parse_u64(section: &str, key: &str, value: &str) -> CResult<u64> {
    value
        .parse()
        .map_err(|_| ConfigError(format!("[{section}] {key}: not an integer: {value}")))
}

fn parse_point(section: &str, key: &str, value: &str, d: usize) -> CResult<Vec<f64>> {
    let coords: Vec<f64> = value
        .split_whitespace()
        .map(|t| parse_f64(section, key, t))
        .collect::<CResult<_>>()?;
    if coords.len() != d {
        return err(format!(
            "[{section}] {key}: expected {d} coordinates, got {}",
            coords.len()
        ));
    }
    Ok(coords)
}

/// Output serialization format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    pub fn parse(token: &str) -> CResult<Format> {
        match token {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => err(format!("unknown format: {other} (expected csv or jsonl)")),
        }
    }
}

/// Fully validated run configuration.
pub struct RunConfig {
    pub potential: Arc<Potential>,
    pub region: Region,
    pub activity: ActivityField,
    pub lambda: Complex64,
    pub depth: usize,
    pub recursion: RecursionParams,
    pub truncation: usize,
    pub samples: usize,
    pub mc: McConfig,
    pub v: Vec<f64>,
    pub hat_center: Option<Vec<f64>>,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CResult<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::from_text(&text, path.parent())
    }

    pub fn from_text(text: &str, base_dir: Option<&Path>) -> CResult<RunConfig> {
        let raw = RawConfig::parse(text)?;

        let d = match raw.get("potential", "d") {
            Some(v) => parse_usize("potential", "d", v)?,
            None => 1,
        };
        let potential = build_potential(&raw, d, base_dir)?;
        let region = build_region(&raw, d)?;
        region
            .validate()
            .map_err(|e| ConfigError(format!("[region] {e}")))?;
        let (activity, lambda) = build_activity(&raw, &potential, &region, d)?;

        let defaults = RecursionParams::for_dimension(d);
        let depth = match raw.get("engine", "depth") {
            Some(v) => parse_usize("engine", "depth", v)?,
            None => 6,
        };
        let mut recursion = defaults;
        if let Some(v) = raw.get("engine", "branch_orders") {
            let orders: Vec<usize> = v
                .split_whitespace()
                .map(|t| parse_usize("engine", "branch_orders", t))
                .collect::<CResult<_>>()?;
            if orders.is_empty() || orders.contains(&0) {
                return err("[engine] branch_orders: need positive orders");
            }
            recursion.branch_orders = orders;
        }
        if let Some(v) = raw.get("engine", "kink_levels") {
            recursion.kink_split_levels = parse_usize("engine", "kink_levels", v)?;
        }
        if let Some(v) = raw.get("engine", "prune_tol") {
            recursion.prune_tol = parse_f64("engine", "prune_tol", v)?;
        }
        if let Some(v) = raw.get("engine", "node_budget") {
            recursion.node_budget = parse_u64("engine", "node_budget", v)?;
        }
        let top_order = recursion.branch_orders[0] as u64;
        let per_level = top_order.saturating_pow(d as u32);
        if (depth as u64).saturating_mul(per_level) > recursion.node_budget {
            return err(format!(
                "[engine] depth {depth} at order {top_order} in d={d} exceeds node_budget {}",
                recursion.node_budget
            ));
        }

        let observable = ObservableParams::for_dimension(d);
        let truncation = match raw.get("engine", "K") {
            Some(v) => {
                let k = parse_usize("engine", "K", v)?;
                if k == 0 {
                    return err("[engine] K: must be at least 1");
                }
                k
            }
            None => observable.truncation,
        };
        let samples = match raw.get("engine", "samples") {
            Some(v) => parse_usize("engine", "samples", v)?,
            None => observable.samples_per_order,
        };

        let mc = McConfig {
            steps: match raw.get("engine", "mc_steps") {
                Some(v) => parse_u64("engine", "mc_steps", v)?,
                None => 200_000,
            },
            burn_in: match raw.get("engine", "mc_burn_in") {
                Some(v) => parse_u64("engine", "mc_burn_in", v)?,
                None => 20_000,
            },
            chains: match raw.get("engine", "mc_chains") {
                Some(v) => parse_usize("engine", "mc_chains", v)?,
                None => 2,
            },
            seed: match raw.get("engine", "mc_seed") {
                Some(v) => parse_u64("engine", "mc_seed", v)?,
                None => 1,
            },
            thinning: match raw.get("engine", "mc_thinning") {
                Some(v) => parse_u64("engine", "mc_thinning", v)?,
                None => 10,
            },
        };
        mc.validate()
            .map_err(|e| ConfigError(format!("[engine] {e}")))?;

        let v = match raw.get("engine", "v") {
            Some(tokens) => parse_point("engine", "v", tokens, d)?,
            None => {
                let (lo, hi) = region.bounding_box();
                lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect()
            }
        };
        let hat_center = match raw.get("engine", "hat_center") {
            Some(tokens) => Some(parse_point("engine", "hat_center", tokens, d)?),
            None => None,
        };

        let format = match raw.get("output", "format") {
            Some(v) => Format::parse(v)?,
            None => Format::Csv,
        };
        let out = raw.get("output", "path").map(PathBuf::from);

        Ok(RunConfig {
            potential,
            region,
            activity,
            lambda,
            depth,
            recursion,
            truncation,
            samples,
            mc,
            v,
            hat_center,
            format,
            out,
        })
    }
}

fn build_potential(
    raw: &RawConfig,
    d: usize,
    base_dir: Option<&Path>,
) -> CResult<Arc<Potential>> {
    let kind = raw.get("potential", "kind").unwrap_or("hard_core");
    let get_f = |key: &str, default: f64| -> CResult<f64> {
        match raw.get("potential", key) {
            Some(v) => parse_f64("potential", key, v),
            None => Ok(default),
        }
    };
    let built = match kind {
        "hard_core" => match raw.get("potential", "r") {
            Some(v) => Potential::hard_core(d, parse_f64("potential", "r", v)?),
            None => Potential::unit_hard_core(d),
        },
        "gaussian" => Potential::gaussian(d, get_f("a", 1.0)?, get_f("r", 1.0)?),
        "exponential" => Potential::exponential_decay(d, get_f("a", 1.0)?, get_f("r", 1.0)?),
        "free" => Potential::free(d),
        "tabulated" => {
            let rel = match raw.get("potential", "table") {
                Some(p) => p,
                None => return err("[potential] tabulated kind needs table = path"),
            };
            let path = match base_dir {
                Some(dir) => dir.join(rel),
                None => PathBuf::from(rel),
            };
            if !path.exists() {
                return err(format!("[potential] table file not found: {}", path.display()));
            }
            Potential::tabulated_from_file(d, &path)
        }
        other => return err(format!("[potential] unknown kind: {other}")),
    };
    built.map_err(|e| ConfigError(format!("[potential] {e}")))
}

fn build_region(raw: &RawConfig, d: usize) -> CResult<Region> {
    let kind = raw.get("region", "kind").unwrap_or("interval");
    match kind {
        "interval" => {
            if d != 1 {
                return err("[region] interval needs d = 1");
            }
            let a = parse_f64("region", "a", raw.get("region", "a").unwrap_or("0"))?;
            let b = parse_f64("region", "b", raw.get("region", "b").unwrap_or("1"))?;
            Ok(Region::Interval { a, b })
        }
        "box" => {
            let lo = parse_point(
                "region",
                "lo",
                raw.get("region", "lo").unwrap_or(""),
                d,
            )?;
            let hi = parse_point(
                "region",
                "hi",
                raw.get("region", "hi").unwrap_or(""),
                d,
            )?;
            Ok(Region::Box { lo, hi })
        }
        "ball" => {
            let center = parse_point(
                "region",
                "center",
                raw.get("region", "center").unwrap_or(""),
                d,
            )?;
            let radius = parse_f64(
                "region",
                "radius",
                raw.get("region", "radius").unwrap_or(""),
            )?;
            Ok(Region::Ball { center, radius })
        }
        other => err(format!("[region] unknown kind: {other}")),
    }
}

fn build_activity(
    raw: &RawConfig,
    potential: &Arc<Potential>,
    region: &Region,
    d: usize,
) -> CResult<(ActivityField, Complex64)> {
    let re = parse_f64(
        "activity",
        "lambda",
        raw.get("activity", "lambda").unwrap_or("1"),
    )?;
    let im = parse_f64(
        "activity",
        "lambda_im",
        raw.get("activity", "lambda_im").unwrap_or("0"),
    )?;
    let lambda = Complex64::new(re, im);

    let box_entries = raw.get_all("activity", "box");
    let field = if box_entries.is_empty() {
        ActivityField::constant(potential.clone(), region.clone(), lambda)
    } else {
        let mut boxes = Vec::new();
        for entry in &box_entries {
            let nums: Vec<f64> = entry
                .split_whitespace()
                .map(|t| parse_f64("activity", "box", t))
                .collect::<CResult<_>>()?;
            if nums.len() != 2 * d + 2 {
                return err(format!(
                    "[activity] box: expected {} numbers (lo, hi, re, im), got {}",
                    2 * d + 2,
                    nums.len()
                ));
            }
            let lo = nums[..d].to_vec();
            let hi = nums[d..2 * d].to_vec();
            let value = Complex64::new(nums[2 * d], nums[2 * d + 1]);
            boxes.push((lo, hi, value));
        }
        ActivityField::piecewise(potential.clone(), region.clone(), lambda, boxes)
    }
    .map_err(|e| ConfigError(format!("[activity] {e}")))?;

    let boundary: Vec<Vec<f64>> = raw
        .get_all("activity", "boundary")
        .iter()
        .map(|entry| parse_point("activity", "boundary", entry, d))
        .collect::<CResult<_>>()?;
    let field = if boundary.is_empty() {
        field
    } else {
        field
            .apply_boundary(&boundary)
            .map_err(|e| ConfigError(format!("[activity] boundary: {e}")))?
    };
    Ok((field, lambda))
}
