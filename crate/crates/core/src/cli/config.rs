//! Flat `key = value` run configuration with dotted sections.
//!
//! ```text
//! # comment
//! form_factor.kind = constant
//! mu = 1.5*mu0
//! [quad]
//! n_grid = 64
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::form_factor::{FormFactor, FormFactorKind};
use crate::quadrature::QuadratureSpec;
use crate::torus::TorusPoint;

pub const PROFILE_ENV: &str = "FRIEDRICHS_QUAD_PROFILE";

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// A coupling given either directly or as a multiple of μ₀.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MuSpec {
    Value(f64),
    Critical(f64),
}

impl MuSpec {
    pub fn resolve(&self, mu0: f64) -> f64 {
        match *self {
            MuSpec::Value(v) => v,
            MuSpec::Critical(k) => k * mu0,
        }
    }

    pub fn needs_mu0(&self) -> bool {
        matches!(self, MuSpec::Critical(_))
    }
}

impl FromStr for MuSpec {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(head) = t.strip_suffix("mu0") {
            let head = head.trim_end_matches(['*', '·', 'x']);
            if head.is_empty() {
                return Ok(MuSpec::Critical(1.0));
            }
            return match head.parse::<f64>() {
                Ok(k) if k > 0.0 && k.is_finite() => Ok(MuSpec::Critical(k)),
                _ => err(format!("invalid mu multiplier in `{s}`")),
            };
        }
        match t.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(MuSpec::Value(v)),
            _ => err(format!("mu must be a positive number, `mu0` or `k*mu0`, got `{s}`")),
        }
    }
}

impl fmt::Display for MuSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MuSpec::Value(v) => write!(f, "{v:?}"),
            MuSpec::Critical(k) if *k == 1.0 => f.write_str("mu0"),
            MuSpec::Critical(k) => write!(f, "{k:?}*mu0"),
        }
    }
}

impl Serialize for MuSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => err(format!("format must be csv or json, got `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanAxis {
    Z,
    W,
    P,
}

impl FromStr for ScanAxis {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "z" => Ok(ScanAxis::Z),
            "w" => Ok(ScanAxis::W),
            "p" => Ok(ScanAxis::P),
            _ => err(format!("scan.axis must be one of z, w, p; got `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Fast,
    Default,
    Strict,
}

impl Profile {
    pub fn factor(&self) -> f64 {
        match self {
            Profile::Fast => 0.5,
            Profile::Default => 1.0,
            Profile::Strict => 2.0,
        }
    }
}

impl FromStr for Profile {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "fast" => Ok(Profile::Fast),
            "default" | "" => Ok(Profile::Default),
            "strict" => Ok(Profile::Strict),
            _ => err(format!("{PROFILE_ENV} must be fast, default or strict; got `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FormFactorSpec {
    pub kind: FormFactorKind,
    pub coeffs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathSpec {
    pub waypoints: Vec<[f64; 3]>,
    /// Points per segment, endpoints included.
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanSpec {
    pub axis: ScanAxis,
    pub p: [f64; 3],
    pub z: f64,
    pub direction: [f64; 3],
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymSpec {
    pub w_grid: Vec<f64>,
    pub s_grid: Vec<f64>,
    pub directions: Vec<[f64; 3]>,
    pub h_step: f64,
    pub lb_samples: usize,
    pub hessian_samples: usize,
    /// Multiplies every theoretical slope; anything but 1 is a negative control.
    pub slope_scale: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleSpec {
    pub p: [f64; 3],
    pub sizes: Vec<usize>,
    pub dense_max_n: usize,
}

/// A fully resolved run configuration; embedded verbatim in every output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub form_factor: FormFactorSpec,
    pub mu: MuSpec,
    pub profile: Profile,
    pub quad: QuadratureSpec,
    pub path: PathSpec,
    pub scan: ScanSpec,
    pub solver_tol: f64,
    pub asym: AsymSpec,
    pub oracle: OracleSpec,
    pub seed: u64,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            form_factor: FormFactorSpec { kind: FormFactorKind::Constant, coeffs: vec![1.0] },
            mu: MuSpec::Critical(1.0),
            profile: Profile::Default,
            quad: QuadratureSpec::default(),
            path: PathSpec { waypoints: vec![[0.0; 3], [PI; 3]], steps: 20 },
            scan: ScanSpec {
                axis: ScanAxis::Z,
                p: [0.0; 3],
                z: 0.0,
                direction: [1.0, 0.0, 0.0],
                from: -10.0,
                to: 0.0,
                count: 21,
            },
            solver_tol: crate::eigensolver::DEFAULT_TOL,
            asym: AsymSpec {
                w_grid: vec![0.2, 0.1, 0.05, 0.025, 0.0125],
                s_grid: vec![0.1, 0.05, 0.025, 0.0125],
                directions: vec![[1.0, 0.0, 0.0], [1.0, 1.0, 1.0], [1.0, 2.0, 0.0]],
                h_step: 0.05,
                lb_samples: 20,
                hessian_samples: 50,
                slope_scale: 1.0,
            },
            oracle: OracleSpec { p: [1.0; 3], sizes: vec![8, 10, 12, 16], dense_max_n: 12 },
            seed: 20240901,
            format: Format::Csv,
        }
    }
}

impl RunConfig {
    pub fn form_factor(&self) -> Result<FormFactor, ConfigError> {
        FormFactor::from_parts(self.form_factor.kind, &self.form_factor.coeffs).map_err(|e| ConfigError(e.to_string()))
    }

    /// Waypoints joined by straight segments of `steps` points each.
    pub fn path_points(&self) -> Vec<TorusPoint> {
        expand_path(&self.path.waypoints, self.path.steps)
    }

    /// Parse config text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return err(format!("line {}: expected `key = value`, got `{raw}`", lineno + 1));
            };
            let key = if section.is_empty() { k.trim().to_string() } else { format!("{section}.{}", k.trim()) };
            cfg.set(&key, v.trim()).map_err(|e| ConfigError(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |e: String| ConfigError(format!("`{key}`: {e}"));
        match key {
            "form_factor.kind" => {
                self.form_factor.kind =
                    value.parse().map_err(|e: crate::form_factor::FormFactorError| bad(e.to_string()))?;
                self.form_factor.coeffs = match self.form_factor.kind {
                    FormFactorKind::Constant => vec![1.0],
                    _ => vec![],
                };
            }
            "form_factor.coeffs" => self.form_factor.coeffs = parse_list(value).map_err(bad)?,
            "mu" => self.mu = value.parse()?,
            "quad.n_grid" => self.quad.n_grid = parse_num(value).map_err(bad)?,
            "quad.patch_radius" => self.quad.patch_radius = parse_num(value).map_err(bad)?,
            "quad.n_radial" => self.quad.n_radial = parse_num(value).map_err(bad)?,
            "quad.n_angular" => self.quad.n_angular = parse_num(value).map_err(bad)?,
            "quad.target_rel_tol" => self.quad.target_rel_tol = parse_num(value).map_err(bad)?,
            "quad.max_refine" => self.quad.max_refine = parse_num(value).map_err(bad)?,
            "path.points" => self.path.waypoints = parse_points(value).map_err(bad)?,
            "path.steps" => self.path.steps = parse_num(value).map_err(bad)?,
            "scan.axis" => self.scan.axis = value.parse()?,
            "scan.p" => self.scan.p = parse_point(value).map_err(bad)?,
            "scan.z" => self.scan.z = parse_num(value).map_err(bad)?,
            "scan.direction" => self.scan.direction = parse_point(value).map_err(bad)?,
            "scan.from" => self.scan.from = parse_num(value).map_err(bad)?,
            "scan.to" => self.scan.to = parse_num(value).map_err(bad)?,
            "scan.count" => self.scan.count = parse_num(value).map_err(bad)?,
            "solver.tol" => self.solver_tol = parse_num(value).map_err(bad)?,
            "asym.w_grid" => self.asym.w_grid = parse_list(value).map_err(bad)?,
            "asym.s_grid" => self.asym.s_grid = parse_list(value).map_err(bad)?,
            "asym.directions" => self.asym.directions = parse_points(value).map_err(bad)?,
            "asym.h_step" => self.asym.h_step = parse_num(value).map_err(bad)?,
            "asym.lb_samples" => self.asym.lb_samples = parse_num(value).map_err(bad)?,
            "asym.hessian_samples" => self.asym.hessian_samples = parse_num(value).map_err(bad)?,
            "asym.slope_scale" => self.asym.slope_scale = parse_num(value).map_err(bad)?,
            "oracle.p" => self.oracle.p = parse_point(value).map_err(bad)?,
            "oracle.sizes" => self.oracle.sizes = parse_list(value).map_err(bad)?,
            "oracle.dense_max_n" => self.oracle.dense_max_n = parse_num(value).map_err(bad)?,
            "seed" => self.seed = parse_num(value).map_err(bad)?,
            "format" => self.format = value.parse()?,
            _ => return err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Validate, then scale the quadrature by the resolution profile.
    pub fn finish(mut self, profile: Profile) -> Result<Self, ConfigError> {
        self.form_factor()?;
        self.quad.validate().map_err(|e| ConfigError(e.to_string()))?;
        self.profile = profile;
        self.quad = self.quad.scaled(profile.factor());
        if self.path.waypoints.is_empty() {
            return err("path.points must name at least one point");
        }
        if self.path.waypoints.len() > 1 && self.path.steps < 2 {
            return err("path.steps must be at least 2");
        }
        if self.scan.count < 2 {
            return err("scan.count must be at least 2");
        }
        if !(self.solver_tol > 0.0) {
            return err("solver.tol must be positive");
        }
        if self.oracle.sizes.is_empty() {
            return err("oracle.sizes must be nonempty");
        }
        Ok(self)
    }
}

pub fn profile_from_env() -> Result<Profile, ConfigError> {
    match std::env::var(PROFILE_ENV) {
        Ok(v) => v.trim().parse(),
        Err(_) => Ok(Profile::Default),
    }
}

fn parse_num<T: FromStr>(s: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    s.trim().parse::<T>().map_err(|e| format!("cannot parse `{s}`: {e}"))
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    if s.trim().is_empty() {
        return Ok(vec![]);
    }
    s.split(',').map(parse_num).collect()
}

/// A coordinate: a number, or a multiple/fraction of `pi`.
fn parse_coord(s: &str) -> Result<f64, String> {
    let t = s.trim();
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let (sign, body) = match t.strip_prefix('-') {
        Some(b) => (-1.0, b.trim()),
        None => (1.0, t),
    };
    let (num, den) = match body.split_once('/') {
        Some((a, b)) => (a.trim(), parse_num::<f64>(b)?),
        None => (body, 1.0),
    };
    let mult = match num.strip_suffix("pi") {
        Some("") => PI,
        Some(k) => parse_num::<f64>(k.trim_end_matches('*'))? * PI,
        None => return Err(format!("cannot parse coordinate `{s}`")),
    };
    Ok(sign * mult / den)
}

/// A named point (G/Γ/Gamma, X, M, R) or a triple `(a, b, c)`.
pub fn parse_point(s: &str) -> Result<[f64; 3], String> {
    let t = s.trim();
    match t {
        "G" | "Γ" | "Gamma" => return Ok([0.0; 3]),
        "X" => return Ok([PI, 0.0, 0.0]),
        "M" => return Ok([PI, PI, 0.0]),
        "R" => return Ok([PI; 3]),
        _ => {}
    }
    let inner = t.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(t);
    let parts: Vec<&str> = inner.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected a named point or (a, b, c), got `{s}`"));
    }
    Ok([parse_coord(parts[0])?, parse_coord(parts[1])?, parse_coord(parts[2])?])
}

/// Comma-separated points; commas inside parentheses belong to the point.
pub fn parse_points(s: &str) -> Result<Vec<[f64; 3]>, String> {
    let mut out = vec![];
    let mut depth = 0;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(parse_point(&s[start..i])?);
                start = i + 1;
            }
            _ => {}
        }
    }
    if !s[start..].trim().is_empty() {
        out.push(parse_point(&s[start..])?);
    }
    Ok(out)
}

pub fn expand_path(waypoints: &[[f64; 3]], steps: usize) -> Vec<TorusPoint> {
    if waypoints.len() == 1 {
        return vec![TorusPoint::from_array(waypoints[0])];
    }
    let mut out = vec![TorusPoint::from_array(waypoints[0])];
    for w in waypoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        for j in 1..steps {
            let x = if j == steps - 1 {
                b
            } else {
                let t = j as f64 / (steps - 1) as f64;
                [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t]
            };
            out.push(TorusPoint::from_array(x));
        }
    }
    out
}
