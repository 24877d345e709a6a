//! Run configuration: a line-oriented `key = value` format with `#`
//! comments. Unknown keys are hard errors so a typo in a tolerance name can
//! never silently change what a run verifies.

use std::path::{Path, PathBuf};

use crate::error::{ConfigError, IoError};
use crate::geometry::Point2;

/// Where the background mesh comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    /// Structured acute mesh over `domain` with `n` columns.
    Generate,
    File(PathBuf),
}

/// Initial crack description.
#[derive(Debug, Clone, PartialEq)]
pub enum CrackSource {
    /// Straight segment between two points.
    Segment(Point2, Point2),
    /// Circular arc: center, radius, start and end angle (radians,
    /// counterclockwise; the end angle is the growing tip).
    Arc {
        center: Point2,
        r: f64,
        theta0: f64,
        theta1: f64,
    },
    File(PathBuf),
}

/// Built-in load shapes (unit magnitude; all scaling lives in the critical
/// load factor).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadKind {
    /// Dirichlet data of the exact straight-crack tension field spanning the
    /// current crack.
    Griffith,
    /// Dirichlet data of the exact arc-crack field for the current span,
    /// with the tension direction chosen so the growing tip is in pure
    /// mode I.
    Arc,
    /// Uniform tension tractions on the top and bottom boundary.
    Uniaxial,
}

/// A full run description; see `RunConfig::help_text` for every key and its
/// default.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: String,
    pub mesh: MeshSource,
    pub domain: (Point2, Point2),
    pub n: usize,
    /// Red-green refinement passes in shrinking tubes around the initial
    /// crack (0 = uniform mesh).
    pub tip_refine: usize,
    pub crack: CrackSource,
    /// Number of knots discretizing a generated initial crack.
    pub crack_knots: usize,
    pub e: f64,
    pub nu: f64,
    pub plane_strain: bool,
    pub k_c: f64,
    pub load: LoadKind,
    pub sigma: f64,
    /// Crack increment per step; `None` means 2 x the background mesh size.
    pub delta_ell: Option<f64>,
    pub n_steps: usize,
    pub r_q_factor: f64,
    pub q_min: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: "run".into(),
            mesh: MeshSource::Generate,
            domain: (Point2::new(-10.0, -10.0), Point2::new(10.0, 10.0)),
            n: 40,
            tip_refine: 0,
            crack: CrackSource::Segment(Point2::new(-1.0, 0.0), Point2::new(1.0, 0.0)),
            crack_knots: 9,
            e: 1.0,
            nu: 0.3,
            plane_strain: true,
            k_c: 1.0,
            load: LoadKind::Griffith,
            sigma: 1.0,
            delta_ell: None,
            n_steps: 10,
            r_q_factor: 4.0,
            q_min: 0.2,
            seed: 0,
            out: "out".into(),
            threads: 1,
        }
    }
}

fn bad(key: &str, detail: impl Into<String>) -> ConfigError {
    ConfigError::BadValue {
        key: key.to_string(),
        detail: detail.into(),
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse().map_err(|_| bad(key, format!("not a number: `{v}`")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize, ConfigError> {
    v.parse()
        .map_err(|_| bad(key, format!("not a non-negative integer: `{v}`")))
}

fn parse_floats(key: &str, v: &str, n: usize) -> Result<Vec<f64>, ConfigError> {
    let vals: Vec<f64> = v
        .split_whitespace()
        .map(|t| parse_f64(key, t))
        .collect::<Result<_, _>>()?;
    if vals.len() != n {
        return Err(bad(key, format!("expected {n} numbers, got {}", vals.len())));
    }
    Ok(vals)
}

impl RunConfig {
    /// Parse a configuration; every key is optional and falls back to the
    /// documented default.
    pub fn from_str(text: &str, path: &str) -> Result<RunConfig, ConfigError> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError::Io(IoError::Parse {
                    path: path.to_string(),
                    line: lineno + 1,
                    detail: format!("expected `key = value`, got `{line}`"),
                })
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "problem" => cfg.problem = value.to_string(),
                "mesh" => {
                    cfg.mesh = if value == "generate" {
                        MeshSource::Generate
                    } else if let Some(p) = value.strip_prefix("file:") {
                        MeshSource::File(p.trim().into())
                    } else {
                        return Err(bad(key, "expected `generate` or `file:<path>`"));
                    }
                }
                "domain" => {
                    let v = parse_floats(key, value, 4)?;
                    cfg.domain = (Point2::new(v[0], v[1]), Point2::new(v[2], v[3]));
                }
                "n" => cfg.n = parse_usize(key, value)?,
                "tip_refine" => cfg.tip_refine = parse_usize(key, value)?,
                "crack" => {
                    let mut parts = value.split_whitespace();
                    let kind = parts.next().unwrap_or("");
                    let rest = value[kind.len()..].trim();
                    cfg.crack = match kind {
                        "segment" => {
                            let v = parse_floats(key, rest, 4)?;
                            CrackSource::Segment(
                                Point2::new(v[0], v[1]),
                                Point2::new(v[2], v[3]),
                            )
                        }
                        "arc" => {
                            let v = parse_floats(key, rest, 5)?;
                            CrackSource::Arc {
                                center: Point2::new(v[0], v[1]),
                                r: v[2],
                                theta0: v[3],
                                theta1: v[4],
                            }
                        }
                        _ => {
                            if let Some(p) = value.strip_prefix("file:") {
                                CrackSource::File(p.trim().into())
                            } else {
                                return Err(bad(
                                    key,
                                    "expected `segment x0 y0 x1 y1`, \
                                     `arc cx cy r theta0 theta1` or `file:<path>`",
                                ));
                            }
                        }
                    };
                }
                "crack_knots" => cfg.crack_knots = parse_usize(key, value)?,
                "e" => cfg.e = parse_f64(key, value)?,
                "nu" => cfg.nu = parse_f64(key, value)?,
                "mode" => {
                    cfg.plane_strain = match value {
                        "plane_strain" => true,
                        "plane_stress" => false,
                        _ => {
                            return Err(bad(key, "expected `plane_strain` or `plane_stress`"))
                        }
                    }
                }
                "k_c" => cfg.k_c = parse_f64(key, value)?,
                "load" => {
                    cfg.load = match value {
                        "griffith" => LoadKind::Griffith,
                        "arc" => LoadKind::Arc,
                        "uniaxial" => LoadKind::Uniaxial,
                        _ => return Err(bad(key, "expected `griffith`, `arc` or `uniaxial`")),
                    }
                }
                "sigma" => cfg.sigma = parse_f64(key, value)?,
                "delta_ell" => cfg.delta_ell = Some(parse_f64(key, value)?),
                "n_steps" => cfg.n_steps = parse_usize(key, value)?,
                "r_q_factor" => cfg.r_q_factor = parse_f64(key, value)?,
                "q_min" => cfg.q_min = parse_f64(key, value)?,
                "seed" => {
                    cfg.seed = value
                        .parse()
                        .map_err(|_| bad(key, format!("not an integer: `{value}`")))?
                }
                "out" => cfg.out = value.into(),
                "threads" => cfg.threads = parse_usize(key, value)?,
                other => return Err(ConfigError::UnknownKey(other.to_string())),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<RunConfig, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| IoError::Io {
            path: path.display().to_string(),
            source,
        })?;
        RunConfig::from_str(&text, &path.display().to_string())
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if !(self.e > 0.0) {
            return Err(bad("e", "Young modulus must be positive"));
        }
        if !(self.nu > -1.0 && self.nu < 0.5) {
            return Err(bad("nu", format!("nu = {} out of range (-1, 0.5)", self.nu)));
        }
        if !(self.k_c > 0.0) {
            return Err(bad("k_c", "fracture toughness must be positive"));
        }
        if !self.sigma.is_finite() {
            return Err(bad("sigma", "load magnitude must be finite"));
        }
        if self.n == 0 {
            return Err(bad("n", "mesh resolution must be positive"));
        }
        if self.crack_knots < 2 {
            return Err(bad("crack_knots", "need at least 2 knots"));
        }
        if !(self.q_min > 0.0 && self.q_min < 1.0) {
            return Err(bad("q_min", "quality floor must be in (0, 1)"));
        }
        if let Some(d) = self.delta_ell {
            if !(d > 0.0) {
                return Err(bad("delta_ell", "step length must be positive"));
            }
        }
        if !(self.r_q_factor > 0.0) {
            return Err(bad("r_q_factor", "extraction radius factor must be positive"));
        }
        if self.threads != 1 {
            return Err(bad("threads", "only sequential runs (threads = 1) are supported"));
        }
        let (lo, hi) = self.domain;
        if !(hi.x > lo.x && hi.y > lo.y) {
            return Err(bad("domain", "expected x0 y0 x1 y1 with x0 < x1, y0 < y1"));
        }
        Ok(())
    }

    /// Serialize back to the config format; parsing the result reproduces
    /// the config exactly.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let p = |s: &mut String, k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        p(&mut s, "problem", self.problem.clone());
        match &self.mesh {
            MeshSource::Generate => p(&mut s, "mesh", "generate".into()),
            MeshSource::File(f) => p(&mut s, "mesh", format!("file:{}", f.display())),
        }
        p(
            &mut s,
            "domain",
            format!(
                "{} {} {} {}",
                self.domain.0.x, self.domain.0.y, self.domain.1.x, self.domain.1.y
            ),
        );
        p(&mut s, "n", self.n.to_string());
        p(&mut s, "tip_refine", self.tip_refine.to_string());
        match &self.crack {
            CrackSource::Segment(a, b) => p(
                &mut s,
                "crack",
                format!("segment {} {} {} {}", a.x, a.y, b.x, b.y),
            ),
            CrackSource::Arc {
                center,
                r,
                theta0,
                theta1,
            } => p(
                &mut s,
                "crack",
                format!("arc {} {} {r} {theta0} {theta1}", center.x, center.y),
            ),
            CrackSource::File(f) => p(&mut s, "crack", format!("file:{}", f.display())),
        }
        p(&mut s, "crack_knots", self.crack_knots.to_string());
        p(&mut s, "e", self.e.to_string());
        p(&mut s, "nu", self.nu.to_string());
        p(
            &mut s,
            "mode",
            if self.plane_strain {
                "plane_strain".into()
            } else {
                "plane_stress".into()
            },
        );
        p(&mut s, "k_c", self.k_c.to_string());
        p(
            &mut s,
            "load",
            match self.load {
                LoadKind::Griffith => "griffith".into(),
                LoadKind::Arc => "arc".into(),
                LoadKind::Uniaxial => "uniaxial".into(),
            },
        );
        p(&mut s, "sigma", self.sigma.to_string());
        if let Some(d) = self.delta_ell {
            p(&mut s, "delta_ell", d.to_string());
        }
        p(&mut s, "n_steps", self.n_steps.to_string());
        p(&mut s, "r_q_factor", self.r_q_factor.to_string());
        p(&mut s, "q_min", self.q_min.to_string());
        p(&mut s, "seed", self.seed.to_string());
        p(&mut s, "out", self.out.display().to_string());
        p(&mut s, "threads", self.threads.to_string());
        s
    }

    /// Material derived from the config.
    pub fn material(&self) -> crate::fem::Material {
        crate::fem::Material {
            e: self.e,
            nu: self.nu,
            plane_strain: self.plane_strain,
            k_c: self.k_c,
        }
    }

    /// Output directory, honoring the `UNIMESH_OUT` override.
    pub fn out_dir(&self) -> PathBuf {
        match std::env::var_os("UNIMESH_OUT") {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => self.out.clone(),
        }
    }

    /// Every key with its meaning and default, for `--help`.
    pub fn help_text() -> &'static str {
        "configuration keys (line-oriented `key = value`, `#` comments, \
unknown keys are errors):\n\
  problem      run name used in artifact files        (default: run)\n\
  mesh         `generate` or `file:<path>`            (default: generate)\n\
  domain       x0 y0 x1 y1 of the generated mesh      (default: -10 -10 10 10)\n\
  n            generated mesh columns                 (default: 40)\n\
  tip_refine   local refinement passes near the crack (default: 0)\n\
  crack        `segment x0 y0 x1 y1`, `arc cx cy r theta0 theta1`\n\
               or `file:<path>`                       (default: segment -1 0 1 0)\n\
  crack_knots  knots discretizing a generated crack   (default: 9)\n\
  e            Young modulus, > 0                     (default: 1)\n\
  nu           Poisson ratio in (-1, 0.5)             (default: 0.3)\n\
  mode         `plane_strain` or `plane_stress`       (default: plane_strain)\n\
  k_c          fracture toughness, > 0                (default: 1)\n\
  load         `griffith`, `arc` or `uniaxial`        (default: griffith)\n\
  sigma        unit-load magnitude                    (default: 1)\n\
  delta_ell    crack increment per step               (default: 2 x mesh size)\n\
  n_steps      propagation steps                      (default: 10)\n\
  r_q_factor   extraction radius in tip mesh sizes    (default: 4)\n\
  q_min        conformation quality floor in (0, 1)   (default: 0.2)\n\
  seed         seed for randomized suites             (default: 0)\n\
  out          output directory (UNIMESH_OUT overrides) (default: out)\n\
  threads      worker threads (only 1 supported)      (default: 1)\n"
    }
}

/// Run provenance: the effective config, artifact paths and timings,
/// written atomically at the end of a run.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config: RunConfig,
    pub version: String,
    pub artifacts: Vec<PathBuf>,
    pub wall_seconds: f64,
    pub status: String,
}

impl RunManifest {
    pub fn to_manifest_string(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("# unimesh {} run manifest\n", self.version));
        s.push_str(&format!("# status: {}\n", self.status));
        s.push_str(&format!("# wall_seconds: {:.3}\n", self.wall_seconds));
        for a in &self.artifacts {
            s.push_str(&format!("# artifact: {}\n", a.display()));
        }
        s.push_str("# effective configuration follows\n");
        s.push_str(&self.config.to_config_string());
        s
    }

    /// Write via a temporary file and rename so a partial manifest is never
    /// observed.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), IoError> {
        let path = path.as_ref();
        let tmp = path.with_extension("tmp");
        let io_err = |source| IoError::Io {
            path: path.display().to_string(),
            source,
        };
        std::fs::write(&tmp, self.to_manifest_string()).map_err(io_err)?;
        std::fs::rename(&tmp, path).map_err(io_err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = RunConfig::from_str("e = 10\nnu = 0.25\nk_c = 2\nload = griffith\n", "t")
            .unwrap();
        assert_eq!(cfg.n, 40);
        assert_eq!(cfg.n_steps, 10);
        assert!(cfg.delta_ell.is_none());
        assert!(cfg.plane_strain);
        assert_eq!(cfg.material().k_c, 2.0);
    }

    #[test]
    fn unknown_key_is_an_error() {
        assert!(matches!(
            RunConfig::from_str("qmin = 0.2\n", "t"),
            Err(ConfigError::UnknownKey(k)) if k == "qmin"
        ));
    }

    #[test]
    fn nu_out_of_range_names_the_key() {
        let err = RunConfig::from_str("nu = 0.7\n", "t").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("nu") && msg.contains("out of range"), "{msg}");
    }

    #[test]
    fn config_round_trips_through_its_own_format() {
        let text = "problem = bench\nmesh = generate\ndomain = -2 -2 2 2\nn = 24\n\
                    crack = arc 0 0 2 -0.2 0.2\ne = 5\nnu = 0.2\nmode = plane_stress\n\
                    k_c = 1.5\nload = arc\ndelta_ell = 0.125\nn_steps = 7\nseed = 3\n";
        let cfg = RunConfig::from_str(text, "t").unwrap();
        let echo = cfg.to_config_string();
        let cfg2 = RunConfig::from_str(&echo, "echo").unwrap();
        assert_eq!(cfg, cfg2);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = RunConfig::from_str("# a comment\n\nn = 8 # trailing\n", "t").unwrap();
        assert_eq!(cfg.n, 8);
    }

    #[test]
    fn manifest_contains_reparseable_config() {
        let cfg = RunConfig::default();
        let man = RunManifest {
            config: cfg.clone(),
            version: "0.1.0".into(),
            artifacts: vec!["out/records.csv".into()],
            wall_seconds: 1.25,
            status: "ok".into(),
        };
        let text = man.to_manifest_string();
        let cfg2 = RunConfig::from_str(&text, "manifest").unwrap();
        assert_eq!(cfg, cfg2);
    }
}
