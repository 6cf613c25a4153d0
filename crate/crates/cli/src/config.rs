//! Run configuration: `[section]` headers, `key = value` lines and `#` comments.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ini::{Ini, ParseOption};
use num_complex::Complex64;
use tailwave_core::evolve_ads::Integrator;
use tailwave_core::evolve_null::{NullMode, PhysicalDomain, RayData, RayProfile};
use tailwave_core::initdata::{DataFamily, FamilyKind};
use tailwave_core::model::{validate_params, Kind, ModelParams};

use crate::error::{CliError, CliResult};

const KNOWN_KEYS: &[(&str, &[&str])] = &[
    ("model", &["kind", "a", "q", "e"]),
    ("grid", &["n_r", "r_max", "cfl", "integrator"]),
    (
        "data",
        &[
            "family",
            "center",
            "width",
            "amplitude_re",
            "amplitude_im",
            "velocity_re",
            "velocity_im",
            "ell",
            "m",
            "delta",
            "table",
        ],
    ),
    (
        "null",
        &["mode", "u0", "u_max", "v0", "v_max", "h", "n", "profile", "center", "width", "radii"],
    ),
    ("run", &["t_end", "snapshot_stride", "output_dir", "seed"]),
];

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub n_r: usize,
    pub r_max: f64,
    pub cfl: f64,
    pub integrator: Integrator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataConfig {
    pub family: DataFamily,
    pub delta: Option<f64>,
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullConfig {
    pub mode: NullMode,
    pub domain: PhysicalDomain,
    /// Compactified lattice size.
    pub n: usize,
    pub ray: RayData,
    pub radii: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSection {
    pub t_end: f64,
    pub snapshot_stride: usize,
    pub output_dir: PathBuf,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelParams,
    pub grid: GridConfig,
    pub data: DataConfig,
    pub null: NullConfig,
    pub run: RunSection,
    /// Normalized `section.key = value` pairs, for the manifest.
    pub echo: Vec<(String, String)>,
}

/// Raw key-value view with typed getters.
struct Sections {
    values: BTreeMap<(String, String), String>,
}

impl Sections {
    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.values
            .get(&(section.to_string(), key.to_string()))
            .map(String::as_str)
    }

    fn bad(section: &str, key: &str, message: impl Into<String>) -> CliError {
        CliError::ConfigValue {
            section: section.into(),
            key: key.into(),
            message: message.into(),
        }
    }

    fn parse<T: std::str::FromStr>(&self, section: &str, key: &str, default: T) -> CliResult<T> {
        match self.get(section, key) {
            None => Ok(default),
            Some(text) => text
                .parse()
                .map_err(|_| Self::bad(section, key, format!("cannot parse '{text}'"))),
        }
    }

    fn real(&self, section: &str, key: &str, default: f64) -> CliResult<f64> {
        let v: f64 = self.parse(section, key, default)?;
        if !v.is_finite() {
            return Err(Self::bad(section, key, "must be finite"));
        }
        Ok(v)
    }
}

fn parse_sections(text: &str) -> CliResult<Sections> {
    let ini = Ini::load_from_str_opt(
        text,
        ParseOption {
            enabled_quote: false,
            enabled_escape: false,
            ..ParseOption::default()
        },
    )
    .map_err(|e| CliError::ConfigSyntax {
        line: e.line,
        message: e.msg.to_string(),
    })?;
    let mut values = BTreeMap::new();
    for (section, props) in ini.iter() {
        let Some(section) = section else {
            if let Some((key, _)) = props.iter().next() {
                return Err(CliError::ConfigSyntax {
                    line: 0,
                    message: format!("key '{key}' appears before any [section]"),
                });
            }
            continue;
        };
        let known = KNOWN_KEYS
            .iter()
            .find(|(s, _)| *s == section)
            .ok_or_else(|| CliError::ConfigSyntax {
                line: 0,
                message: format!("unknown section [{section}]"),
            })?;
        for (key, value) in props.iter() {
            if !known.1.contains(&key) {
                return Err(Sections::bad(section, key, "unknown key"));
            }
            let slot = (section.to_string(), key.to_string());
            if values.insert(slot, value.trim().to_string()).is_some() {
                return Err(Sections::bad(section, key, "duplicate key"));
            }
        }
    }
    Ok(Sections { values })
}

impl RunConfig {
    /// Parses configuration text. Relative paths resolve against `base`.
    pub fn from_text(text: &str, base: &Path) -> CliResult<Self> {
        let s = parse_sections(text)?;

        let kind: Kind = s
            .get("model", "kind")
            .ok_or_else(|| Sections::bad("model", "kind", "missing"))?
            .parse()
            .map_err(|e: tailwave_core::Error| Sections::bad("model", "kind", e.to_string()))?;
        let model = match kind {
            Kind::Isp => ModelParams::isp(s.real("model", "a", 0.0)?),
            Kind::Csf => ModelParams::csf(s.real("model", "q", 0.0)?, s.real("model", "e", 1.0)?),
        };
        let model = validate_params(model)?;

        let integrator: Integrator = match s.get("grid", "integrator") {
            None => Integrator::ImplicitMidpoint,
            Some(t) => t
                .parse()
                .map_err(|e: tailwave_core::Error| Sections::bad("grid", "integrator", e.to_string()))?,
        };
        let grid = GridConfig {
            n_r: s.parse("grid", "n_r", 512)?,
            r_max: s.real("grid", "r_max", tailwave_core::evolve_ads::DEFAULT_R_MAX)?,
            cfl: s.real("grid", "cfl", 0.4)?,
            integrator,
        };

        let family_kind: FamilyKind = match s.get("data", "family") {
            None => FamilyKind::Bump,
            Some(t) => t
                .parse()
                .map_err(|e: tailwave_core::Error| Sections::bad("data", "family", e.to_string()))?,
        };
        let ell: usize = s.parse("data", "ell", 0)?;
        let amplitude = Complex64::new(s.real("data", "amplitude_re", 1.0)?, s.real("data", "amplitude_im", 0.0)?);
        let velocity = Complex64::new(s.real("data", "velocity_re", 0.0)?, s.real("data", "velocity_im", 0.0)?);
        let mut family = DataFamily {
            kind: family_kind,
            center: s.real("data", "center", 0.4)?,
            width: s.real("data", "width", 0.3)?,
            amplitude,
            velocity,
            ell,
            m: s.parse("data", "m", 0)?,
            table: Vec::new(),
        };
        if family.m.unsigned_abs() as usize > ell {
            return Err(Sections::bad("data", "m", format!("|m| must not exceed ell = {ell}")));
        }
        let table = s.get("data", "table").map(|t| base.join(t));
        if family_kind == FamilyKind::CustomTable {
            let path = table
                .as_ref()
                .ok_or_else(|| Sections::bad("data", "table", "custom_table needs a table path"))?;
            if !path.exists() {
                return Err(CliError::ConfigFile {
                    path: path.clone(),
                    message: "table file not found".into(),
                });
            }
            family.table = tailwave_core::io::read_custom_table_file(path)?;
        }
        let delta = match s.get("data", "delta") {
            None => None,
            Some(_) => Some(s.real("data", "delta", 0.0)?),
        };

        let mode = match s.get("null", "mode").unwrap_or("physical") {
            "physical" => NullMode::Physical,
            "compactified" => NullMode::Compactified,
            other => return Err(Sections::bad("null", "mode", format!("unknown mode '{other}'"))),
        };
        let defaults = PhysicalDomain::default();
        let domain = PhysicalDomain {
            u0: s.real("null", "u0", defaults.u0)?,
            u_max: s.real("null", "u_max", defaults.u_max)?,
            v0: s.real("null", "v0", defaults.v0)?,
            v_max: s.real("null", "v_max", defaults.v_max)?,
            h: s.real("null", "h", defaults.h)?,
        };
        let profile: RayProfile = match s.get("null", "profile") {
            None => RayProfile::Bump,
            Some(t) => t
                .parse()
                .map_err(|e: tailwave_core::Error| Sections::bad("null", "profile", e.to_string()))?,
        };
        let ray = RayData {
            profile,
            center: s.real("null", "center", 2.0)?,
            width: s.real("null", "width", 1.0)?,
            amplitude,
        };
        let radii = match s.get("null", "radii") {
            None => vec![1.0],
            Some(list) => list
                .split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Sections::bad("null", "radii", format!("cannot parse '{t}'")))
                })
                .collect::<CliResult<Vec<f64>>>()?,
        };
        let null = NullConfig {
            mode,
            domain,
            n: s.parse("null", "n", 256)?,
            ray,
            radii,
        };

        let output_dir = PathBuf::from(s.get("run", "output_dir").unwrap_or("output"));
        let run = RunSection {
            t_end: s.real("run", "t_end", 0.0)?,
            snapshot_stride: s.parse("run", "snapshot_stride", 0)?,
            output_dir: if output_dir.is_absolute() { output_dir } else { base.join(output_dir) },
            seed: s.parse("run", "seed", 0)?,
        };

        let echo = s
            .values
            .iter()
            .map(|((sec, key), v)| (format!("{sec}.{key}"), v.clone()))
            .collect();
        Ok(RunConfig {
            model,
            grid,
            data: DataConfig { family, delta, table },
            null,
            run,
            echo,
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::ConfigFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_text(&text, base)
    }

    /// Output directory, honouring the `TAILWAVE_OUTPUT` override.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os("TAILWAVE_OUTPUT") {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.run.output_dir.clone(),
        }
    }
}

/// Entry point for fuzzing: parse without touching the filesystem beyond table lookups.
pub fn parse_config_text(text: &str) -> CliResult<RunConfig> {
    RunConfig::from_text(text, Path::new("."))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# bump data for the charged model
[model]
kind = csf
q = 0.3
e = 1.0

[grid]
n_r = 256
cfl = 0.4

[data]
family = bump
center = 0.4
width = 0.3
ell = 1
m = -1

[null]
mode = compactified
radii = 1, 2.5

[run]
output_dir = out
seed = 7
";

    #[test]
    fn parses_sample() {
        let cfg = RunConfig::from_text(SAMPLE, Path::new("/tmp/x")).unwrap();
        assert_eq!(cfg.model.kind, Kind::Csf);
        assert!((cfg.model.qe() - 0.3).abs() < 1e-15);
        assert_eq!(cfg.grid.n_r, 256);
        assert_eq!(cfg.grid.r_max, 2.5);
        assert_eq!(cfg.data.family.ell, 1);
        assert_eq!(cfg.data.family.m, -1);
        assert_eq!(cfg.null.mode, NullMode::Compactified);
        assert_eq!(cfg.null.radii, vec![1.0, 2.5]);
        assert_eq!(cfg.run.output_dir, PathBuf::from("/tmp/x/out"));
        assert_eq!(cfg.run.seed, 7);
        assert!(cfg.echo.iter().any(|(k, v)| k == "model.kind" && v == "csf"));
    }

    #[test]
    fn rejects_malformed_configs() {
        let cases = [
            "[model]\nkind = isp\nbogus = 1\n",
            "[nowhere]\nx = 1\n",
            "kind = isp\n",
            "[model]\nkind = isp\na = x\n",
            "[model]\nkind = isp\na = -1\n",
            "[model]\nkind = csf\nq = 0.9\ne = 1\n",
            "[model]\na = 1\n",
            "[model]\nkind = isp\n[data]\nell = 0\nm = 1\n",
            "[model]\nkind = isp\n[null]\nmode = sideways\n",
            "[model]\nkind = isp\n[data]\nfamily = custom_table\n",
            "[model]\nkind = isp\na = 1\na = 2\n",
        ];
        for text in cases {
            assert!(parse_config_text(text).is_err(), "accepted: {text:?}");
        }
    }

    #[test]
    fn missing_file_names_path() {
        let err = RunConfig::load(Path::new("/no/such/run.cfg")).unwrap_err();
        assert!(err.to_string().contains("/no/such/run.cfg"));
        assert_eq!(err.exit_status(), crate::error::ExitStatus::Validation);
    }
}
