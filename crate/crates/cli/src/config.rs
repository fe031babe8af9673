//! Run configuration: a JSON file, overridden field by field by flags.

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use fockswap_core::protocol::{HeraldCase, ProtocolParams};
use fockswap_core::serde_complex::ComplexRepr;
use fockswap_core::Complex64;
use serde::{Deserialize, Serialize};

/// Deviation from unit norm tolerated silently before renormalizing.
pub const HAND_TYPED_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Herald {
    D3,
    D4,
}

impl From<Herald> for HeraldCase {
    fn from(h: Herald) -> Self {
        match h {
            Herald::D3 => HeraldCase::D3,
            Herald::D4 => HeraldCase::D4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SweepProtocol {
    Swap,
    #[default]
    Transfer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsConfig {
    pub a: ComplexRepr,
    pub b: ComplexRepr,
    pub c: ComplexRepr,
    pub d: ComplexRepr,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        let h = ComplexRepr {
            re: FRAC_1_SQRT_2,
            im: 0.0,
        };
        ParamsConfig { a: h, b: h, c: h, d: h }
    }
}

/// Mirror of the file format; every field optional so partial files work.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<String>,
    pub params: Option<ParamsConfig>,
    pub herald: Option<Herald>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub grid: Option<usize>,
    pub protocol: Option<SweepProtocol>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonFlags {
    #[arg(long, allow_hyphen_values = true)]
    pub a_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a_im: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b_im: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c_im: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub d_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub d_im: Option<f64>,
    /// Herald detector for `swap`.
    #[arg(long, value_enum)]
    pub herald: Option<Herald>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random draws: oracle checks for `verify`, sample points for `sweep`.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Points per angle for a grid sweep (used when `--samples` is absent).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Protocol repeated by `sweep`.
    #[arg(long, value_enum)]
    pub protocol: Option<SweepProtocol>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON config file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Fully resolved configuration, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub params: ParamsConfig,
    pub herald: Herald,
    pub seed: u64,
    pub samples: Option<usize>,
    pub grid: usize,
    pub protocol: SweepProtocol,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub format: Format,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

pub const DEFAULT_SEED: u64 = 2024;
pub const DEFAULT_GRID: usize = 5;

/// A configuration problem; the CLI exits with status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn load_file(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| ConfigError(format!("malformed config {}: {e}", path.display())))
}

fn set(target: &mut ComplexRepr, re: Option<f64>, im: Option<f64>) {
    if let Some(re) = re {
        target.re = re;
    }
    if let Some(im) = im {
        target.im = im;
    }
}

impl RunConfig {
    pub fn resolve(command: &str, flags: &CommonFlags) -> Result<Self, ConfigError> {
        let file = match &flags.config {
            Some(p) => load_file(p)?,
            None => FileConfig::default(),
        };
        let mut warnings = Vec::new();
        if let Some(c) = &file.command {
            if c != command {
                warnings.push(format!("config file names command {c}; running {command}"));
            }
        }
        let mut params = file.params.unwrap_or_default();
        set(&mut params.a, flags.a_re, flags.a_im);
        set(&mut params.b, flags.b_re, flags.b_im);
        set(&mut params.c, flags.c_re, flags.c_im);
        set(&mut params.d, flags.d_re, flags.d_im);
        let values = [params.a, params.b, params.c, params.d];
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(ConfigError("parameters must be finite".into()));
        }
        for (pair, names) in [
            ((&mut params.a, &mut params.b), "a,b"),
            ((&mut params.c, &mut params.d), "c,d"),
        ] {
            let (x, y) = pair;
            let n2 = x.re * x.re + x.im * x.im + y.re * y.re + y.im * y.im;
            if n2 == 0.0 {
                return Err(ConfigError(format!("({names}) is the zero vector")));
            }
            let n = n2.sqrt();
            if (n2 - 1.0).abs() > HAND_TYPED_TOLERANCE {
                warnings.push(format!("({names}) has norm² {n2:.12}; renormalized"));
            }
            for z in [x, y] {
                z.re /= n;
                z.im /= n;
            }
        }
        let grid = flags.grid.or(file.grid).unwrap_or(DEFAULT_GRID);
        if grid < 2 {
            return Err(ConfigError("grid needs at least 2 points per angle".into()));
        }
        Ok(RunConfig {
            command: command.to_string(),
            params,
            herald: flags.herald.or(file.herald).unwrap_or(Herald::D3),
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            samples: flags.samples.or(file.samples),
            grid,
            protocol: flags.protocol.or(file.protocol).unwrap_or_default(),
            out: flags.out.clone().or(file.out),
            format: flags.format.or(file.format).unwrap_or_default(),
            warnings,
        })
    }

    pub fn protocol_params(&self) -> ProtocolParams {
        let p = &self.params;
        ProtocolParams::new(
            Complex64::from(p.a),
            Complex64::from(p.b),
            Complex64::from(p.c),
            Complex64::from(p.d),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn defaults_are_balanced() {
        let cfg = RunConfig::resolve("swap", &CommonFlags::default()).unwrap();
        assert_eq!(cfg.params, ParamsConfig::default());
        assert!(cfg.warnings.is_empty());
        assert!(cfg.protocol_params().validate().is_ok());
    }

    #[test]
    fn flags_override_file() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, r#"{{"params": {{"a": {{"re": 1, "im": 0}}, "b": {{"re": 0, "im": 0}}, "c": {{"re": 1, "im": 0}}, "d": {{"re": 0, "im": 0}}}}, "seed": 9}}"#).unwrap();
        let flags = CommonFlags {
            config: Some(f.path().to_path_buf()),
            c_re: Some(0.6),
            d_re: Some(0.8),
            seed: Some(3),
            ..Default::default()
        };
        let cfg = RunConfig::resolve("transfer", &flags).unwrap();
        assert_eq!(cfg.params.a.re, 1.0);
        assert_eq!(cfg.params.c.re, 0.6);
        assert_eq!(cfg.params.d.re, 0.8);
        assert_eq!(cfg.seed, 3);
    }

    #[test]
    fn hand_typed_values_renormalized_with_warning() {
        let flags = CommonFlags {
            c_re: Some(0.8),
            d_re: Some(0.61),
            ..Default::default()
        };
        let cfg = RunConfig::resolve("transfer", &flags).unwrap();
        assert_eq!(cfg.warnings.len(), 1);
        assert!(cfg.protocol_params().validate().is_ok());
    }

    #[test]
    fn zero_vector_rejected() {
        let flags = CommonFlags {
            a_re: Some(0.0),
            b_re: Some(0.0),
            ..Default::default()
        };
        assert!(RunConfig::resolve("swap", &flags).is_err());
    }
}
