//! File-driven run configuration.

use crate::CliError;
use cone_schrodinger::{ConeModel, CrossSection, GridKind};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub cone: ConeBlock,
    pub grid: GridBlock,
    pub datum: Option<DatumSpec>,
    /// Subcommand-specific keys, checked by the subcommand.
    pub experiment: Option<toml::Table>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)
            .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))?;
        // Relative datum paths are taken relative to the config file.
        if let Some(DatumSpec {
            profile: Profile::Csv { path: p },
            ..
        }) = cfg.datum.as_mut()
        {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    /// The `[experiment]` table as the parameters of one subcommand.
    pub fn experiment<T: for<'de> Deserialize<'de> + Default>(&self) -> Result<T, CliError> {
        match &self.experiment {
            None => Ok(T::default()),
            Some(t) => t
                .clone()
                .try_into()
                .map_err(|e| CliError::Config(format!("[experiment]: {e}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionKind {
    Circle,
    Sphere,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConeBlock {
    pub n: u32,
    pub cross_section: SectionKind,
    pub alpha: f64,
    pub a: f64,
    /// Spectrum truncation.
    #[serde(rename = "K")]
    pub k: f64,
    /// (λ, d) pairs for the explicit cross-section.
    pub eigenvalues: Vec<(f64, u32)>,
}

impl Default for ConeBlock {
    fn default() -> Self {
        ConeBlock {
            n: 2,
            cross_section: SectionKind::Circle,
            alpha: 1.0,
            a: 0.0,
            k: 8.0,
            eigenvalues: Vec::new(),
        }
    }
}

impl ConeBlock {
    pub fn model(&self) -> Result<ConeModel, CliError> {
        let cs = match self.cross_section {
            SectionKind::Circle => CrossSection::Circle { alpha: self.alpha },
            SectionKind::Sphere => CrossSection::Sphere,
            SectionKind::Explicit => {
                if self.eigenvalues.is_empty() {
                    return Err(CliError::Config(
                        "[cone]: cross_section = \"explicit\" needs an eigenvalues list".into(),
                    ));
                }
                CrossSection::Explicit {
                    eigenvalues: self.eigenvalues.clone(),
                }
            }
        };
        Ok(ConeModel::new(self.n, cs, self.a)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridType {
    Uniform,
    LogUniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridBlock {
    pub r_max: f64,
    pub count: usize,
    pub kind: GridType,
    /// Smallest node scale for the log-uniform kind.
    pub r_min: f64,
}

impl Default for GridBlock {
    fn default() -> Self {
        GridBlock {
            r_max: 40.0,
            count: 4096,
            kind: GridType::LogUniform,
            r_min: 1e-5,
        }
    }
}

impl GridBlock {
    pub fn kind(&self) -> GridKind {
        match self.kind {
            GridType::Uniform => GridKind::Uniform,
            GridType::LogUniform => GridKind::LogUniform { r_min: self.r_min },
        }
    }
}

/// A named radial profile placed on a list of modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDatum")]
pub struct DatumSpec {
    #[serde(flatten)]
    pub profile: Profile,
    /// (table entry, ℓ) pairs carrying the profile; ignored for csv.
    #[serde(default = "radial_mode")]
    pub modes: Vec<(usize, u32)>,
}

fn radial_mode() -> Vec<(usize, u32)> {
    vec![(0, 1)]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum Profile {
    /// e^{−(r−center)²/(2 width²)}.
    Gaussian { center: f64, width: f64 },
    /// Smooth bump supported on [center − width, center + width].
    Bump { center: f64, width: f64 },
    Csv { path: PathBuf },
}

// Flattened tagged enums cannot reject unknown keys, so the table is read flat first.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDatum {
    profile: String,
    center: Option<f64>,
    width: Option<f64>,
    path: Option<PathBuf>,
    #[serde(default = "radial_mode")]
    modes: Vec<(usize, u32)>,
}

impl TryFrom<RawDatum> for DatumSpec {
    type Error = String;

    fn try_from(raw: RawDatum) -> Result<Self, String> {
        let shape = |name: &str| match (raw.center, raw.width, &raw.path) {
            (Some(center), Some(width), None) => Ok((center, width)),
            (_, _, Some(_)) => Err(format!("profile `{name}` takes no `path`")),
            _ => Err(format!("profile `{name}` needs `center` and `width`")),
        };
        let profile = match raw.profile.as_str() {
            "gaussian" => shape("gaussian").map(|(center, width)| Profile::Gaussian { center, width })?,
            "bump" => shape("bump").map(|(center, width)| Profile::Bump { center, width })?,
            "csv" => match (&raw.path, raw.center, raw.width) {
                (Some(path), None, None) => Profile::Csv { path: path.clone() },
                (None, ..) => return Err("profile `csv` needs `path`".into()),
                _ => return Err("profile `csv` takes only `path` and `modes`".into()),
            },
            other => {
                return Err(format!(
                    "unknown profile `{other}`, expected one of `gaussian`, `bump`, `csv`"
                ))
            }
        };
        Ok(DatumSpec {
            profile,
            modes: raw.modes,
        })
    }
}

impl DatumSpec {
    pub fn radial(profile: Profile) -> Self {
        DatumSpec {
            profile,
            modes: radial_mode(),
        }
    }
}
