//! Run configuration: TOML file, command-line overrides and validation.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use nsbf::spectral::{DEFAULT_RHO_MAX, DEFAULT_SCAN_POINTS};
use nsbf::{BoundaryCondition, BuiltinProfile, ConductivityProfile, PiecewisePolynomial};

use crate::error::CliError;

pub const DEFAULT_MESH_POINTS: usize = 2000;
pub const DEFAULT_ORDER: usize = nsbf::nsbf::DEFAULT_ORDER;
pub const DEFAULT_EIGENFUNCTIONS: usize = 10;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    profile: Option<toml::Spanned<toml::Value>>,
    #[serde(rename = "L")]
    length: Option<f64>,
    mesh_points: Option<usize>,
    #[serde(rename = "N")]
    order: Option<usize>,
    rho_max: Option<f64>,
    scan_points: Option<usize>,
    bc: Option<String>,
    outputs: Option<Vec<Output>>,
    output_dir: Option<PathBuf>,
    eigenfunction_count: Option<usize>,
    weyl: Option<WeylSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PiecewiseSpec {
    breakpoints: Vec<f64>,
    coefficients: Vec<Vec<f64>>,
    label: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeylSection {
    re_min: Option<f64>,
    re_max: Option<f64>,
    im_min: Option<f64>,
    im_max: Option<f64>,
    n_re: Option<usize>,
    n_im: Option<usize>,
}

/// Artifacts a subcommand may write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Coefficients,
    Eigenvalues,
    Eigenfunctions,
    WeylGrid,
    WeylSlice,
}

impl Output {
    pub fn file_name(self) -> &'static str {
        match self {
            Self::Coefficients => "coefficients.csv",
            Self::Eigenvalues => "eigenvalues.csv",
            Self::Eigenfunctions => "eigenfunctions.csv",
            Self::WeylGrid => "weyl_grid.csv",
            Self::WeylSlice => "weyl_slice.csv",
        }
    }
}

/// Where the conductivity comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileChoice {
    Builtin(BuiltinProfile),
    Piecewise {
        poly: PiecewisePolynomial,
        label: String,
    },
}

impl ProfileChoice {
    pub fn label(&self) -> String {
        match self {
            Self::Builtin(b) => b.name().to_string(),
            Self::Piecewise { label, .. } => label.clone(),
        }
    }
}

/// Complex-λ rectangle for the Weyl function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylSpec {
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    pub n_re: usize,
    pub n_im: usize,
}

impl Default for WeylSpec {
    fn default() -> Self {
        Self {
            re_range: (-10.0, 10.0),
            im_range: (0.0, 10.0),
            n_re: 201,
            n_im: 51,
        }
    }
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub profile: ProfileChoice,
    pub length: f64,
    pub mesh_points: usize,
    pub order: usize,
    pub rho_max: f64,
    pub scan_points: usize,
    pub bc: BoundaryCondition,
    /// Explicitly requested artifacts; `None` means everything the subcommand produces.
    pub outputs: Option<Vec<Output>>,
    pub output_dir: PathBuf,
    pub eigenfunction_count: usize,
    pub weyl: WeylSpec,
}

impl RunConfig {
    pub fn build_profile(&self) -> Result<ConductivityProfile, CliError> {
        let built = match &self.profile {
            ProfileChoice::Builtin(b) => b.build(self.length, self.mesh_points),
            ProfileChoice::Piecewise { poly, label } => poly.to_profile(self.mesh_points, label.clone()),
        };
        built.map_err(|e| CliError::Config(format!("profile: {e}")))
    }

    pub fn wants(&self, output: Output) -> bool {
        self.outputs.as_ref().is_none_or(|o| o.contains(&output))
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub profile: Option<String>,
    pub mesh_points: Option<usize>,
    pub order: Option<usize>,
    pub rho_max: Option<f64>,
    pub scan_points: Option<usize>,
    pub bc: Option<String>,
    pub out: Option<PathBuf>,
    pub eigenfunction_count: Option<usize>,
}

/// Reads `path` (if any), applies `overrides` and validates the result.
pub fn parse_config(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig, CliError> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            parse_config_str(&text, overrides).map_err(|e| match e {
                CliError::Config(msg) => CliError::Config(format!("{}: {msg}", p.display())),
                other => other,
            })
        }
        None => parse_config_str("", overrides),
    }
}

pub fn parse_config_str(text: &str, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| CliError::Config(e.to_string().trim_end().to_string()))?;

    let profile = match (&overrides.profile, &file.profile) {
        (Some(name), _) => ProfileChoice::Builtin(builtin(name)?),
        (None, Some(spanned)) => profile_from_value(text, spanned)?,
        (None, None) => ProfileChoice::Builtin(BuiltinProfile::Example1),
    };

    let length = match &profile {
        ProfileChoice::Builtin(b) => {
            let l = file.length.unwrap_or(b.default_length());
            if b.fixed_length() && l != b.default_length() {
                return Err(CliError::Config(format!(
                    "L: profile {b} is defined on [0, {}], got L = {l}",
                    b.default_length()
                )));
            }
            l
        }
        ProfileChoice::Piecewise { poly, .. } => {
            let last = poly.length();
            if let Some(l) = file.length {
                if l != last {
                    return Err(CliError::Config(format!(
                        "L = {l} does not match the last breakpoint {last}"
                    )));
                }
            }
            last
        }
    };
    if !(length.is_finite() && length > 0.0) {
        return Err(CliError::Config(format!("L must be positive, got {length}")));
    }

    let bc_text = overrides.bc.clone().or(file.bc);
    let bc = match bc_text {
        Some(s) => BoundaryCondition::from_str(&s).map_err(|e| CliError::Config(format!("bc: {e}")))?,
        None => BoundaryCondition::Dirichlet,
    };

    let w = file.weyl.unwrap_or_default();
    let d = WeylSpec::default();
    let weyl = WeylSpec {
        re_range: (w.re_min.unwrap_or(d.re_range.0), w.re_max.unwrap_or(d.re_range.1)),
        im_range: (w.im_min.unwrap_or(d.im_range.0), w.im_max.unwrap_or(d.im_range.1)),
        n_re: w.n_re.unwrap_or(d.n_re),
        n_im: w.n_im.unwrap_or(d.n_im),
    };
    let ordered = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && a <= b;
    if !ordered(weyl.re_range) || !ordered(weyl.im_range) {
        return Err(CliError::Config(format!(
            "weyl: ranges must be finite and ordered, got re {:?}, im {:?}",
            weyl.re_range, weyl.im_range
        )));
    }
    if weyl.n_re < 2 || weyl.n_im < 2 {
        return Err(CliError::Config(format!(
            "weyl: n_re and n_im must be at least 2, got {} and {}",
            weyl.n_re, weyl.n_im
        )));
    }

    let cfg = RunConfig {
        profile,
        length,
        mesh_points: overrides.mesh_points.or(file.mesh_points).unwrap_or(DEFAULT_MESH_POINTS),
        order: overrides.order.or(file.order).unwrap_or(DEFAULT_ORDER),
        rho_max: overrides.rho_max.or(file.rho_max).unwrap_or(DEFAULT_RHO_MAX),
        scan_points: overrides.scan_points.or(file.scan_points).unwrap_or(DEFAULT_SCAN_POINTS),
        bc,
        outputs: file.outputs,
        output_dir: overrides.out.clone().or(file.output_dir).unwrap_or_else(|| PathBuf::from("out")),
        eigenfunction_count: overrides
            .eigenfunction_count
            .or(file.eigenfunction_count)
            .unwrap_or(DEFAULT_EIGENFUNCTIONS),
        weyl,
    };
    if !(cfg.rho_max.is_finite() && cfg.rho_max > 0.0) {
        return Err(CliError::Config(format!("rho_max must be positive, got {}", cfg.rho_max)));
    }
    if cfg.scan_points < 2 {
        return Err(CliError::Config(format!("scan_points must be at least 2, got {}", cfg.scan_points)));
    }
    cfg.build_profile()?;
    Ok(cfg)
}

fn builtin(name: &str) -> Result<BuiltinProfile, CliError> {
    BuiltinProfile::from_str(name).map_err(|e| CliError::Config(format!("profile: {e}")))
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn profile_from_value(text: &str, spanned: &toml::Spanned<toml::Value>) -> Result<ProfileChoice, CliError> {
    let line = line_of(text, spanned.span().start);
    let fail = |msg: String| CliError::Config(format!("line {line}: profile: {msg}"));
    match spanned.get_ref() {
        toml::Value::String(name) => builtin(name).map(ProfileChoice::Builtin).map_err(|e| fail(e.to_string())),
        value @ toml::Value::Table(_) => {
            let spec = PiecewiseSpec::deserialize(value.clone()).map_err(|e| fail(e.to_string()))?;
            let poly = PiecewisePolynomial::new(spec.breakpoints, spec.coefficients).map_err(|e| fail(e.to_string()))?;
            Ok(ProfileChoice::Piecewise {
                poly,
                label: spec.label.unwrap_or_else(|| "piecewise".into()),
            })
        }
        other => Err(fail(format!(
            "expected a builtin name or a table with breakpoints and coefficients, got {}",
            other.type_str()
        ))),
    }
}
