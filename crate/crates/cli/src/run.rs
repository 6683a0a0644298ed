//! Subcommand pipelines and the run manifest.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use nsbf::spectral::{find_eigenvalues, normalization_constants};
use nsbf::weyl::{weyl_grid, GridSpec, WeylKind};
use nsbf::{compute_coefficients, BoundaryCondition, DarbouxPair};

use crate::config::{Output, RunConfig};
use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";

/// Output files collected in memory, then written together with the manifest.
pub struct Artifacts {
    dir: PathBuf,
    started: Instant,
    files: Vec<(String, Vec<u8>)>,
    info: Map<String, Value>,
}

impl Artifacts {
    pub fn new(dir: &Path, command: &str) -> Self {
        let mut info = Map::new();
        info.insert("command".into(), json!(command));
        Self {
            dir: dir.to_path_buf(),
            started: Instant::now(),
            files: Vec::new(),
            info,
        }
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.info.insert(key.into(), value);
    }

    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    /// Writes every file, then `manifest.json` listing each with its SHA-256.
    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CliError::Io { path, source }
        };
        fs::create_dir_all(&self.dir).map_err(io(&self.dir))?;
        let mut listing = Vec::new();
        for (name, bytes) in &self.files {
            let path = self.dir.join(name);
            fs::write(&path, bytes).map_err(io(&path))?;
            listing.push(json!({
                "path": name,
                "sha256": hex::encode(Sha256::digest(bytes)),
                "bytes": bytes.len(),
            }));
        }
        self.info.insert("files".into(), Value::Array(listing));
        self.info
            .insert("wall_time_seconds".into(), json!(self.started.elapsed().as_secs_f64()));
        let path = self.dir.join(MANIFEST);
        let mut text = serde_json::to_string_pretty(&Value::Object(self.info)).expect("manifest is plain JSON");
        text.push('\n');
        fs::write(&path, text).map_err(io(&path))?;
        Ok(path)
    }
}

fn csv(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    write(&mut buf).expect("writing to memory cannot fail");
    buf
}

fn describe(cfg: &RunConfig, art: &mut Artifacts, profile: &nsbf::ConductivityProfile) {
    art.set("profile", json!(cfg.profile.label()));
    art.set("L", json!(cfg.length));
    art.set("mesh_points_requested", json!(cfg.mesh_points));
    art.set("mesh_points", json!(profile.mesh().points()));
    art.set("step", json!(profile.mesh().step()));
    art.set("N", json!(cfg.order));
}

pub fn run_coeffs(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let profile = cfg.build_profile()?;
    let mut art = Artifacts::new(&cfg.output_dir, "coeffs");
    describe(cfg, &mut art, &profile);
    let table = compute_coefficients(&profile, cfg.order);
    if cfg.wants(Output::Coefficients) {
        art.add(Output::Coefficients.file_name(), csv(|b| table.write_sigma_csv(b)));
    }
    art.finish()
}

pub fn run_eigs(cfg: &RunConfig, eigenfunctions: bool) -> Result<PathBuf, CliError> {
    let profile = cfg.build_profile()?;
    let command = if eigenfunctions { "eigfun" } else { "eigs" };
    let mut art = Artifacts::new(&cfg.output_dir, command);
    describe(cfg, &mut art, &profile);
    let pair = DarbouxPair::new(&profile, cfg.order);
    let ds = find_eigenvalues(&pair, cfg.bc, cfg.rho_max, cfg.scan_points, cfg.order)?;
    let mut ds = normalization_constants(ds, &pair)?;
    art.set("bc", json!(cfg.bc.name()));
    art.set("rho_max", json!(cfg.rho_max));
    art.set("scan_points_requested", json!(cfg.scan_points));
    art.set("scan_points", json!(ds.scan_points));
    art.set("eigenvalue_count", json!(ds.len()));
    art.set("max_residual", json!(ds.residuals.iter().copied().fold(0.0, f64::max)));
    art.set("warnings", json!(ds.warnings));
    if cfg.wants(Output::Eigenvalues) {
        art.add(Output::Eigenvalues.file_name(), csv(|b| ds.write_csv(b)));
    }
    let want_functions = if eigenfunctions {
        cfg.wants(Output::Eigenfunctions)
    } else {
        cfg.outputs.as_ref().is_some_and(|o| o.contains(&Output::Eigenfunctions))
    };
    if want_functions {
        ds.eigenfunctions.truncate(cfg.eigenfunction_count);
        art.set("eigenfunction_count", json!(ds.eigenfunctions.len()));
        art.add(Output::Eigenfunctions.file_name(), csv(|b| ds.write_eigenfunctions_csv(b)));
    }
    art.finish()
}

pub fn run_weyl(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let kind = match cfg.bc {
        BoundaryCondition::Dirichlet => WeylKind::Dirichlet,
        BoundaryCondition::Neumann => WeylKind::Neumann,
        other => {
            return Err(CliError::Config(format!(
                "bc: the Weyl function is defined for dirichlet or neumann, got {other}"
            )))
        }
    };
    let profile = cfg.build_profile()?;
    let mut art = Artifacts::new(&cfg.output_dir, "weyl");
    describe(cfg, &mut art, &profile);
    let pair = DarbouxPair::new(&profile, cfg.order);

    let reach = cfg.weyl.re_range.1.max(0.0).sqrt() + 2.0 * PI / cfg.length;
    let rho_poles = cfg.rho_max.max(reach);
    let scan = ((cfg.scan_points as f64) * rho_poles / cfg.rho_max).ceil() as usize;
    let poles = find_eigenvalues(&pair, cfg.bc, rho_poles, scan, cfg.order)?.eigenvalues;

    let spec = GridSpec {
        re_range: cfg.weyl.re_range,
        im_range: cfg.weyl.im_range,
        n_re: cfg.weyl.n_re,
        n_im: cfg.weyl.n_im,
    };
    let grid = weyl_grid(&pair, spec, kind, &poles, cfg.order)?;
    let jumps: Vec<Value> = grid
        .real_axis_jumps()
        .iter()
        .map(|j| json!({"lambda_left": j.lambda_left, "lambda_right": j.lambda_right, "pole": j.pole}))
        .collect();
    art.set("bc", json!(cfg.bc.name()));
    art.set(
        "grid",
        json!({
            "re_range": [spec.re_range.0, spec.re_range.1],
            "im_range": [spec.im_range.0, spec.im_range.1],
            "n_re": spec.n_re,
            "n_im": spec.n_im,
            "contains_real_axis": grid.real_row().is_some(),
        }),
    );
    let in_range: Vec<f64> = poles
        .iter()
        .copied()
        .filter(|&p| p >= spec.re_range.0 && p <= spec.re_range.1)
        .collect();
    art.set("poles_in_range", json!(in_range));
    art.set("jump_count", json!(jumps.len()));
    art.set("jumps", Value::Array(jumps));
    if cfg.wants(Output::WeylGrid) {
        art.add(Output::WeylGrid.file_name(), csv(|b| grid.write_csv(b)));
    }
    if cfg.wants(Output::WeylSlice) {
        art.add(Output::WeylSlice.file_name(), csv(|b| grid.write_real_slice_csv(b)));
    }
    art.finish()
}
