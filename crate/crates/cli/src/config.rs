//! Run configuration files.
//!
//! A run is described by one TOML file; see `configs/` for complete examples.

use std::fs;
use std::path::{Path, PathBuf};

use fermiweak_core::fock::{build_mode_table_with, Charge, Grading, GridNode, GridSpec, ModeTable, SpeciesGrid};
use fermiweak_core::model::{
    quark_decay_gaussian, sharp_cutoff_kernel, smooth_gaussian_kernel, Channel, Kernel, PhysicalParams,
};
use fermiweak_core::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Failure;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub n_max: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub grading: GradingConfig,
    pub params: ParamsConfig,
    pub grid: GridConfig,
    pub kernel: KernelConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default)]
    pub verify: VerifyConfig,
    pub output: Option<PathBuf>,
}

fn default_tol() -> f64 {
    1e-10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GradingConfig {
    /// `"standard"` or `"commuting-neutrinos"`.
    Named(String),
    /// Explicit group label per sector, in sector order.
    Groups([u8; 8]),
}

impl Default for GradingConfig {
    fn default() -> Self {
        GradingConfig::Named("standard".into())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub m1: f64,
    pub m4: f64,
    #[serde(default = "one")]
    pub eta: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub species: Vec<SpeciesConfig>,
}

/// Nodes of one species: listed explicitly, generated as radii times
/// directions, or both.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesConfig {
    #[serde(default)]
    pub nodes: Vec<GridNode>,
    #[serde(default)]
    pub radii: Vec<f64>,
    /// One weight per radius; overrides `weight`.
    #[serde(default)]
    pub weights: Vec<f64>,
    pub weight: Option<f64>,
    #[serde(default = "default_directions")]
    pub directions: Vec<[f64; 3]>,
    pub spins: Vec<f64>,
}

fn default_directions() -> Vec<[f64; 3]> {
    vec![[0.0, 0.0, 1.0]]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    /// One of `sharp`, `smooth-gaussian`, `quark-decay`, `file`.
    pub preset: String,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub lambda: f64,
    pub path: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default)]
    pub g: Vec<f64>,
    #[serde(default)]
    pub sigma: Vec<f64>,
    /// Cuts of the massive-energy projection used by the overlap.
    #[serde(default)]
    pub lambda: Vec<f64>,
    #[serde(default)]
    pub windows: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_etas")]
    pub etas: Vec<f64>,
    /// Allowed spread of the coupling-scaling quotient.
    #[serde(default = "default_scaling_tol")]
    pub scaling_tol: f64,
}

fn default_trials() -> usize {
    100
}

fn default_etas() -> Vec<f64> {
    vec![0.1, 1.0, 10.0]
}

fn default_scaling_tol() -> f64 {
    0.1
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { trials: default_trials(), etas: default_etas(), scaling_tol: default_scaling_tol() }
    }
}

/// Kernel file: explicit entries on the configured grid.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelFile {
    /// Fingerprint of the grid the entries were written for.
    grid_id: Option<String>,
    #[serde(default)]
    entries: Vec<KernelEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelEntry {
    /// `"+-"` or `"-+"`.
    channel: String,
    index: [usize; 4],
    re: f64,
    #[serde(default)]
    im: f64,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<(Self, PathBuf), Failure> {
        let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        let cfg: RunConfig = toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    pub fn validate(&self) -> Result<(), Failure> {
        let bad = |m: String| Err(Failure::Config(m));
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if !["sharp", "smooth-gaussian", "quark-decay", "file"].contains(&self.kernel.preset.as_str()) {
            return bad(format!(
                "kernel.preset: unknown preset '{}' (expected sharp, smooth-gaussian, quark-decay or file)",
                self.kernel.preset
            ));
        }
        if self.kernel.preset == "file" && self.kernel.path.is_none() {
            return bad("kernel.path is required for the file preset".into());
        }
        if let Some(w) = self.scan.windows.iter().find(|w| !(w[0] < w[1])) {
            return bad(format!("scan.windows: window [{}, {}] needs low < high", w[0], w[1]));
        }
        Ok(())
    }

    pub fn grading(&self) -> Result<Grading, Failure> {
        match &self.grading {
            GradingConfig::Named(n) if n == "standard" => Ok(Grading::standard()),
            GradingConfig::Named(n) if n == "commuting-neutrinos" => Ok(Grading::commuting_neutrinos()),
            GradingConfig::Named(n) => Err(Failure::Config(format!("grading: unknown grading '{n}'"))),
            GradingConfig::Groups(g) => Ok(Grading::custom(*g)),
        }
    }

    pub fn grid_spec(&self) -> Result<GridSpec, Failure> {
        let species = self
            .grid
            .species
            .iter()
            .enumerate()
            .map(|(i, s)| s.to_grid(i + 1))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GridSpec { species })
    }

    pub fn physical_params(&self) -> Result<PhysicalParams, Failure> {
        let mut p = PhysicalParams::new(self.params.m1, self.params.m4)?;
        p.eta = self.params.eta;
        p.lambda_uv = self.kernel.lambda;
        p.validate()?;
        Ok(p)
    }

    pub fn mode_table(&self) -> Result<ModeTable, Failure> {
        Ok(build_mode_table_with(&self.grid_spec()?, self.grading()?)?)
    }

    pub fn kernel(&self, table: &ModeTable, base: &Path) -> Result<Kernel, Failure> {
        let k = &self.kernel;
        Ok(match k.preset.as_str() {
            "sharp" => sharp_cutoff_kernel(table, k.lambda)?,
            "smooth-gaussian" => smooth_gaussian_kernel(table, k.amplitude, k.lambda)?,
            "quark-decay" => quark_decay_gaussian(table, k.amplitude, k.lambda)?,
            _ => load_kernel_file(&base.join(k.path.as_ref().expect("validated")), table)?,
        })
    }

    /// Hash of the effective configuration and any kernel file it reads.
    pub fn hash(&self, base: &Path) -> Result<String, Failure> {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(self).map_err(|e| Failure::Config(e.to_string()))?);
        if let (Some(p), "file") = (&self.kernel.path, self.kernel.preset.as_str()) {
            let bytes = fs::read(base.join(p)).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
            h.update(bytes);
        }
        Ok(hex::encode(&h.finalize()[..8]))
    }

    /// Cut of the massive-energy projection: first configured value, else `m₁/2`.
    pub fn lambda_cut(&self) -> f64 {
        self.scan.lambda.first().copied().unwrap_or(self.params.m1 / 2.0)
    }

    pub fn first_sigma(&self) -> f64 {
        self.scan.sigma.first().copied().unwrap_or(0.0)
    }

    pub fn require_g(&self) -> Result<&[f64], Failure> {
        if self.scan.g.is_empty() {
            return Err(Failure::Config("scan.g must list at least one coupling".into()));
        }
        Ok(&self.scan.g)
    }

    pub fn require_sigma(&self) -> Result<&[f64], Failure> {
        if self.scan.sigma.is_empty() {
            return Err(Failure::Config("scan.sigma must list at least one cutoff".into()));
        }
        Ok(&self.scan.sigma)
    }

    pub fn windows(&self) -> Vec<(f64, f64)> {
        self.scan.windows.iter().map(|w| (w[0], w[1])).collect()
    }
}

impl SpeciesConfig {
    fn to_grid(&self, species: usize) -> Result<SpeciesGrid, Failure> {
        let mut nodes = self.nodes.clone();
        if !self.weights.is_empty() && self.weights.len() != self.radii.len() {
            return Err(Failure::Config(format!(
                "grid.species[{species}]: {} weights for {} radii",
                self.weights.len(),
                self.radii.len()
            )));
        }
        for (i, &r) in self.radii.iter().enumerate() {
            let weight = match (self.weights.get(i), self.weight) {
                (Some(&w), _) | (None, Some(w)) => w,
                (None, None) => {
                    return Err(Failure::Config(format!("grid.species[{species}]: radii need weight or weights")))
                }
            };
            for d in &self.directions {
                let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                if !(n > 0.0) {
                    return Err(Failure::Config(format!("grid.species[{species}]: zero direction")));
                }
                nodes.push(GridNode { momentum: [r * d[0] / n, r * d[1] / n, r * d[2] / n], weight });
            }
        }
        Ok(SpeciesGrid { nodes, spins: self.spins.clone() })
    }
}

fn parse_channel(s: &str) -> Result<Channel, Failure> {
    let chars: Vec<String> = s.chars().map(String::from).collect();
    let charge = |c: &String| {
        c.parse::<Charge>().map_err(|_| Failure::Config(format!("kernel file: bad channel '{s}', expected \"+-\" or \"-+\"")))
    };
    if chars.len() != 2 {
        return Err(Failure::Config(format!("kernel file: bad channel '{s}', expected \"+-\" or \"-+\"")));
    }
    Ok(Channel::from_charges(charge(&chars[0])?, charge(&chars[1])?)?)
}

pub fn load_kernel_file(path: &Path, table: &ModeTable) -> Result<Kernel, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let file: KernelFile = toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    if let Some(id) = &file.grid_id {
        if *id != table.fingerprint() {
            return Err(Failure::Config(format!(
                "{}: kernel was written for grid {id}, configured grid is {}",
                path.display(),
                table.fingerprint()
            )));
        }
    }
    let entries = file
        .entries
        .iter()
        .map(|e| Ok((parse_channel(&e.channel)?, e.index, Complex64::new(e.re, e.im))))
        .collect::<Result<Vec<_>, Failure>>()?;
    Ok(Kernel::from_entries(table, &entries)?)
}
