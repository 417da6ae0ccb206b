//! Scenario files: the TOML schema and its validation.
//!
//! Validation enforces each check's preconditions against the configured
//! exponent and model up front, so impossible combinations surface as
//! configuration errors (exit 2) instead of check failures (exit 1).

use std::str::FromStr;

use anyhow::{bail, Context, Result};
use pmelab::bounds::n_effective;
use pmelab::geometry::ManifoldModel;
use pmelab::grid::RadialGrid;
use pmelab::hopf::FtMode;
use pmelab::solver::Scheme;
use pmelab::verifier::{CheckId, MaskParams, DEFAULT_TOL_SCALE};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Diffusion exponent of u_t = Lap(u^m).
    pub m: f64,
    pub manifold: ManifoldSection,
    pub grid: GridSection,
    pub time: TimeSection,
    pub initial: InitialSection,
    #[serde(default)]
    pub boundary: BoundarySection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub mask: MaskSection,
    /// Sweep table for the `bounds` subcommand; unused elsewhere.
    pub bounds: Option<BoundsSection>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSection {
    pub kind: ManifoldKind,
    pub n: usize,
    #[serde(default)]
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ManifoldKind {
    Euclidean,
    Hyperbolic,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub r_max: f64,
    pub cells: usize,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t0: f64,
    pub t1: f64,
    /// Solver step, or target snapshot spacing for sampled families.
    pub dt: f64,
    #[serde(default)]
    pub scheme: SchemeSection,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeSection {
    #[default]
    ImplicitNewton,
    SemiImplicit,
}

impl From<SchemeSection> for Scheme {
    fn from(s: SchemeSection) -> Scheme {
        match s {
            SchemeSection::ImplicitNewton => Scheme::ImplicitNewton,
            SchemeSection::SemiImplicit => Scheme::SemiImplicit,
        }
    }
}

/// Initial data. Constant and bump profiles drive the solver; the
/// closed-form families are sampled directly (or, under `solve`, provide
/// the solver's starting slice, where `clip` imposes a positive floor).
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialSection {
    Constant { value: f64 },
    Bump { floor: f64, amplitude: f64, width: f64 },
    Barenblatt { b0: f64, clip: Option<f64> },
    FastDiffusionSs { b0: f64, clip: Option<f64> },
    Gaussian {},
}

/// How a trajectory comes into being.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Driver {
    /// Sampled from a closed-form solution.
    Sampled,
    /// Produced by the implicit solver.
    Solver,
}

impl InitialSection {
    pub fn driver(&self) -> Driver {
        match self {
            InitialSection::Constant { .. } | InitialSection::Bump { .. } => Driver::Solver,
            _ => Driver::Sampled,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundarySection {
    #[default]
    Neumann,
    /// Fixed value on the outer face; defaults to the initial profile there.
    Dirichlet { value: Option<f64> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default = "default_tol_scale")]
    pub tol_scale: f64,
    /// Snapshot indices to check; empty selects every usable snapshot.
    #[serde(default)]
    pub snapshots: Vec<usize>,
    /// Source of the time derivative; defaults per driver (sampled runs use
    /// the equation itself, solver runs use temporal differences).
    pub mode: Option<ModeSection>,
}

fn default_tol_scale() -> f64 {
    DEFAULT_TOL_SCALE
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            checks: Vec::new(),
            tol_scale: DEFAULT_TOL_SCALE,
            snapshots: Vec::new(),
            mode: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeSection {
    PdeIdentity,
    TemporalDifference,
}

impl From<ModeSection> for FtMode {
    fn from(m: ModeSection) -> FtMode {
        match m {
            ModeSection::PdeIdentity => FtMode::PdeIdentity,
            ModeSection::TemporalDifference => FtMode::TemporalDifference,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskSection {
    #[serde(default = "default_boundary_cells")]
    pub boundary_cells: usize,
    #[serde(default = "default_support_frac")]
    pub support_frac: f64,
}

fn default_boundary_cells() -> usize {
    MaskParams::default().boundary_cells
}

fn default_support_frac() -> f64 {
    MaskParams::default().support_frac
}

impl Default for MaskSection {
    fn default() -> Self {
        MaskSection {
            boundary_cells: default_boundary_cells(),
            support_frac: default_support_frac(),
        }
    }
}

impl MaskSection {
    pub fn params(&self) -> MaskParams {
        MaskParams { boundary_cells: self.boundary_cells, support_frac: self.support_frac }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    /// Curvature level R = K sup U of the sweep.
    pub r_sup: f64,
    /// Times to tabulate at.
    pub t: Vec<f64>,
    /// Defaults to the domain edge -NR/4.
    pub y_min: Option<f64>,
    /// Defaults to 4 max(NR, 1).
    pub y_max: Option<f64>,
    #[serde(default = "default_y_count")]
    pub y_count: usize,
}

fn default_y_count() -> usize {
    81
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).context("scenario file does not match the documented schema")
    }

    pub fn model(&self) -> Result<ManifoldModel> {
        let model = match self.manifold.kind {
            ManifoldKind::Euclidean => {
                if self.manifold.kappa != 0.0 {
                    bail!(
                        "euclidean models are flat; drop kappa or set it to 0 (got {})",
                        self.manifold.kappa
                    );
                }
                ManifoldModel::euclidean(self.manifold.n)?
            }
            ManifoldKind::Hyperbolic => {
                ManifoldModel::hyperbolic(self.manifold.n, self.manifold.kappa)?
            }
        };
        Ok(model)
    }

    pub fn check_ids(&self) -> Result<Vec<CheckId>> {
        self.verify
            .checks
            .iter()
            .map(|s| CheckId::from_str(s).map_err(Into::into))
            .collect()
    }

    /// Cross-field validation; run before building anything.
    pub fn validate(&self) -> Result<()> {
        let model = self.model()?;
        let m = self.m;
        if !(m > 0.0) || !m.is_finite() {
            bail!("exponent m must be positive and finite, got {m}");
        }

        RadialGrid::new(self.grid.r_max, self.grid.cells)?;
        let (t0, t1, dt) = (self.time.t0, self.time.t1, self.time.dt);
        if !(t0 > 0.0) || !t0.is_finite() {
            bail!("t0 must be positive and finite, got {t0}");
        }
        if !(t1 > t0) {
            bail!("t1 must exceed t0, got [{t0}, {t1}]");
        }
        if !(dt > 0.0) || !(dt <= t1 - t0) {
            bail!("dt must lie in (0, t1 - t0], got {dt}");
        }

        match &self.initial {
            InitialSection::Constant { value } => {
                if !(*value > 0.0) {
                    bail!("constant initial data must be positive, got {value}");
                }
            }
            InitialSection::Bump { floor, amplitude, width } => {
                if !(*floor > 0.0) || !(*amplitude >= 0.0) || !(*width > 0.0) {
                    bail!(
                        "bump initial data needs floor > 0, amplitude >= 0, width > 0; \
                         got ({floor}, {amplitude}, {width})"
                    );
                }
            }
            InitialSection::Barenblatt { b0, clip } => {
                if !(m > 1.0) {
                    bail!("the compact-support family needs m > 1, scenario has m = {m}");
                }
                check_family_common(*b0, *clip)?;
            }
            InitialSection::FastDiffusionSs { b0, clip } => {
                if !(m < 1.0) {
                    bail!("the fast-diffusion family needs m < 1, scenario has m = {m}");
                }
                n_effective(self.manifold.n, m)
                    .context("the fast-diffusion family also needs m > 1 - 2/n")?;
                check_family_common(*b0, *clip)?;
            }
            InitialSection::Gaussian {} => {
                if m != 1.0 {
                    bail!("gaussian initial data is the m = 1 family, scenario has m = {m}");
                }
            }
        }
        if self.initial.driver() == Driver::Sampled && self.manifold.kind != ManifoldKind::Euclidean
        {
            bail!(
                "the closed-form families solve the flat equation; sampled scenarios need \
                 kind = \"euclidean\" (use a solver-driven profile on curved models)"
            );
        }
        if let BoundarySection::Dirichlet { value: Some(v) } = &self.boundary {
            if !(*v > 0.0) {
                bail!("dirichlet boundary value must be positive, got {v}");
            }
        }
        if !(0.0..1.0).contains(&self.mask.support_frac) {
            bail!("mask support_frac must lie in [0, 1), got {}", self.mask.support_frac);
        }

        for id in self.check_ids()? {
            match id {
                CheckId::LiYau => {
                    if m != 1.0 {
                        bail!("{id} needs m = 1, scenario has m = {m}");
                    }
                    require_flat(&model, id)?;
                }
                CheckId::FastDiffusionCurvature => {
                    if !(m > 0.5 && m < 1.0) {
                        bail!("{id} needs 1/2 < m < 1, scenario has m = {m}");
                    }
                    require_n_effective(self.manifold.n, m, id)?;
                }
                CheckId::SlowDiffusionCurvature | CheckId::FamilyBound => {
                    if !(m > 1.0) {
                        bail!("{id} needs m > 1, scenario has m = {m}");
                    }
                }
                CheckId::AronsonBenilan | CheckId::InitialBoundDecay => {
                    require_flat(&model, id)?;
                    require_n_effective(self.manifold.n, m, id)?;
                }
                CheckId::CurvatureDimension => {}
            }
        }
        Ok(())
    }
}

fn check_family_common(b0: f64, clip: Option<f64>) -> Result<()> {
    if !(b0 > 0.0) {
        bail!("family profile constant b0 must be positive, got {b0}");
    }
    if let Some(c) = clip {
        if !(c > 0.0) {
            bail!("initial clip must be positive, got {c}");
        }
    }
    Ok(())
}

fn require_flat(model: &ManifoldModel, id: CheckId) -> Result<()> {
    if !model.is_flat() {
        bail!("{id} needs a flat model (kind = \"euclidean\")");
    }
    Ok(())
}

fn require_n_effective(n: usize, m: f64, id: CheckId) -> Result<()> {
    n_effective(n, m).with_context(|| format!("{id} needs a finite effective dimension"))?;
    Ok(())
}
