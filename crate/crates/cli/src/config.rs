//! JSON experiment configuration and its translation to core types.

use crate::AppError;
use hilfer_core::forward::GammaChoice;
use hilfer_core::spectral::{OmegaRegion, SpaceGrid};
use hilfer_core::{ControlField, Field, FractionalOrder, SpectralBasis, TimeGrid};
use serde::Deserialize;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub order: Option<OrderBlock>,
    pub basis: Option<BasisBlock>,
    pub grid: Option<GridBlock>,
    #[serde(default)]
    pub data: DataBlock,
    pub control: Option<ControlBlock>,
    #[serde(default)]
    pub run: RunBlock,
    pub threads: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderBlock {
    pub mu: f64,
    pub nu: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisBlock {
    /// "dirichlet" or "spectral-fractional".
    #[serde(rename = "type")]
    pub kind: String,
    pub length: f64,
    pub n_modes: usize,
    /// Exponent for the spectral-fractional variant.
    pub s: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub horizon: f64,
    pub cells: usize,
    /// Grading exponent; 1 = uniform.
    #[serde(default = "one")]
    pub grading: f64,
    /// Cluster nodes at t = T instead of t = 0.
    #[serde(default)]
    pub grade_toward_end: bool,
}

fn one() -> f64 {
    1.0
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DataBlock {
    pub u0: Option<Vec<f64>>,
    pub u1: Option<Vec<f64>>,
    pub v0: Option<Vec<f64>>,
    pub v1: Option<Vec<f64>>,
    /// Named preset instead of explicit lists: "mode" puts a unit coefficient
    /// at `index` in (u0, v0) and zeros elsewhere.
    pub preset: Option<String>,
    #[serde(default)]
    pub index: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlBlock {
    /// Control region as an interval [a, b].
    pub omega: (f64, f64),
    pub j_cells: usize,
    pub m_ctrl: usize,
    /// Row-major J x M coefficients; zero control when omitted.
    pub coefficients: Option<Vec<f64>>,
    #[serde(default = "default_space_cells")]
    pub space_cells: usize,
}

fn default_space_cells() -> usize {
    200
}

fn default_eps_path() -> Vec<f64> {
    (1..=8).map(|k| 10f64.powi(-k)).collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetBlock {
    pub id: String,
    pub mem: Vec<f64>,
    pub mem_rate: Vec<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    /// Regularization path for `control`.
    pub eps_path: Option<Vec<f64>>,
    /// Time-cell counts for refinement ladders.
    pub ladder: Option<Vec<usize>>,
    /// Targets for `control`.
    pub targets: Option<Vec<TargetBlock>>,
    /// Seed for deterministic probe data.
    pub seed: Option<u64>,
    /// "over-mu" (default) or "half".
    pub gamma: Option<String>,
    /// Integrability exponent of the forward data term.
    pub p: Option<f64>,
    /// Default CSV output path.
    pub out: Option<String>,
}

fn missing(block: &'static str) -> AppError {
    AppError::Validation(format!("config block `{block}` is required"))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, AppError> {
        serde_json::from_str(text).map_err(|e| AppError::Validation(format!("config: {e}")))
    }

    pub fn order(&self) -> Result<FractionalOrder, AppError> {
        let b = self.order.as_ref().ok_or_else(|| missing("order"))?;
        Ok(FractionalOrder::new(b.mu, b.nu)?)
    }

    pub fn basis(&self) -> Result<SpectralBasis, AppError> {
        let b = self.basis.as_ref().ok_or_else(|| missing("basis"))?;
        let base = SpectralBasis::builtin_dirichlet_laplacian(b.length, b.n_modes)?;
        match b.kind.as_str() {
            "dirichlet" => Ok(base),
            "spectral-fractional" => {
                let s = b
                    .s
                    .ok_or_else(|| AppError::Validation("basis: `s` required".into()))?;
                Ok(SpectralBasis::builtin_spectral_fractional(&base, s)?)
            }
            other => Err(AppError::Validation(format!("basis: unknown type `{other}`"))),
        }
    }

    pub fn grid(&self) -> Result<TimeGrid, AppError> {
        let b = self.grid.as_ref().ok_or_else(|| missing("grid"))?;
        self.grid_with(b.cells)
    }

    /// Same grid shape at a different resolution (refinement ladders).
    pub fn grid_with(&self, cells: usize) -> Result<TimeGrid, AppError> {
        let b = self.grid.as_ref().ok_or_else(|| missing("grid"))?;
        let g = if b.grading == 1.0 {
            TimeGrid::uniform(b.horizon, cells)?
        } else if b.grade_toward_end {
            TimeGrid::graded_toward_end(b.horizon, cells, b.grading)?
        } else {
            TimeGrid::graded(b.horizon, cells, b.grading)?
        };
        Ok(g)
    }

    fn field(&self, list: &Option<Vec<f64>>, n: usize, unit_from_preset: bool) -> Field {
        if let Some(v) = list {
            let mut c = v.clone();
            c.resize(n, 0.0);
            return Field::new(c);
        }
        if unit_from_preset && self.data.preset.as_deref() == Some("mode") {
            return Field::unit(n, self.data.index.min(n - 1));
        }
        Field::zeros(n)
    }

    pub fn forward_data(&self, n: usize) -> (Field, Field) {
        (
            self.field(&self.data.u0, n, true),
            self.field(&self.data.u1, n, false),
        )
    }

    pub fn adjoint_data(&self, n: usize) -> (Field, Field) {
        (
            self.field(&self.data.v0, n, true),
            self.field(&self.data.v1, n, false),
        )
    }

    pub fn gamma_choice(&self) -> Result<GammaChoice, AppError> {
        match self.run.gamma.as_deref() {
            None | Some("over-mu") => Ok(GammaChoice::OverMu),
            Some("half") => Ok(GammaChoice::Half),
            Some(other) => Err(AppError::Validation(format!("run.gamma: unknown `{other}`"))),
        }
    }

    pub fn eps_path(&self) -> Vec<f64> {
        self.run.eps_path.clone().unwrap_or_else(default_eps_path)
    }

    pub fn ladder(&self) -> Vec<usize> {
        self.run.ladder.clone().unwrap_or_else(|| vec![64, 128, 256, 512])
    }

    pub fn omega(&self) -> Result<OmegaRegion, AppError> {
        let c = self.control.as_ref().ok_or_else(|| missing("control"))?;
        Ok(OmegaRegion::new(vec![c.omega])?)
    }

    pub fn space_grid(&self) -> Result<SpaceGrid, AppError> {
        let c = self.control.as_ref().ok_or_else(|| missing("control"))?;
        let b = self.basis.as_ref().ok_or_else(|| missing("basis"))?;
        Ok(SpaceGrid::uniform(b.length, c.space_cells)?)
    }

    pub fn control_field(&self, horizon: f64) -> Result<ControlField, AppError> {
        let c = self.control.as_ref().ok_or_else(|| missing("control"))?;
        let coeffs = c
            .coefficients
            .clone()
            .unwrap_or_else(|| vec![0.0; c.j_cells * c.m_ctrl]);
        Ok(ControlField::new(
            self.omega()?,
            self.space_grid()?,
            horizon,
            c.j_cells,
            c.m_ctrl,
            coeffs,
        )?)
    }
}
