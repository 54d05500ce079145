//! Shared fixtures for the criterion benchmarks.

use hilfer_core::controllability::ControlTemplate;
use hilfer_core::forward::GammaChoice;
use hilfer_core::spectral::{OmegaRegion, SpaceGrid};
use hilfer_core::{Field, ForwardProblem, FractionalOrder, SpectralBasis, TimeGrid};
use std::f64::consts::PI;

/// Forward problem with nontrivial data on `n` modes and `m` time cells.
pub fn forward_fixture(n: usize, m: usize) -> ForwardProblem {
    let basis = SpectralBasis::builtin_dirichlet_laplacian(PI, n).unwrap();
    ForwardProblem {
        order: FractionalOrder::new(1.5, 0.5).unwrap(),
        basis,
        grid: TimeGrid::uniform(1.0, m).unwrap(),
        u0: Field::new((0..n).map(|k| 1.0 / (k + 1) as f64).collect()),
        u1: Field::new((0..n).map(|k| 0.5 - 0.1 * k as f64).collect()),
        control: None,
        gamma_choice: GammaChoice::OverMu,
        p: 1e6,
    }
}

/// Control template sized for synthesis benchmarks.
pub fn control_fixture(n: usize, j: usize, m_ctrl: usize) -> ControlTemplate {
    ControlTemplate {
        order: FractionalOrder::new(1.5, 0.5).unwrap(),
        basis: SpectralBasis::builtin_dirichlet_laplacian(PI, n).unwrap(),
        grid: TimeGrid::uniform(1.0, 32).unwrap(),
        omega: OmegaRegion::new(vec![(0.3 * PI, 0.7 * PI)]).unwrap(),
        space_grid: SpaceGrid::uniform(PI, 200).unwrap(),
        j_cells: j,
        m_ctrl,
        gamma_choice: GammaChoice::OverMu,
    }
}
