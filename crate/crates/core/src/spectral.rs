//! Spectral data of the spatial operator A, spatial grids, projections and
//! the V_gamma scale of norms.
//!
//! A is specified purely by eigenvalues and evaluable eigenfunctions
//! (Assumption 2.8); every solver formula is then exact per mode.

use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

type EigenFn = Arc<dyn Fn(usize, f64) -> f64 + Send + Sync>;

/// Eigenvalues and eigenfunctions of A on [0, L], truncated to N modes.
///
/// Immutable after construction; freely shareable across threads.
#[derive(Clone)]
pub struct SpectralBasis {
    eigenvalues: Vec<f64>,
    domain_length: f64,
    eval: EigenFn,
}

impl fmt::Debug for SpectralBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralBasis")
            .field("eigenvalues", &self.eigenvalues)
            .field("domain_length", &self.domain_length)
            .finish_non_exhaustive()
    }
}

impl SpectralBasis {
    /// Build from explicit spectral data. `eval(n, x)` returns phi_n(x) with
    /// n zero-based.
    pub fn new(eigenvalues: Vec<f64>, domain_length: f64, eval: EigenFn) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::invalid("eigenvalues", "need at least one mode"));
        }
        if eigenvalues[0] <= 0.0 {
            return Err(Error::invalid("eigenvalues", "lambda_1 must be > 0 (A invertible)"));
        }
        if !eigenvalues.windows(2).all(|w| w[1] >= w[0]) {
            return Err(Error::invalid("eigenvalues", "must be nondecreasing"));
        }
        if !(domain_length > 0.0) {
            return Err(Error::invalid("domain_length", "must be positive"));
        }
        Ok(SpectralBasis {
            eigenvalues,
            domain_length,
            eval,
        })
    }

    /// Dirichlet Laplacian on (0, L): lambda_n = (n pi / L)^2,
    /// phi_n(x) = sqrt(2/L) sin(n pi x / L), n = 1..N.
    pub fn builtin_dirichlet_laplacian(domain_length: f64, n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::invalid("n_modes", "need at least one mode"));
        }
        if !(domain_length > 0.0) || !domain_length.is_finite() {
            return Err(Error::invalid("domain_length", "must be positive and finite"));
        }
        let eigenvalues = (1..=n_modes)
            .map(|n| (n as f64 * std::f64::consts::PI / domain_length).powi(2))
            .collect();
        let l = domain_length;
        let amp = (2.0 / l).sqrt();
        let eval: EigenFn = Arc::new(move |n, x| {
            amp * ((n as f64 + 1.0) * std::f64::consts::PI * x / l).sin()
        });
        SpectralBasis::new(eigenvalues, domain_length, eval)
    }

    /// Spectral fractional power A^s: lambda_n -> lambda_n^s, eigenfunctions
    /// unchanged.
    pub fn builtin_spectral_fractional(base: &SpectralBasis, s: f64) -> Result<Self> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::invalid("s", format!("need 0 < s <= 1, got {s}")));
        }
        let eigenvalues = base.eigenvalues.iter().map(|l| l.powf(s)).collect();
        SpectralBasis::new(eigenvalues, base.domain_length, base.eval.clone())
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn domain_length(&self) -> f64 {
        self.domain_length
    }

    /// phi_n(x), zero-based mode index.
    pub fn phi(&self, n: usize, x: f64) -> f64 {
        (self.eval)(n, x)
    }

    /// Max deviation of the quadrature Gram matrix from the identity.
    pub fn gram_residual(&self, grid: &SpaceGrid) -> f64 {
        let n = self.n_modes();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in a..n {
                let mut acc = 0.0;
                for (x, w) in grid.nodes.iter().zip(&grid.weights) {
                    acc += w * self.phi(a, *x) * self.phi(b, *x);
                }
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((acc - target).abs());
            }
        }
        worst
    }
}

/// Spatial quadrature lattice on [0, L].
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SpaceGrid {
    /// Uniform nodes with trapezoid weights; for the sine basis this makes
    /// the discrete Gram matrix exactly diagonal.
    pub fn uniform(domain_length: f64, cells: usize) -> Result<Self> {
        if cells < 2 {
            return Err(Error::invalid("cells", "need at least two cells"));
        }
        if !(domain_length > 0.0) {
            return Err(Error::invalid("domain_length", "must be positive"));
        }
        let h = domain_length / cells as f64;
        let nodes = (0..=cells).map(|i| i as f64 * h).collect();
        let mut weights = vec![h; cells + 1];
        weights[0] = 0.5 * h;
        weights[cells] = 0.5 * h;
        Ok(SpaceGrid { nodes, weights })
    }

    pub fn length(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Union of open subintervals of (0, L) marking the control/observation set.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaRegion {
    intervals: Vec<(f64, f64)>,
}

impl OmegaRegion {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        for &(a, b) in &intervals {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(Error::invalid("intervals", format!("bad interval ({a}, {b})")));
            }
        }
        Ok(OmegaRegion { intervals })
    }

    pub fn empty() -> Self {
        OmegaRegion { intervals: vec![] }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= x && x <= b)
    }

    /// Quadrature weights for integrals over omega: each grid cell is clipped
    /// against the intervals and its trapezoid weight split between the cell
    /// endpoints. Second order even when an omega endpoint falls inside a cell.
    pub fn weights_on(&self, grid: &SpaceGrid) -> Vec<f64> {
        let n = grid.nodes.len();
        let mut w = vec![0.0; n];
        for i in 0..n - 1 {
            let (x0, x1) = (grid.nodes[i], grid.nodes[i + 1]);
            let mut overlap = 0.0;
            for &(a, b) in &self.intervals {
                overlap += (x1.min(b) - x0.max(a)).max(0.0);
            }
            w[i] += 0.5 * overlap;
            w[i + 1] += 0.5 * overlap;
        }
        w
    }

    /// Total length of omega.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|&(a, b)| b - a).sum()
    }

    /// Indices of grid nodes inside omega (quadrature restriction).
    pub fn restrict_indices(&self, grid: &SpaceGrid) -> Vec<usize> {
        grid.nodes
            .iter()
            .enumerate()
            .filter(|(_, &x)| self.contains(x))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Spectral coefficient vector u_n = (u, phi_n).
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub coefficients: Vec<f64>,
}

impl Field {
    pub fn new(coefficients: Vec<f64>) -> Self {
        Field { coefficients }
    }

    pub fn zeros(n: usize) -> Self {
        Field {
            coefficients: vec![0.0; n],
        }
    }

    /// Unit coefficient on mode `n` (zero-based).
    pub fn unit(n_modes: usize, n: usize) -> Self {
        let mut c = vec![0.0; n_modes];
        c[n] = 1.0;
        Field { coefficients: c }
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }
}

fn check_len(basis: &SpectralBasis, u: &Field, name: &'static str) -> Result<()> {
    if u.len() != basis.n_modes() {
        return Err(Error::invalid(
            name,
            format!("{} coefficients for {} modes", u.len(), basis.n_modes()),
        ));
    }
    Ok(())
}

/// Quadrature projection u_n = sum_i w_i u(x_i) phi_n(x_i).
pub fn project(basis: &SpectralBasis, grid: &SpaceGrid, samples: &[f64]) -> Result<Field> {
    if samples.len() != grid.nodes.len() {
        return Err(Error::invalid("samples", "length must match the space grid"));
    }
    let coefficients = (0..basis.n_modes())
        .map(|n| {
            grid.nodes
                .iter()
                .zip(&grid.weights)
                .zip(samples)
                .map(|((x, w), u)| w * u * basis.phi(n, *x))
                .sum()
        })
        .collect();
    Ok(Field { coefficients })
}

/// Pointwise synthesis u(x_i) = sum_n u_n phi_n(x_i).
pub fn synthesize(basis: &SpectralBasis, u: &Field, grid: &SpaceGrid) -> Result<Vec<f64>> {
    check_len(basis, u, "u")?;
    Ok(grid
        .nodes
        .iter()
        .map(|&x| {
            u.coefficients
                .iter()
                .enumerate()
                .map(|(n, c)| c * basis.phi(n, x))
                .sum()
        })
        .collect())
}

/// V_gamma norm (sum lambda_n^{2 gamma} |u_n|^2)^{1/2}; gamma = 0 is L^2,
/// negative gamma the dual norm.
pub fn v_gamma_norm(basis: &SpectralBasis, u: &Field, gamma: f64) -> Result<f64> {
    check_len(basis, u, "u")?;
    let mut acc = 0.0;
    for (l, c) in basis.eigenvalues.iter().zip(&u.coefficients) {
        acc += l.powf(2.0 * gamma) * c * c;
    }
    Ok(acc.sqrt())
}

/// Energy form E_A(u, v) = sum lambda_n u_n v_n = (A^{1/2}u, A^{1/2}v).
pub fn bilinear_form(basis: &SpectralBasis, u: &Field, v: &Field) -> Result<f64> {
    check_len(basis, u, "u")?;
    check_len(basis, v, "v")?;
    Ok(basis
        .eigenvalues
        .iter()
        .zip(&u.coefficients)
        .zip(&v.coefficients)
        .map(|((l, a), b)| l * a * b)
        .sum())
}

/// Plain L^2 coefficient pairing.
pub fn l2_inner(u: &Field, v: &Field) -> f64 {
    u.coefficients
        .iter()
        .zip(&v.coefficients)
        .map(|(a, b)| a * b)
        .sum()
}
