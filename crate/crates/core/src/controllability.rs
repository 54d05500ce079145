//! Duality identity, observation operator and its discrete injectivity, the
//! control-to-memory-state map F, and regularized control synthesis.
//!
//! Everything is assembled from exact per-mode forward/adjoint formulas; the
//! only quadrature is the L^2(omega x (0,T)) pairing of the observation side.

use crate::adjoint::{restrict_to_omega, solve_adjoint, AdjointProblem};
use crate::error::{Error, Result};
use crate::forward::{memory_state_at, ControlField, ForwardProblem, GammaChoice, MemoryState};
use crate::fracops::{FractionalOrder, TimeGrid};
use crate::mlf::mlf;
use crate::spectral::{Field, OmegaRegion, SpaceGrid, SpectralBasis};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

/// Shared problem template for map assembly: the control parametrization
/// (J time cells x M eigenfunctions on omega) and the quadrature grids.
#[derive(Debug, Clone)]
pub struct ControlTemplate {
    pub order: FractionalOrder,
    pub basis: SpectralBasis,
    /// Time quadrature grid for the observation side; nodes need not align
    /// with the control cells.
    pub grid: TimeGrid,
    pub omega: OmegaRegion,
    pub space_grid: SpaceGrid,
    pub j_cells: usize,
    pub m_ctrl: usize,
    pub gamma_choice: GammaChoice,
}

impl ControlTemplate {
    pub fn gamma(&self) -> f64 {
        self.gamma_choice.value(self.order)
    }

    pub fn n_modes(&self) -> usize {
        self.basis.n_modes()
    }

    pub fn control_dim(&self) -> usize {
        self.j_cells * self.m_ctrl
    }

    /// Control field with the given coefficient vector.
    pub fn control_from(&self, coefficients: Vec<f64>) -> Result<ControlField> {
        ControlField::new(
            self.omega.clone(),
            self.space_grid.clone(),
            self.grid.horizon(),
            self.j_cells,
            self.m_ctrl,
            coefficients,
        )
    }

    /// Forward problem with zero data and the given control (Remark 4.1).
    pub fn forward_problem(&self, control: ControlField) -> ForwardProblem {
        ForwardProblem {
            order: self.order,
            basis: self.basis.clone(),
            grid: self.grid.clone(),
            u0: Field::zeros(self.n_modes()),
            u1: Field::zeros(self.n_modes()),
            control: Some(control),
            gamma_choice: self.gamma_choice,
            // piecewise-constant controls lie in every L^p
            p: 1e6,
        }
    }

    pub fn adjoint_problem(&self, v0: Field, v1: Field) -> AdjointProblem {
        AdjointProblem {
            order: self.order,
            basis: self.basis.clone(),
            grid: self.grid.clone(),
            v0,
            v1,
        }
    }
}

/// Assembled linear map F: control coefficients (JM) -> memory-state
/// coefficients (2N; mem block first, then mem_rate).
#[derive(Debug, Clone)]
pub struct ControlMap {
    pub template: ControlTemplate,
    pub matrix: DMatrix<f64>,
}

impl ControlMap {
    /// Diagonal of the V_gamma x L^2 weighting on the state side.
    pub fn state_weights(&self) -> DVector<f64> {
        let n = self.template.n_modes();
        let gamma = self.template.gamma();
        let mut w = DVector::zeros(2 * n);
        for (i, l) in self.template.basis.eigenvalues().iter().enumerate() {
            w[i] = l.powf(2.0 * gamma);
            w[n + i] = 1.0;
        }
        w
    }

    pub fn apply(&self, coefficients: &[f64]) -> MemoryState {
        let c = DVector::from_column_slice(coefficients);
        let y = &self.matrix * c;
        let n = self.template.n_modes();
        MemoryState {
            mem: Field::new(y.as_slice()[..n].to_vec()),
            mem_rate: Field::new(y.as_slice()[n..].to_vec()),
        }
    }
}

/// Assemble F column by column: each column is the exact memory state of a
/// unit control-basis coefficient (JM forward solves).
pub fn assemble_control_map(template: &ControlTemplate) -> Result<ControlMap> {
    let n = template.n_modes();
    let jm = template.control_dim();
    let columns: Result<Vec<Vec<f64>>> = (0..jm)
        .into_par_iter()
        .map(|k| {
            let mut c = vec![0.0; jm];
            c[k] = 1.0;
            let problem = template.forward_problem(template.control_from(c)?);
            let ms = memory_state_at(&problem, template.grid.horizon())?;
            let mut col = ms.mem.coefficients;
            col.extend_from_slice(&ms.mem_rate.coefficients);
            Ok(col)
        })
        .collect();
    let columns = columns?;
    let matrix = DMatrix::from_fn(2 * n, jm, |i, j| columns[j][i]);
    Ok(ControlMap {
        template: template.clone(),
        matrix,
    })
}

/// Assembled observation operator F*: final data coefficients (2N) -> samples
/// of the adjoint solution on omega x (0,T).
///
/// `matrix` is S x 2N with S = time nodes x space nodes (row-major in time);
/// `weights` carries the L^2(omega x (0,T)) quadrature weights per sample,
/// zero off omega and at the singular final node.
#[derive(Debug, Clone)]
pub struct ObservationMap {
    pub template: ControlTemplate,
    pub matrix: DMatrix<f64>,
    pub weights: DVector<f64>,
}

impl ObservationMap {
    /// Samples of v on omega x (0,T) for given final data.
    pub fn apply(&self, v0: &Field, v1: &Field) -> DVector<f64> {
        let mut data = v0.coefficients.clone();
        data.extend_from_slice(&v1.coefficients);
        &self.matrix * DVector::from_vec(data)
    }

    /// Row-weighted matrix diag(sqrt(w)) * matrix whose smallest singular
    /// value measures discrete injectivity in L^2(omega x (0,T)).
    pub fn weighted(&self) -> DMatrix<f64> {
        let mut m = self.matrix.clone();
        for (i, mut row) in m.row_iter_mut().enumerate() {
            row *= self.weights[i].sqrt();
        }
        m
    }
}

/// Trapezoid weights of a (possibly graded) time grid, with the final node
/// zeroed when the adjoint trace is singular there.
fn time_weights(grid: &TimeGrid, zero_final: bool) -> Vec<f64> {
    let nodes = grid.nodes();
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let h = nodes[i + 1] - nodes[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    if zero_final {
        w[n - 1] = 0.0;
    }
    w
}

/// Assemble F* row-block by row-block: 2N adjoint solves on unit final data.
pub fn assemble_observation_map(template: &ControlTemplate) -> Result<ObservationMap> {
    let n = template.n_modes();
    let nt = template.grid.len();
    let nx = template.space_grid.nodes.len();
    let zero = Field::zeros(n);

    // column c of the matrix = flattened omega samples for basis datum c
    let cols: Result<Vec<Vec<f64>>> = (0..2 * n)
        .into_par_iter()
        .map(|c| {
            let (v0, v1) = if c < n {
                (Field::unit(n, c), zero.clone())
            } else {
                (zero.clone(), Field::unit(n, c - n))
            };
            let problem = template.adjoint_problem(v0, v1);
            let sol = solve_adjoint(&problem)?;
            let samples =
                restrict_to_omega(&template.basis, &sol, &template.omega, &template.space_grid);
            let mut flat = Vec::with_capacity(nt * nx);
            for row in &samples {
                flat.extend_from_slice(row);
            }
            // the singular final node carries NaN; its weight is zero
            for v in flat.iter_mut() {
                if v.is_nan() {
                    *v = 0.0;
                }
            }
            Ok(flat)
        })
        .collect();
    let cols = cols?;
    let matrix = DMatrix::from_fn(nt * nx, 2 * n, |i, j| cols[j][i]);

    // any v0 component makes t = T singular unless nu(mu-2) = 0
    let zero_final = template.order.nu_gap() > 0.0;
    let tw = time_weights(&template.grid, zero_final);
    let xw = template.omega.weights_on(&template.space_grid);
    let mut weights = DVector::zeros(nt * nx);
    for j in 0..nt {
        for i in 0..nx {
            weights[j * nx + i] = tw[j] * xw[i];
        }
    }
    Ok(ObservationMap {
        template: template.clone(),
        matrix,
        weights,
    })
}

/// Residual of the duality identity (eq41) for zero initial data:
/// |sum_n [mem_rate_n v0_n + mem_n v1_n] - int_0^T int_omega f v dx dt|.
///
/// The left side is the exact memory state; the right side is space-time
/// quadrature of f v against `restrict_to_omega` samples on the union of
/// `grid` with the control cell edges, except for the final control cell
/// (where the adjoint trace behaves like (T-t)^q) which is integrated
/// exactly per mode.
pub fn duality_residual(
    order: FractionalOrder,
    basis: &SpectralBasis,
    grid: &TimeGrid,
    f: &ControlField,
    v0: &Field,
    v1: &Field,
) -> Result<f64> {
    if (f.horizon - grid.horizon()).abs() > 1e-12 * grid.horizon() {
        return Err(Error::invalid("f", "control horizon differs from the grid"));
    }
    let horizon = grid.horizon();

    // exact left side
    let fp = ForwardProblem {
        order,
        basis: basis.clone(),
        grid: grid.clone(),
        u0: Field::zeros(basis.n_modes()),
        u1: Field::zeros(basis.n_modes()),
        control: Some(f.clone()),
        gamma_choice: GammaChoice::Half,
        p: 1e6,
    };
    let ms = memory_state_at(&fp, horizon)?;
    let lhs: f64 = ms
        .mem_rate
        .coefficients
        .iter()
        .zip(&v0.coefficients)
        .map(|(a, b)| a * b)
        .sum::<f64>()
        + ms.mem
            .coefficients
            .iter()
            .zip(&v1.coefficients)
            .map(|(a, b)| a * b)
            .sum::<f64>();

    // union time grid: caller's nodes plus control cell edges
    let mut nodes = grid.nodes().to_vec();
    for j in 1..f.j_cells {
        nodes.push(f.cell_bounds(j).0);
    }
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nodes.dedup_by(|a, b| (*a - *b).abs() < 1e-13 * horizon);
    let tgrid = TimeGrid::from_nodes(nodes)?;

    let ap = AdjointProblem {
        order,
        basis: basis.clone(),
        grid: tgrid.clone(),
        v0: v0.clone(),
        v1: v1.clone(),
    };
    let sol = solve_adjoint(&ap)?;
    let xw = f.omega.weights_on(&f.space_grid);
    // f and v values at weighted nodes as plain modal sums: the omega
    // indicator lives in the clipped weights, matching the Gram used on the
    // left side (a sharp indicator would disagree at partially covered cells)
    let phis: Vec<Vec<f64>> = f
        .space_grid
        .nodes
        .iter()
        .map(|&x| (0..basis.n_modes()).map(|n| basis.phi(n, x)).collect())
        .collect();
    let fx: Vec<Vec<f64>> = f
        .space_grid
        .nodes
        .iter()
        .map(|&x| {
            (0..f.j_cells)
                .map(|j| {
                    (0..f.m_modes)
                        .map(|mm| f.coefficients[j * f.m_modes + mm] * basis.phi(mm, x))
                        .sum()
                })
                .collect()
        })
        .collect();
    let v_at = |i: usize, k: usize| -> f64 {
        (0..basis.n_modes()).map(|n| sol.value(n, i) * phis[k][n]).sum()
    };

    // trapezoid per sub-interval up to the last control cell edge
    let tn = tgrid.nodes();
    let t_edge = f.cell_bounds(f.j_cells - 1).0;
    let edge_idx = tn
        .iter()
        .position(|&t| (t - t_edge).abs() < 1e-12 * horizon.max(1.0))
        .expect("last control cell edge is a union-grid node");
    let mut rhs = 0.0;
    for i in 0..edge_idx {
        let mid = 0.5 * (tn[i] + tn[i + 1]);
        let h = tn[i + 1] - tn[i];
        let cell = f.cell_index(mid);
        for k in 0..f.space_grid.nodes.len() {
            if xw[k] == 0.0 {
                continue;
            }
            rhs += 0.5 * h * xw[k] * fx[k][cell] * (v_at(i, k) + v_at(i + 1, k));
        }
    }
    // final control cell [t_edge, T]: f is constant there and the modal
    // antiderivative of (Dual-sol-spec) is explicit, so integrate exactly
    {
        let s1 = horizon - t_edge;
        let mu = order.mu();
        let q = -order.nu_gap();
        let fc = f.modal_cell_coefficients(basis);
        for n in 0..basis.n_modes() {
            let lambda = basis.eigenvalues()[n];
            let arg = -lambda * s1.powf(mu);
            // int_0^{s1} v_n(T - s) ds with v_n per (Dual-sol-spec)
            let iv = v0.coefficients[n] * s1.powf(q + 1.0) * mlf(mu, q + 2.0, arg)?
                + v1.coefficients[n] * s1.powf(q + 2.0) * mlf(mu, q + 3.0, arg)?;
            rhs += fc[f.j_cells - 1][n] * iv;
        }
    }

    Ok((lhs - rhs).abs())
}

/// Max adjointness defect |<Ff,(v0,v1)> - <f, F*(v0,v1)>| over deterministic
/// pseudo-random probes; the pairing is the unweighted L^2 one of (eq41).
pub fn duality_adjointness_residual(
    cm: &ControlMap,
    om: &ObservationMap,
    n_probes: usize,
    seed: u64,
) -> Result<f64> {
    let n = cm.template.n_modes();
    let jm = cm.template.control_dim();
    let mut state = seed.max(1);
    let mut unit = move || {
        // xorshift64*, mapped to [-1, 1)
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        let x = state.wrapping_mul(0x2545F4914F6CDD1D);
        (x >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    };
    let mut worst = 0.0f64;
    for _ in 0..n_probes {
        let c: Vec<f64> = (0..jm).map(|_| unit()).collect();
        let v0 = Field::new((0..n).map(|_| unit()).collect());
        let v1 = Field::new((0..n).map(|_| unit()).collect());
        let ms = cm.apply(&c);
        let lhs: f64 = ms
            .mem_rate
            .coefficients
            .iter()
            .zip(&v0.coefficients)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            + ms.mem
                .coefficients
                .iter()
                .zip(&v1.coefficients)
                .map(|(a, b)| a * b)
                .sum::<f64>();
        let vs = om.apply(&v0, &v1);
        // <f, F*(v0,v1)>_{L^2(omega x (0,T))}
        let field = cm.template.control_from(c)?;
        let nx = cm.template.space_grid.nodes.len();
        let mut rhs = 0.0;
        for (s, (&v, &w)) in vs.iter().zip(om.weights.iter()).enumerate() {
            if w == 0.0 {
                continue;
            }
            let j = s / nx;
            let i = s % nx;
            let t = cm.template.grid.nodes()[j];
            let x = cm.template.space_grid.nodes[i];
            rhs += w * v * field.sample(&cm.template.basis, x, t);
        }
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Verdict of the discrete unique-continuation test.
#[derive(Debug, Clone)]
pub struct UcpReport {
    /// Smallest singular value of the weighted observation matrix, floored
    /// at 1e-14 for reporting.
    pub sigma_min: f64,
    /// Right singular vector of a rank-deficient map (the offending final
    /// data direction), present when sigma_min fell below the floor.
    pub kernel: Option<Vec<f64>>,
}

pub const UCP_FLOOR: f64 = 1e-14;

/// Smallest singular value of diag(sqrt(w)) F*; strictly positive certifies
/// injectivity of (v0,v1) -> v|_{omega x (0,T)} at truncation N.
pub fn ucp_smallest_singular_value(om: &ObservationMap) -> Result<UcpReport> {
    let a = om.weighted();
    let svd = a.clone().svd(false, true);
    let n2 = om.matrix.ncols();
    let mut sigma_min = f64::INFINITY;
    let mut arg = 0;
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s < sigma_min {
            sigma_min = *s;
            arg = i;
        }
    }
    // fewer reported values than columns means exact rank deficiency
    if svd.singular_values.len() < n2 {
        sigma_min = 0.0;
    }
    let kernel = if sigma_min < UCP_FLOOR {
        let vt = svd.v_t.as_ref().ok_or_else(|| Error::Numerical {
            context: "ucp_smallest_singular_value",
            message: "SVD did not return right singular vectors".into(),
        })?;
        if svd.singular_values.len() < n2 {
            // degenerate sampling (e.g. empty omega): any unit vector works
            let mut k = vec![0.0; n2];
            k[0] = 1.0;
            Some(k)
        } else {
            Some(vt.row(arg).iter().copied().collect())
        }
    } else {
        None
    };
    Ok(UcpReport {
        sigma_min: sigma_min.max(0.0),
        kernel,
    })
}

/// Outcome of one Tikhonov synthesis.
#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub control: ControlField,
    /// Achieved ||F c - target|| in the V_gamma x L^2 metric.
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// argmin_c ||F c - target||^2_{V_gamma x L^2} + eps ||c||^2 by conjugate
/// gradient on the normal equations (F^T W F + eps I) c = F^T W target.
pub fn synthesize_control(
    cm: &ControlMap,
    target: &MemoryState,
    eps: f64,
) -> Result<SynthesisResult> {
    if !(eps > 0.0) {
        return Err(Error::invalid("eps", "regularization must be positive"));
    }
    let n = cm.template.n_modes();
    if target.mem.len() != n || target.mem_rate.len() != n {
        return Err(Error::invalid("target", "coefficient length must match the basis"));
    }
    let jm = cm.template.control_dim();
    let w = cm.state_weights();
    let mut t = DVector::zeros(2 * n);
    for i in 0..n {
        t[i] = target.mem.coefficients[i];
        t[n + i] = target.mem_rate.coefficients[i];
    }
    let fm = &cm.matrix;
    let wf = {
        let mut m = fm.clone();
        for (i, mut row) in m.row_iter_mut().enumerate() {
            row *= w[i];
        }
        m
    };
    let a = fm.transpose() * &wf; // F^T W F
    let b = fm.transpose() * w.component_mul(&t);

    // CG on (A + eps I) c = b
    let apply = |x: &DVector<f64>| &a * x + eps * x;
    let mut c = DVector::zeros(jm);
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rs = r.dot(&r);
    let b_norm = b.norm().max(1e-300);
    let cap = 10 * jm;
    let mut converged = rs.sqrt() <= 1e-10 * b_norm;
    let mut iterations = 0;
    while !converged && iterations < cap {
        let ap = apply(&p);
        let alpha = rs / p.dot(&ap);
        c += alpha * &p;
        r -= alpha * ap;
        let rs_new = r.dot(&r);
        iterations += 1;
        if rs_new.sqrt() <= 1e-10 * b_norm {
            converged = true;
        }
        p = &r + (rs_new / rs) * p;
        rs = rs_new;
    }

    let misfit = fm * &c - t;
    let residual = misfit
        .iter()
        .enumerate()
        .map(|(i, v)| w[i] * v * v)
        .sum::<f64>()
        .sqrt();
    Ok(SynthesisResult {
        control: cm.template.control_from(c.as_slice().to_vec())?,
        residual,
        converged,
        iterations,
    })
}

/// One row of the controllability report.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub target_id: String,
    pub eps: f64,
    pub residual: f64,
    pub control_norm: f64,
    pub cg_iters: usize,
    pub runtime_ms: f64,
}

/// Run the eps-path for each target; approximate controllability manifests
/// as residuals decreasing along the path.
pub fn controllability_report(
    cm: &ControlMap,
    targets: &[(String, MemoryState)],
    eps_path: &[f64],
) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for (id, target) in targets {
        for &eps in eps_path {
            let start = std::time::Instant::now();
            let out = synthesize_control(cm, target, eps)?;
            rows.push(ReportRow {
                target_id: id.clone(),
                eps,
                residual: out.residual,
                control_norm: out.control.coefficient_norm(),
                cg_iters: out.iterations,
                runtime_ms: start.elapsed().as_secs_f64() * 1e3,
            });
        }
    }
    Ok(rows)
}

/// Residue diagnostic of Eq. (e416)/(zero): contour integration of the
/// Laplace-transformed observation around eta = -lambda_l, compared with the
/// closed-form residue coefficient
///   r_l = v0_l (-lambda_l)^{(beta~+1)/mu} + v1_l (-lambda_l)^{beta~/mu},
/// beta~ = (1-nu)(mu-2), complex powers by principal branch.
#[derive(Debug, Clone)]
pub struct ResidueReport {
    /// L^2(omega) norm of the contour-extracted residue function.
    pub observed_norm: f64,
    /// Same norm from the closed-form coefficient.
    pub closed_form_norm: f64,
    /// Max pointwise disagreement on omega nodes.
    pub max_diff: f64,
}

pub fn residue_diagnostic(
    template: &ControlTemplate,
    v0: &Field,
    v1: &Field,
    l: usize,
) -> Result<ResidueReport> {
    let n = template.n_modes();
    if l >= n {
        return Err(Error::invalid("l", "mode index out of range"));
    }
    if v0.len() != n || v1.len() != n {
        return Err(Error::invalid("v0/v1", "coefficient length must match the basis"));
    }
    let mu = template.order.mu();
    let nu = template.order.nu();
    // the paper's beta here is (1-nu)(mu-2), the negative of fracops beta
    let bt = (1.0 - nu) * (mu - 2.0);
    let eigen = template.basis.eigenvalues();
    let ll = eigen[l];

    // circle radius: half the gap to the nearest distinct eigenvalue
    let mut gap = ll; // distance to 0 as fallback
    for (k, &lk) in eigen.iter().enumerate() {
        if k != l && (lk - ll).abs() > 1e-12 * ll {
            gap = gap.min((lk - ll).abs());
        }
    }
    let rho = 0.4 * gap;
    if !(rho > 0.0) {
        return Err(Error::Numerical {
            context: "residue_diagnostic",
            message: "degenerate eigenvalue gap".into(),
        });
    }

    // Powers on the contour use a branch cut along the negative imaginary
    // axis (arg in (-pi/2, 3pi/2)): the circle surrounds a negative real
    // pole, so the principal cut would pass through it. On the negative
    // real axis this branch coincides with the principal value from above,
    // matching the cos/sin closed form of (zero).
    let pow = |eta: Complex64, a: f64| {
        let mut th = eta.arg();
        if th < -std::f64::consts::FRAC_PI_2 {
            th += 2.0 * std::f64::consts::PI;
        }
        Complex64::from_polar(eta.norm().powf(a), a * th)
    };
    let phi = |eta: Complex64| -> Vec<Complex64> {
        // modal coefficients of the transformed observation at eta
        (0..n)
            .map(|k| {
                (Complex64::new(v0.coefficients[k], 0.0) * pow(eta, (bt + 1.0) / mu)
                    + Complex64::new(v1.coefficients[k], 0.0) * pow(eta, bt / mu))
                    / (eta + eigen[k])
            })
            .collect()
    };

    // trapezoid on the circle eta = -lambda_l + rho e^{i theta}
    let k_pts = 256;
    let mut res_modal = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..k_pts {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / k_pts as f64;
        let e = Complex64::new(0.0, theta).exp();
        let eta = Complex64::new(-ll, 0.0) + rho * e;
        // (1/2 pi i) dtheta i rho e^{i theta} = rho e^{i theta} / (2 pi) ... dtheta
        let c = phi(eta);
        for (r, v) in res_modal.iter_mut().zip(&c) {
            *r += v * rho * e / k_pts as f64;
        }
    }

    let closed = Complex64::new(v0.coefficients[l], 0.0) * pow(Complex64::new(-ll, 0.0), (bt + 1.0) / mu)
        + Complex64::new(v1.coefficients[l], 0.0) * pow(Complex64::new(-ll, 0.0), bt / mu);

    // synthesize both residue functions on omega and compare
    let xw = template.omega.weights_on(&template.space_grid);
    let mut obs_sq = 0.0;
    let mut closed_sq = 0.0;
    let mut max_diff = 0.0f64;
    for (i, &x) in template.space_grid.nodes.iter().enumerate() {
        if xw[i] == 0.0 {
            continue;
        }
        let mut o = Complex64::new(0.0, 0.0);
        for (k, r) in res_modal.iter().enumerate() {
            o += r * template.basis.phi(k, x);
        }
        let c = closed * template.basis.phi(l, x);
        obs_sq += xw[i] * o.norm_sqr();
        closed_sq += xw[i] * c.norm_sqr();
        max_diff = max_diff.max((o - c).norm());
    }
    Ok(ResidueReport {
        observed_norm: obs_sq.sqrt(),
        closed_form_norm: closed_sq.sqrt(),
        max_diff,
    })
}
