//! Forward solver: the spectral representation of the Hilfer evolution
//! problem, its memory state, and the alternate resolvent-family form.
//!
//! All mode formulas are closed in terms of E_{mu,beta}; the only quadrature
//! is the alternate representation's outer fractional integral and the
//! control cell integrals, which reduce to exact Mittag-Leffler increments
//! because d/ds [s^c E_{mu,c+1}(-l s^mu)] = s^{c-1} E_{mu,c}(-l s^mu).

use crate::error::{Error, Result};
use crate::fracops::{FractionalOrder, TimeGrid};
use crate::mlf::{mlf, recip_gamma};
use crate::quad;
use crate::spectral::{Field, OmegaRegion, SpaceGrid, SpectralBasis};
use rayon::prelude::*;

/// Which gamma from Theorem 2.12 indexes the state space V_gamma.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaChoice {
    /// gamma = 1/mu, requires p > 1/(mu-1).
    OverMu,
    /// gamma = 1/2, requires p > 2/mu.
    Half,
}

impl GammaChoice {
    pub fn value(self, order: FractionalOrder) -> f64 {
        match self {
            GammaChoice::OverMu => 1.0 / order.mu(),
            GammaChoice::Half => 0.5,
        }
    }
}

/// Piecewise-constant-in-time control supported on omega, expanded in the
/// first M eigenfunctions restricted to omega.
#[derive(Debug, Clone)]
pub struct ControlField {
    pub omega: OmegaRegion,
    pub space_grid: SpaceGrid,
    pub horizon: f64,
    pub j_cells: usize,
    pub m_modes: usize,
    /// Row-major J x M: coefficient of chi_omega phi_m on time cell j.
    pub coefficients: Vec<f64>,
}

impl ControlField {
    pub fn new(
        omega: OmegaRegion,
        space_grid: SpaceGrid,
        horizon: f64,
        j_cells: usize,
        m_modes: usize,
        coefficients: Vec<f64>,
    ) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::invalid("horizon", "need T > 0"));
        }
        if j_cells == 0 || m_modes == 0 {
            return Err(Error::invalid("control basis", "need J >= 1 and M >= 1"));
        }
        if coefficients.len() != j_cells * m_modes {
            return Err(Error::invalid(
                "coefficients",
                format!("length {} != J*M = {}", coefficients.len(), j_cells * m_modes),
            ));
        }
        Ok(ControlField {
            omega,
            space_grid,
            horizon,
            j_cells,
            m_modes,
            coefficients,
        })
    }

    /// Zero control with the given parametrization.
    pub fn zero(
        omega: OmegaRegion,
        space_grid: SpaceGrid,
        horizon: f64,
        j_cells: usize,
        m_modes: usize,
    ) -> Result<Self> {
        let c = vec![0.0; j_cells * m_modes];
        ControlField::new(omega, space_grid, horizon, j_cells, m_modes, c)
    }

    pub fn cell_bounds(&self, j: usize) -> (f64, f64) {
        let h = self.horizon / self.j_cells as f64;
        (j as f64 * h, (j + 1) as f64 * h)
    }

    pub fn cell_index(&self, t: f64) -> usize {
        let h = self.horizon / self.j_cells as f64;
        ((t / h) as usize).min(self.j_cells - 1)
    }

    /// Overlap Gram G[m][n] = int_omega phi_m phi_n dx on the stored grid.
    pub fn omega_gram(&self, basis: &SpectralBasis) -> Vec<Vec<f64>> {
        let w = self.omega.weights_on(&self.space_grid);
        let nm = basis.n_modes();
        (0..self.m_modes)
            .map(|m| {
                (0..nm)
                    .map(|n| {
                        self.space_grid
                            .nodes
                            .iter()
                            .zip(&w)
                            .map(|(&x, &wi)| wi * basis.phi(m, x) * basis.phi(n, x))
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    /// Per-cell modal forcing f_n on cell j: fc[j][n] = sum_m c_{jm} G[m][n].
    pub fn modal_cell_coefficients(&self, basis: &SpectralBasis) -> Vec<Vec<f64>> {
        let gram = self.omega_gram(basis);
        let nm = basis.n_modes();
        (0..self.j_cells)
            .map(|j| {
                (0..nm)
                    .map(|n| {
                        (0..self.m_modes)
                            .map(|m| self.coefficients[j * self.m_modes + m] * gram[m][n])
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    /// Pointwise value f(x, t); zero outside omega by construction.
    pub fn sample(&self, basis: &SpectralBasis, x: f64, t: f64) -> f64 {
        if !self.omega.contains(x) || t < 0.0 || t > self.horizon {
            return 0.0;
        }
        let j = self.cell_index(t);
        (0..self.m_modes)
            .map(|m| self.coefficients[j * self.m_modes + m] * basis.phi(m, x))
            .sum()
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coefficient_norm(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// L^p(0,T; L^2(Omega)) norm; the control is piecewise constant in time
    /// so the time integral is a finite sum.
    pub fn lp_norm(&self, basis: &SpectralBasis, p: f64) -> f64 {
        let w = self.omega.weights_on(&self.space_grid);
        let h = self.horizon / self.j_cells as f64;
        let mut acc = 0.0;
        for j in 0..self.j_cells {
            let mut sq = 0.0;
            for (&x, &wi) in self.space_grid.nodes.iter().zip(&w) {
                let v: f64 = (0..self.m_modes)
                    .map(|m| self.coefficients[j * self.m_modes + m] * basis.phi(m, x))
                    .sum();
                sq += wi * v * v;
            }
            acc += h * sq.sqrt().powf(p);
        }
        acc.powf(1.0 / p)
    }
}

/// Mode-by-time solution table bound to its grid.
///
/// `singular_node` marks the one endpoint (t=0 forward, t=T adjoint) where
/// the representation blows up; its column holds NaN and quantitative checks
/// start one node in.
#[derive(Debug, Clone)]
pub struct ModalField {
    pub grid: TimeGrid,
    /// traces[n][j] = u_n(t_j).
    pub traces: Vec<Vec<f64>>,
    pub singular_node: Option<usize>,
}

impl ModalField {
    pub fn n_modes(&self) -> usize {
        self.traces.len()
    }

    pub fn trace(&self, n: usize) -> &[f64] {
        &self.traces[n]
    }

    pub fn value(&self, n: usize, j: usize) -> f64 {
        self.traces[n][j]
    }

    /// Coefficient snapshot at time node j.
    pub fn field_at(&self, j: usize) -> Field {
        Field::new(self.traces.iter().map(|t| t[j]).collect())
    }
}

/// Full data of the forward problem (main-EQ).
#[derive(Debug, Clone)]
pub struct ForwardProblem {
    pub order: FractionalOrder,
    pub basis: SpectralBasis,
    pub grid: TimeGrid,
    pub u0: Field,
    pub u1: Field,
    pub control: Option<ControlField>,
    pub gamma_choice: GammaChoice,
    /// Time-integrability exponent of the control.
    pub p: f64,
}

impl ForwardProblem {
    pub fn validate(&self) -> Result<()> {
        if self.u0.len() != self.basis.n_modes() || self.u1.len() != self.basis.n_modes() {
            return Err(Error::invalid("u0/u1", "coefficient length must match the basis"));
        }
        let mu = self.order.mu();
        let bound = match self.gamma_choice {
            GammaChoice::OverMu => 1.0 / (mu - 1.0),
            GammaChoice::Half => 2.0 / mu,
        };
        if mu < 2.0 && !(self.p > bound) {
            return Err(Error::invalid(
                "p",
                format!("Theorem 2.12 needs p > {bound:.6} for this gamma choice, got {}", self.p),
            ));
        }
        if let Some(f) = &self.control {
            if (f.horizon - self.grid.horizon()).abs() > 1e-12 * self.grid.horizon() {
                return Err(Error::invalid("control", "horizon differs from the time grid"));
            }
            if f.m_modes > self.basis.n_modes() {
                return Err(Error::invalid("control", "more spatial modes than the basis"));
            }
        }
        Ok(())
    }

    pub fn gamma(&self) -> f64 {
        self.gamma_choice.value(self.order)
    }
}

/// Exact Duhamel cell increment: int_a^b (t-tau)^{c-1} E_{mu,c}(-l (t-tau)^mu) dtau
/// = K(t-a) - K(t-b) with K(s) = s^c E_{mu,c+1}(-l s^mu).
fn duhamel_cell(mu: f64, c: f64, lambda: f64, t: f64, a: f64, b: f64) -> Result<f64> {
    let k = |s: f64| -> Result<f64> {
        if s <= 0.0 {
            return Ok(0.0);
        }
        Ok(s.powf(c) * mlf(mu, c + 1.0, -lambda * s.powf(mu))?)
    };
    Ok(k(t - a)? - k(t - b)?)
}

/// Homogeneous part of (Weak-Sol) for one mode at one time.
fn homogeneous(mu: f64, beta: f64, lambda: f64, u0: f64, u1: f64, t: f64) -> Result<f64> {
    if t == 0.0 {
        // beta = 0 reaches the limit u0; beta > 0 only when u0 = 0 here.
        return Ok(if beta == 0.0 { u0 } else { 0.0 });
    }
    let arg = -lambda * t.powf(mu);
    let mut v = 0.0;
    if u0 != 0.0 {
        v += u0 * t.powf(-beta) * mlf(mu, 1.0 - beta, arg)?;
    }
    if u1 != 0.0 {
        v += u1 * t.powf(1.0 - beta) * mlf(mu, 2.0 - beta, arg)?;
    }
    Ok(v)
}

/// Solve (main-EQ) by the (Weak-Sol) representation, exactly per mode.
pub fn solve_forward(problem: &ForwardProblem) -> Result<ModalField> {
    problem.validate()?;
    let order = problem.order;
    let (mu, beta) = (order.mu(), order.beta());
    let nodes = problem.grid.nodes().to_vec();
    let modal_f = problem
        .control
        .as_ref()
        .map(|f| (f, f.modal_cell_coefficients(&problem.basis)));

    let singular = beta > 0.0 && problem.u0.coefficients.iter().any(|&c| c != 0.0);
    let traces: Result<Vec<Vec<f64>>> = (0..problem.basis.n_modes())
        .into_par_iter()
        .map(|n| {
            let lambda = problem.basis.eigenvalues()[n];
            let (u0, u1) = (problem.u0.coefficients[n], problem.u1.coefficients[n]);
            let mut trace = Vec::with_capacity(nodes.len());
            for &t in &nodes {
                if t == 0.0 && singular {
                    trace.push(f64::NAN);
                    continue;
                }
                let mut v = homogeneous(mu, beta, lambda, u0, u1, t)?;
                if let Some((f, fc)) = &modal_f {
                    for j in 0..f.j_cells {
                        let (a, b) = f.cell_bounds(j);
                        if a >= t {
                            break;
                        }
                        if fc[j][n] != 0.0 {
                            v += fc[j][n] * duhamel_cell(mu, mu, lambda, t, a, b.min(t))?;
                        }
                    }
                }
                trace.push(v);
            }
            Ok(trace)
        })
        .collect();

    Ok(ModalField {
        grid: problem.grid.clone(),
        traces: traces?,
        singular_node: if singular { Some(0) } else { None },
    })
}

/// Memory pair (I^beta u, d/dt I^beta u) at time t, by the closed
/// (Init-Cond1)/(Init-Cond2) mode formulas. Never differentiates the
/// solution numerically; t = 0 returns (u0, u1) identically.
pub fn memory_state_at(problem: &ForwardProblem, t: f64) -> Result<MemoryState> {
    problem.validate()?;
    if t == 0.0 {
        return Ok(MemoryState {
            mem: problem.u0.clone(),
            mem_rate: problem.u1.clone(),
        });
    }
    let order = problem.order;
    let mu = order.mu();
    let g = order.nu_gap();
    let modal_f = problem
        .control
        .as_ref()
        .map(|f| (f, f.modal_cell_coefficients(&problem.basis)));

    let pairs: Result<Vec<(f64, f64)>> = (0..problem.basis.n_modes())
        .into_par_iter()
        .map(|n| {
            let lambda = problem.basis.eigenvalues()[n];
            let (u0, u1) = (problem.u0.coefficients[n], problem.u1.coefficients[n]);
            let arg = -lambda * t.powf(mu);
            let mut mem = u0 * mlf(mu, 1.0, arg)? + u1 * t * mlf(mu, 2.0, arg)?;
            // (Init-Cond2): the u0 term enters with a minus sign.
            let mut rate = -u0 * lambda * t.powf(mu - 1.0) * mlf(mu, mu, arg)?
                + u1 * mlf(mu, 1.0, arg)?;
            if let Some((f, fc)) = &modal_f {
                for j in 0..f.j_cells {
                    let (a, b) = f.cell_bounds(j);
                    if a >= t {
                        break;
                    }
                    if fc[j][n] != 0.0 {
                        mem += fc[j][n] * duhamel_cell(mu, 2.0 - g, lambda, t, a, b.min(t))?;
                        rate += fc[j][n] * duhamel_cell(mu, 1.0 - g, lambda, t, a, b.min(t))?;
                    }
                }
            }
            Ok((mem, rate))
        })
        .collect();
    let pairs = pairs?;
    Ok(MemoryState {
        mem: Field::new(pairs.iter().map(|p| p.0).collect()),
        mem_rate: Field::new(pairs.iter().map(|p| p.1).collect()),
    })
}

/// Memory pair at the final time of the solution's grid.
pub fn memory_state(problem: &ForwardProblem, solution: &ModalField) -> Result<MemoryState> {
    memory_state_at(problem, solution.grid.horizon())
}

/// The controlled pair of Definition 2.11.
#[derive(Debug, Clone)]
pub struct MemoryState {
    /// I^{(1-nu)(2-mu)} u(T), measured in V_gamma.
    pub mem: Field,
    /// d/dt I^{(1-nu)(2-mu)} u(T), measured in L^2.
    pub mem_rate: Field,
}

/// Alternate Section 2.4 representation: u = I^{nu(2-mu)}[t^{mu-2}S_{mu-1}u0
/// + t^{mu-1}S_mu u1], the outer integral by product quadrature with the
/// t^{mu-2} head integrated under the substitution s = t_1 v^{1/(mu-1)}.
pub fn solve_forward_alt(problem: &ForwardProblem) -> Result<ModalField> {
    problem.validate()?;
    if problem.control.is_some() {
        return Err(Error::invalid("control", "alternate representation requires f = 0"));
    }
    let order = problem.order;
    let (mu, beta, g) = (order.mu(), order.beta(), order.nu_gap());
    if g == 0.0 {
        // I^0 = id and the integrand equals (Weak-Sol) directly.
        return solve_forward(problem);
    }
    let nodes = problem.grid.nodes().to_vec();
    let singular = beta > 0.0 && problem.u0.coefficients.iter().any(|&c| c != 0.0);
    let rg = recip_gamma(g);

    let traces: Result<Vec<Vec<f64>>> = (0..problem.basis.n_modes())
        .into_par_iter()
        .map(|n| {
            let lambda = problem.basis.eigenvalues()[n];
            let (u0, u1) = (problem.u0.coefficients[n], problem.u1.coefficients[n]);
            let mut trace = vec![0.0; nodes.len()];
            if u0 != 0.0 {
                let part = outer_integral(g, mu - 2.0, mu, mu - 1.0, lambda, &nodes)?;
                for (t, p) in trace.iter_mut().zip(&part) {
                    *t += u0 * p;
                }
            }
            if u1 != 0.0 {
                let part = outer_integral(g, mu - 1.0, mu, mu, lambda, &nodes)?;
                for (t, p) in trace.iter_mut().zip(&part) {
                    *t += u1 * p;
                }
            }
            for v in trace.iter_mut() {
                *v *= rg;
            }
            trace[0] = if singular {
                f64::NAN
            } else if beta == 0.0 {
                u0
            } else {
                0.0
            };
            Ok(trace)
        })
        .collect();

    Ok(ModalField {
        grid: problem.grid.clone(),
        traces: traces?,
        singular_node: if singular { Some(0) } else { None },
    })
}

/// int_0^{t_j} (t_j - s)^{g-1} s^sigma E_{mu,b}(-lambda s^mu) ds at every
/// node, by per-cell Gauss quadrature on the exact integrand. The s = 0
/// branch point is absorbed by s = t_1 v^{1/(sigma+1)} on the head cell and
/// the kernel endpoint by y = (t_j - s)^g on the last cell.
fn outer_integral(
    g: f64,
    sigma: f64,
    mu: f64,
    b: f64,
    lambda: f64,
    nodes: &[f64],
) -> Result<Vec<f64>> {
    let e = |s: f64| mlf(mu, b, -lambda * s.powf(mu));
    let m = nodes.len() - 1;
    let (gx, gw) = &*quad::gl16();
    let (gx, gw) = (gx.as_slice(), gw.as_slice());

    // Per-cell tables independent of the target node: quadrature abscissae
    // s_{ik} and weights w_{ik} = gw_k * scale * s^sigma * E(-lambda s^mu).
    let mut s_tab = vec![[0.0f64; 16]; m];
    let mut w_tab = vec![[0.0f64; 16]; m];
    for i in 1..m {
        let (a, c) = (nodes[i], nodes[i + 1]);
        let half = 0.5 * (c - a);
        let mid = 0.5 * (c + a);
        for k in 0..16 {
            let s = mid + half * gx[k];
            s_tab[i][k] = s;
            w_tab[i][k] = gw[k] * half * s.powf(sigma) * e(s)?;
        }
    }

    let t1 = nodes[1];
    let pref = t1.powf(sigma + 1.0) / (sigma + 1.0);
    let mut out = vec![0.0; nodes.len()];
    for j in 1..=m {
        let tj = nodes[j];
        let mut acc = 0.0;
        if j == 1 {
            // both endpoints singular: split at v = 1/2, swap variables above
            let mut lower = 0.0;
            for k in 0..16 {
                let v = 0.25 + 0.25 * gx[k];
                let s = t1 * v.powf(1.0 / (sigma + 1.0));
                lower += gw[k] * 0.25 * (t1 - s).powf(g - 1.0) * e(s)?;
            }
            acc += pref * lower;
            let s_half = t1 * 0.5f64.powf(1.0 / (sigma + 1.0));
            let y_max = (t1 - s_half).powf(g);
            let mut upper = 0.0;
            for k in 0..16 {
                let y = 0.5 * y_max * (1.0 + gx[k]);
                let s = t1 - y.powf(1.0 / g);
                upper += gw[k] * 0.5 * y_max * s.powf(sigma) * e(s)?;
            }
            acc += upper / g;
        } else {
            // head cell [0, t_1]
            let mut head = 0.0;
            for k in 0..16 {
                let v = 0.5 * (1.0 + gx[k]);
                let s = t1 * v.powf(1.0 / (sigma + 1.0));
                head += gw[k] * 0.5 * (tj - s).powf(g - 1.0) * e(s)?;
            }
            acc += pref * head;
            // interior cells: tabulated integrand, kernel factor per target
            for i in 1..j - 1 {
                let mut cell = 0.0;
                for k in 0..16 {
                    cell += w_tab[i][k] * (tj - s_tab[i][k]).powf(g - 1.0);
                }
                acc += cell;
            }
            // last cell [t_{j-1}, t_j]: kernel endpoint singularity
            let y_max = (tj - nodes[j - 1]).powf(g);
            let mut last = 0.0;
            for k in 0..16 {
                let y = 0.5 * y_max * (1.0 + gx[k]);
                let s = tj - y.powf(1.0 / g);
                last += gw[k] * 0.5 * y_max * s.powf(sigma) * e(s)?;
            }
            acc += last / g;
        }
        out[j] = acc;
    }
    Ok(out)
}

/// Fitted constants and residuals for the resolvent families S_mu, S_{mu-1}
/// (Lemmas 2.19/2.20).
#[derive(Debug, Clone)]
pub struct FamilyReport {
    /// sup ||S(t)u|| / ||u|| over the sweep, both families.
    pub c1_s_mu: f64,
    pub c1_s_mu1: f64,
    /// max residual of A S(t)u - S(t)Au on random data.
    pub commute_a_residual: f64,
    /// max residual of S(t)S(tau)u - S(tau)S(t)u on random data.
    pub commutativity_residual: f64,
    /// sup t * ||dS(t)u/dt|| / ||u|| (finite-difference), both families.
    pub c2_s_mu: f64,
    pub c2_s_mu1: f64,
}

/// Multiply coefficients by the diagonal symbol of S_sigma(t):
/// E_{mu,sigma}(-lambda t^mu) (the t power lives outside the family).
fn family_apply(basis: &SpectralBasis, mu: f64, sigma: f64, t: f64, u: &Field) -> Result<Field> {
    let mut out = Vec::with_capacity(u.len());
    for (l, c) in basis.eigenvalues().iter().zip(&u.coefficients) {
        out.push(c * mlf(mu, sigma, -l * t.powf(mu))?);
    }
    Ok(Field::new(out))
}

fn l2(u: &Field) -> f64 {
    u.coefficients.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Check Lemma 2.19/2.20 properties on the truncated basis.
pub fn family_properties(
    basis: &SpectralBasis,
    order: FractionalOrder,
    t: f64,
    tau: f64,
    probe: &Field,
) -> Result<FamilyReport> {
    let mu = order.mu();
    if probe.len() != basis.n_modes() {
        return Err(Error::invalid("probe", "coefficient length must match the basis"));
    }
    let norm_u = l2(probe).max(1e-300);

    let mut c1_s_mu = 0.0f64;
    let mut c1_s_mu1 = 0.0f64;
    let mut c2_s_mu = 0.0f64;
    let mut c2_s_mu1 = 0.0f64;
    for &ts in &[1e-3, 1e-2, 1e-1, 1.0, 10.0] {
        for sigma_idx in 0..2 {
            let sigma = if sigma_idx == 0 { mu } else { mu - 1.0 };
            let v = family_apply(basis, mu, sigma, ts, probe)?;
            let ratio = l2(&v) / norm_u;
            // centered FD derivative of the family action
            let h = 1e-5 * ts;
            let vp = family_apply(basis, mu, sigma, ts + h, probe)?;
            let vm = family_apply(basis, mu, sigma, ts - h, probe)?;
            let der: Vec<f64> = vp
                .coefficients
                .iter()
                .zip(&vm.coefficients)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect();
            let dnorm = der.iter().map(|c| c * c).sum::<f64>().sqrt();
            if sigma_idx == 0 {
                c1_s_mu = c1_s_mu.max(ratio);
                c2_s_mu = c2_s_mu.max(ts * dnorm / norm_u);
            } else {
                c1_s_mu1 = c1_s_mu1.max(ratio);
                c2_s_mu1 = c2_s_mu1.max(ts * dnorm / norm_u);
            }
        }
    }

    // Diagonal operators commute; measure the numerical residual anyway.
    let au = Field::new(
        basis
            .eigenvalues()
            .iter()
            .zip(&probe.coefficients)
            .map(|(l, c)| l * c)
            .collect(),
    );
    let asu = Field::new(
        basis
            .eigenvalues()
            .iter()
            .zip(&family_apply(basis, mu, mu, t, probe)?.coefficients)
            .map(|(l, c)| l * c)
            .collect(),
    );
    let sau = family_apply(basis, mu, mu, t, &au)?;
    let commute_a_residual = asu
        .coefficients
        .iter()
        .zip(&sau.coefficients)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);

    let st_stau = family_apply(basis, mu, mu, t, &family_apply(basis, mu, mu, tau, probe)?)?;
    let stau_st = family_apply(basis, mu, mu, tau, &family_apply(basis, mu, mu, t, probe)?)?;
    let commutativity_residual = st_stau
        .coefficients
        .iter()
        .zip(&stau_st.coefficients)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);

    Ok(FamilyReport {
        c1_s_mu,
        c1_s_mu1,
        commute_a_residual,
        commutativity_residual,
        c2_s_mu,
        c2_s_mu1,
    })
}

/// Result of the (CDS) boundedness sweep.
#[derive(Debug, Clone)]
pub struct CdsReport {
    /// Smallest constant making the estimate hold over the sweep.
    pub c1: f64,
    pub holds: bool,
}

/// Fit a single constant for Eq. (CDS):
/// ||u(t)||_{V_gamma} <= C (t^{-beta}||u0||_{V_gamma} + t^{-beta}||u1|| + t^{mu-1-1/p}||f||_p).
pub fn estimate_cds_check(problem: &ForwardProblem) -> Result<CdsReport> {
    let sol = solve_forward(problem)?;
    let gamma = problem.gamma();
    let beta = problem.order.beta();
    let mu = problem.order.mu();
    let u0_g = crate::spectral::v_gamma_norm(&problem.basis, &problem.u0, gamma)?;
    let u1_l2 = l2(&problem.u1);
    let f_lp = problem
        .control
        .as_ref()
        .map(|f| f.lp_norm(&problem.basis, problem.p))
        .unwrap_or(0.0);
    let mut c1 = 0.0f64;
    for (j, &t) in problem.grid.nodes().iter().enumerate() {
        if t == 0.0 || Some(j) == sol.singular_node {
            continue;
        }
        let un = crate::spectral::v_gamma_norm(&problem.basis, &sol.field_at(j), gamma)?;
        let bound = t.powf(-beta) * u0_g + t.powf(-beta) * u1_l2
            + t.powf(mu - 1.0 - 1.0 / problem.p) * f_lp;
        if bound > 0.0 {
            c1 = c1.max(un / bound);
        }
    }
    Ok(CdsReport {
        c1,
        holds: c1.is_finite(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn single_mode(lambda: f64) -> SpectralBasis {
        SpectralBasis::new(
            vec![lambda],
            PI,
            std::sync::Arc::new(|_, x| (2.0 / PI).sqrt() * x.sin()),
        )
        .unwrap()
    }

    fn problem(mu: f64, nu: f64, lambda: f64, u0: f64, u1: f64, horizon: f64, m: usize) -> ForwardProblem {
        ForwardProblem {
            order: FractionalOrder::new(mu, nu).unwrap(),
            basis: single_mode(lambda),
            grid: TimeGrid::uniform(horizon, m).unwrap(),
            u0: Field::new(vec![u0]),
            u1: Field::new(vec![u1]),
            control: None,
            gamma_choice: GammaChoice::OverMu,
            p: 100.0,
        }
    }

    #[test]
    fn wave_limit_is_cosine() {
        // mu=2, nu=0.3: beta=0 and E_{2,1}(-t^2) = cos t.
        let p = problem(2.0, 0.3, 1.0, 1.0, 0.0, PI, 64);
        let sol = solve_forward(&p).unwrap();
        assert!(sol.singular_node.is_none());
        for (j, &t) in p.grid.nodes().iter().enumerate() {
            assert!((sol.value(0, j) - t.cos()).abs() < 1e-12, "t={t}");
        }
        let half = PI / 2.0;
        let v = homogeneous(2.0, 0.0, 1.0, 1.0, 0.0, half).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn generic_point_matches_weak_sol_formula() {
        let p = problem(1.5, 0.5, 1.0, 1.0, 0.0, 1.0, 10);
        let sol = solve_forward(&p).unwrap();
        // beta = 0.25: u(1) = 1^{-0.25} E_{1.5,0.75}(-1)
        let want = mlf(1.5, 0.75, -1.0).unwrap();
        let j = p.grid.nodes().len() - 1;
        assert!((sol.value(0, j) - want).abs() < 1e-13);
        assert_eq!(sol.singular_node, Some(0));
        assert!(sol.value(0, 0).is_nan());
    }

    #[test]
    fn unit_forcing_gives_one_minus_cosine() {
        // mu=2, lambda=1, f_1 = 1: u_1(t) = int_0^t sin(t-tau) dtau = 1 - cos t.
        let basis = single_mode(1.0);
        let grid = TimeGrid::uniform(2.0, 32).unwrap();
        let omega = OmegaRegion::new(vec![(0.0, PI)]).unwrap();
        let sg = SpaceGrid::uniform(PI, 800).unwrap();
        // coefficient 1 on phi_1 over the whole domain: modal forcing f_1 = 1
        let f = ControlField::new(omega, sg, 2.0, 4, 1, vec![1.0; 4]).unwrap();
        let p = ForwardProblem {
            order: FractionalOrder::new(2.0, 0.0).unwrap(),
            basis,
            grid: grid.clone(),
            u0: Field::zeros(1),
            u1: Field::zeros(1),
            control: Some(f),
            gamma_choice: GammaChoice::OverMu,
            p: 100.0,
        };
        let sol = solve_forward(&p).unwrap();
        for (j, &t) in grid.nodes().iter().enumerate() {
            assert!(
                (sol.value(0, j) - (1.0 - t.cos())).abs() < 1e-7,
                "t={t}: {} vs {}",
                sol.value(0, j),
                1.0 - t.cos()
            );
        }
    }

    #[test]
    fn memory_state_limits_and_wave_case() {
        // t -> 0 recovers the data.
        let mut p = problem(1.5, 0.5, 2.0, 0.7, -0.3, 1.0, 8);
        // the u0 contamination in mem_rate decays like t^{mu-1} = t^{0.5}
        let ms = memory_state_at(&p, 1e-20).unwrap();
        assert!((ms.mem.coefficients[0] - 0.7).abs() < 1e-8);
        assert!((ms.mem_rate.coefficients[0] + 0.3).abs() < 1e-8);
        // mu=2: mem = u(T), mem_rate = u'(T); T=pi, u0=1 -> (-1, 0).
        p = problem(2.0, 0.5, 1.0, 1.0, 0.0, PI, 8);
        let sol = solve_forward(&p).unwrap();
        let ms = memory_state(&p, &sol).unwrap();
        assert!((ms.mem.coefficients[0] + 1.0).abs() < 1e-12);
        assert!(ms.mem_rate.coefficients[0].abs() < 1e-12);
    }

    #[test]
    fn generic_memory_state_matches_mode_formulas() {
        let p = problem(1.5, 0.5, 2.0, 0.4, 0.9, 1.0, 8);
        let sol = solve_forward(&p).unwrap();
        let ms = memory_state(&p, &sol).unwrap();
        let arg = -2.0;
        let mem = 0.4 * mlf(1.5, 1.0, arg).unwrap() + 0.9 * mlf(1.5, 2.0, arg).unwrap();
        let rate = -0.4 * 2.0 * mlf(1.5, 1.5, arg).unwrap() + 0.9 * mlf(1.5, 1.0, arg).unwrap();
        assert!((ms.mem.coefficients[0] - mem).abs() < 1e-14);
        assert!((ms.mem_rate.coefficients[0] - rate).abs() < 1e-14);
    }

    #[test]
    fn alt_representation_wave_case_exact() {
        let p = problem(2.0, 0.7, 1.0, 1.0, 0.5, 2.0, 32);
        let a = solve_forward(&p).unwrap();
        let b = solve_forward_alt(&p).unwrap();
        for j in 0..p.grid.len() {
            assert!((a.value(0, j) - b.value(0, j)).abs() < 1e-14);
        }
    }

    #[test]
    fn alt_representation_converges_to_weak_sol() {
        let mut errs = Vec::new();
        for m in [64usize, 128, 256] {
            let p = problem(1.5, 1.0, 1.0, 1.0, 0.4, 1.0, m);
            let a = solve_forward(&p).unwrap();
            let b = solve_forward_alt(&p).unwrap();
            let mut worst = 0.0f64;
            for j in 1..p.grid.len() {
                worst = worst.max((a.value(0, j) - b.value(0, j)).abs());
            }
            errs.push(worst);
        }
        // the singular cells are integrated exactly, so the agreement sits
        // far below the 1e-4 contract and does not degrade under refinement
        assert!(errs[2] < 1e-7, "errs = {errs:?}");
        assert!(errs[2] <= errs[0] * 1.5, "errs = {errs:?}");
    }

    #[test]
    fn alt_zero_data_is_zero() {
        let p = problem(1.5, 0.5, 1.0, 0.0, 0.0, 1.0, 16);
        let b = solve_forward_alt(&p).unwrap();
        assert!(b.traces[0].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mode_decoupling() {
        let basis = SpectralBasis::builtin_dirichlet_laplacian(PI, 4).unwrap();
        let p = ForwardProblem {
            order: FractionalOrder::new(1.5, 1.0).unwrap(),
            basis,
            grid: TimeGrid::uniform(1.0, 8).unwrap(),
            u0: Field::unit(4, 2),
            u1: Field::zeros(4),
            control: None,
            gamma_choice: GammaChoice::Half,
            p: 100.0,
        };
        let sol = solve_forward(&p).unwrap();
        for n in [0usize, 1, 3] {
            assert!(sol.traces[n].iter().all(|&v| v == 0.0));
        }
        assert!(sol.traces[2].iter().any(|&v| v != 0.0));
    }

    #[test]
    fn family_properties_report() {
        let basis = SpectralBasis::builtin_dirichlet_laplacian(PI, 32).unwrap();
        let order = FractionalOrder::new(1.5, 0.5).unwrap();
        let probe = Field::new((0..32).map(|i| ((i * 37 + 11) % 19) as f64 / 19.0 - 0.4).collect());
        let r = family_properties(&basis, order, 0.7, 1.3, &probe).unwrap();
        assert!(r.commutativity_residual <= 1e-12);
        assert!(r.commute_a_residual <= 1e-9 * 1024.0);
        assert!(r.c1_s_mu.is_finite() && r.c1_s_mu > 0.0);
        assert!(r.c2_s_mu.is_finite() && r.c2_s_mu1.is_finite());
    }

    #[test]
    fn cds_constant_is_finite() {
        let p = problem(1.5, 0.5, 3.0, 1.0, 0.5, 1.0, 64);
        let r = estimate_cds_check(&p).unwrap();
        assert!(r.holds && r.c1 > 0.0 && r.c1 < 1e3);
    }

    #[test]
    fn invariant_p_exponent_enforced() {
        let mut p = problem(1.25, 0.5, 1.0, 1.0, 0.0, 1.0, 8);
        p.p = 2.0; // needs p > 4 for gamma = 1/mu
        assert!(p.validate().is_err());
        p.gamma_choice = GammaChoice::Half;
        assert!(p.validate().is_ok()); // needs only p > 1.6
    }
}
