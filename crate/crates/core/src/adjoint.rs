//! Backward dual system: the right-Hilfer problem of order (mu, 1-nu) run
//! from final data (v0, v1), solved by its closed spectral representation.
//!
//! With s = T - t and q = nu(mu-2) each mode is
//!   v_n(t) = v0_n s^q E_{mu,q+1}(-l s^mu) + v1_n s^{q+1} E_{mu,q+2}(-l s^mu),
//! which mirrors the forward formula under time reversal.

use crate::error::{Error, Result};
use crate::forward::ModalField;
use crate::fracops::{FractionalOrder, TimeGrid};
use crate::mlf::mlf;
use crate::spectral::{Field, OmegaRegion, SpaceGrid, SpectralBasis};
use rayon::prelude::*;

/// Data of the adjoint problem (ACP-Dual). `order` is the forward pair
/// (mu, nu); the right-Hilfer order (mu, 1-nu) is applied internally.
#[derive(Debug, Clone)]
pub struct AdjointProblem {
    pub order: FractionalOrder,
    pub basis: SpectralBasis,
    pub grid: TimeGrid,
    pub v0: Field,
    pub v1: Field,
}

impl AdjointProblem {
    pub fn validate(&self) -> Result<()> {
        if self.v0.len() != self.basis.n_modes() || self.v1.len() != self.basis.n_modes() {
            return Err(Error::invalid("v0/v1", "coefficient length must match the basis"));
        }
        Ok(())
    }

    /// Exponent q = nu(mu-2) <= 0 of the final-time layer.
    pub fn q(&self) -> f64 {
        -self.order.nu_gap()
    }
}

/// Solve (ACP-Dual) by the (Dual-sol-spec) representation.
///
/// When q < 0 and v0 != 0 the node t_M = T is flagged singular and holds NaN.
pub fn solve_adjoint(problem: &AdjointProblem) -> Result<ModalField> {
    problem.validate()?;
    let mu = problem.order.mu();
    let q = problem.q();
    let horizon = problem.grid.horizon();
    let nodes = problem.grid.nodes().to_vec();
    let last = nodes.len() - 1;
    let singular = q < 0.0 && problem.v0.coefficients.iter().any(|&c| c != 0.0);

    let traces: Result<Vec<Vec<f64>>> = (0..problem.basis.n_modes())
        .into_par_iter()
        .map(|n| {
            let lambda = problem.basis.eigenvalues()[n];
            let (v0, v1) = (problem.v0.coefficients[n], problem.v1.coefficients[n]);
            let mut trace = Vec::with_capacity(nodes.len());
            for &t in &nodes {
                let s = horizon - t;
                if s == 0.0 {
                    trace.push(if singular {
                        f64::NAN
                    } else if q == 0.0 {
                        v0
                    } else {
                        0.0
                    });
                    continue;
                }
                let arg = -lambda * s.powf(mu);
                let mut v = 0.0;
                if v0 != 0.0 {
                    v += v0 * s.powf(q) * mlf(mu, q + 1.0, arg)?;
                }
                if v1 != 0.0 {
                    v += v1 * s.powf(q + 1.0) * mlf(mu, q + 2.0, arg)?;
                }
                trace.push(v);
            }
            Ok(trace)
        })
        .collect();

    Ok(ModalField {
        grid: problem.grid.clone(),
        traces: traces?,
        singular_node: if singular { Some(last) } else { None },
    })
}

/// The two final-condition traces of Theorem 2.17, by the closed (V1)/(V2)
/// mode formulas (never by discrete fractional calculus on the trace):
///   (I_{t,T}^{nu(2-mu)} v)(t)   = v0 E_{mu,1}(-l s^mu) + v1 s E_{mu,2}(-l s^mu)
///   (D_{t,T}^{1-nu(2-mu)} v)(t) = -v0 l s^{mu-1} E_{mu,mu}(-l s^mu) + v1 E_{mu,1}(-l s^mu)
/// with s = T - t; at t = T they equal (v0, v1) exactly.
pub fn adjoint_final_conditions(
    problem: &AdjointProblem,
    solution: &ModalField,
) -> Result<(ModalField, ModalField)> {
    problem.validate()?;
    let mu = problem.order.mu();
    let horizon = solution.grid.horizon();
    let nodes = solution.grid.nodes().to_vec();

    let pairs: Result<Vec<(Vec<f64>, Vec<f64>)>> = (0..problem.basis.n_modes())
        .into_par_iter()
        .map(|n| {
            let lambda = problem.basis.eigenvalues()[n];
            let (v0, v1) = (problem.v0.coefficients[n], problem.v1.coefficients[n]);
            let mut iv = Vec::with_capacity(nodes.len());
            let mut dv = Vec::with_capacity(nodes.len());
            for &t in &nodes {
                let s = horizon - t;
                if s == 0.0 {
                    iv.push(v0);
                    dv.push(v1);
                    continue;
                }
                let arg = -lambda * s.powf(mu);
                let e1 = mlf(mu, 1.0, arg)?;
                iv.push(v0 * e1 + v1 * s * mlf(mu, 2.0, arg)?);
                dv.push(-v0 * lambda * s.powf(mu - 1.0) * mlf(mu, mu, arg)? + v1 * e1);
            }
            Ok((iv, dv))
        })
        .collect();
    let pairs = pairs?;

    let make = |pick: fn(&(Vec<f64>, Vec<f64>)) -> Vec<f64>| ModalField {
        grid: solution.grid.clone(),
        traces: pairs.iter().map(pick).collect(),
        singular_node: None,
    };
    Ok((make(|p| p.0.clone()), make(|p| p.1.clone())))
}

/// Space-time samples of v on the grid, zeroed outside omega: rows are time
/// nodes, columns space nodes. Quadrature against `omega.weights_on` gives
/// integrals over omega.
pub fn restrict_to_omega(
    basis: &SpectralBasis,
    solution: &ModalField,
    omega: &OmegaRegion,
    space_grid: &SpaceGrid,
) -> Vec<Vec<f64>> {
    let inside: Vec<bool> = space_grid.nodes.iter().map(|&x| omega.contains(x)).collect();
    (0..solution.grid.len())
        .map(|j| {
            space_grid
                .nodes
                .iter()
                .zip(&inside)
                .map(|(&x, &inc)| {
                    if !inc {
                        return 0.0;
                    }
                    (0..solution.n_modes())
                        .map(|n| solution.value(n, j) * basis.phi(n, x))
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// Fitted constants for the (norm-V) and (254) estimates.
#[derive(Debug, Clone)]
pub struct AdjointNormReport {
    /// smallest C with ||v(t)||^2_{V_gamma} <= C (T-t)^{2 nu(mu-2)} (||v0||^2_{V_gamma} + ||v1||^2)
    pub c_state: f64,
    /// smallest C with ||D_{t,T}^{1-nu(2-mu)} v(t)||^2 <= C (||v0||^2_{V_gamma} + ||v1||^2)
    pub c_rate: f64,
    pub holds: bool,
}

/// Sweep the grid and fit the two norm constants.
pub fn adjoint_norm_checks(problem: &AdjointProblem, gamma: f64) -> Result<AdjointNormReport> {
    let sol = solve_adjoint(problem)?;
    let (_, dv) = adjoint_final_conditions(problem, &sol)?;
    let q = problem.q();
    let horizon = problem.grid.horizon();
    let data = crate::spectral::v_gamma_norm(&problem.basis, &problem.v0, gamma)?.powi(2)
        + problem.v1.coefficients.iter().map(|c| c * c).sum::<f64>();
    if data == 0.0 {
        return Ok(AdjointNormReport {
            c_state: 0.0,
            c_rate: 0.0,
            holds: true,
        });
    }
    let mut c_state = 0.0f64;
    let mut c_rate = 0.0f64;
    for (j, &t) in problem.grid.nodes().iter().enumerate() {
        if Some(j) == sol.singular_node || t == horizon {
            continue;
        }
        let s = horizon - t;
        let vn = crate::spectral::v_gamma_norm(&problem.basis, &sol.field_at(j), gamma)?;
        c_state = c_state.max(vn * vn / (s.powf(2.0 * q) * data));
        let rn: f64 = dv.field_at(j).coefficients.iter().map(|c| c * c).sum();
        c_rate = c_rate.max(rn / data);
    }
    Ok(AdjointNormReport {
        c_state,
        c_rate,
        holds: c_state.is_finite() && c_rate.is_finite(),
    })
}
