//! Discrete fractional operators on a time grid.
//!
//! Left/right Riemann-Liouville integrals are product-integration rules: the
//! data is piecewise linear between nodes and the kernel moments
//! int (t-s)^{alpha-1} ds are integrated exactly per subinterval, giving
//! second order for smooth data. Derivative compositions (Hilfer left/right)
//! differentiate the already-smoothed integrals, never raw data.

use crate::error::{Error, Result};
use crate::mlf::recip_gamma;

/// The Hilfer order pair (mu, nu) with its derived exponents.
///
/// Throughout: beta = (1-nu)(2-mu), nu_gap = nu(2-mu), both in [0,1), and
/// beta + nu_gap = 2 - mu.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrder {
    mu: f64,
    nu: f64,
}

impl FractionalOrder {
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        if !(mu > 1.0 && mu <= 2.0) {
            return Err(Error::invalid("mu", format!("need 1 < mu <= 2, got {mu}")));
        }
        if !(0.0..=1.0).contains(&nu) {
            return Err(Error::invalid("nu", format!("need 0 <= nu <= 1, got {nu}")));
        }
        Ok(FractionalOrder { mu, nu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// (1-nu)(2-mu), the forward solution's t -> 0 blow-up exponent.
    pub fn beta(&self) -> f64 {
        (1.0 - self.nu) * (2.0 - self.mu)
    }

    /// nu(2-mu), the outer integral order in the left Hilfer derivative.
    pub fn nu_gap(&self) -> f64 {
        self.nu * (2.0 - self.mu)
    }

    /// gamma = 1/mu, the smaller admissible fractional-power exponent.
    pub fn gamma_mu(&self) -> f64 {
        1.0 / self.mu
    }

    pub fn gamma_half(&self) -> f64 {
        0.5
    }

    /// The order pair (mu, 1-nu) of the adjoint system.
    pub fn dual(&self) -> FractionalOrder {
        FractionalOrder {
            mu: self.mu,
            nu: 1.0 - self.nu,
        }
    }
}

/// Strictly increasing sample times 0 = t_0 < ... < t_M = T.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

impl TimeGrid {
    pub fn uniform(horizon: f64, cells: usize) -> Result<Self> {
        Self::check_inputs(horizon, cells)?;
        let nodes = (0..=cells)
            .map(|j| horizon * j as f64 / cells as f64)
            .collect();
        Ok(TimeGrid { nodes })
    }

    /// Graded toward t = 0: t_j = T (j/M)^r, resolving t^{-beta} layers.
    pub fn graded(horizon: f64, cells: usize, grading: f64) -> Result<Self> {
        Self::check_inputs(horizon, cells)?;
        if !(grading >= 1.0) {
            return Err(Error::invalid("grading", format!("need r >= 1, got {grading}")));
        }
        let nodes = (0..=cells)
            .map(|j| horizon * (j as f64 / cells as f64).powf(grading))
            .collect();
        Ok(TimeGrid { nodes })
    }

    /// Graded toward t = T, for adjoint quantities singular at the endpoint.
    pub fn graded_toward_end(horizon: f64, cells: usize, grading: f64) -> Result<Self> {
        let start = Self::graded(horizon, cells, grading)?;
        let mut nodes: Vec<f64> = start.nodes.iter().rev().map(|t| horizon - t).collect();
        nodes[0] = 0.0;
        let last = nodes.len() - 1;
        nodes[last] = horizon;
        Ok(TimeGrid { nodes })
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes[0] != 0.0 {
            return Err(Error::invalid("nodes", "need t_0 = 0 and at least two nodes"));
        }
        if !nodes.windows(2).all(|w| w[1] > w[0] && w[1].is_finite()) {
            return Err(Error::invalid("nodes", "must be strictly increasing and finite"));
        }
        Ok(TimeGrid { nodes })
    }

    fn check_inputs(horizon: f64, cells: usize) -> Result<()> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::invalid("horizon", format!("need T > 0, got {horizon}")));
        }
        if cells == 0 {
            return Err(Error::invalid("cells", "need at least one cell"));
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn horizon(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Number of nodes (cells + 1).
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Real-valued time trace bound to its grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(
                "values",
                format!("length {} != node count {}", values.len(), grid.len()),
            ));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn sample<F: Fn(f64) -> f64>(grid: TimeGrid, f: F) -> Self {
        let values = grid.nodes.iter().map(|&t| f(t)).collect();
        GridFunction { grid, values }
    }

    /// Linear interpolation inside the grid, constant extrapolation outside.
    pub fn interp(&self, t: f64) -> f64 {
        let nodes = &self.grid.nodes;
        if t <= nodes[0] {
            return self.values[0];
        }
        if t >= *nodes.last().unwrap() {
            return *self.values.last().unwrap();
        }
        let i = nodes.partition_point(|&x| x <= t) - 1;
        let w = (t - nodes[i]) / (nodes[i + 1] - nodes[i]);
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    /// Trapezoid quadrature of the trace over [0, T].
    pub fn trapezoid(&self) -> f64 {
        let n = &self.grid.nodes;
        let v = &self.values;
        let mut acc = 0.0;
        for i in 0..n.len() - 1 {
            acc += 0.5 * (n[i + 1] - n[i]) * (v[i] + v[i + 1]);
        }
        acc
    }
}

fn check_alpha_nonneg(alpha: f64) -> Result<()> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::invalid("alpha", format!("need alpha >= 0, got {alpha}")));
    }
    Ok(())
}

/// Left Riemann-Liouville integral (I_t^alpha g)(t_j) at every node.
///
/// alpha = 0 is the identity by convention.
pub fn frac_integral_left(alpha: f64, g: &GridFunction) -> Result<GridFunction> {
    check_alpha_nonneg(alpha)?;
    if alpha == 0.0 {
        return Ok(g.clone());
    }
    let nodes = g.grid.nodes();
    let n = nodes.len();
    let rg = recip_gamma(alpha);
    let mut out = vec![0.0; n];
    for j in 1..n {
        let tj = nodes[j];
        let mut acc = 0.0;
        for i in 0..j {
            let h = nodes[i + 1] - nodes[i];
            let dg = (g.values[i + 1] - g.values[i]) / h;
            let tau2 = tj - nodes[i];
            let tau1 = tj - nodes[i + 1];
            // g(s) = g_i + dg*(d - tau) with tau = t_j - s, d = tau2.
            let m0 = (tau2.powf(alpha) - tau1.powf(alpha)) / alpha;
            let m1 = (tau2.powf(alpha + 1.0) - tau1.powf(alpha + 1.0)) / (alpha + 1.0);
            acc += (g.values[i] + dg * tau2) * m0 - dg * m1;
        }
        out[j] = acc * rg;
    }
    GridFunction::new(g.grid.clone(), out)
}

/// Right Riemann-Liouville integral (I_{t,T}^alpha g)(t_j) at every node.
pub fn frac_integral_right(alpha: f64, g: &GridFunction) -> Result<GridFunction> {
    check_alpha_nonneg(alpha)?;
    if alpha == 0.0 {
        return Ok(g.clone());
    }
    let nodes = g.grid.nodes();
    let n = nodes.len();
    let rg = recip_gamma(alpha);
    let mut out = vec![0.0; n];
    for j in 0..n - 1 {
        let tj = nodes[j];
        let mut acc = 0.0;
        for i in j..n - 1 {
            let h = nodes[i + 1] - nodes[i];
            let dg = (g.values[i + 1] - g.values[i]) / h;
            let s1 = nodes[i] - tj;
            let s2 = nodes[i + 1] - tj;
            // g(s) = g_i + dg*(sigma - s1) with sigma = s - t_j.
            let m0 = (s2.powf(alpha) - s1.powf(alpha)) / alpha;
            let m1 = (s2.powf(alpha + 1.0) - s1.powf(alpha + 1.0)) / (alpha + 1.0);
            acc += (g.values[i] - dg * s1) * m0 + dg * m1;
        }
        out[j] = acc * rg;
    }
    GridFunction::new(g.grid.clone(), out)
}

/// First derivative on a (possibly nonuniform) grid: three-point stencils,
/// one-sided at the ends; exact for quadratics.
pub fn differentiate(g: &GridFunction) -> GridFunction {
    let t = g.grid.nodes();
    let v = &g.values;
    let n = t.len();
    let mut out = vec![0.0; n];
    let d3 = |i0: usize, i1: usize, i2: usize, at: f64| -> f64 {
        // derivative of the quadratic through (t_{i0},v_{i0}),... at `at`
        let d01 = (v[i1] - v[i0]) / (t[i1] - t[i0]);
        let d12 = (v[i2] - v[i1]) / (t[i2] - t[i1]);
        let d012 = (d12 - d01) / (t[i2] - t[i0]);
        d01 + d012 * (2.0 * at - t[i0] - t[i1])
    };
    out[0] = d3(0, 1, 2, t[0]);
    out[n - 1] = d3(n - 3, n - 2, n - 1, t[n - 1]);
    for i in 1..n - 1 {
        out[i] = d3(i - 1, i, i + 1, t[i]);
    }
    GridFunction {
        grid: g.grid.clone(),
        values: out,
    }
}

/// Second derivative: 2x the second divided difference of the local triple.
pub fn second_derivative(g: &GridFunction) -> GridFunction {
    let t = g.grid.nodes();
    let v = &g.values;
    let n = t.len();
    let mut out = vec![0.0; n];
    let dd2 = |i0: usize, i1: usize, i2: usize| -> f64 {
        let d01 = (v[i1] - v[i0]) / (t[i1] - t[i0]);
        let d12 = (v[i2] - v[i1]) / (t[i2] - t[i1]);
        2.0 * (d12 - d01) / (t[i2] - t[i0])
    };
    out[0] = dd2(0, 1, 2);
    out[n - 1] = dd2(n - 3, n - 2, n - 1);
    for i in 1..n - 1 {
        out[i] = dd2(i - 1, i, i + 1);
    }
    GridFunction {
        grid: g.grid.clone(),
        values: out,
    }
}

/// Right RL derivative D_{t,T}^alpha g = -(d/dt) I_{t,T}^{1-alpha} g,
/// 0 < alpha <= 1; alpha = 1 is the classical -d/dt.
pub fn rl_derivative_right(alpha: f64, g: &GridFunction) -> Result<GridFunction> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid("alpha", format!("need 0 < alpha <= 1, got {alpha}")));
    }
    let smoothed = if alpha == 1.0 {
        g.clone()
    } else {
        frac_integral_right(1.0 - alpha, g)?
    };
    let mut d = differentiate(&smoothed);
    for v in &mut d.values {
        *v = -*v;
    }
    Ok(d)
}

/// Left Hilfer derivative D_t^{mu,nu} g = I^{nu(2-mu)} d^2/dt^2 I^{(1-nu)(2-mu)} g.
pub fn hilfer_derivative_left(order: FractionalOrder, g: &GridFunction) -> Result<GridFunction> {
    let inner = frac_integral_left(order.beta(), g)?;
    let d2 = second_derivative(&inner);
    frac_integral_left(order.nu_gap(), &d2)
}

/// Right Hilfer derivative per (D-R):
/// D_{t,T}^{mu,nu} g = -I_{t,T}^{nu(2-mu)} d^2/dt^2 I_{t,T}^{(1-nu)(2-mu)} g.
///
/// Callers working with the adjoint pass `order.dual()` so this sees
/// nu-tilde = 1 - nu directly.
pub fn hilfer_derivative_right(order: FractionalOrder, g: &GridFunction) -> Result<GridFunction> {
    let inner = frac_integral_right(order.beta(), g)?;
    let d2 = second_derivative(&inner);
    let mut out = frac_integral_right(order.nu_gap(), &d2)?;
    for v in &mut out.values {
        *v = -*v;
    }
    Ok(out)
}

/// Convolution (f * g)(t_j) = int_0^{t_j} f(t_j - s) g(s) ds by trapezoid on
/// the grid nodes, with f linearly interpolated at t_j - s.
pub fn convolve(f: &GridFunction, g: &GridFunction) -> GridFunction {
    let nodes = g.grid.nodes();
    let n = nodes.len();
    let mut out = vec![0.0; n];
    for j in 1..n {
        let tj = nodes[j];
        let mut acc = 0.0;
        for i in 0..j {
            // Simpson per cell: exact for the product of the two piecewise
            // linear interpolants when cells align (uniform grids).
            let a = f.interp(tj - nodes[i]) * g.values[i];
            let m = nodes[i] + 0.5 * (nodes[i + 1] - nodes[i]);
            let fm = f.interp(tj - m) * g.interp(m);
            let b = f.interp(tj - nodes[i + 1]) * g.values[i + 1];
            acc += (nodes[i + 1] - nodes[i]) / 6.0 * (a + 4.0 * fm + b);
        }
        out[j] = acc;
    }
    GridFunction {
        grid: g.grid.clone(),
        values: out,
    }
}

/// Max-norm of ((I^alpha f) * g) - (f * (I^alpha g)) on the grid (Con-Int).
pub fn convolution_commute_residual(alpha: f64, f: &GridFunction, g: &GridFunction) -> Result<f64> {
    let lhs = convolve(&frac_integral_left(alpha, f)?, g);
    let rhs = convolve(f, &frac_integral_left(alpha, g)?);
    Ok(lhs
        .values
        .iter()
        .zip(rhs.values.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Residual of the (IPF) identity:
/// |int phi I_t^alpha psi - int psi I_{t,T}^alpha phi|.
pub fn ipf_residual(alpha: f64, phi: &GridFunction, psi: &GridFunction) -> Result<f64> {
    let left = frac_integral_left(alpha, psi)?;
    let right = frac_integral_right(alpha, phi)?;
    let a = GridFunction::new(
        phi.grid.clone(),
        phi.values.iter().zip(&left.values).map(|(p, l)| p * l).collect(),
    )?
    .trapezoid();
    let b = GridFunction::new(
        psi.grid.clone(),
        psi.values.iter().zip(&right.values).map(|(p, r)| p * r).collect(),
    )?
    .trapezoid();
    Ok((a - b).abs())
}

/// Residual of the full integration-by-parts identity (IP01).
///
/// The boundary bracket follows the paper's proof:
/// [ I_t^{(1-nu)(2-mu)}u * D_{t,T}^{1-nu(2-mu)}v
///   + (d/dt I_t^{(1-nu)(2-mu)}u) * I_{t,T}^{nu(2-mu)}v ]_0^T.
/// (The stated equation swaps the left/right integral subscripts; the proof's
/// classical-integration-by-parts steps force this placement.)
pub fn ibp_residual(order: FractionalOrder, u: &GridFunction, v: &GridFunction) -> Result<f64> {
    let n = u.grid.len();
    if v.grid != u.grid {
        return Err(Error::invalid("v", "u and v must share a grid"));
    }
    let lhs = {
        let du = hilfer_derivative_left(order, u)?;
        GridFunction::new(
            u.grid.clone(),
            v.values.iter().zip(&du.values).map(|(a, b)| a * b).collect(),
        )?
        .trapezoid()
    };
    let rhs_int = {
        // The identity needs the proof's sign convention for the right
        // Hilfer derivative, which is the negative of the (D-R) display
        // that `hilfer_derivative_right` implements.
        let dv = hilfer_derivative_right(order.dual(), v)?;
        -GridFunction::new(
            u.grid.clone(),
            u.values.iter().zip(&dv.values).map(|(a, b)| a * b).collect(),
        )?
        .trapezoid()
    };
    let iu = frac_integral_left(order.beta(), u)?;
    let diu = differentiate(&iu);
    let dv_right = rl_derivative_right(1.0 - order.nu_gap(), v)?;
    let iv_right = frac_integral_right(order.nu_gap(), v)?;
    let bracket = |i: usize| -> f64 {
        iu.values[i] * dv_right.values[i] + diu.values[i] * iv_right.values[i]
    };
    let rhs = rhs_int + bracket(n - 1) - bracket(0);
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    fn uni(m: usize) -> TimeGrid {
        TimeGrid::uniform(1.0, m).unwrap()
    }

    #[test]
    fn order_invariants() {
        let o = FractionalOrder::new(1.5, 0.5).unwrap();
        assert!((o.beta() + o.nu_gap() - (2.0 - o.mu())).abs() < 1e-15);
        let o2 = FractionalOrder::new(2.0, 0.3).unwrap();
        assert_eq!(o2.beta(), 0.0);
        assert_eq!(o2.nu_gap(), 0.0);
        assert!(FractionalOrder::new(1.0, 0.5).is_err());
        assert!(FractionalOrder::new(1.5, 1.5).is_err());
    }

    #[test]
    fn grids() {
        let g = TimeGrid::graded(2.0, 8, 2.0).unwrap();
        assert_eq!(g.nodes()[0], 0.0);
        assert!((g.horizon() - 2.0).abs() < 1e-15);
        assert!((g.nodes()[4] - 2.0 * 0.25).abs() < 1e-15);
        let e = TimeGrid::graded_toward_end(1.0, 8, 3.0).unwrap();
        assert_eq!(e.nodes()[0], 0.0);
        assert_eq!(e.horizon(), 1.0);
        // clustered near T: last cell much smaller than first
        let n = e.nodes();
        assert!(n[8] - n[7] < 0.1 * (n[1] - n[0]));
    }

    #[test]
    fn left_integral_power_laws() {
        // I^{0.5} 1 = t^{0.5}/Gamma(1.5)
        let g = GridFunction::sample(uni(256), |_| 1.0);
        let out = frac_integral_left(0.5, &g).unwrap();
        let expect = 1.0 / gamma(1.5);
        assert!((out.values[256] - expect).abs() < 2e-3);
        // alpha=1: integral of t is t^2/2
        let g = GridFunction::sample(TimeGrid::uniform(2.0, 64).unwrap(), |t| t);
        let out = frac_integral_left(1.0, &g).unwrap();
        assert!((out.values[64] - 2.0).abs() < 1e-12, "{}", out.values[64]);
        // alpha=0 identity
        let out = frac_integral_left(0.0, &g).unwrap();
        assert_eq!(out.values, g.values);
        assert!(frac_integral_left(-0.5, &g).is_err());
    }

    #[test]
    fn left_integral_power_law_grading_helps() {
        // I^{0.75} t^{0.5} = Gamma(1.5)/Gamma(2.25) t^{1.25}
        let expect = gamma(1.5) / gamma(2.25);
        let plain = {
            let g = GridFunction::sample(uni(128), |t| t.sqrt());
            (frac_integral_left(0.75, &g).unwrap().values[128] - expect).abs()
        };
        let graded = {
            let tg = TimeGrid::graded(1.0, 128, 2.0).unwrap();
            let g = GridFunction::sample(tg, |t| t.sqrt());
            (frac_integral_left(0.75, &g).unwrap().values[128] - expect).abs()
        };
        assert!(graded < plain, "graded {graded} vs plain {plain}");
        assert!(graded < 1e-5);
    }

    #[test]
    fn right_integral_mirrors_left() {
        // I_{t,T}^1 1 = T - t
        let g = GridFunction::sample(uni(32), |_| 1.0);
        let out = frac_integral_right(1.0, &g).unwrap();
        for (j, &t) in g.grid.nodes().iter().enumerate() {
            assert!((out.values[j] - (1.0 - t)).abs() < 1e-12);
        }
        // I_{t,T}^{0.5} 1 at t=0 equals I^{0.5}1 at t=T by symmetry
        let out = frac_integral_right(0.5, &GridFunction::sample(uni(256), |_| 1.0)).unwrap();
        assert!((out.values[0] - 1.0 / gamma(1.5)).abs() < 2e-3);
        // I_{t,T}^{0.3} (T-s)^{0.2} = Gamma(1.2)/Gamma(1.5) (T-t)^{0.5}
        let g = GridFunction::sample(uni(512), |t| (1.0 - t).powf(0.2));
        let out = frac_integral_right(0.3, &g).unwrap();
        let expect = gamma(1.2) / gamma(1.5) * 1.0f64.powf(0.5);
        assert!((out.values[0] - expect).abs() < 2e-3);
    }

    #[test]
    fn semigroup_property_refines() {
        let mut errs = Vec::new();
        for m in [64usize, 128, 256] {
            let g = GridFunction::sample(uni(m), |t| t * t + 1.0);
            let two_step =
                frac_integral_left(0.7, &frac_integral_left(0.6, &g).unwrap()).unwrap();
            let one_step = frac_integral_left(1.3, &g).unwrap();
            let err = two_step
                .values
                .iter()
                .zip(&one_step.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            errs.push(err);
        }
        assert!(errs[2] < errs[0]);
        let rate = (errs[0] / errs[2]).log2() / 2.0;
        assert!(rate > 1.2, "semigroup convergence rate {rate}");
    }

    #[test]
    fn right_rl_derivative() {
        // D^1 (T-t) = 1
        let g = GridFunction::sample(uni(32), |t| 1.0 - t);
        let out = rl_derivative_right(1.0, &g).unwrap();
        for v in &out.values {
            assert!((v - 1.0).abs() < 1e-12);
        }
        // D^{0.5} (T-s)^{0.5} = Gamma(1.5) (constant in t)
        let g = GridFunction::sample(uni(512), |t| (1.0 - t).sqrt());
        let out = rl_derivative_right(0.5, &g).unwrap();
        let expect = gamma(1.5);
        // interior nodes away from the endpoint kink
        for j in 5..400 {
            assert!(
                (out.values[j] - expect).abs() < 2e-2,
                "j={j}: {} vs {expect}",
                out.values[j]
            );
        }
        assert!((rl_derivative_right(0.5, &GridFunction::sample(uni(8), |_| 0.0))
            .unwrap()
            .values[3])
            .abs()
            < 1e-14);
        assert!(rl_derivative_right(1.5, &g).is_err());
    }

    #[test]
    fn hilfer_left_reduces_to_second_derivative_at_mu2() {
        let o = FractionalOrder::new(2.0, 0.4).unwrap();
        let g = GridFunction::sample(uni(64), |t| t * t);
        let out = hilfer_derivative_left(o, &g).unwrap();
        for v in &out.values {
            assert!((v - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn hilfer_left_caputo_power_kernel() {
        // nu=1 (Caputo): D^{mu} t^{1.5}/Gamma(2.5) = 1 for mu=1.5
        let o = FractionalOrder::new(1.5, 1.0).unwrap();
        let tg = TimeGrid::graded(1.0, 1024, 3.0).unwrap();
        let g = GridFunction::sample(tg, |t| t.powf(1.5) / gamma(2.5));
        let out = hilfer_derivative_left(o, &g).unwrap();
        for j in 200..1000 {
            assert!(
                (out.values[j] - 1.0).abs() < 2e-2,
                "j={j}: {}",
                out.values[j]
            );
        }
    }

    #[test]
    fn hilfer_right_sign_convention() {
        let o = FractionalOrder::new(2.0, 0.5).unwrap();
        let g = GridFunction::sample(uni(64), |t| (1.0 - t) * (1.0 - t));
        let out = hilfer_derivative_right(o, &g).unwrap();
        for v in &out.values {
            assert!((v + 2.0).abs() < 1e-10, "{v}");
        }
    }

    #[test]
    fn convolution_commutes() {
        let f = GridFunction::sample(uni(128), |_| 1.0);
        let g = GridFunction::sample(uni(128), |_| 1.0);
        assert!(convolution_commute_residual(0.5, &f, &g).unwrap() < 5e-3);
        // alpha=1, f=t, g=1: I^1 f is quadratic, so its piecewise-linear
        // carrier leaves an O(h^2) footprint; tight but not exact.
        let f = GridFunction::sample(uni(128), |t| t);
        assert!(convolution_commute_residual(1.0, &f, &g).unwrap() < 1e-4);
        // refinement study with nontrivial data
        let mut errs = Vec::new();
        for m in [64usize, 128, 256] {
            let f = GridFunction::sample(uni(m), |t| (2.0 * t).sin() + 0.3);
            let g = GridFunction::sample(uni(m), |t| t * t - 0.5 * t + 0.1);
            errs.push(convolution_commute_residual(0.7, &f, &g).unwrap());
        }
        let rate = (errs[0] / errs[2]).log2() / 2.0;
        assert!(rate >= 1.5, "commute rate {rate}, errs {errs:?}");
    }

    #[test]
    fn ipf_identity_flat_data() {
        // phi = psi = 1, alpha = 0.5: both sides T^{1.5}/Gamma(2.5)
        let phi = GridFunction::sample(uni(512), |_| 1.0);
        let psi = phi.clone();
        let r = ipf_residual(0.5, &phi, &psi).unwrap();
        assert!(r < 1e-4, "{r}");
        let left = frac_integral_left(0.5, &psi).unwrap();
        let val = GridFunction::new(
            phi.grid.clone(),
            phi.values
                .iter()
                .zip(&left.values)
                .map(|(a, b)| a * b)
                .collect(),
        )
        .unwrap()
        .trapezoid();
        assert!((val - 1.0 / gamma(2.5)).abs() < 1e-3, "{val}");
    }

    #[test]
    fn ibp_residual_vanishes_under_refinement() {
        let o = FractionalOrder::new(1.5, 0.5).unwrap();
        let mut errs = Vec::new();
        for m in [64usize, 128, 256, 512] {
            let u = GridFunction::sample(uni(m), |t| t * t);
            let v = GridFunction::sample(uni(m), |t| (1.0 - t) * (1.0 - t));
            errs.push(ibp_residual(o, &u, &v).unwrap());
        }
        // Quadratic test data is reproduced exactly by the discrete
        // operators, so the residual sits at the noise floor already.
        assert!(errs[3] < errs[0].max(1e-10), "{errs:?}");
        // Non-polynomial data, still compatible (u flat at 0, v flat at T so
        // no singular layer forms): residual is genuinely nonzero and shrinks.
        let mut errs = Vec::new();
        for m in [64usize, 128, 256, 512] {
            let u = GridFunction::sample(uni(m), |t| t * t * (1.0 + 0.5 * (3.0 * t).sin()));
            let v = GridFunction::sample(uni(m), |t| {
                (1.0 - t) * (1.0 - t) * (1.0 + 0.3 * (2.0 * t).cos())
            });
            errs.push(ibp_residual(o, &u, &v).unwrap());
        }
        assert!(errs[0] > 1e-12, "identity should not be discretely exact: {errs:?}");
        assert!(errs[3] < errs[0], "{errs:?}");
        assert!(errs[3] < 1e-3, "{errs:?}");
        // zero data gives exactly zero
        let z = GridFunction::sample(uni(32), |_| 0.0);
        let u = GridFunction::sample(uni(32), |t| t * t);
        assert_eq!(ibp_residual(o, &u, &z).unwrap(), 0.0);
    }
}
