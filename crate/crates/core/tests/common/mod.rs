//! Extended-precision Mittag-Leffler oracle used by the integration tests.
//!
//! Sums the defining series in MPFR arithmetic with working precision scaled
//! to the peak term magnitude (~ alpha * |z|^{1/alpha} nats), so the
//! catastrophic cancellation on the deep negative axis is absorbed by extra
//! bits rather than clever algebra. Slow by design; never part of the
//! library's hot path.

#![allow(dead_code)]

use rug::ops::Pow;
use rug::Float;

/// Reference value of E_{alpha,beta}(z) accurate to well below 1e-25.
pub fn ml_oracle(alpha: f64, beta: f64, z: f64) -> f64 {
    assert!(alpha > 0.0 && alpha.is_finite() && beta.is_finite() && z.is_finite());
    let x = z.abs();
    let peak_nats = if x > 1.0 {
        alpha * x.powf(1.0 / alpha)
    } else {
        0.0
    };
    let prec = ((1.5 * peak_nats) as u32).saturating_add(256).min(60_000);

    if let Some((p, q)) = rational_alpha(alpha) {
        if beta > 0.0 {
            return series_rational(p, q, beta, z, prec);
        }
    }
    series_generic(alpha, beta, z, prec)
}

/// Smallest q <= 100 with alpha ~= p/q; the test parameter grids are rational.
fn rational_alpha(alpha: f64) -> Option<(i64, i64)> {
    for q in 1..=100i64 {
        let pa = alpha * q as f64;
        if (pa - pa.round()).abs() < 1e-11 && pa.round() >= 1.0 {
            return Some((pa.round() as i64, q));
        }
    }
    None
}

/// Pochhammer-chain summation: for alpha = p/q the ratio
/// t_{k+q}/t_k = z^q / prod_{i=0}^{p-1}(alpha k + beta + i)
/// needs only q gamma evaluations as seeds.
fn series_rational(p: i64, q: i64, beta: f64, z: f64, prec: u32) -> f64 {
    let alpha_f = Float::with_val(prec, p) / q;
    let beta_f = Float::with_val(prec, beta);
    let zf = Float::with_val(prec, z);
    let zq = Float::with_val(prec, zf.clone().pow(q as u32));

    let qs = q as usize;
    let mut chain: Vec<Float> = Vec::with_capacity(qs);
    let mut a_of: Vec<Float> = Vec::with_capacity(qs); // alpha*k + beta for the chain head
    for k in 0..qs {
        let a = alpha_f.clone() * k as i64 + beta_f.clone();
        let g = a.clone().gamma();
        let t = Float::with_val(prec, zf.clone().pow(k as u32)) / g;
        chain.push(t);
        a_of.push(a);
    }

    let mut sum = Float::new(prec);
    let tiny = Float::with_val(prec, 2.0).pow(-(prec as i64 - 16));
    let mut rounds_past_peak = 0u32;
    let mut last_max = Float::with_val(prec, f64::INFINITY);
    for _round in 0..200_000 {
        let mut round_max = Float::new(prec);
        for j in 0..qs {
            sum += &chain[j];
            let t_abs = Float::with_val(prec, chain[j].clone().abs());
            if t_abs > round_max {
                round_max = t_abs;
            }
            // advance chain j by q steps
            let mut denom = Float::with_val(prec, 1);
            for i in 0..p {
                denom *= a_of[j].clone() + i;
            }
            chain[j] = chain[j].clone() * &zq / denom;
            a_of[j] += p; // alpha * q = p
        }
        let threshold = tiny.clone() * (Float::with_val(prec, 1) + sum.clone().abs());
        if round_max < last_max {
            rounds_past_peak += 1;
        } else {
            rounds_past_peak = 0;
        }
        if rounds_past_peak >= 2 && round_max < threshold {
            return sum.to_f64();
        }
        last_max = round_max;
    }
    panic!("ml_oracle did not converge (alpha={p}/{q}, beta={beta}, z={z})");
}

/// Fallback: one gamma per term, skipping gamma poles.
fn series_generic(alpha: f64, beta: f64, z: f64, prec: u32) -> f64 {
    let alpha_f = Float::with_val(prec, alpha);
    let beta_f = Float::with_val(prec, beta);
    let zf = Float::with_val(prec, z);
    let mut sum = Float::new(prec);
    let tiny = Float::with_val(prec, 2.0).pow(-(prec as i64 - 16));
    let mut decreasing = 0u32;
    let mut last = Float::with_val(prec, f64::INFINITY);
    let mut zk = Float::with_val(prec, 1);
    for k in 0..100_000u32 {
        let a = alpha_f.clone() * k + beta_f.clone();
        let a64 = a.to_f64();
        let near_pole = a64 < 0.5 && (a64 - a64.round()).abs() < 1e-12;
        if !near_pole {
            let term = zk.clone() / a.gamma();
            sum += &term;
            let t_abs = term.abs();
            if t_abs < last {
                decreasing += 1;
            } else {
                decreasing = 0;
            }
            let threshold = tiny.clone() * (Float::with_val(prec, 1) + sum.clone().abs());
            if decreasing >= 4 && k > 3 && t_abs < threshold {
                return sum.to_f64();
            }
            last = t_abs;
        }
        zk *= &zf;
    }
    panic!("ml_oracle (generic) did not converge (alpha={alpha}, beta={beta}, z={z})");
}
