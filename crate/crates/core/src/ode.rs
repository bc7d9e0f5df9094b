//! Dormand–Prince 5(4) with step-size control, and a fixed RK4 step.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct OdeTolerances {
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
}

impl Default for OdeTolerances {
    fn default() -> Self {
        OdeTolerances {
            atol: 1e-10,
            rtol: 1e-9,
            max_steps: 100_000,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn axpy_many(y: &[f64], h: f64, coeffs: &[f64], ks: &[Vec<f64>]) -> Vec<f64> {
    let mut out = y.to_vec();
    for (c, k) in coeffs.iter().zip(ks) {
        if *c != 0.0 {
            for (o, v) in out.iter_mut().zip(k) {
                *o += h * c * v;
            }
        }
    }
    out
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
pub fn dopri5<F>(
    mut f: F,
    t0: f64,
    t1: f64,
    y0: &[f64],
    tol: OdeTolerances,
) -> Result<(Vec<f64>, OdeStats)>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let mut stats = OdeStats::default();
    let span = t1 - t0;
    if span == 0.0 {
        return Ok((y0.to_vec(), stats));
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = dir * (span.abs() * 0.01).min(0.05);
    let mut k1 = f(t, &y)?;
    while (t1 - t) * dir > 0.0 {
        if stats.accepted + stats.rejected >= tol.max_steps {
            return Err(Error::Integration(format!("step limit reached at t = {t}")));
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let mut ks = vec![k1.clone()];
        for s in 1..7 {
            let ys = axpy_many(&y, h, &A[s][..s], &ks);
            ks.push(f(t + C[s] * h, &ys)?);
        }
        let y5 = axpy_many(&y, h, &B5, &ks);
        let y4 = axpy_many(&y, h, &B4, &ks);
        let err = y5
            .iter()
            .zip(&y4)
            .zip(&y)
            .map(|((a, b), c)| {
                let sc = tol.atol + tol.rtol * a.abs().max(c.abs());
                ((a - b) / sc).powi(2)
            })
            .sum::<f64>()
            / y.len().max(1) as f64;
        let err = err.sqrt();
        if !err.is_finite() {
            return Err(Error::Integration(format!("non-finite state at t = {t}")));
        }
        if err <= 1.0 {
            t += h;
            y = y5;
            k1 = ks.swap_remove(6);
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h.abs() < 1e-14 * span.abs() {
            return Err(Error::Integration(format!("step size underflow at t = {t}")));
        }
    }
    Ok((y, stats))
}

/// One classical Runge–Kutta step of size `h`.
pub fn rk4_step<F>(mut f: F, t: f64, y: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + h / 2.0, &axpy_many(y, h / 2.0, &[1.0], &[k1.clone()]))?;
    let k3 = f(t + h / 2.0, &axpy_many(y, h / 2.0, &[1.0], &[k2.clone()]))?;
    let k4 = f(t + h, &axpy_many(y, h, &[1.0], &[k3.clone()]))?;
    Ok(axpy_many(y, h / 6.0, &[1.0, 2.0, 2.0, 1.0], &[k1, k2, k3, k4]))
}
