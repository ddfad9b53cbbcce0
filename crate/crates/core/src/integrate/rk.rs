//! Explicit Runge–Kutta steppers: classical RK4 and Dormand–Prince 5(4).

use alloc::vec;
use alloc::vec::Vec;

use super::Method;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus the embedded fourth-order ones
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub(crate) struct Workspace {
    k: [Vec<f64>; 7],
    y: Vec<f64>,
    pub(crate) err: Vec<f64>,
}

impl Workspace {
    pub(crate) fn new(n: usize) -> Self {
        Workspace { k: core::array::from_fn(|_| vec![0.0; n]), y: vec![0.0; n], err: vec![0.0; n] }
    }

    pub(crate) fn rk4<E2, F>(&mut self, f: &mut F, t: f64, x: &[f64], h: f64, out: &mut [f64]) -> Result<(), E2>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), E2>,
    {
        let [k1, k2, k3, k4, ..] = &mut self.k;
        let y = &mut self.y;
        f(t, x, k1)?;
        for i in 0..x.len() {
            y[i] = x[i] + 0.5 * h * k1[i];
        }
        f(t + 0.5 * h, y, k2)?;
        for i in 0..x.len() {
            y[i] = x[i] + 0.5 * h * k2[i];
        }
        f(t + 0.5 * h, y, k3)?;
        for i in 0..x.len() {
            y[i] = x[i] + h * k3[i];
        }
        f(t + h, y, k4)?;
        for i in 0..x.len() {
            out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        Ok(())
    }

    /// One Dormand–Prince step; leaves the local error estimate in `self.err`.
    pub(crate) fn dopri<E2, F>(&mut self, f: &mut F, t: f64, x: &[f64], h: f64, out: &mut [f64]) -> Result<(), E2>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), E2>,
    {
        let n = x.len();
        f(t, x, &mut self.k[0])?;
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += A[s][j] * self.k[j][i];
                }
                self.y[i] = x[i] + h * acc;
            }
            f(t + C[s] * h, &self.y, &mut self.k[s])?;
        }
        // stage 7 was evaluated at the fifth-order solution
        out.copy_from_slice(&self.y);
        for i in 0..n {
            let mut e = 0.0;
            for s in 0..7 {
                e += E[s] * self.k[s][i];
            }
            self.err[i] = h * e;
        }
        Ok(())
    }

    /// Single step of size `h` with the configured scheme.
    pub(crate) fn step<E2, F>(&mut self, method: Method, f: &mut F, t: f64, x: &[f64], h: f64, out: &mut [f64]) -> Result<(), E2>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), E2>,
    {
        match method {
            Method::Rk4Fixed => self.rk4(f, t, x, h, out),
            Method::Rk45Adaptive => self.dopri(f, t, x, h, out),
        }
    }
}

/// Scaled RMS norm of the last Dormand–Prince error estimate.
pub(crate) fn error_norm(x: &[f64], xn: &[f64], err: &[f64], rel: f64, abs: f64) -> f64 {
    let n = x.len() as f64;
    let s: f64 = x
        .iter()
        .zip(xn)
        .zip(err)
        .map(|((a, b), e)| {
            let sc = abs + rel * a.abs().max(b.abs());
            (e / sc) * (e / sc)
        })
        .sum();
    libm::sqrt(s / n)
}

/// Step-size update factor from a scaled error norm.
pub(crate) fn step_factor(err: f64) -> f64 {
    if err == 0.0 {
        5.0
    } else {
        (0.9 * libm::pow(err, -0.2)).clamp(0.2, 5.0)
    }
}
