//! Dormand–Prince 5(4) embedded pair with cubic Hermite dense output.
//! Fields are autonomous, so only the stage weights appear.

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Result of one trial step.
#[derive(Debug, Clone)]
pub(crate) struct Step {
    pub x: Vec<f64>,
    /// Derivative at the new point (first stage of the next step).
    pub f: Vec<f64>,
    /// Weighted RMS error estimate; accept when `<= 1`.
    pub error: f64,
}

pub(crate) struct Stepper {
    n: usize,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
}

impl Stepper {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
        }
    }

    /// One step of size `h` from `x` with derivative `f0 = field(x)`.
    pub fn step<E, F>(
        &mut self,
        field: &mut F,
        x: &[f64],
        f0: &[f64],
        h: f64,
        rtol: f64,
        atol: f64,
    ) -> Result<Step, E>
    where
        F: FnMut(&[f64], &mut [f64]) -> Result<(), E>,
    {
        let n = self.n;
        self.k[0].copy_from_slice(f0);
        let rows: [&[f64]; 6] = [
            &[A21],
            &[A31, A32],
            &[A41, A42, A43],
            &[A51, A52, A53, A54],
            &[A61, A62, A63, A64, A65],
            &[A71, 0.0, A73, A74, A75, A76],
        ];
        for (s, row) in rows.iter().enumerate() {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, a) in row.iter().enumerate() {
                    acc += a * self.k[j][i];
                }
                self.tmp[i] = x[i] + h * acc;
            }
            let (_, rest) = self.k.split_at_mut(s + 1);
            field(&self.tmp, &mut rest[0])?;
        }
        // the last stage point is the fifth-order solution
        let x_new = self.tmp.clone();
        let mut sum = 0.0;
        for i in 0..n {
            let e = h
                * (E1 * self.k[0][i]
                    + E3 * self.k[2][i]
                    + E4 * self.k[3][i]
                    + E5 * self.k[4][i]
                    + E6 * self.k[5][i]
                    + E7 * self.k[6][i]);
            let sc = atol + rtol * x[i].abs().max(x_new[i].abs());
            sum += (e / sc).powi(2);
        }
        Ok(Step {
            x: x_new,
            f: self.k[6].clone(),
            error: (sum / n as f64).sqrt(),
        })
    }
}

/// Starting step size heuristic (Hairer, Nørsett & Wanner, II.4).
pub(crate) fn initial_step<E, F>(
    field: &mut F,
    x: &[f64],
    f0: &[f64],
    rtol: f64,
    atol: f64,
    max_step: f64,
) -> Result<f64, E>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<(), E>,
{
    let n = x.len() as f64;
    let scaled = |v: &[f64], reference: &[f64]| {
        (v.iter()
            .zip(reference)
            .map(|(a, r)| (a / (atol + rtol * r.abs())).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
    };
    let d0 = scaled(x, x);
    let d1 = scaled(f0, x);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(max_step);
    let x1: Vec<f64> = x.iter().zip(f0).map(|(a, b)| a + h0 * b).collect();
    let mut f1 = vec![0.0; x.len()];
    field(&x1, &mut f1)?;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = scaled(&diff, x) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    Ok((100.0 * h0).min(h1).min(max_step))
}

/// Cubic Hermite interpolation on `[t0, t0 + h]` from end states and derivatives.
pub(crate) fn hermite(
    x0: &[f64],
    f0: &[f64],
    x1: &[f64],
    f1: &[f64],
    h: f64,
    s: f64,
    out: &mut [f64],
) {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    for i in 0..out.len() {
        out[i] = h00 * x0[i] + h10 * h * f0[i] + h01 * x1[i] + h11 * h * f1[i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(x: &[f64], out: &mut [f64]) -> Result<(), ()> {
        out[0] = -x[0];
        Ok(())
    }

    #[test]
    fn fifth_order_on_exponential_decay() {
        let mut st = Stepper::new(1);
        let err = |h: f64| {
            let mut st2 = Stepper::new(1);
            let s = st2.step(&mut decay, &[1.0], &[-1.0], h, 1e-6, 1e-6).unwrap();
            (s.x[0] - (-h).exp()).abs()
        };
        // local error ~ h^6
        let ratio = err(0.2) / err(0.1);
        assert!(ratio > 40.0 && ratio < 90.0, "ratio {ratio}");
        let s = st.step(&mut decay, &[1.0], &[-1.0], 0.1, 1e-6, 1e-6).unwrap();
        assert!((s.f[0] + s.x[0]).abs() < 1e-15);
    }

    #[test]
    fn hermite_reproduces_cubics() {
        // x(t) = t^3 on [1, 2]
        let mut out = [0.0];
        hermite(&[1.0], &[3.0], &[8.0], &[12.0], 1.0, 0.5, &mut out);
        assert!((out[0] - 1.5f64.powi(3)).abs() < 1e-14);
    }
}
