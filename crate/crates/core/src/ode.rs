//! Dormand-Prince 5(4) integrator with continuous (dense) output.
//!
//! Only what the radial problems in this crate need: fixed-size states,
//! forward integration, and a step-by-step interface so callers can watch
//! for sign changes.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

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

// Fifth minus fourth order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense output coefficients (Hairer, Norsett & Wanner).
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step with its continuous extension.
#[derive(Debug, Clone)]
pub struct Segment<const N: usize> {
    pub t0: f64,
    pub h: f64,
    coeffs: [[f64; N]; 5],
}

impl<const N: usize> Segment<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let c = &self.coeffs;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i])));
        }
        out
    }

    pub fn start(&self) -> [f64; N] {
        self.coeffs[0]
    }

    pub fn end(&self) -> [f64; N] {
        let mut out = [0.0; N];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.coeffs[0][i] + self.coeffs[1][i];
        }
        out
    }
}

/// Piecewise dense solution over `[t_start, t_end]`.
#[derive(Debug, Clone)]
pub struct DenseTrajectory<const N: usize> {
    segments: Vec<Segment<N>>,
}

impl<const N: usize> DenseTrajectory<N> {
    pub fn new(segments: Vec<Segment<N>>) -> Self {
        assert!(!segments.is_empty(), "trajectory needs at least one step");
        Self { segments }
    }

    pub fn t_start(&self) -> f64 {
        self.segments[0].t0
    }

    pub fn t_end(&self) -> f64 {
        self.segments.last().map(Segment::t1).unwrap_or(f64::NAN)
    }

    pub fn segments(&self) -> &[Segment<N>] {
        &self.segments
    }

    /// Evaluates the interpolant; `t` is clamped into the covered interval.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let idx = self
            .segments
            .partition_point(|s| s.t1() < t)
            .min(self.segments.len() - 1);
        self.segments[idx].eval(t)
    }

    /// Breakpoints `t_0 < t_1 < ... < t_end`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.segments.iter().map(|s| s.t0).collect();
        b.push(self.t_end());
        b
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
}

impl StepControl {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            h_init: 1e-3,
            h_max: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepSizeUnderflow;

/// Stateful stepper; each call to [`Dopri5::step`] performs one accepted step.
pub struct Dopri5<F, const N: usize>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    rhs: F,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    ctl: StepControl,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        if *c != 0.0 {
            for i in 0..N {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

impl<F, const N: usize> Dopri5<F, N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    pub fn new(rhs: F, t0: f64, y0: [f64; N], ctl: StepControl) -> Self {
        let k1 = rhs(t0, &y0);
        Self {
            rhs,
            t: t0,
            y: y0,
            k1,
            h: ctl.h_init,
            ctl,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> [f64; N] {
        self.y
    }

    /// Advances by one accepted step without passing `t_stop`.
    pub fn step(&mut self, t_stop: f64) -> Result<Segment<N>, StepSizeUnderflow> {
        loop {
            let mut h = self.h.min(self.ctl.h_max);
            let remaining = t_stop - self.t;
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            if h <= 1e-14 * self.t.abs().max(1.0) {
                return Err(StepSizeUnderflow);
            }
            let (seg, y_new, k7, err) = self.attempt(h);
            if err <= 1.0 {
                self.t = if last { t_stop } else { self.t + h };
                self.y = y_new;
                self.k1 = k7;
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                // Keep the proposed size when the step was clipped by t_stop.
                self.h = if last { self.h.max(h * fac) } else { h * fac };
                return Ok(seg);
            }
            self.h = h * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
    }

    /// One trial step of size `h`; also usable to land exactly on a point.
    pub fn attempt(&self, h: f64) -> (Segment<N>, [f64; N], [f64; N], f64) {
        let f = &self.rhs;
        let (t, y, k1) = (self.t, &self.y, &self.k1);
        let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
        let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
        let k4 = f(
            t + C4 * h,
            &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = f(
            t + C5 * h,
            &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &axpy(
                y,
                h,
                &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = axpy(
            y,
            h,
            &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let k7 = f(t + h, &y_new);

        let mut err_sq = 0.0;
        for i in 0..N {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.ctl.atol + self.ctl.rtol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / sc).powi(2);
        }
        let err = (err_sq / N as f64).sqrt();

        let mut coeffs = [[0.0; N]; 5];
        for i in 0..N {
            let dy = y_new[i] - y[i];
            let bspl = h * k1[i] - dy;
            coeffs[0][i] = y[i];
            coeffs[1][i] = dy;
            coeffs[2][i] = bspl;
            coeffs[3][i] = dy - h * k7[i] - bspl;
            coeffs[4][i] =
                h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        (Segment { t0: t, h, coeffs }, y_new, k7, err)
    }
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` and returns the dense solution.
pub fn integrate<F, const N: usize>(
    rhs: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    ctl: StepControl,
) -> Result<DenseTrajectory<N>, StepSizeUnderflow>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut stepper = Dopri5::new(rhs, t0, y0, ctl);
    let mut segments = Vec::new();
    while stepper.t() < t1 {
        segments.push(stepper.step(t1)?);
    }
    Ok(DenseTrajectory::new(segments))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth_end_and_dense() {
        let traj = integrate(
            |_, y: &[f64; 1]| [y[0]],
            0.0,
            [1.0],
            2.0,
            StepControl::with_tol(1e-12),
        )
        .unwrap();
        assert!((traj.eval(2.0)[0] - 2f64.exp()).abs() < 1e-10);
        // Dense output between breakpoints.
        for k in 0..50 {
            let t = 2.0 * k as f64 / 49.0;
            assert!((traj.eval(t)[0] - t.exp()).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn dense_output_is_fourth_order() {
        // y' = cos t on one step of size h: midpoint error should drop ~32x when h halves.
        let ctl = StepControl::with_tol(1.0);
        let err = |h: f64| {
            let s = Dopri5::new(|t, _: &[f64; 1]| [t.cos()], 0.0, [0.0], ctl);
            let (seg, ..) = s.attempt(h);
            (seg.eval(0.37 * h)[0] - (0.37 * h).sin()).abs()
        };
        let ratio = err(0.4) / err(0.2);
        assert!(ratio > 20.0, "ratio {ratio}");
    }

    #[test]
    fn harmonic_oscillator_period() {
        let traj = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [0.0, 1.0],
            10.0,
            StepControl::with_tol(1e-11),
        )
        .unwrap();
        for &t in &[0.5, 3.3, 7.77, 10.0] {
            let y = traj.eval(t);
            assert!((y[0] - f64::sin(t)).abs() < 1e-9);
            assert!((y[1] - f64::cos(t)).abs() < 1e-9);
        }
    }
}
