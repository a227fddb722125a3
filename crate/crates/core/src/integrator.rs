//! Dormand–Prince 5(4) with FSAL and cubic Hermite dense output.

use crate::error::{Error, Result};

// Butcher tableau.
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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// Fifth- minus fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

pub const MIN_TOL: f64 = 1e-13;
pub const MAX_TOL: f64 = 1e-3;

/// How the local error estimate is scaled before comparing it with 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorControl<const N: usize> {
    /// Every component is measured against `rtol * ||y||_inf`. Scale-free,
    /// so orbits of radius `1e-13` are resolved as well as orbits of radius 1.
    NormRelative(f64),
    /// Component-wise `atol_i + rtol * |y_i|`.
    Mixed { rtol: f64, atol: [f64; N] },
}

pub fn check_tolerance(tol: f64) -> Result<()> {
    if (MIN_TOL..=MAX_TOL).contains(&tol) {
        Ok(())
    } else {
        Err(Error::Domain(format!("tolerance {tol:e} outside [{MIN_TOL:e}, {MAX_TOL:e}]")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evals: usize,
    /// Largest accepted normalized error estimate.
    pub max_error: f64,
}

/// One accepted step with the data for Hermite interpolation.
#[derive(Debug, Clone, Copy)]
pub struct Span<const N: usize> {
    pub t0: f64,
    pub y0: [f64; N],
    pub f0: [f64; N],
    pub t1: f64,
    pub y1: [f64; N],
    pub f1: [f64; N],
}

impl<const N: usize> Span<N> {
    pub fn h(&self) -> f64 {
        self.t1 - self.t0
    }

    /// Cubic Hermite interpolant at `t` in `[t0, t1]`.
    pub fn interpolate(&self, t: f64) -> [f64; N] {
        let h = self.h();
        let s = (t - self.t0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        std::array::from_fn(|i| {
            h00 * self.y0[i] + h10 * h * self.f0[i] + h01 * self.y1[i] + h11 * h * self.f1[i]
        })
    }
}

pub struct Dopri5<const N: usize, F> {
    f: F,
    t: f64,
    y: [f64; N],
    dy: [f64; N],
    h: f64,
    h_max: f64,
    control: ErrorControl<N>,
    stats: Stats,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

fn inf_norm<const N: usize>(y: &[f64; N]) -> f64 {
    y.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

impl<const N: usize, F> Dopri5<N, F>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    pub fn new(f: F, t0: f64, y0: [f64; N], control: ErrorControl<N>) -> Self {
        let dy = f(t0, &y0);
        let mut me = Self {
            f,
            t: t0,
            y: y0,
            dy,
            h: 0.0,
            h_max: f64::INFINITY,
            control,
            stats: Stats { evals: 1, ..Stats::default() },
        };
        me.h = me.initial_step();
        me
    }

    fn initial_step(&self) -> f64 {
        let scale = self.scale(&self.y, &self.y);
        let d0 = (0..N).map(|i| (self.y[i] / scale[i]).powi(2)).sum::<f64>().sqrt();
        let d1 = (0..N).map(|i| (self.dy[i] / scale[i]).powi(2)).sum::<f64>().sqrt();
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h.min(self.h_max).max(f64::MIN_POSITIVE)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> [f64; N] {
        self.y
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    pub fn set_h_max(&mut self, h_max: f64) {
        self.h_max = h_max;
    }

    /// Cap the next step so it lands no later than `t_end`.
    pub fn limit_to(&mut self, t_end: f64) {
        self.h_max = self.h_max.min(t_end - self.t);
    }

    fn scale(&self, y: &[f64; N], y_new: &[f64; N]) -> [f64; N] {
        match self.control {
            ErrorControl::NormRelative(rtol) => {
                let s = (rtol * inf_norm(y).max(inf_norm(y_new))).max(f64::MIN_POSITIVE);
                [s; N]
            }
            ErrorControl::Mixed { rtol, atol } => std::array::from_fn(|i| {
                (atol[i] + rtol * y[i].abs().max(y_new[i].abs())).max(f64::MIN_POSITIVE)
            }),
        }
    }

    /// One uncontrolled step of size `h` from `(t, y)` with `f(t, y) = dy`.
    /// Returns the fifth-order solution, the error vector and the new slope.
    pub fn raw_step(&self, t: f64, y: &[f64; N], dy: &[f64; N], h: f64) -> ([f64; N], [f64; N], [f64; N]) {
        let f = &self.f;
        let k1 = *dy;
        let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + C5 * h,
            &axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &axpy(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y5 = axpy(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(t + h, &y5);
        let err: [f64; N] = std::array::from_fn(|i| {
            h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        });
        (y5, err, k7)
    }

    /// Advance by one accepted step.
    pub fn step(&mut self) -> Result<Span<N>> {
        let mut h = self.h.min(self.h_max);
        loop {
            if !(h > 0.0) || self.t + h == self.t {
                return Err(Error::StepFailure { t: self.t, h });
            }
            let (y_new, err, dy_new) = self.raw_step(self.t, &self.y, &self.dy, h);
            self.stats.evals += 6;
            let scale = self.scale(&self.y, &y_new);
            let e = ((0..N).map(|i| (err[i] / scale[i]).powi(2)).sum::<f64>() / N as f64).sqrt();
            if !e.is_finite() {
                self.stats.rejected += 1;
                h *= MIN_FACTOR;
                continue;
            }
            if e <= 1.0 {
                let span = Span { t0: self.t, y0: self.y, f0: self.dy, t1: self.t + h, y1: y_new, f1: dy_new };
                self.t += h;
                self.y = y_new;
                self.dy = dy_new;
                self.stats.accepted += 1;
                self.stats.max_error = self.stats.max_error.max(e);
                let factor = if e == 0.0 { MAX_FACTOR } else { (SAFETY * e.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR) };
                self.h = h * factor;
                return Ok(span);
            }
            self.stats.rejected += 1;
            h *= (SAFETY * e.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
        }
    }

    /// State at `t_start + dt` reached by one uncontrolled step from the start of `span`.
    /// `dt` must not exceed the span length, so the error stays below the accepted one.
    pub fn resolve_within(&self, span: &Span<N>, dt: f64) -> [f64; N] {
        if dt == 0.0 {
            return span.y0;
        }
        self.raw_step(span.t0, &span.y0, &span.f0, dt).0
    }

    pub fn eval_field(&self, t: f64, y: &[f64; N]) -> [f64; N] {
        (self.f)(t, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(_t: f64, y: &[f64; 2]) -> [f64; 2] {
        [y[1], -y[0]]
    }

    #[test]
    fn harmonic_oscillator_full_period() {
        let mut solver = Dopri5::new(harmonic, 0.0, [1.0, 0.0], ErrorControl::NormRelative(1e-11));
        let t_end = std::f64::consts::TAU;
        while solver.t() < t_end {
            solver.limit_to(t_end);
            solver.step().unwrap();
        }
        let y = solver.y();
        assert!((y[0] - 1.0).abs() < 1e-9 && y[1].abs() < 1e-9, "{y:?}");
    }

    #[test]
    fn error_shrinks_with_tolerance() {
        let run = |tol: f64| {
            let mut s = Dopri5::new(harmonic, 0.0, [1.0, 0.0], ErrorControl::NormRelative(tol));
            while s.t() < 10.0 {
                s.limit_to(10.0);
                s.step().unwrap();
            }
            ((s.y()[0] - 10f64.cos()).powi(2) + (s.y()[1] + 10f64.sin()).powi(2)).sqrt()
        };
        assert!(run(1e-10) < run(1e-6));
        assert!(run(1e-6) < run(1e-3));
    }

    #[test]
    fn scale_free_at_tiny_amplitude() {
        let amp = 1e-13;
        let mut s = Dopri5::new(harmonic, 0.0, [amp, 0.0], ErrorControl::NormRelative(1e-10));
        while s.t() < 3.0 {
            s.limit_to(3.0);
            s.step().unwrap();
        }
        assert!((s.y()[0] / amp - 3f64.cos()).abs() < 1e-8);
    }

    #[test]
    fn hermite_interpolant_matches_endpoints_and_midpoint() {
        let mut s = Dopri5::new(harmonic, 0.0, [1.0, 0.0], ErrorControl::NormRelative(1e-10));
        let span = s.step().unwrap();
        assert_eq!(span.interpolate(span.t0), span.y0);
        let end = span.interpolate(span.t1);
        assert!((end[0] - span.y1[0]).abs() < 1e-15);
        let mid = 0.5 * (span.t0 + span.t1);
        let v = span.interpolate(mid);
        assert!((v[0] - mid.cos()).abs() < 1e-9);
        let exact = s.resolve_within(&span, mid - span.t0);
        assert!((exact[0] - mid.cos()).abs() < 1e-12);
    }

    #[test]
    fn mixed_control_resolves_small_component() {
        // u' = -1 crossing a band of half-width 1e-16 next to an O(1) component.
        let f = |_t: f64, y: &[f64; 2]| [y[1], -1.0];
        let alpha = 1e-16;
        let mut s = Dopri5::new(
            f,
            0.0,
            [0.5, alpha],
            ErrorControl::Mixed { rtol: 1e-10, atol: [1e-10, 1e-10 * alpha] },
        );
        let span = s.step().unwrap();
        assert!(span.h() < 1e-14);
    }

    #[test]
    fn tolerance_range() {
        assert!(check_tolerance(1e-10).is_ok());
        assert!(check_tolerance(1e-14).is_err());
        assert!(check_tolerance(1e-2).is_err());
    }
}
