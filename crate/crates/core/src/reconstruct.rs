//! From a steady profile to the tangent field and the filament.
//!
//! The tangent is `T(t, s) = Rot(Omega t) T0(s - a t)`, with `T0` the inverse
//! stereographic image of `z0(s) = e^{is} (R + f(e^{is}))`. The filament is
//! `X(t, s) = Rot(Omega t) int_0^s T0(sigma - a t) dsigma + int_0^t Rot(Omega tau) V(-a tau) dtau`
//! with `V = T0 wedge T0_s`, normalized by `X(0, 0) = 0`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use crate::continuation::BranchPoint;
use crate::error::{Error, Result};
use crate::fourier::{fft_forward, periodic_derivative, wavenumber, FourierProfile};
use crate::operator::{Geometry, ProblemParams};

pub type Vec3 = [f64; 3];

/// Relative change at which the time quadrature stops doubling.
pub const TIME_QUAD_TOL: f64 = 1e-10;

const GAUSS_NODES: usize = 16;
const MAX_PANELS: usize = 1 << 14;
const TAIL_TOL: f64 = 1e-14;
const MAX_SAMPLES: usize = 1 << 18;

/// `a wedge b` with the third slot signed by the geometry.
pub fn wedge(a: Vec3, b: Vec3, geometry: Geometry) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], geometry.sign() * (a[0] * b[1] - a[1] * b[0])]
}

/// `T1^2 + T2^2 + s T3^2`; equals `s` on the unit sphere or the upper hyperboloid.
pub fn quadratic_form(v: Vec3, geometry: Geometry) -> f64 {
    v[0] * v[0] + v[1] * v[1] + geometry.sign() * v[2] * v[2]
}

pub fn tangent_from_z(z: Complex64, geometry: Geometry) -> Result<Vec3> {
    let s = geometry.sign();
    let m2 = z.norm_sqr();
    if geometry == Geometry::Hyperbolic && m2 >= 1.0 {
        return Err(Error::OutsideDisk { modulus: m2.sqrt() });
    }
    let d = 1.0 + s * m2;
    Ok([2.0 * z.re / d, 2.0 * z.im / d, (1.0 - s * m2) / d])
}

pub fn tangents_from_z(values: &[Complex64], geometry: Geometry) -> Result<Vec<Vec3>> {
    values.iter().map(|&z| tangent_from_z(z, geometry)).collect()
}

pub fn stereo_project(t: Vec3, geometry: Geometry) -> Result<Complex64> {
    let ok = match geometry {
        Geometry::Euclidean => t[2] > -1.0 + 1e-14,
        Geometry::Hyperbolic => t[2] > 0.0,
    };
    if !ok {
        return Err(Error::ProjectionSingular { tangent: t });
    }
    Ok(Complex64::new(t[0], t[1]) / (1.0 + t[2]))
}

/// Rotates the horizontal pair by `angle`, fixes the third component.
pub fn rotate_frame(v: Vec3, angle: f64) -> Vec3 {
    let (sin, cos) = angle.sin_cos();
    [cos * v[0] - sin * v[1], sin * v[0] + cos * v[1], v[2]]
}

/// A rotating-slipping solution `z(t, s) = e^{i Omega t} z0(s - a t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SteadyProfile {
    pub params: ProblemParams,
    pub f: FourierProfile,
}

impl SteadyProfile {
    pub fn new(params: ProblemParams, f: FourierProfile) -> Result<Self> {
        params.validate()?;
        if f.trunc() != params.trunc {
            return Err(Error::TruncationMismatch { profile: f.trunc(), params: params.trunc });
        }
        Ok(SteadyProfile { params, f })
    }

    /// The helix or circle `z0 = R e^{is}` with its trivial rate.
    pub fn trivial(geometry: Geometry, a: f64, r: f64) -> Result<Self> {
        let params = ProblemParams::new(geometry, a, r, 0.0, 1, 1)?;
        Ok(SteadyProfile { params, f: FourierProfile::zeros(1, 1) })
    }

    pub fn from_point(p: &BranchPoint) -> Self {
        SteadyProfile { params: p.params, f: p.f.clone() }
    }

    pub fn geometry(&self) -> Geometry {
        self.params.geometry
    }

    pub fn omega(&self) -> f64 {
        self.params.omega()
    }

    pub fn slip(&self) -> f64 {
        self.params.a
    }

    pub fn z0(&self, x: f64) -> Complex64 {
        let w = Complex64::from_polar(1.0, x);
        let mut acc = Complex64::new(self.params.r, 0.0);
        for (n, c) in self.f.modes().filter(|&(_, c)| c != 0.0) {
            acc += c * Complex64::from_polar(1.0, n as f64 * x);
        }
        w * acc
    }

    pub fn z0_s(&self, x: f64) -> Complex64 {
        let w = Complex64::from_polar(1.0, x);
        let mut acc = Complex64::new(self.params.r, 0.0);
        for (n, c) in self.f.modes().filter(|&(_, c)| c != 0.0) {
            acc += (n + 1) as f64 * c * Complex64::from_polar(1.0, n as f64 * x);
        }
        Complex64::i() * w * acc
    }

    /// `z(t, s)`.
    pub fn z(&self, t: f64, s: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.omega() * t) * self.z0(s - self.slip() * t)
    }

    pub fn tangent0(&self, x: f64) -> Result<Vec3> {
        tangent_from_z(self.z0(x), self.geometry())
    }

    /// Arclength derivative of `T0`, from the analytic `z0_s`.
    pub fn tangent0_s(&self, x: f64) -> Result<Vec3> {
        let sg = self.geometry().sign();
        let z = self.z0(x);
        let zs = self.z0_s(x);
        tangent_from_z(z, self.geometry())?;
        let d = 1.0 + sg * z.norm_sqr();
        let q = 2.0 * (z.conj() * zs).re;
        let h = 2.0 * zs / d - 2.0 * sg * q * z / (d * d);
        Ok([h.re, h.im, -2.0 * sg * q / (d * d)])
    }

    pub fn tangent(&self, t: f64, s: f64) -> Result<Vec3> {
        Ok(rotate_frame(self.tangent0(s - self.slip() * t)?, self.omega() * t))
    }

    /// `T0 wedge T0_s` at `x`.
    pub fn binormal_flux(&self, x: f64) -> Result<Vec3> {
        Ok(wedge(self.tangent0(x)?, self.tangent0_s(x)?, self.geometry()))
    }

    /// Default time step for the binormal residual.
    pub fn default_delta(&self) -> f64 {
        1e-3 / self.omega().abs().max(self.slip().abs()).max(1.0)
    }
}

/// Spectral antiderivative of the 2 pi periodic `T0`, split into mean slope and oscillation.
#[derive(Clone, Debug)]
pub struct TangentPrimitive {
    pub mean: Vec3,
    modes: Vec<(f64, [Complex64; 3])>,
}

impl TangentPrimitive {
    pub fn new(profile: &SteadyProfile) -> Result<Self> {
        let mut len = (16 * (profile.params.trunc + 1)).max(256).next_power_of_two();
        loop {
            let mut bufs =
                [vec![Complex64::default(); len], vec![Complex64::default(); len], vec![Complex64::default(); len]];
            for j in 0..len {
                let t = profile.tangent0(2.0 * PI * j as f64 / len as f64)?;
                for c in 0..3 {
                    bufs[c][j] = Complex64::new(t[c], 0.0);
                }
            }
            for b in bufs.iter_mut() {
                fft_forward(b);
                b.iter_mut().for_each(|v| *v /= len as f64);
            }
            let peak = bufs.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
            let tail = (len / 4..=len / 2).flat_map(|k| bufs.iter().map(move |b| b[k].norm())).fold(0.0, f64::max);
            if tail > TAIL_TOL * peak.max(1.0) {
                if len >= MAX_SAMPLES {
                    return Err(Error::ResolutionLoss { tail, tol: TAIL_TOL });
                }
                len *= 2;
                continue;
            }
            let mean = [bufs[0][0].re, bufs[1][0].re, bufs[2][0].re];
            let cutoff = 1e-17 * peak;
            let modes = (1..len)
                .filter(|&k| k != len / 2)
                .filter(|&k| bufs.iter().any(|b| b[k].norm() > cutoff))
                .map(|k| {
                    let kk = wavenumber(k, len) as f64;
                    let div = Complex64::new(0.0, kk);
                    (kk, [bufs[0][k] / div, bufs[1][k] / div, bufs[2][k] / div])
                })
                .collect();
            return Ok(TangentPrimitive { mean, modes });
        }
    }

    /// A fixed antiderivative `P` with `P' = T0`.
    pub fn eval(&self, x: f64) -> Vec3 {
        let mut out = [self.mean[0] * x, self.mean[1] * x, self.mean[2] * x];
        for (k, c) in &self.modes {
            let e = Complex64::from_polar(1.0, k * x);
            for i in 0..3 {
                out[i] += (c[i] * e).re;
            }
        }
        out
    }
}

/// `int_0^t Rot(Omega tau) V(-a tau) dtau` by composite Gauss-Legendre with panel doubling.
pub fn time_integral_quadrature(profile: &SteadyProfile, t: f64) -> Result<Vec3> {
    if t == 0.0 {
        return Ok([0.0; 3]);
    }
    let rule = GaussLegendre::new(NonZeroUsize::new(GAUSS_NODES).expect("nonzero"));
    let pairs = rule.as_node_weight_pairs();
    let (omega, a) = (profile.omega(), profile.slip());
    let integrate = |panels: usize| -> Result<Vec3> {
        let h = t / panels as f64;
        let mut acc = [0.0; 3];
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for &(x, w) in pairs {
                let tau = mid + 0.5 * h * x;
                let v = rotate_frame(profile.binormal_flux(-a * tau)?, omega * tau);
                for i in 0..3 {
                    acc[i] += 0.5 * h * w * v[i];
                }
            }
        }
        Ok(acc)
    };
    let mut panels = 1;
    let mut prev = integrate(panels)?;
    let mut change = f64::INFINITY;
    while panels < MAX_PANELS {
        panels *= 2;
        let next = integrate(panels)?;
        change = norm(sub(next, prev));
        if change <= TIME_QUAD_TOL * norm(next) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureFailure { tol: TIME_QUAD_TOL, change })
}

/// The same integral for `a = 0`, where the integrand is `Rot(Omega tau) W` with constant `W`.
pub fn time_integral_closed_form(profile: &SteadyProfile, t: f64) -> Result<Vec3> {
    if profile.slip() != 0.0 {
        return Err(Error::InvalidParameter("closed-form time integral needs zero slip".into()));
    }
    let omega = profile.omega();
    if omega == 0.0 {
        return Err(Error::InvalidParameter("closed-form time integral needs a nonzero rate".into()));
    }
    let w = profile.binormal_flux(0.0)?;
    let h = (Complex64::from_polar(1.0, omega * t) - 1.0) / Complex64::new(0.0, omega) * Complex64::new(w[0], w[1]);
    Ok([h.re, h.im, t * w[2]])
}

/// Samples of the tangent and filament at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveSample {
    pub geometry: Geometry,
    pub t: f64,
    pub s: Vec<f64>,
    /// `z(t, s)`.
    pub z: Vec<Complex64>,
    /// `T(t, s)`.
    pub tangent: Vec<Vec3>,
    pub x: Vec<Vec3>,
    /// Mean of `T(t, .)`; `X - s drift` is 2 pi periodic.
    pub drift: Vec3,
}

/// `nodes` equispaced arclengths per `2 pi` over `periods` periods, endpoint excluded.
pub fn uniform_grid(nodes: usize, periods: usize) -> Vec<f64> {
    let total = nodes * periods;
    (0..total).map(|j| 2.0 * PI * j as f64 / nodes as f64).collect()
}

/// Uses the closed time integral when `a = 0` and `Omega != 0`, quadrature otherwise.
pub fn curve_from_tangent(profile: &SteadyProfile, t: f64, s: &[f64]) -> Result<CurveSample> {
    let prim = TangentPrimitive::new(profile)?;
    let closed = profile.slip() == 0.0 && profile.omega() != 0.0;
    let tail = if closed { time_integral_closed_form(profile, t)? } else { time_integral_quadrature(profile, t)? };
    curve_with_time_integral(profile, &prim, t, s, tail)
}

pub fn curve_with_time_integral(
    profile: &SteadyProfile,
    prim: &TangentPrimitive,
    t: f64,
    s: &[f64],
    time_part: Vec3,
) -> Result<CurveSample> {
    let shift = profile.slip() * t;
    let angle = profile.omega() * t;
    let base = prim.eval(-shift);
    let mut z = Vec::with_capacity(s.len());
    let mut tangent = Vec::with_capacity(s.len());
    let mut x = Vec::with_capacity(s.len());
    for &sj in s {
        z.push(profile.z(t, sj));
        tangent.push(profile.tangent(t, sj)?);
        let arc = rotate_frame(sub(prim.eval(sj - shift), base), angle);
        x.push([arc[0] + time_part[0], arc[1] + time_part[1], arc[2] + time_part[2]]);
    }
    Ok(CurveSample {
        geometry: profile.geometry(),
        t,
        s: s.to_vec(),
        z,
        tangent,
        x,
        drift: rotate_frame(prim.mean, angle),
    })
}

/// Curves at `t - delta`, `t`, `t + delta` on a shared uniform grid.
pub fn time_slices(
    profile: &SteadyProfile,
    t: f64,
    delta: f64,
    nodes: usize,
    periods: usize,
) -> Result<[CurveSample; 3]> {
    let s = uniform_grid(nodes, periods);
    let prim = TangentPrimitive::new(profile)?;
    let slice = |tt: f64| -> Result<CurveSample> {
        let closed = profile.slip() == 0.0 && profile.omega() != 0.0;
        let tail =
            if closed { time_integral_closed_form(profile, tt)? } else { time_integral_quadrature(profile, tt)? };
        curve_with_time_integral(profile, &prim, tt, &s, tail)
    };
    Ok([slice(t - delta)?, slice(t)?, slice(t + delta)?])
}

/// Spectral `X_s` and `X_ss` of a sample on a uniform grid covering whole periods.
pub fn arclength_derivatives(c: &CurveSample) -> Result<(Vec<Vec3>, Vec<Vec3>)> {
    let n = c.s.len();
    if n < 4 {
        return Err(Error::InvalidParameter("need at least four arclength nodes".into()));
    }
    let h = c.s[1] - c.s[0];
    let period = h * n as f64;
    let uniform = c.s.iter().enumerate().all(|(j, &sj)| (sj - c.s[0] - j as f64 * h).abs() < 1e-9 * period);
    let whole = (period / (2.0 * PI)).round();
    if !uniform || whole < 1.0 || (period - 2.0 * PI * whole).abs() > 1e-9 * period {
        return Err(Error::InvalidParameter("arclength grid must be uniform over whole periods".into()));
    }
    let mut first = vec![[0.0; 3]; n];
    let mut second = vec![[0.0; 3]; n];
    for i in 0..3 {
        let periodic: Vec<Complex64> =
            c.x.iter().zip(&c.s).map(|(x, &sj)| Complex64::new(x[i] - sj * c.drift[i], 0.0)).collect();
        let d1 = periodic_derivative(&periodic, period, 1);
        let d2 = periodic_derivative(&periodic, period, 2);
        for j in 0..n {
            first[j][i] = c.drift[i] + d1[j].re;
            second[j][i] = d2[j].re;
        }
    }
    Ok((first, second))
}

/// Max-norm of `(X(t+d) - X(t-d)) / 2d - X_s wedge X_ss` at the middle slice.
pub fn binormal_residual(prev: &CurveSample, mid: &CurveSample, next: &CurveSample) -> Result<f64> {
    if prev.s != mid.s || next.s != mid.s {
        return Err(Error::InvalidParameter("time slices must share the arclength grid".into()));
    }
    let delta = 0.5 * (next.t - prev.t);
    if delta <= 0.0 || ((mid.t - prev.t) - delta).abs() > 1e-12 * delta.max(1.0) {
        return Err(Error::InvalidParameter("time slices must be equispaced and increasing".into()));
    }
    let (xs, xss) = arclength_derivatives(mid)?;
    let mut worst: f64 = 0.0;
    for j in 0..mid.s.len() {
        let b = wedge(xs[j], xss[j], mid.geometry);
        for i in 0..3 {
            let xt = (next.x[j][i] - prev.x[j][i]) / (2.0 * delta);
            worst = worst.max((xt - b[i]).abs());
        }
    }
    Ok(worst)
}

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: Vec3) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
        norm(sub(a, b)) <= tol
    }

    /// Closed-form helix: `T0 = (rho e^{ix}, h)`.
    fn helix_oracle(g: Geometry, a: f64, r: f64, t: f64, s: f64) -> Vec3 {
        let sg = g.sign();
        let rho = 2.0 * r / (1.0 + sg * r * r);
        let h = (1.0 - sg * r * r) / (1.0 + sg * r * r);
        let omega = a + (sg * r * r - 1.0) / (1.0 + sg * r * r);
        let i = Complex64::i();
        let e = |x: f64| Complex64::from_polar(1.0, x);
        let arc = e(omega * t) * rho * (e(s - a * t) - e(-a * t)) / i;
        let nu = omega - a;
        let flux = -h * rho * (e(nu * t) - 1.0) / (i * nu);
        [arc.re + flux.re, arc.im + flux.im, h * s + sg * rho * rho * t]
    }

    #[test]
    fn tangent_examples() {
        assert_eq!(tangent_from_z(Complex64::new(0.0, 0.0), Geometry::Euclidean).unwrap(), [0.0, 0.0, 1.0]);
        assert_eq!(tangent_from_z(Complex64::new(0.0, 0.0), Geometry::Hyperbolic).unwrap(), [0.0, 0.0, 1.0]);
        let s = 0.7;
        let t = tangent_from_z(Complex64::from_polar(1.0, s), Geometry::Euclidean).unwrap();
        assert!(close(t, [s.cos(), s.sin(), 0.0], 1e-15));
        let t = tangent_from_z(Complex64::new(0.5, 0.0), Geometry::Hyperbolic).unwrap();
        assert!(close(t, [4.0 / 3.0, 0.0, 5.0 / 3.0], 1e-15));
        assert_abs_diff_eq!(quadratic_form(t, Geometry::Hyperbolic), -1.0, epsilon = 1e-15);
        assert!(matches!(
            tangent_from_z(Complex64::new(0.6, 0.8), Geometry::Hyperbolic),
            Err(Error::OutsideDisk { .. })
        ));
    }

    #[test]
    fn projection_examples() {
        assert_eq!(stereo_project([0.0, 0.0, 1.0], Geometry::Euclidean).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(stereo_project([1.0, 0.0, 0.0], Geometry::Euclidean).unwrap(), Complex64::new(1.0, 0.0));
        assert!(matches!(stereo_project([0.0, 0.0, -1.0], Geometry::Euclidean), Err(Error::ProjectionSingular { .. })));
        assert!(stereo_project([1.0, 0.0, -1.0], Geometry::Hyperbolic).is_err());
    }

    #[test]
    fn rotation_examples() {
        let v = [0.3, -1.2, 0.8];
        assert_eq!(rotate_frame(v, 0.0), v);
        assert!(close(rotate_frame([1.0, 0.0, 0.0], PI / 2.0), [0.0, 1.0, 0.0], 1e-16));
        for g in [Geometry::Euclidean, Geometry::Hyperbolic] {
            assert_abs_diff_eq!(quadratic_form(rotate_frame(v, 1.1), g), quadratic_form(v, g), epsilon = 1e-15);
        }
    }

    #[test]
    fn straight_line() {
        let p = SteadyProfile::trivial(Geometry::Euclidean, 0.4, 1.0).unwrap();
        let p = SteadyProfile { params: ProblemParams { r: 0.0, ..p.params }, ..p };
        let s = uniform_grid(32, 1);
        let c = curve_from_tangent(&p, 0.3, &s).unwrap();
        for (x, &sj) in c.x.iter().zip(&s) {
            assert!(close(*x, [0.0, 0.0, sj], 1e-13));
        }
        let [a, b, d] = time_slices(&p, 0.3, 1e-3, 32, 1).unwrap();
        assert!(binormal_residual(&a, &b, &d).unwrap() < 1e-12);
    }

    #[test]
    fn helix_matches_closed_form() {
        for (g, a, r) in
            [(Geometry::Euclidean, 0.3, 0.5), (Geometry::Hyperbolic, 0.3, 0.5), (Geometry::Euclidean, 0.0, 0.7)]
        {
            let p = SteadyProfile::trivial(g, a, r).unwrap();
            let s = uniform_grid(24, 2);
            for t in [0.0, 0.05, 1.3] {
                let c = curve_from_tangent(&p, t, &s).unwrap();
                for (x, &sj) in c.x.iter().zip(&s) {
                    let exact = helix_oracle(g, a, r, t, sj);
                    assert!(close(*x, exact, 1e-12), "{g} a={a} t={t} s={sj}: {x:?} vs {exact:?}");
                }
            }
        }
    }

    #[test]
    fn closed_form_agrees_with_quadrature() {
        let mut f = FourierProfile::zeros(8, 3);
        f.set(3, 0.05);
        f.set(-3, -0.02);
        f.set(6, 0.004);
        let params = ProblemParams::new(Geometry::Hyperbolic, 0.0, 0.5, 0.01, 3, 8).unwrap();
        let p = SteadyProfile::new(params, f).unwrap();
        for t in [0.1, 0.7, 2.0] {
            let q = time_integral_quadrature(&p, t).unwrap();
            let c = time_integral_closed_form(&p, t).unwrap();
            assert!(close(q, c, 1e-10 * norm(c).max(1e-3)), "{q:?} vs {c:?}");
        }
    }

    #[test]
    fn closed_form_needs_rate() {
        let p = SteadyProfile::trivial(Geometry::Euclidean, 0.0, 1.0).unwrap();
        assert_eq!(p.omega(), 0.0);
        assert!(time_integral_closed_form(&p, 1.0).is_err());
        // The unit circle translates along its binormal with unit speed.
        let s = uniform_grid(16, 1);
        let c0 = curve_from_tangent(&p, 0.0, &s).unwrap();
        let c1 = curve_from_tangent(&p, 0.8, &s).unwrap();
        for (x0, x1) in c0.x.iter().zip(&c1.x) {
            assert!(close(*x1, [x0[0], x0[1], x0[2] + 0.8], 1e-13));
        }
    }

    #[test]
    fn helix_residual_is_second_order() {
        let p = SteadyProfile::trivial(Geometry::Euclidean, 0.3, 0.5).unwrap();
        let res = |d: f64| {
            let [a, b, c] = time_slices(&p, 0.2, d, 32, 1).unwrap();
            binormal_residual(&a, &b, &c).unwrap()
        };
        assert!(res(1e-4) <= 1e-7);
        let ratio = res(2e-2) / res(1e-2);
        assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn derivative_recovers_tangent() {
        let mut f = FourierProfile::zeros(6, 2);
        f.set(2, 0.1);
        f.set(-2, 0.05);
        let params = ProblemParams::new(Geometry::Euclidean, 0.4, 0.8, 0.02, 2, 6).unwrap();
        let p = SteadyProfile::new(params, f).unwrap();
        let c = curve_from_tangent(&p, 0.35, &uniform_grid(128, 1)).unwrap();
        let (xs, _) = arclength_derivatives(&c).unwrap();
        for (d, t) in xs.iter().zip(&c.tangent) {
            assert!(close(*d, *t, 1e-11));
        }
    }

    #[test]
    fn grid_must_cover_periods() {
        let p = SteadyProfile::trivial(Geometry::Euclidean, 0.3, 0.5).unwrap();
        let s: Vec<f64> = (0..20).map(|j| 0.1 * j as f64).collect();
        let c = curve_from_tangent(&p, 0.0, &s).unwrap();
        assert!(arclength_derivatives(&c).is_err());
    }

    proptest! {
        #[test]
        fn projection_roundtrip(x in -3.0..3.0f64, y in -3.0..3.0f64, hyp in any::<bool>()) {
            let g = if hyp { Geometry::Hyperbolic } else { Geometry::Euclidean };
            let z = if hyp { Complex64::new(x, y) / (1.0 + Complex64::new(x, y).norm()) } else { Complex64::new(x, y) };
            let t = tangent_from_z(z, g).unwrap();
            prop_assert!((quadratic_form(t, g) - g.sign()).abs() < 1e-12 * (1.0 + t[2] * t[2]));
            if hyp {
                prop_assert!(t[2] >= 1.0);
            }
            let back = stereo_project(t, g).unwrap();
            prop_assert!((back - z).norm() < 1e-12 * (1.0 + z.norm()));
        }

        #[test]
        fn rotated_tangent_is_tangent_of_rotated_profile(t in -2.0..2.0f64, s in 0.0..6.3f64) {
            let mut f = FourierProfile::zeros(4, 1);
            f.set(1, 0.08);
            f.set(-2, -0.05);
            let params = ProblemParams::new(Geometry::Hyperbolic, 0.6, 0.4, 0.0, 1, 4).unwrap();
            let p = SteadyProfile::new(params, f).unwrap();
            let direct = tangent_from_z(p.z(t, s), Geometry::Hyperbolic).unwrap();
            prop_assert!(close(p.tangent(t, s).unwrap(), direct, 1e-13));
        }
    }
}
