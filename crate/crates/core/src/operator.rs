//! The profile functional whose zeros are rotating-slipping solutions.
//!
//! With `u = R + f` and `s = +1` (Euclidean) or `s = -1` (hyperbolic):
//!
//! ```text
//! G(f) = (Omega + 1 - a) u + (3 - a) w f' + w^2 f'' - 2 s conj(u) (u + w f')^2 / (1 + s |u|^2)
//! ```
//!
//! where `Omega = Omega_R + lambda`. `G(0) = 0` for `lambda = 0`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{analyze, synthesize, wderiv, DerivOrder, FourierProfile, GridValues, OVERSAMPLE};

/// Smallest admissible denominator `|1 + s |u|^2|` on the grid.
pub const DENOMINATOR_GUARD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Geometry {
    Euclidean,
    Hyperbolic,
}

impl Geometry {
    /// `+1` for Euclidean, `-1` for hyperbolic.
    pub fn sign(self) -> f64 {
        match self {
            Geometry::Euclidean => 1.0,
            Geometry::Hyperbolic => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Geometry::Euclidean => "euclidean",
            Geometry::Hyperbolic => "hyperbolic",
        }
    }

    pub fn check_radius(self, r: f64) -> Result<()> {
        let ok = r.is_finite() && r > 0.0 && (self == Geometry::Euclidean || r < 1.0);
        if ok {
            Ok(())
        } else {
            Err(Error::RadiusOutOfRange { r, geometry: self.name() })
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Geometry {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "e" => Ok(Geometry::Euclidean),
            "hyperbolic" | "h" => Ok(Geometry::Hyperbolic),
            other => Err(Error::InvalidParameter(format!("unknown geometry '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProblemParams {
    pub geometry: Geometry,
    pub a: f64,
    pub r: f64,
    pub lambda: f64,
    pub mfold: usize,
    pub trunc: usize,
}

impl ProblemParams {
    pub fn new(geometry: Geometry, a: f64, r: f64, lambda: f64, mfold: usize, trunc: usize) -> Result<Self> {
        let p = ProblemParams { geometry, a, r, lambda, mfold, trunc };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a.is_finite() || !self.lambda.is_finite() {
            return Err(Error::InvalidParameter("slip and rotation shift must be finite".into()));
        }
        if self.mfold == 0 || self.trunc == 0 {
            return Err(Error::InvalidParameter("truncation and symmetry order must be positive".into()));
        }
        self.geometry.check_radius(self.r)
    }

    pub fn omega_trivial(&self) -> f64 {
        let s = self.geometry.sign();
        let r2 = self.r * self.r;
        self.a + (s * r2 - 1.0) / (1.0 + s * r2)
    }

    pub fn omega(&self) -> f64 {
        self.omega_trivial() + self.lambda
    }

    pub fn grid(&self) -> usize {
        OVERSAMPLE * self.trunc
    }
}

/// Rotation rate of the trivial circle of radius `r`.
pub fn omega_trivial(geometry: Geometry, a: f64, r: f64) -> Result<f64> {
    geometry.check_radius(r)?;
    Ok(ProblemParams { geometry, a, r, lambda: 0.0, mfold: 1, trunc: 1 }.omega_trivial())
}

fn check_profile(params: &ProblemParams, f: &FourierProfile) -> Result<()> {
    params.validate()?;
    if f.trunc() != params.trunc {
        return Err(Error::TruncationMismatch { profile: f.trunc(), params: params.trunc });
    }
    Ok(())
}

/// Coefficients of `G(f)`, truncated to `params.trunc`. The symmetry label of
/// the output is 1; closure under `m`-fold symmetry is a property, not a projection.
pub fn eval_g(params: &ProblemParams, f: &FourierProfile) -> Result<FourierProfile> {
    check_profile(params, f)?;
    let s = params.geometry.sign();
    let grid = params.grid();
    let fv = synthesize(f, grid)?;
    let dv = synthesize(&wderiv(f, DerivOrder::First), grid)?;
    let mut nonlinear = Vec::with_capacity(grid);
    for (j, (fj, dj)) in fv.values.iter().zip(&dv.values).enumerate() {
        let u = params.r + fj;
        let v = u + dj;
        let den = 1.0 + s * u.norm_sqr();
        if den < DENOMINATOR_GUARD {
            return Err(Error::NearSingular { value: den, node: j });
        }
        nonlinear.push(u.conj() * v * v / den);
    }
    let nl = analyze(&GridValues::new(nonlinear), params.trunc)?;
    let shift = params.omega() + 1.0 - params.a;
    let mut out = FourierProfile::zeros(params.trunc, 1);
    for (n, c) in f.modes() {
        let nf = n as f64;
        let u = if n == 0 { params.r + c } else { c };
        out.set(n, shift * u + nf * (nf + 2.0 - params.a) * c - 2.0 * s * nl.coeff(n));
    }
    Ok(out)
}

/// Derivative of `G` at `f = 0` applied to `h`, including the `lambda h` term.
pub fn apply_linearized(params: &ProblemParams, h: &FourierProfile) -> Result<FourierProfile> {
    check_profile(params, h)?;
    let s = params.geometry.sign();
    let r2 = params.r * params.r;
    let den = 1.0 + s * r2;
    let real_part = -4.0 * s * r2 / (den * den);
    let first = (3.0 - s * r2) / den - params.a;
    let mut out = FourierProfile::zeros(params.trunc, h.mfold());
    for n in h.allowed_modes() {
        let (nf, c) = (n as f64, h.coeff(n));
        let re = 0.5 * (c + h.coeff(-n));
        out.set(n, params.lambda * c + real_part * re + (first * nf + nf * (nf - 1.0)) * c);
    }
    Ok(out)
}

/// Partial derivative of `G` with respect to the rotation shift: `R + f`.
pub fn d_lambda(params: &ProblemParams, f: &FourierProfile) -> FourierProfile {
    let mut out = f.clone();
    out.set(0, f.coeff(0) + params.r);
    out
}

/// Exact derivative of the discrete `G` at a general profile `f`.
///
/// With `N = conj(u) v^2 / D`, `v = u + w f'`, `D = 1 + s |u|^2`, the derivative is
/// `dN[h] = P h + B w h' + Q conj(h)` where `B = 2 conj(u) v / D`,
/// `P = B - s conj(u)^2 v^2 / D^2` and `Q = v^2 / D - s |u|^2 v^2 / D^2`.
#[derive(Clone, Debug)]
pub struct Linearization {
    params: ProblemParams,
    u_hat: FourierProfile,
    p_hat: Vec<f64>,
    b_hat: Vec<f64>,
    q_hat: Vec<f64>,
}

impl Linearization {
    pub fn new(params: &ProblemParams, f: &FourierProfile) -> Result<Self> {
        check_profile(params, f)?;
        let s = params.geometry.sign();
        let grid = params.grid();
        let fv = synthesize(f, grid)?;
        let dv = synthesize(&wderiv(f, DerivOrder::First), grid)?;
        let mut pv = Vec::with_capacity(grid);
        let mut bv = Vec::with_capacity(grid);
        let mut qv = Vec::with_capacity(grid);
        for (j, (fj, dj)) in fv.values.iter().zip(&dv.values).enumerate() {
            let u = params.r + fj;
            let v = u + dj;
            let den = 1.0 + s * u.norm_sqr();
            if den < DENOMINATOR_GUARD {
                return Err(Error::NearSingular { value: den, node: j });
            }
            let c = -s * v * v / (den * den);
            let b = 2.0 * u.conj() * v / den;
            bv.push(b);
            pv.push(b + c * u.conj() * u.conj());
            qv.push(v * v / den + c * u.norm_sqr());
        }
        let spectrum = |mut vals: Vec<Complex64>| {
            crate::fourier::fft_forward(&mut vals);
            vals.iter().map(|c| c.re / grid as f64).collect::<Vec<f64>>()
        };
        let mut u_hat = f.clone();
        u_hat.set(0, f.coeff(0) + params.r);
        Ok(Linearization { params: *params, u_hat, p_hat: spectrum(pv), b_hat: spectrum(bv), q_hat: spectrum(qv) })
    }

    fn hat(v: &[f64], k: i64) -> f64 {
        v[k.rem_euclid(v.len() as i64) as usize]
    }

    /// Coefficient `k` of the derivative of `G` in the direction `w^n`.
    pub fn entry(&self, k: i64, n: i64) -> f64 {
        let s = self.params.geometry.sign();
        let nf = n as f64;
        let diag =
            if k == n { self.params.omega() + 1.0 - self.params.a + nf * (nf + 2.0 - self.params.a) } else { 0.0 };
        let dn = Self::hat(&self.p_hat, k - n) + nf * Self::hat(&self.b_hat, k - n) + Self::hat(&self.q_hat, k + n);
        diag - 2.0 * s * dn
    }

    /// Coefficient `k` of the partial derivative of `G` with respect to `R`.
    pub fn radius_entry(&self, k: i64) -> f64 {
        let s = self.params.geometry.sign();
        let r = self.params.r;
        let den = 1.0 + s * r * r;
        let d_omega = 4.0 * s * r / (den * den);
        let shift = if k == 0 { self.params.omega() + 1.0 - self.params.a } else { 0.0 };
        d_omega * self.u_hat.coeff(k) + shift - 2.0 * s * (Self::hat(&self.p_hat, k) + Self::hat(&self.q_hat, k))
    }

    /// Coefficient `k` of the partial derivative of `G` with respect to `lambda`.
    pub fn lambda_entry(&self, k: i64) -> f64 {
        self.u_hat.coeff(k)
    }

    pub fn apply(&self, h: &FourierProfile) -> FourierProfile {
        let mut out = FourierProfile::zeros(self.params.trunc, 1);
        let m = self.params.trunc as i64;
        for k in -m..=m {
            out.set(k, h.modes().filter(|(_, c)| *c != 0.0).map(|(n, c)| c * self.entry(k, n)).sum());
        }
        out
    }
}

/// Samples of `z(s) = e^{is} (R + f(e^{is}))` on `grid` equispaced nodes.
pub fn z0_samples(params: &ProblemParams, f: &FourierProfile, grid: usize) -> Result<GridValues> {
    let fv = synthesize(f, grid)?;
    let values =
        fv.values.iter().enumerate().map(|(j, v)| Complex64::from_polar(1.0, fv.theta(j)) * (params.r + v)).collect();
    Ok(GridValues::new(values))
}

/// Pointwise sup norm of a residual series on the default grid.
pub fn residual_sup(params: &ProblemParams, g: &FourierProfile) -> Result<f64> {
    Ok(synthesize(g, params.grid().max(2 * g.trunc() + 1))?.sup_norm())
}
