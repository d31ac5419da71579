//! Direct integration of `z_t = i z_ss - 2 s i conj(z) z_s^2 / (1 + s |z|^2)`
//! to certify that a profile moves by rotation plus slip only.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::fourier::{wavenumber, GridValues};
use crate::operator::{Geometry, DENOMINATOR_GUARD};
use crate::reconstruct::SteadyProfile;

/// Relative size of the coefficients at `|k| >= M` above which resolution is lost.
pub const RESOLUTION_TOL: f64 = 1e-8;

/// Retries with a halved step before a failed step is reported.
pub const MAX_HALVINGS: u32 = 6;

/// Full complex spectral calculus on a fixed uniform grid of `[0, 2 pi)`.
#[derive(Clone)]
pub struct SpectralGrid {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl SpectralGrid {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        SpectralGrid { len, forward: planner.plan_fft_forward(len), inverse: planner.plan_fft_inverse(len) }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Normalized coefficients in DFT slot order.
    pub fn coefficients(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.forward.process(&mut buf);
        let scale = 1.0 / self.len as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    pub fn values(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut buf = coeffs.to_vec();
        self.inverse.process(&mut buf);
        buf
    }

    /// First and second derivatives. The Nyquist slot is dropped from both.
    pub fn derivatives(&self, values: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let c = self.coefficients(values);
        let mut d1 = vec![Complex64::default(); self.len];
        let mut d2 = vec![Complex64::default(); self.len];
        for (k, &ck) in c.iter().enumerate() {
            if self.len.is_multiple_of(2) && k == self.len / 2 {
                continue;
            }
            let kk = wavenumber(k, self.len) as f64;
            d1[k] = Complex64::new(0.0, kk) * ck;
            d2[k] = -kk * kk * ck;
        }
        (self.values(&d1), self.values(&d2))
    }
}

fn check_state(z: &[Complex64], geometry: Geometry) -> Result<()> {
    let s = geometry.sign();
    for (node, v) in z.iter().enumerate() {
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::NearSingular { value: f64::NAN, node });
        }
        let d = 1.0 + s * v.norm_sqr();
        if geometry == Geometry::Hyperbolic && d <= 0.0 {
            return Err(Error::OutsideDisk { modulus: v.norm() });
        }
        if d.abs() < DENOMINATOR_GUARD {
            return Err(Error::NearSingular { value: d, node });
        }
    }
    Ok(())
}

fn rhs_on(grid: &SpectralGrid, z: &[Complex64], geometry: Geometry) -> Result<Vec<Complex64>> {
    check_state(z, geometry)?;
    let s = geometry.sign();
    let (zs, zss) = grid.derivatives(z);
    let i = Complex64::i();
    Ok(z.iter()
        .zip(zs.iter().zip(&zss))
        .map(|(&v, (&d1, &d2))| i * d2 - 2.0 * s * i * v.conj() * d1 * d1 / (1.0 + s * v.norm_sqr()))
        .collect())
}

/// Time derivative of `z` on its grid.
pub fn rhs(z: &GridValues, geometry: Geometry) -> Result<GridValues> {
    let grid = SpectralGrid::new(z.len());
    Ok(GridValues::new(rhs_on(&grid, &z.values, geometry)?))
}

#[derive(Clone)]
pub struct EvolutionState {
    pub z: GridValues,
    pub t: f64,
    pub trunc: usize,
    pub dt: f64,
    geometry: Geometry,
    grid: SpectralGrid,
}

impl EvolutionState {
    /// The grid has `4 trunc` nodes.
    pub fn new(profile: &SteadyProfile, trunc: usize, dt: f64) -> Result<Self> {
        if trunc == 0 || !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter("need a positive truncation and time step".into()));
        }
        let len = 4 * trunc;
        let values = (0..len).map(|j| profile.z0(2.0 * PI * j as f64 / len as f64)).collect::<Vec<_>>();
        check_state(&values, profile.geometry())?;
        let state = EvolutionState {
            z: GridValues::new(values),
            t: 0.0,
            trunc,
            dt,
            geometry: profile.geometry(),
            grid: SpectralGrid::new(len),
        };
        state.check_resolution()?;
        Ok(state)
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    /// Largest coefficient with `|k| >= trunc`, relative to the largest overall.
    pub fn tail(&self) -> f64 {
        let c = self.grid.coefficients(&self.z.values);
        let len = c.len();
        let peak = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let tail = c
            .iter()
            .enumerate()
            .filter(|&(k, _)| wavenumber(k, len).unsigned_abs() as usize >= self.trunc)
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max);
        if peak > 0.0 {
            tail / peak
        } else {
            0.0
        }
    }

    pub fn check_resolution(&self) -> Result<()> {
        let tail = self.tail();
        if tail > RESOLUTION_TOL {
            return Err(Error::ResolutionLoss { tail, tol: RESOLUTION_TOL });
        }
        Ok(())
    }

    fn rk4(&self, z: &[Complex64], h: f64) -> Result<Vec<Complex64>> {
        let g = self.geometry;
        let axpy = |a: &[Complex64], k: &[Complex64], c: f64| -> Vec<Complex64> {
            a.iter().zip(k).map(|(&x, &y)| x + c * y).collect()
        };
        let k1 = rhs_on(&self.grid, z, g)?;
        let k2 = rhs_on(&self.grid, &axpy(z, &k1, 0.5 * h), g)?;
        let k3 = rhs_on(&self.grid, &axpy(z, &k2, 0.5 * h), g)?;
        let k4 = rhs_on(&self.grid, &axpy(z, &k3, h), g)?;
        let next: Vec<Complex64> =
            (0..z.len()).map(|j| z[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])).collect();
        check_state(&next, g)?;
        Ok(next)
    }

    /// Advances by `h`; a failed step is retried as `2^j` substeps.
    pub fn advance(&mut self, h: f64) -> Result<()> {
        for halvings in 0..=MAX_HALVINGS {
            let pieces = 1usize << halvings;
            let sub = h / pieces as f64;
            let mut z = self.z.values.clone();
            let mut ok = true;
            for _ in 0..pieces {
                match self.rk4(&z, sub) {
                    Ok(next) => z = next,
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                self.z = GridValues::new(z);
                self.t += h;
                return Ok(());
            }
        }
        Err(Error::BlowUp { t: self.t })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteadinessReport {
    /// Largest relative distance over the checkpoints.
    pub max_error: f64,
    /// `(t, relative distance)` at each checkpoint.
    pub checkpoints: Vec<(f64, f64)>,
    pub steps: usize,
}

/// Evolves `z0` with RK4 and compares against `e^{i Omega t} z0(s - a t)` at `checkpoints` evenly spaced times.
pub fn steadiness_error(
    profile: &SteadyProfile,
    t_final: f64,
    dt: f64,
    trunc: usize,
    checkpoints: usize,
) -> Result<SteadinessReport> {
    if !(t_final > 0.0 && t_final.is_finite()) || checkpoints == 0 {
        return Err(Error::InvalidParameter("need a positive horizon and at least one checkpoint".into()));
    }
    let mut state = EvolutionState::new(profile, trunc, dt)?;
    let per = ((t_final / checkpoints as f64) / dt).ceil().max(1.0) as usize;
    let steps = per * checkpoints;
    let h = t_final / steps as f64;
    let initial = state.grid.coefficients(&state.z.values);
    let len = initial.len();
    let (omega, a) = (profile.omega(), profile.slip());
    let mut report = SteadinessReport { max_error: 0.0, checkpoints: Vec::with_capacity(checkpoints), steps };
    for c in 1..=checkpoints {
        for _ in 0..per {
            state.advance(h)?;
        }
        state.check_resolution()?;
        let t = t_final * c as f64 / checkpoints as f64;
        state.t = t;
        let shifted: Vec<Complex64> = initial
            .iter()
            .enumerate()
            .map(|(k, &ck)| ck * Complex64::from_polar(1.0, omega * t - wavenumber(k, len) as f64 * a * t))
            .collect();
        let exact = state.grid.values(&shifted);
        let num: f64 = exact.iter().zip(&state.z.values).map(|(e, v)| (e - v).norm_sqr()).sum();
        let den: f64 = exact.iter().map(|e| e.norm_sqr()).sum();
        let err = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
        report.max_error = report.max_error.max(err);
        report.checkpoints.push((t, err));
    }
    Ok(report)
}
