//! Real Fourier series on the unit circle and their grid samples.
//!
//! A profile `f(w) = sum_{|n| <= M} f_n w^n` with real `f_n` is stored densely,
//! index `n + M`. Such a profile satisfies `conj(f(w)) = f(conj w)` on `|w| = 1`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Relative tolerance on imaginary residue when recovering real coefficients.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Default grid oversampling factor relative to the truncation.
pub const OVERSAMPLE: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct FourierProfile {
    trunc: usize,
    mfold: usize,
    coeffs: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivOrder {
    First,
    Second,
}

impl FourierProfile {
    /// # Panics
    /// If `trunc == 0` or `mfold == 0`.
    pub fn zeros(trunc: usize, mfold: usize) -> Self {
        assert!(trunc > 0 && mfold > 0, "truncation and symmetry order must be positive");
        FourierProfile { trunc, mfold, coeffs: vec![0.0; 2 * trunc + 1] }
    }

    pub fn from_modes(trunc: usize, mfold: usize, modes: &[(i64, f64)]) -> Result<Self> {
        if trunc == 0 || mfold == 0 {
            return Err(Error::InvalidParameter("truncation and symmetry order must be positive".into()));
        }
        let mut p = FourierProfile::zeros(trunc, mfold);
        for &(n, v) in modes {
            if n.unsigned_abs() as usize > trunc {
                return Err(Error::InvalidParameter(format!("mode {n} exceeds truncation {trunc}")));
            }
            if n.rem_euclid(mfold as i64) != 0 {
                return Err(Error::InvalidParameter(format!("mode {n} breaks {mfold}-fold symmetry")));
            }
            p.coeffs[(n + trunc as i64) as usize] += v;
        }
        Ok(p)
    }

    /// Dense coefficients, index `n + M`. The symmetry label is set to 1.
    pub fn from_dense(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() < 3 || coeffs.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "dense coefficient vector must have odd length >= 3, got {}",
                coeffs.len()
            )));
        }
        Ok(FourierProfile { trunc: coeffs.len() / 2, mfold: 1, coeffs })
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn mfold(&self) -> usize {
        self.mfold
    }

    pub fn dense(&self) -> &[f64] {
        &self.coeffs
    }

    /// Zero outside the truncation.
    pub fn coeff(&self, n: i64) -> f64 {
        if n.unsigned_abs() as usize > self.trunc {
            0.0
        } else {
            self.coeffs[(n + self.trunc as i64) as usize]
        }
    }

    /// # Panics
    /// If `n` lies outside the truncation or breaks the symmetry label.
    pub fn set(&mut self, n: i64, value: f64) {
        assert!(n.unsigned_abs() as usize <= self.trunc, "mode {n} exceeds truncation {}", self.trunc);
        assert!(n.rem_euclid(self.mfold as i64) == 0, "mode {n} breaks {}-fold symmetry", self.mfold);
        self.coeffs[(n + self.trunc as i64) as usize] = value;
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let m = self.trunc as i64;
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i as i64 - m, c))
    }

    /// Modes allowed by the symmetry label, ascending.
    pub fn allowed_modes(&self) -> Vec<i64> {
        let m = self.trunc as i64;
        (-m..=m).filter(|n| n.rem_euclid(self.mfold as i64) == 0).collect()
    }

    pub fn with_mfold(mut self, mfold: usize) -> Result<Self> {
        if mfold == 0 {
            return Err(Error::InvalidParameter("symmetry order must be positive".into()));
        }
        if let Some((n, _)) = self.modes().find(|&(n, c)| c != 0.0 && n.rem_euclid(mfold as i64) != 0) {
            return Err(Error::InvalidParameter(format!("mode {n} breaks {mfold}-fold symmetry")));
        }
        self.mfold = mfold;
        Ok(self)
    }

    /// Zero-pads or truncates to a new truncation.
    pub fn resized(&self, trunc: usize) -> Self {
        let mut out = FourierProfile::zeros(trunc, self.mfold);
        let t = trunc as i64;
        for (n, c) in self.modes() {
            if n.abs() <= t {
                out.coeffs[(n + t) as usize] = c;
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        FourierProfile { trunc: self.trunc, mfold: self.mfold, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.modes().map(|(n, c)| c * other.coeff(n)).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Largest coefficient magnitude on modes outside `m Z`.
    pub fn off_mfold_max(&self, m: usize) -> f64 {
        self.modes().filter(|(n, _)| n.rem_euclid(m as i64) != 0).fold(0.0, |acc, (_, c)| acc.max(c.abs()))
    }

    /// Value at a point `w` of the unit circle (or anywhere in the punctured plane).
    pub fn eval(&self, w: Complex64) -> Complex64 {
        let winv = w.inv();
        let mut acc = Complex64::new(self.coeff(0), 0.0);
        let mut wp = Complex64::new(1.0, 0.0);
        let mut wm = Complex64::new(1.0, 0.0);
        for k in 1..=self.trunc as i64 {
            wp *= w;
            wm *= winv;
            acc += wp * self.coeff(k) + wm * self.coeff(-k);
        }
        acc
    }

    fn combine(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.trunc, other.trunc, "profiles must share a truncation");
        FourierProfile {
            trunc: self.trunc,
            mfold: gcd(self.mfold, other.mfold),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| op(*a, *b)).collect(),
        }
    }
}

impl Add for &FourierProfile {
    type Output = FourierProfile;
    fn add(self, rhs: Self) -> FourierProfile {
        self.combine(rhs, |a, b| a + b)
    }
}

impl Sub for &FourierProfile {
    type Output = FourierProfile;
    fn sub(self, rhs: Self) -> FourierProfile {
        self.combine(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &FourierProfile {
    type Output = FourierProfile;
    fn mul(self, s: f64) -> FourierProfile {
        self.scaled(s)
    }
}

impl Neg for &FourierProfile {
    type Output = FourierProfile;
    fn neg(self) -> FourierProfile {
        self.scaled(-1.0)
    }
}

/// Samples at the equispaced nodes `w_j = exp(2 pi i j / J)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridValues {
    pub values: Vec<Complex64>,
}

impl GridValues {
    pub fn new(values: Vec<Complex64>) -> Self {
        GridValues { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.values.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Unnormalized forward DFT, kernel `exp(-2 pi i j k / J)`.
pub(crate) fn fft_forward(buf: &mut [Complex64]) {
    FftPlanner::new().plan_fft_forward(buf.len()).process(buf);
}

/// Unnormalized inverse DFT, kernel `exp(+2 pi i j k / J)`.
pub(crate) fn fft_inverse(buf: &mut [Complex64]) {
    FftPlanner::new().plan_fft_inverse(buf.len()).process(buf);
}

/// Signed wavenumber of DFT slot `k` on a grid of `len` nodes.
pub(crate) fn wavenumber(k: usize, len: usize) -> i64 {
    if k <= len / 2 {
        k as i64
    } else {
        k as i64 - len as i64
    }
}

pub fn synthesize(p: &FourierProfile, grid: usize) -> Result<GridValues> {
    let need = 2 * p.trunc + 1;
    if grid < need {
        return Err(Error::Aliasing { grid, trunc: p.trunc, need });
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); grid];
    for (n, c) in p.modes() {
        buf[n.rem_euclid(grid as i64) as usize] += c;
    }
    fft_inverse(&mut buf);
    Ok(GridValues { values: buf })
}

pub fn analyze(g: &GridValues, trunc: usize) -> Result<FourierProfile> {
    analyze_with_tol(g, trunc, SYMMETRY_TOL)
}

/// Recovers real coefficients up to `trunc`; the imaginary residue of every
/// recovered coefficient must stay below `tol` times the largest magnitude.
pub fn analyze_with_tol(g: &GridValues, trunc: usize, tol: f64) -> Result<FourierProfile> {
    let grid = g.len();
    let need = 2 * trunc + 1;
    if trunc == 0 || grid < need {
        return Err(Error::Aliasing { grid, trunc, need });
    }
    let mut buf = g.values.clone();
    fft_forward(&mut buf);
    let scale = 1.0 / grid as f64;
    let peak = buf.iter().fold(0.0_f64, |m, c| m.max(c.norm())) * scale;
    let mut out = FourierProfile::zeros(trunc, 1);
    let mut residue = 0.0_f64;
    for n in -(trunc as i64)..=trunc as i64 {
        let c = buf[n.rem_euclid(grid as i64) as usize] * scale;
        residue = residue.max(c.im.abs());
        out.coeffs[(n + trunc as i64) as usize] = c.re;
    }
    let bound = tol * peak.max(f64::MIN_POSITIVE);
    if residue > bound {
        return Err(Error::SymmetryViolation { residue, tol: bound });
    }
    Ok(out)
}

/// Multiplies mode `n` by `n` (first order) or `n(n - 1)` (second order),
/// i.e. applies `w d/dw` or `w^2 d^2/dw^2`.
pub fn wderiv(p: &FourierProfile, order: DerivOrder) -> FourierProfile {
    let mut out = p.clone();
    let m = p.trunc as i64;
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        let n = (i as i64 - m) as f64;
        *c *= match order {
            DerivOrder::First => n,
            DerivOrder::Second => n * (n - 1.0),
        };
    }
    out
}

/// Coefficients of `conj(f(w))` on the circle, i.e. `n -> -n`.
pub fn conj_reflect(p: &FourierProfile) -> FourierProfile {
    let mut out = p.clone();
    out.coeffs.reverse();
    out
}

/// Keeps modes in `m Z`; returns the projection and the discarded L2 energy.
pub fn project_mfold(p: &FourierProfile, m: usize) -> (FourierProfile, f64) {
    assert!(m > 0, "symmetry order must be positive");
    let mut out = p.clone();
    let t = p.trunc as i64;
    let mut discarded = 0.0;
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        if (i as i64 - t).rem_euclid(m as i64) != 0 {
            discarded += *c * *c;
            *c = 0.0;
        }
    }
    out.mfold = lcm(p.mfold, m);
    (out, discarded.sqrt())
}

/// Spectral derivative of samples of a function periodic on `[0, period)`.
/// The Nyquist mode is dropped for odd orders.
pub fn periodic_derivative(values: &[Complex64], period: f64, order: u32) -> Vec<Complex64> {
    let len = values.len();
    let mut buf = values.to_vec();
    fft_forward(&mut buf);
    let base = 2.0 * PI / period;
    for (k, c) in buf.iter_mut().enumerate() {
        let kk = wavenumber(k, len);
        if order % 2 == 1 && len.is_multiple_of(2) && k == len / 2 {
            *c = Complex64::new(0.0, 0.0);
            continue;
        }
        *c *= Complex64::new(0.0, kk as f64 * base).powu(order) / len as f64;
    }
    fft_inverse(&mut buf);
    buf
}
