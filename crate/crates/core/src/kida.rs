//! Comparison with the classical steady family that rotates, translates and slips.
//!
//! Members of that family satisfy, at every arclength,
//! `|T_h|^2 = q (V/2 + c/q)^2 - g(q) / (4 q)` with `q = A - (2/Omega) T3`,
//! `c = (a - A V Omega / 2) / Omega` and the cubic `g` below. A profile whose
//! `|z0|` is not constant cannot satisfy it unless the cubic in `q` vanishes identically.

use nalgebra::Matrix3;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operator::Geometry;
use crate::reconstruct::{CurveSample, Vec3};

/// Relative distance to a pole below which evaluation is refused.
pub const POLE_TOL: f64 = 1e-12;

/// Rotation, translation and slip constants of the classical family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KidaParams {
    pub a_const: f64,
    /// Vertical translation speed.
    pub v: f64,
    pub omega: f64,
    pub slip: f64,
}

/// Coefficients of `g(R)`, highest degree first.
pub fn kida_cubic_g(a_const: f64, v: f64, slip: f64) -> [f64; 4] {
    let (aa, a) = (a_const, slip);
    [1.0, v * v - 2.0 * aa, aa * aa - 4.0 - 2.0 * aa * v * v + 4.0 * v * a, (2.0 * a - aa * v).powi(2)]
}

pub fn eval_cubic(c: &[f64; 4], x: f64) -> f64 {
    ((c[0] * x + c[1]) * x + c[2]) * x + c[3]
}

fn pole_check(value: f64, scale: f64, what: &str) -> Result<()> {
    if value.abs() <= POLE_TOL * scale.max(1.0) {
        return Err(Error::Pole(format!("{what} vanishes ({value:.3e})")));
    }
    Ok(())
}

/// Cubic in `q` that every member of the family must annihilate, highest degree first.
pub fn beta_cubic(a_const: f64, v: f64, omega: f64, slip: f64) -> Result<[f64; 4]> {
    pole_check(omega, 1.0, "rotation rate")?;
    let (aa, a) = (a_const, slip);
    let shifted = aa - 4.0 / omega;
    pole_check(shifted, aa.abs() + (4.0 / omega).abs(), "A - 4/Omega")?;
    let p = 4.0 / shifted;
    let c = a - 0.5 * aa * v * omega;
    Ok([
        -0.25 + p,
        0.5 * aa - p,
        v * c / omega - 0.25 * (aa * aa - 4.0 - 2.0 * aa * v * v + 4.0 * v * a) + 2.0 * p / omega * (aa - 2.0 / omega),
        c * c / (omega * omega) - 0.25 * (2.0 * a - aa * v).powi(2),
    ])
}

/// Real roots of a cubic with nonzero leading coefficient, ascending and Newton-polished.
pub fn cubic_real_roots(c: &[f64; 4]) -> Vec<f64> {
    if c[0] == 0.0 {
        return Vec::new();
    }
    let companion = Matrix3::new(-c[1] / c[0], -c[2] / c[0], -c[3] / c[0], 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
    let scale = c.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut roots: Vec<f64> = companion
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-7 * (1.0 + z.re.abs()))
        .map(|z| {
            let mut x = z.re;
            for _ in 0..4 {
                let slope = (3.0 * c[0] * x + 2.0 * c[1]) * x + c[2];
                if slope.abs() <= 1e-14 * scale {
                    break;
                }
                x -= eval_cubic(c, x) / slope;
            }
            x
        })
        .collect();
    roots.sort_by(f64::total_cmp);
    roots
}

/// `max |z0| - min |z0|` over the samples.
pub fn modulus_variation(values: &[Complex64]) -> f64 {
    let (lo, hi) =
        values.iter().map(|z| z.norm()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| (lo.min(m), hi.max(m)));
    if values.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// Defect of the family relation at one tangent.
pub fn pointwise_defect(t: Vec3, p: &KidaParams) -> Result<f64> {
    pole_check(p.omega, 1.0, "rotation rate")?;
    let q = p.a_const - 2.0 / p.omega * t[2];
    pole_check(q, p.a_const.abs() + (2.0 / p.omega * t[2]).abs(), "A - (2/Omega) T3")?;
    let c = (p.slip - 0.5 * p.a_const * p.v * p.omega) / p.omega;
    let g = kida_cubic_g(p.a_const, p.v, p.slip);
    let rhs = q * (0.5 * p.v + c / q).powi(2) - eval_cubic(&g, q) / (4.0 * q);
    Ok(t[0] * t[0] + t[1] * t[1] - rhs)
}

/// Largest absolute defect over tangent samples.
pub fn defect_of_tangents(tangents: &[Vec3], p: &KidaParams) -> Result<f64> {
    tangents.iter().try_fold(0.0f64, |acc, &t| Ok(acc.max(pointwise_defect(t, p)?.abs())))
}

/// The relation is stated for the Euclidean geometry only.
pub fn kida_compatibility_defect(sample: &CurveSample, p: &KidaParams) -> Result<f64> {
    if sample.geometry != Geometry::Euclidean {
        return Err(Error::InvalidParameter("the family relation is Euclidean only".into()));
    }
    defect_of_tangents(&sample.tangent, p)
}

/// Parameters matching a helix with tangent `(rho e^{is}, h)`: `A` from the height relation,
/// `V` solved from the defect, which is affine in `V`.
pub fn fit_helix(rho: f64, h: f64, omega: f64, slip: f64) -> Result<KidaParams> {
    pole_check(omega, 1.0, "rotation rate")?;
    let a_const = rho * rho + 2.0 * h / omega;
    let t = [rho, 0.0, h];
    let at = |v: f64| pointwise_defect(t, &KidaParams { a_const, v, omega, slip });
    let d0 = at(0.0)?;
    let d1 = at(1.0)? - d0;
    if d1.abs() <= 1e-12 * (1.0 + d0.abs()) {
        return Err(Error::Unbounded(format!(
            "translation speed drops out of the relation (slip {slip}, rate {omega}); helix cannot be fitted"
        )));
    }
    Ok(KidaParams { a_const, v: -d0 / d1, omega, slip })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridMinimum {
    pub params: KidaParams,
    pub defect: f64,
    /// Grid spacing in `A` and in `V`.
    pub spacing: (f64, f64),
    pub cells: usize,
}

/// Minimizes the max-defect over a `cells x cells` grid in `(A, V)` centred on `center`.
pub fn minimize_defect(
    tangents: &[Vec3],
    center: &KidaParams,
    half_width: (f64, f64),
    cells: usize,
) -> Result<GridMinimum> {
    if cells < 2 || !(half_width.0 > 0.0 && half_width.1 > 0.0) {
        return Err(Error::InvalidParameter("grid needs at least two cells per side and positive widths".into()));
    }
    let spacing = (2.0 * half_width.0 / (cells - 1) as f64, 2.0 * half_width.1 / (cells - 1) as f64);
    let best = (0..cells)
        .into_par_iter()
        .map(|i| {
            let a_const = center.a_const - half_width.0 + i as f64 * spacing.0;
            (0..cells)
                .filter_map(|j| {
                    let p = KidaParams { a_const, v: center.v - half_width.1 + j as f64 * spacing.1, ..*center };
                    defect_of_tangents(tangents, &p).ok().map(|d| (d, p))
                })
                .min_by(|x, y| x.0.total_cmp(&y.0))
        })
        .flatten()
        .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.a_const.total_cmp(&y.1.a_const)).then(x.1.v.total_cmp(&y.1.v)));
    match best {
        Some((defect, params)) => Ok(GridMinimum { params, defect, spacing, cells }),
        None => Err(Error::Pole("every grid cell hits a pole".into())),
    }
}
