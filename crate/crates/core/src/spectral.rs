//! Spectral theory of the linearization at the trivial circle.
//!
//! On `h = a_n w^n + a_{-n} w^{-n}` the linearization acts on
//! `(b, c) = (a_n + a_{-n}, a_n - a_{-n})` through the symmetric block
//!
//! ```text
//! [[-4 s R^2 / (1 + s R^2)^2 + n^2,  k n],
//!  [k n,                             n^2]],   k = 2 (1 - s R^2) / (1 + s R^2) - a
//! ```
//!
//! Singularity is a quadratic in `x = R^2`:
//! `A x^2 + 2 s B x + C = 0` with `A = n^2 - (a + 2)^2`, `B = n^2 + 2 - a^2`,
//! `C = n^2 - (a - 2)^2` and discriminant `4 (3 n^2 - 3 + a^2)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::fourier::FourierProfile;
use crate::operator::Geometry;

/// Relative determinant size below which a block counts as singular.
pub const EIGEN_DET_TOL: f64 = 1e-10;

/// Margin below which the closed-form transversality test is inconclusive.
pub const TRANSVERSALITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RootBranch {
    Plus,
    Minus,
}

impl RootBranch {
    pub fn sign(self) -> f64 {
        match self {
            RootBranch::Plus => 1.0,
            RootBranch::Minus => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RootBranch::Plus => "plus",
            RootBranch::Minus => "minus",
        }
    }
}

impl fmt::Display for RootBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for RootBranch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plus" | "+" => Ok(RootBranch::Plus),
            "minus" | "-" => Ok(RootBranch::Minus),
            other => Err(Error::InvalidParameter(format!("unknown branch '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeBlock {
    pub n: u32,
    pub entries: [[f64; 2]; 2],
}

impl ModeBlock {
    pub fn det(&self) -> f64 {
        let e = &self.entries;
        e[0][0] * e[1][1] - e[0][1] * e[1][0]
    }

    /// Determinant relative to the squared Frobenius norm.
    pub fn relative_det(&self) -> f64 {
        let norm2: f64 = self.entries.iter().flatten().map(|v| v * v).sum();
        self.det().abs() / norm2.max(f64::MIN_POSITIVE)
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let e = &self.entries;
        [e[0][0] * v[0] + e[0][1] * v[1], e[1][0] * v[0] + e[1][1] * v[1]]
    }

    /// Singular values, descending. The block is symmetric so these are `|eigenvalues|`.
    pub fn singular_values(&self) -> [f64; 2] {
        let e = &self.entries;
        let mean = 0.5 * (e[0][0] + e[1][1]);
        let half = 0.5 * (e[0][0] - e[1][1]);
        let rad = half.hypot(e[0][1]);
        let (l1, l2) = ((mean + rad).abs(), (mean - rad).abs());
        [l1.max(l2), l1.min(l2)]
    }
}

/// `k = 2 (1 - s R^2) / (1 + s R^2) - a`.
pub fn first_order_shift(geometry: Geometry, a: f64, r: f64) -> f64 {
    let s = geometry.sign();
    let x = r * r;
    2.0 * (1.0 - s * x) / (1.0 + s * x) - a
}

pub fn linear_block(n: u32, geometry: Geometry, a: f64, r: f64) -> ModeBlock {
    let s = geometry.sign();
    let x = r * r;
    let den = 1.0 + s * x;
    let nf = n as f64;
    let k = first_order_shift(geometry, a, r);
    ModeBlock { n, entries: [[-4.0 * s * x / (den * den) + nf * nf, k * nf], [k * nf, nf * nf]] }
}

/// `(d/dR of the (1,1) entry, d/dR of k)`.
fn block_radius_derivatives(geometry: Geometry, r: f64) -> (f64, f64) {
    let s = geometry.sign();
    let x = r * r;
    let den = 1.0 + s * x;
    (-8.0 * s * r * (1.0 - s * x) / den.powi(3), -8.0 * s * r / (den * den))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenRadius {
    pub geometry: Geometry,
    pub branch: RootBranch,
    pub n: u32,
    pub a: f64,
    /// NaN when the root is not real.
    pub r_squared: f64,
    /// `sqrt(r_squared)` when positive, NaN otherwise.
    pub radius: f64,
    pub admissible: bool,
}

/// Root of the radius quadratic on the given branch, in the cancellation-free form.
pub fn radius_squared(n: u32, geometry: Geometry, a: f64, branch: RootBranch) -> f64 {
    let s = geometry.sign();
    let nf = (n as f64) * (n as f64);
    let qa = nf - (a + 2.0) * (a + 2.0);
    let qb = nf + 2.0 - a * a;
    let qc = nf - (a - 2.0) * (a - 2.0);
    let disc = 3.0 * nf - 3.0 + a * a;
    if disc < 0.0 {
        return f64::NAN;
    }
    let root = 2.0 * disc.sqrt();
    let sigma = branch.sign();
    let lead = -s * qb;
    // `lead + sigma root` cancels when the two terms have opposite signs.
    if lead * sigma < 0.0 || qa == 0.0 {
        let den = lead - sigma * root;
        if den == 0.0 {
            return if qc == 0.0 { 0.0 } else { f64::NAN };
        }
        qc / den
    } else {
        (lead + sigma * root) / qa
    }
}

/// Both branch radii for mode `n`, each polished by one Newton step on the determinant.
pub fn eigen_radii(n: u32, geometry: Geometry, a: f64) -> Vec<EigenRadius> {
    [RootBranch::Plus, RootBranch::Minus]
        .into_iter()
        .map(|branch| {
            let x = radius_squared(n, geometry, a, branch);
            let mut radius = if x > 0.0 { x.sqrt() } else { f64::NAN };
            if radius.is_finite() {
                radius = polish(n, geometry, a, radius);
            }
            let admissible = radius.is_finite() && (geometry == Geometry::Euclidean || radius < 1.0);
            EigenRadius { geometry, branch, n, a, r_squared: x, radius, admissible }
        })
        .collect()
}

fn polish(n: u32, geometry: Geometry, a: f64, r: f64) -> f64 {
    let det0 = linear_block(n, geometry, a, r).det();
    if det0 == 0.0 {
        return r;
    }
    let (p, q) = block_radius_derivatives(geometry, r);
    let k = first_order_shift(geometry, a, r);
    let slope = (n as f64).powi(2) * (p - 2.0 * q * k);
    if slope == 0.0 || !slope.is_finite() {
        return r;
    }
    let next = r - det0 / slope;
    let ok = next > 0.0 && (geometry == Geometry::Euclidean || next < 1.0);
    if ok && linear_block(n, geometry, a, next).det().abs() < det0.abs() {
        next
    } else {
        r
    }
}

/// Modes in `[1, n_max]` with a positive root on `branch`, from the closed-form
/// inequalities. `None` for negative slip, where no closed form is claimed.
pub fn lemma_modes(geometry: Geometry, a: f64, branch: RootBranch, n_max: u32) -> Option<Vec<u32>> {
    if a < 0.0 {
        return None;
    }
    let sq = |n: u32| (n as f64) * (n as f64);
    let lt = |n: u32, bound: f64| bound > 0.0 && sq(n) < bound * bound;
    let gt = |n: u32, bound: f64| bound < 0.0 || sq(n) > bound * bound;
    let keep = |n: u32| match (geometry, branch) {
        (Geometry::Euclidean, RootBranch::Minus) => lt(n, a + 2.0) && (a * a <= 2.0 || sq(n) > a * a - 2.0),
        (Geometry::Euclidean, RootBranch::Plus) => n == 1 && a < 1.0,
        // Ties are inadmissible, so n = 1 at a = 1 drops out.
        (Geometry::Hyperbolic, RootBranch::Minus) => gt(n, 2.0 - a),
        (Geometry::Hyperbolic, RootBranch::Plus) => lt(n, a - 2.0) || gt(n, a + 2.0),
    };
    Some((1..=n_max).filter(|&n| keep(n)).collect())
}

/// Admissible modes on a branch. The closed-form set is checked against the
/// sign of every computed root; any disagreement is an error.
pub fn admissible_modes(geometry: Geometry, a: f64, branch: RootBranch, n_max: u32) -> Result<Vec<u32>> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let radii: Vec<EigenRadius> = (1..=n_max)
        .map(|n| eigen_radii(n, geometry, a).into_iter().find(|e| e.branch == branch).expect("both branches"))
        .collect();
    let positive: Vec<u32> = radii.iter().filter(|e| e.r_squared > 0.0).map(|e| e.n).collect();
    if let Some(lemma) = lemma_modes(geometry, a, branch, n_max) {
        if lemma != positive {
            return Err(Error::AdmissibilityMismatch { lemma, numeric: positive });
        }
    }
    Ok(radii.iter().filter(|e| e.admissible).map(|e| e.n).collect())
}

/// `(n - k) / (n + k)`: kernel direction `beta w^n + w^{-n}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelVector {
    pub n: u32,
    pub beta: f64,
}

impl KernelVector {
    pub fn profile(&self, trunc: usize, mfold: usize) -> Result<FourierProfile> {
        let n = self.n as i64;
        FourierProfile::from_modes(trunc, mfold, &[(n, self.beta), (-n, 1.0)])
    }

    /// Coordinates `(b, c)` of the kernel direction.
    pub fn block_coords(&self) -> [f64; 2] {
        [self.beta + 1.0, self.beta - 1.0]
    }
}

fn check_eigenpair(n: u32, geometry: Geometry, a: f64, r: f64) -> Result<()> {
    geometry.check_radius(r)?;
    if n == 0 {
        return Err(Error::InvalidParameter("mode must be positive".into()));
    }
    let block = linear_block(n, geometry, a, r);
    if block.relative_det() > EIGEN_DET_TOL {
        return Err(Error::NotAnEigenpair { n, r, det: block.det() });
    }
    Ok(())
}

pub fn kernel_vector(n: u32, geometry: Geometry, a: f64, r: f64) -> Result<KernelVector> {
    check_eigenpair(n, geometry, a, r)?;
    let k = first_order_shift(geometry, a, r);
    let nf = n as f64;
    if (nf + k).abs() < 1e-12 * nf {
        return Err(Error::DegenerateKernel { n });
    }
    Ok(KernelVector { n, beta: (nf - k) / (nf + k) })
}

/// Vanishes iff `d` is compatible with the range at mode `n`:
/// `d_n + d_{-n} (n + k) / (n - k)`.
pub fn range_defect(d: &FourierProfile, n: u32, geometry: Geometry, a: f64, r: f64) -> Result<f64> {
    check_eigenpair(n, geometry, a, r)?;
    let k = first_order_shift(geometry, a, r);
    let nf = n as f64;
    if (nf - k).abs() < 1e-12 * nf {
        return Err(Error::DegenerateKernel { n });
    }
    let ni = n as i64;
    Ok(d.coeff(ni) + d.coeff(-ni) * (nf + k) / (nf - k))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transversality {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub satisfied: bool,
    pub inconclusive: bool,
}

/// Closed-form transversality inequality `lhs != rhs` with
/// `lhs = (((n + a) S - 2 D) / ((n - a) S + 2 D))^2`,
/// `rhs = (1 - s R^3 - 2 n S) / (1 - s R^3 + 2 n S)`, `S = 1 + s R^2`, `D = 1 - s R^2`.
pub fn transversality_ok(n: u32, geometry: Geometry, a: f64, r: f64) -> Result<Transversality> {
    check_eigenpair(n, geometry, a, r)?;
    let s = geometry.sign();
    let nf = n as f64;
    let x = r * r;
    let (sum, diff) = (1.0 + s * x, 1.0 - s * x);
    let ratio = ((nf + a) * sum - 2.0 * diff) / ((nf - a) * sum + 2.0 * diff);
    let lhs = ratio * ratio;
    let cube = 1.0 - s * x * r;
    let rhs = (cube - 2.0 * nf * sum) / (cube + 2.0 * nf * sum);
    let margin = (lhs - rhs).abs();
    let inconclusive = !margin.is_finite() || margin < TRANSVERSALITY_TOL;
    Ok(Transversality { lhs, rhs, margin, satisfied: !inconclusive, inconclusive })
}

/// `d/dR` of the linearization applied to the kernel direction, as a mode-`±n` series.
pub fn dr_linearized_on_kernel(
    n: u32,
    geometry: Geometry,
    a: f64,
    r: f64,
    trunc: usize,
    mfold: usize,
) -> Result<FourierProfile> {
    let kv = kernel_vector(n, geometry, a, r)?;
    let (p, q) = block_radius_derivatives(geometry, r);
    let nf = n as f64;
    let [b, c] = kv.block_coords();
    let cos = p * b + q * nf * c;
    let sin = q * nf * b;
    let ni = n as i64;
    FourierProfile::from_modes(trunc, mfold, &[(ni, 0.5 * (cos + sin)), (-ni, 0.5 * (cos - sin))])
}

/// Pairing of `d/dR` of the linearization on the kernel against the kernel,
/// normalized by the kernel size. Zero iff transversality fails.
pub fn transversality_pairing(n: u32, geometry: Geometry, a: f64, r: f64) -> Result<f64> {
    let kv = kernel_vector(n, geometry, a, r)?;
    let g = dr_linearized_on_kernel(n, geometry, a, r, n as usize, 1)?;
    let ni = n as i64;
    Ok((kv.beta * g.coeff(ni) + g.coeff(-ni)) / (1.0 + kv.beta * kv.beta))
}

/// Other modes in `mfold Z`, up to `trunc`, whose block is also singular at `r`.
pub fn competing_modes(n: u32, geometry: Geometry, a: f64, r: f64, mfold: usize, trunc: usize) -> Vec<u32> {
    (1..=trunc as u32)
        .filter(|&k| k != n && (k as usize).is_multiple_of(mfold))
        .filter(|&k| linear_block(k, geometry, a, r).relative_det() <= EIGEN_DET_TOL.sqrt())
        .collect()
}

/// Large-mode limit of the Euclidean minus-branch radius along `a = m - theta`.
pub fn limit_radius(theta: f64) -> Result<f64> {
    if !(theta >= 0.0) {
        return Err(Error::InvalidParameter(format!("theta must be non-negative, got {theta}")));
    }
    if theta >= 2.0 {
        return Err(Error::Unbounded(format!("limit radius is infinite for theta = {theta}")));
    }
    Ok((1.0 + 2.0 * theta / (2.0 - theta)).sqrt())
}
