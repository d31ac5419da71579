//! Amplitude-parametrized continuation of the nontrivial branch.
//!
//! Unknowns are `(lambda, R, f_n)` for `n` in `m Z`, `0 < |n| <= M`. Equations are
//! `G_n = 0` for `n` in `m Z`, `|n| <= M` (mode 0 included) and the amplitude
//! constraint `<f, h> = eta <h, h>` where `h` is the kernel direction.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::FourierProfile;
use crate::operator::{eval_g, residual_sup, Geometry, Linearization, ProblemParams};
use crate::spectral::{
    competing_modes, eigen_radii, kernel_vector, transversality_ok, transversality_pairing, KernelVector, RootBranch,
    Transversality,
};

/// Condition number above which a converged point carries a warning.
pub const CONDITION_WARNING: f64 = 1e12;

/// Iteration count above which the marching step is halved once.
pub const SLOW_SOLVE_ITERS: usize = 8;

/// Extra Newton steps allowed once the tolerance is met, while the residual keeps halving.
pub const POLISH_STEPS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JacobianMode {
    /// Derivative of the discrete residual, assembled in closed form.
    Exact,
    /// Forward differences with step `1e-7 (1 + |x|)`.
    FiniteDifference,
}

/// A verified bifurcation point of the trivial family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigenpair {
    pub geometry: Geometry,
    pub a: f64,
    pub n: u32,
    pub branch: Option<RootBranch>,
    pub radius: f64,
    pub kernel: KernelVector,
    pub transversality: Transversality,
    /// Exact pairing of the radius derivative on the kernel with the kernel.
    pub pairing: f64,
}

impl Eigenpair {
    /// Requires an admissible root on `branch` that passes the closed-form transversality test.
    pub fn new(geometry: Geometry, a: f64, n: u32, branch: RootBranch) -> Result<Self> {
        let root = eigen_radii(n, geometry, a)
            .into_iter()
            .find(|e| e.branch == branch)
            .expect("both branches are always returned");
        if !root.admissible {
            return Err(Error::NotAdmissible {
                n,
                reason: format!("{branch} root has R^2 = {} in the {geometry} geometry", root.r_squared),
            });
        }
        let mut pair = Eigenpair::at_radius(geometry, a, n, root.radius)?;
        pair.branch = Some(branch);
        Ok(pair)
    }

    /// Same checks as [`Eigenpair::new`] for a radius supplied directly.
    pub fn at_radius(geometry: Geometry, a: f64, n: u32, radius: f64) -> Result<Self> {
        let kernel = kernel_vector(n, geometry, a, radius)?;
        let transversality = transversality_ok(n, geometry, a, radius)?;
        if !transversality.satisfied {
            return Err(Error::TransversalityFailed {
                n,
                reason: format!("closed-form margin {:.3e} is inconclusive", transversality.margin),
            });
        }
        let pairing = transversality_pairing(n, geometry, a, radius)?;
        Ok(Eigenpair { geometry, a, n, branch: None, radius, kernel, transversality, pairing })
    }

    /// Skips every check. For probing the solver away from genuine eigenpairs.
    pub fn assume(geometry: Geometry, a: f64, n: u32, radius: f64, beta: f64) -> Self {
        let transversality =
            Transversality { lhs: f64::NAN, rhs: f64::NAN, margin: f64::NAN, satisfied: false, inconclusive: true };
        Eigenpair {
            geometry,
            a,
            n,
            branch: None,
            radius,
            kernel: KernelVector { n, beta },
            transversality,
            pairing: f64::NAN,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuationSettings {
    pub trunc: usize,
    pub mfold: usize,
    pub tol: f64,
    pub max_iters: usize,
    pub jacobian: JacobianMode,
}

impl ContinuationSettings {
    pub fn new(mfold: usize) -> Self {
        ContinuationSettings { trunc: 64, mfold, tol: 1e-11, max_iters: 25, jacobian: JacobianMode::Exact }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchPoint {
    pub eta: f64,
    pub params: ProblemParams,
    pub f: FourierProfile,
    pub residual_inf: f64,
    /// Iterations needed to reach the tolerance.
    pub newton_iters: usize,
    /// Further iterations taken while the residual kept halving.
    pub polish_iters: usize,
    /// Angle in radians between `f` and the kernel direction.
    pub kernel_angle: f64,
    pub condition: f64,
    pub near_singular: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub eigenpair: Eigenpair,
    pub points: Vec<BranchPoint>,
    pub direction: i8,
}

/// A marching failure together with the points computed before it.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFailure {
    pub prefix: Branch,
    pub error: Error,
}

impl fmt::Display for TraceFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (after {} converged points)", self.error, self.prefix.points.len())
    }
}

impl std::error::Error for TraceFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Least-squares polynomial fit of `(lambda, R)` against `eta`, evaluated at `eta = 0`.
pub fn extrapolate_to_origin(points: &[BranchPoint], degree: usize) -> Result<(f64, f64)> {
    if points.len() <= degree {
        return Err(Error::InvalidParameter(format!("{} points cannot fit degree {degree}", points.len())));
    }
    let scale = points.iter().fold(0.0_f64, |m, p| m.max(p.eta.abs()));
    let vander = DMatrix::from_fn(points.len(), degree + 1, |i, j| (points[i].eta / scale).powi(j as i32));
    let svd = vander.svd(true, true);
    let fit = |values: DVector<f64>| -> Result<f64> {
        let c =
            svd.solve(&values, 1e-14).map_err(|e| Error::InvalidParameter(format!("least-squares fit failed: {e}")))?;
        Ok(c[0])
    };
    let lambda = fit(DVector::from_iterator(points.len(), points.iter().map(|p| p.params.lambda)))?;
    let r = fit(DVector::from_iterator(points.len(), points.iter().map(|p| p.params.r)))?;
    Ok((lambda, r))
}

/// Least-squares slope of `log |f - eta h|` against `log |eta|` over the points.
pub fn tangency_slope(points: &[BranchPoint], kernel: &FourierProfile) -> Result<f64> {
    let samples: Vec<(f64, f64)> = points
        .iter()
        .map(|p| (p.eta.abs().ln(), (&p.f - &kernel.scaled(p.eta)).l2_norm().ln()))
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    if samples.len() < 2 {
        return Err(Error::InvalidParameter("need two points with nonzero deviation".into()));
    }
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    let sxx: f64 = samples.iter().map(|s| (s.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Grid sup of the residual with the truncation and grid multiplied by `factor`.
pub fn refined_residual(point: &BranchPoint, factor: usize) -> Result<f64> {
    let trunc = point.params.trunc * factor.max(1);
    let params = ProblemParams { trunc, ..point.params };
    let f = point.f.resized(trunc);
    residual_sup(&params, &eval_g(&params, &f)?)
}

/// A continuation problem anchored at one eigenpair.
#[derive(Clone, Debug)]
pub struct Continuation {
    eigenpair: Eigenpair,
    settings: ContinuationSettings,
    unknown_modes: Vec<i64>,
    equation_modes: Vec<i64>,
    kernel: FourierProfile,
}

impl Continuation {
    pub fn new(eigenpair: Eigenpair, settings: ContinuationSettings) -> Result<Self> {
        let n = eigenpair.n as usize;
        if settings.mfold == 0 || !n.is_multiple_of(settings.mfold) {
            return Err(Error::InvalidParameter(format!("mode {n} is not in the {}-fold space", settings.mfold)));
        }
        if n > settings.trunc {
            return Err(Error::InvalidParameter(format!("mode {n} exceeds truncation {}", settings.trunc)));
        }
        if !(settings.tol > 0.0) || settings.max_iters == 0 {
            return Err(Error::InvalidParameter("tolerance and iteration cap must be positive".into()));
        }
        let others = competing_modes(
            eigenpair.n,
            eigenpair.geometry,
            eigenpair.a,
            eigenpair.radius,
            settings.mfold,
            settings.trunc,
        );
        if !others.is_empty() {
            return Err(Error::KernelNotSimple { mfold: settings.mfold, modes: others });
        }
        let kernel = eigenpair.kernel.profile(settings.trunc, settings.mfold)?;
        let equation_modes = kernel.allowed_modes();
        let unknown_modes = equation_modes.iter().copied().filter(|&k| k != 0).collect();
        Ok(Continuation { eigenpair, settings, unknown_modes, equation_modes, kernel })
    }

    pub fn eigenpair(&self) -> &Eigenpair {
        &self.eigenpair
    }

    pub fn settings(&self) -> &ContinuationSettings {
        &self.settings
    }

    pub fn kernel(&self) -> &FourierProfile {
        &self.kernel
    }

    fn base_params(&self, r: f64, lambda: f64) -> ProblemParams {
        ProblemParams {
            geometry: self.eigenpair.geometry,
            a: self.eigenpair.a,
            r,
            lambda,
            mfold: self.settings.mfold,
            trunc: self.settings.trunc,
        }
    }

    /// `f = eta h`, `R = R*`, `lambda = 0`.
    pub fn initial_guess(&self, eta: f64) -> (ProblemParams, FourierProfile) {
        (self.base_params(self.eigenpair.radius, 0.0), self.kernel.scaled(eta))
    }

    fn pack(&self, params: &ProblemParams, f: &FourierProfile) -> DVector<f64> {
        let mut x = DVector::zeros(2 + self.unknown_modes.len());
        x[0] = params.lambda;
        x[1] = params.r;
        for (i, &n) in self.unknown_modes.iter().enumerate() {
            x[2 + i] = f.coeff(n);
        }
        x
    }

    fn unpack(&self, x: &DVector<f64>) -> Result<(ProblemParams, FourierProfile)> {
        let params = self.base_params(x[1], x[0]);
        params.validate()?;
        let mut f = FourierProfile::zeros(self.settings.trunc, self.settings.mfold);
        for (i, &n) in self.unknown_modes.iter().enumerate() {
            f.set(n, x[2 + i]);
        }
        Ok((params, f))
    }

    fn constraint(&self, f: &FourierProfile, eta: f64) -> f64 {
        let h = &self.kernel;
        f.dot(h) - eta * h.dot(h)
    }

    /// Residual vector and its convergence measure.
    fn residual(&self, x: &DVector<f64>, eta: f64) -> Result<(DVector<f64>, f64)> {
        let (params, f) = self.unpack(x)?;
        let g = eval_g(&params, &f)?;
        let c = self.constraint(&f, eta);
        let mut out = DVector::zeros(self.equation_modes.len() + 1);
        for (i, &n) in self.equation_modes.iter().enumerate() {
            out[i] = g.coeff(n);
        }
        out[self.equation_modes.len()] = c;
        let measure = residual_sup(&params, &g)?.max(c.abs());
        Ok((out, measure))
    }

    fn jacobian(&self, x: &DVector<f64>, fx: &DVector<f64>, eta: f64) -> Result<DMatrix<f64>> {
        match self.settings.jacobian {
            JacobianMode::Exact => self.jacobian_exact(x),
            JacobianMode::FiniteDifference => self.jacobian_fd(x, fx, eta),
        }
    }

    fn jacobian_exact(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let (params, f) = self.unpack(x)?;
        let lin = Linearization::new(&params, &f)?;
        let rows = self.equation_modes.len();
        let mut jac = DMatrix::zeros(rows + 1, x.len());
        for (i, &k) in self.equation_modes.iter().enumerate() {
            jac[(i, 0)] = lin.lambda_entry(k);
            jac[(i, 1)] = lin.radius_entry(k);
            for (j, &n) in self.unknown_modes.iter().enumerate() {
                jac[(i, 2 + j)] = lin.entry(k, n);
            }
        }
        for (j, &n) in self.unknown_modes.iter().enumerate() {
            jac[(rows, 2 + j)] = self.kernel.coeff(n);
        }
        Ok(jac)
    }

    fn jacobian_fd(&self, x: &DVector<f64>, fx: &DVector<f64>, eta: f64) -> Result<DMatrix<f64>> {
        let cols: Vec<DVector<f64>> = (0..x.len())
            .into_par_iter()
            .map(|j| {
                let step = 1e-7 * (1.0 + x[j].abs());
                let mut xp = x.clone();
                xp[j] += step;
                let (fp, _) = self.residual(&xp, eta)?;
                Ok((fp - fx) / step)
            })
            .collect::<Result<_>>()?;
        Ok(DMatrix::from_columns(&cols))
    }

    pub fn newton_correct(&self, guess: (ProblemParams, FourierProfile), eta: f64) -> Result<BranchPoint> {
        if eta == 0.0 || !eta.is_finite() {
            return Err(Error::InvalidParameter("amplitude must be finite and nonzero".into()));
        }
        let (gp, gf) = guess;
        if gf.trunc() != self.settings.trunc {
            return Err(Error::TruncationMismatch { profile: gf.trunc(), params: self.settings.trunc });
        }
        let max_iters = self.settings.max_iters;
        let diverged = |iters: usize, residual: f64| Error::Divergence { iters, residual };
        let mut x = self.pack(&gp, &gf);
        let (mut fx, mut measure) = self.residual(&x, eta)?;
        let start = measure;
        let mut last_jac = None;
        let mut iters = 0;
        let mut polishing = false;
        let mut polish = 0;
        loop {
            if measure <= self.settings.tol {
                if polish == POLISH_STEPS {
                    break;
                }
                polishing = true;
            } else if iters >= max_iters {
                return Err(diverged(iters, measure));
            }
            let jac = self.jacobian(&x, &fx, eta).map_err(|_| diverged(iters, measure))?;
            let dx = jac.clone().lu().solve(&(-&fx)).ok_or_else(|| diverged(iters, measure))?;
            let trial = &x + dx;
            let outcome = self.residual(&trial, eta);
            if polishing {
                // Past tolerance: accept only clear improvements.
                match outcome {
                    Ok((next, m)) if m < 0.5 * measure => {
                        x = trial;
                        fx = next;
                        measure = m;
                        polish += 1;
                        last_jac = Some(jac);
                        continue;
                    }
                    _ => {
                        last_jac.get_or_insert(jac);
                        break;
                    }
                }
            }
            iters += 1;
            match outcome {
                Ok((next, m)) if m.is_finite() && m < 1e6 * start.max(1.0) => {
                    x = trial;
                    fx = next;
                    measure = m;
                }
                Ok((_, m)) => return Err(diverged(iters, m)),
                Err(_) => return Err(diverged(iters, measure)),
            }
            last_jac = Some(jac);
        }
        let jac = match last_jac {
            Some(j) => j,
            None => self.jacobian(&x, &fx, eta)?,
        };
        let sv = jac.singular_values();
        let smax = sv.max();
        let smin = sv.min();
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        let (params, f) = self.unpack(&x)?;
        let cos = f.dot(&self.kernel).abs() / (f.l2_norm() * self.kernel.l2_norm());
        Ok(BranchPoint {
            eta,
            params,
            f,
            residual_inf: measure,
            newton_iters: iters,
            polish_iters: polish,
            kernel_angle: cos.min(1.0).acos(),
            condition,
            near_singular: condition > CONDITION_WARNING,
        })
    }

    /// Linear extrapolation from the last two points, or scaling from the last one.
    fn predict(&self, points: &[BranchPoint], eta: f64) -> (ProblemParams, FourierProfile) {
        match points {
            [] => self.initial_guess(eta),
            [p] => {
                let ratio = eta / p.eta;
                (p.params, p.f.scaled(ratio))
            }
            [.., p0, p1] => {
                let t = (eta - p1.eta) / (p1.eta - p0.eta);
                let x0 = self.pack(&p0.params, &p0.f);
                let x1 = self.pack(&p1.params, &p1.f);
                let x = &x1 + (&x1 - &x0) * t;
                self.unpack(&x).unwrap_or((p1.params, p1.f.clone()))
            }
        }
    }

    fn advance(&self, points: &[BranchPoint], eta: f64) -> Result<BranchPoint> {
        let first = self.newton_correct(self.predict(points, eta), eta);
        if let Ok(p) = &first {
            if p.newton_iters <= SLOW_SOLVE_ITERS {
                return first;
            }
        }
        let prev = points.last().map_or(0.0, |p| p.eta);
        let halved = (|| {
            let mid_eta = 0.5 * (prev + eta);
            let mid = self.newton_correct(self.predict(points, mid_eta), mid_eta)?;
            let mut trail = points.to_vec();
            trail.push(mid);
            self.newton_correct(self.predict(&trail, eta), eta)
        })();
        match (first, halved) {
            (_, Ok(p)) => Ok(p),
            (Ok(p), Err(_)) => Ok(p),
            (Err(_), Err(e)) => Err(e),
        }
    }

    /// Marches `eta` over `steps` uniform increments from `eta_max / steps` to `eta_max`.
    pub fn trace_branch(&self, eta_max: f64, steps: usize) -> std::result::Result<Branch, TraceFailure> {
        let mut branch = Branch {
            eigenpair: self.eigenpair,
            points: Vec::with_capacity(steps),
            direction: if eta_max < 0.0 { -1 } else { 1 },
        };
        if steps == 0 || eta_max == 0.0 || !eta_max.is_finite() {
            return Err(TraceFailure {
                prefix: branch,
                error: Error::InvalidParameter("need at least one step and a finite nonzero amplitude".into()),
            });
        }
        for k in 1..=steps {
            let eta = eta_max * k as f64 / steps as f64;
            match self.advance(&branch.points, eta) {
                Ok(p) => branch.points.push(p),
                Err(error) => return Err(TraceFailure { prefix: branch, error }),
            }
        }
        Ok(branch)
    }

    /// Traces both directions `+eta_max` and `-eta_max` concurrently.
    pub fn trace_both(&self, eta_max: f64, steps: usize) -> std::result::Result<(Branch, Branch), TraceFailure> {
        let (pos, neg) =
            rayon::join(|| self.trace_branch(eta_max.abs(), steps), || self.trace_branch(-eta_max.abs(), steps));
        Ok((pos?, neg?))
    }
}
