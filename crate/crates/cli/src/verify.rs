//! Compact invariant suite behind the `verify` command.

use binormal::continuation::{
    extrapolate_to_origin, refined_residual, tangency_slope, Continuation, ContinuationSettings, Eigenpair,
};
use binormal::evolve::steadiness_error;
use binormal::fourier::FourierProfile;
use binormal::kida::{beta_cubic, defect_of_tangents, fit_helix, minimize_defect, modulus_variation};
use binormal::operator::{apply_linearized, eval_g, residual_sup};
use binormal::reconstruct::{
    arclength_derivatives, binormal_residual, curve_from_tangent, curve_with_time_integral, quadratic_form,
    time_integral_quadrature, time_slices, uniform_grid, SteadyProfile, TangentPrimitive,
};
use binormal::spectral::{
    dr_linearized_on_kernel, eigen_radii, kernel_vector, linear_block, range_defect, transversality_ok,
};
use binormal::{Geometry, ProblemParams, Result as CoreResult, RootBranch};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{write_table, Meta, Table};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub property: &'static str,
    pub value: f64,
    pub threshold: f64,
    /// `true` when the value must stay at or below the threshold, `false` when it must exceed it.
    pub upper: bool,
}

impl Check {
    fn at_most(property: &'static str, value: f64, threshold: f64) -> Self {
        Check { property, value, threshold, upper: true }
    }

    fn above(property: &'static str, value: f64, threshold: f64) -> Self {
        Check { property, value, threshold, upper: false }
    }

    pub fn passed(&self) -> bool {
        if self.upper {
            self.value <= self.threshold
        } else {
            self.value > self.threshold
        }
    }
}

const SEED: u64 = 0x5eed_b1f0;

fn random_profile(rng: &mut StdRng, trunc: usize, mfold: usize) -> CoreResult<FourierProfile> {
    let modes: Vec<(i64, f64)> = (1..=trunc as i64)
        .filter(|n| n % mfold as i64 == 0)
        .flat_map(|n| [n, -n])
        .map(|n| (n, rng.random_range(-1.0..1.0) / (1.0 + (n * n) as f64)))
        .collect();
    FourierProfile::from_modes(trunc, mfold, &modes)
}

fn trivial_residual(trunc: usize) -> CoreResult<f64> {
    let mut worst: f64 = 0.0;
    let cases = [(Geometry::Euclidean, vec![0.25, 0.5, 1.0, 2.0, 5.0]), (Geometry::Hyperbolic, vec![0.25, 0.5, 0.9])];
    for (geometry, radii) in cases {
        for r in radii {
            for a in [0.0, 0.5, 1.0, 3.0] {
                let params = ProblemParams::new(geometry, a, r, 0.0, 1, trunc)?;
                let g = eval_g(&params, &FourierProfile::zeros(trunc, 1))?;
                worst = worst.max(residual_sup(&params, &g)?);
            }
        }
    }
    Ok(worst)
}

fn linearization_error(rng: &mut StdRng, trunc: usize) -> CoreResult<f64> {
    let eps = 1e-6;
    let mut worst: f64 = 0.0;
    for (geometry, a, r) in
        [(Geometry::Euclidean, 0.0, 1.0), (Geometry::Euclidean, 0.5, 0.7), (Geometry::Hyperbolic, 0.3, 0.5)]
    {
        let params = ProblemParams::new(geometry, a, r, 0.0, 1, trunc)?;
        for _ in 0..5 {
            let h = random_profile(rng, trunc, 1)?;
            let plus = eval_g(&params, &h.scaled(eps))?;
            let minus = eval_g(&params, &h.scaled(-eps))?;
            let lin = apply_linearized(&params, &h)?;
            let mut err: f64 = 0.0;
            for n in -(trunc as i64)..=trunc as i64 {
                let fd = (plus.coeff(n) - minus.coeff(n)) / (2.0 * eps);
                err = err.max((fd - lin.coeff(n)).abs());
            }
            worst = worst.max(err / lin.max_abs());
        }
    }
    Ok(worst)
}

fn eigen_determinants() -> f64 {
    let mut worst: f64 = 0.0;
    for geometry in [Geometry::Euclidean, Geometry::Hyperbolic] {
        for a in [0.0, 0.5, 3.0] {
            for n in 1..=20 {
                for root in eigen_radii(n, geometry, a).into_iter().filter(|r| r.admissible) {
                    worst = worst.max(linear_block(n, geometry, a, root.radius).relative_det().abs());
                }
            }
        }
    }
    worst
}

fn radius(geometry: Geometry, a: f64, n: u32, branch: RootBranch) -> f64 {
    eigen_radii(n, geometry, a).into_iter().find(|r| r.branch == branch).map_or(f64::NAN, |r| r.radius)
}

fn hyperbolic_pairs() -> Vec<(u32, f64)> {
    (3..=20).map(|n| (n, radius(Geometry::Hyperbolic, 0.0, n, RootBranch::Minus))).collect()
}

fn kernel_checks(trunc: usize) -> CoreResult<(f64, f64)> {
    let mut annihilated: f64 = 0.0;
    let mut defect_on_kernel = f64::INFINITY;
    let mut pairs = vec![(Geometry::Euclidean, 1, 1.0)];
    pairs.extend(hyperbolic_pairs().into_iter().map(|(n, r)| (Geometry::Hyperbolic, n, r)));
    for (geometry, n, r) in pairs {
        let h = kernel_vector(n, geometry, 0.0, r)?.profile(trunc, 1)?;
        let params = ProblemParams::new(geometry, 0.0, r, 0.0, 1, trunc)?;
        annihilated = annihilated.max(apply_linearized(&params, &h)?.max_abs());
        defect_on_kernel = defect_on_kernel.min(range_defect(&h, n, geometry, 0.0, r)?.abs());
    }
    Ok((annihilated, defect_on_kernel))
}

/// Cases where the closed-form inequality and the operator-level test disagree.
fn transversality_disagreements(trunc: usize) -> CoreResult<f64> {
    let mut pairs = vec![(Geometry::Euclidean, 1, 1.0)];
    pairs.extend(hyperbolic_pairs().into_iter().map(|(n, r)| (Geometry::Hyperbolic, n, r)));
    let mut disagreements = 0;
    for (geometry, n, r) in pairs {
        let closed = transversality_ok(n, geometry, 0.0, r)?.satisfied;
        let mixed = dr_linearized_on_kernel(n, geometry, 0.0, r, trunc, 1)?;
        let oracle = range_defect(&mixed, n, geometry, 0.0, r)?.abs() > 1e-10 * (1.0 + mixed.max_abs());
        if closed != oracle {
            disagreements += 1;
        }
    }
    Ok(f64::from(disagreements))
}

fn checks(cfg: &RunConfig) -> CoreResult<Vec<Check>> {
    let trunc = cfg.trunc;
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut out = vec![
        Check::at_most("trivial_residual", trivial_residual(trunc)?, 1e-12),
        Check::at_most("linearization_fd_error", linearization_error(&mut rng, trunc)?, 1e-6),
        Check::at_most("eigen_radius_det", eigen_determinants(), 1e-10),
        Check::at_most(
            "hyperbolic_r3",
            (radius(Geometry::Hyperbolic, 0.0, 3, RootBranch::Minus) - ((11.0 - 4.0 * 6f64.sqrt()) / 5.0).sqrt()).abs(),
            1e-12,
        ),
    ];
    let (annihilated, defect_on_kernel) = kernel_checks(trunc)?;
    out.push(Check::at_most("kernel_annihilated", annihilated, 1e-10));
    out.push(Check::above("range_defect_on_kernel", defect_on_kernel, 1e-10));
    let hyperbolic_failures = hyperbolic_pairs()
        .into_iter()
        .map(|(n, r)| transversality_ok(n, Geometry::Hyperbolic, 0.0, r).map(|t| !t.satisfied))
        .collect::<CoreResult<Vec<bool>>>()?
        .into_iter()
        .filter(|&failed| failed)
        .count();
    out.push(Check::at_most("transversality_closed_form_failures", hyperbolic_failures as f64, 0.0));
    out.push(Check::at_most("transversality_oracle_disagreements", transversality_disagreements(trunc)?, 0.0));

    let settings = ContinuationSettings { trunc, mfold: 3, tol: cfg.tol, max_iters: 25, jacobian: cfg.jacobian };
    let c = Continuation::new(Eigenpair::new(Geometry::Hyperbolic, 0.0, 3, RootBranch::Minus)?, settings)?;
    let (pos, neg) = c.trace_both(0.05, 10).map_err(|f| f.error)?;
    let mut refined: f64 = 0.0;
    let mut off_mfold: f64 = 0.0;
    for p in pos.points.iter().chain(&neg.points) {
        refined = refined.max(refined_residual(p, 2)?);
        off_mfold = off_mfold.max(p.f.off_mfold_max(3));
    }
    let mut all: Vec<_> = neg.points.iter().chain(&pos.points).cloned().collect();
    all.sort_by(|p, q| p.eta.total_cmp(&q.eta));
    let (lambda0, r0) = extrapolate_to_origin(&all, 4)?;
    out.push(Check::at_most("branch_refined_residual", refined, cfg.tol));
    out.push(Check::above("branch_tangency_slope", tangency_slope(&pos.points, c.kernel())?, 1.9));
    out.push(Check::at_most("branch_extrapolation", lambda0.abs().max((r0 - c.eigenpair().radius).abs()), 1e-6));
    out.push(Check::at_most("branch_off_mfold", off_mfold, 1e-13));

    let helix = SteadyProfile::trivial(Geometry::Euclidean, 0.3, 0.5)?;
    out.push(Check::at_most("steady_helix", steadiness_error(&helix, 0.1, 1e-4, trunc, 10)?.max_error, 1e-8));
    let point = c.newton_correct(c.initial_guess(1e-2), 1e-2)?;
    let branch_profile = SteadyProfile::from_point(&point);
    out.push(Check::at_most("steady_branch", steadiness_error(&branch_profile, 0.1, 1e-4, trunc, 10)?.max_error, 1e-6));

    let s = uniform_grid(256, 1);
    let sample = curve_from_tangent(&branch_profile, 0.0, &s)?;
    let normalization =
        sample.tangent.iter().map(|t| (quadratic_form(*t, Geometry::Hyperbolic) + 1.0).abs()).fold(0.0, f64::max);
    out.push(Check::at_most("tangent_normalization", normalization, 1e-12));
    let (xs, _) = arclength_derivatives(&sample)?;
    let mismatch =
        xs.iter().zip(&sample.tangent).flat_map(|(d, t)| (0..3).map(move |i| (d[i] - t[i]).abs())).fold(0.0, f64::max);
    out.push(Check::at_most("arclength_derivative", mismatch, 1e-10));
    let [prev, mid, next] = time_slices(&branch_profile, 0.0, 1e-3, 256, 1)?;
    out.push(Check::at_most("binormal_residual", binormal_residual(&prev, &mid, &next)?, 1e-4));
    let later = curve_from_tangent(&branch_profile, 0.7, &s)?;
    let prim = TangentPrimitive::new(&branch_profile)?;
    let quad =
        curve_with_time_integral(&branch_profile, &prim, 0.7, &s, time_integral_quadrature(&branch_profile, 0.7)?)?;
    let gap =
        later.x.iter().zip(&quad.x).flat_map(|(p, q)| (0..3).map(move |i| (p[i] - q[i]).abs())).fold(0.0, f64::max);
    out.push(Check::at_most("closed_form_vs_quadrature", gap, 1e-10));

    let trivial_sample = curve_from_tangent(&helix, 0.0, &s)?;
    out.push(Check::at_most("helix_modulus_variation", modulus_variation(&trivial_sample.z), 1e-14));
    out.push(Check::above("branch_modulus_variation", modulus_variation(&sample.z), 1e-4));
    let mut zero_cubics = 0;
    for i in 0..10 {
        for j in 0..10 {
            for k in 0..10 {
                for l in 0..10 {
                    let (a_const, v, omega, slip) =
                        (-5.0 + 1.1 * i as f64, -3.0 + 0.7 * j as f64, 0.35 + 0.4 * k as f64, -2.0 + 0.45 * l as f64);
                    if let Ok(c) = beta_cubic(a_const, v, omega, slip) {
                        if c.iter().all(|x| x.abs() <= 1e-12) {
                            zero_cubics += 1;
                        }
                    }
                }
            }
        }
    }
    out.push(Check::at_most("zero_beta_cubics", f64::from(zero_cubics), 0.0));
    let r = 0.5;
    let fit = fit_helix(2.0 * r / (1.0 + r * r), (1.0 - r * r) / (1.0 + r * r), helix.omega(), 0.3)?;
    out.push(Check::at_most("fitted_helix_defect", defect_of_tangents(&trivial_sample.tangent, &fit)?, 1e-10));

    let e = Continuation::new(
        Eigenpair::new(Geometry::Euclidean, 1.5, 3, RootBranch::Minus)?,
        ContinuationSettings { trunc, mfold: 3, tol: cfg.tol, max_iters: 25, jacobian: cfg.jacobian },
    )?;
    let p = e.newton_correct(e.initial_guess(1e-3), 1e-3)?;
    let euclid = curve_from_tangent(&SteadyProfile::from_point(&p), 0.0, &uniform_grid(128, 1))?;
    let pr = p.params.r;
    let center = fit_helix(2.0 * pr / (1.0 + pr * pr), (1.0 - pr * pr) / (1.0 + pr * pr), p.params.omega(), 1.5)?;
    let width = (0.5 * center.a_const.abs().max(1.0), 0.5 * center.v.abs().max(1.0));
    let margin = minimize_defect(&euclid.tangent, &center, width, 201)?.defect;
    out.push(Check::above("branch_compatibility_margin", margin, 1e-6));
    Ok(out)
}

/// Runs every check, writes `verify.csv`, and fails if any check failed.
pub fn verify(cfg: &RunConfig, meta: &Meta) -> CliResult<Vec<String>> {
    let results = checks(cfg)?;
    let mut table = Table::new(&["property", "status", "value", "threshold"]);
    let mut lines = Vec::new();
    for c in &results {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        let relation = if c.upper { "<=" } else { ">" };
        lines.push(format!("{status} {:<38} {:.3e} {relation} {:.1e}", c.property, c.value, c.threshold));
        table.push(vec![c.property.into(), status.into(), c.value.into(), c.threshold.into()]);
    }
    let path = write_table(&cfg.out, "verify", &table, meta, cfg.format)?;
    let failed = results.iter().filter(|c| !c.passed()).count();
    lines.push(format!("{} of {} checks passed; wrote {}", results.len() - failed, results.len(), path.display()));
    if failed > 0 {
        for l in &lines {
            println!("{l}");
        }
        return Err(CliError::Verify { failed, total: results.len() });
    }
    Ok(lines)
}
