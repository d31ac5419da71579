use binormal::continuation::{
    extrapolate_to_origin, refined_residual, tangency_slope, BranchPoint, Continuation, ContinuationSettings, Eigenpair,
};
use binormal::evolve::steadiness_error;
use binormal::kida::{fit_helix, kida_compatibility_defect, minimize_defect, modulus_variation, GridMinimum};
use binormal::operator::apply_linearized;
use binormal::reconstruct::{
    arclength_derivatives, binormal_residual, curve_from_tangent, quadratic_form, time_slices, uniform_grid,
    SteadyProfile,
};
use binormal::spectral::{eigen_radii, range_defect, transversality_ok};
use binormal::{Geometry, ProblemParams, RootBranch};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{write_json, write_table, Meta, Table};

fn settings(cfg: &RunConfig) -> ContinuationSettings {
    ContinuationSettings { trunc: cfg.trunc, mfold: cfg.m, tol: cfg.tol, max_iters: 25, jacobian: cfg.jacobian }
}

fn continuation(cfg: &RunConfig) -> CliResult<Continuation> {
    let pair = Eigenpair::new(cfg.geometry, cfg.a, cfg.n, cfg.branch)?;
    Ok(Continuation::new(pair, settings(cfg))?)
}

fn eigenpair_json(p: &Eigenpair) -> Value {
    json!({
        "n": p.n,
        "branch": p.branch.map(RootBranch::name),
        "radius": p.radius,
        "beta": p.kernel.beta,
        "lhs": p.transversality.lhs,
        "rhs": p.transversality.rhs,
        "margin": p.transversality.margin,
        "pairing": p.pairing,
    })
}

/// The trivial helix when `r` is set, otherwise the branch point at `eta`.
pub fn select_profile(cfg: &RunConfig) -> CliResult<(SteadyProfile, Option<BranchPoint>)> {
    if let Some(r) = cfg.r {
        return Ok((SteadyProfile::trivial(cfg.geometry, cfg.a, r)?, None));
    }
    let c = continuation(cfg)?;
    let branch = c.trace_branch(cfg.eta, cfg.steps).map_err(|f| CliError::Core(f.error))?;
    let point = branch.points.last().expect("trace returns every step").clone();
    Ok((SteadyProfile::from_point(&point), Some(point)))
}

fn profile_json(profile: &SteadyProfile, point: Option<&BranchPoint>) -> Value {
    json!({
        "R": profile.params.r,
        "lambda": profile.params.lambda,
        "omega": profile.omega(),
        "eta": point.map(|p| p.eta),
        "trivial": point.is_none(),
    })
}

pub fn eigenvalues(cfg: &RunConfig, meta: &Meta) -> CliResult<Vec<String>> {
    let mut table = Table::new(&["n", "branch", "R_squared", "R", "admissible", "transversal", "margin"]);
    let mut lines = vec![format!("{:>4} {:>6} {:>22} {:>11} {:>12}", "n", "branch", "R", "admissible", "transversal")];
    for n in 1..=cfg.nmax {
        for root in eigen_radii(n, cfg.geometry, cfg.a) {
            let tr = if root.admissible { transversality_ok(n, cfg.geometry, cfg.a, root.radius).ok() } else { None };
            let transversal = tr.is_some_and(|t| t.satisfied);
            let margin = tr.map_or(f64::NAN, |t| t.margin);
            lines.push(format!(
                "{n:>4} {:>6} {:>22.16} {:>11} {:>12}",
                root.branch.name(),
                root.radius,
                root.admissible,
                transversal
            ));
            table.push(vec![
                n.into(),
                root.branch.name().into(),
                root.r_squared.into(),
                root.radius.into(),
                root.admissible.into(),
                transversal.into(),
                margin.into(),
            ]);
        }
    }
    let path = write_table(&cfg.out, "eigenvalues", &table, meta, cfg.format)?;
    lines.push(format!("wrote {}", path.display()));
    Ok(lines)
}

pub fn kernel(cfg: &RunConfig, meta: &Meta) -> CliResult<Vec<String>> {
    let pair = Eigenpair::new(cfg.geometry, cfg.a, cfg.n, cfg.branch)?;
    let params = ProblemParams::new(cfg.geometry, cfg.a, pair.radius, 0.0, cfg.m, cfg.trunc)?;
    let h = pair.kernel.profile(cfg.trunc, cfg.m)?;
    let annihilated = apply_linearized(&params, &h)?.max_abs();
    let defect = range_defect(&h, cfg.n, cfg.geometry, cfg.a, pair.radius)?;
    let mut table = Table::new(&[
        "n",
        "branch",
        "R",
        "beta",
        "lhs",
        "rhs",
        "transversal",
        "pairing",
        "image_of_kernel",
        "range_defect",
    ]);
    table.push(vec![
        cfg.n.into(),
        cfg.branch.name().into(),
        pair.radius.into(),
        pair.kernel.beta.into(),
        pair.transversality.lhs.into(),
        pair.transversality.rhs.into(),
        pair.transversality.satisfied.into(),
        pair.pairing.into(),
        annihilated.into(),
        defect.into(),
    ]);
    let path = write_table(&cfg.out, "kernel", &table, meta, cfg.format)?;
    Ok(vec![
        format!("R* = {:.16}  beta = {:.16}", pair.radius, pair.kernel.beta),
        format!(
            "closed-form transversality: lhs = {:.6e}, rhs = {:.6e}",
            pair.transversality.lhs, pair.transversality.rhs
        ),
        format!("|L h| = {annihilated:.3e}, range defect of h = {defect:.6e}"),
        format!("wrote {}", path.display()),
    ])
}

pub fn bifurcate(cfg: &RunConfig, meta: &Meta) -> CliResult<Vec<String>> {
    let c = continuation(cfg)?;
    let traced = if cfg.one_sided {
        c.trace_branch(cfg.eta_max, cfg.steps).map(|b| b.points)
    } else {
        c.trace_both(cfg.eta_max, cfg.steps).map(|(p, n)| n.points.into_iter().chain(p.points).collect())
    };
    let (mut points, failure) = match traced {
        Ok(points) => (points, None),
        Err(f) => (f.prefix.points.clone(), Some(f.error)),
    };
    points.sort_by(|p, q| p.eta.total_cmp(&q.eta));

    let mut table = Table::new(&["eta", "R", "lambda", "residual_inf", "newton_iters", "f_norm"]);
    let mut coeffs = Table::new(&["eta", "n", "f_n"]);
    for p in &points {
        table.push(vec![
            p.eta.into(),
            p.params.r.into(),
            p.params.lambda.into(),
            p.residual_inf.into(),
            p.newton_iters.into(),
            p.f.l2_norm().into(),
        ]);
        for n in p.f.allowed_modes().into_iter().filter(|&n| n != 0) {
            coeffs.push(vec![p.eta.into(), n.into(), p.f.coeff(n).into()]);
        }
    }
    let branch_path = write_table(&cfg.out, "branch", &table, meta, cfg.format)?;
    write_table(&cfg.out, "coefficients", &coeffs, meta, cfg.format)?;
    if let Some(e) = failure {
        return Err(e.into());
    }

    let degree = 4.min(points.len().saturating_sub(1));
    let (lambda0, r0) = extrapolate_to_origin(&points, degree)?;
    let positive: Vec<BranchPoint> = points.iter().filter(|p| p.eta > 0.0).cloned().collect();
    let slope = tangency_slope(&positive, c.kernel()).ok();
    let mut refined: f64 = 0.0;
    for p in &points {
        refined = refined.max(refined_residual(p, 2)?);
    }
    let max_of = |f: &dyn Fn(&BranchPoint) -> f64| points.iter().map(f).fold(0.0, f64::max);
    let summary = json!({
        "eigenpair": eigenpair_json(c.eigenpair()),
        "points": points.len(),
        "extrapolation": { "degree": degree, "lambda0": lambda0, "R0": r0, "R0_error": r0 - c.eigenpair().radius },
        "tangency_slope": slope,
        "max_residual_inf": max_of(&|p| p.residual_inf),
        "max_refined_residual": refined,
        "max_off_mfold": max_of(&|p| p.f.off_mfold_max(cfg.m)),
        "max_condition": max_of(&|p| p.condition),
        "near_singular_points": points.iter().filter(|p| p.near_singular).count(),
    });
    write_json(&cfg.out, "summary", meta, summary)?;
    Ok(vec![
        format!("{} points, max residual {:.3e}", points.len(), max_of(&|p| p.residual_inf)),
        format!("extrapolated lambda0 = {lambda0:.3e}, R0 - R* = {:.3e}", r0 - c.eigenpair().radius),
        format!("wrote {}", branch_path.display()),
    ])
}

pub fn reconstruct(cfg: &RunConfig, meta: &Meta) -> CliResult<Vec<String>> {
    let (profile, point) = select_profile(cfg)?;
    let s = uniform_grid(cfg.nodes, cfg.periods);
    let sample = curve_from_tangent(&profile, cfg.t, &s)?;
    let mut table = Table::new(&["s", "re_z", "im_z", "T1", "T2", "T3", "X1", "X2", "X3"]);
    for j in 0..s.len() {
        let (z, t, x) = (sample.z[j], sample.tangent[j], sample.x[j]);
        table.push(vec![
            s[j].into(),
            z.re.into(),
            z.im.into(),
            t[0].into(),
            t[1].into(),
            t[2].into(),
            x[0].into(),
            x[1].into(),
            x[2].into(),
        ]);
    }
    let path = write_table(&cfg.out, "profile", &table, meta, cfg.format)?;
    let sign = cfg.geometry.sign();
    let normalization =
        sample.tangent.iter().map(|t| (quadratic_form(*t, cfg.geometry) - sign).abs()).fold(0.0, f64::max);
    let (xs, _) = arclength_derivatives(&sample)?;
    let tangent_match = xs
        .iter()
        .zip(&sample.tangent)
        .map(|(d, t)| (0..3).map(|i| (d[i] - t[i]).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    let delta = profile.default_delta();
    let [a, b, c] = time_slices(&profile, cfg.t, delta, cfg.nodes, cfg.periods)?;
    let residual = binormal_residual(&a, &b, &c)?;
    let summary = json!({
        "profile": profile_json(&profile, point.as_ref()),
        "t": cfg.t,
        "nodes": cfg.nodes,
        "periods": cfg.periods,
        "normalization_error": normalization,
        "arclength_derivative_error": tangent_match,
        "delta": delta,
        "binormal_residual": residual,
    });
    write_json(&cfg.out, "reconstruct", meta, summary)?;
    Ok(vec![
        format!("normalization error {normalization:.3e}, |X_s - T| {tangent_match:.3e}"),
        format!("binormal residual {residual:.3e} at delta {delta:.1e}"),
        format!("wrote {}", path.display()),
    ])
}

pub fn check_steady(cfg: &RunConfig, meta: &Meta) -> CliResult<Vec<String>> {
    let (profile, point) = select_profile(cfg)?;
    let report = steadiness_error(&profile, cfg.t_final, cfg.dt, cfg.trunc, cfg.checkpoints)?;
    let mut table = Table::new(&["t", "relative_error"]);
    for &(t, e) in &report.checkpoints {
        table.push(vec![t.into(), e.into()]);
    }
    let path = write_table(&cfg.out, "steadiness", &table, meta, cfg.format)?;
    let summary = json!({
        "profile": profile_json(&profile, point.as_ref()),
        "t_final": cfg.t_final,
        "dt": cfg.dt,
        "steps": report.steps,
        "max_error": report.max_error,
    });
    write_json(&cfg.out, "steady", meta, summary)?;
    Ok(vec![
        format!("max relative error {:.3e} over {} steps", report.max_error, report.steps),
        format!("wrote {}", path.display()),
    ])
}

fn grid_json(g: &GridMinimum) -> Value {
    json!({
        "margin": g.defect,
        "A": g.params.a_const,
        "V": g.params.v,
        "spacing_A": g.spacing.0,
        "spacing_V": g.spacing.1,
        "cells": g.cells,
    })
}

pub fn kida_check(cfg: &RunConfig, meta: &Meta) -> CliResult<Vec<String>> {
    let (profile, point) = select_profile(cfg)?;
    let sample = curve_from_tangent(&profile, 0.0, &uniform_grid(cfg.nodes, 1))?;
    let variation = modulus_variation(&sample.z);
    let mut lines = vec![format!("modulus variation {variation:.3e}")];
    let mut compat = Value::Null;
    if cfg.geometry == Geometry::Euclidean {
        let r = profile.params.r;
        let rho = 2.0 * r / (1.0 + r * r);
        let h = (1.0 - r * r) / (1.0 + r * r);
        compat = match fit_helix(rho, h, profile.omega(), cfg.a) {
            Ok(fit) => {
                let at_fit = kida_compatibility_defect(&sample, &fit)?;
                let width = (0.5 * fit.a_const.abs().max(1.0), 0.5 * fit.v.abs().max(1.0));
                let grid = minimize_defect(&sample.tangent, &fit, width, cfg.cells)?;
                lines.push(format!("defect at helix fit {at_fit:.3e}, grid minimum {:.3e}", grid.defect));
                json!({ "fit_A": fit.a_const, "fit_V": fit.v, "defect_at_fit": at_fit, "grid": grid_json(&grid) })
            }
            Err(e) => {
                lines.push(format!("no helix fit: {e}"));
                json!({ "fit_error": e.to_string() })
            }
        };
    } else {
        lines.push("compatibility relation applies to the Euclidean geometry only".into());
    }
    let summary = json!({
        "profile": profile_json(&profile, point.as_ref()),
        "modulus_variation": variation,
        "compatibility": compat,
    });
    let path = write_json(&cfg.out, "kida", meta, summary)?;
    lines.push(format!("wrote {}", path.display()));
    Ok(lines)
}
