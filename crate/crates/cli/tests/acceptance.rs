//! Acceptance suite. One PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_RED` are reported as FAIL without failing the run; any other
//! failure, or a known-red criterion that starts passing, makes the process exit nonzero.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use binormal::continuation::{
    extrapolate_to_origin, refined_residual, tangency_slope, BranchPoint, Continuation, ContinuationSettings, Eigenpair,
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
use binormal::{Geometry, ProblemParams, RootBranch};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

const TRUNC: usize = 64;

/// Criterion 5 asks the operator-level test to agree with the closed-form inequality in every case.
/// At the Euclidean circle the mixed derivative applied to the kernel lands in the range, while
/// the closed form reports LHS = 1, RHS = -1. The disagreement is genuine, so the criterion stays red.
const KNOWN_RED: &[u32] = &[5];

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn random_profile(rng: &mut StdRng, trunc: usize, mfold: usize, with_mean: bool) -> FourierProfile {
    let lo = if with_mean { 0 } else { 1 };
    let mut modes = Vec::new();
    for n in (lo..=trunc as i64).filter(|n| n % mfold as i64 == 0) {
        let decay = 1.0 + (n * n) as f64;
        modes.push((n, rng.random_range(-1.0..1.0) / decay));
        if n != 0 {
            modes.push((-n, rng.random_range(-1.0..1.0) / decay));
        }
    }
    FourierProfile::from_modes(trunc, mfold, &modes).unwrap()
}

/// Determinant of the per-mode block written out independently of the library.
fn block_det(n: u32, geometry: Geometry, a: f64, r: f64) -> f64 {
    let s = geometry.sign();
    let x = r * r;
    let nn = f64::from(n * n);
    let k = 2.0 * (1.0 - s * x) / (1.0 + s * x) - a;
    let d11 = -4.0 * s * x / ((1.0 + s * x) * (1.0 + s * x)) + nn;
    d11 * nn - k * k * nn
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "no sign change on [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn root(geometry: Geometry, a: f64, n: u32, branch: RootBranch) -> f64 {
    eigen_radii(n, geometry, a).into_iter().find(|r| r.branch == branch).unwrap().radius
}

fn sup_diff(p: &FourierProfile, q: &FourierProfile) -> f64 {
    let m = p.trunc().max(q.trunc()) as i64;
    (-m..=m).map(|n| (p.coeff(n) - q.coeff(n)).abs()).fold(0.0, f64::max)
}

fn continuation(geometry: Geometry, a: f64, n: u32, branch: RootBranch, mfold: usize) -> Result<Continuation, String> {
    let pair = Eigenpair::new(geometry, a, n, branch).map_err(e)?;
    Continuation::new(pair, ContinuationSettings::new(mfold)).map_err(e)
}

fn two_sided(c: &Continuation) -> Result<(Vec<BranchPoint>, Vec<BranchPoint>), String> {
    let (pos, neg) = c.trace_both(0.05, 10).map_err(|f| e(f.error))?;
    let mut all: Vec<BranchPoint> = neg.points.iter().chain(&pos.points).cloned().collect();
    all.sort_by(|p, q| p.eta.total_cmp(&q.eta));
    Ok((pos.points, all))
}

fn trivial_residual() -> Outcome {
    let mut worst: f64 = 0.0;
    let cases = [(Geometry::Euclidean, vec![0.25, 0.5, 1.0, 2.0, 5.0]), (Geometry::Hyperbolic, vec![0.25, 0.5, 0.9])];
    for (geometry, radii) in cases {
        for r in radii {
            for a in [0.0, 0.5, 1.0, 3.0] {
                let params = ProblemParams::new(geometry, a, r, 0.0, 1, TRUNC).map_err(e)?;
                let g = eval_g(&params, &FourierProfile::zeros(TRUNC, 1)).map_err(e)?;
                worst = worst.max(residual_sup(&params, &g).map_err(e)?);
            }
        }
    }
    ensure(worst <= 1e-12, || format!("sup |G(R,0,0)| = {worst:.3e}"))?;
    Ok(format!("max |G(R,0,0)| = {worst:.2e} over 32 cases"))
}

fn linearization() -> Outcome {
    let mut rng = StdRng::seed_from_u64(11);
    let eps = 1e-6;
    let mut fd_worst: f64 = 0.0;
    let mut block_worst: f64 = 0.0;
    let samples = [
        (Geometry::Euclidean, 0.0, 1.0),
        (Geometry::Euclidean, 0.5, 0.5),
        (Geometry::Euclidean, 3.0, 2.0),
        (Geometry::Hyperbolic, 0.0, 0.49),
        (Geometry::Hyperbolic, 1.0, 0.25),
        (Geometry::Hyperbolic, 0.5, 0.9),
    ];
    for (geometry, a, r) in samples {
        let params = ProblemParams::new(geometry, a, r, 0.0, 1, TRUNC).map_err(e)?;
        for _ in 0..20 {
            let h = random_profile(&mut rng, TRUNC, 1, false);
            let plus = eval_g(&params, &h.scaled(eps)).map_err(e)?;
            let minus = eval_g(&params, &h.scaled(-eps)).map_err(e)?;
            let lin = apply_linearized(&params, &h).map_err(e)?;
            let err = plus
                .dense()
                .iter()
                .zip(minus.dense())
                .zip(lin.dense())
                .map(|((p, m), l)| ((p - m) / (2.0 * eps) - l).abs())
                .fold(0.0, f64::max);
            fd_worst = fd_worst.max(err / lin.max_abs());
        }
        for n in 1..=8u32 {
            let block = linear_block(n, geometry, a, r);
            let ni = i64::from(n);
            for (an, amn) in [(1.0, 0.0), (0.0, 1.0)] {
                let h = FourierProfile::from_modes(TRUNC, 1, &[(ni, an), (-ni, amn)]).map_err(e)?;
                let out = apply_linearized(&params, &h).map_err(e)?;
                let [cos, sin] = block.apply([an + amn, an - amn]);
                let expect = FourierProfile::from_modes(TRUNC, 1, &[(ni, 0.5 * (cos + sin)), (-ni, 0.5 * (cos - sin))])
                    .map_err(e)?;
                block_worst = block_worst.max(sup_diff(&out, &expect) / (1.0 + out.max_abs()));
            }
        }
    }
    ensure(fd_worst <= 1e-6, || format!("finite-difference relative error {fd_worst:.3e}"))?;
    ensure(block_worst <= 1e-12, || format!("block mismatch {block_worst:.3e}"))?;
    Ok(format!("fd relative error {fd_worst:.2e} (120 directions), block mismatch {block_worst:.2e}"))
}

fn eigenvalues() -> Outcome {
    let mut det_worst: f64 = 0.0;
    for geometry in [Geometry::Euclidean, Geometry::Hyperbolic] {
        for a in [0.0, 0.5, 1.0, 1.5, 3.0] {
            for n in 1..=50 {
                for r in eigen_radii(n, geometry, a).into_iter().filter(|r| r.admissible) {
                    det_worst = det_worst.max(linear_block(n, geometry, a, r.radius).relative_det());
                }
            }
        }
    }
    ensure(det_worst <= 1e-10, || format!("relative det {det_worst:.3e} at an admissible radius"))?;

    let euclidean: Vec<(u32, f64)> = (1..=50)
        .flat_map(|n| eigen_radii(n, Geometry::Euclidean, 0.0))
        .filter(|r| r.admissible)
        .map(|r| (r.n, r.radius))
        .collect();
    ensure(!euclidean.is_empty() && euclidean.iter().all(|&(n, r)| n == 1 && (r - 1.0).abs() <= 1e-12), || {
        format!("Euclidean a=0 admissible pairs {euclidean:?}")
    })?;

    let r3 = root(Geometry::Hyperbolic, 0.0, 3, RootBranch::Minus);
    let r3_oracle = bisect(|r| block_det(3, Geometry::Hyperbolic, 0.0, r), 0.3, 0.6);
    ensure((r3 - r3_oracle).abs() <= 1e-12 && (r3 - 0.4903144).abs() < 5e-8, || format!("R_3 = {r3} vs {r3_oracle}"))?;

    let radii: Vec<f64> = (3..=50).map(|n| root(Geometry::Hyperbolic, 0.0, n, RootBranch::Minus)).collect();
    ensure(radii.windows(2).all(|w| w[0] < w[1]) && radii.iter().all(|&r| r < 1.0), || {
        "R_n not increasing below 1".into()
    })?;
    ensure(radii[radii.len() - 1] > 0.95, || format!("R_50 = {}", radii[radii.len() - 1]))?;

    let r1 = root(Geometry::Euclidean, 0.5, 1, RootBranch::Plus);
    let r1_oracle = bisect(|r| block_det(1, Geometry::Euclidean, 0.5, r), 0.4, 0.7);
    ensure((r1 - (1.0f64 / 3.0).sqrt()).abs() <= 1e-12 && (r1 - r1_oracle).abs() <= 1e-12, || {
        format!("R_1 = {r1} vs {r1_oracle}")
    })?;
    Ok(format!(
        "max relative det {det_worst:.2e}; R_3 = {r3:.10}; R_50 = {:.6}; R_1(a=0.5) = {r1:.10}",
        radii[radii.len() - 1]
    ))
}

fn admissible_pairs() -> Vec<(Geometry, f64, u32, f64)> {
    let mut out = Vec::new();
    for geometry in [Geometry::Euclidean, Geometry::Hyperbolic] {
        for a in [0.0, 0.5, 1.5, 3.0] {
            for n in 1..=12 {
                for r in eigen_radii(n, geometry, a).into_iter().filter(|r| r.admissible) {
                    out.push((geometry, a, n, r.radius));
                }
            }
        }
    }
    out
}

fn kernel_range() -> Outcome {
    let mut rng = StdRng::seed_from_u64(23);
    let pairs = admissible_pairs();
    let (mut rank_worst, mut annihilated, mut image_defect): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut kernel_defect = f64::INFINITY;
    for &(geometry, a, n, r) in &pairs {
        let [big, small] = linear_block(n, geometry, a, r).singular_values();
        ensure(big > 1e-3, || format!("block vanishes at n={n}, R={r}"))?;
        rank_worst = rank_worst.max(small / big);
        let h = kernel_vector(n, geometry, a, r).map_err(e)?.profile(TRUNC, 1).map_err(e)?;
        let params = ProblemParams::new(geometry, a, r, 0.0, 1, TRUNC).map_err(e)?;
        annihilated = annihilated.max(apply_linearized(&params, &h).map_err(e)?.max_abs());
        kernel_defect = kernel_defect.min(range_defect(&h, n, geometry, a, r).map_err(e)?.abs());
        for _ in 0..50 {
            let d = apply_linearized(&params, &random_profile(&mut rng, TRUNC, 1, false)).map_err(e)?;
            image_defect =
                image_defect.max(range_defect(&d, n, geometry, a, r).map_err(e)?.abs() / (1.0 + d.max_abs()));
        }
    }
    ensure(rank_worst <= 1e-10, || format!("second singular value ratio {rank_worst:.3e}"))?;
    ensure(annihilated <= 1e-10, || format!("|L h*| = {annihilated:.3e}"))?;
    ensure(image_defect <= 1e-10, || format!("range defect on image {image_defect:.3e}"))?;
    ensure(kernel_defect > 1e-6, || format!("range defect on kernel {kernel_defect:.3e}"))?;

    let mut circle_worst: f64 = 0.0;
    for _ in 0..50 {
        let d = random_profile(&mut rng, TRUNC, 1, true);
        let defect = range_defect(&d, 1, Geometry::Euclidean, 0.0, 1.0).map_err(e)?;
        circle_worst = circle_worst.max((defect - (d.coeff(1) + d.coeff(-1))).abs());
    }
    ensure(circle_worst <= 1e-14, || format!("circle defect differs from f_1 + f_-1 by {circle_worst:.3e}"))?;
    Ok(format!(
        "{} eigenpairs: rank-1 ratio {rank_worst:.1e}, |L h*| {annihilated:.1e}, image defect {image_defect:.1e}, kernel defect >= {kernel_defect:.2e}",
        pairs.len()
    ))
}

fn transversality() -> Outcome {
    let circle = transversality_ok(1, Geometry::Euclidean, 0.0, 1.0).map_err(e)?;
    ensure((circle.lhs - 1.0).abs() <= 1e-14 && (circle.rhs + 1.0).abs() <= 1e-14 && circle.satisfied, || {
        format!("circle lhs {} rhs {}", circle.lhs, circle.rhs)
    })?;
    let mut cases = vec![(Geometry::Euclidean, 1, 1.0)];
    for n in 3..=20 {
        let r = root(Geometry::Hyperbolic, 0.0, n, RootBranch::Minus);
        let t = transversality_ok(n, Geometry::Hyperbolic, 0.0, r).map_err(e)?;
        ensure(t.satisfied, || format!("hyperbolic n={n} not transversal"))?;
        cases.push((Geometry::Hyperbolic, n, r));
    }
    let mut disagreements = Vec::new();
    for (geometry, n, r) in cases {
        let closed = transversality_ok(n, geometry, 0.0, r).map_err(e)?.satisfied;
        let mixed = dr_linearized_on_kernel(n, geometry, 0.0, r, TRUNC, 1).map_err(e)?;
        let defect = range_defect(&mixed, n, geometry, 0.0, r).map_err(e)?;
        let oracle = defect.abs() > 1e-10 * (1.0 + mixed.max_abs());
        if closed != oracle {
            disagreements.push(format!("{} n={n}: closed form {closed}, range defect {defect:.2e}", geometry.name()));
        }
    }
    ensure(disagreements.is_empty(), || {
        format!(
            "closed form holds (circle LHS=1, RHS=-1; hyperbolic 3..20), but oracle disagrees at {}",
            disagreements.join("; ")
        )
    })?;
    Ok("closed form and operator oracle agree on 19 cases".into())
}

fn branches() -> Outcome {
    let mut report = Vec::new();
    for (geometry, n) in [(Geometry::Hyperbolic, 3u32), (Geometry::Euclidean, 1)] {
        let c = continuation(geometry, 0.0, n, RootBranch::Minus, n as usize)?;
        let (pos, all) = two_sided(&c)?;
        ensure(pos.len() == 10, || format!("{} points on the positive side", pos.len()))?;
        let mut refined: f64 = 0.0;
        for p in &all {
            refined = refined.max(refined_residual(p, 2).map_err(e)?);
        }
        ensure(refined <= 1e-11, || format!("{}: refined residual {refined:.3e}", geometry.name()))?;
        let slope = tangency_slope(&pos, c.kernel()).map_err(e)?;
        ensure(slope >= 1.9, || format!("{}: tangency slope {slope:.3}", geometry.name()))?;
        let (lambda0, r0) = extrapolate_to_origin(&all, 4).map_err(e)?;
        let gap = lambda0.abs().max((r0 - c.eigenpair().radius).abs());
        ensure(gap <= 1e-6, || format!("{}: extrapolation gap {gap:.3e}", geometry.name()))?;
        report.push(format!("{}: residual {refined:.1e}, slope {slope:.2}, gap {gap:.1e}", geometry.name()));
    }
    Ok(report.join("; "))
}

fn mfold() -> Outcome {
    let c = continuation(Geometry::Hyperbolic, 0.0, 3, RootBranch::Minus, 3)?;
    let (_, all) = two_sided(&c)?;
    let worst = all.iter().map(|p| p.f.off_mfold_max(3)).fold(0.0, f64::max);
    ensure(worst <= 1e-13, || format!("off-3Z coefficient {worst:.3e}"))?;
    Ok(format!("max off-3Z coefficient {worst:.1e} over {} points", all.len()))
}

fn hyperbolic_point(eta: f64) -> Result<BranchPoint, String> {
    let c = continuation(Geometry::Hyperbolic, 0.0, 3, RootBranch::Minus, 3)?;
    c.newton_correct(c.initial_guess(eta), eta).map_err(e)
}

fn steadiness() -> Outcome {
    let helix = SteadyProfile::trivial(Geometry::Euclidean, 0.3, 0.5).map_err(e)?;
    let h = steadiness_error(&helix, 0.1, 1e-4, TRUNC, 10).map_err(e)?.max_error;
    ensure(h <= 1e-8, || format!("helix error {h:.3e}"))?;
    let profile = SteadyProfile::from_point(&hyperbolic_point(1e-2)?);
    let b = steadiness_error(&profile, 0.1, 1e-4, TRUNC, 10).map_err(e)?.max_error;
    ensure(b <= 1e-6, || format!("branch point error {b:.3e}"))?;
    Ok(format!("helix {h:.2e}, m=3 branch point {b:.2e}"))
}

fn reconstruction() -> Outcome {
    let c = continuation(Geometry::Euclidean, 0.0, 1, RootBranch::Minus, 1)?;
    let circle_point = c.newton_correct(c.initial_guess(1e-2), 1e-2).map_err(e)?;
    let profiles = [
        SteadyProfile::from_point(&hyperbolic_point(1e-2)?),
        SteadyProfile::from_point(&circle_point),
        SteadyProfile::trivial(Geometry::Euclidean, 0.3, 0.5).map_err(e)?,
        SteadyProfile::trivial(Geometry::Hyperbolic, 0.0, 0.7).map_err(e)?,
    ];
    let s = uniform_grid(256, 1);
    let (mut norm, mut deriv, mut binormal, mut closed): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for (i, profile) in profiles.iter().enumerate() {
        let sign = profile.geometry().sign();
        for t in [0.0, 0.4] {
            let sample = curve_from_tangent(profile, t, &s).map_err(e)?;
            for tan in &sample.tangent {
                norm = norm.max((quadratic_form(*tan, profile.geometry()) - sign).abs());
                if profile.geometry() == Geometry::Hyperbolic {
                    ensure(tan[2] >= 1.0, || format!("T3 = {} below 1", tan[2]))?;
                }
            }
            let (xs, _) = arclength_derivatives(&sample).map_err(e)?;
            for (d, tan) in xs.iter().zip(&sample.tangent) {
                deriv = deriv.max((0..3).map(|k| (d[k] - tan[k]).abs()).fold(0.0, f64::max));
            }
        }
        if i < 2 {
            let [p, m, n] = time_slices(profile, 0.05, 1e-3, 256, 1).map_err(e)?;
            binormal = binormal.max(binormal_residual(&p, &m, &n).map_err(e)?);
        }
        if profile.slip() == 0.0 && profile.omega() != 0.0 {
            let prim = TangentPrimitive::new(profile).map_err(e)?;
            for t in [0.3, 1.7] {
                let a = curve_from_tangent(profile, t, &s).map_err(e)?;
                let tail = time_integral_quadrature(profile, t).map_err(e)?;
                let b = curve_with_time_integral(profile, &prim, t, &s, tail).map_err(e)?;
                for (x, y) in a.x.iter().zip(&b.x) {
                    closed = closed.max((0..3).map(|k| (x[k] - y[k]).abs()).fold(0.0, f64::max));
                }
            }
        }
    }
    ensure(norm <= 1e-12, || format!("normalization error {norm:.3e}"))?;
    ensure(deriv <= 1e-10, || format!("|X_s - T| = {deriv:.3e}"))?;
    ensure(binormal <= 1e-4, || format!("binormal residual {binormal:.3e}"))?;
    ensure(closed <= 1e-10, || format!("closed form vs quadrature {closed:.3e}"))?;
    Ok(format!("norm {norm:.1e}, |X_s - T| {deriv:.1e}, binormal {binormal:.1e}, closed vs quadrature {closed:.1e}"))
}

fn kida() -> Outcome {
    let s = uniform_grid(256, 1);
    let mut helix_var: f64 = 0.0;
    for (geometry, a, r) in
        [(Geometry::Euclidean, 0.3, 0.5), (Geometry::Euclidean, 0.0, 2.0), (Geometry::Hyperbolic, 1.0, 0.6)]
    {
        let sample = curve_from_tangent(&SteadyProfile::trivial(geometry, a, r).map_err(e)?, 0.0, &s).map_err(e)?;
        helix_var = helix_var.max(modulus_variation(&sample.z));
    }
    ensure(helix_var <= 1e-14, || format!("helix variation {helix_var:.3e}"))?;
    let branch = curve_from_tangent(&SteadyProfile::from_point(&hyperbolic_point(1e-2)?), 0.0, &s).map_err(e)?;
    let branch_var = modulus_variation(&branch.z);
    ensure(branch_var > 1e-4, || format!("branch variation {branch_var:.3e}"))?;

    let mut rng = StdRng::seed_from_u64(31);
    let (mut evaluated, mut zero) = (0, 0);
    while evaluated < 10_000 {
        let (a_const, v, omega, slip) = (
            rng.random_range(-20.0..20.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
        );
        if let Ok(c) = beta_cubic(a_const, v, omega, slip) {
            evaluated += 1;
            if c.iter().all(|x| x.abs() <= 1e-12) {
                zero += 1;
            }
        }
    }
    ensure(zero == 0, || format!("{zero} zero cubics"))?;

    let r = 0.5;
    let helix = SteadyProfile::trivial(Geometry::Euclidean, 0.3, r).map_err(e)?;
    let sample = curve_from_tangent(&helix, 0.0, &s).map_err(e)?;
    let fit = fit_helix(2.0 * r / (1.0 + r * r), (1.0 - r * r) / (1.0 + r * r), helix.omega(), 0.3).map_err(e)?;
    let fitted = defect_of_tangents(&sample.tangent, &fit).map_err(e)?;
    ensure(fitted <= 1e-10, || format!("fitted helix defect {fitted:.3e}"))?;

    let c = continuation(Geometry::Euclidean, 1.5, 3, RootBranch::Minus, 3)?;
    let p = c.newton_correct(c.initial_guess(1e-3), 1e-3).map_err(e)?;
    let euclid = curve_from_tangent(&SteadyProfile::from_point(&p), 0.0, &uniform_grid(128, 1)).map_err(e)?;
    let pr = p.params.r;
    let center =
        fit_helix(2.0 * pr / (1.0 + pr * pr), (1.0 - pr * pr) / (1.0 + pr * pr), p.params.omega(), 1.5).map_err(e)?;
    let width = (0.5 * center.a_const.abs().max(1.0), 0.5 * center.v.abs().max(1.0));
    let grid = minimize_defect(&euclid.tangent, &center, width, 201).map_err(e)?;
    ensure(grid.defect > 1e-6, || format!("compatibility margin {:.3e}", grid.defect))?;
    Ok(format!(
        "helix variation {helix_var:.1e}, branch variation {branch_var:.2e}, 0 zero cubics in 10^4, fitted defect {fitted:.1e}, margin {:.3e} (grid {} cells, spacing {:.2e} x {:.2e})",
        grid.defect, grid.cells, grid.spacing.0, grid.spacing.1
    ))
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|entry| {
            let path = entry.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&path).unwrap())
        })
        .collect()
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_binormal");
    let runs: [&[&str]; 2] = [
        &["verify"],
        &[
            "bifurcate",
            "--geometry",
            "hyperbolic",
            "--a",
            "0",
            "--m",
            "3",
            "--branch",
            "minus",
            "--eta-max",
            "0.05",
            "--steps",
            "10",
        ],
    ];
    let mut files = 0;
    for args in runs {
        let mut outputs = Vec::new();
        for _ in 0..2 {
            let dir = tempfile::tempdir().map_err(e)?;
            let status = Command::new(bin).args(args).arg("--out").arg(dir.path()).output().map_err(e)?;
            // verify exits 4 while a property is red; its files are still written.
            ensure(matches!(status.status.code(), Some(0) | Some(4)), || {
                format!("{} exited with {:?}: {}", args[0], status.status, String::from_utf8_lossy(&status.stderr))
            })?;
            // Reported paths name the temporary directory.
            let stdout = String::from_utf8_lossy(&status.stdout).replace(&*dir.path().to_string_lossy(), "<out>");
            outputs.push((snapshot(dir.path()), stdout));
        }
        ensure(!outputs[0].0.is_empty(), || format!("{} wrote nothing", args[0]))?;
        ensure(outputs[0].0 == outputs[1].0, || format!("{} output files differ", args[0]))?;
        ensure(outputs[0].1 == outputs[1].1, || format!("{} stdout differs", args[0]))?;
        files += outputs[0].0.len();
    }
    Ok(format!("{files} files byte-identical across repeated verify and bifurcate runs"))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 11] = [
        (1, "trivial-solution residual", trivial_residual),
        (2, "linearization correctness", linearization),
        (3, "eigenvalue reproduction", eigenvalues),
        (4, "kernel and range structure", kernel_range),
        (5, "transversality", transversality),
        (6, "bifurcation branches", branches),
        (7, "m-fold symmetry", mfold),
        (8, "steadiness certification", steadiness),
        (9, "geometric reconstruction", reconstruction),
        (10, "classical-family separation", kida),
        (11, "determinism", determinism),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let known_red = KNOWN_RED.contains(&id);
        match &outcome {
            Ok(detail) => println!("PASS criterion {id:>2} {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                let tag = if known_red { " (known red)" } else { "" };
                println!("FAIL criterion {id:>2} {name}{tag}: {detail} [{secs:.1}s]");
            }
        }
        if outcome.is_ok() == known_red {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
