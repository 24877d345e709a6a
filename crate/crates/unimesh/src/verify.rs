//! Verification suites shared by the CLI `verify` subcommand and the
//! acceptance tests: conformation fuzzing, finite element patch and
//! convergence checks, stress-intensity benchmarks against exact solutions,
//! and propagation-path benchmarks.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{CrackSource, LoadKind, MeshSource, RunConfig};
use crate::conform::{conform, conform_and_split, ConformParams};
use crate::curve::{CrackPath, Spline};
use crate::error::{ConfigError, PipelineError};
use crate::exact::{griffith_field, Frame, ReferenceField, StraightCrackField};
use crate::fem::{self, Loads, Material, P2Mesh, QUAD_PTS};
use crate::fracture::{
    self, correlation_sif, interaction_sif, point_segment_distance, propagate_step,
    ArcDirichletModel, GriffithTensionModel, LoadModel, PropagateParams, PropagationRecord,
    StepOutput, UniaxialTensionModel,
};
use crate::geometry::{
    refine_local, refine_uniform, signed_quality, structured_acute_mesh, Point2, Triangulation,
};
use crate::io;

/// Outcome of one verification suite: overall verdict plus one line per
/// measured quantity.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: &'static str,
    pub pass: bool,
    pub lines: Vec<String>,
}

impl SuiteReport {
    fn new(name: &'static str) -> SuiteReport {
        SuiteReport {
            name,
            pass: true,
            lines: Vec::new(),
        }
    }

    /// Record a checked quantity; a failed check fails the suite.
    fn check(&mut self, ok: bool, line: String) {
        self.pass &= ok;
        self.lines
            .push(format!("[{}] {line}", if ok { "ok" } else { "FAIL" }));
    }

    /// Record an informational quantity.
    fn note(&mut self, line: String) {
        self.lines.push(format!("[--] {line}"));
    }

    fn fail(&mut self, line: String) {
        self.pass = false;
        self.lines.push(format!("[FAIL] {line}"));
    }
}

// ---------------------------------------------------------------------------
// randomized curves and graded meshes

/// A random smooth open curve immersed in `[lo, hi]` that keeps a radius of
/// curvature of at least `4 h` and a margin of at least `3 h` from the
/// boundary: a gently bent segment with random position, direction, length
/// and lateral sine perturbation, rejection-sampled against both bounds.
pub fn random_smooth_curve(
    rng: &mut ChaCha8Rng,
    lo: Point2,
    hi: Point2,
    h: f64,
) -> Spline {
    let size = (hi.x - lo.x).min(hi.y - lo.y);
    let margin = 3.0 * h;
    loop {
        let len = size * (0.28 + 0.14 * rng.gen::<f64>());
        let phi = std::f64::consts::PI * rng.gen::<f64>();
        let dir = Point2::new(phi.cos(), phi.sin());
        let lateral = dir.perp();
        // curvature of the lateral sine is about A (2 pi / len)^2; keep it
        // safely below 1 / (4 h)
        let a_max = (0.8 / (4.0 * h)) / (2.0 * std::f64::consts::PI / len).powi(2);
        let amp = a_max.min(0.05 * size) * rng.gen::<f64>();
        let phase = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
        let reach = 0.5 * len + amp + margin;
        let cx = lo.x + reach + (hi.x - lo.x - 2.0 * reach).max(0.0) * rng.gen::<f64>();
        let cy = lo.y + reach + (hi.y - lo.y - 2.0 * reach).max(0.0) * rng.gen::<f64>();
        let center = Point2::new(cx, cy);
        let knots: Vec<Point2> = (0..12)
            .map(|i| {
                let t = len * (i as f64 / 11.0 - 0.5);
                let w = amp * (2.0 * std::f64::consts::PI * (t / len) + phase).sin();
                center.add(dir.scale(t)).add(lateral.scale(w))
            })
            .collect();
        let spline = match Spline::fit(&knots, false) {
            Ok(s) => s,
            Err(_) => continue,
        };
        if spline.min_radius_of_curvature(16) < 4.2 * h {
            continue;
        }
        let inside = (0..=64).all(|i| {
            let s = spline.length() * i as f64 / 64.0;
            let p = spline.eval(s);
            p.x - lo.x >= margin
                && hi.x - p.x >= margin
                && p.y - lo.y >= margin
                && hi.y - p.y >= margin
        });
        if inside {
            return spline;
        }
    }
}

/// Structured acute mesh locally refined in shrinking tubes around a crack
/// polyline: pass `k` red-refines every triangle within `12 h_{k+1}` of the
/// polyline, halving the local mesh size each time while keeping the band
/// that the conformer touches inside the uniformly refined (acute) core.
pub fn tip_graded_mesh(
    lo: Point2,
    hi: Point2,
    n: usize,
    polyline: &[Point2],
    passes: usize,
) -> Result<Triangulation, crate::error::GeometryError> {
    let dx = (hi.x - lo.x) / n as f64;
    let dist = |p: Point2| -> f64 {
        polyline
            .windows(2)
            .map(|w| point_segment_distance(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min)
    };
    let mut mesh = structured_acute_mesh(lo, hi, n)?;
    for k in 0..passes {
        let rho = 12.0 * dx / 2f64.powi(k as i32 + 1);
        let marked: Vec<bool> = mesh
            .triangles
            .iter()
            .map(|t| t.iter().any(|&v| dist(mesh.vertices[v]) <= rho))
            .collect();
        mesh = refine_local(&mesh, &marked);
    }
    Ok(mesh)
}

// ---------------------------------------------------------------------------
// suites

/// Conformation robustness: `count` seeded random curves conformed into a
/// structured acute mesh; every run must succeed with positive areas,
/// quality at least 0.2 and boundary vertices within 1e-10 of the curve.
pub fn suite_conform_fuzz(seed: u64, count: usize) -> SuiteReport {
    let mut report = SuiteReport::new("conform-fuzz");
    let start = Instant::now();
    let mesh = structured_acute_mesh(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), 32)
        .expect("valid resolution");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = ConformParams::default();
    let mut successes = 0usize;
    let mut worst_q = f64::INFINITY;
    let mut worst_dist = 0.0f64;
    for i in 0..count {
        let curve = random_smooth_curve(&mut rng, Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), mesh.h_max);
        match conform(&mesh, &curve, &params) {
            Ok(c) => {
                successes += 1;
                worst_q = worst_q.min(c.min_quality);
                let inverted = c
                    .triangles
                    .iter()
                    .any(|t| signed_quality(c.positions[t[0]], c.positions[t[1]], c.positions[t[2]]) <= 0.0);
                if inverted {
                    report.fail(format!("curve {i}: inverted triangle"));
                }
                for &v in &c.gamma.chain {
                    worst_dist = worst_dist.max(curve.closest_point(c.positions[v]).distance);
                }
            }
            Err(e) => report.fail(format!("curve {i}: {e}")),
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report.check(successes == count, format!("successes: {successes}/{count}"));
    report.check(worst_q >= 0.2, format!("min quality over all runs: {worst_q:.4}"));
    report.check(
        worst_dist <= 1e-10,
        format!("max distance of conformed vertices to curve: {worst_dist:.3e}"),
    );
    report.check(elapsed <= 60.0, format!("elapsed: {elapsed:.1} s (limit 60)"));
    report
}

/// Quality under refinement: the fuzz of `suite_conform_fuzz` repeated on
/// three uniform refinements of the same universal mesh; the worst quality
/// must stay bounded (vary by less than 20% across levels).
pub fn suite_quality_refinement(seed: u64, count: usize) -> SuiteReport {
    let mut report = SuiteReport::new("quality-refinement");
    let base = structured_acute_mesh(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), 12)
        .expect("valid resolution");
    let meshes = {
        let m1 = refine_uniform(&base);
        let m2 = refine_uniform(&m1);
        [base, m1, m2]
    };
    let h_coarse = meshes[0].h_max;
    let params = ConformParams::default();
    let mut worst = [f64::INFINITY; 3];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..count {
        // admissible on the coarsest level, hence on all finer levels
        let curve = random_smooth_curve(
            &mut rng,
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            h_coarse,
        );
        for (level, mesh) in meshes.iter().enumerate() {
            match conform(mesh, &curve, &params) {
                Ok(c) => worst[level] = worst[level].min(c.min_quality),
                Err(e) => report.fail(format!("curve {i} level {level}: {e}")),
            }
        }
    }
    for (level, w) in worst.iter().enumerate() {
        report.note(format!("level {level}: worst min quality {w:.4}"));
    }
    let hi = worst.iter().cloned().fold(0.0f64, f64::max);
    let lo = worst.iter().cloned().fold(f64::INFINITY, f64::min);
    report.check(
        lo >= 0.2,
        format!("worst quality over all levels: {lo:.4} (floor 0.2)"),
    );
    report.check(
        (hi - lo) / hi < 0.2,
        format!("quality variation across levels: {:.1}%", 100.0 * (hi - lo) / hi),
    );
    report
}

/// FEM patch test: an arbitrary linear boundary displacement reproduced at
/// every node to 1e-9.
pub fn suite_patch() -> SuiteReport {
    let mut report = SuiteReport::new("patch");
    let mesh = structured_acute_mesh(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), 8)
        .expect("valid resolution");
    let p2 = P2Mesh::build(&mesh);
    let mat = Material {
        e: 37.0,
        nu: 0.28,
        plane_strain: false,
        k_c: 1.0,
    };
    let exact = |p: Point2| [0.17 * p.x - 0.43 * p.y + 0.08, 0.31 * p.x + 0.22 * p.y - 0.4];
    let loads = Loads::dirichlet_only(exact);
    match fem::solve(&p2, &mat, &loads) {
        Ok(sol) => {
            let mut max_err = 0.0f64;
            for (i, p) in p2.nodes.iter().enumerate() {
                let g = exact(*p);
                max_err = max_err
                    .max((sol.u[2 * i] - g[0]).abs())
                    .max((sol.u[2 * i + 1] - g[1]).abs());
            }
            report.check(max_err <= 1e-9, format!("max nodal error: {max_err:.3e}"));
        }
        Err(e) => report.fail(format!("solve: {e}")),
    }
    report
}

/// Manufactured cubic solution: L2 displacement error of order 3 and energy
/// error of order 2 over three refinements.
pub fn suite_manufactured() -> SuiteReport {
    let mut report = SuiteReport::new("manufactured");
    let mat = Material {
        e: 10.0,
        nu: 0.3,
        plane_strain: true,
        k_c: 1.0,
    };
    let (lam, mu) = (mat.lambda(), mat.mu());
    let exact = |p: Point2| {
        [
            p.x * p.x * p.x + 2.0 * p.x * p.y * p.y,
            p.y * p.y * p.y - p.x * p.x * p.y,
        ]
    };
    let exact_grad = |p: Point2| {
        [
            [3.0 * p.x * p.x + 2.0 * p.y * p.y, 4.0 * p.x * p.y],
            [-2.0 * p.x * p.y, 3.0 * p.y * p.y - p.x * p.x],
        ]
    };
    let body = move |p: Point2| [-(4.0 * lam + 14.0 * mu) * p.x, -(10.0 * lam + 14.0 * mu) * p.y];
    let mut errs: Vec<(f64, f64, f64)> = Vec::new(); // (h, l2, energy)
    for n in [4usize, 8, 16] {
        let mesh = structured_acute_mesh(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), n)
            .expect("valid resolution");
        let p2 = P2Mesh::build(&mesh);
        let loads = Loads {
            dirichlet: Box::new(move |p| {
                let g = exact(p);
                [Some(g[0]), Some(g[1])]
            }),
            traction: Box::new(|_, _| [0.0, 0.0]),
            body: Box::new(body),
            crack_edges: Vec::new(),
        };
        let sol = match fem::solve(&p2, &mat, &loads) {
            Ok(s) => s,
            Err(e) => {
                report.fail(format!("n = {n}: {e}"));
                continue;
            }
        };
        let mut l2 = 0.0;
        let mut energy = 0.0;
        for t in 0..p2.elems.len() {
            let [a, b, c] = [
                p2.tri.vertices[p2.tri.triangles[t][0]],
                p2.tri.vertices[p2.tri.triangles[t][1]],
                p2.tri.vertices[p2.tri.triangles[t][2]],
            ];
            let det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
            for &(xi, eta, w) in &QUAD_PTS {
                let sh = fem::shape(xi, eta);
                let mut x = Point2::new(0.0, 0.0);
                let mut uh = [0.0; 2];
                for i in 0..6 {
                    let node = p2.elems[t][i];
                    x = x.add(p2.nodes[node].scale(sh[i]));
                    uh[0] += sh[i] * sol.u[2 * node];
                    uh[1] += sh[i] * sol.u[2 * node + 1];
                }
                let ue = exact(x);
                l2 += w * det * ((uh[0] - ue[0]).powi(2) + (uh[1] - ue[1]).powi(2));
                let h = sol.element_gradient(&p2, t, xi, eta);
                let he = exact_grad(x);
                let d = [
                    [h[0][0] - he[0][0], h[0][1] - he[0][1]],
                    [h[1][0] - he[1][0], h[1][1] - he[1][1]],
                ];
                let exx = d[0][0];
                let eyy = d[1][1];
                let exy = 0.5 * (d[0][1] + d[1][0]);
                let tr = exx + eyy;
                energy += w
                    * det
                    * (lam * tr * tr + 2.0 * mu * (exx * exx + eyy * eyy + 2.0 * exy * exy));
            }
        }
        errs.push((mesh.h_max, l2.sqrt(), energy.sqrt()));
    }
    if errs.len() == 3 {
        let order = |e0: f64, e1: f64, h0: f64, h1: f64| (e0 / e1).ln() / (h0 / h1).ln();
        let p_l2 = order(errs[1].1, errs[2].1, errs[1].0, errs[2].0);
        let p_en = order(errs[1].2, errs[2].2, errs[1].0, errs[2].0);
        for (h, l2, en) in &errs {
            report.note(format!("h = {h:.4}: L2 error {l2:.3e}, energy error {en:.3e}"));
        }
        report.check(
            (p_l2 - 3.0).abs() <= 0.3,
            format!("L2 convergence order: {p_l2:.2} (target 3.0 +- 0.3)"),
        );
        report.check(
            (p_en - 2.0).abs() <= 0.3,
            format!("energy convergence order: {p_en:.2} (target 2.0 +- 0.3)"),
        );
    }
    report
}

/// One Griffith solve: center crack of half-length 1 in a 20 x 20 square
/// with exact-field Dirichlet data, at the given number of grading passes.
/// Returns (h at the tip, SIF result at r_q = 4 h_tip, solve context).
fn griffith_solve(
    passes: usize,
    mat: &Material,
) -> Result<(f64, P2Mesh, fem::Solution, crate::conform::ConformedMesh, Frame), PipelineError>
{
    let (lo, hi) = (Point2::new(-10.0, -10.0), Point2::new(10.0, 10.0));
    let seg = [Point2::new(-1.0, 0.0), Point2::new(1.0, 0.0)];
    let mesh = tip_graded_mesh(lo, hi, 25, &seg, passes)?;
    let knots: Vec<Point2> = (0..=8)
        .map(|k| Point2::new(-1.0 + 0.25 * k as f64, 0.0))
        .collect();
    let curve = Spline::fit(&knots, false)?;
    let conformed = conform_and_split(&mesh, &curve, &ConformParams::default())?;
    let tri = conformed.triangulation()?;
    let p2 = P2Mesh::build(&tri);
    let field = griffith_field(1.0, 1.0, mat)?;
    let mut loads = Loads::dirichlet_only(move |p| field.displacement(p, 0));
    loads.crack_edges = conformed
        .crack_edges_pos
        .iter()
        .chain(&conformed.crack_edges_neg)
        .copied()
        .collect();
    let sol = fem::solve(&p2, mat, &loads)?;
    let tip = Point2::new(1.0, 0.0);
    let tip_vertex = (0..tri.vertices.len())
        .min_by(|&a, &b| tri.vertices[a].dist(tip).total_cmp(&tri.vertices[b].dist(tip)))
        .expect("non-empty mesh");
    let h_tip = tri.local_h(tip_vertex);
    let frame = Frame {
        origin: tip,
        angle: 0.0,
    };
    Ok((h_tip, p2, sol, conformed, frame))
}

/// Griffith SIF benchmark: K_I within 2% of the exact value with
/// monotonically decreasing error over three tip refinements, |K_II| below
/// 1% of K_I, domain independence of the extraction, and agreement with the
/// displacement-correlation cross-check.
pub fn suite_griffith() -> SuiteReport {
    let mut report = SuiteReport::new("griffith");
    let mat = Material {
        e: 1.0,
        nu: 0.3,
        plane_strain: true,
        k_c: 1.0,
    };
    let k_exact = std::f64::consts::PI.sqrt();
    let mut errors = Vec::new();
    for passes in [3usize, 4, 5] {
        match griffith_solve(passes, &mat) {
            Ok((h_tip, p2, sol, conformed, frame)) => {
                let crack_edges: Vec<[usize; 2]> = conformed
                    .crack_edges_pos
                    .iter()
                    .chain(&conformed.crack_edges_neg)
                    .copied()
                    .collect();
                let sif =
                    match interaction_sif(&p2, &sol, &mat, &frame, 4.0 * h_tip, &crack_edges) {
                        Ok(s) => s,
                        Err(e) => {
                            report.fail(format!("passes {passes}: {e}"));
                            continue;
                        }
                    };
                let err = (sif.k1 / k_exact - 1.0).abs();
                errors.push(err);
                report.note(format!(
                    "h_tip = {h_tip:.4}: K_I = {:.6} (err {:.3e}), |K_II|/K_I = {:.3e}",
                    sif.k1,
                    err,
                    sif.k2.abs() / sif.k1
                ));
                if passes == 5 {
                    report.check(err <= 0.02, format!("finest K_I error: {:.3e}", err));
                    report.check(
                        sif.k2.abs() / sif.k1 <= 0.01,
                        format!("finest |K_II|/K_I: {:.3e}", sif.k2.abs() / sif.k1),
                    );
                    // extraction-domain independence over r_q in {2, 4, 6} h_tip
                    let mut k1s = Vec::new();
                    for f in [2.0, 4.0, 6.0] {
                        match interaction_sif(&p2, &sol, &mat, &frame, f * h_tip, &crack_edges)
                        {
                            Ok(s) => k1s.push(s.k1),
                            Err(e) => report.fail(format!("r_q = {f} h_tip: {e}")),
                        }
                    }
                    if k1s.len() == 3 {
                        let mean = k1s.iter().sum::<f64>() / 3.0;
                        let var = k1s
                            .iter()
                            .map(|k| (k - mean).abs())
                            .fold(0.0f64, f64::max)
                            / mean;
                        report.check(
                            var < 0.01,
                            format!("K_I variation over r_q in {{2,4,6}} h_tip: {:.3e}", var),
                        );
                    }
                    match correlation_sif(&p2, &sol, &mat, &frame, &conformed.duplicated_pairs)
                    {
                        Ok((c1, _)) => report.check(
                            (c1 - sif.k1).abs() / sif.k1 < 0.05,
                            format!("displacement-correlation K_I: {c1:.6}"),
                        ),
                        Err(e) => report.fail(format!("correlation: {e}")),
                    }
                }
            }
            Err(e) => report.fail(format!("passes {passes}: {e}")),
        }
    }
    if errors.len() == 3 {
        report.check(
            errors[0] > errors[1] && errors[1] > errors[2],
            format!(
                "K_I error decreases monotonically: {:.3e} > {:.3e} > {:.3e}",
                errors[0], errors[1], errors[2]
            ),
        );
    }
    report
}

/// Kink-direction benchmark: the kink angle that zeroes K_II at the new tip
/// (found by solving the kinked configuration) against the first-order
/// formula -2 K_II / K_I, for three mode-mixity ratios.
pub fn suite_kink() -> SuiteReport {
    let mut report = SuiteReport::new("kink");
    let mat = Material {
        e: 1.0,
        nu: 0.3,
        plane_strain: true,
        k_c: 1.0,
    };
    let (lo, hi) = (Point2::new(-3.0, -2.0), Point2::new(3.0, 2.0));
    let delta = 0.25;
    let base_knots: Vec<Point2> = (0..=8)
        .map(|k| Point2::new(-1.0 + 0.25 * k as f64, 0.0))
        .collect();

    // K_II at the kinked tip for a trial kink angle, under Dirichlet data of
    // the straight-crack field with the prescribed mode mixity. The mesh is
    // graded around the crack so the extraction annulus fits inside the kink
    // segment (a larger annulus would only see the outer field); the kink is
    // appended as two collinear half-steps to keep the fitted spline nearly
    // straight at the tip; the remote tension is biaxial so the T-stress
    // vanishes and its O(sqrt(kink length)) mode-mixing term drops out.
    let k2_of = |theta: f64, ratio: f64| -> Result<(f64, f64), PipelineError> {
        let crack = CrackPath::new(base_knots.clone(), delta / 2.0)?;
        let old_tip = crack.tip();
        let dir = Point2::new(theta.cos(), theta.sin());
        let mid = old_tip.add(dir.scale(delta / 2.0));
        let tip = old_tip.add(dir.scale(delta));
        let crack = crack.append_tip(mid)?.append_tip(tip)?;
        let mut polyline = base_knots.clone();
        polyline.push(tip);
        let mesh = tip_graded_mesh(lo, hi, 48, &polyline, 2)?;
        let conformed = conform_and_split(&mesh, &crack.spline, &ConformParams::default())?;
        let tri = conformed.triangulation()?;
        let p2 = P2Mesh::build(&tri);
        let field = StraightCrackField::new(1.0, [1.0, 1.0, ratio], &mat)?;
        let mut loads = Loads::dirichlet_only(move |p| field.displacement(p, 0));
        loads.crack_edges = conformed
            .crack_edges_pos
            .iter()
            .chain(&conformed.crack_edges_neg)
            .copied()
            .collect();
        let sol = fem::solve(&p2, &mat, &loads)?;
        let frame = Frame {
            origin: tip,
            angle: theta,
        };
        let tip_vertex = (0..tri.vertices.len())
            .min_by(|&a, &b| {
                tri.vertices[a].dist(tip).total_cmp(&tri.vertices[b].dist(tip))
            })
            .expect("non-empty mesh");
        let h_tip = tri.local_h(tip_vertex);
        let sif = interaction_sif(&p2, &sol, &mat, &frame, 4.0 * h_tip, &loads.crack_edges)?;
        Ok((sif.k1, sif.k2))
    };

    let mut discrepancies = Vec::new();
    for ratio in [0.1f64, 0.05, 0.02] {
        let predicted = -2.0 * ratio;
        // secant iteration for the K_II zero in the kink angle
        let mut t0 = predicted;
        let mut t1 = predicted + 0.5 * ratio;
        let result = (|| -> Result<f64, PipelineError> {
            let (_, mut f0) = k2_of(t0, ratio)?;
            for _ in 0..8 {
                let (k1, f1) = k2_of(t1, ratio)?;
                if f1.abs() < 1e-5 * k1.abs() || (t1 - t0).abs() < 1e-5 {
                    return Ok(t1);
                }
                let t2 = t1 - f1 * (t1 - t0) / (f1 - f0);
                t0 = t1;
                f0 = f1;
                t1 = t2;
            }
            Ok(t1)
        })();
        match result {
            Ok(theta_star) => {
                let disc = (theta_star - predicted).abs();
                discrepancies.push(disc);
                let tol = (0.2 * predicted.abs()).max(0.01);
                report.check(
                    disc <= tol,
                    format!(
                        "ratio {ratio}: theta* = {theta_star:.5}, \
                         first-order {predicted:.5}, |diff| = {disc:.2e} (tol {tol:.2e})"
                    ),
                );
            }
            Err(e) => report.fail(format!("ratio {ratio}: {e}")),
        }
    }
    if discrepancies.len() == 3 {
        report.check(
            discrepancies[2] <= discrepancies[0] + 1e-3,
            format!(
                "discrepancy shrinks with the ratio: {:.2e} (0.1) vs {:.2e} (0.02)",
                discrepancies[0], discrepancies[2]
            ),
        );
    }
    report
}

/// Mode I straight path: a symmetric center crack driven 20 steps stays on
/// its symmetry line and carries K_I = K_c at the scaled load each step.
pub fn suite_mode1_path() -> SuiteReport {
    let mut report = SuiteReport::new("mode1");
    let mat = Material {
        e: 1.0,
        nu: 0.3,
        plane_strain: true,
        k_c: 1.0,
    };
    // the crack line y = 0 is a lattice row of this mesh, so the discrete
    // problem is symmetric about it
    let mesh = structured_acute_mesh(
        Point2::new(-1.5, -1.75),
        Point2::new(5.5, 1.75),
        70,
    )
    .expect("valid resolution");
    let row_y = mesh
        .vertices
        .iter()
        .map(|p| p.y)
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
        .unwrap();
    if row_y.abs() > 1e-12 {
        report.fail(format!("no lattice row on y = 0 (nearest {row_y:.3e})"));
        return report;
    }
    let knots: Vec<Point2> = (0..=8)
        .map(|k| Point2::new(-0.5 + 0.125 * k as f64, 0.0))
        .collect();
    // two lattice spacings, so every new tip lands on a row vertex and the
    // conformation leaves the symmetric mesh untouched
    let delta = 0.2;
    let crack = match CrackPath::new(knots, delta) {
        Ok(c) => c,
        Err(e) => {
            report.fail(format!("crack: {e}"));
            return report;
        }
    };
    let model = GriffithTensionModel { sigma: 1.0, mat };
    let params = PropagateParams {
        n_steps: 20,
        ..Default::default()
    };
    match fracture::propagate(&mesh, &crack, &mat, &model, &params) {
        Ok((grown, records)) => {
            let max_y = records.iter().map(|r| r.tip_y.abs()).fold(0.0f64, f64::max);
            let max_k_dev = records
                .iter()
                .map(|r| (r.k1 - mat.k_c).abs())
                .fold(0.0f64, f64::max);
            let max_k2 = records
                .iter()
                .map(|r| r.k2.abs())
                .fold(0.0f64, f64::max);
            report.note(format!(
                "20 steps, delta_ell = {delta:.4}, final tip x = {:.3}",
                grown.tip().x
            ));
            report.check(
                max_y <= 1e-3 * delta,
                format!("max |tip_y|: {max_y:.3e} (tol {:.3e})", 1e-3 * delta),
            );
            report.check(
                max_k_dev <= 1e-12,
                format!("max |C K_I - K_c|: {max_k_dev:.3e}"),
            );
            report.note(format!("max scaled |K_II|: {max_k2:.3e}"));
        }
        Err(e) => report.fail(format!("propagate: {e}")),
    }
    report
}

/// Arc-crack path benchmark: a crack on a circle of radius 2 with initial
/// span pi/8, grown under per-step exact-field Dirichlet data, converges to
/// the circle in tip positions (order at least 1) and in path tangents.
pub fn suite_arc() -> SuiteReport {
    let mut report = SuiteReport::new("arc");
    let mat = Material {
        e: 1.0,
        nu: 0.3,
        plane_strain: true,
        k_c: 1.0,
    };
    let center = Point2::new(0.0, 0.0);
    let r = 2.0;
    let theta0 = std::f64::consts::FRAC_PI_2 - std::f64::consts::PI / 16.0;
    let theta1 = std::f64::consts::FRAC_PI_2 + std::f64::consts::PI / 16.0;
    let growth = 1.4;
    let mut tip_errors = Vec::new();
    let mut tan_errors = Vec::new();
    let mut hs = Vec::new();
    for n in [16usize, 32, 64] {
        let run = (|| -> Result<(f64, f64, f64), PipelineError> {
            // refine the background mesh in a band along the circle (the
            // known path of this benchmark) so the extraction annulus stays
            // well inside the locally straight part of the crack; the step
            // is two near-crack element sizes
            let band: Vec<Point2> = (0..=256)
                .map(|k| {
                    let th = (theta0 - 0.25)
                        + (theta1 + growth / r + 0.3 - theta0 + 0.15) * k as f64 / 256.0;
                    center.add(Point2::new(th.cos(), th.sin()).scale(r))
                })
                .collect();
            let mesh = tip_graded_mesh(
                Point2::new(-3.0, -3.0),
                Point2::new(3.0, 3.0),
                n,
                &band,
                2,
            )?;
            let h_band = 6.0 / n as f64 / 4.0;
            let delta = 2.0 * h_band;
            let n_steps = (growth / delta).round() as usize;
            let knots: Vec<Point2> = (0..=8)
                .map(|k| {
                    let th = theta0 + (theta1 - theta0) * k as f64 / 8.0;
                    center.add(Point2::new(th.cos(), th.sin()).scale(r))
                })
                .collect();
            let crack = CrackPath::new(knots, delta)?;
            let model = ArcDirichletModel {
                center,
                r,
                sigma: 1.0,
                mat,
                n_terms: 24,
            };
            let params = PropagateParams {
                n_steps,
                ..Default::default()
            };
            let (grown, _records) = fracture::propagate(&mesh, &crack, &mat, &model, &params)?;
            let appended = &grown.knots[grown.n_initial - 1..];
            let tip_err = appended
                .iter()
                .map(|p| (p.dist(center) - r).abs())
                .fold(0.0f64, f64::max);
            let tan_err = appended
                .windows(2)
                .map(|w| {
                    let d = w[1].sub(w[0]);
                    let midpoint = w[0].midpoint(w[1]);
                    let radial = midpoint.sub(center);
                    // the circle tangent is perpendicular to the radius
                    (d.normalized().unwrap().dot(radial.normalized().unwrap())).abs().asin()
                })
                .fold(0.0f64, f64::max);
            Ok((h_band, tip_err, tan_err))
        })();
        match run {
            Ok((h, te, ta)) => {
                report.note(format!(
                    "h = {h:.4}: max tip distance to circle {te:.3e}, max tangent error {ta:.3e} rad"
                ));
                hs.push(h);
                tip_errors.push(te);
                tan_errors.push(ta);
            }
            Err(e) => report.fail(format!("n = {n}: {e}")),
        }
    }
    if tip_errors.len() == 3 {
        report.check(
            tip_errors[0] > tip_errors[1] && tip_errors[1] > tip_errors[2],
            format!(
                "tip error decreases monotonically: {:.3e} > {:.3e} > {:.3e}",
                tip_errors[0], tip_errors[1], tip_errors[2]
            ),
        );
        let order = ((tip_errors[0] / tip_errors[2]).ln()) / ((hs[0] / hs[2]).ln());
        report.check(order >= 1.0, format!("estimated order: {order:.2}"));
        report.check(
            tan_errors[0] > tan_errors[1] && tan_errors[1] > tan_errors[2],
            format!(
                "tangent error decreases monotonically: {:.3e} > {:.3e} > {:.3e}",
                tan_errors[0], tan_errors[1], tan_errors[2]
            ),
        );
    }
    report
}

// ---------------------------------------------------------------------------
// config-driven pipeline

/// Everything produced by a configured propagation run.
pub struct RunOutputs {
    pub crack: CrackPath,
    pub records: Vec<PropagationRecord>,
    pub mesh: Triangulation,
}

/// Build the background mesh and initial crack from a config and run the
/// propagation, invoking `on_step` after each completed step (for per-step
/// artifact writing).
pub fn run_from_config(
    cfg: &RunConfig,
    mut on_step: impl FnMut(usize, &StepOutput),
) -> Result<RunOutputs, PipelineError> {
    let (lo, hi) = cfg.domain;
    let knots: Vec<Point2> = match &cfg.crack {
        CrackSource::Segment(a, b) => (0..cfg.crack_knots)
            .map(|k| {
                let t = k as f64 / (cfg.crack_knots - 1) as f64;
                a.add(b.sub(*a).scale(t))
            })
            .collect(),
        CrackSource::Arc {
            center,
            r,
            theta0,
            theta1,
        } => (0..cfg.crack_knots)
            .map(|k| {
                let th = theta0 + (theta1 - theta0) * k as f64 / (cfg.crack_knots - 1) as f64;
                center.add(Point2::new(th.cos(), th.sin()).scale(*r))
            })
            .collect(),
        CrackSource::File(path) => io::read_crack_path(path)?.knots,
    };
    let mesh = match &cfg.mesh {
        MeshSource::Generate => {
            if cfg.tip_refine > 0 {
                tip_graded_mesh(lo, hi, cfg.n, &knots, cfg.tip_refine)?
            } else {
                structured_acute_mesh(lo, hi, cfg.n)?
            }
        }
        MeshSource::File(path) => io::read_mesh(path)?,
    };
    let tip = *knots.last().expect("at least two knots");
    let tip_vertex = (0..mesh.vertices.len())
        .min_by(|&a, &b| mesh.vertices[a].dist(tip).total_cmp(&mesh.vertices[b].dist(tip)))
        .expect("non-empty mesh");
    let delta_ell = cfg.delta_ell.unwrap_or(2.0 * mesh.local_h(tip_vertex));
    let crack = CrackPath::new(knots, delta_ell)?;
    let mat = cfg.material();
    let model: Box<dyn LoadModel> = match cfg.load {
        LoadKind::Griffith => Box::new(GriffithTensionModel {
            sigma: cfg.sigma,
            mat,
        }),
        LoadKind::Arc => match &cfg.crack {
            CrackSource::Arc { center, r, .. } => Box::new(ArcDirichletModel {
                center: *center,
                r: *r,
                sigma: cfg.sigma,
                mat,
                n_terms: 24,
            }),
            _ => {
                return Err(ConfigError::BadValue {
                    key: "load".into(),
                    detail: "`load = arc` requires `crack = arc ...`".into(),
                }
                .into())
            }
        },
        LoadKind::Uniaxial => Box::new(UniaxialTensionModel {
            sigma: cfg.sigma,
            lo,
            hi,
        }),
    };
    let params = PropagateParams {
        n_steps: cfg.n_steps,
        r_q_factor: cfg.r_q_factor,
        conform: ConformParams {
            q_min: cfg.q_min,
            ..Default::default()
        },
    };
    let mut current = crack;
    let mut records = Vec::with_capacity(cfg.n_steps);
    for step in 1..=cfg.n_steps {
        let out = propagate_step(&mesh, &current, &mat, model.as_ref(), &params, step)
            .map_err(|e| crate::error::FractureError::StepFailed {
                step,
                ell: current.ell,
                source: Box::new(e),
            })?;
        on_step(step, &out);
        records.push(out.record.clone());
        current = out.crack;
    }
    Ok(RunOutputs {
        crack: current,
        records,
        mesh,
    })
}

/// Determinism and round-trip: re-running a config reproduces byte-identical
/// CSV output, and every file format round-trips through its own parser.
pub fn suite_determinism() -> SuiteReport {
    let mut report = SuiteReport::new("determinism");
    let cfg = RunConfig::from_str(
        "problem = determinism\ndomain = -2 -1 2 1\nn = 40\n\
         crack = segment -0.5 0 0.5 0\ne = 1\nnu = 0.3\nk_c = 1\n\
         load = griffith\nn_steps = 3\n",
        "determinism",
    )
    .expect("valid config");
    let runs: Vec<Result<RunOutputs, PipelineError>> =
        (0..2).map(|_| run_from_config(&cfg, |_, _| {})).collect();
    match (&runs[0], &runs[1]) {
        (Ok(a), Ok(b)) => {
            let csv_a = io::records_to_string(&a.records);
            let csv_b = io::records_to_string(&b.records);
            report.check(csv_a == csv_b, "re-run reproduces byte-identical CSV".into());
            let path_a = io::crack_path_to_string(&a.crack);
            let path_b = io::crack_path_to_string(&b.crack);
            report.check(path_a == path_b, "re-run reproduces byte-identical crack path".into());

            // round trips through each format's own parser
            let mesh_text = io::mesh_to_string(&a.mesh);
            match io::mesh_from_str(&mesh_text, "round-trip") {
                Ok(m) => report.check(
                    io::mesh_to_string(&m) == mesh_text,
                    "mesh format round-trips exactly".into(),
                ),
                Err(e) => report.fail(format!("mesh round-trip: {e}")),
            }
            match io::crack_path_from_str(&path_a, "round-trip") {
                Ok(c) => report.check(
                    io::crack_path_to_string(&c) == path_a,
                    "crack path format round-trips exactly".into(),
                ),
                Err(e) => report.fail(format!("crack path round-trip: {e}")),
            }
            match io::records_from_str(&csv_a, "round-trip") {
                Ok(r) => report.check(
                    io::records_to_string(&r) == csv_a,
                    "records CSV round-trips exactly".into(),
                ),
                Err(e) => report.fail(format!("records round-trip: {e}")),
            }
            let curve_text = io::curve_to_string(&a.crack.spline);
            match io::curve_from_str(&curve_text, "round-trip") {
                Ok(s) => report.check(
                    io::curve_to_string(&s) == curve_text,
                    "curve format round-trips exactly".into(),
                ),
                Err(e) => report.fail(format!("curve round-trip: {e}")),
            }
            let cfg_text = cfg.to_config_string();
            match RunConfig::from_str(&cfg_text, "round-trip") {
                Ok(c) => report.check(
                    c.to_config_string() == cfg_text,
                    "config format round-trips exactly".into(),
                ),
                Err(e) => report.fail(format!("config round-trip: {e}")),
            }
        }
        _ => {
            for (i, r) in runs.iter().enumerate() {
                if let Err(e) = r {
                    report.fail(format!("run {i}: {e}"));
                }
            }
        }
    }
    report
}

/// Run a suite by CLI name.
pub fn suite_by_name(name: &str, seed: u64) -> Option<SuiteReport> {
    Some(match name {
        "conform-fuzz" => suite_conform_fuzz(seed, 100),
        "quality-refinement" => suite_quality_refinement(seed, 30),
        "patch" => suite_patch(),
        "manufactured" => suite_manufactured(),
        "griffith" => suite_griffith(),
        "kink" => suite_kink(),
        "mode1" => suite_mode1_path(),
        "arc" => suite_arc(),
        "determinism" => suite_determinism(),
        _ => return None,
    })
}

/// All suite names accepted by `suite_by_name`, in recommended order.
pub const SUITE_NAMES: [&str; 9] = [
    "conform-fuzz",
    "quality-refinement",
    "patch",
    "manufactured",
    "griffith",
    "kink",
    "mode1",
    "arc",
    "determinism",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_curves_respect_admissibility() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (lo, hi) = (Point2::new(0.0, 0.0), Point2::new(1.0, 1.0));
        let h = 0.03;
        for _ in 0..20 {
            let c = random_smooth_curve(&mut rng, lo, hi, h);
            assert!(c.min_radius_of_curvature(16) >= 4.0 * h);
            for i in 0..=32 {
                let p = c.eval(c.length() * i as f64 / 32.0);
                assert!(p.x >= 3.0 * h && p.x <= 1.0 - 3.0 * h);
                assert!(p.y >= 3.0 * h && p.y <= 1.0 - 3.0 * h);
            }
        }
    }

    #[test]
    fn graded_mesh_refines_near_the_crack() {
        let seg = [Point2::new(-1.0, 0.0), Point2::new(1.0, 0.0)];
        let mesh = tip_graded_mesh(
            Point2::new(-5.0, -5.0),
            Point2::new(5.0, 5.0),
            10,
            &seg,
            3,
        )
        .unwrap();
        let tip_vertex = (0..mesh.vertices.len())
            .min_by(|&a, &b| {
                mesh.vertices[a]
                    .dist(seg[1])
                    .total_cmp(&mesh.vertices[b].dist(seg[1]))
            })
            .unwrap();
        // three passes: local size near the tip is an eighth of the base
        assert!(mesh.local_h(tip_vertex) < 1.3 / 8.0);
        let q = mesh.quality_report();
        assert!(q.min_q > 0.0, "min quality {}", q.min_q);
    }

    #[test]
    fn patch_suite_passes() {
        let report = suite_patch();
        assert!(report.pass, "{:?}", report.lines);
    }

    #[test]
    fn config_run_produces_records() {
        let cfg = RunConfig::from_str(
            "domain = -2 -1 2 1\nn = 30\ncrack = segment -0.5 0 0.5 0\n\
             e = 1\nnu = 0.3\nk_c = 1\nload = griffith\nn_steps = 2\n",
            "test",
        )
        .unwrap();
        let mut steps_seen = 0;
        let out = run_from_config(&cfg, |_, _| steps_seen += 1).unwrap();
        assert_eq!(steps_seen, 2);
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.crack.steps(), 2);
        assert!((out.records[0].k1 - 1.0).abs() < 1e-12);
    }
}
