//! Oriented cubic-spline curves, closest point projection and side
//! classification, and the discrete crack path with chord-length bookkeeping.

use crate::error::CurveError;
use crate::geometry::Point2;

/// Relative tolerance below which a projection distance counts as "on the
/// curve" (side 0), scaled by the curve length.
const ON_CURVE_TOL: f64 = 1e-12;

/// Chord-length parametrized cubic spline through a list of knots.
///
/// Open curves use natural end conditions (zero second derivative); closed
/// curves are periodic. Knots are interpolated exactly.
#[derive(Debug, Clone)]
pub struct Spline {
    pub knots: Vec<Point2>,
    /// Cumulative chord-length parameter values, strictly increasing.
    /// For closed curves, has one more entry than `knots` (the closing wrap).
    pub params: Vec<f64>,
    /// Per-segment cubic coefficients for x(s) and y(s):
    /// p(t) = c0 + c1 t + c2 t^2 + c3 t^3 with t = s - params[i].
    coeffs: Vec<[[f64; 4]; 2]>,
    pub closed: bool,
}

/// Result of a closest point query.
#[derive(Debug, Clone, Copy)]
pub struct Projection {
    pub s_star: f64,
    pub point: Point2,
    pub distance: f64,
    /// +1 left of the curve, -1 right, 0 on the curve.
    pub side: i32,
    /// True if the minimizing parameter was clamped to an open end.
    pub clamped: bool,
}

impl Spline {
    pub fn fit(points: &[Point2], closed: bool) -> Result<Self, CurveError> {
        if points.len() < 2 {
            return Err(CurveError::TooFewPoints);
        }
        for p in points {
            if !p.is_finite() {
                return Err(CurveError::NonFinitePoint);
            }
        }
        let n = points.len();
        let mut params = Vec::with_capacity(n + 1);
        params.push(0.0);
        for i in 1..n {
            let d = points[i].dist(points[i - 1]);
            if d == 0.0 {
                return Err(CurveError::RepeatedPoint { index: i - 1 });
            }
            params.push(params[i - 1] + d);
        }
        if closed {
            let d = points[0].dist(points[n - 1]);
            if d == 0.0 {
                return Err(CurveError::RepeatedPoint { index: n - 1 });
            }
            params.push(params[n - 1] + d);
        }

        let nseg = if closed { n } else { n - 1 };
        let h: Vec<f64> = (0..nseg).map(|i| params[i + 1] - params[i]).collect();
        let value = |i: usize, axis: usize| -> f64 {
            let p = points[i % n];
            if axis == 0 {
                p.x
            } else {
                p.y
            }
        };

        // second derivatives per axis
        let mut m = [vec![0.0; n], vec![0.0; n]];
        for axis in 0..2 {
            if closed {
                m[axis] = periodic_second_derivatives(&h, |i| value(i, axis));
            } else {
                m[axis] = natural_second_derivatives(&h, |i| value(i, axis));
            }
        }

        let mut coeffs = Vec::with_capacity(nseg);
        for i in 0..nseg {
            let mut c = [[0.0; 4]; 2];
            for axis in 0..2 {
                let yi = value(i, axis);
                let yj = value(i + 1, axis);
                let mi = m[axis][i % n];
                let mj = m[axis][(i + 1) % n];
                let hi = h[i];
                c[axis] = [
                    yi,
                    (yj - yi) / hi - hi * (2.0 * mi + mj) / 6.0,
                    mi / 2.0,
                    (mj - mi) / (6.0 * hi),
                ];
            }
            coeffs.push(c);
        }
        Ok(Spline {
            knots: points.to_vec(),
            params,
            coeffs,
            closed,
        })
    }

    pub fn length(&self) -> f64 {
        *self.params.last().unwrap()
    }

    pub fn param_range(&self) -> (f64, f64) {
        (0.0, self.length())
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let total = self.length();
        let s = if self.closed {
            s.rem_euclid(total)
        } else {
            s.clamp(0.0, total)
        };
        // binary search for the segment containing s
        let mut lo = 0usize;
        let mut hi = self.coeffs.len();
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.params[mid] <= s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo, s - self.params[lo])
    }

    pub fn eval(&self, s: f64) -> Point2 {
        let (i, t) = self.locate(s);
        let c = &self.coeffs[i];
        Point2::new(eval_cubic(&c[0], t), eval_cubic(&c[1], t))
    }

    /// Raw (non-normalized) derivative with respect to the parameter.
    pub fn deriv(&self, s: f64) -> Point2 {
        let (i, t) = self.locate(s);
        let c = &self.coeffs[i];
        Point2::new(eval_cubic_deriv(&c[0], t), eval_cubic_deriv(&c[1], t))
    }

    pub fn second_deriv(&self, s: f64) -> Point2 {
        let (i, t) = self.locate(s);
        let c = &self.coeffs[i];
        Point2::new(
            2.0 * c[0][2] + 6.0 * c[0][3] * t,
            2.0 * c[1][2] + 6.0 * c[1][3] * t,
        )
    }

    /// Unit tangent. Errors on a vanishing derivative.
    pub fn tangent(&self, s: f64) -> Result<Point2, CurveError> {
        self.deriv(s)
            .normalized()
            .ok_or(CurveError::VanishingTangent { s })
    }

    /// Unit left normal (tangent rotated +90 degrees).
    pub fn normal(&self, s: f64) -> Result<Point2, CurveError> {
        Ok(self.tangent(s)?.perp())
    }

    /// Signed curvature at parameter s.
    pub fn curvature(&self, s: f64) -> f64 {
        let d = self.deriv(s);
        let dd = self.second_deriv(s);
        let speed = d.norm();
        if speed == 0.0 {
            return 0.0;
        }
        d.cross(dd) / speed.powi(3)
    }

    /// Minimum radius of curvature over a dense sampling.
    pub fn min_radius_of_curvature(&self, samples_per_segment: usize) -> f64 {
        let total = self.length();
        let n = self.coeffs.len() * samples_per_segment;
        let mut max_kappa: f64 = 0.0;
        for k in 0..=n {
            let s = total * k as f64 / n as f64;
            max_kappa = max_kappa.max(self.curvature(s).abs());
        }
        if max_kappa == 0.0 {
            f64::INFINITY
        } else {
            1.0 / max_kappa
        }
    }

    /// Global closest point projection of `x` onto the curve.
    ///
    /// Dense seeding (at least 32 samples per segment) followed by a
    /// safeguarded Newton iteration on the stationarity condition
    /// (c(s) - x) . c'(s) = 0, with golden-section fallback on the bracketing
    /// samples.
    pub fn closest_point(&self, x: Point2) -> Projection {
        let total = self.length();
        let nseg = self.coeffs.len();
        let n = nseg * 32;
        let mut best_k = 0usize;
        let mut best_d2 = f64::INFINITY;
        let count = if self.closed { n } else { n + 1 };
        for k in 0..count {
            let s = total * k as f64 / n as f64;
            let d2 = {
                let p = self.eval(s);
                let dx = p.sub(x);
                dx.dot(dx)
            };
            if d2 < best_d2 {
                best_d2 = d2;
                best_k = k;
            }
        }
        let ds = total / n as f64;
        let s_seed = total * best_k as f64 / n as f64;
        let (mut lo, mut hi) = (s_seed - ds, s_seed + ds);
        if !self.closed {
            lo = lo.max(0.0);
            hi = hi.min(total);
        }

        // safeguarded Newton on g(s) = (c(s) - x) . c'(s)
        let mut s = s_seed;
        let mut converged = false;
        for _ in 0..30 {
            let p = self.eval(s);
            let d = self.deriv(s);
            let dd = self.second_deriv(s);
            let r = p.sub(x);
            let g = r.dot(d);
            let gp = d.dot(d) + r.dot(dd);
            if gp.abs() < 1e-300 {
                break;
            }
            let step = g / gp;
            let s_new = s - step;
            if s_new < lo || s_new > hi {
                break;
            }
            let done = step.abs() <= 1e-15 * total.max(1.0);
            s = s_new;
            if done {
                converged = true;
                break;
            }
        }
        if !converged {
            // golden-section on the bracketing samples
            s = golden_section(lo, hi, |s| {
                let r = self.eval(s).sub(x);
                r.dot(r)
            });
        }
        // open ends can be the global minimizer
        let mut s_star = s;
        let mut d_star = self.eval(s).dist(x);
        let mut clamped = false;
        if !self.closed {
            for (s_end, _) in [(0.0, ()), (total, ())] {
                let d_end = self.eval(s_end).dist(x);
                if d_end < d_star {
                    s_star = s_end;
                    d_star = d_end;
                }
            }
            clamped = s_star <= 0.0 || s_star >= total;
        }
        let point = self.eval(s_star);
        let normal = self
            .normal(s_star)
            .unwrap_or_else(|_| Point2::new(0.0, 0.0));
        let side = if d_star < ON_CURVE_TOL * total.max(1.0) {
            0
        } else {
            let v = x.sub(point).dot(normal);
            if v > 0.0 {
                1
            } else if v < 0.0 {
                -1
            } else {
                0
            }
        };
        Projection {
            s_star,
            point,
            distance: d_star,
            side,
            clamped,
        }
    }

    /// Reverse the curve orientation.
    pub fn reversed(&self) -> Spline {
        let mut pts = self.knots.clone();
        pts.reverse();
        Spline::fit(&pts, self.closed).expect("reversing a valid spline")
    }
}

fn eval_cubic(c: &[f64; 4], t: f64) -> f64 {
    ((c[3] * t + c[2]) * t + c[1]) * t + c[0]
}

fn eval_cubic_deriv(c: &[f64; 4], t: f64) -> f64 {
    (3.0 * c[3] * t + 2.0 * c[2]) * t + c[1]
}

/// Natural cubic spline second derivatives via the Thomas algorithm.
fn natural_second_derivatives(h: &[f64], y: impl Fn(usize) -> f64) -> Vec<f64> {
    let n = h.len() + 1; // number of knots
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    let interior = n - 2;
    let mut diag = vec![0.0; interior];
    let mut sub = vec![0.0; interior];
    let mut sup = vec![0.0; interior];
    let mut rhs = vec![0.0; interior];
    for i in 0..interior {
        let k = i + 1;
        sub[i] = h[k - 1];
        diag[i] = 2.0 * (h[k - 1] + h[k]);
        sup[i] = h[k];
        rhs[i] = 6.0 * ((y(k + 1) - y(k)) / h[k] - (y(k) - y(k - 1)) / h[k - 1]);
    }
    // Thomas sweep
    for i in 1..interior {
        let w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    m[interior] = rhs[interior - 1] / diag[interior - 1];
    for i in (0..interior - 1).rev() {
        m[i + 1] = (rhs[i] - sup[i] * m[i + 2]) / diag[i];
    }
    m
}

/// Periodic cubic spline second derivatives (dense solve; knot counts are
/// small).
fn periodic_second_derivatives(h: &[f64], y: impl Fn(usize) -> f64) -> Vec<f64> {
    let n = h.len(); // knots == segments for a closed curve
    if n < 3 {
        return vec![0.0; n];
    }
    let mut a = nalgebra::DMatrix::<f64>::zeros(n, n);
    let mut b = nalgebra::DVector::<f64>::zeros(n);
    for i in 0..n {
        let prev = (i + n - 1) % n;
        let next = (i + 1) % n;
        a[(i, prev)] += h[prev];
        a[(i, i)] += 2.0 * (h[prev] + h[i]);
        a[(i, next)] += h[i];
        b[i] = 6.0 * ((y(i + 1) - y(i)) / h[i] - (y(i) - y(prev)) / h[prev]);
    }
    let sol = a.lu().solve(&b).expect("periodic spline system is SPD-like");
    sol.iter().copied().collect()
}

fn golden_section(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..80 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// The discrete crack: an initial crack polyline plus the tips appended by the
/// propagation loop, with chord-length bookkeeping.
#[derive(Debug, Clone)]
pub struct CrackPath {
    /// All knots: the initial crack discretization followed by appended tips.
    /// The last knot is the active (growing) tip.
    pub knots: Vec<Point2>,
    /// Number of knots describing the initial crack (>= 2).
    pub n_initial: usize,
    /// Chord length of the initial crack.
    pub ell0: f64,
    /// Crack increment per propagation step.
    pub delta_ell: f64,
    /// Current chord length: ell0 plus the polyline length through the
    /// appended tips.
    pub ell: f64,
    pub spline: Spline,
}

impl CrackPath {
    pub fn new(initial: Vec<Point2>, delta_ell: f64) -> Result<Self, CurveError> {
        let spline = Spline::fit(&initial, false)?;
        let ell0 = polyline_length(&initial);
        Ok(CrackPath {
            n_initial: initial.len(),
            ell0,
            delta_ell,
            ell: ell0,
            knots: initial,
            spline,
        })
    }

    /// Reassemble a path from serialized parts: all knots, the number of
    /// initial-crack knots, and the step length.
    pub fn from_parts(
        knots: Vec<Point2>,
        n_initial: usize,
        delta_ell: f64,
    ) -> Result<Self, CurveError> {
        if n_initial < 2 || n_initial > knots.len() {
            return Err(CurveError::TooFewPoints);
        }
        let spline = Spline::fit(&knots, false)?;
        let ell0 = polyline_length(&knots[..n_initial]);
        let ell = ell0 + polyline_length(&knots[n_initial - 1..]);
        Ok(CrackPath {
            knots,
            n_initial,
            ell0,
            delta_ell,
            ell,
            spline,
        })
    }

    pub fn tip(&self) -> Point2 {
        *self.knots.last().unwrap()
    }

    /// Fixed end of the crack (opposite the growing tip).
    pub fn root(&self) -> Point2 {
        self.knots[0]
    }

    /// Unit tangent at the growing tip (one-sided spline derivative at the
    /// last knot), pointing in the growth direction.
    pub fn tip_tangent(&self) -> Result<Point2, CurveError> {
        self.spline.tangent(self.spline.length())
    }

    /// Number of appended steps, (ell - ell0) / delta_ell.
    pub fn steps(&self) -> usize {
        ((self.ell - self.ell0) / self.delta_ell).round() as usize
    }

    /// Append one growth increment of length `delta_ell` toward `new_tip` as
    /// two collinear knots (midpoint and tip). The doubled end knots keep the
    /// fitted spline nearly straight along the new segment; a single kinked
    /// end knot makes the interpolant overshoot the growth direction by some
    /// 25%, which destabilizes a propagation that feeds the tip tangent back
    /// into the next kink.
    pub fn append_step(&self, new_tip: Point2) -> Result<CrackPath, CurveError> {
        let step = new_tip.dist(self.tip());
        if (step - self.delta_ell).abs() > 1e-10 * self.delta_ell.max(1e-300) {
            return Err(CurveError::StepLengthMismatch {
                got: step,
                expected: self.delta_ell,
            });
        }
        let mut knots = self.knots.clone();
        knots.push(self.tip().midpoint(new_tip));
        knots.push(new_tip);
        let spline = Spline::fit(&knots, false)?;
        if spline_self_intersects(&spline) {
            return Err(CurveError::SelfIntersection);
        }
        Ok(CrackPath {
            knots,
            n_initial: self.n_initial,
            ell0: self.ell0,
            delta_ell: self.delta_ell,
            ell: self.ell + step,
            spline,
        })
    }

    /// Append a new tip at distance `delta_ell` from the current tip.
    pub fn append_tip(&self, new_tip: Point2) -> Result<CrackPath, CurveError> {
        let step = new_tip.dist(self.tip());
        if (step - self.delta_ell).abs() > 1e-10 * self.delta_ell.max(1e-300) {
            return Err(CurveError::StepLengthMismatch {
                got: step,
                expected: self.delta_ell,
            });
        }
        let mut knots = self.knots.clone();
        knots.push(new_tip);
        let spline = Spline::fit(&knots, false)?;
        if spline_self_intersects(&spline) {
            return Err(CurveError::SelfIntersection);
        }
        Ok(CrackPath {
            knots,
            n_initial: self.n_initial,
            ell0: self.ell0,
            delta_ell: self.delta_ell,
            ell: self.ell + step,
            spline,
        })
    }
}

pub fn polyline_length(points: &[Point2]) -> f64 {
    points.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Segment-pair sweep over a dense polyline sampling of the spline.
pub fn spline_self_intersects(spline: &Spline) -> bool {
    let nseg = spline.knots.len().max(2) - 1;
    let n = nseg * 64;
    let total = spline.length();
    let tol = 1e-9 * total;
    let pts: Vec<Point2> = (0..=n)
        .map(|k| spline.eval(total * k as f64 / n as f64))
        .collect();
    for i in 0..n {
        for j in (i + 2)..n {
            if segments_intersect(pts[i], pts[i + 1], pts[j], pts[j + 1], tol) {
                return true;
            }
        }
    }
    false
}

fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2, tol: f64) -> bool {
    let r = b.sub(a);
    let s = d.sub(c);
    let denom = r.cross(s);
    let qp = c.sub(a);
    if denom.abs() < 1e-300 {
        return false; // parallel; overlap handled by neighboring pairs
    }
    let t = qp.cross(s) / denom;
    let u = qp.cross(r) / denom;
    let eps_t = tol / r.norm().max(1e-300);
    let eps_u = tol / s.norm().max(1e-300);
    t > eps_t && t < 1.0 - eps_t && u > eps_u && u < 1.0 - eps_u
}
