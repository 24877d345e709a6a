//! Closed-form linear elastic crack fields used as boundary data and as
//! verification references: straight cracks under remote loading, near-tip
//! (Williams) expansions, and circular-arc cracks built from complex
//! potentials on a conformally mapped domain.

use num_complex::Complex64 as C;

use crate::error::ExactError;
use crate::fem::Material;
use crate::geometry::Point2;

/// Offset used to resolve which crack flank a point on the slit belongs to.
const FLANK_EPS: f64 = 1e-13;

/// Values of the Muskhelishvili potentials and derivatives at one point.
#[derive(Debug, Clone, Copy)]
pub struct PotentialParts {
    pub phi: C,
    pub dphi: C,
    pub ddphi: C,
    pub psi: C,
    pub dpsi: C,
}

impl std::ops::Add for PotentialParts {
    type Output = PotentialParts;
    fn add(self, o: PotentialParts) -> PotentialParts {
        PotentialParts {
            phi: self.phi + o.phi,
            dphi: self.dphi + o.dphi,
            ddphi: self.ddphi + o.ddphi,
            psi: self.psi + o.psi,
            dpsi: self.dpsi + o.dpsi,
        }
    }
}

/// Stresses [sxx, syy, sxy] from potentials at z.
pub fn stress_from_potentials(z: C, p: &PotentialParts) -> [f64; 3] {
    let s = 4.0 * p.dphi.re;
    let b = 2.0 * (z.conj() * p.ddphi + p.dpsi);
    [(s - b.re) / 2.0, (s + b.re) / 2.0, b.im / 2.0]
}

/// Displacements [ux, uy] from potentials at z.
pub fn displacement_from_potentials(z: C, p: &PotentialParts, kappa: f64, mu: f64) -> [f64; 2] {
    let d = kappa * p.phi - z * p.dphi.conj() - p.psi.conj();
    [d.re / (2.0 * mu), d.im / (2.0 * mu)]
}

/// A reference elastic field with a possible slit: evaluation takes a flank
/// hint (+1 above / left of the crack, -1 below) that only matters on the
/// slit itself.
pub trait ReferenceField {
    fn stress(&self, p: Point2, flank: i32) -> [f64; 3];
    fn displacement(&self, p: Point2, flank: i32) -> [f64; 2];
}

/// sqrt(z^2 - a^2) with the branch cut exactly on the segment [-a, a]:
/// principal sqrt(z - a) times principal sqrt(z + a).
fn sqrt_cut(z: C, a: f64) -> C {
    (z - a).sqrt() * (z + a).sqrt()
}

/// Straight traction-free crack on [-a, a] along the x-axis under uniform
/// remote stress, by superposition of an equibiaxial part, a pure shear part
/// and a crack-parallel uniform part.
#[derive(Debug, Clone, Copy)]
pub struct StraightCrackField {
    pub a: f64,
    /// Remote stress [sxx, syy, sxy] at infinity.
    pub remote: [f64; 3],
    pub kappa: f64,
    pub mu: f64,
}

impl StraightCrackField {
    pub fn new(a: f64, remote: [f64; 3], mat: &Material) -> Result<Self, ExactError> {
        if !(a > 0.0) {
            return Err(ExactError::InvalidParameter(format!(
                "crack half-length {a} must be positive"
            )));
        }
        Ok(StraightCrackField {
            a,
            remote,
            kappa: mat.kappa(),
            mu: mat.mu(),
        })
    }

    pub fn potentials(&self, z: C) -> PotentialParts {
        let a = self.a;
        let [sxx, syy, sxy] = self.remote;
        let a2 = a * a;
        let root = sqrt_cut(z, a);
        let r3 = root * root * root;

        // equibiaxial remote tension sigma = syy (sxx and syy both equal syy)
        let sig = syy;
        let eq = PotentialParts {
            phi: 0.5 * sig * root,
            dphi: 0.5 * sig * z / root,
            ddphi: -0.5 * sig * a2 / r3,
            psi: -0.5 * sig * a2 / root,
            dpsi: 0.5 * sig * a2 * z / r3,
        };
        // crack-parallel uniform stress s = sxx - syy (faces already free)
        let s = sxx - syy;
        let par = PotentialParts {
            phi: 0.25 * s * z,
            dphi: C::new(0.25 * s, 0.0),
            ddphi: C::new(0.0, 0.0),
            psi: -0.5 * s * z,
            dpsi: C::new(-0.5 * s, 0.0),
        };
        // remote shear tau = sxy
        let tau = sxy;
        let i = C::i();
        let z2 = z * z;
        let sh = PotentialParts {
            phi: -0.5 * i * tau * root,
            dphi: -0.5 * i * tau * z / root,
            ddphi: 0.5 * i * tau * a2 / r3,
            psi: 0.5 * i * tau * (root + z2 / root),
            dpsi: 0.5 * i * tau * (3.0 * z / root - z2 * z / r3),
        };
        eq + par + sh
    }

    fn offset(&self, p: Point2, flank: i32) -> C {
        let mut z = C::new(p.x, p.y);
        if p.y.abs() < FLANK_EPS * self.a && p.x.abs() < self.a {
            let side = if flank < 0 { -1.0 } else { 1.0 };
            z += C::new(0.0, side * FLANK_EPS * self.a);
        }
        z
    }
}

impl ReferenceField for StraightCrackField {
    fn stress(&self, p: Point2, flank: i32) -> [f64; 3] {
        let z = self.offset(p, flank);
        stress_from_potentials(z, &self.potentials(z))
    }

    fn displacement(&self, p: Point2, flank: i32) -> [f64; 2] {
        let z = self.offset(p, flank);
        displacement_from_potentials(z, &self.potentials(z), self.kappa, self.mu)
    }
}

/// Uniaxial remote tension sigma normal to the crack.
pub fn griffith_field(a: f64, sigma: f64, mat: &Material) -> Result<StraightCrackField, ExactError> {
    StraightCrackField::new(a, [0.0, sigma, 0.0], mat)
}

/// Exact stress intensity factors of the straight crack under uniform remote
/// stress (same at both tips).
pub fn straight_crack_sif(a: f64, remote: [f64; 3]) -> (f64, f64) {
    let f = (std::f64::consts::PI * a).sqrt();
    (remote[1] * f, remote[2] * f)
}

/// SIFs of a crack whose normal makes angle beta with a remote uniaxial
/// tension sigma (beta = 0 is pure mode I).
pub fn inclined_crack_sif(a: f64, sigma: f64, beta: f64) -> (f64, f64) {
    let f = sigma * (std::f64::consts::PI * a).sqrt();
    (f * beta.cos() * beta.cos(), f * beta.sin() * beta.cos())
}

/// First-order near-tip (Williams) field for given K_I, K_II: crack along the
/// negative x-axis with the tip at the origin.
#[derive(Debug, Clone, Copy)]
pub struct WilliamsField {
    pub k1: f64,
    pub k2: f64,
    pub kappa: f64,
    pub mu: f64,
}

impl WilliamsField {
    pub fn new(k1: f64, k2: f64, mat: &Material) -> Self {
        WilliamsField {
            k1,
            k2,
            kappa: mat.kappa(),
            mu: mat.mu(),
        }
    }

    fn polar(&self, p: Point2, flank: i32) -> (f64, f64) {
        let r = p.norm();
        let mut th = p.y.atan2(p.x);
        if p.y.abs() < FLANK_EPS && p.x < 0.0 {
            th = if flank < 0 {
                -std::f64::consts::PI
            } else {
                std::f64::consts::PI
            };
        }
        (r, th)
    }
}

impl ReferenceField for WilliamsField {
    fn stress(&self, p: Point2, flank: i32) -> [f64; 3] {
        let (r, th) = self.polar(p, flank);
        let c = 1.0 / (2.0 * std::f64::consts::PI * r).sqrt();
        let (h, h3) = (th / 2.0, 1.5 * th);
        let (ch, sh) = (h.cos(), h.sin());
        let (c3, s3) = (h3.cos(), h3.sin());
        let s1 = [
            c * self.k1 * ch * (1.0 - sh * s3),
            c * self.k1 * ch * (1.0 + sh * s3),
            c * self.k1 * ch * sh * c3,
        ];
        let s2 = [
            -c * self.k2 * sh * (2.0 + ch * c3),
            c * self.k2 * sh * ch * c3,
            c * self.k2 * ch * (1.0 - sh * s3),
        ];
        [s1[0] + s2[0], s1[1] + s2[1], s1[2] + s2[2]]
    }

    fn displacement(&self, p: Point2, flank: i32) -> [f64; 2] {
        let (r, th) = self.polar(p, flank);
        let c = (r / (2.0 * std::f64::consts::PI)).sqrt() / (2.0 * self.mu);
        let h = th / 2.0;
        let (ch, sh) = (h.cos(), h.sin());
        let k = self.kappa;
        [
            c * (self.k1 * ch * (k - th.cos()) + self.k2 * sh * (k + 2.0 + th.cos())),
            c * (self.k1 * sh * (k - th.cos()) - self.k2 * ch * (k - 2.0 + th.cos())),
        ]
    }
}

/// Rigid frame: maps a field defined in local coordinates (origin at `origin`,
/// local x-axis at `angle`) into global coordinates.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub origin: Point2,
    pub angle: f64,
}

impl Frame {
    pub fn to_local(&self, p: Point2) -> Point2 {
        p.sub(self.origin).rotate(-self.angle)
    }

    pub fn vector_to_global(&self, v: [f64; 2]) -> [f64; 2] {
        let r = Point2::new(v[0], v[1]).rotate(self.angle);
        [r.x, r.y]
    }

    /// Rotate a local stress [sxx, syy, sxy] into global components.
    pub fn stress_to_global(&self, s: [f64; 3]) -> [f64; 3] {
        rotate_stress(s, self.angle)
    }

    /// Rotate a global stress into local components.
    pub fn stress_to_local(&self, s: [f64; 3]) -> [f64; 3] {
        rotate_stress(s, -self.angle)
    }
}

/// Components of a stress tensor in axes rotated by -angle (i.e. the tensor
/// expressed after rotating the frame contents by +angle).
pub fn rotate_stress(s: [f64; 3], angle: f64) -> [f64; 3] {
    let (c, sn) = (angle.cos(), angle.sin());
    let [sxx, syy, sxy] = s;
    [
        c * c * sxx + sn * sn * syy - 2.0 * sn * c * sxy,
        sn * sn * sxx + c * c * syy + 2.0 * sn * c * sxy,
        sn * c * (sxx - syy) + (c * c - sn * sn) * sxy,
    ]
}

/// A reference field rigidly placed in the plane.
pub struct PlacedField<F: ReferenceField> {
    pub frame: Frame,
    pub inner: F,
}

impl<F: ReferenceField> ReferenceField for PlacedField<F> {
    fn stress(&self, p: Point2, flank: i32) -> [f64; 3] {
        self.frame
            .stress_to_global(self.inner.stress(self.frame.to_local(p), flank))
    }

    fn displacement(&self, p: Point2, flank: i32) -> [f64; 2] {
        self.frame
            .vector_to_global(self.inner.displacement(self.frame.to_local(p), flank))
    }
}

/// Extract (K_I, K_II) from a field by the near-tip limit: sample the stress
/// ahead of the tip at geometrically shrinking radii and extrapolate the
/// K estimates in sqrt(r) with a three-point Richardson step.
///
/// `tip` is the tip position, `ahead` the unit direction of prospective
/// growth, `scale` a characteristic length of the problem.
pub fn sif_near_field(field: &dyn ReferenceField, tip: Point2, ahead: Point2, scale: f64) -> (f64, f64) {
    let angle = ahead.y.atan2(ahead.x);
    let sample = |r: f64| -> (f64, f64) {
        let p = tip.add(ahead.scale(r));
        let local = rotate_stress(field.stress(p, 0), -angle);
        let f = (2.0 * std::f64::consts::PI * r).sqrt();
        (f * local[1], f * local[2])
    };
    // K(x) = K + c1 x + c2 x^2 with x = sqrt(r); eliminate both terms from
    // three samples at x, x/2, x/4
    let r0 = 1e-4 * scale;
    let (k1a, k2a) = sample(r0);
    let (k1b, k2b) = sample(r0 / 4.0);
    let (k1c, k2c) = sample(r0 / 16.0);
    let extrap = |a: f64, b: f64, c: f64| (8.0 * c - 6.0 * b + a) / 3.0;
    (extrap(k1a, k1b, k1c), extrap(k2a, k2b, k2c))
}

/// Conformal map between the exterior of the unit disk (zeta plane) and the
/// exterior of a circular-arc slit of radius `r` spanning angles [-alpha,
/// alpha] (z plane). Built from three elementary maps: a Mobius map taking
/// the tips to 0 and infinity, a square root opening the slit into a half
/// plane, and a Mobius map onto the disk exterior.
#[derive(Debug, Clone, Copy)]
struct ArcMap {
    r: f64,
    alpha: f64,
    /// upper tip r e^{i alpha}
    a: C,
    /// lower tip r e^{-i alpha}
    b: C,
    /// image of z = infinity in the half-plane coordinate
    zp0: C,
}

impl ArcMap {
    fn new(r: f64, alpha: f64) -> ArcMap {
        ArcMap {
            r,
            alpha,
            a: C::from_polar(r, alpha),
            b: C::from_polar(r, -alpha),
            zp0: C::from_polar(1.0, -alpha / 2.0),
        }
    }

    /// zeta for a point z in the slit exterior.
    fn to_zeta(&self, z: C) -> C {
        let w = (z - self.a) / (z - self.b);
        let zp = (C::from_polar(1.0, -self.alpha) * w).sqrt();
        (zp + self.zp0.conj()) / (zp - self.zp0)
    }

    /// z = omega(zeta) together with omega' and omega''.
    fn omega(&self, zeta: C) -> (C, C, C) {
        let zp = (zeta * self.zp0 + self.zp0.conj()) / (zeta - 1.0);
        let two_cos = 2.0 * (self.alpha / 2.0).cos();
        let dm = zeta - 1.0;
        let zp_d = -two_cos / (dm * dm);
        let zp_dd = 2.0 * two_cos / (dm * dm * dm);
        let rot = C::from_polar(1.0, self.alpha);
        let w = rot * zp * zp;
        let w_d = rot * 2.0 * zp * zp_d;
        let w_dd = rot * 2.0 * (zp_d * zp_d + zp * zp_dd);
        let om = 1.0 - w;
        let z = (self.a - self.b * w) / om;
        let z_w = (self.a - self.b) / (om * om);
        let z_ww = 2.0 * (self.a - self.b) / (om * om * om);
        (z, z_w * w_d, z_ww * w_d * w_d + z_w * w_dd)
    }
}

/// Traction-free circular-arc crack of radius `r` spanning [-alpha, alpha]
/// under uniform remote stress, solved by collocation least squares for the
/// Laurent coefficients of the complex potentials in the mapped plane.
pub struct ArcCrackField {
    map: ArcMap,
    pub remote: [f64; 3],
    pub kappa: f64,
    pub mu: f64,
    gamma: f64,
    gamma_p: C,
    coeff_a: Vec<C>,
    coeff_b: Vec<C>,
    /// Coefficients of the simple poles of Psi at the tip preimages; psi
    /// behaves like 1/sqrt(z - tip) there, which the mapping turns into a
    /// first-order pole on the unit circle.
    coeff_tip: [C; 2],
    /// Root-mean-square boundary residual of the collocation solve, relative
    /// to the remote stress magnitude.
    pub residual: f64,
}

impl ArcCrackField {
    pub fn solve(
        r: f64,
        alpha: f64,
        remote: [f64; 3],
        mat: &Material,
        n_terms: usize,
    ) -> Result<ArcCrackField, ExactError> {
        if !(alpha > 0.0 && alpha < std::f64::consts::PI) {
            return Err(ExactError::SpanOutOfRange { span: alpha });
        }
        if !(r > 0.0) {
            return Err(ExactError::InvalidParameter(format!(
                "arc radius {r} must be positive"
            )));
        }
        let map = ArcMap::new(r, alpha);
        let [sxx, syy, sxy] = remote;
        let gamma = (sxx + syy) / 4.0;
        let gamma_p = C::new((syy - sxx) / 2.0, sxy);

        // preimages of the tips on the unit circle
        let zeta_tips = [C::new(1.0, 0.0), -C::from_polar(1.0, alpha)];

        let n = n_terms;
        let m = 8 * n;
        let ncols = 4 * n + 6;
        let mut mat_rows = nalgebra::DMatrix::<f64>::zeros(2 * m, ncols);
        let mut rhs = nalgebra::DVector::<f64>::zeros(2 * m);
        for j in 0..m {
            let gam_ang = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
            let sig = C::from_polar(1.0, gam_ang);
            let (om, om_d, _) = map.omega(sig);
            let cd = om_d.conj();
            // traction-free condition multiplied through by conj(omega') so
            // the tip zeros of omega' do not blow up any term
            let mut put = |col: usize, v: C| {
                mat_rows[(2 * j, col)] = v.re;
                mat_rows[(2 * j + 1, col)] = v.im;
            };
            let sig_inv = 1.0 / sig;
            let mut spow = sig_inv; // sigma^{-n}
            for k in 1..=n {
                let kk = k as f64;
                let conj_pow = spow.conj(); // conj(sigma)^{-n}
                let tail = om * conj_pow * sig; // omega * conj(sigma)^{-n-1}
                let ca = cd * spow - kk * tail;
                put(4 * (k - 1), ca);
                put(4 * (k - 1) + 1, C::i() * (cd * spow + kk * tail));
                put(4 * (k - 1) + 2, cd * conj_pow);
                put(4 * (k - 1) + 3, -C::i() * cd * conj_pow);
                spow *= sig_inv;
            }
            for (t, &zt) in zeta_tips.iter().enumerate() {
                let pole = (1.0 / (sig - zt)).conj();
                put(4 * n + 2 * t, cd * pole);
                put(4 * n + 2 * t + 1, -C::i() * cd * pole);
            }
            put(4 * n + 4, -cd);
            put(4 * n + 5, -C::i() * cd);
            let known =
                2.0 * gamma * om * cd + (gamma_p * om * om_d).conj();
            rhs[2 * j] = -known.re;
            rhs[2 * j + 1] = -known.im;
        }
        let svd = mat_rows.clone().svd(true, true);
        let x = svd
            .solve(&rhs, 1e-12)
            .map_err(|e| ExactError::SolveFailed(e.to_string()))?;
        let res = (&mat_rows * &x - &rhs).norm() / (m as f64).sqrt();
        let scale = remote.iter().map(|s| s.abs()).fold(0.0, f64::max).max(1e-300);
        let coeff_a = (0..n)
            .map(|k| C::new(x[4 * k], x[4 * k + 1]))
            .collect();
        let coeff_b = (0..n)
            .map(|k| C::new(x[4 * k + 2], x[4 * k + 3]))
            .collect();
        let coeff_tip = [
            C::new(x[4 * n], x[4 * n + 1]),
            C::new(x[4 * n + 2], x[4 * n + 3]),
        ];
        Ok(ArcCrackField {
            map,
            remote,
            kappa: mat.kappa(),
            mu: mat.mu(),
            gamma,
            gamma_p,
            coeff_a,
            coeff_b,
            coeff_tip,
            residual: res / (scale * r),
        })
    }

    pub fn radius(&self) -> f64 {
        self.map.r
    }

    pub fn half_angle(&self) -> f64 {
        self.map.alpha
    }

    /// Tip positions (upper, lower).
    pub fn tips(&self) -> (Point2, Point2) {
        (
            Point2::new(self.map.a.re, self.map.a.im),
            Point2::new(self.map.b.re, self.map.b.im),
        )
    }

    /// Unit growth directions ahead of the (upper, lower) tips, continuing
    /// the circle.
    pub fn tip_directions(&self) -> (Point2, Point2) {
        let (s, c) = self.map.alpha.sin_cos();
        (Point2::new(-s, c), Point2::new(-s, -c))
    }

    fn offset(&self, p: Point2, flank: i32) -> C {
        let rr = p.norm();
        let th = p.y.atan2(p.x);
        let on_circle = (rr - self.map.r).abs() < FLANK_EPS * self.map.r;
        if on_circle && th.abs() <= self.map.alpha {
            // positive flank is the left of the counterclockwise
            // parametrization, i.e. the inside of the circle
            let side = if flank < 0 { 1.0 } else { -1.0 };
            let scaled = rr * (1.0 + side * FLANK_EPS);
            return C::from_polar(scaled, th);
        }
        C::new(p.x, p.y)
    }

    fn potentials(&self, z: C) -> PotentialParts {
        let zeta = self.map.to_zeta(z);
        let (om, om_d, om_dd) = self.map.omega(zeta);
        let zeta_inv = 1.0 / zeta;
        let mut phi_m = self.gamma * om;
        let mut dphi_m = self.gamma * om_d;
        let mut ddphi_m = self.gamma * om_dd;
        let mut psi_m = self.gamma_p * om;
        let mut dpsi_m = self.gamma_p * om_d;
        let mut pw = zeta_inv;
        for k in 0..self.coeff_a.len() {
            let kk = (k + 1) as f64;
            let (ca, cb) = (self.coeff_a[k], self.coeff_b[k]);
            phi_m += ca * pw;
            psi_m += cb * pw;
            let dp = pw * zeta_inv;
            dphi_m += -kk * ca * dp;
            dpsi_m += -kk * cb * dp;
            ddphi_m += kk * (kk + 1.0) * ca * dp * zeta_inv;
            pw *= zeta_inv;
        }
        let zeta_tips = [C::new(1.0, 0.0), -C::from_polar(1.0, self.map.alpha)];
        for (t, &zt) in zeta_tips.iter().enumerate() {
            let d = self.coeff_tip[t];
            let dm = zeta - zt;
            psi_m += d / dm;
            dpsi_m += -d / (dm * dm);
        }
        // chain rule back to z derivatives
        let dphi = dphi_m / om_d;
        let ddphi = (ddphi_m * om_d - dphi_m * om_dd) / (om_d * om_d * om_d);
        let dpsi = dpsi_m / om_d;
        PotentialParts {
            phi: phi_m,
            dphi,
            ddphi,
            psi: psi_m,
            dpsi,
        }
    }
}

impl ReferenceField for ArcCrackField {
    fn stress(&self, p: Point2, flank: i32) -> [f64; 3] {
        let z = self.offset(p, flank);
        stress_from_potentials(z, &self.potentials(z))
    }

    fn displacement(&self, p: Point2, flank: i32) -> [f64; 2] {
        let z = self.offset(p, flank);
        displacement_from_potentials(z, &self.potentials(z), self.kappa, self.mu)
    }
}

/// SIFs of the arc crack at its upper (+alpha) or lower (-alpha) tip by the
/// near-field limit.
pub fn arc_crack_sif(field: &ArcCrackField, upper: bool) -> (f64, f64) {
    let (ta, tb) = field.tips();
    let (da, db) = field.tip_directions();
    let (tip, dir) = if upper { (ta, da) } else { (tb, db) };
    sif_near_field(field, tip, dir, field.radius() * field.half_angle().sin())
}

/// Closed-form SIFs for the arc crack under remote equibiaxial tension
/// sigma (equal at both tips).
pub fn arc_equibiaxial_sif(r: f64, alpha: f64, sigma: f64) -> (f64, f64) {
    let h = alpha / 2.0;
    let denom = 1.0 + h.sin() * h.sin();
    let f = sigma * (std::f64::consts::PI * r * alpha.sin()).sqrt() / denom;
    (f * h.cos(), f * h.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn material() -> Material {
        Material {
            e: 1.0,
            nu: 0.3,
            plane_strain: true,
            k_c: 1.0,
        }
    }

    /// Divergence of the stress field by central differences.
    fn fd_divergence(field: &dyn ReferenceField, p: Point2, h: f64) -> [f64; 2] {
        let sxp = field.stress(Point2::new(p.x + h, p.y), 0);
        let sxm = field.stress(Point2::new(p.x - h, p.y), 0);
        let syp = field.stress(Point2::new(p.x, p.y + h), 0);
        let sym = field.stress(Point2::new(p.x, p.y - h), 0);
        [
            (sxp[0] - sxm[0]) / (2.0 * h) + (syp[2] - sym[2]) / (2.0 * h),
            (sxp[2] - sxm[2]) / (2.0 * h) + (syp[1] - sym[1]) / (2.0 * h),
        ]
    }

    /// Compatibility of stress and displacement by differentiating u.
    fn fd_stress_from_u(
        field: &dyn ReferenceField,
        mat: &Material,
        p: Point2,
        h: f64,
    ) -> [f64; 3] {
        let uxp = field.displacement(Point2::new(p.x + h, p.y), 0);
        let uxm = field.displacement(Point2::new(p.x - h, p.y), 0);
        let uyp = field.displacement(Point2::new(p.x, p.y + h), 0);
        let uym = field.displacement(Point2::new(p.x, p.y - h), 0);
        let hmat = [
            [
                (uxp[0] - uxm[0]) / (2.0 * h),
                (uyp[0] - uym[0]) / (2.0 * h),
            ],
            [
                (uxp[1] - uxm[1]) / (2.0 * h),
                (uyp[1] - uym[1]) / (2.0 * h),
            ],
        ];
        crate::fem::stress_from_gradient(mat, &hmat)
    }

    #[test]
    fn griffith_far_field_and_faces() {
        let mat = material();
        let f = griffith_field(1.0, 2.5, &mat).unwrap();
        // remote behavior
        let far = f.stress(Point2::new(7.0e5, -3.0e5), 0);
        assert!(far[0].abs() < 1e-5);
        assert!((far[1] - 2.5).abs() < 1e-5);
        assert!(far[2].abs() < 1e-5);
        // traction-free faces
        for &x in &[-0.9, -0.4, 0.0, 0.3, 0.85] {
            for flank in [1, -1] {
                let s = f.stress(Point2::new(x, 0.0), flank);
                assert!(s[1].abs() < 1e-5, "syy on face: {}", s[1]);
                assert!(s[2].abs() < 1e-5, "sxy on face: {}", s[2]);
            }
        }
    }

    #[test]
    fn straight_crack_general_remote_self_consistency() {
        let mat = material();
        let f = StraightCrackField::new(1.3, [0.7, 1.9, -0.6], &mat).unwrap();
        // equilibrium away from the crack
        for p in [
            Point2::new(1.7, 0.4),
            Point2::new(-0.3, 1.1),
            Point2::new(0.2, -2.0),
        ] {
            let div = fd_divergence(&f, p, 1e-5);
            assert!(div[0].abs() < 1e-4, "div x = {}", div[0]);
            assert!(div[1].abs() < 1e-4, "div y = {}", div[1]);
        }
        // stress derived from displacement matches the direct stress
        for p in [Point2::new(2.0, 0.9), Point2::new(-1.1, -1.4)] {
            let direct = f.stress(p, 0);
            let fd = fd_stress_from_u(&f, &mat, p, 1e-5);
            for c in 0..3 {
                assert!(
                    (direct[c] - fd[c]).abs() < 1e-4,
                    "component {c}: {} vs {}",
                    direct[c],
                    fd[c]
                );
            }
        }
        // traction-free faces under the full remote load
        for &x in &[-1.1, 0.5, 1.0] {
            let s = f.stress(Point2::new(x, 0.0), 1);
            assert!(s[1].abs() < 1e-4);
            assert!(s[2].abs() < 1e-4);
        }
    }

    #[test]
    fn griffith_opening_is_elliptical() {
        let mat = material();
        let (a, sigma) = (1.0, 1.0);
        let f = griffith_field(a, sigma, &mat).unwrap();
        // jump in u_y across the faces should be proportional to
        // sqrt(a^2 - x^2); check the ratio is constant
        let mut ratios = Vec::new();
        for &x in &[-0.8, -0.35, 0.0, 0.5, 0.75] {
            let up = f.displacement(Point2::new(x, 0.0), 1);
            let dn = f.displacement(Point2::new(x, 0.0), -1);
            let jump = up[1] - dn[1];
            assert!(jump > 0.0, "crack must open");
            ratios.push(jump / (a * a - x * x).sqrt());
        }
        let mean: f64 = ratios.iter().sum::<f64>() / ratios.len() as f64;
        for r in &ratios {
            assert!((r - mean).abs() < 1e-5 * mean.abs(), "{ratios:?}");
        }
        // and the magnitude matches (kappa + 1) sigma / (2 mu) * sqrt(a^2-x^2)
        let expect = (mat.kappa() + 1.0) * sigma / (2.0 * mat.mu());
        assert!((mean - expect).abs() < 1e-5 * expect);
    }

    #[test]
    fn near_field_sif_matches_closed_form() {
        let mat = material();
        let remote = [0.4, 1.5, 0.7];
        let a = 2.0;
        let f = StraightCrackField::new(a, remote, &mat).unwrap();
        let (k1x, k2x) = straight_crack_sif(a, remote);
        let (k1, k2) = sif_near_field(&f, Point2::new(a, 0.0), Point2::new(1.0, 0.0), a);
        assert!((k1 - k1x).abs() < 1e-4 * k1x.abs(), "{k1} vs {k1x}");
        assert!((k2 - k2x).abs() < 1e-4 * k1x.abs(), "{k2} vs {k2x}");
    }

    #[test]
    fn williams_faces_free_and_matches_griffith_near_tip() {
        let mat = material();
        let (a, sigma) = (1.0, 3.0);
        let k1 = sigma * (std::f64::consts::PI * a).sqrt();
        let w = WilliamsField::new(k1, 0.0, &mat);
        // traction-free faces at theta = +-pi
        for flank in [1, -1] {
            let s = w.stress(Point2::new(-0.3, 0.0), flank);
            assert!(s[1].abs() < 1e-12);
            assert!(s[2].abs() < 1e-12);
        }
        // agreement with the full Griffith field close to the tip
        let g = griffith_field(a, sigma, &mat).unwrap();
        let tip = Point2::new(a, 0.0);
        for (r, th) in [(1e-6, 0.7), (1e-6, -2.2), (1e-7, 2.9)] {
            let local = Point2::new(r * f64::cos(th), r * f64::sin(th));
            let sw = w.stress(local, 0);
            let sg = g.stress(tip.add(local), 0);
            let scale = k1 / (r as f64).sqrt();
            for c in 0..3 {
                assert!(
                    (sw[c] - sg[c]).abs() < 2e-3 * scale,
                    "r={r} th={th} c={c}: {} vs {}",
                    sw[c],
                    sg[c]
                );
            }
        }
    }

    #[test]
    fn williams_displacement_consistent_with_stress() {
        let mat = material();
        let w = WilliamsField::new(1.3, -0.8, &mat);
        for p in [Point2::new(0.31, 0.22), Point2::new(-0.2, 0.4), Point2::new(0.1, -0.35)] {
            let direct = w.stress(p, 0);
            let fd = fd_stress_from_u(&w, &mat, p, 1e-6);
            for c in 0..3 {
                assert!(
                    (direct[c] - fd[c]).abs() < 1e-4 * (1.0 + direct[c].abs()),
                    "c={c}: {} vs {}",
                    direct[c],
                    fd[c]
                );
            }
        }
    }

    #[test]
    fn williams_mode_ii_slides_without_opening() {
        let mat = material();
        let w = WilliamsField::new(0.0, 1.0, &mat);
        let up = w.displacement(Point2::new(-0.5, 0.0), 1);
        let dn = w.displacement(Point2::new(-0.5, 0.0), -1);
        // pure sliding: tangential jump, no normal jump
        assert!((up[1] - dn[1]).abs() < 1e-12);
        assert!((up[0] - dn[0]).abs() > 1e-3);
    }

    #[test]
    fn placed_field_transforms_consistently() {
        let mat = material();
        let inner = griffith_field(1.0, 1.0, &mat).unwrap();
        let frame = Frame {
            origin: Point2::new(0.4, -0.7),
            angle: 0.6,
        };
        let placed = PlacedField { frame, inner };
        // evaluate a global point whose local image is known
        let local = Point2::new(1.4, 0.3);
        let global = local.rotate(frame.angle).add(frame.origin);
        let s_local = inner.stress(local, 0);
        let s_global = placed.stress(global, 0);
        let back = rotate_stress(s_global, -frame.angle);
        for c in 0..3 {
            assert!((back[c] - s_local[c]).abs() < 1e-12);
        }
        // principal invariants unchanged by the rotation
        assert!(
            ((s_global[0] + s_global[1]) - (s_local[0] + s_local[1])).abs() < 1e-12
        );
    }

    #[test]
    fn arc_map_round_trips_and_hits_the_arc() {
        let map = ArcMap::new(2.0, std::f64::consts::PI / 4.0);
        // round trip for generic exterior points
        for z in [C::new(3.0, 1.0), C::new(0.2, 0.1), C::new(-1.0, -2.5)] {
            let zeta = map.to_zeta(z);
            assert!(zeta.norm() > 1.0 - 1e-12, "zeta inside disk: {zeta}");
            let (back, _, _) = map.omega(zeta);
            assert!((back - z).norm() < 1e-9, "{z} -> {zeta} -> {back}");
        }
        // the unit circle maps onto the arc
        for j in 1..40 {
            let zeta = C::from_polar(1.0, 0.157 * j as f64);
            let (z, _, _) = map.omega(zeta);
            assert!((z.norm() - 2.0).abs() < 1e-9, "|z| = {}", z.norm());
            assert!(z.arg().abs() <= std::f64::consts::PI / 4.0 + 1e-9);
        }
    }

    #[test]
    fn arc_equibiaxial_matches_closed_form_sif() {
        let mat = material();
        let (r, alpha, sigma) = (2.0, std::f64::consts::PI / 4.0, 1.5);
        let f =
            ArcCrackField::solve(r, alpha, [sigma, sigma, 0.0], &mat, 40).unwrap();
        assert!(f.residual < 1e-8, "residual {}", f.residual);
        let (k1x, k2x) = arc_equibiaxial_sif(r, alpha, sigma);
        // the local frames take y' to the left of the growth direction, so
        // K_II carries opposite signs at the two tips of the symmetric arc
        let (k1u, k2u) = arc_crack_sif(&f, true);
        let (k1l, k2l) = arc_crack_sif(&f, false);
        assert!((k1u - k1x).abs() < 1e-3 * k1x, "K_I {k1u} vs {k1x}");
        assert!((k1l - k1x).abs() < 1e-3 * k1x, "K_I {k1l} vs {k1x}");
        assert!((k2u.abs() - k2x).abs() < 1e-3 * k1x, "K_II {k2u} vs {k2x}");
        assert!((k2u + k2l).abs() < 1e-3 * k1x, "{k2u} vs {k2l}");
    }

    #[test]
    fn arc_faces_traction_free_and_far_field() {
        let mat = material();
        let remote = [0.6, 1.4, -0.35];
        let f = ArcCrackField::solve(1.5, 0.9, remote, &mat, 40).unwrap();
        // faces: radial traction components vanish on both flanks
        for &th in &[-0.8, -0.3, 0.0, 0.45, 0.85] {
            for flank in [1, -1] {
                let p = Point2::new(1.5 * f64::cos(th), 1.5 * f64::sin(th));
                let s = f.stress(p, flank);
                let (c, sn) = (th.cos(), th.sin());
                // radial normal: t = sigma . e_r
                let tr = s[0] * c + s[2] * sn;
                let tt = s[2] * c + s[1] * sn;
                let srr = tr * c + tt * sn;
                let srt = -tr * sn + tt * c;
                assert!(srr.abs() < 1e-5, "srr {srr} at th={th} flank={flank}");
                assert!(srt.abs() < 1e-5, "srt {srt} at th={th} flank={flank}");
            }
        }
        let far = f.stress(Point2::new(4.0e5, -2.0e5), 0);
        for c in 0..3 {
            assert!((far[c] - remote[c]).abs() < 1e-4, "far {c}");
        }
    }

    #[test]
    fn arc_field_self_consistency() {
        let mat = material();
        let f = ArcCrackField::solve(2.0, 0.7, [0.3, 1.1, 0.2], &mat, 40).unwrap();
        for p in [
            Point2::new(2.6, 0.8),
            Point2::new(0.6, 0.2),
            Point2::new(-1.5, 1.2),
        ] {
            let div = fd_divergence(&f, p, 1e-5);
            assert!(div[0].abs() < 1e-3 && div[1].abs() < 1e-3, "{div:?} at {p:?}");
            let direct = f.stress(p, 0);
            let fd = fd_stress_from_u(&f, &mat, p, 1e-5);
            for c in 0..3 {
                assert!(
                    (direct[c] - fd[c]).abs() < 1e-3 * (1.0 + direct[c].abs()),
                    "c={c}: {} vs {}",
                    direct[c],
                    fd[c]
                );
            }
        }
    }

    #[test]
    fn shallow_arc_approaches_straight_crack() {
        let mat = material();
        // a shallow arc at theta ~ 0 is nearly a vertical straight segment of
        // half-length r sin(alpha); remote sxx opens it in mode I
        let (r, alpha, sigma) = (10.0, 0.05, 1.0);
        let f = ArcCrackField::solve(r, alpha, [sigma, 0.0, 0.0], &mat, 40).unwrap();
        let (k1, k2) = arc_crack_sif(&f, true);
        // nearly the Griffith crack with half-length r sin(alpha)
        let k1x = sigma * (std::f64::consts::PI * r * alpha.sin()).sqrt();
        assert!((k1 - k1x).abs() < 5e-3 * k1x, "{k1} vs {k1x}");
        assert!(k2.abs() < 5e-2 * k1x, "K_II should be small: {k2}");
    }

    #[test]
    fn inclined_sif_reduces_to_griffith() {
        let (k1, k2) = inclined_crack_sif(1.0, 2.0, 0.0);
        assert!((k1 - 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert!(k2.abs() < 1e-14);
        let (k1b, k2b) = inclined_crack_sif(1.0, 2.0, 0.2);
        assert!(k1b < k1 && k2b > 0.0);
    }
}
