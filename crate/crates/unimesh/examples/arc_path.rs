//! Grow a crack that starts on a circular arc under boundary data taken from
//! the exact circular-arc crack field. The principle of local symmetry keeps
//! K_II = 0 at every step, so the computed path should stay on the circle;
//! the printed radial error of the tip measures how well it does.

use unimesh::curve::CrackPath;
use unimesh::fem::Material;
use unimesh::fracture::{self, ArcDirichletModel, PropagateParams};
use unimesh::geometry::Point2;
use unimesh::verify::tip_graded_mesh;

fn main() {
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

    // refine in a band along the circle, extended past the expected growth,
    // so the extraction annulus sits in fine elements for every step
    let band: Vec<Point2> = (0..=256)
        .map(|k| {
            let lo = theta0 - 0.1;
            let hi = theta1 + growth / r + 0.3;
            let th = lo + (hi - lo) * k as f64 / 256.0;
            center.add(Point2::new(th.cos(), th.sin()).scale(r))
        })
        .collect();
    let n = 32;
    let mesh = tip_graded_mesh(Point2::new(-3.0, -3.0), Point2::new(3.0, 3.0), n, &band, 2)
        .expect("valid grading");
    let h_band = 6.0 / n as f64 / 4.0;
    let delta_ell = 2.0 * h_band;

    let knots: Vec<Point2> = (0..=8)
        .map(|k| {
            let th = theta0 + (theta1 - theta0) * k as f64 / 8.0;
            center.add(Point2::new(th.cos(), th.sin()).scale(r))
        })
        .collect();
    let mut crack = CrackPath::new(knots, delta_ell).expect("valid initial crack");

    let model = ArcDirichletModel {
        center,
        r,
        sigma: 1.0,
        mat,
        n_terms: 24,
    };
    let params = PropagateParams::default();
    let n_steps = (growth / delta_ell).round() as usize;

    println!("delta_ell = {delta_ell:.4}, {n_steps} steps");
    println!("step    K_II/K_I     kink       tip radial error");
    for step in 1..=n_steps {
        let out = fracture::propagate_step(&mesh, &crack, &mat, &model, &params, step)
            .expect("stable growth");
        let rec = &out.record;
        println!(
            "{:>4}  {:+.3e}  {:+.3e}  {:+.3e}",
            step,
            rec.k2 / rec.k1,
            rec.theta_k,
            out.crack.tip().dist(center) - r
        );
        crack = out.crack;
    }
}
