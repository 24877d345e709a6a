//! Quasi-static growth of a symmetric center crack under remote tension.
//! Each step solves the cracked plate on the conformed mesh, extracts K_I and
//! K_II, scales the load to criticality (K_I = K_c), and advances the tip in
//! the direction that zeroes K_II. By symmetry the path must stay straight.

use unimesh::curve::CrackPath;
use unimesh::fem::Material;
use unimesh::fracture::{self, GriffithTensionModel, PropagateParams};
use unimesh::geometry::{structured_acute_mesh, Point2};

fn main() {
    let mat = Material {
        e: 1.0,
        nu: 0.3,
        plane_strain: true,
        k_c: 1.0,
    };
    // the crack line y = 0 is a lattice row of this mesh, so the discrete
    // problem is symmetric about it
    let mesh = structured_acute_mesh(Point2::new(-1.5, -1.75), Point2::new(5.5, 1.75), 70)
        .expect("valid resolution");

    let knots: Vec<Point2> = (0..=8)
        .map(|k| Point2::new(-0.5 + 0.125 * k as f64, 0.0))
        .collect();
    let delta_ell = 0.2; // about two element sizes
    let crack = CrackPath::new(knots, delta_ell).expect("valid initial crack");

    let model = GriffithTensionModel { sigma: 1.0, mat };
    let params = PropagateParams {
        n_steps: 10,
        ..Default::default()
    };
    let (grown, records) =
        fracture::propagate(&mesh, &crack, &mat, &model, &params).expect("stable growth");

    println!("step   tip_x      tip_y       K_I (scaled)  load factor   kink");
    for r in &records {
        println!(
            "{:>4}  {:+.4}  {:+.3e}  {:.9}  {:.6}  {:+.2e}",
            r.step, r.tip_x, r.tip_y, r.k1, r.load_factor, r.theta_k
        );
    }
    println!(
        "final tip ({:+.4}, {:+.3e}) after {} steps of {delta_ell}",
        grown.tip().x,
        grown.tip().y,
        records.len()
    );
}
