//! Deform a fixed background triangulation so that a chain of its edges lies
//! exactly on an immersed spline curve, then report the element quality and
//! how closely the chain tracks the curve.

use unimesh::conform::{conform, ConformParams};
use unimesh::curve::Spline;
use unimesh::geometry::{signed_quality, structured_acute_mesh, Point2};

fn main() {
    // background mesh: structured and acute, never remeshed
    let mesh = structured_acute_mesh(Point2::new(0.0, 0.0), Point2::new(4.0, 3.0), 40)
        .expect("valid resolution");

    // a gently curved open arc immersed in the interior
    let knots: Vec<Point2> = (0..=12)
        .map(|k| {
            let t = k as f64 / 12.0;
            Point2::new(0.6 + 2.8 * t, 1.5 + 0.5 * (std::f64::consts::PI * t).sin())
        })
        .collect();
    let curve = Spline::fit(&knots, false).expect("distinct knots");

    let conformed = conform(&mesh, &curve, &ConformParams::default()).expect("conformable curve");

    let min_q = conformed
        .triangles
        .iter()
        .map(|t| {
            signed_quality(
                conformed.positions[t[0]],
                conformed.positions[t[1]],
                conformed.positions[t[2]],
            )
        })
        .fold(f64::INFINITY, f64::min);
    let max_dist = conformed
        .gamma
        .chain
        .iter()
        .map(|&v| curve.closest_point(conformed.positions[v]).distance)
        .fold(0.0f64, f64::max);

    println!("background mesh: {} triangles", mesh.triangles.len());
    println!(
        "conformed chain: {} vertices on the curve, tips at {:?}",
        conformed.gamma.chain.len(),
        conformed.tip_vertex_ids
    );
    println!("min element quality after conforming: {min_q:.3}");
    println!("max chain-vertex distance to the curve: {max_dist:.3e}");
}
