//! Planar predicates, triangulation storage and adjacency, element quality,
//! and generation/refinement of background (universal) meshes.

use std::collections::BTreeMap;

use crate::error::GeometryError;

/// Scale-aware degeneracy tolerance: |signed area| below this fraction of
/// (max edge length)^2 counts as degenerate.
pub const DEGENERACY_EPS: f64 = 1e-14;

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn add(&self, v: Point2) -> Point2 {
        Point2::new(self.x + v.x, self.y + v.y)
    }

    pub fn sub(&self, v: Point2) -> Point2 {
        Point2::new(self.x - v.x, self.y - v.y)
    }

    pub fn scale(&self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }

    pub fn dot(&self, v: Point2) -> f64 {
        self.x * v.x + self.y * v.y
    }

    /// z-component of the cross product of two planar vectors.
    pub fn cross(&self, v: Point2) -> f64 {
        self.x * v.y - self.y * v.x
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(&self, p: Point2) -> f64 {
        self.sub(p).norm()
    }

    /// Unit vector in the same direction; `None` for (near-)zero vectors.
    pub fn normalized(&self) -> Option<Point2> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self.scale(1.0 / n))
        } else {
            None
        }
    }

    /// Rotate by +90 degrees (left normal of a tangent).
    pub fn perp(&self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    pub fn rotate(&self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn midpoint(&self, p: Point2) -> Point2 {
        Point2::new(0.5 * (self.x + p.x), 0.5 * (self.y + p.y))
    }
}

/// Sign of twice the signed area of (a, b, c): +1 counterclockwise,
/// -1 clockwise, 0 within the scale-aware degeneracy band.
pub fn orient2d(a: Point2, b: Point2, c: Point2) -> i32 {
    let det = b.sub(a).cross(c.sub(a));
    let l = max_edge_len(a, b, c);
    let eps = DEGENERACY_EPS * l * l;
    if det > eps {
        1
    } else if det < -eps {
        -1
    } else {
        0
    }
}

fn max_edge_len(a: Point2, b: Point2, c: Point2) -> f64 {
    a.dist(b).max(b.dist(c)).max(c.dist(a))
}

/// Twice the signed area of (a, b, c).
pub fn signed_area2(a: Point2, b: Point2, c: Point2) -> f64 {
    b.sub(a).cross(c.sub(a))
}

/// Quality measure q = 4*sqrt(3)*Area / (l1^2 + l2^2 + l3^2), clamped to [0, 1].
/// Equals 1 only for equilateral triangles and 0 for degenerate ones.
pub fn triangle_quality(a: Point2, b: Point2, c: Point2) -> f64 {
    let area = 0.5 * signed_area2(a, b, c);
    if area <= 0.0 {
        return 0.0;
    }
    let s = a.dist(b).powi(2) + b.dist(c).powi(2) + c.dist(a).powi(2);
    if s == 0.0 {
        return 0.0;
    }
    (4.0 * 3.0_f64.sqrt() * area / s).clamp(0.0, 1.0)
}

/// Like [`triangle_quality`] but negative for inverted (clockwise) triangles.
/// Used by the relaxation guard so that un-inverting a triangle counts as an
/// improvement.
pub fn signed_quality(a: Point2, b: Point2, c: Point2) -> f64 {
    let area = 0.5 * signed_area2(a, b, c);
    let s = a.dist(b).powi(2) + b.dist(c).powi(2) + c.dist(a).powi(2);
    if s == 0.0 {
        return 0.0;
    }
    (4.0 * 3.0_f64.sqrt() * area / s).clamp(-1.0, 1.0)
}

/// True iff all three angles are strictly acute. Angles within the tolerance
/// band of 90 degrees count as not acute. Degenerate triangles are an error.
pub fn is_acute(a: Point2, b: Point2, c: Point2) -> Result<bool, GeometryError> {
    if orient2d(a, b, c) == 0 {
        return Err(GeometryError::DegenerateTriangle);
    }
    let pts = [a, b, c];
    for i in 0..3 {
        let u = pts[(i + 1) % 3].sub(pts[i]);
        let v = pts[(i + 2) % 3].sub(pts[i]);
        // angle < 90 deg iff dot > 0; require margin above the tolerance band
        let band = 1e-12 * u.norm() * v.norm();
        if u.dot(v) <= band {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Per-triangle quality summary of a mesh.
#[derive(Debug, Clone)]
pub struct QualityReport {
    pub per_triangle: Vec<f64>,
    pub min_q: f64,
    /// 10 uniform bins over [0, 1].
    pub histogram: [usize; 10],
}

impl QualityReport {
    pub fn new(per_triangle: Vec<f64>) -> Self {
        let mut histogram = [0usize; 10];
        let mut min_q = f64::INFINITY;
        for &q in &per_triangle {
            min_q = min_q.min(q);
            let bin = ((q * 10.0) as usize).min(9);
            histogram[bin] += 1;
        }
        if per_triangle.is_empty() {
            min_q = 0.0;
        }
        QualityReport {
            per_triangle,
            min_q,
            histogram,
        }
    }
}

/// A triangulation with derived edge and neighbor tables.
///
/// Invariants: every triangle counterclockwise, vertex indices in range, no
/// duplicate triangles, each edge incident to at most two triangles.
#[derive(Debug, Clone)]
pub struct Triangulation {
    pub vertices: Vec<Point2>,
    pub triangles: Vec<[usize; 3]>,
    /// Unique edges as sorted vertex-index pairs, in lexicographic order.
    pub edges: Vec<[usize; 2]>,
    /// Incident triangles per edge (same order as `edges`).
    pub edge_tris: Vec<(usize, Option<usize>)>,
    /// Triangles incident to each vertex.
    pub vertex_tris: Vec<Vec<usize>>,
    pub h_max: f64,
}

impl Triangulation {
    pub fn new(vertices: Vec<Point2>, triangles: Vec<[usize; 3]>) -> Result<Self, GeometryError> {
        for p in &vertices {
            if !p.is_finite() {
                return Err(GeometryError::NonFiniteCoordinate);
            }
        }
        let nv = vertices.len();
        let mut seen = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(GeometryError::VertexIndexOutOfRange { triangle: t, vertex: v });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(GeometryError::DegenerateConnectivity { triangle: t });
            }
            let mut key = *tri;
            key.sort_unstable();
            if let Some(prev) = seen.insert(key, t) {
                return Err(GeometryError::DuplicateTriangle { first: prev, second: t });
            }
            if orient2d(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]) <= 0 {
                return Err(GeometryError::NotCounterclockwise { triangle: t });
            }
        }
        let (edges, edge_tris) = build_adjacency(nv, &triangles)?;
        let mut vertex_tris = vec![Vec::new(); nv];
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                vertex_tris[v].push(t);
            }
        }
        let mut h_max: f64 = 0.0;
        for tri in &triangles {
            h_max = h_max.max(max_edge_len(
                vertices[tri[0]],
                vertices[tri[1]],
                vertices[tri[2]],
            ));
        }
        Ok(Triangulation {
            vertices,
            triangles,
            edges,
            edge_tris,
            vertex_tris,
            h_max,
        })
    }

    pub fn tri_points(&self, t: usize) -> [Point2; 3] {
        let [i, j, k] = self.triangles[t];
        [self.vertices[i], self.vertices[j], self.vertices[k]]
    }

    /// Edges incident to exactly one triangle.
    pub fn boundary_edges(&self) -> Vec<[usize; 2]> {
        self.edges
            .iter()
            .zip(&self.edge_tris)
            .filter(|(_, (_, t2))| t2.is_none())
            .map(|(e, _)| *e)
            .collect()
    }

    pub fn quality_report(&self) -> QualityReport {
        let q = (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.tri_points(t);
                triangle_quality(a, b, c)
            })
            .collect();
        QualityReport::new(q)
    }

    /// Maximum edge length among edges incident to vertex `v`.
    pub fn local_h(&self, v: usize) -> f64 {
        let mut h: f64 = 0.0;
        for &t in &self.vertex_tris[v] {
            let [a, b, c] = self.tri_points(t);
            h = h.max(max_edge_len(a, b, c));
        }
        h
    }
}

/// Build the unique edge list and per-edge incident triangles.
/// Errors on out-of-range indices, duplicate triangles and nonmanifold edges.
pub fn build_adjacency(
    nv: usize,
    triangles: &[[usize; 3]],
) -> Result<(Vec<[usize; 2]>, Vec<(usize, Option<usize>)>), GeometryError> {
    let mut map: BTreeMap<[usize; 2], (usize, Option<usize>)> = BTreeMap::new();
    let mut seen = BTreeMap::new();
    for (t, tri) in triangles.iter().enumerate() {
        for &v in tri {
            if v >= nv {
                return Err(GeometryError::VertexIndexOutOfRange { triangle: t, vertex: v });
            }
        }
        let mut key = *tri;
        key.sort_unstable();
        if let Some(prev) = seen.insert(key, t) {
            return Err(GeometryError::DuplicateTriangle { first: prev, second: t });
        }
        for i in 0..3 {
            let a = tri[i];
            let b = tri[(i + 1) % 3];
            let e = [a.min(b), a.max(b)];
            match map.get_mut(&e) {
                None => {
                    map.insert(e, (t, None));
                }
                Some((_, second @ None)) => {
                    *second = Some(t);
                }
                Some(_) => {
                    return Err(GeometryError::NonManifoldEdge { a: e[0], b: e[1] });
                }
            }
        }
    }
    let mut edges = Vec::with_capacity(map.len());
    let mut edge_tris = Vec::with_capacity(map.len());
    for (e, tt) in map {
        edges.push(e);
        edge_tris.push(tt);
    }
    Ok((edges, edge_tris))
}

/// Structured background mesh for an axis-aligned box.
///
/// Rows of near-equilateral isosceles triangles; odd rows are offset by half
/// a cell and clamped to the box sides, which leaves a column of right
/// triangles along the two vertical boundaries. Every triangle not touching
/// the left/right boundary is strictly acute, which is what the conforming
/// algorithm requires of triangles the immersed curve can cut (curves are
/// kept away from the box boundary).
pub fn structured_acute_mesh(
    lo: Point2,
    hi: Point2,
    n: usize,
) -> Result<Triangulation, GeometryError> {
    if n == 0 {
        return Err(GeometryError::InvalidResolution);
    }
    let w = hi.x - lo.x;
    let h = hi.y - lo.y;
    if !(w > 0.0 && h > 0.0) || !lo.is_finite() || !hi.is_finite() {
        return Err(GeometryError::DegenerateBbox);
    }
    let dx = w / n as f64;
    let m = ((h / (dx * 3.0_f64.sqrt() / 2.0)).round() as usize).max(1);
    let dy = h / m as f64;
    // keep the isosceles triangles acute: apex angle < 90 deg needs dy > dx/2
    if dy <= 0.55 * dx || dy >= 1.6 * dx {
        return Err(GeometryError::DegenerateBbox);
    }

    let mut vertices: Vec<Point2> = Vec::new();
    // row_xs[j] = x-coordinates (absolute) of row j, row_start[j] = first index
    let mut row_start = Vec::with_capacity(m + 1);
    let mut row_len = Vec::with_capacity(m + 1);
    for j in 0..=m {
        let y = if j == m { hi.y } else { lo.y + j as f64 * dy };
        row_start.push(vertices.len());
        if j % 2 == 0 {
            for i in 0..=n {
                let x = if i == n { hi.x } else { lo.x + i as f64 * dx };
                vertices.push(Point2::new(x, y));
            }
            row_len.push(n + 1);
        } else {
            vertices.push(Point2::new(lo.x, y));
            for i in 0..n {
                vertices.push(Point2::new(lo.x + (i as f64 + 0.5) * dx, y));
            }
            vertices.push(Point2::new(hi.x, y));
            row_len.push(n + 2);
        }
    }

    let mut triangles = Vec::new();
    for j in 0..m {
        // zigzag-merge the two rows by x-coordinate
        let (s0, l0) = (row_start[j], row_len[j]);
        let (s1, l1) = (row_start[j + 1], row_len[j + 1]);
        let mut i0 = 0usize; // lower row pointer
        let mut i1 = 0usize; // upper row pointer
        while i0 + 1 < l0 || i1 + 1 < l1 {
            let adv_lower = if i0 + 1 >= l0 {
                false
            } else if i1 + 1 >= l1 {
                true
            } else {
                let next0 = vertices[s0 + i0 + 1].x;
                let next1 = vertices[s1 + i1 + 1].x;
                if next0 != next1 {
                    next0 < next1
                } else {
                    // tie at the right boundary: advance the side whose
                    // current point lags, which keeps the closing triangles
                    // mirror images of the left boundary
                    vertices[s0 + i0].x < vertices[s1 + i1].x
                }
            };
            if adv_lower {
                triangles.push([s0 + i0, s0 + i0 + 1, s1 + i1]);
                i0 += 1;
            } else {
                triangles.push([s0 + i0, s1 + i1 + 1, s1 + i1]);
                i1 += 1;
            }
        }
    }
    Triangulation::new(vertices, triangles)
}

/// Split every triangle into four similar children via edge midpoints.
/// Child quality equals parent quality and h_max halves.
pub fn refine_uniform(mesh: &Triangulation) -> Triangulation {
    let mut vertices = mesh.vertices.clone();
    let mut midpoint: BTreeMap<[usize; 2], usize> = BTreeMap::new();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point2>| -> usize {
        let key = [a.min(b), a.max(b)];
        *midpoint.entry(key).or_insert_with(|| {
            let p = vertices[a].midpoint(vertices[b]);
            vertices.push(p);
            vertices.len() - 1
        })
    };
    let mut triangles = Vec::with_capacity(mesh.triangles.len() * 4);
    for tri in &mesh.triangles {
        let [a, b, c] = *tri;
        let ab = mid(a, b, &mut vertices);
        let bc = mid(b, c, &mut vertices);
        let ca = mid(c, a, &mut vertices);
        triangles.push([a, ab, ca]);
        triangles.push([ab, b, bc]);
        triangles.push([ca, bc, c]);
        triangles.push([ab, bc, ca]);
    }
    Triangulation::new(vertices, triangles).expect("uniform refinement preserves validity")
}

/// One pass of local red-green refinement: triangles in `marked` are split
/// into four (red); neighbors left with a single hanging midpoint are bisected
/// (green). Triangles that would acquire two or more hanging midpoints are
/// promoted to red until the marking is closed.
pub fn refine_local(mesh: &Triangulation, marked: &[bool]) -> Triangulation {
    assert_eq!(marked.len(), mesh.triangles.len());
    let mut red = marked.to_vec();
    // edge -> will be split
    let mut edge_split = vec![false; mesh.edges.len()];
    let edge_index: BTreeMap<[usize; 2], usize> = mesh
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| (*e, i))
        .collect();
    let tri_edge = |t: usize, i: usize| -> usize {
        let tri = mesh.triangles[t];
        let a = tri[i];
        let b = tri[(i + 1) % 3];
        edge_index[&[a.min(b), a.max(b)]]
    };
    loop {
        for (t, &r) in red.iter().enumerate() {
            if r {
                for i in 0..3 {
                    edge_split[tri_edge(t, i)] = true;
                }
            }
        }
        let mut changed = false;
        for t in 0..mesh.triangles.len() {
            if red[t] {
                continue;
            }
            let count = (0..3).filter(|&i| edge_split[tri_edge(t, i)]).count();
            if count >= 2 {
                red[t] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut vertices = mesh.vertices.clone();
    let mut edge_mid: Vec<Option<usize>> = vec![None; mesh.edges.len()];
    for (e, split) in edge_split.iter().enumerate() {
        if *split {
            let [a, b] = mesh.edges[e];
            vertices.push(mesh.vertices[a].midpoint(mesh.vertices[b]));
            edge_mid[e] = Some(vertices.len() - 1);
        }
    }

    let mut triangles = Vec::new();
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.triangles[t];
        if red[t] {
            let ab = edge_mid[tri_edge(t, 0)].unwrap();
            let bc = edge_mid[tri_edge(t, 1)].unwrap();
            let ca = edge_mid[tri_edge(t, 2)].unwrap();
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        } else {
            let split: Vec<usize> = (0..3).filter(|&i| edge_split[tri_edge(t, i)]).collect();
            match split.len() {
                0 => triangles.push([a, b, c]),
                1 => {
                    // green bisection: connect the hanging midpoint to the
                    // opposite vertex
                    let i = split[0];
                    let m = edge_mid[tri_edge(t, i)].unwrap();
                    let tri = mesh.triangles[t];
                    let p = tri[i];
                    let q = tri[(i + 1) % 3];
                    let r = tri[(i + 2) % 3];
                    triangles.push([p, m, r]);
                    triangles.push([m, q, r]);
                }
                _ => unreachable!("closure promoted multi-split triangles to red"),
            }
        }
    }
    Triangulation::new(vertices, triangles).expect("local refinement preserves validity")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orient2d_basic() {
        let o = Point2::new(0.0, 0.0);
        assert_eq!(orient2d(o, Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)), 1);
        assert_eq!(orient2d(o, Point2::new(0.0, 1.0), Point2::new(1.0, 0.0)), -1);
        assert_eq!(orient2d(o, Point2::new(1.0, 1.0), Point2::new(2.0, 2.0)), 0);
    }

    #[test]
    fn orient2d_antisymmetric() {
        let a = Point2::new(0.3, 0.7);
        let b = Point2::new(-1.2, 0.4);
        let c = Point2::new(0.9, -2.0);
        assert_eq!(orient2d(a, b, c), -orient2d(b, a, c));
        assert_eq!(orient2d(a, b, c), -orient2d(a, c, b));
    }

    #[test]
    fn quality_equilateral_is_one() {
        let a = Point2::new(0.0, 0.0);
        let b = Point2::new(1.0, 0.0);
        let c = Point2::new(0.5, 3.0_f64.sqrt() / 2.0);
        assert!((triangle_quality(a, b, c) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quality_collinear_is_zero() {
        let a = Point2::new(0.0, 0.0);
        let b = Point2::new(1.0, 1.0);
        let c = Point2::new(2.0, 2.0);
        assert_eq!(triangle_quality(a, b, c), 0.0);
    }

    #[test]
    fn quality_right_isosceles() {
        // direct evaluation of 4*sqrt(3)*A / sum(l^2): A = 1/2, sum = 4
        let q = triangle_quality(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        );
        assert!((q - 3.0_f64.sqrt() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn quality_invariance() {
        let a = Point2::new(0.1, 0.2);
        let b = Point2::new(1.3, -0.4);
        let c = Point2::new(0.6, 1.1);
        let q0 = triangle_quality(a, b, c);
        let rot = 0.83;
        let shift = Point2::new(5.0, -3.0);
        let s = 7.3;
        let tf = |p: Point2| p.rotate(rot).scale(s).add(shift);
        let q1 = triangle_quality(tf(a), tf(b), tf(c));
        assert!((q0 - q1).abs() < 1e-12);
    }

    #[test]
    fn acute_classification() {
        let eq = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.5, 3.0_f64.sqrt() / 2.0),
        ];
        assert!(is_acute(eq[0], eq[1], eq[2]).unwrap());
        // right angle
        assert!(!is_acute(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0)
        )
        .unwrap());
        // law of cosines shows an obtuse angle at the apex
        assert!(!is_acute(
            Point2::new(0.0, 0.0),
            Point2::new(4.0, 0.0),
            Point2::new(2.0, 0.1)
        )
        .unwrap());
        assert!(is_acute(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(2.0, 2.0)
        )
        .is_err());
    }

    #[test]
    fn adjacency_single_triangle() {
        let (edges, edge_tris) = build_adjacency(3, &[[0, 1, 2]]).unwrap();
        assert_eq!(edges.len(), 3);
        assert!(edge_tris.iter().all(|(_, t2)| t2.is_none()));
    }

    #[test]
    fn adjacency_two_triangles() {
        let (edges, edge_tris) = build_adjacency(4, &[[0, 1, 2], [0, 2, 3]]).unwrap();
        assert_eq!(edges.len(), 5);
        let interior = edge_tris.iter().filter(|(_, t2)| t2.is_some()).count();
        assert_eq!(interior, 1);
        assert_eq!(edges.len() - interior, 4);
    }

    #[test]
    fn adjacency_duplicate_triangle_errors() {
        assert!(matches!(
            build_adjacency(3, &[[0, 1, 2], [2, 0, 1]]),
            Err(GeometryError::DuplicateTriangle { .. })
        ));
    }

    #[test]
    fn structured_mesh_basic() {
        let mesh = structured_acute_mesh(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), 8).unwrap();
        let report = mesh.quality_report();
        assert!(report.min_q >= 0.6, "min quality {}", report.min_q);
        // all triangles not touching the left/right boundary are acute
        for t in 0..mesh.triangles.len() {
            let [a, b, c] = mesh.tri_points(t);
            let touches_side = [a, b, c]
                .iter()
                .any(|p| p.x < 1e-12 || (1.0 - p.x) < 1e-12);
            if !touches_side {
                assert!(is_acute(a, b, c).unwrap(), "non-acute interior triangle");
            }
        }
    }

    #[test]
    fn structured_mesh_degenerate_bbox_errors() {
        assert!(structured_acute_mesh(Point2::new(0.0, 0.0), Point2::new(0.0, 1.0), 4).is_err());
    }

    #[test]
    fn refine_uniform_counts_and_quality() {
        let mesh = structured_acute_mesh(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), 4).unwrap();
        let fine = refine_uniform(&mesh);
        assert_eq!(fine.triangles.len(), 4 * mesh.triangles.len());
        assert!((fine.h_max - mesh.h_max / 2.0).abs() < 1e-12 * mesh.h_max);
        // quality multiset preserved: each parent contributes 4 children of its
        // own quality
        let mut q0: Vec<f64> = mesh.quality_report().per_triangle;
        let mut q1: Vec<f64> = fine.quality_report().per_triangle;
        q0.sort_by(f64::total_cmp);
        q1.sort_by(f64::total_cmp);
        for (i, q) in q0.iter().enumerate() {
            for k in 0..4 {
                assert!((q1[4 * i + k] - q).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn refine_local_is_manifold() {
        let mesh = structured_acute_mesh(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), 6).unwrap();
        let center = Point2::new(0.5, 0.5);
        let marked: Vec<bool> = (0..mesh.triangles.len())
            .map(|t| {
                let [a, b, c] = mesh.tri_points(t);
                let g = Point2::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0);
                g.dist(center) < 0.25
            })
            .collect();
        let refined = refine_local(&mesh, &marked);
        assert!(refined.triangles.len() > mesh.triangles.len());
        assert!(refined.quality_report().min_q > 0.3);
    }
}
