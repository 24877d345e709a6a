//! The universal-mesh conforming algorithm: classify triangles against an
//! immersed curve, select the edge set Gamma_h, project it onto the curve with
//! tip snapping, relax nearby vertices under a quality guard, and split the
//! mesh topologically along a crack.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::curve::{Projection, Spline};
use crate::error::ConformError;
use crate::geometry::{is_acute, signed_quality, Point2, Triangulation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriCut {
    NotCut,
    PositivelyCut,
    NegativelyCut,
}

/// Per-vertex and per-triangle classification against the immersed curve.
#[derive(Debug, Clone)]
pub struct CutClassification {
    /// +1 or -1 after the on-curve tie-break (see [`classify`]).
    pub vertex_side: Vec<i32>,
    /// Raw side from the projection (-1, 0, +1).
    pub vertex_raw_side: Vec<i32>,
    pub vertex_proj: Vec<Projection>,
    /// True for vertices farther than the band from the curve.
    pub far_field: Vec<bool>,
    pub tri_cut: Vec<TriCut>,
}

/// The selected edge set Gamma_h, chained into an ordered polyline.
#[derive(Debug, Clone)]
pub struct GammaH {
    /// Ordered chain of vertex indices along the curve (first to last knot
    /// for open curves; a cycle with `chain[0]` repeated conceptually for
    /// closed ones).
    pub chain: Vec<usize>,
    /// Edges of the chain as index pairs, with one source positively cut
    /// triangle each.
    pub edges: Vec<[usize; 2]>,
    pub source_tri: Vec<usize>,
    /// Chain endpoint vertices designated for tip snapping (empty for closed
    /// curves).
    pub tip_vertices: Vec<usize>,
    pub closed: bool,
}

#[derive(Debug, Clone)]
pub struct ConformParams {
    /// Classification band as a multiple of the local mesh size.
    pub band_factor: f64,
    /// Lower quality bound the conformed mesh must satisfy.
    pub q_min: f64,
    /// Number of vertex rings around Gamma_h included in relaxation.
    pub rings: usize,
    pub relax_iters: usize,
    /// Gamma_h vertices must land within this distance of the curve.
    pub tol_proj: f64,
}

impl Default for ConformParams {
    fn default() -> Self {
        ConformParams {
            band_factor: 3.0,
            q_min: 0.2,
            rings: 2,
            relax_iters: 20,
            tol_proj: 1e-10,
        }
    }
}

/// A universal mesh deformed (and possibly split) to conform to a curve.
/// The base triangulation is untouched; only vertex positions move.
#[derive(Debug, Clone)]
pub struct ConformedMesh {
    /// Perturbed coordinates; extended with clone vertices after splitting.
    pub positions: Vec<Point2>,
    /// Connectivity; references clone vertices on the negative flank after
    /// splitting.
    pub triangles: Vec<[usize; 3]>,
    /// Number of vertices of the base mesh (clones come after).
    pub base_vertex_count: usize,
    pub gamma: GammaH,
    pub tip_vertex_ids: Vec<usize>,
    /// (original, clone) pairs created by the split; empty before splitting.
    pub duplicated_pairs: Vec<(usize, usize)>,
    /// Crack-face edges on the positive flank (original indices).
    pub crack_edges_pos: Vec<[usize; 2]>,
    /// Crack-face edges on the negative flank (clone indices at the interior
    /// vertices).
    pub crack_edges_neg: Vec<[usize; 2]>,
    pub min_quality: f64,
}

impl ConformedMesh {
    pub fn triangulation(&self) -> Result<Triangulation, ConformError> {
        Ok(Triangulation::new(
            self.positions.clone(),
            self.triangles.clone(),
        )?)
    }

    /// Vertex indices lying on the crack (both flanks), including tips.
    pub fn crack_vertices(&self) -> BTreeSet<usize> {
        let mut s: BTreeSet<usize> = self.gamma.chain.iter().copied().collect();
        for &(_, clone) in &self.duplicated_pairs {
            s.insert(clone);
        }
        s
    }
}

/// Classify vertices and triangles of `mesh` against the curve.
///
/// Vertices farther than `band_factor * local_h` from the curve are far-field
/// and their triangles are never considered cut. A vertex exactly on the
/// curve counts as positive when at least one of its mesh neighbors is also
/// on the curve (a crack along a lattice row stays a valid Gamma_h), and as
/// negative when it sits on the curve alone (the curve grazes a single
/// vertex, and the cut strip must pass beside it). Either way the
/// classification is total and deterministic.
pub fn classify(mesh: &Triangulation, curve: &Spline, band_factor: f64) -> CutClassification {
    let nv = mesh.vertices.len();
    let mut vertex_raw_side = Vec::with_capacity(nv);
    let mut vertex_proj = Vec::with_capacity(nv);
    let mut far_field = Vec::with_capacity(nv);
    for v in 0..nv {
        let pr = curve.closest_point(mesh.vertices[v]);
        let h = mesh.local_h(v);
        let band = band_factor * h;
        far_field.push(pr.distance > band);
        // a vertex within roundoff of the curve counts as on it, so a crack
        // that drifts off a lattice row by floating-point noise still yields
        // a deterministic side assignment along the row
        let raw = if pr.distance <= 1e-6 * h { 0 } else { pr.side };
        vertex_raw_side.push(raw);
        vertex_proj.push(pr);
    }
    let mut has_on_curve_neighbor = vec![false; nv];
    for tri in &mesh.triangles {
        for i in 0..3 {
            let (u, v) = (tri[i], tri[(i + 1) % 3]);
            if vertex_raw_side[u] == 0 && vertex_raw_side[v] == 0 {
                has_on_curve_neighbor[u] = true;
                has_on_curve_neighbor[v] = true;
            }
        }
    }
    let vertex_side: Vec<i32> = (0..nv)
        .map(|v| match vertex_raw_side[v] {
            0 if !has_on_curve_neighbor[v] => -1,
            s if s < 0 => -1,
            _ => 1,
        })
        .collect();
    let tri_cut = mesh
        .triangles
        .iter()
        .map(|tri| {
            if tri.iter().all(|&v| far_field[v]) {
                return TriCut::NotCut;
            }
            let pos = tri.iter().filter(|&&v| vertex_side[v] > 0).count();
            match pos {
                2 => TriCut::PositivelyCut,
                1 => TriCut::NegativelyCut,
                _ => TriCut::NotCut,
            }
        })
        .collect();
    CutClassification {
        vertex_side,
        vertex_raw_side,
        vertex_proj,
        far_field,
        tri_cut,
    }
}

/// Modify the edge set so that no triangle keeps all three vertices on
/// Gamma_h: the vertex whose projection lies between the other two along the
/// curve is dropped from the triangle, its two edges replaced by the opposite
/// one. (Keeping all three would collapse the triangle once every vertex
/// snaps onto the curve.) Exposed for direct testing.
pub fn remove_three_node_triangles(
    edges: &mut BTreeSet<[usize; 2]>,
    mesh: &Triangulation,
    curve: &Spline,
) {
    for _ in 0..mesh.triangles.len() {
        let on_gamma: BTreeSet<usize> = edges.iter().flatten().copied().collect();
        let mut changed = false;
        for tri in &mesh.triangles {
            if !tri.iter().all(|v| on_gamma.contains(v)) {
                continue;
            }
            let present = (0..3)
                .filter(|&i| {
                    let (a, b) = (tri[i], tri[(i + 1) % 3]);
                    edges.contains(&[a.min(b), a.max(b)])
                })
                .count();
            if present < 2 {
                // the triangle contributes no corner of the chain; leave it
                // for the chain validation to diagnose
                continue;
            }
            // the middle projection is the one closest to both others
            let proj: Vec<Point2> = tri
                .iter()
                .map(|&v| curve.closest_point(mesh.vertices[v]).point)
                .collect();
            let spread = |i: usize| proj[i].dist(proj[(i + 1) % 3]) + proj[i].dist(proj[(i + 2) % 3]);
            let middle = (0..3).min_by(|&i, &j| spread(i).total_cmp(&spread(j))).unwrap();
            let (x, y) = (tri[(middle + 1) % 3], tri[(middle + 2) % 3]);
            edges.remove(&[tri[middle].min(x), tri[middle].max(x)]);
            edges.remove(&[tri[middle].min(y), tri[middle].max(y)]);
            edges.insert([x.min(y), x.max(y)]);
            changed = true;
            break;
        }
        if !changed {
            return;
        }
    }
}

/// Select Gamma_h: positive edges of positively cut triangles, modified so no
/// triangle has three nodes on it, chained into a simple polyline, and (for
/// open cracks) trimmed to end at the vertices nearest the two crack tips.
pub fn select_gamma_h(
    mesh: &Triangulation,
    cls: &CutClassification,
    curve: &Spline,
) -> Result<GammaH, ConformError> {
    let closed = curve.closed;
    let mut edge_set: BTreeSet<[usize; 2]> = BTreeSet::new();
    let mut source: BTreeMap<[usize; 2], usize> = BTreeMap::new();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if cls.tri_cut[t] != TriCut::PositivelyCut {
            continue;
        }
        for i in 0..3 {
            let u = tri[i];
            let v = tri[(i + 1) % 3];
            if cls.vertex_side[u] > 0 && cls.vertex_side[v] > 0 {
                let e = [u.min(v), u.max(v)];
                edge_set.insert(e);
                source.entry(e).or_insert(t);
            }
        }
    }
    if edge_set.is_empty() {
        return Err(ConformError::RefinementNeeded {
            detail: "no positive edges found near the curve".into(),
        });
    }

    remove_three_node_triangles(&mut edge_set, mesh, curve);

    // chain the edges into a polyline
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for e in &edge_set {
        adj.entry(e[0]).or_default().push(e[1]);
        adj.entry(e[1]).or_default().push(e[0]);
    }
    for (v, ns) in &adj {
        if ns.len() > 2 {
            return Err(ConformError::RefinementNeeded {
                detail: format!("Gamma_h branches at vertex {v}"),
            });
        }
    }
    let endpoints: Vec<usize> = adj
        .iter()
        .filter(|(_, ns)| ns.len() == 1)
        .map(|(v, _)| *v)
        .collect();
    let start = if closed {
        if !endpoints.is_empty() {
            return Err(ConformError::RefinementNeeded {
                detail: "Gamma_h for a closed curve is not a cycle".into(),
            });
        }
        *adj.keys().next().unwrap()
    } else {
        if endpoints.len() != 2 {
            return Err(ConformError::RefinementNeeded {
                detail: format!(
                    "Gamma_h is disconnected ({} endpoints)",
                    endpoints.len()
                ),
            });
        }
        endpoints[0]
    };
    let mut chain = vec![start];
    let mut prev = usize::MAX;
    loop {
        let cur = *chain.last().unwrap();
        let next = adj[&cur].iter().copied().find(|&n| n != prev);
        match next {
            Some(n) => {
                if closed && n == start {
                    break;
                }
                prev = cur;
                chain.push(n);
                if chain.len() > edge_set.len() + 1 {
                    return Err(ConformError::RefinementNeeded {
                        detail: "Gamma_h chain does not close properly".into(),
                    });
                }
            }
            None => break,
        }
    }
    let chained_edges: usize = if closed { chain.len() } else { chain.len() - 1 };
    if chained_edges != edge_set.len() {
        return Err(ConformError::RefinementNeeded {
            detail: "Gamma_h has more than one connected component".into(),
        });
    }

    let mut tip_vertices = Vec::new();
    if !closed {
        // orient the chain along increasing curve parameter
        let s_first = cls.vertex_proj[chain[0]].s_star;
        let s_last = cls.vertex_proj[*chain.last().unwrap()].s_star;
        if s_first > s_last {
            chain.reverse();
        }
        // trim to the vertices nearest each end of the curve
        let tip0 = curve.eval(0.0);
        let tip1 = curve.eval(curve.length());
        let i0 = argmin_by_dist(&chain, &mesh.vertices, tip0);
        let i1 = argmin_by_dist(&chain, &mesh.vertices, tip1);
        if i0 >= i1 {
            return Err(ConformError::RefinementNeeded {
                detail: "Gamma_h does not span the crack".into(),
            });
        }
        chain = chain[i0..=i1].to_vec();
        // clamped closest-point projections near a curve end can map two
        // adjacent chain vertices onto the same point, which would collapse
        // their shared edge; keep only the vertex adjacent to the interior
        while chain.len() > 2 {
            let p0 = cls.vertex_proj[chain[0]].point;
            let p1 = cls.vertex_proj[chain[1]].point;
            if p0.dist(p1) < 1e-6 * mesh.local_h(chain[0]) {
                chain.remove(0);
            } else {
                break;
            }
        }
        while chain.len() > 2 {
            let n = chain.len();
            let p0 = cls.vertex_proj[chain[n - 1]].point;
            let p1 = cls.vertex_proj[chain[n - 2]].point;
            if p0.dist(p1) < 1e-6 * mesh.local_h(chain[n - 1]) {
                chain.pop();
            } else {
                break;
            }
        }
        tip_vertices = vec![chain[0], *chain.last().unwrap()];
    }

    let mut edges = Vec::new();
    let mut source_tri = Vec::new();
    let n_edges = if closed { chain.len() } else { chain.len() - 1 };
    for i in 0..n_edges {
        let u = chain[i];
        let v = chain[(i + 1) % chain.len()];
        let e = [u.min(v), u.max(v)];
        edges.push(e);
        source_tri.push(source.get(&e).copied().unwrap_or(usize::MAX));
    }
    // acuteness precondition on the cut triangles the curve actually passes
    // through (spurious cuts beyond the trimmed ends are irrelevant)
    for &t in &source_tri {
        if t == usize::MAX {
            continue;
        }
        let [a, b, c] = mesh.tri_points(t);
        if !is_acute(a, b, c).map_err(ConformError::Geometry)? {
            return Err(ConformError::NonAcuteCutTriangle { triangle: t });
        }
    }
    Ok(GammaH {
        chain,
        edges,
        source_tri,
        tip_vertices,
        closed,
    })
}

fn argmin_by_dist(chain: &[usize], positions: &[Point2], target: Point2) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, &v) in chain.iter().enumerate() {
        let d = positions[v].dist(target);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Quality-guarded Laplacian relaxation: each movable vertex is proposed to
/// the average of its neighbors and the move is accepted only if the minimum
/// (signed) quality of its incident triangles does not decrease. Vertex order
/// is ascending index; the sweep stops after `iters` passes or when the
/// largest accepted displacement falls below 1e-3 of the local mesh size.
///
/// Vertices marked in `sliding` are constrained to the given curve: their
/// proposed positions are projected back onto it before the quality check,
/// so they redistribute tangentially without leaving the interface.
pub fn relax(
    base: &Triangulation,
    positions: &mut [Point2],
    movable: &[bool],
    sliding: Option<(&Spline, &[bool])>,
    iters: usize,
) {
    // vertex -> neighbor vertices (from the base connectivity)
    let nv = positions.len();
    let mut neighbors: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nv];
    for e in &base.edges {
        neighbors[e[0]].insert(e[1]);
        neighbors[e[1]].insert(e[0]);
    }
    let slides = |v: usize| sliding.is_some_and(|(_, s)| s[v]);
    let constrain = |v: usize, p: Point2| match sliding {
        Some((curve, s)) if s[v] => curve.closest_point(p).point,
        _ => p,
    };
    let min_q = |positions: &[Point2], v: usize| {
        base.vertex_tris[v]
            .iter()
            .map(|&t| {
                let [a, b, c] = base.triangles[t];
                signed_quality(positions[a], positions[b], positions[c])
            })
            .fold(f64::INFINITY, f64::min)
    };
    for _ in 0..iters {
        let mut max_disp: f64 = 0.0;
        let mut max_h: f64 = 1.0;
        for v in 0..nv {
            if (!movable[v] && !slides(v)) || neighbors[v].is_empty() {
                continue;
            }
            let mut avg = Point2::new(0.0, 0.0);
            for &n in &neighbors[v] {
                avg = avg.add(positions[n]);
            }
            let avg = constrain(v, avg.scale(1.0 / neighbors[v].len() as f64));
            let old = positions[v];
            let before = min_q(positions, v);
            positions[v] = avg;
            let after = min_q(positions, v);
            if after >= before {
                max_disp = max_disp.max(avg.dist(old));
                max_h = max_h.max(base.local_h(v));
            } else {
                positions[v] = old;
            }
        }
        if max_disp < 1e-3 * max_h {
            break;
        }
    }

    // The Laplacian average cannot always rescue a triangle squeezed between
    // two projected chain vertices (a curve running nearly parallel to a
    // lattice row, for instance). Finish with a local pattern search that
    // moves each vertex in a poor neighborhood toward the position
    // maximizing the minimum signed quality of its incident triangles.
    for _ in 0..8 {
        let mut improved = false;
        for v in 0..nv {
            if (!movable[v] && !slides(v)) || neighbors[v].is_empty() {
                continue;
            }
            let before = min_q(positions, v);
            if before >= 0.35 {
                continue;
            }
            let h = base.local_h(v);
            let old = positions[v];
            let mut best = before;
            let mut best_p = old;
            for radius in [0.25 * h, 0.1 * h, 0.04 * h] {
                for k in 0..8 {
                    let ang = k as f64 * std::f64::consts::FRAC_PI_4;
                    let p = constrain(
                        v,
                        Point2::new(old.x + radius * ang.cos(), old.y + radius * ang.sin()),
                    );
                    positions[v] = p;
                    let q = min_q(positions, v);
                    if q > best {
                        best = q;
                        best_p = p;
                    }
                }
            }
            positions[v] = best_p;
            if best > before + 1e-12 {
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
}

/// Deform the universal mesh so that it conforms to the curve: project the
/// Gamma_h chain onto the curve, snap the designated end vertices exactly to
/// the crack tips, and relax nearby vertices. The base mesh is not modified.
pub fn conform(
    mesh: &Triangulation,
    curve: &Spline,
    params: &ConformParams,
) -> Result<ConformedMesh, ConformError> {
    let cls = classify(mesh, curve, params.band_factor);

    // curvature precondition: local mesh size must resolve the curve
    let r_curv = curve.min_radius_of_curvature(16);
    let mut h_near: f64 = 0.0;
    for v in 0..mesh.vertices.len() {
        if !cls.far_field[v] {
            h_near = h_near.max(mesh.local_h(v));
        }
    }
    if r_curv < 2.0 * h_near {
        return Err(ConformError::CurvatureBound {
            r_curv,
            h_local: h_near,
        });
    }

    let gamma = select_gamma_h(mesh, &cls, curve)?;

    let mut positions = mesh.vertices.clone();
    for &v in &gamma.chain {
        positions[v] = cls.vertex_proj[v].point;
    }
    if !gamma.closed {
        positions[gamma.tip_vertices[0]] = curve.eval(0.0);
        positions[gamma.tip_vertices[1]] = curve.eval(curve.length());
    }

    // movable band: vertices within `rings` rings of the chain, excluding the
    // chain itself and the domain boundary
    let mut movable = vec![false; positions.len()];
    let mut ring: BTreeSet<usize> = gamma.chain.iter().copied().collect();
    let chain_set = ring.clone();
    for _ in 0..params.rings {
        let mut next = ring.clone();
        for &v in &ring {
            for &t in &mesh.vertex_tris[v] {
                for &w in &mesh.triangles[t] {
                    next.insert(w);
                }
            }
        }
        ring = next;
    }
    let boundary: BTreeSet<usize> = mesh.boundary_edges().iter().flatten().copied().collect();
    for &v in &ring {
        if !chain_set.contains(&v) && !boundary.contains(&v) {
            movable[v] = true;
        }
    }
    // interior chain vertices may slide along the curve; the snapped tips
    // and (for a closed curve) all chain vertices' membership stay put
    let mut sliding = vec![false; positions.len()];
    for &v in &gamma.chain {
        if !boundary.contains(&v) && !gamma.tip_vertices.contains(&v) {
            sliding[v] = true;
        }
    }
    relax(
        mesh,
        &mut positions,
        &movable,
        Some((curve, &sliding)),
        params.relax_iters,
    );

    // validate
    let mut min_quality = f64::INFINITY;
    let mut bad = Vec::new();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let q = signed_quality(positions[tri[0]], positions[tri[1]], positions[tri[2]]);
        min_quality = min_quality.min(q);
        if q < params.q_min {
            bad.push(t);
        }
    }
    if !bad.is_empty() {
        return Err(ConformError::ConformationFailure {
            detail: format!("min quality {min_quality:.4} below q_min {}", params.q_min),
            triangles: bad,
        });
    }
    for &v in &gamma.chain {
        let d = curve.closest_point(positions[v]).distance;
        if d > params.tol_proj {
            return Err(ConformError::ConformationFailure {
                detail: format!("Gamma_h vertex {v} is {d:.3e} from the curve"),
                triangles: vec![],
            });
        }
    }

    let crack_edges_pos = gamma.edges.clone();
    Ok(ConformedMesh {
        base_vertex_count: positions.len(),
        positions,
        triangles: mesh.triangles.clone(),
        tip_vertex_ids: gamma.tip_vertices.clone(),
        gamma,
        duplicated_pairs: Vec::new(),
        crack_edges_pos,
        crack_edges_neg: Vec::new(),
        min_quality,
    })
}

/// Duplicate the interior crack vertices and re-index the triangles on the
/// negative flank so the crack becomes a genuine slit with two faces.
pub fn split_crack(
    conformed: &ConformedMesh,
    base: &Triangulation,
    cls: &CutClassification,
) -> Result<ConformedMesh, ConformError> {
    let gamma = &conformed.gamma;
    if gamma.closed || gamma.chain.len() < 2 {
        return Err(ConformError::RefinementNeeded {
            detail: "split_crack needs an open Gamma_h chain".into(),
        });
    }
    let chain = &gamma.chain;
    let crack_edges: BTreeSet<[usize; 2]> = gamma.edges.iter().copied().collect();

    // negative-flank triangle of each crack edge: the incident triangle whose
    // third vertex is on the negative side
    let third_vertex = |t: usize, e: &[usize; 2]| -> usize {
        *base.triangles[t]
            .iter()
            .find(|v| **v != e[0] && **v != e[1])
            .unwrap()
    };
    let mut neg_tri_of_edge: BTreeMap<[usize; 2], usize> = BTreeMap::new();
    for e in &crack_edges {
        let idx = base
            .edges
            .binary_search(e)
            .map_err(|_| ConformError::SplitTopology { vertex: e[0] })?;
        let (t1, t2) = base.edge_tris[idx];
        let t2 = t2.ok_or(ConformError::SplitTopology { vertex: e[0] })?;
        let neg = if cls.vertex_side[third_vertex(t1, e)] < 0 {
            t1
        } else if cls.vertex_side[third_vertex(t2, e)] < 0 {
            t2
        } else {
            return Err(ConformError::SplitTopology { vertex: e[0] });
        };
        neg_tri_of_edge.insert(*e, neg);
    }

    let mut positions = conformed.positions.clone();
    let mut triangles = conformed.triangles.clone();
    let mut duplicated_pairs = Vec::new();
    // clone index per interior chain vertex
    let mut clone_of: BTreeMap<usize, usize> = BTreeMap::new();

    for i in 1..chain.len() - 1 {
        let v = chain[i];
        let e_prev = {
            let (a, b) = (chain[i - 1], v);
            [a.min(b), a.max(b)]
        };
        let e_next = {
            let (a, b) = (v, chain[i + 1]);
            [a.min(b), a.max(b)]
        };
        // walk the fan of v starting from the negative triangle of e_next,
        // crossing shared edges but never a crack edge
        let incident: BTreeSet<usize> = base.vertex_tris[v].iter().copied().collect();
        let seed = neg_tri_of_edge[&e_next];
        let mut visited = BTreeSet::new();
        let mut queue = VecDeque::new();
        visited.insert(seed);
        queue.push_back(seed);
        while let Some(t) = queue.pop_front() {
            for j in 0..3 {
                let a = base.triangles[t][j];
                let b = base.triangles[t][(j + 1) % 3];
                if a != v && b != v {
                    continue;
                }
                let e = [a.min(b), a.max(b)];
                if crack_edges.contains(&e) {
                    continue;
                }
                let idx = base.edges.binary_search(&e).unwrap();
                let (t1, t2) = base.edge_tris[idx];
                for other in [Some(t1), t2].into_iter().flatten() {
                    if other != t && incident.contains(&other) && visited.insert(other) {
                        queue.push_back(other);
                    }
                }
            }
        }
        // the positive triangles of the bounding crack edges must not be in
        // the negative sector
        for e in [&e_prev, &e_next] {
            let idx = base.edges.binary_search(e).unwrap();
            let (t1, t2) = base.edge_tris[idx];
            let neg = neg_tri_of_edge[e];
            let pos = if t1 == neg { t2.unwrap() } else { t1 };
            if !visited.contains(&neg_tri_of_edge[e]) || visited.contains(&pos) {
                return Err(ConformError::SplitTopology { vertex: v });
            }
        }
        let clone = positions.len();
        positions.push(positions[v]);
        clone_of.insert(v, clone);
        duplicated_pairs.push((v, clone));
        for &t in &visited {
            for slot in triangles[t].iter_mut() {
                if *slot == v {
                    *slot = clone;
                }
            }
        }
    }

    let crack_edges_neg = gamma
        .edges
        .iter()
        .map(|e| {
            let a = clone_of.get(&e[0]).copied().unwrap_or(e[0]);
            let b = clone_of.get(&e[1]).copied().unwrap_or(e[1]);
            [a, b]
        })
        .collect();

    Ok(ConformedMesh {
        positions,
        triangles,
        base_vertex_count: conformed.base_vertex_count,
        gamma: gamma.clone(),
        tip_vertex_ids: conformed.tip_vertex_ids.clone(),
        duplicated_pairs,
        crack_edges_pos: conformed.crack_edges_pos.clone(),
        crack_edges_neg,
        min_quality: conformed.min_quality,
    })
}

/// Conform to an open crack curve and split along it in one call.
pub fn conform_and_split(
    mesh: &Triangulation,
    curve: &Spline,
    params: &ConformParams,
) -> Result<ConformedMesh, ConformError> {
    let cls = classify(mesh, curve, params.band_factor);
    let conformed = conform(mesh, curve, params)?;
    split_crack(&conformed, mesh, &cls)
}

/// Conform to a closed curve and keep only the interior (positive-side)
/// triangles. Returns the interior triangulation together with the indices of
/// its vertices that lie on the curve.
pub fn conform_closed_interior(
    mesh: &Triangulation,
    curve: &Spline,
    params: &ConformParams,
) -> Result<(Triangulation, Vec<usize>), ConformError> {
    let cls = classify(mesh, curve, params.band_factor);
    let conformed = conform(mesh, curve, params)?;
    let chain_set: BTreeSet<usize> = conformed.gamma.chain.iter().copied().collect();
    let boundary_edges: BTreeSet<[usize; 2]> =
        conformed.gamma.edges.iter().copied().collect();

    // flood from a deep positive-side seed, blocked by the chain edges
    let mut seed = None;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if tri
            .iter()
            .all(|&v| cls.far_field[v] && cls.vertex_side[v] > 0)
        {
            seed = Some(t);
            break;
        }
    }
    let seed = seed.ok_or_else(|| ConformError::RefinementNeeded {
        detail: "no interior seed triangle found".into(),
    })?;
    let mut keep = vec![false; mesh.triangles.len()];
    let mut queue = VecDeque::new();
    keep[seed] = true;
    queue.push_back(seed);
    while let Some(t) = queue.pop_front() {
        for j in 0..3 {
            let a = mesh.triangles[t][j];
            let b = mesh.triangles[t][(j + 1) % 3];
            let e = [a.min(b), a.max(b)];
            if boundary_edges.contains(&e) {
                continue;
            }
            let idx = mesh.edges.binary_search(&e).unwrap();
            let (t1, t2) = mesh.edge_tris[idx];
            for other in [Some(t1), t2].into_iter().flatten() {
                if !keep[other] {
                    keep[other] = true;
                    queue.push_back(other);
                }
            }
        }
    }

    let mut remap = vec![usize::MAX; conformed.positions.len()];
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if !keep[t] {
            continue;
        }
        let mut new_tri = [0usize; 3];
        for (k, &v) in tri.iter().enumerate() {
            if remap[v] == usize::MAX {
                remap[v] = vertices.len();
                vertices.push(conformed.positions[v]);
            }
            new_tri[k] = remap[v];
        }
        triangles.push(new_tri);
    }
    let on_curve = chain_set
        .iter()
        .filter(|&&v| remap[v] != usize::MAX)
        .map(|&v| remap[v])
        .collect();
    Ok((Triangulation::new(vertices, triangles)?, on_curve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::structured_acute_mesh;

    fn unit_mesh(n: usize) -> Triangulation {
        structured_acute_mesh(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), n).unwrap()
    }

    fn horizontal_crack(y: f64) -> Spline {
        Spline::fit(
            &[Point2::new(0.2, y), Point2::new(0.5, y), Point2::new(0.8, y)],
            false,
        )
        .unwrap()
    }

    #[test]
    fn classify_sides_of_horizontal_segment() {
        let mesh = unit_mesh(10);
        let curve = horizontal_crack(0.52);
        let cls = classify(&mesh, &curve, 3.0);
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let signs: Vec<i32> = tri.iter().map(|&v| cls.vertex_side[v]).collect();
            let pos = signs.iter().filter(|&&s| s > 0).count();
            match cls.tri_cut[t] {
                // pos == 3 only with a vertex exactly on the curve, which
                // y = 0.52 avoids on this lattice
                TriCut::PositivelyCut => assert_eq!(pos, 2),
                TriCut::NegativelyCut => assert_eq!(pos, 1),
                _ => {}
            }
        }
        // vertices well above the crack are positive (left of +x tangent)
        for (v, p) in mesh.vertices.iter().enumerate() {
            if p.y > 0.6 && p.x > 0.25 && p.x < 0.75 {
                assert_eq!(cls.vertex_side[v], 1);
            }
            if p.y < 0.45 && p.y > 0.3 && p.x > 0.25 && p.x < 0.75 {
                assert_eq!(cls.vertex_side[v], -1);
            }
        }
    }

    #[test]
    fn gamma_h_is_simple_chain() {
        let mesh = unit_mesh(12);
        let curve = horizontal_crack(0.48);
        let cls = classify(&mesh, &curve, 3.0);
        let gamma = select_gamma_h(&mesh, &cls, &curve).unwrap();
        assert!(gamma.chain.len() >= 3);
        assert_eq!(gamma.tip_vertices.len(), 2);
        // structurally simple: no repeated vertices
        let set: BTreeSet<usize> = gamma.chain.iter().copied().collect();
        assert_eq!(set.len(), gamma.chain.len());
        // no triangle has all three vertices on the chain
        for tri in &mesh.triangles {
            assert!(!tri.iter().all(|v| set.contains(v)));
        }
    }

    #[test]
    fn three_node_modification_on_synthetic_set() {
        let mesh = unit_mesh(6);
        let curve = horizontal_crack(0.45);
        // fabricate a Gamma_h set containing all three edges of one triangle
        let tri = mesh.triangles[40];
        let mut edges: BTreeSet<[usize; 2]> = BTreeSet::new();
        for i in 0..3 {
            let a = tri[i];
            let b = tri[(i + 1) % 3];
            edges.insert([a.min(b), a.max(b)]);
        }
        remove_three_node_triangles(&mut edges, &mesh, &curve);
        assert_eq!(edges.len(), 1);
        let on_gamma: BTreeSet<usize> = edges.iter().flatten().copied().collect();
        for t in &mesh.triangles {
            let gamma_edges = (0..3)
                .filter(|&i| {
                    let a = t[i];
                    let b = t[(i + 1) % 3];
                    edges.contains(&[a.min(b), a.max(b)])
                })
                .count();
            if t.iter().all(|v| on_gamma.contains(v)) {
                assert!(gamma_edges < 3);
            }
        }
    }

    #[test]
    fn conform_straight_crack_lands_on_line() {
        let mesh = unit_mesh(12);
        let curve = horizontal_crack(0.5 + 0.013);
        let conformed = conform(&mesh, &curve, &ConformParams::default()).unwrap();
        for &v in &conformed.gamma.chain {
            let d = (conformed.positions[v].y - 0.513).abs();
            assert!(d < 1e-12, "chain vertex {v} off the line by {d:.2e}");
        }
        // tips exactly at the curve endpoints
        let t0 = conformed.positions[conformed.tip_vertex_ids[0]];
        let t1 = conformed.positions[conformed.tip_vertex_ids[1]];
        assert!(t0.dist(Point2::new(0.2, 0.513)) < 1e-15);
        assert!(t1.dist(Point2::new(0.8, 0.513)) < 1e-15);
        assert!(conformed.min_quality >= 0.2);
    }

    #[test]
    fn conform_under_refined_curvature_errors() {
        let mesh = unit_mesh(6);
        // wiggly curve with small radius of curvature relative to h
        let pts: Vec<Point2> = (0..=12)
            .map(|i| {
                let x = 0.2 + 0.6 * i as f64 / 12.0;
                Point2::new(x, 0.5 + 0.05 * (x * 40.0).sin())
            })
            .collect();
        let curve = Spline::fit(&pts, false).unwrap();
        let err = conform(&mesh, &curve, &ConformParams::default());
        assert!(matches!(err, Err(ConformError::CurvatureBound { .. })));
    }

    #[test]
    fn relax_recenters_perturbed_hexagon_vertex() {
        // regular hexagon fan around a center vertex
        let mut vertices = vec![Point2::new(0.03, -0.02)]; // perturbed center
        for i in 0..6 {
            let th = std::f64::consts::PI / 3.0 * i as f64;
            vertices.push(Point2::new(th.cos(), th.sin()));
        }
        let triangles: Vec<[usize; 3]> = (0..6).map(|i| [0, i + 1, (i + 1) % 6 + 1]).collect();
        let tri = Triangulation::new(vertices.clone(), triangles).unwrap();
        let mut positions = vertices;
        let mut movable = vec![false; 7];
        movable[0] = true;
        relax(&tri, &mut positions, &movable, None, 20);
        assert!(positions[0].norm() < 1e-6);
    }

    #[test]
    fn relax_never_decreases_min_quality() {
        let mesh = unit_mesh(8);
        let curve = horizontal_crack(0.47);
        let cls = classify(&mesh, &curve, 3.0);
        let gamma = select_gamma_h(&mesh, &cls, &curve).unwrap();
        let mut positions = mesh.vertices.clone();
        for &v in &gamma.chain {
            positions[v] = cls.vertex_proj[v].point;
        }
        let before: f64 = mesh
            .triangles
            .iter()
            .map(|t| signed_quality(positions[t[0]], positions[t[1]], positions[t[2]]))
            .fold(f64::INFINITY, f64::min);
        let mut movable = vec![true; positions.len()];
        for &v in &gamma.chain {
            movable[v] = false;
        }
        for e in mesh.boundary_edges() {
            movable[e[0]] = false;
            movable[e[1]] = false;
        }
        relax(&mesh, &mut positions, &movable, None, 20);
        let after: f64 = mesh
            .triangles
            .iter()
            .map(|t| signed_quality(positions[t[0]], positions[t[1]], positions[t[2]]))
            .fold(f64::INFINITY, f64::min);
        assert!(after >= before - 1e-15);
    }

    #[test]
    fn split_creates_expected_duplicates() {
        let mesh = unit_mesh(12);
        let curve = horizontal_crack(0.5 + 0.017);
        let split = conform_and_split(&mesh, &curve, &ConformParams::default()).unwrap();
        let interior = split.gamma.chain.len() - 2;
        assert_eq!(split.duplicated_pairs.len(), interior);
        assert_eq!(split.positions.len(), split.base_vertex_count + interior);
        assert_eq!(split.triangles.len(), mesh.triangles.len());
        // clones coincide with their originals
        for &(v, c) in &split.duplicated_pairs {
            assert_eq!(split.positions[v], split.positions[c]);
        }
        // split mesh is a valid manifold triangulation
        let tri = split.triangulation().unwrap();
        // slitting a disk opens a hole: the Euler characteristic drops by one
        let euler = |t: &Triangulation| {
            t.vertices.len() as i64 - t.edges.len() as i64 + t.triangles.len() as i64
        };
        assert_eq!(euler(&tri), euler(&mesh) - 1);
    }

    #[test]
    fn conform_is_deterministic_and_base_reusable() {
        let mesh = unit_mesh(12);
        let curve_a = horizontal_crack(0.46);
        let curve_b = horizontal_crack(0.54);
        let r1 = conform(&mesh, &curve_b, &ConformParams::default()).unwrap();
        let _ = conform(&mesh, &curve_a, &ConformParams::default()).unwrap();
        let r2 = conform(&mesh, &curve_b, &ConformParams::default()).unwrap();
        assert_eq!(r1.positions.len(), r2.positions.len());
        for (p, q) in r1.positions.iter().zip(&r2.positions) {
            assert_eq!(p.x, q.x);
            assert_eq!(p.y, q.y);
        }
    }

    #[test]
    fn conform_closed_circle() {
        let mesh = structured_acute_mesh(Point2::new(-3.0, -3.0), Point2::new(3.0, 3.0), 24)
            .unwrap();
        let n = 64;
        let pts: Vec<Point2> = (0..n)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                Point2::new(2.0 * th.cos(), 2.0 * th.sin())
            })
            .collect();
        let circle = Spline::fit(&pts, true).unwrap();
        let (interior, on_curve) =
            conform_closed_interior(&mesh, &circle, &ConformParams::default()).unwrap();
        assert!(!on_curve.is_empty());
        for &v in &on_curve {
            // exactly on the spline, and on the circle up to interpolation error
            let d = circle.closest_point(interior.vertices[v]).distance;
            assert!(d < 1e-10, "boundary vertex {d:.2e} off the curve");
            let r = interior.vertices[v].norm();
            assert!((r - 2.0).abs() < 1e-6, "boundary vertex at radius {r}");
        }
        assert!(interior.quality_report().min_q >= 0.2);
    }
}
