//! Plane linear elasticity with quadratic (P2) triangles on the conformed,
//! split mesh. Straight-sided elements, 6-point quadrature, sparse symmetric
//! assembly, and a Jacobi-preconditioned conjugate gradient solver.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::FemError;
use crate::geometry::{Point2, Triangulation};

/// Linear elastic material and the fracture toughness used for load scaling.
#[derive(Debug, Clone, Copy)]
pub struct Material {
    pub e: f64,
    pub nu: f64,
    pub plane_strain: bool,
    pub k_c: f64,
}

impl Material {
    /// Shear modulus.
    pub fn mu(&self) -> f64 {
        self.e / (2.0 * (1.0 + self.nu))
    }

    /// Effective first Lame parameter for the 2D reduction (the plane-stress
    /// value is the standard lambda* substitution).
    pub fn lambda(&self) -> f64 {
        let lam = self.e * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu));
        if self.plane_strain {
            lam
        } else {
            let mu = self.mu();
            2.0 * lam * mu / (lam + 2.0 * mu)
        }
    }

    /// Kolosov constant.
    pub fn kappa(&self) -> f64 {
        if self.plane_strain {
            3.0 - 4.0 * self.nu
        } else {
            (3.0 - self.nu) / (1.0 + self.nu)
        }
    }

    /// Effective Young modulus relating the interaction integral to K.
    pub fn e_star(&self) -> f64 {
        if self.plane_strain {
            self.e / (1.0 - self.nu * self.nu)
        } else {
            self.e
        }
    }
}

/// P2 node layout over a triangulation: vertex nodes first, one midside node
/// per edge after them.
#[derive(Debug, Clone)]
pub struct P2Mesh {
    pub tri: Triangulation,
    /// Coordinates of all nodes (vertices then edge midpoints).
    pub nodes: Vec<Point2>,
    /// Six node ids per element: three corners, then the midsides opposite
    /// the order (01, 12, 20).
    pub elems: Vec<[usize; 6]>,
    pub n_vertex: usize,
}

impl P2Mesh {
    pub fn build(tri: &Triangulation) -> P2Mesh {
        let nv = tri.vertices.len();
        let mut nodes = tri.vertices.clone();
        for e in &tri.edges {
            nodes.push(tri.vertices[e[0]].midpoint(tri.vertices[e[1]]));
        }
        let elems = tri
            .triangles
            .iter()
            .map(|t| {
                let mid = |a: usize, b: usize| {
                    let e = [a.min(b), a.max(b)];
                    nv + tri.edges.binary_search(&e).expect("edge exists")
                };
                [
                    t[0],
                    t[1],
                    t[2],
                    mid(t[0], t[1]),
                    mid(t[1], t[2]),
                    mid(t[2], t[0]),
                ]
            })
            .collect();
        P2Mesh {
            tri: tri.clone(),
            nodes,
            elems,
            n_vertex: nv,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }
}

/// Degree-4 quadrature on the reference triangle (weights sum to 1/2).
pub const QUAD_PTS: [(f64, f64, f64); 6] = {
    const A: f64 = 0.445948490915965;
    const WA: f64 = 0.111690794839005;
    const B: f64 = 0.091576213509771;
    const WB: f64 = 0.054975871827661;
    [
        (A, A, WA),
        (1.0 - 2.0 * A, A, WA),
        (A, 1.0 - 2.0 * A, WA),
        (B, B, WB),
        (1.0 - 2.0 * B, B, WB),
        (B, 1.0 - 2.0 * B, WB),
    ]
};

/// P2 shape functions at reference coordinates.
pub fn shape(xi: f64, eta: f64) -> [f64; 6] {
    let l0 = 1.0 - xi - eta;
    let (l1, l2) = (xi, eta);
    [
        l0 * (2.0 * l0 - 1.0),
        l1 * (2.0 * l1 - 1.0),
        l2 * (2.0 * l2 - 1.0),
        4.0 * l0 * l1,
        4.0 * l1 * l2,
        4.0 * l2 * l0,
    ]
}

/// Reference-coordinate gradients of the P2 shape functions.
pub fn shape_grad(xi: f64, eta: f64) -> [[f64; 2]; 6] {
    let l0 = 1.0 - xi - eta;
    [
        [1.0 - 4.0 * l0, 1.0 - 4.0 * l0],
        [4.0 * xi - 1.0, 0.0],
        [0.0, 4.0 * eta - 1.0],
        [4.0 * (l0 - xi), -4.0 * xi],
        [4.0 * eta, 4.0 * xi],
        [-4.0 * eta, 4.0 * (l0 - eta)],
    ]
}

/// Boundary data and volume loads. `dirichlet` is evaluated at outer-boundary
/// node coordinates and may constrain each component independently;
/// `traction` receives the point and outward unit normal. Crack faces are
/// always traction free and never receive Dirichlet data.
pub struct Loads<'a> {
    pub dirichlet: Box<dyn Fn(Point2) -> [Option<f64>; 2] + 'a>,
    pub traction: Box<dyn Fn(Point2, Point2) -> [f64; 2] + 'a>,
    pub body: Box<dyn Fn(Point2) -> [f64; 2] + 'a>,
    /// Crack-face edges (vertex index pairs, both flanks) excluded from the
    /// outer boundary.
    pub crack_edges: Vec<[usize; 2]>,
}

impl<'a> Loads<'a> {
    pub fn dirichlet_only(f: impl Fn(Point2) -> [f64; 2] + 'a) -> Loads<'a> {
        Loads {
            dirichlet: Box::new(move |p| {
                let g = f(p);
                [Some(g[0]), Some(g[1])]
            }),
            traction: Box::new(|_, _| [0.0, 0.0]),
            body: Box::new(|_| [0.0, 0.0]),
            crack_edges: Vec::new(),
        }
    }
}

/// Compressed sparse row matrix (symmetric, both halves stored).
#[derive(Debug, Clone)]
pub struct Csr {
    pub rowptr: Vec<usize>,
    pub colidx: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.rowptr[i]..self.rowptr[i + 1] {
                s += self.vals[k] * x[self.colidx[k]];
            }
            *yi = s;
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rowptr.len() - 1)
            .map(|i| {
                (self.rowptr[i]..self.rowptr[i + 1])
                    .find(|&k| self.colidx[k] == i)
                    .map(|k| self.vals[k])
                    .unwrap_or(0.0)
            })
            .collect()
    }
}

/// Incomplete Cholesky factor with the sparsity of the lower triangle of A,
/// stored by rows (ascending columns) plus a transposed copy for the
/// backward solve.
struct Ic0 {
    rowptr: Vec<usize>,
    colidx: Vec<usize>,
    vals: Vec<f64>,
    colptr: Vec<usize>,
    rowidx: Vec<usize>,
    tvals: Vec<f64>,
}

impl Ic0 {
    /// None on breakdown (a non-positive pivot); the caller falls back to a
    /// diagonal preconditioner.
    fn build(a: &Csr, shift: f64) -> Option<Ic0> {
        let n = a.rowptr.len() - 1;
        let mut rowptr = Vec::with_capacity(n + 1);
        let mut colidx = Vec::new();
        rowptr.push(0);
        for i in 0..n {
            let mut cols: Vec<usize> = (a.rowptr[i]..a.rowptr[i + 1])
                .map(|k| a.colidx[k])
                .filter(|&j| j <= i)
                .collect();
            cols.sort_unstable();
            colidx.extend_from_slice(&cols);
            rowptr.push(colidx.len());
        }
        let mut vals = vec![0.0; colidx.len()];
        let mut diag_pos = vec![0usize; n];
        for i in 0..n {
            let row = rowptr[i]..rowptr[i + 1];
            let a_row: BTreeMap<usize, f64> = (a.rowptr[i]..a.rowptr[i + 1])
                .map(|k| (a.colidx[k], a.vals[k]))
                .collect();
            let mut sum_sq = 0.0;
            for idx in row.clone() {
                let k = colidx[idx];
                if k == i {
                    let d = a_row[&i] * (1.0 + shift) - sum_sq;
                    if d <= 0.0 {
                        return None;
                    }
                    vals[idx] = d.sqrt();
                    diag_pos[i] = idx;
                } else {
                    // dot of rows i and k over columns < k
                    let mut s = a_row.get(&k).copied().unwrap_or(0.0);
                    let (mut p1, mut p2) = (rowptr[i], rowptr[k]);
                    while p1 < idx && p2 < diag_pos[k] {
                        match colidx[p1].cmp(&colidx[p2]) {
                            std::cmp::Ordering::Less => p1 += 1,
                            std::cmp::Ordering::Greater => p2 += 1,
                            std::cmp::Ordering::Equal => {
                                s -= vals[p1] * vals[p2];
                                p1 += 1;
                                p2 += 1;
                            }
                        }
                    }
                    let l = s / vals[diag_pos[k]];
                    vals[idx] = l;
                    sum_sq += l * l;
                }
            }
        }
        // transpose for the L^T solve
        let mut colptr = vec![0usize; n + 1];
        for &j in &colidx {
            colptr[j + 1] += 1;
        }
        for j in 0..n {
            colptr[j + 1] += colptr[j];
        }
        let mut cursor = colptr.clone();
        let mut rowidx = vec![0usize; colidx.len()];
        let mut tvals = vec![0.0; colidx.len()];
        for i in 0..n {
            for idx in rowptr[i]..rowptr[i + 1] {
                let j = colidx[idx];
                rowidx[cursor[j]] = i;
                tvals[cursor[j]] = vals[idx];
                cursor[j] += 1;
            }
        }
        Some(Ic0 {
            rowptr,
            colidx,
            vals,
            colptr,
            rowidx,
            tvals,
        })
    }

    /// z = (L L^T)^{-1} r by forward and backward substitution.
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = r.len();
        for i in 0..n {
            let mut s = r[i];
            let mut diag = 1.0;
            for idx in self.rowptr[i]..self.rowptr[i + 1] {
                let j = self.colidx[idx];
                if j == i {
                    diag = self.vals[idx];
                } else {
                    s -= self.vals[idx] * z[j];
                }
            }
            z[i] = s / diag;
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            let mut diag = 1.0;
            for idx in self.colptr[i]..self.colptr[i + 1] {
                let j = self.rowidx[idx];
                if j == i {
                    diag = self.tvals[idx];
                } else {
                    s -= self.tvals[idx] * z[j];
                }
            }
            z[i] = s / diag;
        }
    }
}

/// Preconditioned conjugate gradients: incomplete Cholesky when the
/// factorization succeeds (with a small diagonal shift retry), Jacobi
/// otherwise. Relative tolerance on the residual; errors out if the diagonal
/// vanishes or iteration stalls.
pub fn solve_cg(a: &Csr, b: &[f64], tol: f64, maxiter: usize) -> Result<Vec<f64>, FemError> {
    let n = b.len();
    let diag = a.diag();
    if diag.iter().any(|&d| d <= 0.0) {
        return Err(FemError::SingularSystem);
    }
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let ic = [0.0, 1e-3, 1e-1]
        .iter()
        .find_map(|&shift| Ic0::build(a, shift));
    let precond = |r: &[f64], z: &mut [f64]| match &ic {
        Some(ic) => ic.apply(r, z),
        None => {
            for i in 0..r.len() {
                z[i] = r[i] / diag[i];
            }
        }
    };
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for _ in 0..maxiter {
        a.matvec(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(FemError::SingularSystem);
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm <= tol * bnorm {
            return Ok(x);
        }
        precond(&r, &mut z);
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    Err(FemError::NoConvergence {
        iterations: maxiter,
        residual: rnorm / bnorm,
    })
}

/// Finite element solution: two displacement dofs per P2 node.
pub struct Solution {
    pub u: Vec<f64>,
    pub iterations_hint: usize,
}

fn element_geometry(p2: &P2Mesh, t: usize) -> ([Point2; 3], [[f64; 2]; 2], f64) {
    let tri = p2.tri.triangles[t];
    let a = p2.tri.vertices[tri[0]];
    let b = p2.tri.vertices[tri[1]];
    let c = p2.tri.vertices[tri[2]];
    // Jacobian of the affine map and its inverse transpose
    let j = [[b.x - a.x, c.x - a.x], [b.y - a.y, c.y - a.y]];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let inv_t = [
        [j[1][1] / det, -j[1][0] / det],
        [-j[0][1] / det, j[0][0] / det],
    ];
    ([a, b, c], inv_t, det)
}

/// Physical-coordinate shape gradients at a reference point of element `t`.
pub fn physical_grads(p2: &P2Mesh, t: usize, xi: f64, eta: f64) -> [[f64; 2]; 6] {
    let (_, inv_t, _) = element_geometry(p2, t);
    let gr = shape_grad(xi, eta);
    let mut out = [[0.0; 2]; 6];
    for i in 0..6 {
        out[i][0] = inv_t[0][0] * gr[i][0] + inv_t[0][1] * gr[i][1];
        out[i][1] = inv_t[1][0] * gr[i][0] + inv_t[1][1] * gr[i][1];
    }
    out
}

/// Assemble and solve the elasticity problem on the (split) mesh.
pub fn solve(p2: &P2Mesh, mat: &Material, loads: &Loads) -> Result<Solution, FemError> {
    let n = p2.n_nodes();
    let ndof = 2 * n;
    let (lam, mu) = (mat.lambda(), mat.mu());

    // sparsity via per-row maps, then CSR
    let mut rows: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); ndof];
    let mut rhs = vec![0.0; ndof];

    for t in 0..p2.elems.len() {
        let en = p2.elems[t];
        let (_, _, det) = element_geometry(p2, t);
        let mut ke = [[0.0f64; 12]; 12];
        let mut fe = [0.0f64; 12];
        for &(xi, eta, w) in &QUAD_PTS {
            let g = physical_grads(p2, t, xi, eta);
            let nsh = shape(xi, eta);
            let wdet = w * det;
            for i in 0..6 {
                for j in 0..6 {
                    let dot = g[i][0] * g[j][0] + g[i][1] * g[j][1];
                    for al in 0..2 {
                        for be in 0..2 {
                            let mut v = lam * g[i][al] * g[j][be]
                                + mu * g[i][be] * g[j][al];
                            if al == be {
                                v += mu * dot;
                            }
                            ke[2 * i + al][2 * j + be] += wdet * v;
                        }
                    }
                }
            }
            // body force
            let mut xq = Point2::new(0.0, 0.0);
            for i in 0..6 {
                xq = xq.add(p2.nodes[en[i]].scale(nsh[i]));
            }
            let f = (loads.body)(xq);
            for i in 0..6 {
                fe[2 * i] += wdet * nsh[i] * f[0];
                fe[2 * i + 1] += wdet * nsh[i] * f[1];
            }
        }
        for i in 0..6 {
            for al in 0..2 {
                let gi = 2 * en[i] + al;
                rhs[gi] += fe[2 * i + al];
                for j in 0..6 {
                    for be in 0..2 {
                        let gj = 2 * en[j] + be;
                        *rows[gi].entry(gj).or_insert(0.0) += ke[2 * i + al][2 * j + be];
                    }
                }
            }
        }
    }

    // boundary handling: outer boundary = boundary edges minus crack faces
    let crack_set: BTreeSet<[usize; 2]> = loads
        .crack_edges
        .iter()
        .map(|e| [e[0].min(e[1]), e[0].max(e[1])])
        .collect();
    let crack_nodes: BTreeSet<usize> = crack_set
        .iter()
        .map(|e| {
            let idx = p2.tri.edges.binary_search(e).expect("crack edge in mesh");
            [e[0], e[1], p2.n_vertex + idx]
        })
        .flatten()
        .collect();

    // oriented boundary edges (interior on the left) for outward normals
    let mut outer_edges: Vec<([usize; 2], usize)> = Vec::new(); // (oriented pair, mid node)
    for (idx, e) in p2.tri.edges.iter().enumerate() {
        let (t1, t2) = p2.tri.edge_tris[idx];
        if t2.is_some() || crack_set.contains(e) {
            continue;
        }
        let tri = p2.tri.triangles[t1];
        let oriented = (0..3)
            .map(|i| [tri[i], tri[(i + 1) % 3]])
            .find(|[a, b]| [(*a).min(*b), (*a).max(*b)] == *e)
            .expect("boundary edge oriented in its triangle");
        outer_edges.push((oriented, p2.n_vertex + idx));
    }

    // traction integrals: 3-point Gauss per boundary edge on the P2 trace
    let gauss3: [(f64, f64); 3] = {
        let s = (0.6f64).sqrt();
        [(-s, 5.0 / 9.0), (0.0, 8.0 / 9.0), (s, 5.0 / 9.0)]
    };
    for &([a, b], mid) in &outer_edges {
        let pa = p2.tri.vertices[a];
        let pb = p2.tri.vertices[b];
        let d = pb.sub(pa);
        let len = d.norm();
        let normal = Point2::new(d.y, -d.x).scale(1.0 / len);
        for &(gx, gw) in &gauss3 {
            let s01 = 0.5 * (gx + 1.0); // position along edge in [0, 1]
            // quadratic trace shape functions at s01
            let sh = [
                (1.0 - s01) * (1.0 - 2.0 * s01),
                s01 * (2.0 * s01 - 1.0),
                4.0 * s01 * (1.0 - s01),
            ];
            let xq = pa.add(d.scale(s01));
            let tr = (loads.traction)(xq, normal);
            let w = gw * 0.5 * len;
            for (k, &node) in [a, b, mid].iter().enumerate() {
                rhs[2 * node] += w * sh[k] * tr[0];
                rhs[2 * node + 1] += w * sh[k] * tr[1];
            }
        }
    }

    // Dirichlet nodes on the outer boundary
    let mut fixed: Vec<Option<f64>> = vec![None; ndof];
    let mut outer_nodes: BTreeSet<usize> = BTreeSet::new();
    for &([a, b], mid) in &outer_edges {
        outer_nodes.insert(a);
        outer_nodes.insert(b);
        outer_nodes.insert(mid);
    }
    for &node in &outer_nodes {
        if crack_nodes.contains(&node) {
            continue;
        }
        let g = (loads.dirichlet)(p2.nodes[node]);
        for c in 0..2 {
            if let Some(v) = g[c] {
                fixed[2 * node + c] = Some(v);
            }
        }
    }
    if fixed.iter().all(|f| f.is_none()) {
        return Err(FemError::SingularSystem);
    }

    // symmetric elimination of fixed dofs
    for gi in 0..ndof {
        if let Some(v) = fixed[gi] {
            // move the column to the rhs of free rows
            let col: Vec<(usize, f64)> = rows[gi].iter().map(|(&j, &a)| (j, a)).collect();
            for (j, a) in col {
                if fixed[j].is_none() {
                    rhs[j] -= a * v;
                    rows[j].remove(&gi);
                }
            }
            rows[gi].clear();
            rows[gi].insert(gi, 1.0);
            rhs[gi] = v;
        }
    }

    // to CSR
    let mut rowptr = Vec::with_capacity(ndof + 1);
    let mut colidx = Vec::new();
    let mut vals = Vec::new();
    rowptr.push(0);
    for row in &rows {
        for (&j, &a) in row {
            colidx.push(j);
            vals.push(a);
        }
        rowptr.push(colidx.len());
    }
    let a = Csr {
        rowptr,
        colidx,
        vals,
    };
    let maxiter = 20 * (ndof as f64).sqrt() as usize + 1000;
    let u = solve_cg(&a, &rhs, 1e-12, maxiter)?;
    Ok(Solution {
        u,
        iterations_hint: maxiter,
    })
}

/// Locate the element containing `x` and its reference coordinates. For
/// points on the crack both flank elements match; `flank_hint`, when given,
/// selects the element whose centroid lies on that side of `x`.
pub fn locate(
    p2: &P2Mesh,
    x: Point2,
    flank_hint: Option<Point2>,
) -> Result<(usize, f64, f64), FemError> {
    let mut best: Option<(usize, f64, f64, f64)> = None;
    for t in 0..p2.tri.triangles.len() {
        let ([a, b, c], inv_t, _) = element_geometry(p2, t);
        let _ = (b, c);
        let dx = x.sub(a);
        let xi = inv_t[0][0] * dx.x + inv_t[1][0] * dx.y;
        let eta = inv_t[0][1] * dx.x + inv_t[1][1] * dx.y;
        let l0 = 1.0 - xi - eta;
        let min_bary = xi.min(eta).min(l0);
        if min_bary < -1e-10 {
            continue;
        }
        let score = match flank_hint {
            Some(h) => {
                let tri = p2.tri.triangles[t];
                let centroid = p2.tri.vertices[tri[0]]
                    .add(p2.tri.vertices[tri[1]])
                    .add(p2.tri.vertices[tri[2]])
                    .scale(1.0 / 3.0);
                centroid.sub(x).dot(h)
            }
            None => min_bary,
        };
        if best.map_or(true, |(_, _, _, s)| score > s) {
            best = Some((t, xi, eta, score));
        }
    }
    best.map(|(t, xi, eta, _)| (t, xi, eta))
        .ok_or(FemError::PointOutsideMesh { x: x.x, y: x.y })
}

impl Solution {
    /// Displacement at a point.
    pub fn displacement(
        &self,
        p2: &P2Mesh,
        x: Point2,
        flank_hint: Option<Point2>,
    ) -> Result<[f64; 2], FemError> {
        let (t, xi, eta) = locate(p2, x, flank_hint)?;
        let sh = shape(xi, eta);
        let en = p2.elems[t];
        let mut u = [0.0; 2];
        for i in 0..6 {
            u[0] += sh[i] * self.u[2 * en[i]];
            u[1] += sh[i] * self.u[2 * en[i] + 1];
        }
        Ok(u)
    }

    /// Displacement gradient [du_x/dx, du_x/dy; du_y/dx, du_y/dy] at a point.
    pub fn displacement_gradient(
        &self,
        p2: &P2Mesh,
        x: Point2,
        flank_hint: Option<Point2>,
    ) -> Result<[[f64; 2]; 2], FemError> {
        let (t, xi, eta) = locate(p2, x, flank_hint)?;
        Ok(self.element_gradient(p2, t, xi, eta))
    }

    /// Displacement gradient at reference coordinates of a known element.
    pub fn element_gradient(&self, p2: &P2Mesh, t: usize, xi: f64, eta: f64) -> [[f64; 2]; 2] {
        let g = physical_grads(p2, t, xi, eta);
        let en = p2.elems[t];
        let mut h = [[0.0; 2]; 2];
        for i in 0..6 {
            for c in 0..2 {
                h[0][c] += self.u[2 * en[i]] * g[i][c];
                h[1][c] += self.u[2 * en[i] + 1] * g[i][c];
            }
        }
        h
    }

    /// Cauchy stress [sxx, syy, sxy] from the displacement gradient.
    pub fn stress(
        &self,
        p2: &P2Mesh,
        mat: &Material,
        x: Point2,
        flank_hint: Option<Point2>,
    ) -> Result<[f64; 3], FemError> {
        let h = self.displacement_gradient(p2, x, flank_hint)?;
        Ok(stress_from_gradient(mat, &h))
    }
}

pub fn stress_from_gradient(mat: &Material, h: &[[f64; 2]; 2]) -> [f64; 3] {
    let (lam, mu) = (mat.lambda(), mat.mu());
    let exx = h[0][0];
    let eyy = h[1][1];
    let exy = 0.5 * (h[0][1] + h[1][0]);
    let tr = exx + eyy;
    [
        lam * tr + 2.0 * mu * exx,
        lam * tr + 2.0 * mu * eyy,
        2.0 * mu * exy,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::structured_acute_mesh;

    fn material() -> Material {
        Material {
            e: 10.0,
            nu: 0.3,
            plane_strain: true,
            k_c: 1.0,
        }
    }

    fn unit_p2(n: usize) -> P2Mesh {
        let tri =
            structured_acute_mesh(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), n).unwrap();
        P2Mesh::build(&tri)
    }

    #[test]
    fn shape_functions_partition_unity() {
        for &(xi, eta, _) in &QUAD_PTS {
            let s: f64 = shape(xi, eta).iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
            let g = shape_grad(xi, eta);
            for c in 0..2 {
                let gs: f64 = g.iter().map(|gi| gi[c]).sum();
                assert!(gs.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn quadrature_integrates_quartics() {
        // integral of xi^a eta^b over the reference triangle: a! b! / (a+b+2)!
        let exact = |a: u32, b: u32| {
            let fact = |k: u32| (1..=k).map(|v| v as f64).product::<f64>();
            fact(a) * fact(b) / fact(a + b + 2)
        };
        for (a, b) in [(0, 0), (1, 0), (2, 1), (4, 0), (2, 2), (0, 4), (3, 1)] {
            let num: f64 = QUAD_PTS
                .iter()
                .map(|&(xi, eta, w)| w * xi.powi(a as i32) * eta.powi(b as i32))
                .sum();
            assert!(
                (num - exact(a, b)).abs() < 1e-13,
                "xi^{a} eta^{b}: {num} vs {}",
                exact(a, b)
            );
        }
    }

    #[test]
    fn patch_test_linear_field_is_exact() {
        let p2 = unit_p2(4);
        let mat = material();
        let exact = |p: Point2| [0.3 * p.x - 0.2 * p.y + 0.05, 0.1 * p.x + 0.4 * p.y];
        let loads = Loads::dirichlet_only(exact);
        let sol = solve(&p2, &mat, &loads).unwrap();
        for (i, p) in p2.nodes.iter().enumerate() {
            let g = exact(*p);
            assert!((sol.u[2 * i] - g[0]).abs() < 1e-9, "node {i}");
            assert!((sol.u[2 * i + 1] - g[1]).abs() < 1e-9, "node {i}");
        }
        // constant stress everywhere
        let s1 = sol
            .stress(&p2, &mat, Point2::new(0.31, 0.41), None)
            .unwrap();
        let s2 = sol
            .stress(&p2, &mat, Point2::new(0.77, 0.13), None)
            .unwrap();
        for c in 0..3 {
            assert!((s1[c] - s2[c]).abs() < 1e-9);
        }
    }

    #[test]
    fn quadratic_field_with_body_force_is_nodally_exact() {
        // u = (x^2, x y) with the matching body force f = -div sigma
        let p2 = unit_p2(5);
        let mat = material();
        let (lam, mu) = (mat.lambda(), mat.mu());
        let exact = |p: Point2| [p.x * p.x, p.x * p.y];
        let loads = Loads {
            dirichlet: Box::new(move |p| {
                let g = exact(p);
                [Some(g[0]), Some(g[1])]
            }),
            traction: Box::new(|_, _| [0.0, 0.0]),
            body: Box::new(move |_| [-(3.0 * lam + 5.0 * mu), 0.0]),
            crack_edges: Vec::new(),
        };
        let sol = solve(&p2, &mat, &loads).unwrap();
        for (i, p) in p2.nodes.iter().enumerate() {
            let g = exact(*p);
            assert!(
                (sol.u[2 * i] - g[0]).abs() < 1e-8,
                "u_x at node {i}: {} vs {}",
                sol.u[2 * i],
                g[0]
            );
            assert!((sol.u[2 * i + 1] - g[1]).abs() < 1e-8);
        }
    }

    #[test]
    fn uniaxial_tension_with_tractions() {
        // sigma_yy = 1 via top/bottom tractions; symmetry-style pins
        let p2 = unit_p2(6);
        let mat = material();
        let loads = Loads {
            dirichlet: Box::new(|p: Point2| {
                let on_bottom = p.y.abs() < 1e-12;
                [
                    // pin u_x on the bottom-left corner only
                    if on_bottom && p.x.abs() < 1e-12 { Some(0.0) } else { None },
                    if on_bottom { Some(0.0) } else { None },
                ]
            }),
            traction: Box::new(|_p, n: Point2| {
                if n.y.abs() > 0.9 {
                    [0.0, n.y] // +-1 on top and bottom
                } else {
                    [0.0, 0.0]
                }
            }),
            body: Box::new(|_| [0.0, 0.0]),
            crack_edges: Vec::new(),
        };
        let sol = solve(&p2, &mat, &loads).unwrap();
        for p in [
            Point2::new(0.5, 0.5),
            Point2::new(0.21, 0.83),
            Point2::new(0.9, 0.33),
        ] {
            let s = sol.stress(&p2, &mat, p, None).unwrap();
            assert!(s[0].abs() < 1e-8, "sxx = {}", s[0]);
            assert!((s[1] - 1.0).abs() < 1e-8, "syy = {}", s[1]);
            assert!(s[2].abs() < 1e-8, "sxy = {}", s[2]);
        }
    }

    #[test]
    fn missing_constraints_error() {
        let p2 = unit_p2(3);
        let mat = material();
        let loads = Loads {
            dirichlet: Box::new(|_| [None, None]),
            traction: Box::new(|_, _| [0.0, 0.0]),
            body: Box::new(|_| [0.0, 1.0]),
            crack_edges: Vec::new(),
        };
        assert!(matches!(
            solve(&p2, &mat, &loads),
            Err(FemError::SingularSystem)
        ));
    }

    #[test]
    fn locate_rejects_outside_points() {
        let p2 = unit_p2(3);
        assert!(matches!(
            locate(&p2, Point2::new(2.0, 2.0), None),
            Err(FemError::PointOutsideMesh { .. })
        ));
    }
}
