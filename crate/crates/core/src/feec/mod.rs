//! Finite element de Rham complexes `U --grad--> V --curl--> W` on triangle
//! meshes.
//!
//! Two exactness orders are supported:
//!
//! * **order 1**: continuous P1 scalars (vertex values), lowest-order Whitney
//!   edge elements (one circulation DOF per edge, in global tail->head
//!   orientation), and piecewise constants (one integral DOF per cell);
//! * **order 2**: continuous P2 scalars (vertex + edge midpoint values),
//!   trimmed quadratic edge elements (two weighted tangential moments per
//!   edge plus two interior moments per cell), and discontinuous P1 cells
//!   (three scaled vertex moments per cell).
//!
//! Mass matrices and the coboundary (incidence) matrices `D0`, `D1` come from
//! the exact rational local assembly in [`exact`], rounded to `f64` once.
//! Shared degrees of freedom are cross-checked between the incident triangles
//! during assembly, and `D1 * D0 = 0` holds at machine level (exactly, on
//! meshes with exactly representable geometry).

pub mod exact;
pub mod quadrature;

use crate::coeffs::rational_to_f64;
use crate::linalg::{Chol, LinalgError};
use crate::mesh::Mesh2d;
use exact::{assemble_local, Rat, TriExact};
use faer::{Mat, MatRef};
use num_traits::Zero;
use quadrature::{gauss_legendre_01, TriangleRule};
use std::collections::BTreeMap;

/// Polynomial order of the complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeOrder {
    One,
    Two,
}

impl FeOrder {
    pub fn as_u8(self) -> u8 {
        match self {
            FeOrder::One => 1,
            FeOrder::Two => 2,
        }
    }

    pub fn try_from_u8(r: u8) -> Option<Self> {
        match r {
            1 => Some(FeOrder::One),
            2 => Some(FeOrder::Two),
            _ => None,
        }
    }
}

/// Per-triangle `f64` evaluation tables: each basis function's coefficients
/// over the monomials `[1, l1, l2, l1^2, l1*l2, l2^2]`.
struct TriLocal {
    u: Vec<[f64; 6]>,
    v: Vec<[[f64; 6]; 2]>,
    w: Vec<[f64; 6]>,
}

fn mono_vals(l1: f64, l2: f64) -> [f64; 6] {
    [1.0, l1, l2, l1 * l1, l1 * l2, l2 * l2]
}

fn table_eval(coeffs: &[f64; 6], mono: &[f64; 6]) -> f64 {
    coeffs.iter().zip(mono).map(|(c, m)| c * m).sum()
}

/// A fully assembled de Rham complex on a mesh.
pub struct DeRhamComplex {
    pub order: FeOrder,
    pub mesh: Mesh2d,
    pub m_u: Mat<f64>,
    pub m_v: Mat<f64>,
    pub m_w: Mat<f64>,
    /// Coboundary of 0-forms (`dim_v x dim_u`): DOFs of the gradient.
    pub d0: Mat<f64>,
    /// Coboundary of 1-forms (`dim_w x dim_v`): DOFs of the curl.
    pub d1: Mat<f64>,
    /// Boundary flags per 0-form DOF (vertices on the boundary; for order 2
    /// also midpoints of boundary edges).
    pub u_boundary: Vec<bool>,
    /// Boundary flags per 1-form DOF (moments of boundary edges; interior
    /// cell moments are never boundary DOFs).
    pub v_boundary: Vec<bool>,
    locals: Vec<TriLocal>,
}

impl DeRhamComplex {
    pub fn dim_u(&self) -> usize {
        self.m_u.nrows()
    }
    pub fn dim_v(&self) -> usize {
        self.m_v.nrows()
    }
    pub fn dim_w(&self) -> usize {
        self.m_w.nrows()
    }

    // ----- global DOF numbering ------------------------------------------

    fn u_dofs_of_tri(&self, t: usize) -> Vec<usize> {
        let tri = self.mesh.triangle(t);
        match self.order {
            FeOrder::One => tri.to_vec(),
            FeOrder::Two => {
                let nv = self.mesh.n_vertices();
                let mut dofs = tri.to_vec();
                for (e, _) in self.mesh.tri_edges(t) {
                    dofs.push(nv + e);
                }
                dofs
            }
        }
    }

    fn v_dofs_of_tri(&self, t: usize) -> Vec<usize> {
        match self.order {
            FeOrder::One => self.mesh.tri_edges(t).iter().map(|&(e, _)| e).collect(),
            FeOrder::Two => {
                let ne = self.mesh.n_edges();
                let mut dofs = Vec::with_capacity(8);
                for (e, _) in self.mesh.tri_edges(t) {
                    dofs.push(2 * e);
                    dofs.push(2 * e + 1);
                }
                dofs.push(2 * ne + 2 * t);
                dofs.push(2 * ne + 2 * t + 1);
                dofs
            }
        }
    }

    fn w_dofs_of_tri(&self, t: usize) -> Vec<usize> {
        match self.order {
            FeOrder::One => vec![t],
            FeOrder::Two => vec![3 * t, 3 * t + 1, 3 * t + 2],
        }
    }

    // ----- evaluation ------------------------------------------------------

    /// Evaluates a 0-form at barycentric coordinates inside triangle `t`.
    pub fn eval_0(&self, coeffs: &Mat<f64>, t: usize, bary: [f64; 3]) -> f64 {
        let mono = mono_vals(bary[1], bary[2]);
        self.u_dofs_of_tri(t)
            .iter()
            .zip(&self.locals[t].u)
            .map(|(&dof, table)| coeffs[(dof, 0)] * table_eval(table, &mono))
            .sum()
    }

    /// Evaluates a 1-form at barycentric coordinates inside triangle `t`.
    pub fn eval_1(&self, coeffs: &Mat<f64>, t: usize, bary: [f64; 3]) -> [f64; 2] {
        let mono = mono_vals(bary[1], bary[2]);
        let mut out = [0.0f64; 2];
        for (&dof, table) in self.v_dofs_of_tri(t).iter().zip(&self.locals[t].v) {
            let c = coeffs[(dof, 0)];
            out[0] += c * table_eval(&table[0], &mono);
            out[1] += c * table_eval(&table[1], &mono);
        }
        out
    }

    /// Evaluates a 2-form at barycentric coordinates inside triangle `t`.
    pub fn eval_2(&self, coeffs: &Mat<f64>, t: usize, bary: [f64; 3]) -> f64 {
        let mono = mono_vals(bary[1], bary[2]);
        self.w_dofs_of_tri(t)
            .iter()
            .zip(&self.locals[t].w)
            .map(|(&dof, table)| coeffs[(dof, 0)] * table_eval(table, &mono))
            .sum()
    }

    fn quad_point(&self, t: usize, bary: [f64; 3]) -> [f64; 2] {
        let tri = self.mesh.triangle(t);
        let mut x = [0.0f64; 2];
        for (k, &v) in tri.iter().enumerate() {
            let p = self.mesh.vertex(v);
            x[0] += bary[k] * p[0];
            x[1] += bary[k] * p[1];
        }
        x
    }

    // ----- right-hand sides and projections --------------------------------

    /// Load vector `(f, phi_i)_U` by quadrature.
    pub fn load_0(&self, f: &dyn Fn([f64; 2]) -> f64, rule: &TriangleRule) -> Mat<f64> {
        let mut out = Mat::zeros(self.dim_u(), 1);
        for t in 0..self.mesh.n_triangles() {
            let area = self.mesh.area(t);
            let dofs = self.u_dofs_of_tri(t);
            for &(bary, w) in &rule.points {
                let fx = f(self.quad_point(t, bary));
                let mono = mono_vals(bary[1], bary[2]);
                for (&dof, table) in dofs.iter().zip(&self.locals[t].u) {
                    out[(dof, 0)] += area * w * fx * table_eval(table, &mono);
                }
            }
        }
        out
    }

    /// Load vector `(f, phi_i)_V` by quadrature.
    pub fn load_1(&self, f: &dyn Fn([f64; 2]) -> [f64; 2], rule: &TriangleRule) -> Mat<f64> {
        let mut out = Mat::zeros(self.dim_v(), 1);
        for t in 0..self.mesh.n_triangles() {
            let area = self.mesh.area(t);
            let dofs = self.v_dofs_of_tri(t);
            for &(bary, w) in &rule.points {
                let fx = f(self.quad_point(t, bary));
                let mono = mono_vals(bary[1], bary[2]);
                for (&dof, table) in dofs.iter().zip(&self.locals[t].v) {
                    out[(dof, 0)] += area
                        * w
                        * (fx[0] * table_eval(&table[0], &mono)
                            + fx[1] * table_eval(&table[1], &mono));
                }
            }
        }
        out
    }

    /// Load vector `(f, phi_i)_W` by quadrature.
    pub fn load_2(&self, f: &dyn Fn([f64; 2]) -> f64, rule: &TriangleRule) -> Mat<f64> {
        let mut out = Mat::zeros(self.dim_w(), 1);
        for t in 0..self.mesh.n_triangles() {
            let area = self.mesh.area(t);
            let dofs = self.w_dofs_of_tri(t);
            for &(bary, w) in &rule.points {
                let fx = f(self.quad_point(t, bary));
                let mono = mono_vals(bary[1], bary[2]);
                for (&dof, table) in dofs.iter().zip(&self.locals[t].w) {
                    out[(dof, 0)] += area * w * fx * table_eval(table, &mono);
                }
            }
        }
        out
    }

    // ----- weighted L2 error norms -----------------------------------------

    /// `sqrt( weight * int |u_h - exact|^2 )` over the mesh.
    pub fn error_norm_0(
        &self,
        coeffs: &Mat<f64>,
        exact: &dyn Fn([f64; 2]) -> f64,
        weight: f64,
        rule: &TriangleRule,
    ) -> f64 {
        let mut acc = 0.0;
        for t in 0..self.mesh.n_triangles() {
            let area = self.mesh.area(t);
            for &(bary, w) in &rule.points {
                let diff = self.eval_0(coeffs, t, bary) - exact(self.quad_point(t, bary));
                acc += area * w * diff * diff;
            }
        }
        (weight * acc).sqrt()
    }

    pub fn error_norm_1(
        &self,
        coeffs: &Mat<f64>,
        exact: &dyn Fn([f64; 2]) -> [f64; 2],
        weight: f64,
        rule: &TriangleRule,
    ) -> f64 {
        let mut acc = 0.0;
        for t in 0..self.mesh.n_triangles() {
            let area = self.mesh.area(t);
            for &(bary, w) in &rule.points {
                let got = self.eval_1(coeffs, t, bary);
                let want = exact(self.quad_point(t, bary));
                acc += area * w * ((got[0] - want[0]).powi(2) + (got[1] - want[1]).powi(2));
            }
        }
        (weight * acc).sqrt()
    }

    pub fn error_norm_2(
        &self,
        coeffs: &Mat<f64>,
        exact: &dyn Fn([f64; 2]) -> f64,
        weight: f64,
        rule: &TriangleRule,
    ) -> f64 {
        let mut acc = 0.0;
        for t in 0..self.mesh.n_triangles() {
            let area = self.mesh.area(t);
            for &(bary, w) in &rule.points {
                let diff = self.eval_2(coeffs, t, bary) - exact(self.quad_point(t, bary));
                acc += area * w * diff * diff;
            }
        }
        (weight * acc).sqrt()
    }

    // ----- interpolation (DOF evaluation of analytic fields) ----------------

    /// Canonical interpolation onto the 0-form space: nodal values.
    pub fn u_interpolate(&self, f: &dyn Fn([f64; 2]) -> f64) -> Mat<f64> {
        let mut out = Mat::zeros(self.dim_u(), 1);
        for v in 0..self.mesh.n_vertices() {
            out[(v, 0)] = f(self.mesh.vertex(v));
        }
        if self.order == FeOrder::Two {
            let nv = self.mesh.n_vertices();
            for e in 0..self.mesh.n_edges() {
                let [a, b] = self.mesh.edge(e);
                let (pa, pb) = (self.mesh.vertex(a), self.mesh.vertex(b));
                out[(nv + e, 0)] = f([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
            }
        }
        out
    }

    /// Canonical interpolation onto the 1-form space: weighted tangential
    /// edge moments (5-point Gauss) plus, for order 2, interior moments.
    pub fn v_interpolate(&self, f: &dyn Fn([f64; 2]) -> [f64; 2]) -> Mat<f64> {
        let mut out = Mat::zeros(self.dim_v(), 1);
        let gl = gauss_legendre_01(5);
        for e in 0..self.mesh.n_edges() {
            let [a, b] = self.mesh.edge(e);
            let (pa, pb) = (self.mesh.vertex(a), self.mesh.vertex(b));
            let d = [pb[0] - pa[0], pb[1] - pa[1]];
            let mut m0 = 0.0;
            let mut m1 = 0.0;
            for &(s, w) in &gl {
                let x = [pa[0] + s * d[0], pa[1] + s * d[1]];
                let fx = f(x);
                let tangential = fx[0] * d[0] + fx[1] * d[1];
                m0 += w * tangential;
                m1 += w * tangential * (6.0 * s - 3.0);
            }
            match self.order {
                FeOrder::One => out[(e, 0)] = m0,
                FeOrder::Two => {
                    out[(2 * e, 0)] = m0;
                    out[(2 * e + 1, 0)] = m1;
                }
            }
        }
        if self.order == FeOrder::Two {
            let ne = self.mesh.n_edges();
            let rule = quadrature::triangle_rule(6);
            for t in 0..self.mesh.n_triangles() {
                let mut mx = 0.0;
                let mut my = 0.0;
                for &(bary, w) in &rule.points {
                    let fx = f(self.quad_point(t, bary));
                    mx += w * fx[0];
                    my += w * fx[1];
                }
                // (3/area) * int_T f = 3 * (mean over the rule).
                out[(2 * ne + 2 * t, 0)] = 3.0 * mx;
                out[(2 * ne + 2 * t + 1, 0)] = 3.0 * my;
            }
        }
        out
    }

    /// Boundary DOF values of a scalar trace: `(dof, value)` pairs.
    pub fn u_boundary_values(&self, f: &dyn Fn([f64; 2]) -> f64) -> Vec<(usize, f64)> {
        let vals = self.u_interpolate(f);
        self.u_boundary
            .iter()
            .enumerate()
            .filter(|&(_, &b)| b)
            .map(|(i, _)| (i, vals[(i, 0)]))
            .collect()
    }

    /// Boundary DOF values of a tangential-trace field: `(dof, value)` pairs.
    pub fn v_boundary_values(&self, f: &dyn Fn([f64; 2]) -> [f64; 2]) -> Vec<(usize, f64)> {
        let vals = self.v_interpolate(f);
        self.v_boundary
            .iter()
            .enumerate()
            .filter(|&(_, &b)| b)
            .map(|(i, _)| (i, vals[(i, 0)]))
            .collect()
    }

    /// Cholesky factorizations of the three mass matrices.
    pub fn factor_masses(&self) -> Result<MassFactors, LinalgError> {
        Ok(MassFactors {
            u: Chol::new(self.m_u.as_ref())?,
            v: Chol::new(self.m_v.as_ref())?,
            w: Chol::new(self.m_w.as_ref())?,
        })
    }
}

/// Cholesky factors of the mass matrices, shared by projections and the
/// composite operators.
pub struct MassFactors {
    pub u: Chol,
    pub v: Chol,
    pub w: Chol,
}

/// Builds the complex for a mesh.  Panics only on internal invariant
/// violations (inconsistent shared DOFs), which indicate a bug, not bad input.
pub fn build_complex(mesh: Mesh2d, order: FeOrder) -> DeRhamComplex {
    let (nv, ne, nt) = (mesh.n_vertices(), mesh.n_edges(), mesh.n_triangles());
    let (dim_u, dim_v, dim_w) = match order {
        FeOrder::One => (nv, ne, nt),
        FeOrder::Two => (nv + ne, 2 * ne + 2 * nt, 3 * nt),
    };

    let mut m_u: BTreeMap<(usize, usize), Rat> = BTreeMap::new();
    let mut m_v: BTreeMap<(usize, usize), Rat> = BTreeMap::new();
    let mut m_w: BTreeMap<(usize, usize), Rat> = BTreeMap::new();
    let mut d0: BTreeMap<(usize, usize), Rat> = BTreeMap::new();
    let mut d1: BTreeMap<(usize, usize), Rat> = BTreeMap::new();
    let mut locals = Vec::with_capacity(nt);

    // Temporary complex-shaped helper for DOF numbering during assembly.
    let numbering = |t: usize| -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        let tri = mesh.triangle(t);
        let tri_edges = mesh.tri_edges(t);
        let u = match order {
            FeOrder::One => tri.to_vec(),
            FeOrder::Two => {
                let mut dofs = tri.to_vec();
                dofs.extend(tri_edges.iter().map(|&(e, _)| nv + e));
                dofs
            }
        };
        let v = match order {
            FeOrder::One => tri_edges.iter().map(|&(e, _)| e).collect(),
            FeOrder::Two => {
                let mut dofs = Vec::with_capacity(8);
                for &(e, _) in &tri_edges {
                    dofs.push(2 * e);
                    dofs.push(2 * e + 1);
                }
                dofs.push(2 * ne + 2 * t);
                dofs.push(2 * ne + 2 * t + 1);
                dofs
            }
        };
        let w = match order {
            FeOrder::One => vec![t],
            FeOrder::Two => vec![3 * t, 3 * t + 1, 3 * t + 2],
        };
        (u, v, w)
    };

    for t in 0..nt {
        let tri = mesh.triangle(t);
        let coords: [[f64; 2]; 3] = std::array::from_fn(|k| mesh.vertex(tri[k]));
        // Local indices of each local edge's global tail and head.
        let edge_locals: [(usize, usize); 3] = std::array::from_fn(|k| {
            let (e, _) = mesh.tri_edges(t)[k];
            let [gt, gh] = mesh.edge(e);
            let lt = tri.iter().position(|&v| v == gt).expect("edge tail in tri");
            let lh = tri.iter().position(|&v| v == gh).expect("edge head in tri");
            (lt, lh)
        });
        let local: TriExact = assemble_local(coords, edge_locals, order.as_u8());
        let (u_dofs, v_dofs, w_dofs) = numbering(t);

        scatter_add(&mut m_u, &u_dofs, &u_dofs, &local.m_u);
        scatter_add(&mut m_v, &v_dofs, &v_dofs, &local.m_v);
        scatter_add(&mut m_w, &w_dofs, &w_dofs, &local.m_w);
        scatter_write(&mut d0, &v_dofs, &u_dofs, &local.d0, t);
        scatter_write(&mut d1, &w_dofs, &v_dofs, &local.d1, t);

        locals.push(TriLocal {
            u: local.u_basis.iter().map(|p| p.to_f64()).collect(),
            v: local
                .v_basis
                .iter()
                .map(|p| [p.x.to_f64(), p.y.to_f64()])
                .collect(),
            w: local.w_basis.iter().map(|p| p.to_f64()).collect(),
        });
    }

    let to_mat = |map: &BTreeMap<(usize, usize), Rat>, nr: usize, nc: usize| -> Mat<f64> {
        let mut m = Mat::zeros(nr, nc);
        for (&(i, j), v) in map {
            m[(i, j)] = rational_to_f64(v);
        }
        m
    };

    let u_boundary = match order {
        FeOrder::One => (0..nv).map(|v| mesh.is_boundary_vertex(v)).collect(),
        FeOrder::Two => (0..nv)
            .map(|v| mesh.is_boundary_vertex(v))
            .chain((0..ne).map(|e| mesh.is_boundary_edge(e)))
            .collect(),
    };
    let v_boundary = match order {
        FeOrder::One => (0..ne).map(|e| mesh.is_boundary_edge(e)).collect(),
        FeOrder::Two => (0..ne)
            .flat_map(|e| [mesh.is_boundary_edge(e); 2])
            .chain((0..2 * nt).map(|_| false))
            .collect(),
    };

    DeRhamComplex {
        order,
        m_u: to_mat(&m_u, dim_u, dim_u),
        m_v: to_mat(&m_v, dim_v, dim_v),
        m_w: to_mat(&m_w, dim_w, dim_w),
        d0: to_mat(&d0, dim_v, dim_u),
        d1: to_mat(&d1, dim_w, dim_v),
        u_boundary,
        v_boundary,
        locals,
        mesh,
    }
}

fn scatter_add(
    map: &mut BTreeMap<(usize, usize), Rat>,
    rows: &[usize],
    cols: &[usize],
    local: &[Vec<Rat>],
) {
    for (li, &gi) in rows.iter().enumerate() {
        for (lj, &gj) in cols.iter().enumerate() {
            if local[li][lj].is_zero() {
                continue;
            }
            map.entry((gi, gj))
                .and_modify(|v| *v += &local[li][lj])
                .or_insert_with(|| local[li][lj].clone());
        }
    }
}

/// Writes coboundary entries, asserting that a DOF shared between triangles
/// receives the same exact value from both.
fn scatter_write(
    map: &mut BTreeMap<(usize, usize), Rat>,
    rows: &[usize],
    cols: &[usize],
    local: &[Vec<Rat>],
    tri: usize,
) {
    for (li, &gi) in rows.iter().enumerate() {
        for (lj, &gj) in cols.iter().enumerate() {
            let val = &local[li][lj];
            match map.get(&(gi, gj)) {
                Some(prev) => assert_eq!(
                    prev, val,
                    "inconsistent coboundary entry ({gi}, {gj}) from triangle {tri}"
                ),
                // Structural zeros are stored too, so that a conflicting
                // nonzero from another triangle cannot slip past the check.
                None => {
                    map.insert((gi, gj), val.clone());
                }
            }
        }
    }
}

/// Index maps from a boundary-restricted complex into the full one.
pub struct Restriction {
    /// Interior 0-form DOF ids, ascending.
    pub u_keep: Vec<usize>,
    /// Interior 1-form DOF ids, ascending.
    pub v_keep: Vec<usize>,
}

impl Restriction {
    pub fn new(cx: &DeRhamComplex) -> Self {
        let keep = |flags: &[bool]| {
            flags
                .iter()
                .enumerate()
                .filter(|&(_, &b)| !b)
                .map(|(i, _)| i)
                .collect::<Vec<_>>()
        };
        Restriction {
            u_keep: keep(&cx.u_boundary),
            v_keep: keep(&cx.v_boundary),
        }
    }
}

/// Extracts the submatrix `m[rows, cols]`.
pub fn select(m: MatRef<'_, f64>, rows: &[usize], cols: &[usize]) -> Mat<f64> {
    Mat::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Gathers a subvector.
pub fn gather(v: &Mat<f64>, keep: &[usize]) -> Mat<f64> {
    Mat::from_fn(keep.len(), 1, |i, _| v[(keep[i], 0)])
}

/// Scatters a subvector back into a zero-padded full vector.
pub fn expand(v: &Mat<f64>, keep: &[usize], full_dim: usize) -> Mat<f64> {
    let mut out = Mat::zeros(full_dim, 1);
    for (i, &dof) in keep.iter().enumerate() {
        out[(dof, 0)] = v[(i, 0)];
    }
    out
}
