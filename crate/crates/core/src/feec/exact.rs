//! Exact rational local assembly on a single triangle.
//!
//! All local finite element objects — basis polynomials, mass blocks, and
//! coboundary (incidence) blocks — are computed in exact arithmetic over
//! `Ratio<BigInt>`, with the vertex coordinates converted bit-exactly from
//! `f64`.  The results are rounded to `f64` once, at scatter time.  Two
//! consequences the rest of the crate relies on:
//!
//! * shared-edge degrees of freedom get *identical* values from both incident
//!   triangles (asserted during global assembly), and
//! * on meshes whose coordinates and areas are exactly representable the
//!   rounded coboundaries satisfy `D1 * D0 = 0` to the last bit.
//!
//! Polynomials live in barycentric coordinates with `l0` eliminated: a scalar
//! is stored by its coefficients over the monomials
//! `[1, l1, l2, l1^2, l1*l2, l2^2]` (total degree <= 2, enough for every
//! space this crate uses).  Integrals reduce to the classic closed form
//! `int_T l0^a l1^b l2^c dT = 2*area * a! b! c! / (a+b+c+2)!`.

use crate::coeffs::rational_to_f64;
use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Zero};

/// Exact rational scalar.
pub type Rat = Ratio<BigInt>;

pub fn rat_int(n: i64) -> Rat {
    Ratio::from(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rat {
    Ratio::new(BigInt::from(n), BigInt::from(d))
}

/// Bit-exact conversion; panics on non-finite input.
pub fn rat_from_f64(x: f64) -> Rat {
    Ratio::from_float(x).expect("mesh coordinates must be finite")
}

/// Monomial exponents `(a, b)` for `l1^a l2^b` in storage order.
const MONO: [(u32, u32); 6] = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];

fn mono_index(a: u32, b: u32) -> usize {
    match (a, b) {
        (0, 0) => 0,
        (1, 0) => 1,
        (0, 1) => 2,
        (2, 0) => 3,
        (1, 1) => 4,
        (0, 2) => 5,
        _ => panic!("monomial l1^{a} l2^{b} exceeds degree 2"),
    }
}

fn rat_array<const N: usize>() -> [Rat; N] {
    std::array::from_fn(|_| Rat::zero())
}

fn factorial(n: u32) -> BigInt {
    (2..=u64::from(n)).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `int_T l1^a l2^b dT` for a triangle of (positive) area `area`.
fn int_mono(a: u32, b: u32, area: &Rat) -> Rat {
    let num = factorial(a) * factorial(b);
    let den = factorial(a + b + 2);
    area * rat_int(2) * Ratio::new(num, den)
}

/// Scalar polynomial of total degree <= 2 in `(l1, l2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SPoly(pub [Rat; 6]);

impl SPoly {
    pub fn zero() -> Self {
        SPoly(rat_array())
    }

    pub fn constant(c: Rat) -> Self {
        let mut p = Self::zero();
        p.0[0] = c;
        p
    }

    /// The barycentric coordinate `l_k` as a polynomial (with `l0`
    /// eliminated: `l0 = 1 - l1 - l2`).
    pub fn lambda(k: usize) -> Self {
        let mut p = Self::zero();
        match k {
            0 => {
                p.0[0] = Rat::one();
                p.0[1] = -Rat::one();
                p.0[2] = -Rat::one();
            }
            1 => p.0[1] = Rat::one(),
            2 => p.0[2] = Rat::one(),
            _ => panic!("barycentric index out of range"),
        }
        p
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (o, s) in out.0.iter_mut().zip(&other.0) {
            *o += s;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (o, s) in out.0.iter_mut().zip(&other.0) {
            *o -= s;
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Self {
        let mut out = self.clone();
        for o in out.0.iter_mut() {
            *o *= c;
        }
        out
    }

    pub fn axpy(&mut self, c: &Rat, other: &Self) {
        for (o, s) in self.0.iter_mut().zip(&other.0) {
            *o += c * s;
        }
    }

    /// Product, panicking if the true result exceeds degree 2 (callers only
    /// multiply linear factors, or a quadratic by a constant).
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (i, ci) in self.0.iter().enumerate() {
            if ci.is_zero() {
                continue;
            }
            for (j, cj) in other.0.iter().enumerate() {
                if cj.is_zero() {
                    continue;
                }
                let (a, b) = (MONO[i].0 + MONO[j].0, MONO[i].1 + MONO[j].1);
                assert!(a + b <= 2, "polynomial product exceeds degree 2");
                out.0[mono_index(a, b)] += ci * cj;
            }
        }
        out
    }

    /// Partial derivative with respect to `l1`.
    pub fn d_l1(&self) -> Self {
        let mut out = Self::zero();
        for (i, c) in self.0.iter().enumerate() {
            let (a, b) = MONO[i];
            if a > 0 && !c.is_zero() {
                out.0[mono_index(a - 1, b)] += c * rat_int(i64::from(a));
            }
        }
        out
    }

    /// Partial derivative with respect to `l2`.
    pub fn d_l2(&self) -> Self {
        let mut out = Self::zero();
        for (i, c) in self.0.iter().enumerate() {
            let (a, b) = MONO[i];
            if b > 0 && !c.is_zero() {
                out.0[mono_index(a, b - 1)] += c * rat_int(i64::from(b));
            }
        }
        out
    }

    /// Exact evaluation at barycentric `(l1, l2)`.
    pub fn eval(&self, l1: &Rat, l2: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for (i, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (a, b) = MONO[i];
            let mut term = c.clone();
            for _ in 0..a {
                term *= l1;
            }
            for _ in 0..b {
                term *= l2;
            }
            acc += term;
        }
        acc
    }

    pub fn to_f64(&self) -> [f64; 6] {
        std::array::from_fn(|i| rational_to_f64(&self.0[i]))
    }
}

/// `int_T p dT`.
pub fn integrate(p: &SPoly, area: &Rat) -> Rat {
    let mut acc = Rat::zero();
    for (i, c) in p.0.iter().enumerate() {
        if !c.is_zero() {
            acc += c * int_mono(MONO[i].0, MONO[i].1, area);
        }
    }
    acc
}

/// `int_T p*q dT`, exact up to degree 2 + 2.
pub fn integrate_product(p: &SPoly, q: &SPoly, area: &Rat) -> Rat {
    let mut acc = Rat::zero();
    for (i, ci) in p.0.iter().enumerate() {
        if ci.is_zero() {
            continue;
        }
        for (j, cj) in q.0.iter().enumerate() {
            if cj.is_zero() {
                continue;
            }
            acc += ci * cj * int_mono(MONO[i].0 + MONO[j].0, MONO[i].1 + MONO[j].1, area);
        }
    }
    acc
}

/// Vector-valued polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct VPoly {
    pub x: SPoly,
    pub y: SPoly,
}

impl VPoly {
    pub fn zero() -> Self {
        VPoly {
            x: SPoly::zero(),
            y: SPoly::zero(),
        }
    }

    pub fn axpy(&mut self, c: &Rat, other: &Self) {
        self.x.axpy(c, &other.x);
        self.y.axpy(c, &other.y);
    }

    pub fn scale(&self, c: &Rat) -> Self {
        VPoly {
            x: self.x.scale(c),
            y: self.y.scale(c),
        }
    }

    /// Componentwise product with a scalar polynomial.
    pub fn mul_scalar(&self, s: &SPoly) -> Self {
        VPoly {
            x: self.x.mul(s),
            y: self.y.mul(s),
        }
    }
}

/// `int_T v . w dT`.
pub fn dot_integral(v: &VPoly, w: &VPoly, area: &Rat) -> Rat {
    integrate_product(&v.x, &w.x, area) + integrate_product(&v.y, &w.y, area)
}

/// Physical gradient of a scalar polynomial, given the (constant) gradients
/// of the barycentric coordinates.
pub fn gradient(p: &SPoly, grads: &[[Rat; 2]; 3]) -> VPoly {
    let d1 = p.d_l1();
    let d2 = p.d_l2();
    let mut x = SPoly::zero();
    x.axpy(&grads[1][0], &d1);
    x.axpy(&grads[2][0], &d2);
    let mut y = SPoly::zero();
    y.axpy(&grads[1][1], &d1);
    y.axpy(&grads[2][1], &d2);
    VPoly { x, y }
}

/// Scalar curl `dx v_y - dy v_x`.
pub fn curl(v: &VPoly, grads: &[[Rat; 2]; 3]) -> SPoly {
    let mut out = SPoly::zero();
    out.axpy(&grads[1][0], &v.y.d_l1());
    out.axpy(&grads[2][0], &v.y.d_l2());
    let g1y = -grads[1][1].clone();
    let g2y = -grads[2][1].clone();
    out.axpy(&g1y, &v.x.d_l1());
    out.axpy(&g2y, &v.x.d_l2());
    out
}

/// Univariate polynomial on an edge parameter `s in [0, 1]`, degree <= 3.
#[derive(Clone, Debug)]
pub struct EdgePoly(pub [Rat; 4]);

impl EdgePoly {
    pub fn zero() -> Self {
        EdgePoly(rat_array())
    }

    pub fn linear(c0: Rat, c1: Rat) -> Self {
        let mut p = Self::zero();
        p.0[0] = c0;
        p.0[1] = c1;
        p
    }

    pub fn axpy(&mut self, c: &Rat, other: &Self) {
        for (o, s) in self.0.iter_mut().zip(&other.0) {
            *o += c * s;
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (i, ci) in self.0.iter().enumerate() {
            if ci.is_zero() {
                continue;
            }
            for (j, cj) in other.0.iter().enumerate() {
                if cj.is_zero() {
                    continue;
                }
                assert!(i + j <= 3, "edge polynomial product exceeds degree 3");
                out.0[i + j] += ci * cj;
            }
        }
        out
    }

    /// `int_0^1 p(s) ds`.
    pub fn integral01(&self) -> Rat {
        let mut acc = Rat::zero();
        for (k, c) in self.0.iter().enumerate() {
            if !c.is_zero() {
                acc += c * rat(1, k as i64 + 1);
            }
        }
        acc
    }
}

/// Restricts a scalar polynomial to the edge running from local vertex `lt`
/// to local vertex `lh`, parametrized by `s in [0, 1]` (`s = 0` at `lt`).
pub fn trace_on_edge(p: &SPoly, lt: usize, lh: usize) -> EdgePoly {
    let sub = |k: usize| -> EdgePoly {
        if k == lt {
            EdgePoly::linear(Rat::one(), -Rat::one())
        } else if k == lh {
            EdgePoly::linear(Rat::zero(), Rat::one())
        } else {
            EdgePoly::zero()
        }
    };
    let s1 = sub(1);
    let s2 = sub(2);
    let mut out = EdgePoly::zero();
    for (i, c) in p.0.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let (a, b) = MONO[i];
        let mut term = EdgePoly::linear(Rat::one(), Rat::zero());
        for _ in 0..a {
            term = term.mul(&s1);
        }
        for _ in 0..b {
            term = term.mul(&s2);
        }
        out.axpy(c, &term);
    }
    out
}

/// Exact inverse of a small square rational matrix (Gauss-Jordan).  Returns
/// `None` when singular.
pub fn invert_exact(b: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = b.len();
    let mut a: Vec<Vec<Rat>> = b.to_vec();
    let mut inv: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rat::one() } else { Rat::zero() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for x in a[col].iter_mut() {
            *x /= &p;
        }
        for x in inv[col].iter_mut() {
            *x /= &p;
        }
        for row in 0..n {
            if row == col || a[row][col].is_zero() {
                continue;
            }
            let f = a[row][col].clone();
            for j in 0..n {
                let t = &a[col][j] * &f;
                a[row][j] -= t;
                let t = &inv[col][j] * &f;
                inv[row][j] -= t;
            }
        }
    }
    Some(inv)
}

/// Geometry of one triangle in exact arithmetic.
pub struct TriGeom {
    pub coords: [[Rat; 2]; 3],
    pub area: Rat,
    /// Gradients of `l0, l1, l2`.
    pub grads: [[Rat; 2]; 3],
    /// For each local edge `(0,1), (1,2), (2,0)`: the local vertex indices of
    /// the *global* tail and head of that edge.
    pub edge_locals: [(usize, usize); 3],
}

impl TriGeom {
    pub fn new(coords_f64: [[f64; 2]; 3], edge_locals: [(usize, usize); 3]) -> Self {
        let coords: [[Rat; 2]; 3] =
            std::array::from_fn(|i| std::array::from_fn(|j| rat_from_f64(coords_f64[i][j])));
        let ux = &coords[1][0] - &coords[0][0];
        let uy = &coords[1][1] - &coords[0][1];
        let vx = &coords[2][0] - &coords[0][0];
        let vy = &coords[2][1] - &coords[0][1];
        let twice_area = &ux * &vy - &uy * &vx;
        assert!(
            twice_area > Rat::zero(),
            "triangle must be counterclockwise"
        );
        // grad l_i = rot(p_{i+1} - p_{i+2}) / (2 area), rot(x, y) = (y, -x).
        let grads = std::array::from_fn(|i| {
            let a = &coords[(i + 1) % 3];
            let b = &coords[(i + 2) % 3];
            [
                (&a[1] - &b[1]) / &twice_area,
                (&b[0] - &a[0]) / &twice_area,
            ]
        });
        TriGeom {
            coords,
            area: twice_area / rat_int(2),
            grads,
            edge_locals,
        }
    }

    /// Edge vector (head minus tail, in global orientation) of local edge `k`.
    fn edge_vector(&self, k: usize) -> [Rat; 2] {
        let (lt, lh) = self.edge_locals[k];
        [
            &self.coords[lh][0] - &self.coords[lt][0],
            &self.coords[lh][1] - &self.coords[lt][1],
        ]
    }

    /// Edge moment `int_0^1 (v . d) q_w(s) ds` along local edge `k`, where
    /// `d` is the global-orientation edge vector, `q_0 = 1`, `q_1 = 6s - 3`.
    pub fn edge_moment(&self, k: usize, weight: usize, v: &VPoly) -> Rat {
        let (lt, lh) = self.edge_locals[k];
        let d = self.edge_vector(k);
        let tx = trace_on_edge(&v.x, lt, lh);
        let ty = trace_on_edge(&v.y, lt, lh);
        let mut integrand = EdgePoly::zero();
        integrand.axpy(&d[0], &tx);
        integrand.axpy(&d[1], &ty);
        let weighted = match weight {
            0 => integrand,
            1 => integrand.mul(&EdgePoly::linear(rat_int(-3), rat_int(6))),
            _ => panic!("edge moment weight out of range"),
        };
        weighted.integral01()
    }

    /// Interior moment `(3/area) * int_T v_comp dT`.
    pub fn interior_moment(&self, comp: usize, v: &VPoly) -> Rat {
        let c = if comp == 0 { &v.x } else { &v.y };
        integrate(c, &self.area) * rat_int(3) / &self.area
    }
}

/// One fully assembled local triangle: exact basis polynomials, mass blocks,
/// and coboundary blocks, in the local degree-of-freedom orders documented on
/// [`assemble_local`].
pub struct TriExact {
    pub geom: TriGeom,
    pub u_basis: Vec<SPoly>,
    pub v_basis: Vec<VPoly>,
    pub w_basis: Vec<SPoly>,
    pub m_u: Vec<Vec<Rat>>,
    pub m_v: Vec<Vec<Rat>>,
    pub m_w: Vec<Vec<Rat>>,
    /// Rows: local 1-form DOFs; columns: local 0-form DOFs.
    pub d0: Vec<Vec<Rat>>,
    /// Rows: local 2-form DOFs; columns: local 1-form DOFs.
    pub d1: Vec<Vec<Rat>>,
}

/// Assembles every local object for one triangle.
///
/// Local DOF orders:
/// * order 1: `U = [vertex 0, 1, 2]`, `V = [edge (0,1), (1,2), (2,0)]`
///   (full-circulation DOFs in global edge orientation), `W = [cell]`.
/// * order 2: `U = [vertex 0, 1, 2, midpoint e0, e1, e2]`,
///   `V = [e0 w0, e0 w1, e1 w0, e1 w1, e2 w0, e2 w1, cell x, cell y]`,
///   `W = [vertex moment 0, 1, 2]`.
pub fn assemble_local(
    coords: [[f64; 2]; 3],
    edge_locals: [(usize, usize); 3],
    order: u8,
) -> TriExact {
    let geom = TriGeom::new(coords, edge_locals);
    match order {
        1 => assemble_order1(geom),
        2 => assemble_order2(geom),
        _ => panic!("unsupported element order {order}"),
    }
}

fn whitney_local(geom: &TriGeom, a: usize, b: usize) -> VPoly {
    let la = SPoly::lambda(a);
    let lb = SPoly::lambda(b);
    let ga = &geom.grads[a];
    let gb = &geom.grads[b];
    VPoly {
        x: la.scale(&gb[0]).sub(&lb.scale(&ga[0])),
        y: la.scale(&gb[1]).sub(&lb.scale(&ga[1])),
    }
}

fn dual_basis_from_span(
    span: &[VPoly],
    functionals: &[Box<dyn Fn(&VPoly) -> Rat + '_>],
) -> Vec<VPoly> {
    let n = span.len();
    assert_eq!(functionals.len(), n);
    let b: Vec<Vec<Rat>> = functionals
        .iter()
        .map(|f| span.iter().map(|s| f(s)).collect())
        .collect();
    let c = invert_exact(&b).expect("1-form DOF matrix must be unisolvent");
    (0..n)
        .map(|j| {
            let mut out = VPoly::zero();
            for (k, s) in span.iter().enumerate() {
                out.axpy(&c[k][j], s);
            }
            out
        })
        .collect()
}

fn assemble_order1(geom: TriGeom) -> TriExact {
    let u_basis: Vec<SPoly> = (0..3).map(SPoly::lambda).collect();
    let span: Vec<VPoly> = (0..3)
        .map(|k| {
            let (lt, lh) = geom.edge_locals[k];
            whitney_local(&geom, lt, lh)
        })
        .collect();
    let v_basis = {
        let functionals = v_functionals_order1(&geom);
        dual_basis_from_span(&span, &functionals)
    };
    let w_basis = vec![SPoly::constant(Rat::one() / &geom.area)];
    finish(geom, u_basis, v_basis, w_basis, functionals_order1)
}

fn v_functionals_order1<'a>(geom: &'a TriGeom) -> Vec<Box<dyn Fn(&VPoly) -> Rat + 'a>> {
    (0..3)
        .map(|k| {
            Box::new(move |v: &VPoly| geom.edge_moment(k, 0, v))
                as Box<dyn Fn(&VPoly) -> Rat + 'a>
        })
        .collect()
}

fn assemble_order2(geom: TriGeom) -> TriExact {
    // Lagrange P2: vertex and edge-midpoint nodal basis.
    let mut u_basis: Vec<SPoly> = Vec::with_capacity(6);
    for i in 0..3 {
        let li = SPoly::lambda(i);
        // l_i (2 l_i - 1)
        let two_li_m1 = li.scale(&rat_int(2)).sub(&SPoly::constant(Rat::one()));
        u_basis.push(li.mul(&two_li_m1));
    }
    for k in 0..3 {
        let (a, b) = (k, (k + 1) % 3);
        u_basis.push(
            SPoly::lambda(a)
                .mul(&SPoly::lambda(b))
                .scale(&rat_int(4)),
        );
    }

    // Spanning set for the trimmed quadratic 1-form space: the full linear
    // fields plus two independent quadratic Whitney multiples (the third,
    // l1*w20, is minus the sum of these two).
    let mut span: Vec<VPoly> = Vec::with_capacity(8);
    for (a, b) in [(0usize, 1usize), (0, 2), (1, 2)] {
        span.push(whitney_local(&geom, a, b));
    }
    for (a, b) in [(0usize, 1usize), (0, 2), (1, 2)] {
        span.push(gradient(
            &SPoly::lambda(a).mul(&SPoly::lambda(b)),
            &geom.grads,
        ));
    }
    span.push(whitney_local(&geom, 0, 1).mul_scalar(&SPoly::lambda(2)));
    span.push(whitney_local(&geom, 1, 2).mul_scalar(&SPoly::lambda(0)));

    let v_basis = {
        let functionals = v_functionals_order2(&geom);
        dual_basis_from_span(&span, &functionals)
    };

    // Discontinuous P1 2-forms with moment DOFs (6/area) int w l_a.
    let w_span: Vec<SPoly> = (0..3).map(SPoly::lambda).collect();
    let wb: Vec<Vec<Rat>> = (0..3)
        .map(|a| {
            let la = SPoly::lambda(a);
            w_span
                .iter()
                .map(|s| integrate_product(s, &la, &geom.area) * rat_int(6) / &geom.area)
                .collect()
        })
        .collect();
    let wc = invert_exact(&wb).expect("2-form DOF matrix must be unisolvent");
    let w_basis: Vec<SPoly> = (0..3)
        .map(|j| {
            let mut out = SPoly::zero();
            for (k, s) in w_span.iter().enumerate() {
                out.axpy(&wc[k][j], s);
            }
            out
        })
        .collect();

    finish(geom, u_basis, v_basis, w_basis, functionals_order2)
}

/// 1-form DOF functionals, order 1 (used again when applying DOFs to
/// gradients for the coboundary).
fn functionals_order1(geom: &TriGeom, v: &VPoly) -> Vec<Rat> {
    (0..3).map(|k| geom.edge_moment(k, 0, v)).collect()
}

fn functionals_order2(geom: &TriGeom, v: &VPoly) -> Vec<Rat> {
    let mut out = Vec::with_capacity(8);
    for k in 0..3 {
        out.push(geom.edge_moment(k, 0, v));
        out.push(geom.edge_moment(k, 1, v));
    }
    out.push(geom.interior_moment(0, v));
    out.push(geom.interior_moment(1, v));
    out
}

fn v_functionals_order2<'a>(geom: &'a TriGeom) -> Vec<Box<dyn Fn(&VPoly) -> Rat + 'a>> {
    let mut fns: Vec<Box<dyn Fn(&VPoly) -> Rat + 'a>> = Vec::with_capacity(8);
    for k in 0..3 {
        for w in 0..2 {
            fns.push(Box::new(move |v: &VPoly| geom.edge_moment(k, w, v)));
        }
    }
    for comp in 0..2 {
        fns.push(Box::new(move |v: &VPoly| geom.interior_moment(comp, v)));
    }
    fns
}

/// 2-form DOF functionals applied to a scalar (curl image).
fn w_functionals(geom: &TriGeom, n_w: usize, s: &SPoly) -> Vec<Rat> {
    if n_w == 1 {
        vec![integrate(s, &geom.area)]
    } else {
        (0..3)
            .map(|a| {
                integrate_product(s, &SPoly::lambda(a), &geom.area) * rat_int(6) / &geom.area
            })
            .collect()
    }
}

fn finish(
    geom: TriGeom,
    u_basis: Vec<SPoly>,
    v_basis: Vec<VPoly>,
    w_basis: Vec<SPoly>,
    v_funcs: fn(&TriGeom, &VPoly) -> Vec<Rat>,
) -> TriExact {
    let (nu, nv, nw) = (u_basis.len(), v_basis.len(), w_basis.len());
    let sym_fill = |n: usize, f: &dyn Fn(usize, usize) -> Rat| -> Vec<Vec<Rat>> {
        let mut m = vec![vec![Rat::zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m[i][j] = v.clone();
                m[j][i] = v;
            }
        }
        m
    };
    let m_u = sym_fill(nu, &|i, j| integrate_product(&u_basis[i], &u_basis[j], &geom.area));
    let m_v = sym_fill(nv, &|i, j| dot_integral(&v_basis[i], &v_basis[j], &geom.area));
    let m_w = sym_fill(nw, &|i, j| integrate_product(&w_basis[i], &w_basis[j], &geom.area));

    let mut d0 = vec![vec![Rat::zero(); nu]; nv];
    for (j, u) in u_basis.iter().enumerate() {
        let g = gradient(u, &geom.grads);
        for (i, val) in v_funcs(&geom, &g).into_iter().enumerate() {
            d0[i][j] = val;
        }
    }
    let mut d1 = vec![vec![Rat::zero(); nv]; nw];
    for (j, v) in v_basis.iter().enumerate() {
        let c = curl(v, &geom.grads);
        for (i, val) in w_functionals(&geom, nw, &c).into_iter().enumerate() {
            d1[i][j] = val;
        }
    }

    TriExact {
        geom,
        u_basis,
        v_basis,
        w_basis,
        m_u,
        m_v,
        m_w,
        d0,
        d1,
    }
}
