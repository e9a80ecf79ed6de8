//! Conforming triangle meshes of planar domains.
//!
//! A [`Mesh2d`] stores vertices, positively oriented (counterclockwise)
//! triangles, and a derived global edge table.  Edges are canonical: each is
//! stored as `(tail, head)` with `tail < head` (vertex ids), and edge ids are
//! assigned in lexicographic order of those pairs, so identical inputs always
//! produce identical numbering.
//!
//! Construction enforces the invariants the discretization relies on:
//! positive triangle areas (inputs are reoriented, with a count reported),
//! no dangling vertices, every edge shared by at most two triangles with
//! opposite traversal directions, and Euler characteristic `V - E + T = 1`
//! (one simply connected component).

use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

/// Errors produced while building or importing a mesh.
#[derive(Debug, Error)]
pub enum MeshError {
    #[error("mesh must contain at least one triangle")]
    Empty,
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },
    #[error("triangle {tri} references vertex {vertex}, but only {n_vertices} vertices exist")]
    BadIndex {
        tri: usize,
        vertex: usize,
        n_vertices: usize,
    },
    #[error("triangle {0} has repeated vertices")]
    RepeatedVertex(usize),
    #[error("triangle {0} is degenerate (zero area)")]
    DegenerateTriangle(usize),
    #[error("vertex {0} is not referenced by any triangle")]
    DanglingVertex(usize),
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifoldEdge(usize, usize),
    #[error("edge ({0}, {1}) is traversed twice in the same direction; mesh is not an embedded triangulation")]
    InconsistentOrientation(usize, usize),
    #[error("Euler characteristic V - E + T = {v} - {e} + {t} != 1; the solver requires a single simply connected component")]
    EulerCharacteristic { v: usize, e: usize, t: usize },
}

/// Details about how an imported mesh was normalized.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct LoadReport {
    /// Number of input triangles whose vertex order was flipped to make the
    /// orientation counterclockwise.
    pub flipped_triangles: usize,
    /// Index base detected in the input files (1 for stock Triangle output).
    pub index_base: usize,
}

/// Summary statistics, serializable for the `mesh-info` subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct MeshStats {
    pub n_vertices: usize,
    pub n_edges: usize,
    pub n_triangles: usize,
    pub n_boundary_vertices: usize,
    pub n_boundary_edges: usize,
    /// Longest edge length (the mesh size parameter `h`).
    pub h_max: f64,
    /// Shortest edge length.
    pub h_min: f64,
    /// Smallest interior angle over all triangles, in degrees.
    pub min_angle_deg: f64,
    /// Total mesh area.
    pub area: f64,
}

/// A conforming, counterclockwise-oriented triangle mesh.
#[derive(Debug, Clone)]
pub struct Mesh2d {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    /// Global edges as `(tail, head)` vertex pairs with `tail < head`,
    /// sorted lexicographically.
    edges: Vec<[usize; 2]>,
    /// For each triangle, its three local edges `(v0,v1), (v1,v2), (v2,v0)`
    /// as `(global edge id, sign)`; the sign is `+1` when the triangle
    /// traverses the edge tail -> head.
    tri_edges: Vec<[(usize, f64); 3]>,
    boundary_edge: Vec<bool>,
    boundary_vertex: Vec<bool>,
}

impl Mesh2d {
    /// Builds a mesh from raw vertex and triangle lists, normalizing
    /// orientation and verifying all structural invariants.
    pub fn from_raw(
        vertices: Vec<[f64; 2]>,
        mut triangles: Vec<[usize; 3]>,
    ) -> Result<(Self, LoadReport), MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        let nv = vertices.len();
        let mut flipped = 0usize;
        for (t, tri) in triangles.iter_mut().enumerate() {
            for &v in tri.iter() {
                if v >= nv {
                    return Err(MeshError::BadIndex {
                        tri: t,
                        vertex: v,
                        n_vertices: nv,
                    });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::RepeatedVertex(t));
            }
            let a2 = twice_signed_area(&vertices, tri);
            if a2 == 0.0 {
                return Err(MeshError::DegenerateTriangle(t));
            }
            if a2 < 0.0 {
                tri.swap(1, 2);
                flipped += 1;
            }
        }

        // Canonical edge numbering: collect unique (min, max) pairs, then
        // number them in lexicographic order.
        let mut edge_ids: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        for tri in &triangles {
            for (a, b) in local_edges(tri) {
                let key = [a.min(b), a.max(b)];
                edge_ids.entry(key).or_insert(0);
            }
        }
        for (next, (_, id)) in edge_ids.iter_mut().enumerate() {
            *id = next;
        }
        let mut edges = vec![[0usize; 2]; edge_ids.len()];
        for (key, &id) in &edge_ids {
            edges[id] = *key;
        }

        let mut tri_edges = Vec::with_capacity(triangles.len());
        // Per edge: how many incident triangles, and the traversal signs seen.
        let mut incident = vec![0u8; edges.len()];
        let mut sign_sum = vec![0i8; edges.len()];
        for tri in &triangles {
            let mut local = [(0usize, 0.0f64); 3];
            for (k, (a, b)) in local_edges(tri).into_iter().enumerate() {
                let key = [a.min(b), a.max(b)];
                let id = edge_ids[&key];
                let sign = if a < b { 1.0 } else { -1.0 };
                local[k] = (id, sign);
                if incident[id] == 2 {
                    return Err(MeshError::NonManifoldEdge(key[0], key[1]));
                }
                incident[id] += 1;
                sign_sum[id] += if a < b { 1 } else { -1 };
            }
            tri_edges.push(local);
        }
        for (e, (&cnt, &ss)) in incident.iter().zip(&sign_sum).enumerate() {
            if cnt == 2 && ss != 0 {
                return Err(MeshError::InconsistentOrientation(edges[e][0], edges[e][1]));
            }
        }

        let boundary_edge: Vec<bool> = incident.iter().map(|&c| c == 1).collect();
        let mut boundary_vertex = vec![false; nv];
        let mut referenced = vec![false; nv];
        for tri in &triangles {
            for &v in tri {
                referenced[v] = true;
            }
        }
        if let Some(v) = referenced.iter().position(|&r| !r) {
            return Err(MeshError::DanglingVertex(v));
        }
        for (e, &is_b) in boundary_edge.iter().enumerate() {
            if is_b {
                boundary_vertex[edges[e][0]] = true;
                boundary_vertex[edges[e][1]] = true;
            }
        }

        let (v, e, t) = (nv, edges.len(), triangles.len());
        if v + t != e + 1 {
            return Err(MeshError::EulerCharacteristic { v, e, t });
        }

        Ok((
            Mesh2d {
                vertices,
                triangles,
                edges,
                tri_edges,
                boundary_edge,
                boundary_vertex,
            },
            LoadReport {
                flipped_triangles: flipped,
                index_base: 0,
            },
        ))
    }

    /// Structured triangulation of the unit square: `(n+1)^2` vertices on a
    /// uniform grid, each grid cell split along its lower-left to upper-right
    /// diagonal into two counterclockwise triangles.
    pub fn structured_unit_square(n: usize) -> Result<Self, MeshError> {
        if n == 0 {
            return Err(MeshError::Empty);
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
        let (mesh, report) = Self::from_raw(vertices, triangles)?;
        debug_assert_eq!(report.flipped_triangles, 0);
        Ok(mesh)
    }

    /// Imports a mesh from Triangle-format `.node` / `.ele` files.
    ///
    /// Comments start with `#`; indices may be 1-based (stock Triangle) or
    /// 0-based, auto-detected from the first vertex record.  Clockwise
    /// triangles are reoriented and counted in the returned [`LoadReport`].
    pub fn from_triangle_files(
        node_path: &Path,
        ele_path: &Path,
    ) -> Result<(Self, LoadReport), MeshError> {
        let vertices = parse_node_file(node_path)?;
        let read = |p: &Path| {
            std::fs::read_to_string(p).map_err(|e| MeshError::Io {
                path: p.display().to_string(),
                source: e,
            })
        };
        let ele_text = read(ele_path)?;
        let ele_name = ele_path.display().to_string();
        let mut rows = significant_lines(&ele_text);
        let (line_no, header) = rows
            .next()
            .ok_or_else(|| parse_err(&ele_name, 0, "empty .ele file"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() < 2 {
            return Err(parse_err(&ele_name, line_no, "malformed .ele header"));
        }
        let nt: usize = parse_field(&ele_name, line_no, h[0])?;
        let per: usize = parse_field(&ele_name, line_no, h[1])?;
        if per != 3 {
            return Err(parse_err(
                &ele_name,
                line_no,
                &format!("only 3-node triangles are supported, got {per} nodes per element"),
            ));
        }
        let base = vertices.base;
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (line_no, row) = rows
                .next()
                .ok_or_else(|| parse_err(&ele_name, 0, "unexpected end of .ele file"))?;
            let f: Vec<&str> = row.split_whitespace().collect();
            if f.len() < 4 {
                return Err(parse_err(&ele_name, line_no, "triangle record too short"));
            }
            let mut tri = [0usize; 3];
            for (k, slot) in tri.iter_mut().enumerate() {
                let raw: usize = parse_field(&ele_name, line_no, f[k + 1])?;
                if raw < base {
                    return Err(parse_err(
                        &ele_name,
                        line_no,
                        &format!("vertex index {raw} below index base {base}"),
                    ));
                }
                *slot = raw - base;
            }
            triangles.push(tri);
        }
        let (mesh, mut report) = Self::from_raw(vertices.coords, triangles)?;
        report.index_base = base;
        Ok((mesh, report))
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }
    pub fn vertex(&self, i: usize) -> [f64; 2] {
        self.vertices[i]
    }
    pub fn triangle(&self, t: usize) -> [usize; 3] {
        self.triangles[t]
    }
    /// Edge `e` as `(tail, head)` vertex ids with `tail < head`.
    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }
    /// The three `(edge id, sign)` pairs of triangle `t` for its local edges
    /// `(v0,v1), (v1,v2), (v2,v0)`; sign `+1` means the triangle traverses
    /// the global edge tail -> head.
    pub fn tri_edges(&self, t: usize) -> [(usize, f64); 3] {
        self.tri_edges[t]
    }
    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.boundary_edge[e]
    }
    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    /// Positive area of triangle `t`.
    pub fn area(&self, t: usize) -> f64 {
        0.5 * twice_signed_area(&self.vertices, &self.triangles[t])
    }

    /// Longest edge length.
    pub fn h_max(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| self.edge_length_of(e))
            .fold(0.0, f64::max)
    }

    fn edge_length_of(&self, e: &[usize; 2]) -> f64 {
        let p = self.vertices[e[0]];
        let q = self.vertices[e[1]];
        ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt()
    }

    /// Finds the triangle containing `point` (with a small tolerance for
    /// points on edges) and returns its barycentric coordinates.  Linear scan;
    /// intended for sampling and diagnostics, not inner loops.
    pub fn locate(&self, point: [f64; 2]) -> Option<(usize, [f64; 3])> {
        const TOL: f64 = 1e-12;
        for t in 0..self.triangles.len() {
            let l = self.barycentric(t, point);
            if l.iter().all(|&x| x >= -TOL) {
                return Some((t, l));
            }
        }
        None
    }

    /// Barycentric coordinates of `point` with respect to triangle `t`.
    pub fn barycentric(&self, t: usize, point: [f64; 2]) -> [f64; 3] {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        let a2 = twice_signed_area(&self.vertices, &self.triangles[t]);
        let cross = |u: [f64; 2], v: [f64; 2], p: [f64; 2]| {
            (v[0] - u[0]) * (p[1] - u[1]) - (v[1] - u[1]) * (p[0] - u[0])
        };
        [
            cross(pb, pc, point) / a2,
            cross(pc, pa, point) / a2,
            cross(pa, pb, point) / a2,
        ]
    }

    /// Summary statistics.
    pub fn stats(&self) -> MeshStats {
        let mut h_max: f64 = 0.0;
        let mut h_min = f64::INFINITY;
        for e in &self.edges {
            let len = self.edge_length_of(e);
            h_max = h_max.max(len);
            h_min = h_min.min(len);
        }
        let mut min_angle: f64 = f64::INFINITY;
        let mut area = 0.0;
        for t in 0..self.triangles.len() {
            area += self.area(t);
            let [a, b, c] = self.triangles[t];
            let pts = [self.vertices[a], self.vertices[b], self.vertices[c]];
            for k in 0..3 {
                let p = pts[k];
                let q = pts[(k + 1) % 3];
                let r = pts[(k + 2) % 3];
                let u = [q[0] - p[0], q[1] - p[1]];
                let v = [r[0] - p[0], r[1] - p[1]];
                let dot = u[0] * v[0] + u[1] * v[1];
                let nu = (u[0] * u[0] + u[1] * u[1]).sqrt();
                let nv = (v[0] * v[0] + v[1] * v[1]).sqrt();
                let cos = (dot / (nu * nv)).clamp(-1.0, 1.0);
                min_angle = min_angle.min(cos.acos());
            }
        }
        MeshStats {
            n_vertices: self.n_vertices(),
            n_edges: self.n_edges(),
            n_triangles: self.n_triangles(),
            n_boundary_vertices: self.boundary_vertex.iter().filter(|&&b| b).count(),
            n_boundary_edges: self.boundary_edge.iter().filter(|&&b| b).count(),
            h_max,
            h_min,
            min_angle_deg: min_angle.to_degrees(),
            area,
        }
    }

    /// Renders the stats as a small aligned text table.
    pub fn stats_text(&self) -> String {
        let s = self.stats();
        let mut out = String::new();
        let _ = writeln!(out, "vertices           {:>10}", s.n_vertices);
        let _ = writeln!(out, "edges              {:>10}", s.n_edges);
        let _ = writeln!(out, "triangles          {:>10}", s.n_triangles);
        let _ = writeln!(out, "boundary vertices  {:>10}", s.n_boundary_vertices);
        let _ = writeln!(out, "boundary edges     {:>10}", s.n_boundary_edges);
        let _ = writeln!(out, "h_max              {:>10.6}", s.h_max);
        let _ = writeln!(out, "h_min              {:>10.6}", s.h_min);
        let _ = writeln!(out, "min angle (deg)    {:>10.4}", s.min_angle_deg);
        let _ = writeln!(out, "area               {:>10.6}", s.area);
        out
    }
}

/// Local edges of a triangle in traversal order.
fn local_edges(tri: &[usize; 3]) -> [(usize, usize); 3] {
    [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])]
}

fn twice_signed_area(vertices: &[[f64; 2]], tri: &[usize; 3]) -> f64 {
    let a = vertices[tri[0]];
    let b = vertices[tri[1]];
    let c = vertices[tri[2]];
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

struct NodeFile {
    coords: Vec<[f64; 2]>,
    base: usize,
}

/// Iterator over non-comment, non-blank lines with 1-based line numbers.
fn significant_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

fn parse_err(file: &str, line: usize, msg: &str) -> MeshError {
    MeshError::Parse {
        file: file.to_string(),
        line,
        msg: msg.to_string(),
    }
}

fn parse_field<T: std::str::FromStr>(file: &str, line: usize, s: &str) -> Result<T, MeshError> {
    s.parse()
        .map_err(|_| parse_err(file, line, &format!("cannot parse field {s:?}")))
}

fn parse_node_file(path: &Path) -> Result<NodeFile, MeshError> {
    let text = std::fs::read_to_string(path).map_err(|e| MeshError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let name = path.display().to_string();
    let mut rows = significant_lines(&text);
    let (line_no, header) = rows
        .next()
        .ok_or_else(|| parse_err(&name, 0, "empty .node file"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() < 2 {
        return Err(parse_err(&name, line_no, "malformed .node header"));
    }
    let nv: usize = parse_field(&name, line_no, h[0])?;
    let dim: usize = parse_field(&name, line_no, h[1])?;
    if dim != 2 {
        return Err(parse_err(
            &name,
            line_no,
            &format!("only 2D meshes are supported, got dimension {dim}"),
        ));
    }
    if nv == 0 {
        return Err(parse_err(&name, line_no, "node file declares 0 vertices"));
    }
    let mut coords = vec![[0.0f64; 2]; nv];
    let mut base: Option<usize> = None;
    for k in 0..nv {
        let (line_no, row) = rows
            .next()
            .ok_or_else(|| parse_err(&name, 0, "unexpected end of .node file"))?;
        let f: Vec<&str> = row.split_whitespace().collect();
        if f.len() < 3 {
            return Err(parse_err(&name, line_no, "vertex record too short"));
        }
        let idx: usize = parse_field(&name, line_no, f[0])?;
        let b = match base {
            Some(b) => b,
            None => {
                let detected = match idx {
                    0 => 0,
                    1 => 1,
                    other => {
                        return Err(parse_err(
                            &name,
                            line_no,
                            &format!("first vertex index must be 0 or 1, got {other}"),
                        ))
                    }
                };
                base = Some(detected);
                detected
            }
        };
        if idx != k + b {
            return Err(parse_err(
                &name,
                line_no,
                &format!("vertex indices must be consecutive; expected {}, got {idx}", k + b),
            ));
        }
        coords[k] = [
            parse_field(&name, line_no, f[1])?,
            parse_field(&name, line_no, f[2])?,
        ];
    }
    Ok(NodeFile {
        coords,
        base: base.unwrap_or(1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structured_counts() {
        for n in [1usize, 2, 3, 8] {
            let m = Mesh2d::structured_unit_square(n).unwrap();
            assert_eq!(m.n_vertices(), (n + 1) * (n + 1));
            assert_eq!(m.n_edges(), 3 * n * n + 2 * n);
            assert_eq!(m.n_triangles(), 2 * n * n);
            let s = m.stats();
            assert!((s.area - 1.0).abs() < 1e-14);
            assert!((s.h_max - (2.0f64).sqrt() / n as f64).abs() < 1e-14);
            assert_eq!(s.n_boundary_edges, 4 * n);
            assert_eq!(s.n_boundary_vertices, 4 * n);
        }
    }

    #[test]
    fn orientation_is_ccw_and_signs_consistent() {
        let m = Mesh2d::structured_unit_square(3).unwrap();
        for t in 0..m.n_triangles() {
            assert!(m.area(t) > 0.0);
            for (e, sign) in m.tri_edges(t) {
                let [tail, head] = m.edge(e);
                assert!(tail < head);
                assert!(sign == 1.0 || sign == -1.0);
            }
        }
        // Interior edges must be traversed once in each direction.
        let mut sum = vec![0.0; m.n_edges()];
        for t in 0..m.n_triangles() {
            for (e, sign) in m.tri_edges(t) {
                sum[e] += sign;
            }
        }
        for e in 0..m.n_edges() {
            if !m.is_boundary_edge(e) {
                assert_eq!(sum[e], 0.0);
            }
        }
    }

    #[test]
    fn cw_triangles_are_flipped() {
        let verts = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let (m, rep) = Mesh2d::from_raw(verts, vec![[0, 2, 1]]).unwrap();
        assert_eq!(rep.flipped_triangles, 1);
        assert!(m.area(0) > 0.0);
    }

    #[test]
    fn dangling_vertex_is_an_error() {
        let verts = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [5.0, 5.0]];
        let err = Mesh2d::from_raw(verts, vec![[0, 1, 2]]).unwrap_err();
        assert!(matches!(err, MeshError::DanglingVertex(3)));
    }

    #[test]
    fn degenerate_triangle_is_an_error() {
        let verts = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        let err = Mesh2d::from_raw(verts, vec![[0, 1, 2]]).unwrap_err();
        assert!(matches!(err, MeshError::DegenerateTriangle(0)));
    }

    #[test]
    fn triangle_file_import_round_trip() {
        let dir = std::env::temp_dir().join("maxwell-lfr-mesh-test");
        std::fs::create_dir_all(&dir).unwrap();
        let node = dir.join("square.node");
        let ele = dir.join("square.ele");
        std::fs::write(
            &node,
            "# unit square\n4 2 0 0\n1 0.0 0.0\n2 1.0 0.0\n3 1.0 1.0\n4 0.0 1.0\n",
        )
        .unwrap();
        // Second triangle is clockwise on purpose.
        std::fs::write(&ele, "2 3 0\n1 1 2 3\n2 1 4 3\n").unwrap();
        let (m, rep) = Mesh2d::from_triangle_files(&node, &ele).unwrap();
        assert_eq!(rep.index_base, 1);
        assert_eq!(rep.flipped_triangles, 1);
        assert_eq!(m.n_vertices(), 4);
        assert_eq!(m.n_edges(), 5);
        assert_eq!(m.n_triangles(), 2);
        assert!((m.stats().area - 1.0).abs() < 1e-14);
    }

    #[test]
    fn locate_finds_interior_points() {
        let m = Mesh2d::structured_unit_square(4).unwrap();
        let (t, l) = m.locate([0.3, 0.7]).unwrap();
        assert!(t < m.n_triangles());
        assert!((l[0] + l[1] + l[2] - 1.0).abs() < 1e-12);
        assert!(m.locate([1.5, 0.5]).is_none());
    }
}
