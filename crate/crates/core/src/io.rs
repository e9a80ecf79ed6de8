//! Writers for run artifacts.
//!
//! Everything here is plain-text and deterministic: identical inputs produce
//! byte-identical files (floats are printed with Rust's shortest round-trip
//! formatting, and no writer embeds a timestamp).  The formats:
//!
//! - `energy.csv` — one row per state, `step,time,energy,rel_drift`;
//! - `errors.json` — final-time field errors plus the resolved config;
//! - `convergence.csv` — one row per sweep run,
//!   `mode,R,order,n,dt,err_p,err_E,err_H,err_total`;
//! - `slopes.json` — fitted per-field convergence slopes plus config;
//! - legacy ASCII VTK — field snapshot on the triangle mesh (`p` at vertices,
//!   `H` and `E` at barycenters) for external plotting;
//! - Matrix Market — coordinate-format dump of any assembled matrix (library
//!   utility; not wired to a CLI flag).

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use faer::Mat;
use serde_json::{json, Map, Value};

use crate::stepper::{
    expand_state, BcMode, Discretization, EnergyRow, FieldErrors, FieldSlopes, RunConfig, State,
    SweepRow,
};
use crate::operators::SolverKind;

/// The resolved configuration as a JSON object, embedded verbatim in every
/// JSON artifact so each file is self-describing.
pub fn config_json(cfg: &RunConfig) -> Value {
    json!({
        "problem": cfg.problem.id,
        "R": cfg.time_order,
        "order": cfg.fe_order.as_u8(),
        "n": cfg.n,
        "dt": cfg.dt,
        "steps": cfg.steps,
        "T": cfg.t_final,
        "eps": cfg.eps,
        "mu": cfg.mu,
        "bc": match cfg.bc {
            BcMode::Auto => "auto",
            BcMode::Homogeneous => "homogeneous",
            BcMode::Constrained => "constrained",
        },
        "solver": match cfg.solver {
            SolverKind::Dense => "dense",
            SolverKind::Iterative => "iterative",
        },
    })
}

/// Serializes a JSON value pretty-printed with a trailing newline.
pub fn write_json(path: &Path, value: &Value) -> io::Result<()> {
    let mut s = serde_json::to_string_pretty(value).expect("JSON serialization cannot fail");
    s.push('\n');
    fs::write(path, s)
}

/// Writes the per-step energy record (`step,time,energy,rel_drift`).
pub fn write_energy_csv(path: &Path, rows: &[EnergyRow]) -> io::Result<()> {
    let mut s = String::from("step,time,energy,rel_drift\n");
    for r in rows {
        writeln!(s, "{},{},{},{}", r.step, r.time, r.energy, r.rel_drift).unwrap();
    }
    fs::write(path, s)
}

/// The `errors.json` payload: final-time errors, their evaluation times, and
/// the resolved config.
pub fn errors_json(cfg: &RunConfig, e: &FieldErrors) -> Value {
    json!({
        "config": config_json(cfg),
        "err_p": e.p,
        "err_E": e.e,
        "err_H": e.h,
        "err_total": e.total,
        "times": { "p_e": e.t_pe, "h": e.t_h },
    })
}

/// Writes sweep rows as `convergence.csv`
/// (`mode,R,order,n,dt,err_p,err_E,err_H,err_total`).
pub fn write_convergence_csv(path: &Path, rows: &[SweepRow]) -> io::Result<()> {
    let mut s = String::from("mode,R,order,n,dt,err_p,err_E,err_H,err_total\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.mode.as_str(),
            r.time_order,
            r.fe_order,
            r.n,
            r.dt,
            r.errors.p,
            r.errors.e,
            r.errors.h,
            r.errors.total
        )
        .unwrap();
    }
    fs::write(path, s)
}

/// The `slopes.json` payload for a fitted sweep.
pub fn slopes_json(cfg: &RunConfig, mode: &str, slopes: &FieldSlopes, points: usize) -> Value {
    json!({
        "config": config_json(cfg),
        "mode": mode,
        "field_slopes": { "p": slopes.p, "E": slopes.e, "H": slopes.h },
        "points": points,
        "fit_residual": slopes.fit_residual,
    })
}

/// Adds a `meta` object (the only place non-deterministic content is allowed)
/// to a config echo, for `run-config.json`.
pub fn with_meta(config: Value, meta: Map<String, Value>) -> Value {
    let mut obj = Map::new();
    obj.insert("config".into(), config);
    obj.insert("meta".into(), Value::Object(meta));
    Value::Object(obj)
}

/// Writes a legacy-ASCII VTK snapshot of one state.
///
/// `p` is sampled at the mesh vertices (point data; for order 2 this is the
/// vertex value of the quadratic field), `H` at the triangle barycenters
/// (cell data; `H` is discontinuous across edges), and `E` at the barycenters
/// as 3-vectors with zero third component.
pub fn write_vtk(path: &Path, disc: &Discretization, state: &State, title: &str) -> io::Result<()> {
    let (pf, ef, hf) = expand_state(disc, state);
    let mesh = &disc.cx.mesh;
    let nv = mesh.n_vertices();
    let nt = mesh.n_triangles();

    // Vertex samples of the continuous field p: visit each triangle corner;
    // repeated writes agree because p is C0.
    let mut p_vals = vec![0.0; nv];
    let corners = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for t in 0..nt {
        let vs = mesh.triangle(t);
        for (k, &v) in vs.iter().enumerate() {
            p_vals[v] = disc.cx.eval_0(&pf, t, corners[k]);
        }
    }
    let center = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];

    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    writeln!(s, "{title}").unwrap();
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(s, "POINTS {nv} double").unwrap();
    for v in 0..nv {
        let [x, y] = mesh.vertex(v);
        writeln!(s, "{x} {y} 0").unwrap();
    }
    writeln!(s, "CELLS {nt} {}", 4 * nt).unwrap();
    for t in 0..nt {
        let [a, b, c] = mesh.triangle(t);
        writeln!(s, "3 {a} {b} {c}").unwrap();
    }
    writeln!(s, "CELL_TYPES {nt}").unwrap();
    for _ in 0..nt {
        s.push_str("5\n");
    }
    writeln!(s, "POINT_DATA {nv}").unwrap();
    s.push_str("SCALARS p double 1\nLOOKUP_TABLE default\n");
    for v in &p_vals {
        writeln!(s, "{v}").unwrap();
    }
    writeln!(s, "CELL_DATA {nt}").unwrap();
    s.push_str("SCALARS H double 1\nLOOKUP_TABLE default\n");
    for t in 0..nt {
        writeln!(s, "{}", disc.cx.eval_2(&hf, t, center)).unwrap();
    }
    s.push_str("VECTORS E double\n");
    for t in 0..nt {
        let [ex, ey] = disc.cx.eval_1(&ef, t, center);
        writeln!(s, "{ex} {ey} 0").unwrap();
    }
    fs::write(path, s)
}

/// Writes a dense matrix in Matrix Market coordinate format (1-based indices,
/// exact zeros skipped).
pub fn write_matrix_market(path: &Path, m: &Mat<f64>, comment: &str) -> io::Result<()> {
    let mut body = String::new();
    let mut nnz = 0usize;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let x = m[(i, j)];
            if x != 0.0 {
                writeln!(body, "{} {} {x}", i + 1, j + 1).unwrap();
                nnz += 1;
            }
        }
    }
    let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
    writeln!(s, "% {comment}").unwrap();
    writeln!(s, "{} {} {nnz}", m.nrows(), m.ncols()).unwrap();
    s.push_str(&body);
    fs::write(path, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feec::FeOrder;
    use crate::problems::example1;
    use crate::stepper::{run, RunConfig};

    fn small_run() -> (RunConfig, crate::stepper::Diagnostics) {
        let mut cfg = RunConfig::new(example1(), 2, FeOrder::One, 2);
        cfg.t_final = 0.25;
        let cfg = cfg.with_time_grid(Some(0.125), None).unwrap();
        let d = run(&cfg).unwrap();
        (cfg, d)
    }

    #[test]
    fn energy_csv_shape() {
        let (_, d) = small_run();
        let dir = std::env::temp_dir().join("maxlfr-io-test-energy");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("energy.csv");
        write_energy_csv(&path, &d.energy).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("step,time,energy,rel_drift"));
        // initial state + 2 solves
        assert_eq!(text.lines().count(), 1 + 3);
        let first = lines.next().unwrap();
        assert!(first.starts_with("0,0,"));
    }

    #[test]
    fn errors_json_keys_and_determinism() {
        let (cfg, d) = small_run();
        let v = errors_json(&cfg, d.errors.as_ref().unwrap());
        assert!(v["err_p"].is_number());
        assert_eq!(v["config"]["problem"], "example1");
        assert_eq!(v["config"]["R"], 2);
        assert_eq!(v["times"]["p_e"], v["times"]["h"]);
        // byte-identical on rerun
        let (cfg2, d2) = small_run();
        let v2 = errors_json(&cfg2, d2.errors.as_ref().unwrap());
        assert_eq!(
            serde_json::to_string(&v).unwrap(),
            serde_json::to_string(&v2).unwrap()
        );
    }

    #[test]
    fn vtk_snapshot_is_wellformed() {
        let (cfg, d) = small_run();
        let disc = crate::stepper::build_space(&cfg).unwrap();
        let dir = std::env::temp_dir().join("maxlfr-io-test-vtk");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("snap.vtk");
        write_vtk(&path, &disc, &d.final_state, "snapshot").unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# vtk DataFile Version 3.0\n"));
        // n = 2: 9 vertices, 8 triangles
        assert!(text.contains("POINTS 9 double"));
        assert!(text.contains("CELLS 8 32"));
        assert!(text.contains("SCALARS p double 1"));
        assert!(text.contains("SCALARS H double 1"));
        assert!(text.contains("VECTORS E double"));
        let after = text.split("CELL_TYPES 8\n").nth(1).unwrap();
        let type_rows = after.lines().take(8).filter(|l| *l == "5").count();
        assert_eq!(type_rows, 8);
    }

    #[test]
    fn matrix_market_roundtrippable_header() {
        let m = Mat::<f64>::from_fn(2, 3, |i, j| if i == j { (i + 1) as f64 } else { 0.0 });
        let dir = std::env::temp_dir().join("maxlfr-io-test-mm");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m.mtx");
        write_matrix_market(&path, &m, "test matrix").unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("%%MatrixMarket matrix coordinate real general")
        );
        assert_eq!(lines.next(), Some("% test matrix"));
        assert_eq!(lines.next(), Some("2 3 2"));
        assert_eq!(lines.next(), Some("1 1 1"));
        assert_eq!(lines.next(), Some("2 2 2"));
    }
}
