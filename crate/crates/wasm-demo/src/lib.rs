//! Browser bindings for the maxwell-lfr solver.
//!
//! Three entry points back the demo page, each returning a JSON string so
//! the page needs no generated TypeScript types:
//!
//! * [`coefficient_table`] — exact rational scheme coefficients per order,
//! * [`mesh_summary`] — structured-mesh statistics,
//! * [`simulate`] — a capped desk-scale run returning per-state field
//!   snapshots (p at vertices, E and H per triangle) plus the energy trace,
//!   ready for canvas rendering.
//!
//! Build with `wasm-pack build --target web crates/wasm-demo`; the static
//! page in `www/` loads the generated module directly.

use maxwell_lfr::coeffs::{gamma_composition, gammas_for_order, rational_to_f64};
use maxwell_lfr::feec::FeOrder;
use maxwell_lfr::mesh::Mesh2d;
use maxwell_lfr::problems::Problem;
use maxwell_lfr::stepper::{expand_state, run_with, RunConfig};
use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

fn err(msg: impl std::fmt::Display) -> String {
    json!({ "error": msg.to_string() }).to_string()
}

/// Exact scheme coefficients for an even time order, with float values and
/// a cross-check of the two derivation routes.
#[wasm_bindgen]
pub fn coefficient_table(time_order: u32) -> String {
    if time_order < 2 || time_order % 2 != 0 || time_order > 32 {
        return err("time order must be even and between 2 and 32");
    }
    match gammas_for_order(time_order) {
        Ok(gammas) => {
            let composed = gamma_composition(gammas.len() - 1);
            json!({
                "R": time_order,
                "gamma": gammas.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
                "gamma_f64": gammas.iter().map(rational_to_f64).collect::<Vec<_>>(),
                "routes_agree": gammas == composed,
            })
            .to_string()
        }
        Err(e) => err(e),
    }
}

/// Statistics of the structured unit-square mesh with 2n² triangles.
#[wasm_bindgen]
pub fn mesh_summary(n: u32) -> String {
    if n == 0 || n > 64 {
        return err("n must be between 1 and 64");
    }
    match Mesh2d::structured_unit_square(n as usize) {
        Ok(mesh) => serde_json::to_string(&mesh.stats()).unwrap_or_else(err),
        Err(e) => err(e),
    }
}

/// Runs a small benchmark problem and returns the trajectory for rendering.
///
/// Sizes are capped (n ≤ 8, steps ≤ 256, R ≤ 8) so the run stays interactive
/// inside a browser tab; at most 128 of the states are included as frames.
#[wasm_bindgen]
pub fn simulate(example: u32, time_order: u32, fe_order: u32, n: u32, steps: u32) -> String {
    if !(1..=2).contains(&example) {
        return err("example must be 1 or 2");
    }
    if time_order < 2 || time_order % 2 != 0 || time_order > 8 {
        return err("time order must be even and between 2 and 8");
    }
    let Some(fe) = FeOrder::try_from_u8(fe_order as u8) else {
        return err("element order must be 1 or 2");
    };
    if !(1..=8).contains(&n) {
        return err("n must be between 1 and 8");
    }
    if !(1..=256).contains(&steps) {
        return err("steps must be between 1 and 256");
    }

    let problem = Problem::by_id(&example.to_string()).expect("validated id");
    let cfg = RunConfig::new(problem, time_order as usize, fe, n as usize);
    let cfg = match cfg.with_time_grid(None, Some(steps as usize)) {
        Ok(cfg) => cfg,
        Err(e) => return err(e),
    };

    // Keep the payload bounded: subsample states down to at most 128 frames,
    // always keeping the first and last.
    let stride = (steps as usize).div_ceil(128).max(1);
    let mut frames: Vec<Value> = Vec::new();
    let mut index = 0usize;
    let dt = cfg.dt;
    let last = cfg.steps;

    let diag = match run_with(&cfg, &mut |disc, state| {
        let keep = index % stride == 0 || index == last;
        if keep {
            let (pf, ef, hf) = expand_state(disc, state);
            let mesh = &disc.cx.mesh;
            let nt = mesh.n_triangles();
            let mut p_vals = vec![0.0f64; mesh.n_vertices()];
            let mut h_vals = Vec::with_capacity(nt);
            let mut e_vals = Vec::with_capacity(nt);
            let corners = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
            let center = [1.0 / 3.0; 3];
            for t in 0..nt {
                let tri = mesh.triangle(t);
                for k in 0..3 {
                    p_vals[tri[k]] = disc.cx.eval_0(&pf, t, corners[k]);
                }
                h_vals.push(disc.cx.eval_2(&hf, t, center));
                let [ex, ey] = disc.cx.eval_1(&ef, t, center);
                e_vals.push([ex, ey]);
            }
            let time = if index == 0 {
                0.0
            } else {
                (index as f64 - 0.5) * dt
            };
            frames.push(json!({
                "state": index,
                "time": time,
                "p": p_vals,
                "e": e_vals,
                "h": h_vals,
            }));
        }
        index += 1;
    }) {
        Ok(diag) => diag,
        Err(e) => return err(e),
    };
    if let Some(failure) = &diag.failure {
        return err(failure);
    }

    let mesh = Mesh2d::structured_unit_square(n as usize).expect("validated n");
    let vertices: Vec<[f64; 2]> = (0..mesh.n_vertices()).map(|i| mesh.vertex(i)).collect();
    let triangles: Vec<[usize; 3]> = (0..mesh.n_triangles()).map(|t| mesh.triangle(t)).collect();

    let energy: Vec<Value> = diag
        .energy
        .iter()
        .map(|row| {
            json!({
                "step": row.step,
                "time": row.time,
                "energy": row.energy,
                "rel_drift": row.rel_drift,
            })
        })
        .collect();

    let errors = diag.errors.map(|e| {
        json!({
            "err_p": e.p,
            "err_E": e.e,
            "err_H": e.h,
            "err_total": e.total,
        })
    });

    json!({
        "config": {
            "example": example,
            "R": time_order,
            "order": fe_order,
            "n": n,
            "dt": dt,
            "steps": steps,
        },
        "mesh": { "vertices": vertices, "triangles": triangles },
        "frames": frames,
        "energy": energy,
        "max_rel_drift": diag.max_rel_drift,
        "errors": errors,
    })
    .to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_table_lists_exact_rationals() {
        let v: Value = serde_json::from_str(&coefficient_table(6)).unwrap();
        assert_eq!(v["routes_agree"], true);
        assert_eq!(v["gamma"][1], "-1/12");
        assert_eq!(v["gamma"][2], "1/120");
        let bad: Value = serde_json::from_str(&coefficient_table(7)).unwrap();
        assert!(bad["error"].is_string());
    }

    #[test]
    fn mesh_summary_counts_match() {
        let v: Value = serde_json::from_str(&mesh_summary(2)).unwrap();
        assert_eq!(v["n_vertices"], 9);
        assert_eq!(v["n_edges"], 16);
        assert_eq!(v["n_triangles"], 8);
    }

    #[test]
    fn simulate_returns_frames_and_energy() {
        let v: Value = serde_json::from_str(&simulate(1, 2, 1, 2, 4)).unwrap();
        assert!(v.get("error").is_none(), "unexpected: {v}");
        assert_eq!(v["energy"].as_array().unwrap().len(), 5);
        assert_eq!(v["frames"].as_array().unwrap().len(), 5);
        assert_eq!(v["frames"][4]["time"], 0.875);
        assert_eq!(v["mesh"]["triangles"].as_array().unwrap().len(), 8);
        assert!(v["max_rel_drift"].as_f64().unwrap() < 1e-9);

        let bad: Value = serde_json::from_str(&simulate(1, 2, 1, 99, 4)).unwrap();
        assert!(bad["error"].is_string());
    }
}
