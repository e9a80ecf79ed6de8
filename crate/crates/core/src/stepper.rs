//! Time marching for the staggered three-field scheme.
//!
//! A run projects the initial data, takes one startup solve (the same block
//! system at Δt/2, which lands every field on the half-integer time grid),
//! then N − 1 interior steps, recording the discrete energy after every
//! solve. The H marching index runs one label ahead of p and E, but all
//! three fields of a state share one physical time (see [`State`]); weighted
//! field errors against the exact solution are evaluated at the final state's
//! time T − Δt/2.
//!
//! The module also hosts the two convergence drivers: a spatial sweep over
//! mesh resolutions at fixed Δt, and a temporal self-referencing sweep that
//! compares each run against the same scheme at Δt divided by an odd ratio
//! (odd so the half-integer grids of both runs share the comparison time).

use std::time::Instant;

use faer::Mat;

use crate::coeffs::{self, CoeffsError};
use crate::feec::quadrature::triangle_rule;
use crate::feec::{build_complex, expand, gather, DeRhamComplex, FeOrder, Restriction};
use crate::linalg::{Chol, LinalgError};
use crate::mesh::{Mesh2d, MeshError};
use crate::operators::{
    self, build_operators, build_step_system, BoundaryPartition, CompositeOperators,
    OperatorsError, Phase, SolverKind, SpatialMatrices, StepSystem,
};
use crate::problems::Problem;

/// Errors raised while configuring or preparing a run. Failures *during* the
/// march are reported through [`Diagnostics::failure`] instead, so partial
/// results survive.
#[derive(Debug, thiserror::Error)]
pub enum StepperError {
    #[error("invalid run configuration: {0}")]
    BadConfig(String),
    #[error("failed to build the step systems: {0}")]
    Build(#[from] OperatorsError),
    #[error("initial projection failed: {0}")]
    Projection(#[from] LinalgError),
    #[error("mesh generation failed: {0}")]
    Mesh(#[from] MeshError),
    #[error("scheme coefficients unavailable: {0}")]
    Coeffs(#[from] CoeffsError),
}

/// How boundary conditions are imposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcMode {
    /// Pick from the problem: homogeneous if all essential traces vanish.
    Auto,
    /// Restrict the complex to interior DOFs (requires vanishing traces).
    Homogeneous,
    /// Keep full spaces and pin boundary DOFs to the exact traces per step.
    Constrained,
}

/// A fully resolved run: problem, discretization sizes, time grid, materials,
/// and solver choices.
#[derive(Clone)]
pub struct RunConfig {
    pub problem: Problem,
    /// Even order R of the time integrator.
    pub time_order: usize,
    /// Finite element order r.
    pub fe_order: FeOrder,
    /// Structured mesh resolution (cells per side).
    pub n: usize,
    pub dt: f64,
    pub steps: usize,
    pub t_final: f64,
    pub eps: f64,
    pub mu: f64,
    pub solver: SolverKind,
    pub bc: BcMode,
}

/// Resolves a (Δt | steps | T) specification into a consistent pair,
/// enforcing T = N·Δt to within 1e−12 (relative to max(1, |T|)).
pub fn resolve_time_grid(
    dt: Option<f64>,
    steps: Option<usize>,
    t_final: f64,
) -> Result<(f64, usize), StepperError> {
    if !(t_final > 0.0) {
        return Err(StepperError::BadConfig(format!(
            "final time must be positive, got {t_final}"
        )));
    }
    let tol = 1e-12 * t_final.abs().max(1.0);
    match (dt, steps) {
        (Some(dt), None) => {
            if !(dt > 0.0) {
                return Err(StepperError::BadConfig(format!(
                    "time step must be positive, got {dt}"
                )));
            }
            let n = (t_final / dt).round();
            if n < 1.0 || (n * dt - t_final).abs() > tol {
                return Err(StepperError::BadConfig(format!(
                    "dt = {dt} does not divide the final time {t_final} into whole steps"
                )));
            }
            Ok((dt, n as usize))
        }
        (None, Some(n)) => {
            if n == 0 {
                return Err(StepperError::BadConfig("step count must be positive".into()));
            }
            Ok((t_final / n as f64, n))
        }
        (Some(dt), Some(n)) => {
            if n == 0 || !(dt > 0.0) || (n as f64 * dt - t_final).abs() > tol {
                return Err(StepperError::BadConfig(format!(
                    "dt = {dt} and steps = {n} are inconsistent with final time {t_final}"
                )));
            }
            Ok((dt, n))
        }
        (None, None) => Err(StepperError::BadConfig(
            "either a time step or a step count is required".into(),
        )),
    }
}

impl RunConfig {
    /// Convenience constructor used by tests and the sweep drivers.
    pub fn new(problem: Problem, time_order: usize, fe_order: FeOrder, n: usize) -> Self {
        RunConfig {
            problem,
            time_order,
            fe_order,
            n,
            dt: 0.0,
            steps: 0,
            t_final: problem.t_final,
            eps: problem.eps,
            mu: problem.mu,
            solver: SolverKind::Dense,
            bc: BcMode::Auto,
        }
    }

    /// Fills the time grid from a (Δt | steps) specification.
    pub fn with_time_grid(
        mut self,
        dt: Option<f64>,
        steps: Option<usize>,
    ) -> Result<Self, StepperError> {
        let (dt, steps) = resolve_time_grid(dt, steps, self.t_final)?;
        self.dt = dt;
        self.steps = steps;
        Ok(self)
    }

    /// Whether this run restricts to interior DOFs.
    pub fn homogeneous(&self) -> bool {
        match self.bc {
            BcMode::Auto => self.problem.homogeneous_bc,
            BcMode::Homogeneous => true,
            BcMode::Constrained => false,
        }
    }

    pub fn validate(&self) -> Result<(), StepperError> {
        if self.time_order < 2 || self.time_order % 2 != 0 {
            return Err(StepperError::BadConfig(format!(
                "scheme order must be a positive even integer, got {}",
                self.time_order
            )));
        }
        if self.n == 0 {
            return Err(StepperError::BadConfig("mesh resolution must be positive".into()));
        }
        if !(self.eps > 0.0 && self.mu > 0.0) {
            return Err(StepperError::BadConfig(format!(
                "material constants must be positive, got eps = {}, mu = {}",
                self.eps, self.mu
            )));
        }
        if self.bc == BcMode::Homogeneous && !self.problem.homogeneous_bc {
            return Err(StepperError::BadConfig(
                "homogeneous mode would silently zero the nonvanishing boundary traces of this problem; use constrained mode".into(),
            ));
        }
        // Re-checks the grid invariant in case fields were set directly.
        resolve_time_grid(Some(self.dt), Some(self.steps), self.t_final).map(|_| ())
    }
}

/// The discrete state after `n` solves: all three fields live at time
/// (n − 1/2)Δt. `n = 0` is the projected-initial-data precursor at t = 0.
///
/// The marching index for H runs one label ahead of its physical time: the
/// startup solve produces the sample written `H^1` here, and each later
/// solve advances every field by Δt, so `hfield` of state `n` sits at the
/// same half-integer time as `p` and `e`. Treating the H labels as integer
/// times instead makes the H update first-order; the half-integer reading
/// is the one under which the update equations are centered at every order.
#[derive(Clone)]
pub struct State {
    pub p: Mat<f64>,
    pub e: Mat<f64>,
    pub hfield: Mat<f64>,
    pub n: usize,
}

/// Everything that depends on the mesh and boundary mode but not on Δt.
pub struct Discretization {
    pub cx: DeRhamComplex,
    pub homogeneous: bool,
    /// Interior-DOF selection (homogeneous mode only).
    pub restriction: Option<Restriction>,
    /// Stacked interior/boundary split (constrained mode only).
    pub partition: Option<BoundaryPartition>,
    /// Mass and coboundary matrices on the working spaces.
    pub mats: SpatialMatrices,
    pub ops: CompositeOperators,
    pub gammas: Vec<f64>,
}

/// The two factored block systems of a run.
pub struct StepSystems {
    pub boot: StepSystem,
    pub interior: StepSystem,
}

/// Builds the complex, working matrices, and composite operators for a run.
pub fn build_space(cfg: &RunConfig) -> Result<Discretization, StepperError> {
    cfg.validate()?;
    let mesh = Mesh2d::structured_unit_square(cfg.n)?;
    let cx = build_complex(mesh, cfg.fe_order);
    let homogeneous = cfg.homogeneous();
    let (restriction, partition, mats) = if homogeneous {
        let r = Restriction::new(&cx);
        let mats = SpatialMatrices::restricted(&cx, &r);
        (Some(r), None, mats)
    } else {
        (
            None,
            Some(BoundaryPartition::from_complex(&cx)),
            SpatialMatrices::full(&cx),
        )
    };
    let ops = build_operators(&mats)?;
    let gammas = coeffs::gammas_f64_for_order(cfg.time_order as u32)?;
    Ok(Discretization {
        cx,
        homogeneous,
        restriction,
        partition,
        mats,
        ops,
        gammas,
    })
}

/// Builds and factors the bootstrap and interior systems for one Δt.
pub fn build_systems(disc: &Discretization, cfg: &RunConfig) -> Result<StepSystems, StepperError> {
    let build = |phase| {
        build_step_system(
            &disc.mats,
            &disc.ops,
            &disc.gammas,
            cfg.dt,
            cfg.eps,
            cfg.mu,
            phase,
            cfg.solver,
            disc.partition.as_ref(),
        )
    };
    Ok(StepSystems {
        boot: build(Phase::Bootstrap)?,
        interior: build(Phase::Interior)?,
    })
}

/// L² projection of the problem's initial data onto the working spaces. In
/// constrained mode the boundary DOFs are pinned to the exact traces at
/// t = 0 and the interior is projected against them, so a problem with
/// vanishing traces starts from exactly the homogeneous-mode data.
pub fn initialize(cfg: &RunConfig, disc: &Discretization) -> Result<State, StepperError> {
    let rule = triangle_rule(8);
    let pr = &cfg.problem;
    let mut lp = disc.cx.load_0(&|x| (pr.p)(x, 0.0), &rule);
    let mut le = disc.cx.load_1(&|x| (pr.e)(x, 0.0), &rule);
    let lh = disc.cx.load_2(&|x| (pr.h)(x, 0.0), &rule);
    let solve = |m: &Mat<f64>, b: &Mat<f64>| -> Result<Mat<f64>, LinalgError> {
        Ok(Chol::new(m.as_ref())?.solve(b))
    };
    let (p, e) = if let Some(r) = &disc.restriction {
        lp = gather(&lp, &r.u_keep);
        le = gather(&le, &r.v_keep);
        (solve(&disc.mats.m_u, &lp)?, solve(&disc.mats.m_v, &le)?)
    } else {
        let ub = disc.cx.u_boundary_values(&|x| (pr.p)(x, 0.0));
        let vb = disc.cx.v_boundary_values(&|x| (pr.e)(x, 0.0));
        (
            pinned_projection(&disc.mats.m_u, &lp, &disc.cx.u_boundary, &ub)?,
            pinned_projection(&disc.mats.m_v, &le, &disc.cx.v_boundary, &vb)?,
        )
    };
    Ok(State {
        p,
        e,
        hfield: solve(&disc.mats.m_w, &lh)?,
        n: 0,
    })
}

/// Projects a load onto the subspace with the flagged DOFs held at `pinned`
/// values: solves `M_ii c_i = l_i − M_ib c_b` and scatters both parts back.
fn pinned_projection(
    m: &Mat<f64>,
    load: &Mat<f64>,
    boundary_flags: &[bool],
    pinned: &[(usize, f64)],
) -> Result<Mat<f64>, LinalgError> {
    let keep: Vec<usize> = boundary_flags
        .iter()
        .enumerate()
        .filter(|&(_, &b)| !b)
        .map(|(i, _)| i)
        .collect();
    let mut cb = Mat::zeros(pinned.len(), 1);
    let bdry: Vec<usize> = pinned
        .iter()
        .enumerate()
        .map(|(slot, &(dof, v))| {
            cb[(slot, 0)] = v;
            dof
        })
        .collect();
    let m_ii = crate::feec::select(m.as_ref(), &keep, &keep);
    let m_ib = crate::feec::select(m.as_ref(), &keep, &bdry);
    let rhs = gather(load, &keep) - &m_ib * &cb;
    let ci = Chol::new(m_ii.as_ref())?.solve(&rhs);
    let mut full = expand(&ci, &keep, m.nrows());
    for &(dof, v) in pinned {
        full[(dof, 0)] = v;
    }
    Ok(full)
}

/// Expands a (possibly restricted) state to full-space coefficient vectors.
/// In homogeneous mode the boundary DOFs are zero by definition.
pub fn expand_state(disc: &Discretization, s: &State) -> (Mat<f64>, Mat<f64>, Mat<f64>) {
    match &disc.restriction {
        Some(r) => (
            expand(&s.p, &r.u_keep, disc.cx.dim_u()),
            expand(&s.e, &r.v_keep, disc.cx.dim_v()),
            s.hfield.clone(),
        ),
        None => (s.p.clone(), s.e.clone(), s.hfield.clone()),
    }
}

/// One solve: bootstrap from n = 0, interior otherwise. Returns the new state
/// and, in constrained mode, the eliminated-row residual.
fn advance(
    disc: &Discretization,
    sys: &StepSystem,
    cfg: &RunConfig,
    state: &State,
) -> Result<(State, f64), OperatorsError> {
    let x = sys.stack(&state.p, &state.e, &state.hfield);
    let (x_new, residual) = match &disc.partition {
        Some(part) => {
            // p and E boundary DOFs are pinned to the exact traces at the
            // unknowns' new time (n + 1/2)Δt; H carries no boundary DOFs.
            let t_new = (state.n as f64 + 0.5) * cfg.dt;
            let pr = &cfg.problem;
            let ub = disc.cx.u_boundary_values(&|x| (pr.p)(x, t_new));
            let vb = disc.cx.v_boundary_values(&|x| (pr.e)(x, t_new));
            let mut bvals = Vec::with_capacity(ub.len() + vb.len());
            bvals.extend(ub.into_iter().map(|(_, v)| v));
            bvals.extend(vb.into_iter().map(|(_, v)| v));
            sys.step_constrained(part, &x, &bvals)?
        }
        None => (sys.step(&x)?, 0.0),
    };
    let (p, e, hfield) = sys.split(&x_new);
    Ok((
        State {
            p,
            e,
            hfield,
            n: state.n + 1,
        },
        residual,
    ))
}

/// One row of the per-step energy record.
#[derive(Debug, Clone, Copy)]
pub struct EnergyRow {
    pub step: usize,
    pub time: f64,
    pub energy: f64,
    /// Signed drift relative to the energy of the projected initial data.
    pub rel_drift: f64,
}

/// Weighted L² errors against the exact solution at the final state's
/// physical time, T − Δt/2 for every field. `t_pe` and `t_h` record the
/// comparison times per field group; they are equal (see [`State`]).
#[derive(Debug, Clone, Copy)]
pub struct FieldErrors {
    pub p: f64,
    pub e: f64,
    pub h: f64,
    pub total: f64,
    pub t_pe: f64,
    pub t_h: f64,
}

/// Everything a run produces. `failure` is set (and `errors` cleared) when a
/// solve fails mid-march; the energy rows up to that point are kept.
pub struct Diagnostics {
    pub energy: Vec<EnergyRow>,
    pub max_rel_drift: f64,
    pub errors: Option<FieldErrors>,
    pub boundary_residual_max: f64,
    pub wall_seconds: f64,
    pub failure: Option<String>,
    pub final_state: State,
}

fn compute_errors(cfg: &RunConfig, disc: &Discretization, state: &State) -> FieldErrors {
    let (pf, ef, hf) = expand_state(disc, state);
    let t_pe = (state.n as f64 - 0.5) * cfg.dt;
    let t_h = t_pe;
    let rule = triangle_rule(8);
    let pr = &cfg.problem;
    let p = disc
        .cx
        .error_norm_0(&pf, &|x| (pr.p)(x, t_pe), 1.0 / cfg.eps, &rule);
    let e = disc
        .cx
        .error_norm_1(&ef, &|x| (pr.e)(x, t_pe), cfg.eps, &rule);
    let h = disc
        .cx
        .error_norm_2(&hf, &|x| (pr.h)(x, t_h), cfg.mu, &rule);
    FieldErrors {
        p,
        e,
        h,
        total: p + e + h,
        t_pe,
        t_h,
    }
}

/// Marches `cfg.steps` solves from projected initial data, invoking
/// `observe` on the precursor state and after every solve.
fn march(
    disc: &Discretization,
    systems: &StepSystems,
    cfg: &RunConfig,
    observe: &mut dyn FnMut(&Discretization, &State),
) -> Result<Diagnostics, StepperError> {
    let start = Instant::now();
    let mut state = initialize(cfg, disc)?;
    let e0 = operators::energy(&disc.mats, cfg.eps, cfg.mu, &state.p, &state.e, &state.hfield);
    let denom = if e0 != 0.0 { e0 } else { 1.0 };
    let mut energy = vec![EnergyRow {
        step: 0,
        time: 0.0,
        energy: e0,
        rel_drift: 0.0,
    }];
    observe(disc, &state);

    let mut boundary_residual_max = 0.0f64;
    let mut failure = None;
    for k in 0..cfg.steps {
        let sys = if k == 0 {
            &systems.boot
        } else {
            &systems.interior
        };
        match advance(disc, sys, cfg, &state) {
            Ok((next, res)) => {
                boundary_residual_max = boundary_residual_max.max(res);
                state = next;
                let en = operators::energy(
                    &disc.mats, cfg.eps, cfg.mu, &state.p, &state.e, &state.hfield,
                );
                energy.push(EnergyRow {
                    step: state.n,
                    time: (state.n as f64 - 0.5) * cfg.dt,
                    energy: en,
                    rel_drift: (en - e0) / denom,
                });
                observe(disc, &state);
            }
            Err(err) => {
                failure = Some(format!("solve failed at step {}: {err}", k + 1));
                break;
            }
        }
    }

    let max_rel_drift = energy
        .iter()
        .map(|r| r.rel_drift.abs())
        .fold(0.0f64, f64::max);
    let errors = if failure.is_none() {
        Some(compute_errors(cfg, disc, &state))
    } else {
        None
    };
    Ok(Diagnostics {
        energy,
        max_rel_drift,
        errors,
        boundary_residual_max,
        wall_seconds: start.elapsed().as_secs_f64(),
        failure,
        final_state: state,
    })
}

/// Builds everything and marches to the final time.
pub fn run(cfg: &RunConfig) -> Result<Diagnostics, StepperError> {
    run_with(cfg, &mut |_, _| {})
}

/// Like [`run`], with an observer invoked on the initial state and after
/// every solve — the hook for field dumps and snapshots.
pub fn run_with(
    cfg: &RunConfig,
    observe: &mut dyn FnMut(&Discretization, &State),
) -> Result<Diagnostics, StepperError> {
    let disc = build_space(cfg)?;
    let systems = build_systems(&disc, cfg)?;
    march(&disc, &systems, cfg, observe)
}

// ---------------------------------------------------------------------------
// Convergence sweeps
// ---------------------------------------------------------------------------

/// Which refinement axis a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    Spatial,
    Temporal,
}

impl SweepMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepMode::Spatial => "spatial",
            SweepMode::Temporal => "temporal",
        }
    }
}

/// One sweep point: the resolution it ran at and the errors it produced.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub mode: SweepMode,
    pub time_order: usize,
    pub fe_order: u8,
    pub n: usize,
    pub dt: f64,
    pub errors: FieldErrors,
}

/// Sweep results; on a mid-sweep solver failure the rows gathered so far are
/// kept and `failure` is set.
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub failure: Option<String>,
}

/// Runs the full pipeline at each mesh resolution with the time grid fixed.
pub fn spatial_sweep(cfg: &RunConfig, ns: &[usize]) -> Result<SweepOutcome, StepperError> {
    let mut rows = Vec::new();
    for &n in ns {
        let mut c = cfg.clone();
        c.n = n;
        let diag = run(&c)?;
        match diag.errors {
            Some(errors) => rows.push(SweepRow {
                mode: SweepMode::Spatial,
                time_order: c.time_order,
                fe_order: c.fe_order.as_u8(),
                n,
                dt: c.dt,
                errors,
            }),
            None => {
                return Ok(SweepOutcome {
                    rows,
                    failure: diag.failure,
                })
            }
        }
    }
    Ok(SweepOutcome {
        rows,
        failure: None,
    })
}

/// Temporal self-convergence on a fixed complex: each Δt is compared against
/// the same scheme run at Δt/`ref_ratio`. The ratio must be odd so a fine
/// half-integer time coincides with the coarse final half-integer time: all
/// fields are compared at fine step `ratio·N − (ratio−1)/2`.
pub fn temporal_self_sweep(
    cfg: &RunConfig,
    dts: &[f64],
    ref_ratio: usize,
) -> Result<SweepOutcome, StepperError> {
    if ref_ratio < 3 || ref_ratio % 2 == 0 {
        return Err(StepperError::BadConfig(format!(
            "reference ratio must be odd and at least 3 (staggered times of an \
             even ratio never line up), got {ref_ratio}"
        )));
    }
    let mut base = cfg.clone();
    base.dt = cfg.t_final;
    base.steps = 1;
    let disc = build_space(&base)?;

    let mut rows = Vec::new();
    for &dt in dts {
        let (dt, steps) = resolve_time_grid(Some(dt), None, cfg.t_final)?;
        let mut coarse = cfg.clone();
        coarse.dt = dt;
        coarse.steps = steps;
        let sys_c = build_systems(&disc, &coarse)?;
        let diag_c = march(&disc, &sys_c, &coarse, &mut |_, _| {})?;
        if let Some(f) = diag_c.failure {
            return Ok(SweepOutcome {
                rows,
                failure: Some(format!("coarse run at dt = {dt}: {f}")),
            });
        }

        let mut fine = cfg.clone();
        fine.dt = dt / ref_ratio as f64;
        fine.steps = steps * ref_ratio;
        let snap_step = ref_ratio * steps - (ref_ratio - 1) / 2;
        let mut snap: Option<(Mat<f64>, Mat<f64>, Mat<f64>)> = None;
        let sys_f = build_systems(&disc, &fine)?;
        let diag_f = march(&disc, &sys_f, &fine, &mut |_, s| {
            if s.n == snap_step {
                snap = Some((s.p.clone(), s.e.clone(), s.hfield.clone()));
            }
        })?;
        if let Some(f) = diag_f.failure {
            return Ok(SweepOutcome {
                rows,
                failure: Some(format!("reference run at dt = {}: {f}", fine.dt)),
            });
        }
        let (snap_p, snap_e, snap_h) = snap.expect("snapshot step lies inside the fine run");

        let norm = |m: &Mat<f64>, d: &Mat<f64>, w: f64| (w * (d.transpose() * m * d)[(0, 0)]).sqrt();
        let cstate = &diag_c.final_state;
        let p = norm(&disc.mats.m_u, &(&cstate.p - &snap_p), 1.0 / cfg.eps);
        let e = norm(&disc.mats.m_v, &(&cstate.e - &snap_e), cfg.eps);
        let h = norm(&disc.mats.m_w, &(&cstate.hfield - &snap_h), cfg.mu);
        let t_cmp = cfg.t_final - dt / 2.0;
        rows.push(SweepRow {
            mode: SweepMode::Temporal,
            time_order: cfg.time_order,
            fe_order: cfg.fe_order.as_u8(),
            n: cfg.n,
            dt,
            errors: FieldErrors {
                p,
                e,
                h,
                total: p + e + h,
                t_pe: t_cmp,
                t_h: t_cmp,
            },
        });
    }
    Ok(SweepOutcome {
        rows,
        failure: None,
    })
}

// ---------------------------------------------------------------------------
// Slope fitting
// ---------------------------------------------------------------------------

/// Least-squares line through (ln x, ln y); `residual` is the RMS misfit in
/// log space.
#[derive(Debug, Clone, Copy)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

pub fn fit_log_slope(xs: &[f64], ys: &[f64]) -> FitResult {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "a slope needs at least two points");
    let lx: Vec<f64> = xs.iter().map(|&x| x.max(1e-300).ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|&y| y.max(1e-300).ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (lx
        .iter()
        .zip(&ly)
        .map(|(&x, &y)| {
            let d = y - (slope * x + intercept);
            d * d
        })
        .sum::<f64>()
        / n)
        .sqrt();
    FitResult {
        slope,
        intercept,
        residual,
    }
}

/// Per-field convergence slopes of a sweep, fit against h = 1/n (spatial) or
/// Δt (temporal). `fit_residual` is the worst RMS log-misfit of the three.
#[derive(Debug, Clone, Copy)]
pub struct FieldSlopes {
    pub p: f64,
    pub e: f64,
    pub h: f64,
    pub fit_residual: f64,
}

pub fn sweep_slopes(rows: &[SweepRow]) -> FieldSlopes {
    assert!(rows.len() >= 2, "slopes need at least two sweep points");
    let xs: Vec<f64> = rows
        .iter()
        .map(|r| match r.mode {
            SweepMode::Spatial => 1.0 / r.n as f64,
            SweepMode::Temporal => r.dt,
        })
        .collect();
    let p = fit_log_slope(&xs, &rows.iter().map(|r| r.errors.p).collect::<Vec<_>>());
    let e = fit_log_slope(&xs, &rows.iter().map(|r| r.errors.e).collect::<Vec<_>>());
    let h = fit_log_slope(&xs, &rows.iter().map(|r| r.errors.h).collect::<Vec<_>>());
    FieldSlopes {
        p: p.slope,
        e: e.slope,
        h: h.slope,
        fit_residual: p.residual.max(e.residual).max(h.residual),
    }
}
