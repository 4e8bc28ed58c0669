use serde::{Deserialize, Serialize};

use super::checks::{self, CheckOutcome};
use super::extension::{final_dilatation_sweep, DilatationSample, FinalExtension};
use super::{herglotz_boundary, ConstructionState, HerglotzBoundaryTrace};
use crate::analytic::SchlichtFunction;
use crate::conformal::{exterior_map, ExteriorMap, FitOptions};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Resolution and span of a construction run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstructionParams {
    /// Boundary nodes of every exterior map.
    pub n: usize,
    /// Length of the corrected time window `(t1, t1 + tspan]`.
    pub tspan: f64,
    /// Sampled times in the corrected regime.
    pub n_corrected: usize,
    /// Sampled times in the Ahlfors-Weill regime `(0, t1)`.
    pub n_aw: usize,
    /// Largest admissible relative residual of an exterior map.
    pub fit_tol: f64,
    /// Nodes per side of the subharmonicity grid.
    pub subharmonic_grid: usize,
    pub dilatation_radii: usize,
    pub dilatation_angles: usize,
    /// Time step of the finite differences in the PDE and dilatation checks.
    pub fd_step: f64,
}

impl Default for ConstructionParams {
    fn default() -> Self {
        Self {
            n: 512,
            tspan: 5.0,
            n_corrected: 24,
            n_aw: 8,
            fit_tol: 1e-8,
            subharmonic_grid: 200,
            dilatation_radii: 16,
            dilatation_angles: 16,
            fd_step: 1e-3,
        }
    }
}

impl ConstructionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tspan > 0.0) || !self.tspan.is_finite() {
            return Err(Error::Argument(format!("tspan must be positive, got {}", self.tspan)));
        }
        if self.n < 16 || self.n_corrected < 3 || self.n_aw == 0 {
            return Err(Error::Argument("need n >= 16, n_corrected >= 3 and n_aw >= 1".into()));
        }
        if !(self.fit_tol > 0.0) || !(self.fd_step > 0.0) {
            return Err(Error::Argument("fit_tol and fd_step must be positive".into()));
        }
        if self.subharmonic_grid < 8 || self.dilatation_radii < 2 || self.dilatation_angles == 0 {
            return Err(Error::Argument("check grids are too small".into()));
        }
        Ok(())
    }

    pub fn fit_options<T: Real>(&self) -> FitOptions<T> {
        FitOptions { n: self.n, tol: T::lit(self.fit_tol), ..FitOptions::default() }
    }
}

/// Times of the corrected regime: uniform in `e^{-t}` on `(t1, t1 + tspan]`, which
/// concentrates samples where the curves still change shape.
pub fn corrected_times<T: Real>(t1: T, tspan: T, count: usize) -> Vec<T> {
    let (a, b) = ((-t1).exp(), (-(t1 + tspan)).exp());
    (1..=count).map(|i| -(a - (a - b) * T::from_usize_lossy(i) / T::from_usize_lossy(count)).ln()).collect()
}

/// Times of the Ahlfors-Weill regime: midpoints of `count` equal cells of `(0, t1)`.
pub fn aw_times<T: Real>(t1: T, count: usize) -> Vec<T> {
    (0..count)
        .map(|i| t1 * (T::from_usize_lossy(i) + T::lit(0.5)) / T::from_usize_lossy(count))
        .collect()
}

/// Everything a run computes before the checks.
#[derive(Clone, Debug)]
pub struct Construction<T: Real> {
    pub state: ConstructionState<T>,
    pub params: ConstructionParams,
    pub aw_times: Vec<T>,
    pub aw_k_hat: Vec<T>,
    pub times: Vec<T>,
    pub maps: Vec<ExteriorMap<T>>,
    pub traces: Vec<HerglotzBoundaryTrace<T>>,
    /// `max(3 q_hat, sup k_hat)` over the corrected regime.
    pub k0: T,
}

impl<T: Real> Construction<T> {
    /// Builds the state, sweeps both regimes and fits the exterior maps.
    pub fn build(f: SchlichtFunction<T>, q: Option<T>, params: ConstructionParams) -> Result<Self> {
        params.validate()?;
        let state = ConstructionState::new(f, q)?;
        let aw_times = aw_times(state.t1, params.n_aw);
        let aw_k_hat = aw_times.iter().map(|&t| state.aw_k_hat(t, params.n)).collect::<Result<Vec<_>>>()?;
        let times = corrected_times(state.t1, T::lit(params.tspan), params.n_corrected);
        let opts = params.fit_options();
        let mut maps: Vec<ExteriorMap<T>> = Vec::with_capacity(times.len());
        for &t in &times {
            let curve = state.curve_at(t)?;
            let map = exterior_map(&curve, &opts, maps.last()).map_err(|e| stage(e, "exterior map", t))?;
            maps.push(map);
        }
        let traces = times
            .iter()
            .zip(&maps)
            .map(|(&t, m)| herglotz_boundary(&state, t, m))
            .collect::<Result<Vec<_>>>()?;
        let sup = traces.iter().fold(T::zero(), |a, tr| a.max(tr.k_hat));
        let k0 = sup.max(T::lit(3.0) * state.q_hat());
        Ok(Self { state, params, aw_times, aw_k_hat, times, maps, traces, k0 })
    }

    /// Largest relative residual over the fitted maps.
    pub fn residual_budget(&self) -> T {
        self.maps.iter().fold(T::zero(), |a, m| a.max(m.residual))
    }

    /// Indices of the three times used by the per-time checks: first, middle and last.
    pub fn check_indices(&self) -> [usize; 3] {
        let n = self.times.len();
        [0, n / 2, n - 1]
    }

    /// `q` the bound constants are evaluated at: the `q` the construction runs at, since
    /// `t0`, `t1` and `z0` all depend on it.
    pub fn bound_q(&self) -> T {
        self.state.q
    }
}

pub(crate) fn stage(e: Error, what: &str, t: impl Real) -> Error {
    match e {
        Error::NoConvergence { what: w, iterations, last, hint } => Error::NoConvergence {
            what: format!("{what} at t = {:.6}: {w}", t.f64()),
            iterations,
            last,
            hint,
        },
        other => other,
    }
}

/// One point of the `k_hat` profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub t: f64,
    pub corrected: bool,
    pub k_hat: f64,
}

/// Per-time summary of the corrected regime.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub t: f64,
    pub k_hat: f64,
    pub capacity: f64,
    pub diameter: f64,
    pub min_re_p: f64,
    pub max_re_p: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Outcome of a construction run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionReport {
    pub q: f64,
    pub q_hat: f64,
    pub q_pre_schwarzian: f64,
    /// `q` the bound constants of the checks use.
    pub bound_q: f64,
    pub z0: [f64; 2],
    pub t0: f64,
    pub t1: f64,
    pub t2: f64,
    pub profile: Vec<ProfilePoint>,
    pub corrected: Vec<TraceSummary>,
    pub k0: f64,
    pub residual_budget: f64,
    pub checks: Vec<CheckOutcome>,
    pub dilatation: Vec<DilatationSample>,
    /// `k0 < 1` and every asserted check passed.
    pub accepted: bool,
}

impl ConstructionReport {
    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed_checks(&self) -> Vec<&CheckOutcome> {
        self.checks.iter().filter(|c| c.asserted && !c.passed).collect()
    }
}

/// Builds the construction and runs every check on it.
pub fn run_construction<T: Real>(
    f: SchlichtFunction<T>,
    q: Option<T>,
    params: ConstructionParams,
) -> Result<(Construction<T>, ConstructionReport)> {
    let c = Construction::build(f, q, params)?;
    let report = report_for(&c)?;
    Ok((c, report))
}

/// Runs the checks on a built construction.
pub fn report_for<T: Real>(c: &Construction<T>) -> Result<ConstructionReport> {
    let s = &c.state;
    let mut outcomes = vec![
        checks::aw_becker(c),
        checks::corrected_becker(c),
        checks::z0_bound(c),
        checks::gluing(c)?,
        checks::winding(c)?,
        checks::nesting(c)?,
        checks::curvature(c)?,
        checks::front_distance(c)?,
        checks::capacity_decay(c)?,
        checks::capacity_diameter(c),
        checks::diameter_decay(c),
    ];
    outcomes.extend(checks::distortion_and_kuhnau(c)?);
    outcomes.push(checks::pde_residual(c)?);
    outcomes.extend(checks::subharmonicity(c)?);
    outcomes.extend(checks::tangent_disks(c)?);
    outcomes.push(checks::henkin(c)?);
    outcomes.push(checks::continuity_modulus(c));
    let ext = FinalExtension::new(c);
    let dilatation = final_dilatation_sweep(&ext)?;
    outcomes.push(checks::final_dilatation(c, &dilatation));

    let mut profile: Vec<ProfilePoint> = c
        .aw_times
        .iter()
        .zip(&c.aw_k_hat)
        .map(|(&t, &k)| ProfilePoint { t: t.f64(), corrected: false, k_hat: k.f64() })
        .collect();
    profile.extend(c.traces.iter().map(|tr| ProfilePoint { t: tr.t.f64(), corrected: true, k_hat: tr.k_hat.f64() }));
    let corrected = c
        .traces
        .iter()
        .zip(&c.maps)
        .map(|(tr, m)| TraceSummary {
            t: tr.t.f64(),
            k_hat: tr.k_hat.f64(),
            capacity: m.capacity.f64(),
            diameter: m.diameter.f64(),
            min_re_p: tr.re_p.iter().fold(f64::INFINITY, |a, v| a.min(v.f64())),
            max_re_p: tr.re_p.iter().fold(0.0, |a, v| a.max(v.f64())),
            residual: m.residual.f64(),
            iterations: m.iterations,
        })
        .collect();
    let k0 = c.k0.f64();
    let accepted = k0 < 1.0 && outcomes.iter().all(|o| o.passed || !o.asserted);
    Ok(ConstructionReport {
        q: s.q.f64(),
        q_hat: s.q_hat().f64(),
        q_pre_schwarzian: s.estimate.pre_schwarzian.f64(),
        bound_q: c.bound_q().f64(),
        z0: [s.z0.re.f64(), s.z0.im.f64()],
        t0: s.t0.f64(),
        t1: s.t1.f64(),
        t2: s.t2.f64(),
        profile,
        corrected,
        k0,
        residual_budget: c.residual_budget().f64(),
        checks: outcomes,
        dilatation,
        accepted,
    })
}
