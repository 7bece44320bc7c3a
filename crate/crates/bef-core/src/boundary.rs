//! Boundary-effect evaluation: `mu_n(r)`, reduced-state convergence
//! `eta_A`, windowed profiles over `(n, r)`, and decay-law fits.
//!
//! `mu_n(r) = sqrt(1 - F)` where `F` is the maximal overlap between the
//! n-site ground state and any unitary within graph distance `< r` of the
//! new site applied to the (n-1)-site ground state with a fresh spin. The
//! supremum over all `n` is replaced by a maximum over a finite window, so
//! every profile is a lower estimate of the true boundary-effect function.
//!
//! Computed `mu` values below [`MU_NOISE_FLOOR`] are clamped to zero:
//! `mu = sqrt(1 - F)` turns the `~1e-14` double-precision error of a
//! fidelity sum into `~1e-7` of spurious `mu`, so smaller values carry no
//! signal.

use std::collections::BTreeMap;
use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex};

use ndarray::{s, Array1};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigensolve::{self, EigError, GroundSolution, LanczosOptions};
use crate::model::{
    build_hamiltonian, build_prior_hamiltonian, ChainGeometry, ModelError, ModelSpec, SiteOrdering,
};
use crate::statetools::{self, StateError};

/// Clamp threshold for reported `mu` values (double-precision fidelity
/// noise floor).
pub const MU_NOISE_FLOOR: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum BoundaryError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eig(#[from] EigError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("ground state at n = {n} is degenerate (gap {gap:.3e}); instance excluded")]
    DegenerateGround { n: usize, gap: f64 },
    #[error("decay fit needs at least {needed} points above the noise floor, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("invalid range: {0}")]
    BadRange(String),
}

/// State of the fresh spin appended in the `mu` comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FreshSpin {
    Up,
    Down,
}

/// Shared solver configuration plus a memo of ground solutions keyed by
/// `(model, geometry, solver options)`. Read-mostly; safe to share across
/// worker threads.
pub struct SolverContext {
    opts: LanczosOptions,
    allow_degenerate: bool,
    cache: Mutex<HashMap<u64, Arc<GroundSolution>>>,
}

impl SolverContext {
    pub fn new(opts: LanczosOptions) -> Self {
        Self {
            opts,
            allow_degenerate: false,
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Documented override: keep going when a ground state is flagged
    /// degenerate. Off by default; inequality suites exclude such instances.
    pub fn allow_degenerate(mut self, allow: bool) -> Self {
        self.allow_degenerate = allow;
        self
    }

    pub fn options(&self) -> &LanczosOptions {
        &self.opts
    }

    fn key(&self, spec: &ModelSpec, geom: &ChainGeometry) -> u64 {
        let mut h = DefaultHasher::new();
        spec.fingerprint().hash(&mut h);
        geom.positions().hash(&mut h);
        self.opts.tol.to_bits().hash(&mut h);
        self.opts.seed.hash(&mut h);
        self.opts.max_iter.hash(&mut h);
        self.opts.degeneracy_tol.to_bits().hash(&mut h);
        h.finish()
    }

    /// Ground solution of the full `n`-site system.
    pub fn ground_full(
        &self,
        spec: &ModelSpec,
        ordering: SiteOrdering,
        n: usize,
    ) -> Result<Arc<GroundSolution>, BoundaryError> {
        let geom = ChainGeometry::full(ordering, n)?;
        let key = self.key(spec, &geom);
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let h = build_hamiltonian(spec, n, ordering)?;
        let sol = Arc::new(eigensolve::ground_lanczos(&h, &self.opts)?);
        self.cache.lock().unwrap().insert(key, sol.clone());
        Ok(sol)
    }

    /// Ground solution of the `(n-1)`-site system the `n`-site system
    /// extends (geometry inherited from the full build).
    pub fn ground_prior(
        &self,
        spec: &ModelSpec,
        ordering: SiteOrdering,
        n: usize,
    ) -> Result<Arc<GroundSolution>, BoundaryError> {
        let geom = ChainGeometry::prior(ordering, n)?;
        let key = self.key(spec, &geom);
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let h = build_prior_hamiltonian(spec, n, ordering)?;
        let sol = Arc::new(eigensolve::ground_lanczos(&h, &self.opts)?);
        self.cache.lock().unwrap().insert(key, sol.clone());
        Ok(sol)
    }

    fn require_unique(&self, sol: &GroundSolution, n: usize) -> Result<(), BoundaryError> {
        if sol.degenerate && !self.allow_degenerate {
            return Err(BoundaryError::DegenerateGround { n, gap: sol.gap });
        }
        Ok(())
    }
}

fn embed_with_fresh(small: &Array1<C64>, fresh: FreshSpin) -> Array1<C64> {
    let half = small.len();
    let mut v = Array1::<C64>::zeros(2 * half);
    match fresh {
        FreshSpin::Up => v.slice_mut(s![..half]).assign(small),
        FreshSpin::Down => v.slice_mut(s![half..]).assign(small),
    }
    v
}

/// `mu_n(r)` with the fresh spin fixed to the given basis state. The value
/// is provably independent of this choice for `r >= 1`; the parameter exists
/// so tests can exercise that.
pub fn mu_n_r_with_fresh(
    ctx: &SolverContext,
    spec: &ModelSpec,
    n: usize,
    r: usize,
    ordering: SiteOrdering,
    fresh: FreshSpin,
) -> Result<f64, BoundaryError> {
    if r == 0 {
        return Err(BoundaryError::BadRange("mu needs r >= 1".into()));
    }
    let geometry = ChainGeometry::full(ordering, n)?;
    let region = geometry.ball(n, r)?;
    let full = ctx.ground_full(spec, ordering, n)?;
    let prior = ctx.ground_prior(spec, ordering, n)?;
    ctx.require_unique(&full, n)?;
    ctx.require_unique(&prior, n - 1)?;
    let phi = embed_with_fresh(&prior.state, fresh);
    let f = statetools::cross_fidelity_pure(&full.state, &phi, n, &region)?;
    let mu = (1.0 - f).clamp(0.0, 1.0).sqrt();
    Ok(if mu < MU_NOISE_FLOOR { 0.0 } else { mu })
}

/// Boundary-effect value at system size `n` and radius `r`.
pub fn mu_n_r(
    ctx: &SolverContext,
    spec: &ModelSpec,
    n: usize,
    r: usize,
    ordering: SiteOrdering,
) -> Result<f64, BoundaryError> {
    mu_n_r_with_fresh(ctx, spec, n, r, ordering, FreshSpin::Up)
}

/// Half trace distance between the reductions onto sites `1..=m` of the
/// `n`-site and `(n-1)`-site ground states: how much region `A` still moves
/// when the system grows.
pub fn eta_a(
    ctx: &SolverContext,
    spec: &ModelSpec,
    n: usize,
    m: usize,
    ordering: SiteOrdering,
) -> Result<f64, BoundaryError> {
    if m == 0 || m >= n {
        return Err(BoundaryError::BadRange(format!(
            "eta needs 1 <= m < n, got m = {m}, n = {n}"
        )));
    }
    let full = ctx.ground_full(spec, ordering, n)?;
    let prior = ctx.ground_prior(spec, ordering, n)?;
    ctx.require_unique(&full, n)?;
    ctx.require_unique(&prior, n - 1)?;
    let region: Vec<usize> = (1..=m).collect();
    let rho_n = statetools::reduced_density(&full.state, n, &region)?;
    let rho_prev = statetools::reduced_density(&prior.state, n - 1, &region)?;
    Ok(statetools::trace_distance(&rho_n, &rho_prev)?)
}

/// One `(n, r)` cell of a boundary profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuEntry {
    pub n: usize,
    pub r: usize,
    pub mu: f64,
}

/// Table of `mu_n(r)` over a window of system sizes, with the windowed
/// maximum `mu_hat(r)`. A lower estimate of the true supremum over all `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryProfile {
    pub model_id: String,
    pub ordering: SiteOrdering,
    pub entries: Vec<MuEntry>,
    pub mu_hat: BTreeMap<usize, f64>,
    pub n_window: (usize, usize),
    pub noise_floor: f64,
}

impl BoundaryProfile {
    /// Worst violation of `mu_n(r+1) <= mu_n(r)` across the table; a
    /// correct implementation keeps this within numerical tolerance.
    pub fn monotonicity_violation(&self) -> f64 {
        let mut worst = 0.0f64;
        let by_n: BTreeMap<usize, Vec<&MuEntry>> =
            self.entries.iter().fold(BTreeMap::new(), |mut acc, e| {
                acc.entry(e.n).or_default().push(e);
                acc
            });
        for (_, mut row) in by_n {
            row.sort_by_key(|e| e.r);
            for pair in row.windows(2) {
                worst = worst.max(pair[1].mu - pair[0].mu);
            }
        }
        worst
    }

    /// `(r, mu_hat(r))` points usable for decay fitting.
    pub fn fit_points(&self) -> Vec<(usize, f64)> {
        self.mu_hat
            .iter()
            .filter(|(_, &mu)| mu > self.noise_floor)
            .map(|(&r, &mu)| (r, mu))
            .collect()
    }
}

/// Compute `mu_n(r)` over the inclusive ranges, assembling the windowed
/// maximum. Ground solutions are solved once per geometry and shared.
pub fn boundary_profile(
    ctx: &SolverContext,
    spec: &ModelSpec,
    ordering: SiteOrdering,
    n_range: (usize, usize),
    r_range: (usize, usize),
) -> Result<BoundaryProfile, BoundaryError> {
    let (n_min, n_max) = n_range;
    let (r_min, r_max) = r_range;
    if n_min < 2 || n_min > n_max {
        return Err(BoundaryError::BadRange(format!(
            "need 2 <= n_min <= n_max, got {n_min}..={n_max}"
        )));
    }
    if r_min < 1 || r_min > r_max {
        return Err(BoundaryError::BadRange(format!(
            "need 1 <= r_min <= r_max, got {r_min}..={r_max}"
        )));
    }
    // Solve phase: populate the cache once per distinct geometry, largest
    // first so the expensive solves start immediately.
    let mut sizes: Vec<usize> = (n_min..=n_max).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
        .par_iter()
        .map(|&n| {
            ctx.ground_full(spec, ordering, n)?;
            ctx.ground_prior(spec, ordering, n)?;
            Ok(())
        })
        .collect::<Result<Vec<()>, BoundaryError>>()?;
    // Cell phase: every (n, r) combination against the shared cache.
    let cells: Vec<(usize, usize)> = (n_min..=n_max)
        .flat_map(|n| (r_min..=r_max).map(move |r| (n, r)))
        .collect();
    let mut entries: Vec<MuEntry> = cells
        .par_iter()
        .map(|&(n, r)| {
            let mu = mu_n_r(ctx, spec, n, r, ordering)?;
            Ok(MuEntry { n, r, mu })
        })
        .collect::<Result<Vec<_>, BoundaryError>>()?;
    entries.sort_by_key(|e| (e.n, e.r));
    let mut mu_hat: BTreeMap<usize, f64> = BTreeMap::new();
    for e in &entries {
        let slot = mu_hat.entry(e.r).or_insert(0.0);
        *slot = slot.max(e.mu);
    }
    Ok(BoundaryProfile {
        model_id: spec.display_id(),
        ordering,
        entries,
        mu_hat,
        n_window: (n_min, n_max),
        noise_floor: MU_NOISE_FLOOR,
    })
}

/// Fitted decay law for a profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    Exponential,
    PowerLaw,
}

impl std::fmt::Display for DecayModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DecayModel::Exponential => write!(f, "exponential"),
            DecayModel::PowerLaw => write!(f, "power_law"),
        }
    }
}

/// Least-squares fit of `mu_hat` against one decay model. For
/// `Exponential` the rate is the decay constant per graph-distance unit;
/// for `PowerLaw` it is the exponent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub model: DecayModel,
    pub amplitude: f64,
    pub rate: f64,
    pub fit_window: (usize, usize),
    pub rms_log_residual: f64,
}

/// Both decay fits plus the better-residual choice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFits {
    pub preferred: DecayModel,
    pub exponential: DecayFit,
    pub power_law: DecayFit,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, intercept, rms)
}

fn fit_suffix(points: &[(usize, f64)], model: DecayModel) -> DecayFit {
    let log_mu: Vec<f64> = points.iter().map(|&(_, mu)| mu.ln()).collect();
    let xs: Vec<f64> = points
        .iter()
        .map(|&(r, _)| match model {
            DecayModel::Exponential => r as f64,
            DecayModel::PowerLaw => (r as f64).ln(),
        })
        .collect();
    let (slope, intercept, rms) = least_squares(&xs, &log_mu);
    DecayFit {
        model,
        amplitude: intercept.exp(),
        rate: -slope,
        fit_window: (points[0].0, points[points.len() - 1].0),
        rms_log_residual: rms,
    }
}

/// Fit `mu_hat(r)` with both decay models on the points above the noise
/// floor. Needs at least four usable points.
///
/// Short-distance values sit above the asymptotic decay law, so each model
/// is fitted on every suffix window of at least four points and keeps the
/// window with the smallest log residual (ties go to the longest window);
/// the chosen window is recorded in `fit_window`.
pub fn fit_decay(profile: &BoundaryProfile) -> Result<DecayFits, BoundaryError> {
    let points = profile.fit_points();
    if points.len() < 4 {
        return Err(BoundaryError::InsufficientPoints {
            needed: 4,
            got: points.len(),
        });
    }
    let best = |model: DecayModel| -> DecayFit {
        let mut best: Option<DecayFit> = None;
        for start in 0..=points.len() - 4 {
            let fit = fit_suffix(&points[start..], model);
            if best
                .as_ref()
                .is_none_or(|b| fit.rms_log_residual < b.rms_log_residual)
            {
                best = Some(fit);
            }
        }
        best.expect("at least one window")
    };
    let exponential = best(DecayModel::Exponential);
    let power_law = best(DecayModel::PowerLaw);
    let preferred = if exponential.rms_log_residual <= power_law.rms_log_residual {
        DecayModel::Exponential
    } else {
        DecayModel::PowerLaw
    };
    Ok(DecayFits {
        preferred,
        exponential,
        power_law,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::spectrum_dense;
    use crate::model::build_hamiltonian;

    fn ctx() -> SolverContext {
        SolverContext::new(LanczosOptions::default())
    }

    #[test]
    fn decoupled_model_has_zero_mu() {
        let spec = ModelSpec::tfim(0.0, 1.0);
        let c = ctx();
        for r in 1..=3 {
            let mu = mu_n_r(&c, &spec, 8, r, SiteOrdering::Append).unwrap();
            assert_eq!(mu, 0.0, "decoupled mu at r = {r} not clamped to zero");
        }
    }

    #[test]
    fn mu_is_bounded_and_non_increasing() {
        let spec = ModelSpec::tfim(1.0, 2.0);
        let c = ctx();
        let mut previous = f64::INFINITY;
        for r in 1..=5 {
            let mu = mu_n_r(&c, &spec, 9, r, SiteOrdering::Append).unwrap();
            assert!((0.0..=1.0).contains(&mu));
            assert!(mu <= previous + 1e-9, "mu increased at r = {r}");
            previous = mu;
        }
    }

    #[test]
    fn mu_matches_dense_ground_state_recomputation() {
        // Same quantity from an independent path: dense eigenvectors at
        // n = 10 instead of Lanczos ones.
        let spec = ModelSpec::tfim(1.0, 2.0);
        let ordering = SiteOrdering::Append;
        let n = 10;
        let c = ctx();
        let dense_full = spectrum_dense(&build_hamiltonian(&spec, n, ordering).unwrap(), 1)
            .unwrap()
            .remove(0)
            .1;
        let dense_prior = spectrum_dense(&build_hamiltonian(&spec, n - 1, ordering).unwrap(), 1)
            .unwrap()
            .remove(0)
            .1;
        for r in 1..=5 {
            let mu = mu_n_r(&c, &spec, n, r, ordering).unwrap();
            let region = ChainGeometry::full(ordering, n).unwrap().ball(n, r).unwrap();
            let phi = embed_with_fresh(&dense_prior, FreshSpin::Up);
            let f = crate::statetools::cross_fidelity_pure(&dense_full, &phi, n, &region).unwrap();
            let mu_dense = (1.0 - f).clamp(0.0, 1.0).sqrt();
            let mu_dense = if mu_dense < MU_NOISE_FLOOR { 0.0 } else { mu_dense };
            assert!(
                (mu - mu_dense).abs() < 1e-9,
                "r = {r}: lanczos {mu} vs dense {mu_dense}"
            );
        }
    }

    #[test]
    fn mu_strictly_decreases_on_the_gapped_chain() {
        let spec = ModelSpec::tfim(1.0, 2.0);
        let c = ctx();
        let values: Vec<f64> = (1..=6)
            .map(|r| mu_n_r(&c, &spec, 14, r, SiteOrdering::Append).unwrap())
            .collect();
        for pair in values.windows(2) {
            assert!(
                pair[1] < pair[0],
                "expected strict decay, got {values:?}"
            );
        }
    }

    #[test]
    fn mu_does_not_depend_on_the_fresh_spin_state() {
        let spec = ModelSpec::tfim(1.0, 1.5);
        let c = ctx();
        for r in 1..=3 {
            let up = mu_n_r_with_fresh(&c, &spec, 8, r, SiteOrdering::Append, FreshSpin::Up)
                .unwrap();
            let down = mu_n_r_with_fresh(&c, &spec, 8, r, SiteOrdering::Append, FreshSpin::Down)
                .unwrap();
            assert!((up - down).abs() < 1e-10, "r = {r}: {up} vs {down}");
        }
    }

    #[test]
    fn degenerate_ground_states_are_refused() {
        let spec = ModelSpec::tfim(1.0, 0.0);
        let c = ctx();
        assert!(matches!(
            mu_n_r(&c, &spec, 4, 1, SiteOrdering::Append),
            Err(BoundaryError::DegenerateGround { .. })
        ));
        let tolerant = SolverContext::new(LanczosOptions::default()).allow_degenerate(true);
        assert!(mu_n_r(&tolerant, &spec, 4, 1, SiteOrdering::Append).is_ok());
    }

    #[test]
    fn eta_vanishes_for_the_decoupled_model() {
        let spec = ModelSpec::tfim(0.0, 1.3);
        let eta = eta_a(&ctx(), &spec, 8, 4, SiteOrdering::Append).unwrap();
        assert!(eta < 1e-12, "decoupled eta = {eta:.3e}");
    }

    #[test]
    fn eta_decreases_with_system_size_on_the_gapped_chain() {
        let spec = ModelSpec::tfim(1.0, 2.0);
        let c = ctx();
        let mut previous = f64::INFINITY;
        for n in [8usize, 10, 12] {
            let eta = eta_a(&c, &spec, n, 5, SiteOrdering::Append).unwrap();
            assert!(eta < previous, "eta not decreasing at n = {n}");
            previous = eta;
        }
    }

    #[test]
    fn profile_assembles_windowed_maximum() {
        let spec = ModelSpec::tfim(1.0, 2.0);
        let profile =
            boundary_profile(&ctx(), &spec, SiteOrdering::Append, (8, 10), (1, 4)).unwrap();
        assert_eq!(profile.entries.len(), 3 * 4);
        assert_eq!(profile.n_window, (8, 10));
        for (&r, &mu) in &profile.mu_hat {
            let max_at_r = profile
                .entries
                .iter()
                .filter(|e| e.r == r)
                .map(|e| e.mu)
                .fold(0.0f64, f64::max);
            assert_eq!(mu, max_at_r);
        }
        assert!(profile.monotonicity_violation() <= 1e-9);
    }

    #[test]
    fn bridge_profile_is_well_behaved() {
        let spec = ModelSpec::tfim(1.0, 2.0);
        let profile = boundary_profile(
            &ctx(),
            &spec,
            SiteOrdering::Bridge { left: 3 },
            (8, 9),
            (1, 3),
        )
        .unwrap();
        assert!(profile.monotonicity_violation() <= 1e-9);
        assert!(profile.entries.iter().all(|e| (0.0..=1.0).contains(&e.mu)));
    }

    #[test]
    fn exact_synthetic_profiles_fit_exactly() {
        let mut mu_hat = BTreeMap::new();
        for r in 1..=8usize {
            mu_hat.insert(r, 0.5 * (-0.7 * r as f64).exp());
        }
        let profile = BoundaryProfile {
            model_id: "synthetic".into(),
            ordering: SiteOrdering::Append,
            entries: Vec::new(),
            mu_hat,
            n_window: (0, 0),
            noise_floor: MU_NOISE_FLOOR,
        };
        let fits = fit_decay(&profile).unwrap();
        assert_eq!(fits.preferred, DecayModel::Exponential);
        assert!((fits.exponential.rate - 0.7).abs() < 1e-6);
        assert!((fits.exponential.amplitude - 0.5).abs() < 1e-6);
        assert!(fits.exponential.rms_log_residual < 1e-9);

        let mut mu_hat = BTreeMap::new();
        for r in 1..=8usize {
            mu_hat.insert(r, (r as f64).powi(-2));
        }
        let profile = BoundaryProfile {
            model_id: "synthetic_pow".into(),
            ordering: SiteOrdering::Append,
            entries: Vec::new(),
            mu_hat,
            n_window: (0, 0),
            noise_floor: MU_NOISE_FLOOR,
        };
        let fits = fit_decay(&profile).unwrap();
        assert_eq!(fits.preferred, DecayModel::PowerLaw);
        assert!((fits.power_law.rate - 2.0).abs() < 1e-6);
        assert!(fits.power_law.rms_log_residual < 1e-9);
    }

    #[test]
    fn all_zero_profiles_cannot_be_fitted() {
        let spec = ModelSpec::tfim(0.0, 1.0);
        let profile =
            boundary_profile(&ctx(), &spec, SiteOrdering::Append, (6, 8), (1, 5)).unwrap();
        assert!(profile.entries.iter().all(|e| e.mu == 0.0));
        assert!(matches!(
            fit_decay(&profile),
            Err(BoundaryError::InsufficientPoints { .. })
        ));
    }
}
