//! ADMM state machine for the STAR and STAR-S models.
//!
//! One stage updates the blocks in the order G -> (S) -> B -> L -> A -> P:
//!
//! * **G** — exact minimizer of the coefficient-image subproblem: a
//!   Hadamard weighting (the diagonal inverse from the patch coverage
//!   counts) applied to the sum of the aggregated dictionary
//!   reconstructions and the data projection `(Y - S) ×₃ Aᵀ`.
//! * **S** (STAR-S only) — soft-threshold of the data residual
//!   `Y - G ×₃ A` with threshold mu.
//! * **B** — ISTA steps on the per-patch quadratic
//!   `1/2 ||H B - (lambda RᵢG + beta Lᵢ + Pᵢ)||² + lambda*gamma1*||B||₁`
//!   with `H = beta*I + lambda*Tucker(.)`; each step is a gradient move
//!   `B + (1/l) Hᵀ(target - H B)` followed by soft-thresholding at
//!   `lambda*gamma1/l`.
//! * **L** — tensor SVT of `Bᵢ - Pᵢ/beta` at threshold
//!   `lambda*gamma2/beta`.
//! * **A** — orthogonal Procrustes: `A = U Vᵀ` from the SVD of
//!   `unfold(Y_eff, 3) · unfold(G, 3)ᵀ`.
//! * **P** — dual ascent `Pᵢ += beta (Lᵢ - Bᵢ)`.
//!
//! Classical mode repeats one parameter set until the relative primal
//! residual `||L - B||_F / max(1, ||B||_F)` drops below `tol`; unrolled
//! mode runs exactly K stages with per-stage parameters and a single
//! inner ISTA step. Both modes execute the same stage code, so a
//! constant schedule and a forced iteration count produce bit-identical
//! results.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::dictionary::{tucker_apply, DictionarySet};
use crate::error::Error;
use crate::linalg::{self, spectral_norm};
use crate::patches::{self, CoverageWeights, PatchLayout};
use crate::prox::{self, soft_threshold, TensorNorm};
use crate::tensor::{mode_product, unfold, Cube, Matrix};
use crate::Result;

/// Initialization value of every stage scalar in the default schedule.
pub const DEFAULT_STAGE_SCALAR: f64 = 0.02;
/// Stage count of the default schedule.
pub const DEFAULT_STAGE_COUNT: usize = 9;
/// Power-iteration count used when the step bound is derived on the fly.
const LIPSCHITZ_PROBE_ITERS: usize = 50;

/// Which model to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Star,
    StarS,
}

/// Solver driving mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Repeat one parameter set to convergence.
    Classical,
    /// Run the schedule's stages exactly once each.
    Unrolled,
}

/// Where the ISTA step bound comes from in classical mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LipschitzSource {
    /// Power-iteration bound on `||H||²` (with the 1.05 safety factor).
    /// ISTA needs `1/l <= 1/||H||²` to descend.
    #[default]
    Auto,
    /// Take the schedule's `lipschitz` field verbatim.
    Schedule,
}

/// One stage's scalar parameters plus an optional dictionary override.
#[derive(Debug, Clone)]
pub struct StageParams {
    pub lambda: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub beta: f64,
    /// Sparse-noise threshold; required by STAR-S, unused by STAR.
    pub mu: Option<f64>,
    pub lipschitz: f64,
    pub dictionaries: Option<DictionarySet>,
}

impl StageParams {
    /// Uniform stage with every scalar set to `value`.
    pub fn uniform(value: f64, model: Model) -> Self {
        Self {
            lambda: value,
            gamma1: value,
            gamma2: value,
            beta: value,
            mu: match model {
                Model::Star => None,
                Model::StarS => Some(value),
            },
            lipschitz: value,
            dictionaries: None,
        }
    }

    pub fn validate(&self, model: Model, index: usize) -> Result<()> {
        let mut scalars = vec![
            ("lambda", self.lambda),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("beta", self.beta),
            ("lipschitz", self.lipschitz),
        ];
        match (model, self.mu) {
            (Model::StarS, None) => {
                return Err(Error::Param(format!("stage {index}: star_s requires mu")))
            }
            (_, Some(mu)) => scalars.push(("mu", mu)),
            (Model::Star, None) => {}
        }
        for (name, v) in scalars {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Param(format!(
                    "stage {index}: {name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Ordered list of stage parameters.
#[derive(Debug, Clone)]
pub struct Schedule {
    pub model: Model,
    pub stages: Vec<StageParams>,
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::Param("schedule must have at least one stage".into()));
        }
        for (i, s) in self.stages.iter().enumerate() {
            s.validate(self.model, i)?;
        }
        Ok(())
    }
}

/// Nine stages, every scalar 0.02, shared DCT dictionaries.
pub fn default_schedule(model: Model) -> Schedule {
    Schedule {
        model,
        stages: vec![StageParams::uniform(DEFAULT_STAGE_SCALAR, model); DEFAULT_STAGE_COUNT],
    }
}

/// Full ADMM state carried across stages.
#[derive(Debug, Clone)]
pub struct RciState {
    /// Coefficient image, n1 x n2 x n4.
    pub g: Cube,
    /// Orthonormal spectral basis, n3 x n4.
    pub a: Matrix,
    /// Per-patch sparse codes.
    pub b: Vec<Cube>,
    /// Per-patch low-rank auxiliaries.
    pub l_aux: Vec<Cube>,
    /// Per-patch multipliers.
    pub p: Vec<Cube>,
    /// Sparse noise estimate (STAR-S only).
    pub s: Option<Cube>,
    pub layout: PatchLayout,
    pub weights: CoverageWeights,
    /// Per-voxel patch coverage counts (weights are derived from these
    /// whenever the stage lambda changes).
    pub coverage: Cube,
}

impl RciState {
    /// Rebuilds the diagonal G-block weights for the given lambda.
    pub fn refresh_weights(&mut self, lambda: f64) {
        if self.weights.lambda != lambda {
            self.weights = CoverageWeights {
                lambda,
                weights: self.coverage.map(|c| 1.0 / (1.0 + lambda * c)),
            };
        }
    }
}

/// Per-solve diagnostics.
#[derive(Debug, Clone, Default)]
pub struct SolveReport {
    /// Stages executed.
    pub iterations: usize,
    /// Relative primal residual `||L-B||_F / max(1, ||B||_F)` per stage
    /// (the classical-mode stopping signal).
    pub residuals: Vec<f64>,
    /// Objective value per stage (split form: L replaces B in the
    /// nuclear term).
    pub objective: Vec<f64>,
    /// Wall time in milliseconds (0 when built without `std`).
    pub wall_ms: f64,
    /// Stages where the Procrustes cross-product was degenerate and the
    /// previous basis was kept.
    pub degenerate_a_stages: Vec<usize>,
}

/// Solver knobs that are not per-stage parameters.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Subspace rank n4 (1 <= n4 <= n3).
    pub rank: usize,
    pub patch: (usize, usize, usize),
    pub stride: (usize, usize, usize),
    /// Classical-mode stop threshold on the relative primal residual.
    pub tol: f64,
    /// Classical-mode stage cap.
    pub max_iters: usize,
    /// Classical-mode inner ISTA steps per stage (unrolled always uses 1).
    pub inner_iters: usize,
    /// Classical-mode step-bound source (unrolled always uses the
    /// schedule's value).
    pub lipschitz: LipschitzSource,
    pub tensor_norm: TensorNorm,
    /// STAR-S Procrustes: fit the basis to `Y - S` (true) or to raw `Y`.
    pub a_block_sparse_corrected: bool,
    /// Seed for the step-bound power iteration probe.
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            rank: 9,
            patch: (9, 9, 9),
            stride: (6, 6, 6),
            tol: 1e-4,
            max_iters: 100,
            inner_iters: 10,
            lipschitz: LipschitzSource::Auto,
            tensor_norm: TensorNorm::TSvd,
            a_block_sparse_corrected: true,
            seed: 0,
        }
    }
}

/// Builds the initial state: the basis from the top-n4 left singular
/// vectors of the mode-3 unfolding, `G = Y ×₃ Aᵀ`, all patch variables
/// zero, `S = 0` for STAR-S.
pub fn init_state(
    y: &Cube,
    rank: usize,
    patch: (usize, usize, usize),
    stride: (usize, usize, usize),
    model: Model,
) -> Result<RciState> {
    y.ensure_finite("input cube")?;
    let (n1, n2, n3) = y.dims();
    if rank == 0 || rank > n3 || rank > n1 * n2 {
        return Err(Error::Param(format!(
            "rank must satisfy 1 <= rank <= min(n3, n1*n2) = {}, got {rank}",
            n3.min(n1 * n2)
        )));
    }
    let y3 = unfold(y, 3);
    let decomp = linalg::svd(&y3)?;
    let mut a = Matrix::zeros(n3, rank)?;
    for c in 0..rank {
        for r in 0..n3 {
            a.set(r, c, decomp.u.get(r, c));
        }
    }
    let g = mode_product(y, &a.transpose(), 3)?;
    let layout = patches::plan_patches(g.dims(), patch, stride)?;
    let coverage = patches::coverage_counts(&layout);
    let weights = patches::coverage_weights(&layout, 0.0)?;
    let count = layout.patch_count();
    let zero_patch = Cube::zeros(patch)?;
    let s = match model {
        Model::Star => None,
        Model::StarS => Some(Cube::zeros(y.dims())?),
    };
    Ok(RciState {
        g,
        a,
        b: vec![zero_patch.clone(); count],
        l_aux: vec![zero_patch.clone(); count],
        p: vec![zero_patch; count],
        s,
        layout,
        weights,
        coverage,
    })
}

fn sub_optional(y: &Cube, s: Option<&Cube>) -> Result<Cube> {
    match s {
        Some(s) => y.sub(s),
        None => Ok(y.clone()),
    }
}

/// Exact minimizer of the G subproblem:
/// `G = W ∘ (lambda * sum_i Riᵀ Tucker(Bᵢ) + (Y - S) ×₃ Aᵀ)`.
/// The state's weights must correspond to `params.lambda`
/// (see [`RciState::refresh_weights`]); `run` keeps them in sync.
pub fn g_update(
    state: &RciState,
    y: &Cube,
    params: &StageParams,
    dict: &DictionarySet,
) -> Result<Cube> {
    let recon: Vec<Cube> = map_patches(state.b.len(), |i| tucker_apply(&state.b[i], dict, false))?;
    let agg = patches::aggregate(&recon, &state.layout)?;
    let y_eff = sub_optional(y, state.s.as_ref())?;
    let proj = mode_product(&y_eff, &state.a.transpose(), 3)?;
    let mut sum = agg.scale(params.lambda);
    sum.add_scaled_assign(&proj, 1.0)?;
    let weights = if state.weights.lambda == params.lambda {
        state.weights.weights.clone()
    } else {
        state.coverage.map(|c| 1.0 / (1.0 + params.lambda * c))
    };
    sum.hadamard(&weights)
}

/// `inner_iters` ISTA steps per patch on the code subproblem; the step
/// bound `l` comes from `params.lipschitz`.
pub fn b_update(
    state: &RciState,
    params: &StageParams,
    dict: &DictionarySet,
    inner_iters: usize,
) -> Result<Vec<Cube>> {
    let l = params.lipschitz;
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::Param(format!(
            "b_update: step bound must be finite and > 0, got {l}"
        )));
    }
    if inner_iters == 0 {
        return Err(Error::Param("b_update: inner_iters must be >= 1".into()));
    }
    let lambda = params.lambda;
    let beta = params.beta;
    let tau = lambda * params.gamma1 / l;
    let g_patches = patches::extract(&state.g, &state.layout)?;
    map_patches(state.b.len(), |i| {
        let mut target = g_patches[i].scale(lambda);
        target.add_scaled_assign(&state.l_aux[i], beta)?;
        target.add_scaled_assign(&state.p[i], 1.0)?;
        let mut b = state.b[i].clone();
        for _ in 0..inner_iters {
            // H B = beta*B + lambda*Tucker(B)
            let mut hb = tucker_apply(&b, dict, false)?.scale(lambda);
            hb.add_scaled_assign(&b, beta)?;
            let r = target.sub(&hb)?;
            // Hᵀ r = beta*r + lambda*Tuckerᵀ(r)
            let mut step = tucker_apply(&r, dict, true)?.scale(lambda);
            step.add_scaled_assign(&r, beta)?;
            let mut f = b;
            f.add_scaled_assign(&step, 1.0 / l)?;
            b = soft_threshold(&f, tau)?;
        }
        Ok(b)
    })
}

/// Tensor SVT of `Bᵢ - Pᵢ/beta` at threshold `lambda*gamma2/beta`.
pub fn l_update(
    state: &RciState,
    params: &StageParams,
    norm: TensorNorm,
) -> Result<Vec<Cube>> {
    let beta = params.beta;
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Param(format!(
            "l_update: beta must be finite and > 0, got {beta}"
        )));
    }
    let tau = params.lambda * params.gamma2 / beta;
    map_patches(state.b.len(), |i| {
        let mut arg = state.b[i].clone();
        arg.add_scaled_assign(&state.p[i], -1.0 / beta)?;
        prox::tensor_nuclear_prox(&arg, tau, norm)
    })
}

/// Orthogonal Procrustes fit of the basis. Returns the new basis and a
/// flag marking the degenerate (zero cross-product) case, where the
/// previous basis is kept.
pub fn a_update(state: &RciState, y: &Cube, sparse_corrected: bool) -> Result<(Matrix, bool)> {
    let y_eff = if sparse_corrected {
        sub_optional(y, state.s.as_ref())?
    } else {
        y.clone()
    };
    let cross = unfold(&y_eff, 3).matmul(&unfold(&state.g, 3).transpose())?;
    if cross.fro_norm() == 0.0 || cross.ensure_finite("procrustes cross-product").is_err() {
        return Ok((state.a.clone(), true));
    }
    let d = linalg::svd(&cross)?;
    let a = d.u.matmul(&d.v.transpose())?;
    Ok((a, false))
}

/// Dual ascent `Pᵢ + beta (Lᵢ - Bᵢ)`.
pub fn p_update(state: &RciState, params: &StageParams) -> Result<Vec<Cube>> {
    map_patches(state.p.len(), |i| {
        let mut p = state.p[i].clone();
        p.add_scaled_assign(&state.l_aux[i], params.beta)?;
        p.add_scaled_assign(&state.b[i], -params.beta)?;
        Ok(p)
    })
}

/// STAR-S sparse-noise step: `S = soft_threshold(Y - G ×₃ A, mu)`.
pub fn s_update(state: &RciState, y: &Cube, params: &StageParams, model: Model) -> Result<Cube> {
    if model == Model::Star {
        return Err(Error::Mode("s_update is only defined for star_s".into()));
    }
    let mu = params
        .mu
        .ok_or_else(|| Error::Param("s_update: mu is required".into()))?;
    let recon = mode_product(&state.g, &state.a, 3)?;
    let resid = y.sub(&recon)?;
    soft_threshold(&resid, mu)
}

/// Full objective in split form (L replaces B in the nuclear term).
pub fn objective_value(
    state: &RciState,
    y: &Cube,
    params: &StageParams,
    model: Model,
    norm: TensorNorm,
) -> Result<f64> {
    let dict_default;
    let dict = match &params.dictionaries {
        Some(d) => d,
        None => {
            dict_default = DictionarySet::dct(
                state.layout.patch_dims.0,
                state.layout.patch_dims.1,
                state.layout.patch_dims.2,
            )?;
            &dict_default
        }
    };
    let recon = mode_product(&state.g, &state.a, 3)?;
    let mut resid = y.sub(&recon)?;
    if let Some(s) = &state.s {
        resid = resid.sub(s)?;
    }
    let n = resid.fro_norm();
    let mut obj = 0.5 * n * n;
    if model == Model::StarS {
        let mu = params
            .mu
            .ok_or_else(|| Error::Param("objective: mu is required for star_s".into()))?;
        if let Some(s) = &state.s {
            obj += mu * s.sum_abs();
        }
    }
    let g_patches = patches::extract(&state.g, &state.layout)?;
    for i in 0..state.b.len() {
        let fit = g_patches[i]
            .sub(&tucker_apply(&state.b[i], dict, false)?)?
            .fro_norm();
        let term = 0.5 * fit * fit
            + params.gamma1 * state.b[i].sum_abs()
            + params.gamma2 * prox::tensor_nuclear_norm(&state.l_aux[i], norm)?;
        obj += params.lambda * term;
    }
    Ok(obj)
}

/// Squared Frobenius distance between two cubes of equal dims.
pub fn reconstruction_loss(x_hat: &Cube, x_ref: &Cube) -> Result<f64> {
    let d = x_hat.sub(x_ref)?;
    let n = d.fro_norm();
    Ok(n * n)
}

/// Power-iteration bound for the ISTA step: `(1.05 * sigma_max(H))²`
/// with `H = beta*I + lambda*Tucker(.)`. Returns 1 for the zero operator.
pub fn auto_lipschitz(
    lambda: f64,
    beta: f64,
    dict: &DictionarySet,
    patch_dims: (usize, usize, usize),
    seed: u64,
) -> f64 {
    let apply = |c: &Cube| {
        let mut out = tucker_apply(c, dict, false).expect("probe dims match dict").scale(lambda);
        out.add_scaled_assign(c, beta).expect("same dims");
        out
    };
    let adjoint = |c: &Cube| {
        let mut out = tucker_apply(c, dict, true).expect("probe dims match dict").scale(lambda);
        out.add_scaled_assign(c, beta).expect("same dims");
        out
    };
    let sigma = spectral_norm(apply, adjoint, patch_dims, LIPSCHITZ_PROBE_ITERS, seed);
    if sigma == 0.0 {
        1.0
    } else {
        sigma * sigma
    }
}

fn primal_residual(state: &RciState) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (l, b) in state.l_aux.iter().zip(&state.b) {
        for (x, y) in l.data().iter().zip(b.data()) {
            let d = x - y;
            num += d * d;
        }
        for x in b.data() {
            den += x * x;
        }
    }
    libm::sqrt(num) / libm::sqrt(den).max(1.0)
}

fn check_patch_list(list: &[Cube], what: &str, stage: usize) -> Result<()> {
    for c in list {
        c.ensure_finite(&format!("{what} at stage {stage}"))?;
    }
    Ok(())
}

/// Runs the solver. Returns the denoised cube `X = G ×₃ A` and the
/// per-stage report.
pub fn run(
    y: &Cube,
    schedule: &Schedule,
    mode: Mode,
    opts: &SolveOptions,
) -> Result<(Cube, SolveReport)> {
    schedule.validate()?;
    if mode == Mode::Classical && opts.max_iters == 0 {
        return Err(Error::Param("max_iters must be >= 1".into()));
    }
    if mode == Mode::Classical && opts.inner_iters == 0 {
        return Err(Error::Param("inner_iters must be >= 1".into()));
    }
    let model = schedule.model;
    let mut state = init_state(y, opts.rank, opts.patch, opts.stride, model)?;
    let default_dict = DictionarySet::dct(opts.patch.0, opts.patch.1, opts.patch.2)?;

    // Materialize the effective stage list. Classical mode repeats its
    // single parameter set (resolving the step bound once); unrolled mode
    // takes the schedule verbatim, one pass, inner_iters = 1.
    let (plan, inner_iters, stop_tol): (Vec<StageParams>, usize, Option<f64>) = match mode {
        Mode::Unrolled => (schedule.stages.clone(), 1, None),
        Mode::Classical => {
            let mut stage = schedule.stages[0].clone();
            if opts.lipschitz == LipschitzSource::Auto {
                let dict = stage.dictionaries.as_ref().unwrap_or(&default_dict);
                stage.lipschitz =
                    auto_lipschitz(stage.lambda, stage.beta, dict, opts.patch, opts.seed);
            }
            (
                vec![stage; opts.max_iters],
                opts.inner_iters,
                Some(opts.tol),
            )
        }
    };

    #[cfg(feature = "std")]
    let start = std::time::Instant::now();

    let mut report = SolveReport::default();
    for (k, stage) in plan.iter().enumerate() {
        let dict = stage.dictionaries.as_ref().unwrap_or(&default_dict);
        if dict.sides() != state.layout.patch_dims {
            return Err(Error::Dims(format!(
                "stage {k}: dictionary sides {:?} do not match patch dims {:?}",
                dict.sides(),
                state.layout.patch_dims
            )));
        }
        state.refresh_weights(stage.lambda);

        let g = g_update(&state, y, stage, dict)?;
        g.ensure_finite(&format!("G-block at stage {k}"))?;
        state.g = g;

        if model == Model::StarS {
            let s = s_update(&state, y, stage, model)?;
            s.ensure_finite(&format!("S-block at stage {k}"))?;
            state.s = Some(s);
        }

        let b = b_update(&state, stage, dict, inner_iters)?;
        check_patch_list(&b, "B-block", k)?;
        state.b = b;

        let l = l_update(&state, stage, opts.tensor_norm)?;
        check_patch_list(&l, "L-block", k)?;
        state.l_aux = l;

        let (a, degenerate) = a_update(&state, y, opts.a_block_sparse_corrected)?;
        a.ensure_finite(&format!("A-block at stage {k}"))?;
        state.a = a;
        if degenerate {
            report.degenerate_a_stages.push(k);
        }

        let p = p_update(&state, stage)?;
        check_patch_list(&p, "P-block", k)?;
        state.p = p;

        report.iterations = k + 1;
        let resid = primal_residual(&state);
        report.residuals.push(resid);
        report
            .objective
            .push(objective_value(&state, y, stage, model, opts.tensor_norm)?);
        if let Some(tol) = stop_tol {
            if resid < tol {
                break;
            }
        }
    }

    #[cfg(feature = "std")]
    {
        report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    }

    let x = mode_product(&state.g, &state.a, 3)?;
    x.ensure_finite("solver output")?;
    Ok((x, report))
}

#[cfg(feature = "parallel")]
fn map_patches<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_patches<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(usize) -> Result<T>,
{
    (0..n).map(f).collect()
}
