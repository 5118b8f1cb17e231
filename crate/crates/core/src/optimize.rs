//! Classical minimizers: Nelder-Mead with restarts, and a finite-difference
//! gradient-descent baseline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The simplex collapsed below tolerance and a restart found no further improvement.
    Tolerance,
    EvaluationBudget,
    RestartLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NelderMeadConfig {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Offset of each initial simplex vertex from the base point, in radians.
    pub initial_scale: f64,
    /// Restart when `f_worst - f_best` over the simplex falls below this.
    pub tolerance: f64,
    /// Restart after this many iterations without a new best value.
    pub stagnation_window: usize,
    pub max_restarts: usize,
    pub max_evaluations: usize,
    /// Measure the incumbent again when a restart rebuilds the simplex around
    /// it, so a single lucky noisy value cannot pin the new simplex.
    pub remeasure_on_restart: bool,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            initial_scale: 0.3,
            tolerance: 1e-10,
            stagnation_window: 100,
            max_restarts: 1000,
            max_evaluations: 20_000,
            remeasure_on_restart: true,
        }
    }
}

impl NelderMeadConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidOptimizer(m.to_string()));
        if !(self.reflection > 0.0) {
            return bad("reflection coefficient must be > 0");
        }
        if !(self.expansion > 1.0) {
            return bad("expansion coefficient must be > 1");
        }
        if !(self.contraction > 0.0 && self.contraction < 1.0) {
            return bad("contraction coefficient must lie in (0, 1)");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("shrink coefficient must lie in (0, 1)");
        }
        if !(self.initial_scale > 0.0 && self.initial_scale.is_finite()) {
            return bad("initial simplex scale must be positive");
        }
        if !(self.tolerance >= 0.0) {
            return bad("tolerance must be non-negative");
        }
        if self.stagnation_window == 0 {
            return bad("stagnation window must be at least 1");
        }
        Ok(())
    }
}

/// A point that entered the simplex (or the iterate sequence, for gradient descent).
#[derive(Debug, Clone, PartialEq)]
pub struct AcceptedPoint {
    /// Zero-based index of the objective evaluation that produced this point.
    pub evaluation: usize,
    pub x: Vec<f64>,
    pub f: f64,
    /// Set for vertices created when rebuilding the simplex on a restart.
    pub restart: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOutcome {
    pub x_best: Vec<f64>,
    /// `f64::INFINITY` when no evaluation was performed.
    pub f_best: f64,
    pub evaluations: usize,
    pub restarts: usize,
    pub reason: StopReason,
    pub accepted: Vec<AcceptedPoint>,
}

impl OptimizeOutcome {
    pub fn converged(&self) -> bool {
        self.reason == StopReason::Tolerance
    }
}

struct Counter<'a, F> {
    objective: &'a mut F,
    evaluations: usize,
    max: usize,
    best: Option<(Vec<f64>, f64)>,
    /// Lowest value seen since the last restart began.
    cycle_best: f64,
    accepted: Vec<AcceptedPoint>,
}

impl<F> Counter<'_, F>
where
    F: FnMut(&[f64], usize) -> Result<f64>,
{
    /// Returns `None` once the budget is exhausted.
    fn eval(&mut self, x: &[f64]) -> Result<Option<(usize, f64)>> {
        self.eval_tracked(x, true)
    }

    fn eval_tracked(&mut self, x: &[f64], track: bool) -> Result<Option<(usize, f64)>> {
        if self.evaluations >= self.max {
            return Ok(None);
        }
        let idx = self.evaluations;
        let f = (self.objective)(x, idx)?;
        self.evaluations += 1;
        if !f.is_finite() {
            return Err(Error::NonFiniteObjective {
                evaluation: idx,
                value: f,
                x: x.to_vec(),
            });
        }
        if !track {
            return Ok(Some((idx, f)));
        }
        self.cycle_best = self.cycle_best.min(f);
        if self.best.as_ref().is_none_or(|(_, fb)| f < *fb) {
            self.best = Some((x.to_vec(), f));
        }
        Ok(Some((idx, f)))
    }

    fn accept(&mut self, evaluation: usize, x: &[f64], f: f64, restart: bool) {
        self.accepted.push(AcceptedPoint {
            evaluation,
            x: x.to_vec(),
            f,
            restart,
        });
    }

    fn best_f(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |b| b.1)
    }
}

#[derive(Clone)]
struct Vertex {
    x: Vec<f64>,
    f: f64,
}

fn lerp(from: &[f64], to: &[f64], t: f64) -> Vec<f64> {
    from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
}

/// Minimizes `objective` with Nelder-Mead, restarting around the incumbent
/// best point whenever the simplex value spread drops below tolerance or no
/// new best is found for `stagnation_window` iterations.
///
/// `objective` receives the point and the zero-based evaluation index. The
/// best point ever evaluated is returned; a restart keeps the incumbent as a
/// vertex (optionally measuring it again) and adds fresh offsets of
/// `initial_scale` along each coordinate.
///
/// The run counts as converged when a restart cycle ends without finding a
/// value more than `tolerance` below the incumbent value it started from.
pub fn nelder_mead<F>(mut objective: F, x0: &[f64], cfg: &NelderMeadConfig) -> Result<OptimizeOutcome>
where
    F: FnMut(&[f64], usize) -> Result<f64>,
{
    cfg.validate()?;
    let dim = x0.len();
    if dim == 0 {
        return Err(Error::InvalidOptimizer("empty parameter vector".into()));
    }
    let mut ctx = Counter {
        objective: &mut objective,
        evaluations: 0,
        max: cfg.max_evaluations,
        best: None,
        cycle_best: f64::INFINITY,
        accepted: Vec::new(),
    };
    let mut restarts = 0;

    let finish = |ctx: Counter<'_, F>, restarts, reason| {
        let (x_best, f_best) = ctx.best.unwrap_or_else(|| (x0.to_vec(), f64::INFINITY));
        Ok(OptimizeOutcome {
            x_best,
            f_best,
            evaluations: ctx.evaluations,
            restarts,
            reason,
            accepted: ctx.accepted,
        })
    };

    // Initial simplex.
    let mut simplex: Vec<Vertex> = Vec::with_capacity(dim + 1);
    let Some((i0, f0)) = ctx.eval(x0)? else {
        return finish(ctx, restarts, StopReason::EvaluationBudget);
    };
    ctx.accept(i0, x0, f0, false);
    simplex.push(Vertex { x: x0.to_vec(), f: f0 });
    if !build_offsets(&mut ctx, &mut simplex, cfg.initial_scale, false)? {
        return finish(ctx, restarts, StopReason::EvaluationBudget);
    }

    let mut cycle_start = f64::INFINITY;
    let mut stagnant = 0usize;
    loop {
        simplex.sort_by(|a, b| a.f.total_cmp(&b.f));
        let spread = simplex[dim].f - simplex[0].f;
        let collapsed = spread <= cfg.tolerance;
        if collapsed || stagnant >= cfg.stagnation_window {
            if restarts > 0 && ctx.cycle_best >= cycle_start - cfg.tolerance {
                return finish(ctx, restarts, StopReason::Tolerance);
            }
            if restarts >= cfg.max_restarts {
                return finish(ctx, restarts, StopReason::RestartLimit);
            }
            restarts += 1;
            let (bx, mut bf) = ctx.best.clone().expect("simplex evaluated");
            if cfg.remeasure_on_restart {
                let Some((i, f)) = ctx.eval(&bx)? else {
                    return finish(ctx, restarts, StopReason::EvaluationBudget);
                };
                ctx.accept(i, &bx, f, true);
                bf = f;
            }
            cycle_start = bf;
            ctx.cycle_best = f64::INFINITY;
            simplex.clear();
            simplex.push(Vertex { x: bx, f: bf });
            if !build_offsets(&mut ctx, &mut simplex, cfg.initial_scale, true)? {
                return finish(ctx, restarts, StopReason::EvaluationBudget);
            }
            stagnant = 0;
            continue;
        }

        let best_before = ctx.best_f();
        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|v| v.x[k]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let second_worst_f = simplex[dim - 1].f;

        let xr = lerp(&centroid, &worst.x, -cfg.reflection);
        let Some((ir, fr)) = ctx.eval(&xr)? else {
            return finish(ctx, restarts, StopReason::EvaluationBudget);
        };

        let mut replacement: Option<(usize, Vec<f64>, f64)> = None;
        if fr < simplex[0].f {
            let xe = lerp(&centroid, &xr, cfg.expansion);
            let Some((ie, fe)) = ctx.eval(&xe)? else {
                return finish(ctx, restarts, StopReason::EvaluationBudget);
            };
            replacement = Some(if fe < fr { (ie, xe, fe) } else { (ir, xr, fr) });
        } else if fr < second_worst_f {
            replacement = Some((ir, xr, fr));
        } else if fr < worst.f {
            let xc = lerp(&centroid, &xr, cfg.contraction);
            let Some((ic, fc)) = ctx.eval(&xc)? else {
                return finish(ctx, restarts, StopReason::EvaluationBudget);
            };
            if fc <= fr {
                replacement = Some((ic, xc, fc));
            }
        } else {
            let xcc = lerp(&centroid, &worst.x, cfg.contraction);
            let Some((icc, fcc)) = ctx.eval(&xcc)? else {
                return finish(ctx, restarts, StopReason::EvaluationBudget);
            };
            if fcc < worst.f {
                replacement = Some((icc, xcc, fcc));
            }
        }

        match replacement {
            Some((idx, x, f)) => {
                ctx.accept(idx, &x, f, false);
                simplex[dim] = Vertex { x, f };
            }
            None => {
                let anchor = simplex[0].x.clone();
                for v in simplex.iter_mut().skip(1) {
                    let x = lerp(&anchor, &v.x, cfg.shrink);
                    let Some((i, f)) = ctx.eval(&x)? else {
                        return finish(ctx, restarts, StopReason::EvaluationBudget);
                    };
                    ctx.accept(i, &x, f, false);
                    *v = Vertex { x, f };
                }
            }
        }

        if ctx.best_f() < best_before {
            stagnant = 0;
        } else {
            stagnant += 1;
        }
    }
}

/// Appends `base + scale * e_k` for every coordinate. Returns false when the
/// evaluation budget runs out.
fn build_offsets<F>(
    ctx: &mut Counter<'_, F>,
    simplex: &mut Vec<Vertex>,
    scale: f64,
    restart: bool,
) -> Result<bool>
where
    F: FnMut(&[f64], usize) -> Result<f64>,
{
    let base = simplex[0].x.clone();
    for k in 0..base.len() {
        let mut x = base.clone();
        x[k] += scale;
        let Some((i, f)) = ctx.eval(&x)? else {
            return Ok(false);
        };
        ctx.accept(i, &x, f, restart);
        simplex.push(Vertex { x, f });
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradientDescentConfig {
    pub step_size: f64,
    /// Central-difference step, in radians.
    pub fd_step: f64,
    pub max_evaluations: usize,
    /// Stop once the estimated gradient norm falls below this.
    pub gradient_tolerance: f64,
}

impl Default for GradientDescentConfig {
    fn default() -> Self {
        Self {
            step_size: 0.1,
            fd_step: 1e-3,
            max_evaluations: 20_000,
            gradient_tolerance: 1e-9,
        }
    }
}

/// Fixed-step gradient descent with central finite-difference gradients.
///
/// Each iteration spends `2 * dim` evaluations on the gradient and one on the
/// new iterate. Stops when the budget cannot cover another full iteration or
/// the gradient norm drops below tolerance. The best iterate is returned;
/// gradient probe points are never candidates. With a zero budget `x0` is
/// returned unevaluated.
pub fn gradient_descent<F>(mut objective: F, x0: &[f64], cfg: &GradientDescentConfig) -> Result<OptimizeOutcome>
where
    F: FnMut(&[f64], usize) -> Result<f64>,
{
    if !(cfg.step_size > 0.0 && cfg.fd_step > 0.0) {
        return Err(Error::InvalidOptimizer("step sizes must be positive".into()));
    }
    let dim = x0.len();
    let mut ctx = Counter {
        objective: &mut objective,
        evaluations: 0,
        max: cfg.max_evaluations,
        best: None,
        cycle_best: f64::INFINITY,
        accepted: Vec::new(),
    };
    let mut x = x0.to_vec();
    let mut reason = StopReason::EvaluationBudget;
    if let Some((i, f)) = ctx.eval(&x)? {
        ctx.accept(i, &x, f, false);
        while ctx.evaluations + 2 * dim < ctx.max {
            let mut grad = vec![0.0; dim];
            for k in 0..dim {
                let mut xp = x.clone();
                xp[k] += cfg.fd_step;
                let mut xm = x.clone();
                xm[k] -= cfg.fd_step;
                let (_, fp) = ctx.eval_tracked(&xp, false)?.expect("budget checked");
                let (_, fm) = ctx.eval_tracked(&xm, false)?.expect("budget checked");
                grad[k] = (fp - fm) / (2.0 * cfg.fd_step);
            }
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if norm < cfg.gradient_tolerance {
                reason = StopReason::Tolerance;
                break;
            }
            for (xi, g) in x.iter_mut().zip(&grad) {
                *xi -= cfg.step_size * g;
            }
            let (i, f) = ctx.eval(&x)?.expect("budget checked");
            ctx.accept(i, &x, f, false);
        }
    }
    let (x_best, f_best) = ctx.best.unwrap_or_else(|| (x0.to_vec(), f64::INFINITY));
    Ok(OptimizeOutcome {
        x_best,
        f_best,
        evaluations: ctx.evaluations,
        restarts: 0,
        reason,
        accepted: ctx.accepted,
    })
}
