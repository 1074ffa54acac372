// SPDX-License-Identifier: Apache-2.0

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{check_footprints, PackageSpec};
use crate::thermal::{rasterize, solve_with, SolverOptions, ThermalStack};

use super::{
    acceptance_probability, anneal_cost, bst_placement, wirelength, AnnealConfig, Floorplan,
    NormalizationBounds,
};

/// One annealing epoch. Row 0 describes the starting plan.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRow {
    pub iteration: usize,
    /// Coarse-grid peak chiplet temperature of the current plan, °C.
    pub peak_temperature: f64,
    /// mm
    pub wirelength: f64,
    /// Cost of the current plan under the bounds known at that point.
    pub cost: f64,
    /// Acceptance scale used during the epoch.
    pub k: f64,
    /// Lowest cost seen so far, measured with the final bounds.
    pub best_cost: f64,
    pub accepted: usize,
}

#[derive(Debug, Clone)]
pub struct AnnealResult {
    pub initial: Floorplan,
    pub best: Floorplan,
    pub history: Vec<HistoryRow>,
    pub converged: bool,
    /// Epochs run (excluding the starting row).
    pub iterations: usize,
    /// Fine-grid peaks, °C.
    pub initial_peak: f64,
    pub final_peak: f64,
    pub initial_wirelength: f64,
    pub final_wirelength: f64,
    pub bounds: NormalizationBounds,
    pub evaluations: usize,
}

/// Draws one legal random move: translate a chiplet by up to `max_step` mm
/// in x and y, turn a non-square chiplet by 90° about its center, or swap the
/// centers of two chiplets. Illegal proposals are redrawn up to `retries`
/// times.
pub fn propose_move<R: Rng + ?Sized>(
    fp: &Floorplan,
    rng: &mut R,
    max_step: f64,
    retries: usize,
) -> Result<Floorplan> {
    let n = fp.placements.len();
    if n == 0 {
        return Err(Error::InvalidInput("cannot move an empty floorplan".into()));
    }
    let kinds = if n >= 2 { 3 } else { 2 };
    for _ in 0..retries {
        let mut next = fp.clone();
        let legal = match rng.gen_range(0..kinds) {
            0 => {
                let k = rng.gen_range(0..n);
                let dx = rng.gen_range(-max_step..=max_step);
                let dy = rng.gen_range(-max_step..=max_step);
                next.placements[k].x += dx;
                next.placements[k].y += dy;
                next.is_legal_at(k)
            }
            1 => {
                let k = rng.gen_range(0..n);
                let p = &mut next.placements[k];
                if p.width == p.height {
                    false
                } else {
                    let (cx, cy) = p.center();
                    p.rotation = p.rotation.quarter_turn();
                    p.set_center(cx, cy);
                    next.is_legal_at(k)
                }
            }
            _ => {
                let a = rng.gen_range(0..n);
                let mut b = rng.gen_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                let ca = next.placements[a].center();
                let cb = next.placements[b].center();
                next.placements[a].set_center(cb.0, cb.1);
                next.placements[b].set_center(ca.0, ca.1);
                next.is_legal_at(a) && next.is_legal_at(b)
            }
        };
        if legal {
            return Ok(next);
        }
    }
    Err(Error::Congested(retries))
}

/// Coarse-grid evaluator that warm-starts each solve from the previous one.
struct Evaluator<'a> {
    stack: &'a ThermalStack,
    resolution: f64,
    active: usize,
    guess: Option<Vec<f64>>,
    count: usize,
}

impl<'a> Evaluator<'a> {
    fn new(stack: &'a ThermalStack, resolution: f64) -> Self {
        Evaluator {
            stack,
            resolution,
            active: stack.active_layer(),
            guess: None,
            count: 0,
        }
    }

    fn eval(&mut self, fp: &Floorplan) -> Result<(f64, f64)> {
        let pm = rasterize(fp, self.resolution)?;
        let tf = solve_with(
            &pm,
            self.stack,
            &SolverOptions::default(),
            self.guess.as_deref(),
        )?;
        let peak = tf.hottest_cell(self.active).2;
        self.guess = Some(tf.rise());
        self.count += 1;
        Ok((peak, wirelength(fp)))
    }
}

fn peak_at(fp: &Floorplan, stack: &ThermalStack, resolution: f64) -> Result<f64> {
    let tf = solve_with(
        &rasterize(fp, resolution)?,
        stack,
        &SolverOptions::default(),
        None,
    )?;
    Ok(tf.hottest_cell(stack.active_layer()).2)
}

/// Simulated-annealing placement starting from [`bst_placement`].
///
/// Each epoch proposes `moves_per_iteration` moves at `K = K0·rⁱ` and accepts
/// them with [`acceptance_probability`]. The run stops once the current
/// plan's peak temperature changes by less than `tol` for `persistence`
/// consecutive epochs, or after `max_iterations`. The returned plan is the
/// lowest-cost plan evaluated, scored with the final normalization bounds.
pub fn optimize(spec: &PackageSpec, cfg: &AnnealConfig) -> Result<AnnealResult> {
    cfg.validate()?;
    if spec.chiplets.is_empty() {
        return Err(Error::InvalidInput("no chiplets to place".into()));
    }
    let stack = &spec.stack;

    if spec.chiplets.len() == 1 {
        let mut fp = bst_placement(spec)?;
        let p = &mut fp.placements[0];
        p.set_center(spec.interposer_width / 2.0, spec.interposer_height / 2.0);
        fp.validate()?;
        let t = peak_at(&fp, stack, cfg.fine_resolution)?;
        let mut bounds = NormalizationBounds::default();
        bounds.observe(t, 0.0);
        let cost = anneal_cost(t, 0.0, &bounds);
        return Ok(AnnealResult {
            initial: fp.clone(),
            best: fp,
            history: vec![HistoryRow {
                iteration: 0,
                peak_temperature: t,
                wirelength: 0.0,
                cost,
                k: cfg.k0,
                best_cost: cost,
                accepted: 0,
            }],
            converged: true,
            iterations: 0,
            initial_peak: t,
            final_peak: t,
            initial_wirelength: 0.0,
            final_wirelength: 0.0,
            bounds,
            evaluations: 1,
        });
    }

    let initial = bst_placement(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut ev = Evaluator::new(stack, cfg.coarse_resolution);
    let mut bounds = NormalizationBounds::default();

    // every evaluated plan with its (T, W)
    let mut plans: Vec<Floorplan> = Vec::new();
    let mut scores: Vec<(f64, f64)> = Vec::new();

    let (t0, w0) = ev.eval(&initial)?;
    bounds.observe(t0, w0);
    plans.push(initial.clone());
    scores.push((t0, w0));

    let mut walk = initial.clone();
    for _ in 0..cfg.warmup_samples {
        walk = propose_move(&walk, &mut rng, cfg.max_step, cfg.move_retries)?;
        let (t, w) = ev.eval(&walk)?;
        bounds.observe(t, w);
        plans.push(walk.clone());
        scores.push((t, w));
    }

    struct Pending {
        iteration: usize,
        t: f64,
        w: f64,
        cost: f64,
        k: f64,
        accepted: usize,
        last_record: usize,
    }

    let mut cur = initial.clone();
    let (mut cur_t, mut cur_w) = (t0, w0);
    let mut rows = vec![Pending {
        iteration: 0,
        t: t0,
        w: w0,
        cost: anneal_cost(t0, w0, &bounds),
        k: cfg.k0,
        accepted: 0,
        last_record: scores.len() - 1,
    }];
    let mut streak = 0;
    let mut converged = false;
    let mut iterations = 0;

    for i in 0..cfg.max_iterations {
        let k = cfg.k0 * cfg.decay.powi(i as i32);
        let step = cfg.max_step * (k / cfg.k0).max(cfg.min_step_fraction);
        let prev_t = cur_t;
        let mut accepted = 0;
        for _ in 0..cfg.moves_per_iteration {
            let cand = propose_move(&cur, &mut rng, step, cfg.move_retries)?;
            let (t, w) = ev.eval(&cand)?;
            bounds.observe(t, w);
            let c_cur = anneal_cost(cur_t, cur_w, &bounds);
            let c_new = anneal_cost(t, w, &bounds);
            let ap = acceptance_probability(c_cur, c_new, k)?;
            let u: f64 = rng.gen();
            plans.push(cand.clone());
            scores.push((t, w));
            if u < ap {
                debug_assert!(cand.validate().is_ok());
                cur = cand;
                cur_t = t;
                cur_w = w;
                accepted += 1;
            }
        }
        iterations = i + 1;
        rows.push(Pending {
            iteration: iterations,
            t: cur_t,
            w: cur_w,
            cost: anneal_cost(cur_t, cur_w, &bounds),
            k,
            accepted,
            last_record: scores.len() - 1,
        });
        if (cur_t - prev_t).abs() < cfg.tol {
            streak += 1;
            if streak >= cfg.persistence {
                converged = true;
                break;
            }
        } else {
            streak = 0;
        }
    }

    let final_costs: Vec<f64> = scores
        .iter()
        .map(|&(t, w)| anneal_cost(t, w, &bounds))
        .collect();
    let mut best_idx = 0;
    for (k, &c) in final_costs.iter().enumerate() {
        if c < final_costs[best_idx] {
            best_idx = k;
        }
    }

    let mut history = Vec::with_capacity(rows.len());
    let mut running = f64::INFINITY;
    let mut upto = 0;
    for r in rows {
        while upto <= r.last_record {
            running = running.min(final_costs[upto]);
            upto += 1;
        }
        history.push(HistoryRow {
            iteration: r.iteration,
            peak_temperature: r.t,
            wirelength: r.w,
            cost: r.cost,
            k: r.k,
            best_cost: running,
            accepted: r.accepted,
        });
    }

    let best = plans.swap_remove(best_idx);
    best.validate()?;
    let initial_peak = peak_at(&initial, stack, cfg.fine_resolution)?;
    let final_peak = peak_at(&best, stack, cfg.fine_resolution)?;
    let final_wirelength = wirelength(&best);
    Ok(AnnealResult {
        initial,
        best,
        history,
        converged,
        iterations,
        initial_peak,
        final_peak,
        initial_wirelength: w0,
        final_wirelength,
        bounds,
        evaluations: ev.count,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRow {
    pub k0: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Fine-grid peak of the returned plan, °C.
    pub final_peak: f64,
}

/// Runs [`optimize`] once per candidate `K0`, all with the configured seed.
pub fn calibrate_k(
    spec: &PackageSpec,
    candidates: &[f64],
    cfg: &AnnealConfig,
) -> Result<Vec<CalibrationRow>> {
    if candidates.is_empty() {
        return Err(Error::InvalidInput("no K0 candidates".into()));
    }
    candidates
        .par_iter()
        .map(|&k0| {
            let run = optimize(spec, &AnnealConfig { k0, ..cfg.clone() })?;
            Ok(CalibrationRow {
                k0,
                iterations: run.iterations,
                converged: run.converged,
                final_peak: run.final_peak,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Interposer side, mm.
    pub side: f64,
    /// mm²
    pub area: f64,
    /// `None` when the chiplets cannot be packed at this size.
    pub initial_peak: Option<f64>,
    pub peak: Option<f64>,
    pub iterations: Option<usize>,
}

impl SweepRow {
    pub fn feasible(&self) -> bool {
        self.peak.is_some()
    }
}

/// Optimizes the package on square interposers of each side length.
pub fn interposer_sweep(
    spec: &PackageSpec,
    sides: &[f64],
    cfg: &AnnealConfig,
) -> Result<Vec<SweepRow>> {
    if sides.is_empty() {
        return Err(Error::InvalidInput("no interposer sizes".into()));
    }
    if let Some(bad) = sides.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidInput(format!(
            "interposer side must be > 0 (got {bad})"
        )));
    }
    sides
        .par_iter()
        .map(|&side| {
            let sized = spec.with_interposer(side, side);
            let infeasible = SweepRow {
                side,
                area: side * side,
                initial_peak: None,
                peak: None,
                iterations: None,
            };
            if check_footprints(&sized).is_err() {
                return Ok(infeasible);
            }
            match optimize(&sized, cfg) {
                Ok(run) => Ok(SweepRow {
                    initial_peak: Some(run.initial_peak),
                    peak: Some(run.final_peak),
                    iterations: Some(run.iterations),
                    ..infeasible
                }),
                Err(Error::Infeasible(_)) => Ok(infeasible),
                Err(e) => Err(e),
            }
        })
        .collect()
}
