//! Pinching-pattern optimizers.
//!
//! Both optimizers are cyclic coordinate ascent over antenna positions. For
//! antenna `n` the feasible interval is `[v_{n−1} + Δ, v_{n+1} − Δ]` clipped
//! to the waveguide (and, when refining a single user, to a window around the
//! starting position). Each 1-D subproblem is solved by a grid sweep followed
//! by golden-section polishing around the best grid point. A move is only
//! taken when it does not lower the objective, so the objective sequence is
//! nondecreasing.
//!
//! Global sweeps over the whole waveguide use a branch-and-bound over blocks
//! of grid points: the objective `Σ_k |a_k + g(x)h_k(x)|²` on a block is at
//! most `Σ_k (|a_k| + max|h_k|)²`, so blocks whose bound cannot beat the
//! incumbent are skipped. The result is identical to evaluating every grid
//! point.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::channel::{raw_gain, validate_pattern, AntennaSite, PinchingPattern, Scenario};
use crate::error::{Error, Result};
use crate::search::{golden_section_max, grid_points};

/// Grid points per branch-and-bound block, coarsest first.
const LEVELS: [usize; 3] = [1024, 64, 8];
/// Widening of bounded phase ranges against rounding in `θ`.
const PHASE_GUARD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Grid step of every 1-D sweep, meters.
    pub coarse_step: f64,
    /// Final golden-section bracket width, meters.
    pub golden_tolerance: f64,
    /// Stop once a full sweep improves the objective by less than this fraction.
    pub ao_rel_tolerance: f64,
    pub ao_max_iters: usize,
    /// Half-width of the per-antenna window used by single-user refinement.
    pub refine_window: f64,
}

impl SearchConfig {
    /// `λ/20` grid (capped at `Δ/10`), `λ/10⁴` golden bracket, `10⁻⁸`
    /// relative stop, 200 sweeps and a `±λ_g/2` refinement window.
    pub fn for_scenario(scenario: &Scenario) -> Self {
        let wavelength = scenario.wavelength();
        Self {
            coarse_step: (wavelength / 20.0).min(scenario.min_spacing() / 10.0),
            golden_tolerance: wavelength / 1e4,
            ao_rel_tolerance: 1e-8,
            ao_max_iters: 200,
            refine_window: scenario.guided_wavelength() / 2.0,
        }
    }

    pub fn validate(&self, scenario: &Scenario) -> Result<()> {
        let fields = [
            ("coarse_step", self.coarse_step),
            ("golden_tolerance", self.golden_tolerance),
            ("ao_rel_tolerance", self.ao_rel_tolerance),
            ("refine_window", self.refine_window),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidSearchConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.ao_max_iters == 0 {
            return Err(Error::InvalidSearchConfig("ao_max_iters must be at least 1".into()));
        }
        if self.coarse_step >= scenario.min_spacing() {
            return Err(Error::InvalidSearchConfig(format!(
                "coarse_step {} must be below the minimum spacing {}",
                self.coarse_step,
                scenario.min_spacing()
            )));
        }
        if self.golden_tolerance >= self.coarse_step {
            return Err(Error::InvalidSearchConfig(format!(
                "golden_tolerance {} must be below coarse_step {}",
                self.golden_tolerance, self.coarse_step
            )));
        }
        Ok(())
    }
}

/// `N` antennas at exact spacing `Δ` centered on `center`, translated the
/// least amount needed to fit inside the waveguide.
pub fn centered_pattern(scenario: &Scenario, center: f64) -> Result<PinchingPattern> {
    let n = scenario.antenna_count();
    let delta = scenario.min_spacing();
    let (lo, hi) = scenario.span();
    let width = (n - 1) as f64 * delta;
    if width > hi - lo {
        return Err(Error::SpanTooShort {
            span: hi - lo,
            antennas: n,
            min_spacing: delta,
        });
    }
    let half = (n as f64 - 1.0) / 2.0;
    let mut first = center - half * delta;
    if first < lo {
        first = lo;
    } else if first + width > hi {
        first = hi - width;
    }
    let positions: Vec<f64> = (0..n).map(|i| first + i as f64 * delta).collect();
    Ok(validate_pattern(scenario, &positions)?)
}

/// Closed-form starting pattern for user `k`: `N` antennas at spacing `Δ`
/// centered on the user's x-coordinate.
pub fn initial_single_user_pattern(scenario: &Scenario, user_index: usize) -> Result<PinchingPattern> {
    let x = scenario.user(user_index)?.x;
    centered_pattern(scenario, x)
}

/// Phase refinement of a single-user pattern: cyclic per-antenna search of
/// `|γ_k|²` inside `±refine_window` of each starting position. Never returns
/// a pattern with lower gain than `pattern`.
pub fn refine_single_user_pattern(
    scenario: &Scenario,
    pattern: &PinchingPattern,
    user_index: usize,
    cfg: &SearchConfig,
) -> Result<PinchingPattern> {
    scenario.user(user_index)?;
    cfg.validate(scenario)?;
    let pattern = validate_pattern(scenario, pattern.positions())?;
    let anchor = pattern.positions().to_vec();
    let window = cfg.refine_window;
    let outcome = coordinate_ascent(scenario, &[user_index], anchor.clone(), cfg, |n, lo, hi| {
        (lo.max(anchor[n] - window), hi.min(anchor[n] + window))
    });
    Ok(validate_pattern(scenario, &outcome.positions)?)
}

/// Result of the element-wise alternating optimization of a shared pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonPattern {
    pub pattern: PinchingPattern,
    /// `Σ_{k∈subset} |γ_k|²` at `pattern`.
    pub objective: f64,
    /// Completed sweeps over all antennas.
    pub iterations: usize,
    /// Objective before the first step and after every accepted step.
    pub trace: Vec<f64>,
}

/// Maximizes the total gain of `user_subset` under one shared pattern by
/// element-wise alternating optimization started at `init`.
pub fn common_pattern(
    scenario: &Scenario,
    user_subset: &[usize],
    init: &PinchingPattern,
    cfg: &SearchConfig,
) -> Result<CommonPattern> {
    if user_subset.is_empty() {
        return Err(Error::Precondition("user subset must be nonempty".into()));
    }
    for &k in user_subset {
        scenario.user(k)?;
    }
    cfg.validate(scenario)?;
    let init = validate_pattern(scenario, init.positions())?;
    let outcome = coordinate_ascent(scenario, user_subset, init.into_positions(), cfg, |_, lo, hi| (lo, hi));
    let pattern = validate_pattern(scenario, &outcome.positions)?;
    let objective = subset_gain(scenario, user_subset, &pattern);
    Ok(CommonPattern {
        pattern,
        objective,
        iterations: outcome.iterations,
        trace: outcome.trace,
    })
}

/// `Σ_{k∈users} |γ_k(pattern)|²`.
pub fn subset_gain(scenario: &Scenario, users: &[usize], pattern: &PinchingPattern) -> f64 {
    users.iter().map(|&k| raw_gain(scenario, pattern.positions(), k)).sum()
}

struct AscentOutcome {
    positions: Vec<f64>,
    iterations: usize,
    trace: Vec<f64>,
}

/// Objective of one antenna position with every other antenna held fixed.
struct ElementObjective<'a> {
    scenario: &'a Scenario,
    users: &'a [usize],
    rest: Vec<Complex64>,
    phase_bounds: bool,
}

impl<'a> ElementObjective<'a> {
    fn new(scenario: &'a Scenario, users: &'a [usize], positions: &[f64], skip: usize) -> Self {
        let sites: Vec<AntennaSite> = positions
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != skip)
            .map(|(_, &x)| AntennaSite::new(scenario, x))
            .collect();
        let rest = users
            .iter()
            .map(|&k| sites.iter().map(|s| s.term(scenario, k)).sum())
            .collect();
        Self {
            scenario,
            users,
            rest,
            phase_bounds: scenario.refractive_index() > 1.0,
        }
    }

    fn value(&self, x: f64) -> f64 {
        let site = AntennaSite::new(self.scenario, x);
        self.users
            .iter()
            .zip(&self.rest)
            .map(|(&k, a)| (a + site.term(self.scenario, k)).norm_sqr())
            .sum()
    }

    /// Upper bound of [`Self::value`] over `[a, b]`.
    ///
    /// Each user's new term has amplitude at most the peak on the interval
    /// and a phase confined to the range swept between the endpoints.
    fn block_bound(&self, a: f64, b: f64) -> f64 {
        self.users
            .iter()
            .zip(&self.rest)
            .map(|(&k, r)| {
                let m = r.norm();
                let p = self.scenario.peak_amplitude_on(k, a, b);
                let c = if self.phase_bounds && m > 0.0 {
                    let phi = r.arg();
                    let lo = phi + self.scenario.term_phase(k, a) - PHASE_GUARD;
                    let hi = phi + self.scenario.term_phase(k, b) + PHASE_GUARD;
                    max_cos(lo, hi)
                } else {
                    1.0
                };
                m * m + (p * p + 2.0 * m * p * c).max(0.0)
            })
            .sum()
    }

    /// Best grid point strictly above `floor`, smallest coordinate on ties.
    ///
    /// Branch and bound over nested blocks of the grid, visiting children in
    /// decreasing order of bound.
    fn grid_best(&self, lo: f64, hi: f64, step: f64, floor: f64) -> Option<(f64, f64)> {
        let grid = Grid::new(lo, hi, step);
        let mut best = None;
        self.descend(&grid, 0, grid.len, 0, floor, &mut best);
        best
    }

    fn descend(
        &self,
        grid: &Grid,
        first: usize,
        end: usize,
        level: usize,
        floor: f64,
        best: &mut Option<(f64, f64)>,
    ) {
        let incumbent = |best: &Option<(f64, f64)>| best.map_or(floor, |b: (f64, f64)| b.1.max(floor));
        let Some(&size) = LEVELS.get(level) else {
            for j in first..end {
                let x = grid.at(j);
                let v = self.value(x);
                if v <= floor {
                    continue;
                }
                match *best {
                    Some((bx, bv)) if v < bv || (v == bv && x >= bx) => {}
                    _ => *best = Some((x, v)),
                }
            }
            return;
        };
        let mut children: Vec<(usize, usize, f64)> = (first..end)
            .step_by(size)
            .map(|a| {
                let b = (a + size).min(end);
                (a, b, self.block_bound(grid.at(a), grid.at(b - 1)))
            })
            .collect();
        children.sort_by(|x, y| y.2.total_cmp(&x.2).then(x.0.cmp(&y.0)));
        for (a, b, bound) in children {
            if bound * (1.0 + 1e-12) < incumbent(best) {
                break;
            }
            self.descend(grid, a, b, level + 1, floor, best);
        }
    }
}

/// Maximum of `cos` over `[lo, hi]`.
fn max_cos(lo: f64, hi: f64) -> f64 {
    if hi - lo >= TAU {
        return 1.0;
    }
    let start = lo.rem_euclid(TAU);
    if start == 0.0 || start + (hi - lo) >= TAU {
        1.0
    } else {
        start.cos().max((start + (hi - lo)).cos())
    }
}

/// The points of [`grid_points`] addressed by index.
struct Grid {
    lo: f64,
    hi: f64,
    step: f64,
    steps: usize,
    len: usize,
}

impl Grid {
    fn new(lo: f64, hi: f64, step: f64) -> Self {
        let steps = ((hi - lo).max(0.0) / step).floor() as usize;
        let last = lo + steps as f64 * step;
        let len = steps + 1 + usize::from(hi - last > 1e-12 * step);
        Self { lo, hi, step, steps, len }
    }

    fn at(&self, i: usize) -> f64 {
        if i > self.steps {
            self.hi
        } else {
            self.lo + i as f64 * self.step
        }
    }
}

fn coordinate_ascent(
    scenario: &Scenario,
    users: &[usize],
    mut positions: Vec<f64>,
    cfg: &SearchConfig,
    clip: impl Fn(usize, f64, f64) -> (f64, f64),
) -> AscentOutcome {
    let n = positions.len();
    let delta = scenario.min_spacing();
    let (span_lo, span_hi) = scenario.span();
    let total = |p: &[f64]| -> f64 { users.iter().map(|&k| raw_gain(scenario, p, k)).sum() };

    let mut objective = total(&positions);
    let mut trace = vec![objective];
    let mut iterations = 0;
    let mut earlier = positions.clone();
    while iterations < cfg.ao_max_iters {
        iterations += 1;
        let start = objective;
        let sweep_start = positions.clone();
        for i in 0..n {
            let lo = if i == 0 { span_lo } else { positions[i - 1] + delta };
            let hi = if i + 1 == n { span_hi } else { positions[i + 1] - delta };
            let (lo, hi) = clip(i, lo, hi);
            let current = positions[i];
            let (lo, hi) = (lo.min(current), hi.max(current));

            let element = ElementObjective::new(scenario, users, &positions, i);
            let current_value = element.value(current);
            let mut best = (current, current_value);
            if hi > lo {
                if let Some(g) = element.grid_best(lo, hi, cfg.coarse_step, current_value) {
                    best = g;
                }
                let a = (best.0 - cfg.coarse_step).max(lo);
                let b = (best.0 + cfg.coarse_step).min(hi);
                let polished = golden_section_max(|x| element.value(x), a, b, cfg.golden_tolerance);
                if polished.1 > best.1 {
                    best = polished;
                }
            }
            positions[i] = best.0;
            objective = best.1;
            trace.push(objective);
        }
        if n > 1 {
            objective = rigid_shift(scenario, users, &mut positions, cfg, &clip, objective);
            trace.push(objective);
            objective = pattern_move(scenario, users, &mut positions, &sweep_start, &clip, objective);
            trace.push(objective);
            objective = pattern_move(scenario, users, &mut positions, &earlier, &clip, objective);
            trace.push(objective);
            earlier = sweep_start;
        }
        objective = total(&positions);
        if objective - start <= cfg.ao_rel_tolerance * start.abs() {
            break;
        }
    }
    AscentOutcome {
        positions,
        iterations,
        trace,
    }
}

/// Translates the whole pattern by the best offset within `±refine_window`.
///
/// Per-antenna moves cannot follow a phase-aligned ridge, along which the
/// pattern can only improve by moving every antenna together; without this
/// coordinate the ascent zigzags along the ridge in golden-tolerance steps.
fn rigid_shift(
    scenario: &Scenario,
    users: &[usize],
    positions: &mut [f64],
    cfg: &SearchConfig,
    clip: &impl Fn(usize, f64, f64) -> (f64, f64),
    current: f64,
) -> f64 {
    let (span_lo, span_hi) = scenario.span();
    let n = positions.len();
    let mut lo = (span_lo - positions[0]).max(-cfg.refine_window);
    let mut hi = (span_hi - positions[n - 1]).min(cfg.refine_window);
    for (i, &x) in positions.iter().enumerate() {
        let (a, b) = clip(i, f64::NEG_INFINITY, f64::INFINITY);
        lo = lo.max(a - x);
        hi = hi.min(b - x);
    }
    let (lo, hi) = (lo.min(0.0), hi.max(0.0));
    if hi <= lo {
        return current;
    }
    let base = positions.to_vec();
    let value = |s: f64| -> f64 {
        let sites: Vec<AntennaSite> = base.iter().map(|&x| AntennaSite::new(scenario, x + s)).collect();
        users
            .iter()
            .map(|&k| sites.iter().map(|site| site.term(scenario, k)).sum::<Complex64>().norm_sqr())
            .sum()
    };
    let mut best = (0.0, value(0.0).max(current));
    for s in grid_points(lo, hi, cfg.coarse_step) {
        let v = value(s);
        if v > best.1 {
            best = (s, v);
        }
    }
    let a = (best.0 - cfg.coarse_step).max(lo);
    let b = (best.0 + cfg.coarse_step).min(hi);
    let polished = golden_section_max(value, a, b, cfg.golden_tolerance);
    if polished.1 > best.1 {
        best = polished;
    }
    if best.0 != 0.0 {
        for (p, x) in positions.iter_mut().zip(&base) {
            *p = x + best.0;
        }
    }
    best.1
}

/// Extrapolates the displacement of the last sweep, accepting only gains.
///
/// Coupled antennas otherwise converge geometrically along a curved ridge.
fn pattern_move(
    scenario: &Scenario,
    users: &[usize],
    positions: &mut [f64],
    sweep_start: &[f64],
    clip: &impl Fn(usize, f64, f64) -> (f64, f64),
    current: f64,
) -> f64 {
    const REACH: f64 = 8.0;
    let delta = scenario.min_spacing();
    let (span_lo, span_hi) = scenario.span();
    let n = positions.len();
    let base = positions.to_vec();
    let dir: Vec<f64> = base.iter().zip(sweep_start).map(|(x, y)| x - y).collect();
    if dir.iter().all(|&d| d == 0.0) {
        return current;
    }
    // Largest step keeping x + α·d inside [lo, hi] for every linear limit.
    let mut reach = REACH;
    let mut limit = |x: f64, d: f64, lo: f64, hi: f64| {
        if d > 0.0 {
            reach = reach.min((hi - x) / d);
        } else if d < 0.0 {
            reach = reach.min((lo - x) / d);
        }
    };
    for i in 0..n {
        let (a, b) = clip(i, span_lo, span_hi);
        limit(base[i], dir[i], a.max(span_lo), b.min(span_hi));
        if i + 1 < n {
            limit(base[i + 1] - base[i], dir[i + 1] - dir[i], delta, f64::INFINITY);
        }
    }
    if reach <= 0.0 {
        return current;
    }
    let value = |a: f64| -> f64 {
        let sites: Vec<AntennaSite> = base
            .iter()
            .zip(&dir)
            .map(|(&x, &d)| AntennaSite::new(scenario, x + a * d))
            .collect();
        users
            .iter()
            .map(|&k| sites.iter().map(|site| site.term(scenario, k)).sum::<Complex64>().norm_sqr())
            .sum()
    };
    let (a, v) = golden_section_max(value, 0.0, reach, 1e-3);
    if v > current && validate_pattern(scenario, &moved(&base, &dir, a)).is_ok() {
        positions.copy_from_slice(&moved(&base, &dir, a));
        v
    } else {
        current
    }
}

fn moved(base: &[f64], dir: &[f64], a: f64) -> Vec<f64> {
    base.iter().zip(dir).map(|(x, d)| x + a * d).collect()
}
