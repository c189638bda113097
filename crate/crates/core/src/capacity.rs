//! Sum-rate formulas, the alternating-transmission capacity bound and the
//! finite-pattern-budget transmission scheme.
//!
//! With an unlimited number of pattern switches the optimum lets each user
//! transmit alone under its own best pattern. With gains `G_k = max|γ_k|²`
//! the bound is `log2(1 + P·ΣG/(Nσ²))`, achieved by giving user `k` the
//! fraction `G_k/ΣG` of the period at power `P·ΣG/G_k`.

use std::fmt;

use crate::baselines::cas_pattern;
use crate::channel::{raw_gain, PinchingPattern, Scenario};
use crate::error::{Error, Result};
use crate::optimizer::{
    centered_pattern, common_pattern, initial_single_user_pattern, refine_single_user_pattern, subset_gain,
    CommonPattern, SearchConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Conventional fixed array around the origin.
    Cas,
    /// One optimized pattern shared by every user for the whole period.
    Static,
    /// `M` time slots, each with its own pattern.
    Dynamic(usize),
    /// Alternating transmission under every user's best pattern.
    Bound,
}

impl Scheme {
    pub fn label(&self) -> &'static str {
        match self {
            Scheme::Cas => "cas",
            Scheme::Static => "static",
            Scheme::Dynamic(_) => "dyn",
            Scheme::Bound => "bound",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Dynamic(m) => write!(f, "dyn(M={m})"),
            other => f.write_str(other.label()),
        }
    }
}

/// One time slot: a pattern, every user's transmit power (watts) and the
/// slot length (seconds).
#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub pattern: PinchingPattern,
    pub powers: Vec<f64>,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub slots: Vec<Slot>,
    pub period: f64,
}

impl Schedule {
    pub fn total_duration(&self) -> f64 {
        self.slots.iter().map(|s| s.duration).sum()
    }

    /// Time-averaged transmit power of `user` over the period.
    pub fn average_power(&self, user: usize) -> f64 {
        self.slots.iter().map(|s| s.powers[user] * s.duration).sum::<f64>() / self.period
    }

    /// Checks slot durations and the per-user average power budget.
    pub fn check(&self, scenario: &Scenario) -> Result<()> {
        let k = scenario.user_count();
        for (m, slot) in self.slots.iter().enumerate() {
            if slot.powers.len() != k {
                return Err(Error::Precondition(format!("slot {m} lists {} powers for {k} users", slot.powers.len())));
            }
            if !(slot.duration >= 0.0) || slot.powers.iter().any(|p| !(*p >= 0.0)) {
                return Err(Error::Precondition(format!("slot {m} has a negative duration or power")));
            }
        }
        let total = self.total_duration();
        if (total - self.period).abs() > 1e-12 * self.period {
            return Err(Error::Precondition(format!("slot durations sum to {total}, period is {}", self.period)));
        }
        let budget = scenario.power_budget();
        for user in 0..k {
            let avg = self.average_power(user);
            if avg > budget * (1.0 + 1e-12) {
                return Err(Error::Precondition(format!(
                    "user {user} averages {avg} W over budget {budget} W"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub scheme: Scheme,
    /// Average sum rate, bits/s/Hz.
    pub average_sum_rate: f64,
    pub schedule: Schedule,
    /// Each user's `|γ_k|²` in the slot where it transmits.
    pub user_gains: Vec<f64>,
}

/// Sum rate of one slot with all users decoded jointly:
/// `log2(1 + Σ_k p_k|γ_k|²/(Nσ²))`.
pub fn noma_slot_rate(scenario: &Scenario, slot: &Slot) -> f64 {
    let received: f64 = slot
        .powers
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(k, &p)| p * raw_gain(scenario, slot.pattern.positions(), k))
        .sum();
    (received / scenario.feed_noise()).ln_1p() / std::f64::consts::LN_2
}

/// `(1/T)·Σ_m t_m·R[m]`.
pub fn average_rate(scenario: &Scenario, schedule: &Schedule) -> f64 {
    schedule
        .slots
        .iter()
        .filter(|s| s.duration > 0.0)
        .map(|s| s.duration * noma_slot_rate(scenario, s))
        .sum::<f64>()
        / schedule.period
}

/// Capacity bound together with the schedule that attains it.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSolution {
    pub report: RateReport,
    /// `G_k`, the best gain found for each user.
    pub gains: Vec<f64>,
    /// Pattern attaining `G_k`.
    pub patterns: Vec<PinchingPattern>,
}

impl BoundSolution {
    pub fn bound(&self) -> f64 {
        self.report.average_sum_rate
    }
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

/// The alternating-transmission capacity bound and its `K`-slot schedule.
///
/// Each user's pattern is the refined closed-form start; a user adopts
/// another user's refined pattern when that one gives it a strictly larger
/// gain. For `N > 1` the refinement is local, so the value is a lower
/// estimate of the true bound.
pub fn capacity_bound(scenario: &Scenario, cfg: &SearchConfig) -> Result<BoundSolution> {
    cfg.validate(scenario)?;
    let k = scenario.user_count();
    let refined = (0..k)
        .map(|u| {
            let init = initial_single_user_pattern(scenario, u)?;
            refine_single_user_pattern(scenario, &init, u, cfg)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut gains = Vec::with_capacity(k);
    let mut patterns = Vec::with_capacity(k);
    for user in 0..k {
        let mut best = (user, raw_gain(scenario, refined[user].positions(), user));
        for (j, p) in refined.iter().enumerate() {
            let g = raw_gain(scenario, p.positions(), user);
            if g > best.1 {
                best = (j, g);
            }
        }
        gains.push(best.1);
        patterns.push(refined[best.0].clone());
    }
    bound_from_gains(scenario, gains, patterns)
}

fn bound_from_gains(scenario: &Scenario, gains: Vec<f64>, patterns: Vec<PinchingPattern>) -> Result<BoundSolution> {
    let k = gains.len();
    if let Some(u) = gains.iter().position(|g| !(*g > 0.0)) {
        return Err(Error::Degenerate(format!("user {u} has zero channel gain")));
    }
    let total: f64 = gains.iter().sum();
    let budget = scenario.power_budget();
    let period = scenario.period();
    let slots = (0..k)
        .map(|u| {
            let mut powers = vec![0.0; k];
            powers[u] = budget * total / gains[u];
            Slot {
                pattern: patterns[u].clone(),
                powers,
                duration: period * gains[u] / total,
            }
        })
        .collect();
    let bound = log2_1p(budget * total / scenario.feed_noise());
    Ok(BoundSolution {
        report: RateReport {
            scheme: Scheme::Bound,
            average_sum_rate: bound,
            schedule: Schedule { slots, period },
            user_gains: gains.clone(),
        },
        gains,
        patterns,
    })
}

/// Single-antenna closed form `log2(1 + ηP/σ² · Σ_k 1/(y_k² + d²))`.
pub fn single_antenna_closed_form(scenario: &Scenario) -> Result<f64> {
    if scenario.antenna_count() != 1 {
        return Err(Error::Precondition(format!(
            "closed form needs a single antenna, scenario has {}",
            scenario.antenna_count()
        )));
    }
    let d = scenario.waveguide_height();
    let inv: f64 = scenario.users().iter().map(|u| 1.0 / (u.y * u.y + d * d)).sum();
    Ok(log2_1p(
        scenario.path_constant() * scenario.power_budget() / scenario.noise_power() * inv,
    ))
}

/// Optimal multipliers of the average-power constraints,
/// `λ_k = G_k / (Nσ² + P·ΣG)`.
pub fn dual_variables(scenario: &Scenario, gains: &[f64]) -> Vec<f64> {
    let total: f64 = gains.iter().sum();
    let denom = scenario.feed_noise() + scenario.power_budget() * total;
    gains.iter().map(|g| g / denom).collect()
}

/// Stationarity of the per-slot Lagrangian at one candidate solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResidual {
    /// `∂f/∂p_k` for the transmitting user; zero at an optimum.
    pub active: f64,
    /// Largest `∂f/∂p_i` over silent users; nonpositive at an optimum.
    pub max_inactive: Option<f64>,
}

impl KktResidual {
    pub fn holds(&self, tol: f64) -> bool {
        self.active.abs() < tol && self.max_inactive.map_or(true, |r| r <= tol)
    }
}

/// For slot `k` of the bound schedule, evaluates the gradient of
/// `ln(1 + Σ_i p_i|γ_i|²/(Nσ²)) − Σ_i λ_i p_i` at that slot's pattern and
/// powers, with the multipliers from [`dual_variables`].
pub fn kkt_stationarity_residual(scenario: &Scenario, solution: &BoundSolution) -> Vec<KktResidual> {
    let lambda = dual_variables(scenario, &solution.gains);
    let noise = scenario.feed_noise();
    solution
        .report
        .schedule
        .slots
        .iter()
        .enumerate()
        .map(|(k, slot)| {
            let gains: Vec<f64> = (0..scenario.user_count())
                .map(|i| raw_gain(scenario, slot.pattern.positions(), i))
                .collect();
            let received: f64 = slot.powers.iter().zip(&gains).map(|(p, g)| p * g).sum();
            let denom = noise + received;
            let grad = |i: usize| gains[i] / denom - lambda[i];
            let max_inactive = (0..gains.len()).filter(|&i| i != k).map(grad).reduce(f64::max);
            KktResidual {
                active: grad(k),
                max_inactive,
            }
        })
        .collect()
}

/// `Σ_m t_m·log2(1 + c_m/t_m)` with the `t = 0` terms taken as zero.
pub fn time_allocation_objective(coefficients: &[f64], durations: &[f64]) -> f64 {
    coefficients
        .iter()
        .zip(durations)
        .filter(|(_, &t)| t > 0.0)
        .map(|(&c, &t)| t * log2_1p(c / t))
        .sum()
}

/// Derivative of `t·log2(1 + c/t)` in `t`; strictly decreasing in `t`.
fn marginal_rate(c: f64, t: f64) -> f64 {
    let s = c / t;
    (s.ln_1p() - s / (1.0 + s)) / std::f64::consts::LN_2
}

/// Slot length with `marginal_rate(c, t) = mu`, capped at `period`.
fn duration_at(c: f64, mu: f64, period: f64) -> f64 {
    if marginal_rate(c, period) >= mu {
        return period;
    }
    let (mut lo, mut hi) = (0.0, period);
    while hi - lo > 1e-14 * period {
        let mid = 0.5 * (lo + hi);
        if marginal_rate(c, mid) > mu {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Maximizes `Σ_m t_m·log2(1 + c_m/t_m)` over `Σ t_m = T`, `t_m ≥ 0`.
///
/// The sum constraint's multiplier `μ` is found by bisection; for each `μ`
/// every slot length solves its own stationarity condition by an inner
/// bisection.
pub fn time_allocation_solve(coefficients: &[f64], period: f64) -> Result<Vec<f64>> {
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::Precondition(format!("period must be positive, got {period}")));
    }
    if coefficients.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
        return Err(Error::Precondition("coefficients must be finite and nonnegative".into()));
    }
    let active: Vec<usize> = (0..coefficients.len()).filter(|&m| coefficients[m] > 0.0).collect();
    if active.is_empty() {
        return Err(Error::Degenerate("every slot coefficient is zero".into()));
    }

    let mut durations = vec![0.0; coefficients.len()];
    if active.len() == 1 {
        durations[active[0]] = period;
        return Ok(durations);
    }
    let fill = |mu: f64, out: &mut [f64]| -> f64 {
        active
            .iter()
            .map(|&m| {
                out[m] = duration_at(coefficients[m], mu, period);
                out[m]
            })
            .sum()
    };

    let share = period / active.len() as f64;
    let mut mu_lo = 0.0;
    let mut mu_hi = active
        .iter()
        .map(|&m| marginal_rate(coefficients[m], share))
        .fold(0.0, f64::max);
    for _ in 0..200 {
        let mu = 0.5 * (mu_lo + mu_hi);
        let total = fill(mu, &mut durations);
        if (total - period).abs() <= 1e-12 * period {
            break;
        }
        if total > period {
            mu_lo = mu;
        } else {
            mu_hi = mu;
        }
    }
    let total: f64 = durations.iter().sum();
    for t in &mut durations {
        *t *= period / total;
    }
    Ok(durations)
}

/// Users in descending order of `G_k`, ties by ascending index.
pub fn user_ranking(gains: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..gains.len()).collect();
    order.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]).then(a.cmp(&b)));
    order
}

/// Starting point for a shared pattern: centered at the `G`-weighted mean
/// x-coordinate of `users`.
pub fn weighted_center_pattern(scenario: &Scenario, users: &[usize], gains: &[f64]) -> Result<PinchingPattern> {
    let weight: f64 = users.iter().map(|&k| gains[k]).sum();
    let center = users.iter().map(|&k| gains[k] * scenario.users()[k].x).sum::<f64>() / weight;
    centered_pattern(scenario, center)
}

fn best_of(scenario: &Scenario, users: &[usize], starts: &[PinchingPattern], cfg: &SearchConfig) -> Result<CommonPattern> {
    let mut best: Option<CommonPattern> = None;
    for start in starts {
        let run = common_pattern(scenario, users, start, cfg)?;
        if best.as_ref().map_or(true, |b| run.objective > b.objective) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one start"))
}

/// Shared patterns for the nested groups `{ranks m..K}`, `m = 1..=upto`.
///
/// The first group (every user) starts from the fixed array and from the
/// weighted center. Each later group starts from its weighted center and
/// from the previous group's pattern, so a group never does worse than the
/// pattern inherited from the larger group.
pub fn common_group_chain(
    scenario: &Scenario,
    bound: &BoundSolution,
    upto: usize,
    cfg: &SearchConfig,
) -> Result<Vec<CommonPattern>> {
    let ranking = user_ranking(&bound.gains);
    let upto = upto.min(ranking.len());
    let mut chain: Vec<CommonPattern> = Vec::with_capacity(upto);
    for m in 1..=upto {
        let group = &ranking[m - 1..];
        let center = weighted_center_pattern(scenario, group, &bound.gains)?;
        let inherited = match chain.last() {
            Some(prev) => prev.pattern.clone(),
            None => cas_pattern(scenario)?,
        };
        chain.push(best_of(scenario, group, &[inherited, center], cfg)?);
    }
    Ok(chain)
}

/// Schedule with `M` slots: the `M − 1` strongest users get their own slot
/// and best pattern, the rest share `common` in the last slot. Slot lengths
/// come from [`time_allocation_solve`]; every active user transmits at
/// `P·T/t_m` in its slot.
pub fn grouped_schedule_rate(
    scenario: &Scenario,
    bound: &BoundSolution,
    m: usize,
    common: &PinchingPattern,
) -> Result<RateReport> {
    let k = scenario.user_count();
    if m == 0 || m > k {
        return Err(Error::Precondition(format!("slot count must be in 1..={k}, got {m}")));
    }
    let ranking = user_ranking(&bound.gains);
    let period = scenario.period();
    let budget = scenario.power_budget();
    let noise = scenario.feed_noise();

    let mut groups: Vec<(PinchingPattern, Vec<usize>)> = ranking[..m - 1]
        .iter()
        .map(|&u| (bound.patterns[u].clone(), vec![u]))
        .collect();
    groups.push((common.clone(), ranking[m - 1..].to_vec()));

    let mut user_gains = vec![0.0; k];
    let coefficients: Vec<f64> = groups
        .iter()
        .map(|(pattern, users)| {
            for &u in users {
                user_gains[u] = raw_gain(scenario, pattern.positions(), u);
            }
            budget * period * subset_gain(scenario, users, pattern) / noise
        })
        .collect();
    let durations = time_allocation_solve(&coefficients, period)?;

    let slots = groups
        .into_iter()
        .zip(&durations)
        .map(|((pattern, users), &t)| {
            let mut powers = vec![0.0; k];
            if t > 0.0 {
                for u in users {
                    powers[u] = budget * period / t;
                }
            }
            Slot {
                pattern,
                powers,
                duration: t,
            }
        })
        .collect();
    let schedule = Schedule { slots, period };
    Ok(RateReport {
        scheme: Scheme::Dynamic(m),
        average_sum_rate: average_rate(scenario, &schedule),
        schedule,
        user_gains,
    })
}

/// Reports for each requested slot budget `M`. `M = K` runs the grouped
/// scheme with a singleton shared group; budgets `M > K` return the
/// capacity-bound schedule, which needs at most `K` patterns.
pub fn finite_m_rates(
    scenario: &Scenario,
    bound: &BoundSolution,
    budgets: &[usize],
    cfg: &SearchConfig,
) -> Result<Vec<RateReport>> {
    let k = scenario.user_count();
    if let Some(&bad) = budgets.iter().find(|&&m| m == 0) {
        return Err(Error::Precondition(format!("slot budget must be at least 1, got {bad}")));
    }
    let deepest = budgets.iter().copied().filter(|&m| m <= k).max().unwrap_or(0);
    let chain = common_group_chain(scenario, bound, deepest, cfg)?;
    budgets
        .iter()
        .map(|&m| {
            if m > k {
                let mut report = bound.report.clone();
                report.scheme = Scheme::Dynamic(m);
                Ok(report)
            } else {
                grouped_schedule_rate(scenario, bound, m, &chain[m - 1].pattern)
            }
        })
        .collect()
}

pub fn finite_m_rate(scenario: &Scenario, m: usize, cfg: &SearchConfig) -> Result<RateReport> {
    if m == 0 {
        return Err(Error::Precondition("slot budget must be at least 1".into()));
    }
    let bound = capacity_bound(scenario, cfg)?;
    Ok(finite_m_rates(scenario, &bound, &[m], cfg)?.remove(0))
}
