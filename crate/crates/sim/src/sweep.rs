use std::collections::HashMap;
use std::time::Instant;

use pinching_core::{capacity_bound, cas_rate, finite_m_rates, static_pass_rate_with, Scenario, Schedule, SearchConfig};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, SchemeKind};
use crate::error::SimError;
use crate::users::generate_users;

/// One `(trial, sweep point, scheme)` result.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub seed: u64,
    pub trial: usize,
    pub users: usize,
    pub antennas: usize,
    pub patterns: usize,
    pub scheme: SchemeKind,
    pub sum_rate: f64,
    pub wallclock_ms: Option<f64>,
}

/// The schedule behind one [`ResultRow`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleRecord {
    pub trial: usize,
    pub antennas: usize,
    pub patterns: usize,
    pub scheme: SchemeKind,
    pub schedule: Schedule,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOutput {
    pub rows: Vec<ResultRow>,
    pub schedules: Vec<ScheduleRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub users: usize,
    pub antennas: usize,
    pub patterns: usize,
    pub scheme: SchemeKind,
    pub trials: usize,
    pub mean: f64,
    /// Sample standard deviation; zero for a single trial.
    pub std: f64,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let value = f();
    (value, start.elapsed().as_secs_f64() * 1e3)
}

/// Sweep points grouped by antenna count, so each scenario is built once.
fn by_antennas(points: &[(usize, usize)]) -> Vec<(usize, Vec<usize>)> {
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for &(n, m) in points {
        match groups.iter_mut().find(|(g, _)| *g == n) {
            Some((_, ms)) => ms.push(m),
            None => groups.push((n, vec![m])),
        }
    }
    groups
}

/// Every requested scheme at every sweep point of one trial.
pub fn evaluate_trial(config: &ExperimentConfig, trial: usize) -> Result<SweepOutput, SimError> {
    let fail = |source| SimError::Trial { trial, source };
    let users = generate_users(config, trial);
    let wants = |s: SchemeKind| config.schemes.contains(&s);
    let keep_schedules = config.schedule_out.is_some();
    let mut out = SweepOutput::default();

    for (n, ms) in by_antennas(&config.sweep_points()) {
        let scenario = Scenario::new(&config.scenario_params(n), users.clone()).map_err(fail)?;
        let cfg = SearchConfig::for_scenario(&scenario);
        let needs_bound = wants(SchemeKind::Static) || wants(SchemeKind::Dyn) || wants(SchemeKind::Bound);

        let (bound, bound_ms) = if needs_bound {
            let (b, t) = timed(|| capacity_bound(&scenario, &cfg));
            (Some(b.map_err(fail)?), t)
        } else {
            (None, 0.0)
        };
        let mut fixed: HashMap<SchemeKind, (Schedule, f64, f64)> = HashMap::new();
        if wants(SchemeKind::Cas) {
            let (r, t) = timed(|| cas_rate(&scenario));
            let r = r.map_err(fail)?;
            fixed.insert(SchemeKind::Cas, (r.schedule, r.average_sum_rate, t));
        }
        if let Some(b) = &bound {
            if wants(SchemeKind::Static) {
                let (r, t) = timed(|| static_pass_rate_with(&scenario, b, &cfg));
                let r = r.map_err(fail)?;
                fixed.insert(SchemeKind::Static, (r.schedule, r.average_sum_rate, bound_ms + t));
            }
            if wants(SchemeKind::Bound) {
                let r = b.report.clone();
                fixed.insert(SchemeKind::Bound, (r.schedule, r.average_sum_rate, bound_ms));
            }
        }
        let dynamic = match (&bound, wants(SchemeKind::Dyn)) {
            (Some(b), true) => {
                let (r, t) = timed(|| finite_m_rates(&scenario, b, &ms, &cfg));
                Some((r.map_err(fail)?, bound_ms + t))
            }
            _ => None,
        };

        for (i, &m) in ms.iter().enumerate() {
            for &scheme in &config.schemes {
                let (schedule, rate, ms_taken) = match scheme {
                    SchemeKind::Dyn => {
                        let (reports, t) = dynamic.as_ref().expect("dynamic reports computed");
                        (&reports[i].schedule, reports[i].average_sum_rate, *t)
                    }
                    other => {
                        let (s, r, t) = &fixed[&other];
                        (s, *r, *t)
                    }
                };
                out.rows.push(ResultRow {
                    seed: config.seed,
                    trial,
                    users: config.users,
                    antennas: n,
                    patterns: m,
                    scheme,
                    sum_rate: rate,
                    wallclock_ms: config.timing.then_some(ms_taken),
                });
                if keep_schedules {
                    out.schedules.push(ScheduleRecord {
                        trial,
                        antennas: n,
                        patterns: m,
                        scheme,
                        schedule: schedule.clone(),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Runs every trial, in parallel, and concatenates results in trial order.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutput, SimError> {
    config.validate()?;
    let trials: Vec<SweepOutput> = (0..config.trials)
        .into_par_iter()
        .map(|t| evaluate_trial(config, t))
        .collect::<Result<_, _>>()?;
    let mut out = SweepOutput::default();
    for t in trials {
        out.rows.extend(t.rows);
        out.schedules.extend(t.schedules);
    }
    Ok(out)
}

/// Mean and sample standard deviation per `(N, M, scheme)`, in first
/// appearance order.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut order: Vec<(usize, usize, usize, SchemeKind)> = Vec::new();
    let mut samples: HashMap<(usize, usize, usize, SchemeKind), Vec<f64>> = HashMap::new();
    for r in rows {
        let key = (r.users, r.antennas, r.patterns, r.scheme);
        samples
            .entry(key)
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(r.sum_rate);
    }
    order
        .into_iter()
        .map(|key| {
            let v = &samples[&key];
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let std = if v.len() > 1 {
                (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            SummaryRow {
                users: key.0,
                antennas: key.1,
                patterns: key.2,
                scheme: key.3,
                trials: v.len(),
                mean,
                std,
            }
        })
        .collect()
}
