//! Reference schemes: the fixed conventional array and the static shared
//! pinching pattern.

use crate::capacity::{average_rate, capacity_bound, common_group_chain, BoundSolution, RateReport, Schedule, Scheme, Slot};
use crate::channel::{raw_gain, PinchingPattern, Scenario};
use crate::error::Result;
use crate::optimizer::{centered_pattern, SearchConfig};

/// Fixed array: `N` antennas at spacing `Δ` centered above the origin.
pub fn cas_pattern(scenario: &Scenario) -> Result<PinchingPattern> {
    centered_pattern(scenario, 0.0)
}

/// Whole period in one slot, every user at the full budget.
pub fn single_slot_report(scenario: &Scenario, pattern: PinchingPattern, scheme: Scheme) -> RateReport {
    let k = scenario.user_count();
    let user_gains = (0..k).map(|u| raw_gain(scenario, pattern.positions(), u)).collect();
    let schedule = Schedule {
        slots: vec![Slot {
            pattern,
            powers: vec![scenario.power_budget(); k],
            duration: scenario.period(),
        }],
        period: scenario.period(),
    };
    RateReport {
        scheme,
        average_sum_rate: average_rate(scenario, &schedule),
        schedule,
        user_gains,
    }
}

pub fn cas_rate(scenario: &Scenario) -> Result<RateReport> {
    Ok(single_slot_report(scenario, cas_pattern(scenario)?, Scheme::Cas))
}

/// Static scheme reusing an already computed bound solution for the
/// weighted-center start.
pub fn static_pass_rate_with(scenario: &Scenario, bound: &BoundSolution, cfg: &SearchConfig) -> Result<RateReport> {
    let shared = common_group_chain(scenario, bound, 1, cfg)?.remove(0);
    Ok(single_slot_report(scenario, shared.pattern, Scheme::Static))
}

/// One pattern optimized for the total gain of all users, held for the
/// whole period.
pub fn static_pass_rate(scenario: &Scenario, cfg: &SearchConfig) -> Result<RateReport> {
    let bound = capacity_bound(scenario, cfg)?;
    static_pass_rate_with(scenario, &bound, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{Point, ScenarioParams};

    #[test]
    fn cas_single_user_over_origin() {
        let s = Scenario::new(&ScenarioParams::default(), vec![Point::ground(0.0, 0.0)]).unwrap();
        let r = cas_rate(&s).unwrap();
        let expected = (1.0 + s.path_constant() * s.power_budget() / (9.0 * s.noise_power())).log2();
        assert!((r.average_sum_rate - expected).abs() < 1e-12);
    }

    #[test]
    fn cas_far_user_contributes_less() {
        let s = Scenario::new(
            &ScenarioParams::default(),
            vec![Point::ground(0.0, 0.0), Point::ground(30.0, 0.0)],
        )
        .unwrap();
        let r = cas_rate(&s).unwrap();
        assert!(r.user_gains[1] < r.user_gains[0]);
    }

    #[test]
    fn cas_array_is_centered() {
        let params = ScenarioParams {
            antenna_count: 4,
            ..ScenarioParams::default()
        };
        let s = Scenario::new(&params, vec![Point::ground(0.0, 0.0)]).unwrap();
        let p = cas_pattern(&s).unwrap();
        let mean: f64 = p.positions().iter().sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-15);
    }
}
