//! Line-of-sight channel model of a single dielectric waveguide with pinching
//! antennas.
//!
//! Coordinates are absolute meters. The waveguide runs parallel to the x-axis
//! at height `d`; antenna `n` sits at `(v_n, 0, d)` and users sit on the ground
//! plane `z = 0`. Every signal collected by an antenna travels inside the
//! waveguide to the feed point, picking up the phase `2π‖v_n − v_0‖/λ_g`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, PatternViolation, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Relative slack (in units of the minimum spacing) accepted by pattern
/// validation, so that positions built as `prev + Δ` pass.
const FEASIBILITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn ground(x: f64, y: f64) -> Self {
        Self::new(x, y, 0.0)
    }

    pub fn distance(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// Physical inputs for building a [`Scenario`]. The defaults are the 28 GHz
/// desk setup: `d = 3 m`, `n_eff = 1.4`, `Δ = λ/2`, a 100 m waveguide whose
/// feed sits at `x = −50 m`, noise −80 dBm and a 10 dBm average power budget.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub carrier_frequency: f64,
    pub refractive_index: f64,
    pub waveguide_height: f64,
    /// Minimum inter-antenna spacing as a multiple of the free-space wavelength.
    pub spacing_wavelengths: f64,
    /// Side length `D_x` of the user region; the feed sits at `x = −D_x/2`.
    pub region_length_x: f64,
    /// Waveguide length `L_max`; `None` means `D_x`.
    pub waveguide_length: Option<f64>,
    pub noise_power: f64,
    pub power_budget: f64,
    pub period: f64,
    pub antenna_count: usize,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            carrier_frequency: 28e9,
            refractive_index: 1.4,
            waveguide_height: 3.0,
            spacing_wavelengths: 0.5,
            region_length_x: 100.0,
            waveguide_length: None,
            noise_power: 1e-11,
            power_budget: 1e-2,
            period: 1.0,
            antenna_count: 1,
        }
    }
}

/// A fully validated system configuration: geometry, users and budgets.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    carrier_frequency: f64,
    wavelength: f64,
    guided_wavelength: f64,
    refractive_index: f64,
    path_constant: f64,
    amplitude: f64,
    wavenumber: f64,
    guided_wavenumber: f64,
    waveguide_height: f64,
    min_spacing: f64,
    span: (f64, f64),
    feed_point: Point,
    users: Vec<Point>,
    noise_power: f64,
    power_budget: f64,
    period: f64,
    antenna_count: usize,
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidScenario(format!(
            "{name} must be finite and positive, got {value}"
        )))
    }
}

impl Scenario {
    pub fn new(params: &ScenarioParams, users: Vec<Point>) -> Result<Self> {
        positive("carrier_frequency", params.carrier_frequency)?;
        positive("refractive_index", params.refractive_index)?;
        positive("waveguide_height", params.waveguide_height)?;
        positive("spacing_wavelengths", params.spacing_wavelengths)?;
        positive("region_length_x", params.region_length_x)?;
        let length = params.waveguide_length.unwrap_or(params.region_length_x);
        positive("waveguide_length", length)?;

        let wavelength = SPEED_OF_LIGHT / params.carrier_frequency;
        let lo = -params.region_length_x / 2.0;
        let path_constant = wavelength * wavelength / (16.0 * PI * PI);
        let guided_wavelength = wavelength / params.refractive_index;
        let scenario = Self {
            carrier_frequency: params.carrier_frequency,
            wavelength,
            guided_wavelength,
            refractive_index: params.refractive_index,
            path_constant,
            amplitude: path_constant.sqrt(),
            wavenumber: TAU / wavelength,
            guided_wavenumber: TAU / guided_wavelength,
            waveguide_height: params.waveguide_height,
            min_spacing: params.spacing_wavelengths * wavelength,
            span: (lo, lo + length),
            feed_point: Point::new(lo, 0.0, params.waveguide_height),
            users,
            noise_power: params.noise_power,
            power_budget: params.power_budget,
            period: params.period,
            antenna_count: params.antenna_count,
        };
        scenario.check()?;
        Ok(scenario)
    }

    fn check(&self) -> Result<()> {
        positive("noise_power", self.noise_power)?;
        positive("power_budget", self.power_budget)?;
        positive("period", self.period)?;
        if self.antenna_count == 0 {
            return Err(Error::InvalidScenario("antenna_count must be at least 1".into()));
        }
        if self.users.is_empty() {
            return Err(Error::InvalidScenario("at least one user is required".into()));
        }
        for (k, u) in self.users.iter().enumerate() {
            if !(u.x.is_finite() && u.y.is_finite()) || u.z != 0.0 {
                return Err(Error::InvalidScenario(format!(
                    "user {k} must be a finite ground-plane point, got {u:?}"
                )));
            }
        }
        let needed = (self.antenna_count - 1) as f64 * self.min_spacing;
        let span = self.span.1 - self.span.0;
        if span < needed {
            return Err(Error::SpanTooShort {
                span,
                antennas: self.antenna_count,
                min_spacing: self.min_spacing,
            });
        }
        Ok(())
    }

    /// Same geometry with a different average power budget (watts).
    pub fn with_power_budget(&self, power_budget: f64) -> Result<Self> {
        let mut s = self.clone();
        s.power_budget = power_budget;
        s.check()?;
        Ok(s)
    }

    pub fn with_antenna_count(&self, antenna_count: usize) -> Result<Self> {
        let mut s = self.clone();
        s.antenna_count = antenna_count;
        s.check()?;
        Ok(s)
    }

    pub fn with_users(&self, users: Vec<Point>) -> Result<Self> {
        let mut s = self.clone();
        s.users = users;
        s.check()?;
        Ok(s)
    }

    /// Rigid translation of users, waveguide and feed along x.
    pub fn translated(&self, dx: f64) -> Self {
        let mut s = self.clone();
        s.span = (s.span.0 + dx, s.span.1 + dx);
        s.feed_point.x += dx;
        for u in &mut s.users {
            u.x += dx;
        }
        s
    }

    pub fn carrier_frequency(&self) -> f64 {
        self.carrier_frequency
    }
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }
    pub fn guided_wavelength(&self) -> f64 {
        self.guided_wavelength
    }
    pub fn refractive_index(&self) -> f64 {
        self.refractive_index
    }
    /// `η = λ²/(16π²)`.
    pub fn path_constant(&self) -> f64 {
        self.path_constant
    }
    pub fn waveguide_height(&self) -> f64 {
        self.waveguide_height
    }
    pub fn min_spacing(&self) -> f64 {
        self.min_spacing
    }
    pub fn span(&self) -> (f64, f64) {
        self.span
    }
    pub fn feed_point(&self) -> Point {
        self.feed_point
    }
    pub fn users(&self) -> &[Point] {
        &self.users
    }
    pub fn user_count(&self) -> usize {
        self.users.len()
    }
    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }
    pub fn power_budget(&self) -> f64 {
        self.power_budget
    }
    pub fn period(&self) -> f64 {
        self.period
    }
    pub fn antenna_count(&self) -> usize {
        self.antenna_count
    }

    /// Aggregate noise power `Nσ²` seen at the feed point.
    pub fn feed_noise(&self) -> f64 {
        self.antenna_count as f64 * self.noise_power
    }

    pub fn user(&self, index: usize) -> Result<&Point> {
        self.users.get(index).ok_or(Error::UserIndex {
            index,
            users: self.users.len(),
        })
    }

    pub(crate) fn antenna_point(&self, x: f64) -> Point {
        Point::new(x, 0.0, self.waveguide_height)
    }

    pub(crate) fn feasibility_slack(&self) -> f64 {
        FEASIBILITY_SLACK * self.min_spacing
    }

    /// Largest single-antenna amplitude `√η/r` user `k` can see from an
    /// antenna anywhere in `[a, b]`.
    pub(crate) fn peak_amplitude_on(&self, user: usize, a: f64, b: f64) -> f64 {
        let u = &self.users[user];
        let dx = if u.x < a {
            a - u.x
        } else if u.x > b {
            u.x - b
        } else {
            0.0
        };
        let dz = self.waveguide_height - u.z;
        self.amplitude / (dx * dx + u.y * u.y + dz * dz).sqrt()
    }

    /// Phase `θ` of the term `g·h_k = A·exp(−jθ)` contributed by an antenna
    /// at `x`; strictly increasing in `x` because `n_eff > 1`.
    pub(crate) fn term_phase(&self, user: usize, x: f64) -> f64 {
        let antenna = self.antenna_point(x);
        self.guided_wavenumber * antenna.distance(&self.feed_point)
            + self.wavenumber * antenna.distance(&self.users[user])
    }

    /// Upper bound on `|γ_k|²` for any valid pattern:
    /// `(N·√η/√(y_k² + d²))²`.
    pub fn gain_ceiling(&self, user: usize) -> f64 {
        let u = &self.users[user];
        let dz = self.waveguide_height - u.z;
        let n = self.antenna_count as f64;
        n * n * self.path_constant / (u.y * u.y + dz * dz)
    }
}

/// User-to-antenna free-space coefficient `√η·exp(−j2πr/λ)/r`.
pub fn channel_coefficient(scenario: &Scenario, user_index: usize, antenna: Point) -> Result<Complex64> {
    let user = scenario.user(user_index)?;
    let tol = 1e-12 * scenario.waveguide_height.max(1.0);
    if (antenna.z - scenario.waveguide_height).abs() > tol {
        return Err(Error::Precondition(format!(
            "antenna height {} differs from waveguide height {}",
            antenna.z, scenario.waveguide_height
        )));
    }
    let r = antenna.distance(user);
    if r == 0.0 {
        return Err(Error::ZeroDistance);
    }
    Ok(free_space(scenario, r))
}

#[inline]
fn free_space(scenario: &Scenario, r: f64) -> Complex64 {
    Complex64::from_polar(scenario.amplitude / r, -scenario.wavenumber * r)
}

#[inline]
fn guided(scenario: &Scenario, antenna: &Point) -> Complex64 {
    let r = antenna.distance(&scenario.feed_point);
    Complex64::from_polar(1.0, -scenario.guided_wavenumber * r)
}

/// Phase response from every antenna of `pattern` to the feed point.
pub fn waveguide_response(scenario: &Scenario, pattern: &PinchingPattern) -> Vec<Complex64> {
    pattern
        .positions()
        .iter()
        .map(|&x| guided(scenario, &scenario.antenna_point(x)))
        .collect()
}

/// Per-antenna precomputation shared by every user: `g_n(x)` for one
/// candidate position.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AntennaSite {
    point: Point,
    guide: Complex64,
}

impl AntennaSite {
    #[inline]
    pub(crate) fn new(scenario: &Scenario, x: f64) -> Self {
        let point = scenario.antenna_point(x);
        Self {
            point,
            guide: guided(scenario, &point),
        }
    }

    /// `g_n · h_k(v_n)` for user `k`.
    #[inline]
    pub(crate) fn term(&self, scenario: &Scenario, user: usize) -> Complex64 {
        let r = self.point.distance(&scenario.users[user]);
        self.guide * free_space(scenario, r)
    }
}

/// Effective scalar channel `γ_k = gᵀh_k` of one user under one pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveChannel {
    pub user: usize,
    pub value: Complex64,
}

impl EffectiveChannel {
    pub fn gain(&self) -> f64 {
        self.value.norm_sqr()
    }
}

pub fn effective_channel(scenario: &Scenario, pattern: &PinchingPattern, user_index: usize) -> Result<EffectiveChannel> {
    scenario.user(user_index)?;
    Ok(EffectiveChannel {
        user: user_index,
        value: raw_channel(scenario, pattern.positions(), user_index),
    })
}

/// `|γ_k|²` without index checking; `positions` must come from a valid pattern.
pub(crate) fn raw_channel(scenario: &Scenario, positions: &[f64], user: usize) -> Complex64 {
    positions
        .iter()
        .map(|&x| AntennaSite::new(scenario, x).term(scenario, user))
        .sum()
}

pub(crate) fn raw_gain(scenario: &Scenario, positions: &[f64], user: usize) -> f64 {
    raw_channel(scenario, positions, user).norm_sqr()
}

/// Ordered antenna x-coordinates satisfying the feasible-set constraints of
/// the scenario it was validated against.
#[derive(Debug, Clone, PartialEq)]
pub struct PinchingPattern {
    positions: Vec<f64>,
}

impl PinchingPattern {
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn into_positions(self) -> Vec<f64> {
        self.positions
    }
}

/// Checks `positions` against the span, ordering and minimum-spacing rules,
/// reporting the first violated constraint in antenna order.
pub fn validate_pattern(scenario: &Scenario, positions: &[f64]) -> Result<PinchingPattern, PatternViolation> {
    if positions.len() != scenario.antenna_count {
        return Err(PatternViolation::Length {
            expected: scenario.antenna_count,
            found: positions.len(),
        });
    }
    let slack = scenario.feasibility_slack();
    let (lo, hi) = scenario.span;
    for (index, &position) in positions.iter().enumerate() {
        if !position.is_finite() {
            return Err(PatternViolation::NonFinite { index });
        }
        if position < lo - slack || position > hi + slack {
            return Err(PatternViolation::OutOfSpan { index, position, lo, hi });
        }
        if index > 0 {
            let gap = position - positions[index - 1];
            if gap <= 0.0 {
                return Err(PatternViolation::Ordering { index, position });
            }
            if gap < scenario.min_spacing - slack {
                return Err(PatternViolation::Spacing {
                    index,
                    gap,
                    min_spacing: scenario.min_spacing,
                });
            }
        }
    }
    Ok(PinchingPattern {
        positions: positions.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(users: Vec<Point>, n: usize) -> Scenario {
        let params = ScenarioParams {
            antenna_count: n,
            ..ScenarioParams::default()
        };
        Scenario::new(&params, users).unwrap()
    }

    #[test]
    fn wavelength_and_path_constant_at_28ghz() {
        let s = scenario(vec![Point::ground(0.0, 0.0)], 1);
        assert!((s.wavelength() - 0.010_706_873_5).abs() < 1e-10);
        let eta = s.wavelength().powi(2) / (16.0 * PI * PI);
        assert_eq!(s.path_constant(), eta);
        assert!((s.path_constant() - 7.2595e-7).abs() < 1e-10);
        assert!((s.guided_wavelength() * 1.4 - s.wavelength()).abs() < 1e-16);
    }

    #[test]
    fn coefficient_magnitude_at_height_three() {
        let s = scenario(vec![Point::ground(0.0, 0.0)], 1);
        let h = channel_coefficient(&s, 0, Point::new(0.0, 0.0, 3.0)).unwrap();
        let expected = s.path_constant().sqrt() / 3.0;
        assert!((h.norm() - expected).abs() < 1e-18);
        assert!((h.norm() - 2.8401e-4).abs() < 1e-7);
    }

    #[test]
    fn coefficient_phase_vanishes_at_integer_wavelengths() {
        // Height chosen so the distance is exactly 280 wavelengths.
        let wavelength = SPEED_OF_LIGHT / 28e9;
        let params = ScenarioParams {
            waveguide_height: 280.0 * wavelength,
            ..ScenarioParams::default()
        };
        let s = Scenario::new(&params, vec![Point::ground(0.0, 0.0)]).unwrap();
        let h = channel_coefficient(&s, 0, s.antenna_point(0.0)).unwrap();
        assert!(h.arg().abs() < 1e-9, "phase {}", h.arg());
    }

    #[test]
    fn coefficient_follows_inverse_distance() {
        let s = scenario(vec![Point::ground(0.0, 0.0), Point::ground(0.0, 2.0)], 1);
        // user 1 at r = sqrt(4 + 9); pick an antenna so that r doubles for user 0
        let near = channel_coefficient(&s, 0, Point::new(0.0, 0.0, 3.0)).unwrap();
        let far = channel_coefficient(&s, 0, Point::new((36.0f64 - 9.0).sqrt(), 0.0, 3.0)).unwrap();
        assert!((near.norm() / far.norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn coefficient_rejects_bad_inputs() {
        let s = scenario(vec![Point::ground(0.0, 0.0)], 1);
        assert!(matches!(
            channel_coefficient(&s, 3, Point::new(0.0, 0.0, 3.0)),
            Err(Error::UserIndex { .. })
        ));
        assert!(matches!(
            channel_coefficient(&s, 0, Point::new(0.0, 0.0, 2.0)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn waveguide_entries() {
        let s = scenario(vec![Point::ground(0.0, 0.0)], 3);
        let x0 = s.feed_point().x;
        let lg = s.guided_wavelength();
        let p = validate_pattern(&s, &[x0, x0 + lg, x0 + 3.0 * lg]).unwrap();
        let g = waveguide_response(&s, &p);
        assert_eq!(g[0], Complex64::new(1.0, 0.0));
        assert!((g[1] - 1.0).norm() < 1e-10);
        for e in &g {
            assert!((e.norm() - 1.0).abs() < 1e-15);
        }

        let q = validate_pattern(&s, &[x0, x0 + lg, x0 + 3.5 * lg]).unwrap();
        let h = waveguide_response(&s, &q);
        assert!((h[2] + g[2]).norm() < 1e-10);
    }

    #[test]
    fn single_antenna_above_user() {
        let s = scenario(vec![Point::ground(4.0, -7.0)], 1);
        let p = validate_pattern(&s, &[4.0]).unwrap();
        let gain = effective_channel(&s, &p, 0).unwrap().gain();
        let expected = s.path_constant() / (49.0 + 9.0);
        assert!((gain - expected).abs() <= 1e-15 * expected);
    }

    #[test]
    fn opposite_phases_interfere() {
        let s = scenario(vec![Point::ground(0.0, 5.0)], 2);
        let phase = |x: f64| {
            let a = s.antenna_point(x);
            TAU * (a.distance(s.user(0).unwrap()) / s.wavelength() + a.distance(&s.feed_point()) / s.guided_wavelength())
        };
        // Total phase is increasing in x to the right of the user; bisect for
        // the next position whose phase lead over antenna 1 is π mod 2π.
        let x1 = 0.0;
        let lead = phase(x1 + s.min_spacing()) - phase(x1) - PI;
        let target = phase(x1) + PI + TAU * (lead / TAU).ceil();
        let (mut a, mut b) = (x1 + s.min_spacing(), x1 + s.min_spacing() + s.guided_wavelength());
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if phase(m) < target {
                a = m;
            } else {
                b = m;
            }
        }
        let x2 = 0.5 * (a + b);
        let p = validate_pattern(&s, &[x1, x2]).unwrap();
        let h1 = channel_coefficient(&s, 0, s.antenna_point(x1)).unwrap().norm();
        let h2 = channel_coefficient(&s, 0, s.antenna_point(x2)).unwrap().norm();
        let gain = effective_channel(&s, &p, 0).unwrap().gain();
        assert!((gain - (h1 - h2).powi(2)).abs() < 1e-6 * h1 * h1, "{gain} vs {}", (h1 - h2).powi(2));
    }

    #[test]
    fn pattern_validation_reports_first_violation() {
        let s = scenario(vec![Point::ground(0.0, 0.0)], 2);
        let delta = s.min_spacing();
        assert!(matches!(
            validate_pattern(&s, &[0.0, delta / 2.0]),
            Err(PatternViolation::Spacing { index: 1, .. })
        ));
        assert!(validate_pattern(&s, &[0.0, delta]).is_ok());
        assert!(matches!(
            validate_pattern(&s, &[0.0, -1.0]),
            Err(PatternViolation::Ordering { index: 1, .. })
        ));
        let one = scenario(vec![Point::ground(0.0, 0.0)], 1);
        assert!(matches!(
            validate_pattern(&one, &[one.span().1 + 1.0]),
            Err(PatternViolation::OutOfSpan { index: 0, .. })
        ));
        assert!(matches!(
            validate_pattern(&s, &[0.0]),
            Err(PatternViolation::Length { expected: 2, found: 1 })
        ));
        assert!(matches!(
            validate_pattern(&one, &[f64::NAN]),
            Err(PatternViolation::NonFinite { index: 0 })
        ));
    }

    #[test]
    fn scenario_rejects_short_span() {
        let params = ScenarioParams {
            waveguide_length: Some(0.001),
            antenna_count: 3,
            ..ScenarioParams::default()
        };
        assert!(matches!(
            Scenario::new(&params, vec![Point::ground(0.0, 0.0)]),
            Err(Error::SpanTooShort { .. })
        ));
        let params = ScenarioParams {
            noise_power: 0.0,
            ..ScenarioParams::default()
        };
        assert!(Scenario::new(&params, vec![Point::ground(0.0, 0.0)]).is_err());
        let ok = ScenarioParams::default();
        assert!(Scenario::new(&ok, vec![Point::new(0.0, 0.0, 1.0)]).is_err());
    }
}
