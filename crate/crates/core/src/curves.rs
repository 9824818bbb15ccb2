//! Riskless discount and issuer survival term structures.
//!
//! Both curves store a piecewise-constant instantaneous rate: the value
//! attached to pillar `p_k` applies on `(p_{k-1}, p_k]` (with `p_0 = 0`),
//! and the last value is extrapolated flat. Integrals of the rate are
//! therefore exact sums over segments, so `Z(t, T)` and `Q(t, T)` carry no
//! quadrature error.

use crate::error::{Error, Result};
use crate::math::Quadrature;

const NODE_TOL: f64 = 1e-12;

/// Ordered set of year-fraction nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

impl TimeGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if let Some(first) = nodes.first() {
            if !first.is_finite() || *first < 0.0 {
                return Err(Error::domain(format!(
                    "grid starts at {first}, must be >= 0"
                )));
            }
        }
        for w in nodes.windows(2) {
            if !w[1].is_finite() || w[1] - w[0] <= NODE_TOL {
                return Err(Error::domain(format!(
                    "grid nodes must be strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { nodes })
    }

    /// Nodes `start, start + step, ...` up to and including `end`.
    ///
    /// A final short step is appended when `end - start` is not a multiple
    /// of `step`.
    pub fn uniform(start: f64, end: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::domain(format!(
                "grid step must be positive, got {step}"
            )));
        }
        if end < start {
            return Err(Error::domain(format!(
                "grid end {end} before start {start}"
            )));
        }
        let n = ((end - start) / step + 1e-9).floor() as usize;
        let mut nodes: Vec<f64> = (0..=n).map(|k| start + step * k as f64).collect();
        match nodes.last_mut() {
            Some(last) if (end - *last).abs() <= 1e-9 => *last = end,
            _ => nodes.push(end),
        }
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn first(&self) -> Option<f64> {
        self.nodes.first().copied()
    }

    pub fn last(&self) -> Option<f64> {
        self.nodes.last().copied()
    }

    /// Largest spacing between consecutive nodes.
    pub fn step_hint(&self) -> Option<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).reduce(f64::max)
    }
}

/// Regular payment periods `(start, end]` rolled backward from `maturity`.
///
/// Every period has length `1 / frequency`; the first one may start before
/// zero. Only periods ending after zero are returned, in ascending order.
pub fn payment_periods(maturity: f64, frequency: u32) -> Result<Vec<(f64, f64)>> {
    if !(maturity > 0.0) || !maturity.is_finite() {
        return Err(Error::domain(format!(
            "maturity must be positive, got {maturity}"
        )));
    }
    if frequency == 0 {
        return Err(Error::domain("payment frequency must be at least 1"));
    }
    let step = 1.0 / frequency as f64;
    let n = (maturity * frequency as f64 - 1e-9).ceil().max(1.0) as usize;
    let mut periods: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let end = maturity - step * k as f64;
            (end - step, end)
        })
        .filter(|(_, end)| *end > 1e-9)
        .collect();
    periods.reverse();
    // pin roundoff so a whole number of periods starts exactly at zero
    if let Some(first) = periods.first_mut() {
        if first.0.abs() < 1e-9 {
            first.0 = 0.0;
        }
    }
    Ok(periods)
}

/// Piecewise-constant rate with exact cumulative integral.
#[derive(Debug, Clone, PartialEq)]
struct PiecewiseFlat {
    pillars: Vec<f64>,
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl PiecewiseFlat {
    fn new(pillars: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if pillars.is_empty() || pillars.len() != values.len() {
            return Err(Error::domain(format!(
                "curve needs matching non-empty pillars and values ({} vs {})",
                pillars.len(),
                values.len()
            )));
        }
        if !(pillars[0] > 0.0) {
            return Err(Error::domain(format!(
                "first pillar {} must be > 0",
                pillars[0]
            )));
        }
        for w in pillars.windows(2) {
            if w[1] - w[0] <= NODE_TOL {
                return Err(Error::domain(format!(
                    "pillars must be strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite curve value {v}")));
        }
        let mut cumulative = Vec::with_capacity(pillars.len());
        let mut acc = 0.0;
        let mut prev = 0.0;
        for (p, v) in pillars.iter().zip(&values) {
            acc += v * (p - prev);
            cumulative.push(acc);
            prev = *p;
        }
        Ok(Self {
            pillars,
            values,
            cumulative,
        })
    }

    fn flat(value: f64) -> Result<Self> {
        Self::new(vec![1.0], vec![value])
    }

    /// Right-continuous value at `t`.
    fn value_at(&self, t: f64) -> f64 {
        let idx = self.pillars.partition_point(|&p| p <= t);
        self.values[idx.min(self.values.len() - 1)]
    }

    /// Left-continuous value at `t` (the segment ending at `t`).
    fn value_before(&self, t: f64) -> f64 {
        let idx = self.pillars.partition_point(|&p| p < t);
        self.values[idx.min(self.values.len() - 1)]
    }

    fn integral_to(&self, t: f64) -> f64 {
        let idx = self.pillars.partition_point(|&p| p <= t);
        let n = self.pillars.len();
        if idx == n {
            self.cumulative[n - 1] + self.values[n - 1] * (t - self.pillars[n - 1])
        } else if idx == 0 {
            self.values[0] * t
        } else {
            self.cumulative[idx - 1] + self.values[idx] * (t - self.pillars[idx - 1])
        }
    }

    fn integral(&self, t: f64, big_t: f64) -> f64 {
        self.integral_to(big_t) - self.integral_to(t)
    }

    fn shifted(&self, shift: f64) -> Self {
        let values = self.values.iter().map(|v| v + shift).collect();
        Self::new(self.pillars.clone(), values).expect("shift preserves pillars")
    }

    fn with_value(&self, idx: usize, value: f64) -> Self {
        let mut values = self.values.clone();
        values[idx] = value;
        Self::new(self.pillars.clone(), values).expect("pillars unchanged")
    }
}

fn check_interval(t: f64, big_t: f64) -> Result<()> {
    if !(t >= 0.0) || !big_t.is_finite() {
        return Err(Error::domain(format!("invalid interval start {t}")));
    }
    if big_t < t {
        return Err(Error::domain(format!(
            "interval end {big_t} precedes start {t}"
        )));
    }
    Ok(())
}

/// Riskless term structure `r(s)` producing `Z(t, T) = exp(-int_t^T r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountCurve {
    rates: PiecewiseFlat,
}

impl DiscountCurve {
    pub fn new(pillars: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        Ok(Self {
            rates: PiecewiseFlat::new(pillars, rates)?,
        })
    }

    pub fn flat(rate: f64) -> Result<Self> {
        Ok(Self {
            rates: PiecewiseFlat::flat(rate)?,
        })
    }

    pub fn discount_factor(&self, t: f64, big_t: f64) -> Result<f64> {
        check_interval(t, big_t)?;
        Ok(self.df(t, big_t))
    }

    /// Unchecked `Z(t, T)` for callers that already validated `t <= T`.
    #[inline]
    pub(crate) fn df(&self, t: f64, big_t: f64) -> f64 {
        (-self.rates.integral(t, big_t)).exp()
    }

    /// Instantaneous forward rate at `t` (right-continuous).
    pub fn rate_at(&self, t: f64) -> f64 {
        self.rates.value_at(t)
    }

    /// Same curve with every forward rate moved by `spread`.
    pub fn shifted(&self, spread: f64) -> Self {
        Self {
            rates: self.rates.shifted(spread),
        }
    }

    pub fn pillars(&self) -> &[f64] {
        &self.rates.pillars
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates.values
    }
}

/// Where a survival curve's hazards came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveSource {
    CdsImplied,
    BondImplied,
    UserSupplied,
}

/// Issuer hazard term structure `h(s)` producing `Q(t, T) = exp(-int_t^T h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalCurve {
    hazards: PiecewiseFlat,
    source: CurveSource,
}

impl SurvivalCurve {
    pub fn new(pillars: Vec<f64>, hazards: Vec<f64>, source: CurveSource) -> Result<Self> {
        if let Some(h) = hazards.iter().find(|h| **h < 0.0) {
            return Err(Error::domain(format!("negative hazard rate {h}")));
        }
        Ok(Self {
            hazards: PiecewiseFlat::new(pillars, hazards)?,
            source,
        })
    }

    pub fn flat(hazard: f64, source: CurveSource) -> Result<Self> {
        Self::new(vec![1.0], vec![hazard], source)
    }

    pub fn survival_prob(&self, t: f64, big_t: f64) -> Result<f64> {
        check_interval(t, big_t)?;
        Ok(self.q(t, big_t))
    }

    #[inline]
    pub(crate) fn q(&self, t: f64, big_t: f64) -> f64 {
        (-self.hazards.integral(t, big_t)).exp()
    }

    /// Hazard rate at `t`, right-continuous at pillars.
    pub fn hazard_at(&self, t: f64) -> f64 {
        self.hazards.value_at(t)
    }

    /// Hazard of the segment ending at `t` (left limit).
    pub fn hazard_before(&self, t: f64) -> f64 {
        self.hazards.value_before(t)
    }

    pub fn source(&self) -> CurveSource {
        self.source
    }

    pub fn with_source(mut self, source: CurveSource) -> Self {
        self.source = source;
        self
    }

    pub fn pillars(&self) -> &[f64] {
        &self.hazards.pillars
    }

    pub fn hazards(&self) -> &[f64] {
        &self.hazards.values
    }

    /// Copy with the hazard on segment `idx` replaced; used by bootstraps.
    pub(crate) fn with_hazard(&self, idx: usize, hazard: f64) -> Self {
        Self {
            hazards: self.hazards.with_value(idx, hazard),
            source: self.source,
        }
    }

    /// Every hazard moved by `shift` (clamped at zero).
    pub fn shifted(&self, shift: f64) -> Self {
        let values = self
            .hazards
            .values
            .iter()
            .map(|h| (h + shift).max(0.0))
            .collect();
        Self {
            hazards: PiecewiseFlat::new(self.hazards.pillars.clone(), values)
                .expect("pillars unchanged"),
            source: self.source,
        }
    }
}

/// Sorted breakpoints on `[t, T]`: the endpoints plus every pillar of either
/// curve strictly inside. Integrands built from `Z` and `Q` are smooth
/// between consecutive breakpoints.
pub(crate) fn kernel_breaks(
    disc: &DiscountCurve,
    surv: &SurvivalCurve,
    t: f64,
    big_t: f64,
) -> Vec<f64> {
    let mut breaks = Vec::with_capacity(disc.pillars().len() + surv.pillars().len() + 2);
    breaks.push(t);
    breaks.extend(
        disc.pillars()
            .iter()
            .chain(surv.pillars())
            .copied()
            .filter(|p| *p > t + NODE_TOL && *p < big_t - NODE_TOL),
    );
    breaks.push(big_t);
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite pillars"));
    breaks.dedup_by(|a, b| (*a - *b).abs() <= NODE_TOL);
    breaks
}

/// Integrate `f` across the grid with the shared composite quadrature.
///
/// This is the single integration entry point used by the pricing modules.
pub fn integrate_weighted<F: Fn(f64) -> f64>(
    f: F,
    grid: &TimeGrid,
    quad: &Quadrature,
) -> Result<f64> {
    if grid.len() < 2 {
        return Err(Error::domain("integration grid needs at least two nodes"));
    }
    Ok(quad.integrate_pieces(&f, grid.nodes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_rate_discounts_to_one() {
        let z = DiscountCurve::flat(0.0).unwrap();
        assert_eq!(z.discount_factor(0.3, 7.2).unwrap(), 1.0);
    }

    #[test]
    fn flat_rate_closed_form() {
        let z = DiscountCurve::flat(0.05).unwrap();
        assert!((z.discount_factor(0.0, 1.0).unwrap() - (-0.05f64).exp()).abs() < 1e-16);
        assert_eq!(z.discount_factor(3.0, 3.0).unwrap(), 1.0);
    }

    #[test]
    fn reversed_interval_is_domain_error() {
        let z = DiscountCurve::flat(0.05).unwrap();
        assert!(matches!(z.discount_factor(2.0, 1.0), Err(Error::Domain(_))));
        let q = SurvivalCurve::flat(0.02, CurveSource::UserSupplied).unwrap();
        assert!(matches!(q.survival_prob(2.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn survival_closed_forms() {
        let none = SurvivalCurve::flat(0.0, CurveSource::UserSupplied).unwrap();
        assert_eq!(none.survival_prob(0.0, 10.0).unwrap(), 1.0);
        let q = SurvivalCurve::flat(0.02, CurveSource::UserSupplied).unwrap();
        assert!((q.survival_prob(0.0, 5.0).unwrap() - (-0.10f64).exp()).abs() < 1e-16);
        // forward BCDS of 0.60% at 50% recovery over the first half year
        let fig = SurvivalCurve::new(
            vec![0.5, 1.0],
            vec![0.006 / 0.5, 0.0063 / 0.5],
            CurveSource::BondImplied,
        )
        .unwrap();
        assert!((fig.survival_prob(0.0, 0.5).unwrap() - (-0.006f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn negative_hazard_rejected() {
        assert!(SurvivalCurve::new(
            vec![1.0, 2.0],
            vec![0.01, -0.001],
            CurveSource::UserSupplied
        )
        .is_err());
    }

    #[test]
    fn hazard_is_right_continuous_with_left_limit() {
        let q = SurvivalCurve::new(vec![1.0, 2.0], vec![0.01, 0.03], CurveSource::UserSupplied)
            .unwrap();
        assert_eq!(q.hazard_at(1.0), 0.03);
        assert_eq!(q.hazard_before(1.0), 0.01);
        assert_eq!(q.hazard_at(9.0), 0.03);
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(vec![0.0, 0.5, 0.5]).is_err());
        assert!(TimeGrid::new(vec![-0.1, 0.5]).is_err());
        let g = TimeGrid::uniform(0.0, 5.0, 0.5).unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g.last(), Some(5.0));
        let stub = TimeGrid::uniform(0.0, 1.2, 0.5).unwrap();
        assert_eq!(stub.nodes(), &[0.0, 0.5, 1.0, 1.2]);
    }

    #[test]
    fn payment_periods_roll_back_from_maturity() {
        let p = payment_periods(1.0, 4).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p[0], (0.0, 0.25));
        assert_eq!(p[3].1, 1.0);
        let stub = payment_periods(1.2, 2).unwrap();
        assert_eq!(stub.len(), 3);
        assert!((stub[0].0 + 0.3).abs() < 1e-12 && (stub[0].1 - 0.2).abs() < 1e-12);
        assert!(payment_periods(0.0, 2).is_err());
    }

    #[test]
    fn quadrature_examples() {
        let quad = Quadrature::default();
        let unit = TimeGrid::new(vec![0.0, 1.0]).unwrap();
        assert!((integrate_weighted(|_| 1.0, &unit, &quad).unwrap() - 1.0).abs() < 1e-15);
        let two = TimeGrid::new(vec![0.0, 2.0]).unwrap();
        assert!((integrate_weighted(|u| u, &two, &quad).unwrap() - 2.0).abs() < 1e-15);
        let five = TimeGrid::new(vec![0.0, 5.0]).unwrap();
        let v = integrate_weighted(|u: f64| (-u).exp(), &five, &quad).unwrap();
        assert!((v - (1.0 - (-5.0f64).exp())).abs() < 1e-13);
        let empty = TimeGrid::new(vec![]).unwrap();
        assert!(integrate_weighted(|u| u, &empty, &quad).is_err());
    }

    #[test]
    fn quadrature_refinement_converges() {
        let grid = TimeGrid::new(vec![0.0, 3.0]).unwrap();
        let exact = 1.0 - (-3.0f64 * 4.0).exp();
        let f = |u: f64| 4.0 * (-4.0 * u).exp();
        let coarse = Quadrature {
            refinement: 1,
            max_panel: 3.0,
        };
        let fine = Quadrature {
            refinement: 4,
            max_panel: 3.0,
        };
        let e1 = (integrate_weighted(f, &grid, &coarse).unwrap() - exact).abs();
        let e2 = (integrate_weighted(f, &grid, &fine).unwrap() - exact).abs();
        assert!(e2 < e1 * 1e-3, "{e1} {e2}");
    }

    fn segment_sum(pillars: &[f64], values: &[f64], t: f64, big_t: f64) -> f64 {
        // independent route: walk segments and add overlaps
        let mut acc = 0.0;
        let mut lo = 0.0;
        for (i, (p, v)) in pillars.iter().zip(values).enumerate() {
            let hi = if i + 1 == pillars.len() {
                f64::INFINITY
            } else {
                *p
            };
            let a = t.max(lo);
            let b = big_t.min(hi);
            if b > a {
                acc += v * (b - a);
            }
            lo = *p;
        }
        acc
    }

    fn curve_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        prop::collection::vec((0.05f64..2.0, 0.0f64..0.15), 1..8).prop_map(|segs| {
            let mut t = 0.0;
            let mut pillars = Vec::new();
            let mut values = Vec::new();
            for (dt, v) in segs {
                t += dt;
                pillars.push(t);
                values.push(v);
            }
            (pillars, values)
        })
    }

    proptest! {
        #[test]
        fn segment_exactness((pillars, values) in curve_strategy(), a in 0.0f64..12.0, b in 0.0f64..12.0) {
            let (t, big_t) = if a <= b { (a, b) } else { (b, a) };
            let z = DiscountCurve::new(pillars.clone(), values.clone()).unwrap();
            let q = SurvivalCurve::new(pillars.clone(), values.clone(), CurveSource::UserSupplied).unwrap();
            let expected = (-segment_sum(&pillars, &values, t, big_t)).exp();
            prop_assert!(((z.discount_factor(t, big_t).unwrap() - expected) / expected).abs() < 1e-14);
            prop_assert!(((q.survival_prob(t, big_t).unwrap() - expected) / expected).abs() < 1e-14);
        }

        #[test]
        fn multiplicative_splitting((pillars, values) in curve_strategy(), seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let z = DiscountCurve::new(pillars.clone(), values.clone()).unwrap();
            let q = SurvivalCurve::new(pillars, values, CurveSource::UserSupplied).unwrap();
            for _ in 0..1000 {
                let mut v = [rng.gen_range(0.0..15.0), rng.gen_range(0.0..15.0), rng.gen_range(0.0..15.0)];
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let [t, u, big_t] = v;
                let lhs = z.discount_factor(t, big_t).unwrap();
                let rhs = z.discount_factor(t, u).unwrap() * z.discount_factor(u, big_t).unwrap();
                prop_assert!((lhs - rhs).abs() < 1e-12);
                let lhs = q.survival_prob(t, big_t).unwrap();
                let rhs = q.survival_prob(t, u).unwrap() * q.survival_prob(u, big_t).unwrap();
                prop_assert!((lhs - rhs).abs() < 1e-12);
                prop_assert!(lhs > 0.0 && lhs <= 1.0);
            }
        }

        #[test]
        fn survival_monotone((pillars, values) in curve_strategy()) {
            let q = SurvivalCurve::new(pillars, values, CurveSource::UserSupplied).unwrap();
            let mut prev = 1.0;
            for k in 0..200 {
                let s = q.survival_prob(0.0, k as f64 * 0.07).unwrap();
                prop_assert!(s <= prev);
                prev = s;
            }
        }
    }
}
