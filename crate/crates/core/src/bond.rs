//! Survival-based valuation of fixed-coupon credit bonds.
//!
//! Two pricing modes share one API. `Discrete` pays coupons on the bond's
//! schedule and settles defaults at the end of fine sub-steps of each coupon
//! period. `Continuous` pays the coupon as a continuous stream and recovery
//! at the instant of default, which is the regime in which the forward-price
//! differential identities hold exactly.

use crate::cds::{check_recovery, fmt_tenor, CdsEngine};
use crate::curves::{
    integrate_weighted, kernel_breaks, payment_periods, CurveSource, DiscountCurve, SurvivalCurve,
    TimeGrid,
};
use crate::error::{Error, Result};
use crate::math::{brent, brent_expanding, BrentOptions, Quadrature};

/// A fixed-coupon bullet bond of a defaultable issuer.
#[derive(Debug, Clone, PartialEq)]
pub struct CreditBond {
    pub id: String,
    /// Annual coupon rate.
    pub coupon: f64,
    pub frequency: u32,
    pub maturity: f64,
    /// Full (invoice) price as a fraction of face.
    pub price: f64,
    pub recovery: f64,
    /// Fraction of the accrued coupon recovered on default.
    pub coupon_recovery: f64,
}

impl CreditBond {
    pub fn new(
        id: impl Into<String>,
        coupon: f64,
        frequency: u32,
        maturity: f64,
        price: f64,
        recovery: f64,
        coupon_recovery: f64,
    ) -> Result<Self> {
        let id = id.into();
        if !(maturity > 0.0) || !maturity.is_finite() {
            return Err(Error::domain(format!(
                "bond {id}: maturity must be positive"
            )));
        }
        if !(coupon >= 0.0) || !coupon.is_finite() {
            return Err(Error::domain(format!("bond {id}: coupon must be >= 0")));
        }
        if !(price > 0.0) || !price.is_finite() {
            return Err(Error::domain(format!("bond {id}: price must be positive")));
        }
        if frequency == 0 {
            return Err(Error::domain(format!(
                "bond {id}: frequency must be at least 1"
            )));
        }
        if !(0.0..=1.0).contains(&coupon_recovery) {
            return Err(Error::domain(format!(
                "bond {id}: coupon recovery must lie in [0, 1]"
            )));
        }
        check_recovery(recovery)?;
        Ok(Self {
            id,
            coupon,
            frequency,
            maturity,
            price,
            recovery,
            coupon_recovery,
        })
    }

    /// Coupon amount paid each period.
    pub fn period_coupon(&self) -> f64 {
        self.coupon / self.frequency as f64
    }

    /// Coupon periods `(start, end]` ending after zero.
    pub fn periods(&self) -> Vec<(f64, f64)> {
        payment_periods(self.maturity, self.frequency).expect("validated bond")
    }

    /// Same bond quoted at a different price.
    pub fn with_price(&self, price: f64) -> Self {
        Self {
            price,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PricingMode {
    #[default]
    Discrete,
    Continuous,
}

/// Bond value split into its three legs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondPv {
    pub coupon_leg: f64,
    pub principal_leg: f64,
    pub recovery_leg: f64,
}

impl BondPv {
    pub fn total(&self) -> f64 {
        self.coupon_leg + self.principal_leg + self.recovery_leg
    }
}

/// Forward prices `P(t, T)` on a grid ending at maturity.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardPriceCurve {
    pub grid: TimeGrid,
    pub prices: Vec<f64>,
}

impl ForwardPriceCurve {
    /// Price changes `P(t_{i+1}) - P(t_i)` over each grid interval.
    pub fn increments(&self) -> Vec<f64> {
        self.prices.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Finite-difference slope `dP/dt` per grid interval.
    pub fn slopes(&self) -> Vec<f64> {
        self.grid
            .nodes()
            .windows(2)
            .zip(self.prices.windows(2))
            .map(|(t, p)| (p[1] - p[0]) / (t[1] - t[0]))
            .collect()
    }
}

/// Risk-free-equivalent coupon rate at each grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct RfcStream {
    pub grid: TimeGrid,
    pub rfc: Vec<f64>,
}

/// Pricing settings for credit bonds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondPricer {
    pub mode: PricingMode,
    /// Default-settlement sub-steps per year in discrete mode.
    pub steps_per_year: usize,
    pub quadrature: Quadrature,
}

impl Default for BondPricer {
    fn default() -> Self {
        Self {
            mode: PricingMode::Discrete,
            steps_per_year: 12,
            quadrature: Quadrature::default(),
        }
    }
}

impl BondPricer {
    pub fn continuous() -> Self {
        Self {
            mode: PricingMode::Continuous,
            ..Self::default()
        }
    }

    /// Value at `t` of the cashflows after `t`, conditional on survival to
    /// `t`, discounted to `t`. At `t = 0` this is the model price.
    pub fn forward_pv(
        &self,
        bond: &CreditBond,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        t: f64,
    ) -> Result<BondPv> {
        let big_t = bond.maturity;
        if !(t >= 0.0) || t > big_t + 1e-12 {
            return Err(Error::domain(format!(
                "bond {}: forward date {t} outside [0, {big_t}]",
                bond.id
            )));
        }
        let t = t.min(big_t);
        let principal_leg = surv.q(t, big_t) * disc.df(t, big_t);
        match self.mode {
            PricingMode::Discrete => Ok(self.discrete_pv(bond, surv, disc, t, principal_leg)),
            PricingMode::Continuous => {
                if big_t - t <= 0.0 {
                    return Ok(BondPv {
                        coupon_leg: 0.0,
                        principal_leg,
                        recovery_leg: 0.0,
                    });
                }
                let grid = TimeGrid::new(kernel_breaks(disc, surv, t, big_t))?;
                let kernel = |s: f64| surv.q(t, s) * disc.df(t, s);
                let annuity = integrate_weighted(kernel, &grid, &self.quadrature)?;
                let loss =
                    integrate_weighted(|s| surv.hazard_at(s) * kernel(s), &grid, &self.quadrature)?;
                Ok(BondPv {
                    coupon_leg: bond.coupon * annuity,
                    principal_leg,
                    recovery_leg: bond.recovery * loss,
                })
            }
        }
    }

    fn discrete_pv(
        &self,
        bond: &CreditBond,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        t: f64,
        principal_leg: f64,
    ) -> BondPv {
        let cpn = bond.period_coupon();
        let mut coupon_leg = 0.0;
        let mut recovery_leg = 0.0;
        for (a, b) in bond.periods() {
            if b <= t + 1e-12 {
                continue;
            }
            coupon_leg += cpn * surv.q(t, b) * disc.df(t, b);
            for (u, v) in sub_steps(a.max(t), b, self.steps_per_year) {
                let payoff = bond.recovery + bond.coupon_recovery * bond.coupon * (v - a);
                recovery_leg += (surv.q(t, u) - surv.q(t, v)) * disc.df(t, v) * payoff;
            }
        }
        BondPv {
            coupon_leg,
            principal_leg,
            recovery_leg,
        }
    }

    pub fn bond_pv(
        &self,
        bond: &CreditBond,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
    ) -> Result<f64> {
        Ok(self.forward_pv(bond, surv, disc, 0.0)?.total())
    }

    /// Forward price at every node; the node at maturity is exactly 1.
    pub fn forward_price_curve(
        &self,
        bond: &CreditBond,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        grid: &TimeGrid,
    ) -> Result<ForwardPriceCurve> {
        match grid.last() {
            Some(last) if (last - bond.maturity).abs() <= 1e-9 => {}
            _ => {
                return Err(Error::domain(format!(
                    "forward price grid must end at maturity {}",
                    bond.maturity
                )))
            }
        }
        let n = grid.len();
        let prices = grid
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                if i + 1 == n {
                    Ok(1.0)
                } else {
                    Ok(self.forward_pv(bond, surv, disc, t)?.total())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ForwardPriceCurve {
            grid: grid.clone(),
            prices,
        })
    }

    /// Forward prices net of the coupon accrued since the last coupon date.
    ///
    /// In discrete mode the full forward price drops by a coupon at every
    /// payment date; the clean price has no such jumps. Continuous-mode
    /// prices are returned unchanged.
    pub fn clean_forward_price_curve(
        &self,
        bond: &CreditBond,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        grid: &TimeGrid,
    ) -> Result<ForwardPriceCurve> {
        let mut curve = self.forward_price_curve(bond, surv, disc, grid)?;
        if self.mode == PricingMode::Discrete {
            let periods = bond.periods();
            for (p, &t) in curve.prices.iter_mut().zip(grid.nodes()) {
                if let Some(&(a, _)) = periods
                    .iter()
                    .find(|(a, b)| t > *a + 1e-12 && t < *b - 1e-12)
                {
                    *p -= bond.coupon * (t - a);
                }
            }
        }
        Ok(curve)
    }

    /// Risk-free-equivalent coupon rate `C - h(t) (P(t, T) - R)`.
    pub fn rfc_at(
        &self,
        bond: &CreditBond,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        t: f64,
    ) -> Result<f64> {
        let p = self.forward_pv(bond, surv, disc, t)?.total();
        Ok(bond.coupon - surv.hazard_at(t) * (p - bond.recovery))
    }

    pub fn rfc_stream(
        &self,
        bond: &CreditBond,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        grid: &TimeGrid,
    ) -> Result<RfcStream> {
        let rfc = grid
            .nodes()
            .iter()
            .map(|&t| self.rfc_at(bond, surv, disc, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(RfcStream {
            grid: grid.clone(),
            rfc,
        })
    }

    /// Value at `t` of the RFC stream plus principal, discounted on the
    /// riskless curve alone. In continuous mode this reproduces `P(t, T)`.
    pub fn rfc_replication(
        &self,
        bond: &CreditBond,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        t: f64,
    ) -> Result<f64> {
        let big_t = bond.maturity;
        if big_t - t <= 1e-12 {
            return Ok(1.0);
        }
        let mut breaks = kernel_breaks(disc, surv, t, big_t);
        if self.mode == PricingMode::Discrete {
            breaks.extend(
                bond.periods()
                    .iter()
                    .map(|p| p.1)
                    .filter(|b| *b > t && *b < big_t),
            );
            breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
        }
        let grid = TimeGrid::new(breaks)?;
        let stream = integrate_weighted(
            |s| self.rfc_at(bond, surv, disc, s).unwrap_or(f64::NAN) * disc.df(t, s),
            &grid,
            &self.quadrature,
        )?;
        if !stream.is_finite() {
            return Err(Error::numeric("RFC replication integral is not finite"));
        }
        Ok(stream + disc.df(t, big_t))
    }

    /// Constant spread over the riskless curve that discounts the promised
    /// cashflows to the market price.
    pub fn zspread(&self, bond: &CreditBond, disc: &DiscountCurve) -> Result<f64> {
        let flows = promised_cashflows(bond);
        let pv = |z: f64| -> f64 {
            flows
                .iter()
                .map(|(t, cf)| cf * disc.df(0.0, *t) * (-z * t).exp())
                .sum::<f64>()
                - bond.price
        };
        brent_expanding(pv, -0.01, 0.2, 20)
            .map_err(|e| Error::numeric(format!("z-spread for {}: {e}", bond.id)))
    }

    /// Spread added to riskless discounting (survival untouched) that makes
    /// the model price equal the market price. Positive means cheap.
    pub fn oasf_solve(
        &self,
        bond: &CreditBond,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
    ) -> Result<f64> {
        let residual = |x: f64| -> f64 {
            match self.bond_pv(bond, surv, &disc.shifted(x)) {
                Ok(v) => v - bond.price,
                Err(_) => f64::NAN,
            }
        };
        let r0 = residual(0.0);
        if r0 == 0.0 {
            return Ok(0.0);
        }
        brent_expanding(residual, -0.01, 0.01, 30)
            .map_err(|e| Error::numeric(format!("OAS-to-fit for {}: {e}", bond.id)))
    }

    /// Sequential hazard bootstrap with one pillar per bond maturity.
    pub fn bootstrap_hazard_from_bonds(
        &self,
        bonds: &[CreditBond],
        disc: &DiscountCurve,
    ) -> Result<SurvivalCurve> {
        let first = bonds
            .first()
            .ok_or_else(|| Error::usage("no bonds to bootstrap"))?;
        for w in bonds.windows(2) {
            if w[1].maturity <= w[0].maturity {
                return Err(Error::usage(format!(
                    "bonds must have strictly increasing maturities ({} at {}y then {} at {}y)",
                    w[0].id, w[0].maturity, w[1].id, w[1].maturity
                )));
            }
        }
        if let Some(b) = bonds.iter().find(|b| b.recovery != first.recovery) {
            return Err(Error::usage(format!(
                "bond {} has recovery {} but {} has {}",
                b.id, b.recovery, first.id, first.recovery
            )));
        }
        let pillars: Vec<f64> = bonds.iter().map(|b| b.maturity).collect();
        let mut curve =
            SurvivalCurve::new(pillars, vec![0.0; bonds.len()], CurveSource::BondImplied)?;
        for (i, bond) in bonds.iter().enumerate() {
            let mut residual = |h: f64| -> f64 {
                match self.bond_pv(bond, &curve.with_hazard(i, h), disc) {
                    Ok(v) => v - bond.price,
                    Err(_) => f64::NAN,
                }
            };
            let at_zero = residual(0.0);
            if at_zero < 0.0 {
                return Err(Error::calibration(
                    bond.id.clone(),
                    format!(
                        "price {:.4}% exceeds the zero-hazard value on its {}y segment; a negative hazard would be needed",
                        bond.price * 100.0,
                        fmt_tenor(bond.maturity)
                    ),
                ));
            }
            let h = if at_zero == 0.0 {
                0.0
            } else {
                let mut hi = 0.05;
                while residual(hi) > 0.0 {
                    hi *= 2.0;
                    if hi > 100.0 {
                        return Err(Error::calibration(
                            bond.id.clone(),
                            "no hazard rate reprices the bond",
                        ));
                    }
                }
                brent(&mut residual, 0.0, hi, BrentOptions::default())
                    .map_err(|e| Error::calibration(bond.id.clone(), e.to_string()))?
            };
            curve = curve.with_hazard(i, h);
        }
        Ok(curve)
    }
}

/// Split `(a, b]` into equal sub-steps no longer than `1 / steps_per_year`.
pub(crate) fn sub_steps(a: f64, b: f64, steps_per_year: usize) -> impl Iterator<Item = (f64, f64)> {
    let n = (((b - a) * steps_per_year as f64 - 1e-9).ceil() as usize).max(1);
    let h = (b - a) / n as f64;
    (0..n).map(move |k| {
        let u = a + h * k as f64;
        let v = if k + 1 == n {
            b
        } else {
            a + h * (k + 1) as f64
        };
        (u, v)
    })
}

/// Coupons and principal as `(time, amount)`.
pub fn promised_cashflows(bond: &CreditBond) -> Vec<(f64, f64)> {
    let cpn = bond.period_coupon();
    let mut flows: Vec<(f64, f64)> = bond.periods().iter().map(|&(_, b)| (b, cpn)).collect();
    if let Some(last) = flows.last_mut() {
        last.1 += 1.0;
    }
    flows
}

/// Bond-implied CDS term structure: the discrete par spread of the
/// bond-fitted survival curve at each term.
///
/// Refuses curves calibrated elsewhere unless `allow_any_source` is set.
pub fn bcds_curve(
    engine: &CdsEngine,
    surv: &SurvivalCurve,
    disc: &DiscountCurve,
    recovery: f64,
    frequency: u32,
    terms: &TimeGrid,
    allow_any_source: bool,
) -> Result<Vec<(f64, f64)>> {
    if surv.source() != CurveSource::BondImplied && !allow_any_source {
        return Err(Error::usage(format!(
            "BCDS needs a bond-implied survival curve, got {:?}",
            surv.source()
        )));
    }
    terms
        .nodes()
        .iter()
        .filter(|t| **t > 0.0)
        .map(|&t| Ok((t, engine.par_spread(surv, disc, recovery, frequency, t)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bond(c: f64, t: f64, r: f64, cr: f64) -> CreditBond {
        CreditBond::new("B", c, 2, t, 1.0, r, cr).unwrap()
    }

    fn flat(h: f64, r: f64) -> (SurvivalCurve, DiscountCurve) {
        (
            SurvivalCurve::flat(h, CurveSource::UserSupplied).unwrap(),
            DiscountCurve::flat(r).unwrap(),
        )
    }

    /// Default-in-step enumeration: each scenario's payoff is discounted and
    /// weighted by its probability.
    fn scenario_oracle(b: &CreditBond, q: &SurvivalCurve, z: &DiscountCurve) -> f64 {
        let periods = b.periods();
        let mut steps = Vec::new();
        for &(a, end) in &periods {
            let n = ((end - a.max(0.0)) * 12.0 - 1e-9).ceil() as usize;
            for k in 0..n {
                let s0 = a.max(0.0);
                let h = (end - s0) / n as f64;
                steps.push((
                    s0 + h * k as f64,
                    if k + 1 == n {
                        end
                    } else {
                        s0 + h * (k + 1) as f64
                    },
                    a,
                ));
            }
        }
        let coupons_before = |t: f64| -> f64 {
            periods
                .iter()
                .filter(|p| p.1 <= t + 1e-12)
                .map(|p| b.period_coupon() * z.discount_factor(0.0, p.1).unwrap())
                .sum()
        };
        let mut ev = 0.0;
        for &(u, v, a) in &steps {
            let prob = q.survival_prob(0.0, u).unwrap() - q.survival_prob(0.0, v).unwrap();
            let rec = (b.recovery + b.coupon_recovery * b.coupon * (v - a))
                * z.discount_factor(0.0, v).unwrap();
            // coupons strictly before the default step were received
            ev += prob * (coupons_before(u) + rec);
        }
        let survive = q.survival_prob(0.0, b.maturity).unwrap();
        ev + survive * (coupons_before(b.maturity) + z.discount_factor(0.0, b.maturity).unwrap())
    }

    #[test]
    fn riskless_bond_matches_discounted_cashflows() {
        let (q, z) = flat(0.0, 0.04);
        let b = bond(0.06, 7.0, 0.4, 0.5);
        let oracle: f64 = promised_cashflows(&b)
            .iter()
            .map(|(t, cf)| cf * (-0.04 * t).exp())
            .sum();
        let pv = BondPricer::default().bond_pv(&b, &q, &z).unwrap();
        assert!((pv - oracle).abs() < 1e-12);
    }

    #[test]
    fn riskless_par_bond() {
        let r = 0.05;
        let c = 2.0 * ((r / 2.0f64).exp() - 1.0);
        let (q, z) = flat(0.0, r);
        let b = bond(c, 5.0, 0.4, 0.0);
        let pricer = BondPricer::default();
        assert!((pricer.bond_pv(&b, &q, &z).unwrap() - 1.0).abs() < 1e-12);
        let grid = TimeGrid::uniform(0.0, 5.0, 0.5).unwrap();
        let fwd = pricer.forward_price_curve(&b, &q, &z, &grid).unwrap();
        assert!(fwd.prices.iter().all(|p| (p - 1.0).abs() < 1e-12));
    }

    #[test]
    fn forward_price_pulls_to_par() {
        let (q, z) = flat(0.02, 0.03);
        let b = bond(0.08, 5.0, 0.4, 0.5);
        for pricer in [BondPricer::default(), BondPricer::continuous()] {
            assert_eq!(pricer.forward_pv(&b, &q, &z, 5.0).unwrap().total(), 1.0);
            let grid = TimeGrid::uniform(0.0, 5.0, 0.25).unwrap();
            let fwd = pricer.forward_price_curve(&b, &q, &z, &grid).unwrap();
            assert_eq!(*fwd.prices.last().unwrap(), 1.0);
        }
        let bad = TimeGrid::uniform(0.0, 4.0, 0.5).unwrap();
        assert!(BondPricer::default()
            .forward_price_curve(&b, &q, &z, &bad)
            .is_err());
    }

    #[test]
    fn matches_default_scenario_enumeration() {
        let q = SurvivalCurve::new(
            vec![1.0, 3.0, 7.0],
            vec![0.01, 0.03, 0.02],
            CurveSource::UserSupplied,
        )
        .unwrap();
        let z = DiscountCurve::new(vec![2.0, 5.0], vec![0.02, 0.045]).unwrap();
        for b in [
            bond(0.08, 5.0, 0.5, 0.5),
            CreditBond::new("S", 0.03, 4, 6.3, 1.0, 0.3, 0.0).unwrap(),
        ] {
            let pv = BondPricer::default().bond_pv(&b, &q, &z).unwrap();
            let oracle = scenario_oracle(&b, &q, &z);
            assert!(((pv - oracle) / oracle).abs() < 1e-12, "{pv} vs {oracle}");
        }
    }

    #[test]
    fn decomposition_sums_to_total() {
        let (q, z) = flat(0.02, 0.03);
        let b = bond(0.07, 6.0, 0.4, 0.5);
        for pricer in [BondPricer::default(), BondPricer::continuous()] {
            let parts = pricer.forward_pv(&b, &q, &z, 1.3).unwrap();
            let total = parts.total();
            assert_eq!(
                total,
                parts.coupon_leg + parts.principal_leg + parts.recovery_leg
            );
            assert!(parts.coupon_leg > 0.0 && parts.recovery_leg > 0.0);
        }
    }

    #[test]
    fn continuous_ode_identities() {
        let q = SurvivalCurve::new(vec![1.0, 3.0], vec![0.015, 0.03], CurveSource::UserSupplied)
            .unwrap();
        let z = DiscountCurve::new(vec![2.0, 4.0], vec![0.02, 0.04]).unwrap();
        let b = bond(0.07, 5.0, 0.4, 0.0);
        let pricer = BondPricer::continuous();
        let dt = 1e-4;
        for &t in &[0.5, 1.7, 2.5, 3.3, 4.6] {
            let p = |s| pricer.forward_pv(&b, &q, &z, s).unwrap().total();
            let slope = (p(t + dt) - p(t - dt)) / (2.0 * dt);
            let (r, h) = (z.rate_at(t), q.hazard_at(t));
            let pt = p(t);
            assert!((slope - ((r + h) * pt - b.coupon - b.recovery * h)).abs() < 1e-6);
            let rfc = pricer.rfc_at(&b, &q, &z, t).unwrap();
            assert!((slope - (r * pt - rfc)).abs() < 1e-6);
        }
    }

    #[test]
    fn rfc_replicates_forward_price_in_continuous_mode() {
        let q = SurvivalCurve::new(vec![1.0, 3.0], vec![0.015, 0.03], CurveSource::UserSupplied)
            .unwrap();
        let z = DiscountCurve::new(vec![2.0, 4.0], vec![0.02, 0.04]).unwrap();
        let b = bond(0.07, 5.0, 0.4, 0.0);
        let pricer = BondPricer::continuous();
        for &t in &[0.0, 1.0, 2.5, 4.5] {
            let p = pricer.forward_pv(&b, &q, &z, t).unwrap().total();
            let rep = pricer.rfc_replication(&b, &q, &z, t).unwrap();
            assert!((p - rep).abs() < 1e-10, "t {t}: {p} {rep}");
        }
    }

    #[test]
    fn rfc_trivial_cases() {
        let (q0, z) = flat(0.0, 0.03);
        let b = bond(0.08, 5.0, 0.4, 0.5);
        let grid = TimeGrid::uniform(0.0, 5.0, 0.5).unwrap();
        let pricer = BondPricer::default();
        let s = pricer.rfc_stream(&b, &q0, &z, &grid).unwrap();
        assert!(s.rfc.iter().all(|r| *r == 0.08));
        // the coupon is kept in full exactly when the forward price sits at recovery
        let (q, _) = flat(0.03, 0.03);
        let p = pricer.forward_pv(&b, &q, &z, 1.0).unwrap().total();
        let rfc = pricer.rfc_at(&b, &q, &z, 1.0).unwrap();
        assert!((rfc - (0.08 - 0.03 * (p - 0.4))).abs() < 1e-15);
        assert!((0.08 - 0.03 * (0.4 - 0.4) - 0.08f64).abs() == 0.0);
    }

    #[test]
    fn zspread_cases() {
        let pricer = BondPricer::default();
        let z = DiscountCurve::flat(0.03).unwrap();
        let b = bond(0.06, 5.0, 0.0, 0.0);
        let riskless: f64 = promised_cashflows(&b)
            .iter()
            .map(|(t, cf)| cf * (-0.03 * t).exp())
            .sum();
        assert!(pricer.zspread(&b.with_price(riskless), &z).unwrap().abs() < 1e-12);
        let (q, _) = flat(0.025, 0.0);
        let risky = pricer.bond_pv(&b, &q, &z).unwrap();
        let zs = pricer.zspread(&b.with_price(risky), &z).unwrap();
        assert!((zs - 0.025).abs() < 5e-4);
        let cheaper = pricer.zspread(&b.with_price(risky - 0.01), &z).unwrap();
        assert!(cheaper > zs);
    }

    #[test]
    fn oasf_cases() {
        let pricer = BondPricer::default();
        let (q, z) = flat(0.02, 0.03);
        let b = bond(0.06, 5.0, 0.4, 0.5);
        let fair = pricer.bond_pv(&b, &q, &z).unwrap();
        assert!(
            pricer
                .oasf_solve(&b.with_price(fair), &q, &z)
                .unwrap()
                .abs()
                < 1e-12
        );
        let cheap = b.with_price(fair - 0.02);
        let x = pricer.oasf_solve(&cheap, &q, &z).unwrap();
        assert!(x > 0.0);
        let back = pricer.bond_pv(&cheap, &q, &z.shifted(x)).unwrap();
        assert!((back - cheap.price).abs() < 1e-10);
    }

    #[test]
    fn bond_bootstrap_round_trip_and_credit_triangle() {
        let pricer = BondPricer::default();
        let r = 0.04;
        let z = DiscountCurve::flat(r).unwrap();
        let par = bond(0.05, 5.0, 0.4, 0.0);
        let curve = pricer
            .bootstrap_hazard_from_bonds(std::slice::from_ref(&par), &z)
            .unwrap();
        assert_eq!(curve.source(), CurveSource::BondImplied);
        // riskless rate quoted in the bond's semiannual compounding
        let r_semi = 2.0 * ((r / 2.0f64).exp() - 1.0);
        let triangle = (0.05 - r_semi) / 0.6;
        assert!(
            (curve.hazards()[0] / triangle - 1.0).abs() < 0.05,
            "{}",
            curve.hazards()[0]
        );

        let bonds = vec![
            CreditBond::new("A", 0.045, 2, 2.0, 0.995, 0.4, 0.0).unwrap(),
            CreditBond::new("B", 0.05, 2, 5.0, 1.00, 0.4, 0.0).unwrap(),
            CreditBond::new("C", 0.06, 2, 10.0, 0.98, 0.4, 0.0).unwrap(),
        ];
        let curve = pricer.bootstrap_hazard_from_bonds(&bonds, &z).unwrap();
        for b in &bonds {
            assert!((pricer.bond_pv(b, &curve, &z).unwrap() - b.price).abs() < 1e-10);
        }
    }

    #[test]
    fn rich_long_bond_fails_bootstrap() {
        let pricer = BondPricer::default();
        let z = DiscountCurve::flat(0.03).unwrap();
        let bonds = vec![
            CreditBond::new("short", 0.06, 2, 2.0, 0.96, 0.4, 0.0).unwrap(),
            CreditBond::new("long", 0.03, 2, 5.0, 1.02, 0.4, 0.0).unwrap(),
        ];
        match pricer.bootstrap_hazard_from_bonds(&bonds, &z).unwrap_err() {
            Error::Calibration { instrument, .. } => assert_eq!(instrument, "long"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bcds_source_check_and_self_consistency() {
        let engine = CdsEngine::default();
        let z = DiscountCurve::flat(0.03).unwrap();
        let q =
            SurvivalCurve::new(vec![1.0, 5.0], vec![0.01, 0.02], CurveSource::CdsImplied).unwrap();
        let terms = TimeGrid::new(vec![1.0, 3.0, 5.0]).unwrap();
        assert!(matches!(
            bcds_curve(&engine, &q, &z, 0.4, 4, &terms, false),
            Err(Error::Usage(_))
        ));
        let bcds = bcds_curve(&engine, &q, &z, 0.4, 4, &terms, true).unwrap();
        for (t, s) in bcds {
            assert_eq!(s, engine.par_spread(&q, &z, 0.4, 4, t).unwrap());
        }
    }

    #[test]
    fn zero_recovery_bcds_matches_zspread() {
        let engine = CdsEngine::default();
        let pricer = BondPricer::default();
        let (q, z) = flat(0.02, 0.03);
        let q = q.with_source(CurveSource::BondImplied);
        let b = CreditBond::new("P", 0.05, 2, 5.0, 1.0, 0.0, 0.0).unwrap();
        let b = b.with_price(pricer.bond_pv(&b, &q, &z).unwrap());
        let zs = pricer.zspread(&b, &z).unwrap();
        let terms = TimeGrid::new(vec![5.0]).unwrap();
        let bcds = bcds_curve(&engine, &q, &z, 0.0, 4, &terms, false).unwrap()[0].1;
        assert!((bcds - zs).abs() < 5e-4);
    }

    proptest! {
        #[test]
        fn rfc_below_coupon_when_above_recovery(h in 0.0f64..0.05, r in 0.0f64..0.08, c in 0.0f64..0.12, t in 0.0f64..5.0) {
            let (q, z) = flat(h, r);
            let b = bond(c, 5.0, 0.4, 0.5);
            let pricer = BondPricer::default();
            let p = pricer.forward_pv(&b, &q, &z, t).unwrap().total();
            let rfc = pricer.rfc_at(&b, &q, &z, t).unwrap();
            if p >= b.recovery {
                prop_assert!(rfc <= b.coupon);
            }
        }
    }
}
