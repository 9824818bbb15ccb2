//! Static CDS hedges of a credit bond: staggered forward CDS, long/short
//! spot CDS pairs, and coarse one- or two-CDS hedges.
//!
//! Every schedule is built on a hedge grid `0 = t_0 < ... < t_n = T`,
//! normally the bond's coupon dates. Row `i >= 1` describes the period
//! `(t_{i-1}, t_i]`; row 0 carries only the spot price comparison.

use crate::bond::{BondPricer, CreditBond};
use crate::cds::CdsEngine;
use crate::curves::{DiscountCurve, SurvivalCurve, TimeGrid};
use crate::error::{Error, Result};
use crate::par::{self, Execution};

fn check_r(recovery: f64) -> Result<()> {
    if !(recovery < 1.0) {
        return Err(Error::domain(format!(
            "hedge notional undefined for recovery {recovery} >= 1"
        )));
    }
    Ok(())
}

/// Notional insuring the full forward price: `(P - R) / (1 - R)`.
pub fn forward_notional_continuous(p_fwd: f64, recovery: f64) -> Result<f64> {
    check_r(recovery)?;
    Ok((p_fwd - recovery) / (1.0 - recovery))
}

/// Period notional averaging the forward prices at both ends plus the
/// weighted period coupon.
pub fn forward_notional_discrete(
    p_prev: f64,
    p_next: f64,
    c_period: f64,
    w: f64,
    recovery: f64,
) -> Result<f64> {
    check_r(recovery)?;
    Ok((0.5 * (p_prev + p_next + w * c_period) - recovery) / (1.0 - recovery))
}

/// Notional of a spot CDS pair covering the price drop between two nodes.
pub fn pair_notional(p_this: f64, p_next: f64, recovery: f64) -> Result<f64> {
    check_r(recovery)?;
    Ok((p_this - p_next) / (1.0 - recovery))
}

/// Coupon weight in the discrete notional: 25% with no coupon recovery,
/// 50% with half coupon recovery, linear in between.
pub fn coupon_recovery_weight(coupon_recovery: f64) -> f64 {
    0.25 + 0.5 * coupon_recovery
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LegKind {
    ForwardCds,
    SpotCds,
}

/// One CDS position. Spot legs start at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgeLeg {
    pub kind: LegKind,
    pub start: f64,
    pub end: f64,
    /// Long protection when positive.
    pub notional: f64,
    pub premium: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Forward,
    Pairs,
    Coarse,
}

/// One column of the hedge table.
///
/// Cashflow fields are per-period amounts per unit face and are absent on
/// the initial row.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgeRow {
    pub term: f64,
    pub fwd_bcds: f64,
    pub spot_bcds: f64,
    pub fwd_price: f64,
    pub hedge_notional: Option<f64>,
    pub protection_cf: Option<f64>,
    pub coupon_less_protection: Option<f64>,
    pub rfc: Option<f64>,
    pub cf_diff: Option<f64>,
    pub projected_fwd_price: f64,
    pub price_diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HedgeSchedule {
    pub strategy: Strategy,
    pub legs: Vec<HedgeLeg>,
    pub rows: Vec<HedgeRow>,
}

impl HedgeSchedule {
    pub fn max_abs_cf_diff(&self) -> f64 {
        self.rows
            .iter()
            .filter_map(|r| r.cf_diff)
            .fold(0.0, |m, d| m.max(d.abs()))
    }

    pub fn max_abs_price_diff(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.price_diff.abs()))
    }
}

/// Default-weighted exposure profile used by the coarse optimizers.
///
/// `weights[i]` is the discounted loss-given-default weight of period `i`:
/// `(Q(0, t_{i-1}) - Q(0, t_i)) (1 - R) Z(0, t_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExposureProfile {
    pub terms: Vec<f64>,
    pub theory: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ExposureProfile {
    /// Net PV of the notional shortfall for a hedge whose live notional
    /// over period `i` is `notional(t_i)`.
    pub fn residual<F: Fn(f64) -> f64>(&self, notional: F) -> f64 {
        self.terms
            .iter()
            .zip(&self.theory)
            .zip(&self.weights)
            .map(|((t, n), w)| w * (notional(*t) - n))
            .sum()
    }

    fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Constant notional with zero net exposure.
    pub fn single(&self) -> Result<f64> {
        let total = self.total_weight();
        if !(total > 0.0) {
            return Err(Error::numeric(
                "exposure weights vanish (no default risk); coarse notional undefined",
            ));
        }
        Ok(self
            .weights
            .iter()
            .zip(&self.theory)
            .map(|(w, n)| w * n)
            .sum::<f64>()
            / total)
    }

    /// Add-on notional at `maturity` on top of a unit final leg.
    pub fn addon(&self, maturity: f64) -> Result<f64> {
        let covered: f64 = self
            .terms
            .iter()
            .zip(&self.weights)
            .filter(|(t, _)| **t <= maturity + 1e-9)
            .map(|(_, w)| w)
            .sum();
        if !(covered > 0.0) {
            return Err(Error::numeric(format!(
                "no exposure weight up to {maturity}y"
            )));
        }
        let shortfall: f64 = self
            .weights
            .iter()
            .zip(&self.theory)
            .map(|(w, n)| w * (n - 1.0))
            .sum();
        Ok(shortfall / covered)
    }
}

/// One row of the two-CDS candidate table.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateCost {
    pub maturity: f64,
    pub addon_notional: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoCdsHedge {
    pub final_notional: f64,
    pub addon_maturity: f64,
    pub addon_notional: f64,
    pub cost: f64,
    pub candidates: Vec<CandidateCost>,
}

/// Intermediate per-node quantities shared by all schedules.
struct Profile {
    nodes: Vec<f64>,
    prices: Vec<f64>,
    fwd_spreads: Vec<f64>,
    spot_spreads: Vec<f64>,
    coupons: Vec<f64>,
    notionals: Vec<f64>,
    rfc: Vec<f64>,
}

/// Engines and settings used to build hedges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hedger {
    pub cds: CdsEngine,
    pub pricer: BondPricer,
    /// Premium frequency of hedge CDS when computing risky annuities.
    pub cds_frequency: u32,
    pub exec: Execution,
}

impl Default for Hedger {
    fn default() -> Self {
        Self {
            cds: CdsEngine::default(),
            pricer: BondPricer::default(),
            cds_frequency: 4,
            exec: Execution::available(),
        }
    }
}

/// Hedge grid at zero and every coupon date.
pub fn coupon_grid(bond: &CreditBond) -> TimeGrid {
    let mut nodes = vec![0.0];
    nodes.extend(bond.periods().iter().map(|p| p.1));
    TimeGrid::new(nodes).expect("coupon dates increase")
}

impl Hedger {
    fn check_grid(bond: &CreditBond, grid: &TimeGrid) -> Result<()> {
        let ok = grid.len() >= 2
            && grid.first() == Some(0.0)
            && grid.last().map(|t| (t - bond.maturity).abs() <= 1e-9) == Some(true);
        if !ok {
            return Err(Error::domain(format!(
                "hedge grid must run from 0 to the bond maturity {}",
                bond.maturity
            )));
        }
        Ok(())
    }

    fn profile(
        &self,
        bond: &CreditBond,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        grid: &TimeGrid,
    ) -> Result<Profile> {
        Self::check_grid(bond, grid)?;
        let nodes = grid.nodes().to_vec();
        let n = nodes.len();
        let r = bond.recovery;
        let fwd = self.pricer.forward_price_curve(bond, surv, disc, grid)?;
        let prices = fwd.prices;
        let periods = bond.periods();
        let coupon_paid = |a: f64, b: f64| -> f64 {
            periods
                .iter()
                .filter(|p| p.1 > a + 1e-9 && p.1 <= b + 1e-9)
                .count() as f64
                * bond.period_coupon()
        };
        let w = coupon_recovery_weight(bond.coupon_recovery);
        let mut fwd_spreads = Vec::with_capacity(n);
        let mut spot_spreads = Vec::with_capacity(n);
        let mut coupons = vec![0.0];
        let mut notionals = vec![f64::NAN];
        let mut rfc = vec![f64::NAN];
        let eps = 1e-7;
        fwd_spreads.push(self.cds.forward_cds_spread(surv, disc, r, 0.0, eps)?);
        spot_spreads.push(fwd_spreads[0]);
        for i in 1..n {
            let (a, b) = (nodes[i - 1], nodes[i]);
            fwd_spreads.push(self.cds.forward_cds_spread(surv, disc, r, a, b)?);
            spot_spreads.push(self.cds.par_spread_continuous(surv, disc, r, b)?);
            let c = coupon_paid(a, b);
            coupons.push(c);
            notionals.push(forward_notional_discrete(
                prices[i - 1],
                prices[i],
                c,
                w,
                r,
            )?);
            // hazard integrated over the period, so jumps inside it count
            let default_mass = -surv.q(a, b).ln();
            rfc.push((b - a) * bond.coupon - default_mass * (prices[i - 1] - r));
        }
        Ok(Profile {
            nodes,
            prices,
            fwd_spreads,
            spot_spreads,
            coupons,
            notionals,
            rfc,
        })
    }

    /// Theoretical per-period notionals `(t_i, N_i)` for `i >= 1`.
    pub fn theoretical_notionals(
        &self,
        bond: &CreditBond,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        grid: &TimeGrid,
    ) -> Result<Vec<(f64, f64)>> {
        let p = self.profile(bond, surv, disc, grid)?;
        Ok(p.nodes[1..]
            .iter()
            .copied()
            .zip(p.notionals[1..].iter().copied())
            .collect())
    }

    fn assemble(
        &self,
        strategy: Strategy,
        p: &Profile,
        disc: &DiscountCurve,
        legs: Vec<HedgeLeg>,
        shown: &[f64],
        protection: &[f64],
    ) -> HedgeSchedule {
        let n = p.nodes.len();
        let clp: Vec<f64> = (0..n)
            .map(|i| {
                if i == 0 {
                    0.0
                } else {
                    p.coupons[i] - protection[i]
                }
            })
            .collect();
        let big_t = p.nodes[n - 1];
        let rows = (0..n)
            .map(|j| {
                let tj = p.nodes[j];
                let projected: f64 = (j + 1..n)
                    .map(|i| clp[i] * disc.df(tj, p.nodes[i]))
                    .sum::<f64>()
                    + disc.df(tj, big_t);
                let first = j == 0;
                let opt = |v: f64| if first { None } else { Some(v) };
                HedgeRow {
                    term: tj,
                    fwd_bcds: p.fwd_spreads[j],
                    spot_bcds: p.spot_spreads[j],
                    fwd_price: p.prices[j],
                    hedge_notional: opt(shown[j]),
                    protection_cf: opt(protection[j]),
                    coupon_less_protection: opt(clp[j]),
                    rfc: opt(p.rfc[j]),
                    cf_diff: opt(clp[j] - p.rfc[j]),
                    projected_fwd_price: projected,
                    price_diff: projected - p.prices[j],
                }
            })
            .collect();
        HedgeSchedule {
            strategy,
            legs,
            rows,
        }
    }

    /// One forward CDS per period with the discrete notional and the
    /// period's forward spread.
    pub fn build_forward_hedge(
        &self,
        bond: &CreditBond,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        grid: &TimeGrid,
    ) -> Result<HedgeSchedule> {
        let p = self.profile(bond, surv, disc, grid)?;
        let n = p.nodes.len();
        let mut protection = vec![0.0; n];
        let mut legs = Vec::new();
        #[allow(clippy::needless_range_loop)]
        for i in 1..n {
            let (a, b) = (p.nodes[i - 1], p.nodes[i]);
            protection[i] = p.notionals[i] * p.fwd_spreads[i] * (b - a);
            if p.fwd_spreads[i] > 0.0 {
                legs.push(HedgeLeg {
                    kind: LegKind::ForwardCds,
                    start: a,
                    end: b,
                    notional: p.notionals[i],
                    premium: p.fwd_spreads[i],
                });
            }
        }
        Ok(self.assemble(Strategy::Forward, &p, disc, legs, &p.notionals, &protection))
    }

    /// Decomposition of the forward strip into spot CDS: the leg maturing at
    /// `t_i` carries `N_i - N_{i+1}` and the final leg carries `N_n`.
    pub fn build_pair_hedge(
        &self,
        bond: &CreditBond,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        grid: &TimeGrid,
    ) -> Result<HedgeSchedule> {
        let p = self.profile(bond, surv, disc, grid)?;
        let n = p.nodes.len();
        let spot: Vec<(f64, f64)> = (1..n)
            .map(|i| {
                let next = if i + 1 < n { p.notionals[i + 1] } else { 0.0 };
                (p.nodes[i], p.notionals[i] - next)
            })
            .collect();
        Ok(self.spot_schedule(Strategy::Pairs, &p, disc, &spot))
    }

    /// Schedule for an arbitrary set of spot CDS `(maturity, notional)`, each
    /// paying its own spot spread. Maturities must be grid nodes.
    pub fn build_spot_hedge(
        &self,
        bond: &CreditBond,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        grid: &TimeGrid,
        spot_legs: &[(f64, f64)],
    ) -> Result<HedgeSchedule> {
        let p = self.profile(bond, surv, disc, grid)?;
        for (m, _) in spot_legs {
            if !p.nodes.iter().any(|t| (t - m).abs() <= 1e-9) || *m <= 0.0 {
                return Err(Error::usage(format!(
                    "spot leg maturity {m} is not on the hedge grid"
                )));
            }
        }
        Ok(self.spot_schedule(Strategy::Coarse, &p, disc, spot_legs))
    }

    fn spot_schedule(
        &self,
        strategy: Strategy,
        p: &Profile,
        disc: &DiscountCurve,
        spot_legs: &[(f64, f64)],
    ) -> HedgeSchedule {
        let n = p.nodes.len();
        let node_of = |m: f64| {
            p.nodes
                .iter()
                .position(|t| (t - m).abs() <= 1e-9)
                .expect("checked maturity")
        };
        let mut shown = vec![0.0; n];
        let mut premium_rate = vec![0.0; n];
        let mut legs = Vec::new();
        for &(m, notional) in spot_legs {
            let k = node_of(m);
            shown[k] += notional;
            // a leg maturing at t_k pays premium over every period up to t_k
            for rate in premium_rate.iter_mut().take(k + 1).skip(1) {
                *rate += notional * p.spot_spreads[k];
            }
            if p.spot_spreads[k] > 0.0 {
                legs.push(HedgeLeg {
                    kind: LegKind::SpotCds,
                    start: 0.0,
                    end: m,
                    notional,
                    premium: p.spot_spreads[k],
                });
            }
        }
        let protection: Vec<f64> = (0..n)
            .map(|i| {
                if i == 0 {
                    0.0
                } else {
                    premium_rate[i] * (p.nodes[i] - p.nodes[i - 1])
                }
            })
            .collect();
        self.assemble(strategy, p, disc, legs, &shown, &protection)
    }

    pub fn exposure_profile(
        &self,
        bond: &CreditBond,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        grid: &TimeGrid,
    ) -> Result<ExposureProfile> {
        let p = self.profile(bond, surv, disc, grid)?;
        let lgd = 1.0 - bond.recovery;
        let weights = p
            .nodes
            .windows(2)
            .map(|w| (surv.q(0.0, w[0]) - surv.q(0.0, w[1])) * lgd * disc.df(0.0, w[1]))
            .collect();
        Ok(ExposureProfile {
            terms: p.nodes[1..].to_vec(),
            theory: p.notionals[1..].to_vec(),
            weights,
        })
    }

    /// Constant single-CDS notional with zero net discounted exposure.
    pub fn optimize_single_cds(
        &self,
        bond: &CreditBond,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        grid: &TimeGrid,
    ) -> Result<f64> {
        self.exposure_profile(bond, surv, disc, grid)?.single()
    }

    /// Premium PV of a spot CDS position at the supplied spread.
    fn leg_cost(
        &self,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        maturity: f64,
        notional: f64,
        spread: f64,
    ) -> Result<f64> {
        Ok(notional
            * spread
            * self
                .cds
                .risky_pv01(surv, disc, self.cds_frequency, maturity)?)
    }

    /// Cheapest unit-final-leg plus add-on hedge over the candidate
    /// maturities; `spread_at` supplies the CDS spread for a maturity.
    pub fn optimize_two_cds<S>(
        &self,
        bond: &CreditBond,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        grid: &TimeGrid,
        candidates: &[f64],
        spread_at: S,
    ) -> Result<TwoCdsHedge>
    where
        S: Fn(f64) -> Result<f64> + Sync + Send,
    {
        if candidates.is_empty() {
            return Err(Error::usage(
                "two-CDS optimizer needs at least one candidate maturity",
            ));
        }
        if let Some(m) = candidates
            .iter()
            .find(|m| !(**m > 0.0) || **m > bond.maturity + 1e-9)
        {
            return Err(Error::usage(format!(
                "candidate maturity {m} outside (0, {}]",
                bond.maturity
            )));
        }
        let profile = self.exposure_profile(bond, surv, disc, grid)?;
        let big_t = bond.maturity;
        let final_cost = self.leg_cost(surv, disc, big_t, 1.0, spread_at(big_t)?)?;
        let table = par::try_map(self.exec, candidates, |&m| -> Result<CandidateCost> {
            let addon = profile.addon(m)?;
            let cost = final_cost + self.leg_cost(surv, disc, m, addon, spread_at(m)?)?;
            Ok(CandidateCost {
                maturity: m,
                addon_notional: addon,
                cost,
            })
        })?;
        let best = table
            .iter()
            .min_by(|a, b| a.cost.partial_cmp(&b.cost).expect("finite cost"))
            .expect("non-empty candidates")
            .clone();
        Ok(TwoCdsHedge {
            final_notional: 1.0,
            addon_maturity: best.maturity,
            addon_notional: best.addon_notional,
            cost: best.cost,
            candidates: table,
        })
    }

    /// Premium PV of the single-CDS hedge at the supplied spread.
    pub fn single_cds_cost(
        &self,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        maturity: f64,
        notional: f64,
        spread: f64,
    ) -> Result<f64> {
        self.leg_cost(surv, disc, maturity, notional, spread)
    }

    /// `C - CDS_fwd(t) N(t, T) - RFC(t, T)` for instantaneous forward
    /// protection sized to the full forward price. Zero in continuous mode.
    pub fn complementarity_residual(
        &self,
        bond: &CreditBond,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        t: f64,
    ) -> Result<f64> {
        let p = self.pricer.forward_pv(bond, surv, disc, t)?.total();
        let notional = forward_notional_continuous(p, bond.recovery)?;
        let cds_fwd = self
            .cds
            .forward_cds_spread(surv, disc, bond.recovery, t, t + 1e-9)?;
        let rfc = self.pricer.rfc_at(bond, surv, disc, t)?;
        Ok(bond.coupon - cds_fwd * notional - rfc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::CurveSource;

    fn setup(h: f64, r: f64, c: f64) -> (CreditBond, SurvivalCurve, DiscountCurve) {
        (
            CreditBond::new("B", c, 2, 5.0, 1.0, 0.5, 0.5).unwrap(),
            SurvivalCurve::flat(h, CurveSource::BondImplied).unwrap(),
            DiscountCurve::flat(r).unwrap(),
        )
    }

    #[test]
    fn notional_formulas() {
        assert_eq!(forward_notional_continuous(1.0, 0.3).unwrap(), 1.0);
        assert_eq!(forward_notional_continuous(0.4, 0.4).unwrap(), 0.0);
        assert!((forward_notional_continuous(1.167, 0.5).unwrap() - 1.334).abs() < 1e-12);
        assert!(forward_notional_continuous(1.0, 1.0).is_err());
        let n1 = forward_notional_discrete(1.167, 1.1384, 0.04, 0.5, 0.5).unwrap();
        assert!((n1 - 1.3254).abs() < 1e-12);
        let n2 = forward_notional_discrete(1.1384, 1.1131, 0.04, 0.5, 0.5).unwrap();
        assert!((n2 - 1.2715).abs() < 1e-12);
        assert_eq!(
            forward_notional_discrete(1.0, 1.0, 0.0, 0.5, 0.5).unwrap(),
            1.0
        );
        assert!((pair_notional(1.1384, 1.1131, 0.5).unwrap() - 0.0506).abs() < 1e-12);
        assert_eq!(pair_notional(1.05, 1.05, 0.5).unwrap(), 0.0);
        assert!(pair_notional(1.0, 0.9, 1.0).is_err());
        assert_eq!(coupon_recovery_weight(0.0), 0.25);
        assert_eq!(coupon_recovery_weight(0.5), 0.5);
    }

    #[test]
    fn flat_curve_pairs_equal_forward() {
        let (b, q, z) = setup(0.02, 0.04, 0.07);
        let h = Hedger::default();
        let grid = coupon_grid(&b);
        let f = h.build_forward_hedge(&b, &q, &z, &grid).unwrap();
        let p = h.build_pair_hedge(&b, &q, &z, &grid).unwrap();
        for (a, c) in f.rows.iter().zip(&p.rows) {
            assert!(
                (a.protection_cf.unwrap_or(0.0) - c.protection_cf.unwrap_or(0.0)).abs() < 1e-10
            );
            assert!((a.projected_fwd_price - c.projected_fwd_price).abs() < 1e-10);
            assert!((a.price_diff - c.price_diff).abs() < 1e-10);
        }
    }

    #[test]
    fn riskless_bond_needs_no_protection() {
        let (b, q, z) = setup(0.0, 0.04, 0.07);
        let h = Hedger::default();
        let grid = coupon_grid(&b);
        for s in [
            h.build_forward_hedge(&b, &q, &z, &grid).unwrap(),
            h.build_pair_hedge(&b, &q, &z, &grid).unwrap(),
        ] {
            assert!(s.legs.is_empty());
            for row in &s.rows[1..] {
                assert_eq!(row.protection_cf, Some(0.0));
                assert!((row.rfc.unwrap() - 0.035).abs() < 1e-15);
            }
            assert!(s.max_abs_price_diff() < 1e-14);
        }
    }

    #[test]
    fn par_bond_flat_curves() {
        // coupon chosen so the bond prices near par
        let h_rate = 0.02;
        let r = 0.03;
        let c = 2.0 * (((r + h_rate * 0.5) / 2.0f64).exp() - 1.0);
        let (b, q, z) = setup(h_rate, r, c);
        let hedger = Hedger::default();
        let s = hedger
            .build_forward_hedge(&b, &q, &z, &coupon_grid(&b))
            .unwrap();
        for row in &s.rows[1..] {
            assert!((row.hedge_notional.unwrap() - 1.0).abs() < 0.02);
            let rfc_rate = row.rfc.unwrap() / 0.5;
            assert!((rfc_rate - (c - 0.5 * h_rate)).abs() < 2e-4);
        }
    }

    #[test]
    fn single_cds_cases() {
        let hedger = Hedger::default();
        let (b, q, z) = setup(0.02, 0.03, 0.06);
        let grid = coupon_grid(&b);
        let prof = hedger.exposure_profile(&b, &q, &z, &grid).unwrap();
        let n = prof.single().unwrap();
        let lo = prof.theory.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = prof
            .theory
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(n >= lo && n <= hi);
        assert!(prof.residual(|_| n).abs() < 1e-14);
        let (b0, q0, z0) = setup(0.0, 0.03, 0.06);
        assert!(matches!(
            hedger.optimize_single_cds(&b0, &q0, &z0, &grid),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn two_cds_degenerate_candidate() {
        let hedger = Hedger::default();
        let (b, q, z) = setup(0.02, 0.03, 0.08);
        let grid = coupon_grid(&b);
        let single = hedger.optimize_single_cds(&b, &q, &z, &grid).unwrap();
        let spread = |m: f64| hedger.cds.par_spread_continuous(&q, &z, 0.5, m);
        let two = hedger
            .optimize_two_cds(&b, &q, &z, &grid, &[5.0], spread)
            .unwrap();
        assert!((two.final_notional + two.addon_notional - single).abs() < 1e-12);
        assert!(hedger
            .optimize_two_cds(&b, &q, &z, &grid, &[], spread)
            .is_err());
        assert!(hedger
            .optimize_two_cds(&b, &q, &z, &grid, &[6.0], spread)
            .is_err());
    }

    #[test]
    fn default_scenarios_recover_forward_price() {
        let hedger = Hedger::default();
        let q = SurvivalCurve::new(
            vec![1.0, 3.0, 5.0],
            vec![0.01, 0.02, 0.03],
            CurveSource::BondImplied,
        )
        .unwrap();
        let z = DiscountCurve::flat(0.03).unwrap();
        let b = CreditBond::new("B", 0.08, 2, 5.0, 1.0, 0.4, 0.5).unwrap();
        let grid = coupon_grid(&b);
        let s = hedger.build_forward_hedge(&b, &q, &z, &grid).unwrap();
        for leg in &s.legs {
            let mid = 0.5 * (leg.start + leg.end);
            // pre-default full price net of the coupon claim recovered with the face
            let p = hedger.pricer.forward_pv(&b, &q, &z, mid).unwrap().total();
            let claim = b.recovery + b.coupon_recovery * b.coupon * (mid - leg.start);
            let recovered = claim + leg.notional * (1.0 - b.recovery);
            assert!(
                (recovered - p).abs() <= b.period_coupon(),
                "{} vs {p}",
                recovered
            );
        }
    }
}
