//! CDS-bond basis measures: curve basis, hedging cost differential,
//! systematic and full bond basis, the coarse approximate basis, and
//! steepener sizing.

use crate::bond::{bcds_curve, BondPricer, CreditBond, ForwardPriceCurve};
use crate::cds::{fmt_tenor, CdsEngine, Side};
use crate::curves::{DiscountCurve, SurvivalCurve, TimeGrid};
use crate::error::{Error, Result};
use crate::hedging::{coupon_grid, Hedger};
use crate::par;

const TENOR_TOL: f64 = 1e-9;

/// One tenor of the curve basis table.
#[derive(Debug, Clone, PartialEq)]
pub struct TenorBasis {
    pub tenor: f64,
    /// Market spread, if quoted (or interpolated when allowed).
    pub market: Option<f64>,
    pub bcds: f64,
    pub basis: Option<f64>,
}

/// Per-bond basis measures, all as annual spreads except `hcd`.
#[derive(Debug, Clone, PartialEq)]
pub struct BondBasis {
    pub id: String,
    pub oasf: f64,
    /// Hedging cost differential in PV per unit face.
    pub hcd: f64,
    pub systematic: f64,
    pub full: f64,
    pub approx_coarse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisReport {
    pub tenors: Vec<TenorBasis>,
    pub bonds: Vec<BondBasis>,
}

/// Linear interpolation in `points` (sorted by x), flat beyond the ends.
pub fn interpolate_linear(points: &[(f64, f64)], x: f64) -> Option<f64> {
    let first = points.first()?;
    let last = points.last()?;
    if x <= first.0 {
        return Some(first.1);
    }
    if x >= last.0 {
        return Some(last.1);
    }
    let k = points.partition_point(|p| p.0 <= x);
    let (x0, y0) = points[k - 1];
    let (x1, y1) = points[k];
    Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

fn lookup(points: &[(f64, f64)], x: f64) -> Option<f64> {
    points
        .iter()
        .find(|p| (p.0 - x).abs() <= TENOR_TOL)
        .map(|p| p.1)
}

/// Market spread minus BCDS at every BCDS tenor.
///
/// Tenors without a market quote are reported with `market = None` unless
/// `interpolate` is set, in which case the market curve is interpolated
/// linearly in spread.
pub fn curve_basis(
    market: &[(f64, f64)],
    bcds: &[(f64, f64)],
    interpolate: bool,
) -> Vec<TenorBasis> {
    bcds.iter()
        .map(|&(tenor, b)| {
            let m = lookup(market, tenor).or_else(|| {
                if interpolate {
                    interpolate_linear(market, tenor)
                } else {
                    None
                }
            });
            TenorBasis {
                tenor,
                market: m,
                bcds: b,
                basis: m.map(|m| m - b),
            }
        })
        .collect()
}

/// Tenors in `required` that have no market quote.
pub fn missing_tenors(market: &[(f64, f64)], required: &[f64]) -> Vec<f64> {
    required
        .iter()
        .copied()
        .filter(|t| lookup(market, *t).is_none())
        .collect()
}

/// Incremental cost of hedging along the forward-price profile at market
/// rather than bond-implied spreads, per unit face:
/// `-sum CB(t) / (1 - R) * dP(t) * RiskyPV01(0, t)` with `CB` and the
/// annuity taken at each interval midpoint.
pub fn hedging_cost_differential<B, A>(
    recovery: f64,
    curve_basis_at: B,
    fwd: &ForwardPriceCurve,
    risky_pv01_at: A,
) -> Result<f64>
where
    B: Fn(f64) -> f64,
    A: Fn(f64) -> Result<f64>,
{
    if !(recovery < 1.0) {
        return Err(Error::domain(format!("recovery {recovery} must be < 1")));
    }
    let mut hcd = 0.0;
    for (t, dp) in fwd.grid.nodes().windows(2).zip(fwd.increments()) {
        if dp == 0.0 {
            continue;
        }
        let mid = 0.5 * (t[0] + t[1]);
        hcd -= curve_basis_at(mid) * dp / (1.0 - recovery) * risky_pv01_at(mid)?;
    }
    Ok(hcd)
}

/// Curve basis at maturity plus the annuity-weighted HCD correction.
pub fn systematic_bond_basis(
    curve_basis_at_maturity: f64,
    hcd: f64,
    risky_pv01_at_maturity: f64,
) -> Result<f64> {
    if !(risky_pv01_at_maturity > 0.0) {
        return Err(Error::numeric(format!(
            "risky annuity {risky_pv01_at_maturity:e} at maturity; systematic basis undefined"
        )));
    }
    Ok(curve_basis_at_maturity + hcd / risky_pv01_at_maturity)
}

/// Systematic basis less the bond's own OAS-to-fit.
pub fn full_bond_basis(systematic: f64, oasf: f64) -> f64 {
    systematic - oasf
}

/// Sizing rule for a two-leg curve steepener.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteepenerMode {
    EqualNotional,
    Credit01Neutral,
}

/// Notionals `(short-tenor protection sold, long-tenor protection bought)`.
#[allow(clippy::too_many_arguments)]
pub fn steepener_sizing(
    engine: &CdsEngine,
    short_tenor: f64,
    long_tenor: f64,
    surv: &SurvivalCurve,
    disc: &DiscountCurve,
    recovery: f64,
    frequency: u32,
    mode: SteepenerMode,
) -> Result<(f64, f64)> {
    if short_tenor > long_tenor {
        return Err(Error::usage(format!(
            "steepener needs short tenor {short_tenor} <= long tenor {long_tenor}"
        )));
    }
    match mode {
        SteepenerMode::EqualNotional => Ok((1.0, 1.0)),
        SteepenerMode::Credit01Neutral => {
            let c01 =
                |t| engine.credit01(surv, disc, recovery, frequency, t, Side::BuyProtection, 1.0);
            let short = c01(short_tenor)?;
            let long = c01(long_tenor)?;
            if short == 0.0 || !short.is_finite() {
                return Err(Error::numeric(format!(
                    "zero Credit01 at {}y",
                    fmt_tenor(short_tenor)
                )));
            }
            Ok((long / short, 1.0))
        }
    }
}

/// Settings and engines for full basis reports.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisAnalyzer {
    pub hedger: Hedger,
    /// Grid step for the forward-price profile entering the HCD.
    pub hcd_step: f64,
    /// Candidate add-on maturities for the coarse hedge; `None` skips the
    /// approximate basis.
    pub coarse_candidates: Option<Vec<f64>>,
}

impl Default for BasisAnalyzer {
    fn default() -> Self {
        Self {
            hedger: Hedger::default(),
            hcd_step: 1.0 / 12.0,
            coarse_candidates: Some(vec![1.0, 2.0, 3.0, 5.0, 7.0, 10.0]),
        }
    }
}

impl BasisAnalyzer {
    fn cds(&self) -> &CdsEngine {
        &self.hedger.cds
    }

    fn pricer(&self) -> &BondPricer {
        &self.hedger.pricer
    }

    fn rpv01(&self, surv: &SurvivalCurve, disc: &DiscountCurve, t: f64) -> Result<f64> {
        self.cds()
            .risky_pv01(surv, disc, self.hedger.cds_frequency, t)
    }

    /// HCD for one bond, with the curve basis interpolated between tenors.
    pub fn bond_hcd(
        &self,
        bond: &CreditBond,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        basis_points: &[(f64, f64)],
    ) -> Result<f64> {
        let grid = TimeGrid::uniform(0.0, bond.maturity, self.hcd_step)?;
        let fwd = self
            .pricer()
            .clean_forward_price_curve(bond, surv, disc, &grid)?;
        hedging_cost_differential(
            bond.recovery,
            |t| interpolate_linear(basis_points, t).unwrap_or(0.0),
            &fwd,
            |t| self.rpv01(surv, disc, t),
        )
    }

    /// Approximate basis: aggregate premium rate of the cheapest two-CDS
    /// hedge at market spreads minus `BCDS(0, T) + OASF`.
    #[allow(clippy::too_many_arguments)]
    pub fn approximate_coarse_basis<S>(
        &self,
        bond: &CreditBond,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        candidates: &[f64],
        market_spread_at: S,
        bcds_at_maturity: f64,
        oasf: f64,
    ) -> Result<f64>
    where
        S: Fn(f64) -> Result<f64> + Sync + Send,
    {
        let grid = coupon_grid(bond);
        let usable: Vec<f64> = candidates
            .iter()
            .copied()
            .filter(|m| *m <= bond.maturity + TENOR_TOL)
            .collect();
        let usable = if usable.is_empty() {
            vec![bond.maturity]
        } else {
            usable
        };
        let hedge =
            self.hedger
                .optimize_two_cds(bond, surv, disc, &grid, &usable, market_spread_at)?;
        let aggregate = hedge.cost / self.rpv01(surv, disc, bond.maturity)?;
        Ok(aggregate - (bcds_at_maturity + oasf))
    }

    /// Full report for a bond portfolio priced off one bond-implied curve.
    ///
    /// `tenors` are the report tenors; every one needs a market quote unless
    /// `interpolate` is set.
    pub fn report(
        &self,
        bonds: &[CreditBond],
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        market: &[(f64, f64)],
        tenors: &[f64],
        interpolate: bool,
    ) -> Result<BasisReport> {
        let recovery = bonds
            .first()
            .map(|b| b.recovery)
            .ok_or_else(|| Error::usage("no bonds for the basis report"))?;
        let missing = missing_tenors(market, tenors);
        if !interpolate && !missing.is_empty() {
            let names: Vec<String> = missing
                .iter()
                .map(|t| format!("{}y", fmt_tenor(*t)))
                .collect();
            return Err(Error::usage(format!(
                "market CDS quotes missing tenors {} (enable interpolation to fill them)",
                names.join(", ")
            )));
        }
        let terms = TimeGrid::new(tenors.to_vec())?;
        let freq = self.hedger.cds_frequency;
        let bcds = bcds_curve(self.cds(), surv, disc, recovery, freq, &terms, false)?;
        let rows = curve_basis(market, &bcds, interpolate);
        let basis_points: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| r.basis.map(|b| (r.tenor, b)))
            .collect();
        let mut sorted_market = market.to_vec();
        sorted_market.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite tenor"));

        let per_bond = par::try_map(self.hedger.exec, bonds, |bond| -> Result<BondBasis> {
            let oasf = self.pricer().oasf_solve(bond, surv, disc)?;
            let hcd = self.bond_hcd(bond, surv, disc, &basis_points)?;
            let cb_t = interpolate_linear(&basis_points, bond.maturity).unwrap_or(0.0);
            let systematic =
                systematic_bond_basis(cb_t, hcd, self.rpv01(surv, disc, bond.maturity)?)?;
            let approx_coarse = match &self.coarse_candidates {
                Some(c) => {
                    let bcds_t =
                        self.cds()
                            .par_spread(surv, disc, bond.recovery, freq, bond.maturity)?;
                    let spread_at = |m: f64| {
                        interpolate_linear(&sorted_market, m)
                            .ok_or_else(|| Error::usage("no market quotes"))
                    };
                    Some(
                        self.approximate_coarse_basis(
                            bond, surv, disc, c, spread_at, bcds_t, oasf,
                        )?,
                    )
                }
                None => None,
            };
            Ok(BondBasis {
                id: bond.id.clone(),
                oasf,
                hcd,
                systematic,
                full: full_bond_basis(systematic, oasf),
                approx_coarse,
            })
        })?;
        Ok(BasisReport {
            tenors: rows,
            bonds: per_bond,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::CurveSource;

    fn issuer() -> (SurvivalCurve, DiscountCurve) {
        (
            SurvivalCurve::new(
                vec![2.0, 5.0, 10.0],
                vec![0.01, 0.015, 0.02],
                CurveSource::BondImplied,
            )
            .unwrap(),
            DiscountCurve::flat(0.03).unwrap(),
        )
    }

    #[test]
    fn curve_basis_semantics() {
        let bcds = vec![(1.0, 0.01), (5.0, 0.012), (7.0, 0.013)];
        let same = curve_basis(&bcds, &bcds, false);
        assert!(same.iter().all(|r| r.basis == Some(0.0)));
        let wide: Vec<(f64, f64)> = bcds.iter().map(|(t, s)| (*t, s + 0.001)).collect();
        for r in curve_basis(&wide, &bcds, false) {
            assert!((r.basis.unwrap() - 0.001).abs() < 1e-15);
        }
        let tight = vec![(1.0, 0.009), (5.0, 0.011)];
        let rows = curve_basis(&tight, &bcds, false);
        assert!(rows[0].basis.unwrap() < 0.0);
        assert_eq!(rows[2].market, None);
        let filled = curve_basis(&tight, &bcds, true);
        assert_eq!(filled[2].market, Some(0.011));
        assert_eq!(missing_tenors(&tight, &[1.0, 5.0, 7.0]), vec![7.0]);
    }

    #[test]
    fn hcd_trivial_cases() {
        let (q, z) = issuer();
        let cds = CdsEngine::default();
        let grid = TimeGrid::uniform(0.0, 5.0, 0.25).unwrap();
        let flat = ForwardPriceCurve {
            grid: grid.clone(),
            prices: vec![1.0; grid.len()],
        };
        let a = |t: f64| cds.risky_pv01(&q, &z, 4, t);
        assert_eq!(
            hedging_cost_differential(0.4, |_| 0.001, &flat, a).unwrap(),
            0.0
        );
        let pricer = BondPricer::default();
        let b = CreditBond::new("P", 0.08, 2, 5.0, 1.1, 0.4, 0.0).unwrap();
        let fwd = pricer.clean_forward_price_curve(&b, &q, &z, &grid).unwrap();
        assert_eq!(
            hedging_cost_differential(0.4, |_| 0.0, &fwd, a).unwrap(),
            0.0
        );
        let hcd = hedging_cost_differential(0.4, |_| 0.001, &fwd, a).unwrap();
        assert!(hcd > 0.0);
        let sys = systematic_bond_basis(0.001, hcd, a(5.0).unwrap()).unwrap();
        assert!(sys > 0.001);
    }

    #[test]
    fn hcd_converges_under_refinement() {
        let (q, z) = issuer();
        let b = CreditBond::new("P", 0.08, 2, 7.0, 1.1, 0.4, 0.5).unwrap();
        let basis = [(1.0, 0.0005), (5.0, 0.002), (10.0, 0.001)];
        let hcd = |step: f64| {
            let an = BasisAnalyzer {
                hcd_step: step,
                ..BasisAnalyzer::default()
            };
            an.bond_hcd(&b, &q, &z, &basis).unwrap()
        };
        let coarse = hcd(1.0 / 12.0);
        let fine = hcd(1.0 / 24.0);
        assert!(((fine - coarse) / fine).abs() < 0.01, "{coarse} {fine}");
    }

    #[test]
    fn systematic_and_full_cases() {
        assert_eq!(systematic_bond_basis(0.002, 0.0, 4.0).unwrap(), 0.002);
        assert!(systematic_bond_basis(0.002, 0.01, 0.0).is_err());
        // zero basis at maturity leaves only the correction term
        assert_eq!(systematic_bond_basis(0.0, 0.004, 4.0).unwrap(), 0.001);
        assert_eq!(full_bond_basis(0.003, 0.0), 0.003);
        assert!(full_bond_basis(0.003, 0.001) < 0.003);
        assert!(full_bond_basis(-0.001, -0.004) > 0.0);
    }

    #[test]
    fn near_par_bond_correction_is_small() {
        let (q, z) = issuer();
        let pricer = BondPricer::default();
        let an = BasisAnalyzer::default();
        let basis = [(1.0, 0.001), (5.0, 0.002), (10.0, 0.003)];
        let near_par = CreditBond::new("N", 0.045, 2, 5.0, 1.0, 0.4, 0.0).unwrap();
        let premium = CreditBond::new("H", 0.09, 2, 5.0, 1.0, 0.4, 0.0).unwrap();
        let corr = |b: &CreditBond| {
            let b = b.with_price(pricer.bond_pv(b, &q, &z).unwrap());
            let hcd = an.bond_hcd(&b, &q, &z, &basis).unwrap();
            (hcd / an.rpv01(&q, &z, 5.0).unwrap()).abs()
        };
        assert!(corr(&near_par) < 0.1 * 0.002);
        assert!(corr(&premium) > corr(&near_par));
    }

    #[test]
    fn steepener_cases() {
        let (q, z) = issuer();
        let e = CdsEngine::default();
        let (s, l) =
            steepener_sizing(&e, 2.0, 7.0, &q, &z, 0.4, 4, SteepenerMode::EqualNotional).unwrap();
        assert_eq!((s, l), (1.0, 1.0));
        let same =
            steepener_sizing(&e, 5.0, 5.0, &q, &z, 0.4, 4, SteepenerMode::Credit01Neutral).unwrap();
        assert!((same.0 - 1.0).abs() < 1e-12);
        let (s, l) =
            steepener_sizing(&e, 2.0, 7.0, &q, &z, 0.4, 4, SteepenerMode::Credit01Neutral).unwrap();
        assert!(s > 1.0);
        let c2 = e
            .credit01(&q, &z, 0.4, 4, 2.0, Side::SellProtection, 1.0)
            .unwrap();
        let c7 = e
            .credit01(&q, &z, 0.4, 4, 7.0, Side::BuyProtection, 1.0)
            .unwrap();
        assert!((s * c2 + l * c7).abs() < 1e-12);
    }
}
