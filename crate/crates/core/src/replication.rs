//! Worked example: a 5-year 8% semiannual premium bond hedged with forward
//! CDS and with spot CDS pairs.
//!
//! The issuer hazards come from a half-yearly forward BCDS strip through
//! `h = s_fwd / (1 - R)`. The riskless curve is not given with the example,
//! so it is completed in one of two ways (see [`RisklessRecipe`]).

use crate::bond::{BondPricer, CreditBond};
use crate::curves::{CurveSource, DiscountCurve, SurvivalCurve, TimeGrid};
use crate::error::{Error, Result};
use crate::hedging::{coupon_grid, HedgeSchedule, Hedger};
use crate::math::brent_expanding;

/// Tabulated values of the worked example, all as fractions.
pub mod table {
    pub const TERMS: [f64; 11] = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0];
    /// Forward BCDS over the half year ending at each term (first entry is the t = 0 limit).
    pub const FWD_BCDS: [f64; 11] = [
        0.0060, 0.0060, 0.0063, 0.0066, 0.0069, 0.0072, 0.0074, 0.0077, 0.0080, 0.0083, 0.0086,
    ];
    pub const SPOT_BCDS: [f64; 11] = [
        0.0060, 0.0060, 0.0062, 0.0063, 0.0065, 0.0066, 0.0067, 0.0069, 0.0070, 0.0071, 0.0072,
    ];
    pub const FWD_PRICE: [f64; 11] = [
        1.1670, 1.1384, 1.1131, 1.0909, 1.0716, 1.0550, 1.0408, 1.0284, 1.0177, 1.0084, 1.0000,
    ];

    pub const FORWARD_NOTIONAL: [f64; 10] =
        [1.33, 1.27, 1.22, 1.18, 1.15, 1.12, 1.09, 1.07, 1.05, 1.03];
    pub const FORWARD_PROTECTION_CF: [f64; 10] = [
        0.0040, 0.0040, 0.0040, 0.0041, 0.0041, 0.0042, 0.0042, 0.0043, 0.0043, 0.0044,
    ];
    pub const FORWARD_COUPON_LESS_PROTECTION: [f64; 10] = [
        0.0360, 0.0360, 0.0360, 0.0359, 0.0359, 0.0358, 0.0358, 0.0357, 0.0357, 0.0356,
    ];
    pub const RFC: [f64; 10] = [
        0.0360, 0.0360, 0.0360, 0.0360, 0.0359, 0.0359, 0.0358, 0.0357, 0.0356, 0.0356,
    ];
    pub const FORWARD_PRICE_DIFF: [f64; 11] = [
        -0.0002, -0.0001, -0.0001, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    ];

    pub const PAIR_NOTIONAL: [f64; 10] =
        [0.05, 0.05, 0.04, 0.04, 0.03, 0.03, 0.02, 0.02, 0.02, 1.03];
    pub const PAIR_PROTECTION_CF: [f64; 10] = [
        0.0046, 0.0045, 0.0043, 0.0042, 0.0041, 0.0040, 0.0039, 0.0038, 0.0037, 0.0037,
    ];
    pub const PAIR_PRICE_DIFF: [f64; 11] = [
        0.0006, 0.0013, 0.0017, 0.0021, 0.0022, 0.0022, 0.0021, 0.0018, 0.0014, 0.0008, 0.0,
    ];
}

pub const COUPON: f64 = 0.08;
pub const MATURITY: f64 = 5.0;
pub const RECOVERY: f64 = 0.5;
pub const COUPON_RECOVERY: f64 = 0.5;

/// How the unstated riskless curve is completed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RisklessRecipe {
    /// One flat rate solved so the bond prices at the tabulated spot price.
    Flat,
    /// Cubic instantaneous forward, constant over each half year: the level
    /// reprices the spot price exactly and the shape is least-squares fitted
    /// to the nine intermediate forward prices.
    #[default]
    FittedCubic,
}

/// The example's bond, curves and hedge grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub bond: CreditBond,
    pub surv: SurvivalCurve,
    pub disc: DiscountCurve,
    pub grid: TimeGrid,
    /// Polynomial coefficients `a + b t + c t^2 + d t^3` of the riskless
    /// forward (only `a` is non-zero for the flat recipe).
    pub coefficients: [f64; 4],
}

pub fn example_bond() -> CreditBond {
    CreditBond::new(
        "PREMIUM8",
        COUPON,
        2,
        MATURITY,
        table::FWD_PRICE[0],
        RECOVERY,
        COUPON_RECOVERY,
    )
    .expect("valid example bond")
}

/// Hazards `s_fwd / (1 - R)` on each half year.
pub fn example_survival() -> SurvivalCurve {
    let pillars = table::TERMS[1..].to_vec();
    let hazards = table::FWD_BCDS[1..]
        .iter()
        .map(|s| s / (1.0 - RECOVERY))
        .collect();
    SurvivalCurve::new(pillars, hazards, CurveSource::BondImplied).expect("valid example hazards")
}

fn cubic_curve(c: &[f64; 4]) -> Result<DiscountCurve> {
    let pillars = table::TERMS[1..].to_vec();
    let rates = pillars
        .iter()
        .map(|&end| {
            let m = end - 0.25;
            c[0] + m * (c[1] + m * (c[2] + m * c[3]))
        })
        .collect();
    DiscountCurve::new(pillars, rates)
}

struct Fitter {
    pricer: BondPricer,
    bond: CreditBond,
    surv: SurvivalCurve,
}

impl Fitter {
    fn level(&self, shape: [f64; 3]) -> Result<f64> {
        let target = self.bond.price;
        brent_expanding(
            |a| match cubic_curve(&[a, shape[0], shape[1], shape[2]]) {
                Ok(z) => self
                    .pricer
                    .bond_pv(&self.bond, &self.surv, &z)
                    .map(|p| p - target)
                    .unwrap_or(f64::NAN),
                Err(_) => f64::NAN,
            },
            -0.05,
            0.15,
            10,
        )
    }

    /// Level and forward-price residuals (in bp of price) at the inner nodes.
    fn residuals(&self, shape: [f64; 3]) -> Result<(f64, Vec<f64>)> {
        let a = self.level(shape)?;
        let z = cubic_curve(&[a, shape[0], shape[1], shape[2]])?;
        let res = (1..table::TERMS.len() - 1)
            .map(|j| {
                let p = self
                    .pricer
                    .forward_pv(&self.bond, &self.surv, &z, table::TERMS[j])?
                    .total();
                Ok((p - table::FWD_PRICE[j]) * 1e4)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((a, res))
    }
}

fn solve3(m: [[f64; 3]; 3], v: [f64; 3]) -> Option<[f64; 3]> {
    let mut a = [[0.0; 4]; 3];
    for i in 0..3 {
        a[i][..3].copy_from_slice(&m[i]);
        a[i][3] = v[i];
    }
    for col in 0..3 {
        let piv =
            (col..3).max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        for row in 0..3 {
            if row != col {
                let f = a[row][col] / a[col][col];
                #[allow(clippy::needless_range_loop)]
                for k in col..4 {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    Some([a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]])
}

/// Levenberg-Marquardt over the three shape coefficients.
fn fit_shape(f: &Fitter) -> Result<[f64; 4]> {
    let sq = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>();
    let mut shape = [0.01, 0.0, 0.0];
    let (mut level, mut res) = f.residuals(shape)?;
    let mut cost = sq(&res);
    let mut lambda = 1e-3;
    for _ in 0..200 {
        let mut jac = vec![[0.0; 3]; res.len()];
        for k in 0..3 {
            let step = 1e-6 * shape[k].abs().max(1e-3);
            let mut bumped = shape;
            bumped[k] += step;
            let (_, rb) = f.residuals(bumped)?;
            for (row, (hi, lo)) in jac.iter_mut().zip(rb.iter().zip(&res)) {
                row[k] = (hi - lo) / step;
            }
        }
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for (row, r) in jac.iter().zip(&res) {
            for i in 0..3 {
                jtr[i] -= row[i] * r;
                for j in 0..3 {
                    jtj[i][j] += row[i] * row[j];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut damped = jtj;
            for (i, row) in damped.iter_mut().enumerate() {
                row[i] += lambda * jtj[i][i].max(1e-12);
            }
            let delta = solve3(damped, jtr)
                .ok_or_else(|| Error::numeric("singular riskless-fit normal equations"))?;
            let trial = [
                shape[0] + delta[0],
                shape[1] + delta[1],
                shape[2] + delta[2],
            ];
            if let Ok((lv, rt)) = f.residuals(trial) {
                let c = sq(&rt);
                if c < cost {
                    let rel = (cost - c) / cost.max(1e-300);
                    shape = trial;
                    level = lv;
                    res = rt;
                    cost = c;
                    lambda = (lambda * 0.3).max(1e-12);
                    improved = true;
                    if rel < 1e-12 {
                        return Ok([level, shape[0], shape[1], shape[2]]);
                    }
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    Ok([level, shape[0], shape[1], shape[2]])
}

/// Build the example under the chosen riskless recipe.
pub fn example(recipe: RisklessRecipe) -> Result<Example> {
    let bond = example_bond();
    let surv = example_survival();
    let pricer = BondPricer::default();
    let coefficients = match recipe {
        RisklessRecipe::Flat => {
            let r = brent_expanding(
                |r| {
                    let z = DiscountCurve::flat(r).expect("finite rate");
                    pricer
                        .bond_pv(&bond, &surv, &z)
                        .map(|p| p - bond.price)
                        .unwrap_or(f64::NAN)
                },
                -0.05,
                0.15,
                10,
            )?;
            [r, 0.0, 0.0, 0.0]
        }
        RisklessRecipe::FittedCubic => fit_shape(&Fitter {
            pricer,
            bond: bond.clone(),
            surv: surv.clone(),
        })?,
    };
    let disc = match recipe {
        RisklessRecipe::Flat => DiscountCurve::flat(coefficients[0])?,
        RisklessRecipe::FittedCubic => cubic_curve(&coefficients)?,
    };
    let grid = coupon_grid(&bond);
    Ok(Example {
        bond,
        surv,
        disc,
        grid,
        coefficients,
    })
}

impl Example {
    pub fn forward_hedge(&self, hedger: &Hedger) -> Result<HedgeSchedule> {
        hedger.build_forward_hedge(&self.bond, &self.surv, &self.disc, &self.grid)
    }

    pub fn pair_hedge(&self, hedger: &Hedger) -> Result<HedgeSchedule> {
        hedger.build_pair_hedge(&self.bond, &self.surv, &self.disc, &self.grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn survival_matches_first_forward_spread() {
        let q = example_survival();
        assert!((q.survival_prob(0.0, 0.5).unwrap() - (-0.006f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn both_recipes_reprice_spot() {
        let pricer = BondPricer::default();
        for recipe in [RisklessRecipe::Flat, RisklessRecipe::FittedCubic] {
            let ex = example(recipe).unwrap();
            let p = pricer.bond_pv(&ex.bond, &ex.surv, &ex.disc).unwrap();
            assert!((p - 1.1670).abs() < 1e-12);
        }
    }

    #[test]
    fn fitted_curve_tracks_forward_prices() {
        let ex = example(RisklessRecipe::FittedCubic).unwrap();
        let pricer = BondPricer::default();
        let fwd = pricer
            .forward_price_curve(&ex.bond, &ex.surv, &ex.disc, &ex.grid)
            .unwrap();
        for (p, target) in fwd.prices.iter().zip(table::FWD_PRICE) {
            assert!((p - target).abs() < 5e-4, "{p} vs {target}");
        }
    }
}
