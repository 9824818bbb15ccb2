//! CDS leg valuation, par and forward spreads, Credit01 and the hazard
//! bootstrap from CDS quotes.

use crate::curves::{
    integrate_weighted, kernel_breaks, payment_periods, CurveSource, DiscountCurve, SurvivalCurve,
    TimeGrid,
};
use crate::error::{Error, Result};
use crate::math::{brent, BrentOptions, Quadrature};

/// A quoted par CDS.
#[derive(Debug, Clone, PartialEq)]
pub struct CdsQuote {
    pub tenor: f64,
    pub spread: f64,
    pub frequency: u32,
    pub recovery: f64,
}

impl CdsQuote {
    pub fn new(tenor: f64, spread: f64, frequency: u32, recovery: f64) -> Result<Self> {
        if !(tenor > 0.0) || !tenor.is_finite() {
            return Err(Error::domain(format!(
                "CDS tenor must be positive, got {tenor}"
            )));
        }
        if !(spread >= 0.0) || !spread.is_finite() {
            return Err(Error::domain(format!(
                "CDS spread must be >= 0, got {spread}"
            )));
        }
        if frequency == 0 {
            return Err(Error::domain("CDS payment frequency must be at least 1"));
        }
        check_recovery(recovery)?;
        Ok(Self {
            tenor,
            spread,
            frequency,
            recovery,
        })
    }
}

pub(crate) fn check_recovery(recovery: f64) -> Result<()> {
    if !(0.0..1.0).contains(&recovery) {
        return Err(Error::domain(format!(
            "recovery must lie in [0, 1), got {recovery}"
        )));
    }
    Ok(())
}

/// Present values of the two legs per unit notional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdsLegs {
    /// Premium leg value per unit running spread (the risky annuity).
    pub risky_annuity: f64,
    /// Contingent leg value.
    pub protection: f64,
}

impl CdsLegs {
    pub fn par_spread(&self) -> Result<f64> {
        if !(self.risky_annuity > 1e-14) {
            return Err(Error::numeric(format!(
                "degenerate risky annuity {:e}; par spread undefined",
                self.risky_annuity
            )));
        }
        Ok(self.protection / self.risky_annuity)
    }
}

/// Which side of the protection trade a position is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    BuyProtection,
    SellProtection,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::BuyProtection => 1.0,
            Side::SellProtection => -1.0,
        }
    }
}

/// Discretization settings shared by every CDS computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdsEngine {
    /// Protection-leg steps per year (monthly by default).
    pub steps_per_year: usize,
    /// Pay half the period premium on default within the period.
    pub accrual_on_default: bool,
    pub quadrature: Quadrature,
}

impl Default for CdsEngine {
    fn default() -> Self {
        Self {
            steps_per_year: 12,
            accrual_on_default: true,
            quadrature: Quadrature::default(),
        }
    }
}

/// Uniform protection grid on `[0, maturity]`.
pub fn protection_grid(maturity: f64, steps_per_year: usize) -> Vec<f64> {
    let n = ((maturity * steps_per_year as f64 - 1e-9).ceil() as usize).max(1);
    let h = maturity / n as f64;
    let mut g: Vec<f64> = (0..=n).map(|k| h * k as f64).collect();
    g[n] = maturity;
    g
}

impl CdsEngine {
    pub fn with_steps(steps_per_year: usize) -> Self {
        Self {
            steps_per_year: steps_per_year.max(1),
            ..Self::default()
        }
    }

    /// Risky annuity: value of a unit running premium paid `frequency` times
    /// a year until `maturity` or default.
    pub fn risky_pv01(
        &self,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        frequency: u32,
        maturity: f64,
    ) -> Result<f64> {
        let periods = payment_periods(maturity, frequency)?;
        let mut annuity = 0.0;
        for (start, end) in periods {
            let start = start.max(0.0);
            let accrual = end - start;
            let q_end = surv.q(0.0, end);
            let z_end = disc.df(0.0, end);
            annuity += accrual * q_end * z_end;
            if self.accrual_on_default {
                annuity += 0.5 * accrual * (surv.q(0.0, start) - q_end) * z_end;
            }
        }
        Ok(annuity)
    }

    pub fn premium_leg_pv(
        &self,
        spread: f64,
        frequency: u32,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        maturity: f64,
    ) -> Result<f64> {
        Ok(spread * self.risky_pv01(surv, disc, frequency, maturity)?)
    }

    /// Contingent leg: `(1 - R)` paid at the end of the step in which default
    /// occurs.
    pub fn protection_leg_pv(
        &self,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        recovery: f64,
        maturity: f64,
    ) -> Result<f64> {
        if !(maturity > 0.0) {
            return Err(Error::domain(format!(
                "CDS maturity must be positive, got {maturity}"
            )));
        }
        if !(0.0..=1.0).contains(&recovery) {
            return Err(Error::domain(format!(
                "recovery must lie in [0, 1], got {recovery}"
            )));
        }
        let grid = protection_grid(maturity, self.steps_per_year);
        let mut q_prev = 1.0;
        let mut sum = 0.0;
        for &t in &grid[1..] {
            let q = surv.q(0.0, t);
            sum += (q_prev - q) * disc.df(0.0, t);
            q_prev = q;
        }
        Ok((1.0 - recovery) * sum)
    }

    pub fn legs(
        &self,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        recovery: f64,
        frequency: u32,
        maturity: f64,
    ) -> Result<CdsLegs> {
        Ok(CdsLegs {
            risky_annuity: self.risky_pv01(surv, disc, frequency, maturity)?,
            protection: self.protection_leg_pv(surv, disc, recovery, maturity)?,
        })
    }

    /// Par spread on the discrete payment and protection grids.
    pub fn par_spread(
        &self,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        recovery: f64,
        frequency: u32,
        maturity: f64,
    ) -> Result<f64> {
        self.legs(surv, disc, recovery, frequency, maturity)?
            .par_spread()
            .map_err(|e| match e {
                Error::Numeric(m) => {
                    Error::numeric(format!("{m} (maturity {maturity}, frequency {frequency})"))
                }
                other => other,
            })
    }

    /// Continuous-time par spread: protection and premium integrals with
    /// continuously paid premium.
    pub fn par_spread_continuous(
        &self,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        recovery: f64,
        maturity: f64,
    ) -> Result<f64> {
        self.forward_cds_spread(surv, disc, recovery, 0.0, maturity)
    }

    /// Forward CDS spread for protection over `(start, end]`, knocked out by
    /// default before `start`.
    pub fn forward_cds_spread(
        &self,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        recovery: f64,
        start: f64,
        end: f64,
    ) -> Result<f64> {
        if !(end > start) {
            return Err(Error::domain(format!(
                "forward CDS needs start < end, got ({start}, {end})"
            )));
        }
        if !(0.0..=1.0).contains(&recovery) {
            return Err(Error::domain(format!(
                "recovery must lie in [0, 1], got {recovery}"
            )));
        }
        let (loss_rate, annuity) = self.continuous_integrals(surv, disc, start, end)?;
        if !(annuity > 0.0) {
            return Err(Error::numeric(format!(
                "zero continuous annuity on ({start}, {end})"
            )));
        }
        Ok((1.0 - recovery) * loss_rate / annuity)
    }

    /// `(int h Q Z, int Q Z)` over `(start, end]`, kernels taken from `start`.
    pub fn continuous_integrals(
        &self,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        start: f64,
        end: f64,
    ) -> Result<(f64, f64)> {
        let grid = TimeGrid::new(kernel_breaks(disc, surv, start, end))?;
        let kernel = |s: f64| surv.q(start, s) * disc.df(start, s);
        let annuity = integrate_weighted(kernel, &grid, &self.quadrature)?;
        let loss = integrate_weighted(|s| surv.hazard_at(s) * kernel(s), &grid, &self.quadrature)?;
        Ok((loss, annuity))
    }

    /// Sensitivity of a par CDS position to a 1bp parallel widening of the
    /// quote curve.
    ///
    /// The quote curve is the set of discrete par spreads at the survival
    /// curve's pillars. It is shifted by `+-bump_bp / 2`, re-bootstrapped, and
    /// the position (struck at today's par spread for `maturity`) revalued.
    #[allow(clippy::too_many_arguments)]
    pub fn credit01(
        &self,
        surv: &SurvivalCurve,
        disc: &DiscountCurve,
        recovery: f64,
        frequency: u32,
        maturity: f64,
        side: Side,
        bump_bp: f64,
    ) -> Result<f64> {
        if !(bump_bp > 0.0) {
            return Err(Error::domain(format!(
                "bump must be positive, got {bump_bp}"
            )));
        }
        let strike = self.par_spread(surv, disc, recovery, frequency, maturity)?;
        let quotes = surv
            .pillars()
            .iter()
            .map(|&p| {
                CdsQuote::new(
                    p,
                    self.par_spread(surv, disc, recovery, frequency, p)?,
                    frequency,
                    recovery,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let half = 0.5 * bump_bp * 1e-4;
        let mtm = |shift: f64| -> Result<f64> {
            let bumped: Vec<CdsQuote> = quotes
                .iter()
                .map(|q| CdsQuote {
                    spread: q.spread + shift,
                    ..q.clone()
                })
                .collect();
            let curve = self.bootstrap_hazard_from_cds(&bumped, disc)?;
            let legs = self.legs(&curve, disc, recovery, frequency, maturity)?;
            Ok(legs.protection - strike * legs.risky_annuity)
        };
        let up = mtm(half)?;
        let down = mtm(-half)?;
        Ok(side.sign() * (up - down) / bump_bp)
    }

    /// Sequential piecewise-constant hazard bootstrap that reprices every
    /// quote exactly.
    pub fn bootstrap_hazard_from_cds(
        &self,
        quotes: &[CdsQuote],
        disc: &DiscountCurve,
    ) -> Result<SurvivalCurve> {
        let first = quotes
            .first()
            .ok_or_else(|| Error::usage("no CDS quotes to bootstrap"))?;
        for w in quotes.windows(2) {
            if w[1].tenor <= w[0].tenor {
                return Err(Error::usage(format!(
                    "CDS quotes must have strictly increasing tenors ({} then {})",
                    w[0].tenor, w[1].tenor
                )));
            }
        }
        if let Some(q) = quotes.iter().find(|q| q.recovery != first.recovery) {
            return Err(Error::usage(format!(
                "inconsistent recovery across quotes ({} at {}y vs {})",
                q.recovery, q.tenor, first.recovery
            )));
        }
        let pillars: Vec<f64> = quotes.iter().map(|q| q.tenor).collect();
        let guess: Vec<f64> = quotes
            .iter()
            .map(|q| q.spread / (1.0 - q.recovery))
            .collect();
        let mut curve = SurvivalCurve::new(pillars, guess, CurveSource::CdsImplied)?;
        for (i, quote) in quotes.iter().enumerate() {
            let name = format!("{}y CDS", fmt_tenor(quote.tenor));
            let mut residual = |h: f64| -> f64 {
                let trial = curve.with_hazard(i, h);
                match self.legs(&trial, disc, quote.recovery, quote.frequency, quote.tenor) {
                    Ok(l) => l.protection - quote.spread * l.risky_annuity,
                    Err(_) => f64::NAN,
                }
            };
            let at_zero = residual(0.0);
            if at_zero > 0.0 {
                return Err(Error::calibration(
                    name,
                    format!(
                        "quote {:.4}bp needs a negative hazard on its segment",
                        quote.spread * 1e4
                    ),
                ));
            }
            let mut hi = 2.0 * quote.spread / (1.0 - quote.recovery) + 0.01;
            while residual(hi) < 0.0 {
                hi *= 2.0;
                if hi > 100.0 {
                    return Err(Error::calibration(name, "no hazard reprices the quote"));
                }
            }
            let h = if at_zero == 0.0 {
                0.0
            } else {
                brent(&mut residual, 0.0, hi, BrentOptions::default())
                    .map_err(|e| Error::calibration(name.clone(), e.to_string()))?
            };
            curve = curve.with_hazard(i, h);
        }
        Ok(curve)
    }
}

/// Tenor label without trailing zeros, e.g. `7`, `0.5`.
pub(crate) fn fmt_tenor(t: f64) -> String {
    let s = format!("{t:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}
