//! Batch drivers behind the command-line tool. Each run reads its inputs
//! from a [`RunConfig`], evaluates, and writes CSV reports into the output
//! directory, returning the paths written.

use std::fs;
use std::path::{Path, PathBuf};

use crate::basis::{interpolate_linear, BasisAnalyzer, BasisReport};
use crate::bond::{bcds_curve, BondPricer, CreditBond};
use crate::cds::{CdsEngine, CdsQuote};
use crate::curves::{CurveSource, DiscountCurve, SurvivalCurve, TimeGrid};
use crate::error::{Error, Result};
use crate::hedging::{coupon_grid, HedgeSchedule, Hedger};
use crate::io::{self, RunConfig, ZSpreadRow};
use crate::math::Quadrature;
use crate::par::{self, Execution};
use crate::replication::{self, RisklessRecipe};

/// Which instruments a `curve` run bootstraps from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveInput {
    Cds,
    Bonds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HedgeMode {
    Forward,
    Pairs,
    Coarse,
}

impl HedgeMode {
    fn name(self) -> &'static str {
        match self {
            HedgeMode::Forward => "forward",
            HedgeMode::Pairs => "pairs",
            HedgeMode::Coarse => "coarse",
        }
    }
}

/// Engines configured from the run's grid step and quadrature refinement.
pub fn hedger(cfg: &RunConfig) -> Hedger {
    let quadrature = Quadrature {
        refinement: cfg.refinement,
        ..Quadrature::default()
    };
    let steps = cfg.steps_per_year();
    Hedger {
        cds: CdsEngine {
            steps_per_year: steps,
            quadrature,
            ..CdsEngine::default()
        },
        pricer: BondPricer {
            steps_per_year: steps,
            quadrature,
            ..BondPricer::default()
        },
        cds_frequency: cfg.frequency,
        exec: Execution::available(),
    }
}

fn required<'a>(p: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    p.as_deref()
        .ok_or_else(|| Error::Usage(format!("missing input `{key}`")))
}

fn out_path(cfg: &RunConfig, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| Error::Io(format!("{}: {e}", cfg.output_dir.display())))?;
    Ok(cfg.output_dir.join(name))
}

fn load_discount(cfg: &RunConfig) -> Result<DiscountCurve> {
    io::read_discount_curve(required(&cfg.discount_curve, "discount_curve")?)
}

fn load_bonds(cfg: &RunConfig) -> Result<Vec<CreditBond>> {
    let path = required(&cfg.bonds, "bonds")?;
    let bonds = io::read_bonds(path, cfg.recovery, cfg.coupon_recovery)?;
    if bonds.is_empty() {
        return Err(Error::Usage(format!("{}: no bonds", path.display())));
    }
    Ok(bonds)
}

fn load_quotes(cfg: &RunConfig) -> Result<Vec<CdsQuote>> {
    let path = required(&cfg.cds_quotes, "cds_quotes")?;
    let quotes = io::read_cds_quotes(path, cfg.frequency, cfg.recovery)?;
    if quotes.is_empty() {
        return Err(Error::Usage(format!("{}: no CDS quotes", path.display())));
    }
    Ok(quotes)
}

/// The issuer's bond-implied curve: a previously fitted hazard file when
/// configured, else a fresh bootstrap from the bonds.
fn implied_curve(
    cfg: &RunConfig,
    h: &Hedger,
    bonds: &[CreditBond],
    disc: &DiscountCurve,
) -> Result<SurvivalCurve> {
    match &cfg.hazard_curve {
        Some(p) => io::read_hazard_curve(p, CurveSource::BondImplied),
        None => h.pricer.bootstrap_hazard_from_bonds(bonds, disc),
    }
}

/// Bootstraps a hazard curve and writes `hazard_curve.csv`.
pub fn run_curve(cfg: &RunConfig, input: CurveInput) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let h = hedger(cfg);
    let disc = load_discount(cfg)?;
    let surv = match input {
        CurveInput::Cds => h.cds.bootstrap_hazard_from_cds(&load_quotes(cfg)?, &disc)?,
        CurveInput::Bonds => h
            .pricer
            .bootstrap_hazard_from_bonds(&load_bonds(cfg)?, &disc)?,
    };
    let out = out_path(cfg, "hazard_curve.csv")?;
    io::write_hazard_curve(&out, &surv)?;
    Ok(vec![out])
}

/// BCDS at every pillar of the bond-implied curve, plus a per-bond
/// Z-spread versus BCDS comparison.
pub fn run_bcds(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let h = hedger(cfg);
    let disc = load_discount(cfg)?;
    let bonds = load_bonds(cfg)?;
    let surv = implied_curve(cfg, &h, &bonds, &disc)?;
    let terms = TimeGrid::new(surv.pillars().to_vec())?;
    let bcds = bcds_curve(
        &h.cds,
        &surv,
        &disc,
        cfg.recovery,
        cfg.frequency,
        &terms,
        false,
    )?;
    let rows = par::try_map(h.exec, &bonds, |b| -> Result<ZSpreadRow> {
        Ok(ZSpreadRow {
            id: b.id.clone(),
            maturity: b.maturity,
            zspread: h.pricer.zspread(b, &disc)?,
            bcds: h
                .cds
                .par_spread(&surv, &disc, b.recovery, cfg.frequency, b.maturity)?,
        })
    })?;
    let bcds_path = out_path(cfg, "bcds.csv")?;
    io::write_bcds(&bcds_path, &bcds)?;
    let z_path = out_path(cfg, "zspread_comparison.csv")?;
    io::write_zspread_comparison(&z_path, &rows)?;
    Ok(vec![bcds_path, z_path])
}

/// Output of a hedge run.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgeRun {
    pub schedule: HedgeSchedule,
    pub files: Vec<PathBuf>,
}

/// Staggered or coarse hedge for one bond of the portfolio.
///
/// Coarse mode prices candidates at market CDS spreads when quotes are
/// configured and at BCDS otherwise.
pub fn run_hedge(cfg: &RunConfig, bond_id: &str, mode: HedgeMode) -> Result<HedgeRun> {
    cfg.validate()?;
    let h = hedger(cfg);
    let disc = load_discount(cfg)?;
    let bonds = load_bonds(cfg)?;
    let bond = bonds.iter().find(|b| b.id == bond_id).ok_or_else(|| {
        let known: Vec<&str> = bonds.iter().map(|b| b.id.as_str()).collect();
        Error::Usage(format!(
            "unknown bond id `{bond_id}` (known: {})",
            known.join(", ")
        ))
    })?;
    let surv = implied_curve(cfg, &h, &bonds, &disc)?;
    let grid = coupon_grid(bond);
    let mut files = Vec::new();
    let schedule = match mode {
        HedgeMode::Forward => h.build_forward_hedge(bond, &surv, &disc, &grid)?,
        HedgeMode::Pairs => h.build_pair_hedge(bond, &surv, &disc, &grid)?,
        HedgeMode::Coarse => {
            let candidates = cfg
                .candidates
                .clone()
                .unwrap_or_else(|| grid.nodes()[1..].to_vec());
            let market: Option<Vec<(f64, f64)>> = match &cfg.cds_quotes {
                Some(_) => {
                    let mut q: Vec<(f64, f64)> = load_quotes(cfg)?
                        .iter()
                        .map(|q| (q.tenor, q.spread))
                        .collect();
                    q.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite tenor"));
                    Some(q)
                }
                None => None,
            };
            let spread_at = |m: f64| -> Result<f64> {
                match &market {
                    Some(q) => interpolate_linear(q, m)
                        .ok_or_else(|| Error::Usage("no market quotes".into())),
                    None => h
                        .cds
                        .par_spread(&surv, &disc, bond.recovery, cfg.frequency, m),
                }
            };
            let two = h.optimize_two_cds(bond, &surv, &disc, &grid, &candidates, spread_at)?;
            let cand_path = out_path(cfg, &format!("candidates_{bond_id}.csv"))?;
            io::write_candidates(&cand_path, &two.candidates)?;
            files.push(cand_path);
            let legs = [
                (two.addon_maturity, two.addon_notional),
                (bond.maturity, two.final_notional),
            ];
            h.build_spot_hedge(bond, &surv, &disc, &grid, &legs)?
        }
    };
    let path = out_path(cfg, &format!("hedge_{bond_id}_{}.csv", mode.name()))?;
    io::write_schedule(&path, &schedule)?;
    files.insert(0, path);
    Ok(HedgeRun { schedule, files })
}

/// Output of a basis run.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisRun {
    pub report: BasisReport,
    pub files: Vec<PathBuf>,
}

/// Curve basis by tenor and per-bond systematic, full and approximate basis.
pub fn run_basis(cfg: &RunConfig) -> Result<BasisRun> {
    cfg.validate()?;
    let h = hedger(cfg);
    let disc = load_discount(cfg)?;
    let bonds = load_bonds(cfg)?;
    let quotes = load_quotes(cfg)?;
    let surv = implied_curve(cfg, &h, &bonds, &disc)?;
    let market: Vec<(f64, f64)> = quotes.iter().map(|q| (q.tenor, q.spread)).collect();
    let analyzer = BasisAnalyzer {
        hedger: h,
        hcd_step: cfg.grid_step,
        coarse_candidates: Some(cfg.candidates.clone().unwrap_or_else(|| cfg.tenors.clone())),
    };
    let report = analyzer.report(&bonds, &surv, &disc, &market, &cfg.tenors, cfg.interpolate)?;
    let tenor_path = out_path(cfg, "basis_tenors.csv")?;
    io::write_tenor_basis(&tenor_path, &report)?;
    let bond_path = out_path(cfg, "basis_bonds.csv")?;
    io::write_bond_basis(&bond_path, &report)?;
    Ok(BasisRun {
        report,
        files: vec![tenor_path, bond_path],
    })
}

/// Which worked example to rebuild.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Replication {
    /// Forward CDS strip on the 8% premium bond.
    ForwardStrip,
    /// Spot CDS pairs on the same bond.
    SpotPairs,
}

/// Rebuilds the embedded premium-bond example and writes its schedule.
pub fn run_replication(output_dir: &Path, which: Replication) -> Result<HedgeRun> {
    let ex = replication::example(RisklessRecipe::default())?;
    let h = Hedger::default();
    let (schedule, name) = match which {
        Replication::ForwardStrip => (ex.forward_hedge(&h)?, "replicate_forward.csv"),
        Replication::SpotPairs => (ex.pair_hedge(&h)?, "replicate_pairs.csv"),
    };
    let cfg = RunConfig {
        output_dir: output_dir.to_path_buf(),
        ..RunConfig::default()
    };
    let path = out_path(&cfg, name)?;
    io::write_schedule(&path, &schedule)?;
    Ok(HedgeRun {
        schedule,
        files: vec![path],
    })
}
