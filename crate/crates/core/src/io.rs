//! CSV ingestion and report writers, plus the flat `key = value` run config.
//!
//! Output formatting is fixed so reruns diff cleanly: price levels in percent
//! of face and spreads, cashflow amounts and price differences in basis
//! points, all with two decimals. Hazard and rate curves are written at full
//! round-trip precision so they can be re-ingested without drift.

use std::fs;
use std::path::{Path, PathBuf};

use crate::basis::BasisReport;
use crate::bond::CreditBond;
use crate::cds::CdsQuote;
use crate::curves::{CurveSource, DiscountCurve, SurvivalCurve};
use crate::error::{Error, Result};
use crate::hedging::{CandidateCost, HedgeSchedule};

pub const DISCOUNT_HEADER: [&str; 2] = ["pillar_years", "rate"];
pub const HAZARD_HEADER: [&str; 2] = ["pillar_years", "hazard"];
pub const CDS_HEADER: [&str; 2] = ["tenor_years", "spread_bp"];
pub const BOND_HEADER: [&str; 7] = [
    "id",
    "coupon_pct",
    "frequency",
    "maturity_years",
    "price_pct",
    "recovery",
    "coupon_recovery",
];
pub const SCHEDULE_HEADER: [&str; 11] = [
    "term",
    "fwd_bcds",
    "spot_bcds",
    "fwd_price",
    "hedge_notional",
    "protection_cf",
    "coupon_less_protection",
    "rfc",
    "cf_diff",
    "projected_fwd_price",
    "price_diff",
];
pub const TENOR_BASIS_HEADER: [&str; 4] = ["tenor_years", "market_bp", "bcds_bp", "curve_basis_bp"];
pub const BOND_BASIS_HEADER: [&str; 6] = [
    "bond_id",
    "oasf_bp",
    "hcd",
    "systematic_bp",
    "full_bp",
    "approx_coarse_bp",
];
pub const BCDS_HEADER: [&str; 2] = ["tenor_years", "bcds_bp"];
pub const ZSPREAD_HEADER: [&str; 5] = [
    "bond_id",
    "maturity_years",
    "zspread_bp",
    "bcds_bp",
    "difference_bp",
];
pub const CANDIDATE_HEADER: [&str; 3] = ["maturity_years", "addon_notional", "cost_bp"];

fn fixed(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    // -0.00 and 0.00 must print the same
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Decimal fraction to basis points, two decimals.
pub fn fmt_bp(v: f64) -> String {
    fixed(v * 1e4, 2)
}

/// Fraction of face to percent, two decimals.
pub fn fmt_pct(v: f64) -> String {
    fixed(v * 100.0, 2)
}

/// Plain year fractions and ratios, four decimals.
pub fn fmt_num(v: f64) -> String {
    fixed(v, 4)
}

fn opt(v: Option<f64>, f: fn(f64) -> String) -> String {
    v.map(f).unwrap_or_default()
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

struct Rows {
    path: PathBuf,
    records: Vec<(u64, csv::StringRecord)>,
}

fn read_rows(path: &Path, header: &[&str]) -> Result<Rows> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(io) => Error::Io(format!("{}: {io}", path.display())),
            _ => parse_err(path, 0, e.to_string()),
        })?;
    let got = rdr
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .clone();
    if got.iter().collect::<Vec<_>>() != header {
        return Err(parse_err(
            path,
            1,
            format!(
                "expected header `{}`, found `{}`",
                header.join(","),
                got.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(path, line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        records.push((line, rec));
    }
    Ok(Rows {
        path: path.to_path_buf(),
        records,
    })
}

impl Rows {
    fn field<T: std::str::FromStr>(
        &self,
        line: u64,
        rec: &csv::StringRecord,
        idx: usize,
        name: &str,
    ) -> Result<T> {
        let raw = rec.get(idx).unwrap_or("");
        raw.parse::<T>().map_err(|_| {
            parse_err(
                &self.path,
                line,
                format!("column `{name}`: cannot parse `{raw}`"),
            )
        })
    }

    fn optional_f64(
        &self,
        line: u64,
        rec: &csv::StringRecord,
        idx: usize,
        name: &str,
    ) -> Result<Option<f64>> {
        match rec.get(idx) {
            None | Some("") => Ok(None),
            Some(_) => self.field(line, rec, idx, name).map(Some),
        }
    }

    fn pairs(&self, header: &[&str]) -> Result<Vec<(f64, f64)>> {
        self.records
            .iter()
            .map(|(line, rec)| {
                Ok((
                    self.field(*line, rec, 0, header[0])?,
                    self.field(*line, rec, 1, header[1])?,
                ))
            })
            .collect()
    }

    fn with_line<T>(&self, line: u64, r: Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            Error::Parse { .. } => e,
            other => parse_err(&self.path, line, other.to_string()),
        })
    }

    fn whole_file<T>(&self, r: Result<T>) -> Result<T> {
        let line = self.records.first().map(|(l, _)| *l).unwrap_or(1);
        self.with_line(line, r)
    }
}

fn split(pairs: Vec<(f64, f64)>) -> (Vec<f64>, Vec<f64>) {
    pairs.into_iter().unzip()
}

pub fn read_discount_curve(path: &Path) -> Result<DiscountCurve> {
    let rows = read_rows(path, &DISCOUNT_HEADER)?;
    let (p, r) = split(rows.pairs(&DISCOUNT_HEADER)?);
    rows.whole_file(DiscountCurve::new(p, r))
}

pub fn read_hazard_curve(path: &Path, source: CurveSource) -> Result<SurvivalCurve> {
    let rows = read_rows(path, &HAZARD_HEADER)?;
    let (p, h) = split(rows.pairs(&HAZARD_HEADER)?);
    rows.whole_file(SurvivalCurve::new(p, h, source))
}

/// CDS quotes with spreads in bp; recovery and frequency come from config.
pub fn read_cds_quotes(path: &Path, frequency: u32, recovery: f64) -> Result<Vec<CdsQuote>> {
    let rows = read_rows(path, &CDS_HEADER)?;
    rows.records
        .iter()
        .map(|(line, rec)| {
            let tenor: f64 = rows.field(*line, rec, 0, CDS_HEADER[0])?;
            let bp: f64 = rows.field(*line, rec, 1, CDS_HEADER[1])?;
            rows.with_line(*line, CdsQuote::new(tenor, bp * 1e-4, frequency, recovery))
        })
        .collect()
}

/// Bonds with coupon and price in percent. Empty recovery columns fall back
/// to the supplied defaults.
pub fn read_bonds(
    path: &Path,
    default_recovery: f64,
    default_coupon_recovery: f64,
) -> Result<Vec<CreditBond>> {
    let rows = read_rows(path, &BOND_HEADER)?;
    rows.records
        .iter()
        .map(|(line, rec)| {
            let line = *line;
            let id: String = rows.field(line, rec, 0, BOND_HEADER[0])?;
            let coupon: f64 = rows.field(line, rec, 1, BOND_HEADER[1])?;
            let freq: u32 = rows.field(line, rec, 2, BOND_HEADER[2])?;
            let maturity: f64 = rows.field(line, rec, 3, BOND_HEADER[3])?;
            let price: f64 = rows.field(line, rec, 4, BOND_HEADER[4])?;
            let rec_rate = rows
                .optional_f64(line, rec, 5, BOND_HEADER[5])?
                .unwrap_or(default_recovery);
            let cr = rows
                .optional_f64(line, rec, 6, BOND_HEADER[6])?
                .unwrap_or(default_coupon_recovery);
            rows.with_line(
                line,
                CreditBond::new(
                    &id,
                    coupon / 100.0,
                    freq,
                    maturity,
                    price / 100.0,
                    rec_rate,
                    cr,
                ),
            )
        })
        .collect()
}

fn write_table(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Io(format!("{}: {e}", path.display()));
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn write_discount_curve(path: &Path, curve: &DiscountCurve) -> Result<()> {
    let rows = curve
        .pillars()
        .iter()
        .zip(curve.rates())
        .map(|(p, r)| vec![p.to_string(), r.to_string()]);
    write_table(path, &DISCOUNT_HEADER, rows)
}

/// Writes the curve at full round-trip precision.
pub fn write_hazard_curve(path: &Path, curve: &SurvivalCurve) -> Result<()> {
    let rows = curve
        .pillars()
        .iter()
        .zip(curve.hazards())
        .map(|(p, h)| vec![p.to_string(), h.to_string()]);
    write_table(path, &HAZARD_HEADER, rows)
}

pub fn write_bcds(path: &Path, bcds: &[(f64, f64)]) -> Result<()> {
    write_table(
        path,
        &BCDS_HEADER,
        bcds.iter().map(|(t, s)| vec![fmt_num(*t), fmt_bp(*s)]),
    )
}

/// One row of the Z-spread versus BCDS comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ZSpreadRow {
    pub id: String,
    pub maturity: f64,
    pub zspread: f64,
    pub bcds: f64,
}

pub fn write_zspread_comparison(path: &Path, rows: &[ZSpreadRow]) -> Result<()> {
    write_table(
        path,
        &ZSPREAD_HEADER,
        rows.iter().map(|r| {
            vec![
                r.id.clone(),
                fmt_num(r.maturity),
                fmt_bp(r.zspread),
                fmt_bp(r.bcds),
                fmt_bp(r.zspread - r.bcds),
            ]
        }),
    )
}

/// Hedge schedule: prices in percent, spreads and per-period amounts in bp,
/// notionals as fractions of face. Row zero leaves the per-period columns
/// empty.
pub fn write_schedule(path: &Path, schedule: &HedgeSchedule) -> Result<()> {
    write_table(
        path,
        &SCHEDULE_HEADER,
        schedule.rows.iter().map(|r| {
            vec![
                fmt_num(r.term),
                fmt_bp(r.fwd_bcds),
                fmt_bp(r.spot_bcds),
                fmt_pct(r.fwd_price),
                opt(r.hedge_notional, fmt_num),
                opt(r.protection_cf, fmt_bp),
                opt(r.coupon_less_protection, fmt_bp),
                opt(r.rfc, fmt_bp),
                opt(r.cf_diff, fmt_bp),
                fmt_pct(r.projected_fwd_price),
                fmt_bp(r.price_diff),
            ]
        }),
    )
}

pub fn write_candidates(path: &Path, candidates: &[CandidateCost]) -> Result<()> {
    write_table(
        path,
        &CANDIDATE_HEADER,
        candidates.iter().map(|c| {
            vec![
                fmt_num(c.maturity),
                fmt_num(c.addon_notional),
                fmt_bp(c.cost),
            ]
        }),
    )
}

pub fn write_tenor_basis(path: &Path, report: &BasisReport) -> Result<()> {
    write_table(
        path,
        &TENOR_BASIS_HEADER,
        report.tenors.iter().map(|r| {
            vec![
                fmt_num(r.tenor),
                opt(r.market, fmt_bp),
                fmt_bp(r.bcds),
                opt(r.basis, fmt_bp),
            ]
        }),
    )
}

/// Per-bond basis. `hcd` is PV per unit face, shown in bp of face.
pub fn write_bond_basis(path: &Path, report: &BasisReport) -> Result<()> {
    write_table(
        path,
        &BOND_BASIS_HEADER,
        report.bonds.iter().map(|b| {
            vec![
                b.id.clone(),
                fmt_bp(b.oasf),
                fmt_bp(b.hcd),
                fmt_bp(b.systematic),
                fmt_bp(b.full),
                opt(b.approx_coarse, fmt_bp),
            ]
        }),
    )
}

/// Inputs and knobs for a batch run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub discount_curve: Option<PathBuf>,
    pub bonds: Option<PathBuf>,
    pub cds_quotes: Option<PathBuf>,
    /// Previously fitted bond-implied hazard curve; skips the bond bootstrap.
    pub hazard_curve: Option<PathBuf>,
    pub recovery: f64,
    pub coupon_recovery: f64,
    /// CDS premium frequency per year.
    pub frequency: u32,
    /// Discretization step in years for protection, recovery and HCD grids.
    pub grid_step: f64,
    pub refinement: usize,
    /// Fill missing market tenors by linear interpolation.
    pub interpolate: bool,
    pub output_dir: PathBuf,
    pub tenors: Vec<f64>,
    /// Add-on maturities for the coarse two-CDS hedge; defaults to every
    /// coupon date of the bond.
    pub candidates: Option<Vec<f64>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            discount_curve: None,
            bonds: None,
            cds_quotes: None,
            hazard_curve: None,
            recovery: 0.4,
            coupon_recovery: 0.0,
            frequency: 4,
            grid_step: 1.0 / 12.0,
            refinement: 1,
            interpolate: false,
            output_dir: PathBuf::from("."),
            tenors: vec![1.0, 2.0, 3.0, 5.0, 7.0, 10.0],
            candidates: None,
        }
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Some(true),
        "false" | "no" | "0" | "off" => Some(false),
        _ => None,
    }
}

impl RunConfig {
    /// Sets one field from its textual key and value.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.parse()
                .map_err(|_| format!("`{key}`: cannot parse `{v}`"))
        }
        fn list(key: &str, v: &str) -> std::result::Result<Vec<f64>, String> {
            v.split(',').map(|t| num::<f64>(key, t.trim())).collect()
        }
        match key {
            "discount_curve" => self.discount_curve = Some(PathBuf::from(value)),
            "bonds" => self.bonds = Some(PathBuf::from(value)),
            "cds_quotes" => self.cds_quotes = Some(PathBuf::from(value)),
            "hazard_curve" => self.hazard_curve = Some(PathBuf::from(value)),
            "recovery" => self.recovery = num(key, value)?,
            "coupon_recovery" => self.coupon_recovery = num(key, value)?,
            "frequency" => self.frequency = num(key, value)?,
            "grid_step" => self.grid_step = num(key, value)?,
            "refinement" => self.refinement = num(key, value)?,
            "interpolate" => {
                self.interpolate = parse_bool(value)
                    .ok_or_else(|| format!("`{key}`: expected true/false, got `{value}`"))?
            }
            "output_dir" => self.output_dir = PathBuf::from(value),
            "tenors" => self.tenors = list(key, value)?,
            "candidates" => self.candidates = Some(list(key, value)?),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment. Relative paths are
    /// resolved against the config file's directory.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let base = path.parent().unwrap_or(Path::new(""));
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                parse_err(
                    path,
                    i as u64 + 1,
                    format!("expected `key = value`, got `{line}`"),
                )
            })?;
            let (k, v) = (k.trim(), v.trim());
            cfg.set(k, v)
                .map_err(|m| parse_err(path, i as u64 + 1, m))?;
            let resolve = |p: &mut Option<PathBuf>| {
                if let Some(p) = p.as_mut() {
                    if p.is_relative() {
                        *p = base.join(&*p);
                    }
                }
            };
            match k {
                "discount_curve" => resolve(&mut cfg.discount_curve),
                "bonds" => resolve(&mut cfg.bonds),
                "cds_quotes" => resolve(&mut cfg.cds_quotes),
                "hazard_curve" => resolve(&mut cfg.hazard_curve),
                "output_dir" if cfg.output_dir.is_relative() => {
                    cfg.output_dir = base.join(&cfg.output_dir)
                }
                _ => {}
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.grid_step > 0.0) || !self.grid_step.is_finite() {
            return Err(Error::usage(format!(
                "grid_step must be > 0, got {}",
                self.grid_step
            )));
        }
        if self.refinement < 1 {
            return Err(Error::usage("refinement must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.recovery) {
            return Err(Error::usage(format!(
                "recovery {} outside [0, 1)",
                self.recovery
            )));
        }
        if !(0.0..=1.0).contains(&self.coupon_recovery) {
            return Err(Error::usage(format!(
                "coupon_recovery {} outside [0, 1]",
                self.coupon_recovery
            )));
        }
        if self.frequency == 0 {
            return Err(Error::usage("frequency must be >= 1"));
        }
        if self.tenors.is_empty() || self.tenors.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::usage(
                "tenors must be a non-empty list of positive years",
            ));
        }
        Ok(())
    }

    /// Discretization steps per year implied by `grid_step`.
    pub fn steps_per_year(&self) -> usize {
        ((1.0 / self.grid_step).round() as usize).max(1)
    }
}
