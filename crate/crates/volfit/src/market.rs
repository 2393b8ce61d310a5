//! Option-chain CSV parsing and smile construction.
//!
//! The expected schema is one quote per row:
//!
//! ```text
//!     timestamp,expiry,strike,kind,bid,ask,forward,tau[,iv]
//! ```
//!
//! with `kind` either `C` or `P` (case-insensitive), `tau` the year fraction
//! to expiry, and an optional precomputed implied vol column. Unknown extra
//! columns are ignored. A malformed header is a hard error; malformed rows
//! are collected per row so one bad print does not take down a whole chain.
//!
//! [`build_smile`] turns the per-strike call/put quotes of a single chain
//! into a calibration-ready [`Smile`]: one quote is selected per strike
//! according to a [`SelectionRule`], its implied vol is taken from the `iv`
//! column when present and otherwise backed out of the bid/ask mid, and
//! quotes whose mid violates the arbitrage bounds are dropped (and counted)
//! rather than poisoning the fit.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::black::{implied_vol, ForwardContext, OptionKind};
use crate::calibrate::{strike_weight, Smile, SmilePoint, MIN_SMILE_POINTS};
use crate::error::{Result, VolfitError};

/// A validated option quote from a chain CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub timestamp: String,
    pub expiry: String,
    pub strike: f64,
    pub kind: OptionKind,
    pub bid: f64,
    pub ask: f64,
    pub forward: f64,
    pub tau: f64,
    pub iv: Option<f64>,
}

impl ChainRecord {
    pub fn mid(&self) -> f64 {
        0.5 * (self.bid + self.ask)
    }

    pub fn spread(&self) -> f64 {
        self.ask - self.bid
    }
}

/// A row that failed to parse or validate, with its 1-based data-row index
/// (the header does not count).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowError {
    pub row: usize,
    pub message: String,
}

/// Parse outcome: the good rows plus everything that was rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainParse {
    pub records: Vec<ChainRecord>,
    pub errors: Vec<RowError>,
}

/// How to pick between the call and the put quoted at the same strike.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionRule {
    /// Prefer the quote with the tighter bid/ask spread; ties go to the
    /// out-of-the-money side.
    SpreadBased,
    /// Always take the out-of-the-money side (put below the forward, call
    /// at or above), falling back to whichever side is quoted.
    OtmSide,
    /// Take the quote carrying a precomputed `iv`; it is an error for both
    /// or neither side to carry one.
    PrecomputedIv,
}

impl std::str::FromStr for SelectionRule {
    type Err = VolfitError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "spread" => Ok(SelectionRule::SpreadBased),
            "otm" => Ok(SelectionRule::OtmSide),
            "iv" => Ok(SelectionRule::PrecomputedIv),
            other => Err(VolfitError::invalid(format!(
                "unknown selection rule {other:?}; expected spread, otm, or iv"
            ))),
        }
    }
}

impl std::fmt::Display for SelectionRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SelectionRule::SpreadBased => "spread",
            SelectionRule::OtmSide => "otm",
            SelectionRule::PrecomputedIv => "iv",
        })
    }
}

/// A built smile plus how many strikes were dropped for unusable mids.
#[derive(Debug, Clone, PartialEq)]
pub struct SmileBuild {
    pub smile: Smile,
    pub n_dropped: usize,
}

#[derive(Debug, Deserialize)]
struct RawQuote {
    timestamp: String,
    expiry: String,
    strike: f64,
    kind: String,
    bid: f64,
    ask: f64,
    forward: f64,
    tau: f64,
    #[serde(default)]
    iv: Option<f64>,
}

const REQUIRED_COLUMNS: [&str; 8] = [
    "timestamp", "expiry", "strike", "kind", "bid", "ask", "forward", "tau",
];

/// Parses a chain CSV. Header problems (unreadable, missing required
/// columns) fail the whole parse; individual bad rows are reported in
/// [`ChainParse::errors`] and skipped.
pub fn parse_chain_csv<R: Read>(reader: R) -> Result<ChainParse> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    for required in REQUIRED_COLUMNS {
        if !headers.iter().any(|h| h == required) {
            return Err(VolfitError::invalid(format!(
                "chain csv header is missing the {required:?} column"
            )));
        }
    }

    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (i, row) in csv_reader.deserialize::<RawQuote>().enumerate() {
        let row_index = i + 1;
        match row {
            Ok(raw) => match validate_quote(raw) {
                Ok(record) => records.push(record),
                Err(e) => errors.push(RowError {
                    row: row_index,
                    message: e.to_string(),
                }),
            },
            Err(e) => errors.push(RowError {
                row: row_index,
                message: e.to_string(),
            }),
        }
    }
    Ok(ChainParse { records, errors })
}

/// Parses a chain CSV from a file path.
pub fn parse_chain_file(path: &Path) -> Result<ChainParse> {
    parse_chain_csv(std::fs::File::open(path)?)
}

fn validate_quote(raw: RawQuote) -> Result<ChainRecord> {
    let kind: OptionKind = raw.kind.parse()?;
    if !(raw.strike.is_finite() && raw.strike > 0.0) {
        return Err(VolfitError::invalid(format!(
            "strike must be finite and positive, got {}",
            raw.strike
        )));
    }
    ForwardContext::new(raw.forward, raw.tau)?;
    if !(raw.bid.is_finite() && raw.bid >= 0.0) {
        return Err(VolfitError::invalid(format!(
            "bid must be finite and non-negative, got {}",
            raw.bid
        )));
    }
    if !(raw.ask.is_finite() && raw.ask >= raw.bid) {
        return Err(VolfitError::invalid(format!(
            "ask must be finite and at least the bid, got bid {} ask {}",
            raw.bid, raw.ask
        )));
    }
    if let Some(iv) = raw.iv {
        if !(iv.is_finite() && iv > 0.0) {
            return Err(VolfitError::invalid(format!(
                "precomputed iv must be finite and positive, got {iv}"
            )));
        }
    }
    Ok(ChainRecord {
        timestamp: raw.timestamp,
        expiry: raw.expiry,
        strike: raw.strike,
        kind,
        bid: raw.bid,
        ask: raw.ask,
        forward: raw.forward,
        tau: raw.tau,
        iv: raw.iv,
    })
}

/// Builds a calibration smile from the records of one chain snapshot.
///
/// All records must share the same timestamp, expiry, forward, and tau; at
/// most one call and one put may be quoted per strike. Strikes whose
/// selected quote cannot produce a positive implied vol (mid outside the
/// arbitrage bounds, or zero time value) are dropped and counted in
/// [`SmileBuild::n_dropped`]. At least [`MIN_SMILE_POINTS`] usable strikes
/// must survive.
pub fn build_smile(records: &[ChainRecord], rule: SelectionRule) -> Result<SmileBuild> {
    let first = records.first().ok_or_else(|| {
        VolfitError::invalid("cannot build a smile from an empty chain".to_string())
    })?;
    for r in records {
        if r.timestamp != first.timestamp
            || r.expiry != first.expiry
            || r.forward != first.forward
            || r.tau != first.tau
        {
            return Err(VolfitError::invalid(format!(
                "chain mixes snapshots: ({}, {}, {}, {}) vs ({}, {}, {}, {})",
                r.timestamp,
                r.expiry,
                r.forward,
                r.tau,
                first.timestamp,
                first.expiry,
                first.forward,
                first.tau
            )));
        }
    }
    let ctx = ForwardContext::new(first.forward, first.tau)?;

    // Group call/put quotes per strike; strikes come in quoted order.
    let mut sorted: Vec<&ChainRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.strike.partial_cmp(&b.strike).unwrap());
    let mut groups: Vec<(f64, Option<&ChainRecord>, Option<&ChainRecord>)> = Vec::new();
    for record in sorted {
        if groups.last().map(|g| g.0) != Some(record.strike) {
            groups.push((record.strike, None, None));
        }
        let group = groups.last_mut().unwrap();
        let slot = match record.kind {
            OptionKind::Call => &mut group.1,
            OptionKind::Put => &mut group.2,
        };
        if slot.is_some() {
            return Err(VolfitError::invalid(format!(
                "duplicate {} quote at strike {}",
                record.kind, record.strike
            )));
        }
        *slot = Some(record);
    }

    let mut points = Vec::with_capacity(groups.len());
    let mut n_dropped = 0usize;
    for (strike, call, put) in groups {
        let selected = select_quote(strike, call, put, ctx.forward, rule)?;
        let iv_value = match selected.iv {
            Some(iv) => Ok(iv),
            None => implied_vol(&ctx, strike, selected.mid(), selected.kind),
        };
        match iv_value {
            Ok(iv) if iv > 0.0 => points.push(SmilePoint {
                strike,
                iv,
                weight: strike_weight(ctx.forward, strike),
            }),
            // Mid outside the arbitrage bounds, unreachable under any
            // positive vol, or carrying no time value: unusable quote.
            Ok(_) | Err(VolfitError::NoSolution { .. }) => n_dropped += 1,
            Err(e) => return Err(e),
        }
    }
    if points.len() < MIN_SMILE_POINTS {
        return Err(VolfitError::invalid(format!(
            "only {} usable strikes after dropping {n_dropped}; need at least {MIN_SMILE_POINTS}",
            points.len()
        )));
    }
    let smile = Smile::new(ctx, points)?;
    Ok(SmileBuild { smile, n_dropped })
}

fn select_quote<'a>(
    strike: f64,
    call: Option<&'a ChainRecord>,
    put: Option<&'a ChainRecord>,
    forward: f64,
    rule: SelectionRule,
) -> Result<&'a ChainRecord> {
    let otm_first = |c: Option<&'a ChainRecord>, p: Option<&'a ChainRecord>| {
        if strike < forward {
            p.or(c)
        } else {
            c.or(p)
        }
    };
    match rule {
        SelectionRule::SpreadBased => match (call, put) {
            (Some(c), Some(p)) => {
                if c.spread() < p.spread() {
                    Ok(c)
                } else if p.spread() < c.spread() {
                    Ok(p)
                } else {
                    Ok(otm_first(call, put).unwrap())
                }
            }
            (only_call, only_put) => otm_first(only_call, only_put).ok_or_else(|| {
                VolfitError::invalid(format!("no quote at strike {strike}"))
            }),
        },
        SelectionRule::OtmSide => otm_first(call, put)
            .ok_or_else(|| VolfitError::invalid(format!("no quote at strike {strike}"))),
        SelectionRule::PrecomputedIv => {
            let has_iv = |r: &&ChainRecord| r.iv.is_some();
            match (call.filter(has_iv), put.filter(has_iv)) {
                (Some(c), None) => Ok(c),
                (None, Some(p)) => Ok(p),
                (Some(_), Some(_)) => Err(VolfitError::invalid(format!(
                    "both sides carry a precomputed iv at strike {strike}"
                ))),
                (None, None) => Err(VolfitError::invalid(format!(
                    "no precomputed iv at strike {strike}"
                ))),
            }
        }
    }
}
