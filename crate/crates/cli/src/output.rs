//! CSV rows and number formatting.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use channel_lab::{SimResult, ValidatedConfig};

pub const HEADER: [&str; 16] = [
    "protocol",
    "n",
    "k",
    "rho",
    "p",
    "b",
    "seed",
    "rounds",
    "max_max",
    "avg_max",
    "max_avg",
    "avg_avg",
    "avg_access",
    "collisions",
    "injected",
    "delivered",
];

/// One finished run.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub protocol: String,
    pub n: usize,
    /// Restrain limit, `unbounded` for the unrestrained protocols.
    pub k: String,
    pub rho: f64,
    pub p: f64,
    pub b: u64,
    pub seed: u64,
    pub rounds: u64,
    pub max_max: f64,
    pub avg_max: f64,
    pub max_avg: f64,
    pub avg_avg: f64,
    pub avg_access: f64,
    pub collisions: u64,
    pub injected: u64,
    pub delivered: u64,
    /// Total queued at the end; not written, only used for the conservation check.
    pub queued: u64,
}

impl CsvRow {
    pub fn new(cfg: &ValidatedConfig, result: &SimResult) -> Self {
        let raw = cfg.raw();
        let s = &result.summary;
        CsvRow {
            protocol: cfg.protocol().label(),
            n: cfg.n(),
            k: cfg.restrain().to_string(),
            rho: raw.rho,
            p: raw.burst_p,
            b: raw.stock_b,
            seed: cfg.seed(),
            rounds: s.rounds,
            max_max: s.max_max,
            avg_max: s.avg_max,
            max_avg: s.max_avg,
            avg_avg: s.avg_avg,
            avg_access: s.avg_access,
            collisions: s.collisions,
            injected: result.counters.injected,
            delivered: result.counters.delivered,
            queued: result.final_queues.iter().sum(),
        }
    }

    fn fields(&self) -> [String; 16] {
        [
            self.protocol.clone(),
            self.n.to_string(),
            self.k.clone(),
            format_g(self.rho),
            format_g(self.p),
            self.b.to_string(),
            self.seed.to_string(),
            self.rounds.to_string(),
            format_g(self.max_max),
            format_g(self.avg_max),
            format_g(self.max_avg),
            format_g(self.avg_avg),
            format_g(self.avg_access),
            self.collisions.to_string(),
            self.injected.to_string(),
            self.delivered.to_string(),
        ]
    }
}

/// `printf("%g")`: six significant digits, trailing zeros dropped,
/// scientific notation outside `[1e-4, 1e6)`.
pub fn format_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (5 - exp) as usize, x)).to_owned()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("row {row}: injected {injected} != delivered {delivered} + queued {queued}")]
    Conservation { row: usize, injected: u64, delivered: u64, queued: u64 },
}

/// Writes the header and `rows` with LF line endings.
pub fn write_csv<W: Write>(rows: &[CsvRow], out: W) -> Result<(), CsvError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(HEADER)?;
    for (i, row) in rows.iter().enumerate() {
        if row.injected != row.delivered + row.queued {
            return Err(CsvError::Conservation {
                row: i + 1,
                injected: row.injected,
                delivered: row.delivered,
                queued: row.queued,
            });
        }
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(rows: &[CsvRow], path: &Path) -> Result<(), CsvError> {
    write_csv(rows, BufWriter::new(File::create(path)?))
}

pub fn csv_string(rows: &[CsvRow]) -> Result<String, CsvError> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("ascii output"))
}
