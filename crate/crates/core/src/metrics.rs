//! Queue measurements and stability sweeps.
//!
//! For a run of `r` rounds with queues `q_i(t)` after round `t`:
//! max-max is `max_t max_i q_i(t)`, avg-max is `(1/r) Σ_t max_i q_i(t)`,
//! max-avg is `max_t mean_i q_i(t)` and avg-avg is `(1/r) Σ_t mean_i q_i(t)`.
//! Sums are kept as integers so the values are exact up to the final division.

use rayon::prelude::*;

use crate::config::{validate_config, ConfigError, ProtocolConfig, SimConfig, ValidatedConfig};
use crate::engine::{run_simulation, SimError, SimResult};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricsAccumulator {
    n: usize,
    rounds: u64,
    max_max: u64,
    sum_max: u128,
    max_total: u64,
    sum_total: u128,
    sum_on_mode: u64,
    collisions: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Summary {
    pub rounds: u64,
    pub max_max: f64,
    pub avg_max: f64,
    pub max_avg: f64,
    pub avg_avg: f64,
    /// Mean number of switched-on stations per round.
    pub avg_access: f64,
    pub collisions: u64,
}

impl MetricsAccumulator {
    pub fn new(n: usize) -> Self {
        MetricsAccumulator {
            n,
            rounds: 0,
            max_max: 0,
            sum_max: 0,
            max_total: 0,
            sum_total: 0,
            sum_on_mode: 0,
            collisions: 0,
        }
    }

    pub fn update(&mut self, queues: &[u64], on_mode: usize, collision: bool) {
        debug_assert_eq!(queues.len(), self.n);
        let max = queues.iter().copied().max().unwrap_or(0);
        let total: u64 = queues.iter().sum();
        self.rounds += 1;
        self.max_max = self.max_max.max(max);
        self.sum_max += max as u128;
        self.max_total = self.max_total.max(total);
        self.sum_total += total as u128;
        self.sum_on_mode += on_mode as u64;
        self.collisions += collision as u64;
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn max_max(&self) -> f64 {
        self.max_max as f64
    }

    pub fn avg_max(&self) -> f64 {
        if self.rounds == 0 {
            0.0
        } else {
            self.sum_max as f64 / self.rounds as f64
        }
    }

    pub fn max_avg(&self) -> f64 {
        self.max_total as f64 / self.n as f64
    }

    pub fn avg_avg(&self) -> f64 {
        if self.rounds == 0 {
            0.0
        } else {
            self.sum_total as f64 / (self.rounds as f64 * self.n as f64)
        }
    }

    pub fn summary(&self) -> Summary {
        Summary {
            rounds: self.rounds,
            max_max: self.max_max(),
            avg_max: self.avg_max(),
            max_avg: self.max_avg(),
            avg_avg: self.avg_avg(),
            avg_access: if self.rounds == 0 { 0.0 } else { self.sum_on_mode as f64 / self.rounds as f64 },
            collisions: self.collisions,
        }
    }
}

/// Grid of runs: every protocol × n × rho × seed, sharing the rest of `base`.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub base: SimConfig,
    pub protocols: Vec<ProtocolConfig>,
    pub n_values: Vec<usize>,
    pub rho_grid: Vec<f64>,
    pub seeds: Vec<u64>,
    pub delta: f64,
}

#[derive(Clone, Debug)]
pub struct SweepCell {
    pub config: ValidatedConfig,
    pub result: SimResult,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityEntry {
    pub protocol: String,
    pub n: usize,
    /// First grid value whose mean final avg-max exceeds delta.
    pub boundary: Option<f64>,
    /// A lower rho exceeded delta while a higher one did not.
    pub non_monotone: bool,
    /// `(rho, mean final avg-max)` along the grid.
    pub means: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityTable {
    pub delta: f64,
    pub entries: Vec<StabilityEntry>,
}

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("sweep cell {cell}: {source}")]
    Config { cell: String, source: ConfigError },
    #[error("sweep cell {cell}: {source}")]
    Simulation { cell: String, source: SimError },
    #[error("rho grid must be sorted ascending")]
    UnsortedGrid,
    #[error("thread pool: {0}")]
    Pool(String),
}

impl SweepSpec {
    /// Validated configs in output order: protocol, n, rho, seed.
    pub fn cells(&self) -> Result<Vec<ValidatedConfig>, SweepError> {
        if self.rho_grid.windows(2).any(|w| w[0] > w[1]) {
            return Err(SweepError::UnsortedGrid);
        }
        let protocols = if self.protocols.is_empty() { vec![self.base.protocol.clone()] } else { self.protocols.clone() };
        let mut out = Vec::new();
        for p in &protocols {
            for &n in &self.n_values {
                for &rho in &self.rho_grid {
                    for &seed in &self.seeds {
                        let mut raw = self.base.clone();
                        raw.protocol = p.clone();
                        raw.n = n;
                        raw.rho = rho;
                        raw.seed = Some(seed);
                        if raw.initial_queues.as_ref().is_some_and(|q| q.len() != n) {
                            // Broadcast a uniform initial load to every n.
                            let q = raw.initial_queues.as_ref().unwrap();
                            if q.windows(2).all(|w| w[0] == w[1]) && !q.is_empty() {
                                raw.initial_queues = Some(vec![q[0]; n]);
                            }
                        }
                        let cell = format!("{} n={n} rho={rho} seed={seed}", p.label());
                        out.push(validate_config(&raw).map_err(|source| SweepError::Config { cell, source })?);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Runs every cell on `jobs` worker threads; results keep cell order.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<(Vec<SweepCell>, StabilityTable), SweepError> {
    let cells = spec.cells()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    let results: Result<Vec<SweepCell>, SweepError> = pool.install(|| {
        cells
            .into_par_iter()
            .map(|config| {
                run_simulation(&config)
                    .map(|result| SweepCell { config: config.clone(), result })
                    .map_err(|source| SweepError::Simulation { cell: config.to_string(), source })
            })
            .collect()
    });
    let results = results?;
    let table = stability_table(&results, spec.delta);
    Ok((results, table))
}

/// Mean final avg-max per (protocol, n, rho) and the first rho above
/// `delta`. Cells must be grouped as produced by [`SweepSpec::cells`].
pub fn stability_table(cells: &[SweepCell], delta: f64) -> StabilityTable {
    let mut entries: Vec<StabilityEntry> = Vec::new();
    let mut sums: Vec<(f64, f64, usize)> = Vec::new();
    let flush = |key: Option<(String, usize)>, sums: &mut Vec<(f64, f64, usize)>, entries: &mut Vec<StabilityEntry>| {
        if let Some((protocol, n)) = key {
            let means: Vec<(f64, f64)> = sums.iter().map(|&(rho, s, c)| (rho, s / c as f64)).collect();
            let boundary = means.iter().find(|&&(_, m)| m > delta).map(|&(rho, _)| rho);
            let non_monotone = match boundary {
                Some(b) => means.iter().any(|&(rho, m)| rho > b && m <= delta),
                None => false,
            };
            entries.push(StabilityEntry { protocol, n, boundary, non_monotone, means });
        }
        sums.clear();
    };
    let mut key: Option<(String, usize)> = None;
    for cell in cells {
        let k = (cell.config.protocol().label(), cell.config.n());
        if key.as_ref() != Some(&k) {
            flush(key.take(), &mut sums, &mut entries);
            key = Some(k);
        }
        let rho = cell.config.raw().rho;
        let v = cell.result.summary.avg_max;
        match sums.last_mut() {
            Some(last) if last.0 == rho => {
                last.1 += v;
                last.2 += 1;
            }
            _ => sums.push((rho, v, 1)),
        }
    }
    flush(key, &mut sums, &mut entries);
    StabilityTable { delta, entries }
}

/// Convenience wrapper: one protocol, a range of `n`, a rho grid and `reps`
/// consecutive seeds starting at the base seed.
pub fn stability_sweep(
    base: &SimConfig,
    n_values: &[usize],
    rho_grid: &[f64],
    reps: u64,
    delta: f64,
    jobs: usize,
) -> Result<StabilityTable, SweepError> {
    let first = base.seed.unwrap_or(0);
    let spec = SweepSpec {
        base: base.clone(),
        protocols: vec![],
        n_values: n_values.to_vec(),
        rho_grid: rho_grid.to_vec(),
        seeds: (first..first + reps).collect(),
        delta,
    };
    run_sweep(&spec, jobs).map(|(_, t)| t)
}
