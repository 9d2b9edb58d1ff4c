//! Dürr-Høyer minimum search over an unordered table of distinct integers.
//!
//! The search runs as a stage machine under a global step budget. A step is
//! either one Hadamard while preparing the index register, or one
//! oracle-plus-diffusion round. Measurements and classical updates are free.

use std::collections::HashSet;
use std::sync::Arc;

use rand::Rng;

use crate::amplify::{apply_diffusion, apply_oracle, AncillaBody, Oracle};
use crate::error::{Error, Result};
use crate::sim::Machine;

/// Growth factor of the exponential Grover schedule.
const SCHEDULE_GROWTH: f64 = 8.0 / 7.0;

/// Number of qubits needed to index `n` entries.
pub fn ceil_log2(n: u64) -> usize {
    if n <= 1 {
        0
    } else {
        (64 - (n - 1).leading_zeros()) as usize
    }
}

/// Bits needed to hold `v` (at least one).
pub fn bit_width(v: u64) -> usize {
    (64 - v.leading_zeros()).max(1) as usize
}

/// `⌈22.5·√N + 1.4·(log₂N)²⌉`.
pub fn runtime_budget(n: u64) -> u64 {
    let n = n as f64;
    (22.5 * n.sqrt() + 1.4 * n.log2().powi(2)).ceil() as u64
}

/// Diagonal oracle marking valid indices `x` with `table[x] ≤ solution`.
pub fn minima_oracle(solution: u64, table: &[u64]) -> Oracle {
    let arity = ceil_log2(table.len() as u64);
    let table: Arc<[u64]> = table.into();
    Oracle::new(arity, move |x| {
        table.get(x as usize).is_some_and(|&v| v <= solution)
    })
}

/// Same marks as [`minima_oracle`], realized by loading `table[x]` into an
/// ancilla (bit 0 flags a valid index, the rest hold the value), comparing,
/// and uncomputing the load.
pub fn minima_oracle_ancilla(solution: u64, table: &[u64]) -> Oracle {
    let width = 1 + table.iter().copied().map(bit_width).max().unwrap_or(1);
    let shared: Arc<[u64]> = table.into();
    let body: AncillaBody = Arc::new(move |scope, index| {
        let anc = scope.ancilla().clone();
        let table = shared.clone();
        scope.xor_apply(index, &anc, |x| match table.get(x as usize) {
            Some(&v) => (v << 1) | 1,
            None => 0,
        })?;
        scope.phase_flip_if(&anc, |w| w & 1 == 1 && (w >> 1) <= solution)
    });
    minima_oracle(solution, table).with_ancilla_body(width, body)
}

/// How the search realizes its oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OracleStyle {
    #[default]
    Diagonal,
    Ancilla,
}

impl OracleStyle {
    fn build(self, solution: u64, table: &[u64]) -> Oracle {
        match self {
            OracleStyle::Diagonal => minima_oracle(solution, table),
            OracleStyle::Ancilla => minima_oracle_ancilla(solution, table),
        }
    }
}

/// Qubits a machine needs to run [`durr_hoyer_with`] on `table`.
pub fn required_qubits(table: &[u64], style: OracleStyle) -> usize {
    let index = ceil_log2(table.len() as u64);
    match style {
        OracleStyle::Diagonal => index,
        OracleStyle::Ancilla => {
            index + 1 + table.iter().copied().map(bit_width).max().unwrap_or(1)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimaOutcome {
    pub value: u64,
    pub index: usize,
    /// Steps consumed (`rt`).
    pub steps: u64,
    pub budget: u64,
    /// Oracle applications.
    pub queries: u64,
    /// Completed measure-and-update rounds.
    pub rounds: u64,
    /// Every value held as the current solution, starting with the random pick.
    pub history: Vec<u64>,
}

fn validate(table: &[u64]) -> Result<()> {
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    let mut seen = HashSet::with_capacity(table.len());
    for &v in table {
        if !seen.insert(v) {
            return Err(Error::DuplicateEntries(v));
        }
    }
    Ok(())
}

/// Minimum of `table` using a diagonal oracle.
pub fn durr_hoyer(m: &mut Machine, table: &[u64]) -> Result<u64> {
    durr_hoyer_with(m, table, OracleStyle::Diagonal).map(|o| o.value)
}

/// Runs the staged search and reports the value, its index and step accounting.
pub fn durr_hoyer_with(m: &mut Machine, table: &[u64], style: OracleStyle) -> Result<MinimaOutcome> {
    validate(table)?;
    let len = table.len() as u64;
    let budget = runtime_budget(len);
    let start_queries = m.queries();

    let mut index = m.random_index(table.len());
    let mut solution = table[index];
    let mut history = vec![solution];
    let n = ceil_log2(len);
    if n == 0 {
        return Ok(MinimaOutcome {
            value: solution,
            index,
            steps: 0,
            budget,
            queries: 0,
            rounds: 0,
            history,
        });
    }

    let max_schedule = (len as f64).sqrt();
    let mut schedule = 1.0f64;
    let mut oracle = style.build(solution, table);
    let mut iterations = m.rng().random_range(1..=schedule.ceil() as u64);
    let mut q = m.allocate(n)?;
    let mut stage = 0u64;
    let mut rt = 0u64;
    let mut rounds = 0u64;
    let n = n as u64;

    loop {
        if stage < n {
            if rt >= budget {
                break;
            }
            m.h(q.qubit(stage as usize))?;
            stage += 1;
            rt += 1;
        } else if stage < n + iterations {
            if rt >= budget {
                break;
            }
            apply_oracle(m, &oracle, &q)?;
            apply_diffusion(m, &q)?;
            stage += 1;
            rt += 1;
        } else {
            let y = m.measure(q)? as usize;
            rounds += 1;
            match table.get(y) {
                Some(&v) if v < solution => {
                    solution = v;
                    index = y;
                    history.push(v);
                    oracle = style.build(solution, table);
                    schedule = 1.0;
                }
                _ => schedule = (schedule * SCHEDULE_GROWTH).min(max_schedule),
            }
            iterations = m.rng().random_range(1..=schedule.ceil() as u64);
            q = m.allocate(n as usize)?;
            stage = 0;
        }
    }

    let y = m.measure(q)? as usize;
    if let Some(&v) = table.get(y) {
        if v < solution {
            solution = v;
            index = y;
            history.push(v);
        }
    }
    Ok(MinimaOutcome {
        value: solution,
        index,
        steps: rt,
        budget,
        queries: m.queries() - start_queries,
        rounds,
        history,
    })
}
