//! Collision detection: a small classical sample of the table, then a Grover
//! search over table indices for an element that collides with the sample.

use std::fmt;
use std::sync::Arc;

use crate::amplify::{grover, AncillaBody, Oracle};
use crate::error::{Error, Result};
use crate::minima::{bit_width, ceil_log2};
use crate::sim::Machine;

/// Largest register the quantum integer sampler will allocate.
pub const MAX_RANDOM_BITS: usize = 30;

/// Classical function whose collisions are sought.
#[derive(Clone)]
pub struct CollisionFn(Arc<dyn Fn(u64) -> u64 + Send + Sync>);

impl CollisionFn {
    pub fn new(f: impl Fn(u64) -> u64 + Send + Sync + 'static) -> Self {
        CollisionFn(Arc::new(f))
    }

    /// `x mod modulus`. Panics on a zero modulus.
    pub fn modulo(modulus: u64) -> Self {
        assert!(modulus > 0, "modulus must be positive");
        CollisionFn::new(move |x| x % modulus)
    }

    pub fn eval(&self, x: u64) -> u64 {
        (self.0)(x)
    }
}

impl fmt::Debug for CollisionFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CollisionFn")
    }
}

/// A table, the function `F` over its values, and the claimed `r`-to-one
/// structure (`r < 2` means `F` is arbitrary).
#[derive(Debug, Clone)]
pub struct CollisionInstance {
    pub table: Vec<u64>,
    pub f: CollisionFn,
    pub r: u64,
}

/// Sampled inputs and their images under `F`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SubsetTables {
    pub inputs: Vec<u64>,
    pub outputs: Vec<u64>,
}

impl SubsetTables {
    pub fn k(&self) -> usize {
        self.inputs.len()
    }
}

/// Uniform integer in `0..bound`: Hadamard a `⌈log₂ bound⌉`-qubit register,
/// measure, and retry outcomes at or above `bound`.
pub fn random_int(m: &mut Machine, bound: u64) -> Result<u64> {
    if bound == 0 {
        return Err(Error::ZeroBound);
    }
    let bits = ceil_log2(bound);
    if bits > MAX_RANDOM_BITS {
        return Err(Error::BoundTooLarge(bound));
    }
    if bits == 0 {
        return Ok(0);
    }
    loop {
        let r = m.allocate(bits)?;
        for &q in r.qubits() {
            m.h(q)?;
        }
        let v = m.measure(r)?;
        if v < bound {
            return Ok(v);
        }
    }
}

/// Smallest `k` with `k³·r ≥ n`, i.e. `⌈∛(n/r)⌉` in exact integer arithmetic.
fn ceil_cbrt_ratio(n: u64, r: u64) -> u64 {
    let mut k = 1u64;
    while k.saturating_mul(k).saturating_mul(k).saturating_mul(r) < n {
        k += 1;
    }
    k
}

/// Sample size: `⌈∛(N/r)⌉` for `r ≥ 2`, otherwise a random draw from `1..=N`;
/// clamped to `2..=N` in both cases.
pub fn subset_cardinality(n: usize, r: u64, m: &mut Machine) -> Result<usize> {
    if n < 2 {
        return Err(Error::InvalidCardinality { k: 0, n });
    }
    let k = if r >= 2 {
        ceil_cbrt_ratio(n as u64, r) as usize
    } else {
        1 + random_int(m, n as u64)? as usize
    };
    Ok(k.clamp(2, n))
}

/// `k` table values from distinct positions, drawn with [`random_int`].
pub fn generate_subset(m: &mut Machine, table: &[u64], k: usize) -> Result<Vec<u64>> {
    let n = table.len();
    if k < 2 || k > n {
        return Err(Error::InvalidCardinality { k, n });
    }
    let mut positions: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + random_int(m, (n - i) as u64)? as usize;
        positions.swap(i, j);
    }
    Ok(positions[..k].iter().map(|&p| table[p]).collect())
}

pub fn generate_lists(subset: &[u64], f: &CollisionFn) -> SubsetTables {
    SubsetTables {
        inputs: subset.to_vec(),
        outputs: subset.iter().map(|&x| f.eval(x)).collect(),
    }
}

/// First pair `i < j` with equal outputs and different inputs.
pub fn check_doubles(tables: &SubsetTables) -> Option<(u64, u64)> {
    let k = tables.k();
    for i in 0..k {
        for j in i + 1..k {
            if tables.outputs[i] == tables.outputs[j] && tables.inputs[i] != tables.inputs[j] {
                return Some((tables.inputs[i], tables.inputs[j]));
            }
        }
    }
    None
}

fn collides_with_sample(tables: &SubsetTables, value: u64, image: u64) -> bool {
    tables
        .inputs
        .iter()
        .zip(&tables.outputs)
        .any(|(&input, &output)| output == image && input != value)
}

struct OracleLayout {
    value_bits: usize,
    output_bits: usize,
}

impl OracleLayout {
    fn new(table: &[u64], f: &CollisionFn) -> Self {
        OracleLayout {
            value_bits: table.iter().copied().map(bit_width).max().unwrap_or(1),
            output_bits: table
                .iter()
                .map(|&v| bit_width(f.eval(v)))
                .max()
                .unwrap_or(1),
        }
    }

    fn width(&self) -> usize {
        1 + self.value_bits + self.output_bits
    }
}

/// Oracle over table indices marking `x < N` where some sampled input other
/// than `T[x]` has the same image as `T[x]`.
///
/// The phase is computed through an ancilla laid out as
/// `[valid flag | T[x] | F(T[x])]`: the index loads the flag and value, the
/// value loads its image, the phase is kicked back on the ancilla contents,
/// and both loads are undone.
pub fn collision_oracle(tables: &SubsetTables, table: &[u64], f: &CollisionFn) -> Oracle {
    let arity = ceil_log2(table.len() as u64).max(1);
    let layout = OracleLayout::new(table, f);
    let width = layout.width();
    let (vbits, obits) = (layout.value_bits, layout.output_bits);

    let shared_table: Arc<[u64]> = table.into();
    let shared_tables = Arc::new(tables.clone());

    let predicate = {
        let table = shared_table.clone();
        let tables = shared_tables.clone();
        let f = f.clone();
        move |x: u64| {
            table
                .get(x as usize)
                .is_some_and(|&v| collides_with_sample(&tables, v, f.eval(v)))
        }
    };

    let f = f.clone();
    let body: AncillaBody = Arc::new(move |scope, index| {
        let anc = scope.ancilla().clone();
        let loaded = anc.slice(0..1 + vbits);
        let value = anc.slice(1..1 + vbits);
        let image = anc.slice(1 + vbits..width);
        let table = shared_table.clone();
        scope.xor_apply(index, &loaded, |x| match table.get(x as usize) {
            Some(&v) => (v << 1) | 1,
            None => 0,
        })?;
        let out_mask = if obits >= 64 { u64::MAX } else { (1u64 << obits) - 1 };
        scope.xor_apply(&value, &image, |v| f.eval(v) & out_mask)?;
        let tables = shared_tables.clone();
        scope.phase_flip_if(&anc, |w| {
            let valid = w & 1 == 1;
            let v = (w >> 1) & ((1u64 << vbits) - 1);
            let image = w >> (1 + vbits);
            valid && collides_with_sample(&tables, v, image)
        })
    });

    Oracle::new(arity, predicate).with_ancilla_body(width, body)
}

/// Qubits a machine needs to run [`find_collision`] on `inst`.
pub fn required_qubits(inst: &CollisionInstance) -> usize {
    let n = inst.table.len() as u64;
    let index = ceil_log2(n).max(1);
    let grover_phase = index + OracleLayout::new(&inst.table, &inst.f).width();
    grover_phase.max(ceil_log2(n))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollisionOutcome {
    pub pair: (u64, u64),
    /// Sample size.
    pub k: usize,
    /// Evaluations of `F` while building the sample lists.
    pub classical_evaluations: usize,
    /// Oracle applications in the Grover phase.
    pub queries: u64,
    /// Mark count handed to Grover, if the Grover phase ran.
    pub marks: Option<u64>,
    /// True when the sample already contained the collision.
    pub early_exit: bool,
}

/// Sample, check the sample, then Grover-search the table for a partner of a
/// sampled element and verify it classically.
pub fn find_collision(m: &mut Machine, inst: &CollisionInstance) -> Result<CollisionOutcome> {
    let table = &inst.table;
    let n = table.len();
    let k = subset_cardinality(n, inst.r, m)?;
    let subset = generate_subset(m, table, k)?;
    let tables = generate_lists(&subset, &inst.f);

    if let Some(pair) = check_doubles(&tables) {
        return Ok(CollisionOutcome {
            pair,
            k,
            classical_evaluations: k,
            queries: 0,
            marks: None,
            early_exit: true,
        });
    }

    let oracle = collision_oracle(&tables, table, &inst.f);
    let space = 1u64 << oracle.arity();
    let t = if inst.r >= 2 {
        (inst.r - 1).saturating_mul(k as u64)
    } else {
        1
    }
    .clamp(1, space);

    let before = m.queries();
    let pending = grover(m, &oracle, t)? as usize;
    let queries = m.queries() - before;

    let &candidate = table.get(pending).ok_or(Error::NoCollisionFound)?;
    let image = inst.f.eval(candidate);
    let partner = tables
        .inputs
        .iter()
        .zip(&tables.outputs)
        .find(|&(&input, &output)| output == image && input != candidate)
        .map(|(&input, _)| input)
        .ok_or(Error::NoCollisionFound)?;

    Ok(CollisionOutcome {
        pair: (candidate, partner),
        k,
        classical_evaluations: k,
        queries,
        marks: Some(t),
        early_exit: false,
    })
}
