//! Uniform superposition over the first `M` basis states,
//! `(1/√M) Σ_{j<M} |j⟩`, on `⌈log₂M⌉` qubits.
//!
//! Powers of two are a plain Hadamard layer. Otherwise write
//! `M = 2^{l_0} + 2^{l_1} + … + 2^{l_{k-1}}` with `l_0 < l_1 < …`. The
//! construction starts from the encoding of `M` without its lowest bit,
//! spreads the lowest block with Hadamards, and then peels off one binary
//! block per set bit: a Y rotation splits the remaining amplitude between the
//! block of size `2^{l_j}` and everything below it, and a Hadamard layer
//! conditioned on the rotated qubit being `|0⟩` spreads the lower part.

use crate::error::{Error, Result};
use crate::minima::ceil_log2;
use crate::sim::{Gate, Machine, Qubit, Register};
use crate::uncompute::{dup, forget_conditional, Expected};

/// Binary decomposition of `M` driving the preparation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperpositionPlan {
    pub m: u64,
    /// Qubit count `⌈log₂M⌉`.
    pub n: usize,
    /// Bits of `M`, least significant first.
    pub bits: Vec<bool>,
    /// Positions of set bits, most significant first.
    pub locs: Vec<usize>,
}

impl SuperpositionPlan {
    pub fn k(&self) -> usize {
        self.locs.len()
    }

    pub fn is_power_of_two(&self) -> bool {
        self.locs.len() == 1
    }
}

pub fn plan_for(m: u64) -> Result<SuperpositionPlan> {
    if m < 2 {
        return Err(Error::InvalidM(m));
    }
    let width = 64 - m.leading_zeros() as usize;
    let bits: Vec<bool> = (0..width).map(|i| (m >> i) & 1 == 1).collect();
    let locs = (0..width).rev().filter(|&i| bits[i]).collect();
    Ok(SuperpositionPlan {
        m,
        n: ceil_log2(m),
        bits,
        locs,
    })
}

/// Applies `gate` to `target` when `control` is `|0⟩`.
trait AntiControl {
    fn when_zero(&mut self, m: &mut Machine, control: Qubit, gate: Gate, targets: &[Qubit])
        -> Result<()>;
}

/// Conditions directly on the qubit.
struct Direct;

impl AntiControl for Direct {
    fn when_zero(
        &mut self,
        m: &mut Machine,
        control: Qubit,
        gate: Gate,
        targets: &[Qubit],
    ) -> Result<()> {
        for &t in targets {
            m.apply_controlled(&[control], 0, gate, t)?;
        }
        Ok(())
    }
}

/// Conditions on a `dup` of the qubit, then forgets the copy against the original.
struct ViaCopy;

impl AntiControl for ViaCopy {
    fn when_zero(
        &mut self,
        m: &mut Machine,
        control: Qubit,
        gate: Gate,
        targets: &[Qubit],
    ) -> Result<()> {
        let original = Register::from(control);
        let copy = dup(m, &original)?;
        for &t in targets {
            m.apply_controlled(copy.qubits(), 0, gate, t)?;
        }
        forget_conditional(m, copy, Expected::Register(&original))
    }
}

fn prepare(m: &mut Machine, count: u64, ctl: &mut impl AntiControl) -> Result<Register> {
    let plan = plan_for(count)?;
    let q = m.allocate(plan.n)?;
    if plan.is_power_of_two() {
        for &qb in q.qubits() {
            m.h(qb)?;
        }
        return Ok(q);
    }

    let locs = &plan.locs;
    let k = locs.len();
    let total = count as f64;
    let block = |lo: usize, hi: usize| -> Vec<Qubit> { (lo..hi).map(|i| q.qubit(i)).collect() };

    for &l in &locs[..k - 1] {
        m.x(q.qubit(l))?;
    }
    for qb in block(0, locs[k - 1]) {
        m.h(qb)?;
    }

    let mut covered = (1u64 << locs[k - 1]) as f64;
    let theta = -2.0 * (covered / total).sqrt().acos();
    m.rot_y(q.qubit(locs[k - 2]), theta)?;
    ctl.when_zero(m, q.qubit(locs[k - 2]), Gate::H, &block(locs[k - 1], locs[k - 2]))?;

    for j in (1..k - 1).rev() {
        let size = (1u64 << locs[j]) as f64;
        let theta = -2.0 * (size / (total - covered)).sqrt().acos();
        ctl.when_zero(m, q.qubit(locs[j]), Gate::RotY(theta), &[q.qubit(locs[j - 1])])?;
        ctl.when_zero(m, q.qubit(locs[j - 1]), Gate::H, &block(locs[j], locs[j - 1]))?;
        covered += size;
    }
    Ok(q)
}

/// Prepares `(1/√M) Σ_{j<M} |j⟩` on a fresh `⌈log₂M⌉`-qubit register.
pub fn prepare_uniform_m(m: &mut Machine, count: u64) -> Result<Register> {
    prepare(m, count, &mut Direct)
}

/// Same state as [`prepare_uniform_m`], with every conditional driven by a
/// duplicated control that is forgotten right after use. Needs one spare qubit.
pub fn prepare_uniform_m_with_forget(m: &mut Machine, count: u64) -> Result<Register> {
    prepare(m, count, &mut ViaCopy)
}

/// Exact target amplitudes (real) for `count` on `n` qubits.
pub fn target_amplitudes(count: u64) -> Vec<f64> {
    let n = ceil_log2(count);
    let a = 1.0 / (count as f64).sqrt();
    (0..1u64 << n).map(|j| if j < count { a } else { 0.0 }).collect()
}
