#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use safeq::{Complex, Gate, Machine, Qubit, Register};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One gate of a random test circuit.
#[derive(Debug, Clone)]
pub struct Op {
    pub controls: Vec<Qubit>,
    pub polarity: u64,
    pub gate: Gate,
    pub target: Qubit,
}

pub fn random_gate(rng: &mut impl Rng) -> Gate {
    let theta = rng.random_range(-std::f64::consts::TAU..std::f64::consts::TAU);
    match rng.random_range(0..7) {
        0 => Gate::H,
        1 => Gate::X,
        2 => Gate::Y,
        3 => Gate::Z,
        4 => Gate::RotY(theta),
        5 => Gate::RotX(theta),
        _ => Gate::RotZ(theta),
    }
}

/// A random gate on `reg`, controlled by up to two other qubits with random polarity.
pub fn random_op(rng: &mut impl Rng, reg: &Register) -> Op {
    let n = reg.len();
    let t = rng.random_range(0..n);
    let mut controls = Vec::new();
    if n > 1 {
        for _ in 0..rng.random_range(0..=2.min(n - 1)) {
            let c = rng.random_range(0..n);
            if c != t && !controls.contains(&reg.qubit(c)) {
                controls.push(reg.qubit(c));
            }
        }
    }
    let polarity = rng.random_range(0..4u64);
    Op {
        controls,
        polarity,
        gate: random_gate(rng),
        target: reg.qubit(t),
    }
}

pub fn apply_op(m: &mut Machine, op: &Op) {
    m.apply_controlled(&op.controls, op.polarity, op.gate, op.target)
        .unwrap();
}

pub fn undo_op(m: &mut Machine, op: &Op) {
    m.apply_controlled(&op.controls, op.polarity, op.gate.inverse(), op.target)
        .unwrap();
}

/// Drives `reg` into a generic entangled state.
pub fn scramble(m: &mut Machine, reg: &Register, rng: &mut impl Rng, gates: usize) {
    for q in reg.qubits() {
        m.rot_y(*q, rng.random_range(0.2..3.0)).unwrap();
        m.rot_z(*q, rng.random_range(-3.0..3.0)).unwrap();
    }
    for _ in 0..gates {
        let op = random_op(rng, reg);
        apply_op(m, &op);
    }
}

pub fn max_diff(a: &[Complex], b: &[Complex]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Independent determinism check: map every environment configuration to the
/// set of discard-register values it supports.
pub fn undetermined_by_grouping(amps: &[Complex], discard_bits: &[usize]) -> bool {
    let mut groups: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (i, a) in amps.iter().enumerate() {
        if a.norm() <= 1e-12 {
            continue;
        }
        let mut env = i;
        let mut val = 0usize;
        for (k, &b) in discard_bits.iter().enumerate() {
            if (i >> b) & 1 == 1 {
                env &= !(1 << b);
                val |= 1 << k;
            }
        }
        groups.entry(env).or_default().insert(val);
    }
    groups.values().any(|vals| vals.len() > 1)
}

/// Closed-form marked probability after `j` Grover iterations.
pub fn grover_probability(n: u64, t: u64, j: u64) -> f64 {
    let theta = ((t as f64) / (n as f64)).sqrt().asin();
    ((2 * j + 1) as f64 * theta).sin().powi(2)
}

/// Distinct values drawn from `0..4·len`.
pub fn random_distinct_table(rng: &mut impl Rng, len: usize) -> Vec<u64> {
    let mut seen = BTreeSet::new();
    let mut table = Vec::with_capacity(len);
    while table.len() < len {
        let v = rng.random_range(0..4 * len as u64);
        if seen.insert(v) {
            table.push(v);
        }
    }
    table
}

/// Elementwise distance after removing the global phase relative to `target`.
pub fn phase_aligned_error(amps: &[Complex], target: &[f64]) -> f64 {
    let (i, _) = target
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .unwrap();
    let phase = amps[i] / amps[i].norm();
    amps.iter()
        .zip(target)
        .map(|(a, t)| (a / phase - Complex::new(*t, 0.0)).norm())
        .fold(0.0, f64::max)
}

pub fn report(id: &str, pass: bool, detail: impl std::fmt::Display) {
    println!("[{}] {id}: {detail}", if pass { "PASS" } else { "FAIL" });
}
