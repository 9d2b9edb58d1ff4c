//! Dense statevector simulation.
//!
//! A [`Machine`] owns a fixed-size vector of `2^n` amplitudes together with a
//! qubit allocator. Qubits that are not part of a live [`Register`] sit on the
//! free list and are always in `|0⟩`, so allocating never has to touch the
//! amplitudes. Gates are applied in place by walking amplitude pairs that
//! differ only in the target bit.
//!
//! Registers read their qubits least significant first: qubit `i` of a
//! register contributes `bit_i * 2^i` to the register's integer value.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type Complex = Complex64;

/// Largest number of qubits a machine may hold (2^26 amplitudes, 1 GiB).
pub const MAX_QUBITS: usize = 26;

/// Amplitudes below this magnitude are treated as zero by support checks.
pub const ZERO_TOLERANCE: f64 = 1e-12;

const C0: Complex = Complex::new(0.0, 0.0);
const C1: Complex = Complex::new(1.0, 0.0);

/// Single-qubit gates understood by the simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H,
    X,
    Y,
    Z,
    RotX(f64),
    RotY(f64),
    RotZ(f64),
}

/// How a gate acts on computational basis states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    /// Multiplies basis states by phases.
    Diagonal,
    /// Maps basis states to basis states, up to phase.
    Permutation,
    /// Creates or destroys superposition.
    Superposing,
}

impl Gate {
    pub fn matrix(&self) -> [[Complex; 2]; 2] {
        let h = Complex::new(FRAC_1_SQRT_2, 0.0);
        match *self {
            Gate::H => [[h, h], [h, -h]],
            Gate::X => [[C0, C1], [C1, C0]],
            Gate::Y => [[C0, Complex::new(0.0, -1.0)], [Complex::new(0.0, 1.0), C0]],
            Gate::Z => [[C1, C0], [C0, -C1]],
            Gate::RotX(theta) => {
                let (s, c) = (theta / 2.0).sin_cos();
                let c = Complex::new(c, 0.0);
                let s = Complex::new(0.0, -s);
                [[c, s], [s, c]]
            }
            Gate::RotY(theta) => {
                let (s, c) = (theta / 2.0).sin_cos();
                [
                    [Complex::new(c, 0.0), Complex::new(-s, 0.0)],
                    [Complex::new(s, 0.0), Complex::new(c, 0.0)],
                ]
            }
            Gate::RotZ(theta) => [
                [Complex::from_polar(1.0, -theta / 2.0), C0],
                [C0, Complex::from_polar(1.0, theta / 2.0)],
            ],
        }
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::RotX(t) => Gate::RotX(-t),
            Gate::RotY(t) => Gate::RotY(-t),
            Gate::RotZ(t) => Gate::RotZ(-t),
            g => g,
        }
    }

    pub fn kind(&self) -> GateKind {
        let m = self.matrix();
        let off = m[0][1].norm() > ZERO_TOLERANCE || m[1][0].norm() > ZERO_TOLERANCE;
        let diag = m[0][0].norm() > ZERO_TOLERANCE || m[1][1].norm() > ZERO_TOLERANCE;
        match (diag, off) {
            (true, false) => GateKind::Diagonal,
            (false, true) => GateKind::Permutation,
            _ => GateKind::Superposing,
        }
    }

    fn angle(&self) -> Option<f64> {
        match *self {
            Gate::RotX(t) | Gate::RotY(t) | Gate::RotZ(t) => Some(t),
            _ => None,
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::H => write!(f, "H"),
            Gate::X => write!(f, "X"),
            Gate::Y => write!(f, "Y"),
            Gate::Z => write!(f, "Z"),
            Gate::RotX(t) => write!(f, "rotX({t})"),
            Gate::RotY(t) => write!(f, "rotY({t})"),
            Gate::RotZ(t) => write!(f, "rotZ({t})"),
        }
    }
}

/// Handle to one allocated qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Qubit {
    index: usize,
    owner: u64,
}

impl Qubit {
    /// Position of this qubit's bit in the basis index.
    pub fn index(&self) -> usize {
        self.index
    }

    fn mask(&self) -> usize {
        1 << self.index
    }
}

/// An ordered list of qubits read as an unsigned integer, least significant first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Register {
    qubits: Vec<Qubit>,
}

impl Register {
    /// Builds a register from existing qubit handles, e.g. to view parts of
    /// several registers as one integer.
    pub fn from_qubits(qubits: Vec<Qubit>) -> Self {
        Register { qubits }
    }

    pub fn len(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qubits.is_empty()
    }

    pub fn qubit(&self, i: usize) -> Qubit {
        self.qubits[i]
    }

    pub fn qubits(&self) -> &[Qubit] {
        &self.qubits
    }

    /// Qubit positions in the basis index, least significant register bit first.
    pub fn indices(&self) -> Vec<usize> {
        self.qubits.iter().map(|q| q.index).collect()
    }

    /// Sub-register over `range`, keeping bit order.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Register {
        Register {
            qubits: self.qubits[range].to_vec(),
        }
    }

    /// Bit mask of this register's qubits inside a basis index.
    pub fn mask(&self) -> usize {
        self.qubits.iter().fold(0, |m, q| m | q.mask())
    }

    /// The register's integer value within the basis state `basis`.
    pub fn value_in(&self, basis: usize) -> u64 {
        self.qubits
            .iter()
            .enumerate()
            .fold(0u64, |v, (i, q)| v | ((((basis >> q.index) & 1) as u64) << i))
    }

    /// Scatters `value` into the register's bit positions of a basis index.
    pub fn spread(&self, value: u64) -> usize {
        self.qubits
            .iter()
            .enumerate()
            .fold(0usize, |b, (i, q)| b | ((((value >> i) & 1) as usize) << q.index))
    }
}

impl From<Qubit> for Register {
    fn from(q: Qubit) -> Self {
        Register { qubits: vec![q] }
    }
}

/// Normalized vector of `2^n` complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![C0; 1 << n_qubits];
        amps[0] = C1;
        StateVector { n_qubits, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amps
    }

    pub fn amplitude(&self, basis: usize) -> Complex {
        self.amps[basis]
    }

    pub fn probability(&self, basis: usize) -> f64 {
        self.amps[basis].norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Basis indices whose amplitude magnitude exceeds [`ZERO_TOLERANCE`].
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > ZERO_TOLERANCE)
            .map(|(i, _)| i)
    }
}

/// Qubit allocator, statevector owner, seeded RNG and oracle query counter.
#[derive(Debug, Clone)]
pub struct Machine {
    state: StateVector,
    owner: Vec<Option<u64>>,
    next_owner: u64,
    rng: ChaCha8Rng,
    seed: u64,
    queries: u64,
}

impl Machine {
    /// A machine with `n_qubits` free qubits in `|0…0⟩`.
    pub fn new(n_qubits: usize, seed: u64) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::CapacityExceeded {
                requested: n_qubits,
                cap: MAX_QUBITS,
            });
        }
        Ok(Machine {
            state: StateVector::zero(n_qubits),
            owner: vec![None; n_qubits],
            next_owner: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            queries: 0,
        })
    }

    /// A machine whose qubits all belong to one register holding `amps`.
    /// `amps.len()` must be a power of two and the vector must have unit norm.
    pub fn from_amplitudes(amps: Vec<Complex>, seed: u64) -> Result<(Self, Register)> {
        if !amps.len().is_power_of_two() {
            return Err(Error::InvalidState(format!(
                "length {} is not a power of two",
                amps.len()
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("norm² is {norm}")));
        }
        let n = amps.len().trailing_zeros() as usize;
        let mut machine = Machine::new(n, seed)?;
        let scale = norm.sqrt().recip();
        machine.state.amps = amps.into_iter().map(|a| a * scale).collect();
        let reg = if n == 0 {
            Register::from_qubits(Vec::new())
        } else {
            machine.allocate(n)?
        };
        Ok((machine, reg))
    }

    pub fn n_qubits(&self) -> usize {
        self.state.n_qubits
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn free_count(&self) -> usize {
        self.owner.iter().filter(|o| o.is_none()).count()
    }

    /// Indices of qubits on the free list.
    pub fn free_qubits(&self) -> Vec<usize> {
        (0..self.owner.len())
            .filter(|&i| self.owner[i].is_none())
            .collect()
    }

    /// Oracle applications since construction or the last reset.
    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn reset_queries(&mut self) {
        self.queries = 0;
    }

    pub(crate) fn record_query(&mut self) {
        self.queries += 1;
    }

    /// The machine's seeded generator; all classical randomness goes through it.
    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Uniform index in `0..n` from the classical generator.
    pub fn random_index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// Takes `k` qubits off the free list, lowest indices first.
    pub fn allocate(&mut self, k: usize) -> Result<Register> {
        if k == 0 {
            return Err(Error::InvalidArity);
        }
        let free = self.free_qubits();
        if free.len() < k {
            return Err(Error::OutOfQubits {
                requested: k,
                available: free.len(),
            });
        }
        let owner = self.next_owner;
        self.next_owner += 1;
        let qubits = free[..k]
            .iter()
            .map(|&index| {
                self.owner[index] = Some(owner);
                Qubit { index, owner }
            })
            .collect();
        Ok(Register { qubits })
    }

    pub fn is_live(&self, q: Qubit) -> bool {
        self.owner.get(q.index).copied().flatten() == Some(q.owner)
    }

    pub(crate) fn check_live(&self, q: Qubit) -> Result<()> {
        if self.is_live(q) {
            Ok(())
        } else {
            Err(Error::DeadQubit(q.index))
        }
    }

    pub(crate) fn check_register(&self, r: &Register) -> Result<()> {
        let mut seen = 0usize;
        for &q in r.qubits() {
            self.check_live(q)?;
            if seen & q.mask() != 0 {
                return Err(Error::OverlappingRegisters(q.index));
            }
            seen |= q.mask();
        }
        Ok(())
    }

    pub(crate) fn check_disjoint(a: &Register, b: &Register) -> Result<()> {
        let overlap = a.mask() & b.mask();
        if overlap != 0 {
            return Err(Error::OverlappingRegisters(overlap.trailing_zeros() as usize));
        }
        Ok(())
    }

    /// Returns the qubits of `r` to the free list. They must already be `|0⟩`.
    pub(crate) fn release(&mut self, r: Register) {
        for q in r.qubits {
            self.owner[q.index] = None;
        }
    }

    /// Applies `gate` to `target`.
    pub fn apply(&mut self, gate: Gate, target: Qubit) -> Result<()> {
        self.apply_controlled(&[], 0, gate, target)
    }

    pub fn h(&mut self, q: Qubit) -> Result<()> {
        self.apply(Gate::H, q)
    }

    pub fn x(&mut self, q: Qubit) -> Result<()> {
        self.apply(Gate::X, q)
    }

    pub fn y(&mut self, q: Qubit) -> Result<()> {
        self.apply(Gate::Y, q)
    }

    pub fn z(&mut self, q: Qubit) -> Result<()> {
        self.apply(Gate::Z, q)
    }

    pub fn rot_x(&mut self, q: Qubit, theta: f64) -> Result<()> {
        self.apply(Gate::RotX(theta), q)
    }

    pub fn rot_y(&mut self, q: Qubit, theta: f64) -> Result<()> {
        self.apply(Gate::RotY(theta), q)
    }

    pub fn rot_z(&mut self, q: Qubit, theta: f64) -> Result<()> {
        self.apply(Gate::RotZ(theta), q)
    }

    /// Applies `gate` to `target` on the basis states where control `i`
    /// equals bit `i` of `polarity`.
    pub fn apply_controlled(
        &mut self,
        controls: &[Qubit],
        polarity: u64,
        gate: Gate,
        target: Qubit,
    ) -> Result<()> {
        if let Some(t) = gate.angle() {
            if !t.is_finite() {
                return Err(Error::NonFiniteAngle(t));
            }
        }
        self.check_live(target)?;
        let mut mask = 0usize;
        let mut value = 0usize;
        for (i, &c) in controls.iter().enumerate() {
            self.check_live(c)?;
            if c.index == target.index || mask & c.mask() != 0 {
                return Err(Error::OverlappingRegisters(c.index));
            }
            mask |= c.mask();
            if (polarity >> i) & 1 == 1 {
                value |= c.mask();
            }
        }
        self.apply_matrix(target.index, gate.matrix(), mask, value);
        Ok(())
    }

    fn apply_matrix(&mut self, target: usize, m: [[Complex; 2]; 2], mask: usize, value: usize) {
        let bit = 1usize << target;
        let amps = &mut self.state.amps;
        // Enumerate indices with the target bit clear by inserting a zero at `target`.
        let low = bit - 1;
        for k in 0..amps.len() / 2 {
            let i = ((k & !low) << 1) | (k & low);
            if i & mask != value {
                continue;
            }
            let j = i | bit;
            let (a, b) = (amps[i], amps[j]);
            amps[i] = m[0][0] * a + m[0][1] * b;
            amps[j] = m[1][0] * a + m[1][1] * b;
        }
    }

    /// Multiplies every amplitude by `e^{ir}`.
    pub fn global_phase(&mut self, r: f64) -> Result<()> {
        if !r.is_finite() {
            return Err(Error::NonFiniteAngle(r));
        }
        let phase = Complex::from_polar(1.0, r);
        self.state.amps.iter_mut().for_each(|a| *a *= phase);
        Ok(())
    }

    /// Negates the amplitude of every basis state whose value on `r` satisfies `predicate`.
    pub fn phase_flip_if(&mut self, r: &Register, predicate: impl Fn(u64) -> bool) -> Result<()> {
        self.check_register(r)?;
        // Evaluate the predicate once per register value, not once per amplitude.
        let marks: Vec<bool> = (0..1u64 << r.len()).map(&predicate).collect();
        for (i, a) in self.state.amps.iter_mut().enumerate() {
            if marks[r.value_in(i) as usize] {
                *a = -*a;
            }
        }
        Ok(())
    }

    /// Basis permutation `|s⟩|d⟩ → |s⟩|d ⊕ f(s)⟩`. Self-inverse.
    pub fn xor_apply(
        &mut self,
        src: &Register,
        dst: &Register,
        f: impl Fn(u64) -> u64,
    ) -> Result<()> {
        self.check_register(src)?;
        self.check_register(dst)?;
        Self::check_disjoint(src, dst)?;
        let width = dst.len();
        let table: Vec<usize> = (0..1u64 << src.len())
            .map(|s| {
                let v = f(s);
                if width < 64 && v >> width != 0 {
                    Err(Error::ValueTooWide { value: v, width })
                } else {
                    Ok(dst.spread(v))
                }
            })
            .collect::<Result<_>>()?;
        let amps = &mut self.state.amps;
        for i in 0..amps.len() {
            let j = i ^ table[src.value_in(i) as usize];
            if i < j {
                amps.swap(i, j);
            }
        }
        Ok(())
    }

    /// Marginal distribution of `r`'s value.
    pub fn probabilities(&self, r: &Register) -> Result<Vec<f64>> {
        self.check_register(r)?;
        let mut probs = vec![0.0; 1 << r.len()];
        for (i, a) in self.state.amps.iter().enumerate() {
            probs[r.value_in(i) as usize] += a.norm_sqr();
        }
        Ok(probs)
    }

    /// Samples `r`, collapses the state onto the outcome and returns `r`'s
    /// qubits to the free list in `|0⟩`.
    pub fn measure(&mut self, r: Register) -> Result<u64> {
        let probs = self.probabilities(&r)?;
        let total: f64 = probs.iter().sum();
        let mut u = self.rng.random::<f64>() * total;
        let mut outcome = probs.len() - 1;
        for (v, &p) in probs.iter().enumerate() {
            if u < p {
                outcome = v;
                break;
            }
            u -= p;
        }
        // Guard against landing on a zero-probability tail through rounding.
        while probs[outcome] == 0.0 && outcome > 0 {
            outcome -= 1;
        }
        let scale = probs[outcome].sqrt().recip();
        let mask = r.mask();
        let mut next = vec![C0; self.state.amps.len()];
        for (i, a) in self.state.amps.iter().enumerate() {
            if r.value_in(i) as usize == outcome {
                next[i & !mask] = a * scale;
            }
        }
        self.state.amps = next;
        self.release(r);
        Ok(outcome as u64)
    }

    /// Drops the qubits of `r`, moving every amplitude to the basis state with
    /// `r`'s bits cleared. Callers must have established that `r`'s value is a
    /// function of the remaining qubits.
    pub(crate) fn discard(&mut self, r: Register) {
        let mask = r.mask();
        let mut next = vec![C0; self.state.amps.len()];
        for (i, a) in self.state.amps.iter().enumerate() {
            if a.norm() > ZERO_TOLERANCE {
                next[i & !mask] += a;
            }
        }
        let norm: f64 = next.iter().map(|a| a.norm_sqr()).sum();
        let scale = norm.sqrt().recip();
        next.iter_mut().for_each(|a| *a *= scale);
        self.state.amps = next;
        self.release(r);
    }
}
