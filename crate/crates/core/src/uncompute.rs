//! Safe discard of quantum registers.
//!
//! Dropping a register that is still entangled with the rest of the state is
//! equivalent to measuring it. The operations here only discard a register
//! after checking, on the actual amplitudes, that its value is a function of
//! the remaining qubits, so a discard can never collapse the state.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::sim::{Gate, GateKind, Machine, Qubit, Register};

/// What a conditionally forgotten register must equal.
#[derive(Debug, Clone, Copy)]
pub enum Expected<'a> {
    Value(u64),
    Register(&'a Register),
}

/// Basis-correlated copy: `Σ α_x |x⟩ → Σ α_x |x⟩|x⟩` via bitwise CNOT fan-out.
pub fn dup(m: &mut Machine, src: &Register) -> Result<Register> {
    m.check_register(src)?;
    let dst = m.allocate(src.len())?;
    for (s, d) in src.qubits().iter().zip(dst.qubits()) {
        m.apply_controlled(&[*s], 1, Gate::X, *d)?;
    }
    Ok(dst)
}

/// Discards `x` after checking that it equals `expected` on every basis state
/// in the support.
pub fn forget_conditional(m: &mut Machine, x: Register, expected: Expected<'_>) -> Result<()> {
    m.check_register(&x)?;
    match expected {
        Expected::Value(v) => {
            if x.len() < 64 && v >> x.len() != 0 {
                return Err(Error::ValueTooWide {
                    value: v,
                    width: x.len(),
                });
            }
        }
        Expected::Register(other) => {
            m.check_register(other)?;
            Machine::check_disjoint(&x, other)?;
        }
    }
    for i in m.state().support() {
        let found = x.value_in(i);
        let want = match expected {
            Expected::Value(v) => v,
            Expected::Register(other) => other.value_in(i),
        };
        if found != want {
            return Err(Error::ForgetMismatch {
                witness: i,
                found,
                expected: want,
            });
        }
    }
    m.discard(x);
    Ok(())
}

/// Discards `x` after checking that it is determined by its environment:
/// grouping the support by the bits outside `x`, each group holds one value of `x`.
pub fn forget_unconditional(m: &mut Machine, x: Register) -> Result<()> {
    m.check_register(&x)?;
    let mask = x.mask();
    let mut seen: HashMap<usize, usize> = HashMap::new();
    for i in m.state().support() {
        let env = i & !mask;
        match seen.get(&env) {
            Some(&first) if first & mask != i & mask => {
                return Err(Error::ForgetUndetermined { first, second: i });
            }
            Some(_) => {}
            None => {
                seen.insert(env, i);
            }
        }
    }
    m.discard(x);
    Ok(())
}

#[derive(Debug, Clone)]
enum TapeOp {
    Gate {
        controls: Vec<Qubit>,
        polarity: u64,
        gate: Gate,
        target: Qubit,
    },
    Xor {
        src: Register,
        dst: Register,
        table: Vec<u64>,
    },
}

/// Handle passed to a [`with_ancilla`] body.
///
/// Writes that touch the ancilla are recorded and undone in reverse order
/// when the body returns. Writes to the ancilla must map basis states to
/// basis states; diagonal (phase) gates pass through unrecorded.
pub struct AncillaScope<'m> {
    machine: &'m mut Machine,
    ancilla: Register,
    tape: Vec<TapeOp>,
}

impl<'m> AncillaScope<'m> {
    pub fn ancilla(&self) -> &Register {
        &self.ancilla
    }

    pub fn machine(&self) -> &Machine {
        self.machine
    }

    fn touches_ancilla(&self, q: Qubit) -> bool {
        self.ancilla.qubits().contains(&q)
    }

    pub fn apply(&mut self, gate: Gate, target: Qubit) -> Result<()> {
        self.apply_controlled(&[], 0, gate, target)
    }

    pub fn apply_controlled(
        &mut self,
        controls: &[Qubit],
        polarity: u64,
        gate: Gate,
        target: Qubit,
    ) -> Result<()> {
        let record = if self.touches_ancilla(target) {
            match gate.kind() {
                GateKind::Superposing => return Err(Error::NotQfree(gate.to_string())),
                GateKind::Permutation => true,
                GateKind::Diagonal => false,
            }
        } else {
            false
        };
        self.machine
            .apply_controlled(controls, polarity, gate, target)?;
        if record {
            self.tape.push(TapeOp::Gate {
                controls: controls.to_vec(),
                polarity,
                gate,
                target,
            });
        }
        Ok(())
    }

    /// `dst ^= f(src)`; recorded when `dst` overlaps the ancilla.
    pub fn xor_apply(
        &mut self,
        src: &Register,
        dst: &Register,
        f: impl Fn(u64) -> u64,
    ) -> Result<()> {
        let table: Vec<u64> = (0..1u64 << src.len()).map(&f).collect();
        self.machine
            .xor_apply(src, dst, |s| table[s as usize])?;
        if dst.qubits().iter().any(|&q| self.touches_ancilla(q)) {
            self.tape.push(TapeOp::Xor {
                src: src.clone(),
                dst: dst.clone(),
                table,
            });
        }
        Ok(())
    }

    /// Diagonal phase flip; never recorded.
    pub fn phase_flip_if(&mut self, r: &Register, predicate: impl Fn(u64) -> bool) -> Result<()> {
        self.machine.phase_flip_if(r, predicate)
    }

    fn unwind(&mut self) -> Result<()> {
        while let Some(op) = self.tape.pop() {
            match op {
                TapeOp::Gate {
                    controls,
                    polarity,
                    gate,
                    target,
                } => self
                    .machine
                    .apply_controlled(&controls, polarity, gate.inverse(), target)?,
                TapeOp::Xor { src, dst, table } => {
                    self.machine
                        .xor_apply(&src, &dst, |s| table[s as usize])?
                }
            }
        }
        Ok(())
    }
}

/// Allocates a `width`-qubit ancilla, runs `body`, undoes the body's recorded
/// ancilla writes in reverse order and discards the ancilla, checking it is
/// back to `|0⟩`.
pub fn with_ancilla<F>(m: &mut Machine, width: usize, body: F) -> Result<()>
where
    F: FnOnce(&mut AncillaScope<'_>) -> Result<()>,
{
    let ancilla = m.allocate(width)?;
    let mut scope = AncillaScope {
        machine: m,
        ancilla,
        tape: Vec::new(),
    };
    let outcome = body(&mut scope);
    let unwound = scope.unwind();
    let AncillaScope { ancilla, .. } = scope;
    unwound?;
    let released = forget_conditional(m, ancilla, Expected::Value(0));
    outcome?;
    released
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Complex;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn amps(m: &Machine) -> Vec<Complex> {
        m.state().amplitudes().to_vec()
    }

    fn assert_close(a: &[Complex], b: &[Complex]) {
        assert_eq!(a.len(), b.len());
        for (i, (x, y)) in a.iter().zip(b).enumerate() {
            assert!((x - y).norm() < 1e-12, "amp {i}: {x} vs {y}");
        }
    }

    #[test]
    fn dup_entangles() {
        let mut m = Machine::new(2, 0).unwrap();
        let src = m.allocate(1).unwrap();
        m.h(src.qubit(0)).unwrap();
        let dst = dup(&mut m, &src).unwrap();
        assert_eq!(dst.len(), 1);
        let s = FRAC_1_SQRT_2;
        let c = |x| Complex::new(x, 0.0);
        assert_close(&amps(&m), &[c(s), c(0.0), c(0.0), c(s)]);
    }

    #[test]
    fn dup_basis_state() {
        let mut m = Machine::new(6, 0).unwrap();
        let src = m.allocate(3).unwrap();
        m.x(src.qubit(0)).unwrap();
        m.x(src.qubit(2)).unwrap();
        let dst = dup(&mut m, &src).unwrap();
        let support: Vec<usize> = m.state().support().collect();
        assert_eq!(support.len(), 1);
        assert_eq!(src.value_in(support[0]), 5);
        assert_eq!(dst.value_in(support[0]), 5);
    }

    #[test]
    fn dup_then_forget_is_identity() {
        let mut m = Machine::new(4, 0).unwrap();
        let src = m.allocate(2).unwrap();
        m.h(src.qubit(0)).unwrap();
        m.rot_y(src.qubit(1), 0.7).unwrap();
        let before = amps(&m);
        let copy = dup(&mut m, &src).unwrap();
        forget_conditional(&mut m, copy, Expected::Register(&src)).unwrap();
        assert_close(&amps(&m), &before);
        assert_eq!(m.free_count(), 2);
    }

    #[test]
    fn dup_out_of_qubits() {
        let mut m = Machine::new(3, 0).unwrap();
        let src = m.allocate(2).unwrap();
        assert!(matches!(dup(&mut m, &src), Err(Error::OutOfQubits { .. })));
    }

    #[test]
    fn forget_conditional_value() {
        let mut m = Machine::new(3, 0).unwrap();
        let keep = m.allocate(1).unwrap();
        m.h(keep.qubit(0)).unwrap();
        let x = m.allocate(2).unwrap();
        m.x(x.qubit(0)).unwrap();
        m.x(x.qubit(1)).unwrap();
        forget_conditional(&mut m, x, Expected::Value(3)).unwrap();
        let s = FRAC_1_SQRT_2;
        let mut expected = vec![Complex::new(0.0, 0.0); 8];
        expected[0] = Complex::new(s, 0.0);
        expected[1] = Complex::new(s, 0.0);
        assert_close(&amps(&m), &expected);
    }

    #[test]
    fn forget_conditional_mismatch() {
        let mut m = Machine::new(1, 0).unwrap();
        let x = m.allocate(1).unwrap();
        m.h(x.qubit(0)).unwrap();
        assert_eq!(
            forget_conditional(&mut m, x, Expected::Value(0)),
            Err(Error::ForgetMismatch {
                witness: 1,
                found: 1,
                expected: 0
            })
        );
    }

    #[test]
    fn forget_conditional_on_partner() {
        let mut m = Machine::new(2, 0).unwrap();
        let reg = m.allocate(2).unwrap();
        m.h(reg.qubit(0)).unwrap();
        m.apply_controlled(&[reg.qubit(0)], 1, Gate::X, reg.qubit(1))
            .unwrap();
        let (a, b) = (reg.slice(0..1), reg.slice(1..2));
        forget_conditional(&mut m, b, Expected::Register(&a)).unwrap();
        let s = Complex::new(FRAC_1_SQRT_2, 0.0);
        let z = Complex::new(0.0, 0.0);
        assert_close(&amps(&m), &[s, s, z, z]);
    }

    #[test]
    fn forget_unconditional_cases() {
        let mut m = Machine::new(1, 0).unwrap();
        let x = m.allocate(1).unwrap();
        m.h(x.qubit(0)).unwrap();
        assert_eq!(
            forget_unconditional(&mut m, x),
            Err(Error::ForgetUndetermined { first: 0, second: 1 })
        );

        let mut m = Machine::new(2, 0).unwrap();
        let reg = m.allocate(2).unwrap();
        m.h(reg.qubit(0)).unwrap();
        m.apply_controlled(&[reg.qubit(0)], 1, Gate::X, reg.qubit(1))
            .unwrap();
        forget_unconditional(&mut m, reg.slice(1..2)).unwrap();
        let s = Complex::new(FRAC_1_SQRT_2, 0.0);
        let z = Complex::new(0.0, 0.0);
        assert_close(&amps(&m), &[s, s, z, z]);

        let mut m = Machine::new(2, 0).unwrap();
        let keep = m.allocate(1).unwrap();
        m.rot_y(keep.qubit(0), 1.1).unwrap();
        let before = amps(&m);
        let anc = m.allocate(1).unwrap();
        forget_unconditional(&mut m, anc).unwrap();
        assert_close(&amps(&m), &before);
    }

    #[test]
    fn forget_rejects_dead_register() {
        let mut m = Machine::new(1, 0).unwrap();
        let x = m.allocate(1).unwrap();
        let stale = x.clone();
        forget_unconditional(&mut m, x).unwrap();
        assert_eq!(forget_unconditional(&mut m, stale), Err(Error::DeadQubit(0)));
    }

    #[test]
    fn with_ancilla_empty_body() {
        let mut m = Machine::new(3, 0).unwrap();
        let r = m.allocate(2).unwrap();
        m.h(r.qubit(0)).unwrap();
        let before = amps(&m);
        with_ancilla(&mut m, 1, |_| Ok(())).unwrap();
        assert_close(&amps(&m), &before);
        assert_eq!(m.free_count(), 1);
    }

    #[test]
    fn with_ancilla_rejects_superposition() {
        let mut m = Machine::new(2, 0).unwrap();
        let err = with_ancilla(&mut m, 1, |s| {
            let q = s.ancilla().qubit(0);
            s.apply(Gate::H, q)
        })
        .unwrap_err();
        assert_eq!(err, Error::NotQfree("H".into()));
        assert_eq!(m.free_count(), 2);

        let err = with_ancilla(&mut m, 1, |s| {
            let q = s.ancilla().qubit(0);
            s.apply(Gate::RotY(0.4), q)
        })
        .unwrap_err();
        assert!(matches!(err, Error::NotQfree(_)));
    }

    #[test]
    fn with_ancilla_allows_basis_rotations() {
        let mut m = Machine::new(2, 0).unwrap();
        let r = m.allocate(1).unwrap();
        m.h(r.qubit(0)).unwrap();
        let before = amps(&m);
        with_ancilla(&mut m, 1, |s| {
            let a = s.ancilla().qubit(0);
            s.apply_controlled(&[r.qubit(0)], 1, Gate::RotY(PI), a)?;
            s.apply(Gate::Y, a)
        })
        .unwrap();
        assert_close(&amps(&m), &before);
    }

    #[test]
    fn with_ancilla_table_oracle() {
        // Load T[x] into the ancilla and flip the phase where T[x] ≤ 3.
        let table = [5u64, 3, 7, 1, 6, 2, 4, 0];
        let mut m = Machine::new(6, 0).unwrap();
        let idx = m.allocate(3).unwrap();
        for q in idx.qubits() {
            m.h(*q).unwrap();
        }
        m.rot_y(idx.qubit(1), 0.3).unwrap();
        let before = amps(&m);
        with_ancilla(&mut m, 3, |s| {
            let anc = s.ancilla().clone();
            s.xor_apply(&idx, &anc, |x| table[x as usize])?;
            s.phase_flip_if(&anc, |v| v <= 3)
        })
        .unwrap();
        for (i, (a, b)) in amps(&m).iter().zip(&before).enumerate() {
            let x = idx.value_in(i) as usize;
            let sign = if table[x] <= 3 { -1.0 } else { 1.0 };
            assert!((a - b * sign).norm() < 1e-12);
        }
        assert_eq!(m.free_count(), 3);
    }

    #[test]
    fn with_ancilla_detects_unrecorded_write() {
        // Writing the ancilla through the raw machine bypasses the tape, so
        // the final check catches the leftover value.
        let mut m = Machine::new(2, 0).unwrap();
        let r = m.allocate(1).unwrap();
        m.h(r.qubit(0)).unwrap();
        let err = with_ancilla(&mut m, 1, |s| {
            let anc = s.ancilla().clone();
            s.machine.xor_apply(&r, &anc, |x| x)
        })
        .unwrap_err();
        assert!(matches!(err, Error::ForgetMismatch { .. }));
    }
}
