//! Amplitude amplification: phase oracles, the diffusion reflection and a
//! Grover search that takes the number of marked states into account.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sim::{Machine, Register};
use crate::uncompute::{with_ancilla, AncillaScope};

pub type Predicate = Arc<dyn Fn(u64) -> bool + Send + Sync>;

/// Body run inside an ancilla scope. Receives the scope and the index register;
/// it must leave the ancilla recoverable by undoing its recorded writes.
pub type AncillaBody = Arc<dyn Fn(&mut AncillaScope<'_>, &Register) -> Result<()> + Send + Sync>;

#[derive(Clone)]
pub enum OracleMode {
    /// Negate marked amplitudes directly.
    Diagonal,
    /// Compute into a `width`-qubit ancilla, kick back a phase, then uncompute.
    AncillaBased { width: usize, body: AncillaBody },
}

impl fmt::Debug for OracleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleMode::Diagonal => write!(f, "Diagonal"),
            OracleMode::AncillaBased { width, .. } => {
                write!(f, "AncillaBased {{ width: {width} }}")
            }
        }
    }
}

/// Phase oracle `I − 2P_f` over an `arity`-qubit index register.
#[derive(Clone)]
pub struct Oracle {
    arity: usize,
    predicate: Predicate,
    mode: OracleMode,
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Oracle")
            .field("arity", &self.arity)
            .field("mode", &self.mode)
            .finish()
    }
}

impl Oracle {
    /// A diagonal oracle marking the indices where `predicate` holds.
    pub fn new(arity: usize, predicate: impl Fn(u64) -> bool + Send + Sync + 'static) -> Self {
        Oracle {
            arity,
            predicate: Arc::new(predicate),
            mode: OracleMode::Diagonal,
        }
    }

    /// Replaces the realization with a custom ancilla computation. The body
    /// must produce the same phase pattern as the predicate.
    pub fn with_ancilla_body(mut self, width: usize, body: AncillaBody) -> Self {
        self.mode = OracleMode::AncillaBased { width, body };
        self
    }

    /// Realizes the oracle through a one-qubit ancilla: load the predicate
    /// bit, apply a phase on it, uncompute.
    pub fn ancilla_based(self) -> Self {
        let predicate = self.predicate.clone();
        let body: AncillaBody = Arc::new(move |scope, index| {
            let flag = scope.ancilla().clone();
            let p = predicate.clone();
            scope.xor_apply(index, &flag, |x| p(x) as u64)?;
            scope.phase_flip_if(&flag, |v| v == 1)
        });
        self.with_ancilla_body(1, body)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn mode(&self) -> &OracleMode {
        &self.mode
    }

    /// Extra qubits needed to apply this oracle.
    pub fn ancilla_width(&self) -> usize {
        match self.mode {
            OracleMode::Diagonal => 0,
            OracleMode::AncillaBased { width, .. } => width,
        }
    }

    pub fn is_marked(&self, x: u64) -> bool {
        (self.predicate)(x)
    }

    pub fn marks(&self) -> Vec<u64> {
        (0..1u64 << self.arity).filter(|&x| self.is_marked(x)).collect()
    }
}

/// `H^{⊗n}` on a register in `|0⟩ⁿ`.
pub fn prepare_uniform(m: &mut Machine, r: &Register) -> Result<()> {
    for &q in r.qubits() {
        m.h(q)?;
    }
    Ok(())
}

/// Negates the amplitude of every marked index; counts one query.
pub fn apply_oracle(m: &mut Machine, o: &Oracle, r: &Register) -> Result<()> {
    if r.len() != o.arity {
        return Err(Error::ArityMismatch {
            expected: o.arity,
            found: r.len(),
        });
    }
    match &o.mode {
        OracleMode::Diagonal => m.phase_flip_if(r, |x| o.is_marked(x))?,
        OracleMode::AncillaBased { width, body } => {
            with_ancilla(m, *width, |scope| body(scope, r))?
        }
    }
    m.record_query();
    Ok(())
}

/// Reflection `2|ψ⟩⟨ψ| − I` about the uniform state on `r`.
pub fn apply_diffusion(m: &mut Machine, r: &Register) -> Result<()> {
    prepare_uniform(m, r)?;
    m.phase_flip_if(r, |x| x != 0)?;
    prepare_uniform(m, r)
}

/// `⌊(π/4)·√(N/t)⌋` Grover iterations for `t` marks among `N` states.
pub fn grover_iterations(n: u64, t: u64) -> Result<u64> {
    if t < 1 || t > n {
        return Err(Error::InvalidMarks { marks: t, size: n });
    }
    Ok((FRAC_PI_4 * (n as f64 / t as f64).sqrt()).floor() as u64)
}

/// Runs `iterations` rounds of oracle followed by diffusion on `r`.
pub fn amplify(m: &mut Machine, o: &Oracle, r: &Register, iterations: u64) -> Result<()> {
    for _ in 0..iterations {
        apply_oracle(m, o, r)?;
        apply_diffusion(m, r)?;
    }
    Ok(())
}

/// Grover search for one of `t` marked indices; returns the measured index.
pub fn grover(m: &mut Machine, o: &Oracle, t: u64) -> Result<u64> {
    let iterations = grover_iterations(1u64 << o.arity, t)?;
    let r = m.allocate(o.arity)?;
    prepare_uniform(m, &r)?;
    amplify(m, o, &r, iterations)?;
    m.measure(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Complex;

    fn uniform(n: usize) -> (Machine, Register) {
        let mut m = Machine::new(n + 1, 0).unwrap();
        let r = m.allocate(n).unwrap();
        prepare_uniform(&mut m, &r).unwrap();
        (m, r)
    }

    fn assert_close(a: &[Complex], b: &[f64]) {
        for (i, (x, y)) in a.iter().zip(b).enumerate() {
            assert!((x - Complex::new(*y, 0.0)).norm() < 1e-12, "amp {i}: {x} vs {y}");
        }
    }

    #[test]
    fn uniform_states() {
        let (m, _) = uniform(1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_close(m.state().amplitudes(), &[s, s]);
        let (mut m, r) = uniform(3);
        let e = 1.0 / 8f64.sqrt();
        assert_close(m.state().amplitudes(), &[e; 8]);
        prepare_uniform(&mut m, &r).unwrap();
        assert!((m.state().amplitude(0).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_single_mark() {
        let (mut m, r) = uniform(2);
        let o = Oracle::new(2, |x| x == 2);
        apply_oracle(&mut m, &o, &r).unwrap();
        assert_close(m.state().amplitudes(), &[0.5, 0.5, -0.5, 0.5]);
        apply_oracle(&mut m, &o, &r).unwrap();
        assert_close(m.state().amplitudes(), &[0.5, 0.5, 0.5, 0.5]);
        assert_eq!(m.queries(), 2);
    }

    #[test]
    fn oracle_arity_checked() {
        let (mut m, r) = uniform(2);
        let o = Oracle::new(3, |_| true);
        assert_eq!(
            apply_oracle(&mut m, &o, &r),
            Err(Error::ArityMismatch {
                expected: 3,
                found: 2
            })
        );
        assert_eq!(m.queries(), 0);
    }

    #[test]
    fn generic_ancilla_oracle_matches_diagonal() {
        let diag = Oracle::new(2, |x| x % 3 == 0);
        let anc = diag.clone().ancilla_based();
        assert_eq!(anc.ancilla_width(), 1);
        let (mut a, ra) = uniform(2);
        let (mut b, rb) = uniform(2);
        apply_oracle(&mut a, &diag, &ra).unwrap();
        apply_oracle(&mut b, &anc, &rb).unwrap();
        for (x, y) in a.state().amplitudes().iter().zip(b.state().amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
        assert_eq!(b.free_count(), 1);
        assert_eq!(b.queries(), 1);
    }

    #[test]
    fn diffusion() {
        let (mut m, r) = uniform(2);
        apply_diffusion(&mut m, &r).unwrap();
        assert_close(m.state().amplitudes(), &[0.5; 4]);

        let mut m = Machine::new(2, 0).unwrap();
        let r = m.allocate(2).unwrap();
        apply_diffusion(&mut m, &r).unwrap();
        assert_close(m.state().amplitudes(), &[-0.5, 0.5, 0.5, 0.5]);
        apply_diffusion(&mut m, &r).unwrap();
        assert_close(m.state().amplitudes(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn iteration_counts() {
        assert_eq!(grover_iterations(4, 1), Ok(1));
        assert_eq!(grover_iterations(16, 1), Ok(3));
        assert_eq!(grover_iterations(16, 4), Ok(1));
        assert_eq!(grover_iterations(16, 16), Ok(0));
        assert!(grover_iterations(16, 0).is_err());
        assert!(grover_iterations(16, 17).is_err());
    }

    #[test]
    fn grover_two_qubits_is_exact() {
        for seed in 0..20 {
            let mut m = Machine::new(2, seed).unwrap();
            let o = Oracle::new(2, |x| x == 3);
            assert_eq!(grover(&mut m, &o, 1).unwrap(), 3);
            assert_eq!(m.queries(), 1);
        }
    }

    #[test]
    fn all_marked_runs_no_iterations() {
        let mut m = Machine::new(3, 5).unwrap();
        let o = Oracle::new(3, |_| true);
        let v = grover(&mut m, &o, 8).unwrap();
        assert!(v < 8);
        assert_eq!(m.queries(), 0);
    }
}
