//! Variational ansatz circuits (hardware-efficient R_y and QAOA), their
//! resource counts, and the VQE driver.

mod objective;
pub(crate) mod vqe;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::IsingModel;
use crate::sim::{Angle, Circuit, Gate, Statevector};

pub(crate) use objective::Penalty;
pub use objective::{energy_range, swap_test_estimate};
pub use vqe::{vqe_run, vqe_run_with_init, Backend, OptimizerConfig, OptimizerKind, SampledBackend, VqeResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnsatzKind {
    Ry,
    Qaoa,
}

/// Shape of an ansatz. `depth` is the number of entangling layers for R_y
/// and the number of cost/mixer blocks `p` for QAOA. The entangler is a
/// linear chain for R_y and the nonzero couplings of the model for QAOA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub kind: AnsatzKind,
    pub n_qubits: usize,
    pub depth: usize,
}

impl AnsatzSpec {
    pub fn ry(n_qubits: usize, depth: usize) -> Self {
        AnsatzSpec { kind: AnsatzKind::Ry, n_qubits, depth }
    }

    pub fn qaoa(n_qubits: usize, p: usize) -> Self {
        AnsatzSpec { kind: AnsatzKind::Qaoa, n_qubits, depth: p }
    }

    pub fn validate(&self, m: &IsingModel) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(Error::InvalidParameter("ansatz needs at least one qubit".into()));
        }
        if self.depth == 0 {
            return Err(Error::InvalidParameter(format!("{:?} depth must be at least 1", self.kind)));
        }
        if self.n_qubits != m.n() {
            return Err(Error::LengthMismatch { expected: m.n(), got: self.n_qubits });
        }
        Ok(())
    }

    pub fn n_params(&self) -> usize {
        match self.kind {
            AnsatzKind::Ry => self.n_qubits * (self.depth + 1),
            AnsatzKind::Qaoa => 2 * self.depth,
        }
    }

    /// Two-qubit pairs the ansatz entangles, in gate order within one layer.
    pub fn entangler(&self, m: &IsingModel) -> Vec<(usize, usize)> {
        match self.kind {
            AnsatzKind::Ry => (1..self.n_qubits).map(|i| (i - 1, i)).collect(),
            AnsatzKind::Qaoa => m.couplings().map(|(a, b, _)| (a, b)).collect(),
        }
    }
}

/// Resource counts of a decomposed ansatz circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resources {
    pub cnots: usize,
    pub params: usize,
}

/// Closed-form CNOT and parameter counts; each QAOA `ZZ` term costs two CNOTs.
pub fn count_resources(spec: &AnsatzSpec, m: &IsingModel) -> Result<Resources> {
    spec.validate(m)?;
    let pairs = spec.entangler(m).len();
    let cnots = match spec.kind {
        AnsatzKind::Ry => pairs * spec.depth,
        AnsatzKind::Qaoa => 2 * pairs * spec.depth,
    };
    Ok(Resources { cnots, params: spec.n_params() })
}

/// Builds the parameterized circuit; it acts on `|0...0>`.
///
/// R_y parameters are laid out layer by layer, qubit-minor. QAOA parameters
/// are `[gamma_1, beta_1, gamma_2, beta_2, ...]`, and the cost block is
/// `exp(-i gamma H)` with the constant offset dropped.
pub fn build_ansatz(spec: &AnsatzSpec, m: &IsingModel) -> Result<Circuit> {
    spec.validate(m)?;
    let n = spec.n_qubits;
    let mut c = Circuit::new(n);
    match spec.kind {
        AnsatzKind::Ry => {
            for q in 0..n {
                c.push(Gate::Ry { qubit: q, angle: Angle::param(q) })?;
            }
            for layer in 1..=spec.depth {
                for (control, target) in spec.entangler(m) {
                    c.push(Gate::Cnot { control, target })?;
                }
                for q in 0..n {
                    c.push(Gate::Ry { qubit: q, angle: Angle::param(layer * n + q) })?;
                }
            }
        }
        AnsatzKind::Qaoa => {
            for q in 0..n {
                c.push(Gate::H { qubit: q })?;
            }
            for layer in 0..spec.depth {
                let (gamma, beta) = (2 * layer, 2 * layer + 1);
                for (q, &h) in m.h().iter().enumerate() {
                    if h != 0.0 {
                        c.push(Gate::Rz { qubit: q, angle: Angle::scaled(gamma, 2.0 * h) })?;
                    }
                }
                for (a, b, j) in m.couplings() {
                    c.push(Gate::Zz { a, b, angle: Angle::scaled(gamma, 2.0 * j) })?;
                }
                for q in 0..n {
                    c.push(Gate::Rx { qubit: q, angle: Angle::scaled(beta, 2.0) })?;
                }
            }
        }
    }
    c.declare_params(spec.n_params());
    Ok(c)
}

/// Gradient of `<U(theta)|D|U(theta)>` for a diagonal `D` by the two-term
/// parameter-shift rule applied to every gate occurrence of every parameter.
pub fn parameter_shift_gradient(c: &Circuit, params: &[f64], diag: &[f64]) -> Result<Vec<f64>> {
    if diag.len() != 1usize << c.n_qubits() {
        return Err(Error::LengthMismatch { expected: 1usize << c.n_qubits(), got: diag.len() });
    }
    let zero = Statevector::zero_state(c.n_qubits())?;
    let mut grad = vec![0.0; c.n_params()];
    let half_pi = std::f64::consts::FRAC_PI_2;
    for (g, gate) in c.gates().iter().enumerate() {
        let Some(Angle::Param { index, scale }) = gate.angle() else { continue };
        let shifted = |shift: f64| -> Result<f64> {
            let mut psi = zero.clone();
            c.apply_shifted(params, &mut psi, g, shift)?;
            crate::sim::expectation_with_diagonal(diag, &psi)
        };
        grad[index] += scale * (shifted(half_pi)? - shifted(-half_pi)?) / 2.0;
    }
    Ok(grad)
}
