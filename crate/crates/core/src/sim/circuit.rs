use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Statevector;
use crate::error::{Error, Result};

/// Rotation angle: a literal, or `scale * params[index]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Angle {
    Fixed(f64),
    Param { index: usize, scale: f64 },
}

impl Angle {
    pub fn param(index: usize) -> Self {
        Angle::Param { index, scale: 1.0 }
    }

    pub fn scaled(index: usize, scale: f64) -> Self {
        Angle::Param { index, scale }
    }

    fn resolve(&self, params: &[f64]) -> f64 {
        match *self {
            Angle::Fixed(v) => v,
            Angle::Param { index, scale } => scale * params[index],
        }
    }
}

/// Gate set of the simulator. Rotations follow `R_P(theta) = exp(-i theta P / 2)`;
/// `Zz` is the pairwise phase rotation `exp(-i theta Z_a Z_b / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "lowercase")]
pub enum Gate {
    X { qubit: usize },
    H { qubit: usize },
    Rx { qubit: usize, angle: Angle },
    Ry { qubit: usize, angle: Angle },
    Rz { qubit: usize, angle: Angle },
    Cnot { control: usize, target: usize },
    Zz { a: usize, b: usize, angle: Angle },
}

impl Gate {
    fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::X { qubit } | Gate::H { qubit } => (qubit, None),
            Gate::Rx { qubit, .. } | Gate::Ry { qubit, .. } | Gate::Rz { qubit, .. } => (qubit, None),
            Gate::Cnot { control, target } => (control, Some(target)),
            Gate::Zz { a, b, .. } => (a, Some(b)),
        }
    }

    pub(crate) fn angle(&self) -> Option<Angle> {
        match *self {
            Gate::Rx { angle, .. } | Gate::Ry { angle, .. } | Gate::Rz { angle, .. } | Gate::Zz { angle, .. } => {
                Some(angle)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    n_params: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit { n_qubits, n_params: 0, gates: Vec::new() }
    }

    /// Appends a gate after validating its qubit indices. Parameter indices
    /// grow the circuit's parameter count as needed.
    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        let (a, b) = gate.qubits();
        for q in std::iter::once(a).chain(b) {
            if q >= self.n_qubits {
                return Err(Error::InvalidParameter(format!(
                    "qubit {q} out of range for a {}-qubit circuit",
                    self.n_qubits
                )));
            }
        }
        if b == Some(a) {
            return Err(Error::InvalidParameter(format!("two-qubit gate acts twice on qubit {a}")));
        }
        if let Some(Angle::Param { index, .. }) = gate.angle() {
            self.n_params = self.n_params.max(index + 1);
        }
        self.gates.push(gate);
        Ok(self)
    }

    /// Raises the parameter count to at least `n`, for parameters that no
    /// gate happens to reference.
    pub fn declare_params(&mut self, n: usize) -> &mut Self {
        self.n_params = self.n_params.max(n);
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// CNOT count with each `Zz` decomposed as CNOT-Rz-CNOT.
    pub fn cnot_count(&self) -> usize {
        self.gates
            .iter()
            .map(|g| match g {
                Gate::Cnot { .. } => 1,
                Gate::Zz { .. } => 2,
                _ => 0,
            })
            .sum()
    }

    /// Applies the circuit in place.
    pub fn apply(&self, params: &[f64], psi: &mut Statevector) -> Result<()> {
        psi.check_dim(self.n_qubits)?;
        if params.len() < self.n_params {
            return Err(Error::LengthMismatch { expected: self.n_params, got: params.len() });
        }
        let amps = psi.amps_mut();
        for gate in &self.gates {
            apply_gate(amps, gate, params, 0.0);
        }
        Ok(())
    }

    /// Like [`Circuit::apply`] but adds `shift` to the resolved angle of gate
    /// number `gate` only.
    pub(crate) fn apply_shifted(&self, params: &[f64], psi: &mut Statevector, gate: usize, shift: f64) -> Result<()> {
        psi.check_dim(self.n_qubits)?;
        if params.len() < self.n_params {
            return Err(Error::LengthMismatch { expected: self.n_params, got: params.len() });
        }
        let amps = psi.amps_mut();
        for (g, op) in self.gates.iter().enumerate() {
            apply_gate(amps, op, params, if g == gate { shift } else { 0.0 });
        }
        Ok(())
    }
}

/// `U(params) |psi0>`.
pub fn apply_circuit(c: &Circuit, params: &[f64], psi0: &Statevector) -> Result<Statevector> {
    let mut psi = psi0.clone();
    c.apply(params, &mut psi)?;
    Ok(psi)
}

fn apply_gate(amps: &mut [Complex64], gate: &Gate, params: &[f64], shift: f64) {
    match *gate {
        Gate::X { qubit } => for_pairs(amps, qubit, std::mem::swap),
        Gate::H { qubit } => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            for_pairs(amps, qubit, |a0, a1| {
                let (x, y) = (*a0, *a1);
                *a0 = (x + y) * s;
                *a1 = (x - y) * s;
            })
        }
        Gate::Ry { qubit, angle } => {
            let (s, c) = ((angle.resolve(params) + shift) / 2.0).sin_cos();
            for_pairs(amps, qubit, |a0, a1| {
                let (x, y) = (*a0, *a1);
                *a0 = x * c - y * s;
                *a1 = x * s + y * c;
            })
        }
        Gate::Rx { qubit, angle } => {
            let (s, c) = ((angle.resolve(params) + shift) / 2.0).sin_cos();
            let mis = Complex64::new(0.0, -s);
            for_pairs(amps, qubit, |a0, a1| {
                let (x, y) = (*a0, *a1);
                *a0 = x * c + y * mis;
                *a1 = x * mis + y * c;
            })
        }
        Gate::Rz { qubit, angle } => {
            let half = (angle.resolve(params) + shift) / 2.0;
            let (p0, p1) = (Complex64::from_polar(1.0, -half), Complex64::from_polar(1.0, half));
            for_pairs(amps, qubit, |a0, a1| {
                *a0 *= p0;
                *a1 *= p1;
            })
        }
        Gate::Cnot { control, target } => {
            let (cm, tm) = (1usize << control, 1usize << target);
            for i in 0..amps.len() {
                if i & cm != 0 && i & tm == 0 {
                    amps.swap(i, i | tm);
                }
            }
        }
        Gate::Zz { a, b, angle } => {
            let half = (angle.resolve(params) + shift) / 2.0;
            let (even, odd) = (Complex64::from_polar(1.0, -half), Complex64::from_polar(1.0, half));
            let (am, bm) = (1usize << a, 1usize << b);
            for (i, v) in amps.iter_mut().enumerate() {
                let parity = ((i & am != 0) as u8) ^ ((i & bm != 0) as u8);
                *v *= if parity == 0 { even } else { odd };
            }
        }
    }
}

/// Visits each amplitude pair differing only in `qubit` as `(bit 0, bit 1)`.
#[inline]
fn for_pairs(amps: &mut [Complex64], qubit: usize, mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
    let stride = 1usize << qubit;
    for block in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            f(a0, a1);
        }
    }
}
