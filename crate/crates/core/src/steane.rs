//! Steane [[7,1,3]] logical layer: encoding, ancilla-based stabilizer
//! measurement, single-error correction and logical Z readout.

use std::fmt;
use std::sync::OnceLock;

use rand::Rng;
use serde::{Serialize, Serializer};

use crate::binlin::BitVector;
use crate::codes::CssCode;
use crate::error::Result;
use crate::qsim::{Gate, Pauli, StateVector};

/// Physical qubits per logical block.
pub const BLOCK_QUBITS: usize = 7;

/// Supports (0-based) of the three stabilizer rows: qubits {1,3,5,7},
/// {2,3,6,7} and {4,5,6,7}. Row `i` contains qubit `j` exactly when bit `i`
/// of `j + 1` is set.
pub const STABILIZER_SUPPORTS: [[usize; 4]; 3] = [[0, 2, 4, 6], [1, 2, 5, 6], [3, 4, 5, 6]];

fn steane_code() -> &'static CssCode {
    static CODE: OnceLock<CssCode> = OnceLock::new();
    CODE.get_or_init(CssCode::steane)
}

fn logical_states() -> &'static [StateVector; 2] {
    static STATES: OnceLock<[StateVector; 2]> = OnceLock::new();
    STATES.get_or_init(|| {
        let cosets = steane_code().basis_states().expect("n = 7");
        let build = |i: usize| {
            StateVector::uniform_superposition(&cosets[i].1).expect("distinct codewords")
        };
        [build(0), build(1)]
    })
}

/// The six stabilizer generators as Pauli strings, X-type rows first.
pub fn stabilizer_generators() -> Vec<[Pauli; BLOCK_QUBITS]> {
    [Pauli::X, Pauli::Z]
        .into_iter()
        .flat_map(|p| {
            STABILIZER_SUPPORTS.iter().map(move |support| {
                let mut s = [Pauli::I; BLOCK_QUBITS];
                for &q in support {
                    s[q] = p;
                }
                s
            })
        })
        .collect()
}

/// One Steane-encoded logical qubit.
#[derive(Clone, Debug, PartialEq)]
pub struct LogicalBlock {
    pub state: StateVector,
    pub block_id: usize,
}

impl LogicalBlock {
    /// Rotates every physical qubit by `theta`.
    pub fn rotate_all(&mut self, theta: f64) {
        self.state
            .apply_all(&Gate::rotation(theta))
            .expect("block gates act on 7 qubits");
    }

    /// True when all six stabilizer expectations are within `tol` of +1.
    pub fn in_codespace(&self, tol: f64) -> bool {
        stabilizer_generators().iter().all(|g| {
            self.state
                .expectation(g)
                .map(|e| (e - 1.0).abs() <= tol)
                .unwrap_or(false)
        })
    }
}

/// Outcome of the six stabilizer measurements; bit value `b` stands for
/// eigenvalue `(−1)^b`. `x_bits` come from the X-type rows (they flag Z
/// errors), `z_bits` from the Z-type rows (they flag X errors).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Syndrome {
    pub x_bits: [u8; 3],
    pub z_bits: [u8; 3],
}

fn position(bits: [u8; 3]) -> Option<usize> {
    let idx = usize::from(bits[0]) | usize::from(bits[1]) << 1 | usize::from(bits[2]) << 2;
    idx.checked_sub(1)
}

impl Syndrome {
    pub fn is_zero(&self) -> bool {
        self.x_bits == [0; 3] && self.z_bits == [0; 3]
    }

    /// Qubit (0-based) carrying an X error, read from the Z-type rows.
    pub fn bit_flip_position(&self) -> Option<usize> {
        position(self.z_bits)
    }

    /// Qubit (0-based) carrying a Z error, read from the X-type rows.
    pub fn phase_flip_position(&self) -> Option<usize> {
        position(self.x_bits)
    }
}

impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.x_bits.iter().chain(&self.z_bits) {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl Serialize for Syndrome {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// `|0_L⟩` for `bit = 0`, `|1_L⟩` otherwise.
pub fn encode_logical(bit: u8, block_id: usize) -> LogicalBlock {
    LogicalBlock {
        state: logical_states()[usize::from(bit & 1)].clone(),
        block_id,
    }
}

/// Measures one stabilizer through a transient ancilla: the ancilla is
/// appended in |0⟩, put through H, used as control for the stabilizer's
/// Paulis, put through H again and measured. The ancilla is dropped
/// afterwards.
fn measure_stabilizer<R: Rng + ?Sized>(
    state: &mut StateVector,
    pauli: Pauli,
    support: &[usize],
    rng: &mut R,
) -> Result<u8> {
    state.push_zero_qubit()?;
    let ancilla = BLOCK_QUBITS;
    let h = Gate::hadamard();
    let p = pauli.gate();
    state.apply_single(&h, ancilla)?;
    for &q in support {
        state.apply_controlled(&p, ancilla, q)?;
    }
    state.apply_single(&h, ancilla)?;
    let outcome = state.measure_qubit(ancilla, rng)?;
    state.pop_qubit(outcome)?;
    Ok(outcome)
}

/// Measures all six generators in table order (X-type rows, then Z-type).
/// The block is collapsed onto the measured stabilizer eigenspace.
pub fn extract_syndrome<R: Rng + ?Sized>(
    block: &mut LogicalBlock,
    rng: &mut R,
) -> Result<Syndrome> {
    let mut syndrome = Syndrome::default();
    for (i, support) in STABILIZER_SUPPORTS.iter().enumerate() {
        syndrome.x_bits[i] = measure_stabilizer(&mut block.state, Pauli::X, support, rng)?;
    }
    for (i, support) in STABILIZER_SUPPORTS.iter().enumerate() {
        syndrome.z_bits[i] = measure_stabilizer(&mut block.state, Pauli::Z, support, rng)?;
    }
    Ok(syndrome)
}

/// Applies X at the position flagged by `z_bits` and Z at the position
/// flagged by `x_bits`. A zero syndrome leaves the block untouched.
pub fn correct(block: &mut LogicalBlock, syndrome: &Syndrome) -> Result<()> {
    if let Some(q) = syndrome.bit_flip_position() {
        block.state.apply_pauli(Pauli::X, q)?;
    }
    if let Some(q) = syndrome.phase_flip_position() {
        block.state.apply_pauli(Pauli::Z, q)?;
    }
    Ok(())
}

/// Decodes a measured 7-bit string: nearest Hamming codeword, then its
/// coset label (0 for the even-weight coset, 1 for the odd one).
pub fn decode_string(s: &BitVector) -> Result<u8> {
    let code = steane_code();
    let decoded = code.c1().decode(s)?;
    let label = code.coset_label(&decoded.codeword)?;
    Ok(u8::from(label.get(0)))
}

/// Z-basis readout of all seven qubits followed by classical decoding.
pub fn decode_measure<R: Rng + ?Sized>(block: &mut LogicalBlock, rng: &mut R) -> Result<u8> {
    let s = block.state.measure_all(rng);
    decode_string(&s)
}
