//! The five-bit worked example, traced step by step.
//!
//! The message 10101 is encoded into five Steane blocks and carried through
//! the three noiseless stages. The last two measured bits are sifted, the
//! first three form x = 101, and Alice masks them with v = 011. That
//! three-bit mask is illustrative only (no three-bit code is involved), so
//! the trace also repeats the masking step with a real Hamming codeword.

use qsdc_core::codes::CssCode;
use qsdc_core::protocol::{Alice, Bob};
use qsdc_core::qsim::fidelity;
use qsdc_core::reconcile::{alice_declare, bob_recover, coset_key};
use qsdc_core::steane::encode_logical;
use qsdc_core::BitVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{CliError, Result};

pub const MESSAGE: &str = "10101";
pub const SIFTED: [usize; 2] = [3, 4];
pub const MASK: &str = "011";
const EXPECTED_X: &str = "101";
const EXPECTED_DECLARED: &str = "110";
const FIDELITY_TOL: f64 = 1e-12;

/// Masking with a seven-bit codeword and one bit of channel error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CodewordStep {
    pub x: BitVector,
    pub v: BitVector,
    pub declared: BitVector,
    pub error_position: usize,
    pub bob_y: BitVector,
    pub recovered_v: BitVector,
    pub alice_key: BitVector,
    pub bob_key: BitVector,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExampleTrace {
    pub message: BitVector,
    /// Fidelity of each encoded block with the reference logical state.
    pub encoding_fidelity: Vec<f64>,
    pub measured: BitVector,
    pub sift_positions: Vec<usize>,
    pub sift_mismatches: usize,
    pub x: BitVector,
    pub bob_x: BitVector,
    pub v: BitVector,
    pub declared: BitVector,
    pub recovered_v: BitVector,
    pub codeword_step: CodewordStep,
}

fn bits(s: &str) -> BitVector {
    s.parse().expect("literal bit string")
}

pub fn worked_example(theta: f64, phi: f64, seed: u64) -> Result<ExampleTrace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let message = bits(MESSAGE);

    let encoding_fidelity = Alice::new(0.0)
        .encode(&message)
        .iter()
        .zip(message.iter())
        .enumerate()
        .map(|(i, (block, b))| fidelity(&block.state, &encode_logical(u8::from(b), i).state))
        .collect::<qsdc_core::Result<Vec<_>>>()?;

    let alice = Alice::new(theta);
    let bob = Bob::new(phi);
    let mut blocks = alice.encode(&message);
    bob.stage2(&mut blocks);
    alice.stage3(&mut blocks);
    let measured = bob.finalize(&mut blocks, &mut rng)?.measured_bits;

    let sift_mismatches = SIFTED
        .iter()
        .filter(|&&i| message.get(i) != measured.get(i))
        .count();
    let x = message.slice(0, 3);
    let bob_x = measured.slice(0, 3);
    let v = bits(MASK);
    let declared = x.xor(&v)?;
    let recovered_v = declared.xor(&bob_x)?;

    let code = CssCode::steane();
    let x7 = BitVector::from_bools((0..7).map(|_| rng.gen::<bool>()));
    let (v7, declared7) = alice_declare(&x7, code.c1(), &mut rng)?;
    let error_position = rng.gen_range(0..7);
    let mut bob_y = x7.clone();
    bob_y.flip(error_position);
    let recovered7 = bob_recover(&bob_y, &declared7, code.c1())?;

    Ok(ExampleTrace {
        encoding_fidelity,
        sift_positions: SIFTED.to_vec(),
        sift_mismatches,
        codeword_step: CodewordStep {
            alice_key: coset_key(&v7, &code)?,
            bob_key: coset_key(&recovered7, &code)?,
            x: x7,
            v: v7,
            declared: declared7,
            error_position,
            bob_y,
            recovered_v: recovered7,
        },
        message,
        measured,
        x,
        bob_x,
        v,
        declared,
        recovered_v,
    })
}

impl ExampleTrace {
    /// Compares every step against the expected trace.
    pub fn check(&self) -> Result<()> {
        let mut failures = Vec::new();
        let mut expect = |what: &str, ok: bool| {
            if !ok {
                failures.push(what.to_string());
            }
        };
        expect("message", self.message == bits(MESSAGE));
        expect(
            "encoding fidelity",
            self.encoding_fidelity.len() == 5
                && self
                    .encoding_fidelity
                    .iter()
                    .all(|f| (f - 1.0).abs() < FIDELITY_TOL),
        );
        expect("measured string", self.measured == self.message);
        expect("sift mismatches", self.sift_mismatches == 0);
        expect("x", self.x == bits(EXPECTED_X));
        expect("bob x", self.bob_x == bits(EXPECTED_X));
        expect("v", self.v == bits(MASK));
        expect("declared", self.declared == bits(EXPECTED_DECLARED));
        expect("recovered v", self.recovered_v == bits(MASK));
        let step = &self.codeword_step;
        expect("codeword recovery", step.recovered_v == step.v);
        expect("coset keys", step.alice_key == step.bob_key);
        if failures.is_empty() {
            Ok(())
        } else {
            Err(CliError::Check(format!(
                "worked example mismatch: {}",
                failures.join(", ")
            )))
        }
    }
}
