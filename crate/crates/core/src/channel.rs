//! Stochastic effects of one channel traversal: Pauli noise sampled one
//! Kraus branch per qubit, heralded loss of whole blocks, and eavesdropper
//! strategies.
//!
//! Every function here returns a ground-truth record of what it did. Those
//! records feed the transcript's oracle section only; the protocol roles
//! never see them.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::binlin::BitVector;
use crate::error::{Error, Result};
use crate::qsim::{Gate, Pauli, StateVector};
use crate::steane::{LogicalBlock, BLOCK_QUBITS};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    #[default]
    None,
    BitFlip,
    PhaseFlip,
    Depolarizing,
}

/// Independent per-qubit Pauli channel applied on each traversal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    #[serde(default)]
    pub kind: NoiseKind,
    #[serde(default)]
    pub p: f64,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, p: f64) -> Result<Self> {
        let m = Self { kind, p };
        m.validate()?;
        Ok(m)
    }

    pub fn none() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidArgument(format!(
                "noise p = {} outside [0, 1]",
                self.p
            )));
        }
        Ok(())
    }

    /// Kraus branches as `(Pauli, probability)`; the probabilities sum to 1.
    pub fn branches(&self) -> Vec<(Pauli, f64)> {
        let p = self.p;
        match self.kind {
            NoiseKind::None => vec![(Pauli::I, 1.0)],
            NoiseKind::BitFlip => vec![(Pauli::I, 1.0 - p), (Pauli::X, p)],
            NoiseKind::PhaseFlip => vec![(Pauli::I, 1.0 - p), (Pauli::Z, p)],
            NoiseKind::Depolarizing => vec![
                (Pauli::I, 1.0 - p),
                (Pauli::X, p / 3.0),
                (Pauli::Y, p / 3.0),
                (Pauli::Z, p / 3.0),
            ],
        }
    }

    /// Samples the branch for one qubit.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Pauli {
        if self.kind == NoiseKind::None || self.p == 0.0 {
            return Pauli::I;
        }
        let u: f64 = rng.gen();
        let p = self.p;
        match self.kind {
            NoiseKind::None => Pauli::I,
            NoiseKind::BitFlip if u < p => Pauli::X,
            NoiseKind::PhaseFlip if u < p => Pauli::Z,
            NoiseKind::Depolarizing if u < p / 3.0 => Pauli::X,
            NoiseKind::Depolarizing if u < 2.0 * p / 3.0 => Pauli::Y,
            NoiseKind::Depolarizing if u < p => Pauli::Z,
            _ => Pauli::I,
        }
    }
}

/// A non-identity Pauli that hit one physical qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AppliedError {
    pub block_id: usize,
    pub qubit: usize,
    pub pauli: Pauli,
}

/// Samples and applies one Kraus branch per physical qubit.
pub fn apply_noise<R: Rng + ?Sized>(
    block: &mut LogicalBlock,
    model: &NoiseModel,
    rng: &mut R,
) -> Vec<AppliedError> {
    let mut record = Vec::new();
    if model.kind == NoiseKind::None {
        return record;
    }
    for qubit in 0..BLOCK_QUBITS {
        let pauli = model.sample(rng);
        if pauli != Pauli::I {
            block
                .state
                .apply_pauli(pauli, qubit)
                .expect("qubit index below block size");
            record.push(AppliedError {
                block_id: block.block_id,
                qubit,
                pauli,
            });
        }
    }
    record
}

/// Probability that a block is absorbed on one traversal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossModel {
    #[serde(default)]
    pub p_loss: f64,
}

impl LossModel {
    pub fn new(p_loss: f64) -> Result<Self> {
        let m = Self { p_loss };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_loss) {
            return Err(Error::InvalidArgument(format!(
                "p_loss = {} outside [0, 1]",
                self.p_loss
            )));
        }
        Ok(())
    }
}

/// Heralded loss: both endpoints learn the ids of the surviving blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LossHerald {
    pub surviving: Vec<usize>,
    pub lost: Vec<usize>,
}

/// Drops each block independently with probability `p_loss`, keeping the
/// order of the survivors.
pub fn apply_loss<R: Rng + ?Sized>(
    blocks: Vec<LogicalBlock>,
    model: &LossModel,
    rng: &mut R,
) -> (Vec<LogicalBlock>, LossHerald) {
    let mut herald = LossHerald {
        surviving: Vec::with_capacity(blocks.len()),
        lost: Vec::new(),
    };
    let survivors = blocks
        .into_iter()
        .filter(|b| {
            let lost = model.p_loss > 0.0 && rng.gen::<f64>() < model.p_loss;
            if lost {
                herald.lost.push(b.block_id);
            } else {
                herald.surviving.push(b.block_id);
            }
            !lost
        })
        .collect();
    (survivors, herald)
}

/// How Eve picks her guess of the sender's rotation angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuessAngle {
    Fixed(f64),
    /// Uniform on `[0, 2π)`, drawn afresh for every block.
    Uniform,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EveStrategy {
    #[default]
    None,
    /// Measure every physical qubit in Z and resend the outcome.
    InterceptResendZ,
    /// Undo a guessed rotation, measure in Z, resend, and redo the guess.
    RotationGuess { guess: GuessAngle },
}

/// What Eve did to one block.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EveAction {
    pub block_id: usize,
    pub measured: BitVector,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guess: Option<f64>,
}

/// Applies `strategy` to one block in transit. Returns `None` when Eve
/// leaves the block alone.
pub fn eve_intercept<R: Rng + ?Sized>(
    block: &mut LogicalBlock,
    strategy: &EveStrategy,
    rng: &mut R,
) -> Option<EveAction> {
    let guess = match *strategy {
        EveStrategy::None => return None,
        EveStrategy::InterceptResendZ => None,
        EveStrategy::RotationGuess { guess } => Some(match guess {
            GuessAngle::Fixed(a) => a,
            GuessAngle::Uniform => rng.gen::<f64>() * TAU,
        }),
    };
    if let Some(g) = guess {
        block.rotate_all(-g);
    }
    let measured = block.state.measure_all(rng);
    block.state = StateVector::basis_state(&measured).expect("block register is 7 qubits");
    if let Some(g) = guess {
        block
            .state
            .apply_all(&Gate::rotation(g))
            .expect("block register is 7 qubits");
    }
    Some(EveAction {
        block_id: block.block_id,
        measured,
        guess,
    })
}
