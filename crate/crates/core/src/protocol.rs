//! The three-stage session.
//!
//! Alice encodes random bits into Steane blocks and rotates every physical
//! qubit by her secret angle θ. Bob adds his own rotation φ and returns
//! the blocks; Alice removes θ and sends them back; Bob removes φ, corrects
//! each block from its stabilizer syndrome and measures it. The parties then
//! sift a random sample to estimate the error rate and, if it is low
//! enough, distill a key from the rest.
//!
//! Only [`Alice`] holds θ and only [`Bob`] holds φ. [`run_session`] is the
//! one place that sees both, and it only uses them to build the two roles.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::binlin::BitVector;
use crate::channel::{apply_loss, apply_noise, eve_intercept, EveStrategy, LossModel, NoiseModel};
use crate::codes::CssCode;
use crate::error::{Error, Result};
use crate::qsim::Pauli;
use crate::reconcile::{distill, HashSeed, KeyRecord};
use crate::steane::{
    correct, decode_measure, encode_logical, extract_syndrome, LogicalBlock, Syndrome, BLOCK_QUBITS,
};

/// A Pauli forced onto one physical qubit during one traversal. Used to
/// probe error tolerance; recorded as an oracle event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectedError {
    /// Traversal number, 1 to 3.
    pub stage: u8,
    pub block: usize,
    pub qubit: usize,
    pub pauli: Pauli,
}

/// Full parameterization of one session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    /// Blocks that must survive the channel (N).
    pub n_blocks: usize,
    /// Extra blocks sent to absorb loss (δ).
    pub delta: usize,
    /// Alice's secret angle.
    pub theta: f64,
    /// Bob's secret angle.
    pub phi: f64,
    pub noise: NoiseModel,
    /// Which of the three traversals carry channel noise.
    pub noise_stages: [bool; 3],
    pub loss: LossModel,
    pub eve: EveStrategy,
    /// Which traversals Eve attacks.
    pub eve_stages: [bool; 3],
    /// Blocks sacrificed for error estimation (γ).
    pub sift_count: usize,
    /// Largest tolerated number of sift mismatches.
    pub t_bound: usize,
    /// Bits removed by privacy amplification.
    pub security_margin: usize,
    pub seed: u64,
    pub inject: Vec<InjectedError>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            n_blocks: 16,
            delta: 0,
            theta: 0.7,
            phi: 1.3,
            noise: NoiseModel::none(),
            noise_stages: [true; 3],
            loss: LossModel::default(),
            eve: EveStrategy::None,
            eve_stages: [true, false, false],
            sift_count: 4,
            t_bound: 0,
            security_margin: 8,
            seed: 0,
            inject: Vec::new(),
        }
    }
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::InvalidConfig {
        field: field.into(),
        reason: reason.into(),
    }
}

impl SessionConfig {
    pub fn total_blocks(&self) -> usize {
        self.n_blocks + self.delta
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_blocks == 0 {
            return Err(invalid("n_blocks", "must be at least 1"));
        }
        if self.sift_count > self.n_blocks {
            return Err(invalid(
                "sift_count",
                format!("{} exceeds n_blocks = {}", self.sift_count, self.n_blocks),
            ));
        }
        if !self.theta.is_finite() {
            return Err(invalid("theta", "must be finite"));
        }
        if !self.phi.is_finite() {
            return Err(invalid("phi", "must be finite"));
        }
        self.noise
            .validate()
            .map_err(|e| invalid("noise.p", e.to_string()))?;
        self.loss
            .validate()
            .map_err(|e| invalid("loss.p_loss", e.to_string()))?;
        for (i, inj) in self.inject.iter().enumerate() {
            if !(1..=3).contains(&inj.stage) {
                return Err(invalid(format!("inject[{i}].stage"), "must be 1, 2 or 3"));
            }
            if inj.block >= self.total_blocks() {
                return Err(invalid(
                    format!("inject[{i}].block"),
                    format!(
                        "{} out of range for {} blocks",
                        inj.block,
                        self.total_blocks()
                    ),
                ));
            }
            if inj.qubit >= BLOCK_QUBITS {
                return Err(invalid(format!("inject[{i}].qubit"), "must be below 7"));
            }
        }
        Ok(())
    }
}

/// Alice's side: holds θ.
#[derive(Debug)]
pub struct Alice {
    theta: f64,
}

impl Alice {
    pub fn new(theta: f64) -> Self {
        Self { theta }
    }

    /// Encodes `bits` block by block and applies θ to every qubit.
    pub fn encode(&self, bits: &BitVector) -> Vec<LogicalBlock> {
        bits.iter()
            .enumerate()
            .map(|(i, b)| {
                let mut block = encode_logical(u8::from(b), i);
                block.rotate_all(self.theta);
                block
            })
            .collect()
    }

    /// Draws `count` uniform bits and encodes them (the stage-1 state).
    pub fn prepare<R: Rng + ?Sized>(
        &self,
        count: usize,
        rng: &mut R,
    ) -> (Vec<LogicalBlock>, BitVector) {
        let bits = BitVector::from_bools((0..count).map(|_| rng.gen::<bool>()));
        (self.encode(&bits), bits)
    }

    /// Removes θ before the third transmission.
    pub fn stage3(&self, blocks: &mut [LogicalBlock]) {
        for b in blocks {
            b.rotate_all(-self.theta);
        }
    }
}

/// One entry of Bob's correction log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SyndromeEntry {
    pub block_id: usize,
    pub syndrome: Syndrome,
    pub corrected: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BobReadout {
    pub measured_bits: BitVector,
    pub syndrome_log: Vec<SyndromeEntry>,
}

/// Bob's side: holds φ.
#[derive(Debug)]
pub struct Bob {
    phi: f64,
}

impl Bob {
    pub fn new(phi: f64) -> Self {
        Self { phi }
    }

    /// Applies φ to every qubit without measuring.
    pub fn stage2(&self, blocks: &mut [LogicalBlock]) {
        for b in blocks {
            b.rotate_all(self.phi);
        }
    }

    /// Removes φ, corrects each block from its syndrome, then reads out the
    /// logical bits.
    pub fn finalize<R: Rng + ?Sized>(
        &self,
        blocks: &mut [LogicalBlock],
        rng: &mut R,
    ) -> Result<BobReadout> {
        let mut bits = Vec::with_capacity(blocks.len());
        let mut log = Vec::with_capacity(blocks.len());
        for block in blocks.iter_mut() {
            block.rotate_all(-self.phi);
            let syndrome = extract_syndrome(block, rng)?;
            correct(block, &syndrome)?;
            bits.push(decode_measure(block, rng)? == 1);
            log.push(SyndromeEntry {
                block_id: block.block_id,
                syndrome,
                corrected: !syndrome.is_zero(),
            });
        }
        Ok(BobReadout {
            measured_bits: BitVector::from_bools(bits),
            syndrome_log: log,
        })
    }
}

/// Result of comparing a random sample of positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SiftOutcome {
    Pass {
        positions: Vec<usize>,
        mismatches: usize,
        alice_kept: BitVector,
        bob_kept: BitVector,
    },
    Abort {
        positions: Vec<usize>,
        mismatches: usize,
    },
}

impl SiftOutcome {
    pub fn positions(&self) -> &[usize] {
        match self {
            SiftOutcome::Pass { positions, .. } | SiftOutcome::Abort { positions, .. } => positions,
        }
    }

    pub fn mismatches(&self) -> usize {
        match self {
            SiftOutcome::Pass { mismatches, .. } | SiftOutcome::Abort { mismatches, .. } => {
                *mismatches
            }
        }
    }

    pub fn passed(&self) -> bool {
        matches!(self, SiftOutcome::Pass { .. })
    }
}

/// Samples `gamma` positions without replacement, counts disagreements and
/// aborts when they exceed `t_bound`. On success the sampled positions are
/// removed from both strings.
pub fn sift<R: Rng + ?Sized>(
    alice: &BitVector,
    bob: &BitVector,
    gamma: usize,
    t_bound: usize,
    rng: &mut R,
) -> Result<SiftOutcome> {
    if alice.len() != bob.len() {
        return Err(Error::Dimension {
            expected: alice.len(),
            found: bob.len(),
        });
    }
    if gamma > bob.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot sift {gamma} of {} bits",
            bob.len()
        )));
    }
    let mut positions = sample(rng, bob.len(), gamma).into_vec();
    positions.sort_unstable();
    let mismatches = positions
        .iter()
        .filter(|&&i| alice.get(i) != bob.get(i))
        .count();
    if mismatches > t_bound {
        return Ok(SiftOutcome::Abort {
            positions,
            mismatches,
        });
    }
    let mut sampled = vec![false; bob.len()];
    for &i in &positions {
        sampled[i] = true;
    }
    let keep: Vec<usize> = (0..bob.len()).filter(|&i| !sampled[i]).collect();
    Ok(SiftOutcome::Pass {
        positions,
        mismatches,
        alice_kept: alice.select(&keep),
        bob_kept: bob.select(&keep),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    AbortedQber,
    AbortedInsufficientBlocks,
}

/// Everything Eve could read on the authenticated classical channel.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PublicRecord {
    pub surviving_indices: Vec<usize>,
    pub sift_indices: Vec<usize>,
    pub sift_mismatches: usize,
    pub declared: Vec<BitVector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hash_seed: Option<HashSeed>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    Lost,
    Noise {
        qubit: usize,
        pauli: Pauli,
    },
    Eve {
        measured: BitVector,
        #[serde(skip_serializing_if = "Option::is_none")]
        guess: Option<f64>,
    },
    Injected {
        qubit: usize,
        pauli: Pauli,
    },
}

/// Ground-truth channel event.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageEvent {
    pub stage: u8,
    pub block_id: usize,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Testing-only view of what the channel did.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OracleRecord {
    pub events: Vec<StageEvent>,
}

/// Event record of one session.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Transcript {
    pub seed: u64,
    pub outcome: Outcome,
    /// Alice's N + δ bits.
    pub prepared_bits: BitVector,
    pub surviving_indices: Vec<usize>,
    /// One bit per surviving block; empty if the session stopped before
    /// Bob's readout.
    pub measured_bits: BitVector,
    pub syndrome_log: Vec<SyndromeEntry>,
    /// Block ids used for sifting.
    pub sift_indices: Vec<usize>,
    pub sift_mismatches: usize,
    /// `sift_mismatches / γ`, absent when nothing was sifted.
    pub qber: Option<f64>,
    /// Bits left after sifting.
    pub kept_bits: usize,
    pub public: PublicRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key: Option<KeyRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleRecord>,
}

impl Transcript {
    pub fn without_oracle(mut self) -> Self {
        self.oracle = None;
        self
    }

    /// Kept bits over prepared blocks.
    pub fn retained_fraction(&self) -> f64 {
        self.kept_bits as f64 / self.prepared_bits.len() as f64
    }

    /// True when the session completed and both parties hold the same key.
    pub fn key_agreed(&self) -> bool {
        self.outcome == Outcome::Completed && self.key.as_ref().is_some_and(|k| k.agreed)
    }
}

/// Independent random streams derived from the session seed.
struct Streams {
    alice: ChaCha8Rng,
    bob: ChaCha8Rng,
    noise: ChaCha8Rng,
    loss: ChaCha8Rng,
    eve: ChaCha8Rng,
}

impl Streams {
    fn new(seed: u64) -> Self {
        let stream = |id: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(id);
            rng
        };
        Self {
            alice: stream(1),
            bob: stream(2),
            noise: stream(3),
            loss: stream(4),
            eve: stream(5),
        }
    }
}

/// One pass through the channel: loss, then Eve, then noise, then any
/// injected errors.
fn traverse(
    stage: u8,
    blocks: Vec<LogicalBlock>,
    config: &SessionConfig,
    rngs: &mut Streams,
    events: &mut Vec<StageEvent>,
) -> Vec<LogicalBlock> {
    let (mut blocks, herald) = apply_loss(blocks, &config.loss, &mut rngs.loss);
    events.extend(herald.lost.iter().map(|&block_id| StageEvent {
        stage,
        block_id,
        kind: EventKind::Lost,
    }));
    let idx = usize::from(stage - 1);
    for block in &mut blocks {
        if config.eve_stages[idx] {
            if let Some(action) = eve_intercept(block, &config.eve, &mut rngs.eve) {
                events.push(StageEvent {
                    stage,
                    block_id: action.block_id,
                    kind: EventKind::Eve {
                        measured: action.measured,
                        guess: action.guess,
                    },
                });
            }
        }
        if config.noise_stages[idx] {
            for e in apply_noise(block, &config.noise, &mut rngs.noise) {
                events.push(StageEvent {
                    stage,
                    block_id: e.block_id,
                    kind: EventKind::Noise {
                        qubit: e.qubit,
                        pauli: e.pauli,
                    },
                });
            }
        }
        for inj in config
            .inject
            .iter()
            .filter(|i| i.stage == stage && i.block == block.block_id)
        {
            block
                .state
                .apply_pauli(inj.pauli, inj.qubit)
                .expect("validated qubit index");
            events.push(StageEvent {
                stage,
                block_id: block.block_id,
                kind: EventKind::Injected {
                    qubit: inj.qubit,
                    pauli: inj.pauli,
                },
            });
        }
    }
    blocks
}

/// Runs prepare → channel → stage 2 → channel → stage 3 → channel →
/// readout → sift → distill. Aborts are reported in
/// [`Transcript::outcome`]; only invalid configs return an error.
pub fn run_session(config: &SessionConfig) -> Result<Transcript> {
    config.validate()?;
    let alice = Alice::new(config.theta);
    let bob = Bob::new(config.phi);
    let mut rngs = Streams::new(config.seed);
    let mut events = Vec::new();

    let (mut blocks, prepared_bits) = alice.prepare(config.total_blocks(), &mut rngs.alice);
    let mut transcript = Transcript {
        seed: config.seed,
        outcome: Outcome::AbortedInsufficientBlocks,
        prepared_bits,
        surviving_indices: Vec::new(),
        measured_bits: BitVector::zeros(0),
        syndrome_log: Vec::new(),
        sift_indices: Vec::new(),
        sift_mismatches: 0,
        qber: None,
        kept_bits: 0,
        public: PublicRecord::default(),
        key: None,
        oracle: None,
    };

    for stage in 1..=3u8 {
        blocks = traverse(stage, blocks, config, &mut rngs, &mut events);
        if blocks.len() < config.n_blocks {
            transcript.surviving_indices = blocks.iter().map(|b| b.block_id).collect();
            transcript.public.surviving_indices = transcript.surviving_indices.clone();
            transcript.oracle = Some(OracleRecord { events });
            return Ok(transcript);
        }
        match stage {
            1 => bob.stage2(&mut blocks),
            2 => alice.stage3(&mut blocks),
            _ => {}
        }
    }

    let surviving: Vec<usize> = blocks.iter().map(|b| b.block_id).collect();
    let readout = bob.finalize(&mut blocks, &mut rngs.bob)?;
    let alice_bits = transcript.prepared_bits.select(&surviving);
    let sifted = sift(
        &alice_bits,
        &readout.measured_bits,
        config.sift_count,
        config.t_bound,
        &mut rngs.bob,
    )?;

    transcript.sift_indices = sifted.positions().iter().map(|&p| surviving[p]).collect();
    transcript.sift_mismatches = sifted.mismatches();
    transcript.qber =
        (config.sift_count > 0).then(|| sifted.mismatches() as f64 / config.sift_count as f64);
    transcript.public.surviving_indices = surviving.clone();
    transcript.public.sift_indices = transcript.sift_indices.clone();
    transcript.public.sift_mismatches = sifted.mismatches();
    transcript.surviving_indices = surviving;
    transcript.measured_bits = readout.measured_bits;
    transcript.syndrome_log = readout.syndrome_log;
    transcript.oracle = Some(OracleRecord { events });

    match sifted {
        SiftOutcome::Abort { .. } => transcript.outcome = Outcome::AbortedQber,
        SiftOutcome::Pass {
            alice_kept,
            bob_kept,
            ..
        } => {
            transcript.kept_bits = alice_kept.len();
            let code = CssCode::steane();
            let (_, public, key) = distill(
                &alice_kept,
                &bob_kept,
                &code,
                config.security_margin,
                &mut rngs.alice,
            )?;
            transcript.public.declared = public.declared;
            transcript.public.hash_seed = Some(public.hash_seed);
            transcript.key = Some(key);
            transcript.outcome = Outcome::Completed;
        }
    }
    Ok(transcript)
}
