//! Classical post-processing after sifting: codeword-masked reconciliation,
//! coset key extraction, Toeplitz privacy amplification and the
//! collision-entropy bounds that size the final key.

use rand::Rng;
use serde::Serialize;

use crate::binlin::BitVector;
use crate::codes::{CssCode, LinearCode};
use crate::error::{Error, Result};

/// Per-chunk reconciliation record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReconciliationBlock {
    /// Alice's kept bits.
    pub x: BitVector,
    /// Bob's kept bits, `x ⊕ ε`.
    pub y: BitVector,
    /// Alice's random C1 codeword.
    pub v: BitVector,
    /// Public value `x ⊕ v`.
    pub declared: BitVector,
    /// Bob's estimate of `v`; `None` when decoding was ambiguous.
    pub recovered_v: Option<BitVector>,
}

/// Alice draws `v` uniformly from C1 and publishes `x ⊕ v`.
pub fn alice_declare<R: Rng + ?Sized>(
    x: &BitVector,
    c1: &LinearCode,
    rng: &mut R,
) -> Result<(BitVector, BitVector)> {
    if x.len() != c1.n() {
        return Err(Error::Dimension {
            expected: c1.n(),
            found: x.len(),
        });
    }
    let message = BitVector::from_bools((0..c1.k()).map(|_| rng.gen::<bool>()));
    let v = c1.encode(&message)?;
    let declared = x.xor(&v)?;
    Ok((v, declared))
}

/// Bob removes the declared mask from his bits and decodes `v ⊕ ε` to the
/// nearest C1 codeword.
pub fn bob_recover(y: &BitVector, declared: &BitVector, c1: &LinearCode) -> Result<BitVector> {
    if y.len() != c1.n() {
        return Err(Error::Dimension {
            expected: c1.n(),
            found: y.len(),
        });
    }
    let noisy_v = y.xor(declared)?;
    Ok(c1.decode(&noisy_v)?.codeword)
}

/// Label of the coset `v + C2` inside C1, `k1 − k2` bits long.
pub fn coset_key(v: &BitVector, code: &CssCode) -> Result<BitVector> {
    code.coset_label(v)
}

/// Seed of a Toeplitz matrix mapping `input_len` bits to `output_len` bits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HashSeed {
    input_len: usize,
    output_len: usize,
    bits: BitVector,
}

impl HashSeed {
    pub fn new(input_len: usize, output_len: usize, bits: BitVector) -> Result<Self> {
        let want = Self::seed_len(input_len, output_len);
        if bits.len() != want {
            return Err(Error::Dimension {
                expected: want,
                found: bits.len(),
            });
        }
        Ok(Self {
            input_len,
            output_len,
            bits,
        })
    }

    pub fn random<R: Rng + ?Sized>(input_len: usize, output_len: usize, rng: &mut R) -> Self {
        let len = Self::seed_len(input_len, output_len);
        let bits = BitVector::from_bools((0..len).map(|_| rng.gen::<bool>()));
        Self {
            input_len,
            output_len,
            bits,
        }
    }

    /// `L + m − 1`, or 0 when either side is empty.
    pub fn seed_len(input_len: usize, output_len: usize) -> usize {
        if input_len == 0 || output_len == 0 {
            0
        } else {
            input_len + output_len - 1
        }
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn output_len(&self) -> usize {
        self.output_len
    }

    pub fn bits(&self) -> &BitVector {
        &self.bits
    }

    /// Toeplitz entry `T[i][j] = seed[i − j + L − 1]`.
    fn entry(&self, i: usize, j: usize) -> bool {
        self.bits.get(i + self.input_len - 1 - j)
    }
}

/// `Toeplitz(seed) · w` over GF(2).
pub fn privacy_amplify(w: &BitVector, seed: &HashSeed, m: usize) -> Result<BitVector> {
    if seed.input_len != w.len() {
        return Err(Error::Dimension {
            expected: seed.input_len,
            found: w.len(),
        });
    }
    if seed.output_len != m {
        return Err(Error::Dimension {
            expected: seed.output_len,
            found: m,
        });
    }
    Ok(BitVector::from_bools((0..m).map(|i| {
        (0..w.len())
            .filter(|&j| w.get(j) && seed.entry(i, j))
            .count()
            % 2
            == 1
    })))
}

/// Finite probability distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Accepts nonnegative probabilities summing to 1 within 1e−12.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidArgument("empty distribution".into()));
        }
        if probs.iter().any(|&p| p.is_nan() || p < 0.0) {
            return Err(Error::InvalidArgument("negative probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { probs })
    }

    pub fn uniform(outcomes: usize) -> Result<Self> {
        if outcomes == 0 {
            return Err(Error::InvalidArgument("empty distribution".into()));
        }
        Self::new(vec![1.0 / outcomes as f64; outcomes])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Shannon entropy in bits.
    pub fn shannon_entropy(&self) -> f64 {
        -self
            .probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.log2())
            .sum::<f64>()
    }
}

/// `H_c(X) = −log2 Σ p(x)²`.
pub fn collision_entropy(dist: &Distribution) -> f64 {
    let collision: f64 = dist.probs.iter().map(|p| p * p).sum();
    let h = -collision.log2();
    // −log2(1) is −0.0
    if h == 0.0 {
        0.0
    } else {
        h
    }
}

/// Floor on the collision entropy of an `m`-bit hashed key, given input
/// collision entropy `d`: `m − 2^(m − d)`.
pub fn pa_bound(m: usize, d: f64) -> f64 {
    m as f64 - (m as f64 - d).exp2()
}

/// Collision entropy remaining after a side message with Shannon entropy
/// `shannon_leak` is disclosed: `hc − H(E)`.
pub fn leak_adjusted_bound(hc: f64, shannon_leak: f64) -> Result<f64> {
    if shannon_leak < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "negative leak {shannon_leak}"
        )));
    }
    Ok(hc - shannon_leak)
}

/// Public messages of the post-processing chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PublicDistillation {
    pub declared: Vec<BitVector>,
    pub hash_seed: HashSeed,
}

/// Both parties' view of the distilled key.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KeyRecord {
    pub alice_raw_key: BitVector,
    pub bob_raw_key: BitVector,
    pub alice_key: BitVector,
    pub bob_key: BitVector,
    /// Chunks Bob could not decode; his key bits for them are zero.
    pub decode_failures: usize,
    /// Trailing kept bits that did not fill a whole chunk.
    pub discarded_bits: usize,
    pub agreed: bool,
}

/// Runs reconciliation and privacy amplification over sifted strings.
///
/// The strings are cut into consecutive `n`-bit chunks (a short tail is
/// dropped). For each chunk Alice masks her bits with a random C1
/// codeword, Bob strips the mask and decodes, and both take the coset
/// label of the codeword. The concatenated labels are hashed down to
/// `len − security_margin` bits with a Toeplitz seed drawn by Alice.
pub fn distill<R: Rng + ?Sized>(
    alice_bits: &BitVector,
    bob_bits: &BitVector,
    code: &CssCode,
    security_margin: usize,
    alice_rng: &mut R,
) -> Result<(Vec<ReconciliationBlock>, PublicDistillation, KeyRecord)> {
    if alice_bits.len() != bob_bits.len() {
        return Err(Error::Dimension {
            expected: alice_bits.len(),
            found: bob_bits.len(),
        });
    }
    let n = code.n();
    let chunks = alice_bits.len() / n;
    let label_len = code.k();
    let mut blocks = Vec::with_capacity(chunks);
    let mut alice_labels = Vec::with_capacity(chunks);
    let mut bob_labels = Vec::with_capacity(chunks);
    let mut decode_failures = 0;
    for c in 0..chunks {
        let x = alice_bits.slice(c * n, (c + 1) * n);
        let y = bob_bits.slice(c * n, (c + 1) * n);
        let (v, declared) = alice_declare(&x, code.c1(), alice_rng)?;
        let recovered = match bob_recover(&y, &declared, code.c1()) {
            Ok(r) => Some(r),
            Err(Error::DecodeFailure(_)) => None,
            Err(e) => return Err(e),
        };
        alice_labels.push(coset_key(&v, code)?);
        bob_labels.push(match &recovered {
            Some(r) => coset_key(r, code)?,
            None => {
                decode_failures += 1;
                BitVector::zeros(label_len)
            }
        });
        blocks.push(ReconciliationBlock {
            x,
            y,
            v,
            declared,
            recovered_v: recovered,
        });
    }
    let alice_raw_key = BitVector::concat(&alice_labels);
    let bob_raw_key = BitVector::concat(&bob_labels);
    let m = alice_raw_key.len().saturating_sub(security_margin);
    let hash_seed = HashSeed::random(alice_raw_key.len(), m, alice_rng);
    let alice_key = privacy_amplify(&alice_raw_key, &hash_seed, m)?;
    let bob_key = privacy_amplify(&bob_raw_key, &hash_seed, m)?;
    let agreed = decode_failures == 0 && alice_raw_key == bob_raw_key;
    let public = PublicDistillation {
        declared: blocks.iter().map(|b| b.declared.clone()).collect(),
        hash_seed,
    };
    let record = KeyRecord {
        alice_raw_key,
        bob_raw_key,
        alice_key,
        bob_key,
        decode_failures,
        discarded_bits: alice_bits.len() - chunks * n,
        agreed,
    };
    Ok((blocks, public, record))
}
