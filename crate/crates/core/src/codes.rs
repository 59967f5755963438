//! Classical binary linear codes, the CSS construction built from a nested
//! pair of them, and the rate/distance bounds used to size such codes.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::binlin::{BitMatrix, BitVector, CosetLabeler, RowEchelon};
use crate::error::{Error, Result};

/// Largest dimension for which codewords are enumerated exhaustively.
const MAX_ENUM_DIM: usize = 24;
/// Largest redundancy `n − k` for which a full syndrome table is built.
const MAX_TABLE_REDUNDANCY: usize = 20;

/// Binary linear `[n, k, d]` code with generator `G` (k×n) and parity check
/// `H` ((n−k)×n).
#[derive(Clone, Debug)]
pub struct LinearCode {
    n: usize,
    k: usize,
    d: usize,
    generator: BitMatrix,
    parity_check: BitMatrix,
    echelon: RowEchelon,
    decoder: OnceLock<Arc<SyndromeTable>>,
}

impl LinearCode {
    /// Builds a code from a full-rank generator matrix. The parity-check
    /// matrix is the generator's null space and the minimum distance is
    /// found by scanning every nonzero codeword.
    ///
    /// The zero code (no rows) gets `d = n + 1` since it has no nonzero
    /// codeword.
    pub fn from_generator(generator: BitMatrix) -> Result<Self> {
        let n = generator.num_cols();
        let k = generator.num_rows();
        let echelon = generator.echelon();
        if echelon.rank() != k {
            return Err(Error::RankDeficient {
                rows: k,
                rank: echelon.rank(),
            });
        }
        if k > MAX_ENUM_DIM {
            return Err(Error::Unsupported(format!(
                "minimum distance scan over 2^{k} codewords"
            )));
        }
        let parity_check = generator.null_space();
        let mut code = Self {
            n,
            k,
            d: n + 1,
            generator,
            parity_check,
            echelon,
            decoder: OnceLock::new(),
        };
        code.d = code
            .codewords()
            .skip(1)
            .map(|c| c.weight())
            .min()
            .unwrap_or(n + 1);
        Ok(code)
    }

    /// Hamming [7,4,3] code whose parity checks are the qubit sets
    /// {4,5,6,7}, {2,3,6,7}, {1,3,5,7}: column `j` of `H` is `j` in binary.
    pub fn hamming_7_4() -> Self {
        let g = BitMatrix::from_strs(&["1110000", "1001100", "0101010", "1101001"])
            .expect("static generator");
        Self::from_generator(g).expect("Hamming generator has full rank")
    }

    /// `[n, 1, n]` repetition code.
    pub fn repetition(n: usize) -> Self {
        let g = BitMatrix::from_rows(n, vec![BitVector::ones(n)]).expect("one row of width n");
        Self::from_generator(g).expect("nonzero row has rank one")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of errors the code is guaranteed to correct, `⌊(d−1)/2⌋`.
    pub fn t(&self) -> usize {
        self.d.saturating_sub(1) / 2
    }

    pub fn generator(&self) -> &BitMatrix {
        &self.generator
    }

    pub fn parity_check(&self) -> &BitMatrix {
        &self.parity_check
    }

    /// The dual code, generated by this code's parity-check matrix.
    pub fn dual(&self) -> Result<LinearCode> {
        LinearCode::from_generator(self.parity_check.clone())
    }

    /// `message · G`.
    pub fn encode(&self, message: &BitVector) -> Result<BitVector> {
        self.generator.transpose().mat_vec(message)
    }

    /// All `2^k` codewords, in order of the message read as an integer.
    pub fn codewords(&self) -> impl Iterator<Item = BitVector> + '_ {
        let gt = self.generator.transpose();
        (0..1u64 << self.k).map(move |m| {
            gt.mat_vec(&BitVector::from_u64(m, self.k))
                .expect("message width equals k")
        })
    }

    pub fn syndrome(&self, v: &BitVector) -> Result<BitVector> {
        self.parity_check.mat_vec(v)
    }

    pub fn contains(&self, v: &BitVector) -> Result<bool> {
        self.echelon.contains(v)
    }

    /// True when every codeword of `other` is a codeword of `self`.
    pub fn contains_code(&self, other: &LinearCode) -> Result<bool> {
        if other.n != self.n {
            return Ok(false);
        }
        for row in other.generator.rows() {
            if !self.contains(row)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Nearest-codeword decoding through a minimum-weight syndrome table.
    /// Syndromes whose lightest error pattern is not unique are reported as
    /// [`Error::DecodeFailure`] instead of being broken arbitrarily.
    pub fn decode(&self, received: &BitVector) -> Result<Decoded> {
        if received.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: received.len(),
            });
        }
        let table = self.syndrome_table()?;
        let s = self.syndrome(received)?;
        match table.leaders.get(&s) {
            Some(Leader::Unique(e)) => Ok(Decoded {
                codeword: received.xor(e)?,
                error_weight: e.weight(),
            }),
            Some(Leader::Tied) | None => Err(Error::DecodeFailure(s.to_string())),
        }
    }

    fn syndrome_table(&self) -> Result<Arc<SyndromeTable>> {
        if let Some(t) = self.decoder.get() {
            return Ok(t.clone());
        }
        let table = Arc::new(SyndromeTable::build(self)?);
        Ok(self.decoder.get_or_init(|| table).clone())
    }
}

impl PartialEq for LinearCode {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.echelon == other.echelon
    }
}

/// Result of nearest-codeword decoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoded {
    pub codeword: BitVector,
    /// Weight of the error pattern that was removed.
    pub error_weight: usize,
}

#[derive(Clone, Debug)]
enum Leader {
    Unique(BitVector),
    Tied,
}

#[derive(Debug)]
struct SyndromeTable {
    leaders: HashMap<BitVector, Leader>,
}

impl SyndromeTable {
    fn build(code: &LinearCode) -> Result<Self> {
        let r = code.n - code.k;
        if r > MAX_TABLE_REDUNDANCY {
            return Err(Error::Unsupported(format!(
                "syndrome table with 2^{r} entries"
            )));
        }
        let total = 1usize << r;
        let mut leaders: HashMap<BitVector, Leader> = HashMap::with_capacity(total);
        leaders.insert(
            BitVector::zeros(r),
            Leader::Unique(BitVector::zeros(code.n)),
        );
        for weight in 1..=code.n {
            if leaders.len() == total {
                break;
            }
            let mut level: HashMap<BitVector, Leader> = HashMap::new();
            for_each_combination(code.n, weight, |positions| {
                let mut e = BitVector::zeros(code.n);
                for &p in positions {
                    e.set(p, true);
                }
                let s = code.syndrome(&e).expect("error has width n");
                if leaders.contains_key(&s) {
                    return;
                }
                level
                    .entry(s)
                    .and_modify(|l| *l = Leader::Tied)
                    .or_insert(Leader::Unique(e));
            });
            leaders.extend(level);
        }
        Ok(Self { leaders })
    }
}

/// Calls `f` with every `k`-subset of `0..n` in lexicographic order.
fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// CSS code built from nested classical codes `C2 ⊆ C1`, with
/// `k = k1 − k2` and `d = min(d1, d2)`.
#[derive(Clone, Debug)]
pub struct CssCode {
    c1: LinearCode,
    c2: LinearCode,
    labeler: CosetLabeler,
}

impl CssCode {
    pub fn new(c1: LinearCode, c2: LinearCode) -> Result<Self> {
        if c1.n != c2.n {
            return Err(Error::Dimension {
                expected: c1.n,
                found: c2.n,
            });
        }
        let labeler = CosetLabeler::new(&c1.generator, &c2.generator)?;
        Ok(Self { c1, c2, labeler })
    }

    /// Steane [[7,1,3]]: Hamming [7,4,3] over its [7,3,4] dual.
    pub fn steane() -> Self {
        let c1 = LinearCode::hamming_7_4();
        let c2 = c1.dual().expect("dual of Hamming has full rank");
        Self::new(c1, c2).expect("Hamming dual is contained in Hamming")
    }

    pub fn c1(&self) -> &LinearCode {
        &self.c1
    }

    pub fn c2(&self) -> &LinearCode {
        &self.c2
    }

    pub fn n(&self) -> usize {
        self.c1.n
    }

    pub fn k(&self) -> usize {
        self.c1.k - self.c2.k
    }

    pub fn d(&self) -> usize {
        self.c1.d.min(self.c2.d)
    }

    pub fn t(&self) -> usize {
        self.d().saturating_sub(1) / 2
    }

    /// Set when `C1 == C2`: the pair is accepted but encodes nothing.
    pub fn is_degenerate(&self) -> bool {
        self.k() == 0
    }

    /// `R = (k1 − k2) / n`.
    pub fn code_rate(&self) -> f64 {
        self.k() as f64 / self.n() as f64
    }

    pub fn coset_representatives(&self) -> Result<Vec<BitVector>> {
        self.labeler.representatives()
    }

    /// The `(k1 − k2)`-bit label of the coset `v + C2`.
    pub fn coset_label(&self, v: &BitVector) -> Result<BitVector> {
        self.labeler.label(v)
    }

    /// For each coset label, the C1 codewords in that coset (sorted). The
    /// uniform superposition over a list is the matching logical basis
    /// state.
    pub fn basis_states(&self) -> Result<Vec<(BitVector, Vec<BitVector>)>> {
        if self.n() > 10 {
            return Err(Error::Unsupported(format!(
                "basis state enumeration for n = {}",
                self.n()
            )));
        }
        let inner: Vec<BitVector> = self.c2.codewords().collect();
        self.coset_representatives()?
            .into_iter()
            .map(|rep| {
                let label = self.labeler.label(&rep)?;
                let mut members = inner
                    .iter()
                    .map(|c| c.xor(&rep))
                    .collect::<Result<Vec<_>>>()?;
                members.sort();
                Ok((label, members))
            })
            .collect()
    }
}

/// `C(n, k)` in exact integer arithmetic.
pub fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

/// `Σ_{i=0}^{radius} C(n, i)`.
pub fn hamming_ball(n: u32, radius: u32) -> u128 {
    (0..=radius.min(n)).map(|i| binomial(n, i)).sum()
}

fn check_distance(n: usize, d: usize, name: &str) -> Result<()> {
    if n > 126 {
        return Err(Error::Unsupported(format!("bounds for n = {n}")));
    }
    if d < 1 || d > n {
        return Err(Error::InvalidArgument(format!(
            "{name} = {d} must lie in 1..={n}"
        )));
    }
    Ok(())
}

/// Gilbert–Varshamov lower bound on the dimension of an `[n, k, d]` code:
/// `n − log2 Σ_{i<d} C(n, i)`.
pub fn gv_bound_k(n: usize, d: usize) -> Result<f64> {
    check_distance(n, d, "d")?;
    let ball = hamming_ball(n as u32, d as u32 - 1);
    Ok(n as f64 - (ball as f64).log2())
}

/// Lower bound on the CSS rate:
/// `(1/n)·log2( Σ_{i<d2} C(n,i) / Σ_{i<d1} C(n,i) )`.
pub fn css_rate_bound(n: usize, d1: usize, d2: usize) -> Result<f64> {
    check_distance(n, d1, "d1")?;
    check_distance(n, d2, "d2")?;
    let b1 = hamming_ball(n as u32, d1 as u32 - 1) as f64;
    let b2 = hamming_ball(n as u32, d2 as u32 - 1) as f64;
    Ok((b2.log2() - b1.log2()) / n as f64)
}

/// Probability that exactly `t` of `n` independent positions are hit when
/// each fails with probability `p`.
pub fn t_error_probability(n: usize, t: usize, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
    }
    if t > n {
        return Err(Error::InvalidArgument(format!("t = {t} exceeds n = {n}")));
    }
    if n > 126 {
        return Err(Error::Unsupported(format!("n = {n}")));
    }
    let c = binomial(n as u32, t as u32) as f64;
    Ok(c * p.powi(t as i32) * (1.0 - p).powi((n - t) as i32))
}

/// One row of a bound report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub d1: usize,
    pub d2: usize,
    pub rate_bound: f64,
    pub gv_k1: f64,
    pub gv_k2: f64,
}

impl BoundReport {
    pub fn compute(n: usize, d1: usize, d2: usize) -> Result<Self> {
        Ok(Self {
            n,
            d1,
            d2,
            rate_bound: css_rate_bound(n, d1, d2)?,
            gv_k1: gv_bound_k(n, d1)?,
            gv_k2: gv_bound_k(n, d2)?,
        })
    }
}
