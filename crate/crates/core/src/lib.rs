//! Simulator for CSS-protected three-stage quantum secure direct
//! communication.
//!
//! Logical bits are encoded into Steane [[7,1,3]] blocks, carried through
//! three rotation-protected transmissions over noisy, lossy and possibly
//! tapped channels, corrected from their stabilizer syndromes and read out.
//! The classical tail (sifting, codeword-masked reconciliation, coset key
//! extraction, Toeplitz privacy amplification) and the associated rate and
//! entropy bounds are included.
//!
//! Module map:
//! - [`binlin`]: GF(2) vectors, matrices, echelon forms and coset labels
//! - [`codes`]: linear codes, CSS pairs and bound formulas
//! - [`qsim`]: dense state-vector simulator
//! - [`steane`]: logical encoding, syndrome extraction and correction
//! - [`channel`]: noise, loss and eavesdropping
//! - [`protocol`]: the three-stage session and sifting
//! - [`reconcile`]: reconciliation, key extraction, privacy amplification

pub mod binlin;
pub mod channel;
pub mod codes;
pub mod error;
pub mod protocol;
pub mod qsim;
pub mod reconcile;
pub mod steane;

pub use binlin::{BitMatrix, BitVector};
pub use codes::{CssCode, LinearCode};
pub use error::{Error, Result};
pub use protocol::{run_session, Outcome, SessionConfig, Transcript};
