//! Aggregate statistics over session transcripts.

use qsdc_core::{Outcome, Transcript};
use serde::Serialize;

use crate::experiment::{Report, Scenario};
use crate::{CliError, Result};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub sessions: usize,
    pub completed: usize,
    pub aborted_qber: usize,
    pub aborted_insufficient_blocks: usize,
    pub abort_rate: f64,
    /// Wilson score interval, 95%.
    pub abort_rate_ci: [f64; 2],
    /// Over sessions that reached sifting.
    pub qber_mean: Option<f64>,
    pub qber_std: Option<f64>,
    /// Sessions whose final keys matched, over all sessions.
    pub key_agreement_rate: f64,
    /// Final key bits from agreeing sessions per prepared block.
    pub key_rate: f64,
    /// Abort rate when an eavesdropper was active.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detection_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detection_rate_ci: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupSummary {
    pub scenario: Scenario,
    pub label: String,
    pub summary: Summary,
}

pub fn wilson_interval(successes: usize, trials: usize) -> [f64; 2] {
    if trials == 0 {
        return [0.0, 1.0];
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = p + z2 / (2.0 * n);
    let spread = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    [
        ((centre - spread) / denom).clamp(0.0, 1.0),
        ((centre + spread) / denom).clamp(0.0, 1.0),
    ]
}

pub fn summarize_sessions(sessions: &[Transcript], eve_active: bool) -> Result<Summary> {
    if sessions.is_empty() {
        return Err(CliError::Runtime("no sessions to summarize".into()));
    }
    let count = |o: Outcome| sessions.iter().filter(|t| t.outcome == o).count();
    let completed = count(Outcome::Completed);
    let aborted_qber = count(Outcome::AbortedQber);
    let aborted_insufficient_blocks = count(Outcome::AbortedInsufficientBlocks);
    let aborts = aborted_qber + aborted_insufficient_blocks;
    let n = sessions.len();

    let qbers: Vec<f64> = sessions.iter().filter_map(|t| t.qber).collect();
    let (qber_mean, qber_std) = if qbers.is_empty() {
        (None, None)
    } else {
        let m = qbers.iter().sum::<f64>() / qbers.len() as f64;
        let var = qbers.iter().map(|q| (q - m) * (q - m)).sum::<f64>() / qbers.len() as f64;
        (Some(m), Some(var.sqrt()))
    };

    let agreed: Vec<&Transcript> = sessions.iter().filter(|t| t.key_agreed()).collect();
    let key_bits: usize = agreed
        .iter()
        .filter_map(|t| t.key.as_ref())
        .map(|k| k.alice_key.len())
        .sum();
    let prepared: usize = sessions.iter().map(|t| t.prepared_bits.len()).sum();

    let abort_rate = aborts as f64 / n as f64;
    let ci = wilson_interval(aborts, n);
    Ok(Summary {
        sessions: n,
        completed,
        aborted_qber,
        aborted_insufficient_blocks,
        abort_rate,
        abort_rate_ci: ci,
        qber_mean,
        qber_std,
        key_agreement_rate: agreed.len() as f64 / n as f64,
        key_rate: if prepared == 0 {
            0.0
        } else {
            key_bits as f64 / prepared as f64
        },
        detection_rate: eve_active.then_some(abort_rate),
        detection_rate_ci: eve_active.then_some(ci),
    })
}

/// Pools sessions from reports of one scenario by group label, in order of
/// first appearance.
pub fn summarize(reports: &[Report]) -> Result<Vec<GroupSummary>> {
    let first = reports
        .first()
        .ok_or_else(|| CliError::Runtime("no reports to summarize".into()))?;
    if let Some(other) = reports.iter().find(|r| r.scenario != first.scenario) {
        return Err(CliError::Runtime(format!(
            "cannot mix {:?} and {:?} reports",
            first.scenario, other.scenario
        )));
    }
    let mut pooled: Vec<(String, bool, Vec<Transcript>)> = Vec::new();
    for group in reports.iter().flat_map(|r| &r.groups) {
        match pooled
            .iter_mut()
            .find(|(label, _, _)| *label == group.label)
        {
            Some((_, _, sessions)) => sessions.extend(group.sessions.iter().cloned()),
            None => pooled.push((
                group.label.clone(),
                group.eve_active,
                group.sessions.clone(),
            )),
        }
    }
    pooled
        .into_iter()
        .map(|(label, eve, sessions)| {
            Ok(GroupSummary {
                scenario: first.scenario,
                label,
                summary: summarize_sessions(&sessions, eve)?,
            })
        })
        .collect()
}
