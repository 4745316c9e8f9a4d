//! Proportional allocation of a text-only sample budget across curriculum
//! stages, and deterministic interleaved training manifests.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Curriculum stage, in training order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StageId {
    S1,
    S1_5,
    S2,
    S2_5,
}

impl StageId {
    pub fn as_str(self) -> &'static str {
        match self {
            StageId::S1 => "1",
            StageId::S1_5 => "1.5",
            StageId::S2 => "2",
            StageId::S2_5 => "2.5",
        }
    }
}

impl fmt::Display for StageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StageId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(StageId::S1),
            "1.5" => Ok(StageId::S1_5),
            "2" => Ok(StageId::S2),
            "2.5" => Ok(StageId::S2_5),
            other => Err(Error::InvalidParam(format!("unknown stage id {other:?}"))),
        }
    }
}

/// Visual sample volume of one stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageVolume {
    pub stage: StageId,
    pub visual_count: u64,
}

/// Text-only integration strategy: over which trailing stages the budget
/// spreads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Tr3s,
    Tr2s,
    Tr1s,
}

impl Strategy {
    /// Stages the strategy injects text into, in curriculum order.
    pub fn stages(self) -> &'static [StageId] {
        match self {
            Strategy::Tr3s => &[StageId::S1_5, StageId::S2, StageId::S2_5],
            Strategy::Tr2s => &[StageId::S2, StageId::S2_5],
            Strategy::Tr1s => &[StageId::S2_5],
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Tr3s => "TR-3S",
            Strategy::Tr2s => "TR-2S",
            Strategy::Tr1s => "TR-1S",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "TR-3S" => Ok(Strategy::Tr3s),
            "TR-2S" => Ok(Strategy::Tr2s),
            "TR-1S" => Ok(Strategy::Tr1s),
            other => Err(Error::InvalidParam(format!("unknown strategy {other:?}"))),
        }
    }
}

/// Exact per-stage allocation of a text budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixPlan {
    pub strategy: Strategy,
    pub text_total: u64,
    pub allocations: BTreeMap<StageId, u64>,
}

impl MixPlan {
    /// Plan file body: one `stage_id<TAB>allocation` line per stage.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (stage, allocation) in &self.allocations {
            out.push_str(&format!("{stage}\t{allocation}\n"));
        }
        out
    }
}

/// Text budget from a text-to-visual ratio, rounded half-up.
pub fn scale_text_budget(ratio: f64, visual_total: u64) -> Result<u64> {
    if !(ratio.is_finite() && ratio >= 0.0) {
        return Err(Error::InvalidParam(format!(
            "ratio {ratio} must be non-negative"
        )));
    }
    Ok((ratio * visual_total as f64).round() as u64)
}

/// Distributes `text_total` across the strategy's stages proportionally to
/// their visual volumes, rounding by largest remainder so the allocations
/// sum exactly. Remainder ties break toward the earlier stage.
pub fn plan_mix(strategy: Strategy, text_total: u64, volumes: &[StageVolume]) -> Result<MixPlan> {
    let mut included = Vec::new();
    for &stage in strategy.stages() {
        let volume = volumes
            .iter()
            .find(|v| v.stage == stage)
            .ok_or_else(|| Error::MissingStage(stage.to_string()))?;
        included.push((stage, volume.visual_count));
    }
    let volume_sum: u64 = included.iter().map(|(_, v)| v).sum();
    if volume_sum == 0 {
        return Err(Error::ZeroVolumes);
    }

    // integer arithmetic keeps shares exact: floor(t*v/V) plus one extra
    // for the largest remainders t*v mod V
    let mut allocations: BTreeMap<StageId, u64> = BTreeMap::new();
    let mut remainders: Vec<(u128, usize)> = Vec::new(); // (remainder, stage index)
    let mut allocated: u64 = 0;
    for (idx, &(stage, volume)) in included.iter().enumerate() {
        let product = text_total as u128 * volume as u128;
        let floor = (product / volume_sum as u128) as u64;
        allocations.insert(stage, floor);
        allocated += floor;
        remainders.push((product % volume_sum as u128, idx));
    }
    // largest remainder first; ties keep curriculum order (stable sort on
    // descending remainder leaves equal remainders in stage order)
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut leftover = text_total - allocated;
    for (_, idx) in remainders {
        if leftover == 0 {
            break;
        }
        *allocations.get_mut(&included[idx].0).unwrap() += 1;
        leftover -= 1;
    }

    Ok(MixPlan {
        strategy,
        text_total,
        allocations,
    })
}

/// One manifest line: a visual or text sample id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ManifestEntry {
    Visual(String),
    Text(String),
}

impl fmt::Display for ManifestEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifestEntry::Visual(id) => write!(f, "V:{id}"),
            ManifestEntry::Text(id) => write!(f, "T:{id}"),
        }
    }
}

impl FromStr for ManifestEntry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some(("V", id)) => Ok(ManifestEntry::Visual(id.to_string())),
            Some(("T", id)) => Ok(ManifestEntry::Text(id.to_string())),
            _ => Err(Error::InvalidRecord(format!(
                "manifest line {s:?} lacks a V:/T: prefix"
            ))),
        }
    }
}

/// Unions all visual ids with the first `allocation` text ids and applies
/// a seeded deterministic shuffle. Identical inputs and seed produce an
/// identical manifest.
pub fn interleave_manifest(
    visual_ids: &[String],
    text_ids: &[String],
    allocation: u64,
    seed: u64,
) -> Result<Vec<ManifestEntry>> {
    if allocation > text_ids.len() as u64 {
        return Err(Error::AllocationExceedsPool {
            allocation,
            available: text_ids.len() as u64,
        });
    }
    let mut manifest: Vec<ManifestEntry> = visual_ids
        .iter()
        .map(|id| ManifestEntry::Visual(id.clone()))
        .chain(
            text_ids[..allocation as usize]
                .iter()
                .map(|id| ManifestEntry::Text(id.clone())),
        )
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    manifest.shuffle(&mut rng);
    Ok(manifest)
}
