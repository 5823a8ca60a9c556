//! A synthetic questionnaire table with a fixed significance pattern, used by
//! the examples and the `demo` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{PerceivedFeature, ScoreRow, ScoreTable};
use crate::ingest::{ConditionLabel, ExperienceLevel};

pub const DEMO_SEED: u64 = 2023;

/// Participants per experience level 0..=3.
pub const LEVEL_SIZES: [usize; 4] = [8, 9, 8, 5];

const LEVEL_JITTER: f64 = 0.12;

/// Per-condition `(mean, sd)` for conditions A..D.
fn profile(feature: PerceivedFeature) -> [(f64, f64); 4] {
    use PerceivedFeature::*;
    match feature {
        PS => [(3.6, 0.5), (4.1, 0.9), (3.1, 1.2), (2.6, 0.6)],
        AP => [(3.5, 0.7), (3.0, 0.7), (2.4, 0.7), (2.6, 0.7)],
        AM => [(3.8, 0.4), (3.3, 0.8), (2.9, 0.9), (2.4, 1.2)],
        LK => [(4.2, 0.5), (3.4, 0.8), (3.8, 1.1), (2.9, 0.4)],
        PI => [(3.35, 0.8), (3.25, 0.8), (3.3, 0.8), (3.2, 0.8)],
    }
}

fn level_boost(feature: PerceivedFeature, condition: ConditionLabel, level: u8) -> f64 {
    use ConditionLabel::*;
    match (feature, condition, level) {
        (PerceivedFeature::AP, A, 2) => 1.2,
        (PerceivedFeature::LK, A | C | D, 3) => 1.0,
        _ => 0.0,
    }
}

fn standardized(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    let m = super::mean(&z);
    let s = super::unbiased_variance(&z).sqrt();
    z.iter().map(|v| (v - m) / s).collect()
}

/// 30 participants, every one scoring all four conditions on all five
/// features. Scores are rounded to three decimals.
pub fn demo_score_table(seed: u64) -> ScoreTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut participants = Vec::new();
    for (level, &count) in LEVEL_SIZES.iter().enumerate() {
        for _ in 0..count {
            let id = format!("P{:02}", participants.len() + 1);
            participants.push((
                id,
                ExperienceLevel::new(level as u8).expect("level in range"),
            ));
        }
    }

    let mut rows = Vec::with_capacity(participants.len() * 20);
    for feature in PerceivedFeature::ALL {
        for (c, (mu, sd)) in ConditionLabel::ALL.into_iter().zip(profile(feature)) {
            for level in ExperienceLevel::ALL {
                let members: Vec<&String> = participants
                    .iter()
                    .filter(|(_, e)| *e == level)
                    .map(|(id, _)| id)
                    .collect();
                let shift = mu
                    + level_boost(feature, c, level.value())
                    + rng.random_range(-LEVEL_JITTER..=LEVEL_JITTER);
                for (id, z) in members
                    .into_iter()
                    .zip(standardized(&mut rng, LEVEL_SIZES[level.value() as usize]))
                {
                    let score = ((shift + sd * z) * 1000.0).round() / 1000.0;
                    rows.push(ScoreRow {
                        participant: id.clone(),
                        condition: c,
                        experience: level,
                        feature,
                        score,
                    });
                }
            }
        }
    }
    ScoreTable::new(rows).expect("finite scores")
}
