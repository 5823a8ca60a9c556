//! Levene, then classic or Welch ANOVA, on the bundled questionnaire table.

use bvpkit::ingest::ConditionLabel;
use bvpkit::stats::{
    experience_analysis, feature_condition_analysis, PerceivedFeature, ScoreTable,
};

const SCORES: &str = include_str!("../data/demo_scores.csv");

fn main() -> bvpkit::Result<()> {
    let table = ScoreTable::from_csv(SCORES)?;
    println!("{} score rows", table.len());
    println!("feature  levene_p  method  F        p        ordering");
    for f in PerceivedFeature::ALL {
        let g = feature_condition_analysis(&table, f, 0.05)?;
        println!(
            "{f:<8} {:<9.4} {:<7} {:<8.3} {:<8.4} {}",
            g.variance.test.p_value,
            g.anova.method,
            g.anova.f_statistic,
            g.anova.p_value,
            g.anova.ordering_string()
        );
    }

    let g = experience_analysis(&table, PerceivedFeature::AP, ConditionLabel::A, 0.05)?;
    println!(
        "AP in condition A by experience: p {:.4}, ordering {}",
        g.anova.p_value,
        g.anova.ordering_string()
    );
    Ok(())
}
