use std::collections::BTreeMap;

use concept_transfer::corpus::{CorpusId, Document, VenueLinkTable};
use concept_transfer::features::{group_comparison, FeatureConfig, FeatureMatrix};
use concept_transfer::graph::SnapshotMode;
use concept_transfer::phrase::MinerConfig;
use concept_transfer::pipeline::{build_study_registry, mine_papers, Resources, StudyFrame};
use concept_transfer::registry::RegistryConfig;
use concept_transfer::synth::{generate, Knobs, ScenarioConfig};
use concept_transfer::FEATURE_NAMES;

fn scaled(factor: usize) -> ScenarioConfig {
    ScenarioConfig {
        n_concepts: 600 * factor,
        n_academic_authors: 6000 * factor,
        n_industry_authors: 1500 * factor,
        n_venues: 90 * factor,
        patent_slots_per_year: 1500 * factor,
        knobs: Knobs {
            hype: 1.0,
            ..Knobs::default()
        },
        ..ScenarioConfig::demo()
    }
}

/// (gap between group means of adopter size, its standard error).
fn adopter_gap(config: &ScenarioConfig) -> (f64, f64) {
    let s = generate(config).unwrap();
    let papers: Vec<&Document> = s.papers.iter().collect();
    let res = Resources::default();
    let vocab = mine_papers(&papers, &MinerConfig::default(), &res.stoplists).unwrap();
    let mut targets = BTreeMap::new();
    targets.insert(CorpusId::Patents, s.patents.iter().collect::<Vec<_>>());
    let registry =
        build_study_registry(&papers, &targets, &vocab, &res.taxonomy, &RegistryConfig::default(), None).unwrap();
    let cutoff = registry.burn_in.as_ref().unwrap().cutoff_year;
    let frame = StudyFrame::new(&registry, &papers, &vocab, CorpusId::Patents, cutoff + 1).unwrap();
    let graph = frame.graph(SnapshotMode::Cumulative).unwrap();
    let matrix = frame
        .features(&graph, &VenueLinkTable::default(), &res, FeatureConfig::default())
        .unwrap();
    // mining also turns up random filler bigrams; their share shrinks as the
    // corpus grows, so compare planted concepts only
    let keep: Vec<usize> = (0..matrix.concepts.len())
        .filter(|&c| s.ground_truth.get(&matrix.concepts[c]).is_some())
        .collect();
    assert_eq!(keep.len(), config.n_concepts);
    let planted = FeatureMatrix {
        concepts: keep.iter().map(|&c| matrix.concepts[c].clone()).collect(),
        rows: keep.iter().map(|&c| matrix.rows[c].clone()).collect(),
        ..matrix
    };
    let emergence: Vec<i32> = keep.iter().map(|&c| frame.emergence[c]).collect();
    let transferred: Vec<bool> = keep.iter().map(|&c| frame.transfer[c].is_some()).collect();
    let g = group_comparison(&planted, &emergence, &transferred)
        .into_iter()
        .find(|g| g.feature == FEATURE_NAMES[0])
        .unwrap();
    let gap = g.mean_transferred - g.mean_non_transferred;
    (gap, gap / g.ttest.unwrap().t)
}

#[test]
fn doubling_every_pool_keeps_the_planted_gap() {
    let (small, se_small) = adopter_gap(&scaled(1));
    let (large, se_large) = adopter_gap(&scaled(2));
    assert!(small > 3.0 * se_small && large > 3.0 * se_large, "{small} {large}");
    let tolerance = 3.0 * (se_small.powi(2) + se_large.powi(2)).sqrt();
    assert!((small - large).abs() < tolerance, "gap {small:.3} vs {large:.3}, tolerance {tolerance:.3}");
}
