mod common;

use banditnav::grid::{Cell, FovSpec, GridSpec, VisibleCell};
use banditnav::sensor::{observe_synthetic, SemanticField, SyntheticConfig};
use common::qq_correlation;

#[test]
fn large_synthetic_ensembles_look_gaussian() {
    let spec = GridSpec::new(1, 1, 1.0, (0.0, 0.0)).unwrap();
    let field = SemanticField::constant(spec, 0.4);
    let visible = [VisibleCell {
        cell: Cell::new(0, 0),
        bearing: 0.1,
        range: 1.0,
        terminal: false,
    }];
    let config = SyntheticConfig {
        ensemble_size: 10_000,
        ..SyntheticConfig::default()
    };
    for seed in 0..5 {
        let (sample, _) = observe_synthetic(&field, &visible, &FovSpec::default(), &config, seed).unwrap();
        let r = qq_correlation(&sample.scores);
        assert!(r >= 0.999, "seed {seed}: r = {r}");
    }
}
