//! Regenerates the frozen fixtures: `cargo test --test fixture_gen -- --ignored`.

mod common;

use std::collections::BTreeMap;

use homeo_energy::analysis::{self, AnalysisConfig};
use homeo_energy::chordarc;
use homeo_energy::circle_map::{catalog, MapSpec};
use homeo_energy::energy::ConditionTag;
use serde_json::json;

const MARGIN: f64 = 1e-9;

fn fixtures() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

#[test]
#[ignore]
fn generate_ratio_windows() {
    let mut families = BTreeMap::new();
    for (name, map) in catalog() {
        let cells = common::cell_series(&map, &common::WINDOW_LAMBDAS);
        let mut per_lambda = BTreeMap::new();
        for (lambda, cell) in common::WINDOW_LAMBDAS.iter().zip(&cells) {
            let windows: BTreeMap<String, [f64; 2]> = common::ratio_windows(cell)
                .into_iter()
                .map(|(k, [lo, hi])| (k, [lo * (1.0 - MARGIN), hi * (1.0 + MARGIN)]))
                .collect();
            let classes: BTreeMap<String, String> = cell
                .iter()
                .map(|s| (s.tag.to_string(), format!("{:?}", s.classification.unwrap()).to_lowercase()))
                .collect();
            per_lambda.insert(lambda.to_string(), json!({ "windows": windows, "classifications": classes }));
        }
        families.insert(name, per_lambda);
    }
    let doc = json!({
        "disk_levels": [*common::DISK_LEVELS.start(), *common::DISK_LEVELS.end()],
        "dyadic_levels": [*common::DYADIC_LEVELS.start(), *common::DYADIC_LEVELS.end()],
        "relative_margin": MARGIN,
        "families": families,
    });
    std::fs::write(fixtures().join("ratio_windows.json"), serde_json::to_string_pretty(&doc).unwrap() + "\n").unwrap();
}

#[test]
#[ignore]
fn generate_constructor_and_verdict_fixtures() {
    let p = chordarc::cusp_domain(64).unwrap();
    let cusp = json!({ "resolution": 64, "vertices": p.len(), "perimeter": p.perimeter() });
    std::fs::write(fixtures().join("cusp_64.json"), serde_json::to_string_pretty(&cusp).unwrap() + "\n").unwrap();

    let spec = MapSpec::from_json(r#"{"kind": "smoothed_cantor", "params": {"stage": 8, "slope_floor": 1e-6}}"#).unwrap();
    let mut cfg = AnalysisConfig::new(spec);
    cfg.lambdas = vec![2.0];
    cfg.conditions = vec![ConditionTag::IiiDyadic, ConditionTag::Iv, ConditionTag::V];
    let report = analysis::analyze(&cfg).unwrap();
    let doc = json!({
        "config": cfg,
        "verdict": report.verdict,
        "classifications": report.cells[0].conditions.iter()
            .map(|o| (o.condition.to_string(), o.classification()))
            .collect::<BTreeMap<_, _>>(),
    });
    std::fs::write(fixtures().join("cantor_stage8.json"), serde_json::to_string_pretty(&doc).unwrap() + "\n").unwrap();
}
