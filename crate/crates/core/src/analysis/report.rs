use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::AnalysisConfig;
use crate::circle_map::CircleHomeomorphism;
use crate::energy::{self, Classification, ConditionTag, EnergyReport};
use crate::error::{Error, Result};
use crate::logkernel::{self, LogIntegralResult};
use crate::poisson::{CellSamples, HarmonicExtension};

pub const SCHEMA_VERSION: u32 = 1;
pub const REPORT_FILE: &str = "report.json";
pub const TERMS_FILE: &str = "terms.csv";
pub const RATIOS_FILE: &str = "ratios.csv";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Failed,
}

/// Result of one condition at one lambda.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionOutcome {
    pub condition: ConditionTag,
    pub status: Status,
    pub report: Option<EnergyReport>,
    /// Present for the two (iii) routes.
    pub log_integral: Option<LogIntegralResult>,
    /// Error text with module provenance when `status` is `failed`.
    pub error: Option<String>,
    /// True when the failure is a non-finite intermediate.
    #[serde(default)]
    pub non_finite: bool,
}

impl ConditionOutcome {
    pub fn classification(&self) -> Option<Classification> {
        self.report.as_ref().and_then(|r| r.classification)
    }
}

/// `S_J(numerator) / S_J(denominator)` over the common truncation levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatioTable {
    pub numerator: ConditionTag,
    pub denominator: ConditionTag,
    pub levels: Vec<u32>,
    pub ratios: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    AllFiniteConsistent,
    AllDivergentConsistent,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaCell {
    pub lambda: f64,
    pub conditions: Vec<ConditionOutcome>,
    pub ratio_tables: Vec<RatioTable>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceReport {
    pub schema_version: u32,
    pub generator: String,
    pub deterministic: bool,
    pub config: AnalysisConfig,
    pub cells: Vec<LambdaCell>,
    pub verdict: Verdict,
}

/// Verdict over the classified conditions. Failed conditions force `mixed`;
/// conditions without a classification (too few levels, direct route) abstain.
pub fn verdict_of(outcomes: &[ConditionOutcome]) -> Verdict {
    if outcomes.iter().any(|o| o.status == Status::Failed) {
        return Verdict::Mixed;
    }
    let classes: Vec<Classification> = outcomes.iter().filter_map(|o| o.classification()).collect();
    if classes.is_empty() {
        Verdict::Mixed
    } else if classes.iter().all(|c| *c == Classification::Convergent) {
        Verdict::AllFiniteConsistent
    } else if classes.iter().all(|c| *c == Classification::Divergent) {
        Verdict::AllDivergentConsistent
    } else {
        Verdict::Mixed
    }
}

fn overall_verdict(cells: &[LambdaCell]) -> Verdict {
    match cells.first() {
        Some(first) if cells.iter().all(|c| c.verdict == first.verdict) => first.verdict,
        _ => Verdict::Mixed,
    }
}

pub fn ratio_tables(outcomes: &[ConditionOutcome]) -> Vec<RatioTable> {
    let ok: Vec<&EnergyReport> =
        outcomes.iter().filter(|o| o.status == Status::Ok).filter_map(|o| o.report.as_ref()).collect();
    let mut tables = Vec::new();
    for (a, ra) in ok.iter().enumerate() {
        for rb in &ok[a + 1..] {
            let common = ra.partial_sums.len().min(rb.partial_sums.len());
            if common == 0 {
                continue;
            }
            tables.push(RatioTable {
                numerator: ra.condition,
                denominator: rb.condition,
                levels: (1..=common as u32).collect(),
                ratios: (0..common).map(|j| ra.partial_sums[j] / rb.partial_sums[j]).collect(),
            });
        }
    }
    tables
}

fn failed(condition: ConditionTag, module: &str, e: &Error) -> ConditionOutcome {
    ConditionOutcome {
        condition,
        status: Status::Failed,
        report: None,
        log_integral: None,
        error: Some(format!("{module}: {e}")),
        non_finite: matches!(e, Error::NonFinite { .. }),
    }
}

fn ok(condition: ConditionTag, report: EnergyReport, log: Option<LogIntegralResult>) -> ConditionOutcome {
    if !report.is_finite() {
        let e = Error::NonFinite { op: "analyze", detail: "non-finite term".into() };
        return failed(condition, "energy", &e);
    }
    ConditionOutcome { condition, status: Status::Ok, report: Some(report), log_integral: log, error: None, non_finite: false }
}

fn run_condition(
    cfg: &AnalysisConfig,
    map: &CircleHomeomorphism,
    samples: Option<&std::result::Result<CellSamples, String>>,
    tag: ConditionTag,
    lambda: f64,
) -> ConditionOutcome {
    let cls = &cfg.classifier;
    let reclassify = |r: EnergyReport| EnergyReport::from_terms(r.condition, r.lambda, r.terms, cls);
    let disk = |f: &dyn Fn(&CellSamples) -> Result<EnergyReport>| match samples {
        Some(Ok(s)) => match f(s) {
            Ok(r) => ok(tag, reclassify(r), None),
            Err(e) => failed(tag, "poisson", &e),
        },
        Some(Err(msg)) => ConditionOutcome {
            condition: tag,
            status: Status::Failed,
            report: None,
            log_integral: None,
            non_finite: false,
            error: Some(format!("poisson: {msg}")),
        },
        None => unreachable!("disk samples are prepared whenever (i) or (ii) is requested"),
    };
    match tag {
        ConditionTag::I => disk(&|s| s.energy_i(lambda)),
        ConditionTag::Ii => disk(&|s| s.energy_ii(lambda)),
        ConditionTag::Iv => match energy::dyadic_energy_iv_with(map, lambda, cfg.dyadic_levels, cls) {
            Ok(r) => ok(tag, r, None),
            Err(e) => failed(tag, "energy", &e),
        },
        ConditionTag::V => match energy::dyadic_energy_v_with(map, lambda, cfg.dyadic_levels, cls) {
            Ok(r) => ok(tag, r, None),
            Err(e) => failed(tag, "energy", &e),
        },
        ConditionTag::IiiDyadic => match logkernel::log_energy_dyadic(map, lambda, cfg.dyadic_levels) {
            Ok(l) => ok(tag, l.as_report(cls), Some(l)),
            Err(e) => failed(tag, "logkernel", &e),
        },
        ConditionTag::IiiDirect => match logkernel::log_energy_direct(map, lambda, cfg.direct_resolution) {
            Ok(l) if l.corrected_total().is_finite() => {
                // One aggregate term; the direct route carries no level structure.
                let r = EnergyReport::from_terms(tag, lambda, vec![l.corrected_total()], cls);
                ConditionOutcome {
                    condition: tag,
                    status: Status::Ok,
                    report: Some(r),
                    log_integral: Some(l),
                    error: None,
                    non_finite: false,
                }
            }
            Ok(_) => failed(tag, "logkernel", &Error::NonFinite { op: "log_energy_direct", detail: "total".into() }),
            Err(e) => failed(tag, "logkernel", &e),
        },
    }
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs every requested condition at every lambda and assembles the report.
pub fn analyze(cfg: &AnalysisConfig) -> Result<EquivalenceReport> {
    cfg.validate()?;
    let map = cfg.map.to_map()?;
    with_threads(cfg.threads, || {
        let needs_disk = cfg.conditions.iter().any(|c| matches!(c, ConditionTag::I | ConditionTag::Ii));
        let samples = needs_disk.then(|| {
            HarmonicExtension::new(map.clone(), cfg.boundary_nodes)
                .map(|e| e.with_cell_order(cfg.cell_order))
                .and_then(|e| e.sample_cells(cfg.disk_levels))
                .map_err(|e| e.to_string())
        });
        let cells: Vec<LambdaCell> = cfg
            .lambdas
            .iter()
            .map(|&lambda| {
                let conditions: Vec<ConditionOutcome> = cfg
                    .conditions
                    .iter()
                    .map(|&tag| run_condition(cfg, &map, samples.as_ref(), tag, lambda))
                    .collect();
                LambdaCell {
                    lambda,
                    ratio_tables: ratio_tables(&conditions),
                    verdict: verdict_of(&conditions),
                    conditions,
                }
            })
            .collect();
        EquivalenceReport {
            schema_version: SCHEMA_VERSION,
            generator: format!("homeo-energy {}", env!("CARGO_PKG_VERSION")),
            deterministic: true,
            config: cfg.clone(),
            verdict: overall_verdict(&cells),
            cells,
        }
    })
}

impl EquivalenceReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn any_failed(&self) -> bool {
        self.cells.iter().flat_map(|c| &c.conditions).any(|o| o.status == Status::Failed)
    }

    pub fn any_non_finite(&self) -> bool {
        self.cells.iter().flat_map(|c| &c.conditions).any(|o| o.non_finite)
    }

    /// `lambda,condition,j,term,partial_sum`
    pub fn terms_csv(&self) -> String {
        let mut s = String::from("lambda,condition,j,term,partial_sum\n");
        for cell in &self.cells {
            for o in &cell.conditions {
                if let Some(r) = &o.report {
                    for (j, (t, p)) in r.terms.iter().zip(&r.partial_sums).enumerate() {
                        let _ = writeln!(s, "{},{},{},{:e},{:e}", cell.lambda, o.condition, j + 1, t, p);
                    }
                }
            }
        }
        s
    }

    /// `lambda,numerator,denominator,j,ratio`
    pub fn ratios_csv(&self) -> String {
        let mut s = String::from("lambda,numerator,denominator,j,ratio\n");
        for cell in &self.cells {
            for t in &cell.ratio_tables {
                for (j, r) in t.levels.iter().zip(&t.ratios) {
                    let _ = writeln!(s, "{},{},{},{},{:e}", cell.lambda, t.numerator, t.denominator, j, r);
                }
            }
        }
        s
    }

    /// Writes the report and its CSV companions; returns the report path.
    pub fn write_to(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(REPORT_FILE);
        std::fs::write(&path, self.to_json()?)?;
        std::fs::write(dir.join(TERMS_FILE), self.terms_csv())?;
        std::fs::write(dir.join(RATIOS_FILE), self.ratios_csv())?;
        Ok(path)
    }
}

/// Parses a report and checks its schema version and internal consistency.
pub fn validate_report(text: &str) -> Result<EquivalenceReport> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let version = value.get("schema_version").and_then(|v| v.as_u64());
    if version != Some(SCHEMA_VERSION as u64) {
        return Err(Error::Config(format!("schema_version {version:?}, expected {SCHEMA_VERSION}")));
    }
    let report: EquivalenceReport = serde_json::from_value(value)?;
    let bad = |m: String| Err(Error::Config(format!("report schema: {m}")));
    if report.cells.len() != report.config.lambdas.len() {
        return bad("one cell per lambda expected".into());
    }
    for (cell, &lambda) in report.cells.iter().zip(&report.config.lambdas) {
        if cell.lambda.to_bits() != lambda.to_bits() {
            return bad(format!("cell lambda {} does not match config", cell.lambda));
        }
        let tags: Vec<ConditionTag> = cell.conditions.iter().map(|o| o.condition).collect();
        if tags != report.config.conditions {
            return bad(format!("conditions at lambda {lambda} do not match config"));
        }
        for o in &cell.conditions {
            let consistent = match o.status {
                Status::Ok => o.report.is_some() && o.error.is_none(),
                Status::Failed => o.report.is_none() && o.error.is_some(),
            };
            if !consistent {
                return bad(format!("condition {} has inconsistent status fields", o.condition));
            }
            if let Some(r) = &o.report {
                if r.terms.len() != r.partial_sums.len() || r.levels as usize != r.terms.len() {
                    return bad(format!("condition {} has mismatched level arrays", o.condition));
                }
            }
        }
        if cell.ratio_tables != ratio_tables(&cell.conditions) {
            return bad(format!("ratio tables at lambda {lambda} are not derived from ok conditions"));
        }
        if cell.verdict != verdict_of(&cell.conditions) {
            return bad(format!("verdict at lambda {lambda} is not a function of the classifications"));
        }
    }
    if report.verdict != overall_verdict(&report.cells) {
        return bad("overall verdict inconsistent".into());
    }
    Ok(report)
}

pub fn validate_report_file(path: &Path) -> Result<EquivalenceReport> {
    validate_report(&std::fs::read_to_string(path)?)
}

/// One row per `(lambda, J)` for `J` from the classifier minimum to the
/// largest computed level: `<c>_partial` and `<c>_class` per condition.
pub fn sweep(cfg: &AnalysisConfig, lambdas: &[f64]) -> Result<String> {
    if cfg.conditions.contains(&ConditionTag::IiiDirect) {
        return Err(Error::Config("iii_direct has no level structure; sweep iii_dyadic instead".into()));
    }
    let mut cfg = cfg.clone();
    cfg.lambdas = lambdas.to_vec();
    let report = analyze(&cfg)?;
    let mut s = String::from("lambda,J");
    for c in &cfg.conditions {
        let _ = write!(s, ",{c}_partial,{c}_class");
    }
    s.push('\n');
    let max_levels = report
        .cells
        .iter()
        .flat_map(|c| &c.conditions)
        .filter_map(|o| o.report.as_ref().map(|r| r.levels))
        .max()
        .unwrap_or(0);
    let first = cfg.classifier.min_levels.max(1) as u32;
    for cell in &report.cells {
        for j in first..=max_levels {
            let _ = write!(s, "{},{}", cell.lambda, j);
            for o in &cell.conditions {
                match o.report.as_ref().filter(|r| r.levels >= j) {
                    Some(r) => {
                        let prefix = EnergyReport::from_terms(
                            r.condition,
                            r.lambda,
                            r.terms[..j as usize].to_vec(),
                            &cfg.classifier,
                        );
                        let class = prefix.classification.map(class_name).unwrap_or("");
                        let _ = write!(s, ",{:e},{}", prefix.total, class);
                    }
                    None if o.status == Status::Failed => s.push_str(",,failed"),
                    None => s.push_str(",,"),
                }
            }
            s.push('\n');
        }
    }
    Ok(s)
}

fn class_name(c: Classification) -> &'static str {
    match c {
        Classification::Convergent => "convergent",
        Classification::Divergent => "divergent",
        Classification::Inconclusive => "inconclusive",
    }
}
