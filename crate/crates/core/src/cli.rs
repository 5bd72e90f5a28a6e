//! Commands behind the `gptscore` binary. Each command is a plain function so
//! it can be driven from tests without spawning a process.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::aspects::{builtin_registry, AspectRegistry};
use crate::backend::{BackendConfig, CacheStats, DirStats, LogprobBackend};
use crate::baselines::{rouge_records, RougeVariant};
use crate::datasets::{self, Dataset};
use crate::error::{Error, Result};
use crate::metaeval::{
    aggregate, bootstrap_compare, join_records, spearman, CorrelationReport, SignificanceResult,
};
use crate::prompt::{builtin_templates, TemplateRegistry};
use crate::scoring::{read_records, score_dataset, write_records, RunSpec, ScoreRecord, Scorer};
use crate::task::{CorrelationKind, Direction, Setting, Strategy, Task};

/// Demonstration counts of the default ablation grid.
pub const DEFAULT_K_GRID: [usize; 6] = [0, 1, 2, 4, 8, 12];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    #[default]
    Gptscore,
    #[serde(rename = "rouge-1")]
    Rouge1,
    #[serde(rename = "rouge-2")]
    Rouge2,
    #[serde(rename = "rouge-l")]
    RougeL,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("gptscore") {
            return Ok(Metric::Gptscore);
        }
        Ok(match s.parse::<RougeVariant>()? {
            RougeVariant::Rouge1 => Metric::Rouge1,
            RougeVariant::Rouge2 => Metric::Rouge2,
            RougeVariant::RougeL => Metric::RougeL,
        })
    }
}

fn default_setting() -> Setting {
    Setting::Ist
}

fn default_kind() -> CorrelationKind {
    CorrelationKind::Spearman
}

/// A complete description of a run; one config file plus one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: PathBuf,
    pub task: Task,
    pub aspects: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    #[serde(default = "default_setting")]
    pub setting: Setting,
    #[serde(default)]
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    pub backend: BackendConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsample: Option<usize>,
    #[serde(default)]
    pub metric: Metric,
    #[serde(default = "default_kind")]
    pub kind: CorrelationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
    /// Template registry JSON replacing the builtin templates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub templates: Option<PathBuf>,
    /// Aspect registry JSON replacing the builtin registry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aspect_registry: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.aspects.is_empty() {
            return Err(Error::Usage("at least one aspect is required".into()));
        }
        if self.k > 0 && self.setting != Setting::Idm {
            return Err(Error::Usage(format!(
                "k = {} requires setting idm (got {})",
                self.k, self.setting
            )));
        }
        if self.metric == Metric::Gptscore {
            self.backend.validate()?;
        }
        Ok(())
    }

    pub fn load_dataset(&self) -> Result<Dataset> {
        let ds = datasets::load(&self.dataset, self.task)?;
        match self.subsample {
            Some(n) => datasets::subsample(&ds, n, self.seed, &self.aspects),
            None => Ok(ds),
        }
    }

    pub fn templates(&self) -> Result<TemplateRegistry> {
        match &self.templates {
            Some(p) => TemplateRegistry::load(p),
            None => Ok(builtin_templates()),
        }
    }

    pub fn aspect_registry(&self) -> Result<AspectRegistry> {
        match &self.aspect_registry {
            Some(p) => AspectRegistry::load(p),
            None => Ok(builtin_registry()),
        }
    }

    fn direction_for(&self, ds: &Dataset) -> Direction {
        self.direction.unwrap_or(ds.default_direction)
    }

    fn strategy_for(&self, ds: &Dataset) -> Strategy {
        self.strategy.unwrap_or(ds.default_strategy)
    }

    fn spec<'a>(&self, ds: &Dataset, aspect: &'a str, setting: Setting, k: usize) -> RunSpec<'a> {
        RunSpec {
            aspect,
            direction: self.direction_for(ds),
            setting,
            k,
            seed: self.seed,
            parallel: self.backend.max_parallel,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ScoreSummary {
    pub records: usize,
    pub tokens: usize,
    pub cache: Option<CacheStats>,
}

impl std::fmt::Display for ScoreSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "records written: {}, target tokens: {}",
            self.records, self.tokens
        )?;
        if let Some(c) = self.cache {
            write!(
                f,
                ", cache hit rate: {:.1}% ({} hits, {} misses)",
                100.0 * c.hit_rate(),
                c.hits,
                c.misses
            )?;
        }
        Ok(())
    }
}

fn score_all(
    cfg: &RunConfig,
    ds: &Dataset,
    backend: Option<&dyn LogprobBackend>,
) -> Result<Vec<ScoreRecord>> {
    let mut records = Vec::new();
    match cfg.metric {
        Metric::Gptscore => {
            let backend = backend.expect("gptscore runs build a backend");
            let templates = cfg.templates()?;
            let scorer = Scorer::new(backend, &templates);
            for aspect in &cfg.aspects {
                let spec = cfg.spec(ds, aspect, cfg.setting, cfg.k);
                records.extend(score_dataset(scorer, ds, &spec)?);
            }
        }
        m => {
            let variant = match m {
                Metric::Rouge1 => RougeVariant::Rouge1,
                Metric::Rouge2 => RougeVariant::Rouge2,
                _ => RougeVariant::RougeL,
            };
            for aspect in &cfg.aspects {
                records.extend(rouge_records(ds, aspect, variant)?);
            }
        }
    }
    Ok(records)
}

fn build_backend(cfg: &RunConfig) -> Result<Option<Arc<dyn LogprobBackend>>> {
    match cfg.metric {
        Metric::Gptscore => cfg.backend.build().map(Some),
        _ => Ok(None),
    }
}

/// Scores every aspect of the config and writes the records, if an output
/// path is configured.
pub fn cmd_score(cfg: &RunConfig) -> Result<(Vec<ScoreRecord>, ScoreSummary)> {
    cfg.validate()?;
    let ds = cfg.load_dataset()?;
    let backend = build_backend(cfg)?;
    let records = score_all(cfg, &ds, backend.as_deref())?;
    if let Some(out) = &cfg.output {
        write_records(out, &records)?;
    }
    let summary = ScoreSummary {
        records: records.len(),
        tokens: records.iter().map(|r| r.token_count).sum(),
        cache: backend.and_then(|b| b.cache_stats()),
    };
    Ok((records, summary))
}

/// One row of the tabular export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    pub aspect: String,
    pub model: String,
    pub setting: String,
    pub kind: CorrelationKind,
    pub strategy: Strategy,
    pub value: f64,
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaevalEntry {
    pub dataset: String,
    pub aspect: String,
    pub model: String,
    pub setting: String,
    pub report: CorrelationReport,
}

impl MetaevalEntry {
    pub fn row(&self) -> ReportRow {
        ReportRow {
            dataset: self.dataset.clone(),
            aspect: self.aspect.clone(),
            model: self.model.clone(),
            setting: self.setting.clone(),
            kind: self.report.kind,
            strategy: self.report.strategy,
            value: self.report.value,
            p_value: None,
        }
    }
}

fn setting_label(records: &[&ScoreRecord]) -> String {
    let settings: BTreeSet<Setting> = records.iter().map(|r| r.setting).collect();
    match settings.len() {
        1 => settings.into_iter().next().expect("one").to_string(),
        _ => "mixed".into(),
    }
}

fn aspects_in(records: &[ScoreRecord]) -> Vec<String> {
    let mut seen = Vec::new();
    for r in records {
        if !seen.contains(&r.aspect) {
            seen.push(r.aspect.clone());
        }
    }
    seen
}

/// Correlates score records with the human scores of a dataset, one report
/// per aspect present in the records.
pub fn metaeval_records(
    ds: &Dataset,
    records: &[ScoreRecord],
    kind: CorrelationKind,
    strategy: Option<Strategy>,
    model: &str,
) -> Result<Vec<MetaevalEntry>> {
    let strategy = strategy.unwrap_or(ds.default_strategy);
    let mut out = Vec::new();
    let mut unmatched = Vec::new();
    for aspect in aspects_in(records) {
        let joined = match join_records(ds, records, &aspect) {
            Ok(j) => j,
            Err(Error::Unmatched(ids)) => {
                unmatched.extend(ids);
                continue;
            }
            Err(e) => return Err(e),
        };
        let mine: Vec<&ScoreRecord> = records.iter().filter(|r| r.aspect == aspect).collect();
        out.push(MetaevalEntry {
            dataset: ds.name.clone(),
            aspect: aspect.clone(),
            model: model.to_string(),
            setting: setting_label(&mine),
            report: aggregate(&joined.scores, kind, strategy)?,
        });
    }
    if !unmatched.is_empty() {
        return Err(Error::Unmatched(unmatched));
    }
    if out.is_empty() {
        return Err(Error::Invalid("no score records".into()));
    }
    Ok(out)
}

pub fn write_rows(path: impl AsRef<Path>, rows: &[ReportRow], append: bool) -> Result<()> {
    let path = path.as_ref();
    let exists = path.exists() && std::fs::metadata(path)?.len() > 0;
    let file = std::fs::OpenOptions::new()
        .create(true)
        .write(true)
        .append(append)
        .truncate(!append)
        .open(path)?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(!(append && exists))
        .from_writer(file);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows(path: impl AsRef<Path>) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Invalid(format!("csv: {e}"))
}

#[derive(Debug, Clone)]
pub struct MetaevalArgs {
    pub scores: PathBuf,
    pub dataset: PathBuf,
    pub task: Task,
    pub kind: CorrelationKind,
    pub strategy: Option<Strategy>,
    pub model: String,
}

pub fn cmd_metaeval(args: &MetaevalArgs) -> Result<Vec<MetaevalEntry>> {
    let ds = datasets::load(&args.dataset, args.task)?;
    let records = read_records(&args.scores)?;
    metaeval_records(&ds, &records, args.kind, args.strategy, &args.model)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub k: usize,
    pub correlation: f64,
}

/// One meta-evaluation per demonstration count, for the first aspect of the
/// config.
pub fn cmd_ablate_demos(cfg: &RunConfig, k_grid: &[usize]) -> Result<Vec<AblationRow>> {
    let aspect = cfg
        .aspects
        .first()
        .ok_or_else(|| Error::Usage("ablate-demos needs an aspect".into()))?;
    if k_grid.is_empty() {
        return Err(Error::Usage("empty k grid".into()));
    }
    if cfg.metric != Metric::Gptscore {
        return Err(Error::Usage(
            "demonstration ablation needs metric gptscore".into(),
        ));
    }
    cfg.backend.validate()?;
    let ds = cfg.load_dataset()?;
    let max_k = *k_grid.iter().max().expect("non-empty");
    if max_k + 1 > ds.len() {
        return Err(Error::OutOfRange {
            what: "demonstration count",
            value: max_k,
            expected: format!("0..={} for {} samples", ds.len() - 1, ds.len()),
        });
    }
    let backend = cfg.backend.build()?;
    let templates = cfg.templates()?;
    let scorer = Scorer::new(backend.as_ref(), &templates);
    let mut rows = Vec::with_capacity(k_grid.len());
    for &k in k_grid {
        let records = score_dataset(scorer, &ds, &cfg.spec(&ds, aspect, Setting::Idm, k))?;
        let joined = join_records(&ds, &records, aspect)?;
        let report = aggregate(&joined.scores, cfg.kind, cfg.strategy_for(&ds))?;
        rows.push(AblationRow {
            k,
            correlation: report.value,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionRow {
    pub x: usize,
    pub aspects: String,
    pub definition: String,
    pub correlation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AspectOrderRow {
    pub aspect: String,
    pub spearman: f64,
}

/// Spearman correlation between the human scores of `target` and of every
/// other aspect, over all outputs scored for both, in descending order.
pub fn aspect_order(ds: &Dataset, target: &str) -> Vec<AspectOrderRow> {
    let others: BTreeSet<&str> = ds
        .samples
        .iter()
        .flat_map(|s| &s.outputs)
        .flat_map(|o| o.human_scores.keys().map(String::as_str))
        .filter(|a| *a != target)
        .collect();
    let mut rows: Vec<AspectOrderRow> = others
        .into_iter()
        .filter_map(|other| {
            let (x, y): (Vec<f64>, Vec<f64>) = ds
                .samples
                .iter()
                .flat_map(|s| &s.outputs)
                .filter_map(|o| Some((*o.human_scores.get(target)?, *o.human_scores.get(other)?)))
                .unzip();
            spearman(&x, &y).ok().map(|v| AspectOrderRow {
                aspect: other.to_string(),
                spearman: v,
            })
        })
        .collect();
    rows.sort_by(|a, b| {
        b.spearman
            .total_cmp(&a.spearman)
            .then_with(|| a.aspect.cmp(&b.aspect))
    });
    rows
}

/// Scores `target` with the first `x - 1` extras merged into its definition,
/// for `x = 1 ..= extras.len() + 1`.
pub fn cmd_compose_aspects(
    cfg: &RunConfig,
    target: &str,
    extras: &[String],
) -> Result<(Vec<CompositionRow>, Vec<AspectOrderRow>)> {
    if cfg.metric != Metric::Gptscore {
        return Err(Error::Usage(
            "aspect composition needs metric gptscore".into(),
        ));
    }
    cfg.backend.validate()?;
    let registry = cfg.aspect_registry()?;
    let definitions = (0..=extras.len())
        .map(|n| registry.compose_definition(target, &extras[..n]))
        .collect::<Result<Vec<_>>>()?;
    let ds = cfg.load_dataset()?;
    let backend = cfg.backend.build()?;
    let base = cfg.templates()?;

    let mut rows = Vec::with_capacity(definitions.len());
    for (n, definition) in definitions.into_iter().enumerate() {
        let templates = base.with_definition(ds.task, target, &definition)?;
        let scorer = Scorer::new(backend.as_ref(), &templates);
        let records = score_dataset(scorer, &ds, &cfg.spec(&ds, target, cfg.setting, cfg.k))?;
        let joined = join_records(&ds, &records, target)?;
        let report = aggregate(&joined.scores, cfg.kind, cfg.strategy_for(&ds))?;
        let mut keys = vec![target.to_string()];
        keys.extend(extras[..n].iter().cloned());
        rows.push(CompositionRow {
            x: n + 1,
            aspects: keys.join("+"),
            definition,
            correlation: report.value,
        });
    }
    Ok((rows, aspect_order(&ds, target)))
}

/// Parameters of a paired bootstrap comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct TestOptions {
    /// Aspect to compare; may be omitted when the scores cover one aspect.
    pub aspect: Option<String>,
    pub kind: CorrelationKind,
    pub strategy: Option<Strategy>,
    pub resamples: usize,
    pub alpha: f64,
    pub seed: u64,
    pub model: String,
}

impl Default for TestOptions {
    fn default() -> Self {
        TestOptions {
            aspect: None,
            kind: CorrelationKind::Spearman,
            strategy: None,
            resamples: 1000,
            alpha: 0.05,
            seed: 0,
            model: String::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SignificanceArgs {
    pub scores_a: PathBuf,
    pub scores_b: PathBuf,
    pub dataset: PathBuf,
    pub task: Task,
    pub options: TestOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceOutput {
    pub dataset: String,
    pub model: String,
    pub aspect: String,
    pub setting_a: String,
    pub setting_b: String,
    pub kind: CorrelationKind,
    pub strategy: Strategy,
    pub result: SignificanceResult,
}

pub fn significance_records(
    ds: &Dataset,
    a: &[ScoreRecord],
    b: &[ScoreRecord],
    opts: &TestOptions,
) -> Result<SignificanceOutput> {
    if opts.resamples == 0 {
        return Err(Error::Usage(
            "the number of resamples must be at least 1".into(),
        ));
    }
    let aspect = match &opts.aspect {
        Some(a) => a.clone(),
        None => match aspects_in(a).as_slice() {
            [only] => only.clone(),
            many => {
                return Err(Error::Usage(format!(
                    "scores cover aspects {many:?}; pick one with --aspect"
                )))
            }
        },
    };
    let (kind, strategy) = (opts.kind, opts.strategy.unwrap_or(ds.default_strategy));
    let ja = join_records(ds, a, &aspect)?;
    let jb = join_records(ds, b, &aspect)?;
    if ja.key_set() != jb.key_set() {
        return Err(Error::Invalid(
            "the two score files cover different (sample, system) pairs".into(),
        ));
    }
    let result = bootstrap_compare(
        &ja.scores,
        &jb.scores,
        kind,
        strategy,
        opts.resamples,
        opts.alpha,
        opts.seed,
    )?;
    let label = |recs: &[ScoreRecord]| {
        let mine: Vec<&ScoreRecord> = recs.iter().filter(|r| r.aspect == aspect).collect();
        setting_label(&mine)
    };
    Ok(SignificanceOutput {
        dataset: ds.name.clone(),
        model: opts.model.clone(),
        aspect: aspect.clone(),
        setting_a: label(a),
        setting_b: label(b),
        kind,
        strategy,
        result,
    })
}

pub fn cmd_significance(args: &SignificanceArgs) -> Result<SignificanceOutput> {
    if args.options.resamples == 0 {
        return Err(Error::Usage(
            "the number of resamples must be at least 1".into(),
        ));
    }
    let ds = datasets::load(&args.dataset, args.task)?;
    significance_records(
        &ds,
        &read_records(&args.scores_a)?,
        &read_records(&args.scores_b)?,
        &args.options,
    )
}

const SETTINGS: [&str; 3] = ["VAL", "IST", "IDM"];

/// Markdown tables with VAL/IST/IDM columns per aspect. A value is marked
/// `†` when it significantly beats VAL and `‡` (IDM only) when it
/// significantly beats IST.
pub fn render_report(rows: &[ReportRow], tests: &[SignificanceOutput]) -> String {
    let mut tables: BTreeMap<(String, String, String), Vec<&ReportRow>> = BTreeMap::new();
    for r in rows {
        tables
            .entry((
                r.dataset.clone(),
                r.kind.to_string(),
                r.strategy.to_string(),
            ))
            .or_default()
            .push(r);
    }
    let passed = |r: &ReportRow, setting: &str, against: &str| {
        tests.iter().any(|t| {
            t.dataset == r.dataset
                && t.model == r.model
                && t.aspect == r.aspect
                && t.setting_a == setting
                && t.setting_b == against
                && t.result.significant
        })
    };

    let mut out = String::new();
    for ((dataset, kind, strategy), rows) in tables {
        let mut aspects: Vec<&str> = Vec::new();
        let mut models: Vec<&str> = Vec::new();
        for r in &rows {
            if !aspects.contains(&r.aspect.as_str()) {
                aspects.push(&r.aspect);
            }
            if !models.contains(&r.model.as_str()) {
                models.push(&r.model);
            }
        }
        let _ = writeln!(out, "### {dataset} ({kind}, {strategy})\n");
        out.push_str("| Model |");
        for a in &aspects {
            for s in SETTINGS {
                let _ = write!(out, " {a} {s} |");
            }
        }
        out.push_str("\n|---|");
        out.push_str(&"---:|".repeat(aspects.len() * SETTINGS.len()));
        out.push('\n');
        for m in &models {
            let _ = write!(out, "| {m} |");
            for a in &aspects {
                for s in SETTINGS {
                    let cell = rows
                        .iter()
                        .find(|r| r.model == *m && r.aspect == *a && r.setting == s);
                    match cell {
                        Some(r) => {
                            let mut marks = String::new();
                            if s != "VAL" && passed(r, s, "VAL") {
                                marks.push('†');
                            }
                            if s == "IDM" && passed(r, "IDM", "IST") {
                                marks.push('‡');
                            }
                            let _ = write!(out, " {:.1}{marks} |", 100.0 * r.value);
                        }
                        None => out.push_str(" - |"),
                    }
                }
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

pub fn cmd_report(csv_paths: &[PathBuf], significance_paths: &[PathBuf]) -> Result<String> {
    let mut rows = Vec::new();
    for p in csv_paths {
        rows.extend(read_rows(p)?);
    }
    let mut tests = Vec::new();
    for p in significance_paths {
        tests.push(serde_json::from_str(&std::fs::read_to_string(p)?)?);
    }
    Ok(render_report(&rows, &tests))
}

pub fn cmd_cache_stats(dir: impl AsRef<Path>) -> Result<DirStats> {
    DirStats::scan(dir)
}

pub fn cmd_cache_clear(dir: impl AsRef<Path>) -> Result<usize> {
    DirStats::clear(dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(model: &str, setting: &str, value: f64) -> ReportRow {
        ReportRow {
            dataset: "d".into(),
            aspect: "FLU".into(),
            model: model.into(),
            setting: setting.into(),
            kind: CorrelationKind::Spearman,
            strategy: Strategy::SampleLevel,
            value,
            p_value: None,
        }
    }

    fn test(setting_a: &str, setting_b: &str, significant: bool) -> SignificanceOutput {
        SignificanceOutput {
            dataset: "d".into(),
            model: "m".into(),
            aspect: "FLU".into(),
            setting_a: setting_a.into(),
            setting_b: setting_b.into(),
            kind: CorrelationKind::Spearman,
            strategy: Strategy::SampleLevel,
            result: SignificanceResult {
                p_value: if significant { 0.01 } else { 0.5 },
                n_resamples: 100,
                alpha: 0.05,
                significant,
                seed: 0,
            },
        }
    }

    #[test]
    fn report_marks() {
        let rows = [
            row("m", "VAL", 0.274),
            row("m", "IST", 0.278),
            row("m", "IDM", 0.297),
        ];
        let tests = [
            test("IST", "VAL", true),
            test("IDM", "VAL", true),
            test("IDM", "IST", true),
        ];
        let md = render_report(&rows, &tests);
        assert!(md.contains("| m | 27.4 | 27.8† | 29.7†‡ |"), "{md}");
        let md = render_report(&rows, &[test("IST", "VAL", false)]);
        assert!(md.contains("| m | 27.4 | 27.8 | 29.7 |"), "{md}");
    }

    #[test]
    fn metric_names() {
        assert_eq!("rouge-l".parse::<Metric>().unwrap(), Metric::RougeL);
        assert_eq!("GPTScore".parse::<Metric>().unwrap(), Metric::Gptscore);
        assert_eq!(
            serde_json::to_string(&Metric::Rouge2).unwrap(),
            "\"rouge-2\""
        );
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rows.csv");
        write_rows(&p, &[row("m", "VAL", 0.5)], true).unwrap();
        write_rows(&p, &[row("m", "IST", 0.6)], true).unwrap();
        let back = read_rows(&p).unwrap();
        assert_eq!(back.len(), 2);
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("dataset,aspect,model,setting,kind,strategy,value,p_value\n"));
        assert_eq!(text.matches("dataset,").count(), 1);
    }
}
