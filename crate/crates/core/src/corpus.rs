//! The built-in worked examples, each a scene whose queries carry the
//! expected verdicts.

use std::time::Instant;

use thiserror::Error;

use crate::scene::{parse_raw, run_scene, RawScene, Report, RunOptions, Scene, SceneError, SceneOptions};

const CASES: &[(&str, &str)] = &[
    ("quarter-turn-line", include_str!("../corpus/quarter-turn-line.json")),
    ("points", include_str!("../corpus/points.json")),
    ("whole-space", include_str!("../corpus/whole-space.json")),
    ("diagonal", include_str!("../corpus/diagonal.json")),
    ("klein-diagonal", include_str!("../corpus/klein-diagonal.json")),
    ("realified-z4", include_str!("../corpus/realified-z4.json")),
    ("transverse", include_str!("../corpus/transverse.json")),
    ("inclusion-image", include_str!("../corpus/inclusion-image.json")),
];

#[derive(Clone, Debug)]
pub struct CorpusCase {
    pub name: String,
    pub scene: RawScene,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus case `{case}` does not load: {source}")]
    BadCase { case: String, source: SceneError },
    #[error("corpus mismatch:\n{}", differences.join("\n"))]
    CorpusMismatch {
        differences: Vec<String>,
        report: Box<Report>,
    },
}

/// Source text of every built-in case.
pub fn case_sources() -> &'static [(&'static str, &'static str)] {
    CASES
}

pub fn corpus_cases() -> Vec<CorpusCase> {
    CASES
        .iter()
        .map(|(name, text)| CorpusCase {
            name: name.to_string(),
            scene: parse_raw(text).expect("built-in corpus parses"),
        })
        .collect()
}

/// Runs the cases whose name contains `filter` (all of them when `None`).
pub fn run_cases(cases: &[CorpusCase], filter: Option<&str>, options: &RunOptions) -> Result<Report, CorpusError> {
    let start = Instant::now();
    let mut report = Report::default();
    for case in cases.iter().filter(|c| filter.map_or(true, |f| c.name.contains(f))) {
        let scene = Scene::resolve(case.scene.clone(), &SceneOptions::default()).map_err(|source| CorpusError::BadCase {
            case: case.name.clone(),
            source,
        })?;
        report.queries.extend(run_scene(&scene, &case.name, options).queries);
    }
    report.timing.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    let differences: Vec<String> = report
        .mismatches()
        .map(|(q, m)| {
            format!(
                "{}#{} {} {}: expected {} = {}, found {}",
                q.scene,
                q.index,
                q.command,
                q.target,
                m.key,
                m.expected,
                m.found.as_deref().unwrap_or("nothing")
            )
        })
        .collect();
    if differences.is_empty() {
        Ok(report)
    } else {
        Err(CorpusError::CorpusMismatch {
            differences,
            report: Box::new(report),
        })
    }
}

pub fn run_corpus(filter: Option<&str>, options: &RunOptions) -> Result<Report, CorpusError> {
    run_cases(&corpus_cases(), filter, options)
}
