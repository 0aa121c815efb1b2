//! JSONL task records, dataset manifests and dataset directories.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::benchmark::{task_id, DatasetSplits, ExperimentSpec, PredictionRecord, SplitName};
use crate::generator::{TaskSample, IDENTITY_TOKEN, TASK_CODE_LEN};
use crate::grid::Grid;
use crate::rng::RNG_ALGORITHM;
use crate::transform::Transformation;

pub const FORMAT_VERSION: u32 = 1;
pub const GENERATOR_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
}

impl IoError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskRecord {
    pub task_id: String,
    pub transformations: Vec<String>,
    pub task_code: Vec<String>,
    pub grid_size: [usize; 2],
    pub input: Vec<Vec<u8>>,
    pub output: Vec<Vec<u8>>,
}

impl TaskRecord {
    pub fn from_sample(task_id: String, s: &TaskSample) -> Self {
        Self {
            task_id,
            transformations: s.sequence.steps().iter().map(|t| t.name().to_string()).collect(),
            task_code: s.task_code.clone(),
            grid_size: [s.input.rows(), s.input.cols()],
            input: s.input.to_rows(),
            output: s.output.to_rows(),
        }
    }

    /// Checks everything the type system does not.
    pub fn validate(&self) -> Result<(), String> {
        for name in &self.transformations {
            match name.parse::<Transformation>() {
                Ok(t) if !t.is_identity() => {}
                _ => return Err(format!("unknown transformation `{name}`")),
            }
        }
        if self.transformations.is_empty() {
            return Err("empty transformation list".into());
        }
        if self.task_code.len() != TASK_CODE_LEN {
            return Err(format!("task_code has {} tokens, expected {TASK_CODE_LEN}", self.task_code.len()));
        }
        if let Some(bad) = self
            .task_code
            .iter()
            .find(|t| t.as_str() != IDENTITY_TOKEN && t.parse::<Transformation>().is_err())
        {
            return Err(format!("unknown task_code token `{bad}`"));
        }
        for (name, rows) in [("input", &self.input), ("output", &self.output)] {
            let g = Grid::from_rows(rows).map_err(|e| format!("{name}: {e}"))?;
            if [g.rows(), g.cols()] != self.grid_size {
                return Err(format!("{name} is {}x{}, grid_size says {:?}", g.rows(), g.cols(), self.grid_size));
            }
        }
        Ok(())
    }

    pub fn input_grid(&self) -> Grid {
        Grid::from_rows(&self.input).expect("validated record")
    }

    pub fn output_grid(&self) -> Grid {
        Grid::from_rows(&self.output).expect("validated record")
    }

    /// The expected output as an evaluation target.
    pub fn target(&self) -> PredictionRecord {
        PredictionRecord {
            task_id: self.task_id.clone(),
            grid: self.output_grid(),
        }
    }
}

pub fn write_jsonl_to<W: Write>(records: &[TaskRecord], mut w: W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn write_jsonl(records: &[TaskRecord], path: &Path) -> Result<(), IoError> {
    let f = File::create(path).map_err(|e| IoError::io(path, e))?;
    write_jsonl_to(records, BufWriter::new(f)).map_err(|e| IoError::io(path, e))
}

/// Parses one record per non-blank line and validates each.
pub fn read_jsonl_from<R: Read>(r: R) -> Result<Vec<TaskRecord>, IoError> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(r).lines().enumerate() {
        let line = line.map_err(|source| IoError::Io {
            path: "<reader>".into(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let schema = |message: String| IoError::Schema { line: i + 1, message };
        let rec: TaskRecord = serde_json::from_str(&line).map_err(|e| schema(e.to_string()))?;
        rec.validate().map_err(schema)?;
        out.push(rec);
    }
    Ok(out)
}

pub fn read_jsonl(path: &Path) -> Result<Vec<TaskRecord>, IoError> {
    let f = File::open(path).map_err(|e| IoError::io(path, e))?;
    read_jsonl_from(f).map_err(|e| match e {
        IoError::Io { source, .. } => IoError::io(path, source),
        other => other,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub generator_version: String,
    pub rng_algorithm: String,
    pub master_seed: u64,
    pub catalog_hash: String,
    pub sequence_mixture: String,
    pub counts: BTreeMap<String, usize>,
    pub experiment: ExperimentSpec,
}

impl Manifest {
    pub fn of(splits: &DatasetSplits) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            generator_version: GENERATOR_VERSION.to_string(),
            rng_algorithm: RNG_ALGORITHM.to_string(),
            master_seed: splits.master_seed,
            catalog_hash: splits.catalog_hash.clone(),
            sequence_mixture: "uniform".to_string(),
            counts: splits.iter().map(|(n, s)| (n.to_string(), s.len())).collect(),
            experiment: splits.spec.clone(),
        }
    }
}

/// Records of one split, with ids `<experiment>-<split>-<index>`.
pub fn split_records(spec: &ExperimentSpec, split: SplitName, samples: &[TaskSample]) -> Vec<TaskRecord> {
    samples
        .iter()
        .enumerate()
        .map(|(i, s)| TaskRecord::from_sample(task_id(spec, split, i), s))
        .collect()
}

/// Writes `manifest.json` and one `<split>.jsonl` per split into `dir`.
pub fn write_dataset(dir: &Path, splits: &DatasetSplits) -> Result<(), IoError> {
    std::fs::create_dir_all(dir).map_err(|e| IoError::io(dir, e))?;
    for (name, samples) in splits.iter() {
        let path = dir.join(format!("{name}.jsonl"));
        write_jsonl(&split_records(&splits.spec, name, samples), &path)?;
    }
    let path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&Manifest::of(splits)).expect("manifest serializes");
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| IoError::io(&path, e))
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, IoError> {
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| IoError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| IoError::Schema {
        line: e.line(),
        message: e.to_string(),
    })
}
