//! The forty benchmark experiments, split generation with a cross-split
//! uniqueness ledger, split audits, and the grid-accuracy evaluator.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::ObjectCatalog;
use crate::generator::{rederive_output, GenerationError, GenerationParams, TaskGenerator, TaskSample};
use crate::grid::Grid;
use crate::object::{ColorCount, Connectivity, ObjectConstraints, SizeRange};
use crate::rng::{derive_seed_path, SeededRng};
use crate::transform::{Transformation, TransformationSequence};

/// Fresh sub-seeds tried per sample index before giving up.
pub const ATTEMPT_BUDGET: u64 = 64;
/// Token that fills padded cells when comparing grids.
pub const PAD_TOKEN: u8 = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BenchmarkError {
    #[error("unknown experiment {0}")]
    UnknownExperiment(String),
    #[error("{split} index {index}: no unique sample within {attempts} attempts")]
    ExhaustedUniquePool { split: SplitName, index: usize, attempts: u64 },
    #[error("{split} index {index}: {source}")]
    Generation {
        split: SplitName,
        index: usize,
        #[source]
        source: GenerationError,
    },
    #[error("invalid worker count: {0}")]
    Workers(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Study {
    CompGen,
    EnvGen,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Setting {
    C1,
    C2,
    C3,
    G1,
    G2,
    G3,
    G4,
    G5,
}

impl Setting {
    pub const ALL: [Setting; 8] = [
        Setting::C1,
        Setting::C2,
        Setting::C3,
        Setting::G1,
        Setting::G2,
        Setting::G3,
        Setting::G4,
        Setting::G5,
    ];

    pub fn study(self) -> Study {
        match self {
            Setting::C1 | Setting::C2 | Setting::C3 => Study::CompGen,
            _ => Study::EnvGen,
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Setting {
    type Err = BenchmarkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Setting::ALL
            .into_iter()
            .find(|x| x.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| BenchmarkError::UnknownExperiment(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitName {
    Train,
    ValId,
    ValOod,
    TestId,
    TestOod,
}

impl SplitName {
    pub const ALL: [SplitName; 5] = [
        SplitName::Train,
        SplitName::ValId,
        SplitName::ValOod,
        SplitName::TestId,
        SplitName::TestOod,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::ValId => "val_id",
            SplitName::ValOod => "val_ood",
            SplitName::TestId => "test_id",
            SplitName::TestOod => "test_ood",
        }
    }

    pub fn is_ood(self) -> bool {
        matches!(self, SplitName::ValOod | SplitName::TestOod)
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for SplitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub val_id: usize,
    pub val_ood: usize,
    pub test_id: usize,
    pub test_ood: usize,
}

impl SplitSizes {
    pub const FULL: SplitSizes = SplitSizes {
        train: 100_000,
        val_id: 1000,
        val_ood: 1000,
        test_id: 1000,
        test_ood: 1000,
    };
    pub const DESK: SplitSizes = SplitSizes {
        train: 1000,
        val_id: 100,
        val_ood: 100,
        test_id: 100,
        test_ood: 100,
    };

    pub fn get(&self, split: SplitName) -> usize {
        match split {
            SplitName::Train => self.train,
            SplitName::ValId => self.val_id,
            SplitName::ValOod => self.val_ood,
            SplitName::TestId => self.test_id,
            SplitName::TestOod => self.test_ood,
        }
    }

    pub fn total(&self) -> usize {
        SplitName::ALL.iter().map(|&s| self.get(s)).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Desk,
    Full,
}

impl Scale {
    pub fn sizes(self) -> SplitSizes {
        match self {
            Scale::Desk => SplitSizes::DESK,
            Scale::Full => SplitSizes::FULL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub study: Study,
    pub setting: Setting,
    pub experiment_index: usize,
    pub train_sequences: Vec<TransformationSequence>,
    pub ood_sequences: Vec<TransformationSequence>,
    pub env_train: GenerationParams,
    pub env_ood: GenerationParams,
    pub split_sizes: SplitSizes,
}

impl ExperimentSpec {
    /// Name such as `C2-3`.
    pub fn name(&self) -> String {
        format!("{}-{}", self.setting, self.experiment_index)
    }

    pub fn with_sizes(mut self, sizes: SplitSizes) -> Self {
        self.split_sizes = sizes;
        self
    }

    /// Sequences and environment that feed `split`.
    pub fn source(&self, split: SplitName) -> (&[TransformationSequence], &GenerationParams) {
        match (split.is_ood(), self.study) {
            (false, _) => (&self.train_sequences, &self.env_train),
            (true, Study::CompGen) => (&self.ood_sequences, &self.env_ood),
            (true, Study::EnvGen) => (&self.train_sequences, &self.env_ood),
        }
    }
}

/// The three transformations of each compositional experiment and the
/// depth-2 composition held out from training.
fn compositional_recipe(index: usize) -> Option<([Transformation; 3], [Transformation; 2])> {
    use Transformation::*;
    Some(match index {
        1 => ([TranslateUp, Rotate90, MirrorHorizontal], [TranslateUp, Rotate90]),
        2 => (
            [ChangeColor, PadRight, FillHolesDifferentColor],
            [ChangeColor, PadRight],
        ),
        3 => ([CropBottomSide, Rotate90, PadTop], [Rotate90, CropBottomSide]),
        4 => (
            [ExtendContoursDifferentColor, MirrorHorizontal, TranslateDown],
            [MirrorHorizontal, ExtendContoursDifferentColor],
        ),
        5 => (
            [ExtendContoursSameColor, MirrorVertical, PadLeft],
            [PadLeft, ExtendContoursSameColor],
        ),
        _ => return None,
    })
}

/// The single transformation of each environment experiment.
fn environment_transform(index: usize) -> Option<Transformation> {
    use Transformation::*;
    [TranslateUp, Rotate90, MirrorHorizontal, CropTopSide, ExtendContoursSameColor]
        .get(index.checked_sub(1)?)
        .copied()
}

/// All sequences of length `depth` over `base`, in lexicographic order of
/// positions in `base`.
pub fn compositions(base: &[Transformation], depth: usize) -> Vec<TransformationSequence> {
    let mut out: Vec<Vec<Transformation>> = vec![Vec::new()];
    for _ in 0..depth {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                base.iter().map(move |&t| {
                    let mut next = prefix.clone();
                    next.push(t);
                    next
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|steps| TransformationSequence::new(steps).expect("non-empty, no identity"))
        .collect()
}

fn env(rows: (usize, usize), n_objects: (usize, usize), constraints: ObjectConstraints) -> GenerationParams {
    GenerationParams {
        grid_rows_range: SizeRange::new(rows.0, rows.1),
        grid_cols_range: SizeRange::new(rows.0, rows.1),
        n_objects_range: SizeRange::new(n_objects.0, n_objects.1),
        ..GenerationParams::fixed(rows.0, rows.0, n_objects.0)
    }
    .with_constraints(constraints)
}

fn dims(lo: usize, hi: usize) -> ObjectConstraints {
    ObjectConstraints {
        rows: Some(SizeRange::new(lo, hi)),
        cols: Some(SizeRange::new(lo, hi)),
        ..ObjectConstraints::none()
    }
}

fn simple(c: ObjectConstraints) -> ObjectConstraints {
    ObjectConstraints {
        symmetric: true,
        color_count: Some(ColorCount::Single),
        ..c
    }
}

fn complex(c: ObjectConstraints) -> ObjectConstraints {
    ObjectConstraints {
        asymmetric: true,
        color_count: Some(ColorCount::Multi),
        ..c
    }
}

/// Environment shared by every compositional experiment.
pub fn compgen_environment() -> GenerationParams {
    env(
        (20, 20),
        (2, 2),
        ObjectConstraints {
            connectivity: Some(vec![Connectivity::Four]),
            ..dims(1, 6)
        },
    )
}

/// The recipe of one experiment, with full split sizes.
pub fn build_experiment(setting: Setting, index: usize) -> Result<ExperimentSpec, BenchmarkError> {
    let unknown = || BenchmarkError::UnknownExperiment(format!("{setting}-{index}"));
    let (train_sequences, ood_sequences, env_train, env_ood) = match setting.study() {
        Study::CompGen => {
            let (base, held_out) = compositional_recipe(index).ok_or_else(unknown)?;
            let held_out = TransformationSequence::new(held_out.to_vec()).expect("valid hold-out");
            let atomics = compositions(&base, 1);
            let pairs = compositions(&base, 2);
            let (train, ood) = match setting {
                Setting::C1 => {
                    let train = atomics.into_iter().chain(pairs.into_iter().filter(|s| *s != held_out)).collect();
                    (train, vec![held_out])
                }
                Setting::C2 => (pairs.into_iter().filter(|s| *s != held_out).collect(), vec![held_out]),
                _ => (atomics.into_iter().chain(pairs).collect(), compositions(&base, 3)),
            };
            (train, ood, compgen_environment(), compgen_environment())
        }
        Study::EnvGen => {
            let t = environment_transform(index).ok_or_else(unknown)?;
            let seq = TransformationSequence::new(vec![t]).expect("single step");
            let (id, ood) = match setting {
                Setting::G1 => (env((15, 15), (1, 2), dims(1, 5)), env((15, 15), (3, 4), dims(1, 5))),
                Setting::G2 => (env((10, 15), (2, 2), dims(1, 5)), env((16, 20), (2, 2), dims(1, 5))),
                Setting::G3 => (env((20, 20), (2, 2), dims(1, 5)), env((20, 20), (2, 2), dims(6, 10))),
                Setting::G4 => (
                    env((15, 15), (2, 2), simple(dims(1, 5))),
                    env((15, 15), (2, 2), complex(dims(1, 5))),
                ),
                _ => (
                    env((10, 15), (1, 2), simple(dims(1, 5))),
                    env((16, 20), (3, 4), complex(dims(6, 10))),
                ),
            };
            (vec![seq.clone()], vec![seq], id, ood)
        }
    };
    Ok(ExperimentSpec {
        study: setting.study(),
        setting,
        experiment_index: index,
        train_sequences,
        ood_sequences,
        env_train,
        env_ood,
        split_sizes: SplitSizes::FULL,
    })
}

/// Every experiment in order C1-1 … G5-5.
pub fn all_experiments() -> Vec<ExperimentSpec> {
    Setting::ALL
        .iter()
        .flat_map(|&s| (1..=5).map(move |i| build_experiment(s, i).expect("known experiment")))
        .collect()
}

/// Uniqueness key of a sample: canonical sequence name and input grid bytes.
pub fn dedup_key(sample: &TaskSample) -> (String, Vec<u8>) {
    (sample.sequence.canonical_name(), sample.input.canonical_bytes())
}

pub fn task_id(spec: &ExperimentSpec, split: SplitName, index: usize) -> String {
    format!("{}-{}-{:06}", spec.name(), split, index)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetSplits {
    pub spec: ExperimentSpec,
    pub master_seed: u64,
    pub catalog_hash: String,
    /// Indexed like [`SplitName::ALL`].
    pub splits: [Vec<TaskSample>; 5],
}

impl DatasetSplits {
    pub fn split(&self, name: SplitName) -> &[TaskSample] {
        &self.splits[name.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (SplitName, &[TaskSample])> {
        SplitName::ALL.into_iter().map(move |s| (s, self.split(s)))
    }
}

struct SplitContext<'a> {
    generators: Vec<TaskGenerator<'a>>,
}

impl<'a> SplitContext<'a> {
    fn new(
        sequences: &[TransformationSequence],
        params: &GenerationParams,
        catalog: &'a ObjectCatalog,
    ) -> Result<Self, GenerationError> {
        let generators = sequences
            .iter()
            .map(|s| TaskGenerator::new(params, s, catalog))
            .collect::<Result<_, _>>()?;
        Ok(Self { generators })
    }

    /// Sample `index` of split `split` at re-attempt `attempt`.
    fn candidate(&self, master: u64, split: SplitName, index: usize, attempt: u64) -> Result<TaskSample, GenerationError> {
        let seed = derive_seed_path(master, &[split.index() as u64, index as u64, attempt]);
        let mut rng = SeededRng::new(seed);
        let gen = &self.generators[rng.below(self.generators.len())];
        gen.generate(rng.next_u64())
    }
}

/// Generates all five splits. Attempt-0 candidates are drawn in parallel;
/// ledger collisions are then resolved in index order with fresh sub-seeds,
/// so the result does not depend on the worker count.
pub fn generate_splits(
    spec: &ExperimentSpec,
    catalog: &ObjectCatalog,
    master_seed: u64,
    workers: Option<usize>,
) -> Result<DatasetSplits, BenchmarkError> {
    let run = || generate_splits_inner(spec, catalog, master_seed);
    match workers {
        None => run(),
        Some(0) => Err(BenchmarkError::Workers("worker count must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| BenchmarkError::Workers(e.to_string()))?
            .install(run),
    }
}

fn generate_splits_inner(
    spec: &ExperimentSpec,
    catalog: &ObjectCatalog,
    master: u64,
) -> Result<DatasetSplits, BenchmarkError> {
    let mut ledger: HashSet<(String, Vec<u8>)> = HashSet::new();
    let mut splits: [Vec<TaskSample>; 5] = Default::default();
    for split in SplitName::ALL {
        let (sequences, params) = spec.source(split);
        let ctx = SplitContext::new(sequences, params, catalog).map_err(|source| BenchmarkError::Generation {
            split,
            index: 0,
            source,
        })?;
        let n = spec.split_sizes.get(split);
        let first: Vec<Result<TaskSample, GenerationError>> = (0..n)
            .into_par_iter()
            .map(|i| ctx.candidate(master, split, i, 0))
            .collect();
        let mut out = Vec::with_capacity(n);
        for (index, first) in first.into_iter().enumerate() {
            let mut result = first;
            let mut attempt = 0;
            loop {
                if let Ok(sample) = &result {
                    if ledger.insert(dedup_key(sample)) {
                        break;
                    }
                }
                attempt += 1;
                if attempt >= ATTEMPT_BUDGET {
                    return Err(match result {
                        Err(source) => BenchmarkError::Generation { split, index, source },
                        Ok(_) => BenchmarkError::ExhaustedUniquePool {
                            split,
                            index,
                            attempts: ATTEMPT_BUDGET,
                        },
                    });
                }
                result = ctx.candidate(master, split, index, attempt);
            }
            out.push(result.expect("loop exits on success"));
        }
        splits[split.index()] = out;
    }
    Ok(DatasetSplits {
        spec: spec.clone(),
        master_seed: master,
        catalog_hash: catalog.content_hash(),
        splits,
    })
}

/// Checks split sizes, ledger uniqueness, sequence membership, OOD depth,
/// and environment ranges on up to `sample_limit` samples per split.
/// Returns one message per violation.
pub fn audit(splits: &DatasetSplits, sample_limit: usize) -> Vec<String> {
    let spec = &splits.spec;
    let mut violations = Vec::new();
    let mut keys = HashSet::new();
    let transformer_for = |p: &GenerationParams| crate::transform::Transformer::with_pad_color(p.pad_color);
    for (split, samples) in splits.iter() {
        if samples.len() != spec.split_sizes.get(split) {
            violations.push(format!(
                "{split}: {} samples, expected {}",
                samples.len(),
                spec.split_sizes.get(split)
            ));
        }
        for (i, s) in samples.iter().enumerate() {
            if !keys.insert(dedup_key(s)) {
                violations.push(format!("{split}[{i}]: repeated (sequence, input) key"));
            }
        }
        let (sequences, params) = spec.source(split);
        let transformer = transformer_for(params);
        for (i, s) in samples.iter().take(sample_limit).enumerate() {
            let mut fail = |msg: String| violations.push(format!("{split}[{i}]: {msg}"));
            if !sequences.contains(&s.sequence) {
                fail(format!("sequence {} not in the split's pool", s.sequence));
            }
            if !split.is_ood() && spec.study == Study::CompGen && spec.ood_sequences.contains(&s.sequence) {
                fail(format!("held-out sequence {} in an ID split", s.sequence));
            }
            if split.is_ood() && spec.setting == Setting::C3 && s.sequence.depth() != 3 {
                fail(format!("OOD depth {}", s.sequence.depth()));
            }
            let (rows, cols) = s.input.dims();
            if !params.grid_rows_range.contains(rows) || !params.grid_cols_range.contains(cols) {
                fail(format!("grid {rows}x{cols} outside the environment"));
            }
            if s.output.dims() != s.input.dims() {
                fail("output dims differ from input dims".into());
            }
            if !params.n_objects_range.contains(s.input_objects.len()) {
                fail(format!("{} objects outside the environment", s.input_objects.len()));
            }
            for (k, p) in s.input_objects.iter().enumerate() {
                if !params.object_constraints.matches_object(&p.object) {
                    fail(format!("object {k} violates the environment constraints"));
                }
            }
            if crate::generator::render_objects(rows, cols, &s.input_objects) != s.input {
                fail("input grid does not match its objects".into());
            }
            match rederive_output(s, &transformer) {
                Ok(g) if g == s.output => {}
                _ => fail("output does not re-derive from the input objects".into()),
            }
        }
    }
    violations
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub task_id: String,
    pub grid: Grid,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("no prediction for task {0}")]
    MissingPrediction(String),
    #[error("task {task_id}: grid {rows}x{cols} exceeds the padding size {pad_rows}x{pad_cols}")]
    DimensionMismatch {
        task_id: String,
        rows: usize,
        cols: usize,
        pad_rows: usize,
        pad_cols: usize,
    },
}

fn padded(g: &Grid, task_id: &str, pad_to: (usize, usize)) -> Result<Vec<u8>, EvalError> {
    let (rows, cols) = g.dims();
    if rows > pad_to.0 || cols > pad_to.1 {
        return Err(EvalError::DimensionMismatch {
            task_id: task_id.to_string(),
            rows,
            cols,
            pad_rows: pad_to.0,
            pad_cols: pad_to.1,
        });
    }
    let mut out = vec![PAD_TOKEN; pad_to.0 * pad_to.1];
    for r in 0..rows {
        for c in 0..cols {
            out[r * pad_to.1 + c] = g.get(r, c);
        }
    }
    Ok(out)
}

/// Fraction of targets whose prediction matches exactly once both grids
/// are padded to `pad_to`. Predictions are matched by task id.
pub fn grid_accuracy(
    preds: &[PredictionRecord],
    targets: &[PredictionRecord],
    pad_to: (usize, usize),
) -> Result<f64, EvalError> {
    let by_id: HashMap<&str, &Grid> = preds.iter().map(|p| (p.task_id.as_str(), &p.grid)).collect();
    if targets.is_empty() {
        return Ok(1.0);
    }
    let mut correct = 0usize;
    for t in targets {
        let pred = by_id
            .get(t.task_id.as_str())
            .ok_or_else(|| EvalError::MissingPrediction(t.task_id.clone()))?;
        if padded(pred, &t.task_id, pad_to)? == padded(&t.grid, &t.task_id, pad_to)? {
            correct += 1;
        }
    }
    Ok(correct as f64 / targets.len() as f64)
}

/// Largest grid dimensions among `grids`.
pub fn max_dims<'a>(grids: impl IntoIterator<Item = &'a Grid>) -> (usize, usize) {
    grids
        .into_iter()
        .fold((0, 0), |(r, c), g| (r.max(g.rows()), c.max(g.cols())))
}
