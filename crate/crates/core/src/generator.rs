//! Task generation: sequence sampling, initial scenes, per-object
//! transformation with bounds and collision checks, and restart on failure.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::ObjectCatalog;
use crate::grid::{Anchor, Grid, PlacedObject, PlacementError, PlacementMode, MAX_GRID_DIM};
use crate::object::{GridObject, ObjectConstraints, SizeRange};
use crate::rng::SeededRng;
use crate::transform::{
    sequence_envelope, SequenceBuildError, StepCheck, TransformError, Transformation, TransformationSequence,
    Transformer, DEFAULT_PAD_COLOR,
};

/// Length of every task code.
pub const TASK_CODE_LEN: usize = 4;
pub const IDENTITY_TOKEN: &str = "identity";
/// Object draws per object before the initial placement gives up.
pub const OBJECT_DRAW_BUDGET: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerationError {
    #[error("invalid generation parameters: {0}")]
    InvalidParams(String),
    #[error("no catalog object satisfies the merged constraints")]
    NoMatch,
    #[error("no legal position found for object {object}")]
    PlacementFailed { object: usize },
    #[error("no valid sample within {trials} trials")]
    MaxTrialsExceeded { trials: usize },
    #[error("sequence depth {depth} exceeds the task code length {TASK_CODE_LEN}")]
    DepthExceeded { depth: usize },
}

/// Why a single transformation step could not be positioned.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StepError {
    #[error("transformed object leaves the grid")]
    OutOfBounds,
    #[error("transformed object overlaps another object at ({row}, {col})")]
    Overlap { row: usize, col: usize },
    #[error(transparent)]
    Transform(#[from] TransformError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationParams {
    pub grid_rows_range: SizeRange,
    pub grid_cols_range: SizeRange,
    pub n_objects_range: SizeRange,
    #[serde(default)]
    pub object_constraints: ObjectConstraints,
    pub pad_color: u8,
    pub max_trials: usize,
    pub wanted_examples: usize,
}

impl GenerationParams {
    /// Fixed grid size and object count, no object constraints.
    pub fn fixed(rows: usize, cols: usize, n_objects: usize) -> Self {
        Self {
            grid_rows_range: SizeRange::new(rows, rows),
            grid_cols_range: SizeRange::new(cols, cols),
            n_objects_range: SizeRange::new(n_objects, n_objects),
            object_constraints: ObjectConstraints::none(),
            pad_color: DEFAULT_PAD_COLOR,
            max_trials: 1000,
            wanted_examples: 1,
        }
    }

    pub fn with_constraints(mut self, c: ObjectConstraints) -> Self {
        self.object_constraints = c;
        self
    }

    pub fn validate(&self) -> Result<(), GenerationError> {
        let bad = |msg: String| Err(GenerationError::InvalidParams(msg));
        for (name, r, hi) in [
            ("grid_rows_range", self.grid_rows_range, MAX_GRID_DIM),
            ("grid_cols_range", self.grid_cols_range, MAX_GRID_DIM),
            ("n_objects_range", self.n_objects_range, usize::MAX),
        ] {
            if r.min == 0 || r.min > r.max || r.max > hi {
                return bad(format!("{name} {}..={} is empty or out of range", r.min, r.max));
            }
        }
        if !(1..=9).contains(&self.pad_color) {
            return bad(format!("pad_color {} outside 1..=9", self.pad_color));
        }
        if self.max_trials == 0 {
            return bad("max_trials must be at least 1".into());
        }
        if self.wanted_examples == 0 {
            return bad("wanted_examples must be at least 1".into());
        }
        self.object_constraints
            .validate()
            .or_else(|e| bad(e.to_string()))
    }
}

/// A grid with its placed objects.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scene {
    pub grid: Grid,
    pub placed: Vec<PlacedObject>,
}

impl Scene {
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self {
            grid: Grid::new(rows, cols).expect("dimensions validated by caller"),
            placed: Vec::new(),
        }
    }

    /// Paints every placed object onto a blank grid of the same size.
    pub fn render(&self) -> Grid {
        render_objects(self.grid.rows(), self.grid.cols(), &self.placed)
    }
}

/// Paints `objects` onto a blank `rows x cols` grid, later objects on top.
pub fn render_objects(rows: usize, cols: usize, objects: &[PlacedObject]) -> Grid {
    let mut cells = vec![vec![0u8; cols]; rows];
    for p in objects {
        for (r, c, v) in p.absolute_cells() {
            cells[r][c] = v;
        }
    }
    Grid::from_rows(&cells).expect("objects lie inside the grid")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskSample {
    pub input: Grid,
    pub output: Grid,
    pub sequence: TransformationSequence,
    pub task_code: Vec<String>,
    /// Seed that regenerates this sample via [`generate_task_seeded`].
    pub seed_trace: u64,
    pub input_objects: Vec<PlacedObject>,
    pub output_objects: Vec<PlacedObject>,
    /// Trials consumed, including the successful one.
    pub trials: usize,
}

/// Draws `depth` steps uniformly with replacement from `pool`.
pub fn sample_transformations(
    pool: &[Transformation],
    depth: usize,
    rng: &mut SeededRng,
) -> Result<TransformationSequence, SequenceBuildError> {
    if pool.is_empty() || depth == 0 {
        return Err(SequenceBuildError::Empty);
    }
    TransformationSequence::new((0..depth).map(|_| *rng.pick(pool)).collect())
}

/// `n_transforms ^ depth`, exactly.
pub fn task_space_size(n_transforms: u32, depth: u32) -> BigUint {
    BigUint::from(n_transforms).pow(depth)
}

/// Step names padded with `identity` to four tokens.
pub fn task_code(seq: &TransformationSequence) -> Result<Vec<String>, GenerationError> {
    if seq.depth() > TASK_CODE_LEN {
        return Err(GenerationError::DepthExceeded { depth: seq.depth() });
    }
    let mut code: Vec<String> = seq.steps().iter().map(|t| t.name().to_string()).collect();
    code.resize(TASK_CODE_LEN, IDENTITY_TOKEN.to_string());
    Ok(code)
}

/// Catalog entries of one bounding-box size that satisfy the merged
/// constraints, with the largest box they can reach under the sequence.
#[derive(Clone, Debug)]
struct Bucket {
    envelope: (usize, usize),
    members: Vec<u32>,
}

/// Generation context for one (params, sequence) pair over a catalog.
/// Building it resolves the catalog query once; every sample drawn from it
/// is a pure function of its seed.
#[derive(Clone, Debug)]
pub struct TaskGenerator<'a> {
    params: GenerationParams,
    sequence: TransformationSequence,
    catalog: &'a ObjectCatalog,
    transformer: Transformer,
    merged: ObjectConstraints,
    buckets: Vec<Bucket>,
}

impl<'a> TaskGenerator<'a> {
    pub fn new(
        params: &GenerationParams,
        sequence: &TransformationSequence,
        catalog: &'a ObjectCatalog,
    ) -> Result<Self, GenerationError> {
        params.validate()?;
        if sequence.depth() > TASK_CODE_LEN {
            return Err(GenerationError::DepthExceeded { depth: sequence.depth() });
        }
        let transformer = Transformer::with_pad_color(params.pad_color);
        let merged = params
            .object_constraints
            .and(&transformer.sequence_constraints(sequence.steps()));
        let mut by_dims: std::collections::BTreeMap<(usize, usize), Vec<u32>> = Default::default();
        for i in catalog.matching(&merged) {
            by_dims.entry(catalog.get(i).object.dims()).or_default().push(i as u32);
        }
        if by_dims.is_empty() {
            return Err(GenerationError::NoMatch);
        }
        let buckets = by_dims
            .into_iter()
            .map(|((r, c), members)| Bucket {
                envelope: sequence_envelope(sequence.steps(), r, c),
                members,
            })
            .collect();
        Ok(Self {
            params: params.clone(),
            sequence: sequence.clone(),
            catalog,
            transformer,
            merged,
            buckets,
        })
    }

    pub fn params(&self) -> &GenerationParams {
        &self.params
    }

    pub fn sequence(&self) -> &TransformationSequence {
        &self.sequence
    }

    /// Constraints every initial object satisfies.
    pub fn merged_constraints(&self) -> &ObjectConstraints {
        &self.merged
    }

    pub fn transformer(&self) -> &Transformer {
        &self.transformer
    }

    /// Number of catalog objects eligible under the merged constraints.
    pub fn candidate_count(&self) -> usize {
        self.buckets.iter().map(|b| b.members.len()).sum()
    }

    /// Samples grid size and object count, then draws and places objects.
    pub fn set_initial_grid(&self, rng: &mut SeededRng) -> Result<Scene, GenerationError> {
        let p = &self.params;
        let rows = rng.range_inclusive(p.grid_rows_range.min, p.grid_rows_range.max);
        let cols = rng.range_inclusive(p.grid_cols_range.min, p.grid_cols_range.max);
        let n = rng.range_inclusive(p.n_objects_range.min, p.n_objects_range.max);
        let fitting: Vec<&Bucket> = self
            .buckets
            .iter()
            .filter(|b| b.envelope.0 <= rows && b.envelope.1 <= cols)
            .collect();
        let total: usize = fitting.iter().map(|b| b.members.len()).sum();
        let mut scene = Scene::empty(rows, cols);
        for object in 0..n {
            if total == 0 {
                return Err(GenerationError::PlacementFailed { object });
            }
            let mut placed = None;
            for _ in 0..OBJECT_DRAW_BUDGET {
                let candidate = &self.catalog.get(nth_member(&fitting, rng.below(total))).object;
                let anchors = legal_anchors(&scene.grid, candidate);
                if !anchors.is_empty() {
                    placed = Some(PlacedObject::new(candidate.clone(), *rng.pick(&anchors)));
                    break;
                }
            }
            let placed = placed.ok_or(GenerationError::PlacementFailed { object })?;
            scene
                .grid
                .place_in_place(&placed, PlacementMode::Initial)
                .expect("anchor enumerated as legal");
            scene.placed.push(placed);
        }
        Ok(scene)
    }

    /// Generates the sample determined by `seed`.
    pub fn generate(&self, seed: u64) -> Result<TaskSample, GenerationError> {
        let mut rng = SeededRng::new(seed);
        for trial in 1..=self.params.max_trials {
            let Ok(input) = self.set_initial_grid(&mut rng) else {
                continue;
            };
            let mut output = input.clone();
            let transformed = (0..output.placed.len()).all(|i| {
                self.sequence
                    .steps()
                    .iter()
                    .all(|&t| transform_and_position(&mut output, i, t, &self.transformer).is_ok())
            });
            if transformed {
                return Ok(TaskSample {
                    input: input.grid,
                    output: output.grid,
                    sequence: self.sequence.clone(),
                    task_code: task_code(&self.sequence)?,
                    seed_trace: seed,
                    input_objects: input.placed,
                    output_objects: output.placed,
                    trials: trial,
                });
            }
        }
        Err(GenerationError::MaxTrialsExceeded {
            trials: self.params.max_trials,
        })
    }
}

fn nth_member(buckets: &[&Bucket], mut k: usize) -> usize {
    for b in buckets {
        if k < b.members.len() {
            return b.members[k] as usize;
        }
        k -= b.members.len();
    }
    unreachable!("index below the total member count")
}

/// Every anchor at which `object` can be placed in `Initial` mode, in
/// row-major order.
pub fn legal_anchors(grid: &Grid, object: &GridObject) -> Vec<Anchor> {
    let (rows, cols) = grid.dims();
    let (h, w) = object.dims();
    if h > rows || w > cols {
        return Vec::new();
    }
    let mut blocked = vec![false; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            if grid.get(r, c) != 0 {
                for nr in r.saturating_sub(1)..=(r + 1).min(rows - 1) {
                    for nc in c.saturating_sub(1)..=(c + 1).min(cols - 1) {
                        blocked[nr * cols + nc] = true;
                    }
                }
            }
        }
    }
    let cells: Vec<(usize, usize)> = object.cells().map(|(r, c, _)| (r, c)).collect();
    let mut out = Vec::new();
    for ar in 0..=rows - h {
        for ac in 0..=cols - w {
            if cells.iter().all(|&(r, c)| !blocked[(ar + r) * cols + ac + c]) {
                out.push(Anchor::new(ar, ac));
            }
        }
    }
    out
}

/// Re-places object `index` after applying `t`. Other objects stay where
/// they are; on error the scene is unchanged.
pub fn transform_and_position(
    scene: &mut Scene,
    index: usize,
    t: Transformation,
    transformer: &Transformer,
) -> Result<(), StepError> {
    let current = scene.placed[index].clone();
    let next = transformer.apply_unchecked(t, &current.object)?;
    let anchor = current.anchor.shifted(next.anchor_delta).ok_or(StepError::OutOfBounds)?;
    let moved = PlacedObject::new(next.object, anchor);
    scene.grid.erase(&current);
    match scene.grid.place_in_place(&moved, PlacementMode::PostTransform) {
        Ok(()) => {
            scene.placed[index] = moved;
            Ok(())
        }
        Err(e) => {
            scene
                .grid
                .place_in_place(&current, PlacementMode::PostTransform)
                .expect("restoring the previous state");
            Err(match e {
                PlacementError::Overlap { row, col } | PlacementError::TouchViolation { row, col } => {
                    StepError::Overlap { row, col }
                }
                PlacementError::OutOfBounds => StepError::OutOfBounds,
            })
        }
    }
}

/// Builds an initial scene with a fresh context.
pub fn set_initial_grid(
    params: &GenerationParams,
    seq: &TransformationSequence,
    catalog: &ObjectCatalog,
    rng: &mut SeededRng,
) -> Result<Scene, GenerationError> {
    TaskGenerator::new(params, seq, catalog)?.set_initial_grid(rng)
}

/// Generates the sample determined by `seed`.
pub fn generate_task_seeded(
    params: &GenerationParams,
    seq: &TransformationSequence,
    catalog: &ObjectCatalog,
    seed: u64,
) -> Result<TaskSample, GenerationError> {
    TaskGenerator::new(params, seq, catalog)?.generate(seed)
}

/// Draws a sample seed from `rng` and generates that sample.
pub fn generate_task(
    params: &GenerationParams,
    seq: &TransformationSequence,
    catalog: &ObjectCatalog,
    rng: &mut SeededRng,
) -> Result<TaskSample, GenerationError> {
    generate_task_seeded(params, seq, catalog, rng.next_u64())
}

/// `params.wanted_examples` samples sharing one sequence.
pub fn generate_examples(
    params: &GenerationParams,
    seq: &TransformationSequence,
    catalog: &ObjectCatalog,
    rng: &mut SeededRng,
) -> Result<Vec<TaskSample>, GenerationError> {
    let gen = TaskGenerator::new(params, seq, catalog)?;
    (0..params.wanted_examples).map(|_| gen.generate(rng.next_u64())).collect()
}

/// Re-applies the sequence to every input object without the scene
/// machinery. Matches `sample.output` for every successful sample.
pub fn rederive_output(sample: &TaskSample, transformer: &Transformer) -> Result<Grid, StepError> {
    let mut out = Vec::with_capacity(sample.input_objects.len());
    for p in &sample.input_objects {
        let t = transformer
            .apply_sequence_with(sample.sequence.steps(), &p.object, StepCheck::Skip)
            .map_err(|e| StepError::Transform(e.source))?;
        let anchor = p.anchor.shifted(t.anchor_delta).ok_or(StepError::OutOfBounds)?;
        out.push(PlacedObject::new(t.object, anchor));
    }
    let (rows, cols) = sample.input.dims();
    if out
        .iter()
        .any(|p| p.anchor.row + p.object.rows() > rows || p.anchor.col + p.object.cols() > cols)
    {
        return Err(StepError::OutOfBounds);
    }
    Ok(render_objects(rows, cols, &out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{generate_catalog, CatalogConfig};
    use std::sync::OnceLock;
    use Transformation::*;

    fn catalog() -> &'static ObjectCatalog {
        static CAT: OnceLock<ObjectCatalog> = OnceLock::new();
        CAT.get_or_init(|| {
            generate_catalog(&CatalogConfig {
                max_dim: 8,
                target_count: 2000,
                seed: 3,
            })
            .unwrap()
        })
    }

    fn seq(steps: &[Transformation]) -> TransformationSequence {
        TransformationSequence::new(steps.to_vec()).unwrap()
    }

    fn compgen() -> GenerationParams {
        GenerationParams::fixed(20, 20, 2).with_constraints(ObjectConstraints {
            connectivity: Some(vec![crate::object::Connectivity::Four]),
            ..ObjectConstraints::max_dims(6, 6)
        })
    }

    #[test]
    fn task_codes() {
        assert_eq!(
            task_code(&seq(&[MirrorHorizontal, Rotate90])).unwrap(),
            ["mirror_horizontal", "rotate_90", "identity", "identity"]
        );
        assert_eq!(
            task_code(&seq(&[TranslateUp])).unwrap(),
            ["translate_up", "identity", "identity", "identity"]
        );
        assert_eq!(
            task_code(&seq(&[TranslateUp; 5])),
            Err(GenerationError::DepthExceeded { depth: 5 })
        );
    }

    #[test]
    fn task_space_sizes() {
        assert_eq!(task_space_size(28, 1), BigUint::from(28u32));
        assert_eq!(task_space_size(3, 2), BigUint::from(9u32));
        assert_eq!(task_space_size(28, 5), BigUint::from(17_210_368u64));
    }

    #[test]
    fn sampled_sequences() {
        let mut rng = SeededRng::new(1);
        let pool = [TranslateUp, Rotate90, MirrorHorizontal];
        let mut seen = std::collections::HashSet::new();
        for _ in 0..500 {
            let s = sample_transformations(&pool, 2, &mut rng).unwrap();
            assert_eq!(s.depth(), 2);
            seen.insert(s.canonical_name());
        }
        assert_eq!(seen.len(), 9);
        let single = sample_transformations(&[PadTop], 3, &mut rng).unwrap();
        assert_eq!(single.steps(), &[PadTop, PadTop, PadTop]);
        let a = sample_transformations(&pool, 4, &mut SeededRng::new(9)).unwrap();
        let b = sample_transformations(&pool, 4, &mut SeededRng::new(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn compgen_sample_matches_rederivation() {
        let s = seq(&[TranslateUp, Rotate90]);
        let sample = generate_task_seeded(&compgen(), &s, catalog(), 5).unwrap();
        assert_eq!(sample.input.dims(), (20, 20));
        assert_eq!(sample.input_objects.len(), 2);
        assert_eq!(rederive_output(&sample, &Transformer::default()).unwrap(), sample.output);
        assert_eq!(generate_task_seeded(&compgen(), &s, catalog(), 5).unwrap(), sample);
    }

    #[test]
    fn initial_scene_is_consistent() {
        let gen = TaskGenerator::new(&GenerationParams::fixed(5, 5, 1).with_constraints(ObjectConstraints::max_dims(2, 2)), &seq(&[TranslateUp]), catalog()).unwrap();
        let scene = gen.set_initial_grid(&mut SeededRng::new(0)).unwrap();
        assert_eq!(scene.grid.dims(), (5, 5));
        assert_eq!(scene.render(), scene.grid);
    }

    #[test]
    fn fill_sequences_place_objects_with_holes() {
        let gen = TaskGenerator::new(&compgen(), &seq(&[FillHolesSameColor]), catalog()).unwrap();
        let mut rng = SeededRng::new(2);
        for _ in 0..20 {
            let scene = gen.set_initial_grid(&mut rng).unwrap();
            for p in &scene.placed {
                assert!(crate::morph::hole_count_cells(&p.object) > 0);
            }
        }
    }

    #[test]
    fn three_by_three_cannot_hold_four_objects() {
        let params = GenerationParams {
            max_trials: 50,
            ..GenerationParams::fixed(3, 3, 4)
        };
        assert_eq!(
            generate_task_seeded(&params, &seq(&[TranslateUp]), catalog(), 0),
            Err(GenerationError::MaxTrialsExceeded { trials: 50 })
        );
    }

    #[test]
    fn ten_objects_on_five_by_five_fail_placement() {
        let gen = TaskGenerator::new(&GenerationParams::fixed(5, 5, 10), &seq(&[TranslateUp]), catalog()).unwrap();
        assert!(matches!(
            gen.set_initial_grid(&mut SeededRng::new(0)),
            Err(GenerationError::PlacementFailed { .. })
        ));
    }

    #[test]
    fn impossible_constraints_are_no_match() {
        let params = GenerationParams::fixed(20, 20, 1).with_constraints(ObjectConstraints {
            rows: Some(SizeRange::at_least(16)),
            ..Default::default()
        });
        assert_eq!(
            TaskGenerator::new(&params, &seq(&[TranslateUp]), catalog()).err(),
            Some(GenerationError::NoMatch)
        );
    }

    fn one_dot(rows: usize, cols: usize, at: (usize, usize)) -> Scene {
        let mut scene = Scene::empty(rows, cols);
        let p = PlacedObject::new(GridObject::from_rows(&[[3u8]]).unwrap(), Anchor::new(at.0, at.1));
        scene.grid.place_in_place(&p, PlacementMode::Initial).unwrap();
        scene.placed.push(p);
        scene
    }

    #[test]
    fn translate_positions() {
        let t = Transformer::default();
        let mut scene = one_dot(5, 5, (2, 2));
        transform_and_position(&mut scene, 0, TranslateUp, &t).unwrap();
        assert_eq!(scene.placed[0].anchor, Anchor::new(1, 2));
        assert_eq!(scene.grid.get(1, 2), 3);
        assert_eq!(scene.grid.get(2, 2), 0);

        let mut top = one_dot(5, 5, (0, 2));
        let before = top.clone();
        assert_eq!(transform_and_position(&mut top, 0, TranslateUp, &t), Err(StepError::OutOfBounds));
        assert_eq!(top, before);
    }

    #[test]
    fn translate_into_neighbor_overlaps() {
        let t = Transformer::default();
        let mut scene = one_dot(5, 5, (2, 0));
        let b = PlacedObject::new(GridObject::from_rows(&[[4u8]]).unwrap(), Anchor::new(2, 1));
        scene.grid.place_in_place(&b, PlacementMode::PostTransform).unwrap();
        scene.placed.push(b);
        assert_eq!(
            transform_and_position(&mut scene, 0, TranslateRight, &t),
            Err(StepError::Overlap { row: 2, col: 1 })
        );
    }

    #[test]
    fn legal_anchor_enumeration_matches_check() {
        let scene = one_dot(6, 6, (2, 3));
        let obj = GridObject::from_rows(&[[1u8, 1]]).unwrap();
        let anchors = legal_anchors(&scene.grid, &obj);
        for r in 0..6 {
            for c in 0..6 {
                let ok = scene.grid.check_placement(&obj, Anchor::new(r, c), PlacementMode::Initial).is_ok();
                assert_eq!(ok, anchors.contains(&Anchor::new(r, c)), "({r}, {c})");
            }
        }
    }

    #[test]
    fn params_validation() {
        let mut p = GenerationParams::fixed(5, 5, 1);
        p.max_trials = 0;
        assert!(matches!(p.validate(), Err(GenerationError::InvalidParams(_))));
        let mut p = GenerationParams::fixed(5, 5, 1);
        p.grid_rows_range = SizeRange::new(6, 5);
        assert!(p.validate().is_err());
        assert!(GenerationParams::fixed(31, 5, 1).validate().is_err());
    }
}
