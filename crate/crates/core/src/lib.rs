//! Deterministic generator for object-centric grid transformation tasks.
//!
//! Objects come from a pre-generated [`ObjectCatalog`], are placed on a
//! [`Grid`] and transformed by a [`TransformationSequence`] built from 28
//! atomic [`Transformation`]s. The [`benchmark`] module materializes the
//! forty compositional and environment experiments as deduplicated splits.

pub mod benchmark;
pub mod catalog;
pub mod generator;
pub mod grid;
pub mod io;
pub mod morph;
pub mod object;
pub mod render;
pub mod rng;
pub mod stats;
pub mod transform;

pub use benchmark::{
    build_experiment, generate_splits, grid_accuracy, BenchmarkError, DatasetSplits, ExperimentSpec, PredictionRecord,
    Scale, Setting, SplitName, SplitSizes, Study,
};
pub use catalog::{generate_catalog, CatalogConfig, CatalogError, ObjectCatalog};
pub use generator::{
    generate_task, generate_task_seeded, sample_transformations, task_code, task_space_size, GenerationError,
    GenerationParams, Scene, TaskGenerator, TaskSample,
};
pub use grid::{Anchor, Color, Grid, PlacedObject, PlacementError, PlacementMode};
pub use io::{read_jsonl, write_jsonl, Manifest, TaskRecord};
pub use object::{classify, GridObject, ObjectConstraints, ObjectProperties};
pub use rng::SeededRng;
pub use transform::{Transformation, TransformationSequence, Transformer};
