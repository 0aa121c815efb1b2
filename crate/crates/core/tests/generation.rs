mod common;

use gridtask_core::benchmark::{audit, dedup_key};
use gridtask_core::generator::{rederive_output, Scene};
use gridtask_core::io::{read_jsonl, read_manifest, split_records, write_dataset, write_jsonl_to, read_jsonl_from};
use gridtask_core::object::ObjectConstraints;
use gridtask_core::{
    build_experiment, generate_splits, generate_task, sample_transformations, GenerationParams, SeededRng, Setting,
    SplitName, SplitSizes, TaskGenerator, Transformation,
};
use proptest::prelude::*;

fn random_params(rng: &mut SeededRng) -> GenerationParams {
    let lo = 8 + rng.below(8);
    let hi = lo + rng.below(6);
    let n = 1 + rng.below(3);
    GenerationParams {
        grid_rows_range: gridtask_core::object::SizeRange::new(lo, hi),
        grid_cols_range: gridtask_core::object::SizeRange::new(lo, hi),
        n_objects_range: gridtask_core::object::SizeRange::new(1, n),
        ..GenerationParams::fixed(lo, lo, 1)
    }
    .with_constraints(ObjectConstraints::max_dims(4, 4))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn samples_rederive_and_replay(seed in any::<u64>()) {
        let cat = common::catalog();
        let mut rng = SeededRng::new(seed);
        let params = random_params(&mut rng);
        let depth = 1 + rng.below(3);
        let seq = sample_transformations(Transformation::atomics(), depth, &mut rng).unwrap();
        let Ok(gen) = TaskGenerator::new(&params, &seq, cat) else { return Ok(()) };
        let Ok(sample) = gen.generate(rng.next_u64()) else { return Ok(()) };
        prop_assert_eq!(sample.input.dims(), sample.output.dims());
        let scene = Scene { grid: sample.input.clone(), placed: sample.input_objects.clone() };
        prop_assert_eq!(scene.render(), sample.input.clone());
        prop_assert_eq!(rederive_output(&sample, gen.transformer()).unwrap(), sample.output.clone());
        prop_assert_eq!(gen.generate(sample.seed_trace).unwrap(), sample);
    }
}

#[test]
fn generate_task_draws_replayable_seeds() {
    let cat = common::catalog();
    let params = GenerationParams::fixed(15, 15, 2).with_constraints(ObjectConstraints::max_dims(5, 5));
    let seq = gridtask_core::TransformationSequence::parse("mirror_horizontal,rotate_90").unwrap();
    let mut a = SeededRng::new(8);
    let mut b = SeededRng::new(8);
    let x = generate_task(&params, &seq, cat, &mut a).unwrap();
    let y = generate_task(&params, &seq, cat, &mut b).unwrap();
    assert_eq!(x, y);
    assert_eq!(gridtask_core::generate_task_seeded(&params, &seq, cat, x.seed_trace).unwrap(), x);
}

fn tiny() -> SplitSizes {
    SplitSizes {
        train: 200,
        val_id: 20,
        val_ood: 20,
        test_id: 20,
        test_ood: 20,
    }
}

#[test]
fn splits_are_deterministic_and_pass_audit() {
    let cat = common::catalog();
    for (setting, index) in [(Setting::C1, 2), (Setting::C3, 5), (Setting::G3, 4), (Setting::G5, 1)] {
        let spec = build_experiment(setting, index).unwrap().with_sizes(tiny());
        let a = generate_splits(&spec, cat, 3, Some(1)).unwrap();
        let b = generate_splits(&spec, cat, 3, Some(3)).unwrap();
        assert_eq!(a, b, "{}", spec.name());
        assert_eq!(audit(&a, 1000), Vec::<String>::new(), "{}", spec.name());
    }
}

#[test]
fn ledger_rejects_repeats_in_a_tiny_pool() {
    // A 1x1 grid admits nine single-cell inputs, so the pool runs dry.
    let cat = common::catalog();
    let mut spec = build_experiment(Setting::G1, 3).unwrap().with_sizes(SplitSizes {
        train: 9,
        val_id: 1,
        val_ood: 0,
        test_id: 0,
        test_ood: 0,
    });
    spec.env_train = GenerationParams::fixed(1, 1, 1);
    spec.env_ood = spec.env_train.clone();
    let err = generate_splits(&spec, cat, 0, None).unwrap_err();
    assert!(matches!(err, gridtask_core::BenchmarkError::ExhaustedUniquePool { split: SplitName::ValId, index: 0, .. }), "{err}");
    spec.split_sizes.val_id = 0;
    let ok = generate_splits(&spec, cat, 0, None).unwrap();
    let keys: std::collections::HashSet<_> = ok.split(SplitName::Train).iter().map(dedup_key).collect();
    assert_eq!(keys.len(), 9);
}

#[test]
fn dataset_files_roundtrip_canonically() {
    let cat = common::catalog();
    let spec = build_experiment(Setting::C2, 1).unwrap().with_sizes(tiny());
    let splits = generate_splits(&spec, cat, 11, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), &splits).unwrap();
    let manifest = read_manifest(dir.path()).unwrap();
    assert_eq!(manifest.master_seed, 11);
    assert_eq!(manifest.catalog_hash, cat.content_hash());
    assert_eq!(manifest.experiment, spec);
    for (name, samples) in splits.iter() {
        let path = dir.path().join(format!("{name}.jsonl"));
        let records = read_jsonl(&path).unwrap();
        assert_eq!(records, split_records(&spec, name, samples));
        assert_eq!(manifest.counts[name.as_str()], records.len());
        let mut rewritten = Vec::new();
        write_jsonl_to(&records, &mut rewritten).unwrap();
        assert_eq!(rewritten, std::fs::read(&path).unwrap());
        assert_eq!(read_jsonl_from(rewritten.as_slice()).unwrap(), records);
    }
}
