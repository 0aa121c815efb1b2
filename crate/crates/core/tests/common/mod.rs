#![allow(dead_code)]

use std::sync::OnceLock;

use gridtask_core::{generate_catalog, CatalogConfig, GridObject, ObjectCatalog};
use proptest::prelude::*;

/// Default catalog, built once per test binary.
pub fn catalog() -> &'static ObjectCatalog {
    static CAT: OnceLock<ObjectCatalog> = OnceLock::new();
    CAT.get_or_init(|| generate_catalog(&CatalogConfig::default()).unwrap())
}

/// Random non-empty objects up to `max` x `max` with colors 1..=9.
pub fn object(max: usize) -> impl Strategy<Value = GridObject> {
    (1..=max, 1..=max)
        .prop_flat_map(|(r, c)| proptest::collection::vec(prop_oneof![2 => Just(0u8), 3 => 1u8..=9], r * c).prop_map(move |v| (c, v)))
        .prop_filter_map("empty", |(c, v)| {
            let rows: Vec<Vec<u8>> = v.chunks(c).map(<[u8]>::to_vec).collect();
            GridObject::from_rows(&rows).ok()
        })
}

/// Random non-empty single-colored objects.
pub fn single_colored(max: usize) -> impl Strategy<Value = GridObject> {
    (object(max), 1u8..=9).prop_map(|(o, color)| {
        let rows: Vec<Vec<u8>> = (0..o.rows())
            .map(|r| (0..o.cols()).map(|c| if o.is_set(r, c) { color } else { 0 }).collect())
            .collect();
        GridObject::from_rows(&rows).unwrap()
    })
}
