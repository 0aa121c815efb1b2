//! Shared fixtures for the criterion benchmarks.

use gridtask_core::{generate_catalog, CatalogConfig, ObjectCatalog};

/// The default full-size catalog.
pub fn full_catalog() -> ObjectCatalog {
    generate_catalog(&CatalogConfig::default()).expect("default catalog is reachable")
}
