//! Per-sample generation timing.

use std::time::Instant;

use crate::catalog::ObjectCatalog;
use crate::generator::{sample_transformations, GenerationError, GenerationParams, TaskGenerator};
use crate::object::ObjectConstraints;
use crate::rng::SeededRng;
use crate::transform::Transformation;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Timing {
    pub samples: usize,
    pub mean_ms: f64,
    pub sd_ms: f64,
}

/// 20x20 grid, four objects of at most 5x5, depth-2 sequences drawn from
/// every atomic transformation.
pub fn throughput_params() -> GenerationParams {
    GenerationParams::fixed(20, 20, 4).with_constraints(ObjectConstraints::max_dims(5, 5))
}

/// Times `n` samples, each with a freshly drawn depth-2 sequence. The timed
/// region covers the catalog query and the generation loop. A sequence that
/// exhausts its trials is replaced by a new draw and the time already spent
/// counts toward the same sample.
pub fn measure_throughput(catalog: &ObjectCatalog, n: usize, seed: u64) -> Result<Timing, GenerationError> {
    let params = throughput_params();
    let mut rng = SeededRng::new(seed);
    let mut times = Vec::with_capacity(n);
    for _ in 0..n {
        let start = Instant::now();
        loop {
            let seq = sample_transformations(Transformation::atomics(), 2, &mut rng).expect("non-empty pool");
            match TaskGenerator::new(&params, &seq, catalog)?.generate(rng.next_u64()) {
                Ok(_) => break,
                Err(GenerationError::MaxTrialsExceeded { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        times.push(start.elapsed().as_secs_f64() * 1e3);
    }
    let mean = times.iter().sum::<f64>() / n.max(1) as f64;
    let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n.saturating_sub(1).max(1) as f64;
    Ok(Timing {
        samples: n,
        mean_ms: mean,
        sd_ms: var.sqrt(),
    })
}
