//! Synthesis with sketches spread over a thread pool.

use rayon::prelude::*;
use rayon::ThreadPool;
use sketchql_core::engine::{assemble, input_sketches, run_sketch, Input, SynthesisResult};
use sketchql_core::nlparser::ParserModel;
use sketchql_core::similarity::SimilarityProvider;
use sketchql_core::{Catalog, Config};

/// Like `engine::synthesize`, with each sketch's repair loop on its own
/// task. Runs come back in sketch order, so the result does not depend on
/// the pool size.
pub fn synthesize_parallel(
    pool: &ThreadPool,
    input: &Input,
    catalog: &Catalog,
    sim: &SimilarityProvider,
    model: &ParserModel,
    cfg: &Config,
) -> SynthesisResult {
    let sketches = input_sketches(input, model, cfg);
    let runs = pool.install(|| {
        sketches
            .par_iter()
            .map(|s| run_sketch(s, catalog, sim, cfg))
            .collect::<Vec<_>>()
    });
    assemble(runs, cfg)
}

pub fn pool(threads: Option<usize>) -> Result<ThreadPool, rayon::ThreadPoolBuildError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    builder.build()
}
