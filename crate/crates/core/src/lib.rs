//! Layer-aware net batching for parallel global routing.
//!
//! The engine partitions a netlist into batches of nets that share no routing
//! resource, so every batch can be routed concurrently. Batching runs in three
//! stages: an initial assignment (a generator model or a seeded spatial hash),
//! a per-batch layer-aware conflict evaluation, and a greedy reallocation of
//! the nets that conflicted.

pub mod baselines;
pub mod batchfile;
pub mod error;
pub mod evaluator;
pub mod export;
pub mod initial;
pub mod netlist;
pub mod occupancy;
pub mod overlap;
pub mod pipeline;
pub mod reallocator;

pub use error::{Error, Result};
pub use evaluator::{evaluate_batches, EvaluationResult};
pub use initial::{
    assign_batches, chunk_size, extract_features, fallback_assign, Activation, AssignmentVector,
    DenseLayer, FeatureMatrix, GeneratorModel, FEATURE_DIM,
};
pub use netlist::{
    build_rsmt, generate_synthetic, GridDims, Net, NetId, Netlist, Orientation, Pin, Segment,
    SynthConfig,
};
pub use occupancy::{linearize, select_representation, OccupancyMap, Representation};
pub use overlap::{build_conflict_graph, ConflictGraph, Strategy};
pub use pipeline::{
    compare_strategies, run_pipeline, validate_result, PipelineConfig, PipelineStats,
    ValidityReport,
};
pub use reallocator::{reallocate, BatchingResult, ReallocStats};
