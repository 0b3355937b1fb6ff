//! Structure ingestion, randomized verification suites, report emission, and
//! the pieces behind the `legctl` command line.

pub mod config;
pub mod eval;
pub mod examples;
pub mod report;
pub mod sample;
pub mod suites;

pub use config::{load_config, load_config_str, Loaded, NamedScalar, NamedVector};
pub use eval::{eval_op, parse_point, EvalOutput, EvalRequest, OP_NAMES};
pub use examples::{builtin, builtin_names, builtin_toml, BUILTINS};
pub use report::{PropertyRecord, SuiteReport};
pub use sample::BoxSampler;
pub use suites::{run_suite, SuiteOptions, SUITE_NAMES};
