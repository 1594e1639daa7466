//! Seeded AutoML pipeline search, conditional parallel coordinates layout,
//! leaderboard analytics and deterministic SVG export.

pub mod analytics;
pub mod layout;
pub mod metric;
pub mod query;
pub mod rng;
pub mod runlog;
pub mod search;
pub mod search_space;
pub mod surface;
pub mod svg;

pub use metric::{Metric, Metrics};
pub use search::{
    perturb, run_search, run_search_with, satisfies, ConfigError, Phase, PipelineCandidate,
    RunSnapshot, RunStatus, SearchConfig,
};
pub use search_space::{
    count_structures, default_configuration, parse_space, serialize_space, validate_space,
    Configuration, SearchSpace, SpaceError, Value,
};
pub use surface::{make_surface, ResponseSurface};

pub use analytics::{leaderboard, LeaderboardRow, QueryError};
pub use layout::{compute_layout, parse_expansion, toggle, CpcLayout, ExpansionState, LayoutError};
pub use runlog::{read_run_log, write_run_log, LogError, RunHeader, RunLogWriter};
pub use svg::export_svg;
