pub mod benchmarks;
pub mod cli;
pub mod domain;
pub mod experiment;
pub mod format;
pub mod learner;
pub mod oracle;
pub mod planner;
pub mod symbolic;
