pub mod cli;
pub mod corpus;
pub mod evalrunner;
pub mod llmgate;
pub mod metrics;
pub mod promptkit;
pub mod story;
