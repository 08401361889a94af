pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod normal;
pub mod oracle;
pub mod posterior;
pub mod report;
pub mod study;
