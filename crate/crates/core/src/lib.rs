pub mod error;
pub mod series;
pub mod weights;
pub mod cosine_space;
pub mod integration;
pub mod approximation;
pub mod tractability;
pub mod config;
pub mod report;
pub mod cli;
