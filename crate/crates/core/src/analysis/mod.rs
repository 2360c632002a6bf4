pub mod energy;
pub mod report;
pub mod spectrum;
pub mod stats;
