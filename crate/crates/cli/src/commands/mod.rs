pub mod analyze;
pub mod annotate;
pub mod generate;
pub mod prefs;
pub mod report;
pub mod synth;
pub mod validate;
