pub mod report;
pub mod spec_file;
pub mod word_spec;
