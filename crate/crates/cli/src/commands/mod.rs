pub mod fit;
pub mod generate;
pub mod noise;
pub mod report;
pub mod simulate;
pub mod validate;
