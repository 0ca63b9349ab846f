pub mod export;
pub mod fit;
pub mod grid;
pub mod oracle_check;
pub mod scorer;
pub mod select;
pub mod synth;
