//! `fairsel synth`: emit the 2-D Gaussian benchmark with a schema sidecar.

use std::path::Path;

use fairsel::dataio::{synth_gaussian_2d, synthetic_schema, write_dataset_csv};

use crate::CliError;

pub fn run(seed: u64, out: &Path) -> Result<(), CliError> {
    let data = synth_gaussian_2d::<f64>(seed);
    write_dataset_csv(&data, out)?;
    let schema_path = out.with_extension("schema.json");
    let schema_text = serde_json::to_string_pretty(&synthetic_schema()).expect("schema serializes");
    std::fs::write(&schema_path, schema_text)?;
    println!(
        "wrote {} points to {} (schema: {})",
        data.len(),
        out.display(),
        schema_path.display()
    );
    Ok(())
}
