//! Output-file helpers. Every file starts with a `# config-hash: ...`
//! comment so results can be traced back to the exact resolved settings.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use multlfg_core::Field;

use crate::commands::CmdError;

pub fn csv_writer(path: &Path, hash: &str) -> Result<csv::Writer<BufWriter<File>>, CmdError> {
    let mut file = BufWriter::new(File::create(path)?);
    writeln!(file, "# config-hash: {hash}")?;
    Ok(csv::WriterBuilder::new().from_writer(file))
}

pub fn write_pgm(path: &Path, field: &Field, hash: &str) -> Result<(), CmdError> {
    let mut file = BufWriter::new(File::create(path)?);
    field.write_pgm(&mut file, &[format!("config-hash: {hash}")])?;
    Ok(())
}
