//! CSV conventions shared by every file this workspace reads or writes:
//! a header row, trimmed fields, and optional `#` comment lines carrying
//! provenance metadata above the header.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

pub fn reader(path: &Path) -> Result<csv::Reader<File>, csv::Error> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
}

/// Writes `header` then `rows` to `path`, preceded by `# <preamble>` when given.
/// The header is explicit so that empty tables stay readable.
pub fn write<T, I>(path: &Path, preamble: Option<&str>, header: &[&str], rows: I) -> Result<(), csv::Error>
where
    T: Serialize,
    I: IntoIterator<Item = T>,
{
    let mut file = File::create(path)?;
    if let Some(p) = preamble {
        writeln!(file, "# {p}")?;
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
