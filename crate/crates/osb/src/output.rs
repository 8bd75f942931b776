use std::io::Write;
use std::path::Path;

use tempfile::NamedTempFile;

use crate::error::OsbError;

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), OsbError> {
    let shown = path.display().to_string();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| OsbError::io(&shown, e))?;
    tmp.write_all(contents).map_err(|e| OsbError::io(&shown, e))?;
    tmp.persist(path).map_err(|e| OsbError::io(&shown, e.error))?;
    Ok(())
}

/// To `path` if given, else to stdout.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<(), OsbError> {
    match path {
        Some(p) => write_atomic(p, contents.as_bytes()),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| OsbError::io("<stdout>", e))
        }
    }
}
