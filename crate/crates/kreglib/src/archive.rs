//! Zip export and import of a library directory.
//!
//! Archives hold the top-level CSV and JSON files followed by the bin
//! files, in sorted order with fixed timestamps and permissions, so the
//! same library always yields the same bytes. Checkpoints are not exported.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, DateTime, ZipArchive, ZipWriter};

use crate::layout::{BINS, CONFIG, MANIFEST, MERGED, SIZES};

/// Archive member names, top-level files first.
fn members(root: &Path) -> Result<Vec<String>> {
    let mut out: Vec<String> =
        [CONFIG, MANIFEST, BINS, SIZES, MERGED].into_iter().filter(|f| root.join(f).is_file()).map(String::from).collect();
    if !out.iter().any(|m| m == MANIFEST) {
        bail!("{} has no {MANIFEST}", root.display());
    }
    let mut dirs: Vec<(usize, String)> = Vec::new();
    for entry in fs::read_dir(root)? {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some(n) = name.strip_prefix('n').and_then(|s| s.parse().ok()) {
            if entry.file_type()?.is_dir() {
                dirs.push((n, name));
            }
        }
    }
    dirs.sort();
    for (_, dir) in dirs {
        let mut files: Vec<String> = fs::read_dir(root.join(&dir))?
            .filter_map(|e| e.ok())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .filter(|f| f.ends_with(".g6"))
            .collect();
        files.sort();
        out.extend(files.into_iter().map(|f| format!("{dir}/{f}")));
    }
    Ok(out)
}

pub fn export_library(root: &Path, archive: &Path) -> Result<usize> {
    let names = members(root)?;
    let file = fs::File::create(archive).with_context(|| format!("creating {}", archive.display()))?;
    let mut zip = ZipWriter::new(file);
    let options = SimpleFileOptions::default()
        .compression_method(CompressionMethod::Deflated)
        .last_modified_time(DateTime::default())
        .unix_permissions(0o644);
    for name in &names {
        zip.start_file(name.as_str(), options)?;
        zip.write_all(&fs::read(root.join(name))?)?;
    }
    zip.finish()?.sync_all()?;
    Ok(names.len())
}

/// Extracts `archive` into `dest`, refusing members that would escape it.
pub fn import_library(archive: &Path, dest: &Path) -> Result<Vec<PathBuf>> {
    let file = fs::File::open(archive).with_context(|| format!("opening {}", archive.display()))?;
    let mut zip = ZipArchive::new(file)?;
    let mut written = Vec::with_capacity(zip.len());
    for i in 0..zip.len() {
        let mut member = zip.by_index(i)?;
        let Some(rel) = member.enclosed_name() else {
            bail!("unsafe member name {:?}", member.name());
        };
        let path = dest.join(rel);
        if member.is_dir() {
            fs::create_dir_all(&path)?;
            continue;
        }
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut bytes = Vec::new();
        member.read_to_end(&mut bytes)?;
        fs::write(&path, bytes)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_only_archive_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let lib = dir.path().join("lib");
        fs::create_dir(&lib).unwrap();
        fs::write(lib.join(MANIFEST), "n,k\n").unwrap();
        let zip_path = dir.path().join("a.zip");
        assert_eq!(export_library(&lib, &zip_path).unwrap(), 1);
        let first = fs::read(&zip_path).unwrap();
        export_library(&lib, &zip_path).unwrap();
        assert_eq!(fs::read(&zip_path).unwrap(), first);
        let out = dir.path().join("out");
        let files = import_library(&zip_path, &out).unwrap();
        assert_eq!(files, vec![out.join(MANIFEST)]);
        assert_eq!(fs::read_to_string(out.join(MANIFEST)).unwrap(), "n,k\n");
    }

    #[test]
    fn missing_manifest_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(export_library(dir.path(), &dir.path().join("a.zip")).is_err());
    }
}
