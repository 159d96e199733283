use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use adjscale::scale::{Language, ScaleDataset, ScaleManifest};
use anyhow::{Context, Result};

pub fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(f))
}

/// Write through a buffered file, creating parent directories.
pub fn write_file<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_file(path, |w| Ok(w.write_all(text.as_bytes())?))
}

/// Load with an explicit manifest or the `.toml` sidecar.
pub fn load_dataset(path: &Path, manifest: Option<&Path>) -> Result<ScaleDataset> {
    let manifest_path = manifest.map_or_else(|| ScaleManifest::sidecar_path(path), Path::to_path_buf);
    let m = ScaleManifest::load(&manifest_path).with_context(|| format!("manifest {}", manifest_path.display()))?;
    ScaleDataset::load_with(path, &m).with_context(|| format!("scale file {}", path.display()))
}

/// Like [`load_dataset`] but files without a sidecar are named after
/// their stem and read as `language`.
pub fn load_dataset_or_default(path: &Path, language: &str) -> Result<ScaleDataset> {
    let sidecar = ScaleManifest::sidecar_path(path);
    if sidecar.exists() {
        return load_dataset(path, None);
    }
    let m = ScaleManifest {
        name: path
            .file_stem()
            .map_or_else(|| "scales".into(), |s| s.to_string_lossy().into_owned()),
        dataset: adjscale::scale::DatasetTag::Custom("custom".into()),
        language: Language::new(language)?,
    };
    ScaleDataset::load_with(path, &m).with_context(|| format!("scale file {}", path.display()))
}
