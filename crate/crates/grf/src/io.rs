//! Artifact writing: atomic files, CSV tables, provenance sidecars, field
//! snapshots.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use grf_core::datasets::Dataset;
use grf_core::SpectralField;
use serde::Serialize;

use crate::Failure;

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("artifact");
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let result = fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(bytes)?;
            f.sync_all()
        })
        .and_then(|()| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Failure::io(path, e));
    }
    Ok(())
}

/// Shortest round-trip decimal form of a double.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// A CSV table rendered to a string; numbers use [`fmt_f64`].
#[derive(Debug, Clone)]
pub struct Table {
    text: String,
    width: usize,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let cols: Vec<&str> = header.iter().map(|h| h.as_ref()).collect();
        Self { text: format!("{}\n", cols.join(",")), width: cols.len() }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        debug_assert_eq!(cells.len(), self.width);
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            match cell {
                Cell::F(v) => self.text.push_str(&fmt_f64(*v)),
                Cell::U(v) => write!(self.text, "{v}").unwrap(),
                Cell::S(v) => self.text.push_str(v),
            }
        }
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

#[derive(Debug, Clone)]
pub enum Cell {
    F(f64),
    U(u64),
    S(String),
}

/// Everything a run writes goes through here so each file gets a sidecar.
#[derive(Debug)]
pub struct ArtifactWriter<C: Serialize> {
    dir: PathBuf,
    command: &'static str,
    config: C,
    written: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Provenance<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    artifact: &'a str,
    config: &'a C,
}

impl<C: Serialize> ArtifactWriter<C> {
    pub fn new(dir: &Path, command: &'static str, config: C) -> Self {
        Self { dir: dir.to_path_buf(), command, config, written: Vec::new() }
    }

    pub fn config(&self) -> &C {
        &self.config
    }

    /// Writes `name` and `name.json` holding the resolved run configuration.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, Failure> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes)?;
        let sidecar = Provenance {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            artifact: name,
            config: &self.config,
        };
        let mut json = serde_json::to_vec_pretty(&sidecar).expect("run configs serialize");
        json.push(b'\n');
        write_atomic(&self.dir.join(format!("{name}.json")), &json)?;
        log::info!("wrote {}", path.display());
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn write_table(&mut self, name: &str, table: &Table) -> Result<PathBuf, Failure> {
        self.write(name, table.as_str().as_bytes())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

/// `label,f0,f1,...`
pub fn dataset_table(data: &Dataset) -> Table {
    let mut header = vec!["label".to_string()];
    header.extend((0..data.dimension()).map(|i| format!("f{i}")));
    let mut table = Table::new(&header);
    for i in 0..data.len() {
        let mut row = vec![Cell::U(data.label(i) as u64)];
        row.extend(data.input(i).iter().map(|&v| Cell::F(v)));
        table.row(&row);
    }
    table
}

pub fn save_snapshot(path: &Path, field: &SpectralField) -> Result<(), Failure> {
    write_atomic(path, &field.to_snapshot_bytes())
}

pub fn load_snapshot(path: &Path) -> Result<SpectralField, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::io(path, e))?;
    SpectralField::from_snapshot_bytes(&bytes).map_err(|e| Failure::Format(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        for v in [0.1, 1.0, -2.5e-300, 1e22, f64::MIN_POSITIVE, 1.0 / 3.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(1.0), "1.0");
        assert_eq!(fmt_f64(1e-300), "1e-300");
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.row(&[Cell::F(0.5), Cell::U(3), Cell::S("x".into())]);
        assert_eq!(t.as_str(), "a,b,c\n0.5,3,x\n");
    }

    #[test]
    fn atomic_write_leaves_no_temp_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/out.csv");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"two");
        let names: Vec<_> = fs::read_dir(path.parent().unwrap()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 1);
    }

    #[test]
    fn sidecar_carries_config() {
        #[derive(Serialize)]
        struct Cfg {
            seed: u64,
        }
        let dir = tempfile::tempdir().unwrap();
        let mut w = ArtifactWriter::new(dir.path(), "test", Cfg { seed: 9 });
        w.write("x.csv", b"h\n").unwrap();
        let side: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("x.csv.json")).unwrap()).unwrap();
        assert_eq!(side["config"]["seed"], 9);
        assert_eq!(side["artifact"], "x.csv");
    }

    #[test]
    fn snapshot_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let field = SpectralField::build(3, 40, 5).unwrap();
        let path = dir.path().join("f.grfs");
        save_snapshot(&path, &field).unwrap();
        assert_eq!(load_snapshot(&path).unwrap(), field);
        fs::write(&path, b"junk").unwrap();
        assert!(matches!(load_snapshot(&path), Err(Failure::Format(_))));
    }
}
