use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::failure::Failure;

fn is_stdio(path: &Path) -> bool {
    path.as_os_str() == "-"
}

/// Fails unless `path` is `-` or an existing file.
pub fn check_input(flag: &str, path: &Path) -> Result<(), Failure> {
    if is_stdio(path) || path.is_file() {
        Ok(())
    } else {
        Err(Failure::input("missing_path", format!("--{flag}: no such file {}", path.display())))
    }
}

pub fn open(path: &Path) -> Result<Box<dyn BufRead>, Failure> {
    if is_stdio(path) {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    File::open(path)
        .map(|f| Box::new(BufReader::new(f)) as Box<dyn BufRead>)
        .map_err(|e| Failure::input("io", format!("{}: {e}", path.display())))
}

pub fn read_string(path: &Path) -> Result<String, Failure> {
    let mut text = String::new();
    open(path)?.read_to_string(&mut text).map_err(|e| Failure::input("io", format!("{}: {e}", path.display())))?;
    Ok(text)
}

pub fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let result = if is_stdio(path) {
        let mut out = io::stdout().lock();
        out.write_all(bytes).and_then(|_| out.flush())
    } else {
        std::fs::write(path, bytes)
    };
    match result {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) if matches!(e.kind(), io::ErrorKind::NotFound | io::ErrorKind::PermissionDenied) => {
            Err(Failure::input("io", format!("{}: {e}", path.display())))
        }
        Err(e) => Err(Failure::internal("io", format!("{}: {e}", path.display()))),
    }
}

/// Pretty JSON with sorted object keys and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let value = serde_json::to_value(value).map_err(|e| Failure::internal("serialize", e.to_string()))?;
    let mut text = serde_json::to_string_pretty(&value).map_err(|e| Failure::internal("serialize", e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::input("json", format!("{}: {e}", path.display())))
}
