//! File formats, grids and run manifests shared by the subcommands.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use shaping_core::{BitWord, Error, Result};

/// Inclusive arithmetic grid written `start:step:end`, or a single value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Grid {
    pub start: f64,
    pub step: f64,
    pub end: f64,
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad number `{p}`")))
            .collect::<std::result::Result<_, _>>()?;
        match parts[..] {
            [v] => Ok(Grid { start: v, step: 1.0, end: v }),
            [start, step, end] if step > 0.0 && end >= start => Ok(Grid { start, step, end }),
            _ => Err(format!("expected `start:step:end` with step > 0, got `{s}`")),
        }
    }
}

impl TryFrom<String> for Grid {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> String {
        if g.start == g.end {
            g.start.to_string()
        } else {
            format!("{}:{}:{}", g.start, g.step, g.end)
        }
    }
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.end - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }

    pub fn integers(&self) -> Result<Vec<usize>> {
        let vals = self.values();
        if vals.iter().any(|v| *v < 1.0 || v.fract() != 0.0) {
            return Err(Error::InvalidArgument(format!("grid {self:?} must hold positive integers")));
        }
        Ok(vals.into_iter().map(|v| v as usize).collect())
    }
}

/// Parses comma-separated values.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse().map_err(|_| Error::Parse(format!("bad list item `{t}`"))))
        .collect()
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Hex bit words, one per line, most significant bit first.
pub fn read_words(path: &Path, k: usize) -> Result<Vec<BitWord>> {
    read_text(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| BitWord::from_hex(l.trim(), k))
        .collect()
}

pub fn write_words(path: &Path, words: &[BitWord]) -> Result<()> {
    let mut text = String::new();
    for w in words {
        text.push_str(&w.to_hex());
        text.push('\n');
    }
    write_text(path, &text)
}

/// Amplitude sequences, one per line, comma separated.
pub fn read_sequences(path: &Path) -> Result<Vec<Vec<u32>>> {
    read_text(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(parse_list)
        .collect()
}

pub fn write_sequences(path: &Path, seqs: &[Vec<u32>]) -> Result<()> {
    let mut text = String::new();
    for s in seqs {
        let line: Vec<String> = s.iter().map(u32::to_string).collect();
        text.push_str(&line.join(","));
        text.push('\n');
    }
    write_text(path, &text)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

/// Writes `value` as JSON to `out`, or prints it when `out` is absent.
pub fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    match out {
        Some(p) => write_text(p, &to_json(value)),
        None => {
            print!("{}", to_json(value));
            Ok(())
        }
    }
}

/// Applies the keys of a JSON config file over flag values. Keys use the
/// flag names with `-` replaced by `_`.
pub fn overlay<T: Serialize + DeserializeOwned>(args: T, config: Option<&Path>) -> Result<T> {
    let Some(path) = config else { return Ok(args) };
    let over: Value = serde_json::from_str(&read_text(path)?).map_err(|e| Error::Config(e.to_string()))?;
    let mut base = serde_json::to_value(&args).map_err(|e| Error::Config(e.to_string()))?;
    let (Value::Object(b), Value::Object(o)) = (&mut base, over) else {
        return Err(Error::Config("config must be a JSON object".into()));
    };
    for (k, v) in o {
        if !b.contains_key(&k) {
            return Err(Error::Config(format!("unknown config key `{k}`")));
        }
        b.insert(k, v);
    }
    serde_json::from_value(base).map_err(|e| Error::Config(e.to_string()))
}

/// Record written next to every output as `<output>.manifest.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: Value,
    pub tool_version: &'static str,
    pub seed: Option<u64>,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<PathBuf>,
}

pub struct ManifestBuilder {
    subcommand: String,
    params: Value,
    seed: Option<u64>,
    started: String,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl ManifestBuilder {
    pub fn new<T: Serialize>(subcommand: &str, params: &T, seed: Option<u64>) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            params: serde_json::to_value(params).unwrap_or(Value::Null),
            seed,
            started: now(),
        }
    }

    /// Writes one manifest per output path.
    pub fn finish(self, outputs: &[&Path]) -> Result<()> {
        let manifest = RunManifest {
            subcommand: self.subcommand,
            params: self.params,
            tool_version: env!("CARGO_PKG_VERSION"),
            seed: self.seed,
            started: self.started,
            finished: now(),
            outputs: outputs.iter().map(|p| p.to_path_buf()).collect(),
        };
        for out in outputs {
            let mut name = out.as_os_str().to_os_string();
            name.push(".manifest.json");
            write_text(Path::new(&name), &to_json(&manifest))?;
        }
        Ok(())
    }
}
