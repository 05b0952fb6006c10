//! Line-aligned evaluation data: sources, references and system outputs.
//!
//! A corpus is described by a small manifest file:
//!
//! ```text
//! # comments start with '#'
//! direction: cs-en
//! source: newstest.cs
//! reference: A refs/newstest.en.A
//! reference: B refs/newstest.en.B
//! reference: stud refs/newstest.en.stud excluded
//! system: Online-W sys/Online-W.en unconstrained
//! system: JDExploreAcademy sys/JDExploreAcademy.en constrained
//! ```
//!
//! Fields are whitespace separated, so identifiers and paths cannot contain
//! spaces. Relative paths resolve against the manifest's directory.
//! References marked `excluded` are loaded and length-checked but never
//! used for scoring.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("missing file {path}")]
    MissingFile { path: PathBuf },
    #[error("could not read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} is not valid UTF-8 (first invalid byte at offset {byte_offset})")]
    Encoding { path: PathBuf, byte_offset: usize },
    #[error("{path} has {found} segments, expected {expected}")]
    LengthMismatch { path: PathBuf, expected: usize, found: usize },
    #[error("{path} ends with an empty line")]
    TrailingEmptyLine { path: PathBuf },
    #[error("{path} contains no segments")]
    EmptyFile { path: PathBuf },
    #[error("manifest {path}, line {line}: {message}")]
    Manifest { path: PathBuf, line: usize, message: String },
    #[error("invalid direction code {0:?} (expected e.g. \"cs-en\")")]
    InvalidDirection(String),
    #[error("duplicate system id {0:?}")]
    DuplicateSystem(String),
    #[error("duplicate reference id {0:?}")]
    DuplicateReference(String),
    #[error("corpus has no reference translation")]
    NoReference,
    #[error("corpus has no segments")]
    Empty,
    #[error("{stream} has {found} segments, expected {expected}")]
    StreamLength { stream: String, expected: usize, found: usize },
    #[error("segment {index} of {stream} contains a newline")]
    NewlineInSegment { stream: String, index: usize },
    #[error("unknown system {0:?}")]
    UnknownSystem(String),
}

/// A language-pair code such as `cs-en`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Direction {
    source: String,
    target: String,
}

impl Direction {
    pub fn parse(code: &str) -> Result<Self, CorpusError> {
        let valid = |s: &str| (2..=3).contains(&s.len()) && s.bytes().all(|b| b.is_ascii_lowercase());
        match code.split_once('-') {
            Some((src, tgt)) if valid(src) && valid(tgt) => {
                Ok(Direction { source: src.to_string(), target: tgt.to_string() })
            }
            _ => Err(CorpusError::InvalidDirection(code.to_string())),
        }
    }

    pub fn source_lang(&self) -> &str {
        &self.source
    }

    pub fn target_lang(&self) -> &str {
        &self.target
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.source, self.target)
    }
}

/// A borrowed view of one segment of a stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Segment<'a> {
    pub index: usize,
    pub text: &'a str,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reference {
    pub id: String,
    pub segments: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemEntry {
    pub system_id: String,
    pub constrained: bool,
    pub segments: Vec<String>,
}

impl SystemEntry {
    pub fn new(system_id: impl Into<String>, constrained: bool, segments: Vec<String>) -> Self {
        SystemEntry { system_id: system_id.into(), constrained, segments }
    }

    pub fn iter(&self) -> impl Iterator<Item = Segment<'_>> {
        segments_of(&self.segments)
    }
}

fn segments_of(lines: &[String]) -> impl Iterator<Item = Segment<'_>> {
    lines.iter().enumerate().map(|(index, text)| Segment { index, text })
}

/// Validated, immutable evaluation data for one translation direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluationCorpus {
    direction: Direction,
    sources: Vec<String>,
    references: Vec<Reference>,
    excluded_references: Vec<Reference>,
    systems: Vec<SystemEntry>,
}

impl EvaluationCorpus {
    pub fn new(
        direction: Direction,
        sources: Vec<String>,
        references: Vec<Reference>,
        systems: Vec<SystemEntry>,
    ) -> Result<Self, CorpusError> {
        Self::with_excluded(direction, sources, references, Vec::new(), systems)
    }

    pub fn with_excluded(
        direction: Direction,
        sources: Vec<String>,
        references: Vec<Reference>,
        excluded_references: Vec<Reference>,
        systems: Vec<SystemEntry>,
    ) -> Result<Self, CorpusError> {
        let n = sources.len();
        if n == 0 {
            return Err(CorpusError::Empty);
        }
        if references.is_empty() {
            return Err(CorpusError::NoReference);
        }
        check_stream("source", &sources, n)?;
        let mut ref_ids = Vec::new();
        for r in references.iter().chain(&excluded_references) {
            if ref_ids.contains(&r.id.as_str()) {
                return Err(CorpusError::DuplicateReference(r.id.clone()));
            }
            ref_ids.push(r.id.as_str());
            check_stream(&format!("reference {}", r.id), &r.segments, n)?;
        }
        let mut sys_ids = Vec::new();
        for s in &systems {
            if sys_ids.contains(&s.system_id.as_str()) {
                return Err(CorpusError::DuplicateSystem(s.system_id.clone()));
            }
            sys_ids.push(s.system_id.as_str());
            check_stream(&format!("system {}", s.system_id), &s.segments, n)?;
        }
        Ok(EvaluationCorpus { direction, sources, references, excluded_references, systems })
    }

    pub fn direction(&self) -> &Direction {
        &self.direction
    }

    pub fn segment_count(&self) -> usize {
        self.sources.len()
    }

    pub fn sources(&self) -> &[String] {
        &self.sources
    }

    /// References used for scoring, in manifest order.
    pub fn references(&self) -> &[Reference] {
        &self.references
    }

    pub fn excluded_references(&self) -> &[Reference] {
        &self.excluded_references
    }

    pub fn systems(&self) -> &[SystemEntry] {
        &self.systems
    }

    pub fn system(&self, id: &str) -> Result<&SystemEntry, CorpusError> {
        self.systems.iter().find(|s| s.system_id == id).ok_or_else(|| CorpusError::UnknownSystem(id.to_string()))
    }

    pub fn system_index(&self, id: &str) -> Result<usize, CorpusError> {
        self.systems.iter().position(|s| s.system_id == id).ok_or_else(|| CorpusError::UnknownSystem(id.to_string()))
    }

    pub fn source_segments(&self) -> impl Iterator<Item = Segment<'_>> {
        segments_of(&self.sources)
    }

    /// References regrouped per segment: `result[i]` holds every reference
    /// translation of segment `i`.
    pub fn references_by_segment(&self) -> Vec<Vec<&str>> {
        (0..self.segment_count()).map(|i| self.references.iter().map(|r| r.segments[i].as_str()).collect()).collect()
    }

    /// Returns a copy of this corpus with one extra system appended.
    pub fn with_system(&self, system: SystemEntry) -> Result<Self, CorpusError> {
        let mut systems = self.systems.clone();
        systems.push(system);
        Self::with_excluded(
            self.direction.clone(),
            self.sources.clone(),
            self.references.clone(),
            self.excluded_references.clone(),
            systems,
        )
    }

    /// Writes every stream plus a manifest into `dir`, returning the
    /// manifest path. Loading that manifest yields an equal corpus.
    pub fn write_to_dir(&self, dir: &Path) -> Result<PathBuf, CorpusError> {
        let write = |name: String, lines: &[String]| -> Result<String, CorpusError> {
            let path = dir.join(&name);
            fs::write(&path, join_lines(lines)).map_err(|source| CorpusError::Io { path, source })?;
            Ok(name)
        };
        fs::create_dir_all(dir).map_err(|source| CorpusError::Io { path: dir.to_path_buf(), source })?;
        let mut manifest = format!("direction: {}\n", self.direction);
        manifest += &format!("source: {}\n", write("source.txt".into(), &self.sources)?);
        for (k, r) in self.references.iter().enumerate() {
            let name = write(format!("ref.{k}.txt"), &r.segments)?;
            manifest += &format!("reference: {} {}\n", r.id, name);
        }
        for (k, r) in self.excluded_references.iter().enumerate() {
            let name = write(format!("ref.excluded.{k}.txt"), &r.segments)?;
            manifest += &format!("reference: {} {} excluded\n", r.id, name);
        }
        for (k, s) in self.systems.iter().enumerate() {
            let name = write(format!("sys.{k}.txt"), &s.segments)?;
            let flag = if s.constrained { "constrained" } else { "unconstrained" };
            manifest += &format!("system: {} {} {}\n", s.system_id, name, flag);
        }
        let path = dir.join("manifest.txt");
        fs::write(&path, manifest).map_err(|source| CorpusError::Io { path: path.clone(), source })?;
        Ok(path)
    }
}

fn check_stream(name: &str, lines: &[String], expected: usize) -> Result<(), CorpusError> {
    if lines.len() != expected {
        return Err(CorpusError::StreamLength { stream: name.to_string(), expected, found: lines.len() });
    }
    if let Some(index) = lines.iter().position(|l| l.contains('\n')) {
        return Err(CorpusError::NewlineInSegment { stream: name.to_string(), index });
    }
    Ok(())
}

/// Joins segments into file content with a final newline.
pub fn join_lines(lines: &[String]) -> String {
    let mut out = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
    for l in lines {
        out.push_str(l);
        out.push('\n');
    }
    out
}

/// Reads a segment file. The final newline is optional, a trailing empty
/// line is rejected and only a trailing `\r` is stripped from each line.
pub fn read_segments(path: &Path) -> Result<Vec<String>, CorpusError> {
    let bytes = fs::read(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            CorpusError::MissingFile { path: path.to_path_buf() }
        } else {
            CorpusError::Io { path: path.to_path_buf(), source }
        }
    })?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| CorpusError::Encoding { path: path.to_path_buf(), byte_offset: e.valid_up_to() })?;
    parse_segments(text).map_err(|e| match e {
        ParseSegments::Empty => CorpusError::EmptyFile { path: path.to_path_buf() },
        ParseSegments::TrailingEmpty => CorpusError::TrailingEmptyLine { path: path.to_path_buf() },
    })
}

enum ParseSegments {
    Empty,
    TrailingEmpty,
}

fn parse_segments(text: &str) -> Result<Vec<String>, ParseSegments> {
    if text.is_empty() {
        return Err(ParseSegments::Empty);
    }
    let body = text.strip_suffix('\n').unwrap_or(text);
    let lines: Vec<String> = body.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l).to_string()).collect();
    if text.ends_with('\n') && lines.last().is_some_and(|l| l.is_empty()) {
        return Err(ParseSegments::TrailingEmpty);
    }
    Ok(lines)
}

pub fn load_corpus(manifest_path: &Path) -> Result<EvaluationCorpus, CorpusError> {
    let manifest = fs::read_to_string(manifest_path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            CorpusError::MissingFile { path: manifest_path.to_path_buf() }
        } else {
            CorpusError::Io { path: manifest_path.to_path_buf(), source }
        }
    })?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let bad = |line: usize, message: String| CorpusError::Manifest { path: manifest_path.to_path_buf(), line, message };

    let mut direction = None;
    let mut source_path = None;
    let mut references = Vec::new();
    let mut excluded = Vec::new();
    let mut systems = Vec::new();

    for (i, raw) in manifest.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) =
            line.split_once(':').ok_or_else(|| bad(lineno, format!("expected `key: value`, got {line:?}")))?;
        let fields: Vec<&str> = value.split_whitespace().collect();
        match key.trim() {
            "direction" => {
                let [code] = fields[..] else {
                    return Err(bad(lineno, "direction takes one value".into()));
                };
                direction = Some(Direction::parse(code)?);
            }
            "source" => {
                let [path] = fields[..] else {
                    return Err(bad(lineno, "source takes one path".into()));
                };
                source_path = Some(base.join(path));
            }
            "reference" => match fields[..] {
                [id, path] => references.push((id.to_string(), base.join(path))),
                [id, path, "excluded"] => excluded.push((id.to_string(), base.join(path))),
                _ => return Err(bad(lineno, "expected `reference: <id> <path> [excluded]`".into())),
            },
            "system" => {
                let [id, path, flag] = fields[..] else {
                    return Err(bad(lineno, "expected `system: <id> <path> constrained|unconstrained`".into()));
                };
                let constrained = match flag {
                    "constrained" => true,
                    "unconstrained" => false,
                    other => return Err(bad(lineno, format!("unknown system flag {other:?}"))),
                };
                systems.push((id.to_string(), base.join(path), constrained));
            }
            other => return Err(bad(lineno, format!("unknown key {other:?}"))),
        }
    }

    let direction = direction.ok_or_else(|| bad(0, "missing `direction`".into()))?;
    let source_path = source_path.ok_or_else(|| bad(0, "missing `source`".into()))?;
    if references.is_empty() {
        return Err(CorpusError::NoReference);
    }

    let sources = read_segments(&source_path)?;
    let expected = sources.len();
    let read_aligned = |path: &Path| -> Result<Vec<String>, CorpusError> {
        let lines = read_segments(path)?;
        if lines.len() != expected {
            return Err(CorpusError::LengthMismatch { path: path.to_path_buf(), expected, found: lines.len() });
        }
        Ok(lines)
    };

    let load_refs = |list: Vec<(String, PathBuf)>| -> Result<Vec<Reference>, CorpusError> {
        list.into_iter().map(|(id, path)| Ok(Reference { id, segments: read_aligned(&path)? })).collect()
    };
    let references = load_refs(references)?;
    let excluded = load_refs(excluded)?;
    let systems = systems
        .into_iter()
        .map(|(id, path, constrained)| Ok(SystemEntry::new(id, constrained, read_aligned(&path)?)))
        .collect::<Result<Vec<_>, CorpusError>>()?;

    EvaluationCorpus::with_excluded(direction, sources, references, excluded, systems)
}
