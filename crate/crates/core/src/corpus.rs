//! Skill-annotated documents and the binary presence matrix.
//!
//! A [`Corpus`] holds job ads, degree subjects or certification syllabus
//! units, each carrying a deduplicated set of skills drawn from a shared
//! [`SkillVocabulary`]. Column indices of every downstream matrix are
//! vocabulary ids, so the vocabulary order is fixed at ingest (first seen
//! wins) and persisted alongside the documents.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const VOCABULARY_FILE: &str = "vocabulary.txt";
pub const DOCUMENTS_FILE: &str = "documents.jsonl";

/// Case-folds and trims a skill name. Idempotent.
pub fn canonicalize(name: &str) -> String {
    name.trim().to_lowercase()
}

/// Ordered set of canonical skill names; position is the skill id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SkillVocabulary {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl SkillVocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `name`, adding it if unseen.
    pub fn intern(&mut self, name: &str) -> Result<usize> {
        let canonical = canonicalize(name);
        if canonical.is_empty() {
            return Err(Error::UnknownSkill(format!("empty skill name {name:?}")));
        }
        if canonical.contains(['\n', '\r']) {
            return Err(Error::UnknownSkill(format!(
                "skill name contains a line break: {name:?}"
            )));
        }
        if let Some(&id) = self.index.get(&canonical) {
            return Ok(id);
        }
        let id = self.names.len();
        self.index.insert(canonical.clone(), id);
        self.names.push(canonical);
        Ok(id)
    }

    /// Looks up a skill by (non-canonical) name.
    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(&canonicalize(name)).copied()
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        self.names.get(id).map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Which side of the market a document describes. Only market documents
/// shape the skill-similarity geometry by default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocKind {
    #[default]
    Market,
    Education,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub group: String,
    pub kind: DocKind,
    /// Sorted, deduplicated skill ids.
    pub skills: Vec<usize>,
}

impl Document {
    pub fn contains(&self, skill: usize) -> bool {
        self.skills.binary_search(&skill).is_ok()
    }
}

/// Input file formats accepted by [`load_corpus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Jsonl,
    Csv,
}

impl InputFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "jsonl" | "ndjson" | "json" => Some(InputFormat::Jsonl),
            "csv" => Some(InputFormat::Csv),
            _ => None,
        }
    }
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(InputFormat::Jsonl),
            "csv" => Ok(InputFormat::Csv),
            other => Err(format!("unknown input format `{other}`")),
        }
    }
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputFormat::Jsonl => "jsonl",
            InputFormat::Csv => "csv",
        })
    }
}

/// Validated, immutable document collection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    vocabulary: SkillVocabulary,
    documents: Vec<Document>,
    groups: BTreeMap<String, Vec<usize>>,
    group_order: Vec<String>,
}

/// Incremental corpus construction with validation deferred to [`build`].
///
/// [`build`]: CorpusBuilder::build
#[derive(Debug, Default)]
pub struct CorpusBuilder {
    vocabulary: SkillVocabulary,
    documents: Vec<Document>,
    seen_ids: HashSet<String>,
}

#[derive(Deserialize)]
struct RawDocument {
    id: String,
    group: String,
    skills: Vec<String>,
}

impl CorpusBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts from an existing vocabulary so ids stay stable.
    pub fn with_vocabulary(vocabulary: SkillVocabulary) -> Self {
        Self {
            vocabulary,
            ..Self::default()
        }
    }

    pub fn add_document<S: AsRef<str>>(
        &mut self,
        id: &str,
        group: &str,
        kind: DocKind,
        skills: &[S],
    ) -> Result<&mut Self> {
        if !self.seen_ids.insert(id.to_string()) {
            return Err(Error::DuplicateDocumentId(id.to_string()));
        }
        if skills.is_empty() {
            return Err(Error::EmptySkillList(id.to_string()));
        }
        let mut ids = skills
            .iter()
            .map(|s| self.vocabulary.intern(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        ids.sort_unstable();
        ids.dedup();
        self.documents.push(Document {
            id: id.to_string(),
            group: group.to_string(),
            kind,
            skills: ids,
        });
        Ok(self)
    }

    /// Adds a skill to the vocabulary without attaching it to a document.
    pub fn add_skill(&mut self, name: &str) -> Result<usize> {
        self.vocabulary.intern(name)
    }

    pub fn add_file(&mut self, path: &Path, format: InputFormat, kind: DocKind) -> Result<&mut Self> {
        let file = fs::File::open(path)?;
        match format {
            InputFormat::Jsonl => self.add_jsonl(BufReader::new(file), kind),
            InputFormat::Csv => self.add_csv(file, kind),
        }
    }

    pub fn add_jsonl<R: BufRead>(&mut self, reader: R, kind: DocKind) -> Result<&mut Self> {
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let raw: RawDocument = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            self.add_raw(raw, kind, line_no)?;
        }
        Ok(self)
    }

    pub fn add_csv<R: std::io::Read>(&mut self, reader: R, kind: DocKind) -> Result<&mut Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        let expected = ["id", "group", "skills"];
        if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h.trim() != e) {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header `id,group,skills`, got {headers:?}"),
            });
        }
        for record in rdr.records() {
            let record = record.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let line_no = record.position().map_or(0, |p| p.line() as usize);
            let raw = RawDocument {
                id: record[0].to_string(),
                group: record[1].to_string(),
                skills: record[2]
                    .split(';')
                    .filter(|s| !s.trim().is_empty())
                    .map(str::to_string)
                    .collect(),
            };
            self.add_raw(raw, kind, line_no)?;
        }
        Ok(self)
    }

    fn add_raw(&mut self, raw: RawDocument, kind: DocKind, line: usize) -> Result<()> {
        if raw.id.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty document id".into(),
            });
        }
        match self.add_document(&raw.id, &raw.group, kind, &raw.skills) {
            Ok(_) => Ok(()),
            Err(Error::UnknownSkill(msg)) => Err(Error::Parse { line, message: msg }),
            Err(e) => Err(e),
        }
    }

    pub fn build(self) -> Corpus {
        Corpus::assemble(self.vocabulary, self.documents)
    }
}

/// Reads a single market-side corpus file.
pub fn load_corpus(path: &Path, format: InputFormat) -> Result<Corpus> {
    let mut builder = CorpusBuilder::new();
    builder.add_file(path, format, DocKind::Market)?;
    Ok(builder.build())
}

#[derive(Serialize, Deserialize)]
struct StoredDocument {
    id: String,
    group: String,
    #[serde(default)]
    kind: DocKind,
    skills: Vec<usize>,
}

impl Corpus {
    fn assemble(vocabulary: SkillVocabulary, documents: Vec<Document>) -> Self {
        let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let mut group_order = Vec::new();
        for (i, doc) in documents.iter().enumerate() {
            groups
                .entry(doc.group.clone())
                .or_insert_with(|| {
                    group_order.push(doc.group.clone());
                    Vec::new()
                })
                .push(i);
        }
        Corpus {
            vocabulary,
            documents,
            groups,
            group_order,
        }
    }

    /// Validates and assembles a corpus from already-resolved skill ids.
    pub fn from_parts(vocabulary: SkillVocabulary, documents: Vec<Document>) -> Result<Self> {
        let mut seen = HashSet::new();
        let m = vocabulary.len();
        let mut documents = documents;
        for doc in &mut documents {
            if !seen.insert(doc.id.clone()) {
                return Err(Error::DuplicateDocumentId(doc.id.clone()));
            }
            if doc.skills.is_empty() {
                return Err(Error::EmptySkillList(doc.id.clone()));
            }
            if let Some(&bad) = doc.skills.iter().find(|&&s| s >= m) {
                return Err(Error::UnknownSkill(format!(
                    "id {bad} in document `{}` (vocabulary has {m} skills)",
                    doc.id
                )));
            }
            doc.skills.sort_unstable();
            doc.skills.dedup();
        }
        Ok(Self::assemble(vocabulary, documents))
    }

    pub fn vocabulary(&self) -> &SkillVocabulary {
        &self.vocabulary
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn n_documents(&self) -> usize {
        self.documents.len()
    }

    pub fn n_skills(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn groups(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.groups
    }

    /// Group labels in order of first appearance.
    pub fn group_labels(&self) -> &[String] {
        &self.group_order
    }

    /// Document indices carrying `group`, in corpus order.
    pub fn subset(&self, group: &str) -> Result<&[usize]> {
        self.groups
            .get(group)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownGroup(group.to_string()))
    }

    /// The market-side documents only, over the same vocabulary.
    pub fn market_view(&self) -> Corpus {
        let docs = self
            .documents
            .iter()
            .filter(|d| d.kind == DocKind::Market)
            .cloned()
            .collect();
        Corpus::assemble(self.vocabulary.clone(), docs)
    }

    pub fn presence_matrix(&self) -> PresenceMatrix {
        presence_matrix(self)
    }

    /// Writes `vocabulary.txt` and `documents.jsonl` into `dir`.
    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(VOCABULARY_FILE), self.vocabulary_bytes())?;
        fs::write(dir.join(DOCUMENTS_FILE), self.documents_bytes()?)?;
        Ok(())
    }

    pub fn load_dir(dir: &Path) -> Result<Self> {
        let vocab_text = fs::read_to_string(dir.join(VOCABULARY_FILE))?;
        let mut vocabulary = SkillVocabulary::new();
        for (i, line) in vocab_text.lines().enumerate() {
            let id = vocabulary.intern(line).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            if id != i {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("duplicate vocabulary entry `{line}`"),
                });
            }
        }
        let file = fs::File::open(dir.join(DOCUMENTS_FILE))?;
        let mut documents = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let stored: StoredDocument =
                serde_json::from_str(&line).map_err(|e| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            documents.push(Document {
                id: stored.id,
                group: stored.group,
                kind: stored.kind,
                skills: stored.skills,
            });
        }
        Corpus::from_parts(vocabulary, documents)
    }

    fn vocabulary_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for name in self.vocabulary.names() {
            out.extend_from_slice(name.as_bytes());
            out.push(b'\n');
        }
        out
    }

    fn documents_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        for doc in &self.documents {
            let stored = StoredDocument {
                id: doc.id.clone(),
                group: doc.group.clone(),
                kind: doc.kind,
                skills: doc.skills.clone(),
            };
            serde_json::to_writer(&mut out, &stored)?;
            out.write_all(b"\n")?;
        }
        Ok(out)
    }

    /// Hex SHA-256 of the persisted representation; keys on-disk caches.
    pub fn content_hash(&self) -> Result<String> {
        let mut hasher = Sha256::new();
        hasher.update(self.vocabulary_bytes());
        hasher.update([0u8]);
        hasher.update(self.documents_bytes()?);
        Ok(hex::encode(hasher.finalize()))
    }
}

/// Binary n×m document-by-skill indicator matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PresenceMatrix {
    pub data: Array2<f64>,
}

impl PresenceMatrix {
    pub fn n_documents(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_skills(&self) -> usize {
        self.data.ncols()
    }
}

pub fn presence_matrix(corpus: &Corpus) -> PresenceMatrix {
    let mut data = Array2::zeros((corpus.n_documents(), corpus.n_skills()));
    for (j, doc) in corpus.documents().iter().enumerate() {
        for &s in &doc.skills {
            data[[j, s]] = 1.0;
        }
    }
    PresenceMatrix { data }
}
