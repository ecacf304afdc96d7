use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{csv_line, CorpusError};
use crate::lexicon::{normalize, ExemplarId, Lexicon};

/// One participant's ordered list of exemplars.
#[derive(Debug, Clone, PartialEq)]
pub struct FluencyRun {
    pub participant: String,
    pub items: Vec<ExemplarId>,
    /// Seconds between consecutive items; `len == items.len() - 1`.
    pub irts: Option<Vec<f64>>,
}

impl FluencyRun {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// A validated collection of runs with the lexicon of everything they mention.
#[derive(Debug, Clone, PartialEq)]
pub struct RunBank {
    runs: Vec<FluencyRun>,
    lexicon: Lexicon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunFormat {
    Csv,
    Jsonl,
}

impl RunFormat {
    pub fn from_path(path: &Path) -> Result<Self, CorpusError> {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Ok(Self::Csv),
            Some(e) if e.eq_ignore_ascii_case("jsonl") || e.eq_ignore_ascii_case("json") => {
                Ok(Self::Jsonl)
            }
            _ => Err(CorpusError::Format(path.to_owned())),
        }
    }
}

impl RunBank {
    /// Builds a bank from `(participant, items, irts)` triples, preserving order.
    pub fn from_sequences<I, S>(sequences: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = (String, Vec<S>, Option<Vec<f64>>)>,
        S: AsRef<str>,
    {
        let mut lexicon = Lexicon::new();
        let mut runs = Vec::new();
        let mut seen = HashSet::new();
        for (participant, items, irts) in sequences {
            let fail = |message: String| CorpusError::Run {
                participant: participant.clone(),
                message,
            };
            if !seen.insert(participant.clone()) {
                return Err(fail("duplicate participant".into()));
            }
            if items.is_empty() {
                return Err(fail("run has no items".into()));
            }
            let mut ids = Vec::with_capacity(items.len());
            for (pos, item) in items.iter().enumerate() {
                if normalize(item.as_ref()).is_empty() {
                    return Err(fail(format!("empty exemplar at position {}", pos + 1)));
                }
                ids.push(lexicon.intern(item.as_ref()));
            }
            if let Some(irts) = &irts {
                if irts.len() + 1 != ids.len() {
                    return Err(fail(format!(
                        "irts length mismatch: {} irts for {} items",
                        irts.len(),
                        ids.len()
                    )));
                }
                if let Some(bad) = irts.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                    return Err(fail(format!("irt {bad} is not a positive duration")));
                }
            }
            // A one-item run has no intervals; store that uniformly as None.
            let irts = irts.filter(|v| !v.is_empty());
            runs.push(FluencyRun {
                participant,
                items: ids,
                irts,
            });
        }
        if runs.is_empty() {
            return Err(CorpusError::Empty("run bank"));
        }
        Ok(Self { runs, lexicon })
    }

    pub fn runs(&self) -> &[FluencyRun] {
        &self.runs
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn total_tokens(&self) -> usize {
        self.runs.iter().map(FluencyRun::len).sum()
    }

    pub fn run_lengths(&self) -> Vec<usize> {
        self.runs.iter().map(FluencyRun::len).collect()
    }

    /// Runs as surface strings.
    pub fn sequences(&self) -> Vec<Vec<String>> {
        self.runs
            .iter()
            .map(|r| self.lexicon.render(&r.items))
            .collect()
    }

    /// Runs re-indexed into another lexicon; items missing there are dropped.
    pub fn reindex(&self, target: &Lexicon) -> Vec<Vec<ExemplarId>> {
        self.runs
            .iter()
            .map(|r| {
                r.items
                    .iter()
                    .filter_map(|&id| target.get(self.lexicon.surface(id)))
                    .collect()
            })
            .collect()
    }

    pub fn position_of(&self, participant: &str) -> Option<usize> {
        self.runs.iter().position(|r| r.participant == participant)
    }
}

/// Reads a runs file in the given format.
pub fn load_runs(path: impl AsRef<Path>, format: RunFormat) -> Result<RunBank, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
    let reader = BufReader::new(file);
    match format {
        RunFormat::Csv => read_runs_csv(reader),
        RunFormat::Jsonl => read_runs_jsonl(reader),
    }
}

/// Writes a bank in the given format. `load_runs` reads it back unchanged.
pub fn save_runs(
    bank: &RunBank,
    path: impl AsRef<Path>,
    format: RunFormat,
) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| CorpusError::io(path, e))?;
    let mut writer = BufWriter::new(file);
    match format {
        RunFormat::Csv => write_runs_csv(&mut writer, bank),
        RunFormat::Jsonl => write_runs_jsonl(&mut writer, bank),
    }
    .and_then(|_| writer.flush().map_err(|e| CorpusError::io(path, e)))
}

struct CsvRow {
    line: u64,
    position: usize,
    exemplar: String,
    irt: Option<f64>,
}

/// Parses `participant,position,exemplar,irt_seconds` rows.
pub fn read_runs_csv<R: Read>(reader: R) -> Result<RunBank, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| CorpusError::parse(csv_line(&e), e.to_string()))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(c_part), Some(c_pos), Some(c_ex)) =
        (col("participant"), col("position"), col("exemplar"))
    else {
        return Err(CorpusError::parse(
            1,
            "header must contain participant,position,exemplar[,irt_seconds]",
        ));
    };
    let c_irt = col("irt_seconds");

    let mut order: Vec<String> = Vec::new();
    let mut rows: HashMap<String, Vec<CsvRow>> = HashMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CorpusError::parse(csv_line(&e), e.to_string()))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |c: usize| record.get(c).unwrap_or("");
        if record.iter().all(str::is_empty) {
            continue;
        }
        let participant = field(c_part).to_owned();
        if participant.is_empty() {
            return Err(CorpusError::parse(line, "empty participant field"));
        }
        let position: usize = field(c_pos)
            .parse()
            .map_err(|_| CorpusError::parse(line, format!("bad position {:?}", field(c_pos))))?;
        let exemplar = normalize(field(c_ex));
        if exemplar.is_empty() {
            return Err(CorpusError::parse(line, "empty exemplar field"));
        }
        let irt = match c_irt.map(field).filter(|s| !s.is_empty()) {
            None => None,
            Some(s) => Some(
                s.parse::<f64>()
                    .map_err(|_| CorpusError::parse(line, format!("bad irt_seconds {s:?}")))?,
            ),
        };
        if !rows.contains_key(&participant) {
            order.push(participant.clone());
        }
        rows.entry(participant).or_default().push(CsvRow {
            line,
            position,
            exemplar,
            irt,
        });
    }
    if order.is_empty() {
        return Err(CorpusError::Empty("runs file"));
    }

    let mut sequences = Vec::with_capacity(order.len());
    for participant in order {
        let mut group = rows.remove(&participant).unwrap_or_default();
        group.sort_by_key(|r| r.position);
        for (i, row) in group.iter().enumerate() {
            if row.position != i + 1 {
                return Err(CorpusError::parse(
                    row.line,
                    format!(
                        "participant {participant}: positions must be 1..{} without gaps, found {}",
                        group.len(),
                        row.position
                    ),
                ));
            }
        }
        let irts = if group.iter().any(|r| r.irt.is_some()) {
            if let Some(first) = group.first().filter(|r| r.irt.is_some()) {
                return Err(CorpusError::parse(
                    first.line,
                    format!(
                        "participant {participant}: irts length mismatch (position 1 has an irt)"
                    ),
                ));
            }
            let mut irts = Vec::with_capacity(group.len() - 1);
            for row in &group[1..] {
                match row.irt {
                    Some(v) => irts.push(v),
                    None => {
                        return Err(CorpusError::parse(
                            row.line,
                            format!(
                                "participant {participant}: irts length mismatch (missing irt)"
                            ),
                        ))
                    }
                }
            }
            Some(irts)
        } else {
            None
        };
        let items = group.into_iter().map(|r| r.exemplar).collect::<Vec<_>>();
        sequences.push((participant, items, irts));
    }
    RunBank::from_sequences(sequences)
}

#[derive(Serialize, Deserialize)]
struct JsonRun {
    participant: String,
    items: Vec<String>,
    #[serde(default)]
    irts: Option<Vec<f64>>,
}

/// Parses one JSON object per line.
pub fn read_runs_jsonl<R: Read>(reader: R) -> Result<RunBank, CorpusError> {
    let mut sequences = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = i as u64 + 1;
        let line = line.map_err(|e| CorpusError::parse(lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let run: JsonRun =
            serde_json::from_str(&line).map_err(|e| CorpusError::parse(lineno, e.to_string()))?;
        if let Some(pos) = run.items.iter().position(|s| normalize(s).is_empty()) {
            return Err(CorpusError::parse(
                lineno,
                format!("empty exemplar at item {}", pos + 1),
            ));
        }
        sequences.push((run.participant, run.items, run.irts));
    }
    if sequences.is_empty() {
        return Err(CorpusError::Empty("runs file"));
    }
    RunBank::from_sequences(sequences)
}

pub fn write_runs_csv<W: Write>(writer: W, bank: &RunBank) -> Result<(), CorpusError> {
    let to_err = |e: csv::Error| CorpusError::parse(0, e.to_string());
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["participant", "position", "exemplar", "irt_seconds"])
        .map_err(to_err)?;
    for run in bank.runs() {
        for (i, &id) in run.items.iter().enumerate() {
            let irt = match (&run.irts, i) {
                (Some(irts), i) if i > 0 => irts[i - 1].to_string(),
                _ => String::new(),
            };
            wtr.write_record([
                run.participant.as_str(),
                &(i + 1).to_string(),
                bank.lexicon().surface(id),
                &irt,
            ])
            .map_err(to_err)?;
        }
    }
    wtr.flush()
        .map_err(|e| CorpusError::parse(0, e.to_string()))
}

pub fn write_runs_jsonl<W: Write>(mut writer: W, bank: &RunBank) -> Result<(), CorpusError> {
    for run in bank.runs() {
        let obj = JsonRun {
            participant: run.participant.clone(),
            items: bank.lexicon().render(&run.items),
            irts: run.irts.clone(),
        };
        let line = serde_json::to_string(&obj).map_err(|e| CorpusError::parse(0, e.to_string()))?;
        writeln!(writer, "{line}").map_err(|e| CorpusError::parse(0, e.to_string()))?;
    }
    Ok(())
}

/// Token counts per exemplar surface across the bank.
pub(crate) fn token_counts(bank: &RunBank) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for run in bank.runs() {
        for &id in &run.items {
            *counts
                .entry(bank.lexicon().surface(id).to_owned())
                .or_insert(0) += 1;
        }
    }
    counts
}
