//! File formats behind the CLI: comma-delimited ballot files, JSON matrix,
//! lexicon, and report documents. Reports carry no timestamps and serialize
//! numeric fields quantized to 12 significant digits, so identical inputs
//! produce byte-identical files.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::inference::{SimilarityMatrix, SolverDiagnostics};
use crate::mallows::ExperimentSummary;
use crate::model::{Ballot, LabelSet, Profile, Weight};
use crate::voting::AgreementReport;

pub const BALLOT_HEADER: [&str; 6] = [
    "evaluator_id",
    "item_id",
    "top_choice",
    "rank1",
    "rank2",
    "rank3",
];

/// Quantize to 12 significant digits; report numbers pass through this
/// before serialization so parse(serialize(x)) is exact.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float")
}

pub fn weight_to_string(w: Weight) -> String {
    format!("{}/{}", w.numer(), w.denom())
}

pub fn weight_from_string(s: &str) -> Result<Weight> {
    let parse = |row: usize, msg: &str| Error::Parse {
        row,
        message: msg.to_string(),
    };
    let (p, q) = s.split_once('/').ok_or_else(|| parse(0, "expected p/q"))?;
    let p: i64 = p.trim().parse().map_err(|_| parse(0, "bad numerator"))?;
    let q: i64 = q.trim().parse().map_err(|_| parse(0, "bad denominator"))?;
    if q == 0 {
        return Err(parse(0, "zero denominator"));
    }
    Ok(Ratio::new(p, q))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    hex::encode(h.finalize())
}

pub fn digest_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

/// Parse a ballot file into per-item profiles, sorted by item id. Rows are
/// validated against the label set; errors carry 1-based data row numbers.
pub fn parse_ballots(path: &Path, ls: &LabelSet) -> Result<Vec<Profile>> {
    let text = std::fs::read_to_string(path)?;
    parse_ballots_str(&text, ls)
}

pub fn parse_ballots_str(text: &str, ls: &LabelSet) -> Result<Vec<Profile>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Parse {
        row: 0,
        message: e.to_string(),
    })?;
    let got: Vec<&str> = headers.iter().collect();
    if got.len() < 4 || got[..3] != BALLOT_HEADER[..3] {
        return Err(Error::Parse {
            row: 0,
            message: format!(
                "expected header starting `evaluator_id,item_id,top_choice,rank1,...`, got `{}`",
                got.join(",")
            ),
        });
    }
    for (i, col) in got[3..].iter().enumerate() {
        if *col != format!("rank{}", i + 1) {
            return Err(Error::Parse {
                row: 0,
                message: format!("expected column `rank{}`, got `{col}`", i + 1),
            });
        }
    }

    let mut ballots: Vec<Ballot> = Vec::new();
    let mut seen_pairs: Vec<(String, String)> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        let field = |j: usize| record.get(j).unwrap_or("").to_string();
        let evaluator_id = field(0);
        let item_id = field(1);
        let top_choice = field(2);
        if evaluator_id.is_empty() || item_id.is_empty() {
            return Err(Error::Parse {
                row,
                message: "evaluator_id and item_id must be non-empty".into(),
            });
        }
        let pair = (evaluator_id.clone(), item_id.clone());
        if seen_pairs.contains(&pair) {
            return Err(Error::Parse {
                row,
                message: format!("duplicate ballot for evaluator `{}` on item `{}`", pair.0, pair.1),
            });
        }
        seen_pairs.push(pair);

        let mut ranked = Vec::new();
        let mut closed = false;
        for j in 3..record.len() {
            let cell = field(j);
            if cell.is_empty() {
                closed = true;
            } else if closed {
                return Err(Error::Parse {
                    row,
                    message: format!("rank{} filled after an empty rank cell; ranks fill left-to-right", j - 2),
                });
            } else {
                ranked.push(cell);
            }
        }
        if ranked.is_empty() {
            return Err(Error::Parse {
                row,
                message: "at least rank1 must be filled".into(),
            });
        }
        let ballot = Ballot {
            evaluator_id,
            item_id,
            top_choice,
            ranked,
        };
        // validate eagerly so the error carries this row number
        crate::model::ballot_to_tied_ranking(&ballot, ls).map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        ls.require(&ballot.top_choice).map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        ballots.push(ballot);
    }
    if ballots.is_empty() {
        return Err(Error::Parse {
            row: 0,
            message: "ballot file has no data rows".into(),
        });
    }

    let mut by_item: BTreeMap<String, Vec<Ballot>> = BTreeMap::new();
    for b in ballots {
        by_item.entry(b.item_id.clone()).or_default().push(b);
    }
    by_item
        .into_iter()
        .map(|(item, bs)| Profile::new(item, bs, ls))
        .collect()
}

pub fn serialize_ballots(profiles: &[Profile]) -> String {
    let mut out = String::new();
    out.push_str(&BALLOT_HEADER.join(","));
    out.push('\n');
    for p in profiles {
        for b in &p.ballots {
            let mut cells = vec![
                b.evaluator_id.clone(),
                b.item_id.clone(),
                b.top_choice.clone(),
            ];
            for j in 0..3 {
                cells.push(b.ranked.get(j).cloned().unwrap_or_default());
            }
            out.push_str(&cells.join(","));
            out.push('\n');
        }
    }
    out
}

/// Similarity matrix document: label lists plus a row-major grid with one
/// row per expressed label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub expressed_labels: Vec<String>,
    pub experienced_labels: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn serialize(&self) -> String {
        to_pretty_json(self)
    }

    pub fn to_similarity(&self) -> Result<SimilarityMatrix> {
        let expressed = LabelSet::new(self.expressed_labels.clone())?;
        let experienced = LabelSet::new(self.experienced_labels.clone())?;
        SimilarityMatrix::new(self.rows.clone(), expressed, experienced)
    }
}

/// Lexicon document: expressed label to synonym word list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexiconFile {
    pub synsets: BTreeMap<String, Vec<String>>,
}

impl LexiconFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn serialize(&self) -> String {
        to_pretty_json(self)
    }

    pub fn to_lexicon(&self, expressed: &LabelSet) -> Result<crate::inference::Lexicon> {
        crate::inference::Lexicon::new(
            self.synsets.iter().map(|(k, v)| (k.clone(), v.clone())),
            expressed,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub name: String,
    pub sha256: String,
}

/// Solver diagnostics as recorded in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSummary {
    pub objective: f64,
    pub lambda: f64,
    pub stationarity_residual: f64,
    pub complementarity_residual: f64,
    pub iterations: usize,
    pub support_size: usize,
}

impl DiagnosticsSummary {
    pub fn from_diagnostics(d: &SolverDiagnostics, support: usize) -> Self {
        DiagnosticsSummary {
            objective: sig12(d.objective),
            lambda: sig12(d.lambda),
            stationarity_residual: sig12(d.stationarity_residual),
            complementarity_residual: sig12(d.complementarity_residual),
            iterations: d.iterations,
            support_size: support,
        }
    }
}

/// One item's results within a report. `top_k` is the item's canonical list
/// for cross-report comparison: the consensus ranking for `aggregate`
/// reports, the machine's top-k for `infer` reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemReport {
    pub item_id: String,
    pub top_k: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tally: Option<BTreeMap<String, u64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub consensus_ranking: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kemeny_ranking: Option<Vec<String>>,
    /// Exact rational feedback cost as "p/q".
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kemeny_cost: Option<String>,
    /// Agreement between the consensus and Kemeny top-k lists.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub methods_agreement: Option<AgreementReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub expressed: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub experienced: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diagnostics: Option<DiagnosticsSummary>,
}

/// Top-level report document shared by all commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub command: String,
    pub labels: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub items: Vec<ItemReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub experiment: Option<ExperimentSummary>,
}

impl Report {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn serialize(&self) -> String {
        to_pretty_json(self)
    }
}

/// Output of `compare`: per-item agreement between the canonical top-k
/// lists of two reports, plus rates for every predicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareSummary {
    pub tool_version: String,
    pub command: String,
    pub predicate: String,
    pub inputs: Vec<InputDigest>,
    pub items: Vec<ItemAgreement>,
    /// Rate under the requested predicate.
    pub rate: f64,
    pub top1_rate: f64,
    pub exact_rate: f64,
    pub mean_overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemAgreement {
    pub item_id: String,
    pub agreement: AgreementReport,
}

impl CompareSummary {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn serialize(&self) -> String {
        to_pretty_json(self)
    }
}

fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn six() -> LabelSet {
        LabelSet::six_emotions()
    }

    #[test]
    fn parses_a_small_ballot_file() {
        let text = "evaluator_id,item_id,top_choice,rank1,rank2,rank3\n\
                    e1,t1,Sad,Sad,Worried,Scared\n\
                    e2,t1,Sad,Sad,Scared,Worried\n\
                    e3,t1,Worried,Worried,Sad,Angry\n";
        let profiles = parse_ballots_str(text, &six()).unwrap();
        assert_eq!(profiles.len(), 1);
        assert_eq!(profiles[0].item_id, "t1");
        assert_eq!(profiles[0].num_ballots(), 3);
    }

    #[test]
    fn unknown_label_error_names_row_and_label() {
        let text = "evaluator_id,item_id,top_choice,rank1,rank2,rank3\n\
                    e1,t1,Sad,Sad,Worried,Scared\n\
                    e2,t1,Joyful,Joyful,Sad,Worried\n";
        match parse_ballots_str(text, &six()) {
            Err(Error::Parse { row, message }) => {
                assert_eq!(row, 2);
                assert!(message.contains("Joyful"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn ranks_must_fill_left_to_right() {
        let text = "evaluator_id,item_id,top_choice,rank1,rank2,rank3\n\
                    e1,t1,Sad,,Sad,\n";
        match parse_ballots_str(text, &six()) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn short_ballots_drop_cells_right_to_left() {
        let text = "evaluator_id,item_id,top_choice,rank1,rank2,rank3\n\
                    e1,t1,Sad,Sad,Worried,\n\
                    e2,t1,Sad,Sad,,\n";
        let profiles = parse_ballots_str(text, &six()).unwrap();
        assert_eq!(profiles[0].ballots[0].ranked.len(), 2);
        assert_eq!(profiles[0].ballots[1].ranked.len(), 1);
    }

    #[test]
    fn duplicate_evaluator_item_pair_is_rejected() {
        let text = "evaluator_id,item_id,top_choice,rank1,rank2,rank3\n\
                    e1,t1,Sad,Sad,Worried,Scared\n\
                    e1,t1,Angry,Angry,Sad,Worried\n";
        assert!(matches!(
            parse_ballots_str(text, &six()),
            Err(Error::Parse { row: 2, .. })
        ));
    }

    #[test]
    fn empty_file_is_an_error() {
        let text = "evaluator_id,item_id,top_choice,rank1,rank2,rank3\n";
        assert!(parse_ballots_str(text, &six()).is_err());
    }

    #[test]
    fn grouping_is_sorted_by_item_id() {
        let text = "evaluator_id,item_id,top_choice,rank1,rank2,rank3\n\
                    e1,t2,Sad,Sad,Worried,Scared\n\
                    e1,t1,Sad,Sad,Worried,Scared\n";
        let profiles = parse_ballots_str(text, &six()).unwrap();
        assert_eq!(profiles[0].item_id, "t1");
        assert_eq!(profiles[1].item_id, "t2");
    }

    #[test]
    fn weight_strings_round_trip() {
        for w in [Weight::new(0, 1), Weight::new(7, 2), Weight::new(13, 1)] {
            assert_eq!(weight_from_string(&weight_to_string(w)).unwrap(), w);
        }
        assert!(weight_from_string("3").is_err());
        assert!(weight_from_string("3/0").is_err());
    }

    #[test]
    fn sig12_is_idempotent() {
        for x in [0.0, 1.0 / 3.0, 0.1 + 0.2, 1e-13, -7.25, 6.02e23] {
            assert_eq!(sig12(sig12(x)), sig12(x));
        }
    }

    proptest! {
        #[test]
        fn ballot_round_trip(seed in 0u64..500) {
            use rand::prelude::*;
            use rand_chacha::ChaCha8Rng;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ls = six();
            let names: Vec<&str> = ls.labels().iter().map(|s| s.as_str()).collect();
            let items = rng.gen_range(1..=3);
            let mut profiles = Vec::new();
            for item in 0..items {
                let v = rng.gen_range(1..=5);
                let ballots: Vec<Ballot> = (0..v).map(|e| {
                    let k = rng.gen_range(1..=3);
                    let mut idx: Vec<usize> = (0..6).collect();
                    idx.shuffle(&mut rng);
                    let ranked: Vec<String> = idx[..k].iter().map(|&i| names[i].to_string()).collect();
                    Ballot {
                        evaluator_id: format!("e{e}"),
                        item_id: format!("item{item}"),
                        top_choice: names[idx[0]].to_string(),
                        ranked,
                    }
                }).collect();
                profiles.push(Profile::new(format!("item{item}"), ballots, &ls).unwrap());
            }
            let text = serialize_ballots(&profiles);
            let back = parse_ballots_str(&text, &ls).unwrap();
            prop_assert_eq!(back, profiles);
        }

        #[test]
        fn matrix_file_round_trip(seed in 0u64..200) {
            use rand::prelude::*;
            use rand_chacha::ChaCha8Rng;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = rng.gen_range(2..=5);
            let n = rng.gen_range(2..=5);
            let doc = MatrixFile {
                expressed_labels: (0..m).map(|i| format!("ex{i}")).collect(),
                experienced_labels: (0..n).map(|i| format!("la{i}")).collect(),
                rows: (0..m).map(|_| (0..n).map(|_| sig12(rng.gen::<f64>())).collect()).collect(),
            };
            let back = MatrixFile::parse(&doc.serialize()).unwrap();
            prop_assert_eq!(back, doc);
        }
    }

    #[test]
    fn lexicon_file_round_trip() {
        let mut synsets = BTreeMap::new();
        synsets.insert("Sad".to_string(), vec!["sad".into(), "blue".into()]);
        synsets.insert("Angry".to_string(), vec!["angry".into()]);
        let doc = LexiconFile { synsets };
        assert_eq!(LexiconFile::parse(&doc.serialize()).unwrap(), doc);
        let ls = LabelSet::new(["Sad", "Angry"]).unwrap();
        assert!(doc.to_lexicon(&ls).is_ok());
    }

    #[test]
    fn report_round_trip() {
        let report = Report {
            tool_version: "0.1.0".into(),
            command: "aggregate".into(),
            labels: six().labels().to_vec(),
            inputs: vec![InputDigest {
                name: "ballots.csv".into(),
                sha256: sha256_hex(b"data"),
            }],
            items: vec![ItemReport {
                item_id: "t1".into(),
                top_k: vec!["Sad".into(), "Worried".into(), "Scared".into()],
                tally: Some(BTreeMap::from([("Sad".to_string(), 3u64)])),
                consensus_ranking: Some(vec!["Sad".into(), "Worried".into(), "Scared".into()]),
                kemeny_ranking: None,
                kemeny_cost: Some("7/2".into()),
                methods_agreement: None,
                expressed: Some(vec![sig12(1.0 / 3.0), sig12(2.0 / 3.0)]),
                experienced: None,
                diagnostics: None,
            }],
            experiment: None,
        };
        let back = Report::parse(&report.serialize()).unwrap();
        assert_eq!(back, report);
        // serialization itself is stable
        assert_eq!(back.serialize(), report.serialize());
    }
}
