//! Command-line surface: `aggregate` fuses ballot files by voting consensus
//! and exact Kemeny aggregation, `infer` runs the machine pipeline on
//! transcripts, `compare` scores two reports against each other, and
//! `simulate` drives the Mallows experiment.
//!
//! Exit codes: 0 success, 1 usage, 2 validation/parse, 3 solver failure.

use clap::{Parser, Subcommand, ValueEnum};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use emoagg::inference::{
    expressed_probs, likelihood_from_similarity, solve_experienced, support_size,
    experienced_top_k,
};
use emoagg::io::{
    digest_file, parse_ballots, sig12, weight_to_string, CompareSummary, DiagnosticsSummary,
    InputDigest, ItemAgreement, ItemReport, LexiconFile, MatrixFile, Report,
};
use emoagg::kemeny::kemeny_branch_bound;
use emoagg::mallows::{method_agreement_experiment, MallowsConfig, DEFAULT_EVALUATORS};
use emoagg::model::{LabelSet, Ranking};
use emoagg::tournament::build_tournament;
use emoagg::voting::{
    agreement_rate, compare_rankings, consensus_ranking, tally, AgreementPredicate, TallyMode,
};
use emoagg::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(name = "emoagg", version, about = "Ballot aggregation and experienced-emotion inference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    #[value(name = "top1-only")]
    Top1Only,
    #[value(name = "all-mentions")]
    AllMentions,
}

#[derive(Clone, Copy, ValueEnum)]
enum PredicateArg {
    Top1,
    Exact,
    Overlap,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate a ballot file by voting consensus and Kemeny-optimal ranking
    Aggregate {
        ballots: PathBuf,
        /// Comma-separated label set the ballots validate against
        #[arg(long, default_value = "Angry,Happy,Sad,Scared,Surprised,Worried")]
        labels: String,
        #[arg(long, value_enum, default_value = "all-mentions")]
        mode: ModeArg,
        /// Depth of the reported rankings
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Output path; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Infer experienced-emotion probabilities from transcripts
    Infer {
        /// A transcript file, or a directory of .txt transcripts
        transcript: PathBuf,
        lexicon: PathBuf,
        similarity: PathBuf,
        /// Additive smoothing for word counts
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        /// KKT residual tolerance of the simplex solver
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score agreement between the canonical top-k lists of two reports
    Compare {
        report_a: PathBuf,
        report_b: PathBuf,
        #[arg(long, value_enum, default_value = "top1")]
        predicate: PredicateArg,
        /// Overlap threshold used by the `overlap` predicate
        #[arg(long, default_value_t = 1)]
        min_overlap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare voting consensus against Kemeny aggregation on Mallows noise
    Simulate {
        /// Number of labels
        #[arg(long, default_value_t = 6)]
        n: usize,
        /// Mallows dispersion in (0, 1]
        #[arg(long)]
        phi: f64,
        #[arg(long, default_value_t = DEFAULT_EVALUATORS)]
        evaluators: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(e: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }

    fn from_error(e: Error) -> Self {
        let code = match e {
            Error::SolverFailure { .. } => EXIT_SOLVER,
            _ => EXIT_VALIDATION,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::from_error(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's own help/version output is not an error
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(EXIT_USAGE);
            }
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Aggregate {
            ballots,
            labels,
            mode,
            k,
            out,
        } => cmd_aggregate(&ballots, &labels, mode, k, out.as_deref()),
        Command::Infer {
            transcript,
            lexicon,
            similarity,
            alpha,
            tol,
            k,
            out,
        } => cmd_infer(&transcript, &lexicon, &similarity, alpha, tol, k, out.as_deref()),
        Command::Compare {
            report_a,
            report_b,
            predicate,
            min_overlap,
            out,
        } => cmd_compare(&report_a, &report_b, predicate, min_overlap, out.as_deref()),
        Command::Simulate {
            n,
            phi,
            evaluators,
            trials,
            seed,
            k,
            out,
        } => cmd_simulate(n, phi, evaluators, trials, seed, k, out.as_deref()),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure {
            code: EXIT_VALIDATION,
            message: format!("cannot write {}: {e}", path.display()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_aggregate(
    ballots: &Path,
    labels: &str,
    mode: ModeArg,
    k: usize,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let ls = LabelSet::new(labels.split(',').map(str::trim)).map_err(Failure::usage)?;
    if k < 1 || k > ls.len() {
        return Err(Failure::usage(Error::KOutOfRange { k, n: ls.len() }));
    }
    let mode = match mode {
        ModeArg::Top1Only => TallyMode::Top1Only,
        ModeArg::AllMentions => TallyMode::AllMentions,
    };
    let digest = digest_file(ballots)?;
    let profiles = parse_ballots(ballots, &ls)?;

    let mut items = Vec::with_capacity(profiles.len());
    for p in &profiles {
        let counts = tally(p, mode);
        let consensus = consensus_ranking(&counts, k)?;
        let t = build_tournament(p);
        let solution = kemeny_branch_bound(&t)?;
        let kemeny_top: Vec<usize> = solution.ranking.order()[..k].to_vec();
        let agreement = compare_rankings(&consensus, &kemeny_top)?;

        let name = |idx: &usize| ls.label(*idx).to_string();
        let mut tally_map = BTreeMap::new();
        for (i, &c) in counts.counts.iter().enumerate() {
            tally_map.insert(ls.label(i).to_string(), c);
        }
        items.push(ItemReport {
            item_id: p.item_id.clone(),
            top_k: consensus.iter().map(name).collect(),
            tally: Some(tally_map),
            consensus_ranking: Some(consensus.iter().map(name).collect()),
            kemeny_ranking: Some(
                solution.ranking.order().iter().map(name).collect(),
            ),
            kemeny_cost: Some(weight_to_string(solution.cost)),
            methods_agreement: Some(agreement),
            expressed: None,
            experienced: None,
            diagnostics: None,
        });
    }

    let report = Report {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: "aggregate".to_string(),
        labels: ls.labels().to_vec(),
        inputs: vec![InputDigest {
            name: file_name(ballots),
            sha256: digest,
        }],
        items,
        experiment: None,
    };
    emit(&report.serialize(), out)
}

/// A transcript file is one item named by its stem; a directory is one item
/// per contained .txt file.
fn collect_transcripts(path: &Path) -> Result<Vec<(String, String)>, Failure> {
    let stem = |p: &Path| {
        p.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "transcript".to_string())
    };
    let mut items = Vec::new();
    if path.is_dir() {
        for entry in std::fs::read_dir(path).map_err(|e| Failure {
            code: EXIT_VALIDATION,
            message: format!("cannot read {}: {e}", path.display()),
        })? {
            let p = entry.map_err(|e| Failure::from_error(Error::Io(e)))?.path();
            if p.extension().is_some_and(|e| e == "txt") {
                items.push((stem(&p), std::fs::read_to_string(&p).map_err(Error::Io)?));
            }
        }
        items.sort();
        if items.is_empty() {
            return Err(Failure {
                code: EXIT_VALIDATION,
                message: format!("no .txt transcripts in {}", path.display()),
            });
        }
    } else {
        items.push((stem(path), std::fs::read_to_string(path).map_err(Error::Io)?));
    }
    Ok(items)
}

fn cmd_infer(
    transcript: &Path,
    lexicon: &Path,
    similarity: &Path,
    alpha: f64,
    tol: f64,
    k: usize,
    out: Option<&Path>,
) -> Result<(), Failure> {
    if alpha < 0.0 {
        return Err(Failure::usage("--alpha must be nonnegative"));
    }
    if tol <= 0.0 {
        return Err(Failure::usage("--tol must be positive"));
    }
    let matrix_doc = MatrixFile::read(similarity)?;
    let sim = matrix_doc.to_similarity()?;
    let likelihood = likelihood_from_similarity(&sim)?;
    let lexicon_doc = LexiconFile::read(lexicon)?;
    let lex = lexicon_doc.to_lexicon(likelihood.expressed_space())?;
    let n = likelihood.experienced_space().len();
    if k < 1 || k > n {
        return Err(Failure::usage(Error::KOutOfRange { k, n }));
    }

    let inputs = vec![
        InputDigest {
            name: file_name(transcript),
            sha256: digest_path(transcript)?,
        },
        InputDigest {
            name: file_name(lexicon),
            sha256: digest_file(lexicon)?,
        },
        InputDigest {
            name: file_name(similarity),
            sha256: digest_file(similarity)?,
        },
    ];

    let mut items = Vec::new();
    for (item_id, text) in collect_transcripts(transcript)? {
        let t = expressed_probs(&text, &lex, alpha).map_err(|e| match e {
            Error::NoSignal => Failure {
                code: EXIT_VALIDATION,
                message: format!(
                    "transcript `{item_id}` matches no lexicon word; rerun with --alpha > 0"
                ),
            },
            other => Failure::from_error(other),
        })?;
        let (x, diag) = solve_experienced(&likelihood, &t, tol)?;
        let top = experienced_top_k(&x, k)?;
        let support = support_size(&x, 1e-9);
        items.push(ItemReport {
            item_id,
            top_k: top
                .iter()
                .map(|&i| likelihood.experienced_space().label(i).to_string())
                .collect(),
            tally: None,
            consensus_ranking: None,
            kemeny_ranking: None,
            kemeny_cost: None,
            methods_agreement: None,
            expressed: Some(t.values().iter().map(|&v| sig12(v)).collect()),
            experienced: Some(x.values().iter().map(|&v| sig12(v)).collect()),
            diagnostics: Some(DiagnosticsSummary::from_diagnostics(&diag, support)),
        });
    }

    let report = Report {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: "infer".to_string(),
        labels: likelihood.experienced_space().labels().to_vec(),
        inputs,
        items,
        experiment: None,
    };
    emit(&report.serialize(), out)
}

fn cmd_compare(
    report_a: &Path,
    report_b: &Path,
    predicate: PredicateArg,
    min_overlap: usize,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let a = Report::read(report_a)?;
    let b = Report::read(report_b)?;
    let index = |r: &Report| -> BTreeMap<String, Vec<String>> {
        r.items
            .iter()
            .map(|i| (i.item_id.clone(), i.top_k.clone()))
            .collect()
    };
    let map_a = index(&a);
    let map_b = index(&b);
    let only_a: Vec<&str> = map_a
        .keys()
        .filter(|k| !map_b.contains_key(*k))
        .map(String::as_str)
        .collect();
    let only_b: Vec<&str> = map_b
        .keys()
        .filter(|k| !map_a.contains_key(*k))
        .map(String::as_str)
        .collect();
    if !only_a.is_empty() || !only_b.is_empty() {
        return Err(Failure::from_error(Error::ItemSetMismatch {
            only_a: only_a.join(", "),
            only_b: only_b.join(", "),
        }));
    }

    let mut items = Vec::new();
    let mut reports = Vec::new();
    for (item_id, list_a) in &map_a {
        let list_b = &map_b[item_id];
        // lists compare by label name; casing differences across reports
        // are folded away
        let fold = |l: &Vec<String>| -> Vec<String> {
            l.iter().map(|s| s.to_lowercase()).collect()
        };
        let fa = fold(list_a);
        let fb = fold(list_b);
        let mut dict: Vec<String> = Vec::new();
        let code = |s: &str, dict: &mut Vec<String>| -> usize {
            if let Some(i) = dict.iter().position(|x| x == s) {
                i
            } else {
                dict.push(s.to_string());
                dict.len() - 1
            }
        };
        let ia: Vec<usize> = fa.iter().map(|s| code(s, &mut dict)).collect();
        let ib: Vec<usize> = fb.iter().map(|s| code(s, &mut dict)).collect();
        let agreement = compare_rankings(&ia, &ib)?;
        reports.push(agreement);
        items.push(ItemAgreement {
            item_id: item_id.clone(),
            agreement,
        });
    }

    let (name, chosen) = match predicate {
        PredicateArg::Top1 => ("top1".to_string(), AgreementPredicate::Top1),
        PredicateArg::Exact => ("exact".to_string(), AgreementPredicate::ExactRank),
        PredicateArg::Overlap => (
            format!("overlap>={min_overlap}"),
            AgreementPredicate::OverlapAtLeast(min_overlap),
        ),
    };
    let mean_overlap =
        reports.iter().map(|r| r.top3_set_overlap as f64).sum::<f64>() / reports.len() as f64;
    let summary = CompareSummary {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: "compare".to_string(),
        predicate: name,
        inputs: vec![
            InputDigest {
                name: file_name(report_a),
                sha256: digest_file(report_a)?,
            },
            InputDigest {
                name: file_name(report_b),
                sha256: digest_file(report_b)?,
            },
        ],
        items,
        rate: sig12(agreement_rate(&reports, chosen)?),
        top1_rate: sig12(agreement_rate(&reports, AgreementPredicate::Top1)?),
        exact_rate: sig12(agreement_rate(&reports, AgreementPredicate::ExactRank)?),
        mean_overlap: sig12(mean_overlap),
    };
    emit(&summary.serialize(), out)
}

fn cmd_simulate(
    n: usize,
    phi: f64,
    evaluators: usize,
    trials: usize,
    seed: u64,
    k: usize,
    out: Option<&Path>,
) -> Result<(), Failure> {
    if n < 2 {
        return Err(Failure::usage("--n must be at least 2"));
    }
    if !(phi > 0.0 && phi <= 1.0) {
        return Err(Failure::usage(format!("--phi must be in (0, 1], got {phi}")));
    }
    if trials < 1 {
        return Err(Failure::usage("--trials must be at least 1"));
    }
    if evaluators < 1 {
        return Err(Failure::usage("--evaluators must be at least 1"));
    }
    if k < 1 || k > n {
        return Err(Failure::usage(Error::KOutOfRange { k, n }));
    }
    let ls = if n == 6 {
        LabelSet::six_emotions()
    } else {
        LabelSet::new((0..n).map(|i| format!("l{i}"))).map_err(Failure::usage)?
    };
    let cfg = MallowsConfig {
        reference: Ranking::new((0..n).collect(), &ls).map_err(Failure::usage)?,
        phi,
        num_evaluators: evaluators,
        ranking_depth: k,
        seed,
    };
    let summary = method_agreement_experiment(&cfg, &ls, trials)?;
    let report = Report {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: "simulate".to_string(),
        labels: ls.labels().to_vec(),
        inputs: vec![],
        items: vec![],
        experiment: Some(summary),
    };
    emit(&report.serialize(), out)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Digest of a file, or of the concatenated .txt contents of a directory in
/// sorted name order.
fn digest_path(path: &Path) -> Result<String, Failure> {
    if path.is_dir() {
        let mut names: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(Error::Io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "txt"))
            .collect();
        names.sort();
        let mut all = Vec::new();
        for n in names {
            all.extend(std::fs::read(&n).map_err(Error::Io)?);
        }
        Ok(emoagg::io::sha256_hex(&all))
    } else {
        Ok(digest_file(path)?)
    }
}
