//! Synthetic evaluator populations under a Mallows noise model, via the
//! repeated-insertion construction: each sampled ranking has probability
//! proportional to phi^KT(sigma, reference). phi = 1 is uniform over
//! permutations, phi -> 0 concentrates on the reference.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kemeny::kemeny_top_k;
use crate::model::{ballot_to_tied_ranking, kendall_tau, Ballot, LabelSet, Profile, Ranking};
use crate::tournament::build_tournament;
use crate::voting::{compare_rankings, tally, AgreementPredicate, AgreementReport, TallyMode};

#[derive(Debug, Clone)]
pub struct MallowsConfig {
    pub reference: Ranking,
    pub phi: f64,
    pub num_evaluators: usize,
    pub ranking_depth: usize,
    pub seed: u64,
}

/// Post-screening evaluator count of the motivating study (195 - 79 - 7).
pub const DEFAULT_EVALUATORS: usize = 109;

impl MallowsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.phi > 0.0 && self.phi <= 1.0) {
            return Err(Error::InvalidConfig {
                field: "phi",
                message: format!("must be in (0, 1], got {}", self.phi),
            });
        }
        if self.num_evaluators < 1 {
            return Err(Error::InvalidConfig {
                field: "num_evaluators",
                message: "must be at least 1".into(),
            });
        }
        let n = self.reference.len();
        if self.ranking_depth < 1 || self.ranking_depth > n {
            return Err(Error::KOutOfRange {
                k: self.ranking_depth,
                n,
            });
        }
        Ok(())
    }
}

/// One repeated-insertion draw: item i of the reference goes to position p
/// of the growing list with weight phi^(i - p).
fn rim_draw(reference: &[usize], phi: f64, rng: &mut impl Rng) -> Vec<usize> {
    let n = reference.len();
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for (i, &label) in reference.iter().enumerate() {
        if i == 0 {
            order.push(label);
            continue;
        }
        let weights: Vec<f64> = (0..=i).map(|p| phi.powi((i - p) as i32)).collect();
        let total: f64 = weights.iter().sum();
        let mut u = rng.gen::<f64>() * total;
        let mut pos = i;
        for (p, &w) in weights.iter().enumerate() {
            if u < w {
                pos = p;
                break;
            }
            u -= w;
        }
        order.insert(pos, label);
    }
    order
}

fn sample_with_rng(
    cfg: &MallowsConfig,
    ls: &LabelSet,
    item_id: &str,
    rng: &mut impl Rng,
) -> Result<Profile> {
    cfg.validate()?;
    let mut ballots = Vec::with_capacity(cfg.num_evaluators);
    for e in 0..cfg.num_evaluators {
        let order = rim_draw(cfg.reference.order(), cfg.phi, rng);
        let ranked: Vec<String> = order[..cfg.ranking_depth]
            .iter()
            .map(|&i| ls.label(i).to_string())
            .collect();
        ballots.push(Ballot {
            evaluator_id: format!("e{e:04}"),
            item_id: item_id.to_string(),
            top_choice: ranked[0].clone(),
            ranked,
        });
    }
    Profile::new(item_id, ballots, ls)
}

/// Sample one profile; deterministic given the config seed.
pub fn mallows_sample(cfg: &MallowsConfig, ls: &LabelSet, item_id: &str) -> Result<Profile> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    sample_with_rng(cfg, ls, item_id, &mut rng)
}

/// Per-trial comparison of voting consensus against the Kemeny optimum on
/// fresh Mallows profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub trials: usize,
    pub num_evaluators: usize,
    pub phi: f64,
    pub seed: u64,
    pub top1_agreement_rate: f64,
    pub top3_exact_agreement_rate: f64,
    pub mean_top3_overlap: f64,
    pub mean_kt_between_methods: f64,
    pub consensus_reference_top1_recovery: f64,
    pub kemeny_reference_top1_recovery: f64,
}

/// Runs both aggregation pipelines per trial. Each trial draws from its own
/// stream of (seed, trial index), so the summary is schedule-independent.
pub fn method_agreement_experiment(
    cfg: &MallowsConfig,
    ls: &LabelSet,
    trials: usize,
) -> Result<ExperimentSummary> {
    cfg.validate()?;
    if trials < 1 {
        return Err(Error::InvalidConfig {
            field: "trials",
            message: "must be at least 1".into(),
        });
    }
    let k = cfg.ranking_depth;
    let reference_top = cfg.reference.order()[0];
    let mut reports: Vec<AgreementReport> = Vec::with_capacity(trials);
    let mut overlap_sum = 0usize;
    let mut kt_sum = 0.0f64;
    let mut consensus_hits = 0usize;
    let mut kemeny_hits = 0usize;

    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(trial as u64 + 1);
        let item = format!("trial-{trial:04}");
        let profile = sample_with_rng(cfg, ls, &item, &mut rng)?;

        let cons = crate::voting::consensus_ranking(&tally(&profile, TallyMode::AllMentions), k)?;
        let kem = kemeny_top_k(&build_tournament(&profile), k)?;

        let report = compare_rankings(&cons, &kem)?;
        overlap_sum += report.top3_set_overlap;
        reports.push(report);
        if cons[0] == reference_top {
            consensus_hits += 1;
        }
        if kem[0] == reference_top {
            kemeny_hits += 1;
        }
        kt_sum += top_k_kt_distance(&cons, &kem, ls)?;
    }

    let t = trials as f64;
    Ok(ExperimentSummary {
        trials,
        num_evaluators: cfg.num_evaluators,
        phi: cfg.phi,
        seed: cfg.seed,
        top1_agreement_rate: crate::voting::agreement_rate(&reports, AgreementPredicate::Top1)?,
        top3_exact_agreement_rate: crate::voting::agreement_rate(
            &reports,
            AgreementPredicate::ExactRank,
        )?,
        mean_top3_overlap: overlap_sum as f64 / t,
        mean_kt_between_methods: kt_sum / t,
        consensus_reference_top1_recovery: consensus_hits as f64 / t,
        kemeny_reference_top1_recovery: kemeny_hits as f64 / t,
    })
}

/// Kendall-tau between two top-k lists, each read as a top-k ballot with the
/// usual tied tail.
fn top_k_kt_distance(a: &[usize], b: &[usize], ls: &LabelSet) -> Result<f64> {
    let to_tied = |list: &[usize]| {
        let ranked: Vec<String> = list.iter().map(|&i| ls.label(i).to_string()).collect();
        let ballot = Ballot {
            evaluator_id: "m".into(),
            item_id: "m".into(),
            top_choice: ranked[0].clone(),
            ranked,
        };
        ballot_to_tied_ranking(&ballot, ls)
    };
    let d = kendall_tau(&to_tied(a)?, &to_tied(b)?)?;
    Ok(*d.numer() as f64 / *d.denom() as f64)
}
