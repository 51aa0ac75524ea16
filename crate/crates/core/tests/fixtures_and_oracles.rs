#[path = "support/fixtures.rs"]
mod fixtures;
#[path = "support/oracles.rs"]
mod oracles;

use ensnlg_core::aligner::{build_gazetteer, RuleSet, SynonymLexicon};
use ensnlg_core::metrics::{bleu, meteor_lite, nist, rouge_l, slot_error_rate, BleuConfig, ErrMode, EvalPair, MeteorConfig};
use ensnlg_core::Gazetteer;
use oracles::Case;

fn gaz() -> Gazetteer {
    build_gazetteer(None, &SynonymLexicon::bundled(), &RuleSet::bundled())
}

fn pairs(corpus: &[Case]) -> Vec<EvalPair> {
    corpus.iter().map(|(h, refs)| EvalPair::new(*h, refs.iter().map(|r| r.to_string()).collect())).collect()
}

fn close(a: f64, b: f64, what: &str) {
    assert!((a - b).abs() < 1e-6, "{what}: library {a} vs oracle {b}");
}

#[test]
fn bleu_agrees_with_oracle() {
    let mut nonzero = 0;
    for (i, c) in oracles::CASES.iter().enumerate() {
        let one = std::slice::from_ref(c);
        let lib = bleu(&pairs(one), &BleuConfig::default()).unwrap();
        close(lib, oracles::bleu(one, 4, None), &format!("case {i}"));
        nonzero += usize::from(lib > 0.0);
        let smoothed = BleuConfig { smoothing: Some(0.1), ..BleuConfig::default() };
        close(bleu(&pairs(one), &smoothed).unwrap(), oracles::bleu(one, 4, Some(0.1)), &format!("smoothed {i}"));
    }
    assert!(nonzero >= 10);
    close(bleu(&pairs(oracles::CASES), &BleuConfig::default()).unwrap(), oracles::bleu(oracles::CASES, 4, None), "corpus");
}

#[test]
fn nist_agrees_with_oracle() {
    for (i, c) in oracles::CASES.iter().enumerate() {
        let one = std::slice::from_ref(c);
        close(nist(&pairs(one), 5).unwrap(), oracles::nist(one, 5), &format!("case {i}"));
    }
    close(nist(&pairs(oracles::CASES), 5).unwrap(), oracles::nist(oracles::CASES, 5), "corpus");
}

#[test]
fn rouge_agrees_with_oracle() {
    for corpus in [oracles::CASES, oracles::METEOR_CASES] {
        for (i, c) in corpus.iter().enumerate() {
            let one = std::slice::from_ref(c);
            for beta in [1.0, 1.2] {
                close(rouge_l(&pairs(one), beta).unwrap(), oracles::rouge_l(one, beta), &format!("case {i} β={beta}"));
            }
        }
        close(rouge_l(&pairs(corpus), 1.2).unwrap(), oracles::rouge_l(corpus, 1.2), "corpus");
    }
}

#[test]
fn meteor_agrees_with_oracle() {
    let cfg = MeteorConfig::default();
    for (i, c) in oracles::METEOR_CASES.iter().enumerate() {
        let one = std::slice::from_ref(c);
        close(meteor_lite(&pairs(one), &cfg).unwrap(), oracles::meteor(one, cfg.alpha, cfg.beta, cfg.gamma), &format!("case {i}"));
    }
    close(
        meteor_lite(&pairs(oracles::METEOR_CASES), &cfg).unwrap(),
        oracles::meteor(oracles::METEOR_CASES, cfg.alpha, cfg.beta, cfg.gamma),
        "corpus",
    );
}

#[test]
fn identical_outputs_score_one() {
    let same: Vec<EvalPair> = oracles::CASES.iter().map(|(_, refs)| EvalPair::new(refs[0], vec![refs[0].to_string()])).collect();
    assert!((bleu(&same, &BleuConfig::default()).unwrap() - 1.0).abs() < 1e-12);
    assert!((rouge_l(&same, 1.2).unwrap() - 1.0).abs() < 1e-12);
    let m = meteor_lite(&same, &MeteorConfig::default()).unwrap();
    assert!((m - 1.0).abs() < 1e-12, "{m}");
}

#[test]
fn err_fixture_rates() {
    let rows = fixtures::err_rows();
    let human = slot_error_rate(&rows, &gaz(), ErrMode::HumanEval);
    assert_eq!((human.total_slots, human.unaligned, human.overgenerated), (40, 2, 1));
    assert!((human.err - 0.05).abs() < 1e-12);
    let rnnlg = slot_error_rate(&rows, &gaz(), ErrMode::Rnnlg);
    assert!((rnnlg.err - 0.075).abs() < 1e-12);
}

#[test]
fn aligner_matches_hand_labels() {
    assert_eq!(fixtures::gold_alignments().len(), 50);
    let (a, disagreements) = fixtures::alignment_agreement(&gaz());
    assert!(a.f1() >= 0.95, "F1 {:.4} (P {:.4}, R {:.4}); {disagreements:#?}", a.f1(), a.precision(), a.recall());
}
