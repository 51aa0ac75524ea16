use ensnlg_core::aligner::{build_gazetteer, RuleSet, SynonymLexicon};
use ensnlg_core::corpus::{parse_mr, Dataset, Dialect, Domain, Sample, Split};
use ensnlg_core::delex::{delexicalize_dataset, DelexPolicy};
use ensnlg_core::ensemble::solo;
use ensnlg_core::neural::{train, EncoderKind, Hyperparams};
use ensnlg_core::synthetic::{gen_synthetic, SyntheticGrammar};

const MR: &str = "name[The Golden Curry], food[Japanese], priceRange[moderate], familyFriendly[yes], near[The Bakers]";
const UTT: &str =
    "Located near The Bakers, kid-friendly restaurant, The Golden Curry, offers Japanese cuisine with a moderate price range.";

fn corpus() -> Dataset {
    let mut ds = gen_synthetic(&SyntheticGrammar::default(), 50, 11).unwrap();
    ds.samples.push(Sample::new("t1", parse_mr(MR, Dialect::E2e).unwrap(), UTT));
    ds
}

fn hyper(encoder: EncoderKind) -> Hyperparams {
    Hyperparams {
        embed_dim: 16,
        encoder,
        encoder_hidden: 24,
        decoder_hidden: 48,
        attention_dim: 24,
        learning_rate: 1e-2,
        epochs: 40,
        batch_size: 8,
        seed: 3,
        ..Hyperparams::default()
    }
}

#[test]
fn memorizes_a_small_corpus_and_copies_names() {
    let policy = DelexPolicy::default_for(Domain::E2e);
    let train_set = delexicalize_dataset(&corpus(), &policy);
    let (model, log) = train(&train_set, None, &hyper(EncoderKind::Bilstm)).unwrap();
    let last = log.epochs.last().unwrap().train_loss;
    assert!(last < 0.1, "final loss {last} (initial {})", log.initial_loss);

    let ens = solo("m", model, 0.6, 5, 40);
    let gaz = build_gazetteer(None, &SynonymLexicon::bundled(), &RuleSet::bundled());
    let (utt, result) = ens.generate(MR, Dialect::E2e, &policy, &gaz).unwrap();
    assert!(utt.contains("The Golden Curry") && utt.contains("The Bakers"), "{utt}");
    assert!(!utt.contains("slot_"));
    assert!(result.ranked.len() <= 5);

    let (again, _) = ens.generate(MR, Dialect::E2e, &policy, &gaz).unwrap();
    assert_eq!(again, utt);
}

#[test]
fn training_is_reproducible_for_both_encoders() {
    let train_set = delexicalize_dataset(&corpus(), &DelexPolicy::default_for(Domain::E2e));
    let small = Dataset::new(train_set.samples[..12].to_vec(), Domain::E2e, Split::Train).unwrap();
    for enc in [EncoderKind::Bilstm, EncoderKind::CnnPooling] {
        let h = Hyperparams { epochs: 2, ..hyper(enc) };
        let (a, la) = train(&small, None, &h).unwrap();
        let (b, lb) = train(&small, None, &h).unwrap();
        assert_eq!(la, lb);
        assert_eq!(a, b);
        assert!(la.epochs[1].train_loss < la.initial_loss);
    }
}
