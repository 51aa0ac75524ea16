use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ensnlg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ensnlg")).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = ensnlg(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn value<'a>(stdout: &'a str, key: &str) -> &'a str {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no `{key}` in:\n{stdout}"))
}

#[test]
fn synthetic_pipeline_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let out = ok(d, &["synth", "--size", "60", "--seed", "7", "--out", "syn.csv"]);
    assert_eq!(value(&out, "samples"), "60");

    let stats = ok(d, &["stats", "--data", "syn.csv", "--out", "stats.json"]);
    assert_eq!(value(&stats, "samples"), "60");
    assert_eq!(value(&stats, "avg_refs_per_mr"), "2.0000");
    assert!(d.join("stats.json").exists());

    let align = ok(d, &["align", "--data", "syn.csv", "--out", "align.json"]);
    assert_eq!(value(&align, "unaligned"), "0");
    assert_eq!(value(&align, "overgenerated"), "0");

    let pre = ok(d, &["preprocess", "--data", "syn.csv", "--out", "delex.csv", "--report", "delex.json"]);
    assert_eq!(value(&pre, "unsubstituted"), "0");
    assert!(fs::read_to_string(d.join("delex.csv")).unwrap().contains("slot_name"));

    let aug = ok(d, &["augment", "--data", "syn.csv", "--out", "aug.csv"]);
    assert!(value(&aug, "output_samples").parse::<usize>().unwrap() > 60);

    let sel = ok(d, &["select", "--data", "syn.csv", "--top", "1", "--out", "sel.csv"]);
    assert_eq!(value(&sel, "selected"), "30");

    // an untrained checkpoint still generates
    let train = ok(
        d,
        &["train", "--data", "syn.csv", "--epochs", "0", "--embed-dim", "8", "--hidden", "8", "--out", "ck/lstm1"],
    );
    assert_eq!(value(&train, "epochs"), "0");
    fs::write(
        d.join("ens.toml"),
        "pool_k = 3\nmax_len = 12\n\n[[submodels]]\ncheckpoint = \"ck/lstm1\"\nencoder = \"bilstm\"\nepochs = 0\n",
    )
    .unwrap();
    let gen = ok(d, &["generate", "--ensemble", "ens.toml", "--mr", "name[X], food[Italian]", "--out", "rerank.json"]);
    let utt = value(&gen, "utterance");
    assert!(!utt.contains("slot_"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("rerank.json")).unwrap()).unwrap();
    assert!(json["result"]["ranked"].as_array().unwrap().len() <= 3);
    // determinism
    let again = ok(d, &["generate", "--ensemble", "ens.toml", "--mr", "name[X], food[Italian]"]);
    assert_eq!(value(&again, "utterance"), utt);

    // wrong encoder declared in the spec
    fs::write(
        d.join("bad.toml"),
        "[[submodels]]\ncheckpoint = \"ck/lstm1\"\nencoder = \"cnn_pooling\"\nepochs = 0\n",
    )
    .unwrap();
    let bad = ensnlg(d, &["generate", "--ensemble", "bad.toml", "--mr", "name[X]"]);
    assert_eq!(bad.status.code(), Some(6));
}

#[test]
fn commands_are_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["synth", "--size", "30", "--seed", "3", "--out", "a.csv"]);
    ok(d, &["synth", "--size", "30", "--seed", "3", "--out", "b.csv"]);
    assert_eq!(fs::read(d.join("a.csv")).unwrap(), fs::read(d.join("b.csv")).unwrap());
    for out in ["c1", "c2"] {
        ok(d, &["train", "--data", "a.csv", "--epochs", "1", "--embed-dim", "6", "--hidden", "6", "--seed", "5", "--out", out]);
    }
    for f in ["params.bin", "manifest.json"] {
        assert_eq!(fs::read(d.join("c1").join(f)).unwrap(), fs::read(d.join("c2").join(f)).unwrap());
    }
    ok(d, &["augment", "--data", "a.csv", "--permute", "2", "--seed", "9", "--out", "p1.csv"]);
    ok(d, &["augment", "--data", "a.csv", "--permute", "2", "--seed", "9", "--out", "p2.csv"]);
    assert_eq!(fs::read(d.join("p1.csv")).unwrap(), fs::read(d.join("p2.csv")).unwrap());
}

#[test]
fn evaluate_identity_and_groups() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let lines = "The Eagle is a pub near Zizzi.\nBlue Spice serves cheap Italian food.\n";
    fs::write(d.join("h.txt"), lines).unwrap();
    fs::write(d.join("r.txt"), lines).unwrap();
    let out = ok(d, &["evaluate", "--hyp", "h.txt", "--ref", "r.txt", "--out", "m.json"]);
    assert_eq!(value(&out, "bleu"), "1.0000");
    assert_eq!(value(&out, "rouge_l"), "1.0000");
    assert_eq!(value(&out, "meteor_lite"), "1.0000");

    fs::write(d.join("g.txt"), "x y z\nThe Eagle is a pub near Zizzi.\n\nBlue Spice serves cheap Italian food.\n").unwrap();
    fs::write(d.join("mr.txt"), "name[The Eagle], eatType[pub], near[Zizzi]\nname[Blue Spice], food[Italian], priceRange[cheap], area[riverside]\n").unwrap();
    let out = ok(d, &["evaluate", "--hyp", "h.txt", "--ref", "g.txt", "--mr", "mr.txt"]);
    assert_eq!(value(&out, "bleu"), "1.0000");
    // area is missing from the second hypothesis: 1 of 7 slots
    assert_eq!(value(&out, "unaligned"), "1");
    assert_eq!(value(&out, "err"), format!("{:.4}", 1.0 / 7.0));

    fs::write(d.join("short.txt"), "only one\n").unwrap();
    let bad = ensnlg(d, &["evaluate", "--hyp", "h.txt", "--ref", "short.txt"]);
    assert_eq!(bad.status.code(), Some(4));
}

#[test]
fn failures_give_one_line_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let out = ensnlg(d, &["stats", "--data", "missing.csv"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error[io]"));

    fs::write(d.join("cfg.toml"), "version = 1\nbogus = true\n").unwrap();
    let out = ensnlg(d, &["--config", "cfg.toml", "synth", "--size", "3", "--out", "x.csv"]);
    assert_eq!(out.status.code(), Some(6));

    let out = ensnlg(d, &["synth", "--size", "0", "--out", "x.csv"]);
    assert_eq!(out.status.code(), Some(10));
    assert!(!ensnlg(d, &["nonsense"]).status.success());
}

#[test]
fn config_supplies_hyperparameters_and_paths() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::create_dir_all(d.join("data")).unwrap();
    ok(&d.join("data"), &["synth", "--size", "20", "--out", "syn.csv"]);
    fs::write(
        d.join("run.toml"),
        "version = 1\n[paths]\ndata = \"data\"\n[hyperparams]\nembed_dim = 5\nencoder_hidden = 4\ndecoder_hidden = 4\nattention_dim = 4\nepochs = 0\nencoder = \"cnn_pooling\"\n",
    )
    .unwrap();
    let out = ok(d, &["--config", "run.toml", "train", "--data", "syn.csv", "--out", "ck"]);
    assert_eq!(value(&out, "encoder"), "cnn_pooling");
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("ck/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["hyperparams"]["embed_dim"], 5);
}
