//! Checkpoint directories: `manifest.json` plus `params.bin` holding every
//! tensor as little-endian `f32` in index order.

use std::fs;
use std::path::Path;

use ensnlg_core::neural::{Hyperparams, Params, Seq2Seq, Submodel, Tensor, TrainingLog, Vocab};
use serde::{Deserialize, Serialize};

use crate::error::{NlgError, Result};
use crate::io::write_json;

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST: &str = "manifest.json";
pub const PARAMS: &str = "params.bin";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    /// Byte offset into `params.bin`.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub hyperparams: Hyperparams,
    pub src_vocab: Vocab,
    pub tgt_vocab: Vocab,
    pub tensors: Vec<TensorEntry>,
    #[serde(default)]
    pub training: Option<TrainingLog>,
}

pub fn save_checkpoint(dir: &Path, model: &Submodel, training: Option<&TrainingLog>) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| NlgError::io(dir, e))?;
    let mut bytes = Vec::with_capacity(model.net.params().total_size() * 4);
    let mut tensors = Vec::new();
    for (name, t) in model.net.params().iter() {
        tensors.push(TensorEntry { name: name.to_string(), shape: t.shape.clone(), offset: bytes.len() });
        for v in &t.values {
            bytes.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        hyperparams: model.net.hyper().clone(),
        src_vocab: model.src_vocab.clone(),
        tgt_vocab: model.tgt_vocab.clone(),
        tensors,
        training: training.cloned(),
    };
    let p = dir.join(PARAMS);
    fs::write(&p, &bytes).map_err(|e| NlgError::io(&p, e))?;
    write_json(&dir.join(MANIFEST), &manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| NlgError::io(&path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| NlgError::format(&path, e.to_string()))?;
    let found = value.get("format_version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
    if found != FORMAT_VERSION {
        return Err(NlgError::VersionMismatch { path, found, expected: FORMAT_VERSION });
    }
    serde_json::from_value(value).map_err(|e| NlgError::format(&path, e.to_string()))
}

pub fn load_checkpoint(dir: &Path) -> Result<(Submodel, Manifest)> {
    let manifest = read_manifest(dir)?;
    let mpath = dir.join(MANIFEST);
    if !manifest.src_vocab.is_well_formed() || !manifest.tgt_vocab.is_well_formed() {
        return Err(NlgError::format(&mpath, "vocabulary does not start with the special tokens"));
    }
    let hyper = &manifest.hyperparams;
    if hyper.src_vocab_size != manifest.src_vocab.len() || hyper.tgt_vocab_size != manifest.tgt_vocab.len() {
        return Err(NlgError::format(&mpath, "vocabulary sizes disagree with hyperparameters"));
    }
    let layout = Seq2Seq::layout(hyper);
    if layout.len() != manifest.tensors.len() {
        return Err(NlgError::format(&mpath, format!("expected {} tensors, found {}", layout.len(), manifest.tensors.len())));
    }
    for ((name, shape), entry) in layout.iter().zip(&manifest.tensors) {
        if *name != entry.name {
            return Err(NlgError::format(&mpath, format!("expected tensor `{name}`, found `{}`", entry.name)));
        }
        if *shape != entry.shape {
            return Err(NlgError::ShapeMismatch { path: mpath, name: name.clone(), expected: shape.clone(), found: entry.shape.clone() });
        }
    }

    let ppath = dir.join(PARAMS);
    let bytes = fs::read(&ppath).map_err(|e| NlgError::io(&ppath, e))?;
    let needed: usize = layout.iter().map(|(_, s)| s.iter().product::<usize>() * 4).sum();
    if bytes.len() != needed {
        let kind = if bytes.len() < needed { std::io::ErrorKind::UnexpectedEof } else { std::io::ErrorKind::InvalidData };
        return Err(NlgError::io(&ppath, std::io::Error::new(kind, format!("expected {needed} bytes, found {}", bytes.len()))));
    }
    let mut params = Params::new();
    let mut expected_offset = 0;
    for entry in &manifest.tensors {
        if entry.offset != expected_offset {
            return Err(NlgError::format(&mpath, format!("tensor `{}` has offset {}, expected {expected_offset}", entry.name, entry.offset)));
        }
        let n: usize = entry.shape.iter().product();
        let values = bytes[entry.offset..entry.offset + n * 4]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        params.push(entry.name.clone(), Tensor::from_values(&entry.shape, values).expect("length checked"));
        expected_offset += n * 4;
    }
    let net = Seq2Seq::from_params(hyper.clone(), params)?;
    Ok((Submodel { net, src_vocab: manifest.src_vocab.clone(), tgt_vocab: manifest.tgt_vocab.clone() }, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ensnlg_core::neural::EncoderKind;

    fn model(encoder: EncoderKind) -> Submodel {
        let src = Vocab::build([vec!["name".to_string(), "slot_name".to_string()]].iter(), 1);
        let tgt = Vocab::build([vec!["hello".to_string(), ".".to_string()]].iter(), 1);
        let hyper = Hyperparams {
            src_vocab_size: src.len(),
            tgt_vocab_size: tgt.len(),
            embed_dim: 4,
            encoder,
            encoder_hidden: 3,
            decoder_hidden: 5,
            attention_dim: 4,
            max_positions: 8,
            ..Hyperparams::default()
        };
        Submodel { net: Seq2Seq::new(hyper).unwrap(), src_vocab: src, tgt_vocab: tgt }
    }

    fn rounded(m: &Submodel) -> Vec<Vec<f64>> {
        m.net.params().iter().map(|(_, t)| t.values.iter().map(|v| *v as f32 as f64).collect()).collect()
    }

    #[test]
    fn round_trip_is_bit_exact_at_f32() {
        for enc in [EncoderKind::Bilstm, EncoderKind::CnnPooling] {
            let dir = tempfile::tempdir().unwrap();
            let m = model(enc);
            save_checkpoint(dir.path(), &m, None).unwrap();
            let (back, manifest) = load_checkpoint(dir.path()).unwrap();
            assert_eq!(manifest.hyperparams, *m.net.hyper());
            let loaded: Vec<Vec<f64>> = back.net.params().iter().map(|(_, t)| t.values.clone()).collect();
            assert_eq!(loaded, rounded(&m));
            assert_eq!(back.tgt_vocab, m.tgt_vocab);
            let before = fs::read(dir.path().join(PARAMS)).unwrap();
            save_checkpoint(dir.path(), &back, None).unwrap();
            assert_eq!(fs::read(dir.path().join(PARAMS)).unwrap(), before);
        }
    }

    #[test]
    fn truncated_params_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        save_checkpoint(dir.path(), &model(EncoderKind::Bilstm), None).unwrap();
        let p = dir.path().join(PARAMS);
        let bytes = fs::read(&p).unwrap();
        fs::write(&p, &bytes[..bytes.len() - 6]).unwrap();
        assert!(matches!(load_checkpoint(dir.path()), Err(NlgError::Io { .. })));
    }

    #[test]
    fn edited_shape_is_shape_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        save_checkpoint(dir.path(), &model(EncoderKind::Bilstm), None).unwrap();
        let p = dir.path().join(MANIFEST);
        let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
        v["tensors"][2]["shape"][0] = serde_json::json!(99);
        fs::write(&p, v.to_string()).unwrap();
        assert!(matches!(load_checkpoint(dir.path()), Err(NlgError::ShapeMismatch { .. })));
    }

    #[test]
    fn version_is_checked() {
        let dir = tempfile::tempdir().unwrap();
        save_checkpoint(dir.path(), &model(EncoderKind::Bilstm), None).unwrap();
        let p = dir.path().join(MANIFEST);
        let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
        v["format_version"] = serde_json::json!(7);
        fs::write(&p, v.to_string()).unwrap();
        assert!(matches!(load_checkpoint(dir.path()), Err(NlgError::VersionMismatch { found: 7, .. })));
    }
}
