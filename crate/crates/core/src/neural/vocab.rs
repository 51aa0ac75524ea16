use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub const UNK: usize = 0;
pub const BOS: usize = 1;
pub const EOS: usize = 2;

const SPECIALS: [&str; 3] = ["<unk>", "<s>", "</s>"];

/// Token ↔ id mapping. Ids 0..3 are `<unk>`, `<s>`, `</s>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocab {
    tokens: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl From<Vec<String>> for Vocab {
    fn from(tokens: Vec<String>) -> Self {
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self { tokens, index }
    }
}

impl From<Vocab> for Vec<String> {
    fn from(v: Vocab) -> Self {
        v.tokens
    }
}

impl Vocab {
    /// Builds a vocabulary of tokens seen at least `min_count` times, in
    /// order of decreasing frequency (ties alphabetical).
    pub fn build<'a, I, S>(sequences: I, min_count: usize) -> Self
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = &'a String>,
    {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for seq in sequences {
            for t in seq {
                *counts.entry(t.as_str()).or_default() += 1;
            }
        }
        let mut sorted: Vec<(&str, usize)> =
            counts.into_iter().filter(|(t, c)| *c >= min_count.max(1) && !SPECIALS.contains(t)).collect();
        sorted.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let tokens = SPECIALS.iter().map(|s| s.to_string()).chain(sorted.into_iter().map(|(t, _)| t.to_string())).collect::<Vec<_>>();
        Self::from(tokens)
    }

    /// Whether the id layout starts with the three special tokens.
    pub fn is_well_formed(&self) -> bool {
        self.tokens.len() >= 3 && self.tokens.iter().zip(SPECIALS).all(|(a, b)| a == b) && self.index.len() == self.tokens.len()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    pub fn token(&self, id: usize) -> &str {
        self.tokens.get(id).map(String::as_str).unwrap_or(SPECIALS[UNK])
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens.iter().map(|t| self.id(t.as_ref())).collect()
    }

    /// Maps ids back to tokens, dropping the special tokens.
    pub fn decode(&self, ids: &[usize]) -> Vec<String> {
        ids.iter().filter(|&&i| i > EOS).map(|&i| self.token(i).to_string()).collect()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}
