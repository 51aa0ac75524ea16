//! Brute-force reference implementations of the text metrics. They work on
//! whitespace-separated lowercase words and favour obviousness over speed:
//! n-grams are counted by linear scan, the LCS by subsequence enumeration and
//! the METEOR alignment by exhaustive search.
#![allow(dead_code)]

pub type Case = (&'static str, &'static [&'static str]);

/// Hypothesis / references pairs for BLEU, NIST and ROUGE-L.
pub const CASES: &[Case] = &[
    ("the eagle is a coffee shop near the river", &["the eagle is a coffee shop by the river", "there is a coffee shop called the eagle"]),
    ("blue spice serves cheap italian food", &["blue spice serves cheap italian food in the city centre"]),
    ("zizzi is a family friendly pub", &["zizzi is a pub that is family friendly", "zizzi is a kid friendly pub"]),
    ("a pub", &["the mill is a pub in the riverside area"]),
    (
        "the golden curry is a family friendly japanese restaurant near the bakers",
        &["the golden curry near the bakers is a family friendly japanese restaurant"],
    ),
    (
        "strada has a high customer rating and serves french food",
        &["strada serves french food and has a high customer rating", "with a high customer rating strada serves french food"],
    ),
    ("cotto is near the portland arms in the city centre", &["near the portland arms in the city centre is cotto"]),
    (
        "wildwood is a low rated coffee shop near ranch",
        &["wildwood is a coffee shop near ranch with a low rating", "a low rated coffee shop near ranch is wildwood"],
    ),
    ("the punter is a cheap place", &["the punter is a cheap restaurant"]),
    ("giraffe is a pub by the river", &["giraffe is a pub by the river"]),
    (
        "aromi is an expensive coffee shop in the city centre near the rice boat",
        &["aromi is a coffee shop in the city centre", "aromi near the rice boat is expensive"],
    ),
    (
        "fitzbillies offers english food at moderate prices",
        &["fitzbillies serves english food at moderate prices", "english food at fitzbillies is moderately priced"],
    ),
];

/// METEOR cases without repeated words, so the alignment is determined by
/// the matching rules alone.
pub const METEOR_CASES: &[Case] = &[
    ("eagle serves french food", &["eagle serves french food"]),
    ("cheap italian pub", &["pub italian cheap"]),
    ("zizzi family friendly pub riverside", &["zizzi pub riverside family friendly"]),
    ("golden curry near bakers", &["near bakers golden curry japanese"]),
    ("strada serves expensive food", &["strada served pricey food"]),
    ("restaurants near river", &["restaurant near river"]),
    ("cities centre pub", &["city centre pubs"]),
    ("a b c d e f", &["f e d c b a"]),
    ("mill coffee shop", &["coffee shop mill riverside area"]),
    ("wildwood rating low", &["wildwood low rating ranch", "rating low wildwood"]),
    ("cotto portland arms", &["blue spice"]),
    ("fitzbillies dishes english", &["english dish fitzbillies"]),
];

/// Word pairs sharing a stem in the METEOR cases.
pub const STEM_PAIRS: &[(&str, &str)] =
    &[("serves", "served"), ("restaurants", "restaurant"), ("cities", "city"), ("pub", "pubs"), ("dishes", "dish")];

pub fn words(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

/// Occurrences of `gram` in `seq`.
pub fn occurrences(seq: &[&str], gram: &[&str]) -> usize {
    if gram.is_empty() || seq.len() < gram.len() {
        return 0;
    }
    (0..=seq.len() - gram.len()).filter(|&i| &seq[i..i + gram.len()] == gram).count()
}

fn distinct_ngrams<'a>(seq: &[&'a str], n: usize) -> Vec<Vec<&'a str>> {
    let mut out: Vec<Vec<&str>> = Vec::new();
    if seq.len() >= n {
        for i in 0..=seq.len() - n {
            let g = seq[i..i + n].to_vec();
            if !out.contains(&g) {
                out.push(g);
            }
        }
    }
    out
}

pub fn bleu(corpus: &[Case], max_n: usize, smoothing: Option<f64>) -> f64 {
    let mut c = 0usize;
    let mut r = 0usize;
    let mut precisions = Vec::new();
    for (h, refs) in corpus {
        let h = words(h);
        c += h.len();
        let mut best = usize::MAX;
        for x in refs.iter().map(|x| words(x).len()) {
            let d = x.abs_diff(h.len());
            if best == usize::MAX || d < best.abs_diff(h.len()) || (d == best.abs_diff(h.len()) && x < best) {
                best = x;
            }
        }
        r += best;
    }
    for n in 1..=max_n {
        let (mut m, mut t) = (0usize, 0usize);
        for (h, refs) in corpus {
            let h = words(h);
            let rs: Vec<Vec<&str>> = refs.iter().map(|x| words(x)).collect();
            for g in distinct_ngrams(&h, n) {
                let k = occurrences(&h, &g);
                let cap = rs.iter().map(|x| occurrences(x, &g)).max().unwrap_or(0);
                m += k.min(cap);
                t += k;
            }
        }
        let p = if m > 0 {
            m as f64 / t as f64
        } else {
            match smoothing {
                Some(eps) if t > 0 => eps / t as f64,
                _ => return 0.0,
            }
        };
        precisions.push(p);
    }
    if c == 0 {
        return 0.0;
    }
    let geo = precisions.iter().map(|p| p.ln()).sum::<f64>() / max_n as f64;
    let bp = if c > r { 1.0 } else { (1.0 - r as f64 / c as f64).exp() };
    bp * geo.exp()
}

pub fn nist(corpus: &[Case], max_n: usize) -> f64 {
    let all_refs: Vec<Vec<&str>> = corpus.iter().flat_map(|(_, refs)| refs.iter().map(|x| words(x))).collect();
    let total_words: usize = all_refs.iter().map(Vec::len).sum();
    let corpus_count = |g: &[&str]| all_refs.iter().map(|x| occurrences(x, g)).sum::<usize>();
    let info = |g: &[&str]| {
        let denom = corpus_count(g) as f64;
        let numer = if g.len() == 1 { total_words as f64 } else { corpus_count(&g[..g.len() - 1]) as f64 };
        (numer / denom).log2()
    };
    let mut score = 0.0;
    for n in 1..=max_n {
        let (mut gain, mut t) = (0.0, 0usize);
        for (h, refs) in corpus {
            let h = words(h);
            let rs: Vec<Vec<&str>> = refs.iter().map(|x| words(x)).collect();
            for g in distinct_ngrams(&h, n) {
                let k = occurrences(&h, &g);
                let cap = rs.iter().map(|x| occurrences(x, &g)).max().unwrap_or(0);
                if k.min(cap) > 0 {
                    gain += k.min(cap) as f64 * info(&g);
                }
                t += k;
            }
        }
        if t > 0 {
            score += gain / t as f64;
        }
    }
    let c: usize = corpus.iter().map(|(h, _)| words(h).len()).sum();
    let rbar: f64 =
        corpus.iter().map(|(_, refs)| refs.iter().map(|x| words(x).len()).sum::<usize>() as f64 / refs.len() as f64).sum();
    let ratio = (c as f64 / rbar).min(1.0);
    // factor 1/2 when the output is 2/3 of the reference length
    let beta = 0.5f64.ln() / (1.5f64.ln()).powi(2);
    score * (beta * ratio.ln().powi(2)).exp()
}

fn is_subsequence(sub: &[&str], seq: &[&str]) -> bool {
    let mut it = seq.iter();
    sub.iter().all(|w| it.any(|x| x == w))
}

/// Longest common subsequence by trying every subsequence of the shorter
/// string.
pub fn lcs_brute(a: &[&str], b: &[&str]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    assert!(short.len() <= 20, "too long for enumeration");
    let mut best = 0;
    for mask in 0u32..(1 << short.len()) {
        let k = mask.count_ones() as usize;
        if k <= best {
            continue;
        }
        let sub: Vec<&str> = (0..short.len()).filter(|i| mask >> i & 1 == 1).map(|i| short[i]).collect();
        if is_subsequence(&sub, long) {
            best = k;
        }
    }
    best
}

pub fn rouge_l(corpus: &[Case], beta: f64) -> f64 {
    let mut total = 0.0;
    for (h, refs) in corpus {
        let h = words(h);
        let mut best: f64 = 0.0;
        for x in refs.iter().map(|x| words(x)) {
            let l = lcs_brute(&h, &x) as f64;
            if l > 0.0 {
                let (p, r) = (l / h.len() as f64, l / x.len() as f64);
                best = best.max((1.0 + beta * beta) * p * r / (r + beta * beta * p));
            }
        }
        total += best;
    }
    total / corpus.len() as f64
}

fn stem_equal(a: &str, b: &str) -> bool {
    STEM_PAIRS.iter().any(|&(x, y)| (a, b) == (x, y) || (a, b) == (y, x))
}

/// All one-to-one alignments, scored lexicographically by (exact matches,
/// total matches, fewest chunks).
fn best_alignment(h: &[&str], r: &[&str]) -> Vec<(usize, usize)> {
    fn rec(i: usize, h: &[&str], r: &[&str], used: &mut Vec<bool>, cur: &mut Vec<(usize, usize)>, best: &mut Option<((usize, usize, i64), Vec<(usize, usize)>)>) {
        if i == h.len() {
            let exact = cur.iter().filter(|&&(a, b)| h[a] == r[b]).count();
            let key = (exact, cur.len(), -(chunk_count(cur) as i64));
            if best.as_ref().map_or(true, |(k, _)| key > *k) {
                *best = Some((key, cur.clone()));
            }
            return;
        }
        rec(i + 1, h, r, used, cur, best);
        for j in 0..r.len() {
            if !used[j] && (h[i] == r[j] || stem_equal(h[i], r[j])) {
                used[j] = true;
                cur.push((i, j));
                rec(i + 1, h, r, used, cur, best);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut best = None;
    rec(0, h, r, &mut vec![false; r.len()], &mut Vec::new(), &mut best);
    best.map(|(_, a)| a).unwrap_or_default()
}

fn chunk_count(links: &[(usize, usize)]) -> usize {
    let mut sorted = links.to_vec();
    sorted.sort();
    let mut chunks = 0;
    for (k, &(a, b)) in sorted.iter().enumerate() {
        if k == 0 || !(a == sorted[k - 1].0 + 1 && b == sorted[k - 1].1 + 1) {
            chunks += 1;
        }
    }
    chunks
}

pub fn meteor_pair(h: &str, r: &str, alpha: f64, beta: f64, gamma: f64) -> f64 {
    let (h, r) = (words(h), words(r));
    let links = best_alignment(&h, &r);
    let m = links.len() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let p = m / h.len() as f64;
    let rec = m / r.len() as f64;
    let fmean = p * rec / (alpha * p + (1.0 - alpha) * rec);
    let frag = if links.len() > 1 { (chunk_count(&links) as f64 - 1.0) / (m - 1.0) } else { 0.0 };
    fmean * (1.0 - gamma * frag.powf(beta))
}

pub fn meteor(corpus: &[Case], alpha: f64, beta: f64, gamma: f64) -> f64 {
    let total: f64 =
        corpus.iter().map(|(h, refs)| refs.iter().map(|r| meteor_pair(h, r, alpha, beta, gamma)).fold(0.0, f64::max)).sum();
    total / corpus.len() as f64
}
