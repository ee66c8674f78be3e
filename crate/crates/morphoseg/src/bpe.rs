//! Byte-pair encoding over marker-aware token streams.
//!
//! Merge operations are learned from word-type frequencies (protected
//! marker tokens contribute nothing) and replayed at application time.
//! Unlike word-end-symbol variants, the continuation marker `##` is
//! attached to the right end of every sub-word except the last, so
//! `merge_bpe` can reassemble words by concatenating marked runs.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::token::{MarkerScheme, Token, TokenKind, TokenStream};

pub const MERGE_TABLE_HEADER: &str = "#morphoseg-bpe v1";

/// Ordered list of learned merge operations.
#[derive(Debug, Clone, Default)]
pub struct MergeTable {
    merges: Vec<(String, String)>,
    ranks: HashMap<(String, String), u32>,
}

impl MergeTable {
    pub fn from_pairs(pairs: Vec<(String, String)>) -> MergeTable {
        let ranks = pairs
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i as u32))
            .collect();
        MergeTable {
            merges: pairs,
            ranks,
        }
    }

    pub fn len(&self) -> usize {
        self.merges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.merges.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, (String, String)> {
        self.merges.iter()
    }

    /// Rank of a pair if it is a learned merge (lower replays earlier).
    pub fn rank(&self, left: &str, right: &str) -> Option<u32> {
        // Avoid allocating for the common miss case.
        self.ranks
            .get(&(left.to_string(), right.to_string()))
            .copied()
    }

    pub fn read<R: BufRead>(reader: R, name: &str) -> Result<MergeTable> {
        let mut pairs = Vec::new();
        let mut lines = reader.lines();
        let header = lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::parse(name, 1, "empty merge table file"))?;
        if header.trim_end() != MERGE_TABLE_HEADER {
            return Err(Error::parse(
                name,
                1,
                format!("expected header {MERGE_TABLE_HEADER:?}, got {header:?}"),
            ));
        }
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut it = line.splitn(2, ' ');
            let left = it.next().unwrap_or("");
            let right = it.next().unwrap_or("");
            if left.is_empty() || right.is_empty() || right.contains(' ') {
                return Err(Error::parse(
                    name,
                    i + 2,
                    format!("expected `left right`, got {line:?}"),
                ));
            }
            pairs.push((left.to_string(), right.to_string()));
        }
        Ok(MergeTable::from_pairs(pairs))
    }

    pub fn write<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        writeln!(writer, "{MERGE_TABLE_HEADER}")?;
        for (l, r) in &self.merges {
            writeln!(writer, "{l} {r}")?;
        }
        Ok(())
    }
}

/// Token kinds the BPE stage must never segment or merge across.
pub fn default_protected_kinds() -> HashSet<TokenKind> {
    [
        TokenKind::SuffixPart,
        TokenKind::CompoundSeparator,
        TokenKind::CaseMarkUpper,
        TokenKind::CaseMarkLower,
        TokenKind::Filler,
        TokenKind::HyphenSeparator,
        TokenKind::TagToken,
    ]
    .into_iter()
    .collect()
}

#[derive(Debug, Clone)]
pub struct BpeConfig {
    pub num_merges: u32,
    /// Learn on a source+target concatenation (the caller passes the
    /// concatenated corpora; recorded here for configuration readability).
    pub joint: bool,
    pub protected_kinds: HashSet<TokenKind>,
}

impl Default for BpeConfig {
    fn default() -> Self {
        BpeConfig {
            num_merges: 29_500,
            joint: true,
            protected_kinds: default_protected_kinds(),
        }
    }
}

/// Max-heap entry: greatest count first, ties broken towards the
/// lexicographically smallest (left, right) pair.
struct Candidate {
    count: u64,
    left: String,
    right: String,
    pair: (u32, u32),
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.count
            .cmp(&other.count)
            .then_with(|| {
                (&other.left, &other.right).cmp(&(&self.left, &self.right))
            })
    }
}

struct Vocab {
    symbols: Vec<String>,
    by_text: HashMap<String, u32>,
}

impl Vocab {
    fn new() -> Vocab {
        Vocab {
            symbols: Vec::new(),
            by_text: HashMap::new(),
        }
    }
    fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.by_text.get(s) {
            return id;
        }
        let id = self.symbols.len() as u32;
        self.symbols.push(s.to_string());
        self.by_text.insert(s.to_string(), id);
        id
    }
    fn text(&self, id: u32) -> &str {
        &self.symbols[id as usize]
    }
}

fn count_pairs(syms: &[u32]) -> HashMap<(u32, u32), u64> {
    let mut m = HashMap::new();
    for w in syms.windows(2) {
        *m.entry((w[0], w[1])).or_insert(0) += 1;
    }
    m
}

/// Replace adjacent `(left, right)` occurrences left-to-right,
/// non-overlapping.
fn merge_in_word(syms: &[u32], pair: (u32, u32), merged: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(syms.len());
    let mut i = 0;
    while i < syms.len() {
        if i + 1 < syms.len() && syms[i] == pair.0 && syms[i + 1] == pair.1 {
            out.push(merged);
            i += 2;
        } else {
            out.push(syms[i]);
            i += 1;
        }
    }
    out
}

/// Learn merge operations from a corpus. Counting is over word types
/// weighted by corpus frequency; tokens of a protected kind are skipped.
/// Deterministic for a fixed corpus: equal pair frequencies are broken by
/// lexicographic order on (left, right), smallest pair first.
pub fn learn_bpe<'a, I>(corpus: I, config: &BpeConfig) -> MergeTable
where
    I: IntoIterator<Item = &'a TokenStream>,
{
    let mut freqs: HashMap<&str, u64> = HashMap::new();
    for stream in corpus {
        for tok in stream.iter() {
            if !config.protected_kinds.contains(&tok.kind) {
                *freqs.entry(tok.text.as_str()).or_insert(0) += 1;
            }
        }
    }
    learn_bpe_from_counts(freqs, config.num_merges)
}

/// Core learner over a word-type frequency table.
pub fn learn_bpe_from_counts<'a, I>(word_counts: I, num_merges: u32) -> MergeTable
where
    I: IntoIterator<Item = (&'a str, u64)>,
{
    let mut vocab = Vocab::new();
    let mut words: Vec<(Vec<u32>, u64)> = Vec::new();
    for (word, freq) in word_counts {
        let syms: Vec<u32> = word
            .chars()
            .map(|c| vocab.intern(&c.to_string()))
            .collect();
        if syms.len() >= 2 {
            words.push((syms, freq));
        }
    }

    let mut pair_counts: HashMap<(u32, u32), u64> = HashMap::new();
    let mut pair_words: HashMap<(u32, u32), HashSet<usize>> = HashMap::new();
    for (idx, (syms, freq)) in words.iter().enumerate() {
        for (pair, n) in count_pairs(syms) {
            *pair_counts.entry(pair).or_insert(0) += n * freq;
            pair_words.entry(pair).or_default().insert(idx);
        }
    }

    let mut heap: BinaryHeap<Candidate> = pair_counts
        .iter()
        .map(|(&pair, &count)| Candidate {
            count,
            left: vocab.text(pair.0).to_string(),
            right: vocab.text(pair.1).to_string(),
            pair,
        })
        .collect();

    let mut merges = Vec::new();
    while (merges.len() as u32) < num_merges {
        // Skip entries that no longer reflect the live count.
        let best = loop {
            match heap.pop() {
                None => break None,
                Some(c) => {
                    if c.count > 0 && pair_counts.get(&c.pair) == Some(&c.count) {
                        break Some(c);
                    }
                }
            }
        };
        let Some(best) = best else { break };

        let merged_text = format!("{}{}", best.left, best.right);
        let merged = vocab.intern(&merged_text);
        merges.push((best.left, best.right));

        let affected: Vec<usize> = pair_words
            .get(&best.pair)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default();
        let mut touched: HashSet<(u32, u32)> = HashSet::new();
        for idx in affected {
            let freq = words[idx].1;
            let old_pairs = count_pairs(&words[idx].0);
            let new_syms = merge_in_word(&words[idx].0, best.pair, merged);
            let new_pairs = count_pairs(&new_syms);
            words[idx].0 = new_syms;
            for (pair, n) in &old_pairs {
                let e = pair_counts.entry(*pair).or_insert(0);
                *e = e.saturating_sub(n * freq);
                touched.insert(*pair);
                if !new_pairs.contains_key(pair) {
                    if let Some(set) = pair_words.get_mut(pair) {
                        set.remove(&idx);
                    }
                }
            }
            for (pair, n) in &new_pairs {
                *pair_counts.entry(*pair).or_insert(0) += n * freq;
                touched.insert(*pair);
                pair_words.entry(*pair).or_default().insert(idx);
            }
        }
        for pair in touched {
            let count = pair_counts.get(&pair).copied().unwrap_or(0);
            if count > 0 {
                heap.push(Candidate {
                    count,
                    left: vocab.text(pair.0).to_string(),
                    right: vocab.text(pair.1).to_string(),
                    pair,
                });
            }
        }
    }
    MergeTable::from_pairs(merges)
}

/// Kinds that `apply_bpe` will segment; everything else passes through.
fn splittable(kind: TokenKind) -> bool {
    matches!(kind, TokenKind::Plain | TokenKind::LemmaToken)
}

/// Segment each non-protected token: split to characters, replay the merge
/// table, emit sub-words left-to-right with the continuation marker
/// appended to every piece except the last. Tokens reduced to a single
/// piece are unchanged.
pub fn apply_bpe(stream: &TokenStream, merges: &MergeTable, scheme: &MarkerScheme) -> TokenStream {
    let mut out = TokenStream::default();
    for tok in stream.iter() {
        if !splittable(tok.kind) {
            out.push(tok.clone());
            continue;
        }
        let pieces = segment_word(&tok.text, merges);
        if pieces.len() <= 1 {
            out.push(tok.clone());
            continue;
        }
        let last = pieces.len() - 1;
        for (i, piece) in pieces.into_iter().enumerate() {
            if i < last {
                out.push(Token::classified(
                    format!("{piece}{}", scheme.bpe_marker),
                    scheme,
                ));
            } else {
                out.push(Token::classified(piece, scheme));
            }
        }
    }
    out
}

/// Greedy lowest-rank-first merging; equivalent to replaying the table in
/// order for any table produced by `learn_bpe` (each merge's operand
/// symbols are built exclusively by earlier merges).
fn segment_word(word: &str, merges: &MergeTable) -> Vec<String> {
    let mut syms: Vec<String> = word.chars().map(|c| c.to_string()).collect();
    if syms.len() < 2 {
        return syms;
    }
    loop {
        let mut best: Option<(u32, usize)> = None;
        for i in 0..syms.len() - 1 {
            if let Some(rank) = merges
                .ranks
                .get(&(syms[i].clone(), syms[i + 1].clone()))
                .copied()
            {
                if best.is_none_or(|(r, _)| rank < r) {
                    best = Some((rank, i));
                }
            }
        }
        match best {
            Some((_, i)) => {
                let right = syms.remove(i + 1);
                syms[i].push_str(&right);
            }
            None => return syms,
        }
    }
}

/// Concatenate every maximal continuation run `x1## x2## ... xn` back into
/// a single token. Exact inverse of [`apply_bpe`].
pub fn merge_bpe(stream: &TokenStream, scheme: &MarkerScheme) -> Result<TokenStream> {
    let (out, diags) = merge_bpe_lenient(stream, scheme);
    if let Some(d) = diags.into_iter().next() {
        return Err(Error::MalformedStream(d));
    }
    Ok(out)
}

/// Best-effort variant: a sentence ending in a `##`-marked token yields the
/// accumulated text with the marker stripped, plus a diagnostic.
pub fn merge_bpe_lenient(stream: &TokenStream, scheme: &MarkerScheme) -> (TokenStream, Vec<String>) {
    let mut out = TokenStream::default();
    let mut diags = Vec::new();
    let mut pending = String::new();
    for tok in stream.iter() {
        if tok.kind == TokenKind::BpeContinuation {
            let base = &tok.text[..tok.text.len() - scheme.bpe_marker.len()];
            pending.push_str(base);
        } else if !pending.is_empty() {
            pending.push_str(&tok.text);
            out.push(Token::classified(std::mem::take(&mut pending), scheme));
        } else {
            out.push(tok.clone());
        }
    }
    if !pending.is_empty() {
        diags.push(format!(
            "sentence ends with a continuation-marked token ({pending:?} left unattached)"
        ));
        out.push(Token::classified(pending, scheme));
    }
    (out, diags)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scheme() -> MarkerScheme {
        MarkerScheme::default()
    }

    fn stream(line: &str) -> TokenStream {
        TokenStream::parse(line, &scheme())
    }

    fn learn_lines(words: &[(&str, u64)], n: u32) -> MergeTable {
        learn_bpe_from_counts(words.iter().map(|&(w, c)| (w, c)), n)
    }

    #[test]
    fn first_merge_breaks_tie_lexicographically() {
        // (l,o) and (o,w) both count 7; (l,o) is lexicographically smaller.
        let table = learn_lines(&[("low", 5), ("lower", 2)], 1);
        assert_eq!(
            table.iter().collect::<Vec<_>>(),
            vec![&("l".to_string(), "o".to_string())]
        );
    }

    #[test]
    fn zero_merges_gives_empty_table() {
        let table = learn_lines(&[("low", 5)], 0);
        assert!(table.is_empty());
    }

    #[test]
    fn empty_corpus_gives_empty_table() {
        let table = learn_bpe(std::iter::empty(), &BpeConfig::default());
        assert!(table.is_empty());
    }

    #[test]
    fn protected_tokens_contribute_nothing() {
        let corpus: Vec<TokenStream> = vec![stream("$$en $$en Fisch")];
        let cfg = BpeConfig {
            num_merges: 10,
            ..BpeConfig::default()
        };
        let table = learn_bpe(corpus.iter(), &cfg);
        for (l, r) in table.iter() {
            for c in l.chars().chain(r.chars()) {
                assert!("Fisch".contains(c), "symbol {l}{r} escaped the corpus");
            }
        }
        // "Fisch" has 4 adjacent pairs, so at most 4 merges materialize.
        assert!(table.len() <= 4);
    }

    #[test]
    fn apply_with_empty_table_splits_to_characters() {
        let out = apply_bpe(&stream("ab"), &MergeTable::default(), &scheme());
        assert_eq!(out.to_line(), "a## b");
    }

    #[test]
    fn apply_passes_protected_tokens_through() {
        let table = learn_lines(&[("en", 5)], 5);
        let out = apply_bpe(&stream("$$en @@ #U @es@ @-@"), &table, &scheme());
        assert_eq!(out.to_line(), "$$en @@ #U @es@ @-@");
    }

    #[test]
    fn apply_reproduces_partial_stem_split() {
        // Merges rebuild "Wir" but never (Wir, t): "Wirt" -> "Wir## t".
        let table = learn_lines(&[("Wir", 10)], 10);
        let out = apply_bpe(&stream("Wirt"), &table, &scheme());
        assert_eq!(out.to_line(), "Wir## t");
        let back = merge_bpe(&out, &scheme()).unwrap();
        assert_eq!(back.to_line(), "Wirt");
    }

    #[test]
    fn single_piece_tokens_are_unchanged() {
        let table = learn_lines(&[("Fisch", 10)], 10);
        let out = apply_bpe(&stream("Fisch"), &table, &scheme());
        assert_eq!(out.to_line(), "Fisch");
    }

    #[test]
    fn merge_without_continuations_is_identity() {
        let s = stream("Fisch $$en");
        assert_eq!(merge_bpe(&s, &scheme()).unwrap(), s);
    }

    #[test]
    fn trailing_continuation_is_an_error() {
        let s = stream("Wir##");
        assert!(merge_bpe(&s, &scheme()).is_err());
        let (out, diags) = merge_bpe_lenient(&s, &scheme());
        assert_eq!(out.to_line(), "Wir");
        assert_eq!(diags.len(), 1);
    }

    #[test]
    fn table_file_round_trip() {
        let table = learn_lines(&[("lower", 5), ("lowest", 3)], 6);
        let mut buf = Vec::new();
        table.write(&mut buf).unwrap();
        let loaded = MergeTable::read(&buf[..], "mem").unwrap();
        assert_eq!(
            table.iter().collect::<Vec<_>>(),
            loaded.iter().collect::<Vec<_>>()
        );
        assert!(MergeTable::read(&b"no header\na b\n"[..], "mem").is_err());
        assert!(MergeTable::read(&b"#morphoseg-bpe v1\nonlyleft\n"[..], "mem").is_err());
    }
}
