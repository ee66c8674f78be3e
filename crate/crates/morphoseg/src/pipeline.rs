//! End-to-end corpus preparation and inversion.
//!
//! `segment` runs one of three strategies over a sentence:
//!
//! * `Segmentation` — truecase (when a model is configured), hyphen
//!   splitting, suffix detachment, compound splitting (German), BPE;
//! * `LemmaTag` — tag/lemma encoding of annotated input, then BPE with
//!   tags protected;
//! * `BaselineBpe` — truecase and BPE only.
//!
//! `desegment` is the exact inverse cascade. Without a truecase model the
//! round trip is byte-exact on arbitrary input; with one, desegmentation
//! restores conventional sentence-initial capitalization instead (the
//! initial lowercase/uppercase bit is consumed by truecasing).

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::affix::{split_suffixes_stream, AffixLanguage, AffixRuleSet};
use crate::bpe::{apply_bpe, merge_bpe_lenient, BpeConfig, MergeTable};
use crate::compound::{split_compounds_stream, CompoundConfig, FrequencyLexicon};
use crate::error::{Error, Result};
use crate::lemmatag::{decode_lemmatag, encode_lemmatag, AnalyzedToken, InflectionLexicon};
use crate::token::{
    escape_corpus_token, unescape_corpus_token, MarkerScheme, Token, TokenKind, TokenStream,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    BaselineBpe,
    LemmaTag,
    Segmentation,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub strategy: Strategy,
    pub language: AffixLanguage,
    pub bpe: BpeConfig,
    pub compound: CompoundConfig,
    pub max_len_raw: usize,
    pub max_len_bpe: usize,
    pub hyphen_split: bool,
    pub scheme: MarkerScheme,
}

impl PipelineConfig {
    pub fn new(strategy: Strategy) -> PipelineConfig {
        PipelineConfig {
            strategy,
            language: AffixLanguage::German,
            bpe: BpeConfig::default(),
            compound: CompoundConfig::default(),
            max_len_raw: 50,
            max_len_bpe: 60,
            hyphen_split: strategy == Strategy::Segmentation,
            scheme: MarkerScheme::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_len_raw > self.max_len_bpe {
            return Err(Error::Config(format!(
                "max_len_raw ({}) must not exceed max_len_bpe ({})",
                self.max_len_raw, self.max_len_bpe
            )));
        }
        Ok(())
    }

    /// The compound stage applies to German only; the Czech cascade goes
    /// straight from suffix splitting to BPE.
    pub fn uses_compound(&self) -> bool {
        self.strategy == Strategy::Segmentation && self.language == AffixLanguage::German
    }
}

/// Shared read-only resources for segment/desegment.
#[derive(Default, Clone, Copy)]
pub struct Resources<'a> {
    pub rules: Option<&'a AffixRuleSet>,
    pub freq: Option<&'a FrequencyLexicon>,
    pub merges: Option<&'a MergeTable>,
    pub truecase: Option<&'a TruecaseModel>,
    pub inflex: Option<&'a InflectionLexicon>,
}

const DETACH_PUNCT: &[char] = &['.', ',', ';', ':', '!', '?', '"', '(', ')'];

/// Whitespace tokenization with detachment of word-adjacent sentence
/// punctuation, followed by corpus escaping.
pub fn tokenize(line: &str, scheme: &MarkerScheme) -> TokenStream {
    let mut out = TokenStream::default();
    let mut push = |text: &str| {
        out.push(Token::classified(escape_corpus_token(text, scheme), scheme));
    };
    for chunk in line.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut start = 0;
        let mut end = chars.len();
        while start < end && DETACH_PUNCT.contains(&chars[start]) {
            start += 1;
        }
        while end > start && DETACH_PUNCT.contains(&chars[end - 1]) {
            end -= 1;
        }
        if start == end {
            // nothing but punctuation: one token per character
            for &c in &chars {
                push(&c.to_string());
            }
            continue;
        }
        for &c in &chars[..start] {
            push(&c.to_string());
        }
        push(&chars[start..end].iter().collect::<String>());
        for &c in &chars[end..] {
            push(&c.to_string());
        }
    }
    out
}

/// Split every internal single hyphen of a Plain token into a standalone
/// `@-@` token; leading/trailing hyphens (and hyphen runs) stay attached.
pub fn hyphen_split(stream: &TokenStream, scheme: &MarkerScheme) -> TokenStream {
    let mut out = TokenStream::default();
    for tok in stream.iter() {
        if tok.kind != TokenKind::Plain {
            out.push(tok.clone());
            continue;
        }
        let chars: Vec<char> = tok.text.chars().collect();
        let mut pieces: Vec<String> = Vec::new();
        let mut current = String::new();
        for (i, &c) in chars.iter().enumerate() {
            let splittable = c == '-'
                && i > 0
                && i + 1 < chars.len()
                && chars[i - 1] != '-'
                && chars[i + 1] != '-';
            if splittable {
                pieces.push(std::mem::take(&mut current));
            } else {
                current.push(c);
            }
        }
        pieces.push(current);
        if pieces.len() == 1 {
            out.push(tok.clone());
        } else {
            for (i, piece) in pieces.into_iter().enumerate() {
                if i > 0 {
                    out.push(Token::classified(scheme.hyphen_token.clone(), scheme));
                }
                out.push(Token::classified(piece, scheme));
            }
        }
    }
    out
}

/// Rejoin `X @-@ Y` into `X-Y`. Inverse of [`hyphen_split`].
pub fn hyphen_join(stream: &TokenStream, scheme: &MarkerScheme) -> Result<TokenStream> {
    let (out, diags) = hyphen_join_lenient(stream, scheme);
    if let Some(d) = diags.into_iter().next() {
        return Err(Error::MalformedStream(d));
    }
    Ok(out)
}

pub fn hyphen_join_lenient(
    stream: &TokenStream,
    scheme: &MarkerScheme,
) -> (TokenStream, Vec<String>) {
    let mut out = TokenStream::default();
    let mut diags = Vec::new();
    let toks = &stream.tokens;
    let mut i = 0;
    let joinable =
        |t: Option<&Token>| t.is_some_and(|t| matches!(t.kind, TokenKind::Plain | TokenKind::LemmaToken));
    while i < toks.len() {
        if toks[i].kind == TokenKind::HyphenSeparator {
            let left_ok = joinable(out.tokens.last());
            let right_ok = joinable(toks.get(i + 1));
            if left_ok && right_ok {
                let last = out.tokens.last_mut().unwrap();
                let merged = format!("{}-{}", last.text, toks[i + 1].text);
                *last = Token::classified(merged, scheme);
                i += 2;
            } else {
                diags.push("dangling hyphen separator".to_string());
                out.push(Token::classified("-", scheme));
                i += 1;
            }
        } else {
            out.push(toks[i].clone());
            i += 1;
        }
    }
    (out, diags)
}

/// Lowercased token to its most frequent surface casing.
#[derive(Debug, Clone, Default)]
pub struct TruecaseModel {
    entries: BTreeMap<String, (String, u64)>,
}

impl TruecaseModel {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn best(&self, folded: &str) -> Option<&str> {
        self.entries.get(folded).map(|(s, _)| s.as_str())
    }

    pub fn read<R: BufRead>(reader: R, name: &str) -> Result<TruecaseModel> {
        let mut model = TruecaseModel::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::parse(name, i + 1, "expected lower<TAB>best<TAB>count"));
            }
            let count: u64 = cols[2]
                .parse()
                .map_err(|_| Error::parse(name, i + 1, format!("bad count {:?}", cols[2])))?;
            model
                .entries
                .insert(cols[0].to_string(), (cols[1].to_string(), count));
        }
        Ok(model)
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (folded, (best, count)) in &self.entries {
            writeln!(w, "{folded}\t{best}\t{count}")?;
        }
        Ok(())
    }
}

/// Majority surface casing per token. Sentence-initial occurrences carry a
/// capitalization convention rather than evidence, so they only count for
/// words never seen elsewhere.
pub fn learn_truecaser<'a, I>(corpus: I) -> TruecaseModel
where
    I: IntoIterator<Item = &'a TokenStream>,
{
    // folded -> casing -> (count, first-seen)
    type Casings = std::collections::HashMap<String, (u64, usize)>;
    let mut interior: std::collections::HashMap<String, Casings> = Default::default();
    let mut initial: std::collections::HashMap<String, Casings> = Default::default();
    let mut tick = 0usize;
    for stream in corpus {
        for (i, tok) in stream.iter().enumerate() {
            let map = if i == 0 { &mut initial } else { &mut interior };
            let entry = map
                .entry(tok.text.to_lowercase())
                .or_default()
                .entry(tok.text.clone())
                .or_insert((0, tick));
            entry.0 += 1;
            tick += 1;
        }
    }
    let mut model = TruecaseModel::default();
    let mut keys: Vec<String> = interior.keys().chain(initial.keys()).cloned().collect();
    keys.sort();
    keys.dedup();
    for key in keys {
        let casings = interior.get(&key).or_else(|| initial.get(&key)).unwrap();
        let total: u64 = casings.values().map(|(c, _)| c).sum();
        let best = casings
            .iter()
            .min_by(|(_, (ca, fa)), (_, (cb, fb))| cb.cmp(ca).then(fa.cmp(fb)))
            .map(|(text, _)| text.clone())
            .unwrap();
        model.entries.insert(key, (best, total));
    }
    model
}

/// Lower the sentence-initial token to its majority casing; unknown
/// initial tokens and non-initial tokens are never changed.
pub fn apply_truecase(stream: &TokenStream, model: &TruecaseModel) -> TokenStream {
    let mut out = stream.clone();
    if let Some(first) = out.tokens.first_mut() {
        if let Some(best) = model.best(&first.text.to_lowercase()) {
            first.text = best.to_string();
        }
    }
    out
}

fn uppercase_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Model-free inverse heuristic: re-capitalize the sentence-initial token
/// for detokenized output.
pub fn revert_truecase(stream: &TokenStream, scheme: &MarkerScheme) -> TokenStream {
    let mut out = stream.clone();
    if let Some(first) = out.tokens.first_mut() {
        *first = Token::classified(uppercase_first(&first.text), scheme);
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FilterReport {
    pub total: usize,
    pub kept: usize,
    pub dropped_long_raw: usize,
    pub dropped_long_bpe: usize,
}

impl FilterReport {
    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "pairs\t{}", self.total)?;
        writeln!(w, "kept\t{}", self.kept)?;
        writeln!(w, "dropped_long_raw\t{}", self.dropped_long_raw)?;
        writeln!(w, "dropped_long_bpe\t{}", self.dropped_long_bpe)?;
        Ok(())
    }
}

/// Two-stage length filtering for parallel training data: first drop pairs
/// where either side exceeds `max_len_raw` tokens, then drop pairs where
/// either side exceeds `max_len_bpe` tokens after baseline BPE. Returns a
/// keep-mask and the per-stage counts. (Development and test data bypass
/// this by simply not being passed through it.)
pub fn filter_lengths(
    pairs: &[(TokenStream, TokenStream)],
    max_len_raw: usize,
    max_len_bpe: usize,
    merges: &MergeTable,
    scheme: &MarkerScheme,
) -> (Vec<bool>, FilterReport) {
    let mut keep = Vec::with_capacity(pairs.len());
    let mut report = FilterReport {
        total: pairs.len(),
        ..FilterReport::default()
    };
    for (src, tgt) in pairs {
        if src.len() > max_len_raw || tgt.len() > max_len_raw {
            report.dropped_long_raw += 1;
            keep.push(false);
            continue;
        }
        let src_bpe = apply_bpe(src, merges, scheme).len();
        let tgt_bpe = apply_bpe(tgt, merges, scheme).len();
        if src_bpe > max_len_bpe || tgt_bpe > max_len_bpe {
            report.dropped_long_bpe += 1;
            keep.push(false);
            continue;
        }
        report.kept += 1;
        keep.push(true);
    }
    (keep, report)
}

fn escape_stream(stream: &TokenStream, scheme: &MarkerScheme) -> TokenStream {
    stream
        .iter()
        .map(|t| Token::classified(escape_corpus_token(&t.text, scheme), scheme))
        .collect()
}

fn require<'a, T>(res: Option<&'a T>, what: &str) -> Result<&'a T> {
    res.ok_or_else(|| Error::Config(format!("{what} resource is required for this strategy")))
}

/// Segment one sentence under the Baseline or Segmentation strategy. The
/// input is raw tokenized text (space-separated); corpus escaping is
/// applied here, so marker-shaped substrings in the input survive the
/// round trip.
pub fn segment(
    stream: &TokenStream,
    config: &PipelineConfig,
    res: &Resources<'_>,
) -> Result<TokenStream> {
    config.validate()?;
    let scheme = &config.scheme;
    let merges = require(res.merges, "merge table")?;
    match config.strategy {
        Strategy::LemmaTag => Err(Error::Config(
            "LemmaTag strategy segments annotated input; use segment_annotated".into(),
        )),
        Strategy::BaselineBpe => {
            let mut s = stream.clone();
            if let Some(model) = res.truecase {
                s = apply_truecase(&s, model);
            }
            let s = escape_stream(&s, scheme);
            Ok(apply_bpe(&s, merges, scheme))
        }
        Strategy::Segmentation => {
            let rules = match res.rules {
                Some(r) => r,
                None => AffixRuleSet::builtin(config.language),
            };
            let mut s = stream.clone();
            if let Some(model) = res.truecase {
                s = apply_truecase(&s, model);
            }
            let mut s = escape_stream(&s, scheme);
            if config.hyphen_split {
                s = hyphen_split(&s, scheme);
            }
            s = split_suffixes_stream(&s, rules, scheme);
            if config.uses_compound() {
                let freq = require(res.freq, "frequency lexicon")?;
                s = split_compounds_stream(&s, freq, &config.compound, scheme);
            }
            Ok(apply_bpe(&s, merges, scheme))
        }
    }
}

/// Segment one annotated sentence under the LemmaTag strategy.
pub fn segment_annotated(
    sentence: &[AnalyzedToken],
    config: &PipelineConfig,
    res: &Resources<'_>,
) -> Result<TokenStream> {
    config.validate()?;
    let merges = require(res.merges, "merge table")?;
    let encoded = encode_lemmatag(sentence, &config.scheme);
    Ok(apply_bpe(&encoded, merges, &config.scheme))
}

/// Desegmented sentence plus diagnostics describing any malformed marker
/// structure that was repaired best-effort.
#[derive(Debug, Clone, Default)]
pub struct DesegmentResult {
    pub stream: TokenStream,
    pub diagnostics: Vec<String>,
}

/// Invert the segmentation cascade. In strict mode the first malformed
/// marker aborts with an error; otherwise markers are stripped best-effort
/// and diagnostics reported.
pub fn desegment(
    stream: &TokenStream,
    config: &PipelineConfig,
    res: &Resources<'_>,
    strict: bool,
) -> Result<DesegmentResult> {
    config.validate()?;
    let scheme = &config.scheme;
    let mut diags = Vec::new();

    let (mut s, d) = merge_bpe_lenient(stream, scheme);
    diags.extend(d);

    match config.strategy {
        Strategy::LemmaTag => {
            let inflex = require(res.inflex, "inflection lexicon")?;
            let decoded = decode_lemmatag(&s, inflex, scheme);
            diags.extend(decoded.diagnostics);
            s = decoded.stream;
        }
        Strategy::BaselineBpe | Strategy::Segmentation => {
            if config.strategy == Strategy::Segmentation {
                let (joined, d) = crate::compound::join_compound_lenient(&s, scheme);
                diags.extend(d);
                s = joined;
                let (joined, d) = crate::affix::join_suffixes_lenient(&s, scheme);
                diags.extend(d);
                s = joined;
                if config.hyphen_split {
                    let (joined, d) = hyphen_join_lenient(&s, scheme);
                    diags.extend(d);
                    s = joined;
                }
            }
            let mut unescaped = TokenStream::default();
            for tok in s.iter() {
                match unescape_corpus_token(&tok.text, scheme) {
                    Ok(t) => unescaped.push(Token::classified(t, scheme)),
                    Err(_) => {
                        diags.push(format!(
                            "token {:?} has a corrupted escape sequence",
                            tok.text
                        ));
                        unescaped.push(tok.clone());
                    }
                }
            }
            s = unescaped;
            if res.truecase.is_some() {
                s = revert_truecase(&s, scheme);
            }
        }
    }

    if strict {
        if let Some(d) = diags.first() {
            return Err(Error::MalformedStream(d.clone()));
        }
    }
    Ok(DesegmentResult {
        stream: s,
        diagnostics: diags,
    })
}

/// Vocabulary statistics over a corpus representation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VocabReport {
    pub sentences: u64,
    pub tokens: u64,
    pub types: u64,
    pub kind_counts: Vec<(TokenKind, u64)>,
}

impl VocabReport {
    pub fn type_token_ratio(&self) -> f64 {
        if self.tokens == 0 {
            0.0
        } else {
            self.types as f64 / self.tokens as f64
        }
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "sentences\t{}", self.sentences)?;
        writeln!(w, "tokens\t{}", self.tokens)?;
        writeln!(w, "types\t{}", self.types)?;
        writeln!(w, "type_token_ratio\t{:.6}", self.type_token_ratio())?;
        for (kind, count) in &self.kind_counts {
            writeln!(w, "kind.{}\t{}", kind.name(), count)?;
        }
        Ok(())
    }
}

pub fn vocab_stats<'a, I>(corpus: I) -> VocabReport
where
    I: IntoIterator<Item = &'a TokenStream>,
{
    let mut report = VocabReport::default();
    let mut types: std::collections::HashSet<&str> = Default::default();
    let mut kinds: BTreeMap<TokenKind, u64> = Default::default();
    let mut streams: Vec<&TokenStream> = Vec::new();
    for stream in corpus {
        streams.push(stream);
    }
    for stream in &streams {
        report.sentences += 1;
        for tok in stream.iter() {
            report.tokens += 1;
            types.insert(tok.text.as_str());
            *kinds.entry(tok.kind).or_insert(0) += 1;
        }
    }
    report.types = types.len() as u64;
    report.kind_counts = TokenKind::ALL
        .iter()
        .map(|&k| (k, kinds.get(&k).copied().unwrap_or(0)))
        .collect();
    report
}
