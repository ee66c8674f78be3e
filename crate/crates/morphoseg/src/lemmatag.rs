//! The knowledge-rich codec: annotated text to alternating tag/lemma token
//! streams and back.
//!
//! Analyzer/parser tools are not run here; their output is ingested from a
//! one-token-per-line annotation format (`surface<TAB>lemma<TAB>tag`, blank
//! line between sentences, `_` for absent fields). Decoding maps each
//! (tag, lemma) pair to the most frequent surface form observed for it in
//! an inflection lexicon; unseen pairs fall back to stripping the lemma's
//! internal markup. Full generation of genuinely novel forms is available
//! by loading an externally produced paradigm file into the lexicon.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::compound::FrequencyLexicon;
use crate::error::{Error, Result};
use crate::token::{
    classify_token, escape_corpus_token, unescape_corpus_token, MarkerScheme, Token, TokenKind,
    TokenStream,
};

/// A morphological tag: concatenated angle-bracket features
/// (`<+NN><Fem><Acc><Pl><NA>`) or a single bracketed POS (`[APPR-Acc]`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MorphTag(String);

impl MorphTag {
    pub fn parse(text: &str) -> Option<MorphTag> {
        let scheme = MarkerScheme::default();
        if classify_token(text, &scheme) == TokenKind::TagToken {
            Some(MorphTag(text.to_string()))
        } else {
            None
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Nominal tags start with `<+NN>`.
    pub fn is_nominal(&self) -> bool {
        self.0.starts_with("<+NN>")
    }
}

/// One analyzed corpus token: the surface form plus, when the token was
/// analyzable, its lemma (possibly with internal markup) and tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyzedToken {
    pub surface: String,
    pub analysis: Option<(String, MorphTag)>,
}

impl AnalyzedToken {
    pub fn passthrough(surface: impl Into<String>) -> AnalyzedToken {
        AnalyzedToken {
            surface: surface.into(),
            analysis: None,
        }
    }

    pub fn analyzed(
        surface: impl Into<String>,
        lemma: impl Into<String>,
        tag: MorphTag,
    ) -> AnalyzedToken {
        AnalyzedToken {
            surface: surface.into(),
            analysis: Some((lemma.into(), tag)),
        }
    }
}

/// Parse an annotation file. `_` in both the lemma and tag column marks a
/// passthrough token; a `_` in only one of them is a format violation.
pub fn read_annotations<R: BufRead>(reader: R, name: &str) -> Result<Vec<Vec<AnalyzedToken>>> {
    let mut sentences = Vec::new();
    let mut current: Vec<AnalyzedToken> = Vec::new();
    let mut saw_any = false;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            if saw_any {
                sentences.push(std::mem::take(&mut current));
            }
            saw_any = true;
            continue;
        }
        saw_any = true;
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::parse(
                name,
                i + 1,
                format!("expected 3 tab-separated columns, got {}", cols.len()),
            ));
        }
        let (surface, lemma, tag) = (cols[0], cols[1], cols[2]);
        if surface.is_empty() || surface.chars().any(char::is_whitespace) {
            return Err(Error::parse(name, i + 1, "bad surface field"));
        }
        let token = match (lemma, tag) {
            ("_", "_") | ("", "") => AnalyzedToken::passthrough(surface),
            ("_", _) | (_, "_") => {
                return Err(Error::parse(
                    name,
                    i + 1,
                    "lemma and tag must both be present or both be `_`",
                ))
            }
            (lemma, tag) => {
                let tag = MorphTag::parse(tag).ok_or_else(|| {
                    Error::parse(name, i + 1, format!("malformed tag {tag:?}"))
                })?;
                AnalyzedToken::analyzed(surface, lemma, tag)
            }
        };
        current.push(token);
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    Ok(sentences)
}

/// Rewrite one annotated sentence into the abstract representation: each
/// analyzed token becomes a tag token followed by a lemma token (in that
/// order); passthrough tokens stay as one plain token. Lemma and
/// passthrough text is escaped on the way in.
pub fn encode_lemmatag(sentence: &[AnalyzedToken], scheme: &MarkerScheme) -> TokenStream {
    let mut out = TokenStream::default();
    for tok in sentence {
        match &tok.analysis {
            Some((lemma, tag)) => {
                out.push(Token::with_kind(tag.as_str(), TokenKind::TagToken));
                out.push(Token::with_kind(
                    escape_corpus_token(lemma, scheme),
                    TokenKind::LemmaToken,
                ));
            }
            None => {
                out.push(Token::classified(
                    escape_corpus_token(&tok.surface, scheme),
                    scheme,
                ));
            }
        }
    }
    out
}

/// (lemma, tag) to observed surface forms with frequencies, candidates
/// sorted by descending count then lexicographic surface.
#[derive(Debug, Clone, Default)]
pub struct InflectionLexicon {
    entries: HashMap<(String, String), Vec<(String, u64)>>,
}

impl InflectionLexicon {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn candidates(&self, lemma: &str, tag: &str) -> Option<&[(String, u64)]> {
        self.entries
            .get(&(lemma.to_string(), tag.to_string()))
            .map(|v| v.as_slice())
    }

    pub fn best_surface(&self, lemma: &str, tag: &str) -> Option<&str> {
        self.candidates(lemma, tag)
            .and_then(|c| c.first())
            .map(|(s, _)| s.as_str())
    }

    pub fn add(&mut self, lemma: &str, tag: &str, surface: &str, count: u64) {
        let cands = self
            .entries
            .entry((lemma.to_string(), tag.to_string()))
            .or_default();
        match cands.iter_mut().find(|(s, _)| s == surface) {
            Some((_, c)) => *c += count,
            None => cands.push((surface.to_string(), count)),
        }
    }

    fn sort_candidates(&mut self) {
        for cands in self.entries.values_mut() {
            cands.sort_by(|(sa, ca), (sb, cb)| cb.cmp(ca).then(sa.cmp(sb)));
        }
    }

    /// Merge another lexicon in (e.g. a paradigm file), summing counts.
    pub fn merge(&mut self, other: &InflectionLexicon) {
        for ((lemma, tag), cands) in &other.entries {
            for (surface, count) in cands {
                self.add(lemma, tag, surface, *count);
            }
        }
        self.sort_candidates();
    }

    /// File format: `lemma<TAB>tag<TAB>surface<TAB>count`.
    pub fn read<R: BufRead>(reader: R, name: &str) -> Result<InflectionLexicon> {
        let mut lex = InflectionLexicon::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(Error::parse(
                    name,
                    i + 1,
                    "expected lemma<TAB>tag<TAB>surface<TAB>count",
                ));
            }
            let count: u64 = cols[3]
                .parse()
                .map_err(|_| Error::parse(name, i + 1, format!("bad count {:?}", cols[3])))?;
            lex.add(cols[0], cols[1], cols[2], count);
        }
        lex.sort_candidates();
        Ok(lex)
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut keys: Vec<&(String, String)> = self.entries.keys().collect();
        keys.sort();
        for key in keys {
            for (surface, count) in &self.entries[key] {
                writeln!(w, "{}\t{}\t{}\t{}", key.0, key.1, surface, count)?;
            }
        }
        Ok(())
    }
}

/// Count every observed (lemma, tag, surface) triple. When a monolingual
/// frequency list is given, its (case-folded) surface counts replace the
/// corpus counts, so orthographic variants rank by external frequency.
pub fn build_inflection_lexicon(
    annotations: &[Vec<AnalyzedToken>],
    freq_list: Option<&FrequencyLexicon>,
) -> InflectionLexicon {
    let mut lex = InflectionLexicon::default();
    for sentence in annotations {
        for tok in sentence {
            if let Some((lemma, tag)) = &tok.analysis {
                lex.add(lemma, tag.as_str(), &tok.surface, 1);
            }
        }
    }
    if let Some(freqs) = freq_list {
        for cands in lex.entries.values_mut() {
            for (surface, count) in cands.iter_mut() {
                *count = freqs.count(&surface.to_lowercase());
            }
        }
    }
    lex.sort_candidates();
    lex
}

/// Strip every `<...>` markup group from a lemma and glue the remaining
/// segments together, lowercasing each non-initial segment's first letter.
fn strip_markup_segments(lemma: &str) -> Vec<String> {
    let mut segments = Vec::new();
    let mut current = String::new();
    let mut chars = lemma.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '<' {
            let mut group = String::new();
            let mut closed = false;
            for g in chars.by_ref() {
                if g == '>' {
                    closed = true;
                    break;
                }
                group.push(g);
            }
            if closed {
                if !current.is_empty() {
                    segments.push(std::mem::take(&mut current));
                }
            } else {
                // unterminated '<' is ordinary text
                current.push('<');
                current.push_str(&group);
            }
        } else {
            current.push(c);
        }
    }
    if !current.is_empty() {
        segments.push(current);
    }
    segments
}

fn lowercase_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn uppercase_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Fallback re-inflection for a (lemma, tag) pair the lexicon has never
/// seen: markup-stripped segments, non-initial segments lowercased,
/// capitalized iff the tag is nominal.
pub fn fallback_inflect(lemma: &str, tag: &MorphTag) -> Option<String> {
    let segments = strip_markup_segments(lemma);
    let mut it = segments.into_iter();
    let mut out = it.next()?;
    for seg in it {
        out.push_str(&lowercase_first(&seg));
    }
    if tag.is_nominal() {
        out = uppercase_first(&out);
    }
    Some(out)
}

/// Decoded stream plus per-sentence diagnostics (orphans, unknown pairs
/// resolved by fallback are not diagnostics).
#[derive(Debug, Clone, Default)]
pub struct DecodeResult {
    pub stream: TokenStream,
    pub diagnostics: Vec<String>,
}

/// Map each tag+lemma pair back to a surface form: the top-ranked lexicon
/// candidate, or the markup-stripping fallback for unseen pairs. Orphan
/// tags and orphan lemmas are dropped with a diagnostic; plain tokens pass
/// through (unescaped).
pub fn decode_lemmatag(
    stream: &TokenStream,
    lexicon: &InflectionLexicon,
    scheme: &MarkerScheme,
) -> DecodeResult {
    let mut result = DecodeResult::default();
    let toks = &stream.tokens;
    let mut i = 0;
    while i < toks.len() {
        let tok = &toks[i];
        match tok.kind {
            TokenKind::TagToken => {
                let next = toks.get(i + 1);
                match next {
                    Some(lemma_tok) if lemma_tok.kind != TokenKind::TagToken => {
                        let lemma = match unescape_corpus_token(&lemma_tok.text, scheme) {
                            Ok(l) => l,
                            Err(_) => {
                                result.diagnostics.push(format!(
                                    "lemma {:?} has a corrupted escape sequence",
                                    lemma_tok.text
                                ));
                                lemma_tok.text.clone()
                            }
                        };
                        let tag = MorphTag(tok.text.clone());
                        let surface = lexicon
                            .best_surface(&lemma, tag.as_str())
                            .map(str::to_string)
                            .or_else(|| fallback_inflect(&lemma, &tag));
                        match surface {
                            Some(s) if !s.is_empty() => {
                                result.stream.push(Token::classified(s, scheme))
                            }
                            _ => result.diagnostics.push(format!(
                                "pair ({:?}, {:?}) produced no surface form",
                                lemma,
                                tag.as_str()
                            )),
                        }
                        i += 2;
                    }
                    _ => {
                        result
                            .diagnostics
                            .push(format!("orphan tag {:?} dropped", tok.text));
                        i += 1;
                    }
                }
            }
            TokenKind::LemmaToken => {
                result
                    .diagnostics
                    .push(format!("orphan lemma {:?} dropped", tok.text));
                i += 1;
            }
            _ => {
                match unescape_corpus_token(&tok.text, scheme) {
                    Ok(t) => result.stream.push(Token::classified(t, scheme)),
                    Err(_) => {
                        result.diagnostics.push(format!(
                            "token {:?} has a corrupted escape sequence",
                            tok.text
                        ));
                        result.stream.push(tok.clone());
                    }
                }
                i += 1;
            }
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scheme() -> MarkerScheme {
        MarkerScheme::default()
    }

    fn anno(text: &str) -> Vec<Vec<AnalyzedToken>> {
        read_annotations(text.as_bytes(), "mem").unwrap()
    }

    #[test]
    fn reads_annotation_rows() {
        let sents = anno("Grenzen\tGrenze\t<+NN><Fem><Acc><Pl><NA>\n2019\t_\t_\n");
        assert_eq!(sents.len(), 1);
        assert_eq!(sents[0].len(), 2);
        assert_eq!(sents[0][0].surface, "Grenzen");
        assert_eq!(
            sents[0][0].analysis.as_ref().unwrap().0,
            "Grenze".to_string()
        );
        assert!(sents[0][1].analysis.is_none());
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(read_annotations(&b"two\tcolumns\n"[..], "mem").is_err());
        assert!(read_annotations(&b"x\tlemma\tnot-a-tag\n"[..], "mem").is_err());
        assert!(read_annotations(&b"x\t_\t<+NN>\n"[..], "mem").is_err());
    }

    #[test]
    fn blank_lines_separate_sentences() {
        let sents = anno("a\t_\t_\n\nb\t_\t_\n");
        assert_eq!(sents.len(), 2);
    }

    #[test]
    fn encode_emits_tag_then_lemma() {
        let s = scheme();
        let sent = vec![
            AnalyzedToken::analyzed(
                "will",
                "wollen",
                MorphTag::parse("<+V><1><Sg><Pres><Ind>").unwrap(),
            ),
            AnalyzedToken::passthrough(","),
            AnalyzedToken::analyzed(
                "großen",
                "groß<Pos>",
                MorphTag::parse("<+ADJ><NoGend><Dat><Pl><St>").unwrap(),
            ),
        ];
        let out = encode_lemmatag(&sent, &s);
        assert_eq!(
            out.to_line(),
            "<+V><1><Sg><Pres><Ind> wollen , <+ADJ><NoGend><Dat><Pl><St> groß<Pos>"
        );
        assert_eq!(out.tokens[0].kind, TokenKind::TagToken);
        assert_eq!(out.tokens[1].kind, TokenKind::LemmaToken);
        assert_eq!(out.tokens[2].kind, TokenKind::Plain);
    }

    #[test]
    fn encode_doubles_analyzed_tokens() {
        let s = scheme();
        let sents = anno("Grenzen\tGrenze\t<+NN><Fem><Acc><Pl><NA>\n2019\t_\t_\n");
        let out = encode_lemmatag(&sents[0], &s);
        assert_eq!(out.len(), 2 + 1);
    }

    #[test]
    fn lexicon_orders_candidates() {
        let mut lex = InflectionLexicon::default();
        lex.add("Grenze", "<+NN>", "Grenzen", 5);
        lex.add("Grenze", "<+NN>", "Grenzn", 5);
        lex.add("Grenze", "<+NN>", "Grenzen", 2);
        lex.sort_candidates();
        // 7 vs 5; lexicographic when counts tie
        assert_eq!(lex.best_surface("Grenze", "<+NN>"), Some("Grenzen"));
        lex.add("x", "<+V>", "b", 3);
        lex.add("x", "<+V>", "a", 3);
        lex.sort_candidates();
        assert_eq!(lex.best_surface("x", "<+V>"), Some("a"));
    }

    #[test]
    fn decode_uses_lexicon() {
        let s = scheme();
        let mut lex = InflectionLexicon::default();
        lex.add("Grenze", "<+NN><Fem><Acc><Pl><NA>", "Grenzen", 7);
        lex.add("verdoppeln", "<+V><Inf>", "verdoppeln", 3);
        lex.sort_candidates();
        let stream = TokenStream::parse(
            "<+NN><Fem><Acc><Pl><NA> Grenze <+V><Inf> verdoppeln",
            &s,
        );
        let res = decode_lemmatag(&stream, &lex, &s);
        assert_eq!(res.stream.to_line(), "Grenzen verdoppeln");
        assert!(res.diagnostics.is_empty());
    }

    #[test]
    fn decode_fallback_strips_markup() {
        let s = scheme();
        let lex = InflectionLexicon::default();
        let stream = TokenStream::parse(
            "<+NN><Neut><Gen><Sg><NA> Wertpapier<NN>Konto",
            &s,
        );
        let res = decode_lemmatag(&stream, &lex, &s);
        assert_eq!(res.stream.to_line(), "Wertpapierkonto");
        assert!(res.diagnostics.is_empty());
    }

    #[test]
    fn fallback_handles_derivational_markup() {
        let tag = MorphTag::parse("<+NN><Fem><Gen><Pl>").unwrap();
        assert_eq!(
            fallback_inflect("Planet<NN>bewegen<V>ung<SUFF>", &tag).unwrap(),
            "Planetbewegenung"
        );
        let vtag = MorphTag::parse("<+V><Inf>").unwrap();
        assert_eq!(fallback_inflect("verdoppeln", &vtag).unwrap(), "verdoppeln");
        assert_eq!(
            fallback_inflect("die<Def>", &MorphTag::parse("<+ART><Fem>").unwrap()).unwrap(),
            "die"
        );
    }

    #[test]
    fn decode_drops_orphans_with_diagnostics() {
        let s = scheme();
        let lex = InflectionLexicon::default();
        let stream = TokenStream::parse("<+NN><Fem> <+V><Inf> wollen die<Def>", &s);
        let res = decode_lemmatag(&stream, &lex, &s);
        // first tag is orphaned by the following tag; trailing lemma is orphaned
        assert_eq!(res.stream.to_line(), "wollen");
        assert_eq!(res.diagnostics.len(), 2);
    }

    #[test]
    fn corpus_closure_round_trip() {
        let s = scheme();
        let text = "\
Grenzen\tGrenze\t<+NN><Fem><Acc><Pl><NA>
will\twollen\t<+V><1><Sg><Pres><Ind>
,\t_\t_
großen\tgroß<Pos>\t<+ADJ><NoGend><Dat><Pl><St>

Raubfischen\tRaub<NN>Fisch\t<+NN><Masc><Dat><Pl><NA>
für\tfür\t[APPR-Acc]
";
        let sents = anno(text);
        let lex = build_inflection_lexicon(&sents, None);
        for sent in &sents {
            let encoded = encode_lemmatag(sent, &s);
            let res = decode_lemmatag(&encoded, &lex, &s);
            let surface: Vec<&str> = sent.iter().map(|t| t.surface.as_str()).collect();
            assert_eq!(res.stream.to_line(), surface.join(" "));
            assert!(res.diagnostics.is_empty());
        }
    }

    #[test]
    fn freq_list_overrides_corpus_counts() {
        let mut sents = Vec::new();
        // corpus prefers "Fotografie" 2:1
        for _ in 0..2 {
            sents.push(vec![AnalyzedToken::analyzed(
                "Fotografie",
                "Fotografie",
                MorphTag::parse("<+NN><Fem><Nom><Sg><NA>").unwrap(),
            )]);
        }
        sents.push(vec![AnalyzedToken::analyzed(
            "Photographie",
            "Fotografie",
            MorphTag::parse("<+NN><Fem><Nom><Sg><NA>").unwrap(),
        )]);
        let mut freqs = FrequencyLexicon::default();
        freqs.insert("photographie".into(), 100, "Photographie".into());
        freqs.insert("fotografie".into(), 10, "Fotografie".into());
        let lex = build_inflection_lexicon(&sents, Some(&freqs));
        assert_eq!(
            lex.best_surface("Fotografie", "<+NN><Fem><Nom><Sg><NA>"),
            Some("Photographie")
        );
    }

    #[test]
    fn lexicon_file_round_trip() {
        let mut lex = InflectionLexicon::default();
        lex.add("Grenze", "<+NN><Fem><Acc><Pl><NA>", "Grenzen", 7);
        lex.add("wollen", "<+V><1><Sg><Pres><Ind>", "will", 40);
        lex.sort_candidates();
        let mut buf = Vec::new();
        lex.write(&mut buf).unwrap();
        let loaded = InflectionLexicon::read(&buf[..], "mem").unwrap();
        assert_eq!(
            loaded.best_surface("Grenze", "<+NN><Fem><Acc><Pl><NA>"),
            Some("Grenzen")
        );
        assert!(InflectionLexicon::read(&b"a\tb\tc\n"[..], "mem").is_err());
    }
}
