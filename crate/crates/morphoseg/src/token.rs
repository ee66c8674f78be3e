//! Token data model shared by every stage of the cascade.
//!
//! The textual marker conventions live here: detached suffixes carry a `$$`
//! prefix, compound separators are standalone `@@` (or `@s@`-style filler)
//! tokens, case marks are `#U`/`#L`, hyphen splits use `@-@`, and BPE
//! continuation pieces end in `##`. Because every marker is recognizable
//! from the token text alone, a stream can be re-classified after a round
//! trip through plain text (or through an NMT decoder).
//!
//! Corpus text is untrusted: a raw token may itself contain marker-shaped
//! substrings. [`escape_corpus_token`] rewrites those occurrences into a
//! reserved escape alphabet so that, downstream, marker strings only ever
//! mean markers. [`unescape_corpus_token`] is its exact inverse.

use crate::error::{Error, Result};

/// What a token is, read off its text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TokenKind {
    Plain,
    /// `$$en` — a detached inflectional suffix.
    SuffixPart,
    /// `@@` — standalone separator between compound parts.
    CompoundSeparator,
    /// `#U` — re-merged compound must be uppercased.
    CaseMarkUpper,
    /// `#L` — re-merged compound must be lowercased.
    CaseMarkLower,
    /// `@es@` — transitional element between compound parts (1–4 letters).
    Filler,
    /// `@-@` — standalone hyphen from hyphen splitting.
    HyphenSeparator,
    /// A plain piece ending in `##`, to be merged with its right neighbour.
    BpeContinuation,
    /// `<+NN><Fem><Nom><Sg><NA>` or `[APPR-Acc]` — a morphological tag.
    TagToken,
    /// A lemma with internal markup such as `Raub<NN>Fisch`.
    LemmaToken,
}

impl TokenKind {
    pub const ALL: [TokenKind; 10] = [
        TokenKind::Plain,
        TokenKind::SuffixPart,
        TokenKind::CompoundSeparator,
        TokenKind::CaseMarkUpper,
        TokenKind::CaseMarkLower,
        TokenKind::Filler,
        TokenKind::HyphenSeparator,
        TokenKind::BpeContinuation,
        TokenKind::TagToken,
        TokenKind::LemmaToken,
    ];

    /// Stable lowercase name, used in reports.
    pub fn name(self) -> &'static str {
        match self {
            TokenKind::Plain => "plain",
            TokenKind::SuffixPart => "suffix",
            TokenKind::CompoundSeparator => "compound-sep",
            TokenKind::CaseMarkUpper => "case-upper",
            TokenKind::CaseMarkLower => "case-lower",
            TokenKind::Filler => "filler",
            TokenKind::HyphenSeparator => "hyphen-sep",
            TokenKind::BpeContinuation => "bpe-continuation",
            TokenKind::TagToken => "tag",
            TokenKind::LemmaToken => "lemma",
        }
    }
}

/// The marker strings used by a pipeline. Defaults match the conventions
/// used throughout the shipped fixtures; all operations take the scheme as
/// a parameter so alternative alphabets remain possible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkerScheme {
    pub suffix_marker: String,
    pub compound_sep: String,
    pub bpe_marker: String,
    pub case_upper: String,
    pub case_lower: String,
    pub hyphen_token: String,
    /// Reserved character introducing an escape sequence.
    pub escape_prefix: char,
    /// Characters that trigger escaping, sorted; the digit code of a quoted
    /// character is its index in this list.
    triggers: Vec<char>,
}

pub const DEFAULT_ESCAPE_PREFIX: char = '\u{FFF0}';

impl Default for MarkerScheme {
    fn default() -> Self {
        MarkerScheme::new("$$", "@@", "##", "#U", "#L", "@-@", DEFAULT_ESCAPE_PREFIX)
            .expect("default scheme is valid")
    }
}

impl MarkerScheme {
    pub fn new(
        suffix_marker: &str,
        compound_sep: &str,
        bpe_marker: &str,
        case_upper: &str,
        case_lower: &str,
        hyphen_token: &str,
        escape_prefix: char,
    ) -> Result<Self> {
        let markers = [
            suffix_marker,
            compound_sep,
            bpe_marker,
            case_upper,
            case_lower,
            hyphen_token,
        ];
        for m in &markers {
            if m.is_empty() {
                return Err(Error::InvalidScheme("empty marker string".into()));
            }
            if m.chars().any(char::is_whitespace) {
                return Err(Error::InvalidScheme(format!("marker {m:?} contains whitespace")));
            }
            if m.contains(escape_prefix) {
                return Err(Error::InvalidScheme(format!(
                    "marker {m:?} contains the escape prefix"
                )));
            }
        }
        for i in 0..markers.len() {
            for j in i + 1..markers.len() {
                if markers[i] == markers[j] {
                    return Err(Error::InvalidScheme(format!(
                        "markers must be pairwise distinct, {:?} repeats",
                        markers[i]
                    )));
                }
            }
        }
        // Trigger set: first char of every marker, the filler delimiter and
        // the escape prefix itself. Digit codes stand in for quoted chars in
        // escaped text, so digit-initial markers would be ambiguous.
        let mut triggers: Vec<char> = markers
            .iter()
            .map(|m| m.chars().next().unwrap())
            .chain([FILLER_DELIM, escape_prefix])
            .collect();
        triggers.sort_unstable();
        triggers.dedup();
        if triggers.iter().any(|c| c.is_ascii_digit()) {
            return Err(Error::InvalidScheme(
                "marker strings must not start with an ASCII digit".into(),
            ));
        }
        if triggers.len() > 10 {
            return Err(Error::InvalidScheme(
                "too many distinct marker-initial characters (max 10)".into(),
            ));
        }
        Ok(MarkerScheme {
            suffix_marker: suffix_marker.into(),
            compound_sep: compound_sep.into(),
            bpe_marker: bpe_marker.into(),
            case_upper: case_upper.into(),
            case_lower: case_lower.into(),
            hyphen_token: hyphen_token.into(),
            escape_prefix,
            triggers,
        })
    }

    fn code_of(&self, c: char) -> Option<char> {
        self.triggers
            .iter()
            .position(|&t| t == c)
            .map(|i| (b'0' + i as u8) as char)
    }

    fn char_of(&self, code: char) -> Option<char> {
        let idx = (code as u32).checked_sub('0' as u32)? as usize;
        self.triggers.get(idx).copied()
    }
}

/// Delimiter of filler tokens (`@es@`). Fixed by the token grammar.
pub const FILLER_DELIM: char = '@';

/// Maximum number of letters inside a filler token.
pub const FILLER_MAX_LEN: usize = 4;

/// True if `chars[start..]` begins a `@letters@` filler shape.
fn filler_starts_at(chars: &[char], start: usize) -> bool {
    if chars.get(start) != Some(&FILLER_DELIM) {
        return false;
    }
    for (letters, &c) in chars.iter().skip(start + 1).enumerate() {
        if c == FILLER_DELIM {
            return letters >= 1;
        }
        if !c.is_alphabetic() || letters >= FILLER_MAX_LEN {
            return false;
        }
    }
    false
}

/// True if the whole token is a `@letters@` filler (1–4 letters).
pub fn is_filler_token(text: &str) -> bool {
    let chars: Vec<char> = text.chars().collect();
    chars.len() >= 3
        && chars.len() <= FILLER_MAX_LEN + 2
        && chars[0] == FILLER_DELIM
        && chars[chars.len() - 1] == FILLER_DELIM
        && chars[1..chars.len() - 1]
            .iter()
            .all(|&c| c != FILLER_DELIM && c.is_alphabetic())
}

fn starts_with_at(chars: &[char], start: usize, needle: &str) -> bool {
    needle
        .chars()
        .enumerate()
        .all(|(i, nc)| chars.get(start + i) == Some(&nc))
}

/// True if any marker occurrence (or filler shape, or the escape prefix)
/// begins at `start`.
fn trigger_at(chars: &[char], start: usize, scheme: &MarkerScheme) -> bool {
    if chars[start] == scheme.escape_prefix {
        return true;
    }
    for m in [
        &scheme.suffix_marker,
        &scheme.compound_sep,
        &scheme.bpe_marker,
        &scheme.case_upper,
        &scheme.case_lower,
        &scheme.hyphen_token,
    ] {
        if starts_with_at(chars, start, m) {
            return true;
        }
    }
    filler_starts_at(chars, start)
}

/// Rewrites every character that starts a marker occurrence into the escape
/// alphabet, so the result contains no marker string at all. Total; returns
/// the input unchanged when nothing needs quoting.
pub fn escape_corpus_token(raw: &str, scheme: &MarkerScheme) -> String {
    let chars: Vec<char> = raw.chars().collect();
    if !(0..chars.len()).any(|i| trigger_at(&chars, i, scheme)) {
        return raw.to_string();
    }
    let mut out = String::with_capacity(raw.len() + 8);
    for i in 0..chars.len() {
        if trigger_at(&chars, i, scheme) {
            out.push(scheme.escape_prefix);
            out.push(scheme.code_of(chars[i]).expect("trigger char has a code"));
        } else {
            out.push(chars[i]);
        }
    }
    out
}

/// Exact inverse of [`escape_corpus_token`].
pub fn unescape_corpus_token(escaped: &str, scheme: &MarkerScheme) -> Result<String> {
    let mut out = String::with_capacity(escaped.len());
    let mut it = escaped.chars();
    while let Some(c) = it.next() {
        if c == scheme.escape_prefix {
            let code = it
                .next()
                .ok_or_else(|| Error::MalformedEscape(escaped.to_string()))?;
            let orig = scheme
                .char_of(code)
                .ok_or_else(|| Error::MalformedEscape(escaped.to_string()))?;
            out.push(orig);
        } else {
            out.push(c);
        }
    }
    Ok(out)
}

fn matches_tag_grammar(text: &str) -> bool {
    let chars: Vec<char> = text.chars().collect();
    if chars.is_empty() {
        return false;
    }
    if chars[0] == '[' {
        // exactly one [...] group with a non-empty body
        return chars.len() >= 3
            && chars[chars.len() - 1] == ']'
            && chars[1..chars.len() - 1]
                .iter()
                .all(|&c| c != '[' && c != ']');
    }
    if chars[0] != '<' {
        return false;
    }
    // one or more <...> groups, each with a non-empty body
    let mut i = 0;
    while i < chars.len() {
        if chars[i] != '<' {
            return false;
        }
        let mut j = i + 1;
        while j < chars.len() && chars[j] != '>' && chars[j] != '<' {
            j += 1;
        }
        if j >= chars.len() || chars[j] != '>' || j == i + 1 {
            return false;
        }
        i = j + 1;
    }
    true
}

/// True if the text contains at least one complete `<...>` markup group.
fn has_inner_markup(text: &str) -> bool {
    let mut open = None;
    for (i, c) in text.char_indices() {
        match c {
            '<' => open = Some(i),
            '>' => {
                if let Some(o) = open {
                    if i > o + 1 {
                        return true;
                    }
                }
                open = None;
            }
            _ => {}
        }
    }
    false
}

/// Deterministic classification of a token by its text. Unknown shapes are
/// Plain; every marker emitted by the splitters classifies back to its kind.
pub fn classify_token(text: &str, scheme: &MarkerScheme) -> TokenKind {
    if text.is_empty() {
        return TokenKind::Plain;
    }
    if matches_tag_grammar(text) {
        return TokenKind::TagToken;
    }
    if text == scheme.compound_sep {
        return TokenKind::CompoundSeparator;
    }
    if text == scheme.hyphen_token {
        return TokenKind::HyphenSeparator;
    }
    if text == scheme.case_upper {
        return TokenKind::CaseMarkUpper;
    }
    if text == scheme.case_lower {
        return TokenKind::CaseMarkLower;
    }
    if text.starts_with(&scheme.suffix_marker) && text.len() > scheme.suffix_marker.len() {
        return TokenKind::SuffixPart;
    }
    if is_filler_token(text) {
        return TokenKind::Filler;
    }
    if text.ends_with(&scheme.bpe_marker) {
        return TokenKind::BpeContinuation;
    }
    if has_inner_markup(text) {
        return TokenKind::LemmaToken;
    }
    TokenKind::Plain
}

/// One token: its text plus its (classified or assigned) kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub kind: TokenKind,
}

impl Token {
    /// Build a token by classifying its text.
    pub fn classified(text: impl Into<String>, scheme: &MarkerScheme) -> Token {
        let text = text.into();
        let kind = classify_token(&text, scheme);
        Token { text, kind }
    }

    /// Build a token with an explicitly assigned kind (used by the lemma-tag
    /// codec, where plain-looking lemmas still carry the Lemma kind).
    pub fn with_kind(text: impl Into<String>, kind: TokenKind) -> Token {
        Token {
            text: text.into(),
            kind,
        }
    }
}

/// A sentence as an ordered token sequence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenStream {
    pub tokens: Vec<Token>,
}

impl TokenStream {
    pub fn new(tokens: Vec<Token>) -> TokenStream {
        TokenStream { tokens }
    }

    /// Parse a space-separated line, classifying each token.
    pub fn parse(line: &str, scheme: &MarkerScheme) -> TokenStream {
        TokenStream {
            tokens: line
                .split_whitespace()
                .map(|t| Token::classified(t, scheme))
                .collect(),
        }
    }

    /// Serialize as a single-space-separated line, no trailing whitespace.
    pub fn to_line(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&t.text);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Token> {
        self.tokens.iter()
    }

    pub fn push(&mut self, token: Token) {
        self.tokens.push(token);
    }
}

impl FromIterator<Token> for TokenStream {
    fn from_iter<I: IntoIterator<Item = Token>>(iter: I) -> Self {
        TokenStream {
            tokens: iter.into_iter().collect(),
        }
    }
}
