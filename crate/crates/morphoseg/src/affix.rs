//! Rule-based suffix detachment.
//!
//! A suffix splitter in the stemmer tradition, with two differences that
//! make it a segmenter instead of a stemmer: removed suffixes are kept as
//! detached `$$`-marked tokens, and the stem is never rewritten (no
//! lowercasing, no umlaut or ß substitution, no palatalization).
//! Concatenating the emitted tokens with markers stripped always
//! reproduces the input exactly.
//!
//! Rule tables are data: the German table mirrors the three Snowball steps
//! with their R1/R2 region constraints and s-/st-ending conditions; the two
//! Czech tables (light = case + possessive, aggressive = + comparative,
//! diminutive, augmentative, derivational) use whole-word matching with
//! per-rule length gates. All three ship embedded but can be loaded from
//! `#morphoseg-affix v1` files.

use std::io::{BufRead, Write};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::token::{MarkerScheme, Token, TokenKind, TokenStream};

pub const AFFIX_RULES_HEADER: &str = "#morphoseg-affix v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AffixLanguage {
    German,
    CzechLight,
    CzechAggressive,
}

impl AffixLanguage {
    pub fn name(self) -> &'static str {
        match self {
            AffixLanguage::German => "German",
            AffixLanguage::CzechLight => "CzechLight",
            AffixLanguage::CzechAggressive => "CzechAggressive",
        }
    }

    fn from_name(s: &str) -> Option<AffixLanguage> {
        match s {
            "German" => Some(AffixLanguage::German),
            "CzechLight" => Some(AffixLanguage::CzechLight),
            "CzechAggressive" => Some(AffixLanguage::CzechAggressive),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CzechVariant {
    Light,
    Aggressive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    R1,
    R2,
    WholeWord,
}

/// Extra condition attached to a rule block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// The character before the suffix must be a valid s-ending.
    SEnding,
    /// The character before the suffix must be a valid st-ending, itself
    /// preceded by at least 3 characters.
    StEnding,
    /// After removal, a stem ending in "niss" gives up its final s into the
    /// detached token (so `Bedürfnissen` detaches `sen`).
    NissAbsorb,
    /// The character before the suffix must not be `e`.
    NotAfterE,
    /// A preceding `ig` inside R2 (not itself after `e`) is absorbed.
    AbsorbIg,
    /// A preceding `er`/`en` inside R1 is absorbed.
    AbsorbErEn,
    /// A preceding `lich` or `ig` inside R2 is absorbed.
    AbsorbLichIg,
}

impl Condition {
    fn name(self) -> &'static str {
        match self {
            Condition::SEnding => "s-ending",
            Condition::StEnding => "st-ending",
            Condition::NissAbsorb => "niss-absorb",
            Condition::NotAfterE => "not-after-e",
            Condition::AbsorbIg => "absorb-ig",
            Condition::AbsorbErEn => "absorb-er-en",
            Condition::AbsorbLichIg => "absorb-lich-ig",
        }
    }

    fn from_name(s: &str) -> Option<Condition> {
        match s {
            "s-ending" => Some(Condition::SEnding),
            "st-ending" => Some(Condition::StEnding),
            "niss-absorb" => Some(Condition::NissAbsorb),
            "not-after-e" => Some(Condition::NotAfterE),
            "absorb-ig" => Some(Condition::AbsorbIg),
            "absorb-er-en" => Some(Condition::AbsorbErEn),
            "absorb-lich-ig" => Some(Condition::AbsorbLichIg),
            _ => None,
        }
    }
}

/// One block of suffixes sharing a pass number, region constraint and
/// condition. Within a pass, blocks run in declaration order and the first
/// suffix matching inside its region consumes the whole pass.
#[derive(Debug, Clone)]
pub struct RuleStep {
    pub pass: u32,
    pub region: Region,
    pub condition: Option<Condition>,
    /// Minimum current word length (in characters) for the block to apply.
    pub min_word_len: usize,
    /// Longest-first within the block.
    pub suffixes: Vec<Vec<char>>,
}

#[derive(Debug, Clone)]
pub struct AffixRuleSet {
    pub language: AffixLanguage,
    pub min_stem_length: usize,
    pub vowels: Vec<char>,
    pub s_ending: Vec<char>,
    pub st_ending: Vec<char>,
    /// Treat `u`/`y` between vowels as consonants for region computation.
    pub mark_consonant_uy: bool,
    pub steps: Vec<RuleStep>,
}

static GERMAN: OnceLock<AffixRuleSet> = OnceLock::new();
static CZECH_LIGHT: OnceLock<AffixRuleSet> = OnceLock::new();
static CZECH_AGGRESSIVE: OnceLock<AffixRuleSet> = OnceLock::new();

impl AffixRuleSet {
    pub fn builtin(language: AffixLanguage) -> &'static AffixRuleSet {
        let (cell, data, name) = match language {
            AffixLanguage::German => (
                &GERMAN,
                include_str!("../data/german.rules"),
                "german.rules",
            ),
            AffixLanguage::CzechLight => (
                &CZECH_LIGHT,
                include_str!("../data/czech-light.rules"),
                "czech-light.rules",
            ),
            AffixLanguage::CzechAggressive => (
                &CZECH_AGGRESSIVE,
                include_str!("../data/czech-aggressive.rules"),
                "czech-aggressive.rules",
            ),
        };
        cell.get_or_init(|| {
            AffixRuleSet::parse(data, name).expect("embedded rule table parses")
        })
    }

    pub fn read<R: BufRead>(mut reader: R, name: &str) -> Result<AffixRuleSet> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        AffixRuleSet::parse(&text, name)
    }

    pub fn parse(text: &str, name: &str) -> Result<AffixRuleSet> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(name, 1, "empty rule file"))?;
        if header.trim_end() != AFFIX_RULES_HEADER {
            return Err(Error::parse(
                name,
                1,
                format!("expected header {AFFIX_RULES_HEADER:?}"),
            ));
        }
        let mut language = None;
        let mut min_stem_length = 3usize;
        let mut vowels = Vec::new();
        let mut s_ending = Vec::new();
        let mut st_ending = Vec::new();
        let mut mark_consonant_uy = false;
        let mut steps: Vec<RuleStep> = Vec::new();

        for (idx, raw) in lines {
            let lineno = idx + 1;
            if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
                continue;
            }
            if raw.starts_with(char::is_whitespace) {
                let suffix = raw.trim();
                let step = steps.last_mut().ok_or_else(|| {
                    Error::parse(name, lineno, "suffix line before any step line")
                })?;
                if suffix.is_empty() {
                    return Err(Error::parse(name, lineno, "empty suffix"));
                }
                let chars: Vec<char> = suffix.chars().collect();
                if let Some(prev) = step.suffixes.last() {
                    if chars.len() > prev.len() {
                        return Err(Error::parse(
                            name,
                            lineno,
                            "suffixes within a step must be sorted by descending length",
                        ));
                    }
                }
                step.suffixes.push(chars);
            } else if let Some(rest) = raw.strip_prefix("step ") {
                let mut parts = rest.split_whitespace();
                let pass: u32 = parts
                    .next()
                    .and_then(|p| p.parse().ok())
                    .ok_or_else(|| Error::parse(name, lineno, "step needs a number"))?;
                let mut region = None;
                let mut condition = None;
                let mut min_word_len = 0usize;
                for attr in parts {
                    if let Some(r) = attr.strip_prefix("region=") {
                        region = Some(match r {
                            "R1" => Region::R1,
                            "R2" => Region::R2,
                            "whole" => Region::WholeWord,
                            _ => {
                                return Err(Error::parse(
                                    name,
                                    lineno,
                                    format!("unknown region {r:?}"),
                                ))
                            }
                        });
                    } else if let Some(c) = attr.strip_prefix("cond=") {
                        condition = Some(Condition::from_name(c).ok_or_else(|| {
                            Error::parse(name, lineno, format!("unknown condition {c:?}"))
                        })?);
                    } else if let Some(m) = attr.strip_prefix("minlen=") {
                        min_word_len = m.parse().map_err(|_| {
                            Error::parse(name, lineno, format!("bad minlen {m:?}"))
                        })?;
                    } else {
                        return Err(Error::parse(
                            name,
                            lineno,
                            format!("unknown step attribute {attr:?}"),
                        ));
                    }
                }
                let region = region
                    .ok_or_else(|| Error::parse(name, lineno, "step needs region=..."))?;
                steps.push(RuleStep {
                    pass,
                    region,
                    condition,
                    min_word_len,
                    suffixes: Vec::new(),
                });
            } else if let Some((key, value)) = raw.split_once('=') {
                match key {
                    "language" => {
                        language = Some(AffixLanguage::from_name(value).ok_or_else(|| {
                            Error::parse(name, lineno, format!("unknown language {value:?}"))
                        })?)
                    }
                    "min-stem" => {
                        min_stem_length = value.parse().map_err(|_| {
                            Error::parse(name, lineno, format!("bad min-stem {value:?}"))
                        })?
                    }
                    "vowels" => vowels = value.chars().collect(),
                    "s-ending" => s_ending = value.chars().collect(),
                    "st-ending" => st_ending = value.chars().collect(),
                    "mark-consonant-uy" => mark_consonant_uy = value == "true",
                    _ => {
                        return Err(Error::parse(name, lineno, format!("unknown key {key:?}")))
                    }
                }
            } else {
                return Err(Error::parse(name, lineno, format!("unparseable line {raw:?}")));
            }
        }
        let language = language
            .ok_or_else(|| Error::parse(name, 0, "missing language= line"))?;
        if steps.iter().any(|s| s.suffixes.is_empty()) {
            return Err(Error::parse(name, 0, "step without suffixes"));
        }
        Ok(AffixRuleSet {
            language,
            min_stem_length,
            vowels,
            s_ending,
            st_ending,
            mark_consonant_uy,
            steps,
        })
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{AFFIX_RULES_HEADER}")?;
        writeln!(w, "language={}", self.language.name())?;
        writeln!(w, "min-stem={}", self.min_stem_length)?;
        writeln!(w, "vowels={}", self.vowels.iter().collect::<String>())?;
        if !self.s_ending.is_empty() {
            writeln!(w, "s-ending={}", self.s_ending.iter().collect::<String>())?;
        }
        if !self.st_ending.is_empty() {
            writeln!(w, "st-ending={}", self.st_ending.iter().collect::<String>())?;
        }
        if self.mark_consonant_uy {
            writeln!(w, "mark-consonant-uy=true")?;
        }
        for step in &self.steps {
            write!(w, "step {} region={}", step.pass, match step.region {
                Region::R1 => "R1",
                Region::R2 => "R2",
                Region::WholeWord => "whole",
            })?;
            if let Some(c) = step.condition {
                write!(w, " cond={}", c.name())?;
            }
            if step.min_word_len > 0 {
                write!(w, " minlen={}", step.min_word_len)?;
            }
            writeln!(w)?;
            for s in &step.suffixes {
                writeln!(w, "\t{}", s.iter().collect::<String>())?;
            }
        }
        Ok(())
    }

    fn passes(&self) -> Vec<u32> {
        let mut passes: Vec<u32> = self.steps.iter().map(|s| s.pass).collect();
        passes.sort_unstable();
        passes.dedup();
        passes
    }
}

/// Standard stemmer regions over a word, as character indices.
///
/// `r1_start` is the position after the first non-vowel that follows a
/// vowel, adjusted so at least 3 characters precede it (never past the word
/// end); `r2_start` is computed the same way inside the unadjusted R1.
pub fn compute_regions(word: &str, vowels: &[char]) -> (usize, usize) {
    let chars: Vec<char> = word.chars().collect();
    compute_regions_chars(&chars, vowels)
}

fn compute_regions_chars(chars: &[char], vowels: &[char]) -> (usize, usize) {
    let n = chars.len();
    let is_vowel = |i: usize| vowels.contains(&chars[i]);
    let mut r1_std = n;
    for i in 1..n {
        if !is_vowel(i) && is_vowel(i - 1) {
            r1_std = i + 1;
            break;
        }
    }
    let mut r2 = n;
    let mut i = r1_std + 1;
    while i < n {
        if !is_vowel(i) && is_vowel(i - 1) {
            r2 = i + 1;
            break;
        }
        i += 1;
    }
    let r1 = r1_std.max(3).min(n);
    (r1, r2)
}

/// Lowercased copy of the word used for matching; one char per input char
/// (multi-char lowercase mappings keep the original character, so spans
/// always line up with the input).
fn fold_chars(chars: &[char]) -> Vec<char> {
    chars
        .iter()
        .map(|&c| {
            let mut it = c.to_lowercase();
            match (it.next(), it.next()) {
                (Some(l), None) => l,
                _ => c,
            }
        })
        .collect()
}

fn ends_with(fold: &[char], len: usize, suffix: &[char]) -> bool {
    suffix.len() <= len && fold[len - suffix.len()..len] == *suffix
}

struct Detach {
    /// New word length after detaching (start of the removed span).
    new_len: usize,
}

/// Evaluate one block's condition at a match. `start` is the index of the
/// suffix inside the word. Returns the detachment or None when the
/// condition blocks it (the pass is consumed either way).
fn evaluate(
    rules: &AffixRuleSet,
    cond: Option<Condition>,
    fold: &[char],
    start: usize,
    r1: usize,
    r2: usize,
) -> Option<Detach> {
    let slice_eq = |from: usize, pat: &str| -> bool {
        let pat: Vec<char> = pat.chars().collect();
        from + pat.len() <= fold.len() && fold[from..from + pat.len()] == pat[..]
    };
    match cond {
        None => Some(Detach { new_len: start }),
        Some(Condition::SEnding) => {
            (start >= 1 && rules.s_ending.contains(&fold[start - 1]))
                .then_some(Detach { new_len: start })
        }
        Some(Condition::StEnding) => {
            (start >= 4 && rules.st_ending.contains(&fold[start - 1]))
                .then_some(Detach { new_len: start })
        }
        Some(Condition::NotAfterE) => {
            (start == 0 || fold[start - 1] != 'e').then_some(Detach { new_len: start })
        }
        Some(Condition::NissAbsorb) => {
            if start >= 4 && slice_eq(start - 4, "niss") {
                Some(Detach { new_len: start - 1 })
            } else {
                Some(Detach { new_len: start })
            }
        }
        Some(Condition::AbsorbIg) => {
            if start >= 2
                && slice_eq(start - 2, "ig")
                && start - 2 >= r2
                && (start < 3 || fold[start - 3] != 'e')
            {
                Some(Detach { new_len: start - 2 })
            } else {
                Some(Detach { new_len: start })
            }
        }
        Some(Condition::AbsorbErEn) => {
            if start >= 2
                && (slice_eq(start - 2, "er") || slice_eq(start - 2, "en"))
                && start - 2 >= r1
            {
                Some(Detach { new_len: start - 2 })
            } else {
                Some(Detach { new_len: start })
            }
        }
        Some(Condition::AbsorbLichIg) => {
            if start >= 4 && slice_eq(start - 4, "lich") && start - 4 >= r2 {
                Some(Detach { new_len: start - 4 })
            } else if start >= 2 && slice_eq(start - 2, "ig") && start - 2 >= r2 {
                Some(Detach { new_len: start - 2 })
            } else {
                Some(Detach { new_len: start })
            }
        }
    }
}

/// Iteratively detach suffixes from a single token. The stem comes first,
/// detached suffixes follow in surface order, each as `$$<suffix>` with its
/// original characters; concatenating everything (markers stripped)
/// reproduces the input exactly. Unmatched tokens pass through whole.
pub fn split_suffixes(token: &str, rules: &AffixRuleSet, scheme: &MarkerScheme) -> TokenStream {
    let chars: Vec<char> = token.chars().collect();
    let fold = fold_chars(&chars);
    let region_word = if rules.mark_consonant_uy {
        let mut w = fold.clone();
        for i in 1..w.len().saturating_sub(1) {
            if (w[i] == 'u' || w[i] == 'y')
                && rules.vowels.contains(&w[i - 1])
                && rules.vowels.contains(&w[i + 1])
            {
                w[i] = w[i].to_ascii_uppercase();
            }
        }
        w
    } else {
        fold.clone()
    };
    let needs_regions = rules
        .steps
        .iter()
        .any(|s| s.region != Region::WholeWord);
    let (r1, r2) = if needs_regions {
        compute_regions_chars(&region_word, &rules.vowels)
    } else {
        (0, 0)
    };

    let mut len = chars.len();
    let mut removed: Vec<(usize, usize)> = Vec::new();

    for pass in rules.passes() {
        'pass: for step in rules.steps.iter().filter(|s| s.pass == pass) {
            if len < step.min_word_len {
                continue;
            }
            let region_start = match step.region {
                Region::R1 => r1,
                Region::R2 => r2,
                Region::WholeWord => 0,
            };
            for suffix in &step.suffixes {
                if !ends_with(&fold, len, suffix) {
                    continue;
                }
                let start = len - suffix.len();
                if start < region_start {
                    continue;
                }
                if let Some(d) = evaluate(rules, step.condition, &fold, start, r1, r2) {
                    if d.new_len >= rules.min_stem_length {
                        removed.push((d.new_len, len));
                        len = d.new_len;
                    }
                }
                break 'pass;
            }
        }
    }

    if removed.is_empty() {
        return TokenStream::new(vec![Token::classified(token, scheme)]);
    }
    let mut out = TokenStream::default();
    out.push(Token::classified(
        chars[..len].iter().collect::<String>(),
        scheme,
    ));
    for &(s, e) in removed.iter().rev() {
        let body: String = chars[s..e].iter().collect();
        out.push(Token::classified(
            format!("{}{}", scheme.suffix_marker, body),
            scheme,
        ));
    }
    out
}

/// The suffix strings the German table can detach, including the combined
/// forms produced by the absorbing conditions. This is the closed set of
/// possible `$$`-token bodies for the built-in German rules.
pub fn german_detachable_suffixes() -> &'static [&'static str] {
    &[
        "e", "em", "en", "end", "enheit", "enlich", "er", "erheit", "erlich", "ern", "es",
        "est", "heit", "ig", "igend", "igkeit", "igung", "ik", "isch", "keit", "lich",
        "lichkeit", "s", "se", "sen", "ses", "st", "ung",
    ]
}

/// Convenience wrapper selecting the built-in Czech table for a variant.
pub fn split_suffixes_czech(
    token: &str,
    variant: CzechVariant,
    scheme: &MarkerScheme,
) -> TokenStream {
    let lang = match variant {
        CzechVariant::Light => AffixLanguage::CzechLight,
        CzechVariant::Aggressive => AffixLanguage::CzechAggressive,
    };
    split_suffixes(token, AffixRuleSet::builtin(lang), scheme)
}

/// Split every Plain token of a stream; other kinds pass through.
pub fn split_suffixes_stream(
    stream: &TokenStream,
    rules: &AffixRuleSet,
    scheme: &MarkerScheme,
) -> TokenStream {
    let mut out = TokenStream::default();
    for tok in stream.iter() {
        if tok.kind == TokenKind::Plain {
            for t in split_suffixes(&tok.text, rules, scheme).tokens {
                out.push(t);
            }
        } else {
            out.push(tok.clone());
        }
    }
    out
}

/// Concatenate every maximal `stem $$a $$b ...` run. Exact inverse of
/// [`split_suffixes`] on its outputs.
pub fn join_suffixes(stream: &TokenStream, scheme: &MarkerScheme) -> Result<TokenStream> {
    let (out, diags) = join_suffixes_lenient(stream, scheme);
    if let Some(d) = diags.into_iter().next() {
        return Err(Error::MalformedStream(d));
    }
    Ok(out)
}

fn attachable(kind: TokenKind) -> bool {
    matches!(kind, TokenKind::Plain | TokenKind::LemmaToken)
}

/// Best-effort variant: a suffix part with no preceding attachable token is
/// emitted with its marker stripped, plus a diagnostic.
pub fn join_suffixes_lenient(
    stream: &TokenStream,
    scheme: &MarkerScheme,
) -> (TokenStream, Vec<String>) {
    let mut out = TokenStream::default();
    let mut diags = Vec::new();
    for tok in stream.iter() {
        if tok.kind == TokenKind::SuffixPart {
            let body = &tok.text[scheme.suffix_marker.len()..];
            match out.tokens.last_mut() {
                Some(last) if attachable(last.kind) => {
                    let merged = format!("{}{}", last.text, body);
                    *last = Token::classified(merged, scheme);
                }
                _ => {
                    diags.push(format!(
                        "suffix part {:?} has no preceding attachable token",
                        tok.text
                    ));
                    out.push(Token::classified(body, scheme));
                }
            }
        } else {
            out.push(tok.clone());
        }
    }
    (out, diags)
}
