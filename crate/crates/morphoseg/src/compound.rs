//! Frequency-driven compound splitting and its exact inverse.
//!
//! A token is decomposed into known parts (by case-folded corpus
//! frequency), optionally joined by filler elements; candidate
//! decompositions are scored by the geometric mean of the parts' capped
//! frequencies and the best one wins against the unsplit word. A winning
//! split emits a case mark (`#U`/`#L`) recording the original first-letter
//! case, the parts in their canonical lexicon casing, and standalone
//! separator/filler tokens, e.g. `#U Jahr @es@ Wechsel`.
//!
//! Because canonical-casing substitution could break the byte-exact round
//! trip on unusually cased input, the splitter re-joins its own output and
//! refuses the split if the input does not come back identically.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use num_bigint::BigUint;

use crate::affix::german_detachable_suffixes;
use crate::error::{Error, Result};
use crate::token::{MarkerScheme, Token, TokenKind, TokenStream, FILLER_MAX_LEN};

/// Case-folded word frequencies with the most frequent surface casing.
#[derive(Debug, Clone, Default)]
pub struct FrequencyLexicon {
    entries: std::collections::BTreeMap<String, (u64, String)>,
}

impl FrequencyLexicon {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Count and canonical casing for a case-folded key.
    pub fn lookup(&self, folded: &str) -> Option<(u64, &str)> {
        self.entries.get(folded).map(|(c, s)| (*c, s.as_str()))
    }

    pub fn count(&self, folded: &str) -> u64 {
        self.entries.get(folded).map_or(0, |(c, _)| *c)
    }

    pub fn insert(&mut self, folded: String, count: u64, canonical: String) {
        self.entries.insert(folded, (count, canonical));
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &(u64, String))> {
        self.entries.iter()
    }

    pub fn read<R: BufRead>(reader: R, name: &str) -> Result<FrequencyLexicon> {
        let mut lex = FrequencyLexicon::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split('\t');
            let (word, count, canonical) = match (cols.next(), cols.next(), cols.next(), cols.next())
            {
                (Some(w), Some(c), Some(k), None) => (w, c, k),
                _ => {
                    return Err(Error::parse(
                        name,
                        i + 1,
                        "expected word<TAB>count<TAB>canonical_casing",
                    ))
                }
            };
            let count: u64 = count
                .parse()
                .map_err(|_| Error::parse(name, i + 1, format!("bad count {count:?}")))?;
            lex.entries
                .insert(word.to_string(), (count, canonical.to_string()));
        }
        Ok(lex)
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (word, (count, canonical)) in &self.entries {
            writeln!(w, "{word}\t{count}\t{canonical}")?;
        }
        Ok(())
    }
}

/// Count Plain tokens of a corpus, case-folded, recording the most frequent
/// surface casing (ties broken by first appearance in the corpus).
pub fn build_frequency_lexicon<'a, I>(corpus: I) -> FrequencyLexicon
where
    I: IntoIterator<Item = &'a TokenStream>,
{
    // folded -> casing -> (count, first-seen index)
    let mut raw: HashMap<String, HashMap<String, (u64, usize)>> = HashMap::new();
    let mut tick = 0usize;
    for stream in corpus {
        for tok in stream.iter() {
            if tok.kind != TokenKind::Plain {
                continue;
            }
            let folded = tok.text.to_lowercase();
            let by_casing = raw.entry(folded).or_default();
            let entry = by_casing.entry(tok.text.clone()).or_insert((0, tick));
            entry.0 += 1;
            tick += 1;
        }
    }
    let mut lex = FrequencyLexicon::default();
    for (folded, casings) in raw {
        let total: u64 = casings.values().map(|(c, _)| c).sum();
        let canonical = casings
            .into_iter()
            .min_by(|(_, (ca, fa)), (_, (cb, fb))| cb.cmp(ca).then(fa.cmp(fb)))
            .map(|(text, _)| text)
            .unwrap();
        lex.entries.insert(folded, (total, canonical));
    }
    lex
}

#[derive(Debug, Clone)]
pub struct CompoundConfig {
    /// Minimum part length in characters.
    pub min_part_size: usize,
    /// Minimum (capped) corpus frequency for a part.
    pub min_part_count: u64,
    /// Frequencies are capped to this value inside the score.
    pub max_part_count: u64,
    /// Allowed transitional elements between parts, each 1–4 letters.
    pub fillers: Vec<String>,
    pub max_parts: usize,
}

impl Default for CompoundConfig {
    fn default() -> Self {
        CompoundConfig {
            min_part_size: 4,
            min_part_count: 2,
            max_part_count: 999_999_999,
            fillers: german_fillers(),
            max_parts: 4,
        }
    }
}

/// The German filler inventory: the standard linking "s"/"es" plus "zu",
/// the detachable suffixes, and each suffix followed by "s" — restricted to
/// what fits the `@letters@` filler grammar (at most 4 letters).
pub fn german_fillers() -> Vec<String> {
    let mut set: Vec<String> = Vec::new();
    let mut add = |f: String| {
        if !f.is_empty() && f.chars().count() <= FILLER_MAX_LEN && !set.contains(&f) {
            set.push(f);
        }
    };
    add("s".into());
    add("es".into());
    add("zu".into());
    for s in german_detachable_suffixes() {
        add(s.to_string());
        add(format!("{s}s"));
    }
    set.sort();
    set
}

#[derive(Debug, Clone, PartialEq)]
struct Candidate {
    /// (start, end) char spans of the parts.
    parts: Vec<(usize, usize)>,
    /// Filler span between part i and i+1, if any.
    fillers: Vec<Option<(usize, usize)>>,
    /// Capped frequency of each part.
    counts: Vec<u64>,
}

impl Candidate {
    /// a better than b under: geometric mean, then fewer parts, then
    /// leftmost-longest parts, then earlier split positions.
    fn better_than(&self, other: &Candidate) -> bool {
        match geo_cmp(&self.counts, &other.counts) {
            std::cmp::Ordering::Greater => return true,
            std::cmp::Ordering::Less => return false,
            std::cmp::Ordering::Equal => {}
        }
        if self.parts.len() != other.parts.len() {
            return self.parts.len() < other.parts.len();
        }
        for (a, b) in self.parts.iter().zip(&other.parts) {
            let (la, lb) = (a.1 - a.0, b.1 - b.0);
            if la != lb {
                return la > lb;
            }
        }
        self.parts < other.parts
    }
}

/// Compare geometric means exactly: (∏a)^(1/|a|) vs (∏b)^(1/|b|) by
/// cross-exponentiation in big integers.
fn geo_cmp(a: &[u64], b: &[u64]) -> std::cmp::Ordering {
    let prod = |xs: &[u64]| -> BigUint {
        let mut p = BigUint::from(1u32);
        for &x in xs {
            p *= BigUint::from(x);
        }
        p
    };
    let lhs = prod(a).pow(b.len() as u32);
    let rhs = prod(b).pow(a.len() as u32);
    lhs.cmp(&rhs)
}

/// Split one token into known parts by highest geometric mean of part
/// frequencies. The unsplit word competes as its own 1-part decomposition;
/// with no valid multi-part winner the token is returned unchanged (no case
/// mark). A winning split is verified to re-join to the input exactly,
/// otherwise it is discarded.
pub fn split_compound(
    token: &str,
    lexicon: &FrequencyLexicon,
    config: &CompoundConfig,
    scheme: &MarkerScheme,
) -> TokenStream {
    let chars: Vec<char> = token.chars().collect();
    let n = chars.len();
    let min_part_size = config.min_part_size.max(1);
    let unchanged = || TokenStream::new(vec![Token::classified(token, scheme)]);
    if n < 2 * min_part_size {
        return unchanged();
    }

    let fold: String = token.to_lowercase();
    let unsplit_count = lexicon.count(&fold).min(config.max_part_count);
    let mut best = Candidate {
        parts: vec![(0, n)],
        fillers: vec![],
        counts: vec![unsplit_count],
    };

    let cap = |c: u64| c.min(config.max_part_count);
    let part_count = |s: usize, e: usize| -> Option<u64> {
        let folded: String = chars[s..e].iter().collect::<String>().to_lowercase();
        let c = cap(lexicon.count(&folded));
        (c >= config.min_part_count && c > 0).then_some(c)
    };

    // Depth-first over part boundaries; fillers may sit between parts.
    let mut stack: Vec<(usize, Candidate)> = vec![(
        0,
        Candidate {
            parts: vec![],
            fillers: vec![],
            counts: vec![],
        },
    )];
    while let Some((pos, cand)) = stack.pop() {
        if cand.parts.len() >= config.max_parts {
            continue;
        }
        for end in (pos + min_part_size)..=n {
            let Some(c) = part_count(pos, end) else { continue };
            let mut with_part = cand.clone();
            with_part.parts.push((pos, end));
            with_part.counts.push(c);
            if end == n {
                if with_part.parts.len() >= 2 && with_part.better_than(&best) {
                    best = with_part.clone();
                }
                continue;
            }
            // next part directly adjacent
            let mut direct = with_part.clone();
            direct.fillers.push(None);
            stack.push((end, direct));
            // or after a filler element
            for f in &config.fillers {
                let flen = f.chars().count();
                if end + flen < n
                    && chars[end..end + flen].iter().collect::<String>() == *f
                {
                    let mut with_filler = with_part.clone();
                    with_filler.fillers.push(Some((end, end + flen)));
                    stack.push((end + flen, with_filler));
                }
            }
        }
    }

    if best.parts.len() < 2 {
        return unchanged();
    }

    // Emit: case mark, canonical-cased parts, separators/fillers.
    let mark = if chars[0].is_uppercase() {
        &scheme.case_upper
    } else {
        &scheme.case_lower
    };
    let mut out = TokenStream::default();
    out.push(Token::classified(mark.clone(), scheme));
    for (i, &(s, e)) in best.parts.iter().enumerate() {
        if i > 0 {
            match best.fillers[i - 1] {
                None => out.push(Token::classified(scheme.compound_sep.clone(), scheme)),
                Some((fs, fe)) => {
                    let letters: String = chars[fs..fe].iter().collect();
                    out.push(Token::classified(format!("@{letters}@"), scheme));
                }
            }
        }
        let folded: String = chars[s..e].iter().collect::<String>().to_lowercase();
        let canonical = lexicon
            .lookup(&folded)
            .map(|(_, c)| c.to_string())
            .unwrap_or_else(|| chars[s..e].iter().collect());
        out.push(Token::classified(canonical, scheme));
    }

    // Reversibility guard: refuse any split the joiner cannot undo.
    match join_compound(&out, scheme) {
        Ok(joined) if joined.len() == 1 && joined.tokens[0].text == token => out,
        _ => unchanged(),
    }
}

/// Split every Plain token of a stream; suffix parts and other marker
/// tokens pass through untouched.
pub fn split_compounds_stream(
    stream: &TokenStream,
    lexicon: &FrequencyLexicon,
    config: &CompoundConfig,
    scheme: &MarkerScheme,
) -> TokenStream {
    let mut out = TokenStream::default();
    for tok in stream.iter() {
        if tok.kind == TokenKind::Plain {
            for t in split_compound(&tok.text, lexicon, config, scheme).tokens {
                out.push(t);
            }
        } else {
            out.push(tok.clone());
        }
    }
    out
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

fn is_part(kind: TokenKind) -> bool {
    matches!(kind, TokenKind::Plain | TokenKind::LemmaToken)
}

fn filler_letters(text: &str) -> &str {
    &text[1..text.len() - 1]
}

/// Merge every maximal compound run `[#U|#L] p1 (@@|@f@) p2 ...`: parts are
/// concatenated with filler letters inserted, every non-initial part is
/// lowercased at its first character, and the case mark is applied to the
/// merged word. Exact inverse of [`split_compound`] on its outputs.
pub fn join_compound(stream: &TokenStream, scheme: &MarkerScheme) -> Result<TokenStream> {
    let (out, diags) = join_compound_lenient(stream, scheme);
    if let Some(d) = diags.into_iter().next() {
        return Err(Error::MalformedStream(d));
    }
    Ok(out)
}

/// Best-effort variant: dangling case marks and separators are dropped with
/// a diagnostic (fillers keep their letters).
pub fn join_compound_lenient(
    stream: &TokenStream,
    scheme: &MarkerScheme,
) -> (TokenStream, Vec<String>) {
    let mut out = TokenStream::default();
    let mut diags = Vec::new();
    let toks = &stream.tokens;
    let mut i = 0;
    while i < toks.len() {
        let t = &toks[i];
        let is_mark = matches!(t.kind, TokenKind::CaseMarkUpper | TokenKind::CaseMarkLower);
        let is_sep =
            matches!(t.kind, TokenKind::CompoundSeparator | TokenKind::Filler);
        if is_sep {
            diags.push(format!("dangling {:?} with no part on its left", t.text));
            if t.kind == TokenKind::Filler {
                out.push(Token::classified(filler_letters(&t.text), scheme));
            }
            i += 1;
            continue;
        }
        if !is_mark && !(is_part(t.kind) && next_is_sep(toks, i + 1)) {
            out.push(t.clone());
            i += 1;
            continue;
        }
        // A compound run starts here.
        let mark = if is_mark { Some(t.kind) } else { None };
        let mut j = if is_mark { i + 1 } else { i };
        if mark.is_some() && !toks.get(j).is_some_and(|p| is_part(p.kind)) {
            diags.push(format!("dangling case mark {:?}", t.text));
            i = j;
            continue;
        }
        let mut merged = toks[j].text.clone();
        j += 1;
        while let Some(sep) = toks.get(j) {
            let glue = match sep.kind {
                TokenKind::CompoundSeparator => String::new(),
                TokenKind::Filler => filler_letters(&sep.text).to_string(),
                _ => break,
            };
            match toks.get(j + 1) {
                Some(p) if is_part(p.kind) => {
                    merged.push_str(&glue);
                    merged.push_str(&lowercase_first(&p.text));
                    j += 2;
                }
                _ => {
                    diags.push(format!(
                        "dangling {:?} with no part on its right",
                        sep.text
                    ));
                    merged.push_str(&glue);
                    j += 1;
                    break;
                }
            }
        }
        let merged = match mark {
            Some(TokenKind::CaseMarkUpper) => uppercase_first(&merged),
            Some(TokenKind::CaseMarkLower) => lowercase_first(&merged),
            _ => merged,
        };
        out.push(Token::classified(merged, scheme));
        i = j;
    }
    (out, diags)
}

fn next_is_sep(toks: &[Token], i: usize) -> bool {
    toks.get(i).is_some_and(|t| {
        matches!(t.kind, TokenKind::CompoundSeparator | TokenKind::Filler)
    })
}
