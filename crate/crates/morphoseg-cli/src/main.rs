//! Command-line front end: one subcommand per pipeline stage plus the
//! end-to-end `segment`/`desegment` cascades.
//!
//! Conventions: data on stdout, diagnostics on stderr, never interleaved.
//! Exit 0 on full success, 1 when best-effort processing emitted per-line
//! diagnostics, 2 on configuration or file-format errors. All line
//! processing is order-preserving, also under `--jobs N`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use morphoseg::affix::{AffixLanguage, AffixRuleSet};
use morphoseg::bpe::{apply_bpe, learn_bpe, merge_bpe_lenient, BpeConfig, MergeTable};
use morphoseg::compound::{
    build_frequency_lexicon, split_compounds_stream, CompoundConfig, FrequencyLexicon,
};
use morphoseg::lemmatag::{
    build_inflection_lexicon, decode_lemmatag, encode_lemmatag, read_annotations,
    InflectionLexicon,
};
use morphoseg::pipeline::{
    apply_truecase, desegment, filter_lengths, hyphen_join_lenient, hyphen_split,
    learn_truecaser, revert_truecase, segment, segment_annotated, tokenize, vocab_stats,
    PipelineConfig, Resources, Strategy, TruecaseModel,
};
use morphoseg::{MarkerScheme, TokenStream};

const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (formats: morphoseg-bpe v1, morphoseg-affix v1)"
);

#[derive(Parser)]
#[command(name = "morphoseg", version = VERSION, about = "Reversible subword segmentation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LangOpt {
    De,
    CsLight,
    CsAggressive,
}

impl LangOpt {
    fn language(self) -> AffixLanguage {
        match self {
            LangOpt::De => AffixLanguage::German,
            LangOpt::CsLight => AffixLanguage::CzechLight,
            LangOpt::CsAggressive => AffixLanguage::CzechAggressive,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyOpt {
    Baseline,
    Lemmatag,
    Segmentation,
}

impl StrategyOpt {
    fn strategy(self) -> Strategy {
        match self {
            StrategyOpt::Baseline => Strategy::BaselineBpe,
            StrategyOpt::Lemmatag => Strategy::LemmaTag,
            StrategyOpt::Segmentation => Strategy::Segmentation,
        }
    }
}

#[derive(Args)]
struct Io {
    /// Input file (defaults to standard input)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file (defaults to standard output)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Number of worker threads; output order is preserved regardless
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Line-oriented key=value file supplying defaults for any flag
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Learn BPE merge operations from a (possibly concatenated) corpus
    LearnBpe {
        #[command(flatten)]
        io: Io,
        /// Number of merge operations to learn
        #[arg(long, default_value_t = 29_500)]
        merges: u32,
        /// Note that the corpus is a source+target concatenation
        #[arg(long)]
        joint: bool,
        /// Additional input files appended after --input (joint learning)
        #[arg(long = "more-input")]
        more_input: Vec<PathBuf>,
    },
    /// Apply learned merges, marking continuation pieces with `##`
    ApplyBpe {
        #[command(flatten)]
        io: Io,
        /// Merge-table file
        #[arg(long)]
        bpe: PathBuf,
    },
    /// Reassemble `##`-marked continuation runs
    MergeBpe {
        #[command(flatten)]
        io: Io,
        /// Abort on the first malformed line instead of best-effort output
        #[arg(long)]
        strict: bool,
    },
    /// Detach inflectional suffixes as `$$`-marked tokens
    SplitSuffixes {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value = "de")]
        lang: LangOpt,
        /// Custom rule-table file overriding the built-in table
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Re-attach `$$`-marked suffix tokens
    JoinSuffixes {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        strict: bool,
    },
    /// Build a case-folded frequency lexicon from a corpus
    LearnFreq {
        #[command(flatten)]
        io: Io,
    },
    /// Split compounds by geometric-mean part frequency
    SplitCompounds {
        #[command(flatten)]
        io: Io,
        /// Frequency-lexicon file
        #[arg(long)]
        freq: PathBuf,
        #[arg(long, default_value_t = 4)]
        min_part_size: usize,
        #[arg(long, default_value_t = 2)]
        min_count: u64,
        #[arg(long, default_value_t = 999_999_999)]
        max_count: u64,
        #[arg(long, default_value_t = 4)]
        max_parts: usize,
    },
    /// Re-merge compound runs (`#U part @@ part`, fillers included)
    JoinCompounds {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        strict: bool,
    },
    /// Rewrite annotated text into tag/lemma token streams
    EncodeLemmatag {
        #[command(flatten)]
        io: Io,
    },
    /// Re-inflect tag/lemma streams via an inflection lexicon
    DecodeLemmatag {
        #[command(flatten)]
        io: Io,
        /// Inflection-lexicon file
        #[arg(long)]
        inflex: PathBuf,
    },
    /// Build an inflection lexicon from annotated text
    BuildInflex {
        #[command(flatten)]
        io: Io,
        /// Monolingual frequency list ranking orthographic variants
        #[arg(long)]
        freq: Option<PathBuf>,
        /// Additional paradigm file merged into the lexicon
        #[arg(long)]
        paradigm: Option<PathBuf>,
    },
    /// Learn a truecasing model (majority casing per token)
    LearnTruecase {
        #[command(flatten)]
        io: Io,
    },
    /// Lower sentence-initial tokens to their majority casing
    Truecase {
        #[command(flatten)]
        io: Io,
        /// Truecase-model file (not needed with --revert)
        #[arg(long)]
        model: Option<PathBuf>,
        /// Re-capitalize sentence-initial tokens instead
        #[arg(long)]
        revert: bool,
    },
    /// Split internal hyphens into standalone `@-@` tokens
    HyphenSplit {
        #[command(flatten)]
        io: Io,
        /// Rejoin `X @-@ Y` into `X-Y` instead
        #[arg(long)]
        revert: bool,
        #[arg(long)]
        strict: bool,
    },
    /// Two-stage length filtering for parallel training data
    Filter {
        /// Source-side input file
        #[arg(long)]
        source: PathBuf,
        /// Target-side input file
        #[arg(long)]
        target: PathBuf,
        /// Merge table for the post-BPE length check
        #[arg(long)]
        bpe: PathBuf,
        #[arg(long)]
        out_source: PathBuf,
        #[arg(long)]
        out_target: PathBuf,
        #[arg(long, default_value_t = 50)]
        max_len_raw: usize,
        #[arg(long, default_value_t = 60)]
        max_len_bpe: usize,
        /// Report file (defaults to standard output)
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Full segmentation cascade for one strategy
    Segment {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value = "segmentation")]
        strategy: StrategyOpt,
        #[arg(long, value_enum, default_value = "de")]
        lang: LangOpt,
        /// Merge-table file (required by every strategy)
        #[arg(long)]
        bpe: PathBuf,
        /// Frequency lexicon (required for German segmentation)
        #[arg(long)]
        freq: Option<PathBuf>,
        /// Truecase model (optional; enables the truecasing stage)
        #[arg(long)]
        truecase: Option<PathBuf>,
        /// Custom suffix rule table
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Disable hyphen splitting for the segmentation strategy
        #[arg(long)]
        no_hyphen_split: bool,
    },
    /// Exact inverse cascade (best-effort on malformed marker streams)
    Desegment {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value = "segmentation")]
        strategy: StrategyOpt,
        #[arg(long, value_enum, default_value = "de")]
        lang: LangOpt,
        /// Inflection lexicon (lemmatag strategy)
        #[arg(long)]
        inflex: Option<PathBuf>,
        /// Truecase model; its presence enables re-capitalization
        #[arg(long)]
        truecase: Option<PathBuf>,
        #[arg(long)]
        no_hyphen_split: bool,
        #[arg(long)]
        strict: bool,
    },
    /// Vocabulary statistics (types, tokens, marker-kind histogram)
    Stats {
        #[command(flatten)]
        io: Io,
    },
    /// Whitespace tokenization with punctuation detachment and escaping
    Tokenize {
        #[command(flatten)]
        io: Io,
    },
}

fn main() -> ExitCode {
    let args = match inject_config_defaults(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("morphoseg: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    match run(cli.command) {
        Ok(diagnostics) => {
            if diagnostics > 0 {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("morphoseg: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Expand `--config FILE` into default arguments: each `key=value` line
/// becomes `--key value` unless the flag was given explicitly. Boolean
/// flags use `key=true`.
fn inject_config_defaults(mut args: Vec<String>) -> Result<Vec<String>> {
    let mut config_path = None;
    for (i, a) in args.iter().enumerate() {
        if a == "--config" {
            config_path = args.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            config_path = Some(p.to_string());
        }
    }
    let Some(path) = config_path else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("cannot read config file {path}"))?;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{path}:{}: expected key=value", i + 1);
        };
        let flag = format!("--{key}");
        let already = args
            .iter()
            .any(|a| a == &flag || a.starts_with(&format!("{flag}=")));
        if already {
            continue;
        }
        if value == "true" {
            args.push(flag);
        } else if value != "false" {
            args.push(flag);
            args.push(value.to_string());
        }
    }
    Ok(args)
}

fn open_input(path: &Option<PathBuf>) -> Result<Box<dyn BufRead>> {
    match path {
        Some(p) => {
            let f = File::open(p).with_context(|| format!("cannot open {}", p.display()))?;
            Ok(Box::new(BufReader::new(f)))
        }
        None => Ok(Box::new(BufReader::new(std::io::stdin()))),
    }
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(std::io::stdout()))),
    }
}

fn read_lines(reader: impl BufRead) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for line in reader.lines() {
        out.push(line?);
    }
    Ok(out)
}

/// Order-preserving line processing, optionally parallel. Returns the
/// number of diagnostic messages (printed to stderr with line numbers).
fn process_lines<F>(io: &Io, f: F) -> Result<u64>
where
    F: Fn(&str) -> (String, Vec<String>) + Sync,
{
    let lines = read_lines(open_input(&io.input)?)?;
    let results: Vec<(String, Vec<String>)> = if io.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(io.jobs)
            .build()
            .context("cannot build thread pool")?;
        pool.install(|| {
            use rayon::prelude::*;
            lines.par_iter().map(|l| f(l)).collect()
        })
    } else {
        lines.iter().map(|l| f(l)).collect()
    };
    let mut out = open_output(&io.output)?;
    let mut diagnostics = 0u64;
    let stderr = std::io::stderr();
    let mut err = stderr.lock();
    for (i, (line, diags)) in results.iter().enumerate() {
        writeln!(out, "{line}")?;
        for d in diags {
            diagnostics += 1;
            writeln!(err, "line {}: {}", i + 1, d)?;
        }
    }
    out.flush()?;
    Ok(diagnostics)
}

fn load_merge_table(path: &Path) -> Result<MergeTable> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(MergeTable::read(BufReader::new(f), &path.display().to_string())?)
}

fn load_freq(path: &Path) -> Result<FrequencyLexicon> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(FrequencyLexicon::read(
        BufReader::new(f),
        &path.display().to_string(),
    )?)
}

fn load_rules(
    rules: &Option<PathBuf>,
    lang: AffixLanguage,
) -> Result<std::borrow::Cow<'static, AffixRuleSet>> {
    match rules {
        Some(p) => {
            let f = File::open(p).with_context(|| format!("cannot open {}", p.display()))?;
            Ok(std::borrow::Cow::Owned(AffixRuleSet::read(
                BufReader::new(f),
                &p.display().to_string(),
            )?))
        }
        None => Ok(std::borrow::Cow::Borrowed(AffixRuleSet::builtin(lang))),
    }
}

fn load_truecase(path: &Path) -> Result<TruecaseModel> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(TruecaseModel::read(
        BufReader::new(f),
        &path.display().to_string(),
    )?)
}

fn load_inflex(path: &Path) -> Result<InflectionLexicon> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(InflectionLexicon::read(
        BufReader::new(f),
        &path.display().to_string(),
    )?)
}

fn run(command: Command) -> Result<u64> {
    let scheme = MarkerScheme::default();
    match command {
        Command::LearnBpe {
            io,
            merges,
            joint,
            more_input,
        } => {
            let mut lines = read_lines(open_input(&io.input)?)?;
            for extra in &more_input {
                lines.extend(read_lines(BufReader::new(
                    File::open(extra)
                        .with_context(|| format!("cannot open {}", extra.display()))?,
                ))?);
            }
            let corpus: Vec<TokenStream> = lines
                .iter()
                .map(|l| TokenStream::parse(l, &scheme))
                .collect();
            let cfg = BpeConfig {
                num_merges: merges,
                joint,
                ..BpeConfig::default()
            };
            let table = learn_bpe(corpus.iter(), &cfg);
            let mut out = open_output(&io.output)?;
            table.write(&mut out)?;
            out.flush()?;
            Ok(0)
        }
        Command::ApplyBpe { io, bpe } => {
            let table = load_merge_table(&bpe)?;
            process_lines(&io, |line| {
                let stream = TokenStream::parse(line, &scheme);
                (apply_bpe(&stream, &table, &scheme).to_line(), vec![])
            })
        }
        Command::MergeBpe { io, strict } => {
            let diags = process_lines(&io, |line| {
                let stream = TokenStream::parse(line, &scheme);
                let (merged, diags) = merge_bpe_lenient(&stream, &scheme);
                (merged.to_line(), diags)
            })?;
            if strict && diags > 0 {
                bail!("{diags} malformed line(s) under --strict");
            }
            Ok(diags)
        }
        Command::SplitSuffixes { io, lang, rules } => {
            let rules = load_rules(&rules, lang.language())?;
            process_lines(&io, |line| {
                let stream = TokenStream::parse(line, &scheme);
                (
                    morphoseg::affix::split_suffixes_stream(&stream, &rules, &scheme).to_line(),
                    vec![],
                )
            })
        }
        Command::JoinSuffixes { io, strict } => {
            let diags = process_lines(&io, |line| {
                let stream = TokenStream::parse(line, &scheme);
                let (joined, diags) = morphoseg::affix::join_suffixes_lenient(&stream, &scheme);
                (joined.to_line(), diags)
            })?;
            if strict && diags > 0 {
                bail!("{diags} malformed line(s) under --strict");
            }
            Ok(diags)
        }
        Command::LearnFreq { io } => {
            let lines = read_lines(open_input(&io.input)?)?;
            let corpus: Vec<TokenStream> = lines
                .iter()
                .map(|l| TokenStream::parse(l, &scheme))
                .collect();
            let lex = build_frequency_lexicon(corpus.iter());
            let mut out = open_output(&io.output)?;
            lex.write(&mut out)?;
            out.flush()?;
            Ok(0)
        }
        Command::SplitCompounds {
            io,
            freq,
            min_part_size,
            min_count,
            max_count,
            max_parts,
        } => {
            let lex = load_freq(&freq)?;
            let cfg = CompoundConfig {
                min_part_size,
                min_part_count: min_count,
                max_part_count: max_count,
                max_parts,
                ..CompoundConfig::default()
            };
            process_lines(&io, |line| {
                let stream = TokenStream::parse(line, &scheme);
                (
                    split_compounds_stream(&stream, &lex, &cfg, &scheme).to_line(),
                    vec![],
                )
            })
        }
        Command::JoinCompounds { io, strict } => {
            let diags = process_lines(&io, |line| {
                let stream = TokenStream::parse(line, &scheme);
                let (joined, diags) =
                    morphoseg::compound::join_compound_lenient(&stream, &scheme);
                (joined.to_line(), diags)
            })?;
            if strict && diags > 0 {
                bail!("{diags} malformed line(s) under --strict");
            }
            Ok(diags)
        }
        Command::EncodeLemmatag { io } => {
            let name = io
                .input
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_else(|| "<stdin>".into());
            let sentences = read_annotations(open_input(&io.input)?, &name)?;
            let mut out = open_output(&io.output)?;
            for sent in &sentences {
                writeln!(out, "{}", encode_lemmatag(sent, &scheme).to_line())?;
            }
            out.flush()?;
            Ok(0)
        }
        Command::DecodeLemmatag { io, inflex } => {
            let lex = load_inflex(&inflex)?;
            process_lines(&io, |line| {
                let stream = TokenStream::parse(line, &scheme);
                let res = decode_lemmatag(&stream, &lex, &scheme);
                (res.stream.to_line(), res.diagnostics)
            })
        }
        Command::BuildInflex { io, freq, paradigm } => {
            let name = io
                .input
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_else(|| "<stdin>".into());
            let sentences = read_annotations(open_input(&io.input)?, &name)?;
            let freq = freq.as_deref().map(load_freq).transpose()?;
            let mut lex = build_inflection_lexicon(&sentences, freq.as_ref());
            if let Some(p) = paradigm {
                lex.merge(&load_inflex(&p)?);
            }
            let mut out = open_output(&io.output)?;
            lex.write(&mut out)?;
            out.flush()?;
            Ok(0)
        }
        Command::LearnTruecase { io } => {
            let lines = read_lines(open_input(&io.input)?)?;
            let corpus: Vec<TokenStream> = lines
                .iter()
                .map(|l| TokenStream::parse(l, &scheme))
                .collect();
            let model = learn_truecaser(corpus.iter());
            let mut out = open_output(&io.output)?;
            model.write(&mut out)?;
            out.flush()?;
            Ok(0)
        }
        Command::Truecase { io, model, revert } => {
            if revert {
                return process_lines(&io, |line| {
                    let stream = TokenStream::parse(line, &scheme);
                    (revert_truecase(&stream, &scheme).to_line(), vec![])
                });
            }
            let model = model.context("--model is required unless --revert is given")?;
            let model = load_truecase(&model)?;
            process_lines(&io, |line| {
                let stream = TokenStream::parse(line, &scheme);
                (apply_truecase(&stream, &model).to_line(), vec![])
            })
        }
        Command::HyphenSplit { io, revert, strict } => {
            if revert {
                let diags = process_lines(&io, |line| {
                    let stream = TokenStream::parse(line, &scheme);
                    let (joined, diags) = hyphen_join_lenient(&stream, &scheme);
                    (joined.to_line(), diags)
                })?;
                if strict && diags > 0 {
                    bail!("{diags} malformed line(s) under --strict");
                }
                return Ok(diags);
            }
            process_lines(&io, |line| {
                let stream = TokenStream::parse(line, &scheme);
                (hyphen_split(&stream, &scheme).to_line(), vec![])
            })
        }
        Command::Filter {
            source,
            target,
            bpe,
            out_source,
            out_target,
            max_len_raw,
            max_len_bpe,
            output,
            config: _,
        } => {
            let src_lines = read_lines(BufReader::new(
                File::open(&source)
                    .with_context(|| format!("cannot open {}", source.display()))?,
            ))?;
            let tgt_lines = read_lines(BufReader::new(
                File::open(&target)
                    .with_context(|| format!("cannot open {}", target.display()))?,
            ))?;
            if src_lines.len() != tgt_lines.len() {
                bail!(
                    "source has {} lines but target has {}",
                    src_lines.len(),
                    tgt_lines.len()
                );
            }
            if max_len_raw > max_len_bpe {
                bail!("--max-len-raw must not exceed --max-len-bpe");
            }
            let table = load_merge_table(&bpe)?;
            let pairs: Vec<(TokenStream, TokenStream)> = src_lines
                .iter()
                .zip(&tgt_lines)
                .map(|(s, t)| (TokenStream::parse(s, &scheme), TokenStream::parse(t, &scheme)))
                .collect();
            let (keep, report) = filter_lengths(&pairs, max_len_raw, max_len_bpe, &table, &scheme);
            let mut src_out = BufWriter::new(File::create(&out_source)?);
            let mut tgt_out = BufWriter::new(File::create(&out_target)?);
            for (i, keep) in keep.iter().enumerate() {
                if *keep {
                    writeln!(src_out, "{}", src_lines[i])?;
                    writeln!(tgt_out, "{}", tgt_lines[i])?;
                }
            }
            src_out.flush()?;
            tgt_out.flush()?;
            let mut out = open_output(&output)?;
            report.write(&mut out)?;
            out.flush()?;
            Ok(0)
        }
        Command::Segment {
            io,
            strategy,
            lang,
            bpe,
            freq,
            truecase,
            rules,
            no_hyphen_split,
        } => {
            let mut cfg = PipelineConfig::new(strategy.strategy());
            cfg.language = lang.language();
            if no_hyphen_split {
                cfg.hyphen_split = false;
            }
            let merges = load_merge_table(&bpe)?;
            let freq = freq.as_deref().map(load_freq).transpose()?;
            let truecase = truecase.as_deref().map(load_truecase).transpose()?;
            let rules = load_rules(&rules, cfg.language)?;
            let res = Resources {
                rules: Some(&rules),
                freq: freq.as_ref(),
                merges: Some(&merges),
                truecase: truecase.as_ref(),
                inflex: None,
            };
            if strategy == StrategyOpt::Lemmatag {
                let name = io
                    .input
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_else(|| "<stdin>".into());
                let sentences = read_annotations(open_input(&io.input)?, &name)?;
                let mut out = open_output(&io.output)?;
                for sent in &sentences {
                    writeln!(out, "{}", segment_annotated(sent, &cfg, &res)?.to_line())?;
                }
                out.flush()?;
                return Ok(0);
            }
            // validate the configuration once up front so a missing
            // resource is a clean configuration error, not a line error
            segment(&TokenStream::parse("probe", &scheme), &cfg, &res)?;
            process_lines(&io, |line| {
                let stream = TokenStream::parse(line, &scheme);
                match segment(&stream, &cfg, &res) {
                    Ok(s) => (s.to_line(), vec![]),
                    Err(e) => (String::new(), vec![e.to_string()]),
                }
            })
        }
        Command::Desegment {
            io,
            strategy,
            lang,
            inflex,
            truecase,
            no_hyphen_split,
            strict,
        } => {
            let mut cfg = PipelineConfig::new(strategy.strategy());
            cfg.language = lang.language();
            if no_hyphen_split {
                cfg.hyphen_split = false;
            }
            let inflex = inflex.as_deref().map(load_inflex).transpose()?;
            if cfg.strategy == Strategy::LemmaTag && inflex.is_none() {
                bail!("--inflex is required for the lemmatag strategy");
            }
            let truecase = truecase.as_deref().map(load_truecase).transpose()?;
            let res = Resources {
                inflex: inflex.as_ref(),
                truecase: truecase.as_ref(),
                ..Resources::default()
            };
            let diags = process_lines(&io, |line| {
                let stream = TokenStream::parse(line, &scheme);
                match desegment(&stream, &cfg, &res, false) {
                    Ok(r) => (r.stream.to_line(), r.diagnostics),
                    Err(e) => (String::new(), vec![e.to_string()]),
                }
            })?;
            if strict && diags > 0 {
                bail!("{diags} malformed line(s) under --strict");
            }
            Ok(diags)
        }
        Command::Stats { io } => {
            let lines = read_lines(open_input(&io.input)?)?;
            let corpus: Vec<TokenStream> = lines
                .iter()
                .map(|l| TokenStream::parse(l, &scheme))
                .collect();
            let report = vocab_stats(corpus.iter());
            let mut out = open_output(&io.output)?;
            report.write(&mut out)?;
            out.flush()?;
            Ok(0)
        }
        Command::Tokenize { io } => process_lines(&io, |line| {
            (tokenize(line, &scheme).to_line(), vec![])
        }),
    }
}
