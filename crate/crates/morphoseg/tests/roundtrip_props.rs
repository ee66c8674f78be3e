//! Property tests for the losslessness contracts: escaping, BPE
//! application, and the full segment/desegment cascades.

use morphoseg::affix::AffixLanguage;
use morphoseg::bpe::learn_bpe_from_counts;
use morphoseg::compound::FrequencyLexicon;
use morphoseg::lemmatag::{build_inflection_lexicon, decode_lemmatag, encode_lemmatag, AnalyzedToken, MorphTag};
use morphoseg::pipeline::{desegment, segment, PipelineConfig, Resources, Strategy as Mode};
use morphoseg::{escape_corpus_token, unescape_corpus_token, MarkerScheme, TokenStream};
use proptest::prelude::*;

fn token_strategy() -> impl Strategy<Value = String> {
    let plain = proptest::collection::vec(
        any::<char>().prop_filter("no whitespace", |c| !c.is_whitespace()),
        1..10,
    )
    .prop_map(|cs| cs.into_iter().collect::<String>());
    let markerish = prop_oneof![
        Just("$$".to_string()),
        Just("$$en".to_string()),
        Just("@@".to_string()),
        Just("@-@".to_string()),
        Just("#U".to_string()),
        Just("#L".to_string()),
        Just("@es@".to_string()),
        Just("x##".to_string()),
        Just("a@@b".to_string()),
        Just("##".to_string()),
        Just("Fisch-Markt".to_string()),
        Just("\u{FFF0}1".to_string()),
    ];
    prop_oneof![3 => plain, 2 => markerish]
}

fn sentence_strategy() -> impl Strategy<Value = String> {
    proptest::collection::vec(token_strategy(), 0..10).prop_map(|ts| ts.join(" "))
}

proptest! {
    #[test]
    fn escape_unescape_identity(token in token_strategy()) {
        let scheme = MarkerScheme::default();
        let escaped = escape_corpus_token(&token, &scheme);
        prop_assert_eq!(unescape_corpus_token(&escaped, &scheme).unwrap(), token);
    }

    #[test]
    fn baseline_round_trip(line in sentence_strategy()) {
        let scheme = MarkerScheme::default();
        let cfg = PipelineConfig::new(Mode::BaselineBpe);
        let merges = learn_bpe_from_counts(
            [("die", 9u64), ("Fische", 4), ("ab", 2)].into_iter(), 40);
        let res = Resources { merges: Some(&merges), ..Resources::default() };
        let input = TokenStream::parse(&line, &scheme);
        let seg = segment(&input, &cfg, &res).unwrap();
        let back = desegment(&seg, &cfg, &res, true).unwrap();
        prop_assert_eq!(back.stream.to_line(), input.to_line());
    }

    #[test]
    fn segmentation_round_trip(line in sentence_strategy()) {
        let scheme = MarkerScheme::default();
        let cfg = PipelineConfig::new(Mode::Segmentation);
        let merges = learn_bpe_from_counts(
            [("zier", 9u64), ("Fisch", 9), ("wert", 5), ("grenz", 5)].into_iter(), 80);
        let mut freq = FrequencyLexicon::default();
        freq.insert("zier".into(), 12, "zier".into());
        freq.insert("fisch".into(), 30, "Fisch".into());
        freq.insert("grenz".into(), 8, "Grenz".into());
        freq.insert("wert".into(), 9, "Wert".into());
        let res = Resources { merges: Some(&merges), freq: Some(&freq), ..Resources::default() };
        let input = TokenStream::parse(&line, &scheme);
        let seg = segment(&input, &cfg, &res).unwrap();
        let back = desegment(&seg, &cfg, &res, true).unwrap();
        prop_assert_eq!(back.stream.to_line(), input.to_line());
    }

    #[test]
    fn czech_segmentation_round_trip(line in sentence_strategy()) {
        let scheme = MarkerScheme::default();
        let mut cfg = PipelineConfig::new(Mode::Segmentation);
        cfg.language = AffixLanguage::CzechAggressive;
        let merges = learn_bpe_from_counts(
            [("žen", 5u64), ("dom", 5)].into_iter(), 40);
        let res = Resources { merges: Some(&merges), ..Resources::default() };
        let input = TokenStream::parse(&line, &scheme);
        let seg = segment(&input, &cfg, &res).unwrap();
        let back = desegment(&seg, &cfg, &res, true).unwrap();
        prop_assert_eq!(back.stream.to_line(), input.to_line());
    }
}

fn annotated_sentence_strategy() -> impl Strategy<Value = Vec<AnalyzedToken>> {
    let analyzed = prop_oneof![
        Just(("Grenzen", "Grenze", "<+NN><Fem><Acc><Pl><NA>")),
        Just(("will", "wollen", "<+V><1><Sg><Pres><Ind>")),
        Just(("großen", "groß<Pos>", "<+ADJ><NoGend><Dat><Pl><St>")),
        Just(("Raubfischen", "Raub<NN>Fisch", "<+NN><Masc><Dat><Pl><NA>")),
        Just(("für", "für", "[APPR-Acc]")),
        Just(("Bewegungen", "Planet<NN>bewegen<V>ung<SUFF>", "<+NN><Fem><Gen><Pl><NA>")),
    ]
    .prop_map(|(s, l, t)| {
        AnalyzedToken::analyzed(s, l, MorphTag::parse(t).unwrap())
    });
    let passthrough = prop_oneof![
        Just(","), Just("2019"), Just("Berlin"), Just("@@"),
    ]
    .prop_map(AnalyzedToken::passthrough);
    proptest::collection::vec(
        prop_oneof![3 => analyzed, 1 => passthrough],
        0..8,
    )
}

proptest! {
    #[test]
    fn lemmatag_closure_and_token_arithmetic(sent in annotated_sentence_strategy()) {
        let scheme = MarkerScheme::default();
        let corpus = vec![sent.clone()];
        let lex = build_inflection_lexicon(&corpus, None);
        let encoded = encode_lemmatag(&sent, &scheme);
        let analyzed = sent.iter().filter(|t| t.analysis.is_some()).count();
        let passthrough = sent.len() - analyzed;
        prop_assert_eq!(encoded.len(), 2 * analyzed + passthrough);
        let decoded = decode_lemmatag(&encoded, &lex, &scheme);
        let surface: Vec<&str> = sent.iter().map(|t| t.surface.as_str()).collect();
        prop_assert_eq!(decoded.stream.to_line(), surface.join(" "));
        prop_assert!(decoded.diagnostics.is_empty());
    }

    #[test]
    fn lemmatag_round_trip_through_bpe(sent in annotated_sentence_strategy()) {
        let corpus = vec![sent.clone()];
        let lex = build_inflection_lexicon(&corpus, None);
        let merges = learn_bpe_from_counts([("Grenze", 3u64), ("wollen", 3)].into_iter(), 30);
        let cfg = PipelineConfig::new(Mode::LemmaTag);
        let res = Resources { merges: Some(&merges), inflex: Some(&lex), ..Resources::default() };
        let seg = morphoseg::pipeline::segment_annotated(&sent, &cfg, &res).unwrap();
        let back = desegment(&seg, &cfg, &res, true).unwrap();
        let surface: Vec<&str> = sent.iter().map(|t| t.surface.as_str()).collect();
        prop_assert_eq!(back.stream.to_line(), surface.join(" "));
    }

    #[test]
    fn desegment_is_idempotent_on_marker_free_output(line in "[a-zA-Zäöüß]{0,40}( [a-zA-Zäöüß]{1,12}){0,6}") {
        let scheme = MarkerScheme::default();
        let cfg = PipelineConfig::new(Mode::Segmentation);
        let merges = learn_bpe_from_counts(std::iter::empty(), 0);
        let res = Resources { merges: Some(&merges), ..Resources::default() };
        let input = TokenStream::parse(&line, &scheme);
        let once = desegment(&input, &cfg, &res, false).unwrap();
        let twice = desegment(&once.stream, &cfg, &res, false).unwrap();
        prop_assert_eq!(twice.stream.to_line(), once.stream.to_line());
    }
}
